//! Half-spaces and cut collections.
//!
//! A cut is the closed half-space `a . z <= b`. Collections store cuts with
//! the normal scaled to unit Euclidean length, which makes the duplicate
//! test and all violation tolerances scale-free. Raw (unnormalized) cuts
//! appear only transiently, as produced by oracles.

use crate::linalg::{dot, norm2, norm_inf};
use crate::scalar::Scalar;
use thiserror::Error;

/// Default duplicate-suppression tolerance, applied componentwise to the
/// normalized `(a, b)` representation.
pub const DEFAULT_TAU_DUP: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("half-space normal must be nonzero and finite")]
    BadNormal,
    #[error("{0}")]
    BadArgument(String),
}

/// Closed half-space `{ z : a . z <= b }`.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfSpace<S> {
    pub a: Vec<S>,
    pub b: S,
}

impl<S: Scalar> HalfSpace<S> {
    pub fn new(a: Vec<S>, b: S) -> Result<Self, GeometryError> {
        if a.is_empty() || a.iter().any(|v| !v.is_finite()) || !b.is_finite() {
            return Err(GeometryError::BadNormal);
        }
        if norm2(&a) <= S::of(1e-300) {
            return Err(GeometryError::BadNormal);
        }
        Ok(HalfSpace { a, b })
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// Same half-space with `|a| = 1`.
    pub fn normalized(&self) -> HalfSpace<S> {
        let n = norm2(&self.a);
        HalfSpace {
            a: self.a.iter().map(|&v| v / n).collect(),
            b: self.b / n,
        }
    }

    /// Signed constraint violation `a . z - b`; positive outside.
    pub fn violation(&self, z: &[S]) -> S {
        debug_assert_eq!(z.len(), self.a.len());
        dot(&self.a, z) - self.b
    }

    /// Wire form: `d + 1` doubles, normal first.
    pub fn to_wire(&self) -> Vec<f64> {
        let mut w: Vec<f64> = self.a.iter().map(|v| v.to_f64_lossy()).collect();
        w.push(self.b.to_f64_lossy());
        w
    }

    pub fn from_wire(w: &[f64]) -> Result<Self, GeometryError> {
        if w.len() < 2 {
            return Err(GeometryError::BadArgument("wire payload shorter than 2 numbers".into()));
        }
        let a = w[..w.len() - 1].iter().map(|&v| S::of(v)).collect();
        HalfSpace::new(a, S::of(w[w.len() - 1]))
    }
}

/// Where a cut came from. `column` indexes the generating node's own column
/// history when the cut was produced by a column-generation oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub node: usize,
    pub round: u64,
    pub column: Option<usize>,
}

impl Provenance {
    pub fn new(node: usize, round: u64) -> Self {
        Provenance { node, round, column: None }
    }
}

/// Finite set of normalized cuts in a fixed dimension, with duplicate
/// suppression. Insertion order is preserved; the first-seen provenance of a
/// duplicate wins.
#[derive(Clone, Debug)]
pub struct CutCollection<S> {
    dim: usize,
    tau_dup: S,
    cuts: Vec<HalfSpace<S>>,
    provenance: Vec<Provenance>,
}

impl<S: Scalar> CutCollection<S> {
    pub fn new(dim: usize) -> Self {
        CutCollection {
            dim,
            tau_dup: S::of(DEFAULT_TAU_DUP),
            cuts: Vec::new(),
            provenance: Vec::new(),
        }
    }

    pub fn with_tau_dup(dim: usize, tau_dup: S) -> Self {
        CutCollection { tau_dup, ..CutCollection::new(dim) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    pub fn cuts(&self) -> &[HalfSpace<S>] {
        &self.cuts
    }

    pub fn cut(&self, i: usize) -> &HalfSpace<S> {
        &self.cuts[i]
    }

    pub fn provenance(&self, i: usize) -> Provenance {
        self.provenance[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&HalfSpace<S>, Provenance)> {
        self.cuts.iter().zip(self.provenance.iter().copied())
    }

    /// Insert a (raw or normalized) cut. Returns the index of the stored cut,
    /// which is an existing index when the cut is a duplicate under
    /// `tau_dup`.
    pub fn insert(&mut self, cut: &HalfSpace<S>, prov: Provenance) -> Result<usize, GeometryError> {
        if cut.dim() != self.dim {
            return Err(GeometryError::DimensionMismatch { expected: self.dim, got: cut.dim() });
        }
        let n = cut.normalized();
        for (i, existing) in self.cuts.iter().enumerate() {
            let da = n
                .a
                .iter()
                .zip(&existing.a)
                .fold(S::zero(), |acc, (&x, &y)| acc.max((x - y).abs()));
            if da <= self.tau_dup && (n.b - existing.b).abs() <= self.tau_dup {
                return Ok(i);
            }
        }
        self.cuts.push(n);
        self.provenance.push(prov);
        Ok(self.cuts.len() - 1)
    }

    /// Insert every cut of `other`.
    pub fn merge(&mut self, other: &CutCollection<S>) -> Result<(), GeometryError> {
        for (cut, prov) in other.iter() {
            self.insert(cut, prov)?;
        }
        Ok(())
    }

    /// Collection holding the listed cut indices, preserving order.
    pub fn subset(&self, indices: &[usize]) -> CutCollection<S> {
        let mut out = CutCollection::with_tau_dup(self.dim, self.tau_dup);
        for &i in indices {
            out.cuts.push(self.cuts[i].clone());
            out.provenance.push(self.provenance[i]);
        }
        out
    }

    /// Largest violation over the collection at `z`; `-inf` when empty.
    pub fn max_violation(&self, z: &[S]) -> S {
        self.cuts.iter().map(|c| c.violation(z)).fold(S::neg_infinity(), S::max)
    }

    /// True when every cut holds at `z` within `tol`.
    pub fn contains(&self, z: &[S], tol: S) -> bool {
        self.cuts.iter().all(|c| c.violation(z) <= tol)
    }

    /// Total number of wire payload values for all cuts.
    pub fn wire_len(&self) -> usize {
        self.cuts.len() * (self.dim + 1)
    }
}

/// The `2d` axis-aligned cuts `z_k <= m`, `-z_k <= m`: a box of radius `m`
/// in the infinity norm.
pub fn box_basis<S: Scalar>(dim: usize, m: S) -> Result<CutCollection<S>, GeometryError> {
    if dim == 0 {
        return Err(GeometryError::BadArgument("dimension must be positive".into()));
    }
    if !(m > S::zero()) || !m.is_finite() {
        return Err(GeometryError::BadArgument("box radius must be positive and finite".into()));
    }
    let mut c = CutCollection::new(dim);
    for k in 0..dim {
        for sign in [S::one(), -S::one()] {
            let mut a = vec![S::zero(); dim];
            a[k] = sign;
            let idx = c.insert(&HalfSpace::new(a, m).expect("unit axis normal"), Provenance::new(usize::MAX, 0));
            debug_assert!(idx.is_ok());
        }
    }
    Ok(c)
}

/// Convenience: max-norm of a point (used when validating box membership).
pub fn linf_norm<S: Scalar>(z: &[S]) -> S {
    norm_inf(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn hs(a: &[f64], b: f64) -> HalfSpace<f64> {
        HalfSpace::new(a.to_vec(), b).unwrap()
    }

    #[test]
    fn violation_signed_distance_for_unit_normals() {
        assert_abs_diff_eq!(hs(&[1.0, 0.0], 1.0).violation(&[2.0, 0.0]), 1.0);
        assert_abs_diff_eq!(hs(&[1.0, 0.0], 1.0).violation(&[1.0, 5.0]), 0.0);
        assert_abs_diff_eq!(hs(&[0.6, 0.8], 2.0).violation(&[3.0, 4.0]), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn contains_respects_tolerance_and_detects_emptiness() {
        let mut h = CutCollection::new(2);
        h.insert(&hs(&[1.0, 0.0], 1.0), Provenance::new(0, 0)).unwrap();
        h.insert(&hs(&[0.0, 1.0], 1.0), Provenance::new(0, 0)).unwrap();
        assert!(h.contains(&[1.0, 1.0], 1e-9));
        assert!(!h.contains(&[1.0 + 1e-6, 1.0], 1e-9));

        // Empty polyhedron: no point is contained.
        let mut empty = CutCollection::new(1);
        empty.insert(&hs(&[1.0], 1.0), Provenance::new(0, 0)).unwrap();
        empty.insert(&hs(&[-1.0], -2.0), Provenance::new(0, 0)).unwrap();
        for z in [-5.0, 0.0, 1.5, 2.0, 7.0] {
            assert!(!empty.contains(&[z], 1e-9));
        }
    }

    #[test]
    fn insert_normalizes_and_deduplicates() {
        let mut h = CutCollection::new(2);
        let i0 = h.insert(&hs(&[2.0, 0.0], 2.0), Provenance::new(3, 1)).unwrap();
        // Same half-space at a different scaling is a duplicate.
        let i1 = h.insert(&hs(&[4.0, 0.0], 4.0), Provenance::new(5, 9)).unwrap();
        assert_eq!(i0, i1);
        assert_eq!(h.len(), 1);
        assert_abs_diff_eq!(h.cut(0).a[0], 1.0);
        assert_abs_diff_eq!(h.cut(0).b, 1.0);
        // First-seen provenance wins.
        assert_eq!(h.provenance(0).node, 3);
        // A genuinely different cut is kept.
        let i2 = h.insert(&hs(&[1.0, 1e-6], 1.0), Provenance::new(0, 0)).unwrap();
        assert_eq!(i2, 1);
    }

    #[test]
    fn box_basis_shapes() {
        let b1 = box_basis(1, 1.0).unwrap();
        assert_eq!(b1.len(), 2);
        assert_abs_diff_eq!(b1.cut(0).violation(&[1.0]), 0.0);
        assert_abs_diff_eq!(b1.cut(1).violation(&[-1.0]), 0.0);

        let b2 = box_basis(2, 1e5).unwrap();
        assert_eq!(b2.len(), 4);
        assert!(b2.contains(&[1e5, -1e5], 1e-9));
        assert!(!b2.contains(&[1e5 + 1.0, 0.0], 1e-9));

        let b3 = box_basis(3, 5.0).unwrap();
        assert_eq!(b3.len(), 6);
        assert!(b3.contains(&[0.0, 0.0, 0.0], 0.0));
    }

    #[test]
    fn box_basis_rejects_bad_arguments() {
        assert!(box_basis::<f64>(0, 1.0).is_err());
        assert!(box_basis::<f64>(2, 0.0).is_err());
        assert!(box_basis::<f64>(2, -3.0).is_err());
        assert!(box_basis::<f64>(2, f64::INFINITY).is_err());
    }

    #[test]
    fn new_rejects_zero_or_nonfinite_normals() {
        assert_eq!(HalfSpace::new(vec![0.0, 0.0], 1.0).unwrap_err(), GeometryError::BadNormal);
        assert_eq!(HalfSpace::new(vec![f64::NAN, 1.0], 1.0).unwrap_err(), GeometryError::BadNormal);
        assert_eq!(HalfSpace::new(vec![1.0], f64::INFINITY).unwrap_err(), GeometryError::BadNormal);
    }

    #[test]
    fn wire_round_trip() {
        let h = hs(&[0.6, 0.8], 2.0);
        let w = h.to_wire();
        assert_eq!(w.len(), 3);
        let back = HalfSpace::<f64>::from_wire(&w).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn dimension_mismatch_is_structural_error() {
        let mut h = CutCollection::<f64>::new(2);
        let e = h.insert(&hs(&[1.0], 0.0), Provenance::new(0, 0)).unwrap_err();
        assert_eq!(e, GeometryError::DimensionMismatch { expected: 2, got: 1 });
    }
}
