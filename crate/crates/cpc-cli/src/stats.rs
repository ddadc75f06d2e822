//! Small-sample summary statistics for experiment reports.

/// Arithmetic mean. Returns NaN on an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 in the denominator).
/// Returns 0.0 for fewer than two samples.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss = xs.iter().map(|&x| (x - m) * (x - m)).sum::<f64>();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Two-sided 95% Student-t critical value.
///
/// Exact table entries up to 30 degrees of freedom; above that the value
/// for the largest tabulated df at or below the requested one is used,
/// which errs on the side of a wider interval.
pub fn t95(df: usize) -> f64 {
    const TABLE: [f64; 30] = [
        12.706205, 4.302653, 3.182446, 2.776445, 2.570582, 2.446912, 2.364624, 2.306004, 2.262157,
        2.228139, 2.200985, 2.178813, 2.160369, 2.144787, 2.131450, 2.119905, 2.109816, 2.100922,
        2.093024, 2.085963, 2.079614, 2.073873, 2.068658, 2.063899, 2.059539, 2.055529, 2.051831,
        2.048407, 2.045230, 2.042272,
    ];
    match df {
        0 => f64::NAN,
        1..=30 => TABLE[df - 1],
        31..=39 => TABLE[29],
        40..=59 => 2.021075,
        60..=119 => 2.000298,
        120..=999 => 1.979930,
        _ => 1.959964,
    }
}

/// Mean with a two-sided 95% confidence interval.
///
/// Returns `(mean, lo, hi)`. With a single sample the interval collapses
/// to the point; with none all three are NaN.
pub fn mean_ci95(xs: &[f64]) -> (f64, f64, f64) {
    let m = mean(xs);
    if xs.len() < 2 {
        return (m, m, m);
    }
    let half = t95(xs.len() - 1) * sample_std(xs) / (xs.len() as f64).sqrt();
    (m, m - half, m + half)
}
