//! Summary statistics used by the bootstrap and drift reports.

/// Linear-interpolated percentile (`q ∈ [0, 1]`) of an ascending slice.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of empty sample");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    sorted[lo] * (1.0 - w) + sorted[hi] * w
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample standard deviation (n − 1 denominator); 0 for fewer than 2 points.
///
/// Deviations are taken from the first sample (shifted-data form), so a
/// constant series gives exactly zero.
pub fn std_dev(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let n = x.len() as f64;
    let d: Vec<f64> = x.iter().map(|v| v - x[0]).collect();
    let s: f64 = d.iter().sum();
    let ss: f64 = d.iter().map(|v| v * v).sum();
    ((ss - s * s / n) / (n - 1.0)).max(0.0).sqrt()
}

pub fn median(x: &[f64]) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    percentile_sorted(&v, 0.5)
}

/// `s₀ = x₀`, `sₖ = α xₖ + (1 − α) sₖ₋₁`.
pub fn ewma(x: &[f64], alpha: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    for &v in x {
        let next = match out.last() {
            None => v,
            Some(&prev) => alpha * v + (1.0 - alpha) * prev,
        };
        out.push(next);
    }
    out
}

/// Least-squares slope of `y` against `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    ols_slope(&lx, &ly)
}
