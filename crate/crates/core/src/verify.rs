//! Numerical helpers used by the reproduction checks: tensor midpoint
//! quadrature and chi-square critical values.

/// Midpoint rule on `[lo, hi)^dims` with `points` nodes per axis.
pub fn midpoint_integral<F>(dims: usize, lo: f64, hi: f64, points: usize, f: F) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    let h = (hi - lo) / points as f64;
    let total = points.pow(dims as u32);
    let mut x = vec![0.0; dims];
    let mut sum = 0.0;
    for idx in 0..total {
        let mut rest = idx;
        for xi in x.iter_mut() {
            *xi = lo + ((rest % points) as f64 + 0.5) * h;
            rest /= points;
        }
        sum += f(&x);
    }
    sum * h.powi(dims as i32)
}

/// Composite Simpson rule on `[a, b]` with `intervals` (made even) panels.
pub fn simpson<F: Fn(f64) -> f64>(a: f64, b: f64, intervals: usize, f: F) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Upper-tail z quantile for 99% one-sided confidence.
pub const Z_99: f64 = 2.326_347_874_040_841;

/// Wilson-Hilferty approximation of the chi-square quantile with `df`
/// degrees of freedom at standard-normal quantile `z`.
pub fn chi_square_quantile(df: f64, z: f64) -> f64 {
    let c = 2.0 / (9.0 * df);
    df * (1.0 - c + z * c.sqrt()).powi(3)
}

/// Pearson statistic of observed counts against expected probabilities.
pub fn chi_square(observed: &[u64], probs: &[f64]) -> f64 {
    let total: u64 = observed.iter().sum();
    observed
        .iter()
        .zip(probs)
        .map(|(&o, &p)| {
            let e = p * total as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum()
}
