//! Small quadrature helpers.

/// Composite trapezoid rule on uniformly spaced samples.
pub fn trapezoid(f: &[f64], dx: f64) -> f64 {
    match f.len() {
        0 | 1 => 0.0,
        n => dx * (f[1..n - 1].iter().sum::<f64>() + 0.5 * (f[0] + f[n - 1])),
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Maps Gauss-Legendre nodes onto `[a, b]`.
pub fn gauss_panel(a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> impl Iterator<Item = (f64, f64)> + '_ {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.0
        .iter()
        .zip(&rule.1)
        .map(move |(x, w)| (mid + half * x, half * w))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = gauss_legendre(8);
        assert!((rule.1.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let v: f64 = gauss_panel(0.0, 2.0, &rule).map(|(x, w)| w * x.powi(15)).sum();
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-9);
        let odd = gauss_legendre(7);
        assert!(odd.0[3].abs() < 1e-15);
        let v: f64 = gauss_panel(-1.0, 1.0, &odd).map(|(x, w)| w * x.powi(12)).sum();
        assert!((v - 2.0 / 13.0).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_exact_for_linear() {
        let f: Vec<f64> = (0..11).map(|i| 2.0 * i as f64 * 0.1 + 1.0).collect();
        assert!((trapezoid(&f, 0.1) - 2.0).abs() < 1e-14);
    }
}
