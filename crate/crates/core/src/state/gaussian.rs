/// `m`-th moment of a centered normal variable with standard deviation `sigma`:
/// zero for odd `m`, `(m-1)!! sigma^m` for even `m`.
pub fn gaussian_moment(m: u32, sigma: f64) -> f64 {
    if m % 2 == 1 {
        return 0.0;
    }
    let double_factorial: f64 = (1..m).step_by(2).map(f64::from).product();
    double_factorial * sigma.powi(m as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson rule for `∫ x^m φ_σ(x) dx` on `[-L, L]`.
    fn quadrature(m: u32, sigma: f64) -> f64 {
        let half_width = 14.0 * sigma;
        let n = 200_000;
        let step = 2.0 * half_width / n as f64;
        let f = |x: f64| {
            x.powi(m as i32) * (-x * x / (2.0 * sigma * sigma)).exp()
                / (sigma * (2.0 * std::f64::consts::PI).sqrt())
        };
        let mut sum = f(-half_width) + f(half_width);
        for k in 1..n {
            let x = -half_width + k as f64 * step;
            sum += if k % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        sum * step / 3.0
    }

    #[test]
    fn low_moments() {
        assert_eq!(gaussian_moment(0, 1.7), 1.0);
        assert_eq!(gaussian_moment(1, 1.7), 0.0);
        assert_eq!(gaussian_moment(4, 1.0), 3.0);
        assert_eq!(gaussian_moment(4, 2.0), 48.0);
    }

    #[test]
    fn matches_quadrature() {
        assert!((quadrature(4, 1.0) - 3.0).abs() < 1e-8);
        for m in 0..=8 {
            for sigma in [0.5, 1.0, 2.0] {
                let exact = gaussian_moment(m, sigma);
                let q = quadrature(m, sigma);
                assert!((q - exact).abs() < 1e-8 * exact.abs().max(1.0), "m={m} sigma={sigma}");
            }
        }
    }
}
