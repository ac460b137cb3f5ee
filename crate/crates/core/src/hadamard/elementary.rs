use num_complex::Complex64;

/// Below this modulus `log E(u, k)` is summed as `-Σ_{j>k} u^j / j`.
const SERIES_RADIUS: f64 = 0.5;

/// Weierstrass elementary factor `E(u, k) = (1 - u) exp(u + u²/2 + ... + u^k/k)`.
pub fn elementary_factor(u: Complex64, k: u32) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    (one - u) * polynomial_part(u, k).exp()
}

fn polynomial_part(u: Complex64, k: u32) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut power = Complex64::new(1.0, 0.0);
    for j in 1..=k {
        power *= u;
        acc += power / f64::from(j);
    }
    acc
}

/// A logarithm of `E(u, k)`, holomorphic on `|u| < 1` and equal to
/// `ln(1 - u) + u + ... + u^k/k` with the principal `ln` elsewhere.
///
/// Returns `-∞` real part at `u = 1`.
pub fn log_elementary_factor(u: Complex64, k: u32) -> Complex64 {
    let r = u.norm();
    if r <= SERIES_RADIUS {
        if r == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let mut power = u.powu(k + 1);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut j = k + 1;
        loop {
            let term = power / f64::from(j);
            acc -= term;
            if term.norm() <= 1e-17 * acc.norm() {
                break;
            }
            power *= u;
            j += 1;
        }
        acc
    } else {
        (Complex64::new(1.0, 0.0) - u).ln() + polynomial_part(u, k)
    }
}

/// `e^z - 1` without cancellation for small `z`.
fn exp_m1(z: Complex64) -> Complex64 {
    let half_sin = (z.im / 2.0).sin();
    Complex64::new(
        z.re.exp_m1() * z.im.cos() - 2.0 * half_sin * half_sin,
        z.re.exp() * z.im.sin(),
    )
}

/// `1 - E(u, k)`, accurate to a few ulps relative to `|1 - E(u, k)|`.
/// For `k = 0` this is exactly `u`.
pub fn one_minus_elementary_factor(u: Complex64, k: u32) -> Complex64 {
    if k == 0 {
        return u;
    }
    if u == Complex64::new(1.0, 0.0) {
        return u;
    }
    -exp_m1(log_elementary_factor(u, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn degree_zero_is_one_minus_u() {
        assert_eq!(elementary_factor(c(0.3, 0.0), 0), c(0.7, 0.0));
    }

    #[test]
    fn unit_at_origin() {
        for k in 0..8 {
            assert_eq!(elementary_factor(c(0.0, 0.0), k), c(1.0, 0.0));
            assert_eq!(log_elementary_factor(c(0.0, 0.0), k), c(0.0, 0.0));
        }
    }

    #[test]
    fn half_with_degree_two() {
        let e = elementary_factor(c(0.5, 0.0), 2);
        assert!((e.re - 0.5 * 0.625f64.exp()).abs() < 1e-15);
        assert!((e.re - 0.934_122_98).abs() < 1e-8);
    }

    #[test]
    fn log_matches_direct_on_both_branches() {
        for &u in &[c(0.2, 0.1), c(0.49, 0.0), c(0.51, -0.2), c(-0.8, 0.3), c(1.7, 2.0)] {
            for k in 0..6 {
                let direct = elementary_factor(u, k);
                let via_log = log_elementary_factor(u, k).exp();
                assert!((direct - via_log).norm() <= 1e-13 * direct.norm().max(1.0), "{u} {k}");
            }
        }
    }

    #[test]
    fn one_minus_matches_direct() {
        assert_eq!(one_minus_elementary_factor(c(0.3, -0.2), 0), c(0.3, -0.2));
        assert_eq!(one_minus_elementary_factor(c(1.0, 0.0), 3), c(1.0, 0.0));
        for &u in &[c(0.9, 0.1), c(-0.5, 0.5), c(0.0, 1.0), c(0.3, 0.0)] {
            for k in 1..6 {
                let direct = c(1.0, 0.0) - elementary_factor(u, k);
                let accurate = one_minus_elementary_factor(u, k);
                assert!((direct - accurate).norm() < 1e-14, "{u} {k}");
            }
        }
        let u = c(1e-3, 1e-3);
        let leading = u.powu(3) / 3.0;
        let v = one_minus_elementary_factor(u, 2);
        assert!((v - leading).norm() < 2e-3 * leading.norm());
    }

    #[test]
    fn series_branch_keeps_relative_accuracy() {
        let u = c(1e-4, 2e-4);
        let l = log_elementary_factor(u, 3);
        let leading = -u.powu(4) / 4.0;
        assert!((l - leading).norm() < 1e-3 * leading.norm());
    }
}
