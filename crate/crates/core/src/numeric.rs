//! Small numerical helpers shared by the evaluation modules.

use num_complex::Complex64;

/// Neumaier-compensated complex accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: Complex64,
    compensation: Complex64,
    abs_sum: f64,
    count: u64,
}

fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: Complex64) {
        neumaier(&mut self.sum.re, &mut self.compensation.re, x.re);
        neumaier(&mut self.sum.im, &mut self.compensation.im, x.im);
        self.abs_sum += x.norm();
        self.count += 1;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        let (abs_sum, count) = (self.abs_sum, self.count);
        self.add(other.sum);
        self.add(other.compensation);
        self.abs_sum = abs_sum + other.abs_sum;
        self.count = count + other.count;
    }

    pub fn value(&self) -> Complex64 {
        self.sum + self.compensation
    }

    /// Sum of the moduli of everything added so far.
    pub fn abs_sum(&self) -> f64 {
        self.abs_sum
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Bound on the accumulated rounding error of the compensated sum.
    pub fn rounding_bound(&self) -> f64 {
        let u = f64::EPSILON / 2.0;
        let n = self.count as f64;
        2.0 * u * self.value().norm() + 4.0 * n * u * u * self.abs_sum
    }
}

/// Ordinary least-squares line `y = a + b x`; returns `(a, b, rms residual)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    (intercept, slope, (rss / n).sqrt())
}

/// `n` points equally spaced in `log` between `lo` and `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Map `-0.0` to `0.0` so that equal locations compare and hash identically.
pub(crate) fn canonical_zero(x: f64) -> f64 {
    x + 0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let mut s = CompensatedSum::new();
        s.add(Complex64::new(1e16, 0.0));
        s.add(Complex64::new(1.0, 0.0));
        s.add(Complex64::new(-1e16, 0.0));
        assert_eq!(s.value().re, 1.0);
    }

    #[test]
    fn linear_fit_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let (a, b, r) = linear_fit(&xs, &ys);
        assert!((a - 1.0).abs() < 1e-14 && (b - 2.0).abs() < 1e-14 && r < 1e-14);
    }

    #[test]
    fn log_space_endpoints() {
        let v = log_space(5.0, 40.0, 7);
        assert_eq!(v[0], 5.0);
        assert_eq!(v[6], 40.0);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }
}
