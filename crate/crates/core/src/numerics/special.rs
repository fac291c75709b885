use libm::erfc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn normal_pdf<T: Scalar>(x: T) -> T {
    let x = x.as_f64();
    T::of(FRAC_1_SQRT_2PI * (-0.5 * x * x).exp())
}

/// Standard normal distribution function, via the complementary error
/// function so both tails keep full relative precision.
pub fn normal_cdf<T: Scalar>(x: T) -> T {
    T::of(0.5 * erfc(-x.as_f64() / std::f64::consts::SQRT_2))
}

/// `(Φ(x), φ(x))` for the standard normal.
pub fn normal_cdf_pdf<T: Scalar>(x: T) -> (T, T) {
    (normal_cdf(x), normal_pdf(x))
}

/// `ln Σ exp(vᵢ)` with the usual max shift.
pub fn log_sum_exp<T: Scalar>(values: &[T]) -> Result<T> {
    let max = values
        .iter()
        .copied()
        .reduce(T::max)
        .ok_or_else(|| Error::arg("log_sum_exp of an empty slice"))?;
    if max == T::infinity() {
        return Ok(max);
    }
    if max == T::neg_infinity() {
        return Ok(max);
    }
    let sum: T = values.iter().map(|&v| (v - max).exp()).sum();
    Ok(max + sum.ln())
}

/// Numerically stable softmax of one row.
pub fn softmax<T: Scalar>(values: &[T]) -> Result<Vec<T>> {
    let lse = log_sum_exp(values)?;
    Ok(values.iter().map(|&v| (v - lse).exp()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Φ(x) = ½ + φ(x)·Σ x^{2n+1}/(2n+1)!!, exact in the limit for any x.
    fn series_cdf(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        let mut k = 1.0;
        while term.abs() > 1e-20 * sum.abs().max(1e-300) {
            k += 2.0;
            term *= x * x / k;
            sum += term;
        }
        0.5 + FRAC_1_SQRT_2PI * (-0.5 * x * x).exp() * sum
    }

    #[test]
    fn value_at_zero() {
        let (cdf, pdf) = normal_cdf_pdf(0.0_f64);
        assert_eq!(cdf, 0.5);
        assert!((pdf - 0.398_942_280_401_432_7).abs() < 1e-15);
    }

    #[test]
    fn reflection() {
        for &x in &[0.1, 0.7, 1.3, 2.5, 4.0, 7.5] {
            let sum: f64 = normal_cdf(x) + normal_cdf(-x);
            assert!((sum - 1.0).abs() < 1e-15, "x={x}");
        }
    }

    #[test]
    fn matches_series_oracle() {
        assert!((normal_cdf(1.96_f64) - 0.975_002).abs() < 1e-6);
        assert!((normal_cdf(1.96_f64) - series_cdf(1.96)).abs() < 1e-13, "{} vs {}", normal_cdf(1.96_f64), series_cdf(1.96));
        for &x in &[-3.0, -1.0, -0.25, 0.5, 2.2, 3.7] {
            assert!((normal_cdf(x) - series_cdf(x)).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn matches_trapezoid_integral() {
        let steps = 160_000;
        let lo = -8.0;
        let h = 16.0 / steps as f64;
        let mut acc = 0.0;
        let mut prev = normal_pdf(lo);
        for i in 1..=steps {
            let x = lo + h * i as f64;
            let cur = normal_pdf(x);
            acc += 0.5 * h * (prev + cur);
            prev = cur;
            if i % 4000 == 0 {
                // Φ(−8) ≈ 6e-16 is below tolerance
                assert!((normal_cdf(x) - acc).abs() < 1e-7, "x={x}");
            }
        }
    }

    #[test]
    fn cdf_is_monotone() {
        let mut prev = 0.0_f64;
        for i in -400..=400 {
            let c = normal_cdf(i as f64 * 0.02);
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn log_sum_exp_cases() {
        assert!((log_sum_exp(&[0.0_f64, 0.0]).unwrap() - 2f64.ln()).abs() < 1e-15);
        let big = log_sum_exp(&[1000.0_f64, 1000.0]).unwrap();
        assert!((big - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert!(log_sum_exp::<f64>(&[]).is_err());
    }

    #[test]
    fn log_sum_exp_matches_naive_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v: Vec<f64> = (0..10).map(|_| rng.random_range(-3.0..3.0)).collect();
        let naive = v.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&v).unwrap() - naive).abs() < 1e-12);
    }

    #[test]
    fn log_sum_exp_shift() {
        let v = [0.3_f64, -1.2, 2.5];
        let base = log_sum_exp(&v).unwrap();
        let shifted: Vec<f64> = v.iter().map(|x| x + 4.0).collect();
        assert!((log_sum_exp(&shifted).unwrap() - (base + 4.0)).abs() < 1e-12);
    }

    #[test]
    fn works_in_single_precision() {
        let c: f32 = normal_cdf(1.96_f32);
        assert!((c - 0.975_002).abs() < 1e-5);
    }
}
