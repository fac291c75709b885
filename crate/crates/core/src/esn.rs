//! Rectified epsilon-skew-normal expectations and the activation movement
//! of feature-averaging ensembles, with Monte-Carlo oracles.
//!
//! `ESN(μ, σ, ε)` has density `φ((x−μ)/((1+ε)σ))/σ` left of `μ` and
//! `φ((x−μ)/((1−ε)σ))/σ` right of it; `ε < 0` skews it to the right.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{normal_cdf, normal_pdf};
use crate::rng::stream;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EsnParams<T = f64> {
    pub mu: T,
    pub sigma: T,
    pub eps_skew: T,
}

impl<T: Scalar> EsnParams<T> {
    pub fn new(mu: T, sigma: T, eps_skew: T) -> Result<Self> {
        check_sigma(sigma)?;
        check_eps(eps_skew)?;
        if !mu.is_finite() {
            return Err(Error::arg("mu must be finite"));
        }
        Ok(Self { mu, sigma, eps_skew })
    }

    /// Same location and skew with the spread divided by `√M`.
    pub fn averaged(&self, members: usize) -> Self {
        Self { sigma: self.sigma / T::of_usize(members).sqrt(), ..*self }
    }
}

fn check_sigma<T: Scalar>(sigma: T) -> Result<()> {
    if !(sigma > T::zero()) || !sigma.is_finite() {
        return Err(Error::arg(format!("sigma must be positive and finite, got {sigma}")));
    }
    Ok(())
}

fn check_eps<T: Scalar>(eps: T) -> Result<()> {
    if !(eps > -T::one() && eps <= T::zero()) {
        return Err(Error::arg(format!("skew must lie in (-1, 0], got {eps}")));
    }
    Ok(())
}

fn check_members(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::arg("member count must be at least 1"));
    }
    Ok(())
}

pub fn esn_pdf<T: Scalar>(x: T, p: &EsnParams<T>) -> T {
    let scale = if x < p.mu { T::one() + p.eps_skew } else { T::one() - p.eps_skew };
    normal_pdf((x - p.mu) / (scale * p.sigma)) / p.sigma
}

/// `E[max(0, X)]` for `X ~ ESN(μ, σ, ε)`.
///
/// For `μ ≥ 0` this is
/// `μ[1 − aΦ(−μ/(aσ))] + a²σφ(μ/(aσ)) − 4εσφ(0)` with `a = 1+ε`. For
/// `μ < 0` only the right branch crosses zero and the mean is
/// `a'[μΦ(μ/(a'σ)) + a'σφ(μ/(a'σ))]` with `a' = 1−ε`.
pub fn rectified_esn_mean<T: Scalar>(p: &EsnParams<T>) -> T {
    let EsnParams { mu, sigma, eps_skew: eps } = *p;
    if mu >= T::zero() {
        let a = T::one() + eps;
        let s = a * sigma;
        mu * (T::one() - a * normal_cdf(-mu / s)) + a * a * sigma * normal_pdf(mu / s)
            - T::of(4.0) * eps * sigma * normal_pdf(T::zero())
    } else {
        let a = T::one() - eps;
        let s = a * sigma;
        a * (mu * normal_cdf(mu / s) + s * normal_pdf(mu / s))
    }
}

/// `E_in[z̄ − z]`: rectified mean of the average of `M` Gaussian
/// pre-activations minus that of one,
/// `μ[Φ(μ√M/σ) − Φ(μ/σ)] + σ[φ(μ√M/σ)/√M − φ(μ/σ)]`.
pub fn id_movement<T: Scalar>(mu: T, sigma: T, members: usize) -> Result<T> {
    check_sigma(sigma)?;
    check_members(members)?;
    if members == 1 {
        return Ok(T::zero());
    }
    let c = T::of_usize(members).sqrt();
    let b = mu / sigma;
    Ok(mu * (normal_cdf(b * c) - normal_cdf(b)) + sigma * (normal_pdf(b * c) / c - normal_pdf(b)))
}

/// `E_out[z̄ − z]` for ESN pre-activations whose ensemble average is
/// modelled as `ESN(μ, σ/√M, ε)`. For `μ ≥ 0`:
/// `(4εσ/√(2π))(1 − 1/√M) + aμ[Φ(μ√M/(aσ)) − Φ(μ/(aσ))]
///  + a²σ[φ(μ√M/(aσ))/√M − φ(μ/(aσ))]`, `a = 1+ε`.
pub fn ood_movement<T: Scalar>(mu: T, sigma: T, eps: T, members: usize) -> Result<T> {
    check_sigma(sigma)?;
    check_eps(eps)?;
    check_members(members)?;
    if members == 1 {
        return Ok(T::zero());
    }
    let c = T::of_usize(members).sqrt();
    if mu < T::zero() {
        let single = EsnParams { mu, sigma, eps_skew: eps };
        return Ok(rectified_esn_mean(&single.averaged(members)) - rectified_esn_mean(&single));
    }
    let a = T::one() + eps;
    let s = a * sigma;
    let four = T::of(4.0);
    let inv_sqrt_2pi = normal_pdf(T::zero());
    Ok(four * eps * sigma * inv_sqrt_2pi * (T::one() - c.recip())
        + a * mu * (normal_cdf(mu * c / s) - normal_cdf(mu / s))
        + a * a * sigma * (normal_pdf(mu * c / s) / c - normal_pdf(mu / s)))
}

/// The two parts of `E_out[z̄ − z] − E_in[z̄ − z]` at a shared `σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapTerms<T = f64> {
    /// `μ[T(bc, a) − T(b, a)]` with `T(x, a) = aΦ(x/a) − Φ(x)`.
    pub cdf_term: T,
    /// `V(b, a, c)`, the density and skew-offset part.
    pub pdf_term: T,
    pub gap: T,
}

/// Splits the movement gap as `(Ⅰ) + (Ⅱ)` with `a = 1+ε`, `b = μ/σ`,
/// `c = √M`. Requires `μ ≥ 0`.
pub fn movement_gap_terms<T: Scalar>(mu: T, sigma: T, eps: T, members: usize) -> Result<GapTerms<T>> {
    check_sigma(sigma)?;
    check_eps(eps)?;
    check_members(members)?;
    if !(mu >= T::zero()) {
        return Err(Error::arg(format!("the movement gap is defined for mu >= 0, got {mu}")));
    }
    let a = T::one() + eps;
    let b = mu / sigma;
    let c = T::of_usize(members).sqrt();
    let t = |x: T| a * normal_cdf(x / a) - normal_cdf(x);
    let u = |x: T| a * a * normal_pdf(x / a) - normal_pdf(x);
    let cdf_term = mu * (t(b * c) - t(b));
    let pdf_term = sigma
        * (u(b * c) / c - u(b) + T::of(4.0) * (a - T::one()) * normal_pdf(T::zero()) * (T::one() - c.recip()));
    Ok(GapTerms { cdf_term, pdf_term, gap: cdf_term + pdf_term })
}

pub fn movement_gap<T: Scalar>(mu: T, sigma: T, eps: T, members: usize) -> Result<T> {
    movement_gap_terms(mu, sigma, eps, members).map(|g| g.gap)
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub se: f64,
    pub draws: u64,
}

impl McEstimate {
    /// `|value − mean|` in standard errors.
    pub fn z_score(&self, value: f64) -> f64 {
        (value - self.mean).abs() / self.se
    }
}

const MC_CHUNKS: u64 = 64;

/// Averages `f` over `draws` evaluations split into fixed chunks with
/// their own streams, so the estimate does not depend on thread count.
fn monte_carlo(draws: u64, seed: u64, purpose: &str, f: impl Fn(&mut ChaCha8Rng) -> f64 + Sync) -> Result<McEstimate> {
    if draws < 2 {
        return Err(Error::arg("Monte-Carlo needs at least 2 draws"));
    }
    let partial: Vec<(f64, f64, u64)> = (0..MC_CHUNKS)
        .into_par_iter()
        .map(|chunk| {
            let count = draws / MC_CHUNKS + u64::from(chunk < draws % MC_CHUNKS);
            let mut rng = stream(seed, &format!("{purpose}/{chunk}"));
            let (mut s, mut ss) = (0.0, 0.0);
            for _ in 0..count {
                let v = f(&mut rng);
                s += v;
                ss += v * v;
            }
            (s, ss, count)
        })
        .collect();
    let (s, ss, n) = partial.iter().fold((0.0, 0.0, 0u64), |acc, p| (acc.0 + p.0, acc.1 + p.1, acc.2 + p.2));
    let nf = n as f64;
    let mean = s / nf;
    let var = ((ss - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Ok(McEstimate { mean, se: (var / nf).sqrt(), draws: n })
}

/// One draw from `ESN(μ, σ, ε)`: the left half-normal branch with
/// probability `(1+ε)/2`, the right one otherwise.
pub fn sample_esn<R: Rng + ?Sized>(p: &EsnParams<f64>, rng: &mut R) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    let left = rng.random::<f64>() < 0.5 * (1.0 + p.eps_skew);
    if left {
        p.mu - (1.0 + p.eps_skew) * p.sigma * z.abs()
    } else {
        p.mu + (1.0 - p.eps_skew) * p.sigma * z.abs()
    }
}

fn relu(x: f64) -> f64 {
    x.max(0.0)
}

/// Ensemble average and first member of `M` iid `N(μ, σ²)` draws. The
/// other `M−1` draws enter only through their sum, sampled directly as
/// `N((M−1)μ, (M−1)σ²)`.
fn gaussian_pair<R: Rng + ?Sized>(mu: f64, sigma: f64, members: usize, rng: &mut R) -> (f64, f64) {
    let z: f64 = StandardNormal.sample(rng);
    let first = mu + sigma * z;
    let rest = members as f64 - 1.0;
    let others = if rest > 0.0 {
        let w: f64 = StandardNormal.sample(rng);
        rest * mu + rest.sqrt() * sigma * w
    } else {
        0.0
    };
    ((first + others) / members as f64, first)
}

/// Monte-Carlo `E[max(0, X)]`.
pub fn mc_rectified_mean(p: &EsnParams<f64>, draws: u64, seed: u64) -> Result<McEstimate> {
    let p = *p;
    monte_carlo(draws, seed, "esn/rectified", move |rng| relu(sample_esn(&p, rng)))
}

/// Monte-Carlo `E[relu(mean of M normals) − relu(first normal)]`.
pub fn mc_id_movement(mu: f64, sigma: f64, members: usize, draws: u64, seed: u64) -> Result<McEstimate> {
    check_sigma(sigma)?;
    check_members(members)?;
    monte_carlo(draws, seed, "esn/id", move |rng| {
        let (avg, first) = gaussian_pair(mu, sigma, members, rng);
        relu(avg) - relu(first)
    })
}

/// Monte-Carlo `E[relu(μ + (X−μ)/√M) − relu(X)]` for `X ~ ESN(μ, σ, ε)`,
/// pairing each single-model draw with its `ESN(μ, σ/√M, ε)` ensemble
/// counterpart.
pub fn mc_ood_movement(mu: f64, sigma: f64, eps: f64, members: usize, draws: u64, seed: u64) -> Result<McEstimate> {
    let p = EsnParams::new(mu, sigma, eps)?;
    check_members(members)?;
    let c = (members as f64).sqrt();
    monte_carlo(draws, seed, "esn/ood", move |rng| {
        let x = sample_esn(&p, rng);
        relu(mu + (x - mu) / c) - relu(x)
    })
}

/// Monte-Carlo estimate of the OOD minus ID movement.
pub fn mc_movement_gap(mu: f64, sigma: f64, eps: f64, members: usize, draws: u64, seed: u64) -> Result<McEstimate> {
    let p = EsnParams::new(mu, sigma, eps)?;
    check_members(members)?;
    let c = (members as f64).sqrt();
    monte_carlo(draws, seed, "esn/gap", move |rng| {
        let x = sample_esn(&p, rng);
        let (avg, first) = gaussian_pair(mu, sigma, members, rng);
        (relu(mu + (x - mu) / c) - relu(x)) - (relu(avg) - relu(first))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapGridRow {
    pub mu: f64,
    pub sigma: f64,
    pub eps: f64,
    pub members: usize,
    pub gap: f64,
    pub mc_gap: f64,
    pub mc_se: f64,
}

/// Closed-form gap and its Monte-Carlo estimate over the Cartesian grid,
/// in `mu`, `sigma`, `eps`, `members` nesting order.
pub fn gap_grid(
    mus: &[f64],
    sigmas: &[f64],
    epss: &[f64],
    members: &[usize],
    draws: u64,
    seed: u64,
) -> Result<Vec<GapGridRow>> {
    let mut rows = Vec::with_capacity(mus.len() * sigmas.len() * epss.len() * members.len());
    for &mu in mus {
        for &sigma in sigmas {
            for &eps in epss {
                for &m in members {
                    let gap = movement_gap(mu, sigma, eps, m)?;
                    let mc = mc_movement_gap(mu, sigma, eps, m, draws, seed)?;
                    rows.push(GapGridRow { mu, sigma, eps, members: m, gap, mc_gap: mc.mean, mc_se: mc.se });
                }
            }
        }
    }
    Ok(rows)
}

/// Writes `mu,sigma,eps,M,gap,mc_gap,mc_se`.
pub fn write_gap_grid_csv(rows: &[GapGridRow], path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "mu,sigma,eps,M,gap,mc_gap,mc_se")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{:e},{:e},{:e}", r.mu, r.sigma, r.eps, r.members, r.gap, r.mc_gap, r.mc_se)?;
    }
    w.flush()?;
    Ok(())
}

/// Angle statistics between independent uniformly random unit vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleStats {
    pub mean_angle: f64,
    /// `max |θ − π/2|` over all pairs.
    pub max_abs_dev: f64,
    /// 95th percentile of `|θ − π/2|`.
    pub p95_abs_dev: f64,
}

pub fn angle_concentration(dim: usize, n_pairs: usize, seed: u64) -> Result<AngleStats> {
    if dim < 2 {
        return Err(Error::arg(format!("dimension must be at least 2, got {dim}")));
    }
    if n_pairs == 0 {
        return Err(Error::arg("need at least one pair"));
    }
    let mut rng = stream(seed, "esn/angles");
    let mut u = vec![0.0; dim];
    let mut v = vec![0.0; dim];
    let mut devs = Vec::with_capacity(n_pairs);
    let mut total = 0.0;
    for _ in 0..n_pairs {
        u.iter_mut().for_each(|x| *x = StandardNormal.sample(&mut rng));
        v.iter_mut().for_each(|x| *x = StandardNormal.sample(&mut rng));
        let uv: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
        let uu: f64 = u.iter().map(|a| a * a).sum();
        let vv: f64 = v.iter().map(|a| a * a).sum();
        let theta = (uv / (uu * vv).sqrt()).clamp(-1.0, 1.0).acos();
        total += theta;
        devs.push((theta - std::f64::consts::FRAC_PI_2).abs());
    }
    devs.sort_by(f64::total_cmp);
    let rank = ((0.95 * n_pairs as f64).ceil() as usize).clamp(1, n_pairs) - 1;
    Ok(AngleStats {
        mean_angle: total / n_pairs as f64,
        max_abs_dev: devs[n_pairs - 1],
        p95_abs_dev: devs[rank],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn esn(mu: f64, sigma: f64, eps: f64) -> EsnParams {
        EsnParams::new(mu, sigma, eps).unwrap()
    }

    #[test]
    fn pdf_without_skew_is_normal() {
        let p = esn(1.5, 2.0, 0.0);
        for x in [-3.0f64, 0.0, 1.5, 4.0] {
            let z = (x - 1.5) / 2.0;
            let expected = (-0.5 * z * z).exp() / (2.0 * (2.0 * PI).sqrt());
            assert!((esn_pdf(x, &p) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn pdf_is_continuous_at_location() {
        let p = esn(0.7, 1.3, -0.6);
        let left = esn_pdf(0.7 - 1e-12, &p);
        let right = esn_pdf(0.7, &p);
        let peak = normal_pdf(0.0) / 1.3;
        assert!((left - peak).abs() < 1e-12 && (right - peak).abs() < 1e-15);
    }

    #[test]
    fn pdf_integrates_to_one() {
        for (mu, sigma, eps) in [(0.0, 1.0, 0.0), (1.0, 0.5, -0.5), (-2.0, 2.0, -0.9)] {
            let p = esn(mu, sigma, eps);
            let (lo, hi) = (mu - 12.0 * sigma, mu + 12.0 * sigma);
            let n = 200_000;
            let h = (hi - lo) / n as f64;
            let mut s = 0.5 * (esn_pdf(lo, &p) + esn_pdf(hi, &p));
            for i in 1..n {
                s += esn_pdf(lo + i as f64 * h, &p);
            }
            assert!((s * h - 1.0).abs() < 1e-6, "{mu} {sigma} {eps}: {}", s * h);
        }
    }

    #[test]
    fn rectified_mean_reference_points() {
        assert!((rectified_esn_mean(&esn(0.0, 1.0, 0.0)) - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert!((rectified_esn_mean(&esn(10.0, 1.0, 0.0)) - 10.0).abs() < 1e-6);
    }

    /// `∫₀^∞ x p(x) dx` by Simpson's rule.
    fn quadrature_mean(p: &EsnParams) -> f64 {
        let hi = p.mu.max(0.0) + 14.0 * p.sigma;
        let n = 400_000;
        let h = hi / n as f64;
        let mut s = hi * esn_pdf(hi, p);
        for i in 1..n {
            let x = i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * x * esn_pdf(x, p);
        }
        s * h / 3.0
    }

    #[test]
    fn rectified_mean_matches_quadrature_on_both_sides_of_zero() {
        for (mu, sigma, eps) in [(1.0, 1.0, -0.5), (0.3, 2.0, -0.9), (-0.8, 1.0, -0.4), (-2.0, 0.5, 0.0)] {
            let p = esn(mu, sigma, eps);
            let q = quadrature_mean(&p);
            assert!((rectified_esn_mean(&p) - q).abs() < 1e-9, "{mu} {sigma} {eps}");
        }
    }

    #[test]
    fn rectified_mean_matches_sampling() {
        let p = esn(1.0, 1.0, -0.5);
        let mc = mc_rectified_mean(&p, 2_000_000, 11).unwrap();
        assert!(mc.z_score(rectified_esn_mean(&p)) < 3.0, "{mc:?}");
    }

    #[test]
    fn single_member_movements_vanish() {
        assert_eq!(id_movement(1.0, 1.0, 1).unwrap(), 0.0);
        assert_eq!(ood_movement(1.0, 1.0, -0.4, 1).unwrap(), 0.0);
        assert_eq!(movement_gap(1.0, 1.0, -0.4, 1).unwrap(), 0.0);
    }

    #[test]
    fn movements_agree_without_skew() {
        for mu in [0.0f64, 0.5, 1.0, 3.0] {
            for sigma in [0.3f64, 1.0, 2.0] {
                for m in [2, 4, 9, 64] {
                    let a = id_movement(mu, sigma, m).unwrap();
                    let b = ood_movement(mu, sigma, 0.0, m).unwrap();
                    assert!((a - b).abs() < 1e-12, "{mu} {sigma} {m}");
                    assert!(movement_gap(mu, sigma, 0.0, m).unwrap().abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn movements_equal_differences_of_rectified_means() {
        for (mu, sigma, eps, m) in [(1.0, 1.0, -0.3, 9), (0.5, 2.0, -0.8, 4), (2.0, 0.5, -0.1, 16)] {
            let single = esn(mu, sigma, eps);
            let diff = rectified_esn_mean(&single.averaged(m)) - rectified_esn_mean(&single);
            assert!((ood_movement(mu, sigma, eps, m).unwrap() - diff).abs() < 1e-12);
            let normal = esn(mu, sigma, 0.0);
            let diff = rectified_esn_mean(&normal.averaged(m)) - rectified_esn_mean(&normal);
            assert!((id_movement(mu, sigma, m).unwrap() - diff).abs() < 1e-12);
        }
    }

    #[test]
    fn id_movement_matches_sampling_and_is_monotone_in_members() {
        let mc = mc_id_movement(1.0, 1.0, 4, 2_000_000, 3).unwrap();
        assert!(mc.z_score(id_movement(1.0, 1.0, 4).unwrap()) < 3.0, "{mc:?}");
        let series: Vec<f64> = [1, 4, 16, 64].iter().map(|&m| id_movement(1.0, 1.0, m).unwrap()).collect();
        assert!(series.windows(2).all(|w| w[1] < w[0]), "{series:?}");
        let limit = 1.0 - (normal_cdf(1.0) + normal_pdf(1.0));
        assert!(series[3] > limit && series[3] - limit < 1e-6);
    }

    #[test]
    fn ood_movement_matches_sampling() {
        let mc = mc_ood_movement(1.0, 1.0, -0.3, 9, 2_000_000, 5).unwrap();
        assert!(mc.z_score(ood_movement(1.0, 1.0, -0.3, 9).unwrap()) < 3.0, "{mc:?}");
    }

    #[test]
    fn gap_is_negative_on_grid_and_terms_sum() {
        for mu in [0.5, 1.0, 2.0] {
            for sigma in [0.5, 1.0] {
                for eps in [-0.1f64, -0.5, -0.9] {
                    for m in [2, 4, 16] {
                        let g = movement_gap_terms(mu, sigma, eps, m).unwrap();
                        assert!(g.gap < 0.0 && g.cdf_term < 0.0 && g.pdf_term < 0.0, "{mu} {sigma} {eps} {m}");
                        let direct = ood_movement(mu, sigma, eps, m).unwrap() - id_movement(mu, sigma, m).unwrap();
                        assert!((g.gap - direct).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn gap_matches_sampling() {
        let mc = mc_movement_gap(1.0, 1.0, -0.5, 4, 2_000_000, 7).unwrap();
        assert!(mc.z_score(movement_gap(1.0, 1.0, -0.5, 4).unwrap()) < 3.0, "{mc:?}");
    }

    #[test]
    fn f32_instantiation_tracks_f64() {
        let a = rectified_esn_mean(&EsnParams::<f32>::new(1.0, 1.0, -0.5).unwrap()) as f64;
        let b: f64 = rectified_esn_mean(&esn(1.0, 1.0, -0.5));
        assert!((a - b).abs() < 1e-5);
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let p = esn(0.5, 1.0, -0.2);
        assert_eq!(mc_rectified_mean(&p, 10_000, 1).unwrap(), mc_rectified_mean(&p, 10_000, 1).unwrap());
        assert_eq!(mc_rectified_mean(&p, 10_000, 1).unwrap().draws, 10_000);
    }

    #[test]
    fn invalid_parameters() {
        assert!(EsnParams::new(0.0, 0.0, 0.0).is_err());
        assert!(EsnParams::new(0.0, 1.0, 0.2).is_err());
        assert!(EsnParams::new(0.0, 1.0, -1.0).is_err());
        assert!(id_movement(1.0, 1.0, 0).is_err());
        assert!(movement_gap(-1.0, 1.0, -0.5, 2).is_err());
    }

    #[test]
    fn angles_concentrate_with_dimension() {
        let low = angle_concentration(2, 10_000, 4).unwrap();
        assert!((low.mean_angle - FRAC_PI_2).abs() < 0.05);
        let mid = angle_concentration(10, 10_000, 4).unwrap();
        let high = angle_concentration(1000, 10_000, 4).unwrap();
        assert!(high.p95_abs_dev <= 0.08, "{high:?}");
        assert!(high.p95_abs_dev < mid.p95_abs_dev);
        assert!((high.mean_angle - FRAC_PI_2).abs() < 1e-2);
        assert!(angle_concentration(1, 10, 0).is_err());
    }

    #[test]
    fn grid_csv_layout() {
        let rows = gap_grid(&[1.0], &[1.0], &[-0.5], &[2, 4], 1000, 0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        write_gap_grid_csv(&rows, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "mu,sigma,eps,M,gap,mc_gap,mc_se");
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("1,1,-0.5,4,"));
    }
}
