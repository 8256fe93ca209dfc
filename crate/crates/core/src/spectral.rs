//! Spectral localization: the growth parabola, the sector-shaped resolvent
//! region `R_c` and the checks that certify it for a given family.
//!
//! For `c in (0, 2)` the region construction is:
//!
//! 1. `r̃` is the largest radius with `cosh(B_r̃(iπ)) ⊂ B_{(2-c)/2}(-1)`;
//! 2. `φ_c = arccos(min(0.99 r̃/π, 0.99))`, so `π cos φ_c < r̃`;
//! 3. `r_c = 1.01 π / t0`, so `π / r_c < t0`;
//! 4. `R_c = {λ² : |λ| > r_c, |arg λ| in (φ_c, π/2]}`.
//!
//! For `λ² in R_c` the real number `s_λ = π sin(arg λ) / |λ|` puts `λ s_λ`
//! inside `B_r̃(iπ)`, so `cosh(λ s_λ)` stays in the resolvent set of `C(s_λ)`.

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::family::CosineFamily;
use crate::linalg::{self, eigenvalues, op_norm};
use crate::resolvent::s_operator;
use crate::sample;
use crate::scalar::Real;

/// Angles sampled on the boundary circle when certifying `r̃`.
pub const BOUNDARY_SAMPLES: usize = 2048;
pub const R_TILDE_TOL: f64 = 1e-6;
/// Offset at which the `r̃` certificate must fail.
pub const R_TILDE_PROBE: f64 = 1e-4;
/// Safety factor applied to the strict inequalities of the region.
pub const REGION_MARGIN: f64 = 0.99;
/// Grid used to check `||C(t) - I|| < c` on `[0, t0)`.
pub const HYPOTHESIS_GRID: usize = 400;

/// Interior of `{λ² : Re λ = ω}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ParabolaRegion<T> {
    pub omega: T,
}

impl<T: Real> ParabolaRegion<T> {
    /// True iff `x < ω² - y² / (4ω²)` for `μ = x + iy`.
    pub fn contains(&self, mu: Complex<T>) -> Result<bool> {
        let w = self.omega;
        if !(w > T::zero()) {
            return Err(Error::DegenerateRegion(format!(
                "parabola with ω = {w} collapses onto the negative real axis"
            )));
        }
        let w2 = w * w;
        Ok(mu.re < w2 - mu.im * mu.im / (T::lit(4.0) * w2))
    }
}

pub fn parabola_contains<T: Real>(p: &ParabolaRegion<T>, mu: Complex<T>) -> Result<bool> {
    p.contains(mu)
}

/// `max_θ |cosh(iπ + r e^{iθ}) + 1|` over [`BOUNDARY_SAMPLES`] equispaced angles.
pub fn cosh_boundary_deviation<T: Real>(r: T) -> T {
    let ipi = Complex::new(T::zero(), T::PI());
    (0..BOUNDARY_SAMPLES)
        .map(|k| {
            let theta = T::TAU() * T::from_count(k) / T::from_count(BOUNDARY_SAMPLES);
            let z = ipi + Complex::from_polar(r, theta);
            (z.cosh() + T::one()).norm()
        })
        .fold(T::zero(), T::max)
}

fn check_c<T: Real>(c: T) -> Result<()> {
    if c > T::zero() && c < T::lit(2.0) {
        Ok(())
    } else {
        Err(invalid(format!("c = {c} must lie in (0, 2)")))
    }
}

/// Largest `r̃` (to [`R_TILDE_TOL`]) such that the disk of radius `r̃` around
/// `iπ` maps under `cosh` into the open disk of radius `(2 - c)/2` around `-1`.
pub fn find_r_tilde<T: Real>(c: T) -> Result<T> {
    check_c(c)?;
    let target = (T::lit(2.0) - c) * T::lit(0.5);
    let inside = |r: T| cosh_boundary_deviation(r) < target;
    let mut lo = T::zero();
    let mut hi = T::one();
    while inside(hi) {
        lo = hi;
        hi = hi * T::lit(2.0);
    }
    let tol = T::tol(R_TILDE_TOL, 16.0);
    while hi - lo > tol {
        let mid = (lo + hi) * T::lit(0.5);
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Whether `r` passes the boundary-sampling certificate while `r + probe` fails it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RTildeCertificate<T> {
    pub r_tilde: T,
    pub target: T,
    pub deviation_at_r: T,
    pub deviation_beyond: T,
}

impl<T: Real> RTildeCertificate<T> {
    pub fn passes(&self) -> bool {
        self.deviation_at_r < self.target && self.deviation_beyond > self.target
    }
}

pub fn certify_r_tilde<T: Real>(c: T, r_tilde: T) -> Result<RTildeCertificate<T>> {
    check_c(c)?;
    Ok(RTildeCertificate {
        r_tilde,
        target: (T::lit(2.0) - c) * T::lit(0.5),
        deviation_at_r: cosh_boundary_deviation(r_tilde),
        deviation_beyond: cosh_boundary_deviation(r_tilde + T::lit(R_TILDE_PROBE)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SpectralRegionParams<T> {
    pub c: T,
    pub t0: T,
    pub r_tilde: T,
    pub phi_c: T,
    pub r_c: T,
    pub m_c: T,
}

impl<T: Real> SpectralRegionParams<T> {
    /// `π cos φ_c < r̃` and `π / r_c < t0`.
    pub fn is_valid(&self) -> bool {
        T::PI() * self.phi_c.cos() < self.r_tilde
            && T::PI() / self.r_c < self.t0
            && self.phi_c > T::zero()
            && self.phi_c < T::FRAC_PI_2()
    }
}

/// `M_c = 4π e^π (1 + c) / (2 - c)`.
///
/// Product of `sup_{[0,t0]} ||C|| <= 1 + c`, `|λ|² · 2|s_λ| e^{|s_λ Re λ|} / |λ|² <= 2π e^π`
/// and `||R(cosh(λ s_λ), C(s_λ))|| <= 2 / (2 - c)`.
pub fn region_m_c<T: Real>(c: T) -> T {
    T::lit(4.0) * T::PI() * T::PI().exp() * (T::one() + c) / (T::lit(2.0) - c)
}

pub fn region_params<T: Real>(c: T, t0: T) -> Result<SpectralRegionParams<T>> {
    check_c(c)?;
    if !(t0 > T::zero() && t0.is_finite()) {
        return Err(invalid("t0 must be positive and finite"));
    }
    let r_tilde = find_r_tilde(c)?;
    let margin = T::lit(REGION_MARGIN);
    let phi_c = (margin * r_tilde / T::PI()).min(margin).acos();
    let r_c = T::lit(1.01) * T::PI() / t0;
    Ok(SpectralRegionParams {
        c,
        t0,
        r_tilde,
        phi_c,
        r_c,
        m_c: region_m_c(c),
    })
}

/// `s_λ = π sin(arg λ) / |λ|`, the real `s` minimizing `|iπ - λ s|`.
pub fn s_lambda<T: Real>(lambda: Complex<T>) -> Result<T> {
    let r = lambda.norm();
    if r == T::zero() {
        return Err(invalid("s_λ is undefined at λ = 0"));
    }
    let arg = lambda.arg();
    if arg.abs() > T::FRAC_PI_2() + T::epsilon() * T::lit(8.0) {
        return Err(invalid("s_λ needs |arg λ| <= π/2"));
    }
    Ok(T::PI() * arg.sin() / r)
}

/// Principal square root with `arg` in `(-π/2, π/2]`.
pub fn principal_sqrt<T: Real>(mu: Complex<T>) -> Complex<T> {
    let mut l = mu.sqrt();
    if l.re == T::zero() && l.im < T::zero() {
        l = -l;
    }
    l
}

/// `μ in R_c`.
pub fn in_region_rc<T: Real>(mu: Complex<T>, params: &SpectralRegionParams<T>) -> bool {
    let lambda = principal_sqrt(mu);
    let arg = lambda.arg().abs();
    lambda.norm() > params.r_c && arg > params.phi_c && arg <= T::FRAC_PI_2()
}

/// `count` points of `R_c`, drawn as `λ²` with `|λ|` in `(1.05 r_c, 4.05 r_c)`
/// and `|arg λ|` strictly inside `(φ_c, π/2]`.
pub fn sample_region<T: Real>(params: &SpectralRegionParams<T>, count: usize, seed: u64) -> Vec<Complex<T>> {
    let mut rng = sample::rng(seed);
    (0..count)
        .map(|_| {
            let rho = params.r_c * T::lit(1.05 + 3.0 * rng.gen::<f64>());
            let frac = T::lit(0.02 + 0.98 * rng.gen::<f64>());
            let sign = if rng.gen::<bool>() { T::one() } else { -T::one() };
            let phi = sign * (params.phi_c + (T::FRAC_PI_2() - params.phi_c) * frac);
            let lambda = Complex::from_polar(rho, phi);
            lambda * lambda
        })
        .collect()
}

/// One row of a region verification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RegionPoint<T> {
    pub mu: Complex<T>,
    pub s_lambda: T,
    /// `|iπ - λ s_λ|`, must be below `r̃`.
    pub disk_distance: T,
    /// `|cosh(λ s_λ) + 1| · ||R(-1, C(s_λ))||`, must be at most 1/2.
    pub series_ratio: T,
    /// `||R(cosh(λ s_λ), C(s_λ))||`, must be at most `2 / (2 - c)`.
    pub cosine_resolvent_norm: T,
    /// `|μ| / |λ| · ||S(λ, s_λ)|| · ||R(cosh(λ s_λ), C(s_λ))||`.
    pub chain_bound: T,
    /// `||μ R(μ, A)||`.
    pub resolvent_norm: T,
    /// `M_c`.
    pub bound: T,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RegionReport<T> {
    pub params: SpectralRegionParams<T>,
    /// Grid maximum of `||C(t) - I||` over `[0, t0)`.
    pub hypothesis_sup: T,
    pub points: Vec<RegionPoint<T>>,
}

impl<T: Real> RegionReport<T> {
    pub fn all_pass(&self) -> bool {
        self.points.iter().all(|p| p.pass)
    }
}

/// Relative quadrature slack when comparing `||μR(μ,A)||` with the chain bound.
pub const CHAIN_REL_SLACK: f64 = 1e-8;
/// Absolute slack on the `2 / (2 - c)` check.
pub const RESOLVENT_SLACK: f64 = 1e-6;

/// Checks every link of the region argument at each sample point.
pub fn verify_region_bound<T: Real>(
    fam: &CosineFamily<T>,
    params: &SpectralRegionParams<T>,
    sample: &[Complex<T>],
) -> Result<RegionReport<T>> {
    use rayon::prelude::*;
    if !params.is_valid() {
        return Err(Error::Precondition("region parameters violate π cos φ_c < r̃ or π/r_c < t0".into()));
    }
    if let Some(mu) = sample.iter().find(|&&mu| !in_region_rc(mu, params)) {
        return Err(Error::Precondition(format!("sample point {mu} is not in R_c")));
    }
    let hypothesis_sup = (0..HYPOTHESIS_GRID)
        .into_par_iter()
        .map(|i| {
            let t = params.t0 * T::from_count(i) / T::from_count(HYPOTHESIS_GRID);
            fam.cosine_offset(t).and_then(|d| op_norm(&d))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(T::zero(), T::max);
    if !(hypothesis_sup < params.c) {
        return Err(Error::Precondition(format!(
            "||C(t) - I|| reaches {hypothesis_sup} >= c = {} on [0, t0)",
            params.c
        )));
    }

    let a = fam.generator().matrix();
    let two = T::lit(2.0);
    let cos_bound = two / (two - params.c) + T::lit(RESOLVENT_SLACK);
    let ipi = Complex::new(T::zero(), T::PI());
    let points = sample
        .par_iter()
        .map(|&mu| -> Result<RegionPoint<T>> {
            let lambda = principal_sqrt(mu);
            let s = s_lambda(lambda)?;
            let ls = lambda * Complex::new(s, T::zero());
            let disk_distance = (ipi - ls).norm();
            let z = ls.cosh();
            let cs = fam.cosine_at(s)?;
            let r_minus_one = op_norm(&linalg::resolvent(&cs, Complex::new(-T::one(), T::zero()))?)?;
            let series_ratio = (z + T::one()).norm() * r_minus_one;
            let r_cos = linalg::resolvent(&cs, z)?;
            let cosine_resolvent_norm = op_norm(&r_cos)?;
            let s_norm = op_norm(&s_operator(fam, lambda, s, None)?.value)?;
            let chain_bound = mu.norm() / lambda.norm() * s_norm * cosine_resolvent_norm;
            let r_mu = linalg::resolvent(a, mu)?;
            let resolvent_norm = op_norm(&r_mu)? * mu.norm();
            let pass = disk_distance < params.r_tilde
                && s.abs() < params.t0
                && series_ratio <= T::lit(0.5)
                && cosine_resolvent_norm <= cos_bound
                && resolvent_norm <= chain_bound * (T::one() + T::lit(CHAIN_REL_SLACK))
                && resolvent_norm <= params.m_c;
            Ok(RegionPoint {
                mu,
                s_lambda: s,
                disk_distance,
                series_ratio,
                cosine_resolvent_norm,
                chain_bound,
                resolvent_norm,
                bound: params.m_c,
                pass,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RegionReport {
        params: *params,
        hypothesis_sup,
        points,
    })
}

/// One sampled circle of the boundedness diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CircleMeasure<T> {
    pub radius: T,
    /// `max ||μ R(μ, A)||` over the sampled circle.
    pub measured_sup: T,
    /// Neumann bound `1 / (1 - ||A|| / radius)`; absent when `radius <= ||A||`.
    pub neumann_bound: Option<T>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BoundednessReport<T> {
    /// `max(1, 2 ρ(A))`.
    pub r_star: T,
    pub generator_norm: T,
    pub circles: Vec<CircleMeasure<T>>,
}

impl<T: Real> BoundednessReport<T> {
    pub fn all_pass(&self) -> bool {
        self.circles.iter().all(|c| c.pass)
    }

    pub fn measured_sup(&self) -> T {
        self.circles.iter().map(|c| c.measured_sup).fold(T::zero(), T::max)
    }
}

pub const CIRCLE_SAMPLES: usize = 64;

/// Samples `||μ R(μ, A)||` on circles `|μ| = radius` beyond `R* = max(1, 2 ρ(A))`.
pub fn boundedness_diagnostic<T: Real>(fam: &CosineFamily<T>, radius_samples: &[T]) -> Result<BoundednessReport<T>> {
    let a = fam.generator().matrix();
    let rho = eigenvalues(a)?.iter().map(|z| z.norm()).fold(T::zero(), T::max);
    let r_star = (T::lit(2.0) * rho).max(T::one());
    let norm_a = fam.generator().norm();
    let mut circles = Vec::new();
    for &radius in radius_samples.iter().filter(|&&r| r > r_star) {
        let mut sup = T::zero();
        for k in 0..CIRCLE_SAMPLES {
            let theta = T::TAU() * T::from_count(k) / T::from_count(CIRCLE_SAMPLES);
            let mu = Complex::from_polar(radius, theta);
            let val = op_norm(&linalg::resolvent(a, mu)?)? * radius;
            sup = sup.max(val);
        }
        let neumann_bound = (radius > norm_a).then(|| T::one() / (T::one() - norm_a / radius));
        let pass = sup.is_finite()
            && neumann_bound.is_none_or(|b| sup <= b + T::lit(1e-6));
        circles.push(CircleMeasure {
            radius,
            measured_sup: sup,
            neumann_bound,
            pass,
        });
    }
    Ok(BoundednessReport {
        r_star,
        generator_norm: norm_a,
        circles,
    })
}
