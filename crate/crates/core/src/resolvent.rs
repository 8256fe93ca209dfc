//! Operator-valued integrals linking a family to the resolvent of its generator.
//!
//! * `S(λ, s) = ∫_0^s sinh(λ(s - t)) C(t) dt` and the identity
//!   `(λ²I - A) S(λ, s) = λ (cosh(λs) I - C(s))`;
//! * the resolvent `R(λ², A) = λ^{-1} S(λ, s) R(cosh(λs), C(s))`;
//! * the Laplace transform `∫_0^∞ e^{-λt} T(t) dt = R(λ, A)`;
//! * the Cesàro integral `B_t = ∫_0^t T(s) ds` with `T(t) - I = A B_t`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::family::{CosineFamily, GrowthBound, Semigroup};
use crate::linalg::{self, op_norm, singular_values, ComplexMatrix};
use crate::quadrature::QuadratureRule;
use crate::scalar::Real;

/// Largest change under panel doubling accepted without a warning.
pub const REFINEMENT_TOL: f64 = 1e-9;
/// Grid size used for suprema of `||C(t)||` over `[0, |s|]`.
pub const SUP_GRID_POINTS: usize = 256;
/// `cosh(λs) I - C(s)` counts as invertible when its smallest singular value
/// is at least this multiple of its norm.
pub const INVERTIBILITY_REL: f64 = 1e-10;
/// Neglected Laplace tail.
pub const LAPLACE_TAIL: f64 = 1e-10;

fn cplx<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// A quadrature result together with its panel-doubling estimate.
#[derive(Debug, Clone)]
pub struct Quadrature<T> {
    /// Value on the refined rule.
    pub value: ComplexMatrix<T>,
    /// `||refined - coarse||`.
    pub refinement_change: T,
    /// False when `refinement_change` exceeds [`REFINEMENT_TOL`] times `max(1, ||value||)`.
    pub converged: bool,
}

fn default_s_rule<T: Real>(lambda: Complex<T>, s: T) -> QuadratureRule {
    QuadratureRule::for_interval(s, lambda.norm())
}

fn s_integral<T: Real>(fam: &CosineFamily<T>, lambda: Complex<T>, s: T, q: &QuadratureRule) -> Result<ComplexMatrix<T>> {
    let dim = fam.generator().dim();
    q.integrate_matrix(dim, T::zero(), s, |t| Ok(((lambda * cplx(s - t)).sinh(), fam.cosine_at(t)?)))
}

/// `S(λ, s)` by composite Gauss-Legendre, checked by one panel doubling.
pub fn s_operator<T: Real>(
    fam: &CosineFamily<T>,
    lambda: Complex<T>,
    s: T,
    q: Option<&QuadratureRule>,
) -> Result<Quadrature<T>> {
    if !s.is_finite() || !lambda.re.is_finite() || !lambda.im.is_finite() {
        return Err(invalid("lambda and s must be finite"));
    }
    let dim = fam.generator().dim();
    if s == T::zero() {
        return Ok(Quadrature {
            value: ComplexMatrix::zeros(dim),
            refinement_change: T::zero(),
            converged: true,
        });
    }
    let rule = q.cloned().unwrap_or_else(|| default_s_rule(lambda, s));
    let coarse = s_integral(fam, lambda, s, &rule)?;
    let fine = s_integral(fam, lambda, s, &rule.refined())?;
    let change = op_norm(&(&fine - &coarse))?;
    let scale = op_norm(&fine)?.max(T::one());
    Ok(Quadrature {
        converged: change <= T::tol(REFINEMENT_TOL, 64.0) * scale,
        refinement_change: change,
        value: fine,
    })
}

/// `sup_{t in [0, |s|]} ||C(t)||` on an equispaced grid (a lower bound of the true sup).
pub fn cosine_sup<T: Real>(fam: &CosineFamily<T>, s: T, points: usize) -> Result<T> {
    use rayon::prelude::*;
    let n = points.max(2);
    let len = s.abs();
    let norms = (0..n)
        .into_par_iter()
        .map(|i| {
            let t = len * T::from_count(i) / T::from_count(n - 1);
            fam.cosine_at(t).and_then(|c| op_norm(&c))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(norms.into_iter().fold(T::zero(), T::max))
}

/// `sinh(|s| Re λ) / Re λ`.
pub fn sinh_factor<T: Real>(lambda: Complex<T>, s: T) -> T {
    (s.abs() * lambda.re).sinh() / lambda.re
}

/// `2 |s| e^{|s Re λ|}`, the elementary majorant of [`sinh_factor`].
pub fn sinh_majorant<T: Real>(lambda: Complex<T>, s: T) -> T {
    T::lit(2.0) * s.abs() * (s * lambda.re).abs().exp()
}

/// Both sides of `||S(λ, s)|| <= sup ||C|| · sinh(|s| Re λ) / Re λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct NormBound<T> {
    pub lhs: T,
    pub rhs: T,
}

impl<T: Real> NormBound<T> {
    pub fn slack(&self) -> T {
        self.rhs - self.lhs
    }
}

pub fn s_norm_bound_check<T: Real>(
    fam: &CosineFamily<T>,
    lambda: Complex<T>,
    s: T,
    q: Option<&QuadratureRule>,
) -> Result<NormBound<T>> {
    if !(lambda.re > T::zero()) {
        return Err(invalid("the bound on ||S(λ,s)|| needs Re λ > 0"));
    }
    let lhs = op_norm(&s_operator(fam, lambda, s, q)?.value)?;
    let sup = cosine_sup(fam, s, SUP_GRID_POINTS)?;
    Ok(NormBound {
        lhs,
        rhs: sup * sinh_factor(lambda, s),
    })
}

/// Both sides of `||λ² R(λ², A)|| <= M |λ| / (Re λ - ω)` for a cosine family
/// with growth pair `(M, ω)`; the left side comes from a direct solve.
pub fn cosine_laplace_bound_check<T: Real>(
    fam: &CosineFamily<T>,
    growth: &GrowthBound<T>,
    lambda: Complex<T>,
) -> Result<NormBound<T>> {
    let gap = lambda.re - growth.omega;
    if !(gap > T::zero()) {
        return Err(invalid(format!(
            "Re λ = {} must exceed the growth rate ω = {}",
            lambda.re, growth.omega
        )));
    }
    let mu = lambda * lambda;
    let r = linalg::resolvent(fam.generator().matrix(), mu)?;
    Ok(NormBound {
        lhs: op_norm(&r.scale_complex(mu))?,
        rhs: growth.m_const * lambda.norm() / gap,
    })
}

/// Residuals of the algebraic relations satisfied by `S(λ, s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct IdentityResidual<T> {
    /// `||(λ²I - A) S - λ (cosh(λs) I - C(s))||`.
    pub identity: T,
    /// `||S C(s) - C(s) S||`.
    pub commutator_cosine: T,
    /// `||S A - A S||`.
    pub commutator_generator: T,
    /// Panel-doubling change of `S`.
    pub refinement_change: T,
}

pub fn resolvent_identity_residual<T: Real>(
    fam: &CosineFamily<T>,
    lambda: Complex<T>,
    s: T,
    q: Option<&QuadratureRule>,
) -> Result<IdentityResidual<T>> {
    let sq = s_operator(fam, lambda, s, q)?;
    let s_mat = &sq.value;
    let a = fam.generator().matrix();
    let cs = fam.cosine_at(s)?;
    let lhs = (-a).shift(lambda * lambda).matmul(s_mat);
    let rhs = (-&cs).shift((lambda * cplx(s)).cosh()).scale_complex(lambda);
    Ok(IdentityResidual {
        identity: op_norm(&(&lhs - &rhs))?,
        commutator_cosine: op_norm(&(&s_mat.matmul(&cs) - &cs.matmul(s_mat)))?,
        commutator_generator: op_norm(&(&s_mat.matmul(a) - &a.matmul(s_mat)))?,
        refinement_change: sq.refinement_change,
    })
}

/// Resolvent of `A` at `λ²` built from `S(λ, s)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ResolventReport<T> {
    pub lambda: Complex<T>,
    pub s: T,
    pub s_matrix: ComplexMatrix<T>,
    pub resolvent: ComplexMatrix<T>,
    /// `||(λ²I - A) R - I||`.
    pub identity_residual: T,
    /// `sup||C|| · 2|s| e^{|s Re λ|} / |λ| · ||R(cosh(λs), C(s))|| - ||R||`.
    pub bound_slack: T,
}

impl<T: Real> ResolventReport<T> {
    /// `||R - (λ²I - A)^{-1}|| / ||R||` against a direct LU solve.
    pub fn direct_solve_gap(&self, a: &ComplexMatrix<T>) -> Result<T> {
        let direct = linalg::resolvent(a, self.lambda * self.lambda)?;
        let scale = op_norm(&self.resolvent)?;
        Ok(op_norm(&(&self.resolvent - &direct))? / scale)
    }
}

pub fn resolvent_via_s<T: Real>(
    fam: &CosineFamily<T>,
    lambda: Complex<T>,
    s: T,
    q: Option<&QuadratureRule>,
) -> Result<ResolventReport<T>> {
    if lambda.norm() == T::zero() {
        return Err(invalid("lambda must be non-zero"));
    }
    let dim = fam.generator().dim();
    let a = fam.generator().matrix();
    let z = (lambda * cplx(s)).cosh();
    let cs = fam.cosine_at(s)?;
    let shifted = (-&cs).shift(z);
    let sv = singular_values(&shifted)?;
    let smin = sv[sv.len() - 1];
    // Scale by |z| + ||C(s)|| so that a 1x1 zero is caught too.
    let scale = z.norm() + op_norm(&cs)?;
    if smin <= T::tol(INVERTIBILITY_REL, 16.0) * scale {
        return Err(Error::NotInResolventSet {
            point: format!("cosh(λs) = {z}"),
            sigma_min: smin.to_f64_lossy(),
        });
    }
    let r_cos = linalg::inverse(&shifted)?;
    let s_matrix = s_operator(fam, lambda, s, q)?.value;
    let resolvent = s_matrix.matmul(&r_cos).scale_complex(lambda.inv());
    let identity_residual = op_norm(&(&(-a).shift(lambda * lambda).matmul(&resolvent) - &ComplexMatrix::identity(dim)))?;
    let sup = cosine_sup(fam, s, SUP_GRID_POINTS)?;
    let rhs = sup * sinh_majorant(lambda, s) / lambda.norm() * op_norm(&r_cos)?;
    Ok(ResolventReport {
        lambda,
        s,
        bound_slack: rhs - op_norm(&resolvent)?,
        s_matrix,
        resolvent,
        identity_residual,
    })
}

/// Truncated Laplace transform of a semigroup.
#[derive(Debug, Clone)]
pub struct LaplaceResolvent<T> {
    pub value: ComplexMatrix<T>,
    pub horizon: T,
    /// Analytic bound on the neglected tail `M e^{(ω - Re λ) H} / (Re λ - ω)`.
    pub tail_bound: T,
}

/// Horizon `H` with `M e^{(ω - Re λ) H} / (Re λ - ω) <= tail`.
pub fn laplace_horizon<T: Real>(growth: &GrowthBound<T>, lambda: Complex<T>, tail: T) -> Result<T> {
    let gap = lambda.re - growth.omega;
    if !(gap > T::zero()) {
        return Err(invalid(format!(
            "Re λ = {} must exceed the growth rate ω = {} for the Laplace integral to converge",
            lambda.re, growth.omega
        )));
    }
    Ok(((growth.m_const / (gap * tail)).ln() / gap).max(T::zero()))
}

/// `∫_0^H e^{-λt} T(t) dt`, with `H` chosen from `growth` so the tail is below [`LAPLACE_TAIL`].
pub fn laplace_resolvent<T: Real>(
    sg: &Semigroup<T>,
    lambda: Complex<T>,
    growth: &GrowthBound<T>,
    q: Option<&QuadratureRule>,
) -> Result<LaplaceResolvent<T>> {
    let tail = T::tol(LAPLACE_TAIL, 64.0);
    let horizon = laplace_horizon(growth, lambda, tail)?;
    let dim = sg.generator().dim();
    let rule = q.cloned().unwrap_or_else(|| {
        QuadratureRule::for_interval(horizon, lambda.norm() + sg.generator().norm())
    });
    let value = rule.integrate_matrix(dim, T::zero(), horizon, |t| {
        Ok(((-lambda * cplx(t)).exp(), sg.semigroup_at(t)?))
    })?;
    let gap = lambda.re - growth.omega;
    Ok(LaplaceResolvent {
        value,
        horizon,
        tail_bound: growth.m_const * (-gap * horizon).exp() / gap,
    })
}

/// `r = sup_{s in [0, horizon]} ||T(s) - I||` on `points` equispaced samples.
pub fn semigroup_distance_sup<T: Real>(sg: &Semigroup<T>, horizon: T, points: usize) -> Result<T> {
    use rayon::prelude::*;
    let n = points.max(2);
    let d = (0..n)
        .into_par_iter()
        .map(|i| {
            let t = horizon * T::from_count(i) / T::from_count(n - 1);
            sg.semigroup_offset(t).and_then(|e| op_norm(&e))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(d.into_iter().fold(T::zero(), T::max))
}

/// Outcome of the Cesàro-integral check.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CesaroCheck<T> {
    pub t: T,
    pub b_t: ComplexMatrix<T>,
    /// `||T(t) - I - A B_t||`.
    pub identity_residual: T,
    /// `||B_t^{-1}||`, absent when `B_t` is numerically singular.
    pub inv_norm: Option<T>,
    /// Grid supremum of `||T(s) - I||`.
    pub r: T,
    /// `1 / (t (1 - r))`, absent when `r >= 1`.
    pub bound: Option<T>,
}

impl<T: Real> CesaroCheck<T> {
    /// True when the inverse bound applies and holds with `slack`.
    pub fn bound_holds(&self, slack: T) -> Option<bool> {
        match (self.bound, self.inv_norm) {
            (Some(b), Some(inv)) => Some(inv <= b + slack),
            (Some(_), None) => Some(false),
            (None, _) => None,
        }
    }
}

/// Number of grid points for `r` in [`cesaro_check`].
pub const CESARO_SUP_POINTS: usize = 2001;

pub fn cesaro_check<T: Real>(
    sg: &Semigroup<T>,
    t: T,
    horizon: T,
    q: Option<&QuadratureRule>,
) -> Result<CesaroCheck<T>> {
    if !(t > T::zero() && t.is_finite()) {
        return Err(invalid("t must be positive"));
    }
    if !(horizon >= T::zero() && horizon.is_finite()) {
        return Err(invalid("horizon must be finite and non-negative"));
    }
    let dim = sg.generator().dim();
    let a = sg.generator().matrix();
    let rule = q
        .cloned()
        .unwrap_or_else(|| QuadratureRule::for_interval(t, sg.generator().norm()));
    let b_t = rule.integrate_matrix(dim, T::zero(), t, |s| Ok((cplx(T::one()), sg.semigroup_at(s)?)))?;
    let offset = sg.semigroup_offset(t)?;
    let identity_residual = op_norm(&(&offset - &a.matmul(&b_t)))?;
    let inv_norm = match linalg::inverse(&b_t) {
        Ok(inv) => Some(op_norm(&inv)?),
        Err(Error::Singular { .. }) => None,
        Err(e) => return Err(e),
    };
    let r = semigroup_distance_sup(sg, horizon, CESARO_SUP_POINTS)?;
    let bound = (r < T::one()).then(|| T::one() / (t * (T::one() - r)));
    Ok(CesaroCheck {
        t,
        b_t,
        identity_residual,
        inv_norm,
        r,
        bound,
    })
}
