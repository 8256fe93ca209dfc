//! Cosine families and semigroups generated by a matrix.
//!
//! Both evaluators work on the offset from the identity, `D(t) = C(t) - I`
//! and `E(t) = T(t) - I`, so that small-`t` values keep full relative
//! accuracy. Arguments are scaled down by powers of two until the series
//! converges quickly, and the result is scaled back up with
//!
//! * `D(2t) = 2 D(t) (D(t) + 2I)`, which is `C(2t) = 2 C(t)^2 - I` rewritten;
//! * `E(2t) = E(t) (E(t) + 2I)`, which is `T(2t) = T(t)^2` rewritten.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{op_norm, ComplexMatrix};
use crate::scalar::Real;

const MAX_HALVINGS: usize = 2048;
/// Relative size of the last retained series term above which the series is
/// considered unconverged.
const SERIES_TAIL_LIMIT: f64 = 1e-8;

/// Matrix generator `A` together with its spectral norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator<T> {
    a: ComplexMatrix<T>,
    norm: T,
}

impl<T: Real> Generator<T> {
    pub fn new(a: ComplexMatrix<T>) -> Result<Self> {
        let norm = op_norm(&a)?;
        Ok(Self { a, norm })
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.a
    }

    pub fn norm(&self) -> T {
        self.norm
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }
}

/// Truncation and scaling controls shared by both evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SeriesControl<T> {
    /// Number of series terms, counting the constant one.
    pub taylor_terms: usize,
    /// Largest scaled argument (`||A|| t^2` or `||A|| t`) fed to the series.
    pub scaling_threshold: T,
}

impl<T: Real> Default for SeriesControl<T> {
    fn default() -> Self {
        Self {
            taylor_terms: 20,
            scaling_threshold: T::one(),
        }
    }
}

impl<T: Real> SeriesControl<T> {
    pub fn new(taylor_terms: usize, scaling_threshold: T) -> Result<Self> {
        if taylor_terms < 2 {
            return Err(invalid("taylor_terms must be at least 2"));
        }
        if !(scaling_threshold > T::zero() && scaling_threshold.is_finite()) {
            return Err(invalid("scaling_threshold must be positive and finite"));
        }
        Ok(Self {
            taylor_terms,
            scaling_threshold,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Cosine,
    Semigroup,
}

/// Anything that maps `t` to an operator and has a generator.
pub trait Evolution<T: Real>: Sync {
    fn generator(&self) -> &Generator<T>;
    fn kind(&self) -> FamilyKind;
    /// The operator at time `t`.
    fn at(&self, t: T) -> Result<ComplexMatrix<T>>;
    /// The operator at time `t` minus the identity.
    fn offset_at(&self, t: T) -> Result<ComplexMatrix<T>>;

    fn dim(&self) -> usize {
        self.generator().dim()
    }
}

/// `C(t) = sum_n A^n t^{2n} / (2n)!`.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineFamily<T> {
    gen: Generator<T>,
    control: SeriesControl<T>,
}

impl<T: Real> CosineFamily<T> {
    pub fn new(a: ComplexMatrix<T>) -> Result<Self> {
        Ok(Self::with_generator(Generator::new(a)?, SeriesControl::default()))
    }

    pub fn with_generator(gen: Generator<T>, control: SeriesControl<T>) -> Self {
        Self { gen, control }
    }

    pub fn generator(&self) -> &Generator<T> {
        &self.gen
    }

    pub fn control(&self) -> SeriesControl<T> {
        self.control
    }

    /// `C(t)`. Even in `t` by construction.
    pub fn cosine_at(&self, t: T) -> Result<ComplexMatrix<T>> {
        if t == T::zero() {
            return Ok(ComplexMatrix::identity(self.gen.dim()));
        }
        Ok(self.cosine_offset(t)?.shift(Complex::new(T::one(), T::zero())))
    }

    /// `C(t) - I`.
    pub fn cosine_offset(&self, t: T) -> Result<ComplexMatrix<T>> {
        if !t.is_finite() {
            return Err(invalid("time must be finite"));
        }
        let n = self.gen.dim();
        let t = t.abs();
        if t == T::zero() || self.gen.norm == T::zero() {
            return Ok(ComplexMatrix::zeros(n));
        }
        let (tau, halvings) = halve_until(t, |tau| self.gen.norm * tau * tau, self.control.scaling_threshold)?;
        let x = self.gen.a.scale(tau * tau);
        // D = sum_{k>=1} X^k / (2k)!
        let mut term = x.scale(T::lit(0.5));
        let mut d = term.clone();
        let mut last_rel = T::one();
        for k in 2..self.control.taylor_terms {
            let kf = T::from_count(k);
            let denom = (T::lit(2.0) * kf - T::one()) * (T::lit(2.0) * kf);
            term = term.matmul(&x).scale(T::one() / denom);
            d += &term;
            let dm = d.max_abs();
            last_rel = if dm == T::zero() { T::zero() } else { term.max_abs() / dm };
            if last_rel <= T::epsilon() * T::lit(0.5) {
                break;
            }
        }
        check_tail(last_rel, self.control.taylor_terms)?;
        let two_i = Complex::new(T::lit(2.0), T::zero());
        for _ in 0..halvings {
            d = d.matmul(&d.shift(two_i)).scale(T::lit(2.0));
        }
        ensure_finite(d, t)
    }

    /// `||2 C(t) C(s) - C(t+s) - C(t-s)||`.
    pub fn dalembert_residual(&self, t: T, s: T) -> Result<T> {
        let ct = self.cosine_at(t)?;
        let cs = self.cosine_at(s)?;
        let mut r = ct.matmul(&cs).scale(T::lit(2.0));
        r -= &self.cosine_at(t + s)?;
        r -= &self.cosine_at(t - s)?;
        op_norm(&r)
    }

    /// Second-difference quotient `2 (C(h) - I) / h^2`, which tends to `A`
    /// as `h -> 0` with error `O(h^2)`.
    pub fn generator_recover(&self, h: T) -> Result<ComplexMatrix<T>> {
        if !(h > T::zero() && h.is_finite()) {
            return Err(invalid("step h must be positive"));
        }
        Ok(self.cosine_offset(h)?.scale(T::lit(2.0) / (h * h)))
    }
}

impl<T: Real> Evolution<T> for CosineFamily<T> {
    fn generator(&self) -> &Generator<T> {
        &self.gen
    }
    fn kind(&self) -> FamilyKind {
        FamilyKind::Cosine
    }
    fn at(&self, t: T) -> Result<ComplexMatrix<T>> {
        self.cosine_at(t)
    }
    fn offset_at(&self, t: T) -> Result<ComplexMatrix<T>> {
        self.cosine_offset(t)
    }
}

/// `T(t) = exp(t A)` for `t >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Semigroup<T> {
    gen: Generator<T>,
    control: SeriesControl<T>,
}

impl<T: Real> Semigroup<T> {
    pub fn new(a: ComplexMatrix<T>) -> Result<Self> {
        Ok(Self::with_generator(Generator::new(a)?, SeriesControl::default()))
    }

    pub fn with_generator(gen: Generator<T>, control: SeriesControl<T>) -> Self {
        Self { gen, control }
    }

    pub fn generator(&self) -> &Generator<T> {
        &self.gen
    }

    pub fn control(&self) -> SeriesControl<T> {
        self.control
    }

    pub fn semigroup_at(&self, t: T) -> Result<ComplexMatrix<T>> {
        if t == T::zero() {
            return Ok(ComplexMatrix::identity(self.gen.dim()));
        }
        Ok(self.semigroup_offset(t)?.shift(Complex::new(T::one(), T::zero())))
    }

    /// `T(t) - I`.
    pub fn semigroup_offset(&self, t: T) -> Result<ComplexMatrix<T>> {
        if !t.is_finite() {
            return Err(invalid("time must be finite"));
        }
        if t < T::zero() {
            return Err(invalid("semigroups are only defined for t >= 0"));
        }
        let n = self.gen.dim();
        if t == T::zero() || self.gen.norm == T::zero() {
            return Ok(ComplexMatrix::zeros(n));
        }
        let (tau, halvings) = halve_until(t, |tau| self.gen.norm * tau, self.control.scaling_threshold)?;
        let x = self.gen.a.scale(tau);
        let mut term = x.clone();
        let mut e = term.clone();
        let mut last_rel = T::one();
        for k in 2..self.control.taylor_terms {
            term = term.matmul(&x).scale(T::one() / T::from_count(k));
            e += &term;
            let em = e.max_abs();
            last_rel = if em == T::zero() { T::zero() } else { term.max_abs() / em };
            if last_rel <= T::epsilon() * T::lit(0.5) {
                break;
            }
        }
        check_tail(last_rel, self.control.taylor_terms)?;
        let two_i = Complex::new(T::lit(2.0), T::zero());
        for _ in 0..halvings {
            e = e.matmul(&e.shift(two_i));
        }
        ensure_finite(e, t)
    }
}

impl<T: Real> Evolution<T> for Semigroup<T> {
    fn generator(&self) -> &Generator<T> {
        &self.gen
    }
    fn kind(&self) -> FamilyKind {
        FamilyKind::Semigroup
    }
    fn at(&self, t: T) -> Result<ComplexMatrix<T>> {
        self.semigroup_at(t)
    }
    fn offset_at(&self, t: T) -> Result<ComplexMatrix<T>> {
        self.semigroup_offset(t)
    }
}

fn halve_until<T: Real>(t: T, size: impl Fn(T) -> T, threshold: T) -> Result<(T, usize)> {
    let mut tau = t;
    let mut halvings = 0;
    while size(tau) > threshold {
        tau = tau * T::lit(0.5);
        halvings += 1;
        if halvings > MAX_HALVINGS {
            return Err(Error::Range(format!(
                "argument {t} needs more than {MAX_HALVINGS} halvings; increase the scaling depth"
            )));
        }
    }
    Ok((tau, halvings))
}

fn check_tail<T: Real>(last_rel: T, terms: usize) -> Result<()> {
    if last_rel > T::tol(SERIES_TAIL_LIMIT, 64.0) {
        return Err(Error::Range(format!(
            "series with {terms} terms has not converged at the scaled argument \
             (last term ratio {last_rel}); lower scaling_threshold or add terms"
        )));
    }
    Ok(())
}

fn ensure_finite<T: Real>(m: ComplexMatrix<T>, t: T) -> Result<ComplexMatrix<T>> {
    if m.is_finite() {
        Ok(m)
    } else {
        Err(Error::Range(format!(
            "evaluation at t = {t} overflowed while undoing the argument scaling"
        )))
    }
}

/// Constants `(M, ω)` with `||F(t)|| <= M e^{ωt}` on the fitted grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GrowthBound<T> {
    pub m_const: T,
    pub omega: T,
}

impl<T: Real> GrowthBound<T> {
    pub fn envelope(&self, t: T) -> T {
        self.m_const * (self.omega * t).exp()
    }
}

/// Fits `(M, ω)` to `||F(t_i)||` on `samples` equispaced points of `[0, horizon]`.
///
/// `ω` is the least-squares slope of `ln ||F||` over the second half of the
/// grid (the asymptotic rate), clamped at zero. `M` is then the smallest
/// value `>= 1` that makes the envelope valid at every sample.
pub fn growth_bound_estimate<T: Real>(
    family: &impl Evolution<T>,
    horizon: T,
    samples: usize,
) -> Result<GrowthBound<T>> {
    if !(horizon > T::zero() && horizon.is_finite()) {
        return Err(invalid("horizon must be positive"));
    }
    if samples < 2 {
        return Err(invalid("need at least two samples"));
    }
    use rayon::prelude::*;
    let step = horizon / T::from_count(samples - 1);
    let points = (0..samples)
        .into_par_iter()
        .map(|i| {
            let t = step * T::from_count(i);
            family.at(t).and_then(|m| Ok((t, op_norm(&m)?)))
        })
        .collect::<Result<Vec<_>>>()?;

    let tail = &points[samples / 2..];
    let floor = T::min_positive_value();
    let slope = if tail.len() >= 2 {
        let k = T::from_count(tail.len());
        let mean_t = tail.iter().map(|p| p.0).sum::<T>() / k;
        let mean_y = tail.iter().map(|p| p.1.max(floor).ln()).sum::<T>() / k;
        let (mut sxy, mut sxx) = (T::zero(), T::zero());
        for &(t, nrm) in tail {
            sxy = sxy + (t - mean_t) * (nrm.max(floor).ln() - mean_y);
            sxx = sxx + (t - mean_t) * (t - mean_t);
        }
        sxy / sxx
    } else {
        T::zero()
    };
    let omega = if slope.is_finite() { slope.max(T::zero()) } else { T::zero() };
    let m_const = points
        .iter()
        .map(|&(t, nrm)| nrm * (-omega * t).exp())
        .fold(T::one(), T::max)
        * (T::one() + T::epsilon() * T::lit(16.0));
    Ok(GrowthBound { m_const, omega })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    type M = ComplexMatrix<f64>;

    fn scalar(a: f64) -> M {
        M::from_real_diag(&[a]).unwrap()
    }

    fn nilpotent() -> M {
        M::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap()
    }

    #[test]
    fn zero_generator_gives_identity() {
        let fam = CosineFamily::new(M::zeros(3)).unwrap();
        for t in [0.0, 0.3, -7.0, 100.0] {
            assert_eq!(fam.cosine_at(t).unwrap(), M::identity(3));
        }
        let sg = Semigroup::new(M::zeros(2)).unwrap();
        assert_eq!(sg.semigroup_at(5.0).unwrap(), M::identity(2));
    }

    #[test]
    fn scalar_cosine() {
        for a in [0.5, 1.0, 3.0] {
            let fam = CosineFamily::new(scalar(-a * a)).unwrap();
            for t in [0.1, 1.0, 2.5, 10.0] {
                let got = fam.cosine_at(t).unwrap()[(0, 0)];
                assert_relative_eq!(got.re, (a * t).cos(), epsilon = 1e-10);
                assert_eq!(got.im, 0.0);
            }
        }
        let hyper = CosineFamily::new(scalar(1.0)).unwrap();
        assert_relative_eq!(hyper.cosine_at(3.0).unwrap()[(0, 0)].re, 3f64.cosh(), max_relative = 1e-12);
    }

    #[test]
    fn nilpotent_cosine_truncates() {
        let fam = CosineFamily::new(nilpotent()).unwrap();
        for t in [0.5, 1.0, 3.0] {
            let c = fam.cosine_at(t).unwrap();
            let expect = M::from_real_rows(&[&[1.0, t * t / 2.0], &[0.0, 1.0]]).unwrap();
            assert!((&c - &expect).max_abs() < 1e-13 * (1.0 + t * t));
        }
    }

    #[test]
    fn cosine_at_zero_is_exact_identity_and_even() {
        let a = M::from_rows(vec![
            vec![Complex::new(0.3, 0.1), Complex::new(-1.0, 0.0)],
            vec![Complex::new(0.2, -0.7), Complex::new(0.5, 0.5)],
        ])
        .unwrap();
        let fam = CosineFamily::new(a).unwrap();
        assert_eq!(fam.cosine_at(0.0).unwrap(), M::identity(2));
        for t in [0.01, 0.9, 4.2] {
            assert_eq!(fam.cosine_at(t).unwrap(), fam.cosine_at(-t).unwrap());
        }
    }

    #[test]
    fn semigroup_examples() {
        let sg = Semigroup::new(M::from_real_diag(&[-1.0, -2.0]).unwrap()).unwrap();
        let t1 = sg.semigroup_at(1.0).unwrap();
        assert_relative_eq!(t1[(0, 0)].re, (-1f64).exp(), max_relative = 1e-13);
        assert_relative_eq!(t1[(1, 1)].re, (-2f64).exp(), max_relative = 1e-13);
        let nil = Semigroup::new(nilpotent()).unwrap();
        let t = nil.semigroup_at(2.5).unwrap();
        assert!((&t - &M::from_real_rows(&[&[1.0, 2.5], &[0.0, 1.0]]).unwrap()).max_abs() < 1e-13);
        assert!(matches!(nil.semigroup_at(-1.0), Err(Error::InvalidInput(_))));
        assert_eq!(nil.semigroup_at(0.0).unwrap(), M::identity(2));
    }

    #[test]
    fn dalembert_examples() {
        let fam = CosineFamily::new(scalar(-1.0)).unwrap();
        assert!(fam.dalembert_residual(0.7, 0.3).unwrap() <= 1e-10);
        assert!(fam.dalembert_residual(0.7, 0.0).unwrap() <= 1e-12);
    }

    #[test]
    fn generator_recovery_examples() {
        let zero = CosineFamily::new(M::zeros(2)).unwrap();
        assert_eq!(zero.generator_recover(0.3).unwrap(), M::zeros(2));
        let fam = CosineFamily::new(scalar(-1.0)).unwrap();
        // 2 (cos h - 1) / h^2 = -1 + h^2/12 - ...
        let got = fam.generator_recover(1e-3).unwrap()[(0, 0)].re;
        assert!((got + 1.0).abs() <= 1e-6);
        assert_relative_eq!(got, -1.0 + 1e-6 / 12.0, epsilon = 1e-12);
        let nil = CosineFamily::new(nilpotent()).unwrap();
        for h in [1.0, 0.5, 1e-3] {
            assert!((&nil.generator_recover(h).unwrap() - &nilpotent()).max_abs() < 1e-14);
        }
        assert!(fam.generator_recover(0.0).is_err());
        assert!(fam.generator_recover(-1.0).is_err());
    }

    #[test]
    fn unconverged_series_is_a_range_error() {
        let gen = Generator::new(scalar(-1.0)).unwrap();
        let fam = CosineFamily::with_generator(gen, SeriesControl::new(3, 1e6).unwrap());
        assert!(matches!(fam.cosine_at(100.0), Err(Error::Range(_))));
        let overflow = CosineFamily::new(scalar(1.0)).unwrap();
        assert!(matches!(overflow.cosine_at(1e4), Err(Error::Range(_))));
        assert!(matches!(overflow.cosine_at(f64::NAN), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn growth_bound_examples() {
        let cos = CosineFamily::new(scalar(-1.0)).unwrap();
        let g = growth_bound_estimate(&cos, 10.0, 101).unwrap();
        assert!(g.m_const >= 1.0 && g.omega >= 0.0);

        let cosh = CosineFamily::new(scalar(1.0)).unwrap();
        let g = growth_bound_estimate(&cosh, 5.0, 101).unwrap();
        assert!(g.omega >= 0.95, "omega = {}", g.omega);
        for i in 0..101 {
            let t = 0.05 * i as f64;
            assert!(t.cosh() <= g.envelope(t));
        }

        let zero = CosineFamily::new(M::zeros(2)).unwrap();
        let g = growth_bound_estimate(&zero, 3.0, 10).unwrap();
        assert_eq!(g.omega, 0.0);
        assert_relative_eq!(g.m_const, 1.0, epsilon = 1e-14);

        assert!(growth_bound_estimate(&zero, 0.0, 10).is_err());
        assert!(growth_bound_estimate(&zero, 1.0, 1).is_err());
    }

    #[test]
    fn single_precision_family() {
        let fam = CosineFamily::new(ComplexMatrix::<f32>::from_real_diag(&[-4.0]).unwrap()).unwrap();
        let c = fam.cosine_at(0.5).unwrap()[(0, 0)].re;
        assert!((c - 1f32.cos()).abs() < 1e-5);
    }
}
