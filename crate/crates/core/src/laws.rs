//! Distance-to-identity profiles and the law classifier.
//!
//! All suprema here are maxima over finite grids, so they are lower bounds of
//! the true suprema. The classifier only states a conclusion when the
//! measurement clears the threshold by a margin.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::family::{CosineFamily, Evolution, FamilyKind, Generator, SeriesControl};
use crate::linalg::{eigenvalues, op_norm, ComplexMatrix};
use crate::scalar::Real;

pub const DEFAULT_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    /// `||C(t) - I||`.
    Cosine,
    /// `||T(t) - I||`.
    Semigroup,
    /// `||C(t) - cos(at) I||`.
    ScalarDistance,
}

impl From<FamilyKind> for ProfileKind {
    fn from(k: FamilyKind) -> Self {
        match k {
            FamilyKind::Cosine => ProfileKind::Cosine,
            FamilyKind::Semigroup => ProfileKind::Semigroup,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ProfilePoint<T> {
    pub t: T,
    pub dist: T,
}

/// Sampled `t -> ||F(t) - I||`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct NormProfile<T> {
    pub points: Vec<ProfilePoint<T>>,
    pub kind: ProfileKind,
}

impl<T: Real> NormProfile<T> {
    pub fn max_dist(&self) -> T {
        self.points.iter().map(|p| p.dist).fold(T::zero(), T::max)
    }

    /// Max over the finer half (smallest `t`) of the samples.
    pub fn small_time_max(&self) -> T {
        let keep = self.points.len().div_ceil(2);
        self.points[..keep].iter().map(|p| p.dist).fold(T::zero(), T::max)
    }

    /// `t,dist` CSV with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,dist\n");
        for p in &self.points {
            out.push_str(&format!("{},{}\n", crate::fmt_sig(p.t), crate::fmt_sig(p.dist)));
        }
        out
    }
}

fn check_grid<T: Real>(grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid("grid must be non-empty"));
    }
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(invalid("grid must be finite"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("grid must be strictly increasing"));
    }
    Ok(())
}

/// `||F(t) - I||` at every grid point.
pub fn norm_profile<T: Real>(family: &impl Evolution<T>, grid: &[T]) -> Result<NormProfile<T>> {
    use rayon::prelude::*;
    check_grid(grid)?;
    if family.kind() == FamilyKind::Semigroup && grid[0] < T::zero() {
        return Err(invalid("semigroup profiles need a non-negative grid"));
    }
    let points = grid
        .par_iter()
        .map(|&t| {
            family
                .offset_at(t)
                .and_then(|d| op_norm(&d))
                .map(|dist| ProfilePoint { t, dist })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NormProfile {
        points,
        kind: family.kind().into(),
    })
}

/// `||C(t) - cos(at) I||` at every grid point.
pub fn scalar_distance_profile<T: Real>(fam: &CosineFamily<T>, a: T, grid: &[T]) -> Result<NormProfile<T>> {
    use rayon::prelude::*;
    check_grid(grid)?;
    let points = grid
        .par_iter()
        .map(|&t| {
            let c = fam.cosine_at(t)?;
            let d = c.shift(Complex::new(-(a * t).cos(), T::zero()));
            Ok(ProfilePoint { t, dist: op_norm(&d)? })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NormProfile {
        points,
        kind: ProfileKind::ScalarDistance,
    })
}

/// `{ t_start 2^{-j} : j = 0..levels }`, ascending.
pub fn geometric_grid<T: Real>(t_start: T, levels: usize) -> Vec<T> {
    let mut g: Vec<T> = (0..levels).map(|j| t_start * T::lit(2.0).powi(-(j as i32))).collect();
    g.reverse();
    g
}

/// Proxy for `limsup_{t -> 0+} ||C(t) - I||`: the max over the finer
/// `ceil(levels / 2)` levels of the geometric grid `t_start 2^{-j}`.
pub fn limsup_zero_estimate<T: Real>(fam: &CosineFamily<T>, t_start: T, levels: usize) -> Result<T> {
    if levels < 3 {
        return Err(invalid("need at least 3 levels"));
    }
    if !(t_start > T::zero() && t_start.is_finite()) {
        return Err(invalid("t_start must be positive"));
    }
    let grid = geometric_grid(t_start, levels);
    Ok(norm_profile(fam, &grid)?.small_time_max())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawId {
    ZeroTwoLocal,
    ZeroTwoGlobal,
    ZeroOneGlobal,
    ScalarDistance,
}

impl LawId {
    pub fn expected_kind(self) -> ProfileKind {
        match self {
            LawId::ZeroTwoLocal | LawId::ZeroTwoGlobal => ProfileKind::Cosine,
            LawId::ZeroOneGlobal => ProfileKind::Semigroup,
            LawId::ScalarDistance => ProfileKind::ScalarDistance,
        }
    }

    pub fn threshold<T: Real>(self) -> T {
        match self {
            LawId::ZeroTwoLocal | LawId::ZeroTwoGlobal => T::lit(2.0),
            LawId::ZeroOneGlobal => T::one(),
            LawId::ScalarDistance => optimal_scalar_constant(),
        }
    }

    fn conclusion(self) -> &'static str {
        match self {
            LawId::ZeroTwoLocal => CONCLUSION_BOUNDED,
            LawId::ZeroTwoGlobal | LawId::ZeroOneGlobal => CONCLUSION_IDENTITY,
            LawId::ScalarDistance => CONCLUSION_SCALAR,
        }
    }
}

impl std::str::FromStr for LawId {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_owned()))
            .map_err(|_| invalid(format!("unknown law id {s:?}")))
    }
}

pub const CONCLUSION_BOUNDED: &str = "generator bounded ⇒ uniformly continuous";
pub const CONCLUSION_IDENTITY: &str = "family is identically I";
pub const CONCLUSION_SCALAR: &str = "family equals cos(at)I";
pub const CONCLUSION_NONE: &str = "no conclusion (hypothesis fails)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LawVerdict<T> {
    pub law: LawId,
    pub measured: T,
    pub threshold: T,
    pub conclusion: String,
}

impl<T: Real> LawVerdict<T> {
    pub fn concludes(&self) -> bool {
        self.conclusion != CONCLUSION_NONE
    }
}

/// Compares the profile's measurement against the law's threshold.
///
/// The local law measures the finer half of the profile, the global laws the
/// whole profile.
pub fn classify<T: Real>(profile: &NormProfile<T>, law: LawId, margin: T) -> Result<LawVerdict<T>> {
    if profile.kind != law.expected_kind() {
        return Err(invalid(format!(
            "law {law:?} needs a {:?} profile, got {:?}",
            law.expected_kind(),
            profile.kind
        )));
    }
    if profile.points.is_empty() {
        return Err(invalid("empty profile"));
    }
    let measured = match law {
        LawId::ZeroTwoLocal => profile.small_time_max(),
        _ => profile.max_dist(),
    };
    let threshold = law.threshold::<T>();
    let conclusion = if measured < threshold - margin {
        law.conclusion()
    } else {
        CONCLUSION_NONE
    };
    Ok(LawVerdict {
        law,
        measured,
        threshold,
        conclusion: conclusion.to_owned(),
    })
}

/// Default horizon standing in for "all `t >= 0`" in the global laws.
///
/// `4π / κ`, where `κ` is the smallest non-negligible `|μ|^{1/2}` (cosine) or
/// `|μ|` (semigroup) over the eigenvalues `μ` of the generator. `None` when
/// every eigenvalue is negligible, in which case the caller must supply one.
pub fn default_global_horizon<T: Real>(gen: &Generator<T>, kind: FamilyKind) -> Result<Option<T>> {
    let floor = T::epsilon().sqrt() * gen.norm().max(T::one());
    let scale = eigenvalues(gen.matrix())?
        .into_iter()
        .map(|mu| mu.norm())
        .filter(|&m| m > floor)
        .map(|m| match kind {
            FamilyKind::Cosine => m.sqrt(),
            FamilyKind::Semigroup => m,
        })
        .fold(None, |acc: Option<T>, m| Some(acc.map_or(m, |a| a.min(m))));
    Ok(scale.map(|k| T::lit(4.0) * T::PI() / k))
}

/// Cosine family generated by `diag(-1², -2², ..., -n²)`, i.e. `diag(cos kt)`.
pub fn diag_cosine_example<T: Real>(n: usize) -> Result<CosineFamily<T>> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let diag: Vec<T> = (1..=n).map(|k| -T::from_count(k * k)).collect();
    CosineFamily::new(ComplexMatrix::from_real_diag(&diag)?)
}

/// Block-diagonal family whose `n`-th block is `C(n t)`, `n = 1..=n_blocks`.
///
/// Blocks are evaluated one at a time; the full matrix is only formed by
/// [`ExtensionFamily::materialize`].
#[derive(Debug, Clone)]
pub struct ExtensionFamily<T> {
    base: CosineFamily<T>,
    n_blocks: usize,
}

pub fn extension_family<T: Real>(fam: &CosineFamily<T>, n_blocks: usize) -> Result<ExtensionFamily<T>> {
    if n_blocks == 0 {
        return Err(invalid("need at least one block"));
    }
    Ok(ExtensionFamily {
        base: fam.clone(),
        n_blocks,
    })
}

impl<T: Real> ExtensionFamily<T> {
    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn base(&self) -> &CosineFamily<T> {
        &self.base
    }

    /// Block `n` (1-based) at time `t`: `C(n t)`.
    pub fn block_at(&self, n: usize, t: T) -> Result<ComplexMatrix<T>> {
        self.check_block(n)?;
        self.base.cosine_at(T::from_count(n) * t)
    }

    /// Generator of block `n`: `n² A`.
    pub fn generator_block(&self, n: usize) -> Result<ComplexMatrix<T>> {
        self.check_block(n)?;
        Ok(self.base.generator().matrix().scale(T::from_count(n * n)))
    }

    /// `2 (C(n h) - I) / h²`, the second-difference quotient of block `n`.
    pub fn generator_recover_block(&self, n: usize, h: T) -> Result<ComplexMatrix<T>> {
        self.check_block(n)?;
        if !(h > T::zero() && h.is_finite()) {
            return Err(invalid("step h must be positive"));
        }
        Ok(self
            .base
            .cosine_offset(T::from_count(n) * h)?
            .scale(T::lit(2.0) / (h * h)))
    }

    /// `||C_ext(t) - I|| = max_n ||C(n t) - I||`.
    pub fn distance_from_identity(&self, t: T) -> Result<T> {
        let mut best = T::zero();
        for n in 1..=self.n_blocks {
            let d = self.base.cosine_offset(T::from_count(n) * t)?;
            best = best.max(op_norm(&d)?);
        }
        Ok(best)
    }

    pub fn profile(&self, grid: &[T]) -> Result<NormProfile<T>> {
        use rayon::prelude::*;
        check_grid(grid)?;
        let points = grid
            .par_iter()
            .map(|&t| self.distance_from_identity(t).map(|dist| ProfilePoint { t, dist }))
            .collect::<Result<Vec<_>>>()?;
        Ok(NormProfile {
            points,
            kind: ProfileKind::Cosine,
        })
    }

    /// The whole family as one cosine family with block-diagonal generator.
    pub fn materialize(&self) -> Result<CosineFamily<T>> {
        let blocks = (1..=self.n_blocks)
            .map(|n| self.generator_block(n))
            .collect::<Result<Vec<_>>>()?;
        let gen = Generator::new(ComplexMatrix::block_diag(&blocks)?)?;
        Ok(CosineFamily::with_generator(gen, SeriesControl::default()))
    }

    fn check_block(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.n_blocks {
            return Err(invalid(format!("block {n} outside 1..={}", self.n_blocks)));
        }
        Ok(())
    }
}

/// `8 / (3 √3)`.
pub fn optimal_scalar_constant<T: Real>() -> T {
    T::lit(8.0) / (T::lit(3.0) * T::lit(3.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ScalarDistanceSup<T> {
    pub a: T,
    pub grid_points: usize,
    /// Grid maximum of `|cos(3at) - cos(at)|` over one period.
    pub measured: T,
    /// `8 / (3 √3)`.
    pub analytic: T,
}

/// Grid supremum of `|cos(3at) - cos(at)|` over `[0, 2π/|a|]`.
pub fn scalar_distance_sup<T: Real>(a: T, grid_points: usize) -> Result<ScalarDistanceSup<T>> {
    if a == T::zero() || !a.is_finite() {
        return Err(invalid("a must be non-zero and finite"));
    }
    if grid_points < 2 {
        return Err(invalid("need at least two grid points"));
    }
    let period = T::TAU() / a.abs();
    let step = period / T::from_count(grid_points - 1);
    let three = T::lit(3.0);
    let measured = (0..grid_points)
        .map(|i| {
            let t = step * T::from_count(i);
            ((three * a * t).cos() - (a * t).cos()).abs()
        })
        .fold(T::zero(), T::max);
    Ok(ScalarDistanceSup {
        a,
        grid_points,
        measured,
        analytic: optimal_scalar_constant(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::Semigroup;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    type M = ComplexMatrix<f64>;

    fn scalar_fam(a: f64) -> CosineFamily<f64> {
        CosineFamily::new(M::from_real_diag(&[a]).unwrap()).unwrap()
    }

    #[test]
    fn profile_examples() {
        let zero = CosineFamily::new(M::zeros(2)).unwrap();
        let p = norm_profile(&zero, &[0.0, 1.0, 5.0]).unwrap();
        assert!(p.points.iter().all(|pt| pt.dist == 0.0));
        let fam = scalar_fam(-1.0);
        assert_relative_eq!(norm_profile(&fam, &[PI]).unwrap().points[0].dist, 2.0, epsilon = 1e-12);
        assert_relative_eq!(norm_profile(&fam, &[PI / 2.0]).unwrap().points[0].dist, 1.0, epsilon = 1e-12);
        assert!(norm_profile(&fam, &[1.0, 0.5]).is_err());
        let sg = Semigroup::new(M::from_real_diag(&[-1.0]).unwrap()).unwrap();
        assert!(norm_profile(&sg, &[-1.0, 0.0]).is_err());
    }

    #[test]
    fn limsup_examples() {
        let zero = CosineFamily::new(M::zeros(3)).unwrap();
        assert_eq!(limsup_zero_estimate(&zero, 1.0, 5).unwrap(), 0.0);
        let est = limsup_zero_estimate(&scalar_fam(-1.0), 1.0, 20).unwrap();
        let oracle = 1.0 - (2f64.powi(-10)).cos();
        assert_relative_eq!(est, oracle, max_relative = 1e-9);
        assert!(est <= 4.8e-7);
        let diag = diag_cosine_example::<f64>(64).unwrap();
        assert!(limsup_zero_estimate(&diag, 1.0, 4).unwrap() > 1.9);
        assert!(limsup_zero_estimate(&zero, 1.0, 2).is_err());
    }

    #[test]
    fn classify_examples() {
        let zero = CosineFamily::new(M::zeros(2)).unwrap();
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
        let v = classify(&norm_profile(&zero, &grid).unwrap(), LawId::ZeroTwoGlobal, DEFAULT_MARGIN).unwrap();
        assert_eq!(v.measured, 0.0);
        assert_eq!(v.conclusion, CONCLUSION_IDENTITY);

        let mut grid_pi = grid.clone();
        grid_pi.push(PI);
        grid_pi.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let v = classify(&norm_profile(&scalar_fam(-1.0), &grid_pi).unwrap(), LawId::ZeroTwoGlobal, DEFAULT_MARGIN).unwrap();
        assert_relative_eq!(v.measured, 2.0, epsilon = 1e-12);
        assert_eq!(v.conclusion, CONCLUSION_NONE);

        let sg = Semigroup::new(M::from_real_diag(&[-1.0]).unwrap()).unwrap();
        let p = norm_profile(&sg, &grid).unwrap();
        let v = classify(&p, LawId::ZeroOneGlobal, DEFAULT_MARGIN).unwrap();
        assert_relative_eq!(v.measured, 1.0 - (-10f64).exp(), epsilon = 1e-12);
        assert!(v.measured < 1.0);
        assert_eq!(v.conclusion, CONCLUSION_NONE);
        assert!(classify(&p, LawId::ZeroTwoGlobal, DEFAULT_MARGIN).is_err());
    }

    #[test]
    fn local_law_on_a_fine_geometric_profile() {
        let fam = scalar_fam(-4.0);
        let p = norm_profile(&fam, &geometric_grid(1.0, 30)).unwrap();
        let v = classify(&p, LawId::ZeroTwoLocal, DEFAULT_MARGIN).unwrap();
        assert_eq!(v.conclusion, CONCLUSION_BOUNDED);
        assert!(v.measured < 1e-6);
    }

    #[test]
    fn default_horizons() {
        let g = Generator::new(M::from_real_diag(&[-4.0, -0.25]).unwrap()).unwrap();
        let h = default_global_horizon(&g, FamilyKind::Cosine).unwrap().unwrap();
        assert_relative_eq!(h, 8.0 * PI, epsilon = 1e-9);
        let h = default_global_horizon(&g, FamilyKind::Semigroup).unwrap().unwrap();
        assert_relative_eq!(h, 16.0 * PI, epsilon = 1e-9);
        let nil = Generator::new(M::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap()).unwrap();
        assert_eq!(default_global_horizon(&nil, FamilyKind::Cosine).unwrap(), None);
    }

    #[test]
    fn diag_example_values() {
        let one = diag_cosine_example::<f64>(1).unwrap();
        assert_relative_eq!(norm_profile(&one, &[PI]).unwrap().points[0].dist, 2.0, epsilon = 1e-12);
        let fam = diag_cosine_example::<f64>(8).unwrap();
        for t in [0.01, 0.05, 0.1, 1.0, 3.0] {
            let c = fam.cosine_at(t).unwrap();
            for k in 1..=8 {
                assert!((c[(k - 1, k - 1)].re - (k as f64 * t).cos()).abs() <= 1e-12);
            }
        }
        assert!(diag_cosine_example::<f64>(0).is_err());
    }

    #[test]
    fn extension_examples() {
        let zero = CosineFamily::new(M::zeros(2)).unwrap();
        let ext = extension_family(&zero, 4).unwrap();
        assert_eq!(ext.distance_from_identity(0.7).unwrap(), 0.0);

        let ext = extension_family(&scalar_fam(-1.0), 3).unwrap();
        for n in 1..=3 {
            let b = ext.block_at(n, 0.2).unwrap()[(0, 0)].re;
            assert_relative_eq!(b, (0.2 * n as f64).cos(), epsilon = 1e-13);
        }
        assert_relative_eq!(ext.distance_from_identity(0.2).unwrap(), 1.0 - 0.6f64.cos(), epsilon = 1e-13);
        assert!(ext.block_at(0, 1.0).is_err() && ext.block_at(4, 1.0).is_err());
        assert_eq!(ext.generator_block(3).unwrap()[(0, 0)].re, -9.0);
    }

    #[test]
    fn scalar_constant() {
        let r = scalar_distance_sup(1.0f64, 100_001).unwrap();
        assert!(r.measured < 2.0);
        assert_relative_eq!(r.analytic, 1.539_600_717_839_002, epsilon = 1e-15);
        assert!((r.measured - r.analytic).abs() < 1e-8);
        assert!(r.measured <= r.analytic + 1e-15);
        assert!(scalar_distance_sup(0.0f64, 10).is_err());
    }

    #[test]
    fn scalar_distance_profile_and_law() {
        let fam = scalar_fam(-9.0);
        let grid: Vec<f64> = (0..=2000).map(|i| i as f64 * PI / 1000.0).collect();
        let p = scalar_distance_profile(&fam, 1.0, &grid).unwrap();
        let v = classify(&p, LawId::ScalarDistance, DEFAULT_MARGIN).unwrap();
        assert!((v.measured - optimal_scalar_constant::<f64>()).abs() < 1e-5);
        assert_eq!(v.conclusion, CONCLUSION_NONE);
        let p = scalar_distance_profile(&scalar_fam(-1.0), 1.0, &grid).unwrap();
        let v = classify(&p, LawId::ScalarDistance, DEFAULT_MARGIN).unwrap();
        assert_eq!(v.conclusion, CONCLUSION_SCALAR);
    }

    #[test]
    fn law_id_parsing() {
        assert_eq!("zero-two-local".parse::<LawId>().unwrap(), LawId::ZeroTwoLocal);
        assert_eq!("zero-one-global".parse::<LawId>().unwrap(), LawId::ZeroOneGlobal);
        assert!("zero-three".parse::<LawId>().is_err());
    }
}
