//! The numeric acceptance criteria, one function each.
//!
//! `reproduce` runs all of them; the acceptance test times and gates them.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use zerotwo::laws::extension_family;
use zerotwo::resolvent::{sinh_factor, sinh_majorant};
use zerotwo::sample::{generator_set, rng};
use zerotwo::spectral::{certify_r_tilde, sample_region};
use zerotwo::{
    cesaro_check, cosine_laplace_bound_check, diag_cosine_example, growth_bound_estimate, laplace_resolvent,
    limsup_zero_estimate, norm_profile, op_norm, region_params, resolvent, resolvent_identity_residual,
    resolvent_via_s, s_norm_bound_check, scalar_distance_sup, verify_region_bound, Complex, ComplexMatrix,
    CosineFamily, Semigroup,
};

use crate::error::CliResult;
use crate::input::{require, Validate, DEFAULT_SEED};

/// Settings shared by every criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReproduceConfig {
    pub seed: u64,
    pub generators: usize,
    pub dim: usize,
    pub max_norm: f64,
    pub growth_horizon: f64,
    pub growth_samples: usize,
    pub laplace_samples: usize,
    pub scalar_sinh_samples: usize,
    pub scalar_grid_points: usize,
    pub semigroup_horizon: f64,
    pub region_samples: usize,
}

impl Default for ReproduceConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            generators: 20,
            dim: 8,
            max_norm: 4.0,
            growth_horizon: 10.0,
            growth_samples: 201,
            laplace_samples: 50,
            scalar_sinh_samples: 1000,
            scalar_grid_points: 1_000_000,
            semigroup_horizon: 50.0,
            region_samples: 25,
        }
    }
}

impl Validate for ReproduceConfig {
    fn validate(&self) -> CliResult<()> {
        require(self.generators >= 1, "generators must be at least 1")?;
        require(self.dim >= 1, "dim must be at least 1")?;
        require(self.max_norm > 0.0 && self.max_norm.is_finite(), "max_norm must be positive")?;
        require(self.growth_horizon > 0.0, "growth_horizon must be positive")?;
        require(self.growth_samples >= 4, "growth_samples must be at least 4")?;
        require(self.scalar_grid_points >= 2, "scalar_grid_points must be at least 2")?;
        require(self.semigroup_horizon > 0.0, "semigroup_horizon must be positive")?;
        require(self.region_samples >= 1, "region_samples must be at least 1")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    /// Worst observed value of the criterion's main quantity.
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
    pub details: Value,
}

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

fn families(cfg: &ReproduceConfig) -> CliResult<Vec<CosineFamily<f64>>> {
    generator_set(cfg.seed, cfg.generators, cfg.dim, cfg.max_norm)
        .into_iter()
        .map(|a| CosineFamily::new(a).map_err(Into::into))
        .collect()
}

fn sweep_lambdas() -> [Complex<f64>; 4] {
    [c(1.0, 0.0), c(2.0, 0.0), c(1.0, 1.0), c(2.0, -1.0)]
}

const SWEEP_S: [f64; 3] = [0.25, 0.5, 1.0];

fn sweep_points() -> Vec<(Complex<f64>, f64)> {
    sweep_lambdas()
        .into_iter()
        .flat_map(|l| SWEEP_S.into_iter().map(move |s| (l, s)))
        .collect()
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

/// 1. `2C(t)C(s) = C(t+s) + C(t-s)` on a 10x10 grid of `[0,1]²`.
pub fn dalembert(cfg: &ReproduceConfig) -> CliResult<Criterion> {
    let fams = families(cfg)?;
    let grid: Vec<f64> = (0..10).map(|i| i as f64 / 9.0).collect();
    let per_gen = fams
        .par_iter()
        .map(|fam| {
            let mut worst = 0.0f64;
            for &t in &grid {
                for &s in &grid {
                    worst = worst.max(fam.dalembert_residual(t, s)?);
                }
            }
            Ok(worst)
        })
        .collect::<zerotwo::Result<Vec<f64>>>()?;
    let measured = max_of(per_gen.iter().copied());
    let threshold = 1e-8;
    Ok(Criterion {
        id: 1,
        name: "dalembert",
        measured,
        threshold,
        pass: measured <= threshold,
        details: json!({ "max_residual_per_generator": per_gen }),
    })
}

/// 2. `(λ²I - A) S(λ,s) = λ (cosh(λs) I - C(s))`, plus the commutation relations.
pub fn resolvent_identity(cfg: &ReproduceConfig) -> CliResult<Criterion> {
    let fams = families(cfg)?;
    let points = sweep_points();
    let rows = fams
        .par_iter()
        .map(|fam| {
            points
                .iter()
                .map(|&(l, s)| resolvent_identity_residual(fam, l, s, None))
                .collect::<zerotwo::Result<Vec<_>>>()
        })
        .collect::<zerotwo::Result<Vec<_>>>()?;
    let all = rows.iter().flatten();
    let identity = max_of(all.clone().map(|r| r.identity));
    let commutators = max_of(all.clone().map(|r| r.commutator_cosine.max(r.commutator_generator)));
    let refinement = max_of(all.map(|r| r.refinement_change));
    let measured = identity.max(commutators);
    let threshold = 1e-7;
    Ok(Criterion {
        id: 2,
        name: "resolvent-identity",
        measured,
        threshold,
        pass: measured <= threshold,
        details: json!({
            "max_identity_residual": identity,
            "max_commutator": commutators,
            "max_refinement_change": refinement,
            "points_per_generator": points.len(),
        }),
    })
}

/// 3. `R(λ², A)` through `S` against a direct solve.
pub fn oracle_equivalence(cfg: &ReproduceConfig) -> CliResult<Criterion> {
    let fams = families(cfg)?;
    let points = sweep_points();
    let rows = fams
        .par_iter()
        .map(|fam| {
            points
                .iter()
                .map(|&(l, s)| {
                    let rep = resolvent_via_s(fam, l, s, None)?;
                    Ok((rep.direct_solve_gap(fam.generator().matrix())?, rep.identity_residual, rep.bound_slack))
                })
                .collect::<zerotwo::Result<Vec<_>>>()
        })
        .collect::<zerotwo::Result<Vec<_>>>()?;
    let all: Vec<_> = rows.into_iter().flatten().collect();
    let gap = max_of(all.iter().map(|r| r.0));
    let identity = max_of(all.iter().map(|r| r.1));
    let min_slack = all.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    let threshold = 1e-6;
    Ok(Criterion {
        id: 3,
        name: "oracle-equivalence",
        measured: gap,
        threshold,
        pass: gap <= threshold && identity <= 1e-6 && min_slack >= -1e-8,
        details: json!({
            "max_relative_gap": gap,
            "max_identity_residual": identity,
            "min_growth_bound_slack": min_slack,
            "points": all.len(),
        }),
    })
}

/// 4. `||S(λ,s)|| <= sup||C|| sinh(|s| Re λ)/Re λ` and `sinh(|s| Re λ)/Re λ <= 2|s| e^{|s Re λ|}`.
pub fn s_bounds(cfg: &ReproduceConfig) -> CliResult<Criterion> {
    let fams = families(cfg)?;
    let points = sweep_points();
    let excess = fams
        .par_iter()
        .map(|fam| {
            points
                .iter()
                .map(|&(l, s)| s_norm_bound_check(fam, l, s, None).map(|b| b.lhs - b.rhs))
                .collect::<zerotwo::Result<Vec<_>>>()
        })
        .collect::<zerotwo::Result<Vec<_>>>()?;
    let norm_excess = excess.into_iter().flatten().fold(f64::NEG_INFINITY, f64::max);
    let slack = 1e-8;
    let mut sinh_excess = f64::NEG_INFINITY;
    let mut violations = 0usize;
    let mut check = |l: Complex<f64>, s: f64| {
        let e = sinh_factor(l, s) - sinh_majorant(l, s);
        sinh_excess = sinh_excess.max(e);
        if e > slack {
            violations += 1;
        }
    };
    for (l, s) in points.iter().copied() {
        check(l, s);
    }
    let mut r = rng(cfg.seed);
    for _ in 0..cfg.scalar_sinh_samples {
        let l = c(r.gen_range(1e-6..10.0), r.gen_range(-10.0..10.0));
        let s = r.gen_range(-5.0..5.0);
        check(l, s);
    }
    if norm_excess > slack {
        violations += 1;
    }
    Ok(Criterion {
        id: 4,
        name: "s-norm-bounds",
        measured: norm_excess.max(sinh_excess),
        threshold: slack,
        pass: violations == 0,
        details: json!({
            "max_norm_bound_excess": norm_excess,
            "max_sinh_inequality_excess": sinh_excess,
            "scalar_samples": cfg.scalar_sinh_samples,
            "violations": violations,
        }),
    })
}

/// 5. `||λ² R(λ², A)|| <= M |λ| / (Re λ - ω)` for `Re λ >= ω + 0.5`.
pub fn cosine_laplace(cfg: &ReproduceConfig) -> CliResult<Criterion> {
    let fams = families(cfg)?;
    let per_gen = fams
        .par_iter()
        .enumerate()
        .map(|(k, fam)| {
            let g = growth_bound_estimate(fam, cfg.growth_horizon, cfg.growth_samples)?;
            let mut r = rng(cfg.seed.wrapping_add(1000 + k as u64));
            let mut worst = f64::NEG_INFINITY;
            for _ in 0..cfg.laplace_samples {
                let l = c(g.omega + 0.5 + r.gen_range(0.0..4.0), r.gen_range(-5.0..5.0));
                let b = cosine_laplace_bound_check(fam, &g, l)?;
                worst = worst.max(b.lhs - b.rhs);
            }
            Ok(json!({ "m": g.m_const, "omega": g.omega, "max_excess": worst }))
        })
        .collect::<zerotwo::Result<Vec<Value>>>()?;
    let measured = per_gen
        .iter()
        .map(|v| v["max_excess"].as_f64().unwrap_or(f64::INFINITY))
        .fold(f64::NEG_INFINITY, f64::max);
    let threshold = 1e-6;
    Ok(Criterion {
        id: 5,
        name: "cosine-laplace-bound",
        measured,
        threshold,
        pass: measured <= threshold,
        details: json!({ "per_generator": per_gen, "samples_per_generator": cfg.laplace_samples }),
    })
}

/// 6. The diagonal example reaches distance 2 at small times.
pub fn optimality_of_two(_cfg: &ReproduceConfig) -> CliResult<Criterion> {
    let grid: Vec<f64> = (0..2000).map(|i| 0.1 * i as f64 / 1999.0).collect();
    let sup32 = norm_profile(&diag_cosine_example::<f64>(32)?, &grid)?.max_dist();
    let sup8 = norm_profile(&diag_cosine_example::<f64>(8)?, &grid)?.max_dist();
    let expected8 = 1.0 - 0.8f64.cos();
    let gap8 = (sup8 - expected8).abs();
    Ok(Criterion {
        id: 6,
        name: "optimality-of-two",
        measured: sup32,
        threshold: 2.0 - 1e-6,
        pass: sup32 >= 2.0 - 1e-6 && gap8 <= 1e-9,
        details: json!({
            "sup_n32": sup32,
            "sup_n8": sup8,
            "expected_n8": expected8,
            "gap_n8": gap8,
            "grid": "2000 points on [0, 0.1]",
        }),
    })
}

/// 7. `sup_t |cos 3t - cos t| = 8 / (3√3)`.
pub fn scalar_constant(cfg: &ReproduceConfig) -> CliResult<Criterion> {
    let r = scalar_distance_sup(1.0f64, cfg.scalar_grid_points)?;
    let r2 = scalar_distance_sup(2.5f64, cfg.scalar_grid_points)?;
    let reference = 1.539_600_7;
    let closed = 8.0 / (3.0 * 3f64.sqrt());
    Ok(Criterion {
        id: 7,
        name: "scalar-constant",
        measured: r.measured,
        threshold: reference,
        pass: (r.measured - reference).abs() <= 1e-6 && r.analytic == closed && (r.measured - r2.measured).abs() <= 1e-6,
        details: json!({
            "measured": r.measured,
            "analytic": r.analytic,
            "measured_a_2_5": r2.measured,
            "grid_points": r.grid_points,
        }),
    })
}

/// 8. `limsup_{t->0} ||C(t) - I||` vanishes for bounded generators and
/// degrades towards 2 along the diagonal examples.
pub fn zero_two_local(cfg: &ReproduceConfig) -> CliResult<Criterion> {
    let mut gens = generator_set(cfg.seed, cfg.generators, cfg.dim, cfg.max_norm);
    gens.push(ComplexMatrix::zeros(2));
    gens.push(ComplexMatrix::from_real_diag(&[-1.0])?);
    gens.push(ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])?);
    let bounded = gens
        .into_par_iter()
        .map(|a| limsup_zero_estimate(&CosineFamily::new(a)?, 1.0, 30))
        .collect::<zerotwo::Result<Vec<f64>>>()?;
    let worst = max_of(bounded.iter().copied());
    let diag = [64usize, 128]
        .into_iter()
        .map(|n| Ok((n, limsup_zero_estimate(&diag_cosine_example::<f64>(n)?, 1.0, 4)?)))
        .collect::<zerotwo::Result<Vec<_>>>()?;
    let diag_min = diag.iter().map(|d| d.1).fold(f64::INFINITY, f64::min);
    Ok(Criterion {
        id: 8,
        name: "zero-two-local",
        measured: worst,
        threshold: 1e-6,
        pass: worst <= 1e-6 && diag_min >= 1.9,
        details: json!({
            "bounded_max": worst,
            "diag_estimates": diag.iter().map(|(n, e)| json!({"n": n, "estimate": e})).collect::<Vec<_>>(),
        }),
    })
}

fn scalar_semigroup(a: f64) -> CliResult<Semigroup<f64>> {
    Ok(Semigroup::new(ComplexMatrix::from_real_diag(&[a])?)?)
}

fn nilpotent_semigroup() -> CliResult<Semigroup<f64>> {
    Ok(Semigroup::new(ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])?)?)
}

/// 9. `||λR(λ,A) - I|| <= r` and the Laplace integral against a direct solve.
pub fn semigroup_frequency(cfg: &ReproduceConfig) -> CliResult<Criterion> {
    let sg = scalar_semigroup(-0.1)?;
    let a = sg.generator().matrix().clone();
    let g = growth_bound_estimate(&sg, cfg.growth_horizon, cfg.growth_samples)?;
    let r = zerotwo::resolvent::semigroup_distance_sup(&sg, cfg.semigroup_horizon, 2001)?;
    let mut rows = Vec::new();
    let mut pass = true;
    let mut worst_gap = 0.0f64;
    for lam in [1.0, 10.0, 100.0] {
        let l = c(lam, 0.0);
        let direct = resolvent(&a, l)?;
        let chain = op_norm(&direct.scale(lam).shift(c(-1.0, 0.0)))?;
        let lr = laplace_resolvent(&sg, l, &g, None)?;
        let gap = op_norm(&(&lr.value - &direct))? / op_norm(&direct)?;
        worst_gap = worst_gap.max(gap);
        pass &= chain <= r + 1e-8 && gap <= 1e-6;
        rows.push(json!({
            "lambda": lam,
            "distance": chain,
            "r": r,
            "laplace_relative_gap": gap,
            "laplace_horizon": lr.horizon,
        }));
    }
    Ok(Criterion {
        id: 9,
        name: "semigroup-frequency-domain",
        measured: worst_gap,
        threshold: 1e-6,
        pass,
        details: json!({ "growth": g, "r_horizon": cfg.semigroup_horizon, "rows": rows }),
    })
}

/// 10. `T(t) - I = A B_t` and `||B_t^{-1}|| <= 1/(t(1-r))`.
pub fn semigroup_time(cfg: &ReproduceConfig) -> CliResult<Criterion> {
    let mut rows = Vec::new();
    let mut pass = true;
    let mut worst = 0.0f64;
    for (name, sg) in [("scalar", scalar_semigroup(-0.1)?), ("nilpotent", nilpotent_semigroup()?)] {
        for t in [0.5, 1.0, 2.0] {
            let ch = cesaro_check(&sg, t, cfg.semigroup_horizon, None)?;
            worst = worst.max(ch.identity_residual);
            pass &= ch.identity_residual <= 1e-8 && ch.bound_holds(1e-8) != Some(false);
            rows.push(json!({
                "generator": name,
                "t": t,
                "identity_residual": ch.identity_residual,
                "inv_norm": ch.inv_norm,
                "r": ch.r,
                "bound": ch.bound,
            }));
        }
    }
    Ok(Criterion {
        id: 10,
        name: "semigroup-time-domain",
        measured: worst,
        threshold: 1e-8,
        pass,
        details: json!({ "rows": rows }),
    })
}

/// 11. Block norm equality and the `n²A` generator of block `n`.
pub fn extension(cfg: &ReproduceConfig) -> CliResult<Criterion> {
    let base = CosineFamily::new(generator_set(cfg.seed, 1, 3, 1.0).remove(0))?;
    let ext = extension_family(&base, 8)?;
    let full = ext.materialize()?;
    let grid: Vec<f64> = (0..=20).map(|i| 0.025 * i as f64).collect();
    let norm_gap = grid
        .par_iter()
        .map(|&t| {
            let lazy = ext.distance_from_identity(t)?;
            let dense = op_norm(&full.cosine_offset(t)?)?;
            Ok((lazy - dense).abs())
        })
        .collect::<zerotwo::Result<Vec<f64>>>()?;
    let norm_gap = max_of(norm_gap);

    let a = base.generator().matrix();
    let a_norm = base.generator().norm();
    let h = 1e-2;
    let mut blocks = Vec::new();
    let mut pass = norm_gap <= 1e-10;
    for n in 1..=8usize {
        let target = ext.generator_block(n)?;
        let na = a.scale(n as f64);
        let err = |hh: f64| -> CliResult<f64> { Ok(op_norm(&(&ext.generator_recover_block(n, hh)? - &target))?) };
        let (e1, e2) = (err(h)?, err(h / 2.0)?);
        // Exact remainder of the series: 2 (cosh(h√a) - 1 - h²a/2) / h², a = n²||A||.
        let an = (n * n) as f64 * a_norm;
        let allowed = |hh: f64| 2.0 * ((hh * an.sqrt()).cosh() - 1.0 - hh * hh * an / 2.0) / (hh * hh) + 1e-12 * an;
        let ok = e1 <= allowed(h) && e2 <= allowed(h / 2.0);
        pass &= ok;
        let vs_linear = op_norm(&(&ext.generator_recover_block(n, h / 2.0)? - &na))?;
        blocks.push(json!({
            "n": n,
            "error_h": e1,
            "error_h_half": e2,
            "allowed_h": allowed(h),
            "distance_to_n_times_a": vs_linear,
        }));
    }
    Ok(Criterion {
        id: 11,
        name: "extension",
        measured: norm_gap,
        threshold: 1e-10,
        pass,
        details: json!({ "h": h, "blocks": blocks }),
    })
}

/// 12. Region parameters, the `r̃` certificate and the resolvent bound on `R_c`.
pub fn region(cfg: &ReproduceConfig) -> CliResult<Criterion> {
    let fam = CosineFamily::new(ComplexMatrix::from_real_diag(&[-1.0])?)?;
    let params = region_params(0.5, PI / 6.0)?;
    let cert = certify_r_tilde(params.c, params.r_tilde)?;
    let sample = sample_region(&params, cfg.region_samples, cfg.seed);
    let report = verify_region_bound(&fam, &params, &sample)?;
    let worst = report
        .points
        .iter()
        .map(|p| p.resolvent_norm / p.bound)
        .fold(0.0, f64::max);
    Ok(Criterion {
        id: 12,
        name: "region",
        measured: worst,
        threshold: 1.0,
        pass: params.is_valid() && cert.passes() && report.all_pass(),
        details: json!({
            "params": params,
            "certificate": cert,
            "hypothesis_sup": report.hypothesis_sup,
            "points_passed": report.points.iter().filter(|p| p.pass).count(),
            "points": report.points.len(),
        }),
    })
}

pub type CriterionFn = fn(&ReproduceConfig) -> CliResult<Criterion>;

pub const ALL: [CriterionFn; 12] = [
    dalembert,
    resolvent_identity,
    oracle_equivalence,
    s_bounds,
    cosine_laplace,
    optimality_of_two,
    scalar_constant,
    zero_two_local,
    semigroup_frequency,
    semigroup_time,
    extension,
    region,
];

