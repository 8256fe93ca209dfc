//! One function per subcommand. Each returns the report files and the list of
//! violated contracts; nothing touches the disk here.

use serde::{Deserialize, Serialize};
use serde_json::json;
use zerotwo::laws::{default_global_horizon, geometric_grid, DEFAULT_MARGIN};
use zerotwo::resolvent::semigroup_distance_sup;
use zerotwo::spectral::{certify_r_tilde, sample_region};
use zerotwo::{
    boundedness_diagnostic, cesaro_check, classify, growth_bound_estimate, laplace_resolvent, norm_profile, op_norm,
    region_params, resolvent, resolvent_identity_residual, resolvent_via_s, s_norm_bound_check, verify_region_bound,
    Complex, CosineFamily, Error, FamilyKind, LawId, QuadratureRule, Semigroup,
};

use crate::criteria::{self, ReproduceConfig};
use crate::error::CliResult;
use crate::input::{load_family, require, GridSpec, LoadedFamily, Validate, DEFAULT_SEED};
use crate::output::{num, Bundle, Csv};

/// Report files plus the contracts that failed.
pub struct Outcome {
    pub bundle: Bundle,
    pub violations: Vec<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn cosine(f: &LoadedFamily) -> CosineFamily<f64> {
    CosineFamily::with_generator(f.generator.clone(), f.control)
}

fn semigroup(f: &LoadedFamily) -> Semigroup<f64> {
    Semigroup::with_generator(f.generator.clone(), f.control)
}

fn cplx(p: [f64; 2]) -> Complex<f64> {
    Complex::new(p[0], p[1])
}

fn check_series(terms: Option<usize>, threshold: Option<f64>) -> CliResult<()> {
    if let Some(n) = terms {
        require(n >= 2, "taylor_terms must be at least 2")?;
    }
    if let Some(x) = threshold {
        require(x > 0.0 && x.is_finite(), "scaling_threshold must be positive")?;
    }
    Ok(())
}

fn check_points(name: &str, pts: &[[f64; 2]]) -> CliResult<()> {
    require(!pts.is_empty(), format!("{name} must be non-empty"))?;
    require(
        pts.iter().flatten().all(|x| x.is_finite()),
        format!("{name} must be finite"),
    )
}

// ---------------------------------------------------------------------------
// profile

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileConfig {
    pub seed: u64,
    pub generator: String,
    /// Defaults to the descriptor's kind, then to cosine.
    pub kind: Option<FamilyKind>,
    pub taylor_terms: Option<usize>,
    pub scaling_threshold: Option<f64>,
    /// Defaults to the cosine global law or the semigroup law.
    pub law: Option<LawId>,
    pub margin: f64,
    /// Explicit grid. Without one, global laws use `[0, 4π/κ]` from the
    /// spectrum and the local law a geometric grid.
    pub grid: Option<GridSpec>,
    pub grid_points: usize,
    /// Used when the spectrum gives no horizon (all eigenvalues negligible).
    pub fallback_horizon: f64,
    pub local_levels: usize,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            generator: "bundled:zero".into(),
            kind: None,
            taylor_terms: None,
            scaling_threshold: None,
            law: None,
            margin: DEFAULT_MARGIN,
            grid: None,
            grid_points: 2001,
            fallback_horizon: 10.0,
            local_levels: 30,
        }
    }
}

impl Validate for ProfileConfig {
    fn validate(&self) -> CliResult<()> {
        check_series(self.taylor_terms, self.scaling_threshold)?;
        require(self.margin >= 0.0 && self.margin.is_finite(), "margin must be non-negative")?;
        require(self.grid_points >= 2, "grid_points must be at least 2")?;
        require(self.fallback_horizon > 0.0, "fallback_horizon must be positive")?;
        require(self.local_levels >= 3, "local_levels must be at least 3")?;
        if let Some(g) = &self.grid {
            g.check("grid")?;
        }
        if self.law == Some(LawId::ScalarDistance) {
            return Err(crate::error::CliError::input(
                "law scalar-distance needs a scalar reference; use reproduce",
            ));
        }
        Ok(())
    }
}

pub fn profile(cfg: &ProfileConfig) -> CliResult<Outcome> {
    let loaded = load_family(&cfg.generator, cfg.taylor_terms, cfg.scaling_threshold)?;
    let kind = cfg.kind.or(loaded.kind).unwrap_or(FamilyKind::Cosine);
    let law = cfg.law.unwrap_or(match kind {
        FamilyKind::Cosine => LawId::ZeroTwoGlobal,
        FamilyKind::Semigroup => LawId::ZeroOneGlobal,
    });
    require(
        law.expected_kind() == kind.into(),
        format!("law {law:?} does not apply to a {kind:?} family"),
    )?;
    let (grid, horizon_source) = match (&cfg.grid, law) {
        (Some(g), _) => (g.values(), "config"),
        (None, LawId::ZeroTwoLocal) => (geometric_grid(1.0, cfg.local_levels), "geometric"),
        (None, _) => match default_global_horizon(&loaded.generator, kind)? {
            Some(h) => (GridSpec::linear(0.0, h, cfg.grid_points).values(), "spectrum"),
            None => (GridSpec::linear(0.0, cfg.fallback_horizon, cfg.grid_points).values(), "fallback"),
        },
    };
    let prof = match kind {
        FamilyKind::Cosine => norm_profile(&cosine(&loaded), &grid)?,
        FamilyKind::Semigroup => norm_profile(&semigroup(&loaded), &grid)?,
    };
    let verdict = classify(&prof, law, cfg.margin)?;

    let mut violations = Vec::new();
    if let Some(p) = prof.points.iter().find(|p| p.t == 0.0) {
        if p.dist != 0.0 {
            violations.push(format!("profile: dist(0) = {} instead of 0", p.dist));
        }
    }
    let mut bundle = Bundle::default();
    bundle.add("profile.csv", prof.to_csv());
    bundle.add_json(
        "verdict.json",
        &json!({
            "config": cfg,
            "kind": kind,
            "grid_source": horizon_source,
            "grid_points": grid.len(),
            "grid_end": grid.last(),
            "measurement": "grid maximum, a lower bound of the supremum",
            "verdict": verdict,
        }),
    )?;
    Ok(Outcome { bundle, violations })
}

// ---------------------------------------------------------------------------
// dalembert

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DalembertConfig {
    pub seed: u64,
    pub generator: String,
    pub taylor_terms: Option<usize>,
    pub scaling_threshold: Option<f64>,
    pub t_grid: GridSpec,
    pub s_grid: GridSpec,
    pub tolerance: f64,
}

impl Default for DalembertConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            generator: "bundled:diag_minus_one_four".into(),
            taylor_terms: None,
            scaling_threshold: None,
            t_grid: GridSpec::linear(0.0, 1.0, 10),
            s_grid: GridSpec::linear(0.0, 1.0, 10),
            tolerance: 1e-8,
        }
    }
}

impl Validate for DalembertConfig {
    fn validate(&self) -> CliResult<()> {
        check_series(self.taylor_terms, self.scaling_threshold)?;
        self.t_grid.check("t_grid")?;
        self.s_grid.check("s_grid")?;
        require(self.tolerance > 0.0, "tolerance must be positive")
    }
}

pub fn dalembert(cfg: &DalembertConfig) -> CliResult<Outcome> {
    use rayon::prelude::*;
    let fam = cosine(&load_family(&cfg.generator, cfg.taylor_terms, cfg.scaling_threshold)?);
    let ts = cfg.t_grid.values();
    let ss = cfg.s_grid.values();
    let pairs: Vec<(f64, f64)> = ts.iter().flat_map(|&t| ss.iter().map(move |&s| (t, s))).collect();
    let res = pairs
        .par_iter()
        .map(|&(t, s)| fam.dalembert_residual(t, s))
        .collect::<zerotwo::Result<Vec<f64>>>()?;
    let mut csv = Csv::new(&["t", "s", "residual"]);
    for (&(t, s), &r) in pairs.iter().zip(&res) {
        csv.row(vec![num(t), num(s), num(r)]);
    }
    let max = res.iter().copied().fold(0.0, f64::max);
    let mut violations = Vec::new();
    if max > cfg.tolerance {
        violations.push(format!("dalembert: max residual {max:e} exceeds {:e}", cfg.tolerance));
    }
    let mut bundle = Bundle::default();
    bundle.add("dalembert.csv", csv.finish());
    bundle.add_json(
        "dalembert.json",
        &json!({ "config": cfg, "max_residual": max, "tolerance": cfg.tolerance, "pass": violations.is_empty() }),
    )?;
    Ok(Outcome { bundle, violations })
}

// ---------------------------------------------------------------------------
// resolvent

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResolventConfig {
    pub seed: u64,
    pub generator: String,
    pub taylor_terms: Option<usize>,
    pub scaling_threshold: Option<f64>,
    /// `[re, im]` pairs.
    pub lambdas: Vec<[f64; 2]>,
    pub s_values: Vec<f64>,
    pub quadrature: Option<QuadratureRule>,
    pub identity_tolerance: f64,
    pub s_identity_tolerance: f64,
    pub direct_tolerance: f64,
    pub bound_slack: f64,
}

impl Default for ResolventConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            generator: "bundled:scalar_minus_one".into(),
            taylor_terms: None,
            scaling_threshold: None,
            lambdas: vec![[1.0, 0.0], [2.0, 0.0], [1.0, 1.0], [2.0, -1.0]],
            s_values: vec![0.25, 0.5, 1.0],
            quadrature: None,
            identity_tolerance: 1e-6,
            s_identity_tolerance: 1e-7,
            direct_tolerance: 1e-6,
            bound_slack: 1e-8,
        }
    }
}

impl Validate for ResolventConfig {
    fn validate(&self) -> CliResult<()> {
        check_series(self.taylor_terms, self.scaling_threshold)?;
        check_points("lambdas", &self.lambdas)?;
        require(self.lambdas.iter().all(|l| l[0] != 0.0 || l[1] != 0.0), "lambdas must be non-zero")?;
        require(!self.s_values.is_empty(), "s_values must be non-empty")?;
        require(self.s_values.iter().all(|s| s.is_finite()), "s_values must be finite")?;
        if let Some(q) = &self.quadrature {
            QuadratureRule::new(q.panels, q.nodes_per_panel)?;
        }
        Ok(())
    }
}

pub fn resolvent_sweep(cfg: &ResolventConfig) -> CliResult<Outcome> {
    let loaded = load_family(&cfg.generator, cfg.taylor_terms, cfg.scaling_threshold)?;
    let fam = cosine(&loaded);
    let a = loaded.generator.matrix();
    let q = cfg.quadrature.as_ref();
    let mut csv = Csv::new(&[
        "re_lambda",
        "im_lambda",
        "s",
        "status",
        "s_identity_residual",
        "commutator_cosine",
        "commutator_generator",
        "s_norm",
        "s_norm_bound",
        "identity_residual",
        "bound_slack",
        "direct_gap",
        "pass",
    ]);
    let mut reports = Vec::new();
    let mut violations = Vec::new();
    for &lp in &cfg.lambdas {
        let l = cplx(lp);
        for &s in &cfg.s_values {
            let ir = resolvent_identity_residual(&fam, l, s, q)?;
            let nb = if l.re > 0.0 { Some(s_norm_bound_check(&fam, l, s, q)?) } else { None };
            let mut ok = ir.identity <= cfg.s_identity_tolerance;
            if let Some(b) = nb {
                ok &= b.lhs <= b.rhs + cfg.bound_slack;
            }
            let (status, tail) = match resolvent_via_s(&fam, l, s, q) {
                Ok(rep) => {
                    let gap = rep.direct_solve_gap(a)?;
                    ok &= rep.identity_residual <= cfg.identity_tolerance
                        && rep.bound_slack >= -cfg.bound_slack
                        && gap <= cfg.direct_tolerance;
                    let tail = vec![num(rep.identity_residual), num(rep.bound_slack), num(gap)];
                    reports.push(rep);
                    ("ok", tail)
                }
                // cosh(λs) in the spectrum of C(s): this s cannot represent the resolvent.
                Err(Error::NotInResolventSet { .. }) => ("not-in-resolvent-set", vec![String::new(); 3]),
                Err(e) => return Err(e.into()),
            };
            if !ok {
                violations.push(format!("resolvent: contract failed at λ = {l}, s = {s}"));
            }
            let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
            let mut row = vec![
                num(l.re),
                num(l.im),
                num(s),
                status.to_owned(),
                num(ir.identity),
                num(ir.commutator_cosine),
                num(ir.commutator_generator),
                opt(nb.map(|b| b.lhs)),
                opt(nb.map(|b| b.rhs)),
            ];
            row.extend(tail);
            row.push(ok.to_string());
            csv.row(row);
        }
    }
    let mut bundle = Bundle::default();
    bundle.add("resolvent.csv", csv.finish());
    bundle.add_json("resolvent.json", &json!({ "config": cfg, "reports": reports }))?;
    Ok(Outcome { bundle, violations })
}

// ---------------------------------------------------------------------------
// region

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionConfig {
    pub seed: u64,
    pub generator: String,
    pub taylor_terms: Option<usize>,
    pub scaling_threshold: Option<f64>,
    pub c: f64,
    pub t0: f64,
    pub samples: usize,
    /// Circle radii for the boundedness diagnostic; empty to skip it.
    pub radii: Vec<f64>,
}

impl Default for RegionConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            generator: "bundled:scalar_minus_one".into(),
            taylor_terms: None,
            scaling_threshold: None,
            c: 0.5,
            t0: std::f64::consts::FRAC_PI_6,
            samples: 25,
            radii: Vec::new(),
        }
    }
}

impl Validate for RegionConfig {
    fn validate(&self) -> CliResult<()> {
        check_series(self.taylor_terms, self.scaling_threshold)?;
        require(self.c > 0.0 && self.c < 2.0, "c must lie in (0, 2)")?;
        require(self.t0 > 0.0 && self.t0.is_finite(), "t0 must be positive")?;
        require(self.samples >= 1, "samples must be at least 1")?;
        require(self.radii.iter().all(|r| *r > 0.0 && r.is_finite()), "radii must be positive")
    }
}

pub fn region(cfg: &RegionConfig) -> CliResult<Outcome> {
    let fam = cosine(&load_family(&cfg.generator, cfg.taylor_terms, cfg.scaling_threshold)?);
    let params = region_params(cfg.c, cfg.t0)?;
    let cert = certify_r_tilde(params.c, params.r_tilde)?;
    let sample = sample_region(&params, cfg.samples, cfg.seed);
    let report = verify_region_bound(&fam, &params, &sample)?;
    let bounded = if cfg.radii.is_empty() {
        None
    } else {
        Some(boundedness_diagnostic(&fam, &cfg.radii)?)
    };

    let mut violations = Vec::new();
    if !params.is_valid() {
        violations.push("region: parameters violate a strict inequality".to_owned());
    }
    if !cert.passes() {
        violations.push("region: r̃ boundary certificate failed".to_owned());
    }
    for p in report.points.iter().filter(|p| !p.pass) {
        violations.push(format!("region: bound failed at μ = {}", p.mu));
    }
    if let Some(b) = &bounded {
        if !b.all_pass() {
            violations.push("region: boundedness diagnostic exceeded the Neumann bound".to_owned());
        }
    }

    let mut csv = Csv::new(&["re_mu", "im_mu", "s_lambda", "resolvent_norm", "bound", "pass"]);
    for p in &report.points {
        csv.row(vec![
            num(p.mu.re),
            num(p.mu.im),
            num(p.s_lambda),
            num(p.resolvent_norm),
            num(p.bound),
            p.pass.to_string(),
        ]);
    }
    let mut bundle = Bundle::default();
    bundle.add("region.csv", csv.finish());
    bundle.add_json(
        "region_params.json",
        &json!({ "config": cfg, "params": params, "certificate": cert, "hypothesis_sup": report.hypothesis_sup }),
    )?;
    bundle.add_json(
        "region_report.json",
        &json!({ "config": cfg, "report": report, "boundedness": bounded }),
    )?;
    Ok(Outcome { bundle, violations })
}

// ---------------------------------------------------------------------------
// semigroup-laws

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SemigroupLawsConfig {
    pub seed: u64,
    pub generator: String,
    pub taylor_terms: Option<usize>,
    pub scaling_threshold: Option<f64>,
    pub lambdas: Vec<[f64; 2]>,
    pub cesaro_t: Vec<f64>,
    /// Horizon for `r = sup ||T(s) - I||`.
    pub horizon: f64,
    pub sup_points: usize,
    pub growth_horizon: f64,
    pub growth_samples: usize,
    pub laplace_tolerance: f64,
    pub slack: f64,
}

impl Default for SemigroupLawsConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            generator: "bundled:scalar_minus_tenth".into(),
            taylor_terms: None,
            scaling_threshold: None,
            lambdas: vec![[1.0, 0.0], [10.0, 0.0], [100.0, 0.0]],
            cesaro_t: vec![0.5, 1.0, 2.0],
            horizon: 50.0,
            sup_points: 2001,
            growth_horizon: 10.0,
            growth_samples: 201,
            laplace_tolerance: 1e-6,
            slack: 1e-8,
        }
    }
}

impl Validate for SemigroupLawsConfig {
    fn validate(&self) -> CliResult<()> {
        check_series(self.taylor_terms, self.scaling_threshold)?;
        check_points("lambdas", &self.lambdas)?;
        require(self.cesaro_t.iter().all(|t| *t > 0.0 && t.is_finite()), "cesaro_t must be positive")?;
        require(self.horizon > 0.0 && self.horizon.is_finite(), "horizon must be positive")?;
        require(self.sup_points >= 2, "sup_points must be at least 2")?;
        require(self.growth_horizon > 0.0, "growth_horizon must be positive")?;
        require(self.growth_samples >= 4, "growth_samples must be at least 4")
    }
}

pub fn semigroup_laws(cfg: &SemigroupLawsConfig) -> CliResult<Outcome> {
    let loaded = load_family(&cfg.generator, cfg.taylor_terms, cfg.scaling_threshold)?;
    let sg = semigroup(&loaded);
    let a = loaded.generator.matrix();
    let growth = growth_bound_estimate(&sg, cfg.growth_horizon, cfg.growth_samples)?;
    for &lp in &cfg.lambdas {
        require(
            lp[0] > growth.omega,
            format!("Re λ = {} must exceed the fitted growth rate {}", lp[0], growth.omega),
        )?;
    }
    let r = semigroup_distance_sup(&sg, cfg.horizon, cfg.sup_points)?;
    let mut violations = Vec::new();

    let mut lap_csv = Csv::new(&[
        "re_lambda",
        "im_lambda",
        "distance",
        "distance_bound",
        "laplace_gap",
        "laplace_horizon",
        "tail_bound",
        "pass",
    ]);
    let mut lap_rows = Vec::new();
    for &lp in &cfg.lambdas {
        let l = cplx(lp);
        let direct = resolvent(a, l)?;
        // ||λR(λ,A) - I|| <= r |λ| / Re λ, which is r for real λ.
        let distance = op_norm(&direct.scale_complex(l).shift(Complex::new(-1.0, 0.0)))?;
        let distance_bound = r * l.norm() / l.re;
        let lr = laplace_resolvent(&sg, l, &growth, None)?;
        let gap = op_norm(&(&lr.value - &direct))? / op_norm(&direct)?;
        let ok = distance <= distance_bound + cfg.slack && gap <= cfg.laplace_tolerance;
        if !ok {
            violations.push(format!("semigroup-laws: frequency-domain check failed at λ = {l}"));
        }
        lap_csv.row(vec![
            num(l.re),
            num(l.im),
            num(distance),
            num(distance_bound),
            num(gap),
            num(lr.horizon),
            num(lr.tail_bound),
            ok.to_string(),
        ]);
        lap_rows.push(json!({
            "lambda": l,
            "distance": distance,
            "distance_bound": distance_bound,
            "laplace_gap": gap,
            "laplace_horizon": lr.horizon,
            "tail_bound": lr.tail_bound,
            "pass": ok,
        }));
    }

    let mut ces_csv = Csv::new(&["t", "identity_residual", "inv_norm", "r", "bound", "bound_applies", "pass"]);
    let mut ces_rows = Vec::new();
    for &t in &cfg.cesaro_t {
        let ch = cesaro_check(&sg, t, cfg.horizon, None)?;
        let ok = ch.identity_residual <= cfg.slack && ch.bound_holds(cfg.slack) != Some(false);
        if !ok {
            violations.push(format!("semigroup-laws: Cesàro check failed at t = {t}"));
        }
        let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
        ces_csv.row(vec![
            num(t),
            num(ch.identity_residual),
            opt(ch.inv_norm),
            num(ch.r),
            opt(ch.bound),
            ch.bound.is_some().to_string(),
            ok.to_string(),
        ]);
        ces_rows.push(json!({
            "t": t,
            "identity_residual": ch.identity_residual,
            "inv_norm": ch.inv_norm,
            "r": ch.r,
            "bound": ch.bound,
            "pass": ok,
        }));
    }

    let mut bundle = Bundle::default();
    bundle.add("laplace.csv", lap_csv.finish());
    bundle.add("cesaro.csv", ces_csv.finish());
    bundle.add_json(
        "semigroup_laws.json",
        &json!({
            "config": cfg,
            "growth": growth,
            "r": r,
            "r_measurement": "grid maximum, a lower bound of the supremum",
            "laplace": lap_rows,
            "cesaro": ces_rows,
        }),
    )?;
    Ok(Outcome { bundle, violations })
}

// ---------------------------------------------------------------------------
// reproduce

pub fn reproduce(cfg: &ReproduceConfig) -> CliResult<Outcome> {
    let mut bundle = Bundle::default();
    let mut violations = Vec::new();
    let mut csv = Csv::new(&["criterion", "name", "measured", "threshold", "pass"]);
    for run in criteria::ALL {
        let c = run(cfg)?;
        if !c.pass {
            violations.push(format!("criterion {} ({}) failed: measured {:e}", c.id, c.name, c.measured));
        }
        csv.row(vec![
            c.id.to_string(),
            c.name.to_owned(),
            num(c.measured),
            num(c.threshold),
            c.pass.to_string(),
        ]);
        bundle.add_json(format!("criterion_{:02}_{}.json", c.id, c.name), &json!({ "config": cfg, "criterion": c }))?;
    }
    bundle.add("criteria.csv", csv.finish());
    Ok(Outcome { bundle, violations })
}
