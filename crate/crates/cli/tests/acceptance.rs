//! Acceptance gate: all thirteen criteria, one line each.
//!
//! Runs without the libtest harness so the lines are always printed.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use serde_json::Value;
use zerotwo::sample::generator_set;
use zerotwo::{cesaro_check, op_norm, resolvent_via_s, Complex, ComplexMatrix, CosineFamily, Semigroup};
use zerotwo_cli::criteria::{self, Criterion, ReproduceConfig};

struct Gate {
    failures: Vec<String>,
}

impl Gate {
    fn report(&mut self, id: u32, label: &str, ok: bool, note: String) {
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {id:>2} {label}: {note}");
        if !ok {
            self.failures.push(format!("criterion {id} ({label}): {note}"));
        }
    }
}

fn timed(f: criteria::CriterionFn, cfg: &ReproduceConfig) -> (Criterion, Duration) {
    let start = Instant::now();
    let c = f(cfg).unwrap_or_else(|e| panic!("criterion errored: {e}"));
    (c, start.elapsed())
}

fn f(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

/// Independent inverse through nalgebra.
fn nalgebra_resolvent(a: &ComplexMatrix<f64>, mu: Complex<f64>) -> DMatrix<Complex<f64>> {
    let n = a.dim();
    let m = DMatrix::from_fn(n, n, |i, j| if i == j { mu - a[(i, j)] } else { -a[(i, j)] });
    m.try_inverse().expect("invertible")
}

fn oracle_checks_3(cfg: &ReproduceConfig) -> Result<(), String> {
    let gens = generator_set(cfg.seed, 3, cfg.dim, cfg.max_norm);
    for a in gens {
        let fam = CosineFamily::new(a.clone()).unwrap();
        for l in [Complex::new(1.0, 1.0), Complex::new(2.0, -1.0)] {
            let rep = resolvent_via_s(&fam, l, 0.5, None).unwrap();
            let inv = nalgebra_resolvent(&a, l * l);
            let n = a.dim();
            let mut worst = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    worst = worst.max((rep.resolvent[(i, j)] - inv[(i, j)]).norm());
                }
            }
            if worst > 1e-6 * inv.norm() {
                return Err(format!("nalgebra oracle gap {worst:e}"));
            }
        }
    }
    Ok(())
}

fn oracle_checks_10() -> Result<(), String> {
    let sg = Semigroup::new(ComplexMatrix::from_real_diag(&[-0.1]).unwrap()).unwrap();
    let nil = Semigroup::new(ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap()).unwrap();
    for t in [0.5f64, 1.0, 2.0] {
        let b = cesaro_check(&sg, t, 50.0, None).unwrap().b_t[(0, 0)].re;
        let closed = (1.0 - (-0.1 * t).exp()) / 0.1;
        if (b - closed).abs() > 1e-12 {
            return Err(format!("scalar B_{t} = {b} vs {closed}"));
        }
        let bn = cesaro_check(&nil, t, 50.0, None).unwrap().b_t;
        let expect = ComplexMatrix::from_real_rows(&[&[t, t * t / 2.0], &[0.0, t]]).unwrap();
        if op_norm(&(&bn - &expect)).unwrap() > 1e-12 {
            return Err(format!("nilpotent B_{t} mismatch"));
        }
    }
    Ok(())
}

fn reproduce_twice() -> Result<usize, String> {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    for d in [a.path(), b.path()] {
        let o = Command::new(env!("CARGO_BIN_EXE_zerotwo"))
            .args(["reproduce", "--seed", "42", "--out", d.to_str().unwrap()])
            .output()
            .map_err(|e| e.to_string())?;
        if o.status.code() != Some(0) {
            return Err(format!("reproduce exited with {:?}", o.status.code()));
        }
    }
    compare_dirs(a.path(), b.path())
}

fn compare_dirs(a: &Path, b: &Path) -> Result<usize, String> {
    let list = |d: &Path| -> Vec<String> {
        let mut v: Vec<String> = std::fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        v.sort();
        v
    };
    let (la, lb) = (list(a), list(b));
    if la != lb {
        return Err(format!("file lists differ: {la:?} vs {lb:?}"));
    }
    for name in &la {
        if std::fs::read(a.join(name)).unwrap() != std::fs::read(b.join(name)).unwrap() {
            return Err(format!("{name} differs"));
        }
    }
    let scalar = std::fs::read_to_string(a.join("criterion_07_scalar-constant.json")).unwrap();
    let v: Value = serde_json::from_str(&scalar).unwrap();
    if (f(&v["criterion"]["details"]["measured"]) - 1.539_600_7).abs() > 1e-6 {
        return Err("reproduced scalar constant is off".into());
    }
    Ok(la.len())
}

fn main() {
    let cfg = ReproduceConfig::default();
    let mut gate = Gate { failures: Vec::new() };
    let limits: [(u32, Option<u64>); 12] = [
        (1, Some(10)),
        (2, Some(30)),
        (3, None),
        (4, None),
        (5, None),
        (6, None),
        (7, None),
        (8, None),
        (9, None),
        (10, None),
        (11, None),
        (12, Some(20)),
    ];

    for (run, (id, limit)) in criteria::ALL.into_iter().zip(limits) {
        let (c, dt) = timed(run, &cfg);
        assert_eq!(c.id, id);
        let mut ok = c.pass;
        let mut note = format!(
            "measured {:.6e} vs threshold {:.6e} ({:.2}s)",
            c.measured,
            c.threshold,
            dt.as_secs_f64()
        );
        if let Some(s) = limit {
            if dt > Duration::from_secs(s) {
                ok = false;
                note.push_str(&format!(", over the {s}s budget"));
            }
        }
        let d = &c.details;
        let extra: Result<(), String> = match id {
            3 => oracle_checks_3(&cfg),
            6 => {
                let expect = 1.0 - 0.8f64.cos();
                if (f(&d["sup_n8"]) - expect).abs() <= 1e-9 && f(&d["sup_n32"]) >= 2.0 - 1e-6 {
                    Ok(())
                } else {
                    Err("diagonal sups off".into())
                }
            }
            7 => {
                let closed = 8.0 / (3.0 * 3f64.sqrt());
                if f(&d["analytic"]) == closed && (f(&d["measured"]) - 1.539_600_7).abs() <= 1e-6 {
                    Ok(())
                } else {
                    Err("scalar constant off".into())
                }
            }
            9 => {
                let r = 1.0 - (-5f64).exp();
                let rows = d["rows"].as_array().unwrap();
                let bad = rows.iter().any(|row| {
                    let lam = f(&row["lambda"]);
                    (f(&row["distance"]) - 0.1 / (lam + 0.1)).abs() > 1e-12 || (f(&row["r"]) - r).abs() > 1e-12
                });
                if bad {
                    Err("scalar resolvent distances off".into())
                } else {
                    Ok(())
                }
            }
            10 => oracle_checks_10(),
            11 => {
                let blocks = d["blocks"].as_array().unwrap();
                // For n >= 2 the recovered block is n²A, far from nA.
                let bad = blocks
                    .iter()
                    .filter(|b| b["n"].as_u64().unwrap() >= 2)
                    .any(|b| f(&b["error_h_half"]) >= f(&b["distance_to_n_times_a"]));
                if bad {
                    Err("block generator closer to nA than n²A".into())
                } else {
                    Ok(())
                }
            }
            12 => {
                let closed = (1.0f64 + 0.75).acosh();
                if (f(&d["params"]["r_tilde"]) - closed).abs() <= 2e-6
                    && d["points_passed"] == d["points"]
                    && d["points"].as_u64() == Some(cfg.region_samples as u64)
                {
                    Ok(())
                } else {
                    Err("region details off".into())
                }
            }
            _ => Ok(()),
        };
        if let Err(e) = extra {
            ok = false;
            note.push_str(&format!(", oracle: {e}"));
        }
        gate.report(id, c.name, ok, note);
    }

    let start = Instant::now();
    match reproduce_twice() {
        Ok(n) => gate.report(
            13,
            "determinism",
            true,
            format!("{n} files byte-identical across two runs ({:.2}s)", start.elapsed().as_secs_f64()),
        ),
        Err(e) => gate.report(13, "determinism", false, e),
    }

    if gate.failures.is_empty() {
        println!("acceptance: 13/13 criteria passed");
    } else {
        println!("acceptance: {} criteria failed", gate.failures.len());
        for f in &gate.failures {
            println!("  {f}");
        }
        std::process::exit(1);
    }
}
