//! One line per acceptance criterion; exits non-zero if any fails.

mod common;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use common::{bisection_equilibrium, moment_by_quadrature};
use rdcheck::app::{load_config, run_experiment, Experiment, RunConfig};
use rdcheck::diagnostics::{forced_heat_probe, max_entropy_dissipation, ForcedHeatConfig, Verdict};
use rdcheck::models::{instantiate_model, ModelSpec, Sampler, SkewLvSpec};
use rdcheck::solver::{run_simulation, AcceptedStep};
use rdcheck::theory::{
    exponent_algebra, fit_rate, fit_rate_window, free_space_constants, gaussian_moment, quad_equilibrium,
    threshold_admissible, FitMode,
};
use rdcheck::transform::{augment_system, verify_augmented};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

/// A shipped configuration with its outputs redirected into `out`.
fn shipped(name: &str, out: &Path) -> RunConfig {
    let mut cfg = load_config(&configs_dir().join(name)).unwrap();
    let stem = Path::new(name)
        .file_stem()
        .unwrap()
        .to_string_lossy()
        .into_owned();
    cfg.output.csv = out.join(format!("{stem}.csv"));
    cfg.output.report = out.join(format!("{stem}.json"));
    cfg
}

fn check_verdict(exp: &Experiment, name: &str) -> Result<f64, String> {
    let c = exp
        .report
        .checks
        .iter()
        .find(|c| c.name == name)
        .ok_or_else(|| format!("no check named {name}"))?;
    ensure(c.verdict == Verdict::Pass, || {
        format!("{name} = {:?} ({:?})", c.measured, c.verdict)
    })?;
    Ok(c.measured)
}

fn c1_constants() -> Outcome {
    let sqrt2 = 2f64.sqrt();
    let pi = std::f64::consts::PI;
    for (n, b4, b5, b) in [(1, 2.0, 1.0, 2.0 * sqrt2), (2, pi, pi / 2.0, sqrt2 * pi)] {
        let c = free_space_constants(n, 1.0, 0.0).map_err(|e| e.to_string())?;
        for (name, got, want) in [("B4", c.b4, b4), ("B5", c.b5, b5), ("B", c.b, b)] {
            ensure((got - want).abs() <= 1e-10, || {
                format!("n={n} {name} = {got}, expected {want}")
            })?;
        }
    }
    let mut worst = 0.0_f64;
    for n in 1..=3 {
        for delta in [0.0, 0.5, 1.0, 2.0] {
            let exact = gaussian_moment(n, delta).map_err(|e| e.to_string())?;
            let quad = moment_by_quadrature(n, delta);
            worst = worst.max((exact - quad).abs() / quad);
        }
    }
    ensure(worst <= 1e-9, || format!("gaussian moment off by {worst:e}"))?;
    Ok(format!(
        "B values exact to 1e-10; moment vs quadrature {worst:.1e}"
    ))
}

fn c2_equilibrium() -> Outcome {
    let eq = quad_equilibrium([2.0, 2.0, 2.0]).map_err(|e| e.to_string())?;
    ensure(eq.u.iter().all(|u| (u - 1.0).abs() <= 1e-14), || {
        format!("M=(2,2,2) gave {:?}", eq.u)
    })?;
    let mut s = Sampler::seeded(77);
    let (mut n, mut worst) = (0, 0.0_f64);
    while n < 1000 {
        let m = [
            s.log_uniform(1e-2, 1e2),
            s.log_uniform(1e-2, 1e2),
            s.log_uniform(1e-2, 1e2),
        ];
        if m[0] + m[2] <= m[1] {
            continue;
        }
        let got = quad_equilibrium(m).map_err(|e| e.to_string())?.u;
        let oracle = bisection_equilibrium(m);
        let scale = m.iter().cloned().fold(0.0, f64::max);
        for i in 0..4 {
            worst = worst.max((got[i] - oracle[i]).abs() / scale);
        }
        n += 1;
    }
    ensure(worst <= 1e-12, || format!("bisection disagreement {worst:e}"))?;
    Ok(format!("1000 mass vectors, worst relative gap {worst:.1e}"))
}

fn c3_conservation(exp: &Experiment) -> Outcome {
    let snaps = &exp.trajectory.snapshots;
    let laws: [[f64; 4]; 3] = [[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0]];
    let mut drift = 0.0_f64;
    for w in laws {
        let c = |m: &[f64]| w.iter().zip(m).map(|(a, b)| a * b).sum::<f64>();
        let c0 = c(&snaps[0].masses);
        for s in snaps {
            drift = drift.max((c(&s.masses) - c0).abs() / c0);
        }
    }
    ensure(drift <= 1e-8, || format!("conservation drift {drift:e}"))?;
    let mut entropy = f64::NEG_INFINITY;
    for s in snaps {
        if let Some(e) = max_entropy_dissipation(&exp.system, &s.state).map_err(|e| e.to_string())? {
            entropy = entropy.max(e);
        }
    }
    ensure(entropy <= 1e-12, || format!("entropy dissipation {entropy:e}"))?;
    Ok(format!(
        "drift {drift:.1e}, max entropy dissipation {entropy:.1e} over {} states",
        snaps.len()
    ))
}

fn c4_equilibration(exp: &Experiment, length: f64) -> Outcome {
    let snaps = &exp.trajectory.snapshots;
    let m = &snaps[0].masses;
    let eq = quad_equilibrium([
        (m[0] + m[2]) / length,
        (m[1] + m[2]) / length,
        (m[1] + m[3]) / length,
    ])
    .map_err(|e| e.to_string())?;
    let series: Vec<(f64, f64)> = snaps
        .iter()
        .map(|s| {
            let d = (0..4)
                .flat_map(|i| {
                    s.state
                        .species(i)
                        .values()
                        .iter()
                        .map(move |v| (v - eq.u[i]).abs())
                })
                .fold(0.0, f64::max);
            (s.t, d)
        })
        .collect();
    let fit = fit_rate_window(&series, FitMode::Exponential, 0.5, 2.0).map_err(|e| e.to_string())?;
    ensure(fit.rate > 0.0 && fit.r_squared >= 0.98, || format!("{fit:?}"))?;
    Ok(format!("mu = {:.4}, R^2 = {:.4}", fit.rate, fit.r_squared))
}

fn c5_mass_decay() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = shipped("skew_lv.json", dir.path());
    let sys = cfg.model.build().map_err(|e| e.to_string())?;
    let grid = cfg.grid().map_err(|e| e.to_string())?;
    let init = cfg.initial_state(grid, 1.0).map_err(|e| e.to_string())?;
    let dt = cfg.solver.dt;
    let m0 = init.total_mass();
    let mut worst = 0.0_f64;
    let mut steps = 0i32;
    let mut hook = |s: &AcceptedStep<'_>| {
        steps += 1;
        let expected = (1.0 - dt).powi(steps) * m0;
        worst = worst.max((s.new.total_mass() - expected).abs() / expected);
        Ok(())
    };
    let solver = cfg.solver.solver_config();
    let traj = run_simulation(&sys, &init, &solver, &mut [&mut hook]).map_err(|e| e.to_string())?;
    ensure(traj.rejected_steps == 0, || {
        "step rejections break the identity".into()
    })?;
    ensure(worst <= 1e-9, || format!("mass identity off by {worst:e}"))?;
    let series: Vec<(f64, f64)> = traj
        .snapshots
        .iter()
        .map(|s| (s.t, s.masses.iter().sum()))
        .collect();
    let fit = fit_rate(&series, FitMode::Exponential).map_err(|e| e.to_string())?;
    let mu = fit.rate / (-(1.0 - dt).ln() / dt);
    ensure((0.99..=1.01).contains(&mu), || format!("corrected mu = {mu}"))?;
    Ok(format!(
        "{steps} steps, identity to {worst:.1e}; fitted {:.6}, corrected mu = {mu:.6}",
        fit.rate
    ))
}

fn c6_auxiliary(exp: &Experiment, cfg: &RunConfig) -> Outcome {
    ensure((cfg.aux_d() - 2.0 * exp.system.d_max()).abs() < 1e-15, || {
        format!("aux d = {}", cfg.aux_d())
    })?;
    let m: f64 = exp.trajectory.snapshots[0].state.sup_norms().iter().sum();
    let z = check_verdict(exp, "z_bound")?;
    ensure(z <= m + 1e-6, || format!("sup z = {z}, M = {m}"))?;
    let b_lo = check_verdict(exp, "b_lower")?;
    let b_hi = check_verdict(exp, "b_upper")?;
    let vd = check_verdict(exp, "vd_refinement_ratio")?;
    let zvd = check_verdict(exp, "zvd_refinement_ratio")?;
    ensure(vd >= 1.8 && zvd >= 1.8, || {
        format!("refinement ratios {vd}, {zvd}")
    })?;
    let u_min = check_verdict(exp, "u_hat_nonnegative")?;
    let u_excess = check_verdict(exp, "u_hat_below_d_z_hat")?;
    ensure(u_min >= 0.0 && u_excess <= 1e-9, || {
        format!("u_hat range {u_min}, {u_excess}")
    })?;
    Ok(format!(
        "sup z {z:.4} <= M {m:.4}; b in [{b_lo:.4}, {b_hi:.4}]; refinement ratios vd {vd:.3}, zvd {zvd:.3}"
    ))
}

fn c7_interpolation() -> Outcome {
    let mut pts = Vec::new();
    for f in [1.0, 2.0, 4.0] {
        let p = forced_heat_probe(&ForcedHeatConfig::centered(f, 1.0)).map_err(|e| e.to_string())?;
        ensure(p.grad_sup <= p.bound + 1e-6, || {
            format!("F={f}: grad {} > bound {}", p.grad_sup, p.bound)
        })?;
        pts.push((p.f_sup.ln(), p.grad_sup.ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    ensure(slope <= 1.05, || format!("log-log slope {slope}"))?;
    Ok(format!("bound holds for F in {{1,2,4}}; slope {slope:.4}"))
}

fn c8_exponents() -> Outcome {
    for i in 0..10 {
        for j in 0..10 {
            let (eps, delta) = (0.0937 * i as f64, 0.05 + 0.1 * j as f64);
            let e = exponent_algebra(eps, delta).map_err(|e| e.to_string())?;
            ensure(e.admissible == threshold_admissible(eps, delta), || {
                format!("eps={eps} delta={delta}")
            })?;
        }
    }
    let xi = exponent_algebra(0.0, 1.0).map_err(|e| e.to_string())?.xi;
    ensure(xi == Some(4.0), || format!("xi(0, 1) = {xi:?}"))?;
    Ok("100-point sweep consistent; xi(0, 1) = 4".into())
}

fn c9_transform() -> Outcome {
    let spec =
        SkewLvSpec::new(vec![vec![0.0, 1.0], vec![-1.0, 0.0]], vec![1.0, 1.0]).map_err(|e| e.to_string())?;
    let lv =
        instantiate_model(ModelSpec::SkewLotkaVolterra(spec), vec![0.05, 0.1]).map_err(|e| e.to_string())?;
    let v = verify_augmented(&augment_system(&lv), &mut Sampler::seeded(8), 10_000, 5.0)
        .map_err(|e| e.to_string())?;
    ensure(v.conservation.worst_residual <= 1e-10, || {
        format!("{:?}", v.conservation)
    })?;
    let q = instantiate_model(ModelSpec::QuadraticReversible, vec![0.1, 0.2, 0.3, 0.4])
        .map_err(|e| e.to_string())?;
    let aug = augment_system(&q);
    let mut s = Sampler::seeded(9);
    for _ in 0..10_000 {
        let w = s.point(5);
        let t = s.uniform(0.0, 5.0);
        let g = aug.augmented.eval_at(&w, t).map_err(|e| e.to_string())?;
        ensure(g[4] == 0.0, || format!("g_5({w:?}, {t}) = {}", g[4]))?;
    }
    Ok(format!(
        "skew-LV residual {:.1e}; quadratic g_5 == 0",
        v.conservation.worst_residual
    ))
}

fn cli(args: &[&str]) -> Result<i32, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_rdcheck"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    o.status.code().ok_or_else(|| "killed by signal".into())
}

fn write_cfg(cfg: &RunConfig, path: &Path) -> Result<String, String> {
    std::fs::write(path, serde_json::to_string(cfg).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    Ok(path.to_string_lossy().into_owned())
}

fn failed_checks(report: &Path) -> Result<Vec<String>, String> {
    let text = std::fs::read_to_string(report).map_err(|e| e.to_string())?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    Ok(v["checks"]
        .as_array()
        .into_iter()
        .flatten()
        .filter(|c| c["verdict"] == "fail")
        .filter_map(|c| c["name"].as_str().map(String::from))
        .collect())
}

fn c10_determinism_and_faults() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path();

    let mut base = shipped("quadratic_bump.json", out);
    base.diagnostics.refinement = false;
    let path = write_cfg(&base, &out.join("bump.config.json"))?;
    ensure(cli(&["run", &path])? == 0, || "bump run failed".into())?;
    let first = std::fs::read(&base.output.csv).map_err(|e| e.to_string())?;
    ensure(cli(&["run", &path])? == 0, || "bump rerun failed".into())?;
    let second = std::fs::read(&base.output.csv).map_err(|e| e.to_string())?;
    ensure(first == second, || "CSV differs between identical runs".into())?;

    let cases = [
        ("equilibrium.json", "faults/corrupted_z.json", "z_bound", false),
        (
            "skew_lv.json",
            "faults/broken_augmentation.json",
            "augmented_conservation",
            true,
        ),
        (
            "",
            "faults/broken_quasi_positivity.json",
            "quasi_positivity",
            false,
        ),
    ];
    let mut flipped = Vec::new();
    for (clean, faulty, check, augment) in cases {
        if !clean.is_empty() {
            let cfg = shipped(clean, out);
            let p = write_cfg(&cfg, &out.join(format!("clean_{clean}")))?;
            let args: Vec<&str> = if augment {
                vec!["verify", "--augment", &p]
            } else {
                vec!["verify", &p]
            };
            ensure(cli(&args)? == 0, || format!("{clean} should verify cleanly"))?;
        }
        let cfg = shipped(faulty, out);
        let p = write_cfg(&cfg, &out.join(format!("fault_{}", faulty.replace('/', "_"))))?;
        let code = cli(&["verify", &p])?;
        ensure(code == 1, || format!("{faulty} exited {code}"))?;
        let failed = failed_checks(&cfg.output.report)?;
        ensure(failed.iter().any(|f| f == check), || {
            format!("{faulty} failed {failed:?}, not {check}")
        })?;
        flipped.push(check);
    }
    Ok(format!(
        "byte-identical CSV ({} bytes); faults flip {}",
        first.len(),
        flipped.join(", ")
    ))
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let bump_cfg = shipped("quadratic_bump.json", dir.path());
    let t0 = Instant::now();
    let bump = run_experiment(&bump_cfg);
    let bump_secs = t0.elapsed().as_secs_f64();

    let from_bump = |f: &dyn Fn(&Experiment) -> Outcome| match &bump {
        Ok(exp) => f(exp),
        Err(e) => Err(format!("bump run failed: {e}")),
    };

    let criteria: Vec<Criterion> = vec![
        ("constants reproduction", Box::new(c1_constants)),
        ("equilibrium", Box::new(c2_equilibrium)),
        ("conservation", Box::new(|| from_bump(&c3_conservation))),
        (
            "exponential equilibration",
            Box::new(|| from_bump(&|e| c4_equilibration(e, bump_cfg.grid.length))),
        ),
        ("exact mass decay", Box::new(c5_mass_decay)),
        (
            "auxiliary identities",
            Box::new(|| from_bump(&|e| c6_auxiliary(e, &bump_cfg))),
        ),
        ("interpolation bound", Box::new(c7_interpolation)),
        ("exponent algebra", Box::new(c8_exponents)),
        ("transform audit", Box::new(c9_transform)),
        (
            "determinism and falsifiability",
            Box::new(c10_determinism_and_faults),
        ),
    ];

    println!("bump run with refinement pair: {bump_secs:.2} s");
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.2} s): {detail}", k + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.2} s): {detail}", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
