//! Invariant suites behind `qheat validate`.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::Result;

use qheat::analytic::{self, AnalyticModel};
use qheat::evolution::{self, relative_deviation, IntegrationConfig, RunSettings};
use qheat::flywheel::{self, FlywheelParams};
use qheat::models::{self, EngineParams, LoadWindow, ModelKind};
use qheat::parallel::Execution;
use qheat::sweep::{self, Spacing, SweepAxis};

use crate::config::RunConfig;
use crate::csv::{num, CsvWriter};
use crate::{Level, ValidationFailure};

const ENGINE_KINDS: [ModelKind; 3] = [ModelKind::TwoQubitReset, ModelKind::TwoQubitLocal, ModelKind::ThreeQubitEffective];

struct Check {
    name: String,
    pass: bool,
    value: f64,
    tolerance: f64,
    detail: String,
}

#[derive(Default)]
struct Suite(Vec<Check>);

impl Suite {
    fn record(&mut self, name: impl Into<String>, pass: bool, value: f64, tolerance: f64, detail: impl Into<String>) {
        let c = Check { name: name.into(), pass, value, tolerance, detail: detail.into() };
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        self.0.push(c);
    }

    fn within(&mut self, name: impl Into<String>, value: f64, tolerance: f64, detail: impl Into<String>) {
        self.record(name, value <= tolerance, value, tolerance, detail);
    }

    fn error(&mut self, name: impl Into<String>, err: impl std::fmt::Display) {
        self.record(name, false, f64::NAN, f64::NAN, err.to_string());
    }
}

fn engine_runs(suite: &mut Suite, params: &EngineParams, window: LoadWindow, settings: &RunSettings) {
    for kind in ENGINE_KINDS {
        let label = format!("{kind}");
        let bundle = match models::build(kind, params, window) {
            Ok(b) => b,
            Err(e) => return suite.error(format!("{label} construction"), e),
        };
        let oracle = match analytic::ness(kind, params) {
            Ok(a) => a,
            Err(e) => return suite.error(format!("{label} closed form"), e),
        };
        let sim = match evolution::simulate(&bundle, settings) {
            Ok(s) => s,
            Err(e) => return suite.error(format!("{label} simulation"), e),
        };
        let dev = [
            relative_deviation(sim.w_dot, oracle.w_dot),
            relative_deviation(sim.delta_w_dot, oracle.delta_w_dot),
            relative_deviation(sim.sigma_dot, oracle.sigma_dot),
            relative_deviation(sim.tur_ratio, oracle.tur_ratio),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        suite.within(format!("{label} oracle agreement"), dev, 5e-3, format!("max relative deviation {dev:.2e}"));
        let first = sim.first_law_defect() / sim.w_dot.abs();
        suite.within(format!("{label} first law"), first, 1e-3, format!("|W - Q1 - Q2| / |W| = {first:.2e}"));
        let eta = (sim.eta - params.otto_efficiency()).abs();
        suite.within(format!("{label} efficiency"), eta, 1e-3, format!("eta = {:.6}", sim.eta));
        suite.record(
            format!("{label} second law"),
            sim.sigma_dot >= 0.0 && sim.eta <= params.carnot_efficiency(),
            sim.sigma_dot,
            0.0,
            format!("sigma dot = {:.3e}, eta_C = {:.4}", sim.sigma_dot, params.carnot_efficiency()),
        );
        let bound = AnalyticModel::for_kind(kind).published_bound();
        suite.record(
            format!("{label} TUR bound"),
            oracle.tur_ratio >= bound - 1e-9,
            oracle.tur_ratio,
            bound,
            format!("closed-form ratio {:.6} vs bound {bound}", oracle.tur_ratio),
        );
        suite.within(format!("{label} trace"), sim.max_trace_drift, 1e-9, format!("drift {:.1e}", sim.max_trace_drift));
        let r2 = sim.fit_r2_mean.min(sim.fit_r2_var);
        suite.record(format!("{label} fit"), r2 >= 0.999, r2, 0.999, format!("r2 {r2:.6}"));
    }
}

fn bound_constants(suite: &mut Suite) {
    for (model, tol) in [(AnalyticModel::Reset, 1e-6), (AnalyticModel::Local, 1e-3), (AnalyticModel::ThreeQubit, 1e-3)] {
        let m = analytic::minimise_bound_curve(model);
        let dev = (m.value - model.published_bound()).abs();
        suite.within(format!("{model} bound constant"), dev, tol, format!("minimum {:.6} at chi = {:.4}", m.value, m.argmin));
    }
}

fn flywheel_checks(suite: &mut Suite, seed: u64, exec: Execution, cycles: u64, trials: u64, map_cycles: usize) {
    let p = match FlywheelParams::from_chi_p0(2.0, 0.6, 0.1, cycles) {
        Ok(p) => p,
        Err(e) => return suite.error("flywheel parameters", e),
    };
    let (coh, fock, ct) = (flywheel::tur_ratio_flywheel(&p), flywheel::tur_ratio_fock(&p), flywheel::tur_ratio_ct(2.0));
    let dev = (coh - 6.050385715).abs().max((fock - 2.016795238).abs()).max((ct - 2.626070571).abs());
    suite.within("flywheel TUR ratios", dev, 1e-6, format!("{coh:.7} / {fock:.7} / {ct:.7}"));
    suite.record("flywheel Fock below CT", fock <= ct && (coh - 3.0 * fock).abs() < 1e-12, fock, ct, "coherent = 3 Fock <= 3 CT");

    let t = Instant::now();
    match flywheel::monte_carlo_walk(&p, trials, seed, &[cycles], exec) {
        Ok(mc) => {
            let exact = flywheel::moments(&flywheel::step_distribution(&p), cycles);
            let z = mc.checkpoints[0].z_scores(&exact).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            suite.within(
                "flywheel Monte Carlo",
                z,
                4.0,
                format!("N = {cycles}, {trials} trials, max |z| {z:.2} ({:.1}s)", t.elapsed().as_secs_f64()),
            );
            let again = flywheel::monte_carlo_walk(&p, trials.min(10_000), seed, &[cycles], Execution::Sequential);
            let once = flywheel::monte_carlo_walk(&p, trials.min(10_000), seed, &[cycles], exec);
            let same = matches!((&again, &once), (Ok(a), Ok(b)) if a == b);
            suite.record("flywheel determinism", same, 0.0, 0.0, "fixed seed reproduces bitwise");
        }
        Err(e) => suite.error("flywheel Monte Carlo", e),
    }
    match flywheel::quantum_map_check(&p, map_cycles, flywheel::suggested_fock_cutoff(p.d, map_cycles)) {
        Ok(r) => {
            let dev = r.rel_dev_n.max(r.rel_dev_n2);
            suite.within("flywheel quantum map", dev, 1e-6, format!("{map_cycles} cycles, relative deviation {dev:.1e}"));
        }
        Err(e) => suite.error("flywheel quantum map", e),
    }
}

fn full_extras(suite: &mut Suite, params: &EngineParams, window: LoadWindow, settings: &RunSettings, exec: Execution) {
    let axis = SweepAxis::new("g_over_p", 0.05, 5.0, 20, Spacing::Log).expect("static axis");
    for kind in ENGINE_KINDS {
        match sweep::run_sweep(kind, params, &axis, window, settings, exec) {
            Ok(points) => {
                let mut worst = 0.0f64;
                let mut err = None;
                for p in points {
                    match p {
                        Ok(p) => worst = worst.max(p.max_deviation()),
                        Err(e) => err = err.or(Some(e)),
                    }
                }
                match err {
                    Some(e) => suite.error(format!("{kind} g/p sweep"), e),
                    None => suite.within(format!("{kind} g/p sweep"), worst, 5e-3, format!("20 points, worst deviation {worst:.2e}")),
                }
            }
            Err(e) => suite.error(format!("{kind} g/p sweep"), e),
        }

        let halving = (|| -> qheat::Result<f64> {
            let bundle = models::build(kind, params, window)?;
            let cfg = IntegrationConfig::for_bundle(&bundle, settings);
            let init = bundle.default_initial_state()?;
            let a = evolution::extract_ness(&evolution::integrate(&bundle, &init, &cfg)?, &cfg)?;
            let fine = cfg.halved();
            let b = evolution::extract_ness(&evolution::integrate(&bundle, &init, &fine)?, &fine)?;
            Ok(relative_deviation(a.w_dot, b.w_dot).max(relative_deviation(a.delta_w_dot, b.delta_w_dot)))
        })();
        match halving {
            Ok(d) => suite.within(format!("{kind} dt halving"), d, 1e-3, format!("rate change {d:.1e}")),
            Err(e) => suite.error(format!("{kind} dt halving"), e),
        }
    }

    let mut devs = Vec::new();
    for ratio in [50.0, 100.0] {
        let c = 10.0 / ratio;
        let full = EngineParams { k: c, g: c, p_prime: 10.0, ..*params };
        match evolution::validate_effective_3qe(&full, window, settings) {
            Ok(cmp) => devs.push(cmp.dev_w_dot),
            Err(e) => return suite.error(format!("3qe-full p'/{ratio}"), e),
        }
    }
    suite.record(
        "3qe-full adiabatic elimination",
        devs[0] <= 0.05 && devs[1] < devs[0],
        devs[0],
        0.05,
        format!("W dot deviation {:.2e} at p'/50, {:.2e} at p'/100", devs[0], devs[1]),
    );
}

pub fn cmd_validate(cfg: &RunConfig, level: Level, exec: Execution) -> Result<()> {
    let start = Instant::now();
    let mut suite = Suite::default();
    match cfg.engine.validate() {
        Ok(()) => {
            suite.record("engine parameters", true, 0.0, 0.0, "rates well defined");
            engine_runs(&mut suite, &cfg.engine, cfg.window, &cfg.settings);
        }
        Err(e) => suite.error("engine parameters", e),
    }
    bound_constants(&mut suite);
    match level {
        Level::Quick => flywheel_checks(&mut suite, cfg.seed, exec, 200, 10_000, 10),
        Level::Full => {
            flywheel_checks(&mut suite, cfg.seed, exec, 1000, 100_000, 20);
            if cfg.engine.validate().is_ok() {
                full_extras(&mut suite, &cfg.engine, cfg.window, &cfg.settings, exec);
            }
        }
    }

    let path = cfg.out.clone().unwrap_or_else(|| PathBuf::from("validation_summary.csv"));
    let mut w = CsvWriter::create(&path, &["check", "status", "value", "tolerance", "detail"])?;
    for c in &suite.0 {
        w.text_row(&[
            c.name.clone(),
            if c.pass { "PASS" } else { "FAIL" }.to_string(),
            num(c.value),
            num(c.tolerance),
            c.detail.clone(),
        ])?;
    }
    w.finish()?;
    let failed = suite.0.iter().filter(|c| !c.pass).count();
    println!(
        "{} of {} checks passed in {:.1}s; summary in {}",
        suite.0.len() - failed,
        suite.0.len(),
        start.elapsed().as_secs_f64(),
        path.display()
    );
    match suite.0.iter().find(|c| !c.pass) {
        Some(c) => Err(ValidationFailure(format!("{}: {}", c.name, c.detail)).into()),
        None => Ok(()),
    }
}
