use std::path::Path;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use super::config::ExperimentConfig;
use crate::error::{LabError, Result};
use crate::harness::{
    check_energy_holder, check_exp_energy, check_exp_mass, check_mass_holder, check_subadditivity,
    estimate_m1_constant, exp_energy_log_ratio, l1_convergence_probe, planar_tuples, radial_tuples,
    stability_probe, InequalityReport, Range, SubadditivityMode, TOL_CLOSED_FORM,
};
use crate::planar::{random_density, PlanarDensity, PlanarPotential, RelaxationOptions};
use crate::radial::RadialMeasure;
use crate::report::{fmt_f64, to_json, SCHEMA};
use crate::solvers::{
    approximation_scheme, fixed_point_solve, k_scan, truncation_scheme, variational_solve,
    FixedPointConfig, Geometry, SolverStatus, SolverTrace, VariationalConfig,
};

/// Suites run by `inequality-suite --suite all`, in report order.
const SUITES: [&str; 8] = [
    "holder-p1",
    "holder-p2",
    "mass-holder",
    "subadditivity",
    "exp-energy",
    "exp-mass",
    "m1",
    "l1-family",
];

/// Diagonal tuples appended to the Hölder samples.
const DIAGONALS: usize = 5;
/// Perturbation scales of the stability probe.
const STABILITY_SCALES: [f64; 4] = [1.0, 0.5, 0.25, 0.125];
const STABILITY_EXPONENT_MIN: f64 = 0.9;
const CROSS_CHECK_TOL: f64 = 1e-3;

/// Result of one command, before it is written out.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    pub grid_hash: String,
    pub seed: u64,
    pub results: Value,
    /// `(file name, contents)`.
    pub csv: Vec<(String, String)>,
    /// Lines printed to stdout.
    pub summary: Vec<String>,
}

impl Outcome {
    fn new(config: &ExperimentConfig, grid_hash: String) -> Self {
        Self {
            passed: true,
            grid_hash,
            seed: config.seed,
            results: Value::Null,
            csv: Vec::new(),
            summary: Vec::new(),
        }
    }

    /// Writes `<command>.json` and the CSV files into `dir`.
    pub fn write(&self, dir: &Path, command: &str, config: &ExperimentConfig) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        #[derive(Serialize)]
        struct Report<'a> {
            schema: &'static str,
            command: &'a str,
            config: &'a ExperimentConfig,
            grid_hash: &'a str,
            seed: u64,
            passed: bool,
            results: &'a Value,
        }
        let report = Report {
            schema: SCHEMA,
            command,
            config,
            grid_hash: &self.grid_hash,
            seed: self.seed,
            passed: self.passed,
            results: &self.results,
        };
        std::fs::write(dir.join(format!("{command}.json")), to_json(&report)?)?;
        for (name, body) in &self.csv {
            std::fs::write(dir.join(name), body)?;
        }
        Ok(())
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn to_value<T: Serialize>(x: &T) -> Result<Value> {
    serde_json::to_value(x).map_err(|e| LabError::Io(e.to_string()))
}

fn grid_hash(config: &ExperimentConfig) -> Result<String> {
    Ok(match config.geometry {
        Geometry::Radial => config.grid.radial(config.n)?.hash_hex(),
        Geometry::PlanarDisk => config.grid.planar()?.mask_hash(),
    })
}

/// Runs the command named in `config.command`.
pub fn execute(config: &ExperimentConfig) -> Result<Outcome> {
    config.validate()?;
    match config.command.as_str() {
        "solve" => solve(config),
        "k-scan" => scan(config),
        "variational" => variational(config),
        "inequality-suite" => inequality_suite(config),
        "approx-demo" => approx_demo(config),
        "truncation-demo" => truncation_demo(config),
        "stability-probe" => stability(config),
        "cross-check" => cross_check(config),
        other => Err(LabError::InvalidArgument(format!(
            "unknown command {other:?}"
        ))),
    }
}

fn fixed_point_config(config: &ExperimentConfig, k: f64) -> FixedPointConfig {
    FixedPointConfig {
        eta: config.eta,
        tol: config.tol(),
        max_iter: config.max_iter,
        grid: config.grid.clone(),
        ..FixedPointConfig::new(config.n, k, config.geometry)
    }
}

fn variational_config(config: &ExperimentConfig) -> VariationalConfig {
    VariationalConfig {
        max_iter: config.max_iter,
        grid: config.grid.clone(),
        ..VariationalConfig::new(config.n, config.geometry)
    }
}

fn trace_line(label: &str, trace: &SolverTrace) -> String {
    format!(
        "{label}: status={} iterations={} residual={} mass={} energy={}",
        trace.status.as_str(),
        trace.iterations,
        fmt_f64(trace.summary.residual_sup),
        fmt_f64(trace.summary.mass),
        fmt_f64(trace.summary.energy)
    )
}

fn solve(config: &ExperimentConfig) -> Result<Outcome> {
    let (u, trace) = fixed_point_solve(&fixed_point_config(config, config.k))?;
    let mut out = Outcome::new(config, u.grid_hash());
    out.passed = trace.status == SolverStatus::Converged;
    out.results = json!({
        "k": config.k,
        "mass": trace.summary.mass,
        "trace": to_value(&trace)?,
    });
    out.csv.push(("solve-trace.csv".into(), trace.to_csv()));
    out.csv.push(("solve-solution.csv".into(), u.to_csv()));
    out.summary.push(trace_line("solve", &trace));
    Ok(out)
}

fn scan(config: &ExperimentConfig) -> Result<Outcome> {
    let table = k_scan(
        config.n,
        &config.k_list,
        &fixed_point_config(config, config.k),
    )?;
    let threshold = (2.0 * config.n as f64).powi(config.n as i32);
    let mut out = Outcome::new(config, grid_hash(config)?);
    // only the regime k < (2n)^n is asserted
    out.passed = table
        .rows
        .iter()
        .filter(|r| r.k < threshold)
        .all(|r| r.status == SolverStatus::Converged);
    let mut csv = String::from(
        "# k-scan: terminal status per k; sup_abs is sup|u|\nk,status,iterations,mass,energy,sup_abs\n",
    );
    for r in &table.rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_f64(r.k),
            r.status.as_str(),
            r.iterations,
            fmt_f64(r.mass),
            fmt_f64(r.energy),
            fmt_f64(r.sup_abs)
        ));
        out.summary.push(format!(
            "k={}: status={} iterations={} mass={}",
            r.k,
            r.status.as_str(),
            r.iterations,
            fmt_f64(r.mass)
        ));
    }
    out.summary
        .push(format!("sup|u| monotone in k: {}", table.sup_monotone));
    out.results = json!({ "threshold": threshold, "scan": to_value(&table)? });
    out.csv.push(("k-scan.csv".into(), csv));
    Ok(out)
}

fn variational(config: &ExperimentConfig) -> Result<Outcome> {
    let (u, trace) = variational_solve(&variational_config(config))?;
    let mut out = Outcome::new(config, u.grid_hash());
    out.passed = trace.status == SolverStatus::Converged;
    out.results = json!({ "trace": to_value(&trace)? });
    out.csv
        .push(("variational-trace.csv".into(), trace.to_csv()));
    out.csv
        .push(("variational-solution.csv".into(), u.to_csv()));
    out.summary.push(trace_line("variational", &trace));
    Ok(out)
}

fn cross_check(config: &ExperimentConfig) -> Result<Outcome> {
    let (fp, fp_trace) = fixed_point_solve(&fixed_point_config(config, 1.0))?;
    let (var, var_trace) = variational_solve(&variational_config(config))?;
    let sup_diff = fp.sup_distance(&var);
    let mut out = Outcome::new(config, fp.grid_hash());
    out.passed = fp_trace.status == SolverStatus::Converged
        && var_trace.status == SolverStatus::Converged
        && sup_diff <= CROSS_CHECK_TOL;
    out.results = json!({
        "sup_diff": sup_diff,
        "tol": CROSS_CHECK_TOL,
        "fixed_point": to_value(&fp_trace)?,
        "variational": to_value(&var_trace)?,
    });
    out.summary.push(trace_line("fixed point", &fp_trace));
    out.summary.push(trace_line("variational", &var_trace));
    out.summary.push(format!(
        "sup difference {} (tol {CROSS_CHECK_TOL:e}): {}",
        fmt_f64(sup_diff),
        verdict(out.passed)
    ));
    Ok(out)
}

fn inequality_line(r: &InequalityReport) -> String {
    let constant = r
        .empirical_constant
        .map(|c| format!(" constant={}", fmt_f64(c)))
        .unwrap_or_default();
    format!(
        "{}: samples={} worst_ratio={} violations={}{constant} {}",
        r.id,
        r.samples,
        fmt_f64(r.worst_ratio),
        r.violations,
        verdict(r.passed())
    )
}

fn planar_suite(config: &ExperimentConfig, out: &mut Outcome, suite: &str) -> Result<Value> {
    let grid = config.grid.planar()?;
    let opts = RelaxationOptions::default();
    let tol = TOL_CLOSED_FORM;
    let reports = match suite {
        "holder-p1" => {
            let set = planar_tuples(&grid, 2, config.samples, config.seed, &opts)?
                .with_diagonals(DIAGONALS);
            vec![check_energy_holder(&set, 1.0, tol)?]
        }
        "subadditivity" => {
            let set = planar_tuples(&grid, 2, config.samples, config.seed, &opts)?;
            vec![
                check_subadditivity(&set, SubadditivityMode::Mass, tol)?,
                check_subadditivity(&set, SubadditivityMode::Energy, tol)?,
            ]
        }
        other => {
            return Err(LabError::Unsupported(format!(
                "suite {other} needs the radial geometry"
            )));
        }
    };
    inequality_reports(out, &reports)
}

fn inequality_reports(out: &mut Outcome, reports: &[InequalityReport]) -> Result<Value> {
    for r in reports {
        out.passed &= r.passed();
        out.summary.push(inequality_line(r));
    }
    to_value(&reports)
}

fn radial_suite(config: &ExperimentConfig, out: &mut Outcome, suite: &str) -> Result<Value> {
    let n = config.n;
    let grid = config.grid.radial(n)?;
    let tol = TOL_CLOSED_FORM;
    match suite {
        "holder-p1" | "holder-p2" => {
            let p = if suite == "holder-p1" { 1.0 } else { 2.0 };
            let set =
                radial_tuples(&grid, n + 1, config.samples, config.seed).with_diagonals(DIAGONALS);
            inequality_reports(out, &[check_energy_holder(&set, p, tol)?])
        }
        "mass-holder" => {
            let set = radial_tuples(&grid, n + 1, config.samples, config.seed);
            inequality_reports(out, &[check_mass_holder(&set, tol)?])
        }
        "subadditivity" => {
            let set = radial_tuples(&grid, 2, config.samples, config.seed);
            inequality_reports(
                out,
                &[
                    check_subadditivity(&set, SubadditivityMode::Mass, tol)?,
                    check_subadditivity(&set, SubadditivityMode::Energy, tol)?,
                ],
            )
        }
        "exp-energy" => {
            let scan = check_exp_energy(
                n,
                config.b,
                Range::new(0.1, 8.0, 80),
                Range::new(-30.0, -0.1, 300),
            )?;
            // exploration point below the threshold: the ratio grows along m = 4, c → -∞
            let probe = exp_energy_log_ratio(n, config.b, 4.0, -30.0)?;
            out.passed &= scan.passed();
            out.summary.push(format!(
                "exp-energy b={}: sup={} at m={} c={} interior={} stable={} asserted={} {}",
                config.b,
                fmt_f64(scan.sup.value),
                scan.sup.m,
                scan.sup.c,
                scan.argmax_interior,
                scan.stable,
                scan.assertion_mode,
                verdict(scan.passed())
            ));
            out.summary.push(format!(
                "exp-energy ratio at m=4, c=-30: {}",
                fmt_f64(probe.exp())
            ));
            Ok(
                json!({ "scan": to_value(&scan)?, "ratio_m4_c30": probe.exp(), "log_ratio_m4_c30": probe }),
            )
        }
        "exp-mass" => {
            let bounds: Vec<f64> = [0.5, 0.7, 0.9, 0.95].iter().map(|b| b * n as f64).collect();
            let ms: Vec<f64> = [0.3, 0.5, 0.7, 0.9, 1.1]
                .iter()
                .map(|m| m * n as f64)
                .collect();
            let scan = check_exp_mass(n, &bounds, &ms, Range::new(-30.0, -0.1, 300))?;
            out.passed &= scan.passed();
            out.summary.push(format!(
                "exp-mass: sups={:?} rejected={:?} nondecreasing={} stable={} {}",
                scan.sups.iter().map(|s| fmt_f64(*s)).collect::<Vec<_>>(),
                scan.rejected,
                scan.nondecreasing,
                scan.stable,
                verdict(scan.passed())
            ));
            to_value(&scan)
        }
        "m1" => {
            let mu = RadialMeasure::from_volume_density(grid.clone(), |_| 2.0)?;
            let est = estimate_m1_constant(&mu, config.samples, config.seed)?;
            let ok = est.estimate.is_finite();
            out.passed &= ok;
            out.summary.push(format!(
                "m1: constant estimate {} {}",
                fmt_f64(est.estimate),
                verdict(ok)
            ));
            Ok(json!({ "measure": "2 dV", "estimate": est.estimate, "seed": est.seed }))
        }
        "l1-family" => {
            let rep = l1_convergence_probe(n, &[1.0, 10.0, 100.0])?;
            let ok = rep.energy_error <= 1e-10 && rep.decreasing;
            out.passed &= ok;
            out.summary.push(format!(
                "l1-family: energy error {} decay(dV)={} decay(w)={} {}",
                fmt_f64(rep.energy_error),
                fmt_f64(rep.decay_volume),
                fmt_f64(rep.decay_w),
                verdict(ok)
            ));
            to_value(&rep)
        }
        other => Err(LabError::InvalidArgument(format!(
            "unknown suite {other:?}"
        ))),
    }
}

fn inequality_suite(config: &ExperimentConfig) -> Result<Outcome> {
    let suites: Vec<&str> = match config.suite.as_str() {
        "all" => match config.geometry {
            Geometry::Radial => SUITES.to_vec(),
            Geometry::PlanarDisk => vec!["holder-p1", "subadditivity"],
        },
        s if SUITES.contains(&s) => vec![s],
        other => {
            return Err(LabError::InvalidArgument(format!(
                "unknown suite {other:?}"
            )))
        }
    };
    let mut out = Outcome::new(config, grid_hash(config)?);
    let mut results = serde_json::Map::new();
    for suite in suites {
        let value = match config.geometry {
            Geometry::Radial => radial_suite(config, &mut out, suite)?,
            Geometry::PlanarDisk => planar_suite(config, &mut out, suite)?,
        };
        results.insert(suite.to_string(), value);
    }
    out.results = Value::Object(results);
    Ok(out)
}

fn planar_only(config: &ExperimentConfig, what: &str) -> Result<()> {
    if config.geometry != Geometry::PlanarDisk {
        return Err(LabError::Unsupported(format!(
            "{what} runs on the planar disk (--geometry planar-disk)"
        )));
    }
    Ok(())
}

fn approx_demo(config: &ExperimentConfig) -> Result<Outcome> {
    planar_only(config, "approx-demo")?;
    let grid = config.grid.planar()?;
    let mu = PlanarDensity::circle(grid.clone(), 0.5, 1.0)?;
    let outcome = approximation_scheme(&mu, &config.eps_list, &RelaxationOptions::default())?;
    let exact = PlanarPotential::from_fn(grid.clone(), |x, y| x.hypot(y).ln().max(0.5f64.ln()));
    let exact_errors: Vec<f64> = outcome
        .envelopes
        .iter()
        .map(|e| e.sup_distance(&exact))
        .collect();
    let decreasing = outcome
        .steps
        .windows(2)
        .all(|w| w[1].envelope_error < w[0].envelope_error);
    let mut out = Outcome::new(config, grid.mask_hash());
    out.passed = outcome.energy_nondecreasing && decreasing;
    let mut csv = String::from(
        "# approximation scheme, circle mass at r=0.5; envelope_error against the direct solution\neps,mass,energy,envelope_error,exact_error\n",
    );
    for (s, e) in outcome.steps.iter().zip(&exact_errors) {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(s.eps),
            fmt_f64(s.mass),
            fmt_f64(s.energy),
            fmt_f64(s.envelope_error),
            fmt_f64(*e)
        ));
        out.summary.push(format!(
            "eps={}: envelope error {} energy {}",
            s.eps,
            fmt_f64(s.envelope_error),
            fmt_f64(s.energy)
        ));
    }
    out.summary.push(format!(
        "rate={} energy nondecreasing={} {}",
        outcome.rate.map_or("none".into(), fmt_f64),
        outcome.energy_nondecreasing,
        verdict(out.passed)
    ));
    out.results = json!({
        "steps": to_value(&outcome.steps)?,
        "exact_errors": exact_errors,
        "direct_exact_error": outcome.direct.sup_distance(&exact),
        "rate": outcome.rate,
        "energy_nondecreasing": outcome.energy_nondecreasing,
        "errors_decreasing": decreasing,
    });
    out.csv.push(("approx-demo.csv".into(), csv));
    Ok(out)
}

/// `1/|z|`, with its cell average at a grid node sitting on the origin.
fn inverse_radius(grid: &Arc<crate::planar::PlanarGrid>) -> Result<PlanarDensity> {
    let origin = 4.0 * std::f64::consts::SQRT_2.ln_1p() / grid.spacing();
    PlanarDensity::from_fn(grid.clone(), |x, y| {
        let r = x.hypot(y);
        if r > 0.0 {
            r.recip()
        } else {
            origin
        }
    })
}

fn truncation_demo(config: &ExperimentConfig) -> Result<Outcome> {
    planar_only(config, "truncation-demo")?;
    let grid = config.grid.planar()?;
    let f = inverse_radius(&grid)?;
    let outcome = truncation_scheme(&f, &config.levels, &RelaxationOptions::default())?;
    let increasing = outcome.masses.windows(2).all(|w| w[1] >= w[0]);
    let mut out = Outcome::new(config, grid.mask_hash());
    out.passed = outcome.monotone && increasing;
    let mut csv =
        String::from("# truncated densities min(1/|z|, j); mass of dd^c u_j\nj,mass,sup_abs\n");
    for (j, (m, u)) in outcome
        .levels
        .iter()
        .zip(outcome.masses.iter().zip(&outcome.solutions))
    {
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(*j),
            fmt_f64(*m),
            fmt_f64(u.sup_norm())
        ));
        out.summary.push(format!("j={j}: mass {}", fmt_f64(*m)));
    }
    out.summary.push(format!(
        "worst pointwise increase {} monotone={} {}",
        fmt_f64(outcome.worst_increase),
        outcome.monotone,
        verdict(out.passed)
    ));
    out.results = json!({
        "levels": outcome.levels,
        "masses": outcome.masses,
        "total_mass": f.total_mass(),
        "worst_increase": outcome.worst_increase,
        "monotone": outcome.monotone,
        "masses_increasing": increasing,
    });
    out.csv.push(("truncation-demo.csv".into(), csv));
    Ok(out)
}

fn stability(config: &ExperimentConfig) -> Result<Outcome> {
    planar_only(config, "stability-probe")?;
    let grid = config.grid.planar()?;
    let rho1 = random_density(&grid, config.seed)?;
    let rho2 = random_density(&grid, config.seed.wrapping_add(1))?;
    let rep = stability_probe(
        &rho1,
        &rho2,
        &STABILITY_SCALES,
        &RelaxationOptions::default(),
    )?;
    let mut out = Outcome::new(config, grid.mask_hash());
    out.passed = rep
        .fitted_exponent
        .is_some_and(|e| e >= STABILITY_EXPONENT_MIN);
    let mut csv =
        String::from("# stability probe: rho1 + s (rho2 - rho1)\nscale,l2_diff,sup_diff\n");
    for p in &rep.scan {
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(p.scale),
            fmt_f64(p.l2_diff),
            fmt_f64(p.sup_diff)
        ));
    }
    out.summary.push(format!(
        "stability: sup diff {} l2 diff {} exponent {} {}",
        fmt_f64(rep.sup_diff),
        fmt_f64(rep.l2_diff),
        rep.fitted_exponent.map_or("none".into(), fmt_f64),
        verdict(out.passed)
    ));
    out.results = to_value(&rep)?;
    out.csv.push(("stability-probe.csv".into(), csv));
    Ok(out)
}
