//! Run orchestration behind the command-line tool.

use std::path::PathBuf;

use crate::config::{Mode, RunConfig};
use crate::dispersion::{growth_root, le_critical, max_unstable_mode, reduced_dispersion, trace_growth_curve};
use crate::error::{Error, Result};
use crate::io::{emit_plot_scripts, write_csv, write_manifest};
use crate::linear::{run_linear, EigenMode, InitialData, LinearConfig, LinearModel};
use crate::nonlinear::{detect_steady_pattern, reconstruct_fields, run_nonlinear, NonlinearConfig};
use crate::params::Params;
use crate::wave::WaveProfile;
use num_complex::Complex64;

/// Files written and human-readable summary lines of one run.
#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub artifacts: Vec<PathBuf>,
    pub lines: Vec<String>,
}

/// One check of the `validate` mode.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

/// Runs the configured mode and writes its artifacts, a manifest and plot specs.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let params = config.params()?;
    let manifest = config.to_pairs();
    let dir = &config.output_dir;
    let mut report = RunReport::default();
    let mut validation_failed = false;
    match config.mode {
        Mode::Wave => {
            let path = dir.join("wave.csv");
            let wave = WaveProfile::new(&params);
            let mut xs: Vec<f64> = wave
                .sample(-config.a_ext, config.b_ext, config.samples)
                .into_iter()
                .map(|(x, _, _)| x)
                .collect();
            xs.extend([0.0, params.r]);
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            let rows = xs.iter().map(|&x| vec![x, wave.theta0(x), wave.phi0(x)]);
            write_csv(&path, &manifest, &["x", "theta", "phi"], rows)?;
            report.lines.push(format!("R = {:.12}", params.r));
            report.artifacts.push(path);
        }
        Mode::Dispersion => {
            let curve = trace_growth_curve(config.samples, &params)?;
            let path = dir.join("dispersion.csv");
            write_csv(&path, &manifest, &["le", "lambda"], curve.samples.iter().map(|&(l, g)| vec![l, g]))?;
            report.lines.push(format!("Le_c = {:.10}", curve.le_c));
            report.lines.push(format!("lambda_star = {:.10}", curve.lambda_star));
            report.lines.push(format!("sqrt(lambda_1) = {:.10}", params.lambda_k(1).sqrt()));
            report.artifacts.push(path);
        }
        Mode::Lecrit => {
            let k_max = max_unstable_mode(&params);
            if k_max == 0 {
                report.lines.push("no unstable mode: the strip is too narrow".to_string());
            }
            let mut rows = Vec::new();
            for k in 1..=k_max {
                let lc = le_critical(k, &params)?;
                report.lines.push(format!("k = {k}: Le_c = {lc:.10}"));
                rows.push(vec![k as f64, lc]);
            }
            report.lines.push(format!("K = {k_max}"));
            let path = dir.join("lecrit.csv");
            write_csv(&path, &manifest, &["k", "le_c"], rows)?;
            report.artifacts.push(path);
        }
        Mode::Linear => {
            let lc = LinearConfig {
                params,
                n_x: config.n_x,
                n_y: config.n_y,
                dt: config.dt,
                t_final: config.t_final,
                snapshot_every: config.snapshot_every,
                initial: InitialData::SinSquared { epsilon: config.epsilon },
            };
            let out = run_linear(&lc)?;
            let y = crate::spectral::Grid::new(config.n_x, config.n_y, &params)?.y_nodes();
            let path = dir.join("linear_traces.csv");
            let rows = out.samples.iter().flat_map(|s| {
                y.iter()
                    .enumerate()
                    .map(move |(m, &yy)| vec![s.t, yy, s.u[m], s.w[m]])
            });
            write_csv(&path, &manifest, &["t", "y", "u_trace", "w_trace"], rows)?;
            let last = out.samples.last().expect("initial sample is recorded");
            report.lines.push(format!(
                "t = {}: max|u| = {:.6e}, max|w| = {:.6e} ({} Euler substeps of {:.3e})",
                last.t,
                last.max_u(),
                last.max_w(),
                out.substeps,
                out.dt_internal
            ));
            report.artifacts.push(path);
        }
        Mode::Nonlinear => {
            let nc = NonlinearConfig {
                params,
                n_x: config.n_x,
                n_y: config.n_y,
                dt: config.dt,
                t_final: config.t_final,
                snapshot_every: config.snapshot_every,
                initial: InitialData::SinSquared { epsilon: config.epsilon },
                dealias: config.dealias,
            };
            let out = run_nonlinear(&nc)?;
            let y = crate::spectral::Grid::new(config.n_x, config.n_y, &params)?.y_nodes();
            let path = dir.join("nonlinear_interfaces.csv");
            let rows = out.interfaces.iter().flat_map(|s| {
                y.iter()
                    .enumerate()
                    .map(move |(m, &yy)| vec![s.t, yy, s.f[m], s.g[m]])
            });
            write_csv(&path, &manifest, &["t", "y", "f", "g"], rows)?;
            report.artifacts.push(path);
            let model = LinearModel::new(&params, config.n_x, config.n_y)?;
            let snap = reconstruct_fields(&out.final_state, &model);
            let path = dir.join("nonlinear_fields.csv");
            let rows = snap
                .rows
                .iter()
                .map(|&(d, xi, yy, xp, th, ph)| vec![d as f64, xi, yy, xp, th, ph]);
            write_csv(&path, &manifest, &["domain", "xi", "y", "x_prime", "theta", "phi"], rows)?;
            report.artifacts.push(path);
            match detect_steady_pattern(&out.interfaces) {
                Ok(p) => report.lines.push(format!(
                    "steady = {}, dominant mode = {}, |f|max = {:.6e}, nonplanar = {:.6e}, relative change = {:.3e}",
                    p.steady, p.dominant_mode, p.final_norm, p.nonplanar_amplitude, p.relative_change
                )),
                Err(e) => report.lines.push(format!("pattern detector not applied: {e}")),
            }
        }
        Mode::Validate => {
            let checks = validation_checks(&params)?;
            let path = dir.join("validate.csv");
            let rows = checks
                .iter()
                .enumerate()
                .map(|(i, c)| vec![i as f64 + 1.0, c.value, c.limit, if c.pass { 1.0 } else { 0.0 }]);
            write_csv(&path, &manifest, &["check", "value", "limit", "pass"], rows)?;
            for c in &checks {
                report.lines.push(format!(
                    "[{}] {}: {:.3e} (limit {:.1e})",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.limit
                ));
            }
            validation_failed = checks.iter().any(|c| !c.pass);
            report.artifacts.push(path);
        }
    }
    if config.mode != Mode::Validate {
        report.artifacts.extend(emit_plot_scripts(dir)?);
    }
    let manifest_path = write_manifest(dir, config.mode.name(), &manifest, &report.artifacts)?;
    report.artifacts.push(manifest_path);
    if validation_failed {
        return Err(Error::Validation(report.lines.join("\n")));
    }
    Ok(report)
}

/// Eigenfunction residual, interface residual, critical Lewis number and
/// discrete growth rates against the dispersion relation.
pub fn validation_checks(params: &Params<f64>) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let le = params.le;
    let model = LinearModel::new(params, 64, 4)?;
    let mode = EigenMode::build(params, 1)?;
    let sample = mode.sample(&model, 1.0);
    let res = model.eigen_residual(&sample, 1, mode.tilde_lambda);
    checks.push(Check {
        name: format!("eigenfunction residual, Le = {le}, N_x = 64"),
        value: res,
        limit: 1e-3,
        pass: res < 1e-3,
    });
    let bres = model.interface_residual(&sample, 1);
    checks.push(Check {
        name: "eigenfunction interface residual".to_string(),
        value: bres,
        limit: 1e-8,
        pass: bres < 1e-8,
    });
    let lc = le_critical(1, params)?;
    let d = reduced_dispersion(1, Complex64::new(0.0, 0.0), lc, params).norm();
    checks.push(Check {
        name: format!("dispersion relation at Le_c = {lc:.6}"),
        value: d,
        limit: 1e-10,
        pass: d < 1e-10,
    });
    let wide = params.with_extents(params.a_ext, params.b_ext.max(40.0))?;
    for test_le in [0.2, 0.3, 0.4] {
        let p = wide.with_le(test_le)?;
        if test_le >= le_critical(1, &p)? {
            continue;
        }
        let exact = growth_root(test_le, 1, &p)?;
        let m = LinearModel::new(&p, 20, 4)?;
        let top = m
            .mode_spectrum(1)
            .into_iter()
            .fold(f64::NEG_INFINITY, |a, z| a.max(z.re));
        let rel = ((top - exact) / exact).abs();
        checks.push(Check {
            name: format!("discrete growth rate, Le = {test_le}, B = {}", p.b_ext),
            value: rel,
            limit: 0.05,
            pass: rel < 0.05,
        });
    }
    Ok(checks)
}
