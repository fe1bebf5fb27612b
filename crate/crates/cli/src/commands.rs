use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use degenlab_core::experiments::{run_sweep, Statistic, SweepKind};
use degenlab_core::grid::io::{read_trajectory, write_trajectory};
use degenlab_core::grid::{manufactured_problem, solve_cauchy_dirichlet, Trajectory};
use degenlab_core::inequalities::run_campaign;
use degenlab_core::seminorms::{
    besov_seminorm_with, gagliardo_seminorm, grad_l2_of_v, lp_norm_cylinder, nikolskii_fit,
    parabolic_besov_norm, sup_l2_in_time, Cylinder, LatticeSeries, Region, ShellRule,
    SmoothnessOrder,
};
use degenlab_core::{DegenParams, Error as CoreError, GProfile, QuadratureConfig};
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, SeminormConfig, SeminormKind};
use crate::error::CliError;

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Provenance record written beside every run's outputs.
#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
    pub passed: bool,
    #[serde(default)]
    pub statistics: Vec<Statistic>,
    #[serde(default)]
    pub wall_times: Vec<f64>,
}

/// Settings shared by every subcommand.
pub struct Run {
    pub config: RunConfig,
    pub out: PathBuf,
    pub seed: Option<u64>,
}

impl Run {
    fn prepare(&self) -> CliResult<()> {
        fs::create_dir_all(&self.out).map_err(|e| CliError::io(&self.out, e))
    }

    fn create(&self, name: &str) -> CliResult<BufWriter<fs::File>> {
        let path = self.out.join(name);
        let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        Ok(BufWriter::new(file))
    }

    fn manifest(&self, command: &str, outputs: &[&str], passed: bool) -> CliResult<Manifest> {
        let config = serde_json::to_value(&self.config).map_err(CoreError::from)?;
        Ok(Manifest {
            tool: "degenlab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed: self.seed,
            config,
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
            passed,
            statistics: Vec::new(),
            wall_times: Vec::new(),
        })
    }

    fn write_manifest(&self, stem: &str, manifest: &Manifest) -> CliResult<()> {
        let name = format!("{stem}.manifest.json");
        serde_json::to_writer_pretty(self.create(&name)?, manifest).map_err(CoreError::from)?;
        Ok(())
    }
}

pub fn check_inequalities(run: &Run) -> CliResult<()> {
    run.prepare()?;
    let report = run_campaign(&run.config.campaign)?;
    report.write_csv(run.create("campaign.csv")?)?;
    let violations = report.violations();
    run.write_manifest(
        "campaign",
        &run.manifest("check-inequalities", &["campaign.csv"], violations == 0)?,
    )?;
    println!("{}", report.summary());
    if violations > 0 {
        return Err(CliError::CheckFailed(format!(
            "{violations} violations in {} samples",
            report.total_samples()
        )));
    }
    Ok(())
}

pub fn solve(run: &Run) -> CliResult<()> {
    let c = &run.config;
    let (Some(name), Some(params), Some(grid)) = (&c.problem, c.params, c.grid) else {
        unreachable!("validated by parse_config");
    };
    run.prepare()?;
    let spec = manufactured_problem(name, grid, params)?;
    let (u, report) = solve_cauchy_dirichlet(&spec, &c.newton)?;
    write_trajectory(
        &run.out.join("trajectory.bin"),
        &u,
        Some(&params),
        Some(name),
    )?;
    report.write_csv(run.create("solve_report.csv")?)?;
    let outputs = ["trajectory.bin", "trajectory.json", "solve_report.csv"];
    run.write_manifest("solve", &run.manifest("solve", &outputs, true)?)?;
    println!(
        "solved {name} on {} cells x {} steps: {} Newton iterations, max residual {:e}",
        grid.space.cells(),
        grid.steps(),
        report.total_newton_iterations(),
        report.max_residual()
    );
    if let Some(exact) = spec.exact_trajectory() {
        println!(
            "max nodal error against the exact solution {:e}",
            u.max_abs_diff(&exact)
        );
    }
    Ok(())
}

/// The trajectory a seminorm run works on and the parameters it was made with.
fn seminorm_input(
    c: &RunConfig,
    s: &SeminormConfig,
) -> CliResult<(Trajectory, Option<DegenParams>)> {
    if let Some(path) = &s.input {
        let (traj, meta) = read_trajectory(path)?;
        return Ok((traj, meta.params.or(c.params)));
    }
    let (Some(name), Some(params), Some(grid)) = (&c.problem, c.params, c.grid) else {
        unreachable!("validated by parse_config");
    };
    let spec = manufactured_problem(name, grid, params)?;
    let traj = spec
        .exact_trajectory()
        .unwrap_or_else(|| spec.reference_trajectory());
    Ok((traj, Some(params)))
}

/// Six decimals without trailing zeros.
fn short(x: f64) -> String {
    let s = format!("{x:.6}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn evaluate_seminorm(
    traj: &Trajectory,
    params: Option<DegenParams>,
    s: &SeminormConfig,
) -> CliResult<(String, f64)> {
    let grid = *traj.grid();
    let cyl = Cylinder::centered(&grid, s.radius)?;
    let ball = cyl.ball();
    let [cx, cy] = cyl.center.map(short);
    let q_name = format!(
        "Q_{}(({cx}, {cy}), {})",
        short(s.radius),
        short(cyl.vertex_time)
    );
    let last = traj.level(grid.steps());
    let b_name = format!(
        "B_{}(({cx}, {cy})) at t = {}",
        short(s.radius),
        short(grid.t_end())
    );
    let order = || SmoothnessOrder::new(s.s, s.exponent, s.q, s.cutoff);
    let out = match s.kind {
        SeminormKind::Lp => (q_name, lp_norm_cylinder(traj, &cyl, s.exponent)?),
        SeminormKind::SupL2 => (
            q_name,
            sup_l2_in_time(traj, &ball, (cyl.t_start(), cyl.vertex_time))?,
        ),
        SeminormKind::Besov => (
            b_name,
            besov_seminorm_with(last, &Region::Ball(ball), &order()?, &ShellRule::default())?,
        ),
        SeminormKind::Gagliardo => (
            b_name,
            gagliardo_seminorm(last, &Region::Ball(ball), &order()?)?,
        ),
        SeminormKind::ParabolicBesov => {
            (q_name, parabolic_besov_norm(traj, &cyl, s.s, s.exponent)?)
        }
        SeminormKind::Nikolskii => {
            let h = grid.space.h();
            let shifts: Vec<f64> = s.shifts.iter().map(|&k| k as f64 * h).collect();
            let fit = nikolskii_fit(&LatticeSeries::cell_gradients(traj), &cyl, s.q, &shifts)?;
            (q_name, fit.theta)
        }
        SeminormKind::VEnergy => {
            let params = params.ok_or_else(|| {
                CoreError::Configuration(
                    "v-energy needs [params] or a trajectory that records them".into(),
                )
            })?;
            let profile = GProfile::tabulated(&params, &QuadratureConfig::default())?;
            (q_name, grad_l2_of_v(traj, &profile, &cyl)?)
        }
    };
    Ok(out)
}

pub fn seminorm(run: &Run) -> CliResult<()> {
    let s = run
        .config
        .seminorm
        .as_ref()
        .expect("validated by parse_config");
    let (traj, params) = seminorm_input(&run.config, s)?;
    let (region, value) = evaluate_seminorm(&traj, params, s)?;
    run.prepare()?;
    let estimator = serde_json::to_value(s.kind).map_err(CoreError::from)?;
    let estimator = estimator.as_str().unwrap_or_default().to_string();
    let mut wtr = csv::Writer::from_writer(run.create("seminorm.csv")?);
    wtr.write_record(["estimator", "region", "value"])
        .map_err(csv_error)?;
    wtr.write_record([estimator.as_str(), region.as_str(), &format!("{value:e}")])
        .map_err(csv_error)?;
    wtr.flush()
        .map_err(|e| CliError::io(&run.out.join("seminorm.csv"), e))?;
    run.write_manifest(
        "seminorm",
        &run.manifest("seminorm", &["seminorm.csv"], true)?,
    )?;
    println!("{estimator} on {region}: {value:e}");
    Ok(())
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Core(CoreError::Serialization(e.to_string()))
}

pub fn sweep(run: &Run, kind: SweepKind) -> CliResult<()> {
    let spec = run.config.sweep_spec().expect("validated by parse_config");
    run.prepare()?;
    let report = run_sweep(&spec, kind)?;
    let csv_name = format!("sweep_{}.csv", kind.name());
    report.write_csv(run.create(&csv_name)?)?;
    let mut manifest = run.manifest(&format!("sweep {kind}"), &[&csv_name], report.passed())?;
    manifest.statistics = report.statistics.clone();
    manifest.wall_times = report.wall_times.clone();
    run.write_manifest(&format!("sweep_{}", kind.name()), &manifest)?;

    for row in &report.rows {
        let status = if row.converged { "ok" } else { "not converged" };
        println!("eps {:<10e} {status}", row.eps);
    }
    for st in &report.statistics {
        println!("{}", describe(st));
    }
    let failed: Vec<String> = report.rows.iter().filter_map(|r| r.error.clone()).collect();
    if !failed.is_empty() {
        return Err(CliError::NonConvergence(failed.join("; ")));
    }
    if !report.passed() {
        let names: Vec<&str> = report
            .statistics
            .iter()
            .filter(|s| s.passed == Some(false))
            .map(|s| s.name.as_str())
            .collect();
        return Err(CliError::CheckFailed(format!(
            "statistics failed: {}",
            names.join(", ")
        )));
    }
    Ok(())
}

fn describe(st: &Statistic) -> String {
    let value = st
        .value
        .map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"));
    let verdict = match st.passed {
        Some(true) => "pass",
        Some(false) => "FAIL",
        None => "info",
    };
    let rel = match st.relation {
        degenlab_core::experiments::Relation::AtMost => "<=",
        degenlab_core::experiments::Relation::AtLeast => ">=",
    };
    format!(
        "{:<24} {value:>10} (want {rel} {}) {verdict}",
        st.name, st.threshold
    )
}

/// Manifests under `dir`, sorted by file name.
pub fn read_manifests(dir: &Path) -> CliResult<Vec<(String, Manifest)>> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.to_string_lossy().ends_with(".manifest.json"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let text = fs::read_to_string(&p).map_err(|e| CliError::io(&p, e))?;
            let m: Manifest = serde_json::from_str(&text).map_err(CoreError::from)?;
            let name = p
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok((name, m))
        })
        .collect()
}

pub fn report(run: &Run) -> CliResult<()> {
    let manifests = read_manifests(&run.out)?;
    if manifests.is_empty() {
        return Err(CliError::CheckFailed(format!(
            "no manifests in {}",
            run.out.display()
        )));
    }
    let mut failed = Vec::new();
    for (name, m) in &manifests {
        println!(
            "{name}: {} [{}]",
            m.command,
            if m.passed { "passed" } else { "FAILED" }
        );
        for st in &m.statistics {
            println!("  {}", describe(st));
        }
        if !m.passed {
            failed.push(m.command.clone());
        }
    }
    if !failed.is_empty() {
        return Err(CliError::CheckFailed(format!(
            "failed runs: {}",
            failed.join(", ")
        )));
    }
    Ok(())
}
