//! TOML run configuration. Parsing collects every failure before reporting.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use degenlab_core::experiments::{NestedCylinders, SweepSpec};
use degenlab_core::grid::{NewtonConfig, SpaceTimeGrid, CATALOG};
use degenlab_core::inequalities::SampleConfig;
use degenlab_core::maps::default_alpha;
use degenlab_core::DegenParams;
use serde::Serialize;
use toml::{Table, Value};

/// What a run needs from its configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Needs {
    Campaign,
    Solve,
    Seminorm,
    Sweep,
    Report,
}

/// Which quantity `seminorm` evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeminormKind {
    Lp,
    SupL2,
    Besov,
    Gagliardo,
    ParabolicBesov,
    Nikolskii,
    VEnergy,
}

impl SeminormKind {
    const NAMES: [(&'static str, SeminormKind); 7] = [
        ("lp", SeminormKind::Lp),
        ("sup-l2", SeminormKind::SupL2),
        ("besov", SeminormKind::Besov),
        ("gagliardo", SeminormKind::Gagliardo),
        ("parabolic-besov", SeminormKind::ParabolicBesov),
        ("nikolskii", SeminormKind::Nikolskii),
        ("v-energy", SeminormKind::VEnergy),
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeminormConfig {
    pub kind: SeminormKind,
    /// Trajectory written by `solve`; the catalog exact solution otherwise.
    pub input: Option<PathBuf>,
    pub radius: f64,
    pub exponent: f64,
    pub s: f64,
    pub q: f64,
    pub cutoff: f64,
    /// Nikolskii shifts in cells.
    pub shifts: Vec<usize>,
}

/// A fully validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub output: Option<PathBuf>,
    pub problem: Option<String>,
    pub params: Option<DegenParams>,
    pub grid: Option<SpaceTimeGrid>,
    pub cylinders: Option<NestedCylinders>,
    pub eps_list: Vec<f64>,
    pub newton: NewtonConfig,
    pub campaign: SampleConfig,
    pub seminorm: Option<SeminormConfig>,
}

impl RunConfig {
    /// The sweep described by this configuration.
    pub fn sweep_spec(&self) -> Option<SweepSpec> {
        let (problem, params, grid) = (self.problem.as_ref()?, self.params?, self.grid?);
        let mut spec = SweepSpec::new(problem, params, self.eps_list.clone(), grid);
        spec.newton = self.newton;
        if let Some(c) = self.cylinders {
            spec.cylinders = c;
        }
        Some(spec)
    }
}

/// Every problem found in a configuration file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} configuration problem(s): {}",
            self.0.len(),
            self.0.join("; ")
        )
    }
}

impl std::error::Error for ConfigErrors {}

struct Reader {
    failures: Vec<String>,
}

impl Reader {
    fn fail(&mut self, msg: String) {
        self.failures.push(msg);
    }

    fn section<'a>(&mut self, root: &'a Table, name: &str, keys: &[&str]) -> Option<&'a Table> {
        match root.get(name) {
            None => None,
            Some(Value::Table(t)) => {
                for k in t.keys() {
                    if !keys.contains(&k.as_str()) {
                        self.fail(format!("unknown key [{name}].{k}"));
                    }
                }
                Some(t)
            }
            Some(_) => {
                self.fail(format!("[{name}] must be a section"));
                None
            }
        }
    }

    fn number(&mut self, t: Option<&Table>, sect: &str, key: &str) -> Option<f64> {
        match t?.get(key)? {
            Value::Float(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            _ => {
                self.fail(format!("[{sect}].{key} must be a number"));
                None
            }
        }
    }

    fn required_number(&mut self, t: Option<&Table>, sect: &str, key: &str) -> Option<f64> {
        let present = t.is_some_and(|t| t.contains_key(key));
        if !present {
            self.fail(format!("missing key [{sect}].{key}"));
            return None;
        }
        self.number(t, sect, key)
    }

    fn count(&mut self, t: Option<&Table>, sect: &str, key: &str) -> Option<usize> {
        match t?.get(key)? {
            Value::Integer(i) if *i >= 0 => Some(*i as usize),
            _ => {
                self.fail(format!("[{sect}].{key} must be a non-negative integer"));
                None
            }
        }
    }

    fn text(&mut self, t: Option<&Table>, sect: &str, key: &str) -> Option<String> {
        match t?.get(key)? {
            Value::String(s) => Some(s.clone()),
            _ => {
                self.fail(format!("[{sect}].{key} must be a string"));
                None
            }
        }
    }

    fn numbers(&mut self, t: Option<&Table>, sect: &str, key: &str) -> Option<Vec<f64>> {
        let Value::Array(items) = t?.get(key)? else {
            self.fail(format!("[{sect}].{key} must be an array of numbers"));
            return None;
        };
        let mut out = Vec::with_capacity(items.len());
        for v in items {
            match v {
                Value::Float(x) => out.push(*x),
                Value::Integer(i) => out.push(*i as f64),
                _ => {
                    self.fail(format!("[{sect}].{key} must be an array of numbers"));
                    return None;
                }
            }
        }
        Some(out)
    }
}

/// Reads and validates `path` for a run of kind `needs`.
pub fn parse_config(path: &Path, needs: Needs) -> Result<RunConfig, ConfigErrors> {
    let text = fs::read_to_string(path)
        .map_err(|e| ConfigErrors(vec![format!("cannot read {}: {e}", path.display())]))?;
    parse_config_str(&text, needs)
}

/// [`parse_config`] on the text of a configuration file.
pub fn parse_config_str(text: &str, needs: Needs) -> Result<RunConfig, ConfigErrors> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| {
        ConfigErrors(vec![format!("malformed TOML: {}", e.message())])
    })?;
    let mut rd = Reader {
        failures: Vec::new(),
    };
    const SECTIONS: [&str; 9] = [
        "output",
        "problem",
        "params",
        "grid",
        "sweep",
        "cylinders",
        "newton",
        "campaign",
        "seminorm",
    ];
    for k in root.keys() {
        if !SECTIONS.contains(&k.as_str()) {
            rd.fail(format!("unknown section or key '{k}'"));
        }
    }
    let output = match root.get("output") {
        None => None,
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(_) => {
            rd.fail("output must be a string".into());
            None
        }
    };

    let problem_t = rd.section(&root, "problem", &["name"]);
    let params_t = rd.section(&root, "params", &["p", "lambda", "alpha", "eps"]);
    let grid_t = rd.section(
        &root,
        "grid",
        &["length", "cells", "t_start", "t_end", "steps"],
    );
    let sweep_t = rd.section(&root, "sweep", &["eps"]);
    let cyl_t = rd.section(
        &root,
        "cylinders",
        &["center", "vertex_time", "r", "rho", "big_r"],
    );
    let newton_t = rd.section(
        &root,
        "newton",
        &[
            "residual_tol",
            "max_iters",
            "linear_tol",
            "max_linear_iters",
            "min_step",
        ],
    );
    let campaign_t = rd.section(
        &root,
        "campaign",
        &["samples", "p", "lambda", "magnitude", "seed"],
    );
    let seminorm_t = rd.section(
        &root,
        "seminorm",
        &[
            "kind", "input", "radius", "exponent", "s", "q", "cutoff", "shifts",
        ],
    );

    let seminorm = if needs == Needs::Seminorm {
        read_seminorm(&mut rd, seminorm_t)
    } else {
        None
    };
    let needs_problem = match needs {
        Needs::Solve | Needs::Sweep => true,
        Needs::Seminorm => seminorm.as_ref().is_some_and(|s| s.input.is_none()),
        Needs::Campaign | Needs::Report => false,
    };

    let mut problem = None;
    let mut params = None;
    let mut grid = None;
    if needs_problem {
        match rd.text(problem_t, "problem", "name") {
            Some(name) if CATALOG.contains(&name.as_str()) => problem = Some(name),
            Some(name) => rd.fail(format!(
                "unknown problem '{name}' (catalog: {})",
                CATALOG.join(", ")
            )),
            None if problem_t.is_some_and(|t| t.contains_key("name")) => {}
            None => rd.fail("missing key [problem].name".into()),
        }
        params = read_params(&mut rd, params_t, needs);
        grid = read_grid(&mut rd, grid_t);
    }

    let mut eps_list = Vec::new();
    if needs == Needs::Sweep {
        match rd.numbers(sweep_t, "sweep", "eps") {
            Some(v) => eps_list = v,
            None if sweep_t.is_some_and(|t| t.contains_key("eps")) => {}
            None => rd.fail("missing key [sweep].eps".into()),
        }
    }

    let cylinders = if cyl_t.is_some() {
        grid.map(|g| {
            let mut c = NestedCylinders::centered(&g);
            if let Some(v) = rd.numbers(cyl_t, "cylinders", "center") {
                if v.len() == 2 {
                    c.center = [v[0], v[1]];
                } else {
                    rd.fail("[cylinders].center must have two entries".into());
                }
            }
            c.vertex_time = rd
                .number(cyl_t, "cylinders", "vertex_time")
                .unwrap_or(c.vertex_time);
            c.r = rd.number(cyl_t, "cylinders", "r").unwrap_or(c.r);
            c.rho = rd.number(cyl_t, "cylinders", "rho").unwrap_or(c.rho);
            c.big_r = rd.number(cyl_t, "cylinders", "big_r").unwrap_or(c.big_r);
            c
        })
    } else {
        None
    };

    let mut newton = NewtonConfig::default();
    newton.residual_tol = rd
        .number(newton_t, "newton", "residual_tol")
        .unwrap_or(newton.residual_tol);
    newton.max_iters = rd
        .count(newton_t, "newton", "max_iters")
        .unwrap_or(newton.max_iters);
    newton.linear_tol = rd
        .number(newton_t, "newton", "linear_tol")
        .unwrap_or(newton.linear_tol);
    newton.max_linear_iters = rd
        .count(newton_t, "newton", "max_linear_iters")
        .unwrap_or(newton.max_linear_iters);
    newton.min_step = rd
        .number(newton_t, "newton", "min_step")
        .unwrap_or(newton.min_step);
    if let Err(e) = newton.validate() {
        rd.fail(e.to_string());
    }

    let mut campaign = SampleConfig::default();
    if needs == Needs::Campaign {
        campaign.num_samples = rd
            .count(campaign_t, "campaign", "samples")
            .unwrap_or(campaign.num_samples);
        campaign.p_values = rd
            .numbers(campaign_t, "campaign", "p")
            .unwrap_or(campaign.p_values);
        campaign.lambda_values = rd
            .numbers(campaign_t, "campaign", "lambda")
            .unwrap_or(campaign.lambda_values);
        if let Some(m) = rd.numbers(campaign_t, "campaign", "magnitude") {
            if m.len() == 2 {
                campaign.magnitude_range = (m[0], m[1]);
            } else {
                rd.fail("[campaign].magnitude must have two entries".into());
            }
        }
        if let Some(seed) = rd.count(campaign_t, "campaign", "seed") {
            campaign.seed = seed as u64;
        }
        if let Err(e) = campaign.validate() {
            rd.fail(e.to_string());
        }
    }

    let config = RunConfig {
        output,
        problem,
        params,
        grid,
        cylinders,
        eps_list,
        newton,
        campaign,
        seminorm,
    };
    if needs == Needs::Sweep {
        if let Some(spec) = config.sweep_spec() {
            if let Err(e) = spec.validate() {
                rd.fail(e.to_string());
            }
        }
    }
    if rd.failures.is_empty() {
        Ok(config)
    } else {
        Err(ConfigErrors(rd.failures))
    }
}

fn read_params(rd: &mut Reader, t: Option<&Table>, needs: Needs) -> Option<DegenParams> {
    let p = rd.required_number(t, "params", "p");
    let lambda = rd.required_number(t, "params", "lambda");
    let eps = match needs {
        Needs::Solve => rd.required_number(t, "params", "eps"),
        _ => Some(rd.number(t, "params", "eps").unwrap_or(0.0)),
    };
    let alpha = rd.number(t, "params", "alpha");
    let (p, lambda, eps) = (p?, lambda?, eps?);
    // An invalid p or lambda is reported by `violations` below.
    let alpha = alpha.unwrap_or_else(|| default_alpha(p, lambda).unwrap_or(0.0));
    let violations = DegenParams::violations(p, lambda, alpha, eps);
    if needs == Needs::Solve && eps == 0.0 {
        rd.fail("[params].eps must be positive for a solve".into());
    }
    if !violations.is_empty() {
        for v in violations {
            rd.fail(format!("[params] {v}"));
        }
        return None;
    }
    DegenParams::new(p, lambda, alpha, eps).ok()
}

fn read_grid(rd: &mut Reader, t: Option<&Table>) -> Option<SpaceTimeGrid> {
    let length = rd.number(t, "grid", "length").unwrap_or(1.0);
    let cells = rd.count(t, "grid", "cells");
    if cells.is_none() && !t.is_some_and(|t| t.contains_key("cells")) {
        rd.fail("missing key [grid].cells".into());
    }
    let cells = cells?;
    let t_start = rd.number(t, "grid", "t_start").unwrap_or(0.0);
    let t_end = rd
        .number(t, "grid", "t_end")
        .unwrap_or(t_start + (0.4 * length) * (0.4 * length));
    let steps = rd.count(t, "grid", "steps").unwrap_or(cells);
    match SpaceTimeGrid::new(length, cells, t_start, t_end, steps) {
        Ok(g) => Some(g),
        Err(e) => {
            rd.fail(format!("[grid] {e}"));
            None
        }
    }
}

fn read_seminorm(rd: &mut Reader, t: Option<&Table>) -> Option<SeminormConfig> {
    let kind = match rd.text(t, "seminorm", "kind") {
        Some(k) => match SeminormKind::NAMES.iter().find(|(n, _)| *n == k) {
            Some((_, kind)) => Some(*kind),
            None => {
                let names: Vec<&str> = SeminormKind::NAMES.iter().map(|(n, _)| *n).collect();
                rd.fail(format!(
                    "[seminorm].kind '{k}' is not one of {}",
                    names.join(", ")
                ));
                None
            }
        },
        None => {
            if !t.is_some_and(|t| t.contains_key("kind")) {
                rd.fail("missing key [seminorm].kind".into());
            }
            None
        }
    };
    let input = rd.text(t, "seminorm", "input").map(PathBuf::from);
    if let Some(path) = &input {
        if !path.exists() {
            rd.fail(format!(
                "[seminorm].input {} does not exist",
                path.display()
            ));
        }
    }
    let radius = rd.number(t, "seminorm", "radius").unwrap_or(0.3);
    let exponent = rd.number(t, "seminorm", "exponent").unwrap_or(2.0);
    let s = rd.number(t, "seminorm", "s").unwrap_or(0.5);
    let q = rd.number(t, "seminorm", "q").unwrap_or(2.0);
    let cutoff = rd.number(t, "seminorm", "cutoff").unwrap_or(0.25 * radius);
    let shifts = match rd.numbers(t, "seminorm", "shifts") {
        Some(v) if v.iter().all(|x| *x >= 1.0 && x.fract() == 0.0) => {
            v.iter().map(|x| *x as usize).collect()
        }
        Some(_) => {
            rd.fail("[seminorm].shifts must be positive whole numbers of cells".into());
            Vec::new()
        }
        None => vec![1, 2, 4, 8],
    };
    if !(radius > 0.0) {
        rd.fail(format!("[seminorm].radius must be positive (got {radius})"));
    }
    if !(exponent >= 1.0) {
        rd.fail(format!("[seminorm].exponent must be >= 1 (got {exponent})"));
    }
    Some(SeminormConfig {
        kind: kind?,
        input,
        radius,
        exponent,
        s,
        q,
        cutoff,
        shifts,
    })
}
