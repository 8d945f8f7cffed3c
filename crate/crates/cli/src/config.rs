//! Run configuration: JSON schema, defaults, command-line overrides and validation.

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use tpqrm::model::{critical_params, DeltaSpec};
use tpqrm::Bargmann;

use crate::ConfigError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Spectrum,
    GapScan,
    Observables,
    Qfi,
    Wigner,
    Quench,
    Collapse1d,
    Fit,
    GapOpening,
}

impl CommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandName::Spectrum => "spectrum",
            CommandName::GapScan => "gap-scan",
            CommandName::Observables => "observables",
            CommandName::Qfi => "qfi",
            CommandName::Wigner => "wigner",
            CommandName::Quench => "quench",
            CommandName::Collapse1d => "collapse1d",
            CommandName::Fit => "fit",
            CommandName::GapOpening => "gap-opening",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ConditioningName {
    Reduced,
    QubitUp,
    QubitDown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FitMode {
    Powerlaw,
    Quadratic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    /// Number, or `"critical"` for `Δ_c(r)`; always numeric once resolved.
    pub delta: DeltaSpec,
    pub r: f64,
    /// Single-point commands (wigner) use `g` or `g_over_gc`.
    pub g: Option<f64>,
    pub g_over_gc: Option<f64>,
    pub q: Bargmann,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            delta: DeltaSpec::Named(tpqrm::model::DeltaName::Critical),
            r: 0.25,
            g: None,
            g_over_gc: None,
            q: Bargmann::Quarter,
        }
    }
}

/// Uniform grid in `x = -log10(1 - g/g_c)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Self { x_min: 0.0, x_max: 3.0, points: 31 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    /// Starting truncation for ED and the quench propagator.
    pub n_max: usize,
    pub n_ceiling: usize,
    /// Absolute ED eigenvalue tolerance.
    pub tol: f64,
    /// Levels per parity block.
    pub levels: usize,
    /// Initial number of excited states in the QFI sum.
    pub k_states: usize,
    /// Relative coupling step for the fidelity-route QFI cross-check, off when absent.
    pub fidelity_eps: Option<f64>,
    /// Quench time step; absent means `min(0.1, τ_q/100)`.
    pub dt: Option<f64>,
    pub rel_tol: f64,
    pub max_halvings: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            n_max: 256,
            n_ceiling: 1 << 16,
            tol: 1e-10,
            levels: 6,
            k_states: 16,
            fidelity_eps: None,
            dt: None,
            rel_tol: 0.01,
            max_halvings: 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuenchCfg {
    pub g_f_over_gc: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    /// Log-spaced.
    pub tau_points: usize,
}

impl Default for QuenchCfg {
    fn default() -> Self {
        Self { g_f_over_gc: 0.99, tau_min: 10.0, tau_max: 1000.0, tau_points: 9 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CollapseCfg {
    /// Qubit frequencies; empty means `[params.delta]`.
    pub deltas: Vec<f64>,
    pub levels: usize,
    pub l: f64,
    pub h: f64,
    /// Also run the Fock-space cross-check at this truncation.
    pub fock_check_n_max: Option<usize>,
}

impl Default for CollapseCfg {
    fn default() -> Self {
        Self { deltas: Vec::new(), levels: 8, l: 1e8, h: 0.01, fock_check_n_max: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GapOpeningCfg {
    /// Qubit-frequency range; absent ends resolve to `Δ_c - 0.06` and `Δ_c - 0.01`.
    pub delta_min: Option<f64>,
    pub delta_max: Option<f64>,
    pub points: usize,
    pub n_start: usize,
    pub n_ceiling: usize,
    pub tol: f64,
}

impl Default for GapOpeningCfg {
    fn default() -> Self {
        let d = tpqrm::scan::GapOpeningOptions::default();
        Self { delta_min: None, delta_max: None, points: 11, n_start: d.n_start, n_ceiling: d.n_ceiling, tol: d.tol }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WignerCfg {
    pub points: usize,
    pub conditioning: ConditioningName,
    /// Square box `±half_width`; absent means `±(1 + 7σ)` from the ED quadrature widths.
    pub half_width: Option<f64>,
}

impl Default for WignerCfg {
    fn default() -> Self {
        Self { points: 121, conditioning: ConditioningName::Reduced, half_width: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitCfg {
    pub enabled: bool,
    /// In the command's natural abscissa: `x` for scans, `τ_q` for quench,
    /// `|Δ - Δ_c|` for gap-opening, the raw column for `fit`.
    pub window: Option<[f64; 2]>,
    /// `fit` command: CSV to read and the columns to use.
    pub input: Option<String>,
    pub x_column: String,
    pub y_column: String,
    pub mode: FitMode,
}

impl Default for FitCfg {
    fn default() -> Self {
        Self {
            enabled: false,
            window: None,
            input: None,
            x_column: "x".into(),
            y_column: "eps_sp".into(),
            mode: FitMode::Powerlaw,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Option<CommandName>,
    pub params: Params,
    pub grid: Grid,
    pub numerics: Numerics,
    pub quench: QuenchCfg,
    pub collapse: CollapseCfg,
    pub gap_opening: GapOpeningCfg,
    pub wigner: WignerCfg,
    pub fit: FitCfg,
    /// Path prefix for `<prefix>.csv`, `<prefix>.manifest.json`, `<prefix>.fit.json`.
    pub output: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            params: Params::default(),
            grid: Grid::default(),
            numerics: Numerics::default(),
            quench: QuenchCfg::default(),
            collapse: CollapseCfg::default(),
            gap_opening: GapOpeningCfg::default(),
            wigner: WignerCfg::default(),
            fit: FitCfg::default(),
            output: None,
        }
    }
}

/// Command-line overrides shared by all subcommands.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct Overrides {
    /// JSON run configuration (a manifest from an earlier run works too).
    #[arg(long)]
    pub config: Option<String>,
    /// Anisotropy in [0, 1].
    #[arg(long)]
    pub r: Option<f64>,
    /// Qubit frequency, a number or "critical".
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long)]
    pub g: Option<f64>,
    #[arg(long = "g-over-gc")]
    pub g_over_gc: Option<f64>,
    /// Bargmann sector, 1/4 or 3/4.
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long = "x-range", num_args = 2, value_names = ["MIN", "MAX"])]
    pub x_range: Option<Vec<f64>>,
    /// Grid points.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long = "n-max")]
    pub n_max: Option<usize>,
    #[arg(long = "n-ceiling")]
    pub n_ceiling: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "k-states")]
    pub k_states: Option<usize>,
    #[arg(long = "fidelity-eps")]
    pub fidelity_eps: Option<f64>,
    /// Final quench coupling as a fraction of g_c, e.g. 0.99 or 1-1e-6.
    #[arg(long)]
    pub gf: Option<String>,
    #[arg(long = "tau-range", num_args = 2, value_names = ["MIN", "MAX"])]
    pub tau_range: Option<Vec<f64>>,
    #[arg(long = "tau-points")]
    pub tau_points: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Qubit frequencies for collapse1d (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub deltas: Option<Vec<f64>>,
    #[arg(long = "delta-range", num_args = 2, value_names = ["MIN", "MAX"])]
    pub delta_range: Option<Vec<f64>>,
    #[arg(long = "fock-check")]
    pub fock_check: Option<usize>,
    #[arg(long, value_enum)]
    pub conditioning: Option<ConditioningName>,
    #[arg(long = "half-width")]
    pub half_width: Option<f64>,
    /// Fit the scan and write <prefix>.fit.json.
    #[arg(long)]
    pub fit: bool,
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"])]
    pub window: Option<Vec<f64>>,
    /// CSV input for `fit`.
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long = "x-col")]
    pub x_col: Option<String>,
    #[arg(long = "y-col")]
    pub y_col: Option<String>,
    #[arg(long, value_enum)]
    pub mode: Option<FitMode>,
    #[arg(long)]
    pub output: Option<String>,
}

/// Parses `"0.99"`, `"1-1e-6"` or `"1 - 1e-6"` as a fraction of `g_c`.
pub fn parse_fraction(text: &str) -> anyhow::Result<f64> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    // split at a '-' that is not part of an exponent
    let bytes = t.as_bytes();
    for i in 1..bytes.len() {
        if bytes[i] == b'-' && !matches!(bytes[i - 1], b'e' | b'E') {
            let (a, b) = (&t[..i], &t[i + 1..]);
            let a: f64 = a.parse().with_context(|| format!("bad coupling fraction {text:?}"))?;
            let b: f64 = b.parse().with_context(|| format!("bad coupling fraction {text:?}"))?;
            return Ok(a - b);
        }
    }
    bail!("bad coupling fraction {text:?}")
}

fn parse_delta(text: &str) -> anyhow::Result<DeltaSpec> {
    if text.eq_ignore_ascii_case("critical") {
        return Ok(DeltaSpec::Named(tpqrm::model::DeltaName::Critical));
    }
    Ok(DeltaSpec::Value(text.parse().with_context(|| format!("--delta expects a number or \"critical\", got {text:?}"))?))
}

fn parse_q(text: &str) -> anyhow::Result<Bargmann> {
    match text {
        "1/4" | "0.25" => Ok(Bargmann::Quarter),
        "3/4" | "0.75" => Ok(Bargmann::ThreeQuarters),
        _ => bail!("--q expects 1/4 or 3/4, got {text:?}"),
    }
}

fn pair(v: &[f64]) -> [f64; 2] {
    [v[0], v[1]]
}

pub fn load(path: &str) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("reading {path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| ConfigError(format!("{path}: {e}")))
}

impl RunConfig {
    /// Config file (if any), then flags, then defaults resolved.
    pub fn assemble(command: CommandName, o: &Overrides) -> Result<Self, ConfigError> {
        let mut c = match &o.config {
            Some(p) => load(p)?,
            None => RunConfig::default(),
        };
        if let Some(cmd) = c.command {
            if cmd != command {
                return Err(ConfigError(format!(
                    "config is for `{}` but `{}` was invoked",
                    cmd.as_str(),
                    command.as_str()
                )));
            }
        }
        c.command = Some(command);
        c.apply(o).map_err(|e| ConfigError(format!("{e:#}")))?;
        c.resolve()?;
        Ok(c)
    }

    fn apply(&mut self, o: &Overrides) -> anyhow::Result<()> {
        if let Some(r) = o.r {
            self.params.r = r;
        }
        if let Some(d) = &o.delta {
            self.params.delta = parse_delta(d)?;
        }
        if o.g.is_some() {
            self.params.g = o.g;
            self.params.g_over_gc = None;
        }
        if o.g_over_gc.is_some() {
            self.params.g_over_gc = o.g_over_gc;
            self.params.g = None;
        }
        if let Some(q) = &o.q {
            self.params.q = parse_q(q)?;
        }
        if let Some(x) = &o.x_range {
            [self.grid.x_min, self.grid.x_max] = pair(x);
        }
        if let Some(n) = o.points {
            self.grid.points = n;
            self.gap_opening.points = n;
            self.wigner.points = n;
        }
        if let Some(v) = o.levels {
            self.numerics.levels = v;
            self.collapse.levels = v;
        }
        if let Some(v) = o.n_max {
            self.numerics.n_max = v;
        }
        if let Some(v) = o.n_ceiling {
            self.numerics.n_ceiling = v;
            self.gap_opening.n_ceiling = v;
        }
        if let Some(v) = o.tol {
            self.numerics.tol = v;
        }
        if let Some(v) = o.k_states {
            self.numerics.k_states = v;
        }
        if o.fidelity_eps.is_some() {
            self.numerics.fidelity_eps = o.fidelity_eps;
        }
        if let Some(g) = &o.gf {
            self.quench.g_f_over_gc = parse_fraction(g)?;
        }
        if let Some(t) = &o.tau_range {
            [self.quench.tau_min, self.quench.tau_max] = pair(t);
        }
        if let Some(v) = o.tau_points {
            self.quench.tau_points = v;
        }
        if o.dt.is_some() {
            self.numerics.dt = o.dt;
        }
        if let Some(d) = &o.deltas {
            self.collapse.deltas = d.clone();
        }
        if let Some(d) = &o.delta_range {
            self.gap_opening.delta_min = Some(d[0]);
            self.gap_opening.delta_max = Some(d[1]);
        }
        if o.fock_check.is_some() {
            self.collapse.fock_check_n_max = o.fock_check;
        }
        if let Some(c) = o.conditioning {
            self.wigner.conditioning = c;
        }
        if o.half_width.is_some() {
            self.wigner.half_width = o.half_width;
        }
        if o.fit {
            self.fit.enabled = true;
        }
        if let Some(w) = &o.window {
            self.fit.window = Some(pair(w));
        }
        if o.input.is_some() {
            self.fit.input = o.input.clone();
        }
        if let Some(c) = &o.x_col {
            self.fit.x_column = c.clone();
        }
        if let Some(c) = &o.y_col {
            self.fit.y_column = c.clone();
        }
        if let Some(m) = o.mode {
            self.fit.mode = m;
        }
        if o.output.is_some() {
            self.output = o.output.clone();
        }
        Ok(())
    }

    /// Materializes every default that depends on other fields.
    fn resolve(&mut self) -> Result<(), ConfigError> {
        let r = self.params.r;
        let (_, delta_c) = critical_params(r).map_err(|e| ConfigError(e.to_string()))?;
        let delta = self.params.delta.resolve(r).map_err(|e| ConfigError(e.to_string()))?;
        self.params.delta = DeltaSpec::Value(delta);
        let cmd = self.command.expect("command set before resolve");
        if cmd == CommandName::Wigner && self.params.g.is_none() && self.params.g_over_gc.is_none() {
            self.params.g_over_gc = Some(0.95);
        }
        if cmd == CommandName::Collapse1d && self.collapse.deltas.is_empty() {
            self.collapse.deltas = vec![delta];
        }
        if self.gap_opening.delta_min.is_none() {
            self.gap_opening.delta_min = Some((delta_c - 0.06).max(0.0));
        }
        if self.gap_opening.delta_max.is_none() {
            self.gap_opening.delta_max = Some((delta_c - 0.01).max(0.0));
        }
        if self.output.is_none() {
            self.output = Some(format!("tpqrm-{}", cmd.as_str()));
        }
        Ok(())
    }

    pub fn command(&self) -> CommandName {
        self.command.expect("resolved config has a command")
    }

    pub fn delta(&self) -> f64 {
        match self.params.delta {
            DeltaSpec::Value(v) => v,
            _ => unreachable!("delta resolved"),
        }
    }

    pub fn output(&self) -> &str {
        self.output.as_deref().expect("resolved config has an output prefix")
    }

    pub fn single_point(&self) -> tpqrm::Result<tpqrm::ModelParams> {
        let spec = tpqrm::model::ParamSpec {
            delta: self.params.delta.clone(),
            g: self.params.g,
            g_over_gc: self.params.g_over_gc,
            r: self.params.r,
        };
        spec.resolve()
    }

    pub fn taus(&self) -> Vec<f64> {
        let q = &self.quench;
        if q.tau_points < 2 {
            return vec![q.tau_min];
        }
        let (a, b) = (q.tau_min.ln(), q.tau_max.ln());
        (0..q.tau_points).map(|i| (a + (b - a) * i as f64 / (q.tau_points - 1) as f64).exp()).collect()
    }

    pub fn gap_deltas(&self) -> Vec<f64> {
        let g = &self.gap_opening;
        let (a, b) = (g.delta_min.unwrap(), g.delta_max.unwrap());
        if g.points < 2 {
            return vec![a];
        }
        (0..g.points).map(|i| a + (b - a) * i as f64 / (g.points - 1) as f64).collect()
    }

    /// Domain and sanity checks without running anything.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        let r = self.params.r;
        let Ok((g_c, delta_c)) = critical_params(r) else {
            return vec![format!("r = {r} outside [0, 1]")];
        };
        let delta = self.delta();
        if !(delta >= 0.0) {
            out.push(format!("delta = {delta} must be >= 0"));
        }
        let cmd = self.command();
        let uses_grid = matches!(cmd, CommandName::Spectrum | CommandName::GapScan | CommandName::Observables | CommandName::Qfi);
        if uses_grid {
            let g = &self.grid;
            if !(g.x_min >= 0.0 && g.x_max > g.x_min && g.x_max.is_finite()) {
                out.push(format!("x-range [{}, {}] needs 0 <= min < max", g.x_min, g.x_max));
            }
            if g.points < 2 {
                out.push("grid needs at least 2 points".into());
            }
        }
        if cmd == CommandName::Wigner {
            match self.single_point() {
                Ok(p) if p.g >= g_c => out.push(format!("g = {} must be below g_c(r = {r}) = {g_c}", p.g)),
                Ok(_) => {}
                Err(e) => out.push(e.to_string()),
            }
        }
        if cmd == CommandName::Quench {
            let q = &self.quench;
            if !(q.g_f_over_gc > 0.0 && q.g_f_over_gc < 1.0) {
                out.push(format!("g_f/g_c = {} must lie in (0, 1); g_c(r = {r}) = {g_c}", q.g_f_over_gc));
            }
            if !(q.tau_min > 0.0 && q.tau_max >= q.tau_min) {
                out.push(format!("tau range [{}, {}] needs 0 < min <= max", q.tau_min, q.tau_max));
            }
        }
        if cmd == CommandName::GapOpening {
            let (a, b) = (self.gap_opening.delta_min.unwrap(), self.gap_opening.delta_max.unwrap());
            if !(a >= 0.0 && b >= a) {
                out.push(format!("delta range [{a}, {b}] needs 0 <= min <= max"));
            }
            if b >= delta_c {
                out.push(format!("gap-opening fits use delta < delta_c = {delta_c}, range ends at {b}"));
            }
        }
        if cmd == CommandName::Collapse1d && self.collapse.deltas.iter().any(|d| !(*d >= 0.0)) {
            out.push("collapse1d deltas must be >= 0".into());
        }
        if cmd == CommandName::Fit && self.fit.input.is_none() {
            out.push("fit needs an input CSV (--input)".into());
        }
        if let Some([a, b]) = self.fit.window {
            if !(b > a) {
                out.push(format!("fit window [{a}, {b}] needs min < max"));
            }
        }
        if self.numerics.levels == 0 {
            out.push("levels must be >= 1".into());
        }
        out
    }

    /// Rough number of tridiagonal diagonalizations or propagation steps.
    pub fn estimated_cost(&self) -> String {
        match self.command() {
            CommandName::Spectrum | CommandName::GapScan | CommandName::Observables | CommandName::Qfi => {
                format!("{} grid points, ED up to n_max = {}", self.grid.points, self.numerics.n_ceiling)
            }
            CommandName::Wigner => format!("one ED ground state, {}² phase-space points", self.wigner.points),
            CommandName::Quench => {
                let steps: f64 = self
                    .taus()
                    .iter()
                    .map(|t| t / self.numerics.dt.unwrap_or_else(|| 0.1f64.min(t / 100.0)))
                    .sum();
                format!("{} quenches, about {steps:.2e} time steps before refinement checks", self.quench.tau_points)
            }
            CommandName::Collapse1d => format!("{} deltas, 1D grids of about {} nodes", self.collapse.deltas.len(), {
                (self.collapse.l.asinh() / self.collapse.h) as usize
            }),
            CommandName::Fit => "one least-squares fit".into(),
            CommandName::GapOpening => {
                format!("{} deltas, ED up to n_max = {}", self.gap_opening.points, self.gap_opening.n_ceiling)
            }
        }
    }
}
