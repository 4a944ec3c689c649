//! Experiment configuration (TOML).
//!
//! ```toml
//! seed = 7
//!
//! [plant]
//! kind = "example"            # or "inline" with a, b, c, d, ce as row-major arrays
//!
//! [grid]
//! l = [0.5, 1.0]              # or: l_count = 36, l_max = 3.5
//! pairs = [[0, 0], [1, 1]]
//! modes = ["terminal", "hard"]
//!
//! [solver]
//! backend = "embedded"        # or "external" with command = ["python3", "script.py"]
//! gap_tol = 1e-8
//!
//! [output]
//! dir = "out"
//! svg = true
//!
//! [simulate]
//! l = 1.0
//! horizon = 500
//! x0 = [1.0, 0.0, 0.0, 0.0, 0.0]
//! f = { kind = "quadratic", q = [[0.1]] }
//! gamma = 4.1
//! ```

use std::path::{Path, PathBuf};

use iqc_core::analysis::{example_plant, AnalysisRequest};
use iqc_core::convex::BuiltinSpec;
use iqc_core::linalg::Mat;
use iqc_core::lmi::AnalysisMode;
use iqc_core::solver::SolverOptions;
use iqc_core::statespace::PlantRealization;
use serde::Deserialize;

use crate::CliError;

/// Largest `L` the builtin example is defined for.
pub const L_MAX: f64 = 3.5;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub plant: PlantSource,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
    pub simulate: Option<SimulateConfig>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PlantSource {
    /// The five-state benchmark, parametrized by `L`.
    #[default]
    Example,
    Inline {
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
        c: Vec<Vec<f64>>,
        d: Vec<Vec<f64>>,
        ce: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub l: Option<Vec<f64>>,
    pub l_count: Option<usize>,
    pub l_max: Option<f64>,
    #[serde(default = "default_pairs")]
    pub pairs: Vec<(usize, usize)>,
    #[serde(default = "default_modes")]
    pub modes: Vec<AnalysisMode>,
}

fn default_pairs() -> Vec<(usize, usize)> {
    vec![(0, 0)]
}

fn default_modes() -> Vec<AnalysisMode> {
    vec![AnalysisMode::TerminalCost, AnalysisMode::Hard]
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            l: None,
            l_count: None,
            l_max: None,
            pairs: default_pairs(),
            modes: default_modes(),
        }
    }
}

impl GridConfig {
    /// The benchmark sweep: 36 equispaced `L` up to 3.5, `nu = nutilde` in
    /// 0..=3, terminal-cost and hard modes.
    pub fn full_sweep() -> Self {
        Self {
            l: None,
            l_count: Some(36),
            l_max: Some(L_MAX),
            pairs: (0..=3).map(|k| (k, k)).collect(),
            modes: default_modes(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Embedded,
    External,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default)]
    pub backend: BackendKind,
    /// Program and arguments of the external backend.
    pub command: Option<Vec<String>>,
    pub gap_tol: Option<f64>,
    pub feas_tol: Option<f64>,
    pub max_iter: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            backend: BackendKind::Embedded,
            command: None,
            gap_tol: None,
            feas_tol: None,
            max_iter: None,
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolverOptions {
        let d = SolverOptions::default();
        SolverOptions {
            gap_tol: self.gap_tol.unwrap_or(d.gap_tol),
            feas_tol: self.feas_tol.unwrap_or(d.feas_tol),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub svg: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    /// `L` of the builtin example; ignored for inline plants.
    pub l: Option<f64>,
    pub horizon: usize,
    /// Initial state; a random unit vector drawn from the seed when absent.
    pub x0: Option<Vec<f64>>,
    pub f: BuiltinSpec,
    /// Bound to check `sup_t |C_e x_t| <= gamma |x_0|` against.
    pub gamma: Option<f64>,
}

/// One grid point. `l` is `None` for inline plants.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub l: Option<f64>,
    pub nu: usize,
    pub nutilde: usize,
    pub mode: AnalysisMode,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn matrix(name: &str, rows: &[Vec<f64>]) -> Result<Mat, CliError> {
    let cols = rows.first().map_or(0, |r| r.len());
    if let Some(i) = rows.iter().position(|r| r.len() != cols) {
        return Err(config_err(format!(
            "plant block `{name}`: row {i} has {} entries, row 0 has {cols}",
            rows[i].len()
        )));
    }
    Ok(Mat::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Builtin example over the full benchmark grid.
    pub fn full_sweep() -> Self {
        Self {
            seed: 0,
            plant: PlantSource::Example,
            grid: GridConfig::full_sweep(),
            solver: SolverConfig::default(),
            output: OutputConfig {
                dir: None,
                svg: true,
            },
            simulate: None,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if let PlantSource::Inline { .. } = self.plant {
            self.plant_at(None)?;
        }
        if self.simulate.is_none() || self.grid.l.is_some() || self.grid.l_count.is_some() {
            self.l_values()?;
        }
        if self.grid.pairs.is_empty() {
            return Err(config_err("grid.pairs is empty"));
        }
        if self.grid.modes.is_empty() {
            return Err(config_err("grid.modes is empty"));
        }
        if self.solver.backend == BackendKind::External && self.solver.command.as_ref().is_none_or(|c| c.is_empty()) {
            return Err(config_err("solver.command is required for the external backend"));
        }
        if let Some(sim) = &self.simulate {
            if let (PlantSource::Example, Some(l)) = (&self.plant, sim.l) {
                check_l(l)?;
            }
        }
        Ok(())
    }

    /// `L` grid for the builtin example; `[None]` for inline plants.
    pub fn l_values(&self) -> Result<Vec<Option<f64>>, CliError> {
        if let PlantSource::Inline { .. } = self.plant {
            return Ok(vec![None]);
        }
        let g = &self.grid;
        let ls = match (&g.l, g.l_count) {
            (Some(_), Some(_)) => return Err(config_err("give either grid.l or grid.l_count, not both")),
            (Some(l), None) => l.clone(),
            (None, Some(k)) => {
                let top = g.l_max.unwrap_or(L_MAX);
                (1..=k).map(|i| top * i as f64 / k as f64).collect()
            }
            (None, None) => return Err(config_err("grid needs `l` or `l_count` for the builtin example")),
        };
        if ls.is_empty() {
            return Err(config_err("L grid is empty"));
        }
        for &l in &ls {
            check_l(l)?;
        }
        Ok(ls.into_iter().map(Some).collect())
    }

    pub fn plant_at(&self, l: Option<f64>) -> Result<PlantRealization, CliError> {
        match (&self.plant, l) {
            (PlantSource::Example, Some(l)) => Ok(example_plant(l)?),
            (PlantSource::Example, None) => Err(config_err("builtin example needs a value of L")),
            (PlantSource::Inline { a, b, c, d, ce }, _) => Ok(PlantRealization::new(
                matrix("a", a)?,
                matrix("b", b)?,
                matrix("c", c)?,
                matrix("d", d)?,
                matrix("ce", ce)?,
            )?),
        }
    }

    /// Grid points in output order: `L` outermost, then pairs, then modes.
    /// Static mode contributes one `(0, 0)` point per `L`.
    pub fn points(&self, mode_override: Option<AnalysisMode>) -> Result<Vec<GridPoint>, CliError> {
        let modes = mode_override.map_or_else(|| self.grid.modes.clone(), |m| vec![m]);
        let mut out = Vec::new();
        for l in self.l_values()? {
            for (i, &(nu, nutilde)) in self.grid.pairs.iter().enumerate() {
                for &mode in &modes {
                    if mode == AnalysisMode::Static {
                        if i == 0 {
                            out.push(GridPoint { l, nu: 0, nutilde: 0, mode });
                        }
                        continue;
                    }
                    out.push(GridPoint { l, nu, nutilde, mode });
                }
            }
        }
        Ok(out)
    }

    pub fn requests(&self, points: &[GridPoint]) -> Result<Vec<AnalysisRequest>, CliError> {
        let opts = self.solver.options();
        points
            .iter()
            .map(|p| {
                let plant = self.plant_at(p.l)?;
                Ok(AnalysisRequest::new(plant, p.nu, p.nutilde, p.mode)?.with_options(opts))
            })
            .collect()
    }
}

fn check_l(l: f64) -> Result<(), CliError> {
    if !(l > 0.0 && l <= L_MAX) {
        return Err(config_err(format!("L = {l} is outside (0, {L_MAX}]")));
    }
    Ok(())
}
