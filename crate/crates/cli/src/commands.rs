//! Subcommand implementations. Each returns the process exit code.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use iqc_core::analysis::{assemble, run_suite, sweep, AnalysisResult, SuiteReport, SUITES};
use iqc_core::convex::Builtin;
use iqc_core::linalg::Vector;
use iqc_core::lmi::{dump_system, AnalysisMode};
use iqc_core::sim::{check_amplitude_bound, random_unit, simulate_lure};
use iqc_core::solver::{Backend, Embedded, ExternalCommand, SolveStatus};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{BackendKind, ExperimentConfig, GridPoint, PlantSource};
use crate::output::{write_results, PlotSeries, ResultRow};
use crate::{CliError, EXIT_CONFIG, EXIT_OK, EXIT_SOLVER_LIMIT, EXIT_VERIFICATION};

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub solver: Option<BackendKind>,
    pub mode: Option<AnalysisMode>,
}

pub struct Session {
    pub config: ExperimentConfig,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub mode: Option<AnalysisMode>,
}

impl Session {
    pub fn new(mut config: ExperimentConfig, o: Overrides) -> Result<Self, CliError> {
        if let Some(b) = o.solver {
            config.solver.backend = b;
        }
        config.validate()?;
        if o.jobs == Some(0) {
            return Err(CliError::Config("--jobs must be positive".into()));
        }
        let out_dir = o.out.or_else(|| config.output.dir.clone()).unwrap_or_else(|| PathBuf::from("."));
        fs::create_dir_all(&out_dir).map_err(|e| CliError::Output(format!("{}: {e}", out_dir.display())))?;
        Ok(Self {
            seed: o.seed.unwrap_or(config.seed),
            config,
            out_dir,
            jobs: o.jobs,
            mode: o.mode,
        })
    }

    fn backend(&self) -> Box<dyn Backend> {
        match (self.config.solver.backend, &self.config.solver.command) {
            (BackendKind::External, Some(cmd)) if !cmd.is_empty() => {
                Box::new(ExternalCommand::new(cmd[0].clone(), cmd[1..].to_vec()))
            }
            _ => Box::new(Embedded),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

fn describe(p: &GridPoint) -> String {
    let l = p.l.map(|l| format!("L={l:.4} ")).unwrap_or_default();
    format!("{l}nu={} nutilde={} {}", p.nu, p.nutilde, p.mode)
}

/// Runs the grid, writes `results.csv`, and with `plot` also `plot.csv`
/// (plus `plot.svg` when `svg` is set).
pub fn analyze(s: &Session, plot: bool, svg: bool) -> Result<u8, CliError> {
    let points = s.config.points(s.mode)?;
    let requests = s.config.requests(&points)?;
    let backend = s.backend();
    let results = sweep(&requests, s.jobs, backend.as_ref())?;

    let mut rows = Vec::with_capacity(points.len());
    let mut code = EXIT_OK;
    let mut raise = |c: u8| {
        if code == EXIT_OK || c < code {
            code = c;
        }
    };
    for (p, r) in points.iter().zip(&results) {
        match r {
            Ok(r) => {
                rows.push(ResultRow::new(p, r));
                let gamma = r.gamma.map(|g| format!("{g:.8}")).unwrap_or_else(|| "-".into());
                println!("{}: {} gamma={gamma} iters={}+{}", describe(p), r.status, r.feasibility_iterations, r.iterations);
                match r.status {
                    SolveStatus::Optimal if !r.verified() => {
                        eprintln!("{}: certificate check failed", describe(p));
                        raise(EXIT_VERIFICATION);
                    }
                    SolveStatus::NumericalLimit | SolveStatus::Unbounded => {
                        eprintln!("{}: {}", describe(p), r.message);
                        raise(EXIT_SOLVER_LIMIT);
                    }
                    _ => {}
                }
            }
            Err(e) => {
                eprintln!("{}: {e}", describe(p));
                rows.push(ResultRow::failed(p, &e.to_string()));
                raise(CliError::from(e.clone()).exit_code());
            }
        }
    }
    write_results(create(&s.path("results.csv"))?, &rows)?;
    if plot {
        let ok: Vec<Option<&AnalysisResult>> = results.iter().map(|r| r.as_ref().ok()).collect();
        let series = PlotSeries::collect(&points, &ok);
        series.write_csv(create(&s.path("plot.csv"))?)?;
        if svg {
            series.write_svg(&s.path("plot.svg"))?;
        }
    }
    Ok(code)
}

/// Runs the named suites (all when empty) and writes `verify.json`.
pub fn verify(names: &[String], seed: u64, out_dir: &Path) -> Result<u8, CliError> {
    let selected: Vec<&str> = if names.is_empty() {
        SUITES.to_vec()
    } else {
        names.iter().map(String::as_str).collect()
    };
    if let Some(bad) = selected.iter().find(|n| !SUITES.contains(n)) {
        return Err(CliError::Config(format!("unknown suite `{bad}`, expected one of {}", SUITES.join(", "))));
    }
    fs::create_dir_all(out_dir).map_err(|e| CliError::Output(format!("{}: {e}", out_dir.display())))?;
    let mut reports: Vec<SuiteReport> = Vec::new();
    for name in selected {
        let r = run_suite(name, seed)?;
        println!(
            "{}: {} ({} cases, worst margin {:.3e}, tolerance {:.1e})",
            r.suite,
            if r.pass { "pass" } else { "FAIL" },
            r.cases,
            r.worst_margin,
            r.tolerance
        );
        reports.push(r);
    }
    let path = out_dir.join("verify.json");
    serde_json::to_writer_pretty(create(&path)?, &reports).map_err(|e| CliError::Output(e.to_string()))?;
    Ok(if reports.iter().all(|r| r.pass) { EXIT_OK } else { EXIT_VERIFICATION })
}

/// Simulates the loop from the `[simulate]` table and writes
/// `trajectory.csv`. `gamma` overrides the bound from the config.
pub fn simulate(s: &Session, gamma: Option<f64>) -> Result<u8, CliError> {
    let sim = s
        .config
        .simulate
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [simulate] table".into()))?;
    let l = match s.config.plant {
        PlantSource::Example => Some(sim.l.ok_or_else(|| CliError::Config("simulate.l is required for the builtin example".into()))?),
        PlantSource::Inline { .. } => None,
    };
    let plant = s.config.plant_at(l)?;
    let f = Builtin::from_spec(&sim.f)?;
    let x0 = match &sim.x0 {
        Some(v) if v.len() != plant.n() => {
            return Err(CliError::Config(format!("simulate.x0 has {} entries, the plant has {} states", v.len(), plant.n())))
        }
        Some(v) => Vector::from_vec(v.clone()),
        None => random_unit(&mut ChaCha8Rng::seed_from_u64(s.seed), plant.n()),
    };
    let traj = simulate_lure(&plant, &f, &x0, sim.horizon)?;
    traj.write_csv(create(&s.path("trajectory.csv"))?)?;

    let x0n = x0.norm();
    let peak = traj.e.iter().map(|e| e.norm()).fold(0.0, f64::max);
    let ratio = if x0n > 0.0 { peak / x0n } else { 0.0 };
    println!("horizon={} sup|C_e x_t|={peak:.8e} |x0|={x0n:.8e} ratio={ratio:.8e}", sim.horizon);
    let Some(g) = gamma.or(sim.gamma) else {
        return Ok(EXIT_OK);
    };
    let check = check_amplitude_bound(&traj, &plant.ce, g, &x0)?;
    match check.first_violation {
        None => {
            println!("amplitude bound gamma={g}: pass (worst ratio {:.8e} at t={})", check.worst_ratio, check.worst_t);
            Ok(EXIT_OK)
        }
        Some(t) => {
            println!("amplitude bound gamma={g}: FAIL (first violation at t={t}, worst ratio {:.8e})", check.worst_ratio);
            Ok(EXIT_VERIFICATION)
        }
    }
}

/// Writes the analysis LMIs of every grid point under `lmi/`.
pub fn dump_lmi(s: &Session) -> Result<u8, CliError> {
    let points = s.config.points(s.mode)?;
    let requests = s.config.requests(&points)?;
    let dir = s.path("lmi");
    fs::create_dir_all(&dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
    let mut code = EXIT_OK;
    for (p, req) in points.iter().zip(&requests) {
        let lmi = match assemble(req) {
            Ok(lmi) => lmi,
            Err(e) => {
                eprintln!("{}: {e}", describe(p));
                code = EXIT_CONFIG;
                continue;
            }
        };
        let l = p.l.map(|l| format!("L{l}_")).unwrap_or_default();
        let name = format!("{l}nu{}_nutilde{}_{}.lmi", p.nu, p.nutilde, p.mode);
        fs::write(dir.join(&name), dump_system(&lmi.system))?;
        println!("{}: {} scalar unknowns -> lmi/{name}", describe(p), lmi.system.scalar_count());
    }
    Ok(code)
}
