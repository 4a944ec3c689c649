//! End-to-end amplitude-bound analysis: filter and augmented plant, LMI
//! assembly, the `gamma` minimization, and a-posteriori checks of the
//! returned certificates.

mod suites;

pub use suites::{run_suite, SuiteReport, SUITES};

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::convex::ConvexOracle;
use crate::error::{IqcError, Result};
use crate::linalg::{eye, spectral_radius, vstack, zeros, Mat, Vector};
use crate::lmi::{
    assemble_analysis_lmis, AnalysisLmi, AnalysisMode, CertificateSet, LmiSystem, ScalarConstraint, ScalarKind,
    VerificationReport,
};
use crate::multiplier::{check_hyperdominance, combined_filter, HyperdominanceReport, MultiplierParam};
use crate::sim::Trajectory;
use crate::solver::{flatten, Backend, Embedded, SolveResult, SolveStatus, SolverOptions};
use crate::statespace::{interconnect, is_schur, PlantRealization};

/// Absolute tolerance for hyperdominance of the returned `M_{T0}`.
pub const HYPERDOMINANCE_TOL: f64 = 1e-9;

/// Interior margins at or below this count as no interior at all.
pub const INTERIOR_TOL: f64 = 1e-7;

/// The five-state benchmark loop with feedthrough `D = -1/L`.
pub fn example_plant(l: f64) -> Result<PlantRealization> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(IqcError::InvalidArgument {
            arg: "L",
            reason: format!("must be positive and finite, got {l}"),
        });
    }
    #[rustfmt::skip]
    let a = Mat::from_row_slice(5, 5, &[
        0.1, 1.0, 0.0, 0.0, 0.0,
        -0.24, 0.1, -0.54, -0.35, 0.84,
        0.0, 0.0, 0.54, -0.24, 0.59,
        0.0, 0.0, 0.0, 0.54, 1.0,
        0.0, 0.0, 0.0, -0.56, 0.54,
    ]);
    let b = Mat::from_column_slice(5, 1, &[0.0, 0.0, 0.0, 0.0, 1.04]);
    let c = Mat::from_row_slice(1, 5, &[-0.08, -0.17, 0.13, 0.09, -0.21]);
    let ce = Mat::from_row_slice(1, 5, &[2.0, 1.3, -1.0, -1.3, 1.3]);
    PlantRealization::new(a, b, c, Mat::from_element(1, 1, -1.0 / l), ce)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisRequest {
    pub plant: PlantRealization,
    pub nu: usize,
    pub nutilde: usize,
    pub mode: AnalysisMode,
    pub options: SolverOptions,
}

impl AnalysisRequest {
    pub fn new(plant: PlantRealization, nu: usize, nutilde: usize, mode: AnalysisMode) -> Result<Self> {
        if mode == AnalysisMode::Static && (nu, nutilde) != (0, 0) {
            return Err(IqcError::InvalidArgument {
                arg: "mode",
                reason: format!("static mode needs nu = nutilde = 0, got ({nu}, {nutilde})"),
            });
        }
        Ok(Self {
            plant,
            nu,
            nutilde,
            mode,
            options: SolverOptions::default(),
        })
    }

    pub fn with_options(mut self, options: SolverOptions) -> Self {
        self.options = options;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisResult {
    pub status: SolveStatus,
    /// `gamma*` when the solve is optimal.
    pub gamma: Option<f64>,
    pub certificates: Option<CertificateSet>,
    /// `Y = X - W^T (X_Psi + Z)^{-1} W`.
    pub state_bound: Option<Mat>,
    pub hyperdominance: Option<HyperdominanceReport>,
    pub verification: Option<VerificationReport>,
    pub iterations: usize,
    pub relative_gap: f64,
    /// Optimal value of the feasibility stage, see [`interior_margin`].
    pub interior_margin: f64,
    pub feasibility_iterations: usize,
    pub scalar_unknowns: usize,
    pub assembly_time: Duration,
    pub solve_time: Duration,
    pub message: String,
}

impl AnalysisResult {
    /// Optimal, every LMI and scalar constraint holds at the verification
    /// tolerance, and `M_{T0}` is doubly hyperdominant.
    pub fn verified(&self) -> bool {
        self.status == SolveStatus::Optimal
            && self.verification.as_ref().is_some_and(|v| v.pass)
            && self.hyperdominance.as_ref().is_some_and(|h| h.pass)
    }
}

/// Tolerance for the a-posteriori LMI check, relative to the size of the
/// solution.
fn verification_tol(x: &[f64]) -> f64 {
    1e-7 * x.iter().fold(1.0f64, |m, v| m.max(v.abs()))
}

/// Filter, augmented plant and the analysis LMIs for `req`.
pub fn assemble(req: &AnalysisRequest) -> Result<AnalysisLmi> {
    let plant = &req.plant;
    let filter = combined_filter(req.nu, req.nutilde, plant.d());
    let aug = interconnect(&filter, plant)?;
    assemble_analysis_lmis(&aug, &plant.ce, req.nu, req.nutilde, req.mode)
}

pub fn compute_gamma_star(req: &AnalysisRequest) -> Result<AnalysisResult> {
    compute_gamma_star_with(req, &Embedded)
}

pub fn compute_gamma_star_with(req: &AnalysisRequest, backend: &dyn Backend) -> Result<AnalysisResult> {
    let plant = &req.plant;
    if !is_schur(&plant.a, 0.0) {
        return Err(IqcError::NotSchur {
            spectral_radius: spectral_radius(&plant.a),
        });
    }
    let start = Instant::now();
    let lmi = assemble(req)?;
    let (problem, _) = flatten(&lmi.system)?;
    let assembly_time = start.elapsed();
    let (phase1, margin) = interior_margin(&lmi, backend, &req.options)?;
    let mut out = AnalysisResult {
        status: phase1.status,
        gamma: None,
        certificates: None,
        state_bound: None,
        hyperdominance: None,
        verification: None,
        iterations: 0,
        relative_gap: f64::NAN,
        interior_margin: margin,
        feasibility_iterations: phase1.iterations,
        scalar_unknowns: problem.num_vars(),
        assembly_time,
        solve_time: phase1.wall_time,
        message: String::new(),
    };
    if phase1.status != SolveStatus::Optimal {
        out.message = format!("feasibility stage: {}", phase1.message);
        return Ok(out);
    }
    if margin <= INTERIOR_TOL {
        out.status = SolveStatus::Infeasible;
        out.message = format!("strict LMIs have no interior (margin {margin:.2e})");
        return Ok(out);
    }
    let sol = backend.solve(&problem, &req.options)?;
    out.status = sol.status;
    out.iterations = sol.iterations;
    out.relative_gap = sol.relative_gap;
    out.solve_time += sol.wall_time;
    out.message = sol.message.clone();
    if sol.status != SolveStatus::Optimal {
        return Ok(out);
    }
    let x = sol.x.as_slice();
    let cert = lmi.certificates(x)?;
    let m = cert.multiplier()?.m(req.nu + req.nutilde + 1)?;
    out.hyperdominance = Some(check_hyperdominance(&m, HYPERDOMINANCE_TOL)?);
    out.verification = Some(lmi.system.verify_vector(x, verification_tol(x)));
    out.state_bound = cert.state_bound().ok();
    out.gamma = Some(cert.gamma);
    out.certificates = Some(cert);
    Ok(out)
}

/// Largest `t` such that the homogeneous part of the analysis LMIs (the
/// dissipation inequality and the storage block of the coupling, without the
/// `gamma` bounds) holds with margin `t I` for some point of the unit box.
/// Zero up to solver accuracy exactly when the strict inequalities have no
/// solution, in which case `gamma*` is infinite.
pub fn interior_margin(lmi: &AnalysisLmi, backend: &dyn Backend, options: &SolverOptions) -> Result<(SolveResult, f64)> {
    let src = &lmi.system;
    let mut sys = LmiSystem::new();
    for v in &src.variables {
        sys.declare(&v.name, v.rows, v.cols, v.symmetric)?;
    }
    let t = sys.declare("t", 1, 1, true)?.index(0, 0);
    let find = |name: &str| {
        src.lmis
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| IqcError::UnknownVariable(name.to_string()))
    };
    let big_n = lmi.n_psi + lmi.n;
    let storage = vstack(&[&zeros(lmi.p, big_n), &eye(big_n)]);
    for (name, expr) in [
        ("dissipation", find("dissipation")?.expr.clone()),
        ("storage", find("coupling")?.expr.congruence(&storage)),
    ] {
        let mut ex = expr;
        ex.add_term(t, &(-eye(ex.size)));
        sys.add_lmi(name, ex, 0.0)?;
    }
    for c in &src.scalars {
        sys.add_scalar(c.clone())?;
    }
    for k in 0..src.scalar_count() {
        for sign in [1.0, -1.0] {
            sys.add_scalar(ScalarConstraint {
                name: format!("box_{k}_{}", if sign > 0.0 { "lo" } else { "hi" }),
                coeffs: BTreeMap::from([(k, sign)]),
                constant: 1.0,
                kind: ScalarKind::NonNegative,
            })?;
        }
    }
    sys.set_objective(BTreeMap::from([(t, -1.0)]))?;
    let (problem, _) = flatten(&sys)?;
    let sol = backend.solve(&problem, options)?;
    let margin = if sol.status == SolveStatus::Optimal { sol.x[t] } else { f64::NAN };
    Ok((sol, margin))
}

/// Runs independent requests on a pool of `jobs` threads (all cores when
/// `None`); results come back in request order.
pub fn sweep(requests: &[AnalysisRequest], jobs: Option<usize>, backend: &dyn Backend) -> Result<Vec<Result<AnalysisResult>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| IqcError::InvalidArgument {
            arg: "jobs",
            reason: e.to_string(),
        })?;
    Ok(pool.install(|| requests.par_iter().map(|r| compute_gamma_star_with(r, backend)).collect()))
}

/// `min_{1 <= T <= T_max} sum_{t<T} v_t^T P v_t - xi_T^T Z xi_T` for the
/// filter driven by `z` and `w_t` = the oracle's subgradient at `z_t`.
pub fn verify_iqc_empirically(p: &MultiplierParam, f: &dyn ConvexOracle, z: &[Vector], t_max: usize) -> Result<f64> {
    let report = check_hyperdominance(&p.m(p.t0())?, HYPERDOMINANCE_TOL)?;
    if !report.pass {
        return Err(IqcError::NotHyperdominant {
            worst_margin: report.worst_margin(),
        });
    }
    if f.dim() != p.d {
        return Err(IqcError::dim("f", p.d, f.dim()));
    }
    if let Some(bad) = z.iter().find(|v| v.len() != p.d) {
        return Err(IqcError::dim("z", p.d, bad.len()));
    }
    let horizon = t_max.min(z.len());
    let w: Vec<Vector> = z[..horizon].iter().map(|v| f.subgradient(v)).collect();
    let (xi, v) = p.filter().respond(&z[..horizon], &w);
    let (supply, terminal) = (p.supply(), p.terminal());
    let mut acc = 0.0;
    let mut worst = f64::INFINITY;
    for t in 0..horizon {
        acc += v[t].dot(&(&supply * &v[t]));
        let xi_t = &xi[t + 1];
        worst = worst.min(acc - xi_t.dot(&(&terminal * xi_t)));
    }
    Ok(if horizon == 0 { 0.0 } else { worst })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    /// Partial sums of `|x_t|^2 + |w_t|^2`.
    pub partial_sums: Vec<f64>,
    /// Total energy over `|x_0|^2` (0 for `x_0 = 0`).
    pub constant: f64,
    /// Growth of the partial sums over the last quarter of the horizon.
    pub tail: f64,
    pub converged: bool,
    pub pass: bool,
}

const ENERGY_TAIL_TOL: f64 = 1e-8;

/// Checks that the energy partial sums settle (tail below 1e-8 relative to
/// `|x_0|^2`) and, when `bound` is given, that the empirical constant stays
/// below it.
pub fn stability_energy_check(traj: &Trajectory, x0: &Vector, bound: Option<f64>) -> EnergyReport {
    let mut partial_sums = Vec::with_capacity(traj.horizon());
    let mut acc = 0.0;
    for (x, w) in traj.x.iter().zip(&traj.w) {
        acc += x.norm_squared() + w.norm_squared();
        partial_sums.push(acc);
    }
    let r0 = x0.norm_squared();
    let scale = if r0 > 0.0 { r0 } else { 1.0 };
    let tail = match partial_sums.len() {
        0 => 0.0,
        n => (partial_sums[n - 1] - partial_sums[n - 1 - n / 4]) / scale,
    };
    let finite = partial_sums.iter().all(|s| s.is_finite());
    let converged = finite && tail < ENERGY_TAIL_TOL;
    let constant = if r0 > 0.0 { acc / r0 } else { 0.0 };
    let pass = converged && bound.is_none_or(|b| constant <= b);
    EnergyReport {
        partial_sums,
        constant,
        tail,
        converged,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::Builtin;
    use crate::sim::simulate_lure;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn example_plant_is_schur() {
        let p = example_plant(1.0).unwrap();
        assert!(is_schur(&p.a, 0.0));
        assert_eq!(p.d[(0, 0)], -1.0);
        assert!(example_plant(0.0).is_err());
    }

    #[test]
    fn non_schur_plant_is_rejected() {
        let m = |v| Mat::from_element(1, 1, v);
        let p = PlantRealization::new(m(1.2), m(1.0), m(1.0), m(0.0), m(1.0)).unwrap();
        let req = AnalysisRequest::new(p, 0, 0, AnalysisMode::Static).unwrap();
        assert!(matches!(compute_gamma_star(&req), Err(IqcError::NotSchur { .. })));
    }

    #[test]
    fn static_mode_requires_zero_orders() {
        assert!(AnalysisRequest::new(example_plant(1.0).unwrap(), 1, 0, AnalysisMode::Static).is_err());
    }

    #[test]
    fn static_analysis_is_verified() {
        let req = AnalysisRequest::new(example_plant(1.0).unwrap(), 0, 0, AnalysisMode::Static).unwrap();
        let r = compute_gamma_star(&req).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal, "{}", r.message);
        assert!(r.verified(), "{:?} {:?}", r.verification.as_ref().and_then(|v| v.worst().cloned()), r.hyperdominance);
        assert!(r.gamma.unwrap() > 0.0);
    }

    #[test]
    fn static_analysis_without_interior_is_infeasible() {
        let req = AnalysisRequest::new(example_plant(3.0).unwrap(), 0, 0, AnalysisMode::Static).unwrap();
        let r = compute_gamma_star(&req).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible, "{}", r.message);
        assert!(r.interior_margin.abs() <= INTERIOR_TOL);
        assert_eq!(r.gamma, None);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn zero_signal_has_zero_margin() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = crate::multiplier::sample_feasible(&mut rng, 2, 1, 1, false);
        let f = Builtin::scalar_quadratic(1.0).unwrap();
        let z = vec![Vector::zeros(1); 6];
        assert_eq!(verify_iqc_empirically(&p, &f, &z, 6).unwrap(), 0.0);
    }

    #[test]
    fn static_multiplier_margin_is_passivity_sum() {
        let p = MultiplierParam::new(vec![0.7], vec![0.3], Mat::zeros(0, 0), 1).unwrap();
        let f = Builtin::scaled_abs(Vector::from_element(1, 2.0)).unwrap();
        let z: Vec<Vector> = [0.5, -1.0, 2.0].iter().map(|v| Vector::from_element(1, *v)).collect();
        // 2 (lambda_0 + lambda~_0) sum z w with w = 2 sign(z): prefix sums 2, 6, 14
        let got = verify_iqc_empirically(&p, &f, &z, 3).unwrap();
        assert!((got - 2.0).abs() < 1e-12);
    }

    #[test]
    fn non_hyperdominant_parameters_are_rejected() {
        let p = MultiplierParam::new(vec![-1.0], vec![0.0], Mat::zeros(0, 0), 1).unwrap();
        let f = Builtin::scalar_quadratic(1.0).unwrap();
        assert!(matches!(
            verify_iqc_empirically(&p, &f, &[Vector::zeros(1)], 1),
            Err(IqcError::NotHyperdominant { .. })
        ));
    }

    #[test]
    fn energy_check_separates_stable_and_unstable() {
        let m = |v| Mat::from_element(1, 1, v);
        let f = Builtin::scalar_quadratic(0.1).unwrap();
        let x0 = Vector::from_element(1, 1.0);
        let stable = PlantRealization::new(m(0.5), m(0.0), m(1.0), m(0.0), m(1.0)).unwrap();
        let r = stability_energy_check(&simulate_lure(&stable, &f, &x0, 200).unwrap(), &x0, None);
        assert!(r.converged && r.pass);
        assert!((r.constant - (1.0 + 0.01) / (1.0 - 0.25)).abs() < 1e-9);
        let unstable = PlantRealization::new(m(1.1), m(0.0), m(1.0), m(0.0), m(1.0)).unwrap();
        assert!(!stability_energy_check(&simulate_lure(&unstable, &f, &x0, 200).unwrap(), &x0, None).converged);
        let zero = simulate_lure(&stable, &f, &Vector::zeros(1), 50).unwrap();
        let r = stability_energy_check(&zero, &Vector::zeros(1), Some(0.0));
        assert!(r.partial_sums.iter().all(|s| *s == 0.0) && r.pass);
    }
}
