//! Randomized property suites, selectable by name from the command line.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::verify_iqc_empirically;
use crate::convex::{
    check_cyclic_monotonicity, verify_conjugate_dissipation, verify_storage_decrease, Builtin, BuiltinKind,
    ConjugateOracle, ConvexOracle, ShiftTrajectory, SlackStatus,
};
use crate::error::{IqcError, Result};
use crate::linalg::{max_abs, spectral_radius, Mat, Vector};
use crate::lmi::{fdi_check, kyp_feasibility};
use crate::multiplier::{check_hyperdominance, combined_filter, sample_feasible};
use crate::solver::{flatten, solve, SolveStatus, SolverOptions};
use crate::statespace::{interconnect, lift, PlantRealization, StateSpace};

pub const SUITES: [&str; 9] = [
    "lifting",
    "interconnection",
    "cyclic-monotonicity",
    "conjugate-dissipation",
    "storage-decrease",
    "hyperdominance-propagation",
    "iqc-terminal",
    "kyp-fdi",
    "solver-analytic",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub cases: usize,
    /// Smallest margin seen; nonnegative (up to the suite tolerance) passes.
    pub worst_margin: f64,
    pub tolerance: f64,
    pub failures: Vec<String>,
    pub pass: bool,
}

struct Tally {
    cases: usize,
    worst: f64,
    tol: f64,
    failures: Vec<String>,
}

impl Tally {
    fn new(tol: f64) -> Self {
        Self {
            cases: 0,
            worst: f64::INFINITY,
            tol,
            failures: Vec::new(),
        }
    }

    fn margin(&mut self, m: f64, what: impl FnOnce() -> String) {
        self.cases += 1;
        self.worst = self.worst.min(m);
        if !(m >= -self.tol) {
            self.failures.push(format!("{} (margin {m:e})", what()));
        }
    }

    fn fail(&mut self, what: String) {
        self.cases += 1;
        self.failures.push(what);
    }

    fn report(self, suite: &str, seed: u64) -> SuiteReport {
        SuiteReport {
            suite: suite.to_string(),
            seed,
            cases: self.cases,
            worst_margin: self.worst,
            tolerance: self.tol,
            pass: self.failures.is_empty(),
            failures: self.failures,
        }
    }
}

pub fn run_suite(name: &str, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tally = match name {
        "lifting" => lifting(&mut rng),
        "interconnection" => interconnection(&mut rng),
        "cyclic-monotonicity" => cyclic(&mut rng),
        "conjugate-dissipation" => conjugate(&mut rng)?,
        "storage-decrease" => storage(&mut rng)?,
        "hyperdominance-propagation" => propagation(&mut rng)?,
        "iqc-terminal" => iqc(&mut rng)?,
        "kyp-fdi" => kyp_fdi(&mut rng)?,
        "solver-analytic" => solver_analytic(&mut rng)?,
        other => {
            return Err(IqcError::InvalidArgument {
                arg: "suite",
                reason: format!("unknown suite `{other}`, expected one of {}", SUITES.join(", ")),
            })
        }
    };
    Ok(tally.report(name, seed))
}

fn rand_mat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Mat {
    Mat::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
}

fn rand_vec(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Vector {
    Vector::from_fn(d, |_, _| rng.gen_range(-scale..scale))
}

/// Random matrix rescaled to spectral radius `rho`.
fn stable(rng: &mut ChaCha8Rng, n: usize, rho: f64) -> Mat {
    let a = rand_mat(rng, n, n);
    let r = spectral_radius(&a);
    if r > 0.0 {
        a * (rho / r)
    } else {
        a
    }
}

fn lifting(rng: &mut ChaCha8Rng) -> Tally {
    let mut t = Tally::new(1e-12);
    for case in 0..100 {
        let (n, m, k) = (rng.gen_range(1..=4), rng.gen_range(1..=3), rng.gen_range(1..=3));
        let sys = StateSpace::new(rand_mat(rng, n, n), rand_mat(rng, n, m), rand_mat(rng, k, n), rand_mat(rng, k, m))
            .expect("consistent shapes");
        let horizon = rng.gen_range(1..=8);
        let x0 = rand_vec(rng, n, 1.0);
        let u: Vec<Vector> = (0..horizon).map(|_| rand_vec(rng, m, 1.0)).collect();
        let (xs, ys) = sys.simulate(&x0, &u);
        let l = lift(&sys, horizon).expect("horizon >= 1");
        let ustack = Vector::from_iterator(m * horizon, u.iter().flat_map(|v| v.iter().copied()));
        let ystack = Vector::from_iterator(k * horizon, ys.iter().flat_map(|v| v.iter().copied()));
        let scale = 1.0 + max_abs(&l.c_t) + max_abs(&l.d_t);
        let ex = (&l.a_t * &x0 + &l.b_t * &ustack - &xs[horizon]).amax() / scale;
        let ey = (&l.c_t * &x0 + &l.d_t * &ustack - ystack).amax() / scale;
        t.margin(-ex.max(ey), || format!("case {case}: lifted map differs from the recursion"));
    }
    t
}

fn interconnection(rng: &mut ChaCha8Rng) -> Tally {
    let mut t = Tally::new(1e-12);
    for case in 0..50 {
        let (n, d) = (rng.gen_range(1..=4), rng.gen_range(1..=2));
        let (nu, nut) = (rng.gen_range(0..=3), rng.gen_range(0..=3));
        let plant = PlantRealization::new(
            stable(rng, n, 0.9),
            rand_mat(rng, n, d),
            rand_mat(rng, d, n),
            rand_mat(rng, d, d),
            rand_mat(rng, 1, n),
        )
        .expect("consistent shapes");
        let filter = combined_filter(nu, nut, d);
        let aug = interconnect(&filter, &plant).expect("matching channels");
        let x0 = rand_vec(rng, n, 1.0);
        let w: Vec<Vector> = (0..20).map(|_| rand_vec(rng, d, 1.0)).collect();
        let (_, z) = plant.linear_part().simulate(&x0, &w);
        let (_, v) = filter.respond(&z, &w);
        let eta0 = Vector::from_iterator(filter.states() + n, std::iter::repeat_n(0.0, filter.states()).chain(x0.iter().copied()));
        let (_, va) = aug.as_state_space().simulate(&eta0, &w);
        let err = v.iter().zip(&va).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max);
        t.margin(-err, || format!("case {case}: cascade and augmented realization differ"));
    }
    t
}

fn builtin(rng: &mut ChaCha8Rng, kind: BuiltinKind, d: usize) -> Builtin {
    Builtin::sample(rng, kind, d)
}

fn cyclic(rng: &mut ChaCha8Rng) -> Tally {
    let mut t = Tally::new(1e-10);
    for kind in BuiltinKind::ALL {
        for case in 0..200 {
            let d = rng.gen_range(1..=3);
            let f = builtin(rng, kind, d);
            let m = rng.gen_range(1..=6);
            let cycle: Vec<Vector> = (0..=m).map(|_| rand_vec(rng, d, 5.0)).collect();
            let margin = check_cyclic_monotonicity(|x| f.subgradient(x), &cycle).expect("nonempty cycle");
            t.margin(margin, || format!("{kind:?} case {case}: cycle sum negative"));
        }
    }
    let rotation = |x: &Vector| Vector::from_vec(vec![-x[1], x[0]]);
    let cycle = [
        Vector::from_vec(vec![1.0, 0.0]),
        Vector::from_vec(vec![0.0, 1.0]),
        Vector::from_vec(vec![-1.0, 0.0]),
    ];
    let r = check_cyclic_monotonicity(rotation, &cycle).expect("nonempty cycle");
    if r >= 0.0 {
        t.fail(format!("rotation was not rejected (sum {r})"));
    } else {
        t.cases += 1;
    }
    t
}

fn conjugate(rng: &mut ChaCha8Rng) -> Result<Tally> {
    let mut t = Tally::new(1e-9);
    for kind in BuiltinKind::ALL {
        let d = rng.gen_range(1..=3);
        let f = builtin(rng, kind, d);
        let fstar = ConjugateOracle::new(&f, 100.0)?;
        let samples: Vec<(Vector, Vector)> = (0..500)
            .map(|_| (f.subgradient(&rand_vec(rng, d, 5.0)), rand_vec(rng, d, 5.0)))
            .collect();
        let r = verify_conjugate_dissipation(&fstar, &samples, t.tol)?;
        if r.status == SlackStatus::Unreliable {
            t.fail(format!("{kind:?}: {} conjugate values could not be certified", r.unreliable));
        } else {
            t.margin(r.worst, || format!("{kind:?}: conjugate dissipation violated"));
        }
    }
    Ok(t)
}

fn storage(rng: &mut ChaCha8Rng) -> Result<Tally> {
    let mut t = Tally::new(1e-9);
    for kind in BuiltinKind::ALL {
        let d = rng.gen_range(1..=2);
        let f = builtin(rng, kind, d);
        let fstar = ConjugateOracle::new(&f, 100.0)?;
        for case in 0..10 {
            let nu = rng.gen_range(1..=3);
            let k = rng.gen_range(1..=nu);
            let inputs: Vec<Vector> = (0..50).map(|_| rand_vec(rng, d, 3.0)).collect();
            let traj = ShiftTrajectory::generate(rand_vec(rng, nu * d, 3.0), inputs, nu)?;
            let s = verify_storage_decrease(&fstar, k, &traj, t.tol)?;
            t.margin(s.primal, || format!("{kind:?} case {case}: primal storage increased"));
            if s.conjugate.status == SlackStatus::Unreliable {
                t.fail(format!("{kind:?} case {case}: conjugate storage not certified"));
            } else {
                t.margin(s.conjugate.worst, || format!("{kind:?} case {case}: conjugate storage increased"));
            }
        }
    }
    Ok(t)
}

fn propagation(rng: &mut ChaCha8Rng) -> Result<Tally> {
    let mut t = Tally::new(1e-9);
    for case in 0..100 {
        let (nu, nut) = (rng.gen_range(0..=3), rng.gen_range(0..=3));
        let tight = rng.gen_bool(0.5);
        let p = sample_feasible(rng, nu, nut, 1, tight);
        let t0 = p.t0();
        for horizon in 1..=3 * t0 {
            let r = check_hyperdominance(&p.m(horizon)?, t.tol)?;
            t.margin(r.worst_margin(), || format!("case {case} ({nu},{nut}): M_{horizon} leaves the cone"));
        }
    }
    Ok(t)
}

fn iqc(rng: &mut ChaCha8Rng) -> Result<Tally> {
    let mut t = Tally::new(1e-9);
    for case in 0..500 {
        let (nu, nut) = (rng.gen_range(0..=3), rng.gen_range(0..=3));
        let d = rng.gen_range(1..=2);
        let tight = rng.gen_bool(0.5);
        let p = sample_feasible(rng, nu, nut, d, tight);
        let f = builtin(rng, BuiltinKind::MaxAffine, d);
        let len = rng.gen_range(1..=20);
        let z: Vec<Vector> = (0..len).map(|_| rand_vec(rng, d, 3.0)).collect();
        let m = verify_iqc_empirically(&p, &f, &z, len)?;
        t.margin(m, || format!("case {case} ({nu},{nut}): IQC margin negative"));
    }
    Ok(t)
}

/// Random stable SISO system with `n <= 2` states.
pub(crate) fn random_siso(rng: &mut ChaCha8Rng) -> StateSpace {
    let n = rng.gen_range(1..=2);
    let rho = rng.gen_range(0.1..0.9);
    StateSpace::new(stable(rng, n, rho), rand_mat(rng, n, 1), rand_mat(rng, 1, n), rand_mat(rng, 1, 1))
        .expect("consistent shapes")
}

/// Band around zero in which the grid and the LMI may disagree.
pub(crate) const KYP_BAND: f64 = 1e-6;
/// Bound on the storage matrix in the feasibility program.
pub(crate) const KYP_RADIUS: f64 = 1e4;

fn kyp_fdi(rng: &mut ChaCha8Rng) -> Result<Tally> {
    let mut t = Tally::new(0.0);
    for case in 0..50 {
        let sys = random_siso(rng);
        let r = rand_mat(rng, 2, 2);
        let p = (&r + r.transpose()) * 0.5;
        let fdi = fdi_check(&sys, &p, 512)?;
        let (problem, _) = flatten(&kyp_feasibility(&sys, &p, KYP_RADIUS)?)?;
        let sol = solve(&problem, &SolverOptions::default())?;
        if sol.status != SolveStatus::Optimal {
            t.fail(format!("case {case}: solver returned {}", sol.status));
            continue;
        }
        let lmi_feasible = -sol.primal_objective > 0.0;
        let agree = lmi_feasible == (fdi.worst_margin > 0.0) || fdi.worst_margin.abs() <= KYP_BAND;
        t.cases += 1;
        if !agree {
            t.failures.push(format!(
                "case {case}: LMI says {lmi_feasible}, grid margin {:e}",
                fdi.worst_margin
            ));
        }
    }
    t.worst = 0.0;
    Ok(t)
}

fn solver_analytic(rng: &mut ChaCha8Rng) -> Result<Tally> {
    use crate::linalg::{max_eig, svec, svec_len, zeros};
    use crate::solver::{ConeDims, ConicProblem};
    let mut t = Tally::new(1e-6);
    for case in 0..100 {
        let k = rng.gen_range(1..=6);
        let b = rand_mat(rng, k, k);
        let m = &b + b.transpose();
        // minimize gamma s.t. gamma I - M >= 0
        let mut g = zeros(svec_len(k), 1);
        g.set_column(0, &Vector::from_vec(svec(&Mat::identity(k, k))).map(|v| -v));
        let p = ConicProblem {
            c: Vector::from_element(1, 1.0),
            g,
            h: Vector::from_vec(svec(&(-&m))),
            a: zeros(0, 1),
            b: Vector::zeros(0),
            cones: ConeDims { linear: 0, psd: vec![k] },
        };
        let sol = solve(&p, &SolverOptions::default())?;
        if sol.status != SolveStatus::Optimal {
            t.fail(format!("case {case}: solver returned {}", sol.status));
            continue;
        }
        let err = (sol.x[0] - max_eig(&m)).abs();
        t.margin(-err, || format!("case {case}: largest eigenvalue off"));
    }
    Ok(t)
}
