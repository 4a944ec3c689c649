use super::{ConjugateEval, ConjugateOracle, ConvexOracle};
use crate::error::{IqcError, Result};
use crate::linalg::Vector;

const SHIFT_TOL: f64 = 1e-12;

/// `sum_j F(v_j)^T (v_j - v_{j+1})` with `v_{m+1} = v_0`.
pub fn check_cyclic_monotonicity<F>(map: F, cycle: &[Vector]) -> Result<f64>
where
    F: Fn(&Vector) -> Vector,
{
    let first = cycle.first().ok_or(IqcError::InvalidArgument {
        arg: "cycle",
        reason: "cycle is empty".into(),
    })?;
    let d = first.len();
    if let Some(bad) = cycle.iter().find(|v| v.len() != d) {
        return Err(IqcError::dim("cycle point", d, bad.len()));
    }
    let m = cycle.len();
    Ok((0..m)
        .map(|j| map(&cycle[j]).dot(&(&cycle[j] - &cycle[(j + 1) % m])))
        .sum())
}

/// Trajectory of `x+ = x + u`, `y in F(x + u)` that returns to its start.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrip {
    pub states: Vec<Vector>,
    pub inputs: Vec<Vector>,
    pub outputs: Vec<Vector>,
}

impl RoundTrip {
    pub fn supply(&self) -> f64 {
        self.outputs.iter().zip(&self.inputs).map(|(y, u)| y.dot(u)).sum()
    }

    pub fn is_closed(&self) -> bool {
        match (self.states.first(), self.states.last()) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }
}

/// Runs the cycle `v_0, ..., v_m` backwards as a round trip: `x_t = v_{m+1-t}`,
/// `u_t = v_{m-t} - v_{m+1-t}`, `y_t = F(v_{m-t})`. Its supply equals the
/// cyclic-monotonicity sum of the same cycle.
pub fn round_trip_from_cycle<F>(map: F, cycle: &[Vector]) -> Result<RoundTrip>
where
    F: Fn(&Vector) -> Vector,
{
    if cycle.is_empty() {
        return Err(IqcError::InvalidArgument {
            arg: "cycle",
            reason: "cycle is empty".into(),
        });
    }
    let m = cycle.len() - 1;
    let v = |j: usize| &cycle[j % (m + 1)];
    let states = (0..=m + 1).map(|t| v(m + 1 - t).clone()).collect();
    let inputs = (0..=m).map(|t| v(m - t) - v(m + 1 - t)).collect();
    let outputs = (0..=m).map(|t| map(v(m - t))).collect();
    Ok(RoundTrip {
        states,
        inputs,
        outputs,
    })
}

/// Worst slack of `F(x+u)^T u - (f(x+u) - f(x))` over the samples, with
/// `F` the oracle's subgradient selection.
pub fn verify_subgradient_dissipation<F: ConvexOracle + ?Sized>(
    f: &F,
    samples: &[(Vector, Vector)],
) -> Result<f64> {
    if samples.is_empty() {
        return Err(IqcError::InvalidArgument {
            arg: "samples",
            reason: "no samples".into(),
        });
    }
    Ok(samples
        .iter()
        .map(|(x, u)| {
            let xu = x + u;
            f.subgradient(&xu).dot(u) - (f.value(&xu) - f.value(x))
        })
        .fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlackStatus {
    Verified,
    Violated,
    /// Some conjugate values could not be certified; the slack covers only
    /// the certified samples.
    Unreliable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlackReport {
    /// Minimum slack over certified samples (`+inf` if none were certified).
    pub worst: f64,
    pub status: SlackStatus,
    pub certified: usize,
    pub unreliable: usize,
}

impl SlackReport {
    fn new() -> Self {
        SlackReport {
            worst: f64::INFINITY,
            status: SlackStatus::Verified,
            certified: 0,
            unreliable: 0,
        }
    }

    fn push(&mut self, slack: Option<f64>) {
        match slack {
            Some(s) => {
                self.certified += 1;
                self.worst = self.worst.min(s);
            }
            None => self.unreliable += 1,
        }
    }

    fn finish(mut self, tol: f64) -> Self {
        self.status = if self.worst < -tol {
            SlackStatus::Violated
        } else if self.unreliable > 0 {
            SlackStatus::Unreliable
        } else {
            SlackStatus::Verified
        };
        self
    }
}

fn certified(e: ConjugateEval) -> Option<f64> {
    match e {
        ConjugateEval::Value(v) => Some(v),
        _ => None,
    }
}

/// Worst slack of `u^T (v - x) - (f*(v) - f*(x))` with `v` the subgradient
/// selection at `u`. Each `x` must be a subgradient of `f` somewhere.
pub fn verify_conjugate_dissipation(
    fstar: &ConjugateOracle<'_>,
    samples: &[(Vector, Vector)],
    tol: f64,
) -> Result<SlackReport> {
    if samples.is_empty() {
        return Err(IqcError::InvalidArgument {
            arg: "samples",
            reason: "no samples".into(),
        });
    }
    let f = fstar.base();
    let mut report = SlackReport::new();
    for (x, u) in samples {
        let v = f.subgradient(u);
        let slack = match (certified(fstar.eval(&v)), certified(fstar.eval(x))) {
            (Some(sv), Some(sx)) => Some(u.dot(&(&v - x)) - (sv - sx)),
            _ => None,
        };
        report.push(slack);
    }
    Ok(report.finish(tol))
}

/// States `x_0..x_T` of the shift register `x+ = (x^2, ..., x^nu, u)` with
/// blocks of dimension `d`, and the inputs `u_0..u_{T-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftTrajectory {
    pub nu: usize,
    pub d: usize,
    pub states: Vec<Vector>,
    pub inputs: Vec<Vector>,
}

fn shift(x: &Vector, u: &Vector, nu: usize, d: usize) -> Vector {
    let mut next = Vector::zeros(nu * d);
    if nu > 1 {
        next.rows_mut(0, (nu - 1) * d).copy_from(&x.rows(d, (nu - 1) * d));
    }
    next.rows_mut((nu - 1) * d, d).copy_from(u);
    next
}

impl ShiftTrajectory {
    pub fn generate(x0: Vector, inputs: Vec<Vector>, nu: usize) -> Result<Self> {
        if nu == 0 {
            return Err(IqcError::InvalidArgument {
                arg: "nu",
                reason: "shift register needs nu >= 1".into(),
            });
        }
        if !x0.len().is_multiple_of(nu) {
            return Err(IqcError::dim("x0", format!("multiple of {nu}"), x0.len()));
        }
        let d = x0.len() / nu;
        if let Some(bad) = inputs.iter().find(|u| u.len() != d) {
            return Err(IqcError::dim("u", d, bad.len()));
        }
        let mut states = vec![x0];
        for u in &inputs {
            let next = shift(states.last().unwrap(), u, nu, d);
            states.push(next);
        }
        Ok(Self {
            nu,
            d,
            states,
            inputs,
        })
    }

    pub fn block(&self, t: usize, j: usize) -> Vector {
        self.states[t].rows((j - 1) * self.d, self.d).into_owned()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.nu * self.d;
        if self.nu == 0 || self.states.len() != self.inputs.len() + 1 {
            return Err(IqcError::MalformedTrajectory { step: 0 });
        }
        for (t, u) in self.inputs.iter().enumerate() {
            let (x, next) = (&self.states[t], &self.states[t + 1]);
            if x.len() != n || next.len() != n || u.len() != self.d {
                return Err(IqcError::MalformedTrajectory { step: t });
            }
            let expect = shift(x, u, self.nu, self.d);
            let scale = 1.0 + expect.amax();
            if (next - expect).amax() > SHIFT_TOL * scale {
                return Err(IqcError::MalformedTrajectory { step: t });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StorageSlack {
    /// `min_t dF(u_t)^T (u_t - x_t^k) - (V_k(x_{t+1}) - V_k(x_t))`.
    pub primal: f64,
    /// Same for the conjugate register driven by `v_t = dF(u_t)` with storage
    /// `V*_k`, supply `u_t^T (v_t - x*_t^k)`.
    pub conjugate: SlackReport,
}

/// Checks both storage functions `V_k = sum_{j>=k} f(x^j)` and
/// `V*_k = sum_{j>=k} f*(x^j)` along a shift-register trajectory. The
/// conjugate register is obtained by mapping every block through the
/// subgradient selection, which keeps it inside the image of the
/// subdifferential and preserves the shift structure.
pub fn verify_storage_decrease(
    fstar: &ConjugateOracle<'_>,
    k: usize,
    traj: &ShiftTrajectory,
    tol: f64,
) -> Result<StorageSlack> {
    let f = fstar.base();
    let nu = traj.nu;
    if k < 1 || k > nu {
        return Err(IqcError::InvalidArgument {
            arg: "k",
            reason: format!("need 1 <= k <= nu = {nu}, got {k}"),
        });
    }
    if traj.d != f.dim() {
        return Err(IqcError::dim("trajectory block", f.dim(), traj.d));
    }
    traj.validate()?;
    let storage = |t: usize| -> f64 { (k..=nu).map(|j| f.value(&traj.block(t, j))).sum() };
    let mut primal = f64::INFINITY;
    let mut conj = SlackReport::new();
    let dual_block = |t: usize, j: usize| f.subgradient(&traj.block(t, j));
    let dual_storage = |t: usize| -> Option<f64> {
        (k..=nu)
            .map(|j| certified(fstar.eval(&dual_block(t, j))))
            .sum::<Option<f64>>()
    };
    for (t, u) in traj.inputs.iter().enumerate() {
        let g = f.subgradient(u);
        let supply = g.dot(&(u - traj.block(t, k)));
        primal = primal.min(supply - (storage(t + 1) - storage(t)));

        let dual_supply = u.dot(&(&g - dual_block(t, k)));
        let slack = match (dual_storage(t + 1), dual_storage(t)) {
            (Some(a), Some(b)) => Some(dual_supply - (a - b)),
            _ => None,
        };
        conj.push(slack);
    }
    Ok(StorageSlack {
        primal,
        conjugate: conj.finish(tol),
    })
}
