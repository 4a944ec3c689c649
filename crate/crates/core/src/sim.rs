//! Closed-loop simulation of `x+ = A x + B w`, `z = C x + D w`, `w ∈ ∂f(z)`.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::convex::ConvexOracle;
use crate::error::{IqcError, Result};
use crate::linalg::{eye, Mat, Vector};
use crate::statespace::PlantRealization;

const LOOP_TOL: f64 = 1e-13;
const LOOP_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `x_0 .. x_T`.
    pub x: Vec<Vector>,
    /// `z_0 .. z_{T-1}`.
    pub z: Vec<Vector>,
    pub w: Vec<Vector>,
    /// `e_t = C_e x_t` for `t = 0 .. T`.
    pub e: Vec<Vector>,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.z.len()
    }

    /// Largest `|z_t - C x_t - D w_t|` along the trajectory.
    pub fn loop_residual(&self, plant: &PlantRealization) -> f64 {
        self.z
            .iter()
            .zip(&self.w)
            .zip(&self.x)
            .map(|((z, w), x)| (z - &plant.c * x - &plant.d * w).norm())
            .fold(0.0, f64::max)
    }

    /// One row per step `t < T`: `t, x.., z.., w.., e..`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let (n, d, p) = (
            self.x.first().map_or(0, |v| v.len()),
            self.z.first().map_or(0, |v| v.len()),
            self.e.first().map_or(0, |v| v.len()),
        );
        let mut header = vec!["t".to_string()];
        header.extend((0..n).map(|i| format!("x{i}")));
        header.extend((0..d).map(|i| format!("z{i}")));
        header.extend((0..d).map(|i| format!("w{i}")));
        header.extend((0..p).map(|i| format!("e{i}")));
        writeln!(out, "{}", header.join(","))?;
        for t in 0..self.horizon() {
            let mut row = vec![t.to_string()];
            for v in [&self.x[t], &self.z[t], &self.w[t], &self.e[t]] {
                row.extend(v.iter().map(|x| x.to_string()));
            }
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Uniformly distributed point on the unit sphere in `R^n` (empty for `n = 0`).
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vector {
    if n == 0 {
        return Vector::zeros(0);
    }
    loop {
        let v = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

/// How the algebraic loop `z = C x + D w(z)` is resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
enum LoopKind {
    Direct,
    /// `D = -alpha I`, `alpha > 0`: `z = prox_{alpha f}(C x)`.
    Prox(f64),
    /// Contraction `z <- C x + D ∇f(z)` with factor `|D| L < 1`.
    FixedPoint(f64),
}

fn loop_kind(plant: &PlantRealization, f: &dyn ConvexOracle) -> Result<LoopKind> {
    let d = &plant.d;
    if d.iter().all(|v| *v == 0.0) {
        return Ok(LoopKind::Direct);
    }
    let alpha = -d[(0, 0)];
    if alpha > 0.0 && (d + eye(d.nrows()) * alpha).iter().all(|v| *v == 0.0) {
        return Ok(LoopKind::Prox(alpha));
    }
    let norm = d.clone().svd(false, false).singular_values.max();
    match f.gradient_lipschitz() {
        Some(lip) if norm * lip < 1.0 => Ok(LoopKind::FixedPoint(norm * lip)),
        Some(lip) => Err(IqcError::IllPosedLoop(format!(
            "|D| L = {:.3e} >= 1 (|D| = {norm:.3e}, L = {lip:.3e})",
            norm * lip
        ))),
        None => Err(IqcError::IllPosedLoop(
            "general feedthrough needs a gradient Lipschitz bound on f".into(),
        )),
    }
}

fn resolve(kind: LoopKind, plant: &PlantRealization, f: &dyn ConvexOracle, cx: &Vector) -> Result<(Vector, Vector)> {
    match kind {
        LoopKind::Direct => Ok((cx.clone(), f.subgradient(cx))),
        LoopKind::Prox(alpha) => {
            let z = f.prox(alpha, cx)?;
            let w = (cx - &z) / alpha;
            Ok((z, w))
        }
        LoopKind::FixedPoint(rate) => {
            let mut z = cx.clone();
            let mut res = f64::INFINITY;
            for _ in 0..LOOP_MAX_ITER {
                let next = cx + &plant.d * f.subgradient(&z);
                res = (&next - &z).norm();
                z = next;
                // a contraction with factor `rate` is within res * rate / (1 - rate) of its fixed point
                if res * rate / (1.0 - rate) <= LOOP_TOL * (1.0 + z.norm()) {
                    let w = f.subgradient(&z);
                    return Ok((z, w));
                }
            }
            Err(IqcError::NoConvergence {
                iterations: LOOP_MAX_ITER,
                residual: res,
            })
        }
    }
}

/// Runs the loop for `horizon` steps from `x0`.
///
/// For `D = 0` the oracle's subgradient selection is used directly. For
/// `D = -alpha I` the loop is solved by the proximal map, which is exact
/// and unique. Any other `D` needs a differentiable `f` with
/// `|D| * Lip(∇f) < 1`, otherwise the loop is rejected as ill-posed.
pub fn simulate_lure(plant: &PlantRealization, f: &dyn ConvexOracle, x0: &Vector, horizon: usize) -> Result<Trajectory> {
    if x0.len() != plant.n() {
        return Err(IqcError::dim("x0", plant.n(), x0.len()));
    }
    if f.dim() != plant.d() {
        return Err(IqcError::dim("f", plant.d(), f.dim()));
    }
    let kind = loop_kind(plant, f)?;
    let mut x = Vec::with_capacity(horizon + 1);
    let mut z = Vec::with_capacity(horizon);
    let mut w = Vec::with_capacity(horizon);
    let mut xt = x0.clone();
    for _ in 0..horizon {
        let (zt, wt) = resolve(kind, plant, f, &(&plant.c * &xt))?;
        let next = &plant.a * &xt + &plant.b * &wt;
        x.push(std::mem::replace(&mut xt, next));
        z.push(zt);
        w.push(wt);
    }
    x.push(xt);
    let e = x.iter().map(|v| &plant.ce * v).collect();
    Ok(Trajectory { x, z, w, e })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeCheck {
    pub pass: bool,
    /// `max_t |C_e x_t| / |x_0|` (0 when `x_0 = 0`).
    pub worst_ratio: f64,
    pub worst_t: usize,
    /// First step whose ratio exceeds `gamma`.
    pub first_violation: Option<usize>,
}

/// Compares `|C_e x_t| / |x_0|` against `gamma` at every step.
pub fn check_amplitude_bound(traj: &Trajectory, ce: &Mat, gamma: f64, x0: &Vector) -> Result<AmplitudeCheck> {
    if let Some(x) = traj.x.first() {
        if ce.ncols() != x.len() {
            return Err(IqcError::dim("C_e", format!("p x {}", x.len()), format!("{}x{}", ce.nrows(), ce.ncols())));
        }
    }
    let r0 = x0.norm();
    let mut check = AmplitudeCheck {
        pass: true,
        worst_ratio: 0.0,
        worst_t: 0,
        first_violation: None,
    };
    if r0 == 0.0 {
        return Ok(check);
    }
    for (t, x) in traj.x.iter().enumerate() {
        let ratio = (ce * x).norm() / r0;
        if ratio > check.worst_ratio {
            check.worst_ratio = ratio;
            check.worst_t = t;
        }
        if ratio > gamma && check.first_violation.is_none() {
            check.first_violation = Some(t);
            check.pass = false;
        }
    }
    Ok(check)
}
