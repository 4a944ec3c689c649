//! Convex functions with `f(0) = 0` and `0 ∈ ∂f(0)`, their subgradients,
//! proximal maps and conjugates, plus checks of the dissipation
//! inequalities that link convexity to passivity.

mod builtin;
mod conjugate;
mod verify;

pub use builtin::{Builtin, BuiltinKind, BuiltinSpec, PiecewiseSlope};
pub use conjugate::{ConjugateEval, ConjugateOracle};
pub use verify::{
    check_cyclic_monotonicity, round_trip_from_cycle, verify_conjugate_dissipation,
    verify_storage_decrease, verify_subgradient_dissipation, RoundTrip, ShiftTrajectory,
    SlackStatus, SlackReport, StorageSlack,
};

use crate::error::{IqcError, Result};
use crate::linalg::Vector;

/// Value of `f*` at a point when a closed form exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedConjugate {
    Finite(f64),
    Infinite,
}

/// A finite-valued convex function normalized so that `f(0) = 0` and
/// `0 ∈ ∂f(0)`.
pub trait ConvexOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &Vector) -> f64;

    /// One element of `∂f(x)`. Builtins pick the lexicographically smallest
    /// extreme subgradient at kinks.
    fn subgradient(&self, x: &Vector) -> Vector;

    /// A finite set whose convex hull is `∂f(x)`, when known.
    fn extreme_subgradients(&self, x: &Vector) -> Vec<Vector> {
        vec![self.subgradient(x)]
    }

    /// `argmin_z f(z) + |z - v|^2 / (2t)`.
    fn prox(&self, t: f64, v: &Vector) -> Result<Vector> {
        numeric_prox(self, t, v)
    }

    fn closed_conjugate(&self, _x: &Vector) -> Option<ClosedConjugate> {
        None
    }

    /// Lipschitz constant of the gradient for differentiable `f`.
    fn gradient_lipschitz(&self) -> Option<f64> {
        None
    }
}

/// Oracle built from plain closures; prox and conjugate are computed
/// numerically.
pub struct FnOracle<V, G>
where
    V: Fn(&Vector) -> f64 + Send + Sync,
    G: Fn(&Vector) -> Vector + Send + Sync,
{
    pub dim: usize,
    pub value: V,
    pub subgradient: G,
    pub lipschitz: Option<f64>,
}

impl<V, G> ConvexOracle for FnOracle<V, G>
where
    V: Fn(&Vector) -> f64 + Send + Sync,
    G: Fn(&Vector) -> Vector + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &Vector) -> f64 {
        (self.value)(x)
    }
    fn subgradient(&self, x: &Vector) -> Vector {
        (self.subgradient)(x)
    }
    fn gradient_lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }
}

const PROX_TOL: f64 = 1e-12;
const PROX_MAX_ITER: usize = 50_000;

/// Proximal map for oracle-only functions. Gradient descent when a gradient
/// Lipschitz bound is known, otherwise a subgradient method on the strongly
/// convex objective; fails with the final residual if it does not settle.
pub fn numeric_prox<F: ConvexOracle + ?Sized>(f: &F, t: f64, v: &Vector) -> Result<Vector> {
    if t <= 0.0 || !t.is_finite() {
        return Err(IqcError::InvalidArgument {
            arg: "t",
            reason: format!("prox step must be positive, got {t}"),
        });
    }
    let residual = |z: &Vector| ((v - z) / t - f.subgradient(z)).norm();
    let scale = 1.0 + v.norm();
    let mut z = v.clone();
    if let Some(lip) = f.gradient_lipschitz() {
        let step = 1.0 / (lip + 1.0 / t);
        for _ in 0..PROX_MAX_ITER {
            let grad = f.subgradient(&z) + (&z - v) / t;
            z -= grad * step;
            if residual(&z) <= PROX_TOL * scale {
                return Ok(z);
            }
        }
    } else {
        let mut best = z.clone();
        let mut best_res = residual(&z);
        for k in 0..PROX_MAX_ITER {
            let grad = f.subgradient(&z) + (&z - v) / t;
            z -= grad * (2.0 * t / (k as f64 + 2.0));
            let r = residual(&z);
            if r < best_res {
                best_res = r;
                best = z.clone();
            }
            if best_res <= PROX_TOL * scale {
                return Ok(best);
            }
        }
        z = best;
    }
    Err(IqcError::NoConvergence {
        iterations: PROX_MAX_ITER,
        residual: residual(&z),
    })
}

/// Picks the subgradient at kinks pseudo-randomly (but reproducibly) among
/// the extreme subgradients of the wrapped oracle.
pub struct RandomizedSelection<'a> {
    pub inner: &'a dyn ConvexOracle,
    pub seed: u64,
}

fn mix(mut h: u64) -> u64 {
    h ^= h >> 33;
    h = h.wrapping_mul(0xff51afd7ed558ccd);
    h ^= h >> 33;
    h = h.wrapping_mul(0xc4ceb9fe1a85ec53);
    h ^ (h >> 33)
}

impl ConvexOracle for RandomizedSelection<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        self.inner.value(x)
    }
    fn subgradient(&self, x: &Vector) -> Vector {
        let mut ext = self.inner.extreme_subgradients(x);
        if ext.len() <= 1 {
            return ext.pop().unwrap_or_else(|| self.inner.subgradient(x));
        }
        let h = x
            .iter()
            .fold(mix(self.seed), |acc, v| mix(acc ^ v.to_bits()));
        ext.swap_remove((h % ext.len() as u64) as usize)
    }
    fn extreme_subgradients(&self, x: &Vector) -> Vec<Vector> {
        self.inner.extreme_subgradients(x)
    }
    fn prox(&self, t: f64, v: &Vector) -> Result<Vector> {
        self.inner.prox(t, v)
    }
    fn closed_conjugate(&self, x: &Vector) -> Option<ClosedConjugate> {
        self.inner.closed_conjugate(x)
    }
    fn gradient_lipschitz(&self) -> Option<f64> {
        self.inner.gradient_lipschitz()
    }
}

/// Largest violation of the subgradient inequality `f(y) >= f(z) + g^T (y - z)`
/// over the probes, with `g` supplied by the caller (0 when none is violated).
pub fn subgradient_inequality_violation<F: ConvexOracle + ?Sized>(
    f: &F,
    z: &Vector,
    g: &Vector,
    probes: &[Vector],
) -> f64 {
    let fz = f.value(z);
    probes
        .iter()
        .map(|y| fz + g.dot(&(y - z)) - f.value(y))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeric_prox_matches_closed_form_quadratic() {
        let beta = 3.0;
        let f = FnOracle {
            dim: 1,
            value: move |x: &Vector| 0.5 * beta * x[0] * x[0],
            subgradient: move |x: &Vector| x * beta,
            lipschitz: Some(beta),
        };
        let v = Vector::from_element(1, 2.0);
        let z = numeric_prox(&f, 0.5, &v).unwrap();
        assert!((z[0] - 2.0 / (1.0 + 0.5 * beta)).abs() < 1e-10);
    }

    #[test]
    fn numeric_prox_nonsmooth_abs() {
        let f = FnOracle {
            dim: 1,
            value: |x: &Vector| x[0].abs(),
            subgradient: |x: &Vector| Vector::from_element(1, if x[0] > 0.0 { 1.0 } else if x[0] < 0.0 { -1.0 } else { 0.0 }),
            lipschitz: None,
        };
        let z = numeric_prox(&f, 1.0, &Vector::from_element(1, 3.0)).unwrap();
        assert!((z[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn numeric_prox_rejects_bad_step() {
        let f = Builtin::quadratic(crate::linalg::eye(1)).unwrap();
        assert!(numeric_prox(&f, 0.0, &Vector::zeros(1)).is_err());
    }

    #[test]
    fn numeric_prox_reports_residual_on_failure() {
        // the minimizer sits on the kink, where a gradient residual cannot certify it
        let f = FnOracle {
            dim: 1,
            value: |x: &Vector| x[0].abs(),
            subgradient: |x: &Vector| Vector::from_element(1, x[0].signum()),
            lipschitz: None,
        };
        match numeric_prox(&f, 1.0, &Vector::from_element(1, 0.5)) {
            Err(IqcError::NoConvergence { residual, .. }) => assert!(residual > 0.49),
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn randomized_selection_stays_in_extreme_set() {
        let f = Builtin::scaled_abs(Vector::from_vec(vec![1.0, 2.0])).unwrap();
        let sel = RandomizedSelection { inner: &f, seed: 3 };
        let x = Vector::zeros(2);
        let ext = f.extreme_subgradients(&x);
        assert_eq!(ext.len(), 4);
        let g = sel.subgradient(&x);
        assert!(ext.contains(&g));
    }
}
