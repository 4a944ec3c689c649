use super::{ClosedConjugate, ConvexOracle};
use crate::error::{IqcError, Result};
use crate::linalg::Vector;

const TARGET_ACCURACY: f64 = 1e-9;
const MAX_ITER: usize = 20_000;

/// Outcome of evaluating `f*(x) = sup_w x^T w - f(w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConjugateEval {
    Value(f64),
    Infinite,
    /// The numeric search could not certify the supremum, either because the
    /// maximizer sits on the search sphere or because the ascent stalled.
    /// Only a lower bound is known.
    Unreliable { lower_bound: f64 },
}

impl ConjugateEval {
    pub fn value(self) -> Option<f64> {
        match self {
            ConjugateEval::Value(v) => Some(v),
            _ => None,
        }
    }
}

/// Fenchel conjugate of an oracle. Uses the closed form when the oracle has
/// one; otherwise ascends `w -> x^T w - f(w)` over the ball of the given
/// radius.
pub struct ConjugateOracle<'a> {
    base: &'a dyn ConvexOracle,
    radius: f64,
}

impl<'a> ConjugateOracle<'a> {
    pub fn new(base: &'a dyn ConvexOracle, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(IqcError::InvalidArgument {
                arg: "radius",
                reason: format!("search radius must be positive, got {radius}"),
            });
        }
        Ok(Self { base, radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn base(&self) -> &dyn ConvexOracle {
        self.base
    }

    pub fn eval(&self, x: &Vector) -> ConjugateEval {
        match self.base.closed_conjugate(x) {
            Some(ClosedConjugate::Finite(v)) => ConjugateEval::Value(v),
            Some(ClosedConjugate::Infinite) => ConjugateEval::Infinite,
            None => self.numeric(x),
        }
    }

    /// Numeric evaluation only, bypassing any closed form.
    pub fn numeric(&self, x: &Vector) -> ConjugateEval {
        let f = self.base;
        let r = self.radius;
        let phi = |w: &Vector| x.dot(w) - f.value(w);
        let project = |w: Vector| {
            let n = w.norm();
            if n > r {
                w * (r / n)
            } else {
                w
            }
        };
        let mut w = Vector::zeros(x.len());
        let mut best_w = w.clone();
        let mut best = phi(&w);
        let lip = f.gradient_lipschitz();
        for k in 0..MAX_ITER {
            let s = x - f.subgradient(&w);
            let step = match lip {
                Some(l) if l > 0.0 => 1.0 / l,
                _ => r / ((k + 1) as f64).sqrt() / (1.0 + s.norm()),
            };
            w = project(&w + s * step);
            let val = phi(&w);
            if val > best {
                best = val;
                best_w = w.clone();
            }
            let s = x - f.subgradient(&best_w);
            // concavity bounds the supremum over the ball by the linearization
            let gap = (r * s.norm() - s.dot(&best_w)).max(0.0);
            if gap <= TARGET_ACCURACY * (1.0 + best.abs()) {
                let on_sphere = best_w.norm() >= r * (1.0 - 1e-9);
                if on_sphere && s.dot(&best_w) > 0.0 {
                    return ConjugateEval::Unreliable { lower_bound: best };
                }
                return ConjugateEval::Value(best);
            }
        }
        ConjugateEval::Unreliable { lower_bound: best }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{Builtin, FnOracle};

    #[test]
    fn closed_form_used_for_builtins() {
        let f = Builtin::scalar_quadratic(2.0).unwrap();
        let c = ConjugateOracle::new(&f, 10.0).unwrap();
        assert_eq!(c.eval(&Vector::from_element(1, 2.0)), ConjugateEval::Value(1.0));
        let g = Builtin::scaled_abs(Vector::from_element(1, 1.0)).unwrap();
        let c = ConjugateOracle::new(&g, 10.0).unwrap();
        assert_eq!(c.eval(&Vector::from_element(1, 2.0)), ConjugateEval::Infinite);
    }

    #[test]
    fn numeric_matches_closed_form_for_smooth() {
        let f = Builtin::quadratic(crate::linalg::Mat::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0])).unwrap();
        let c = ConjugateOracle::new(&f, 20.0).unwrap();
        let x = Vector::from_vec(vec![0.7, -1.2]);
        let exact = c.eval(&x).value().unwrap();
        let approx = c.numeric(&x).value().unwrap();
        assert!((exact - approx).abs() < 1e-8);
    }

    #[test]
    fn boundary_maximizer_is_flagged() {
        // f = |x| has f*(2) = +inf; the search on a ball of radius 3 runs into the sphere
        let f = FnOracle {
            dim: 1,
            value: |x: &Vector| x[0].abs(),
            subgradient: |x: &Vector| Vector::from_element(1, x[0].signum()),
            lipschitz: None,
        };
        let c = ConjugateOracle::new(&f, 3.0).unwrap();
        match c.eval(&Vector::from_element(1, 2.0)) {
            ConjugateEval::Unreliable { lower_bound } => assert!(lower_bound >= 2.9),
            other => panic!("expected unreliable, got {other:?}"),
        }
        assert!(ConjugateOracle::new(&f, 0.0).is_err());
    }
}
