//! Standard-form conic programs
//!
//! ```text
//! minimize c^T x  subject to  G x + s = h,  A x = b,  s in K
//! ```
//!
//! with `K` a nonnegative orthant followed by positive-semidefinite blocks
//! in scaled half-vectorized form (see [`crate::linalg::svec`]).

mod external;
mod ipm;
mod text;

pub use external::ExternalCommand;
pub use ipm::Embedded;
pub use text::{dump_problem, load_problem};

use std::time::Duration;

use crate::error::{IqcError, Result};
use crate::linalg::{svec, svec_len, zeros, Mat, Vector};
use crate::lmi::{Assignment, LmiSystem, MatrixVariable, ScalarKind};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConeDims {
    pub linear: usize,
    pub psd: Vec<usize>,
}

impl ConeDims {
    /// Length of a cone vector.
    pub fn dim(&self) -> usize {
        self.linear + self.psd.iter().map(|&n| svec_len(n)).sum::<usize>()
    }

    /// Barrier degree: orthant size plus the PSD orders.
    pub fn degree(&self) -> usize {
        self.linear + self.psd.iter().sum::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicProblem {
    pub c: Vector,
    pub g: Mat,
    pub h: Vector,
    pub a: Mat,
    pub b: Vector,
    pub cones: ConeDims,
}

impl ConicProblem {
    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.c.len();
        let m = self.cones.dim();
        if self.g.shape() != (m, n) {
            return Err(IqcError::dim("G", format!("{m}x{n}"), format!("{}x{}", self.g.nrows(), self.g.ncols())));
        }
        if self.h.len() != m {
            return Err(IqcError::dim("h", m, self.h.len()));
        }
        if self.a.ncols() != n || self.a.nrows() != self.b.len() {
            return Err(IqcError::dim(
                "A",
                format!("{}x{n}", self.b.len()),
                format!("{}x{}", self.a.nrows(), self.a.ncols()),
            ));
        }
        if self.cones.psd.contains(&0) {
            return Err(IqcError::InvalidArgument {
                arg: "cones",
                reason: "empty PSD block".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    /// A dual improving ray certifies primal infeasibility.
    Infeasible,
    /// A primal improving ray certifies dual infeasibility.
    Unbounded,
    NumericalLimit,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::NumericalLimit => "numerical-limit",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Primal point, or the improving ray when unbounded.
    pub x: Vector,
    pub s: Vector,
    /// Equality multipliers, or part of the infeasibility certificate.
    pub y: Vector,
    pub z: Vector,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `s^T z`.
    pub gap: f64,
    /// `gap / max(1, |c^T x|)`.
    pub relative_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub wall_time: Duration,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-8,
            feas_tol: 1e-8,
            max_iter: 200,
        }
    }
}

/// A conic solver behind the common contract.
pub trait Backend: Send + Sync {
    fn name(&self) -> &str;
    fn solve(&self, problem: &ConicProblem, opts: &SolverOptions) -> Result<SolveResult>;
}

/// Solves with the embedded interior-point method.
pub fn solve(problem: &ConicProblem, opts: &SolverOptions) -> Result<SolveResult> {
    Embedded.solve(problem, opts)
}

/// Variable table of a flattened system; the conic unknown vector is the
/// system's scalar vector.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexMap {
    pub variables: Vec<MatrixVariable>,
}

impl IndexMap {
    pub fn len(&self) -> usize {
        self.variables.iter().map(|v| v.scalar_count()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_assignment(&self, x: &[f64]) -> Result<Assignment> {
        if x.len() != self.len() {
            return Err(IqcError::dim("solution vector", self.len(), x.len()));
        }
        Ok(self.variables.iter().map(|v| (v.name.clone(), v.value(x))).collect())
    }

    pub fn to_vector(&self, a: &Assignment) -> Result<Vec<f64>> {
        let mut x = vec![0.0; self.len()];
        for v in &self.variables {
            let m = a.get(&v.name).ok_or_else(|| IqcError::UnknownVariable(v.name.clone()))?;
            v.store(m, &mut x)?;
        }
        Ok(x)
    }
}

/// Each LMI `F(x) >= margin I` becomes a PSD block with slack
/// `svec(F(x) - margin I)`; scalar inequalities go to the orthant and
/// scalar equalities to `A x = b`.
pub fn flatten(sys: &LmiSystem) -> Result<(ConicProblem, IndexMap)> {
    let n = sys.scalar_count();
    let check = |k: usize, what: &str| {
        if k >= n {
            Err(IqcError::UnknownVariable(format!("scalar #{k} in `{what}`")))
        } else {
            Ok(())
        }
    };
    let ineq: Vec<_> = sys.scalars.iter().filter(|c| c.kind == ScalarKind::NonNegative).collect();
    let eq: Vec<_> = sys.scalars.iter().filter(|c| c.kind == ScalarKind::Zero).collect();
    let blocks: Vec<_> = sys.lmis.iter().filter(|l| l.expr.size > 0).collect();
    let cones = ConeDims {
        linear: ineq.len(),
        psd: blocks.iter().map(|l| l.expr.size).collect(),
    };
    let m = cones.dim();
    let mut g = zeros(m, n);
    let mut h = Vector::zeros(m);
    for (row, c) in ineq.iter().enumerate() {
        h[row] = c.constant;
        for (&k, &a) in &c.coeffs {
            check(k, &c.name)?;
            g[(row, k)] = -a;
        }
    }
    let mut row = ineq.len();
    for l in &blocks {
        let size = l.expr.size;
        let len = svec_len(size);
        let shifted = &l.expr.constant - Mat::identity(size, size) * l.margin;
        h.rows_mut(row, len).copy_from_slice(&svec(&shifted));
        for (&k, f) in &l.expr.terms {
            check(k, &l.name)?;
            let col = svec(f);
            for (i, v) in col.into_iter().enumerate() {
                g[(row + i, k)] = -v;
            }
        }
        row += len;
    }
    let mut a = zeros(eq.len(), n);
    let mut b = Vector::zeros(eq.len());
    for (r, c) in eq.iter().enumerate() {
        b[r] = -c.constant;
        for (&k, &v) in &c.coeffs {
            check(k, &c.name)?;
            a[(r, k)] = v;
        }
    }
    let mut cvec = Vector::zeros(n);
    for (&k, &v) in &sys.objective {
        check(k, "objective")?;
        cvec[k] = v;
    }
    let problem = ConicProblem {
        c: cvec,
        g,
        h,
        a,
        b,
        cones,
    };
    problem.validate()?;
    Ok((
        problem,
        IndexMap {
            variables: sys.variables.clone(),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmi::{AffineMatrixExpr, ScalarConstraint};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    #[test]
    fn single_symmetric_variable_flattens_to_three_scalars() {
        let mut sys = LmiSystem::new();
        let x = sys.declare("X", 2, 2, true).unwrap();
        sys.add_lmi("pos", x.expr(), 0.0).unwrap();
        let (p, map) = flatten(&sys).unwrap();
        assert_eq!(p.num_vars(), 3);
        assert_eq!(p.cones.psd, vec![2]);
        // G x = -svec(X)
        let xv = Vector::from_vec(vec![1.0, 2.0, 3.0]);
        let gx = &p.g * &xv;
        let want = svec(&map.to_assignment(xv.as_slice()).unwrap()["X"]);
        for (a, b) in gx.iter().zip(&want) {
            assert!((a + b).abs() < 1e-15);
        }
    }

    #[test]
    fn assignment_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut sys = LmiSystem::new();
        sys.declare("X", 3, 3, true).unwrap();
        sys.declare("E", 2, 4, false).unwrap();
        let (_, map) = flatten(&sys).unwrap();
        let x: Vec<f64> = (0..map.len()).map(|_| rng.gen_range(-5.0..5.0)).collect();
        assert_eq!(map.to_vector(&map.to_assignment(&x).unwrap()).unwrap(), x);
    }

    #[test]
    fn slack_is_constraint_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut sys = LmiSystem::new();
        let x = sys.declare("X", 2, 2, true).unwrap();
        let g = sys.declare("g", 1, 1, true).unwrap();
        let mut e = AffineMatrixExpr::constant(Mat::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 2.0, 0.0, 1.0, 0.0, 1.0, 3.0]));
        e = e.plus(&x.expr().embed(3, 1));
        e.add_term(g.index(0, 0), &Mat::identity(3, 3));
        sys.add_lmi("a", e, 0.25).unwrap();
        sys.add_scalar(ScalarConstraint {
            name: "s".into(),
            coeffs: BTreeMap::from([(0, 2.0), (3, -1.0)]),
            constant: 0.5,
            kind: ScalarKind::NonNegative,
        })
        .unwrap();
        sys.add_scalar(ScalarConstraint {
            name: "q".into(),
            coeffs: BTreeMap::from([(1, 1.0)]),
            constant: -0.5,
            kind: ScalarKind::Zero,
        })
        .unwrap();
        let (p, _) = flatten(&sys).unwrap();
        let xv = Vector::from_fn(4, |_, _| rng.gen_range(-1.0..1.0));
        let s = &p.h - &p.g * &xv;
        let val = sys.lmis[0].expr.eval(xv.as_slice()) - Mat::identity(3, 3) * 0.25;
        let want = svec(&val);
        assert!((s[0] - sys.scalars[0].eval(xv.as_slice())).abs() < 1e-14);
        for (a, b) in s.iter().skip(1).zip(&want) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(((&p.a * &xv)[0] - p.b[0] - sys.scalars[1].eval(xv.as_slice())).abs() < 1e-14);
    }
}
