use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{strict_margin, AffineMatrixExpr, LmiSystem, ScalarConstraint, ScalarKind, DEFAULT_STRICT_MARGIN};
use crate::error::{IqcError, Result};
use crate::linalg::{block, eye, zeros, Mat};
use crate::statespace::{freq_response, StateSpace};

fn check_supply(sys: &StateSpace, p: &Mat) -> Result<()> {
    let k = sys.outputs() + sys.inputs();
    if p.shape() != (k, k) {
        return Err(IqcError::dim("P", format!("{k}x{k}"), format!("{}x{}", p.nrows(), p.ncols())));
    }
    Ok(())
}

/// `[C D; 0 I]^T P [C D; 0 I] - [A B; I 0]^T diag(X, -X) [A B; I 0]` as an
/// affine expression in the symmetric unknown `x`.
fn kyp_expr(sys: &StateSpace, p: &Mat, x: &super::MatrixVariable) -> AffineMatrixExpr {
    let (n, m, q) = (sys.states(), sys.inputs(), sys.outputs());
    let out = block(&[&[&sys.c, &sys.d], &[&zeros(m, n), &eye(m)]]);
    let supply = AffineMatrixExpr::constant(out.transpose() * p * &out);
    if n == 0 {
        return supply;
    }
    debug_assert_eq!(out.nrows(), q + m);
    let next = crate::linalg::hstack(&[&sys.a, &sys.b]);
    let now = crate::linalg::hstack(&[&eye(n), &zeros(n, m)]);
    let xe = x.expr();
    supply.plus(&xe.congruence(&now)).plus(&xe.congruence(&next).scaled(-1.0))
}

/// The strict KYP inequality with storage `x^T X x` and supply
/// `[y; u]^T P [y; u]`, stored as one constraint `... >= eps I`.
pub fn kyp_lmi(sys: &StateSpace, p: &Mat) -> Result<LmiSystem> {
    check_supply(sys, p)?;
    let mut out = LmiSystem::new();
    let x = out.declare("X", sys.states(), sys.states(), true)?;
    let expr = kyp_expr(sys, p, &x);
    let margin = strict_margin(&expr, DEFAULT_STRICT_MARGIN);
    out.add_lmi("kyp", expr, margin)?;
    Ok(out)
}

/// Feasibility form of [`kyp_lmi`]: maximize `t <= 1` such that the KYP
/// expression is `>= t I` with `-r I <= X <= r I`. The LMI is feasible iff
/// the optimal `t` is positive.
pub fn kyp_feasibility(sys: &StateSpace, p: &Mat, r: f64) -> Result<LmiSystem> {
    check_supply(sys, p)?;
    let n = sys.states();
    let mut out = LmiSystem::new();
    let x = out.declare("X", n, n, true)?;
    let t = out.declare("t", 1, 1, true)?;
    let k = sys.inputs() + n;
    let mut expr = kyp_expr(sys, p, &x);
    expr.add_term(t.index(0, 0), &(-eye(k)));
    out.add_lmi("kyp", expr, 0.0)?;
    if n > 0 {
        let rid = AffineMatrixExpr::constant(eye(n) * r);
        out.add_lmi("X_upper", rid.clone().plus(&x.expr().scaled(-1.0)), 0.0)?;
        out.add_lmi("X_lower", rid.plus(&x.expr()), 0.0)?;
    }
    out.add_scalar(ScalarConstraint {
        name: "t_cap".into(),
        coeffs: BTreeMap::from([(t.index(0, 0), -1.0)]),
        constant: 1.0,
        kind: ScalarKind::NonNegative,
    })?;
    out.set_objective(BTreeMap::from([(t.index(0, 0), -1.0)]))?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdiReport {
    pub pass: bool,
    /// Smallest eigenvalue of `[G; I]^* P [G; I]` over the grid.
    pub worst_margin: f64,
    /// Angle of the grid point attaining it.
    pub worst_angle: f64,
}

/// Samples `[G(e^{i theta}); I]^* P [G(e^{i theta}); I]` at `n_grid`
/// equally spaced angles starting at `theta = 0`.
pub fn fdi_check(sys: &StateSpace, p: &Mat, n_grid: usize) -> Result<FdiReport> {
    check_supply(sys, p)?;
    if n_grid == 0 {
        return Err(IqcError::InvalidArgument {
            arg: "n_grid",
            reason: "need at least one grid point".into(),
        });
    }
    if sys.states() > 0 {
        for ev in sys.a.complex_eigenvalues().iter() {
            if (ev.norm() - 1.0).abs() < 1e-10 {
                return Err(IqcError::EigenvalueOnUnitCircle { modulus: ev.norm() });
            }
        }
    }
    let m = sys.inputs();
    let pc = p.map(|v| Complex64::new(v, 0.0));
    let mut worst = f64::INFINITY;
    let mut worst_angle = 0.0;
    for k in 0..n_grid {
        let theta = 2.0 * PI * k as f64 / n_grid as f64;
        let g = freq_response(sys, Complex64::from_polar(1.0, theta))?;
        let mut gi = DMatrix::<Complex64>::zeros(g.nrows() + m, m);
        gi.view_mut((0, 0), g.shape()).copy_from(&g);
        for i in 0..m {
            gi[(g.nrows() + i, i)] = Complex64::new(1.0, 0.0);
        }
        let mut h = gi.adjoint() * &pc * &gi;
        h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
        let ev = h.symmetric_eigenvalues().min();
        if ev < worst {
            worst = ev;
            worst_angle = theta;
        }
    }
    Ok(FdiReport {
        pass: worst > 0.0,
        worst_margin: worst,
        worst_angle,
    })
}
