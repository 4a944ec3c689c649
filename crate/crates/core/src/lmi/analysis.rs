use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{strict_margin, AffineMatrixExpr, LmiSystem, ScalarConstraint, ScalarKind, DEFAULT_STRICT_MARGIN};
use crate::error::{IqcError, Result};
use crate::linalg::{eye, vstack, zeros, Mat};
use crate::multiplier::{hyperdominance_constraints, param_count, supply_from, terminal_from, MultiplierParam};
use crate::statespace::AugmentedRealization;

/// Which multiplier family the analysis searches over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalysisMode {
    /// Dynamic multiplier with a free terminal cost `Z(E)`.
    #[serde(rename = "terminal")]
    TerminalCost,
    /// Dynamic multiplier with `E = 0`.
    Hard,
    /// `nu = nutilde = 0`.
    Static,
}

impl AnalysisMode {
    pub const ALL: [AnalysisMode; 3] = [AnalysisMode::TerminalCost, AnalysisMode::Hard, AnalysisMode::Static];

    pub fn as_str(self) -> &'static str {
        match self {
            AnalysisMode::TerminalCost => "terminal",
            AnalysisMode::Hard => "hard",
            AnalysisMode::Static => "static",
        }
    }
}

impl fmt::Display for AnalysisMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AnalysisMode {
    type Err = IqcError;

    fn from_str(s: &str) -> Result<Self> {
        AnalysisMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| IqcError::InvalidArgument {
                arg: "mode",
                reason: format!("expected terminal, hard or static, got `{s}`"),
            })
    }
}

/// The assembled analysis program together with the block sizes needed to
/// read certificates back out of a solution.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisLmi {
    pub system: LmiSystem,
    pub mode: AnalysisMode,
    pub nu: usize,
    pub nutilde: usize,
    pub d: usize,
    /// Plant states.
    pub n: usize,
    /// Rows of `C_e`.
    pub p: usize,
    pub n_psi: usize,
}

/// Solution blocks of the analysis program.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateSet {
    pub x_psi: Mat,
    pub w: Mat,
    pub x: Mat,
    pub h: Mat,
    pub e: Mat,
    /// `lambda_0` carries the merged `lambda_0 + lambda~_0`.
    pub lambda: Vec<f64>,
    /// `lambda~_0 = 0` by the merge convention.
    pub lambda_tilde: Vec<f64>,
    pub gamma: f64,
    pub d: usize,
}

impl CertificateSet {
    pub fn xcal(&self) -> Mat {
        crate::linalg::block(&[&[&self.x_psi, &self.w], &[&self.w.transpose(), &self.x]])
    }

    pub fn multiplier(&self) -> Result<MultiplierParam> {
        MultiplierParam::new(self.lambda.clone(), self.lambda_tilde.clone(), self.e.clone(), self.d)
    }

    pub fn state_bound(&self) -> Result<Mat> {
        extract_state_bound(self)
    }
}

/// `Y = X - W^T (X_Psi + Z(E))^{-1} W`.
pub fn extract_state_bound(cert: &CertificateSet) -> Result<Mat> {
    if cert.x_psi.nrows() == 0 {
        return Ok(cert.x.clone());
    }
    let z = terminal_from(&cert.e, cert.d);
    if z.shape() != cert.x_psi.shape() {
        return Err(IqcError::dim(
            "Z(E)",
            format!("{0}x{0}", cert.x_psi.nrows()),
            format!("{}x{}", z.nrows(), z.ncols()),
        ));
    }
    let chol = (&cert.x_psi + z).cholesky().ok_or_else(|| IqcError::Singular {
        what: "X_Psi + Z(E)".into(),
    })?;
    let sol = chol.solve(&cert.w);
    Ok(&cert.x - cert.w.transpose() * sol)
}

impl AnalysisLmi {
    pub fn scalar_count(&self) -> usize {
        self.system.scalar_count()
    }

    pub fn certificates(&self, x: &[f64]) -> Result<CertificateSet> {
        let a = self.system.to_assignment(x)?;
        let xcal = &a["Xcal"];
        let np = self.n_psi;
        let nn = self.n;
        let get = |name: &str, r: usize, c: usize| a.get(name).cloned().unwrap_or_else(|| zeros(r, c));
        let lam = get("lambda", self.nu + 1, 1);
        let lt = get("lambda_tilde", self.nutilde, 1);
        let mut lambda_tilde = vec![0.0];
        lambda_tilde.extend(lt.iter());
        Ok(CertificateSet {
            x_psi: xcal.view((0, 0), (np, np)).into_owned(),
            w: xcal.view((0, np), (np, nn)).into_owned(),
            x: xcal.view((np, np), (nn, nn)).into_owned(),
            h: a["H"].clone(),
            e: get("E", self.nutilde, self.nu),
            lambda: lam.iter().copied().collect(),
            lambda_tilde,
            gamma: a["gamma"][(0, 0)],
            d: self.d,
        })
    }
}

/// Assembles the four constraint groups of the amplitude-bound program:
/// dissipation of the filtered plant, coupling with the terminal cost,
/// the epigraph bounds `H, X < gamma I`, and hyperdominance of `M_{T0}`.
/// Minimizes `gamma`.
pub fn assemble_analysis_lmis(
    aug: &AugmentedRealization,
    ce: &Mat,
    nu: usize,
    nutilde: usize,
    mode: AnalysisMode,
) -> Result<AnalysisLmi> {
    if mode == AnalysisMode::Static && (nu, nutilde) != (0, 0) {
        return Err(IqcError::InvalidArgument {
            arg: "mode",
            reason: format!("static mode needs nu = nutilde = 0, got ({nu}, {nutilde})"),
        });
    }
    let d = aug.b.ncols();
    let n = aug.plant_states;
    let n_psi = aug.filter_states;
    if n_psi != (nu + nutilde) * d {
        return Err(IqcError::dim("filter states", (nu + nutilde) * d, n_psi));
    }
    let nv = (nu + nutilde + 2) * d;
    if aug.c.nrows() != nv || aug.d.shape() != (nv, d) {
        return Err(IqcError::dim("filter output", nv, aug.c.nrows()));
    }
    if ce.ncols() != n {
        return Err(IqcError::dim("C_e", format!("p x {n}"), format!("{}x{}", ce.nrows(), ce.ncols())));
    }
    let p = ce.nrows();
    let big_n = n_psi + n;

    let mut sys = LmiSystem::new();
    let xcal = sys.declare("Xcal", big_n, big_n, true)?;
    let h = sys.declare("H", p, p, true)?;
    let lambda = sys.declare("lambda", nu + 1, 1, false)?;
    let lambda_tilde = if nutilde > 0 {
        Some(sys.declare("lambda_tilde", nutilde, 1, false)?)
    } else {
        None
    };
    let e = if mode == AnalysisMode::TerminalCost && nu * nutilde > 0 {
        Some(sys.declare("E", nutilde, nu, false)?)
    } else {
        None
    };
    let gamma = sys.declare("gamma", 1, 1, true)?;

    // full multiplier parameter index -> system scalar (None: dropped)
    let theta_map: Vec<Option<usize>> = (0..param_count(nu, nutilde))
        .map(|i| {
            if i <= nu {
                Some(lambda.index(i, 0))
            } else if i == nu + 1 {
                None
            } else if i <= nu + nutilde + 1 {
                lambda_tilde.as_ref().map(|v| v.index(i - nu - 2, 0))
            } else {
                let k = i - nu - nutilde - 2;
                e.as_ref().map(|v| v.index(k % nutilde, k / nutilde))
            }
        })
        .collect();

    // (i) dissipation
    let k1 = big_n + d;
    let mut diss = AffineMatrixExpr::zeros(k1);
    let next = crate::linalg::hstack(&[&aug.a, &aug.b]);
    let now = crate::linalg::hstack(&[&eye(big_n), &zeros(big_n, d)]);
    let xe = xcal.expr();
    diss = diss.plus(&xe.congruence(&next)).plus(&xe.congruence(&now).scaled(-1.0));
    let out = crate::linalg::hstack(&[&aug.c, &aug.d]);
    for (i, slot) in theta_map.iter().enumerate().take(nu + nutilde + 2) {
        let Some(k) = slot else { continue };
        let mut lam = vec![0.0; nu + 1];
        let mut lamt = vec![0.0; nutilde + 1];
        if i <= nu {
            lam[i] = 1.0;
        } else {
            lamt[i - nu - 1] = 1.0;
        }
        let pk = supply_from(nu, nutilde, d, &lam, &lamt);
        diss.add_term(*k, &(out.transpose() * pk * &out));
    }
    let diss = diss.scaled(-1.0);
    let m1 = strict_margin(&diss, DEFAULT_STRICT_MARGIN);
    sys.add_lmi("dissipation", diss, m1)?;

    // (ii) coupling
    let k2 = p + big_n;
    let mut cst = zeros(k2, k2);
    cst.view_mut((0, p + n_psi), (p, n)).copy_from(ce);
    cst.view_mut((p + n_psi, 0), (n, p)).copy_from(&ce.transpose());
    let mut coup = AffineMatrixExpr::constant(cst)
        .plus(&h.expr().embed(k2, 0))
        .plus(&xe.embed(k2, p));
    if let Some(ev) = &e {
        for j in 0..nu {
            for i in 0..nutilde {
                let mut unit = zeros(nutilde, nu);
                unit[(i, j)] = 1.0;
                let mut z = zeros(k2, k2);
                z.view_mut((p, p), (n_psi, n_psi)).copy_from(&terminal_from(&unit, d));
                coup.add_term(ev.index(i, j), &z);
            }
        }
    }
    let m2 = strict_margin(&coup, DEFAULT_STRICT_MARGIN);
    sys.add_lmi("coupling", coup, m2)?;

    // (iii) epigraph bounds
    let g_idx = gamma.index(0, 0);
    let h_bound = {
        let mut ex = h.expr().scaled(-1.0);
        ex.add_term(g_idx, &eye(p));
        ex
    };
    let mh = strict_margin(&h_bound, DEFAULT_STRICT_MARGIN);
    sys.add_lmi("H_bound", h_bound, mh)?;
    let sel = vstack(&[&zeros(n_psi, n), &eye(n)]);
    let x_bound = {
        let mut ex = xe.congruence(&sel).scaled(-1.0);
        ex.add_term(g_idx, &eye(n));
        ex
    };
    let mx = strict_margin(&x_bound, DEFAULT_STRICT_MARGIN);
    sys.add_lmi("X_bound", x_bound, mx)?;

    // (iv) hyperdominance
    for row in hyperdominance_constraints(nu, nutilde) {
        let mut coeffs = BTreeMap::new();
        for (i, c) in row.coeffs.iter().enumerate() {
            if let (Some(k), true) = (theta_map[i], *c != 0.0) {
                *coeffs.entry(k).or_insert(0.0) += c;
            }
        }
        sys.add_scalar(ScalarConstraint {
            name: format!("hyper_{}", row.label),
            coeffs,
            constant: 0.0,
            kind: ScalarKind::NonNegative,
        })?;
    }

    sys.set_objective(BTreeMap::from([(g_idx, 1.0)]))?;
    Ok(AnalysisLmi {
        system: sys,
        mode,
        nu,
        nutilde,
        d,
        n,
        p,
        n_psi,
    })
}
