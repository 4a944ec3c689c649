//! Affine LMI modeling: matrix unknowns, affine symmetric expressions in
//! their scalar entries, and systems of such constraints with a linear
//! objective.

mod analysis;
mod kyp;
mod text;

pub use analysis::{
    assemble_analysis_lmis, extract_state_bound, AnalysisLmi, AnalysisMode, CertificateSet,
};
pub use kyp::{fdi_check, kyp_feasibility, kyp_lmi, FdiReport};
pub use text::{dump_system, load_system};

use std::collections::{BTreeMap, HashMap};

use crate::error::{IqcError, Result};
use crate::linalg::{min_eig, zeros, Mat};

pub const DEFAULT_STRICT_MARGIN: f64 = 1e-8;

/// A named block of unknowns. Symmetric variables are parametrized by
/// their lower triangle (column-major), general ones column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixVariable {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub symmetric: bool,
    pub offset: usize,
}

impl MatrixVariable {
    pub fn scalar_count(&self) -> usize {
        if self.symmetric {
            self.rows * (self.rows + 1) / 2
        } else {
            self.rows * self.cols
        }
    }

    /// Global index of entry `(i, j)`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        if self.symmetric {
            let (i, j) = if i >= j { (i, j) } else { (j, i) };
            // column-major lower triangle: columns 0..j hold n, n-1, ... entries
            self.offset + j * self.rows - j * j.saturating_sub(1) / 2 + (i - j)
        } else {
            self.offset + j * self.rows + i
        }
    }

    /// Matrix value from the global scalar vector.
    pub fn value(&self, x: &[f64]) -> Mat {
        let mut m = zeros(self.rows, self.cols);
        for j in 0..self.cols {
            for i in 0..self.rows {
                if !self.symmetric || i >= j {
                    m[(i, j)] = x[self.index(i, j)];
                    if self.symmetric {
                        m[(j, i)] = m[(i, j)];
                    }
                }
            }
        }
        m
    }

    /// Writes a matrix value into the global scalar vector.
    pub fn store(&self, value: &Mat, x: &mut [f64]) -> Result<()> {
        if value.shape() != (self.rows, self.cols) {
            return Err(IqcError::dim(
                self.name.clone(),
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", value.nrows(), value.ncols()),
            ));
        }
        for j in 0..self.cols {
            for i in 0..self.rows {
                if !self.symmetric || i >= j {
                    x[self.index(i, j)] = if self.symmetric {
                        0.5 * (value[(i, j)] + value[(j, i)])
                    } else {
                        value[(i, j)]
                    };
                }
            }
        }
        Ok(())
    }

    /// The variable itself as an affine expression (symmetric variables only).
    pub fn expr(&self) -> AffineMatrixExpr {
        assert!(self.symmetric, "only symmetric variables are matrix expressions");
        let n = self.rows;
        let mut e = AffineMatrixExpr::zeros(n);
        for j in 0..n {
            for i in j..n {
                let mut c = zeros(n, n);
                c[(i, j)] = 1.0;
                c[(j, i)] = 1.0;
                e.add_term(self.index(i, j), &c);
            }
        }
        e
    }

    /// `sym(placement of this variable at (row, col))` inside an `n x n`
    /// expression: the variable and its transpose mirrored.
    pub fn embed_general(&self, n: usize, row: usize, col: usize) -> AffineMatrixExpr {
        let mut e = AffineMatrixExpr::zeros(n);
        for j in 0..self.cols {
            for i in 0..self.rows {
                let mut c = zeros(n, n);
                c[(row + i, col + j)] += 1.0;
                c[(col + j, row + i)] += 1.0;
                e.add_term(self.index(i, j), &c);
            }
        }
        e
    }
}

/// `constant + sum_k x_k * terms[k]` with symmetric matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMatrixExpr {
    pub size: usize,
    pub constant: Mat,
    pub terms: BTreeMap<usize, Mat>,
}

impl AffineMatrixExpr {
    pub fn zeros(n: usize) -> Self {
        Self {
            size: n,
            constant: zeros(n, n),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(m: Mat) -> Self {
        Self {
            size: m.nrows(),
            constant: crate::linalg::symmetrize(&m),
            terms: BTreeMap::new(),
        }
    }

    pub fn add_term(&mut self, index: usize, coeff: &Mat) {
        debug_assert_eq!(coeff.shape(), (self.size, self.size));
        self.terms
            .entry(index)
            .and_modify(|c| *c += coeff)
            .or_insert_with(|| coeff.clone());
    }

    pub fn plus(mut self, other: &AffineMatrixExpr) -> Self {
        assert_eq!(self.size, other.size, "expression size mismatch");
        self.constant += &other.constant;
        for (k, c) in &other.terms {
            self.add_term(*k, c);
        }
        self
    }

    pub fn scaled(mut self, a: f64) -> Self {
        self.constant *= a;
        for c in self.terms.values_mut() {
            *c *= a;
        }
        self
    }

    /// `L^T E L`.
    pub fn congruence(&self, l: &Mat) -> Self {
        let lt = l.transpose();
        let cong = |c: &Mat| mirror_lower(&lt * c * l);
        Self {
            size: l.ncols(),
            constant: cong(&self.constant),
            terms: self.terms.iter().map(|(k, c)| (*k, cong(c))).collect(),
        }
    }

    /// Places this expression as the diagonal block starting at `at` of an
    /// `n x n` expression.
    pub fn embed(&self, n: usize, at: usize) -> Self {
        let place = |m: &Mat| {
            let mut out = zeros(n, n);
            out.view_mut((at, at), (self.size, self.size)).copy_from(m);
            out
        };
        Self {
            size: n,
            constant: place(&self.constant),
            terms: self.terms.iter().map(|(k, c)| (*k, place(c))).collect(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Mat {
        let mut m = self.constant.clone();
        for (k, c) in &self.terms {
            m += c * x[*k];
        }
        m
    }

    /// Largest absolute entry over the constant and all coefficients.
    pub fn scale(&self) -> f64 {
        self.terms
            .values()
            .chain(std::iter::once(&self.constant))
            .map(crate::linalg::max_abs)
            .fold(0.0, f64::max)
    }

    pub fn max_index(&self) -> Option<usize> {
        self.terms.keys().next_back().copied()
    }
}

/// Copies the lower triangle onto the upper one so rounding in products
/// cannot leave a bitwise asymmetric matrix.
fn mirror_lower(mut m: Mat) -> Mat {
    for j in 0..m.ncols() {
        for i in 0..j {
            m[(i, j)] = m[(j, i)];
        }
    }
    m
}

fn check_name(name: &str) -> Result<()> {
    if name.is_empty() || name.chars().any(char::is_whitespace) {
        return Err(IqcError::InvalidArgument {
            arg: "name",
            reason: format!("`{name}` must be non-empty without whitespace"),
        });
    }
    Ok(())
}

/// `expr >= margin * I`.
#[derive(Debug, Clone, PartialEq)]
pub struct LmiConstraint {
    pub name: String,
    pub expr: AffineMatrixExpr,
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarKind {
    /// `a . x + c >= 0`
    NonNegative,
    /// `a . x + c = 0`
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarConstraint {
    pub name: String,
    pub coeffs: BTreeMap<usize, f64>,
    pub constant: f64,
    pub kind: ScalarKind,
}

impl ScalarConstraint {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.coeffs.iter().map(|(k, a)| a * x[*k]).sum::<f64>()
    }
}

/// Minimize `objective . x` subject to the LMIs and scalar constraints.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LmiSystem {
    pub variables: Vec<MatrixVariable>,
    pub lmis: Vec<LmiConstraint>,
    pub scalars: Vec<ScalarConstraint>,
    pub objective: BTreeMap<usize, f64>,
}

/// Variable values by name.
pub type Assignment = HashMap<String, Mat>;

impl LmiSystem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn scalar_count(&self) -> usize {
        self.variables.iter().map(|v| v.scalar_count()).sum()
    }

    pub fn declare(&mut self, name: &str, rows: usize, cols: usize, symmetric: bool) -> Result<MatrixVariable> {
        check_name(name)?;
        if self.variables.iter().any(|v| v.name == name) {
            return Err(IqcError::InvalidArgument {
                arg: "name",
                reason: format!("variable `{name}` declared twice"),
            });
        }
        if symmetric && rows != cols {
            return Err(IqcError::dim(name, "square", format!("{rows}x{cols}")));
        }
        let v = MatrixVariable {
            name: name.to_string(),
            rows,
            cols,
            symmetric,
            offset: self.scalar_count(),
        };
        self.variables.push(v.clone());
        Ok(v)
    }

    pub fn var(&self, name: &str) -> Result<&MatrixVariable> {
        self.variables
            .iter()
            .find(|v| v.name == name)
            .ok_or_else(|| IqcError::UnknownVariable(name.to_string()))
    }

    fn check_indices(&self, name: &str, max: Option<usize>) -> Result<()> {
        if let Some(m) = max {
            if m >= self.scalar_count() {
                return Err(IqcError::UnknownVariable(format!("scalar #{m} in `{name}`")));
            }
        }
        Ok(())
    }

    pub fn add_lmi(&mut self, name: &str, expr: AffineMatrixExpr, margin: f64) -> Result<()> {
        check_name(name)?;
        self.check_indices(name, expr.max_index())?;
        self.lmis.push(LmiConstraint {
            name: name.to_string(),
            expr,
            margin,
        });
        Ok(())
    }

    pub fn add_scalar(&mut self, c: ScalarConstraint) -> Result<()> {
        check_name(&c.name)?;
        self.check_indices(&c.name, c.coeffs.keys().next_back().copied())?;
        self.scalars.push(c);
        Ok(())
    }

    pub fn set_objective(&mut self, objective: BTreeMap<usize, f64>) -> Result<()> {
        self.check_indices("objective", objective.keys().next_back().copied())?;
        self.objective = objective;
        Ok(())
    }

    /// Scalar vector from named values; every declared variable must be present.
    pub fn to_vector(&self, a: &Assignment) -> Result<Vec<f64>> {
        let mut x = vec![0.0; self.scalar_count()];
        for v in &self.variables {
            let m = a.get(&v.name).ok_or_else(|| IqcError::UnknownVariable(v.name.clone()))?;
            v.store(m, &mut x)?;
        }
        Ok(x)
    }

    pub fn to_assignment(&self, x: &[f64]) -> Result<Assignment> {
        if x.len() != self.scalar_count() {
            return Err(IqcError::dim("assignment", self.scalar_count(), x.len()));
        }
        Ok(self.variables.iter().map(|v| (v.name.clone(), v.value(x))).collect())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|(k, c)| c * x[*k]).sum()
    }

    /// Minimum eigenvalue / slack of every constraint at `a`, measured
    /// against the constraint's own margin.
    pub fn verify(&self, a: &Assignment, tol: f64) -> Result<VerificationReport> {
        let x = self.to_vector(a)?;
        Ok(self.verify_vector(&x, tol))
    }

    pub fn verify_vector(&self, x: &[f64], tol: f64) -> VerificationReport {
        let mut entries = Vec::new();
        for c in &self.lmis {
            let m = c.expr.eval(x);
            entries.push(ConstraintSlack {
                name: c.name.clone(),
                slack: min_eig(&m) - c.margin,
            });
        }
        for c in &self.scalars {
            let v = c.eval(x);
            entries.push(ConstraintSlack {
                name: c.name.clone(),
                slack: match c.kind {
                    ScalarKind::NonNegative => v,
                    ScalarKind::Zero => -v.abs(),
                },
            });
        }
        let pass = entries.iter().all(|e| e.slack >= -tol);
        VerificationReport { entries, tol, pass }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSlack {
    pub name: String,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub entries: Vec<ConstraintSlack>,
    pub tol: f64,
    pub pass: bool,
}

impl VerificationReport {
    pub fn worst(&self) -> Option<&ConstraintSlack> {
        self.entries.iter().min_by(|a, b| a.slack.total_cmp(&b.slack))
    }

    pub fn violations(&self) -> impl Iterator<Item = &ConstraintSlack> {
        self.entries.iter().filter(|e| e.slack < -self.tol)
    }
}

/// Strictness margin for an expression: `eps * max(1, scale)`.
pub fn strict_margin(expr: &AffineMatrixExpr, eps: f64) -> f64 {
    eps * expr.scale().max(1.0)
}
