//! O'Shea–Zames–Falb multipliers with terminal cost: FIR filter blocks, the
//! combined filter, supply and terminal-cost matrices, and the doubly
//! hyperdominant cone that certifies them.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{IqcError, Result};
use crate::linalg::{block_diag, eye, kron, vstack, zeros, Mat};
use crate::statespace::{lift, FilterRealization, StateSpace};

pub const DEFAULT_HYPERDOMINANCE_TOL: f64 = 1e-9;

/// Orders, coefficients and terminal-cost matrix of one multiplier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierParam {
    pub nu: usize,
    pub nutilde: usize,
    /// `lambda_0..lambda_nu` of the causal part.
    pub lambda: Vec<f64>,
    /// `lambda~_0..lambda~_nutilde` of the anti-causal part.
    pub lambda_tilde: Vec<f64>,
    /// `nutilde x nu`.
    pub e: Mat,
    pub d: usize,
    /// Reject negative coefficients on construction.
    #[serde(default)]
    pub require_nonneg_lambda: bool,
}

impl MultiplierParam {
    pub fn new(lambda: Vec<f64>, lambda_tilde: Vec<f64>, e: Mat, d: usize) -> Result<Self> {
        if lambda.is_empty() || lambda_tilde.is_empty() {
            return Err(IqcError::InvalidArgument {
                arg: "lambda",
                reason: "coefficient vectors need at least the k = 0 entry".into(),
            });
        }
        let nu = lambda.len() - 1;
        let nutilde = lambda_tilde.len() - 1;
        if e.shape() != (nutilde, nu) {
            return Err(IqcError::dim("E", format!("{nutilde}x{nu}"), format!("{}x{}", e.nrows(), e.ncols())));
        }
        if d == 0 {
            return Err(IqcError::InvalidArgument {
                arg: "d",
                reason: "signal dimension must be positive".into(),
            });
        }
        Ok(Self {
            nu,
            nutilde,
            lambda,
            lambda_tilde,
            e,
            d,
            require_nonneg_lambda: false,
        })
    }

    /// Same as [`MultiplierParam::new`] but rejects negative `lambda` entries.
    pub fn new_nonneg(lambda: Vec<f64>, lambda_tilde: Vec<f64>, e: Mat, d: usize) -> Result<Self> {
        if lambda.iter().chain(&lambda_tilde).any(|&l| l < 0.0) {
            return Err(IqcError::InvalidArgument {
                arg: "lambda",
                reason: "nonnegative coefficients required".into(),
            });
        }
        let mut p = Self::new(lambda, lambda_tilde, e, d)?;
        p.require_nonneg_lambda = true;
        Ok(p)
    }

    /// All-zero parameters of the given orders.
    pub fn zero(nu: usize, nutilde: usize, d: usize) -> Self {
        Self {
            nu,
            nutilde,
            lambda: vec![0.0; nu + 1],
            lambda_tilde: vec![0.0; nutilde + 1],
            e: zeros(nutilde, nu),
            d,
            require_nonneg_lambda: false,
        }
    }

    pub fn t0(&self) -> usize {
        self.nu + self.nutilde + 1
    }

    pub fn filter(&self) -> FilterRealization {
        combined_filter(self.nu, self.nutilde, self.d)
    }

    pub fn supply(&self) -> Mat {
        supply_matrix(self)
    }

    pub fn terminal(&self) -> Mat {
        terminal_cost(self)
    }

    pub fn m(&self, t: usize) -> Result<Mat> {
        m_matrix(self, t)
    }

    /// Scalar decision vector `(lambda, lambda~, E column-major)`.
    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = self.lambda.clone();
        v.extend(&self.lambda_tilde);
        v.extend(self.e.iter());
        v
    }

    pub fn from_vector(nu: usize, nutilde: usize, d: usize, v: &[f64]) -> Result<Self> {
        let n = param_count(nu, nutilde);
        if v.len() != n {
            return Err(IqcError::dim("multiplier parameter vector", n, v.len()));
        }
        let lambda = v[..=nu].to_vec();
        let lambda_tilde = v[nu + 1..nu + nutilde + 2].to_vec();
        let e = Mat::from_column_slice(nutilde, nu, &v[nu + nutilde + 2..]);
        Self::new(lambda, lambda_tilde, e, d)
    }
}

/// Length of the decision vector of [`MultiplierParam::to_vector`].
pub fn param_count(nu: usize, nutilde: usize) -> usize {
    nu + nutilde + 2 + nu * nutilde
}

/// Upper Jordan block with eigenvalue zero.
fn jordan(nu: usize) -> Mat {
    let mut a = zeros(nu, nu);
    for i in 0..nu.saturating_sub(1) {
        a[(i, i + 1)] = 1.0;
    }
    a
}

fn last_unit(nu: usize) -> Mat {
    let mut b = zeros(nu, 1);
    if nu > 0 {
        b[(nu - 1, 0)] = 1.0;
    }
    b
}

/// Output row of `psi_{k,nu}`: minus the state holding `u_{t-k}`.
fn delay_row(k: usize, nu: usize) -> Mat {
    let mut c = zeros(1, nu);
    if k > 0 {
        c[(0, nu - k)] = -1.0;
    }
    c
}

/// `psi_{k,nu} (x) I_d`, the FIR filter `1 - z^{-k}` on a shift register of
/// length `nu`; `k = 0` is the identity.
pub fn jordan_filter(k: usize, nu: usize, d: usize) -> Result<StateSpace> {
    if k > nu {
        return Err(IqcError::InvalidArgument {
            arg: "k",
            reason: format!("need k <= nu = {nu}, got {k}"),
        });
    }
    let id = eye(d);
    Ok(StateSpace {
        a: kron(&jordan(nu), &id),
        b: kron(&last_unit(nu), &id),
        c: kron(&delay_row(k, nu), &id),
        d: id,
    })
}

/// Scalar realization of `psi_nu(lambda) = sum_k lambda_k psi_{k,nu}`.
pub fn conic_filter(lambda: &[f64]) -> StateSpace {
    let nu = lambda.len() - 1;
    let mut c = zeros(1, nu);
    for (k, &l) in lambda.iter().enumerate().skip(1) {
        c += delay_row(k, nu) * l;
    }
    StateSpace {
        a: jordan(nu),
        b: last_unit(nu),
        c,
        d: Mat::from_element(1, 1, lambda.iter().sum()),
    }
}

/// The filter that exposes `v = (x, x~, z, w)`: both shift registers
/// followed by the two raw channels.
pub fn combined_filter(nu: usize, nutilde: usize, d: usize) -> FilterRealization {
    let id = eye(d);
    let ns = nu + nutilde;
    let a = block_diag(&[&jordan(nu), &jordan(nutilde)]);
    let b = block_diag(&[&last_unit(nu), &last_unit(nutilde)]);
    let c = vstack(&[&eye(ns), &zeros(2, ns)]);
    let dd = vstack(&[&zeros(ns, 2), &eye(2)]);
    FilterRealization {
        a: kron(&a, &id),
        b: kron(&b, &id),
        c: kron(&c, &id),
        d: kron(&dd, &id),
        channel_dim: d,
    }
}

/// `P(lambda, lambda~) (x) I_d` with `v^T P v = 2 (w^T y + z^T y~)`.
pub fn supply_matrix(p: &MultiplierParam) -> Mat {
    supply_from(p.nu, p.nutilde, p.d, &p.lambda, &p.lambda_tilde)
}

pub(crate) fn supply_from(nu: usize, nutilde: usize, d: usize, lambda: &[f64], lambda_tilde: &[f64]) -> Mat {
    let causal = conic_filter(lambda);
    let anti = conic_filter(lambda_tilde);
    let n = nu + nutilde + 2;
    let (iz, iw) = (nu + nutilde, nu + nutilde + 1);
    let mut s = zeros(n, n);
    for j in 0..nu {
        s[(iw, j)] = causal.c[(0, j)];
        s[(j, iw)] = causal.c[(0, j)];
    }
    for j in 0..nutilde {
        s[(iz, nu + j)] = anti.c[(0, j)];
        s[(nu + j, iz)] = anti.c[(0, j)];
    }
    let dsum = causal.d[(0, 0)] + anti.d[(0, 0)];
    s[(iz, iw)] = dsum;
    s[(iw, iz)] = dsum;
    kron(&s, &eye(d))
}

/// `Z(E) = [[0, E^T (x) I_d], [E (x) I_d, 0]]`.
pub fn terminal_cost(p: &MultiplierParam) -> Mat {
    terminal_from(&p.e, p.d)
}

pub(crate) fn terminal_from(e: &Mat, d: usize) -> Mat {
    let (nut, nu) = e.shape();
    let mut z = zeros(nu + nut, nu + nut);
    z.view_mut((nu, 0), (nut, nu)).copy_from(e);
    z.view_mut((0, nu), (nu, nut)).copy_from(&e.transpose());
    kron(&z, &eye(d))
}

/// `M_T = D_lambda^T + (D_lambda~^T)^T - (B~^T)^T E B^T` for the scalar
/// lifted filters.
pub fn m_matrix(p: &MultiplierParam, t: usize) -> Result<Mat> {
    m_from(&p.lambda, &p.lambda_tilde, &p.e, t)
}

pub(crate) fn m_from(lambda: &[f64], lambda_tilde: &[f64], e: &Mat, t: usize) -> Result<Mat> {
    let causal = lift(&conic_filter(lambda), t)?;
    let anti = lift(&conic_filter(lambda_tilde), t)?;
    Ok(&causal.d_t + anti.d_t.transpose() - anti.b_t.transpose() * e * &causal.b_t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperdominanceReport {
    pub matrix: Mat,
    /// `min_{i != j} -M_ij` (`+inf` for 1x1).
    pub off_diagonal_margin: f64,
    pub row_sum_margin: f64,
    pub column_sum_margin: f64,
    pub tol: f64,
    pub pass: bool,
}

impl HyperdominanceReport {
    pub fn worst_margin(&self) -> f64 {
        self.off_diagonal_margin.min(self.row_sum_margin).min(self.column_sum_margin)
    }
}

pub fn check_hyperdominance(m: &Mat, tol: f64) -> Result<HyperdominanceReport> {
    if m.nrows() != m.ncols() {
        return Err(IqcError::dim("M", "square", format!("{}x{}", m.nrows(), m.ncols())));
    }
    let n = m.nrows();
    let mut off = f64::INFINITY;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                off = off.min(-m[(i, j)]);
            }
        }
    }
    let row = (0..n).map(|i| m.row(i).sum()).fold(f64::INFINITY, f64::min);
    let col = (0..n).map(|j| m.column(j).sum()).fold(f64::INFINITY, f64::min);
    let pass = off >= -tol && row >= -tol && col >= -tol;
    Ok(HyperdominanceReport {
        matrix: m.clone(),
        off_diagonal_margin: off,
        row_sum_margin: row,
        column_sum_margin: col,
        tol,
        pass,
    })
}

/// `coeffs . theta >= 0` over the decision vector of [`MultiplierParam::to_vector`].
#[derive(Debug, Clone, PartialEq)]
pub struct LinearInequality {
    pub coeffs: Vec<f64>,
    pub label: String,
}

/// Affine description of `M_{T0} in H`: off-diagonal entries `<= 0`, then
/// row sums `>= 0`, then column sums `>= 0`, all written as `a . theta >= 0`.
pub fn hyperdominance_constraints(nu: usize, nutilde: usize) -> Vec<LinearInequality> {
    let t0 = nu + nutilde + 1;
    let n = param_count(nu, nutilde);
    let basis: Vec<Mat> = (0..n)
        .map(|i| {
            let mut theta = vec![0.0; n];
            theta[i] = 1.0;
            let p = MultiplierParam::from_vector(nu, nutilde, 1, &theta).expect("consistent sizes");
            m_matrix(&p, t0).expect("t0 >= 1")
        })
        .collect();
    let mut out = Vec::with_capacity(t0 * t0 + t0);
    for i in 0..t0 {
        for j in 0..t0 {
            if i != j {
                out.push(LinearInequality {
                    coeffs: basis.iter().map(|b| -b[(i, j)]).collect(),
                    label: format!("offdiag({i},{j})"),
                });
            }
        }
    }
    for i in 0..t0 {
        out.push(LinearInequality {
            coeffs: basis.iter().map(|b| b.row(i).sum()).collect(),
            label: format!("rowsum({i})"),
        });
    }
    for j in 0..t0 {
        out.push(LinearInequality {
            coeffs: basis.iter().map(|b| b.column(j).sum()).collect(),
            label: format!("colsum({j})"),
        });
    }
    out
}

/// Random parameters with `M_{T0}` doubly hyperdominant: nonnegative
/// band coefficients, `E` pushed up where it would create positive
/// off-diagonal entries, and `lambda_0 + lambda~_0` large enough for the
/// row and column sums. With `tight`, the sums are met with equality.
pub fn sample_feasible<R: Rng + ?Sized>(rng: &mut R, nu: usize, nutilde: usize, d: usize, tight: bool) -> MultiplierParam {
    let t0 = nu + nutilde + 1;
    let coef = |rng: &mut R| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..1.0) };
    let mut lambda: Vec<f64> = (0..=nu).map(|_| coef(rng)).collect();
    let mut lambda_tilde: Vec<f64> = (0..=nutilde).map(|_| coef(rng)).collect();
    lambda[0] = 0.0;
    lambda_tilde[0] = 0.0;
    let mut e = Mat::from_fn(nutilde, nu, |_, _| rng.gen_range(-1.0..1.0));

    let base = m_from(&lambda, &lambda_tilde, &zeros(nutilde, nu), t0).expect("t0 >= 1");
    let (r0, c0) = (t0 - nutilde, t0 - nu);
    for i in 0..nutilde {
        for j in 0..nu {
            let (r, c) = (r0 + i, c0 + j);
            if r != c && base[(r, c)] - e[(i, j)] > 0.0 {
                e[(i, j)] = base[(r, c)] + if tight { 0.0 } else { rng.gen_range(0.0..0.3) };
            }
        }
    }
    let m = m_from(&lambda, &lambda_tilde, &e, t0).expect("t0 >= 1");
    let rows = (0..t0).map(|i| m.row(i).sum()).fold(f64::INFINITY, f64::min);
    let cols = (0..t0).map(|j| m.column(j).sum()).fold(f64::INFINITY, f64::min);
    // each unit of lambda_0 + lambda~_0 raises every row and column sum by one
    let s = (-rows).max(-cols).max(0.0) + if tight { 0.0 } else { rng.gen_range(0.0..0.5) };
    let split = rng.gen_range(0.0..=1.0);
    lambda[0] = s * split;
    lambda_tilde[0] = s * (1.0 - split);
    MultiplierParam {
        nu,
        nutilde,
        lambda,
        lambda_tilde,
        e,
        d,
        require_nonneg_lambda: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scalar_signal(vals: &[f64]) -> Vec<Vector> {
        vals.iter().map(|&v| Vector::from_element(1, v)).collect()
    }

    #[test]
    fn first_order_jordan_filter() {
        let f = jordan_filter(1, 1, 1).unwrap();
        assert_eq!((f.a[(0, 0)], f.b[(0, 0)], f.c[(0, 0)], f.d[(0, 0)]), (0.0, 1.0, -1.0, 1.0));
        let id = jordan_filter(0, 3, 1).unwrap();
        assert!(id.c.iter().all(|&c| c == 0.0));
        assert!(jordan_filter(2, 1, 1).is_err());
    }

    #[test]
    fn impulse_responses_are_one_minus_delay() {
        for nu in 1..=4 {
            for k in 0..=nu {
                let f = jordan_filter(k, nu, 1).unwrap();
                let mut u = vec![0.0; nu + 3];
                u[0] = 1.0;
                let (_, y) = f.simulate(&Vector::zeros(nu), &scalar_signal(&u));
                let mut expect = vec![0.0; nu + 3];
                expect[0] = 1.0;
                if k > 0 {
                    expect[k] = -1.0;
                }
                let got: Vec<f64> = y.iter().map(|v| v[0]).collect();
                assert_eq!(got, expect, "k={k} nu={nu}");
            }
        }
    }

    #[test]
    fn combined_filter_shapes() {
        let f = combined_filter(0, 0, 1);
        assert_eq!(f.states(), 0);
        assert_eq!(f.d, eye(2));
        let f = combined_filter(1, 1, 1);
        assert_eq!(f.a, zeros(2, 2));
        assert_eq!(f.b, eye(2));
        let f = combined_filter(2, 0, 2);
        assert_eq!(f.states(), 4);
        let expect = kron(&Mat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]), &eye(2));
        assert_eq!(f.a, expect);
    }

    #[test]
    fn static_supply_and_zero_supply() {
        let p = MultiplierParam::new(vec![0.7], vec![0.4], zeros(0, 0), 1).unwrap();
        let s = supply_matrix(&p);
        assert_eq!(s, Mat::from_row_slice(2, 2, &[0.0, 1.1, 1.1, 0.0]));
        let z = MultiplierParam::zero(2, 3, 2);
        assert_eq!(supply_matrix(&z), zeros(14, 14));
    }

    #[test]
    fn terminal_cost_examples() {
        let p = MultiplierParam::new(vec![1.0, 1.0], vec![1.0, 1.0], Mat::from_element(1, 1, 2.0), 1).unwrap();
        assert_eq!(terminal_cost(&p), Mat::from_row_slice(2, 2, &[0.0, 2.0, 2.0, 0.0]));
        let q = MultiplierParam::new(vec![1.0, 1.0, 0.5], vec![1.0], zeros(0, 2), 2).unwrap();
        assert_eq!(terminal_cost(&q), zeros(4, 4));
    }

    #[test]
    fn supply_identity_against_simulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (nu, nut, d) in [(1, 0, 1), (2, 1, 1), (1, 3, 2), (3, 3, 1)] {
            let mut p = sample_feasible(&mut rng, nu, nut, d, false);
            if (nu, nut, d) == (1, 0, 1) {
                p.lambda = vec![1.0, 1.0];
                p.lambda_tilde = vec![1.0];
            }
            let horizon = 10;
            let z: Vec<Vector> = (0..horizon).map(|_| Vector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0))).collect();
            let w: Vec<Vector> = (0..horizon).map(|_| Vector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0))).collect();
            let (_, v) = p.filter().respond(&z, &w);
            let kd = |s: StateSpace| StateSpace {
                a: kron(&s.a, &eye(d)),
                b: kron(&s.b, &eye(d)),
                c: kron(&s.c, &eye(d)),
                d: kron(&s.d, &eye(d)),
            };
            let (_, y) = kd(conic_filter(&p.lambda)).simulate(&Vector::zeros(nu * d), &z);
            let (_, yt) = kd(conic_filter(&p.lambda_tilde)).simulate(&Vector::zeros(nut * d), &w);
            let pm = supply_matrix(&p);
            for t in 0..horizon {
                let lhs = v[t].dot(&(&pm * &v[t]));
                let rhs = 2.0 * (w[t].dot(&y[t]) + z[t].dot(&yt[t]));
                assert!((lhs - rhs).abs() < 1e-12, "t={t}");
            }
        }
    }

    #[test]
    fn m2_by_hand() {
        let p = MultiplierParam::new(vec![0.3, 0.5], vec![0.2], zeros(0, 1), 1).unwrap();
        let s = 1.0;
        assert!((m_matrix(&p, 2).unwrap() - Mat::from_row_slice(2, 2, &[s, 0.0, -0.5, s])).amax() < 1e-15);
        let z = MultiplierParam::zero(2, 2, 1);
        for t in 1..6 {
            assert_eq!(m_matrix(&z, t).unwrap(), zeros(t, t));
        }
    }

    #[test]
    fn m_identity_against_simulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for (nu, nut) in [(1, 1), (2, 1), (0, 2), (3, 2), (2, 3)] {
            for horizon in 1..=10 {
                let mut p = sample_feasible(&mut rng, nu, nut, 1, false);
                p.e = Mat::from_fn(nut, nu, |_, _| rng.gen_range(-2.0..2.0));
                let z: Vec<f64> = (0..horizon).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let w: Vec<f64> = (0..horizon).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let (x, y) = conic_filter(&p.lambda).simulate(&Vector::zeros(nu), &scalar_signal(&z));
                let (xt, yt) = conic_filter(&p.lambda_tilde).simulate(&Vector::zeros(nut), &scalar_signal(&w));
                let m = m_matrix(&p, horizon).unwrap();
                let lhs = Vector::from_vec(w.clone()).dot(&(&m * Vector::from_vec(z.clone())));
                let sum: f64 = (0..horizon).map(|t| w[t] * y[t][0] + z[t] * yt[t][0]).sum();
                let rhs = sum - xt[horizon].dot(&(&p.e * &x[horizon]));
                assert!((lhs - rhs).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn terminal_correction_sits_in_corner() {
        let p = MultiplierParam::new(vec![0.0, 0.0], vec![0.0, 0.0], Mat::from_element(1, 1, 1.5), 1).unwrap();
        let m = m_matrix(&p, 3).unwrap();
        let mut expect = zeros(3, 3);
        expect[(2, 2)] = -1.5;
        assert_eq!(m, expect);
    }

    #[test]
    fn hyperdominance_examples() {
        assert!(check_hyperdominance(&eye(2), 0.0).unwrap().pass);
        assert!(check_hyperdominance(&Mat::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]), 0.0).unwrap().pass);
        let r = check_hyperdominance(&Mat::from_row_slice(2, 2, &[1.0, -2.0, 0.0, 1.0]), 0.0).unwrap();
        assert!(!r.pass);
        assert_eq!(r.row_sum_margin, -1.0);
    }

    #[test]
    fn constraint_counts_and_static_case() {
        for nu in 0..4 {
            for nut in 0..4 {
                let t0 = nu + nut + 1;
                assert_eq!(hyperdominance_constraints(nu, nut).len(), t0 * t0 + t0);
            }
        }
        let c = hyperdominance_constraints(0, 0);
        assert!(c.iter().all(|r| r.coeffs == vec![1.0, 1.0]));
        // (lambda_0, lambda_1, lambda~_0): -lambda_1 <= 0, s >= 0, s - lambda_1 >= 0
        let c = hyperdominance_constraints(1, 0);
        let rows: Vec<Vec<f64>> = c.iter().map(|r| r.coeffs.clone()).collect();
        assert!(rows.contains(&vec![0.0, 1.0, 0.0]));
        assert!(rows.contains(&vec![1.0, 1.0, 1.0]));
        assert!(rows.contains(&vec![1.0, 0.0, 1.0]));
    }

    #[test]
    fn constraints_agree_with_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let (nu, nut) = (rng.gen_range(0..4), rng.gen_range(0..4));
            let theta: Vec<f64> = (0..param_count(nu, nut)).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let p = MultiplierParam::from_vector(nu, nut, 1, &theta).unwrap();
            let ok = hyperdominance_constraints(nu, nut)
                .iter()
                .all(|c| c.coeffs.iter().zip(&theta).map(|(a, b)| a * b).sum::<f64>() >= -1e-12);
            assert_eq!(ok, check_hyperdominance(&m_matrix(&p, p.t0()).unwrap(), 1e-12).unwrap().pass);
        }
    }

    #[test]
    fn sampler_is_feasible_and_propagates() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for i in 0..100 {
            let (nu, nut) = (rng.gen_range(0..4), rng.gen_range(0..4));
            let p = sample_feasible(&mut rng, nu, nut, 1, i % 3 == 0);
            for t in 1..=3 * p.t0() {
                let r = check_hyperdominance(&m_matrix(&p, t).unwrap(), DEFAULT_HYPERDOMINANCE_TOL).unwrap();
                assert!(r.pass, "T={t} {p:?} margin {}", r.worst_margin());
            }
        }
    }

    #[test]
    fn cone_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = m_matrix(&sample_feasible(&mut rng, 2, 1, 1, false), 4).unwrap();
        let b = m_matrix(&sample_feasible(&mut rng, 1, 2, 1, false), 4).unwrap();
        let c = a * 0.3 + b * 2.0 + eye(4);
        assert!(check_hyperdominance(&c, 0.0).unwrap().pass);
    }

    #[test]
    fn vector_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let p = sample_feasible(&mut rng, 2, 3, 1, false);
        let q = MultiplierParam::from_vector(2, 3, 1, &p.to_vector()).unwrap();
        assert_eq!(p, q);
    }
}
