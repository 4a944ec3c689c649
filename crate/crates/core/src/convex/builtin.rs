use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ClosedConjugate, ConvexOracle};
use crate::error::{IqcError, Result};
use crate::linalg::{eye, Mat, Vector};

const ACTIVE_TOL: f64 = 1e-12;

/// Configuration form of a builtin family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BuiltinSpec {
    /// `1/2 x^T Q x` with `Q` positive semidefinite.
    Quadratic { q: Vec<Vec<f64>> },
    /// `max_i a_i^T x + b_i`, shifted so that `f(0) = 0`.
    MaxAffine { slopes: Vec<Vec<f64>>, offsets: Vec<f64> },
    /// Scalar `f` whose derivative is continuous, piecewise linear and
    /// nondecreasing with `f'(0) = 0`; `slopes[i]` is the slope of `f'` on
    /// the i-th interval cut by `breakpoints`.
    SlopeRestricted { breakpoints: Vec<f64>, slopes: Vec<f64> },
    /// `sum_i c_i |x_i|`.
    ScaledAbs { weights: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuiltinKind {
    Quadratic,
    MaxAffine,
    SlopeRestricted,
    ScaledAbs,
}

impl BuiltinKind {
    pub const ALL: [BuiltinKind; 4] = [
        BuiltinKind::Quadratic,
        BuiltinKind::MaxAffine,
        BuiltinKind::SlopeRestricted,
        BuiltinKind::ScaledAbs,
    ];
}

#[derive(Debug, Clone, PartialEq)]
pub enum Builtin {
    Quadratic { q: Mat },
    MaxAffine { slopes: Vec<Vector>, offsets: Vec<f64> },
    SlopeRestricted(PiecewiseSlope),
    ScaledAbs { weights: Vector },
}

/// Scalar convex function with piecewise linear derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseSlope {
    knots: Vec<f64>,
    slopes: Vec<f64>,
}

impl PiecewiseSlope {
    fn slope_at_mid(&self, m: f64) -> f64 {
        let i = self.knots.iter().filter(|&&k| k < m).count();
        self.slopes[i]
    }

    /// `(f'(x), f(x))`, integrating outward from the origin.
    fn eval(&self, x: f64) -> (f64, f64) {
        let mut stops: Vec<f64> = if x >= 0.0 {
            self.knots.iter().copied().filter(|&k| k > 0.0 && k < x).collect()
        } else {
            let mut s: Vec<f64> = self.knots.iter().copied().filter(|&k| k < 0.0 && k > x).collect();
            s.reverse();
            s
        };
        stops.push(x);
        let (mut p, mut g, mut val) = (0.0, 0.0, 0.0);
        for q in stops {
            let h = q - p;
            let s = self.slope_at_mid(0.5 * (p + q));
            val += g * h + 0.5 * s * h * h;
            g += s * h;
            p = q;
        }
        (g, val)
    }

    fn derivative(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    /// Solves `z + t f'(z) = v`.
    fn prox(&self, t: f64, v: f64) -> f64 {
        let h = |z: f64| z + t * self.derivative(z);
        if self.knots.is_empty() {
            return v / (1.0 + t * self.slopes[0]);
        }
        let hk: Vec<f64> = self.knots.iter().map(|&k| h(k)).collect();
        let i = hk.iter().filter(|&&hv| hv < v).count();
        let s = self.slopes[i];
        let anchor = if i < self.knots.len() { i } else { i - 1 };
        self.knots[anchor] + (v - hk[anchor]) / (1.0 + t * s)
    }

    /// Some `z` with `f'(z) = y`, or `None` when `y` is outside the range of `f'`.
    fn inverse_derivative(&self, y: f64) -> Option<f64> {
        let tol = ACTIVE_TOL * (1.0 + y.abs());
        if self.knots.is_empty() {
            let s = self.slopes[0];
            return if s > 0.0 {
                Some(y / s)
            } else if y.abs() <= tol {
                Some(0.0)
            } else {
                None
            };
        }
        let gk: Vec<f64> = self.knots.iter().map(|&k| self.derivative(k)).collect();
        let last = self.knots.len() - 1;
        if y < gk[0] {
            let s = self.slopes[0];
            return (s > 0.0).then(|| self.knots[0] + (y - gk[0]) / s);
        }
        if y > gk[last] {
            let s = self.slopes[last + 1];
            return (s > 0.0).then(|| self.knots[last] + (y - gk[last]) / s);
        }
        for i in 0..last {
            if y >= gk[i] && y <= gk[i + 1] {
                let s = self.slopes[i + 1];
                return Some(if s > 0.0 { self.knots[i] + (y - gk[i]) / s } else { self.knots[i] });
            }
        }
        Some(self.knots[last])
    }
}

fn lex_min(vs: Vec<Vector>) -> Vector {
    vs.into_iter()
        .min_by(|a, b| {
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .expect("nonempty subgradient set")
}

/// Minimum of `cost . theta` over `theta >= 0`, `sum theta = 1`,
/// `sum theta_i p_i = y`; `None` if `y` is outside the convex hull.
/// Enumerates supports of at most `dim + 1` points.
fn hull_lp(points: &[Vector], cost: &[f64], y: &Vector) -> Option<(f64, Vec<f64>)> {
    let d = y.len();
    let k = points.len();
    let max_support = (d + 1).min(k);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let scale = 1.0 + y.norm() + points.iter().map(|p| p.norm()).fold(0.0, f64::max);
    for size in 1..=max_support {
        for subset in subsets(k, size) {
            let mut m = DMatrix::zeros(d + 1, size);
            for (c, &i) in subset.iter().enumerate() {
                m.view_mut((0, c), (d, 1)).copy_from(&points[i]);
                m[(d, c)] = 1.0;
            }
            let mut rhs = Vector::zeros(d + 1);
            rhs.rows_mut(0, d).copy_from(y);
            rhs[d] = 1.0;
            let mtm = m.transpose() * &m;
            let Some(theta) = mtm.clone().lu().solve(&(m.transpose() * &rhs)) else {
                continue;
            };
            if !theta.iter().all(|v| v.is_finite()) || theta.iter().any(|&v| v < -1e-12) {
                continue;
            }
            if (&m * &theta - &rhs).norm() > 1e-10 * scale {
                continue;
            }
            let val: f64 = subset.iter().zip(theta.iter()).map(|(&i, t)| cost[i] * t).sum();
            if best.as_ref().is_none_or(|(b, _)| val < *b) {
                let mut full = vec![0.0; k];
                for (&i, t) in subset.iter().zip(theta.iter()) {
                    full[i] = t.max(0.0);
                }
                best = Some((val, full));
            }
        }
    }
    best
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, size, &mut Vec::new(), &mut out);
    out
}

impl Builtin {
    pub fn quadratic(q: Mat) -> Result<Self> {
        if q.nrows() != q.ncols() || q.nrows() == 0 {
            return Err(IqcError::InvalidFunction("Q must be square and nonempty".into()));
        }
        let q = crate::linalg::symmetrize(&q);
        let min = crate::linalg::min_eig(&q);
        if min < -1e-12 * (1.0 + crate::linalg::max_abs(&q)) {
            return Err(IqcError::InvalidFunction(format!(
                "Q is not positive semidefinite (min eigenvalue {min:e})"
            )));
        }
        Ok(Builtin::Quadratic { q })
    }

    /// `beta/2 x^2`.
    pub fn scalar_quadratic(beta: f64) -> Result<Self> {
        Self::quadratic(Mat::from_element(1, 1, beta))
    }

    /// Shifts the offsets so that `f(0) = 0` and rejects the family when
    /// `0` is not a subgradient at the origin.
    pub fn max_affine(slopes: Vec<Vector>, offsets: Vec<f64>) -> Result<Self> {
        if slopes.is_empty() || slopes.len() != offsets.len() {
            return Err(IqcError::InvalidFunction(
                "max-affine needs one offset per slope and at least one piece".into(),
            ));
        }
        let d = slopes[0].len();
        if d == 0 || slopes.iter().any(|a| a.len() != d) {
            return Err(IqcError::InvalidFunction("max-affine slopes have inconsistent dimensions".into()));
        }
        let top = offsets.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let offsets: Vec<f64> = offsets.iter().map(|b| b - top).collect();
        let active: Vec<Vector> = slopes
            .iter()
            .zip(&offsets)
            .filter(|(_, &b)| b >= -ACTIVE_TOL)
            .map(|(a, _)| a.clone())
            .collect();
        let zeros = vec![0.0; active.len()];
        if hull_lp(&active, &zeros, &Vector::zeros(d)).is_none() {
            return Err(IqcError::InvalidFunction(
                "0 is not a subgradient of the max-affine function at the origin".into(),
            ));
        }
        Ok(Builtin::MaxAffine { slopes, offsets })
    }

    pub fn slope_restricted(breakpoints: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        if slopes.len() != breakpoints.len() + 1 {
            return Err(IqcError::InvalidFunction(
                "slope-restricted needs one more slope than breakpoints".into(),
            ));
        }
        if slopes.iter().any(|&s| !(s >= 0.0) || !s.is_finite()) {
            return Err(IqcError::InvalidFunction("slopes must be finite and nonnegative".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) || breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(IqcError::InvalidFunction("breakpoints must be strictly increasing".into()));
        }
        Ok(Builtin::SlopeRestricted(PiecewiseSlope {
            knots: breakpoints,
            slopes,
        }))
    }

    pub fn scaled_abs(weights: Vector) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|&c| !(c >= 0.0) || !c.is_finite()) {
            return Err(IqcError::InvalidFunction("weights must be nonnegative".into()));
        }
        Ok(Builtin::ScaledAbs { weights })
    }

    pub fn from_spec(spec: &BuiltinSpec) -> Result<Self> {
        match spec {
            BuiltinSpec::Quadratic { q } => {
                let n = q.len();
                if q.iter().any(|r| r.len() != n) {
                    return Err(IqcError::InvalidFunction("Q must be square".into()));
                }
                Self::quadratic(Mat::from_fn(n, n, |i, j| q[i][j]))
            }
            BuiltinSpec::MaxAffine { slopes, offsets } => Self::max_affine(
                slopes.iter().map(|a| Vector::from_vec(a.clone())).collect(),
                offsets.clone(),
            ),
            BuiltinSpec::SlopeRestricted { breakpoints, slopes } => {
                Self::slope_restricted(breakpoints.clone(), slopes.clone())
            }
            BuiltinSpec::ScaledAbs { weights } => Self::scaled_abs(Vector::from_vec(weights.clone())),
        }
    }

    pub fn kind(&self) -> BuiltinKind {
        match self {
            Builtin::Quadratic { .. } => BuiltinKind::Quadratic,
            Builtin::MaxAffine { .. } => BuiltinKind::MaxAffine,
            Builtin::SlopeRestricted(_) => BuiltinKind::SlopeRestricted,
            Builtin::ScaledAbs { .. } => BuiltinKind::ScaledAbs,
        }
    }

    /// Random member of `kind` in dimension `d`. The slope-restricted family
    /// is scalar; for `d > 1` it is replaced by a separable quadratic.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, kind: BuiltinKind, d: usize) -> Self {
        match kind {
            BuiltinKind::Quadratic => {
                let r = Mat::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
                let rank_one = rng.gen_bool(0.2);
                let q = if rank_one {
                    let c = r.column(0).into_owned();
                    &c * c.transpose()
                } else {
                    &r * r.transpose()
                };
                Builtin::Quadratic { q: q * rng.gen_range(0.01..2.0) }
            }
            BuiltinKind::MaxAffine => {
                let pieces = rng.gen_range(1..=5);
                let mut slopes = vec![Vector::zeros(d)];
                let mut offsets = vec![0.0];
                for _ in 0..pieces {
                    slopes.push(Vector::from_fn(d, |_, _| rng.gen_range(-2.0..2.0)));
                    offsets.push(if rng.gen_bool(0.3) { 0.0 } else { -rng.gen_range(0.0..2.0) });
                }
                Builtin::MaxAffine { slopes, offsets }
            }
            BuiltinKind::SlopeRestricted if d == 1 => {
                let k = rng.gen_range(0..=3);
                let mut knots: Vec<f64> = (0..k).map(|_| rng.gen_range(-3.0..3.0)).collect();
                knots.sort_by(f64::total_cmp);
                knots.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
                let slopes = (0..=knots.len())
                    .map(|_| if rng.gen_bool(0.25) { 0.0 } else { rng.gen_range(0.0..3.0) })
                    .collect();
                Builtin::SlopeRestricted(PiecewiseSlope { knots, slopes })
            }
            BuiltinKind::SlopeRestricted => {
                let diag = Vector::from_fn(d, |_, _| rng.gen_range(0.0..3.0));
                Builtin::Quadratic { q: Mat::from_diagonal(&diag) }
            }
            BuiltinKind::ScaledAbs => {
                Builtin::ScaledAbs { weights: Vector::from_fn(d, |_, _| rng.gen_range(0.0..2.0)) }
            }
        }
    }

    fn max_affine_values(slopes: &[Vector], offsets: &[f64], x: &Vector) -> (f64, Vec<usize>) {
        let vals: Vec<f64> = slopes.iter().zip(offsets).map(|(a, b)| a.dot(x) + b).collect();
        let top = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tol = ACTIVE_TOL * (1.0 + top.abs() + x.norm());
        let active = (0..vals.len()).filter(|&i| vals[i] >= top - tol).collect();
        (top, active)
    }

    fn max_affine_prox(slopes: &[Vector], offsets: &[f64], t: f64, v: &Vector) -> Option<Vector> {
        // dual: maximize sum theta_i c_i - t/2 |sum theta_i a_i|^2 over the simplex
        let d = v.len();
        let k = slopes.len();
        let c: Vec<f64> = slopes.iter().zip(offsets).map(|(a, b)| a.dot(v) + b).collect();
        let scale = 1.0 + c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for size in 1..=(d + 1).min(k) {
            for subset in subsets(k, size) {
                let mut kkt = DMatrix::zeros(size + 1, size + 1);
                let mut rhs = Vector::zeros(size + 1);
                for (r, &i) in subset.iter().enumerate() {
                    for (s, &j) in subset.iter().enumerate() {
                        kkt[(r, s)] = t * slopes[i].dot(&slopes[j]);
                    }
                    kkt[(r, size)] = 1.0;
                    kkt[(size, r)] = 1.0;
                    rhs[r] = c[i];
                }
                rhs[size] = 1.0;
                let Some(sol) = kkt.lu().solve(&rhs) else { continue };
                if !sol.iter().all(|x| x.is_finite()) {
                    continue;
                }
                let theta = sol.rows(0, size);
                if theta.iter().any(|&x| x < -1e-12) {
                    continue;
                }
                let mu = sol[size];
                let mut u = Vector::zeros(d);
                for (r, &i) in subset.iter().enumerate() {
                    u += &slopes[i] * theta[r].max(0.0);
                }
                let z = v - &u * t;
                let ok = (0..k).all(|i| slopes[i].dot(&z) + offsets[i] <= mu + 1e-10 * scale)
                    && subset
                        .iter()
                        .all(|&i| (slopes[i].dot(&z) + offsets[i] - mu).abs() <= 1e-9 * scale);
                if ok {
                    return Some(z);
                }
            }
        }
        None
    }
}

impl ConvexOracle for Builtin {
    fn dim(&self) -> usize {
        match self {
            Builtin::Quadratic { q } => q.nrows(),
            Builtin::MaxAffine { slopes, .. } => slopes[0].len(),
            Builtin::SlopeRestricted(_) => 1,
            Builtin::ScaledAbs { weights } => weights.len(),
        }
    }

    fn value(&self, x: &Vector) -> f64 {
        match self {
            Builtin::Quadratic { q } => 0.5 * x.dot(&(q * x)),
            Builtin::MaxAffine { slopes, offsets } => Self::max_affine_values(slopes, offsets, x).0,
            Builtin::SlopeRestricted(p) => p.eval(x[0]).1,
            Builtin::ScaledAbs { weights } => weights.iter().zip(x.iter()).map(|(c, v)| c * v.abs()).sum(),
        }
    }

    fn subgradient(&self, x: &Vector) -> Vector {
        match self {
            Builtin::Quadratic { q } => q * x,
            Builtin::SlopeRestricted(p) => Vector::from_element(1, p.derivative(x[0])),
            Builtin::ScaledAbs { weights } => Vector::from_fn(x.len(), |i, _| {
                if x[i] > 0.0 {
                    weights[i]
                } else {
                    -weights[i]
                }
            }),
            Builtin::MaxAffine { .. } => lex_min(self.extreme_subgradients(x)),
        }
    }

    fn extreme_subgradients(&self, x: &Vector) -> Vec<Vector> {
        match self {
            Builtin::MaxAffine { slopes, offsets } => {
                let (_, active) = Self::max_affine_values(slopes, offsets, x);
                let mut out: Vec<Vector> = Vec::new();
                for i in active {
                    if !out.contains(&slopes[i]) {
                        out.push(slopes[i].clone());
                    }
                }
                out
            }
            Builtin::ScaledAbs { weights } => {
                let mut out = vec![Vector::zeros(x.len())];
                for i in 0..x.len() {
                    if x[i] != 0.0 {
                        for g in &mut out {
                            g[i] = weights[i] * x[i].signum();
                        }
                    } else {
                        let mut next = Vec::with_capacity(out.len() * 2);
                        for g in out {
                            let mut lo = g.clone();
                            lo[i] = -weights[i];
                            let mut hi = g;
                            hi[i] = weights[i];
                            next.push(lo);
                            if weights[i] != 0.0 {
                                next.push(hi);
                            }
                        }
                        out = next;
                    }
                }
                out
            }
            _ => vec![self.subgradient(x)],
        }
    }

    fn prox(&self, t: f64, v: &Vector) -> Result<Vector> {
        if t <= 0.0 || !t.is_finite() {
            return Err(IqcError::InvalidArgument {
                arg: "t",
                reason: format!("prox step must be positive, got {t}"),
            });
        }
        match self {
            Builtin::Quadratic { q } => {
                let m = eye(q.nrows()) + q * t;
                m.cholesky()
                    .map(|c| c.solve(v))
                    .ok_or(IqcError::Singular { what: "I + tQ".into() })
            }
            Builtin::SlopeRestricted(p) => Ok(Vector::from_element(1, p.prox(t, v[0]))),
            Builtin::ScaledAbs { weights } => Ok(Vector::from_fn(v.len(), |i, _| {
                let thr = t * weights[i];
                v[i].signum() * (v[i].abs() - thr).max(0.0)
            })),
            Builtin::MaxAffine { slopes, offsets } => match Self::max_affine_prox(slopes, offsets, t, v) {
                Some(z) => Ok(z),
                None => super::numeric_prox(self, t, v),
            },
        }
    }

    fn closed_conjugate(&self, y: &Vector) -> Option<ClosedConjugate> {
        Some(match self {
            Builtin::Quadratic { q } => {
                let eig = q.clone().symmetric_eigen();
                let coords = eig.eigenvectors.transpose() * y;
                let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
                let tol = 1e-10 * (1.0 + top);
                let mut val = 0.0;
                for (lam, c) in eig.eigenvalues.iter().zip(coords.iter()) {
                    if *lam > tol {
                        val += 0.5 * c * c / lam;
                    } else if c.abs() > 1e-9 * (1.0 + y.norm()) {
                        return Some(ClosedConjugate::Infinite);
                    }
                }
                ClosedConjugate::Finite(val)
            }
            Builtin::ScaledAbs { weights } => {
                let inside = y
                    .iter()
                    .zip(weights.iter())
                    .all(|(v, c)| v.abs() <= c * (1.0 + 1e-12) + 1e-15);
                if inside {
                    ClosedConjugate::Finite(0.0)
                } else {
                    ClosedConjugate::Infinite
                }
            }
            Builtin::SlopeRestricted(p) => match p.inverse_derivative(y[0]) {
                Some(z) => ClosedConjugate::Finite(y[0] * z - p.eval(z).1),
                None => ClosedConjugate::Infinite,
            },
            Builtin::MaxAffine { slopes, offsets } => {
                let cost: Vec<f64> = offsets.iter().map(|b| -b).collect();
                match hull_lp(slopes, &cost, y) {
                    Some((v, _)) => ClosedConjugate::Finite(v),
                    None => ClosedConjugate::Infinite,
                }
            }
        })
    }

    fn gradient_lipschitz(&self) -> Option<f64> {
        match self {
            Builtin::Quadratic { q } => Some(crate::linalg::max_eig(q).max(0.0)),
            Builtin::SlopeRestricted(p) => Some(p.slopes.iter().copied().fold(0.0, f64::max)),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v1(x: f64) -> Vector {
        Vector::from_element(1, x)
    }

    #[test]
    fn closed_form_proxes() {
        let beta = 2.5;
        let f = Builtin::scalar_quadratic(beta).unwrap();
        assert!((f.prox(0.4, &v1(3.0)).unwrap()[0] - 3.0 / (1.0 + 0.4 * beta)).abs() < 1e-14);
        let g = Builtin::scaled_abs(Vector::from_element(1, 1.0)).unwrap();
        assert_eq!(g.prox(0.5, &v1(2.0)).unwrap()[0], 1.5);
        assert_eq!(g.prox(0.5, &v1(-0.2)).unwrap()[0], 0.0);
    }

    #[test]
    fn max_affine_kink_capture() {
        let f = Builtin::max_affine(vec![v1(0.0), v1(1.0)], vec![0.0, 0.0]).unwrap();
        let z = f.prox(1.0, &v1(0.5)).unwrap();
        assert!(z[0].abs() < 1e-14);
        // brute-force one-dimensional minimization
        let obj = |z: f64| f.value(&v1(z)) + (z - 0.5).powi(2) / 2.0;
        let best = (-2000..=2000).map(|i| i as f64 * 1e-3).min_by(|a, b| obj(*a).total_cmp(&obj(*b))).unwrap();
        assert!((best - z[0]).abs() <= 1e-3);
    }

    #[test]
    fn max_affine_normalization() {
        let f = Builtin::max_affine(vec![v1(-1.0), v1(1.0)], vec![3.0, 3.0]).unwrap();
        assert_eq!(f.value(&v1(0.0)), 0.0);
        assert!(Builtin::max_affine(vec![v1(1.0), v1(2.0)], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn slope_restricted_matches_quadrature() {
        let f = Builtin::slope_restricted(vec![-1.0, 0.5, 2.0], vec![0.5, 2.0, 0.0, 1.0]).unwrap();
        let deriv = |x: f64| f.subgradient(&v1(x))[0];
        for &x in &[-2.5, -1.0, -0.3, 0.0, 0.5, 1.2, 3.0] {
            // trapezoid rule on f'
            let n = 20000;
            let h = x / n as f64;
            let integral: f64 = (0..n).map(|i| 0.5 * h * (deriv(i as f64 * h) + deriv((i + 1) as f64 * h))).sum();
            assert!((integral - f.value(&v1(x))).abs() < 1e-8, "x={x}");
        }
        assert_eq!(deriv(0.0), 0.0);
        for &v in &[-4.0, -1.0, 0.0, 0.7, 2.0, 5.0] {
            let z = f.prox(0.8, &v1(v)).unwrap()[0];
            assert!((z + 0.8 * deriv(z) - v).abs() < 1e-12);
        }
    }

    #[test]
    fn conjugates_are_suprema() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for kind in BuiltinKind::ALL {
            for _ in 0..20 {
                let f = Builtin::sample(&mut rng, kind, 1);
                for &y in &[-1.5, -0.4, 0.0, 0.3, 1.1] {
                    let y = v1(y);
                    let brute = (-6000..=6000)
                        .map(|i| {
                            let w = v1(i as f64 * 1e-3);
                            y.dot(&w) - f.value(&w)
                        })
                        .fold(f64::NEG_INFINITY, f64::max);
                    match f.closed_conjugate(&y).unwrap() {
                        ClosedConjugate::Finite(v) => assert!(v >= brute - 1e-9, "{kind:?} {f:?} y={y}"),
                        ClosedConjugate::Infinite => {}
                    }
                }
            }
        }
    }

    #[test]
    fn lexicographic_selection_at_kinks() {
        let f = Builtin::scaled_abs(Vector::from_vec(vec![1.0, 2.0])).unwrap();
        assert_eq!(f.subgradient(&Vector::zeros(2)), Vector::from_vec(vec![-1.0, -2.0]));
        let g = Builtin::max_affine(vec![v1(0.0), v1(1.0), v1(-1.0)], vec![0.0, 0.0, 0.0]).unwrap();
        assert_eq!(g.subgradient(&v1(0.0))[0], -1.0);
        assert_eq!(g.extreme_subgradients(&v1(0.0)).len(), 3);
    }

    #[test]
    fn spec_round_trip() {
        let spec = BuiltinSpec::SlopeRestricted { breakpoints: vec![1.0], slopes: vec![1.0, 0.0] };
        let f = Builtin::from_spec(&spec).unwrap();
        assert_eq!(f.kind(), BuiltinKind::SlopeRestricted);
        assert!(Builtin::from_spec(&BuiltinSpec::Quadratic { q: vec![vec![-1.0]] }).is_err());
    }
}
