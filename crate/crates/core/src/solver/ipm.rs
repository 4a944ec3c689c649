//! Homogeneous self-dual primal-dual interior-point method with
//! Nesterov-Todd scaling and a Mehrotra predictor-corrector.
//!
//! The embedding solves for `(x, y, z, s, tau, kappa)` with
//!
//! ```text
//! 0     =  A^T y + G^T z + c tau
//! 0     = -A x            + b tau
//! s     = -G x            + h tau
//! kappa = -c^T x - b^T y - h^T z
//! ```
//!
//! `s, z` in the cone and `tau, kappa >= 0`. Optimality is read from
//! `(x, y, z, s) / tau`, infeasibility from the rays when `tau -> 0`.

use std::time::Instant;

use nalgebra::{Cholesky, Dyn, LU};

use super::{Backend, ConeDims, ConicProblem, SolveResult, SolveStatus, SolverOptions};
use crate::error::Result;
use crate::linalg::{eye, jacobi_svd, min_eig, smat, svec_into, svec_len, zeros, Mat, Vector};

/// Fraction of the distance to the boundary taken by each step.
const STEP: f64 = 0.99;

/// The built-in dense solver.
#[derive(Debug, Clone, Copy, Default)]
pub struct Embedded;

impl Backend for Embedded {
    fn name(&self) -> &str {
        "embedded"
    }

    fn solve(&self, problem: &ConicProblem, opts: &SolverOptions) -> Result<SolveResult> {
        problem.validate()?;
        Ok(run(problem, opts))
    }
}

struct Cones {
    linear: usize,
    psd: Vec<usize>,
    offsets: Vec<usize>,
    degree: usize,
}

impl Cones {
    fn new(d: &ConeDims) -> Self {
        let mut offsets = Vec::with_capacity(d.psd.len());
        let mut at = d.linear;
        for &n in &d.psd {
            offsets.push(at);
            at += svec_len(n);
        }
        Self {
            linear: d.linear,
            psd: d.psd.clone(),
            offsets,
            degree: d.degree(),
        }
    }

    fn unpack(&self, v: &[f64], k: usize) -> Mat {
        let n = self.psd[k];
        smat(&v[self.offsets[k]..self.offsets[k] + svec_len(n)], n)
    }

    fn pack(&self, m: &Mat, out: &mut [f64], k: usize) {
        let n = self.psd[k];
        svec_into(m, &mut out[self.offsets[k]..self.offsets[k] + svec_len(n)]);
    }

    fn identity(&self, m: usize) -> Vector {
        let mut e = Vector::zeros(m);
        e.rows_mut(0, self.linear).fill(1.0);
        for k in 0..self.psd.len() {
            self.pack(&eye(self.psd[k]), e.as_mut_slice(), k);
        }
        e
    }

    /// Jordan product `(a b + b a) / 2` blockwise.
    fn jordan(&self, a: &Vector, b: &Vector) -> Vector {
        let mut out = Vector::zeros(a.len());
        for i in 0..self.linear {
            out[i] = a[i] * b[i];
        }
        for k in 0..self.psd.len() {
            let (am, bm) = (self.unpack(a.as_slice(), k), self.unpack(b.as_slice(), k));
            let prod = &am * &bm;
            self.pack(&((&prod + prod.transpose()) * 0.5), out.as_mut_slice(), k);
        }
        out
    }

    /// Largest eigenvalue of `-v` over all blocks.
    fn max_neg_eig(&self, v: &Vector) -> f64 {
        let mut t = f64::NEG_INFINITY;
        for i in 0..self.linear {
            t = t.max(-v[i]);
        }
        for k in 0..self.psd.len() {
            t = t.max(-min_eig(&self.unpack(v.as_slice(), k)));
        }
        t
    }
}

#[derive(Clone, Copy)]
enum Op {
    Wt,
    Winv,
    Wit,
}

/// NT scaling `W z = W^{-T} s = lambda`; on PSD blocks `W(U) = R^T U R`.
struct Scaling {
    w: Vec<f64>,
    r: Vec<Mat>,
    rinv: Vec<Mat>,
    /// Scaled point as a cone vector (diagonal on PSD blocks).
    lam: Vector,
    lam_psd: Vec<Vec<f64>>,
}

impl Scaling {
    fn identity(cones: &Cones, m: usize) -> Self {
        Self {
            w: vec![1.0; cones.linear],
            r: cones.psd.iter().map(|&n| eye(n)).collect(),
            rinv: cones.psd.iter().map(|&n| eye(n)).collect(),
            lam: cones.identity(m),
            lam_psd: cones.psd.iter().map(|&n| vec![1.0; n]).collect(),
        }
    }

    fn apply(&self, cones: &Cones, op: Op, v: &[f64]) -> Vector {
        let mut out = Vector::zeros(v.len());
        for i in 0..cones.linear {
            out[i] = match op {
                Op::Wt => self.w[i] * v[i],
                Op::Winv | Op::Wit => v[i] / self.w[i],
            };
        }
        for k in 0..cones.psd.len() {
            let u = cones.unpack(v, k);
            let (r, ri) = (&self.r[k], &self.rinv[k]);
            let m = match op {
                Op::Wt => r * u * r.transpose(),
                Op::Winv => ri.transpose() * u * ri,
                Op::Wit => ri * u * ri.transpose(),
            };
            cones.pack(&m, out.as_mut_slice(), k);
        }
        out
    }

    /// Scaling at the point whose scaled coordinates under `self` are
    /// `st` (for `s`) and `zt` (for `z`); `None` if either leaves the cone.
    fn rescale(&self, cones: &Cones, st: &Vector, zt: &Vector) -> Option<Scaling> {
        let mut w = Vec::with_capacity(cones.linear);
        let mut lam = Vector::zeros(st.len());
        for i in 0..cones.linear {
            if !(st[i] > 0.0 && zt[i] > 0.0) {
                return None;
            }
            w.push(self.w[i] * (st[i] / zt[i]).sqrt());
            lam[i] = (st[i] * zt[i]).sqrt();
        }
        let mut r = Vec::with_capacity(cones.psd.len());
        let mut rinv = Vec::with_capacity(cones.psd.len());
        let mut lam_psd = Vec::with_capacity(cones.psd.len());
        for k in 0..cones.psd.len() {
            let cs = Cholesky::new(cones.unpack(st.as_slice(), k))?.l();
            let cz = Cholesky::new(cones.unpack(zt.as_slice(), k))?.l();
            let (u, sig, v) = jacobi_svd(&(cz.transpose() * &cs))?;
            let isq = Mat::from_diagonal(&Vector::from_iterator(sig.len(), sig.iter().map(|x| 1.0 / x.sqrt())));
            r.push(&self.r[k] * &cs * v * &isq);
            rinv.push(&isq * u.transpose() * cz.transpose() * &self.rinv[k]);
            cones.pack(&Mat::from_diagonal(&Vector::from_vec(sig.clone())), lam.as_mut_slice(), k);
            lam_psd.push(sig);
        }
        Some(Scaling {
            w,
            r,
            rinv,
            lam,
            lam_psd,
        })
    }

    /// `q` with `lambda o q = rhs`.
    fn lam_solve(&self, cones: &Cones, rhs: &Vector) -> Vector {
        let mut q = Vector::zeros(rhs.len());
        for i in 0..cones.linear {
            q[i] = rhs[i] / self.lam[i];
        }
        for k in 0..cones.psd.len() {
            let l = &self.lam_psd[k];
            let m = cones.unpack(rhs.as_slice(), k);
            let qm = Mat::from_fn(m.nrows(), m.ncols(), |i, j| 2.0 * m[(i, j)] / (l[i] + l[j]));
            cones.pack(&qm, q.as_mut_slice(), k);
        }
        q
    }

    /// Largest `alpha` with `lambda + alpha dv` in the cone.
    fn max_step(&self, cones: &Cones, dv: &Vector) -> f64 {
        let mut t = 0.0f64;
        for i in 0..cones.linear {
            t = t.max(-dv[i] / self.lam[i]);
        }
        for k in 0..cones.psd.len() {
            let l = &self.lam_psd[k];
            let m = cones.unpack(dv.as_slice(), k);
            let scaled = Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] / (l[i] * l[j]).sqrt());
            t = t.max(-min_eig(&scaled));
        }
        if t > 0.0 {
            1.0 / t
        } else {
            f64::INFINITY
        }
    }
}

const REFINE_STEPS: usize = 2;

enum Factor {
    /// Triangular factor of `Ghat = Q R`, so `Ghat^T Ghat = R^T R`.
    Qr(Mat),
    Lu(LU<f64, Dyn, Dyn>),
}

/// Reduced KKT system `[[G^T W^-1 W^-T G, A^T], [A, 0]]`.
struct Kkt {
    ghat: Mat,
    reduced: Mat,
    factor: Factor,
    n: usize,
}

struct Direction {
    x: Vector,
    y: Vector,
    /// `W dz`.
    zt: Vector,
    z: Vector,
}

impl Kkt {
    fn build(p: &ConicProblem, cones: &Cones, sc: &Scaling) -> Option<Kkt> {
        let n = p.num_vars();
        let pe = p.b.len();
        let mut ghat = zeros(p.g.nrows(), n);
        for j in 0..n {
            let col = sc.apply(cones, Op::Wit, p.g.column(j).as_slice());
            ghat.set_column(j, &col);
        }
        let hm = ghat.transpose() * &ghat;
        let (reduced, factor) = if pe == 0 && ghat.nrows() >= n {
            let r = ghat.clone().qr().r();
            if (0..n).any(|i| r[(i, i)] == 0.0 || !r[(i, i)].is_finite()) {
                return None;
            }
            (hm, Factor::Qr(r))
        } else {
            let mut k = zeros(n + pe, n + pe);
            k.view_mut((0, 0), (n, n)).copy_from(&hm);
            k.view_mut((0, n), (n, pe)).copy_from(&p.a.transpose());
            k.view_mut((n, 0), (pe, n)).copy_from(&p.a);
            let f = Factor::Lu(k.clone().lu());
            (k, f)
        };
        if let Factor::Lu(lu) = &factor {
            if !lu.is_invertible() {
                return None;
            }
        }
        Some(Kkt { ghat, reduced, factor, n })
    }

    fn raw_solve(&self, rhs: &Vector) -> Option<Vector> {
        match &self.factor {
            Factor::Qr(r) => {
                let y = r.tr_solve_upper_triangular(rhs)?;
                r.solve_upper_triangular(&y)
            }
            Factor::Lu(lu) => lu.solve(rhs),
        }
    }

    /// Product with the reduced matrix, forming `Ghat^T Ghat` implicitly.
    fn apply(&self, v: &Vector) -> Vector {
        match self.factor {
            Factor::Qr(_) => self.ghat.transpose() * (&self.ghat * v),
            Factor::Lu(_) => &self.reduced * v,
        }
    }

    fn solve_once(&self, cones: &Cones, sc: &Scaling, r1: &Vector, r2: &Vector, r3: &Vector) -> Option<Direction> {
        let t3 = sc.apply(cones, Op::Wit, r3.as_slice());
        let mut rhs = Vector::zeros(self.reduced.nrows());
        rhs.rows_mut(0, self.n).copy_from(&(r1 + self.ghat.transpose() * &t3));
        rhs.rows_mut(self.n, r2.len()).copy_from(r2);
        let mut sol = self.raw_solve(&rhs)?;
        let res = &rhs - self.apply(&sol);
        sol += self.raw_solve(&res)?;
        let x = sol.rows(0, self.n).into_owned();
        let y = sol.rows(self.n, r2.len()).into_owned();
        let zt = &self.ghat * &x - t3;
        let z = sc.apply(cones, Op::Winv, zt.as_slice());
        Some(Direction { x, y, zt, z })
    }

    /// Solves `A^T dy + G^T dz = r1`, `A dx = r2`, `G dx - W^T W dz = r3`,
    /// refining against the unreduced system.
    fn solve(
        &self,
        p: &ConicProblem,
        cones: &Cones,
        sc: &Scaling,
        r1: &Vector,
        r2: &Vector,
        r3: &Vector,
    ) -> Option<Direction> {
        let mut d = self.solve_once(cones, sc, r1, r2, r3)?;
        for _ in 0..REFINE_STEPS {
            let e1 = r1 - p.a.transpose() * &d.y - p.g.transpose() * &d.z;
            let e2 = r2 - &p.a * &d.x;
            let e3 = r3 - &p.g * &d.x + sc.apply(cones, Op::Wt, d.zt.as_slice());
            let c = self.solve_once(cones, sc, &e1, &e2, &e3)?;
            d.x += c.x;
            d.y += c.y;
            d.zt += c.zt;
            d.z += c.z;
        }
        let finite = |v: &Vector| v.iter().all(|t| t.is_finite());
        (finite(&d.x) && finite(&d.y) && finite(&d.z)).then_some(d)
    }
}

struct Metrics {
    pcost: f64,
    dcost: f64,
    gap: f64,
    relgap: f64,
    pres: f64,
    dres: f64,
}

fn finish(
    status: SolveStatus,
    iterations: usize,
    start: Instant,
    message: String,
    parts: (Vector, Vector, Vector, Vector),
    m: &Metrics,
) -> SolveResult {
    let (x, s, y, z) = parts;
    SolveResult {
        status,
        x,
        s,
        y,
        z,
        primal_objective: m.pcost,
        dual_objective: m.dcost,
        gap: m.gap,
        relative_gap: m.relgap,
        primal_residual: m.pres,
        dual_residual: m.dres,
        iterations,
        wall_time: start.elapsed(),
        message,
    }
}

fn run(p: &ConicProblem, opts: &SolverOptions) -> SolveResult {
    let start = Instant::now();
    let cones = Cones::new(&p.cones);
    let (n, m, pe) = (p.num_vars(), p.h.len(), p.b.len());
    let resx0 = p.c.norm().max(1.0);
    let resy0 = p.b.norm().max(1.0);
    let resz0 = p.h.norm().max(1.0);
    let nan = Metrics {
        pcost: f64::NAN,
        dcost: f64::NAN,
        gap: f64::NAN,
        relgap: f64::NAN,
        pres: f64::NAN,
        dres: f64::NAN,
    };
    let empty = || (Vector::zeros(n), Vector::zeros(m), Vector::zeros(pe), Vector::zeros(m));
    let e = cones.identity(m);

    // least-norm starting points under W = I
    let id = Scaling::identity(&cones, m);
    let Some(kkt) = Kkt::build(p, &cones, &id) else {
        return finish(SolveStatus::NumericalLimit, 0, start, "singular initial KKT system".into(), empty(), &nan);
    };
    let zero_n = Vector::zeros(n);
    let zero_m = Vector::zeros(m);
    let neg_c = -&p.c;
    let (Some(primal), Some(dual)) = (
        kkt.solve(p, &cones, &id, &zero_n, &p.b, &p.h),
        kkt.solve(p, &cones, &id, &neg_c, &Vector::zeros(pe), &zero_m),
    ) else {
        return finish(SolveStatus::NumericalLimit, 0, start, "initial KKT solve failed".into(), empty(), &nan);
    };
    let mut x = primal.x;
    let mut s = -primal.z;
    let mut y = dual.y;
    let mut z = dual.z;
    for v in [&mut s, &mut z] {
        let t = cones.max_neg_eig(v);
        if t >= -1e-8 * v.norm().max(1.0) {
            *v += &e * (1.0 + t);
        }
    }
    let (mut tau, mut kappa) = (1.0f64, 1.0f64);
    let Some(mut sc) = id.rescale(&cones, &s, &z) else {
        return finish(SolveStatus::NumericalLimit, 0, start, "initial point outside the cone".into(), empty(), &nan);
    };

    for iter in 0..=opts.max_iter {
        s = sc.apply(&cones, Op::Wt, sc.lam.as_slice());
        z = sc.apply(&cones, Op::Winv, sc.lam.as_slice());

        let ax = &p.a * &x;
        let gx = &p.g * &x;
        let aty_gtz = p.a.transpose() * &y + p.g.transpose() * &z;
        let rx = &aty_gtz + &p.c * tau;
        let ry = &ax - &p.b * tau;
        let rz = &s + &gx - &p.h * tau;
        let cx = p.c.dot(&x);
        let by_hz = p.b.dot(&y) + p.h.dot(&z);
        let rt = kappa + cx + by_hz;
        let sz = s.dot(&z);
        let pcost = cx / tau;
        let dcost = -by_hz / tau;
        let gap = sz / (tau * tau);
        let met = Metrics {
            pcost,
            dcost,
            gap,
            relgap: gap / pcost.abs().max(1.0),
            pres: (ry.norm() / resy0).max(rz.norm() / resz0) / tau,
            dres: rx.norm() / resx0 / tau,
        };
        let scaled = |k: f64| (&x * k, &s * k, &y * k, &z * k);

        if met.pres <= opts.feas_tol && met.dres <= opts.feas_tol && met.relgap <= opts.gap_tol {
            return finish(SolveStatus::Optimal, iter, start, "converged".into(), scaled(1.0 / tau), &met);
        }
        if by_hz < 0.0 {
            let pinf = aty_gtz.norm() / resx0 / -by_hz;
            if pinf <= opts.feas_tol {
                let k = 1.0 / -by_hz;
                let msg = format!("dual ray certifies infeasibility (residual {pinf:.2e})");
                return finish(SolveStatus::Infeasible, iter, start, msg, scaled(k), &met);
            }
        }
        if cx < 0.0 {
            let dinf = (ax.norm() / resy0).max((&gx + &s).norm() / resz0) / -cx;
            if dinf <= opts.feas_tol {
                let msg = format!("primal ray certifies unboundedness (residual {dinf:.2e})");
                return finish(SolveStatus::Unbounded, iter, start, msg, scaled(1.0 / -cx), &met);
            }
        }
        if iter == opts.max_iter {
            let msg = format!("iteration limit {} reached", opts.max_iter);
            return finish(SolveStatus::NumericalLimit, iter, start, msg, scaled(1.0 / tau), &met);
        }

        let fail = |what: &str, met: &Metrics, parts| {
            finish(SolveStatus::NumericalLimit, iter, start, format!("{what} at iteration {iter}"), parts, met)
        };
        let Some(kkt) = Kkt::build(p, &cones, &sc) else {
            return fail("singular KKT system", &met, scaled(1.0 / tau));
        };
        let Some(d1) = kkt.solve(p, &cones, &sc, &neg_c, &p.b, &p.h) else {
            return fail("KKT solve failed", &met, scaled(1.0 / tau));
        };
        let g1 = p.c.dot(&d1.x) + p.b.dot(&d1.y) + p.h.dot(&d1.z);
        let mu = (sz + tau * kappa) / (cones.degree as f64 + 1.0);

        // Newton direction for residual weight `eta` and complementarity
        // targets `rhs_c` (cone) and `t_c` (tau-kappa pair)
        let direction = |eta: f64, rhs_c: &Vector, t_c: f64| -> Option<(Direction, Vector, f64, f64)> {
            let q = sc.lam_solve(&cones, rhs_c);
            let r3 = -(&rz * eta) - sc.apply(&cones, Op::Wt, q.as_slice());
            let d0 = kkt.solve(p, &cones, &sc, &(-(&rx * eta)), &(-(&ry * eta)), &r3)?;
            let g0 = p.c.dot(&d0.x) + p.b.dot(&d0.y) + p.h.dot(&d0.z);
            let dtau = (t_c + tau * (eta * rt + g0)) / (kappa - tau * g1);
            let dkappa = (t_c - kappa * dtau) / tau;
            let d = Direction {
                x: &d0.x + &d1.x * dtau,
                y: &d0.y + &d1.y * dtau,
                zt: &d0.zt + &d1.zt * dtau,
                z: &d0.z + &d1.z * dtau,
            };
            let st = q - &d.zt;
            Some((d, st, dtau, dkappa))
        };
        let step_to_boundary = |d: &Direction, st: &Vector, dtau: f64, dkappa: f64| {
            let mut a = sc.max_step(&cones, st).min(sc.max_step(&cones, &d.zt));
            if dtau < 0.0 {
                a = a.min(-tau / dtau);
            }
            if dkappa < 0.0 {
                a = a.min(-kappa / dkappa);
            }
            a
        };

        let lam_sq = cones.jordan(&sc.lam, &sc.lam);
        let Some((da, sta, dtau_a, dkappa_a)) = direction(1.0, &(-&lam_sq), -tau * kappa) else {
            return fail("affine direction failed", &met, scaled(1.0 / tau));
        };
        let alpha_a = step_to_boundary(&da, &sta, dtau_a, dkappa_a).min(1.0);
        let sigma = (1.0 - alpha_a).powi(3);

        let rhs_c = -&lam_sq + &e * (sigma * mu) - cones.jordan(&sta, &da.zt);
        let t_c = -tau * kappa + sigma * mu - dtau_a * dkappa_a;
        let Some((d, st, dtau, dkappa)) = direction(1.0 - sigma, &rhs_c, t_c) else {
            return fail("combined direction failed", &met, scaled(1.0 / tau));
        };
        let alpha = (STEP * step_to_boundary(&d, &st, dtau, dkappa)).min(1.0);
        if !(alpha > 1e-12) {
            return fail("step length collapsed", &met, scaled(1.0 / tau));
        }

        let new_st = &sc.lam + &st * alpha;
        let new_zt = &sc.lam + &d.zt * alpha;
        let Some(next) = sc.rescale(&cones, &new_st, &new_zt) else {
            return fail("scaling update failed", &met, scaled(1.0 / tau));
        };
        sc = next;
        x += &d.x * alpha;
        y += &d.y * alpha;
        tau += dtau * alpha;
        kappa += dkappa * alpha;
    }
    unreachable!("loop returns on the final iteration")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_eig, svec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// minimize gamma s.t. [[gamma, 1], [1, gamma]] >= 0
    fn two_by_two() -> ConicProblem {
        let mut g = zeros(3, 1);
        g.set_column(0, &Vector::from_vec(svec(&eye(2))).map(|v| -v));
        ConicProblem {
            c: Vector::from_element(1, 1.0),
            g,
            h: Vector::from_vec(svec(&Mat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]))),
            a: zeros(0, 1),
            b: Vector::zeros(0),
            cones: ConeDims {
                linear: 0,
                psd: vec![2],
            },
        }
    }

    #[test]
    fn analytic_two_by_two() {
        let r = run(&two_by_two(), &SolverOptions::default());
        assert_eq!(r.status, SolveStatus::Optimal, "{}", r.message);
        assert!((r.x[0] - 1.0).abs() < 1e-7, "{}", r.x[0]);
        assert!(r.relative_gap <= 1e-8);
        assert!(r.iterations <= 200);
    }

    #[test]
    fn fixed_negative_scalar_is_infeasible() {
        let p = ConicProblem {
            c: Vector::zeros(1),
            g: Mat::from_element(1, 1, -1.0),
            h: Vector::zeros(1),
            a: Mat::from_element(1, 1, 1.0),
            b: Vector::from_element(1, -1.0),
            cones: ConeDims { linear: 1, psd: vec![] },
        };
        let r = run(&p, &SolverOptions::default());
        assert_eq!(r.status, SolveStatus::Infeasible, "{}", r.message);
        // certificate: b^T y + h^T z = -1 with A^T y + G^T z = 0, z >= 0
        assert!((p.b.dot(&r.y) + p.h.dot(&r.z) + 1.0).abs() < 1e-6);
        assert!(r.z[0] >= 0.0);
    }

    #[test]
    fn unbounded_is_detected() {
        // minimize -x s.t. x >= 0
        let p = ConicProblem {
            c: Vector::from_element(1, -1.0),
            g: Mat::from_element(1, 1, -1.0),
            h: Vector::zeros(1),
            a: zeros(0, 1),
            b: Vector::zeros(0),
            cones: ConeDims { linear: 1, psd: vec![] },
        };
        assert_eq!(run(&p, &SolverOptions::default()).status, SolveStatus::Unbounded);
    }

    #[test]
    fn linear_program() {
        // minimize x1 + 2 x2 s.t. x1 + x2 = 1, x >= 0 -> 1
        let p = ConicProblem {
            c: Vector::from_vec(vec![1.0, 2.0]),
            g: -eye(2),
            h: Vector::zeros(2),
            a: Mat::from_row_slice(1, 2, &[1.0, 1.0]),
            b: Vector::from_element(1, 1.0),
            cones: ConeDims { linear: 2, psd: vec![] },
        };
        let r = run(&p, &SolverOptions::default());
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.primal_objective - 1.0).abs() < 1e-7);
        assert!((r.x[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn largest_eigenvalue_matches_analytic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let k = rng.gen_range(1..=6);
            let b = Mat::from_fn(k, k, |_, _| rng.gen_range(-1.0..1.0));
            let mm = &b + b.transpose();
            // minimize gamma s.t. gamma I - M >= 0
            let mut g = zeros(svec_len(k), 1);
            g.set_column(0, &Vector::from_vec(svec(&eye(k))).map(|v| -v));
            let p = ConicProblem {
                c: Vector::from_element(1, 1.0),
                g,
                h: Vector::from_vec(svec(&(-&mm))),
                a: zeros(0, 1),
                b: Vector::zeros(0),
                cones: ConeDims { linear: 0, psd: vec![k] },
            };
            let r = run(&p, &SolverOptions::default());
            assert_eq!(r.status, SolveStatus::Optimal, "{}", r.message);
            assert!((r.x[0] - max_eig(&mm)).abs() < 1e-6);
        }
    }

    #[test]
    fn iteration_limit_reports_numerical_limit() {
        let opts = SolverOptions {
            max_iter: 1,
            ..SolverOptions::default()
        };
        let r = run(&two_by_two(), &opts);
        assert_eq!(r.status, SolveStatus::NumericalLimit);
        assert!(r.message.contains("iteration limit"));
    }
}
