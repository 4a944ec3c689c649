//! Discrete-time state-space algebra.
//!
//! Realizations are dense and immutable. Zero-dimensional states are
//! allowed everywhere, which is how static filters are represented.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{IqcError, Result};
use crate::linalg::{block, eye, hstack, spectral_radius, vstack, zeros, Mat, Vector};

/// `x+ = A x + B u`, `y = C x + D u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpace {
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub d: Mat,
}

impl StateSpace {
    pub fn new(a: Mat, b: Mat, c: Mat, d: Mat) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(IqcError::dim("A", format!("{n}x{n}"), shape(&a)));
        }
        if b.nrows() != n {
            return Err(IqcError::dim("B", format!("{n}x{}", b.ncols()), shape(&b)));
        }
        if c.ncols() != n {
            return Err(IqcError::dim("C", format!("{}x{n}", c.nrows()), shape(&c)));
        }
        if d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(IqcError::dim(
                "D",
                format!("{}x{}", c.nrows(), b.ncols()),
                shape(&d),
            ));
        }
        Ok(StateSpace { a, b, c, d })
    }

    /// Static gain `y = D u` without state.
    pub fn static_gain(d: Mat) -> Self {
        StateSpace {
            a: zeros(0, 0),
            b: zeros(0, d.ncols()),
            c: zeros(d.nrows(), 0),
            d,
        }
    }

    pub fn states(&self) -> usize {
        self.a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    /// Runs the recursion from `x0`; returns the states `x_0..x_T` and
    /// outputs `y_0..y_{T-1}`.
    pub fn simulate(&self, x0: &Vector, inputs: &[Vector]) -> (Vec<Vector>, Vec<Vector>) {
        let mut states = Vec::with_capacity(inputs.len() + 1);
        let mut outputs = Vec::with_capacity(inputs.len());
        let mut x = x0.clone();
        for u in inputs {
            outputs.push(&self.c * &x + &self.d * u);
            let next = &self.a * &x + &self.b * u;
            states.push(std::mem::replace(&mut x, next));
        }
        states.push(x);
        (states, outputs)
    }
}

fn shape(m: &Mat) -> String {
    format!("{}x{}", m.nrows(), m.ncols())
}

/// The loop's linear part `x+ = A x + B w`, `z = C x + D w`, together with
/// the performance output `e = C_e x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantRealization {
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub d: Mat,
    pub ce: Mat,
}

impl PlantRealization {
    /// Validates dimensions: `A` is `n x n`, `B` is `n x d`, `C` is `d x n`,
    /// `D` is `d x d` and `C_e` is `p x n`.
    pub fn new(a: Mat, b: Mat, c: Mat, d: Mat, ce: Mat) -> Result<Self> {
        let lin = StateSpace::new(a, b, c, d)?;
        let (n, m) = (lin.states(), lin.inputs());
        if lin.outputs() != m {
            return Err(IqcError::dim("C", format!("{m}x{n}"), shape(&lin.c)));
        }
        if ce.ncols() != n {
            return Err(IqcError::dim("C_e", format!("{}x{n}", ce.nrows()), shape(&ce)));
        }
        Ok(PlantRealization {
            a: lin.a,
            b: lin.b,
            c: lin.c,
            d: lin.d,
            ce,
        })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Signal dimension of the nonlinearity.
    pub fn d(&self) -> usize {
        self.b.ncols()
    }

    pub fn p(&self) -> usize {
        self.ce.nrows()
    }

    pub fn linear_part(&self) -> StateSpace {
        StateSpace {
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.c.clone(),
            d: self.d.clone(),
        }
    }
}

/// Lifted map `(x_0, u^T) -> (x_T, y^T)` over a finite horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedRealization {
    pub horizon: usize,
    pub a_t: Mat,
    pub b_t: Mat,
    pub c_t: Mat,
    pub d_t: Mat,
}

/// Lifts `sys` over `horizon` steps:
/// `A^T = A^T`, `B^T = [A^{T-1}B .. B]`, `C^T = col(C, CA, ..)` and the
/// block lower-triangular Toeplitz `D^T` with `D` on the diagonal and
/// `C A^{i-j-1} B` below it.
pub fn lift(sys: &StateSpace, horizon: usize) -> Result<LiftedRealization> {
    if horizon == 0 {
        return Err(IqcError::InvalidArgument {
            arg: "horizon",
            reason: "must be at least 1".into(),
        });
    }
    let sys = StateSpace::new(sys.a.clone(), sys.b.clone(), sys.c.clone(), sys.d.clone())?;
    let (n, m, k) = (sys.states(), sys.inputs(), sys.outputs());
    let t = horizon;

    let mut powers = Vec::with_capacity(t + 1);
    powers.push(eye(n));
    for i in 1..=t {
        powers.push(&powers[i - 1] * &sys.a);
    }
    // markov[j] = C A^{j-1} B for j >= 1
    let markov: Vec<Mat> = (0..t)
        .map(|j| if j == 0 { sys.d.clone() } else { &sys.c * &powers[j - 1] * &sys.b })
        .collect();

    let mut b_t = zeros(n, m * t);
    let mut c_t = zeros(k * t, n);
    let mut d_t = zeros(k * t, m * t);
    for i in 0..t {
        b_t.view_mut((0, i * m), (n, m))
            .copy_from(&(&powers[t - 1 - i] * &sys.b));
        c_t.view_mut((i * k, 0), (k, n)).copy_from(&(&sys.c * &powers[i]));
        for j in 0..=i {
            d_t.view_mut((i * k, j * m), (k, m)).copy_from(&markov[i - j]);
        }
    }
    Ok(LiftedRealization {
        horizon,
        a_t: powers.pop().unwrap(),
        b_t,
        c_t,
        d_t,
    })
}

/// Filter `xi+ = A xi + B (z, w)`, `v = C xi + D (z, w)`, started at `xi_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterRealization {
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub d: Mat,
    /// Dimension of each of the two input channels `z` and `w`.
    pub channel_dim: usize,
}

impl FilterRealization {
    pub fn states(&self) -> usize {
        self.a.nrows()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    pub fn as_state_space(&self) -> StateSpace {
        StateSpace {
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.c.clone(),
            d: self.d.clone(),
        }
    }

    /// Filter response from zero initial state; returns `xi_0..xi_T` and `v_0..v_{T-1}`.
    pub fn respond(&self, z: &[Vector], w: &[Vector]) -> (Vec<Vector>, Vec<Vector>) {
        let inputs: Vec<Vector> = z
            .iter()
            .zip(w)
            .map(|(zt, wt)| Vector::from_iterator(zt.len() + wt.len(), zt.iter().chain(wt.iter()).copied()))
            .collect();
        self.as_state_space().simulate(&Vector::zeros(self.states()), &inputs)
    }
}

/// Series connection of a filter in front of the plant, state `eta = (xi, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedRealization {
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub d: Mat,
    pub filter_states: usize,
    pub plant_states: usize,
}

impl AugmentedRealization {
    pub fn as_state_space(&self) -> StateSpace {
        StateSpace {
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.c.clone(),
            d: self.d.clone(),
        }
    }
}

/// Feeds `(z, w) = (C x + D w, w)` of the plant into the filter.
pub fn interconnect(filter: &FilterRealization, plant: &PlantRealization) -> Result<AugmentedRealization> {
    let (n, d) = (plant.n(), plant.d());
    let np = filter.states();
    if filter.channel_dim != d || filter.b.ncols() != 2 * d || filter.d.ncols() != 2 * d {
        return Err(IqcError::dim(
            "filter input partition",
            format!("({d}, {d})"),
            format!("({0}, {0}) with {1} input columns", filter.channel_dim, filter.b.ncols()),
        ));
    }
    let c0 = vstack(&[&plant.c, &zeros(d, n)]);
    let d1 = vstack(&[&plant.d, &eye(d)]);
    let a = block(&[&[&filter.a, &(&filter.b * &c0)], &[&zeros(n, np), &plant.a]]);
    let b = vstack(&[&(&filter.b * &d1), &plant.b]);
    let c = hstack(&[&filter.c, &(&filter.d * &c0)]);
    let dd = &filter.d * &d1;
    Ok(AugmentedRealization {
        a,
        b,
        c,
        d: dd,
        filter_states: np,
        plant_states: n,
    })
}

/// True iff every eigenvalue of `a` has modulus strictly below `1 - margin`.
pub fn is_schur(a: &Mat, margin: f64) -> bool {
    assert_eq!(a.nrows(), a.ncols(), "is_schur needs a square matrix");
    spectral_radius(a) < 1.0 - margin
}

/// `G(z) = C (zI - A)^{-1} B + D`.
pub fn freq_response(sys: &StateSpace, z: Complex64) -> Result<DMatrix<Complex64>> {
    let n = sys.states();
    let to_c = |m: &Mat| m.map(|v| Complex64::new(v, 0.0));
    let d = to_c(&sys.d);
    if n == 0 {
        return Ok(d);
    }
    let mut resolvent = to_c(&sys.a) * Complex64::new(-1.0, 0.0);
    for i in 0..n {
        resolvent[(i, i)] += z;
    }
    let scale = 1.0 + sys.a.iter().fold(0.0f64, |m, v| m.max(v.abs())) + z.norm();
    let lu = resolvent.lu();
    let u = lu.u();
    let min_pivot = (0..n).map(|i| u[(i, i)].norm()).fold(f64::INFINITY, f64::min);
    if min_pivot <= 1e-13 * scale {
        return Err(IqcError::SingularResolvent { re: z.re, im: z.im });
    }
    let x = lu
        .solve(&to_c(&sys.b))
        .ok_or(IqcError::SingularResolvent { re: z.re, im: z.im })?;
    Ok(to_c(&sys.c) * x + d)
}
