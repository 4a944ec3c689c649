//! Text form of a [`ConicProblem`], using the same keyword-and-triplet
//! layout as the LMI dump.
//!
//! ```text
//! conic <n> <m> <p>          unknowns, cone rows, equality rows
//! cones <linear> <psd orders...>
//! c <j> <value>
//! g <i> <j> <value>
//! h <i> <value>
//! a <i> <j> <value>
//! b <i> <value>
//! ```
//!
//! Entries not listed are zero.

use std::fmt::Write;

use super::{ConeDims, ConicProblem};
use crate::error::{IqcError, Result};
use crate::linalg::{zeros, Mat, Vector};

pub fn dump_problem(p: &ConicProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "conic {} {} {}", p.num_vars(), p.h.len(), p.b.len());
    let _ = write!(out, "cones {}", p.cones.linear);
    for n in &p.cones.psd {
        let _ = write!(out, " {n}");
    }
    out.push('\n');
    let vec = |out: &mut String, tag: &str, v: &Vector| {
        for (i, x) in v.iter().enumerate() {
            if *x != 0.0 {
                let _ = writeln!(out, "{tag} {i} {x}");
            }
        }
    };
    let mat = |out: &mut String, tag: &str, m: &Mat| {
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != 0.0 {
                    let _ = writeln!(out, "{tag} {i} {j} {}", m[(i, j)]);
                }
            }
        }
    };
    vec(&mut out, "c", &p.c);
    mat(&mut out, "g", &p.g);
    vec(&mut out, "h", &p.h);
    mat(&mut out, "a", &p.a);
    vec(&mut out, "b", &p.b);
    out
}

pub fn load_problem(text: &str) -> Result<ConicProblem> {
    let err = |line: usize, msg: String| IqcError::Parse { line, msg };
    let mut p: Option<ConicProblem> = None;
    for (no, raw) in text.lines().enumerate() {
        let line_no = no + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let ints = |from: usize, count: usize| -> Result<Vec<usize>> {
            (from..from + count)
                .map(|k| {
                    toks.get(k)
                        .ok_or_else(|| err(line_no, "missing field".into()))?
                        .parse::<usize>()
                        .map_err(|_| err(line_no, format!("bad integer `{}`", toks[k])))
                })
                .collect()
        };
        let val = |k: usize| -> Result<f64> {
            if toks.len() != k + 1 {
                return Err(err(line_no, format!("expected {} fields, got {}", k + 1, toks.len())));
            }
            toks[k].parse().map_err(|_| err(line_no, format!("bad number `{}`", toks[k])))
        };
        match toks[0] {
            "conic" => {
                let d = ints(1, 3)?;
                p = Some(ConicProblem {
                    c: Vector::zeros(d[0]),
                    g: zeros(d[1], d[0]),
                    h: Vector::zeros(d[1]),
                    a: zeros(d[2], d[0]),
                    b: Vector::zeros(d[2]),
                    cones: ConeDims::default(),
                });
            }
            kw => {
                let q = p.as_mut().ok_or_else(|| err(line_no, "missing `conic` header".into()))?;
                let oob = || err(line_no, "index out of range".into());
                match kw {
                    "cones" => {
                        let d = ints(1, toks.len() - 1)?;
                        if d.is_empty() {
                            return Err(err(line_no, "missing orthant size".into()));
                        }
                        q.cones = ConeDims {
                            linear: d[0],
                            psd: d[1..].to_vec(),
                        };
                    }
                    "c" | "h" | "b" => {
                        let i = ints(1, 1)?[0];
                        let v = val(2)?;
                        let target = match kw {
                            "c" => &mut q.c,
                            "h" => &mut q.h,
                            _ => &mut q.b,
                        };
                        *target.get_mut(i).ok_or_else(oob)? = v;
                    }
                    "g" | "a" => {
                        let ij = ints(1, 2)?;
                        let v = val(3)?;
                        let target = if kw == "g" { &mut q.g } else { &mut q.a };
                        *target.get_mut((ij[0], ij[1])).ok_or_else(oob)? = v;
                    }
                    other => return Err(err(line_no, format!("unknown keyword `{other}`"))),
                }
            }
        }
    }
    let p = p.ok_or_else(|| err(0, "empty problem".into()))?;
    p.validate()?;
    Ok(p)
}
