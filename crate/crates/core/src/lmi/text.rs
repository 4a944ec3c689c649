//! Line-oriented text form of an [`LmiSystem`].
//!
//! ```text
//! # comment
//! var <name> <rows> <cols> sym|gen
//! objective <index> <coef>
//! lmi <name> <size> <margin>
//! c <i> <j> <value>          constant entry, i <= j
//! t <index> <i> <j> <value>  coefficient entry of scalar <index>, i <= j
//! end
//! scalar <name> ge|eq <constant>
//! a <index> <coef>
//! end
//! ```
//!
//! Scalar indices refer to the concatenated variable table; symmetric
//! variables contribute their lower triangle column by column. Values use
//! shortest round-trip formatting, so dump followed by load is exact.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::{AffineMatrixExpr, LmiSystem, ScalarConstraint, ScalarKind};
use crate::error::{IqcError, Result};
use crate::linalg::Mat;

fn write_upper(out: &mut String, prefix: &str, m: &Mat) {
    for j in 0..m.ncols() {
        for i in 0..=j {
            let v = m[(i, j)];
            if v != 0.0 {
                let _ = writeln!(out, "{prefix}{i} {j} {v}");
            }
        }
    }
}

pub fn dump_system(sys: &LmiSystem) -> String {
    let mut out = String::new();
    for v in &sys.variables {
        let kind = if v.symmetric { "sym" } else { "gen" };
        let _ = writeln!(out, "var {} {} {} {kind}", v.name, v.rows, v.cols);
    }
    for (k, c) in &sys.objective {
        let _ = writeln!(out, "objective {k} {c}");
    }
    for l in &sys.lmis {
        let _ = writeln!(out, "lmi {} {} {}", l.name, l.expr.size, l.margin);
        write_upper(&mut out, "c ", &l.expr.constant);
        for (k, m) in &l.expr.terms {
            write_upper(&mut out, &format!("t {k} "), m);
        }
        out.push_str("end\n");
    }
    for s in &sys.scalars {
        let kind = match s.kind {
            ScalarKind::NonNegative => "ge",
            ScalarKind::Zero => "eq",
        };
        let _ = writeln!(out, "scalar {} {kind} {}", s.name, s.constant);
        for (k, a) in &s.coeffs {
            let _ = writeln!(out, "a {k} {a}");
        }
        out.push_str("end\n");
    }
    out
}

enum Block {
    Lmi(String, AffineMatrixExpr, f64),
    Scalar(ScalarConstraint),
}

struct Parser {
    line: usize,
}

impl Parser {
    fn err(&self, msg: impl Into<String>) -> IqcError {
        IqcError::Parse {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn num<T: std::str::FromStr>(&self, tok: Option<&str>, what: &str) -> Result<T> {
        tok.ok_or_else(|| self.err(format!("missing {what}")))?
            .parse()
            .map_err(|_| self.err(format!("bad {what}")))
    }

    fn arity(&self, toks: &[&str], n: usize) -> Result<()> {
        if toks.len() != n {
            return Err(self.err(format!("expected {} fields, got {}", n, toks.len())));
        }
        Ok(())
    }
}

fn set_sym(m: &mut Mat, i: usize, j: usize, v: f64) {
    m[(i, j)] = v;
    m[(j, i)] = v;
}

pub fn load_system(text: &str) -> Result<LmiSystem> {
    let mut sys = LmiSystem::new();
    let mut objective = BTreeMap::new();
    let mut open: Option<Block> = None;
    let mut p = Parser { line: 0 };
    for (no, raw) in text.lines().enumerate() {
        p.line = no + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match (&mut open, toks[0]) {
            (Some(_), "end") => {
                p.arity(&toks, 1)?;
                match open.take().expect("block is open") {
                    Block::Lmi(name, expr, margin) => sys.add_lmi(&name, expr, margin),
                    Block::Scalar(c) => sys.add_scalar(c),
                }
                .map_err(|e| p.err(e.to_string()))?;
            }
            (Some(Block::Lmi(_, expr, _)), "c") => {
                p.arity(&toks, 4)?;
                let (i, j): (usize, usize) = (p.num(toks.get(1).copied(), "row")?, p.num(toks.get(2).copied(), "col")?);
                let v: f64 = p.num(toks.get(3).copied(), "value")?;
                if i >= expr.size || j >= expr.size {
                    return Err(p.err("entry outside the block"));
                }
                set_sym(&mut expr.constant, i, j, v);
            }
            (Some(Block::Lmi(_, expr, _)), "t") => {
                p.arity(&toks, 5)?;
                let k: usize = p.num(toks.get(1).copied(), "index")?;
                let (i, j): (usize, usize) = (p.num(toks.get(2).copied(), "row")?, p.num(toks.get(3).copied(), "col")?);
                let v: f64 = p.num(toks.get(4).copied(), "value")?;
                if i >= expr.size || j >= expr.size {
                    return Err(p.err("entry outside the block"));
                }
                let n = expr.size;
                let m = expr.terms.entry(k).or_insert_with(|| Mat::zeros(n, n));
                set_sym(m, i, j, v);
            }
            (Some(Block::Scalar(c)), "a") => {
                p.arity(&toks, 3)?;
                let k: usize = p.num(toks.get(1).copied(), "index")?;
                let v: f64 = p.num(toks.get(2).copied(), "value")?;
                c.coeffs.insert(k, v);
            }
            (Some(_), other) => return Err(p.err(format!("unexpected `{other}` inside a block"))),
            (None, "var") => {
                p.arity(&toks, 5)?;
                let rows: usize = p.num(toks.get(2).copied(), "rows")?;
                let cols: usize = p.num(toks.get(3).copied(), "cols")?;
                let symmetric = match toks[4] {
                    "sym" => true,
                    "gen" => false,
                    other => return Err(p.err(format!("expected sym or gen, got `{other}`"))),
                };
                sys.declare(toks[1], rows, cols, symmetric).map_err(|e| p.err(e.to_string()))?;
            }
            (None, "objective") => {
                p.arity(&toks, 3)?;
                let k: usize = p.num(toks.get(1).copied(), "index")?;
                let v: f64 = p.num(toks.get(2).copied(), "value")?;
                objective.insert(k, v);
            }
            (None, "lmi") => {
                p.arity(&toks, 4)?;
                let size: usize = p.num(toks.get(2).copied(), "size")?;
                let margin: f64 = p.num(toks.get(3).copied(), "margin")?;
                open = Some(Block::Lmi(toks[1].to_string(), AffineMatrixExpr::zeros(size), margin));
            }
            (None, "scalar") => {
                p.arity(&toks, 4)?;
                let kind = match toks[2] {
                    "ge" => ScalarKind::NonNegative,
                    "eq" => ScalarKind::Zero,
                    other => return Err(p.err(format!("expected ge or eq, got `{other}`"))),
                };
                open = Some(Block::Scalar(ScalarConstraint {
                    name: toks[1].to_string(),
                    coeffs: BTreeMap::new(),
                    constant: p.num(toks.get(3).copied(), "constant")?,
                    kind,
                }));
            }
            (None, other) => return Err(p.err(format!("unknown keyword `{other}`"))),
        }
    }
    if open.is_some() {
        return Err(p.err("unterminated block"));
    }
    sys.set_objective(objective).map_err(|e| p.err(e.to_string()))?;
    Ok(sys)
}
