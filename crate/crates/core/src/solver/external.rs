use std::io::Write;
use std::process::{Command, Stdio};
use std::time::Instant;

use super::{dump_problem, Backend, ConicProblem, SolveResult, SolveStatus, SolverOptions};
use crate::error::{IqcError, Result};
use crate::linalg::Vector;

/// Runs an external program as the conic backend.
///
/// The problem is written to the child's stdin in the text format of
/// [`dump_problem`], followed by a line `tol <gap> <feas> <max_iter>`. The
/// child answers on stdout with
///
/// ```text
/// status optimal|infeasible|unbounded|numerical-limit
/// iterations <k>
/// x <v0> <v1> ...
/// y <v0> ...
/// z <v0> ...
/// ```
///
/// Objectives, gap and residuals are recomputed here from `x, y, z`, so the
/// result obeys the same contract as the embedded solver.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalCommand {
    pub program: String,
    pub args: Vec<String>,
}

impl ExternalCommand {
    pub fn new(program: impl Into<String>, args: Vec<String>) -> Self {
        Self {
            program: program.into(),
            args,
        }
    }
}

fn parse_vec(toks: &[&str], len: usize, what: &str) -> Result<Vector> {
    if toks.len() != len {
        return Err(IqcError::Solver(format!("`{what}` has {} entries, expected {len}", toks.len())));
    }
    toks.iter()
        .map(|t| t.parse::<f64>().map_err(|_| IqcError::Solver(format!("bad number `{t}` in `{what}`"))))
        .collect::<Result<Vec<f64>>>()
        .map(Vector::from_vec)
}

impl Backend for ExternalCommand {
    fn name(&self) -> &str {
        &self.program
    }

    fn solve(&self, p: &ConicProblem, opts: &SolverOptions) -> Result<SolveResult> {
        p.validate()?;
        let start = Instant::now();
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| IqcError::Solver(format!("cannot start `{}`: {e}", self.program)))?;
        {
            let mut stdin = child.stdin.take().expect("stdin is piped");
            let mut input = dump_problem(p);
            input.push_str(&format!("tol {} {} {}\n", opts.gap_tol, opts.feas_tol, opts.max_iter));
            stdin.write_all(input.as_bytes())?;
        }
        let out = child.wait_with_output()?;
        if !out.status.success() {
            return Err(IqcError::Solver(format!(
                "`{}` exited with {}: {}",
                self.program,
                out.status,
                String::from_utf8_lossy(&out.stderr).trim()
            )));
        }
        let text = String::from_utf8_lossy(&out.stdout);
        let (n, m, pe) = (p.num_vars(), p.h.len(), p.b.len());
        let mut status = None;
        let mut iterations = 0;
        let (mut x, mut y, mut z) = (Vector::zeros(n), Vector::zeros(pe), Vector::zeros(m));
        for line in text.lines() {
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks.first().copied() {
                Some("status") => {
                    status = Some(match toks.get(1).copied() {
                        Some("optimal") => SolveStatus::Optimal,
                        Some("infeasible") => SolveStatus::Infeasible,
                        Some("unbounded") => SolveStatus::Unbounded,
                        Some("numerical-limit") => SolveStatus::NumericalLimit,
                        other => return Err(IqcError::Solver(format!("unknown status {other:?}"))),
                    })
                }
                Some("iterations") => {
                    iterations = toks
                        .get(1)
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| IqcError::Solver("bad iteration count".into()))?
                }
                Some("x") => x = parse_vec(&toks[1..], n, "x")?,
                Some("y") => y = parse_vec(&toks[1..], pe, "y")?,
                Some("z") => z = parse_vec(&toks[1..], m, "z")?,
                _ => {}
            }
        }
        let status = status.ok_or_else(|| IqcError::Solver("no status line in solver output".into()))?;
        let s = &p.h - &p.g * &x;
        let pcost = p.c.dot(&x);
        let gap = s.dot(&z);
        let pres = (&p.a * &x - &p.b).norm() / p.b.norm().max(1.0);
        let dres = (p.a.transpose() * &y + p.g.transpose() * &z + &p.c).norm() / p.c.norm().max(1.0);
        Ok(SolveResult {
            status,
            primal_objective: pcost,
            dual_objective: -(p.b.dot(&y) + p.h.dot(&z)),
            gap,
            relative_gap: gap.abs() / pcost.abs().max(1.0),
            primal_residual: pres,
            dual_residual: dres,
            x,
            s,
            y,
            z,
            iterations,
            wall_time: start.elapsed(),
            message: format!("external backend `{}`", self.program),
        })
    }
}
