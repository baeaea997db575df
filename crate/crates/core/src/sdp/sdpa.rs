//! Sparse SDPA (`.dat-s`) export of the epigraph problem.
//!
//! SDPA reads `min cᵀy  s.t.  Σ_i F_i y_i − F_0 ⪰ 0`. With `y = (x, t)`
//! each constraint `C + Σ x_v A_v ≺ 0` becomes the block
//! `t·I − C − Σ x_v A_v ⪰ 0`, so `F_0 = C`, `F_v = −A_v` and `F_t = I`.
//! When there are variables, a final block `[[R·I, x], [xᵀ, R]] ⪰ 0`
//! encodes `‖x‖ ≤ R`.

use std::fmt::Write as _;
use std::path::Path;

use super::FeasibilityProblem;
use crate::error::{Error, Result};
use crate::matexpr::rational_to_f64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdpaEntry {
    /// 0 for the constant matrix, `1..=m` for the variables.
    pub matno: usize,
    /// 1-based.
    pub block: usize,
    /// 1-based, `i <= j`.
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpaProblem {
    pub m: usize,
    pub block_sizes: Vec<i64>,
    pub c: Vec<f64>,
    pub entries: Vec<SdpaEntry>,
}

impl SdpaProblem {
    pub fn from_problem(p: &FeasibilityProblem) -> Self {
        let n = p.nvars;
        let t_mat = n + 1;
        let mut entries = Vec::new();
        let mut block_sizes = Vec::new();
        for (b, c) in p.constraints().enumerate() {
            let block = b + 1;
            block_sizes.push(c.dim() as i64);
            for (i, j, v) in c.constant_part().iter_upper() {
                let value = rational_to_f64(v);
                if value != 0.0 {
                    entries.push(SdpaEntry {
                        matno: 0,
                        block,
                        i: i + 1,
                        j: j + 1,
                        value,
                    });
                }
            }
            for (&var, m) in c.terms() {
                for (i, j, v) in m.iter_upper() {
                    let value = -rational_to_f64(v);
                    if value != 0.0 {
                        entries.push(SdpaEntry {
                            matno: var + 1,
                            block,
                            i: i + 1,
                            j: j + 1,
                            value,
                        });
                    }
                }
            }
            for d in 1..=c.dim() {
                entries.push(SdpaEntry {
                    matno: t_mat,
                    block,
                    i: d,
                    j: d,
                    value: 1.0,
                });
            }
        }
        if n > 0 {
            let block = block_sizes.len() + 1;
            block_sizes.push(n as i64 + 1);
            for d in 1..=n + 1 {
                entries.push(SdpaEntry {
                    matno: 0,
                    block,
                    i: d,
                    j: d,
                    value: -p.ball_radius,
                });
            }
            for v in 1..=n {
                entries.push(SdpaEntry {
                    matno: v,
                    block,
                    i: v,
                    j: n + 1,
                    value: 1.0,
                });
            }
        }
        entries.sort_by_key(|e| (e.matno, e.block, e.i, e.j));
        let mut c = vec![0.0; n + 1];
        c[n] = 1.0;
        Self {
            m: n + 1,
            block_sizes,
            c,
            entries,
        }
    }

    /// `Σ_i F_i y_i − F_0` for one block, dense and symmetric.
    pub fn block_value(&self, block: usize, y: &[f64]) -> Vec<Vec<f64>> {
        let size = self.block_sizes[block - 1].unsigned_abs() as usize;
        let mut out = vec![vec![0.0; size]; size];
        for e in self.entries.iter().filter(|e| e.block == block) {
            let w = if e.matno == 0 {
                -e.value
            } else {
                e.value * y[e.matno - 1]
            };
            out[e.i - 1][e.j - 1] += w;
            if e.i != e.j {
                out[e.j - 1][e.i - 1] += w;
            }
        }
        out
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_sdpa(p: &SdpaProblem) -> String {
    let mut s = String::new();
    s.push_str("* epigraph problem: minimize t subject to t*I - F_c(x) >= 0 for every constraint F_c(x) < 0\n");
    s.push_str("* variables y = (x_1, ..., x_n, t); F_0 = C, F_v = -A_v, F_t = I\n");
    if p.block_sizes.len() > 1 || p.m > 1 {
        s.push_str("* the last block [[R*I, x], [x', R]] >= 0 bounds the norm of x when n > 0\n");
    }
    let _ = writeln!(s, "{}", p.m);
    let _ = writeln!(s, "{}", p.block_sizes.len());
    let sizes: Vec<String> = p.block_sizes.iter().map(|b| b.to_string()).collect();
    let _ = writeln!(s, "{}", sizes.join(" "));
    let c: Vec<String> = p.c.iter().map(|&v| num(v)).collect();
    let _ = writeln!(s, "{}", c.join(" "));
    for e in &p.entries {
        let _ = writeln!(s, "{} {} {} {} {}", e.matno, e.block, e.i, e.j, num(e.value));
    }
    s
}

pub fn export_sdpa(p: &FeasibilityProblem, path: &Path) -> Result<()> {
    std::fs::write(path, write_sdpa(&SdpaProblem::from_problem(p)))?;
    Ok(())
}

fn tokens(line: &str) -> Vec<&str> {
    line.split(|c: char| c.is_whitespace() || matches!(c, ',' | '{' | '}' | '(' | ')'))
        .filter(|t| !t.is_empty())
        .collect()
}

/// Reads a sparse SDPA file (comment lines start with `*` or `"`).
pub fn parse_sdpa(text: &str) -> Result<SdpaProblem> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim_start();
            !t.is_empty() && !t.starts_with('*') && !t.starts_with('"')
        })
        .map(|(n, l)| (n + 1, tokens(l)));
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| Error::Parse(format!("sdpa: missing {what}")))
    };
    let bad = |line: usize, msg: &str| Error::Parse(format!("sdpa line {line}: {msg}"));

    let (ln, t) = next("mDIM")?;
    let m: usize = t
        .first()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad(ln, "bad mDIM"))?;
    let (ln, t) = next("nBLOCK")?;
    let nblock: usize = t
        .first()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad(ln, "bad nBLOCK"))?;
    let (ln, t) = next("block structure")?;
    let block_sizes: Vec<i64> = t
        .iter()
        .take(nblock)
        .map(|v| v.parse().map_err(|_| bad(ln, "bad block size")))
        .collect::<Result<_>>()?;
    if block_sizes.len() != nblock {
        return Err(bad(ln, "too few block sizes"));
    }
    let (ln, t) = next("objective")?;
    let c: Vec<f64> = t
        .iter()
        .take(m)
        .map(|v| v.parse().map_err(|_| bad(ln, "bad objective entry")))
        .collect::<Result<_>>()?;
    if c.len() != m {
        return Err(bad(ln, "objective has the wrong length"));
    }
    let mut entries = Vec::new();
    for (ln, t) in lines {
        if t.len() < 5 {
            return Err(bad(ln, "entry needs 5 fields"));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad(ln, "bad integer field"));
        let e = SdpaEntry {
            matno: int(t[0])?,
            block: int(t[1])?,
            i: int(t[2])?,
            j: int(t[3])?,
            value: t[4].parse().map_err(|_| bad(ln, "bad value"))?,
        };
        if e.matno > m || e.block == 0 || e.block > nblock {
            return Err(bad(ln, "index out of range"));
        }
        let size = block_sizes[e.block - 1].unsigned_abs() as usize;
        if e.i == 0 || e.j == 0 || e.i > size || e.j > size || e.i > e.j {
            return Err(bad(ln, "entry outside the upper triangle of its block"));
        }
        entries.push(e);
    }
    Ok(SdpaProblem {
        m,
        block_sizes,
        c,
        entries,
    })
}
