//! Line-oriented weighted CNF files.
//!
//! ```text
//! c consat-wcnf v1
//! c var 1 above(0,1,0)
//! p wcnf <num_vars> <num_clauses>
//! <alpha> <lit> <lit> ... 0
//! ```
//!
//! Literals are `±(var + 1)`. `c var <n> <name>` comments carry optional
//! variable names; other comment lines are skipped on read. Files written by
//! [`write_wcnf`] re-read and re-write byte-identically.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::cnf::{Clause, Literal, WeightedCnf};
use crate::error::{Error, Result};

const VERSION_LINE: &str = "c consat-wcnf v1";

/// Renders a CNF in the wcnf format, variable-name comments included.
pub fn write_wcnf(cnf: &WeightedCnf) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{VERSION_LINE}");
    if let Some(names) = cnf.var_names() {
        for (i, name) in names.iter().enumerate() {
            let _ = writeln!(out, "c var {} {}", i + 1, name);
        }
    }
    let _ = writeln!(out, "p wcnf {} {}", cnf.num_vars(), cnf.clauses().len());
    for clause in cnf.clauses() {
        let _ = write!(out, "{}", clause.alpha());
        for lit in clause.literals() {
            let code = lit.var as i64 + 1;
            let _ = write!(out, " {}", if lit.positive { code } else { -code });
        }
        let _ = writeln!(out, " 0");
    }
    out
}

/// Parses the wcnf format produced by [`write_wcnf`].
pub fn read_wcnf(text: &str, origin: &str) -> Result<WeightedCnf> {
    let mut num_vars: Option<usize> = None;
    let mut names: Vec<(usize, String)> = Vec::new();
    let mut cnf = WeightedCnf::new(0);
    let mut declared_clauses = 0usize;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = lineno + 1;
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("c ") {
            if let Some(spec) = rest.strip_prefix("var ") {
                let mut parts = spec.splitn(2, ' ');
                let idx: usize = parts
                    .next()
                    .unwrap_or("")
                    .parse()
                    .map_err(|_| Error::parse(origin, lineno, "bad variable index"))?;
                let name = parts
                    .next()
                    .ok_or_else(|| Error::parse(origin, lineno, "missing variable name"))?;
                if idx == 0 {
                    return Err(Error::parse(origin, lineno, "variable indices are 1-based"));
                }
                names.push((idx - 1, name.to_string()));
            }
            continue;
        }
        if line == "c" {
            continue;
        }
        if let Some(header) = line.strip_prefix("p ") {
            let parts: Vec<&str> = header.split_whitespace().collect();
            if parts.len() != 3 || parts[0] != "wcnf" {
                return Err(Error::parse(origin, lineno, "expected 'p wcnf <vars> <clauses>'"));
            }
            let nv: usize = parts[1]
                .parse()
                .map_err(|_| Error::parse(origin, lineno, "bad variable count"))?;
            declared_clauses = parts[2]
                .parse()
                .map_err(|_| Error::parse(origin, lineno, "bad clause count"))?;
            num_vars = Some(nv);
            cnf = WeightedCnf::new(nv);
            continue;
        }
        let nv = num_vars.ok_or_else(|| Error::parse(origin, lineno, "clause before header"))?;
        let mut parts = line.split_whitespace();
        let alpha: f64 = parts
            .next()
            .unwrap()
            .parse()
            .map_err(|_| Error::parse(origin, lineno, "bad penalty"))?;
        let mut literals = Vec::new();
        let mut terminated = false;
        for tok in parts {
            let code: i64 = tok
                .parse()
                .map_err(|_| Error::parse(origin, lineno, format!("bad literal '{tok}'")))?;
            if code == 0 {
                terminated = true;
                break;
            }
            let var = code.unsigned_abs() as usize - 1;
            if var >= nv {
                return Err(Error::parse(
                    origin,
                    lineno,
                    format!("literal {code} out of range for {nv} variables"),
                ));
            }
            literals.push(Literal {
                var,
                positive: code > 0,
            });
        }
        if !terminated {
            return Err(Error::parse(origin, lineno, "clause line missing trailing 0"));
        }
        let clause = Clause::new(literals, alpha)
            .map_err(|e| Error::parse(origin, lineno, e.to_string()))?;
        cnf.add_clause(clause)
            .map_err(|e| Error::parse(origin, lineno, e.to_string()))?;
    }

    let nv = num_vars.ok_or_else(|| Error::parse(origin, 0, "missing 'p wcnf' header"))?;
    if cnf.clauses().len() != declared_clauses {
        return Err(Error::parse(
            origin,
            0,
            format!(
                "header declares {} clauses, found {}",
                declared_clauses,
                cnf.clauses().len()
            ),
        ));
    }
    if !names.is_empty() {
        let mut full = vec![String::new(); nv];
        let mut seen = vec![false; nv];
        for (idx, name) in names {
            if idx >= nv {
                return Err(Error::parse(origin, 0, format!("named variable {} out of range", idx + 1)));
            }
            full[idx] = name;
            seen[idx] = true;
        }
        for (i, s) in seen.iter().enumerate() {
            if !s {
                full[i] = format!("x{i}");
            }
        }
        cnf.set_var_names(full)?;
    }
    Ok(cnf)
}

pub fn write_wcnf_file(cnf: &WeightedCnf, path: &Path) -> Result<()> {
    fs::write(path, write_wcnf(cnf)).map_err(|e| Error::io(path, e))
}

pub fn read_wcnf_file(path: &Path) -> Result<WeightedCnf> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_wcnf(&text, &path.display().to_string())
}
