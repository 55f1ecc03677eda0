//! Recurrent network snapshot files.
//!
//! ```text
//! c consat-rnnet v1
//! p rnnet <num_vars> <num_connections>
//! <k> <source...> -> <target> <weight>
//! ```
//!
//! `k` is the number of sources (0 for a bias). Connections are written in
//! `(target, sources)` order, so identical networks produce identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::RecurrentNetwork;
use crate::error::{Error, Result};

const VERSION_LINE: &str = "c consat-rnnet v1";

pub fn write_network(net: &RecurrentNetwork) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{VERSION_LINE}");
    let _ = writeln!(out, "p rnnet {} {}", net.num_vars(), net.num_connections());
    for (sources, target, weight) in net.connections() {
        let _ = write!(out, "{}", sources.len());
        for v in sources {
            let _ = write!(out, " {v}");
        }
        let _ = writeln!(out, " -> {target} {weight}");
    }
    out
}

pub fn read_network(text: &str, origin: &str) -> Result<RecurrentNetwork> {
    let mut num_vars: Option<usize> = None;
    let mut declared = 0usize;
    let mut connections: Vec<(Vec<usize>, usize, f64)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = lineno + 1;
        if line.is_empty() || line == "c" || line.starts_with("c ") {
            continue;
        }
        if let Some(header) = line.strip_prefix("p ") {
            let parts: Vec<&str> = header.split_whitespace().collect();
            if parts.len() != 3 || parts[0] != "rnnet" {
                return Err(Error::parse(origin, lineno, "expected 'p rnnet <vars> <connections>'"));
            }
            num_vars = Some(
                parts[1]
                    .parse()
                    .map_err(|_| Error::parse(origin, lineno, "bad variable count"))?,
            );
            declared = parts[2]
                .parse()
                .map_err(|_| Error::parse(origin, lineno, "bad connection count"))?;
            continue;
        }
        if num_vars.is_none() {
            return Err(Error::parse(origin, lineno, "connection before header"));
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let k: usize = toks[0]
            .parse()
            .map_err(|_| Error::parse(origin, lineno, "bad connection order"))?;
        if toks.len() != k + 4 || toks[k + 1] != "->" {
            return Err(Error::parse(
                origin,
                lineno,
                format!("expected '{k} <sources> -> <target> <weight>'"),
            ));
        }
        let sources: Vec<usize> = toks[1..=k]
            .iter()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::parse(origin, lineno, format!("bad source id '{t}'")))
            })
            .collect::<Result<_>>()?;
        let target: usize = toks[k + 2]
            .parse()
            .map_err(|_| Error::parse(origin, lineno, "bad target id"))?;
        let weight: f64 = toks[k + 3]
            .parse()
            .map_err(|_| Error::parse(origin, lineno, "bad weight"))?;
        connections.push((sources, target, weight));
    }

    let num_vars = num_vars.ok_or_else(|| Error::parse(origin, 0, "missing 'p rnnet' header"))?;
    if connections.len() != declared {
        return Err(Error::parse(
            origin,
            0,
            format!("header declares {declared} connections, found {}", connections.len()),
        ));
    }
    RecurrentNetwork::from_connections(num_vars, connections)
        .map_err(|e| Error::parse(origin, 0, e.to_string()))
}

pub fn write_network_file(net: &RecurrentNetwork, path: &Path) -> Result<()> {
    fs::write(path, write_network(net)).map_err(|e| Error::io(path, e))
}

pub fn read_network_file(path: &Path) -> Result<RecurrentNetwork> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_network(&text, &path.display().to_string())
}
