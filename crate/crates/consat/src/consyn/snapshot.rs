//! Symmetric network snapshot files, used to carry weights between train and
//! test phases.
//!
//! ```text
//! c consat-symnet v1
//! p symnet <num_units> <num_connections>
//! <k> <unit...> <weight>
//! ```
//!
//! Connections are written in sorted unit-set order, so identical networks
//! produce identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::SymmetricNetwork;
use crate::error::{Error, Result};

const VERSION_LINE: &str = "c consat-symnet v1";

pub fn write_network(net: &SymmetricNetwork) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{VERSION_LINE}");
    let _ = writeln!(out, "p symnet {} {}", net.num_units(), net.num_connections());
    for (vars, weight) in net.connections() {
        let _ = write!(out, "{}", vars.len());
        for v in vars {
            let _ = write!(out, " {v}");
        }
        let _ = writeln!(out, " {weight}");
    }
    out
}

pub fn read_network(text: &str, origin: &str) -> Result<SymmetricNetwork> {
    let mut num_units: Option<usize> = None;
    let mut declared = 0usize;
    let mut connections: Vec<(Vec<usize>, f64)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = lineno + 1;
        if line.is_empty() || line == "c" || line.starts_with("c ") {
            continue;
        }
        if let Some(header) = line.strip_prefix("p ") {
            let parts: Vec<&str> = header.split_whitespace().collect();
            if parts.len() != 3 || parts[0] != "symnet" {
                return Err(Error::parse(origin, lineno, "expected 'p symnet <units> <connections>'"));
            }
            num_units = Some(
                parts[1]
                    .parse()
                    .map_err(|_| Error::parse(origin, lineno, "bad unit count"))?,
            );
            declared = parts[2]
                .parse()
                .map_err(|_| Error::parse(origin, lineno, "bad connection count"))?;
            continue;
        }
        if num_units.is_none() {
            return Err(Error::parse(origin, lineno, "connection before header"));
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let k: usize = toks[0]
            .parse()
            .map_err(|_| Error::parse(origin, lineno, "bad connection order"))?;
        if toks.len() != k + 2 {
            return Err(Error::parse(
                origin,
                lineno,
                format!("expected {} unit ids and a weight", k),
            ));
        }
        let vars: Vec<usize> = toks[1..=k]
            .iter()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::parse(origin, lineno, format!("bad unit id '{t}'")))
            })
            .collect::<Result<_>>()?;
        let weight: f64 = toks[k + 1]
            .parse()
            .map_err(|_| Error::parse(origin, lineno, "bad weight"))?;
        connections.push((vars, weight));
    }

    let num_units = num_units.ok_or_else(|| Error::parse(origin, 0, "missing 'p symnet' header"))?;
    if connections.len() != declared {
        return Err(Error::parse(
            origin,
            0,
            format!("header declares {declared} connections, found {}", connections.len()),
        ));
    }
    SymmetricNetwork::from_connections(num_units, connections)
        .map_err(|e| Error::parse(origin, 0, e.to_string()))
}

pub fn write_network_file(net: &SymmetricNetwork, path: &Path) -> Result<()> {
    fs::write(path, write_network(net)).map_err(|e| Error::io(path, e))
}

pub fn read_network_file(path: &Path) -> Result<SymmetricNetwork> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_network(&text, &path.display().to_string())
}
