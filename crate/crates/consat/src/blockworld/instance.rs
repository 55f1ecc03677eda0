//! Planning instances: generation, clamping and the instance file format.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;

use super::{bfs_oracle, Bounds, CrossbarIndex};
use crate::error::{Error, Result};

/// Attempts before [`generate_instance`] gives up on the bounds.
pub const DEFAULT_RESAMPLE_LIMIT: usize = 1000;

/// One planning problem: block attributes plus initial and goal stackings.
///
/// Blocks are objects `1..=n_blocks`; object 0 is the floor. Parent maps give
/// the object each block sits on (`initial_parent[b-1]` for block `b`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanningInstance {
    pub bounds: Bounds,
    pub colors: Vec<usize>,
    pub sizes: Vec<usize>,
    pub initial_parent: Vec<usize>,
    pub goal_parent: Vec<usize>,
}

impl PlanningInstance {
    pub fn n_blocks(&self) -> usize {
        self.colors.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.bounds.validate()?;
        let nb = self.n_blocks();
        if nb == 0 {
            return Err(Error::InvalidInstance("no blocks".into()));
        }
        if nb + 1 > self.bounds.n_objects {
            return Err(Error::InvalidInstance(format!(
                "{nb} blocks need {} objects, bounds allow {}",
                nb + 1,
                self.bounds.n_objects
            )));
        }
        if self.sizes.len() != nb
            || self.initial_parent.len() != nb
            || self.goal_parent.len() != nb
        {
            return Err(Error::InvalidInstance(
                "colors, sizes and parent maps must have one entry per block".into(),
            ));
        }
        if self.colors.iter().any(|&c| c >= self.bounds.n_colors) {
            return Err(Error::InvalidInstance("color id out of range".into()));
        }
        if self.sizes.iter().any(|&s| s >= self.bounds.n_sizes) {
            return Err(Error::InvalidInstance("size id out of range".into()));
        }
        for (name, parents) in [
            ("initial", &self.initial_parent),
            ("goal", &self.goal_parent),
        ] {
            check_forest(parents, nb)
                .map_err(|msg| Error::InvalidInstance(format!("{name} configuration: {msg}")))?;
        }
        Ok(())
    }
}

/// Checks that a parent map is a stacking forest rooted at the floor:
/// every parent in range, no block its own ancestor, and no two blocks on
/// the same non-floor support.
fn check_forest(parents: &[usize], n_blocks: usize) -> std::result::Result<(), String> {
    for (i, &p) in parents.iter().enumerate() {
        let block = i + 1;
        if p > n_blocks {
            return Err(format!("block {block} sits on nonexistent object {p}"));
        }
        if p == block {
            return Err(format!("block {block} sits on itself"));
        }
    }
    let mut support_of: Vec<Option<usize>> = vec![None; n_blocks + 1];
    for (i, &p) in parents.iter().enumerate() {
        let block = i + 1;
        if p != 0 {
            if let Some(other) = support_of[p] {
                return Err(format!("blocks {other} and {block} both sit on block {p}"));
            }
            support_of[p] = Some(block);
        }
    }
    for start in 1..=n_blocks {
        let mut cur = start;
        let mut steps = 0;
        while cur != 0 {
            cur = parents[cur - 1];
            steps += 1;
            if steps > n_blocks {
                return Err(format!("cycle through block {start}"));
            }
        }
    }
    Ok(())
}

/// Draws a random stacking of `n_blocks` blocks: blocks are shuffled, then
/// each is placed on the floor or on a uniformly chosen current stack top.
fn random_configuration<R: Rng + ?Sized>(rng: &mut R, n_blocks: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (1..=n_blocks).collect();
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let mut parents = vec![0usize; n_blocks];
    let mut tops: Vec<usize> = Vec::new();
    for &block in &order {
        // Index 0 is the floor, the rest are current stack tops.
        let pick = rng.gen_range(0..=tops.len());
        if pick > 0 {
            let target = tops.swap_remove(pick - 1);
            parents[block - 1] = target;
        }
        tops.push(block);
    }
    parents
}

/// Generates a random instance that the search oracle confirms solvable
/// within `bounds.k_steps - 1` moves, resampling up to `limit` times.
pub fn generate_instance_with_limit<R: Rng + ?Sized>(
    rng: &mut R,
    n_blocks: usize,
    bounds: Bounds,
    limit: usize,
) -> Result<PlanningInstance> {
    bounds.validate()?;
    if n_blocks + 1 > bounds.n_objects {
        return Err(Error::InvalidInstance(format!(
            "{n_blocks} blocks do not fit in {} objects",
            bounds.n_objects
        )));
    }
    if n_blocks == 0 {
        return Err(Error::InvalidInstance("no blocks".into()));
    }
    for _ in 0..limit {
        let inst = PlanningInstance {
            bounds,
            colors: (0..n_blocks).map(|_| rng.gen_range(0..bounds.n_colors)).collect(),
            sizes: (0..n_blocks).map(|_| rng.gen_range(0..bounds.n_sizes)).collect(),
            initial_parent: random_configuration(rng, n_blocks),
            goal_parent: random_configuration(rng, n_blocks),
        };
        if bfs_oracle(&inst).is_some() {
            return Ok(inst);
        }
    }
    Err(Error::GenerationExhausted { limit })
}

pub fn generate_instance<R: Rng + ?Sized>(
    rng: &mut R,
    n_blocks: usize,
    bounds: Bounds,
) -> Result<PlanningInstance> {
    generate_instance_with_limit(rng, n_blocks, bounds, DEFAULT_RESAMPLE_LIMIT)
}

/// The clamped input literals for an instance: all color, size and floor
/// variables, the full `above` slices at the first and last steps, and the
/// `cleared` slices derived from them (a block is cleared iff nothing sits
/// on it; the floor always counts as cleared so blocks can land there).
pub fn clamp_literals(inst: &PlanningInstance, index: &CrossbarIndex) -> Vec<(usize, bool)> {
    let bounds = index.bounds();
    let n = bounds.n_objects;
    let k = bounds.k_steps;
    let nb = inst.n_blocks();
    let mut clamps = Vec::new();

    for obj in 0..n {
        for c in 0..bounds.n_colors {
            let on = obj >= 1 && obj <= nb && inst.colors[obj - 1] == c;
            clamps.push((index.color(obj, c), on));
        }
        for s in 0..bounds.n_sizes {
            let on = obj >= 1 && obj <= nb && inst.sizes[obj - 1] == s;
            clamps.push((index.size(obj, s), on));
        }
        clamps.push((index.floor(obj), obj == 0));
    }

    for (t, parents) in [(0, &inst.initial_parent), (k - 1, &inst.goal_parent)] {
        for upper in 0..n {
            for lower in 0..n {
                let on = upper >= 1 && upper <= nb && parents[upper - 1] == lower;
                clamps.push((index.above(upper, lower, t), on));
            }
        }
        for obj in 0..n {
            let covered = obj >= 1 && parents.iter().any(|&p| p == obj);
            clamps.push((index.cleared(obj, t), !covered));
        }
    }
    clamps
}

const VERSION_LINE: &str = "c consat-instance v1";

/// Renders an instance in the key-value instance format.
pub fn write_instance(inst: &PlanningInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{VERSION_LINE}");
    let _ = writeln!(out, "n_objects {}", inst.bounds.n_objects);
    let _ = writeln!(out, "k_steps {}", inst.bounds.k_steps);
    let _ = writeln!(out, "n_colors {}", inst.bounds.n_colors);
    let _ = writeln!(out, "n_sizes {}", inst.bounds.n_sizes);
    let _ = writeln!(out, "n_blocks {}", inst.n_blocks());
    for (key, list) in [
        ("colors", &inst.colors),
        ("sizes", &inst.sizes),
        ("initial_parent", &inst.initial_parent),
        ("goal_parent", &inst.goal_parent),
    ] {
        let _ = write!(out, "{key}");
        for v in list {
            let _ = write!(out, " {v}");
        }
        let _ = writeln!(out);
    }
    out
}

/// Parses the instance format written by [`write_instance`].
pub fn read_instance(text: &str, origin: &str) -> Result<PlanningInstance> {
    let mut scalars: std::collections::HashMap<&str, usize> = std::collections::HashMap::new();
    let mut lists: std::collections::HashMap<&str, Vec<usize>> = std::collections::HashMap::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = lineno + 1;
        if line.is_empty() || line == "c" || line.starts_with("c ") {
            continue;
        }
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap();
        let values: Vec<usize> = parts
            .map(|tok| {
                tok.parse::<usize>()
                    .map_err(|_| Error::parse(origin, lineno, format!("bad number '{tok}'")))
            })
            .collect::<Result<_>>()?;
        match key {
            "n_objects" | "k_steps" | "n_colors" | "n_sizes" | "n_blocks" => {
                if values.len() != 1 {
                    return Err(Error::parse(origin, lineno, format!("{key} takes one value")));
                }
                scalars.insert(
                    match key {
                        "n_objects" => "n_objects",
                        "k_steps" => "k_steps",
                        "n_colors" => "n_colors",
                        "n_sizes" => "n_sizes",
                        _ => "n_blocks",
                    },
                    values[0],
                );
            }
            "colors" | "sizes" | "initial_parent" | "goal_parent" => {
                let key: &str = match key {
                    "colors" => "colors",
                    "sizes" => "sizes",
                    "initial_parent" => "initial_parent",
                    _ => "goal_parent",
                };
                lists.insert(key, values);
            }
            other => {
                return Err(Error::parse(origin, lineno, format!("unknown key '{other}'")));
            }
        }
    }

    let scalar = |key: &str| -> Result<usize> {
        scalars
            .get(key)
            .copied()
            .ok_or_else(|| Error::parse(origin, 0, format!("missing key '{key}'")))
    };
    let list = |key: &str| -> Result<Vec<usize>> {
        lists
            .get(key)
            .cloned()
            .ok_or_else(|| Error::parse(origin, 0, format!("missing key '{key}'")))
    };

    let bounds = Bounds::new(
        scalar("n_objects")?,
        scalar("k_steps")?,
        scalar("n_colors")?,
        scalar("n_sizes")?,
    )?;
    let inst = PlanningInstance {
        bounds,
        colors: list("colors")?,
        sizes: list("sizes")?,
        initial_parent: list("initial_parent")?,
        goal_parent: list("goal_parent")?,
    };
    if inst.n_blocks() != scalar("n_blocks")? {
        return Err(Error::parse(origin, 0, "n_blocks disagrees with list lengths"));
    }
    inst.validate()?;
    Ok(inst)
}

pub fn write_instance_file(inst: &PlanningInstance, path: &Path) -> Result<()> {
    fs::write(path, write_instance(inst)).map_err(|e| Error::io(path, e))
}

pub fn read_instance_file(path: &Path) -> Result<PlanningInstance> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_instance(&text, &path.display().to_string())
}
