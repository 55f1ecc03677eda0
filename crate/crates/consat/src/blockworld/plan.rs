//! Plans: decoding from activations, encoding back, semantic validation and
//! the breadth-first search oracle.

use std::collections::{HashMap, VecDeque};

use super::{Bounds, CrossbarIndex, PlanningInstance};
use crate::cnf::Activations;
use crate::error::{Error, Result};

/// A move sequence with the stacking configuration at every step.
///
/// `above_trajectory[t][obj]` is the object `obj` sits on at step `t`
/// (`None` for the floor, for absent objects, and for objects whose decoded
/// `above` row is empty or ambiguous).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub moves: Vec<(usize, usize)>,
    pub above_trajectory: Vec<Vec<Option<usize>>>,
}

impl Plan {
    pub fn empty(bounds: Bounds) -> Plan {
        Plan {
            moves: Vec::new(),
            above_trajectory: vec![vec![None; bounds.n_objects]; bounds.k_steps],
        }
    }
}

/// Reads the `move` and `above` crossbars of a Boolean-interpretable state
/// into a [`Plan`]. Never fails; the result may be an invalid plan.
pub fn decode_plan(y: &Activations, index: &CrossbarIndex) -> Plan {
    let bounds = index.bounds();
    let n = bounds.n_objects;
    let mut moves = Vec::new();
    for t in 0..bounds.move_steps() {
        for obj in 0..n {
            if y.bool_at(index.mv(obj, t)) {
                moves.push((obj, t));
            }
        }
    }
    moves.sort_by_key(|&(obj, t)| (t, obj));
    let mut trajectory = Vec::with_capacity(bounds.k_steps);
    for t in 0..bounds.k_steps {
        let mut parents = vec![None; n];
        for upper in 0..n {
            let mut found: Option<usize> = None;
            let mut unique = true;
            for lower in 0..n {
                if y.bool_at(index.above(upper, lower, t)) {
                    if found.is_some() {
                        unique = false;
                    }
                    found = Some(lower);
                }
            }
            parents[upper] = if unique { found } else { None };
        }
        trajectory.push(parents);
    }
    Plan {
        moves,
        above_trajectory: trajectory,
    }
}

/// Builds the full crossbar assignment for a plan: `above` from the
/// trajectory, `move` from the move list, `cleared` derived per step (the
/// floor always cleared), plus the floor, color and size rows from the
/// instance.
pub fn encode_plan(
    inst: &PlanningInstance,
    plan: &Plan,
    index: &CrossbarIndex,
) -> Result<Activations> {
    inst.validate()?;
    let bounds = index.bounds();
    let n = bounds.n_objects;
    let nb = inst.n_blocks();
    if plan.above_trajectory.len() != bounds.k_steps {
        return Err(Error::InvalidInstance(format!(
            "trajectory has {} steps, bounds want {}",
            plan.above_trajectory.len(),
            bounds.k_steps
        )));
    }
    let mut y = Activations::zeros(index.num_vars());
    y.set(index.floor(0), 1.0);
    for b in 1..=nb {
        y.set(index.color(b, inst.colors[b - 1]), 1.0);
        y.set(index.size(b, inst.sizes[b - 1]), 1.0);
    }
    for (t, parents) in plan.above_trajectory.iter().enumerate() {
        if parents.len() != n {
            return Err(Error::InvalidInstance("trajectory row wrong width".into()));
        }
        let mut covered = vec![false; n];
        for (obj, parent) in parents.iter().enumerate() {
            if let Some(p) = parent {
                y.set(index.above(obj, *p, t), 1.0);
                covered[*p] = true;
            }
        }
        for obj in 0..n {
            let cleared = obj == 0 || !covered[obj];
            if cleared {
                y.set(index.cleared(obj, t), 1.0);
            }
        }
    }
    for &(obj, t) in &plan.moves {
        if t >= bounds.move_steps() || obj >= n {
            return Err(Error::InvalidInstance(format!(
                "move ({obj}, {t}) out of range"
            )));
        }
        y.set(index.mv(obj, t), 1.0);
    }
    Ok(y)
}

/// Why a plan failed validation. The diagnostic names the first rule broken.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanDefect {
    TrajectoryLength { got: usize, want: usize },
    MissingParent { obj: usize, t: usize },
    PhantomObject { obj: usize, t: usize },
    Cycle { obj: usize, t: usize },
    DoubleStack { lower: usize, t: usize },
    InitialMismatch { obj: usize },
    GoalMismatch { obj: usize },
    MoveOutOfRange { obj: usize, t: usize },
    UnexplainedChange { obj: usize, t: usize },
    MovedUncleared { obj: usize, t: usize },
    MovedUnderneath { obj: usize, t: usize },
    TargetNotCleared { obj: usize, target: usize, t: usize },
}

impl std::fmt::Display for PlanDefect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        use PlanDefect::*;
        match *self {
            TrajectoryLength { got, want } => {
                write!(f, "trajectory has {got} steps, expected {want}")
            }
            MissingParent { obj, t } => {
                write!(f, "object {obj} has no unique support at step {t}")
            }
            PhantomObject { obj, t } => {
                write!(f, "object {obj} is not part of the instance but appears at step {t}")
            }
            Cycle { obj, t } => write!(f, "object {obj} supports itself at step {t}"),
            DoubleStack { lower, t } => {
                write!(f, "two blocks sit directly on block {lower} at step {t}")
            }
            InitialMismatch { obj } => {
                write!(f, "step 0 does not match the initial position of block {obj}")
            }
            GoalMismatch { obj } => {
                write!(f, "final step does not match the goal position of block {obj}")
            }
            MoveOutOfRange { obj, t } => write!(f, "move ({obj}, {t}) is out of range"),
            UnexplainedChange { obj, t } => {
                write!(f, "block {obj} changed support at step {t} without a move")
            }
            MovedUncleared { obj, t } => {
                write!(f, "move ({obj}, {t}) moves a block that is not cleared")
            }
            MovedUnderneath { obj, t } => {
                write!(f, "move ({obj}, {t}) ends with something on top of the moved block")
            }
            TargetNotCleared { obj, target, t } => {
                write!(f, "move ({obj}, {t}) lands on {target}, which was not cleared")
            }
        }
    }
}

/// Simulates the stacking world step by step, independently of the CNF.
///
/// Every step must be a well-formed forest over the floor, every support
/// change must be explained by a move of a cleared block onto the floor or
/// onto a block that was cleared, and the boundary steps must match the
/// instance. Simultaneous moves are fine as long as each is individually
/// legal and the resulting configuration is well formed.
pub fn validate_plan(plan: &Plan, inst: &PlanningInstance) -> std::result::Result<(), PlanDefect> {
    let bounds = inst.bounds;
    let n = bounds.n_objects;
    let nb = inst.n_blocks();
    let k = bounds.k_steps;
    if plan.above_trajectory.len() != k {
        return Err(PlanDefect::TrajectoryLength {
            got: plan.above_trajectory.len(),
            want: k,
        });
    }

    for (t, parents) in plan.above_trajectory.iter().enumerate() {
        if parents.len() != n {
            return Err(PlanDefect::TrajectoryLength { got: parents.len(), want: n });
        }
        let mut covered: Vec<Option<usize>> = vec![None; n];
        for obj in 0..n {
            match parents[obj] {
                Some(p) => {
                    if obj == 0 || obj > nb {
                        return Err(PlanDefect::PhantomObject { obj, t });
                    }
                    if p >= n || (p != 0 && p > nb) {
                        return Err(PlanDefect::MissingParent { obj, t });
                    }
                    if p != 0 {
                        if covered[p].is_some() {
                            return Err(PlanDefect::DoubleStack { lower: p, t });
                        }
                        covered[p] = Some(obj);
                    }
                }
                None => {
                    if obj >= 1 && obj <= nb {
                        return Err(PlanDefect::MissingParent { obj, t });
                    }
                }
            }
        }
        // Walk each block down to the floor to rule out cycles.
        for start in 1..=nb {
            let mut cur = start;
            let mut steps = 0;
            while let Some(p) = plan.above_trajectory[t][cur] {
                if p == 0 {
                    break;
                }
                cur = p;
                steps += 1;
                if steps > nb {
                    return Err(PlanDefect::Cycle { obj: start, t });
                }
            }
        }
    }

    for b in 1..=nb {
        if plan.above_trajectory[0][b] != Some(inst.initial_parent[b - 1]) {
            return Err(PlanDefect::InitialMismatch { obj: b });
        }
        if plan.above_trajectory[k - 1][b] != Some(inst.goal_parent[b - 1]) {
            return Err(PlanDefect::GoalMismatch { obj: b });
        }
    }

    for &(obj, t) in &plan.moves {
        if obj == 0 || obj > nb || t >= bounds.move_steps() {
            return Err(PlanDefect::MoveOutOfRange { obj, t });
        }
    }

    for t in 0..k - 1 {
        let now = &plan.above_trajectory[t];
        let next = &plan.above_trajectory[t + 1];
        let moved: Vec<usize> = plan
            .moves
            .iter()
            .filter(|&&(_, mt)| mt == t)
            .map(|&(obj, _)| obj)
            .collect();
        for b in 1..=nb {
            if now[b] != next[b] && !moved.contains(&b) {
                return Err(PlanDefect::UnexplainedChange { obj: b, t });
            }
        }
        let cleared_now =
            |obj: usize| obj == 0 || (1..=nb).all(|other| now[other] != Some(obj));
        let cleared_next =
            |obj: usize| obj == 0 || (1..=nb).all(|other| next[other] != Some(obj));
        for &m in &moved {
            if !cleared_now(m) {
                return Err(PlanDefect::MovedUncleared { obj: m, t });
            }
            if !cleared_next(m) {
                return Err(PlanDefect::MovedUnderneath { obj: m, t });
            }
            let target = next[m].expect("block parents checked above");
            if !cleared_now(target) {
                return Err(PlanDefect::TargetNotCleared { obj: m, target, t });
            }
        }
    }
    Ok(())
}

/// Breadth-first search over stacking configurations with single-block
/// moves. Returns a shortest plan within `k_steps - 1` moves, or `None` when
/// the goal is out of reach. Intended for small instances (up to about seven
/// blocks).
pub fn bfs_oracle(inst: &PlanningInstance) -> Option<Plan> {
    let bounds = inst.bounds;
    let nb = inst.n_blocks();
    let max_moves = bounds.move_steps();
    let start = inst.initial_parent.clone();
    let goal = inst.goal_parent.clone();

    let mut came: HashMap<Vec<usize>, (Vec<usize>, (usize, usize))> = HashMap::new();
    let mut queue: VecDeque<(Vec<usize>, usize)> = VecDeque::new();
    queue.push_back((start.clone(), 0));
    let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
    seen.insert(start.clone(), 0);

    let mut reached = start == goal;
    while let Some((state, depth)) = queue.pop_front() {
        if reached {
            break;
        }
        if depth >= max_moves {
            continue;
        }
        let cleared: Vec<usize> = (1..=nb)
            .filter(|&b| state.iter().all(|&p| p != b))
            .collect();
        for &b in &cleared {
            for target in std::iter::once(0).chain(cleared.iter().copied().filter(|&t| t != b)) {
                if state[b - 1] == target {
                    continue;
                }
                let mut next = state.clone();
                next[b - 1] = target;
                if !seen.contains_key(&next) {
                    seen.insert(next.clone(), depth + 1);
                    came.insert(next.clone(), (state.clone(), (b, depth)));
                    if next == goal {
                        reached = true;
                        break;
                    }
                    queue.push_back((next, depth + 1));
                }
            }
            if reached {
                break;
            }
        }
    }
    if !reached {
        return None;
    }

    // Walk back from the goal, then lay the configurations out over time.
    let mut rev_moves: Vec<usize> = Vec::new();
    let mut configs: Vec<Vec<usize>> = vec![goal.clone()];
    let mut cur = goal.clone();
    while cur != start {
        let (prev, (block, _)) = came.get(&cur).expect("path recorded").clone();
        rev_moves.push(block);
        configs.push(prev.clone());
        cur = prev;
    }
    configs.reverse();
    rev_moves.reverse();

    let moves: Vec<(usize, usize)> = rev_moves.into_iter().enumerate().map(|(t, b)| (b, t)).collect();
    let mut trajectory = Vec::with_capacity(bounds.k_steps);
    for t in 0..bounds.k_steps {
        let config = configs.get(t.min(configs.len() - 1)).unwrap();
        let mut row = vec![None; bounds.n_objects];
        for b in 1..=nb {
            row[b] = Some(config[b - 1]);
        }
        trajectory.push(row);
    }
    Some(Plan {
        moves,
        above_trajectory: trajectory,
    })
}
