//! Symmetric high-order network: energy minimization plus anti-Hebb learning.
//!
//! A [`SymmetricNetwork`] attaches one weight to each set of units (a
//! *k-order connection*). Unit `i` computes the weighted sum of products of
//! the other members of every connection containing it, and flips toward the
//! sign of that sum; asynchronous flips descend the energy
//! `E(y) = -sum_S w_S prod_{k in S} y_k`.
//!
//! [`compile`] builds the connection set from the proximity-product
//! polynomial of a weighted CNF, so that the energy of a Boolean state equals
//! the summed penalties of its violated clauses (up to the polynomial's
//! constant). When the dynamics settle in a violating minimum,
//! [`anti_hebb_step`] raises that state's energy: for each affected
//! connection the weight is decremented when its set holds an even number of
//! zero-valued units and incremented otherwise, scaled just enough to
//! destabilize one unit of the violated clause.

use std::collections::HashMap;

use rand::Rng;

use crate::cnf::{
    clause_satisfied, prop_energy_polynomial, violation, Activations, WeightedCnf,
    DEFAULT_HARD_THRESHOLD,
};
use crate::cnf::polynomial::DEFAULT_MAX_POSITIVE_LITERALS;
use crate::error::Result;

mod snapshot;
pub use snapshot::{read_network, read_network_file, write_network, write_network_file};

/// Hyper-parameters of the symmetric solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsynHyper {
    /// Violated clauses to learn from per learning step.
    pub selected_v_clauses: usize,
    /// Bound on any single weight before all weights are rescaled by 0.01.
    pub weight_bound: f64,
    /// Consecutive zero-input flips allowed during a plateau walk.
    pub max_random_flips: u32,
    /// Soft-constraint violations tolerated in an accepted solution.
    pub max_soft: usize,
    /// Penalty at or above which a clause counts as hard.
    pub hard_threshold: f64,
    /// Learn-activate iterations before the solver gives up.
    pub max_iterations: u64,
    /// Total flips allowed per convergence call.
    pub flip_cap: u64,
}

impl Default for ConsynHyper {
    fn default() -> Self {
        ConsynHyper {
            selected_v_clauses: 1,
            weight_bound: 200_000.0,
            max_random_flips: 100,
            max_soft: 100,
            hard_threshold: DEFAULT_HARD_THRESHOLD,
            max_iterations: 50_000,
            flip_cap: 10_000_000,
        }
    }
}

/// Counters for one solve run. `flips` is the symmetric cost measure;
/// `iterations` counts learn-activate cycles.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveMetrics {
    pub flips: u64,
    pub iterations: u64,
    pub solved: bool,
    /// `(hard, soft)` violation counts of the returned state.
    pub final_violation: (usize, usize),
}

/// How [`compile`] initializes weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitWeights {
    /// Negated polynomial coefficients: the network descends the violation
    /// energy from the start.
    Compiled,
    /// Same connection sets, weights drawn uniformly from `[-1, 1]`.
    Random,
}

/// Undirected sigma-pi network: one weight per set of units.
#[derive(Debug, Clone)]
pub struct SymmetricNetwork {
    num_units: usize,
    conn_vars: Vec<Vec<usize>>,
    conn_weight: Vec<f64>,
    by_set: HashMap<Vec<usize>, usize>,
    incidence: Vec<Vec<u32>>,
}

impl SymmetricNetwork {
    /// Builds a network from explicit `(unit set, weight)` pairs. Sets must
    /// be sorted, duplicate free and within range; one weight per set.
    pub fn from_connections(
        num_units: usize,
        connections: Vec<(Vec<usize>, f64)>,
    ) -> Result<Self> {
        let mut net = SymmetricNetwork {
            num_units,
            conn_vars: Vec::new(),
            conn_weight: Vec::new(),
            by_set: HashMap::new(),
            incidence: vec![Vec::new(); num_units],
        };
        for (vars, weight) in connections {
            if vars.is_empty() {
                return Err(crate::Error::InvalidClause("empty connection set".into()));
            }
            if vars.windows(2).any(|w| w[0] >= w[1]) {
                return Err(crate::Error::InvalidClause(
                    "connection set must be sorted and duplicate free".into(),
                ));
            }
            if *vars.last().unwrap() >= num_units {
                return Err(crate::Error::VarOutOfRange {
                    var: *vars.last().unwrap(),
                    num_vars: num_units,
                });
            }
            if net.by_set.contains_key(&vars) {
                return Err(crate::Error::InvalidClause(format!(
                    "duplicate connection {vars:?}"
                )));
            }
            net.insert_connection(vars, weight);
        }
        Ok(net)
    }

    fn insert_connection(&mut self, vars: Vec<usize>, weight: f64) -> usize {
        let id = self.conn_vars.len();
        for &v in &vars {
            self.incidence[v].push(id as u32);
        }
        self.by_set.insert(vars.clone(), id);
        self.conn_vars.push(vars);
        self.conn_weight.push(weight);
        id
    }

    pub fn num_units(&self) -> usize {
        self.num_units
    }

    pub fn num_connections(&self) -> usize {
        self.conn_vars.len()
    }

    /// Weight attached to a unit set, if the connection exists.
    pub fn weight(&self, vars: &[usize]) -> Option<f64> {
        self.by_set.get(vars).map(|&id| self.conn_weight[id])
    }

    /// Connections in deterministic (sorted unit set) order.
    pub fn connections(&self) -> Vec<(&[usize], f64)> {
        let mut ids: Vec<usize> = (0..self.conn_vars.len()).collect();
        ids.sort_by(|&a, &b| self.conn_vars[a].cmp(&self.conn_vars[b]));
        ids.into_iter()
            .map(|id| (self.conn_vars[id].as_slice(), self.conn_weight[id]))
            .collect()
    }

    /// Adds `delta` to the weight of `vars`, creating the connection when a
    /// merged polynomial coefficient cancelled it out of the compiled set.
    fn bump_weight(&mut self, vars: Vec<usize>, delta: f64) {
        match self.by_set.get(&vars) {
            Some(&id) => self.conn_weight[id] += delta,
            None => {
                self.insert_connection(vars, delta);
            }
        }
    }

    /// Network energy `-sum_S w_S prod_{k in S} y_k`. For a compiled network
    /// at Boolean `y` this is the violated penalty sum minus the expansion's
    /// constant term.
    pub fn energy(&self, y: &Activations) -> f64 {
        self.conn_vars
            .iter()
            .zip(&self.conn_weight)
            .map(|(vars, w)| -w * vars.iter().map(|&v| y.value(v)).product::<f64>())
            .sum()
    }
}

/// Compiles a network for a weighted CNF: one connection per non-constant
/// monomial of the proximity-product polynomial with `beta = alpha`.
pub fn compile<R: Rng + ?Sized>(
    cnf: &WeightedCnf,
    init: InitWeights,
    rng: &mut R,
) -> Result<SymmetricNetwork> {
    let betas: Vec<f64> = cnf.clauses().iter().map(|c| c.alpha()).collect();
    let poly = prop_energy_polynomial(cnf, &betas, DEFAULT_MAX_POSITIVE_LITERALS)?;
    let mut net = SymmetricNetwork {
        num_units: cnf.num_vars(),
        conn_vars: Vec::new(),
        conn_weight: Vec::new(),
        by_set: HashMap::new(),
        incidence: vec![Vec::new(); cnf.num_vars()],
    };
    for m in poly.monomials() {
        if m.vars.is_empty() {
            continue;
        }
        let weight = match init {
            InitWeights::Compiled => -m.coeff,
            InitWeights::Random => rng.gen_range(-1.0..=1.0),
        };
        net.insert_connection(m.vars, weight);
    }
    Ok(net)
}

/// Weighted sum of products flowing into unit `i`:
/// `z_i = sum_{S : i in S} w_S prod_{k in S, k != i} y_k`.
pub fn unit_input(net: &SymmetricNetwork, y: &Activations, i: usize) -> f64 {
    net.incidence[i]
        .iter()
        .map(|&c| {
            let vars = &net.conn_vars[c as usize];
            let prod: f64 = vars
                .iter()
                .filter(|&&v| v != i)
                .map(|&v| y.value(v))
                .product();
            net.conn_weight[c as usize] * prod
        })
        .sum()
}

/// Why a convergence call returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActivationOutcome {
    /// No unstable unit remains (plateau walks exhausted or absent).
    Converged,
    /// The per-call flip budget ran out; the state may still be unstable.
    FlipBudget,
}

/// Set with O(1) insert/remove/uniform-sample over unit indices.
struct IndexedSet {
    items: Vec<u32>,
    pos: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl IndexedSet {
    fn new(capacity: usize) -> Self {
        IndexedSet {
            items: Vec::new(),
            pos: vec![ABSENT; capacity],
        }
    }

    fn insert(&mut self, i: usize) {
        if self.pos[i] == ABSENT {
            self.pos[i] = self.items.len() as u32;
            self.items.push(i as u32);
        }
    }

    fn remove(&mut self, i: usize) {
        let p = self.pos[i];
        if p != ABSENT {
            let last = *self.items.last().unwrap();
            self.items[p as usize] = last;
            self.pos[last as usize] = p;
            self.items.pop();
            self.pos[i] = ABSENT;
        }
    }

    fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        if self.items.is_empty() {
            None
        } else {
            Some(self.items[rng.gen_range(0..self.items.len())] as usize)
        }
    }
}

/// Incrementally maintained activation state: per-unit inputs, per-connection
/// zero counts, and the set of unstable units.
struct Dynamics {
    y: Vec<bool>,
    clamped: Vec<bool>,
    z: Vec<f64>,
    zeros: Vec<u32>,
    unstable: IndexedSet,
}

impl Dynamics {
    fn build(net: &SymmetricNetwork, y: &Activations) -> Self {
        debug_assert!(y.is_boolean(), "symmetric dynamics need Boolean values");
        let yb: Vec<bool> = y.values().iter().map(|&v| v == 1.0).collect();
        let mut zeros = vec![0u32; net.num_connections()];
        for (c, vars) in net.conn_vars.iter().enumerate() {
            zeros[c] = vars.iter().filter(|&&v| !yb[v]).count() as u32;
        }
        let mut z = vec![0.0f64; net.num_units];
        for (c, vars) in net.conn_vars.iter().enumerate() {
            let w = net.conn_weight[c];
            for &i in vars {
                // Product over the other members is 1 exactly when the only
                // zero in the set (if any) is unit i itself.
                let miss = u32::from(!yb[i]);
                if zeros[c] == miss {
                    z[i] += w;
                }
            }
        }
        let mut state = Dynamics {
            y: yb,
            clamped: y.clamp_mask().to_vec(),
            z,
            zeros,
            unstable: IndexedSet::new(net.num_units),
        };
        for i in 0..net.num_units {
            state.refresh(i);
        }
        state
    }

    fn is_unstable(&self, i: usize) -> bool {
        !self.clamped[i]
            && ((self.y[i] && self.z[i] < 0.0) || (!self.y[i] && self.z[i] > 0.0))
    }

    fn refresh(&mut self, i: usize) {
        if self.is_unstable(i) {
            self.unstable.insert(i);
        } else {
            self.unstable.remove(i);
        }
    }

    fn flip(&mut self, net: &SymmetricNetwork, j: usize) {
        let was_true = self.y[j];
        self.y[j] = !was_true;
        for &c in &net.incidence[j] {
            let c = c as usize;
            let old_zc = self.zeros[c];
            let new_zc = if was_true { old_zc + 1 } else { old_zc - 1 };
            self.zeros[c] = new_zc;
            let w = net.conn_weight[c];
            for &i in &net.conn_vars[c] {
                if i == j {
                    continue;
                }
                let miss = u32::from(!self.y[i]);
                let p_old = old_zc == miss;
                let p_new = new_zc == miss;
                if p_old != p_new {
                    self.z[i] += if p_new { w } else { -w };
                    self.refresh(i);
                }
            }
        }
        self.refresh(j);
    }

    fn write_back(&self, y: &mut Activations) {
        for (i, &b) in self.y.iter().enumerate() {
            if !self.clamped[i] {
                y.set(i, if b { 1.0 } else { 0.0 });
            }
        }
    }
}

/// Runs asynchronous threshold dynamics until no unstable unit remains.
///
/// Must flips pick a uniformly random unstable unit (`y=1, z<0` or
/// `y=0, z>0`) and flip it. When none exist, a random non-clamped unit with
/// `z = 0` is flipped to walk the plateau; after `max_random_flips`
/// consecutive random flips the walk stops. Clamped units are never touched.
/// Every flip increments `metrics.flips`; `flip_cap` bounds the flips of this
/// call.
pub fn activate_until_convergence<R: Rng + ?Sized>(
    net: &SymmetricNetwork,
    y: &mut Activations,
    max_random_flips: u32,
    flip_cap: u64,
    rng: &mut R,
    metrics: &mut SolveMetrics,
) -> ActivationOutcome {
    let mut state = Dynamics::build(net, y);
    let mut consecutive_random = 0u32;
    let mut call_flips = 0u64;
    loop {
        while let Some(i) = state.unstable.sample(rng) {
            state.flip(net, i);
            metrics.flips += 1;
            call_flips += 1;
            consecutive_random = 0;
            if call_flips >= flip_cap {
                state.write_back(y);
                return ActivationOutcome::FlipBudget;
            }
        }
        if consecutive_random >= max_random_flips {
            break;
        }
        let plateau: Vec<usize> = (0..net.num_units)
            .filter(|&i| !state.clamped[i] && state.z[i] == 0.0)
            .collect();
        if plateau.is_empty() {
            break;
        }
        let i = plateau[rng.gen_range(0..plateau.len())];
        state.flip(net, i);
        metrics.flips += 1;
        call_flips += 1;
        consecutive_random += 1;
        if call_flips >= flip_cap {
            state.write_back(y);
            return ActivationOutcome::FlipBudget;
        }
    }
    state.write_back(y);
    ActivationOutcome::Converged
}

/// What one anti-Hebb step did.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AntiHebbReport {
    /// Clauses whose connections were updated.
    pub clauses_updated: Vec<usize>,
    /// Selected clauses skipped because every unit was clamped, so no weight
    /// change could destabilize them.
    pub clauses_skipped: Vec<usize>,
}

/// One generalized anti-Hebb learning step at a violating fixed point.
///
/// Up to `selected_v_clauses` violated clauses are drawn uniformly without
/// replacement, hard clauses first: soft clauses within the tolerated budget
/// are only learned from once every hard clause holds (lifting tolerated
/// soft violations inflates their penalties without bound and walls off the
/// very states the hard constraints need). For each selected clause, every
/// non-constant monomial set of its proximity product is updated: decrement
/// when the set holds an even number of zero-valued units, increment
/// otherwise. The step size is the flip distance `|z|` of one uniformly
/// drawn non-clamped clause unit, plus a small epsilon, so at least that
/// unit becomes unstable; scaling by the smallest distance instead
/// deadlocks, because the clause's own previous lift parks its freshest
/// unit at `|z| = 0` and the minimum then only ever retracts it. If any
/// weight ends up beyond `weight_bound` in magnitude, all weights are
/// rescaled by 0.01.
pub fn anti_hebb_step<R: Rng + ?Sized>(
    net: &mut SymmetricNetwork,
    cnf: &WeightedCnf,
    y: &Activations,
    selected_v_clauses: usize,
    weight_bound: f64,
    hard_threshold: f64,
    rng: &mut R,
) -> AntiHebbReport {
    const EPSILON: f64 = 1e-6;
    let mut report = AntiHebbReport::default();

    let mut violated: Vec<usize> = cnf
        .clauses()
        .iter()
        .enumerate()
        .filter(|(_, c)| !clause_satisfied(c, y) && c.alpha() >= hard_threshold)
        .map(|(i, _)| i)
        .collect();
    if violated.is_empty() {
        violated = cnf
            .clauses()
            .iter()
            .enumerate()
            .filter(|(_, c)| !clause_satisfied(c, y))
            .map(|(i, _)| i)
            .collect();
    }
    // Partial Fisher-Yates: the first `take` entries are a uniform draw
    // without replacement.
    let take = selected_v_clauses.min(violated.len());
    for i in 0..take {
        let j = rng.gen_range(i..violated.len());
        violated.swap(i, j);
    }

    for &ci in &violated[..take] {
        let clause = &cnf.clauses()[ci];
        let free_units: Vec<usize> = clause
            .literals()
            .iter()
            .map(|l| l.var)
            .filter(|&v| !y.is_clamped(v))
            .collect();
        if free_units.is_empty() {
            report.clauses_skipped.push(ci);
            continue;
        }
        let pick = free_units[rng.gen_range(0..free_units.len())];
        let lambda = unit_input(net, y, pick).abs() + EPSILON;

        let mut neg_vars: Vec<usize> = clause
            .literals()
            .iter()
            .filter(|l| !l.positive)
            .map(|l| l.var)
            .collect();
        neg_vars.sort_unstable();
        let pos_vars: Vec<usize> = clause
            .literals()
            .iter()
            .filter(|l| l.positive)
            .map(|l| l.var)
            .collect();
        debug_assert!(pos_vars.len() <= DEFAULT_MAX_POSITIVE_LITERALS);

        let mut max_abs = 0.0f64;
        for subset in 0u64..(1u64 << pos_vars.len()) {
            let mut vars = neg_vars.clone();
            for (bit, &v) in pos_vars.iter().enumerate() {
                if subset >> bit & 1 == 1 {
                    vars.push(v);
                }
            }
            if vars.is_empty() {
                continue;
            }
            vars.sort_unstable();
            let zero_units = vars.iter().filter(|&&v| !y.bool_at(v)).count();
            let delta = if zero_units % 2 == 0 { -lambda } else { lambda };
            net.bump_weight(vars.clone(), delta);
            if let Some(w) = net.weight(&vars) {
                max_abs = max_abs.max(w.abs());
            }
        }
        report.clauses_updated.push(ci);

        if max_abs > weight_bound {
            for w in &mut net.conn_weight {
                *w *= 0.01;
            }
        }
    }
    report
}

/// Full symmetric solve: clamp, randomize, settle, then learn-activate until
/// the violation is acceptable or the iteration budget runs out.
///
/// Learned weights persist in `net`; carrying them to the next instance is
/// the caller's choice. On budget exhaustion the best state seen (by hard,
/// then soft, then penalty) comes back flagged unsolved.
pub fn solve<R: Rng + ?Sized>(
    net: &mut SymmetricNetwork,
    cnf: &WeightedCnf,
    clamps: &[(usize, bool)],
    hyper: &ConsynHyper,
    rng: &mut R,
) -> (Activations, SolveMetrics) {
    let mut metrics = SolveMetrics::default();
    let mut y = Activations::with_clamps(net.num_units, clamps);
    y.randomize_boolean(rng);

    let mut outcome =
        activate_until_convergence(net, &mut y, hyper.max_random_flips, hyper.flip_cap, rng, &mut metrics);
    let mut best: Option<(Activations, crate::cnf::Violation)> = None;
    loop {
        let v = violation(cnf, &y, hyper.hard_threshold);
        if best.as_ref().map_or(true, |(_, bv)| v.improves_on(bv)) {
            best = Some((y.clone(), v));
        }
        if v.acceptable(hyper.max_soft) {
            metrics.solved = true;
            metrics.final_violation = (v.hard_violated, v.soft_violated);
            return (y, metrics);
        }
        if outcome == ActivationOutcome::FlipBudget || metrics.iterations >= hyper.max_iterations {
            let (by, bv) = best.expect("at least one state recorded");
            metrics.solved = false;
            metrics.final_violation = (bv.hard_violated, bv.soft_violated);
            return (by, metrics);
        }
        anti_hebb_step(
            net,
            cnf,
            &y,
            hyper.selected_v_clauses,
            hyper.weight_bound,
            hyper.hard_threshold,
            rng,
        );
        outcome = activate_until_convergence(
            net,
            &mut y,
            hyper.max_random_flips,
            hyper.flip_cap,
            rng,
            &mut metrics,
        );
        metrics.iterations += 1;
    }
}

#[cfg(test)]
mod tests;
