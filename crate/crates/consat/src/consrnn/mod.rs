//! Recurrent high-order network: feedforward sigma-pi activation with a
//! feedback copy loop.
//!
//! The same variable set appears as an input layer and an output layer.
//! Directed connections carry a product of input values to one target
//! output; every output unit applies a logistic activation. One solve
//! iteration is: forward pass, violation check on the outputs, a noisy
//! delta-rule weight update descending the violation loss, then copying the
//! outputs back onto the non-clamped inputs with some values re-randomized.
//! Restarts re-randomize the inputs after a stretch of non-improving
//! iterations.

use rand::Rng;

use crate::cnf::polynomial::DEFAULT_MAX_POSITIVE_LITERALS;
use crate::cnf::{
    clause_satisfied, min_proximity_literal, prop_energy_polynomial, violation, Activations,
    LossMode, Violation, WeightedCnf, DEFAULT_HARD_THRESHOLD,
};
use crate::consyn::SolveMetrics;
use crate::error::Result;

mod snapshot;
pub use snapshot::{read_network, read_network_file, write_network, write_network_file};

/// Hyper-parameters of the recurrent solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RnnHyper {
    /// Learning iterations accumulated before a weight update.
    pub mini_batch: usize,
    /// Probability of re-randomizing each copied-back input value.
    pub noise_level: f64,
    /// Non-improving iterations before the inputs are re-randomized.
    pub no_improve: u64,
    /// Soft violations tolerated in an accepted solution.
    pub max_soft: usize,
    /// Probability of replacing a clause's analytic gradient by a single
    /// randomly drawn unit's error.
    pub noisy_grad_prob: f64,
    pub learning_rate: f64,
    pub mode: LossMode,
    /// Penalty at or above which a clause counts as hard.
    pub hard_threshold: f64,
    /// Iteration budget per solve.
    pub max_iterations: u64,
}

impl Default for RnnHyper {
    fn default() -> Self {
        RnnHyper {
            mini_batch: 1,
            noise_level: 0.15,
            no_improve: 100,
            max_soft: 100,
            noisy_grad_prob: 0.06,
            learning_rate: 0.06,
            mode: LossMode::ProP,
            hard_threshold: DEFAULT_HARD_THRESHOLD,
            max_iterations: 20_000,
        }
    }
}

/// Directed sigma-pi connections grouped by target unit.
#[derive(Debug, Clone)]
pub struct RecurrentNetwork {
    num_vars: usize,
    /// Per target: sorted source sets (empty set = bias) and their weights.
    sources: Vec<Vec<Vec<usize>>>,
    weights: Vec<Vec<f64>>,
}

impl RecurrentNetwork {
    /// Builds a network from explicit `(sources, target, weight)` triples.
    /// Source sets must be sorted and duplicate free; one weight per
    /// `(sources, target)` pair.
    pub fn from_connections(
        num_vars: usize,
        connections: Vec<(Vec<usize>, usize, f64)>,
    ) -> Result<Self> {
        let mut net = RecurrentNetwork {
            num_vars,
            sources: vec![Vec::new(); num_vars],
            weights: vec![Vec::new(); num_vars],
        };
        for (sources, target, weight) in connections {
            if target >= num_vars {
                return Err(crate::Error::VarOutOfRange {
                    var: target,
                    num_vars,
                });
            }
            if sources.windows(2).any(|w| w[0] >= w[1]) {
                return Err(crate::Error::InvalidClause(
                    "source set must be sorted and duplicate free".into(),
                ));
            }
            if sources.last().is_some_and(|&v| v >= num_vars) {
                return Err(crate::Error::VarOutOfRange {
                    var: *sources.last().unwrap(),
                    num_vars,
                });
            }
            if net.sources[target].contains(&sources) {
                return Err(crate::Error::InvalidClause(format!(
                    "duplicate connection {sources:?} -> {target}"
                )));
            }
            net.sources[target].push(sources);
            net.weights[target].push(weight);
        }
        Ok(net)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_connections(&self) -> usize {
        self.sources.iter().map(|s| s.len()).sum()
    }

    pub fn weight(&self, sources: &[usize], target: usize) -> Option<f64> {
        self.sources[target]
            .iter()
            .position(|s| s == sources)
            .map(|i| self.weights[target][i])
    }

    /// Connections in deterministic `(target, sources)` order.
    pub fn connections(&self) -> Vec<(&[usize], usize, f64)> {
        let mut all = Vec::with_capacity(self.num_connections());
        for target in 0..self.num_vars {
            let mut ids: Vec<usize> = (0..self.sources[target].len()).collect();
            ids.sort_by(|&a, &b| self.sources[target][a].cmp(&self.sources[target][b]));
            for id in ids {
                all.push((
                    self.sources[target][id].as_slice(),
                    target,
                    self.weights[target][id],
                ));
            }
        }
        all
    }
}

/// Builds the recurrent network for a weighted CNF: for every non-constant
/// monomial of the proximity-product polynomial, one directed connection per
/// member (the rest of the set as sources), plus full input-to-output
/// pairwise connectivity (self pairs included) and one bias per output unit.
/// Weights start uniform in `(-1, 1)`.
pub fn build<R: Rng + ?Sized>(cnf: &WeightedCnf, rng: &mut R) -> Result<RecurrentNetwork> {
    let betas: Vec<f64> = cnf.clauses().iter().map(|c| c.alpha()).collect();
    let poly = prop_energy_polynomial(cnf, &betas, DEFAULT_MAX_POSITIVE_LITERALS)?;
    let n = cnf.num_vars();
    let mut net = RecurrentNetwork {
        num_vars: n,
        sources: vec![Vec::new(); n],
        weights: vec![Vec::new(); n],
    };
    let mut push = |sources: Vec<usize>, target: usize, rng: &mut R| {
        if !net.sources[target].contains(&sources) {
            net.sources[target].push(sources);
            net.weights[target].push(rng.gen_range(-1.0..1.0));
        }
    };
    for m in poly.monomials() {
        if m.vars.is_empty() {
            continue;
        }
        for (i, &target) in m.vars.iter().enumerate() {
            let sources: Vec<usize> = m
                .vars
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &v)| v)
                .collect();
            push(sources, target, rng);
        }
    }
    for source in 0..n {
        for target in 0..n {
            push(vec![source], target, rng);
        }
    }
    for target in 0..n {
        push(Vec::new(), target, rng);
    }
    Ok(net)
}

/// Forward pass: every output unit computes the logistic of its weighted sum
/// of input products, then clamped positions are overwritten with their
/// clamp values. The result keeps the input's clamp mask.
pub fn forward(net: &RecurrentNetwork, input: &Activations) -> Activations {
    let mut out = input.clone();
    for target in 0..net.num_vars {
        if input.is_clamped(target) {
            continue;
        }
        let z: f64 = net.sources[target]
            .iter()
            .zip(&net.weights[target])
            .map(|(sources, w)| {
                w * sources.iter().map(|&v| input.value(v)).product::<f64>()
            })
            .sum();
        out.set(target, 1.0 / (1.0 + (-z).exp()));
    }
    out
}

/// Per-variable error from the violated clauses, descending the chosen loss.
///
/// For each violated clause: with probability `noisy_grad_prob`, one
/// uniformly drawn clause unit gets the error `1 - v` (positive literal) or
/// `-v` (negative); otherwise the mode's analytic gradient applies — every
/// clause variable for the proximity product, only the minimal-proximity
/// variable for log-satisfaction. The total is the penalty-weighted average
/// over clauses; satisfied clauses contribute nothing.
pub fn noisy_delta<R: Rng + ?Sized>(
    cnf: &WeightedCnf,
    y: &Activations,
    hyper: &RnnHyper,
    rng: &mut R,
) -> Vec<f64> {
    let mut delta = vec![0.0f64; cnf.num_vars()];
    let alpha_sum = cnf.alpha_sum();
    for clause in cnf.clauses() {
        if clause_satisfied(clause, y) {
            continue;
        }
        let scale = clause.alpha() / alpha_sum;
        if rng.gen::<f64>() < hyper.noisy_grad_prob {
            let lits = clause.literals();
            let lit = lits[rng.gen_range(0..lits.len())];
            let v = y.value(lit.var);
            let err = if lit.positive { 1.0 - v } else { -v };
            delta[lit.var] += scale * err;
        } else {
            match hyper.mode {
                LossMode::ProP => {
                    for lit in clause.literals() {
                        let v = y.value(lit.var);
                        let others: f64 = clause
                            .literals()
                            .iter()
                            .filter(|l| l.var != lit.var || l.positive != lit.positive)
                            .map(|&l| crate::cnf::proximity(l, y.value(l.var)))
                            .product();
                        // minus the loss gradient through the logistic
                        let err = if lit.positive { others } else { -others } * v * (1.0 - v);
                        delta[lit.var] += scale * err;
                    }
                }
                LossMode::LogSat => {
                    let i = min_proximity_literal(clause, y, rng);
                    let lit = clause.literals()[i];
                    let v = y.value(lit.var);
                    let err = if lit.positive { 1.0 - v } else { -v };
                    delta[lit.var] += scale * err;
                }
            }
        }
    }
    delta
}

/// Per-connection delta-rule accumulator for mini-batched updates.
#[derive(Debug, Clone)]
pub struct UpdateBatch {
    sums: Vec<Vec<f64>>,
    count: usize,
}

impl UpdateBatch {
    pub fn new(net: &RecurrentNetwork) -> Self {
        UpdateBatch {
            sums: net.sources.iter().map(|s| vec![0.0; s.len()]).collect(),
            count: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Accumulates one iteration of `learning_rate * delta_v * prod(inputs)`
    /// per connection.
    pub fn accumulate(
        &mut self,
        net: &RecurrentNetwork,
        delta: &[f64],
        input: &Activations,
        learning_rate: f64,
    ) {
        for target in 0..net.num_vars {
            if delta[target] == 0.0 {
                continue;
            }
            let step = learning_rate * delta[target];
            for (i, sources) in net.sources[target].iter().enumerate() {
                let prod: f64 = sources.iter().map(|&v| input.value(v)).product();
                self.sums[target][i] += step * prod;
            }
        }
        self.count += 1;
    }
}

/// Applies the mean of the accumulated deltas to each weight and clears the
/// accumulator.
pub fn apply_updates(net: &mut RecurrentNetwork, batch: &mut UpdateBatch) {
    if batch.count == 0 {
        return;
    }
    let inv = 1.0 / batch.count as f64;
    for target in 0..net.num_vars {
        for (i, sum) in batch.sums[target].iter_mut().enumerate() {
            net.weights[target][i] += *sum * inv;
            *sum = 0.0;
        }
    }
    batch.count = 0;
}

/// Full recurrent solve: clamp, randomize the free inputs, then iterate
/// forward / learn / feedback-copy until the violation is acceptable or the
/// iteration budget runs out.
///
/// Each iteration accumulates delta-rule changes; every `mini_batch`
/// iterations the averaged changes are applied. If the best violation seen
/// has not improved for `no_improve` iterations, the free inputs are
/// re-randomized; otherwise outputs are copied onto the free inputs, each
/// replaced with a fresh uniform draw with probability `noise_level`.
/// Learned weights persist in `net`. On budget exhaustion the best state is
/// returned flagged unsolved.
pub fn solve<R: Rng + ?Sized>(
    net: &mut RecurrentNetwork,
    cnf: &WeightedCnf,
    clamps: &[(usize, bool)],
    hyper: &RnnHyper,
    rng: &mut R,
) -> (Activations, SolveMetrics) {
    let mut metrics = SolveMetrics::default();
    let mut input = Activations::with_clamps(net.num_vars, clamps);
    input.randomize_uniform(rng);
    let mut output = forward(net, &input);

    let mut batch = UpdateBatch::new(net);
    let mut best: Option<(Activations, Violation)> = None;
    let mut since_improvement = 0u64;
    loop {
        let v = violation(cnf, &output, hyper.hard_threshold);
        if best.as_ref().map_or(true, |(_, bv)| v.improves_on(bv)) {
            best = Some((output.clone(), v));
            since_improvement = 0;
        } else {
            since_improvement += 1;
        }
        if v.acceptable(hyper.max_soft) {
            metrics.solved = true;
            metrics.final_violation = (v.hard_violated, v.soft_violated);
            return (output, metrics);
        }
        if metrics.iterations >= hyper.max_iterations {
            let (by, bv) = best.expect("at least one state recorded");
            metrics.solved = false;
            metrics.final_violation = (bv.hard_violated, bv.soft_violated);
            return (by, metrics);
        }

        let delta = noisy_delta(cnf, &output, hyper, rng);
        batch.accumulate(net, &delta, &input, hyper.learning_rate);
        if batch.count >= hyper.mini_batch {
            apply_updates(net, &mut batch);
        }

        if since_improvement >= hyper.no_improve {
            input.randomize_uniform(rng);
            since_improvement = 0;
        } else {
            for i in 0..net.num_vars {
                if !input.is_clamped(i) {
                    let copied = if rng.gen::<f64>() < hyper.noise_level {
                        rng.gen::<f64>()
                    } else {
                        output.value(i)
                    };
                    input.set(i, copied);
                }
            }
        }
        output = forward(net, &input);
        metrics.iterations += 1;
    }
}
