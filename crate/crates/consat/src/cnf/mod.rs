//! Weighted-CNF data model and the violation loss functions.
//!
//! A [`WeightedCnf`] stores clauses of [`Literal`]s, each clause carrying a
//! positive penalty `alpha`. Two per-clause loss functions measure how far a
//! real-valued assignment is from satisfying a clause:
//!
//! - **proximity product** ([`prop_clause_loss`]): the product of each
//!   literal's distance from its desired value, in `[0, 1]`;
//! - **log-satisfaction** ([`logsat_clause_loss`]): minus the log of the best
//!   literal's satisfaction degree, in `[0, +inf)`.
//!
//! [`vloss`] combines them into a penalty-weighted average over the CNF, and
//! the `*_grad_*` functions give the analytic gradients used by the solvers.
//! [`polynomial`] expands the proximity-product loss into a sum of weighted
//! monomials, which is what the symmetric network minimizes as energy.

use rand::Rng;

use crate::error::{Error, Result};

pub mod polynomial;
pub mod wcnf;

pub use polynomial::{prop_energy_polynomial, EnergyPolynomial, Monomial};

/// Penalty at or above which a clause counts as a hard constraint.
pub const DEFAULT_HARD_THRESHOLD: f64 = 1000.0;

/// Finite stand-in for the log-satisfaction loss of a perfectly violated
/// clause, so that penalty-weighted averages stay finite.
pub const LOGSAT_VIOLATION_SENTINEL: f64 = 1e9;

/// A positive or negative occurrence of a Boolean variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Literal { var, positive: true }
    }

    pub fn neg(var: usize) -> Self {
        Literal {
            var,
            positive: false,
        }
    }

    pub fn negated(self) -> Self {
        Literal {
            var: self.var,
            positive: !self.positive,
        }
    }

    /// True when the literal is satisfied by the Boolean reading of `value`.
    pub fn satisfied_by(self, value: f64) -> bool {
        boolean_of(value) == self.positive
    }
}

/// A disjunction of literals with a positive penalty.
#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    literals: Vec<Literal>,
    alpha: f64,
}

impl Clause {
    /// Builds a clause, rejecting empty literal lists, non-positive
    /// penalties and duplicate `(var, polarity)` pairs.
    pub fn new(literals: Vec<Literal>, alpha: f64) -> Result<Self> {
        if literals.is_empty() {
            return Err(Error::InvalidClause("clause has no literals".into()));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidClause(format!(
                "penalty must be positive and finite, got {alpha}"
            )));
        }
        let mut seen = literals.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidClause(
                "duplicate (var, polarity) pair".into(),
            ));
        }
        Ok(Clause { literals, alpha })
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    /// True when some variable occurs in both polarities.
    pub fn is_tautology(&self) -> bool {
        let mut vars: Vec<usize> = self.literals.iter().map(|l| l.var).collect();
        vars.sort_unstable();
        vars.windows(2).any(|w| w[0] == w[1])
    }
}

/// A conjunction of penalty-weighted clauses over `num_vars` variables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightedCnf {
    num_vars: usize,
    clauses: Vec<Clause>,
    var_names: Option<Vec<String>>,
}

impl WeightedCnf {
    pub fn new(num_vars: usize) -> Self {
        WeightedCnf {
            num_vars,
            clauses: Vec::new(),
            var_names: None,
        }
    }

    pub fn with_var_names(num_vars: usize, names: Vec<String>) -> Result<Self> {
        if names.len() != num_vars {
            return Err(Error::InvalidClause(format!(
                "{} names for {} variables",
                names.len(),
                num_vars
            )));
        }
        Ok(WeightedCnf {
            num_vars,
            clauses: Vec::new(),
            var_names: Some(names),
        })
    }

    pub fn add_clause(&mut self, clause: Clause) -> Result<()> {
        for lit in clause.literals() {
            if lit.var >= self.num_vars {
                return Err(Error::VarOutOfRange {
                    var: lit.var,
                    num_vars: self.num_vars,
                });
            }
        }
        self.clauses.push(clause);
        Ok(())
    }

    /// Convenience wrapper: literals then penalty.
    pub fn push(&mut self, literals: Vec<Literal>, alpha: f64) -> Result<()> {
        self.add_clause(Clause::new(literals, alpha)?)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn var_names(&self) -> Option<&[String]> {
        self.var_names.as_deref()
    }

    pub fn set_var_names(&mut self, names: Vec<String>) -> Result<()> {
        if names.len() != self.num_vars {
            return Err(Error::InvalidClause(format!(
                "{} names for {} variables",
                names.len(),
                self.num_vars
            )));
        }
        self.var_names = Some(names);
        Ok(())
    }

    pub fn alpha_sum(&self) -> f64 {
        self.clauses.iter().map(|c| c.alpha).sum()
    }

    pub fn var_name(&self, var: usize) -> String {
        match &self.var_names {
            Some(names) => names[var].clone(),
            None => format!("x{var}"),
        }
    }
}

/// Per-variable activation values in `[0, 1]` with a clamp mask.
///
/// Clamped entries hold exactly `0.0` or `1.0` and are never changed by the
/// solvers. In the symmetric architecture every value is exactly Boolean; the
/// recurrent architecture holds continuous values.
#[derive(Debug, Clone, PartialEq)]
pub struct Activations {
    values: Vec<f64>,
    clamped: Vec<bool>,
}

impl Activations {
    /// All values zero, nothing clamped.
    pub fn zeros(num_vars: usize) -> Self {
        Activations {
            values: vec![0.0; num_vars],
            clamped: vec![false; num_vars],
        }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        let clamped = vec![false; values.len()];
        Activations { values, clamped }
    }

    /// Starts from zeros and applies the clamp list.
    pub fn with_clamps(num_vars: usize, clamps: &[(usize, bool)]) -> Self {
        let mut a = Activations::zeros(num_vars);
        for &(var, value) in clamps {
            a.values[var] = if value { 1.0 } else { 0.0 };
            a.clamped[var] = true;
        }
        a
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, var: usize) -> f64 {
        self.values[var]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_clamped(&self, var: usize) -> bool {
        self.clamped[var]
    }

    pub fn clamp_mask(&self) -> &[bool] {
        &self.clamped
    }

    /// Boolean reading of one variable.
    pub fn bool_at(&self, var: usize) -> bool {
        boolean_of(self.values[var])
    }

    /// Sets a non-clamped variable. Clamped entries are left untouched.
    pub fn set(&mut self, var: usize, value: f64) {
        if !self.clamped[var] {
            self.values[var] = value;
        }
    }

    /// Pins a variable to a Boolean value for the duration of a solve.
    pub fn clamp(&mut self, var: usize, value: bool) {
        self.values[var] = if value { 1.0 } else { 0.0 };
        self.clamped[var] = true;
    }

    /// Draws exact 0/1 values for every non-clamped variable.
    pub fn randomize_boolean<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for i in 0..self.values.len() {
            if !self.clamped[i] {
                self.values[i] = if rng.gen::<bool>() { 1.0 } else { 0.0 };
            }
        }
    }

    /// Draws uniform `[0, 1)` values for every non-clamped variable.
    pub fn randomize_uniform<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for i in 0..self.values.len() {
            if !self.clamped[i] {
                self.values[i] = rng.gen::<f64>();
            }
        }
    }

    /// True when every value is exactly 0.0 or 1.0.
    pub fn is_boolean(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }
}

/// Boolean interpretation of an activation value: true iff `value >= 0.5`.
pub fn boolean_of(value: f64) -> bool {
    value >= 0.5
}

/// A clause is satisfied when at least one positive literal reads true or one
/// negative literal reads false.
pub fn clause_satisfied(clause: &Clause, y: &Activations) -> bool {
    clause
        .literals()
        .iter()
        .any(|l| l.satisfied_by(y.value(l.var)))
}

/// Violation counts of a weighted CNF, split by penalty class.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Violation {
    /// Clauses with `alpha >= hard_threshold` that are violated.
    pub hard_violated: usize,
    /// Violated clauses below the hard threshold.
    pub soft_violated: usize,
    /// Sum of the penalties of all violated clauses.
    pub penalty_sum: f64,
}

impl Violation {
    /// The solver exit test: no hard violations and at most `max_soft` soft ones.
    pub fn acceptable(&self, max_soft: usize) -> bool {
        self.hard_violated == 0 && self.soft_violated <= max_soft
    }

    /// Lexicographic comparison key used to rank states.
    pub fn rank(&self) -> (usize, usize, f64) {
        (self.hard_violated, self.soft_violated, self.penalty_sum)
    }

    pub fn improves_on(&self, other: &Violation) -> bool {
        let (h, s, p) = self.rank();
        let (oh, os, op) = other.rank();
        (h, s) < (oh, os) || ((h, s) == (oh, os) && p < op)
    }
}

/// Counts violated clauses under the Boolean reading of `y`, partitioned at
/// `hard_threshold`.
pub fn violation(cnf: &WeightedCnf, y: &Activations, hard_threshold: f64) -> Violation {
    let mut v = Violation::default();
    for clause in cnf.clauses() {
        if !clause_satisfied(clause, y) {
            if clause.alpha() >= hard_threshold {
                v.hard_violated += 1;
            } else {
                v.soft_violated += 1;
            }
            v.penalty_sum += clause.alpha();
        }
    }
    v
}

/// Distance of an activation value from the literal's desired value:
/// `1 - v` for a positive literal, `v` for a negative one.
pub fn proximity(literal: Literal, value: f64) -> f64 {
    if literal.positive {
        1.0 - value
    } else {
        value
    }
}

/// Proximity-product clause loss: the product of every literal's distance
/// from its desired value. 0 means some literal is exactly satisfied, 1 means
/// every value exactly opposes its literal.
pub fn prop_clause_loss(clause: &Clause, y: &Activations) -> f64 {
    clause
        .literals()
        .iter()
        .map(|&l| proximity(l, y.value(l.var)))
        .product()
}

/// Log-satisfaction clause loss: minus the natural log of the best literal's
/// satisfaction degree. Returns [`LOGSAT_VIOLATION_SENTINEL`] at perfect
/// violation.
pub fn logsat_clause_loss(clause: &Clause, y: &Activations) -> f64 {
    let best = clause
        .literals()
        .iter()
        .map(|&l| 1.0 - proximity(l, y.value(l.var)))
        .fold(f64::NEG_INFINITY, f64::max);
    if best <= 0.0 {
        LOGSAT_VIOLATION_SENTINEL
    } else {
        // -ln(1) is -0.0; normalize so exact satisfaction reads +0.0.
        (-best.ln()).max(0.0)
    }
}

/// Which clause loss the recurrent solver descends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossMode {
    #[default]
    ProP,
    LogSat,
}

impl std::fmt::Display for LossMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LossMode::ProP => write!(f, "prop"),
            LossMode::LogSat => write!(f, "logsat"),
        }
    }
}

impl std::str::FromStr for LossMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "prop" => Ok(LossMode::ProP),
            "logsat" => Ok(LossMode::LogSat),
            other => Err(format!("unknown loss mode '{other}' (expected prop|logsat)")),
        }
    }
}

/// Violation loss of the whole CNF: the penalty-weighted average of the
/// per-clause losses.
pub fn vloss(cnf: &WeightedCnf, y: &Activations, mode: LossMode) -> f64 {
    let alpha_sum = cnf.alpha_sum();
    assert!(alpha_sum > 0.0, "vloss needs a positive penalty sum");
    let weighted: f64 = cnf
        .clauses()
        .iter()
        .map(|c| {
            c.alpha()
                * match mode {
                    LossMode::ProP => prop_clause_loss(c, y),
                    LossMode::LogSat => logsat_clause_loss(c, y),
                }
        })
        .sum();
    weighted / alpha_sum
}

/// Partial derivatives of [`prop_clause_loss`] with respect to each clause
/// variable's value, as a sparse `(var, d/dv)` list in literal order.
///
/// For a positive literal the derivative is minus the product of the other
/// literals' proximities; for a negative literal it is that product.
pub fn prop_clause_grad_v(clause: &Clause, y: &Activations) -> Vec<(usize, f64)> {
    let lits = clause.literals();
    let prox: Vec<f64> = lits.iter().map(|&l| proximity(l, y.value(l.var))).collect();
    let mut grad: Vec<(usize, f64)> = Vec::with_capacity(lits.len());
    for (i, lit) in lits.iter().enumerate() {
        let others: f64 = prox
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &p)| p)
            .product();
        let d = if lit.positive { -others } else { others };
        // A variable can appear at most once per polarity; if a tautological
        // clause shows up anyway, accumulate per-variable contributions.
        if let Some(entry) = grad.iter_mut().find(|(v, _)| *v == lit.var) {
            entry.1 += d;
        } else {
            grad.push((lit.var, d));
        }
    }
    grad
}

/// [`prop_clause_grad_v`] pushed through a logistic pre-activation: each
/// entry is scaled by `v (1 - v)`.
pub fn prop_clause_grad_z(clause: &Clause, y: &Activations) -> Vec<(usize, f64)> {
    prop_clause_grad_v(clause, y)
        .into_iter()
        .map(|(var, d)| {
            let v = y.value(var);
            (var, d * v * (1.0 - v))
        })
        .collect()
}

/// Index of a literal with minimal proximity; ties broken uniformly at
/// random with `rng`.
pub(crate) fn min_proximity_literal<R: Rng + ?Sized>(
    clause: &Clause,
    y: &Activations,
    rng: &mut R,
) -> usize {
    let lits = clause.literals();
    let mut best = f64::INFINITY;
    let mut chosen = 0usize;
    let mut ties = 0usize;
    for (i, &l) in lits.iter().enumerate() {
        let p = proximity(l, y.value(l.var));
        if p < best {
            best = p;
            chosen = i;
            ties = 1;
        } else if p == best {
            // Reservoir sample over the tied minimum.
            ties += 1;
            if rng.gen_range(0..ties) == 0 {
                chosen = i;
            }
        }
    }
    chosen
}

/// Gradient of the log-satisfaction loss with respect to pre-activations:
/// zero except at the minimal-proximity literal, where it is `v - 1` for a
/// positive literal and `v` for a negative one.
pub fn logsat_grad_z<R: Rng + ?Sized>(
    clause: &Clause,
    y: &Activations,
    rng: &mut R,
) -> Vec<(usize, f64)> {
    let lits = clause.literals();
    let chosen = min_proximity_literal(clause, y, rng);
    let mut grad: Vec<(usize, f64)> = Vec::with_capacity(lits.len());
    for (i, lit) in lits.iter().enumerate() {
        let v = y.value(lit.var);
        let d = if i == chosen {
            if lit.positive {
                v - 1.0
            } else {
                v
            }
        } else {
            0.0
        };
        if let Some(entry) = grad.iter_mut().find(|(var, _)| *var == lit.var) {
            entry.1 += d;
        } else {
            grad.push((lit.var, d));
        }
    }
    grad
}
