//! Expansion of the proximity-product loss into an energy polynomial.
//!
//! Each clause's proximity product multiplies out into signed monomials: the
//! clause's negative-literal variables appear in every monomial, and each
//! subset of the positive-literal variables contributes one term whose sign
//! is positive for even subset sizes. Scaling by the clause penalties and
//! merging like terms yields the energy the symmetric network descends.

use std::collections::BTreeMap;

use crate::cnf::WeightedCnf;
use crate::error::{Error, Result};

/// Cap on positive literals per clause before the 2^k expansion is refused.
pub const DEFAULT_MAX_POSITIVE_LITERALS: usize = 20;

/// One signed product term over a set of variables. An empty set is a
/// constant term.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub vars: Vec<usize>,
    pub coeff: f64,
}

/// A sum of monomials keyed by their (sorted) variable sets.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyPolynomial {
    monomials: BTreeMap<Vec<usize>, f64>,
}

impl EnergyPolynomial {
    pub fn new() -> Self {
        EnergyPolynomial::default()
    }

    /// Adds `coeff` to the monomial over `vars` (must be sorted, duplicate
    /// free), dropping the entry when the sum cancels to zero.
    pub fn add_term(&mut self, vars: Vec<usize>, coeff: f64) {
        debug_assert!(vars.windows(2).all(|w| w[0] < w[1]), "unsorted monomial");
        match self.monomials.get_mut(&vars) {
            Some(entry) => {
                *entry += coeff;
                if *entry == 0.0 {
                    self.monomials.remove(&vars);
                }
            }
            None => {
                if coeff != 0.0 {
                    self.monomials.insert(vars, coeff);
                }
            }
        }
    }

    /// Number of monomials, the constant term included.
    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    /// Coefficient of the empty monomial.
    pub fn constant_term(&self) -> f64 {
        self.monomials.get(&Vec::new()).copied().unwrap_or(0.0)
    }

    pub fn coeff(&self, vars: &[usize]) -> f64 {
        self.monomials.get(vars).copied().unwrap_or(0.0)
    }

    /// Iterates monomials in sorted key order.
    pub fn monomials(&self) -> impl Iterator<Item = Monomial> + '_ {
        self.monomials.iter().map(|(vars, &coeff)| Monomial {
            vars: vars.clone(),
            coeff,
        })
    }

    /// Evaluates the polynomial at a real-valued assignment.
    pub fn evaluate(&self, values: &[f64]) -> f64 {
        self.monomials
            .iter()
            .map(|(vars, coeff)| coeff * vars.iter().map(|&v| values[v]).product::<f64>())
            .sum()
    }
}

/// Expands `sum_c beta_c * ProP(c, y)` into an [`EnergyPolynomial`].
///
/// `betas` must hold one positive weight per clause. Clauses with more than
/// `max_positive` positive literals are rejected to bound the expansion, and
/// tautological clauses are rejected because their product is not multilinear.
pub fn prop_energy_polynomial(
    cnf: &WeightedCnf,
    betas: &[f64],
    max_positive: usize,
) -> Result<EnergyPolynomial> {
    assert_eq!(betas.len(), cnf.clauses().len(), "one beta per clause");
    let mut poly = EnergyPolynomial::new();
    for (ci, clause) in cnf.clauses().iter().enumerate() {
        if clause.is_tautology() {
            return Err(Error::TautologicalClause(ci));
        }
        let beta = betas[ci];
        assert!(beta > 0.0, "clause {ci}: beta must be positive");
        let mut neg_vars: Vec<usize> = clause
            .literals()
            .iter()
            .filter(|l| !l.positive)
            .map(|l| l.var)
            .collect();
        let pos_vars: Vec<usize> = clause
            .literals()
            .iter()
            .filter(|l| l.positive)
            .map(|l| l.var)
            .collect();
        if pos_vars.len() > max_positive {
            return Err(Error::ExpansionCap {
                clause: ci,
                positives: pos_vars.len(),
                cap: max_positive,
            });
        }
        neg_vars.sort_unstable();
        for subset in 0u64..(1u64 << pos_vars.len()) {
            let mut vars = neg_vars.clone();
            let mut picked = 0u32;
            for (bit, &v) in pos_vars.iter().enumerate() {
                if subset >> bit & 1 == 1 {
                    vars.push(v);
                    picked += 1;
                }
            }
            vars.sort_unstable();
            let sign = if picked % 2 == 0 { 1.0 } else { -1.0 };
            poly.add_term(vars, sign * beta);
        }
    }
    Ok(poly)
}
