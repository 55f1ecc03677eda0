use super::*;
use crate::blockworld::{
    build_index, clamp_literals, decode_plan, generate_instance, ground, validate_plan, Bounds,
};
use crate::cnf::{prop_energy_polynomial, Literal, DEFAULT_HARD_THRESHOLD};
use crate::cnf::polynomial::DEFAULT_MAX_POSITIVE_LITERALS;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn lit(var: usize, positive: bool) -> Literal {
    Literal { var, positive }
}

/// (A v B v ~C) and (~A v B) over A=0, B=1, C=2.
fn two_clause_cnf(alpha1: f64, alpha2: f64) -> WeightedCnf {
    let mut cnf = WeightedCnf::new(3);
    cnf.push(vec![lit(0, true), lit(1, true), lit(2, false)], alpha1)
        .unwrap();
    cnf.push(vec![lit(0, false), lit(1, true)], alpha2).unwrap();
    cnf
}

/// Random CNF whose clauses all carry at least one negative literal, the
/// shape domain groundings have.
fn random_cnf_with_negative<R: Rng>(rng: &mut R, num_vars: usize, num_clauses: usize) -> WeightedCnf {
    let mut cnf = WeightedCnf::new(num_vars);
    for _ in 0..num_clauses {
        loop {
            let alpha = [1.0, 1000.0][rng.gen_range(0..2)];
            let c = crate::cnf::tests::random_clause(rng, num_vars, alpha);
            if c.literals().iter().any(|l| !l.positive) {
                cnf.add_clause(c).unwrap();
                break;
            }
        }
    }
    cnf
}

#[test]
fn compile_reproduces_the_worked_weights() {
    let cnf = two_clause_cnf(1.0, 1.0);
    let mut rng = StdRng::seed_from_u64(0);
    let net = compile(&cnf, InitWeights::Compiled, &mut rng).unwrap();
    // Energy beta1*(C - AC - BC + ABC) + beta2*(A - AB) with beta = 1,
    // weights are the negated coefficients.
    assert_eq!(net.weight(&[2]), Some(-1.0));
    assert_eq!(net.weight(&[0, 2]), Some(1.0));
    assert_eq!(net.weight(&[1, 2]), Some(1.0));
    assert_eq!(net.weight(&[0, 1, 2]), Some(-1.0));
    assert_eq!(net.weight(&[0]), Some(-1.0));
    assert_eq!(net.weight(&[0, 1]), Some(1.0));
    assert_eq!(net.num_connections(), 6);
}

#[test]
fn compile_unit_clause_bias() {
    let mut cnf = WeightedCnf::new(1);
    cnf.push(vec![lit(0, true)], 1.0).unwrap();
    let mut rng = StdRng::seed_from_u64(0);
    let net = compile(&cnf, InitWeights::Compiled, &mut rng).unwrap();
    // ProP(A) = 1 - A, so the bias weight is +1.
    assert_eq!(net.weight(&[0]), Some(1.0));
    assert_eq!(net.num_connections(), 1);
}

#[test]
fn random_init_keeps_the_connection_sets() {
    let cnf = two_clause_cnf(2.0, 3.0);
    let mut rng = StdRng::seed_from_u64(1);
    let compiled = compile(&cnf, InitWeights::Compiled, &mut rng).unwrap();
    let random = compile(&cnf, InitWeights::Random, &mut rng).unwrap();
    let sets = |net: &SymmetricNetwork| -> Vec<Vec<usize>> {
        net.connections().iter().map(|(v, _)| v.to_vec()).collect()
    };
    assert_eq!(sets(&compiled), sets(&random));
    for (_, w) in random.connections() {
        assert!((-1.0..=1.0).contains(&w));
    }
}

/// The third-order example network: connections {A,B,C}:-1, {A,C}:+1,
/// {B,C}:+1 and a -1 bias on C, searching for C -> (A xor B).
fn xor_guard_network() -> SymmetricNetwork {
    SymmetricNetwork::from_connections(
        3,
        vec![
            (vec![0, 1, 2], -1.0),
            (vec![0, 2], 1.0),
            (vec![1, 2], 1.0),
            (vec![2], -1.0),
        ],
    )
    .unwrap()
}

#[test]
fn unit_input_matches_the_stated_sums() {
    let net = xor_guard_network();
    // Z_A = C - BC, Z_B = C - AC, Z_C = -AB + A + B - 1.
    let y = Activations::from_values(vec![1.0, 1.0, 1.0]);
    assert_eq!(unit_input(&net, &y, 2), 0.0);
    let y = Activations::from_values(vec![1.0, 0.0, 1.0]);
    assert_eq!(unit_input(&net, &y, 0), 1.0);
    assert_eq!(unit_input(&net, &y, 1), 0.0);
    assert_eq!(unit_input(&net, &y, 2), 0.0);

    let bias_only = SymmetricNetwork::from_connections(2, vec![(vec![1], 0.7)]).unwrap();
    let y = Activations::from_values(vec![0.0, 0.0]);
    assert_eq!(unit_input(&bias_only, &y, 1), 0.7);
}

#[test]
fn unit_input_is_minus_the_energy_difference() {
    let mut rng = StdRng::seed_from_u64(2);
    for _ in 0..30 {
        let cnf = crate::cnf::tests::random_cnf(&mut rng, 9, 14);
        let net = compile(&cnf, InitWeights::Compiled, &mut rng).unwrap();
        let mut y = Activations::zeros(9);
        y.randomize_boolean(&mut rng);
        for i in 0..9 {
            let mut y1 = y.clone();
            y1.set(i, 1.0);
            let mut y0 = y.clone();
            y0.set(i, 0.0);
            let dz = unit_input(&net, &y, i);
            let de = net.energy(&y1) - net.energy(&y0);
            assert!((dz + de).abs() < 1e-9, "unit {i}: z={dz} dE={de}");
        }
    }
}

#[test]
fn activation_returns_immediately_on_a_stable_state() {
    // (A) and (~B) from the satisfying state: no unstable units, no plateau.
    let mut cnf = WeightedCnf::new(2);
    cnf.push(vec![lit(0, true)], 1.0).unwrap();
    cnf.push(vec![lit(1, false)], 1.0).unwrap();
    let mut rng = StdRng::seed_from_u64(3);
    let net = compile(&cnf, InitWeights::Compiled, &mut rng).unwrap();
    let mut y = Activations::from_values(vec![1.0, 0.0]);
    let mut metrics = SolveMetrics::default();
    let outcome = activate_until_convergence(&net, &mut y, 100, 1_000_000, &mut rng, &mut metrics);
    assert_eq!(outcome, ActivationOutcome::Converged);
    assert_eq!(metrics.flips, 0);
    assert_eq!(y.values(), &[1.0, 0.0]);
}

#[test]
fn hand_traced_flip_sequence() {
    // At (A=0, B=0, C=1) every unit is unstable per the stated sums:
    // z_A = C - BC = 1, z_B = C - AC = 1, z_C = -AB + A + B - 1 = -1.
    let net = xor_guard_network();
    let y = Activations::from_values(vec![0.0, 0.0, 1.0]);
    assert_eq!(unit_input(&net, &y, 0), 1.0);
    assert_eq!(unit_input(&net, &y, 1), 1.0);
    assert_eq!(unit_input(&net, &y, 2), -1.0);

    // Pin A and B so the trace is deterministic: C flips to 0 and the
    // state (0, 0, 0) is stable.
    let mut y = Activations::with_clamps(3, &[(0, false), (1, false)]);
    y.set(2, 1.0);
    let mut rng = StdRng::seed_from_u64(4);
    let mut metrics = SolveMetrics::default();
    let outcome = activate_until_convergence(&net, &mut y, 0, 1_000_000, &mut rng, &mut metrics);
    assert_eq!(outcome, ActivationOutcome::Converged);
    assert_eq!(metrics.flips, 1);
    assert_eq!(y.values(), &[0.0, 0.0, 0.0]);
}

#[test]
fn converged_states_are_single_flip_minima() {
    let mut rng = StdRng::seed_from_u64(5);
    for round in 0..200 {
        let num_vars = rng.gen_range(3..=12);
        let num_clauses = rng.gen_range(2..=20);
        let cnf = crate::cnf::tests::random_cnf(&mut rng, num_vars, num_clauses);
        let betas: Vec<f64> = cnf.clauses().iter().map(|c| c.alpha()).collect();
        let poly = prop_energy_polynomial(&cnf, &betas, DEFAULT_MAX_POSITIVE_LITERALS).unwrap();
        let net = compile(&cnf, InitWeights::Compiled, &mut rng).unwrap();
        let mut y = Activations::zeros(num_vars);
        y.randomize_boolean(&mut rng);
        let mut metrics = SolveMetrics::default();
        let outcome =
            activate_until_convergence(&net, &mut y, 10, 1_000_000, &mut rng, &mut metrics);
        assert_eq!(outcome, ActivationOutcome::Converged, "round {round}");
        let here = poly.evaluate(y.values());
        for i in 0..num_vars {
            let mut flipped = y.clone();
            flipped.set(i, 1.0 - y.value(i));
            assert!(
                poly.evaluate(flipped.values()) >= here - 1e-9,
                "round {round}: flipping {i} lowers the energy"
            );
        }
    }
}

#[test]
fn must_flips_strictly_descend_plateau_flips_hold() {
    let mut rng = StdRng::seed_from_u64(6);
    for _ in 0..50 {
        let cnf = crate::cnf::tests::random_cnf(&mut rng, 8, 12);
        let net = compile(&cnf, InitWeights::Compiled, &mut rng).unwrap();
        let mut y = Activations::zeros(8);
        y.randomize_boolean(&mut rng);
        let e = net.energy(&y);
        for i in 0..8 {
            let z = unit_input(&net, &y, i);
            let unstable = (y.value(i) == 1.0 && z < 0.0) || (y.value(i) == 0.0 && z > 0.0);
            let mut flipped = y.clone();
            flipped.set(i, 1.0 - y.value(i));
            let ef = net.energy(&flipped);
            if unstable {
                assert!(ef < e - 1e-12, "must flip on {i} did not descend");
            } else if z == 0.0 {
                assert!((ef - e).abs() < 1e-9, "plateau flip on {i} changed energy");
            }
        }
    }
}

#[test]
fn anti_hebb_directions_follow_zero_parity() {
    // Violated (A v B v ~C) at A=0, B=0, C=1: increments on {A,C} and {B,C},
    // decrements on {C} and {A,B,C}.
    let mut cnf = WeightedCnf::new(3);
    cnf.push(vec![lit(0, true), lit(1, true), lit(2, false)], 1.0)
        .unwrap();
    let mut rng = StdRng::seed_from_u64(7);
    let mut net = compile(&cnf, InitWeights::Compiled, &mut rng).unwrap();
    let y = Activations::from_values(vec![0.0, 0.0, 1.0]);
    // z_A = z_B = 1, z_C = -1, so the scale is min |z| + epsilon.
    let lambda = 1.0 + 1e-6;
    let report = anti_hebb_step(&mut net, &cnf, &y, 1, 1e9, 1000.0, &mut rng);
    assert_eq!(report.clauses_updated, vec![0]);
    assert!((net.weight(&[2]).unwrap() - (-1.0 - lambda)).abs() < 1e-12);
    assert!((net.weight(&[0, 2]).unwrap() - (1.0 + lambda)).abs() < 1e-12);
    assert!((net.weight(&[1, 2]).unwrap() - (1.0 + lambda)).abs() < 1e-12);
    assert!((net.weight(&[0, 1, 2]).unwrap() - (-1.0 - lambda)).abs() < 1e-12);
}

#[test]
fn anti_hebb_pairwise_special_case_weakens_cofiring_units() {
    // (~A v ~B) violated at (1, 1): zero count 0 is even, so the pairwise
    // weight decrements, the classical rule.
    let mut cnf = WeightedCnf::new(2);
    cnf.push(vec![lit(0, false), lit(1, false)], 1.0).unwrap();
    let mut rng = StdRng::seed_from_u64(8);
    let mut net = compile(&cnf, InitWeights::Compiled, &mut rng).unwrap();
    let before = net.weight(&[0, 1]).unwrap();
    let y = Activations::from_values(vec![1.0, 1.0]);
    anti_hebb_step(&mut net, &cnf, &y, 1, 1e9, 1000.0, &mut rng);
    assert!(net.weight(&[0, 1]).unwrap() < before);
}

#[test]
fn anti_hebb_destabilizes_a_clause_unit_and_lifts_the_state() {
    let mut rng = StdRng::seed_from_u64(9);
    for round in 0..40 {
        let cnf = random_cnf_with_negative(&mut rng, 8, 14);
        let mut net = compile(&cnf, InitWeights::Compiled, &mut rng).unwrap();
        let mut y = Activations::zeros(8);
        y.randomize_boolean(&mut rng);
        let mut metrics = SolveMetrics::default();
        let mut lifted = 0;
        for _ in 0..30 {
            activate_until_convergence(&net, &mut y, 5, 1_000_000, &mut rng, &mut metrics);
            let v = violation(&cnf, &y, DEFAULT_HARD_THRESHOLD);
            if v.hard_violated + v.soft_violated == 0 {
                break;
            }
            let before = net.energy(&y);
            let report = anti_hebb_step(&mut net, &cnf, &y, 1, 1e12, 1000.0, &mut rng);
            let after = net.energy(&y);
            assert!(after > before, "round {round}: energy not lifted");
            // The scaled step must leave some unit of the selected clause
            // unstable.
            let ci = report.clauses_updated[0];
            let destabilized = cnf.clauses()[ci].literals().iter().any(|l| {
                let z = unit_input(&net, &y, l.var);
                (y.value(l.var) == 1.0 && z < 0.0) || (y.value(l.var) == 0.0 && z > 0.0)
            });
            assert!(destabilized, "round {round}: no clause unit destabilized");
            lifted += 1;
        }
        let _ = lifted;
    }
}

#[test]
fn anti_hebb_skips_fully_clamped_clauses() {
    let mut cnf = WeightedCnf::new(2);
    cnf.push(vec![lit(0, true)], 1.0).unwrap();
    cnf.push(vec![lit(1, true)], 1.0).unwrap();
    let mut rng = StdRng::seed_from_u64(10);
    let mut net = compile(&cnf, InitWeights::Compiled, &mut rng).unwrap();
    let mut y = Activations::with_clamps(2, &[(0, false)]);
    y.set(1, 0.0);
    let report = anti_hebb_step(&mut net, &cnf, &y, 2, 1e9, 1000.0, &mut rng);
    assert_eq!(report.clauses_skipped, vec![0]);
    assert_eq!(report.clauses_updated, vec![1]);
    // The clamped clause's bias is untouched.
    assert_eq!(net.weight(&[0]), Some(1.0));
}

#[test]
fn weight_bound_rescales_everything() {
    let mut cnf = WeightedCnf::new(2);
    cnf.push(vec![lit(0, false), lit(1, false)], 1000.0).unwrap();
    let mut rng = StdRng::seed_from_u64(11);
    let mut net = compile(&cnf, InitWeights::Compiled, &mut rng).unwrap();
    let y = Activations::from_values(vec![1.0, 1.0]);
    // Tiny bound: the update (lambda = 1000 + eps) trips it, and every
    // weight is multiplied by 0.01.
    anti_hebb_step(&mut net, &cnf, &y, 1, 0.5, 1000.0, &mut rng);
    let w = net.weight(&[0, 1]).unwrap();
    assert!((w - 0.01 * (-2000.000001)).abs() < 1e-9, "got {w}");
}

#[test]
fn compiled_energy_equals_violated_penalty_sum() {
    let mut rng = StdRng::seed_from_u64(12);
    for _ in 0..200 {
        let num_vars = rng.gen_range(2..=12);
        let num_clauses = rng.gen_range(1..=18);
        let cnf = crate::cnf::tests::random_cnf(&mut rng, num_vars, num_clauses);
        let betas: Vec<f64> = cnf.clauses().iter().map(|c| c.alpha()).collect();
        let poly = prop_energy_polynomial(&cnf, &betas, DEFAULT_MAX_POSITIVE_LITERALS).unwrap();
        let mut y = Activations::zeros(num_vars);
        y.randomize_boolean(&mut rng);
        let v = violation(&cnf, &y, DEFAULT_HARD_THRESHOLD);
        assert!((poly.evaluate(y.values()) - v.penalty_sum).abs() < 1e-9);
    }
}

#[test]
fn solve_single_positive_clause() {
    let mut cnf = WeightedCnf::new(1);
    cnf.push(vec![lit(0, true)], 1000.0).unwrap();
    let mut rng = StdRng::seed_from_u64(13);
    let mut net = compile(&cnf, InitWeights::Compiled, &mut rng).unwrap();
    let hyper = ConsynHyper {
        max_soft: 0,
        ..ConsynHyper::default()
    };
    let (y, metrics) = solve(&mut net, &cnf, &[], &hyper, &mut rng);
    assert!(metrics.solved);
    assert_eq!(y.value(0), 1.0);
    assert!(metrics.flips <= 1);
}

#[test]
fn solve_unsatisfiable_returns_best_state_flagged() {
    let mut cnf = WeightedCnf::new(1);
    cnf.push(vec![lit(0, true)], 1000.0).unwrap();
    cnf.push(vec![lit(0, false)], 1000.0).unwrap();
    let mut rng = StdRng::seed_from_u64(14);
    let mut net = compile(&cnf, InitWeights::Compiled, &mut rng).unwrap();
    let hyper = ConsynHyper {
        max_iterations: 50,
        max_soft: 0,
        ..ConsynHyper::default()
    };
    let (y, metrics) = solve(&mut net, &cnf, &[], &hyper, &mut rng);
    assert!(!metrics.solved);
    let v = violation(&cnf, &y, DEFAULT_HARD_THRESHOLD);
    assert_eq!(v.hard_violated + v.soft_violated, 1, "minimum violation is one clause");
}

#[test]
fn clamped_units_never_change() {
    let mut rng = StdRng::seed_from_u64(15);
    let cnf = random_cnf_with_negative(&mut rng, 10, 20);
    let mut net = compile(&cnf, InitWeights::Compiled, &mut rng).unwrap();
    let clamps = vec![(0, true), (3, false), (7, true)];
    let hyper = ConsynHyper {
        max_iterations: 30,
        max_soft: 0,
        ..ConsynHyper::default()
    };
    let (y, _) = solve(&mut net, &cnf, &clamps, &hyper, &mut rng);
    assert_eq!(y.value(0), 1.0);
    assert_eq!(y.value(3), 0.0);
    assert_eq!(y.value(7), 1.0);
    assert!(y.is_clamped(0) && y.is_clamped(3) && y.is_clamped(7));
}

#[test]
fn identical_seeds_give_identical_runs() {
    let run = || {
        let mut rng = StdRng::seed_from_u64(16);
        let cnf = random_cnf_with_negative(&mut rng, 12, 30);
        let mut net = compile(&cnf, InitWeights::Compiled, &mut rng).unwrap();
        let hyper = ConsynHyper {
            max_iterations: 200,
            max_soft: 0,
            ..ConsynHyper::default()
        };
        let (y, metrics) = solve(&mut net, &cnf, &[], &hyper, &mut rng);
        (y.values().to_vec(), metrics, write_network(&net))
    };
    assert_eq!(run(), run());
}

#[test]
fn snapshot_roundtrips_byte_identically() {
    let mut rng = StdRng::seed_from_u64(17);
    let cnf = two_clause_cnf(1000.0, 1.0);
    let net = compile(&cnf, InitWeights::Random, &mut rng).unwrap();
    let text = write_network(&net);
    let back = read_network(&text, "test").unwrap();
    assert_eq!(write_network(&back), text);
    assert_eq!(back.num_units(), net.num_units());
    assert_eq!(back.connections(), net.connections());
}

#[test]
fn solves_a_three_block_instance_end_to_end() {
    let mut rng = StdRng::seed_from_u64(18);
    let bounds = Bounds::for_blocks(3, 7).unwrap();
    let inst = generate_instance(&mut rng, 3, bounds).unwrap();
    let index = build_index(bounds).unwrap();
    let cnf = ground(bounds, 1000.0, 1.0).unwrap();
    let mut net = compile(&cnf, InitWeights::Compiled, &mut rng).unwrap();
    let clamps = clamp_literals(&inst, &index);
    let hyper = ConsynHyper::default();
    let (y, metrics) = solve(&mut net, &cnf, &clamps, &hyper, &mut rng);
    assert!(metrics.solved, "three-block instance should solve");
    let plan = decode_plan(&y, &index);
    assert_eq!(validate_plan(&plan, &inst), Ok(()));
    let v = violation(&cnf, &y, DEFAULT_HARD_THRESHOLD);
    assert_eq!(v.hard_violated, 0);
}
