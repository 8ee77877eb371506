mod common;

use common::{oracle, q, schmidt_strategy, TOL};
use locc_core::conversion::{
    breakpoints, build_plan, optimal_probability, tensor_conversion_probability, PlanOptions,
};
use locc_core::locc::{
    build_full_protocol, deterministic_protocol, exhaustive_run, exhaustive_run_from_schmidt, monotone_audit,
    monte_carlo_run, Kraus, LoccProtocol, LoccStep, MonteCarloConfig, Party, RunOptions, SuccessPredicate,
};
use locc_core::monotones::{f_k, monotone_e, monotone_profile};
use locc_core::sampling::{random_density, random_measurement, random_state, random_unitary};
use locc_core::schmidt::{majorizes, reduced_density, schmidt_decompose, state_from_schmidt, tensor_power};
use locc_core::{BipartiteState, Execution, Rational, Scalar, SchmidtVector};
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn float_close(a: &[f64], b: &[f64], eps: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= eps)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn schmidt_round_trip(a in schmidt_strategy(6)) {
        let back = schmidt_decompose(&state_from_schmidt(&a), TOL, false).unwrap();
        prop_assert!(float_close(back.probs(), a.to_f64().probs(), 1e-12));
    }

    #[test]
    fn local_unitaries_leave_schmidt_vector_unchanged(seed in any::<u64>(), na in 1usize..5, nb in 1usize..5) {
        let mut r = rng(seed);
        let s = random_state(&mut r, na, nb);
        let (u, v) = (random_unitary(&mut r, na), random_unitary(&mut r, nb));
        let moved = BipartiteState::new(&u * s.amplitudes() * v.transpose(), TOL).unwrap();
        let before = schmidt_decompose(&s, TOL, false).unwrap();
        let after = schmidt_decompose(&moved, TOL, false).unwrap();
        prop_assert!(float_close(before.probs(), after.probs(), 1e-9));
    }

    #[test]
    fn reduced_spectrum_is_schmidt_vector(seed in any::<u64>(), na in 1usize..5, nb in 1usize..5) {
        let s = random_state(&mut rng(seed), na, nb);
        let sv = schmidt_decompose(&s, TOL, false).unwrap();
        let mut eig = reduced_density(&s, TOL).unwrap().eigenvalues();
        eig.reverse();
        eig.truncate(sv.len());
        prop_assert!(float_close(&eig, sv.probs(), 1e-9));
    }

    #[test]
    fn tensor_power_counts_support(a in schmidt_strategy(4), m in 1usize..4) {
        let t = tensor_power(&a, m).unwrap();
        prop_assert_eq!(t.support(TOL), a.support(TOL).pow(m as u32));
        prop_assert_eq!(t.probs().iter().cloned().sum::<Rational>(), Rational::one());
    }

    #[test]
    fn majorization_is_reflexive_and_antisymmetric(a in schmidt_strategy(5), b in schmidt_strategy(5)) {
        prop_assert!(majorizes(&a, &a, TOL));
        prop_assert_eq!(majorizes(&a, &b, TOL), oracle::majorized_by(a.probs(), b.probs()));
        if majorizes(&a, &b, TOL) && majorizes(&b, &a, TOL) {
            let n = a.len().max(b.len());
            prop_assert_eq!(a.padded(n), b.padded(n));
        }
    }

    #[test]
    fn spectral_form_equals_tail_sums(seed in any::<u64>(), n in 1usize..6) {
        let s = random_state(&mut rng(seed), n, n);
        let sv = schmidt_decompose(&s, TOL, false).unwrap();
        let rho = reduced_density(&s, TOL).unwrap();
        for k in 1..=n {
            prop_assert!((f_k(&rho, k).unwrap() - monotone_e(&sv, k).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn ky_fan_concavity(seed in any::<u64>(), n in 1usize..7, lambda in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let rank_a = r.random_range(1..=n);
        let rank_b = r.random_range(1..=n);
        let (rho, sigma) = (random_density(&mut r, n, rank_a), random_density(&mut r, n, rank_b));
        let mix = rho.mix(&sigma, lambda).unwrap();
        for k in 1..=n {
            let lhs = f_k(&mix, k).unwrap();
            let rhs = lambda * f_k(&rho, k).unwrap() + (1.0 - lambda) * f_k(&sigma, k).unwrap();
            prop_assert!(lhs >= rhs - 1e-9, "k={k}: {lhs} < {rhs}");
        }
    }

    #[test]
    fn spectral_form_is_unitarily_invariant(seed in any::<u64>(), n in 1usize..6) {
        let mut r = rng(seed);
        let rho = random_density(&mut r, n, n);
        let moved = rho.conjugated(&random_unitary(&mut r, n));
        for k in 1..=n {
            prop_assert!((f_k(&rho, k).unwrap() - f_k(&moved, k).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn probability_is_bounded_by_every_monotone_ratio(a in schmidt_strategy(6), b in schmidt_strategy(6)) {
        let p = optimal_probability(&a, &b, TOL).unwrap();
        let n = a.len().max(b.len());
        let (pa, pb) = (monotone_profile(&a.padded(n)), monotone_profile(&b.padded(n)));
        for (ea, eb) in pa.values().iter().zip(pb.values()) {
            if !eb.is_zero() {
                prop_assert!(p <= ea.clone() / eb.clone());
            }
        }
        prop_assert!(p >= Rational::zero() && p <= Rational::one());
    }

    #[test]
    fn certain_iff_majorized(a in schmidt_strategy(6), b in schmidt_strategy(6)) {
        let p = optimal_probability(&a, &b, TOL).unwrap();
        prop_assert_eq!(p.is_one(), majorizes(&a, &b, TOL));
    }

    #[test]
    fn mutual_certainty_forces_equality(a in schmidt_strategy(4), b in schmidt_strategy(4)) {
        if optimal_probability(&a, &b, TOL).unwrap().is_one() && optimal_probability(&b, &a, TOL).unwrap().is_one() {
            let n = a.len().max(b.len());
            prop_assert_eq!(a.padded(n), b.padded(n));
        }
    }

    #[test]
    fn two_copies_do_no_worse_than_squared(a in schmidt_strategy(4), b in schmidt_strategy(4)) {
        let p = optimal_probability(&a, &b, TOL).unwrap();
        let p2 = tensor_conversion_probability(&a, &b, 2, TOL).unwrap();
        prop_assert!(p2 >= p.clone() * p);
    }

    #[test]
    fn breakpoint_ratios_strictly_increase(a in schmidt_strategy(6), b in schmidt_strategy(6)) {
        if let Ok(bp) = breakpoints(&a, &b, TOL) {
            prop_assert!(bp.ratios().windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(bp.ratios()[0].clone(), optimal_probability(&a, &b, TOL).unwrap());
            prop_assert!(bp.boundaries().windows(2).all(|w| w[0] > w[1]));
            prop_assert_eq!(*bp.boundaries().last().unwrap(), 1);
        }
    }

    #[test]
    fn plan_identities(a in schmidt_strategy(6), b in schmidt_strategy(6)) {
        let plan = build_plan(&a, &b, &PlanOptions::default()).unwrap();
        let Some(c) = plan.construction.as_ref() else {
            prop_assert!(plan.probability.is_zero());
            return Ok(());
        };
        let gamma = c.intermediate.probs();
        prop_assert!(gamma.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(majorizes(&plan.source, &c.intermediate, TOL));
        for i in 0..plan.dim() {
            prop_assert_eq!(c.success.squared()[i].clone() + c.failure.squared()[i].clone(), Rational::one());
            prop_assert_eq!(gamma[i].clone() * c.success.squared()[i].clone(), plan.probability.clone() * plan.target.probs()[i].clone());
        }
        if !plan.probability.is_one() {
            let failure_support = c.failure_weights().iter().filter(|w| !w.is_zero()).count();
            prop_assert!(failure_support < plan.target.support(TOL));
        }
    }

    #[test]
    fn full_protocol_succeeds_with_planned_probability(a in schmidt_strategy(4), b in schmidt_strategy(4)) {
        let plan = build_plan(&a, &b, &PlanOptions::default()).unwrap();
        if plan.is_degenerate() {
            return Ok(());
        }
        let protocol = build_full_protocol(&plan, TOL).unwrap();
        let en = exhaustive_run_from_schmidt(&protocol, &plan.source, &RunOptions::default()).unwrap();
        prop_assert_eq!(en.success_probability_exact(), Some(plan.probability.clone()));
        for b in en.final_branches().iter().filter(|b| en.succeeded(b)) {
            let got = b.schmidt(TOL).unwrap();
            prop_assert_eq!(got.padded(plan.dim()), plan.target.clone());
        }
    }

    #[test]
    fn deterministic_stage_reaches_target_on_every_branch(b in schmidt_strategy(5), seed in any::<u64>(), steps in 0usize..6) {
        let a = locc_core::sampling::random_majorized(&mut rng(seed), &b, steps);
        let protocol = deterministic_protocol(&a, &b, TOL).unwrap();
        let en = exhaustive_run_from_schmidt(&protocol, &a, &RunOptions::default()).unwrap();
        prop_assert_eq!(en.success_probability_exact(), Some(Rational::one()));
        for br in en.final_branches() {
            let got = schmidt_decompose(&br.state, TOL, false).unwrap();
            prop_assert!(float_close(got.probs(), b.to_f64().probs(), 1e-9));
            prop_assert_eq!(br.schmidt(TOL).unwrap(), b.clone());
        }
        for k in 1..=b.len() {
            prop_assert!(monotone_audit(&en, k, TOL).unwrap().non_increasing());
        }
    }
}

/// Random dense measurements on random parties, audited for every `k`.
fn random_protocol(r: &mut ChaCha8Rng, n: usize, depth: usize) -> LoccProtocol<f64> {
    let steps = (0..depth)
        .map(|_| {
            let outcomes = r.random_range(2..=3);
            let party = if r.random::<bool>() { Party::A } else { Party::B };
            let operators = random_measurement(r, n, outcomes).into_iter().map(Kraus::Dense).collect();
            LoccStep::Measure { party, operators }
        })
        .collect();
    LoccProtocol::new(steps, SuccessPredicate::Always, TOL).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn average_monotones_never_increase(seed in any::<u64>(), n in 2usize..5, depth in 1usize..4) {
        let mut r = rng(seed);
        let protocol = random_protocol(&mut r, n, depth);
        let initial = random_state(&mut r, n, n);
        let en = exhaustive_run(&protocol, &initial, &RunOptions::default()).unwrap();
        prop_assert!((en.total_probability() - 1.0).abs() < 1e-9);
        for k in 1..=n {
            let audit = monotone_audit(&en, k, TOL).unwrap();
            prop_assert!(audit.non_increasing(), "{audit:?}");
        }
    }

    #[test]
    fn monte_carlo_is_seed_deterministic(seed in any::<u64>(), trials in 1u64..3000) {
        let a = common::qv(&[(1, 2), (3, 10), (1, 5)]);
        let plan = build_plan(&a, &common::qv(&[(2, 5), (2, 5), (1, 5)]), &PlanOptions::default()).unwrap();
        let protocol = build_full_protocol(&plan, TOL).unwrap();
        let start = state_from_schmidt(&a);
        let seq = MonteCarloConfig { trials, seed, execution: Execution::Sequential };
        let par = MonteCarloConfig { execution: Execution::Parallel, ..seq };
        let one = monte_carlo_run(&protocol, &start, &seq, TOL).unwrap();
        prop_assert_eq!(&one, &monte_carlo_run(&protocol, &start, &par, TOL).unwrap());
        prop_assert_eq!(&one, &monte_carlo_run(&protocol, &start, &seq, TOL).unwrap());
    }
}

#[test]
fn lo_popescu_two_level_formula() {
    let bell = common::qv(&[(1, 2), (1, 2)]);
    for i in 0..=50 {
        let a = SchmidtVector::new(vec![q(100 - i, 100), q(i, 100)], TOL).unwrap();
        let expected = (q(2, 1) * q(i, 100)).clamp_unit();
        assert_eq!(optimal_probability(&a, &bell, TOL).unwrap(), expected);
    }
}
