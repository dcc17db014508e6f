//! Property-based invariants across randomly generated machines, plus the
//! structural laws that hold for every machine regardless of parameters.

use proptest::prelude::*;

use emq::machine::EpsilonMachine;
use emq::measures::{
    block_entropy, entropy_rate, excess_entropy, markov_order, statistical_complexity, Order,
    SUBSET_NODE_BUDGET,
};
use emq::pmm::PairMergerMachine;
use emq::processes::{nemo, random_machine};
use emq::qmachine::signal_states;

fn arb_machine() -> impl Strategy<Value = EpsilonMachine> {
    (1usize..=6, any::<u64>()).prop_map(|(n, seed)| random_machine(n, 2, seed).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn word_probabilities_sum_to_one(m in arb_machine(), len in 0usize..=5) {
        for s in 0..m.state_count() {
            let mut total = 0.0f64;
            let mut stack = vec![(s, 0usize, 1.0f64)];
            while let Some((st, d, pr)) = stack.pop() {
                if d == len {
                    total += pr;
                    continue;
                }
                for x in 0..m.alphabet().len() {
                    if let Some((t, p)) = m.transition(st, x) {
                        stack.push((t, d + 1, pr * p));
                    }
                }
            }
            prop_assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn minimize_is_idempotent(m in arb_machine()) {
        let m1 = m.minimize();
        let m2 = m1.minimize();
        prop_assert_eq!(m1.state_count(), m2.state_count());
        prop_assert!(m1.is_minimal());
    }

    #[test]
    fn gram_monotone_and_increments_telescope(m in arb_machine()) {
        let pmm = PairMergerMachine::build(&m);
        let mut prev = pmm.gram_matrix(0);
        for l in 1..=6 {
            let g = pmm.gram_matrix(l);
            for i in 0..g.dim() {
                for j in 0..g.dim() {
                    prop_assert!(g.entry(i, j) >= prev.entry(i, j) - 1e-12);
                }
            }
            prev = g;
        }
        for &(i, j) in pmm.pairs() {
            let incs = pmm.overlap_increments((i, j), 6).unwrap();
            let mut cum = 0.0;
            for (l, inc) in incs.iter().enumerate() {
                prop_assert!(*inc >= 0.0);
                cum += inc;
                prop_assert!((cum - pmm.gram_matrix(l).entry(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gram_matches_signal_state_overlaps(m in arb_machine()) {
        let pmm = PairMergerMachine::build(&m);
        for l in 0..=4 {
            let g = pmm.gram_matrix(l);
            let sss = signal_states(&m, l).unwrap();
            for i in 0..m.state_count() {
                for j in 0..m.state_count() {
                    prop_assert!((g.entry(i, j) - sss.overlap(i, j)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn entropy_quantities_are_ordered(m in arb_machine()) {
        let h = entropy_rate(&m);
        let c = statistical_complexity(&m);
        let (e, _) = excess_entropy(&m, 1e-9, 10).unwrap();
        prop_assert!(h >= 0.0 && h <= (m.alphabet().len() as f64).log2() + 1e-12);
        prop_assert!(e >= -1e-12 && e <= c + 1e-9);
        // Block-entropy slope converges to h from above.
        let mut prev_inc = f64::INFINITY;
        for l in 0..5 {
            let inc = block_entropy(&m, l + 1).unwrap() - block_entropy(&m, l).unwrap();
            prop_assert!(inc <= prev_inc + 1e-12);
            prop_assert!(inc >= h - 1e-9);
            prev_inc = inc;
        }
    }

    #[test]
    fn cryptic_order_bounded_by_markov_order(m in arb_machine()) {
        let r = markov_order(&m, SUBSET_NODE_BUDGET);
        let k = PairMergerMachine::build(&m).cryptic_order();
        match (k, r) {
            (Order::Finite(k), Order::Finite(r)) => prop_assert!(k <= r),
            // An infinite cryptic order forces an infinite Markov order.
            (Order::Infinite, r) => prop_assert!(r == Order::Infinite),
            _ => {}
        }
    }

    #[test]
    fn sampling_is_seed_stable(m in arb_machine(), seed in any::<u64>()) {
        let (w1, p1) = m.sample(32, seed, None);
        let (w2, p2) = m.sample(32, seed, None);
        prop_assert_eq!(w1, w2);
        prop_assert_eq!(p1, p2);
    }
}

#[test]
fn gram_converges_geometrically_for_infinite_cryptic_order() {
    for p in [0.25, 0.666, 0.9] {
        let m = nemo(p).unwrap();
        let pmm = PairMergerMachine::build(&m);
        let rho = pmm.spectral_radius();
        assert!(rho < 1.0);
        let ginf = pmm.gram_matrix_asymptotic().unwrap();
        let mut prev_norm = f64::INFINITY;
        for l in [0usize, 3, 6, 9, 12] {
            let g = pmm.gram_matrix(l);
            let mut norm = 0.0f64;
            for i in 0..3 {
                for j in 0..3 {
                    norm = norm.max((ginf.entry(i, j) - g.entry(i, j)).abs());
                }
            }
            assert!(norm <= prev_norm * rho.powi(3) + 1e-12 || norm <= 1e-12);
            prev_norm = norm;
        }
    }
}

#[test]
fn asymptotic_gram_bound_is_small_and_honest() {
    let m = nemo(0.666).unwrap();
    let pmm = PairMergerMachine::build(&m);
    let (g, bound) = pmm.gram_matrix_asymptotic_with_bound().unwrap();
    assert!((0.0..1e-10).contains(&bound), "bound {bound}");
    // The solve satisfies its own equation to the reported bound.
    let closed = [
        (0, 1, (0.666f64 * 0.334).sqrt() / 1.666),
        (1, 2, 0.666f64.sqrt() / 1.666),
        (2, 0, (2.0 * 0.666f64).sqrt() / 1.666),
    ];
    for (i, j, v) in closed {
        assert!((g.entry(i, j) - v).abs() <= bound + 1e-9);
    }
}
