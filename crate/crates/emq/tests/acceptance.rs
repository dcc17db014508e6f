//! Acceptance suite: every reproduction target and invariant the library
//! promises, one test per criterion, each printing a pass line with the
//! measured values. Run with `cargo test -p emq --test acceptance`.

use std::collections::HashMap;
use std::time::Instant;

use nalgebra::DMatrix;

use emq::machine::EpsilonMachine;
use emq::measures::{
    excess_entropy, markov_order, statistical_complexity, Order, SUBSET_NODE_BUDGET,
};
use emq::pmm::{jozsa_ratio_check, GramMatrix, Horizon, PairMergerMachine, ZeroRatioRule};
use emq::processes::{biased_coins, nemo, random_machine, rk_golden_mean};
use emq::qmachine::{cq_bruteforce, cq_with_pmm, measure_simulate};

const SURVEY_P: [f64; 5] = [0.1, 0.3, 0.5, 0.666, 0.9];

fn example_corpus() -> Vec<EpsilonMachine> {
    let mut corpus = Vec::new();
    for p in SURVEY_P {
        corpus.push(biased_coins(p).unwrap());
        corpus.push(rk_golden_mean(4, 3, p).unwrap());
        corpus.push(nemo(p).unwrap());
    }
    corpus
}

#[test]
fn criterion_01_nemo_asymptotic_compression_value() {
    let started = Instant::now();
    let m = nemo(0.666).unwrap();
    let v = emq::qmachine::cq(&m, Horizon::Asymptotic).unwrap();
    let elapsed = started.elapsed();
    assert!(
        (v - 1.0332).abs() <= 5e-4,
        "Cq(inf) = {v}, expected 1.0332 ± 5e-4"
    );
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "took {:.3}s, budget 1s",
        elapsed.as_secs_f64()
    );
    println!(
        "criterion 01 PASS: nemo Cq(inf) = {v:.6} (target 1.0332 ± 5e-4) in {:.1}ms",
        elapsed.as_secs_f64() * 1e3
    );
}

#[test]
fn criterion_02_nemo_asymptotic_overlaps_closed_form() {
    for p in [0.25, 0.5, 0.666, 0.9] {
        let m = nemo(p).unwrap();
        let g = PairMergerMachine::build(&m).gram_matrix_asymptotic().unwrap();
        let expect_ab = (p * (1.0 - p)).sqrt() / (1.0 + p);
        let expect_bc = p.sqrt() / (1.0 + p);
        let expect_ca = (2.0 * p).sqrt() / (1.0 + p);
        assert!((g.entry(0, 1) - expect_ab).abs() <= 1e-9, "p={p} AB");
        assert!((g.entry(1, 2) - expect_bc).abs() <= 1e-9, "p={p} BC");
        assert!((g.entry(2, 0) - expect_ca).abs() <= 1e-9, "p={p} CA");
    }
    println!("criterion 02 PASS: nemo asymptotic overlaps match closed forms at 4 parameters (1e-9)");
}

/// The published increment lists give, for each pair, the prefactor, the
/// offset of its first merger, and the geometric ratio a = (1−p)/2 between
/// successive mergers; mergers recur every three symbols around the pair
/// cycle. Increments are zero at every other horizon, which is what makes
/// the cumulative sums telescope to the closed-form asymptotic overlaps.
#[test]
fn criterion_03_nemo_overlap_increment_series() {
    for p in [0.25, 0.5, 0.666, 0.9] {
        let a = (1.0 - p) / 2.0;
        let m = nemo(p).unwrap();
        let pmm = PairMergerMachine::build(&m);
        let series: [((usize, usize), usize, f64); 3] = [
            ((0, 1), 3, (p * (1.0 - p)).sqrt() / 2.0),
            ((1, 2), 2, p.sqrt() / 2.0),
            ((2, 0), 1, (p / 2.0).sqrt()),
        ];
        for (pair, offset, prefactor) in series {
            let incs = pmm.overlap_increments(pair, 9).unwrap();
            for (l, &inc) in incs.iter().enumerate() {
                let expected = if l >= offset && (l - offset) % 3 == 0 {
                    prefactor * a.powi(((l - offset) / 3) as i32)
                } else {
                    0.0
                };
                assert!(
                    (inc - expected).abs() <= 1e-12,
                    "p={p} pair {pair:?} L={l}: {inc} vs {expected}"
                );
            }
        }
    }
    println!("criterion 03 PASS: nemo increment series match for L ≤ 9 at 4 parameters (1e-12)");
}

#[test]
fn criterion_04_rkgm_orders_and_strict_decrease() {
    let m = rk_golden_mean(4, 3, 0.505).unwrap();
    assert_eq!(markov_order(&m, SUBSET_NODE_BUDGET), Order::Finite(4));
    let pmm = PairMergerMachine::build(&m);
    assert_eq!(pmm.cryptic_order(), Order::Finite(3));
    let cq: Vec<f64> = (0..=4)
        .map(|l| cq_with_pmm(&m, &pmm, Horizon::Finite(l)).unwrap())
        .collect();
    for l in 0..3 {
        assert!(
            cq[l] - cq[l + 1] > 1e-6,
            "gap at L={l}: {} − {}",
            cq[l],
            cq[l + 1]
        );
    }
    assert!(
        (cq[4] - cq[3]).abs() <= 1e-10,
        "Cq(4) − Cq(3) = {}",
        cq[4] - cq[3]
    );
    println!(
        "criterion 04 PASS: 4-3 golden mean R=4 k=3, Cq = [{:.4}, {:.4}, {:.4}, {:.4}] then constant",
        cq[0], cq[1], cq[2], cq[3]
    );
}

#[test]
fn criterion_05_rkgm_quoted_overlaps() {
    let p = 0.505f64;
    let m = rk_golden_mean(4, 3, p).unwrap();
    let pmm = PairMergerMachine::build(&m);
    let a = m.state_index("A").unwrap();
    let f = m.state_index("F").unwrap();
    let g = m.state_index("G").unwrap();

    let g1 = pmm.gram_matrix(1);
    assert!((g1.entry(a, g) - p.sqrt()).abs() <= 1e-12);
    for i in 0..7 {
        for j in (i + 1)..7 {
            if (i, j) != (a.min(g), a.max(g)) {
                assert!(g1.entry(i, j).abs() <= 1e-12, "L=1 extra overlap ({i},{j})");
            }
        }
    }

    let g2 = pmm.gram_matrix(2);
    assert!((g2.entry(a, f) - p).abs() <= 1e-12);
    assert!((g2.entry(a, g) - p.sqrt()).abs() <= 1e-12);
    assert!((g2.entry(f, g) - p.sqrt()).abs() <= 1e-12);
    for i in 0..7 {
        for j in (i + 1)..7 {
            let quoted = [(a.min(f), a.max(f)), (a.min(g), a.max(g)), (f.min(g), f.max(g))];
            if !quoted.contains(&(i, j)) {
                assert!(g2.entry(i, j).abs() <= 1e-12, "L=2 extra overlap ({i},{j})");
            }
        }
    }
    println!("criterion 05 PASS: 4-3 golden mean overlaps √p at L=1 and {{p, √p, √p}} at L=2 (1e-12)");
}

#[test]
fn criterion_06_biased_coins_family() {
    for p in [0.05, 0.1, 0.3, 0.5, 0.666, 0.9, 0.95] {
        let m = biased_coins(p).unwrap();
        assert_eq!(
            statistical_complexity(&m),
            1.0,
            "C_mu not exactly 1 at p={p}"
        );
    }
    for p in [0.1, 0.3, 0.666, 0.9] {
        let m = biased_coins(p).unwrap();
        let pmm = PairMergerMachine::build(&m);
        let cq1 = cq_with_pmm(&m, &pmm, Horizon::Finite(1)).unwrap();
        assert!(cq1 < 1.0, "Cq(1) = {cq1} not below C_mu at p={p}");
        for l in [2usize, 3, 4] {
            let v = cq_with_pmm(&m, &pmm, Horizon::Finite(l)).unwrap();
            assert!((v - cq1).abs() <= 1e-12, "Cq({l}) != Cq(1) at p={p}");
        }
    }
    // p = 1/2: the minimized machine is a single IID state with no memory.
    let min = biased_coins(0.5).unwrap().minimize();
    assert_eq!(min.state_count(), 1);
    assert_eq!(statistical_complexity(&min), 0.0);
    let (e, _) = excess_entropy(&min, 1e-9, 14).unwrap();
    assert_eq!(e, 0.0);
    let pmm = PairMergerMachine::build(&min);
    for l in 0..=4 {
        assert_eq!(cq_with_pmm(&min, &pmm, Horizon::Finite(l)).unwrap(), 0.0);
    }
    assert_eq!(cq_with_pmm(&min, &pmm, Horizon::Asymptotic).unwrap(), 0.0);
    println!("criterion 06 PASS: biased coins C_mu = 1 exactly, Cq constant beyond L=1, p=1/2 minimizes to zero");
}

#[test]
fn criterion_07_oracle_equivalence_across_corpus() {
    let started = Instant::now();
    let mut corpus = example_corpus();
    for i in 0..200usize {
        let n_states = 2 + (i % 5); // 2..=6
        corpus.push(random_machine(n_states, 2, i as u64).unwrap());
    }
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for m in &corpus {
        let pmm = PairMergerMachine::build(m);
        for l in 0..=6 {
            let fast = cq_with_pmm(m, &pmm, Horizon::Finite(l)).unwrap();
            let brute = cq_bruteforce(m, l).unwrap();
            let dev = (fast - brute).abs();
            assert!(
                dev <= 1e-10,
                "{} L={l}: gram {fast} vs brute {brute}",
                m.name()
            );
            worst = worst.max(dev);
            checked += 1;
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "oracle sweep took {elapsed:.1}s, budget 300s");
    println!(
        "criterion 07 PASS: {checked} (machine, L) pairs, max |Cq − brute| = {worst:.2e} in {elapsed:.1}s"
    );
}

#[test]
fn criterion_08_bound_suite() {
    let mut corpus = example_corpus();
    for p in [0.05, 0.2, 0.4, 0.6, 0.8, 0.95] {
        corpus.push(biased_coins(p).unwrap());
        corpus.push(rk_golden_mean(4, 3, p).unwrap());
        corpus.push(nemo(p).unwrap());
    }
    for i in 0..100usize {
        corpus.push(random_machine(2 + (i % 5), 2, 1000 + i as u64).unwrap());
    }
    for m in &corpus {
        let c_mu = statistical_complexity(m);
        let (e, _) = excess_entropy(m, 1e-9, 14).unwrap();
        let pmm = PairMergerMachine::build(m);
        for l in 0..=8 {
            let v = cq_with_pmm(m, &pmm, Horizon::Finite(l)).unwrap();
            assert!(v >= e - 1e-6, "{} L={l}: Cq {v} below E {e}", m.name());
            assert!(v <= c_mu + 1e-9, "{} L={l}: Cq {v} above C_mu {c_mu}", m.name());
            if l == 0 {
                assert!((v - c_mu).abs() <= 1e-10, "{}: Cq(0) != C_mu", m.name());
            }
        }
    }
    println!(
        "criterion 08 PASS: E ≤ Cq(L) ≤ C_mu and Cq(0) = C_mu over {} machines, L ≤ 8",
        corpus.len()
    );
}

#[test]
fn criterion_09_cryptic_never_exceeds_markov_order() {
    let mut finite_both = 0usize;
    for i in 0..1000usize {
        let n_states = 2 + (i % 6); // 2..=7
        let m = random_machine(n_states, 2, i as u64).unwrap();
        let r = markov_order(&m, SUBSET_NODE_BUDGET);
        let k = PairMergerMachine::build(&m).cryptic_order();
        if let (Order::Finite(k), Order::Finite(r)) = (k, r) {
            assert!(k <= r, "machine seed {i}: k={k} > R={r}");
            finite_both += 1;
        }
    }
    println!(
        "criterion 09 PASS: k ≤ R on all {finite_both} survey machines with both orders finite"
    );
}

#[test]
fn criterion_10_monotonicity_survey() {
    let mut confirmed = Vec::new();
    for i in 0..1000usize {
        let n_states = 2 + (i % 6); // 2..=7
        let m = random_machine(n_states, 2, i as u64).unwrap();
        let pmm = PairMergerMachine::build(&m);
        let mut prev = cq_with_pmm(&m, &pmm, Horizon::Finite(0)).unwrap();
        for l in 1..=8 {
            let v = cq_with_pmm(&m, &pmm, Horizon::Finite(l)).unwrap();
            if v > prev + 1e-10 {
                // Confirm against the independent brute-force oracle before
                // declaring a violation, so a failure here cannot be an
                // artifact of the pair-merger route.
                let b_prev = cq_bruteforce(&m, l - 1).unwrap();
                let b = cq_bruteforce(&m, l).unwrap();
                assert!(
                    (b - v).abs() <= 1e-10 && (b_prev - prev).abs() <= 1e-10,
                    "gram and brute-force routes disagree on machine seed {i}"
                );
                if b > b_prev + 1e-10 {
                    confirmed.push((i, l, b_prev, b));
                }
            }
            prev = v;
        }
    }
    assert!(
        confirmed.is_empty(),
        "SCIENTIFIC FINDING: Cq(L) is not monotone on this machine class. \
         {} of 1000 sampled machines show an oracle-confirmed increase \
         (seed, L, Cq(L-1), Cq(L)): {:?}. Reproduce with \
         `emq survey --n 1000` or `emq analyze --family random \
         --machine-seed <seed> --n-states <2 + seed % 6>`.",
        confirmed.len(),
        &confirmed[..confirmed.len().min(8)]
    );
    println!("criterion 10 PASS: 1000-machine survey (N = 2..=7, binary): no Cq increase for L ≤ 8");
}

#[test]
fn criterion_11_measurement_statistics() {
    let draws = 100_000usize;
    let l = 3usize;
    for m in [biased_coins(0.666).unwrap(), rk_golden_mean(4, 3, 0.505).unwrap()] {
        let start = 0usize;
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        for seed in 0..draws {
            let (w, _) = measure_simulate(&m, l, start, seed as u64).unwrap();
            *counts.entry(w).or_default() += 1;
        }
        let mut tv = 0.0;
        for bits in 0..(1usize << l) {
            let word: Vec<usize> = (0..l).map(|i| (bits >> (l - 1 - i)) & 1).collect();
            let classical = m.word_probability(start, &word).0;
            let empirical = counts.get(&word).copied().unwrap_or(0) as f64 / draws as f64;
            tv += (classical - empirical).abs();
        }
        tv /= 2.0;
        assert!(tv <= 0.01, "{}: total variation {tv}", m.name());
        println!(
            "criterion 11 progress: {} TV(quantum measurement, classical) = {tv:.4} at L=3, 10^5 draws",
            m.name()
        );
    }
    println!("criterion 11 PASS: measurement statistics within TV 0.01 for both machines");
}

#[test]
fn criterion_12_jozsa_ratio_checks() {
    for p in SURVEY_P {
        let m = biased_coins(p).unwrap();
        let pmm = PairMergerMachine::build(&m);
        let g0 = pmm.gram_matrix(0);
        let g1 = pmm.gram_matrix(1);
        let check = jozsa_ratio_check(&g0, &g1, ZeroRatioRule::UseNumerator).unwrap();
        assert!(check.positive, "p={p}: min eigenvalue {}", check.min_eigenvalue);
    }
    // Capability: a non-PSD ratio matrix is flagged, not silently accepted.
    let base = DMatrix::from_row_slice(3, 3, &[1.0, 0.4, 0.3, 0.4, 1.0, 0.2, 0.3, 0.2, 1.0]);
    let ratio = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0]);
    let ga = GramMatrix::from_matrix(Horizon::Finite(1), base.clone()).unwrap();
    let gb = GramMatrix::from_matrix(Horizon::Finite(2), base.component_mul(&ratio)).unwrap();
    let check = jozsa_ratio_check(&ga, &gb, ZeroRatioRule::UseNumerator).unwrap();
    assert!(!check.positive);
    println!(
        "criterion 12 PASS: biased-coins ratio matrices PSD at 5 parameters; non-PSD case flagged (min eig {:.3})",
        check.min_eigenvalue
    );
}
