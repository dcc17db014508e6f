//! Parameterized builders for the example process families and a seeded
//! random unifilar machine generator for surveys.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::machine::{Alphabet, EpsilonMachine};

fn check_unit_open(param: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0 && value < 1.0) {
        return Err(Error::OutOfRange {
            param,
            value,
            expected: "(0, 1)",
        });
    }
    Ok(())
}

fn letter_labels(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            if n <= 26 {
                char::from(b'A' + i as u8).to_string()
            } else {
                format!("s{i}")
            }
        })
        .collect()
}

/// Two alternating biased coins. Coin A emits 0 with probability `1 − p` and
/// stays, or 1 with probability `p` and hands over to B; B mirrors it. The
/// family is symmetric under `p ↔ 1 − p` and collapses to a single IID state
/// at `p = 1/2`.
pub fn biased_coins(p: f64) -> Result<EpsilonMachine> {
    check_unit_open("p", p)?;
    EpsilonMachine::from_parts(
        "biased-coins",
        Alphabet::binary(),
        letter_labels(2),
        &[
            (0, 0, 0, 1.0 - p),
            (0, 1, 1, p),
            (1, 0, 0, p),
            (1, 1, 1, 1.0 - p),
        ],
    )
}

/// Golden-mean generalization with independently chosen Markov order `r` and
/// cryptic order `k`. State 0 self-loops on 1 with probability `p` or starts
/// a deterministic run: `r − 1` further steps on 0, then `k` steps on 1
/// closing the cycle.
pub fn rk_golden_mean(r: usize, k: usize, p: f64) -> Result<EpsilonMachine> {
    if r < 1 {
        return Err(Error::OutOfRange {
            param: "R",
            value: r as f64,
            expected: "≥ 1",
        });
    }
    if k < 1 || k > r {
        return Err(Error::OutOfRange {
            param: "k",
            value: k as f64,
            expected: "1 ≤ k ≤ R",
        });
    }
    check_unit_open("p", p)?;
    let n = r + k;
    let mut edges = vec![(0, 1, 0, p), (0, 0, 1, 1.0 - p)];
    for i in 1..r {
        edges.push((i, 0, i + 1, 1.0));
    }
    for i in r..n {
        edges.push((i, 1, (i + 1) % n, 1.0));
    }
    EpsilonMachine::from_parts("rk-golden-mean", Alphabet::binary(), letter_labels(n), &edges)
}

/// Three-state process with infinite Markov and cryptic orders: state A
/// self-loops on 0 with probability `p` or emits 1 into B; B always emits 1
/// into C; C flips a fair coin and returns to A either way.
pub fn nemo(p: f64) -> Result<EpsilonMachine> {
    check_unit_open("p", p)?;
    EpsilonMachine::from_parts(
        "nemo",
        Alphabet::binary(),
        letter_labels(3),
        &[
            (0, 0, 0, p),
            (0, 1, 1, 1.0 - p),
            (1, 1, 2, 1.0),
            (2, 0, 0, 0.5),
            (2, 1, 0, 0.5),
        ],
    )
}

const RANDOM_MACHINE_MAX_ATTEMPTS: usize = 10_000;

/// Seeded random unifilar machine.
///
/// Topology: each `(state, symbol)` slot is drawn uniformly from
/// {absent} ∪ states (so a slot is absent with probability `1/(n+1)`),
/// resampled until every state has at least one outgoing symbol and the
/// digraph is strongly connected. Probabilities: each state's outgoing
/// distribution is a flat-simplex (Dirichlet(1,…,1)) draw via normalized
/// exponentials, redrawn while any component is below 1e-6. The result is
/// minimized before it is returned, so the machine may have fewer than
/// `n_states` states.
pub fn random_machine(n_states: usize, alphabet_size: usize, seed: u64) -> Result<EpsilonMachine> {
    if n_states < 1 {
        return Err(Error::OutOfRange {
            param: "n_states",
            value: n_states as f64,
            expected: "≥ 1",
        });
    }
    if alphabet_size < 2 {
        return Err(Error::OutOfRange {
            param: "alphabet_size",
            value: alphabet_size as f64,
            expected: "≥ 2",
        });
    }
    let alphabet = Alphabet::new((0..alphabet_size).map(|i| i.to_string()).collect())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_MACHINE_MAX_ATTEMPTS {
        let mut targets: Vec<Vec<Option<usize>>> = vec![vec![None; alphabet_size]; n_states];
        for row in targets.iter_mut() {
            for slot in row.iter_mut() {
                let draw = rng.random_range(0..=n_states);
                *slot = if draw == n_states { None } else { Some(draw) };
            }
        }
        if targets.iter().any(|row| row.iter().all(Option::is_none)) {
            continue;
        }
        if !targets_strongly_connected(&targets) {
            continue;
        }
        let mut edges = Vec::new();
        for (s, row) in targets.iter().enumerate() {
            let out: Vec<usize> = (0..alphabet_size).filter(|&x| row[x].is_some()).collect();
            let probs = flat_simplex(&mut rng, out.len());
            for (x, p) in out.iter().zip(probs) {
                edges.push((s, *x, row[*x].unwrap(), p));
            }
        }
        let name = format!("random-{seed}");
        let machine = EpsilonMachine::from_parts(name.clone(), alphabet.clone(), letter_labels(n_states), &edges)?;
        return Ok(machine.minimize().with_name(name));
    }
    Err(Error::RandomMachineExhausted {
        attempts: RANDOM_MACHINE_MAX_ATTEMPTS,
    })
}

fn flat_simplex<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let draws: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let sum: f64 = draws.iter().sum();
        if sum <= 0.0 {
            continue;
        }
        let probs: Vec<f64> = draws.iter().map(|d| d / sum).collect();
        if probs.iter().all(|&p| p > 1e-6) {
            return probs;
        }
    }
}

fn targets_strongly_connected(targets: &[Vec<Option<usize>>]) -> bool {
    let n = targets.len();
    let mut fwd: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut bwd: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (s, row) in targets.iter().enumerate() {
        for t in row.iter().flatten() {
            fwd[s].push(*t);
            bwd[*t].push(s);
        }
    }
    let reach = |adj: &Vec<Vec<usize>>| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    };
    reach(&fwd) && reach(&bwd)
}
