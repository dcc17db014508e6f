//! Classical information measures of a unifilar machine: entropy rate,
//! statistical complexity, block entropies, excess entropy, and Markov order.
//!
//! All entropies are in bits (log base 2) and `0·log 0 ≡ 0` throughout.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::machine::EpsilonMachine;
use crate::pmm::PairMergerMachine;

/// Default horizon for excess-entropy truncation on a binary alphabet;
/// scaled down as `⌊28 / log2|A|⌋` for larger alphabets.
pub fn default_excess_max_l(alphabet_size: usize) -> usize {
    if alphabet_size < 2 {
        return 14;
    }
    (28.0 / (alphabet_size as f64).log2()).floor() as usize / 2
}

/// Block-entropy horizon cap: 16 for a binary alphabet, scaled as
/// `⌊16 / log2|A|⌋` otherwise.
pub fn block_entropy_cap(alphabet_size: usize) -> usize {
    if alphabet_size < 2 {
        return 64;
    }
    (16.0 / (alphabet_size as f64).log2()).floor() as usize
}

/// Node budget for the observer-subset graph of [`markov_order`].
pub const SUBSET_NODE_BUDGET: usize = 1_000_000;

/// Shannon entropy in bits of a (sub)distribution; entries ≤ 0 contribute 0.
pub fn shannon_entropy_bits<I: IntoIterator<Item = f64>>(probs: I) -> f64 {
    let mut h = 0.0;
    for p in probs {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h
}

/// A Markov or cryptic order: finite, provably infinite, or undetermined
/// within the configured budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Order {
    Finite(usize),
    Infinite,
    Unknown { explored: usize },
}

impl Order {
    pub fn as_finite(self) -> Option<usize> {
        match self {
            Order::Finite(k) => Some(k),
            _ => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Order::Infinite)
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(k) => write!(f, "{k}"),
            Order::Infinite => write!(f, "inf"),
            Order::Unknown { .. } => write!(f, "unknown"),
        }
    }
}

/// Convergence status of the excess-entropy estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum EStatus {
    /// Exact at a finite Markov order, or increments fell below tolerance.
    Converged { at: usize },
    /// Horizon exhausted before convergence; the value is a lower bound.
    Truncated { max_l: usize, last_increment: f64 },
}

impl fmt::Display for EStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EStatus::Converged { at } => write!(f, "converged@{at}"),
            EStatus::Truncated {
                max_l,
                last_increment,
            } => write!(f, "truncated@{max_l}(+{last_increment:.3e})"),
        }
    }
}

/// Statistical complexity `C_μ = H(π)` in bits.
pub fn statistical_complexity(m: &EpsilonMachine) -> f64 {
    shannon_entropy_bits(m.stationary_distribution().iter().copied())
}

/// Entropy rate `h_μ`: the π-averaged branching uncertainty of the states.
pub fn entropy_rate(m: &EpsilonMachine) -> f64 {
    let pi = m.stationary_distribution();
    (0..m.state_count())
        .map(|i| pi[i] * shannon_entropy_bits(m.emission_probs(i)))
        .sum()
}

/// Block entropy `H(L)` of length-`l` words drawn from the stationary
/// process. Enumeration prunes zero-probability prefixes; symbols are
/// visited in index order so the reduction is deterministic.
pub fn block_entropy(m: &EpsilonMachine, l: usize) -> Result<f64> {
    let cap = block_entropy_cap(m.alphabet().len());
    if l > cap {
        return Err(Error::CapExceeded {
            what: "block entropy horizon",
            requested: l,
            limit: cap,
        });
    }
    let mut acc = 0.0;
    let mass: Vec<f64> = m.stationary_distribution().to_vec();
    block_entropy_rec(m, l, &mass, &mut acc);
    Ok(acc)
}

fn block_entropy_rec(m: &EpsilonMachine, depth: usize, mass: &[f64], acc: &mut f64) {
    if depth == 0 {
        let p: f64 = mass.iter().sum();
        if p > 0.0 {
            *acc -= p * p.log2();
        }
        return;
    }
    for x in 0..m.alphabet().len() {
        let mut next = vec![0.0f64; m.state_count()];
        let mut total = 0.0;
        for (s, &w) in mass.iter().enumerate() {
            if w > 0.0 {
                if let Some((t, p)) = m.transition(s, x) {
                    next[t] += w * p;
                    total += w * p;
                }
            }
        }
        if total > 1e-300 {
            block_entropy_rec(m, depth - 1, &next, acc);
        }
    }
}

/// Excess entropy `E = lim (H(L) − L·h_μ)`.
///
/// Exact (`Converged`) when the Markov order `R` is finite and within
/// `max_l`, since `E = H(R) − R·h_μ` there. Otherwise the nondecreasing
/// sequence `E(L)` is followed until its increment drops below `tol`
/// (`Converged`) or the horizon runs out (`Truncated`, a certified lower
/// bound).
pub fn excess_entropy(m: &EpsilonMachine, tol: f64, max_l: usize) -> Result<(f64, EStatus)> {
    let cap = block_entropy_cap(m.alphabet().len());
    if max_l > cap {
        return Err(Error::CapExceeded {
            what: "excess entropy horizon",
            requested: max_l,
            limit: cap,
        });
    }
    let h = entropy_rate(m);
    if let Order::Finite(r) = markov_order(m, SUBSET_NODE_BUDGET) {
        if r <= max_l {
            let e = block_entropy(m, r)? - r as f64 * h;
            return Ok((e.max(0.0), EStatus::Converged { at: r }));
        }
    }
    let mut prev_e = 0.0f64; // E(0) = H(0) = 0
    let mut last_increment = f64::INFINITY;
    for l in 1..=max_l {
        let e = block_entropy(m, l)? - l as f64 * h;
        last_increment = e - prev_e;
        prev_e = e;
        if last_increment.abs() < tol {
            return Ok((e.max(0.0), EStatus::Converged { at: l }));
        }
    }
    Ok((
        prev_e.max(0.0),
        EStatus::Truncated {
            max_l,
            last_increment,
        },
    ))
}

/// Markov order via the observer-subset construction.
///
/// Starting from the full state set, each symbol maps a subset to the set of
/// successors of its members that allow the symbol. The order is the
/// smallest depth at which every reachable subset is a singleton. A
/// non-singleton subset on a reachable cycle makes the order infinite
/// (exactly — no cap involved); `Unknown` is returned only if the subset
/// graph outgrows `node_budget`.
///
/// The order is topological (independent of probabilities). It is only
/// meaningful for the minimal presentation; callers should check
/// minimality separately.
pub fn markov_order(m: &EpsilonMachine, node_budget: usize) -> Order {
    let n = m.state_count();
    if n == 1 {
        return Order::Finite(0);
    }
    if n > 128 {
        return Order::Unknown { explored: 0 };
    }
    let full: u128 = if n == 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    };
    let mut ids: HashMap<u128, usize> = HashMap::new();
    let mut masks: Vec<u128> = Vec::new();
    let mut adj: Vec<Vec<usize>> = Vec::new();
    ids.insert(full, 0);
    masks.push(full);
    adj.push(Vec::new());
    let mut frontier = vec![0usize];
    while let Some(u) = frontier.pop() {
        let mask = masks[u];
        for x in 0..m.alphabet().len() {
            let mut next: u128 = 0;
            let mut bits = mask;
            while bits != 0 {
                let s = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                if let Some((t, _)) = m.transition(s, x) {
                    next |= 1u128 << t;
                }
            }
            if next == 0 {
                continue;
            }
            let id = match ids.get(&next) {
                Some(&id) => id,
                None => {
                    let id = masks.len();
                    if id >= node_budget {
                        return Order::Unknown { explored: id };
                    }
                    ids.insert(next, id);
                    masks.push(next);
                    adj.push(Vec::new());
                    frontier.push(id);
                    id
                }
            };
            adj[u].push(id);
        }
    }
    // Restrict to non-singleton nodes; their subgraph carries all residual
    // state uncertainty (subsets only shrink along edges).
    let bad: Vec<bool> = masks.iter().map(|m| m.count_ones() > 1).collect();
    if has_cycle_within(&adj, &bad) {
        return Order::Infinite;
    }
    let mut memo: Vec<Option<usize>> = vec![None; masks.len()];
    let depth = longest_bad_path(0, &adj, &bad, &mut memo);
    Order::Finite(depth + 1)
}

fn has_cycle_within(adj: &[Vec<usize>], keep: &[bool]) -> bool {
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut color = vec![0u8; adj.len()];
    for start in 0..adj.len() {
        if !keep[start] || color[start] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        color[start] = 1;
        while let Some(&mut (u, ref mut i)) = stack.last_mut() {
            if *i < adj[u].len() {
                let v = adj[u][*i];
                *i += 1;
                if !keep[v] {
                    continue;
                }
                match color[v] {
                    0 => {
                        color[v] = 1;
                        stack.push((v, 0));
                    }
                    1 => return true,
                    _ => {}
                }
            } else {
                color[u] = 2;
                stack.pop();
            }
        }
    }
    false
}

fn longest_bad_path(
    u: usize,
    adj: &[Vec<usize>],
    bad: &[bool],
    memo: &mut Vec<Option<usize>>,
) -> usize {
    if let Some(d) = memo[u] {
        return d;
    }
    let mut best = 0;
    for &v in &adj[u] {
        if bad[v] {
            best = best.max(1 + longest_bad_path(v, adj, bad, memo));
        }
    }
    memo[u] = Some(best);
    best
}

/// Bundle of the classical measures plus the cryptic order, with
/// convergence metadata.
#[derive(Debug, Clone, Serialize)]
pub struct MeasureReport {
    pub name: String,
    pub h_mu: f64,
    pub c_mu: f64,
    pub block_entropies: Vec<(usize, f64)>,
    pub excess_entropy: f64,
    pub e_status: EStatus,
    pub markov_order: Order,
    pub cryptic_order: Order,
    pub minimal: bool,
}

/// Options for [`measure_report`].
#[derive(Debug, Clone, Copy)]
pub struct MeasureOptions {
    pub e_tol: f64,
    /// Excess-entropy horizon; defaults per alphabet size when `None`.
    pub max_l: Option<usize>,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        Self {
            e_tol: 1e-9,
            max_l: None,
        }
    }
}

/// Computes the full classical report for a machine.
pub fn measure_report(m: &EpsilonMachine, opts: MeasureOptions) -> Result<MeasureReport> {
    let max_l = opts
        .max_l
        .unwrap_or_else(|| default_excess_max_l(m.alphabet().len()));
    let h_mu = entropy_rate(m);
    let c_mu = statistical_complexity(m);
    let mut block_entropies = Vec::with_capacity(max_l + 1);
    for l in 0..=max_l {
        block_entropies.push((l, block_entropy(m, l)?));
    }
    let (e, e_status) = excess_entropy(m, opts.e_tol, max_l)?;
    let markov = markov_order(m, SUBSET_NODE_BUDGET);
    let cryptic = PairMergerMachine::build(m).cryptic_order();
    Ok(MeasureReport {
        name: m.name().to_string(),
        h_mu,
        c_mu,
        block_entropies,
        excess_entropy: e,
        e_status,
        markov_order: markov,
        cryptic_order: cryptic,
        minimal: m.is_minimal(),
    })
}

impl MeasureReport {
    /// Header of the CSV row form.
    pub const CSV_HEADER: &'static str = "name,param,h_mu,C_mu,E,E_status,R,k";

    /// Flat CSV row; `param` is the family parameter when applicable.
    pub fn csv_row(&self, param: Option<f64>) -> String {
        let param = param.map(|p| p.to_string()).unwrap_or_default();
        let status = match self.e_status {
            EStatus::Converged { .. } => "converged".to_string(),
            EStatus::Truncated { .. } => "truncated".to_string(),
        };
        format!(
            "{},{},{},{},{},{},{},{}",
            self.name,
            param,
            self.h_mu,
            self.c_mu,
            self.excess_entropy,
            status,
            self.markov_order,
            self.cryptic_order
        )
    }

    /// Flat `key=value` lines.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("name={}\n", self.name));
        out.push_str(&format!("minimal={}\n", self.minimal));
        out.push_str(&format!("h_mu={}\n", self.h_mu));
        out.push_str(&format!("C_mu={}\n", self.c_mu));
        out.push_str(&format!("E={}\n", self.excess_entropy));
        out.push_str(&format!("E_status={}\n", self.e_status));
        out.push_str(&format!("R={}\n", self.markov_order));
        out.push_str(&format!("k={}\n", self.cryptic_order));
        out
    }
}
