//! Pairwise-merger machine: signal-state overlaps without word enumeration.
//!
//! The PMM's states are unordered pairs of distinct machine states. A pair
//! advances on a symbol both components allow; if the components land on the
//! same state the pair merges (this can only happen at a noncounifilar
//! state). Every edge carries the weight `√(p_i(x)·p_j(x))`, so overlap mass
//! accumulated through merger edges reproduces `⟨η_i|η_j⟩` exactly while the
//! computation stays `O(|pairs|)`-dimensional at every horizon.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::machine::EpsilonMachine;
use crate::measures::Order;

/// Entries with absolute value at or below this are treated as structural
/// zeros in overlap ratios.
const ZERO_TOL: f64 = 1e-15;

/// PSD verdicts accept a smallest eigenvalue down to this.
const PSD_TOL: f64 = -1e-10;

/// An outgoing PMM edge for one symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PmmEdge {
    /// Both components advance to distinct states.
    Pair { target: usize, weight: f64 },
    /// Both components advance to the same (noncounifilar) state.
    Merger { state: usize, weight: f64 },
}

/// Horizon selector for Gram matrices and compression curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    Finite(usize),
    Asymptotic,
}

/// Symmetric matrix of pairwise signal-state overlaps at some horizon.
/// The diagonal is exactly 1; off-diagonal entries lie in [0, 1] and are
/// nondecreasing in the horizon.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    horizon: Horizon,
    entries: DMatrix<f64>,
}

impl GramMatrix {
    /// Wraps an externally supplied overlap matrix (symmetric, unit
    /// diagonal) for use with [`jozsa_ratio_check`].
    pub fn from_matrix(horizon: Horizon, entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if n != entries.ncols() {
            return Err(Error::DimensionMismatch(n, entries.ncols()));
        }
        let mut asym = 0.0f64;
        for i in 0..n {
            if (entries[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Error::TraceNotOne(entries[(i, i)]));
            }
            for j in (i + 1)..n {
                asym = asym.max((entries[(i, j)] - entries[(j, i)]).abs());
            }
        }
        if asym > 1e-12 {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(Self { horizon, entries })
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }
}

/// Result of the element-wise overlap-ratio positivity check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct JozsaCheck {
    pub positive: bool,
    pub min_eigenvalue: f64,
}

/// How to treat a ratio with zero denominator and nonzero numerator.
///
/// `UseNumerator` substitutes the raw later overlap (the convention under
/// which the identity Gram matrix at horizon 0 can be compared against any
/// later horizon); `Reject` returns an error instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroRatioRule {
    #[default]
    UseNumerator,
    Reject,
}

/// Pairwise-merger machine with its pair-to-pair weight matrix `B` and
/// per-pair one-step merger mass `c`. Immutable after construction.
#[derive(Debug, Clone)]
pub struct PairMergerMachine {
    n_states: usize,
    n_symbols: usize,
    /// Unordered pairs `(i, j)`, `i < j`, in lexicographic order.
    pairs: Vec<(usize, usize)>,
    /// `edges[pair][symbol]`.
    edges: Vec<Vec<Option<PmmEdge>>>,
    weights: DMatrix<f64>,
    merger_mass: DVector<f64>,
}

impl PairMergerMachine {
    /// Builds the pair graph of `machine`.
    pub fn build(machine: &EpsilonMachine) -> Self {
        let n = machine.state_count();
        let a = machine.alphabet().len();
        let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
        let mut lookup = HashMap::new();
        for i in 0..n {
            for j in (i + 1)..n {
                lookup.insert((i, j), pairs.len());
                pairs.push((i, j));
            }
        }
        let np = pairs.len();
        let mut edges = vec![vec![None; a]; np];
        let mut weights = DMatrix::zeros(np, np);
        let mut merger_mass = DVector::zeros(np);
        for (q, &(i, j)) in pairs.iter().enumerate() {
            for (x, slot) in edges[q].iter_mut().enumerate() {
                let (Some((ti, pi)), Some((tj, pj))) =
                    (machine.transition(i, x), machine.transition(j, x))
                else {
                    continue;
                };
                let w = (pi * pj).sqrt();
                if ti == tj {
                    *slot = Some(PmmEdge::Merger { state: ti, weight: w });
                    merger_mass[q] += w;
                } else {
                    let key = (ti.min(tj), ti.max(tj));
                    let target = lookup[&key];
                    *slot = Some(PmmEdge::Pair { target, weight: w });
                    weights[(q, target)] += w;
                }
            }
        }
        Self {
            n_states: n,
            n_symbols: a,
            pairs,
            edges,
            weights,
            merger_mass,
        }
    }

    pub fn state_count(&self) -> usize {
        self.n_states
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn pair_index(&self, i: usize, j: usize) -> Option<usize> {
        if i == j || i >= self.n_states || j >= self.n_states {
            return None;
        }
        let key = (i.min(j), i.max(j));
        self.pairs.iter().position(|&p| p == key)
    }

    /// Edge leaving `pair` on `symbol`, if both components allow it.
    pub fn edge(&self, pair: usize, symbol: usize) -> Option<PmmEdge> {
        self.edges[pair][symbol]
    }

    /// Pair-to-pair weight matrix `B`.
    pub fn pair_weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    /// One-step merger mass `c` per pair.
    pub fn merger_mass(&self) -> &DVector<f64> {
        &self.merger_mass
    }

    /// Spectral radius of the pair-to-pair weight matrix; strictly below 1
    /// for machines without predictively identical state pairs.
    pub fn spectral_radius(&self) -> f64 {
        if self.pairs.is_empty() {
            return 0.0;
        }
        self.weights
            .clone()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Cryptic order: the number of symbols in the longest pair-state path
    /// that ends with a merger edge, or infinite when a pair on a cycle can
    /// reach a merger. All PMM edges carry positive weight, so for
    /// irreducible machines (π > 0 everywhere) the probability-weighted and
    /// purely topological readings coincide.
    pub fn cryptic_order(&self) -> Order {
        let np = self.pairs.len();
        let direct: Vec<bool> = (0..np)
            .map(|q| {
                self.edges[q]
                    .iter()
                    .any(|e| matches!(e, Some(PmmEdge::Merger { .. })))
            })
            .collect();
        if !direct.iter().any(|&d| d) {
            return Order::Finite(0);
        }
        // Pairs that can reach a merger edge.
        let mut reach = direct.clone();
        loop {
            let newly: Vec<usize> = self
                .edges
                .iter()
                .enumerate()
                .filter(|(q, edges)| {
                    !reach[*q]
                        && edges.iter().any(|e| {
                            matches!(e, Some(PmmEdge::Pair { target, .. }) if reach[*target])
                        })
                })
                .map(|(q, _)| q)
                .collect();
            if newly.is_empty() {
                break;
            }
            for q in newly {
                reach[q] = true;
            }
        }
        // A cycle within the reaching set feeds mergers forever.
        let adj: Vec<Vec<usize>> = (0..np)
            .map(|q| {
                self.edges[q]
                    .iter()
                    .filter_map(|e| match e {
                        Some(PmmEdge::Pair { target, .. }) if reach[*target] => Some(*target),
                        _ => None,
                    })
                    .collect()
            })
            .collect();
        if has_cycle(&adj, &reach) {
            return Order::Infinite;
        }
        let mut memo = vec![None; np];
        let mut k = 0usize;
        for (q, reachable) in reach.iter().enumerate() {
            if *reachable {
                k = k.max(longest_to_merger(q, &adj, &direct, &mut memo));
            }
        }
        Order::Finite(k)
    }

    /// Gram matrix at finite horizon `l`: cumulative first-merger mass per
    /// pair after `l` symbols, computed by `l` matrix-vector products over
    /// the pair space.
    pub fn gram_matrix(&self, l: usize) -> GramMatrix {
        let mut v = DVector::zeros(self.pairs.len());
        for _ in 0..l {
            v = &self.merger_mass + &self.weights * v;
        }
        self.gram_from_vector(&v, Horizon::Finite(l))
    }

    /// Asymptotic Gram matrix: solves `x = Bx + c`. Errors when the pair
    /// system is singular (spectral radius ≥ 1), which signals predictively
    /// identical states.
    pub fn gram_matrix_asymptotic(&self) -> Result<GramMatrix> {
        Ok(self.asymptotic_parts()?.0)
    }

    /// Asymptotic Gram matrix together with a certified entry-wise error
    /// bound on the linear solve (residual amplified through the Neumann
    /// series).
    pub fn gram_matrix_asymptotic_with_bound(&self) -> Result<(GramMatrix, f64)> {
        self.asymptotic_parts()
    }

    fn asymptotic_parts(&self) -> Result<(GramMatrix, f64)> {
        let np = self.pairs.len();
        if np == 0 {
            return Ok((
                self.gram_from_vector(&DVector::zeros(0), Horizon::Asymptotic),
                0.0,
            ));
        }
        let rho = self.spectral_radius();
        if rho >= 1.0 - 1e-9 {
            return Err(Error::SingularPairSystem {
                spectral_radius: rho,
            });
        }
        let system = DMatrix::identity(np, np) - &self.weights;
        let lu = system.clone().lu();
        let x = lu
            .solve(&self.merger_mass)
            .ok_or(Error::SingularPairSystem { spectral_radius: rho })?;
        // (I − B)⁻¹ is entrywise nonnegative, so |x − x̂| ≤ δ · (I − B)⁻¹·1.
        let residual = (&self.merger_mass + &self.weights * &x - &x)
            .iter()
            .fold(0.0f64, |m, r| m.max(r.abs()));
        let ones = DVector::from_element(np, 1.0);
        let amplification = lu
            .solve(&ones)
            .map(|z| z.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .unwrap_or(f64::INFINITY);
        Ok((
            self.gram_from_vector(&x, Horizon::Asymptotic),
            residual * amplification,
        ))
    }

    /// Remaining overlap mass beyond horizon `l`, as the max-norm of the
    /// exact tail `G(∞) − G(l) = Bˡ·x`.
    pub fn gram_tail_bound(&self, l: usize) -> Result<f64> {
        if self.pairs.is_empty() {
            return Ok(0.0);
        }
        let rho = self.spectral_radius();
        if rho >= 1.0 - 1e-9 {
            return Err(Error::SingularPairSystem {
                spectral_radius: rho,
            });
        }
        let system = DMatrix::identity(self.pairs.len(), self.pairs.len()) - &self.weights;
        let mut x = system
            .lu()
            .solve(&self.merger_mass)
            .ok_or(Error::SingularPairSystem { spectral_radius: rho })?;
        for _ in 0..l {
            x = &self.weights * x;
        }
        Ok(x.iter().fold(0.0f64, |m, v| m.max(v.abs())))
    }

    /// Per-horizon overlap increments for one pair: entry `l` is the mass of
    /// paths from the pair whose first merger happens at exactly step `l`.
    /// Cumulative sums telescope to the Gram entries.
    pub fn overlap_increments(&self, pair: (usize, usize), max_l: usize) -> Result<Vec<f64>> {
        let q = self
            .pair_index(pair.0, pair.1)
            .ok_or(Error::InvalidPair(pair.0, pair.1))?;
        let mut out = Vec::with_capacity(max_l + 1);
        out.push(0.0);
        let mut w = self.merger_mass.clone();
        for _ in 1..=max_l {
            out.push(w[q]);
            w = &self.weights * w;
        }
        Ok(out)
    }

    fn gram_from_vector(&self, v: &DVector<f64>, horizon: Horizon) -> GramMatrix {
        let mut entries = DMatrix::identity(self.n_states, self.n_states);
        for (q, &(i, j)) in self.pairs.iter().enumerate() {
            entries[(i, j)] = v[q];
            entries[(j, i)] = v[q];
        }
        GramMatrix { horizon, entries }
    }

    pub fn symbol_count(&self) -> usize {
        self.n_symbols
    }

    /// Edge-list export of the pair graph.
    pub fn to_document(&self, machine: &EpsilonMachine) -> PmmDocument {
        let pair_label = |q: usize| {
            let (i, j) = self.pairs[q];
            [
                machine.state_label(i).to_string(),
                machine.state_label(j).to_string(),
            ]
        };
        let mut edges = Vec::new();
        for q in 0..self.pairs.len() {
            for x in 0..self.n_symbols {
                match self.edges[q][x] {
                    Some(PmmEdge::Pair { target, weight }) => edges.push(PmmEdgeDocument {
                        from: pair_label(q),
                        symbol: machine.alphabet().symbol(x).to_string(),
                        to_pair: Some(pair_label(target)),
                        to_state: None,
                        weight,
                        merger: false,
                    }),
                    Some(PmmEdge::Merger { state, weight }) => edges.push(PmmEdgeDocument {
                        from: pair_label(q),
                        symbol: machine.alphabet().symbol(x).to_string(),
                        to_pair: None,
                        to_state: Some(machine.state_label(state).to_string()),
                        weight,
                        merger: true,
                    }),
                    None => {}
                }
            }
        }
        PmmDocument {
            machine: machine.name().to_string(),
            pair_states: (0..self.pairs.len()).map(pair_label).collect(),
            edges,
        }
    }
}

/// Edge-list interchange form of a PMM.
#[derive(Debug, Clone, Serialize)]
pub struct PmmDocument {
    pub machine: String,
    pub pair_states: Vec<[String; 2]>,
    pub edges: Vec<PmmEdgeDocument>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PmmEdgeDocument {
    pub from: [String; 2],
    pub symbol: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub to_pair: Option<[String; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub to_state: Option<String>,
    pub weight: f64,
    pub merger: bool,
}

fn has_cycle(adj: &[Vec<usize>], keep: &[bool]) -> bool {
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

fn longest_to_merger(
    q: usize,
    adj: &[Vec<usize>],
    direct: &[bool],
    memo: &mut Vec<Option<usize>>,
) -> usize {
    if let Some(d) = memo[q] {
        return d;
    }
    let mut best = if direct[q] { 1 } else { 0 };
    for &t in &adj[q] {
        let via = longest_to_merger(t, adj, direct, memo);
        if via > 0 {
            best = best.max(1 + via);
        }
    }
    memo[q] = Some(best);
    best
}

/// Element-wise ratio-matrix criterion for entropy monotonicity between two
/// Gram matrices of the same ensemble: forms `R = G_b ⊘ G_a` (with `0/0 ≡ 1`
/// and zero denominators handled per `rule`) and reports whether `R` is
/// positive semidefinite via its smallest eigenvalue.
pub fn jozsa_ratio_check(
    g_a: &GramMatrix,
    g_b: &GramMatrix,
    rule: ZeroRatioRule,
) -> Result<JozsaCheck> {
    let n = g_a.dim();
    if n != g_b.dim() {
        return Err(Error::DimensionMismatch(n, g_b.dim()));
    }
    let mut r = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let a = g_a.entry(i, j);
            let b = g_b.entry(i, j);
            r[(i, j)] = if a.abs() > ZERO_TOL {
                b / a
            } else if b.abs() <= ZERO_TOL {
                1.0
            } else {
                match rule {
                    ZeroRatioRule::UseNumerator => b,
                    ZeroRatioRule::Reject => return Err(Error::UndefinedRatio { row: i, col: j }),
                }
            };
        }
    }
    let eigen = SymmetricEigen::new(r);
    let min_eigenvalue = eigen.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(JozsaCheck {
        positive: min_eigenvalue >= PSD_TOL,
        min_eigenvalue,
    })
}
