//! Finite unifilar hidden Markov machines over a discrete alphabet.
//!
//! An [`EpsilonMachine`] is a strongly connected set of states, each with a
//! probability distribution over outgoing symbols, where a given symbol leads
//! from a given state to at most one successor (unifilarity). The machine is
//! immutable after construction and caches its stationary distribution, so it
//! can be shared freely across threads.

use std::collections::{BTreeSet, HashMap};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row sums must match 1 within this tolerance when a machine is built;
/// rows are renormalized exactly afterwards.
pub const ROW_SUM_TOL: f64 = 1e-9;
/// Edges below this probability are dropped before validation.
pub const EDGE_DROP_TOL: f64 = 1e-12;
/// Residual tolerance for the stationary distribution, `‖πT − π‖∞`.
pub const STATIONARY_RESIDUAL_TOL: f64 = 1e-12;
/// Per-probability tolerance used by predictive-equivalence refinement.
pub const DISTRIBUTION_TOL: f64 = 1e-9;

/// A word is a sequence of symbol indices into the machine's alphabet.
pub type Word = Vec<usize>;

/// Ordered set of distinct symbol labels. Symbol order is fixed at
/// construction and drives all word enumeration and matrix indexing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new(symbols: Vec<String>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        let mut seen = BTreeSet::new();
        for s in &symbols {
            if !seen.insert(s.clone()) {
                return Err(Error::DuplicateSymbol(s.clone()));
            }
        }
        Ok(Self { symbols })
    }

    /// Convenience constructor for the binary alphabet {"0", "1"}.
    pub fn binary() -> Self {
        Self {
            symbols: vec!["0".into(), "1".into()],
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbol(&self, index: usize) -> &str {
        &self.symbols[index]
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == label)
    }
}

/// One transition in the machine-document interchange format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionDocument {
    pub from: String,
    pub symbol: String,
    pub to: String,
    pub prob: f64,
}

/// Machine-document interchange format (UTF-8 JSON).
///
/// Duplicate `(from, symbol)` pairs are a schema error; probabilities must
/// lie in (0, 1] and each state's outgoing probabilities must sum to 1
/// within [`ROW_SUM_TOL`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MachineDocument {
    pub name: String,
    pub alphabet: Vec<String>,
    pub states: Vec<String>,
    pub transitions: Vec<TransitionDocument>,
}

/// A validated, minimized-or-not unifilar machine with cached stationary
/// distribution.
#[derive(Debug, Clone)]
pub struct EpsilonMachine {
    name: String,
    alphabet: Alphabet,
    states: Vec<String>,
    /// `transitions[state][symbol] = Some((successor, probability))`.
    transitions: Vec<Vec<Option<(usize, f64)>>>,
    stationary: Vec<f64>,
}

/// One rule violation found by [`EpsilonMachine::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub rule: &'static str,
    pub context: String,
    pub measured: f64,
}

/// Findings of [`EpsilonMachine::validate`]. `ok` covers the hard structural
/// rules; non-minimality is reported via `minimal` but is not a violation.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
    pub minimal: bool,
    pub noncounifilar_states: BTreeSet<String>,
}

impl EpsilonMachine {
    /// Builds a machine from index-based parts: `edges` holds
    /// `(from, symbol, to, prob)` tuples. Edges below [`EDGE_DROP_TOL`] are
    /// dropped, rows are checked against [`ROW_SUM_TOL`] and renormalized
    /// exactly, the digraph must be strongly connected, and the stationary
    /// distribution is solved and cached.
    pub fn from_parts(
        name: impl Into<String>,
        alphabet: Alphabet,
        states: Vec<String>,
        edges: &[(usize, usize, usize, f64)],
    ) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::EmptyStates);
        }
        let mut seen = BTreeSet::new();
        for s in &states {
            if !seen.insert(s.clone()) {
                return Err(Error::DuplicateState(s.clone()));
            }
        }
        let n = states.len();
        let a = alphabet.len();
        let mut transitions: Vec<Vec<Option<(usize, f64)>>> = vec![vec![None; a]; n];
        for &(from, symbol, to, prob) in edges {
            assert!(from < n && to < n && symbol < a, "edge index out of range");
            if (0.0..EDGE_DROP_TOL).contains(&prob) {
                continue;
            }
            if prob.is_nan() || prob <= 0.0 || prob > 1.0 {
                return Err(Error::ProbabilityRange {
                    from: states[from].clone(),
                    symbol: alphabet.symbol(symbol).to_string(),
                    prob,
                });
            }
            if transitions[from][symbol].is_some() {
                return Err(Error::UnifilarityViolation {
                    state: states[from].clone(),
                    symbol: alphabet.symbol(symbol).to_string(),
                });
            }
            transitions[from][symbol] = Some((to, prob));
        }
        // Stochasticity check, then exact renormalization.
        for (i, row) in transitions.iter_mut().enumerate() {
            let sum: f64 = row.iter().flatten().map(|&(_, p)| p).sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::Stochasticity {
                    state: states[i].clone(),
                    sum,
                });
            }
            for slot in row.iter_mut().flatten() {
                slot.1 /= sum;
            }
        }
        if !strongly_connected(&transitions) {
            return Err(Error::Reducible);
        }
        let stationary = solve_stationary(&transitions)?;
        Ok(Self {
            name: name.into(),
            alphabet,
            states,
            transitions,
            stationary,
        })
    }

    /// Builds a machine from an interchange document.
    pub fn from_document(doc: &MachineDocument) -> Result<Self> {
        let alphabet = Alphabet::new(doc.alphabet.clone())?;
        let state_index: HashMap<&str, usize> = doc
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let mut edges = Vec::with_capacity(doc.transitions.len());
        for t in &doc.transitions {
            let from = *state_index
                .get(t.from.as_str())
                .ok_or_else(|| Error::UnknownState(t.from.clone()))?;
            let to = *state_index
                .get(t.to.as_str())
                .ok_or_else(|| Error::UnknownState(t.to.clone()))?;
            let symbol = alphabet
                .index_of(&t.symbol)
                .ok_or_else(|| Error::UnknownSymbol(t.symbol.clone()))?;
            if t.prob.is_nan() || t.prob <= 0.0 || t.prob > 1.0 {
                return Err(Error::ProbabilityRange {
                    from: t.from.clone(),
                    symbol: t.symbol.clone(),
                    prob: t.prob,
                });
            }
            edges.push((from, symbol, to, t.prob));
        }
        Self::from_parts(doc.name.clone(), alphabet, doc.states.clone(), &edges)
    }

    /// Serializes back to the interchange format (with renormalized
    /// probabilities).
    pub fn to_document(&self) -> MachineDocument {
        let mut transitions = Vec::new();
        for (i, row) in self.transitions.iter().enumerate() {
            for (x, slot) in row.iter().enumerate() {
                if let Some((j, p)) = slot {
                    transitions.push(TransitionDocument {
                        from: self.states[i].clone(),
                        symbol: self.alphabet.symbol(x).to_string(),
                        to: self.states[*j].clone(),
                        prob: *p,
                    });
                }
            }
        }
        MachineDocument {
            name: self.name.clone(),
            alphabet: self.alphabet.symbols().to_vec(),
            states: self.states.clone(),
            transitions,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn state_labels(&self) -> &[String] {
        &self.states
    }

    pub fn state_label(&self, index: usize) -> &str {
        &self.states[index]
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }

    /// Successor and probability for `(state, symbol)`, if the transition
    /// exists.
    pub fn transition(&self, state: usize, symbol: usize) -> Option<(usize, f64)> {
        self.transitions[state][symbol]
    }

    /// Emission distribution of `state` as a dense per-symbol vector
    /// (zero where the symbol is disallowed).
    pub fn emission_probs(&self, state: usize) -> Vec<f64> {
        self.transitions[state]
            .iter()
            .map(|slot| slot.map_or(0.0, |(_, p)| p))
            .collect()
    }

    /// Cached stationary distribution π (left fixed point of the state
    /// transition matrix, residual below [`STATIONARY_RESIDUAL_TOL`]).
    pub fn stationary_distribution(&self) -> &[f64] {
        &self.stationary
    }

    /// State-to-state transition matrix `T[i][j] = Σ_x p(x|i)·[δ(i,x)=j]`.
    pub fn transition_matrix(&self) -> DMatrix<f64> {
        let n = self.state_count();
        let mut t = DMatrix::zeros(n, n);
        for (i, row) in self.transitions.iter().enumerate() {
            for slot in row.iter().flatten() {
                t[(i, slot.0)] += slot.1;
            }
        }
        t
    }

    /// Parses a word over this machine's alphabet. When every symbol label is
    /// a single character the text is read character by character; otherwise
    /// it is split on whitespace.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let single = self.alphabet.symbols().iter().all(|s| s.chars().count() == 1);
        let mut word = Vec::new();
        if single {
            for c in text.chars() {
                if c.is_whitespace() {
                    continue;
                }
                let label = c.to_string();
                word.push(
                    self.alphabet
                        .index_of(&label)
                        .ok_or(Error::UnknownSymbol(label))?,
                );
            }
        } else {
            for tok in text.split_whitespace() {
                word.push(
                    self.alphabet
                        .index_of(tok)
                        .ok_or_else(|| Error::UnknownSymbol(tok.to_string()))?,
                );
            }
        }
        Ok(word)
    }

    /// Renders a word using the alphabet's labels.
    pub fn format_word(&self, word: &[usize]) -> String {
        let single = self.alphabet.symbols().iter().all(|s| s.chars().count() == 1);
        let sep = if single { "" } else { " " };
        word.iter()
            .map(|&x| self.alphabet.symbol(x))
            .collect::<Vec<_>>()
            .join(sep)
    }

    /// Probability of emitting `word` from `state`, and the unique successor
    /// state. Returns `(0.0, None)` as soon as a step is disallowed.
    pub fn word_probability(&self, state: usize, word: &[usize]) -> (f64, Option<usize>) {
        let mut s = state;
        let mut p = 1.0;
        for &x in word {
            match self.transitions[s][x] {
                Some((t, q)) => {
                    p *= q;
                    s = t;
                }
                None => return (0.0, None),
            }
        }
        (p, Some(s))
    }

    /// Observer subset construction: the set of states reachable by emitting
    /// `word` from any state. Empty iff the word has probability zero.
    pub fn induced_state_set(&self, word: &[usize]) -> BTreeSet<usize> {
        let mut set: BTreeSet<usize> = (0..self.state_count()).collect();
        for &x in word {
            set = set
                .iter()
                .filter_map(|&s| self.transitions[s][x].map(|(t, _)| t))
                .collect();
            if set.is_empty() {
                break;
            }
        }
        set
    }

    /// Generates `length` symbols starting from `start` (or a π-distributed
    /// state when `None`). Reproducible for a fixed seed. Returns the emitted
    /// word and the visited state path (length + 1 states).
    pub fn sample(&self, length: usize, seed: u64, start: Option<usize>) -> (Word, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s0 = start.unwrap_or_else(|| draw_categorical(&mut rng, &self.stationary));
        let mut word = Vec::with_capacity(length);
        let mut path = Vec::with_capacity(length + 1);
        path.push(s0);
        let mut s = s0;
        for _ in 0..length {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut chosen = None;
            for (x, slot) in self.transitions[s].iter().enumerate() {
                if let Some((t, p)) = slot {
                    acc += p;
                    chosen = Some((x, *t));
                    if u < acc {
                        break;
                    }
                }
            }
            let (x, t) = chosen.expect("every state has at least one outgoing symbol");
            word.push(x);
            path.push(t);
            s = t;
        }
        (word, path)
    }

    /// Given an emitted word and the state it ends in, returns for each time
    /// `t = 0..=|word|` the set of states consistent with that evidence:
    /// states reachable by the prefix that also emit the suffix into
    /// `final_state`. Errors when no state can emit the word into
    /// `final_state`.
    pub fn backward_inference(
        &self,
        word: &[usize],
        final_state: usize,
    ) -> Result<Vec<BTreeSet<usize>>> {
        let len = word.len();
        let mut back: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); len + 1];
        back[len].insert(final_state);
        for t in (0..len).rev() {
            let x = word[t];
            back[t] = (0..self.state_count())
                .filter(|&s| {
                    self.transitions[s][x]
                        .map(|(succ, _)| back[t + 1].contains(&succ))
                        .unwrap_or(false)
                })
                .collect();
        }
        if back[0].is_empty() {
            return Err(Error::InconsistentEvidence {
                state: self.states[final_state].clone(),
            });
        }
        let mut sets = Vec::with_capacity(len + 1);
        let mut fwd: BTreeSet<usize> = (0..self.state_count()).collect();
        sets.push(back[0].intersection(&fwd).copied().collect::<BTreeSet<_>>());
        for (t, &x) in word.iter().enumerate() {
            fwd = fwd
                .iter()
                .filter_map(|&s| self.transitions[s][x].map(|(succ, _)| succ))
                .collect();
            sets.push(back[t + 1].intersection(&fwd).copied().collect());
        }
        Ok(sets)
    }

    /// States with two or more distinct predecessors on the same symbol.
    pub fn noncounifilar_states(&self) -> BTreeSet<usize> {
        let n = self.state_count();
        let a = self.alphabet.len();
        let mut out = BTreeSet::new();
        for x in 0..a {
            let mut pred_count = vec![0usize; n];
            for row in &self.transitions {
                if let Some((t, _)) = row[x] {
                    pred_count[t] += 1;
                }
            }
            for (t, &c) in pred_count.iter().enumerate() {
                if c >= 2 {
                    out.insert(t);
                }
            }
        }
        out
    }

    /// Predictive-equivalence partition: initial blocks by next-symbol
    /// distribution (tolerance [`DISTRIBUTION_TOL`] per probability), refined
    /// by per-symbol successor blocks until a fixed point. Block ids are
    /// numbered by first occurrence in state order.
    pub fn predictive_partition(&self) -> Vec<usize> {
        let n = self.state_count();
        // Initial partition: sort by emission vector, group within tolerance.
        let emissions: Vec<Vec<f64>> = (0..n).map(|i| self.emission_probs(i)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            emissions[i]
                .partial_cmp(&emissions[j])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut group = vec![0usize; n];
        let mut next_group = 0usize;
        for (k, &s) in order.iter().enumerate() {
            if k > 0 {
                let prev = order[k - 1];
                let close = emissions[s]
                    .iter()
                    .zip(&emissions[prev])
                    .all(|(a, b)| (a - b).abs() <= DISTRIBUTION_TOL);
                if !close {
                    next_group += 1;
                }
            }
            group[s] = next_group;
        }
        let mut blocks = renumber_by_first_occurrence(&group);
        // Refinement: split on (block, per-symbol successor block).
        loop {
            let mut sig_map: HashMap<(usize, Vec<Option<usize>>), usize> = HashMap::new();
            let mut next: Vec<usize> = vec![0; n];
            for s in 0..n {
                let succ_blocks: Vec<Option<usize>> = self.transitions[s]
                    .iter()
                    .map(|slot| slot.map(|(t, _)| blocks[t]))
                    .collect();
                let key = (blocks[s], succ_blocks);
                let id = sig_map.len();
                next[s] = *sig_map.entry(key).or_insert(id);
            }
            let next = renumber_by_first_occurrence(&next);
            if next == blocks {
                return blocks;
            }
            blocks = next;
        }
    }

    /// True iff predictive-equivalence refinement yields no merges.
    pub fn is_minimal(&self) -> bool {
        let blocks = self.predictive_partition();
        blocks.iter().max().map(|&m| m + 1) == Some(self.state_count())
    }

    /// Merges predictively equivalent states. Word probabilities are
    /// preserved; merged emission probabilities are the π-weighted averages
    /// over block members. Returns an isomorphic machine when the input is
    /// already minimal.
    pub fn minimize(&self) -> EpsilonMachine {
        let blocks = self.predictive_partition();
        let nb = blocks.iter().max().map(|&m| m + 1).unwrap_or(0);
        let mut rep = vec![usize::MAX; nb];
        for (s, &b) in blocks.iter().enumerate() {
            if rep[b] == usize::MAX {
                rep[b] = s;
            }
        }
        let labels: Vec<String> = rep.iter().map(|&s| self.states[s].clone()).collect();
        let mut edges = Vec::new();
        for (b, &r) in rep.iter().enumerate() {
            let weight: f64 = (0..self.state_count())
                .filter(|&s| blocks[s] == b)
                .map(|s| self.stationary[s])
                .sum();
            for x in 0..self.alphabet.len() {
                if let Some((t, _)) = self.transitions[r][x] {
                    let mass: f64 = (0..self.state_count())
                        .filter(|&s| blocks[s] == b)
                        .map(|s| {
                            self.stationary[s]
                                * self.transitions[s][x].map_or(0.0, |(_, p)| p)
                        })
                        .sum();
                    edges.push((b, x, blocks[t], mass / weight));
                }
            }
        }
        EpsilonMachine::from_parts(self.name.clone(), self.alphabet.clone(), labels, &edges)
            .expect("quotient of a valid machine is valid")
    }

    /// Diagnostic report: structural rule checks, noncounifilar states, and
    /// whether the machine is minimal.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for (i, row) in self.transitions.iter().enumerate() {
            let sum: f64 = row.iter().flatten().map(|&(_, p)| p).sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                violations.push(Violation {
                    rule: "stochasticity",
                    context: self.states[i].clone(),
                    measured: sum,
                });
            }
        }
        if !strongly_connected(&self.transitions) {
            violations.push(Violation {
                rule: "irreducibility",
                context: "state digraph".into(),
                measured: 0.0,
            });
        }
        let residual = stationary_residual(&self.transitions, &self.stationary);
        if residual > STATIONARY_RESIDUAL_TOL {
            violations.push(Violation {
                rule: "stationarity",
                context: "π residual".into(),
                measured: residual,
            });
        }
        let noncounifilar_states = self
            .noncounifilar_states()
            .into_iter()
            .map(|i| self.states[i].clone())
            .collect();
        ValidationReport {
            ok: violations.is_empty(),
            violations,
            minimal: self.is_minimal(),
            noncounifilar_states,
        }
    }
}

/// Parses a machine-document (JSON text) into a validated machine.
pub fn parse_machine(text: &str) -> Result<EpsilonMachine> {
    let doc: MachineDocument = serde_json::from_str(text)?;
    EpsilonMachine::from_document(&doc)
}

/// Draws an index from a normalized categorical distribution.
pub(crate) fn draw_categorical<R: Rng>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

fn renumber_by_first_occurrence(ids: &[usize]) -> Vec<usize> {
    let mut map: HashMap<usize, usize> = HashMap::new();
    let mut out = Vec::with_capacity(ids.len());
    for &id in ids {
        let next = map.len();
        out.push(*map.entry(id).or_insert(next));
    }
    out
}

fn strongly_connected(transitions: &[Vec<Option<(usize, f64)>>]) -> bool {
    let n = transitions.len();
    let mut fwd: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut bwd: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, row) in transitions.iter().enumerate() {
        for slot in row.iter().flatten() {
            fwd[i].push(slot.0);
            bwd[slot.0].push(i);
        }
    }
    reaches_all(&fwd) && reaches_all(&bwd)
}

fn reaches_all(adj: &[Vec<usize>]) -> bool {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(s) = stack.pop() {
        for &t in &adj[s] {
            if !seen[t] {
                seen[t] = true;
                count += 1;
                stack.push(t);
            }
        }
    }
    count == n
}

fn stationary_residual(transitions: &[Vec<Option<(usize, f64)>>], pi: &[f64]) -> f64 {
    let n = transitions.len();
    let mut image = vec![0.0f64; n];
    for (i, row) in transitions.iter().enumerate() {
        for slot in row.iter().flatten() {
            image[slot.0] += pi[i] * slot.1;
        }
    }
    image
        .iter()
        .zip(pi)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Solves `πT = π`, `Σπ = 1` by LU on the transpose system with the last
/// equation replaced by the normalization constraint.
fn solve_stationary(transitions: &[Vec<Option<(usize, f64)>>]) -> Result<Vec<f64>> {
    let n = transitions.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (i, row) in transitions.iter().enumerate() {
        for slot in row.iter().flatten() {
            a[(slot.0, i)] += slot.1;
        }
    }
    for i in 0..n {
        a[(i, i)] -= 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let pi = a
        .lu()
        .solve(&b)
        .ok_or(Error::StationaryNonConvergence { residual: f64::NAN })?;
    let sum: f64 = pi.iter().sum();
    let pi: Vec<f64> = pi.iter().map(|p| p / sum).collect();
    let residual = stationary_residual(transitions, &pi);
    if residual > STATIONARY_RESIDUAL_TOL || pi.iter().any(|&p| p <= 0.0) {
        return Err(Error::StationaryNonConvergence { residual });
    }
    Ok(pi)
}
