//! Quantum presentation of a unifilar machine: signal states, the state
//! ensemble's von Neumann entropy `C_q(L)`, and measurement simulation.
//!
//! Two routes compute `C_q(L)`. The brute-force route materializes the
//! signal states in the word⊗state product space and eigendecomposes the
//! ensemble density matrix; its embedding dimension grows exponentially in
//! `L`, so it is capped and serves as the verification oracle. The default
//! route builds the `|S|×|S|` matrix `M_ij = √(π_i π_j)·G_ij(L)` from the
//! pairwise-merger Gram matrix; `ρ = VV†` and `M = V†V` for the √π-weighted
//! signal-state matrix `V`, so the nonzero spectra agree and the entropy is
//! identical at any horizon.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::machine::{draw_categorical, EpsilonMachine, Word};
use crate::measures::shannon_entropy_bits;
use crate::pmm::{GramMatrix, Horizon, PairMergerMachine};

/// Default cap on the word-space size `|A|^L` of the brute-force oracle.
pub const DEFAULT_BRUTE_CAP: usize = 4096;
/// Default memory budget for the explicit density matrix, in MiB.
pub const DEFAULT_BRUTE_MEM_MB: usize = 512;
/// Eigenvalues below this are treated as numerically zero rank.
pub const EIGENVALUE_CLIP: f64 = 1e-12;
/// Eigenvalues below this negative floor are an error.
pub const EIGENVALUE_NEG_TOL: f64 = -1e-9;

fn brute_cap() -> usize {
    std::env::var("EMQ_BRUTE_CAP")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_BRUTE_CAP)
}

fn brute_mem_bytes() -> usize {
    let mb = std::env::var("EMQ_BRUTE_MEM_MB")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_BRUTE_MEM_MB);
    mb.saturating_mul(1 << 20)
}

/// One basis amplitude of a signal state: `√P(word)` on `|word⟩|successor⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalAmplitude {
    pub word: Word,
    pub successor: usize,
    pub amplitude: f64,
}

/// Explicit signal states `|η_j(L)⟩` for every machine state `j`: sparse
/// nonnegative amplitude vectors over the `(word, successor)` product basis,
/// each of unit norm. Entries are ordered lexicographically by word (symbol
/// index order), which fixes the basis for all downstream matrices.
#[derive(Debug, Clone)]
pub struct SignalStateSet {
    horizon: usize,
    states: Vec<Vec<SignalAmplitude>>,
}

impl SignalStateSet {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    /// Amplitudes of state `j`'s signal state.
    pub fn amplitudes(&self, j: usize) -> &[SignalAmplitude] {
        &self.states[j]
    }

    /// Inner product `⟨η_i|η_j⟩`: amplitudes match only when both the word
    /// and the successor agree.
    pub fn overlap(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (&self.states[i], &self.states[j]);
        let (mut ia, mut ib) = (0usize, 0usize);
        let mut tot = 0.0;
        while ia < a.len() && ib < b.len() {
            let ka = (&a[ia].word, a[ia].successor);
            let kb = (&b[ib].word, b[ib].successor);
            match ka.cmp(&kb) {
                std::cmp::Ordering::Less => ia += 1,
                std::cmp::Ordering::Greater => ib += 1,
                std::cmp::Ordering::Equal => {
                    tot += a[ia].amplitude * b[ib].amplitude;
                    ia += 1;
                    ib += 1;
                }
            }
        }
        tot
    }

    /// Squared norm of state `j` (should be 1 within 1e-12).
    pub fn norm_sq(&self, j: usize) -> f64 {
        self.states[j].iter().map(|e| e.amplitude * e.amplitude).sum()
    }
}

/// Constructs the signal states at horizon `l`. Words are enumerated
/// depth-first in symbol order, pruning forbidden prefixes. Errors when
/// `|A|^l` exceeds the brute-force cap.
pub fn signal_states(m: &EpsilonMachine, l: usize) -> Result<SignalStateSet> {
    let cap = brute_cap();
    let words = (m.alphabet().len() as f64).powi(l as i32);
    if words > cap as f64 {
        return Err(Error::CapExceeded {
            what: "brute-force word space |A|^L",
            requested: words as usize,
            limit: cap,
        });
    }
    let mut states = Vec::with_capacity(m.state_count());
    for j in 0..m.state_count() {
        let mut entries = Vec::new();
        let mut word = Vec::with_capacity(l);
        collect_amplitudes(m, j, l, 1.0, &mut word, &mut entries);
        states.push(entries);
    }
    Ok(SignalStateSet { horizon: l, states })
}

fn collect_amplitudes(
    m: &EpsilonMachine,
    state: usize,
    depth_left: usize,
    prob: f64,
    word: &mut Word,
    out: &mut Vec<SignalAmplitude>,
) {
    if depth_left == 0 {
        out.push(SignalAmplitude {
            word: word.clone(),
            successor: state,
            amplitude: prob.sqrt(),
        });
        return;
    }
    for x in 0..m.alphabet().len() {
        if let Some((t, p)) = m.transition(state, x) {
            word.push(x);
            collect_amplitudes(m, t, depth_left - 1, prob * p, word, out);
            word.pop();
        }
    }
}

/// Von Neumann entropy in bits of a symmetric PSD matrix with unit trace.
/// Eigenvalues below [`EIGENVALUE_CLIP`] are treated as zero; one below
/// [`EIGENVALUE_NEG_TOL`] is an error.
pub fn vn_entropy(matrix: &DMatrix<f64>) -> Result<f64> {
    let n = matrix.nrows();
    if n != matrix.ncols() {
        return Err(Error::DimensionMismatch(n, matrix.ncols()));
    }
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            asym = asym.max((matrix[(i, j)] - matrix[(j, i)]).abs());
        }
    }
    if asym > 1e-12 {
        return Err(Error::NotSymmetric(asym));
    }
    let trace = matrix.trace();
    if (trace - 1.0).abs() > 1e-9 {
        return Err(Error::TraceNotOne(trace));
    }
    entropy_of_spectrum(matrix.clone())
}

fn entropy_of_spectrum(matrix: DMatrix<f64>) -> Result<f64> {
    let eigen = SymmetricEigen::new(matrix);
    let mut h = 0.0;
    for &lambda in eigen.eigenvalues.iter() {
        if lambda < EIGENVALUE_NEG_TOL {
            return Err(Error::NegativeEigenvalue(lambda));
        }
        if lambda > EIGENVALUE_CLIP {
            h -= lambda * lambda.log2();
        }
    }
    Ok(h)
}

/// `C_q(L)` by explicit construction: assembles the ensemble density matrix
/// `ρ(L) = Σ_j π_j |η_j⟩⟨η_j|` over the occupied product basis and
/// eigendecomposes it. Verification oracle only — the basis grows
/// exponentially with `L`.
pub fn cq_bruteforce(m: &EpsilonMachine, l: usize) -> Result<f64> {
    let sss = signal_states(m, l)?;
    let mut basis: BTreeMap<(Word, usize), usize> = BTreeMap::new();
    for j in 0..sss.state_count() {
        for e in sss.amplitudes(j) {
            let key = (e.word.clone(), e.successor);
            let next = basis.len();
            basis.entry(key).or_insert(next);
        }
    }
    let d = basis.len();
    let bytes = d.saturating_mul(d).saturating_mul(8);
    if bytes > brute_mem_bytes() {
        return Err(Error::CapExceeded {
            what: "brute-force density matrix bytes",
            requested: bytes,
            limit: brute_mem_bytes(),
        });
    }
    let pi = m.stationary_distribution();
    let mut rho = DMatrix::<f64>::zeros(d, d);
    for (j, &weight) in pi.iter().enumerate() {
        let idx: Vec<(usize, f64)> = sss
            .amplitudes(j)
            .iter()
            .map(|e| (basis[&(e.word.clone(), e.successor)], e.amplitude))
            .collect();
        for &(bi, ai) in &idx {
            for &(bj, aj) in &idx {
                rho[(bi, bj)] += weight * ai * aj;
            }
        }
    }
    entropy_of_spectrum(rho)
}

/// `C_q` at a finite or asymptotic horizon via the pairwise-merger Gram
/// matrix: eigenvalues of `M_ij = √(π_i π_j)·G_ij`. Agrees with
/// [`cq_bruteforce`] wherever both are defined.
pub fn cq(m: &EpsilonMachine, horizon: Horizon) -> Result<f64> {
    let pmm = PairMergerMachine::build(m);
    cq_with_pmm(m, &pmm, horizon)
}

/// [`cq`] with a prebuilt PMM, for sweeps over many horizons.
pub fn cq_with_pmm(m: &EpsilonMachine, pmm: &PairMergerMachine, horizon: Horizon) -> Result<f64> {
    let gram = match horizon {
        Horizon::Finite(l) => pmm.gram_matrix(l),
        Horizon::Asymptotic => pmm.gram_matrix_asymptotic()?,
    };
    cq_from_gram(m, &gram)
}

/// Entropy of the √π-weighted Gram matrix.
pub fn cq_from_gram(m: &EpsilonMachine, gram: &GramMatrix) -> Result<f64> {
    let pi = m.stationary_distribution();
    let n = m.state_count();
    let mut mat = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            mat[(i, j)] = (pi[i] * pi[j]).sqrt() * gram.entry(i, j);
        }
    }
    entropy_of_spectrum(mat)
}

/// Certified bound on `|C_q(L) − C_q(∞)|` from the exact Gram tail beyond
/// `l`, propagated through the Fannes–Audenaert inequality. Zero for
/// machines whose overlaps have saturated by `l`.
pub fn cq_tail_bound(m: &EpsilonMachine, pmm: &PairMergerMachine, l: usize) -> Result<f64> {
    let pi = m.stationary_distribution();
    let n = m.state_count();
    if n <= 1 {
        return Ok(0.0);
    }
    let tail = pmm.gram_tail_bound(l)?;
    // ‖ΔM‖_F with every off-diagonal tail entry bounded by `tail`.
    let mut fro_sq = 0.0;
    for (q, &(i, j)) in pmm.pairs().iter().enumerate() {
        let _ = q;
        let t = tail * (pi[i] * pi[j]).sqrt();
        fro_sq += 2.0 * t * t;
    }
    let fro = fro_sq.sqrt();
    let trace_dist = 0.5 * (n as f64).sqrt() * fro;
    Ok(entropy_perturbation_bound(trace_dist, n))
}

/// Fannes–Audenaert continuity bound: the entropy difference of two
/// `dim`-dimensional states at trace distance `t`, capped at `log2(dim)`.
pub fn entropy_perturbation_bound(trace_dist: f64, dim: usize) -> f64 {
    if dim <= 1 {
        return 0.0;
    }
    let t = trace_dist.clamp(0.0, 1.0);
    let h2 = shannon_entropy_bits([t, 1.0 - t]);
    let bound = t * (((dim - 1) as f64).max(1.0)).log2() + h2;
    bound.min((dim as f64).log2())
}

/// Simulates the q-machine's generation step: a projective measurement of
/// the horizon-`l` signal state of `start` in the product basis, yielding a
/// length-`l` word and the fully determined successor state. Outcome
/// probabilities are the squared amplitudes, so word marginals equal the
/// classical word probabilities.
pub fn measure_simulate(
    m: &EpsilonMachine,
    l: usize,
    start: usize,
    seed: u64,
) -> Result<(Word, usize)> {
    let sss = signal_states(m, l)?;
    let entries = sss.amplitudes(start);
    let probs: Vec<f64> = entries.iter().map(|e| e.amplitude * e.amplitude).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = draw_categorical(&mut rng, &probs);
    Ok((entries[pick].word.clone(), entries[pick].successor))
}
