//! Analysis of finite unifilar hidden Markov machines: classical information
//! measures (entropy rate, statistical complexity, excess entropy, Markov
//! and cryptic orders) and the quantum compression curve `C_q(L)` — the von
//! Neumann entropy of the machine's signal-state ensemble at prediction
//! horizon `L`.
//!
//! The efficient `C_q` route runs on the pairwise-merger machine
//! ([`pmm::PairMergerMachine`]), which tracks unordered state pairs until
//! they merge and reduces every horizon — including `L → ∞` — to linear
//! algebra in `|S|` dimensions. The exponential-size construction of the
//! signal states themselves ([`qmachine::signal_states`]) is kept as a
//! verification oracle.

pub mod cli;
pub mod error;
pub mod machine;
pub mod measures;
pub mod pmm;
pub mod processes;
pub mod qmachine;

pub use error::{Error, Result};
pub use machine::{parse_machine, Alphabet, EpsilonMachine, MachineDocument, ValidationReport, Word};
pub use measures::{
    block_entropy, entropy_rate, excess_entropy, markov_order, measure_report, EStatus,
    MeasureOptions, MeasureReport, Order,
};
pub use pmm::{jozsa_ratio_check, GramMatrix, Horizon, PairMergerMachine, ZeroRatioRule};
pub use processes::{biased_coins, nemo, random_machine, rk_golden_mean};
pub use qmachine::{cq, cq_bruteforce, measure_simulate, signal_states, vn_entropy, SignalStateSet};
