//! Command-line front end: analyze machines, sweep parameter grids to CSV,
//! run verification batteries, survey random machines, sample sequences, and
//! export machine or pair-graph documents.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::machine::{parse_machine, EpsilonMachine};
use crate::measures::{
    excess_entropy, markov_order, measure_report, statistical_complexity, EStatus,
    MeasureOptions, Order, SUBSET_NODE_BUDGET,
};
use crate::pmm::{jozsa_ratio_check, Horizon, PairMergerMachine, ZeroRatioRule};
use crate::processes::{biased_coins, nemo, random_machine, rk_golden_mean};
use crate::qmachine::{cq_bruteforce, cq_tail_bound, cq_with_pmm, measure_simulate};

#[derive(Parser, Debug)]
#[command(
    name = "emq",
    version,
    about = "Classical information measures and quantum compression curves of unifilar hidden Markov machines"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the full measure report of one machine.
    Analyze(AnalyzeArgs),
    /// Sweep a parameter grid and write a CSV of compression curves.
    Sweep(SweepArgs),
    /// Cross-check the efficient route against the brute-force oracle and
    /// the bound/monotonicity invariants.
    Verify(VerifyArgs),
    /// Survey random machines for compression-curve monotonicity and
    /// ratio-matrix positivity.
    Survey(SurveyArgs),
    /// Generate a symbol sequence from a machine.
    Sample(SampleArgs),
    /// Write a machine document for a process family.
    Export(ExportArgs),
    /// Write the pairwise-merger edge list of a machine.
    Pmm(PmmArgs),
}

/// Where the machine under analysis comes from: a document on disk or a
/// named builtin family.
#[derive(Args, Debug, Clone)]
struct MachineSource {
    /// Path to a machine document (JSON).
    #[arg(long, value_name = "FILE", conflicts_with = "family")]
    machine: Option<PathBuf>,
    /// Builtin family: biased-coins | rk-golden-mean | nemo | random.
    #[arg(long)]
    family: Option<String>,
    /// Family parameter p in (0, 1).
    #[arg(long)]
    p: Option<f64>,
    /// Markov order for rk-golden-mean.
    #[arg(long = "R")]
    r: Option<usize>,
    /// Cryptic order for rk-golden-mean.
    #[arg(long = "k")]
    k: Option<usize>,
    /// State count for the random family.
    #[arg(long)]
    n_states: Option<usize>,
    /// Alphabet size for the random family.
    #[arg(long)]
    alphabet_size: Option<usize>,
    /// Topology seed for the random family.
    #[arg(long)]
    machine_seed: Option<u64>,
}

impl MachineSource {
    fn resolve(&self) -> Result<(EpsilonMachine, Option<f64>)> {
        if let Some(path) = &self.machine {
            let text = fs::read_to_string(path)?;
            return Ok((parse_machine(&text)?, None));
        }
        let family = self.family.as_deref().unwrap_or("");
        match family {
            "biased-coins" => {
                let p = self.require_p()?;
                Ok((biased_coins(p)?, Some(p)))
            }
            "rk-golden-mean" => {
                let p = self.require_p()?;
                let r = self.r.unwrap_or(4);
                let k = self.k.unwrap_or(3);
                Ok((rk_golden_mean(r, k, p)?, Some(p)))
            }
            "nemo" => {
                let p = self.require_p()?;
                Ok((nemo(p)?, Some(p)))
            }
            "random" => {
                let n = self.n_states.unwrap_or(4);
                let a = self.alphabet_size.unwrap_or(2);
                let seed = self.machine_seed.unwrap_or(0);
                Ok((random_machine(n, a, seed)?, None))
            }
            other => Err(Error::UnknownState(format!(
                "family {other:?} (expected biased-coins | rk-golden-mean | nemo | random, or --machine FILE)"
            ))),
        }
    }

    fn require_p(&self) -> Result<f64> {
        self.p.ok_or(Error::OutOfRange {
            param: "p",
            value: f64::NAN,
            expected: "(0, 1); pass --p",
        })
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Method {
    Gram,
    Brute,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Format {
    Kv,
    Csv,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    source: MachineSource,
    /// Analyze the minimized machine instead of the one given.
    #[arg(long)]
    minimize: bool,
    /// Largest finite horizon in the compression curve.
    #[arg(long = "Lmax", default_value_t = 8)]
    l_max: usize,
    /// Require the asymptotic compression value (fails if unavailable).
    #[arg(long)]
    inf: bool,
    #[arg(long, value_enum, default_value_t = Format::Kv)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    source: MachineSource,
    /// Parameter grid start:stop:steps (inclusive endpoints).
    #[arg(long, default_value = "0.01:0.99:99")]
    grid: String,
    /// Comma-separated list of horizons.
    #[arg(long = "L", default_value = "0,1,2,3,4,5")]
    l_list: String,
    /// Also emit the asymptotic row per parameter.
    #[arg(long)]
    inf: bool,
    #[arg(long, value_enum, default_value_t = Method::Gram)]
    method: Method,
    /// Sweep the minimized machine at each parameter.
    #[arg(long)]
    minimize: bool,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Verify a single machine document instead of the builtin corpus.
    #[arg(long, value_name = "FILE")]
    machine: Option<PathBuf>,
    /// Largest horizon cross-checked against the brute-force oracle.
    #[arg(long = "Lmax", default_value_t = 5)]
    l_max: usize,
    /// Base seed for the random corpus.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Number of random machines in the corpus.
    #[arg(long, default_value_t = 200)]
    n_random: usize,
    /// Skip the statistical measurement test (it draws 10^5 samples).
    #[arg(long)]
    skip_measurement_test: bool,
}

#[derive(Args, Debug)]
struct SurveyArgs {
    /// Number of random machines.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Smallest state count.
    #[arg(long, default_value_t = 2)]
    nmin: usize,
    /// Largest state count.
    #[arg(long, default_value_t = 7)]
    nmax: usize,
    /// Alphabet size.
    #[arg(long, default_value_t = 2)]
    alphabet_size: usize,
    /// Base seed; machine i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Monotonicity is checked for L = 0..=Lmax.
    #[arg(long = "Lmax", default_value_t = 8)]
    l_max: usize,
    /// Write the per-machine CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(flatten)]
    source: MachineSource,
    /// Number of symbols to emit.
    #[arg(long, default_value_t = 32)]
    length: usize,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Start state label (defaults to a stationary draw).
    #[arg(long)]
    start: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[command(flatten)]
    source: MachineSource,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PmmArgs {
    #[command(flatten)]
    source: MachineSource,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses arguments and runs, writing to stdout. Returns the process exit
/// code: 0 success, 2 validation failure, 3 invariant failure, 4 resource
/// cap.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let mut stdout = std::io::stdout();
    run_with(args, &mut stdout)
}

/// [`run`] with an injectable output stream (used by tests).
pub fn run_with<I, T, W: Write>(args: I, out: &mut W) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own help/usage text.
            let _ = write!(out, "{e}");
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Analyze(a) => cmd_analyze(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Survey(a) => cmd_survey(a, out),
        Command::Sample(a) => cmd_sample(a, out),
        Command::Export(a) => cmd_export(a, out),
        Command::Pmm(a) => cmd_pmm(a, out),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(out, "error: {e}");
            e.exit_code()
        }
    }
}

fn write_or_print<W: Write>(out: &mut W, path: &Option<PathBuf>, content: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, content)?,
        None => out.write_all(content.as_bytes())?,
    }
    Ok(())
}

fn cmd_analyze<W: Write>(args: AnalyzeArgs, out: &mut W) -> Result<i32> {
    let (machine, param) = args.source.resolve()?;
    let machine = if args.minimize { machine.minimize() } else { machine };
    let report = measure_report(&machine, MeasureOptions::default())?;
    let mut text = String::new();
    match args.format {
        Format::Csv => {
            text.push_str(crate::measures::MeasureReport::CSV_HEADER);
            text.push('\n');
            text.push_str(&report.csv_row(param));
            text.push('\n');
        }
        Format::Kv => {
            if let Some(p) = param {
                text.push_str(&format!("param={p}\n"));
            }
            text.push_str(&report.to_kv());
            let pmm = PairMergerMachine::build(&machine);
            for l in 0..=args.l_max {
                let v = cq_with_pmm(&machine, &pmm, Horizon::Finite(l))?;
                text.push_str(&format!("Cq_{l}={v}\n"));
            }
            match cq_with_pmm(&machine, &pmm, Horizon::Asymptotic) {
                Ok(v) => {
                    let bound = cq_tail_bound(&machine, &pmm, args.l_max).unwrap_or(f64::NAN);
                    text.push_str(&format!("Cq_inf={v}\n"));
                    text.push_str(&format!("Cq_inf_gap_at_Lmax={bound:e}\n"));
                }
                Err(e) if args.inf => return Err(e),
                Err(e) => text.push_str(&format!("Cq_inf=unavailable ({e})\n")),
            }
            if !report.minimal {
                text.push_str("warning=machine is not minimal; pass --minimize to merge equivalent states\n");
            }
        }
    }
    write_or_print(out, &args.out, &text)?;
    Ok(0)
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::OutOfRange {
        param: "grid",
        value: f64::NAN,
        expected: "start:stop:steps with 0 < start ≤ stop < 1",
    };
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].parse().map_err(|_| bad())?;
    let steps: usize = parts[2].parse().map_err(|_| bad())?;
    if !(start > 0.0 && stop < 1.0 && start <= stop && steps >= 1) {
        return Err(bad());
    }
    if steps == 1 {
        return Ok(vec![start]);
    }
    Ok((0..steps)
        .map(|i| start + (stop - start) * i as f64 / (steps - 1) as f64)
        .collect())
}

fn parse_l_list(spec: &str) -> Result<Vec<usize>> {
    spec.split(',')
        .map(|tok| {
            tok.trim().parse::<usize>().map_err(|_| Error::OutOfRange {
                param: "L",
                value: f64::NAN,
                expected: "comma-separated horizons, e.g. 0,1,2",
            })
        })
        .collect()
}

fn cmd_sweep<W: Write>(args: SweepArgs, out: &mut W) -> Result<i32> {
    let l_list = parse_l_list(&args.l_list)?;
    let params: Vec<Option<f64>> = if args.source.machine.is_some() {
        vec![None]
    } else {
        parse_grid(&args.grid)?.into_iter().map(Some).collect()
    };
    let mut csv = String::from("name,param,L,Cq,method,err_bound,C_mu,E,E_status\n");
    for param in &params {
        let source = MachineSource {
            p: param.or(args.source.p),
            ..args.source.clone()
        };
        let (machine, _) = source.resolve()?;
        let machine = if args.minimize { machine.minimize() } else { machine };
        let name = machine.name().to_string();
        let param_str = param.map(|p| p.to_string()).unwrap_or_default();
        let c_mu = statistical_complexity(&machine);
        let max_l = crate::measures::default_excess_max_l(machine.alphabet().len());
        let (e, e_status) = excess_entropy(&machine, 1e-9, max_l)?;
        let status = match e_status {
            EStatus::Converged { .. } => "converged",
            EStatus::Truncated { .. } => "truncated",
        };
        let pmm = PairMergerMachine::build(&machine);
        let mut push_row = |l: &str, cq: std::result::Result<f64, &Error>, method: &str, err_bound: f64| {
            match cq {
                Ok(v) => csv.push_str(&format!(
                    "{name},{param_str},{l},{v},{method},{err_bound},{c_mu},{e},{status}\n"
                )),
                Err(err) => csv.push_str(&format!(
                    "{name},{param_str},{l},nan,error:{},{err_bound},{c_mu},{e},{status}\n",
                    err.exit_code()
                )),
            }
        };
        for &l in &l_list {
            if args.method == Method::Gram || args.method == Method::Both {
                let v = cq_with_pmm(&machine, &pmm, Horizon::Finite(l));
                push_row(&l.to_string(), v.as_ref().map(|v| *v), "gram", 0.0);
            }
            if args.method == Method::Brute || args.method == Method::Both {
                let v = cq_bruteforce(&machine, l);
                push_row(&l.to_string(), v.as_ref().map(|v| *v), "brute", 0.0);
            }
        }
        if args.inf {
            let v = cq_with_pmm(&machine, &pmm, Horizon::Asymptotic);
            let bound = pmm
                .gram_matrix_asymptotic_with_bound()
                .map(|(_, b)| b)
                .unwrap_or(f64::NAN);
            push_row("inf", v.as_ref().map(|v| *v), "asymptotic", bound);
        }
    }
    fs::write(&args.out, &csv)?;
    writeln!(out, "wrote {} rows to {}", csv.lines().count() - 1, args.out.display())?;
    Ok(0)
}

struct VerifyContext<'a, W: Write> {
    out: &'a mut W,
    failures: usize,
}

impl<'a, W: Write> VerifyContext<'a, W> {
    fn check(&mut self, name: &str, machine: &str, ok: bool, detail: String) {
        if ok {
            let _ = writeln!(self.out, "ok   {machine}: {name}");
        } else {
            self.failures += 1;
            let _ = writeln!(self.out, "FAIL {machine}: {name}: {detail}");
        }
    }
}

fn verify_machine<W: Write>(
    ctx: &mut VerifyContext<'_, W>,
    machine: &EpsilonMachine,
    l_max: usize,
) -> Result<()> {
    let label = machine.name().to_string();
    let pmm = PairMergerMachine::build(machine);
    let sig_at = |l: usize| crate::qmachine::signal_states(machine, l);

    // Pairwise overlaps: PMM route vs explicit signal states.
    let mut max_dev = 0.0f64;
    for l in 0..=l_max {
        let g = pmm.gram_matrix(l);
        let sss = sig_at(l)?;
        for i in 0..machine.state_count() {
            for j in 0..machine.state_count() {
                max_dev = max_dev.max((g.entry(i, j) - sss.overlap(i, j)).abs());
            }
        }
    }
    ctx.check(
        "gram equals brute-force overlaps (1e-12)",
        &label,
        max_dev <= 1e-12,
        format!("max deviation {max_dev:e}"),
    );

    // Entropy route equality.
    let mut max_cq_dev = 0.0f64;
    for l in 0..=l_max {
        let a = cq_with_pmm(machine, &pmm, Horizon::Finite(l))?;
        let b = cq_bruteforce(machine, l)?;
        max_cq_dev = max_cq_dev.max((a - b).abs());
    }
    ctx.check(
        "Cq gram route equals brute force (1e-10)",
        &label,
        max_cq_dev <= 1e-10,
        format!("max deviation {max_cq_dev:e}"),
    );

    // Bounds E ≤ Cq(L) ≤ C_mu and Cq(0) = C_mu.
    let c_mu = statistical_complexity(machine);
    let max_l = crate::measures::default_excess_max_l(machine.alphabet().len());
    let (e, _) = excess_entropy(machine, 1e-9, max_l)?;
    let mut bounds_ok = true;
    let mut detail = String::new();
    for l in 0..=l_max {
        let v = cq_with_pmm(machine, &pmm, Horizon::Finite(l))?;
        if v < e - 1e-6 || v > c_mu + 1e-9 {
            bounds_ok = false;
            detail = format!("L={l}: Cq={v} outside [{e}, {c_mu}]");
            break;
        }
        if l == 0 && (v - c_mu).abs() > 1e-10 {
            bounds_ok = false;
            detail = format!("Cq(0)={v} != C_mu={c_mu}");
            break;
        }
    }
    ctx.check("E ≤ Cq(L) ≤ C_mu and Cq(0)=C_mu", &label, bounds_ok, detail);

    // Overlap monotonicity in L.
    let mut monotone = true;
    let mut prev = pmm.gram_matrix(0);
    for l in 1..=l_max {
        let g = pmm.gram_matrix(l);
        for i in 0..machine.state_count() {
            for j in 0..machine.state_count() {
                if g.entry(i, j) < prev.entry(i, j) - 1e-12 {
                    monotone = false;
                }
            }
        }
        prev = g;
    }
    ctx.check("overlaps nondecreasing in L", &label, monotone, String::new());

    // k ≤ R when both finite.
    let r = markov_order(machine, SUBSET_NODE_BUDGET);
    let k = pmm.cryptic_order();
    let order_ok = match (k, r) {
        (Order::Finite(k), Order::Finite(r)) => k <= r,
        _ => true,
    };
    ctx.check(
        "cryptic order ≤ Markov order",
        &label,
        order_ok,
        format!("k={k}, R={r}"),
    );
    Ok(())
}

fn measurement_statistics_check<W: Write>(
    ctx: &mut VerifyContext<'_, W>,
    machine: &EpsilonMachine,
    l: usize,
    draws: usize,
) -> Result<()> {
    let start = 0usize;
    let mut counts: std::collections::HashMap<Vec<usize>, usize> = Default::default();
    for seed in 0..draws {
        let (w, _) = measure_simulate(machine, l, start, seed as u64)?;
        *counts.entry(w).or_default() += 1;
    }
    let mut words = vec![Vec::new()];
    for _ in 0..l {
        let mut next = Vec::new();
        for w in &words {
            for x in 0..machine.alphabet().len() {
                let mut v = w.clone();
                v.push(x);
                next.push(v);
            }
        }
        words = next;
    }
    let mut tv = 0.0;
    for w in &words {
        let classical = machine.word_probability(start, w).0;
        let empirical = counts.get(w).copied().unwrap_or(0) as f64 / draws as f64;
        tv += (classical - empirical).abs();
    }
    tv /= 2.0;
    ctx.check(
        "measurement word statistics match classical (TV ≤ 0.01)",
        machine.name(),
        tv <= 0.01,
        format!("total variation {tv}"),
    );
    Ok(())
}

fn cmd_verify<W: Write>(args: VerifyArgs, out: &mut W) -> Result<i32> {
    let started = Instant::now();
    let mut ctx = VerifyContext { out, failures: 0 };
    if let Some(path) = &args.machine {
        let text = fs::read_to_string(path)?;
        let machine = parse_machine(&text)?;
        verify_machine(&mut ctx, &machine, args.l_max)?;
    } else {
        let ps = [0.1, 0.3, 0.5, 0.666, 0.9];
        let mut corpus: Vec<EpsilonMachine> = Vec::new();
        for p in ps {
            corpus.push(biased_coins(p)?.with_name(format!("biased-coins(p={p})")));
            corpus.push(rk_golden_mean(4, 3, p)?.with_name(format!("rk-golden-mean(p={p})")));
            corpus.push(nemo(p)?.with_name(format!("nemo(p={p})")));
        }
        for i in 0..args.n_random {
            let n_states = 2 + (i % 5); // 2..=6 states
            corpus.push(random_machine(n_states, 2, args.seed + i as u64)?);
        }
        for machine in &corpus {
            verify_machine(&mut ctx, machine, args.l_max)?;
        }
        if !args.skip_measurement_test {
            let draws = 100_000;
            measurement_statistics_check(&mut ctx, &biased_coins(0.666)?, 3, draws)?;
            measurement_statistics_check(&mut ctx, &rk_golden_mean(4, 3, 0.505)?, 3, draws)?;
        }
    }
    let failures = ctx.failures;
    writeln!(
        out,
        "verify: {} failure(s) in {:.1}s",
        failures,
        started.elapsed().as_secs_f64()
    )?;
    Ok(if failures == 0 { 0 } else { 3 })
}

fn cmd_survey<W: Write>(args: SurveyArgs, out: &mut W) -> Result<i32> {
    if args.nmin < 1 || args.nmax < args.nmin {
        return Err(Error::OutOfRange {
            param: "nmin/nmax",
            value: args.nmin as f64,
            expected: "1 ≤ nmin ≤ nmax",
        });
    }
    let mut csv = String::from("seed,n_states,n_minimized,R,k,cq_monotone,jozsa_all_psd,jozsa_min_eig\n");
    let mut monotonicity_violations: Vec<u64> = Vec::new();
    let mut nonpsd_machines: Vec<u64> = Vec::new();
    let span = args.nmax - args.nmin + 1;
    for i in 0..args.n {
        let n_states = args.nmin + (i % span);
        let seed = args.seed + i as u64;
        let machine = random_machine(n_states, args.alphabet_size, seed)?;
        let pmm = PairMergerMachine::build(&machine);
        let r = markov_order(&machine, SUBSET_NODE_BUDGET);
        let k = pmm.cryptic_order();
        let mut monotone = true;
        let mut prev = cq_with_pmm(&machine, &pmm, Horizon::Finite(0))?;
        for l in 1..=args.l_max {
            let v = cq_with_pmm(&machine, &pmm, Horizon::Finite(l))?;
            if v > prev + 1e-10 {
                monotone = false;
            }
            prev = v;
        }
        if !monotone {
            monotonicity_violations.push(seed);
        }
        let mut all_psd = true;
        let mut min_eig = f64::INFINITY;
        for l in 0..args.l_max {
            let ga = pmm.gram_matrix(l);
            let gb = pmm.gram_matrix(l + 1);
            let check = jozsa_ratio_check(&ga, &gb, ZeroRatioRule::UseNumerator)?;
            min_eig = min_eig.min(check.min_eigenvalue);
            if !check.positive {
                all_psd = false;
            }
        }
        if !all_psd {
            nonpsd_machines.push(seed);
        }
        csv.push_str(&format!(
            "{seed},{n_states},{},{r},{k},{monotone},{all_psd},{min_eig}\n",
            machine.state_count()
        ));
    }
    if let Some(path) = &args.out {
        fs::write(path, &csv)?;
    }
    writeln!(out, "surveyed {} machines (N in {}..={})", args.n, args.nmin, args.nmax)?;
    writeln!(out, "monotonicity violations: {}", monotonicity_violations.len())?;
    for seed in &monotonicity_violations {
        writeln!(out, "  FINDING: Cq(L) increased for machine seed {seed}")?;
    }
    writeln!(out, "non-PSD ratio matrices: {}", nonpsd_machines.len())?;
    for seed in nonpsd_machines.iter().take(20) {
        writeln!(out, "  note: ratio matrix not PSD for machine seed {seed}")?;
    }
    Ok(if monotonicity_violations.is_empty() { 0 } else { 3 })
}

fn cmd_sample<W: Write>(args: SampleArgs, out: &mut W) -> Result<i32> {
    let (machine, _) = args.source.resolve()?;
    let start = match &args.start {
        Some(label) => Some(
            machine
                .state_index(label)
                .ok_or_else(|| Error::UnknownState(label.clone()))?,
        ),
        None => None,
    };
    let (word, path) = machine.sample(args.length, args.seed, start);
    let mut text = String::new();
    text.push_str(&machine.format_word(&word));
    text.push('\n');
    text.push_str(
        &path
            .iter()
            .map(|&s| machine.state_label(s))
            .collect::<Vec<_>>()
            .join(" "),
    );
    text.push('\n');
    write_or_print(out, &args.out, &text)?;
    Ok(0)
}

fn cmd_export<W: Write>(args: ExportArgs, out: &mut W) -> Result<i32> {
    let (machine, _) = args.source.resolve()?;
    let doc = machine.to_document();
    let mut text = serde_json::to_string_pretty(&doc).map_err(Error::Schema)?;
    text.push('\n');
    write_or_print(out, &args.out, &text)?;
    Ok(0)
}

fn cmd_pmm<W: Write>(args: PmmArgs, out: &mut W) -> Result<i32> {
    let (machine, _) = args.source.resolve()?;
    let pmm = PairMergerMachine::build(&machine);
    let doc = pmm.to_document(&machine);
    let mut text = serde_json::to_string_pretty(&doc).map_err(Error::Schema)?;
    text.push('\n');
    write_or_print(out, &args.out, &text)?;
    Ok(0)
}
