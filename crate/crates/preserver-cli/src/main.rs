//! Command-line front end: solve instances, verify witnesses, generate
//! reduction targets, benchmark corpora, and emit random corpora.
//!
//! Exit codes: 0 success, 1 verification failure or cross-solver
//! disagreement, 2 parse or I/O error, 3 algorithm precondition violated,
//! 4 size cap exceeded.

mod bench;
mod random;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use preserver::grid::{solve_grid_pdp_with, GridSolveOpts};
use preserver::io;
use preserver::oracle::{bb_min, brute_force_min};
use preserver::reductions::{
    alc_to_vc3bipdp, bmcc_to_sdp_core, mcc_to_sdp, mwc3_to_alc, parse_source, rsa_to_pdp,
    write_alc, GadgetParams, SourceInstance, VcThreeReduction,
};
use preserver::twdp::{decompose, dp_solve, make_nice, solve_via_treewidth};
use preserver::vc::{min_vertex_cover_capped, vc_solve_with, VcSolveOpts};
use preserver::{first_violated_pair, verify_preserver, Error, Solution, SolveStats, TerminalSpec};

/// Cover size up to which `--algo auto` picks the vertex-cover solver.
const AUTO_VC_THRESHOLD: usize = 6;
/// Scope bound (width + 1 + terminals) for auto-selecting the DP.
const AUTO_TW_SCOPE: usize = 16;

#[derive(Parser)]
#[command(name = "preserver", about = "exact minimum distance preservers", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Auto,
    Brute,
    Bb,
    Grid,
    Twdp,
    Vc,
}

impl Algo {
    fn name(self) -> &'static str {
        match self {
            Algo::Auto => "auto",
            Algo::Brute => "brute",
            Algo::Bb => "bb",
            Algo::Grid => "grid",
            Algo::Twdp => "twdp",
            Algo::Vc => "vc",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and write the witness.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        algo: Algo,
        /// Worker count for solvers that parallelize.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Witness output path (defaults to `<instance>.witness`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Optional tree decomposition file for the DP solver.
        #[arg(long)]
        td: Option<PathBuf>,
    },
    /// Check a witness against an instance.
    Verify { instance: PathBuf, witness: PathBuf },
    /// Run a reduction generator on a source-problem file.
    Generate {
        /// Reduction: mcc, rsa, mwc3, alc, or bmcc (matches the source header).
        reduction: String,
        source: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Gadget parameters for the bmcc reduction (defaults scale with
        /// the source).
        #[arg(long)]
        alpha: Option<u32>,
        #[arg(long)]
        ell: Option<u32>,
        #[arg(long)]
        delta: Option<u32>,
    },
    /// Solve every instance in a directory with all applicable algorithms
    /// and print a CSV table; disagreement is fatal.
    Bench {
        corpus: PathBuf,
        /// Per-solver timeout in seconds.
        #[arg(long, default_value_t = 60)]
        timeout: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Generate a random corpus of instances.
    Random {
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        m: usize,
        /// Subset terminal count (subsetwise instances).
        #[arg(long)]
        terminals: Option<usize>,
        /// Terminal pair count (pairwise instances).
        #[arg(long)]
        pairs: Option<usize>,
        /// Grid dimensions as WxH; terminals are placed on the grid.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::InvalidInstance(_) | Error::Io(_) => 2,
        Error::Precondition(_) => 3,
        Error::CandidateCapExceeded { .. } | Error::OracleCapExceeded(_) => 4,
        Error::Timeout => 1,
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Solve {
            instance,
            algo,
            workers,
            out,
            td,
        } => cmd_solve(&instance, algo, workers, out, td),
        Command::Verify { instance, witness } => cmd_verify(&instance, &witness),
        Command::Generate {
            reduction,
            source,
            out,
            alpha,
            ell,
            delta,
        } => cmd_generate(&reduction, &source, out, alpha, ell, delta),
        Command::Bench {
            corpus,
            timeout,
            workers,
        } => bench::run(&corpus, timeout, workers),
        Command::Random {
            out,
            n,
            m,
            terminals,
            pairs,
            grid,
            count,
            seed,
        } => random::run(&out, n, m, terminals, pairs, grid.as_deref(), count, seed),
    }
}

fn cmd_solve(
    path: &Path,
    algo: Algo,
    workers: usize,
    out: Option<PathBuf>,
    td: Option<PathBuf>,
) -> Result<ExitCode, Error> {
    let parsed = io::read_instance(path)?;
    let inst = &parsed.instance;
    let digest = io::instance_digest(inst, parsed.grid.as_ref());

    let chosen = if algo == Algo::Auto {
        pick_algorithm(&parsed)
    } else {
        algo
    };

    let start = Instant::now();
    let (solution, stats): (Solution, SolveStats) = match chosen {
        Algo::Auto => unreachable!("resolved above"),
        Algo::Brute => brute_force_min(inst)?,
        Algo::Bb => bb_min(inst)?,
        Algo::Grid => {
            let Some(spec) = parsed.grid else {
                return Err(Error::Precondition(
                    "the grid solver requires a `grid` instance".into(),
                ));
            };
            solve_grid_pdp_with(&spec, &inst.pairs(), GridSolveOpts { workers })?
        }
        Algo::Twdp => match &td {
            Some(tdpath) => {
                let text = std::fs::read_to_string(tdpath)?;
                let decomposition = io::parse_tree_decomposition(&text)?;
                let ntd = make_nice(&decomposition, &inst.graph)?;
                dp_solve(inst, &ntd)?
            }
            None => solve_via_treewidth(inst)?,
        },
        Algo::Vc => vc_solve_with(inst, VcSolveOpts { workers })?,
    };
    let elapsed = start.elapsed();

    let witness_path = out.unwrap_or_else(|| {
        let mut p = path.as_os_str().to_owned();
        p.push(".witness");
        PathBuf::from(p)
    });
    std::fs::write(&witness_path, io::write_witness(&solution.witness))?;

    let ok = verify_preserver(inst, &solution.witness);
    println!("instance: {digest}");
    println!("algorithm: {}", chosen.name());
    println!("size: {}", solution.size);
    println!("witness: {}", witness_path.display());
    println!("time_ms: {}", elapsed.as_millis());
    println!("nodes: {}", stats.nodes);
    println!("tables: {}", stats.tables);
    println!("candidates: {}", stats.candidates);
    println!("ok: {ok}");
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn pick_algorithm(parsed: &io::ParsedInstance) -> Algo {
    if parsed.grid.is_some() {
        return Algo::Grid;
    }
    let inst = &parsed.instance;
    if matches!(inst.terminals, TerminalSpec::Subset(_))
        && min_vertex_cover_capped(&inst.graph, AUTO_VC_THRESHOLD).is_some()
    {
        return Algo::Vc;
    }
    let terminal_count = inst.terminals.terminal_vertices().len();
    if inst.graph.n() <= 64 {
        let width = decompose(&inst.graph).width();
        if width + 1 + terminal_count <= AUTO_TW_SCOPE {
            return Algo::Twdp;
        }
    }
    Algo::Bb
}

fn cmd_verify(instance: &Path, witness: &Path) -> Result<ExitCode, Error> {
    let parsed = io::read_instance(instance)?;
    let text = std::fs::read_to_string(witness)?;
    let w = io::parse_witness(&text, &parsed.instance)?;
    match first_violated_pair(&parsed.instance, &w) {
        None => {
            println!("ok: true");
            Ok(ExitCode::SUCCESS)
        }
        Some(((p, q), want, got)) => {
            println!("violated: ({p}, {q}) host {want} witness {got}");
            println!("ok: false");
            Ok(ExitCode::from(1))
        }
    }
}

fn cmd_generate(
    reduction: &str,
    source: &Path,
    out: Option<PathBuf>,
    alpha: Option<u32>,
    ell: Option<u32>,
    delta: Option<u32>,
) -> Result<ExitCode, Error> {
    let text = std::fs::read_to_string(source)?;
    let digest: String = {
        use sha2::{Digest, Sha256};
        Sha256::digest(text.as_bytes())
            .iter()
            .take(6)
            .map(|b| format!("{b:02x}"))
            .collect()
    };
    let src = parse_source(&text)?;
    let out_path = out.unwrap_or_else(|| {
        let mut p = source.as_os_str().to_owned();
        p.push(".out.txt");
        PathBuf::from(p)
    });

    let (body, budget_note) = match (reduction, src) {
        ("mcc", SourceInstance::Mcc(s)) => {
            let (inst, budget) = mcc_to_sdp(&s)?;
            let comments = vec![
                format!("generated: mcc->sdp from {digest}"),
                format!("k' = {budget}"),
            ];
            (io::write_instance(&inst, None, &comments), budget.to_string())
        }
        ("rsa", SourceInstance::Rsa(s)) => {
            let (spec, inst, budget) = rsa_to_pdp(&s)?;
            let mut comments = vec![format!("generated: rsa->pdp from {digest}")];
            if let Some(b) = budget {
                comments.push(format!("k' = {b}"));
            }
            (
                io::write_instance(&inst, Some(&spec), &comments),
                budget.map_or("-".into(), |b| b.to_string()),
            )
        }
        ("mwc3", SourceInstance::Mwc3(s)) => {
            let (alc, budget) = mwc3_to_alc(&s)?;
            let mut comments = vec![format!("generated: mwc3->alc from {digest}")];
            if let Some(b) = budget {
                comments.push(format!("k' = {b}"));
            }
            (
                write_alc(&alc, &comments),
                budget.map_or("-".into(), |b| b.to_string()),
            )
        }
        ("alc", SourceInstance::Alc(s)) => match alc_to_vc3bipdp(&s)? {
            VcThreeReduction::Instance { instance, budget } => {
                let mut comments = vec![format!("generated: alc->vc3-bipdp from {digest}")];
                if let Some(b) = budget {
                    comments.push(format!("k' = {b}"));
                }
                (
                    io::write_instance(&instance, None, &comments),
                    budget.map_or("-".into(), |b| b.to_string()),
                )
            }
            VcThreeReduction::CertifiedNo { edge } => {
                println!("certified_no: edge ({}, {}) has disjoint color lists", edge.0, edge.1);
                println!("ok: true");
                return Ok(ExitCode::SUCCESS);
            }
        },
        ("bmcc", SourceInstance::Bmcc(s)) => {
            let mut params = GadgetParams::defaults_for(s.n(), s.k());
            if let Some(a) = alpha {
                params.alpha = a;
            }
            if let Some(l) = ell {
                params.ell = l;
            }
            if let Some(d) = delta {
                params.delta = d;
            }
            let (inst, budget) = bmcc_to_sdp_core(&s, params)?;
            let comments = vec![
                format!("generated: bmcc->sdp core from {digest}"),
                format!(
                    "params: alpha {} ell {} delta {}",
                    params.alpha, params.ell, params.delta
                ),
                format!("k' = {budget}"),
            ];
            (io::write_instance(&inst, None, &comments), budget.to_string())
        }
        (r, _) => {
            return Err(Error::Precondition(format!(
                "reduction `{r}` does not match the source header"
            )))
        }
    };
    std::fs::write(&out_path, body)?;
    println!("source: {digest}");
    println!("reduction: {reduction}");
    println!("out: {}", out_path.display());
    println!("budget: {budget_note}");
    println!("ok: true");
    Ok(ExitCode::SUCCESS)
}
