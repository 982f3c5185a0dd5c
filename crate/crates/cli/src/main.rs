use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lmpot_core::benchmark::{run_benchmark, ScenarioSpec};
use lmpot_core::io::{
    lmrd_export, read_observations, report_to_json, write_diagnostics_file, write_lmrd_file,
    write_report_file, ColumnSelector, InputSpec,
};
use lmpot_core::{analyze, GridSpec, Method, PotConfig, PotReport};

const EXIT_NONE_SELECTED: u8 = 3;
const EXIT_INPUT: u8 = 2;

#[derive(Parser)]
#[command(
    name = "lmpot",
    version,
    about = "Automatic peaks-over-threshold level selection from L-moments",
    args_conflicts_with_subcommands = true,
    subcommand_negates_reqs = true
)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    #[command(flatten)]
    analyze: AnalyzeArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded Monte Carlo scenario and emit metrics as JSON.
    Benchmark(BenchmarkArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Alcbsm,
    Algfsm,
    Both,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// CSV file with one observation per row.
    #[arg(long, required = true)]
    input: Option<PathBuf>,

    /// Column by 0-based index or header name.
    #[arg(long, default_value = "0")]
    column: String,

    #[arg(long, default_value_t = ',')]
    delimiter: char,

    /// First row holds column names.
    #[arg(long)]
    header: bool,

    #[arg(long, value_enum, default_value = "both")]
    method: MethodArg,

    /// Number of candidate thresholds.
    #[arg(long, default_value_t = 10)]
    candidates: usize,

    /// First candidate's sample-quantile level [default: 0.25].
    #[arg(long)]
    grid_start: Option<f64>,

    /// Last candidate's level [default: 0.925 for 10 candidates, else 0.95].
    #[arg(long)]
    grid_end: Option<f64>,

    /// ForwardStop level of the goodness-of-fit selector.
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,

    /// Confidence-band level of the band selector.
    #[arg(long, default_value_t = 0.05)]
    alpha_cb: f64,

    /// Kappa samples per candidate.
    #[arg(long, default_value_t = 500)]
    nsim: usize,

    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Return periods in years.
    #[arg(long, value_delimiter = ',', default_value = "100,10000")]
    rl: Vec<f64>,

    /// Average number of observations per year.
    #[arg(long, default_value_t = 1.0)]
    obs_per_year: f64,

    /// JSON report path (stdout when omitted).
    #[arg(long)]
    out_report: Option<PathBuf>,

    /// Per-candidate diagnostics as TSV.
    #[arg(long)]
    out_diagnostics: Option<PathBuf>,

    /// L-moment ratio diagram data as CSV.
    #[arg(long)]
    out_lmrd: Option<PathBuf>,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Scenario file, TOML or JSON.
    #[arg(long)]
    config: PathBuf,

    /// Metrics path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long)]
    threads: Option<usize>,
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_INPUT)
}

fn pot_config(a: &AnalyzeArgs) -> PotConfig {
    let preset = GridSpec::preset(a.candidates);
    PotConfig {
        grid: GridSpec {
            candidates: a.candidates,
            p_start: a.grid_start.unwrap_or(preset.p_start),
            p_end: a.grid_end.unwrap_or(preset.p_end),
        },
        methods: match a.method {
            MethodArg::Alcbsm => vec![Method::Alcbsm],
            MethodArg::Algfsm => vec![Method::Algfsm],
            MethodArg::Both => vec![Method::Alcbsm, Method::Algfsm],
        },
        alpha_cb: a.alpha_cb,
        alpha_gf: a.alpha,
        nsim: a.nsim,
        seed: a.seed,
        return_periods: a.rl.clone(),
        obs_per_year: a.obs_per_year,
    }
}

fn summarize(report: &PotReport) {
    for m in &report.methods {
        let o = &m.outcome;
        match (o.selected_index, o.u_star, o.n_star, m.fit) {
            (Some(i), Some(u), Some(n), Some(fit)) => {
                let rls: Vec<String> = m
                    .return_levels
                    .iter()
                    .map(|r| format!("RL{}={:.4}", r.period, r.level))
                    .collect();
                eprintln!(
                    "{}: candidate {i}, u*={u}, n*={n}, xi={:.4}, sigma={:.4} {}",
                    o.method,
                    fit.params.xi,
                    fit.params.sigma,
                    rls.join(" ")
                );
            }
            _ => eprintln!("{}: no threshold selected", o.method),
        }
    }
}

fn run_analyze(a: &AnalyzeArgs) -> ExitCode {
    let Some(path) = &a.input else {
        return fail("--input is required");
    };
    if !a.delimiter.is_ascii() {
        return fail("delimiter must be a single ASCII character");
    }
    let spec = InputSpec {
        path: path.clone(),
        column: a.column.parse::<ColumnSelector>().unwrap_or_default(),
        delimiter: a.delimiter as u8,
        has_header: a.header,
    };
    let sample = match read_observations(&spec) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let report = match analyze(&sample, &pot_config(a)) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };

    let outcomes: Vec<_> = report.methods.iter().map(|m| &m.outcome).collect();
    let written = (|| {
        match &a.out_report {
            Some(p) => write_report_file(&report, p)?,
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(report_to_json(&report).as_bytes())
                    .map_err(|e| lmpot_core::Error::Io {
                        path: "<stdout>".into(),
                        message: e.to_string(),
                    })?;
            }
        }
        if let Some(p) = &a.out_diagnostics {
            write_diagnostics_file(&outcomes, p)?;
        }
        if let Some(p) = &a.out_lmrd {
            write_lmrd_file(&lmrd_export(&outcomes, 200), p)?;
        }
        Ok::<_, lmpot_core::Error>(())
    })();
    if let Err(e) = written {
        return fail(e);
    }
    summarize(&report);
    if let Some(t) = report.elapsed {
        eprintln!("analysis time: {:.3} s", t.as_secs_f64());
    }
    if report.all_selected() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NONE_SELECTED)
    }
}

fn run_bench(b: &BenchmarkArgs) -> ExitCode {
    let spec = match ScenarioSpec::from_path(&b.config) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let result = match run_benchmark(&spec, b.threads) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let text = result.to_json();
    let res = match &b.out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| e.to_string()),
    };
    if let Err(e) = res {
        return fail(e);
    }
    eprintln!(
        "{} replicates on {} workers in {:.2} s",
        spec.reps, result.timing.workers, result.timing.total_seconds
    );
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = match &cli.command {
        Some(Command::Benchmark(b)) => b.threads,
        None => cli.analyze.threads,
    };
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(e);
        }
    }
    match &cli.command {
        Some(Command::Benchmark(b)) => run_bench(b),
        None => run_analyze(&cli.analyze),
    }
}
