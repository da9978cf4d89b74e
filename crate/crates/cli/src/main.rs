mod report;
mod spec;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ergomix::dobrushin::{dobrushin_alpha_bar, OptimizerConfig};
use ergomix::mixing::{classify_mixing, strong_stability, MixingOptions};
use ergomix::oracle::run_agreement_suite;
use ergomix::shift_demo::{self, TraceMode};
use ergomix::stability::{detect_uniform_stability, StabilityOptions};
use report::ReportDocument;
use spec::{AnalysisOverrides, ParsedSpec};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "ergomix", version, about = "Ergodicity coefficients and stability of trace-norm contractions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Path to a ChannelSpec JSON document.
    spec: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Restrict the report to these sections.
    #[arg(long, value_delimiter = ',')]
    only: Vec<Section>,
    /// Overrides the spec's analysis.seed (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Detection threshold for stability / residual tolerance for mixing.
    #[arg(long)]
    tol: Option<f64>,
    /// Largest power probed by the stability detector.
    #[arg(long)]
    nmax: Option<usize>,
    /// Audit horizon for stability and mixing estimates.
    #[arg(long)]
    horizon: Option<usize>,
    /// Include wall-clock timings (makes output non-reproducible).
    #[arg(long)]
    timings: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Section {
    Predicates,
    Dobrushin,
    Stability,
    Mixing,
}

#[derive(Subcommand)]
enum Command {
    /// Run every analysis phase on a channel spec.
    Analyze(AnalyzeArgs),
    /// Dobrushin coefficient and induced norm only.
    Dobrushin(AnalyzeArgs),
    /// Uniform-stability detection only.
    Stability(AnalyzeArgs),
    /// Asymptotic classification and strong stability only.
    Mixing(AnalyzeArgs),
    /// Escape profiles and smoothing degeneration for truncated shifts.
    ShiftDemo {
        /// Slot counts, e.g. `ergomix shift-demo 2 4 8 16`.
        #[arg(required = true)]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        /// Directory for escape_profile.csv and degeneration.csv; prints
        /// both tables to stdout when omitted.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the optimizer-vs-oracle agreement suite.
    OracleCheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn init_threads() {
    if let Ok(v) = std::env::var("ERGOMIX_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Numerical(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<spec::SpecError> for CliError {
    fn from(e: spec::SpecError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ergomix::Error> for CliError {
    fn from(e: ergomix::Error) -> Self {
        match e {
            ergomix::Error::Numerical { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

fn run(cmd: Command) -> Result<ExitCode, CliError> {
    match cmd {
        Command::Analyze(args) => {
            let sections = if args.only.is_empty() {
                vec![Section::Predicates, Section::Dobrushin, Section::Stability, Section::Mixing]
            } else {
                args.only.clone()
            };
            analyze(&args, &sections)
        }
        Command::Dobrushin(args) => {
            analyze(&args, &[Section::Predicates, Section::Dobrushin])
        }
        Command::Stability(args) => analyze(&args, &[Section::Stability]),
        Command::Mixing(args) => analyze(&args, &[Section::Mixing]),
        Command::ShiftDemo { dims, epsilon, csv } => shift_demo_cmd(&dims, epsilon, csv.as_deref()),
        Command::OracleCheck { seed, out } => oracle_check(seed, out.as_deref()),
    }
}

fn analyze(args: &AnalyzeArgs, sections: &[Section]) -> Result<ExitCode, CliError> {
    let text = std::fs::read_to_string(&args.spec)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", args.spec.display())))?;
    let ParsedSpec { document, operator, analysis } = spec::parse_spec(&text)?;

    let merged = merge_overrides(args, &analysis);
    let seed = merged.seed.unwrap_or(0);

    let mut doc = ReportDocument::new(seed, document);
    let mut timings: BTreeMap<&'static str, f64> = BTreeMap::new();

    for &section in sections {
        let start = Instant::now();
        match section {
            Section::Predicates => {
                doc.predicates = Some(operator.check_predicates(seed, 200));
            }
            Section::Dobrushin => {
                let cfg = OptimizerConfig::with_seed(seed);
                doc.ergodicity = Some(dobrushin_alpha_bar(&operator, &cfg));
            }
            Section::Stability => {
                let mut opts = StabilityOptions::with_seed(seed);
                if let Some(t) = merged.tol {
                    opts.rho_min = t;
                }
                if let Some(n) = merged.n_max {
                    opts.n_max = n;
                }
                if let Some(h) = merged.horizon {
                    opts.horizon = h;
                }
                match detect_uniform_stability(&operator, &opts) {
                    Ok(rep) => doc.stability = Some(rep),
                    Err(e @ ergomix::Error::Numerical { .. }) => return Err(e.into()),
                    Err(e) => doc.stability_skipped = Some(e.to_string()),
                }
            }
            Section::Mixing => {
                let mut opts = MixingOptions::with_seed(seed);
                if let Some(t) = merged.tol {
                    opts.residual_tol = t;
                }
                if let Some(h) = merged.horizon {
                    opts.empirical_horizon = h.max(1);
                }
                doc.mixing = Some(classify_mixing(&operator, &opts)?);
                match strong_stability(&operator, &opts) {
                    Ok(rep) => doc.strong_stability = Some(rep),
                    Err(e @ ergomix::Error::Numerical { .. }) => return Err(e.into()),
                    Err(e) => doc.strong_stability_skipped = Some(e.to_string()),
                }
            }
        }
        timings.insert(section_name(section), start.elapsed().as_secs_f64() * 1e3);
    }

    if args.timings {
        doc.timings_ms = Some(timings);
    }

    let json = serde_json::to_string_pretty(&doc).expect("report serialization");
    emit(args.out.as_deref(), &json)?;
    Ok(ExitCode::SUCCESS)
}

fn section_name(s: Section) -> &'static str {
    match s {
        Section::Predicates => "predicates",
        Section::Dobrushin => "dobrushin",
        Section::Stability => "stability",
        Section::Mixing => "mixing",
    }
}

fn merge_overrides(args: &AnalyzeArgs, from_spec: &AnalysisOverrides) -> AnalysisOverrides {
    AnalysisOverrides {
        seed: args.seed.or(from_spec.seed),
        tol: args.tol.or(from_spec.tol),
        n_max: args.nmax.or(from_spec.n_max),
        horizon: args.horizon.or(from_spec.horizon),
    }
}

fn shift_demo_cmd(dims: &[usize], epsilon: f64, csv: Option<&Path>) -> Result<ExitCode, CliError> {
    let mut escape = String::from("d,n,norm\n");
    for &d in dims {
        let shift = shift_demo::build(d, TraceMode::UnitWeights)?;
        let profile = shift_demo::escape_profile(&shift, d)?;
        for (n, norm) in profile.iter().enumerate() {
            writeln!(escape, "{d},{n},{norm}").unwrap();
        }
    }

    let mut degeneration = String::from("d,epsilon,delta_max\n");
    for row in shift_demo::smoothing_degeneration(dims, epsilon)? {
        writeln!(degeneration, "{},{},{}", row.dim, row.epsilon, row.delta_max).unwrap();
    }

    match csv {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
            write_file(&dir.join("escape_profile.csv"), &escape)?;
            write_file(&dir.join("degeneration.csv"), &degeneration)?;
        }
        None => {
            print!("{escape}");
            println!();
            print!("{degeneration}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn oracle_check(seed: u64, out: Option<&Path>) -> Result<ExitCode, CliError> {
    let mut report = run_agreement_suite(seed);
    // Test hook: corrupt one optimizer value so the failure path (witness
    // serialization, exit code 1) can be exercised end to end.
    if std::env::var_os("ERGOMIX_FAULT_INJECT").is_some() {
        if let Some(case) = report.cases.first_mut() {
            case.optimizer += 1.0;
            case.diff = (case.optimizer - case.oracle).abs();
            case.pass = case.diff <= case.tol;
        }
        report.pass = report.cases.iter().all(|c| c.pass);
        report.worst = report
            .cases
            .iter()
            .max_by(|a, b| a.diff.partial_cmp(&b.diff).unwrap())
            .cloned();
    }
    let json = serde_json::to_string_pretty(&report).expect("report serialization");
    emit(out, &json)?;
    if report.pass {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "oracle disagreement: {}",
            serde_json::to_string(&report.worst).expect("witness serialization")
        );
        Ok(ExitCode::from(EXIT_CHECK_FAILED))
    }
}

fn emit(out: Option<&Path>, json: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_file(path, &format!("{json}\n")),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}
