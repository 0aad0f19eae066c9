use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use entrotest::advisor::{suggest_block_length, DEFAULT_TARGET_C};
use entrotest::compression::{GateKind, DEFAULT_ALPHA_EXPONENT};
use entrotest::harness::{
    emit_report, run_experiment, run_single, ExperimentSpec, ReportFormat, SourceConfig, TestConfig,
};
use entrotest::processes::{
    bernoulli_sample, two_faced_sample, Kind, MarkovSpec, Randu, RANDU_SEED,
};
use entrotest::ranking::Discipline;
use entrotest::{BitOrder, BitSequence, Error};

const EXIT_USAGE: u8 = 1;
const EXIT_FAILURES: u8 = 2;

#[derive(Parser)]
#[command(
    name = "entrotest",
    version,
    about = "Compression and ranking tests for random bit sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a sample from a built-in source as raw bytes.
    Generate(GenerateArgs),
    /// Test one file and print the decision as JSON.
    Test(TestArgs),
    /// Suggest a block length for a sample size.
    Advise(AdviseArgs),
    /// Run a test on many samples and count rejections.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    Randu,
    TwoFaced,
    Bernoulli,
    Dir,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    T,
    Tbar,
}

#[derive(Clone, Copy, ValueEnum)]
enum TestArg {
    Bookstack,
    Order,
    Kt,
    KtHat,
    Compress,
}

#[derive(Clone, Copy, ValueEnum)]
enum BitOrderArg {
    Msb,
    Lsb,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Json,
    Csv,
}

#[derive(Args)]
struct MarkovArgs {
    /// Memory of the two-faced source.
    #[arg(long, default_value_t = 6)]
    k: u32,
    /// Probability of repeating the parity bit.
    #[arg(long, default_value_t = 0.2)]
    pi: f64,
    #[arg(long, value_enum, default_value = "t")]
    kind: KindArg,
}

impl MarkovArgs {
    fn spec(&self) -> entrotest::Result<MarkovSpec> {
        let kind = match self.kind {
            KindArg::T => Kind::T,
            KindArg::Tbar => Kind::TBar,
        };
        MarkovSpec::new(self.k, kind, self.pi)
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    source: SourceArg,
    #[arg(long)]
    n_bits: u64,
    /// Seed for the bernoulli and two-faced sources. RANDU always starts
    /// from its fixed seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    markov: MarkovArgs,
}

#[derive(Args)]
struct TestParams {
    /// Block length; chosen by the advisor when absent.
    #[arg(long)]
    s: Option<u32>,
    /// Size of the first subset of positions (two subsets).
    #[arg(long, conflicts_with = "cuts")]
    a1_size: Option<u64>,
    /// Upper ends of every subset, comma separated; the last must be 2^s.
    #[arg(long, value_delimiter = ',')]
    cuts: Option<Vec<u64>>,
    /// Advisor load used when --s is absent.
    #[arg(long, default_value_t = DEFAULT_TARGET_C)]
    c: f64,
    #[arg(long, default_value_t = 2)]
    context_order: u32,
    /// `a` in alpha = 2^-a for the compressor test.
    #[arg(long, default_value_t = DEFAULT_ALPHA_EXPONENT)]
    alpha_exponent: u32,
}

impl TestParams {
    fn config(
        &self,
        test: TestArg,
        command: Option<&str>,
        n_bits: u64,
    ) -> entrotest::Result<TestConfig> {
        let discipline = match test {
            TestArg::Bookstack => Discipline::BookStack,
            TestArg::Order => Discipline::Order,
            TestArg::Kt | TestArg::KtHat => {
                let gate = if matches!(test, TestArg::Kt) {
                    GateKind::Gamma
                } else {
                    GateKind::GammaHat
                };
                return Ok(TestConfig::Kt {
                    context_order: self.context_order,
                    gate,
                });
            }
            TestArg::Compress => {
                let command = command.ok_or_else(|| {
                    Error::Parameter("the compress test needs a compressor command".into())
                })?;
                return Ok(TestConfig::Compressor {
                    command: command.to_string(),
                    alpha_exponent: self.alpha_exponent,
                });
            }
        };
        let mut block_length = self.s;
        let mut cuts = self.cuts.clone();
        if let Some(a1) = self.a1_size {
            // The second cut is 2^s, so s must be fixed here.
            let s = match block_length {
                Some(s) => s,
                None => suggest_block_length(n_bits, self.c)?.suggested_s,
            };
            if s > entrotest::bitstream::MAX_BLOCK_LENGTH {
                return Err(Error::Parameter(format!("block length {s} is too large")));
            }
            block_length = Some(s);
            cuts = Some(vec![a1, 1u64 << s]);
        }
        Ok(TestConfig::Ranking {
            discipline,
            block_length,
            cuts,
            target_c: self.c,
        })
    }
}

#[derive(Args)]
struct TestArgs {
    #[arg(long, value_enum)]
    test: TestArg,
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    /// Compressor command; reads standard input unless it contains `{}`,
    /// which is replaced by the path of the input file.
    #[arg(long)]
    cmd: Option<String>,
    #[arg(long, value_enum, default_value = "msb")]
    bit_order: BitOrderArg,
    #[command(flatten)]
    params: TestParams,
    file: PathBuf,
}

#[derive(Args)]
struct AdviseArgs {
    #[arg(long)]
    n_bits: u64,
    #[arg(long, default_value_t = DEFAULT_TARGET_C)]
    c: f64,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_enum)]
    source: SourceArg,
    #[arg(long, value_enum)]
    test: TestArg,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Bits per trial (ignored for directory sources).
    #[arg(long, default_value_t = 1_000_000)]
    n_bits: u64,
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "table")]
    format: FormatArg,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long)]
    compressor_cmd: Option<String>,
    /// Directory of sample files for `--source dir`, one trial per file.
    #[arg(long, required_if_eq("source", "dir"))]
    input_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "msb")]
    bit_order: BitOrderArg,
    #[command(flatten)]
    markov: MarkovArgs,
    #[command(flatten)]
    params: TestParams,
}

fn bit_order(arg: BitOrderArg) -> BitOrder {
    match arg {
        BitOrderArg::Msb => BitOrder::Msb,
        BitOrderArg::Lsb => BitOrder::Lsb,
    }
}

fn generate(args: &GenerateArgs) -> entrotest::Result<()> {
    let n = usize::try_from(args.n_bits)
        .map_err(|_| Error::Parameter(format!("{} bits do not fit in memory", args.n_bits)))?;
    let bytes = match args.source {
        SourceArg::Randu => Randu::new(RANDU_SEED)?.bytes(n.div_ceil(8)),
        SourceArg::Bernoulli => {
            bernoulli_sample(n, &mut ChaCha20Rng::seed_from_u64(args.seed)).to_bytes()
        }
        SourceArg::TwoFaced => {
            let spec = args.markov.spec()?;
            two_faced_sample(&spec, n, &mut ChaCha20Rng::seed_from_u64(args.seed)).to_bytes()
        }
        SourceArg::Dir => {
            return Err(Error::Parameter("`dir` is not a generator".into()));
        }
    };
    match &args.out {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}

fn test_file(args: &TestArgs) -> entrotest::Result<()> {
    let data = std::fs::read(&args.file)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", args.file.display())))?;
    let seq = BitSequence::from_bytes(&data, bit_order(args.bit_order));
    let config = args
        .params
        .config(args.test, args.cmd.as_deref(), seq.len() as u64)?;
    let outcome = run_single(&seq, Some(&data), &config, args.alpha)?;
    println!("{}", serde_json::to_string(&outcome)?);
    Ok(())
}

fn advise(args: &AdviseArgs) -> entrotest::Result<()> {
    let advice = suggest_block_length(args.n_bits, args.c)?;
    println!("{}", serde_json::to_string(&advice)?);
    Ok(())
}

/// Returns whether any trial failed.
fn experiment(args: &ExperimentArgs) -> entrotest::Result<bool> {
    let source = match args.source {
        SourceArg::Randu => SourceConfig::Randu,
        SourceArg::Bernoulli => SourceConfig::Bernoulli,
        SourceArg::TwoFaced => SourceConfig::TwoFaced(args.markov.spec()?),
        SourceArg::Dir => SourceConfig::Directory {
            path: args.input_dir.clone().expect("clap requires --input-dir"),
            bit_order: bit_order(args.bit_order),
        },
    };
    let test = args
        .params
        .config(args.test, args.compressor_cmd.as_deref(), args.n_bits)?;
    let spec = ExperimentSpec {
        source,
        test,
        trials: args.trials,
        n_bits: args.n_bits,
        alpha: args.alpha,
        master_seed: args.seed,
        workers: args.workers,
    };
    let report = run_experiment(&spec)?;
    let format = match args.format {
        FormatArg::Table => ReportFormat::Table,
        FormatArg::Json => ReportFormat::Json,
        FormatArg::Csv => ReportFormat::Csv,
    };
    print!("{}", emit_report(&report, format)?);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(report.failures > 0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Generate(args) => generate(args).map(|()| false),
        Command::Test(args) => test_file(args).map(|()| false),
        Command::Advise(args) => advise(args).map(|()| false),
        Command::Experiment(args) => experiment(args),
    };
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(EXIT_FAILURES),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parameter(_) => ExitCode::from(EXIT_USAGE),
                _ => ExitCode::from(EXIT_FAILURES),
            }
        }
    }
}
