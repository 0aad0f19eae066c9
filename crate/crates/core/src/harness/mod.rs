//! Experiment driver: generate (or read) many samples, run one test on each
//! at level `α`, and count rejections.
//!
//! Trials run in parallel on a dedicated thread pool. Every trial derives
//! its own state from the experiment spec alone, so results do not depend
//! on the worker count or on scheduling:
//!
//! * Internal random sources seed ChaCha20 with the SplitMix64 output
//!   number `i + 1` of the master seed ([`trial_seed`]).
//! * RANDU trials read disjoint consecutive segments of the single stream
//!   started at `X_0 = 1`; trial `i` starts at output `i·⌈n/8⌉ + 1`.
//! * Directory sources use the files in lexicographic order, one per trial.

mod compressor;
mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::advisor::{suggest_block_length, DEFAULT_TARGET_C};
use crate::bitstream::{BitOrder, BitSequence};
use crate::compression::{external_compressor_test, kt_gate_test, GateKind, GateOutcome};
use crate::error::{param, Error, Result};
use crate::processes::{
    bernoulli_sample, two_faced_sample, MarkovSpec, Randu, RANDU_PERIOD, RANDU_SEED,
};
use crate::ranking::{run_ranking_test, Discipline, PartitionSpec, TestOutcome};
use crate::Decision;

pub use compressor::{measure_compressed_size, FILE_PLACEHOLDER};
pub use report::{emit_report, parse_csv, CsvSummary, ReportFormat};

/// Where trial samples come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SourceConfig {
    Randu,
    TwoFaced(MarkovSpec),
    Bernoulli,
    Directory { path: PathBuf, bit_order: BitOrder },
}

impl SourceConfig {
    pub fn name(&self) -> String {
        match self {
            SourceConfig::Randu => "randu".into(),
            SourceConfig::TwoFaced(spec) => format!(
                "{}({}, {})",
                match spec.kind() {
                    crate::processes::Kind::T => "T",
                    crate::processes::Kind::TBar => "Tbar",
                },
                spec.memory(),
                spec.pi()
            ),
            SourceConfig::Bernoulli => "bernoulli".into(),
            SourceConfig::Directory { path, .. } => path.display().to_string(),
        }
    }
}

/// The test applied to every sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestConfig {
    /// Book-stack or order test. `block_length: None` asks the advisor with
    /// load `target_c`; `cuts: None` uses `|A_1| = ⌈5·√S⌉`.
    Ranking {
        discipline: Discipline,
        block_length: Option<u32>,
        cuts: Option<Vec<u64>>,
        target_c: f64,
    },
    /// Built-in KT code with the chosen critical value.
    Kt { context_order: u32, gate: GateKind },
    /// External compressor judged by the byte rule with `α = 2^(−a)`.
    Compressor {
        command: String,
        alpha_exponent: u32,
    },
}

impl TestConfig {
    pub fn ranking(discipline: Discipline) -> Self {
        TestConfig::Ranking {
            discipline,
            block_length: None,
            cuts: None,
            target_c: DEFAULT_TARGET_C,
        }
    }

    pub fn name(&self) -> String {
        match self {
            TestConfig::Ranking { discipline, .. } => discipline.name().into(),
            TestConfig::Kt {
                gate: GateKind::Gamma,
                ..
            } => "kt".into(),
            TestConfig::Kt {
                gate: GateKind::GammaHat,
                ..
            } => "kt-hat".into(),
            TestConfig::Compressor { .. } => "compress".into(),
        }
    }

    /// Human-readable parameter summary.
    pub fn describe(&self) -> String {
        match self {
            TestConfig::Ranking {
                block_length,
                cuts,
                target_c,
                ..
            } => {
                let s = block_length.map_or(format!("advised (c={target_c})"), |s| s.to_string());
                let cuts = match (cuts, block_length) {
                    (Some(c), _) => format!("cuts={c:?}"),
                    (None, Some(s)) => {
                        format!("|A1|={}", crate::ranking::default_first_size(1u64 << s))
                    }
                    (None, None) => "|A1|=5*sqrt(2^s)".into(),
                };
                format!("s={s}, {cuts}")
            }
            TestConfig::Kt { context_order, .. } => format!("context order={context_order}"),
            TestConfig::Compressor {
                command,
                alpha_exponent,
            } => {
                format!("cmd=`{command}`, alpha=2^-{alpha_exponent}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub source: SourceConfig,
    pub test: TestConfig,
    pub trials: usize,
    /// Bits per trial; ignored for directory sources, which use whole files.
    pub n_bits: u64,
    pub alpha: f64,
    pub master_seed: u64,
    /// Worker threads; 0 lets the pool pick.
    pub workers: usize,
}

/// A gate decision together with what produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateRecord {
    pub test: String,
    pub n_bits: u64,
    pub alpha: f64,
    #[serde(flatten)]
    pub outcome: GateOutcome,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub context_order: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub compressed_bytes: Option<u64>,
}

/// Result of running one test on one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Outcome {
    Ranking(TestOutcome),
    Gate(GateRecord),
}

impl Outcome {
    pub fn decision(&self) -> Decision {
        match self {
            Outcome::Ranking(o) => o.decision,
            Outcome::Gate(g) => g.outcome.decision,
        }
    }
}

/// One row of an experiment report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    /// ChaCha20 seed for internal random sources.
    pub seed: Option<u64>,
    /// File name or stream offset the sample came from.
    pub input: Option<String>,
    pub decision: Option<Decision>,
    /// `x²` for ranking tests, observed length in bits for gates.
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    /// Critical value in bits for gates.
    pub critical_value: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub rejections: usize,
    pub trials: usize,
    pub failures: usize,
    pub outcomes: Vec<TrialRecord>,
    pub warnings: Vec<String>,
    pub wall_time_secs: f64,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output number `trial + 1` for `master_seed`. Distinct trials
/// get distinct seeds because the finalizer is a bijection.
pub fn trial_seed(master_seed: u64, trial: usize) -> u64 {
    let mut z = master_seed.wrapping_add(GOLDEN_GAMMA.wrapping_mul(trial as u64 + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `test` on a sample. `raw` is the byte form handed to external
/// compressors; it defaults to the msb-first packing of `seq`.
pub fn run_single(
    seq: &BitSequence,
    raw: Option<&[u8]>,
    test: &TestConfig,
    alpha: f64,
) -> Result<Outcome> {
    match test {
        TestConfig::Ranking {
            discipline,
            block_length,
            cuts,
            target_c,
        } => {
            let s = match block_length {
                Some(s) => *s,
                None => suggest_block_length(seq.len() as u64, *target_c)?.suggested_s,
            };
            let partition = match cuts {
                Some(cuts) => Some(PartitionSpec::new(1u64 << s, cuts.clone())?),
                None => None,
            };
            run_ranking_test(seq, *discipline, s, partition, alpha).map(Outcome::Ranking)
        }
        TestConfig::Kt {
            context_order,
            gate,
        } => {
            let outcome = kt_gate_test(seq, *context_order, alpha, *gate)?;
            Ok(Outcome::Gate(GateRecord {
                test: test.name(),
                n_bits: seq.len() as u64,
                alpha,
                outcome,
                context_order: Some(*context_order),
                compressed_bytes: None,
            }))
        }
        TestConfig::Compressor {
            command,
            alpha_exponent,
        } => {
            let packed;
            let bytes = match raw {
                Some(b) => b,
                None => {
                    packed = seq.to_bytes();
                    &packed
                }
            };
            let compressed = measure_compressed_size(command, bytes)?;
            let outcome =
                external_compressor_test(bytes.len() as u64, compressed, *alpha_exponent)?;
            Ok(Outcome::Gate(GateRecord {
                test: test.name(),
                n_bits: bytes.len() as u64 * 8,
                alpha: (-(*alpha_exponent as f64)).exp2(),
                outcome,
                context_order: None,
                compressed_bytes: Some(compressed),
            }))
        }
    }
}

fn validate(spec: &ExperimentSpec) -> Result<()> {
    if spec.trials == 0 {
        return param("an experiment needs at least one trial");
    }
    if !(spec.alpha > 0.0 && spec.alpha < 1.0) {
        return param(format!(
            "alpha = {} must lie strictly between 0 and 1",
            spec.alpha
        ));
    }
    if !matches!(spec.source, SourceConfig::Directory { .. }) && spec.n_bits == 0 {
        return param("n_bits must be positive");
    }
    Ok(())
}

fn list_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        if entry.file_type()?.is_file() {
            files.push(entry.path());
        }
    }
    files.sort();
    if files.is_empty() {
        return param(format!("no files in {}", dir.display()));
    }
    Ok(files)
}

struct Sample {
    bits: BitSequence,
    raw: Option<Vec<u8>>,
    seed: Option<u64>,
    input: Option<String>,
}

/// Warns when RANDU trials together need more outputs than one period.
fn randu_period_warning(spec: &ExperimentSpec) -> Option<String> {
    if spec.source != SourceConfig::Randu {
        return None;
    }
    let bytes = spec.trials as u64 * spec.n_bits.div_ceil(8);
    (bytes > RANDU_PERIOD).then(|| {
        format!("{bytes} RANDU outputs requested but the period is {RANDU_PERIOD}; segments repeat")
    })
}

fn make_sample(spec: &ExperimentSpec, trial: usize, files: &[PathBuf]) -> Result<Sample> {
    let n = spec.n_bits as usize;
    match &spec.source {
        SourceConfig::Randu => {
            let bytes_per_trial = n.div_ceil(8) as u64;
            let offset = trial as u64 * bytes_per_trial;
            let mut gen = Randu::new(RANDU_SEED)?;
            gen.skip(offset);
            Ok(Sample {
                bits: gen.bits(n),
                raw: None,
                seed: None,
                input: Some(format!("randu+{offset}")),
            })
        }
        SourceConfig::TwoFaced(markov) => {
            let seed = trial_seed(spec.master_seed, trial);
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            Ok(Sample {
                bits: two_faced_sample(markov, n, &mut rng),
                raw: None,
                seed: Some(seed),
                input: None,
            })
        }
        SourceConfig::Bernoulli => {
            let seed = trial_seed(spec.master_seed, trial);
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            Ok(Sample {
                bits: bernoulli_sample(n, &mut rng),
                raw: None,
                seed: Some(seed),
                input: None,
            })
        }
        SourceConfig::Directory { bit_order, .. } => {
            let path = &files[trial];
            let data = std::fs::read(path)?;
            Ok(Sample {
                bits: BitSequence::from_bytes(&data, *bit_order),
                raw: Some(data),
                seed: None,
                input: Some(
                    path.file_name()
                        .map(|f| f.to_string_lossy().into_owned())
                        .unwrap_or_default(),
                ),
            })
        }
    }
}

fn run_trial(spec: &ExperimentSpec, trial: usize, files: &[PathBuf]) -> TrialRecord {
    let mut record = TrialRecord {
        trial,
        seed: None,
        input: None,
        decision: None,
        statistic: None,
        p_value: None,
        critical_value: None,
        error: None,
    };
    let sample = match make_sample(spec, trial, files) {
        Ok(s) => s,
        Err(e) => {
            record.error = Some(e.to_string());
            return record;
        }
    };
    record.seed = sample.seed;
    record.input = sample.input;
    match run_single(&sample.bits, sample.raw.as_deref(), &spec.test, spec.alpha) {
        Ok(Outcome::Ranking(o)) => {
            record.decision = Some(o.decision);
            record.statistic = Some(o.statistic_x2);
            record.p_value = Some(o.p_value);
        }
        Ok(Outcome::Gate(g)) => {
            record.decision = Some(g.outcome.decision);
            record.statistic = Some(g.outcome.observed_length_bits);
            record.critical_value = Some(g.outcome.critical_value_bits);
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record
}

/// Runs every trial of `spec` and tallies rejections. Trials that fail are
/// recorded with their error and counted in `failures`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    validate(spec)?;
    let start = Instant::now();
    let mut spec = spec.clone();
    let mut warnings = Vec::new();
    let files = match &spec.source {
        SourceConfig::Directory { path, .. } => {
            let files = list_files(path)?;
            spec.trials = files.len();
            files
        }
        _ => Vec::new(),
    };
    warnings.extend(randu_period_warning(&spec));

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<TrialRecord> = pool.install(|| {
        (0..spec.trials)
            .into_par_iter()
            .map(|trial| run_trial(&spec, trial, &files))
            .collect()
    });

    let rejections = outcomes
        .iter()
        .filter(|r| r.decision == Some(Decision::Reject))
        .count();
    let failures = outcomes.iter().filter(|r| r.error.is_some()).count();
    Ok(ExperimentReport {
        trials: spec.trials,
        spec,
        rejections,
        failures,
        outcomes,
        warnings,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::Kind;

    fn bernoulli_spec(trials: usize) -> ExperimentSpec {
        ExperimentSpec {
            source: SourceConfig::Bernoulli,
            test: TestConfig::ranking(Discipline::BookStack),
            trials,
            n_bits: 20_000,
            alpha: 0.01,
            master_seed: 77,
            workers: 2,
        }
    }

    #[test]
    fn seeds_are_distinct() {
        let seeds: std::collections::HashSet<u64> =
            (0..10_000).map(|i| trial_seed(123, i)).collect();
        assert_eq!(seeds.len(), 10_000);
    }

    #[test]
    fn reproducible_across_worker_counts() {
        let mut spec = bernoulli_spec(24);
        let a = run_experiment(&spec).unwrap();
        spec.workers = 5;
        let b = run_experiment(&spec).unwrap();
        assert_eq!(a.outcomes, b.outcomes);
        assert_eq!(a.rejections, b.rejections);
    }

    #[test]
    fn trial_order_irrelevant() {
        let spec = bernoulli_spec(12);
        let report = run_experiment(&spec).unwrap();
        let reversed: Vec<TrialRecord> = (0..12).rev().map(|i| run_trial(&spec, i, &[])).collect();
        let rejections = reversed
            .iter()
            .filter(|r| r.decision == Some(Decision::Reject))
            .count();
        assert_eq!(rejections, report.rejections);
        for r in reversed {
            assert_eq!(r, report.outcomes[r.trial]);
        }
    }

    #[test]
    fn randu_segments_are_disjoint() {
        let spec = ExperimentSpec {
            source: SourceConfig::Randu,
            n_bits: 80,
            ..bernoulli_spec(3)
        };
        let s0 = make_sample(&spec, 0, &[]).unwrap().bits;
        let s1 = make_sample(&spec, 1, &[]).unwrap().bits;
        let mut gen = Randu::new(1).unwrap();
        let whole = gen.bits(160);
        assert_eq!(s0.bits(), &whole.bits()[..80]);
        assert_eq!(s1.bits(), &whole.bits()[80..]);
    }

    #[test]
    fn warns_past_randu_period() {
        let mut spec = ExperimentSpec {
            source: SourceConfig::Randu,
            n_bits: 8 * (1 << 27),
            trials: 4,
            ..bernoulli_spec(4)
        };
        assert!(randu_period_warning(&spec).is_none());
        spec.trials = 5;
        assert!(randu_period_warning(&spec).is_some());
        spec.source = SourceConfig::Bernoulli;
        assert!(randu_period_warning(&spec).is_none());
    }

    #[test]
    fn failures_are_recorded() {
        let spec = ExperimentSpec {
            test: TestConfig::Ranking {
                discipline: Discipline::Order,
                block_length: Some(30),
                cuts: None,
                target_c: 5.0,
            },
            n_bits: 20,
            ..bernoulli_spec(4)
        };
        let report = run_experiment(&spec).unwrap();
        assert_eq!(report.failures, 4);
        assert_eq!(report.rejections, 0);
        assert!(report.outcomes.iter().all(|r| r.error.is_some()));
    }

    #[test]
    fn invalid_specs() {
        assert!(run_experiment(&bernoulli_spec(0)).is_err());
        let mut spec = bernoulli_spec(1);
        spec.alpha = 0.0;
        assert!(run_experiment(&spec).is_err());
    }

    #[test]
    fn two_faced_low_memory_detected() {
        let spec = ExperimentSpec {
            source: SourceConfig::TwoFaced(MarkovSpec::new(1, Kind::T, 0.2).unwrap()),
            test: TestConfig::Kt {
                context_order: 1,
                gate: GateKind::GammaHat,
            },
            n_bits: 10_000,
            ..bernoulli_spec(5)
        };
        let report = run_experiment(&spec).unwrap();
        assert_eq!(report.rejections, 5);
    }

    #[test]
    fn directory_source() {
        let dir = std::env::temp_dir().join(format!("entrotest-dir-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("b.bin"), vec![0u8; 4000]).unwrap();
        std::fs::write(dir.join("a.bin"), Randu::new(1).unwrap().bytes(4000)).unwrap();
        let spec = ExperimentSpec {
            source: SourceConfig::Directory {
                path: dir.clone(),
                bit_order: BitOrder::Msb,
            },
            test: TestConfig::Compressor {
                command: "cat".into(),
                alpha_exponent: 7,
            },
            trials: 1,
            n_bits: 0,
            ..bernoulli_spec(1)
        };
        let report = run_experiment(&spec).unwrap();
        std::fs::remove_dir_all(&dir).unwrap();
        assert_eq!(report.trials, 2);
        assert_eq!(report.outcomes[0].input.as_deref(), Some("a.bin"));
        assert_eq!(report.rejections, 0);
    }
}
