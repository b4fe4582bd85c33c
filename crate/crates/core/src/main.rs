use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use chronodiar::annotation::Annotation;
use chronodiar::classifiers::{ClassifierConfig, ClassifierKind};
use chronodiar::datagen::GenConfig;
use chronodiar::harness::{self, FileData, RunSettings, SweepConfig};
use chronodiar::io::{parse_rttm, parse_uem, write_report};
use chronodiar::metrics::{self, CollarSemantics, DerReport, Mapping, MetricConfig};
use chronodiar::session::SelfTrainConfig;

/// Streaming speaker diarization with chronological self-training.
#[derive(Parser)]
#[command(name = "chronodiar", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic conversations (embeddings, RTTM, UEM per file).
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Number of files; file i uses seed + i.
        #[arg(long, default_value_t = 1)]
        files: u64,
    },
    /// Evaluate one file under one setting and print a report row.
    Run {
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        rttm: PathBuf,
        #[arg(long)]
        uem: PathBuf,
        #[arg(long, default_value = "nc")]
        classifier: ClassifierKind,
        #[arg(long)]
        adaptive: bool,
        /// Enrollment speech per speaker, in seconds.
        #[arg(long, default_value_t = 1.0)]
        train_seconds: f64,
        #[command(flatten)]
        selftrain: SelfTrainArgs,
        #[command(flatten)]
        scoring: ScoringArgs,
        /// Accepted for reproducibility bookkeeping; the pipeline has no randomness.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = harness::DEFAULT_LANGUAGE)]
        language: String,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep enrollment time over a directory of files.
    Sweep {
        /// Directory holding <id>.jsonl, <id>.rttm and <id>.uem.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_delimiter = ',')]
        train_seconds: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', default_value = "knn,gnb,nc")]
        classifiers: Vec<ClassifierKind>,
        /// Adaptive modes to run.
        #[arg(long, value_delimiter = ',', default_value = "false,true")]
        adaptive: Vec<bool>,
        #[command(flatten)]
        selftrain: SelfTrainArgs,
        #[command(flatten)]
        scoring: ScoringArgs,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = harness::DEFAULT_LANGUAGE)]
        language: String,
        /// Directory for per_file.csv and aggregate.csv; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score hypothesis RTTM against reference RTTM.
    Score {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        hyp: PathBuf,
        #[arg(long)]
        uem: PathBuf,
        #[command(flatten)]
        scoring: ScoringArgs,
    },
}

#[derive(Args)]
struct SelfTrainArgs {
    #[arg(long, default_value_t = 10)]
    batch_size: usize,
    /// Only fold back predictions scoring at least this much.
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Args)]
struct ScoringArgs {
    #[arg(long, default_value_t = metrics::DEFAULT_COLLAR)]
    collar: f64,
    #[arg(long, default_value = "half_each_side")]
    collar_semantics: CollarSemantics,
    /// Score overlapped reference speech too.
    #[arg(long)]
    no_skip_overlap: bool,
    #[arg(long, default_value = "identity")]
    mapping: Mapping,
    /// Largest gap bridged when merging same-label frames into turns.
    #[arg(long, default_value_t = metrics::DEFAULT_MERGE_GAP)]
    merge_gap: f64,
}

impl ScoringArgs {
    fn metric(&self) -> MetricConfig {
        MetricConfig {
            collar: self.collar,
            skip_overlap: !self.no_skip_overlap,
            collar_semantics: self.collar_semantics,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Generate { config, out, seed, files } => generate(&config, &out, seed, files),
        Command::Run {
            embeddings,
            rttm,
            uem,
            classifier,
            adaptive,
            train_seconds,
            selftrain,
            scoring,
            seed: _,
            language,
            out,
        } => {
            let mut file = FileData::load(&embeddings, &rttm, &uem)
                .with_context(|| format!("loading {}", embeddings.display()))?;
            file.language = language;
            let settings = RunSettings {
                classifier: ClassifierConfig::new(classifier),
                selftrain: SelfTrainConfig {
                    batch_size: selftrain.batch_size,
                    score_threshold: selftrain.threshold,
                    adaptive,
                },
                train_seconds,
                fixed_test_start: None,
                metric: scoring.metric(),
                mapping: scoring.mapping,
                merge_gap: scoring.merge_gap,
            };
            let outcome = harness::evaluate_file(&file, &settings)?;
            emit(out.as_deref(), &write_report(&[outcome.row]))
        }
        Command::Sweep {
            data,
            train_seconds,
            classifiers,
            adaptive,
            selftrain,
            scoring,
            jobs,
            seed: _,
            language,
            out,
        } => {
            let mut files = harness::load_dir(&data)?;
            files.iter_mut().for_each(|f| f.language = language.clone());
            let cfg = SweepConfig {
                train_seconds: train_seconds.unwrap_or_else(harness::default_train_seconds),
                classifiers,
                adaptive,
                batch_size: selftrain.batch_size,
                score_threshold: selftrain.threshold,
                metric: scoring.metric(),
                mapping: scoring.mapping,
                merge_gap: scoring.merge_gap,
                parallelism: jobs,
            };
            let result = harness::sweep(&files, &cfg)?;
            let per_file = write_report(&result.rows);
            let aggregate = harness::write_aggregates(&result.aggregates);
            match out {
                Some(dir) => {
                    fs::create_dir_all(&dir)?;
                    fs::write(dir.join("per_file.csv"), per_file)?;
                    fs::write(dir.join("aggregate.csv"), aggregate)?;
                    eprintln!(
                        "{} per-file rows, {} aggregate rows written to {}",
                        result.rows.len(),
                        result.aggregates.len(),
                        dir.display()
                    );
                }
                None => print!("{aggregate}\n{per_file}"),
            }
            Ok(())
        }
        Command::Score { reference, hyp, uem, scoring } => score(&reference, &hyp, &uem, &scoring),
    }
}

fn generate(config: &Path, out: &Path, seed: Option<u64>, files: u64) -> Result<()> {
    let text = fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let mut cfg = GenConfig::from_toml(&text)?;
    if files == 0 {
        bail!("--files must be at least 1");
    }
    let stem = config.file_stem().and_then(|s| s.to_str()).unwrap_or("conv");
    let base = seed.unwrap_or(cfg.seed);
    for i in 0..files {
        cfg.seed = base.wrapping_add(i);
        let id = format!("{stem}-{:04}", cfg.seed);
        let paths = harness::write_generated(&cfg, &id, out)?;
        for p in paths {
            println!("{}", p.display());
        }
    }
    Ok(())
}

fn score(reference: &Path, hyp: &Path, uem: &Path, args: &ScoringArgs) -> Result<()> {
    let refs = parse_rttm(&fs::read_to_string(reference).with_context(|| format!("reading {}", reference.display()))?)?;
    let hyps = parse_rttm(&fs::read_to_string(hyp).with_context(|| format!("reading {}", hyp.display()))?)?;
    let uems = parse_uem(&fs::read_to_string(uem).with_context(|| format!("reading {}", uem.display()))?)?;
    if let Some(id) = hyps.keys().find(|id| !refs.contains_key(*id)) {
        bail!("hypothesis file `{id}` has no reference");
    }
    let cfg = args.metric();
    let empty = Annotation::default();
    let mut reports: BTreeMap<&str, DerReport> = BTreeMap::new();
    for (id, r) in &refs {
        let u = uems.get(id).with_context(|| format!("file `{id}` missing from UEM"))?;
        let h = hyps.get(id).unwrap_or(&empty);
        reports.insert(id, metrics::der(r, h, u, &cfg, args.mapping).with_context(|| format!("scoring `{id}`"))?);
    }
    println!("file,confusion,fa,miss,total,der");
    let line = |name: &str, r: &DerReport| {
        println!(
            "{name},{:.6},{:.6},{:.6},{:.6},{:.6}",
            r.confusion, r.false_alarm, r.miss, r.total, r.der
        )
    };
    for (id, r) in &reports {
        line(id, r);
    }
    let all: Vec<DerReport> = reports.into_values().collect();
    line("ALL", &metrics::corpus_der(&all)?);
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}
