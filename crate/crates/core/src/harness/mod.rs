//! Experiment driver: loads files, runs one setting per file, sweeps
//! enrollment time and aggregates across files.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::annotation::{Annotation, GroundTruthLabel, SpeakerId};
use crate::classifiers::{ClassifierConfig, ClassifierKind};
use crate::datagen::{generate_conversation, GenConfig};
use crate::error::{Error, Result};
use crate::frame::EmbeddingFrame;
use crate::io::{parse_rttm, parse_uem, read_embeddings, write_embeddings, write_rttm, write_uem};
use crate::io::{EmbeddingRecord, ReportRow};
use crate::metrics::{self, DerReport, Mapping, MetricConfig, DEFAULT_MERGE_GAP};
use crate::session::{chronological_split, enrollment_end, run_session, SelfTrainConfig, SplitSpec};
use crate::timeline::{Segment, Timeline};

pub const DEFAULT_LANGUAGE: &str = "synthetic";

/// One conversation ready for evaluation.
#[derive(Debug, Clone)]
pub struct FileData {
    pub id: String,
    pub language: String,
    pub frames: Vec<EmbeddingFrame>,
    pub truth: Vec<GroundTruthLabel>,
    pub reference: Annotation,
    pub uem: Timeline,
}

impl FileData {
    /// Builds a file from parsed records. Records without a truth label
    /// fall back to the reference speakers active at the frame midpoint.
    pub fn from_records(
        id: impl Into<String>,
        records: &[EmbeddingRecord],
        reference: Annotation,
        uem: Timeline,
    ) -> Result<Self> {
        let frames = records.iter().map(EmbeddingRecord::to_frame).collect::<Result<Vec<_>>>()?;
        let truth = records
            .iter()
            .zip(&frames)
            .map(|(r, f)| r.label().unwrap_or_else(|| reference.label_at(f.span().middle())))
            .collect();
        Ok(FileData {
            id: id.into(),
            language: DEFAULT_LANGUAGE.to_owned(),
            frames,
            truth,
            reference,
            uem,
        })
    }

    /// Reads `<id>.jsonl` with the matching entries of an RTTM and UEM file.
    pub fn load(embeddings: &Path, rttm: &Path, uem: &Path) -> Result<Self> {
        let id = embeddings
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::Config(format!("bad embeddings path {}", embeddings.display())))?
            .to_owned();
        let records = read_embeddings(BufReader::new(fs::File::open(embeddings)?))?;
        let mut refs = parse_rttm(&fs::read_to_string(rttm)?)?;
        let mut uems = parse_uem(&fs::read_to_string(uem)?)?;
        let reference = refs
            .remove(&id)
            .ok_or_else(|| Error::Config(format!("file id `{id}` missing from {}", rttm.display())))?;
        let uem = uems
            .remove(&id)
            .ok_or_else(|| Error::Config(format!("file id `{id}` missing from {}", uem.display())))?;
        Self::from_records(id, &records, reference, uem)
    }
}

/// Loads every `<id>.jsonl` in `dir` together with `<id>.rttm` and `<id>.uem`.
pub fn load_dir(dir: &Path) -> Result<Vec<FileData>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "jsonl"));
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Config(format!("no .jsonl files in {}", dir.display())));
    }
    paths
        .iter()
        .map(|p| FileData::load(p, &p.with_extension("rttm"), &p.with_extension("uem")))
        .collect()
}

/// Writes `<id>.jsonl`, `<id>.rttm` and `<id>.uem` for one generated
/// conversation and returns the paths.
pub fn write_generated(cfg: &GenConfig, id: &str, out: &Path) -> Result<[PathBuf; 3]> {
    let conv = generate_conversation(cfg)?;
    fs::create_dir_all(out)?;
    let records: Vec<EmbeddingRecord> = conv
        .frames
        .iter()
        .zip(&conv.truth)
        .map(|(f, t)| EmbeddingRecord::from_frame(f, Some(t)))
        .collect();
    let paths = ["jsonl", "rttm", "uem"].map(|ext| out.join(format!("{id}.{ext}")));
    let mut buf = Vec::new();
    write_embeddings(&mut buf, &records)?;
    fs::write(&paths[0], buf)?;
    fs::write(&paths[1], write_rttm(id, &conv.annotation))?;
    fs::write(&paths[2], write_uem(id, &conv.uem))?;
    Ok(paths)
}

/// Everything that defines one evaluated setting.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub classifier: ClassifierConfig,
    pub selftrain: SelfTrainConfig,
    pub train_seconds: f64,
    pub fixed_test_start: Option<f64>,
    pub metric: MetricConfig,
    pub mapping: Mapping,
    pub merge_gap: f64,
}

impl RunSettings {
    pub fn new(kind: ClassifierKind, adaptive: bool, train_seconds: f64) -> Self {
        RunSettings {
            classifier: ClassifierConfig::new(kind),
            selftrain: SelfTrainConfig {
                adaptive,
                ..Default::default()
            },
            train_seconds,
            fixed_test_start: None,
            metric: MetricConfig::default(),
            mapping: Mapping::Identity,
            merge_gap: DEFAULT_MERGE_GAP,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FileOutcome {
    pub row: ReportRow,
    pub der: DerReport,
    pub hypothesis: Annotation,
    pub predicted: Vec<SpeakerId>,
    pub test_start: usize,
    pub accepted: usize,
    pub rejected: usize,
}

/// Split, self-train over the test region, then score accuracy and DER.
/// DER is scored on the UEM from the first test frame onwards.
pub fn evaluate_file(file: &FileData, s: &RunSettings) -> Result<FileOutcome> {
    let split = chronological_split(
        &file.frames,
        &file.truth,
        &SplitSpec {
            train_seconds: s.train_seconds,
            fixed_test_start: s.fixed_test_start,
            speakers: None,
        },
    )?;
    let test = &file.frames[split.test_start..];
    let first = test.first().ok_or(Error::NoEligibleFrames)?;
    let result = run_session(&split.train, test, s.classifier, s.selftrain)?;
    let predicted: Vec<SpeakerId> = result.predictions.into_iter().map(|p| p.label).collect();
    let accuracy = metrics::accuracy(&predicted, &file.truth[split.test_start..])?;
    let hypothesis = metrics::frames_to_annotation(
        test.iter().map(EmbeddingFrame::span).zip(predicted.iter().cloned()),
        s.merge_gap,
    );
    let horizon = file.uem.extent().map_or(first.start(), |e| e.end()).max(first.start());
    let region = file
        .uem
        .intersection(&Timeline::from_segments([Segment::new(first.start(), horizon + 1.0)?]));
    let der = metrics::der(&file.reference, &hypothesis, &region, &s.metric, s.mapping)?;
    Ok(FileOutcome {
        row: ReportRow {
            file: file.id.clone(),
            language: file.language.clone(),
            classifier: s.classifier.kind,
            adaptive: s.selftrain.adaptive,
            train_seconds: s.train_seconds,
            accuracy,
            confusion: der.confusion_rate,
            fa: der.fa_rate,
            miss: der.miss_rate,
            der: der.der,
        },
        der,
        hypothesis,
        predicted,
        test_start: split.test_start,
        accepted: result.accepted,
        rejected: result.rejected,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub train_seconds: Vec<f64>,
    pub classifiers: Vec<ClassifierKind>,
    pub adaptive: Vec<bool>,
    pub batch_size: usize,
    pub score_threshold: Option<f64>,
    pub metric: MetricConfig,
    pub mapping: Mapping,
    pub merge_gap: f64,
    /// Worker threads; `None` uses every core.
    pub parallelism: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            train_seconds: default_train_seconds(),
            classifiers: vec![ClassifierKind::Knn, ClassifierKind::Gnb, ClassifierKind::Nc],
            adaptive: vec![false, true],
            batch_size: SelfTrainConfig::default().batch_size,
            score_threshold: None,
            metric: MetricConfig::default(),
            mapping: Mapping::Identity,
            merge_gap: DEFAULT_MERGE_GAP,
            parallelism: None,
        }
    }
}

/// 0.5 s, then 1 to 10 s in whole seconds.
pub fn default_train_seconds() -> Vec<f64> {
    std::iter::once(0.5).chain((1..=10).map(f64::from)).collect()
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.train_seconds.is_empty() || self.classifiers.is_empty() || self.adaptive.is_empty() {
            return Err(Error::Config("sweep lists must be nonempty".into()));
        }
        if self.train_seconds.windows(2).any(|w| !(w[0] < w[1])) || !(self.train_seconds[0] > 0.0) {
            return Err(Error::Config("train_seconds must be positive and strictly increasing".into()));
        }
        if self.parallelism == Some(0) {
            return Err(Error::Config("parallelism must be at least 1".into()));
        }
        Ok(())
    }

    fn settings(&self, t: f64, kind: ClassifierKind, adaptive: bool, test_start: f64) -> RunSettings {
        RunSettings {
            classifier: ClassifierConfig::new(kind),
            selftrain: SelfTrainConfig {
                batch_size: self.batch_size,
                score_threshold: self.score_threshold,
                adaptive,
            },
            train_seconds: t,
            fixed_test_start: Some(test_start),
            metric: self.metric,
            mapping: self.mapping,
            merge_gap: self.merge_gap,
        }
    }
}

/// Mean over files of one (classifier, adaptive, t) setting.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub classifier: ClassifierKind,
    pub adaptive: bool,
    pub train_seconds: f64,
    pub files: usize,
    pub accuracy_mean: f64,
    /// Population standard deviation across files.
    pub accuracy_std: f64,
    pub der_mean: f64,
    /// Corpus DER: summed error time over summed reference time.
    pub corpus_der: f64,
}

pub const AGGREGATE_HEADER: [&str; 8] = [
    "classifier",
    "adaptive",
    "train_seconds",
    "files",
    "accuracy_mean",
    "accuracy_std",
    "der_mean",
    "corpus_der",
];

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<ReportRow>,
    pub aggregates: Vec<AggregateRow>,
}

/// Start time of the first frame after the longest enrollment in the
/// sweep, so every setting of a file is tested on the same frames.
pub fn fixed_test_start(file: &FileData, max_train_seconds: f64) -> Result<f64> {
    let speakers = file.truth.iter().filter_map(|l| l.speaker().cloned()).collect();
    let idx = enrollment_end(&file.frames, &file.truth, max_train_seconds, &speakers)?;
    file.frames
        .get(idx)
        .map(EmbeddingFrame::start)
        .ok_or(Error::NoEligibleFrames)
}

pub fn sweep(files: &[FileData], cfg: &SweepConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let max_t = *cfg.train_seconds.last().expect("validated nonempty");
    let starts: Vec<f64> = files
        .iter()
        .map(|f| fixed_test_start(f, max_t))
        .collect::<Result<_>>()?;
    let mut jobs = Vec::new();
    for (fi, start) in starts.iter().enumerate() {
        for &kind in &cfg.classifiers {
            for &adaptive in &cfg.adaptive {
                for &t in &cfg.train_seconds {
                    jobs.push((fi, cfg.settings(t, kind, adaptive, *start)));
                }
            }
        }
    }
    let run = || {
        jobs.par_iter()
            .map(|(fi, s)| evaluate_file(&files[*fi], s))
            .collect::<Result<Vec<_>>>()
    };
    let outcomes = match cfg.parallelism {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    let aggregates = aggregate(&outcomes)?;
    let mut rows: Vec<ReportRow> = outcomes.into_iter().map(|o| o.row).collect();
    rows.sort_by(|a, b| {
        (&a.file, a.classifier, a.adaptive)
            .cmp(&(&b.file, b.classifier, b.adaptive))
            .then(a.train_seconds.total_cmp(&b.train_seconds))
    });
    Ok(SweepOutput { rows, aggregates })
}

/// Groups outcomes by setting, ordered by classifier, adaptive, t.
pub fn aggregate(outcomes: &[FileOutcome]) -> Result<Vec<AggregateRow>> {
    let mut groups: BTreeMap<(ClassifierKind, bool, u64), Vec<&FileOutcome>> = BTreeMap::new();
    for o in outcomes {
        // Bit pattern keys sort correctly for positive floats.
        let key = (o.row.classifier, o.row.adaptive, o.row.train_seconds.to_bits());
        groups.entry(key).or_default().push(o);
    }
    groups
        .into_iter()
        .map(|((classifier, adaptive, t), group)| {
            let n = group.len() as f64;
            let acc: Vec<f64> = group.iter().map(|o| o.row.accuracy).collect();
            let mean = acc.iter().sum::<f64>() / n;
            let var = acc.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
            let ders: Vec<DerReport> = group.iter().map(|o| o.der).collect();
            Ok(AggregateRow {
                classifier,
                adaptive,
                train_seconds: f64::from_bits(t),
                files: group.len(),
                accuracy_mean: mean,
                accuracy_std: var.sqrt(),
                der_mean: metrics::mean_der(&ders).expect("nonempty group"),
                corpus_der: metrics::corpus_der(&ders)?.der,
            })
        })
        .collect()
}

pub fn write_aggregates(rows: &[AggregateRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(AGGREGATE_HEADER).expect("in-memory write");
    for r in rows {
        let f = |x: f64| format!("{x:.6}");
        w.write_record([
            r.classifier.name().to_owned(),
            r.adaptive.to_string(),
            f(r.train_seconds),
            r.files.to_string(),
            f(r.accuracy_mean),
            f(r.accuracy_std),
            f(r.der_mean),
            f(r.corpus_der),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}
