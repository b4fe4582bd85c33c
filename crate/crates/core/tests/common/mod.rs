//! Independent reference implementations used by the integration and
//! acceptance tests. They favour obviousness over speed.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use chronodiar::classifiers::{LabeledSample, ModelState};
use chronodiar::metrics::{CollarSemantics, MetricConfig};
use chronodiar::{Annotation, EmbeddingFrame, GroundTruthLabel, SpeakerId, Timeline, UnitVec};
use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Components {
    pub confusion: f64,
    pub fa: f64,
    pub miss: f64,
    pub total: f64,
}

fn active(ann: &Annotation, t: f64) -> BTreeSet<String> {
    ann.turns()
        .iter()
        .filter(|tr| tr.segment.start() < t && t < tr.segment.end())
        .map(|tr| tr.speaker.as_str().to_owned())
        .collect()
}

fn collar_width(cfg: &MetricConfig) -> f64 {
    match cfg.collar_semantics {
        CollarSemantics::HalfEachSide => cfg.collar / 2.0,
        CollarSemantics::FullEachSide => cfg.collar,
    }
}

/// Instants where anything relevant to scoring can change.
fn breakpoints(reference: &Annotation, hypothesis: &Annotation, uem: &Timeline, w: f64) -> Vec<f64> {
    let mut pts = Vec::new();
    for tr in reference.turns() {
        for b in [tr.segment.start(), tr.segment.end()] {
            pts.extend([b, b - w, b + w]);
        }
    }
    for tr in hypothesis.turns() {
        pts.extend([tr.segment.start(), tr.segment.end()]);
    }
    for s in uem.segments() {
        pts.extend([s.start(), s.end()]);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn scored(reference: &Annotation, uem: &Timeline, cfg: &MetricConfig, w: f64, m: f64) -> bool {
    let in_uem = uem.segments().iter().any(|s| s.start() < m && m < s.end());
    let near_boundary = reference
        .turns()
        .iter()
        .any(|tr| (m - tr.segment.start()).abs() < w || (m - tr.segment.end()).abs() < w);
    let overlapped = cfg.skip_overlap && active(reference, m).len() >= 2;
    in_uem && !near_boundary && !overlapped
}

/// Walks every elementary interval between breakpoints and classifies
/// its midpoint. `mapping` renames hypothesis labels; labels mapped to
/// `None` keep a private name so they never match a reference speaker.
pub fn brute_force_der(
    reference: &Annotation,
    hypothesis: &Annotation,
    uem: &Timeline,
    cfg: &MetricConfig,
    mapping: Option<&BTreeMap<String, Option<String>>>,
) -> Components {
    let w = collar_width(cfg);
    let pts = breakpoints(reference, hypothesis, uem, w);
    let mut c = Components::default();
    for win in pts.windows(2) {
        let (a, b) = (win[0], win[1]);
        let m = 0.5 * (a + b);
        if !scored(reference, uem, cfg, w, m) {
            continue;
        }
        let r = active(reference, m);
        let h: BTreeSet<String> = active(hypothesis, m)
            .into_iter()
            .map(|l| match mapping {
                None => l,
                Some(map) => map[&l].clone().unwrap_or_else(|| format!("\u{0}unmapped:{l}")),
            })
            .collect();
        let dur = b - a;
        let (nr, nh) = (r.len() as f64, h.len() as f64);
        let correct = r.intersection(&h).count() as f64;
        c.miss += (nr - nh).max(0.0) * dur;
        c.fa += (nh - nr).max(0.0) * dur;
        c.confusion += (nr.min(nh) - correct) * dur;
        c.total += nr * dur;
    }
    c
}

/// Co-occurrence time of every (hyp, ref) label pair inside the support.
pub fn overlap_weights(
    reference: &Annotation,
    hypothesis: &Annotation,
    uem: &Timeline,
    cfg: &MetricConfig,
) -> BTreeMap<(String, String), f64> {
    let w = collar_width(cfg);
    let pts = breakpoints(reference, hypothesis, uem, w);
    let mut out = BTreeMap::new();
    for win in pts.windows(2) {
        let m = 0.5 * (win[0] + win[1]);
        if !scored(reference, uem, cfg, w, m) {
            continue;
        }
        for h in active(hypothesis, m) {
            for r in active(reference, m) {
                *out.entry((h.clone(), r)).or_insert(0.0) += win[1] - win[0];
            }
        }
    }
    out
}

/// Largest total weight over every one-to-one partial map hyp → ref.
pub fn exhaustive_best_weight(hyps: &[String], refs: &[String], weight: &BTreeMap<(String, String), f64>) -> f64 {
    fn go(i: usize, hyps: &[String], refs: &[String], used: &mut Vec<bool>, weight: &BTreeMap<(String, String), f64>) -> f64 {
        if i == hyps.len() {
            return 0.0;
        }
        let mut best = go(i + 1, hyps, refs, used, weight);
        for j in 0..refs.len() {
            if !used[j] {
                used[j] = true;
                let w = weight.get(&(hyps[i].clone(), refs[j].clone())).copied().unwrap_or(0.0);
                best = best.max(w + go(i + 1, hyps, refs, used, weight));
                used[j] = false;
            }
        }
        best
    }
    go(0, hyps, refs, &mut vec![false; refs.len()], weight)
}

pub fn mapping_weight(map: &BTreeMap<SpeakerId, Option<SpeakerId>>, weight: &BTreeMap<(String, String), f64>) -> f64 {
    map.iter()
        .filter_map(|(h, r)| r.as_ref().map(|r| (h.as_str().to_owned(), r.as_str().to_owned())))
        .map(|k| weight.get(&k).copied().unwrap_or(0.0))
        .sum()
}

/// Random annotation on a 0.25 s grid inside [0, horizon).
pub fn random_annotation<R: Rng>(rng: &mut R, labels: &[&str], horizon: usize) -> Annotation {
    let mut turns = Vec::new();
    for l in labels {
        let mut grid: Vec<usize> = (0..=horizon * 4).collect();
        grid.shuffle(rng);
        let n = 2 * rng.random_range(1..=3);
        let mut cuts: Vec<usize> = grid[..n].to_vec();
        cuts.sort();
        for p in cuts.chunks(2) {
            turns.push((p[0] as f64 * 0.25, p[1] as f64 * 0.25, l.to_string()));
        }
    }
    Annotation::from_pairs(turns.into_iter().filter(|(a, b, _)| b > a)).unwrap()
}

pub fn random_unit<R: Rng>(rng: &mut R, d: usize) -> UnitVec {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        if let Ok(u) = UnitVec::new(v) {
            return u;
        }
    }
}

pub fn random_samples<R: Rng>(rng: &mut R, n: usize, d: usize, classes: &[&str]) -> Vec<LabeledSample> {
    (0..n)
        .map(|i| {
            // Every class gets at least one sample.
            let c = if i < classes.len() { i } else { rng.random_range(0..classes.len()) };
            LabeledSample::enrollment(random_unit(rng, d), SpeakerId::from(classes[c]))
        })
        .collect()
}

fn cos_dist(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    1.0 - dot / (na * nb)
}

/// Full sort of every stored sample, majority vote over the first k,
/// ties to the smallest label.
pub fn brute_force_knn(samples: &[LabeledSample], k: usize, x: &UnitVec) -> (String, BTreeMap<String, f64>) {
    let mut order: Vec<(f64, usize)> = samples
        .iter()
        .enumerate()
        .map(|(i, s)| (cos_dist(s.vector.as_slice(), x.as_slice()), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let k = k.min(samples.len());
    let mut votes: BTreeMap<String, f64> = samples.iter().map(|s| (s.label.as_str().to_owned(), 0.0)).collect();
    for &(_, i) in &order[..k] {
        *votes.get_mut(samples[i].label.as_str()).unwrap() += 1.0;
    }
    let best = votes
        .iter()
        .fold(None::<(&String, f64)>, |acc, (l, &v)| match acc {
            Some((_, bv)) if bv >= v => acc,
            _ => Some((l, v)),
        })
        .unwrap()
        .0
        .clone();
    let post = votes.iter().map(|(l, v)| (l.clone(), v / k as f64)).collect();
    (best, post)
}

/// Direct two-pass Gaussian naive Bayes posteriors.
pub fn two_pass_gnb(samples: &[LabeledSample], var_smoothing: f64, x: &UnitVec) -> BTreeMap<String, f64> {
    let d = x.dim();
    let mean_var = |rows: &[&[f64]]| {
        let n = rows.len() as f64;
        let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let var: Vec<f64> = (0..d)
            .map(|j| rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n)
            .collect();
        (mean, var)
    };
    let all: Vec<&[f64]> = samples.iter().map(|s| s.vector.as_slice()).collect();
    let (_, pooled) = mean_var(&all);
    let eps = var_smoothing * pooled.iter().cloned().fold(0.0, f64::max);
    let mut by_class: BTreeMap<String, Vec<&[f64]>> = BTreeMap::new();
    for s in samples {
        by_class.entry(s.label.as_str().to_owned()).or_default().push(s.vector.as_slice());
    }
    let total = samples.len() as f64;
    let logs: BTreeMap<String, f64> = by_class
        .iter()
        .map(|(c, rows)| {
            let (mu, var) = mean_var(rows);
            let mut ll = (rows.len() as f64 / total).ln();
            for j in 0..d {
                let v = (var[j] + eps).max(1e-9);
                ll += -0.5 * (2.0 * std::f64::consts::PI * v).ln() - (x.as_slice()[j] - mu[j]).powi(2) / (2.0 * v);
            }
            (c.clone(), ll)
        })
        .collect();
    let max = logs.values().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = logs.values().map(|l| (l - max).exp()).sum();
    logs.into_iter().map(|(c, l)| (c, (l - max).exp() / z)).collect()
}

/// Random two-or-three-speaker stream with truth, for session tests.
pub fn random_stream<R: Rng>(rng: &mut R, n: usize, d: usize) -> (Vec<EmbeddingFrame>, Vec<GroundTruthLabel>) {
    let labels = ["A", "B", "C"];
    let n_spk = rng.random_range(2..=3);
    let centres: Vec<UnitVec> = (0..n_spk).map(|_| random_unit(rng, d)).collect();
    let mut frames = Vec::with_capacity(n);
    let mut truth = Vec::with_capacity(n);
    let mut spk = 0;
    for i in 0..n {
        // Guarantee every speaker appears early, then switch at random.
        if i < 2 * n_spk {
            spk = i / 2;
        } else if rng.random_bool(0.15) {
            spk = rng.random_range(0..n_spk);
        }
        let noise = random_unit(rng, d);
        let v: Vec<f64> = centres[spk]
            .as_slice()
            .iter()
            .zip(noise.as_slice())
            .map(|(c, e)| c + 0.6 * e)
            .collect();
        let t = i as f64 * 0.2;
        frames.push(EmbeddingFrame::new(t, t + 0.2, v).unwrap());
        truth.push(GroundTruthLabel::Speaker(SpeakerId::from(labels[spk])));
    }
    (frames, truth)
}

pub fn labels_of(model: &ModelState) -> Vec<String> {
    model.classes().iter().map(|c| c.as_str().to_owned()).collect()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-12)
}

pub struct ScorerCase {
    pub name: &'static str,
    pub reference: Annotation,
    pub hypothesis: Annotation,
    pub uem: Timeline,
    pub cfg: MetricConfig,
    pub optimal: bool,
    /// Hand-computed (confusion, fa, miss, total) when known.
    pub expected: Option<(f64, f64, f64, f64)>,
}

fn ann(pairs: &[(f64, f64, &str)]) -> Annotation {
    Annotation::from_pairs(pairs.iter().map(|&(a, b, s)| (a, b, s))).unwrap()
}

fn uem(a: f64, b: f64) -> Timeline {
    Timeline::from_segments([chronodiar::Segment::new(a, b).unwrap()])
}

fn no_collar() -> MetricConfig {
    MetricConfig {
        collar: 0.0,
        ..Default::default()
    }
}

/// Ten small reference/hypothesis pairs covering each error type,
/// collars, overlap handling and label mapping.
pub fn hand_cases() -> Vec<ScorerCase> {
    let case = |name, r: &[(f64, f64, &str)], h: &[(f64, f64, &str)], u: (f64, f64), cfg, optimal, expected| ScorerCase {
        name,
        reference: ann(r),
        hypothesis: ann(h),
        uem: uem(u.0, u.1),
        cfg,
        optimal,
        expected,
    };
    vec![
        case(
            "partial_confusion",
            &[(0.0, 6.0, "A")],
            &[(0.0, 4.0, "A"), (4.0, 6.0, "B")],
            (0.0, 10.0),
            no_collar(),
            false,
            Some((2.0, 0.0, 0.0, 6.0)),
        ),
        case(
            "perfect",
            &[(0.0, 3.0, "A"), (3.0, 7.0, "B")],
            &[(0.0, 3.0, "A"), (3.0, 7.0, "B")],
            (0.0, 10.0),
            MetricConfig::default(),
            false,
            Some((0.0, 0.0, 0.0, 6.5)),
        ),
        case(
            "pure_miss",
            &[(1.0, 5.0, "A")],
            &[],
            (0.0, 10.0),
            no_collar(),
            false,
            Some((0.0, 0.0, 4.0, 4.0)),
        ),
        case(
            "false_alarm_in_silence",
            &[(0.0, 2.0, "A")],
            &[(0.0, 2.0, "A"), (5.0, 8.0, "B")],
            (0.0, 10.0),
            no_collar(),
            false,
            Some((0.0, 3.0, 0.0, 2.0)),
        ),
        case(
            "uem_crops_errors",
            &[(0.0, 10.0, "A")],
            &[(0.0, 10.0, "B")],
            (2.0, 5.0),
            no_collar(),
            false,
            Some((3.0, 0.0, 0.0, 3.0)),
        ),
        case(
            "collar_forgives_jitter",
            &[(2.0, 8.0, "A")],
            &[(2.1, 7.9, "A")],
            (0.0, 10.0),
            MetricConfig::default(),
            false,
            Some((0.0, 0.0, 0.0, 5.75)),
        ),
        case(
            "full_collar",
            &[(2.0, 8.0, "A")],
            &[(1.0, 8.0, "A")],
            (0.0, 10.0),
            MetricConfig {
                collar: 0.5,
                collar_semantics: CollarSemantics::FullEachSide,
                ..Default::default()
            },
            false,
            Some((0.0, 0.5, 0.0, 5.0)),
        ),
        case(
            "overlap_skipped",
            &[(0.0, 5.0, "A"), (3.0, 8.0, "B")],
            &[(0.0, 8.0, "A")],
            (0.0, 10.0),
            no_collar(),
            false,
            Some((3.0, 0.0, 0.0, 6.0)),
        ),
        case(
            "overlap_scored",
            &[(0.0, 5.0, "A"), (3.0, 8.0, "B")],
            &[(0.0, 8.0, "A")],
            (0.0, 10.0),
            MetricConfig {
                skip_overlap: false,
                ..no_collar()
            },
            false,
            Some((3.0, 0.0, 2.0, 10.0)),
        ),
        case(
            "optimal_with_extra_label",
            &[(0.0, 5.0, "A"), (5.0, 10.0, "B")],
            &[(0.0, 4.0, "X"), (4.0, 9.0, "Y"), (9.0, 10.0, "Z")],
            (0.0, 10.0),
            no_collar(),
            true,
            Some((2.0, 0.0, 0.0, 10.0)),
        ),
    ]
}

use chronodiar::classifiers::{ClassifierConfig, ClassifierKind, Model};
use chronodiar::session::{chronological_split, run_session, SelfTrainConfig, SplitSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Trial = Result<(), String>;

/// Random partition of a random sample list into batches; the batched
/// model must match one fit over everything.
pub fn incremental_trial(seed: u64) -> Trial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.random_range(1..=8);
    let n = rng.random_range(3..=200);
    let classes = ["A", "B", "C"];
    let samples = random_samples(&mut rng, n, d, &classes);
    let first = rng.random_range(classes.len()..=n);
    let mut cuts = vec![first];
    while *cuts.last().unwrap() < n {
        let last = *cuts.last().unwrap();
        cuts.push((last + rng.random_range(1..=20)).min(n));
    }
    for kind in [ClassifierKind::Nc, ClassifierKind::Gnb, ClassifierKind::Knn] {
        let cfg = ClassifierConfig::new(kind);
        let batch = ModelState::fit(cfg, &samples).map_err(|e| e.to_string())?;
        let mut inc = ModelState::fit(cfg, &samples[..first]).map_err(|e| e.to_string())?;
        for w in cuts.windows(2) {
            inc.partial_update(&samples[w[0]..w[1]]).map_err(|e| e.to_string())?;
        }
        match (inc.model(), batch.model()) {
            (Model::Nc(a), Model::Nc(b)) => {
                for c in 0..classes.len() {
                    for (x, y) in a.centroid(c).iter().zip(b.centroid(c)) {
                        if (x - y).abs() > 1e-9 {
                            return Err(format!("seed {seed}: NC centroid {x} vs {y}"));
                        }
                    }
                }
            }
            (Model::Gnb(a), Model::Gnb(b)) => {
                let pairs = (0..classes.len())
                    .map(|c| (a.class_moments(c), b.class_moments(c)))
                    .chain(std::iter::once((a.pooled_moments(), b.pooled_moments())));
                for (ma, mb) in pairs {
                    if ma.count != mb.count {
                        return Err(format!("seed {seed}: GNB count"));
                    }
                    for (x, y) in ma.mean.iter().zip(&mb.mean).chain(ma.m2.iter().zip(&mb.m2)) {
                        // Entries of unit vectors are bounded by 1, which sets
                        // the scale for moments that cancel to zero.
                        if (x - y).abs() > 1e-9 * x.abs().max(y.abs()).max(1.0) {
                            return Err(format!("seed {seed}: GNB moment {x} vs {y}"));
                        }
                    }
                }
            }
            (Model::Knn(a), Model::Knn(b)) => {
                if a != b {
                    return Err(format!("seed {seed}: KNN store differs"));
                }
            }
            _ => unreachable!(),
        }
    }
    Ok(())
}

/// KNN (k = 1 and k = 3) against a full sort of the stored samples.
pub fn knn_trial(seed: u64) -> Trial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.random_range(2..=8);
    let n = rng.random_range(1..=200);
    let samples = random_samples(&mut rng, n, d, &["A", "B", "C"][..n.min(3)]);
    for k in [1, 3] {
        let cfg = ClassifierConfig {
            k,
            ..ClassifierConfig::new(ClassifierKind::Knn)
        };
        let model = ModelState::fit(cfg, &samples).map_err(|e| e.to_string())?;
        for _ in 0..5 {
            let x = random_unit(&mut rng, d);
            let p = model.predict(&x).map_err(|e| e.to_string())?;
            let (label, post) = brute_force_knn(&samples, k, &x);
            if p.label.as_str() != label {
                return Err(format!("seed {seed} k={k}: {} vs {label}", p.label));
            }
            for (c, v) in &p.posteriors {
                if (post[c.as_str()] - v).abs() > 1e-12 {
                    return Err(format!("seed {seed} k={k}: posterior of {c}"));
                }
            }
        }
    }
    Ok(())
}

/// GNB posteriors against a direct two-pass evaluation, after a fit
/// followed by an incremental update.
pub fn gnb_trial(seed: u64) -> Trial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.random_range(1..=8);
    let n = rng.random_range(4..=200);
    let samples = random_samples(&mut rng, n, d, &["A", "B", "C"]);
    let cfg = ClassifierConfig::new(ClassifierKind::Gnb);
    let split = rng.random_range(3..=n);
    let mut model = ModelState::fit(cfg, &samples[..split]).map_err(|e| e.to_string())?;
    model.partial_update(&samples[split..]).map_err(|e| e.to_string())?;
    for _ in 0..5 {
        let x = random_unit(&mut rng, d);
        let p = model.predict(&x).map_err(|e| e.to_string())?;
        let want = two_pass_gnb(&samples, cfg.var_smoothing, &x);
        for (c, v) in &p.posteriors {
            if (want[c.as_str()] - v).abs() > 1e-9 {
                return Err(format!("seed {seed}: posterior {c} {v} vs {}", want[c.as_str()]));
            }
        }
    }
    Ok(())
}

/// Running on any prefix of the test stream reproduces the first
/// predictions of the full run.
pub fn prefix_trial(seed: u64) -> Trial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.random_range(2..=8);
    let n = rng.random_range(40..=150);
    let (frames, truth) = random_stream(&mut rng, n, d);
    let split = chronological_split(&frames, &truth, &SplitSpec::new(0.4)).map_err(|e| e.to_string())?;
    let test = &frames[split.test_start..];
    let kind = [ClassifierKind::Nc, ClassifierKind::Gnb, ClassifierKind::Knn][rng.random_range(0..3)];
    let st = SelfTrainConfig {
        batch_size: rng.random_range(1..=15),
        score_threshold: rng.random_bool(0.3).then(|| rng.random_range(0.3..0.9)),
        adaptive: true,
    };
    let cfg = ClassifierConfig::new(kind);
    let full = run_session(&split.train, test, cfg, st).map_err(|e| e.to_string())?;
    for _ in 0..3 {
        let p = rng.random_range(0..=test.len());
        let part = run_session(&split.train, &test[..p], cfg, st).map_err(|e| e.to_string())?;
        if part.predictions[..] != full.predictions[..p] {
            return Err(format!("seed {seed}: prefix {p} of {} diverged ({kind})", test.len()));
        }
    }
    Ok(())
}

use chronodiar::io::{parse_rttm, parse_uem, read_embeddings, write_embeddings, write_rttm, write_uem, EmbeddingRecord};

pub const GOLDEN_RTTM: &str = "\
SPEAKER conv1 1 0.500000 2.000000 <NA> <NA> spk00 <NA> <NA>
SPEAKER conv1 1 2.250000 1.125000 <NA> <NA> spk01 <NA> <NA>
SPEAKER conv1 1 3.000000 4.000000 <NA> <NA> spk00 <NA> <NA>
";

pub const GOLDEN_UEM: &str = "conv1 1 0.000000 10.000000\nconv1 1 12.500000 20.000000\n";

pub const GOLDEN_EMB: &str = r#"{"start":0.0,"end":0.2,"truth":"spk00","v":[0.6,0.8]}
{"start":0.2,"end":0.4,"truth":"OVERLAP","v":[1.0,0.0]}
{"start":0.4,"end":0.6,"v":[0.0,-1.0]}
"#;

/// Golden files survive parse then write byte for byte; malformed input
/// is rejected with the offending line number.
pub fn parser_golden() -> Trial {
    let rttm = parse_rttm(GOLDEN_RTTM).map_err(|e| e.to_string())?;
    if write_rttm("conv1", &rttm["conv1"]) != GOLDEN_RTTM {
        return Err("RTTM not byte stable".into());
    }
    let uem = parse_uem(GOLDEN_UEM).map_err(|e| e.to_string())?;
    if write_uem("conv1", &uem["conv1"]) != GOLDEN_UEM {
        return Err("UEM not byte stable".into());
    }
    let recs = read_embeddings(GOLDEN_EMB.as_bytes()).map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    write_embeddings(&mut buf, &recs).map_err(|e| e.to_string())?;
    if buf != GOLDEN_EMB.as_bytes() {
        return Err(format!("embeddings not byte stable:\n{}", String::from_utf8_lossy(&buf)));
    }
    type Case<'a> = (&'a str, fn(&str) -> Option<String>, usize);
    let bad: [Case; 9] = [
        (";; header\nSPEAKER f1 1 x 2.0 <NA> <NA> A <NA> <NA>\n", |s| parse_rttm(s).err().map(|e| e.to_string()), 2),
        ("SPEAKER f1 1 0 1 <NA> <NA> A <NA> <NA>\nSPEAKER f1 1 0 1 <NA> <NA> A\n", |s| parse_rttm(s).err().map(|e| e.to_string()), 2),
        ("SPEAKER f1 1 0 0 <NA> <NA> A <NA> <NA>\n", |s| parse_rttm(s).err().map(|e| e.to_string()), 1),
        ("SPEAKER f1 1 0 1 <NA> <NA> A <NA> <NA>\nLEXEME f1 1 0 1 <NA> <NA> A <NA> <NA>\n", |s| parse_rttm(s).err().map(|e| e.to_string()), 2),
        ("f1 1 5 5\n", |s| parse_uem(s).err().map(|e| e.to_string()), 1),
        ("f1 1 0 5\nf1 1 zero 5\n", |s| parse_uem(s).err().map(|e| e.to_string()), 2),
        (
            "{\"start\":0,\"end\":0.2,\"v\":[1,0]}\n{\"start\":0.2,\"end\":0.4,\"v\":[1,0,0]}\n",
            |s| read_embeddings(s.as_bytes()).err().map(|e| e.to_string()),
            2,
        ),
        (
            "{\"start\":1,\"end\":1.2,\"v\":[1,0]}\n{\"start\":0.2,\"end\":0.4,\"v\":[1,0]}\n",
            |s| read_embeddings(s.as_bytes()).err().map(|e| e.to_string()),
            2,
        ),
        ("{\"start\":0,\"end\":0.2,\"v\":[1e999,0]}\n", |s| read_embeddings(s.as_bytes()).err().map(|e| e.to_string()), 1),
    ];
    for (text, parse, line) in bad {
        match parse(text) {
            None => return Err(format!("accepted malformed input {text:?}")),
            Some(msg) if !msg.contains(&format!("line {line}")) => {
                return Err(format!("error for {text:?} lacks line {line}: {msg}"))
            }
            Some(_) => {}
        }
    }
    Ok(())
}

pub fn record_roundtrip(records: &[EmbeddingRecord]) -> Result<Vec<EmbeddingRecord>, String> {
    let mut buf = Vec::new();
    write_embeddings(&mut buf, records).map_err(|e| e.to_string())?;
    read_embeddings(buf.as_slice()).map_err(|e| e.to_string())
}
