//! Full evaluation protocols over a dataset: enrollment, verification and
//! identification rounds, round aggregation, and the mated/non-mated score
//! generation for unlinkability analysis.
//!
//! Worst case shares one key set across every subject in a round, probing
//! the separability of the biometric data alone; best case assigns each
//! subject an individual key set (identification is then undefined, since
//! templates from different key sets live in different spaces).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::datasets::{split, Dataset, SplitProtocol};
use crate::error::{Error, Result};
use crate::evaluation::metrics::{
    cmc_curve, compute_di, compute_eer, far_frr_curve, mean_and_sd, recognition_index, RocCurve,
    ScoreSet,
};
use crate::features::{build_filter_bank, extract_features, FilterBankConfig, LogGaborFilterBank};
use crate::keyspace::{generate_key_set_with, mix_seed, KeySet, WindowBounds};
use crate::matching::cosine_dissimilarity;
use crate::template::{generate_template, ProtectedTemplate};

/// Key assignment strategy for a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyMode {
    /// One key set shared by every subject (worst case).
    SharedWorstCase,
    /// An individual key set per subject (best case).
    PerSubjectBestCase,
}

impl std::fmt::Display for KeyMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KeyMode::SharedWorstCase => write!(f, "worst_case"),
            KeyMode::PerSubjectBestCase => write!(f, "best_case"),
        }
    }
}

/// How a subject's enrolled template scores collapse into one score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreFusion {
    /// Minimum dissimilarity over the subject's templates.
    Min,
    /// Mean dissimilarity over the subject's templates.
    Mean,
}

/// Full protocol description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub mode: KeyMode,
    pub fusion: ScoreFusion,
    /// Key-set sizes, one entry per verification round; empty skips
    /// verification.
    pub verification_rounds: Vec<usize>,
    /// Key-set sizes, one entry per identification round; empty skips
    /// identification.
    pub identification_rounds: Vec<usize>,
    pub split: SplitProtocol,
    pub master_seed: u64,
    pub bank: FilterBankConfig,
    pub scale_factor: f64,
    pub num_thresholds: usize,
}

impl ProtocolConfig {
    /// The published round structure: verification with three rounds of
    /// n = 20 plus two of n = 25; identification with three rounds of n = 15
    /// plus two of n = 20.
    pub fn standard(mode: KeyMode, split: SplitProtocol, master_seed: u64) -> Self {
        let identification_rounds = match mode {
            KeyMode::SharedWorstCase => vec![15, 15, 15, 20, 20],
            KeyMode::PerSubjectBestCase => vec![],
        };
        ProtocolConfig {
            mode,
            fusion: ScoreFusion::Min,
            verification_rounds: vec![20, 20, 20, 25, 25],
            identification_rounds,
            split,
            master_seed,
            bank: FilterBankConfig::default(),
            scale_factor: crate::features::DEFAULT_SCALE_FACTOR,
            num_thresholds: 1001,
        }
    }
}

/// Per-round verification metrics, with the curve they came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationRound {
    pub n: usize,
    pub eer: f64,
    pub eer_threshold: f64,
    pub di: f64,
    pub genuine_mean: f64,
    pub imposter_mean: f64,
    pub roc: RocCurve,
}

/// Per-round identification metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentificationRound {
    pub n: usize,
    pub ri: f64,
    pub eer: f64,
    pub eer_threshold: f64,
    pub di: f64,
    pub cmc: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationSummary {
    pub rounds: Vec<VerificationRound>,
    pub eer_mean: f64,
    pub eer_sd: f64,
    pub di_mean: f64,
    pub di_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentificationSummary {
    pub rounds: Vec<IdentificationRound>,
    pub ri_mean: f64,
    pub ri_sd: f64,
    pub eer_mean: f64,
    pub eer_sd: f64,
    /// CMC averaged across rounds, per rank.
    pub cmc_mean: Vec<f64>,
}

/// Protocol descriptor echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolDescriptor {
    pub mode: KeyMode,
    pub fusion: ScoreFusion,
    pub num_subjects: usize,
    pub train_per_subject: usize,
    pub test_per_subject: usize,
    pub image_side: usize,
    pub master_seed: u64,
    pub num_thresholds: usize,
    pub provenance: String,
}

/// The full evaluation output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub version: u32,
    pub protocol: ProtocolDescriptor,
    pub verification: Option<VerificationSummary>,
    pub identification: Option<IdentificationSummary>,
}

/// Enrolled templates per subject, keyed by subject id.
type Gallery = BTreeMap<String, Vec<ProtectedTemplate>>;

fn keyset_for(
    mode: KeyMode,
    n: usize,
    l: usize,
    round_seed: u64,
    subject_index: usize,
) -> Result<KeySet> {
    let seed = match mode {
        KeyMode::SharedWorstCase => round_seed,
        KeyMode::PerSubjectBestCase => mix_seed(&[round_seed, 0x5b1e, subject_index as u64]),
    };
    generate_key_set_with(n, l, WindowBounds::default(), seed, None)
}

fn fuse(scores: &[f64], fusion: ScoreFusion) -> f64 {
    match fusion {
        ScoreFusion::Min => scores.iter().cloned().fold(f64::INFINITY, f64::min),
        ScoreFusion::Mean => scores.iter().sum::<f64>() / scores.len() as f64,
    }
}

/// Extracts features and builds the protected template of one sample.
fn sample_template(
    ds: &Dataset,
    subject: usize,
    sample: usize,
    bank: &LogGaborFilterBank,
    scale_factor: f64,
    keys: &KeySet,
) -> Result<ProtectedTemplate> {
    let image = ds.subjects[subject].samples[sample].image(bank.config().image_side)?;
    let features = extract_features(&image, bank, scale_factor)?;
    generate_template(&features, keys)
}

fn enroll(
    train: &Dataset,
    bank: &LogGaborFilterBank,
    scale_factor: f64,
    keys_of: &dyn Fn(usize) -> Result<KeySet>,
) -> Result<Gallery> {
    let mut gallery = Gallery::new();
    for (s, subject) in train.subjects.iter().enumerate() {
        let keys = keys_of(s)?;
        let mut templates = Vec::with_capacity(subject.samples.len());
        for i in 0..subject.samples.len() {
            templates.push(sample_template(train, s, i, bank, scale_factor, &keys)?);
        }
        gallery.insert(subject.id.clone(), templates);
    }
    Ok(gallery)
}

fn subject_score(
    query: &ProtectedTemplate,
    enrolled: &[ProtectedTemplate],
    fusion: ScoreFusion,
) -> Result<f64> {
    let mut scores = Vec::with_capacity(enrolled.len());
    for t in enrolled {
        scores.push(cosine_dissimilarity(query, t)?.value());
    }
    Ok(fuse(&scores, fusion))
}

fn verification_round(
    train: &Dataset,
    test: &Dataset,
    bank: &LogGaborFilterBank,
    cfg: &ProtocolConfig,
    n: usize,
    round_seed: u64,
) -> Result<VerificationRound> {
    let l = cfg.bank.feature_length();
    let keys_of = |s: usize| keyset_for(cfg.mode, n, l, round_seed, s);
    let gallery = enroll(train, bank, cfg.scale_factor, &keys_of)?;

    let mut scores = ScoreSet::default();
    match cfg.mode {
        KeyMode::SharedWorstCase => {
            // one key set: each query template is comparable to every subject
            for (qs, subject) in test.subjects.iter().enumerate() {
                let keys = keys_of(qs)?;
                for qi in 0..subject.samples.len() {
                    let query = sample_template(test, qs, qi, bank, cfg.scale_factor, &keys)?;
                    for (cs, claimed) in train.subjects.iter().enumerate() {
                        let score =
                            subject_score(&query, &gallery[&claimed.id], cfg.fusion)?;
                        if cs == qs {
                            scores.genuine.push(score);
                        } else {
                            scores.imposter.push(score);
                        }
                    }
                }
            }
        }
        KeyMode::PerSubjectBestCase => {
            // the claimed subject's key set transforms the query
            for (cs, claimed) in train.subjects.iter().enumerate() {
                let keys = keys_of(cs)?;
                for (qs, subject) in test.subjects.iter().enumerate() {
                    for qi in 0..subject.samples.len() {
                        let query =
                            sample_template(test, qs, qi, bank, cfg.scale_factor, &keys)?;
                        let score =
                            subject_score(&query, &gallery[&claimed.id], cfg.fusion)?;
                        if cs == qs {
                            scores.genuine.push(score);
                        } else {
                            scores.imposter.push(score);
                        }
                    }
                }
            }
        }
    }

    let roc = far_frr_curve(&scores, cfg.num_thresholds)?;
    let (eer, eer_threshold) = compute_eer(&roc);
    let di = compute_di(&scores).unwrap_or(0.0);
    let (genuine_mean, _) = mean_and_sd(&scores.genuine);
    let (imposter_mean, _) = mean_and_sd(&scores.imposter);
    Ok(VerificationRound {
        n,
        eer,
        eer_threshold,
        di,
        genuine_mean,
        imposter_mean,
        roc,
    })
}

fn identification_round(
    train: &Dataset,
    test: &Dataset,
    bank: &LogGaborFilterBank,
    cfg: &ProtocolConfig,
    n: usize,
    round_seed: u64,
) -> Result<IdentificationRound> {
    let l = cfg.bank.feature_length();
    let keys = keyset_for(KeyMode::SharedWorstCase, n, l, round_seed, 0)?;
    let keys_of = |_: usize| Ok(keys.clone());
    let gallery = enroll(train, bank, cfg.scale_factor, &keys_of)?;

    let mut ranks = Vec::new();
    let mut scores = ScoreSet::default();
    for (qs, subject) in test.subjects.iter().enumerate() {
        for qi in 0..subject.samples.len() {
            let query = sample_template(test, qs, qi, bank, cfg.scale_factor, &keys)?;
            // rank every gallery subject by its fused score
            let mut ranking: Vec<(&str, f64)> = Vec::with_capacity(gallery.len());
            for (id, templates) in &gallery {
                ranking.push((id.as_str(), subject_score(&query, templates, cfg.fusion)?));
            }
            ranking.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
            let true_id = subject.id.as_str();
            let rank = ranking
                .iter()
                .position(|(id, _)| *id == true_id)
                .expect("test subject enrolled in gallery")
                + 1;
            ranks.push(rank);
            for (id, score) in &ranking {
                if *id == true_id {
                    scores.genuine.push(*score);
                } else {
                    scores.imposter.push(*score);
                }
            }
        }
    }

    let cmc = cmc_curve(&ranks, gallery.len())?;
    let roc = far_frr_curve(&scores, cfg.num_thresholds)?;
    let (eer, eer_threshold) = compute_eer(&roc);
    let di = compute_di(&scores).unwrap_or(0.0);
    Ok(IdentificationRound {
        n,
        ri: recognition_index(&cmc),
        eer,
        eer_threshold,
        di,
        cmc,
    })
}

/// Runs the configured protocol over a dataset and aggregates per-round
/// metrics into mean and sample standard deviation.
pub fn run_protocol(ds: &Dataset, cfg: &ProtocolConfig) -> Result<EvalReport> {
    if ds.subjects.len() < 2 {
        return Err(Error::Protocol(
            "evaluation needs at least 2 subjects".into(),
        ));
    }
    if cfg.mode == KeyMode::PerSubjectBestCase && !cfg.identification_rounds.is_empty() {
        return Err(Error::Protocol(
            "identification requires the shared-key (worst case) mode".into(),
        ));
    }
    if !(cfg.scale_factor > 0.0) {
        return Err(Error::Protocol("scale factor must be positive".into()));
    }
    let (train, test) = split(ds, &cfg.split)?;
    let bank = build_filter_bank(&cfg.bank)?;

    let verification = if cfg.verification_rounds.is_empty() {
        None
    } else {
        let mut rounds = Vec::with_capacity(cfg.verification_rounds.len());
        for (r, &n) in cfg.verification_rounds.iter().enumerate() {
            let round_seed = mix_seed(&[cfg.master_seed, 0x0e, r as u64]);
            rounds.push(verification_round(&train, &test, &bank, cfg, n, round_seed)?);
        }
        let (eer_mean, eer_sd) = mean_and_sd(&rounds.iter().map(|r| r.eer).collect::<Vec<_>>());
        let (di_mean, di_sd) = mean_and_sd(&rounds.iter().map(|r| r.di).collect::<Vec<_>>());
        Some(VerificationSummary {
            rounds,
            eer_mean,
            eer_sd,
            di_mean,
            di_sd,
        })
    };

    let identification = if cfg.identification_rounds.is_empty() {
        None
    } else {
        let mut rounds = Vec::with_capacity(cfg.identification_rounds.len());
        for (r, &n) in cfg.identification_rounds.iter().enumerate() {
            let round_seed = mix_seed(&[cfg.master_seed, 0x1d, r as u64]);
            rounds.push(identification_round(&train, &test, &bank, cfg, n, round_seed)?);
        }
        let (ri_mean, ri_sd) = mean_and_sd(&rounds.iter().map(|r| r.ri).collect::<Vec<_>>());
        let (eer_mean, eer_sd) = mean_and_sd(&rounds.iter().map(|r| r.eer).collect::<Vec<_>>());
        let gallery_size = rounds[0].cmc.len();
        let cmc_mean = (0..gallery_size)
            .map(|k| rounds.iter().map(|r| r.cmc[k]).sum::<f64>() / rounds.len() as f64)
            .collect();
        Some(IdentificationSummary {
            rounds,
            ri_mean,
            ri_sd,
            eer_mean,
            eer_sd,
            cmc_mean,
        })
    };

    Ok(EvalReport {
        version: 1,
        protocol: ProtocolDescriptor {
            mode: cfg.mode,
            fusion: cfg.fusion,
            num_subjects: train.subjects.len(),
            train_per_subject: cfg.split.train_per_subject,
            test_per_subject: cfg.split.test_per_subject,
            image_side: cfg.bank.image_side,
            master_seed: cfg.master_seed,
            num_thresholds: cfg.num_thresholds,
            provenance: ds.provenance.clone(),
        },
        verification,
        identification,
    })
}

/// Parameters of the mated/non-mated score generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnlinkabilityConfig {
    /// Key-set size used for every template.
    pub n: usize,
    pub seed: u64,
    /// Cap on the number of non-mated pairs; pairs are thinned
    /// deterministically when the cross product exceeds it.
    pub max_nonmated_pairs: usize,
}

impl Default for UnlinkabilityConfig {
    fn default() -> Self {
        UnlinkabilityConfig {
            n: 15,
            seed: 1,
            max_nonmated_pairs: 5_000,
        }
    }
}

/// Builds mated and non-mated score sets: every sample gets its own key set;
/// mated pairs are intra-subject, non-mated pairs are cross-subject.
pub fn unlinkability_scores(
    ds: &Dataset,
    bank_cfg: &FilterBankConfig,
    scale_factor: f64,
    cfg: &UnlinkabilityConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if ds.subjects.len() < 2 {
        return Err(Error::Protocol(
            "unlinkability needs at least 2 subjects".into(),
        ));
    }
    let bank = build_filter_bank(bank_cfg)?;
    let l = bank_cfg.feature_length();

    // per-sample templates under per-sample key sets
    let mut templates: Vec<Vec<ProtectedTemplate>> = Vec::with_capacity(ds.subjects.len());
    for (s, subject) in ds.subjects.iter().enumerate() {
        let mut row = Vec::with_capacity(subject.samples.len());
        for i in 0..subject.samples.len() {
            let keys = generate_key_set_with(
                cfg.n,
                l,
                WindowBounds::default(),
                mix_seed(&[cfg.seed, s as u64, i as u64]),
                None,
            )?;
            row.push(sample_template(ds, s, i, &bank, scale_factor, &keys)?);
        }
        templates.push(row);
    }

    let mut mated = Vec::new();
    for row in &templates {
        for i in 0..row.len() {
            for j in (i + 1)..row.len() {
                mated.push(cosine_dissimilarity(&row[i], &row[j])?.value());
            }
        }
    }

    // deterministic thinning of the cross-subject pairs
    let mut cross: Vec<(usize, usize, usize, usize)> = Vec::new();
    for s in 0..templates.len() {
        for t in (s + 1)..templates.len() {
            for i in 0..templates[s].len() {
                for j in 0..templates[t].len() {
                    cross.push((s, i, t, j));
                }
            }
        }
    }
    let stride = (cross.len() / cfg.max_nonmated_pairs.max(1)).max(1);
    let mut nonmated = Vec::new();
    for (idx, &(s, i, t, j)) in cross.iter().enumerate() {
        if idx % stride == 0 {
            nonmated.push(cosine_dissimilarity(&templates[s][i], &templates[t][j])?.value());
        }
    }

    Ok((mated, nonmated))
}
