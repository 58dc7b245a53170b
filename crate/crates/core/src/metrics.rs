//! Rank-based attack metrics.
//!
//! Ranks are 1-indexed with rank 1 for the largest logit; ties break to the
//! lower class index. The interest class is the ground truth in the
//! non-targeted setting and the target class otherwise. A non-targeted
//! attack succeeds at threshold `k` when the interest-class rank exceeds
//! `k`; a targeted attack succeeds when it is at most `k`, so ASR@1
//! coincides with the conventional targeted success rate.

use serde::{Deserialize, Serialize};

use crate::attacks::PerturbationNorms;
use crate::error::{Error, Result};
use crate::nn::logits::LogitVector;

/// Per-class ranks: a permutation of `1..=K`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankVector(Vec<usize>);

impl RankVector {
    pub fn ranks(&self) -> &[usize] {
        &self.0
    }
}

/// Rank of class `c`: one plus the number of strictly larger logits plus
/// the number of equal logits at smaller indices.
pub fn class_rank(z: &LogitVector, class: usize) -> Result<usize> {
    if class >= z.len() {
        return Err(Error::InvalidParameter(format!(
            "class {class} out of range for K={}",
            z.len()
        )));
    }
    let v = z[class];
    let mut rank = 1;
    for (i, &other) in z.values().iter().enumerate() {
        if other > v || (other == v && i < class) {
            rank += 1;
        }
    }
    Ok(rank)
}

/// Ranks of every class at once.
pub fn rank_vector(z: &LogitVector) -> RankVector {
    let ranks = (0..z.len())
        .map(|c| class_rank(z, c).expect("class index in range"))
        .collect();
    RankVector(ranks)
}

/// Clean and adversarial logits for one attacked sample, with the derived
/// quantities every metric needs. `surrogate_correct` records whether the
/// surrogate classified the clean sample correctly, so metrics can be
/// recomputed over either sample convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub clean_logits: LogitVector,
    pub adv_logits: LogitVector,
    pub gt_class: usize,
    pub target_class: Option<usize>,
    pub clean_pred: usize,
    pub adv_pred: usize,
    /// Rank of the interest class in the adversarial logits.
    pub icr: usize,
    pub norms: PerturbationNorms,
    pub surrogate_correct: bool,
}

impl SampleRecord {
    pub fn new(
        clean_logits: LogitVector,
        adv_logits: LogitVector,
        gt_class: usize,
        target_class: Option<usize>,
        norms: PerturbationNorms,
        surrogate_correct: bool,
    ) -> Result<Self> {
        if clean_logits.len() != adv_logits.len() {
            return Err(Error::ShapeMismatch {
                context: "sample record logits",
                expected: vec![clean_logits.len()],
                actual: vec![adv_logits.len()],
            });
        }
        let interest = target_class.unwrap_or(gt_class);
        let icr = class_rank(&adv_logits, interest)?;
        let clean_pred = clean_logits.argmax();
        let adv_pred = adv_logits.argmax();
        Ok(Self {
            clean_logits,
            adv_logits,
            gt_class,
            target_class,
            clean_pred,
            adv_pred,
            icr,
            norms,
            surrogate_correct,
        })
    }

    pub fn interest_class(&self) -> usize {
        self.target_class.unwrap_or(self.gt_class)
    }

    pub fn num_classes(&self) -> usize {
        self.clean_logits.len()
    }
}

/// Attack success rate at rank threshold `k`: non-targeted counts samples
/// with `ICR > k`, targeted counts samples with `ICR <= k`.
pub fn asr_at_k(records: &[SampleRecord], k: usize, targeted: bool) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptyInput("asr records"));
    }
    let kmax = records[0].num_classes();
    if k == 0 || k > kmax {
        return Err(Error::InvalidParameter(format!(
            "k must be in 1..={kmax}, got {k}"
        )));
    }
    let hits = records
        .iter()
        .filter(|r| if targeted { r.icr <= k } else { r.icr > k })
        .count();
    Ok(hits as f64 / records.len() as f64)
}

/// Rank of the clean prediction (the old label) in the adversarial logits.
pub fn olnr(record: &SampleRecord) -> usize {
    class_rank(&record.adv_logits, record.clean_pred).expect("pred in range")
}

/// Rank of the adversarial prediction (the new label) in the clean logits.
pub fn nlor(record: &SampleRecord) -> usize {
    class_rank(&record.clean_logits, record.adv_pred).expect("pred in range")
}

/// Mean absolute rank displacement between the clean and adversarial
/// rankings, `(1/K) * sum_i |rank_adv(i) - rank_clean(i)|`.
pub fn nrt(record: &SampleRecord) -> f64 {
    let clean = rank_vector(&record.clean_logits);
    let adv = rank_vector(&record.adv_logits);
    let total: f64 = clean
        .ranks()
        .iter()
        .zip(adv.ranks())
        .map(|(&a, &b)| (a as f64 - b as f64).abs())
        .sum();
    total / record.num_classes() as f64
}

/// Cosine similarity between the clean and adversarial logit vectors.
pub fn logit_cosine(record: &SampleRecord) -> Result<f64> {
    cosine(record.clean_logits.values(), record.adv_logits.values())
}

fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    let na: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::InvalidParameter(
            "cosine of a zero vector is undefined".into(),
        ));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok(dot / (na * nb))
}

/// Mean and standard deviation of a statistic across samples. The std is
/// the sample standard deviation (0 for a single sample).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Self { mean, std }
    }
}

impl std::fmt::Display for MeanStd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.2}±{:.2}", self.mean, self.std)
    }
}

/// Aggregated per-sample logit statistics: the logit sum, absolute sum,
/// in-vector standard deviation, minimum, and maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroSumStats {
    pub sum: MeanStd,
    pub abs_sum: MeanStd,
    pub std: MeanStd,
    pub min: MeanStd,
    pub max: MeanStd,
}

impl ZeroSumStats {
    /// `|mean sum| / mean abs-sum`; small values witness the zero-sum
    /// balance between positive and negative logits.
    pub fn sum_ratio(&self) -> f64 {
        self.sum.mean.abs() / self.abs_sum.mean
    }
}

pub fn zero_sum_stats(logit_set: &[LogitVector]) -> Result<ZeroSumStats> {
    if logit_set.is_empty() {
        return Err(Error::EmptyInput("zero-sum logit set"));
    }
    let mut sums = Vec::with_capacity(logit_set.len());
    let mut abs_sums = Vec::with_capacity(logit_set.len());
    let mut stds = Vec::with_capacity(logit_set.len());
    let mut mins = Vec::with_capacity(logit_set.len());
    let mut maxs = Vec::with_capacity(logit_set.len());
    for z in logit_set {
        let values = z.values();
        let n = values.len() as f64;
        let sum: f64 = values.iter().sum();
        let mean = sum / n;
        sums.push(sum);
        abs_sums.push(values.iter().map(|v| v.abs()).sum());
        stds.push((values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt());
        mins.push(values.iter().cloned().fold(f64::INFINITY, f64::min));
        maxs.push(values.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    }
    Ok(ZeroSumStats {
        sum: MeanStd::of(&sums),
        abs_sum: MeanStd::of(&abs_sums),
        std: MeanStd::of(&stds),
        min: MeanStd::of(&mins),
        max: MeanStd::of(&maxs),
    })
}

/// Top-k class set of a logit vector under the declared tie rule: sort by
/// logit descending, then by index ascending. Used as the direct route of
/// the ICR/ASR consistency check, independent of `class_rank`.
fn top_k_contains(z: &LogitVector, k: usize, class: usize) -> bool {
    let mut order: Vec<usize> = (0..z.len()).collect();
    order.sort_by(|&a, &b| {
        z[b].partial_cmp(&z[a])
            .expect("finite logits")
            .then(a.cmp(&b))
    });
    order[..k].contains(&class)
}

/// Verifies, for every `k` in `1..=K` and both attack settings, that the
/// ASR computed from stored ICR values equals the fraction computed by
/// directly inspecting top-k membership in the adversarial logits.
pub fn icr_asr_consistency_check(records: &[SampleRecord], num_classes: usize) -> Result<bool> {
    if records.is_empty() {
        return Err(Error::EmptyInput("consistency records"));
    }
    let n = records.len() as f64;
    for k in 1..=num_classes {
        for targeted in [false, true] {
            let from_icr = asr_at_k(records, k, targeted)?;
            let direct_hits = records
                .iter()
                .filter(|r| {
                    let in_top_k = top_k_contains(&r.adv_logits, k, r.interest_class());
                    if targeted {
                        in_top_k
                    } else {
                        !in_top_k
                    }
                })
                .count();
            if from_icr != direct_hits as f64 / n {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

pub fn mean_icr(records: &[SampleRecord]) -> f64 {
    if records.is_empty() {
        return f64::NAN;
    }
    records.iter().map(|r| r.icr as f64).sum::<f64>() / records.len() as f64
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::ShapeMismatch {
            context: "spearman inputs",
            expected: vec![xs.len()],
            actual: vec![ys.len()],
        });
    }
    if xs.len() < 2 {
        return Err(Error::InvalidParameter(
            "spearman needs at least two points".into(),
        ));
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    pearson(&rx, &ry)
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::InvalidParameter(
            "correlation undefined for a constant sequence".into(),
        ));
    }
    Ok(cov / (vx * vy).sqrt())
}
