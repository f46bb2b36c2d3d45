//! Segment-level ranking agreement between settings, paired permutation
//! tests, cross-BLEU and selection of system pairs to annotate.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use unicode_normalization::UnicodeNormalization;

use crate::agreement::{comparison_label, Evidence, LabelBasis, PairUnit};
use crate::error::{Error, Result};
use crate::model::{ComparisonLabel, Project, SegmentRef, Setting};
use crate::scalar::{mean, Scalar};
use crate::scoring::{build_score_table, ScoreOptions, ScoreTable, ZGrouping};

/// Significance level reported alongside p-values.
pub const ALPHA_LEVEL: f64 = 0.05;

/// Concordance counts between two settings' labels on the same units.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PraCounts {
    pub concordant: usize,
    pub discordant: usize,
    /// Tied in the first setting only.
    pub tie_alpha: usize,
    /// Tied in the second setting only.
    pub tie_beta: usize,
    pub tie_both: usize,
}

impl PraCounts {
    pub fn total(&self) -> usize {
        self.concordant + self.discordant + self.tie_alpha + self.tie_beta + self.tie_both
    }

    pub fn value<T: Scalar>(&self) -> Option<T> {
        let total = self.total();
        (total > 0).then(|| T::from_count(self.concordant + self.tie_both) / T::from_count(total))
    }
}

pub fn pra_counts(
    alpha: &BTreeMap<PairUnit, ComparisonLabel>,
    beta: &BTreeMap<PairUnit, ComparisonLabel>,
) -> Result<PraCounts> {
    if alpha.len() != beta.len() || alpha.keys().zip(beta.keys()).any(|(x, y)| x != y) {
        return Err(Error::UnitMismatch);
    }
    let mut c = PraCounts::default();
    for (la, lb) in alpha.values().zip(beta.values()) {
        match (*la == ComparisonLabel::Tie, *lb == ComparisonLabel::Tie) {
            (true, true) => c.tie_both += 1,
            (true, false) => c.tie_alpha += 1,
            (false, true) => c.tie_beta += 1,
            (false, false) if la == lb => c.concordant += 1,
            (false, false) => c.discordant += 1,
        }
    }
    Ok(c)
}

/// Pairwise ranking agreement. Errors on differing unit sets or when
/// there are no units.
pub fn pra<T: Scalar>(
    alpha: &BTreeMap<PairUnit, ComparisonLabel>,
    beta: &BTreeMap<PairUnit, ComparisonLabel>,
) -> Result<(PraCounts, T)> {
    let counts = pra_counts(alpha, beta)?;
    let value = counts.value().ok_or(Error::Empty {
        detail: "no units to compare".into(),
    })?;
    Ok((counts, value))
}

fn partner_for<'a>(project: &Project, setting: Setting, system: &str, other: &'a str) -> Option<&'a str> {
    (setting != Setting::Mqm && project.is_designated(system, other)).then_some(other)
}

/// One label per (segment, designated pair), comparing the segment scores
/// averaged over annotators.
pub fn setting_unit_labels(
    project: &Project,
    setting: Setting,
    basis: LabelBasis,
) -> Result<BTreeMap<PairUnit, ComparisonLabel>> {
    if project.designated_pairs.is_empty() {
        return Err(Error::NoPairs);
    }
    let options = ScoreOptions {
        use_z: basis == LabelBasis::Z,
        grouping: ZGrouping::PerSetting,
    };
    let table = build_score_table::<f64>(project, setting, options)?;
    let mut out = BTreeMap::new();
    for (a, b) in &project.designated_pairs {
        let va = table.segment_vector(a, partner_for(project, setting, a, b));
        let vb = table.segment_vector(b, partner_for(project, setting, b, a));
        for (segment, &sa) in &va {
            if let Some(&sb) = vb.get(segment) {
                let unit = PairUnit {
                    segment: segment.clone(),
                    system_a: a.clone(),
                    system_b: b.clone(),
                };
                out.insert(unit, comparison_label(Evidence::Scores(Some(sa), Some(sb)))?);
            }
        }
    }
    Ok(out)
}

/// PRA between two settings of a project, restricted to units both label.
pub fn pra_between<T: Scalar>(
    project: &Project,
    alpha: Setting,
    beta: Setting,
    basis: LabelBasis,
) -> Result<(PraCounts, T)> {
    let mut la = setting_unit_labels(project, alpha, basis)?;
    let mut lb = setting_unit_labels(project, beta, basis)?;
    la.retain(|k, _| lb.contains_key(k));
    lb.retain(|k, _| la.contains_key(k));
    pra(&la, &lb)
}

fn statistic<T: Scalar>(diffs: &[T], flips: impl Iterator<Item = bool>) -> T {
    let sum: T = diffs
        .iter()
        .zip(flips)
        .map(|(&d, flip)| if flip { -d } else { d })
        .sum();
    (sum / T::from_count(diffs.len())).abs()
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Paired sign-flip permutation test on |mean(a) - mean(b)|, with the
/// add-one estimator. Each trial draws from its own stream of `seed`, so
/// the result does not depend on thread scheduling.
pub fn permutation_test<T: Scalar>(a: &[T], b: &[T], trials: usize, seed: u64) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::TooShort { min: 2, got: a.len() });
    }
    if trials == 0 {
        return Err(Error::TooFew { min: 1, got: 0 });
    }
    let diffs: Vec<T> = a.iter().zip(b).map(|(&x, &y)| x - y).collect();
    let observed = statistic(&diffs, std::iter::repeat(false));
    // Sums of the same terms in another order may differ in the last bits.
    let slack = T::epsilon() * T::lit(100.0) * observed.max(T::one());
    let threshold = observed - slack;
    let hits = (0..trials as u64)
        .into_par_iter()
        .filter(|&t| {
            let mut rng = trial_rng(seed, t);
            statistic(&diffs, (0..diffs.len()).map(|_| rng.gen::<bool>())) >= threshold
        })
        .count();
    Ok(T::from_count(1 + hits) / T::from_count(1 + trials))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignificanceResult<T> {
    pub setting: Setting,
    pub better: String,
    pub worse: String,
    pub better_score: T,
    pub worse_score: T,
    pub p_value: T,
    pub trials: usize,
    pub seed: u64,
}

impl<T: Scalar> SignificanceResult<T> {
    pub fn significant(&self) -> bool {
        self.p_value.to_f64_lossy() < ALPHA_LEVEL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RankOptions {
    pub trials: usize,
    pub seed: u64,
    /// z-scores in the MQM settings; RR always uses raw penalties.
    pub use_z: bool,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions {
            trials: 10_000,
            seed: 0,
            use_z: true,
        }
    }
}

fn paired_vectors<T: Scalar>(project: &Project, table: &ScoreTable<T>, a: &str, b: &str) -> Result<(Vec<T>, Vec<T>)> {
    let va = table.segment_vector(a, partner_for(project, table.setting, a, b));
    let vb = table.segment_vector(b, partner_for(project, table.setting, b, a));
    if va.is_empty() || va.len() != vb.len() || va.keys().zip(vb.keys()).any(|(x, y)| x != y) {
        return Err(Error::SegmentMismatch {
            system_a: a.to_string(),
            system_b: b.to_string(),
        });
    }
    Ok((va.into_values().collect(), vb.into_values().collect()))
}

/// Orders two systems by mean segment score (lower is better; exact ties
/// by system id) and tests the difference.
pub fn rank_system_pair<T: Scalar>(
    project: &Project,
    setting: Setting,
    pair: (&str, &str),
    options: RankOptions,
) -> Result<SignificanceResult<T>> {
    let table = build_score_table::<T>(
        project,
        setting,
        ScoreOptions {
            use_z: options.use_z,
            grouping: ZGrouping::PerSetting,
        },
    )?;
    rank_in_table(project, &table, pair, options)
}

fn rank_in_table<T: Scalar>(
    project: &Project,
    table: &ScoreTable<T>,
    (a, b): (&str, &str),
    options: RankOptions,
) -> Result<SignificanceResult<T>> {
    let (va, vb) = paired_vectors(project, table, a, b)?;
    let sa = mean(&va).expect("non-empty");
    let sb = mean(&vb).expect("non-empty");
    let a_first = sa < sb || (sa == sb && a <= b);
    let p_value = permutation_test(&va, &vb, options.trials, options.seed)?;
    let ((better, better_score), (worse, worse_score)) = if a_first {
        ((a, sa), (b, sb))
    } else {
        ((b, sb), (a, sa))
    };
    Ok(SignificanceResult {
        setting: table.setting,
        better: better.to_string(),
        worse: worse.to_string(),
        better_score,
        worse_score,
        p_value,
        trials: options.trials,
        seed: options.seed,
    })
}

/// Group label of each designated pair: with five pairs, the selection
/// order (top two, two high-similarity, two low-similarity).
pub fn pair_group_labels(n: usize) -> Vec<String> {
    if n == 5 {
        ["top2", "high-sim", "high-sim", "low-sim", "low-sim"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    } else {
        (1..=n).map(|i| format!("pair-{i}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingRow<T> {
    pub group: String,
    pub result: SignificanceResult<T>,
}

/// Every designated pair ranked in every setting present in the project.
pub fn ranking_report<T: Scalar>(project: &Project, options: RankOptions) -> Result<Vec<RankingRow<T>>> {
    if project.designated_pairs.is_empty() {
        return Err(Error::NoPairs);
    }
    let groups = pair_group_labels(project.designated_pairs.len());
    let mut rows = Vec::new();
    for setting in [Setting::Mqm, Setting::SxsMqm, Setting::SxsRr] {
        if !project.has_setting(setting) {
            continue;
        }
        let table = build_score_table::<T>(
            project,
            setting,
            ScoreOptions {
                use_z: options.use_z,
                grouping: ZGrouping::PerSetting,
            },
        )?;
        for ((a, b), group) in project.designated_pairs.iter().zip(&groups) {
            rows.push(RankingRow {
                group: group.clone(),
                result: rank_in_table(project, &table, (a, b), options)?,
            });
        }
    }
    Ok(rows)
}

pub fn ranking_report_tsv<T: Scalar>(rows: &[RankingRow<T>]) -> String {
    let mut out = String::from("group\tsetting\tbetter\tbetter_score\tworse\tworse_score\tp_value\n");
    for r in rows {
        let s = &r.result;
        out.push_str(&format!(
            "{}\t{}\t{}\t{:.4}\t{}\t{:.4}\t{:.4}\n",
            r.group,
            s.setting.name(),
            s.better,
            s.better_score.to_f64_lossy(),
            s.worse,
            s.worse_score.to_f64_lossy(),
            s.p_value.to_f64_lossy(),
        ));
    }
    out
}

const MAX_ORDER: usize = 4;

fn tokenize(text: &str) -> Vec<String> {
    let nfc: String = text.nfc().collect();
    nfc.split_whitespace().map(str::to_string).collect()
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Corpus BLEU-4 of `hyp` against `reference`, in [0, 100]. Zero when any
/// n-gram precision is zero.
pub fn corpus_bleu<T: Scalar>(hyp: &[String], reference: &[String]) -> Result<T> {
    if hyp.len() != reference.len() {
        return Err(Error::LengthMismatch {
            left: hyp.len(),
            right: reference.len(),
        });
    }
    if hyp.is_empty() {
        return Err(Error::Empty {
            detail: "no segments".into(),
        });
    }
    let mut matches = [0usize; MAX_ORDER];
    let mut totals = [0usize; MAX_ORDER];
    let (mut hyp_len, mut ref_len) = (0, 0);
    for (h, r) in hyp.iter().zip(reference) {
        let (h, r) = (tokenize(h), tokenize(r));
        hyp_len += h.len();
        ref_len += r.len();
        for n in 1..=MAX_ORDER {
            let rc = ngram_counts(&r, n);
            for (gram, count) in ngram_counts(&h, n) {
                matches[n - 1] += count.min(rc.get(gram).copied().unwrap_or(0));
            }
            totals[n - 1] += h.len().saturating_sub(n - 1);
        }
    }
    if matches.contains(&0) {
        return Ok(T::zero());
    }
    let log_mean = (0..MAX_ORDER)
        .map(|n| (T::from_count(matches[n]) / T::from_count(totals[n])).ln())
        .sum::<T>()
        / T::from_count(MAX_ORDER);
    let bp = if hyp_len < ref_len {
        (T::one() - T::from_count(ref_len) / T::from_count(hyp_len)).exp()
    } else {
        T::one()
    };
    Ok(T::lit(100.0) * bp * log_mean.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossBleu<T> {
    pub score: T,
    pub a_to_b: T,
    pub b_to_a: T,
}

/// BLEU of each output against the other, averaged.
pub fn cross_bleu<T: Scalar>(outputs_a: &[String], outputs_b: &[String]) -> Result<CrossBleu<T>> {
    let a_to_b = corpus_bleu(outputs_a, outputs_b)?;
    let b_to_a = corpus_bleu(outputs_b, outputs_a)?;
    Ok(CrossBleu {
        score: (a_to_b + b_to_a) / T::lit(2.0),
        a_to_b,
        b_to_a,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairDiagnostic<T> {
    /// Higher-ranked system first.
    pub system_a: String,
    pub system_b: String,
    pub rank_a: usize,
    pub rank_b: usize,
    pub p_value: T,
    pub cross_bleu: CrossBleu<T>,
}

impl<T: Scalar> PairDiagnostic<T> {
    pub fn similar(&self) -> bool {
        self.p_value.to_f64_lossy() > ALPHA_LEVEL
    }

    fn pair(&self) -> (String, String) {
        (self.system_a.clone(), self.system_b.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSelection<T> {
    pub top2: (String, String),
    pub high_sim: Vec<(String, String)>,
    pub low_sim: Vec<(String, String)>,
    /// Systems by mean metric score, best first.
    pub ranking: Vec<(String, T)>,
    pub diagnostics: Vec<PairDiagnostic<T>>,
}

impl<T> PairSelection<T> {
    /// The five pairs in selection order.
    pub fn pairs(&self) -> Vec<(String, String)> {
        std::iter::once(self.top2.clone())
            .chain(self.high_sim.iter().cloned())
            .chain(self.low_sim.iter().cloned())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SelectOptions {
    pub trials: usize,
    pub seed: u64,
    pub higher_is_better: bool,
}

impl Default for SelectOptions {
    fn default() -> Self {
        SelectOptions {
            trials: 10_000,
            seed: 0,
            higher_is_better: true,
        }
    }
}

pub const MIN_SELECT_SYSTEMS: usize = 6;

/// Picks the top two systems plus the two most and two least similar
/// (by cross-BLEU) of the remaining pairs of similar quality.
pub fn select_pairs<T: Scalar>(
    metric_scores: &[(String, SegmentRef, T)],
    outputs: &BTreeMap<String, BTreeMap<SegmentRef, String>>,
    options: SelectOptions,
) -> Result<PairSelection<T>> {
    let mut per_system: BTreeMap<&str, BTreeMap<&SegmentRef, T>> = BTreeMap::new();
    for (system, segment, score) in metric_scores {
        per_system.entry(system).or_default().insert(segment, *score);
    }
    if per_system.len() < MIN_SELECT_SYSTEMS {
        return Err(Error::InsufficientPairs {
            detail: format!("need at least {MIN_SELECT_SYSTEMS} systems, got {}", per_system.len()),
        });
    }
    let mut ranking: Vec<(String, T)> = per_system
        .iter()
        .map(|(s, v)| {
            (
                s.to_string(),
                mean(&v.values().copied().collect::<Vec<_>>()).expect("non-empty"),
            )
        })
        .collect();
    ranking.sort_by(|x, y| {
        let ord = x.1.partial_cmp(&y.1).unwrap_or(std::cmp::Ordering::Equal);
        let ord = if options.higher_is_better { ord.reverse() } else { ord };
        ord.then_with(|| x.0.cmp(&y.0))
    });

    let mut diagnostics = Vec::new();
    for i in 0..ranking.len() {
        for j in i + 1..ranking.len() {
            let (a, b) = (&ranking[i].0, &ranking[j].0);
            let (sa, sb) = (&per_system[a.as_str()], &per_system[b.as_str()]);
            if sa.len() != sb.len() || sa.keys().zip(sb.keys()).any(|(x, y)| x != y) {
                return Err(Error::SegmentMismatch {
                    system_a: a.clone(),
                    system_b: b.clone(),
                });
            }
            let va: Vec<T> = sa.values().copied().collect();
            let vb: Vec<T> = sb.values().copied().collect();
            let p_value = permutation_test(&va, &vb, options.trials, options.seed)?;
            let texts = |s: &str| -> Result<Vec<String>> {
                let o = outputs.get(s).ok_or_else(|| Error::MissingScore {
                    detail: format!("no outputs for system {s}"),
                })?;
                sa.keys()
                    .map(|seg| {
                        o.get(*seg).cloned().ok_or_else(|| Error::MissingScore {
                            detail: format!("no output for system {s} on {}:{}", seg.doc_id, seg.seg_id),
                        })
                    })
                    .collect()
            };
            diagnostics.push(PairDiagnostic {
                system_a: a.clone(),
                system_b: b.clone(),
                rank_a: i + 1,
                rank_b: j + 1,
                p_value,
                cross_bleu: cross_bleu(&texts(a)?, &texts(b)?)?,
            });
        }
    }

    let top = &diagnostics[0];
    if !top.similar() {
        return Err(Error::InsufficientPairs {
            detail: format!(
                "top two systems {} and {} differ significantly (p = {:.4})",
                top.system_a,
                top.system_b,
                top.p_value.to_f64_lossy()
            ),
        });
    }
    let mut rest: Vec<&PairDiagnostic<T>> = diagnostics[1..].iter().filter(|d| d.similar()).collect();
    if rest.len() < 4 {
        return Err(Error::InsufficientPairs {
            detail: format!("{} similar-quality pairs besides the top two, need 4", rest.len()),
        });
    }
    let key = |d: &PairDiagnostic<T>| (d.rank_a, d.rank_b);
    rest.sort_by(|x, y| {
        y.cross_bleu
            .score
            .partial_cmp(&x.cross_bleu.score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| key(x).cmp(&key(y)))
    });
    let high_sim: Vec<_> = rest[..2].iter().map(|d| d.pair()).collect();
    let taken: BTreeSet<_> = high_sim.iter().cloned().collect();
    let mut low: Vec<&PairDiagnostic<T>> = rest
        .iter()
        .rev()
        .copied()
        .filter(|d| !taken.contains(&d.pair()))
        .collect();
    low.sort_by(|x, y| {
        x.cross_bleu
            .score
            .partial_cmp(&y.cross_bleu.score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| key(x).cmp(&key(y)))
    });
    let low_sim = low[..2].iter().map(|d| d.pair()).collect();
    Ok(PairSelection {
        top2: top.pair(),
        high_sim,
        low_sim,
        ranking,
        diagnostics,
    })
}

pub fn selection_tsv<T: Scalar>(selection: &PairSelection<T>) -> String {
    let mut groups: HashMap<(String, String), &str> = HashMap::new();
    groups.insert(selection.top2.clone(), "top2");
    for p in &selection.high_sim {
        groups.insert(p.clone(), "high-sim");
    }
    for p in &selection.low_sim {
        groups.insert(p.clone(), "low-sim");
    }
    let mut out =
        String::from("system_a\tsystem_b\trank_a\trank_b\tp_value\tcross_bleu\tbleu_a_b\tbleu_b_a\tselected\n");
    for d in &selection.diagnostics {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{:.4}\t{:.2}\t{:.2}\t{:.2}\t{}\n",
            d.system_a,
            d.system_b,
            d.rank_a,
            d.rank_b,
            d.p_value.to_f64_lossy(),
            d.cross_bleu.score.to_f64_lossy(),
            d.cross_bleu.a_to_b.to_f64_lossy(),
            d.cross_bleu.b_to_a.to_f64_lossy(),
            groups.get(&d.pair()).copied().unwrap_or("-"),
        ));
    }
    out
}
