//! Error distributions, cross-setting category conversion, outlier
//! annotators and per-annotator score distributions.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::is_target_error;
use crate::model::{Category, ErrorCategory, ErrorSpan, MqmAnnotation, Project, SegmentRef, Setting, Severity};
use crate::scalar::{mean, population_std, quantile, Scalar};
use crate::scoring::score_cells;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DistributionOptions {
    /// Count a system's single-sided errors once per designated pair it
    /// appears in, so the MQM tally is comparable with side-by-side.
    pub duplicate_rule: bool,
    /// Break categories down by subcategory.
    pub subcategories: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorDistribution<T> {
    pub setting: Setting,
    pub counts: BTreeMap<(ErrorCategory, Severity), usize>,
    pub total: usize,
    /// `None` when there are no errors.
    pub percentages: Option<BTreeMap<(ErrorCategory, Severity), T>>,
}

fn pair_count(project: &Project, system: &str) -> usize {
    project
        .designated_pairs
        .iter()
        .filter(|(a, b)| a == system || b == system)
        .count()
}

/// Tally of target-side errors over all annotators.
pub fn error_distribution<T: Scalar>(
    project: &Project,
    setting: Setting,
    options: DistributionOptions,
) -> ErrorDistribution<T> {
    let mut counts: BTreeMap<(ErrorCategory, Severity), usize> = BTreeMap::new();
    for ann in project.annotations(setting) {
        let weight = if options.duplicate_rule && setting == Setting::Mqm {
            pair_count(project, &ann.system).max(1)
        } else {
            1
        };
        for e in ann.errors.iter().filter(|e| is_target_error(e)) {
            let cat = if options.subcategories {
                e.category
            } else {
                ErrorCategory::top(e.category.category)
            };
            *counts.entry((cat, e.severity)).or_default() += weight;
        }
    }
    let total: usize = counts.values().sum();
    let percentages = (total > 0).then(|| {
        counts
            .iter()
            .map(|(k, &c)| (*k, T::from_count(c) / T::from_count(total)))
            .collect()
    });
    ErrorDistribution {
        setting,
        counts,
        total,
        percentages,
    }
}

pub fn distribution_tsv<T: Scalar>(dists: &[ErrorDistribution<T>]) -> String {
    let mut out = String::from("category\tseverity\tsetting\tcount\tpct\n");
    for d in dists {
        for (&(cat, sev), &count) in &d.counts {
            let pct = d
                .percentages
                .as_ref()
                .map(|p| format!("{:.4}", p[&(cat, sev)].to_f64_lossy()))
                .unwrap_or_else(|| "NA".into());
            out.push_str(&format!(
                "{}\t{}\t{}\t{count}\t{pct}\n",
                cat.path(),
                sev.label(),
                d.setting.name()
            ));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MatchOptions {
    /// Require identical offsets instead of maximal overlap.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorMatch {
    pub segment: SegmentRef,
    /// Side-by-side partner the second error was marked next to.
    pub partner: Option<String>,
    pub mqm: ErrorSpan,
    pub sxs: ErrorSpan,
    pub overlap: usize,
}

fn overlap(x: &ErrorSpan, y: &ErrorSpan, exact: bool) -> usize {
    if x.side != y.side {
        return 0;
    }
    if exact {
        return if (x.start, x.end) == (y.start, y.end) {
            x.end - x.start
        } else {
            0
        };
    }
    x.end.min(y.end).saturating_sub(x.start.max(y.start))
}

/// Greedy one-to-one matching by decreasing character overlap; ties go
/// to the smaller start offset.
pub fn match_spans(mqm: &[ErrorSpan], sxs: &[ErrorSpan], options: MatchOptions) -> Vec<(usize, usize, usize)> {
    let mut candidates = Vec::new();
    for (i, x) in mqm.iter().enumerate().filter(|(_, e)| !e.unspecified_span) {
        for (j, y) in sxs.iter().enumerate().filter(|(_, e)| !e.unspecified_span) {
            let o = overlap(x, y, options.exact);
            if o > 0 {
                candidates.push((o, i, j));
            }
        }
    }
    candidates.sort_by_key(|&(o, i, j)| (std::cmp::Reverse(o), mqm[i].start, sxs[j].start, i, j));
    let mut used_a = vec![false; mqm.len()];
    let mut used_b = vec![false; sxs.len()];
    let mut out = Vec::new();
    for (o, i, j) in candidates {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            out.push((i, j, o));
        }
    }
    out.sort_by_key(|&(i, j, _)| (i, j));
    out
}

/// Matches an annotator's single-sided errors on a system against their
/// side-by-side errors on the same translations. A system shown in two
/// pairs is matched once per pair.
pub fn match_errors_across_settings(
    project: &Project,
    annotator: &str,
    system: &str,
    options: MatchOptions,
) -> Vec<ErrorMatch> {
    let mut mqm: BTreeMap<&SegmentRef, &MqmAnnotation> = BTreeMap::new();
    let mut sxs: BTreeMap<&SegmentRef, Vec<&MqmAnnotation>> = BTreeMap::new();
    for a in project
        .mqm
        .iter()
        .filter(|a| a.annotator == annotator && a.system == system)
    {
        match a.setting {
            Setting::Mqm => {
                mqm.insert(&a.segment, a);
            }
            Setting::SxsMqm => sxs.entry(&a.segment).or_default().push(a),
            Setting::SxsRr => {}
        }
    }
    let mut out = Vec::new();
    for (segment, single) in mqm {
        for side_by_side in sxs.get(segment).into_iter().flatten() {
            for (i, j, o) in match_spans(&single.errors, &side_by_side.errors, options) {
                out.push(ErrorMatch {
                    segment: segment.clone(),
                    partner: side_by_side.pair_partner.clone(),
                    mqm: single.errors[i].clone(),
                    sxs: side_by_side.errors[j].clone(),
                    overlap: o,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConversionMatrix {
    /// (single-sided category, side-by-side category) → matches.
    pub cells: BTreeMap<(Category, Category), usize>,
    pub total: usize,
}

impl ConversionMatrix {
    pub fn get(&self, from: Category, to: Category) -> usize {
        self.cells.get(&(from, to)).copied().unwrap_or(0)
    }
}

/// How matched errors were recategorized from single-sided to
/// side-by-side MQM, over all annotators and systems.
pub fn conversion_matrix(project: &Project, options: MatchOptions) -> Result<ConversionMatrix> {
    let mut cells: BTreeMap<(Category, Category), usize> = BTreeMap::new();
    for annotator in &project.annotators {
        for system in &project.systems {
            for m in match_errors_across_settings(project, annotator, system, options) {
                *cells
                    .entry((m.mqm.category.category, m.sxs.category.category))
                    .or_default() += 1;
            }
        }
    }
    let total = cells.values().sum();
    if total == 0 {
        return Err(Error::NoMatches);
    }
    Ok(ConversionMatrix { cells, total })
}

pub fn conversion_tsv(matrix: &ConversionMatrix) -> String {
    let mut out = String::from("mqm_category\tsxs_mqm_category\tcount\n");
    for (&(from, to), &count) in &matrix.cells {
        out.push_str(&format!("{}\t{}\t{count}\n", from.label(), to.label()));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnotatorStats<T> {
    pub annotator: String,
    pub setting: Setting,
    pub error_count: usize,
    pub z: T,
    pub flagged: bool,
}

/// Flag threshold on the standardized error count.
pub const OUTLIER_Z: f64 = 2.0;

/// Standardizes error counts over the pool (population std; a constant
/// pool gives z = 0).
pub fn outlier_stats<T: Scalar>(setting: Setting, counts: &[(String, usize)]) -> Result<Vec<AnnotatorStats<T>>> {
    if counts.len() < 2 {
        return Err(Error::TooFew {
            min: 2,
            got: counts.len(),
        });
    }
    let values: Vec<T> = counts.iter().map(|(_, c)| T::from_count(*c)).collect();
    let m = mean(&values).expect("non-empty");
    let sd = population_std(&values).expect("non-empty");
    Ok(counts
        .iter()
        .zip(&values)
        .map(|((annotator, count), &v)| {
            let z = if sd > T::zero() { (v - m) / sd } else { T::zero() };
            AnnotatorStats {
                annotator: annotator.clone(),
                setting,
                error_count: *count,
                z,
                flagged: z > T::lit(OUTLIER_Z),
            }
        })
        .collect())
}

/// Per-annotator total error counts in one setting, standardized.
pub fn annotator_outliers<T: Scalar>(project: &Project, setting: Setting) -> Result<Vec<AnnotatorStats<T>>> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for a in project.annotations(setting) {
        *counts.entry(&a.annotator).or_default() += a.errors.len();
    }
    let counts: Vec<(String, usize)> = counts.into_iter().map(|(a, c)| (a.to_string(), c)).collect();
    outlier_stats(setting, &counts)
}

pub fn outliers_tsv<T: Scalar>(stats: &[AnnotatorStats<T>]) -> String {
    let mut out = String::from("annotator\tsetting\terror_count\tz\tflagged\n");
    for s in stats {
        out.push_str(&format!(
            "{}\t{}\t{}\t{:.4}\t{}\n",
            s.annotator,
            s.setting.name(),
            s.error_count,
            s.z.to_f64_lossy(),
            s.flagged
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreSample<T> {
    pub system: String,
    pub segment: SegmentRef,
    pub partner: Option<String>,
    pub score: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnotatorScores<T> {
    /// Anonymized label ("A1", "A2", ... in sorted id order).
    pub label: String,
    pub samples: Vec<ScoreSample<T>>,
    pub mean: T,
    pub median: T,
    pub q1: T,
    pub q3: T,
}

/// Raw segment scores contributed by each annotator, with summaries.
pub fn score_distribution_export<T: Scalar>(project: &Project, setting: Setting) -> Vec<AnnotatorScores<T>> {
    let mut by_annotator: BTreeMap<String, Vec<ScoreSample<T>>> = BTreeMap::new();
    for c in score_cells::<T>(project, setting) {
        by_annotator.entry(c.annotator).or_default().push(ScoreSample {
            system: c.system,
            segment: c.segment,
            partner: c.partner,
            score: c.raw,
        });
    }
    by_annotator
        .into_values()
        .enumerate()
        .map(|(i, samples)| {
            let values: Vec<T> = samples.iter().map(|s| s.score).collect();
            let mut sorted = values.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
            AnnotatorScores {
                label: format!("A{}", i + 1),
                mean: mean(&values).expect("non-empty"),
                median: quantile(&sorted, 0.5).expect("non-empty"),
                q1: quantile(&sorted, 0.25).expect("non-empty"),
                q3: quantile(&sorted, 0.75).expect("non-empty"),
                samples,
            }
        })
        .collect()
}

pub fn score_distribution_tsv<T: Scalar>(setting: Setting, export: &[AnnotatorScores<T>]) -> String {
    let mut out = String::from("annotator\tsetting\tsystem\tdoc_id\tseg_id\tpartner\tscore\n");
    for a in export {
        for s in &a.samples {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                a.label,
                setting.name(),
                s.system,
                s.segment.doc_id,
                s.segment.seg_id,
                s.partner.as_deref().unwrap_or(""),
                s.score.to_f64_lossy()
            ));
        }
    }
    out
}
