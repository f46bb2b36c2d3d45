//! Inter-translation consistency: whether one annotator marks the same
//! error the same way in two systems' translations where those
//! translations share text.
//!
//! Both targets are whitespace-tokenized and aligned. An error is a
//! potential common error when every token it touches lies in an `Equal`
//! region. Potential errors from both sides that cover the same aligned
//! token positions form one candidate; a candidate is matched under a
//! criterion when an error from each side agrees on it.

mod align;

pub use align::{align_tokens, AlignKind, AlignOp};

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::is_target_error;
use crate::model::{ErrorCategory, ErrorSpan, MqmAnnotation, Project, SegmentRef, Setting, Severity};
use crate::scalar::{mean, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ItcCriterion {
    Span,
    SpanCat,
    SpanSev,
    SpanCatSev,
}

impl ItcCriterion {
    pub const ALL: [ItcCriterion; 4] = [
        ItcCriterion::Span,
        ItcCriterion::SpanCat,
        ItcCriterion::SpanSev,
        ItcCriterion::SpanCatSev,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ItcCriterion::Span => "Span",
            ItcCriterion::SpanCat => "Span+Cat",
            ItcCriterion::SpanSev => "Span+Sev",
            ItcCriterion::SpanCatSev => "Span+Cat+Sev",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ItcOptions {
    /// Require every touched token to be aligned `Equal`; otherwise one
    /// such token suffices.
    pub strict_overlap: bool,
    /// Compare subcategories rather than top-level categories.
    pub subcategory_strict: bool,
}

impl Default for ItcOptions {
    fn default() -> Self {
        ItcOptions {
            strict_overlap: true,
            subcategory_strict: false,
        }
    }
}

/// Char ranges of whitespace-separated tokens.
pub fn token_spans(text: &str) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    let mut n = 0;
    for (i, c) in text.chars().enumerate() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s, i));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
        n = i + 1;
    }
    if let Some(s) = start {
        out.push((s, n));
    }
    out
}

/// Potential common errors that share aligned positions. `key` lists the
/// covered tokens in A's coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommonGroup {
    pub key: Vec<usize>,
    /// Indices into the A-side error list.
    pub errors_a: Vec<usize>,
    /// Indices into the B-side error list.
    pub errors_b: Vec<usize>,
}

impl CommonGroup {
    /// Candidates in this group: pairs plus unpaired leftovers.
    pub fn candidates(&self) -> usize {
        self.errors_a.len().max(self.errors_b.len())
    }
}

/// For each token of one side: its counterpart on the other side when
/// aligned `Equal`.
fn equal_map(ops: &[AlignOp], len: usize, side_a: bool) -> Vec<Option<usize>> {
    let mut map = vec![None; len];
    for op in ops.iter().filter(|o| o.kind == AlignKind::Equal) {
        let (from, to) = if side_a { (&op.a, &op.b) } else { (&op.b, &op.a) };
        for (k, t) in from.clone().enumerate() {
            map[t] = Some(to.start + k);
        }
    }
    map
}

/// Key (A-side token coordinates) of a potential common error, or `None`.
fn common_key(
    error: &ErrorSpan,
    tokens: &[(usize, usize)],
    to_a: &dyn Fn(usize) -> Option<usize>,
    strict: bool,
) -> Option<Vec<usize>> {
    if error.unspecified_span || !is_target_error(error) {
        return None;
    }
    let covered: Vec<usize> = tokens
        .iter()
        .enumerate()
        .filter(|(_, &(s, e))| s < error.end && error.start < e)
        .map(|(i, _)| i)
        .collect();
    if covered.is_empty() {
        return None;
    }
    let mapped: Vec<Option<usize>> = covered.iter().map(|&t| to_a(t)).collect();
    let key: Vec<usize> = mapped.iter().flatten().copied().collect();
    let ok = if strict {
        key.len() == covered.len()
    } else {
        !key.is_empty()
    };
    ok.then_some(key)
}

/// Groups the potential common errors of two annotated translations.
pub fn potential_common_errors(
    target_a: &str,
    errors_a: &[ErrorSpan],
    target_b: &str,
    errors_b: &[ErrorSpan],
    options: ItcOptions,
) -> Vec<CommonGroup> {
    let spans_a = token_spans(target_a);
    let spans_b = token_spans(target_b);
    let chars_a: Vec<char> = target_a.chars().collect();
    let chars_b: Vec<char> = target_b.chars().collect();
    let words_a: Vec<String> = spans_a.iter().map(|&(s, e)| chars_a[s..e].iter().collect()).collect();
    let words_b: Vec<String> = spans_b.iter().map(|&(s, e)| chars_b[s..e].iter().collect()).collect();
    let ops = align_tokens(&words_a, &words_b);
    let a_map = equal_map(&ops, words_a.len(), true);
    let b_map = equal_map(&ops, words_b.len(), false);
    let a_identity = |t: usize| a_map[t].map(|_| t);
    let b_to_a = |t: usize| b_map[t];

    let mut groups: BTreeMap<Vec<usize>, CommonGroup> = BTreeMap::new();
    for (i, e) in errors_a.iter().enumerate() {
        if let Some(key) = common_key(e, &spans_a, &a_identity, options.strict_overlap) {
            groups
                .entry(key.clone())
                .or_insert_with(|| CommonGroup {
                    key,
                    errors_a: vec![],
                    errors_b: vec![],
                })
                .errors_a
                .push(i);
        }
    }
    for (i, e) in errors_b.iter().enumerate() {
        if let Some(key) = common_key(e, &spans_b, &b_to_a, options.strict_overlap) {
            groups
                .entry(key.clone())
                .or_insert_with(|| CommonGroup {
                    key,
                    errors_a: vec![],
                    errors_b: vec![],
                })
                .errors_b
                .push(i);
        }
    }
    groups.into_values().collect()
}

fn criterion_key(
    e: &ErrorSpan,
    criterion: ItcCriterion,
    options: ItcOptions,
) -> (Option<ErrorCategory>, Option<Severity>) {
    let cat = if options.subcategory_strict {
        e.category
    } else {
        ErrorCategory::top(e.category.category)
    };
    match criterion {
        ItcCriterion::Span => (None, None),
        ItcCriterion::SpanCat => (Some(cat), None),
        ItcCriterion::SpanSev => (None, Some(e.severity)),
        ItcCriterion::SpanCatSev => (Some(cat), Some(e.severity)),
    }
}

/// Matched and potential counts under all four criteria.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ItcCounts {
    pub potential: usize,
    pub matched: [usize; 4],
}

impl ItcCounts {
    pub fn add(&mut self, other: &ItcCounts) {
        self.potential += other.potential;
        for k in 0..4 {
            self.matched[k] += other.matched[k];
        }
    }

    pub fn matched(&self, criterion: ItcCriterion) -> usize {
        self.matched[criterion.index()]
    }

    pub fn percentage<T: Scalar>(&self, criterion: ItcCriterion) -> Option<T> {
        (self.potential > 0).then(|| T::from_count(self.matched(criterion)) / T::from_count(self.potential))
    }
}

/// Within each group, errors that agree under a criterion pair up
/// one-to-one; the count is a maximum matching.
///
/// The alignment is not symmetric in its inputs, so the two sides are
/// put in lexicographic order of their text first.
pub fn count_segment(
    target_a: &str,
    errors_a: &[ErrorSpan],
    target_b: &str,
    errors_b: &[ErrorSpan],
    options: ItcOptions,
) -> ItcCounts {
    let (target_a, errors_a, target_b, errors_b) = if target_b < target_a {
        (target_b, errors_b, target_a, errors_a)
    } else {
        (target_a, errors_a, target_b, errors_b)
    };
    let groups = potential_common_errors(target_a, errors_a, target_b, errors_b, options);
    let mut counts = ItcCounts::default();
    for g in &groups {
        counts.potential += g.candidates();
        for criterion in ItcCriterion::ALL {
            let mut tally: HashMap<_, (usize, usize)> = HashMap::new();
            for &i in &g.errors_a {
                tally
                    .entry(criterion_key(&errors_a[i], criterion, options))
                    .or_default()
                    .0 += 1;
            }
            for &i in &g.errors_b {
                tally
                    .entry(criterion_key(&errors_b[i], criterion, options))
                    .or_default()
                    .1 += 1;
            }
            counts.matched[criterion.index()] += tally.values().map(|&(x, y)| x.min(y)).sum::<usize>();
        }
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItcResult<T> {
    pub annotator: String,
    pub system_a: String,
    pub system_b: String,
    pub criterion: ItcCriterion,
    pub matched: usize,
    pub potential: usize,
    pub percentage: Option<T>,
}

/// The annotation of `system` on `segment` that represents it when
/// compared against `other`. In side-by-side MQM this is the annotation
/// made next to `other` if the two were shown together, else the one from
/// the system's first designated pair.
fn representative<'p>(
    project: &'p Project,
    index: &HashMap<(Setting, &'p str, &'p str, &'p SegmentRef, Option<&'p str>), &'p MqmAnnotation>,
    setting: Setting,
    annotator: &str,
    system: &str,
    other: &str,
    segment: &SegmentRef,
) -> Option<&'p MqmAnnotation> {
    match setting {
        Setting::Mqm => index.get(&(setting, annotator, system, segment, None)).copied(),
        _ => {
            if let Some(a) = index.get(&(setting, annotator, system, segment, Some(other))) {
                return Some(a);
            }
            let primary = primary_partner(project, system)?;
            index
                .get(&(setting, annotator, system, segment, Some(primary)))
                .copied()
        }
    }
}

fn primary_partner<'p>(project: &'p Project, system: &str) -> Option<&'p str> {
    project.designated_pairs.iter().find_map(|(a, b)| {
        if a == system {
            Some(b.as_str())
        } else if b == system {
            Some(a.as_str())
        } else {
            None
        }
    })
}

type AnnIndex<'p> = HashMap<(Setting, &'p str, &'p str, &'p SegmentRef, Option<&'p str>), &'p MqmAnnotation>;

fn annotation_index(project: &Project) -> AnnIndex<'_> {
    project
        .mqm
        .iter()
        .map(|a| {
            (
                (
                    a.setting,
                    a.annotator.as_str(),
                    a.system.as_str(),
                    &a.segment,
                    a.pair_partner.as_deref(),
                ),
                a,
            )
        })
        .collect()
}

fn pair_counts(
    project: &Project,
    index: &AnnIndex<'_>,
    setting: Setting,
    annotator: &str,
    system_a: &str,
    system_b: &str,
    options: ItcOptions,
) -> Option<ItcCounts> {
    let units = project.unit_index();
    let mut total = ItcCounts::default();
    let mut any = false;
    for segment in project.segments() {
        let (Some(ua), Some(ub)) = (units.get(&(system_a, &segment)), units.get(&(system_b, &segment))) else {
            continue;
        };
        let (Some(aa), Some(ab)) = (
            representative(project, index, setting, annotator, system_a, system_b, &segment),
            representative(project, index, setting, annotator, system_b, system_a, &segment),
        ) else {
            continue;
        };
        any = true;
        total.add(&count_segment(&ua.target, &aa.errors, &ub.target, &ab.errors, options));
    }
    any.then_some(total)
}

/// Consistency of one annotator between two systems over their common
/// segments.
pub fn itc<T: Scalar>(
    project: &Project,
    setting: Setting,
    annotator: &str,
    system_a: &str,
    system_b: &str,
    criterion: ItcCriterion,
    options: ItcOptions,
) -> Result<ItcResult<T>> {
    let index = annotation_index(project);
    let counts = pair_counts(project, &index, setting, annotator, system_a, system_b, options).ok_or_else(|| {
        Error::NoOverlap {
            annotator: annotator.to_string(),
            system_a: system_a.to_string(),
            system_b: system_b.to_string(),
        }
    })?;
    Ok(ItcResult {
        annotator: annotator.to_string(),
        system_a: system_a.to_string(),
        system_b: system_b.to_string(),
        criterion,
        matched: counts.matched(criterion),
        potential: counts.potential,
        percentage: counts.percentage(criterion),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PairScope {
    /// Pairs shown side by side.
    Designated,
    /// Every other pair among the designated systems.
    NonDesignated,
}

impl PairScope {
    pub fn name(self) -> &'static str {
        match self {
            PairScope::Designated => "designated",
            PairScope::NonDesignated => "non-designated",
        }
    }
}

pub fn scope_pairs(project: &Project, scope: PairScope) -> Vec<(String, String)> {
    match scope {
        PairScope::Designated => project.designated_pairs.clone(),
        PairScope::NonDesignated => {
            let systems = project.paired_systems();
            let mut out = Vec::new();
            for (i, a) in systems.iter().enumerate() {
                for b in &systems[i + 1..] {
                    if !project.is_designated(a, b) {
                        out.push((a.clone(), b.clone()));
                    }
                }
            }
            out
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItcReportRow<T> {
    pub scope: PairScope,
    pub setting: Setting,
    pub criterion: ItcCriterion,
    pub mean_percentage: Option<T>,
    pub n_annotators: usize,
}

/// Per-annotator counts pooled over the scope's pairs.
pub fn annotator_counts(
    project: &Project,
    setting: Setting,
    scope: PairScope,
    options: ItcOptions,
) -> BTreeMap<String, ItcCounts> {
    let index = annotation_index(project);
    let pairs = scope_pairs(project, scope);
    let mut out = BTreeMap::new();
    for annotator in &project.annotators {
        let mut total = ItcCounts::default();
        for (a, b) in &pairs {
            if let Some(c) = pair_counts(project, &index, setting, annotator, a, b, options) {
                total.add(&c);
            }
        }
        if total.potential > 0 {
            out.insert(annotator.clone(), total);
        }
    }
    out
}

/// Mean over annotators (those with a potential common error) of each
/// annotator's pooled percentage.
pub fn itc_report<T: Scalar>(
    project: &Project,
    setting: Setting,
    scope: PairScope,
    options: ItcOptions,
) -> Vec<ItcReportRow<T>> {
    let per_annotator = annotator_counts(project, setting, scope, options);
    ItcCriterion::ALL
        .into_iter()
        .map(|criterion| {
            let values: Vec<T> = per_annotator.values().filter_map(|c| c.percentage(criterion)).collect();
            ItcReportRow {
                scope,
                setting,
                criterion,
                mean_percentage: mean(&values),
                n_annotators: values.len(),
            }
        })
        .collect()
}

pub fn itc_report_tsv<T: Scalar>(language_pair: &str, rows: &[ItcReportRow<T>]) -> String {
    let mut out = String::from("scope\tsetting\tcriterion\tlanguage_pair\tmean_percentage\tn_annotators\n");
    for r in rows {
        let pct = r
            .mean_percentage
            .map(|v| format!("{:.2}", v * T::lit(100.0)))
            .unwrap_or_else(|| "NA".into());
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            r.scope.name(),
            r.setting.name(),
            r.criterion.name(),
            language_pair,
            pct,
            r.n_annotators
        ));
    }
    out
}
