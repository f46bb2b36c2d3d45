//! Comparison labels, nominal Krippendorff's alpha, tie rates and
//! length-bucketed agreement.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ComparisonLabel, Project, RrValue, SegmentRef, Setting};
use crate::scalar::Scalar;
use crate::scoring::{score_cells, z_normalize, ZGrouping};

/// What an annotator produced for one compared pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Evidence<T> {
    /// Segment scores for A and B (lower is better).
    Scores(Option<T>, Option<T>),
    Judgment(RrValue),
}

pub fn comparison_label<T: Scalar>(evidence: Evidence<T>) -> Result<ComparisonLabel> {
    match evidence {
        Evidence::Scores(Some(a), Some(b)) => Ok(if a < b {
            ComparisonLabel::ABetter
        } else if a == b {
            ComparisonLabel::Tie
        } else {
            ComparisonLabel::BBetter
        }),
        Evidence::Scores(a, _) => Err(Error::MissingScore {
            detail: format!("no score for system {}", if a.is_none() { "A" } else { "B" }),
        }),
        Evidence::Judgment(v) => Ok(match v {
            RrValue::AMuchBetter | RrValue::ABetter => ComparisonLabel::ABetter,
            RrValue::Same => ComparisonLabel::Tie,
            RrValue::BBetter | RrValue::BMuchBetter => ComparisonLabel::BBetter,
        }),
    }
}

/// Score basis used to derive labels in the MQM settings.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub enum LabelBasis {
    #[default]
    Raw,
    Z,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PairUnit {
    pub segment: SegmentRef,
    pub system_a: String,
    pub system_b: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelRow {
    pub unit: PairUnit,
    pub labels: BTreeMap<String, ComparisonLabel>,
}

/// Per-annotator comparison labels over (segment, designated pair) units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelMatrix {
    pub setting: Setting,
    pub rows: Vec<LabelRow>,
}

impl LabelMatrix {
    pub fn n_labels(&self) -> usize {
        self.rows.iter().map(|r| r.labels.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows whose segment is in `segments`.
    pub fn restrict_segments(&self, segments: &[SegmentRef]) -> LabelMatrix {
        let keep: HashSet<&SegmentRef> = segments.iter().collect();
        LabelMatrix {
            setting: self.setting,
            rows: self
                .rows
                .iter()
                .filter(|r| keep.contains(&r.unit.segment))
                .cloned()
                .collect(),
        }
    }

    /// Rows comparing one of `pairs` (in either orientation).
    pub fn restrict_pairs(&self, pairs: &[(String, String)]) -> LabelMatrix {
        LabelMatrix {
            setting: self.setting,
            rows: self
                .rows
                .iter()
                .filter(|r| {
                    pairs.iter().any(|(a, b)| {
                        (r.unit.system_a == *a && r.unit.system_b == *b)
                            || (r.unit.system_a == *b && r.unit.system_b == *a)
                    })
                })
                .cloned()
                .collect(),
        }
    }

    /// Label lists per unit, for [`nominal_alpha`].
    pub fn label_lists(&self) -> Vec<Vec<ComparisonLabel>> {
        self.rows.iter().map(|r| r.labels.values().copied().collect()).collect()
    }
}

type ScoreKey<'a> = (&'a str, &'a str, &'a SegmentRef, Option<&'a str>);

pub fn build_label_matrix(project: &Project, setting: Setting, basis: LabelBasis) -> Result<LabelMatrix> {
    if project.designated_pairs.is_empty() {
        return Err(Error::NoPairs);
    }
    let units = project.unit_index();
    let mut rows = Vec::new();

    let mut cells = if setting.is_mqm() {
        score_cells::<f64>(project, setting)
    } else {
        Vec::new()
    };
    if basis == LabelBasis::Z && !cells.is_empty() {
        z_normalize(&mut cells, ZGrouping::PerSetting)?;
    }
    let scores: HashMap<ScoreKey<'_>, f64> = cells
        .iter()
        .map(|c| {
            let v = match basis {
                LabelBasis::Raw => c.raw,
                LabelBasis::Z => c.z.unwrap_or(c.raw),
            };
            (
                (
                    c.annotator.as_str(),
                    c.system.as_str(),
                    &c.segment,
                    c.partner.as_deref(),
                ),
                v,
            )
        })
        .collect();
    let annotators: Vec<&str> = project.annotators.iter().map(String::as_str).collect();

    let mut rr_by_segment: HashMap<&SegmentRef, Vec<&crate::model::RrJudgment>> = HashMap::new();
    for j in &project.rr {
        rr_by_segment.entry(&j.segment).or_default().push(j);
    }

    for segment in project.segments() {
        for (a, b) in &project.designated_pairs {
            if !units.contains_key(&(a.as_str(), &segment)) || !units.contains_key(&(b.as_str(), &segment)) {
                continue;
            }
            let mut labels = BTreeMap::new();
            match setting {
                Setting::Mqm | Setting::SxsMqm => {
                    let (pa, pb) = match setting {
                        Setting::Mqm => (None, None),
                        _ => (Some(b.as_str()), Some(a.as_str())),
                    };
                    for &r in &annotators {
                        let sa = scores.get(&(r, a.as_str(), &segment, pa)).copied();
                        let sb = scores.get(&(r, b.as_str(), &segment, pb)).copied();
                        if sa.is_some() && sb.is_some() {
                            let label = comparison_label(Evidence::Scores(sa, sb))?;
                            labels.insert(r.to_string(), label);
                        }
                    }
                }
                Setting::SxsRr => {
                    for j in rr_by_segment.get(&segment).into_iter().flatten() {
                        if let Some(v) = j.oriented(a, b) {
                            labels
                                .entry(j.annotator.clone())
                                .or_insert(comparison_label::<f64>(Evidence::Judgment(v))?);
                        }
                    }
                }
            }
            if !labels.is_empty() {
                rows.push(LabelRow {
                    unit: PairUnit {
                        segment: segment.clone(),
                        system_a: a.clone(),
                        system_b: b.clone(),
                    },
                    labels,
                });
            }
        }
    }
    Ok(LabelMatrix { setting, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgreementResult<T> {
    pub alpha: T,
    /// Units with at least two labels.
    pub n_units: usize,
    /// Labels in those units.
    pub n_labels: usize,
}

/// Nominal Krippendorff's alpha over units of labels. Units with fewer
/// than two labels are not pairable and are skipped.
pub fn nominal_alpha<L: Ord + Clone, T: Scalar>(units: &[Vec<L>]) -> Result<AgreementResult<T>> {
    let mut categories: Vec<L> = units.iter().flatten().cloned().collect();
    categories.sort();
    categories.dedup();
    let k = categories.len();
    let index = |l: &L| categories.binary_search(l).expect("collected");

    let mut coincidence = vec![vec![T::zero(); k]; k];
    let mut n_units = 0;
    let mut n_labels = 0;
    for unit in units {
        let m = unit.len();
        if m < 2 {
            continue;
        }
        n_units += 1;
        n_labels += m;
        let mut counts = vec![0usize; k];
        for l in unit {
            counts[index(l)] += 1;
        }
        let w = T::from_count(m - 1);
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            for d in 0..k {
                let pairs = if c == d {
                    counts[c] * (counts[c] - 1)
                } else {
                    counts[c] * counts[d]
                };
                if pairs > 0 {
                    coincidence[c][d] = coincidence[c][d] + T::from_count(pairs) / w;
                }
            }
        }
    }

    let marginals: Vec<T> = coincidence.iter().map(|row| row.iter().copied().sum()).collect();
    let n: T = marginals.iter().copied().sum();
    let mut observed = T::zero();
    let mut expected = T::zero();
    for c in 0..k {
        for d in 0..k {
            if c != d {
                observed = observed + coincidence[c][d];
                expected = expected + marginals[c] * marginals[d];
            }
        }
    }
    if n_labels < 2 || expected == T::zero() {
        return Err(Error::Degenerate);
    }
    let expected = expected / (n - T::one());
    Ok(AgreementResult {
        alpha: T::one() - observed / expected,
        n_units,
        n_labels,
    })
}

pub fn krippendorff_alpha<T: Scalar>(matrix: &LabelMatrix) -> Result<AgreementResult<T>> {
    nominal_alpha(&matrix.label_lists())
}

/// Share of present labels that are ties; `None` for an empty matrix.
pub fn tie_rate<T: Scalar>(matrix: &LabelMatrix) -> Option<T> {
    let total = matrix.n_labels();
    if total == 0 {
        return None;
    }
    let ties = matrix
        .rows
        .iter()
        .flat_map(|r| r.labels.values())
        .filter(|&&l| l == ComparisonLabel::Tie)
        .count();
    Some(T::from_count(ties) / T::from_count(total))
}

/// Text whose whitespace tokens measure segment length.
#[derive(Debug, Clone, PartialEq)]
pub enum LengthRule {
    Source,
    /// Mean token count over all systems' translations.
    MeanTarget,
    /// Externally supplied text per segment, e.g. an English reference.
    Texts(HashMap<SegmentRef, String>),
}

impl LengthRule {
    /// English source when translating out of English, otherwise the
    /// (English-side) translations.
    pub fn for_language_pair(language_pair: &str) -> LengthRule {
        match language_pair.split(['-', '_']).next() {
            Some(src) if src.eq_ignore_ascii_case("en") => LengthRule::Source,
            _ => LengthRule::MeanTarget,
        }
    }
}

pub fn whitespace_tokens(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Segments sorted by length and cut into `k` near-equal groups; earlier
/// groups absorb the remainder. Equal lengths keep document order.
pub fn length_buckets(project: &Project, k: usize, rule: &LengthRule) -> Result<Vec<Vec<SegmentRef>>> {
    if k == 0 {
        return Err(Error::Empty {
            detail: "bucket count must be at least 1".into(),
        });
    }
    let mut per_segment: HashMap<&SegmentRef, (usize, usize, Option<&str>)> = HashMap::new();
    for u in &project.units {
        let e = per_segment.entry(&u.segment).or_insert((0, 0, None));
        e.0 += whitespace_tokens(&u.target);
        e.1 += 1;
        e.2 = Some(u.source.as_str());
    }
    let mut measured: Vec<(f64, SegmentRef)> = Vec::new();
    for seg in project.segments() {
        let len = match rule {
            LengthRule::Source => per_segment
                .get(&seg)
                .and_then(|e| e.2)
                .map(|s| whitespace_tokens(s) as f64),
            LengthRule::MeanTarget => per_segment.get(&seg).map(|&(total, n, _)| total as f64 / n as f64),
            LengthRule::Texts(texts) => texts.get(&seg).map(|t| whitespace_tokens(t) as f64),
        };
        if let Some(len) = len {
            measured.push((len, seg));
        }
    }
    if measured.is_empty() {
        return Err(Error::Empty {
            detail: "no measurable segments".into(),
        });
    }
    measured.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(split_even(measured.into_iter().map(|(_, s)| s).collect(), k))
}

pub(crate) fn split_even<X>(items: Vec<X>, k: usize) -> Vec<Vec<X>> {
    let n = items.len();
    let (base, rem) = (n / k, n % k);
    let mut it = items.into_iter();
    (0..k)
        .map(|i| it.by_ref().take(base + usize::from(i < rem)).collect())
        .collect()
}

/// One row of an agreement report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementRow<T> {
    pub setting: Setting,
    pub scope: String,
    pub alpha: Option<T>,
    pub n_units: usize,
    pub tie_rate: Option<T>,
}

/// Alpha for a scope, recording `None` when it is undefined.
pub fn agreement_row<T: Scalar>(matrix: &LabelMatrix, scope: &str) -> AgreementRow<T> {
    let result = krippendorff_alpha::<T>(matrix).ok();
    AgreementRow {
        setting: matrix.setting,
        scope: scope.to_string(),
        alpha: result.map(|r| r.alpha),
        n_units: result.map_or(0, |r| r.n_units),
        tie_rate: tie_rate(matrix),
    }
}

/// Agreement rows for every setting with data: the full material, each
/// designated pair group, then `buckets` length buckets.
pub fn agreement_report<T: Scalar>(project: &Project, buckets: usize) -> Result<Vec<AgreementRow<T>>> {
    let labels = crate::ranking::pair_group_labels(project.designated_pairs.len());
    let mut groups: Vec<(String, Vec<(String, String)>)> = Vec::new();
    for (label, pair) in labels.into_iter().zip(&project.designated_pairs) {
        match groups.iter_mut().find(|(l, _)| *l == label) {
            Some((_, pairs)) => pairs.push(pair.clone()),
            None => groups.push((label, vec![pair.clone()])),
        }
    }
    let segment_groups = if buckets > 0 {
        length_buckets(project, buckets, &LengthRule::for_language_pair(&project.language_pair))?
    } else {
        Vec::new()
    };
    let mut rows = Vec::new();
    for setting in Setting::ALL {
        if !project.has_setting(setting) {
            continue;
        }
        let matrix = build_label_matrix(project, setting, LabelBasis::Raw)?;
        rows.push(agreement_row(&matrix, "all"));
        for (label, pairs) in &groups {
            rows.push(agreement_row(&matrix.restrict_pairs(pairs), label));
        }
        for (i, segs) in segment_groups.iter().enumerate() {
            rows.push(agreement_row(
                &matrix.restrict_segments(segs),
                &format!("bucket-{}", i + 1),
            ));
        }
    }
    Ok(rows)
}

pub fn agreement_tsv<T: Scalar>(rows: &[AgreementRow<T>]) -> String {
    let mut out = String::from("setting\tscope\talpha\tn_units\ttie_rate\n");
    let opt = |v: Option<T>| v.map(|v| format!("{v:.4}")).unwrap_or_else(|| "NA".into());
    for r in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            r.setting.name(),
            r.scope,
            opt(r.alpha),
            r.n_units,
            opt(r.tie_rate)
        ));
    }
    out
}
