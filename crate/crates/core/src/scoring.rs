//! Segment and system scores. Lower is better in every setting: MQM scores
//! are penalty points, relative-ranking scores are penalties in `[0, 2]`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::is_target_error;
use crate::model::{
    Category, ErrorCategory, MqmAnnotation, Project, RrValue, SegmentRef, Setting, Severity, Subcategory,
};
use crate::scalar::{mean, population_std, Scalar};

/// Penalty in tenths of a point. Integer arithmetic keeps equal scores
/// bit-identical regardless of how they were reached.
fn weight_tenths(category: ErrorCategory, severity: Severity) -> u64 {
    match (category.category, severity) {
        (Category::SourceIssue, _) => 0,
        (Category::NonTranslation, Severity::Major) => 250,
        (_, Severity::Major) => 50,
        (_, Severity::Minor) if category.subcategory == Some(Subcategory::Punctuation) => 1,
        (_, Severity::Minor) => 10,
    }
}

/// Penalty points for one error.
pub fn error_weight<T: Scalar>(category: ErrorCategory, severity: Severity) -> T {
    T::from_count(weight_tenths(category, severity) as usize) / T::lit(10.0)
}

/// Sum of target-side error weights; 0 for an error-free annotation.
pub fn mqm_segment_score<T: Scalar>(annotation: &MqmAnnotation) -> T {
    let tenths: u64 = annotation
        .errors
        .iter()
        .filter(|e| is_target_error(e))
        .map(|e| weight_tenths(e.category, e.severity))
        .sum();
    T::from_count(tenths as usize) / T::lit(10.0)
}

/// `(penalty_a, penalty_b)` for a five-point judgment.
pub fn rr_penalties<T: Scalar>(value: RrValue) -> (T, T) {
    let (a, b) = match value {
        RrValue::AMuchBetter => (0, 2),
        RrValue::ABetter => (0, 1),
        RrValue::Same => (0, 0),
        RrValue::BBetter => (1, 0),
        RrValue::BMuchBetter => (2, 0),
    };
    (T::from_count(a), T::from_count(b))
}

/// One annotator's score for one translation in one setting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreCell<T> {
    pub system: String,
    pub segment: SegmentRef,
    pub annotator: String,
    pub setting: Setting,
    /// The other system of the side-by-side pair, if any.
    pub partner: Option<String>,
    pub raw: T,
    pub z: Option<T>,
}

/// How MQM scores are grouped for z-normalization.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub enum ZGrouping {
    /// One group per (annotator, setting).
    #[default]
    PerSetting,
    /// MQM and side-by-side MQM pooled per annotator.
    PooledMqm,
}

/// Fills `z` on every MQM-setting cell; relative-ranking cells are left
/// untouched with `z = None`.
pub fn z_normalize<T: Scalar>(cells: &mut [ScoreCell<T>], grouping: ZGrouping) -> Result<()> {
    if cells.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let mut groups: BTreeMap<(&str, Option<Setting>), Vec<usize>> = BTreeMap::new();
    for (i, c) in cells.iter().enumerate() {
        if !c.setting.is_mqm() {
            continue;
        }
        let setting = match grouping {
            ZGrouping::PerSetting => Some(c.setting),
            ZGrouping::PooledMqm => None,
        };
        groups.entry((c.annotator.as_str(), setting)).or_default().push(i);
    }
    let groups: Vec<Vec<usize>> = groups.into_values().collect();
    for idx in groups {
        let raws: Vec<T> = idx.iter().map(|&i| cells[i].raw).collect();
        let m = mean(&raws).ok_or(Error::EmptyGroup)?;
        let sd = population_std(&raws).ok_or(Error::EmptyGroup)?;
        for &i in &idx {
            cells[i].z = Some(if sd > T::zero() {
                (cells[i].raw - m) / sd
            } else {
                T::zero()
            });
        }
    }
    for c in cells.iter_mut().filter(|c| !c.setting.is_mqm()) {
        c.z = None;
    }
    Ok(())
}

/// Raw per-annotator cells for one setting.
pub fn score_cells<T: Scalar>(project: &Project, setting: Setting) -> Vec<ScoreCell<T>> {
    match setting {
        Setting::Mqm | Setting::SxsMqm => project
            .annotations(setting)
            .map(|a| ScoreCell {
                system: a.system.clone(),
                segment: a.segment.clone(),
                annotator: a.annotator.clone(),
                setting,
                partner: a.pair_partner.clone(),
                raw: mqm_segment_score(a),
                z: None,
            })
            .collect(),
        Setting::SxsRr => {
            type Key = (String, SegmentRef, String, String);
            let mut sums: BTreeMap<Key, T> = BTreeMap::new();
            for j in &project.rr {
                let (pa, pb) = rr_penalties::<T>(j.value);
                for (sys, other, p) in [(&j.system_a, &j.system_b, pa), (&j.system_b, &j.system_a, pb)] {
                    let key = (sys.clone(), j.segment.clone(), j.annotator.clone(), other.clone());
                    let slot = sums.entry(key).or_insert_with(T::zero);
                    *slot = *slot + p;
                }
            }
            sums.into_iter()
                .map(|((system, segment, annotator, partner), raw)| ScoreCell {
                    system,
                    segment,
                    annotator,
                    setting,
                    partner: Some(partner),
                    raw,
                    z: None,
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScoreOptions {
    pub use_z: bool,
    pub grouping: ZGrouping,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        ScoreOptions {
            use_z: true,
            grouping: ZGrouping::PerSetting,
        }
    }
}

/// Per-annotator cells with segment and system aggregates.
#[derive(Debug, Clone, Serialize)]
pub struct ScoreTable<T> {
    pub setting: Setting,
    pub use_z: bool,
    pub cells: Vec<ScoreCell<T>>,
    /// Mean over the annotators who rated (system, segment).
    pub segment_scores: BTreeMap<(String, SegmentRef), T>,
    /// Mean over the segments present for the system.
    pub system_scores: BTreeMap<String, T>,
}

impl<T: Scalar> ScoreTable<T> {
    fn value(&self, c: &ScoreCell<T>) -> T {
        if self.use_z {
            c.z.unwrap_or(c.raw)
        } else {
            c.raw
        }
    }

    /// Segment means for one system, optionally restricted to cells whose
    /// side-by-side partner is `partner`.
    pub fn segment_vector(&self, system: &str, partner: Option<&str>) -> BTreeMap<SegmentRef, T> {
        let mut acc: BTreeMap<SegmentRef, Vec<T>> = BTreeMap::new();
        for c in self
            .cells
            .iter()
            .filter(|c| c.system == system && partner.is_none_or(|p| c.partner.as_deref() == Some(p)))
        {
            acc.entry(c.segment.clone()).or_default().push(self.value(c));
        }
        acc.into_iter()
            .map(|(s, v)| (s, mean(&v).expect("non-empty")))
            .collect()
    }

    /// Per-annotator values for one (system, segment), keyed by annotator.
    pub fn annotator_values(&self, system: &str, segment: &SegmentRef) -> Vec<(&str, T)> {
        self.cells
            .iter()
            .filter(|c| c.system == system && &c.segment == segment)
            .map(|c| (c.annotator.as_str(), self.value(c)))
            .collect()
    }
}

/// Scores one setting. Cells are sorted so input order never matters.
pub fn build_score_table<T: Scalar>(
    project: &Project,
    setting: Setting,
    options: ScoreOptions,
) -> Result<ScoreTable<T>> {
    let mut cells = match (setting, options.grouping) {
        (Setting::Mqm | Setting::SxsMqm, ZGrouping::PooledMqm) if options.use_z => {
            let mut all = score_cells::<T>(project, Setting::Mqm);
            all.extend(score_cells::<T>(project, Setting::SxsMqm));
            if !all.is_empty() {
                z_normalize(&mut all, options.grouping)?;
            }
            all.retain(|c| c.setting == setting);
            all
        }
        _ => {
            let mut cells = score_cells::<T>(project, setting);
            if options.use_z && setting.is_mqm() && !cells.is_empty() {
                z_normalize(&mut cells, options.grouping)?;
            }
            cells
        }
    };
    if cells.is_empty() {
        return Err(Error::NoAnnotations {
            setting: setting.name().to_string(),
        });
    }
    cells.sort_by(|a, b| {
        (&a.system, &a.segment, &a.annotator, &a.partner).cmp(&(&b.system, &b.segment, &b.annotator, &b.partner))
    });
    let use_z = options.use_z && setting.is_mqm();
    let mut table = ScoreTable {
        setting,
        use_z,
        cells,
        segment_scores: BTreeMap::new(),
        system_scores: BTreeMap::new(),
    };
    let mut per_segment: BTreeMap<(String, SegmentRef), Vec<T>> = BTreeMap::new();
    for c in &table.cells {
        per_segment
            .entry((c.system.clone(), c.segment.clone()))
            .or_default()
            .push(table.value(c));
    }
    let mut per_system: BTreeMap<String, Vec<T>> = BTreeMap::new();
    for ((system, segment), values) in per_segment {
        let m = mean(&values).expect("non-empty");
        per_system.entry(system.clone()).or_default().push(m);
        table.segment_scores.insert((system, segment), m);
    }
    table.system_scores = per_system
        .into_iter()
        .map(|(s, v)| (s, mean(&v).expect("non-empty")))
        .collect();
    Ok(table)
}

/// TSV export: `setting, system, doc_id, seg_id, rater, raw, z`.
pub fn score_table_tsv<T: Scalar>(table: &ScoreTable<T>) -> String {
    let mut out = String::from("setting\tsystem\tdoc_id\tseg_id\trater\traw\tz\n");
    for c in &table.cells {
        let z = c.z.map(|z| format!("{z}")).unwrap_or_default();
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            c.setting, c.system, c.segment.doc_id, c.segment.seg_id, c.annotator, c.raw, z
        ));
    }
    out
}

/// Removes every annotation by `ids`. A segment that loses all of its
/// annotators in a setting where it had some is dropped from every
/// setting, together with its units; documents left empty go too.
pub fn exclude_annotators(project: &Project, ids: &[String]) -> Project {
    let ids: HashSet<&str> = ids.iter().map(String::as_str).collect();
    if ids.is_empty() {
        return project.clone();
    }
    let coverage = |p: &Project| -> HashMap<(Setting, SegmentRef), usize> {
        let mut m = HashMap::new();
        for a in &p.mqm {
            *m.entry((a.setting, a.segment.clone())).or_insert(0) += 1;
        }
        for j in &p.rr {
            *m.entry((Setting::SxsRr, j.segment.clone())).or_insert(0) += 1;
        }
        m
    };
    let before = coverage(project);
    let mut out = project.clone();
    out.mqm.retain(|a| !ids.contains(a.annotator.as_str()));
    out.rr.retain(|j| !ids.contains(j.annotator.as_str()));
    out.annotators.retain(|a| !ids.contains(a.as_str()));
    let after = coverage(&out);
    let dropped: BTreeSet<SegmentRef> = before
        .keys()
        .filter(|k| !after.contains_key(k))
        .map(|(_, seg)| seg.clone())
        .collect();
    if dropped.is_empty() {
        return out;
    }
    out.mqm.retain(|a| !dropped.contains(&a.segment));
    out.rr.retain(|j| !dropped.contains(&j.segment));
    out.units.retain(|u| !dropped.contains(&u.segment));
    for doc in &mut out.documents {
        let id = doc.id.clone();
        doc.segments
            .retain(|s| !dropped.contains(&SegmentRef::new(id.clone(), s.clone())));
    }
    out.documents.retain(|d| !d.segments.is_empty());
    out
}
