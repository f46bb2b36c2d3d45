//! WMT-style MQM TSV files and the side-by-side / relative-ranking
//! extensions.
//!
//! Layout: UTF-8, tab-separated, `\n` line endings, mandatory header, no
//! quoting. Unknown trailing columns are accepted and ignored.

use std::collections::{BTreeMap, HashMap};

use unicode_normalization::UnicodeNormalization;

use super::span::{extract_span, insert_span};
use crate::error::{Error, Result};
use crate::model::{
    Category, Document, ErrorCategory, ErrorSpan, MqmAnnotation, RrJudgment, RrValue, SegmentRef, Setting, Severity,
    Side, TranslationUnit,
};

pub const MQM_COLUMNS: [&str; 9] = [
    "system", "doc", "doc_id", "seg_id", "rater", "source", "target", "category", "severity",
];
pub const PARTNER_COLUMN: &str = "pair_partner";
pub const RR_COLUMNS: [&str; 6] = ["doc_id", "seg_id", "system_a", "system_b", "rater", "value"];
pub const UNIT_COLUMNS: [&str; 6] = ["system", "doc", "doc_id", "seg_id", "source", "target"];

const NO_ERROR: &str = "No-error";

/// Everything recoverable from an MQM TSV file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MqmTable {
    pub annotations: Vec<MqmAnnotation>,
    pub units: Vec<TranslationUnit>,
    /// Documents in first-appearance order, segments likewise.
    pub documents: Vec<Document>,
}

/// One data row, split into fields.
struct Row<'a> {
    number: usize,
    fields: Vec<&'a str>,
}

fn decode(bytes: &[u8]) -> Result<&str> {
    std::str::from_utf8(bytes).map_err(|e| Error::Utf8 {
        position: e.valid_up_to(),
    })
}

/// Splits into header + rows, checking the header starts with `expected`.
fn split_table<'a>(text: &'a str, expected: &[&str]) -> Result<(Vec<&'a str>, Vec<Row<'a>>)> {
    let mut lines = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l));
    let header: Vec<&str> = lines.next().unwrap_or("").split('\t').collect();
    if header.len() < expected.len() || header[..expected.len()] != *expected {
        return Err(Error::BadHeader {
            expected: expected.join("\t"),
            found: header.join("\t"),
        });
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let number = i + 2;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < expected.len() {
            return Err(Error::MalformedRow {
                row: number,
                detail: format!("{} fields, expected {}", fields.len(), expected.len()),
            });
        }
        rows.push(Row { number, fields });
    }
    Ok((header, rows))
}

fn nfc(s: &str) -> String {
    s.nfc().collect()
}

fn non_empty<'a>(row: &Row<'a>, idx: usize, name: &str) -> Result<&'a str> {
    let v = row.fields[idx];
    if v.is_empty() {
        return Err(Error::MalformedRow {
            row: row.number,
            detail: format!("empty {name}"),
        });
    }
    Ok(v)
}

fn parse_severity(s: &str, row: usize) -> Result<Option<Severity>> {
    match s.trim().to_ascii_lowercase().as_str() {
        "major" => Ok(Some(Severity::Major)),
        "minor" => Ok(Some(Severity::Minor)),
        "no-error" | "no_error" | "noerror" => Ok(None),
        _ => Err(Error::SeverityParse {
            row,
            severity: s.to_string(),
        }),
    }
}

fn is_no_error(category: &str) -> bool {
    matches!(
        category.trim().to_ascii_lowercase().as_str(),
        "no-error" | "no_error" | "noerror"
    )
}

/// Parses an MQM (or, with `Setting::SxsMqm`, side-by-side MQM) TSV.
pub fn parse_mqm_tsv(bytes: &[u8], setting: Setting) -> Result<MqmTable> {
    let text = decode(bytes)?;
    let mut expected: Vec<&str> = MQM_COLUMNS.to_vec();
    if setting == Setting::SxsMqm {
        expected.push(PARTNER_COLUMN);
    }
    let (_, rows) = split_table(text, &expected)?;

    type Key = (String, SegmentRef, String, Option<String>);
    let mut annotations: BTreeMap<Key, MqmAnnotation> = BTreeMap::new();
    let mut order: Vec<Key> = Vec::new();
    let mut units: HashMap<(String, SegmentRef), usize> = HashMap::new();
    let mut unit_list: Vec<TranslationUnit> = Vec::new();
    let mut documents: Vec<Document> = Vec::new();
    let mut doc_index: HashMap<String, usize> = HashMap::new();

    for row in &rows {
        let n = row.number;
        let system = non_empty(row, 0, "system")?;
        let doc_id = non_empty(row, 2, "doc_id")?;
        let seg_id = non_empty(row, 3, "seg_id")?;
        let rater = non_empty(row, 4, "rater")?;
        let doc_name = row.fields[1];
        let (source, source_span) = extract_span(&nfc(row.fields[5])).map_err(|e| e.at_row(n))?;
        let (target, target_span) = extract_span(&nfc(row.fields[6])).map_err(|e| e.at_row(n))?;
        let category_text = row.fields[7];
        let severity_text = row.fields[8];
        let partner = if setting == Setting::SxsMqm {
            Some(non_empty(row, 9, PARTNER_COLUMN)?.to_string())
        } else {
            None
        };

        let segment = SegmentRef::new(doc_id, seg_id);
        let di = *doc_index.entry(doc_id.to_string()).or_insert_with(|| {
            documents.push(Document {
                id: doc_id.to_string(),
                name: doc_name.to_string(),
                segments: Vec::new(),
            });
            documents.len() - 1
        });
        if !documents[di].segments.iter().any(|s| s == seg_id) {
            documents[di].segments.push(seg_id.to_string());
        }

        let unit_key = (system.to_string(), segment.clone());
        match units.get(&unit_key) {
            Some(&i) => {
                let u = &unit_list[i];
                if u.source != source || u.target != target {
                    return Err(Error::UnitConflict { row: n });
                }
            }
            None => {
                units.insert(unit_key, unit_list.len());
                unit_list.push(TranslationUnit {
                    system: system.to_string(),
                    segment: segment.clone(),
                    source,
                    target,
                });
            }
        }

        let key: Key = (system.to_string(), segment.clone(), rater.to_string(), partner.clone());
        let ann = annotations.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            MqmAnnotation {
                annotator: rater.to_string(),
                setting,
                system: system.to_string(),
                segment,
                errors: Vec::new(),
                pair_partner: partner,
            }
        });

        if is_no_error(category_text) {
            if source_span.is_some() || target_span.is_some() {
                return Err(Error::MalformedRow {
                    row: n,
                    detail: "No-error row carries a marked span".into(),
                });
            }
            if parse_severity(severity_text, n)?.is_some() {
                return Err(Error::SeverityParse {
                    row: n,
                    severity: severity_text.to_string(),
                });
            }
            continue;
        }

        let category = ErrorCategory::parse(category_text).ok_or_else(|| Error::UnknownCategory {
            row: n,
            category: category_text.to_string(),
        })?;
        let severity = parse_severity(severity_text, n)?.ok_or_else(|| Error::SeverityParse {
            row: n,
            severity: severity_text.to_string(),
        })?;
        let span = match (source_span, target_span) {
            (Some(_), Some(_)) => return Err(Error::MarkerMultiple.at_row(n)),
            (Some((s, e)), None) => Some((Side::Source, s, e)),
            (None, Some((s, e))) => Some((Side::Target, s, e)),
            (None, None) => None,
        };
        let error = match span {
            Some((_, s, e)) if s == e => return Err(Error::EmptySpan.at_row(n)),
            Some((side, start, end)) => ErrorSpan {
                side,
                start,
                end,
                category,
                severity,
                unspecified_span: false,
            },
            None => ErrorSpan::unspecified(category, severity),
        };
        ann.errors.push(error);
    }

    let mut out: Vec<MqmAnnotation> = order
        .into_iter()
        .map(|k| annotations.remove(&k).expect("key recorded"))
        .collect();
    for a in &mut out {
        a.sort_errors();
    }
    Ok(MqmTable {
        annotations: out,
        units: unit_list,
        documents,
    })
}

fn check_field<'a>(name: &str, value: &'a str) -> Result<&'a str> {
    if value.contains(['\t', '\n', '\r']) {
        return Err(Error::TabInField {
            field: name.to_string(),
        });
    }
    Ok(value)
}

fn push_row(out: &mut String, fields: &[&str]) {
    out.push_str(&fields.join("\t"));
    out.push('\n');
}

/// Writes annotations as one row per error (one `No-error` row for an
/// error-free annotation), ordered by (doc_id, seg_id, system, rater,
/// partner, span).
pub fn write_mqm_tsv(
    annotations: &[MqmAnnotation],
    units: &[TranslationUnit],
    documents: &[Document],
    setting: Setting,
) -> Result<Vec<u8>> {
    let unit_map: HashMap<(&str, &SegmentRef), &TranslationUnit> =
        units.iter().map(|u| ((u.system.as_str(), &u.segment), u)).collect();
    let names: HashMap<&str, &str> = documents.iter().map(|d| (d.id.as_str(), d.name.as_str())).collect();

    let mut header: Vec<&str> = MQM_COLUMNS.to_vec();
    if setting == Setting::SxsMqm {
        header.push(PARTNER_COLUMN);
    }
    let mut out = String::new();
    push_row(&mut out, &header);

    let mut sorted: Vec<&MqmAnnotation> = annotations.iter().filter(|a| a.setting == setting).collect();
    sorted.sort_by(|a, b| {
        (&a.segment, &a.system, &a.annotator, &a.pair_partner).cmp(&(
            &b.segment,
            &b.system,
            &b.annotator,
            &b.pair_partner,
        ))
    });

    for ann in sorted {
        let unit = unit_map
            .get(&(ann.system.as_str(), &ann.segment))
            .ok_or_else(|| Error::Validation {
                detail: format!("no unit for {} {}", ann.system, ann.segment),
            })?;
        let doc_name = names
            .get(ann.segment.doc_id.as_str())
            .copied()
            .unwrap_or(ann.segment.doc_id.as_str());
        let partner = ann.pair_partner.as_deref().unwrap_or("");
        let base = [
            check_field("system", &ann.system)?,
            check_field("doc", doc_name)?,
            check_field("doc_id", &ann.segment.doc_id)?,
            check_field("seg_id", &ann.segment.seg_id)?,
            check_field("rater", &ann.annotator)?,
        ];
        check_field("source", &unit.source)?;
        check_field("target", &unit.target)?;
        check_field(PARTNER_COLUMN, partner)?;

        let mut errors: Vec<&ErrorSpan> = ann.errors.iter().collect();
        errors.sort_by_key(|e| (e.start, e.end, e.side, e.unspecified_span, e.category, e.severity));

        let mut emit = |source: String, target: String, category: &str, severity: &str| {
            let mut fields: Vec<&str> = base.to_vec();
            fields.extend([source.as_str(), target.as_str(), category, severity]);
            if setting == Setting::SxsMqm {
                fields.push(partner);
            }
            push_row(&mut out, &fields);
        };

        if errors.is_empty() {
            emit(unit.source.clone(), unit.target.clone(), NO_ERROR, NO_ERROR);
        }
        for e in errors {
            let span = (!e.unspecified_span).then_some((e.start, e.end));
            let (source, target) = match e.side {
                Side::Source => (insert_span(&unit.source, span), unit.target.clone()),
                Side::Target => (unit.source.clone(), insert_span(&unit.target, span)),
            };
            emit(source, target, &e.category.path(), e.severity.label());
        }
    }
    Ok(out.into_bytes())
}

pub fn parse_rr_tsv(bytes: &[u8]) -> Result<Vec<RrJudgment>> {
    let text = decode(bytes)?;
    let (_, rows) = split_table(text, &RR_COLUMNS)?;
    rows.iter()
        .map(|row| {
            let n = row.number;
            let system_a = non_empty(row, 2, "system_a")?;
            let system_b = non_empty(row, 3, "system_b")?;
            if system_a == system_b {
                return Err(Error::SelfPair {
                    row: n,
                    system: system_a.to_string(),
                });
            }
            let value = RrValue::parse(row.fields[5]).ok_or_else(|| Error::BadValue {
                row: n,
                value: row.fields[5].to_string(),
            })?;
            Ok(RrJudgment {
                annotator: non_empty(row, 4, "rater")?.to_string(),
                segment: SegmentRef::new(non_empty(row, 0, "doc_id")?, non_empty(row, 1, "seg_id")?),
                system_a: system_a.to_string(),
                system_b: system_b.to_string(),
                value,
            })
        })
        .collect()
}

pub fn write_rr_tsv(judgments: &[RrJudgment]) -> Result<Vec<u8>> {
    let mut sorted: Vec<&RrJudgment> = judgments.iter().collect();
    sorted.sort_by(|a, b| {
        (&a.segment, &a.system_a, &a.system_b, &a.annotator, a.value).cmp(&(
            &b.segment,
            &b.system_a,
            &b.system_b,
            &b.annotator,
            b.value,
        ))
    });
    let mut out = String::new();
    push_row(&mut out, &RR_COLUMNS);
    for j in sorted {
        push_row(
            &mut out,
            &[
                check_field("doc_id", &j.segment.doc_id)?,
                check_field("seg_id", &j.segment.seg_id)?,
                check_field("system_a", &j.system_a)?,
                check_field("system_b", &j.system_b)?,
                check_field("rater", &j.annotator)?,
                j.value.as_str(),
            ],
        );
    }
    Ok(out.into_bytes())
}

/// Units plus the document order they imply.
pub fn parse_units_tsv(bytes: &[u8]) -> Result<(Vec<TranslationUnit>, Vec<Document>)> {
    let text = decode(bytes)?;
    let (_, rows) = split_table(text, &UNIT_COLUMNS)?;
    let mut documents: Vec<Document> = Vec::new();
    let mut doc_index: HashMap<String, usize> = HashMap::new();
    let mut units = Vec::with_capacity(rows.len());
    for row in &rows {
        let doc_id = non_empty(row, 2, "doc_id")?;
        let seg_id = non_empty(row, 3, "seg_id")?;
        let di = *doc_index.entry(doc_id.to_string()).or_insert_with(|| {
            documents.push(Document {
                id: doc_id.to_string(),
                name: row.fields[1].to_string(),
                segments: Vec::new(),
            });
            documents.len() - 1
        });
        if !documents[di].segments.iter().any(|s| s == seg_id) {
            documents[di].segments.push(seg_id.to_string());
        }
        units.push(TranslationUnit {
            system: non_empty(row, 0, "system")?.to_string(),
            segment: SegmentRef::new(doc_id, seg_id),
            source: nfc(row.fields[4]),
            target: nfc(row.fields[5]),
        });
    }
    Ok((units, documents))
}

/// Writes units grouped by document, segment order preserved.
pub fn write_units_tsv(units: &[TranslationUnit], documents: &[Document]) -> Result<Vec<u8>> {
    let mut by_segment: HashMap<&SegmentRef, Vec<&TranslationUnit>> = HashMap::new();
    for u in units {
        by_segment.entry(&u.segment).or_default().push(u);
    }
    let mut out = String::new();
    push_row(&mut out, &UNIT_COLUMNS);
    for doc in documents {
        for seg in &doc.segments {
            let key = SegmentRef::new(doc.id.clone(), seg.clone());
            let mut group = by_segment.remove(&key).unwrap_or_default();
            group.sort_by(|a, b| a.system.cmp(&b.system));
            for u in group {
                push_row(
                    &mut out,
                    &[
                        check_field("system", &u.system)?,
                        check_field("doc", &doc.name)?,
                        check_field("doc_id", &doc.id)?,
                        check_field("seg_id", seg)?,
                        check_field("source", &u.source)?,
                        check_field("target", &u.target)?,
                    ],
                );
            }
        }
    }
    if let Some(orphan) = by_segment.keys().min() {
        return Err(Error::Validation {
            detail: format!("unit for segment {orphan} outside every document"),
        });
    }
    Ok(out.into_bytes())
}

/// Per-segment external metric scores: `system, doc_id, seg_id, score`.
pub fn parse_metric_scores(bytes: &[u8]) -> Result<Vec<(String, SegmentRef, f64)>> {
    let text = decode(bytes)?;
    let (_, rows) = split_table(text, &["system", "doc_id", "seg_id", "score"])?;
    rows.iter()
        .map(|row| {
            let score: f64 = row.fields[3].trim().parse().map_err(|_| Error::MalformedRow {
                row: row.number,
                detail: format!("bad score {:?}", row.fields[3]),
            })?;
            Ok((
                non_empty(row, 0, "system")?.to_string(),
                SegmentRef::new(non_empty(row, 1, "doc_id")?, non_empty(row, 2, "seg_id")?),
                score,
            ))
        })
        .collect()
}

/// True when a target-side error contributes to translation quality.
pub(crate) fn is_target_error(e: &ErrorSpan) -> bool {
    e.side == Side::Target && e.category.category != Category::SourceIssue
}
