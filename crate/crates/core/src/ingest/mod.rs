//! Reading and writing annotation data: WMT-style MQM TSVs, the
//! side-by-side and relative-ranking extensions, and the project store.

pub mod journal;
mod span;
mod store;
mod tsv;

pub use span::{extract_span, insert_span};
pub use store::{
    load_project, save_project, write_atomic, ASSIGNMENTS_FILE, LOG_DIR, MQM_FILE, PROJECT_FILE, RR_FILE,
    SCHEMA_VERSION, SXS_MQM_FILE, UNITS_FILE,
};
pub(crate) use tsv::is_target_error;
pub use tsv::{
    parse_metric_scores, parse_mqm_tsv, parse_rr_tsv, parse_units_tsv, write_mqm_tsv, write_rr_tsv, write_units_tsv,
    MqmTable, MQM_COLUMNS, PARTNER_COLUMN, RR_COLUMNS, UNIT_COLUMNS,
};

use std::collections::BTreeSet;

use crate::error::Result;
use crate::model::{Document, Project, Setting};

/// Builds a project from bare WMT-style files: an MQM TSV, optionally a
/// side-by-side MQM TSV and an RR TSV. Systems and annotators are taken
/// from the data; designated pairs from the side-by-side partners.
pub fn project_from_tsv(
    language_pair: &str,
    mqm: Option<&[u8]>,
    sxs_mqm: Option<&[u8]>,
    rr: Option<&[u8]>,
) -> Result<Project> {
    let mut project = Project {
        language_pair: language_pair.to_string(),
        ..Default::default()
    };
    let mut pairs: BTreeSet<(String, String)> = BTreeSet::new();
    for (setting, bytes) in [(Setting::Mqm, mqm), (Setting::SxsMqm, sxs_mqm)] {
        let Some(bytes) = bytes else { continue };
        let table = parse_mqm_tsv(bytes, setting)?;
        merge_documents(&mut project.documents, table.documents);
        for u in table.units {
            if project.unit(&u.system, &u.segment).is_none() {
                project.units.push(u);
            }
        }
        for a in &table.annotations {
            if let Some(p) = &a.pair_partner {
                let pair = if a.system < *p {
                    (a.system.clone(), p.clone())
                } else {
                    (p.clone(), a.system.clone())
                };
                pairs.insert(pair);
            }
        }
        project.mqm.extend(table.annotations);
    }
    if let Some(bytes) = rr {
        project.rr = parse_rr_tsv(bytes)?;
        for j in &project.rr {
            let pair = if j.system_a < j.system_b {
                (j.system_a.clone(), j.system_b.clone())
            } else {
                (j.system_b.clone(), j.system_a.clone())
            };
            pairs.insert(pair);
        }
    }
    project.designated_pairs = pairs.into_iter().collect();
    project.systems = project.units.iter().map(|u| u.system.clone()).collect();
    project.annotators = project
        .mqm
        .iter()
        .map(|a| a.annotator.clone())
        .chain(project.rr.iter().map(|j| j.annotator.clone()))
        .collect();
    project.canonicalize();
    Ok(project)
}

fn merge_documents(into: &mut Vec<Document>, from: Vec<Document>) {
    for doc in from {
        match into.iter_mut().find(|d| d.id == doc.id) {
            Some(existing) => {
                for s in doc.segments {
                    if !existing.segments.contains(&s) {
                        existing.segments.push(s);
                    }
                }
            }
            None => into.push(doc),
        }
    }
}
