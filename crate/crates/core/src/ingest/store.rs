//! On-disk project store.
//!
//! ```text
//! root/
//!   project.json     schema_version, language_pair, systems, designated_pairs, annotators
//!   units.tsv        every translation unit, in document order
//!   mqm.tsv          single-sided MQM annotations
//!   sxs_mqm.tsv      side-by-side MQM annotations (+ pair_partner)
//!   rr.tsv           relative-ranking judgments
//!   assignments.json campaign assignment (written by the campaign module)
//!   log/             append-only submission journal
//! ```

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::journal::{self, JOURNAL_FILE};
use super::tsv;
use crate::error::{Error, Result};
use crate::model::{Project, SegmentRef, Setting, TranslationUnit};

pub const SCHEMA_VERSION: u64 = 1;
pub const PROJECT_FILE: &str = "project.json";
pub const UNITS_FILE: &str = "units.tsv";
pub const MQM_FILE: &str = "mqm.tsv";
pub const SXS_MQM_FILE: &str = "sxs_mqm.tsv";
pub const RR_FILE: &str = "rr.tsv";
pub const ASSIGNMENTS_FILE: &str = "assignments.json";
pub const LOG_DIR: &str = "log";

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ProjectMeta {
    schema_version: u64,
    language_pair: String,
    systems: BTreeSet<String>,
    designated_pairs: Vec<(String, String)>,
    annotators: BTreeSet<String>,
}

/// Writes `bytes` to `path` through a temporary file and rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let fail = |e: std::io::Error| Error::StoreWrite {
        path: path.to_path_buf(),
        detail: e.to_string(),
    };
    std::fs::write(&tmp, bytes).map_err(fail)?;
    std::fs::rename(&tmp, path).map_err(fail)
}

fn read_optional(path: &Path) -> Result<Option<Vec<u8>>> {
    match std::fs::read(path) {
        Ok(b) => Ok(Some(b)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(Error::io(path, e)),
    }
}

pub fn save_project(project: &Project, root: &Path) -> Result<()> {
    std::fs::create_dir_all(root.join(LOG_DIR)).map_err(|e| Error::StoreWrite {
        path: root.to_path_buf(),
        detail: e.to_string(),
    })?;
    let meta = ProjectMeta {
        schema_version: SCHEMA_VERSION,
        language_pair: project.language_pair.clone(),
        systems: project.systems.clone(),
        designated_pairs: project.designated_pairs.clone(),
        annotators: project.annotators.clone(),
    };
    let mut json = serde_json::to_vec_pretty(&meta).expect("metadata serializes");
    json.push(b'\n');
    write_atomic(&root.join(PROJECT_FILE), &json)?;
    write_atomic(
        &root.join(UNITS_FILE),
        &tsv::write_units_tsv(&project.units, &project.documents)?,
    )?;
    for (setting, file) in [(Setting::Mqm, MQM_FILE), (Setting::SxsMqm, SXS_MQM_FILE)] {
        let bytes = tsv::write_mqm_tsv(&project.mqm, &project.units, &project.documents, setting)?;
        write_atomic(&root.join(file), &bytes)?;
    }
    write_atomic(&root.join(RR_FILE), &tsv::write_rr_tsv(&project.rr)?)
}

/// Loads the store and verifies journal integrity. Journal contents are
/// not merged; they reach analyses through campaign export.
pub fn load_project(root: &Path) -> Result<Project> {
    let meta_bytes = read_optional(&root.join(PROJECT_FILE))?.ok_or_else(|| Error::StoreCorrupt {
        detail: format!("missing {PROJECT_FILE}"),
    })?;
    let raw: serde_json::Value = serde_json::from_slice(&meta_bytes).map_err(|e| Error::StoreCorrupt {
        detail: format!("{PROJECT_FILE}: {e}"),
    })?;
    match raw.get("schema_version").and_then(|v| v.as_u64()) {
        Some(SCHEMA_VERSION) => {}
        Some(found) => return Err(Error::Version { found }),
        None => {
            return Err(Error::StoreCorrupt {
                detail: format!("{PROJECT_FILE}: missing schema_version"),
            })
        }
    }
    let meta: ProjectMeta = serde_json::from_value(raw).map_err(|e| Error::StoreCorrupt {
        detail: format!("{PROJECT_FILE}: {e}"),
    })?;

    let units_bytes = read_optional(&root.join(UNITS_FILE))?.ok_or_else(|| Error::StoreCorrupt {
        detail: format!("missing {UNITS_FILE}"),
    })?;
    let (units, documents) = tsv::parse_units_tsv(&units_bytes)?;
    let unit_map: HashMap<(&str, &SegmentRef), &TranslationUnit> =
        units.iter().map(|u| ((u.system.as_str(), &u.segment), u)).collect();

    let mut mqm = Vec::new();
    for (setting, file) in [(Setting::Mqm, MQM_FILE), (Setting::SxsMqm, SXS_MQM_FILE)] {
        let Some(bytes) = read_optional(&root.join(file))? else {
            continue;
        };
        let table = tsv::parse_mqm_tsv(&bytes, setting)?;
        for u in &table.units {
            match unit_map.get(&(u.system.as_str(), &u.segment)) {
                Some(known) if known.source == u.source && known.target == u.target => {}
                _ => {
                    return Err(Error::StoreCorrupt {
                        detail: format!("{file}: unit {} {} disagrees with {UNITS_FILE}", u.system, u.segment),
                    })
                }
            }
        }
        mqm.extend(table.annotations);
    }
    let rr = match read_optional(&root.join(RR_FILE))? {
        Some(bytes) => tsv::parse_rr_tsv(&bytes)?,
        None => Vec::new(),
    };

    journal::replay::<serde_json::Value>(&root.join(LOG_DIR).join(JOURNAL_FILE))?;

    let mut project = Project {
        language_pair: meta.language_pair,
        documents,
        systems: meta.systems,
        units,
        mqm,
        rr,
        designated_pairs: meta.designated_pairs,
        annotators: meta.annotators,
    };
    project.canonicalize();
    Ok(project)
}
