//! Fixture stores and a runner for the `mqmkit` binary.
#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use mqmkit::ingest::save_project;
use mqmkit::model::{
    Category, Document, ErrorCategory, ErrorSpan, MqmAnnotation, Project, RrJudgment, RrValue, SegmentRef, Setting,
    Severity, TranslationUnit,
};

pub const SYSTEMS: [&str; 6] = ["sys0", "sys1", "sys2", "sys3", "sys4", "sys5"];
pub const RATERS: [&str; 3] = ["r1", "r2", "r3"];
const SWAPS: [&str; 6] = ["mat", "rug", "sofa", "floor", "bed", "chair"];

/// Error counts per annotator matching a pool with mean 2642.25,
/// population std 1874.08 and one annotator at 6915.
pub const OUTLIER_POOL: [usize; 8] = [528, 760, 1907, 2107, 2305, 3286, 3330, 6915];

pub fn mqmkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mqmkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

pub fn target(system: usize, seg: usize) -> String {
    format!("the cat sat on the {} number {}", SWAPS[(system + seg) % 6], seg)
}

fn errors(system: usize, seg: usize, rater: usize, salt: usize) -> Vec<ErrorSpan> {
    let n = (system + seg + rater + salt) % 3;
    (0..n)
        .map(|i| {
            let (cat, sev) = if (seg + i).is_multiple_of(2) {
                (Category::Accuracy, Severity::Major)
            } else {
                (Category::Fluency, Severity::Minor)
            };
            // "the" or "cat", both shared by every system
            let (start, end) = if i == 0 { (0, 3) } else { (4, 7) };
            ErrorSpan::target(start, end, ErrorCategory::top(cat), sev)
        })
        .collect()
}

/// Six systems over three documents of four segments, two designated
/// pairs and three annotators in every setting.
pub fn analysis_project() -> Project {
    let mut documents = Vec::new();
    let mut units = Vec::new();
    let mut segs = Vec::new();
    for d in 0..3 {
        let id = format!("doc{d}");
        let segments: Vec<String> = (1..=4).map(|s| s.to_string()).collect();
        for s in &segments {
            let seg = SegmentRef::new(id.clone(), s.clone());
            let j = segs.len();
            for (i, system) in SYSTEMS.iter().enumerate() {
                units.push(TranslationUnit {
                    system: system.to_string(),
                    segment: seg.clone(),
                    source: format!("die Katze sitzt {j}"),
                    target: target(i, j),
                });
            }
            segs.push(seg);
        }
        documents.push(Document {
            id,
            name: format!("doc {d}"),
            segments,
        });
    }
    let pairs = vec![
        ("sys0".to_string(), "sys1".to_string()),
        ("sys2".to_string(), "sys3".to_string()),
    ];
    let mut mqm = Vec::new();
    let mut rr = Vec::new();
    for (j, seg) in segs.iter().enumerate() {
        for (r, rater) in RATERS.iter().enumerate() {
            for (i, system) in SYSTEMS.iter().enumerate() {
                mqm.push(MqmAnnotation {
                    annotator: rater.to_string(),
                    setting: Setting::Mqm,
                    system: system.to_string(),
                    segment: seg.clone(),
                    errors: errors(i, j, r, 0),
                    pair_partner: None,
                });
            }
            for (p, (a, b)) in pairs.iter().enumerate() {
                for (x, y, i) in [(a, b, 2 * p), (b, a, 2 * p + 1)] {
                    mqm.push(MqmAnnotation {
                        annotator: rater.to_string(),
                        setting: Setting::SxsMqm,
                        system: x.clone(),
                        segment: seg.clone(),
                        errors: errors(i, j, r, 1),
                        pair_partner: Some(y.clone()),
                    });
                }
                rr.push(RrJudgment {
                    annotator: rater.to_string(),
                    segment: seg.clone(),
                    system_a: a.clone(),
                    system_b: b.clone(),
                    value: RrValue::ALL[(j + r + p) % 5],
                });
            }
        }
    }
    let mut project = Project {
        language_pair: "de-en".into(),
        documents,
        systems: SYSTEMS.iter().map(|s| s.to_string()).collect(),
        units,
        mqm,
        rr,
        designated_pairs: pairs,
        annotators: RATERS.iter().map(|s| s.to_string()).collect(),
    };
    project.canonicalize();
    project
}

/// One segment and one system; annotator i marks `OUTLIER_POOL[i]` errors.
pub fn outlier_project() -> Project {
    let seg = SegmentRef::new("doc0", "1");
    let unit = TranslationUnit {
        system: "sys0".into(),
        segment: seg.clone(),
        source: "eine Quelle".into(),
        target: "a target".into(),
    };
    let annotators: Vec<String> = (1..=OUTLIER_POOL.len()).map(|i| format!("rater{i}")).collect();
    let mqm = annotators
        .iter()
        .zip(OUTLIER_POOL)
        .map(|(a, n)| MqmAnnotation {
            annotator: a.clone(),
            setting: Setting::Mqm,
            system: "sys0".into(),
            segment: seg.clone(),
            errors: vec![ErrorSpan::target(0, 1, ErrorCategory::top(Category::Fluency), Severity::Minor); n],
            pair_partner: None,
        })
        .collect();
    let mut project = Project {
        language_pair: "zh-en".into(),
        documents: vec![Document {
            id: "doc0".into(),
            name: "doc 0".into(),
            segments: vec!["1".into()],
        }],
        systems: ["sys0".to_string()].into_iter().collect(),
        units: vec![unit],
        mqm,
        rr: Vec::new(),
        designated_pairs: Vec::new(),
        annotators: annotators.into_iter().collect(),
    };
    project.canonicalize();
    project
}

pub fn write_store(project: &Project, root: &Path) {
    save_project(project, root).unwrap();
}

/// Per-segment metric scores with nearly equal system means.
pub fn metric_scores_tsv(project: &Project) -> String {
    let mut out = String::from("system\tdoc_id\tseg_id\tscore\n");
    for (k, u) in project.units.iter().enumerate() {
        let i = SYSTEMS.iter().position(|s| *s == u.system).unwrap();
        let noise = ((k * 37 + i * 11) % 17) as f64 / 17.0 - 0.5;
        out.push_str(&format!(
            "{}\t{}\t{}\t{:.6}\n",
            u.system,
            u.segment.doc_id,
            u.segment.seg_id,
            0.7 + 0.002 * i as f64 + 0.3 * noise
        ));
    }
    out
}
