//! Random valid projects.

use mqmkit::model::{
    Category, Document, ErrorCategory, ErrorSpan, MqmAnnotation, Project, RrJudgment, RrValue, SegmentRef, Setting,
    Severity, Side, TranslationUnit,
};
use rand::seq::SliceRandom;
use rand::Rng;

const PIECES: [&str; 14] = [
    "the", "cat", "café", "naïve", "東京", "😀", "x", "a.b", "\"q\"", "'s", "über", "ẞ", "-", "10%",
];

pub fn random_text(rng: &mut impl Rng) -> String {
    let n = rng.gen_range(1..8);
    (0..n)
        .map(|_| *PIECES.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

fn random_category(rng: &mut impl Rng, source_side: bool) -> ErrorCategory {
    if source_side {
        return ErrorCategory::top(Category::SourceIssue);
    }
    let cats: Vec<Category> = Category::ALL
        .iter()
        .copied()
        .filter(|c| *c != Category::SourceIssue)
        .collect();
    let cat = *cats.choose(rng).unwrap();
    let subs = cat.subcategories();
    if !subs.is_empty() && rng.gen_bool(0.6) {
        ErrorCategory::sub(*subs.choose(rng).unwrap())
    } else {
        ErrorCategory::top(cat)
    }
}

pub fn random_error(rng: &mut impl Rng, unit: &TranslationUnit) -> ErrorSpan {
    let source_side = rng.gen_bool(0.1);
    let category = random_category(rng, source_side);
    let severity = if category.category == Category::NonTranslation || rng.gen_bool(0.4) {
        Severity::Major
    } else {
        Severity::Minor
    };
    if rng.gen_bool(0.1) {
        return ErrorSpan::unspecified(category, severity);
    }
    let text = if source_side { &unit.source } else { &unit.target };
    let len = text.chars().count();
    let start = rng.gen_range(0..len);
    let end = rng.gen_range(start + 1..=len);
    ErrorSpan {
        side: if source_side { Side::Source } else { Side::Target },
        start,
        end,
        category,
        severity,
        unspecified_span: false,
    }
}

fn random_errors(rng: &mut impl Rng, unit: &TranslationUnit) -> Vec<ErrorSpan> {
    let n = [0, 0, 1, 1, 2, 3][rng.gen_range(0..6)];
    (0..n).map(|_| random_error(rng, unit)).collect()
}

/// A project that passes validation, with all three settings populated.
pub fn random_project(rng: &mut impl Rng) -> Project {
    let n_systems = rng.gen_range(2..5);
    let systems: Vec<String> = (0..n_systems).map(|i| format!("sys-{i}")).collect();
    let annotators: Vec<String> = (0..rng.gen_range(1..4)).map(|i| format!("rater{i}")).collect();
    let mut documents = Vec::new();
    let mut units = Vec::new();
    for d in 0..rng.gen_range(1..4) {
        let id = format!("doc{d}");
        let segments: Vec<String> = (1..=rng.gen_range(1..4)).map(|s| s.to_string()).collect();
        for s in &segments {
            let seg = SegmentRef::new(id.clone(), s.clone());
            let source = random_text(rng);
            for system in &systems {
                units.push(TranslationUnit {
                    system: system.clone(),
                    segment: seg.clone(),
                    source: source.clone(),
                    target: random_text(rng),
                });
            }
        }
        documents.push(Document {
            id: id.clone(),
            name: format!("news {d}"),
            segments,
        });
    }
    let mut pairs = Vec::new();
    for i in 0..n_systems {
        for j in i + 1..n_systems {
            if pairs.is_empty() || rng.gen_bool(0.4) {
                pairs.push((systems[i].clone(), systems[j].clone()));
            }
        }
    }

    let mut mqm = Vec::new();
    let mut rr = Vec::new();
    for u in &units {
        for r in &annotators {
            if rng.gen_bool(0.7) {
                mqm.push(MqmAnnotation {
                    annotator: r.clone(),
                    setting: Setting::Mqm,
                    system: u.system.clone(),
                    segment: u.segment.clone(),
                    errors: random_errors(rng, u),
                    pair_partner: None,
                });
            }
            for (a, b) in &pairs {
                let partner = if *a == u.system {
                    b
                } else if *b == u.system {
                    a
                } else {
                    continue;
                };
                if rng.gen_bool(0.7) {
                    mqm.push(MqmAnnotation {
                        annotator: r.clone(),
                        setting: Setting::SxsMqm,
                        system: u.system.clone(),
                        segment: u.segment.clone(),
                        errors: random_errors(rng, u),
                        pair_partner: Some(partner.clone()),
                    });
                }
                if *a == u.system && rng.gen_bool(0.7) {
                    let (x, y) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
                    rr.push(RrJudgment {
                        annotator: r.clone(),
                        segment: u.segment.clone(),
                        system_a: x.clone(),
                        system_b: y.clone(),
                        value: *RrValue::ALL.choose(rng).unwrap(),
                    });
                }
            }
        }
    }
    let mut p = Project {
        language_pair: "en-de".into(),
        documents,
        systems: systems.into_iter().collect(),
        units,
        mqm,
        rr,
        designated_pairs: pairs,
        annotators: annotators.into_iter().collect(),
    };
    p.canonicalize();
    p
}

/// A project with documents of random sizes, five or six systems and a
/// few designated pairs, and no annotations yet.
pub fn random_campaign_project(rng: &mut impl Rng, n_docs: usize) -> Project {
    let mut p = random_project(rng);
    p.mqm.clear();
    p.rr.clear();
    p.annotators.clear();
    p.documents.clear();
    p.units.clear();
    let n_systems = rng.gen_range(5..7);
    p.systems = (0..n_systems).map(|i| format!("sys-{i}")).collect();
    let systems: Vec<String> = p.systems.iter().cloned().collect();
    for d in 0..n_docs {
        let id = format!("doc{d}");
        let segments: Vec<String> = (1..=rng.gen_range(1..9)).map(|s| s.to_string()).collect();
        for s in &segments {
            let seg = SegmentRef::new(id.clone(), s.clone());
            let source = random_text(rng);
            for system in &systems {
                p.units.push(TranslationUnit {
                    system: system.clone(),
                    segment: seg.clone(),
                    source: source.clone(),
                    target: random_text(rng),
                });
            }
        }
        p.documents.push(Document {
            id,
            name: format!("doc {d}"),
            segments,
        });
    }
    p.designated_pairs = vec![
        (systems[0].clone(), systems[1].clone()),
        (systems[2].clone(), systems[3].clone()),
        (systems[1].clone(), systems[4].clone()),
    ];
    p.canonicalize();
    p
}

const VOCAB: [&str; 16] = [
    "the", "market", "rose", "after", "talks", "between", "two", "sides", "on", "trade", "and", "prices", "fell",
    "sharply", "in", "march",
];

/// Up to four errors, each present with probability `1 - quality`.
fn graded_errors(rng: &mut impl Rng, unit: &TranslationUnit, quality: f64) -> Vec<ErrorSpan> {
    let n = (0..4).filter(|_| rng.gen_bool(1.0 - quality)).count();
    (0..n).map(|_| random_error(rng, unit)).collect()
}

/// A complete three-setting project at roughly the size of a published
/// campaign: `n_docs` documents of 5–15 segments, ten systems of graded
/// quality, five designated pairs, and each document rated by three of
/// six annotators.
pub fn scaled_project(rng: &mut impl Rng, n_docs: usize) -> Project {
    let systems: Vec<String> = (0..10).map(|i| format!("sys{i:02}")).collect();
    let quality: Vec<f64> = (0..10).map(|i| 0.2 + 0.08 * i as f64).collect();
    let pairs: Vec<(String, String)> = [(0, 1), (2, 3), (4, 5), (6, 7), (8, 9)]
        .iter()
        .map(|&(a, b)| (systems[a].clone(), systems[b].clone()))
        .collect();
    let raters: Vec<String> = (0..6).map(|i| format!("rater{i}")).collect();
    let mut p = Project {
        language_pair: "zh-en".into(),
        systems: systems.iter().cloned().collect(),
        designated_pairs: pairs.clone(),
        annotators: raters.iter().cloned().collect(),
        ..Default::default()
    };
    for d in 0..n_docs {
        let id = format!("doc{d:03}");
        let segments: Vec<String> = (1..=rng.gen_range(5..=15)).map(|s| s.to_string()).collect();
        let mut doc_raters = raters.clone();
        doc_raters.shuffle(rng);
        doc_raters.truncate(3);
        for s in &segments {
            let seg = SegmentRef::new(id.clone(), s.clone());
            let base: Vec<&str> = (0..rng.gen_range(6..30)).map(|_| *VOCAB.choose(rng).unwrap()).collect();
            let mut units = Vec::new();
            for (i, system) in systems.iter().enumerate() {
                let target: Vec<&str> = base
                    .iter()
                    .map(|w| {
                        if rng.gen_bool(0.3 - 0.02 * i as f64) {
                            *VOCAB.choose(rng).unwrap()
                        } else {
                            w
                        }
                    })
                    .collect();
                units.push(TranslationUnit {
                    system: system.clone(),
                    segment: seg.clone(),
                    source: base.join(" "),
                    target: target.join(" "),
                });
            }
            for r in &doc_raters {
                for i in 0..systems.len() {
                    let errors = graded_errors(rng, &units[i], quality[i]);
                    p.mqm.push(MqmAnnotation {
                        annotator: r.clone(),
                        setting: Setting::Mqm,
                        system: systems[i].clone(),
                        segment: seg.clone(),
                        errors,
                        pair_partner: None,
                    });
                }
                for k in 0..pairs.len() {
                    let (a, b) = (2 * k, 2 * k + 1);
                    for (x, y) in [(a, b), (b, a)] {
                        let errors = graded_errors(rng, &units[x], quality[x]);
                        p.mqm.push(MqmAnnotation {
                            annotator: r.clone(),
                            setting: Setting::SxsMqm,
                            system: systems[x].clone(),
                            segment: seg.clone(),
                            errors,
                            pair_partner: Some(systems[y].clone()),
                        });
                    }
                    let gap = quality[b] - quality[a] + rng.gen_range(-0.3..0.3);
                    let value = match gap {
                        g if g > 0.25 => RrValue::BMuchBetter,
                        g if g > 0.08 => RrValue::BBetter,
                        g if g > -0.08 => RrValue::Same,
                        g if g > -0.25 => RrValue::ABetter,
                        _ => RrValue::AMuchBetter,
                    };
                    p.rr.push(RrJudgment {
                        annotator: r.clone(),
                        segment: seg.clone(),
                        system_a: systems[a].clone(),
                        system_b: systems[b].clone(),
                        value,
                    });
                }
            }
            p.units.extend(units);
        }
        p.documents.push(Document {
            id,
            name: format!("doc {d}"),
            segments,
        });
    }
    p.canonicalize();
    p
}
