mod common;

use std::collections::BTreeMap;

use common::stats_oracle::{alpha_pairwise, pra_direct, random_label_units};
use mqmkit::agreement::{
    build_label_matrix, krippendorff_alpha, length_buckets, nominal_alpha, tie_rate, LabelBasis, LengthRule, PairUnit,
};
use mqmkit::model::{
    Category, ComparisonLabel, Document, ErrorCategory, ErrorSpan, MqmAnnotation, Project, RrJudgment, RrValue,
    SegmentRef, Setting, Severity, TranslationUnit,
};
use mqmkit::ranking::{pra, pra_counts};
use mqmkit::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LABELS: [ComparisonLabel; 3] = [ComparisonLabel::ABetter, ComparisonLabel::Tie, ComparisonLabel::BBetter];

fn two_segment_project() -> Project {
    let segs = [SegmentRef::new("d1", "1"), SegmentRef::new("d1", "2")];
    let mut units = Vec::new();
    for seg in &segs {
        for system in ["A", "B"] {
            units.push(TranslationUnit {
                system: system.into(),
                segment: seg.clone(),
                source: "ein Satz".into(),
                target: format!("a sentence from {system}"),
            });
        }
    }
    Project {
        language_pair: "de-en".into(),
        documents: vec![Document {
            id: "d1".into(),
            name: "d1".into(),
            segments: vec!["1".into(), "2".into()],
        }],
        systems: ["A", "B"].iter().map(|s| s.to_string()).collect(),
        units,
        designated_pairs: vec![("A".into(), "B".into())],
        annotators: ["r1", "r2", "r3"].iter().map(|s| s.to_string()).collect(),
        ..Default::default()
    }
}

fn mqm(annotator: &str, system: &str, seg: &SegmentRef, majors: usize) -> MqmAnnotation {
    MqmAnnotation {
        annotator: annotator.into(),
        setting: Setting::Mqm,
        system: system.into(),
        segment: seg.clone(),
        errors: vec![ErrorSpan::target(0, 1, ErrorCategory::top(Category::Accuracy), Severity::Major); majors],
        pair_partner: None,
    }
}

#[test]
fn full_data_gives_one_unit_per_segment_and_pair() {
    let mut p = two_segment_project();
    for (i, r) in ["r1", "r2", "r3"].iter().enumerate() {
        for seg in p.segments().collect::<Vec<_>>() {
            p.mqm.push(mqm(r, "A", &seg, i % 2));
            p.mqm.push(mqm(r, "B", &seg, 1));
        }
    }
    let m = build_label_matrix(&p, Setting::Mqm, LabelBasis::Raw).unwrap();
    assert_eq!(m.rows.len(), 2);
    assert!(m.rows.iter().all(|r| r.labels.len() == 3));
    // r2 marks one major error on both sides: a tie
    assert_eq!(m.rows[0].labels["r1"], ComparisonLabel::ABetter);
    assert_eq!(m.rows[0].labels["r2"], ComparisonLabel::Tie);
}

#[test]
fn missing_side_drops_that_label() {
    let mut p = two_segment_project();
    let seg = SegmentRef::new("d1", "1");
    p.mqm.push(mqm("r1", "A", &seg, 0));
    p.mqm.push(mqm("r1", "B", &seg, 1));
    p.mqm.push(mqm("r2", "A", &seg, 0));
    let m = build_label_matrix(&p, Setting::Mqm, LabelBasis::Raw).unwrap();
    let labels: Vec<usize> = m.rows.iter().map(|r| r.labels.len()).collect();
    assert_eq!(labels.iter().sum::<usize>(), 1);
    assert!(m.rows.iter().flat_map(|r| r.labels.keys()).all(|a| a == "r1"));
}

#[test]
fn relative_ranking_labels_follow_the_judgment() {
    let mut p = two_segment_project();
    let seg = SegmentRef::new("d1", "2");
    let judge = |annotator: &str, a: &str, b: &str, value| RrJudgment {
        annotator: annotator.into(),
        segment: seg.clone(),
        system_a: a.into(),
        system_b: b.into(),
        value,
    };
    p.rr.push(judge("r1", "A", "B", RrValue::AMuchBetter));
    // stored in the opposite orientation: B better means A is worse
    p.rr.push(judge("r2", "B", "A", RrValue::ABetter));
    p.rr.push(judge("r3", "A", "B", RrValue::Same));
    let m = build_label_matrix(&p, Setting::SxsRr, LabelBasis::Raw).unwrap();
    assert_eq!(m.rows.len(), 1);
    let labels = &m.rows[0].labels;
    assert_eq!(labels["r1"], ComparisonLabel::ABetter);
    assert_eq!(labels["r2"], ComparisonLabel::BBetter);
    assert_eq!(labels["r3"], ComparisonLabel::Tie);
    assert_eq!(tie_rate::<f64>(&m), Some(1.0 / 3.0));
}

#[test]
fn no_pairs_is_an_error() {
    let mut p = two_segment_project();
    p.designated_pairs.clear();
    assert!(matches!(
        build_label_matrix(&p, Setting::Mqm, LabelBasis::Raw),
        Err(Error::NoPairs)
    ));
}

#[test]
fn alpha_matches_pairwise_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut defined = 0;
    for _ in 0..2000 {
        let units = random_label_units(&mut rng);
        let expected = alpha_pairwise(&units);
        match (nominal_alpha::<u8, f64>(&units), expected) {
            (Ok(r), Some(e)) => {
                assert!((r.alpha - e).abs() <= 1e-12, "{units:?}: {} vs {e}", r.alpha);
                defined += 1;
            }
            (Err(Error::Degenerate), None) => {}
            (got, e) => panic!("{units:?}: {got:?} vs {e:?}"),
        }
    }
    assert!(defined >= 1000, "only {defined} defined instances");
}

#[test]
fn alpha_examples() {
    use ComparisonLabel::*;
    let perfect = vec![vec![ABetter; 3], vec![Tie; 3]];
    assert_eq!(nominal_alpha::<_, f64>(&perfect).unwrap().alpha, 1.0);
    assert!(matches!(
        nominal_alpha::<_, f64>(&[vec![Tie; 3]]),
        Err(Error::Degenerate)
    ));
    // one unit (A>B, A<B): D_o = 2, D_e = 2 * 1 * 1 / 1 = 2
    assert_eq!(nominal_alpha::<_, f64>(&[vec![ABetter, BBetter]]).unwrap().alpha, 0.0);
}

#[test]
fn tie_rate_counts_labels() {
    let mut p = two_segment_project();
    let segs: Vec<SegmentRef> = p.segments().collect();
    // 3 ties out of 6 labels in segment 1; none in segment 2
    for (i, r) in ["r1", "r2", "r3"].iter().enumerate() {
        p.mqm.push(mqm(r, "A", &segs[0], 1));
        p.mqm.push(mqm(r, "B", &segs[0], 1));
        p.mqm.push(mqm(r, "A", &segs[1], 0));
        p.mqm.push(mqm(r, "B", &segs[1], 1 + i));
    }
    let m = build_label_matrix(&p, Setting::Mqm, LabelBasis::Raw).unwrap();
    assert_eq!(tie_rate::<f64>(&m), Some(0.5));
    let r = krippendorff_alpha::<f64>(&m).unwrap();
    assert_eq!(r.alpha, 1.0);
}

fn bucket_project(lengths: &[usize]) -> Project {
    let mut p = Project {
        language_pair: "en-de".into(),
        ..Default::default()
    };
    let mut doc = Document {
        id: "d".into(),
        name: "d".into(),
        segments: Vec::new(),
    };
    for (i, &n) in lengths.iter().enumerate() {
        let id = (i + 1).to_string();
        doc.segments.push(id.clone());
        p.units.push(TranslationUnit {
            system: "A".into(),
            segment: SegmentRef::new("d", id),
            source: vec!["w"; n].join(" "),
            target: "t".into(),
        });
    }
    p.documents.push(doc);
    p
}

#[test]
fn length_buckets_examples() {
    let p = bucket_project(&[5, 1, 9]);
    let groups = length_buckets(&p, 3, &LengthRule::Source).unwrap();
    let ids: Vec<Vec<&str>> = groups
        .iter()
        .map(|g| g.iter().map(|s| s.seg_id.as_str()).collect())
        .collect();
    assert_eq!(ids, [["2"], ["1"], ["3"]]);
    let p = bucket_project(&(1..=10).collect::<Vec<_>>());
    let sizes: Vec<usize> = length_buckets(&p, 3, &LengthRule::Source)
        .unwrap()
        .iter()
        .map(Vec::len)
        .collect();
    assert_eq!(sizes, [4, 3, 3]);
    assert!(matches!(
        length_buckets(&Project::default(), 3, &LengthRule::Source),
        Err(Error::Empty { .. })
    ));
}

fn random_pra_maps(rng: &mut impl Rng) -> (BTreeMap<PairUnit, ComparisonLabel>, BTreeMap<PairUnit, ComparisonLabel>) {
    let n = rng.gen_range(1..40);
    let tie_bias = rng.gen_range(0.0..0.6);
    let draw = |rng: &mut ChaCha8Rng| {
        if rng.gen_bool(tie_bias) {
            ComparisonLabel::Tie
        } else {
            LABELS[[0, 2][rng.gen_range(0..2)]]
        }
    };
    let mut x = BTreeMap::new();
    let mut y = BTreeMap::new();
    let mut local = ChaCha8Rng::seed_from_u64(rng.gen());
    for i in 0..n {
        let unit = PairUnit {
            segment: SegmentRef::new("d", i.to_string()),
            system_a: "A".into(),
            system_b: format!("B{}", i % 3),
        };
        x.insert(unit.clone(), draw(&mut local));
        y.insert(unit, draw(&mut local));
    }
    (x, y)
}

#[test]
fn pra_matches_direct_count_and_is_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..2000 {
        let (x, y) = random_pra_maps(&mut rng);
        let (cxy, vxy) = pra::<f64>(&x, &y).unwrap();
        let (cyx, vyx) = pra::<f64>(&y, &x).unwrap();
        assert_eq!(vxy, pra_direct(&x, &y));
        assert_eq!(vxy, vyx);
        assert_eq!((cxy.tie_alpha, cxy.tie_beta), (cyx.tie_beta, cyx.tie_alpha));
        assert_eq!(cxy.total(), x.len());
    }
}

#[test]
fn pra_rejects_different_units() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (x, mut y) = random_pra_maps(&mut rng);
    let extra = PairUnit {
        segment: SegmentRef::new("other", "1"),
        system_a: "A".into(),
        system_b: "B".into(),
    };
    y.insert(extra, ComparisonLabel::Tie);
    assert!(matches!(pra_counts(&x, &y), Err(Error::UnitMismatch)));
    let empty = BTreeMap::new();
    assert!(matches!(pra::<f64>(&empty, &empty), Err(Error::Empty { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn alpha_invariant_under_relabeling_and_reordering(
        seed in any::<u64>(),
        perm in Just([0u8, 1, 2]).prop_shuffle(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let units = random_label_units(&mut rng);
        let base = nominal_alpha::<u8, f64>(&units).ok().map(|r| r.alpha);

        let renamed: Vec<Vec<u8>> = units.iter().map(|u| u.iter().map(|&l| perm[l as usize]).collect()).collect();
        let mut shuffled: Vec<Vec<u8>> = units.iter().rev().map(|u| u.iter().rev().copied().collect()).collect();
        shuffled.rotate_left(units.len() / 2);
        for other in [renamed, shuffled] {
            let alt = nominal_alpha::<u8, f64>(&other).ok().map(|r| r.alpha);
            match (base, alt) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-12),
                (a, b) => prop_assert_eq!(a, b),
            }
        }
    }

    #[test]
    fn adding_a_tie_never_lowers_the_tie_rate(seed in any::<u64>()) {
        let mut p = two_segment_project();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let segs: Vec<SegmentRef> = p.segments().collect();
        for r in ["r1", "r2"] {
            for seg in &segs {
                p.mqm.push(mqm(r, "A", seg, rng.gen_range(0..3)));
                p.mqm.push(mqm(r, "B", seg, rng.gen_range(0..3)));
            }
        }
        let before = tie_rate::<f64>(&build_label_matrix(&p, Setting::Mqm, LabelBasis::Raw).unwrap()).unwrap();
        let seg = &segs[rng.gen_range(0..2)];
        p.mqm.push(mqm("r3", "A", seg, 1));
        p.mqm.push(mqm("r3", "B", seg, 1));
        let after = tie_rate::<f64>(&build_label_matrix(&p, Setting::Mqm, LabelBasis::Raw).unwrap()).unwrap();
        prop_assert!(after >= before);
        prop_assert!((0.0..=1.0).contains(&after));
    }
}
