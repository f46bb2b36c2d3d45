//! Direct-count and exhaustive-enumeration references for statistics.

use std::collections::BTreeMap;

use mqmkit::model::ComparisonLabel;

/// Exact sign-flip p-value: share of all 2^n patterns whose |mean diff|
/// reaches the observed one.
pub fn exhaustive_p(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let observed = (a.iter().sum::<f64>() - b.iter().sum::<f64>()).abs() / n as f64;
    let mut hits = 0u64;
    for mask in 0u64..(1 << n) {
        let mut total = 0.0;
        for i in 0..n {
            let (x, y) = if mask >> i & 1 == 1 { (b[i], a[i]) } else { (a[i], b[i]) };
            total += x - y;
        }
        if (total / n as f64).abs() >= observed - 1e-9 {
            hits += 1;
        }
    }
    hits as f64 / (1u64 << n) as f64
}

/// PRA by walking the units and classifying each one.
pub fn pra_direct<K: Ord>(x: &BTreeMap<K, ComparisonLabel>, y: &BTreeMap<K, ComparisonLabel>) -> f64 {
    let (mut agree, mut total) = (0usize, 0usize);
    for (k, lx) in x {
        let ly = &y[k];
        total += 1;
        let both_tie = *lx == ComparisonLabel::Tie && *ly == ComparisonLabel::Tie;
        let same_order = *lx != ComparisonLabel::Tie && lx == ly;
        if both_tie || same_order {
            agree += 1;
        }
    }
    agree as f64 / total as f64
}

/// Nominal alpha from explicit label pairs: observed disagreement walks
/// every ordered coder pair inside a unit, expected disagreement every
/// ordered pair of pooled labels. `None` when undefined.
pub fn alpha_pairwise(units: &[Vec<u8>]) -> Option<f64> {
    let pairable: Vec<&Vec<u8>> = units.iter().filter(|u| u.len() >= 2).collect();
    let pooled: Vec<u8> = pairable.iter().flat_map(|u| u.iter().copied()).collect();
    let n = pooled.len() as f64;
    let mut observed = 0.0;
    for u in &pairable {
        let mut d = 0usize;
        for i in 0..u.len() {
            for j in 0..u.len() {
                if i != j && u[i] != u[j] {
                    d += 1;
                }
            }
        }
        observed += d as f64 / (u.len() - 1) as f64;
    }
    let mut expected = 0usize;
    for i in 0..pooled.len() {
        for j in 0..pooled.len() {
            if i != j && pooled[i] != pooled[j] {
                expected += 1;
            }
        }
    }
    if pooled.len() < 2 || expected == 0 {
        return None;
    }
    Some(1.0 - (n - 1.0) * observed / expected as f64)
}

/// Up to 20 units, three coders, each label present with probability
/// 0.8, categories drawn with uneven weights.
pub fn random_label_units(rng: &mut impl rand::Rng) -> Vec<Vec<u8>> {
    let n_units = rng.gen_range(1..=20);
    let skew = rng.gen_range(0.0..1.0);
    (0..n_units)
        .map(|_| {
            let mut unit = Vec::new();
            for _ in 0..3 {
                if !rng.gen_bool(0.8) {
                    continue;
                }
                let x: f64 = rng.gen();
                unit.push(if x < skew {
                    0
                } else if x < (1.0 + skew) / 2.0 {
                    1
                } else {
                    2
                });
            }
            unit
        })
        .collect()
}
