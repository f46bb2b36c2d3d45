//! Brute-force consistency counts: enumerate every one-to-one pairing of
//! potential common errors and keep the largest.

use mqmkit::consistency::{align_tokens, AlignKind, ItcCriterion};
use mqmkit::model::{Category, ErrorCategory, ErrorSpan, Severity, Side};
use rand::Rng;

/// Token index of every char, `None` for whitespace.
fn char_tokens(text: &str) -> (Vec<Option<usize>>, Vec<String>) {
    let mut owner = Vec::new();
    let mut words: Vec<String> = Vec::new();
    let mut in_word = false;
    for c in text.chars() {
        if c.is_whitespace() {
            owner.push(None);
            in_word = false;
        } else {
            if !in_word {
                words.push(String::new());
                in_word = true;
            }
            words.last_mut().unwrap().push(c);
            owner.push(Some(words.len() - 1));
        }
    }
    (owner, words)
}

/// Positions in A's token coordinates, or `None` if not fully shared.
fn potential_key(e: &ErrorSpan, owner: &[Option<usize>], shared: &[Option<usize>]) -> Option<Vec<usize>> {
    if e.unspecified_span || e.side != Side::Target || e.category.category == Category::SourceIssue {
        return None;
    }
    let mut toks: Vec<usize> = (e.start..e.end.min(owner.len())).filter_map(|c| owner[c]).collect();
    toks.dedup();
    if toks.is_empty() {
        return None;
    }
    let mut key = Vec::new();
    for t in toks {
        key.push(shared[t]?);
    }
    key.sort();
    Some(key)
}

fn agree(x: &ErrorSpan, y: &ErrorSpan, criterion: ItcCriterion) -> bool {
    let cat = x.category.category == y.category.category;
    let sev = x.severity == y.severity;
    match criterion {
        ItcCriterion::Span => true,
        ItcCriterion::SpanCat => cat,
        ItcCriterion::SpanSev => sev,
        ItcCriterion::SpanCatSev => cat && sev,
    }
}

fn best_matching(
    left: &[(Vec<usize>, &ErrorSpan)],
    right: &[(Vec<usize>, &ErrorSpan)],
    used: &mut Vec<bool>,
    i: usize,
    criterion: ItcCriterion,
) -> usize {
    if i == left.len() {
        return 0;
    }
    let mut best = best_matching(left, right, used, i + 1, criterion);
    for j in 0..right.len() {
        if !used[j] && left[i].0 == right[j].0 && agree(left[i].1, right[j].1, criterion) {
            used[j] = true;
            best = best.max(1 + best_matching(left, right, used, i + 1, criterion));
            used[j] = false;
        }
    }
    best
}

/// (potential, matched per criterion in `ItcCriterion::ALL` order).
pub fn oracle_counts(a: &str, ea: &[ErrorSpan], b: &str, eb: &[ErrorSpan]) -> (usize, [usize; 4]) {
    if b < a {
        return oracle_counts(b, eb, a, ea);
    }
    let (owner_a, words_a) = char_tokens(a);
    let (owner_b, words_b) = char_tokens(b);
    let mut shared_a = vec![None; words_a.len()];
    let mut shared_b = vec![None; words_b.len()];
    for op in align_tokens(&words_a, &words_b) {
        if op.kind == AlignKind::Equal {
            for (k, i) in op.a.clone().enumerate() {
                shared_a[i] = Some(i);
                shared_b[op.b.start + k] = Some(i);
            }
        }
    }
    let pa: Vec<_> = ea
        .iter()
        .filter_map(|e| potential_key(e, &owner_a, &shared_a).map(|k| (k, e)))
        .collect();
    let pb: Vec<_> = eb
        .iter()
        .filter_map(|e| potential_key(e, &owner_b, &shared_b).map(|k| (k, e)))
        .collect();
    let mut matched = [0; 4];
    for (slot, criterion) in matched.iter_mut().zip(ItcCriterion::ALL) {
        *slot = best_matching(&pa, &pb, &mut vec![false; pb.len()], 0, criterion);
    }
    // Each span-level pair is one candidate; leftovers are candidates alone.
    let potential = pa.len() + pb.len() - matched[0];
    (potential, matched)
}

const WORDS: [&str; 6] = ["the", "cat", "sat", "on", "mat", "a"];
const CATS: [Category; 3] = [Category::Accuracy, Category::Fluency, Category::Style];

fn random_sentence(rng: &mut impl Rng) -> Vec<&'static str> {
    let n = rng.gen_range(1..9);
    (0..n).map(|_| WORDS[rng.gen_range(0..WORDS.len())]).collect()
}

fn random_errors(rng: &mut impl Rng, text: &str, max: usize) -> Vec<ErrorSpan> {
    let len = text.chars().count();
    let n = rng.gen_range(0..=max);
    let mut out = Vec::new();
    for _ in 0..n {
        let start = rng.gen_range(0..len);
        let end = rng.gen_range(start + 1..=len.min(start + 8));
        let cat = ErrorCategory::top(CATS[rng.gen_range(0..CATS.len())]);
        let sev = if rng.gen_bool(0.5) {
            Severity::Major
        } else {
            Severity::Minor
        };
        out.push(ErrorSpan::target(start, end, cat, sev));
    }
    out
}

/// Two related translations with random errors on each.
pub fn random_instance(rng: &mut impl Rng) -> (String, Vec<ErrorSpan>, String, Vec<ErrorSpan>) {
    let a = random_sentence(rng);
    let mut b = a.clone();
    for _ in 0..rng.gen_range(0..3) {
        let i = rng.gen_range(0..=b.len());
        match rng.gen_range(0..3) {
            0 if i < b.len() => {
                b.remove(i);
            }
            1 if i < b.len() => b[i] = WORDS[rng.gen_range(0..WORDS.len())],
            _ => b.insert(i, WORDS[rng.gen_range(0..WORDS.len())]),
        }
    }
    if b.is_empty() {
        b.push("cat");
    }
    let a = a.join(" ");
    let b = b.join(" ");
    let ea = random_errors(rng, &a, 4);
    let eb = random_errors(rng, &b, 4);
    (a, ea, b, eb)
}
