//! Ratcliff–Obershelp token alignment (longest matching block, recursively
//! on both flanks), with no junk heuristics.

use std::collections::HashMap;
use std::hash::Hash;
use std::ops::Range;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AlignKind {
    Equal,
    Replace,
    Insert,
    Delete,
}

/// One alignment operation over token index ranges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlignOp {
    pub kind: AlignKind,
    pub a: Range<usize>,
    pub b: Range<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Block {
    a: usize,
    b: usize,
    len: usize,
}

/// Longest common block in `a[alo..ahi]` × `b[blo..bhi]`; ties go to the
/// earliest start in `a`, then in `b`.
fn longest_match<T: Eq + Hash>(
    a: &[T],
    positions: &HashMap<&T, Vec<usize>>,
    alo: usize,
    ahi: usize,
    blo: usize,
    bhi: usize,
) -> Block {
    let mut best = Block { a: alo, b: blo, len: 0 };
    let mut run: HashMap<usize, usize> = HashMap::new();
    for (i, tok) in a.iter().enumerate().take(ahi).skip(alo) {
        let mut next: HashMap<usize, usize> = HashMap::new();
        if let Some(js) = positions.get(tok) {
            for &j in js {
                if j < blo {
                    continue;
                }
                if j >= bhi {
                    break;
                }
                let k = j.checked_sub(1).and_then(|p| run.get(&p)).copied().unwrap_or(0) + 1;
                next.insert(j, k);
                if k > best.len {
                    best = Block {
                        a: i + 1 - k,
                        b: j + 1 - k,
                        len: k,
                    };
                }
            }
        }
        run = next;
    }
    best
}

fn matching_blocks<T: Eq + Hash>(a: &[T], b: &[T]) -> Vec<Block> {
    let mut positions: HashMap<&T, Vec<usize>> = HashMap::new();
    for (j, tok) in b.iter().enumerate() {
        positions.entry(tok).or_default().push(j);
    }
    let mut found = Vec::new();
    let mut stack = vec![(0, a.len(), 0, b.len())];
    while let Some((alo, ahi, blo, bhi)) = stack.pop() {
        let m = longest_match(a, &positions, alo, ahi, blo, bhi);
        if m.len == 0 {
            continue;
        }
        found.push(m);
        if alo < m.a && blo < m.b {
            stack.push((alo, m.a, blo, m.b));
        }
        if m.a + m.len < ahi && m.b + m.len < bhi {
            stack.push((m.a + m.len, ahi, m.b + m.len, bhi));
        }
    }
    found.sort_by_key(|m| (m.a, m.b));

    let mut merged: Vec<Block> = Vec::with_capacity(found.len());
    for m in found {
        match merged.last_mut() {
            Some(last) if last.a + last.len == m.a && last.b + last.len == m.b => last.len += m.len,
            _ => merged.push(m),
        }
    }
    merged
}

/// Covering operation list; every `Equal` op spans identical tokens.
pub fn align_tokens<T: Eq + Hash>(a: &[T], b: &[T]) -> Vec<AlignOp> {
    let mut ops = Vec::new();
    let (mut i, mut j) = (0, 0);
    let sentinel = Block {
        a: a.len(),
        b: b.len(),
        len: 0,
    };
    for m in matching_blocks(a, b).into_iter().chain([sentinel]) {
        let kind = match (i < m.a, j < m.b) {
            (true, true) => Some(AlignKind::Replace),
            (true, false) => Some(AlignKind::Delete),
            (false, true) => Some(AlignKind::Insert),
            (false, false) => None,
        };
        if let Some(kind) = kind {
            ops.push(AlignOp {
                kind,
                a: i..m.a,
                b: j..m.b,
            });
        }
        if m.len > 0 {
            ops.push(AlignOp {
                kind: AlignKind::Equal,
                a: m.a..m.a + m.len,
                b: m.b..m.b + m.len,
            });
        }
        i = m.a + m.len;
        j = m.b + m.len;
    }
    ops
}
