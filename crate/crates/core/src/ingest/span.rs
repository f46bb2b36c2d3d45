use crate::error::{Error, Result};

pub const OPEN: &str = "<v>";
pub const CLOSE: &str = "</v>";

/// Strips one `<v>…</v>` pair, returning the clean text and the span in
/// char offsets on it.
pub fn extract_span(marked: &str) -> Result<(String, Option<(usize, usize)>)> {
    let mut clean = String::with_capacity(marked.len());
    let mut span: Option<(usize, usize)> = None;
    let mut open_at: Option<usize> = None;
    let mut chars = 0usize;
    let mut rest = marked;
    while !rest.is_empty() {
        if let Some(r) = rest.strip_prefix(OPEN) {
            if open_at.is_some() {
                return Err(Error::MarkerUnbalanced { position: chars });
            }
            if span.is_some() {
                return Err(Error::MarkerMultiple);
            }
            open_at = Some(chars);
            rest = r;
        } else if let Some(r) = rest.strip_prefix(CLOSE) {
            let Some(start) = open_at.take() else {
                return Err(Error::MarkerUnbalanced { position: chars });
            };
            span = Some((start, chars));
            rest = r;
        } else {
            let c = rest.chars().next().expect("non-empty");
            clean.push(c);
            chars += 1;
            rest = &rest[c.len_utf8()..];
        }
    }
    if let Some(position) = open_at {
        return Err(Error::MarkerUnbalanced { position });
    }
    Ok((clean, span))
}

/// Inverse of [`extract_span`].
pub fn insert_span(clean: &str, span: Option<(usize, usize)>) -> String {
    let Some((start, end)) = span else {
        return clean.to_string();
    };
    let mut out = String::with_capacity(clean.len() + OPEN.len() + CLOSE.len());
    let mut n = 0;
    for c in clean.chars() {
        if n == start {
            out.push_str(OPEN);
        }
        if n == end {
            out.push_str(CLOSE);
        }
        out.push(c);
        n += 1;
    }
    if n == start {
        out.push_str(OPEN);
    }
    if n == end {
        out.push_str(CLOSE);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn marks_morning() {
        let (clean, span) = extract_span("good <v>morning</v> all").unwrap();
        assert_eq!(clean, "good morning all");
        assert_eq!(span, Some((5, 12)));
        let by_hand: String = clean.chars().skip(5).take(7).collect();
        assert_eq!(by_hand, "morning");
    }

    #[test]
    fn no_markers_is_identity() {
        assert_eq!(
            extract_span("no markers here").unwrap(),
            ("no markers here".to_string(), None)
        );
    }

    #[test]
    fn marker_errors() {
        assert_eq!(
            extract_span("<v>a</v><v>b</v>").unwrap_err().code(),
            "E_MARKER_MULTIPLE"
        );
        for bad in ["<v>a", "a</v>", "<v><v>a</v></v>", "</v>a<v>"] {
            assert_eq!(extract_span(bad).unwrap_err().code(), "E_MARKER_UNBALANCED", "{bad}");
        }
    }

    #[test]
    fn offsets_count_scalar_values() {
        let (clean, span) = extract_span("早上<v>好</v>!").unwrap();
        assert_eq!(clean, "早上好!");
        assert_eq!(span, Some((2, 3)));
    }

    proptest! {
        #[test]
        fn reinsertion_reproduces_input(
            clean in "[a-zé早 ]{0,20}",
            a in 0usize..25,
            b in 0usize..25,
        ) {
            let n = clean.chars().count();
            let (s, e) = (a.min(b).min(n), a.max(b).min(n));
            let marked = insert_span(&clean, Some((s, e)));
            let (back, span) = extract_span(&marked).unwrap();
            prop_assert_eq!(span, Some((s, e)));
            prop_assert_eq!(insert_span(&back, span), marked);
            prop_assert_eq!(back, clean);
        }
    }
}
