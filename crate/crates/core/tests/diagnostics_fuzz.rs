mod common;

use forge_core::diagnostic::LineIndex;
use forge_core::lf::{parse_model, validate};
use forge_core::Diagnostic;
use proptest::prelude::*;

fn check(src: &str) -> Result<(), TestCaseError> {
    let index = LineIndex::new(src);
    let diags: Vec<Diagnostic> = match parse_model(src) {
        Ok(m) => validate(&m),
        Err(d) => {
            prop_assert!(!d.is_empty());
            prop_assert!(d.iter().all(|x| x.code == "LF000"));
            d
        }
    };
    for d in &diags {
        prop_assert!(index.contains(d.range), "{d:?} out of bounds in {src:?}");
    }
    let keys: Vec<(usize, usize)> = diags.iter().map(|d| (d.range.line, d.range.col)).collect();
    prop_assert!(keys.windows(2).all(|w| w[0] <= w[1]), "unsorted: {keys:?}");
    Ok(())
}

fn token_soup() -> impl Strategy<Value = String> {
    let tokens = prop::sample::select(vec![
        "target", "C", "main", "reactor", "A", "{", "}", "(", ")", ";", ",", ".", ":", "=", "->", "@",
        "label", "\"x\"", "timer", "input", "output", "state", "reaction", "new", "t", "1", "100 ms",
        "{=", "=}", "//", "/*", "*/", "\n", "é", "\t", "#",
    ]);
    prop::collection::vec(tokens, 0..40).prop_map(|v| v.join(" "))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn arbitrary_text_never_panics(src in "\\PC{0,80}") {
        check(&src)?;
    }

    #[test]
    fn token_soup_diagnostics_in_bounds(src in token_soup()) {
        check(&src)?;
    }

    #[test]
    fn damaged_fixtures_diagnostics_in_bounds(which in 0usize..10, at in 0usize..2000, len in 0usize..40) {
        let corpus = common::fixture_models();
        let src: Vec<char> = corpus[which].1.chars().collect();
        let at = at.min(src.len());
        let end = (at + len).min(src.len());
        let damaged: String = src[..at].iter().chain(&src[end..]).collect();
        check(&damaged)?;
    }
}

#[test]
fn unicode_columns_count_characters() {
    let src = "main reactor {\n  /* é */ timer t(5);\n}";
    let d = validate(&parse_model(src).unwrap());
    let bad_time = d.iter().find(|d| d.code == "LF007").unwrap();
    assert_eq!((bad_time.range.line, bad_time.range.col), (1, 16));
}
