use std::collections::HashMap;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sheetmind_core::{parse_action, parse_script, serialize_action, serialize_script};
use sheetmind_testkit::any_action;

#[test]
fn generated_asts_roundtrip_and_print_injectively() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut seen: HashMap<String, String> = HashMap::new();
    for _ in 0..3000 {
        let a = any_action(&mut rng);
        let text = serialize_action(&a);
        let back = parse_action(&text).unwrap_or_else(|e| panic!("{text}: {e}"));
        assert_eq!(back, a, "{text}");
        assert_eq!(serialize_action(&back), text);
        let debug = format!("{a:?}");
        if let Some(prev) = seen.insert(text.clone(), debug.clone()) {
            assert_eq!(prev, debug, "two ASTs print as {text}");
        }
    }
}

#[test]
fn scripts_roundtrip() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let actions: Vec<_> = (0..3).map(|_| any_action(&mut rng)).collect();
        let text = serialize_script(&actions);
        assert_eq!(parse_script(&text).unwrap(), actions);
    }
}

proptest! {
    #[test]
    fn parse_is_total_on_text(s in "\\PC{0,200}") {
        let _ = parse_action(&s);
        let _ = parse_script(&s);
    }

    #[test]
    fn parse_is_total_on_action_like_text(s in "[A-Z_]{1,12}\\([A-Za-z0-9:!'\", =.\\-]{0,40}\\)( WHERE [A-Z() \"=<>!0-9^$.\\[\\]]{0,40})?") {
        let _ = parse_action(&s);
    }

    #[test]
    fn reparse_of_printed_text_is_stable(s in "\\PC{0,80}") {
        if let Ok(a) = parse_action(&s) {
            let printed = serialize_action(&a);
            let again = parse_action(&printed).unwrap();
            prop_assert_eq!(&again, &a);
        }
    }
}
