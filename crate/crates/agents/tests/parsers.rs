use proptest::prelude::*;
use sheetmind_agents::reflect::{parse_post_judge, parse_pre_judge, PostVerdict};
use sheetmind_agents::{extract_action, parse_plan};
use sheetmind_core::{serialize_action, Verdict};

fn reply_like() -> impl Strategy<Value = String> {
    let pieces = prop_oneof![
        Just("1. ".to_string()),
        Just("2) ".to_string()),
        Just("[after 1]".to_string()),
        Just("[after ".to_string()),
        Just("VALID".to_string()),
        Just("INVALID:".to_string()),
        Just("RETRY: ".to_string()),
        Just("ESCALATE".to_string()),
        Just("OK".to_string()),
        Just("```".to_string()),
        Just("SET(A1, 1)".to_string()),
        Just("DELETE(E:E) WHERE MATCHES(\"".to_string()),
        Just("\n".to_string()),
        "\\PC{0,12}",
    ];
    prop::collection::vec(pieces, 0..12).prop_map(|v| v.concat())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(3000))]

    #[test]
    fn parsers_are_total_on_arbitrary_text(s in "\\PC{0,200}") {
        let _ = parse_plan(&s);
        let _ = extract_action(&s);
        let _ = parse_pre_judge(&s);
        let _ = parse_post_judge(&s);
    }

    #[test]
    fn parsers_are_total_on_reply_like_text(s in reply_like()) {
        if let Ok(plan) = parse_plan(&s) {
            prop_assert!(!plan.is_empty());
            for (i, t) in plan.iter().enumerate() {
                prop_assert_eq!(t.index, i + 1);
                prop_assert!(t.depends_on.iter().all(|&d| d >= 1 && d < t.index));
                prop_assert!(!t.description.is_empty());
            }
        }
        if let Ok(a) = extract_action(&s) {
            let text = serialize_action(&a);
            prop_assert!(s.contains(&text) || extract_action(&text).is_ok());
        }
        if let Ok(Verdict::Invalid { reason, .. }) = parse_pre_judge(&s) {
            prop_assert!(!reason.is_empty());
        }
        match parse_post_judge(&s) {
            Ok(PostVerdict::Retry(t)) | Ok(PostVerdict::Escalate(t)) => prop_assert!(!t.is_empty()),
            _ => {}
        }
    }

    #[test]
    fn rendered_plans_parse_back(
        descs in prop::collection::vec("[a-z][a-z ]{0,20}[a-z]", 1..8),
        deps in prop::collection::vec(prop::collection::vec(0usize..8, 0..3), 8),
    ) {
        let mut text = String::from("Plan:\n");
        let mut expected = Vec::new();
        for (i, d) in descs.iter().enumerate() {
            let index = i + 1;
            let mut ds: Vec<usize> = deps[i].iter().map(|k| k % index).filter(|&k| k >= 1).collect();
            ds.sort_unstable();
            ds.dedup();
            let tag = if ds.is_empty() {
                String::new()
            } else {
                format!(" [after {}]", ds.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(", "))
            };
            text.push_str(&format!("{index}. {d}{tag}\n"));
            expected.push((d.split_whitespace().collect::<Vec<_>>().join(" "), ds));
        }
        let plan = parse_plan(&text).unwrap();
        let got: Vec<_> = plan.into_iter().map(|t| (t.description, t.depends_on)).collect();
        prop_assert_eq!(got, expected);
    }
}
