//! Prompt templates shipped as text files.
//!
//! Each file holds a system section and a user section separated by a
//! `=== user ===` line. The system section starts with a `ROLE: <name>` line,
//! which scripted backends use to route replies.

use sheetmind_llm::ChatMessage;

pub const MANAGER: &str = include_str!("../templates/manager.txt");
pub const ACTION: &str = include_str!("../templates/action.txt");
pub const JUDGE_PRE: &str = include_str!("../templates/judge_pre.txt");
pub const JUDGE_POST: &str = include_str!("../templates/judge_post.txt");
pub const SUMMARY: &str = include_str!("../templates/summary.txt");

/// All templates by file name.
pub const ALL: [(&str, &str); 5] = [
    ("manager.txt", MANAGER),
    ("action.txt", ACTION),
    ("judge_pre.txt", JUDGE_PRE),
    ("judge_post.txt", JUDGE_POST),
    ("summary.txt", SUMMARY),
];

const USER_MARKER: &str = "\n=== user ===\n";

/// Substitutes every `{{key}}` in a single pass. Unknown placeholders are
/// left as written, and substituted values are never rescanned.
pub fn render(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find("{{") {
        out.push_str(&rest[..open]);
        let after = &rest[open + 2..];
        match after.find("}}") {
            Some(close) => {
                let key = &after[..close];
                match vars.iter().find(|(k, _)| *k == key) {
                    Some((_, v)) => out.push_str(v),
                    None => {
                        out.push_str("{{");
                        out.push_str(key);
                        out.push_str("}}");
                    }
                }
                rest = &after[close + 2..];
            }
            None => {
                out.push_str(&rest[open..]);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}

/// Renders a template into a `[system, user]` conversation.
pub fn conversation(template: &str, vars: &[(&str, &str)]) -> Vec<ChatMessage> {
    let (system, user) = template
        .split_once(USER_MARKER)
        .expect("template has a user section");
    vec![
        ChatMessage::system(render(system, vars).trim_end()),
        ChatMessage::user(render(user, vars).trim_end()),
    ]
}

/// The `ROLE:` line a template's system section opens with.
pub fn role_line(template: &str) -> &str {
    template.lines().next().unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_is_single_pass() {
        assert_eq!(render("a {{x}} b {{y}}", &[("x", "{{y}}"), ("y", "2")]), "a {{y}} b 2");
        assert_eq!(render("{{missing}} {{", &[]), "{{missing}} {{");
    }

    #[test]
    fn every_template_has_role_and_user_section() {
        for (name, t) in ALL {
            assert!(role_line(t).starts_with("ROLE: "), "{name}");
            let convo = conversation(t, &[]);
            assert_eq!(convo.len(), 2, "{name}");
            assert!(!convo[1].content.is_empty(), "{name}");
        }
    }
}
