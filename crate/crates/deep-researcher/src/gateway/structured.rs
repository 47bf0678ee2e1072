//! Structured-output parsing: JSON extraction plus schema validation.
//!
//! Models wrap JSON in prose or code fences more often than not, so parsing
//! first looks for a fenced block, then for the outermost brace-balanced
//! span, then tries the raw text. A type opts in by implementing
//! [`StructuredOutput`]: deserialization handles shape, `validate` handles
//! semantic constraints the type system cannot express.

use serde::de::DeserializeOwned;

/// A JSON document type the gateway can demand from a model.
pub trait StructuredOutput: DeserializeOwned {
    /// Stable identifier used in repair prompts and error messages.
    const SCHEMA_ID: &'static str;

    /// Semantic checks beyond deserialization (ranges, non-empty lists,
    /// cross-field rules). Return a human-readable reason on failure; it is
    /// fed back to the model verbatim during repair.
    fn validate(&self) -> Result<(), String>;
}

/// Pull the most plausible JSON document out of a model reply.
///
/// Tried in order: a ` ```json ` (or bare ` ``` `) fenced block, the
/// outermost `{...}` or `[...]` span, then the trimmed text itself.
pub fn extract_json_block(text: &str) -> Option<&str> {
    if let Some(block) = fenced_block(text) {
        return Some(block);
    }
    if let Some(span) = balanced_span(text) {
        return Some(span);
    }
    let trimmed = text.trim();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return Some(trimmed);
    }
    None
}

fn fenced_block(text: &str) -> Option<&str> {
    let open = text.find("```")?;
    let after_fence = &text[open + 3..];
    // Skip the info string ("json", "JSON", or empty) up to the newline.
    let body_start = after_fence.find('\n')? + 1;
    let body = &after_fence[body_start..];
    let close = body.find("```")?;
    let candidate = body[..close].trim();
    (!candidate.is_empty()).then_some(candidate)
}

/// Outermost brace-balanced `{...}` or `[...]` span, string-literal aware.
fn balanced_span(text: &str) -> Option<&str> {
    let start = text.find(['{', '['])?;
    let bytes = text.as_bytes();
    let open = bytes[start];
    let close = if open == b'{' { b'}' } else { b']' };
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (offset, &b) in bytes[start..].iter().enumerate() {
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            _ if b == open => depth += 1,
            _ if b == close => {
                depth -= 1;
                if depth == 0 {
                    return Some(&text[start..start + offset + 1]);
                }
            }
            _ => {}
        }
    }
    None
}

/// Extract, deserialize, and validate a reply as `T`. The error string is
/// suitable for echoing back to the model in a repair prompt.
pub fn parse_structured<T: StructuredOutput>(text: &str) -> Result<T, String> {
    let block = extract_json_block(text)
        .ok_or_else(|| "no JSON document found in the reply".to_string())?;
    let value: T = serde_json::from_str(block)
        .map_err(|e| format!("JSON does not match the `{}` shape: {e}", T::SCHEMA_ID))?;
    value.validate().map_err(|reason| format!("invalid `{}`: {reason}", T::SCHEMA_ID))?;
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Deserialize, PartialEq)]
    struct Pair {
        a: i32,
        b: String,
    }

    impl StructuredOutput for Pair {
        const SCHEMA_ID: &'static str = "pair";

        fn validate(&self) -> Result<(), String> {
            if self.b.is_empty() {
                return Err("b must be non-empty".into());
            }
            Ok(())
        }
    }

    #[test]
    fn extracts_fenced_json() {
        let text = "Sure, here you go:\n```json\n{\"a\": 1, \"b\": \"x\"}\n```\nDone.";
        assert_eq!(extract_json_block(text).unwrap(), r#"{"a": 1, "b": "x"}"#);
    }

    #[test]
    fn extracts_bare_fence_without_info_string() {
        let text = "```\n[1, 2, 3]\n```";
        assert_eq!(extract_json_block(text).unwrap(), "[1, 2, 3]");
    }

    #[test]
    fn extracts_brace_span_from_prose() {
        let text = "The answer is {\"a\": 2, \"b\": \"y\"} as requested.";
        assert_eq!(extract_json_block(text).unwrap(), r#"{"a": 2, "b": "y"}"#);
    }

    #[test]
    fn brace_span_ignores_braces_inside_strings() {
        let text = r#"note {"a": 3, "b": "has } brace"} end"#;
        assert_eq!(
            extract_json_block(text).unwrap(),
            r#"{"a": 3, "b": "has } brace"}"#
        );
    }

    #[test]
    fn nested_objects_resolve_to_outermost() {
        let text = r#"{"a": 1, "b": "x", "extra": {"inner": {}}}"#;
        assert_eq!(extract_json_block(text).unwrap(), text);
    }

    #[test]
    fn no_json_yields_none() {
        assert!(extract_json_block("plain prose, no structure").is_none());
    }

    #[test]
    fn parse_structured_runs_validation() {
        let ok: Pair = parse_structured("{\"a\": 1, \"b\": \"x\"}").unwrap();
        assert_eq!(ok, Pair { a: 1, b: "x".into() });
        let err = parse_structured::<Pair>("{\"a\": 1, \"b\": \"\"}").unwrap_err();
        assert!(err.contains("b must be non-empty"));
        let err = parse_structured::<Pair>("{\"a\": \"wrong\"}").unwrap_err();
        assert!(err.contains("pair"));
    }
}
