//! Legacy `k1=v1 k2=v2` module-argument parsing. Ansible calls this the
//! free-form syntax; structural comparison normalizes it into a mapping so
//! `command: echo hi` and the dict form score identically.

use thiserror::Error;

use crate::yaml::{Scalar, ScalarStyle, Span, YamlNode};

/// Key that collects bare words without a `k=v` shape, following Ansible's
/// own convention for free-form module arguments.
pub const RAW_PARAMS_KEY: &str = "_raw_params";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FreeFormError {
    #[error("unbalanced quote in free-form arguments: {0}")]
    MalformedFreeForm(String),
}

/// Parse a free-form argument string into an ordered mapping node.
///
/// Tokens split on unquoted spaces. A token `ident=value` becomes a pair
/// (value unquoted when quoted); everything else is gathered, in order, into
/// `_raw_params` at the position of the first bare token.
pub fn parse_free_form(text: &str) -> Result<YamlNode, FreeFormError> {
    let tokens = tokenize(text)?;
    let mut pairs: Vec<(YamlNode, YamlNode)> = Vec::new();
    let mut raw_words: Vec<String> = Vec::new();
    let mut raw_slot: Option<usize> = None;

    for token in tokens {
        match split_assignment(&token) {
            Some((key, value)) => {
                let scalar = unquote(value);
                pairs.push((YamlNode::text(key), YamlNode::scalar(scalar, Span::synthetic())));
            }
            None => {
                if raw_slot.is_none() {
                    raw_slot = Some(pairs.len());
                }
                raw_words.push(token);
            }
        }
    }
    if let Some(slot) = raw_slot {
        let raw = raw_words.join(" ");
        pairs.insert(
            slot,
            (
                YamlNode::text(RAW_PARAMS_KEY),
                YamlNode::scalar(
                    Scalar::new(raw, ScalarStyle::DoubleQuoted),
                    Span::synthetic(),
                ),
            ),
        );
    }
    Ok(YamlNode::new_mapping(pairs))
}

/// Render a free-form mapping back to `k=v` text. Inverse of
/// `parse_free_form` for mappings it produced; used by fixed-point tests.
pub fn render_free_form(node: &YamlNode) -> Option<String> {
    let pairs = node.as_mapping()?;
    let mut parts = Vec::with_capacity(pairs.len());
    for (key, value) in pairs {
        let key = key.key_text()?;
        let resolved = value.resolved()?;
        let text = resolved.key_string();
        if key == RAW_PARAMS_KEY {
            parts.push(text);
            continue;
        }
        // Quote whenever re-parsing the bare text would change the value.
        let needs_quotes = text.contains(' ')
            || text.contains('"')
            || text.contains('\'')
            || match &resolved {
                crate::yaml::ScalarValue::Text(t) => {
                    !matches!(crate::yaml::resolve_plain(t), crate::yaml::ScalarValue::Text(_))
                }
                _ => false,
            }
            || text.is_empty();
        if needs_quotes {
            parts.push(format!("{key}=\"{}\"", text.replace('"', "\\\"")));
        } else {
            parts.push(format!("{key}={text}"));
        }
    }
    Some(parts.join(" "))
}

/// Split on spaces outside single or double quotes. Quotes may appear
/// anywhere inside a token (`src="/a b"`).
fn tokenize(text: &str) -> Result<Vec<String>, FreeFormError> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut quote: Option<char> = None;
    let mut escaped = false;
    for c in text.chars() {
        match quote {
            Some(q) => {
                current.push(c);
                if escaped {
                    escaped = false;
                } else if q == '"' && c == '\\' {
                    escaped = true;
                } else if c == q {
                    quote = None;
                }
            }
            None => match c {
                ' ' | '\t' | '\n' => {
                    if !current.is_empty() {
                        tokens.push(std::mem::take(&mut current));
                    }
                }
                '"' | '\'' => {
                    quote = Some(c);
                    current.push(c);
                }
                _ => current.push(c),
            },
        }
    }
    if quote.is_some() {
        return Err(FreeFormError::MalformedFreeForm(text.to_string()));
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    Ok(tokens)
}

/// `ident=rest` when the part before `=` is a plain identifier.
fn split_assignment(token: &str) -> Option<(&str, &str)> {
    let eq = token.find('=')?;
    let key = &token[..eq];
    let mut chars = key.chars();
    let first = chars.next()?;
    if !(first.is_ascii_alphabetic() || first == '_') {
        return None;
    }
    if !chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return None;
    }
    Some((key, &token[eq + 1..]))
}

/// Strip one layer of matching quotes, remembering the style so resolution
/// treats quoted values as text.
fn unquote(value: &str) -> Scalar {
    let bytes = value.as_bytes();
    if bytes.len() >= 2 {
        if bytes[0] == b'"' && bytes[bytes.len() - 1] == b'"' {
            let inner = &value[1..value.len() - 1];
            return Scalar::new(inner.replace("\\\"", "\""), ScalarStyle::DoubleQuoted);
        }
        if bytes[0] == b'\'' && bytes[bytes.len() - 1] == b'\'' {
            return Scalar::new(&value[1..value.len() - 1], ScalarStyle::SingleQuoted);
        }
    }
    Scalar::plain(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::yaml::ScalarValue;

    fn entries(node: &YamlNode) -> Vec<(String, String)> {
        node.as_mapping()
            .unwrap()
            .iter()
            .map(|(k, v)| (k.key_text().unwrap(), v.resolved().unwrap().key_string()))
            .collect()
    }

    #[test]
    fn simple_pairs() {
        let node = parse_free_form("name=httpd state=latest").unwrap();
        assert_eq!(
            entries(&node),
            [("name".into(), "httpd".into()), ("state".into(), "latest".into())]
        );
    }

    #[test]
    fn empty_input_is_empty_mapping() {
        let node = parse_free_form("").unwrap();
        assert_eq!(node.as_mapping().unwrap().len(), 0);
    }

    #[test]
    fn quoted_values_with_spaces() {
        let node = parse_free_form("src=\"/srv/a b.j2\" dest=/etc/x").unwrap();
        assert_eq!(
            entries(&node),
            [("src".into(), "/srv/a b.j2".into()), ("dest".into(), "/etc/x".into())]
        );
    }

    #[test]
    fn quoted_value_stays_text() {
        let node = parse_free_form("enabled=\"yes\"").unwrap();
        assert_eq!(
            node.get("enabled").unwrap().resolved().unwrap(),
            ScalarValue::Text("yes".into())
        );
        let node = parse_free_form("enabled=yes").unwrap();
        assert_eq!(node.get("enabled").unwrap().resolved().unwrap(), ScalarValue::Bool(true));
    }

    #[test]
    fn bare_words_become_raw_params() {
        let node = parse_free_form("echo hello world creates=/tmp/x").unwrap();
        assert_eq!(
            entries(&node),
            [
                ("_raw_params".into(), "echo hello world".into()),
                ("creates".into(), "/tmp/x".into())
            ]
        );
    }

    #[test]
    fn trailing_bare_fragment() {
        let node = parse_free_form("warn=false echo done").unwrap();
        assert_eq!(
            entries(&node),
            [("warn".into(), "false".into()), ("_raw_params".into(), "echo done".into())]
        );
    }

    #[test]
    fn non_identifier_equals_is_raw() {
        let node = parse_free_form("PATH=/bin:/usr/bin printenv 2=3").unwrap();
        // `2=3` and `PATH=...`? PATH is a valid identifier, 2=3 is not.
        assert_eq!(
            entries(&node),
            [
                ("PATH".into(), "/bin:/usr/bin".into()),
                ("_raw_params".into(), "printenv 2=3".into())
            ]
        );
    }

    #[test]
    fn unbalanced_quote_is_error() {
        assert!(matches!(
            parse_free_form("src=\"/srv/a b.j2 dest=/etc/x"),
            Err(FreeFormError::MalformedFreeForm(_))
        ));
        assert!(parse_free_form("echo 'oops").is_err());
    }

    #[test]
    fn render_parse_fixed_point() {
        for text in [
            "name=httpd state=latest",
            "src=\"/srv/a b.j2\" dest=/etc/x",
            "echo hello creates=/tmp/x",
            "enabled=\"yes\" empty=\"\" n=42",
        ] {
            let node = parse_free_form(text).unwrap();
            let rendered = render_free_form(&node).unwrap();
            let again = parse_free_form(&rendered).unwrap();
            assert_eq!(node, again, "{text} -> {rendered}");
        }
    }
}
