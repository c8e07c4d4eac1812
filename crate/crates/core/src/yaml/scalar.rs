//! Plain-scalar resolution per YAML 1.1 core rules, restricted the way
//! Ansible content needs them: `yes`/`no`/`on`/`off` are booleans, integers
//! are base-10 only, and octal-looking tokens such as `0644` stay text so
//! file modes survive canonicalization.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarStyle {
    Plain,
    SingleQuoted,
    DoubleQuoted,
    Literal,
    Folded,
}

impl ScalarStyle {
    /// Quoted and block styles suppress type resolution.
    pub fn forces_text(self) -> bool {
        !matches!(self, ScalarStyle::Plain)
    }
}

/// Resolved scalar value. `Float` compares NaN equal to NaN so that a node
/// always equals itself.
#[derive(Debug, Clone)]
pub enum ScalarValue {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

impl PartialEq for ScalarValue {
    fn eq(&self, other: &Self) -> bool {
        use ScalarValue::*;
        match (self, other) {
            (Null, Null) => true,
            (Bool(a), Bool(b)) => a == b,
            (Int(a), Int(b)) => a == b,
            (Float(a), Float(b)) => a == b || (a.is_nan() && b.is_nan()),
            (Text(a), Text(b)) => a == b,
            _ => false,
        }
    }
}

impl ScalarValue {
    /// Canonical string used when this value acts as a mapping key.
    pub fn key_string(&self) -> String {
        match self {
            ScalarValue::Null => "null".to_string(),
            ScalarValue::Bool(true) => "true".to_string(),
            ScalarValue::Bool(false) => "false".to_string(),
            ScalarValue::Int(i) => i.to_string(),
            ScalarValue::Float(f) => f.to_string(),
            ScalarValue::Text(t) => t.clone(),
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            ScalarValue::Text(t) => Some(t),
            _ => None,
        }
    }
}

impl fmt::Display for ScalarValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key_string())
    }
}

/// Resolve a scalar token given its style. Quoted and block scalars are
/// always text; plain scalars go through the 1.1 decision table.
pub fn resolve_scalar(raw: &str, style: ScalarStyle) -> ScalarValue {
    if style.forces_text() {
        return ScalarValue::Text(raw.to_string());
    }
    resolve_plain(raw)
}

/// Resolve a plain (unquoted) scalar token.
pub fn resolve_plain(raw: &str) -> ScalarValue {
    if raw.is_empty() || raw == "~" {
        return ScalarValue::Null;
    }
    match raw.to_ascii_lowercase().as_str() {
        "null" => return ScalarValue::Null,
        "true" | "yes" | "on" => return ScalarValue::Bool(true),
        "false" | "no" | "off" => return ScalarValue::Bool(false),
        ".inf" | "+.inf" => return ScalarValue::Float(f64::INFINITY),
        "-.inf" => return ScalarValue::Float(f64::NEG_INFINITY),
        ".nan" => return ScalarValue::Float(f64::NAN),
        _ => {}
    }
    if let Some(i) = parse_int(raw) {
        return ScalarValue::Int(i);
    }
    if let Some(f) = parse_float(raw) {
        return ScalarValue::Float(f);
    }
    ScalarValue::Text(raw.to_string())
}

/// Base-10 integers only. Multi-digit tokens with a leading zero are left as
/// text: they are almost always file modes (`0644`) and integer resolution
/// would corrupt them.
fn parse_int(raw: &str) -> Option<i64> {
    let digits = raw.strip_prefix(['-', '+']).unwrap_or(raw);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if digits.len() > 1 && digits.starts_with('0') {
        return None;
    }
    raw.strip_prefix('+').unwrap_or(raw).parse().ok()
}

fn parse_float(raw: &str) -> Option<f64> {
    let body = raw.strip_prefix(['-', '+']).unwrap_or(raw);
    if body.is_empty() {
        return None;
    }
    // Require a digit somewhere and either a dot or an exponent, so plain
    // words never reach the stdlib parser ("infinity", "nan", hex forms).
    let mut digits = false;
    let mut dot = false;
    let mut exp = false;
    let mut prev = b'\0';
    for b in body.bytes() {
        match b {
            b'0'..=b'9' => digits = true,
            b'.' if !dot && !exp => dot = true,
            b'e' | b'E' if !exp && digits => exp = true,
            b'-' | b'+' if prev == b'e' || prev == b'E' => {}
            _ => return None,
        }
        prev = b;
    }
    if !digits || !(dot || exp) {
        return None;
    }
    raw.parse().ok()
}

/// Whether `text` can be emitted as a plain scalar without changing either
/// the YAML structure around it or the resolved value.
pub fn plain_safe(text: &str) -> bool {
    if text.is_empty() {
        return false;
    }
    let first = text.chars().next().unwrap();
    if text.starts_with(' ') || text.ends_with(' ') {
        return false;
    }
    if text.contains(['\n', '\t']) || text.chars().any(char::is_control) {
        return false;
    }
    // Leading indicator characters start collections, comments, anchors, ...
    if ",[]{}#&*!|>'\"%@`".contains(first) {
        return false;
    }
    if matches!(first, '-' | '?' | ':') {
        let rest = &text[first.len_utf8()..];
        if rest.is_empty() || rest.starts_with(' ') {
            return false;
        }
    }
    // Document markers would restructure the stream at column zero.
    if text.starts_with("---") || text.starts_with("...") {
        return false;
    }
    // A colon-space or space-hash inside the token would split it.
    if text.contains(": ") || text.ends_with(':') || text.contains(" #") {
        return false;
    }
    // Plain style must still resolve back to the same text.
    matches!(resolve_plain(text), ScalarValue::Text(_))
}
