//! Deterministic canonical serialization in the standardized Ansible style:
//! two-space indentation, sequence items introduced by `- ` with nested
//! content indented two columns under the dash, one space after `:`, key
//! order preserved, minimal quoting, booleans normalized to `true`/`false`,
//! a leading `---` per document and a single trailing newline.
//!
//! Canonical text is what Exact Match compares and what deduplication
//! hashes, so this module must stay byte-deterministic.

use crate::yaml::node::{NodeKind, Scalar, YamlDocument, YamlNode};
use crate::yaml::scalar::{plain_safe, resolve_plain, ScalarValue};

/// Serialize a whole document stream.
pub fn serialize_canonical(doc: &YamlDocument) -> String {
    let mut out = String::new();
    if doc.roots.is_empty() {
        out.push_str("---\n");
        return out;
    }
    for root in &doc.roots {
        out.push_str("---\n");
        write_root(&mut out, root);
    }
    out
}

/// Serialize a single node as a document body (no `---` leader).
pub fn serialize_node(node: &YamlNode) -> String {
    let mut out = String::new();
    write_root(&mut out, node);
    out
}

fn write_root(out: &mut String, node: &YamlNode) {
    match &node.kind {
        NodeKind::Scalar(s) => match scalar_repr(s) {
            Repr::Inline(text) => {
                out.push_str(&text);
                out.push('\n');
            }
            Repr::Literal(text) => write_literal(out, &text, 0),
        },
        NodeKind::Sequence(items) => {
            if items.is_empty() {
                out.push_str("[]\n");
            } else {
                write_sequence(out, items, 0, false);
            }
        }
        NodeKind::Mapping(pairs) => {
            if pairs.is_empty() {
                out.push_str("{}\n");
            } else {
                write_mapping(out, pairs, 0, false);
            }
        }
    }
}

/// Emit one sequence item per line: `- ` plus the item.
fn write_sequence(out: &mut String, items: &[YamlNode], indent: usize, mut inline_first: bool) {
    for item in items {
        if !inline_first {
            push_indent(out, indent);
        }
        inline_first = false;
        out.push('-');
        match &item.kind {
            NodeKind::Scalar(s) => match scalar_repr(s) {
                Repr::Inline(text) => {
                    out.push(' ');
                    out.push_str(&text);
                    out.push('\n');
                }
                Repr::Literal(text) => {
                    out.push(' ');
                    write_literal(out, &text, indent);
                }
            },
            NodeKind::Sequence(nested) => {
                if nested.is_empty() {
                    out.push_str(" []\n");
                } else {
                    out.push(' ');
                    write_sequence(out, nested, indent + 2, true);
                }
            }
            NodeKind::Mapping(pairs) => {
                if pairs.is_empty() {
                    out.push_str(" {}\n");
                } else {
                    out.push(' ');
                    write_mapping(out, pairs, indent + 2, true);
                }
            }
        }
    }
}

fn write_mapping(
    out: &mut String,
    pairs: &[(YamlNode, YamlNode)],
    indent: usize,
    mut inline_first: bool,
) {
    for (key, value) in pairs {
        if !inline_first {
            push_indent(out, indent);
        }
        inline_first = false;
        out.push_str(&key_repr(key));
        out.push(':');
        match &value.kind {
            NodeKind::Scalar(s) => match scalar_repr(s) {
                Repr::Inline(text) => {
                    out.push(' ');
                    out.push_str(&text);
                    out.push('\n');
                }
                Repr::Literal(text) => {
                    out.push(' ');
                    write_literal(out, &text, indent);
                }
            },
            NodeKind::Sequence(items) => {
                if items.is_empty() {
                    out.push_str(" []\n");
                } else {
                    out.push('\n');
                    write_sequence(out, items, indent + 2, false);
                }
            }
            NodeKind::Mapping(nested) => {
                if nested.is_empty() {
                    out.push_str(" {}\n");
                } else {
                    out.push('\n');
                    write_mapping(out, nested, indent + 2, false);
                }
            }
        }
    }
}

fn push_indent(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push(' ');
    }
}

enum Repr {
    /// Fits on the owning line.
    Inline(String),
    /// Multi-line text, emitted as a literal block scalar.
    Literal(String),
}

/// Canonical single-line or block form for a scalar, chosen from its
/// resolved value so that re-parsing yields the same value.
fn scalar_repr(scalar: &Scalar) -> Repr {
    match scalar.resolved() {
        ScalarValue::Null => Repr::Inline("null".to_string()),
        ScalarValue::Bool(true) => Repr::Inline("true".to_string()),
        ScalarValue::Bool(false) => Repr::Inline("false".to_string()),
        ScalarValue::Int(i) => Repr::Inline(i.to_string()),
        ScalarValue::Float(f) => Repr::Inline(float_repr(&scalar.raw, f)),
        ScalarValue::Text(t) => text_repr(&t),
    }
}

fn float_repr(raw: &str, value: f64) -> String {
    if matches!(resolve_plain(raw), ScalarValue::Float(v) if v == value || (v.is_nan() && value.is_nan()))
    {
        return raw.to_string();
    }
    if value.is_nan() {
        return ".nan".to_string();
    }
    if value.is_infinite() {
        return if value > 0.0 { ".inf" } else { "-.inf" }.to_string();
    }
    let mut s = value.to_string();
    if !s.contains(['.', 'e', 'E']) {
        s.push_str(".0");
    }
    s
}

fn text_repr(text: &str) -> Repr {
    if text.contains('\n') && literal_safe(text) {
        return Repr::Literal(text.to_string());
    }
    if plain_safe(text) {
        return Repr::Inline(text.to_string());
    }
    if text.contains('\'') || needs_double_quotes(text) {
        Repr::Inline(double_quoted(text))
    } else {
        Repr::Inline(single_quoted(text))
    }
}

/// Literal blocks cannot represent carriage returns, other control
/// characters, or interior lines made only of spaces.
fn literal_safe(text: &str) -> bool {
    if text.chars().any(|c| c.is_control() && c != '\n') {
        return false;
    }
    text.split('\n')
        .all(|line| line.is_empty() || !line.chars().all(|c| c == ' '))
}

fn needs_double_quotes(text: &str) -> bool {
    text.chars().any(char::is_control) || text.contains('\t')
}

fn single_quoted(text: &str) -> String {
    format!("'{}'", text.replace('\'', "''"))
}

fn double_quoted(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            '\0' => out.push_str("\\0"),
            c if c.is_control() => {
                let code = c as u32;
                if code <= 0xff {
                    out.push_str(&format!("\\x{code:02x}"));
                } else {
                    out.push_str(&format!("\\u{code:04x}"));
                }
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Mapping keys must stay on one line; multi-line keys fall back to
/// double-quoted form with escapes.
fn key_repr(key: &YamlNode) -> String {
    let scalar = key
        .as_scalar()
        .expect("mapping keys are scalars by construction");
    match scalar_repr(scalar) {
        Repr::Inline(text) => text,
        Repr::Literal(text) => double_quoted(&text),
    }
}

/// Emit `text` as a literal block scalar whose header continues the current
/// line; content lines go at `owner_indent + 2`.
fn write_literal(out: &mut String, text: &str, owner_indent: usize) {
    let trailing_newlines = text.len() - text.trim_end_matches('\n').len();
    let body_empty = text.trim_end_matches('\n').is_empty();
    let chomp = if body_empty && trailing_newlines > 0 {
        "+"
    } else {
        match trailing_newlines {
            0 => "-",
            1 => "",
            _ => "+",
        }
    };
    let mut lines: Vec<&str> = text.split('\n').collect();
    if text.ends_with('\n') {
        lines.pop();
    }
    let needs_digit = lines
        .iter()
        .find(|l| !l.is_empty())
        .is_some_and(|l| l.starts_with(' '));
    out.push('|');
    if needs_digit {
        out.push('2');
    }
    out.push_str(chomp);
    out.push('\n');
    for line in lines {
        if line.is_empty() {
            out.push('\n');
        } else {
            push_indent(out, owner_indent + 2);
            out.push_str(line);
            out.push('\n');
        }
    }
}
