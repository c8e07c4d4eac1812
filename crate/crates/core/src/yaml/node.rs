//! Ordered YAML value model with source spans.
//!
//! Mappings preserve pair order and sequences preserve item order; both are
//! plain vectors so traversal order always equals source order. Equality is
//! structural over resolved scalar values: `yes`, `true` and `True` compare
//! equal, while `"yes"` (quoted, hence text) does not equal any of them.

use std::fmt;

use crate::yaml::scalar::{resolve_scalar, ScalarStyle, ScalarValue};

/// Source region of a node, 1-based. `end_col` is exclusive so that
/// `(line, col)..(line, col)` denotes an empty region (e.g. a missing value).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub start_line: usize,
    pub start_col: usize,
    pub end_line: usize,
    pub end_col: usize,
}

impl Span {
    pub fn new(start_line: usize, start_col: usize, end_line: usize, end_col: usize) -> Self {
        Span { start_line, start_col, end_line, end_col }
    }

    /// Synthetic span for programmatically constructed nodes.
    pub fn synthetic() -> Self {
        Span::default()
    }

    pub fn is_synthetic(&self) -> bool {
        *self == Span::default()
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start_line, self.start_col)
    }
}

/// A scalar token: the verbatim source text plus the style it was written in.
/// The resolved value is derived, not stored, so it can never go stale.
#[derive(Debug, Clone)]
pub struct Scalar {
    pub raw: String,
    pub style: ScalarStyle,
}

impl Scalar {
    pub fn new(raw: impl Into<String>, style: ScalarStyle) -> Self {
        Scalar { raw: raw.into(), style }
    }

    pub fn plain(raw: impl Into<String>) -> Self {
        Scalar::new(raw, ScalarStyle::Plain)
    }

    /// Resolve this scalar to its typed value (YAML 1.1 rules for plain style,
    /// text for everything else).
    pub fn resolved(&self) -> ScalarValue {
        resolve_scalar(&self.raw, self.style)
    }
}

/// Node payload: scalar, sequence of nodes, or mapping of scalar keys to nodes.
#[derive(Debug, Clone)]
pub enum NodeKind {
    Scalar(Scalar),
    Sequence(Vec<YamlNode>),
    Mapping(Vec<(YamlNode, YamlNode)>),
}

#[derive(Debug, Clone)]
pub struct YamlNode {
    pub kind: NodeKind,
    pub span: Span,
}

impl YamlNode {
    pub fn scalar(scalar: Scalar, span: Span) -> Self {
        YamlNode { kind: NodeKind::Scalar(scalar), span }
    }

    pub fn sequence(items: Vec<YamlNode>, span: Span) -> Self {
        YamlNode { kind: NodeKind::Sequence(items), span }
    }

    pub fn mapping(pairs: Vec<(YamlNode, YamlNode)>, span: Span) -> Self {
        YamlNode { kind: NodeKind::Mapping(pairs), span }
    }

    /// Plain text scalar with a synthetic span; convenience for constructed trees.
    pub fn text(raw: impl Into<String>) -> Self {
        YamlNode::scalar(Scalar::plain(raw), Span::synthetic())
    }

    pub fn new_sequence(items: Vec<YamlNode>) -> Self {
        YamlNode::sequence(items, Span::synthetic())
    }

    pub fn new_mapping(pairs: Vec<(YamlNode, YamlNode)>) -> Self {
        YamlNode::mapping(pairs, Span::synthetic())
    }

    pub fn is_scalar(&self) -> bool {
        matches!(self.kind, NodeKind::Scalar(_))
    }

    pub fn is_sequence(&self) -> bool {
        matches!(self.kind, NodeKind::Sequence(_))
    }

    pub fn is_mapping(&self) -> bool {
        matches!(self.kind, NodeKind::Mapping(_))
    }

    pub fn as_scalar(&self) -> Option<&Scalar> {
        match &self.kind {
            NodeKind::Scalar(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_sequence(&self) -> Option<&[YamlNode]> {
        match &self.kind {
            NodeKind::Sequence(items) => Some(items),
            _ => None,
        }
    }

    pub fn as_mapping(&self) -> Option<&[(YamlNode, YamlNode)]> {
        match &self.kind {
            NodeKind::Mapping(pairs) => Some(pairs),
            _ => None,
        }
    }

    /// Resolved value of a scalar node, or `None` for collections.
    pub fn resolved(&self) -> Option<ScalarValue> {
        self.as_scalar().map(Scalar::resolved)
    }

    /// The resolved text of a scalar node rendered as a key string.
    /// Used wherever mapping keys are compared by name.
    pub fn key_text(&self) -> Option<String> {
        self.resolved().map(|v| v.key_string())
    }

    /// Look up a mapping entry whose key resolves to `name`.
    pub fn get(&self, name: &str) -> Option<&YamlNode> {
        self.as_mapping()?.iter().find_map(|(k, v)| {
            (k.key_text().as_deref() == Some(name)).then_some(v)
        })
    }

    /// True when this node is a scalar resolving to null.
    pub fn is_null(&self) -> bool {
        matches!(self.resolved(), Some(ScalarValue::Null))
    }
}

// Structural equality over resolved values; spans and scalar styles are
// presentation detail and do not participate.
impl PartialEq for YamlNode {
    fn eq(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (NodeKind::Scalar(a), NodeKind::Scalar(b)) => a.resolved() == b.resolved(),
            (NodeKind::Sequence(a), NodeKind::Sequence(b)) => a == b,
            (NodeKind::Mapping(a), NodeKind::Mapping(b)) => {
                a.len() == b.len()
                    && a.iter().zip(b).all(|(x, y)| x.0 == y.0 && x.1 == y.1)
            }
            _ => false,
        }
    }
}

/// A parsed stream: zero or more document roots in source order.
#[derive(Debug, Clone, PartialEq)]
pub struct YamlDocument {
    pub roots: Vec<YamlNode>,
    pub source_name: String,
}

impl YamlDocument {
    pub fn new(roots: Vec<YamlNode>, source_name: impl Into<String>) -> Self {
        YamlDocument { roots, source_name: source_name.into() }
    }

    /// The single root of a one-document stream, if that is what this is.
    pub fn sole_root(&self) -> Option<&YamlNode> {
        match self.roots.as_slice() {
            [root] => Some(root),
            _ => None,
        }
    }
}
