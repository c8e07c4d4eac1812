//! Structural validation of tasks and playbooks against the schema tables.
//! Violations are data, not errors: an empty list means schema-correct.
//! Only shape is checked — unknown module names pass, since a perfectly
//! matching prediction can still use a module the catalog has never heard
//! of.

use std::fmt;

use crate::ansible::{ModuleCatalog, BLOCK_KEYS};
use crate::schema::tables::{SchemaTables, ValueKind};
use crate::yaml::{NodeKind, Span, YamlDocument, YamlNode};

/// One step in a violation path, from the root of the validated document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathSeg {
    Key(String),
    Index(usize),
}

impl fmt::Display for PathSeg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathSeg::Key(k) => f.write_str(k),
            PathSeg::Index(i) => write!(f, "{i}"),
        }
    }
}

/// Violation rule identifiers. The `Display` names are stable and used in
/// reports and fixtures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationRule {
    RootNotSequence,
    MultipleDocuments,
    NotAMapping,
    MissingRequiredKey,
    UnknownPlayKey,
    NoModuleKey,
    AmbiguousModule,
    KindMismatch,
    BlockNotSupported,
    MalformedFreeForm,
}

impl fmt::Display for ViolationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ViolationRule::RootNotSequence => "RootNotSequence",
            ViolationRule::MultipleDocuments => "MultipleDocuments",
            ViolationRule::NotAMapping => "NotAMapping",
            ViolationRule::MissingRequiredKey => "MissingRequiredKey",
            ViolationRule::UnknownPlayKey => "UnknownPlayKey",
            ViolationRule::NoModuleKey => "NoModuleKey",
            ViolationRule::AmbiguousModule => "AmbiguousModule",
            ViolationRule::KindMismatch => "KindMismatch",
            ViolationRule::BlockNotSupported => "BlockNotSupported",
            ViolationRule::MalformedFreeForm => "MalformedFreeForm",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemaViolation {
    pub path: Vec<PathSeg>,
    pub rule: ViolationRule,
    pub message: String,
    pub span: Option<Span>,
}

impl SchemaViolation {
    fn new(path: Vec<PathSeg>, rule: ViolationRule, message: String, node: Option<&YamlNode>) -> Self {
        let span = node.map(|n| n.span).filter(|s| !s.is_synthetic());
        SchemaViolation { path, rule, message, span }
    }

    /// `[0, hosts]`-style rendering of the path.
    pub fn path_string(&self) -> String {
        let parts: Vec<String> = self.path.iter().map(|p| p.to_string()).collect();
        format!("[{}]", parts.join(", "))
    }
}

impl fmt::Display for SchemaViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.rule, self.path_string(), self.message)?;
        if let Some(span) = &self.span {
            write!(f, " (line {}, column {})", span.start_line, span.start_col)?;
        }
        Ok(())
    }
}

/// Validate a single task mapping.
pub fn validate_task(
    node: &YamlNode,
    catalog: &ModuleCatalog,
    tables: &SchemaTables,
) -> Vec<SchemaViolation> {
    let mut out = Vec::new();
    validate_task_at(Vec::new(), node, catalog, tables, &mut out);
    out
}

/// Validate a play mapping (without the surrounding playbook sequence).
pub fn validate_play(
    node: &YamlNode,
    catalog: &ModuleCatalog,
    tables: &SchemaTables,
) -> Vec<SchemaViolation> {
    let mut out = Vec::new();
    validate_play_at(Vec::new(), node, catalog, tables, &mut out);
    out
}

/// Validate a whole playbook document: a single-document stream whose root
/// is a sequence of plays.
pub fn validate_playbook(
    doc: &YamlDocument,
    catalog: &ModuleCatalog,
    tables: &SchemaTables,
) -> Vec<SchemaViolation> {
    let mut out = Vec::new();
    let Some(first) = doc.roots.first() else {
        out.push(SchemaViolation::new(
            Vec::new(),
            ViolationRule::RootNotSequence,
            "document is empty".to_string(),
            None,
        ));
        return out;
    };
    if doc.roots.len() > 1 {
        out.push(SchemaViolation::new(
            Vec::new(),
            ViolationRule::MultipleDocuments,
            format!("playbook has {} documents, expected 1", doc.roots.len()),
            None,
        ));
    }
    let Some(plays) = first.as_sequence() else {
        out.push(SchemaViolation::new(
            Vec::new(),
            ViolationRule::RootNotSequence,
            "playbook root must be a sequence of plays".to_string(),
            Some(first),
        ));
        return out;
    };
    for (i, play) in plays.iter().enumerate() {
        validate_play_at(vec![PathSeg::Index(i)], play, catalog, tables, &mut out);
    }
    out
}

fn validate_play_at(
    path: Vec<PathSeg>,
    node: &YamlNode,
    catalog: &ModuleCatalog,
    tables: &SchemaTables,
    out: &mut Vec<SchemaViolation>,
) {
    let Some(pairs) = node.as_mapping() else {
        out.push(SchemaViolation::new(
            path,
            ViolationRule::NotAMapping,
            "play must be a mapping".to_string(),
            Some(node),
        ));
        return;
    };
    for required in tables.play_required() {
        if node.get(required).is_none() {
            let mut p = path.clone();
            p.push(PathSeg::Key(required.clone()));
            out.push(SchemaViolation::new(
                p,
                ViolationRule::MissingRequiredKey,
                format!("play is missing required key `{required}`"),
                Some(node),
            ));
        }
    }
    for (key, value) in pairs {
        let key_text = key.key_text().unwrap_or_default();
        let mut key_path = path.clone();
        key_path.push(PathSeg::Key(key_text.clone()));
        match tables.play_key_kind(&key_text) {
            Some(ValueKind::TaskList) => {
                let Some(items) = value.as_sequence() else {
                    out.push(SchemaViolation::new(
                        key_path,
                        ViolationRule::KindMismatch,
                        format!("`{key_text}` must be a list of task mappings"),
                        Some(value),
                    ));
                    continue;
                };
                for (i, item) in items.iter().enumerate() {
                    let mut item_path = key_path.clone();
                    item_path.push(PathSeg::Index(i));
                    validate_task_at(item_path, item, catalog, tables, out);
                }
            }
            Some(kind) => check_kind(key_path, &key_text, value, kind, out),
            None => {
                out.push(SchemaViolation::new(
                    key_path,
                    ViolationRule::UnknownPlayKey,
                    format!("`{key_text}` is not an allowed play key"),
                    Some(key),
                ));
            }
        }
    }
}

fn validate_task_at(
    path: Vec<PathSeg>,
    node: &YamlNode,
    catalog: &ModuleCatalog,
    tables: &SchemaTables,
    out: &mut Vec<SchemaViolation>,
) {
    let Some(pairs) = node.as_mapping() else {
        out.push(SchemaViolation::new(
            path,
            ViolationRule::NotAMapping,
            "task must be a mapping".to_string(),
            Some(node),
        ));
        return;
    };
    let mut block_found = false;
    let mut candidates: Vec<(String, &YamlNode)> = Vec::new();
    for (key, value) in pairs {
        let key_text = key.key_text().unwrap_or_default();
        let mut key_path = path.clone();
        key_path.push(PathSeg::Key(key_text.clone()));
        if BLOCK_KEYS.contains(&key_text.as_str()) {
            block_found = true;
            out.push(SchemaViolation::new(
                key_path,
                ViolationRule::BlockNotSupported,
                format!("`{key_text}` blocks are not supported"),
                Some(key),
            ));
            continue;
        }
        match tables.task_keyword_kind(&key_text) {
            Some(kind) => check_kind(key_path, &key_text, value, kind, out),
            None if crate::ansible::is_keyword(&key_text, &[]) => {
                // `with_*` prefix rule: accepted, any value shape.
            }
            None => candidates.push((key_text, value)),
        }
    }
    if block_found {
        return;
    }
    match candidates.as_slice() {
        [] => {
            out.push(SchemaViolation::new(
                path,
                ViolationRule::NoModuleKey,
                "task has no module key".to_string(),
                Some(node),
            ));
        }
        [(module_key, value)] => {
            validate_module_args(path, module_key, value, catalog, out);
        }
        _ => {
            let names: Vec<&str> = candidates.iter().map(|(k, _)| k.as_str()).collect();
            out.push(SchemaViolation::new(
                path,
                ViolationRule::AmbiguousModule,
                format!("multiple module candidates: {}", names.join(", ")),
                Some(node),
            ));
        }
    }
}

/// Module arguments may be a mapping, a free-form scalar, or null.
fn validate_module_args(
    path: Vec<PathSeg>,
    module_key: &str,
    value: &YamlNode,
    _catalog: &ModuleCatalog,
    out: &mut Vec<SchemaViolation>,
) {
    let mut arg_path = path;
    arg_path.push(PathSeg::Key(module_key.to_string()));
    match &value.kind {
        NodeKind::Mapping(_) => {}
        NodeKind::Scalar(_) => {
            if value.is_null() {
                return;
            }
            let text = value.resolved().unwrap().key_string();
            if crate::ansible::parse_free_form(&text).is_err() {
                out.push(SchemaViolation::new(
                    arg_path,
                    ViolationRule::MalformedFreeForm,
                    "unbalanced quote in free-form module arguments".to_string(),
                    Some(value),
                ));
            }
        }
        NodeKind::Sequence(_) => {
            out.push(SchemaViolation::new(
                arg_path,
                ViolationRule::KindMismatch,
                format!("`{module_key}` arguments must be a mapping or a free-form string"),
                Some(value),
            ));
        }
    }
}

fn check_kind(
    path: Vec<PathSeg>,
    key: &str,
    value: &YamlNode,
    kind: ValueKind,
    out: &mut Vec<SchemaViolation>,
) {
    use crate::yaml::ScalarValue;
    let ok = match kind {
        ValueKind::Any => true,
        ValueKind::Scalar => value.is_scalar(),
        ValueKind::Text => matches!(value.resolved(), Some(ScalarValue::Text(_))),
        ValueKind::Integer => matches!(value.resolved(), Some(ScalarValue::Int(_))),
        ValueKind::Boolean => matches!(value.resolved(), Some(ScalarValue::Bool(_))),
        ValueKind::Mapping => value.is_mapping(),
        ValueKind::ScalarOrList => value.is_scalar() || value.is_sequence(),
        ValueKind::ScalarOrTextList => {
            value.is_scalar()
                || value
                    .as_sequence()
                    .is_some_and(|items| items.iter().all(YamlNode::is_scalar))
        }
        ValueKind::TaskList => unreachable!("task lists handled by the caller"),
    };
    if !ok {
        out.push(SchemaViolation::new(
            path,
            ViolationRule::KindMismatch,
            format!("`{key}` must be {}", kind.expectation()),
            Some(value),
        ));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::yaml::parse_stream;

    fn ctx() -> (ModuleCatalog, SchemaTables) {
        (ModuleCatalog::builtin(), SchemaTables::builtin())
    }

    fn node(text: &str) -> YamlNode {
        parse_stream(text, "t").unwrap().roots.remove(0)
    }

    const FIG1: &str = "- hosts: servers\n  tasks:\n    - name: Install SSH server\n      ansible.builtin.apt:\n        name: openssh-server\n        state: present\n    - name: Start SSH server\n      ansible.builtin.service:\n        name: ssh\n        state: started\n";

    #[test]
    fn fig1_task_is_valid() {
        let (catalog, tables) = ctx();
        let playbook = node(FIG1);
        let task = &playbook.as_sequence().unwrap()[0]
            .get("tasks")
            .unwrap()
            .as_sequence()
            .unwrap()[0];
        assert!(validate_task(task, &catalog, &tables).is_empty());
    }

    #[test]
    fn fig1_playbook_is_valid() {
        let (catalog, tables) = ctx();
        let doc = parse_stream(FIG1, "t").unwrap();
        assert_eq!(validate_playbook(&doc, &catalog, &tables), Vec::new());
    }

    #[test]
    fn missing_module_key() {
        let (catalog, tables) = ctx();
        let violations = validate_task(&node("name: t\n"), &catalog, &tables);
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].rule, ViolationRule::NoModuleKey);
        assert_eq!(violations[0].path_string(), "[]");
    }

    #[test]
    fn kind_mismatch_on_retries() {
        let (catalog, tables) = ctx();
        let task = node("name: t\nansible.builtin.yum:\n  name: x\nretries: \"three\"\n");
        let violations = validate_task(&task, &catalog, &tables);
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].rule, ViolationRule::KindMismatch);
        assert_eq!(violations[0].path_string(), "[retries]");
    }

    #[test]
    fn root_must_be_sequence() {
        let (catalog, tables) = ctx();
        let doc = parse_stream("hosts: all\n", "t").unwrap();
        let violations = validate_playbook(&doc, &catalog, &tables);
        assert_eq!(violations[0].rule, ViolationRule::RootNotSequence);
    }

    #[test]
    fn missing_hosts_path() {
        let (catalog, tables) = ctx();
        let doc = parse_stream("- tasks:\n    - name: a\n      ping:\n", "t").unwrap();
        let violations = validate_playbook(&doc, &catalog, &tables);
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].rule, ViolationRule::MissingRequiredKey);
        assert_eq!(violations[0].path_string(), "[0, hosts]");
    }

    #[test]
    fn unknown_play_key() {
        let (catalog, tables) = ctx();
        let doc = parse_stream("- hosts: all\n  wibble: 1\n", "t").unwrap();
        let violations = validate_playbook(&doc, &catalog, &tables);
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].rule, ViolationRule::UnknownPlayKey);
        assert_eq!(violations[0].path_string(), "[0, wibble]");
    }

    #[test]
    fn nested_task_violation_path() {
        let (catalog, tables) = ctx();
        let doc = parse_stream(
            "- hosts: all\n  tasks:\n    - name: ok\n      ping:\n    - name: bad\n",
            "t",
        )
        .unwrap();
        let violations = validate_playbook(&doc, &catalog, &tables);
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].rule, ViolationRule::NoModuleKey);
        assert_eq!(violations[0].path_string(), "[0, tasks, 1]");
    }

    #[test]
    fn blocks_get_dedicated_violation() {
        let (catalog, tables) = ctx();
        let task = node("name: t\nblock:\n  - ping:\n");
        let violations = validate_task(&task, &catalog, &tables);
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].rule, ViolationRule::BlockNotSupported);
    }

    #[test]
    fn unknown_module_names_pass() {
        let (catalog, tables) = ctx();
        let task = node("name: t\ncommunity.general.ufw:\n  rule: allow\n");
        assert!(validate_task(&task, &catalog, &tables).is_empty());
    }

    #[test]
    fn with_prefix_lookups_accepted() {
        let (catalog, tables) = ctx();
        let task = node("name: t\nping:\nwith_sequence: start=1 end=3\n");
        assert!(validate_task(&task, &catalog, &tables).is_empty());
    }

    #[test]
    fn free_form_scalar_args_accepted() {
        let (catalog, tables) = ctx();
        let task = node("name: t\ncommand: echo hi\n");
        assert!(validate_task(&task, &catalog, &tables).is_empty());
        let task = node("name: t\ncommand: echo \"unbalanced\n");
        let violations = validate_task(&task, &catalog, &tables);
        assert_eq!(violations[0].rule, ViolationRule::MalformedFreeForm);
    }

    #[test]
    fn validation_stable_under_canonicalization() {
        let (catalog, tables) = ctx();
        let task = node("name: t\nyum: name=httpd\nbecome: yes\n");
        assert!(validate_task(&task, &catalog, &tables).is_empty());
        let canon = crate::yaml::serialize_node(&task);
        let again = node(&canon);
        assert!(validate_task(&again, &catalog, &tables).is_empty());
    }

    #[test]
    fn ambiguous_module_two_unknown_keys() {
        let (catalog, tables) = ctx();
        let task = node("name: t\nfoo: 1\nbar: 2\n");
        let violations = validate_task(&task, &catalog, &tables);
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].rule, ViolationRule::AmbiguousModule);
    }
}
