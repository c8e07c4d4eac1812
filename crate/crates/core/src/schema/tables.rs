//! Versioned schema tables: allowed task keywords, allowed play keys, their
//! value-kind constraints, and required play keys. Shipped as an embedded
//! data file in the catalog-overlay format family so users can tighten or
//! loosen the sets; reported Schema Correct scores are only comparable
//! within one schema version.

use thiserror::Error;

use crate::yaml::{parse_stream, NodeKind, ParseError, YamlNode};

const EMBEDDED_SCHEMA: &str = include_str!("../../data/schema.yaml");

#[derive(Debug, Error)]
pub enum SchemaLoadError {
    #[error("schema parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("schema file {0}: {1}")]
    Invalid(String, String),
}

/// Value-shape constraint attached to a key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Any,
    Scalar,
    Text,
    Integer,
    Boolean,
    Mapping,
    ScalarOrList,
    ScalarOrTextList,
    TaskList,
}

impl ValueKind {
    fn from_str(s: &str) -> Option<Self> {
        Some(match s {
            "any" => ValueKind::Any,
            "scalar" => ValueKind::Scalar,
            "text" => ValueKind::Text,
            "integer" => ValueKind::Integer,
            "boolean" => ValueKind::Boolean,
            "mapping" => ValueKind::Mapping,
            "scalar_or_list" => ValueKind::ScalarOrList,
            "scalar_or_text_list" => ValueKind::ScalarOrTextList,
            "task_list" => ValueKind::TaskList,
            _ => return None,
        })
    }

    /// Human-readable expectation for violation messages.
    pub fn expectation(&self) -> &'static str {
        match self {
            ValueKind::Any => "any value",
            ValueKind::Scalar => "a scalar",
            ValueKind::Text => "a text scalar",
            ValueKind::Integer => "an integer",
            ValueKind::Boolean => "a boolean",
            ValueKind::Mapping => "a mapping",
            ValueKind::ScalarOrList => "a scalar or a list",
            ValueKind::ScalarOrTextList => "a scalar or a list of scalars",
            ValueKind::TaskList => "a list of task mappings",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SchemaTables {
    version: String,
    task_keywords: Vec<(String, ValueKind)>,
    play_keys: Vec<(String, ValueKind)>,
    play_required: Vec<String>,
}

impl SchemaTables {
    pub fn builtin() -> Self {
        Self::from_yaml(EMBEDDED_SCHEMA, "<embedded schema>")
            .expect("embedded schema is valid")
    }

    pub fn from_yaml(text: &str, source_name: &str) -> Result<Self, SchemaLoadError> {
        let invalid =
            |msg: String| SchemaLoadError::Invalid(source_name.to_string(), msg);
        let doc = parse_stream(text, source_name)?;
        let root = doc
            .sole_root()
            .ok_or_else(|| invalid("expected a single mapping document".into()))?;
        let mut version = String::from("0");
        let mut task_keywords = Vec::new();
        let mut play_keys = Vec::new();
        let mut play_required = Vec::new();
        let pairs = root
            .as_mapping()
            .ok_or_else(|| invalid("expected a mapping at the root".into()))?;
        for (key, value) in pairs {
            match key.key_text().as_deref() {
                Some("version") => {
                    version = value
                        .key_text()
                        .ok_or_else(|| invalid("`version` must be a scalar".into()))?;
                }
                Some("task_keywords") => {
                    task_keywords = load_kind_table(value, source_name)?;
                }
                Some("play_keys") => {
                    play_keys = load_kind_table(value, source_name)?;
                }
                Some("play_required") => {
                    let items = value.as_sequence().ok_or_else(|| {
                        invalid("`play_required` must be a list".into())
                    })?;
                    for item in items {
                        play_required.push(item.key_text().ok_or_else(|| {
                            invalid("`play_required` entries must be scalars".into())
                        })?);
                    }
                }
                Some(other) => {
                    return Err(invalid(format!("unknown schema table `{other}`")))
                }
                None => return Err(invalid("keys must be scalars".into())),
            }
        }
        Ok(SchemaTables { version, task_keywords, play_keys, play_required })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn task_keyword_kind(&self, key: &str) -> Option<ValueKind> {
        self.task_keywords
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, kind)| *kind)
    }

    pub fn play_key_kind(&self, key: &str) -> Option<ValueKind> {
        self.play_keys
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, kind)| *kind)
    }

    pub fn play_required(&self) -> &[String] {
        &self.play_required
    }

    /// The allowed task keyword names, for classification.
    pub fn task_keyword_names(&self) -> Vec<String> {
        self.task_keywords.iter().map(|(k, _)| k.clone()).collect()
    }
}

fn load_kind_table(
    node: &YamlNode,
    source_name: &str,
) -> Result<Vec<(String, ValueKind)>, SchemaLoadError> {
    let pairs = node.as_mapping().ok_or_else(|| {
        SchemaLoadError::Invalid(source_name.to_string(), "kind table must be a mapping".into())
    })?;
    let mut table = Vec::with_capacity(pairs.len());
    for (key, value) in pairs {
        let name = key.key_text().ok_or_else(|| {
            SchemaLoadError::Invalid(source_name.to_string(), "keys must be scalars".into())
        })?;
        let kind_name = match &value.kind {
            NodeKind::Scalar(_) => value.key_text().unwrap_or_default(),
            _ => {
                return Err(SchemaLoadError::Invalid(
                    source_name.to_string(),
                    format!("kind for `{name}` must be a scalar"),
                ))
            }
        };
        let kind = ValueKind::from_str(&kind_name).ok_or_else(|| {
            SchemaLoadError::Invalid(
                source_name.to_string(),
                format!("unknown value kind `{kind_name}` for `{name}`"),
            )
        })?;
        table.push((name, kind));
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_tables_load() {
        let tables = SchemaTables::builtin();
        assert_eq!(tables.version(), "1");
        assert_eq!(tables.task_keyword_kind("retries"), Some(ValueKind::Integer));
        assert_eq!(tables.task_keyword_kind("become"), Some(ValueKind::Boolean));
        assert_eq!(tables.task_keyword_kind("vars"), Some(ValueKind::Mapping));
        assert_eq!(tables.task_keyword_kind("nonsense"), None);
        assert_eq!(tables.play_key_kind("tasks"), Some(ValueKind::TaskList));
        assert_eq!(tables.play_required(), ["hosts"]);
    }

    #[test]
    fn keyword_list_matches_contract() {
        let names = SchemaTables::builtin().task_keyword_names();
        for required in [
            "name", "when", "loop", "with_items", "with_dict", "with_fileglob", "register",
            "become", "become_user", "become_method", "ignore_errors", "delegate_to",
            "run_once", "vars", "environment", "tags", "notify", "changed_when",
            "failed_when", "args", "until", "retries", "delay", "no_log", "check_mode",
            "any_errors_fatal", "throttle",
        ] {
            assert!(names.iter().any(|n| n == required), "missing {required}");
        }
    }

    #[test]
    fn bad_kind_rejected() {
        let err = SchemaTables::from_yaml("task_keywords:\n  when: wibble\n", "t").unwrap_err();
        assert!(matches!(err, SchemaLoadError::Invalid(..)));
    }
}
