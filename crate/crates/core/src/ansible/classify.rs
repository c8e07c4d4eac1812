//! Lifting parsed YAML mappings into Ansible semantics: split a task into
//! name / module / keywords, resolve the module to its FQCN, and normalize
//! free-form and `action`-style invocations.

use thiserror::Error;

use crate::ansible::catalog::ModuleCatalog;
use crate::ansible::freeform::{parse_free_form, FreeFormError};
use crate::yaml::{NodeKind, YamlNode};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("task is not a mapping")]
    NotAMapping,
    #[error("task has no module key")]
    NoModuleKey,
    #[error("task has multiple module candidates: {0:?}")]
    AmbiguousModule(Vec<String>),
    #[error("task uses block/rescue/always, which is not supported")]
    BlockTask,
    #[error("malformed module arguments: {0}")]
    BadArgs(#[from] FreeFormError),
    #[error("`{0}` form has no module name")]
    EmptyAction(String),
    #[error("play is not a mapping")]
    PlayNotAMapping,
    #[error("play `tasks` is not a sequence")]
    TasksNotASequence,
}

/// The module invocation of a task after name resolution and free-form
/// normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleInvocation {
    pub raw_name: String,
    pub fqcn: String,
    /// Mapping node after normalization; an empty mapping when the module
    /// takes no arguments.
    pub params: YamlNode,
}

/// One classified task: `name`, module invocation, and execution keywords in
/// source order.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsibleTask {
    pub name: Option<String>,
    pub module: ModuleInvocation,
    pub keywords: Vec<(String, YamlNode)>,
    pub source: YamlNode,
}

/// One classified play: `name`, the non-task play keys in source order, and
/// its classified tasks.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsiblePlay {
    pub name: Option<String>,
    pub play_keys: Vec<(String, YamlNode)>,
    pub tasks: Vec<AnsibleTask>,
}

/// Keys Ansible treats as logical task groups; out of scope here and
/// rejected both in classification and schema validation.
pub const BLOCK_KEYS: [&str; 3] = ["block", "rescue", "always"];

/// Legacy invocation forms normalized into module/params shape.
const ACTION_KEYS: [&str; 2] = ["action", "local_action"];

/// Split a task mapping into name / module / keywords.
///
/// The module key is the unique key that is neither `name` nor a known
/// keyword; zero candidates is `NoModuleKey`, more than one is
/// `AmbiguousModule` (unknown keys are not silently treated as keywords,
/// mirroring how Ansible itself rejects them).
pub fn classify_task(
    node: &YamlNode,
    catalog: &ModuleCatalog,
    keyword_list: &[String],
) -> Result<AnsibleTask, ClassifyError> {
    let pairs = node.as_mapping().ok_or(ClassifyError::NotAMapping)?;

    let mut name = None;
    let mut keywords = Vec::new();
    let mut candidates: Vec<(String, &YamlNode)> = Vec::new();
    for (key, value) in pairs {
        let Some(key_text) = key.key_text() else {
            return Err(ClassifyError::NotAMapping);
        };
        if BLOCK_KEYS.contains(&key_text.as_str()) {
            return Err(ClassifyError::BlockTask);
        }
        if key_text == "name" {
            name = value.resolved().map(|v| v.key_string());
        } else if is_keyword(&key_text, keyword_list) {
            keywords.push((key_text, value.clone()));
        } else {
            candidates.push((key_text, value));
        }
    }

    let (raw_name, value) = match candidates.len() {
        0 => return Err(ClassifyError::NoModuleKey),
        1 => candidates.pop().unwrap(),
        _ => {
            return Err(ClassifyError::AmbiguousModule(
                candidates.into_iter().map(|(k, _)| k).collect(),
            ))
        }
    };

    let module = if ACTION_KEYS.contains(&raw_name.as_str()) {
        normalize_action(&raw_name, value, catalog)?
    } else {
        ModuleInvocation {
            fqcn: catalog.resolve_fqcn(&raw_name).to_string(),
            raw_name,
            params: normalize_params(value)?,
        }
    };

    Ok(AnsibleTask { name, module, keywords, source: node.clone() })
}

/// `with_*` lookups beyond the enumerated list are accepted by prefix.
pub fn is_keyword(key: &str, keyword_list: &[String]) -> bool {
    if keyword_list.iter().any(|k| k == key) {
        return true;
    }
    key.strip_prefix("with_")
        .is_some_and(|rest| !rest.is_empty() && rest.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'))
}

/// Module params: mappings pass through, scalars go through free-form
/// normalization, null becomes an empty mapping.
fn normalize_params(value: &YamlNode) -> Result<YamlNode, ClassifyError> {
    match &value.kind {
        NodeKind::Mapping(_) => Ok(value.clone()),
        NodeKind::Scalar(_) => {
            if value.is_null() {
                return Ok(YamlNode::new_mapping(Vec::new()));
            }
            let text = value.resolved().unwrap().key_string();
            Ok(parse_free_form(&text)?)
        }
        NodeKind::Sequence(_) => Ok(value.clone()),
    }
}

/// `action: copy src=a dest=b` or `action: {module: copy, src: a}`.
fn normalize_action(
    form: &str,
    value: &YamlNode,
    catalog: &ModuleCatalog,
) -> Result<ModuleInvocation, ClassifyError> {
    match &value.kind {
        NodeKind::Scalar(_) => {
            let text = value.resolved().unwrap().key_string();
            let mut split = text.splitn(2, char::is_whitespace);
            let raw_name = split.next().unwrap_or_default().to_string();
            if raw_name.is_empty() {
                return Err(ClassifyError::EmptyAction(form.to_string()));
            }
            let rest = split.next().unwrap_or_default();
            Ok(ModuleInvocation {
                fqcn: catalog.resolve_fqcn(&raw_name).to_string(),
                raw_name,
                params: parse_free_form(rest)?,
            })
        }
        NodeKind::Mapping(pairs) => {
            let mut raw_name = None;
            let mut params = Vec::new();
            for (key, val) in pairs {
                let key_text = key.key_text().unwrap_or_default();
                if key_text == "module" {
                    raw_name = val.resolved().map(|v| v.key_string());
                } else {
                    params.push((key.clone(), val.clone()));
                }
            }
            let raw_name =
                raw_name.ok_or_else(|| ClassifyError::EmptyAction(form.to_string()))?;
            Ok(ModuleInvocation {
                fqcn: catalog.resolve_fqcn(&raw_name).to_string(),
                raw_name,
                params: YamlNode::new_mapping(params),
            })
        }
        NodeKind::Sequence(_) => Err(ClassifyError::EmptyAction(form.to_string())),
    }
}

/// Classify a play mapping: `name`, other play keys, and the tasks list.
pub fn classify_play(
    node: &YamlNode,
    catalog: &ModuleCatalog,
    keyword_list: &[String],
) -> Result<AnsiblePlay, ClassifyError> {
    let pairs = node.as_mapping().ok_or(ClassifyError::PlayNotAMapping)?;
    let mut name = None;
    let mut play_keys = Vec::new();
    let mut tasks = Vec::new();
    for (key, value) in pairs {
        let key_text = key.key_text().unwrap_or_default();
        match key_text.as_str() {
            "name" => name = value.resolved().map(|v| v.key_string()),
            "tasks" => {
                let items =
                    value.as_sequence().ok_or(ClassifyError::TasksNotASequence)?;
                for item in items {
                    tasks.push(classify_task(item, catalog, keyword_list)?);
                }
            }
            _ => play_keys.push((key_text, value.clone())),
        }
    }
    Ok(AnsiblePlay { name, play_keys, tasks })
}
