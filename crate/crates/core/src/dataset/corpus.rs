//! Corpus ingestion: walk a directory of `.yml`/`.yaml` files, parse and
//! normalize them, and classify each file as a playbook, a role task list,
//! or other.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use walkdir::WalkDir;

use crate::ansible::ModuleCatalog;
use crate::schema::{validate_playbook, validate_task, SchemaTables};
use crate::yaml::{parse_stream, serialize_canonical, NodeKind, YamlDocument, YamlNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FileKind {
    Playbook,
    RoleTasks,
    Other,
}

impl fmt::Display for FileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            FileKind::Playbook => "playbook",
            FileKind::RoleTasks => "role_tasks",
            FileKind::Other => "other",
        };
        f.write_str(name)
    }
}

/// One ingested corpus file in normalized canonical form.
#[derive(Debug, Clone)]
pub struct CorpusFile {
    /// Path relative to the corpus root, `/`-separated.
    pub path: String,
    pub file_kind: FileKind,
    pub canonical_text: String,
    pub content_hash: String,
    /// Normalized root node (single-document files only).
    pub root: Option<YamlNode>,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read corpus directory {0}: {1}")]
    Walk(String, walkdir::Error),
    #[error("cannot read {0}: {1}")]
    Io(String, std::io::Error),
}

/// Ingestion counters for the dataset manifest.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, PartialEq, Eq)]
pub struct IngestStats {
    pub scanned: usize,
    pub parse_failures: usize,
    pub playbooks: usize,
    pub role_tasks: usize,
    pub other: usize,
}

/// Classify a parsed document per the corpus rules: a playbook is a
/// sequence of play mappings that each contain `hosts` and that validate;
/// a role task file is a sequence of valid task mappings without `hosts`.
/// Everything else (including files failing schema validation) is `Other`.
pub fn classify_file(
    doc: &YamlDocument,
    catalog: &ModuleCatalog,
    tables: &SchemaTables,
) -> FileKind {
    if doc.roots.len() != 1 {
        return FileKind::Other;
    }
    let root = &doc.roots[0];
    let Some(items) = root.as_sequence() else {
        return FileKind::Other;
    };
    if items.is_empty() || !items.iter().all(YamlNode::is_mapping) {
        return FileKind::Other;
    }
    let with_hosts = items.iter().filter(|n| n.get("hosts").is_some()).count();
    if with_hosts == items.len() {
        if validate_playbook(doc, catalog, tables).is_empty() {
            FileKind::Playbook
        } else {
            FileKind::Other
        }
    } else if with_hosts == 0 {
        let all_valid = items
            .iter()
            .all(|task| validate_task(task, catalog, tables).is_empty());
        if all_valid {
            FileKind::RoleTasks
        } else {
            FileKind::Other
        }
    } else {
        FileKind::Other
    }
}

/// Normalization applied before canonicalization: `name` keys are hoisted to
/// the front of task and play mappings (the documented Ansible style, and
/// what makes name-line completion splits exact), and a play's `tasks` key
/// moves to the end so a playbook context can be extended with one more
/// task by appending lines.
pub fn normalize_doc(doc: &YamlDocument) -> YamlDocument {
    let roots = doc
        .roots
        .iter()
        .map(|root| match &root.kind {
            NodeKind::Sequence(items) => {
                let normalized = items.iter().map(normalize_root_item).collect();
                YamlNode::sequence(normalized, root.span)
            }
            _ => root.clone(),
        })
        .collect();
    YamlDocument::new(roots, doc.source_name.clone())
}

const TASK_LIST_KEYS: [&str; 4] = ["tasks", "pre_tasks", "post_tasks", "handlers"];

fn normalize_root_item(item: &YamlNode) -> YamlNode {
    let Some(pairs) = item.as_mapping() else {
        return item.clone();
    };
    let is_play = item.get("hosts").is_some();
    let mut normalized: Vec<(YamlNode, YamlNode)> = pairs
        .iter()
        .map(|(k, v)| {
            let key_text = k.key_text().unwrap_or_default();
            if TASK_LIST_KEYS.contains(&key_text.as_str()) {
                if let Some(tasks) = v.as_sequence() {
                    let hoisted = tasks.iter().map(|t| hoist_name(t.clone())).collect();
                    return (k.clone(), YamlNode::sequence(hoisted, v.span));
                }
            }
            (k.clone(), v.clone())
        })
        .collect();
    if is_play {
        if let Some(pos) = normalized
            .iter()
            .position(|(k, _)| k.key_text().as_deref() == Some("tasks"))
        {
            let tasks_pair = normalized.remove(pos);
            normalized.push(tasks_pair);
        }
    }
    hoist_name(YamlNode::mapping(normalized, item.span))
}

fn hoist_name(node: YamlNode) -> YamlNode {
    let span = node.span;
    let NodeKind::Mapping(mut pairs) = node.kind else {
        return node;
    };
    if let Some(pos) = pairs
        .iter()
        .position(|(k, _)| k.key_text().as_deref() == Some("name"))
    {
        if pos > 0 {
            let name_pair = pairs.remove(pos);
            pairs.insert(0, name_pair);
        }
    }
    YamlNode::mapping(pairs, span)
}

pub fn content_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Walk `root` and ingest every `.yml`/`.yaml` file in deterministic
/// relative-path order. Unparseable files are skipped with a log line.
pub fn ingest_corpus(
    root: &Path,
    catalog: &ModuleCatalog,
    tables: &SchemaTables,
) -> Result<(Vec<CorpusFile>, IngestStats), IngestError> {
    let mut paths = Vec::new();
    for entry in WalkDir::new(root).follow_links(false) {
        let entry = entry.map_err(|e| IngestError::Walk(root.display().to_string(), e))?;
        if !entry.file_type().is_file() {
            continue;
        }
        let ext = entry.path().extension().and_then(|e| e.to_str());
        if !matches!(ext, Some("yml") | Some("yaml")) {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(root)
            .unwrap_or(entry.path())
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        paths.push((rel, entry.path().to_path_buf()));
    }
    paths.sort();

    let mut stats = IngestStats::default();
    let mut files = Vec::with_capacity(paths.len());
    for (rel, abs) in paths {
        stats.scanned += 1;
        let text = std::fs::read_to_string(&abs).map_err(|e| IngestError::Io(rel.clone(), e))?;
        let doc = match parse_stream(&text, &rel) {
            Ok(doc) => doc,
            Err(err) => {
                log::info!("skipping {rel}: {err}");
                stats.parse_failures += 1;
                continue;
            }
        };
        let normalized = normalize_doc(&doc);
        let file_kind = classify_file(&normalized, catalog, tables);
        match file_kind {
            FileKind::Playbook => stats.playbooks += 1,
            FileKind::RoleTasks => stats.role_tasks += 1,
            FileKind::Other => {
                stats.other += 1;
                log::debug!("classified {rel} as other");
            }
        }
        let canonical_text = serialize_canonical(&normalized);
        let content_hash = content_hash(&canonical_text);
        let root = normalized.sole_root().cloned();
        files.push(CorpusFile { path: rel, file_kind, canonical_text, content_hash, root });
    }
    Ok((files, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> (ModuleCatalog, SchemaTables) {
        (ModuleCatalog::builtin(), SchemaTables::builtin())
    }

    fn classify(text: &str) -> FileKind {
        let (catalog, tables) = ctx();
        let doc = normalize_doc(&parse_stream(text, "t").unwrap());
        classify_file(&doc, &catalog, &tables)
    }

    #[test]
    fn fig1_playbook_classifies() {
        let text = "---\n- hosts: servers\n  tasks:\n    - name: Install SSH server\n      ansible.builtin.apt:\n        name: openssh-server\n        state: present\n";
        assert_eq!(classify(text), FileKind::Playbook);
    }

    #[test]
    fn bare_tasks_are_role_tasks() {
        let text = "- name: a\n  ping:\n- name: b\n  debug:\n    msg: hi\n";
        assert_eq!(classify(text), FileKind::RoleTasks);
    }

    #[test]
    fn mapping_root_is_other() {
        assert_eq!(classify("key: value\n"), FileKind::Other);
    }

    #[test]
    fn invalid_schema_is_other() {
        // Second task has no module key.
        let text = "- name: a\n  ping:\n- name: b\n";
        assert_eq!(classify(text), FileKind::Other);
        // Play without hosts mixed with plays with hosts.
        let text = "- hosts: all\n  tasks: []\n- tasks: []\n";
        assert_eq!(classify(text), FileKind::Other);
    }

    #[test]
    fn multi_document_is_other() {
        assert_eq!(classify("---\n- name: a\n  ping:\n---\n- name: b\n  ping:\n"), FileKind::Other);
    }

    #[test]
    fn normalization_hoists_name_and_sinks_tasks() {
        let text = "- tasks:\n    - ping:\n      name: a\n  hosts: all\n  name: play\n";
        let doc = normalize_doc(&parse_stream(text, "t").unwrap());
        let out = serialize_canonical(&doc);
        assert_eq!(
            out,
            "---\n- name: play\n  hosts: all\n  tasks:\n    - name: a\n      ping: null\n"
        );
    }

    #[test]
    fn ingest_walks_sorted_and_skips_bad_files(){
        let (catalog, tables) = ctx();
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir_all(dir.path().join("roles/x/tasks")).unwrap();
        std::fs::write(dir.path().join("b.yml"), "- name: a\n  ping:\n").unwrap();
        std::fs::write(dir.path().join("a.yaml"), "- hosts: all\n  tasks: []\n").unwrap();
        std::fs::write(dir.path().join("roles/x/tasks/main.yml"), "a: [broken\n").unwrap();
        std::fs::write(dir.path().join("notes.txt"), "not yaml\n").unwrap();
        let (files, stats) = ingest_corpus(dir.path(), &catalog, &tables).unwrap();
        assert_eq!(stats.scanned, 3);
        assert_eq!(stats.parse_failures, 1);
        assert_eq!(stats.playbooks, 1);
        assert_eq!(stats.role_tasks, 1);
        let paths: Vec<&str> = files.iter().map(|f| f.path.as_str()).collect();
        assert_eq!(paths, ["a.yaml", "b.yml"]);
    }
}
