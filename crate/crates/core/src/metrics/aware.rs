//! Ansible Aware: recursive structural similarity between a target and a
//! predicted task or playbook.
//!
//! Scoring rules, applied from the root:
//! * mapping vs mapping scores as a task (or play body); sequence vs
//!   sequence scores as a playbook; any other kind pairing scores 0
//! * a task's score is the mean of its pair scores over the target's
//!   top-level pairs, skipping `name`; predicted keys absent from the
//!   target are ignored, target keys missing from the prediction score 0
//! * a pair's score is the average of its key score and value score
//! * module keys match after FQCN resolution; distinct members of one
//!   equivalence class get the partial key score and their arguments are
//!   still compared as the value
//! * scalar values score on resolved equality; free-form `k=v` strings
//!   normalize to mappings; mappings and sequences recurse, sequences
//!   pairing items positionally

use crate::ansible::{parse_free_form, ModuleCatalog};
use crate::yaml::{NodeKind, YamlNode};

/// Play keys whose sequence items are tasks and score with task semantics.
const TASK_LIST_KEYS: [&str; 4] = ["tasks", "pre_tasks", "post_tasks", "handlers"];

/// Score `prediction` against `target`; both already parsed. Returns a
/// fraction in [0, 1].
pub fn ansible_aware(target: &YamlNode, prediction: &YamlNode, catalog: &ModuleCatalog) -> f64 {
    match (&target.kind, &prediction.kind) {
        (NodeKind::Mapping(t), NodeKind::Mapping(p)) => task_score(t, p, catalog),
        (NodeKind::Sequence(t), NodeKind::Sequence(p)) => playbook_score(t, p, catalog),
        _ => 0.0,
    }
}

/// Positional pairing of plays; each play scores like a task mapping.
fn playbook_score(targets: &[YamlNode], predictions: &[YamlNode], catalog: &ModuleCatalog) -> f64 {
    if targets.is_empty() {
        return 1.0;
    }
    let sum: f64 = targets
        .iter()
        .enumerate()
        .map(|(i, t)| match (t.as_mapping(), predictions.get(i)) {
            (Some(tp), Some(p)) => match p.as_mapping() {
                Some(pp) => task_score(tp, pp, catalog),
                None => 0.0,
            },
            (None, Some(p)) => value_score(t, p, catalog),
            (_, None) => 0.0,
        })
        .sum();
    sum / targets.len() as f64
}

/// Top-level mapping score with module-aware key matching and `name`
/// excluded. Also used for play bodies, where no key resolves through the
/// catalog and matching degenerates to exact names.
fn task_score(
    target: &[(YamlNode, YamlNode)],
    prediction: &[(YamlNode, YamlNode)],
    catalog: &ModuleCatalog,
) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for (key, value) in target {
        let key_text = key.key_text().unwrap_or_default();
        if key_text == "name" {
            continue;
        }
        count += 1;
        sum += top_pair_score(&key_text, value, prediction, catalog);
    }
    if count == 0 {
        return 1.0;
    }
    sum / count as f64
}

fn top_pair_score(
    target_key: &str,
    target_value: &YamlNode,
    prediction: &[(YamlNode, YamlNode)],
    catalog: &ModuleCatalog,
) -> f64 {
    let target_fqcn = catalog.resolve_fqcn(target_key);
    // Exact key match after FQCN resolution.
    let exact = prediction.iter().find(|(pk, _)| {
        pk.key_text()
            .is_some_and(|k| catalog.resolve_fqcn(&k) == target_fqcn)
    });
    if let Some((_, pred_value)) = exact {
        let value = top_value_score(target_key, target_value, pred_value, catalog);
        return (1.0 + value) / 2.0;
    }
    // Equivalent-module match: partial key score, arguments still compared.
    let equivalent = prediction.iter().find_map(|(pk, pv)| {
        let k = pk.key_text()?;
        let similarity = catalog.module_similarity(target_fqcn, catalog.resolve_fqcn(&k));
        (similarity > 0.0).then_some((similarity, pv))
    });
    if let Some((key_score, pred_value)) = equivalent {
        let value = top_value_score(target_key, target_value, pred_value, catalog);
        return (key_score + value) / 2.0;
    }
    0.0
}

/// Value score for a top-level pair. Task-list values score their items
/// with task semantics; everything else recurses generically.
fn top_value_score(
    target_key: &str,
    target: &YamlNode,
    prediction: &YamlNode,
    catalog: &ModuleCatalog,
) -> f64 {
    if TASK_LIST_KEYS.contains(&target_key) {
        if let (NodeKind::Sequence(t), NodeKind::Sequence(p)) = (&target.kind, &prediction.kind) {
            if t.is_empty() {
                return 1.0;
            }
            let sum: f64 = t
                .iter()
                .enumerate()
                .map(|(i, item)| match (item.as_mapping(), p.get(i)) {
                    (Some(ti), Some(pi)) => match pi.as_mapping() {
                        Some(pm) => task_score(ti, pm, catalog),
                        None => 0.0,
                    },
                    (None, Some(pi)) => value_score(item, pi, catalog),
                    (_, None) => 0.0,
                })
                .sum();
            return sum / t.len() as f64;
        }
    }
    value_score(target, prediction, catalog)
}

/// Generic recursive value score (rule 5).
fn value_score(target: &YamlNode, prediction: &YamlNode, catalog: &ModuleCatalog) -> f64 {
    match (&target.kind, &prediction.kind) {
        (NodeKind::Scalar(_), NodeKind::Scalar(_)) => {
            if target == prediction {
                return 1.0;
            }
            // Two differing free-form strings still normalize to mappings.
            match (free_form_mapping(target, true), free_form_mapping(prediction, true)) {
                (Some(t), Some(p)) => {
                    mapping_score(t.as_mapping().unwrap(), p.as_mapping().unwrap(), catalog)
                }
                _ => 0.0,
            }
        }
        (NodeKind::Mapping(t), NodeKind::Mapping(p)) => mapping_score(t, p, catalog),
        (NodeKind::Sequence(t), NodeKind::Sequence(p)) => {
            if t.is_empty() {
                return 1.0;
            }
            let sum: f64 = t
                .iter()
                .enumerate()
                .map(|(i, item)| match p.get(i) {
                    Some(pi) => value_score(item, pi, catalog),
                    None => 0.0,
                })
                .sum();
            sum / t.len() as f64
        }
        (NodeKind::Mapping(t), NodeKind::Scalar(_)) => match free_form_mapping(prediction, false) {
            Some(p) => mapping_score(t, p.as_mapping().unwrap(), catalog),
            None => 0.0,
        },
        (NodeKind::Scalar(_), NodeKind::Mapping(p)) => match free_form_mapping(target, false) {
            Some(t) => mapping_score(t.as_mapping().unwrap(), p, catalog),
            None => 0.0,
        },
        _ => 0.0,
    }
}

/// Nested mapping score: exact key names, `name` included, value recursion.
fn mapping_score(
    target: &[(YamlNode, YamlNode)],
    prediction: &[(YamlNode, YamlNode)],
    catalog: &ModuleCatalog,
) -> f64 {
    if target.is_empty() {
        return 1.0;
    }
    let sum: f64 = target
        .iter()
        .map(|(key, value)| {
            let found = prediction.iter().find(|(pk, _)| pk == key);
            match found {
                Some((_, pred_value)) => (1.0 + value_score(value, pred_value, catalog)) / 2.0,
                None => 0.0,
            }
        })
        .sum();
    sum / target.len() as f64
}

/// Normalize a free-form scalar into a parameter mapping. When
/// `require_assignment` is set, plain words alone (no `k=v` tokens) do not
/// convert, so ordinary text scalars keep scalar equality semantics.
fn free_form_mapping(node: &YamlNode, require_assignment: bool) -> Option<YamlNode> {
    let text = match node.resolved()? {
        crate::yaml::ScalarValue::Text(t) => t,
        _ => return None,
    };
    let mapping = parse_free_form(&text).ok()?;
    let pairs = mapping.as_mapping()?;
    if pairs.is_empty() {
        return None;
    }
    if require_assignment
        && !pairs
            .iter()
            .any(|(k, _)| k.key_text().as_deref() != Some(crate::ansible::RAW_PARAMS_KEY))
    {
        return None;
    }
    Some(mapping)
}
