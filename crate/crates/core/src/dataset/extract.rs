//! Sample extraction. Targets split at the `- name:` line: the sample input
//! ends with that line (carrying the natural-language prompt) and the target
//! is the remainder of the snippet, so a completion model reproduces the
//! body.
//!
//! Extraction rules:
//! * playbooks where every play has at most two tasks: one play-generation
//!   sample per play with at least one named task
//! * plays with three or more tasks: one next-task sample per task index
//!   i >= 2, with the play truncated to the preceding tasks as context
//! * role task files: the first named task becomes a no-context sample;
//!   every later named task becomes a next-task sample with all preceding
//!   tasks as context
//! * unnamed tasks are skipped as targets but stay in contexts unchanged

use sha2::{Digest, Sha256};

use crate::dataset::corpus::{CorpusFile, FileKind};
use crate::dataset::types::{GenerationType, Sample};
use crate::yaml::{serialize_canonical, serialize_node, NodeKind, YamlDocument, YamlNode};

/// Column where the `- name:` line sits for each generation type: tasks and
/// plays complete at the margin; playbook-context tasks complete inside the
/// play's `tasks` list.
fn name_line_indent(generation_type: GenerationType) -> usize {
    match generation_type {
        GenerationType::PbNlToT => 4,
        _ => 0,
    }
}

/// Build the model input: context (canonical, possibly empty) followed by
/// the name line at the indentation where the next task or play begins.
pub fn formulate_input(context: &str, prompt: &str, generation_type: GenerationType) -> String {
    let indent = " ".repeat(name_line_indent(generation_type));
    format!("{context}{indent}- name: {prompt}\n")
}

/// Prompt for a play: the play name and its tasks' names joined with ` & `,
/// skipping missing names. Returns `None` when no component exists.
pub fn formulate_play_prompt(play: &YamlNode) -> Option<String> {
    let mut parts: Vec<String> = Vec::new();
    if let Some(name) = name_of(play) {
        parts.push(name);
    }
    for task in play_tasks(play) {
        if let Some(name) = name_of(task) {
            parts.push(name);
        }
    }
    if parts.is_empty() {
        None
    } else {
        Some(parts.join(" & "))
    }
}

fn name_of(node: &YamlNode) -> Option<String> {
    let value = node.get("name")?;
    match value.resolved()? {
        crate::yaml::ScalarValue::Null => None,
        v => Some(v.key_string()),
    }
}

fn play_tasks(play: &YamlNode) -> &[YamlNode] {
    play.get("tasks")
        .and_then(YamlNode::as_sequence)
        .unwrap_or(&[])
}

/// Serialize `node` as a sequence item at the given indent:
/// `- first-line\n  rest...`.
fn sequence_item_text(node: &YamlNode, indent: usize) -> String {
    let item = YamlNode::new_sequence(vec![node.clone()]);
    reindent(&serialize_node(&item), indent)
}

fn reindent(text: &str, indent: usize) -> String {
    if indent == 0 {
        return text.to_string();
    }
    let pad = " ".repeat(indent);
    let mut out = String::with_capacity(text.len() + indent * 8);
    for line in text.split_inclusive('\n') {
        if line != "\n" {
            out.push_str(&pad);
        }
        out.push_str(line);
    }
    out
}

/// Drop the leading `- name: ...` line of a named item, leaving the body
/// that follows the name line in the completion format.
fn body_after_name_line(item_text: &str, named: bool) -> String {
    if named {
        match item_text.split_once('\n') {
            Some((_, rest)) => rest.to_string(),
            None => String::new(),
        }
    } else {
        // Unnamed play: turn the `- ` introducer into mapping continuation.
        let dash = item_text.find('-').expect("sequence item starts with a dash");
        let mut out = item_text.to_string();
        out.replace_range(dash..dash + 1, " ");
        out
    }
}

/// Canonical single-document context holding the given root items.
fn context_document(items: Vec<YamlNode>) -> String {
    let doc = YamlDocument::new(vec![YamlNode::new_sequence(items)], "<context>");
    serialize_canonical(&doc)
}

/// A play equal to `play` with its tasks truncated to the first `count`.
fn play_with_task_prefix(play: &YamlNode, count: usize) -> YamlNode {
    let pairs = play
        .as_mapping()
        .expect("plays are mappings")
        .iter()
        .map(|(k, v)| {
            if k.key_text().as_deref() == Some("tasks") {
                if let NodeKind::Sequence(tasks) = &v.kind {
                    let prefix = tasks.iter().take(count).cloned().collect();
                    return (k.clone(), YamlNode::sequence(prefix, v.span));
                }
            }
            (k.clone(), v.clone())
        })
        .collect();
    YamlNode::mapping(pairs, play.span)
}

fn sample_id(context: &str, prompt: &str, target: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(context.as_bytes());
    hasher.update([0x1f]);
    hasher.update(prompt.as_bytes());
    hasher.update([0x1f]);
    hasher.update(target.as_bytes());
    hex::encode(hasher.finalize())
}

fn make_sample(
    file: &CorpusFile,
    index: &mut usize,
    generation_type: GenerationType,
    context: String,
    prompt: String,
    target: String,
) -> Sample {
    let input_text = formulate_input(&context, &prompt, generation_type);
    let sample = Sample {
        id: sample_id(&context, &prompt, &target),
        generation_type,
        context,
        prompt,
        input_text,
        target,
        source_file: file.path.clone(),
        source_index: *index,
    };
    *index += 1;
    sample
}

/// Extract all samples from one classified corpus file.
pub fn extract_samples(file: &CorpusFile) -> Vec<Sample> {
    let Some(root) = &file.root else {
        return Vec::new();
    };
    let Some(items) = root.as_sequence() else {
        return Vec::new();
    };
    let mut samples = Vec::new();
    let mut index = 0usize;
    match file.file_kind {
        FileKind::Playbook => {
            let all_small = items.iter().all(|play| play_tasks(play).len() <= 2);
            for play in items {
                let tasks = play_tasks(play);
                if all_small {
                    // Whole-play generation needs at least one named task.
                    if tasks.iter().any(|t| name_of(t).is_some()) {
                        if let Some(prompt) = formulate_play_prompt(play) {
                            let named = name_of(play).is_some();
                            let item_text = sequence_item_text(play, 0);
                            let target = body_after_name_line(&item_text, named);
                            samples.push(make_sample(
                                file,
                                &mut index,
                                GenerationType::NlToPb,
                                String::new(),
                                prompt,
                                target,
                            ));
                        }
                    }
                } else if tasks.len() >= 3 {
                    for (i, task) in tasks.iter().enumerate().skip(1) {
                        let Some(prompt) = name_of(task) else { continue };
                        let context =
                            context_document(vec![play_with_task_prefix(play, i)]);
                        let item_text = sequence_item_text(task, 4);
                        let target = body_after_name_line(&item_text, true);
                        samples.push(make_sample(
                            file,
                            &mut index,
                            GenerationType::PbNlToT,
                            context,
                            prompt,
                            target,
                        ));
                    }
                }
            }
        }
        FileKind::RoleTasks => {
            for (i, task) in items.iter().enumerate() {
                let Some(prompt) = name_of(task) else { continue };
                let item_text = sequence_item_text(task, 0);
                let target = body_after_name_line(&item_text, true);
                let (generation_type, context) = if i == 0 {
                    (GenerationType::NlToT, String::new())
                } else {
                    (
                        GenerationType::TNlToT,
                        context_document(items[..i].to_vec()),
                    )
                };
                samples.push(make_sample(
                    file,
                    &mut index,
                    generation_type,
                    context,
                    prompt,
                    target,
                ));
            }
        }
        FileKind::Other => {}
    }
    if samples.is_empty() {
        log::debug!("{}: no samples extracted", file.path);
    }
    samples
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansible::ModuleCatalog;
    use crate::dataset::corpus::{classify_file, content_hash, normalize_doc};
    use crate::schema::SchemaTables;
    use crate::yaml::parse_stream;

    fn corpus_file(text: &str) -> CorpusFile {
        let catalog = ModuleCatalog::builtin();
        let tables = SchemaTables::builtin();
        let doc = normalize_doc(&parse_stream(text, "fixture.yml").unwrap());
        let file_kind = classify_file(&doc, &catalog, &tables);
        let canonical_text = serialize_canonical(&doc);
        CorpusFile {
            path: "fixture.yml".to_string(),
            file_kind,
            content_hash: content_hash(&canonical_text),
            root: doc.sole_root().cloned(),
            canonical_text,
        }
    }

    const TWO_TASK_PLAYBOOK: &str = "---\n- hosts: servers\n  tasks:\n    - name: Install SSH server\n      ansible.builtin.apt:\n        name: openssh-server\n        state: present\n    - name: Start SSH server\n      ansible.builtin.service:\n        name: ssh\n        state: started\n";

    #[test]
    fn two_task_playbook_yields_one_play_sample() {
        let file = corpus_file(TWO_TASK_PLAYBOOK);
        let samples = extract_samples(&file);
        assert_eq!(samples.len(), 1);
        let s = &samples[0];
        assert_eq!(s.generation_type, GenerationType::NlToPb);
        assert_eq!(s.prompt, "Install SSH server & Start SSH server");
        assert_eq!(s.context, "");
        assert_eq!(s.input_text, "- name: Install SSH server & Start SSH server\n");
        assert!(s.target.starts_with("  hosts: servers\n  tasks:\n"));
        // Input + target re-parses as a single named play.
        let full = format!("{}{}", s.input_text, s.target);
        let doc = parse_stream(&full, "t").unwrap();
        let play = &doc.roots[0].as_sequence().unwrap()[0];
        assert_eq!(play.get("hosts").unwrap().key_text().unwrap(), "servers");
    }

    #[test]
    fn four_task_play_yields_three_next_task_samples() {
        let text = "- hosts: all\n  tasks:\n    - name: t1\n      ping:\n    - name: t2\n      ping:\n    - name: t3\n      ping:\n    - name: t4\n      ping:\n";
        let samples = extract_samples(&corpus_file(text));
        assert_eq!(samples.len(), 3);
        assert!(samples.iter().all(|s| s.generation_type == GenerationType::PbNlToT));
        assert_eq!(samples[0].prompt, "t2");
        assert_eq!(samples[2].prompt, "t4");
        // Context of the i-th sample holds tasks 1..i.
        for (i, s) in samples.iter().enumerate() {
            let ctx = parse_stream(&s.context, "ctx").unwrap();
            let play = &ctx.roots[0].as_sequence().unwrap()[0];
            assert_eq!(play.get("tasks").unwrap().as_sequence().unwrap().len(), i + 1);
            let full = format!("{}{}", s.input_text, s.target);
            let whole = parse_stream(&full, "t").unwrap();
            let tasks = whole.roots[0].as_sequence().unwrap()[0]
                .get("tasks")
                .unwrap()
                .as_sequence()
                .unwrap()
                .len();
            assert_eq!(tasks, i + 2);
        }
    }

    #[test]
    fn role_file_yields_first_and_next_task_samples() {
        let text = "- name: r1\n  ping:\n- name: r2\n  ping:\n- name: r3\n  ping:\n- name: r4\n  ping:\n- name: r5\n  ping:\n";
        let samples = extract_samples(&corpus_file(text));
        assert_eq!(samples.len(), 5);
        assert_eq!(samples[0].generation_type, GenerationType::NlToT);
        assert_eq!(samples[0].context, "");
        assert_eq!(samples[0].input_text, "- name: r1\n");
        assert_eq!(samples[0].target, "  ping: null\n");
        for (i, s) in samples.iter().enumerate().skip(1) {
            assert_eq!(s.generation_type, GenerationType::TNlToT);
            let ctx = parse_stream(&s.context, "ctx").unwrap();
            assert_eq!(ctx.roots[0].as_sequence().unwrap().len(), i);
        }
        // Reconstruction: input + target is a prefix of the canonical file.
        let file = corpus_file(text);
        let s = &samples[2];
        let full = format!("{}{}{}", s.context, "- name: r3\n".trim_start_matches(""), s.target);
        let _ = full;
        let prefix = format!("{}{}", s.input_text, s.target);
        assert!(file.canonical_text.starts_with(&prefix));
    }

    #[test]
    fn unnamed_tasks_skipped_as_targets_kept_in_context() {
        let text = "- name: a\n  ping:\n- ping:\n- name: c\n  ping:\n";
        let samples = extract_samples(&corpus_file(text));
        assert_eq!(samples.len(), 2);
        assert_eq!(samples[0].prompt, "a");
        assert_eq!(samples[1].prompt, "c");
        // The unnamed middle task appears in the second sample's context.
        let ctx = parse_stream(&samples[1].context, "ctx").unwrap();
        assert_eq!(ctx.roots[0].as_sequence().unwrap().len(), 2);
    }

    #[test]
    fn unnamed_first_task_yields_no_nl_to_t() {
        let text = "- ping:\n- name: b\n  ping:\n";
        let samples = extract_samples(&corpus_file(text));
        assert_eq!(samples.len(), 1);
        assert_eq!(samples[0].generation_type, GenerationType::TNlToT);
    }

    #[test]
    fn play_without_named_tasks_yields_nothing() {
        let text = "- name: p\n  hosts: all\n  tasks:\n    - ping:\n";
        assert!(extract_samples(&corpus_file(text)).is_empty());
    }

    #[test]
    fn named_play_prompt_prefixes_play_name() {
        let text = "- name: Network Setup Playbook\n  hosts: all\n  tasks:\n    - name: Get config\n      ping:\n";
        let samples = extract_samples(&corpus_file(text));
        assert_eq!(samples[0].prompt, "Network Setup Playbook & Get config");
        // The target replaces the play's own name with the combined prompt
        // line; hosts follows at play-body indentation.
        assert!(samples[0].target.starts_with("  hosts: all\n"));
    }

    #[test]
    fn mixed_playbook_only_large_plays_sampled() {
        let text = "- hosts: a\n  tasks:\n    - name: small\n      ping:\n- hosts: b\n  tasks:\n    - name: x1\n      ping:\n    - name: x2\n      ping:\n    - name: x3\n      ping:\n";
        let samples = extract_samples(&corpus_file(text));
        assert_eq!(samples.len(), 2);
        assert!(samples.iter().all(|s| s.generation_type == GenerationType::PbNlToT));
    }

    #[test]
    fn sample_ids_are_content_hashes() {
        let file = corpus_file(TWO_TASK_PLAYBOOK);
        let a = extract_samples(&file);
        let b = extract_samples(&file);
        assert_eq!(a[0].id, b[0].id);
        assert_eq!(a[0].id.len(), 64);
    }
}
