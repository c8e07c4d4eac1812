//! Prediction truncation: task-type generations keep only the first
//! generated task. Playbook generations pass through untouched.

use crate::dataset::GenerationType;
use crate::yaml::parse_stream;

/// Cut `prediction` after its first complete task.
///
/// Primary strategy: when the text parses as a YAML sequence, keep the text
/// through the last line of item 0. Fallback for unparseable output: cut
/// before the next `- name:` line after the first line, else at the first
/// dedent below the first line's indent. Total; worst case returns the
/// input unchanged.
pub fn truncate_first_task(prediction: &str, generation_type: GenerationType) -> String {
    if !generation_type.is_task_type() {
        return prediction.to_string();
    }
    if let Ok(doc) = parse_stream(prediction, "<prediction>") {
        let Some(items) = doc.roots.first().and_then(|r| r.as_sequence()) else {
            return prediction.to_string();
        };
        match items {
            [] | [_] => prediction.to_string(),
            [first, second, ..] => {
                // Cut on a line boundary between the first two items; flow
                // sequences on one line stay whole.
                if second.span.start_line > first.span.end_line {
                    take_lines(prediction, first.span.end_line)
                } else {
                    prediction.to_string()
                }
            }
        }
    } else {
        fallback_cut(prediction)
    }
}

fn take_lines(text: &str, count: usize) -> String {
    let mut out = String::new();
    for line in text.split_inclusive('\n').take(count) {
        out.push_str(line);
    }
    if !out.ends_with('\n') {
        out.push('\n');
    }
    out
}

fn fallback_cut(text: &str) -> String {
    let lines: Vec<&str> = text.split('\n').collect();
    // Next `- name:` after the first line starts a new task.
    for (i, line) in lines.iter().enumerate().skip(1) {
        if line.trim_start().starts_with("- name:") {
            return take_lines(text, i);
        }
    }
    // Otherwise cut at the first dedent below the first content line.
    let Some(first_content) = lines.iter().position(|l| !l.trim().is_empty()) else {
        return text.to_string();
    };
    let base_indent = indent_of(lines[first_content]);
    for (i, line) in lines.iter().enumerate().skip(first_content + 1) {
        if line.trim().is_empty() {
            continue;
        }
        if indent_of(line) < base_indent {
            return take_lines(text, i);
        }
    }
    text.to_string()
}

fn indent_of(line: &str) -> usize {
    line.len() - line.trim_start_matches(' ').len()
}
