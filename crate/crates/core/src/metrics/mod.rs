//! The four evaluation metrics: Exact Match, BLEU, Ansible Aware, and
//! Schema Correct (the last delegated to the schema module), plus the
//! prediction-truncation step applied before scoring.

mod aware;
mod bleu;
mod truncate;

use serde::{Deserialize, Serialize};

pub use aware::ansible_aware;
pub use bleu::{bleu_corpus, tokenize, BleuError, BleuStats, MAX_NGRAM};
pub use truncate::truncate_first_task;

use crate::yaml::{parse_stream, serialize_canonical};

/// Per-sample metric results. BLEU is carried as poolable statistics so the
/// corpus score can be computed per generation type and overall.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreCard {
    pub sample_id: String,
    pub schema_correct: bool,
    pub exact_match: bool,
    pub bleu_stats: BleuStats,
    pub ansible_aware: f64,
}

/// True iff both texts parse and their canonical serializations are
/// byte-identical. Unparseable predictions never match.
pub fn exact_match(target_text: &str, prediction_text: &str) -> bool {
    let Ok(target) = parse_stream(target_text, "<target>") else {
        return false;
    };
    let Ok(prediction) = parse_stream(prediction_text, "<prediction>") else {
        return false;
    };
    serialize_canonical(&target) == serialize_canonical(&prediction)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_texts_match() {
        let text = "- name: a\n  ping:\n";
        assert!(exact_match(text, text));
    }

    #[test]
    fn formatting_is_absorbed_by_canonicalization() {
        let target = "  ansible.builtin.yum:\n    name: httpd\n";
        let prediction = "ansible.builtin.yum:\n        name: httpd\n";
        assert!(exact_match(target, prediction));
    }

    #[test]
    fn differing_scalars_do_not_match() {
        assert!(!exact_match("state: latest\n", "state: present\n"));
    }

    #[test]
    fn unparseable_prediction_is_false() {
        assert!(!exact_match("a: 1\n", "a: [1,\n"));
    }

    #[test]
    fn exact_match_is_symmetric() {
        let a = "x: 1\ny: 2\n";
        let b = "x: 1\n";
        assert_eq!(exact_match(a, b), exact_match(b, a));
        assert_eq!(exact_match(a, a), exact_match(a, a));
    }

    #[test]
    fn boolean_forms_match_after_normalization() {
        assert!(exact_match("backup: yes\n", "backup: true\n"));
        assert!(!exact_match("backup: yes\n", "backup: 'yes'\n"));
    }
}
