//! Shared dataset record types: the four generation types and the sample
//! unit exchanged between dataset construction and evaluation.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Input/output combination of a sample.
///
/// * `NlToPb` — empty context, target is a whole play body.
/// * `NlToT` — empty context, target is the first task of a role.
/// * `PbNlToT` — context is a playbook prefix, target is the next task.
/// * `TNlToT` — context is preceding role tasks, target is the next task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GenerationType {
    #[serde(rename = "nl_to_pb")]
    NlToPb,
    #[serde(rename = "nl_to_t")]
    NlToT,
    #[serde(rename = "pb_nl_to_t")]
    PbNlToT,
    #[serde(rename = "t_nl_to_t")]
    TNlToT,
}

impl GenerationType {
    pub const ALL: [GenerationType; 4] = [
        GenerationType::NlToPb,
        GenerationType::NlToT,
        GenerationType::PbNlToT,
        GenerationType::TNlToT,
    ];

    /// Task-producing types have their predictions truncated to the first
    /// task; playbook generation passes through untouched.
    pub fn is_task_type(self) -> bool {
        !matches!(self, GenerationType::NlToPb)
    }

    /// Serialized token used in JSONL files.
    pub fn token(self) -> &'static str {
        match self {
            GenerationType::NlToPb => "nl_to_pb",
            GenerationType::NlToT => "nl_to_t",
            GenerationType::PbNlToT => "pb_nl_to_t",
            GenerationType::TNlToT => "t_nl_to_t",
        }
    }
}

impl fmt::Display for GenerationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            GenerationType::NlToPb => "NL->PB",
            GenerationType::NlToT => "NL->T",
            GenerationType::PbNlToT => "PB+NL->T",
            GenerationType::TNlToT => "T+NL->T",
        };
        f.write_str(name)
    }
}

/// One evaluation unit. `input_text` is the completion-style model input:
/// the context followed by a `- name: <prompt>` line, so the model continues
/// with the target body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub generation_type: GenerationType,
    pub context: String,
    pub prompt: String,
    pub input_text: String,
    pub target: String,
    pub source_file: String,
    pub source_index: usize,
}
