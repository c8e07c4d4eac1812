//! Dataset construction: turn a local corpus of Ansible playbooks and role
//! task files into deduplicated, split JSONL datasets of the four
//! generation types, with completion-style model inputs.

mod corpus;
mod extract;
mod pipeline;
mod types;

pub use corpus::{
    classify_file, content_hash, ingest_corpus, normalize_doc, CorpusFile, FileKind,
    IngestError, IngestStats,
};
pub use extract::{extract_samples, formulate_input, formulate_play_prompt};
pub use pipeline::{
    build_dataset, dedup_files, dedup_samples, read_samples, split_corpus, write_dataset,
    write_jsonl, Dataset, DedupStats, Manifest, PipelineError, Split, DEFAULT_SEED,
};
pub use types::{GenerationType, Sample};
