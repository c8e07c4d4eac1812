//! End-to-end dataset pipeline: ingest, deduplicate, split, extract, write.
//! Every stage is deterministic for a fixed corpus and seed, so two runs
//! produce byte-identical outputs.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ansible::ModuleCatalog;
use crate::dataset::corpus::{ingest_corpus, CorpusFile, IngestError, IngestStats};
use crate::dataset::extract::extract_samples;
use crate::dataset::types::{GenerationType, Sample};
use crate::schema::SchemaTables;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];

    pub fn file_name(self) -> &'static str {
        match self {
            Split::Train => "train.jsonl",
            Split::Valid => "valid.jsonl",
            Split::Test => "test.jsonl",
        }
    }

    fn key(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("cannot write {0}: {1}")]
    Io(String, std::io::Error),
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

/// Deduplication counters for the manifest.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, PartialEq, Eq)]
pub struct DedupStats {
    pub duplicate_files_dropped: usize,
    pub samples_extracted: usize,
    pub duplicate_samples_dropped: usize,
}

/// Manifest written next to the split files.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Manifest {
    pub seed: u64,
    pub toolkit_version: String,
    pub catalog_version: String,
    pub schema_version: String,
    pub files: IngestStats,
    pub dedup: DedupStats,
    /// split -> generation type token -> count.
    pub counts: BTreeMap<String, BTreeMap<String, usize>>,
}

/// Drop files whose canonical text hash was already seen; first occurrence
/// in path order wins.
pub fn dedup_files(files: Vec<CorpusFile>) -> (Vec<CorpusFile>, usize) {
    let mut seen = HashSet::new();
    let mut kept = Vec::with_capacity(files.len());
    let mut dropped = 0;
    for file in files {
        if seen.insert(file.content_hash.clone()) {
            kept.push(file);
        } else {
            log::info!("dropping duplicate file {}", file.path);
            dropped += 1;
        }
    }
    (kept, dropped)
}

/// Drop samples with duplicate (context, prompt, target) triples across all
/// splits. Sample ids are content hashes of exactly that triple, so id
/// equality is triple equality.
pub fn dedup_samples(samples: Vec<Sample>) -> (Vec<Sample>, usize) {
    let mut seen = HashSet::new();
    let mut kept = Vec::with_capacity(samples.len());
    let mut dropped = 0;
    for sample in samples {
        if seen.insert(sample.id.clone()) {
            kept.push(sample);
        } else {
            dropped += 1;
        }
    }
    (kept, dropped)
}

/// File-level 80/10/10 split with a seeded shuffle. Counts are exact:
/// `floor(0.8 n)` train, `floor(0.1 n)` valid, remainder test.
pub fn split_corpus(files: &[CorpusFile], seed: u64) -> Vec<(&CorpusFile, Split)> {
    let mut order: Vec<usize> = (0..files.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let n = files.len();
    let train = n * 8 / 10;
    let valid = n / 10;
    let mut out: Vec<(&CorpusFile, Split)> = Vec::with_capacity(n);
    for (rank, idx) in order.into_iter().enumerate() {
        let split = if rank < train {
            Split::Train
        } else if rank < train + valid {
            Split::Valid
        } else {
            Split::Test
        };
        out.push((&files[idx], split));
    }
    // Keep deterministic path order downstream regardless of shuffle order.
    out.sort_by(|a, b| a.0.path.cmp(&b.0.path));
    out
}

/// Fully built dataset, ready to write.
#[derive(Debug)]
pub struct Dataset {
    pub samples: Vec<(Sample, Split)>,
    pub manifest: Manifest,
}

/// Run the pipeline over a corpus directory.
pub fn build_dataset(
    input: &Path,
    seed: u64,
    catalog: &ModuleCatalog,
    tables: &SchemaTables,
) -> Result<Dataset, PipelineError> {
    let (files, ingest_stats) = ingest_corpus(input, catalog, tables)?;
    let (files, duplicate_files_dropped) = dedup_files(files);
    let assignments = split_corpus(&files, seed);

    let mut all: Vec<(Sample, Split)> = Vec::new();
    for (file, split) in &assignments {
        for sample in extract_samples(file) {
            all.push((sample, *split));
        }
    }
    let samples_extracted = all.len();
    // Sample-level dedup across all splits, first occurrence wins.
    let mut seen = HashSet::new();
    let mut samples: Vec<(Sample, Split)> = Vec::with_capacity(all.len());
    for (sample, split) in all {
        if seen.insert(sample.id.clone()) {
            samples.push((sample, split));
        }
    }
    let duplicate_samples_dropped = samples_extracted - samples.len();

    let mut counts: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    for split in Split::ALL {
        let mut per_type = BTreeMap::new();
        for gt in GenerationType::ALL {
            per_type.insert(gt.token().to_string(), 0usize);
        }
        counts.insert(split.key().to_string(), per_type);
    }
    for (sample, split) in &samples {
        *counts
            .get_mut(split.key())
            .unwrap()
            .get_mut(sample.generation_type.token())
            .unwrap() += 1;
    }

    let manifest = Manifest {
        seed,
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        catalog_version: catalog.version().to_string(),
        schema_version: tables.version().to_string(),
        files: ingest_stats,
        dedup: DedupStats {
            duplicate_files_dropped,
            samples_extracted,
            duplicate_samples_dropped,
        },
        counts,
    };
    Ok(Dataset { samples, manifest })
}

/// Write `train.jsonl`, `valid.jsonl`, `test.jsonl` (one sample per line,
/// sorted by id) and `manifest.json` into `output`.
pub fn write_dataset(dataset: &Dataset, output: &Path) -> Result<(), PipelineError> {
    std::fs::create_dir_all(output)
        .map_err(|e| PipelineError::Io(output.display().to_string(), e))?;
    for split in Split::ALL {
        let mut rows: Vec<&Sample> = dataset
            .samples
            .iter()
            .filter(|(_, s)| *s == split)
            .map(|(sample, _)| sample)
            .collect();
        rows.sort_by(|a, b| a.id.cmp(&b.id));
        let path = output.join(split.file_name());
        let mut out = Vec::new();
        for sample in rows {
            serde_json::to_writer(&mut out, sample)?;
            out.push(b'\n');
        }
        std::fs::write(&path, out).map_err(|e| PipelineError::Io(path.display().to_string(), e))?;
    }
    let manifest_path = output.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&dataset.manifest)?;
    text.push('\n');
    std::fs::write(&manifest_path, text)
        .map_err(|e| PipelineError::Io(manifest_path.display().to_string(), e))?;
    Ok(())
}

/// Read one split file back into samples.
pub fn read_samples(path: &Path) -> Result<Vec<Sample>, PipelineError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PipelineError::Io(path.display().to_string(), e))?;
    let mut samples = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        samples.push(serde_json::from_str(line)?);
    }
    Ok(samples)
}

/// Append-free JSONL writer used by the prediction side of the harness.
pub fn write_jsonl<T: Serialize>(items: &[T], path: &Path) -> Result<(), PipelineError> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.push(b'\n');
    }
    let mut file = std::fs::File::create(path)
        .map_err(|e| PipelineError::Io(path.display().to_string(), e))?;
    file.write_all(&out)
        .map_err(|e| PipelineError::Io(path.display().to_string(), e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_corpus(dir: &Path, files: &[(&str, &str)]) {
        for (name, text) in files {
            let path = dir.join(name);
            std::fs::create_dir_all(path.parent().unwrap()).unwrap();
            std::fs::write(path, text).unwrap();
        }
    }

    const PB2: &str = "- hosts: all\n  tasks:\n    - name: a\n      ping:\n    - name: b\n      ping:\n";
    const PB4: &str = "- hosts: all\n  tasks:\n    - name: p1\n      ping:\n    - name: p2\n      ping:\n    - name: p3\n      ping:\n    - name: p4\n      ping:\n";
    const ROLE5: &str = "- name: r1\n  ping:\n- name: r2\n  ping:\n- name: r3\n  ping:\n- name: r4\n  ping:\n- name: r5\n  ping:\n";

    fn build(dir: &Path, seed: u64) -> Dataset {
        build_dataset(dir, seed, &ModuleCatalog::builtin(), &SchemaTables::builtin()).unwrap()
    }

    #[test]
    fn fixture_corpus_counts() {
        let dir = tempfile::tempdir().unwrap();
        write_corpus(dir.path(), &[("pb2.yml", PB2), ("pb4.yml", PB4), ("role.yml", ROLE5)]);
        let dataset = build(dir.path(), DEFAULT_SEED);
        let count = |gt: GenerationType| {
            dataset
                .samples
                .iter()
                .filter(|(s, _)| s.generation_type == gt)
                .count()
        };
        assert_eq!(count(GenerationType::NlToPb), 1);
        assert_eq!(count(GenerationType::PbNlToT), 3);
        assert_eq!(count(GenerationType::NlToT), 1);
        assert_eq!(count(GenerationType::TNlToT), 4);
    }

    #[test]
    fn duplicate_files_dropped_by_canonical_text() {
        let dir = tempfile::tempdir().unwrap();
        // Same content, different formatting and comments.
        write_corpus(
            dir.path(),
            &[
                ("a.yml", "- name: a\n  ping:\n"),
                ("b.yml", "# comment\n- name: a\n  ping:\n"),
                ("c.yml", "---\n-   name: a\n    ping:\n"),
            ],
        );
        let dataset = build(dir.path(), DEFAULT_SEED);
        assert_eq!(dataset.manifest.dedup.duplicate_files_dropped, 2);
        assert_eq!(dataset.samples.len(), 1);
    }

    #[test]
    fn duplicate_samples_across_files_dropped() {
        let dir = tempfile::tempdir().unwrap();
        // Different files (distinct trailing tasks) sharing the first task.
        write_corpus(
            dir.path(),
            &[
                ("r1.yml", "- name: shared\n  ping:\n- name: only1\n  ping:\n"),
                ("r2.yml", "- name: shared\n  ping:\n- name: only2\n  ping:\n"),
            ],
        );
        let dataset = build(dir.path(), DEFAULT_SEED);
        assert_eq!(dataset.manifest.dedup.duplicate_files_dropped, 0);
        assert_eq!(dataset.manifest.dedup.duplicate_samples_dropped, 1);
        // 2 NL->T (one deduped) + 2 T+NL->T (different contexts survive).
        assert_eq!(dataset.samples.len(), 3);
    }

    #[test]
    fn split_proportions_are_exact() {
        let files: Vec<CorpusFile> = (0..10)
            .map(|i| CorpusFile {
                path: format!("f{i:03}.yml"),
                file_kind: crate::dataset::corpus::FileKind::RoleTasks,
                canonical_text: format!("---\n- name: t{i}\n  ping: null\n"),
                content_hash: format!("{i:064}"),
                root: None,
            })
            .collect();
        let assignments = split_corpus(&files, DEFAULT_SEED);
        let count = |s: Split| assignments.iter().filter(|(_, x)| *x == s).count();
        assert_eq!(count(Split::Train), 8);
        assert_eq!(count(Split::Valid), 1);
        assert_eq!(count(Split::Test), 1);
    }

    #[test]
    fn same_seed_same_assignment() {
        let files: Vec<CorpusFile> = (0..50)
            .map(|i| CorpusFile {
                path: format!("f{i:03}.yml"),
                file_kind: crate::dataset::corpus::FileKind::RoleTasks,
                canonical_text: String::new(),
                content_hash: format!("{i:064}"),
                root: None,
            })
            .collect();
        let a: Vec<(String, Split)> = split_corpus(&files, 7)
            .into_iter()
            .map(|(f, s)| (f.path.clone(), s))
            .collect();
        let b: Vec<(String, Split)> = split_corpus(&files, 7)
            .into_iter()
            .map(|(f, s)| (f.path.clone(), s))
            .collect();
        assert_eq!(a, b);
        let c: Vec<(String, Split)> = split_corpus(&files, 8)
            .into_iter()
            .map(|(f, s)| (f.path.clone(), s))
            .collect();
        assert_ne!(a, c);
    }

    #[test]
    fn pipeline_runs_are_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        write_corpus(dir.path(), &[("pb2.yml", PB2), ("pb4.yml", PB4), ("role.yml", ROLE5)]);
        let out1 = tempfile::tempdir().unwrap();
        let out2 = tempfile::tempdir().unwrap();
        write_dataset(&build(dir.path(), DEFAULT_SEED), out1.path()).unwrap();
        write_dataset(&build(dir.path(), DEFAULT_SEED), out2.path()).unwrap();
        for name in ["train.jsonl", "valid.jsonl", "test.jsonl", "manifest.json"] {
            let a = std::fs::read(out1.path().join(name)).unwrap();
            let b = std::fs::read(out2.path().join(name)).unwrap();
            assert_eq!(a, b, "{name}");
        }
    }

    #[test]
    fn samples_roundtrip_through_jsonl() {
        let dir = tempfile::tempdir().unwrap();
        write_corpus(dir.path(), &[("role.yml", ROLE5)]);
        let dataset = build(dir.path(), DEFAULT_SEED);
        let out = tempfile::tempdir().unwrap();
        write_dataset(&dataset, out.path()).unwrap();
        let mut read_back = Vec::new();
        for split in Split::ALL {
            read_back.extend(read_samples(&out.path().join(split.file_name())).unwrap());
        }
        assert_eq!(read_back.len(), dataset.samples.len());
        let mut expected: Vec<Sample> =
            dataset.samples.iter().map(|(s, _)| s.clone()).collect();
        expected.sort_by(|a, b| a.id.cmp(&b.id));
        read_back.sort_by(|a, b| a.id.cmp(&b.id));
        assert_eq!(read_back, expected);
    }

    #[test]
    fn no_sample_id_crosses_splits() {
        let dir = tempfile::tempdir().unwrap();
        let mut files: Vec<(String, String)> = Vec::new();
        for i in 0..40 {
            files.push((
                format!("r{i:02}.yml"),
                format!("- name: t{i}\n  ping:\n- name: u{i}\n  ping:\n"),
            ));
        }
        let refs: Vec<(&str, &str)> =
            files.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        write_corpus(dir.path(), &refs);
        let dataset = build(dir.path(), DEFAULT_SEED);
        let mut by_split: BTreeMap<Split, HashSet<String>> = BTreeMap::new();
        for (sample, split) in &dataset.samples {
            by_split.entry(*split).or_default().insert(sample.id.clone());
        }
        let splits: Vec<&HashSet<String>> = by_split.values().collect();
        for i in 0..splits.len() {
            for j in (i + 1)..splits.len() {
                assert!(splits[i].is_disjoint(splits[j]));
            }
        }
    }
}
