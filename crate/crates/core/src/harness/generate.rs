//! Drive a backend over a dataset, recording one completion per sample.
//! Per-sample failures are recorded in the predictions file and never abort
//! the run; only an unreachable backend fails fast.

use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::dataset::Sample;
use crate::harness::backend::{Backend, BackendError};

/// One line of the predictions JSONL file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct PredictionRecord {
    pub id: String,
    pub completion: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Generate completions for every sample with bounded parallelism.
/// Records come back sorted by sample id.
pub fn generate_predictions(
    samples: &[Sample],
    backend: &Backend,
    parallelism: usize,
) -> Result<Vec<PredictionRecord>, BackendError> {
    backend.probe()?;
    let workers = parallelism.max(1).min(samples.len().max(1));
    let queue = Mutex::new(0usize);
    let results: Mutex<Vec<Option<PredictionRecord>>> =
        Mutex::new(vec![None; samples.len()]);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = {
                    let mut next = queue.lock().unwrap();
                    let index = *next;
                    if index >= samples.len() {
                        return;
                    }
                    *next += 1;
                    index
                };
                let sample = &samples[index];
                let input = backend.model_input(&sample.input_text);
                let record = match backend.complete(&input) {
                    Ok(completion) => PredictionRecord {
                        id: sample.id.clone(),
                        completion,
                        error: None,
                    },
                    Err(err) => {
                        log::warn!("sample {}: {err}", sample.id);
                        PredictionRecord {
                            id: sample.id.clone(),
                            completion: String::new(),
                            error: Some(err.to_string()),
                        }
                    }
                };
                results.lock().unwrap()[index] = Some(record);
            });
        }
    });

    let mut records: Vec<PredictionRecord> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("all samples processed"))
        .collect();
    records.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(records)
}

/// Read a predictions JSONL file.
pub fn read_predictions(path: &std::path::Path) -> std::io::Result<Vec<PredictionRecord>> {
    let text = std::fs::read_to_string(path)?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(line).map_err(|e| {
            std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("{}:{}: {e}", path.display(), i + 1),
            )
        })?;
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::GenerationType;
    use crate::harness::backend::BackendConfig;

    fn sample(id: &str, input: &str) -> Sample {
        Sample {
            id: id.to_string(),
            generation_type: GenerationType::NlToT,
            context: String::new(),
            prompt: "p".to_string(),
            input_text: input.to_string(),
            target: String::new(),
            source_file: "f.yml".to_string(),
            source_index: 0,
        }
    }

    #[test]
    fn cat_backend_echoes_inputs_sorted_by_id() {
        let backend = Backend::new(BackendConfig::command(vec!["cat".into()])).unwrap();
        let samples = vec![sample("bbb", "- name: two\n"), sample("aaa", "- name: one\n")];
        let records = generate_predictions(&samples, &backend, 4).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].id, "aaa");
        assert_eq!(records[0].completion, "- name: one\n");
        assert_eq!(records[1].id, "bbb");
        assert!(records[0].error.is_none());
    }

    #[test]
    fn per_sample_failure_recorded_run_completes() {
        // Exits non-zero whenever the input mentions "fail".
        let backend = Backend::new(BackendConfig::command(vec![
            "sh".into(),
            "-c".into(),
            "input=$(cat); case \"$input\" in *fail*) exit 9;; *) printf '%s' \"$input\";; esac"
                .into(),
        ]))
        .unwrap();
        let samples = vec![sample("a", "ok\n"), sample("b", "fail\n"), sample("c", "ok2\n")];
        let records = generate_predictions(&samples, &backend, 2).unwrap();
        assert_eq!(records.len(), 3);
        let b = records.iter().find(|r| r.id == "b").unwrap();
        assert_eq!(b.completion, "");
        assert!(b.error.as_deref().unwrap().contains("status 9"));
        assert!(records.iter().filter(|r| r.error.is_none()).count() == 2);
    }

    #[test]
    fn unavailable_backend_fails_fast() {
        let backend =
            Backend::new(BackendConfig::command(vec!["no-such-program-zzz".into()])).unwrap();
        let samples = vec![sample("a", "x")];
        assert!(matches!(
            generate_predictions(&samples, &backend, 1),
            Err(BackendError::Unavailable(_))
        ));
    }

    #[test]
    fn predictions_jsonl_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pred.jsonl");
        let records = vec![
            PredictionRecord { id: "a".into(), completion: "x\n".into(), error: None },
            PredictionRecord {
                id: "b".into(),
                completion: String::new(),
                error: Some("timed out".into()),
            },
        ];
        crate::dataset::write_jsonl(&records, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        // Wire format: completion always present, error only on failure.
        assert_eq!(
            text.lines().next().unwrap(),
            "{\"id\":\"a\",\"completion\":\"x\\n\"}"
        );
        let back = read_predictions(&path).unwrap();
        assert_eq!(back, records);
    }
}
