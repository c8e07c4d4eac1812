//! Score predictions against references and aggregate per generation type.
//! Scoring is pure per sample; cards are produced in reference order so the
//! aggregates are identical for any worker count.

use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::ansible::ModuleCatalog;
use crate::dataset::{GenerationType, Sample};
use crate::harness::generate::PredictionRecord;
use crate::harness::report::{EvalReport, ReportRow, RunMeta};
use crate::metrics::{
    ansible_aware, exact_match, tokenize, truncate_first_task, BleuStats, ScoreCard,
};
use crate::schema::{validate_play, validate_task, SchemaTables};
use crate::yaml::{parse_stream, YamlNode};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no samples to evaluate")]
    EmptyDataset,
}

/// Catalog and schema tables used for scoring.
pub struct EvalContext {
    pub catalog: ModuleCatalog,
    pub tables: SchemaTables,
}

impl Default for EvalContext {
    fn default() -> Self {
        EvalContext { catalog: ModuleCatalog::builtin(), tables: SchemaTables::builtin() }
    }
}

pub struct Evaluation {
    pub report: EvalReport,
    pub cards: Vec<ScoreCard>,
    pub warnings: Vec<String>,
}

/// Score one prediction text against its reference sample.
pub fn score_sample(sample: &Sample, completion: &str, ctx: &EvalContext) -> ScoreCard {
    let truncated = truncate_first_task(completion, sample.generation_type);
    let prediction_root = parse_root(&truncated);
    let target_root = parse_root(&sample.target);

    let schema_correct = match &prediction_root {
        Some(root) => schema_ok(root, sample.generation_type, ctx),
        None => false,
    };
    let ansible_aware = match (&target_root, &prediction_root) {
        (Some(target), Some(prediction)) => ansible_aware(target, prediction, &ctx.catalog),
        _ => 0.0,
    };
    ScoreCard {
        sample_id: sample.id.clone(),
        schema_correct,
        exact_match: exact_match(&sample.target, &truncated),
        bleu_stats: BleuStats::from_pair(&tokenize(&sample.target), &tokenize(&truncated)),
        ansible_aware,
    }
}

fn parse_root(text: &str) -> Option<YamlNode> {
    let doc = parse_stream(text, "<snippet>").ok()?;
    doc.sole_root().cloned()
}

/// Schema Correct is computed on the predicted snippet alone: a play body
/// for playbook generation, a task body otherwise.
fn schema_ok(root: &YamlNode, generation_type: GenerationType, ctx: &EvalContext) -> bool {
    let violations = if generation_type.is_task_type() {
        validate_task(root, &ctx.catalog, &ctx.tables)
    } else {
        validate_play(root, &ctx.catalog, &ctx.tables)
    };
    violations.is_empty()
}

/// Evaluate a full run. Missing predictions score as empty completions and
/// are reported in the warning list, as are prediction ids that match no
/// reference.
pub fn evaluate(
    samples: &[Sample],
    predictions: &[PredictionRecord],
    ctx: &EvalContext,
    meta: RunMeta,
    threads: usize,
) -> Result<Evaluation, EvalError> {
    if samples.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    let by_id: HashMap<&str, &PredictionRecord> =
        predictions.iter().map(|p| (p.id.as_str(), p)).collect();

    let mut warnings = Vec::new();
    for sample in samples {
        if !by_id.contains_key(sample.id.as_str()) {
            warnings.push(format!("no prediction for sample {}", sample.id));
        }
    }
    let known: std::collections::HashSet<&str> =
        samples.iter().map(|s| s.id.as_str()).collect();
    for prediction in predictions {
        if !known.contains(prediction.id.as_str()) {
            warnings.push(format!("prediction {} matches no reference", prediction.id));
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("thread pool");
    let cards: Vec<ScoreCard> = pool.install(|| {
        samples
            .par_iter()
            .map(|sample| {
                let completion = by_id
                    .get(sample.id.as_str())
                    .map(|p| p.completion.as_str())
                    .unwrap_or("");
                score_sample(sample, completion, ctx)
            })
            .collect()
    });

    let report = aggregate(samples, &cards, meta);
    Ok(Evaluation { report, cards, warnings })
}

/// Fold cards into per-type rows plus ALL. Means and pooled BLEU statistics
/// are accumulated in sample order.
pub fn aggregate(samples: &[Sample], cards: &[ScoreCard], meta: RunMeta) -> EvalReport {
    #[derive(Default)]
    struct Bucket {
        count: u64,
        schema: u64,
        exact: u64,
        aware_sum: f64,
        bleu: BleuStats,
    }
    impl Bucket {
        fn add(&mut self, card: &ScoreCard) {
            self.count += 1;
            self.schema += card.schema_correct as u64;
            self.exact += card.exact_match as u64;
            self.aware_sum += card.ansible_aware;
            self.bleu = self.bleu.combine(&card.bleu_stats);
        }
        fn row(&self, label: String) -> ReportRow {
            let n = self.count as f64;
            ReportRow {
                generation_type: label,
                count: self.count,
                schema_correct: 100.0 * self.schema as f64 / n,
                exact_match: 100.0 * self.exact as f64 / n,
                bleu: self.bleu.score(),
                ansible_aware: 100.0 * self.aware_sum / n,
            }
        }
    }

    let mut all = Bucket::default();
    let mut per_type: Vec<(GenerationType, Bucket)> = GenerationType::ALL
        .iter()
        .map(|gt| (*gt, Bucket::default()))
        .collect();
    for (sample, card) in samples.iter().zip(cards) {
        all.add(card);
        per_type
            .iter_mut()
            .find(|(gt, _)| *gt == sample.generation_type)
            .expect("all generation types enumerated")
            .1
            .add(card);
    }

    let mut rows = vec![all.row("ALL".to_string())];
    for (gt, bucket) in &per_type {
        if bucket.count > 0 {
            rows.push(bucket.row(gt.to_string()));
        }
    }
    EvalReport {
        backend: meta.backend,
        dataset_sha256: meta.dataset_sha256,
        timestamp: meta.timestamp,
        toolkit_version: meta.toolkit_version,
        rows,
    }
}
