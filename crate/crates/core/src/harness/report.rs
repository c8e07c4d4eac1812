//! Evaluation report: one row per generation type plus ALL, rendered as a
//! pipe-separated table with two-decimal fixed formatting or as JSON.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub generation_type: String,
    pub count: u64,
    pub schema_correct: f64,
    pub exact_match: f64,
    pub bleu: f64,
    pub ansible_aware: f64,
}

/// Run metadata carried into the report. The caller supplies the timestamp
/// so that evaluation itself stays a pure function of its inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub backend: Option<String>,
    pub dataset_sha256: String,
    pub timestamp: String,
    pub toolkit_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub backend: Option<String>,
    pub dataset_sha256: String,
    pub timestamp: String,
    pub toolkit_version: String,
    pub rows: Vec<ReportRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown format `{other}` (expected table or json)")),
        }
    }
}

pub fn render_report(report: &EvalReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Table => render_table(report),
        ReportFormat::Json => {
            let mut text =
                serde_json::to_string_pretty(report).expect("report serializes");
            text.push('\n');
            text
        }
    }
}

fn render_table(report: &EvalReport) -> String {
    let mut out = String::new();
    out.push_str("Generation Type | Count | Schema Correct | EM | BLEU | Ansible Aware\n");
    for row in &report.rows {
        out.push_str(&format!(
            "{} | {} | {:.2} | {:.2} | {:.2} | {:.2}\n",
            row.generation_type,
            row.count,
            row.schema_correct,
            row.exact_match,
            row.bleu,
            row.ansible_aware
        ));
    }
    out
}
