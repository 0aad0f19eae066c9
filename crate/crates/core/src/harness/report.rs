use serde::{Deserialize, Serialize};

use super::{ExperimentReport, TrialRecord};
use crate::error::{param, Result};
use crate::Decision;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
    Table,
}

const CSV_HEADER: [&str; 8] = [
    "trial",
    "seed",
    "input",
    "decision",
    "statistic",
    "p_value",
    "critical_value",
    "error",
];
const SUMMARY_TAG: &str = "summary";

/// Totals carried by the final CSV row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvSummary {
    pub rejections: usize,
    pub trials: usize,
    pub failures: usize,
}

/// Serializes a report.
///
/// * `json`: the whole report, fields in declaration order.
/// * `csv`: a header, one row per trial, then a `summary` row whose
///   `decision` column reads `rejections=R;trials=T;failures=F`. With no
///   trials only the header is written.
/// * `table`: test name, parameters and the rejection count per row.
pub fn emit_report(report: &ExperimentReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => Ok(serde_json::to_string_pretty(report)? + "\n"),
        ReportFormat::Csv => emit_csv(report),
        ReportFormat::Table => Ok(emit_table(report)),
    }
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

fn emit_csv(report: &ExperimentReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in &report.outcomes {
        w.write_record([
            r.trial.to_string(),
            opt(&r.seed),
            opt(&r.input),
            r.decision
                .map(|d| d.as_str().to_string())
                .unwrap_or_default(),
            opt(&r.statistic),
            opt(&r.p_value),
            opt(&r.critical_value),
            opt(&r.error),
        ])?;
    }
    if !report.outcomes.is_empty() {
        let summary = format!(
            "rejections={};trials={};failures={}",
            report.rejections, report.trials, report.failures
        );
        w.write_record([SUMMARY_TAG, "", "", &summary, "", "", "", ""])?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn parse_field<T: std::str::FromStr>(field: &str, name: &str) -> Result<Option<T>> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse()
        .map(Some)
        .map_err(|_| crate::Error::Parameter(format!("bad {name} value `{field}`")))
}

/// Reads back the CSV written by [`emit_report`].
pub fn parse_csv(text: &str) -> Result<(Vec<TrialRecord>, Option<CsvSummary>)> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut records = Vec::new();
    let mut summary = None;
    for row in reader.records() {
        let row = row?;
        if row.len() != CSV_HEADER.len() {
            return param(format!(
                "expected {} columns, got {}",
                CSV_HEADER.len(),
                row.len()
            ));
        }
        if &row[0] == SUMMARY_TAG {
            let mut totals = [None; 3];
            for part in row[3].split(';') {
                let (key, value) = part.split_once('=').unwrap_or((part, ""));
                let slot = match key {
                    "rejections" => 0,
                    "trials" => 1,
                    "failures" => 2,
                    _ => return param(format!("unknown summary field `{key}`")),
                };
                totals[slot] = parse_field::<usize>(value, key)?;
            }
            match totals {
                [Some(rejections), Some(trials), Some(failures)] => {
                    summary = Some(CsvSummary {
                        rejections,
                        trials,
                        failures,
                    })
                }
                _ => return param("incomplete summary row"),
            }
            continue;
        }
        let decision = match &row[3] {
            "" => None,
            "accept" => Some(Decision::Accept),
            "reject" => Some(Decision::Reject),
            other => return param(format!("bad decision `{other}`")),
        };
        records.push(TrialRecord {
            trial: parse_field(&row[0], "trial")?
                .ok_or_else(|| crate::Error::Parameter("missing trial index".into()))?,
            seed: parse_field(&row[1], "seed")?,
            input: (!row[2].is_empty()).then(|| row[2].to_string()),
            decision,
            statistic: parse_field(&row[4], "statistic")?,
            p_value: parse_field(&row[5], "p_value")?,
            critical_value: parse_field(&row[6], "critical_value")?,
            error: (!row[7].is_empty()).then(|| row[7].to_string()),
        });
    }
    Ok((records, summary))
}

fn emit_table(report: &ExperimentReport) -> String {
    let spec = &report.spec;
    let name_width = 14;
    let mut out = String::new();
    out.push_str(&format!(
        "{:<name_width$} {:>12} {:>10}\n",
        "test", "n_bits", "rejected"
    ));
    let n_bits = match spec.source {
        super::SourceConfig::Directory { .. } => "files".to_string(),
        _ => spec.n_bits.to_string(),
    };
    out.push_str(&format!(
        "{:<name_width$} {:>12} {:>10}\n",
        spec.test.name(),
        n_bits,
        format!("{}/{}", report.rejections, report.trials)
    ));
    out.push_str(&format!(
        "  parameters: {}; source={}; alpha={}\n",
        spec.test.describe(),
        spec.source.name(),
        spec.alpha
    ));
    if report.failures > 0 {
        out.push_str(&format!("  failed trials: {}\n", report.failures));
    }
    for w in &report.warnings {
        out.push_str(&format!("  warning: {w}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::{ExperimentSpec, SourceConfig, TestConfig};
    use super::*;
    use crate::ranking::Discipline;

    fn report(outcomes: Vec<TrialRecord>) -> ExperimentReport {
        let rejections = outcomes
            .iter()
            .filter(|r| r.decision == Some(Decision::Reject))
            .count();
        let failures = outcomes.iter().filter(|r| r.error.is_some()).count();
        ExperimentReport {
            spec: ExperimentSpec {
                source: SourceConfig::Randu,
                test: TestConfig::Ranking {
                    discipline: Discipline::BookStack,
                    block_length: Some(20),
                    cuts: None,
                    target_c: 5.0,
                },
                trials: outcomes.len().max(1),
                n_bits: 1_000_000,
                alpha: 0.01,
                master_seed: 0,
                workers: 1,
            },
            rejections,
            trials: outcomes.len(),
            failures,
            outcomes,
            warnings: vec![],
            wall_time_secs: 0.25,
        }
    }

    fn row(i: usize) -> TrialRecord {
        TrialRecord {
            trial: i,
            seed: i.is_multiple_of(2).then_some(i as u64 * 0x1234_5678_9abc),
            input: Some(format!("file,{i}.bin")),
            decision: Some(if i.is_multiple_of(3) {
                Decision::Reject
            } else {
                Decision::Accept
            }),
            statistic: Some(1.0 / (i as f64 + 3.0)),
            p_value: (!i.is_multiple_of(4)).then_some(0.1 + i as f64 * 1e-7),
            critical_value: None,
            error: (i == 5).then(|| "boom \"quoted\"".to_string()),
        }
    }

    #[test]
    fn empty_csv_is_header_only() {
        let text = emit_report(&report(vec![]), ReportFormat::Csv).unwrap();
        assert_eq!(text, CSV_HEADER.join(",") + "\n");
    }

    #[test]
    fn csv_has_one_row_per_trial_plus_summary() {
        let r = report((0..100).map(row).collect());
        let text = emit_report(&r, ReportFormat::Csv).unwrap();
        assert_eq!(text.lines().count(), 1 + 100 + 1);
        let (rows, summary) = parse_csv(&text).unwrap();
        assert_eq!(rows, r.outcomes);
        assert_eq!(
            summary,
            Some(CsvSummary {
                rejections: r.rejections,
                trials: 100,
                failures: 1
            })
        );
    }

    #[test]
    fn json_round_trip() {
        let r = report((0..7).map(row).collect());
        let text = emit_report(&r, ReportFormat::Json).unwrap();
        let back: ExperimentReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn table_mentions_parameters() {
        let text = emit_report(&report((0..6).map(row).collect()), ReportFormat::Table).unwrap();
        assert!(text.contains("bookstack"));
        assert!(text.contains("s=20, |A1|=5120"));
        assert!(text.contains("2/6"));
        assert!(text.contains("failed trials: 1"));
    }
}
