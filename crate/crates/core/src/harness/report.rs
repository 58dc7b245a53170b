//! Report persistence: CSV and JSON experiment reports, per-sample record
//! streams, and per-iteration norm traces.
//!
//! Rank/ASR cells use the `%.2f/%.2f` convention with the success rate in
//! percent, e.g. `752.90/100.00`.

use std::fs;
use std::path::Path;

use crate::attacks::PerturbationNorms;
use crate::error::Result;
use crate::harness::transfer::ExperimentReport;
use crate::metrics::SampleRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

pub fn report_to_json(report: &ExperimentReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

pub fn report_to_csv(report: &ExperimentReport) -> String {
    let ks: Vec<usize> = report
        .rows
        .first()
        .map(|r| r.asr.iter().map(|(k, _)| *k).collect())
        .unwrap_or_default();
    let mut header = vec![
        "model".to_string(),
        "clean_accuracy".to_string(),
        "icr_asr1".to_string(),
        "mean_icr".to_string(),
    ];
    for k in &ks {
        header.push(format!("asr_at_{k}"));
    }
    header.extend(
        ["mean_olnr", "mean_nlor", "mean_nrt", "mean_cossim", "l1_mean_abs", "l2", "linf"]
            .map(str::to_string),
    );
    let mut out = header.join(",");
    out.push('\n');
    for row in &report.rows {
        let asr1 = row
            .asr
            .iter()
            .find(|(k, _)| *k == 1)
            .map(|(_, v)| *v)
            .unwrap_or(f64::NAN);
        let mut fields = vec![
            row.model.clone(),
            format!("{:.4}", row.clean_accuracy),
            format!("{:.2}/{:.2}", row.mean_icr, asr1 * 100.0),
            format!("{:.4}", row.mean_icr),
        ];
        for (_, v) in &row.asr {
            fields.push(format!("{:.4}", v));
        }
        fields.push(format!("{:.4}", row.mean_olnr));
        fields.push(format!("{:.4}", row.mean_nlor));
        fields.push(format!("{:.4}", row.mean_nrt));
        fields.push(format!("{:.4}", row.mean_cossim));
        fields.push(format!("{:.6}", row.mean_norms.l1_mean_abs));
        fields.push(format!("{:.6}", row.mean_norms.l2));
        fields.push(format!("{:.6}", row.mean_norms.linf));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Writes the report in the requested format.
pub fn emit_report(report: &ExperimentReport, format: ReportFormat, path: &Path) -> Result<()> {
    let contents = match format {
        ReportFormat::Csv => report_to_csv(report),
        ReportFormat::Json => report_to_json(report)?,
    };
    fs::write(path, contents)?;
    Ok(())
}

/// One JSON line per (model, sample) record.
pub fn write_records_jsonl(records: &[(String, Vec<SampleRecord>)], path: &Path) -> Result<()> {
    use std::io::Write;
    let mut file = std::io::BufWriter::new(fs::File::create(path)?);
    for (model, samples) in records {
        for (index, record) in samples.iter().enumerate() {
            let line = serde_json::json!({
                "model": model,
                "sample": index,
                "record": record,
            });
            serde_json::to_writer(&mut file, &line)?;
            file.write_all(b"\n")?;
        }
    }
    file.flush()?;
    Ok(())
}

/// CSV trace of mean perturbation norms per attack iteration.
pub fn write_norms_csv(step_norms: &[PerturbationNorms], path: &Path) -> Result<()> {
    let mut out = String::from("step,l1_mean_abs,l2,linf\n");
    for (step, norms) in step_norms.iter().enumerate() {
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6}\n",
            step + 1,
            norms.l1_mean_abs,
            norms.l2,
            norms.linf
        ));
    }
    fs::write(path, out)?;
    Ok(())
}
