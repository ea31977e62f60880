//! Plot-ready CSV renderings. Numbers use Rust's shortest round-trip
//! decimal form; absent values are empty fields.

use super::bench::BenchReport;
use super::elbow::ElbowCurve;
use super::run::MetricsSummary;
use super::sweep::SweepTable;

pub const RESULTS_FIXED_COLUMNS: [&str; 6] = ["scheme", "axis_name", "axis_value", "user_mean_se", "sum_se", "se_stderr"];

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn gamma_column(g: f64) -> String {
    format!("op_gamma_{g}")
}

fn finish(mut w: csv::Writer<Vec<u8>>) -> String {
    w.flush().expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8 csv")
}

/// One row per scheme and axis value. `rows` pairs an optional axis value
/// with its summary; `axis_name` is `none` for single runs.
pub fn results_csv(axis_name: &str, rows: &[(Option<f64>, &MetricsSummary)]) -> String {
    let mut gammas: Vec<f64> = Vec::new();
    for (_, s) in rows {
        for o in s.schemes.iter().flat_map(|s| &s.outage) {
            if !gammas.iter().any(|g| g.to_bits() == o.gamma.to_bits()) {
                gammas.push(o.gamma);
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = RESULTS_FIXED_COLUMNS.iter().map(|c| c.to_string()).collect();
    header.extend(gammas.iter().map(|&g| gamma_column(g)));
    header.extend(["mean_peff".to_string(), "realizations".to_string()]);
    w.write_record(&header).expect("in-memory write");
    for (value, summary) in rows {
        for s in &summary.schemes {
            let mut record = vec![
                s.scheme.clone(),
                axis_name.to_string(),
                opt(*value),
                num(s.user_mean_se),
                num(s.sum_se),
                num(s.se_stderr),
            ];
            for g in &gammas {
                record.push(opt(s.outage.iter().find(|o| o.gamma.to_bits() == g.to_bits()).map(|o| o.probability)));
            }
            record.push(opt(s.mean_peff));
            record.push(summary.realizations.to_string());
            w.write_record(&record).expect("in-memory write");
        }
    }
    finish(w)
}

pub fn run_csv(summary: &MetricsSummary) -> String {
    results_csv("none", &[(None, summary)])
}

pub fn sweep_csv(table: &SweepTable) -> String {
    let rows: Vec<(Option<f64>, &MetricsSummary)> = table.points.iter().map(|p| (Some(p.value), &p.summary)).collect();
    results_csv(table.axis.as_str(), &rows)
}

pub fn elbow_csv(curve: &ElbowCurve) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["removedCount", "meanLambda_dB"]).expect("in-memory write");
    for (k, l) in curve.mean_lambda_db.iter().enumerate() {
        w.write_record([k.to_string(), num(*l)]).expect("in-memory write");
    }
    finish(w)
}

pub fn bench_csv(report: &BenchReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scheme", "median_ms", "mean_ms", "min_ms", "runs", "mean_selected_ports", "fast_over_naive"])
        .expect("in-memory write");
    for r in &report.rows {
        w.write_record([
            r.scheme.clone(),
            num(r.median_ms),
            num(r.mean_ms),
            num(r.min_ms),
            r.runs.to_string(),
            num(r.mean_selected_ports),
            num(report.fast_over_naive),
        ])
        .expect("in-memory write");
    }
    finish(w)
}
