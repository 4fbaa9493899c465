//! CSV and JSON rendering. Both are pure functions of the report minus its
//! wall time, so identical inputs give byte-identical files.

use std::fmt::Write as _;

use serde::Serialize;

use crate::config::{Engine, Format, Mode};
use crate::run::{Component, Report};

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Csv => csv(report),
        Format::Json => json(report),
    }
}

fn csv(report: &Report) -> String {
    let mut s = String::new();
    if let Some(c) = &report.comparison {
        s.push_str("k,numeric,analytic,abs_diff\n");
        for &(k, a, b) in &c.rows {
            let _ = writeln!(s, "{k},{a:.16e},{b:.16e},{:.16e}", (a - b).abs());
        }
    } else if let Some(p) = &report.probabilities {
        s.push_str("k,probability\n");
        for (k, v) in p {
            let _ = writeln!(s, "{k},{v:.16e}");
        }
    } else if let Some(comps) = &report.components {
        s.push_str(&components_csv(comps));
    }
    s
}

pub fn components_csv(comps: &[Component]) -> String {
    let mut s = String::from("kind,weight,lambda_abs2,phi_abs2,mean_per_step,mean,spread\n");
    for c in comps {
        let _ = writeln!(
            s,
            "{:?},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            c.kind, c.weight, c.lambda_abs2, c.phi_abs2, c.mean_per_step, c.mean, c.spread
        );
    }
    s
}

#[derive(Serialize)]
struct Row {
    k: i64,
    probability: f64,
}

#[derive(Serialize)]
struct CompareRow {
    k: i64,
    numeric: f64,
    analytic: f64,
    abs_diff: f64,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    mode: Mode,
    n: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    engine: Option<Engine>,
    #[serde(skip_serializing_if = "Option::is_none")]
    probabilities: Option<Vec<Row>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<Vec<CompareRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    components: Option<&'a [Component]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    discrepancy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pass: Option<bool>,
}

fn json(report: &Report) -> String {
    let c = report.comparison.as_ref();
    let doc = JsonReport {
        mode: report.mode,
        n: report.n,
        engine: report.engine,
        probabilities: match (&report.probabilities, c) {
            (Some(p), None) => Some(
                p.iter()
                    .map(|(&k, &probability)| Row { k, probability })
                    .collect(),
            ),
            _ => None,
        },
        comparison: c.map(|c| {
            c.rows
                .iter()
                .map(|&(k, numeric, analytic)| CompareRow {
                    k,
                    numeric,
                    analytic,
                    abs_diff: (numeric - analytic).abs(),
                })
                .collect()
        }),
        components: report.components.as_deref(),
        discrepancy: c.map(|c| c.discrepancy),
        tolerance: c.map(|c| c.tolerance),
        pass: c.map(|c| c.passed()),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

/// Human-readable run summary; the only place wall time appears.
pub fn summary(report: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "mode: {}", report.mode);
    let _ = writeln!(s, "n: {}", report.n);
    if let Some(e) = report.engine {
        let _ = writeln!(s, "engine: {e}");
    }
    if let Some(t) = report.total_trace {
        let _ = writeln!(s, "total trace: {t:.16e}");
    }
    let _ = writeln!(s, "wall time: {:.3} ms", report.elapsed.as_secs_f64() * 1e3);
    if let Some(comps) = &report.components {
        let _ = writeln!(s, "components:");
        for c in comps {
            let _ = writeln!(
                s,
                "  {:?} weight {:.6} mean {:.6} spread {:.6} (|λ|² {:.6}, |φ|² {:.6})",
                c.kind, c.weight, c.mean, c.spread, c.lambda_abs2, c.phi_abs2
            );
        }
    }
    if let Some(c) = &report.comparison {
        let verdict = if c.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(
            s,
            "discrepancy: {:.3e} (tolerance {:.1e}) {verdict}",
            c.discrepancy, c.tolerance
        );
    }
    s
}
