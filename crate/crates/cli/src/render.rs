use neighborly_core::bounds::BoundCertificate;
use neighborly_core::config_rank::{Configuration, GenericitySummary, TauReport};
use neighborly_core::moment::{SupportCertificate, SweepSummary};
use neighborly_core::sw_classes::{PairingReport, R2ModelCheck};
use serde::Serialize;

use crate::args::{Format, Span};
use crate::Document;

/// Flat rows for CSV. Markdown uses `md` when set, otherwise the same rows.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub md: Option<(Vec<String>, Vec<Vec<String>>)>,
}

pub fn render(format: Format, doc: &Document, table: &Table) -> anyhow::Result<String> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(doc)?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&table.headers)?;
            for row in &table.rows {
                w.write_record(row)?;
            }
            Ok(String::from_utf8(w.into_inner()?)?)
        }
        Format::Md => {
            let (headers, rows) = table
                .md
                .clone()
                .unwrap_or_else(|| (table.headers.clone(), table.rows.clone()));
            let mut s = markdown(&headers, &rows);
            if !doc.findings.is_empty() {
                s.push_str("\nFindings:\n\n");
                for f in &doc.findings {
                    s.push_str(&format!("- [{}] {}: {}\n", f.kind, f.subject, f.detail));
                }
            }
            Ok(s)
        }
    }
}

fn markdown(headers: &[String], rows: &[Vec<String>]) -> String {
    let line = |cells: &[String]| format!("| {} |\n", cells.join(" | "));
    let mut s = line(headers);
    s.push_str(&line(&vec!["---".to_string(); headers.len()]));
    for row in rows {
        s.push_str(&line(row));
    }
    s
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

/// Shortest round-trip form, switching to exponent notation far from 1.
fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e6).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn kebab<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|x| x.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn strings<const N: usize>(cells: [&str; N]) -> Vec<String> {
    cells.iter().map(|s| s.to_string()).collect()
}

pub fn bounds_table(certs: &[BoundCertificate], ks: Span, rs: Span) -> Table {
    let slots = certs.iter().map(|c| c.hypotheses.len()).max().unwrap_or(0);
    let mut headers = strings([
        "k",
        "r",
        "manifold",
        "source",
        "applicable",
        "strict_lower_bound",
        "implied_min_dimension",
        "exact",
        "scope",
    ]);
    for i in 1..=slots {
        headers.push(format!("hypothesis_{i}"));
        headers.push(format!("hypothesis_{i}_satisfied"));
    }
    headers.push("pairing_value".into());
    let rows = certs
        .iter()
        .map(|c| {
            let mut row = vec![
                c.k.to_string(),
                c.r.to_string(),
                kebab(&c.manifold),
                kebab(&c.chosen.unwrap_or(c.source)),
                c.applicable.to_string(),
                opt(&c.strict_lower_bound),
                opt(&c.implied_min_dimension),
                c.exact.to_string(),
                kebab(&c.scope),
            ];
            for i in 0..slots {
                match c.hypotheses.get(i) {
                    Some(h) => row.extend([h.condition.clone(), h.satisfied.to_string()]),
                    None => row.extend([String::new(), String::new()]),
                }
            }
            row.push(
                c.pairing
                    .as_ref()
                    .map(|p| (p.value as u8).to_string())
                    .unwrap_or_default(),
            );
            row
        })
        .collect();
    // k down, r across, entries are the implied minimum dimension
    let mut md_headers = vec!["k \\ r".to_string()];
    md_headers.extend(rs.iter().map(|r| r.to_string()));
    let md_rows = ks
        .iter()
        .map(|k| {
            let mut row = vec![k.to_string()];
            row.extend(rs.iter().map(|r| {
                certs
                    .iter()
                    .find(|c| c.k == k && c.r == r)
                    .map(|c| opt(&c.implied_min_dimension))
                    .unwrap_or_default()
            }));
            row
        })
        .collect();
    Table {
        headers,
        rows,
        md: Some((md_headers, md_rows)),
    }
}

pub fn pairing_table(reports: &[PairingReport]) -> Table {
    Table {
        headers: strings([
            "k",
            "r",
            "target_degree",
            "stated_degree",
            "value",
            "value_rewriting",
            "value_pushforward",
            "agrees",
        ]),
        rows: reports
            .iter()
            .map(|p| {
                vec![
                    p.k.to_string(),
                    p.r.to_string(),
                    p.target_degree.to_string(),
                    p.stated_degree.to_string(),
                    (p.value as u8).to_string(),
                    (p.value_rewriting as u8).to_string(),
                    (p.value_pushforward as u8).to_string(),
                    p.agrees.to_string(),
                ]
            })
            .collect(),
        md: None,
    }
}

pub fn r2_table(checks: &[R2ModelCheck]) -> Table {
    Table {
        headers: strings(["k", "power_of_two", "power_identity", "top_pairing"]),
        rows: checks
            .iter()
            .map(|c| {
                vec![
                    c.k.to_string(),
                    c.k.is_power_of_two().to_string(),
                    (c.power_identity as u8).to_string(),
                    (c.top_pairing as u8).to_string(),
                ]
            })
            .collect(),
        md: None,
    }
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(" ")
}

pub fn moment_table(certs: &[(&str, SupportCertificate)], sweeps: &[SweepSummary]) -> Table {
    let headers = strings([
        "kind",
        "r",
        "angles",
        "pass",
        "touch_residuals",
        "derivative_residuals",
        "curvature_margins",
        "min_off_touch",
        "grid_size",
        "trials",
        "delta",
        "seed",
        "passes",
    ]);
    let mut rows: Vec<Vec<String>> = certs
        .iter()
        .map(|(kind, c)| {
            vec![
                kind.to_string(),
                c.angles.len().to_string(),
                join(&c.angles),
                c.pass.to_string(),
                num(c.touch_residuals),
                num(c.derivative_residuals),
                num(c.curvature_margins),
                opt_num(c.min_off_touch),
                c.grid_size.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ]
        })
        .collect();
    for s in sweeps {
        rows.push(vec![
            "sweep".into(),
            s.config.r.to_string(),
            String::new(),
            (s.passes == s.config.trials).to_string(),
            opt_num(s.worst_touch_residual),
            opt_num(s.worst_derivative_residual),
            opt_num(s.worst_curvature_margin),
            opt_num(s.worst_min_off_touch),
            s.config.grid_n.to_string(),
            s.config.trials.to_string(),
            num(s.config.delta),
            s.config.seed.to_string(),
            s.passes.to_string(),
        ]);
    }
    Table {
        headers,
        rows,
        md: None,
    }
}

pub fn tau_table(reports: &[TauReport]) -> Table {
    Table {
        headers: strings([
            "k",
            "r",
            "rank",
            "required",
            "in_omega",
            "condition",
            "rank_tolerance",
        ]),
        rows: reports
            .iter()
            .map(|t| {
                vec![
                    t.k.to_string(),
                    t.r.to_string(),
                    t.rank.to_string(),
                    t.required.to_string(),
                    t.in_omega.to_string(),
                    opt_num(t.condition),
                    num(t.rank_tolerance),
                ]
            })
            .collect(),
        md: None,
    }
}

pub fn sample_table(s: &GenericitySummary) -> Table {
    Table {
        headers: strings([
            "r",
            "trials",
            "seed",
            "full_rank",
            "fraction_full_rank",
            "omega_hits",
            "worst_condition",
        ]),
        rows: vec![vec![
            s.r.to_string(),
            s.trials.to_string(),
            s.seed.to_string(),
            s.full_rank.to_string(),
            num(s.fraction_full_rank),
            s.omega_hits.len().to_string(),
            opt_num(s.worst_condition),
        ]],
        md: None,
    }
}

pub fn config_table(c: &Configuration) -> Table {
    let mut headers = vec!["label".to_string()];
    headers.extend((1..=c.k).map(|i| format!("x{i}")));
    headers.push("min_distance".into());
    let labels = c.labels.clone().unwrap_or_default();
    let rows = c
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut row = vec![labels.get(i).cloned().unwrap_or_else(|| i.to_string())];
            row.extend(p.iter().map(|&x| num(x)));
            row.push(num(c.min_distance));
            row
        })
        .collect();
    Table {
        headers,
        rows,
        md: None,
    }
}
