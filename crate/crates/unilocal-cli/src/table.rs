//! One row per report: problem, base, transformer, mean rounds at each size, fitted C.

use std::collections::BTreeSet;
use std::path::PathBuf;

use anyhow::{Context, Result};

use crate::run::Summary;

fn load(paths: &[PathBuf]) -> Result<Vec<Summary>> {
    paths
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))
        })
        .collect()
}

fn cells(reports: &[Summary]) -> (Vec<String>, Vec<Vec<String>>) {
    let sizes: BTreeSet<usize> = reports.iter().flat_map(|s| s.per_size.iter().map(|z| z.n)).collect();
    let mut header: Vec<String> = ["name", "problem", "base", "transformer", "family"].map(String::from).to_vec();
    header.extend(sizes.iter().map(|n| format!("n={n}")));
    header.push("fitted_c".into());
    header.push("c_spread".into());
    let fmt = |x: Option<f64>, prec: usize| x.map_or_else(|| "-".to_string(), |v| format!("{v:.prec$}"));
    let rows = reports
        .iter()
        .map(|s| {
            let mut r = vec![s.name.clone(), s.problem.clone(), s.base.clone(), s.transformer.clone(), s.family.clone()];
            for n in &sizes {
                r.push(fmt(s.per_size.iter().find(|z| z.n == *n && z.runs > 0).map(|z| z.mean_rounds), 1));
            }
            r.push(fmt(s.fitted_c, 3));
            r.push(fmt(s.fitted_c_spread, 2));
            r
        })
        .collect();
    (header, rows)
}

pub fn render(paths: &[PathBuf], csv_out: bool) -> Result<String> {
    let (header, rows) = cells(&load(paths)?);
    if csv_out {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&header)?;
        for r in &rows {
            w.write_record(r)?;
        }
        return Ok(String::from_utf8(w.into_inner()?)?);
    }
    let mut width: Vec<usize> = header.iter().map(String::len).collect();
    for r in &rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: &[String]| {
        let parts: Vec<String> = cells.iter().zip(&width).map(|(c, w)| format!("{c:<w$}")).collect();
        parts.join("  ").trim_end().to_string() + "\n"
    };
    Ok(std::iter::once(&header).chain(&rows).map(|r| line(r)).collect())
}
