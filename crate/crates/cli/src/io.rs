//! CSV layouts and output-directory handling.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use morpd::moea::{dominates, Point, SolutionRow};
use morpd::Case;

/// `ploss_mw, vd, violation, vg_1.., tap_1.., shunt_1..`
pub fn front_header(case: &Case) -> Vec<String> {
    let mut h: Vec<String> = ["ploss_mw", "vd", "violation"].iter().map(|s| s.to_string()).collect();
    h.extend((1..=case.generators.len()).map(|i| format!("vg_{i}")));
    h.extend((1..=case.transformers.len()).map(|i| format!("tap_{i}")));
    h.extend((1..=case.shunts.len()).map(|i| format!("shunt_{i}")));
    h
}

fn row_fields(r: &SolutionRow) -> Vec<String> {
    let mut f = vec![r.p_loss.to_string(), r.vd.to_string(), r.violation.to_string()];
    f.extend(r.controls.iter().map(|v| v.to_string()));
    f
}

fn to_bytes(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| anyhow!("csv buffer: {e}"))
}

/// Rejects a front in which one row dominates another.
pub fn check_nondominated(rows: &[SolutionRow]) -> Result<()> {
    let pts: Vec<Point<f64>> = rows
        .iter()
        .map(|r| Point {
            objectives: [r.p_loss, r.vd],
            violation: r.violation,
        })
        .collect();
    for (i, a) in pts.iter().enumerate() {
        for (j, b) in pts.iter().enumerate() {
            if dominates(a, b) {
                bail!("front row {} dominates row {}", i + 1, j + 1);
            }
        }
    }
    Ok(())
}

pub fn front_csv(case: &Case, rows: &[SolutionRow]) -> Result<Vec<u8>> {
    check_nondominated(rows)?;
    to_bytes(&front_header(case), rows.iter().map(row_fields))
}

/// One row per preference cluster: cluster number (1-based), its name,
/// priority membership, then the front columns.
pub fn bcs_csv(case: &Case, rows: &[(usize, f64, SolutionRow)], n_clusters: usize) -> Result<Vec<u8>> {
    let mut header: Vec<String> = vec!["cluster".into(), "preference".into(), "priority".into()];
    header.extend(front_header(case));
    to_bytes(
        &header,
        rows.iter().map(|(c, p, r)| {
            let mut f = vec![(c + 1).to_string(), preference_name(*c, n_clusters), p.to_string()];
            f.extend(row_fields(r));
            f
        }),
    )
}

pub fn preference_name(cluster: usize, n_clusters: usize) -> String {
    match (cluster, n_clusters) {
        (_, 1) => "compromise".into(),
        (0, _) => "economy".into(),
        (c, n) if c + 1 == n => "security".into(),
        (c, _) => format!("intermediate_{c}"),
    }
}

pub fn points_csv(points: &[[f64; 2]]) -> Result<Vec<u8>> {
    to_bytes(
        &["ploss_mw".to_string(), "vd".to_string()],
        points.iter().map(|p| vec![p[0].to_string(), p[1].to_string()]),
    )
}

/// Reads the `ploss_mw` and `vd` columns of any front-like CSV.
pub fn read_points(path: &Path) -> Result<Vec<[f64; 2]>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| anyhow!("{}: no `{name}` column", path.display()))
    };
    let (ip, iv) = (col("ploss_mw")?, col("vd")?);
    let mut out = Vec::new();
    for (n, rec) in r.records().enumerate() {
        let rec = rec.with_context(|| format!("{}: row {}", path.display(), n + 1))?;
        let get = |i: usize| -> Result<f64> {
            let s = rec.get(i).unwrap_or("").trim();
            let v: f64 = s
                .parse()
                .with_context(|| format!("{}: row {}: `{s}` is not a number", path.display(), n + 1))?;
            if !v.is_finite() {
                bail!("{}: row {}: non-finite value", path.display(), n + 1);
            }
            Ok(v)
        };
        out.push([get(ip)?, get(iv)?]);
    }
    if out.is_empty() {
        bail!("{}: no data rows", path.display());
    }
    Ok(out)
}

/// Control values from a file. A file with a header row is read as a front
/// or BCS CSV and row `row` (1-based) supplies the columns after
/// `violation`; otherwise every number in the file is taken in order.
pub fn read_controls(path: &Path, row: usize) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let first = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .unwrap_or("");
    if first.chars().any(|c| c.is_ascii_alphabetic() && c != 'e' && c != 'E') {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let headers = r.headers()?.clone();
        let start = headers
            .iter()
            .position(|h| h.trim() == "violation")
            .ok_or_else(|| anyhow!("{}: header has no `violation` column", path.display()))?
            + 1;
        let rec = r
            .records()
            .nth(row.checked_sub(1).ok_or_else(|| anyhow!("rows are numbered from 1"))?)
            .ok_or_else(|| anyhow!("{}: no row {row}", path.display()))??;
        return rec
            .iter()
            .skip(start)
            .map(|s| parse_number(s, path))
            .collect();
    }
    parse_list(&text).with_context(|| format!("reading {}", path.display()))
}

fn parse_number(s: &str, path: &Path) -> Result<f64> {
    s.trim()
        .parse()
        .with_context(|| format!("{}: `{}` is not a number", path.display(), s.trim()))
}

/// Numbers separated by commas and/or whitespace; `#` starts a comment.
pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            out.push(tok.parse().with_context(|| format!("`{tok}` is not a number"))?);
        }
    }
    if out.is_empty() {
        bail!("no control values given");
    }
    Ok(out)
}

/// Writes every file or none: on failure the files already written are
/// removed again.
pub fn write_all(dir: &Path, files: &[(&str, Vec<u8>)]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written: Vec<PathBuf> = Vec::new();
    for (name, bytes) in files {
        let path = dir.join(name);
        if let Err(e) = fs::write(&path, bytes) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            let _ = fs::remove_file(&path);
            return Err(e).with_context(|| format!("writing {}", path.display()));
        }
        written.push(path);
    }
    Ok(written)
}
