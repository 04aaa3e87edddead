use std::fs;
use std::io::Write as _;
use std::path::Path;

use super::config::RunConfig;
use super::experiment::{Experiment, Report};
use crate::diagnostics::{max_entropy_dissipation, AuxRow};
use crate::error::{Error, Result};

/// Shortest decimal that round-trips to the same `f64`.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn csv_columns(n_species: usize, n_laws: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=n_species).map(|i| format!("sup_u_{i}")));
    cols.extend((1..=n_species).map(|i| format!("mass_{i}")));
    cols.push("mass_total".into());
    cols.push("entropy".into());
    cols.extend((1..=n_laws).map(|k| format!("cons_law_{k}")));
    cols.extend(
        [
            "z_sup",
            "b_min",
            "b_max",
            "vd_consistency",
            "zvd_residual",
            "grad_vd_sup",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    cols
}

pub fn csv_header(n_species: usize, n_laws: usize) -> String {
    csv_columns(n_species, n_laws).join(",")
}

/// The trajectory table, one row per recorded snapshot.
pub fn render_csv(exp: &Experiment) -> Result<String> {
    let sys = &exp.system;
    let laws = sys.conservation_laws();
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Data(format!("CSV encoding failed: {e}"));
    w.write_record(csv_columns(sys.n_species(), laws.len()))
        .map_err(csv_err)?;
    for (k, snap) in exp.trajectory.snapshots.iter().enumerate() {
        let mut cells: Vec<String> = vec![num(snap.t)];
        cells.extend(snap.sup_norms.iter().map(|v| num(*v)));
        cells.extend(snap.masses.iter().map(|v| num(*v)));
        cells.push(num(snap.masses.iter().sum()));
        cells.push(opt(max_entropy_dissipation(sys, &snap.state)?));
        for w in &laws {
            cells.push(num(w.iter().zip(&snap.masses).map(|(a, m)| a * m).sum()));
        }
        match exp.aux_rows.get(k).filter(|r| r.t == snap.t) {
            Some(AuxRow {
                z_sup,
                b_min,
                b_max,
                vd_consistency,
                zvd_residual,
                grad_vd_sup,
                ..
            }) => {
                cells.push(num(*z_sup));
                cells.push(opt(*b_min));
                cells.push(opt(*b_max));
                cells.push(num(*vd_consistency));
                cells.push(num(*zvd_residual));
                cells.push(num(*grad_vd_sup));
            }
            None => cells.extend(std::iter::repeat_n(String::new(), 6)),
        }
        w.write_record(&cells).map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Data(format!("CSV encoding failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV cells are ASCII"))
}

pub fn render_report(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// Write through a sibling temporary file and rename it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::io(path, std::io::Error::other("output path has no file name")))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(contents).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

/// Write the CSV and report named in the configuration.
pub fn emit_outputs(exp: &Experiment, cfg: &RunConfig) -> Result<()> {
    let csv = render_csv(exp)?;
    write_atomic(&cfg.output.csv, csv.as_bytes())?;
    write_atomic(&cfg.output.report, render_report(&exp.report).as_bytes())
}
