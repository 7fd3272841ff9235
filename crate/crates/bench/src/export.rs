use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use pirpnn_core::Trajectory;

use crate::error::{BenchError, Result};
use crate::reference::ReferenceTrajectory;
use crate::run::ErrorReport;
use crate::sweep::{SweepCell, SweepResult};

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| BenchError::io(path, e))
}

/// `t,u1,..,um` table with `{:.17e}` values, preceded by `# ` comments.
pub fn trajectory_csv(times: &[f64], states: &DMatrix<f64>, comments: &[String]) -> Result<String> {
    if states.nrows() != times.len() {
        return Err(BenchError::Contract(format!(
            "{} times but {} state rows",
            times.len(),
            states.nrows()
        )));
    }
    let mut s = String::new();
    for c in comments {
        let _ = writeln!(s, "# {c}");
    }
    s.push('t');
    for k in 1..=states.ncols() {
        let _ = write!(s, ",u{k}");
    }
    s.push('\n');
    for (g, t) in times.iter().enumerate() {
        let _ = write!(s, "{t:.17e}");
        for k in 0..states.ncols() {
            let _ = write!(s, ",{:.17e}", states[(g, k)]);
        }
        s.push('\n');
    }
    Ok(s)
}

pub fn write_trajectory_csv(path: impl AsRef<Path>, times: &[f64], states: &DMatrix<f64>, comments: &[String]) -> Result<()> {
    write(path.as_ref(), &trajectory_csv(times, states, comments)?)
}

/// Evaluates `traj` on `times` and writes it as CSV.
pub fn export_dense(path: impl AsRef<Path>, traj: &Trajectory, times: &[f64], comments: &[String]) -> Result<()> {
    let states = traj.dense_output(times)?;
    write_trajectory_csv(path, times, &states, comments)
}

pub fn read_trajectory_csv(path: impl AsRef<Path>) -> Result<ReferenceTrajectory> {
    ReferenceTrajectory::read(path)
}

pub fn write_report_json(path: impl AsRef<Path>, report: &ErrorReport) -> Result<()> {
    let text = serde_json::to_string_pretty(report).map_err(|e| BenchError::Input(e.to_string()))?;
    write(path.as_ref(), &(text + "\n"))
}

pub fn read_report_json(path: impl AsRef<Path>) -> Result<ErrorReport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| BenchError::format(path, e.to_string()))
}

/// Columns `c,N,score,time_s`; failed cells have an empty score.
pub fn sweep_csv(result: &SweepResult) -> String {
    let mut s = String::from("c,N,score,time_s\n");
    for cell in &result.cells {
        let score = cell.score.map(|v| format!("{v:.17e}")).unwrap_or_default();
        let _ = writeln!(s, "{:.17e},{},{score},{:.17e}", cell.c, cell.kernels, cell.time_s);
    }
    s
}

pub fn write_sweep_csv(path: impl AsRef<Path>, result: &SweepResult) -> Result<()> {
    write(path.as_ref(), &sweep_csv(result))
}

/// Reads the cells written by [`write_sweep_csv`]. Bias, variance and
/// failure reasons are not stored in the CSV and come back empty.
pub fn read_sweep_csv(path: impl AsRef<Path>) -> Result<Vec<SweepCell>> {
    let path = path.as_ref();
    let bad = |msg: String| BenchError::format(path, msg);
    let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?;
    if header.iter().collect::<Vec<_>>() != ["c", "N", "score", "time_s"] {
        return Err(bad("header must be c,N,score,time_s".into()));
    }
    let mut cells = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let num = |i: usize| rec[i].parse::<f64>().map_err(|_| bad(format!("cannot parse {:?}", &rec[i])));
        let score = if rec[2].is_empty() { None } else { Some(num(2)?) };
        cells.push(SweepCell {
            c: num(0)?,
            kernels: rec[1].parse().map_err(|_| bad(format!("cannot parse {:?}", &rec[1])))?,
            score,
            bias: None,
            variance: None,
            time_s: num(3)?,
            failure: if score.is_none() { Some(String::new()) } else { None },
        });
    }
    Ok(cells)
}
