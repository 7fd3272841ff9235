use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{BenchError, Result};

/// Tabulated trajectory on a fixed grid, one row per time.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTrajectory {
    /// Problem named by a `# problem:` comment, if present.
    pub problem: Option<String>,
    pub times: Vec<f64>,
    pub states: DMatrix<f64>,
    /// Comment lines with the leading `#` stripped.
    pub comments: Vec<String>,
}

impl ReferenceTrajectory {
    pub fn dim(&self) -> usize {
        self.states.ncols()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Reads a CSV with header `t,u1,..,um`; lines starting with `#` are
    /// comments.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Self::parse(&text).map_err(|msg| BenchError::format(path, msg))
    }

    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let comments: Vec<String> = text
            .lines()
            .filter_map(|l| l.strip_prefix('#'))
            .map(|l| l.trim().to_string())
            .collect();
        let problem = comments
            .iter()
            .find_map(|c| c.strip_prefix("problem:"))
            .map(|p| p.trim().to_string());

        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = rdr.headers().map_err(|e| e.to_string())?.clone();
        if header.len() < 2 || &header[0] != "t" {
            return Err("header must be t,u1,..,um".into());
        }
        for (k, h) in header.iter().enumerate().skip(1) {
            if h != format!("u{k}") {
                return Err(format!("column {} is named {h:?}, expected u{k}", k + 1));
            }
        }
        let m = header.len() - 1;

        let mut times = Vec::new();
        let mut values = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| e.to_string())?;
            if rec.len() != m + 1 {
                return Err(format!("row {} has {} fields, expected {}", row + 1, rec.len(), m + 1));
            }
            for (k, field) in rec.iter().enumerate() {
                let v: f64 = field
                    .parse()
                    .map_err(|_| format!("row {}: cannot parse {field:?}", row + 1))?;
                if !v.is_finite() {
                    return Err(format!("row {}: non-finite value", row + 1));
                }
                if k == 0 {
                    if let Some(&last) = times.last() {
                        if v <= last {
                            return Err(format!("row {}: times must increase strictly", row + 1));
                        }
                    }
                    times.push(v);
                } else {
                    values.push(v);
                }
            }
        }
        if times.is_empty() {
            return Err("no data rows".into());
        }
        let states = DMatrix::from_row_slice(times.len(), m, &values);
        Ok(Self {
            problem,
            times,
            states,
            comments,
        })
    }

    /// Rows with `t` inside `[t0, t1]`.
    pub fn restrict(&self, (t0, t1): (f64, f64)) -> Self {
        let keep: Vec<usize> = (0..self.len()).filter(|&g| self.times[g] >= t0 && self.times[g] <= t1).collect();
        Self {
            problem: self.problem.clone(),
            times: keep.iter().map(|&g| self.times[g]).collect(),
            states: self.states.select_rows(keep.iter()),
            comments: self.comments.clone(),
        }
    }
}
