//! CSV import and export.
//!
//! Matrices and grid functions share one layout: a first line `n=<N>`, then
//! `N` rows (comma-separated for matrices, one value per row for functions).
//! Paths are written as `t,state` rows: the initial state at `t = 0`, one row
//! per jump, and a closing row at the horizon.

use std::fs::File;
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::gibbs::GibbsModel;
use crate::grid::GridFunction;
use crate::kernels::KernelModel;
use crate::paths::CadlagPath;
use crate::semigroup::GridOperator;

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path)?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::Parse(format!("{what}: cannot parse '{s}' as a number")))
}

fn read_sized_rows(path: &Path) -> Result<(usize, Vec<Vec<f64>>)> {
    let mut rdr = reader(path)?;
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| Error::Parse(format!("{}: empty file", path.display())))??;
    let n = header
        .get(0)
        .and_then(|h| h.strip_prefix("n="))
        .and_then(|v| v.trim().parse::<usize>().ok())
        .ok_or_else(|| Error::Parse(format!("{}: first line must be n=<N>", path.display())))?;
    let mut rows = Vec::with_capacity(n);
    for rec in records {
        let rec = rec?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        rows.push(
            rec.iter()
                .map(|s| parse_f64(s, &path.display().to_string()))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    Ok((n, rows))
}

/// Reads an `N x N` matrix.
pub fn read_matrix_csv(path: &Path) -> Result<Array2<f64>> {
    let (n, rows) = read_sized_rows(path)?;
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse(format!(
            "{}: expected {n} rows of {n} values",
            path.display()
        )));
    }
    Ok(Array2::from_shape_fn((n, n), |(i, j)| rows[i][j]))
}

/// Reads a tabulated kernel.
pub fn read_kernel_csv(path: &Path) -> Result<KernelModel> {
    KernelModel::tabulated(read_matrix_csv(path)?)
}

/// Reads a grid function.
pub fn read_grid_function_csv(path: &Path) -> Result<GridFunction> {
    let (n, rows) = read_sized_rows(path)?;
    if rows.len() != n || rows.iter().any(|r| r.len() != 1) {
        return Err(Error::Parse(format!(
            "{}: expected {n} rows with one value each",
            path.display()
        )));
    }
    Ok(GridFunction::new(rows.iter().map(|r| r[0]).collect::<Array1<f64>>()))
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    Ok(csv::WriterBuilder::new().flexible(true).from_path(path)?)
}

pub fn write_matrix_csv(path: &Path, m: &Array2<f64>) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([format!("n={}", m.nrows())])?;
    for row in m.rows() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_grid_function_csv(path: &Path, f: &GridFunction) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([format!("n={}", f.len())])?;
    for v in f.values() {
        w.write_record([v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `<prefix>_integral.csv` and `<prefix>_atomic.csv` into `dir`.
pub fn write_operator_csv(dir: &Path, prefix: &str, op: &GridOperator) -> Result<Vec<String>> {
    let integral = format!("{prefix}_integral.csv");
    let atomic = format!("{prefix}_atomic.csv");
    write_matrix_csv(&dir.join(&integral), op.integral_part())?;
    write_grid_function_csv(&dir.join(&atomic), op.atomic_diag())?;
    Ok(vec![integral, atomic])
}

/// Writes `gibbs_gamma.csv`, `gibbs_q_kernel.csv` and `gibbs_pi.csv` into `dir`.
pub fn write_gibbs_csv(dir: &Path, gm: &GibbsModel) -> Result<Vec<String>> {
    let names = ["gibbs_gamma.csv", "gibbs_q_kernel.csv", "gibbs_pi.csv"];
    write_grid_function_csv(&dir.join(names[0]), &gm.gamma)?;
    write_matrix_csv(&dir.join(names[1]), &gm.q_kernel)?;
    write_grid_function_csv(&dir.join(names[2]), &gm.pi)?;
    Ok(names.iter().map(|s| s.to_string()).collect())
}

pub fn write_path_csv(path: &Path, w: &CadlagPath) -> Result<()> {
    let mut out = csv::Writer::from_path(path)?;
    out.write_record(["t", "state"])?;
    out.write_record([0.0.to_string(), w.x0().to_string()])?;
    for (t, x) in w.jump_times().iter().zip(w.states()) {
        out.write_record([t.to_string(), x.to_string()])?;
    }
    out.write_record([w.horizon().to_string(), w.final_state().to_string()])?;
    out.flush()?;
    Ok(())
}

pub fn read_path_csv(path: &Path) -> Result<CadlagPath> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let name = path.display().to_string();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::Parse(format!("{name}: expected t,state rows")));
        }
        rows.push((parse_f64(&rec[0], &name)?, parse_f64(&rec[1], &name)?));
    }
    if rows.len() < 2 || rows[0].0 != 0.0 {
        return Err(Error::Parse(format!(
            "{name}: need a row at t = 0 and a closing row at the horizon"
        )));
    }
    let (horizon, _) = rows[rows.len() - 1];
    let jumps = &rows[1..rows.len() - 1];
    CadlagPath::new(
        rows[0].1,
        jumps.iter().map(|r| r.0).collect(),
        jumps.iter().map(|r| r.1).collect(),
        horizon,
    )
}
