//! CSV ingestion and serialization of draws and summaries.

use std::fs::File;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use sepqr_core::diagnostics::{ParameterSummary, PosteriorDraws};

use crate::error::{data, CliError, CliResult};

/// Columns selected from an input CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub y: DVector<f64>,
    /// Covariates in the requested order, without an intercept.
    pub x: DMatrix<f64>,
    pub smooth: Vec<Vec<f64>>,
}

/// Reads the response, covariate and smooth columns of a headed CSV.
///
/// Every referenced cell must parse as a finite number; the first bad cell is
/// reported by data row (1-based, header excluded) and column.
pub fn load_csv(path: &Path, response: &str, covariates: &[String], smooth: &[String]) -> CliResult<Dataset> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let header = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        .clone();
    let find = |name: &str| -> CliResult<usize> {
        match header.iter().position(|h| h == name) {
            Some(i) => Ok(i),
            None => data(format!("{}: no column `{name}` in header", path.display())),
        }
    };
    let wanted: Vec<&str> = std::iter::once(response)
        .chain(covariates.iter().map(String::as_str))
        .chain(smooth.iter().map(String::as_str))
        .collect();
    let idx = wanted.iter().map(|n| find(n)).collect::<CliResult<Vec<_>>>()?;

    let mut values: Vec<Vec<f64>> = vec![Vec::new(); wanted.len()];
    for (r, record) in reader.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| CliError::Data(format!("{}: row {row}: {e}", path.display())))?;
        for (k, &i) in idx.iter().enumerate() {
            let cell = record.get(i).unwrap_or("");
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => values[k].push(v),
                _ => {
                    return data(format!(
                        "{}: row {row}, column `{}`: `{cell}` is not a finite number",
                        path.display(),
                        wanted[k]
                    ))
                }
            }
        }
    }
    let t = values[0].len();
    if t == 0 {
        return data(format!("{}: no data rows", path.display()));
    }
    let p = covariates.len();
    let x = DMatrix::from_fn(t, p, |i, j| values[1 + j][i]);
    Ok(Dataset {
        y: DVector::from_vec(values[0].clone()),
        x,
        smooth: values.split_off(1 + p),
    })
}

/// Decimal form with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `tau` as it appears in output file names.
pub fn tau_tag(tau: f64) -> String {
    format!("tau{tau}")
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Data(format!("{}: {other:?}", path.display())),
    }
}

/// Writes a table of preformatted rows.
pub fn write_table(path: &Path, header: &[String], rows: &[Vec<String>]) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// `iteration, <parameters...>, log_likelihood`, one row per retained draw.
pub fn write_draws(path: &Path, draws: &PosteriorDraws) -> CliResult<()> {
    let mut header = vec!["iteration".to_string()];
    header.extend(draws.names.iter().cloned());
    header.push("log_likelihood".into());
    let first = draws.meta.burn_in + 1;
    let rows: Vec<Vec<String>> = (0..draws.len())
        .map(|i| {
            let mut row = vec![(first + i).to_string()];
            row.extend(draws.draws.row(i).iter().map(|&v| fmt_f64(v)));
            row.push(fmt_f64(draws.log_likelihood[i]));
            row
        })
        .collect();
    write_table(path, &header, &rows)
}

pub const SUMMARY_HEADER: [&str; 6] = ["parameter", "mean", "sd", "hpd_low", "hpd_high", "ess"];

pub fn summary_rows(summary: &[ParameterSummary]) -> Vec<Vec<String>> {
    summary
        .iter()
        .map(|s| {
            vec![
                s.name.clone(),
                fmt_f64(s.mean),
                fmt_f64(s.sd),
                fmt_f64(s.hpd_low),
                fmt_f64(s.hpd_high),
                fmt_f64(s.ess),
            ]
        })
        .collect()
}

pub fn write_summary(path: &Path, summary: &[ParameterSummary]) -> CliResult<()> {
    let header: Vec<String> = SUMMARY_HEADER.iter().map(|s| s.to_string()).collect();
    write_table(path, &header, &summary_rows(summary))
}

/// A draws file read back.
#[derive(Debug, Clone, PartialEq)]
pub struct DrawsTable {
    pub names: Vec<String>,
    pub iterations: Vec<u64>,
    pub draws: DMatrix<f64>,
    pub log_likelihood: Vec<f64>,
}

pub fn read_draws(path: &Path) -> CliResult<DrawsTable> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let header = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        .clone();
    let cols: Vec<&str> = header.iter().collect();
    if cols.len() < 3 || cols[0] != "iteration" || cols[cols.len() - 1] != "log_likelihood" {
        return data(format!(
            "{}: expected header `iteration, <parameters>, log_likelihood`",
            path.display()
        ));
    }
    let names: Vec<String> = cols[1..cols.len() - 1].iter().map(|s| s.to_string()).collect();
    let mut iterations = Vec::new();
    let mut flat = Vec::new();
    let mut log_likelihood = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| CliError::Data(format!("{}: row {row}: {e}", path.display())))?;
        let bad = |col: &str, cell: &str| {
            CliError::Data(format!("{}: row {row}, column `{col}`: cannot parse `{cell}`", path.display()))
        };
        iterations.push(record[0].parse::<u64>().map_err(|_| bad("iteration", &record[0]))?);
        for (j, cell) in record.iter().enumerate().skip(1) {
            let v: f64 = cell.parse().map_err(|_| bad(cols[j], cell))?;
            if j == cols.len() - 1 {
                log_likelihood.push(v);
            } else {
                flat.push(v);
            }
        }
    }
    let draws = DMatrix::from_row_slice(iterations.len(), names.len(), &flat);
    Ok(DrawsTable {
        names,
        iterations,
        draws,
        log_likelihood,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn three_rows() {
        let f = file("y,x1\n1,2\n3,4\n5,6\n");
        let d = load_csv(f.path(), "y", &["x1".into()], &[]).unwrap();
        assert_eq!(d.y.as_slice(), &[1.0, 3.0, 5.0]);
        assert_eq!(d.x.shape(), (3, 1));
        assert_eq!(d.x[(2, 0)], 6.0);
        assert!(d.smooth.is_empty());
    }

    #[test]
    fn column_order_follows_request() {
        let f = file("a,b,y,z\n1,2,3,4\n5,6,7,8\n");
        let d = load_csv(f.path(), "y", &["b".into(), "a".into()], &["z".into()]).unwrap();
        assert_eq!(d.x.row(1).iter().copied().collect::<Vec<_>>(), vec![6.0, 5.0]);
        assert_eq!(d.smooth, vec![vec![4.0, 8.0]]);
    }

    #[test]
    fn missing_column_is_named() {
        let f = file("x1,x2\n1,2\n");
        let e = load_csv(f.path(), "y", &["x1".into()], &[]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("`y`"), "{e}");
    }

    #[test]
    fn nan_cell_cites_the_row() {
        let f = file("y,x1\n1,2\n3,NaN\n5,6\n");
        let e = load_csv(f.path(), "y", &["x1".into()], &[]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("row 2, column `x1`"), "{e}");
        let f = file("y,x1\n1,2\n3,\n");
        assert!(load_csv(f.path(), "y", &["x1".into()], &[]).is_err());
        let f = file("y,x1\n1,2\n3,inf\n");
        assert!(load_csv(f.path(), "y", &["x1".into()], &[]).is_err());
    }

    #[test]
    fn unreferenced_columns_may_be_anything() {
        let f = file("y,note\n1,hello\n2,\n");
        let d = load_csv(f.path(), "y", &[], &[]).unwrap();
        assert_eq!(d.x.shape(), (2, 0));
    }

    #[test]
    fn missing_file_is_a_data_error() {
        let e = load_csv(Path::new("/nonexistent/x.csv"), "y", &[], &[]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn fmt_has_17_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.5), "-2.5000000000000000e0");
        assert_eq!(tau_tag(0.5), "tau0.5");
        assert_eq!(tau_tag(0.05), "tau0.05");
    }

    proptest! {
        #[test]
        fn fmt_round_trips(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}
