//! CSV readers and writers.
//!
//! Floating point values are written with 17 significant digits so that a
//! file read back reproduces the in-memory values bit for bit.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use strainwave_core::{ConvergenceTable, FitResult, SnapshotRecord, StressStrainDataset};

use crate::error::{CliError, Result};

pub const SNAPSHOT_HEADER: [&str; 6] = ["x", "sigma", "u", "v", "eps", "c"];
pub const SPACETIME_FILE: &str = "spacetime.csv";

/// Full-precision text form of a float.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn create(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(path, io),
            _ => unreachable!(),
        }
    } else {
        CliError::format(path, e.to_string())
    }
}

fn finish(path: &Path, w: csv::Writer<BufWriter<File>>) -> Result<()> {
    let mut inner = w.into_inner().map_err(|e| CliError::io(path, std::io::Error::other(e.to_string())))?;
    inner.flush().map_err(|e| CliError::io(path, e))
}

/// `snapshot_t0.250000.csv` for `t = 0.25`.
pub fn snapshot_file_name(t: f64) -> String {
    format!("snapshot_t{t:.6}.csv")
}

/// Write one snapshot into `dir` and return the file path.
pub fn write_snapshot(record: &SnapshotRecord, t: f64, dir: &Path) -> Result<PathBuf> {
    let path = dir.join(snapshot_file_name(t));
    let mut w = create(&path)?;
    w.write_record(SNAPSHOT_HEADER).map_err(|e| csv_error(&path, e))?;
    for i in 0..record.len() {
        let row = [record.x[i], record.sigma[i], record.u[i], record.v[i], record.eps[i], record.c[i]];
        w.write_record(row.iter().map(|v| fmt_f64(*v))).map_err(|e| csv_error(&path, e))?;
    }
    finish(&path, w)?;
    Ok(path)
}

/// Columns of a snapshot file in header order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SnapshotColumns {
    pub x: Vec<f64>,
    pub sigma: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub eps: Vec<f64>,
    pub c: Vec<f64>,
}

pub fn read_snapshot(path: &Path) -> Result<SnapshotColumns> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = r.headers().map_err(|e| csv_error(path, e))?;
    if header.iter().ne(SNAPSHOT_HEADER) {
        return Err(CliError::format(path, format!("unexpected header {:?}", header)));
    }
    let mut out = SnapshotColumns::default();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let vals = parse_row(&rec, 6).map_err(|m| CliError::format(path, format!("row {}: {m}", line + 2)))?;
        out.x.push(vals[0]);
        out.sigma.push(vals[1]);
        out.u.push(vals[2]);
        out.v.push(vals[3]);
        out.eps.push(vals[4]);
        out.c.push(vals[5]);
    }
    Ok(out)
}

fn parse_row(rec: &csv::StringRecord, n: usize) -> std::result::Result<Vec<f64>, String> {
    if rec.len() != n {
        return Err(format!("expected {n} columns, found {}", rec.len()));
    }
    rec.iter()
        .map(|f| f.trim().parse::<f64>().map_err(|_| format!("not a number: {f:?}")))
        .collect()
}

/// Long-format `(t, x, fields)` file collecting every snapshot of a run.
pub struct SpacetimeWriter {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl SpacetimeWriter {
    pub fn create(dir: &Path) -> Result<Self> {
        let path = dir.join(SPACETIME_FILE);
        let mut writer = create(&path)?;
        writer
            .write_record(["t", "x", "sigma", "u", "v", "eps", "c"])
            .map_err(|e| csv_error(&path, e))?;
        Ok(Self { path, writer })
    }

    pub fn append(&mut self, t: f64, record: &SnapshotRecord) -> Result<()> {
        for i in 0..record.len() {
            let row = [t, record.x[i], record.sigma[i], record.u[i], record.v[i], record.eps[i], record.c[i]];
            self.writer
                .write_record(row.iter().map(|v| fmt_f64(*v)))
                .map_err(|e| csv_error(&self.path, e))?;
        }
        Ok(())
    }

    pub fn finish(self) -> Result<PathBuf> {
        finish(&self.path, self.writer)?;
        Ok(self.path)
    }
}

/// Columns `resolution, dofs, l2_error, rate`; the first rate is empty.
pub fn write_convergence_table(table: &ConvergenceTable, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(["resolution", "dofs", "l2_error", "rate"]).map_err(|e| csv_error(path, e))?;
    for row in &table.rows {
        let rate = row.rate.map(fmt_f64).unwrap_or_default();
        w.write_record([fmt_f64(row.resolution), row.dofs.to_string(), fmt_f64(row.l2_error), rate])
            .map_err(|e| csv_error(path, e))?;
    }
    finish(path, w)
}

/// Two-column `(stress, strain)` data. A non-numeric first row is taken as
/// a header; lines starting with `#` are skipped. Columns are separated by
/// commas or, in files without commas, by any whitespace.
pub fn read_dataset(path: &Path, label: &str) -> Result<StressStrainDataset> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let comma = text.contains(',');
    let normalized;
    let source = if comma {
        text.as_str()
    } else {
        normalized = text
            .lines()
            .map(|l| l.split_whitespace().collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join("\n");
        normalized.as_str()
    };
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(if comma { b',' } else { b' ' })
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(source.as_bytes());
    let mut points = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        match parse_row(&rec, 2) {
            Ok(v) => points.push((v[0], v[1])),
            Err(_) if i == 0 => continue,
            Err(m) => return Err(CliError::format(path, format!("record {}: {m}", i + 1))),
        }
    }
    StressStrainDataset::new(points, label).map_err(|e| CliError::format(path, e.to_string()))
}

pub fn write_dataset(data: &StressStrainDataset, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(["stress", "strain"]).map_err(|e| csv_error(path, e))?;
    for &(s, e) in data.points() {
        w.write_record([fmt_f64(s), fmt_f64(e)]).map_err(|err| csv_error(path, err))?;
    }
    finish(path, w)
}

/// One fit per row: `label, b, a, sse, r2, iterations, converged`.
pub fn write_fit_results(rows: &[(String, FitResult)], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(["label", "b", "a", "sse", "r2", "iterations", "converged"])
        .map_err(|e| csv_error(path, e))?;
    for (label, fit) in rows {
        w.write_record([
            label.clone(),
            fmt_f64(fit.b),
            fmt_f64(fit.a),
            fmt_f64(fit.sse),
            fmt_f64(fit.r2),
            fit.iterations.to_string(),
            fit.converged.to_string(),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    finish(path, w)
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use strainwave_core::{ConvergenceRow, StudyKind};

    fn record(n: usize) -> SnapshotRecord {
        let x: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let f = |k: f64| x.iter().map(|v| (k * v).sin() / 3.0 + 1e-300).collect::<Vec<_>>();
        SnapshotRecord {
            sigma: f(1.0),
            sigma_dot: f(2.0),
            u: f(3.0),
            v: f(4.0),
            eps: f(5.0),
            c: f(6.0),
            x,
        }
    }

    #[test]
    fn snapshot_roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let rec = record(33);
        let path = write_snapshot(&rec, 0.1, dir.path()).unwrap();
        assert!(path.ends_with("snapshot_t0.100000.csv"));
        let back = read_snapshot(&path).unwrap();
        for (a, b) in [(&back.x, &rec.x), (&back.sigma, &rec.sigma), (&back.u, &rec.u), (&back.v, &rec.v), (&back.eps, &rec.eps), (&back.c, &rec.c)] {
            assert_eq!(a.len(), b.len());
            assert!(a.iter().zip(b.iter()).all(|(p, q)| p.to_bits() == q.to_bits()));
        }
    }

    #[test]
    fn zero_record_has_m_plus_one_rows() {
        let dir = tempfile::tempdir().unwrap();
        let m = 16;
        let z = vec![0.0; m + 1];
        let rec = SnapshotRecord {
            x: (0..=m).map(|i| i as f64 / m as f64).collect(),
            sigma: z.clone(),
            sigma_dot: z.clone(),
            u: z.clone(),
            v: z.clone(),
            eps: z.clone(),
            c: vec![1.0; m + 1],
        };
        let back = read_snapshot(&write_snapshot(&rec, 0.0, dir.path()).unwrap()).unwrap();
        assert_eq!(back.x.len(), m + 1);
        assert!(back.sigma.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn distinct_times_give_distinct_names() {
        assert_ne!(snapshot_file_name(0.1), snapshot_file_name(0.2));
        assert_ne!(snapshot_file_name(1e-3), snapshot_file_name(2e-3));
        assert_eq!(snapshot_file_name(1.0), "snapshot_t1.000000.csv");
    }

    #[test]
    fn convergence_table_csv() {
        let dir = tempfile::tempdir().unwrap();
        let table = ConvergenceTable {
            kind: StudyKind::Spatial,
            rows: vec![
                ConvergenceRow { resolution: 16.0, dofs: 17, l2_error: 1e-3, rate: None },
                ConvergenceRow { resolution: 32.0, dofs: 33, l2_error: 2.5e-4, rate: Some(2.0) },
            ],
        };
        let path = dir.path().join("t.csv");
        write_convergence_table(&table, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "resolution,dofs,l2_error,rate");
        assert!(lines[1].ends_with(','));
        assert!(lines[2].starts_with("3.2000000000000000e1,33,"));
    }

    #[test]
    fn dataset_formats() {
        let dir = tempfile::tempdir().unwrap();
        let cases = [
            ("stress,strain\n0,0\n1,0.5\n2,0.7\n", 3),
            ("# comment\n0 0\n1   0.5\n\n2\t0.7\n3 0.8\n", 4),
            ("0\t0\n1\t0.5\n2\t0.7\n", 3),
        ];
        for (i, (text, n)) in cases.iter().enumerate() {
            let p = dir.path().join(format!("d{i}.txt"));
            std::fs::write(&p, text).unwrap();
            let d = read_dataset(&p, "x").unwrap();
            assert_eq!(d.len(), *n);
            assert_eq!(d.points()[1], (1.0, 0.5));
        }
        let bad = dir.path().join("bad.csv");
        std::fs::write(&bad, "0,0\n1,abc\n2,3\n").unwrap();
        assert_eq!(read_dataset(&bad, "x").unwrap_err().exit_code(), 4);
        let few = dir.path().join("few.csv");
        std::fs::write(&few, "0,0\n1,1\n").unwrap();
        assert!(read_dataset(&few, "x").is_err());
        let missing = dir.path().join("nope.csv");
        assert!(matches!(read_dataset(&missing, "x"), Err(CliError::Io { .. })));
    }

    #[test]
    fn dataset_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let d = strainwave_core::synthetic_dataset(2.0, 1.5, 20, 3.0, "g").unwrap();
        let p = dir.path().join("g.csv");
        write_dataset(&d, &p).unwrap();
        let back = read_dataset(&p, "g").unwrap();
        assert_eq!(back, d);
    }
}
