use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use hsaa::anderson::{ConvergenceRecord, IterationRow, Termination};

/// One solver's history under a file-safe label.
pub struct Run {
    pub label: String,
    pub record: ConvergenceRecord,
}

fn finite(r: &IterationRow) -> bool {
    r.res_l2.is_finite() && r.res_w.is_finite() && r.err_l2.is_none_or(f64::is_finite)
}

/// `iter,res_l2,res_w,err_l2` with shortest round-trip floats and LF endings.
pub fn csv(record: &ConvergenceRecord) -> String {
    let mut out = String::from("iter,res_l2,res_w,err_l2\n");
    for r in record.rows.iter().take_while(|r| finite(r)) {
        out.push_str(&format!("{},{:e},{:e},", r.iter, r.res_l2, r.res_w));
        if let Some(e) = r.err_l2 {
            out.push_str(&format!("{e:e}"));
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(dir: &Path, stem: &str, record: &ConvergenceRecord) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(format!("{stem}.csv"));
    fs::write(&path, csv(record)).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn summary(label: &str, record: &ConvergenceRecord, tol: f64) -> String {
    let last = record.rows.last().map_or(0, |r| r.iter);
    let res = record.final_residual().unwrap_or(f64::NAN);
    match &record.status {
        Termination::Converged => {
            let k = record.iterations_to(tol).unwrap_or(last);
            format!("{label}: converged in {k} iterations, residual {res:e}")
        }
        Termination::MaxIters => format!("{label}: MAXITER after {last} iterations, residual {res:e}"),
        Termination::Diverged => format!("{label}: DIVERGED at iteration {last}, residual {res:e}"),
        Termination::Failed(e) => format!("{label}: FAILED at iteration {last}: {e}"),
    }
}

/// Writes every run, prints the summaries and returns the exit code.
pub fn finish(dir: &Path, prefix: &str, runs: &[Run], tol: f64) -> Result<i32> {
    let mut code = 0;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for run in runs {
        write_csv(dir, &format!("{prefix}-{}", run.label), &run.record)?;
        writeln!(out, "{}", summary(&run.label, &run.record, tol))?;
        code = match (&run.record.status, code) {
            (Termination::Failed(_), _) | (_, 1) => 1,
            (Termination::Converged, c) => c,
            _ => 2,
        };
    }
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(rows: &[(f64, Option<f64>)], status: Termination) -> ConvergenceRecord {
        let mut r = ConvergenceRecord::new();
        for (i, (res, err)) in rows.iter().enumerate() {
            r.rows.push(IterationRow { iter: i, res_l2: *res, res_w: res / 2.0, err_l2: *err, lsq_res: None });
        }
        r.status = status;
        r
    }

    #[test]
    fn csv_round_trips() {
        let v = 0.1 + 0.2;
        let r = record(&[(v, None), (1e-300, Some(3.0))], Termination::Converged);
        let text = csv(&r);
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "iter,res_l2,res_w,err_l2");
        assert!(lines[1].ends_with(','));
        let fields: Vec<_> = lines[1].split(',').collect();
        assert_eq!(fields[1].parse::<f64>().unwrap(), v);
        assert_eq!(lines[2], "1,1e-300,5e-301,3e0");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn csv_stops_at_non_finite() {
        let r = record(&[(1.0, None), (f64::INFINITY, None)], Termination::Diverged);
        assert_eq!(csv(&r).lines().count(), 2);
    }

    #[test]
    fn summaries() {
        let r = record(&[(1.0, None), (1e-9, None)], Termination::Converged);
        assert_eq!(summary("aa", &r, 1e-8), "aa: converged in 1 iterations, residual 1e-9");
        let r = record(&[(1.0, None)], Termination::MaxIters);
        assert!(summary("picard", &r, 1e-8).contains("MAXITER"));
    }
}
