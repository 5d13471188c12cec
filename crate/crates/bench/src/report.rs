//! CSV output, baseline comparison and threshold checks.

use std::io::Write;
use std::path::Path;

use crate::config::{ExperimentConfig, ExperimentId};
use crate::experiments::{sort_records, ConvergenceRecord};
use crate::BenchError;

pub const CSV_HEADER: &str = "experiment,n,param,error,seconds,ordering";

/// 15 significant digits.
pub fn fmt_sig(v: f64) -> String {
    format!("{v:.14e}")
}

/// Writes the records, sorted by `(param, n)`.
pub fn write_csv(records: &[ConvergenceRecord], mut out: impl Write) -> std::io::Result<()> {
    let mut rows = records.to_vec();
    sort_records(&mut rows);
    writeln!(out, "{CSV_HEADER}")?;
    for r in &rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.experiment,
            r.n,
            fmt_sig(r.param),
            fmt_sig(r.error),
            fmt_sig(r.seconds),
            r.ordering
        )?;
    }
    Ok(())
}

pub fn emit_csv(records: &[ConvergenceRecord], path: &Path) -> Result<(), BenchError> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_csv(records, &mut w)?;
    w.flush()?;
    Ok(())
}

pub const TARGETS: [f64; 3] = [1e-2, 1e-3, 1e-4];

#[derive(Debug, Clone, PartialEq)]
pub struct TargetRow {
    pub target: f64,
    /// Smallest CFEM element count reaching the target, if any.
    pub cfem_n: Option<usize>,
    /// Smallest regular element count reaching the target, if any.
    pub fem_nx: Option<usize>,
}

fn min_reaching(records: &[ConvergenceRecord], target: f64) -> Option<usize> {
    records
        .iter()
        .filter(|r| r.error <= target)
        .map(|r| r.n)
        .min()
}

pub fn compare_baseline(cfem: &[ConvergenceRecord], fem: &[ConvergenceRecord]) -> Vec<TargetRow> {
    TARGETS
        .iter()
        .map(|&target| TargetRow {
            target,
            cfem_n: min_reaching(cfem, target),
            fem_nx: min_reaching(fem, target),
        })
        .collect()
}

pub fn format_comparison(rows: &[TargetRow]) -> String {
    let show = |v: Option<usize>| v.map_or("unreached".to_string(), |n| n.to_string());
    let mut s = String::from("target,cfem_n,fem_nx\n");
    for r in rows {
        s += &format!("{},{},{}\n", r.target, show(r.cfem_n), show(r.fem_nx));
    }
    s
}

/// Splits an experiment's records into (cfem, fem), dropping
/// per-interface rows.
pub fn split_records(
    id: ExperimentId,
    records: &[ConvergenceRecord],
) -> (Vec<ConvergenceRecord>, Vec<ConvergenceRecord>) {
    records
        .iter()
        .filter(|r| r.experiment == id.as_str())
        .cloned()
        .partition(|r| r.ordering != "fem")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn error_at(records: &[ConvergenceRecord], param: Option<f64>, n: usize) -> Option<f64> {
    records
        .iter()
        .find(|r| r.n == n && r.ordering != "fem" && param.is_none_or(|p| r.param == p))
        .map(|r| r.error)
}

fn bound(records: &[ConvergenceRecord], param: Option<f64>, n: usize, limit: f64) -> Option<Check> {
    error_at(records, param, n).map(|e| Check {
        name: match param {
            Some(p) => format!("error(param={p}, n={n}) <= {limit:e}"),
            None => format!("error(n={n}) <= {limit:e}"),
        },
        passed: e <= limit,
        detail: format!("{e:.3e}"),
    })
}

/// Consecutive decreasing steps that count as sustained convergence.
pub const ONSET_RUN: usize = 5;

/// First n below 0.5 error that starts `ONSET_RUN` consecutive decreases,
/// or `None` if the sweep never converges.
pub fn convergence_onset(errors: &[(usize, f64)]) -> Option<usize> {
    let mut pts = errors.to_vec();
    pts.sort_by_key(|p| p.0);
    (0..pts.len().saturating_sub(ONSET_RUN))
        .find(|&i| pts[i].1 < 0.5 && pts[i..=i + ONSET_RUN].windows(2).all(|w| w[1].1 < w[0].1))
        .map(|i| pts[i].0)
}

/// Acceptance thresholds for whichever sweep points are present.
pub fn threshold_checks(config: &ExperimentConfig, records: &[ConvergenceRecord]) -> Vec<Check> {
    let (cfem, _) = split_records(config.experiment, records);
    let mut out = Vec::new();
    match config.experiment {
        ExperimentId::E1Elliptic => {
            out.extend(bound(&cfem, Some(200.0), 20, 1e-3));
            out.extend(bound(&cfem, Some(10.0), 15, 1e-12));
        }
        ExperimentId::E2Helmholtz1d => {
            let at40: Vec<(usize, f64)> = cfem
                .iter()
                .filter(|r| r.param == 40.0)
                .map(|r| (r.n, r.error))
                .collect();
            if at40.len() > 1 {
                let onset = convergence_onset(&at40);
                out.push(Check {
                    name: "onset at omega=40 within [17, 23]".into(),
                    passed: onset.is_some_and(|n| (17..=23).contains(&n)),
                    detail: format!("{onset:?}"),
                });
            }
        }
        ExperimentId::E3Laplace2d => {
            out.extend(bound(&cfem, None, 10, 1.5e-2));
            out.extend(bound(&cfem, None, 14, 2e-4));
        }
        ExperimentId::E4Helmholtz2d => {
            out.extend(bound(&cfem, None, 17, 1.5e-2));
            out.extend(bound(&cfem, None, 20, 1.5e-3));
        }
        ExperimentId::E5Multidomain => {
            out.extend(bound(&cfem, None, 20, 1.5e-2));
            out.extend(bound(&cfem, None, 28, 1.5e-3));
        }
        ExperimentId::E6Elastic => {
            out.extend(bound(&cfem, None, 28, 1.5e-2));
            out.extend(bound(&cfem, None, 60, 1.5e-3));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(n: usize, param: f64, error: f64, ordering: &str) -> ConvergenceRecord {
        ConvergenceRecord {
            experiment: "e3_laplace2d".into(),
            n,
            param,
            error,
            seconds: 0.0,
            ordering: ordering.into(),
        }
    }

    fn csv(records: &[ConvergenceRecord]) -> String {
        let mut buf = Vec::new();
        write_csv(records, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_records_give_header_only() {
        assert_eq!(csv(&[]), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn one_record_two_lines() {
        let s = csv(&[rec(3, 0.0, 0.125, "phase")]);
        assert_eq!(s.lines().count(), 2);
        assert_eq!(
            s.lines().nth(1).unwrap(),
            "e3_laplace2d,3,0.00000000000000e0,1.25000000000000e-1,0.00000000000000e0,phase"
        );
    }

    #[test]
    fn rows_sorted_by_param_then_n() {
        let s = csv(&[
            rec(2, 5.0, 1.0, "phase"),
            rec(9, 1.0, 1.0, "phase"),
            rec(1, 5.0, 1.0, "phase"),
        ]);
        let ns: Vec<&str> = s
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap())
            .collect();
        assert_eq!(ns, vec!["9", "1", "2"]);
    }

    #[test]
    fn fifteen_significant_digits() {
        let f = fmt_sig(2f64.sqrt());
        assert_eq!(f, "1.41421356237310e0");
        assert_eq!(fmt_sig(-1234.5), "-1.23450000000000e3");
    }

    #[test]
    fn emit_csv_writes_file() {
        let dir = std::env::temp_dir().join(format!("cfem-csv-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("out.csv");
        emit_csv(&[rec(1, 0.0, 0.5, "fem")], &p).unwrap();
        assert_eq!(
            std::fs::read_to_string(&p).unwrap(),
            csv(&[rec(1, 0.0, 0.5, "fem")])
        );
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn comparison_reports_smallest_counts() {
        let cfem = vec![
            rec(5, 0.0, 0.1, "phase"),
            rec(10, 0.0, 0.009, "phase"),
            rec(14, 0.0, 2e-4, "phase"),
        ];
        let fem = vec![
            rec(100, 0.0, 0.011, "fem"),
            rec(200, 0.0, 0.003, "fem"),
            rec(1000, 0.0, 8e-4, "fem"),
        ];
        let rows = compare_baseline(&cfem, &fem);
        assert_eq!(
            rows[0],
            TargetRow {
                target: 1e-2,
                cfem_n: Some(10),
                fem_nx: Some(200)
            }
        );
        assert_eq!(
            rows[1],
            TargetRow {
                target: 1e-3,
                cfem_n: Some(14),
                fem_nx: Some(1000)
            }
        );
        assert_eq!(
            rows[2],
            TargetRow {
                target: 1e-4,
                cfem_n: None,
                fem_nx: None
            }
        );
        assert!(format_comparison(&rows).contains("0.0001,unreached,unreached"));
    }

    #[test]
    fn onset_is_start_of_final_descent() {
        let e = [
            (1, 1.0),
            (2, 0.02),
            (3, 1.0),
            (4, 0.4),
            (5, 0.1),
            (6, 0.01),
            (7, 1e-3),
            (8, 1e-4),
            (9, 1e-5),
            (10, 2e-5),
        ];
        assert_eq!(convergence_onset(&e), Some(4));
        assert_eq!(convergence_onset(&[(1, 1.0), (2, 2.0)]), None);
    }

    #[test]
    fn checks_only_cover_present_points() {
        let c = ExperimentConfig::defaults(ExperimentId::E3Laplace2d);
        let checks = threshold_checks(
            &c,
            &[rec(10, 0.0, 0.01, "interleave"), rec(10, 0.0, 0.5, "fem")],
        );
        assert_eq!(checks.len(), 1);
        assert!(checks[0].passed);
    }
}
