//! CSV serialization of sweep reports.
//!
//! One row per (sweep point × tracked element). Floats use Rust's shortest
//! round-trip scientific notation so identical reports give identical bytes.

use std::io::{self, Write};

use crate::simulate::{MseReport, SweepVar};

pub const CSV_HEADER: &str = "sweep_var,sweep_value,scheme,channel,element,mse_measured,var_analytic,reps,seed";

#[derive(Debug, Clone, Copy, Default)]
pub struct CsvOptions {
    /// Add a `total` element row per point (sum over all elements).
    pub include_total: bool,
}

fn sweep_value(var: SweepVar, v: f64) -> String {
    match var {
        SweepVar::Sigma2 => format!("{v:e}"),
        SweepVar::K => format!("{}", v as u64),
    }
}

pub fn write_csv<W: Write>(reports: &[MseReport], opts: CsvOptions, mut w: W) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for report in reports {
        let var = report.sweep_var.label();
        let scheme = report.scheme.label();
        let channel = report.channel.label();
        for row in &report.rows {
            let x = sweep_value(report.sweep_var, row.point.value);
            let mut line = |scheme: &str, element: &str, mse: f64, var_analytic: f64| {
                writeln!(
                    w,
                    "{var},{x},{scheme},{channel},{element},{mse:e},{var_analytic:e},{},{}",
                    report.reps, report.seed
                )
            };
            for e in &row.elements {
                line(scheme, &e.label, e.mse, e.var_analytic)?;
            }
            if opts.include_total {
                line(scheme, "total", row.total_mse, row.total_var)?;
            }
            let ref_scheme = format!("{scheme}/ls");
            for e in &row.elements {
                if let Some(rm) = e.reference_mse {
                    line(&ref_scheme, &e.label, rm, e.var_analytic)?;
                }
            }
        }
    }
    w.flush()
}

pub fn to_csv_string(reports: &[MseReport], opts: CsvOptions) -> String {
    let mut buf = Vec::new();
    write_csv(reports, opts, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelModelKind;
    use crate::simulate::{run_sweep, ExperimentConfig, SchemeKind, Sweep};

    fn config(values: Vec<f64>) -> ExperimentConfig {
        ExperimentConfig::new(
            2,
            SchemeKind::OnOff,
            ChannelModelKind::IidRayleigh,
            Sweep::Sigma2 { k: 3, t: 4, values },
            10,
            1,
        )
    }

    #[test]
    fn empty_report_is_header_only() {
        let mut r = run_sweep(&config(vec![0.1])).unwrap();
        r.rows.clear();
        assert_eq!(to_csv_string(&[r], CsvOptions::default()), format!("{CSV_HEADER}\n"));
        assert_eq!(to_csv_string(&[], CsvOptions::default()), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn row_count_and_values() {
        let r = run_sweep(&config(vec![0.1, 0.25])).unwrap();
        let csv = to_csv_string(&[r], CsvOptions::default());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(!csv.contains('\r'));
        let v_rows: Vec<&str> = lines[1..].iter().copied().filter(|l| l.contains(",v1[1],")).collect();
        assert_eq!(v_rows.len(), 2);
        for (line, sigma2) in v_rows.iter().zip([0.1f64, 0.25]) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields[0], "sigma2");
            assert_eq!(fields[6].parse::<f64>().unwrap(), 2.0 * sigma2);
            assert_eq!(fields[1].parse::<f64>().unwrap(), sigma2);
        }
    }

    #[test]
    fn total_rows_optional() {
        let r = run_sweep(&config(vec![0.1])).unwrap();
        let csv = to_csv_string(&[r], CsvOptions { include_total: true });
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.contains(",total,"));
    }
}
