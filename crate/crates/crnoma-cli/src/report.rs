//! CSV and console rendering of sweep results.
//!
//! CSV values use the shortest round-trip decimal form, so downstream
//! tooling recovers the exact binary doubles. The analytic column is empty,
//! not zero, when no closed form applies.

use crnoma::montecarlo::analytic_value;
use crnoma::{SweepResult, SystemConfig};

use crate::experiment::ResolvedSpec;

pub const CSV_HEADER: &str =
    "variable,value,strategy,p_outage_mc,std_err,p_outage_analytic,trials,seed";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Renders one sweep as a CSV document, one row per (grid value, strategy).
pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in &result.points {
        for point in row {
            let e = &point.estimate;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                result.variable,
                point.variable_value,
                e.strategy,
                e.p_hat,
                e.std_err,
                opt(point.analytic),
                e.trials,
                e.seed,
            ));
        }
    }
    out
}

/// Renders the closed forms alone over the spec's grid, with the
/// simulation columns left empty. Errors when no listed strategy has a
/// closed form anywhere on the grid.
pub fn analytic_csv(spec: &ResolvedSpec) -> anyhow::Result<String> {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let mut rows = 0usize;
    for &value in &spec.grid {
        let cfg = spec.variable.apply(&spec.base, value)?;
        for &strategy in &spec.strategies {
            if let Some(p) = analytic_value(strategy, &cfg) {
                out.push_str(&format!(
                    "{},{},{},,,{},,\n",
                    spec.variable, value, strategy, p,
                ));
                rows += 1;
            }
        }
    }
    anyhow::ensure!(
        rows > 0,
        "no closed form applies to any strategy in this spec"
    );
    Ok(out)
}

/// Aligned console table of one sweep.
pub fn summary_table(result: &SweepResult, base: &SystemConfig) -> String {
    let mut out = format!(
        "K={} M={} omega0={} omega_m={} rates {}/{} BPCU sigma_e_sq={}\n",
        base.antennas,
        base.users,
        base.omega0,
        base.omega_m,
        base.primary_rate_bpcu,
        base.secondary_rate_bpcu,
        base.sigma_e_sq,
    );
    out.push_str(&format!(
        "{:>10}  {:<14} {:>12} {:>12} {:>12}\n",
        result.variable, "strategy", "p_outage_mc", "std_err", "analytic"
    ));
    for row in &result.points {
        for point in row {
            let e = &point.estimate;
            out.push_str(&format!(
                "{:>10}  {:<14} {:>12.6e} {:>12.2e} {:>12}\n",
                point.variable_value,
                e.strategy.name(),
                e.p_hat,
                e.std_err,
                point
                    .analytic
                    .map(|p| format!("{p:.6e}"))
                    .unwrap_or_else(|| "-".into()),
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crnoma::montecarlo::{sweep, SweepVariable};
    use crnoma::Strategy;

    fn small_result() -> (SweepResult, SystemConfig) {
        let base = SystemConfig::new(1, 2, 1.0, 1.0, 0.2, 1.0, 0.0, 0.0).unwrap();
        let result = sweep(
            &[Strategy::SuboptimalJoint, Strategy::CsiBaseline],
            &base,
            SweepVariable::SnrDb,
            &[0.0, 10.0],
            200,
            42,
            false,
        )
        .unwrap();
        (result, base)
    }

    #[test]
    fn csv_schema_is_stable() {
        let (result, _) = small_result();
        let csv = sweep_csv(&result);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(csv.lines().count(), 1 + 2 * 2);
        for line in lines {
            assert_eq!(line.matches(',').count(), 7, "{line}");
            assert!(line.starts_with("snr_db,"));
        }
    }

    #[test]
    fn analytic_field_is_empty_when_undefined() {
        let (result, _) = small_result();
        for line in sweep_csv(&result).lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            if fields[2] == "csi-baseline" {
                assert!(fields[5].is_empty());
            } else {
                assert!(fields[5].parse::<f64>().unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn csv_floats_round_trip() {
        let (result, _) = small_result();
        for (row, line) in result
            .points
            .iter()
            .flatten()
            .zip(sweep_csv(&result).lines().skip(1))
        {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields[3].parse::<f64>().unwrap(), row.estimate.p_hat);
            assert_eq!(fields[4].parse::<f64>().unwrap(), row.estimate.std_err);
        }
    }

    #[test]
    fn summary_mentions_every_strategy() {
        let (result, base) = small_result();
        let table = summary_table(&result, &base);
        assert!(table.contains("suboptimal"));
        assert!(table.contains("csi-baseline"));
        assert!(table.starts_with("K=1 M=2"));
    }
}
