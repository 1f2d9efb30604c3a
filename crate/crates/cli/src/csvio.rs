//! CSV rendering. Output is plain text built in memory so identical
//! inputs give byte-identical files.

use std::fmt::Write as _;

use recsim_core::algorithm::Trace;

use crate::runner::CurveRow;

pub const CURVE_HEADER: &str =
    "N,q_U,q_I,strategy,T,regret_mean,regret_stderr,R_theory,regime,R_U,R_I,lower,violations";

fn push_f64(out: &mut String, x: f64) {
    // Shortest round-trip representation; deterministic for a given value.
    let _ = write!(out, "{x}");
}

pub fn render_curve_csv(rows: &[CurveRow]) -> String {
    let mut out = String::new();
    out.push_str(CURVE_HEADER);
    out.push('\n');
    for row in rows {
        let _ = write!(
            out,
            "{},{},{},{},{},",
            row.n_users,
            row.n_user_types,
            row.n_item_types,
            row.strategy.name(),
            row.t
        );
        push_f64(&mut out, row.regret_mean);
        out.push(',');
        push_f64(&mut out, row.regret_stderr);
        out.push(',');
        if let Some(r) = row.r_theory {
            push_f64(&mut out, r);
        }
        out.push(',');
        out.push_str(row.regime.unwrap_or("ambiguous"));
        out.push(',');
        push_f64(&mut out, row.r_u_curve);
        out.push(',');
        push_f64(&mut out, row.r_i_curve);
        out.push(',');
        push_f64(&mut out, row.lower);
        out.push(',');
        out.push_str(&row.violations);
        out.push('\n');
    }
    out
}

/// Raw trace rows: `t,user,item,rating,phase`.
pub fn render_trace_csv(trace: &Trace) -> String {
    let mut out = String::from("t,user,item,rating,phase\n");
    for row in &trace.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            row.t,
            row.user,
            row.item,
            row.rating,
            row.phase.name()
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use recsim_core::algorithm::StrategyTag;

    #[test]
    fn curve_csv_shape() {
        let row = CurveRow {
            n_users: 10,
            n_user_types: 2,
            n_item_types: 4,
            strategy: StrategyTag::Random,
            t: 5,
            regret_mean: 2.5,
            regret_stderr: 0.25,
            r_theory: Some(3.0),
            regime: Some("cold"),
            r_u_curve: 11.0,
            r_i_curve: 12.5,
            lower: 1.0,
            violations: "N>100".into(),
        n_trials: 4,
        };
        let csv = render_curve_csv(&[row]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CURVE_HEADER);
        assert_eq!(
            lines.next().unwrap(),
            "10,2,4,random,5,2.5,0.25,3,cold,11,12.5,1,N>100"
        );
    }
}
