//! CSV and JSON rendering of results.
//!
//! Floats are printed with 12 significant digits in the style of C's `%.12g`;
//! exact integers are printed in full.

use serde::Serialize;

use crate::entropy::{EntropyReport, TopologicalEntropy};
use crate::transfer::StripEntropyResult;

/// Significant digits for floats in reports.
pub const SIG_DIGITS: usize = 12;

/// `%.12g`-style formatting: fixed notation for exponents in `[-4, 12)`,
/// scientific otherwise, trailing zeros removed.
pub fn fmt_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= SIG_DIGITS as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// RFC 4180 CSV with a header row.
pub fn to_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Columns `n, h_strip, h_ref, residual, method, fitted_slope`. The slope is
/// repeated on every row, empty when no fit was possible.
pub fn convergence_csv(report: &EntropyReport) -> String {
    let slope = report.fitted_rate.map(|f| fmt_g(f.slope)).unwrap_or_default();
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                fmt_g(r.h_strip),
                fmt_g(report.h_ref),
                fmt_g(r.residual),
                r.method.to_string(),
                slope.clone(),
            ]
        })
        .collect();
    to_csv(&["n", "h_strip", "h_ref", "residual", "method", "fitted_slope"], &rows)
}

/// Columns `n, method, value, denominator`.
pub fn strip_csv(results: &[StripEntropyResult]) -> String {
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| vec![r.n.to_string(), r.method.to_string(), fmt_g(r.value), r.denominator.to_string()])
        .collect();
    to_csv(&["n", "method", "value", "denominator"], &rows)
}

/// Columns `n, log_beta, sites, ratio, increment`.
pub fn entropy_csv(t: &TopologicalEntropy) -> String {
    let rows: Vec<Vec<String>> = t
        .rows
        .iter()
        .map(|r| {
            vec![r.n.to_string(), fmt_g(r.log_beta), fmt_g(r.sites), fmt_g(r.ratio), fmt_g(r.increment)]
        })
        .collect();
    to_csv(&["n", "log_beta", "sites", "ratio", "increment"], &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_format() {
        assert_eq!(fmt_g(0.0), "0");
        assert_eq!(fmt_g(1.0), "1");
        assert_eq!(fmt_g(-2.5), "-2.5");
        assert_eq!(fmt_g(std::f64::consts::LN_2), "0.69314718056");
        assert_eq!(fmt_g(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_g(123456.0), "123456");
        assert_eq!(fmt_g(1e-5), "1e-05");
        assert_eq!(fmt_g(1.25e-7), "1.25e-07");
        assert_eq!(fmt_g(0.0001), "0.0001");
        assert_eq!(fmt_g(1e12), "1e+12");
        assert_eq!(fmt_g(999999999999.0), "999999999999");
        assert_eq!(fmt_g(f64::NAN), "nan");
        assert_eq!(fmt_g(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn csv_quoting() {
        let s = to_csv(&["a", "b"], &[vec!["1".into(), "x,y".into()], vec!["2".into(), "say \"hi\"".into()]]);
        assert_eq!(s, "a,b\n1,\"x,y\"\n2,\"say \"\"hi\"\"\"\n");
        assert_eq!(to_csv(&["a"], &[]), "a\n");
    }
}
