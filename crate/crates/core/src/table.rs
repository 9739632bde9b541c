//! Two-column (ζ, θ) text tables for custom mixing-angle profiles.
//!
//! Columns are separated by whitespace or a comma; `#` starts a comment.
//! Values between rows are linearly interpolated.

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub fn parse_profile_table(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut zeta = Vec::new();
    let mut theta = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != 2 {
            return Err(Error::InvalidTable(format!(
                "line {}: expected 2 columns, found {}",
                lineno + 1,
                fields.len()
            )));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::InvalidTable(format!("line {}: bad number {s:?}", lineno + 1)))
        };
        zeta.push(parse(fields[0])?);
        theta.push(parse(fields[1])?);
    }
    if zeta.len() < 2 {
        return Err(Error::InvalidTable("need at least two rows".into()));
    }
    Ok((zeta, theta))
}

/// Writes a table readable by [`parse_profile_table`], values in shortest
/// round-trip decimal form.
pub fn format_profile_table(zeta: &[f64], theta: &[f64], header: &str) -> String {
    let mut out = String::new();
    for line in header.lines() {
        let _ = writeln!(out, "# {line}");
    }
    out.push_str("# zeta theta\n");
    for (z, t) in zeta.iter().zip(theta) {
        let _ = writeln!(out, "{z} {t}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_comments_and_separators() {
        let text = "# custom\n0 1.5\n\n 0.5, 1.0 # mid\n1\t0.25\n";
        let (z, t) = parse_profile_table(text).unwrap();
        assert_eq!(z, vec![0.0, 0.5, 1.0]);
        assert_eq!(t, vec![1.5, 1.0, 0.25]);
    }

    #[test]
    fn rejects_malformed_rows() {
        assert!(parse_profile_table("0 1 2\n1 0\n").is_err());
        assert!(parse_profile_table("0 abc\n1 0\n").is_err());
        assert!(parse_profile_table("0 inf\n1 0\n").is_err());
        assert!(parse_profile_table("# nothing\n0 1\n").is_err());
    }

    proptest! {
        #[test]
        fn format_then_parse_is_identity(rows in prop::collection::vec((-1e6f64..1e6, -10.0f64..10.0), 2..40)) {
            let (z, t): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
            let text = format_profile_table(&z, &t, "seed 1\nalpha 3");
            let (z2, t2) = parse_profile_table(&text).unwrap();
            prop_assert_eq!(z, z2);
            prop_assert_eq!(t, t2);
        }
    }
}
