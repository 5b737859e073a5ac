//! Comma-separated output with a header line, `.` decimals and 12
//! significant digits.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

const SIGNIFICANT: i32 = 12;

/// A row type with a fixed column layout.
pub trait CsvRecord: Sized {
    const HEADER: &'static [&'static str];

    fn fields(&self) -> Vec<String>;

    fn from_fields(fields: &[&str]) -> Result<Self>;
}

/// Formats `x` with 12 significant digits: plain decimal notation for
/// magnitudes in `[1e-4, 1e12)`, scientific otherwise.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (SIGNIFICANT - 1) as usize, x);
    let exp: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .expect("exponent in scientific format");
    if (-4..SIGNIFICANT).contains(&exp) {
        let decimals = (SIGNIFICANT - 1 - exp).max(0) as usize;
        let fixed = format!("{x:.decimals$}");
        if fixed.contains('.') {
            fixed
                .trim_end_matches('0')
                .trim_end_matches('.')
                .to_string()
        } else {
            fixed
        }
    } else {
        let (mantissa, e) = sci.split_once('e').expect("scientific format");
        let mantissa = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{mantissa}e{e}")
    }
}

pub fn to_csv_string<T: CsvRecord>(rows: &[T]) -> String {
    let mut out = T::HEADER.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.fields().join(","));
        out.push('\n');
    }
    out
}

pub fn emit_csv<T: CsvRecord>(rows: &[T], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_csv_string(rows)).map_err(|e| Error::io(path, e))
}

/// Parses text produced by [`to_csv_string`]; the header must match exactly.
pub fn parse_csv<T: CsvRecord>(text: &str) -> Result<Vec<T>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty CSV".into()))?;
    if header != T::HEADER.join(",") {
        return Err(Error::Parse(format!("unexpected CSV header '{header}'")));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != T::HEADER.len() {
                return Err(Error::Parse(format!(
                    "expected {} fields, got {} in '{line}'",
                    T::HEADER.len(),
                    fields.len()
                )));
            }
            T::from_fields(&fields)
        })
        .collect()
}

pub(crate) fn parse_field<T: std::str::FromStr>(s: &str, column: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad value '{s}' in column {column}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_number(22.110_346_557_475_6), "22.1103465575");
        assert_eq!(format_number(400.0), "400");
        assert_eq!(format_number(-0.5), "-0.5");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(1.234_567_890_123_456e-7), "1.23456789012e-7");
        assert_eq!(format_number(6.02e23), "6.02e23");
        assert_eq!(format_number(f64::INFINITY), "inf");
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(9.999_999_999_999_9), "10");
    }

    #[test]
    fn formatted_values_parse_back() {
        for x in [
            1e-300,
            1.234567890123,
            65025.0 / 7.0,
            -123456.789,
            9.87654321e15,
        ] {
            let back: f64 = format_number(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 1e-11, "{x} -> {back}");
        }
        assert_eq!("inf".parse::<f64>().unwrap(), f64::INFINITY);
    }
}
