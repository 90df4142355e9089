//! Exact renderings for JSON and CSV reports.
//!
//! Rationals are written `p/2^q`, intervals as `(lower, upper)` pairs of
//! shortest round-trip decimals, so no value is rounded on the way out.

use std::io::{self, Write};

use serde::Serializer;

use crate::bitreal::DyadicRational;
use crate::series::{Bounds, Interval};

pub fn ser_dyadic<S: Serializer>(x: &DyadicRational, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(x)
}

pub fn ser_interval<S: Serializer>(x: &Interval, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(x)
}

pub fn ser_bounds<S: Serializer>(x: &Bounds, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(x)
}

pub fn ser_opt_dyadic<S: Serializer>(x: &Option<DyadicRational>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(x) => s.collect_str(x),
        None => s.serialize_none(),
    }
}

/// Pretty JSON followed by a newline.
pub fn write_json<T: serde::Serialize>(out: &mut dyn Write, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)
}

/// A CSV table; fields are written verbatim, so callers must not pass
/// commas inside a field. Interval pairs are quoted.
pub struct Csv<'a> {
    out: &'a mut dyn Write,
}

impl<'a> Csv<'a> {
    pub fn new(out: &'a mut dyn Write, header: &[&str]) -> io::Result<Self> {
        writeln!(out, "{}", header.join(","))?;
        Ok(Csv { out })
    }

    pub fn row(&mut self, fields: &[String]) -> io::Result<()> {
        let quoted: Vec<String> = fields
            .iter()
            .map(|f| {
                if f.contains(',') {
                    format!("\"{f}\"")
                } else {
                    f.clone()
                }
            })
            .collect();
        writeln!(self.out, "{}", quoted.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(serde::Serialize)]
    struct R {
        #[serde(serialize_with = "ser_dyadic")]
        x: DyadicRational,
        #[serde(serialize_with = "ser_interval")]
        i: Interval,
    }

    #[test]
    fn exact_rendering() {
        let r = R {
            x: "3/8".parse().unwrap(),
            i: Interval::new(0.1, 0.5),
        };
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"x":"3/2^3","i":"(0.1, 0.5)"}"#
        );
    }

    #[test]
    fn csv_quotes_pairs() {
        let mut buf = Vec::new();
        let mut csv = Csv::new(&mut buf, &["a", "b"]).unwrap();
        csv.row(&["1".into(), "(0.5, 1.0)".into()]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1,\"(0.5, 1.0)\"\n");
    }
}
