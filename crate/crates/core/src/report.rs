//! Output formatting shared by the CLI and the examples.
//!
//! JSON floats carry 17 significant digits and CSV floats 9, both in
//! scientific notation, so files are byte-stable for a fixed configuration.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::Result;

pub fn fmt_csv(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.8e}")
    } else {
        v.to_string()
    }
}

pub fn fmt_json(v: f64) -> String {
    format!("{v:.16e}")
}

/// Pretty JSON formatter that writes every float with 17 significant digits.
struct FixedFloatFormatter<'a>(PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, writer: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                self.0.$name(writer $(, $arg)*)
            }
        )*
    };
}

impl Formatter for FixedFloatFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            writer.write_all(fmt_json(value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

/// Serializes `value` as pretty JSON with fixed float formatting and a
/// trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(
        &mut buf,
        FixedFloatFormatter(PrettyFormatter::with_indent(b"  ")),
    );
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json_string(value)?)?;
    Ok(())
}

/// Writes a CSV table with LF line endings. Cells are written verbatim;
/// format floats with [`fmt_csv`] first.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formats() {
        assert_eq!(fmt_csv(2.0), "2.00000000e0");
        assert_eq!(fmt_csv(-0.000123456789), "-1.23456789e-4");
        assert_eq!(fmt_json(0.1), "1.0000000000000001e-1");
    }

    #[test]
    fn json_uses_fixed_floats_and_stays_valid() {
        #[derive(Serialize)]
        struct R {
            s: f64,
            xs: Vec<f64>,
            n: u32,
        }
        let text = to_json_string(&R {
            s: 2.5,
            xs: vec![1.0, -3e-7],
            n: 4,
        })
        .unwrap();
        assert!(text.contains("\"s\": 2.5000000000000000e0"));
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!((back["xs"][1].as_f64().unwrap() + 3e-7).abs() < 1e-20);
        assert_eq!(back["n"].as_u64(), Some(4));
    }

    #[test]
    fn csv_quotes_and_uses_lf() {
        let mut out = Vec::new();
        write_csv(
            &mut out,
            &["pattern", "x"],
            &[vec!["0,1".into(), fmt_csv(1.0)]],
        )
        .unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "pattern,x\n\"0,1\",1.00000000e0\n"
        );
    }
}
