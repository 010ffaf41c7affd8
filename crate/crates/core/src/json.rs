//! JSON text forms.
//!
//! Complex numbers are `[re, im]` pairs; polynomials are ascending coefficient
//! lists of such pairs and cycles are ordered lists of points. Floats are
//! written with 17 significant digits so that values survive a round trip.

use std::io;

use num_complex::Complex64;
use serde::ser::SerializeTuple;
use serde::{Serialize, Serializer};
use serde_json::ser::Formatter;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::synthesis::Cycle;

/// Compact JSON formatter that prints every float as `d.dddddddddddddddde±x`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SigDigitsFormatter;

impl Formatter for SigDigitsFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        // -0 prints as 0
        write!(writer, "{:.16e}", value + 0.0)
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serializes with [`SigDigitsFormatter`].
pub fn to_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigitsFormatter);
    value
        .serialize(&mut ser)
        .expect("serializing to memory cannot fail");
    String::from_utf8(out).expect("serde_json emits utf-8")
}

pub fn serialize_complex<S: Serializer>(
    z: &Complex64,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

pub fn serialize_complex_list<S: Serializer>(
    zs: &[Complex64],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    zs.iter()
        .map(|z| [z.re, z.im])
        .collect::<Vec<_>>()
        .serialize(s)
}

pub fn serialize_polynomial<S: Serializer>(
    p: &Polynomial,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    serialize_complex_list(p.coeffs(), s)
}

pub fn complex_value(z: Complex64) -> Value {
    serde_json::json!([z.re, z.im])
}

pub fn complex_list_value(zs: &[Complex64]) -> Value {
    Value::Array(zs.iter().map(|&z| complex_value(z)).collect())
}

fn complex_from_value(v: &Value) -> Result<Complex64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .map(|re| Complex64::new(re, 0.0))
            .ok_or_else(|| Error::InvalidInput(format!("not a number: {n}"))),
        Value::Array(pair) if pair.len() == 2 => {
            let re = pair[0].as_f64();
            let im = pair[1].as_f64();
            match (re, im) {
                (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
                _ => Err(Error::InvalidInput(format!("expected [re, im], got {v}"))),
            }
        }
        _ => Err(Error::InvalidInput(format!("expected [re, im], got {v}"))),
    }
}

/// Parses `[[re, im], ...]`. Bare numbers are read as real values.
pub fn parse_complex_list(text: &str) -> Result<Vec<Complex64>> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| Error::InvalidInput(format!("malformed JSON: {e}")))?;
    let Value::Array(items) = v else {
        return Err(Error::InvalidInput("expected a JSON array".into()));
    };
    items.iter().map(complex_from_value).collect()
}

pub fn parse_polynomial(text: &str) -> Result<Polynomial> {
    Polynomial::new(parse_complex_list(text)?)
}

pub fn parse_cycle(text: &str) -> Result<Cycle> {
    Cycle::new(parse_complex_list(text)?)
}
