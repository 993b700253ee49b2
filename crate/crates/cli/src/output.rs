//! JSON output with 17 significant digits per float.

use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter};

/// Compact JSON whose floats always carry 17 significant digits, enough to
/// round-trip any `f64`.
struct Precise;

impl Formatter for Precise {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        CompactFormatter.write_f64(w, f64::from(value))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Precise);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(buf)
}

/// Writes to `out`, or stdout when absent.
pub fn emit(bytes: &[u8], out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        let text = String::from_utf8(to_json(&[3f64.sqrt(), 0.1, 1.0]).unwrap()).unwrap();
        assert_eq!(text, "[1.7320508075688772e0,1.0000000000000001e-1,1.0000000000000000e0]\n");
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, vec![3f64.sqrt(), 0.1, 1.0]);
    }

    #[test]
    fn non_finite_is_null() {
        let text = String::from_utf8(to_json(&[f64::INFINITY]).unwrap()).unwrap();
        assert_eq!(text, "[null]\n");
    }
}
