use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};

/// Six significant digits, trailing zeros trimmed, `%g`-style exponent
/// outside `[1e-5, 1e6)`.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        let s = format!("{x:.decimals$}");
        return if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
    }
    let s = format!("{x:.5e}");
    let (mantissa, exponent) = s.split_once('e').expect("exponent form");
    let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
    format!("{mantissa}e{exponent}")
}

/// Writes `body` to `path` via a temporary file in the same directory, so a
/// failed run never leaves a partial file behind. `None` means stdout.
pub fn emit(path: Option<&Path>, body: &[u8]) -> Result<()> {
    match path {
        None => {
            let mut out = io::stdout().lock();
            out.write_all(body)?;
            out.flush()?;
        }
        Some(path) => {
            let tmp = path.with_extension("partial");
            let result = fs::write(&tmp, body).and_then(|()| fs::rename(&tmp, path));
            if result.is_err() {
                let _ = fs::remove_file(&tmp);
            }
            result.with_context(|| format!("writing {}", path.display()))?;
        }
    }
    Ok(())
}
