//! Parsing of interior evaluation points from the command line.
//!
//! One point per argument; coordinates separated by commas; each
//! coordinate either a real ("0.3", "-1e-2") or a complex in a+bi form
//! ("0.3+0.2i", "-0.1-0.4i", "0.5i").

use outerlab_core::C64;

use crate::error::{LabError, LabResult};

pub fn parse_point(arg: &str, dim: usize) -> LabResult<Vec<C64>> {
    let coords: Vec<&str> = arg.split(',').map(str::trim).collect();
    if coords.len() != dim {
        return Err(LabError::config(format!(
            "point '{arg}' has {} coordinates, scenario dimension is {dim}",
            coords.len()
        )));
    }
    coords.iter().map(|c| parse_complex(c)).collect()
}

pub fn parse_complex(text: &str) -> LabResult<C64> {
    let t = text.trim();
    if t.is_empty() {
        return Err(LabError::config("empty coordinate".to_string()));
    }
    // Pure imaginary or real fast paths.
    if let Some(im) = t.strip_suffix(['i', 'I']) {
        // Split at the last +/- that is not a leading sign or an exponent
        // sign; everything after it (with the sign) is the imaginary part.
        if let Some(pos) = split_position(im) {
            let (re, imag) = im.split_at(pos);
            let re: f64 = re
                .parse()
                .map_err(|_| bad(text))?;
            let imag: f64 = if imag == "+" || imag == "-" {
                format!("{imag}1").parse().map_err(|_| bad(text))?
            } else {
                imag.parse().map_err(|_| bad(text))?
            };
            return Ok(C64::new(re, imag));
        }
        let imag: f64 = if im.is_empty() || im == "+" || im == "-" {
            format!("{im}1").parse().map_err(|_| bad(text))?
        } else {
            im.parse().map_err(|_| bad(text))?
        };
        return Ok(C64::new(0.0, imag));
    }
    let re: f64 = t.parse().map_err(|_| bad(text))?;
    Ok(C64::new(re, 0.0))
}

/// Index of the +/- separating real and imaginary parts, if any.
fn split_position(s: &str) -> Option<usize> {
    let bytes = s.as_bytes();
    for k in (1..bytes.len()).rev() {
        let c = bytes[k];
        if (c == b'+' || c == b'-') && bytes[k - 1] != b'e' && bytes[k - 1] != b'E' {
            return Some(k);
        }
    }
    None
}

fn bad(text: &str) -> LabError {
    LabError::config(format!(
        "cannot parse coordinate '{text}' (expected forms: 0.3, -0.5, 0.3+0.2i, -1e-2i)"
    ))
}
