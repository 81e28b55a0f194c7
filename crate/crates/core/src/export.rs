//! File encodings for rendered waveforms and note events.

use std::fmt::Write as _;

use crate::arp::NoteEvent;
use crate::error::{Error, Result};

/// Fixed-point decimal with 9 significant digits, e.g. `0.500000000`.
pub fn format_sig9(value: f64) -> String {
    if value == 0.0 || !value.is_finite() {
        return format!("{value:.8}");
    }
    // exponent as printed after rounding to 9 significant digits
    let sci = format!("{value:.8e}");
    let exp: i32 = sci
        .rsplit('e')
        .next()
        .and_then(|e| e.parse().ok())
        .unwrap_or(0);
    let decimals = (8 - exp).max(0) as usize;
    format!("{value:.decimals$}")
}

/// One value per line.
pub fn waveform_to_csv(values: &[f64]) -> String {
    let mut out = String::with_capacity(values.len() * 12);
    for v in values {
        out.push_str(&format_sig9(*v));
        out.push('\n');
    }
    out
}

/// Headerless little-endian f64 samples.
pub fn waveform_to_bin(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn waveform_from_bin(bytes: &[u8]) -> Result<Vec<f64>> {
    if bytes.len() % 8 != 0 {
        return Err(Error::InvalidArgument(format!(
            "binary waveform length {} is not a multiple of 8",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

/// One JSON object per line: `t`, `index`, `pitch`, `velocity`, `duration_steps`.
pub fn events_to_json_lines(events: &[NoteEvent]) -> String {
    let mut out = String::new();
    for e in events {
        let line = serde_json::to_string(e).expect("note events serialize");
        let _ = writeln!(out, "{line}");
    }
    out
}

pub fn events_from_json_lines(text: &str) -> Result<Vec<NoteEvent>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| Error::InvalidArgument(format!("line {}: {e}", i + 1)))
        })
        .collect()
}
