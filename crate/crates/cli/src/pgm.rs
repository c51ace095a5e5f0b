//! Binary PGM (P5, 8-bit) image reading and writing.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use bgshrink::Signal;

/// Reads an 8-bit binary PGM file into a shaped signal.
pub fn read(path: &Path) -> Result<Signal> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let mut pos = 0usize;

    let magic = next_token(&bytes, &mut pos).context("missing PGM magic")?;
    if magic != b"P5" {
        bail!("{}: not a binary PGM (expected magic P5)", path.display());
    }
    let width: usize = parse_number(&bytes, &mut pos).context("missing width")?;
    let height: usize = parse_number(&bytes, &mut pos).context("missing height")?;
    let maxval: usize = parse_number(&bytes, &mut pos).context("missing maxval")?;
    if maxval == 0 || maxval > 255 {
        bail!("{}: only 8-bit PGM supported (maxval {maxval})", path.display());
    }
    if width == 0 || height == 0 {
        bail!("{}: degenerate dimensions {width}x{height}", path.display());
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let need = width * height;
    if bytes.len() < pos + need {
        bail!(
            "{}: truncated raster, expected {need} bytes, found {}",
            path.display(),
            bytes.len().saturating_sub(pos)
        );
    }
    let values: Vec<f64> = bytes[pos..pos + need].iter().map(|&b| b as f64).collect();
    Ok(Signal::image(values, height, width)?)
}

/// Writes a shaped signal as 8-bit binary PGM, clipping to `[0, 255]` and
/// rounding half away from zero.
pub fn write(path: &Path, signal: &Signal) -> Result<()> {
    let (rows, cols) = signal
        .shape
        .ok_or_else(|| anyhow::anyhow!("cannot write an unshaped signal as an image"))?;
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    out.extend(signal.values.iter().map(|&v| v.clamp(0.0, 255.0).round() as u8));
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

/// Advances past whitespace and `#` comments, returning the next token.
fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    (*pos > start).then(|| &bytes[start..*pos])
}

fn parse_number(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    let token = next_token(bytes, pos).context("unexpected end of header")?;
    std::str::from_utf8(token)?.parse().context("malformed header number")
}
