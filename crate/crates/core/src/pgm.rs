//! Binary portable graymap (P5, maxval 255) reader and writer.
//!
//! This is the only image format the pipeline touches; anything else is
//! converted before ingestion.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::Raster;

/// Writes the canonical header `P5\n{w} {h}\n255\n` followed by raw rows.
pub fn write_p5(path: &Path, raster: &Raster) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    write!(w, "P5\n{} {}\n255\n", raster.width(), raster.height()).map_err(io_err)?;
    w.write_all(raster.pixels()).map_err(io_err)?;
    w.flush().map_err(io_err)
}

pub fn read_p5(path: &Path) -> Result<Raster> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut data = Vec::new();
    BufReader::new(file)
        .read_to_end(&mut data)
        .map_err(|e| Error::io(path, e))?;
    parse_p5(&data).map_err(|msg| Error::MalformedInput(format!("{}: {msg}", path.display())))
}

fn parse_p5(data: &[u8]) -> std::result::Result<Raster, String> {
    if data.len() < 2 || &data[..2] != b"P5" {
        return Err("missing P5 magic".into());
    }
    let mut pos = 2;
    let width = read_token(data, &mut pos)?;
    let height = read_token(data, &mut pos)?;
    let maxval = read_token(data, &mut pos)?;
    if maxval != 255 {
        return Err(format!("only maxval 255 is supported, got {maxval}"));
    }
    // exactly one whitespace byte separates the header from the pixel rows
    if pos >= data.len() || !data[pos].is_ascii_whitespace() {
        return Err("header not terminated by whitespace".into());
    }
    pos += 1;
    let expected = width * height;
    let rest = &data[pos..];
    if rest.len() < expected {
        return Err(format!("expected {expected} pixel bytes, got {}", rest.len()));
    }
    Raster::new(width, height, rest[..expected].to_vec()).map_err(|e| e.to_string())
}

/// Reads the next unsigned decimal token, skipping whitespace and `#` comments.
fn read_token(data: &[u8], pos: &mut usize) -> std::result::Result<usize, String> {
    loop {
        while *pos < data.len() && data[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < data.len() && data[*pos] == b'#' {
            while *pos < data.len() && data[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < data.len() && data[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if start == *pos {
        return Err("expected a decimal header field".into());
    }
    std::str::from_utf8(&data[start..*pos])
        .unwrap()
        .parse::<usize>()
        .map_err(|e| e.to_string())
}
