//! Camera response tables: CSV with header `wavelength,r,g,b`, one row per band.

use std::path::Path;

use crate::css::CameraResponse;
use crate::error::{Error, Result};
use crate::io::bhsc::grid_from_wavelengths;

pub const CSS_HEADER: [&str; 4] = ["wavelength", "r", "g", "b"];

pub fn parse_css(text: &str) -> Result<CameraResponse> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::format("header", e.to_string()))?
        .clone();
    let names: Vec<String> = header.iter().map(|h| h.to_ascii_lowercase()).collect();
    if names != CSS_HEADER {
        return Err(Error::format(
            "header",
            format!("expected `wavelength,r,g,b`, found `{}`", names.join(",")),
        ));
    }

    let mut wavelengths = Vec::new();
    let mut rows: [Vec<f64>; 3] = Default::default();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::format(format!("line {line}"), e.to_string()))?;
        if record.len() != 4 {
            return Err(Error::format(
                format!("line {line}"),
                format!("wrong column count: expected 4, found {}", record.len()),
            ));
        }
        let mut vals = [0.0; 4];
        for (j, field) in record.iter().enumerate() {
            vals[j] = field.parse::<f64>().map_err(|_| {
                Error::format(
                    format!("line {line} column {}", CSS_HEADER[j]),
                    format!("not a number: `{field}`"),
                )
            })?;
        }
        if let Some(&prev) = wavelengths.last() {
            if vals[0] <= prev {
                return Err(Error::format(
                    format!("line {line} column wavelength"),
                    format!("non-monotone wavelengths: {} after {prev}", vals[0]),
                ));
            }
        }
        wavelengths.push(vals[0]);
        for ch in 0..3 {
            rows[ch].push(vals[ch + 1]);
        }
    }
    if wavelengths.is_empty() {
        return Err(Error::format("rows", "no bands"));
    }
    let grid = grid_from_wavelengths(&wavelengths)?;
    CameraResponse::from_rows(grid, &rows[0], &rows[1], &rows[2])
        .map_err(|e| Error::format("matrix", e.to_string()))
}

/// Full-precision CSV; `parse_css(&write_css_string(c))` reproduces `c`
/// exactly when the grid's wavelengths are themselves exact.
pub fn write_css_string(css: &CameraResponse) -> String {
    let mut out = String::from("wavelength,r,g,b\n");
    for (b, wl) in css.grid().wavelengths().enumerate() {
        // `{:?}` on f64 is the shortest representation that round-trips.
        out.push_str(&format!(
            "{:?},{:?},{:?},{:?}\n",
            wl,
            css.row(0)[b],
            css.row(1)[b],
            css.row(2)[b]
        ));
    }
    out
}

pub fn read_css(path: impl AsRef<Path>) -> Result<CameraResponse> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_css(&text)
}

pub fn write_css(css: &CameraResponse, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_css_string(css)).map_err(|e| Error::io(path, e))
}
