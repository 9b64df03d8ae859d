//! Superpixel label maps (CSV grid or 16-bit PGM) and flat label files.

use std::path::Path;

use crate::error::{Error, Result};
use crate::superpixel::SuperpixelMap;

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

/// Read a precomputed superpixel map: CSV grid of integers (height rows
/// by width columns) or binary 16-bit PGM (P5), chosen by extension.
pub fn read_labels(path: &Path) -> Result<SuperpixelMap> {
    match path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()) {
        Some(ext) if ext == "pgm" => read_label_pgm(path),
        _ => read_label_csv(path),
    }
}

fn read_label_csv(path: &Path) -> Result<SuperpixelMap> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut rows: Vec<Vec<u32>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Vec<u32> = line
            .split(',')
            .map(|f| f.trim().parse::<u32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                msg: "expected comma-separated non-negative integers".into(),
            })?;
        rows.push(row);
    }
    let height = rows.len();
    let width = rows.first().map(|r| r.len()).unwrap_or(0);
    if height == 0 || width == 0 {
        return Err(Error::InvalidArgument("empty label map".into()));
    }
    if rows.iter().any(|r| r.len() != width) {
        return Err(Error::InvalidArgument("ragged label map rows".into()));
    }
    let flat: Vec<u32> = rows.into_iter().flatten().collect();
    SuperpixelMap::from_labels(width, height, &flat, None)
}

fn read_label_pgm(path: &Path) -> Result<SuperpixelMap> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    let bad = |msg: &str| Error::Parse { path: path.to_path_buf(), line: 0, msg: msg.into() };
    let mut pos = 0usize;
    let magic = super::image_io::next_header_token(&bytes, &mut pos)
        .ok_or_else(|| bad("missing magic"))?;
    if magic != b"P5" {
        return Err(bad("not a binary PGM (P5)"));
    }
    let mut dims = [0usize; 3];
    for d in dims.iter_mut() {
        let tok = super::image_io::next_header_token(&bytes, &mut pos)
            .ok_or_else(|| bad("truncated header"))?;
        *d = std::str::from_utf8(&tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("bad header number"))?;
    }
    let (w, h, maxval) = (dims[0], dims[1], dims[2]);
    if maxval != 65_535 {
        return Err(bad("expected 16-bit PGM (maxval 65535)"));
    }
    pos += 1;
    let need = 2 * w * h;
    if bytes.len() < pos + need {
        return Err(bad("truncated pixel data"));
    }
    let flat: Vec<u32> = bytes[pos..pos + need]
        .chunks_exact(2)
        .map(|p| u16::from_be_bytes([p[0], p[1]]) as u32)
        .collect();
    SuperpixelMap::from_labels(w, h, &flat, None)
}

/// Write a label map as a CSV grid.
pub fn write_label_csv(path: &Path, map: &SuperpixelMap) -> Result<()> {
    let mut text = String::new();
    for y in 0..map.height {
        let row: Vec<String> = (0..map.width)
            .map(|x| map.labels[y * map.width + x].to_string())
            .collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Read a flat label file: one non-negative integer per line.
pub fn read_label_file(path: &Path) -> Result<Vec<usize>> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(line.parse::<usize>().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: lineno + 1,
            msg: "expected a non-negative integer".into(),
        })?);
    }
    Ok(out)
}

/// Write a flat label file, one label per line.
pub fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut text = String::with_capacity(labels.len() * 2);
    for l in labels {
        text.push_str(&l.to_string());
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}
