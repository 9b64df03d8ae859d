//! Image input: binary PPM (P6) and PNG, both decoded to 8-bit RGB.

use std::path::Path;

use crate::error::{Error, Result};
use crate::superpixel::RgbImage;

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

/// Load an image by extension (`.ppm` or `.png`).
pub fn load_image(path: &Path) -> Result<RgbImage> {
    match path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()) {
        Some(ext) if ext == "ppm" => read_ppm(path),
        Some(ext) if ext == "png" => read_png(path),
        _ => Err(Error::InvalidArgument(format!(
            "unsupported image format for {} (expected .ppm or .png)",
            path.display()
        ))),
    }
}

/// Parse one whitespace-delimited PNM header token, skipping `#` comments.
pub(super) fn next_header_token(bytes: &[u8], pos: &mut usize) -> Option<Vec<u8>> {
    while *pos < bytes.len() {
        let b = bytes[*pos];
        if b == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
        } else if b.is_ascii_whitespace() {
            *pos += 1;
        } else {
            break;
        }
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if *pos > start {
        Some(bytes[start..*pos].to_vec())
    } else {
        None
    }
}

pub fn read_ppm(path: &Path) -> Result<RgbImage> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    let bad = |msg: &str| Error::Parse { path: path.to_path_buf(), line: 0, msg: msg.into() };
    let mut pos = 0usize;
    let magic = next_header_token(&bytes, &mut pos).ok_or_else(|| bad("missing magic"))?;
    if magic != b"P6" {
        return Err(bad("not a binary PPM (P6)"));
    }
    let mut dims = [0usize; 3];
    for d in dims.iter_mut() {
        let tok = next_header_token(&bytes, &mut pos).ok_or_else(|| bad("truncated header"))?;
        *d = std::str::from_utf8(&tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("bad header number"))?;
    }
    let (w, h, maxval) = (dims[0], dims[1], dims[2]);
    if maxval != 255 {
        return Err(bad("only maxval 255 supported"));
    }
    // Single whitespace byte separates header from pixel data.
    pos += 1;
    let need = 3 * w * h;
    if bytes.len() < pos + need {
        return Err(bad("truncated pixel data"));
    }
    RgbImage::new(w, h, bytes[pos..pos + need].to_vec())
}

pub fn write_ppm(path: &Path, img: &RgbImage) -> Result<()> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.data);
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

fn read_png(path: &Path) -> Result<RgbImage> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut decoder = png::Decoder::new(std::io::BufReader::new(file));
    decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let bad = |msg: String| Error::Parse { path: path.to_path_buf(), line: 0, msg };
    let mut reader = decoder.read_info().map_err(|e| bad(e.to_string()))?;
    let mut buf = vec![0u8; reader.output_buffer_size().unwrap_or(0)];
    let info = reader.next_frame(&mut buf).map_err(|e| bad(e.to_string()))?;
    let (w, h) = (info.width as usize, info.height as usize);
    let data = match info.color_type {
        png::ColorType::Rgb => buf[..3 * w * h].to_vec(),
        png::ColorType::Rgba => {
            buf[..4 * w * h].chunks_exact(4).flat_map(|p| [p[0], p[1], p[2]]).collect()
        }
        png::ColorType::Grayscale => {
            buf[..w * h].iter().flat_map(|&g| [g, g, g]).collect()
        }
        png::ColorType::GrayscaleAlpha => {
            buf[..2 * w * h].chunks_exact(2).flat_map(|p| [p[0], p[0], p[0]]).collect()
        }
        other => return Err(bad(format!("unsupported PNG color type {other:?}"))),
    };
    RgbImage::new(w, h, data)
}
