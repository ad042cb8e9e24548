//! Binary netpbm (PGM `P5`, PPM `P6`) reading and writing, bit-exact for
//! 8-bit data. PNG support sits behind the `png` feature.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::canvas::Canvas;
use crate::error::{BlendError, Result};
use crate::scalar::Scalar;

/// Decoded raw image: width, height, channel count, interleaved samples.
pub struct RawImage {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<u8>,
}

fn decode_err(path: &Path, msg: impl Into<String>) -> BlendError {
    BlendError::Decode {
        path: path.display().to_string(),
        msg: msg.into(),
    }
}

/// Reads one whitespace/comment-delimited ASCII token starting at `pos`.
fn next_token(bytes: &[u8], pos: &mut usize) -> Option<String> {
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
    if *pos >= bytes.len() {
        return None;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    Some(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

pub fn decode_pnm(bytes: &[u8], path: &Path) -> Result<RawImage> {
    if bytes.len() < 2 {
        return Err(decode_err(path, "file too short for a PNM header"));
    }
    let channels = match &bytes[..2] {
        b"P5" => 1,
        b"P6" => 3,
        b"P2" | b"P3" => {
            return Err(decode_err(
                path,
                "ASCII PNM not supported; use binary P5/P6",
            ))
        }
        _ => {
            return Err(decode_err(
                path,
                "not a binary PGM/PPM (missing P5/P6 magic)",
            ))
        }
    };
    let mut pos = 2;
    let mut dims = [0usize; 3];
    for slot in dims.iter_mut() {
        let tok =
            next_token(bytes, &mut pos).ok_or_else(|| decode_err(path, "truncated PNM header"))?;
        *slot = tok
            .parse()
            .map_err(|_| decode_err(path, format!("bad header token {tok:?}")))?;
    }
    let [width, height, maxval] = dims;
    if width == 0 || height == 0 {
        return Err(decode_err(path, "zero image dimension"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(decode_err(
            path,
            format!("maxval {maxval} unsupported; only 8-bit images are handled"),
        ));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(decode_err(path, "missing raster separator"));
    }
    pos += 1;
    let expected = width * height * channels;
    let raster = &bytes[pos..];
    if raster.len() < expected {
        return Err(decode_err(
            path,
            format!(
                "raster truncated: expected {expected} bytes, found {}",
                raster.len()
            ),
        ));
    }
    if raster.len() > expected {
        return Err(decode_err(path, "trailing bytes after raster"));
    }
    Ok(RawImage {
        width,
        height,
        channels,
        data: raster.to_vec(),
    })
}

pub fn encode_pnm(width: usize, height: usize, channels: usize, data: &[u8]) -> Vec<u8> {
    assert!(channels == 1 || channels == 3);
    assert_eq!(data.len(), width * height * channels);
    let magic = if channels == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(data);
    out
}

/// Reads a PGM/PPM (or PNG with the `png` feature) into a fully valid canvas.
pub fn read_image<T: Scalar>(path: &Path) -> Result<Canvas<T>> {
    let bytes = fs::read(path)?;
    let raw = if bytes.starts_with(b"\x89PNG") {
        decode_png(&bytes, path)?
    } else {
        decode_pnm(&bytes, path)?
    };
    Canvas::from_u8(raw.width, raw.height, raw.channels, &raw.data)
}

/// Writes the canvas as binary PGM (1 channel) or PPM (3 channels); a
/// `.png` extension selects PNG when the feature is enabled.
pub fn write_image<T: Scalar>(path: &Path, canvas: &Canvas<T>) -> Result<()> {
    let data = canvas.to_u8_interleaved();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase());
    let bytes = match ext.as_deref() {
        Some("png") => encode_png(canvas.nx(), canvas.ny(), canvas.nc(), &data, path)?,
        _ => encode_pnm(canvas.nx(), canvas.ny(), canvas.nc(), &data),
    };
    let mut file = fs::File::create(path)?;
    file.write_all(&bytes)?;
    Ok(())
}

#[cfg(feature = "png")]
fn decode_png(bytes: &[u8], path: &Path) -> Result<RawImage> {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder
        .read_info()
        .map_err(|e| decode_err(path, e.to_string()))?;
    let mut buf = vec![0u8; reader.output_buffer_size().unwrap_or(0)];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| decode_err(path, e.to_string()))?;
    if info.bit_depth != png::BitDepth::Eight {
        return Err(decode_err(path, "only 8-bit PNG is supported"));
    }
    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::Rgb => 3,
        other => {
            return Err(decode_err(
                path,
                format!("unsupported PNG color type {other:?}"),
            ))
        }
    };
    buf.truncate(info.buffer_size());
    Ok(RawImage {
        width: info.width as usize,
        height: info.height as usize,
        channels,
        data: buf,
    })
}

#[cfg(not(feature = "png"))]
fn decode_png(_bytes: &[u8], path: &Path) -> Result<RawImage> {
    Err(decode_err(
        path,
        "PNG input needs the `png` feature (build with --features png)",
    ))
}

#[cfg(feature = "png")]
fn encode_png(
    width: usize,
    height: usize,
    channels: usize,
    data: &[u8],
    path: &Path,
) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, width as u32, height as u32);
        encoder.set_color(if channels == 1 {
            png::ColorType::Grayscale
        } else {
            png::ColorType::Rgb
        });
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder
            .write_header()
            .map_err(|e| decode_err(path, e.to_string()))?;
        writer
            .write_image_data(data)
            .map_err(|e| decode_err(path, e.to_string()))?;
    }
    Ok(out)
}

#[cfg(not(feature = "png"))]
fn encode_png(
    _width: usize,
    _height: usize,
    _channels: usize,
    _data: &[u8],
    path: &Path,
) -> Result<Vec<u8>> {
    Err(decode_err(
        path,
        "PNG output needs the `png` feature (build with --features png)",
    ))
}
