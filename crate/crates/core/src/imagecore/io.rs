use std::fs;
use std::io::{BufWriter, Cursor, Write};
use std::path::Path;

use super::{Dimensions, Image, ImageError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Png,
    Pgm,
    Ppm,
}

fn format_for(path: &Path) -> Result<Format> {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("png") => Ok(Format::Png),
        Some("pgm") => Ok(Format::Pgm),
        Some("ppm") => Ok(Format::Ppm),
        _ => Err(ImageError::UnsupportedExtension(path.display().to_string())),
    }
}

/// Reads an 8-bit PNG (gray or RGB) or a binary PGM/PPM.
///
/// The format is sniffed from the magic bytes, not the extension.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| ImageError::Unreadable {
        path: path.display().to_string(),
        source,
    })?;
    decode(&bytes)
}

pub(crate) fn decode(bytes: &[u8]) -> Result<Image> {
    if bytes.starts_with(b"\x89PNG") {
        decode_png(bytes)
    } else if bytes.starts_with(b"P5") || bytes.starts_with(b"P6") {
        decode_pnm(bytes)
    } else {
        Err(ImageError::Corrupt("unrecognized file signature".into()))
    }
}

/// Writes `img` losslessly; the extension selects PNG, PGM (gray) or PPM (RGB).
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let format = format_for(path)?;
    let bytes = encode(img, format)?;
    let unwritable = |source| ImageError::Unwritable {
        path: path.display().to_string(),
        source,
    };
    let file = fs::File::create(path).map_err(unwritable)?;
    let mut out = BufWriter::new(file);
    out.write_all(&bytes).map_err(unwritable)?;
    out.flush().map_err(unwritable)
}

fn encode(img: &Image, format: Format) -> Result<Vec<u8>> {
    match (format, img.channels()) {
        (Format::Png, _) => encode_png(img),
        (Format::Pgm, 1) => Ok(encode_pnm(img, b"P5")),
        (Format::Ppm, 3) => Ok(encode_pnm(img, b"P6")),
        (Format::Pgm, c) => Err(ImageError::UnsupportedCombination {
            channels: c,
            format: "PGM",
        }),
        (Format::Ppm, c) => Err(ImageError::UnsupportedCombination {
            channels: c,
            format: "PPM",
        }),
    }
}

fn decode_png(bytes: &[u8]) -> Result<Image> {
    let corrupt = |e: png::DecodingError| ImageError::Corrupt(e.to_string());
    let decoder = png::Decoder::new(Cursor::new(bytes));
    let mut reader = decoder.read_info().map_err(corrupt)?;
    let info = reader.info();
    let (width, height) = (info.width as usize, info.height as usize);
    if info.bit_depth != png::BitDepth::Eight {
        return Err(ImageError::UnsupportedBitDepth(format!(
            "{}-bit PNG",
            info.bit_depth as u8
        )));
    }
    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::Rgb => 3,
        png::ColorType::GrayscaleAlpha | png::ColorType::Rgba => return Err(ImageError::AlphaChannel),
        png::ColorType::Indexed => return Err(ImageError::UnsupportedColorType("indexed PNG".into())),
    };
    if info.trns.is_some() {
        return Err(ImageError::AlphaChannel);
    }
    let dims = Dimensions::new(width, height)?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| ImageError::Corrupt("image too large".into()))?;
    let mut buf = vec![0u8; size];
    let frame = reader.next_frame(&mut buf).map_err(corrupt)?;
    buf.truncate(frame.buffer_size());
    let row = width * channels;
    if frame.line_size != row {
        return Err(ImageError::Corrupt("unexpected PNG row stride".into()));
    }
    Image::new(dims, channels, buf)
}

fn encode_png(img: &Image) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let internal = |e: png::EncodingError| ImageError::Corrupt(e.to_string());
    {
        let mut encoder = png::Encoder::new(&mut out, img.width() as u32, img.height() as u32);
        encoder.set_color(if img.channels() == 1 {
            png::ColorType::Grayscale
        } else {
            png::ColorType::Rgb
        });
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header().map_err(internal)?;
        writer.write_image_data(img.pixels()).map_err(internal)?;
        writer.finish().map_err(internal)?;
    }
    Ok(out)
}

/// Cursor over a netpbm header: whitespace-separated ASCII fields with `#`
/// comments running to end of line.
struct PnmHeader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl PnmHeader<'_> {
    fn skip_space(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&b| b != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ImageError::Corrupt(format!("bad PNM header field: {what}")))
    }
}

fn decode_pnm(bytes: &[u8]) -> Result<Image> {
    let channels = if bytes[1] == b'5' { 1 } else { 3 };
    let mut hdr = PnmHeader { bytes, pos: 2 };
    let width = hdr.number("width")?;
    let height = hdr.number("height")?;
    let maxval = hdr.number("maxval")?;
    // exactly one whitespace byte separates the header from the raster
    if !hdr.bytes.get(hdr.pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(ImageError::Corrupt("missing PNM raster separator".into()));
    }
    hdr.pos += 1;
    if maxval != 255 {
        return Err(ImageError::UnsupportedBitDepth(format!("PNM maxval {maxval}")));
    }
    let dims = Dimensions::new(width, height)?;
    let expected = dims.area() * channels;
    let raster = &bytes[hdr.pos..];
    if raster.len() < expected {
        return Err(ImageError::Corrupt(format!(
            "PNM raster truncated: {} of {expected} bytes",
            raster.len()
        )));
    }
    Image::new(dims, channels, raster[..expected].to_vec())
}

fn encode_pnm(img: &Image, magic: &[u8]) -> Vec<u8> {
    let header = format!("\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(magic.len() + header.len() + img.pixels().len());
    out.extend_from_slice(magic);
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(img.pixels());
    out
}
