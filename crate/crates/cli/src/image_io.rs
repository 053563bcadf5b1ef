//! Binary PPM (P6, maxval 255) and PNG reading/writing.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use bpbe::RgbImage;

#[derive(Debug)]
pub enum ImageError {
    Io(io::Error),
    Format(String),
}

impl std::fmt::Display for ImageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ImageError::Io(e) => write!(f, "{e}"),
            ImageError::Format(m) => write!(f, "{m}"),
        }
    }
}

impl From<io::Error> for ImageError {
    fn from(e: io::Error) -> Self {
        ImageError::Io(e)
    }
}

fn bad(msg: impl Into<String>) -> ImageError {
    ImageError::Format(msg.into())
}

/// Parses a P6 file. Comments are allowed between header fields.
pub fn decode_ppm(bytes: &[u8]) -> Result<RgbImage, ImageError> {
    if !bytes.starts_with(b"P6") {
        return Err(bad("not a binary PPM (P6)"));
    }
    let mut pos = 2;
    let mut field = || -> Result<usize, ImageError> {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err(bad("truncated PPM header")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("malformed PPM header field"))
    };
    let width = field()?;
    let height = field()?;
    let maxval = field()?;
    if maxval != 255 {
        return Err(bad(format!("unsupported maxval {maxval}, expected 255")));
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(bad("missing whitespace after PPM header"));
    }
    let data = &bytes[pos + 1..];
    let need = width * height * 3;
    if data.len() < need {
        return Err(bad(format!(
            "PPM pixel data truncated: {} of {need} bytes",
            data.len()
        )));
    }
    RgbImage::new(width, height, data[..need].to_vec()).map_err(|e| bad(e.to_string()))
}

pub fn encode_ppm(image: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.as_bytes());
    out
}

fn is_png(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

pub fn read_image(path: &Path) -> Result<RgbImage, ImageError> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(b"P6") {
        return decode_ppm(&bytes);
    }
    let img = image::load_from_memory(&bytes)
        .map_err(|e| bad(format!("{}: {e}", path.display())))?
        .into_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    RgbImage::new(w, h, img.into_raw()).map_err(|e| bad(e.to_string()))
}

pub fn write_image(path: &Path, image: &RgbImage) -> Result<(), ImageError> {
    let bytes = if is_png(path) {
        let mut buf = Vec::new();
        let png = image::RgbImage::from_raw(
            image.width() as u32,
            image.height() as u32,
            image.as_bytes().to_vec(),
        )
        .ok_or_else(|| bad("image buffer size mismatch"))?;
        png.write_to(&mut io::Cursor::new(&mut buf), image::ImageFormat::Png)
            .map_err(|e| bad(e.to_string()))?;
        buf
    } else {
        encode_ppm(image)
    };
    write_atomic(path, &bytes)?;
    Ok(())
}

/// Writes through a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let name = path.file_name().ok_or_else(|| {
        io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name")
    })?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}
