//! Grayscale image, histogram and edge-map types with PGM/PNG file I/O.

use std::fs;
use std::io::{self, BufWriter};
use std::path::Path;

use thiserror::Error;

/// Number of gray levels handled by the pipeline (8-bit input).
pub const LEVELS: usize = 256;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("file not found: {0}")]
    FileNotFound(String),
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt image file: {0}")]
    CorruptFile(String),
    #[error("i/o failure: {0}")]
    IoFailure(#[from] io::Error),
    #[error("invalid image dimensions {width}x{height} for {len} pixels")]
    InvalidDimensions { width: usize, height: usize, len: usize },
}

/// Row-major 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 || width.checked_mul(height) != Some(pixels.len()) {
            return Err(ImageError::InvalidDimensions { width, height, len: pixels.len() });
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self, ImageError> {
        Self::new(width, height, vec![value; width.saturating_mul(height)])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self, ImageError> {
        let mut pixels = Vec::with_capacity(width.saturating_mul(height));
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }
}

/// Gray-level counts `h(i)` for `i` in `0..256`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    counts: [u64; LEVELS],
    total: u64,
}

impl Histogram {
    /// Builds a histogram from raw counts. Returns `None` if every count is zero.
    pub fn from_counts(counts: [u64; LEVELS]) -> Option<Self> {
        let total = counts.iter().sum();
        (total > 0).then_some(Self { counts, total })
    }

    /// Like [`Histogram::from_counts`] but accepts a slice of at most 256 entries,
    /// padding the tail with zeros.
    pub fn from_slice(counts: &[u64]) -> Option<Self> {
        if counts.len() > LEVELS {
            return None;
        }
        let mut full = [0u64; LEVELS];
        full[..counts.len()].copy_from_slice(counts);
        Self::from_counts(full)
    }

    pub fn counts(&self) -> &[u64; LEVELS] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// `P_i = h(i) / N`.
    pub fn probabilities(&self) -> [f64; LEVELS] {
        let n = self.total as f64;
        let mut p = [0.0; LEVELS];
        for (pi, &h) in p.iter_mut().zip(self.counts.iter()) {
            *pi = h as f64 / n;
        }
        p
    }

    /// Number of bins with a non-zero count.
    pub fn occupied_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

pub fn compute_histogram(img: &GrayImage) -> Histogram {
    let mut counts = [0u64; LEVELS];
    for &p in img.pixels() {
        counts[p as usize] += 1;
    }
    Histogram { counts, total: img.len() as u64 }
}

/// Binary per-pixel edge mask, row-major, `true` marks an edge pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    mask: Vec<bool>,
}

impl EdgeMap {
    pub fn new(width: usize, height: usize, mask: Vec<bool>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 || width.checked_mul(height) != Some(mask.len()) {
            return Err(ImageError::InvalidDimensions { width, height, len: mask.len() });
        }
        Ok(Self { width, height, mask })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self, ImageError> {
        Self::new(width, height, vec![false; width.saturating_mul(height)])
    }

    /// Interprets every non-zero pixel as an edge.
    pub fn from_image(img: &GrayImage) -> Self {
        Self {
            width: img.width,
            height: img.height,
            mask: img.pixels.iter().map(|&p| p != 0).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.mask[y * self.width + x] = value;
    }

    pub fn edge_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Renders edges as 255 and background as 0.
    pub fn to_image(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.mask.iter().map(|&m| if m { 255 } else { 0 }).collect(),
        }
    }
}

/// PGM flavour used when writing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmEncoding {
    /// `P2`, ASCII samples.
    Plain,
    /// `P5`, binary samples.
    Raw,
}

pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage, ImageError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => ImageError::FileNotFound(path.display().to_string()),
        _ => ImageError::IoFailure(e),
    })?;
    decode_image(&bytes)
}

/// Decodes PGM (P2/P5) or PNG bytes, sniffing the format from the magic number.
pub fn decode_image(bytes: &[u8]) -> Result<GrayImage, ImageError> {
    if bytes.starts_with(b"\x89PNG\r\n\x1a\n") {
        decode_png(bytes)
    } else if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        decode_pgm(bytes)
    } else if bytes.len() >= 2 && bytes[0] == b'P' && (b'1'..=b'7').contains(&bytes[1]) {
        Err(ImageError::UnsupportedFormat(format!(
            "netpbm P{} is not a grayscale PGM",
            bytes[1] as char
        )))
    } else {
        Err(ImageError::UnsupportedFormat("expected PGM or PNG data".into()))
    }
}

/// Writes a PNG when the extension is `.png`, otherwise a raw (P5) PGM.
pub fn save_image(img: &GrayImage, path: impl AsRef<Path>) -> Result<(), ImageError> {
    let path = path.as_ref();
    let is_png = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"));
    let bytes = if is_png { encode_png(img)? } else { encode_pgm(img, PgmEncoding::Raw) };
    fs::write(path, bytes)?;
    Ok(())
}

pub fn save_pgm(
    img: &GrayImage,
    path: impl AsRef<Path>,
    encoding: PgmEncoding,
) -> Result<(), ImageError> {
    fs::write(path, encode_pgm(img, encoding))?;
    Ok(())
}

pub fn encode_pgm(img: &GrayImage, encoding: PgmEncoding) -> Vec<u8> {
    let mut out = Vec::with_capacity(img.len() * 4 + 32);
    match encoding {
        PgmEncoding::Raw => {
            out.extend_from_slice(format!("P5\n{} {}\n255\n", img.width, img.height).as_bytes());
            out.extend_from_slice(&img.pixels);
        }
        PgmEncoding::Plain => {
            out.extend_from_slice(format!("P2\n{} {}\n255\n", img.width, img.height).as_bytes());
            for row in img.pixels.chunks(img.width) {
                let line = row.iter().map(u8::to_string).collect::<Vec<_>>().join(" ");
                out.extend_from_slice(line.as_bytes());
                out.push(b'\n');
            }
        }
    }
    out
}

fn encode_png(img: &GrayImage) -> Result<Vec<u8>, ImageError> {
    let mut out = Vec::new();
    {
        let w = BufWriter::new(&mut out);
        let mut encoder = png::Encoder::new(w, img.width as u32, img.height as u32);
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder
            .write_header()
            .map_err(|e| ImageError::IoFailure(io::Error::other(e)))?;
        writer
            .write_image_data(&img.pixels)
            .map_err(|e| ImageError::IoFailure(io::Error::other(e)))?;
        writer
            .finish()
            .map_err(|e| ImageError::IoFailure(io::Error::other(e)))?;
    }
    Ok(out)
}

fn decode_png(bytes: &[u8]) -> Result<GrayImage, ImageError> {
    let decoder = png::Decoder::new(bytes);
    let mut reader = decoder
        .read_info()
        .map_err(|e| ImageError::CorruptFile(e.to_string()))?;
    let (color, depth) = reader.output_color_type();
    if color != png::ColorType::Grayscale {
        return Err(ImageError::UnsupportedFormat(format!("PNG color type {color:?}")));
    }
    if depth != png::BitDepth::Eight {
        return Err(ImageError::UnsupportedFormat(format!("PNG bit depth {depth:?}")));
    }
    let mut buf = vec![0; reader.output_buffer_size()];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| ImageError::CorruptFile(e.to_string()))?;
    let (w, h) = (info.width as usize, info.height as usize);
    let mut pixels = Vec::with_capacity(w * h);
    for row in buf.chunks(info.line_size).take(h) {
        pixels.extend_from_slice(&row[..w]);
    }
    GrayImage::new(w, h, pixels).map_err(|e| ImageError::CorruptFile(e.to_string()))
}

/// Cursor over a netpbm header: whitespace-separated ASCII integers with `#` comments.
struct PnmTokens<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PnmTokens<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn next_uint(&mut self, what: &str) -> Result<usize, ImageError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(ImageError::CorruptFile(format!("missing or invalid {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ImageError::CorruptFile(format!("{what} out of range")))
    }
}

fn decode_pgm(bytes: &[u8]) -> Result<GrayImage, ImageError> {
    let raw = &bytes[..2] == b"P5";
    let mut tok = PnmTokens { bytes, pos: 2 };
    let width = tok.next_uint("width")?;
    let height = tok.next_uint("height")?;
    let maxval = tok.next_uint("maxval")?;
    if width == 0 || height == 0 {
        return Err(ImageError::CorruptFile(format!("zero dimension {width}x{height}")));
    }
    if maxval > 255 {
        return Err(ImageError::UnsupportedFormat(format!(
            "maxval {maxval} exceeds 8-bit depth"
        )));
    }
    if maxval != 255 {
        return Err(ImageError::UnsupportedFormat(format!(
            "maxval {maxval}; only 255 is accepted"
        )));
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| ImageError::CorruptFile("dimensions overflow".into()))?;

    let pixels = if raw {
        // exactly one whitespace byte separates maxval from the sample data
        let data_start = tok.pos + 1;
        let data = bytes.get(data_start..).unwrap_or(&[]);
        if data.len() != n {
            return Err(ImageError::CorruptFile(format!(
                "header declares {n} pixels, found {} bytes",
                data.len()
            )));
        }
        data.to_vec()
    } else {
        let mut pixels = Vec::with_capacity(n);
        loop {
            tok.skip_space_and_comments();
            if tok.pos >= bytes.len() {
                break;
            }
            let v = tok.next_uint("sample")?;
            if v > maxval {
                return Err(ImageError::CorruptFile(format!("sample {v} exceeds maxval")));
            }
            pixels.push(v as u8);
        }
        if pixels.len() != n {
            return Err(ImageError::CorruptFile(format!(
                "header declares {n} pixels, found {}",
                pixels.len()
            )));
        }
        pixels
    };
    GrayImage::new(width, height, pixels)
}
