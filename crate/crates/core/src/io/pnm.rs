//! Netpbm gray (P2/P5) and color (P3/P6) rasters.

use std::path::Path;

use super::IoError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    /// 1 for gray, 3 for RGB.
    pub channels: usize,
    pub maxval: u16,
    /// Row-major, channels interleaved.
    pub data: Vec<u16>,
}

impl Image {
    pub fn gray(width: usize, height: usize, maxval: u16, data: Vec<u16>) -> Self {
        assert_eq!(data.len(), width * height);
        Image {
            width,
            height,
            channels: 1,
            maxval,
            data,
        }
    }

    pub fn rgb(width: usize, height: usize, maxval: u16, data: Vec<u16>) -> Self {
        assert_eq!(data.len(), width * height * 3);
        Image {
            width,
            height,
            channels: 3,
            maxval,
            data,
        }
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[u16] {
        let start = (y * self.width + x) * self.channels;
        &self.data[start..start + self.channels]
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height
    }
}

struct Tokens<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn skip_space(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn next(&mut self) -> Result<&'a [u8], IoError> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(IoError::Image("unexpected end of data".into()));
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self) -> Result<usize, IoError> {
        let token = self.next()?;
        std::str::from_utf8(token)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                IoError::Image(format!("bad number '{}'", String::from_utf8_lossy(token)))
            })
    }
}

pub fn decode(bytes: &[u8]) -> Result<Image, IoError> {
    let mut tokens = Tokens { bytes, pos: 0 };
    let magic = tokens.next()?;
    let (channels, binary) = match magic {
        b"P2" => (1, false),
        b"P5" => (1, true),
        b"P3" => (3, false),
        b"P6" => (3, true),
        _ => return Err(IoError::Image("not a P2/P3/P5/P6 file".into())),
    };
    let width = tokens.number()?;
    let height = tokens.number()?;
    let maxval = tokens.number()?;
    if maxval == 0 || maxval > u16::MAX as usize {
        return Err(IoError::Image(format!("maxval {maxval} out of range")));
    }
    let count = width
        .checked_mul(height)
        .and_then(|p| p.checked_mul(channels))
        .ok_or_else(|| IoError::Image("dimensions overflow".into()))?;
    let mut data = Vec::with_capacity(count);
    if binary {
        // exactly one whitespace byte separates the header from the raster
        let start = tokens.pos + 1;
        let wide = maxval > 255;
        let need = count * if wide { 2 } else { 1 };
        let raster = bytes
            .get(start..start + need)
            .ok_or_else(|| IoError::Image("raster is truncated".into()))?;
        if wide {
            data.extend(raster.chunks(2).map(|p| u16::from_be_bytes([p[0], p[1]])));
        } else {
            data.extend(raster.iter().map(|&b| b as u16));
        }
    } else {
        for _ in 0..count {
            data.push(tokens.number()? as u16);
        }
    }
    if let Some(&v) = data.iter().find(|&&v| v as usize > maxval) {
        return Err(IoError::Image(format!(
            "sample {v} exceeds maxval {maxval}"
        )));
    }
    Ok(Image {
        width,
        height,
        channels,
        maxval: maxval as u16,
        data,
    })
}

/// Binary encoding (P5 or P6).
pub fn encode(image: &Image) -> Vec<u8> {
    let magic = if image.channels == 3 { "P6" } else { "P5" };
    let mut out = format!(
        "{magic}\n{} {}\n{}\n",
        image.width, image.height, image.maxval
    )
    .into_bytes();
    if image.maxval > 255 {
        for v in &image.data {
            out.extend_from_slice(&v.to_be_bytes());
        }
    } else {
        out.extend(image.data.iter().map(|&v| v as u8));
    }
    out
}

pub fn read_image(path: impl AsRef<Path>) -> Result<Image, IoError> {
    decode(&std::fs::read(path)?)
}

pub fn write_image(path: impl AsRef<Path>, image: &Image) -> Result<(), IoError> {
    Ok(std::fs::write(path, encode(image))?)
}

/// Groups pixel indices by segment value, in increasing value order, so that
/// segment ids are contiguous after load. Segments of a single pixel are
/// dropped.
pub fn segments(segmentation: &Image) -> Vec<Vec<usize>> {
    let mut by_value: std::collections::BTreeMap<Vec<u16>, Vec<usize>> = Default::default();
    for p in 0..segmentation.pixels() {
        let start = p * segmentation.channels;
        by_value
            .entry(segmentation.data[start..start + segmentation.channels].to_vec())
            .or_default()
            .push(p);
    }
    by_value.into_values().filter(|s| s.len() >= 2).collect()
}
