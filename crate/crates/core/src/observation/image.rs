//! RGB float image tensor and file I/O.

use std::io::Cursor;
use std::path::Path;

use image::{ImageFormat, RgbImage};

use crate::error::{Error, Result};

/// Channel-last RGB image with values in `[0, 1]`.
///
/// Every value the engine produces is a multiple of 2^-24 (24-bit fixed
/// point carried in f32). On that grid `1 - x` is exact, so inversion is an
/// exact involution, and 8-bit values survive a round trip unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    data: Vec<f32>,
}

pub const CHANNELS: usize = 3;

impl Image {
    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            data: vec![0.0; height * width * CHANNELS],
        }
    }

    pub fn filled(height: usize, width: usize, rgb: [f32; 3]) -> Self {
        let mut img = Self::zeros(height, width);
        for px in img.data.chunks_exact_mut(CHANNELS) {
            px.copy_from_slice(&rgb);
        }
        img
    }

    /// Wraps a buffer, snapping values onto the engine's pixel grid.
    pub fn from_data(height: usize, width: usize, mut data: Vec<f32>) -> Result<Self> {
        if data.len() != height * width * CHANNELS {
            return Err(Error::Config(format!(
                "image buffer of {} values does not match {height}x{width}x3",
                data.len()
            )));
        }
        for v in &mut data {
            *v = snap(f64::from(*v));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.height, self.width, CHANNELS]
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn pixel(&self, y: usize, x: usize) -> [f32; 3] {
        let i = (y * self.width + x) * CHANNELS;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set_pixel(&mut self, y: usize, x: usize, rgb: [f32; 3]) {
        let i = (y * self.width + x) * CHANNELS;
        self.data[i..i + CHANNELS].copy_from_slice(&rgb);
    }

    pub fn row(&self, y: usize) -> &[f32] {
        let stride = self.width * CHANNELS;
        &self.data[y * stride..(y + 1) * stride]
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| f64::from(v)).sum::<f64>() / self.data.len() as f64
    }

    pub fn in_unit_range(&self) -> bool {
        self.data.iter().all(|v| (0.0..=1.0).contains(v))
    }

    /// Copies the `h x w` window whose top-left corner is `(y0, x0)`.
    pub fn crop(&self, y0: usize, x0: usize, h: usize, w: usize) -> Image {
        assert!(y0 + h <= self.height && x0 + w <= self.width);
        let mut out = Image::zeros(h, w);
        for y in 0..h {
            let src = &self.row(y0 + y)[x0 * CHANNELS..(x0 + w) * CHANNELS];
            out.data[y * w * CHANNELS..(y + 1) * w * CHANNELS].copy_from_slice(src);
        }
        out
    }

    /// Bilinear resize with pixel-center alignment.
    ///
    /// Output pixel `d` samples source coordinate `(d + 0.5) * in / out - 0.5`,
    /// clamped to `[0, in - 1]`; the two neighbouring source pixels are
    /// blended as `(1 - t) * a + t * b` in f64 and the result is stored as
    /// a grid value clamped to `[0, 1]`. Resizing to the same shape is an exact copy.
    pub fn resize_bilinear(&self, out_h: usize, out_w: usize) -> Image {
        if out_h == self.height && out_w == self.width {
            return self.clone();
        }
        let ys = sample_positions(self.height, out_h);
        let xs = sample_positions(self.width, out_w);
        let mut out = Image::zeros(out_h, out_w);
        for (oy, &(y0, y1, ty)) in ys.iter().enumerate() {
            for (ox, &(x0, x1, tx)) in xs.iter().enumerate() {
                let o = (oy * out_w + ox) * CHANNELS;
                for c in 0..CHANNELS {
                    let at = |y: usize, x: usize| f64::from(self.data[(y * self.width + x) * CHANNELS + c]);
                    let top = (1.0 - tx) * at(y0, x0) + tx * at(y0, x1);
                    let bottom = (1.0 - tx) * at(y1, x0) + tx * at(y1, x1);
                    let v = (1.0 - ty) * top + ty * bottom;
                    out.data[o + c] = snap(v);
                }
            }
        }
        out
    }

    pub fn from_rgb8(img: &RgbImage) -> Self {
        let (w, h) = img.dimensions();
        let data = img
            .as_raw()
            .iter()
            .map(|&b| snap(f64::from(b) / 255.0))
            .collect();
        Self {
            height: h as usize,
            width: w as usize,
            data,
        }
    }

    /// Quantizes to 8 bits with round-to-nearest.
    pub fn to_rgb8(&self) -> RgbImage {
        let raw = self.data.iter().map(|&v| quantize(v)).collect();
        RgbImage::from_raw(self.width as u32, self.height as u32, raw).expect("buffer sized to shape")
    }

    pub fn decode(bytes: &[u8]) -> Result<Image> {
        let img = image::load_from_memory(bytes)?;
        Ok(Image::from_rgb8(&img.to_rgb8()))
    }

    pub fn open(path: &Path) -> Result<Image> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Image::decode(&bytes)
    }

    pub fn encode_png(&self) -> Result<Vec<u8>> {
        let mut buf = Cursor::new(Vec::new());
        self.to_rgb8().write_to(&mut buf, ImageFormat::Png)?;
        Ok(buf.into_inner())
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode_png()?).map_err(|e| Error::io(path, e))
    }
}

/// Pixel grid resolution.
pub const PIXEL_GRID: f64 = 16_777_216.0;

/// Clamps to `[0, 1]` and rounds to the nearest multiple of 2^-24.
#[inline]
pub fn snap(v: f64) -> f32 {
    ((v.clamp(0.0, 1.0) * PIXEL_GRID).round() / PIXEL_GRID) as f32
}

pub fn quantize(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn sample_positions(input: usize, output: usize) -> Vec<(usize, usize, f64)> {
    let scale = input as f64 / output as f64;
    (0..output)
        .map(|d| {
            let src = ((d as f64 + 0.5) * scale - 0.5).clamp(0.0, (input - 1) as f64);
            let lo = src.floor() as usize;
            let hi = (lo + 1).min(input - 1);
            (lo, hi, src - lo as f64)
        })
        .collect()
}
