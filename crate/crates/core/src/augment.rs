//! Image augmentations applied to whole composed observations.
//!
//! All augmentations map an `S x S x 3` image in `[0, 1]` to another of the
//! same shape and range. Stochastic ones draw from the supplied
//! [`RandomSource`] and are reproducible under a fixed seed.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observation::{snap, Image, CHANNELS};
use crate::rng::RandomSource;

/// Crop window side used when none is given (100 px renders cropped to 84).
pub const DEFAULT_CROP_SIDE: usize = 84;
pub const DEFAULT_SHIFT: usize = 4;
pub const STANDARD_GRAYSCALE_PROBABILITY: f64 = 0.2;

/// Closed sampling ranges for [`color_jitter`]. Brightness, contrast and
/// saturation are multiplicative factors (1 = identity); hue is a rotation
/// in fractions of a full turn (0 = identity).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JitterRanges {
    pub brightness: (f64, f64),
    pub contrast: (f64, f64),
    pub saturation: (f64, f64),
    pub hue: (f64, f64),
}

impl Default for JitterRanges {
    fn default() -> Self {
        Self {
            brightness: (0.8, 1.2),
            contrast: (0.8, 1.2),
            saturation: (0.8, 1.2),
            hue: (-0.05, 0.05),
        }
    }
}

impl JitterRanges {
    pub const IDENTITY: JitterRanges = JitterRanges {
        brightness: (1.0, 1.0),
        contrast: (1.0, 1.0),
        saturation: (1.0, 1.0),
        hue: (0.0, 0.0),
    };

    fn validate(&self) -> Result<()> {
        let factor = |name: &str, (lo, hi): (f64, f64)| {
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
                return Err(Error::InvalidAugment(format!(
                    "{name} range [{lo}, {hi}] must be finite, non-negative and ordered"
                )));
            }
            Ok(())
        };
        factor("brightness", self.brightness)?;
        factor("contrast", self.contrast)?;
        factor("saturation", self.saturation)?;
        let (lo, hi) = self.hue;
        if !(-0.5..=0.5).contains(&lo) || !(-0.5..=0.5).contains(&hi) || lo > hi {
            return Err(Error::InvalidAugment(format!(
                "hue range [{lo}, {hi}] must be ordered within [-0.5, 0.5]"
            )));
        }
        Ok(())
    }
}

/// One augmentation with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Augmentation {
    Crop { out_side: usize },
    Grayscale { probability: f64 },
    ChannelShuffle,
    Shift { max_offset: usize },
    Inversion,
    ColorJitter(JitterRanges),
    /// Grayscale with probability 0.2, then channel shuffle.
    Standard,
}

impl Augmentation {
    /// The six single augmentations with default parameters, in reporting order.
    pub fn catalog() -> [Augmentation; 6] {
        [
            Augmentation::Crop {
                out_side: DEFAULT_CROP_SIDE,
            },
            Augmentation::Grayscale { probability: 1.0 },
            Augmentation::ChannelShuffle,
            Augmentation::Shift {
                max_offset: DEFAULT_SHIFT,
            },
            Augmentation::Inversion,
            Augmentation::ColorJitter(JitterRanges::default()),
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Augmentation::Crop { .. } => "crop",
            Augmentation::Grayscale { .. } => "grayscale",
            Augmentation::ChannelShuffle => "channel_shuffle",
            Augmentation::Shift { .. } => "shift",
            Augmentation::Inversion => "inversion",
            Augmentation::ColorJitter(_) => "color_jitter",
            Augmentation::Standard => "standard",
        }
    }

    /// True when the augmentation needs a crop-sized (100 px) render.
    pub fn is_crop(&self) -> bool {
        matches!(self, Augmentation::Crop { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Augmentation::Grayscale { probability } if !(0.0..=1.0).contains(probability) => Err(
                Error::InvalidAugment(format!("grayscale probability {probability} not in [0, 1]")),
            ),
            Augmentation::Crop { out_side: 0 } => {
                Err(Error::InvalidAugment("crop side must be positive".into()))
            }
            Augmentation::ColorJitter(r) => r.validate(),
            _ => Ok(()),
        }
    }

    pub fn apply(&self, img: &Image, rng: &mut RandomSource) -> Result<Image> {
        match self {
            Augmentation::Crop { out_side } => crop(img, *out_side, rng),
            Augmentation::Grayscale { probability } => Ok(grayscale(img, *probability, rng)),
            Augmentation::ChannelShuffle => Ok(channel_shuffle(img, rng)),
            Augmentation::Shift { max_offset } => shift(img, *max_offset, rng),
            Augmentation::Inversion => Ok(invert(img)),
            Augmentation::ColorJitter(ranges) => color_jitter(img, ranges, rng),
            Augmentation::Standard => Ok(standard_pipeline(img, rng)),
        }
    }
}

impl fmt::Display for Augmentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Augmentation::Crop { out_side } => write!(f, "crop:{out_side}"),
            Augmentation::Grayscale { probability } => write!(f, "grayscale:{probability}"),
            Augmentation::Shift { max_offset } => write!(f, "shift:{max_offset}"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for Augmentation {
    type Err = Error;

    /// Parses `name` or `name:param`: `crop[:side]`, `grayscale[:p]`,
    /// `channel_shuffle`, `shift[:max]`, `inversion`, `color_jitter`, `standard`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p.trim())),
            None => (s, None),
        };
        let bad = || Error::InvalidAugment(format!("bad parameter in {s:?}"));
        let aug = match name.to_ascii_lowercase().replace('-', "_").as_str() {
            "crop" => Augmentation::Crop {
                out_side: param.map_or(Ok(DEFAULT_CROP_SIDE), |p| p.parse().map_err(|_| bad()))?,
            },
            "grayscale" | "greyscale" => Augmentation::Grayscale {
                probability: param.map_or(Ok(1.0), |p| p.parse().map_err(|_| bad()))?,
            },
            "channel_shuffle" => Augmentation::ChannelShuffle,
            "shift" => Augmentation::Shift {
                max_offset: param.map_or(Ok(DEFAULT_SHIFT), |p| p.parse().map_err(|_| bad()))?,
            },
            "inversion" | "invert" => Augmentation::Inversion,
            "color_jitter" => Augmentation::ColorJitter(JitterRanges::default()),
            "standard" | "pipeline" => Augmentation::Standard,
            _ => return Err(Error::InvalidAugment(format!("unknown augmentation {name:?}"))),
        };
        aug.validate()?;
        Ok(aug)
    }
}

/// Augmentations applied in sequence.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AugmentSpec(pub Vec<Augmentation>);

impl AugmentSpec {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn has_crop(&self) -> bool {
        self.0.iter().any(Augmentation::is_crop)
    }

    pub fn apply(&self, img: &Image, rng: &mut RandomSource) -> Result<Image> {
        let mut out = img.clone();
        for aug in &self.0 {
            out = aug.apply(&out, rng)?;
        }
        Ok(out)
    }
}

impl FromStr for AugmentSpec {
    type Err = Error;

    /// Comma-separated list of augmentation names.
    fn from_str(s: &str) -> Result<Self> {
        if s.trim().is_empty() || s.trim() == "none" {
            return Ok(AugmentSpec::default());
        }
        s.split(',').map(str::parse).collect::<Result<_>>().map(AugmentSpec)
    }
}

impl fmt::Display for AugmentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("none");
        }
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// With probability `probability`, replaces every channel by the
/// per-pixel channel mean. Always consumes one draw.
pub fn grayscale(img: &Image, probability: f64, rng: &mut RandomSource) -> Image {
    if rng.bernoulli(probability) {
        to_gray(img)
    } else {
        img.clone()
    }
}

fn to_gray(img: &Image) -> Image {
    let mut out = img.clone();
    for px in out.data_mut().chunks_exact_mut(CHANNELS) {
        // Sum of three f32 is exact in f64, so equal channels average to themselves.
        let mean = (f64::from(px[0]) + f64::from(px[1]) + f64::from(px[2])) / 3.0;
        let g = snap(mean);
        px.fill(g);
    }
    out
}

/// The six orderings of (R, G, B); output channel `c` takes input `perm[c]`.
pub const CHANNEL_PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Reorders channels by a uniformly drawn permutation.
pub fn channel_shuffle(img: &Image, rng: &mut RandomSource) -> Image {
    let perm = CHANNEL_PERMUTATIONS[rng.index(CHANNEL_PERMUTATIONS.len())];
    permute_channels(img, perm)
}

pub fn permute_channels(img: &Image, perm: [usize; 3]) -> Image {
    let mut out = img.clone();
    for (dst, src) in out
        .data_mut()
        .chunks_exact_mut(CHANNELS)
        .zip(img.data().chunks_exact(CHANNELS))
    {
        for c in 0..CHANNELS {
            dst[c] = src[perm[c]];
        }
    }
    out
}

/// Cuts a uniformly placed `out_side` square window and resizes it back to
/// the input size.
pub fn crop(img: &Image, out_side: usize, rng: &mut RandomSource) -> Result<Image> {
    let side = img.height().min(img.width());
    if out_side == 0 || out_side > side {
        return Err(Error::InvalidAugment(format!(
            "crop side {out_side} exceeds image side {side}"
        )));
    }
    let y0 = rng.index(img.height() - out_side + 1);
    let x0 = rng.index(img.width() - out_side + 1);
    Ok(crop_at(img, y0, x0, out_side))
}

pub fn crop_at(img: &Image, y0: usize, x0: usize, out_side: usize) -> Image {
    img.crop(y0, x0, out_side, out_side)
        .resize_bilinear(img.height(), img.width())
}

/// Translates by `(dy, dx)`, each uniform in `[-max_offset, max_offset]`;
/// vacated pixels replicate the nearest edge.
pub fn shift(img: &Image, max_offset: usize, rng: &mut RandomSource) -> Result<Image> {
    if max_offset >= img.height().min(img.width()) {
        return Err(Error::InvalidAugment(format!(
            "shift {max_offset} is not smaller than the image side"
        )));
    }
    let m = max_offset as i64;
    let dy = rng.int_inclusive(-m, m);
    let dx = rng.int_inclusive(-m, m);
    Ok(shift_by(img, dy, dx))
}

pub fn shift_by(img: &Image, dy: i64, dx: i64) -> Image {
    let (h, w) = (img.height() as i64, img.width() as i64);
    let mut out = Image::zeros(img.height(), img.width());
    for y in 0..h {
        let sy = (y - dy).clamp(0, h - 1) as usize;
        for x in 0..w {
            let sx = (x - dx).clamp(0, w - 1) as usize;
            out.set_pixel(y as usize, x as usize, img.pixel(sy, sx));
        }
    }
    out
}

/// `x -> 1 - x` on every value.
pub fn invert(img: &Image) -> Image {
    let mut out = img.clone();
    for v in out.data_mut() {
        *v = 1.0 - *v;
    }
    out
}

/// Factors drawn for one color-jitter application.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterFactors {
    pub brightness: f64,
    pub contrast: f64,
    pub saturation: f64,
    pub hue: f64,
}

/// Brightness, contrast, saturation and hue adjustments, in that order,
/// with factors drawn independently and uniformly from `ranges`.
pub fn color_jitter(img: &Image, ranges: &JitterRanges, rng: &mut RandomSource) -> Result<Image> {
    ranges.validate()?;
    let factors = JitterFactors {
        brightness: rng.uniform(ranges.brightness.0, ranges.brightness.1),
        contrast: rng.uniform(ranges.contrast.0, ranges.contrast.1),
        saturation: rng.uniform(ranges.saturation.0, ranges.saturation.1),
        hue: rng.uniform(ranges.hue.0, ranges.hue.1),
    };
    Ok(color_jitter_with(img, factors))
}

const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

fn luma(px: &[f64]) -> f64 {
    LUMA[0] * px[0] + LUMA[1] * px[1] + LUMA[2] * px[2]
}

/// Applies fixed jitter factors. Identity factors leave the image untouched.
pub fn color_jitter_with(img: &Image, f: JitterFactors) -> Image {
    let mut px: Vec<f64> = img.data().iter().map(|&v| f64::from(v)).collect();
    let clamp_all = |px: &mut [f64]| px.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));

    if f.brightness != 1.0 {
        px.iter_mut().for_each(|v| *v *= f.brightness);
        clamp_all(&mut px);
    }
    if f.contrast != 1.0 {
        let n = (px.len() / CHANNELS) as f64;
        let mean = px.chunks_exact(CHANNELS).map(luma).sum::<f64>() / n;
        px.iter_mut()
            .for_each(|v| *v = f.contrast * *v + (1.0 - f.contrast) * mean);
        clamp_all(&mut px);
    }
    if f.saturation != 1.0 {
        for p in px.chunks_exact_mut(CHANNELS) {
            let gray = luma(p);
            p.iter_mut()
                .for_each(|v| *v = f.saturation * *v + (1.0 - f.saturation) * gray);
        }
        clamp_all(&mut px);
    }
    if f.hue != 0.0 {
        for p in px.chunks_exact_mut(CHANNELS) {
            let (h, s, v) = rgb_to_hsv(p[0], p[1], p[2]);
            let (r, g, b) = hsv_to_rgb((h + f.hue).rem_euclid(1.0), s, v);
            p.copy_from_slice(&[r, g, b]);
        }
        clamp_all(&mut px);
    }
    let data = px.into_iter().map(snap).collect();
    Image::from_data(img.height(), img.width(), data).expect("same shape")
}

/// Hue in `[0, 1)`, saturation and value in `[0, 1]`.
fn rgb_to_hsv(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    let h = if delta == 0.0 {
        0.0
    } else if max == r {
        ((g - b) / delta).rem_euclid(6.0) / 6.0
    } else if max == g {
        ((b - r) / delta + 2.0) / 6.0
    } else {
        ((r - g) / delta + 4.0) / 6.0
    };
    (h, s, max)
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> (f64, f64, f64) {
    let c = v * s;
    let hp = h * 6.0;
    let x = c * (1.0 - (hp.rem_euclid(2.0) - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    (r + m, g + m, b + m)
}

/// Grayscale with probability 0.2, then a channel shuffle, on one stream.
pub fn standard_pipeline(img: &Image, rng: &mut RandomSource) -> Image {
    let gray = grayscale(img, STANDARD_GRAYSCALE_PROBABILITY, rng);
    channel_shuffle(&gray, rng)
}
