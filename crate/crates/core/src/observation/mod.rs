//! Observation function and image pools.

mod image;
mod pool;
mod render;
pub mod tensor;

use serde::{Deserialize, Serialize};

pub use self::image::{quantize, snap, Image, CHANNELS, PIXEL_GRID};
pub use pool::{dataset_dir_from_env, list_images, ImagePool, PoolManifest};
pub use render::{
    partition_patches, patch_bounds, render_image_obs, render_onehot_obs, render_state_vec,
    BlankFill, OneHot, Patch,
};

use crate::env::PuzzleState;
use crate::error::{Error, Result};

/// Default square render size.
pub const DEFAULT_RENDER_SIZE: usize = 84;
/// Render size used when a crop augmentation is configured.
pub const CROP_RENDER_SIZE: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Image,
    Onehot,
    State,
}

impl std::str::FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "image" => Ok(Modality::Image),
            "onehot" | "one-hot" | "one_hot" => Ok(Modality::Onehot),
            "state" => Ok(Modality::State),
            _ => Err(Error::parse("modality", s)),
        }
    }
}

impl std::fmt::Display for Modality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Modality::Image => "image",
            Modality::Onehot => "onehot",
            Modality::State => "state",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObsSpec {
    pub modality: Modality,
    pub render_size: usize,
    #[serde(default)]
    pub blank_fill: BlankFill,
}

impl Default for ObsSpec {
    fn default() -> Self {
        Self {
            modality: Modality::Image,
            render_size: DEFAULT_RENDER_SIZE,
            blank_fill: BlankFill::Black,
        }
    }
}

/// What the agent sees.
#[derive(Debug, Clone, PartialEq)]
pub enum Observation {
    Image(Image),
    OneHot(OneHot),
    State(Vec<f32>),
}

impl Observation {
    /// Renders `state` under `spec`. Image observations need `image`.
    pub fn render(state: &PuzzleState, spec: &ObsSpec, image: Option<&Image>) -> Result<Self> {
        Ok(match spec.modality {
            Modality::Image => {
                let image = image.ok_or_else(|| {
                    Error::Config("image modality needs an image pool".into())
                })?;
                Observation::Image(render_image_obs(state, image, spec.blank_fill)?)
            }
            Modality::Onehot => Observation::OneHot(render_onehot_obs(state)),
            Modality::State => Observation::State(render_state_vec(state)),
        })
    }

    pub fn modality(&self) -> Modality {
        match self {
            Observation::Image(_) => Modality::Image,
            Observation::OneHot(_) => Modality::Onehot,
            Observation::State(_) => Modality::State,
        }
    }

    pub fn shape(&self) -> Vec<usize> {
        match self {
            Observation::Image(img) => img.shape().to_vec(),
            Observation::OneHot(m) => vec![m.size(), m.size()],
            Observation::State(v) => vec![v.len()],
        }
    }

    pub fn as_image(&self) -> Option<&Image> {
        match self {
            Observation::Image(img) => Some(img),
            _ => None,
        }
    }

    pub fn to_f32(&self) -> Vec<f32> {
        match self {
            Observation::Image(img) => img.data().to_vec(),
            Observation::OneHot(m) => m.data().iter().map(|&b| f32::from(b)).collect(),
            Observation::State(v) => v.clone(),
        }
    }

    /// Contiguous little-endian f32 buffer, the layout handed across
    /// foreign-function boundaries together with [`Observation::shape`].
    pub fn to_le_bytes(&self) -> Vec<u8> {
        self.to_f32().iter().flat_map(|v| v.to_le_bytes()).collect()
    }
}

