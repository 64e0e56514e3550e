//! Probe datasets: rendered observations paired with one-hot state labels.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{sample_uniform_solvable, GridDims, PuzzleState};
use crate::error::{Error, Result};
use crate::harness::metrics::write_text;
use crate::observation::tensor::{read_tensor, write_tensor, TensorHeader};
use crate::observation::{render_onehot_obs, ImagePool, Modality, ObsSpec, Observation, OneHot, CHANNELS};
use crate::rng::RandomSource;

pub const PROBE_SCHEMA: u32 = 1;
pub const OBSERVATIONS_FILE: &str = "observations.f32";
pub const LABELS_FILE: &str = "labels.f32";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeManifest {
    pub schema: u32,
    pub dims: GridDims,
    pub samples: usize,
    pub seed: u64,
    pub observation_shape: [usize; 3],
    pub label_shape: [usize; 3],
    pub image_indices: Vec<usize>,
    pub states: Vec<PuzzleState>,
}

/// Renders `n_samples` uniform solvable states, each on a uniformly chosen
/// pool image, and writes them with their one-hot labels into `out_dir`.
pub fn export_probe_dataset(
    dims: GridDims,
    obs: &ObsSpec,
    pool: &ImagePool,
    n_samples: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<ProbeManifest> {
    if obs.modality != Modality::Image {
        return Err(Error::Config("probe datasets need the image modality".into()));
    }
    if pool.render_size() != obs.render_size {
        return Err(Error::Config(format!(
            "pool rendered at {} px, expected {}",
            pool.render_size(),
            obs.render_size
        )));
    }
    let mut rng = RandomSource::new(seed);
    let samples: Vec<(PuzzleState, usize)> = (0..n_samples)
        .map(|_| {
            let s = sample_uniform_solvable(dims, &mut rng);
            (s, pool.select_episode_image(&mut rng))
        })
        .collect();
    let frames: Vec<Vec<f32>> = samples
        .par_iter()
        .map(|(s, i)| Observation::render(s, obs, Some(pool.image(*i))).map(|o| o.to_f32()))
        .collect::<Result<_>>()?;
    let labels: Vec<Vec<f32>> = samples
        .iter()
        .map(|(s, _)| render_onehot_obs(s).data().iter().map(|&b| f32::from(b)).collect())
        .collect();

    let side = obs.render_size;
    let n = dims.cells();
    let manifest = ProbeManifest {
        schema: PROBE_SCHEMA,
        dims,
        samples: n_samples,
        seed,
        observation_shape: [side, side, CHANNELS],
        label_shape: [n, n, 1],
        image_indices: samples.iter().map(|(_, i)| *i).collect(),
        states: samples.into_iter().map(|(s, _)| s).collect(),
    };
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let header = |shape: [usize; 3]| TensorHeader {
        height: shape[0] as u32,
        width: shape[1] as u32,
        channels: shape[2] as u32,
    };
    write_tensor(
        &out_dir.join(OBSERVATIONS_FILE),
        header(manifest.observation_shape),
        &as_slices(&frames),
    )?;
    write_tensor(&out_dir.join(LABELS_FILE), header(manifest.label_shape), &as_slices(&labels))?;
    write_text(&out_dir.join(MANIFEST_FILE), &serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

fn as_slices(v: &[Vec<f32>]) -> Vec<&[f32]> {
    v.iter().map(Vec::as_slice).collect()
}

/// A probe dataset read back from disk.
#[derive(Debug, Clone)]
pub struct ProbeDataset {
    pub manifest: ProbeManifest,
    pub observations: Vec<f32>,
    pub labels: Vec<f32>,
}

impl ProbeDataset {
    pub fn read(dir: &Path) -> Result<Self> {
        let path: PathBuf = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: ProbeManifest = serde_json::from_str(&text)?;
        let (oh, observations) = read_tensor(&dir.join(OBSERVATIONS_FILE))?;
        let (lh, labels) = read_tensor(&dir.join(LABELS_FILE))?;
        let check = |h: TensorHeader, shape: [usize; 3], len: usize, what: &'static str| {
            let dims_ok = [h.height as usize, h.width as usize, h.channels as usize] == shape;
            if !dims_ok || len != manifest.samples * h.frame_len() {
                return Err(Error::parse(what, "header disagrees with the manifest"));
            }
            Ok(())
        };
        check(oh, manifest.observation_shape, observations.len(), OBSERVATIONS_FILE)?;
        check(lh, manifest.label_shape, labels.len(), LABELS_FILE)?;
        Ok(Self {
            manifest,
            observations,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.manifest.samples
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn observation(&self, i: usize) -> &[f32] {
        let len: usize = self.manifest.observation_shape.iter().product();
        &self.observations[i * len..(i + 1) * len]
    }

    /// Decodes label `i` back into a puzzle state.
    pub fn label_state(&self, i: usize) -> Result<PuzzleState> {
        let n = self.manifest.label_shape[0];
        let frame = &self.labels[i * n * n..(i + 1) * n * n];
        let bytes = frame
            .iter()
            .map(|&v| match v {
                0.0 => Ok(0u8),
                1.0 => Ok(1u8),
                other => Err(Error::parse("probe label", format!("non-binary entry {other}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        OneHot::from_data(n, bytes)?.decode_state(self.manifest.dims)
    }
}
