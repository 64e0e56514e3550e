//! File-backed image pools.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::observation::image::Image;
use crate::rng::RandomSource;

/// The fixed set of images a run draws its episode textures from.
///
/// Immutable after construction; clone the [`Arc`] to share between
/// environments and threads.
#[derive(Debug, Clone)]
pub struct ImagePool {
    images: Vec<Arc<Image>>,
    source_ids: Vec<String>,
    pool_seed: u64,
    render_size: usize,
    skipped: Vec<String>,
}

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

/// Sorted file names of the PNG/JPEG files directly inside `dir`.
pub fn list_images(dir: &Path) -> Result<Vec<String>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut names = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase());
        if ext.is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.as_str())) {
            if let Some(name) = path.file_name().and_then(|n| n.to_str()) {
                names.push(name.to_owned());
            }
        }
    }
    names.sort();
    Ok(names)
}

impl ImagePool {
    /// Samples `p` distinct images from `dataset_dir`.
    ///
    /// The sorted listing is shuffled with `pool_seed` and walked in order;
    /// files that fail to decode are skipped (and recorded) until `p`
    /// images have been accepted. Each accepted image is bilinearly
    /// resized to `render_size` square.
    pub fn load(dataset_dir: &Path, p: usize, render_size: usize, pool_seed: u64) -> Result<Self> {
        if p == 0 {
            return Err(Error::Config("pool size must be at least 1".into()));
        }
        if render_size == 0 {
            return Err(Error::Config("render size must be positive".into()));
        }
        let mut names = list_images(dataset_dir)?;
        if names.len() < p {
            return Err(Error::NotEnoughImages {
                dir: dataset_dir.to_path_buf(),
                wanted: p,
                found: names.len(),
            });
        }
        RandomSource::new(pool_seed).shuffle(&mut names);

        let mut images = Vec::with_capacity(p);
        let mut source_ids = Vec::with_capacity(p);
        let mut skipped = Vec::new();
        for name in names {
            if images.len() == p {
                break;
            }
            match Image::open(&dataset_dir.join(&name)) {
                Ok(img) => {
                    images.push(Arc::new(img.resize_bilinear(render_size, render_size)));
                    source_ids.push(name);
                }
                Err(Error::Image(_)) => skipped.push(name),
                Err(e) => return Err(e),
            }
        }
        if images.len() < p {
            return Err(Error::NotEnoughImages {
                dir: dataset_dir.to_path_buf(),
                wanted: p,
                found: images.len(),
            });
        }
        Ok(Self {
            images,
            source_ids,
            pool_seed,
            render_size,
            skipped,
        })
    }

    /// Builds a pool from in-memory images, resizing each to `render_size`.
    pub fn from_images(
        images: Vec<(String, Image)>,
        render_size: usize,
        pool_seed: u64,
    ) -> Result<Self> {
        if images.is_empty() {
            return Err(Error::Config("pool must contain at least one image".into()));
        }
        let (source_ids, images) = images
            .into_iter()
            .map(|(id, img)| (id, Arc::new(img.resize_bilinear(render_size, render_size))))
            .unzip();
        Ok(Self {
            images,
            source_ids,
            pool_seed,
            render_size,
            skipped: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn image(&self, index: usize) -> &Image {
        &self.images[index]
    }

    pub fn source_ids(&self) -> &[String] {
        &self.source_ids
    }

    pub fn skipped(&self) -> &[String] {
        &self.skipped
    }

    pub fn pool_seed(&self) -> u64 {
        self.pool_seed
    }

    pub fn render_size(&self) -> usize {
        self.render_size
    }

    /// Uniform index into the pool.
    pub fn select_episode_image(&self, rng: &mut RandomSource) -> usize {
        rng.index(self.images.len())
    }

    /// Text manifest: `#`-prefixed header lines, then one source id per line.
    pub fn manifest(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# pool_seed={}", self.pool_seed);
        let _ = writeln!(out, "# pool_size={}", self.images.len());
        let _ = writeln!(out, "# render_size={}", self.render_size);
        for s in &self.skipped {
            let _ = writeln!(out, "# skipped={s}");
        }
        for id in &self.source_ids {
            let _ = writeln!(out, "{id}");
        }
        out
    }

    pub fn write_manifest(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.manifest()).map_err(|e| Error::io(path, e))
    }
}

/// Parsed pool manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolManifest {
    pub pool_seed: u64,
    pub source_ids: Vec<String>,
    pub skipped: Vec<String>,
}

impl PoolManifest {
    pub fn parse(text: &str) -> Result<Self> {
        let mut pool_seed = None;
        let mut source_ids = Vec::new();
        let mut skipped = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(header) = line.strip_prefix('#') {
                let Some((k, v)) = header.trim().split_once('=') else {
                    continue;
                };
                match k.trim() {
                    "pool_seed" => {
                        pool_seed = Some(v.trim().parse().map_err(|_| {
                            Error::parse("pool manifest", format!("bad seed {v:?}"))
                        })?)
                    }
                    "skipped" => skipped.push(v.trim().to_owned()),
                    _ => {}
                }
            } else {
                source_ids.push(line.to_owned());
            }
        }
        Ok(Self {
            pool_seed: pool_seed.ok_or_else(|| Error::parse("pool manifest", "missing pool_seed"))?,
            source_ids,
            skipped,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

/// Resolves the dataset directory: explicit value first, then `SPGYM_DATASET_DIR`.
pub fn dataset_dir_from_env(explicit: Option<&Path>) -> Option<PathBuf> {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os("SPGYM_DATASET_DIR").map(PathBuf::from))
}
