//! Observation function: patch partition, composition and the
//! non-image modalities.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::env::{goal_index, GridDims, PuzzleState};
use crate::error::{Error, Result};
use crate::observation::image::{Image, CHANNELS};
use crate::rng::RandomSource;

/// What the blank cell shows in an image observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlankFill {
    /// Constant black.
    #[default]
    Black,
    /// The blank's own source patch, as if no tile were missing.
    SourcePatch,
    /// Uniform noise from a fixed seed.
    Noise { seed: u64 },
}

/// Pixel bounds of cell `k` of `n` along a side of `side` pixels:
/// `[floor(k * side / n), floor((k + 1) * side / n))`.
pub fn patch_bounds(side: usize, n: usize, k: usize) -> Range<usize> {
    (k * side / n)..((k + 1) * side / n)
}

/// One cell of the partitioned source image.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub rows: Range<usize>,
    pub cols: Range<usize>,
    pub pixels: Image,
}

fn check_fits(image: &Image, dims: GridDims) -> Result<()> {
    if image.height() < dims.height() || image.width() < dims.width() {
        return Err(Error::ImageTooSmall {
            height: image.height(),
            width: image.width(),
            rows: dims.height(),
            cols: dims.width(),
        });
    }
    Ok(())
}

/// Splits `image` into `H * W` row-major patches by floor boundaries.
pub fn partition_patches(image: &Image, dims: GridDims) -> Result<Vec<Patch>> {
    check_fits(image, dims)?;
    let mut patches = Vec::with_capacity(dims.cells());
    for r in 0..dims.height() {
        let rows = patch_bounds(image.height(), dims.height(), r);
        for c in 0..dims.width() {
            let cols = patch_bounds(image.width(), dims.width(), c);
            let pixels = image.crop(rows.start, cols.start, rows.len(), cols.len());
            patches.push(Patch {
                rows: rows.clone(),
                cols,
                pixels,
            });
        }
    }
    Ok(patches)
}

/// Composes the image observation of `state`.
///
/// Output cell `(r, c)` shows the source patch at the goal cell of the tile
/// in `(r, c)`. When source and destination cells differ in size (grids
/// that do not divide the image) the patch is resampled nearest-neighbour;
/// equal-size cells are copied verbatim.
pub fn render_image_obs(state: &PuzzleState, image: &Image, blank: BlankFill) -> Result<Image> {
    let dims = state.dims();
    check_fits(image, dims)?;
    let (ih, iw) = (image.height(), image.width());
    let cells = dims.cells();
    let mut out = Image::zeros(ih, iw);
    let mut noise = match blank {
        BlankFill::Noise { seed } => Some(RandomSource::new(seed)),
        _ => None,
    };
    for r in 0..dims.height() {
        let dst_rows = patch_bounds(ih, dims.height(), r);
        for c in 0..dims.width() {
            let dst_cols = patch_bounds(iw, dims.width(), c);
            let tile = state.tile_at(r, c);
            if tile == 0 {
                match blank {
                    BlankFill::Black => continue,
                    BlankFill::Noise { .. } => {
                        let rng = noise.as_mut().expect("noise source");
                        for y in dst_rows.clone() {
                            for x in dst_cols.clone() {
                                let px = [rng.unit_f32(), rng.unit_f32(), rng.unit_f32()];
                                out.set_pixel(y, x, px);
                            }
                        }
                        continue;
                    }
                    BlankFill::SourcePatch => {}
                }
            }
            let (gr, gc) = dims.row_col(goal_index(tile as usize, cells));
            let src_rows = patch_bounds(ih, dims.height(), gr);
            let src_cols = patch_bounds(iw, dims.width(), gc);
            blit(image, &src_rows, &src_cols, &mut out, &dst_rows, &dst_cols);
        }
    }
    Ok(out)
}

fn blit(
    src: &Image,
    src_rows: &Range<usize>,
    src_cols: &Range<usize>,
    dst: &mut Image,
    dst_rows: &Range<usize>,
    dst_cols: &Range<usize>,
) {
    let (sh, sw) = (src_rows.len(), src_cols.len());
    let (dh, dw) = (dst_rows.len(), dst_cols.len());
    let dst_width = dst.width();
    for dy in 0..dh {
        let sy = src_rows.start + dy * sh / dh;
        let out_row = dst_rows.start + dy;
        if sw == dw {
            let from = &src.row(sy)[src_cols.start * CHANNELS..src_cols.end * CHANNELS];
            let start = (out_row * dst_width + dst_cols.start) * CHANNELS;
            dst.data_mut()[start..start + dw * CHANNELS].copy_from_slice(from);
        } else {
            for dx in 0..dw {
                let sx = src_cols.start + dx * sw / dw;
                dst.set_pixel(out_row, dst_cols.start + dx, src.pixel(sy, sx));
            }
        }
    }
}

/// `(H*W) x (H*W)` permutation matrix. Row = cell, column = goal cell of
/// the tile occupying it (tile `k` -> column `k - 1`, blank -> last column),
/// so the solved state encodes as the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneHot {
    n: usize,
    data: Vec<u8>,
}

impl OneHot {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, cell: usize, column: usize) -> u8 {
        self.data[cell * self.n + column]
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn from_data(n: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::MalformedState(format!(
                "one-hot buffer of {} entries is not {n}x{n}",
                data.len()
            )));
        }
        Ok(Self { n, data })
    }

    /// Recovers the tile list from each row's argmax.
    pub fn decode(&self) -> Vec<u16> {
        let n = self.n;
        self.data
            .chunks_exact(n)
            .map(|row| {
                let column = row
                    .iter()
                    .enumerate()
                    .max_by_key(|(i, &v)| (v, std::cmp::Reverse(*i)))
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                if column == n - 1 {
                    0
                } else {
                    column as u16 + 1
                }
            })
            .collect()
    }

    pub fn decode_state(&self, dims: GridDims) -> Result<PuzzleState> {
        PuzzleState::from_tiles(dims, self.decode())
    }
}

pub fn render_onehot_obs(state: &PuzzleState) -> OneHot {
    let n = state.dims().cells();
    let mut data = vec![0u8; n * n];
    for (cell, &t) in state.tiles().iter().enumerate() {
        data[cell * n + goal_index(t as usize, n)] = 1;
    }
    OneHot { n, data }
}

/// Tile ids scaled into `[0, 1]` by `H*W - 1`.
pub fn render_state_vec(state: &PuzzleState) -> Vec<f32> {
    let max = (state.dims().cells() - 1) as f32;
    state.tiles().iter().map(|&t| f32::from(t) / max).collect()
}
