mod common;

use std::sync::Arc;

use proptest::prelude::*;
use slidegym::env::sample_uniform_solvable;
use slidegym::harness::{PuzzleEnv, RunConfig};
use slidegym::observation::tensor::{decode_tensor, encode_tensor, TensorHeader};
use slidegym::observation::{
    patch_bounds, render_image_obs, render_onehot_obs, render_state_vec, BlankFill, Image,
    ImagePool, Modality, ObsSpec, Observation, PoolManifest,
};
use slidegym::{GridDims, PuzzleState, RandomSource};

fn blank_cell_contains(dims: GridDims, side: usize, y: usize, x: usize) -> bool {
    let last_r = dims.height() - 1;
    let last_c = dims.width() - 1;
    patch_bounds(side, dims.height(), last_r).contains(&y)
        && patch_bounds(side, dims.width(), last_c).contains(&x)
}

#[test]
fn solved_render_is_source_outside_blank() {
    let mut rng = RandomSource::new(11);
    for (h, w, side) in [(3, 3, 84), (3, 3, 100), (4, 4, 84), (2, 5, 37)] {
        let dims = GridDims::new(h, w).unwrap();
        let src = common::noise_image(side, &mut rng);
        let out = render_image_obs(&PuzzleState::solved(dims), &src, BlankFill::Black).unwrap();
        for y in 0..side {
            for x in 0..side {
                let expected = if blank_cell_contains(dims, side, y, x) {
                    [0.0; 3]
                } else {
                    src.pixel(y, x)
                };
                assert_eq!(out.pixel(y, x), expected, "{h}x{w}@{side} ({y},{x})");
            }
        }
        let full = render_image_obs(&PuzzleState::solved(dims), &src, BlankFill::SourcePatch).unwrap();
        assert_eq!(full, src);
    }
}

#[test]
fn patches_tile_the_image() {
    for side in 2..=120 {
        for n in 1..=side.min(8) {
            let mut covered = 0;
            for k in 0..n {
                let b = patch_bounds(side, n, k);
                assert_eq!(b.start, covered);
                assert!(!b.is_empty());
                covered = b.end;
            }
            assert_eq!(covered, side);
        }
    }
    let sizes: Vec<usize> = (0..3).map(|k| patch_bounds(100, 3, k).len()).collect();
    assert_eq!(sizes, vec![33, 33, 34]);
}

#[test]
fn onehot_round_trips_every_2x2_state() {
    let dims = GridDims::new(2, 2).unwrap();
    for tiles in common::oracle_depths(2, 2).into_keys() {
        let s = PuzzleState::from_tiles(dims, tiles).unwrap();
        let m = render_onehot_obs(&s);
        assert_eq!(m.decode_state(dims).unwrap(), s);
        for row in 0..4 {
            assert_eq!((0..4).map(|c| m.get(row, c) as u32).sum::<u32>(), 1);
        }
    }
    let id = render_onehot_obs(&PuzzleState::solved(dims));
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(id.get(i, j), (i == j) as u8);
        }
    }
}

#[test]
fn observation_shapes_and_buffers() {
    let dims = GridDims::new(3, 3).unwrap();
    let s: PuzzleState = "3,3:8,6,7,2,5,4,3,0,1".parse().unwrap();
    let img = common::noise_image(84, &mut RandomSource::new(1));
    let obs = Observation::render(&s, &ObsSpec::default(), Some(&img)).unwrap();
    assert_eq!(obs.shape(), vec![84, 84, 3]);
    assert_eq!(obs.to_le_bytes().len(), 84 * 84 * 3 * 4);
    assert!(obs.as_image().unwrap().in_unit_range());
    let spec = |modality| ObsSpec {
        modality,
        ..ObsSpec::default()
    };
    let onehot = Observation::render(&s, &spec(Modality::Onehot), None).unwrap();
    assert_eq!(onehot.shape(), vec![9, 9]);
    let state = Observation::render(&s, &spec(Modality::State), None).unwrap();
    assert_eq!(state.shape(), vec![9]);
    assert_eq!(state.to_f32(), render_state_vec(&s));
    assert_eq!(state.to_f32()[0], 1.0);
    let bytes = state.to_le_bytes();
    let back: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    assert_eq!(back, state.to_f32());
    assert!(Observation::render(&s, &ObsSpec::default(), None).is_err());
    assert!(dims.cells() == 9);
}

#[test]
fn episode_images_are_uniform_over_the_pool() {
    let pool = Arc::new(common::noise_pool("p", 5, 6, 3));
    let config = RunConfig {
        pool_size: 5,
        obs: ObsSpec {
            render_size: 6,
            ..ObsSpec::default()
        },
        ..RunConfig::default()
    };
    let mut env = PuzzleEnv::new(&config, Some(pool), 42).unwrap();
    let mut counts = [0u64; 5];
    for _ in 0..20_000 {
        env.reset_state(None);
        counts[env.image_index().unwrap()] += 1;
    }
    let (stat, p) = common::chi_square_uniform(&counts);
    assert!(p > 1e-3, "chi2 {stat} p {p} {counts:?}");
}

#[test]
fn noise_blank_is_deterministic() {
    let dims = GridDims::new(3, 3).unwrap();
    let src = common::noise_image(30, &mut RandomSource::new(2));
    let s = sample_uniform_solvable(dims, &mut RandomSource::new(3));
    let a = render_image_obs(&s, &src, BlankFill::Noise { seed: 8 }).unwrap();
    let b = render_image_obs(&s, &src, BlankFill::Noise { seed: 8 }).unwrap();
    assert_eq!(a, b);
    assert!(a.in_unit_range());
}

#[test]
fn png_round_trip_is_exact_on_8bit_grid() {
    let dir = tempfile::tempdir().unwrap();
    common::write_noise_pngs(dir.path(), "x", 1, 17, 9, 4);
    let img = Image::open(&dir.path().join("x0.png")).unwrap();
    assert_eq!(img.shape(), [9, 17, 3]);
    let again = Image::decode(&img.encode_png().unwrap()).unwrap();
    assert_eq!(again, img);
}

#[test]
fn pool_loading_is_seeded_and_skips_corrupt_files() {
    let dir = tempfile::tempdir().unwrap();
    common::write_noise_pngs(dir.path(), "img", 6, 20, 12, 5);
    std::fs::write(dir.path().join("broken.png"), b"not a png").unwrap();
    std::fs::write(dir.path().join("notes.txt"), b"ignored").unwrap();
    let a = ImagePool::load(dir.path(), 6, 16, 9).unwrap();
    let b = ImagePool::load(dir.path(), 6, 16, 9).unwrap();
    assert_eq!(a.source_ids(), b.source_ids());
    assert_eq!(a.skipped(), ["broken.png".to_string()]);
    assert!(a.source_ids().iter().all(|id| id.starts_with("img")));
    assert_eq!(a.image(0).shape(), [16, 16, 3]);
    let m = PoolManifest::parse(&a.manifest()).unwrap();
    assert_eq!(m.pool_seed, 9);
    assert_eq!(m.source_ids, a.source_ids());
    assert_eq!(m.skipped, a.skipped());
    let err = ImagePool::load(dir.path(), 7, 16, 9).unwrap_err();
    assert!(err.is_config());
}

#[test]
fn resize_keeps_constant_images_constant() {
    let img = Image::filled(13, 29, [0.25, 0.5, 0.75]);
    for (h, w) in [(7, 7), (84, 84), (100, 31)] {
        let out = img.resize_bilinear(h, w);
        assert!(out.data().chunks(3).all(|p| p == [0.25, 0.5, 0.75]));
    }
    assert_eq!(img.resize_bilinear(13, 29), img);
}

proptest! {
    #[test]
    fn tensor_round_trip(h in 1u32..5, w in 1u32..5, c in 1u32..4, frames in 0usize..4, seed in any::<u64>()) {
        let header = TensorHeader { height: h, width: w, channels: c };
        let mut rng = RandomSource::new(seed);
        let data: Vec<Vec<f32>> = (0..frames)
            .map(|_| (0..header.frame_len()).map(|_| rng.unit_f32()).collect())
            .collect();
        let refs: Vec<&[f32]> = data.iter().map(Vec::as_slice).collect();
        let bytes = encode_tensor(header, &refs).unwrap();
        prop_assert_eq!(bytes.len(), 16 + 4 * header.frame_len() * frames);
        let (h2, values) = decode_tensor(&bytes).unwrap();
        prop_assert_eq!(h2, header);
        prop_assert_eq!(values, data.concat());
    }

    #[test]
    fn render_is_a_permutation_of_patches(seed in any::<u64>()) {
        let dims = GridDims::new(3, 3).unwrap();
        let mut rng = RandomSource::new(seed);
        let src = common::noise_image(24, &mut rng);
        let s = sample_uniform_solvable(dims, &mut rng);
        let out = render_image_obs(&s, &src, BlankFill::Black).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let t = s.tile_at(r, c);
                for dy in 0..8 {
                    for dx in 0..8 {
                        let got = out.pixel(r * 8 + dy, c * 8 + dx);
                        if t == 0 {
                            prop_assert_eq!(got, [0.0; 3]);
                        } else {
                            let g = t as usize - 1;
                            prop_assert_eq!(got, src.pixel((g / 3) * 8 + dy, (g % 3) * 8 + dx));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn onehot_round_trips_random_states(seed in any::<u64>(), h in 2usize..5, w in 2usize..5) {
        let dims = GridDims::new(h, w).unwrap();
        let s = sample_uniform_solvable(dims, &mut RandomSource::new(seed));
        prop_assert_eq!(render_onehot_obs(&s).decode_state(dims).unwrap(), s);
    }
}
