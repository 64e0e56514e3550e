//! Independent oracles shared by the integration tests. Nothing here calls
//! into the engine's own search, reward or parity code.
#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use slidegym::observation::{Image, ImagePool};
use slidegym::RandomSource;

pub fn solved_tiles(h: usize, w: usize) -> Vec<u16> {
    let n = h * w;
    (1..n as u16).chain(std::iter::once(0)).collect()
}

/// Plain BFS over tile vectors, moving the blank to each neighbour.
pub fn oracle_depths(h: usize, w: usize) -> HashMap<Vec<u16>, u32> {
    let start = solved_tiles(h, w);
    let mut depth = HashMap::new();
    depth.insert(start.clone(), 0);
    let mut queue = VecDeque::from([start]);
    while let Some(t) = queue.pop_front() {
        let d = depth[&t];
        let b = t.iter().position(|&x| x == 0).unwrap();
        let (r, c) = (b / w, b % w);
        let mut nbrs = Vec::new();
        if r > 0 {
            nbrs.push(b - w);
        }
        if r + 1 < h {
            nbrs.push(b + w);
        }
        if c > 0 {
            nbrs.push(b - 1);
        }
        if c + 1 < w {
            nbrs.push(b + 1);
        }
        for n in nbrs {
            let mut next = t.clone();
            next.swap(b, n);
            if !depth.contains_key(&next) {
                depth.insert(next.clone(), d + 1);
                queue.push_back(next);
            }
        }
    }
    depth
}

/// Σ over all cells (blank included) of the Manhattan distance to the goal cell.
pub fn oracle_numerator(tiles: &[u16], h: usize, w: usize) -> u64 {
    let n = h * w;
    let mut total = 0;
    for (i, &t) in tiles.iter().enumerate() {
        let goal = if t == 0 { n - 1 } else { t as usize - 1 };
        total += (i / w).abs_diff(goal / w) + (i % w).abs_diff(goal % w);
    }
    total as u64
}

/// Σ_{i=1..H} Σ_{j=1..W} [max(i, H−i) + max(j, W−j)].
pub fn oracle_denominator(h: usize, w: usize) -> u64 {
    let mut total = 0;
    for i in 1..=h {
        for j in 1..=w {
            total += i.max(h - i) + j.max(w - j);
        }
    }
    total as u64
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<u16>> {
    fn go(prefix: &mut Vec<u16>, rest: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            prefix.push(x);
            go(prefix, rest, out);
            prefix.pop();
            rest.insert(i, x);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (0..n as u16).collect(), &mut out);
    out
}

pub fn noise_image(side: usize, rng: &mut RandomSource) -> Image {
    let data = (0..side * side * 3).map(|_| rng.unit_f32()).collect();
    Image::from_data(side, side, data).unwrap()
}

pub fn noise_pool(prefix: &str, n: usize, side: usize, seed: u64) -> ImagePool {
    let mut rng = RandomSource::new(seed);
    let images = (0..n)
        .map(|i| (format!("{prefix}{i}.png"), noise_image(side, &mut rng)))
        .collect();
    ImagePool::from_images(images, side, seed).unwrap()
}

/// Writes `n` random RGB PNGs of `w`×`h` into `dir`.
pub fn write_noise_pngs(dir: &std::path::Path, prefix: &str, n: usize, w: usize, h: usize, seed: u64) {
    std::fs::create_dir_all(dir).unwrap();
    let mut rng = RandomSource::new(seed);
    for i in 0..n {
        let data = (0..w * h * 3).map(|_| rng.index(256) as f32 / 255.0).collect();
        let img = Image::from_data(h, w, data).unwrap();
        img.save_png(&dir.join(format!("{prefix}{i}.png"))).unwrap();
    }
}

/// Pearson chi-square statistic against a uniform expectation, and its
/// upper-tail p-value.
pub fn chi_square_uniform(counts: &[u64]) -> (f64, f64) {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let stat = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum::<f64>();
    let dist = ChiSquared::new((counts.len() - 1) as f64).unwrap();
    (stat, 1.0 - dist.cdf(stat))
}
