use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Longest supported side. Tile ids then fit in 12 bits.
pub const MAX_SIDE: usize = 64;
/// Default cap on `height * width`.
pub const DEFAULT_MAX_CELLS: usize = MAX_SIDE * MAX_SIDE;

/// Grid shape, `height` rows by `width` columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct GridDims {
    height: usize,
    width: usize,
}

impl GridDims {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        Self::with_limit(height, width, DEFAULT_MAX_CELLS)
    }

    pub fn with_limit(height: usize, width: usize, max_cells: usize) -> Result<Self> {
        let err = |reason| Error::InvalidDims {
            height,
            width,
            reason,
        };
        if height < 2 || width < 2 {
            return Err(err("both sides must be at least 2"));
        }
        if height > MAX_SIDE || width > MAX_SIDE {
            return Err(err("sides are limited to 64"));
        }
        if height * width > max_cells {
            return Err(err("too many cells for the configured limit"));
        }
        Ok(Self { height, width })
    }

    pub fn height(self) -> usize {
        self.height
    }

    pub fn width(self) -> usize {
        self.width
    }

    pub fn cells(self) -> usize {
        self.height * self.width
    }

    pub fn row_col(self, index: usize) -> (usize, usize) {
        (index / self.width, index % self.width)
    }

    pub fn index(self, row: usize, col: usize) -> usize {
        row * self.width + col
    }
}

impl fmt::Display for GridDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.height, self.width)
    }
}

impl FromStr for GridDims {
    type Err = Error;

    /// Parses `HxW`, e.g. `3x3` or `4x5`.
    fn from_str(s: &str) -> Result<Self> {
        let (h, w) = s
            .trim()
            .split_once(['x', 'X'])
            .ok_or_else(|| Error::parse("grid dims", format!("expected HxW, got {s:?}")))?;
        let h = h
            .trim()
            .parse()
            .map_err(|_| Error::parse("grid dims", format!("bad height in {s:?}")))?;
        let w = w
            .trim()
            .parse()
            .map_err(|_| Error::parse("grid dims", format!("bad width in {s:?}")))?;
        GridDims::new(h, w)
    }
}

impl TryFrom<String> for GridDims {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GridDims> for String {
    fn from(d: GridDims) -> String {
        d.to_string()
    }
}

/// One of the four moves. The name is the direction the moved TILE
/// travels: `Down` slides the tile above the blank down into it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
}

impl Action {
    /// All actions in their fixed serialization order.
    pub const ALL: [Action; 4] = [Action::Up, Action::Down, Action::Left, Action::Right];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Action::ALL.get(i).copied()
    }

    pub fn opposite(self) -> Action {
        match self {
            Action::Up => Action::Down,
            Action::Down => Action::Up,
            Action::Left => Action::Right,
            Action::Right => Action::Left,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::Up => "UP",
            Action::Down => "DOWN",
            Action::Left => "LEFT",
            Action::Right => "RIGHT",
        }
    }

    /// Cell the blank moves to, i.e. the cell of the tile that slides.
    pub(crate) fn blank_target(self, dims: GridDims, blank: usize) -> Option<usize> {
        let (row, col) = dims.row_col(blank);
        match self {
            Action::Up if row + 1 < dims.height => Some(blank + dims.width),
            Action::Down if row > 0 => Some(blank - dims.width),
            Action::Left if col + 1 < dims.width => Some(blank + 1),
            Action::Right if col > 0 => Some(blank - 1),
            _ => None,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Action {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "UP" | "U" | "0" => Ok(Action::Up),
            "DOWN" | "D" | "1" => Ok(Action::Down),
            "LEFT" | "L" | "2" => Ok(Action::Left),
            "RIGHT" | "R" | "3" => Ok(Action::Right),
            _ => Err(Error::parse("action", s)),
        }
    }
}

/// A set of actions, stored as a bitmask over [`Action::index`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ActionSet(u8);

impl ActionSet {
    pub fn insert(&mut self, a: Action) {
        self.0 |= 1 << a.index();
    }

    pub fn contains(self, a: Action) -> bool {
        self.0 & (1 << a.index()) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Action> {
        Action::ALL.into_iter().filter(move |a| self.contains(*a))
    }
}

impl FromIterator<Action> for ActionSet {
    fn from_iter<I: IntoIterator<Item = Action>>(iter: I) -> Self {
        let mut set = ActionSet::default();
        for a in iter {
            set.insert(a);
        }
        set
    }
}

/// Goal cell of a tile: tile `k >= 1` belongs in row-major cell `k - 1`,
/// the blank (id 0) in the last cell.
pub fn goal_position(tile: usize, dims: GridDims) -> Result<(usize, usize)> {
    let cells = dims.cells();
    if tile >= cells {
        return Err(Error::TileOutOfRange { tile, cells });
    }
    Ok(dims.row_col(goal_index(tile, cells)))
}

#[inline]
pub(crate) fn goal_index(tile: usize, cells: usize) -> usize {
    if tile == 0 {
        cells - 1
    } else {
        tile - 1
    }
}

/// Checks that `tiles` is a permutation of `0..H*W` and returns the blank's index.
fn check_permutation(dims: GridDims, tiles: &[u16]) -> Result<usize> {
    let cells = dims.cells();
    if tiles.len() != cells {
        return Err(Error::MalformedState(format!(
            "expected {cells} tiles for {dims}, got {}",
            tiles.len()
        )));
    }
    let mut seen = vec![false; cells];
    let mut blank = 0;
    for (i, &t) in tiles.iter().enumerate() {
        let t = t as usize;
        if t >= cells {
            return Err(Error::TileOutOfRange { tile: t, cells });
        }
        if std::mem::replace(&mut seen[t], true) {
            return Err(Error::MalformedState(format!("tile {t} appears twice")));
        }
        if t == 0 {
            blank = i;
        }
    }
    Ok(blank)
}

/// Number of out-of-order pairs among the non-blank tiles, row-major.
/// Counted with a Fenwick tree, O(n log n).
pub(crate) fn inversion_count(tiles: &[u16]) -> u64 {
    let n = tiles.len();
    let mut tree = vec![0u32; n + 1];
    let mut inversions = 0u64;
    for (seen, &t) in tiles.iter().filter(|&&t| t != 0).enumerate() {
        let seen = seen as u64;
        let t = t as usize;
        // Tiles already seen that are greater than t.
        let mut le = 0u64;
        let mut i = t;
        while i > 0 {
            le += u64::from(tree[i]);
            i &= i - 1;
        }
        inversions += seen - le;
        let mut i = t;
        while i <= n {
            tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }
    inversions
}

/// Parity test for reachability from the solved configuration.
///
/// Odd width: solvable iff the inversion count is even. Even width: a
/// vertical move shifts the inversion count by `width - 1` (odd) and the
/// blank's row by one, so `inversions + blank_row` keeps its parity; the
/// solved state has zero inversions with the blank on the bottom row.
/// Hence solvable iff `inversions + (rows below the blank)` is even.
pub fn is_solvable(dims: GridDims, tiles: &[u16]) -> Result<bool> {
    let blank = check_permutation(dims, tiles)?;
    let inversions = inversion_count(tiles);
    if dims.width % 2 == 1 {
        Ok(inversions % 2 == 0)
    } else {
        let rows_below = (dims.height - 1 - blank / dims.width) as u64;
        Ok((inversions + rows_below) % 2 == 0)
    }
}

/// A solvable puzzle configuration.
///
/// `tiles` is row-major; id 0 is the blank. Every constructor rejects
/// malformed and unsolvable permutations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PuzzleState {
    dims: GridDims,
    tiles: Vec<u16>,
    blank: usize,
}

impl PuzzleState {
    pub fn solved(dims: GridDims) -> Self {
        let cells = dims.cells();
        let tiles = (1..cells as u16).chain(std::iter::once(0)).collect();
        Self {
            dims,
            tiles,
            blank: cells - 1,
        }
    }

    pub fn from_tiles(dims: GridDims, tiles: Vec<u16>) -> Result<Self> {
        if !is_solvable(dims, &tiles)? {
            return Err(Error::Unsolvable);
        }
        let blank = tiles.iter().position(|&t| t == 0).expect("checked permutation");
        Ok(Self { dims, tiles, blank })
    }

    /// Builds a state from a permutation the caller has already made solvable.
    pub(crate) fn from_solvable_parts(dims: GridDims, tiles: Vec<u16>) -> Self {
        let blank = tiles.iter().position(|&t| t == 0).expect("permutation has a blank");
        debug_assert!(is_solvable(dims, &tiles).unwrap_or(false));
        Self { dims, tiles, blank }
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn tiles(&self) -> &[u16] {
        &self.tiles
    }

    pub fn blank_index(&self) -> usize {
        self.blank
    }

    pub fn tile_at(&self, row: usize, col: usize) -> u16 {
        self.tiles[self.dims.index(row, col)]
    }

    pub fn is_solved(&self) -> bool {
        let last = self.tiles.len() - 1;
        self.blank == last
            && self.tiles[..last]
                .iter()
                .enumerate()
                .all(|(i, &t)| t as usize == i + 1)
    }

    /// Always true for a constructed state; recomputed from scratch.
    pub fn is_solvable(&self) -> bool {
        is_solvable(self.dims, &self.tiles).unwrap_or(false)
    }

    pub fn valid_actions(&self) -> ActionSet {
        Action::ALL
            .into_iter()
            .filter(|a| a.blank_target(self.dims, self.blank).is_some())
            .collect()
    }

    /// Slides a tile in place. Returns false, leaving the state untouched,
    /// when no tile can move in that direction.
    pub fn apply_move(&mut self, action: Action) -> bool {
        match action.blank_target(self.dims, self.blank) {
            Some(target) => {
                self.tiles.swap(self.blank, target);
                self.blank = target;
                true
            }
            None => false,
        }
    }

    /// Canonical binary form: H and W as u16 LE, then each tile id as u16 LE.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + 2 * self.tiles.len());
        out.extend_from_slice(&(self.dims.height as u16).to_le_bytes());
        out.extend_from_slice(&(self.dims.width as u16).to_le_bytes());
        for &t in &self.tiles {
            out.extend_from_slice(&t.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let word = |i: usize| -> Result<u16> {
            bytes
                .get(2 * i..2 * i + 2)
                .map(|b| u16::from_le_bytes([b[0], b[1]]))
                .ok_or_else(|| Error::parse("binary state", "truncated input"))
        };
        let dims = GridDims::new(word(0)? as usize, word(1)? as usize)?;
        if bytes.len() != 4 + 2 * dims.cells() {
            return Err(Error::parse(
                "binary state",
                format!("expected {} bytes, got {}", 4 + 2 * dims.cells(), bytes.len()),
            ));
        }
        let tiles = (0..dims.cells()).map(|i| word(i + 2)).collect::<Result<_>>()?;
        Self::from_tiles(dims, tiles)
    }
}

impl fmt::Display for PuzzleState {
    /// Canonical text form `H,W:t0,t1,...`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}:", self.dims.height, self.dims.width)?;
        for (i, t) in self.tiles.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Parses `H,W:t0,t1,...` into dims and a raw tile list, without any
/// permutation or solvability check.
pub fn parse_tiles(s: &str) -> Result<(GridDims, Vec<u16>)> {
    let (head, body) = s
        .trim()
        .split_once(':')
        .ok_or_else(|| Error::parse("state", "expected `H,W:t0,t1,...`"))?;
    let (h, w) = head
        .split_once(',')
        .ok_or_else(|| Error::parse("state", "expected `H,W` before ':'"))?;
    let num = |x: &str| {
        x.trim()
            .parse::<usize>()
            .map_err(|_| Error::parse("state", format!("not a number: {x:?}")))
    };
    let dims = GridDims::new(num(h)?, num(w)?)?;
    let tiles = body
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<u16>()
                .map_err(|_| Error::parse("state", format!("bad tile id {t:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((dims, tiles))
}

impl FromStr for PuzzleState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (dims, tiles) = parse_tiles(s)?;
        Self::from_tiles(dims, tiles)
    }
}

impl Serialize for PuzzleState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PuzzleState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
