//! Tile alphabet, level grids, the VGLC text codec and 3×3 neighborhood
//! extraction.

use std::fmt;

use thiserror::Error;

/// Number of concrete tile types a level cell can hold.
pub const NUM_TILE_TYPES: usize = 11;

/// Number of input channels per neighbor slot: the concrete types plus `OUTER`.
pub const NUM_CHANNELS: usize = NUM_TILE_TYPES + 1;

const SYMBOLS: [char; NUM_TILE_TYPES] = ['X', 'S', '-', '?', 'Q', 'E', '<', '>', '[', ']', 'o'];

/// A tile type code. Codes `0..=10` are the concrete VGLC tiles, code 11 is
/// the pseudo-type for cells beyond the edge of a level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TileType(u8);

impl TileType {
    pub const GROUND: TileType = TileType(0);
    pub const BREAKABLE: TileType = TileType(1);
    pub const EMPTY: TileType = TileType(2);
    pub const QUESTION_FULL: TileType = TileType(3);
    pub const QUESTION_EMPTY: TileType = TileType(4);
    pub const ENEMY: TileType = TileType(5);
    pub const PIPE_TOP_LEFT: TileType = TileType(6);
    pub const PIPE_TOP_RIGHT: TileType = TileType(7);
    pub const PIPE_LEFT: TileType = TileType(8);
    pub const PIPE_RIGHT: TileType = TileType(9);
    pub const COIN: TileType = TileType(10);
    pub const OUTER: TileType = TileType(11);

    /// Concrete type for `code`, or `None` when `code > 10`.
    pub fn concrete(code: u8) -> Option<TileType> {
        ((code as usize) < NUM_TILE_TYPES).then_some(TileType(code))
    }

    /// All concrete types in code order.
    pub fn all() -> impl Iterator<Item = TileType> + Clone {
        (0..NUM_TILE_TYPES as u8).map(TileType)
    }

    pub fn code(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_outer(self) -> bool {
        self == TileType::OUTER
    }

    pub fn is_pipe(self) -> bool {
        (6..=9).contains(&self.0)
    }

    pub fn from_symbol(symbol: char) -> Option<TileType> {
        SYMBOLS.iter().position(|&s| s == symbol).map(|i| TileType(i as u8))
    }

    /// VGLC symbol; `OUTER` has none and renders as a space.
    pub fn symbol(self) -> char {
        SYMBOLS.get(self.index()).copied().unwrap_or(' ')
    }
}

impl fmt::Display for TileType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Small set of concrete tile types, stored as a bitmask.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TileSet(u16);

impl TileSet {
    pub const EMPTY: TileSet = TileSet(0);
    pub const ALL: TileSet = TileSet((1 << NUM_TILE_TYPES) - 1);

    pub fn from_bits(bits: u16) -> TileSet {
        TileSet(bits & Self::ALL.0)
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn single(t: TileType) -> TileSet {
        let mut s = TileSet::EMPTY;
        s.insert(t);
        s
    }

    pub fn insert(&mut self, t: TileType) {
        if !t.is_outer() {
            self.0 |= 1 << t.code();
        }
    }

    pub fn remove(&mut self, t: TileType) {
        if !t.is_outer() {
            self.0 &= !(1 << t.code());
        }
    }

    pub fn contains(self, t: TileType) -> bool {
        !t.is_outer() && self.0 & (1 << t.code()) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: TileSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn complement(self) -> TileSet {
        TileSet(!self.0 & Self::ALL.0)
    }

    pub fn iter(self) -> impl Iterator<Item = TileType> {
        TileType::all().filter(move |&t| self.contains(t))
    }

    /// The `n`-th member in code order.
    pub fn nth(self, n: usize) -> Option<TileType> {
        self.iter().nth(n)
    }
}

impl FromIterator<TileType> for TileSet {
    fn from_iter<I: IntoIterator<Item = TileType>>(iter: I) -> Self {
        let mut s = TileSet::EMPTY;
        for t in iter {
            s.insert(t);
        }
        s
    }
}

impl fmt::Debug for TileSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|t| t.code())).finish()
    }
}

/// Grid coordinate, row 0 is the top line of a level file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position {
    pub row: usize,
    pub col: usize,
}

impl Position {
    pub fn new(row: usize, col: usize) -> Self {
        Position { row, col }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LevelError {
    #[error("level text is empty")]
    EmptyInput,
    #[error("line {line} has {found} tiles, expected {expected}")]
    UnequalRowLength { line: usize, expected: usize, found: usize },
    #[error("unknown tile symbol {symbol:?} at line {line}, column {col}")]
    UnknownSymbol { symbol: char, line: usize, col: usize },
    #[error("tile code {0} is not a concrete tile")]
    NotConcrete(u8),
    #[error("position ({row}, {col}) is outside a {height}x{width} level")]
    OutOfBounds {
        row: usize,
        col: usize,
        height: usize,
        width: usize,
    },
    #[error("levels differ in size: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
}

/// Rectangular grid of concrete tiles.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Level {
    height: usize,
    width: usize,
    tiles: Vec<TileType>,
}

impl Level {
    /// Level of the given size filled with `fill`.
    pub fn filled(height: usize, width: usize, fill: TileType) -> Result<Level, LevelError> {
        if height == 0 || width == 0 {
            return Err(LevelError::EmptyInput);
        }
        if fill.is_outer() {
            return Err(LevelError::NotConcrete(fill.code()));
        }
        Ok(Level {
            height,
            width,
            tiles: vec![fill; height * width],
        })
    }

    /// Builds a level from rows of tile codes.
    pub fn from_codes(rows: &[Vec<u8>]) -> Result<Level, LevelError> {
        let width = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || width == 0 {
            return Err(LevelError::EmptyInput);
        }
        let mut tiles = Vec::with_capacity(rows.len() * width);
        for (line, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(LevelError::UnequalRowLength {
                    line,
                    expected: width,
                    found: row.len(),
                });
            }
            for &code in row {
                tiles.push(TileType::concrete(code).ok_or(LevelError::NotConcrete(code))?);
            }
        }
        Ok(Level {
            height: rows.len(),
            width,
            tiles,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn contains(&self, pos: Position) -> bool {
        pos.row < self.height && pos.col < self.width
    }

    /// Tile at `pos`; panics when out of bounds.
    pub fn get(&self, pos: Position) -> TileType {
        assert!(self.contains(pos), "position {pos:?} out of bounds");
        self.tiles[pos.row * self.width + pos.col]
    }

    /// Tile at signed coordinates, `OUTER` beyond the edge.
    pub fn get_or_outer(&self, row: isize, col: isize) -> TileType {
        if row < 0 || col < 0 || row as usize >= self.height || col as usize >= self.width {
            TileType::OUTER
        } else {
            self.tiles[row as usize * self.width + col as usize]
        }
    }

    pub fn set(&mut self, pos: Position, t: TileType) {
        assert!(self.contains(pos), "position {pos:?} out of bounds");
        assert!(!t.is_outer(), "OUTER cannot be stored in a level");
        self.tiles[pos.row * self.width + pos.col] = t;
    }

    pub fn positions(&self) -> impl Iterator<Item = Position> + '_ {
        (0..self.height).flat_map(move |r| (0..self.width).map(move |c| Position::new(r, c)))
    }

    pub fn rows(&self) -> impl Iterator<Item = &[TileType]> {
        self.tiles.chunks(self.width)
    }

    /// Positions whose tile differs between `self` and `other`.
    pub fn diff(&self, other: &Level) -> Result<Vec<Position>, LevelError> {
        self.check_same_size(other)?;
        Ok(self.positions().filter(|&p| self.get(p) != other.get(p)).collect())
    }

    pub fn check_same_size(&self, other: &Level) -> Result<(), LevelError> {
        if self.height != other.height || self.width != other.width {
            return Err(LevelError::DimensionMismatch(
                self.height,
                self.width,
                other.height,
                other.width,
            ));
        }
        Ok(())
    }

    /// Cells in the 3×3 window around `pos` that lie inside the level.
    pub fn window(&self, pos: Position) -> impl Iterator<Item = Position> + '_ {
        let r0 = pos.row.saturating_sub(1);
        let c0 = pos.col.saturating_sub(1);
        let r1 = (pos.row + 1).min(self.height - 1);
        let c1 = (pos.col + 1).min(self.width - 1);
        (r0..=r1).flat_map(move |r| (c0..=c1).map(move |c| Position::new(r, c)))
    }

    /// Window around `(row, col)` as a combination. Off-grid cells are `OUTER`.
    pub fn combination_at(&self, row: usize, col: usize) -> Result<Combination, LevelError> {
        if row >= self.height || col >= self.width {
            return Err(LevelError::OutOfBounds {
                row,
                col,
                height: self.height,
                width: self.width,
            });
        }
        let mut types = [TileType::OUTER; 9];
        for (k, slot) in types.iter_mut().enumerate() {
            let dr = (k / 3) as isize - 1;
            let dc = (k % 3) as isize - 1;
            *slot = self.get_or_outer(row as isize + dr, col as isize + dc);
        }
        Ok(Combination {
            center_height: row,
            types,
        })
    }

    /// Surrounding info of the cell at `pos` (the center tile is dropped).
    pub fn surrounding_at(&self, pos: Position) -> Result<SurroundingInfo, LevelError> {
        self.combination_at(pos.row, pos.col).map(|c| c.surrounding())
    }
}

impl fmt::Debug for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Level {}x{}", self.height, self.width)?;
        f.write_str(&serialize_level(self))
    }
}

impl std::str::FromStr for Level {
    type Err = LevelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_level(s)
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_level(self))
    }
}

/// Parses VGLC text, one symbol per tile and one line per row.
///
/// A single trailing line break (LF or CRLF) is tolerated so files read from
/// disk parse directly; `serialize_level` never emits one.
pub fn parse_level(text: &str) -> Result<Level, LevelError> {
    let body = text
        .strip_suffix("\r\n")
        .or_else(|| text.strip_suffix('\n'))
        .unwrap_or(text);
    if body.is_empty() {
        return Err(LevelError::EmptyInput);
    }
    let mut tiles = Vec::with_capacity(body.len());
    let mut width = None;
    let mut height = 0;
    for (line, raw) in body.split('\n').enumerate() {
        let row = raw.strip_suffix('\r').unwrap_or(raw);
        let mut count = 0;
        for (col, ch) in row.chars().enumerate() {
            let t = TileType::from_symbol(ch).ok_or(LevelError::UnknownSymbol { symbol: ch, line, col })?;
            tiles.push(t);
            count += 1;
        }
        match width {
            None if count == 0 => return Err(LevelError::EmptyInput),
            None => width = Some(count),
            Some(w) if w != count => {
                return Err(LevelError::UnequalRowLength {
                    line,
                    expected: w,
                    found: count,
                })
            }
            Some(_) => {}
        }
        height += 1;
    }
    Ok(Level {
        height,
        width: width.unwrap_or(0),
        tiles,
    })
}

/// Inverse of [`parse_level`]: rows joined by `\n`, no trailing newline.
pub fn serialize_level(level: &Level) -> String {
    let mut out = String::with_capacity(level.height * (level.width + 1));
    for (r, row) in level.rows().enumerate() {
        if r > 0 {
            out.push('\n');
        }
        out.extend(row.iter().map(|t| t.symbol()));
    }
    out
}

/// Height of the center tile followed by the 9 types of its 3×3 window in
/// row-major order; the center sits at index 4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Combination {
    pub center_height: usize,
    pub types: [TileType; 9],
}

impl Combination {
    pub fn center(&self) -> TileType {
        self.types[4]
    }

    pub fn surrounding(&self) -> SurroundingInfo {
        let mut neighbors = [TileType::OUTER; 8];
        for (k, &t) in self.types.iter().enumerate() {
            match k.cmp(&4) {
                std::cmp::Ordering::Less => neighbors[k] = t,
                std::cmp::Ordering::Greater => neighbors[k - 1] = t,
                std::cmp::Ordering::Equal => {}
            }
        }
        SurroundingInfo {
            center_height: self.center_height,
            neighbors,
        }
    }
}

/// Free-function form of [`Combination::surrounding`].
pub fn surrounding_of(c: &Combination) -> SurroundingInfo {
    c.surrounding()
}

/// Height of the center tile plus its 8 neighbors (row-major, center removed).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SurroundingInfo {
    pub center_height: usize,
    pub neighbors: [TileType; 8],
}

impl SurroundingInfo {
    /// Re-inserts a center tile.
    pub fn with_center(&self, center: TileType) -> Combination {
        let mut types = [center; 9];
        types[..4].copy_from_slice(&self.neighbors[..4]);
        types[5..].copy_from_slice(&self.neighbors[4..]);
        Combination {
            center_height: self.center_height,
            types,
        }
    }

    pub fn has_pipe(&self) -> bool {
        self.neighbors.iter().any(|t| t.is_pipe())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(code: u8) -> TileType {
        TileType::concrete(code).unwrap()
    }

    #[test]
    fn symbol_table_is_a_bijection() {
        let symbols = "XS-?QE<>[]o";
        for (code, ch) in symbols.chars().enumerate() {
            assert_eq!(TileType::from_symbol(ch), Some(t(code as u8)));
            assert_eq!(t(code as u8).symbol(), ch);
        }
        assert_eq!(TileType::from_symbol('B'), None);
        assert_eq!(TileType::concrete(11), None);
    }

    #[test]
    fn parse_single_ground_tile() {
        let level = parse_level("X").unwrap();
        assert_eq!((level.height(), level.width()), (1, 1));
        assert_eq!(level.get(Position::new(0, 0)), TileType::GROUND);
    }

    #[test]
    fn parse_pipe_symbols() {
        let level = parse_level("<>\n[]").unwrap();
        let expected = Level::from_codes(&[vec![6, 7], vec![8, 9]]).unwrap();
        assert_eq!(level, expected);
    }

    #[test]
    fn serialize_examples() {
        assert_eq!(serialize_level(&Level::from_codes(&[vec![2]]).unwrap()), "-");
        let ground = Level::from_codes(&[vec![0, 0], vec![0, 0]]).unwrap();
        assert_eq!(serialize_level(&ground), "XX\nXX");
    }

    #[test]
    fn parse_errors() {
        assert_eq!(parse_level(""), Err(LevelError::EmptyInput));
        assert_eq!(parse_level("\n"), Err(LevelError::EmptyInput));
        assert_eq!(
            parse_level("XX\nX"),
            Err(LevelError::UnequalRowLength {
                line: 1,
                expected: 2,
                found: 1
            })
        );
        assert_eq!(
            parse_level("X-\n-B"),
            Err(LevelError::UnknownSymbol {
                symbol: 'B',
                line: 1,
                col: 1
            })
        );
    }

    #[test]
    fn trailing_newline_tolerated() {
        assert_eq!(parse_level("X-\n-X\n").unwrap(), parse_level("X-\n-X").unwrap());
        assert_eq!(parse_level("X-\r\n-X\r\n").unwrap(), parse_level("X-\n-X").unwrap());
    }

    #[test]
    fn worked_combination_example() {
        // Center at row 13 with a pipe body below it needs a 15th row.
        let mut rows = vec![vec![2u8; 3]; 15];
        rows[12] = vec![2, 2, 5];
        rows[13] = vec![0, 6, 7];
        rows[14] = vec![0, 8, 9];
        let level = Level::from_codes(&rows).unwrap();
        let c = level.combination_at(13, 1).unwrap();
        let codes: Vec<u8> = c.types.iter().map(|t| t.code()).collect();
        assert_eq!(codes, vec![2, 2, 5, 0, 6, 7, 0, 8, 9]);
        assert_eq!(c.center_height, 13);

        let s = surrounding_of(&c);
        assert_eq!(s.center_height, 13);
        assert_eq!(s.neighbors, [2, 2, 5, 0, 7, 0, 8, 9].map(t));
        assert_eq!(s.with_center(t(6)), c);
    }

    #[test]
    fn corner_is_padded_with_outer() {
        let level = parse_level("XX\nXX").unwrap();
        let c = level.combination_at(0, 0).unwrap();
        for k in [0, 1, 2, 3, 6] {
            assert_eq!(c.types[k], TileType::OUTER, "slot {k}");
        }
        for k in [4, 5, 7, 8] {
            assert_eq!(c.types[k], TileType::GROUND, "slot {k}");
        }
    }

    #[test]
    fn uniform_interior_combination() {
        let level = parse_level("XXX\nXXX\nXXX").unwrap();
        let c = level.combination_at(1, 1).unwrap();
        assert_eq!(c.center_height, 1);
        assert_eq!(c.types, [TileType::GROUND; 9]);
        assert_eq!(c.surrounding().neighbors, [TileType::GROUND; 8]);
    }

    #[test]
    fn out_of_bounds_is_an_error() {
        let level = parse_level("XX").unwrap();
        assert!(matches!(
            level.combination_at(1, 0),
            Err(LevelError::OutOfBounds { .. })
        ));
        assert!(level.combination_at(0, 2).is_err());
    }

    #[test]
    fn center_type_does_not_affect_surrounding() {
        let a = parse_level("---\n-<-\n---").unwrap();
        let b = parse_level("---\n-X-\n---").unwrap();
        let ca = a.combination_at(1, 1).unwrap();
        let cb = b.combination_at(1, 1).unwrap();
        assert_ne!(ca, cb);
        assert_eq!(ca.surrounding(), cb.surrounding());
    }

    #[test]
    fn tile_set_operations() {
        let mut s = TileSet::EMPTY;
        s.insert(t(6));
        s.insert(t(2));
        s.insert(TileType::OUTER);
        assert_eq!(s.len(), 2);
        assert!(s.contains(t(2)) && s.contains(t(6)) && !s.contains(TileType::OUTER));
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![t(2), t(6)]);
        assert_eq!(s.complement().len(), 9);
        assert!(s.is_subset(TileSet::ALL));
        s.remove(t(2));
        assert_eq!(s, TileSet::single(t(6)));
    }
}
