use crate::level::{SurroundingInfo, NUM_CHANNELS};
use crate::scalar::Scalar;

/// 8 neighbor slots × 12 one-hot channels plus one height entry.
pub const INPUT_DIM: usize = 8 * NUM_CHANNELS + 1;

/// How the center-tile height is presented to the network.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum HeightEncoding {
    /// `row / max(level_height - 1, 1)`, in `[0, 1]`.
    #[default]
    Normalized,
    /// The row index as is.
    Raw,
}

impl HeightEncoding {
    pub(crate) fn to_byte(self) -> u8 {
        match self {
            HeightEncoding::Normalized => 0,
            HeightEncoding::Raw => 1,
        }
    }

    pub(crate) fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(HeightEncoding::Normalized),
            1 => Some(HeightEncoding::Raw),
            _ => None,
        }
    }

    pub fn encode<T: Scalar>(self, center_height: usize, level_height: usize) -> T {
        match self {
            HeightEncoding::Normalized => {
                let denom = level_height.saturating_sub(1).max(1);
                T::from_f64_lossy(center_height as f64 / denom as f64)
            }
            HeightEncoding::Raw => T::from_f64_lossy(center_height as f64),
        }
    }
}

/// Dense network input.
#[derive(Clone, Debug, PartialEq)]
pub struct InputVector<T>(Vec<T>);

impl<T: Scalar> InputVector<T> {
    /// Wraps raw values; panics unless there are exactly [`INPUT_DIM`].
    pub fn from_values(values: Vec<T>) -> Self {
        assert_eq!(values.len(), INPUT_DIM, "input must have {INPUT_DIM} entries");
        InputVector(values)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn height(&self) -> T {
        self.0[INPUT_DIM - 1]
    }
}

/// One-hot encodes the neighbors and appends the normalized height.
pub fn encode_input<T: Scalar>(s: &SurroundingInfo, level_height: usize) -> InputVector<T> {
    encode_input_with(s, level_height, HeightEncoding::Normalized)
}

pub fn encode_input_with<T: Scalar>(
    s: &SurroundingInfo,
    level_height: usize,
    encoding: HeightEncoding,
) -> InputVector<T> {
    let mut v = vec![T::zero(); INPUT_DIM];
    for (slot, t) in s.neighbors.iter().enumerate() {
        v[slot * NUM_CHANNELS + t.index()] = T::one();
    }
    v[INPUT_DIM - 1] = encoding.encode(s.center_height, level_height);
    InputVector(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::level::TileType;

    fn surrounding(h: usize, codes: [u8; 8]) -> SurroundingInfo {
        SurroundingInfo {
            center_height: h,
            neighbors: codes.map(|c| {
                if c == 11 {
                    TileType::OUTER
                } else {
                    TileType::concrete(c).unwrap()
                }
            }),
        }
    }

    #[test]
    fn all_empty_neighbors_at_height_zero() {
        let x: InputVector<f64> = encode_input(&surrounding(0, [2; 8]), 14);
        let v = x.as_slice();
        assert_eq!(v.len(), 97);
        for slot in 0..8 {
            for ch in 0..NUM_CHANNELS {
                let expected = if ch == 2 { 1.0 } else { 0.0 };
                assert_eq!(v[slot * NUM_CHANNELS + ch], expected);
            }
        }
        assert_eq!(x.height(), 0.0);
    }

    #[test]
    fn worked_example_height_is_one() {
        let x: InputVector<f64> = encode_input(&surrounding(13, [2, 2, 5, 0, 7, 0, 8, 9]), 14);
        assert_eq!(x.height(), 1.0);
        assert_eq!(x.as_slice()[..96].iter().sum::<f64>(), 8.0);
        assert_eq!(x.as_slice()[4 * NUM_CHANNELS + 7], 1.0);
    }

    #[test]
    fn outer_uses_channel_eleven() {
        let x: InputVector<f32> = encode_input(&surrounding(0, [11; 8]), 1);
        for slot in 0..8 {
            assert_eq!(x.as_slice()[slot * NUM_CHANNELS + 11], 1.0);
        }
        // a 1-row level divides by 1, not 0
        assert_eq!(x.height(), 0.0);
    }

    #[test]
    fn raw_height() {
        let x: InputVector<f64> = encode_input_with(&surrounding(7, [2; 8]), 14, HeightEncoding::Raw);
        assert_eq!(x.height(), 7.0);
    }
}
