//! Bit-array helpers shared by the encoders and decoders.

use bitvec::prelude::*;

/// Bit array with bit 0 stored in the most significant bit of byte 0.
pub type Bits = BitVec<u8, Msb0>;
pub type BitsSlice = BitSlice<u8, Msb0>;

pub fn zeros(len: usize) -> Bits {
    BitVec::repeat(false, len)
}

/// `acc ^= other`, treating the shorter operand as zero-padded at the end.
pub fn xor_padded(acc: &mut Bits, other: &BitsSlice) {
    if other.len() > acc.len() {
        acc.resize(other.len(), false);
    }
    *acc.get_mut(..other.len()).expect("acc is long enough") ^= other;
}

/// Copies the bits of `row` at the given positions, in order.
pub fn gather(row: &BitsSlice, positions: &[u32]) -> Bits {
    positions.iter().map(|&p| row[p as usize]).collect()
}

/// Lowercase hex of the bits packed MSB first; the last byte is zero-padded.
pub fn to_hex(bits: &BitsSlice) -> String {
    let mut out = String::with_capacity(bits.len().div_ceil(4));
    for chunk in bits.chunks(8) {
        let mut byte = 0u8;
        for (i, b) in chunk.iter().by_vals().enumerate() {
            if b {
                byte |= 0x80 >> i;
            }
        }
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor_pads_shorter_side() {
        let mut acc = bitvec![u8, Msb0; 1, 0, 1];
        xor_padded(&mut acc, bits![u8, Msb0; 1, 1, 1, 1, 1]);
        assert_eq!(acc, bitvec![u8, Msb0; 0, 1, 0, 1, 1]);
        xor_padded(&mut acc, bits![u8, Msb0; 1]);
        assert_eq!(acc, bitvec![u8, Msb0; 1, 1, 0, 1, 1]);
    }

    #[test]
    fn hex_is_msb_first_and_padded() {
        assert_eq!(to_hex(bits![u8, Msb0; 1, 0, 1, 0, 0, 0, 0, 1]), "a1");
        assert_eq!(to_hex(bits![u8, Msb0; 1, 1, 1, 1, 1, 1, 1, 1, 1]), "ff80");
        assert_eq!(to_hex(bits![u8, Msb0;]), "");
    }

    #[test]
    fn gather_follows_positions() {
        let row = bitvec![u8, Msb0; 0, 1, 1, 0, 1];
        assert_eq!(gather(&row, &[4, 0, 2]), bitvec![u8, Msb0; 1, 0, 1]);
    }
}
