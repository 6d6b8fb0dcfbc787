/// Fixed-length bit vector packed into little-endian `u64` words.
///
/// Bit `i` lives in word `i / 64` at position `i % 64`. Bits past `len` are
/// always zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitStream {
    words: Vec<u64>,
    len: u64,
}

impl BitStream {
    pub fn zeros(len: u64) -> Self {
        Self {
            words: vec![0; len.div_ceil(64) as usize],
            len,
        }
    }

    pub fn from_words(mut words: Vec<u64>, len: u64) -> Option<Self> {
        if words.len() as u64 != len.div_ceil(64) {
            return None;
        }
        if !len.is_multiple_of(64) {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << (len % 64)) - 1;
            }
        }
        Some(Self { words, len })
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: u64) -> bool {
        debug_assert!(i < self.len);
        self.words[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: u64, value: bool) {
        debug_assert!(i < self.len);
        let w = &mut self.words[(i / 64) as usize];
        let mask = 1u64 << (i % 64);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    /// Sets every bit in `[start, end)`.
    pub fn fill(&mut self, start: u64, end: u64) {
        let end = end.min(self.len);
        let mut i = start;
        while i < end && !i.is_multiple_of(64) {
            self.set(i, true);
            i += 1;
        }
        while i + 64 <= end {
            self.words[(i / 64) as usize] = u64::MAX;
            i += 64;
        }
        while i < end {
            self.set(i, true);
            i += 1;
        }
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// The 64 bits starting at `pos`, zero-padded past the end.
    #[inline]
    pub fn word_at(&self, pos: u64) -> u64 {
        let idx = (pos / 64) as usize;
        let shift = pos % 64;
        let lo = self.words.get(idx).copied().unwrap_or(0);
        if shift == 0 {
            lo
        } else {
            let hi = self.words.get(idx + 1).copied().unwrap_or(0);
            (lo >> shift) | (hi << (64 - shift))
        }
    }

    /// Positions of the set bits.
    pub fn ones(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as u64;
                    w &= w - 1;
                    Some(wi as u64 * 64 + b)
                }
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fill_and_count() {
        let mut b = BitStream::zeros(200);
        b.fill(3, 150);
        assert_eq!(b.count_ones(), 147);
        assert!(!b.get(2) && b.get(3) && b.get(149) && !b.get(150));
        b.fill(190, 400);
        assert_eq!(b.count_ones(), 157);
    }

    #[test]
    fn from_words_masks_tail() {
        let b = BitStream::from_words(vec![u64::MAX, u64::MAX], 70).unwrap();
        assert_eq!(b.count_ones(), 70);
        assert!(BitStream::from_words(vec![0], 70).is_none());
    }

    proptest! {
        #[test]
        fn word_at_matches_bitwise(bits in proptest::collection::vec(any::<bool>(), 1..300), pos in 0u64..320) {
            let mut b = BitStream::zeros(bits.len() as u64);
            for (i, &v) in bits.iter().enumerate() {
                b.set(i as u64, v);
            }
            let w = b.word_at(pos);
            for j in 0..64u64 {
                let idx = pos + j;
                let expect = (idx as usize) < bits.len() && bits[idx as usize];
                prop_assert_eq!(w >> j & 1 == 1, expect);
            }
            let ones: Vec<u64> = b.ones().collect();
            let expect: Vec<u64> = bits.iter().enumerate().filter(|(_, &v)| v).map(|(i, _)| i as u64).collect();
            prop_assert_eq!(ones, expect);
        }
    }
}
