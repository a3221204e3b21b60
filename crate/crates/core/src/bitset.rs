//! Fixed-width bit vector used by the dense sumset engine and by enumeration.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bitset {
    words: Vec<u64>,
    len: usize,
}

impl Bitset {
    pub fn new(len: usize) -> Self {
        Bitset { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn from_positions<I: IntoIterator<Item = usize>>(len: usize, positions: I) -> Self {
        let mut b = Bitset::new(len);
        for p in positions {
            b.set(p);
        }
        b
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn set(&mut self, idx: usize) {
        assert!(idx < self.len, "bit {idx} out of range {}", self.len);
        self.words[idx / 64] |= 1 << (idx % 64);
    }

    #[inline]
    pub fn test(&self, idx: usize) -> bool {
        idx < self.len && self.words[idx / 64] & (1 << (idx % 64)) != 0
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// `self |= other << shift`, truncated to `self.len()`.
    pub fn or_shifted(&mut self, other: &Bitset, shift: usize) {
        let word_shift = shift / 64;
        let bit_shift = shift % 64;
        let n = self.words.len();
        for (i, &w) in other.words.iter().enumerate() {
            if w == 0 {
                continue;
            }
            let dst = i + word_shift;
            if dst >= n {
                break;
            }
            if bit_shift == 0 {
                self.words[dst] |= w;
            } else {
                self.words[dst] |= w << bit_shift;
                if dst + 1 < n {
                    self.words[dst + 1] |= w >> (64 - bit_shift);
                }
            }
        }
        self.clear_tail();
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(i * 64 + t)
                }
            })
        })
    }
}
