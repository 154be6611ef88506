//! Dense bitset over `{0, .., len-1}` with a cyclic shift-or kernel, which
//! is what a sumset over `Z/pZ` reduces to.

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct BitSet {
    len: usize,
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        BitSet { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn full(len: usize) -> Self {
        let mut s = BitSet { len, words: vec![!0; len.div_ceil(64)] };
        s.trim();
        s
    }

    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.count() == self.len
    }

    pub fn is_subset(&self, other: &BitSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let tz = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + tz)
            })
        })
    }

    pub fn union_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    /// `self |= { (i + shift) mod len : i in src }`.
    pub fn or_rotated(&mut self, src: &BitSet, shift: usize) {
        debug_assert_eq!(self.len, src.len);
        let shift = shift % self.len;
        self.or_shl(src, shift);
        self.trim();
        if shift > 0 {
            self.or_shr(src, self.len - shift);
        }
    }

    // self |= src << s, bits past the end are dropped by the caller's trim.
    fn or_shl(&mut self, src: &BitSet, s: usize) {
        let (ws, bs) = (s / 64, s % 64);
        let n = self.words.len();
        for (i, &w) in src.words.iter().enumerate() {
            if w == 0 {
                continue;
            }
            let lo = i + ws;
            if lo < n {
                self.words[lo] |= w << bs;
            }
            if bs > 0 && lo + 1 < n {
                self.words[lo + 1] |= w >> (64 - bs);
            }
        }
    }

    // self |= src >> s
    fn or_shr(&mut self, src: &BitSet, s: usize) {
        let (ws, bs) = (s / 64, s % 64);
        let n = src.words.len();
        for i in 0..self.words.len() {
            let hi = i + ws;
            if hi >= n {
                break;
            }
            let mut w = src.words[hi] >> bs;
            if bs > 0 && hi + 1 < n {
                w |= src.words[hi + 1] << (64 - bs);
            }
            self.words[i] |= w;
        }
    }

    fn trim(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn rotate_matches_naive(len in 1usize..300, shift in 0usize..600, seeds in proptest::collection::vec(0usize..300, 0..40)) {
            let mut src = BitSet::new(len);
            for s in &seeds {
                src.insert(s % len);
            }
            let mut fast = BitSet::new(len);
            fast.or_rotated(&src, shift);
            let mut naive = BitSet::new(len);
            for i in src.iter() {
                naive.insert((i + shift) % len);
            }
            prop_assert_eq!(fast, naive);
        }
    }

    #[test]
    fn full_and_count() {
        for len in [1, 63, 64, 65, 128, 200] {
            let f = BitSet::full(len);
            assert_eq!(f.count(), len);
            assert!(f.is_full());
            assert_eq!(f.iter().collect::<Vec<_>>(), (0..len).collect::<Vec<_>>());
        }
    }
}
