//! Fixed-length bitsets over `[0, len)` with word-level popcounts.

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bits {
    len: u64,
    words: Vec<u64>,
}

impl Bits {
    pub fn zeros(len: u64) -> Self {
        Bits { len, words: vec![0; len.div_ceil(64) as usize] }
    }

    pub fn ones(len: u64) -> Self {
        let mut b = Bits { len, words: vec![u64::MAX; len.div_ceil(64) as usize] };
        b.trim();
        b
    }

    pub fn from_members(len: u64, members: impl IntoIterator<Item = u64>) -> Option<Self> {
        let mut b = Bits::zeros(len);
        for m in members {
            if m >= len {
                return None;
            }
            b.set(m, true);
        }
        Some(b)
    }

    fn trim(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(w) = self.words.last_mut() {
                *w &= (1u64 << rem) - 1;
            }
        }
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

    pub fn get(&self, i: u64) -> bool {
        i < self.len && self.words[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: u64, v: bool) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        let (w, b) = ((i / 64) as usize, i % 64);
        if v {
            self.words[w] |= 1 << b;
        } else {
            self.words[w] &= !(1 << b);
        }
    }

    pub fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Members below `i`.
    pub fn count_below(&self, i: u64) -> u64 {
        let i = i.min(self.len);
        let full = (i / 64) as usize;
        let mut c: u64 = self.words[..full].iter().map(|w| w.count_ones() as u64).sum();
        let rem = i % 64;
        if rem != 0 {
            c += (self.words[full] & ((1u64 << rem) - 1)).count_ones() as u64;
        }
        c
    }

    /// Same members, length changed; members beyond the new length drop.
    pub fn resized(&self, len: u64) -> Self {
        let mut words = self.words.clone();
        words.resize(len.div_ceil(64) as usize, 0);
        let mut b = Bits { len, words };
        b.trim();
        b
    }

    pub fn and_assign(&mut self, other: &Bits) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= *b;
        }
    }

    pub fn and_not_assign(&mut self, other: &Bits) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !*b;
        }
    }

    pub fn members(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as u64;
                w &= w - 1;
                Some(wi as u64 * 64 + t)
            })
        })
    }

    /// Prefix popcounts per word: entry `k` counts members below `64k`.
    pub fn word_prefix(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.words.len() + 1);
        let mut acc = 0;
        out.push(0);
        for w in &self.words {
            acc += w.count_ones() as u64;
            out.push(acc);
        }
        out
    }

    /// `count_below` in constant time given `word_prefix`.
    pub fn count_below_with(&self, prefix: &[u64], i: u64) -> u64 {
        let i = i.min(self.len);
        let full = (i / 64) as usize;
        let rem = i % 64;
        let mut c = prefix[full];
        if rem != 0 {
            c += (self.words[full] & ((1u64 << rem) - 1)).count_ones() as u64;
        }
        c
    }
}
