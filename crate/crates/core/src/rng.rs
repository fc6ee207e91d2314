//! Deterministic, splittable random streams.
//!
//! Every random quantity in this crate is drawn from a stream addressed by a
//! master seed plus a label path, e.g. `(seed, "col", j, i)`. Stream
//! derivation is a pure 128-bit hash of that path, so a stream's output never
//! depends on how many sibling streams were derived before it, which thread
//! derived it, or in which order work was scheduled. This is what makes whole
//! experiments a pure function of `(seed, configuration)`.
//!
//! Output generation is counter-based: the state is the derived 128-bit key
//! plus a draw counter, and each output is a two-round finalizer over
//! (key, counter). There is no large internal buffer to fill, which keeps
//! per-stream setup cheap; decoding regenerates one short stream per matrix
//! entry, hundreds of millions of them in a large sweep.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const STR_TAG: u64 = 0x9ae1_6a3b_2f90_404f;
const INT_TAG: u64 = 0xd1b5_4a32_d192_ed03;

/// splitmix64 finalizer; full avalanche over 64 bits.
#[inline(always)]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// One component of a stream label path.
#[derive(Clone, Copy, Debug)]
pub enum Label<'a> {
    Str(&'a str),
    Index(u64),
}

/// 128-bit address of a stream, built by absorbing label components.
///
/// Keys are cheap to copy and extend; deriving a child costs a handful of
/// integer multiplies. Distinct paths collide with probability ~2^-128 per
/// pair, negligible at any reachable scale.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamKey {
    h0: u64,
    h1: u64,
}

impl StreamKey {
    pub fn root(master_seed: u64) -> Self {
        StreamKey {
            h0: mix64(master_seed ^ GOLDEN),
            h1: mix64(master_seed.wrapping_add(INT_TAG)),
        }
    }

    #[inline(always)]
    fn absorb(self, v: u64, tag: u64) -> Self {
        let h0 = mix64(self.h0 ^ v.wrapping_mul(GOLDEN) ^ tag);
        let h1 = mix64(self.h1.wrapping_add(mix64(v ^ tag)) ^ h0);
        StreamKey { h0, h1 }
    }

    pub fn child_str(self, s: &str) -> Self {
        self.absorb(fnv1a64(s.as_bytes()), STR_TAG)
    }

    #[inline(always)]
    pub fn child_index(self, i: u64) -> Self {
        self.absorb(i, INT_TAG)
    }

    pub fn child(self, label: Label<'_>) -> Self {
        match label {
            Label::Str(s) => self.child_str(s),
            Label::Index(i) => self.child_index(i),
        }
    }

    #[inline(always)]
    pub fn stream(self) -> RngStream {
        RngStream {
            k0: self.h0,
            k1: self.h1,
            counter: 0,
        }
    }
}

/// Derive the stream addressed by `(master_seed, path)`.
pub fn derive_stream(master_seed: u64, path: &[Label<'_>]) -> RngStream {
    let mut key = StreamKey::root(master_seed);
    for &label in path {
        key = key.child(label);
    }
    key.stream()
}

/// Counter-mode generator over a derived 128-bit key.
///
/// Each output is `mix64(mix64(k0 ^ c * GOLDEN) ^ k1)`: the first round is the
/// splitmix64 sequence keyed by one half, the second round folds in the other
/// half. Two full avalanche rounds over (key, counter) give streams that are
/// statistically independent across keys for this crate's purposes, which the
/// test suite checks distributionally against quadrature at the 3-sigma level.
#[derive(Clone, Debug)]
pub struct RngStream {
    k0: u64,
    k1: u64,
    counter: u64,
}

impl RngStream {
    #[inline(always)]
    pub fn next_u64(&mut self) -> u64 {
        let c = self.counter;
        self.counter = c.wrapping_add(1);
        mix64(mix64(self.k0 ^ c.wrapping_mul(GOLDEN)) ^ self.k1)
    }

    /// Uniform on [0, 1) with 53 random bits.
    #[inline(always)]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform on the open interval (0, 1); the endpoint 0 is rejected so
    /// logarithms of draws stay finite.
    #[inline(always)]
    pub fn open_unit(&mut self) -> f64 {
        loop {
            let v = self.next_f64();
            if v > 0.0 {
                return v;
            }
        }
    }

    /// Exp(1) by inverse CDF from an open-interval uniform; strictly positive.
    #[inline(always)]
    pub fn exp1(&mut self) -> f64 {
        -self.open_unit().ln()
    }
}

impl rand::RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        RngStream::next_u64(self)
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for chunk in dest.chunks_mut(8) {
            let bytes = RngStream::next_u64(self).to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_path_same_outputs() {
        let path = [Label::Str("trial"), Label::Index(0)];
        let mut a = derive_stream(7, &path);
        let mut b = derive_stream(7, &path);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn distinct_labels_distinct_outputs() {
        let mut a = derive_stream(7, &[Label::Str("trial"), Label::Index(0)]);
        let mut b = derive_stream(7, &[Label::Str("trial"), Label::Index(1)]);
        let differs = (0..100).any(|_| a.next_u64() != b.next_u64());
        assert!(differs);
    }

    #[test]
    fn derivation_is_order_independent() {
        let target = StreamKey::root(7)
            .child_str("trial")
            .child_index(0)
            .child_str("col")
            .child_index(3);
        let mut direct = target.stream();
        // Derive a pile of siblings first; the target stream must not care.
        let base = StreamKey::root(7).child_str("trial").child_index(0).child_str("col");
        let mut sink = 0u64;
        for s in 0..50 {
            sink ^= base.child_index(s).stream().next_u64();
        }
        let mut after = base.child_index(3).stream();
        assert_ne!(sink, 0);
        for _ in 0..20 {
            assert_eq!(direct.next_u64(), after.next_u64());
        }
    }

    #[test]
    fn index_and_str_labels_do_not_alias() {
        // "0" as a string must not collide with 0 as an index.
        let a = StreamKey::root(1).child_str("0").stream().next_u64();
        let b = StreamKey::root(1).child_index(0).stream().next_u64();
        assert_ne!(a, b);
    }

    #[test]
    fn uniform_moments_are_sane() {
        let mut s = derive_stream(42, &[Label::Str("moments")]);
        let n = 200_000;
        let (mut sum, mut sumsq, mut lag) = (0.0, 0.0, 0.0);
        let mut prev = s.next_f64();
        for _ in 0..n {
            let v = s.next_f64();
            sum += v;
            sumsq += v * v;
            lag += v * prev;
            prev = v;
        }
        let nf = n as f64;
        let mean = sum / nf;
        let var = sumsq / nf - mean * mean;
        let corr = (lag / nf - mean * mean) / var;
        // 3-sigma bands for U(0,1): sd(mean) = 1/sqrt(12 n).
        assert!((mean - 0.5).abs() < 3.0 / (12.0f64 * nf).sqrt(), "mean {mean}");
        assert!((var - 1.0 / 12.0).abs() < 0.002, "var {var}");
        assert!(corr.abs() < 3.0 / nf.sqrt(), "lag-1 corr {corr}");
    }

    #[test]
    fn open_unit_stays_interior() {
        let mut s = derive_stream(3, &[Label::Str("open")]);
        for _ in 0..10_000 {
            let v = s.open_unit();
            assert!(v > 0.0 && v < 1.0);
        }
    }
}
