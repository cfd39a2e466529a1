use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Periodic puncturing of a rate-1/2 systematic code to rate
/// `R_CC = N_O/(2N_I)`: per block of `N_O` sections every systematic bit and
/// `2N_I − N_O` evenly spaced parity bits are kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PuncturePattern {
    pub n_o: usize,
    pub n_i: usize,
}

impl PuncturePattern {
    pub fn new(n_o: usize, n_i: usize) -> Result<Self> {
        if n_i == 0 || n_o < n_i || n_o > 2 * n_i {
            return Err(Error::InvalidInput(format!(
                "puncturing needs N_I ≤ N_O ≤ 2N_I, got N_O = {n_o}, N_I = {n_i}"
            )));
        }
        Ok(PuncturePattern { n_o, n_i })
    }

    /// Code rate after puncturing.
    pub fn rate(&self) -> f64 {
        self.n_o as f64 / (2 * self.n_i) as f64
    }

    /// Parity bits kept per block.
    pub fn parity_per_block(&self) -> usize {
        2 * self.n_i - self.n_o
    }

    /// Whether the parity bit of section `k` is kept.
    pub fn keeps_parity(&self, k: usize) -> bool {
        let kp = self.parity_per_block();
        if kp == 0 {
            return false;
        }
        let pos = k % self.n_o;
        // kept positions floor(j·N_O/kp), j = 0..kp
        let j = (pos * kp).div_ceil(self.n_o);
        j < kp && j * self.n_o / kp == pos
    }

    /// Keep flags `(systematic, parity)` over one block.
    pub fn period_mask(&self) -> Vec<(bool, bool)> {
        (0..self.n_o).map(|k| (true, self.keeps_parity(k))).collect()
    }

    /// Mask over `sections` sections; a final partial block follows the
    /// same periodic pattern.
    pub fn mask(&self, sections: usize) -> PunctureMask {
        let keep = (0..sections).flat_map(|k| [true, self.keeps_parity(k)]).collect();
        PunctureMask { keep }
    }
}

/// Keep flags over a stream of `(systematic, parity)` pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PunctureMask {
    keep: Vec<bool>,
}

impl PunctureMask {
    pub fn from_flags(keep: Vec<bool>) -> Self {
        PunctureMask { keep }
    }

    /// Length of the unpunctured stream.
    pub fn len(&self) -> usize {
        self.keep.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keep.is_empty()
    }

    /// Number of kept positions.
    pub fn kept(&self) -> usize {
        self.keep.iter().filter(|&&k| k).count()
    }

    pub fn flags(&self) -> &[bool] {
        &self.keep
    }

    pub fn puncture<T: Copy>(&self, stream: &[T]) -> Result<Vec<T>> {
        if stream.len() != self.keep.len() {
            return Err(Error::LengthMismatch {
                expected: self.keep.len(),
                actual: stream.len(),
            });
        }
        Ok(stream.iter().zip(&self.keep).filter(|(_, &k)| k).map(|(&x, _)| x).collect())
    }

    /// Reinserts erased positions as neutral LLRs.
    pub fn depuncture(&self, llrs: &[f64]) -> Result<Vec<f64>> {
        let kept = self.kept();
        if llrs.len() != kept {
            return Err(Error::LengthMismatch {
                expected: kept,
                actual: llrs.len(),
            });
        }
        let mut it = llrs.iter();
        Ok(self.keep.iter().map(|&k| if k { *it.next().unwrap() } else { 0.0 }).collect())
    }
}

/// Punctures a whole number of blocks of `(systematic, parity)` pairs.
pub fn puncture<T: Copy>(pattern: &PuncturePattern, stream: &[T]) -> Result<Vec<T>> {
    let block = 2 * pattern.n_o;
    if stream.len() % block != 0 {
        return Err(Error::InvalidInput(format!(
            "stream of {} bits is not a whole number of {block}-bit blocks",
            stream.len()
        )));
    }
    pattern.mask(stream.len() / 2).puncture(stream)
}

/// Inverse of [`puncture`] on LLRs, erased positions set to zero.
pub fn depuncture(pattern: &PuncturePattern, llrs: &[f64]) -> Result<Vec<f64>> {
    let per_block = pattern.n_o + pattern.parity_per_block();
    if llrs.len() % per_block != 0 {
        return Err(Error::InvalidInput(format!(
            "{} values are not a whole number of {per_block}-value blocks",
            llrs.len()
        )));
    }
    pattern.mask(llrs.len() / per_block * pattern.n_o).depuncture(llrs)
}

/// Evenly spaced selection of `keep` out of `n` positions.
fn spaced(n: usize, keep: usize) -> Vec<bool> {
    let mut out = vec![false; n];
    for j in 0..keep.min(n) {
        out[j * n / keep] = true;
    }
    out
}

/// Rate matching of a `sections`-long rate-1/2 systematic stream to exactly
/// `kept` bits. All systematic bits are kept when `kept ≥ sections`, with the
/// parity selection evenly spaced.
///
/// Beyond rate one not every systematic bit fits. The sections flagged in
/// `priority` are then kept first (in a serial concatenation these are the
/// inner systematic bits carrying outer systematic bits, i.e. the systematic
/// bits of the whole code) and the rest of the budget is spread evenly over
/// the remaining positions in stream order. Without priorities both streams
/// are thinned evenly in equal proportion.
pub fn rate_matching_mask(sections: usize, kept: usize, priority: &[bool]) -> Result<PunctureMask> {
    if kept == 0 || kept > 2 * sections {
        return Err(Error::InvalidInput(format!(
            "cannot keep {kept} of {} bits",
            2 * sections
        )));
    }
    if kept >= sections {
        let par = spaced(sections, kept - sections);
        return Ok(PunctureMask {
            keep: par.into_iter().flat_map(|p| [true, p]).collect(),
        });
    }
    let prio = |i: usize| priority.get(i).copied().unwrap_or(false);
    let first: Vec<usize> = (0..sections).filter(|&i| prio(i)).map(|i| 2 * i).collect();
    let pool: Vec<usize> = (0..2 * sections).filter(|&p| !(p % 2 == 0 && prio(p / 2))).collect();
    let mut keep = vec![false; 2 * sections];
    let take = |set: &[usize], n: usize, keep: &mut Vec<bool>| {
        for (j, f) in spaced(set.len(), n).into_iter().enumerate() {
            if f {
                keep[set[j]] = true;
            }
        }
    };
    if first.is_empty() {
        let ks = kept / 2;
        take(&(0..sections).map(|i| 2 * i).collect::<Vec<_>>(), ks, &mut keep);
        take(&(0..sections).map(|i| 2 * i + 1).collect::<Vec<_>>(), kept - ks, &mut keep);
    } else if kept <= first.len() {
        take(&first, kept, &mut keep);
    } else {
        take(&first, first.len(), &mut keep);
        take(&pool, kept - first.len(), &mut keep);
    }
    Ok(PunctureMask { keep })
}

/// Best rational approximation `num/den` of `x` among the continued-fraction
/// convergents with `den ≤ max_den`.
pub fn approximate_ratio(x: f64, max_den: u64) -> Result<(u64, u64)> {
    if !(x.is_finite() && x > 0.0) || max_den == 0 {
        return Err(Error::InvalidInput(format!("cannot approximate {x}")));
    }
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut r = x;
    let mut best = (x.round().max(1.0) as u64, 1);
    for _ in 0..64 {
        let a = r.floor();
        let ai = a as u64;
        let h2 = ai.saturating_mul(h1).saturating_add(h0);
        let k2 = ai.saturating_mul(k1).saturating_add(k0);
        if k2 > max_den {
            break;
        }
        best = (h2, k2);
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a;
        if frac < 1e-12 || ((h2 as f64 / k2 as f64) - x).abs() < 1e-12 * x {
            break;
        }
        r = 1.0 / frac;
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_when_no_puncturing() {
        let p = PuncturePattern::new(5, 5).unwrap();
        assert_eq!(p.rate(), 0.5);
        let x: Vec<u8> = (0..20).map(|i| (i % 3) as u8).collect();
        assert_eq!(puncture(&p, &x).unwrap(), x);
    }

    #[test]
    fn example_rate_and_counts() {
        let p = PuncturePattern::new(75, 59).unwrap();
        assert!((p.rate() - 0.636).abs() < 5e-4);
        let m = p.mask(75);
        assert_eq!(m.kept(), 2 * 59);
        let m3 = p.mask(225);
        assert_eq!(m3.kept(), 3 * 118);
    }

    #[test]
    fn round_trip_keeps_kept_positions() {
        let p = PuncturePattern::new(4, 3).unwrap();
        let x: Vec<f64> = (0..16).map(|i| i as f64 + 1.0).collect();
        let y = puncture(&p, &x).unwrap();
        assert_eq!(y.len(), 12);
        let z = depuncture(&p, &y).unwrap();
        for (a, b) in x.iter().zip(&z) {
            assert!(*b == 0.0 || a == b);
        }
        assert_eq!(z.iter().filter(|&&v| v == 0.0).count(), 4);
        assert!(puncture(&p, &x[..10]).is_err());
    }

    #[test]
    fn rate_matching_exact_counts() {
        for (n, k) in [(100, 150), (100, 100), (100, 71), (7, 14)] {
            let m = rate_matching_mask(n, k, &[]).unwrap();
            assert_eq!(m.kept(), k);
        }
        let m = rate_matching_mask(10, 15, &[]).unwrap();
        assert!(m.flags().iter().step_by(2).all(|&s| s));
    }

    #[test]
    fn rate_matching_keeps_priority_sections_first() {
        let prio: Vec<bool> = (0..30).map(|i| i % 3 == 0).collect();
        let m = rate_matching_mask(30, 20, &prio).unwrap();
        assert_eq!(m.kept(), 20);
        for i in (0..30).filter(|i| i % 3 == 0) {
            assert!(m.flags()[2 * i]);
        }
        let m = rate_matching_mask(30, 6, &prio).unwrap();
        assert_eq!(m.kept(), 6);
        assert!(m.flags().iter().enumerate().filter(|(_, &f)| f).all(|(p, _)| p % 2 == 0 && prio[p / 2]));
    }

    #[test]
    fn continued_fraction() {
        assert_eq!(approximate_ratio(1.2712, 128).unwrap(), (75, 59));
        assert_eq!(approximate_ratio(3.0 / 2.36, 128).unwrap(), (75, 59));
        assert_eq!(approximate_ratio(2.0 / 1.18, 128).unwrap(), (100, 59));
        assert_eq!(approximate_ratio(1.5 / 0.91, 128).unwrap(), (150, 91));
        assert_eq!(approximate_ratio(1.25, 128).unwrap(), (5, 4));
    }
}
