use log::warn;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Attempts per spread value before lowering it.
const RESTARTS: usize = 200;

/// S-random permutation: any two positions within distance `S` of each
/// other are sent more than `S` apart.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpreadInterleaver {
    perm: Vec<usize>,
    spread: usize,
    seed: u64,
}

/// Default spread `⌊√(N/2)⌋`.
pub fn default_spread(n: usize) -> usize {
    ((n as f64 / 2.0).sqrt().floor() as usize).max(1)
}

fn attempt(n: usize, s: usize, rng: &mut impl rand::Rng) -> Option<Vec<usize>> {
    let mut pool: Vec<usize> = (0..n).collect();
    pool.shuffle(rng);
    let mut perm = Vec::with_capacity(n);
    while !pool.is_empty() {
        let i = perm.len();
        let lo = i.saturating_sub(s);
        let ok = |c: usize| perm[lo..i].iter().all(|&p: &usize| p.abs_diff(c) > s);
        let k = pool.iter().position(|&c| ok(c))?;
        perm.push(pool.swap_remove(k));
    }
    Some(perm)
}

/// Builds an S-random interleaver of length `n` by randomized rejection,
/// lowering `S` with a warning when repeated attempts fail.
pub fn build_spread_interleaver(n: usize, spread: usize, seed: u64) -> Result<SpreadInterleaver> {
    if n == 0 {
        return Err(Error::InvalidInput("interleaver length must be positive".into()));
    }
    let mut s = spread;
    let mut tries = 0u64;
    loop {
        for _ in 0..RESTARTS {
            let mut rng = crate::rng::stream(seed, tries);
            tries += 1;
            if let Some(perm) = attempt(n, s, &mut rng) {
                if s < spread {
                    warn!("spread interleaver of length {n}: lowered S from {spread} to {s}");
                }
                return Ok(SpreadInterleaver { perm, spread: s, seed });
            }
        }
        if s == 0 {
            unreachable!("S = 0 always succeeds");
        }
        s -= 1;
    }
}

impl SpreadInterleaver {
    /// Interleaver from an explicit permutation (`out[i] = in[perm[i]]`).
    pub fn from_permutation(perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidInput("not a permutation".into()));
            }
        }
        let spread = measured_spread(&perm);
        Ok(SpreadInterleaver { perm, spread, seed: 0 })
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// Spread the permutation was built for.
    pub fn spread(&self) -> usize {
        self.spread
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn interleave<T: Copy>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.perm.len(), "interleaver length");
        self.perm.iter().map(|&p| x[p]).collect()
    }

    pub fn deinterleave<T: Copy + Default>(&self, y: &[T]) -> Vec<T> {
        assert_eq!(y.len(), self.perm.len(), "interleaver length");
        let mut x = vec![T::default(); y.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }

    /// Checks the S-random property for spread `s`.
    pub fn satisfies_spread(&self, s: usize) -> bool {
        let n = self.perm.len();
        (0..n).all(|i| (i + 1..(i + s + 1).min(n)).all(|j| self.perm[i].abs_diff(self.perm[j]) > s))
    }
}

/// Largest `S` for which `perm` is S-random.
fn measured_spread(perm: &[usize]) -> usize {
    let mut s = 0;
    let n = perm.len();
    while s + 1 < n && (0..n).all(|i| (i + 1..(i + s + 2).min(n)).all(|j| perm[i].abs_diff(perm[j]) > s + 1)) {
        s += 1;
    }
    s
}
