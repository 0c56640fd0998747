//! Seeded sampling of random 3-XOR formulas.
//!
//! The generator is xoshiro256** seeded through SplitMix64
//! (`Xoshiro256StarStar::seed_from_u64`). Trial `t` of a batch with seed `s`
//! uses the stream seeded with `s + t * 0x9E3779B97F4A7C15` (wrapping).
//! Bounded integers are drawn with [`uniform_below`]: rejection of the
//! incomplete top block of `u64`, then a remainder. A 3-subset is identified
//! with its rank in the colexicographic order of all 3-subsets of `{1..n}`.
//! These rules fully determine every sampled formula from its seed.

use std::collections::HashSet;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use thiserror::Error;

use crate::formula::{Var, XorFormula};

pub type Rng = Xoshiro256StarStar;

const TRIAL_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SampleError {
    #[error("need at least 3 variables, got {0}")]
    TooFewVariables(u32),
    #[error("need at least one clause")]
    NoClauses,
    #[error("requested {m} clauses but only {available} distinct ones exist over {n} variables")]
    TooManyClauses { m: u64, n: u32, available: u64 },
    #[error("ratio must be positive and finite, got {0}")]
    BadRatio(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distribution {
    /// Uniform over sets of `m` distinct variable triples, all parities 0.
    Homogeneous,
    /// Uniform over sets of `m` inequivalent equations `x + y + z = c`.
    General,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleConfig {
    pub n: u32,
    pub m: u64,
    pub seed: u64,
    pub distribution: Distribution,
}

impl SampleConfig {
    pub fn homogeneous(n: u32, m: u64, seed: u64) -> Self {
        Self {
            n,
            m,
            seed,
            distribution: Distribution::Homogeneous,
        }
    }

    pub fn general(n: u32, m: u64, seed: u64) -> Self {
        Self {
            n,
            m,
            seed,
            distribution: Distribution::General,
        }
    }

    /// Clause count from a ratio: `m = round(ratio * n)`.
    pub fn from_ratio(
        n: u32,
        ratio: f64,
        seed: u64,
        distribution: Distribution,
    ) -> Result<Self, SampleError> {
        Ok(Self {
            n,
            m: clauses_for_ratio(n, ratio)?,
            seed,
            distribution,
        })
    }

    pub fn validate(&self) -> Result<(), SampleError> {
        if self.n < 3 {
            return Err(SampleError::TooFewVariables(self.n));
        }
        if self.m == 0 {
            return Err(SampleError::NoClauses);
        }
        let available = match self.distribution {
            Distribution::Homogeneous => triples(self.n),
            Distribution::General => 2 * triples(self.n),
        };
        if self.m > available {
            return Err(SampleError::TooManyClauses {
                m: self.m,
                n: self.n,
                available,
            });
        }
        Ok(())
    }

    pub fn sample(&self) -> Result<XorFormula, SampleError> {
        match self.distribution {
            Distribution::Homogeneous => sample_homogeneous(self),
            Distribution::General => sample_general(self),
        }
    }
}

pub fn clauses_for_ratio(n: u32, ratio: f64) -> Result<u64, SampleError> {
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(SampleError::BadRatio(ratio));
    }
    Ok((ratio * n as f64).round() as u64)
}

/// `C(n, 3)`.
pub fn triples(n: u32) -> u64 {
    let n = n as u64;
    if n < 3 {
        0
    } else {
        n * (n - 1) * (n - 2) / 6
    }
}

/// RNG stream for trial `trial` of a batch seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> Rng {
    Rng::seed_from_u64(seed.wrapping_add(trial.wrapping_mul(TRIAL_STRIDE)))
}

/// Uniform integer in `[0, bound)`.
pub fn uniform_below(rng: &mut impl RngCore, bound: u64) -> u64 {
    assert!(bound > 0);
    // Largest multiple of `bound` that fits, as an exclusive limit in u128.
    let limit = (1u128 << 64) - ((1u128 << 64) % bound as u128);
    loop {
        let x = rng.next_u64();
        if (x as u128) < limit {
            return x % bound;
        }
    }
}

/// The 3-subset of `{1..}` with colexicographic rank `r`.
pub fn unrank_triple(r: u64) -> [Var; 3] {
    // Largest c with C(c, 3) <= r, then recurse on the remainder.
    fn largest(r: u64, k: u64) -> u64 {
        let binom = |c: u64| -> u64 {
            match k {
                1 => c,
                2 => c * c.saturating_sub(1) / 2,
                _ => c * c.saturating_sub(1) * c.saturating_sub(2) / 6,
            }
        };
        let mut c = k - 1;
        // Grow geometrically, then binary search.
        let mut hi = k;
        while binom(hi) <= r {
            c = hi;
            hi *= 2;
        }
        let mut lo = c;
        while lo + 1 < hi {
            let mid = (lo + hi) / 2;
            if binom(mid) <= r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
    let c3 = largest(r, 3);
    let r = r - c3 * (c3 - 1) * (c3 - 2) / 6;
    let c2 = largest(r, 2);
    let r = r - c2 * (c2 - 1) / 2;
    let c1 = r;
    [c1 as Var + 1, c2 as Var + 1, c3 as Var + 1]
}

/// Colexicographic rank of a sorted triple.
pub fn rank_triple(t: [Var; 3]) -> u64 {
    let [a, b, c] = t.map(|v| v as u64 - 1);
    c * (c - 1) * (c - 2) / 6 + b * (b.max(1) - 1) / 2 + a
}

/// `m` distinct indices from `[0, total)` in draw order.
fn distinct_indices(rng: &mut Rng, total: u64, m: u64) -> Vec<u64> {
    if m.saturating_mul(2) <= total {
        let mut seen = HashSet::with_capacity(m as usize);
        let mut out = Vec::with_capacity(m as usize);
        while (out.len() as u64) < m {
            let x = uniform_below(rng, total);
            if seen.insert(x) {
                out.push(x);
            }
        }
        out
    } else {
        // Dense case: partial Fisher-Yates over the whole index range.
        let mut all: Vec<u64> = (0..total).collect();
        for i in 0..m as usize {
            let j = i + uniform_below(rng, total - i as u64) as usize;
            all.swap(i, j);
        }
        all.truncate(m as usize);
        all
    }
}

pub fn sample_homogeneous(cfg: &SampleConfig) -> Result<XorFormula, SampleError> {
    let cfg = SampleConfig {
        distribution: Distribution::Homogeneous,
        ..*cfg
    };
    cfg.validate()?;
    let mut rng = Rng::seed_from_u64(cfg.seed);
    sample_homogeneous_with(&mut rng, cfg.n, cfg.m)
}

pub fn sample_general(cfg: &SampleConfig) -> Result<XorFormula, SampleError> {
    let cfg = SampleConfig {
        distribution: Distribution::General,
        ..*cfg
    };
    cfg.validate()?;
    let mut rng = Rng::seed_from_u64(cfg.seed);
    sample_general_with(&mut rng, cfg.n, cfg.m)
}

pub fn sample_homogeneous_with(rng: &mut Rng, n: u32, m: u64) -> Result<XorFormula, SampleError> {
    SampleConfig::homogeneous(n, m, 0).validate()?;
    let idx = distinct_indices(rng, triples(n), m);
    Ok(XorFormula::homogeneous(n, idx.into_iter().map(unrank_triple))
        .expect("distinct in-range triples"))
}

pub fn sample_general_with(rng: &mut Rng, n: u32, m: u64) -> Result<XorFormula, SampleError> {
    SampleConfig::general(n, m, 0).validate()?;
    let idx = distinct_indices(rng, 2 * triples(n), m);
    Ok(XorFormula::from_equations(
        n,
        idx.into_iter().map(|i| (unrank_triple(i / 2), i % 2 == 1)),
    )
    .expect("distinct in-range equations"))
}
