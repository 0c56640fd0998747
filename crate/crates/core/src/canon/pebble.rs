//! Exact decision of k-local consistency for XOR systems.
//!
//! Computes the largest family of partial assignments on at most `k`
//! variables that (a) violates no equation lying inside its domain, (b) is
//! closed under restriction, and (c) lets every member on fewer than `k`
//! variables extend to any further variable. The system is k-locally
//! consistent iff that family is nonempty, i.e. Verifier survives the
//! existential k-pebble game.

use std::collections::BTreeMap;

use crate::budget::SolveBudget;
use crate::formula::{Var, XorSystem};

/// State count (subsets times assignments) allowed when the budget has no
/// step limit.
pub const DEFAULT_STATE_LIMIT: u64 = 200_000_000;
pub const MAX_CONSISTENCY_VARS: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConsistencyError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("{n} variables exceed the supported {MAX_CONSISTENCY_VARS}")]
    TooManyVariables { n: u32 },
    #[error("{states} states exceed the limit of {limit}")]
    TooLarge { states: u128, limit: u64 },
    #[error("time budget exhausted")]
    BudgetExhausted,
}

/// A partial assignment held by Verifier's pebbles.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PebblePosition {
    assignment: BTreeMap<Var, bool>,
}

impl PebblePosition {
    pub fn new<I: IntoIterator<Item = (Var, bool)>>(pairs: I) -> Self {
        Self {
            assignment: pairs.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.assignment.get(&var).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.assignment.iter().map(|(&v, &b)| (v, b))
    }
}

/// The greatest restriction-closed family with the extension property.
#[derive(Debug, Clone)]
pub struct ConsistentFamily {
    n: usize,
    k: usize,
    /// binom[a][b] = C(a, b)
    binom: Vec<Vec<u64>>,
    /// First index of subsets of each size.
    offset: Vec<usize>,
    words: usize,
    bits: Vec<u64>,
}

impl ConsistentFamily {
    /// Largest position size the family covers.
    pub fn width(&self) -> usize {
        self.k
    }

    /// Whether Verifier can hold `pos` forever. Positions with more than
    /// `width()` pebbles or out-of-range variables are never members.
    pub fn contains(&self, pos: &PebblePosition) -> bool {
        if pos.len() > self.k || self.bits.is_empty() {
            return false;
        }
        let mut mask = 0u64;
        for (v, _) in pos.iter() {
            if v == 0 || v as usize > self.n {
                return false;
            }
            mask |= 1u64 << (v - 1);
        }
        let mut a = 0usize;
        for (i, (_, b)) in pos.iter().enumerate() {
            a |= (b as usize) << i;
        }
        self.get(self.index(mask), a)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty() || !self.get(0, 0)
    }

    /// Colex rank of a subset among all subsets of size at most k.
    fn index(&self, mask: u64) -> usize {
        let mut r = 0u64;
        let mut m = mask;
        let mut i = 0;
        while m != 0 {
            let b = m.trailing_zeros() as usize;
            i += 1;
            r += self.binom[b][i];
            m &= m - 1;
        }
        self.offset[i] + r as usize
    }

    fn get(&self, set: usize, a: usize) -> bool {
        self.bits[set * self.words + a / 64] >> (a % 64) & 1 == 1
    }

    fn clear(&mut self, set: usize, a: usize) {
        self.bits[set * self.words + a / 64] &= !(1u64 << (a % 64));
    }

    /// Drops members of `sub` (on `j - 1` variables) with no extension in
    /// `sup`, which adds the variable at position `p`. Returns whether
    /// anything was dropped.
    fn revise_extension(&mut self, sub: usize, sup: usize, p: usize, j: usize) -> bool {
        if self.words == 1 {
            let before = self.bits[sub];
            let after = before & project_bit(self.bits[sup], p);
            self.bits[sub] = after;
            return after != before;
        }
        let mut changed = false;
        for a in 0..1usize << (j - 1) {
            if self.get(sub, a) && !self.get(sup, insert_bit(a, p, false)) && !self.get(sup, insert_bit(a, p, true)) {
                self.clear(sub, a);
                changed = true;
            }
        }
        changed
    }

    /// Drops members of `sup` (on `j` variables) whose restriction dropping
    /// position `p` is not in `sub`.
    fn revise_restriction(&mut self, sup: usize, sub: usize, p: usize, j: usize) -> bool {
        if self.words == 1 {
            let before = self.bits[sup];
            let after = before & spread_bit(self.bits[sub], p);
            self.bits[sup] = after;
            return after != before;
        }
        let mut changed = false;
        for a in 0..1usize << j {
            if self.get(sup, a) && !self.get(sub, remove_bit(a, p)) {
                self.clear(sup, a);
                changed = true;
            }
        }
        changed
    }
}

/// Inserts bit `value` at position `p` of `a`.
#[inline]
fn insert_bit(a: usize, p: usize, value: bool) -> usize {
    let low = a & ((1 << p) - 1);
    ((a >> p) << (p + 1)) | ((value as usize) << p) | low
}

#[inline]
fn remove_bit(a: usize, p: usize) -> usize {
    let low = a & ((1 << p) - 1);
    ((a >> (p + 1)) << p) | low
}

/// `LOW_HALF[s]` keeps bit `i` of a word iff bit `s` of `i` is clear.
const LOW_HALF: [u64; 7] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0F0F_0F0F_0F0F_0F0F,
    0x00FF_00FF_00FF_00FF,
    0x0000_FFFF_0000_FFFF,
    0x0000_0000_FFFF_FFFF,
    u64::MAX,
];

/// `PARITY_PATTERN[p]` has bit `i` set iff bit `p` of `i` is set.
const PARITY_PATTERN: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

/// Pushes every `base | extra` with `extra` drawn from `free`, at most
/// `budget` elements.
fn collect_supersets(base: u64, free: &[usize], budget: usize, out: &mut Vec<u64>) {
    out.push(base);
    if budget == 0 {
        return;
    }
    for (i, &v) in free.iter().enumerate() {
        collect_supersets(base | (1u64 << v), &free[i + 1..], budget - 1, out);
    }
}

/// Bit `a` of the result is bit `remove_bit(a, p)` of `x`, for sets on `j`
/// variables packed in one word. Requires `p < j <= 6`; bits of `x` at or
/// above `2^(j-1)` must be clear.
#[inline]
fn spread_bit(x: u64, p: usize) -> u64 {
    let mut t = x;
    for s in (p..6).rev() {
        t = (t | (t << (1 << s))) & LOW_HALF[s];
    }
    t | (t << (1 << p))
}

/// Bit `a` of the result is set iff either extension of `a` at position
/// `p` is in `x`, a set on `j` variables. Requires `p < j <= 6`.
#[inline]
fn project_bit(x: u64, p: usize) -> u64 {
    let mut t = (x | (x >> (1 << p))) & LOW_HALF[p];
    for s in p..6 {
        t = (t | (t >> (1 << s))) & LOW_HALF[s + 1];
    }
    t
}

/// Position of variable bit `v` among the set bits of `mask`.
#[inline]
fn position(mask: u64, v: usize) -> usize {
    (mask & ((1u64 << v) - 1)).count_ones() as usize
}

/// Decides k-local consistency of `system`. Steps in the budget bound the
/// number of stored states.
pub fn local_consistency<S: XorSystem + ?Sized>(
    system: &S,
    k: usize,
    budget: SolveBudget,
) -> Result<bool, ConsistencyError> {
    Ok(!consistent_family(system, k, budget)?.is_empty())
}

/// Computes the greatest consistent family of positions with at most `k`
/// pebbles. Width is capped at the number of variables.
pub fn consistent_family<S: XorSystem + ?Sized>(
    system: &S,
    k: usize,
    budget: SolveBudget,
) -> Result<ConsistentFamily, ConsistencyError> {
    if k == 0 {
        return Err(ConsistencyError::ZeroK);
    }
    let n = system.num_vars();
    if n > MAX_CONSISTENCY_VARS {
        return Err(ConsistencyError::TooManyVariables { n });
    }
    let n = n as usize;
    let k = k.min(n);
    let mut binom = vec![vec![0u64; k + 2]; n + 1];
    for a in 0..=n {
        binom[a][0] = 1;
        for b in 1..=k + 1 {
            binom[a][b] = if a == 0 { 0 } else { binom[a - 1][b - 1] + binom[a - 1][b] };
        }
    }
    let mut offset = vec![0usize; k + 2];
    for j in 0..=k {
        offset[j + 1] = offset[j] + binom[n][j] as usize;
    }
    let total = offset[k + 1];
    let words = ((1usize << k) + 63) / 64;
    let states = total as u128 * (1u128 << k);
    let limit = budget.max_steps.unwrap_or(DEFAULT_STATE_LIMIT);
    if states > limit as u128 {
        return Err(ConsistencyError::TooLarge { states, limit });
    }
    let clock = budget.start();

    let equations: Vec<(u64, bool)> = system
        .equations()
        .into_iter()
        .map(|(vars, rhs)| (vars.iter().fold(0u64, |m, &v| m ^ (1u64 << (v - 1))), rhs))
        .collect();
    let mut fam = ConsistentFamily {
        n,
        k,
        binom,
        offset,
        words,
        bits: vec![0; total * words],
    };

    // Enumerate subsets by size in colex order, matching `index`.
    let mut masks: Vec<u64> = Vec::with_capacity(total);
    for j in 0..=k {
        let start = masks.len();
        if j == 0 {
            masks.push(0);
        } else {
            // Gosper's hack walks same-size masks in increasing (colex) order.
            let mut m: u64 = (1u64 << j) - 1;
            let top = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            loop {
                masks.push(m);
                let c = m & m.wrapping_neg();
                let r = m.wrapping_add(c);
                if r == 0 || r > top {
                    break;
                }
                m = (((r ^ m) >> 2) / c) | r;
                if m > top {
                    break;
                }
            }
        }
        debug_assert_eq!(masks.len() - start, fam.binom[n][j] as usize);
    }
    debug_assert_eq!(masks.len(), total);

    for (set, &mask) in masks.iter().enumerate() {
        debug_assert_eq!(fam.index(mask), set);
        let size = 1usize << mask.count_ones();
        for w in 0..words {
            let live = size.saturating_sub(64 * w).min(64);
            fam.bits[set * words + w] = if live == 64 { u64::MAX } else { (1u64 << live) - 1 };
        }
    }
    // Each equation filters the sets that contain it.
    for &(e, rhs) in &equations {
        let width = e.count_ones() as usize;
        if width > k {
            continue;
        }
        let free: Vec<usize> = (0..n).filter(|&v| e >> v & 1 == 0).collect();
        let mut supersets = Vec::new();
        collect_supersets(e, &free, k - width, &mut supersets);
        for d in supersets {
            let set = fam.index(d);
            let mut local = 0usize;
            let mut m = e;
            while m != 0 {
                local |= 1 << position(d, m.trailing_zeros() as usize);
                m &= m - 1;
            }
            if words == 1 {
                let mut parity = 0u64;
                for (p, &pattern) in PARITY_PATTERN.iter().enumerate() {
                    if local >> p & 1 == 1 {
                        parity ^= pattern;
                    }
                }
                fam.bits[set] &= if rhs { parity } else { !parity };
            } else {
                for a in 0..1usize << d.count_ones() {
                    if ((a & local).count_ones() & 1 == 1) != rhs {
                        fam.clear(set, a);
                    }
                }
            }
        }
    }

    // A changed set is pushed once; popping it re-checks the sets that read
    // it: each subset must still extend into it, each superset must still
    // restrict into it.
    let mut stack: Vec<usize> = (0..total).collect();
    let mut queued = vec![true; total];
    let mut steps: u64 = 0;
    while let Some(set) = stack.pop() {
        queued[set] = false;
        steps += 1;
        if steps % 4096 == 0 && clock.time_exceeded() {
            return Err(ConsistencyError::BudgetExhausted);
        }
        let mask = masks[set];
        let j = mask.count_ones() as usize;

        let mut m = mask;
        while m != 0 {
            let x = m.trailing_zeros() as usize;
            m &= m - 1;
            let sub = fam.index(mask & !(1u64 << x));
            if fam.revise_extension(sub, set, position(mask, x), j) {
                if sub == 0 {
                    // Every member restricts to the empty position.
                    fam.bits.clear();
                    return Ok(fam);
                }
                if !queued[sub] {
                    queued[sub] = true;
                    stack.push(sub);
                }
            }
        }
        if j < fam.k {
            for y in 0..fam.n {
                if mask >> y & 1 == 1 {
                    continue;
                }
                let sup_mask = mask | (1u64 << y);
                let sup = fam.index(sup_mask);
                if fam.revise_restriction(sup, set, position(sup_mask, y), j + 1) && !queued[sup] {
                    queued[sup] = true;
                    stack.push(sup);
                }
            }
        }
    }
    if !fam.get(0, 0) {
        fam.bits.clear();
    }
    Ok(fam)
}
