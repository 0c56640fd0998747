//! Dense linear algebra over GF(2).
//!
//! Rows are packed into `u64` words, least significant bit first: column `j`
//! of a row lives in word `j / 64` at bit `j % 64`. Padding bits past the
//! last column are always zero, so word-wise equality is value equality.
//!
//! Elimination is plain Gauss-Jordan with the pivot for each column taken
//! from the first remaining row that has the bit set. The reduced form, the
//! kernel basis and the particular solution returned by [`solve`] are all
//! canonical: they depend only on the matrix, never on an iteration order
//! that could vary between runs.

use std::fmt;

use thiserror::Error;

const WORD_BITS: usize = 64;

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("dimension mismatch: expected length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
}

/// A vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Gf2Vector {
    len: usize,
    words: Vec<u64>,
}

impl Gf2Vector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Parses a string of `0`/`1` characters, index 0 first.
    ///
    /// # Panics
    /// Panics on any other character; intended for tests and literals.
    pub fn from_str_bits(s: &str) -> Self {
        let bits: Vec<bool> = s
            .chars()
            .map(|c| match c {
                '0' => false,
                '1' => true,
                other => panic!("invalid bit character {other:?}"),
            })
            .collect();
        Self::from_bits(&bits)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range (len {})", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range (len {})", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn xor_assign(&mut self, other: &Gf2Vector) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Indices of the set bits in ascending order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

impl fmt::Debug for Gf2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf2Vector(")?;
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        write!(f, ")")
    }
}

/// A dense row-major matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    stride: usize,
    bits: Vec<u64>,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            bits: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from rows written as `0`/`1` strings.
    pub fn from_rows_str(cols: usize, rows: &[&str]) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (r, s) in rows.iter().enumerate() {
            assert_eq!(s.len(), cols, "row {r} has wrong width");
            for (c, ch) in s.chars().enumerate() {
                m.set(r, c, ch == '1');
            }
        }
        m
    }

    /// Builds a matrix whose row `r` has ones exactly at `support[r]`.
    pub fn from_supports<I, R>(cols: usize, support: I) -> Self
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = usize>,
    {
        let rows: Vec<Vec<usize>> = support.into_iter().map(|r| r.into_iter().collect()).collect();
        let mut m = Self::zeros(rows.len(), cols);
        for (r, cs) in rows.iter().enumerate() {
            for &c in cs {
                let cur = m.get(r, c);
                m.set(r, c, !cur);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols);
        (self.bits[r * self.stride + c / WORD_BITS] >> (c % WORD_BITS)) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols);
        let idx = r * self.stride + c / WORD_BITS;
        let mask = 1u64 << (c % WORD_BITS);
        if value {
            self.bits[idx] |= mask;
        } else {
            self.bits[idx] &= !mask;
        }
    }

    pub fn row(&self, r: usize) -> Gf2Vector {
        Gf2Vector {
            len: self.cols,
            words: self.row_words(r).to_vec(),
        }
    }

    fn row_words(&self, r: usize) -> &[u64] {
        &self.bits[r * self.stride..(r + 1) * self.stride]
    }

    pub fn push_row(&mut self, row: &Gf2Vector) -> Result<(), Gf2Error> {
        if row.len != self.cols {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.cols,
                actual: row.len,
            });
        }
        self.bits.extend_from_slice(&row.words);
        self.rows += 1;
        Ok(())
    }

    /// `row[dst] ^= row[src]`.
    pub fn add_row(&mut self, dst: usize, src: usize) {
        assert!(dst != src);
        let s = self.stride;
        let (a, b) = if dst < src {
            let (lo, hi) = self.bits.split_at_mut(src * s);
            (&mut lo[dst * s..(dst + 1) * s], &hi[..s])
        } else {
            let (lo, hi) = self.bits.split_at_mut(dst * s);
            (&mut hi[..s], &lo[src * s..(src + 1) * s])
        };
        for (x, y) in a.iter_mut().zip(b) {
            *x ^= y;
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.stride {
            self.bits.swap(a * self.stride + w, b * self.stride + w);
        }
    }

    /// Computes `self * v`.
    pub fn mul_vec(&self, v: &Gf2Vector) -> Result<Gf2Vector, Gf2Error> {
        if v.len != self.cols {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.cols,
                actual: v.len,
            });
        }
        let mut out = Gf2Vector::zeros(self.rows);
        for r in 0..self.rows {
            let parity = self
                .row_words(r)
                .iter()
                .zip(&v.words)
                .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
                & 1;
            out.set(r, parity == 1);
        }
        Ok(out)
    }

    /// Reduces `self` in place to reduced row echelon form and returns the
    /// pivot column of each nonzero row, in row order. Columns at or beyond
    /// `col_limit` are carried along but never chosen as pivots.
    fn reduce(&mut self, col_limit: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut next = 0;
        for c in 0..col_limit.min(self.cols) {
            if next == self.rows {
                break;
            }
            let Some(p) = (next..self.rows).find(|&r| self.get(r, c)) else {
                continue;
            };
            self.swap_rows(p, next);
            for r in 0..self.rows {
                if r != next && self.get(r, c) {
                    self.add_row(r, next);
                }
            }
            pivots.push(c);
            next += 1;
        }
        pivots
    }

    /// Reduced row echelon form, together with the pivot columns.
    pub fn rref(&self) -> (Gf2Matrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.reduce(m.cols);
        (m, pivots)
    }

    /// Rank over GF(2). Works on a copy.
    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// A basis of the null space, one vector per free column in ascending
    /// column order. Each vector has a one at its free column, zeros at the
    /// other free columns, and whatever the pivot rows force elsewhere.
    pub fn kernel_basis(&self) -> Vec<Gf2Vector> {
        let (red, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = Gf2Vector::zeros(self.cols);
                v.set(free, true);
                for (row, &p) in pivots.iter().enumerate() {
                    if red.get(row, free) {
                        v.set(p, true);
                    }
                }
                v
            })
            .collect()
    }

    /// Returns the solution of `self * x = b` with every free variable set
    /// to zero, or `None` when the system is inconsistent.
    pub fn solve(&self, b: &Gf2Vector) -> Result<Option<Gf2Vector>, Gf2Error> {
        if b.len != self.rows {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.rows,
                actual: b.len,
            });
        }
        let mut aug = Gf2Matrix::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    aug.set(r, c, true);
                }
            }
            aug.set(r, self.cols, b.get(r));
        }
        let pivots = aug.reduce(self.cols);
        // Any row past the pivot rows is zero on the coefficient part.
        if (pivots.len()..self.rows).any(|r| aug.get(r, self.cols)) {
            return Ok(None);
        }
        let mut x = Gf2Vector::zeros(self.cols);
        for (row, &p) in pivots.iter().enumerate() {
            x.set(p, aug.get(row, self.cols));
        }
        Ok(Some(x))
    }
}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Gf2Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                f.write_str(if self.get(r, c) { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

pub fn rank(m: &Gf2Matrix) -> usize {
    m.rank()
}

pub fn kernel_basis(m: &Gf2Matrix) -> Vec<Gf2Vector> {
    m.kernel_basis()
}

pub fn solve(m: &Gf2Matrix, b: &Gf2Vector) -> Result<Option<Gf2Vector>, Gf2Error> {
    m.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Every assignment over `cols` columns, as vectors.
    fn all_vectors(cols: usize) -> impl Iterator<Item = Gf2Vector> {
        (0u32..1 << cols).map(move |mask| {
            let bits: Vec<bool> = (0..cols).map(|i| mask >> i & 1 == 1).collect();
            Gf2Vector::from_bits(&bits)
        })
    }

    fn brute_kernel_size(m: &Gf2Matrix) -> usize {
        all_vectors(m.cols())
            .filter(|v| m.mul_vec(v).unwrap().is_zero())
            .count()
    }

    fn complete_triples() -> Gf2Matrix {
        Gf2Matrix::from_rows_str(4, &["1110", "1101", "1011", "0111"])
    }

    #[test]
    fn rank_examples() {
        assert_eq!(Gf2Matrix::identity(3).rank(), 3);
        assert_eq!(Gf2Matrix::zeros(0, 5).rank(), 0);

        let full = complete_triples();
        // Only the zero vector solves Hx = 0, so the rank is full.
        assert_eq!(brute_kernel_size(&full), 1);
        assert_eq!(full.rank(), 4);

        let dep = Gf2Matrix::from_rows_str(4, &["1110", "1101", "0011"]);
        assert_eq!(brute_kernel_size(&dep), 4);
        assert_eq!(dep.rank(), 2);
    }

    #[test]
    fn rank_does_not_mutate() {
        let m = complete_triples();
        let before = m.clone();
        let _ = m.rank();
        assert_eq!(m, before);
    }

    #[test]
    fn kernel_examples() {
        assert!(Gf2Matrix::identity(5).kernel_basis().is_empty());
        assert!(complete_triples().kernel_basis().is_empty());

        let dep = Gf2Matrix::from_rows_str(4, &["1110", "1101", "0011"]);
        let basis = dep.kernel_basis();
        assert_eq!(basis.len(), 2);
        for b in &basis {
            assert!(!b.is_zero());
            assert!(dep.mul_vec(b).unwrap().is_zero());
        }
        // The two vectors span all four kernel elements.
        let mut sum = basis[0].clone();
        sum.xor_assign(&basis[1]);
        assert!(!sum.is_zero());
    }

    #[test]
    fn kernel_is_canonical() {
        let dep = Gf2Matrix::from_rows_str(4, &["1110", "1101", "0011"]);
        let mut permuted = Gf2Matrix::from_rows_str(4, &["0011", "1101", "1110"]);
        assert_eq!(dep.kernel_basis(), permuted.kernel_basis());
        permuted.add_row(0, 1);
        assert_eq!(dep.kernel_basis(), permuted.kernel_basis());
    }

    #[test]
    fn solve_examples() {
        let id = Gf2Matrix::identity(3);
        let b = Gf2Vector::from_str_bits("101");
        assert_eq!(id.solve(&b).unwrap(), Some(b.clone()));

        let dep = Gf2Matrix::from_rows_str(4, &["1110", "1101", "0011"]);
        assert_eq!(
            dep.solve(&Gf2Vector::zeros(3)).unwrap(),
            Some(Gf2Vector::zeros(4))
        );

        let full = complete_triples();
        let b = Gf2Vector::from_str_bits("1000");
        let brute: Vec<Gf2Vector> = all_vectors(4)
            .filter(|x| full.mul_vec(x).unwrap() == b)
            .collect();
        assert_eq!(brute.len(), 1);
        assert_eq!(full.solve(&b).unwrap(), Some(brute[0].clone()));
    }

    #[test]
    fn solve_inconsistent() {
        // x1 + x2 = 0 and x1 + x2 = 1.
        let m = Gf2Matrix::from_rows_str(2, &["11", "11"]);
        assert_eq!(m.solve(&Gf2Vector::from_str_bits("01")).unwrap(), None);
    }

    #[test]
    fn solve_sets_free_variables_to_zero() {
        let m = Gf2Matrix::from_rows_str(3, &["110"]);
        let x = m.solve(&Gf2Vector::from_str_bits("1")).unwrap().unwrap();
        assert_eq!(x, Gf2Vector::from_str_bits("100"));
    }

    #[test]
    fn solve_dimension_mismatch() {
        let m = Gf2Matrix::identity(3);
        let err = m.solve(&Gf2Vector::zeros(2)).unwrap_err();
        assert_eq!(
            err,
            Gf2Error::DimensionMismatch {
                expected: 3,
                actual: 2
            }
        );
        assert!(m.mul_vec(&Gf2Vector::zeros(4)).is_err());
    }

    #[test]
    fn wide_matrices_cross_word_boundaries() {
        let n = 130;
        let m = Gf2Matrix::from_supports(n, (0..n - 1).map(|i| [i, i + 1]));
        assert_eq!(m.rank(), n - 1);
        let k = m.kernel_basis();
        assert_eq!(k.len(), 1);
        assert_eq!(k[0].count_ones(), n);
    }

    fn arb_matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = Gf2Matrix> {
        (0..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
            proptest::collection::vec(proptest::collection::vec(any::<bool>(), c), r).prop_map(
                move |rows| {
                    let mut m = Gf2Matrix::zeros(rows.len(), c);
                    for (i, row) in rows.iter().enumerate() {
                        for (j, &b) in row.iter().enumerate() {
                            m.set(i, j, b);
                        }
                    }
                    m
                },
            )
        })
    }

    proptest! {
        #[test]
        fn rank_nullity(m in arb_matrix(12, 12)) {
            let basis = m.kernel_basis();
            prop_assert_eq!(m.rank() + basis.len(), m.cols());
            for v in &basis {
                prop_assert!(m.mul_vec(v).unwrap().is_zero());
            }
            prop_assert_eq!(brute_kernel_size(&m), 1usize << basis.len());
        }

        #[test]
        fn solve_matches_brute_force(m in arb_matrix(10, 10), seed in any::<u64>()) {
            let b_bits: Vec<bool> = (0..m.rows()).map(|i| seed >> (i % 64) & 1 == 1).collect();
            let b = Gf2Vector::from_bits(&b_bits);
            let brute_any = all_vectors(m.cols()).any(|x| m.mul_vec(&x).unwrap() == b);
            match m.solve(&b).unwrap() {
                Some(x) => {
                    prop_assert!(brute_any);
                    prop_assert_eq!(m.mul_vec(&x).unwrap(), b);
                }
                None => prop_assert!(!brute_any),
            }
        }

        #[test]
        fn rank_invariant_under_row_operations(m in arb_matrix(10, 10), a in 0usize..10, b in 0usize..10) {
            prop_assume!(m.rows() >= 2);
            let (a, b) = (a % m.rows(), b % m.rows());
            let mut p = m.clone();
            p.swap_rows(a, b);
            prop_assert_eq!(p.rank(), m.rank());
            if a != b {
                p.add_row(a, b);
                prop_assert_eq!(p.rank(), m.rank());
            }
        }
    }
}
