//! Exact linear algebra over GF(2) and the rationals.
//!
//! Matrices are integer-valued and column-sparse; the field only matters when
//! a rank or kernel is requested. Reduction is the left-to-right column
//! elimination familiar from persistence computations: each column is reduced
//! against earlier pivots keyed by their lowest nonzero row.

use std::collections::HashMap;
use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Field {
    #[default]
    #[serde(rename = "f2")]
    Gf2,
    #[serde(rename = "q")]
    Rational,
}

impl std::str::FromStr for Field {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f2" | "gf2" | "2" => Ok(Field::Gf2),
            "q" | "rational" | "rationals" => Ok(Field::Rational),
            other => Err(Error::invalid(format!("unknown field {other:?}"))),
        }
    }
}

pub trait Scalar: Clone + PartialEq + Debug {
    fn zero() -> Self;
    fn from_i64(v: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
}

/// An element of GF(2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Gf2(pub bool);

impl Scalar for Gf2 {
    fn zero() -> Self {
        Gf2(false)
    }
    fn from_i64(v: i64) -> Self {
        Gf2(v.rem_euclid(2) == 1)
    }
    fn is_zero(&self) -> bool {
        !self.0
    }
    fn add(&self, other: &Self) -> Self {
        Gf2(self.0 ^ other.0)
    }
    fn mul(&self, other: &Self) -> Self {
        Gf2(self.0 & other.0)
    }
    fn div(&self, other: &Self) -> Self {
        assert!(other.0, "division by zero in GF(2)");
        *self
    }
    fn neg(&self) -> Self {
        *self
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
}

/// Sorted `(index, value)` pairs with no stored zeros.
pub type SparseVec<T> = Vec<(usize, T)>;

/// `a + factor * b`.
fn axpy<T: Scalar>(a: &SparseVec<T>, factor: &T, b: &SparseVec<T>) -> SparseVec<T> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i >= a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i].clone());
            i += 1;
        } else if take_b {
            out.push((b[j].0, factor.mul(&b[j].1)));
            j += 1;
        } else {
            let v = a[i].1.add(&factor.mul(&b[j].1));
            if !v.is_zero() {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Result of reducing a list of columns.
#[derive(Debug, Clone)]
pub struct Reduction<T> {
    pub rank: usize,
    /// A basis of the kernel, expressed in the original column coordinates.
    pub kernel: Vec<SparseVec<T>>,
}

/// Column reduction. Kernel tracking costs a second sparse vector per column
/// and is skipped when only the rank is needed.
pub fn reduce<T: Scalar>(columns: Vec<SparseVec<T>>, track_kernel: bool) -> Reduction<T> {
    let n = columns.len();
    let mut pivot_of: HashMap<usize, usize> = HashMap::new();
    let mut reduced: Vec<SparseVec<T>> = vec![Vec::new(); n];
    let mut transform: Vec<SparseVec<T>> = vec![Vec::new(); if track_kernel { n } else { 0 }];
    let mut kernel = Vec::new();
    let mut rank = 0;
    for (j, col) in columns.into_iter().enumerate() {
        let mut v = col;
        let mut w: SparseVec<T> = if track_kernel {
            vec![(j, T::from_i64(1))]
        } else {
            Vec::new()
        };
        loop {
            let Some((low, lv)) = v.last().cloned() else {
                if track_kernel {
                    kernel.push(w);
                }
                break;
            };
            match pivot_of.get(&low) {
                Some(&k) => {
                    let pivot_val = &reduced[k].last().unwrap().1;
                    let factor = lv.div(pivot_val).neg();
                    v = axpy(&v, &factor, &reduced[k]);
                    if track_kernel {
                        w = axpy(&w, &factor, &transform[k]);
                    }
                }
                None => {
                    pivot_of.insert(low, j);
                    reduced[j] = v;
                    if track_kernel {
                        transform[j] = w;
                    }
                    rank += 1;
                    break;
                }
            }
        }
    }
    Reduction { rank, kernel }
}

/// An integer matrix stored by sparse columns, interpreted over a chosen field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    columns: Vec<SparseVec<i64>>,
}

impl ExactMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExactMatrix {
            rows,
            cols,
            columns: vec![Vec::new(); cols],
        }
    }

    /// Builds from sparse columns; entries are sorted and zeros dropped.
    pub fn from_columns(rows: usize, columns: Vec<Vec<(usize, i64)>>) -> Self {
        let cols = columns.len();
        let columns = columns
            .into_iter()
            .map(|mut c| {
                c.sort_by_key(|e| e.0);
                let mut merged: SparseVec<i64> = Vec::with_capacity(c.len());
                for (r, v) in c {
                    assert!(r < rows, "row {r} out of range {rows}");
                    match merged.last_mut() {
                        Some(last) if last.0 == r => last.1 += v,
                        _ => merged.push((r, v)),
                    }
                }
                merged.retain(|e| e.1 != 0);
                merged
            })
            .collect();
        ExactMatrix {
            rows,
            cols,
            columns,
        }
    }

    /// Row-major dense input.
    pub fn from_dense(data: &[Vec<i64>]) -> Self {
        let rows = data.len();
        let cols = data.first().map_or(0, |r| r.len());
        let columns = (0..cols)
            .map(|c| {
                (0..rows)
                    .filter(|&r| data[r][c] != 0)
                    .map(|r| (r, data[r][c]))
                    .collect()
            })
            .collect();
        ExactMatrix {
            rows,
            cols,
            columns,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, c: usize) -> &[(usize, i64)] {
        &self.columns[c]
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.columns[c]
            .binary_search_by_key(&r, |e| e.0)
            .map(|i| self.columns[c][i].1)
            .unwrap_or(0)
    }

    pub fn to_dense(&self) -> Vec<Vec<i64>> {
        let mut out = vec![vec![0; self.cols]; self.rows];
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, v) in col {
                out[r][c] = v;
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut cols: Vec<Vec<(usize, i64)>> = vec![Vec::new(); self.rows];
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, v) in col {
                cols[r].push((c, v));
            }
        }
        ExactMatrix::from_columns(self.cols, cols)
    }

    /// Integer product `self * other`.
    pub fn mul(&self, other: &ExactMatrix) -> Result<ExactMatrix> {
        if self.cols != other.rows {
            return Err(Error::invalid(format!(
                "shape mismatch: {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let columns = other
            .columns
            .iter()
            .map(|ocol| {
                let mut acc: HashMap<usize, i64> = HashMap::new();
                for &(k, b) in ocol {
                    for &(r, a) in &self.columns[k] {
                        *acc.entry(r).or_insert(0) += a * b;
                    }
                }
                acc.into_iter().collect()
            })
            .collect();
        Ok(ExactMatrix::from_columns(self.rows, columns))
    }

    /// `true` when every entry vanishes in `field`.
    pub fn is_zero_in(&self, field: Field) -> bool {
        self.columns.iter().flatten().all(|&(_, v)| match field {
            Field::Gf2 => v % 2 == 0,
            Field::Rational => v == 0,
        })
    }

    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> ExactMatrix {
        let columns = col_perm
            .iter()
            .map(|&c| self.columns[c].iter().map(|&(r, v)| (row_perm[r], v)).collect())
            .collect();
        ExactMatrix::from_columns(self.rows, columns)
    }

    fn columns_in<T: Scalar>(&self) -> Vec<SparseVec<T>> {
        self.columns
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&(r, v)| (r, T::from_i64(v)))
                    .filter(|(_, v)| !v.is_zero())
                    .collect()
            })
            .collect()
    }

    pub fn rank(&self, field: Field) -> usize {
        match field {
            Field::Gf2 => reduce(self.columns_in::<Gf2>(), false).rank,
            Field::Rational => reduce(self.columns_in::<BigRational>(), false).rank,
        }
    }

    /// A kernel basis as the columns of an integer matrix. Over the rationals
    /// each basis vector is scaled to primitive integer form.
    pub fn kernel(&self, field: Field) -> Result<ExactMatrix> {
        let columns = match field {
            Field::Gf2 => reduce(self.columns_in::<Gf2>(), true)
                .kernel
                .into_iter()
                .map(|v| v.into_iter().map(|(i, _)| (i, 1)).collect())
                .collect(),
            Field::Rational => reduce(self.columns_in::<BigRational>(), true)
                .kernel
                .into_iter()
                .map(|v| primitive_integer(&v))
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(ExactMatrix::from_columns(self.cols, columns))
    }
}

/// Clears denominators and common factors; the first nonzero entry is made
/// positive.
fn primitive_integer(v: &SparseVec<BigRational>) -> Result<SparseVec<i64>> {
    let mut lcm = BigInt::one();
    for (_, q) in v {
        lcm = lcm.lcm(q.denom());
    }
    let mut ints: Vec<(usize, BigInt)> = v
        .iter()
        .map(|(i, q)| (*i, (q * BigRational::from_integer(lcm.clone())).to_integer()))
        .collect();
    let mut g = BigInt::zero();
    for (_, x) in &ints {
        g = g.gcd(x);
    }
    if let Some((_, first)) = ints.first() {
        if first.is_negative() {
            g = -g;
        }
    }
    if !g.is_zero() {
        for (_, x) in &mut ints {
            *x = &*x / &g;
        }
    }
    ints.into_iter()
        .map(|(i, x)| {
            x.to_i64()
                .map(|x| (i, x))
                .ok_or_else(|| Error::Internal("kernel entry exceeds i64".into()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rank_small() {
        let m = ExactMatrix::from_dense(&[vec![1, 1, 0], vec![1, 0, 1], vec![0, 1, 1]]);
        assert_eq!(m.rank(Field::Rational), 3);
        // columns sum to zero mod 2
        assert_eq!(m.rank(Field::Gf2), 2);
    }

    #[test]
    fn rank_of_zero_and_empty() {
        assert_eq!(ExactMatrix::zeros(3, 4).rank(Field::Rational), 0);
        assert_eq!(ExactMatrix::zeros(0, 0).rank(Field::Gf2), 0);
    }

    #[test]
    fn kernel_is_primitive_and_annihilated() {
        let m = ExactMatrix::from_dense(&[vec![2, 4, 6], vec![1, 2, 3]]);
        let k = m.kernel(Field::Rational).unwrap();
        assert_eq!(k.cols(), 2);
        assert!(m.mul(&k).unwrap().is_zero_in(Field::Rational));
        assert_eq!(k.rank(Field::Rational), 2);
    }

    #[test]
    fn gf2_kernel() {
        let m = ExactMatrix::from_dense(&[vec![1, 1, 0], vec![0, 1, 1]]);
        let k = m.kernel(Field::Gf2).unwrap();
        assert_eq!(k.to_dense(), vec![vec![1], vec![1], vec![1]]);
    }

    #[test]
    fn product_and_transpose() {
        let a = ExactMatrix::from_dense(&[vec![1, 2], vec![3, 4]]);
        let b = a.transpose();
        assert_eq!(b.to_dense(), vec![vec![1, 3], vec![2, 4]]);
        assert_eq!(a.mul(&b).unwrap().to_dense(), vec![vec![5, 11], vec![11, 25]]);
        assert!(a.mul(&ExactMatrix::zeros(3, 1)).is_err());
    }

    /// Dense fraction-free elimination over the rationals, independent of the
    /// sparse reduction.
    fn dense_rank(data: &[Vec<i64>]) -> usize {
        let mut m: Vec<Vec<BigRational>> = data
            .iter()
            .map(|r| r.iter().map(|&v| BigRational::from_i64(v)).collect())
            .collect();
        let rows = m.len();
        let cols = m.first().map_or(0, |r| r.len());
        let mut rank = 0;
        for c in 0..cols {
            let Some(p) = (rank..rows).find(|&r| !Zero::is_zero(&m[r][c])) else {
                continue;
            };
            m.swap(rank, p);
            for r in 0..rows {
                if r != rank && !Zero::is_zero(&m[r][c]) {
                    let f = &m[r][c] / &m[rank][c];
                    let pivot_row = m[rank].clone();
                    for (x, p) in m[r].iter_mut().zip(&pivot_row) {
                        *x -= &f * p;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    fn matrix_strategy() -> impl Strategy<Value = Vec<Vec<i64>>> {
        (1usize..7, 1usize..7).prop_flat_map(|(r, c)| {
            prop::collection::vec(prop::collection::vec(-2i64..=2, c), r)
        })
    }

    proptest! {
        #[test]
        fn rank_matches_dense_oracle(data in matrix_strategy()) {
            let m = ExactMatrix::from_dense(&data);
            prop_assert_eq!(m.rank(Field::Rational), dense_rank(&data));
        }

        #[test]
        fn rank_is_permutation_invariant(data in matrix_strategy(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let m = ExactMatrix::from_dense(&data);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut rp: Vec<usize> = (0..m.rows()).collect();
            let mut cp: Vec<usize> = (0..m.cols()).collect();
            rp.shuffle(&mut rng);
            cp.shuffle(&mut rng);
            let p = m.permuted(&rp, &cp);
            prop_assert_eq!(m.rank(Field::Rational), p.rank(Field::Rational));
            prop_assert_eq!(m.rank(Field::Gf2), p.rank(Field::Gf2));
        }

        #[test]
        fn rank_nullity(data in matrix_strategy()) {
            let m = ExactMatrix::from_dense(&data);
            for field in [Field::Gf2, Field::Rational] {
                let k = m.kernel(field).unwrap();
                prop_assert_eq!(m.rank(field) + k.cols(), m.cols());
                prop_assert!(m.mul(&k).unwrap().is_zero_in(field));
            }
        }
    }
}
