//! Integer linear algebra for relation lattices: an incremental echelon
//! form with overflow detection and Smith normal form modulo the
//! determinant.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::arith::{factor, gcd, xgcd};

/// Integers the echelon form can run on: machine integers with overflow
/// detection, or big integers.
pub(crate) trait EchelonInt: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn neg(&self) -> Self;
    fn add(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    /// Floor division and remainder in `[0, m)` for `m > 0`.
    fn div_floor(&self, m: &Self) -> Self;
    fn rem_floor(&self, m: &Self) -> Self;
    /// Exact quotient.
    fn div_exact(&self, m: &Self) -> Self;
    fn divides(&self, x: &Self) -> bool;
    fn xgcd(&self, o: &Self) -> (Self, Self, Self);
}

impl EchelonInt for i128 {
    fn zero() -> Self {
        0
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_negative(&self) -> bool {
        *self < 0
    }
    fn neg(&self) -> Self {
        -*self
    }
    fn add(&self, o: &Self) -> Option<Self> {
        self.checked_add(*o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(*o)
    }
    fn div_floor(&self, m: &Self) -> Self {
        self.div_euclid(*m)
    }
    fn rem_floor(&self, m: &Self) -> Self {
        self.rem_euclid(*m)
    }
    fn div_exact(&self, m: &Self) -> Self {
        self / m
    }
    fn divides(&self, x: &Self) -> bool {
        x % self == 0
    }
    fn xgcd(&self, o: &Self) -> (Self, Self, Self) {
        xgcd(*self, *o)
    }
}

impl EchelonInt for BigInt {
    fn zero() -> Self {
        <BigInt as Zero>::zero()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn div_floor(&self, m: &Self) -> Self {
        Integer::div_floor(self, m)
    }
    fn rem_floor(&self, m: &Self) -> Self {
        Integer::mod_floor(self, m)
    }
    fn div_exact(&self, m: &Self) -> Self {
        self / m
    }
    fn divides(&self, x: &Self) -> bool {
        Zero::is_zero(&(x % self))
    }
    fn xgcd(&self, o: &Self) -> (Self, Self, Self) {
        let e = self.extended_gcd(o);
        (e.gcd, e.x, e.y)
    }
}

fn axpy<T: EchelonInt>(y: &mut [T], a: &T, x: &[T]) -> Option<()> {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = yi.add(&a.mul(xi)?)?;
    }
    Some(())
}

fn comb<T: EchelonInt>(a: &T, x: &[T], b: &T, y: &[T]) -> Option<Vec<T>> {
    x.iter().zip(y).map(|(xi, yi)| a.mul(xi)?.add(&b.mul(yi)?)).collect()
}

/// Row echelon basis of a sublattice of `Z^k`, one pivot row per column.
#[derive(Debug, Clone)]
pub(crate) struct EchelonOver<T> {
    k: usize,
    rows: Vec<Option<Vec<T>>>,
}

impl<T: EchelonInt> EchelonOver<T> {
    pub fn new(k: usize) -> Self {
        Self { k, rows: vec![None; k] }
    }

    pub fn rank(&self) -> usize {
        self.rows.iter().filter(|r| r.is_some()).count()
    }

    /// Product of the pivots, i.e. the index of the lattice, when full rank.
    pub fn det(&self) -> Option<T> {
        let mut d: Option<T> = None;
        for (i, r) in self.rows.iter().enumerate() {
            let x = &r.as_ref()?[i];
            d = Some(match d {
                None => x.clone(),
                Some(d) => d.mul(x)?,
            });
        }
        Some(d.unwrap_or_else(|| T::zero()))
    }

    /// Add a vector to the lattice. Returns false (leaving the basis
    /// untouched) if an intermediate value overflows.
    pub fn insert(&mut self, v: &[T]) -> bool {
        debug_assert_eq!(v.len(), self.k);
        let mut rows = self.rows.clone();
        let mut v = v.to_vec();
        if let Some(d) = self.det().filter(|d| !d.is_zero()) {
            for x in v.iter_mut() {
                *x = x.rem_floor(&d);
            }
        }
        let mut i = 0;
        while i < self.k {
            if v[i].is_zero() {
                i += 1;
                continue;
            }
            match rows[i].take() {
                None => {
                    if v[i].is_negative() {
                        v.iter_mut().for_each(|x| *x = x.neg());
                    }
                    rows[i] = Some(v);
                    self.rows = rows;
                    return true;
                }
                Some(r) => {
                    if r[i].divides(&v[i]) {
                        let q = v[i].div_exact(&r[i]).neg();
                        if axpy(&mut v, &q, &r).is_none() {
                            return false;
                        }
                        rows[i] = Some(r);
                    } else {
                        let (g, x, y) = r[i].xgcd(&v[i]);
                        let a = v[i].div_exact(&g);
                        let b = r[i].div_exact(&g).neg();
                        let (Some(piv), Some(rest)) = (comb(&x, &r, &y, &v), comb(&a, &r, &b, &v)) else {
                            return false;
                        };
                        rows[i] = Some(piv);
                        v = rest;
                    }
                    i += 1;
                }
            }
        }
        self.rows = rows;
        true
    }

    /// Reduce entries above each pivot into `[0, pivot)`; with full rank also
    /// reduce everything modulo the determinant.
    pub fn normalize(&mut self) {
        for j in (0..self.k).rev() {
            let Some(pj) = self.rows[j].clone() else { continue };
            for i in 0..j {
                if let Some(ri) = self.rows[i].as_mut() {
                    let q = ri[j].div_floor(&pj[j]);
                    if !q.is_zero() {
                        let mut tmp = ri.clone();
                        if axpy(&mut tmp, &q.neg(), &pj).is_some() {
                            *ri = tmp;
                        }
                    }
                }
            }
        }
        if let Some(d) = self.det() {
            for (i, r) in self.rows.iter_mut().enumerate() {
                let r = r.as_mut().unwrap();
                for x in r.iter_mut().skip(i + 1) {
                    *x = x.rem_floor(&d);
                }
            }
        }
    }

    /// The basis as a dense square matrix (zero rows where a pivot is missing).
    pub fn matrix(&self) -> Vec<Vec<T>> {
        self.rows.iter().map(|r| r.clone().unwrap_or_else(|| vec![T::zero(); self.k])).collect()
    }
}

/// Echelon form on machine integers that moves to big integers when an
/// insertion would overflow, and back once the determinant is small.
#[derive(Debug, Clone)]
pub(crate) enum Echelon {
    Small(EchelonOver<i128>),
    Big(EchelonOver<BigInt>),
}

impl Echelon {
    pub fn new(k: usize) -> Self {
        Echelon::Small(EchelonOver::new(k))
    }

    pub fn is_full_rank(&self) -> bool {
        match self {
            Echelon::Small(e) => e.rank() == e.k,
            Echelon::Big(e) => e.rank() == e.k,
        }
    }

    /// Index of the lattice when full rank and small enough for `i128`.
    pub fn det(&self) -> Option<i128> {
        match self {
            Echelon::Small(e) => e.det(),
            Echelon::Big(e) => e.det().and_then(|d| i128::try_from(d).ok()),
        }
    }

    pub fn insert(&mut self, v: &[i128]) {
        if let Echelon::Small(e) = self {
            if e.insert(v) {
                return;
            }
            let big = EchelonOver {
                k: e.k,
                rows: e.rows.iter().map(|r| r.as_ref().map(|r| r.iter().map(|&x| BigInt::from(x)).collect())).collect(),
            };
            *self = Echelon::Big(big);
        }
        if let Echelon::Big(e) = self {
            let v: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
            e.insert(&v);
        }
    }

    pub fn normalize(&mut self) {
        match self {
            Echelon::Small(e) => e.normalize(),
            Echelon::Big(e) => {
                e.normalize();
                let limit = BigInt::from(1u64 << 62);
                if e.det().is_some_and(|d| d < limit) {
                    let rows = e
                        .rows
                        .iter()
                        .map(|r| r.as_ref().map(|r| r.iter().map(|x| i128::try_from(x).unwrap()).collect()))
                        .collect();
                    *self = Echelon::Small(EchelonOver { k: e.k, rows });
                }
            }
        }
    }

    /// Dense basis; only meaningful once [`Echelon::det`] is available.
    pub fn matrix(&self) -> Vec<Vec<i128>> {
        match self {
            Echelon::Small(e) => e.matrix(),
            Echelon::Big(e) => e
                .matrix()
                .iter()
                .map(|r| r.iter().map(|x| i128::try_from(x).unwrap_or(0)).collect())
                .collect(),
        }
    }
}

/// Invariant factors `d1 | d2 | ...` (ones dropped) of the abelian group
/// with the given cyclic decomposition.
pub(crate) fn invariant_chain(orders: &[i128]) -> Vec<u64> {
    use std::collections::BTreeMap;
    let mut by_prime: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
    for &o in orders {
        if o > 1 {
            for (p, e) in factor(o) {
                by_prime.entry(p).or_default().push(e);
            }
        }
    }
    let len = by_prime.values().map(|v| v.len()).max().unwrap_or(0);
    let mut out = vec![1u64; len];
    for (p, mut es) in by_prime {
        es.sort_unstable_by(|a, b| b.cmp(a));
        for (slot, e) in es.into_iter().enumerate() {
            out[len - 1 - slot] *= p.pow(e);
        }
    }
    out
}

/// Smith normal form of a full-rank square lattice basis with index `d`.
/// Returns the cyclic orders and, for each, the generator as an exponent
/// vector over the original coordinates (rows of the inverse column
/// transform, reduced modulo `d`).
pub(crate) fn smith_mod(mat: &[Vec<i128>], d: i128) -> (Vec<i128>, Vec<Vec<i128>>) {
    let k = mat.len();
    let mut a: Vec<Vec<i128>> = mat.to_vec();
    // w = V^{-1}, updated by the inverse of every column operation.
    let mut w: Vec<Vec<i128>> = (0..k).map(|i| (0..k).map(|j| (i == j) as i128).collect()).collect();
    // centred residues, so that units mod d look small
    let m = |x: i128| {
        let r = x.rem_euclid(d);
        if 2 * r > d { r - d } else { r }
    };
    for row in a.iter_mut() {
        for x in row.iter_mut() {
            *x = m(*x);
        }
    }
    let mut dd = d;
    let mut orders = Vec::with_capacity(k);
    for t in 0..k {
        loop {
            // Move the smallest nonzero entry of the submatrix to (t, t).
            let mut best: Option<(usize, usize)> = None;
            for i in t..k {
                for j in t..k {
                    let v = a[i][j];
                    if v != 0 && best.is_none_or(|(bi, bj)| v.abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else {
                a[t][t] = 0;
                break;
            };
            a.swap(t, bi);
            if bj != t {
                for row in a.iter_mut() {
                    row.swap(t, bj);
                }
                w.swap(t, bj);
            }
            let p = a[t][t];
            let mut clean = true;
            for i in t + 1..k {
                let q = a[i][t] / p;
                if q != 0 {
                    for j in t..k {
                        a[i][j] = m(a[i][j] - q * a[t][j]);
                    }
                }
                clean &= a[i][t] == 0;
            }
            for j in t + 1..k {
                let q = a[t][j] / p;
                if q != 0 {
                    for i in t..k {
                        a[i][j] = m(a[i][j] - q * a[i][t]);
                    }
                    // column j -= q col t  =>  row t of w += q row j
                    let wj = w[j].clone();
                    for (x, y) in w[t].iter_mut().zip(wj) {
                        *x = m(*x + q * y);
                    }
                }
                clean &= a[t][j] == 0;
            }
            if !clean {
                continue;
            }
            // Divisibility condition on the remaining block.
            let bad = (t + 1..k).find(|&i| (t + 1..k).any(|j| a[i][j] % p != 0));
            match bad {
                Some(i) => {
                    for j in t..k {
                        a[t][j] = m(a[t][j] + a[i][j]);
                    }
                }
                None => break,
            }
        }
        let g = gcd(a[t][t], dd);
        let g = if g == 0 { dd } else { g };
        orders.push(g);
        dd /= g;
        if dd == 0 {
            dd = 1;
        }
    }
    (orders, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echelon_index() {
        let mut e = Echelon::new(2);
        e.insert(&[2, 1]);
        assert!(!e.is_full_rank());
        e.insert(&[0, 3]);
        assert_eq!(e.det(), Some(6));
        e.insert(&[3, 0]);
        assert_eq!(e.det(), Some(3));
        e.normalize();
        let (orders, _) = smith_mod(&e.matrix(), 3);
        assert_eq!(invariant_chain(&orders), vec![3]);
    }

    #[test]
    fn overflow_moves_to_big_integers() {
        let big = 1i128 << 100;
        let mut e = Echelon::new(3);
        e.insert(&[3, big + 1, 0]);
        e.insert(&[2, 1, big - 1]);
        e.insert(&[5, big, 7]);
        assert!(matches!(e, Echelon::Big(_)));
        e.insert(&[1, 0, 0]);
        e.insert(&[0, 1, 0]);
        e.insert(&[0, 0, 1]);
        e.normalize();
        assert!(matches!(e, Echelon::Small(_)));
        assert_eq!(e.det(), Some(1));
    }

    #[test]
    fn smith_examples() {
        let m = vec![vec![2, 0], vec![0, 6]];
        let (orders, _) = smith_mod(&m, 12);
        assert_eq!(invariant_chain(&orders), vec![2, 6]);
        let m = vec![vec![2, 1], vec![0, 3]];
        let (orders, _) = smith_mod(&m, 6);
        assert_eq!(invariant_chain(&orders), vec![6]);
        assert_eq!(invariant_chain(&[4, 6, 1]), vec![2, 12]);
    }
}
