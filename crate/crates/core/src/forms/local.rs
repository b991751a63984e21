//! Local data at a prime: factorisation type mod p, p-maximality, and
//! congruence conditions with their exact densities.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use super::BinaryCubicForm;
use crate::error::{Error, Result};

/// Factorisation shape of a binary cubic over `F_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SplittingType {
    /// Three distinct linear factors.
    S111,
    /// Linear times irreducible quadratic.
    S12,
    /// Irreducible cubic.
    S3,
    /// Square of a linear factor times another linear factor.
    S1s1,
    /// Cube of a linear factor.
    S1c,
    /// Identically zero mod p.
    Zero,
}

impl SplittingType {
    pub fn label(&self) -> &'static str {
        match self {
            Self::S111 => "111",
            Self::S12 => "12",
            Self::S3 => "3",
            Self::S1s1 => "1^21",
            Self::S1c => "1^3",
            Self::Zero => "zero",
        }
    }
}

impl fmt::Display for SplittingType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SplittingType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "111" => Self::S111,
            "12" => Self::S12,
            "3" => Self::S3,
            "1^21" | "1²1" | "1^2.1" => Self::S1s1,
            "1^3" | "1³" => Self::S1c,
            "zero" => Self::Zero,
            _ => return Err(Error::Parse(format!("unknown splitting type {s:?}"))),
        })
    }
}

fn md(x: i64, p: u64) -> u64 {
    x.rem_euclid(p as i64) as u64
}

/// Roots (with multiplicity) of a univariate polynomial over F_p given by
/// coefficients from the top degree down; the leading coefficient is nonzero.
fn roots_with_multiplicity(mut poly: Vec<u64>, p: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut x = 0u64;
    while x < p && poly.len() > 1 {
        // synthetic division by (t - x)
        let mut quot = Vec::with_capacity(poly.len() - 1);
        let mut acc = 0u64;
        for &c in &poly {
            acc = (acc * x + c) % p;
            quot.push(acc);
        }
        let rem = quot.pop().unwrap();
        if rem == 0 {
            poly = quot;
            match out.last_mut() {
                Some((r, m)) if *r == x => *m += 1,
                _ => out.push((x, 1)),
            }
        } else {
            x += 1;
        }
    }
    out
}

/// Projective roots of `f` mod `p` with multiplicities; `None` is the root
/// at infinity `(1:0)`, `Some(r)` the root `(r:1)`. Empty when `f = 0 mod p`.
pub(crate) fn projective_roots_mod_p(f: &BinaryCubicForm, p: u64) -> Vec<(Option<u64>, u32)> {
    let mut c: Vec<u64> = f.coeffs().iter().map(|&x| md(x, p)).collect();
    if c.iter().all(|&x| x == 0) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut inf = 0u32;
    while c[0] == 0 {
        c.remove(0);
        inf += 1;
    }
    if inf > 0 {
        out.push((None, inf));
    }
    out.extend(roots_with_multiplicity(c, p).into_iter().map(|(r, m)| (Some(r), m)));
    out
}

/// Factorisation type of `f` mod `p` as a binary cubic.
pub fn splitting_type_mod_p(f: &BinaryCubicForm, p: u64) -> SplittingType {
    let mut c: Vec<u64> = f.coeffs().iter().map(|&x| md(x, p)).collect();
    if c.iter().all(|&x| x == 0) {
        return SplittingType::Zero;
    }
    // Root at infinity with multiplicity = number of leading zeros.
    let mut mults: Vec<u32> = Vec::new();
    let mut inf = 0u32;
    while c[0] == 0 {
        c.remove(0);
        inf += 1;
    }
    if inf > 0 {
        mults.push(inf);
    }
    let affine = roots_with_multiplicity(c, p);
    mults.extend(affine.iter().map(|&(_, m)| m));
    let total: u32 = mults.iter().sum();
    mults.sort_unstable();
    match (total, mults.as_slice()) {
        (3, [1, 1, 1]) => SplittingType::S111,
        (3, [1, 2]) => SplittingType::S1s1,
        (3, [3]) => SplittingType::S1c,
        (1, [1]) => SplittingType::S12,
        (0, []) => SplittingType::S3,
        _ => unreachable!("inconsistent root count {mults:?}"),
    }
}

/// Product in `R(f)` with coordinates in the basis (1, omega, theta).
pub(crate) fn mul_table(f: &BinaryCubicForm, x: [i128; 3], y: [i128; 3]) -> [i128; 3] {
    let (a, b, c, d) = (f.a as i128, f.b as i128, f.c as i128, f.d as i128);
    let (n, m, l) = (-a * d, -a * c, -b * d);
    let xy11 = x[1] * y[1];
    let xy22 = x[2] * y[2];
    [
        x[0] * y[0] + xy11 * m + (x[1] * y[2] + x[2] * y[1]) * n + xy22 * l,
        x[0] * y[1] + x[1] * y[0] + xy11 * b + xy22 * d,
        x[0] * y[2] + x[2] * y[0] - xy11 * a - xy22 * c,
    ]
}

/// Nullspace basis of a 3x3 matrix mod p (rows are equations).
fn kernel_mod_p(mut m: [[i128; 3]; 3], p: i128) -> Vec<[i128; 3]> {
    for row in m.iter_mut() {
        for v in row.iter_mut() {
            *v = v.rem_euclid(p);
        }
    }
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..3 {
        let Some(piv) = (row..3).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(row, piv);
        let inv = crate::arith::mod_inv(m[row][col], p).expect("p prime");
        for v in m[row].iter_mut() {
            *v = (*v * inv) % p;
        }
        for r in 0..3 {
            if r != row && m[r][col] != 0 {
                let factor = m[r][col];
                for k in 0..3 {
                    m[r][k] = (m[r][k] - factor * m[row][k]).rem_euclid(p);
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let free: Vec<usize> = (0..3).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = [0i128; 3];
            v[fc] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = (-m[r][fc]).rem_euclid(p);
            }
            v
        })
        .collect()
}

/// Whether `y` lies in `p R + Z x`, i.e. `y = k x mod p` for some k.
fn in_line(y: [i128; 3], x: [i128; 3], p: i128) -> Option<i128> {
    let y = y.map(|v| v.rem_euclid(p));
    let i = (0..3).find(|&i| x[i].rem_euclid(p) != 0)?;
    let inv = crate::arith::mod_inv(x[i], p)?;
    let k = (y[i] * inv).rem_euclid(p);
    (0..3)
        .all(|j| (y[j] - k * x[j]).rem_euclid(p) == 0)
        .then_some(k)
}

/// Whether `L = R + Z (x / p)` is closed under multiplication.
fn overring_is_closed(f: &BinaryCubicForm, x: [i128; 3], p: i128) -> bool {
    const OMEGA: [i128; 3] = [0, 1, 0];
    const THETA: [i128; 3] = [0, 0, 1];
    if in_line(mul_table(f, OMEGA, x), x, p).is_none()
        || in_line(mul_table(f, THETA, x), x, p).is_none()
    {
        return false;
    }
    let sq = mul_table(f, x, x);
    if sq.iter().any(|v| v.rem_euclid(p) != 0) {
        return false;
    }
    in_line(sq.map(|v| v / p), x, p).is_some()
}

/// Whether `R(f)` has an overring of p-power index. Forms divisible by p
/// are never maximal (their smallest overrings can have index p^2); for
/// primitive forms an index-p overring exists whenever one of p-power index
/// does, and is searched for directly. Works for degenerate forms too.
fn has_index_p_overring(f: &BinaryCubicForm, p: u64) -> bool {
    if f.coeffs().iter().all(|&c| md(c, p) == 0) {
        return true;
    }
    let p = p as i128;
    let (a, b, c, d) = (f.a as i128, f.b as i128, f.c as i128, f.d as i128);
    let (n, m) = (-a * d, -a * c);
    // Columns are omega*1, omega*omega, omega*theta; rows coordinates.
    let mult_omega = [[0, m, n], [1, b, 0], [0, -a, 0]];
    let mut seen: BTreeSet<[i128; 3]> = BTreeSet::new();
    for lambda in 0..p {
        let mut shifted = mult_omega;
        for (i, row) in shifted.iter_mut().enumerate() {
            row[i] -= lambda;
        }
        let basis = kernel_mod_p(shifted, p);
        let lines: Vec<[i128; 3]> = match basis.len() {
            0 => continue,
            1 => vec![basis[0]],
            _ => lines_in_span(&basis, p),
        };
        for x in lines {
            let x = normalize_line(x, p);
            if seen.insert(x) && overring_is_closed(f, x, p) {
                return true;
            }
        }
    }
    false
}

fn normalize_line(x: [i128; 3], p: i128) -> [i128; 3] {
    let i = (0..3).find(|&i| x[i].rem_euclid(p) != 0).expect("nonzero vector");
    let inv = crate::arith::mod_inv(x[i], p).unwrap();
    x.map(|v| (v * inv).rem_euclid(p))
}

fn lines_in_span(basis: &[[i128; 3]], p: i128) -> Vec<[i128; 3]> {
    let combine = |coefs: &[i128]| -> [i128; 3] {
        let mut v = [0i128; 3];
        for (c, b) in coefs.iter().zip(basis) {
            for k in 0..3 {
                v[k] = (v[k] + c * b[k]).rem_euclid(p);
            }
        }
        v
    };
    let mut out = Vec::new();
    match basis.len() {
        2 => {
            out.push(combine(&[0, 1]));
            for t in 0..p {
                out.push(combine(&[1, t]));
            }
        }
        3 => {
            out.push(combine(&[0, 0, 1]));
            for t in 0..p {
                out.push(combine(&[0, 1, t]));
            }
            for s in 0..p {
                for t in 0..p {
                    out.push(combine(&[1, s, t]));
                }
            }
        }
        _ => unreachable!(),
    }
    out
}

/// Whether `R(f)` admits no index-p overring.
pub fn is_p_maximal(f: &BinaryCubicForm, p: u64) -> Result<bool> {
    let disc = f.disc();
    if disc == 0 {
        return Err(Error::DegenerateForm);
    }
    let pp = (p as i128) * (p as i128);
    if disc % pp != 0 {
        return Ok(true);
    }
    Ok(!has_index_p_overring(f, p))
}

/// Maximal at every prime.
pub fn is_maximal(f: &BinaryCubicForm) -> Result<bool> {
    let disc = f.disc();
    if disc == 0 {
        return Err(Error::DegenerateForm);
    }
    for (p, e) in crate::arith::factor(disc) {
        if e >= 2 && has_index_p_overring(f, p) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The predicate of a local condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConditionKind {
    /// (a, b, c, d) mod p^k lies in the given set of residue classes.
    Congruence(BTreeSet<[u64; 4]>),
    /// f mod p has the given factorisation type.
    Splitting(SplittingType),
    /// R(f) is maximal at p.
    Maximal,
}

/// A condition on a form decidable from its coefficients mod `p^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalCondition {
    pub p: u64,
    pub k: u32,
    pub kind: ConditionKind,
}

impl LocalCondition {
    pub fn splitting(p: u64, t: SplittingType) -> Self {
        Self {
            p,
            k: 1,
            kind: ConditionKind::Splitting(t),
        }
    }

    pub fn maximal(p: u64) -> Self {
        Self {
            p,
            k: 2,
            kind: ConditionKind::Maximal,
        }
    }

    pub fn congruence(p: u64, k: u32, classes: impl IntoIterator<Item = [u64; 4]>) -> Self {
        Self {
            p,
            k,
            kind: ConditionKind::Congruence(classes.into_iter().collect()),
        }
    }

    pub fn modulus(&self) -> u64 {
        self.p.pow(self.k)
    }

    /// Evaluate the predicate. Degenerate forms are never maximal.
    pub fn holds(&self, f: &BinaryCubicForm) -> bool {
        match &self.kind {
            ConditionKind::Congruence(set) => {
                let q = self.modulus();
                set.contains(&f.coeffs().map(|x| md(x, q)))
            }
            ConditionKind::Splitting(t) => splitting_type_mod_p(f, self.p) == *t,
            ConditionKind::Maximal => {
                if f.disc() == 0 {
                    // Only reached when counting residues; maximality mod p^2
                    // is a property of the overring search alone.
                    !has_index_p_overring(f, self.p)
                } else {
                    is_p_maximal(f, self.p).unwrap_or(false)
                }
            }
        }
    }
}

impl FromStr for LocalCondition {
    type Err = Error;

    /// `p:TYPE` where TYPE is a splitting label or `max`.
    fn from_str(s: &str) -> Result<Self> {
        let (p, t) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected p:TYPE, got {s:?}")))?;
        let p: u64 = p
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad prime {p:?}")))?;
        if !crate::arith::is_prime(p) {
            return Err(Error::Parse(format!("{p} is not prime")));
        }
        match t.trim() {
            "max" | "maximal" => Ok(Self::maximal(p)),
            other => Ok(Self::splitting(p, other.parse()?)),
        }
    }
}

impl fmt::Display for LocalCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ConditionKind::Maximal => write!(f, "{}:max", self.p),
            ConditionKind::Splitting(t) => write!(f, "{}:{}", self.p, t),
            ConditionKind::Congruence(set) => {
                write!(f, "{}^{}:{} classes", self.p, self.k, set.len())
            }
        }
    }
}

/// Default cap on the number of residue quadruples `local_density` visits.
pub const DEFAULT_DENSITY_BUDGET: u128 = 1 << 24;

/// Exact proportion of `(a, b, c, d) mod p^k` satisfying the condition.
pub fn local_density(cond: &LocalCondition, budget: u128) -> Result<Ratio<u64>> {
    let q = cond.modulus();
    let total = (q as u128).pow(4);
    if total > budget {
        return Err(Error::ModulusTooLarge(total));
    }
    let q = q as i64;
    let mut hits = 0u64;
    for a in 0..q {
        for b in 0..q {
            for c in 0..q {
                for d in 0..q {
                    if cond.holds(&BinaryCubicForm::new(a, b, c, d)) {
                        hits += 1;
                    }
                }
            }
        }
    }
    Ok(Ratio::new(hits, total as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    const F49: BinaryCubicForm = BinaryCubicForm::new(1, 1, -2, -1);

    #[test]
    fn splitting_examples() {
        assert_eq!(splitting_type_mod_p(&F49, 2), SplittingType::S3);
        assert_eq!(splitting_type_mod_p(&F49, 7), SplittingType::S1c);
        assert_eq!(splitting_type_mod_p(&F49, 13), SplittingType::S111);
        assert_eq!(
            splitting_type_mod_p(&BinaryCubicForm::new(2, 4, 6, 8), 2),
            SplittingType::Zero
        );
        // x^2 y: root 0 doubled, root at infinity once
        assert_eq!(
            splitting_type_mod_p(&BinaryCubicForm::new(0, 1, 0, 0), 5),
            SplittingType::S1s1
        );
        // y (x^2 + y^2) mod 3
        assert_eq!(
            splitting_type_mod_p(&BinaryCubicForm::new(0, 1, 0, 1), 3),
            SplittingType::S12
        );
    }

    #[test]
    fn maximality_examples() {
        assert!(is_p_maximal(&F49, 2).unwrap());
        assert!(is_p_maximal(&BinaryCubicForm::new(1, 0, 0, 2), 2).unwrap());
        assert!(!is_p_maximal(&BinaryCubicForm::new(1, 0, 0, 8), 2).unwrap());
        assert!(is_p_maximal(&BinaryCubicForm::new(1, 0, 0, 2), 3).unwrap());
        // imprimitive at p
        assert!(!is_p_maximal(&BinaryCubicForm::new(3, 3, 6, 3), 3).unwrap());
        assert_eq!(
            is_p_maximal(&BinaryCubicForm::new(1, 0, 0, 0), 2),
            Err(Error::DegenerateForm)
        );
    }

    #[test]
    fn density_examples() {
        let cong = LocalCondition::congruence(
            2,
            1,
            (0..2).flat_map(|b| (0..2).flat_map(move |c| (0..2).map(move |d| [0, b, c, d]))),
        );
        assert_eq!(local_density(&cong, DEFAULT_DENSITY_BUDGET).unwrap(), Ratio::new(1, 2));
        // only xy(x + y) itself mod 2
        let split = LocalCondition::splitting(2, SplittingType::S111);
        assert_eq!(local_density(&split, DEFAULT_DENSITY_BUDGET).unwrap(), Ratio::new(1, 16));
        let big = LocalCondition::maximal(101);
        assert!(matches!(local_density(&big, 1000), Err(Error::ModulusTooLarge(_))));
    }

    #[test]
    fn parse_conditions() {
        assert_eq!("5:111".parse::<LocalCondition>().unwrap(), LocalCondition::splitting(5, SplittingType::S111));
        assert_eq!("2:max".parse::<LocalCondition>().unwrap(), LocalCondition::maximal(2));
        assert!("4:3".parse::<LocalCondition>().is_err());
    }
}
