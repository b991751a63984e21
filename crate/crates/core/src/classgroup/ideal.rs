//! Ideals of a cubic ring as Z-lattices in Hermite normal form, and the
//! prime ideals above a rational prime.

use std::fmt;

use num_rational::Ratio;

use crate::arith::{gcd, mod_inv, xgcd};
use crate::error::{Error, Result};
use crate::forms::{is_p_maximal, projective_roots_mod_p, BinaryCubicForm};
use crate::rings::{ring_from_form, CubicRing, IntElem, RingElement};

/// A fractional ideal `(1/denom) * L`, where `L` is the integral lattice
/// spanned by the columns of an upper-triangular Hermite basis in
/// coordinates over `(1, omega, theta)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IdealHNF {
    form: BinaryCubicForm,
    /// `cols[j]` is the j-th basis vector; `cols[j][i] = 0` for `i > j`.
    cols: [IntElem; 3],
    denom: i128,
}

impl fmt::Debug for IdealHNF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IdealHNF({:?} / {})", self.cols, self.denom)
    }
}

/// Hermite basis of the lattice spanned by `gens` and `d Z^3`.
pub(crate) fn hnf_mod(gens: &[IntElem], d: i128) -> [IntElem; 3] {
    assert!(d > 0);
    let mut vs: Vec<IntElem> = gens.iter().map(|g| g.map(|x| x.rem_euclid(d))).collect();
    let mut cols = [[0i128; 3]; 3];
    for i in (0..3).rev() {
        let mut piv = [0i128; 3];
        piv[i] = d;
        let mut rest = Vec::with_capacity(vs.len());
        for v in vs {
            if v[i] == 0 {
                rest.push(v);
                continue;
            }
            let (g, x, y) = xgcd(piv[i], v[i]);
            let (a, b) = (v[i] / g, piv[i] / g);
            let mut np = [0i128; 3];
            let mut nv = [0i128; 3];
            for j in 0..=i {
                np[j] = (x * piv[j] + y * v[j]).rem_euclid(d);
                nv[j] = (a * piv[j] - b * v[j]).rem_euclid(d);
            }
            np[i] = g;
            nv[i] = 0;
            piv = np;
            rest.push(nv);
        }
        cols[i] = piv;
        vs = rest;
    }
    // Reduce entries above the diagonal.
    for j in 0..3 {
        for i in (0..j).rev() {
            let q = cols[j][i].div_euclid(cols[i][i]);
            if q != 0 {
                for r in 0..=i {
                    cols[j][r] -= q * cols[i][r];
                }
            }
        }
    }
    cols
}

impl IdealHNF {
    /// The ideal generated as an O-module by `gens` (integral elements).
    pub fn from_generators(ring: &CubicRing, gens: &[IntElem]) -> Result<Self> {
        let mut d = 0i128;
        for g in gens {
            if g[1] == 0 && g[2] == 0 {
                d = gcd(d, g[0]);
            } else {
                d = gcd(d, ring.norm_int(*g));
            }
        }
        if d == 0 {
            return Err(Error::DegenerateForm);
        }
        let mut all = Vec::with_capacity(3 * gens.len());
        for &g in gens {
            all.push(g);
            all.push(ring.mul_int(g, [0, 1, 0]));
            all.push(ring.mul_int(g, [0, 0, 1]));
        }
        Ok(Self {
            form: *ring.form(),
            cols: hnf_mod(&all, d.abs()),
            denom: 1,
        })
    }

    pub fn principal(ring: &CubicRing, alpha: IntElem) -> Result<Self> {
        Self::from_generators(ring, &[alpha])
    }

    pub fn unit(ring: &CubicRing) -> Self {
        Self {
            form: *ring.form(),
            cols: [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
            denom: 1,
        }
    }

    /// `k O` for a positive integer `k`.
    pub fn scalar(ring: &CubicRing, k: i128) -> Self {
        Self {
            form: *ring.form(),
            cols: [[k, 0, 0], [0, k, 0], [0, 0, k]],
            denom: 1,
        }
    }

    /// Build from a lattice already known to be an integral ideal.
    pub(crate) fn from_lattice(form: BinaryCubicForm, cols: [IntElem; 3]) -> Self {
        Self { form, cols, denom: 1 }
    }

    pub fn form(&self) -> &BinaryCubicForm {
        &self.form
    }

    pub fn basis(&self) -> [IntElem; 3] {
        self.cols
    }

    pub fn denom(&self) -> i128 {
        self.denom
    }

    pub fn is_integral(&self) -> bool {
        self.denom == 1
    }

    /// Index of the integral lattice in O.
    pub(crate) fn lattice_index(&self) -> i128 {
        self.cols[0][0] * self.cols[1][1] * self.cols[2][2]
    }

    /// Smallest positive integer in the integral lattice.
    pub(crate) fn min_integer(&self) -> i128 {
        self.cols[0][0]
    }

    /// Whether the integral element `x` lies in the ideal.
    pub fn contains(&self, x: IntElem) -> bool {
        let mut r = x.map(|v| v * self.denom);
        for j in (0..3).rev() {
            if r[j] % self.cols[j][j] != 0 {
                return false;
            }
            let q = r[j] / self.cols[j][j];
            for i in 0..=j {
                r[i] -= q * self.cols[j][i];
            }
        }
        true
    }

    /// Closure of the lattice under multiplication by omega and theta.
    pub fn is_ideal(&self) -> bool {
        let ring = ring_from_form(&self.form);
        self.cols.iter().all(|&c| self.contains(ring.mul_int(c, [0, 1, 0])) && self.contains(ring.mul_int(c, [0, 0, 1])))
    }

    pub fn basis_elements(&self) -> Vec<RingElement> {
        let ring = ring_from_form(&self.form);
        self.cols
            .iter()
            .map(|&c| ring.element_int(c).scale(&(crate::rings::big(1) / crate::rings::big(self.denom))))
            .collect()
    }
}

pub fn ideal_mul(i: &IdealHNF, j: &IdealHNF) -> Result<IdealHNF> {
    if i.form != j.form {
        return Err(Error::RingMismatch);
    }
    let ring = ring_from_form(&i.form);
    let mut gens = Vec::with_capacity(9);
    for &x in &i.cols {
        for &y in &j.cols {
            gens.push(ring.mul_int(x, y));
        }
    }
    let d = i.min_integer() * j.min_integer();
    let mut out = IdealHNF {
        form: i.form,
        cols: hnf_mod(&gens, d),
        denom: i.denom * j.denom,
    };
    out.reduce_denominator();
    Ok(out)
}

pub fn ideal_pow(i: &IdealHNF, e: u32) -> Result<IdealHNF> {
    let ring = ring_from_form(&i.form);
    let mut acc = IdealHNF::unit(&ring);
    for _ in 0..e {
        acc = ideal_mul(&acc, i)?;
    }
    Ok(acc)
}

impl IdealHNF {
    fn reduce_denominator(&mut self) {
        let mut g = self.denom;
        for c in &self.cols {
            for &x in c {
                g = gcd(g, x);
            }
        }
        if g > 1 {
            self.denom /= g;
            for c in self.cols.iter_mut() {
                for x in c.iter_mut() {
                    *x /= g;
                }
            }
        }
    }
}

/// Norm `[O : I]`, a positive rational for fractional ideals.
pub fn ideal_norm(i: &IdealHNF) -> Ratio<i128> {
    Ratio::new(i.lattice_index(), i.denom.pow(3))
}

pub fn ideal_eq(i: &IdealHNF, j: &IdealHNF) -> Result<bool> {
    if i.form != j.form {
        return Err(Error::RingMismatch);
    }
    Ok(i == j)
}

/// A prime ideal with its residue degree `f` and ramification index `e`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeIdeal {
    pub ideal: IdealHNF,
    pub p: u64,
    pub f: u32,
    pub e: u32,
    /// Element of `p P^{-1}` outside `p O`, reduced mod p.
    pub(crate) beta: IntElem,
}

impl PrimeIdeal {
    pub fn norm(&self) -> u64 {
        self.p.pow(self.f)
    }
}

/// Nullspace mod p of the linear map whose matrix has the given rows.
pub(crate) fn kernel_mod_p(rows: &[IntElem], p: i128) -> Vec<IntElem> {
    let mut m: Vec<IntElem> = rows.iter().map(|r| r.map(|v| v.rem_euclid(p))).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..3 {
        let Some(piv) = (row..m.len()).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(row, piv);
        let inv = mod_inv(m[row][col], p).expect("p prime");
        for v in m[row].iter_mut() {
            *v = (*v * inv) % p;
        }
        for r in 0..m.len() {
            if r != row && m[r][col] != 0 {
                let f = m[r][col];
                for k in 0..3 {
                    m[r][k] = (m[r][k] - f * m[row][k]).rem_euclid(p);
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    (0..3)
        .filter(|c| !pivots.contains(c))
        .map(|fc| {
            let mut v = [0i128; 3];
            v[fc] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = (-m[r][fc]).rem_euclid(p);
            }
            v
        })
        .collect()
}

/// Rows of the multiplication-by-g matrices, i.e. equations for `x g = 0`.
fn mult_rows(ring: &CubicRing, gens: &[IntElem]) -> Vec<IntElem> {
    gens.iter().flat_map(|&g| ring.regular_int(g)).collect()
}

/// `(p O : I) = {x : x I in p O}` as a lattice containing `p O`.
fn colon_p(ring: &CubicRing, i: &IdealHNF, p: i128) -> Vec<IntElem> {
    kernel_mod_p(&mult_rows(ring, &i.cols), p)
}

fn make_prime(ring: &CubicRing, ideal: IdealHNF, p: u64, f: u32, e: u32) -> PrimeIdeal {
    let beta = colon_p(ring, &ideal, p as i128)
        .into_iter()
        .next()
        .expect("p P^-1 strictly contains p O");
    PrimeIdeal { ideal, p, f, e, beta }
}

/// Prime ideals above `p` in a ring maximal at `p`.
pub fn primes_above(ring: &CubicRing, p: u64) -> Result<Vec<PrimeIdeal>> {
    let f = ring.form();
    if f.is_degenerate() {
        return Err(Error::DegenerateForm);
    }
    if !is_p_maximal(f, p)? {
        return Err(Error::NotMaximalAt(p));
    }
    let pi = p as i128;
    let (a, b, c) = (f.a as i128, f.b as i128, f.c as i128);
    let roots = projective_roots_mod_p(f, p);
    let form = *f;
    let degree_one = |root: Option<u64>| {
        let (w, t) = match root {
            Some(r) => {
                let r = r as i128;
                (-a * r, -(a * r * r + b * r + c))
            }
            None => (b, 0),
        };
        IdealHNF::from_lattice(
            form,
            [[pi, 0, 0], [(-w).rem_euclid(pi), 1, 0], [(-t).rem_euclid(pi), 0, 1]],
        )
    };
    let total: u32 = roots.iter().map(|r| r.1).sum();
    let mut out = Vec::new();
    match total {
        0 => out.push(make_prime(ring, IdealHNF::scalar(ring, pi), p, 3, 1)),
        1 => {
            let p1 = degree_one(roots[0].0);
            let k = colon_p(ring, &p1, pi);
            debug_assert_eq!(k.len(), 1);
            let mut gens = k.clone();
            gens.extend([[pi, 0, 0], [0, pi, 0], [0, 0, pi]]);
            let p2 = IdealHNF::from_lattice(form, hnf_mod(&gens, pi));
            out.push(make_prime(ring, p1, p, 1, 1));
            out.push(make_prime(ring, p2, p, 2, 1));
        }
        _ => {
            for &(r, m) in &roots {
                out.push(make_prime(ring, degree_one(r), p, 1, m));
            }
        }
    }
    Ok(out)
}

/// `v_P(alpha)` for a nonzero integral `alpha` whose norm has p-adic
/// valuation at most `bound`.
pub(crate) fn valuation_bounded(ring: &CubicRing, prime: &PrimeIdeal, alpha: IntElem, bound: u32) -> u32 {
    let p = prime.p as i128;
    let max_v = bound / prime.f;
    if max_v == 0 {
        return 0;
    }
    let mut modulus = p.pow(max_v + 1);
    let mut x = alpha.map(|v| v.rem_euclid(modulus));
    let mut v = 0;
    while v < max_v {
        let y = ring.mul_int(x, prime.beta).map(|c| c.rem_euclid(modulus));
        if y.iter().any(|c| c % p != 0) {
            break;
        }
        modulus /= p;
        x = y.map(|c| c / p);
        v += 1;
    }
    v
}

/// Valuation of a nonzero integral element at a prime ideal.
pub fn valuation(ring: &CubicRing, prime: &PrimeIdeal, alpha: IntElem) -> u32 {
    let mut n = ring.norm_int(alpha).abs();
    assert!(n != 0, "valuation of zero");
    let p = prime.p as i128;
    let mut k = 0;
    while n % p == 0 {
        n /= p;
        k += 1;
    }
    valuation_bounded(ring, prime, alpha, k)
}
