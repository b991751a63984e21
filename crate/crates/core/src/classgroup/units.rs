//! Unit group of a maximal cubic order.
//!
//! Units are collected by scanning a grid of weighted Minkowski forms: a unit
//! with log vector `l` has weighted norm about 3 under weights `exp(-2 l)`, so
//! short vectors at each grid point include every unit whose log vector lies
//! in the surrounding cell. The log lattice they generate is then saturated
//! at every prime up to the index bound given by a regulator lower bound.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use num_integer::Integer;

use crate::arith::{is_prime, mod_pow, primes_up_to};
use crate::forms::projective_roots_mod_p;
use crate::error::{Error, Result};
use crate::rings::{CubicRing, Embeddings, IntElem, RingElement, Signature};

use super::ideal::IdealHNF;
use super::lattice::{fincke_pohst, Metric};

/// Grid spacing in log space.
const STEP: f64 = 1.0;
/// Largest grid ring scanned while no unit is known.
const MAX_RING: i64 = 40;
/// Search radius once one unit is known.
const MAX_STRIP_RING: i64 = 1000;
/// Longest walk for a single fundamental unit.
const MAX_WALK: i64 = 2000;
/// Largest saturation prime attempted.
/// Index bound below which the search hands over to saturation.
const SOFT_INDEX: f64 = 50.0;
/// Rings scanned past the first full-rank ring when the index bound is large.
const EXTRA_RINGS: i64 = 3;
const MAX_SAT_PRIME: f64 = 5000.0;
const SEARCH_BUDGET: u64 = 200_000;

/// Unit group `{+-1} x <fundamental units>`.
#[derive(Debug, Clone)]
pub struct UnitGroupData {
    /// Generator of the torsion part, always `-1`.
    pub torsion: RingElement,
    pub fundamental: Vec<RingElement>,
    pub regulator: f64,
    /// `sign(sigma_i(u))` at each real place, one row per fundamental unit.
    pub signs: Vec<Vec<i8>>,
    /// `log |sigma_i(u)|` per place (real places, then the complex place
    /// once), one row per fundamental unit.
    pub logs: Vec<Vec<f64>>,
}

impl UnitGroupData {
    pub fn rank(&self) -> usize {
        self.fundamental.len()
    }
}

type Big3 = [BigInt; 3];

fn bmul(ring: &CubicRing, x: &Big3, y: &Big3) -> Big3 {
    let f = ring.form();
    let (a, b, c, d) = (BigInt::from(f.a), BigInt::from(f.b), BigInt::from(f.c), BigInt::from(f.d));
    let (n, m, l) = ring.constants();
    let (n, m, l) = (BigInt::from(n), BigInt::from(m), BigInt::from(l));
    let xy11 = &x[1] * &y[1];
    let xy22 = &x[2] * &y[2];
    [
        &x[0] * &y[0] + &xy11 * &m + (&x[1] * &y[2] + &x[2] * &y[1]) * &n + &xy22 * &l,
        &x[0] * &y[1] + &x[1] * &y[0] + &xy11 * &b + &xy22 * &d,
        &x[0] * &y[2] + &x[2] * &y[0] - &xy11 * &a - &xy22 * &c,
    ]
}

fn bone() -> Big3 {
    [BigInt::one(), BigInt::zero(), BigInt::zero()]
}

fn from_int(x: IntElem) -> Big3 {
    x.map(BigInt::from)
}

/// Trace, second symmetric function and norm of `x`.
fn invariants(ring: &CubicRing, x: &Big3) -> (BigInt, BigInt, BigInt) {
    let cols = [
        x.clone(),
        bmul(ring, x, &from_int([0, 1, 0])),
        bmul(ring, x, &from_int([0, 0, 1])),
    ];
    let m = |i: usize, j: usize| &cols[j][i];
    let tr = m(0, 0) + m(1, 1) + m(2, 2);
    let minor = |i: usize, j: usize| m(i, i) * m(j, j) - m(i, j) * m(j, i);
    let s2 = minor(0, 1) + minor(0, 2) + minor(1, 2);
    let nrm = m(0, 0) * minor(1, 2) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
        + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    (tr, s2, nrm)
}

/// Inverse of a unit, `(x^2 - tr x + s2) / N(x)`.
fn binv(ring: &CubicRing, x: &Big3) -> Big3 {
    let (tr, s2, nrm) = invariants(ring, x);
    let x2 = bmul(ring, x, x);
    let mut out = [0, 1, 2].map(|i| (&x2[i] - &tr * &x[i]) * &nrm);
    out[0] += &s2 * &nrm;
    out
}

/// A unit with its archimedean data, kept additively so that products of
/// large units do not lose precision.
#[derive(Debug, Clone)]
struct Unit {
    x: Big3,
    /// `log |sigma_i|` per place, complex place once.
    log: Vec<f64>,
    /// Signs at the real places.
    sign: Vec<i8>,
    /// Argument at the complex place.
    arg: Option<f64>,
}

struct Ctx<'a> {
    ring: &'a CubicRing,
    hp: HpEmbeddings,
    frames: RefCell<HashMap<(i64, i64), Frame>>,
    nreal: usize,
    rank: usize,
    /// Lattice being scanned (the order, or an integral ideal) and the norm
    /// sought in it.
    base: [IntElem; 3],
    norm: BigInt,
}

impl<'a> Ctx<'a> {
    fn new(ring: &'a CubicRing, base: [IntElem; 3], norm: i128) -> Result<Self> {
        let emb = ring.embeddings()?;
        let (nreal, rank) = match ring.signature() {
            Signature::TotallyReal => (3, 2),
            Signature::Complex => (1, 1),
            Signature::Degenerate => return Err(Error::DegenerateForm),
        };
        Ok(Ctx {
            ring,
            hp: HpEmbeddings::new(ring, &emb),
            frames: RefCell::default(),
            nreal,
            rank,
            base,
            norm: BigInt::from(norm),
        })
    }

    /// Weight of place `i` in the product formula.
    fn weight(&self, i: usize) -> f64 {
        if i < self.nreal {
            1.0
        } else {
            2.0
        }
    }

    fn mul(&self, u: &Unit, v: &Unit) -> Unit {
        Unit {
            x: bmul(self.ring, &u.x, &v.x),
            log: u.log.iter().zip(&v.log).map(|(a, b)| a + b).collect(),
            sign: u.sign.iter().zip(&v.sign).map(|(a, b)| a * b).collect(),
            arg: u.arg.zip(v.arg).map(|(a, b)| a + b),
        }
    }

    fn inv(&self, u: &Unit) -> Unit {
        Unit {
            x: binv(self.ring, &u.x),
            log: u.log.iter().map(|a| -a).collect(),
            sign: u.sign.clone(),
            arg: u.arg.map(|a| -a),
        }
    }

    fn neg(&self, u: &Unit) -> Unit {
        Unit {
            x: u.x.clone().map(|v| -v),
            log: u.log.clone(),
            sign: u.sign.iter().map(|s| -s).collect(),
            arg: u.arg.map(|a| a + PI),
        }
    }

    fn pow(&self, u: &Unit, k: i64) -> Unit {
        let base = if k < 0 { self.inv(u) } else { u.clone() };
        let mut acc = Unit {
            x: bone(),
            log: vec![0.0; u.log.len()],
            sign: vec![1; u.sign.len()],
            arg: u.arg.map(|_| 0.0),
        };
        let mut b = base;
        let mut e = k.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            e >>= 1;
            if e > 0 {
                b = self.mul(&b, &b);
            }
        }
        acc
    }

    /// Log vector restricted to the first `rank` places (the rest is fixed by
    /// the product formula).
    fn coords(&self, u: &Unit) -> Vec<f64> {
        u.log[..self.rank].to_vec()
    }

    /// Solve `w = sum c_i b_i` in log space.
    fn solve(&self, basis: &[Unit], w: &Unit) -> Vec<f64> {
        let y = self.coords(w);
        if self.rank == 1 {
            return vec![y[0] / self.coords(&basis[0])[0]];
        }
        let (p, q) = (self.coords(&basis[0]), self.coords(&basis[1]));
        let det = p[0] * q[1] - p[1] * q[0];
        vec![(y[0] * q[1] - y[1] * q[0]) / det, (p[0] * y[1] - p[1] * y[0]) / det]
    }

    fn covolume(&self, basis: &[Unit]) -> f64 {
        if self.rank == 1 {
            return self.coords(&basis[0])[0].abs();
        }
        let (p, q) = (self.coords(&basis[0]), self.coords(&basis[1]));
        (p[0] * q[1] - p[1] * q[0]).abs()
    }

    fn is_torsion(&self, u: &Unit) -> bool {
        u.log.iter().all(|v| v.abs() < 1e-7)
    }

    fn independent(&self, basis: &[Unit], w: &Unit) -> bool {
        match basis.len() {
            0 => !self.is_torsion(w),
            1 if self.rank == 2 => {
                let (p, q) = (self.coords(&basis[0]), self.coords(w));
                (p[0] * q[1] - p[1] * q[0]).abs() > 1e-7 * (1.0 + norm2(&p) * norm2(&q))
            }
            _ => false,
        }
    }

    /// Add `w` to the lattice spanned by `basis`, keeping a basis of the
    /// enlarged lattice. Each swap at least halves the covolume.
    fn merge(&self, basis: &mut Vec<Unit>, w: Unit) {
        if basis.len() < self.rank {
            if self.independent(basis, &w) {
                basis.push(w);
            } else if let Some(last) = basis.pop() {
                // rank 2 with one basis vector: reduce the collinear pair
                let mut pair = vec![last];
                self.merge_full(&mut pair, w, 1);
                basis.extend(pair);
            }
            return;
        }
        self.merge_full(basis, w, self.rank);
    }

    /// Euclidean merge inside a rank-`dim` sublattice spanned by `basis`.
    fn merge_full(&self, basis: &mut [Unit], mut w: Unit, dim: usize) {
        for _ in 0..10_000 {
            let c = if dim == 1 {
                let (p, y) = (self.coords(&basis[0]), self.coords(&w));
                let i = if p[0].abs() >= p.last().unwrap().abs() { 0 } else { p.len() - 1 };
                vec![y[i] / p[i]]
            } else {
                self.solve(basis, &w)
            };
            for (i, ci) in c.iter().enumerate() {
                let k = ci.round() as i64;
                if k != 0 {
                    w = self.mul(&w, &self.pow(&basis[i], -k));
                }
            }
            let frac: Vec<f64> = c.iter().map(|ci| ci - ci.round()).collect();
            if self.is_torsion(&w) || frac.iter().all(|f| f.abs() < 1e-6) {
                return;
            }
            let i = (0..dim).max_by(|&i, &j| frac[i].abs().total_cmp(&frac[j].abs())).unwrap();
            std::mem::swap(&mut basis[i], &mut w);
        }
    }

    /// Shorten a rank-2 basis by Gauss reduction in log space.
    fn reduce(&self, basis: &mut [Unit]) {
        if basis.len() != 2 {
            return;
        }
        for _ in 0..1000 {
            let (p, q) = (self.coords(&basis[0]), self.coords(&basis[1]));
            let (np, nq) = (norm2(&p), norm2(&q));
            if nq < np {
                basis.swap(0, 1);
                continue;
            }
            let k = ((p[0] * q[0] + p[1] * q[1]) / np).round() as i64;
            if k == 0 {
                return;
            }
            basis[1] = self.mul(&basis[1], &self.pow(&basis[0], -k));
        }
    }

    /// Weighted embedding vector of `x` at log weights `t`; its squared
    /// length is the weighted Minkowski norm.
    fn vector(&self, x: &Big3, t: &[f64]) -> [f64; 3] {
        let z = self.hp.apply(x);
        if self.nreal == 3 {
            [0, 1, 2].map(|i| t[i].exp() * z[i].0)
        } else {
            let s = std::f64::consts::SQRT_2 * t[1].exp();
            [t[0].exp() * z[0].0, s * z[1].0, s * z[1].1]
        }
    }

    fn refresh(&self, f: &mut Frame) {
        f.v = [0, 1, 2].map(|j| self.vector(&f.b[j], &f.t));
    }

    fn origin(&self) -> Result<Frame> {
        let t = vec![0.0; self.rank + 1];
        let mut f = Frame { t, b: self.base.map(from_int), v: [[0.0; 3]; 3] };
        self.refresh(&mut f);
        lll_vectors(&mut f)?;
        self.refresh(&mut f);
        Ok(f)
    }

    /// Move a frame to new weights and re-reduce it.
    fn shift(&self, f: &Frame, t: Vec<f64>) -> Result<Frame> {
        let mut g = Frame { t, b: f.b.clone(), v: [[0.0; 3]; 3] };
        self.refresh(&mut g);
        lll_vectors(&mut g)?;
        self.refresh(&mut g);
        Ok(g)
    }

    /// Every element of norm `+-self.norm` whose log vector, less a third of
    /// the log norm, lies in the grid cell around the frame's weights.
    fn scan(&self, f: &Frame, out: &mut Vec<Unit>) -> Result<()> {
        let mut gram = [[0f64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                gram[i][j] = (0..3).map(|k| f.v[i][k] * f.v[j][k]).sum();
            }
        }
        let metric = Metric { gram, exact: None };
        let ln_norm = self.norm.to_f64().unwrap_or(f64::INFINITY).ln();
        let cell = if self.rank == 2 {
            2.0 * STEP.exp() + (2.0 * STEP).exp()
        } else {
            STEP.exp() + 2.0 * (STEP / 2.0).exp()
        };
        let bound = cell * (2.0 * ln_norm / 3.0).exp();
        let mut found = Vec::new();
        fincke_pohst(&[[1, 0, 0], [0, 1, 0], [0, 0, 1]], &metric, bound * 1.01, SEARCH_BUDGET, |c, _| found.push(c))?;
        for c in found {
            let vec = [0, 1, 2].map(|k| (0..3).map(|j| c[j] as f64 * f.v[j][k]).sum::<f64>());
            let (log, sign, arg) = if self.nreal == 3 {
                let log: Vec<f64> = (0..3).map(|i| vec[i].abs().ln() - f.t[i]).collect();
                (log, vec.iter().map(|v| if *v > 0.0 { 1 } else { -1 }).collect::<Vec<i8>>(), None)
            } else {
                let z = Complex64::new(vec[1], vec[2]) / std::f64::consts::SQRT_2;
                let log = vec![vec[0].abs().ln() - f.t[0], z.norm().ln() - f.t[1]];
                (log, vec![if vec[0] > 0.0 { 1 } else { -1 }], Some(z.arg()))
            };
            let approx_norm: f64 = (0..log.len()).map(|i| self.weight(i) * log[i]).sum();
            if (approx_norm - ln_norm).abs() > 0.1 {
                continue;
            }
            let x: Big3 = [0, 1, 2].map(|k| (0..3).map(|j| BigInt::from(c[j]) * &f.b[j][k]).sum());
            if invariants(self.ring, &x).2.abs() == self.norm {
                out.push(Unit { x, log, sign, arg });
            }
        }
        Ok(())
    }

    /// Log weights of a grid point.
    fn grid_t(&self, (a, b): (i64, i64)) -> Vec<f64> {
        let (t0, t1) = (-STEP * a as f64, -STEP * b as f64);
        if self.rank == 2 {
            vec![t0, t1, -t0 - t1]
        } else {
            vec![t0, -t0 / 2.0]
        }
    }

    /// Reduced frame at a grid point, built by stepping out from the origin
    /// through cached neighbours.
    fn frame_at(&self, key: (i64, i64)) -> Result<Frame> {
        let mut cache = self.frames.borrow_mut();
        if cache.is_empty() {
            cache.insert((0, 0), self.origin()?);
        }
        let mut path = Vec::new();
        let mut k = key;
        while !cache.contains_key(&k) {
            path.push(k);
            let n = k.0.abs().max(k.1.abs());
            k = (
                if k.0.abs() == n { k.0 - k.0.signum() } else { k.0 },
                if k.1.abs() == n { k.1 - k.1.signum() } else { k.1 },
            );
        }
        let mut f = cache[&k].clone();
        for k in path.into_iter().rev() {
            f = self.shift(&f, self.grid_t(k))?;
            cache.insert(k, f.clone());
        }
        Ok(f)
    }

    /// Reduced frame at arbitrary log weights.
    fn frame_near(&self, t: &[f64]) -> Result<Frame> {
        let a = (-t[0] / STEP).round() as i64;
        let b = if self.rank == 2 { (-t[1] / STEP).round() as i64 } else { 0 };
        let f = self.frame_at((a, b))?;
        self.shift(&f, t.to_vec())
    }

    /// Units generating a finite-index subgroup of the unit group.
    fn search(&self, rlow: f64) -> Result<Vec<Unit>> {
        let mut basis: Vec<Unit> = Vec::new();
        if self.rank == 1 {
            // cells are contiguous along the single direction, so the first
            // unit met is fundamental
            for a in 0..=MAX_WALK {
                let mut found = Vec::new();
                self.scan(&self.frame_at((a, 0))?, &mut found)?;
                for u in found {
                    self.merge(&mut basis, u);
                }
                if !basis.is_empty() {
                    return Ok(basis);
                }
            }
            return Err(Error::SaturationBudgetExceeded);
        }
        let mut full_at = None;
        for n in 0..=MAX_STRIP_RING {
            if basis.is_empty() && n > MAX_RING {
                break;
            }
            // once one unit u is known, a second generator may be taken with
            // log projection onto log u at most |log u| / 2
            let strip = (basis.len() == 1).then(|| {
                let l = &basis[0].log;
                let len = norm2(l).sqrt();
                (l.iter().map(|x| x / len).collect::<Vec<f64>>(), len / 2.0 + 2.0 * STEP)
            });
            let mut found = Vec::new();
            for a in -n..=n {
                for b in -n..=n {
                    if a.abs().max(b.abs()) != n {
                        continue;
                    }
                    if let Some((dir, half)) = &strip {
                        let t = self.grid_t((a, b));
                        let proj: f64 = t.iter().zip(dir).map(|(x, y)| x * y).sum();
                        if proj.abs() > *half {
                            continue;
                        }
                    }
                    self.scan(&self.frame_at((a, b))?, &mut found)?;
                }
            }
            for u in found {
                self.merge(&mut basis, u);
            }
            if basis.len() == 2 {
                let first = *full_at.get_or_insert(n);
                let ratio = self.covolume(&basis) / rlow;
                if ratio < 4.0 || (n > first && ratio <= SOFT_INDEX) || n > first + EXTRA_RINGS {
                    return Ok(basis);
                }
            }
        }
        if basis.len() == 2 {
            return Ok(basis);
        }
        Err(Error::SaturationBudgetExceeded)
    }

    /// Lower bound for the regulator of a maximal order of this signature.
    fn regulator_lower_bound(&self) -> f64 {
        let d = self.ring.disc().unsigned_abs() as f64;
        if self.rank == 2 {
            (d / 4.0).ln().powi(2) / 16.0
        } else {
            // the smallest Pisot number bounds the fundamental unit from below
            let pisot = 1.324_717_957_244_746f64.ln();
            if d > 28.0 {
                pisot.max(((d - 24.0) / 4.0).ln() / 3.0)
            } else {
                pisot
            }
        }
    }

    /// Integral elements whose embeddings are `p`-th roots of those of `u`.
    fn roots(&self, u: &Unit, p: u64) -> Result<Vec<Unit>> {
        let pf = p as f64;
        let mut choices: Vec<Vec<(f64, Complex64, i8)>> = Vec::new();
        for i in 0..self.nreal {
            let m = (u.log[i] / pf).exp();
            let s = u.sign[i];
            let opts = if p % 2 == 1 {
                vec![(m * s as f64, Complex64::new(m * s as f64, 0.0), s)]
            } else if s > 0 {
                vec![(m, Complex64::new(m, 0.0), 1), (-m, Complex64::new(-m, 0.0), -1)]
            } else {
                return Ok(Vec::new());
            };
            choices.push(opts);
        }
        if let Some(a) = u.arg {
            let m = (u.log[self.nreal] / pf).exp();
            choices.push(
                (0..p)
                    .map(|k| {
                        let th = (a + 2.0 * PI * k as f64) / pf;
                        (th, Complex64::from_polar(m, th), 0)
                    })
                    .collect(),
            );
        }
        let target_log: Vec<f64> = u.log.iter().map(|l| l / pf).collect();
        let t: Vec<f64> = target_log.iter().map(|l| -l).collect();
        let frame = self.frame_near(&t)?;
        let mut m = [[0f64; 3]; 3];
        for k in 0..3 {
            for j in 0..3 {
                m[k][j] = frame.v[j][k];
            }
        }
        let mut idx = vec![0usize; choices.len()];
        let mut out = Vec::new();
        loop {
            let vals: Vec<&(f64, Complex64, i8)> = idx.iter().zip(&choices).map(|(&i, c)| &c[i]).collect();
            let w = if self.nreal == 3 {
                [0, 1, 2].map(|i| vals[i].1.re * t[i].exp())
            } else {
                let z = vals[1].1 * std::f64::consts::SQRT_2 * t[1].exp();
                [vals[0].1.re * t[0].exp(), z.re, z.im]
            };
            let c = solve3(m, w).ok_or_else(|| Error::PrecisionExhausted("singular unit frame".into()))?;
            if c.iter().all(|v| (v - v.round()).abs() < 0.01) {
                let c = c.map(|v| BigInt::from(v.round() as i128));
                let x: Big3 = [0, 1, 2].map(|k| (0..3).map(|j| &c[j] * &frame.b[j][k]).sum());
                let v = Unit {
                    x,
                    log: target_log.clone(),
                    sign: vals[..self.nreal].iter().map(|v| v.2).collect(),
                    arg: u.arg.map(|_| vals[self.nreal].0),
                };
                out.push(v);
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return Ok(out);
                }
                idx[k] += 1;
                if idx[k] < choices[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    /// `count` characters `x -> (x mod Q)^((q-1)/p)` at degree-one primes
    /// `Q` over primes `q = 1 mod p` not dividing the discriminant.
    fn characters(&self, p: u64, count: usize) -> Vec<PowerCharacter> {
        let f = self.ring.form();
        let disc = self.ring.disc();
        let mut out = Vec::new();
        let mut q = p + 1;
        while out.len() < count && q < 1_000_000 {
            if is_prime(q) && disc % q as i128 != 0 && f.a % q as i64 != 0 {
                for (r, _) in projective_roots_mod_p(f, q) {
                    let Some(r) = r else { continue };
                    let m = |v: i128| v.rem_euclid(q as i128) as u64;
                    let (a, b, c) = (f.a as i128, f.b as i128, f.c as i128);
                    let r = r as i128;
                    let w = m(-a * r);
                    let t = m(-(m(a * r * r) as i128 + b * r + c));
                    let e = (q - 1) / p;
                    let zeta = (2..q).map(|g| mod_pow(g, e, q)).find(|&z| z != 1).unwrap();
                    let mut table = HashMap::new();
                    let mut z = 1u64;
                    for k in 0..p {
                        table.insert(z, k);
                        z = ((z as u128 * zeta as u128) % q as u128) as u64;
                    }
                    out.push(PowerCharacter { q, p, w, t, table });
                }
            }
            q += p;
        }
        out
    }

    /// Replace the basis by a basis of its `p`-saturation.
    fn saturate(&self, basis: &mut [Unit], p: u64) -> Result<()> {
        let half = (p / 2) as i64;
        let lo = half + 1 - p as i64;
        let chars = self.characters(p, self.rank + 12);
        let neg_chi: Vec<u64> = chars.iter().map(|c| c.eval(&from_int([-1, 0, 0]))).collect();
        'outer: loop {
            let chi: Vec<Vec<u64>> = basis.iter().map(|b| chars.iter().map(|c| c.eval(&b.x)).collect()).collect();
            // a p-th power has trivial p-th power characters
            let trivial = |neg: bool, e: &[i64]| {
                (0..chars.len()).all(|j| {
                    let mut acc = if neg { neg_chi[j] } else { 0 };
                    for (i, &k) in e.iter().enumerate() {
                        acc += k.rem_euclid(p as i64) as u64 * chi[i][j];
                    }
                    acc % p == 0
                })
            };
            let mut e = vec![lo; self.rank];
            loop {
                if e.iter().any(|&v| v != 0) && (trivial(false, &e) || (p == 2 && trivial(true, &e))) {
                    // archimedean data first; exact products only for a hit
                    let lazy = |neg: bool| {
                        let mut u = Unit {
                            x: bone(),
                            log: vec![0.0; self.rank + 1],
                            sign: vec![if neg { -1 } else { 1 }; self.nreal],
                            arg: basis[0].arg.map(|_| if neg { PI } else { 0.0 }),
                        };
                        for (b, &k) in basis.iter().zip(&e) {
                            for (l, bl) in u.log.iter_mut().zip(&b.log) {
                                *l += k as f64 * bl;
                            }
                            for (s, bs) in u.sign.iter_mut().zip(&b.sign) {
                                *s *= bs.pow(k.unsigned_abs() as u32);
                            }
                            u.arg = u.arg.zip(b.arg).map(|(a, ba)| a + k as f64 * ba);
                        }
                        u
                    };
                    let cands = if p == 2 { vec![lazy(false), lazy(true)] } else { vec![lazy(false)] };
                    for (ci, c) in cands.iter().enumerate() {
                        for v in self.roots(c, p)? {
                            let mut exact = self.pow(&basis[0], e[0]);
                            for i in 1..self.rank {
                                exact = self.mul(&exact, &self.pow(&basis[i], e[i]));
                            }
                            if ci == 1 {
                                exact = self.neg(&exact);
                            }
                            if self.pow(&v, p as i64).x == exact.x {
                                self.merge_full(basis, v, self.rank);
                                continue 'outer;
                            }
                        }
                    }
                }
                let mut k = 0;
                loop {
                    if k == self.rank {
                        return Ok(());
                    }
                    e[k] += 1;
                    if e[k] <= half {
                        break;
                    }
                    e[k] = lo;
                    k += 1;
                }
            }
        }
    }
}

/// Bits after the binary point in [`Fx`].
const PREC: u64 = 2048;

/// Fixed-point complex number, scaled by `2^PREC`.
#[derive(Debug, Clone)]
struct Fx {
    re: BigInt,
    im: BigInt,
}

impl Fx {
    fn int(n: i128) -> Self {
        Fx { re: BigInt::from(n) << PREC, im: BigInt::zero() }
    }

    fn from_c64(z: Complex64) -> Self {
        let conv = |v: f64| BigInt::from((v * 2f64.powi(60)).round() as i128) << (PREC - 60);
        Fx { re: conv(z.re), im: conv(z.im) }
    }

    fn add(&self, o: &Fx) -> Fx {
        Fx { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    fn sub(&self, o: &Fx) -> Fx {
        Fx { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    fn mul(&self, o: &Fx) -> Fx {
        Fx {
            re: (&self.re * &o.re - &self.im * &o.im) >> PREC,
            im: (&self.re * &o.im + &self.im * &o.re) >> PREC,
        }
    }

    fn div(&self, o: &Fx) -> Fx {
        let den = &o.re * &o.re + &o.im * &o.im;
        Fx {
            re: ((&self.re * &o.re + &self.im * &o.im) << PREC) / &den,
            im: ((&self.im * &o.re - &self.re * &o.im) << PREC) / &den,
        }
    }
}

/// `v / 2^prec` as a float, keeping full relative precision.
fn fixed_to_f64(v: &BigInt, prec: u64) -> f64 {
    let sh = v.bits().saturating_sub(900);
    let mut r = (v >> sh).to_f64().unwrap_or(0.0);
    let mut e = sh as i32 - prec as i32;
    while e != 0 {
        let k = e.clamp(-512, 512);
        r *= 2f64.powi(k);
        e -= k;
    }
    r
}

/// Working precisions for [`HpEmbeddings::apply`], each at most `PREC`.
const TIERS: [u64; 4] = [192, 448, 1024, PREC];

/// Images of omega and theta at each place to `PREC` bits, so that the
/// embeddings of elements with huge coordinates are exact to rounding.
#[derive(Debug, Clone)]
struct HpEmbeddings {
    /// Per tier, the places truncated to that many fractional bits.
    tiers: Vec<Vec<(Fx, Fx)>>,
}

impl HpEmbeddings {
    fn new(ring: &CubicRing, emb: &Embeddings) -> Self {
        let f = ring.form();
        let (a, b, c, d) = (f.a as i128, f.b as i128, f.c as i128, f.d as i128);
        let mut places: Vec<(Complex64, Complex64)> = emb.real.iter().map(|&(w, t)| (Complex64::new(w, 0.0), Complex64::new(t, 0.0))).collect();
        places.extend(emb.complex);
        let places = places
            .into_iter()
            .map(|(w, t)| {
                if a != 0 && w.norm() <= a.abs() as f64 {
                    // root xi = -w / a of f(x, 1)
                    let xi = newton(&[d, c, b, a], Fx::from_c64(-w / a as f64));
                    let axi = Fx::int(a).mul(&xi);
                    let w = Fx::int(0).sub(&axi);
                    let t = Fx::int(0).sub(&axi.add(&Fx::int(b)).mul(&xi).add(&Fx::int(c)));
                    (w, t)
                } else if d != 0 {
                    // root zeta = t / d of f(1, z)
                    let z = newton(&[a, b, c, d], Fx::from_c64(t / d as f64));
                    let dz = Fx::int(d).mul(&z);
                    (dz.add(&Fx::int(c)).mul(&z).add(&Fx::int(b)), dz)
                } else {
                    (Fx::int(b), Fx::int(0))
                }
            })
            .collect::<Vec<(Fx, Fx)>>();
        let tiers = TIERS
            .iter()
            .map(|&p| {
                let cut = |z: &Fx| Fx { re: &z.re >> (PREC - p), im: &z.im >> (PREC - p) };
                places.iter().map(|(w, t)| (cut(w), cut(t))).collect()
            })
            .collect();
        HpEmbeddings { tiers }
    }

    /// `sigma_i(x)` per place as (re, im).
    fn apply(&self, x: &Big3) -> Vec<(f64, f64)> {
        let bits = x.iter().map(|v| v.bits()).max().unwrap_or(0);
        let k = TIERS.iter().position(|&p| p >= 2 * bits + 128).unwrap_or(TIERS.len() - 1);
        let prec = TIERS[k];
        let (x0, x1, x2) = (&x[0] << prec, &x[1], &x[2]);
        self.tiers[k]
            .iter()
            .map(|(w, t)| {
                let re = &x0 + x1 * &w.re + x2 * &t.re;
                let im = x1 * &w.im + x2 * &t.im;
                (fixed_to_f64(&re, prec), fixed_to_f64(&im, prec))
            })
            .collect()
    }
}

/// Newton refinement of a root of `sum c_i z^i` (coefficients low to high).
fn newton(c: &[i128; 4], mut z: Fx) -> Fx {
    for _ in 0..12 {
        let mut p = Fx::int(c[3]);
        let mut dp = Fx::int(3 * c[3]);
        for i in (0..3).rev() {
            p = p.mul(&z).add(&Fx::int(c[i]));
            if i > 0 {
                dp = dp.mul(&z).add(&Fx::int(i as i128 * c[i]));
            }
        }
        if dp.re.is_zero() && dp.im.is_zero() {
            break;
        }
        z = z.sub(&p.div(&dp));
    }
    z
}

/// An LLL-reduced basis of the order together with its weighted embedding
/// vectors at log weights `t`.
#[derive(Debug, Clone)]
struct Frame {
    t: Vec<f64>,
    b: [Big3; 3],
    v: [[f64; 3]; 3],
}

fn dot(x: &[f64; 3], y: &[f64; 3]) -> f64 {
    x[0] * y[0] + x[1] * y[1] + x[2] * y[2]
}

fn gso(v: &[[f64; 3]; 3]) -> ([[f64; 3]; 3], [f64; 3]) {
    let mut mu = [[0f64; 3]; 3];
    let mut bs = [[0f64; 3]; 3];
    let mut nb = [0f64; 3];
    for i in 0..3 {
        bs[i] = v[i];
        for j in 0..i {
            mu[i][j] = dot(&v[i], &bs[j]) / nb[j];
            for k in 0..3 {
                bs[i][k] -= mu[i][j] * bs[j][k];
            }
        }
        nb[i] = dot(&bs[i], &bs[i]);
    }
    (mu, nb)
}

/// LLL (delta = 0.99) on the embedding vectors, mirroring every step on the
/// integer coordinates.
fn lll_vectors(f: &mut Frame) -> Result<()> {
    let overflow = || Error::PrecisionExhausted("unit search coordinates".into());
    let mut k = 1;
    for _ in 0..100_000 {
        if k >= 3 {
            return Ok(());
        }
        for j in (0..k).rev() {
            let (mu, _) = gso(&f.v);
            let q = mu[k][j].round();
            if q != 0.0 {
                let qi = BigInt::from(q as i128);
                for c in 0..3 {
                    f.v[k][c] -= q * f.v[j][c];
                    let m = &qi * &f.b[j][c];
                    f.b[k][c] -= m;
                }
                if f.b[k].iter().any(|x| 2 * x.bits() + 128 > PREC) {
                    return Err(overflow());
                }
            }
        }
        let (mu, nb) = gso(&f.v);
        if nb[k] < (0.99 - mu[k][k - 1] * mu[k][k - 1]) * nb[k - 1] {
            f.v.swap(k, k - 1);
            f.b.swap(k, k - 1);
            k = (k - 1).max(1);
        } else {
            k += 1;
        }
    }
    Err(Error::PrecisionExhausted("unit search reduction".into()))
}

/// A `p`-th power residue character on units at a degree-one prime.
struct PowerCharacter {
    q: u64,
    p: u64,
    /// Images of omega and theta in `F_q`.
    w: u64,
    t: u64,
    /// Discrete logarithms of the `p`-th roots of unity.
    table: HashMap<u64, u64>,
}

impl PowerCharacter {
    fn eval(&self, x: &Big3) -> u64 {
        let q = BigInt::from(self.q);
        let v = (&x[0] + &x[1] * self.w + &x[2] * self.t).mod_floor(&q);
        let v = v.to_u64().unwrap();
        self.table.get(&mod_pow(v, (self.q - 1) / self.p, self.q)).copied().unwrap_or(0)
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = m[r][col] / m[col][col];
            for c in col..3 {
                m[r][c] -= f * m[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0f64; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|c| m[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / m[r][r];
    }
    Some(x)
}

/// Fundamental units, regulator and real signs of a maximal cubic order.
pub fn unit_group(ring: &CubicRing) -> Result<UnitGroupData> {
    let ctx = Ctx::new(ring, [[1, 0, 0], [0, 1, 0], [0, 0, 1]], 1)?;
    let nreal = ctx.nreal;
    let rlow = ctx.regulator_lower_bound();
    let mut basis = ctx.search(rlow)?;
    let bound = ctx.covolume(&basis) / rlow;
    if !(bound <= MAX_SAT_PRIME) {
        return Err(Error::SaturationBudgetExceeded);
    }
    for p in primes_up_to((bound.floor() as u64).max(3)) {
        ctx.saturate(&mut basis, p)?;
    }
    ctx.reduce(&mut basis);
    for u in basis.iter_mut() {
        let flip = if nreal == 3 { u.sign[0] < 0 } else { u.log[0] < 0.0 };
        if flip {
            *u = if nreal == 3 { ctx.neg(u) } else { ctx.inv(u) };
        }
        if nreal == 1 && u.sign[0] < 0 {
            *u = ctx.neg(u);
        }
    }
    let regulator = ctx.covolume(&basis);
    let elem = |x: &Big3| ring.element(x.clone().map(BigRational::from_integer));
    Ok(UnitGroupData {
        torsion: ring.element_int([-1, 0, 0]),
        fundamental: basis.iter().map(|u| elem(&u.x)).collect(),
        regulator,
        signs: basis.iter().map(|u| u.sign.clone()).collect(),
        logs: basis.iter().map(|u| u.log.clone()).collect(),
    })
}

/// A generator of `ideal` if it is principal. The search covers every grid
/// cell meeting one fundamental parallelotope of `units`, so any full-rank
/// system of units gives a complete answer.
pub fn principal_generator(ring: &CubicRing, units: &UnitGroupData, ideal: &IdealHNF) -> Result<Option<RingElement>> {
    Ok(signed_generator(ring, units, ideal)?.map(|(g, _)| g))
}

/// As [`principal_generator`], also returning the signs of the generator at
/// the real places.
pub(crate) fn signed_generator(
    ring: &CubicRing,
    units: &UnitGroupData,
    ideal: &IdealHNF,
) -> Result<Option<(RingElement, Vec<i8>)>> {
    let d = ideal.denom();
    let ctx = Ctx::new(ring, ideal.basis(), ideal.lattice_index())?;
    if units.rank() != ctx.rank {
        return Err(Error::SaturationBudgetExceeded);
    }
    // Parallelotope centred on the balanced frame, scanned outwards, so the
    // generator returned is small in every embedding.
    let mut lo = vec![f64::INFINITY; ctx.rank];
    let mut hi = vec![f64::NEG_INFINITY; ctx.rank];
    for mask in 0..1u32 << ctx.rank {
        for i in 0..ctx.rank {
            let c: f64 = (0..ctx.rank)
                .map(|j| if mask >> j & 1 == 1 { 0.5 } else { -0.5 } * units.logs[j][i])
                .sum();
            lo[i] = lo[i].min(c);
            hi[i] = hi[i].max(c);
        }
    }
    let range = |i: usize| ((lo[i] / STEP - 0.5).ceil() as i64)..=((hi[i] / STEP + 0.5).floor() as i64);
    let mut keys: Vec<(i64, i64)> = if ctx.rank == 1 {
        range(0).map(|a| (a, 0)).collect()
    } else {
        range(0).flat_map(|a| range(1).map(move |b| (a, b))).collect()
    };
    keys.sort_by_key(|&(a, b)| (a * a + b * b, a, b));
    for key in keys {
        let mut found = Vec::new();
        ctx.scan(&ctx.frame_at(key)?, &mut found)?;
        if let Some(u) = found.into_iter().next() {
            let scale = BigRational::new(BigInt::one(), BigInt::from(d));
            return Ok(Some((ring.element(u.x.map(BigRational::from_integer)).scale(&scale), u.sign)));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::BinaryCubicForm;
    use crate::rings::{norm, ring_from_form};

    #[test]
    fn cube_root_of_two() {
        let ring = ring_from_form(&BinaryCubicForm::new(1, 0, 0, 2));
        let u = unit_group(&ring).unwrap();
        assert_eq!(u.rank(), 1);
        assert!((u.regulator - 1.3473).abs() < 1e-3, "{}", u.regulator);
        assert!(norm(&u.fundamental[0]).abs().is_one());
    }

    #[test]
    fn simplest_cubic() {
        let ring = ring_from_form(&BinaryCubicForm::new(1, 1, -2, -1));
        let u = unit_group(&ring).unwrap();
        assert_eq!(u.rank(), 2);
        assert!(u.regulator > 0.5 && u.regulator < 0.55, "{}", u.regulator);
    }

    #[test]
    fn squares_are_saturated() {
        let ring = ring_from_form(&BinaryCubicForm::new(1, 0, 0, 2));
        let ctx = Ctx::new(&ring, [[1, 0, 0], [0, 1, 0], [0, 0, 1]], 1).unwrap();
        let u = ctx.search(ctx.regulator_lower_bound()).unwrap().remove(0);
        let u6 = ctx.pow(&u, 6);
        let mut basis = vec![u6];
        ctx.saturate(&mut basis, 2).unwrap();
        ctx.saturate(&mut basis, 3).unwrap();
        assert!((ctx.covolume(&basis) - ctx.covolume(&[u])).abs() < 1e-9);
    }
}
