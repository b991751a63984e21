//! Class groups from relation lattices: a factor base of small prime
//! ideals, relations from smooth elements of small norm, and Smith normal
//! form of the resulting lattice (augmented by sign columns for the narrow
//! class group).

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ideal::{ideal_mul, primes_above, valuation_bounded, IdealHNF, PrimeIdeal};
use super::lattice::{lll, Metric};
use super::linalg::{invariant_chain, smith_mod, Echelon};
use crate::arith::{factor, primes_up_to};
use crate::error::{Error, Result};
use crate::forms::is_maximal;
use crate::rings::{CubicRing, Embeddings, IntElem, Signature};

/// Smallest factor-base norm bound, whatever the Minkowski bound.
const MIN_FACTOR_BASE_BOUND: f64 = 20.0;
const STABLE_BATCHES: usize = 3;
const MAX_BATCHES: usize = 80;
/// Coefficient range of the small combinations tried in each lattice.
const COMBO_RANGE: i128 = 3;

/// A finite abelian group `Z/d1 x Z/d2 x ...` with `d1 | d2 | ...`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbelianGroupData {
    /// Invariant factors greater than one, in divisibility order.
    pub divisors: Vec<u64>,
    /// One generator per divisor, as an exponent vector over the factor base
    /// (followed by the sign generators for a narrow class group).
    pub generators: Vec<Vec<i64>>,
}

impl AbelianGroupData {
    pub fn trivial() -> Self {
        Self {
            divisors: Vec::new(),
            generators: Vec::new(),
        }
    }

    pub fn from_divisors(divisors: Vec<u64>) -> Self {
        Self {
            divisors,
            generators: Vec::new(),
        }
    }

    pub fn order(&self) -> u64 {
        self.divisors.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.divisors.is_empty()
    }
}

/// Size of the 2-torsion subgroup.
pub fn two_torsion_size(g: &AbelianGroupData) -> u64 {
    1 << g.divisors.iter().filter(|&&d| d % 2 == 0).count()
}

/// `(3!/3^3) (4/pi)^s sqrt|disc|` with `s` the number of complex places.
pub fn minkowski_bound(ring: &CubicRing) -> f64 {
    let s = if ring.signature() == Signature::Complex { 1 } else { 0 };
    (2.0 / 9.0) * (4.0 / std::f64::consts::PI).powi(s) * (ring.disc() as f64).abs().sqrt()
}

/// Class group and narrow class group computed from one relation lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassGroupData {
    pub class_group: AbelianGroupData,
    pub narrow: AbelianGroupData,
    pub factor_base: Vec<PrimeIdeal>,
    pub relations: usize,
    pub batches: usize,
}

impl ClassGroupData {
    pub fn class_number(&self) -> u64 {
        self.class_group.order()
    }

    pub fn narrow_class_number(&self) -> u64 {
        self.narrow.order()
    }
}

fn require_maximal(ring: &CubicRing) -> Result<()> {
    if ring.is_degenerate() {
        return Err(Error::DegenerateForm);
    }
    if !is_maximal(ring.form())? {
        return Err(Error::NotMaximal);
    }
    Ok(())
}

pub fn class_group(ring: &CubicRing) -> Result<AbelianGroupData> {
    Ok(class_data(ring)?.class_group)
}

pub fn narrow_class_group(ring: &CubicRing) -> Result<AbelianGroupData> {
    Ok(class_data(ring)?.narrow)
}

/// Class group and narrow class group of a maximal order.
pub fn class_data(ring: &CubicRing) -> Result<ClassGroupData> {
    require_maximal(ring)?;
    class_data_unchecked(ring)
}

/// As [`class_data`] for a ring already known to be maximal.
pub fn class_data_unchecked(ring: &CubicRing) -> Result<ClassGroupData> {
    Engine::new(ring)?.run()
}

/// Factor base: every prime ideal of norm at most `bound`, together with
/// all primes above the same rational primes (needed for valuations).
pub(crate) struct PrimeTable {
    pub primes: Vec<PrimeIdeal>,
    /// Column of each prime in the factor base.
    pub column: Vec<Option<usize>>,
    /// Indices into `primes` grouped by rational prime.
    pub by_p: Vec<(u64, Vec<usize>)>,
    pub fb: Vec<usize>,
}

impl PrimeTable {
    pub fn new(ring: &CubicRing, bound: f64) -> Result<Self> {
        let mut primes = Vec::new();
        let mut by_p = Vec::new();
        for p in primes_up_to(bound.floor() as u64) {
            let ps = primes_above(ring, p)?;
            let start = primes.len();
            by_p.push((p, (start..start + ps.len()).collect()));
            primes.extend(ps);
        }
        let mut column = vec![None; primes.len()];
        let mut fb = Vec::new();
        for (i, q) in primes.iter().enumerate() {
            if (q.norm() as f64) <= bound {
                column[i] = Some(fb.len());
                fb.push(i);
            }
        }
        Ok(Self { primes, column, by_p, fb })
    }

    /// Factor-base exponent vector of `alpha`, or None if its norm is not
    /// smooth or it is divisible by a prime outside the factor base.
    pub fn factor(&self, ring: &CubicRing, alpha: IntElem) -> Option<Vec<i128>> {
        let mut n = ring.norm_int(alpha).checked_abs()?;
        if n == 0 {
            return None;
        }
        let mut out = vec![0i128; self.fb.len()];
        for (p, idx) in &self.by_p {
            let p = *p as i128;
            let mut k = 0u32;
            while n % p == 0 {
                n /= p;
                k += 1;
            }
            if k == 0 {
                continue;
            }
            let mut rest = k;
            for (pos, &i) in idx.iter().enumerate() {
                let q = &self.primes[i];
                let v = if pos + 1 == idx.len() {
                    if !rest.is_multiple_of(q.f) {
                        return None;
                    }
                    rest / q.f
                } else {
                    valuation_bounded(ring, q, alpha, rest)
                };
                rest -= v * q.f;
                if v > 0 {
                    out[self.column[i]?] = v as i128;
                }
            }
            if rest != 0 {
                return None;
            }
        }
        (n == 1).then_some(out)
    }
}

/// Sign bits of `alpha` at the real places, if they can be certified.
pub(crate) fn sign_bits(emb: &Embeddings, alpha: IntElem) -> Option<Vec<i128>> {
    emb.real
        .iter()
        .map(|&(w, t)| {
            let terms = [alpha[0] as f64, alpha[1] as f64 * w, alpha[2] as f64 * t];
            let v: f64 = terms.iter().sum();
            let err = 1e-10 * terms.iter().map(|x| x.abs()).sum::<f64>();
            (v.abs() > err).then_some((v < 0.0) as i128)
        })
        .collect()
}

/// Invariant factors and generators from a cyclic decomposition.
fn chain_with_generators(orders: &[i128], gens: &[Vec<i128>], modulus: i128) -> AbelianGroupData {
    let divisors = invariant_chain(orders);
    if divisors.is_empty() {
        return AbelianGroupData::trivial();
    }
    let len = divisors.len();
    let width = gens.first().map_or(0, |g| g.len());
    let mut out = vec![vec![0i128; width]; len];
    // split each cyclic factor into prime-power parts
    let mut parts: Vec<(u64, u32, Vec<i128>)> = Vec::new();
    for (o, g) in orders.iter().zip(gens) {
        if *o <= 1 {
            continue;
        }
        for (p, e) in factor(*o) {
            let pe = (p as i128).pow(e);
            let cof = o / pe;
            parts.push((p, e, g.iter().map(|x| (x * cof).rem_euclid(modulus)).collect()));
        }
    }
    let mut primes: Vec<u64> = parts.iter().map(|x| x.0).collect();
    primes.sort_unstable();
    primes.dedup();
    for p in primes {
        let mut ps: Vec<&(u64, u32, Vec<i128>)> = parts.iter().filter(|x| x.0 == p).collect();
        ps.sort_by(|a, b| b.1.cmp(&a.1));
        for (slot, part) in ps.into_iter().enumerate() {
            let target = &mut out[len - 1 - slot];
            for (t, x) in target.iter_mut().zip(&part.2) {
                *t = (*t + x).rem_euclid(modulus);
            }
        }
    }
    AbelianGroupData {
        divisors,
        generators: out.into_iter().map(|g| g.into_iter().map(|x| x as i64).collect()).collect(),
    }
}

fn group_of(e: &mut Echelon) -> Option<AbelianGroupData> {
    e.normalize();
    let d = e.det()?;
    if d == 1 {
        return Some(AbelianGroupData::trivial());
    }
    let (orders, gens) = smith_mod(&e.matrix(), d);
    Some(chain_with_generators(&orders, &gens, d))
}

/// Small coefficient vectors, one per sign class, by increasing length.
fn small_combos() -> Vec<[i128; 3]> {
    let r = COMBO_RANGE;
    let mut v = Vec::new();
    for x in -r..=r {
        for y in -r..=r {
            for z in -r..=r {
                let c = [x, y, z];
                if c.iter().find(|&&t| t != 0).is_some_and(|&t| t > 0) {
                    v.push(c);
                }
            }
        }
    }
    v.sort_by_key(|c| (c.iter().map(|t| t * t).sum::<i128>(), *c));
    v
}

struct Seed {
    basis: [IntElem; 3],
    cursor: usize,
}

struct Engine<'a> {
    ring: &'a CubicRing,
    emb: Embeddings,
    metric: Metric,
    table: PrimeTable,
    r1: usize,
    cl: Echelon,
    narrow: Echelon,
    seen: HashSet<IntElem>,
    seeds: Vec<Seed>,
    next_seed: usize,
    combos: Vec<[i128; 3]>,
    rng: ChaCha8Rng,
    relations: usize,
}

impl<'a> Engine<'a> {
    fn new(ring: &'a CubicRing) -> Result<Self> {
        let emb = ring.embeddings()?;
        let metric = Metric::t2(ring, &emb);
        let bound = minkowski_bound(ring).max(MIN_FACTOR_BASE_BOUND);
        let table = PrimeTable::new(ring, bound)?;
        let k = table.fb.len();
        let r1 = emb.real.len();
        let mut narrow = Echelon::new(k + r1);
        for i in 0..r1 {
            let mut v = vec![0; k + r1];
            v[k + i] = 2;
            narrow.insert(&v);
        }
        let mut minus_one = vec![0; k + r1];
        minus_one[k..].iter_mut().for_each(|x| *x = 1);
        narrow.insert(&minus_one);
        let f = ring.form();
        let seed = (f.a as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
            ^ (f.b as u64).rotate_left(16)
            ^ (f.c as u64).rotate_left(32)
            ^ (f.d as u64).rotate_left(48);
        let mut engine = Self {
            ring,
            emb,
            metric,
            table,
            r1,
            cl: Echelon::new(k),
            narrow,
            seen: HashSet::new(),
            seeds: Vec::new(),
            next_seed: 0,
            combos: small_combos(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            relations: 0,
        };
        engine.add_seed(IdealHNF::unit(ring));
        for i in 0..k {
            let ideal = engine.table.primes[engine.table.fb[i]].ideal.clone();
            engine.add_seed(ideal);
        }
        // (p) itself whenever every prime above p is in the factor base
        for (p, idx) in engine.table.by_p.clone() {
            if idx.iter().all(|&i| engine.table.column[i].is_some()) {
                engine.try_relation([p as i128, 0, 0]);
            }
        }
        Ok(engine)
    }

    fn add_seed(&mut self, ideal: IdealHNF) {
        let basis = lll(ideal.basis(), &self.metric);
        self.seeds.push(Seed { basis, cursor: 0 });
    }

    fn add_random_seed(&mut self) -> Result<()> {
        let k = self.table.fb.len();
        if k == 0 {
            return Ok(());
        }
        let count = self.rng.gen_range(2..=3);
        let mut ideal = IdealHNF::unit(self.ring);
        let cols: Vec<usize> = (0..k).collect();
        for _ in 0..count {
            let &c = cols.choose(&mut self.rng).unwrap();
            ideal = ideal_mul(&ideal, &self.table.primes[self.table.fb[c]].ideal)?;
        }
        if ideal.lattice_index() < 1 << 40 {
            self.add_seed(ideal);
        }
        Ok(())
    }

    fn try_relation(&mut self, alpha: IntElem) -> bool {
        let mut key = alpha;
        if key.iter().find(|&&t| t != 0).is_some_and(|&t| t < 0) {
            key = key.map(|t| -t);
        }
        if self.seen.contains(&key) {
            return false;
        }
        self.seen.insert(key);
        let Some(v) = self.table.factor(self.ring, alpha) else { return false };
        let Some(s) = sign_bits(&self.emb, alpha) else { return false };
        let mut aug = v.clone();
        aug.extend(s);
        self.cl.insert(&v);
        self.narrow.insert(&aug);
        self.relations += 1;
        true
    }

    /// Next candidate element, cycling through the seed lattices.
    fn next_candidate(&mut self) -> Result<Option<IntElem>> {
        for _ in 0..2 {
            for _ in 0..self.seeds.len() {
                let s = self.next_seed % self.seeds.len();
                self.next_seed += 1;
                let seed = &mut self.seeds[s];
                if seed.cursor < self.combos.len() {
                    let c = self.combos[seed.cursor];
                    seed.cursor += 1;
                    let b = seed.basis;
                    return Ok(Some([0, 1, 2].map(|r| c[0] * b[0][r] + c[1] * b[1][r] + c[2] * b[2][r])));
                }
            }
            for _ in 0..4 {
                self.add_random_seed()?;
            }
        }
        Ok(None)
    }

    fn batch(&mut self, size: usize) -> Result<()> {
        let mut found = 0;
        let mut tries = 0;
        let limit = 400 * size.max(1);
        while found < size && tries < limit {
            tries += 1;
            let Some(alpha) = self.next_candidate()? else { break };
            if self.try_relation(alpha) {
                found += 1;
            }
        }
        Ok(())
    }

    fn run(mut self) -> Result<ClassGroupData> {
        let k = self.table.fb.len();
        let batch = k / 2 + 4;
        let mut last: Option<(AbelianGroupData, AbelianGroupData)> = None;
        let mut stable = 0;
        for round in 0..MAX_BATCHES {
            if round > 0 || !self.cl.is_full_rank() {
                self.batch(if round == 0 { k + 4 } else { batch })?;
            }
            if !self.cl.is_full_rank() {
                continue;
            }
            let (Some(cl), Some(nar)) = (group_of(&mut self.cl), group_of(&mut self.narrow)) else {
                continue;
            };
            let minimal = cl.is_trivial() && (nar.is_trivial() || self.ring.signature() == Signature::Complex);
            let current = (cl, nar);
            if last.as_ref() == Some(&current) {
                stable += 1;
            } else {
                stable = 0;
            }
            last = Some(current);
            if minimal || stable >= STABLE_BATCHES {
                let (class_group, narrow) = last.unwrap();
                return Ok(ClassGroupData {
                    class_group,
                    narrow,
                    factor_base: self.table.fb.iter().map(|&i| self.table.primes[i].clone()).collect(),
                    relations: self.relations,
                    batches: round + 1,
                });
            }
        }
        let _ = self.r1;
        Err(Error::RelationDeficit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::BinaryCubicForm;
    use crate::rings::ring_from_form;

    #[test]
    fn minkowski_examples() {
        let m = |f: BinaryCubicForm| minkowski_bound(&ring_from_form(&f));
        assert!((m(BinaryCubicForm::new(1, 0, -1, 1)) - 1.357).abs() < 1e-3);
        assert!((m(BinaryCubicForm::new(1, 1, -2, -1)) - 1.556).abs() < 1e-3);
        let r229 = ring_from_form(&BinaryCubicForm::new(1, 0, -4, 1));
        assert_eq!(r229.disc(), 229);
        assert!((minkowski_bound(&r229) - 3.363).abs() < 1e-3);
    }

    #[test]
    fn two_torsion() {
        assert_eq!(two_torsion_size(&AbelianGroupData::trivial()), 1);
        assert_eq!(two_torsion_size(&AbelianGroupData::from_divisors(vec![2])), 2);
        assert_eq!(two_torsion_size(&AbelianGroupData::from_divisors(vec![2, 6])), 4);
    }

    #[test]
    fn small_fields_are_trivial() {
        for f in [BinaryCubicForm::new(1, 0, -1, 1), BinaryCubicForm::new(1, 1, -2, -1)] {
            let r = ring_from_form(&f);
            let d = class_data(&r).unwrap();
            assert!(d.class_group.is_trivial(), "{f}");
            assert!(d.narrow.is_trivial(), "{f}");
        }
        // the smallest totally real cubic field whose units miss a sign pattern
        let d = class_data(&ring_from_form(&BinaryCubicForm::new(1, 0, -4, 1))).unwrap();
        assert!(d.class_group.is_trivial());
        assert_eq!(d.narrow.divisors, vec![2]);
    }

    #[test]
    fn refuses_non_maximal() {
        let r = ring_from_form(&BinaryCubicForm::new(1, 0, 0, 8));
        assert_eq!(class_group(&r), Err(Error::NotMaximal));
    }
}
