//! Brute-force class groups for small discriminants.
//!
//! Breadth-first search over the classes generated by the prime ideals below
//! the Minkowski bound (and, for the narrow group, the sign vectors at the
//! real places). Two pairs `(J, s')`, `(K, s)` are identified when `J K'` has
//! a generator whose signs, times `s s'`, are signs of a unit; here `K'` is
//! an integral ideal with `K K'` generated by a positive rational integer.
//! The group structure is read off from element orders, so nothing here
//! depends on the relation lattice.

use std::collections::HashSet;

use super::ideal::{ideal_mul, ideal_pow, primes_above, IdealHNF};
use super::relations::AbelianGroupData;
use super::units::{signed_generator, unit_group, UnitGroupData};
use crate::arith::{factor, primes_up_to};
use crate::error::Result;
use crate::rings::{CubicRing, Signature};

#[derive(Clone)]
struct Node {
    ideal: IdealHNF,
    conj: IdealHNF,
    /// Bit `i` set when the sign at real place `i` is negative.
    sign: u32,
}

struct Search<'a> {
    ring: &'a CubicRing,
    units: UnitGroupData,
    narrow: bool,
    unit_signs: HashSet<u32>,
}

impl Search<'_> {
    fn same_class(&self, a: &Node, b: &Node) -> Result<bool> {
        let prod = ideal_mul(&a.ideal, &b.conj)?;
        let Some((_, signs)) = signed_generator(self.ring, &self.units, &prod)? else {
            return Ok(false);
        };
        if !self.narrow {
            return Ok(true);
        }
        let g = mask(&signs);
        Ok(self.unit_signs.contains(&(g ^ a.sign ^ b.sign)))
    }
}

fn mask(signs: &[i8]) -> u32 {
    signs.iter().enumerate().filter(|(_, &s)| s < 0).map(|(i, _)| 1 << i).sum()
}

/// The class group, or with `narrow` the narrow class group, of a maximal
/// order by exhaustive search. Practical for `|disc|` up to a few thousand.
pub fn brute_force_class_group(ring: &CubicRing, narrow: bool) -> Result<AbelianGroupData> {
    let units = unit_group(ring)?;
    let nreal = if ring.signature() == Signature::TotallyReal { 3 } else { 1 };

    let mut unit_signs = HashSet::from([0u32]);
    let mut sign_gens = vec![(1u32 << nreal) - 1];
    sign_gens.extend(units.signs.iter().map(|s| mask(s)));
    for g in sign_gens {
        let more: Vec<u32> = unit_signs.iter().map(|&m| m ^ g).collect();
        unit_signs.extend(more);
    }

    let one = IdealHNF::unit(ring);
    let s = if ring.signature() == Signature::Complex { 1 } else { 0 };
    let bound = (2.0 / 9.0) * (4.0 / std::f64::consts::PI).powi(s) * (ring.disc() as f64).abs().sqrt();
    let mut gens = Vec::new();
    for p in primes_up_to(bound.floor() as u64) {
        let above = primes_above(ring, p)?;
        for (i, pr) in above.iter().enumerate() {
            if pr.norm() as f64 > bound {
                continue;
            }
            let mut conj = ideal_pow(&pr.ideal, pr.e - 1)?;
            for (j, q) in above.iter().enumerate() {
                if j != i {
                    conj = ideal_mul(&conj, &ideal_pow(&q.ideal, q.e)?)?;
                }
            }
            gens.push(Node { ideal: pr.ideal.clone(), conj, sign: 0 });
        }
    }
    if narrow {
        for i in 0..nreal {
            gens.push(Node { ideal: one.clone(), conj: one.clone(), sign: 1 << i });
        }
    }

    let search = Search { ring, units, narrow, unit_signs };
    let mut nodes = vec![Node { ideal: one.clone(), conj: one, sign: 0 }];
    // word[i]: generator indices whose product is node i
    let mut word: Vec<Vec<usize>> = vec![Vec::new()];
    let mut table: Vec<Vec<usize>> = Vec::new();
    let mut i = 0;
    while i < nodes.len() {
        let mut row = Vec::with_capacity(gens.len());
        for (gi, g) in gens.iter().enumerate() {
            let cand = Node {
                ideal: ideal_mul(&nodes[i].ideal, &g.ideal)?,
                conj: ideal_mul(&nodes[i].conj, &g.conj)?,
                sign: nodes[i].sign ^ g.sign,
            };
            let mut hit = None;
            for (j, node) in nodes.iter().enumerate() {
                if search.same_class(&cand, node)? {
                    hit = Some(j);
                    break;
                }
            }
            let j = match hit {
                Some(j) => j,
                None => {
                    let mut w = word[i].clone();
                    w.push(gi);
                    nodes.push(cand);
                    word.push(w);
                    nodes.len() - 1
                }
            };
            row.push(j);
        }
        table.push(row);
        i += 1;
    }

    let apply = |x: usize, start: usize| word[x].iter().fold(start, |c, &g| table[c][g]);
    let orders: Vec<u64> = (0..nodes.len())
        .map(|x| {
            let (mut cur, mut k) = (apply(x, 0), 1u64);
            while cur != 0 {
                cur = apply(x, cur);
                k += 1;
            }
            k
        })
        .collect();
    Ok(structure_from_orders(&orders))
}

/// Invariant factors of a finite abelian group from the multiset of its
/// element orders.
pub(crate) fn structure_from_orders(orders: &[u64]) -> AbelianGroupData {
    let n = orders.len() as i128;
    // per prime, the orders p^a of the cyclic p-parts, largest first
    let mut parts: Vec<Vec<u64>> = Vec::new();
    for (p, _) in factor(n) {
        let mut k = 0u32;
        let mut prev = 1usize;
        let mut ge: Vec<usize> = Vec::new();
        loop {
            k += 1;
            let pk = p.pow(k);
            let c = orders.iter().filter(|&&o| pk % o == 0).count();
            if c == prev {
                break;
            }
            let mut r = 0;
            let mut q = c / prev;
            while q > 1 {
                q /= p as usize;
                r += 1;
            }
            ge.push(r);
            prev = c;
        }
        // ge[k-1] = number of cyclic factors of order >= p^k
        let count = ge.first().copied().unwrap_or(0);
        let mut cyc = Vec::with_capacity(count);
        for idx in 0..count {
            let a = ge.iter().filter(|&&g| g > idx).count() as u32;
            cyc.push(p.pow(a));
        }
        parts.push(cyc);
    }
    let len = parts.iter().map(Vec::len).max().unwrap_or(0);
    let mut divisors: Vec<u64> =
        (0..len).map(|i| parts.iter().map(|c| c.get(i).copied().unwrap_or(1)).product()).collect();
    divisors.reverse();
    AbelianGroupData::from_divisors(divisors)
}
