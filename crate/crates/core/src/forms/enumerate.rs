//! Enumeration of `GL_2(Z)`-classes of binary cubic forms by discriminant.
//!
//! Two interchangeable strategies: a scan of a coefficient box that contains
//! every canonical representative (deduplicated through `canonical_form`),
//! and a traversal that only walks forms whose covariant is already reduced.

use std::collections::BTreeSet;

use rayon::prelude::*;

use super::local::LocalCondition;
use super::reduce::{canonical_form, is_canonical};
use super::{is_irreducible, is_maximal, BinaryCubicForm};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnumerationStrategy {
    BoxScan,
    ReducedTraversal,
}

/// Window `dmin < disc <= dmax` plus filters.
#[derive(Debug, Clone)]
pub struct EnumerationRequest {
    pub dmin: i128,
    pub dmax: i128,
    pub conditions: Vec<LocalCondition>,
    pub require_maximal: bool,
    pub require_irreducible: bool,
}

impl EnumerationRequest {
    pub fn new(dmin: i128, dmax: i128) -> Self {
        Self {
            dmin,
            dmax,
            conditions: Vec::new(),
            require_maximal: false,
            require_irreducible: false,
        }
    }

    pub fn maximal_irreducible(dmin: i128, dmax: i128) -> Self {
        Self {
            require_maximal: true,
            require_irreducible: true,
            ..Self::new(dmin, dmax)
        }
    }

    fn in_window(&self, disc: i128) -> bool {
        disc != 0 && self.dmin < disc && disc <= self.dmax
    }

    fn accepts(&self, f: &BinaryCubicForm) -> bool {
        if self.require_irreducible && !is_irreducible(f) {
            return false;
        }
        if self.require_maximal
            && (f.content() != 1 || !is_maximal(f).unwrap_or(false)) {
                return false;
            }
        self.conditions.iter().all(|c| c.holds(f))
    }
}

/// Coefficient box `(|b|, |c|, |d|)` bounds containing every canonical form
/// with leading coefficient `a` and `0 < sign * disc <= x`.
pub fn box_bounds(positive: bool, a: i64, x: f64) -> (i64, i64, i64) {
    let af = a as f64;
    let ceil = |v: f64| v.ceil() as i64 + 1;
    if positive {
        if a == 0 {
            // f = y (b x^2 + c x y + d y^2), Hessian leading term b^2 <= sqrt(x)
            let b = x.powf(0.25);
            return (ceil(b), ceil(b), ceil((1.0 + x) / 4.0));
        }
        // P >= 3/2 a^{2/3} D^{1/3}, P <= sqrt(D), R <= (3D + P^2) / 4P
        let pmin = 1.5 * af.powf(2.0 / 3.0) * x.cbrt();
        let rmax = (3.0 * x / (4.0 * pmin) + pmin / 4.0).max(x.sqrt());
        let dmax = (rmax / (1.5 * x.cbrt())).powf(1.5);
        let pmax = x.sqrt();
        // b^2 <= P + 3a|c|, c^2 <= R + 3|b||d|
        let (mut b, mut c) = (1e12f64, 1e12f64);
        for _ in 0..200 {
            b = (pmax + 3.0 * af * c).sqrt();
            c = (rmax + 3.0 * b * dmax).sqrt();
        }
        (ceil(b), ceil(c), ceil(dmax))
    } else {
        if a == 0 {
            // |D| = b^2 (4bd - c^2) >= 3 b^4 with 0 <= c <= b <= d
            let b = (x / 3.0).powf(0.25);
            return (ceil(b), ceil(b), ceil((x + b * b) / 4.0));
        }
        // |D| = 4 a^4 |alpha - beta|^4 Im(beta)^2, beta reduced
        let k = x / (4.0 * af.powi(4));
        let w = ((k / 0.75).sqrt() - 0.75).max(0.0).sqrt();
        let umax = k.cbrt();
        let b = af * (1.5 + w);
        let c = af * (0.75 + w + umax);
        let d = af * (0.5 + w) * (0.25 + umax);
        (ceil(b), ceil(c), ceil(d))
    }
}

fn max_leading(positive: bool, x: f64) -> i64 {
    let v = if positive {
        (64.0 * x / 729.0).powf(0.25)
    } else {
        (16.0 * x / 27.0).powf(0.25)
    };
    v.floor() as i64 + 1
}

fn signs(req: &EnumerationRequest) -> Vec<(bool, f64)> {
    let mut out = Vec::new();
    if req.dmax > 0 {
        out.push((true, req.dmax as f64));
    }
    if req.dmin < -1 {
        out.push((false, (-(req.dmin + 1)) as f64));
    }
    out
}

fn scan_box(req: &EnumerationRequest) -> Vec<BinaryCubicForm> {
    let mut jobs = Vec::new();
    for (positive, x) in signs(req) {
        for a in 0..=max_leading(positive, x) {
            if a == 0 && req.require_irreducible {
                continue;
            }
            jobs.push((positive, x, a));
        }
    }
    let found: Vec<BTreeSet<BinaryCubicForm>> = jobs
        .par_iter()
        .map(|&(positive, x, a)| {
            let (bb, cb, db) = box_bounds(positive, a, x);
            let mut set = BTreeSet::new();
            for b in -bb..=bb {
                for c in -cb..=cb {
                    for d in -db..=db {
                        let f = BinaryCubicForm::new(a, b, c, d);
                        let disc = f.disc();
                        if !req.in_window(disc) || (disc > 0) != positive {
                            continue;
                        }
                        let (g, _) = canonical_form(&f).expect("nondegenerate");
                        set.insert(g);
                    }
                }
            }
            set
        })
        .collect();
    let all: BTreeSet<BinaryCubicForm> = found.into_iter().flatten().collect();
    all.into_iter().filter(|f| req.accepts(f)).collect()
}

/// Closed interval of real `t` with `q2 t^2 + q1 t + q0 >= 0`, `q2 < 0`.
fn concave_interval(q2: f64, q1: f64, q0: f64) -> Option<(f64, f64)> {
    let disc = q1 * q1 - 4.0 * q2 * q0;
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    let r1 = (-q1 + s) / (2.0 * q2);
    let r2 = (-q1 - s) / (2.0 * q2);
    Some((r1.min(r2), r1.max(r2)))
}

fn traverse_leading(req: &EnumerationRequest, positive: bool, x: f64, a: i64) -> Vec<BinaryCubicForm> {
    let mut out = Vec::new();
    let visit = |f: BinaryCubicForm, out: &mut Vec<BinaryCubicForm>| {
        let disc = f.disc();
        if req.in_window(disc) && (disc > 0) == positive && is_canonical(&f) && req.accepts(&f) {
            out.push(f);
        }
    };
    let af = a as f64;
    if a == 0 {
        // f = y (b x^2 + c x y + d y^2); disc = b^2 (c^2 - 4 b d)
        let bmax = if positive { x.powf(0.25) } else { (x / 3.0).powf(0.25) } as i64 + 1;
        for b in 1..=bmax {
            for c in -b..=b {
                let (b3, base) = (4 * (b as i128).pow(3), (b as i128 * c as i128).pow(2));
                // dmin < base - b3 d <= dmax
                let lo = (base - req.dmax + b3 - 1).div_euclid(b3);
                let hi = (base - req.dmin - 1).div_euclid(b3);
                for d in lo..=hi {
                    visit(BinaryCubicForm::new(0, b, c, d as i64), &mut out);
                }
            }
        }
        return out;
    }
    let (bb, cb, db) = box_bounds(positive, a, x);
    if positive {
        let sx = x.sqrt();
        for b in -bb..=bb {
            let b2 = b * b;
            // 1 <= P = b^2 - 3ac <= sqrt(x)
            let clo = ((b2 as f64 - sx) / (3.0 * af)).ceil() as i64;
            let chi = (b2 - 1).div_euclid(3 * a);
            for c in clo.max(-cb)..=chi.min(cb) {
                let p = b2 - 3 * a * c;
                // 0 <= Q = bc - 9ad <= P
                let bc = b * c;
                let dlo = (bc - p).div_euclid(9 * a) + if (bc - p).rem_euclid(9 * a) == 0 { 0 } else { 1 };
                let dhi = bc.div_euclid(9 * a);
                for d in dlo.max(-db)..=dhi.min(db) {
                    if c * c - 3 * b * d < p {
                        continue;
                    }
                    visit(BinaryCubicForm::new(a, b, c, d), &mut out);
                }
            }
        }
    } else {
        let a2 = af * af;
        for b in -bb..=bb {
            let bf = b as f64;
            // reduced covariant has Re(beta) in [-1/2, 0], so the real root
            // alpha = -b/a - 2 Re(beta) lies in [-b/a, -b/a + 1]
            let (al, ah) = (-bf / af, -bf / af + 1.0);
            for c in -cb..=cb {
                let cf = c as f64;
                // d = -alpha c + 2 a alpha^2 s with s = Re(beta) in [-1/2, 0]
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                let mut cand = vec![al, ah];
                let vtx = -cf / (2.0 * af);
                if vtx > al && vtx < ah {
                    cand.push(vtx);
                }
                for &t in &cand {
                    for v in [-t * cf, -t * cf - af * t * t] {
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                }
                // disc(d) = -27a^2 d^2 + (18abc - 4b^3) d + (b^2c^2 - 4ac^3) > dmin
                let q1 = 18.0 * af * bf * cf - 4.0 * bf * bf * bf;
                let q0 = bf * bf * cf * cf - 4.0 * af * cf * cf * cf - req.dmin as f64;
                let Some((r1, r2)) = concave_interval(-27.0 * a2, q1, q0) else {
                    continue;
                };
                let dlo = lo.max(r1).floor() as i64 - 1;
                let dhi = hi.min(r2).ceil() as i64 + 1;
                for d in dlo.max(-db)..=dhi.min(db) {
                    visit(BinaryCubicForm::new(a, b, c, d), &mut out);
                }
            }
        }
    }
    out
}

fn traverse(req: &EnumerationRequest) -> Vec<BinaryCubicForm> {
    let mut jobs = Vec::new();
    for (positive, x) in signs(req) {
        for a in 0..=max_leading(positive, x) {
            if a == 0 && req.require_irreducible {
                continue;
            }
            jobs.push((positive, x, a));
        }
    }
    jobs.par_iter()
        .flat_map_iter(|&(positive, x, a)| traverse_leading(req, positive, x, a))
        .collect()
}

/// One canonical representative per class with `dmin < disc <= dmax`
/// passing the filters, sorted by `|disc|` then coefficients.
pub fn enumerate_forms(req: &EnumerationRequest, strategy: EnumerationStrategy) -> Vec<BinaryCubicForm> {
    let mut v = match strategy {
        EnumerationStrategy::BoxScan => scan_box(req),
        EnumerationStrategy::ReducedTraversal => traverse(req),
    };
    v.sort_by_key(|f| (f.disc().abs(), *f));
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn discs(v: &[BinaryCubicForm]) -> Vec<i128> {
        v.iter().map(|f| f.disc()).collect()
    }

    #[test]
    fn small_windows() {
        for s in [EnumerationStrategy::BoxScan, EnumerationStrategy::ReducedTraversal] {
            let pos = enumerate_forms(&EnumerationRequest::maximal_irreducible(0, 100), s);
            assert_eq!(discs(&pos), vec![49, 81]);
            let neg = enumerate_forms(&EnumerationRequest::maximal_irreducible(-50, 0), s);
            assert_eq!(discs(&neg), vec![-23, -31, -44]);
            assert!(enumerate_forms(&EnumerationRequest::maximal_irreducible(0, 20), s).is_empty());
        }
    }

    #[test]
    fn strategies_agree_including_reducible_and_nonmaximal() {
        let req = EnumerationRequest::new(-400, 400);
        let a = enumerate_forms(&req, EnumerationStrategy::BoxScan);
        let b = enumerate_forms(&req, EnumerationStrategy::ReducedTraversal);
        assert_eq!(a, b);
        assert!(a.iter().any(|f| !is_irreducible(f)));
    }
}
