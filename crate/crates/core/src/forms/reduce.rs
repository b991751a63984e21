//! Canonical orbit representatives via reduction of a quadratic covariant.
//!
//! Positive discriminant: the Hessian is positive definite and is
//! Gauss-reduced exactly. Negative discriminant: the definite quadratic factor
//! carrying the complex-conjugate root pair is reduced (exactly when the form
//! has a rational root, in floating point otherwise; an irreducible form never
//! puts that factor on the boundary of the reduced domain). Among all orbit
//! members whose covariant is reduced, the lexicographically greatest
//! coefficient vector is the representative.

use std::sync::OnceLock;

use super::{act_form, BinaryCubicForm, Unimodular2};
use crate::error::{Error, Result};
use crate::numeric::cubic_roots;

/// Binary quadratic form `p x^2 + q x y + r y^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadForm<T> {
    pub p: T,
    pub q: T,
    pub r: T,
}

impl<T> QuadForm<T> {
    pub const fn new(p: T, q: T, r: T) -> Self {
        Self { p, q, r }
    }
}

pub trait Coef:
    Copy
    + PartialOrd
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Neg<Output = Self>
{
    fn from_i64(x: i64) -> Self;
    fn zero() -> Self {
        Self::from_i64(0)
    }
    /// Nearest integer to `-q / (2 p)`, `p > 0`.
    fn translation(q: Self, p: Self) -> i64;
}

impl Coef for i128 {
    fn from_i64(x: i64) -> Self {
        x as i128
    }
    fn translation(q: Self, p: Self) -> i64 {
        // round(-q / 2p) with ties toward +inf
        let num = p - q;
        (num.div_euclid(2 * p)) as i64
    }
}

impl Coef for f64 {
    fn from_i64(x: i64) -> Self {
        x as f64
    }
    fn translation(q: Self, p: Self) -> i64 {
        (-q / (2.0 * p)).round() as i64
    }
}

impl<T: Coef> QuadForm<T> {
    /// The form `v -> self(v g)`.
    pub fn compose(&self, g: &Unimodular2) -> Self {
        let [r, s, t, u] = g.entries().map(T::from_i64);
        let two = T::from_i64(2);
        QuadForm {
            p: self.p * r * r + self.q * r * s + self.r * s * s,
            q: two * self.p * r * t + self.q * (r * u + s * t) + two * self.r * s * u,
            r: self.p * t * t + self.q * t * u + self.r * u * u,
        }
    }

    /// Gauss-reduced for `GL_2(Z)`: `0 <= q <= p <= r`.
    pub fn is_reduced(&self) -> bool {
        T::zero() <= self.q && self.q <= self.p && self.p <= self.r
    }
}

/// Reduce a positive definite form to `0 <= q <= p <= r`. Returns the reduced
/// form and `g` with `reduced = form.compose(g)`.
pub fn gauss_reduce<T: Coef>(form: QuadForm<T>) -> (QuadForm<T>, Unimodular2) {
    let mut f = form;
    let mut acc = Unimodular2::IDENTITY;
    let swap = Unimodular2::new(0, 1, 1, 0).unwrap();
    for _ in 0..10_000 {
        let k = T::translation(f.q, f.p);
        if k != 0 {
            let step = Unimodular2::new(1, 0, k, 1).unwrap();
            f = f.compose(&step);
            acc = step.mul(&acc);
        }
        if f.p > f.r {
            f = f.compose(&swap);
            acc = swap.mul(&acc);
        } else {
            break;
        }
    }
    if f.q < T::zero() {
        let flip = Unimodular2::new(1, 0, 0, -1).unwrap();
        f = f.compose(&flip);
        acc = flip.mul(&acc);
    }
    (f, acc)
}

/// Relative slack for floating-point boundary decisions.
const FLOAT_EPS: f64 = 1e-9;

enum Covariant {
    Exact(QuadForm<i128>),
    Approx(QuadForm<f64>),
}

/// Exact quotient of `f` by a primitive linear factor through a rational
/// projective root, if one exists; returned quadratic has positive leading
/// coefficient (up to global sign of f).
fn rational_quadratic_factor(f: &BinaryCubicForm) -> Option<QuadForm<i128>> {
    let (a, b, c, d) = (f.a as i128, f.b as i128, f.c as i128, f.d as i128);
    if a == 0 {
        return Some(QuadForm::new(b, c, d));
    }
    if d == 0 {
        // x (a x^2 + b x y + c y^2)
        return Some(QuadForm::new(a, b, c));
    }
    let roots = cubic_roots(a as f64, b as f64, c as f64, d as f64, -1);
    let r = roots.real[0];
    for q in crate::arith::divisors(a) {
        let p = (r * q as f64).round() as i128;
        if f.eval(p, q) == 0 {
            // f = (q x - p y)(A x^2 + B x y + C y^2)
            let qa = a / q;
            let qb = (b + p * qa) / q;
            let qc = (c + p * qb) / q;
            return Some(QuadForm::new(qa, qb, qc));
        }
    }
    None
}

fn covariant(f: &BinaryCubicForm, disc: i128) -> Covariant {
    if disc > 0 {
        return Covariant::Exact(f.hessian());
    }
    let exact = if f.a == 0 || f.d == 0 || !super::is_irreducible(f) {
        rational_quadratic_factor(f)
    } else {
        None
    };
    match exact {
        Some(q) => {
            let q = if q.p < 0 {
                QuadForm::new(-q.p, -q.q, -q.r)
            } else {
                q
            };
            Covariant::Exact(q)
        }
        None => {
            let roots = cubic_roots(f.a as f64, f.b as f64, f.c as f64, f.d as f64, -1);
            let (re, im) = roots.complex.expect("negative discriminant has a complex pair");
            Covariant::Approx(QuadForm::new(1.0, -2.0 * re, re * re + im * im))
        }
    }
}

fn float_margin(q: &QuadForm<f64>) -> f64 {
    let s = q.p.abs();
    (q.q / s).min((q.p - q.q) / s).min((q.r - q.p) / s)
}

/// Whether the covariant of `f` counts as reduced for canonicalisation.
fn covariant_reduced(f: &BinaryCubicForm, disc: i128) -> bool {
    match covariant(f, disc) {
        Covariant::Exact(q) => q.is_reduced(),
        Covariant::Approx(q) => float_margin(&q) >= -FLOAT_EPS,
    }
}

/// All 2x2 matrices with entries in {-1, 0, 1} and determinant +-1.
fn small_unimodular() -> &'static [Unimodular2] {
    static CELL: OnceLock<Vec<Unimodular2>> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut v = Vec::new();
        for r in -1..=1 {
            for s in -1..=1 {
                for t in -1..=1 {
                    for u in -1..=1 {
                        if let Ok(g) = Unimodular2::new(r, s, t, u) {
                            v.push(g);
                        }
                    }
                }
            }
        }
        v
    })
}

/// Canonical representative of the `GL_2(Z)`-orbit of `f` and a witness `g`
/// with `act_form(g, f) == representative`.
pub fn canonical_form(f: &BinaryCubicForm) -> Result<(BinaryCubicForm, Unimodular2)> {
    let disc = f.disc();
    if disc == 0 {
        return Err(Error::DegenerateForm);
    }
    let g0 = match covariant(f, disc) {
        Covariant::Exact(q) => gauss_reduce(q).1,
        Covariant::Approx(q) => gauss_reduce(q).1,
    };
    let f0 = act_form(&g0, f);
    let mut best = (f0, g0);
    let mut found = false;
    for delta in small_unimodular() {
        let cand = act_form(delta, &f0);
        if !covariant_reduced(&cand, disc) {
            continue;
        }
        if !found || cand > best.0 {
            best = (cand, delta.mul(&g0));
            found = true;
        }
    }
    debug_assert!(found, "reduced starting point must be a candidate");
    Ok(best)
}

/// Whether `f` is its own canonical representative. Cheap for forms whose
/// covariant is strictly inside the reduced domain.
pub fn is_canonical(f: &BinaryCubicForm) -> bool {
    let disc = f.disc();
    if disc == 0 {
        return false;
    }
    let interior = match covariant(f, disc) {
        Covariant::Exact(q) => {
            if !q.is_reduced() {
                return false;
            }
            0 < q.q && q.q < q.p && q.p < q.r
        }
        Covariant::Approx(q) => {
            let m = float_margin(&q);
            if m < -4.0 * FLOAT_EPS {
                return false;
            }
            m > 4.0 * FLOAT_EPS
        }
    };
    if interior {
        *f >= f.neg()
    } else {
        canonical_form(f).map(|(g, _)| g == *f).unwrap_or(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_reduction_of_integer_forms() {
        let (r, g) = gauss_reduce(QuadForm::new(5i128, 4, 1));
        assert_eq!(r, QuadForm::new(1, 0, 1));
        assert_eq!(QuadForm::new(5i128, 4, 1).compose(&g), r);
        let (r, _) = gauss_reduce(QuadForm::new(7i128, -13, 7));
        assert!(r.is_reduced());
        assert_eq!(r.q * r.q - 4 * r.p * r.r, 169 - 196);
    }

    #[test]
    fn hessian_is_covariant() {
        let f = BinaryCubicForm::new(2, -3, 5, 7);
        for g in small_unimodular() {
            let lhs = act_form(g, &f).hessian();
            let rhs = f.hessian().compose(g);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn canonical_is_idempotent_with_identity_witness() {
        let f = BinaryCubicForm::new(1, 1, -2, -1);
        let (g, _) = canonical_form(&f).unwrap();
        let (g2, w2) = canonical_form(&g).unwrap();
        assert_eq!(g2, g);
        assert_eq!(act_form(&w2, &g), g);
        assert!(is_canonical(&g));
    }

    #[test]
    fn canonical_witness_maps_form_to_representative() {
        for f in [
            BinaryCubicForm::new(1, 0, 0, 2),
            BinaryCubicForm::new(3, 6, 6, 2),
            BinaryCubicForm::new(2, -3, 2, -3),
            BinaryCubicForm::new(0, 1, -1, 0),
        ] {
            let (g, w) = canonical_form(&f).unwrap();
            assert_eq!(act_form(&w, &f), g);
        }
    }

    #[test]
    fn negative_discriminant_uses_complex_pair() {
        let (g, _) = canonical_form(&BinaryCubicForm::new(1, 0, 0, 2)).unwrap();
        assert_eq!(g.disc(), -108);
        assert!(g.a > 0);
        let (h, _) = canonical_form(&BinaryCubicForm::new(3, 6, 6, 2)).unwrap();
        assert_eq!(g, h);
    }

    #[test]
    fn degenerate_rejected() {
        assert_eq!(
            canonical_form(&BinaryCubicForm::new(1, 0, 0, 0)),
            Err(Error::DegenerateForm)
        );
    }
}
