//! Integral binary cubic forms and the twisted `GL_2(Z)` action on them.
//!
//! A form `a x^3 + b x^2 y + c x y^2 + d y^3` is stored with `i64`
//! coefficients; discriminants and intermediate products use `i128`.

mod enumerate;
mod local;
mod reduce;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::cubic_roots;

pub use enumerate::{box_bounds, enumerate_forms, EnumerationStrategy, EnumerationRequest};
pub use local::{
    is_p_maximal, is_maximal, local_density, splitting_type_mod_p, ConditionKind, LocalCondition,
    SplittingType, DEFAULT_DENSITY_BUDGET,
};
pub use reduce::{canonical_form, gauss_reduce, is_canonical, QuadForm};
pub(crate) use local::projective_roots_mod_p;

/// An integral binary cubic form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BinaryCubicForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl BinaryCubicForm {
    pub const fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        Self { a, b, c, d }
    }

    pub fn coeffs(&self) -> [i64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// `b^2 c^2 - 4 a c^3 - 4 b^3 d - 27 a^2 d^2 + 18 a b c d`, exactly.
    pub fn disc(&self) -> i128 {
        let (a, b, c, d) = (self.a as i128, self.b as i128, self.c as i128, self.d as i128);
        b * b * c * c - 4 * a * c * c * c - 4 * b * b * b * d - 27 * a * a * d * d
            + 18 * a * b * c * d
    }

    pub fn is_degenerate(&self) -> bool {
        self.disc() == 0
    }

    pub fn neg(&self) -> Self {
        Self::new(-self.a, -self.b, -self.c, -self.d)
    }

    /// Evaluate at an integer point.
    pub fn eval(&self, x: i128, y: i128) -> i128 {
        let (a, b, c, d) = (self.a as i128, self.b as i128, self.c as i128, self.d as i128);
        a * x * x * x + b * x * x * y + c * x * y * y + d * y * y * y
    }

    /// The Hessian covariant `(b^2-3ac) x^2 + (bc-9ad) xy + (c^2-3bd) y^2`.
    pub fn hessian(&self) -> QuadForm<i128> {
        let (a, b, c, d) = (self.a as i128, self.b as i128, self.c as i128, self.d as i128);
        QuadForm::new(b * b - 3 * a * c, b * c - 9 * a * d, c * c - 3 * b * d)
    }

    /// Content: gcd of the four coefficients.
    pub fn content(&self) -> i128 {
        self.coeffs()
            .iter()
            .fold(0i128, |g, &x| crate::arith::gcd(g, x as i128))
    }
}

impl fmt::Display for BinaryCubicForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.a, self.b, self.c, self.d)
    }
}

impl FromStr for BinaryCubicForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(',').collect();
        if parts.len() != 4 {
            return Err(Error::Parse(format!("expected a,b,c,d but got {s:?}")));
        }
        let mut v = [0i64; 4];
        for (slot, p) in v.iter_mut().zip(&parts) {
            *slot = p
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad coefficient {p:?}")))?;
        }
        Ok(Self::new(v[0], v[1], v[2], v[3]))
    }
}

/// An integer 2x2 matrix `[[r, s], [t, u]]` with determinant +1 or -1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Unimodular2 {
    r: i64,
    s: i64,
    t: i64,
    u: i64,
}

impl Unimodular2 {
    pub const IDENTITY: Self = Self { r: 1, s: 0, t: 0, u: 1 };

    pub fn new(r: i64, s: i64, t: i64, u: i64) -> Result<Self> {
        let det = r as i128 * u as i128 - s as i128 * t as i128;
        if det == 1 || det == -1 {
            Ok(Self { r, s, t, u })
        } else {
            Err(Error::NotUnimodular(det.clamp(i64::MIN as i128, i64::MAX as i128) as i64))
        }
    }

    pub fn entries(&self) -> [i64; 4] {
        [self.r, self.s, self.t, self.u]
    }

    pub fn det(&self) -> i64 {
        self.r * self.u - self.s * self.t
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, o: &Self) -> Self {
        Self {
            r: self.r * o.r + self.s * o.t,
            s: self.r * o.s + self.s * o.u,
            t: self.t * o.r + self.u * o.t,
            u: self.t * o.s + self.u * o.u,
        }
    }

    pub fn inverse(&self) -> Self {
        let det = self.det();
        Self {
            r: self.u * det,
            s: -self.s * det,
            t: -self.t * det,
            u: self.r * det,
        }
    }
}

/// The twisted action `(g.f)(x, y) = det(g)^-1 f((x, y) g)`.
///
/// Panics if a coefficient of the result leaves the `i64` range.
pub fn act_form(g: &Unimodular2, f: &BinaryCubicForm) -> BinaryCubicForm {
    let (r, s, t, u) = (g.r as i128, g.s as i128, g.t as i128, g.u as i128);
    let (a, b, c, d) = (f.a as i128, f.b as i128, f.c as i128, f.d as i128);
    let na = f.eval(r, s);
    let nd = f.eval(t, u);
    let nb = 3 * a * r * r * t + b * (r * r * u + 2 * r * s * t) + c * (s * s * t + 2 * r * s * u)
        + 3 * d * s * s * u;
    let nc = 3 * a * r * t * t + b * (2 * r * t * u + s * t * t) + c * (r * u * u + 2 * s * t * u)
        + 3 * d * s * u * u;
    let det = g.det() as i128;
    let narrow = |x: i128| -> i64 {
        i64::try_from(x * det).expect("binary cubic coefficient overflow in act_form")
    };
    BinaryCubicForm::new(narrow(na), narrow(nb), narrow(nc), narrow(nd))
}

/// Whether `f` has no rational projective root.
pub fn is_irreducible(f: &BinaryCubicForm) -> bool {
    if f.a == 0 || f.d == 0 {
        return false;
    }
    let disc = f.disc();
    if disc == 0 {
        // A repeated root of a rational cubic is rational.
        return false;
    }
    let roots = cubic_roots(f.a as f64, f.b as f64, f.c as f64, f.d as f64, disc.signum() as i32);
    let dens = crate::arith::divisors(f.a as i128);
    for &r in &roots.real {
        for &q in &dens {
            let p = (r * q as f64).round();
            if !p.is_finite() || p.abs() > 1e30 {
                continue;
            }
            if f.eval(p as i128, q) == 0 {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(r: i64, s: i64, t: i64, u: i64) -> Unimodular2 {
        Unimodular2::new(r, s, t, u).unwrap()
    }

    #[test]
    fn discriminant_examples() {
        assert_eq!(BinaryCubicForm::new(1, 1, -2, -1).disc(), 49);
        assert_eq!(BinaryCubicForm::new(1, 0, 0, 0).disc(), 0);
        assert_eq!(BinaryCubicForm::new(1, 0, 0, 2).disc(), -108);
    }

    #[test]
    fn swap_action() {
        let f = BinaryCubicForm::new(2, 3, 5, 7);
        assert_eq!(act_form(&g(0, 1, 1, 0), &f), BinaryCubicForm::new(-7, -5, -3, -2));
        assert_eq!(act_form(&Unimodular2::IDENTITY, &f), f);
    }

    #[test]
    fn shear_action_expands_f_x_x_plus_y() {
        // (x, y) [[1,1],[0,1]] = (x, x + y): x^3 + 2 (x + y)^3.
        let f = BinaryCubicForm::new(1, 0, 0, 2);
        let h = act_form(&g(1, 1, 0, 1), &f);
        assert_eq!(h, BinaryCubicForm::new(3, 6, 6, 2));
        assert_eq!(h.disc(), -108);
    }

    #[test]
    fn unimodular_rejects_bad_det() {
        assert_eq!(Unimodular2::new(2, 0, 0, 1), Err(Error::NotUnimodular(2)));
    }

    #[test]
    fn irreducibility_examples() {
        assert!(!is_irreducible(&BinaryCubicForm::new(0, 1, -1, 0)));
        assert!(is_irreducible(&BinaryCubicForm::new(1, 1, -2, -1)));
        assert!(is_irreducible(&BinaryCubicForm::new(1, 0, 0, 2)));
        // (2x - 3y)(x^2 + y^2)
        assert!(!is_irreducible(&BinaryCubicForm::new(2, -3, 2, -3)));
        assert!(!is_irreducible(&BinaryCubicForm::new(1, 0, 0, 0)));
    }

    #[test]
    fn form_text_roundtrip() {
        let f: BinaryCubicForm = "1,-1,-2,8".parse().unwrap();
        assert_eq!(f.to_string(), "1,-1,-2,8");
        assert!("1,2,3".parse::<BinaryCubicForm>().is_err());
    }
}
