//! The cubic ring `R(f)` attached to a binary cubic form, in the normal
//! basis `(1, omega, theta)`:
//!
//! ```text
//! omega * theta = n,  omega^2 = m + b omega - a theta,  theta^2 = l + d omega - c theta
//! n = -ad, m = -ac, l = -bd
//! ```

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::forms::BinaryCubicForm;
use crate::numeric::cubic_roots;

/// Integral element in coordinates over (1, omega, theta).
pub type IntElem = [i128; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Signature {
    TotallyReal,
    Complex,
    Degenerate,
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::TotallyReal => "real",
            Self::Complex => "complex",
            Self::Degenerate => "degenerate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubicRing {
    form: BinaryCubicForm,
    n: i128,
    m: i128,
    l: i128,
    disc: i128,
    signature: Signature,
}

/// Build `R(f)`, verifying associativity of the multiplication table.
pub fn ring_from_form(f: &BinaryCubicForm) -> CubicRing {
    let (a, b, c, d) = (f.a as i128, f.b as i128, f.c as i128, f.d as i128);
    let disc = f.disc();
    let ring = CubicRing {
        form: *f,
        n: -a * d,
        m: -a * c,
        l: -b * d,
        disc,
        signature: match disc.signum() {
            1 => Signature::TotallyReal,
            -1 => Signature::Complex,
            _ => Signature::Degenerate,
        },
    };
    const OMEGA: IntElem = [0, 1, 0];
    const THETA: IntElem = [0, 0, 1];
    let (w2, t2, wt) = (ring.mul_int(OMEGA, OMEGA), ring.mul_int(THETA, THETA), ring.mul_int(OMEGA, THETA));
    assert_eq!(ring.mul_int(w2, THETA), ring.mul_int(OMEGA, wt), "associativity failed");
    assert_eq!(ring.mul_int(t2, OMEGA), ring.mul_int(THETA, wt), "associativity failed");
    ring
}

impl CubicRing {
    pub fn form(&self) -> &BinaryCubicForm {
        &self.form
    }

    pub fn disc(&self) -> i128 {
        self.disc
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn is_degenerate(&self) -> bool {
        self.disc == 0
    }

    /// Structure constants (n, m, l).
    pub fn constants(&self) -> (i128, i128, i128) {
        (self.n, self.m, self.l)
    }

    pub fn mul_int(&self, x: IntElem, y: IntElem) -> IntElem {
        let f = &self.form;
        let (a, b, c, d) = (f.a as i128, f.b as i128, f.c as i128, f.d as i128);
        let xy11 = x[1] * y[1];
        let xy22 = x[2] * y[2];
        [
            x[0] * y[0] + xy11 * self.m + (x[1] * y[2] + x[2] * y[1]) * self.n + xy22 * self.l,
            x[0] * y[1] + x[1] * y[0] + xy11 * b + xy22 * d,
            x[0] * y[2] + x[2] * y[0] - xy11 * a - xy22 * c,
        ]
    }

    /// Matrix of multiplication by `x` (columns are x*1, x*omega, x*theta).
    pub fn regular_int(&self, x: IntElem) -> [[i128; 3]; 3] {
        let cols = [x, self.mul_int(x, [0, 1, 0]), self.mul_int(x, [0, 0, 1])];
        let mut m = [[0i128; 3]; 3];
        for (j, col) in cols.iter().enumerate() {
            for i in 0..3 {
                m[i][j] = col[i];
            }
        }
        m
    }

    pub fn trace_int(&self, x: IntElem) -> i128 {
        let f = &self.form;
        3 * x[0] + f.b as i128 * x[1] - f.c as i128 * x[2]
    }

    pub fn norm_int(&self, x: IntElem) -> i128 {
        det3(&self.regular_int(x))
    }

    /// Big-integer variant of the product, for elements whose coordinates
    /// outgrow machine integers.
    fn mul_big(&self, x: &[BigRational; 3], y: &[BigRational; 3]) -> [BigRational; 3] {
        let f = &self.form;
        let k = |v: i128| BigRational::from_integer(BigInt::from(v));
        let (a, b, c, d) = (k(f.a as i128), k(f.b as i128), k(f.c as i128), k(f.d as i128));
        let (n, m, l) = (k(self.n), k(self.m), k(self.l));
        let xy11 = &x[1] * &y[1];
        let xy22 = &x[2] * &y[2];
        [
            &x[0] * &y[0] + &xy11 * &m + (&x[1] * &y[2] + &x[2] * &y[1]) * &n + &xy22 * &l,
            &x[0] * &y[1] + &x[1] * &y[0] + &xy11 * &b + &xy22 * &d,
            &x[0] * &y[2] + &x[2] * &y[0] - &xy11 * &a - &xy22 * &c,
        ]
    }

    pub fn element(&self, coords: [BigRational; 3]) -> RingElement {
        RingElement {
            form: self.form,
            coords,
        }
    }

    pub fn element_int(&self, x: IntElem) -> RingElement {
        self.element(x.map(|v| BigRational::from_integer(BigInt::from(v))))
    }

    pub fn one(&self) -> RingElement {
        self.element_int([1, 0, 0])
    }

    /// Numerical images of omega and theta under the three complex
    /// embeddings: the real ones first, then one of a complex-conjugate pair.
    pub fn embeddings(&self) -> Result<Embeddings> {
        if self.is_degenerate() {
            return Err(Error::DegenerateForm);
        }
        let f = &self.form;
        let (a, b, c, d) = (f.a as f64, f.b as f64, f.c as f64, f.d as f64);
        // Projective roots x/y; None is the root at infinity.
        let mut real: Vec<Option<f64>> = Vec::new();
        let mut complex: Option<Complex64> = None;
        if f.a != 0 {
            let r = cubic_roots(a, b, c, d, self.disc.signum() as i32);
            real.extend(r.real.into_iter().map(Some));
            complex = r.complex.map(|(re, im)| Complex64::new(re, im));
        } else {
            real.push(None);
            // b x^2 + c x + d, b != 0 since disc != 0
            let disc2 = c * c - 4.0 * b * d;
            if disc2 > 0.0 {
                let s = disc2.sqrt();
                let q = -0.5 * (c + c.signum().max(0.0).mul_add(2.0, -1.0) * s);
                let (r1, r2) = (q / b, d / q);
                real.push(Some(r1.min(r2)));
                real.push(Some(r1.max(r2)));
            } else {
                complex = Some(Complex64::new(-c / (2.0 * b), (-disc2).sqrt() / (2.0 * b).abs()));
            }
        }
        let image = |xi: Option<Complex64>| -> (Complex64, Complex64) {
            match xi {
                None => (Complex64::new(b, 0.0), Complex64::new(0.0, 0.0)),
                Some(x) if x.norm() <= 1.0 => (-a * x, -((a * x + b) * x + c)),
                Some(x) => {
                    let z = x.inv();
                    ((d * z + c) * z + b, d * z)
                }
            }
        };
        let mut out = Embeddings {
            real: Vec::new(),
            complex: None,
        };
        for xi in real {
            let (w, t) = image(xi.map(|v| Complex64::new(v, 0.0)));
            out.real.push((w.re, t.re));
        }
        out.complex = complex.map(|z| image(Some(z)));
        Ok(out)
    }
}

fn det3(m: &[[i128; 3]; 3]) -> i128 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Numerical embedding data: `(sigma(omega), sigma(theta))` per place.
#[derive(Debug, Clone)]
pub struct Embeddings {
    pub real: Vec<(f64, f64)>,
    pub complex: Option<(Complex64, Complex64)>,
}

impl Embeddings {
    /// Images of an element under the real embeddings and (if any) one of
    /// the complex ones.
    pub fn apply(&self, x: [f64; 3]) -> (Vec<f64>, Option<Complex64>) {
        let real = self.real.iter().map(|&(w, t)| x[0] + x[1] * w + x[2] * t).collect();
        let cx = self.complex.map(|(w, t)| x[0] + w * x[1] + t * x[2]);
        (real, cx)
    }

    /// `log |sigma_i(x)|` at each place (complex places once).
    pub fn log_abs(&self, x: [f64; 3]) -> Vec<f64> {
        let (r, c) = self.apply(x);
        let mut v: Vec<f64> = r.iter().map(|v| v.abs().ln()).collect();
        if let Some(z) = c {
            v.push(z.norm().ln());
        }
        v
    }

    /// Minkowski inner product `sum_i Re(sigma_i(x) conj(sigma_i(y)))` over
    /// all three embeddings.
    pub fn minkowski(&self, x: [f64; 3], y: [f64; 3]) -> f64 {
        let (rx, cx) = self.apply(x);
        let (ry, cy) = self.apply(y);
        let mut s: f64 = rx.iter().zip(&ry).map(|(a, b)| a * b).sum();
        if let (Some(a), Some(b)) = (cx, cy) {
            s += 2.0 * (a * b.conj()).re;
        }
        s
    }

    /// Gram matrix of the Minkowski form on the basis (1, omega, theta).
    pub fn t2_gram(&self) -> [[f64; 3]; 3] {
        let e = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let mut g = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                g[i][j] = self.minkowski(e[i], e[j]);
            }
        }
        g
    }
}

/// Element with rational coordinates over (1, omega, theta).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RingElement {
    form: BinaryCubicForm,
    pub coords: [BigRational; 3],
}

impl RingElement {
    pub fn form(&self) -> &BinaryCubicForm {
        &self.form
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.form == other.form {
            Ok(())
        } else {
            Err(Error::RingMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let coords = [0, 1, 2].map(|i| &self.coords[i] + &other.coords[i]);
        Ok(Self { form: self.form, coords })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let coords = [0, 1, 2].map(|i| &self.coords[i] - &other.coords[i]);
        Ok(Self { form: self.form, coords })
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        Self {
            form: self.form,
            coords: [0, 1, 2].map(|i| &self.coords[i] * k),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-BigRational::one())
    }

    pub fn is_integral(&self) -> bool {
        self.coords.iter().all(|c| c.is_integer())
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    /// Coordinates as machine integers, if integral and small enough.
    pub fn to_int(&self) -> Option<IntElem> {
        let mut out = [0i128; 3];
        for (o, c) in out.iter_mut().zip(&self.coords) {
            if !c.is_integer() {
                return None;
            }
            *o = i128::try_from(c.to_integer()).ok()?;
        }
        Some(out)
    }

    pub fn to_f64(&self) -> [f64; 3] {
        use num_traits::ToPrimitive;
        self.coords.clone().map(|c| c.to_f64().unwrap_or(f64::NAN))
    }

    /// Matrix of multiplication by this element.
    pub fn regular(&self) -> [[BigRational; 3]; 3] {
        let ring = ring_from_form(&self.form);
        let basis = [0, 1, 2].map(|k| {
            let mut v = [BigRational::zero(), BigRational::zero(), BigRational::zero()];
            v[k] = BigRational::one();
            v
        });
        let cols = basis.map(|e| ring.mul_big(&self.coords, &e));
        [0, 1, 2].map(|i| [0, 1, 2].map(|j| cols[j][i].clone()))
    }

    pub fn pow(&self, e: u32) -> Self {
        let ring = ring_from_form(&self.form);
        let mut acc = ring.one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(&acc, &base).expect("same ring");
            }
            base = mul(&base, &base).expect("same ring");
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse (nonzero element of a nondegenerate ring).
    pub fn inverse(&self) -> Option<Self> {
        // x^-1 = (x^2 - tr x + s2) / N(x) by Cayley-Hamilton.
        let [_, c1, c2, c3] = char_poly(self);
        let nrm = -c3;
        if nrm.is_zero() {
            return None;
        }
        let ring = ring_from_form(&self.form);
        let x2 = mul(self, self).ok()?;
        let num = x2.add(&self.scale(&c1)).ok()?.add(&ring.one().scale(&c2)).ok()?;
        Some(num.scale(&(BigRational::one() / nrm)))
    }
}

/// Product in the common ring.
pub fn mul(x: &RingElement, y: &RingElement) -> Result<RingElement> {
    x.check(y)?;
    let ring = ring_from_form(&x.form);
    Ok(RingElement {
        form: x.form,
        coords: ring.mul_big(&x.coords, &y.coords),
    })
}

pub fn trace(x: &RingElement) -> BigRational {
    let m = x.regular();
    &m[0][0] + &m[1][1] + &m[2][2]
}

pub fn norm(x: &RingElement) -> BigRational {
    let m = x.regular();
    &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
        - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
        + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
}

/// Coefficients `[1, c1, c2, c3]` of `t^3 + c1 t^2 + c2 t + c3`, the
/// characteristic polynomial of multiplication by `x`.
pub fn char_poly(x: &RingElement) -> [BigRational; 4] {
    let m = x.regular();
    let tr = &m[0][0] + &m[1][1] + &m[2][2];
    let minor = |i: usize, j: usize| &m[i][i] * &m[j][j] - &m[i][j] * &m[j][i];
    let s2 = minor(0, 1) + minor(0, 2) + minor(1, 2);
    [BigRational::one(), -tr, s2, -norm(x)]
}

/// Exact sign of a real number given a floating approximation and a bound
/// on its error; `None` when undecidable.
pub fn certified_sign(v: f64, err: f64) -> Option<i8> {
    if v.abs() > err {
        Some(if v > 0.0 { 1 } else { -1 })
    } else {
        None
    }
}

pub fn big(v: i128) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn is_unit_norm(x: &RingElement) -> bool {
    let n = norm(x);
    n.abs().is_one()
}
