//! Pairs of integral ternary quadratic forms `(A, B)`, the action of
//! `GL_2(Z) x GL_3(Z)`, the resolvent cubic `det(Ax - By)` and the real
//! orbit type of the pencil.

use std::fmt;
use std::str::FromStr;

use crate::arith::gcd;
use crate::error::{Error, Result};
use crate::forms::{BinaryCubicForm, Unimodular2};
use crate::numeric::cubic_roots;

pub type Sym3 = [[i64; 3]; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TernaryPair {
    pub a: Sym3,
    pub b: Sym3,
}

fn sym(e: [i64; 6]) -> Sym3 {
    let [m11, m12, m13, m22, m23, m33] = e;
    [[m11, m12, m13], [m12, m22, m23], [m13, m23, m33]]
}

fn upper(m: &Sym3) -> [i64; 6] {
    [m[0][0], m[0][1], m[0][2], m[1][1], m[1][2], m[2][2]]
}

fn det3(m: &[[i128; 3]; 3]) -> i128 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn widen(m: &Sym3) -> [[i128; 3]; 3] {
    m.map(|row| row.map(i128::from))
}

impl TernaryPair {
    /// From upper triangles `(m11, m12, m13, m22, m23, m33)`.
    pub fn new(a: [i64; 6], b: [i64; 6]) -> Self {
        Self { a: sym(a), b: sym(b) }
    }

    /// Values of the two quadratic forms `v M v^t` at `v`.
    pub fn eval(&self, v: [i64; 3]) -> (i128, i128) {
        let q = |m: &Sym3| {
            let mut s = 0i128;
            for i in 0..3 {
                for j in 0..3 {
                    s += m[i][j] as i128 * v[i] as i128 * v[j] as i128;
                }
            }
            s
        };
        (q(&self.a), q(&self.b))
    }
}

impl fmt::Display for TernaryPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |m: &Sym3| upper(m).map(|v| v.to_string()).join(",");
        write!(f, "{};{}", join(&self.a), join(&self.b))
    }
}

impl FromStr for TernaryPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse = |part: &str| -> Result<[i64; 6]> {
            let v: Vec<i64> = part
                .split(',')
                .map(|t| t.trim().parse::<i64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("pair entry: {e}")))?;
            v.try_into().map_err(|_| Error::Parse("expected 6 entries per matrix".into()))
        };
        let (l, r) = s
            .split_once(';')
            .ok_or_else(|| Error::Parse("expected 'a11,...,a33;b11,...,b33'".into()))?;
        Ok(Self::new(parse(l)?, parse(r)?))
    }
}

/// `(gamma, g)` in `GL_2(Z) x GL_3(Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupElement23 {
    pub gamma: Unimodular2,
    pub g: [[i64; 3]; 3],
}

impl GroupElement23 {
    pub fn new(gamma: Unimodular2, g: [[i64; 3]; 3]) -> Result<Self> {
        let d = det3(&widen(&g));
        if d.abs() != 1 {
            return Err(Error::NotUnimodular(d as i64));
        }
        Ok(Self { gamma, g })
    }

    pub fn identity() -> Self {
        Self {
            gamma: Unimodular2::IDENTITY,
            g: [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
        }
    }

    /// The scalar element `T_lambda = (lambda^-2 I, lambda I)` for `lambda = +-1`.
    pub fn scalar(lambda: i64) -> Self {
        assert!(lambda.abs() == 1);
        Self {
            gamma: Unimodular2::IDENTITY,
            g: [[lambda, 0, 0], [0, lambda, 0], [0, 0, lambda]],
        }
    }

    pub fn det_g(&self) -> i64 {
        det3(&widen(&self.g)) as i64
    }
}

fn conj3(g: &[[i64; 3]; 3], m: &Sym3) -> Sym3 {
    let mut out = [[0i64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut s = 0i128;
            for k in 0..3 {
                for l in 0..3 {
                    s += g[i][k] as i128 * m[k][l] as i128 * g[j][l] as i128;
                }
            }
            out[i][j] = i64::try_from(s).expect("pair entries overflow i64");
        }
    }
    out
}

fn lin(x: i64, a: &Sym3, y: i64, b: &Sym3) -> Sym3 {
    let mut out = [[0i64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = x.checked_mul(a[i][j])
                .and_then(|u| y.checked_mul(b[i][j]).and_then(|v| u.checked_add(v)))
                .expect("pair entries overflow i64");
        }
    }
    out
}

/// `(gAg^t, gBg^t)` followed by `(rA - sB, -tA + uB)`.
pub fn act_pair(e: &GroupElement23, p: &TernaryPair) -> TernaryPair {
    let (a, b) = (conj3(&e.g, &p.a), conj3(&e.g, &p.b));
    let [r, s, t, u] = e.gamma.entries();
    TernaryPair {
        a: lin(r, &a, -s, &b),
        b: lin(-t, &a, u, &b),
    }
}

/// Coefficients of `det(Ax - By)` as exact integers.
pub fn resolvent_coeffs(p: &TernaryPair) -> [i128; 4] {
    let (a, b) = (widen(&p.a), widen(&p.b));
    let at = |t: i128| {
        let mut m = [[0i128; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = a[i][j] * t - b[i][j];
            }
        }
        det3(&m)
    };
    // det(At - B) = c0 t^3 + c1 t^2 + c2 t + c3
    let c0 = det3(&a);
    let c3 = at(0);
    let (p1, m1) = (at(1), at(-1));
    let c1 = (p1 + m1) / 2 - c3;
    let c2 = (p1 - m1) / 2 - c0;
    [c0, c1, c2, c3]
}

/// The binary cubic form `det(Ax - By)`.
pub fn resolvent(p: &TernaryPair) -> BinaryCubicForm {
    let c = resolvent_coeffs(p).map(|v| i64::try_from(v).expect("resolvent coefficient overflows i64"));
    BinaryCubicForm::new(c[0], c[1], c[2], c[3])
}

pub fn disc_pair(p: &TernaryPair) -> i128 {
    resolvent(p).disc()
}

/// Real orbit type: `i` complex-conjugate pairs among the four common zeros
/// of `A` and `B` in the complex projective plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OrbitType {
    pub i: u8,
}

impl OrbitType {
    /// Order of the stabiliser constant `n_i`.
    pub fn n(&self) -> u32 {
        match self.i {
            0 => 24,
            1 => 4,
            _ => 8,
        }
    }
}

/// Relative size below which a 2x2 minor sum is treated as undecided.
const MINOR_TOLERANCE: f64 = 1e-10;

/// Real projective roots `(x, y)` of `a x^3 + b x^2 y + c x y^2 + d y^3`.
fn projective_real_roots(f: &BinaryCubicForm) -> Vec<(f64, f64)> {
    let [a, b, c, d] = f.coeffs().map(|v| v as f64);
    let sign = f.disc().signum() as i32;
    if f.a != 0 {
        return cubic_roots(a, b, c, d, sign).real.into_iter().map(|x| (x, 1.0)).collect();
    }
    let mut out = vec![(1.0, 0.0)];
    let q = c * c - 4.0 * b * d;
    if sign > 0 && q > 0.0 {
        let s = q.sqrt();
        out.push(((-c + s) / (2.0 * b), 1.0));
        out.push(((-c - s) / (2.0 * b), 1.0));
    }
    out
}

pub fn orbit_type(p: &TernaryPair) -> Result<OrbitType> {
    let f = resolvent(p);
    let disc = f.disc();
    if disc == 0 {
        return Err(Error::NondegenerateRequired);
    }
    let roots = projective_real_roots(&f);
    if disc < 0 {
        return Ok(OrbitType { i: 1 });
    }
    if roots.len() != 3 {
        return Err(Error::PrecisionExhausted("expected three real roots of the resolvent".into()));
    }
    // A degenerate member is a pair of lines; they are complex conjugate
    // exactly when the rank-2 matrix is semidefinite, i.e. the sum of its
    // principal 2x2 minors is positive.
    let mut definite = 0;
    for (x, y) in roots {
        let n = x.hypot(y);
        let (x, y) = (x / n, y / n);
        let mut m = [[0f64; 3]; 3];
        let mut scale: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = p.a[i][j] as f64 * x - p.b[i][j] as f64 * y;
                scale = scale.max(m[i][j].abs());
            }
        }
        let e2 = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0] + m[1][1] * m[2][2]
            - m[1][2] * m[2][1];
        if e2.abs() <= MINOR_TOLERANCE * scale * scale {
            return Err(Error::PrecisionExhausted("degenerate pencil member is ill-conditioned".into()));
        }
        if e2 > 0.0 {
            definite += 1;
        }
    }
    match definite {
        0 => Ok(OrbitType { i: 0 }),
        2 => Ok(OrbitType { i: 2 }),
        _ => Err(Error::PrecisionExhausted(format!("{definite} definite pencil members"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommonZero {
    Yes([i64; 3]),
    /// Nothing found with all coordinates at most the bound; inconclusive.
    NoUpToBound,
}

fn isqrt(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let mut r = (n as f64).sqrt() as i128;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    (r * r == n).then_some(r)
}

fn normalize(v: [i64; 3]) -> [i64; 3] {
    let g = gcd(gcd(v[0] as i128, v[1] as i128), v[2] as i128) as i64;
    let mut w = v.map(|c| c / g);
    if w.iter().find(|&&c| c != 0).is_some_and(|&c| c < 0) {
        w = w.map(|c| -c);
    }
    w
}

/// Search for a primitive integral common zero with coordinates bounded by
/// `height`. The witness returned is the smallest in (height, lexicographic)
/// order.
pub fn has_common_rational_zero(p: &TernaryPair, height: i64) -> CommonZero {
    let a = widen(&p.a);
    let mut best: Option<[i64; 3]> = None;
    let mut consider = |v: [i64; 3]| {
        if v == [0, 0, 0] || v.iter().any(|c| c.abs() > height) {
            return;
        }
        let v = normalize(v);
        let (qa, qb) = p.eval(v);
        if qa != 0 || qb != 0 {
            return;
        }
        let key = |w: &[i64; 3]| (w.iter().map(|c| c.abs()).max().unwrap(), *w);
        if best.is_none_or(|b| key(&v) < key(&b)) {
            best = Some(v);
        }
    };
    for x in -height..=height {
        for y in -height..=height {
            let (xi, yi) = (x as i128, y as i128);
            // A(x, y, z) = a33 z^2 + 2 (a13 x + a23 y) z + rest
            let qz = a[2][2];
            let lz = 2 * (a[0][2] * xi + a[1][2] * yi);
            let c0 = a[0][0] * xi * xi + 2 * a[0][1] * xi * yi + a[1][1] * yi * yi;
            if qz != 0 {
                if let Some(s) = isqrt(lz * lz - 4 * qz * c0) {
                    for num in [-lz + s, -lz - s] {
                        if num % (2 * qz) == 0 {
                            let z = num / (2 * qz);
                            if z.abs() <= height as i128 {
                                consider([x, y, z as i64]);
                            }
                        }
                    }
                }
            } else if lz != 0 {
                if c0 % lz == 0 {
                    let z = -c0 / lz;
                    if z.abs() <= height as i128 {
                        consider([x, y, z as i64]);
                    }
                }
            } else if c0 == 0 {
                for z in -height..=height {
                    consider([x, y, z]);
                }
            }
        }
    }
    best.map_or(CommonZero::NoUpToBound, CommonZero::Yes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag123() -> TernaryPair {
        TernaryPair::new([1, 0, 0, 1, 0, 1], [1, 0, 0, 2, 0, 3])
    }

    #[test]
    fn resolvent_examples() {
        assert_eq!(resolvent(&diag123()), BinaryCubicForm::new(1, -6, 11, -6));
        assert_eq!(resolvent(&TernaryPair::new([1, 0, 0, 1, 0, 1], [0; 6])), BinaryCubicForm::new(1, 0, 0, 0));
        let a = [2, 1, 0, 3, -1, 5];
        let d = det3(&widen(&sym(a)));
        assert_eq!(resolvent(&TernaryPair::new(a, a)), BinaryCubicForm::new(d as i64, -3 * d as i64, 3 * d as i64, -d as i64));
        assert_eq!(disc_pair(&diag123()), 4);
        assert_eq!(disc_pair(&TernaryPair::new([1, 0, 0, 1, 0, 1], [0; 6])), 0);
    }

    #[test]
    fn action_examples() {
        let p = diag123();
        assert_eq!(act_pair(&GroupElement23::identity(), &p), p);
        let e = GroupElement23 {
            gamma: Unimodular2::new(1, 1, 0, 1).unwrap(),
            g: GroupElement23::identity().g,
        };
        let q = act_pair(&e, &p);
        assert_eq!(q.b, p.b);
        assert_eq!(q.a, lin(1, &p.a, -1, &p.b));
        assert_eq!(act_pair(&GroupElement23::scalar(-1), &p), p);
        assert!(GroupElement23::new(Unimodular2::IDENTITY, [[2, 0, 0], [0, 1, 0], [0, 0, 1]]).is_err());
    }

    #[test]
    fn orbit_types() {
        assert_eq!(orbit_type(&diag123()).unwrap(), OrbitType { i: 2 });
        assert_eq!(orbit_type(&diag123()).unwrap().n(), 8);
        // x^2 + y^2 - z^2 and x^2 - y^2 meet in four real points
        let real4 = TernaryPair::new([1, 0, 0, 1, 0, -1], [1, 0, 0, -1, 0, 0]);
        assert!(disc_pair(&real4) > 0);
        assert_eq!(orbit_type(&real4).unwrap().i, 0);
        assert_eq!(orbit_type(&TernaryPair::new([1, 0, 0, 1, 0, 1], [0; 6])), Err(Error::NondegenerateRequired));
    }

    #[test]
    fn common_zero_examples() {
        let p = TernaryPair::new([1, 2, 3, 4, 5, 0], [7, -1, 2, 3, 1, 0]);
        assert_eq!(has_common_rational_zero(&p, 5), CommonZero::Yes([0, 0, 1]));
        assert_eq!(has_common_rational_zero(&diag123(), 20), CommonZero::NoUpToBound);
    }

    #[test]
    fn serialization_round_trip() {
        let p = diag123();
        let s = p.to_string();
        assert_eq!(s, "1,0,0,1,0,1;1,0,0,2,0,3");
        assert_eq!(s.parse::<TernaryPair>().unwrap(), p);
        assert!("1,2,3;4".parse::<TernaryPair>().is_err());
    }
}
