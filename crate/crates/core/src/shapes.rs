//! Shapes of cubic rings as points of the fundamental domain
//! `F2 = {0 <= x <= 1/2, y > 0, x^2 + y^2 >= 1}` of `GL_2(Z)` acting on the
//! upper half-plane, and hyperbolic areas `dx dy / y^2` of regions in it.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::forms::{canonical_form, gauss_reduce, QuadForm};
use crate::rings::{ring_from_form, CubicRing, Signature};

/// Relative deviation of the numeric Gram determinant from its exact value
/// beyond which the complex path gives up.
const GRAM_TOLERANCE: f64 = 1e-10;

/// Symmetric 2x2 Gram matrix `[[g11, g12], [g12, g22]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GramMatrix2 {
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
    /// Integer entries when they are known exactly.
    pub exact: Option<[i128; 3]>,
}

impl GramMatrix2 {
    pub fn new(g11: f64, g12: f64, g22: f64) -> Self {
        Self { g11, g12, g22, exact: None }
    }

    pub fn from_exact(g11: i128, g12: i128, g22: i128) -> Self {
        Self {
            g11: g11 as f64,
            g12: g12 as f64,
            g22: g22 as f64,
            exact: Some([g11, g12, g22]),
        }
    }

    pub fn det(&self) -> f64 {
        self.g11 * self.g22 - self.g12 * self.g12
    }

    pub fn is_positive_definite(&self) -> bool {
        match self.exact {
            Some([a, b, c]) => a > 0 && a * c - b * b > 0,
            None => self.g11 > 0.0 && self.det() > 0.0,
        }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.g11 * k, self.g12 * k, self.g22 * k)
    }
}

/// A point of the closed fundamental domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapePoint {
    pub x: f64,
    pub y: f64,
    /// Reduced integral form `p X^2 + q XY + r Y^2` with root `x + iy`, when
    /// the shape came from an exact Gram matrix.
    pub exact: Option<(i128, i128, i128)>,
}

impl ShapePoint {
    pub fn in_domain(&self) -> bool {
        self.y > 0.0 && (0.0..=0.5).contains(&self.x) && self.x * self.x + self.y * self.y >= 1.0 - 1e-12
    }

    pub fn distance(&self, other: &ShapePoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Gram matrix of `(omega_perp, theta_perp) = (3 omega - b, 3 theta + c)`
/// under the Minkowski inner product. Exact for totally real rings.
pub fn perp_gram(ring: &CubicRing) -> Result<GramMatrix2> {
    if ring.is_degenerate() {
        return Err(Error::DegenerateForm);
    }
    let f = ring.form();
    let wp = [-(f.b as i128), 3, 0];
    let tp = [f.c as i128, 0, 3];
    let tr = |x, y| ring.trace_int(ring.mul_int(x, y));
    match ring.signature() {
        Signature::TotallyReal => Ok(GramMatrix2::from_exact(tr(wp, wp), tr(wp, tp), tr(tp, tp))),
        _ => {
            let emb = ring.embeddings()?;
            let to_f = |v: [i128; 3]| v.map(|c| c as f64);
            let g = GramMatrix2::new(
                emb.minkowski(to_f(wp), to_f(wp)),
                emb.minkowski(to_f(wp), to_f(tp)),
                emb.minkowski(to_f(tp), to_f(tp)),
            );
            // The projected lattice has covolume^2 = 27 |disc|.
            let expected = 27.0 * (ring.disc() as f64).abs();
            let rel = (g.det() - expected).abs() / expected;
            if !rel.is_finite() || rel > GRAM_TOLERANCE {
                return Err(Error::PrecisionExhausted(format!(
                    "Gram determinant off by relative {rel:e}"
                )));
            }
            Ok(g)
        }
    }
}

/// `x = g12 / g22`, `y = sqrt(g11 / g22 - x^2)`; invariant under scaling.
pub fn gram_to_halfplane(g: &GramMatrix2) -> Result<(f64, f64)> {
    if !g.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    let x = g.g12 / g.g22;
    let y = (g.det() / (g.g22 * g.g22)).sqrt();
    Ok((x, y))
}

/// Orbit representative of `z = x + iy` in the closed fundamental domain.
pub fn reduce_to_f2(z: (f64, f64)) -> ShapePoint {
    let (mut x, mut y) = z;
    assert!(y > 0.0, "point must lie in the upper half-plane");
    for _ in 0..10_000 {
        x -= x.round();
        let n = x * x + y * y;
        if n < 1.0 - 1e-15 {
            x = -x / n;
            y /= n;
        } else {
            break;
        }
    }
    ShapePoint { x: x.abs(), y, exact: None }
}

/// Shape of a nondegenerate ring.
pub fn shape_of_ring(ring: &CubicRing) -> Result<ShapePoint> {
    let g = match ring.signature() {
        Signature::TotallyReal => perp_gram(ring)?,
        // Skewed bases lose digits in the embeddings; the shape only depends
        // on the orbit, so work with the reduced representative.
        _ if !ring.is_degenerate() => perp_gram(&ring_from_form(&canonical_form(ring.form())?.0))?,
        _ => perp_gram(ring)?,
    };
    match g.exact {
        Some([g11, g12, g22]) => Ok(reduce_exact(g11, g12, g22)),
        None => Ok(reduce_to_f2(gram_to_halfplane(&g)?)),
    }
}

fn reduce_exact(g11: i128, g12: i128, g22: i128) -> ShapePoint {
    // x + iy is the root of g22 X^2 - 2 g12 X + g11; reducing that form
    // puts the root in F2.
    let (red, _) = gauss_reduce(QuadForm::new(g22, 2 * g12, g11));
    let (p, q, r) = (red.p, red.q, red.r);
    let two_p = 2.0 * p as f64;
    ShapePoint {
        x: q as f64 / two_p,
        y: ((4 * p * r - q * q) as f64).sqrt() / two_p,
        exact: Some((p, q, r)),
    }
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`; `y1` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.x0 <= x && x <= self.x1 && self.y0 <= y && y <= self.y1
    }
}

pub type ShapePredicate = Arc<dyn Fn(f64, f64) -> bool + Send + Sync>;

/// A region of the fundamental domain.
#[derive(Clone)]
pub enum ShapeRegion {
    All,
    /// Union of rectangles intersected with F2.
    Rectangles(Vec<Rect>),
    /// Indicator function on F2, assumed to have a null boundary.
    Predicate(ShapePredicate),
}

impl fmt::Debug for ShapeRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::All => f.write_str("All"),
            Self::Rectangles(r) => f.debug_tuple("Rectangles").field(r).finish(),
            Self::Predicate(_) => f.write_str("Predicate(..)"),
        }
    }
}

fn in_f2(x: f64, y: f64) -> bool {
    (0.0..=0.5).contains(&x) && y > 0.0 && x * x + y * y >= 1.0
}

impl ShapeRegion {
    pub fn predicate(f: impl Fn(f64, f64) -> bool + Send + Sync + 'static) -> Self {
        Self::Predicate(Arc::new(f))
    }

    pub fn contains(&self, p: &ShapePoint) -> bool {
        match self {
            Self::All => true,
            Self::Rectangles(rs) => rs.iter().any(|r| r.contains(p.x, p.y)),
            Self::Predicate(f) => f(p.x, p.y),
        }
    }
}

impl FromStr for ShapeRegion {
    type Err = Error;

    /// One rectangle `x0 x1 y0 y1` per line; `#` starts a comment and `inf`
    /// is accepted for `y1`. The single word `all` denotes F2.
    fn from_str(s: &str) -> Result<Self> {
        let mut rects = Vec::new();
        for (i, line) in s.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.eq_ignore_ascii_case("all") {
                return Ok(Self::All);
            }
            let v: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("region line {}: {e}", i + 1)))?;
            if v.len() != 4 || v.iter().any(|t| t.is_nan()) || v[0] > v[1] || v[2] > v[3] {
                return Err(Error::Parse(format!("region line {}: expected x0 x1 y0 y1", i + 1)));
            }
            rects.push(Rect::new(v[0], v[1], v[2], v[3]));
        }
        Ok(Self::Rectangles(rects))
    }
}

/// Hyperbolic area of F2, `pi / 6`.
pub const F2_MEASURE: f64 = std::f64::consts::FRAC_PI_6;

/// Hyperbolic area of `W`, to within `tol`. Rectangle unions are integrated
/// in closed form; predicates by adaptive subdivision in `(x, 1/y)`, where
/// the measure becomes Lebesgue measure.
pub fn hyperbolic_measure(w: &ShapeRegion, tol: f64) -> Result<f64> {
    match w {
        ShapeRegion::All => Ok(F2_MEASURE),
        ShapeRegion::Rectangles(rs) => Ok(union_measure(rs)),
        ShapeRegion::Predicate(f) => predicate_measure(f.as_ref(), tol),
    }
}

/// Area of `[x0, x1] x [y0, y1]` intersected with F2.
fn cell_measure(x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    let (x0, x1) = (x0.max(0.0), x1.min(0.5));
    let y0 = y0.max(0.0);
    if x0 >= x1 || y0 >= y1 {
        return 0.0;
    }
    let inv_y1 = if y1.is_finite() { 1.0 / y1 } else { 0.0 };
    let mut cuts = vec![x0, x1];
    for y in [y0, y1] {
        if y < 1.0 {
            let c = (1.0 - y * y).sqrt();
            if x0 < c && c < x1 {
                cuts.push(c);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        let s = (1.0 - mid * mid).sqrt();
        total += if s >= y1 {
            0.0
        } else if s > y0 {
            b.asin() - a.asin() - (b - a) * inv_y1
        } else {
            (b - a) * (1.0 / y0 - inv_y1)
        };
    }
    total
}

fn union_measure(rs: &[Rect]) -> f64 {
    let mut xs: Vec<f64> = rs.iter().flat_map(|r| [r.x0.clamp(0.0, 0.5), r.x1.clamp(0.0, 0.5)]).collect();
    let mut ys: Vec<f64> = rs.iter().flat_map(|r| [r.y0.max(0.0), r.y1.max(0.0)]).collect();
    for v in [&mut xs, &mut ys] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    let mut total = 0.0;
    for xw in xs.windows(2) {
        for yw in ys.windows(2) {
            let cx = 0.5 * (xw[0] + xw[1]);
            let cy = if yw[1].is_finite() { 0.5 * (yw[0] + yw[1]) } else { yw[0] + 1.0 };
            if rs.iter().any(|r| r.contains(cx, cy)) {
                total += cell_measure(xw[0], xw[1], yw[0], yw[1]);
            }
        }
    }
    total
}

const MIN_DEPTH: u32 = 6;
const MAX_DEPTH: u32 = 26;

fn predicate_measure(f: &(dyn Fn(f64, f64) -> bool + Send + Sync), tol: f64) -> Result<f64> {
    let umax = 2.0 / 3f64.sqrt();
    let inside = |x: f64, u: f64| {
        let y = 1.0 / u.max(1e-300);
        in_f2(x, y) && f(x, y)
    };
    let mut decided = 0.0;
    // Cells in the (x, u) box [0, 1/2] x [0, umax] whose status is unknown.
    let mut open = vec![(0.0, 0.0, 0.5, umax)];
    for depth in 0..=MAX_DEPTH {
        let mut next = Vec::new();
        let mut undecided = 0.0;
        for &(x, u, wx, wu) in &open {
            let samples = [
                (x, u),
                (x + wx, u),
                (x, u + wu),
                (x + wx, u + wu),
                (x + 0.5 * wx, u + 0.5 * wu),
            ];
            let hits = samples.iter().filter(|&&(sx, su)| inside(sx, su)).count();
            if depth >= MIN_DEPTH && (hits == 0 || hits == samples.len()) {
                if hits > 0 {
                    decided += wx * wu;
                }
            } else {
                undecided += wx * wu;
                let (hx, hu) = (0.5 * wx, 0.5 * wu);
                next.extend([(x, u, hx, hu), (x + hx, u, hx, hu), (x, u + hu, hx, hu), (x + hx, u + hu, hx, hu)]);
            }
        }
        if depth >= MIN_DEPTH && 0.5 * undecided <= tol {
            return Ok(decided + 0.5 * undecided);
        }
        if depth == MAX_DEPTH {
            return Err(Error::ToleranceNotMet(0.5 * undecided));
        }
        open = next;
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::BinaryCubicForm;
    use crate::rings::ring_from_form;

    const HEX: (f64, f64) = (0.5, 0.866_025_403_784_438_6);

    fn close(a: (f64, f64), b: (f64, f64)) -> bool {
        (a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9
    }

    #[test]
    fn halfplane_examples() {
        assert_eq!(gram_to_halfplane(&GramMatrix2::new(1.0, 0.0, 1.0)).unwrap(), (0.0, 1.0));
        assert!(close(gram_to_halfplane(&GramMatrix2::new(2.0, 1.0, 2.0)).unwrap(), HEX));
        assert!(close(gram_to_halfplane(&GramMatrix2::new(5.0, 2.0, 1.0)).unwrap(), (2.0, 1.0)));
        assert_eq!(gram_to_halfplane(&GramMatrix2::new(1.0, 2.0, 1.0)), Err(Error::NotPositiveDefinite));
    }

    #[test]
    fn reduction_examples() {
        let p = reduce_to_f2((1.0, 1.0));
        assert!(close((p.x, p.y), (0.0, 1.0)));
        let p = reduce_to_f2((0.1, 0.2));
        assert!(close((p.x, p.y), (0.0, 4.0)));
        let p = reduce_to_f2(HEX);
        assert!(close((p.x, p.y), HEX));
    }

    #[test]
    fn hexagonal_rings() {
        for f in [BinaryCubicForm::new(0, 1, -1, 0), BinaryCubicForm::new(1, 1, -2, -1)] {
            let r = ring_from_form(&f);
            let g = perp_gram(&r).unwrap();
            let [a, b, c] = g.exact.unwrap();
            assert_eq!(a, c);
            assert_eq!(2 * b.abs(), a);
            let s = shape_of_ring(&r).unwrap();
            assert!(close((s.x, s.y), HEX));
        }
    }

    #[test]
    fn complex_gram_determinant() {
        let r = ring_from_form(&BinaryCubicForm::new(1, 0, 0, 2));
        let g = perp_gram(&r).unwrap();
        assert!(g.exact.is_none());
        assert!((g.det() - 27.0 * 108.0).abs() < 1e-8);
        assert!(shape_of_ring(&r).unwrap().in_domain());
    }

    #[test]
    fn degenerate_ring_rejected() {
        let r = ring_from_form(&BinaryCubicForm::new(1, 0, 0, 0));
        assert_eq!(perp_gram(&r), Err(Error::DegenerateForm));
    }

    #[test]
    fn measures() {
        assert_eq!(hyperbolic_measure(&ShapeRegion::Rectangles(vec![]), 1e-9).unwrap(), 0.0);
        let top = ShapeRegion::Rectangles(vec![Rect::new(0.0, 0.5, 2.0, f64::INFINITY)]);
        assert!((hyperbolic_measure(&top, 1e-12).unwrap() - 0.25).abs() < 1e-12);
        let all = ShapeRegion::Rectangles(vec![Rect::new(-1.0, 1.0, 0.0, f64::INFINITY)]);
        assert!((hyperbolic_measure(&all, 1e-12).unwrap() - F2_MEASURE).abs() < 1e-12);
        let pred = ShapeRegion::predicate(|_, _| true);
        let m = hyperbolic_measure(&pred, 1e-4).unwrap();
        assert!((m - F2_MEASURE).abs() < 1e-4, "{m}");
    }

    #[test]
    fn region_parsing() {
        let w: ShapeRegion = "# top\n0 0.5 2 inf\n".parse().unwrap();
        assert!(matches!(&w, ShapeRegion::Rectangles(r) if r.len() == 1 && r[0].y1.is_infinite()));
        assert!("0 1 2".parse::<ShapeRegion>().is_err());
        assert!(matches!("all".parse::<ShapeRegion>().unwrap(), ShapeRegion::All));
    }
}
