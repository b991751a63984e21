//! Floating-point root finding for integral cubics.

/// Roots of a real cubic `a x^3 + b x^2 + c x + d` with `a != 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicRoots {
    /// Real roots, ascending.
    pub real: Vec<f64>,
    /// One root of the complex-conjugate pair (imaginary part > 0), if any.
    pub complex: Option<(f64, f64)>,
}

fn horner(a: f64, b: f64, c: f64, d: f64, x: f64) -> (f64, f64) {
    let v = ((a * x + b) * x + c) * x + d;
    let dv = (3.0 * a * x + 2.0 * b) * x + c;
    (v, dv)
}

/// Newton polish with a bisection guard.
fn polish(a: f64, b: f64, c: f64, d: f64, mut x: f64) -> f64 {
    for _ in 0..60 {
        let (v, dv) = horner(a, b, c, d, x);
        if v == 0.0 || dv == 0.0 {
            break;
        }
        let step = v / dv;
        let nx = x - step;
        if !nx.is_finite() {
            break;
        }
        if (nx - x).abs() <= 1e-17 * x.abs().max(1e-300) {
            x = nx;
            break;
        }
        x = nx;
    }
    x
}

/// Roots of `a x^3 + b x^2 + c x + d`. `disc_sign` decides how many real roots
/// are reported (pass the sign of the exact discriminant when it is known).
pub fn cubic_roots(a: f64, b: f64, c: f64, d: f64, disc_sign: i32) -> CubicRoots {
    assert!(a != 0.0, "leading coefficient must be nonzero");
    let (p, q, r) = (b / a, c / a, d / a);
    // Depressed cubic t^3 + e t + g with x = t - p/3.
    let shift = p / 3.0;
    let e = q - p * p / 3.0;
    let g = 2.0 * p * p * p / 27.0 - p * q / 3.0 + r;
    if disc_sign > 0 || (disc_sign == 0 && e < 0.0 && 4.0 * e * e * e + 27.0 * g * g <= 0.0) {
        // Three real roots: trigonometric form.
        let m = 2.0 * (-e / 3.0).max(0.0).sqrt();
        let arg = if m == 0.0 {
            0.0
        } else {
            (3.0 * g / (e * m)).clamp(-1.0, 1.0)
        };
        let theta = arg.acos() / 3.0;
        let mut roots: Vec<f64> = (0..3)
            .map(|k| {
                let t = m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
                polish(a, b, c, d, t - shift)
            })
            .collect();
        roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
        CubicRoots {
            real: roots,
            complex: None,
        }
    } else {
        // One real root: Cardano, then deflate.
        let disc = (g * g / 4.0 + e * e * e / 27.0).max(0.0);
        let s = disc.sqrt();
        let u = (-g / 2.0 + s).cbrt();
        let v = (-g / 2.0 - s).cbrt();
        let t = u + v;
        let alpha = polish(a, b, c, d, t - shift);
        // Quotient x^2 + lp x + lq of the monic cubic by (x - alpha).
        let lp = p + alpha;
        let lq = if alpha.abs() > 1.0 {
            -r / alpha
        } else {
            q + alpha * lp
        };
        let re = -lp / 2.0;
        let im = (lq - lp * lp / 4.0).max(0.0).sqrt();
        CubicRoots {
            real: vec![alpha],
            complex: Some((re, im)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_real_roots() {
        // (x-1)(x-2)(x-3)
        let r = cubic_roots(1.0, -6.0, 11.0, -6.0, 1);
        for (got, want) in r.real.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn one_real_root() {
        // x^3 + 2
        let r = cubic_roots(1.0, 0.0, 0.0, 2.0, -1);
        let cbrt2 = 2f64.cbrt();
        assert!((r.real[0] + cbrt2).abs() < 1e-14);
        let (re, im) = r.complex.unwrap();
        assert!((re - cbrt2 / 2.0).abs() < 1e-13);
        assert!((im - cbrt2 * 3f64.sqrt() / 2.0).abs() < 1e-13);
    }
}
