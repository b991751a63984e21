//! LLL reduction and Fincke-Pohst enumeration for rank-3 lattices inside a
//! cubic ring, under the Minkowski form or another positive definite form.

use crate::error::{Error, Result};
use crate::rings::{CubicRing, Embeddings, IntElem, RingElement, Signature};

use super::ideal::IdealHNF;

/// Default cap on Fincke-Pohst search nodes.
pub const DEFAULT_NODE_BUDGET: u64 = 5_000_000;

/// Relative slack added to enumeration bounds before the exact re-check.
const ENUM_EPS: f64 = 1e-9;

pub(crate) type Gram3 = [[f64; 3]; 3];

/// Quadratic form on O-coordinates, by default the Minkowski form `T2`.
#[derive(Debug, Clone)]
pub(crate) struct Metric {
    pub gram: Gram3,
    /// Exact integer Gram matrix (the trace form) when available.
    pub exact: Option<[[i128; 3]; 3]>,
}

impl Metric {
    pub fn t2(ring: &CubicRing, emb: &Embeddings) -> Self {
        if ring.signature() == Signature::TotallyReal {
            let e = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
            let mut g = [[0i128; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    g[i][j] = ring.trace_int(ring.mul_int(e[i], e[j]));
                }
            }
            Metric {
                gram: g.map(|r| r.map(|v| v as f64)),
                exact: Some(g),
            }
        } else {
            Metric {
                gram: emb.t2_gram(),
                exact: None,
            }
        }
    }

    pub fn eval(&self, x: IntElem) -> f64 {
        if let Some(g) = self.exact {
            let mut s = 0i128;
            for i in 0..3 {
                for j in 0..3 {
                    s += x[i] * g[i][j] * x[j];
                }
            }
            return s as f64;
        }
        let xf = x.map(|v| v as f64);
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += xf[i] * self.gram[i][j] * xf[j];
            }
        }
        s
    }

    fn inner(&self, x: IntElem, y: IntElem) -> f64 {
        let (xf, yf) = (x.map(|v| v as f64), y.map(|v| v as f64));
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += xf[i] * self.gram[i][j] * yf[j];
            }
        }
        s
    }

    fn gram_of(&self, b: &[IntElem; 3]) -> Gram3 {
        let mut g = [[0f64; 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                g[i][j] = self.inner(b[i], b[j]);
                g[j][i] = g[i][j];
            }
        }
        g
    }
}

fn sub_mul(x: IntElem, q: i128, y: IntElem) -> IntElem {
    [x[0] - q * y[0], x[1] - q * y[1], x[2] - q * y[2]]
}

/// LLL-reduce a basis (delta = 0.99) under the metric.
pub(crate) fn lll(basis: [IntElem; 3], metric: &Metric) -> [IntElem; 3] {
    let mut b = basis;
    let mut k = 1;
    let mut guard = 0;
    while k < 3 && guard < 10_000 {
        guard += 1;
        for j in (0..k).rev() {
            let (mu, _) = gram_schmidt(&metric.gram_of(&b));
            let q = mu[k][j].round();
            if q != 0.0 && q.is_finite() {
                b[k] = sub_mul(b[k], q as i128, b[j]);
            }
        }
        let (mu, bs) = gram_schmidt(&metric.gram_of(&b));
        if bs[k] < (0.99 - mu[k][k - 1] * mu[k][k - 1]) * bs[k - 1] {
            b.swap(k, k - 1);
            k = if k > 1 { k - 1 } else { 1 };
        } else {
            k += 1;
        }
    }
    b
}

fn gram_schmidt(g: &Gram3) -> ([[f64; 3]; 3], [f64; 3]) {
    let mut mu = [[0f64; 3]; 3];
    let mut bs = [0f64; 3];
    for i in 0..3 {
        for j in 0..i {
            let mut s = g[i][j];
            for k in 0..j {
                s -= mu[j][k] * mu[i][k] * bs[k];
            }
            mu[i][j] = s / bs[j];
        }
        let mut s = g[i][i];
        for k in 0..i {
            s -= mu[i][k] * mu[i][k] * bs[k];
        }
        bs[i] = s;
    }
    (mu, bs)
}

/// Enumerate all nonzero `x = sum c_j b_j` with `metric(x) <= bound` (both
/// signs), calling `visit`. The basis should be LLL-reduced.
pub(crate) fn fincke_pohst(
    basis: &[IntElem; 3],
    metric: &Metric,
    bound: f64,
    budget: u64,
    mut visit: impl FnMut(IntElem, f64),
) -> Result<()> {
    let g = metric.gram_of(basis);
    // Cholesky-style decomposition Q(x) = sum_i q_ii (x_i + sum_{j>i} q_ij x_j)^2
    let mut q = g;
    for i in 0..3 {
        for j in i + 1..3 {
            q[j][i] = q[i][j];
            q[i][j] /= q[i][i];
        }
        for k in i + 1..3 {
            for l in k..3 {
                q[k][l] -= q[k][i] * q[i][l];
            }
        }
    }
    if (0..3).any(|i| !(q[i][i] > 0.0)) {
        return Err(Error::NotPositiveDefinite);
    }
    let c = bound * (1.0 + ENUM_EPS) + ENUM_EPS;
    let mut nodes = 0u64;
    let mut x = [0i128; 3];
    // remaining budget at each level
    let mut t = [0f64; 3];
    let mut center = [0f64; 3];
    let mut upper = [0i128; 3];
    let mut i = 2usize;
    t[2] = c;
    center[2] = 0.0;
    let init = |i: usize, t: &[f64; 3], center: &[f64; 3], x: &mut [i128; 3], upper: &mut [i128; 3]| {
        let r = (t[i] / q[i][i]).max(0.0).sqrt();
        x[i] = (center[i] - r).ceil() as i128 - 1;
        upper[i] = (center[i] + r).floor() as i128;
    };
    init(2, &t, &center, &mut x, &mut upper);
    loop {
        x[i] += 1;
        nodes += 1;
        if nodes > budget {
            return Err(Error::BudgetExceeded);
        }
        if x[i] > upper[i] {
            if i == 2 {
                break;
            }
            i += 1;
            continue;
        }
        let d = x[i] as f64 - center[i];
        let rem = t[i] - q[i][i] * d * d;
        if i == 0 {
            if x != [0, 0, 0] {
                let elem = [0, 1, 2].map(|r| x[0] * basis[0][r] + x[1] * basis[1][r] + x[2] * basis[2][r]);
                let val = metric.eval(elem);
                if val <= c {
                    visit(elem, val);
                }
            }
            continue;
        }
        i -= 1;
        t[i] = rem;
        center[i] = -(i + 1..3).map(|j| q[i][j] * x[j] as f64).sum::<f64>();
        init(i, &t, &center, &mut x, &mut upper);
    }
    Ok(())
}

/// All nonzero elements of the integral ideal `ideal` with Minkowski norm
/// `sum |sigma_i(alpha)|^2 <= t2_bound`, found by Fincke-Pohst enumeration.
pub fn short_elements(ring: &CubicRing, ideal: &IdealHNF, t2_bound: f64, budget: u64) -> Result<Vec<RingElement>> {
    let emb = ring.embeddings()?;
    let metric = Metric::t2(ring, &emb);
    let basis = lll(ideal.basis(), &metric);
    let mut out = Vec::new();
    fincke_pohst(&basis, &metric, t2_bound, budget, |x, v| {
        if v <= t2_bound * (1.0 + ENUM_EPS) {
            out.push(x);
        }
    })?;
    out.sort_by(|a, b| metric.eval(*a).total_cmp(&metric.eval(*b)).then(a.cmp(b)));
    Ok(out.into_iter().map(|x| ring.element_int(x)).collect())
}
