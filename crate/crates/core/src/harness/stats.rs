use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::run::{run_family, FamilyRow, RunOptions};
use super::spec::{FamilySpec, SignatureFilter};
use crate::arith::zeta3;
use crate::error::{Error, Result};
use crate::forms::{enumerate_forms, EnumerationRequest, EnumerationStrategy};
use crate::rings::Signature;
use crate::shapes::{hyperbolic_measure, ShapePoint, ShapeRegion, F2_MEASURE};

pub const BOOTSTRAP_RESAMPLES: usize = 1000;
pub const BOOTSTRAP_SEED: u64 = 0x00c0_ffee_2024;
/// A run is invalid when class data fails on more than this share of rows.
pub const MAX_FAILURE_RATE: f64 = 0.001;
/// Tolerance for the hyperbolic measure of a predicate region.
const MEASURE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    /// Rings with shape in the region.
    pub n: usize,
    /// Rings in the window with a computed shape, before the region filter.
    pub n_window: usize,
    /// Rows with class data.
    pub class_rows: usize,
    pub class_failures: usize,
    pub relation_deficits: usize,
    /// False when class failures exceed 0.1% of the rows.
    pub valid: bool,
    pub cl2_sum: u64,
    pub cl2_avg: Option<f64>,
    pub cl2_avg_se: Option<f64>,
    /// Totally real rows with class data.
    pub cl2_plus_rows: usize,
    pub cl2_plus_sum: u64,
    pub cl2_plus_avg: Option<f64>,
    pub cl2_plus_avg_se: Option<f64>,
    pub odd_h_proportion: Option<f64>,
    pub odd_h_proportion_se: Option<f64>,
    /// Share of the window whose shape lies in the region.
    pub shape_mass: Option<f64>,
    pub shape_mass_se: Option<f64>,
    /// `mu(W) / mu(F2)`.
    pub expected_mass: f64,
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Standard deviation of the mean over `resamples` bootstrap resamples.
pub fn bootstrap_se(values: &[f64], resamples: usize, seed: u64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = values.len();
    let means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[rng.gen_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    let m = means.iter().sum::<f64>() / resamples as f64;
    let var = means.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (resamples as f64 - 1.0).max(1.0);
    Some(var.sqrt())
}

fn stat(values: &[f64], salt: u64) -> (Option<f64>, Option<f64>) {
    (mean(values), bootstrap_se(values, BOOTSTRAP_RESAMPLES, BOOTSTRAP_SEED ^ salt))
}

/// Share of `F2` covered by `w`.
pub fn expected_fraction(w: &ShapeRegion) -> Result<f64> {
    Ok(hyperbolic_measure(w, MEASURE_TOL)? / F2_MEASURE)
}

/// Aggregate rows (already filtered to the region) into a report.
/// `n_window` counts the rows with a shape before the region filter.
pub fn report(spec: &FamilySpec, rows: &[FamilyRow], n_window: usize) -> Result<StatReport> {
    let with_class: Vec<&FamilyRow> = rows.iter().filter(|r| r.class.is_some()).collect();
    let ok: Vec<_> = rows.iter().filter_map(|r| r.class_row().map(|c| (r, c))).collect();
    let class_failures = with_class.len() - ok.len();
    let relation_deficits = with_class
        .iter()
        .filter(|r| matches!(r.class, Some(Err(Error::RelationDeficit))))
        .count();
    let cl2: Vec<f64> = ok.iter().map(|(_, c)| c.cl2 as f64).collect();
    let real: Vec<_> = ok.iter().filter(|(r, _)| r.signature() == Signature::TotallyReal).collect();
    let cl2_plus: Vec<f64> = real.iter().map(|(_, c)| c.cl2_plus as f64).collect();
    let odd: Vec<f64> = ok.iter().map(|(_, c)| (c.h % 2) as f64).collect();
    let (cl2_avg, cl2_avg_se) = stat(&cl2, 1);
    let (cl2_plus_avg, cl2_plus_avg_se) = stat(&cl2_plus, 2);
    let (odd_h_proportion, odd_h_proportion_se) = stat(&odd, 3);
    let mut inside = vec![1.0; rows.len()];
    inside.resize(n_window.max(rows.len()), 0.0);
    let (shape_mass, shape_mass_se) = stat(&inside, 4);
    Ok(StatReport {
        n: rows.len(),
        n_window,
        class_rows: with_class.len(),
        class_failures,
        relation_deficits,
        valid: class_failures as f64 <= MAX_FAILURE_RATE * with_class.len() as f64,
        cl2_sum: ok.iter().map(|(_, c)| c.cl2).sum(),
        cl2_avg,
        cl2_avg_se,
        cl2_plus_rows: cl2_plus.len(),
        cl2_plus_sum: real.iter().map(|(_, c)| c.cl2_plus).sum(),
        cl2_plus_avg,
        cl2_plus_avg_se,
        odd_h_proportion,
        odd_h_proportion_se,
        shape_mass,
        shape_mass_se,
        expected_mass: expected_fraction(&spec.region)?,
    })
}

/// Average `|Cl_2|` inside and outside a region, with a bootstrap standard
/// error for the difference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionComparison {
    pub n_in: usize,
    pub n_out: usize,
    pub avg_in: f64,
    pub avg_out: f64,
    pub se_diff: f64,
}

impl RegionComparison {
    pub fn diff(&self) -> f64 {
        self.avg_in - self.avg_out
    }

    /// `|diff| / se_diff`.
    pub fn z(&self) -> f64 {
        if self.se_diff > 0.0 {
            self.diff().abs() / self.se_diff
        } else if self.diff() == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Split rows with class data by `w` and compare average `|Cl_2|`.
pub fn compare_regions(rows: &[FamilyRow], w: &ShapeRegion) -> Result<RegionComparison> {
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for r in rows {
        if let (Ok(p), Some(c)) = (&r.shape, r.class_row()) {
            if w.contains(p) { a.push(c.cl2 as f64) } else { b.push(c.cl2 as f64) }
        }
    }
    let need = 2;
    if a.len() < need || b.len() < need {
        return Err(Error::SampleTooSmall(a.len().min(b.len()), need));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(BOOTSTRAP_SEED);
    let mut draw = |v: &[f64]| (0..v.len()).map(|_| v[rng.gen_range(0..v.len())]).sum::<f64>() / v.len() as f64;
    let diffs: Vec<f64> = (0..BOOTSTRAP_RESAMPLES).map(|_| draw(&a) - draw(&b)).collect();
    let m = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let var = diffs.iter().map(|d| (d - m) * (d - m)).sum::<f64>() / (diffs.len() - 1) as f64;
    Ok(RegionComparison {
        n_in: a.len(),
        n_out: b.len(),
        avg_in: mean(&a).unwrap_or(0.0),
        avg_out: mean(&b).unwrap_or(0.0),
        se_diff: var.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equidistribution {
    pub n: usize,
    pub empirical: f64,
    pub expected: f64,
    /// Binomial z-score of the empirical fraction.
    pub z: f64,
}

impl Equidistribution {
    /// Binomial standard deviation of the empirical fraction.
    pub fn sigma(&self) -> f64 {
        (self.expected * (1.0 - self.expected) / self.n as f64).sqrt()
    }
}

pub const MIN_EQUIDISTRIBUTION_SAMPLE: usize = 100;

/// Fraction of `shapes` in `w` against `mu(W) / mu(F2)`.
pub fn equidistribution(shapes: &[ShapePoint], w: &ShapeRegion) -> Result<Equidistribution> {
    let n = shapes.len();
    if n < MIN_EQUIDISTRIBUTION_SAMPLE {
        return Err(Error::SampleTooSmall(n, MIN_EQUIDISTRIBUTION_SAMPLE));
    }
    let empirical = shapes.iter().filter(|p| w.contains(p)).count() as f64 / n as f64;
    let expected = expected_fraction(w)?;
    let sd = (expected * (1.0 - expected) / n as f64).sqrt();
    let gap = empirical - expected;
    let z = if sd > 0.0 {
        gap / sd
    } else if gap.abs() < 1e-12 {
        0.0
    } else {
        f64::INFINITY.copysign(gap)
    };
    Ok(Equidistribution { n, empirical, expected, z })
}

/// Enumerate the family ignoring its region and test the shapes against `w`.
pub fn equidistribution_test(spec: &FamilySpec, w: &ShapeRegion) -> Result<Equidistribution> {
    let all = spec.clone().with_region(ShapeRegion::All);
    let run = run_family(&all, &RunOptions::default())?;
    let shapes: Vec<ShapePoint> = run.rows.iter().filter_map(|r| r.shape.clone().ok()).collect();
    equidistribution(&shapes, w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountingCheck {
    pub count: usize,
    pub ratio: f64,
    /// Predicted count `c X` with `c = 1/(12 zeta(3))` (totally real),
    /// `1/(4 zeta(3))` (complex) or their sum.
    pub reference: f64,
}

impl CountingCheck {
    /// `count / reference`.
    pub fn relative(&self) -> f64 {
        self.count as f64 / self.reference
    }
}

/// Number of maximal irreducible classes with `0 < sign * disc <= x`
/// against the predicted main term.
pub fn counting_constant_check(signature: SignatureFilter, x: u64) -> CountingCheck {
    let x = x as i128;
    let (lo, hi, c) = match signature {
        SignatureFilter::TotallyReal => (0, x, 1.0 / 12.0),
        SignatureFilter::Complex => (-x, 0, 0.25),
        SignatureFilter::Any => (-x, x, 1.0 / 3.0),
    };
    let count = enumerate_forms(&EnumerationRequest::maximal_irreducible(lo, hi), EnumerationStrategy::ReducedTraversal).len();
    CountingCheck {
        count,
        ratio: count as f64 / x as f64,
        reference: c * x as f64 / zeta3(),
    }
}
