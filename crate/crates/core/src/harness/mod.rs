//! Families of cubic rings: enumeration pipeline, class data cache and
//! statistics (averages of 2-torsion, odd class numbers, shape masses).
//!
//! Runs are deterministic: rows come out sorted by `|disc|` and form, and
//! every bootstrap uses a fixed seed, whatever the number of workers.

mod run;
mod spec;
mod stats;

pub use run::{compute_class_row, load_cache, run_family, write_class_csv, ClassRow, FamilyRow, FamilyRun, RunOptions};
pub use spec::{FamilySpec, SignatureFilter};
pub use stats::{
    bootstrap_se, compare_regions, counting_constant_check, equidistribution, equidistribution_test, expected_fraction,
    report, CountingCheck, Equidistribution, RegionComparison, StatReport, BOOTSTRAP_RESAMPLES, BOOTSTRAP_SEED,
    MAX_FAILURE_RATE, MIN_EQUIDISTRIBUTION_SAMPLE,
};
