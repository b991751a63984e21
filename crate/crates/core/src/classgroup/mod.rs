//! Ideal arithmetic, units, class groups and narrow class groups of maximal
//! cubic orders.

mod ideal;
mod lattice;
mod linalg;
mod oracle;
mod relations;
mod units;

pub use ideal::{ideal_eq, ideal_mul, ideal_norm, ideal_pow, primes_above, valuation, IdealHNF, PrimeIdeal};
pub use lattice::{short_elements, DEFAULT_NODE_BUDGET};
pub use relations::{
    class_data, class_data_unchecked, class_group, minkowski_bound, narrow_class_group, two_torsion_size,
    AbelianGroupData, ClassGroupData,
};
pub use oracle::brute_force_class_group;
pub use units::{principal_generator, unit_group, UnitGroupData};
