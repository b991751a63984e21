//! Cubic rings from binary cubic forms: enumeration, shapes in the modular
//! surface, class groups of maximal orders, and family statistics.

pub mod arith;
pub mod classgroup;
pub mod error;
pub mod forms;
pub mod harness;
pub mod numeric;
pub mod pairs;
pub mod rings;
pub mod shapes;

pub use error::{Error, Result};
