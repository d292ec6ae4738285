//! Exact computations for the Killing connection on locally symmetric spaces.

pub mod scalars;
pub mod tensor;
pub mod linalg;
pub mod spaces;
pub mod killing;
pub mod harness;
pub mod filtration;
pub mod exactness;
