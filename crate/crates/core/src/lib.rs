pub mod error;
pub mod ideals;
pub mod model;
pub mod parametrization;
pub mod poly;
pub mod tree;
