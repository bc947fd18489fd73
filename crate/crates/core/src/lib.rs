//! Dynamics and arithmetic of regular plane polynomial automorphisms.

pub mod cli;
pub mod error;
pub mod family;
pub mod fp;
pub mod green;
pub mod height;
pub mod map;
pub mod measure;
pub mod padic;
pub mod periodic;
pub mod poly;
pub mod rational;
pub mod spec_file;

pub use error::{Error, Result};
pub use map::{
    common_iterate_detect, equal_symbolic, Automorphism, ComplexHenon, Direction, ElementaryHenon,
    ExactPoint, HenonInverse, HenonMap, NumPoint, Point2,
};
pub use rational::Rational;
