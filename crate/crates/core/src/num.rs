//! Scalar abstraction for log-probability arithmetic.

use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point type usable for scores and log-probabilities.
pub trait Float:
    num_traits::Float + num_traits::FloatConst + Debug + Display + Default + Sum + Send + Sync + 'static
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;

    fn from_count(n: u64) -> Self {
        Self::from_f64(n as f64)
    }
}

impl Float for f32 {
    fn from_f64(v: f64) -> Self {
        v as f32
    }

    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Float for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }

    fn to_f64(self) -> f64 {
        self
    }
}
