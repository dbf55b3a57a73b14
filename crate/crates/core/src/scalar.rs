//! Scalar abstraction for excitation energies.
//!
//! Energies only ever get added, compared and (for thermal rates)
//! exponentiated, so the combinatorial parts of the crate are written
//! against [`Energy`] and work equally with `f32`, `f64` and exact
//! rationals. The thermal code additionally needs [`ThermalScalar`].

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Anything that can play the role of an excitation energy.
pub trait Energy: Num + Copy + PartialOrd + Debug + Send + Sync + 'static {
    /// Larger of two values; ties keep `self`.
    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Smaller of two values; ties keep `self`.
    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl<T> Energy for T where T: Num + Copy + PartialOrd + Debug + Send + Sync + 'static {}

/// Floating point energies usable in Boltzmann factors.
pub trait ThermalScalar: Energy + Float + FromPrimitive + ToPrimitive {}

impl ThermalScalar for f32 {}
impl ThermalScalar for f64 {}

/// Exact rational energies.
pub type Exact = num_rational::Ratio<i64>;
