//! Scalar abstraction for the numeric modules.
//!
//! Everything that computes with probabilities or amplitudes is generic over
//! [`Real`]; the combinatorial modules ([`crate::manual`], [`crate::logic`])
//! carry no scalars at all. Concrete `f64` aliases live at the crate root.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Debug
    + Display
    + std::iter::Sum
    + serde::Serialize
    + serde::de::DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Conversion from an `f64` literal, for tolerances and constants.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant converts into any Real")
    }

    /// A stated tolerance, floored at a multiple of this scalar's epsilon.
    /// At `f64` every documented tolerance is far above the floor and comes
    /// through exactly; at `f32` the floor keeps structural checks meaningful.
    fn tol(base: f64) -> Self {
        Self::of(base).max(Self::epsilon() * Self::of(64.0))
    }
}

impl Real for f32 {}
impl Real for f64 {}
