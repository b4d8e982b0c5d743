//! Direct dynamics of forced fiber maps over the rotation `theta -> theta + omega`:
//! invariant curves, derivative products, `G_1` and its derivative, and
//! reducibility-loss slopes.

mod curve;
mod dg1;
mod slopes;
mod trig;

pub use curve::{
    derivative_product, g1, g1_hat, iterate_fiber, solve_invariant_curve, CurveOptions, DerivativeProduct, FiberMap,
    InvariantCurve, QPFiber,
};
pub use dg1::{dg1, dg1_checked, dg1_fd_check, dg1_hat, dg1_hat_with, dg1_with, TOL_SIGMA1};
pub use slopes::{
    direct_slope, locate_reducibility_loss, slope_formula, DirectOptions, DirectSlope, FixedPointTail, SlopeMode,
    SlopeOptions, SlopeReport, TailConvention, ThreeFactors,
};
pub use trig::{extremum, extremum_big_m, extremum_m, Extremum, ExtremumKind, TrigPoly};
