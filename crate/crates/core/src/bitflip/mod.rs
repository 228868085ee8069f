//! State-vector model of a measurement-free correction gadget for the
//! three-qubit bit-flip code.

pub mod gadget;
pub mod statevector;

pub use gadget::{ft_check, run_gadget, scaling_curve, FtReport, MfecGadget, ScalingCurve};
pub use statevector::StateVector;
