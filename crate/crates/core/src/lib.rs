//! Recovery of an in-band narrowband signal hidden under a ZP-OFDM LTE
//! interferer.
//!
//! The receiver projects the spectrum onto the zero-padding samples, where the
//! LTE block vanishes, and recovers the sparse narrowband support from the
//! resulting underdetermined system with repeated sparsity-adaptive pursuit.

pub mod baselines;
pub mod dft;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod observation;
pub mod recovery;
pub mod scalar;
pub mod waveform;

pub use error::{Error, Result};
pub use scalar::{Cx, Real};

/// Double-precision aliases; the simulation harness runs at this precision.
pub type Complex64 = Cx<f64>;
pub type ObservationMatrix = observation::ObservationMatrix<f64>;
pub type NbIotSignal = waveform::NbIotSignal<f64>;
pub type SyntheticFrame = waveform::SyntheticFrame<f64>;
pub type CirChannel = waveform::CirChannel<f64>;
pub type Matrix = linalg::CMat<f64>;

/// Single-precision aliases.
pub mod f32 {
    pub type Complex = crate::Cx<f32>;
    pub type ObservationMatrix = crate::observation::ObservationMatrix<f32>;
    pub type NbIotSignal = crate::waveform::NbIotSignal<f32>;
    pub type SyntheticFrame = crate::waveform::SyntheticFrame<f32>;
    pub type Matrix = crate::linalg::CMat<f32>;
}
