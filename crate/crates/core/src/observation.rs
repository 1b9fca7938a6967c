//! LTE annihilation: maps the received spectrum onto the trailing zero-padding
//! samples, where the LTE block contributes nothing.
//!
//! With `Λ` the frequency response of the channel, `Λ⁻¹ ỹ` undoes the channel
//! and the inverse DFT returns to time. The last `v` time samples of the
//! equalized LTE block are the guard zeros, so keeping only those rows leaves
//! the narrowband signal seen through a `v × P` observation matrix.

use std::ops::Range;

use rustfft::FftPlanner;

use crate::dft::{dft, twiddle};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::scalar::{Cx, Real};
use crate::waveform::{CirChannel, ReceivedFrame, SystemDims};

/// Bins weaker than this fraction of the strongest bin are considered singular.
pub const SINGULARITY_FLOOR: f64 = 1e-6;

/// Diagonal of `Λ` with `H = F^H Λ F` for the unitary DFT `F`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelEigenvalues<T> {
    pub diag: Vec<Cx<T>>,
}

/// Dense observation matrix together with its column norms.
#[derive(Clone, Debug)]
pub struct ObservationMatrix<T> {
    pub w: CMat<T>,
    pub eigen: ChannelEigenvalues<T>,
    pub col_norms: Vec<T>,
}

impl<T: Real> ObservationMatrix<T> {
    /// Wraps an arbitrary matrix; columns must be nonzero.
    pub fn from_matrix(w: CMat<T>, eigen: ChannelEigenvalues<T>) -> Result<Self> {
        let col_norms = w.column_norms();
        if let Some(j) = col_norms.iter().position(|&n| !(n > T::zero()) || !n.is_finite()) {
            return Err(Error::ZeroColumn(j));
        }
        Ok(Self { w, eigen, col_norms })
    }

    pub fn rows(&self) -> usize {
        self.w.rows()
    }

    pub fn cols(&self) -> usize {
        self.w.cols()
    }
}

/// Post-processed measurement `y2 = W ỹ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurement<T> {
    pub y2: Vec<Cx<T>>,
}

/// Unnormalized FFT of the zero-padded impulse response.
pub fn channel_eigenvalues<T: Real>(
    cir: &CirChannel<T>,
    dims: &SystemDims,
) -> Result<ChannelEigenvalues<T>> {
    let p = dims.frame_len();
    if cir.taps.len() > p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: cir.taps.len(),
        });
    }
    let mut diag = cir.taps.clone();
    diag.resize(p, Cx::new(T::zero(), T::zero()));
    FftPlanner::<T>::new().plan_fft_forward(p).process(&mut diag);
    let mags: Vec<T> = diag.iter().map(|z| z.norm()).collect();
    let max = mags.iter().copied().fold(T::zero(), T::max);
    let floor = T::lit(SINGULARITY_FLOOR) * max;
    if let Some((index, &m)) = mags
        .iter()
        .enumerate()
        .find(|(_, &m)| !(m >= floor) || m == T::zero())
    {
        return Err(Error::SingularChannelBin {
            index,
            magnitude: m.as_f64(),
            floor: floor.as_f64(),
        });
    }
    Ok(ChannelEigenvalues { diag })
}

/// `ỹ = DFT(y)`.
pub fn to_frequency<T: Real>(frame: &ReceivedFrame<T>) -> Vec<Cx<T>> {
    dft(&frame.time_samples)
}

/// Observation matrix built from the guard rows `N..P` of the inverse DFT.
pub fn build_observation<T: Real>(
    eigen: &ChannelEigenvalues<T>,
    dims: &SystemDims,
) -> Result<ObservationMatrix<T>> {
    build_observation_rows(eigen, dims, dims.n_subcarriers..dims.frame_len())
}

/// Observation matrix from an arbitrary block of inverse-DFT rows. Only the
/// guard rows annihilate the LTE block; other ranges exist for negative tests.
pub fn build_observation_rows<T: Real>(
    eigen: &ChannelEigenvalues<T>,
    dims: &SystemDims,
    rows: Range<usize>,
) -> Result<ObservationMatrix<T>> {
    let p = dims.frame_len();
    if eigen.diag.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: eigen.diag.len(),
        });
    }
    if rows.end > p || rows.is_empty() {
        return Err(Error::InvalidDims(format!("row range {rows:?} outside 0..{p}")));
    }
    let scale = T::one() / T::from_usize_lossy(p).sqrt();
    let inv: Vec<Cx<T>> = eigen.diag.iter().map(|l| l.inv() * scale).collect();
    let rows_v: Vec<usize> = rows.collect();
    let w = CMat::from_fn(rows_v.len(), p, |r, i| {
        twiddle::<T>(rows_v[r] * i, p, T::one()) * inv[i]
    });
    ObservationMatrix::from_matrix(w, eigen.clone())
}

/// `y2 = W ỹ`.
pub fn measure<T: Real>(obs: &ObservationMatrix<T>, y_freq: &[Cx<T>]) -> Result<Measurement<T>> {
    if y_freq.len() != obs.cols() {
        return Err(Error::DimensionMismatch {
            expected: obs.cols(),
            got: y_freq.len(),
        });
    }
    Ok(Measurement {
        y2: obs.w.matvec(y_freq),
    })
}
