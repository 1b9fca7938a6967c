//! Unitary DFT helpers (scale `1/sqrt(n)` in both directions), so `F^H F = I`.

use rustfft::FftPlanner;

use crate::scalar::{Cx, Real};

fn transform<T: Real>(x: &[Cx<T>], inverse: bool) -> Vec<Cx<T>> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mut planner = FftPlanner::<T>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let mut buf = x.to_vec();
    fft.process(&mut buf);
    let scale = T::one() / T::from_usize_lossy(n).sqrt();
    for z in &mut buf {
        *z *= scale;
    }
    buf
}

/// Forward unitary DFT: `X[k] = n^{-1/2} sum_m x[m] e^{-j 2 pi k m / n}`.
pub fn dft<T: Real>(x: &[Cx<T>]) -> Vec<Cx<T>> {
    transform(x, false)
}

/// Inverse unitary DFT.
pub fn idft<T: Real>(x: &[Cx<T>]) -> Vec<Cx<T>> {
    transform(x, true)
}

/// `e^{sign * j 2 pi (num mod den) / den}`, reduced before the trig call so the
/// phase stays accurate for large index products.
pub(crate) fn twiddle<T: Real>(num: usize, den: usize, sign: T) -> Cx<T> {
    let r = num % den;
    let angle = sign * T::TAU() * T::from_usize_lossy(r) / T::from_usize_lossy(den);
    Cx::new(angle.cos(), angle.sin())
}
