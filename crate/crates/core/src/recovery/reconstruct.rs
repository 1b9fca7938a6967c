//! Least-squares amplitude recovery on an estimated support and QPSK slicing.

use crate::linalg::lstsq_columns;
use crate::observation::ObservationMatrix;
use crate::scalar::{Cx, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct LsRecovery<T> {
    /// Length-`P` spectrum, zero outside the support.
    pub vector: Vec<Cx<T>>,
    pub residual_norm: T,
    /// The restricted matrix was rank deficient; `vector` holds the minimum-norm solution.
    pub rank_deficient: bool,
}

/// Fits `y2` with the listed columns. An empty support yields the zero spectrum.
pub fn ls_recover<T: Real>(y2: &[Cx<T>], obs: &ObservationMatrix<T>, support: &[usize]) -> LsRecovery<T> {
    let ls = lstsq_columns(&obs.w, support, y2, false);
    let mut vector = vec![Cx::new(T::zero(), T::zero()); obs.cols()];
    for (&j, c) in support.iter().zip(&ls.coeffs) {
        vector[j] = *c;
    }
    LsRecovery {
        rank_deficient: ls.rank_deficient(),
        vector,
        residual_norm: ls.residual_norm,
    }
}

/// Hard QPSK decisions on the listed bins after dividing out `gain`.
/// Bit 0 is set for a negative real part, bit 1 for a negative imaginary part;
/// zero decides 0.
pub fn demodulate<T: Real>(recovered: &[Cx<T>], bins: &[usize], gain: T) -> Vec<u8> {
    let mut bits = Vec::with_capacity(2 * bins.len());
    for &t in bins {
        let z = recovered[t] / gain;
        bits.push(u8::from(z.re < T::zero()));
        bits.push(u8::from(z.im < T::zero()));
    }
    bits
}

pub fn bit_errors(a: &[u8], b: &[u8]) -> usize {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observation::{build_observation, channel_eigenvalues, measure};
    use crate::waveform::{draw_cir, gen_nbiot_signal, Start, SystemDims};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noiseless_true_support_is_exact() {
        let d = SystemDims::new(48, 16, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let cir = draw_cir::<f64, _>(&mut rng, &d, Some(2.0)).unwrap();
        let obs = build_observation(&channel_eigenvalues(&cir, &d).unwrap(), &d).unwrap();
        let nb = gen_nbiot_signal::<f64, _>(&mut rng, &d, 3, Start::At(62), 0.7).unwrap();
        let y2 = measure(&obs, &nb.freq_vector).unwrap().y2;
        let rec = ls_recover(&y2, &obs, &nb.support);
        assert!(!rec.rank_deficient);
        for (a, b) in rec.vector.iter().zip(&nb.freq_vector) {
            assert!((a - b).norm() < 1e-8);
        }
        let bits = demodulate(&rec.vector, &nb.support, nb.gain);
        assert_eq!(bits, nb.payload_bits);
        let neg: Vec<_> = rec.vector.iter().map(|z| -z).collect();
        let flipped = demodulate(&neg, &nb.support, nb.gain);
        assert_eq!(bit_errors(&flipped, &nb.payload_bits), nb.payload_bits.len());
    }

    #[test]
    fn empty_support_gives_zero_vector() {
        let d = SystemDims::new(8, 4, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cir = draw_cir::<f64, _>(&mut rng, &d, None).unwrap();
        let obs = build_observation(&channel_eigenvalues(&cir, &d).unwrap(), &d).unwrap();
        let rec = ls_recover(&[Cx::new(1.0, 0.0); 4], &obs, &[]);
        assert!(rec.vector.iter().all(|z| z.norm() == 0.0));
        assert_eq!(demodulate(&rec.vector, &[0, 1], 1.0), vec![0, 0, 0, 0]);
    }
}
