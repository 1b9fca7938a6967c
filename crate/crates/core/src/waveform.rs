//! Transmit side: LTE ZP-OFDM interferer, sparse narrowband signal, multipath
//! channel and the composite received frame.
//!
//! Indices are 0-based in storage. A narrowband support starting at `start`
//! occupies `start, start+1, ...` modulo the frame length.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dft::{dft, idft};
use crate::error::{Error, Result};
use crate::observation::channel_eigenvalues;
use crate::scalar::{energy, Cx, Real};

/// Subcarrier counts of the narrowband resource-unit formats.
pub const RU_FORMATS: [usize; 4] = [1, 3, 6, 12];

/// Redraw budget for channels failing the invertibility floor.
pub const MAX_CHANNEL_ATTEMPTS: usize = 100;

/// Frame geometry: OFDM block length, zero-padding length and channel memory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDims {
    pub n_subcarriers: usize,
    pub zp_len: usize,
    pub cir_len: usize,
}

impl Default for SystemDims {
    /// 600 subcarriers, 144 zero-padding samples, 51 taps.
    fn default() -> Self {
        Self {
            n_subcarriers: 600,
            zp_len: 144,
            cir_len: 50,
        }
    }
}

impl SystemDims {
    pub fn new(n_subcarriers: usize, zp_len: usize, cir_len: usize) -> Result<Self> {
        let d = Self {
            n_subcarriers,
            zp_len,
            cir_len,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_subcarriers == 0 {
            return Err(Error::InvalidDims("n_subcarriers must be positive".into()));
        }
        if self.zp_len == 0 {
            return Err(Error::InvalidDims("zp_len must be at least 1".into()));
        }
        if self.cir_len + 1 > self.frame_len() {
            return Err(Error::InvalidDims(format!(
                "cir_len {} does not fit a frame of {}",
                self.cir_len,
                self.frame_len()
            )));
        }
        // A channel tail longer than the guard would wrap into the next block
        // and the linear and circular models would no longer coincide.
        if self.cir_len > self.zp_len {
            return Err(Error::InvalidDims(format!(
                "cir_len {} exceeds zp_len {}",
                self.cir_len, self.zp_len
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn frame_len(&self) -> usize {
        self.n_subcarriers + self.zp_len
    }
}

/// Channel impulse response `h(0..=L)` with unit total energy.
#[derive(Clone, Debug, PartialEq)]
pub struct CirChannel<T> {
    pub taps: Vec<Cx<T>>,
}

impl<T: Real> CirChannel<T> {
    /// Normalizes the taps to unit energy. Fails on an all-zero or empty response.
    pub fn from_taps(mut taps: Vec<Cx<T>>) -> Result<Self> {
        let e = energy(&taps);
        if taps.is_empty() || e == T::zero() || taps[0].norm() == T::zero() {
            return Err(Error::InvalidDims(
                "channel needs a nonzero leading tap".into(),
            ));
        }
        let s = T::one() / e.sqrt();
        for t in &mut taps {
            *t *= s;
        }
        Ok(Self { taps })
    }

    pub fn identity() -> Self {
        Self {
            taps: vec![Cx::new(T::one(), T::zero())],
        }
    }

    pub fn cir_len(&self) -> usize {
        self.taps.len() - 1
    }
}

/// Frequency-domain LTE payload of one OFDM block.
#[derive(Clone, Debug, PartialEq)]
pub struct LteSymbol<T> {
    pub freq_symbols: Vec<Cx<T>>,
}

/// Sparse frequency-domain narrowband signal.
#[derive(Clone, Debug, PartialEq)]
pub struct NbIotSignal<T> {
    pub freq_vector: Vec<Cx<T>>,
    /// Occupied bins in transmission order (circularly contiguous).
    pub support: Vec<usize>,
    pub sparsity: usize,
    pub start: usize,
    /// Two bits per occupied bin, in support order.
    pub payload_bits: Vec<u8>,
    pub gain: T,
}

impl<T: Real> NbIotSignal<T> {
    /// Last occupied bin.
    pub fn end(&self) -> usize {
        *self.support.last().expect("nonempty support")
    }

    /// Support in ascending index order.
    pub fn sorted_support(&self) -> Vec<usize> {
        let mut s = self.support.clone();
        s.sort_unstable();
        s
    }

    /// Same signal with every amplitude scaled by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        let mut out = self.clone();
        for z in &mut out.freq_vector {
            *z *= factor;
        }
        out.gain = self.gain * factor;
        out
    }

    pub fn time_samples(&self) -> Vec<Cx<T>> {
        idft(&self.freq_vector)
    }
}

/// Received time-domain frame `y` plus the noise level used to make it.
#[derive(Clone, Debug)]
pub struct ReceivedFrame<T> {
    pub time_samples: Vec<Cx<T>>,
    pub noise_var: T,
    pub nb: NbIotSignal<T>,
}

/// Per-subcarrier powers and the resulting ratios in dB.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerReport<T> {
    pub p_nb: T,
    pub p_lte: T,
    pub snr_db: T,
    pub sir_db: T,
}

/// Where a random narrowband start may fall.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    /// Anywhere in the frame; the support may wrap past the last bin.
    #[default]
    Circular,
    /// Only starts whose support does not wrap.
    Confined,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Start {
    At(usize),
    Random(Placement),
}

/// Gray-mapped unit-energy QPSK: bit 0 drives the real sign, bit 1 the imaginary sign.
pub fn qpsk<T: Real>(b0: u8, b1: u8) -> Cx<T> {
    let s = T::FRAC_1_SQRT_2();
    let re = if b0 == 0 { s } else { -s };
    let im = if b1 == 0 { s } else { -s };
    Cx::new(re, im)
}

pub(crate) fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R, var: T) -> Cx<T> {
    let s = (var.as_f64() / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Cx::new(T::lit(re * s), T::lit(im * s))
}

pub fn gen_lte_symbol<T: Real, R: Rng + ?Sized>(rng: &mut R, dims: &SystemDims) -> LteSymbol<T> {
    let freq_symbols = (0..dims.n_subcarriers)
        .map(|_| qpsk(rng.random_range(0..2u8), rng.random_range(0..2u8)))
        .collect();
    LteSymbol { freq_symbols }
}

pub fn gen_nbiot_signal<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    dims: &SystemDims,
    sparsity: usize,
    start: Start,
    gain: T,
) -> Result<NbIotSignal<T>> {
    if !RU_FORMATS.contains(&sparsity) {
        return Err(Error::UnsupportedRuFormat(sparsity));
    }
    let p = dims.frame_len();
    if sparsity > p {
        return Err(Error::InvalidDims(format!(
            "sparsity {sparsity} exceeds frame length {p}"
        )));
    }
    let start = match start {
        Start::At(s) if s < p => s,
        Start::At(s) => return Err(Error::StartOutOfRange { start: s, frame_len: p }),
        Start::Random(Placement::Circular) => rng.random_range(0..p),
        Start::Random(Placement::Confined) => rng.random_range(0..=p - sparsity),
    };
    let support: Vec<usize> = (0..sparsity).map(|i| (start + i) % p).collect();
    let mut freq_vector = vec![Cx::new(T::zero(), T::zero()); p];
    let mut payload_bits = Vec::with_capacity(2 * sparsity);
    for &t in &support {
        let b0 = rng.random_range(0..2u8);
        let b1 = rng.random_range(0..2u8);
        payload_bits.extend([b0, b1]);
        freq_vector[t] = qpsk::<T>(b0, b1) * gain;
    }
    Ok(NbIotSignal {
        freq_vector,
        support,
        sparsity,
        start,
        payload_bits,
        gain,
    })
}

/// Draws i.i.d. complex Gaussian taps under an exponential power-delay profile
/// `exp(-l / decay)`; `None` gives a flat profile. Channels whose frequency
/// response dips below the invertibility floor are redrawn.
pub fn draw_cir<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    dims: &SystemDims,
    decay: Option<f64>,
) -> Result<CirChannel<T>> {
    for _ in 0..MAX_CHANNEL_ATTEMPTS {
        let taps: Vec<Cx<T>> = (0..=dims.cir_len)
            .map(|l| {
                let pw = match decay {
                    Some(d) if d.is_finite() => (-(l as f64) / d).exp(),
                    _ => 1.0,
                };
                complex_gaussian(rng, T::lit(pw))
            })
            .collect();
        let Ok(cir) = CirChannel::from_taps(taps) else {
            continue;
        };
        if channel_eigenvalues(&cir, dims).is_ok() {
            return Ok(cir);
        }
    }
    Err(Error::ChannelDegenerate {
        attempts: MAX_CHANNEL_ATTEMPTS,
    })
}

/// Zero-padded OFDM block: unitary IDFT of the payload followed by `v` zeros.
pub fn zero_padded_block<T: Real>(lte: &LteSymbol<T>, dims: &SystemDims) -> Vec<Cx<T>> {
    let mut tx = idft(&lte.freq_symbols);
    tx.resize(dims.frame_len(), Cx::new(T::zero(), T::zero()));
    tx
}

/// Passes the zero-padded LTE block through the channel (circular convolution
/// over the frame, computed with FFTs).
pub fn apply_channel<T: Real>(lte: &LteSymbol<T>, cir: &CirChannel<T>, dims: &SystemDims) -> Vec<Cx<T>> {
    let p = dims.frame_len();
    let tx = zero_padded_block(lte, dims);
    let mut h = cir.taps.clone();
    h.resize(p, Cx::new(T::zero(), T::zero()));
    let mut planner = FftPlanner::<T>::new();
    let fwd = planner.plan_fft_forward(p);
    let inv = planner.plan_fft_inverse(p);
    let mut a = tx;
    fwd.process(&mut a);
    fwd.process(&mut h);
    for (x, y) in a.iter_mut().zip(&h) {
        *x *= y;
    }
    inv.process(&mut a);
    let s = T::one() / T::from_usize_lossy(p);
    a.iter().map(|z| z * s).collect()
}

/// Same product as [`apply_channel`], evaluated as a direct Toeplitz sum.
pub fn apply_channel_direct<T: Real>(
    lte: &LteSymbol<T>,
    cir: &CirChannel<T>,
    dims: &SystemDims,
) -> Vec<Cx<T>> {
    let p = dims.frame_len();
    let tx = zero_padded_block(lte, dims);
    (0..p)
        .map(|n| {
            let mut acc = Cx::new(T::zero(), T::zero());
            for (l, h) in cir.taps.iter().enumerate() {
                acc += h * tx[(n + p - l % p) % p];
            }
            acc
        })
        .collect()
}

/// `y = lte_time + IDFT(nb) + n` with white circular Gaussian noise of variance `noise_var`.
pub fn compose_received<T: Real, R: Rng + ?Sized>(
    lte_time: &[Cx<T>],
    nb: &NbIotSignal<T>,
    noise_var: T,
    rng: &mut R,
) -> Result<ReceivedFrame<T>> {
    if !(noise_var >= T::zero()) {
        return Err(Error::NegativeNoiseVariance(noise_var.as_f64()));
    }
    let p = nb.freq_vector.len();
    if lte_time.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: lte_time.len(),
        });
    }
    let nb_time = nb.time_samples();
    let time_samples = lte_time
        .iter()
        .zip(&nb_time)
        .map(|(a, b)| {
            let n = if noise_var > T::zero() {
                complex_gaussian(rng, noise_var)
            } else {
                Cx::new(T::zero(), T::zero())
            };
            a + b + n
        })
        .collect();
    Ok(ReceivedFrame {
        time_samples,
        noise_var,
        nb: nb.clone(),
    })
}

fn to_db<T: Real>(ratio: T) -> T {
    T::lit(10.0) * ratio.log10()
}

/// Per-subcarrier narrowband and LTE powers and the induced SNR/SIR.
/// A zero noise variance or a zero LTE power reports `+inf` dB.
pub fn power_report<T: Real>(
    nb_time: &[Cx<T>],
    lte_time: &[Cx<T>],
    noise_var: T,
    dims: &SystemDims,
    sparsity: usize,
) -> PowerReport<T> {
    let p_nb = if sparsity == 0 {
        T::zero()
    } else {
        energy(nb_time) / T::from_usize_lossy(sparsity)
    };
    let p_lte = energy(lte_time) / T::from_usize_lossy(dims.n_subcarriers);
    let snr_db = if noise_var > T::zero() && sparsity > 0 {
        to_db(p_nb / noise_var)
    } else {
        T::infinity()
    };
    let sir_db = if p_lte > T::zero() && sparsity > 0 {
        to_db(p_nb / p_lte)
    } else {
        T::infinity()
    };
    PowerReport {
        p_nb,
        p_lte,
        snr_db,
        sir_db,
    }
}

/// Scalings that realize a target SNR/SIR on a given pair of waveforms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Calibration<T> {
    /// Multiplier for the narrowband amplitudes.
    pub nb_gain: T,
    /// Multiplier for the LTE waveform (0 when the target SIR is infinite).
    pub lte_scale: T,
    pub noise_var: T,
}

/// Keeps the realized LTE power and scales the narrowband signal to meet the
/// SIR, then sets the noise for the SNR. With an infinite SIR the LTE waveform
/// is switched off and the narrowband signal keeps unit gain.
pub fn calibrate<T: Real>(
    target_snr_db: f64,
    target_sir_db: f64,
    dims: &SystemDims,
    nb_time: &[Cx<T>],
    lte_time: &[Cx<T>],
    sparsity: usize,
) -> Result<Calibration<T>> {
    if target_snr_db.is_nan() || target_snr_db == f64::NEG_INFINITY {
        return Err(Error::InvalidConfig(format!("target SNR {target_snr_db} dB")));
    }
    if target_sir_db.is_nan() || target_sir_db == f64::NEG_INFINITY {
        return Err(Error::InvalidConfig(format!("target SIR {target_sir_db} dB")));
    }
    let unit = power_report(nb_time, lte_time, T::zero(), dims, sparsity);
    if unit.p_nb <= T::zero() {
        return Err(Error::InvalidConfig("narrowband waveform has no energy".into()));
    }
    let (nb_gain, lte_scale, p_nb) = if target_sir_db.is_infinite() || unit.p_lte <= T::zero() {
        let g = T::one() / unit.p_nb.sqrt();
        let lte_scale = if target_sir_db.is_infinite() {
            T::zero()
        } else {
            return Err(Error::InvalidConfig(
                "finite SIR requested with an all-zero LTE waveform".into(),
            ));
        };
        (g, lte_scale, T::one())
    } else {
        let target = T::lit(10f64.powf(target_sir_db / 10.0)) * unit.p_lte;
        ((target / unit.p_nb).sqrt(), T::one(), target)
    };
    let noise_var = if target_snr_db.is_infinite() {
        T::zero()
    } else {
        p_nb / T::lit(10f64.powf(target_snr_db / 10.0))
    };
    Ok(Calibration {
        nb_gain,
        lte_scale,
        noise_var,
    })
}

/// Everything produced for one simulated frame.
#[derive(Clone, Debug)]
pub struct SyntheticFrame<T> {
    pub dims: SystemDims,
    pub received: ReceivedFrame<T>,
    pub cir: CirChannel<T>,
    pub lte: LteSymbol<T>,
    /// Scaled LTE contribution at the receiver.
    pub lte_time: Vec<Cx<T>>,
    pub calibration: Calibration<T>,
}

impl<T: Real> SyntheticFrame<T> {
    pub fn nb(&self) -> &NbIotSignal<T> {
        &self.received.nb
    }

    pub fn power(&self) -> PowerReport<T> {
        power_report(
            &self.nb().time_samples(),
            &self.lte_time,
            self.received.noise_var,
            &self.dims,
            self.nb().sparsity,
        )
    }
}

/// Knobs for [`synthesize_frame`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameParams {
    pub sparsity: usize,
    pub start: Start,
    pub snr_db: f64,
    pub sir_db: f64,
    /// Power-delay decay constant in taps; `None` for a flat profile.
    pub channel_decay: Option<f64>,
}

/// Draws channel, LTE payload and narrowband payload, calibrates them to the
/// requested operating point and adds noise.
pub fn synthesize_frame<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    dims: &SystemDims,
    params: &FrameParams,
) -> Result<SyntheticFrame<T>> {
    dims.validate()?;
    let cir = draw_cir::<T, _>(rng, dims, params.channel_decay)?;
    let lte = gen_lte_symbol::<T, _>(rng, dims);
    let nb_unit = gen_nbiot_signal::<T, _>(rng, dims, params.sparsity, params.start, T::one())?;
    let raw_lte = apply_channel(&lte, &cir, dims);
    let cal = calibrate(
        params.snr_db,
        params.sir_db,
        dims,
        &nb_unit.time_samples(),
        &raw_lte,
        params.sparsity,
    )?;
    let nb = nb_unit.scaled(cal.nb_gain);
    let lte_time: Vec<Cx<T>> = raw_lte.iter().map(|z| z * cal.lte_scale).collect();
    let received = compose_received(&lte_time, &nb, cal.noise_var, rng)?;
    Ok(SyntheticFrame {
        dims: *dims,
        received,
        cir,
        lte,
        lte_time,
        calibration: cal,
    })
}

/// Unitary DFT of the received samples.
pub fn frame_spectrum<T: Real>(frame: &ReceivedFrame<T>) -> Vec<Cx<T>> {
    dft(&frame.time_samples)
}

/// True when `support` is a run of consecutive indices modulo `p`.
pub fn is_circularly_contiguous(support: &[usize], p: usize) -> bool {
    if support.is_empty() || support.len() > p {
        return false;
    }
    let mut mark = vec![false; p];
    for &s in support {
        if s >= p || mark[s] {
            return false;
        }
        mark[s] = true;
    }
    if support.len() == p {
        return true;
    }
    // exactly one run start: an occupied bin whose predecessor is free
    (0..p)
        .filter(|&i| mark[i] && !mark[(i + p - 1) % p])
        .count()
        == 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small() -> SystemDims {
        SystemDims::new(6, 2, 0).unwrap()
    }

    #[test]
    fn dims_validation() {
        assert!(SystemDims::new(600, 144, 50).is_ok());
        assert!(SystemDims::new(600, 0, 0).is_err());
        assert!(SystemDims::new(4, 2, 3).is_err());
        assert_eq!(SystemDims::default().frame_len(), 744);
    }

    #[test]
    fn lte_symbols_are_unit_modulus_and_seeded() {
        let d = SystemDims::new(600, 144, 50).unwrap();
        let a: LteSymbol<f64> = gen_lte_symbol(&mut ChaCha8Rng::seed_from_u64(42), &d);
        let b: LteSymbol<f64> = gen_lte_symbol(&mut ChaCha8Rng::seed_from_u64(42), &d);
        assert_eq!(a, b);
        assert_eq!(a.freq_symbols.len(), 600);
        assert!(a.freq_symbols.iter().all(|z| (z.norm_sqr() - 1.0).abs() < 1e-15));
        let mean = energy(&a.freq_symbols) / 600.0;
        assert!((mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nb_support_wraps() {
        let d = small();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s: NbIotSignal<f64> = gen_nbiot_signal(&mut rng, &d, 3, Start::At(6), 1.0).unwrap();
        assert_eq!(s.support, vec![6, 7, 0]);
        assert_eq!(s.end(), 0);
        let nz = s.freq_vector.iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(nz, 3);
        assert!(matches!(
            gen_nbiot_signal::<f64, _>(&mut rng, &d, 2, Start::At(0), 1.0),
            Err(Error::UnsupportedRuFormat(2))
        ));
        assert!(gen_nbiot_signal::<f64, _>(&mut rng, &d, 1, Start::At(8), 1.0).is_err());
    }

    #[test]
    fn confined_placement_never_wraps() {
        let d = small();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let s: NbIotSignal<f64> =
                gen_nbiot_signal(&mut rng, &d, 6, Start::Random(Placement::Confined), 1.0).unwrap();
            assert!(s.start + 6 <= 8);
        }
    }

    #[test]
    fn channel_paths_agree_and_identity_is_transparent() {
        let d = SystemDims::new(16, 4, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let lte: LteSymbol<f64> = gen_lte_symbol(&mut rng, &d);
        let cir: CirChannel<f64> = draw_cir(&mut rng, &d, Some(1.0)).unwrap();
        let a = apply_channel(&lte, &cir, &d);
        let b = apply_channel_direct(&lte, &cir, &d);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-12);
        }
        let id = apply_channel(&lte, &CirChannel::identity(), &d);
        let blk = zero_padded_block(&lte, &d);
        for (x, y) in id.iter().zip(&blk) {
            assert!((x - y).norm() < 1e-12);
        }
        assert!(blk[16..].iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn single_tap_channel_has_unit_gain() {
        let d = SystemDims::new(8, 2, 0).unwrap();
        let c: CirChannel<f64> = draw_cir(&mut ChaCha8Rng::seed_from_u64(9), &d, None).unwrap();
        assert_eq!(c.taps.len(), 1);
        assert!((c.taps[0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_report_ratios() {
        let d = SystemDims::new(600, 144, 50).unwrap();
        let nb = vec![Cx::new(3f64.sqrt(), 0.0)];
        let lte = vec![Cx::new(600f64.sqrt(), 0.0)];
        let r = power_report(&nb, &lte, 0.0, &d, 3);
        assert!((r.p_nb - 1.0).abs() < 1e-12);
        assert!((r.p_lte - 1.0).abs() < 1e-12);
        assert_eq!(r.snr_db, f64::INFINITY);
        let lte = vec![Cx::new(6f64.sqrt(), 0.0)];
        let r = power_report(&nb, &lte, 0.5, &d, 3);
        assert!((r.sir_db - 20.0).abs() < 1e-12);
        assert!((r.snr_db - 10.0 * 2f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn calibration_hits_targets() {
        let d = SystemDims::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = FrameParams {
            sparsity: 6,
            start: Start::Random(Placement::Circular),
            snr_db: 23.0,
            sir_db: 20.0,
            channel_decay: Some(50.0 / 3.0),
        };
        let f: SyntheticFrame<f64> = synthesize_frame(&mut rng, &d, &p).unwrap();
        let r = f.power();
        assert!((r.snr_db - 23.0).abs() < 0.01);
        assert!((r.sir_db - 20.0).abs() < 0.01);

        let inf = FrameParams {
            snr_db: f64::INFINITY,
            sir_db: f64::INFINITY,
            ..p
        };
        let f: SyntheticFrame<f64> = synthesize_frame(&mut rng, &d, &inf).unwrap();
        assert_eq!(f.received.noise_var, 0.0);
        assert!(f.lte_time.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn noiseless_interference_free_frame_is_the_nb_waveform() {
        let d = SystemDims::new(16, 4, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let nb: NbIotSignal<f64> = gen_nbiot_signal(&mut rng, &d, 3, Start::At(4), 1.0).unwrap();
        let zero = vec![Cx::new(0.0, 0.0); 20];
        let f = compose_received(&zero, &nb, 0.0, &mut rng).unwrap();
        assert_eq!(f.time_samples, nb.time_samples());
        assert!(compose_received(&zero, &nb, -1.0, &mut rng).is_err());
    }

    #[test]
    fn contiguity_check() {
        assert!(is_circularly_contiguous(&[6, 7, 0], 8));
        assert!(is_circularly_contiguous(&[3], 8));
        assert!(!is_circularly_contiguous(&[1, 3], 8));
        assert!(!is_circularly_contiguous(&[], 8));
        assert!(!is_circularly_contiguous(&[2, 2], 8));
    }

    #[test]
    fn works_in_single_precision() {
        let d = SystemDims::new(16, 4, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let lte: LteSymbol<f32> = gen_lte_symbol(&mut rng, &d);
        let cir: CirChannel<f32> = draw_cir(&mut rng, &d, Some(1.0)).unwrap();
        let a = apply_channel(&lte, &cir, &d);
        let b = apply_channel_direct(&lte, &cir, &d);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-5);
        }
    }
}
