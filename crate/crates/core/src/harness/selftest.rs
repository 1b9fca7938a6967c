//! Fast invariant suite at reduced dimensions, plus the brute-force oracles it
//! compares against.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baselines::cws_recover;
use crate::dft::dft;
use crate::linalg::CMat;
use crate::observation::{build_observation, build_observation_rows, channel_eigenvalues, measure, ObservationMatrix};
use crate::recovery::{
    correlations, estimate_from_counts, kmeans_1d, samp_unbounded, select_candidates, CountVector, RecoveryConfig,
    SampParams, WindowGate,
};
use crate::scalar::{inner, norm, Cx};
use crate::waveform::{
    apply_channel, apply_channel_direct, complex_gaussian, draw_cir, gen_lte_symbol, gen_nbiot_signal, Start,
    SystemDims, RU_FORMATS,
};

/// Largest relative LTE leakage through the observation matrix.
pub const ANNIHILATION_TOL: f64 = 1e-9;
/// Smallest fraction of separated pair instances the pursuit must solve in
/// the self test. Greedy selection is not guaranteed to find every pair at
/// these dimensions; an exact fit, when reached, must always be the optimum.
pub const PAIR_MIN_RECALL: f64 = 0.95;
/// Smallest leakage the misplaced-row matrix must show.
pub const NEGATIVE_CONTROL_MIN: f64 = 1e-3;
/// Largest relative gap between FFT and direct circular convolution.
pub const CIRCULANT_TOL: f64 = 1e-10;
/// Residual at or below which a 2-sparse fit counts as exact.
pub const PAIR_EXACT_TOL: f64 = 1e-8;
/// Residual the runner-up pair must exceed for an instance to count.
pub const PAIR_SEPARATION: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct SelftestReport {
    pub dims: SystemDims,
    pub results: Vec<PropertyResult>,
    pub elapsed: Duration,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }
}

impl fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            let tag = if r.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{tag} {:<22} {}", r.name, r.detail)?;
        }
        write!(
            f,
            "{} of {} properties passed in {:.2} s (N={}, v={}, L={})",
            self.results.iter().filter(|r| r.passed).count(),
            self.results.len(),
            self.elapsed.as_secs_f64(),
            self.dims.n_subcarriers,
            self.dims.zp_len,
            self.dims.cir_len
        )
    }
}

fn result(name: &'static str, passed: bool, detail: String) -> PropertyResult {
    PropertyResult { name, passed, detail }
}

/// `||W x_lte|| / ||x_lte||` for the LTE spectrum after the channel.
fn leakage(obs: &ObservationMatrix<f64>, lte_freq: &[Cx<f64>]) -> f64 {
    let y2 = measure(obs, lte_freq).expect("dimensions agree").y2;
    norm(&y2) / norm(lte_freq)
}

/// Worst LTE leakage over `trials` random channels and payloads.
pub fn worst_annihilation(dims: &SystemDims, trials: usize, rng: &mut impl Rng) -> crate::Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let cir = draw_cir::<f64, _>(rng, dims, Some(dims.cir_len as f64 / 3.0))?;
        let obs = build_observation(&channel_eigenvalues(&cir, dims)?, dims)?;
        let lte = gen_lte_symbol::<f64, _>(rng, dims);
        worst = worst.max(leakage(&obs, &dft(&apply_channel(&lte, &cir, dims))));
    }
    Ok(worst)
}

/// Leakage of a matrix built from the inverse-DFT rows shifted one place
/// into the data part, which must not annihilate the LTE block.
pub fn misplaced_rows_leakage(dims: &SystemDims, rng: &mut impl Rng) -> crate::Result<f64> {
    let cir = draw_cir::<f64, _>(rng, dims, None)?;
    let eigen = channel_eigenvalues(&cir, dims)?;
    let n = dims.n_subcarriers;
    let obs = build_observation_rows(&eigen, dims, n - 1..dims.frame_len() - 1)?;
    let lte = gen_lte_symbol::<f64, _>(rng, dims);
    Ok(leakage(&obs, &dft(&apply_channel(&lte, &cir, dims))))
}

/// Worst relative gap between the FFT channel and the direct Toeplitz sum.
pub fn worst_circulant_gap(dims: &SystemDims, trials: usize, rng: &mut impl Rng) -> crate::Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let cir = draw_cir::<f64, _>(rng, dims, None)?;
        let lte = gen_lte_symbol::<f64, _>(rng, dims);
        let a = apply_channel(&lte, &cir, dims);
        let b = apply_channel_direct(&lte, &cir, dims);
        let diff: Vec<Cx<f64>> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        worst = worst.max(norm(&diff) / norm(&b));
    }
    Ok(worst)
}

/// Count vector with one planted circular block and bounded contamination.
#[derive(Clone, Debug)]
pub struct PlantedCounts {
    pub counts: CountVector,
    pub start: usize,
    pub len: usize,
}

/// Block of height `peak` whose entries lie in `[peak - peak/4, peak]`; every
/// other entry lies in `[0, peak/4]`.
pub fn planted_counts(rng: &mut impl Rng, p: usize, len: usize, peak: u32) -> PlantedCounts {
    assert!(len >= 1 && len + 1 < p);
    let spread = peak / 4;
    let start = rng.random_range(0..p);
    let mut counts = CountVector::new(p);
    for v in counts.f.iter_mut() {
        *v = rng.random_range(0..=spread);
    }
    for k in 0..len {
        counts.f[(start + k) % p] = rng.random_range(peak - spread..=peak);
    }
    PlantedCounts { counts, start, len }
}

/// Brute-force verdict over every circular window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowVerdict {
    /// Bins of the window in traversal order.
    pub indices: Vec<usize>,
    pub accepted: bool,
}

/// Scans every proper circular window for the one that maximizes the gap
/// between its smallest entry and the largest entry outside it (ties to the
/// shorter window, then the smaller start), and applies the flatness and
/// length tests to it.
pub fn spike_oracle(counts: &[u32], var_threshold: f64, allowed: &[usize]) -> WindowVerdict {
    let p = counts.len();
    assert!(p >= 2);
    // sparse table of range maxima over the doubled sequence
    let doubled: Vec<i64> = counts.iter().chain(counts).map(|&c| c as i64).collect();
    let mut table = vec![doubled.clone()];
    let mut w = 1;
    while 2 * w <= doubled.len() {
        let prev = table.last().unwrap();
        let next: Vec<i64> = (0..=doubled.len() - 2 * w).map(|i| prev[i].max(prev[i + w])).collect();
        table.push(next);
        w *= 2;
    }
    let range_max = |lo: usize, len: usize| {
        let k = usize::BITS as usize - 1 - len.leading_zeros() as usize;
        table[k][lo].max(table[k][lo + len - (1 << k)])
    };
    let mut best: Option<(i64, usize, usize)> = None;
    for s in 0..p {
        let mut inside_min = i64::MAX;
        for len in 1..p {
            inside_min = inside_min.min(doubled[s + len - 1]);
            let gap = inside_min - range_max(s + len, p - len);
            let better = match best {
                None => true,
                Some((g, bl, bs)) => gap > g || (gap == g && (len, s) < (bl, bs)),
            };
            if better {
                best = Some((gap, len, s));
            }
        }
    }
    let (_, len, s) = best.expect("p >= 2");
    let indices: Vec<usize> = (0..len).map(|k| (s + k) % p).collect();
    let vals: Vec<f64> = indices.iter().map(|&i| counts[i] as f64).collect();
    let mean = vals.iter().sum::<f64>() / len as f64;
    let var = vals.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / len as f64;
    WindowVerdict {
        indices,
        accepted: var < var_threshold && allowed.contains(&len),
    }
}

/// Compares the refinement pipeline with the oracle on `trials` planted count
/// vectors; returns the number of mismatches.
pub fn spike_mismatches(rng: &mut impl Rng, p: usize, r_max: u32, lengths: &[usize], trials: usize) -> usize {
    let eps = 0.02 * (r_max as f64) * (r_max as f64);
    let gate = WindowGate {
        var_threshold: eps,
        allowed: &RU_FORMATS,
    };
    let mut bad = 0;
    for _ in 0..trials {
        let len = lengths[rng.random_range(0..lengths.len())];
        let peak = rng.random_range(r_max * 3 / 5..=r_max);
        let planted = planted_counts(rng, p, len, peak);
        let est = estimate_from_counts(&planted.counts, &gate);
        let oracle = spike_oracle(&planted.counts.f, eps, &RU_FORMATS);
        if est.indices != oracle.indices || est.accepted != oracle.accepted {
            bad += 1;
        }
    }
    bad
}

/// Residual of projecting `y` onto the span of two columns, by Gram-Schmidt.
fn pair_residual(a: &[Cx<f64>], b: &[Cx<f64>], y: &[Cx<f64>]) -> f64 {
    let na = norm(a);
    let u1: Vec<Cx<f64>> = a.iter().map(|z| z / na).collect();
    let c = inner(&u1, b);
    let b_perp: Vec<Cx<f64>> = b.iter().zip(&u1).map(|(z, u)| z - u * c).collect();
    let nb = norm(&b_perp);
    let mut r: Vec<Cx<f64>> = y.to_vec();
    for u in [u1, b_perp.iter().map(|z| z / nb).collect()] {
        let c = inner(&u, &r);
        for (ri, ui) in r.iter_mut().zip(&u) {
            *ri -= ui * c;
        }
    }
    norm(&r)
}

/// Exhaustive 2-sparse least squares: the best pair and the two smallest residuals.
pub fn best_pair(w: &CMat<f64>, y: &[Cx<f64>]) -> ((usize, usize), f64, f64) {
    let mut best = ((0, 0), f64::INFINITY);
    let mut runner_up = f64::INFINITY;
    for i in 0..w.cols() {
        for j in i + 1..w.cols() {
            let r = pair_residual(w.col(i), w.col(j), y);
            if r < best.1 {
                runner_up = best.1;
                best = ((i, j), r);
            } else if r < runner_up {
                runner_up = r;
            }
        }
    }
    (best.0, best.1, runner_up)
}

/// Outcome of the pursuit on random 2-sparse instances.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PairOracleTally {
    pub instances: usize,
    pub separated: usize,
    pub matched: usize,
    /// Separated instances on which the pursuit reached the residual tolerance.
    pub converged: usize,
    /// Converged instances whose support equals the exhaustive optimum.
    pub converged_matched: usize,
}

/// Random complex Gaussian `rows x cols` matrices with a 2-sparse signal;
/// counts how often the pursuit support equals the exhaustive optimum on the
/// well-separated instances.
pub fn samp_pair_oracle(rng: &mut impl Rng, rows: usize, cols: usize, instances: usize) -> PairOracleTally {
    let mut tally = PairOracleTally {
        instances,
        ..Default::default()
    };
    for _ in 0..instances {
        let w = CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng, 1.0));
        let i = rng.random_range(0..cols);
        let j = (i + rng.random_range(1..cols)) % cols;
        let (a, b) = (complex_gaussian(rng, 1.0), complex_gaussian(rng, 1.0));
        let y: Vec<Cx<f64>> = w.col(i).iter().zip(w.col(j)).map(|(x, z)| x * a + z * b).collect();
        let (pair, r0, r1) = best_pair(&w, &y);
        if !(r0 <= PAIR_EXACT_TOL && r1 > PAIR_SEPARATION) {
            continue;
        }
        tally.separated += 1;
        let params = SampParams {
            tol: PAIR_EXACT_TOL * 1e-2,
            max_support: rows / 2,
            max_stages: 300,
        };
        let all: Vec<usize> = (0..cols).collect();
        let got = samp_unbounded(&y, &w, &w.column_norms(), &all, &params);
        let hit = got.support == [pair.0, pair.1];
        tally.matched += hit as usize;
        if got.residual_norm <= params.tol {
            tally.converged += 1;
            tally.converged_matched += hit as usize;
        }
    }
    tally
}

/// Checks the sliding-window baseline against a direct scan of every window
/// of the masked correlations; returns the number of mismatches.
pub fn cws_mismatches(dims: &SystemDims, trials: usize, rng: &mut impl Rng) -> crate::Result<usize> {
    let cfg = RecoveryConfig::default();
    let p = dims.frame_len();
    let mut bad = 0;
    for _ in 0..trials {
        let cir = draw_cir::<f64, _>(rng, dims, None)?;
        let obs = build_observation(&channel_eigenvalues(&cir, dims)?, dims)?;
        let k = RU_FORMATS[rng.random_range(0..RU_FORMATS.len())];
        let nb = gen_nbiot_signal::<f64, _>(rng, dims, k, Start::Random(Default::default()), 1.0)?;
        let y2 = measure(&obs, &nb.freq_vector)?.y2;
        let gamma = correlations(&y2, &obs).gamma;
        let clusters = kmeans_1d(&gamma, cfg.q_clusters, cfg.kmeans_init);
        let keep = select_candidates(&gamma, &clusters);
        let score = |i: usize| if keep.contains(&i) { gamma[i] } else { 0.0 };
        let mut best = (f64::NEG_INFINITY, 0);
        for s in 0..p {
            let total: f64 = (0..k).map(|t| score((s + t) % p)).sum();
            if total > best.0 * (1.0 + 1e-12) {
                best = (total, s);
            }
        }
        let mut want: Vec<usize> = (0..k).map(|t| (best.1 + t) % p).collect();
        want.sort_unstable();
        let got = cws_recover(&y2, &obs, k, &cfg)?.support;
        bad += (got != want) as usize;
    }
    Ok(bad)
}

/// Runs the suite at `N=32, v=8, L=3`.
pub fn selftest(seed: u64) -> SelftestReport {
    let dims = SystemDims::new(32, 8, 3).expect("valid reduced dims");
    selftest_with(&dims, seed)
}

pub fn selftest_with(dims: &SystemDims, seed: u64) -> SelftestReport {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut results = Vec::new();
    let p = dims.frame_len();

    results.push(match worst_annihilation(dims, 100, &mut rng) {
        Ok(w) => result("annihilation", w <= ANNIHILATION_TOL, format!("worst leakage {w:.3e}")),
        Err(e) => result("annihilation", false, e.to_string()),
    });
    results.push(match misplaced_rows_leakage(dims, &mut rng) {
        Ok(w) => result(
            "misplaced-rows-control",
            w > NEGATIVE_CONTROL_MIN,
            format!("leakage {w:.3e} with shifted rows"),
        ),
        Err(e) => result("misplaced-rows-control", false, e.to_string()),
    });
    results.push(match worst_circulant_gap(dims, 100, &mut rng) {
        Ok(g) => result("circulant-equivalence", g <= CIRCULANT_TOL, format!("worst gap {g:.3e}")),
        Err(e) => result("circulant-equivalence", false, e.to_string()),
    });
    let lengths: Vec<usize> = (1..=12).filter(|&l| l + 1 < p).collect();
    let bad = spike_mismatches(&mut rng, p, 50, &lengths, 500);
    results.push(result("spike-oracle", bad == 0, format!("{bad} mismatches in 500 planted vectors")));
    let t = samp_pair_oracle(&mut rng, dims.zp_len, 32, 100);
    results.push(result(
        "samp-pair-oracle",
        t.separated > 0
            && t.converged_matched == t.converged
            && t.matched as f64 >= PAIR_MIN_RECALL * t.separated as f64,
        format!(
            "{} of {} separated instances matched, {} of {} exact fits matched",
            t.matched, t.separated, t.converged_matched, t.converged
        ),
    ));
    results.push(match cws_mismatches(dims, 50, &mut rng) {
        Ok(bad) => result("cws-window-oracle", bad == 0, format!("{bad} mismatches in 50 frames")),
        Err(e) => result("cws-window-oracle", false, e.to_string()),
    });

    SelftestReport {
        dims: *dims,
        results,
        elapsed: t0.elapsed(),
    }
}
