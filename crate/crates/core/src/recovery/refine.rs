//! The full recovery loop: repeated screening and pursuit under random
//! perturbations, vote counting and the spike acceptance test.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cluster::{correlations_with, kmeans_1d, select_candidates};
use super::samp::{samp_unbounded, SampParams};
use super::spike::{
    best_window_start, estimate_from_counts, population_variance, sample_window, update_counts, window_indices,
    CountVector, SupportEstimate, WindowGate,
};
use super::{Perturbation, RecoveryConfig};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::observation::ObservationMatrix;
use crate::scalar::{norm, Cx, Real};
use crate::waveform::complex_gaussian;

/// Observation matrix as seen by one repetition.
#[derive(Clone, Debug)]
pub struct PerturbedObservation<T> {
    pub w: CMat<T>,
    pub col_norms: Vec<T>,
    /// Column `i` of `w` derives from physical column `index_map[i]`.
    pub index_map: Vec<usize>,
}

fn random_permutation<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..p).collect();
    perm.shuffle(rng);
    perm
}

fn dither<T: Real, R: Rng + ?Sized>(obs: &ObservationMatrix<T>, delta: f64, rng: &mut R) -> CMat<T> {
    let (v, p) = (obs.rows(), obs.cols());
    let scale = T::lit(delta) * obs.w.frobenius_norm() / T::from_usize_lossy(v * p).sqrt();
    let mut w = obs.w.clone();
    if delta > 0.0 {
        for z in w.as_mut_slice() {
            *z += complex_gaussian(rng, T::one()) * scale;
        }
    }
    w
}

pub fn perturb_observation<T: Real, R: Rng + ?Sized>(
    obs: &ObservationMatrix<T>,
    strategy: Perturbation,
    rng: &mut R,
) -> PerturbedObservation<T> {
    match strategy {
        Perturbation::ColumnPermutation => {
            let index_map = random_permutation(obs.cols(), rng);
            PerturbedObservation {
                w: obs.w.select_columns(&index_map),
                col_norms: index_map.iter().map(|&j| obs.col_norms[j]).collect(),
                index_map,
            }
        }
        Perturbation::GaussianDither { delta } => {
            let w = dither(obs, delta, rng);
            PerturbedObservation {
                col_norms: w.column_norms(),
                w,
                index_map: (0..obs.cols()).collect(),
            }
        }
    }
}

/// `S` widened by `guard` bins on each side, modulo `p`, ascending.
pub fn circular_dilation(set: &[usize], guard: usize, p: usize) -> Vec<usize> {
    let mut mark = vec![false; p];
    let g = guard.min(p);
    for &i in set {
        for d in 0..=2 * g {
            mark[(i + p * (g / p + 1) + d - g) % p] = true;
        }
    }
    (0..p).filter(|&i| mark[i]).collect()
}

/// Result of one screening-plus-pursuit pass.
#[derive(Clone, Debug, PartialEq)]
pub struct CoarseOutcome<T> {
    pub support: Vec<usize>,
    pub residual_norm: T,
    /// Guard width that produced `support`.
    pub guard: usize,
    pub samp_runs: usize,
    pub rank_drops: usize,
}

/// Pursuit on the screened candidates. If the tolerance is missed, the
/// candidate set is widened one bin at a time up to `max_guard` and the
/// best-fitting attempt is kept.
pub fn coarse_stage<T: Real>(
    y2: &[Cx<T>],
    w: &CMat<T>,
    col_norms: &[T],
    candidates: &[usize],
    params: &SampParams<T>,
    max_guard: usize,
) -> CoarseOutcome<T> {
    let p = w.cols();
    let mut best: Option<CoarseOutcome<T>> = None;
    let mut runs = 0;
    let mut drops = 0;
    let mut prev_len = usize::MAX;
    for g in 0..=max_guard {
        let cand = circular_dilation(candidates, g, p);
        if cand.len() == prev_len {
            break;
        }
        prev_len = cand.len();
        let r = samp_unbounded(y2, w, col_norms, &cand, params);
        runs += 1;
        drops += r.rank_drops;
        let done = r.residual_norm <= params.tol;
        if best.as_ref().is_none_or(|b| r.residual_norm < b.residual_norm) {
            best = Some(CoarseOutcome {
                support: r.support,
                residual_norm: r.residual_norm,
                guard: g,
                samp_runs: 0,
                rank_drops: 0,
            });
        }
        if done {
            break;
        }
    }
    let mut out = best.unwrap_or(CoarseOutcome {
        support: Vec::new(),
        residual_norm: norm(y2),
        guard: 0,
        samp_runs: 0,
        rank_drops: 0,
    });
    out.samp_runs = runs;
    out.rank_drops = drops;
    out
}

/// Record of one outer iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationTrace {
    pub counts: CountVector,
    pub estimate: SupportEstimate,
    pub window_variance: f64,
    /// Pursuit residual norm of every repetition.
    pub residuals: Vec<f64>,
    /// `||y2' - y2||^2` of every repetition; zero under column permutation.
    pub leakage: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub iterations: Vec<IterationTrace>,
    /// Absolute pursuit tolerance that was used.
    pub tolerance: f64,
    pub samp_runs: usize,
    pub cache_hits: usize,
    pub dropped_clusters: usize,
    pub rank_drops: usize,
    /// The known-sparsity fallback window was returned.
    pub fallback: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Refinement {
    pub estimate: SupportEstimate,
    pub diagnostics: Diagnostics,
}

impl Refinement {
    pub fn outer_iterations(&self) -> usize {
        self.diagnostics.iterations.len()
    }
}

/// Absolute pursuit tolerance: the larger of the relative floor and the
/// expected norm of the observed noise.
pub fn pursuit_tolerance<T: Real>(y2: &[Cx<T>], obs: &ObservationMatrix<T>, noise_var: T, cfg: &RecoveryConfig) -> T {
    let rel = T::lit(cfg.residual_rel_tol) * norm(y2);
    let noise = T::lit(cfg.noise_tol_factor) * noise_var.sqrt() * obs.w.frobenius_norm();
    rel.max(noise)
}

/// Runs the whole recovery on a received spectrum `ỹ`.
pub fn refine_support<T: Real>(
    y_freq: &[Cx<T>],
    obs: &ObservationMatrix<T>,
    noise_var: T,
    cfg: &RecoveryConfig,
) -> Result<Refinement> {
    let (v, p) = (obs.rows(), obs.cols());
    cfg.validate(v)?;
    if y_freq.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: y_freq.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let y2 = obs.w.matvec(y_freq);
    let tol = pursuit_tolerance(&y2, obs, noise_var, cfg);
    let params = SampParams {
        tol,
        max_support: cfg.max_support(v),
        max_stages: cfg.samp_max_stages,
    };
    let known: [usize; 1];
    let allowed: &[usize] = match cfg.known_sparsity {
        Some(k) => {
            known = [k];
            &known
        }
        None => &cfg.allowed_sparsities,
    };
    let gate = WindowGate {
        var_threshold: cfg.epsilon(),
        allowed,
    };

    let gamma = correlations_with(&y2, &obs.w, &obs.col_norms).gamma;
    let mut cache: HashMap<Vec<usize>, CoarseOutcome<T>> = HashMap::new();
    let mut diag = Diagnostics {
        tolerance: tol.as_f64(),
        ..Default::default()
    };

    for _ in 0..cfg.i_max {
        let mut counts = CountVector::new(p);
        let mut residuals = Vec::with_capacity(cfg.r_max);
        let mut leakage = Vec::with_capacity(cfg.r_max);
        for k in 0..cfg.r_max {
            let outcome = match cfg.perturbation {
                Perturbation::ColumnPermutation => {
                    // Relabelling the columns and the spectrum together leaves
                    // y2 unchanged and permutes the correlations, so only the
                    // screening needs the permuted order.
                    let perm: Vec<usize> = if k == 0 {
                        (0..p).collect()
                    } else {
                        random_permutation(p, &mut rng)
                    };
                    let g: Vec<T> = perm.iter().map(|&j| gamma[j]).collect();
                    let cl = kmeans_1d(&g, cfg.q_clusters, cfg.kmeans_init);
                    diag.dropped_clusters += cl.dropped;
                    let mut s_opt: Vec<usize> = select_candidates(&g, &cl).iter().map(|&i| perm[i]).collect();
                    s_opt.sort_unstable();
                    leakage.push(0.0);
                    if let Some(hit) = cache.get(&s_opt) {
                        diag.cache_hits += 1;
                        hit.clone()
                    } else {
                        let o = coarse_stage(&y2, &obs.w, &obs.col_norms, &s_opt, &params, cfg.guard_growth);
                        diag.samp_runs += o.samp_runs;
                        diag.rank_drops += o.rank_drops;
                        cache.insert(s_opt, o.clone());
                        o
                    }
                }
                Perturbation::GaussianDither { delta } => {
                    let (w, norms, y2k) = if k == 0 {
                        (obs.w.clone(), obs.col_norms.clone(), y2.clone())
                    } else {
                        let w = dither(obs, delta, &mut rng);
                        let y2k = w.matvec(y_freq);
                        (w.clone(), w.column_norms(), y2k)
                    };
                    let shift: f64 = y2k.iter().zip(&y2).map(|(a, b)| (a - b).norm_sqr().as_f64()).sum();
                    leakage.push(shift);
                    let g = correlations_with(&y2k, &w, &norms).gamma;
                    let cl = kmeans_1d(&g, cfg.q_clusters, cfg.kmeans_init);
                    diag.dropped_clusters += cl.dropped;
                    let s_opt = select_candidates(&g, &cl);
                    let o = coarse_stage(&y2k, &w, &norms, &s_opt, &params, cfg.guard_growth);
                    diag.samp_runs += o.samp_runs;
                    diag.rank_drops += o.rank_drops;
                    o
                }
            };
            residuals.push(outcome.residual_norm.as_f64());
            update_counts(&mut counts, &outcome.support);
        }
        let estimate = estimate_from_counts(&counts, &gate);
        let window_variance = population_variance(&sample_window(&counts, estimate.p1, estimate.p2));
        let accepted = estimate.accepted;
        diag.iterations.push(IterationTrace {
            counts,
            estimate,
            window_variance,
            residuals,
            leakage,
        });
        if accepted {
            break;
        }
    }

    let last = diag.iterations.last().expect("i_max >= 1");
    let mut estimate = last.estimate.clone();
    if !estimate.accepted {
        if let Some(k) = cfg.known_sparsity {
            let scores: Vec<u64> = last.counts.f.iter().map(|&x| x as u64).collect();
            let start = best_window_start(&scores, k.min(p));
            let p1 = (start + p - 1) % p;
            let p2 = (start + k - 1) % p;
            estimate = SupportEstimate {
                indices: window_indices(p, p1, p2),
                p1,
                p2,
                accepted: false,
            };
            diag.fallback = true;
        }
    }
    Ok(Refinement {
        estimate,
        diagnostics: diag,
    })
}
