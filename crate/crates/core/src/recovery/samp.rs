//! Sparsity adaptive matching pursuit with step size 1 and residual halting.
//!
//! The candidate size starts at one and grows whenever a stage fails to lower
//! the residual. Once the residual tolerance is met, columns whose removal
//! keeps the residual within tolerance are pruned one at a time (cheapest
//! first); on the strongly coherent observation matrices of this problem the
//! forward pass alone tends to keep a spurious neighbour.

use crate::linalg::{lstsq_columns, CMat};
use crate::scalar::{inner, norm, Cx, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct SampResult<T> {
    /// Selected columns, ascending, in the coordinates of the full matrix.
    pub support: Vec<usize>,
    pub coefficients: Vec<Cx<T>>,
    pub residual_norm: T,
    /// Columns discarded because they made a least-squares subproblem rank deficient.
    pub rank_drops: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampParams<T> {
    /// Absolute residual norm at which the pursuit stops.
    pub tol: T,
    pub max_support: usize,
    pub max_stages: usize,
}

/// Solves on `cols`, discarding the most recently inserted column while the
/// subproblem stays rank deficient; `stamp` orders insertions.
fn full_rank_solve<T: Real>(
    w: &CMat<T>,
    y: &[Cx<T>],
    cols: &mut Vec<usize>,
    stamp: &dyn Fn(usize) -> usize,
    drops: &mut usize,
) -> (Vec<Cx<T>>, T) {
    loop {
        if cols.is_empty() {
            return (Vec::new(), norm(y));
        }
        let ls = lstsq_columns(w, cols, y, false);
        if !ls.rank_deficient() {
            return (ls.coeffs, ls.residual_norm);
        }
        let newest = (0..cols.len())
            .max_by_key(|&k| (stamp(cols[k]), cols[k]))
            .expect("nonempty");
        cols.remove(newest);
        *drops += 1;
    }
}

/// Runs the pursuit over the columns listed in `candidates` (ascending).
pub fn samp_unbounded<T: Real>(
    y2: &[Cx<T>],
    w: &CMat<T>,
    col_norms: &[T],
    candidates: &[usize],
    params: &SampParams<T>,
) -> SampResult<T> {
    let y_norm = norm(y2);
    let empty = |rank_drops| SampResult {
        support: Vec::new(),
        coefficients: Vec::new(),
        residual_norm: y_norm,
        rank_drops,
    };
    if y_norm <= params.tol || candidates.is_empty() {
        return empty(0);
    }
    let cap = params.max_support.min(candidates.len()).min(w.rows());
    if cap == 0 {
        return empty(0);
    }

    // insertion stamps indexed by column
    let mut stamps: std::collections::HashMap<usize, usize> = Default::default();
    let mut clock = 0usize;
    let mut drops = 0usize;

    let mut support: Vec<usize> = Vec::new();
    let mut residual = y2.to_vec();
    let mut rn = y_norm;
    let mut size = 1usize;

    for _ in 0..params.max_stages {
        let mut scored: Vec<(T, usize)> = candidates
            .iter()
            .map(|&j| (inner(w.col(j), &residual).norm() / col_norms[j], j))
            .collect();
        scored.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite").then(a.1.cmp(&b.1)));
        let mut merged = support.clone();
        for &(_, j) in scored.iter().take(size) {
            if !merged.contains(&j) {
                merged.push(j);
                stamps.entry(j).or_insert_with(|| {
                    clock += 1;
                    clock
                });
            }
        }
        merged.sort_unstable();

        // backtrack: keep the `size` strongest contributions
        let ls = lstsq_columns(w, &merged, y2, false);
        let mut ranked: Vec<(T, usize)> = merged
            .iter()
            .zip(&ls.coeffs)
            .map(|(&j, c)| (c.norm() * col_norms[j], j))
            .collect();
        ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite").then(a.1.cmp(&b.1)));
        let mut keep: Vec<usize> = ranked.iter().take(size).map(|p| p.1).collect();
        keep.sort_unstable();
        let stamp_of = |j: usize| stamps.get(&j).copied().unwrap_or(0);
        let (coeffs, rn_new) = full_rank_solve(w, y2, &mut keep, &stamp_of, &mut drops);
        if keep.is_empty() {
            return empty(drops);
        }

        if rn_new <= params.tol {
            support = keep;
            rn = rn_new;
            break;
        }
        if rn_new >= rn {
            size += 1;
            if size > cap {
                break;
            }
        } else {
            residual = y2.to_vec();
            for (&j, c) in keep.iter().zip(&coeffs) {
                for (r, a) in residual.iter_mut().zip(w.col(j)) {
                    *r -= a * c;
                }
            }
            support = keep;
            rn = rn_new;
        }
    }

    if support.is_empty() {
        return empty(drops);
    }

    let limit = params.tol.max(rn);
    while support.len() > 1 {
        let ls = lstsq_columns(w, &support, y2, true);
        let Some(cost) = ls.removal_cost else { break };
        let base = ls.residual_norm * ls.residual_norm;
        let mut pick: Option<(T, usize)> = None;
        for (k, &c) in cost.iter().enumerate() {
            if (base + c).sqrt() <= limit && pick.is_none_or(|(best, _)| c < best) {
                pick = Some((c, k));
            }
        }
        match pick {
            Some((_, k)) => {
                support.remove(k);
            }
            None => break,
        }
    }

    let ls = lstsq_columns(w, &support, y2, false);
    SampResult {
        support,
        coefficients: ls.coeffs,
        residual_norm: ls.residual_norm,
        rank_drops: drops,
    }
}
