//! Vote counting and location of the support block in the count vector.

/// Per-bin vote tally across the repetitions of one outer iteration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountVector {
    pub f: Vec<u32>,
}

impl CountVector {
    pub fn new(len: usize) -> Self {
        Self { f: vec![0; len] }
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.f.iter().map(|&x| x as u64).sum()
    }
}

/// Adds one vote to every listed bin.
pub fn update_counts(counts: &mut CountVector, support: &[usize]) {
    for &j in support {
        counts.f[j] += 1;
    }
}

/// Circular first difference `d[l] = f[l] - f[l+1]`, with `d[P-1] = f[P-1] - f[0]`.
pub fn difference_vector(counts: &CountVector) -> Vec<i64> {
    let f = &counts.f;
    let p = f.len();
    (0..p).map(|l| f[l] as i64 - f[(l + 1) % p] as i64).collect()
}

/// `(argmin d, argmax d)`, ties resolved to the smallest index. The block of
/// votes then runs from `p1 + 1` to `p2` inclusive.
pub fn locate_spike(d: &[i64]) -> (usize, usize) {
    assert!(!d.is_empty());
    let mut p1 = 0;
    let mut p2 = 0;
    for (i, &x) in d.iter().enumerate() {
        if x < d[p1] {
            p1 = i;
        }
        if x > d[p2] {
            p2 = i;
        }
    }
    (p1, p2)
}

/// Bins `p1+1, ..., p2` taken forward modulo `P`; the full circle when `p1 == p2`.
pub fn window_indices(p: usize, p1: usize, p2: usize) -> Vec<usize> {
    let len = match (p2 + p - p1) % p {
        0 => p,
        n => n,
    };
    (1..=len).map(|k| (p1 + k) % p).collect()
}

/// Counts over the window `p1+1 ..= p2`.
pub fn sample_window(counts: &CountVector, p1: usize, p2: usize) -> Vec<u32> {
    window_indices(counts.len(), p1, p2)
        .into_iter()
        .map(|i| counts.f[i])
        .collect()
}

/// Population variance (divides by the sample count).
pub fn population_variance(x: &[u32]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let n = x.len() as f64;
    let mean = x.iter().map(|&v| v as f64).sum::<f64>() / n;
    x.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / n
}

/// Estimated support: the bins `p1+1 ..= p2` in traversal order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportEstimate {
    pub indices: Vec<usize>,
    pub p1: usize,
    pub p2: usize,
    pub accepted: bool,
}

impl SupportEstimate {
    pub fn sorted(&self) -> Vec<usize> {
        let mut s = self.indices.clone();
        s.sort_unstable();
        s
    }
}

/// Which window lengths pass the cardinality test.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowGate<'a> {
    pub var_threshold: f64,
    pub allowed: &'a [usize],
}

/// Accepts when the window is flat (population variance below the threshold)
/// and its length is one of the allowed sparsities.
pub fn accept_window(x: &[u32], gate: &WindowGate<'_>) -> bool {
    !x.is_empty() && gate.allowed.contains(&x.len()) && population_variance(x) < gate.var_threshold
}

/// Runs difference, spike location, sampling and the acceptance test.
pub fn estimate_from_counts(counts: &CountVector, gate: &WindowGate<'_>) -> SupportEstimate {
    let d = difference_vector(counts);
    let (p1, p2) = locate_spike(&d);
    let x = sample_window(counts, p1, p2);
    SupportEstimate {
        accepted: accept_window(&x, gate),
        indices: window_indices(counts.len(), p1, p2),
        p1,
        p2,
    }
}

/// Start of the length-`len` circular window with the largest total, the
/// smallest start on ties.
pub fn best_window_start<S>(scores: &[S], len: usize) -> usize
where
    S: Copy + PartialOrd + std::ops::Add<Output = S> + std::ops::Sub<Output = S> + Default,
{
    let p = scores.len();
    assert!(len >= 1 && len <= p);
    let mut sum = S::default();
    for &s in &scores[..len] {
        sum = sum + s;
    }
    let mut best = (sum, 0);
    for start in 1..p {
        sum = sum - scores[start - 1] + scores[(start + len - 1) % p];
        if sum > best.0 {
            best = (sum, start);
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cv(f: &[u32]) -> CountVector {
        CountVector { f: f.to_vec() }
    }

    const GATE: WindowGate<'static> = WindowGate {
        var_threshold: 1.0,
        allowed: &[1, 3, 6, 12],
    };

    #[test]
    fn counting() {
        let mut f = CountVector::new(6);
        update_counts(&mut f, &[2, 3]);
        assert_eq!(f.f, vec![0, 0, 1, 1, 0, 0]);
        for _ in 0..4 {
            update_counts(&mut f, &[2, 3]);
        }
        update_counts(&mut f, &[]);
        assert_eq!(f.f, vec![0, 0, 5, 5, 0, 0]);
        assert_eq!(f.total(), 10);
    }

    #[test]
    fn plain_block() {
        let f = cv(&[0, 0, 5, 5, 5, 0]);
        let d = difference_vector(&f);
        assert_eq!(d, vec![0, -5, 0, 0, 5, 0]);
        assert_eq!(locate_spike(&d), (1, 4));
        assert_eq!(sample_window(&f, 1, 4), vec![5, 5, 5]);
        let e = estimate_from_counts(&f, &GATE);
        assert!(e.accepted);
        assert_eq!(e.indices, vec![2, 3, 4]);
    }

    #[test]
    fn wrapped_block() {
        let f = cv(&[5, 5, 5, 0, 0, 0]);
        let d = difference_vector(&f);
        assert_eq!(d, vec![0, 0, 5, 0, 0, -5]);
        assert_eq!(locate_spike(&d), (5, 2));
        assert_eq!(sample_window(&f, 5, 2), vec![5, 5, 5]);
    }

    #[test]
    fn traversal_across_the_end() {
        let f = cv(&[5, 0, 0, 0, 5, 5]);
        assert_eq!(sample_window(&f, 0, 5), vec![0, 0, 0, 5, 5]);
        let e = estimate_from_counts(&f, &GATE);
        assert_eq!((e.p1, e.p2), (3, 0));
        assert_eq!(e.indices, vec![4, 5, 0]);
        assert!(e.accepted);
    }

    #[test]
    fn flat_counts_are_rejected() {
        let f = cv(&[3; 8]);
        let d = difference_vector(&f);
        assert!(d.iter().all(|&x| x == 0));
        assert_eq!(locate_spike(&d), (0, 0));
        let e = estimate_from_counts(&f, &GATE);
        assert_eq!(e.indices.len(), 8);
        assert!(!e.accepted);
    }

    #[test]
    fn gates() {
        assert!(accept_window(&[5, 5, 5], &GATE));
        assert!(!accept_window(&[5, 5], &GATE));
        assert!(!accept_window(&[50, 10, 50], &WindowGate { var_threshold: 1.0, ..GATE }));
        assert_eq!(population_variance(&[7]), 0.0);
    }

    #[test]
    fn best_window_prefers_earliest() {
        assert_eq!(best_window_start(&[1.0, 1.0, 1.0, 1.0], 2), 0);
        assert_eq!(best_window_start(&[3u32, 0, 0, 2, 2], 3), 3);
    }

    proptest! {
        #[test]
        fn planted_block_is_recovered(p in 13usize..80, start in 0usize..80, k in 0usize..4, r in 1u32..60) {
            let len = [1, 3, 6, 12][k];
            let start = start % p;
            let mut f = CountVector::new(p);
            for i in 0..len {
                f.f[(start + i) % p] = r;
            }
            let e = estimate_from_counts(&f, &GATE);
            prop_assert!(e.accepted);
            let want: Vec<usize> = (0..len).map(|i| (start + i) % p).collect();
            prop_assert_eq!(e.indices, want);
        }

        #[test]
        fn votes_are_conserved(p in 1usize..50, picks in prop::collection::vec(0usize..50, 0..20)) {
            let mut f = CountVector::new(p);
            let mut set: Vec<usize> = picks.into_iter().map(|x| x % p).collect();
            set.sort_unstable();
            set.dedup();
            update_counts(&mut f, &set);
            prop_assert_eq!(f.total(), set.len() as u64);
        }
    }
}
