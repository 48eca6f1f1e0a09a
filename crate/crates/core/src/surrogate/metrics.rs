use std::cmp::Ordering;

/// Fraction of pairs with distinct true values whose predicted order agrees
/// with the true order. Tied predictions count as disagreement. Returns 0
/// when no pair has distinct true values.
pub fn pairwise_order_accuracy(y_true: &[f64], y_pred: &[f64]) -> f64 {
    let (concordant, total) = concordance(y_true, y_pred);
    if total == 0 {
        0.0
    } else {
        concordant as f64 / total as f64
    }
}

/// `(concordant, comparable)` pair counts in O(n log n).
pub fn concordance(y_true: &[f64], y_pred: &[f64]) -> (u64, u64) {
    assert_eq!(y_true.len(), y_pred.len());
    let n = y_true.len();
    // dense ranks of predictions
    let mut by_pred: Vec<usize> = (0..n).collect();
    by_pred.sort_by(|&a, &b| y_pred[a].total_cmp(&y_pred[b]));
    let mut rank = vec![0usize; n];
    let mut r = 0;
    for k in 0..n {
        if k > 0 && y_pred[by_pred[k]].total_cmp(&y_pred[by_pred[k - 1]]) != Ordering::Equal {
            r += 1;
        }
        rank[by_pred[k]] = r;
    }
    let mut by_true: Vec<usize> = (0..n).collect();
    by_true.sort_by(|&a, &b| y_true[a].total_cmp(&y_true[b]));

    let mut tree = Fenwick::new(r + 1);
    let (mut concordant, mut total, mut seen) = (0u64, 0u64, 0u64);
    let mut k = 0;
    while k < n {
        let mut end = k + 1;
        while end < n && y_true[by_true[end]] == y_true[by_true[k]] {
            end += 1;
        }
        for &i in &by_true[k..end] {
            total += seen;
            concordant += tree.prefix(rank[i]);
        }
        for &i in &by_true[k..end] {
            tree.add(rank[i]);
        }
        seen += (end - k) as u64;
        k = end;
    }
    (concordant, total)
}

struct Fenwick {
    counts: Vec<u64>,
}

impl Fenwick {
    fn new(n: usize) -> Fenwick {
        Fenwick { counts: vec![0; n + 1] }
    }

    fn add(&mut self, idx: usize) {
        let mut i = idx + 1;
        while i < self.counts.len() {
            self.counts[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Number of inserted ranks strictly below `idx`.
    fn prefix(&self, idx: usize) -> u64 {
        let mut i = idx;
        let mut s = 0;
        while i > 0 {
            s += self.counts[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}
