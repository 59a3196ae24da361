use std::cmp::Ordering;

use rand::seq::index::sample;
use rand::Rng;

/// Rank-proportional parent probabilities, aligned with `fitness`.
///
/// The lowest fitness gets rank `n`, the highest rank 1; ties keep input
/// order, so the earlier of two equal individuals ranks higher.
pub fn parent_probs(fitness: &[f64]) -> Vec<f64> {
    let n = fitness.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| cmp_fitness(fitness[a], fitness[b]));
    let total = (n * (n + 1) / 2) as f64;
    let mut probs = vec![0.0; n];
    for (pos, &i) in order.iter().enumerate() {
        probs[i] = (n - pos) as f64 / total;
    }
    probs
}

fn cmp_fitness(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

/// Round-robin tournament survivor selection; returns indices of the
/// `n` survivors, best first.
///
/// Every candidate meets `rrt_m` distinct random opponents (fewer if there
/// are not that many). A strictly lower fitness scores a win, equal fitness
/// half a win. Survivors are ranked by score, then by fitness, then by
/// input order.
pub fn round_robin_select<R: Rng + ?Sized>(fitness: &[f64], n: usize, rrt_m: usize, rng: &mut R) -> Vec<usize> {
    let m = fitness.len();
    if m <= n {
        return (0..m).collect();
    }
    let rounds = rrt_m.min(m - 1);
    let mut wins = vec![0.0f64; m];
    for (i, score) in wins.iter_mut().enumerate() {
        for k in sample(rng, m - 1, rounds).into_iter() {
            let j = if k >= i { k + 1 } else { k };
            *score += match cmp_fitness(fitness[i], fitness[j]) {
                Ordering::Less => 1.0,
                Ordering::Equal => 0.5,
                Ordering::Greater => 0.0,
            };
        }
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        wins[b]
            .partial_cmp(&wins[a])
            .unwrap_or(Ordering::Equal)
            .then_with(|| cmp_fitness(fitness[a], fitness[b]))
    });
    order.truncate(n);
    order
}
