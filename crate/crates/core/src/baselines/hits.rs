//! Hubs and authorities by mutual reinforcement.

use crate::corpus::FollowGraph;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct HitsScores {
    pub hub: Vec<f64>,
    pub authority: Vec<f64>,
    pub iterations: usize,
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

fn max_abs_change(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Power iteration `a = Gᵀh`, `h = Ga`, each L2-normalized, starting from a
/// uniform hub vector. Stops once neither vector moves by more than `tol`
/// in any entry, or after `max_iters` rounds.
pub fn hits(graph: &FollowGraph, max_iters: usize, tol: f64) -> Result<HitsScores> {
    let n = graph.n_users();
    if graph.n_edges() == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut hub = vec![1.0 / (n as f64).sqrt(); n];
    let mut authority = vec![0.0; n];
    let mut iterations = 0;
    while iterations < max_iters.max(1) {
        iterations += 1;
        let mut a: Vec<f64> = (0..n).map(|v| graph.followers(v).iter().map(|&u| hub[u]).sum()).collect();
        normalize(&mut a);
        let mut h: Vec<f64> = (0..n).map(|u| graph.followees(u).iter().map(|&v| a[v]).sum()).collect();
        normalize(&mut h);
        let change = max_abs_change(&a, &authority).max(max_abs_change(&h, &hub));
        authority = a;
        hub = h;
        if change < tol {
            break;
        }
    }
    Ok(HitsScores { hub, authority, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn run(n: usize, edges: &[(usize, usize)]) -> HitsScores {
        hits(&FollowGraph::from_edges(n, edges.iter().copied()).unwrap(), 100_000, 1e-14).unwrap()
    }

    #[test]
    fn star() {
        let n = 6;
        let s = run(n + 1, &(1..=n).map(|l| (l, 0)).collect::<Vec<_>>());
        assert_abs_diff_eq!(s.authority[0], 1.0, epsilon = 1e-12);
        assert_eq!(s.hub[0], 0.0);
        for l in 1..=n {
            assert_abs_diff_eq!(s.hub[l], 1.0 / (n as f64).sqrt(), epsilon = 1e-12);
            assert_eq!(s.authority[l], 0.0);
        }
    }

    #[test]
    fn single_edge() {
        let s = run(3, &[(0, 1)]);
        assert_eq!(s.hub, vec![1.0, 0.0, 0.0]);
        assert_eq!(s.authority, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn two_cycle() {
        let s = run(2, &[(0, 1), (1, 0)]);
        let r = 0.5f64.sqrt();
        for x in s.hub.iter().chain(&s.authority) {
            assert_abs_diff_eq!(*x, r, epsilon = 1e-15);
        }
    }

    #[test]
    fn empty_graph_is_an_error() {
        assert!(matches!(hits(&FollowGraph::empty(3), 10, 1e-9), Err(Error::EmptyGraph)));
    }

    fn edges_strategy() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
        (2usize..10).prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n), 1..30)))
    }

    proptest! {
        #[test]
        fn relabeling_permutes_scores((n, edges) in edges_strategy(), shift in 1usize..9) {
            let edges: Vec<_> = edges.into_iter().filter(|(u, v)| u != v).collect();
            prop_assume!(!edges.is_empty());
            let p = |u: usize| (u + shift) % n;
            let a = run(n, &edges);
            let b = run(n, &edges.iter().map(|&(u, v)| (p(u), p(v))).collect::<Vec<_>>());
            for u in 0..n {
                prop_assert!((a.hub[u] - b.hub[p(u)]).abs() < 1e-9);
                prop_assert!((a.authority[u] - b.authority[p(u)]).abs() < 1e-9);
            }
        }

        #[test]
        fn extra_iterations_stay_at_the_fixed_point((n, edges) in edges_strategy()) {
            let edges: Vec<_> = edges.into_iter().filter(|(u, v)| u != v).collect();
            prop_assume!(!edges.is_empty());
            let g = FollowGraph::from_edges(n, edges).unwrap();
            let a = hits(&g, 100_000, 1e-12).unwrap();
            let b = hits(&g, a.iterations + 50, 0.0).unwrap();
            prop_assert!(max_abs_change(&a.hub, &b.hub) < 1e-9);
            prop_assert!(max_abs_change(&a.authority, &b.authority) < 1e-9);
        }
    }
}
