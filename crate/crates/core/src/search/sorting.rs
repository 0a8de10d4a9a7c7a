//! Nondominated sorting, crowding distance and survivor selection.

use crate::fitness::{Evaluation, ObjectiveVector};

/// Partitions indices into fronts. Feasible members are ranked by Pareto
/// dominance; all infeasible members form one trailing front.
pub fn fast_nondominated_sort(evals: &[Evaluation]) -> Vec<Vec<usize>> {
    let feasible: Vec<(usize, &ObjectiveVector)> = evals
        .iter()
        .enumerate()
        .filter_map(|(i, e)| e.objectives().map(|o| (i, o)))
        .collect();
    let n = feasible.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    for p in 0..n {
        for q in p + 1..n {
            if feasible[p].1.dominates(feasible[q].1) {
                dominated_by[p].push(q);
                domination_count[q] += 1;
            } else if feasible[q].1.dominates(feasible[p].1) {
                dominated_by[q].push(p);
                domination_count[p] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&p| domination_count[p] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated_by[p] {
                domination_count[q] -= 1;
                if domination_count[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current.iter().map(|&p| feasible[p].0).collect());
        current = next;
    }
    let infeasible: Vec<usize> = evals
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.is_feasible())
        .map(|(i, _)| i)
        .collect();
    if !infeasible.is_empty() {
        fronts.push(infeasible);
    }
    fronts
}

/// Crowding distance of each member of one front, in input order.
///
/// Extremes of each objective get `+inf`; interior members sum the normalized
/// gap between their neighbours. Infeasible members get 0.
#[allow(clippy::needless_range_loop)]
pub fn crowding_distance(front: &[Evaluation]) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0; n];
    if front.iter().any(|e| !e.is_feasible()) {
        return dist;
    }
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let objs: Vec<[f64; 2]> = front
        .iter()
        .map(|e| e.objectives().expect("feasible").as_minimization())
        .collect();
    for m in 0..2 {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| objs[a][m].total_cmp(&objs[b][m]));
        let lo = objs[order[0]][m];
        let hi = objs[order[n - 1]][m];
        // first index among tied maxima, so duplicates of an extreme share one boundary slot
        let top = order
            .iter()
            .position(|&i| objs[i][m] == hi)
            .expect("nonempty");
        dist[order[0]] = f64::INFINITY;
        dist[order[top]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for k in 1..n - 1 {
            let i = order[k];
            dist[i] += (objs[order[k + 1]][m] - objs[order[k - 1]][m]) / range;
        }
    }
    dist
}

/// Rank (front index) and crowding distance per member.
pub fn rank_and_crowding(evals: &[Evaluation]) -> (Vec<usize>, Vec<f64>) {
    let mut rank = vec![0; evals.len()];
    let mut crowd = vec![0.0; evals.len()];
    for (r, front) in fast_nondominated_sort(evals).iter().enumerate() {
        let members: Vec<Evaluation> = front.iter().map(|&i| evals[i]).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&members)) {
            rank[i] = r;
            crowd[i] = d;
        }
    }
    (rank, crowd)
}

/// Picks `mu` survivors: whole fronts in rank order, then the most crowded-apart
/// members of the first front that does not fit. Ties keep input order.
pub fn environmental_selection(evals: &[Evaluation], mu: usize) -> Vec<usize> {
    let mut chosen = Vec::with_capacity(mu);
    for front in fast_nondominated_sort(evals) {
        if chosen.len() + front.len() <= mu {
            chosen.extend(front);
            continue;
        }
        let members: Vec<Evaluation> = front.iter().map(|&i| evals[i]).collect();
        let dist = crowding_distance(&members);
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| dist[b].total_cmp(&dist[a]));
        chosen.extend(order.into_iter().take(mu - chosen.len()).map(|k| front[k]));
        break;
    }
    chosen
}

/// `a` beats `b` in a binary tournament: lower rank, then larger crowding distance.
pub fn crowded_better(rank: &[usize], crowd: &[f64], a: usize, b: usize) -> bool {
    rank[a] < rank[b] || (rank[a] == rank[b] && crowd[a] > crowd[b])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(d: f64, u: f64) -> Evaluation {
        Evaluation::Feasible(ObjectiveVector::new(d, u).unwrap())
    }

    /// Front index by repeated peeling with an O(n^2) dominance check.
    fn brute_force_ranks(evals: &[Evaluation]) -> Vec<usize> {
        let mut rank = vec![usize::MAX; evals.len()];
        let mut remaining: Vec<usize> = (0..evals.len())
            .filter(|&i| evals[i].is_feasible())
            .collect();
        let mut r = 0;
        while !remaining.is_empty() {
            let front: Vec<usize> = remaining
                .iter()
                .copied()
                .filter(|&i| {
                    !remaining.iter().any(|&j| {
                        let (a, b) = (
                            evals[j].objectives().unwrap(),
                            evals[i].objectives().unwrap(),
                        );
                        a.dist_wps <= b.dist_wps
                            && a.unstable >= b.unstable
                            && (a.dist_wps < b.dist_wps || a.unstable > b.unstable)
                    })
                })
                .collect();
            for &i in &front {
                rank[i] = r;
            }
            remaining.retain(|i| !front.contains(i));
            r += 1;
        }
        for (i, e) in evals.iter().enumerate() {
            if !e.is_feasible() {
                rank[i] = r;
            }
        }
        rank
    }

    #[test]
    fn two_member_example() {
        assert_eq!(
            fast_nondominated_sort(&[f(0.0, 5.0), f(1.0, 1.0)]),
            vec![vec![0], vec![1]]
        );
        assert_eq!(fast_nondominated_sort(&[f(1.0, 1.0)]), vec![vec![0]]);
    }

    #[test]
    fn infeasible_ranked_last() {
        let evals = [
            Evaluation::Infeasible,
            f(9.0, 9.0),
            f(0.0, 1.0),
            f(5.0, 10.0),
        ];
        let fronts = fast_nondominated_sort(&evals);
        assert_eq!(fronts, vec![vec![2, 3], vec![1], vec![0]]);
    }

    #[test]
    fn crowding_examples() {
        assert_eq!(
            crowding_distance(&[f(0.0, 1.0), f(1.0, 2.0)]),
            vec![f64::INFINITY; 2]
        );
        let d = crowding_distance(&[f(0.0, 0.0), f(1.0, 1.0), f(2.0, 2.0)]);
        assert_eq!(d[1], 2.0);
        assert!(d[0].is_infinite() && d[2].is_infinite());
    }

    #[test]
    fn selection_prefers_rank_then_spread() {
        let evals = [
            f(0.0, 10.0),
            f(10.0, 20.0),
            f(5.0, 15.0),
            f(4.9, 14.0),
            Evaluation::Infeasible,
            f(20.0, 1.0),
        ];
        // front 0 = {0, 1, 2, 3}; cutting it keeps the two extremes
        assert_eq!(environmental_selection(&evals, 2), vec![0, 1]);
        let four = environmental_selection(&evals, 4);
        assert_eq!(four.len(), 4);
        assert!(!four.contains(&4));
    }

    #[test]
    fn duplicated_extreme_does_not_evict_other_extreme() {
        let evals = [f(0.0, 0.0), f(0.0, 0.0), f(3.0, 5.0), f(1.0, 2.0)];
        let chosen = environmental_selection(&evals, 2);
        assert!(chosen.contains(&2), "{chosen:?}");
    }

    proptest! {
        #[test]
        fn sort_matches_brute_force(points in prop::collection::vec(
            prop_oneof![
                9 => (0u8..20, 0u8..20).prop_map(|(d, u)| f(d as f64, u as f64)),
                1 => Just(Evaluation::Infeasible),
            ], 1..50)) {
            let fronts = fast_nondominated_sort(&points);
            let mut rank = vec![usize::MAX; points.len()];
            for (r, fr) in fronts.iter().enumerate() {
                for &i in fr {
                    prop_assert_eq!(rank[i], usize::MAX);
                    rank[i] = r;
                }
            }
            prop_assert_eq!(rank, brute_force_ranks(&points));
        }

        #[test]
        fn crowding_is_permutation_invariant(points in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 1..15), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let evals: Vec<Evaluation> = points.iter().map(|&(d, u)| f(d, u)).collect();
            let mut shuffled = evals.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let mut a = crowding_distance(&evals);
            let mut b = crowding_distance(&shuffled);
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x == y) || (x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn selection_keeps_extremes(points in prop::collection::vec((0u8..6, 0u8..6).prop_map(|(d, u)| (d as f64, u as f64)), 2..30), mu_frac in 0.1f64..1.0) {
            let evals: Vec<Evaluation> = points.iter().map(|&(d, u)| f(d, u)).collect();
            let mu = ((evals.len() as f64 * mu_frac) as usize).max(2);
            let chosen = environmental_selection(&evals, mu);
            prop_assert_eq!(chosen.len(), mu.min(evals.len()));
            let best_d = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
            let best_u = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(chosen.iter().any(|&i| points[i].0 == best_d));
            prop_assert!(chosen.iter().any(|&i| points[i].1 == best_u));
        }
    }
}
