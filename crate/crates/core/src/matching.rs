//! Maximum bipartite matching (Hopcroft–Karp), used by the slot-based
//! baseline solver and the initial big-job placement.

use std::collections::VecDeque;

/// Maximum matching of the bipartite graph given by `adjacency`, where
/// `adjacency[l]` lists the right-side neighbours of left vertex `l`.
/// Returns, per left vertex, the matched right vertex. Deterministic:
/// augmenting paths are explored in adjacency order.
pub fn maximum_matching(adjacency: &[Vec<usize>], right_count: usize) -> Vec<Option<usize>> {
    let left_count = adjacency.len();
    let mut match_left: Vec<Option<usize>> = vec![None; left_count];
    let mut match_right: Vec<Option<usize>> = vec![None; right_count];

    loop {
        // BFS layers over free left vertices.
        const INF: u32 = u32::MAX;
        let mut dist = vec![INF; left_count];
        let mut queue = VecDeque::new();
        for l in 0..left_count {
            if match_left[l].is_none() {
                dist[l] = 0;
                queue.push_back(l);
            }
        }
        let mut found_free = false;
        while let Some(l) = queue.pop_front() {
            for &r in &adjacency[l] {
                match match_right[r] {
                    None => found_free = true,
                    Some(l2) => {
                        if dist[l2] == INF {
                            dist[l2] = dist[l] + 1;
                            queue.push_back(l2);
                        }
                    }
                }
            }
        }
        if !found_free {
            break;
        }

        fn try_augment(
            l: usize,
            adjacency: &[Vec<usize>],
            dist: &mut [u32],
            match_left: &mut [Option<usize>],
            match_right: &mut [Option<usize>],
        ) -> bool {
            let d = dist[l];
            dist[l] = u32::MAX;
            for &r in &adjacency[l] {
                let ok = match match_right[r] {
                    None => true,
                    Some(l2) => {
                        dist[l2] == d + 1
                            && try_augment(l2, adjacency, dist, match_left, match_right)
                    }
                };
                if ok {
                    match_left[l] = Some(r);
                    match_right[r] = Some(l);
                    return true;
                }
            }
            false
        }

        let mut progressed = false;
        for l in 0..left_count {
            if match_left[l].is_none() && dist[l] == 0 {
                progressed |= try_augment(
                    l,
                    adjacency,
                    &mut dist,
                    &mut match_left,
                    &mut match_right,
                );
            }
        }
        if !progressed {
            break;
        }
    }
    match_left
}

/// Size of the maximum matching.
pub fn matching_size(adjacency: &[Vec<usize>], right_count: usize) -> usize {
    maximum_matching(adjacency, right_count)
        .iter()
        .filter(|m| m.is_some())
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_matching_on_crossing_pairs() {
        // l0 -> {r0, r1}, l1 -> {r0}: forced l1-r0, l0-r1.
        let adj = vec![vec![0, 1], vec![0]];
        let m = maximum_matching(&adj, 2);
        assert_eq!(m, vec![Some(1), Some(0)]);
    }

    #[test]
    fn hall_violation_leaves_someone_unmatched() {
        let adj = vec![vec![0], vec![0]];
        assert_eq!(matching_size(&adj, 1), 1);
    }

    #[test]
    fn empty_graph() {
        assert_eq!(matching_size(&[], 0), 0);
    }

    #[test]
    fn larger_matching_is_found() {
        // A 4x4 cycle-ish structure with a perfect matching.
        let adj = vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0]];
        assert_eq!(matching_size(&adj, 4), 4);
    }
}
