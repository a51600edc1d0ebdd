//! Brute-force validity checks for application outputs.

use super::LeaderOutput;
use crate::topology::Topology;

/// Independent and dominating.
pub fn verify_mis(topology: &Topology, in_set: &[bool]) -> bool {
    let n = topology.node_count();
    if in_set.len() != n {
        return false;
    }
    (0..n).all(|v| {
        let nbr_in = topology.neighbors(v).iter().any(|&u| in_set[u]);
        if in_set[v] {
            !nbr_in
        } else {
            nbr_in
        }
    })
}

/// Every node colored and any two nodes within `hops` (1 or 2) differ.
pub fn verify_coloring(topology: &Topology, colors: &[Option<usize>], hops: usize) -> bool {
    let n = topology.node_count();
    if colors.len() != n || colors.iter().any(Option::is_none) || !(1..=2).contains(&hops) {
        return false;
    }
    (0..n).all(|v| {
        let close: Vec<usize> = if hops == 1 {
            topology.neighbors(v).to_vec()
        } else {
            topology.within_two_hops(v)
        };
        close.iter().all(|&u| u == v || colors[u] != colors[v])
    })
}

/// Unanimous, and the agreed identifier is held by exactly one node.
pub fn verify_leader(outputs: &[LeaderOutput]) -> bool {
    let Some(first) = outputs.first() else {
        return false;
    };
    outputs.iter().all(|o| o.leader_id == first.leader_id)
        && outputs
            .iter()
            .filter(|o| o.own_id == first.leader_id)
            .count()
            == 1
}

/// Number of distinct colors used.
pub fn palette_used(colors: &[Option<usize>]) -> usize {
    let mut c: Vec<usize> = colors.iter().flatten().copied().collect();
    c.sort_unstable();
    c.dedup();
    c.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mis_examples() {
        let k2 = Topology::clique(2);
        assert!(!verify_mis(&k2, &[false, false]));
        assert!(!verify_mis(&k2, &[true, true]));
        assert!(verify_mis(&k2, &[true, false]));
        assert!(verify_mis(&Topology::edgeless(3), &[true, true, true]));
    }

    #[test]
    fn alternating_cycle_coloring() {
        let c6 = Topology::cycle(6);
        let colors: Vec<Option<usize>> = (0..6).map(|v| Some(v % 2)).collect();
        assert!(verify_coloring(&c6, &colors, 1));
        assert!(!verify_coloring(&c6, &colors, 2));
        let mut partial = colors.clone();
        partial[2] = None;
        assert!(!verify_coloring(&c6, &partial, 1));
    }

    #[test]
    fn leader_examples() {
        let ok = vec![
            LeaderOutput {
                leader_id: 5,
                own_id: 5,
            },
            LeaderOutput {
                leader_id: 5,
                own_id: 2,
            },
        ];
        assert!(verify_leader(&ok));
        let split = vec![
            LeaderOutput {
                leader_id: 5,
                own_id: 5,
            },
            LeaderOutput {
                leader_id: 2,
                own_id: 2,
            },
        ];
        assert!(!verify_leader(&split));
        let twins = vec![
            LeaderOutput {
                leader_id: 5,
                own_id: 5,
            },
            LeaderOutput {
                leader_id: 5,
                own_id: 5,
            },
        ];
        assert!(!verify_leader(&twins));
        assert!(!verify_leader(&[]));
    }
}
