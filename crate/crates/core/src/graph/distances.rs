use std::collections::VecDeque;

use rayon::prelude::*;

use super::Graph;

/// Dense hop-count matrix; `None` marks unreachable pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<u32>,
}

const UNREACHABLE: u32 = u32::MAX;

impl DistanceMatrix {
    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Option<u32> {
        let d = self.data[i * self.n + j];
        (d != UNREACHABLE).then_some(d)
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = Option<u32>> + '_ {
        self.data[i * self.n..(i + 1) * self.n]
            .iter()
            .map(|&d| (d != UNREACHABLE).then_some(d))
    }
}

fn bfs(graph: &Graph, source: usize, out: &mut [u32]) {
    out.fill(UNREACHABLE);
    out[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let next = out[u] + 1;
        for &v in graph.neighbors(u) {
            if out[v] == UNREACHABLE {
                out[v] = next;
                queue.push_back(v);
            }
        }
    }
}

/// Breadth-first search from every node, one source per task.
pub fn all_pairs_distances(graph: &Graph) -> DistanceMatrix {
    let n = graph.num_nodes();
    let mut data = vec![0; n * n];
    if n > 0 {
        data.par_chunks_mut(n)
            .enumerate()
            .for_each(|(s, row)| bfs(graph, s, row));
    }
    DistanceMatrix { n, data }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn path_and_cycle() {
        let p4 = all_pairs_distances(&Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]));
        assert_eq!(p4.get(0, 3), Some(3));
        assert_eq!(p4.get(2, 2), Some(0));
        let c4 = all_pairs_distances(&Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]));
        assert_eq!(c4.get(0, 2), Some(2));
        assert_eq!(c4.get(1, 3), Some(2));
        assert_eq!(c4.get(0, 3), Some(1));
    }

    #[test]
    fn unreachable_pairs() {
        let d = all_pairs_distances(&Graph::from_edges(4, [(0, 1), (2, 3)]));
        assert_eq!(d.get(0, 2), None);
        assert_eq!(d.get(3, 2), Some(1));
    }

    /// Walks the unique tree path by climbing parent pointers from the
    /// deeper endpoint.
    fn tree_path_length(parent: &[Option<usize>], depth: &[u32], mut a: usize, mut b: usize) -> u32 {
        let mut len = 0;
        while a != b {
            if depth[a] >= depth[b] {
                a = parent[a].unwrap();
            } else {
                b = parent[b].unwrap();
            }
            len += 1;
        }
        len
    }

    #[test]
    fn random_trees_match_parent_walk() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.random_range(2..60);
            let mut parent = vec![None; n];
            let mut depth = vec![0u32; n];
            let mut edges = Vec::new();
            for v in 1..n {
                let p = rng.random_range(0..v);
                parent[v] = Some(p);
                depth[v] = depth[p] + 1;
                edges.push((p, v));
            }
            let d = all_pairs_distances(&Graph::from_edges(n, edges));
            for a in 0..n {
                for b in 0..n {
                    assert_eq!(d.get(a, b), Some(tree_path_length(&parent, &depth, a, b)));
                }
            }
        }
    }
}
