use super::MeshError;

/// Compressed neighbor lists of the element dual graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementAdjacency {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

impl ElementAdjacency {
    /// Builds from per-element neighbor lists, checking symmetry and self-loops.
    pub fn from_lists(mut lists: Vec<Vec<usize>>) -> Result<Self, MeshError> {
        let n = lists.len();
        for (e, list) in lists.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            if list.iter().any(|&j| j == e || j >= n) {
                return Err(MeshError::InvalidDomain(format!(
                    "element {e} has an invalid neighbor entry"
                )));
            }
        }
        let adj = Self::from_sorted_lists(lists);
        for e in 0..n {
            for &j in adj.neighbors(e) {
                if adj.neighbors(j).binary_search(&e).is_err() {
                    return Err(MeshError::InvalidDomain(format!(
                        "adjacency is not symmetric between {e} and {j}"
                    )));
                }
            }
        }
        Ok(adj)
    }

    pub(crate) fn from_sorted_lists(lists: Vec<Vec<usize>>) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let mut neighbors = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        for mut list in lists {
            list.sort_unstable();
            neighbors.extend_from_slice(&list);
            offsets.push(neighbors.len());
        }
        Self { offsets, neighbors }
    }

    pub fn n_elements(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn neighbors(&self, e: usize) -> &[usize] {
        &self.neighbors[self.offsets[e]..self.offsets[e + 1]]
    }

    pub fn degree(&self, e: usize) -> usize {
        self.offsets[e + 1] - self.offsets[e]
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Number of undirected dual-graph edges.
    pub fn n_shared_faces(&self) -> usize {
        self.neighbors.len() / 2
    }

    /// Connected components by breadth-first search; returns a component id per element.
    pub fn components(&self) -> (usize, Vec<usize>) {
        let n = self.n_elements();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        let mut queue = std::collections::VecDeque::new();
        for seed in 0..n {
            if label[seed] != usize::MAX {
                continue;
            }
            label[seed] = count;
            queue.push_back(seed);
            while let Some(e) = queue.pop_front() {
                for &j in self.neighbors(e) {
                    if label[j] == usize::MAX {
                        label[j] = count;
                        queue.push_back(j);
                    }
                }
            }
            count += 1;
        }
        (count, label)
    }

    pub fn is_connected(&self) -> bool {
        self.components().0 <= 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_asymmetric_lists() {
        assert!(ElementAdjacency::from_lists(vec![vec![1], vec![]]).is_err());
        assert!(ElementAdjacency::from_lists(vec![vec![0]]).is_err());
        let ok = ElementAdjacency::from_lists(vec![vec![1], vec![0, 2], vec![1]]).unwrap();
        assert_eq!(ok.n_shared_faces(), 2);
        assert!(ok.is_connected());
    }

    #[test]
    fn counts_components() {
        let adj = ElementAdjacency::from_lists(vec![vec![1], vec![0], vec![]]).unwrap();
        assert_eq!(adj.components().0, 2);
    }
}
