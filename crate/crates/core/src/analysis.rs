//! Connectivity and node isolation.

use serde::Serialize;

use crate::graph::Graph;

/// Disjoint sets with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    sets: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            sets: n,
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let grand = self.parent[self.parent[x] as usize];
            self.parent[x] = grand;
            x = grand as usize;
        }
        x
    }

    /// Merges the sets of `a` and `b`; returns false if already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        self.sets -= 1;
        true
    }

    pub fn set_count(&self) -> usize {
        self.sets
    }

    /// Sizes of all sets, largest first.
    pub fn set_sizes(&mut self) -> Vec<usize> {
        let mut sizes = Vec::with_capacity(self.sets);
        for v in 0..self.parent.len() {
            if self.find(v) == v {
                sizes.push(self.size[v] as usize);
            }
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructureSummary {
    pub is_connected: bool,
    pub isolated_count: usize,
    /// Component sizes in nonincreasing order; they sum to `n`.
    pub component_sizes: Vec<usize>,
    pub min_degree: usize,
}

/// Components, isolated nodes and minimum degree in one pass over the edges.
///
/// A single vertex counts as connected (and isolated). The empty graph on
/// zero vertices is not connected and has no components.
pub fn analyze(g: &Graph) -> StructureSummary {
    let n = g.n();
    let mut uf = UnionFind::new(n);
    let mut degree = vec![0usize; n];
    g.for_each_edge(|i, j| {
        degree[i] += 1;
        degree[j] += 1;
        uf.union(i, j);
    });
    StructureSummary {
        is_connected: n >= 1 && uf.set_count() == 1,
        isolated_count: degree.iter().filter(|&&d| d == 0).count(),
        component_sizes: uf.set_sizes(),
        min_degree: degree.iter().copied().min().unwrap_or(0),
    }
}

pub fn is_connected(g: &Graph) -> bool {
    analyze(g).is_connected
}

pub fn isolated_count(g: &Graph) -> usize {
    (0..g.n()).filter(|&v| g.degree(v) == 0).count()
}
