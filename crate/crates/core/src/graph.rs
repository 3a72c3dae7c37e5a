//! Simple undirected graphs on vertices `0..n`.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Largest vertex count stored as a bitset adjacency matrix.
///
/// A dense matrix costs `n^2 / 8` bytes, 2 MiB at this limit; larger graphs
/// fall back to sorted adjacency lists.
pub const DENSE_LIMIT: usize = 1 << 12;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Adjacency {
    /// Row-major symmetric bit matrix, `words` u64 per row.
    Bits { words: usize, rows: Vec<u64> },
    /// Sorted, deduplicated neighbour lists.
    Lists(Vec<Vec<u32>>),
}

/// An immutable simple graph: no self-loops, no parallel edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Adjacency,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        GraphBuilder::new(n).build()
    }

    pub fn complete(n: usize) -> Self {
        let mut b = GraphBuilder::new(n);
        for i in 0..n {
            for j in i + 1..n {
                b.add_edge(i, j);
            }
        }
        b.build()
    }

    /// Builds a graph from an edge list. Duplicate edges (in either
    /// orientation) collapse; self-loops and out-of-range endpoints are errors.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut b = GraphBuilder::new(n);
        for (i, j) in edges {
            if i == j {
                return Err(Error::InvalidArgument(format!("self-loop at vertex {i}")));
            }
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({i}, {j}) out of range for n={n}"
                )));
            }
            b.add_edge(i, j);
        }
        Ok(b.build())
    }

    /// Dense graph from its strict upper triangle. `fill(i, row)` receives the
    /// zeroed bit row of vertex `i` and may set bits `j > i` only.
    ///
    /// Returns `None` when `n` exceeds [`DENSE_LIMIT`].
    pub(crate) fn from_upper_rows<F>(n: usize, mut fill: F) -> Option<Graph>
    where
        F: FnMut(usize, &mut [u64]),
    {
        if n > DENSE_LIMIT {
            return None;
        }
        let words = n.div_ceil(64);
        let mut rows = vec![0u64; words * n];
        for i in 0..n {
            let row = &mut rows[i * words..(i + 1) * words];
            fill(i, row);
            // Keep only j > i.
            let (w, b) = (i / 64, i % 64);
            row[..w].fill(0);
            row[w] &= u64::MAX.checked_shl(b as u32 + 1).unwrap_or(0);
        }
        for i in 0..n {
            for w in i / 64..words {
                let mut bits = rows[i * words + w];
                while bits != 0 {
                    let j = w * 64 + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    rows[j * words + i / 64] |= 1 << (i % 64);
                }
            }
        }
        Some(Graph {
            n,
            adj: Adjacency::Bits { words, rows },
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        if i >= self.n || j >= self.n || i == j {
            return false;
        }
        match &self.adj {
            Adjacency::Bits { words, rows } => rows[i * words + j / 64] >> (j % 64) & 1 == 1,
            Adjacency::Lists(lists) => lists[i].binary_search(&(j as u32)).is_ok(),
        }
    }

    pub fn degree(&self, v: usize) -> usize {
        match &self.adj {
            Adjacency::Bits { words, rows } => rows[v * words..(v + 1) * words]
                .iter()
                .map(|w| w.count_ones() as usize)
                .sum(),
            Adjacency::Lists(lists) => lists[v].len(),
        }
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> Neighbors<'_> {
        match &self.adj {
            Adjacency::Bits { words, rows } => Neighbors::Bits(BitIter::new(
                &rows[v * words..(v + 1) * words],
            )),
            Adjacency::Lists(lists) => Neighbors::List(lists[v].iter()),
        }
    }

    /// Calls `f(i, j)` once per edge with `i < j`, in increasing `(i, j)` order.
    pub fn for_each_edge<F: FnMut(usize, usize)>(&self, mut f: F) {
        for i in 0..self.n {
            for j in self.neighbors(i) {
                if j > i {
                    f(i, j);
                }
            }
        }
    }

    /// All edges as `(i, j)` pairs with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        self.for_each_edge(|i, j| out.push((i, j)));
        out
    }

    /// Graph whose edge set is the intersection of both edge sets.
    pub fn intersect(&self, other: &Graph) -> Result<Graph> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let adj = match (&self.adj, &other.adj) {
            (Adjacency::Bits { words, rows: a }, Adjacency::Bits { rows: b, .. }) => {
                Adjacency::Bits {
                    words: *words,
                    rows: a.iter().zip(b).map(|(x, y)| x & y).collect(),
                }
            }
            (Adjacency::Lists(a), Adjacency::Lists(b)) => Adjacency::Lists(
                a.iter()
                    .zip(b)
                    .map(|(x, y)| sorted_intersection(x, y))
                    .collect(),
            ),
            _ => unreachable!("storage is a function of n"),
        };
        Ok(Graph { n: self.n, adj })
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch(self.n, perm.len()));
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument("relabeling is not a permutation".into()));
            }
        }
        let mut b = GraphBuilder::new(self.n);
        self.for_each_edge(|i, j| b.add_edge(perm[i], perm[j]));
        Ok(b.build())
    }

    /// Edge-list text: a `n=<count>` header, then one `i j` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("n={}\n", self.n);
        self.for_each_edge(|i, j| {
            let _ = writeln!(s, "{i} {j}");
        });
        s
    }

    pub fn from_edge_list(text: &str) -> Result<Graph> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidArgument("missing n=<count> header".into()))?;
        let n = header
            .strip_prefix("n=")
            .and_then(|v| v.trim().parse::<usize>().ok())
            .ok_or_else(|| Error::InvalidArgument(format!("bad header {header:?}")))?;
        let mut edges = Vec::new();
        for line in lines {
            let mut parts = line.split_whitespace().map(str::parse::<usize>);
            match (parts.next(), parts.next(), parts.next()) {
                (Some(Ok(i)), Some(Ok(j)), None) => edges.push((i, j)),
                _ => return Err(Error::InvalidArgument(format!("bad edge line {line:?}"))),
            }
        }
        Graph::from_edges(n, edges)
    }
}

fn sorted_intersection(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Iterator over a vertex's neighbours in increasing order.
pub enum Neighbors<'a> {
    Bits(BitIter<'a>),
    List(std::slice::Iter<'a, u32>),
}

impl Iterator for Neighbors<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        match self {
            Neighbors::Bits(it) => it.next(),
            Neighbors::List(it) => it.next().map(|&v| v as usize),
        }
    }
}

pub struct BitIter<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl<'a> BitIter<'a> {
    fn new(words: &'a [u64]) -> Self {
        Self {
            words,
            index: 0,
            current: words.first().copied().unwrap_or(0),
        }
    }
}

impl Iterator for BitIter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.index * 64 + bit);
            }
            self.index += 1;
            if self.index >= self.words.len() {
                return None;
            }
            self.current = self.words[self.index];
        }
    }
}

/// Mutable edge accumulator; adding an edge twice is a no-op.
#[derive(Debug)]
pub struct GraphBuilder {
    n: usize,
    adj: Adjacency,
}

impl GraphBuilder {
    pub fn new(n: usize) -> Self {
        let adj = if n <= DENSE_LIMIT {
            let words = n.div_ceil(64);
            Adjacency::Bits {
                words,
                rows: vec![0; words * n],
            }
        } else {
            Adjacency::Lists(vec![Vec::new(); n])
        };
        Self { n, adj }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Panics on self-loops or out-of-range endpoints.
    pub fn add_edge(&mut self, i: usize, j: usize) {
        assert!(i != j && i < self.n && j < self.n, "invalid edge ({i}, {j})");
        match &mut self.adj {
            Adjacency::Bits { words, rows } => {
                rows[i * *words + j / 64] |= 1 << (j % 64);
                rows[j * *words + i / 64] |= 1 << (i % 64);
            }
            Adjacency::Lists(lists) => {
                lists[i].push(j as u32);
                lists[j].push(i as u32);
            }
        }
    }

    pub fn build(mut self) -> Graph {
        if let Adjacency::Lists(lists) = &mut self.adj {
            for l in lists.iter_mut() {
                l.sort_unstable();
                l.dedup();
            }
        }
        Graph {
            n: self.n,
            adj: self.adj,
        }
    }
}
