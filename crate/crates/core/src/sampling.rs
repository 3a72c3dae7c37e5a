//! Random key rings, channel graphs and their intersections.

use rand::distr::{Bernoulli, Distribution};
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphBuilder};
use crate::model::{DiskParams, KeyParams, ModelParams};

/// Below this channel probability the Erdős–Rényi sampler jumps between
/// present edges with geometric skips instead of flipping every slot.
const SKIP_SAMPLING_BELOW: f64 = 0.05;

/// Key rings of `n` nodes, each a sorted set of `K` distinct keys from `0..P`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyAssignment {
    key: KeyParams,
    keys: Vec<u32>,
}

impl KeyAssignment {
    /// Builds an assignment from explicit rings, validating sizes and ranges.
    pub fn from_rings(key: KeyParams, rings: &[Vec<u32>]) -> Result<Self> {
        let k = key.k() as usize;
        let mut keys = Vec::with_capacity(rings.len() * k);
        for (node, ring) in rings.iter().enumerate() {
            let mut sorted = ring.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != k || ring.len() != k || sorted.iter().any(|&x| x >= key.p()) {
                return Err(Error::InvalidArgument(format!(
                    "ring of node {node} is not {k} distinct keys below {}",
                    key.p()
                )));
            }
            keys.extend(sorted);
        }
        Ok(Self { key, keys })
    }

    pub fn key_params(&self) -> KeyParams {
        self.key
    }

    pub fn n(&self) -> usize {
        self.keys.len() / self.key.k() as usize
    }

    pub fn ring(&self, node: usize) -> &[u32] {
        let k = self.key.k() as usize;
        &self.keys[node * k..(node + 1) * k]
    }

    pub fn rings(&self) -> impl Iterator<Item = &[u32]> {
        self.keys.chunks_exact(self.key.k() as usize)
    }
}

/// Uniform `K`-subset of `0..P` via Floyd's algorithm, returned sorted.
pub fn sample_subset<R: Rng + ?Sized>(key: KeyParams, rng: &mut R) -> Vec<u32> {
    let mut out = Vec::with_capacity(key.k() as usize);
    push_subset(key, rng, &mut out);
    out
}

/// Appends a sorted uniform `K`-subset to `out`.
fn push_subset<R: Rng + ?Sized>(key: KeyParams, rng: &mut R, out: &mut Vec<u32>) {
    let (k, p) = (key.k(), key.p());
    let start = out.len();
    for j in p - k..p {
        let t = rng.random_range(0..=j);
        // j exceeds every element chosen so far, so it is never a duplicate.
        let pick = if out[start..].contains(&t) { j } else { t };
        out.push(pick);
    }
    out[start..].sort_unstable();
}

/// Independent uniform key rings for `n` nodes.
pub fn sample_key_rings<R: Rng + ?Sized>(n: usize, key: KeyParams, rng: &mut R) -> KeyAssignment {
    let mut keys = Vec::with_capacity(n * key.k() as usize);
    for _ in 0..n {
        push_subset(key, rng, &mut keys);
    }
    KeyAssignment { key, keys }
}

/// Graph joining every pair of nodes whose rings share at least one key.
pub fn key_graph(assignment: &KeyAssignment) -> Graph {
    let n = assignment.n();
    let p = assignment.key.p() as usize;
    let mut builder = GraphBuilder::new(n);

    // Bucket nodes by key (counting sort), then join everyone in a bucket.
    let mut start = vec![0u32; p + 1];
    for &key in &assignment.keys {
        start[key as usize + 1] += 1;
    }
    for i in 0..p {
        start[i + 1] += start[i];
    }
    let mut fill = start.clone();
    let mut holders = vec![0u32; assignment.keys.len()];
    for (node, ring) in assignment.rings().enumerate() {
        for &key in ring {
            let slot = &mut fill[key as usize];
            holders[*slot as usize] = node as u32;
            *slot += 1;
        }
    }
    for key in 0..p {
        let bucket = &holders[start[key] as usize..start[key + 1] as usize];
        for (a, &u) in bucket.iter().enumerate() {
            for &v in &bucket[a + 1..] {
                builder.add_edge(u as usize, v as usize);
            }
        }
    }
    builder.build()
}

/// Erdős–Rényi graph: each of the `C(n, 2)` pairs is an edge independently
/// with probability `alpha`.
pub fn sample_er<R: Rng + ?Sized>(n: usize, alpha: f64, rng: &mut R) -> Result<Graph> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let mut b = GraphBuilder::new(n);
    if alpha == 0.0 || n < 2 {
        return Ok(b.build());
    }
    if alpha == 1.0 {
        return Ok(Graph::complete(n));
    }
    if alpha < SKIP_SAMPLING_BELOW {
        let total = n * (n - 1) / 2;
        let log_miss = (-alpha).ln_1p();
        // Row i holds slots [row_start, row_start + n - 1 - i).
        let (mut row, mut row_start) = (0usize, 0usize);
        let mut slot = 0usize;
        loop {
            // Number of absent slots before the next present edge.
            let u: f64 = 1.0 - rng.random::<f64>();
            let skip = (u.ln() / log_miss).floor();
            if skip >= (total - slot) as f64 {
                break;
            }
            slot += skip as usize;
            while slot >= row_start + (n - 1 - row) {
                row_start += n - 1 - row;
                row += 1;
            }
            b.add_edge(row, row + 1 + (slot - row_start));
            slot += 1;
            if slot >= total {
                break;
            }
        }
        return Ok(b.build());
    }
    // Slot is present iff a uniform u64 falls below alpha * 2^64.
    let cutoff = (alpha * 2f64.powi(64)) as u64;
    let dense = Graph::from_upper_rows(n, |i, row| {
        for (w, word) in row.iter_mut().enumerate().skip((i + 1) / 64) {
            let lo = (w * 64).max(i + 1);
            let hi = (w * 64 + 64).min(n);
            let mut bits = 0u64;
            for j in lo..hi {
                bits |= u64::from(rng.next_u64() < cutoff) << (j % 64);
            }
            *word = bits;
        }
    });
    if let Some(g) = dense {
        return Ok(g);
    }
    let coin = Bernoulli::new(alpha).map_err(|_| Error::InvalidAlpha(alpha))?;
    for i in 0..n {
        for j in i + 1..n {
            if coin.sample(rng) {
                b.add_edge(i, j);
            }
        }
    }
    Ok(b.build())
}

/// Node locations in the unit square, read as a torus.
#[derive(Debug, Clone, PartialEq)]
pub struct Positions(Vec<[f64; 2]>);

impl Positions {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        if points
            .iter()
            .flatten()
            .any(|c| !(0.0..1.0).contains(c))
        {
            return Err(Error::InvalidArgument("coordinates must lie in [0, 1)".into()));
        }
        Ok(Self(points))
    }

    pub fn sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self((0..n).map(|_| [rng.random(), rng.random()]).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.0
    }
}

/// Squared wrap-around distance on the unit torus.
pub fn torus_distance_sq(a: [f64; 2], b: [f64; 2]) -> f64 {
    let wrap = |d: f64| {
        let d = d.abs();
        d.min(1.0 - d)
    };
    let dx = wrap(a[0] - b[0]);
    let dy = wrap(a[1] - b[1]);
    dx * dx + dy * dy
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidRho(rho))
    }
}

/// Disk graph on fixed positions: an edge iff torus distance `< rho`.
pub fn torus_disk_graph(positions: &Positions, rho: f64) -> Result<Graph> {
    check_rho(rho)?;
    let pts = positions.points();
    let r2 = rho * rho;
    let mut b = GraphBuilder::new(pts.len());
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if torus_distance_sq(pts[i], pts[j]) < r2 {
                b.add_edge(i, j);
            }
        }
    }
    Ok(b.build())
}

/// Random geometric graph with uniform node placement on the unit torus.
pub fn sample_rgg_torus<R: Rng + ?Sized>(
    n: usize,
    rho: f64,
    rng: &mut R,
) -> Result<(Positions, Graph)> {
    check_rho(rho)?;
    let positions = Positions::sample(n, rng);
    let graph = torus_disk_graph(&positions, rho)?;
    Ok((positions, graph))
}

/// Key graph intersected with an independent on/off channel graph.
pub fn sample_kg_intersection<R: Rng + ?Sized>(
    n: usize,
    params: ModelParams,
    rng: &mut R,
) -> Result<Graph> {
    let keys = key_graph(&sample_key_rings(n, params.key(), rng));
    let channel = sample_er(n, params.alpha(), rng)?;
    keys.intersect(&channel)
}

/// Key graph intersected with an independent torus disk graph.
pub fn sample_kh_intersection<R: Rng + ?Sized>(
    n: usize,
    disk: DiskParams,
    rng: &mut R,
) -> Result<Graph> {
    let keys = key_graph(&sample_key_rings(n, disk.key(), rng));
    let (_, channel) = sample_rgg_torus(n, disk.rho(), rng)?;
    keys.intersect(&channel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn key(k: u32, p: u32) -> KeyParams {
        KeyParams::new(k, p).unwrap()
    }

    #[test]
    fn full_pool_rings_are_identical() {
        let mut rng = RngStream::new(3, 0).rng();
        let a = sample_key_rings(3, key(4, 4), &mut rng);
        for ring in a.rings() {
            assert_eq!(ring, &[0, 1, 2, 3]);
        }
        assert_eq!(key_graph(&a), Graph::complete(3));
    }

    #[test]
    fn subsets_are_distinct_sorted_and_in_range() {
        let mut rng = RngStream::new(5, 0).rng();
        for _ in 0..200 {
            let s = sample_subset(key(7, 12), &mut rng);
            assert_eq!(s.len(), 7);
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            assert!(s.iter().all(|&x| x < 12));
        }
    }

    #[test]
    fn key_graph_from_explicit_rings() {
        let kp = key(2, 5);
        let a = KeyAssignment::from_rings(kp, &[vec![0, 1], vec![1, 2], vec![3, 4]]).unwrap();
        assert_eq!(key_graph(&a).edges(), vec![(0, 1)]);

        let disjoint =
            KeyAssignment::from_rings(key(1, 3), &[vec![0], vec![1], vec![2]]).unwrap();
        assert_eq!(key_graph(&disjoint), Graph::empty(3));

        assert!(KeyAssignment::from_rings(kp, &[vec![0, 0]]).is_err());
        assert!(KeyAssignment::from_rings(kp, &[vec![0, 5]]).is_err());
        assert!(KeyAssignment::from_rings(kp, &[vec![0]]).is_err());
    }

    #[test]
    fn er_extremes() {
        let mut rng = RngStream::new(1, 1).rng();
        assert_eq!(sample_er(6, 0.0, &mut rng).unwrap(), Graph::empty(6));
        assert_eq!(sample_er(6, 1.0, &mut rng).unwrap(), Graph::complete(6));
        assert!(sample_er(6, 1.5, &mut rng).is_err());
        assert_eq!(sample_er(0, 0.1, &mut rng).unwrap(), Graph::empty(0));
        assert_eq!(sample_er(1, 0.1, &mut rng).unwrap(), Graph::empty(1));
    }

    #[test]
    fn skip_sampler_covers_every_slot() {
        // With alpha just below the skip cutoff every slot should be hit
        // roughly alpha of the time, including the last one.
        let n = 12;
        let slots = n * (n - 1) / 2;
        let mut hits = vec![0u32; slots];
        let trials = 20_000;
        for t in 0..trials {
            let g = sample_er(n, 0.2, &mut RngStream::new(9, t).rng()).unwrap();
            let mut s = 0;
            for i in 0..n {
                for j in i + 1..n {
                    hits[s] += g.has_edge(i, j) as u32;
                    s += 1;
                }
            }
        }
        let sd = (0.2 * 0.8 / trials as f64).sqrt();
        for (s, &h) in hits.iter().enumerate() {
            let freq = h as f64 / trials as f64;
            assert!((freq - 0.2).abs() < 5.0 * sd, "slot {s}: {freq}");
        }
    }

    #[test]
    fn torus_wraparound() {
        let pos = Positions::new(vec![[0.0, 0.0], [0.9, 0.0]]).unwrap();
        assert!(torus_disk_graph(&pos, 0.2).unwrap().has_edge(0, 1));
        let pos = Positions::new(vec![[0.0, 0.0], [0.5, 0.5]]).unwrap();
        assert!(!torus_disk_graph(&pos, 0.4).unwrap().has_edge(0, 1));
        assert!(Positions::new(vec![[1.0, 0.0]]).is_err());
    }

    #[test]
    fn disk_range_is_strict() {
        let pos = Positions::new(vec![[0.0, 0.0], [0.25, 0.0]]).unwrap();
        assert!(!torus_disk_graph(&pos, 0.25).unwrap().has_edge(0, 1));
        let mut rng = RngStream::new(0, 0).rng();
        assert!(matches!(sample_rgg_torus(3, 0.5, &mut rng), Err(Error::InvalidRho(_))));
        assert!(sample_rgg_torus(3, 0.0, &mut rng).is_err());
    }

    #[test]
    fn intersection_boundaries() {
        let mut rng = RngStream::new(2, 2).rng();
        let never = ModelParams::with_closed_alpha(key(3, 20), 0.0).unwrap();
        assert_eq!(sample_kg_intersection(8, never, &mut rng).unwrap(), Graph::empty(8));
        let always = ModelParams::with_closed_alpha(key(5, 5), 1.0).unwrap();
        assert_eq!(sample_kg_intersection(8, always, &mut rng).unwrap(), Graph::complete(8));
    }
}
