//! Exact k-nearest-neighbour regression from noisy feature vectors to
//! reference specific-force samples.
//!
//! [`KnnIndex`] stores `(feature, target)` pairs in a kd-tree. A prediction is
//! the unweighted mean of the targets of the `k` closest features under the
//! Euclidean metric. Neighbours are ranked by `(squared distance, insertion
//! index)` and their targets are summed in that order, so the tree and a
//! brute-force scan return bit-identical results.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{Denoiser, Triad};

const LEAF_SIZE: usize = 16;
const NO_CHILD: u32 = u32::MAX;
const INDEX_MAGIC: &[u8; 8] = b"ADKNNIDX";
const MODEL_MAGIC: &[u8; 8] = b"ADKNNMOD";
const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone)]
struct Node {
    start: u32,
    end: u32,
    axis: u32,
    split: f64,
    left: u32,
    right: u32,
}

/// Exact kd-tree over `n` feature vectors of dimension `dim`.
#[derive(Debug, Clone)]
pub struct KnnIndex {
    dim: usize,
    points: Vec<f64>,
    targets: Vec<Triad>,
    perm: Vec<u32>,
    packed: Vec<f64>,
    nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    d2: f64,
    idx: u32,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2.total_cmp(&other.d2).then(self.idx.cmp(&other.idx))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn mean_of(targets: &[Triad], ranked: &[Candidate]) -> Triad {
    let mut acc = [0.0; 3];
    for c in ranked {
        let t = targets[c.idx as usize];
        for a in 0..3 {
            acc[a] += t[a];
        }
    }
    let k = ranked.len() as f64;
    acc.map(|v| v / k)
}

/// `round(√(n/5))` clamped to `[1, n]`.
pub fn select_k(n: usize) -> usize {
    let k = (n as f64 / 5.0).sqrt().round() as usize;
    k.clamp(1, n.max(1))
}

/// Builds an index over 3-D noisy samples paired with reference samples.
pub fn fit(pairs: &[(Triad, Triad)]) -> Result<KnnIndex> {
    let points = pairs.iter().flat_map(|(x, _)| *x).collect();
    let targets = pairs.iter().map(|(_, y)| *y).collect();
    KnnIndex::from_rows(3, points, targets)
}

impl KnnIndex {
    /// `points` holds `targets.len()` row-major feature vectors of length `dim`.
    pub fn from_rows(dim: usize, points: Vec<f64>, targets: Vec<Triad>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("kNN feature dimension must be positive"));
        }
        if targets.is_empty() {
            return Err(Error::invalid("kNN index needs at least one pair"));
        }
        if targets.len() > NO_CHILD as usize {
            return Err(Error::invalid("kNN index too large"));
        }
        if points.len() != dim * targets.len() {
            return Err(Error::invalid(format!(
                "{} feature values for {} targets of dimension {dim}",
                points.len(),
                targets.len()
            )));
        }
        if points.iter().chain(targets.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("kNN pairs must be finite"));
        }
        let n = targets.len();
        let mut index = Self {
            dim,
            points,
            targets,
            perm: (0..n as u32).collect(),
            packed: Vec::new(),
            nodes: Vec::new(),
        };
        index.build(0, n);
        index.packed = index
            .perm
            .iter()
            .flat_map(|&i| index.row(i as usize).to_vec())
            .collect();
        Ok(index)
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn targets(&self) -> &[Triad] {
        &self.targets
    }

    fn build(&mut self, start: usize, end: usize) -> u32 {
        let id = self.nodes.len() as u32;
        self.nodes.push(Node {
            start: start as u32,
            end: end as u32,
            axis: 0,
            split: 0.0,
            left: NO_CHILD,
            right: NO_CHILD,
        });
        if end - start <= LEAF_SIZE {
            return id;
        }
        let dim = self.dim;
        let (mut axis, mut spread) = (0, 0.0);
        for a in 0..dim {
            let (lo, hi) = self.perm[start..end].iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                let v = self.points[i as usize * dim + a];
                (lo.min(v), hi.max(v))
            });
            if hi - lo > spread {
                spread = hi - lo;
                axis = a;
            }
        }
        if spread == 0.0 {
            return id;
        }
        let mid = (start + end) / 2;
        let points = &self.points;
        self.perm[start..end].select_nth_unstable_by(mid - start, |&i, &j| {
            points[i as usize * dim + axis].total_cmp(&points[j as usize * dim + axis])
        });
        let split = self.points[self.perm[mid] as usize * dim + axis];
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        let node = &mut self.nodes[id as usize];
        node.axis = axis as u32;
        node.split = split;
        node.left = left;
        node.right = right;
        id
    }

    fn check_query(&self, x: &[f64], k: usize) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::invalid(format!(
                "query of dimension {} for index of dimension {}",
                x.len(),
                self.dim
            )));
        }
        if k == 0 || k > self.len() {
            return Err(Error::invalid(format!("k = {k} outside [1, {}]", self.len())));
        }
        Ok(())
    }

    /// The `k` nearest neighbours as `(index, squared distance)`, closest first.
    pub fn neighbours(&self, x: &[f64], k: usize) -> Result<Vec<(usize, f64)>> {
        self.check_query(x, k)?;
        Ok(self.search(x, k).into_iter().map(|c| (c.idx as usize, c.d2)).collect())
    }

    fn search(&self, x: &[f64], k: usize) -> Vec<Candidate> {
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.visit(0, x, k, &mut heap);
        heap.into_sorted_vec()
    }

    fn visit(&self, node: u32, x: &[f64], k: usize, heap: &mut BinaryHeap<Candidate>) {
        let n = &self.nodes[node as usize];
        if n.left == NO_CHILD {
            for slot in n.start as usize..n.end as usize {
                let p = &self.packed[slot * self.dim..(slot + 1) * self.dim];
                let cand = Candidate {
                    d2: squared_distance(x, p),
                    idx: self.perm[slot],
                };
                if heap.len() < k {
                    heap.push(cand);
                } else if cand < *heap.peek().expect("heap holds k items") {
                    heap.pop();
                    heap.push(cand);
                }
            }
            return;
        }
        let diff = x[n.axis as usize] - n.split;
        let (near, far) = if diff < 0.0 { (n.left, n.right) } else { (n.right, n.left) };
        self.visit(near, x, k, heap);
        // equal bounds are still visited so that ties resolve by insertion index
        if heap.len() < k || diff * diff <= heap.peek().map_or(f64::INFINITY, |c| c.d2) {
            self.visit(far, x, k, heap);
        }
    }

    /// Mean target of the `k` nearest features.
    pub fn predict(&self, x: &[f64], k: usize) -> Result<Triad> {
        self.check_query(x, k)?;
        Ok(mean_of(&self.targets, &self.search(x, k)))
    }

    /// Reference implementation: full sort of all pairs.
    pub fn predict_brute_force(&self, x: &[f64], k: usize) -> Result<Triad> {
        self.check_query(x, k)?;
        let mut all: Vec<Candidate> = (0..self.len())
            .map(|i| Candidate {
                d2: squared_distance(x, self.row(i)),
                idx: i as u32,
            })
            .collect();
        all.sort();
        Ok(mean_of(&self.targets, &all[..k]))
    }

    /// Parallel [`predict`](Self::predict) over row-major queries.
    pub fn predict_batch(&self, queries: &[f64], k: usize) -> Result<Vec<Triad>> {
        if !queries.len().is_multiple_of(self.dim) {
            return Err(Error::invalid("query buffer not a multiple of the dimension"));
        }
        queries.par_chunks(self.dim).map(|q| self.predict(q, k)).collect()
    }

    pub fn write_to<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        out.write_all(INDEX_MAGIC)?;
        out.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
        out.write_all(&(self.dim as u32).to_le_bytes())?;
        out.write_all(&(self.len() as u64).to_le_bytes())?;
        for v in self.points.iter().chain(self.targets.iter().flatten()) {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(input: &mut R) -> Result<Self> {
        expect_magic(input, INDEX_MAGIC)?;
        let version = read_u32(input)?;
        if version != SNAPSHOT_VERSION {
            return Err(Error::InvalidData(format!("unsupported kNN snapshot version {version}")));
        }
        let dim = read_u32(input)? as usize;
        let n = read_u64(input)? as usize;
        let points = read_f64s(input, n * dim)?;
        let flat = read_f64s(input, n * 3)?;
        let targets = flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Self::from_rows(dim, points, targets)
    }
}

fn snapshot_err(e: std::io::Error) -> Error {
    Error::InvalidData(format!("truncated or unreadable kNN snapshot: {e}"))
}

fn expect_magic<R: Read>(input: &mut R, magic: &[u8; 8]) -> Result<()> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf).map_err(snapshot_err)?;
    if &buf != magic {
        return Err(Error::InvalidData("not a kNN snapshot".into()));
    }
    Ok(())
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf).map_err(snapshot_err)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64<R: Read>(input: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf).map_err(snapshot_err)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64s<R: Read>(input: &mut R, n: usize) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; n * 8];
    input.read_exact(&mut bytes).map_err(snapshot_err)?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

/// Applies [`KnnIndex::predict`] to every sample of a 3-axis series.
pub fn denoise_series(index: &KnnIndex, x: &[Triad], k: usize) -> Result<Vec<Triad>> {
    let flat: Vec<f64> = x.iter().flatten().copied().collect();
    index.predict_batch(&flat, k)
}

/// Which noisy samples are pooled into the query for one time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueryContext {
    /// The sample itself.
    Sample,
    /// Mean of a centered run of this many samples, shifted inward at the window edges.
    Centered(usize),
    /// Mean of the whole window.
    Window,
}

impl QueryContext {
    fn tag(self) -> (u8, u64) {
        match self {
            QueryContext::Sample => (0, 0),
            QueryContext::Centered(c) => (1, c as u64),
            QueryContext::Window => (2, 0),
        }
    }

    fn from_tag(tag: u8, param: u64) -> Result<Self> {
        match tag {
            0 => Ok(QueryContext::Sample),
            1 => Ok(QueryContext::Centered(param as usize)),
            2 => Ok(QueryContext::Window),
            _ => Err(Error::InvalidData(format!("unknown kNN context tag {tag}"))),
        }
    }
}

/// Query features for every sample of a window.
pub fn pooled_features(window: &[Triad], context: QueryContext) -> Vec<Triad> {
    let n = window.len();
    let mean = |span: &[Triad]| -> Triad {
        let mut acc = [0.0; 3];
        for s in span {
            for a in 0..3 {
                acc[a] += s[a];
            }
        }
        acc.map(|v| v / span.len() as f64)
    };
    match context {
        QueryContext::Sample | QueryContext::Centered(0) | QueryContext::Centered(1) => window.to_vec(),
        QueryContext::Centered(c) => (0..n)
            .map(|i| {
                let lo = i.saturating_sub(c / 2);
                let hi = (lo + c).min(n);
                mean(&window[hi.saturating_sub(c).min(lo)..hi])
            })
            .collect(),
        QueryContext::Window if n == 0 => Vec::new(),
        QueryContext::Window => vec![mean(window); n],
    }
}

/// kNN regressor wrapped as a window denoiser.
#[derive(Debug, Clone)]
pub struct KnnDenoiser {
    pub index: KnnIndex,
    pub k: usize,
    pub context: QueryContext,
}

impl KnnDenoiser {
    /// Fits on paired `(noisy, gt)` windows; `k` defaults to [`select_k`].
    pub fn train(windows: &[(Vec<Triad>, Vec<Triad>)], context: QueryContext, k: Option<usize>) -> Result<Self> {
        let mut points = Vec::new();
        let mut targets = Vec::new();
        for (noisy, gt) in windows {
            if noisy.len() != gt.len() {
                return Err(Error::invalid("noisy and reference windows differ in length"));
            }
            points.extend(pooled_features(noisy, context).into_iter().flatten());
            targets.extend_from_slice(gt);
        }
        let index = KnnIndex::from_rows(3, points, targets)?;
        let k = k.unwrap_or_else(|| select_k(index.len()));
        if k == 0 || k > index.len() {
            return Err(Error::invalid(format!("k = {k} outside [1, {}]", index.len())));
        }
        Ok(Self { index, k, context })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        let (tag, param) = self.context.tag();
        let write = |out: &mut std::io::BufWriter<std::fs::File>| -> std::io::Result<()> {
            out.write_all(MODEL_MAGIC)?;
            out.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
            out.write_all(&(self.k as u64).to_le_bytes())?;
            out.write_all(&[tag])?;
            out.write_all(&param.to_le_bytes())?;
            self.index.write_to(out)?;
            out.flush()
        };
        write(&mut out).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut input = std::io::BufReader::new(file);
        expect_magic(&mut input, MODEL_MAGIC)?;
        let version = read_u32(&mut input)?;
        if version != SNAPSHOT_VERSION {
            return Err(Error::InvalidData(format!("unsupported kNN snapshot version {version}")));
        }
        let k = read_u64(&mut input)? as usize;
        let mut tag = [0u8; 1];
        input.read_exact(&mut tag).map_err(snapshot_err)?;
        let context = QueryContext::from_tag(tag[0], read_u64(&mut input)?)?;
        let index = KnnIndex::read_from(&mut input)?;
        if k == 0 || k > index.len() {
            return Err(Error::InvalidData(format!("stored k = {k} outside [1, {}]", index.len())));
        }
        Ok(Self { index, k, context })
    }
}

impl Denoiser for KnnDenoiser {
    fn name(&self) -> &str {
        "kNN"
    }

    fn denoise(&self, window: &[Triad]) -> Result<Vec<Triad>> {
        let features = pooled_features(window, self.context);
        if self.context == QueryContext::Window && !features.is_empty() {
            let y = self.index.predict(&features[0], self.k)?;
            return Ok(vec![y; window.len()]);
        }
        features.iter().map(|f| self.index.predict(f, self.k)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_pairs(n: usize, seed: u64) -> Vec<(Triad, Triad)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let x: Triad = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
                let y: Triad = std::array::from_fn(|_| rng.random_range(-10.0..10.0));
                (x, y)
            })
            .collect()
    }

    #[test]
    fn select_k_values() {
        assert_eq!(select_k(90_000), 134);
        assert_eq!(select_k(5), 1);
        assert_eq!(select_k(1), 1);
        assert_eq!(select_k(270_000), 232);
    }

    #[test]
    fn single_pair_index() {
        let idx = fit(&[([1.0, 2.0, 3.0], [4.0, 5.0, 6.0])]).unwrap();
        assert_eq!(idx.len(), 1);
        assert_eq!(idx.predict(&[-50.0, 0.0, 9.0], 1).unwrap(), [4.0, 5.0, 6.0]);
        assert!(idx.predict(&[0.0; 3], 2).is_err());
        assert!(idx.predict(&[0.0; 3], 0).is_err());
        assert!(idx.predict(&[0.0; 2], 1).is_err());
    }

    #[test]
    fn empty_and_non_finite_rejected() {
        assert!(fit(&[]).is_err());
        assert!(fit(&[([f64::NAN, 0.0, 0.0], [0.0; 3])]).is_err());
    }

    #[test]
    fn duplicates_both_retrieved() {
        let pairs = vec![
            ([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]),
            ([5.0, 5.0, 5.0], [9.0, 9.0, 9.0]),
            ([0.0, 0.0, 0.0], [3.0, 0.0, 0.0]),
        ];
        let idx = fit(&pairs).unwrap();
        let nb = idx.neighbours(&[0.1, 0.0, 0.0], 2).unwrap();
        assert_eq!(nb.iter().map(|n| n.0).collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(idx.predict(&[0.1, 0.0, 0.0], 2).unwrap(), [2.0, 0.0, 0.0]);
    }

    #[test]
    fn ties_break_by_insertion_order() {
        // 40 identical points force every leaf to tie
        let pairs: Vec<(Triad, Triad)> = (0..40).map(|i| ([1.0; 3], [i as f64, 0.0, 0.0])).collect();
        let idx = fit(&pairs).unwrap();
        let nb = idx.neighbours(&[0.0; 3], 5).unwrap();
        assert_eq!(nb.iter().map(|n| n.0).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn k_equals_n_is_global_mean() {
        let pairs = random_pairs(64, 3);
        let idx = fit(&pairs).unwrap();
        let a = idx.predict(&[0.5, 0.5, 0.5], 64).unwrap();
        let b = idx.predict(&[-0.9, 0.1, 0.0], 64).unwrap();
        let mut mean = [0.0; 3];
        for (_, y) in &pairs {
            for i in 0..3 {
                mean[i] += y[i] / 64.0;
            }
        }
        for i in 0..3 {
            assert!((a[i] - mean[i]).abs() < 1e-12);
            assert!((a[i] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn tree_matches_brute_force_exactly() {
        let pairs = random_pairs(200, 11);
        let idx = fit(&pairs).unwrap();
        let queries = random_pairs(50, 12);
        for (q, _) in &queries {
            assert_eq!(idx.predict(q, 7).unwrap(), idx.predict_brute_force(q, 7).unwrap());
        }
    }

    #[test]
    fn quantized_points_match_brute_force() {
        // coarse lattice produces many exact distance ties
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pairs: Vec<(Triad, Triad)> = (0..500)
            .map(|i| (std::array::from_fn(|_| rng.random_range(0..4) as f64), [i as f64, 0.0, 0.0]))
            .collect();
        let idx = fit(&pairs).unwrap();
        for q in 0..30 {
            let x = [(q % 4) as f64, ((q / 4) % 4) as f64 + 0.5, 1.0];
            for k in [1, 3, 17, 60] {
                assert_eq!(idx.predict(&x, k).unwrap(), idx.predict_brute_force(&x, k).unwrap());
            }
        }
    }

    #[test]
    fn series_is_elementwise_predict() {
        let idx = fit(&random_pairs(300, 1)).unwrap();
        assert!(denoise_series(&idx, &[], 3).unwrap().is_empty());
        let series: Vec<Triad> = random_pairs(100, 2).into_iter().map(|p| p.0).collect();
        let out = denoise_series(&idx, &series, 4).unwrap();
        for (x, y) in series.iter().zip(&out) {
            assert_eq!(*y, idx.predict(x, 4).unwrap());
        }
    }

    #[test]
    fn snapshot_round_trip() {
        let windows: Vec<(Vec<Triad>, Vec<Triad>)> = (0..4)
            .map(|w| {
                let p = random_pairs(10, w);
                (p.iter().map(|x| x.0).collect(), p.iter().map(|x| x.1).collect())
            })
            .collect();
        let model = KnnDenoiser::train(&windows, QueryContext::Centered(5), None).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("knn.bin");
        model.save(&path).unwrap();
        let back = KnnDenoiser::load(&path).unwrap();
        assert_eq!(back.k, model.k);
        assert_eq!(back.context, model.context);
        assert_eq!(back.index.points, model.index.points);
        assert_eq!(back.index.targets, model.index.targets);
        let q = &windows[1].0;
        assert_eq!(back.denoise(q).unwrap(), model.denoise(q).unwrap());

        std::fs::write(&path, b"garbage").unwrap();
        assert!(matches!(KnnDenoiser::load(&path), Err(Error::InvalidData(_))));
    }

    #[test]
    fn pooled_feature_shapes() {
        let w: Vec<Triad> = (0..6).map(|i| [i as f64, 0.0, 0.0]).collect();
        assert_eq!(pooled_features(&w, QueryContext::Sample), w);
        let win = pooled_features(&w, QueryContext::Window);
        assert!(win.iter().all(|f| f[0] == 2.5));
        let c = pooled_features(&w, QueryContext::Centered(3));
        let xs: Vec<f64> = c.iter().map(|f| f[0]).collect();
        assert_eq!(xs, vec![1.0, 1.0, 2.0, 3.0, 4.0, 4.0]);
    }

    #[test]
    fn kd_tree_is_faster_than_scan() {
        let pairs = random_pairs(90_000, 21);
        let idx = fit(&pairs).unwrap();
        let k = select_k(idx.len());
        let queries: Vec<Triad> = random_pairs(200, 22).into_iter().map(|p| p.0).collect();
        let scan = |x: &[f64]| -> Triad {
            let mut heap = BinaryHeap::with_capacity(k + 1);
            for i in 0..idx.len() {
                let c = Candidate { d2: squared_distance(x, idx.row(i)), idx: i as u32 };
                if heap.len() < k {
                    heap.push(c);
                } else if c < *heap.peek().unwrap() {
                    heap.pop();
                    heap.push(c);
                }
            }
            mean_of(idx.targets(), &heap.into_sorted_vec())
        };
        let t0 = std::time::Instant::now();
        let a: Vec<Triad> = queries.iter().map(|q| scan(q)).collect();
        let linear = t0.elapsed();
        let t0 = std::time::Instant::now();
        let b: Vec<Triad> = queries.iter().map(|q| idx.predict(q, k).unwrap()).collect();
        let tree = t0.elapsed();
        assert_eq!(a, b);
        let speedup = linear.as_secs_f64() / tree.as_secs_f64();
        assert!(speedup >= 5.0, "speedup {speedup:.1}");
    }

    proptest! {
        #[test]
        fn predictions_within_neighbour_range(seed in 0u64..500, k in 1usize..30) {
            let idx = fit(&random_pairs(120, seed)).unwrap();
            let q = [0.1, -0.2, 0.3];
            let y = idx.predict(&q, k).unwrap();
            let nb = idx.neighbours(&q, k).unwrap();
            for a in 0..3 {
                let lo = nb.iter().map(|n| idx.targets()[n.0][a]).fold(f64::INFINITY, f64::min);
                let hi = nb.iter().map(|n| idx.targets()[n.0][a]).fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(y[a] >= lo - 1e-12 && y[a] <= hi + 1e-12);
            }
            prop_assert_eq!(y, idx.predict_brute_force(&q, k).unwrap());
        }

        #[test]
        fn fit_order_only_matters_at_ties(seed in 0u64..200) {
            let pairs = random_pairs(80, seed);
            let mut rev = pairs.clone();
            rev.reverse();
            let a = fit(&pairs).unwrap();
            let b = fit(&rev).unwrap();
            let q = [0.0, 0.25, -0.5];
            let ya = a.predict(&q, 5).unwrap();
            let yb = b.predict(&q, 5).unwrap();
            for i in 0..3 {
                prop_assert!((ya[i] - yb[i]).abs() < 1e-9);
            }
        }
    }
}
