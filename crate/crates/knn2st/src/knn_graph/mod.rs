//! Directed k-nearest-neighbor graphs on point sets in R^d.
//!
//! The graph has an edge x→y when y is among the k points closest to x in
//! Euclidean distance. Two builders are provided: [`build_knn_graph_brute`]
//! (exhaustive O(L²) reference) and [`build_knn_graph_indexed`] (kd-tree,
//! expected O(L log L · k)). Both order candidates by `(squared distance,
//! vertex index)`, so their outputs are identical edge for edge — the brute
//! builder doubles as the exactness oracle for the indexed one.
//!
//! When k ≥ L the out-degree clamps to L−1 instead of erroring; small
//! Monte-Carlo replicates stay valid that way.

mod kd_tree;

use crate::error::{Error, Result};
use rayon::prelude::*;

/// An ordered set of points in R^d with stable indices.
///
/// Coordinates are stored row-major; index identity is meaningful to every
/// consumer (labels, graphs, resampling), so points are never reordered.
#[derive(Clone, Debug)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    /// Build a cloud from row-major coordinates (`coords.len()` must be a
    /// multiple of `dim`, all entries finite).
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Validation("dimension must be positive".into()));
        }
        if coords.len() % dim != 0 {
            return Err(Error::Validation(format!(
                "coordinate buffer of length {} is not a multiple of dim {dim}",
                coords.len()
            )));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::Validation(format!(
                "non-finite coordinate {bad} in point cloud"
            )));
        }
        Ok(Self { dim, coords })
    }

    /// Build a cloud from one row per point.
    pub fn from_rows(dim: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let mut coords = Vec::with_capacity(dim * rows.len());
        for row in rows {
            if row.len() != dim {
                return Err(Error::Validation(format!(
                    "point of dimension {} in cloud of dimension {dim}",
                    row.len()
                )));
            }
            coords.extend_from_slice(row);
        }
        Self::new(dim, coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }
}

/// Squared Euclidean distance.
///
/// Both builders route every comparison through this one function so the
/// floating-point summation order is identical and their outputs can be
/// compared bit for bit.
#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

/// Candidate ordering: squared distance first, smaller vertex index breaks
/// ties. Ties have measure zero for continuous samples; the deterministic rule
/// is what makes the two builders bit-comparable.
#[inline]
pub(crate) fn cmp_candidate(a: &(f64, u32), b: &(f64, u32)) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Directed k-NN graph: per-vertex out-neighbors ordered by increasing
/// distance, plus the transposed (in-neighbor) index in CSR form.
#[derive(Clone, Debug)]
pub struct DirectedKnnGraph {
    k: usize,
    out_degree: usize,
    len: usize,
    out: Vec<u32>,
    in_offsets: Vec<u32>,
    in_list: Vec<u32>,
}

impl DirectedKnnGraph {
    fn from_out_lists(k: usize, out_degree: usize, len: usize, out: Vec<u32>) -> Self {
        debug_assert_eq!(out.len(), out_degree * len);
        // Counting sort over heads; scanning sources in index order leaves each
        // in-neighbor list sorted ascending.
        let mut counts = vec![0u32; len + 1];
        for &head in &out {
            counts[head as usize + 1] += 1;
        }
        for i in 0..len {
            counts[i + 1] += counts[i];
        }
        let in_offsets = counts.clone();
        let mut cursor = counts;
        let mut in_list = vec![0u32; out.len()];
        for v in 0..len {
            for &head in &out[v * out_degree..(v + 1) * out_degree] {
                in_list[cursor[head as usize] as usize] = v as u32;
                cursor[head as usize] += 1;
            }
        }
        Self {
            k,
            out_degree,
            len,
            out,
            in_offsets,
            in_list,
        }
    }

    /// The neighbor count the graph was requested with.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Actual per-vertex out-degree, `min(k, L-1)`.
    pub fn out_degree(&self) -> usize {
        self.out_degree
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Total number of directed edges, `L * min(k, L-1)`.
    pub fn edge_count(&self) -> usize {
        self.out.len()
    }

    /// Out-neighbors of `v`, ordered by increasing distance.
    #[inline]
    pub fn out_neighbors(&self, v: usize) -> &[u32] {
        &self.out[v * self.out_degree..(v + 1) * self.out_degree]
    }

    /// In-neighbors of `v` (vertices that list `v`), ascending by index.
    #[inline]
    pub fn in_neighbors(&self, v: usize) -> &[u32] {
        let lo = self.in_offsets[v] as usize;
        let hi = self.in_offsets[v + 1] as usize;
        &self.in_list[lo..hi]
    }

    pub fn in_degree(&self, v: usize) -> usize {
        (self.in_offsets[v + 1] - self.in_offsets[v]) as usize
    }

    /// All directed edges `(tail, head)` in deterministic order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.len).flat_map(move |v| {
            self.out_neighbors(v)
                .iter()
                .map(move |&head| (v as u32, head))
        })
    }

    /// True when both `(u,v)` and `(v,u)` are edges.
    pub fn is_mutual(&self, u: u32, v: u32) -> bool {
        self.has_edge(u, v) && self.has_edge(v, u)
    }

    /// Edge membership test (linear in the out-degree).
    pub fn has_edge(&self, tail: u32, head: u32) -> bool {
        self.out_neighbors(tail as usize).contains(&head)
    }
}

/// Largest in-degree over all vertices; bounded by `C_d · k` with `C_d` the
/// cone-covering constant of the dimension.
pub fn max_in_degree(graph: &DirectedKnnGraph) -> usize {
    (0..graph.len())
        .map(|v| graph.in_degree(v))
        .max()
        .unwrap_or(0)
}

/// Upper bound on the number of cones of half-angle π/6 needed to cover R^d.
///
/// Any two points in such a cone at distances r1 ≤ r2 from the apex are within
/// r2 of each other, which caps the k-NN in-degree at `C_d · k`. Exact minimal
/// counts are used for d ≤ 2; for d ≥ 3 this falls back to the volumetric
/// spherical-cap covering bound (1 + 1/sin(π/12))^d, valid though far from
/// minimal.
pub fn cone_cover_bound(dim: usize) -> u64 {
    match dim {
        0 => 1,
        1 => 2,
        2 => 6,
        d => {
            let per_dim = 1.0 + 1.0 / (std::f64::consts::PI / 12.0).sin();
            let bound = per_dim.powi(d as i32).ceil();
            if bound >= u64::MAX as f64 {
                u64::MAX
            } else {
                bound as u64
            }
        }
    }
}

fn validate_build(cloud: &PointCloud, k: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::Validation("neighbor count k must be >= 1".into()));
    }
    if cloud.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "k-NN graph needs at least 2 points, got {}",
            cloud.len()
        )));
    }
    Ok(k.min(cloud.len() - 1))
}

/// Exhaustive k-NN graph builder; the reference implementation.
pub fn build_knn_graph_brute(cloud: &PointCloud, k: usize) -> Result<DirectedKnnGraph> {
    let out_degree = validate_build(cloud, k)?;
    let len = cloud.len();
    let mut out = vec![0u32; len * out_degree];

    out.par_chunks_mut(out_degree)
        .enumerate()
        .for_each(|(v, row)| {
            let vp = cloud.point(v);
            let mut cands: Vec<(f64, u32)> = (0..len)
                .filter(|&u| u != v)
                .map(|u| (sq_dist(vp, cloud.point(u)), u as u32))
                .collect();
            cands.select_nth_unstable_by(out_degree - 1, cmp_candidate);
            cands.truncate(out_degree);
            cands.sort_unstable_by(cmp_candidate);
            for (slot, (_, u)) in row.iter_mut().zip(cands) {
                *slot = u;
            }
        });

    Ok(DirectedKnnGraph::from_out_lists(k, out_degree, len, out))
}

/// kd-tree accelerated k-NN graph builder.
///
/// Adjacency is identical to [`build_knn_graph_brute`] on every input: same
/// distance function, same `(distance, index)` ordering, and the tree descends
/// into any box that could still contain a tying smaller-index candidate.
pub fn build_knn_graph_indexed(cloud: &PointCloud, k: usize) -> Result<DirectedKnnGraph> {
    let out_degree = validate_build(cloud, k)?;
    let len = cloud.len();
    let tree = kd_tree::KdTree::build(cloud);
    let mut out = vec![0u32; len * out_degree];

    out.par_chunks_mut(out_degree)
        .enumerate()
        .for_each_init(kd_tree::QueryScratch::new, |scratch, (v, row)| {
            tree.knn_into(cloud, v as u32, out_degree, scratch, row);
        });

    Ok(DirectedKnnGraph::from_out_lists(k, out_degree, len, out))
}

#[cfg(test)]
mod tests;
