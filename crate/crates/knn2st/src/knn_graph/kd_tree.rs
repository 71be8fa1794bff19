//! Bounding-box kd-tree used by the indexed k-NN builder.
//!
//! Exactness contract: a subtree is skipped only when its box is *strictly*
//! farther than the current k-th candidate. At equal distance the builder must
//! still descend, because a tying point with a smaller vertex index outranks
//! the incumbent under the `(distance, index)` order.

use super::{cmp_candidate, sq_dist, PointCloud};
use std::collections::BinaryHeap;

const LEAF_SIZE: usize = 16;

#[derive(Clone, Copy)]
struct Node {
    lo: u32,
    hi: u32,
    left: u32,
    right: u32,
}

impl Node {
    fn is_leaf(&self) -> bool {
        self.left == u32::MAX
    }
}

/// Max-heap entry; the worst current candidate sits on top.
#[derive(Clone, Copy, PartialEq)]
struct Cand(f64, u32);

impl Eq for Cand {}

impl PartialOrd for Cand {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cand {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        cmp_candidate(&(self.0, self.1), &(other.0, other.1))
    }
}

pub(crate) struct QueryScratch {
    heap: BinaryHeap<Cand>,
    sorted: Vec<Cand>,
}

impl QueryScratch {
    pub(crate) fn new() -> Self {
        Self {
            heap: BinaryHeap::new(),
            sorted: Vec::new(),
        }
    }
}

pub(crate) struct KdTree {
    dim: usize,
    nodes: Vec<Node>,
    /// Per-node bounding boxes, `2 * dim` values each: lo coords then hi coords.
    boxes: Vec<f64>,
    idx: Vec<u32>,
}

impl KdTree {
    pub(crate) fn build(cloud: &PointCloud) -> Self {
        let dim = cloud.dim();
        let len = cloud.len();
        let mut tree = Self {
            dim,
            nodes: Vec::with_capacity(2 * len / LEAF_SIZE + 2),
            boxes: Vec::new(),
            idx: (0..len as u32).collect(),
        };
        let mut idx = std::mem::take(&mut tree.idx);
        tree.build_node(cloud, &mut idx, 0, len);
        tree.idx = idx;
        tree
    }

    fn build_node(&mut self, cloud: &PointCloud, idx: &mut [u32], lo: usize, hi: usize) -> u32 {
        let node_id = self.nodes.len() as u32;
        self.nodes.push(Node {
            lo: lo as u32,
            hi: hi as u32,
            left: u32::MAX,
            right: u32::MAX,
        });

        let box_base = self.boxes.len();
        self.boxes
            .extend(std::iter::repeat(f64::INFINITY).take(self.dim));
        self.boxes
            .extend(std::iter::repeat(f64::NEG_INFINITY).take(self.dim));
        for &i in &idx[lo..hi] {
            let p = cloud.point(i as usize);
            for (c, &coord) in p.iter().enumerate() {
                let lo_slot = box_base + c;
                let hi_slot = box_base + self.dim + c;
                if coord < self.boxes[lo_slot] {
                    self.boxes[lo_slot] = coord;
                }
                if coord > self.boxes[hi_slot] {
                    self.boxes[hi_slot] = coord;
                }
            }
        }

        if hi - lo > LEAF_SIZE {
            // Split the widest box side at the median.
            let mut split_dim = 0;
            let mut best_extent = f64::NEG_INFINITY;
            for c in 0..self.dim {
                let extent = self.boxes[box_base + self.dim + c] - self.boxes[box_base + c];
                if extent > best_extent {
                    best_extent = extent;
                    split_dim = c;
                }
            }
            if best_extent > 0.0 {
                let mid = (lo + hi) / 2;
                idx[lo..hi].select_nth_unstable_by(mid - lo, |&a, &b| {
                    cloud.point(a as usize)[split_dim]
                        .total_cmp(&cloud.point(b as usize)[split_dim])
                        .then(a.cmp(&b))
                });
                let left = self.build_node(cloud, idx, lo, mid);
                let right = self.build_node(cloud, idx, mid, hi);
                self.nodes[node_id as usize].left = left;
                self.nodes[node_id as usize].right = right;
            }
            // All points identical: keep an oversized leaf.
        }
        node_id
    }

    #[inline]
    fn box_sq_dist(&self, node: u32, q: &[f64]) -> f64 {
        let base = node as usize * 2 * self.dim;
        let mut acc = 0.0;
        for (c, &x) in q.iter().enumerate() {
            let lo = self.boxes[base + c];
            let hi = self.boxes[base + self.dim + c];
            let d = if x < lo {
                lo - x
            } else if x > hi {
                x - hi
            } else {
                0.0
            };
            acc += d * d;
        }
        acc
    }

    /// Find the `count` nearest neighbors of vertex `query` (excluding itself)
    /// and write them into `row` ordered by `(distance, index)`.
    pub(crate) fn knn_into(
        &self,
        cloud: &PointCloud,
        query: u32,
        count: usize,
        scratch: &mut QueryScratch,
        row: &mut [u32],
    ) {
        debug_assert_eq!(row.len(), count);
        scratch.heap.clear();
        let qp = cloud.point(query as usize);
        self.search(cloud, 0, query, qp, count, &mut scratch.heap);
        debug_assert_eq!(scratch.heap.len(), count);

        scratch.sorted.clear();
        scratch.sorted.extend(scratch.heap.drain());
        scratch.sorted.sort_unstable();
        for (slot, cand) in row.iter_mut().zip(&scratch.sorted) {
            *slot = cand.1;
        }
    }

    fn search(
        &self,
        cloud: &PointCloud,
        node_id: u32,
        query: u32,
        qp: &[f64],
        count: usize,
        heap: &mut BinaryHeap<Cand>,
    ) {
        let node = self.nodes[node_id as usize];
        if node.is_leaf() {
            for &i in &self.idx[node.lo as usize..node.hi as usize] {
                if i == query {
                    continue;
                }
                let cand = Cand(sq_dist(qp, cloud.point(i as usize)), i);
                if heap.len() < count {
                    heap.push(cand);
                } else if cand < *heap.peek().expect("heap is full") {
                    *heap.peek_mut().expect("heap is full") = cand;
                }
            }
            return;
        }

        let (left, right) = (node.left, node.right);
        let dl = self.box_sq_dist(left, qp);
        let dr = self.box_sq_dist(right, qp);
        let (first, d_first, second, d_second) = if dl <= dr {
            (left, dl, right, dr)
        } else {
            (right, dr, left, dl)
        };
        // Strict comparison: a box at exactly the worst distance may still hold
        // a smaller-index tie.
        if heap.len() < count || d_first <= heap.peek().expect("non-empty").0 {
            self.search(cloud, first, query, qp, count, heap);
        }
        if heap.len() < count || d_second <= heap.peek().expect("non-empty").0 {
            self.search(cloud, second, query, qp, count, heap);
        }
    }
}
