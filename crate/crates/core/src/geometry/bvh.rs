//! Bounding volume hierarchy over the triangles of one mesh, built with a
//! binned surface area heuristic and stored as a flat node array.

use crate::error::{Error, Result};
use crate::math::Vec3;

use super::{intersect_triangle, make_hit, Aabb3, Hit, Ray, TriMesh};

pub const BVH_BINS: usize = 16;
pub const BVH_LEAF_SIZE: usize = 4;

const TRAVERSAL_COST: f64 = 1.0;
const TRIANGLE_COST: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BvhNode {
    pub bounds: Aabb3,
    /// Leaf: index of the first entry in `Bvh::indices`. Interior: index of
    /// the left child; the right child follows it.
    pub first: u32,
    /// Number of triangles, zero for interior nodes.
    pub count: u32,
}

impl BvhNode {
    pub fn is_leaf(&self) -> bool {
        self.count > 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bvh {
    pub nodes: Vec<BvhNode>,
    /// Triangle permutation; leaves own contiguous ranges.
    pub indices: Vec<u32>,
}

/// Work counters of one traversal.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TraversalStats {
    pub nodes_visited: usize,
    pub triangle_tests: usize,
}

#[derive(Clone, Copy)]
struct Bin {
    bounds: Aabb3,
    count: usize,
}

impl Default for Bin {
    fn default() -> Self {
        Bin {
            bounds: Aabb3::EMPTY,
            count: 0,
        }
    }
}

#[derive(Clone, Copy)]
struct SplitPlane {
    axis: usize,
    bin: usize,
    lo: f64,
    scale: f64,
}

struct Builder {
    tri_bounds: Vec<Aabb3>,
    centroids: Vec<Vec3>,
    indices: Vec<u32>,
    nodes: Vec<BvhNode>,
}

impl Builder {
    fn range_bounds(&self, first: usize, count: usize) -> (Aabb3, Aabb3) {
        let mut bounds = Aabb3::EMPTY;
        let mut centroid_bounds = Aabb3::EMPTY;
        for &i in &self.indices[first..first + count] {
            bounds = bounds.union(&self.tri_bounds[i as usize]);
            centroid_bounds = centroid_bounds.grow(self.centroids[i as usize]);
        }
        (bounds, centroid_bounds)
    }

    fn build(&mut self, node: usize, first: usize, count: usize) {
        let (bounds, centroid_bounds) = self.range_bounds(first, count);
        self.nodes[node] = BvhNode {
            bounds,
            first: first as u32,
            count: count as u32,
        };
        if count <= 1 {
            return;
        }
        let split = self.find_split(first, count, &bounds, &centroid_bounds);
        let mid = match split {
            Some(plane) => self.partition(first, count, plane),
            None if count > BVH_LEAF_SIZE => self.median_split(first, count, &centroid_bounds),
            None => return,
        };
        let left_count = mid - first;
        if left_count == 0 || left_count == count {
            if count <= BVH_LEAF_SIZE {
                return;
            }
            // all centroids coincide; split the range in half by position
            self.split_children(node, first, count, first + count / 2);
            return;
        }
        self.split_children(node, first, count, mid);
    }

    fn split_children(&mut self, node: usize, first: usize, count: usize, mid: usize) {
        let left = self.nodes.len();
        self.nodes.push(self.nodes[node]);
        self.nodes.push(self.nodes[node]);
        self.nodes[node].first = left as u32;
        self.nodes[node].count = 0;
        self.build(left, first, mid - first);
        self.build(left + 1, mid, first + count - mid);
    }

    /// Best binned-SAH split plane, or `None` when a leaf is cheaper.
    fn find_split(
        &self,
        first: usize,
        count: usize,
        bounds: &Aabb3,
        centroid_bounds: &Aabb3,
    ) -> Option<SplitPlane> {
        let leaf_cost = TRIANGLE_COST * count as f64;
        let parent_area = bounds.surface_area();
        let mut best: Option<(f64, SplitPlane)> = None;
        for axis in 0..3 {
            let lo = centroid_bounds.min[axis];
            let hi = centroid_bounds.max[axis];
            if hi <= lo {
                continue;
            }
            let scale = BVH_BINS as f64 / (hi - lo);
            let mut bins = [Bin::default(); BVH_BINS];
            for &i in &self.indices[first..first + count] {
                let b = bin_index(self.centroids[i as usize][axis], lo, scale);
                bins[b].count += 1;
                bins[b].bounds = bins[b].bounds.union(&self.tri_bounds[i as usize]);
            }
            let mut left_area = [0.0; BVH_BINS - 1];
            let mut left_count = [0usize; BVH_BINS - 1];
            let mut acc = Bin::default();
            for k in 0..BVH_BINS - 1 {
                acc.count += bins[k].count;
                acc.bounds = acc.bounds.union(&bins[k].bounds);
                left_area[k] = acc.bounds.surface_area();
                left_count[k] = acc.count;
            }
            let mut acc = Bin::default();
            for k in (1..BVH_BINS).rev() {
                acc.count += bins[k].count;
                acc.bounds = acc.bounds.union(&bins[k].bounds);
                let split = k - 1;
                let cost = TRAVERSAL_COST
                    + TRIANGLE_COST
                        * (left_area[split] * left_count[split] as f64
                            + acc.bounds.surface_area() * acc.count as f64)
                        / parent_area.max(f64::MIN_POSITIVE);
                if left_count[split] > 0 && acc.count > 0 && best.is_none_or(|b| cost < b.0) {
                    best = Some((
                        cost,
                        SplitPlane {
                            axis,
                            bin: k,
                            lo,
                            scale,
                        },
                    ));
                }
            }
        }
        match best {
            Some((cost, plane)) if cost < leaf_cost || count > BVH_LEAF_SIZE => Some(plane),
            _ => None,
        }
    }

    /// Moves triangles whose centroid falls in a bin left of the plane to
    /// the front.
    fn partition(&mut self, first: usize, count: usize, plane: SplitPlane) -> usize {
        let mut i = first;
        let mut j = first + count;
        while i < j {
            let c = self.centroids[self.indices[i] as usize][plane.axis];
            if bin_index(c, plane.lo, plane.scale) < plane.bin {
                i += 1;
            } else {
                j -= 1;
                self.indices.swap(i, j);
            }
        }
        i
    }

    fn median_split(&mut self, first: usize, count: usize, centroid_bounds: &Aabb3) -> usize {
        let e = centroid_bounds.max - centroid_bounds.min;
        let axis = if e.x >= e.y && e.x >= e.z {
            0
        } else if e.y >= e.z {
            1
        } else {
            2
        };
        let centroids = &self.centroids;
        self.indices[first..first + count].sort_by(|&a, &b| {
            centroids[a as usize][axis].total_cmp(&centroids[b as usize][axis])
        });
        first + count / 2
    }
}

#[inline]
fn bin_index(c: f64, lo: f64, scale: f64) -> usize {
    (((c - lo) * scale) as usize).min(BVH_BINS - 1)
}

impl Bvh {
    pub fn build(mesh: &TriMesh) -> Result<Bvh> {
        let n = mesh.triangle_count();
        if n == 0 {
            return Err(Error::EmptyMesh);
        }
        let tri_bounds: Vec<Aabb3> = (0..n).map(|i| mesh.triangle_bounds(i)).collect();
        let centroids = tri_bounds.iter().map(Aabb3::center).collect();
        let mut builder = Builder {
            tri_bounds,
            centroids,
            indices: (0..n as u32).collect(),
            nodes: Vec::with_capacity(2 * n),
        };
        builder.nodes.push(BvhNode {
            bounds: Aabb3::EMPTY,
            first: 0,
            count: 0,
        });
        builder.build(0, 0, n);
        Ok(Bvh {
            nodes: builder.nodes,
            indices: builder.indices,
        })
    }

    pub fn root_bounds(&self) -> Aabb3 {
        self.nodes[0].bounds
    }

    pub fn leaves(&self) -> impl Iterator<Item = &BvhNode> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    pub fn intersect(&self, mesh: &TriMesh, ray: &Ray) -> Option<Hit> {
        self.intersect_with_stats(mesh, ray).0
    }

    /// Nearest hit plus traversal counters.
    pub fn intersect_with_stats(&self, mesh: &TriMesh, ray: &Ray) -> (Option<Hit>, TraversalStats) {
        let mut stats = TraversalStats::default();
        let inv = ray.inv_direction();
        let mut ray = *ray;
        let mut best: Option<(f64, usize)> = None;

        stats.nodes_visited += 1;
        if self.nodes[0].bounds.hit_interval(&ray, inv).is_none() {
            return (None, stats);
        }
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        let mut node = &self.nodes[0];
        loop {
            if node.is_leaf() {
                let start = node.first as usize;
                for &tri in &self.indices[start..start + node.count as usize] {
                    stats.triangle_tests += 1;
                    if let Some(t) = intersect_triangle(&ray, &mesh.corners(tri as usize)) {
                        ray.t_max = t;
                        best = Some((t, tri as usize));
                    }
                }
            } else {
                let l = node.first as usize;
                let (a, b) = (&self.nodes[l], &self.nodes[l + 1]);
                stats.nodes_visited += 2;
                let ha = a.bounds.hit_interval(&ray, inv);
                let hb = b.bounds.hit_interval(&ray, inv);
                match (ha, hb) {
                    (Some((ta, _)), Some((tb, _))) => {
                        let (near, far) = if ta <= tb { (l, l + 1) } else { (l + 1, l) };
                        stack.push(far as u32);
                        node = &self.nodes[near];
                        continue;
                    }
                    (Some(_), None) => {
                        node = a;
                        continue;
                    }
                    (None, Some(_)) => {
                        node = b;
                        continue;
                    }
                    (None, None) => {}
                }
            }
            // pop the next node still reachable under the shrunken t_max
            loop {
                let Some(next) = stack.pop() else {
                    return (best.map(|(t, tri)| make_hit(mesh, &ray, t, tri)), stats);
                };
                node = &self.nodes[next as usize];
                if node.bounds.hit_interval(&ray, inv).is_some() {
                    break;
                }
            }
        }
    }

    /// Every crossing along the ray, sorted by `t`.
    pub fn all_hits(&self, mesh: &TriMesh, ray: &Ray) -> Vec<Hit> {
        let inv = ray.inv_direction();
        let mut hits = Vec::new();
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i];
            if node.bounds.hit_interval(ray, inv).is_none() {
                continue;
            }
            if node.is_leaf() {
                let start = node.first as usize;
                for &tri in &self.indices[start..start + node.count as usize] {
                    if let Some(t) = intersect_triangle(ray, &mesh.corners(tri as usize)) {
                        hits.push(make_hit(mesh, ray, t, tri as usize));
                    }
                }
            } else {
                stack.push(node.first as usize);
                stack.push(node.first as usize + 1);
            }
        }
        hits.sort_by(|a, b| a.t.total_cmp(&b.t));
        hits
    }
}

/// Nearest hit of `ray` against `mesh`, or `None` on a miss.
pub fn intersect(bvh: &Bvh, mesh: &TriMesh, ray: &Ray) -> Option<Hit> {
    bvh.intersect(mesh, ray)
}
