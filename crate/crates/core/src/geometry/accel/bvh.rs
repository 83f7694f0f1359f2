use super::{pad_for, Accelerator, Ray};
use crate::geometry::{Aabb, Triangle};

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy)]
enum NodeKind {
    Leaf { start: u32, count: u32 },
    Inner { left: u32, right: u32 },
}

#[derive(Debug, Clone, Copy)]
struct Node {
    bounds: Aabb,
    kind: NodeKind,
}

/// Binary bounding-volume hierarchy, split at the centroid median of the longest axis.
#[derive(Debug)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<u32>,
}

impl Bvh {
    pub fn build(tris: &[Triangle]) -> Self {
        let mut bvh = Bvh {
            nodes: Vec::with_capacity(2 * tris.len() / LEAF_SIZE + 1),
            order: (0..tris.len() as u32).collect(),
        };
        if tris.is_empty() {
            return bvh;
        }
        let bounds: Vec<Aabb> = tris.iter().map(|t| t.bounds()).collect();
        let centroids: Vec<_> = tris.iter().map(|t| t.centroid()).collect();
        let mut order = std::mem::take(&mut bvh.order);
        bvh.build_node(&mut order, 0, &bounds, &centroids);
        bvh.order = order;
        bvh
    }

    fn build_node(
        &mut self,
        order: &mut [u32],
        offset: usize,
        bounds: &[Aabb],
        centroids: &[crate::geometry::Vec3],
    ) -> u32 {
        let mut node_bounds = Aabb::empty();
        let mut centroid_bounds = Aabb::empty();
        for &i in order.iter() {
            node_bounds = node_bounds.union(&bounds[i as usize]);
            centroid_bounds.grow(centroids[i as usize]);
        }
        let node_bounds = node_bounds.padded(pad_for(node_bounds.extent()));
        let index = self.nodes.len() as u32;
        self.nodes.push(Node {
            bounds: node_bounds,
            kind: NodeKind::Leaf {
                start: offset as u32,
                count: order.len() as u32,
            },
        });
        if order.len() <= LEAF_SIZE {
            return index;
        }
        let axis = centroid_bounds.longest_axis();
        let mid = order.len() / 2;
        // Index tie-break keeps the build independent of sort stability.
        order.select_nth_unstable_by(mid, |&a, &b| {
            centroids[a as usize][axis]
                .total_cmp(&centroids[b as usize][axis])
                .then(a.cmp(&b))
        });
        let (lo, hi) = order.split_at_mut(mid);
        let left = self.build_node(lo, offset, bounds, centroids);
        let right = self.build_node(hi, offset + mid, bounds, centroids);
        self.nodes[index as usize].kind = NodeKind::Inner { left, right };
        index
    }
}

impl Accelerator for Bvh {
    fn name(&self) -> &'static str {
        "bvh"
    }

    fn traverse(&self, ray: &Ray, t_max: f64, visit: &mut dyn FnMut(usize) -> f64) {
        if self.nodes.is_empty() {
            return;
        }
        let mut limit = t_max;
        let mut stack: Vec<(u32, f64)> = Vec::with_capacity(64);
        if let Some(t) = self.nodes[0].bounds.ray_entry(ray.origin, ray.inv_dir, 0.0, limit) {
            stack.push((0, t));
        }
        while let Some((idx, entry)) = stack.pop() {
            if entry > limit {
                continue;
            }
            let node = &self.nodes[idx as usize];
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for &tri in &self.order[start as usize..(start + count) as usize] {
                        limit = limit.min(visit(tri as usize));
                    }
                }
                NodeKind::Inner { left, right } => {
                    let l = self.nodes[left as usize]
                        .bounds
                        .ray_entry(ray.origin, ray.inv_dir, 0.0, limit);
                    let r = self.nodes[right as usize]
                        .bounds
                        .ray_entry(ray.origin, ray.inv_dir, 0.0, limit);
                    // Push the farther child first so the nearer one is popped next.
                    match (l, r) {
                        (Some(tl), Some(tr)) if tl <= tr => {
                            stack.push((right, tr));
                            stack.push((left, tl));
                        }
                        (Some(tl), Some(tr)) => {
                            stack.push((left, tl));
                            stack.push((right, tr));
                        }
                        (Some(tl), None) => stack.push((left, tl)),
                        (None, Some(tr)) => stack.push((right, tr)),
                        (None, None) => {}
                    }
                }
            }
        }
    }
}
