use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::accel::{self, Accelerator, Ray};
use super::{Aabb, Triangle, Vec3};
use crate::registry::UnknownStrategy;
use crate::rng::StreamKey;

/// Self-intersection bias on ray origins and segment ends, meters.
pub const RAY_EPSILON: f64 = 1e-6;
/// Origin nudge applied when a parity ray grazes an edge or vertex, meters.
pub const GRAZE_NUDGE: f64 = 1e-7;
const MIN_TRIANGLE_AREA: f64 = 1e-9;
const MAX_PARITY_ATTEMPTS: u64 = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("surface {index} is degenerate (area {area:e} m²)")]
    DegenerateTriangle { index: usize, area: f64 },
    #[error("surface {index} has a non-finite vertex")]
    NonFiniteVertex { index: usize },
    #[error("solid {solid_id} is not closed: {open_edges} edge(s) not shared by exactly two triangles")]
    NonClosedSolid { solid_id: u32, open_edges: usize },
    #[error("solid {solid_id} references surface {index}, which does not exist")]
    SurfaceOutOfRange { solid_id: u32, index: usize },
    #[error("surface {index} belongs to more than one solid")]
    SharedSurface { index: usize },
    #[error("{name} is not a valid box")]
    InvalidArea { name: &'static str },
    #[error("traversable_area must lie within active_area")]
    TraversableOutsideActive,
    #[error(transparent)]
    UnknownAccelerator(#[from] UnknownStrategy),
}

/// A reflecting triangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    pub vertices: [Vec3; 3],
    /// Unit normal following the counter-clockwise winding of `vertices`.
    pub normal: Vec3,
    pub solid_id: Option<u32>,
    pub material_tag: String,
}

impl Surface {
    pub fn new(vertices: [Vec3; 3], solid_id: Option<u32>, material_tag: impl Into<String>) -> Self {
        let n = (vertices[1] - vertices[0]).cross(vertices[2] - vertices[0]);
        Surface {
            vertices,
            normal: n.normalized(),
            solid_id,
            material_tag: material_tag.into(),
        }
    }

    pub fn triangle(&self) -> Triangle {
        Triangle::new(self.vertices[0], self.vertices[1], self.vertices[2])
    }

    pub fn area(&self) -> f64 {
        self.triangle().area()
    }
}

/// A closed group of surfaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solid {
    pub id: u32,
    pub surfaces: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub distance: f64,
    pub surface_index: usize,
    pub point: Vec3,
}

/// Twelve outward-facing triangles of an axis-aligned box.
pub fn box_surfaces(min: Vec3, max: Vec3, solid_id: u32, material: &str) -> Vec<Surface> {
    let c = |i: usize| {
        Vec3::new(
            if i & 1 == 0 { min.x } else { max.x },
            if i & 2 == 0 { min.y } else { max.y },
            if i & 4 == 0 { min.z } else { max.z },
        )
    };
    // Each face listed counter-clockwise seen from outside.
    const FACES: [[usize; 4]; 6] = [
        [0, 2, 3, 1], // z = min
        [4, 5, 7, 6], // z = max
        [0, 1, 5, 4], // y = min
        [2, 6, 7, 3], // y = max
        [0, 4, 6, 2], // x = min
        [1, 3, 7, 5], // x = max
    ];
    FACES
        .iter()
        .flat_map(|f| quad_surfaces([c(f[0]), c(f[1]), c(f[2]), c(f[3])], Some(solid_id), material))
        .collect()
}

/// Splits a planar quad (counter-clockwise corners) into two triangles.
pub fn quad_surfaces(corners: [Vec3; 4], solid_id: Option<u32>, material: &str) -> [Surface; 2] {
    [
        Surface::new([corners[0], corners[1], corners[2]], solid_id, material),
        Surface::new([corners[0], corners[2], corners[3]], solid_id, material),
    ]
}

/// Immutable scene with a ray-query acceleration structure.
#[derive(Debug)]
pub struct Scene {
    surfaces: Vec<Surface>,
    solids: Vec<Solid>,
    solid_bounds: Vec<Aabb>,
    solid_of: Vec<Option<usize>>,
    active_area: Aabb,
    traversable_area: Aabb,
    tris: Vec<Triangle>,
    accel: Box<dyn Accelerator>,
    hash: u64,
}

impl Scene {
    /// Validates and builds a scene using the default acceleration structure.
    pub fn build(
        surfaces: Vec<Surface>,
        solids: Vec<Solid>,
        active_area: Aabb,
        traversable_area: Aabb,
    ) -> Result<Scene, GeometryError> {
        Self::build_with(
            surfaces,
            solids,
            active_area,
            traversable_area,
            accel::DEFAULT_ACCELERATOR,
        )
    }

    pub fn build_with(
        mut surfaces: Vec<Surface>,
        solids: Vec<Solid>,
        active_area: Aabb,
        traversable_area: Aabb,
        accelerator: &str,
    ) -> Result<Scene, GeometryError> {
        let factory = accel::registry().get(accelerator)?;
        if !active_area.is_valid() {
            return Err(GeometryError::InvalidArea { name: "active_area" });
        }
        if !traversable_area.is_valid() {
            return Err(GeometryError::InvalidArea {
                name: "traversable_area",
            });
        }
        if !active_area.contains_box(&traversable_area) {
            return Err(GeometryError::TraversableOutsideActive);
        }
        for (index, s) in surfaces.iter_mut().enumerate() {
            if !s.vertices.iter().all(|v| v.is_finite()) {
                return Err(GeometryError::NonFiniteVertex { index });
            }
            let area = s.area();
            if !(area > MIN_TRIANGLE_AREA) {
                return Err(GeometryError::DegenerateTriangle { index, area });
            }
            let n = (s.vertices[1] - s.vertices[0]).cross(s.vertices[2] - s.vertices[0]);
            s.normal = n.normalized();
        }

        let mut solid_of = vec![None; surfaces.len()];
        let mut solid_bounds = Vec::with_capacity(solids.len());
        for (si, solid) in solids.iter().enumerate() {
            let mut bounds = Aabb::empty();
            for &index in &solid.surfaces {
                let Some(surface) = surfaces.get_mut(index) else {
                    return Err(GeometryError::SurfaceOutOfRange {
                        solid_id: solid.id,
                        index,
                    });
                };
                if solid_of[index].replace(si).is_some() {
                    return Err(GeometryError::SharedSurface { index });
                }
                surface.solid_id = Some(solid.id);
                for v in surface.vertices {
                    bounds.grow(v);
                }
            }
            let open = open_edge_count(solid.surfaces.iter().map(|&i| &surfaces[i]));
            if open > 0 || solid.surfaces.is_empty() {
                return Err(GeometryError::NonClosedSolid {
                    solid_id: solid.id,
                    open_edges: open,
                });
            }
            solid_bounds.push(bounds.padded(RAY_EPSILON));
        }

        let tris: Vec<Triangle> = surfaces.iter().map(Surface::triangle).collect();
        let accel = factory(&tris);
        let hash = content_hash(&surfaces, &solids, &active_area, &traversable_area);
        Ok(Scene {
            surfaces,
            solids,
            solid_bounds,
            solid_of,
            active_area,
            traversable_area,
            tris,
            accel,
            hash,
        })
    }

    pub fn surfaces(&self) -> &[Surface] {
        &self.surfaces
    }

    pub fn solids(&self) -> &[Solid] {
        &self.solids
    }

    pub fn active_area(&self) -> Aabb {
        self.active_area
    }

    pub fn traversable_area(&self) -> Aabb {
        self.traversable_area
    }

    pub fn triangle(&self, index: usize) -> &Triangle {
        &self.tris[index]
    }

    pub fn accelerator_name(&self) -> &'static str {
        self.accel.name()
    }

    /// 64-bit content hash over geometry, solids and areas.
    pub fn content_hash(&self) -> u64 {
        self.hash
    }

    /// Nearest surface hit at distance in `(RAY_EPSILON, max_distance]`.
    /// Equal distances resolve to the lowest surface index.
    pub fn ray_cast(&self, origin: Vec3, direction: Vec3, max_distance: f64) -> Option<RayHit> {
        let ray = Ray::new(origin, direction);
        let mut best: Option<(f64, usize)> = None;
        self.accel.traverse(&ray, max_distance, &mut |i| {
            if let Some(hit) = self.tris[i].intersect(origin, direction) {
                if hit.t > RAY_EPSILON && hit.t <= max_distance {
                    let better = match best {
                        None => true,
                        Some((bt, bi)) => hit.t < bt || (hit.t == bt && i < bi),
                    };
                    if better {
                        best = Some((hit.t, i));
                    }
                }
            }
            best.map_or(max_distance, |(t, _)| t)
        });
        best.map(|(distance, surface_index)| RayHit {
            distance,
            surface_index,
            point: origin + direction * distance,
        })
    }

    /// True iff nothing blocks the open segment between `p` and `q`.
    ///
    /// The segment is always cast from the lexicographically smaller endpoint,
    /// so the answer is exactly symmetric.
    pub fn segment_visible(&self, p: Vec3, q: Vec3) -> bool {
        let (a, b) = if p.bits() <= q.bits() { (p, q) } else { (q, p) };
        let d = b.distance(a);
        if d <= 2.0 * RAY_EPSILON {
            return true;
        }
        let dir = (b - a) / d;
        self.ray_cast(a, dir, d - RAY_EPSILON).is_none()
    }

    /// Element-wise [`Scene::segment_visible`], evaluated in parallel; order preserved.
    pub fn batch_visibility(&self, pairs: &[(Vec3, Vec3)]) -> Vec<bool> {
        pairs
            .par_iter()
            .with_min_len(64)
            .map(|&(p, q)| self.segment_visible(p, q))
            .collect()
    }

    /// True iff `p` is strictly inside some closed solid. Points within
    /// `RAY_EPSILON` of a solid's boundary count as outside.
    pub fn point_inside_solid(&self, p: Vec3) -> bool {
        self.containing_solid(p).is_some()
    }

    /// Index into [`Scene::solids`] of the solid strictly containing `p`.
    pub fn containing_solid(&self, p: Vec3) -> Option<usize> {
        let candidates: Vec<usize> = (0..self.solids.len())
            .filter(|&s| self.solid_bounds[s].contains(p))
            .collect();
        if candidates.is_empty() {
            return None;
        }
        let parity = self.crossing_parity(p);
        candidates.into_iter().find(|&s| {
            parity[s]
                && self.solids[s]
                    .surfaces
                    .iter()
                    .all(|&i| self.tris[i].distance_to(p) > RAY_EPSILON)
        })
    }

    /// Odd/even crossing count per solid along a fixed oblique ray. When the
    /// ray grazes an edge or vertex the origin is nudged by `GRAZE_NUDGE` in a
    /// pseudorandom direction derived from `p` and the attempt number.
    fn crossing_parity(&self, p: Vec3) -> Vec<bool> {
        let dir = Vec3::new(0.577_215_664_9, 0.618_033_988_7, 0.533_969_148_1).normalized();
        let key = StreamKey::new(0x9A21_7C3D)
            .with(p.x.to_bits())
            .with(p.y.to_bits())
            .with(p.z.to_bits());
        let mut origin = p;
        for attempt in 0..MAX_PARITY_ATTEMPTS {
            let ray = Ray::new(origin, dir);
            let mut hits: Vec<usize> = Vec::new();
            let mut grazed = false;
            self.accel.traverse(&ray, f64::INFINITY, &mut |i| {
                if self.solid_of[i].is_some() {
                    if let Some(hit) = self.tris[i].intersect(origin, dir) {
                        if hit.t > 0.0 {
                            hits.push(i);
                            grazed |= hit.grazes_edge() || hit.t < 1e-12;
                        }
                    }
                }
                f64::INFINITY
            });
            if !grazed || attempt + 1 == MAX_PARITY_ATTEMPTS {
                hits.sort_unstable();
                hits.dedup();
                let mut parity = vec![false; self.solids.len()];
                for i in hits {
                    if let Some(s) = self.solid_of[i] {
                        parity[s] = !parity[s];
                    }
                }
                return parity;
            }
            origin = p + key.with(attempt).unit_vector() * GRAZE_NUDGE;
        }
        unreachable!()
    }
}

fn open_edge_count<'a>(surfaces: impl Iterator<Item = &'a Surface>) -> usize {
    let mut edges: HashMap<([u64; 3], [u64; 3]), u32> = HashMap::new();
    for s in surfaces {
        for k in 0..3 {
            let a = s.vertices[k].bits();
            let b = s.vertices[(k + 1) % 3].bits();
            let key = if a <= b { (a, b) } else { (b, a) };
            *edges.entry(key).or_default() += 1;
        }
    }
    edges.values().filter(|&&c| c != 2).count()
}

fn content_hash(surfaces: &[Surface], solids: &[Solid], active: &Aabb, trav: &Aabb) -> u64 {
    let mut h = Sha256::new();
    h.update(b"lusim-scene-v1");
    h.update((surfaces.len() as u64).to_le_bytes());
    for s in surfaces {
        for v in s.vertices {
            for b in v.bits() {
                h.update(b.to_le_bytes());
            }
        }
        h.update(s.solid_id.map_or(u64::MAX, u64::from).to_le_bytes());
        h.update((s.material_tag.len() as u64).to_le_bytes());
        h.update(s.material_tag.as_bytes());
    }
    h.update((solids.len() as u64).to_le_bytes());
    for solid in solids {
        h.update(solid.id.to_le_bytes());
        h.update((solid.surfaces.len() as u64).to_le_bytes());
        for &i in &solid.surfaces {
            h.update((i as u64).to_le_bytes());
        }
    }
    for area in [active, trav] {
        for v in [area.min, area.max] {
            for b in v.bits() {
                h.update(b.to_le_bytes());
            }
        }
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Incremental constructor for scenes made of boxes and free-standing quads.
#[derive(Debug, Default, Clone)]
pub struct SceneBuilder {
    surfaces: Vec<Surface>,
    solids: Vec<Solid>,
}

impl SceneBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a closed axis-aligned box solid; returns its solid id.
    pub fn add_box(&mut self, min: Vec3, max: Vec3, material: &str) -> u32 {
        let id = self.solids.len() as u32;
        let start = self.surfaces.len();
        self.surfaces.extend(box_surfaces(min, max, id, material));
        self.solids.push(Solid {
            id,
            surfaces: (start..self.surfaces.len()).collect(),
        });
        id
    }

    /// Adds an open two-triangle wall; returns the index of its first surface.
    pub fn add_quad(&mut self, corners: [Vec3; 4], material: &str) -> usize {
        let start = self.surfaces.len();
        self.surfaces.extend(quad_surfaces(corners, None, material));
        start
    }

    pub fn add_surface(&mut self, surface: Surface) -> usize {
        self.surfaces.push(surface);
        self.surfaces.len() - 1
    }

    pub fn add_solid(&mut self, surfaces: Vec<Surface>) -> u32 {
        let id = self.solids.len() as u32;
        let start = self.surfaces.len();
        self.surfaces.extend(surfaces);
        self.solids.push(Solid {
            id,
            surfaces: (start..self.surfaces.len()).collect(),
        });
        id
    }

    pub fn build(self, active: Aabb, traversable: Aabb) -> Result<Scene, GeometryError> {
        Scene::build(self.surfaces, self.solids, active, traversable)
    }

    pub fn build_with(self, active: Aabb, traversable: Aabb, accelerator: &str) -> Result<Scene, GeometryError> {
        Scene::build_with(self.surfaces, self.solids, active, traversable, accelerator)
    }

    pub fn into_parts(self) -> (Vec<Surface>, Vec<Solid>) {
        (self.surfaces, self.solids)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn area() -> Aabb {
        Aabb::new(Vec3::splat(-50.0), Vec3::splat(50.0))
    }

    fn box_scene(accel: &str) -> Scene {
        let mut b = SceneBuilder::new();
        b.add_box(Vec3::ZERO, Vec3::splat(10.0), "concrete");
        b.build_with(area(), area(), accel).unwrap()
    }

    #[test]
    fn empty_scene_sees_everything() {
        let scene = Scene::build(vec![], vec![], Aabb::unit(), Aabb::unit()).unwrap();
        assert!(scene.surfaces().is_empty());
        assert!(scene.segment_visible(Vec3::ZERO, Vec3::splat(1.0)));
        assert!(scene.ray_cast(Vec3::ZERO, Vec3::X, 10.0).is_none());
    }

    #[test]
    fn canonical_box_is_twelve_closed_triangles() {
        let scene = box_scene("bvh");
        assert_eq!(scene.surfaces().len(), 12);
        assert_eq!(scene.solids().len(), 1);
        for s in scene.surfaces() {
            let outward = s.triangle().centroid() - Vec3::splat(5.0);
            assert!(s.normal.dot(outward) > 0.0, "normal points inward");
            assert!((s.normal.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn traversable_must_fit_active() {
        let err = Scene::build(vec![], vec![], Aabb::unit(), area()).unwrap_err();
        assert_eq!(err, GeometryError::TraversableOutsideActive);
    }

    #[test]
    fn open_solid_rejected() {
        let mut surfaces = box_surfaces(Vec3::ZERO, Vec3::splat(1.0), 0, "x");
        surfaces.pop();
        let solid = Solid {
            id: 0,
            surfaces: (0..surfaces.len()).collect(),
        };
        let err = Scene::build(surfaces, vec![solid], area(), area()).unwrap_err();
        assert!(matches!(err, GeometryError::NonClosedSolid { solid_id: 0, .. }));
    }

    #[test]
    fn degenerate_triangle_rejected() {
        let s = Surface::new([Vec3::ZERO, Vec3::X, Vec3::X * 2.0], None, "x");
        let err = Scene::build(vec![s], vec![], area(), area()).unwrap_err();
        assert!(matches!(err, GeometryError::DegenerateTriangle { index: 0, .. }));
    }

    #[test]
    fn wall_hit_and_cutoff() {
        let mut b = SceneBuilder::new();
        b.add_quad(
            [
                Vec3::new(5.0, -10.0, -10.0),
                Vec3::new(5.0, 10.0, -10.0),
                Vec3::new(5.0, 10.0, 10.0),
                Vec3::new(5.0, -10.0, 10.0),
            ],
            "glass",
        );
        let scene = b.build(area(), area()).unwrap();
        let o = Vec3::new(0.0, 0.0, 1.0);
        let hit = scene.ray_cast(o, Vec3::X, 100.0).unwrap();
        assert!((hit.distance - 5.0).abs() < 1e-12);
        assert!((hit.point - Vec3::new(5.0, 0.0, 1.0)).norm() < 1e-6);
        assert!(scene.ray_cast(o, Vec3::X, 4.0).is_none());
        // Parallel to the wall, 1 m in front of it.
        assert!(scene.ray_cast(Vec3::new(4.0, -20.0, 1.0), Vec3::Y, 100.0).is_none());
    }

    #[test]
    fn box_occludes_and_inside_test() {
        for accel in ["brute", "bvh", "grid"] {
            let scene = box_scene(accel);
            let p = Vec3::new(-5.0, 5.0, 5.0);
            let q = Vec3::new(15.0, 5.0, 5.0);
            assert!(!scene.segment_visible(p, q), "{accel}");
            assert!(!scene.segment_visible(q, p), "{accel}");
            assert!(scene.segment_visible(p, Vec3::new(-5.0, 20.0, 5.0)));
            assert!(scene.point_inside_solid(Vec3::splat(5.0)), "{accel}");
            assert!(!scene.point_inside_solid(Vec3::new(11.0, 5.0, 5.0)));
            // On a face: classified as outside, stably.
            let on_face = Vec3::new(10.0, 5.0, 5.0);
            let first = scene.point_inside_solid(on_face);
            assert!(!first);
            assert_eq!(first, scene.point_inside_solid(on_face));
        }
    }

    #[test]
    fn edge_grazing_parity_is_resolved() {
        let scene = box_scene("bvh");
        // Points whose oblique parity ray passes near box edges/corners.
        for p in [Vec3::splat(0.5), Vec3::new(9.9, 9.9, 9.9), Vec3::new(-1.0, -1.0, -1.0)] {
            let expected = p.x > 0.0 && p.x < 10.0 && p.y > 0.0 && p.y < 10.0 && p.z > 0.0 && p.z < 10.0;
            assert_eq!(scene.point_inside_solid(p), expected, "{p:?}");
        }
    }

    #[test]
    fn hash_tracks_content() {
        let a = box_scene("bvh");
        let b = box_scene("grid");
        assert_eq!(a.content_hash(), b.content_hash());
        let mut builder = SceneBuilder::new();
        builder.add_box(Vec3::ZERO, Vec3::splat(11.0), "concrete");
        let c = builder.build(area(), area()).unwrap();
        assert_ne!(a.content_hash(), c.content_hash());
    }
}
