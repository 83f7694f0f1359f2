//! Scene document: solids as vertex/index arrays, convenience boxes, open
//! walls and triangles, plus the active and traversable areas.

use serde::{Deserialize, Serialize};

use super::error::{from_json, ConfigError};
use crate::geometry::{quad_surfaces, Aabb, GeometryError, Scene, SceneBuilder, Surface, Vec3};

pub const SCENE_FILE: &str = "scene";

fn default_material() -> String {
    "default".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSolid {
    pub vertices: Vec<Vec3>,
    /// Counter-clockwise (seen from outside) vertex triples.
    pub indices: Vec<[usize; 3]>,
    #[serde(default = "default_material")]
    pub material: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSolid {
    pub min: Vec3,
    pub max: Vec3,
    #[serde(default = "default_material")]
    pub material: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Wall {
    /// Four coplanar corners, counter-clockwise seen from the reflecting side.
    pub corners: [Vec3; 4],
    #[serde(default = "default_material")]
    pub material: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeTriangle {
    pub vertices: [Vec3; 3],
    #[serde(default = "default_material")]
    pub material: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDocument {
    pub active_area: Aabb,
    pub traversable_area: Aabb,
    #[serde(default)]
    pub solids: Vec<MeshSolid>,
    #[serde(default)]
    pub boxes: Vec<BoxSolid>,
    #[serde(default)]
    pub walls: Vec<Wall>,
    #[serde(default)]
    pub triangles: Vec<FreeTriangle>,
}

impl SceneDocument {
    /// Builds the scene: mesh solids first, then boxes, walls and triangles.
    pub fn build(&self, accelerator: &str) -> Result<Scene, GeometryError> {
        let mut b = SceneBuilder::new();
        for s in &self.solids {
            let surfaces = s
                .indices
                .iter()
                .map(|t| {
                    Surface::new(
                        [s.vertices[t[0]], s.vertices[t[1]], s.vertices[t[2]]],
                        None,
                        s.material.clone(),
                    )
                })
                .collect();
            b.add_solid(surfaces);
        }
        for bx in &self.boxes {
            b.add_box(bx.min, bx.max, &bx.material);
        }
        for w in &self.walls {
            for s in quad_surfaces(w.corners, None, &w.material) {
                b.add_surface(s);
            }
        }
        for t in &self.triangles {
            b.add_surface(Surface::new(t.vertices, None, t.material.clone()));
        }
        b.build_with(self.active_area, self.traversable_area, accelerator)
    }
}

pub fn parse_scene_file(text: &str) -> Result<SceneDocument, ConfigError> {
    let doc: SceneDocument = from_json(text, SCENE_FILE)?;
    for (name, area) in [
        ("active_area", &doc.active_area),
        ("traversable_area", &doc.traversable_area),
    ] {
        if !area.is_valid() {
            return Err(ConfigError::new(SCENE_FILE, name, "min must be <= max and finite"));
        }
    }
    if !doc.active_area.contains_box(&doc.traversable_area) {
        return Err(ConfigError::new(
            SCENE_FILE,
            "traversable_area",
            "must lie within active_area",
        ));
    }
    for (i, s) in doc.solids.iter().enumerate() {
        for (j, tri) in s.indices.iter().enumerate() {
            if let Some(k) = tri.iter().position(|&v| v >= s.vertices.len()) {
                return Err(ConfigError::new(
                    SCENE_FILE,
                    format!("solids[{i}].indices[{j}][{k}]"),
                    format!("vertex index {} out of range ({} vertices)", tri[k], s.vertices.len()),
                ));
            }
        }
    }
    for (i, bx) in doc.boxes.iter().enumerate() {
        if !Aabb::new(bx.min, bx.max).is_valid() {
            return Err(ConfigError::new(
                SCENE_FILE,
                format!("boxes[{i}]"),
                "min must be <= max and finite",
            ));
        }
    }
    Ok(doc)
}
