use super::MpcSet;
use crate::geometry::Scene;

/// Sparse symmetric table of mutually visible MPC pairs and their distances.
///
/// Stored as compressed rows: neighbours of MPC `i` are
/// `entries[offsets[i]..offsets[i + 1]]`, sorted by id.
#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityLut {
    max_link_length: f64,
    offsets: Vec<usize>,
    entries: Vec<(u32, f64)>,
}

impl VisibilityLut {
    pub fn max_link_length(&self) -> f64 {
        self.max_link_length
    }

    pub fn mpc_count(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    /// Number of unordered pairs.
    pub fn pair_count(&self) -> usize {
        self.entries.len() / 2
    }

    pub fn neighbors(&self, id: u32) -> &[(u32, f64)] {
        let i = id as usize;
        &self.entries[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn get(&self, i: u32, j: u32) -> Option<f64> {
        let row = self.neighbors(i);
        row.binary_search_by(|e| e.0.cmp(&j)).ok().map(|k| row[k].1)
    }

    /// All pairs `(i, j, distance)` with `i < j`, ascending.
    pub fn pairs(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        (0..self.mpc_count() as u32).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .filter(move |(j, _)| *j > i)
                .map(move |&(j, d)| (i, j, d))
        })
    }
}

/// Tabulates every pair within `max_link_length` with an unobstructed segment.
pub fn build_lut(scene: &Scene, set: &MpcSet, max_link_length: f64) -> VisibilityLut {
    let n = set.len();
    let mut candidates = Vec::new();
    for i in 0..n {
        let pi = set.mpcs[i].position;
        for j in i + 1..n {
            let pj = set.mpcs[j].position;
            if pi.distance(pj) <= max_link_length {
                candidates.push((i as u32, j as u32));
            }
        }
    }
    let segments: Vec<_> = candidates
        .iter()
        .map(|&(i, j)| (set.mpcs[i as usize].position, set.mpcs[j as usize].position))
        .collect();
    let visible = scene.batch_visibility(&segments);

    let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for (&(i, j), vis) in candidates.iter().zip(visible) {
        if vis {
            let d = set.mpcs[i as usize].position.distance(set.mpcs[j as usize].position);
            rows[i as usize].push((j, d));
            rows[j as usize].push((i, d));
        }
    }
    let mut offsets = Vec::with_capacity(n + 1);
    let mut entries = Vec::new();
    offsets.push(0);
    for mut row in rows {
        row.sort_by_key(|e| e.0);
        entries.extend(row);
        offsets.push(entries.len());
    }
    VisibilityLut {
        max_link_length,
        offsets,
        entries,
    }
}
