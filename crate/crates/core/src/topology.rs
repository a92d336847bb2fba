//! Critical points and 0-dimensional super-level-set persistence of PL
//! scalar fields on the grid mesh.
//!
//! All comparisons go through a simulated perturbation: vertex `a` is above
//! vertex `b` when its value is larger, or when the values tie and `a` has
//! the smaller id. This is a strict total order, so flat regions have
//! deterministic upper and lower links.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalType {
    Maximum,
    Minimum,
    /// `multiplicity` is the larger link component count minus one.
    Saddle { multiplicity: usize },
    Regular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersistencePair {
    pub creator: usize,
    pub destroyer: usize,
    pub persistence: f64,
}

/// True when `a` comes before `b` in the descending sweep order.
#[inline]
pub fn is_above(values: &[f64], a: usize, b: usize) -> bool {
    values[a] > values[b] || (values[a] == values[b] && a < b)
}

#[inline]
fn sweep_cmp(values: &[f64], a: usize, b: usize) -> Ordering {
    values[b]
        .partial_cmp(&values[a])
        .unwrap_or(Ordering::Equal)
        .then(a.cmp(&b))
}

/// Vertex ids sorted from highest to lowest in the total order.
pub fn sweep_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_unstable_by(|&a, &b| sweep_cmp(values, a, b));
    order
}

/// Number of maximal runs of `flags` along the link, treated as a cycle
/// (absent slots are false, so boundary links behave as paths).
fn runs(flags: [bool; 6]) -> usize {
    let starts = (0..6).filter(|&k| flags[k] && !flags[(k + 5) % 6]).count();
    if starts == 0 && flags[0] {
        1
    } else {
        starts
    }
}

/// Upper and lower link component counts of `v`.
pub fn link_components(values: &[f64], mesh: &Mesh, v: usize) -> (usize, usize) {
    let slots = mesh.link_slots(v);
    let mut upper = [false; 6];
    let mut lower = [false; 6];
    for k in 0..6 {
        if let Some(u) = slots[k] {
            if is_above(values, u, v) {
                upper[k] = true;
            } else {
                lower[k] = true;
            }
        }
    }
    (runs(upper), runs(lower))
}

pub fn classify(values: &[f64], mesh: &Mesh, v: usize) -> Result<CriticalType> {
    if values.len() != mesh.vertex_count() {
        return Err(Error::InvalidMesh(format!(
            "field has {} values, mesh has {} vertices",
            values.len(),
            mesh.vertex_count()
        )));
    }
    if v >= values.len() {
        return Err(Error::InvalidVertex { vertex: v, count: values.len() });
    }
    let (up, down) = link_components(values, mesh, v);
    Ok(match (up, down) {
        (0, _) => CriticalType::Maximum,
        (_, 0) => CriticalType::Minimum,
        (1, 1) => CriticalType::Regular,
        (u, d) => CriticalType::Saddle { multiplicity: u.max(d) - 1 },
    })
}

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    /// Creator (highest vertex) of the component rooted here.
    creator: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            creator: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        while self.parent[x as usize] != root {
            let next = self.parent[x as usize];
            self.parent[x as usize] = root;
            x = next;
        }
        root
    }

    /// Merges two roots; the merged component keeps `creator`.
    fn union(&mut self, a: u32, b: u32, creator: u32) {
        let (big, small) = if self.size[a as usize] >= self.size[b as usize] { (a, b) } else { (b, a) };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
        self.creator[big as usize] = creator;
    }
}

/// Persistence pairs of all maxima of `values` on `mesh`.
///
/// Vertices are swept from high to low. A vertex with no already-swept
/// neighbor creates a component; a vertex touching several components
/// destroys all but the one with the oldest creator. The surviving global
/// maximum is finally paired with the global minimum.
pub fn sweep_persistence(values: &[f64], mesh: &Mesh) -> Vec<PersistencePair> {
    assert_eq!(values.len(), mesh.vertex_count(), "field does not match mesh");
    let order = sweep_order(values);
    let mut position = vec![0u32; values.len()];
    for (k, &v) in order.iter().enumerate() {
        position[v] = k as u32;
    }
    let mut uf = UnionFind::new(values.len());
    let mut pairs = Vec::new();
    let mut roots: Vec<u32> = Vec::with_capacity(6);

    for &v in &order {
        roots.clear();
        for u in mesh.link_slots(v).into_iter().flatten() {
            if position[u] < position[v] {
                let r = uf.find(u as u32);
                if !roots.contains(&r) {
                    roots.push(r);
                }
            }
        }
        let Some(&eldest) = roots.iter().min_by_key(|&&r| position[uf.creator[r as usize] as usize]) else {
            continue;
        };
        let survivor = uf.creator[eldest as usize];
        let mut merged = eldest;
        for &r in &roots {
            if r == eldest {
                continue;
            }
            let creator = uf.creator[r as usize] as usize;
            pairs.push(PersistencePair {
                creator,
                destroyer: v,
                persistence: values[creator] - values[v],
            });
            uf.union(merged, r, survivor);
            merged = uf.find(merged);
        }
        uf.union(merged, v as u32, survivor);
    }

    let (global_max, global_min) = (order[0], order[order.len() - 1]);
    pairs.push(PersistencePair {
        creator: global_max,
        destroyer: global_min,
        persistence: values[global_max] - values[global_min],
    });
    pairs
}

/// Creators whose persistence exceeds `threshold`, sorted by vertex id.
pub fn high_persistent_maxima(pairs: &[PersistencePair], threshold: f64) -> Vec<usize> {
    let mut out: Vec<usize> = pairs
        .iter()
        .filter(|p| p.persistence > threshold)
        .map(|p| p.creator)
        .collect();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::GeoPoint;

    fn grid(nx: usize, ny: usize) -> Mesh {
        let m = Mesh::with_dims(GeoPoint { lat: 40.7, lon: -74.0 }, nx, ny, 50.0).unwrap();
        assert_eq!((m.nx(), m.ny()), (nx, ny));
        m
    }

    #[test]
    fn strict_local_max() {
        let m = grid(3, 3);
        let mut f = vec![0.1; 9];
        f[4] = 1.0;
        assert_eq!(classify(&f, &m, 4).unwrap(), CriticalType::Maximum);
        assert!(classify(&f, &m, 9).is_err());
    }

    #[test]
    fn constant_field_has_one_max_and_one_min() {
        let m = grid(5, 4);
        let f = vec![0.0; m.vertex_count()];
        let types: Vec<_> = (0..m.vertex_count()).map(|v| classify(&f, &m, v).unwrap()).collect();
        let maxima: Vec<_> = (0..types.len()).filter(|&v| types[v] == CriticalType::Maximum).collect();
        let minima: Vec<_> = (0..types.len()).filter(|&v| types[v] == CriticalType::Minimum).collect();
        assert_eq!(maxima, vec![0]);
        assert_eq!(minima, vec![m.vertex_count() - 1]);
        let pairs = sweep_persistence(&f, &m);
        assert_eq!(pairs, vec![PersistencePair { creator: 0, destroyer: 19, persistence: 0.0 }]);
        assert!(high_persistent_maxima(&pairs, 0.2).is_empty());
    }

    #[test]
    fn ramp_interior_is_regular() {
        // f = x + 2y. Relative to an interior vertex: E=+1, NE=+3, N=+2,
        // W=-1, SW=-3, S=-2, so the upper link {E, NE, N} and the lower link
        // {W, SW, S} are one run each.
        let m = grid(4, 4);
        let f: Vec<f64> = (0..16).map(|v| (v % 4) as f64 + 2.0 * (v / 4) as f64).collect();
        assert_eq!(link_components(&f, &m, 5), (1, 1));
        assert_eq!(classify(&f, &m, 5).unwrap(), CriticalType::Regular);
        assert_eq!(classify(&f, &m, 15).unwrap(), CriticalType::Maximum);
        assert_eq!(classify(&f, &m, 0).unwrap(), CriticalType::Minimum);
        let pairs = sweep_persistence(&f, &m);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].persistence, 9.0);
    }

    #[test]
    fn saddle_classification() {
        // Interior vertex with alternating high/low neighbors (E, N, SW high).
        let m = grid(3, 3);
        let mut f = vec![0.5; 9];
        f[4] = 0.5;
        f[5] = 0.9; // E
        f[7] = 0.9; // N
        f[0] = 0.9; // SW
        f[8] = 0.1; // NE
        f[3] = 0.1; // W
        f[1] = 0.1; // S
        assert_eq!(classify(&f, &m, 4).unwrap(), CriticalType::Saddle { multiplicity: 2 });
    }

    #[test]
    fn single_bump() {
        let m = grid(7, 7);
        let f: Vec<f64> = (0..49)
            .map(|v| {
                let (i, j) = ((v % 7) as f64 - 3.0, (v / 7) as f64 - 3.0);
                (-(i * i + j * j) / 4.0).exp()
            })
            .collect();
        let max = f.iter().copied().fold(0.0, f64::max);
        let min = f.iter().copied().fold(1.0, f64::min);
        let f: Vec<f64> = f.iter().map(|x| (x - min) / (max - min)).collect();
        let pairs = sweep_persistence(&f, &m);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].creator, 24);
        assert_eq!(pairs[0].persistence, 1.0);
    }

    #[test]
    fn two_bumps_on_a_ridge() {
        // 1-D profile along a 7x1-wide strip: peaks 1.0 and 0.6, ridge low 0.2,
        // floor 0 at the far ends; second row mirrors the first.
        let m = grid(7, 2);
        let row = [0.0, 1.0, 0.5, 0.2, 0.4, 0.6, 0.0];
        let f: Vec<f64> = (0..14).map(|v| row[v % 7]).collect();
        let mut pairs = sweep_persistence(&f, &m);
        pairs.sort_by_key(|p| p.creator);
        let expected = vec![
            PersistencePair { creator: 1, destroyer: 13, persistence: 1.0 },
            PersistencePair { creator: 5, destroyer: 3, persistence: 0.6 - 0.2 },
        ];
        assert_eq!(pairs, expected);
        assert_eq!(high_persistent_maxima(&pairs, 0.2), vec![1, 5]);
        assert_eq!(high_persistent_maxima(&pairs, 0.5), vec![1]);
    }

    #[test]
    fn threshold_comparisons() {
        let pairs: Vec<_> = [1.0, 0.4, 0.15]
            .iter()
            .enumerate()
            .map(|(k, &p)| PersistencePair { creator: k, destroyer: 9, persistence: p })
            .collect();
        assert_eq!(high_persistent_maxima(&pairs, 0.2).len(), 2);
        assert_eq!(high_persistent_maxima(&pairs, 0.0).len(), 3);
    }
}
