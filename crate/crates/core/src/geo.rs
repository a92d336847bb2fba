//! City geometry: WGS84 points, the local metric projection, and the
//! triangulated grid mesh that carries every scalar field.
//!
//! Vertex `(i, j)` has id `j * nx + i` and sits at `(i * spacing, j * spacing)`
//! meters from the south-west corner of the city bounding box. Each grid cell
//! is split along its bottom-left to top-right diagonal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean Earth radius used by the equirectangular projection, in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        if !lat.is_finite() || !lon.is_finite() {
            return Err(Error::InvalidCoordinate(format!("non-finite ({lat}, {lon})")));
        }
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(Error::InvalidCoordinate(format!("out of range ({lat}, {lon})")));
        }
        Ok(Self { lat, lon })
    }
}

/// Planar coordinates in meters (east, north).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ProjectedPoint {
    pub x: f64,
    pub y: f64,
}

impl ProjectedPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_sq(&self, other: &ProjectedPoint) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn distance(&self, other: &ProjectedPoint) -> f64 {
        self.distance_sq(other).sqrt()
    }
}

/// Local equirectangular projection about `origin`.
pub fn project(p: GeoPoint, origin: GeoPoint) -> Result<ProjectedPoint> {
    if !p.lat.is_finite() || !p.lon.is_finite() {
        return Err(Error::InvalidCoordinate(format!("non-finite ({}, {})", p.lat, p.lon)));
    }
    let x = EARTH_RADIUS_M * origin.lat.to_radians().cos() * (p.lon - origin.lon).to_radians();
    let y = EARTH_RADIUS_M * (p.lat - origin.lat).to_radians();
    Ok(ProjectedPoint { x, y })
}

/// Inverse of [`project`].
pub fn unproject(q: ProjectedPoint, origin: GeoPoint) -> GeoPoint {
    let lat = origin.lat + (q.y / EARTH_RADIUS_M).to_degrees();
    let lon = origin.lon + (q.x / (EARTH_RADIUS_M * origin.lat.to_radians().cos())).to_degrees();
    GeoPoint { lat, lon }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub south: f64,
    pub west: f64,
    pub north: f64,
    pub east: f64,
}

impl Bounds {
    pub fn from_corners(a: GeoPoint, b: GeoPoint) -> Self {
        Self {
            south: a.lat.min(b.lat),
            west: a.lon.min(b.lon),
            north: a.lat.max(b.lat),
            east: a.lon.max(b.lon),
        }
    }

    pub fn center(&self) -> GeoPoint {
        GeoPoint {
            lat: 0.5 * (self.south + self.north),
            lon: 0.5 * (self.west + self.east),
        }
    }

    pub fn south_west(&self) -> GeoPoint {
        GeoPoint { lat: self.south, lon: self.west }
    }

    fn validate(&self) -> Result<()> {
        GeoPoint::new(self.south, self.west)?;
        GeoPoint::new(self.north, self.east)?;
        if self.north <= self.south || self.east <= self.west {
            return Err(Error::InvalidMesh(format!("degenerate bounds {self:?}")));
        }
        Ok(())
    }
}

/// Uniform triangulated grid over a city bounding box.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    bounds: Bounds,
    /// Projection origin (bounding-box center).
    origin: GeoPoint,
    /// Position of the south-west corner in origin-centered coordinates.
    corner: ProjectedPoint,
    width: f64,
    height: f64,
    spacing: f64,
    nx: usize,
    ny: usize,
}

/// Link slot offsets in counter-clockwise order: E, NE, N, W, SW, S.
/// Consecutive slots (cyclically) always share a triangle with the center.
const LINK_OFFSETS: [(isize, isize); 6] = [(1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1)];

/// The six potential link neighbors of a vertex, in cyclic order. Missing
/// slots are vertices that would fall outside the mesh.
pub type LinkSlots = [Option<usize>; 6];

pub fn build_mesh(bounds: Bounds, spacing: f64) -> Result<Mesh> {
    bounds.validate()?;
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::InvalidMesh(format!("spacing must be positive, got {spacing}")));
    }
    let origin = bounds.center();
    let corner = project(bounds.south_west(), origin)?;
    let width = -2.0 * corner.x;
    let height = -2.0 * corner.y;
    if width < spacing || height < spacing {
        return Err(Error::InvalidMesh(format!(
            "bounds {width:.1} m x {height:.1} m are smaller than spacing {spacing} m"
        )));
    }
    let nx = (width / spacing).floor() as usize + 1;
    let ny = (height / spacing).floor() as usize + 1;
    Ok(Mesh { bounds, origin, corner, width, height, spacing, nx, ny })
}

impl Mesh {
    /// Mesh with exactly `nx` x `ny` vertices centered on `center`.
    pub fn with_dims(center: GeoPoint, nx: usize, ny: usize, spacing: f64) -> Result<Mesh> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidMesh(format!("need at least 2x2 vertices, got {nx}x{ny}")));
        }
        // Pad by a millimeter so the floor in `build_mesh` lands on nx, ny.
        let w = (nx - 1) as f64 * spacing + 1e-3;
        let h = (ny - 1) as f64 * spacing + 1e-3;
        let sw = unproject(ProjectedPoint::new(-w / 2.0, -h / 2.0), center);
        let ne = unproject(ProjectedPoint::new(w / 2.0, h / 2.0), center);
        build_mesh(Bounds::from_corners(sw, ne), spacing)
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn origin(&self) -> GeoPoint {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Extent of the bounding box in meters (east-west, north-south).
    pub fn extent(&self) -> (f64, f64) {
        (self.width, self.height)
    }

    pub fn vertex_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn triangle_count(&self) -> usize {
        2 * (self.nx - 1) * (self.ny - 1)
    }

    pub fn edge_count(&self) -> usize {
        (self.nx - 1) * self.ny + self.nx * (self.ny - 1) + (self.nx - 1) * (self.ny - 1)
    }

    #[inline]
    pub fn vertex_id(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn grid_coords(&self, v: usize) -> (usize, usize) {
        (v % self.nx, v / self.nx)
    }

    /// Vertex position in mesh-local meters.
    #[inline]
    pub fn position(&self, v: usize) -> ProjectedPoint {
        let (i, j) = self.grid_coords(v);
        ProjectedPoint::new(i as f64 * self.spacing, j as f64 * self.spacing)
    }

    /// Geographic position of a mesh-local point.
    pub fn to_geo(&self, q: ProjectedPoint) -> GeoPoint {
        unproject(
            ProjectedPoint::new(q.x + self.corner.x, q.y + self.corner.y),
            self.origin,
        )
    }

    /// Mesh-local coordinates of a geographic point.
    pub fn to_local(&self, p: GeoPoint) -> Result<ProjectedPoint> {
        let q = project(p, self.origin)?;
        Ok(ProjectedPoint::new(q.x - self.corner.x, q.y - self.corner.y))
    }

    /// True when `q` lies inside the bounding box grown by `margin` meters.
    pub fn contains_with_margin(&self, q: ProjectedPoint, margin: f64) -> bool {
        q.x >= -margin && q.x <= self.width + margin && q.y >= -margin && q.y <= self.height + margin
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.vertex_count() {
            return Err(Error::InvalidVertex { vertex: v, count: self.vertex_count() });
        }
        Ok(())
    }

    /// Link neighbors in cyclic slot order; `v` must be valid.
    #[inline]
    pub fn link_slots(&self, v: usize) -> LinkSlots {
        let (i, j) = self.grid_coords(v);
        let mut slots = [None; 6];
        for (slot, &(di, dj)) in slots.iter_mut().zip(LINK_OFFSETS.iter()) {
            let ni = i as isize + di;
            let nj = j as isize + dj;
            if ni >= 0 && nj >= 0 && (ni as usize) < self.nx && (nj as usize) < self.ny {
                *slot = Some(nj as usize * self.nx + ni as usize);
            }
        }
        slots
    }

    /// Ordered link of `v`: a counter-clockwise cycle for interior vertices,
    /// a path (starting after the boundary gap) for boundary vertices.
    pub fn vertex_link(&self, v: usize) -> Result<Vec<usize>> {
        self.check_vertex(v)?;
        let slots = self.link_slots(v);
        let start = (0..6)
            .find(|&k| slots[k].is_some() && slots[(k + 5) % 6].is_none())
            .unwrap_or(0);
        Ok((0..6).filter_map(|k| slots[(start + k) % 6]).collect())
    }

    pub fn degree(&self, v: usize) -> usize {
        self.link_slots(v).iter().flatten().count()
    }

    /// Smallest mesh-local axis-aligned box containing all vertices.
    pub fn covered_extent(&self) -> (f64, f64) {
        (
            (self.nx - 1) as f64 * self.spacing,
            (self.ny - 1) as f64 * self.spacing,
        )
    }
}
