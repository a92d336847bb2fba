use std::ops::Range;

use super::{bucket, scenario_member, DataPoint, DensityParams, FieldCollection, Scenario};
use crate::error::{Error, Result};
use crate::geo::{Mesh, ProjectedPoint};

/// Grid index over the mesh vertices with square cells of side `cell`.
///
/// Because the vertices form a regular lattice, each index cell is a
/// contiguous range of columns times a contiguous range of rows, so the
/// index only stores the first column/row of every cell.
#[derive(Debug, Clone)]
pub struct GridIndex {
    cell: f64,
    col_starts: Vec<usize>,
    row_starts: Vec<usize>,
}

fn cell_starts(count: usize, spacing: f64, cell: f64) -> Vec<usize> {
    let mut starts = Vec::new();
    for k in 0..count {
        let c = ((k as f64 * spacing) / cell).floor() as usize;
        while starts.len() <= c {
            starts.push(k);
        }
    }
    starts.push(count);
    starts
}

impl GridIndex {
    pub fn new(mesh: &Mesh, cell: f64) -> Self {
        Self {
            cell,
            col_starts: cell_starts(mesh.nx(), mesh.spacing(), cell),
            row_starts: cell_starts(mesh.ny(), mesh.spacing(), cell),
        }
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    fn span(starts: &[usize], coord: f64, cell: f64) -> Range<usize> {
        let cells = (starts.len() - 1) as i64;
        let c = (coord / cell).floor() as i64;
        let lo = (c - 1).clamp(0, cells);
        let hi = (c + 2).clamp(0, cells);
        starts[lo as usize]..starts[hi as usize]
    }

    /// Column and row ranges of the 3x3 cell block around `p`. Every vertex
    /// within one cell size of `p` lies in this block.
    pub fn candidates(&self, p: ProjectedPoint) -> (Range<usize>, Range<usize>) {
        (
            Self::span(&self.col_starts, p.x, self.cell),
            Self::span(&self.row_starts, p.y, self.cell),
        )
    }
}

/// Density fields of one scenario part, normalized per resolution.
///
/// Points outside `scenario` are skipped. Each remaining point adds
/// `weight * exp(-d^2 / eps^2)` to every vertex within `radius`, in input
/// order, for the one step it falls in at each resolution.
pub fn compute_fields(
    points: &[DataPoint],
    mesh: &Mesh,
    scenario: Scenario,
    params: &DensityParams,
    utc_offset_minutes: i32,
) -> FieldCollection {
    let mut collection = FieldCollection::zeros(scenario, mesh.nx(), mesh.ny());
    let resolutions = scenario.resolutions();
    let index = GridIndex::new(mesh, params.radius());
    let r2 = params.radius() * params.radius();
    let inv_eps2 = 1.0 / (params.epsilon() * params.epsilon());
    let nx = mesh.nx();
    let spacing = mesh.spacing();

    // Field index of each resolution's step 0.
    let offsets: Vec<usize> = resolutions
        .iter()
        .scan(0, |acc, r| {
            let o = *acc;
            *acc += r.step_count();
            Some(o)
        })
        .collect();
    let mut targets = vec![0usize; resolutions.len()];
    let mut used = 0usize;

    for p in points {
        if scenario.family != super::ScenarioFamily::Default
            && scenario_member(p.timestamp, scenario.family, utc_offset_minutes) != Some(scenario)
        {
            continue;
        }
        used += 1;
        for (k, &r) in resolutions.iter().enumerate() {
            targets[k] = offsets[k] + bucket(p.timestamp, r, utc_offset_minutes);
        }
        let (cols, rows) = index.candidates(p.location);
        for j in rows {
            let dy = j as f64 * spacing - p.location.y;
            let dy2 = dy * dy;
            if dy2 > r2 {
                continue;
            }
            for i in cols.clone() {
                let dx = i as f64 * spacing - p.location.x;
                let d2 = dx * dx + dy2;
                if d2 > r2 {
                    continue;
                }
                let contribution = p.weight * (-d2 * inv_eps2).exp();
                let v = j * nx + i;
                for &t in &targets {
                    collection.fields[t].values[v] += contribution;
                }
            }
        }
    }
    if used == 0 {
        log::warn!("{scenario}: no points fall in this scenario part, fields are all zero");
    }
    normalize(collection)
}

/// Records the per-resolution maximum raw value as the normalization divisor.
pub fn normalize(mut collection: FieldCollection) -> FieldCollection {
    for &r in collection.resolutions() {
        let fields = collection.resolution_fields_mut(r);
        let max = fields.iter().map(|f| f.raw_max()).fold(0.0, f64::max);
        for f in fields {
            f.resolution_max = max;
        }
    }
    collection
}

/// Kernel-weighted mean fields `sum / count`, zero where `count` is zero.
/// `count` is the collection computed with unit weights.
pub fn mean_fields(sum: &FieldCollection, count: &FieldCollection) -> Result<FieldCollection> {
    if sum.scenario != count.scenario || sum.nx != count.nx || sum.ny != count.ny {
        return Err(Error::FieldFormat("sum and count collections differ in shape".into()));
    }
    let mut mean = sum.clone();
    for (m, c) in mean.fields.iter_mut().zip(&count.fields) {
        for (value, &n) in m.values.iter_mut().zip(&c.values) {
            *value = if n > 0.0 { *value / n } else { 0.0 };
        }
    }
    Ok(normalize(mean))
}
