//! Geometric types, waypoint-set validation and the genotype encoding.
//!
//! A route is an ordered [`WaypointSet`]. The search never moves the first
//! waypoint (the vessel's starting position); an [`Individual`] is the flat
//! coordinate vector of waypoints `2..=N`, and [`SearchBounds`] holds one
//! closed interval per coordinate of that vector.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::Dynamics;

/// A destination point in North-East(-Down) coordinates, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
}

impl Waypoint {
    pub fn new_2d(x: f64, y: f64) -> Self {
        Self { x, y, z: None }
    }

    pub fn new_3d(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z: Some(z) }
    }

    /// Builds a waypoint from a 2- or 3-element coordinate slice.
    pub fn from_coords(coords: &[f64]) -> Result<Self> {
        match *coords {
            [x, y] => Ok(Self::new_2d(x, y)),
            [x, y, z] => Ok(Self::new_3d(x, y, z)),
            _ => Err(Error::InvalidWaypoints(format!(
                "a waypoint needs 2 or 3 coordinates, got {}",
                coords.len()
            ))),
        }
    }

    pub fn dim(&self) -> usize {
        if self.z.is_some() {
            3
        } else {
            2
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        match self.z {
            Some(z) => vec![self.x, self.y, z],
            None => vec![self.x, self.y],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_none_or(f64::is_finite)
    }

    /// Shifts every coordinate by the matching component of `offset`.
    pub fn translated(&self, offset: &[f64]) -> Self {
        Self {
            x: self.x + offset[0],
            y: self.y + offset[1],
            z: self.z.map(|z| z + offset.get(2).copied().unwrap_or(0.0)),
        }
    }
}

/// L2 distance between two waypoints of equal dimensionality.
pub fn euclidean_distance(a: &Waypoint, b: &Waypoint) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let dz = match (a.z, b.z) {
        (Some(az), Some(bz)) => az - bz,
        _ => 0.0,
    };
    Ok(((a.x - b.x).powi(2) + (a.y - b.y).powi(2) + dz * dz).sqrt())
}

/// Ordered route of at least two waypoints sharing one dimensionality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Waypoint>", into = "Vec<Waypoint>")]
pub struct WaypointSet {
    waypoints: Vec<Waypoint>,
}

impl WaypointSet {
    pub fn new(waypoints: Vec<Waypoint>) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::InvalidWaypoints(format!(
                "a route needs at least 2 waypoints, got {}",
                waypoints.len()
            )));
        }
        let dim = waypoints[0].dim();
        for (i, wp) in waypoints.iter().enumerate() {
            if wp.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: wp.dim(),
                });
            }
            if !wp.is_finite() {
                return Err(Error::InvalidWaypoints(format!(
                    "waypoint {} has a non-finite coordinate",
                    i + 1
                )));
            }
        }
        Ok(Self { waypoints })
    }

    /// Builds a set from rows of 2 or 3 coordinates.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let wps = rows
            .iter()
            .map(|r| Waypoint::from_coords(r))
            .collect::<Result<Vec<_>>>()?;
        Self::new(wps)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.waypoints.iter().map(Waypoint::coords).collect()
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.waypoints[0].dim()
    }

    pub fn waypoints(&self) -> &[Waypoint] {
        &self.waypoints
    }

    pub fn first(&self) -> &Waypoint {
        &self.waypoints[0]
    }

    /// Lengths of the `N - 1` legs.
    pub fn leg_lengths(&self) -> Vec<f64> {
        self.waypoints
            .windows(2)
            .map(|w| euclidean_distance(&w[0], &w[1]).expect("uniform dimensionality"))
            .collect()
    }

    /// Number of searched variables, `(N - 1) * dim`.
    pub fn genotype_len(&self) -> usize {
        (self.len() - 1) * self.dim()
    }

    /// Flattens waypoints `2..=N` into a genotype.
    pub fn flatten(&self) -> Individual {
        Individual::new(
            self.waypoints[1..]
                .iter()
                .flat_map(Waypoint::coords)
                .collect(),
        )
    }

    pub fn translated(&self, offset: &[f64]) -> Self {
        Self {
            waypoints: self
                .waypoints
                .iter()
                .map(|w| w.translated(offset))
                .collect(),
        }
    }

    /// Writes the set as CSV with header `idx,x,y[,z]` (1-based indices).
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        if self.dim() == 3 {
            w.write_record(["idx", "x", "y", "z"])?;
        } else {
            w.write_record(["idx", "x", "y"])?;
        }
        for (i, wp) in self.waypoints.iter().enumerate() {
            let mut row = vec![(i + 1).to_string()];
            row.extend(wp.coords().iter().map(|c| c.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let coords = rec
                .iter()
                .skip(1)
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::InvalidWaypoints(format!("bad coordinate {s:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(coords);
        }
        Self::from_rows(&rows)
    }
}

impl TryFrom<Vec<Waypoint>> for WaypointSet {
    type Error = Error;

    fn try_from(value: Vec<Waypoint>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<WaypointSet> for Vec<Waypoint> {
    fn from(value: WaypointSet) -> Self {
        value.waypoints
    }
}

/// True iff every consecutive pair is at least `min_wp_dist` apart.
pub fn validate_waypoint_set(ws: &WaypointSet, min_wp_dist: f64) -> bool {
    ws.waypoints()
        .windows(2)
        .all(|w| euclidean_distance(&w[0], &w[1]).is_ok_and(|d| d >= min_wp_dist))
}

/// A candidate solution: flattened coordinates of waypoints `2..=N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Individual {
    values: Vec<f64>,
}

impl Individual {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Rebuilds a full route from an individual, reusing the original first waypoint.
pub fn decode(ind: &Individual, original: &WaypointSet) -> Result<WaypointSet> {
    let expected = original.genotype_len();
    if ind.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            got: ind.len(),
        });
    }
    let mut wps = Vec::with_capacity(original.len());
    wps.push(*original.first());
    for chunk in ind.values().chunks(original.dim()) {
        wps.push(Waypoint::from_coords(chunk)?);
    }
    WaypointSet::new(wps)
}

/// Per-coordinate closed intervals `[orig - delta, orig + delta]` for waypoints `2..=N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
    delta: f64,
    dim: usize,
}

impl SearchBounds {
    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Coordinates per waypoint.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    /// Number of searched waypoints (`N - 1`).
    pub fn waypoint_count(&self) -> usize {
        self.lower.len() / self.dim
    }

    pub fn interval(&self, i: usize) -> (f64, f64) {
        (self.lower[i], self.upper[i])
    }

    pub fn contains(&self, ind: &Individual) -> bool {
        ind.len() == self.len()
            && ind
                .values()
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    pub fn clip(&self, i: usize, value: f64) -> f64 {
        value.clamp(self.lower[i], self.upper[i])
    }
}

pub fn make_bounds(original: &WaypointSet, delta: f64) -> Result<SearchBounds> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "search half-width must be positive and finite, got {delta}"
        )));
    }
    let centre = original.flatten();
    Ok(SearchBounds {
        lower: centre.values().iter().map(|c| c - delta).collect(),
        upper: centre.values().iter().map(|c| c + delta).collect(),
        delta,
        dim: original.dim(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VesselKind {
    Surface,
    Underwater,
}

impl VesselKind {
    pub fn dim(self) -> usize {
        match self {
            VesselKind::Surface => 2,
            VesselKind::Underwater => 3,
        }
    }
}

/// A vessel profile: constraint, switching and integration settings plus dynamics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VesselConfig {
    pub name: String,
    pub kind: VesselKind,
    /// Minimum distance between consecutive waypoints, meters.
    pub min_wp_dist: f64,
    /// Circle (sphere, underwater) of acceptance around the target waypoint, meters.
    pub acceptance_radius: f64,
    /// Hard cap on samples per leg.
    pub max_leg_samples: usize,
    /// Multiple of the straight-line transit samples of the original leg used
    /// as the per-leg timeout (capped by `max_leg_samples`).
    #[serde(default = "default_leg_timeout_factor")]
    pub leg_timeout_factor: f64,
    /// Integration step, seconds.
    pub dt: f64,
    pub dynamics: Dynamics,
}

fn default_leg_timeout_factor() -> f64 {
    4.0
}

impl VesselConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        positive("min_wp_dist", self.min_wp_dist)?;
        positive("acceptance_radius", self.acceptance_radius)?;
        positive("dt", self.dt)?;
        positive("leg_timeout_factor", self.leg_timeout_factor)?;
        if self.max_leg_samples == 0 {
            return Err(Error::InvalidParameter(
                "max_leg_samples must be positive".into(),
            ));
        }
        match (self.kind, &self.dynamics.pitch) {
            (VesselKind::Surface, None) | (VesselKind::Underwater, Some(_)) => {}
            (VesselKind::Surface, Some(_)) => {
                return Err(Error::InvalidParameter(format!(
                    "surface vessel {} must not define a pitch channel",
                    self.name
                )))
            }
            (VesselKind::Underwater, None) => {
                return Err(Error::InvalidParameter(format!(
                    "underwater vessel {} needs a pitch channel",
                    self.name
                )))
            }
        }
        self.dynamics.validate()
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    /// Per-leg sample caps for a route: `leg_timeout_factor` times the
    /// straight-line transit samples of each original leg, at most `max_leg_samples`.
    pub fn leg_caps(&self, original: &WaypointSet) -> Vec<usize> {
        let step = self.dynamics.speed * self.dt;
        original
            .leg_lengths()
            .iter()
            .map(|len| {
                let transit = (len / step).ceil().max(1.0);
                ((self.leg_timeout_factor * transit).ceil() as usize).clamp(1, self.max_leg_samples)
            })
            .collect()
    }
}
