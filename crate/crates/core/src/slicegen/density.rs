//! Prescribed traceless densities `N >= 0` on the background mesh.
//!
//! `N` is the background-metric squared norm of the traceless part of the
//! shape operator; after a slice is solved its pointwise value in the slice
//! metric is `W = N e^{-4u}`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::mesh::SurfaceMesh;

/// Width of a Gaussian bump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpRadius {
    /// Multiples of the mesh's mean edge length; shrinks under refinement.
    Hops(f64),
    /// Background distance units; fixed under refinement.
    Length(f64),
}

/// `N(v) = amplitude * exp(-d(v)^2 / (2 r^2))` with `d` the edge-path
/// distance from `center`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec {
    pub center: usize,
    pub amplitude: f64,
    pub radius: BumpRadius,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensitySpec {
    Zero,
    Bump(BumpSpec),
    Bumps { bumps: Vec<BumpSpec> },
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DifferentialDensity {
    field: ScalarField,
}

impl DifferentialDensity {
    pub fn new(field: ScalarField) -> Result<Self> {
        if let Some(v) = field.values().iter().position(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::Domain(format!("density must be finite and >= 0, got {} at vertex {v}", field[v])));
        }
        Ok(Self { field })
    }

    pub fn zero(mesh: &SurfaceMesh) -> Self {
        Self { field: mesh.constant_field(0.0) }
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.field.values().iter().all(|&x| x == 0.0)
    }
}

impl DensitySpec {
    pub fn bump(center: usize, amplitude: f64, radius: BumpRadius) -> Self {
        DensitySpec::Bump(BumpSpec { center, amplitude, radius })
    }

    pub fn is_zero(&self) -> bool {
        match self {
            DensitySpec::Zero => true,
            DensitySpec::Bump(b) => b.amplitude == 0.0,
            DensitySpec::Bumps { bumps } => bumps.iter().all(|b| b.amplitude == 0.0),
            DensitySpec::File { .. } => false,
        }
    }

    /// The same spec with every bump amplitude replaced by `amplitude`.
    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        let set = |b: &BumpSpec| BumpSpec { amplitude, ..*b };
        match self {
            DensitySpec::Bump(b) => DensitySpec::Bump(set(b)),
            DensitySpec::Bumps { bumps } => DensitySpec::Bumps { bumps: bumps.iter().map(set).collect() },
            other => other.clone(),
        }
    }

    pub fn realize(&self, mesh: &SurfaceMesh) -> Result<DifferentialDensity> {
        match self {
            DensitySpec::Zero => Ok(DifferentialDensity::zero(mesh)),
            DensitySpec::Bump(b) => bumps_field(mesh, std::slice::from_ref(b)),
            DensitySpec::Bumps { bumps } => bumps_field(mesh, bumps),
            DensitySpec::File { path } => {
                let text = std::fs::read_to_string(path)?;
                let values: Vec<f64> = serde_json::from_str(&text)?;
                DifferentialDensity::new(mesh.field(values)?)
            }
        }
    }
}

fn bumps_field(mesh: &SurfaceMesh, bumps: &[BumpSpec]) -> Result<DifferentialDensity> {
    let mut values = vec![0.0; mesh.vertex_count()];
    for b in bumps {
        if b.center >= mesh.vertex_count() {
            return Err(Error::Domain(format!(
                "bump centre {} is not a vertex (mesh has {})",
                b.center,
                mesh.vertex_count()
            )));
        }
        if !(b.amplitude >= 0.0 && b.amplitude.is_finite()) {
            return Err(Error::Domain(format!("bump amplitude must be >= 0, got {}", b.amplitude)));
        }
        let r = match b.radius {
            BumpRadius::Hops(h) => h * mesh.mean_edge_length(),
            BumpRadius::Length(r) => r,
        };
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Domain(format!("bump radius must be positive, got {r}")));
        }
        let dist = edge_path_distances(mesh, b.center);
        for (n, d) in values.iter_mut().zip(&dist) {
            *n += b.amplitude * (-0.5 * (d / r).powi(2)).exp();
        }
    }
    DifferentialDensity::new(mesh.field(values)?)
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, ties by vertex
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra over mesh edges weighted by length.
pub fn edge_path_distances(mesh: &SurfaceMesh, source: usize) -> Vec<f64> {
    let adj = mesh.vertex_neighbors();
    let mut dist = vec![f64::INFINITY; mesh.vertex_count()];
    dist[source] = 0.0;
    let mut heap = BinaryHeap::from([Entry(0.0, source)]);
    while let Some(Entry(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, len) in &adj[v] {
            let nd = d + len;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(Entry(nd, w));
            }
        }
    }
    dist
}

impl fmt::Display for BumpSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bump:center={},amp={}", self.center, self.amplitude)?;
        match self.radius {
            BumpRadius::Hops(h) => write!(f, ",hops={h}"),
            BumpRadius::Length(r) => write!(f, ",radius={r}"),
        }
    }
}

impl fmt::Display for DensitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensitySpec::Zero => write!(f, "zero"),
            DensitySpec::Bump(b) => write!(f, "{b}"),
            DensitySpec::Bumps { bumps } => {
                for (i, b) in bumps.iter().enumerate() {
                    if i > 0 {
                        write!(f, "+")?;
                    }
                    write!(f, "{b}")?;
                }
                Ok(())
            }
            DensitySpec::File { path } => write!(f, "file:{}", path.display()),
        }
    }
}

impl FromStr for BumpSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .strip_prefix("bump:")
            .ok_or_else(|| Error::Domain(format!("bump spec must start with 'bump:', got '{s}'")))?;
        let (mut center, mut amplitude, mut radius) = (None, None, None);
        for pair in body.split(',').filter(|p| !p.is_empty()) {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::Domain(format!("expected key=value in '{pair}'")))?;
            let num = || {
                value
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Domain(format!("'{value}' is not a number (in '{pair}')")))
            };
            match key.trim() {
                "center" => {
                    center = Some(value.trim().parse::<usize>().map_err(|_| {
                        Error::Domain(format!("bump centre must be a vertex index, got '{value}'"))
                    })?)
                }
                "amp" | "amplitude" => amplitude = Some(num()?),
                "radius" => radius = Some(BumpRadius::Length(num()?)),
                "hops" => radius = Some(BumpRadius::Hops(num()?)),
                other => return Err(Error::Domain(format!("unknown bump parameter '{other}'"))),
            }
        }
        Ok(BumpSpec {
            center: center.unwrap_or(0),
            amplitude: amplitude.ok_or_else(|| Error::Domain(format!("bump spec '{s}' needs amp=")))?,
            radius: radius.unwrap_or(BumpRadius::Hops(2.0)),
        })
    }
}

impl FromStr for DensitySpec {
    type Err = Error;

    /// `zero`, `file:PATH`, or one or more `bump:center=C,amp=A,radius=R`
    /// (or `hops=H` instead of `radius`) joined with `+`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "zero" {
            return Ok(DensitySpec::Zero);
        }
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(DensitySpec::File { path: PathBuf::from(path) });
        }
        let bumps = s.split('+').map(str::parse).collect::<Result<Vec<BumpSpec>>>()?;
        match bumps.len() {
            1 => Ok(DensitySpec::Bump(bumps[0])),
            _ => Ok(DensitySpec::Bumps { bumps }),
        }
    }
}
