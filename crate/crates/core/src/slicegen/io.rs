use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Background, SliceGeometry};
use crate::error::{Error, Result};

/// Slice JSON: `{"tau", "u", "K", "W", "mesh_ref"}` plus optional solved
/// `"lapse"` and `"sigma"` arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceFile {
    pub tau: f64,
    pub u: Vec<f64>,
    #[serde(rename = "K")]
    pub curvature: Vec<f64>,
    #[serde(rename = "W")]
    pub traceless: Vec<f64>,
    /// Mesh fingerprint (16 hex digits) or a path to the mesh file.
    pub mesh_ref: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lapse: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<f64>>,
}

impl SliceFile {
    pub fn from_slice(slice: &SliceGeometry) -> Self {
        Self {
            tau: slice.tau(),
            u: slice.conformal().values().to_vec(),
            curvature: slice.curvature().values().to_vec(),
            traceless: slice.traceless().values().to_vec(),
            mesh_ref: slice.mesh().id().to_string(),
            lapse: None,
            sigma: None,
        }
    }

    /// Rebuilds the slice on `background`. A fingerprint `mesh_ref` must
    /// match the background mesh; a path reference is taken on trust.
    pub fn into_slice(self, background: Arc<Background>) -> Result<SliceGeometry> {
        let looks_like_id = self.mesh_ref.len() == 16 && self.mesh_ref.chars().all(|c| c.is_ascii_hexdigit());
        let id = background.mesh().id().to_string();
        if looks_like_id && self.mesh_ref != id {
            return Err(Error::Domain(format!(
                "slice was computed on mesh {} but the given mesh is {id}",
                self.mesh_ref
            )));
        }
        SliceGeometry::from_parts(
            background,
            self.tau,
            self.u,
            self.curvature,
            self.traceless,
            format!("loaded slice (mesh_ref {})", self.mesh_ref),
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}
