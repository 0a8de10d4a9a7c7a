//! Built-in vessel profiles and their default routes.
//!
//! Parameters live in `data/vessels.json`; this module only parses them.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::Deserialize;

use crate::domain::{VesselConfig, WaypointSet};
use crate::error::{Error, Result};

const REGISTRY_JSON: &str = include_str!("../data/vessels.json");

#[derive(Debug, Clone, Deserialize)]
pub struct PresetRoute {
    pub delta: f64,
    pub waypoints: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Registry {
    pub vessels: Vec<VesselConfig>,
    pub routes: BTreeMap<String, PresetRoute>,
}

impl Registry {
    pub fn parse(json: &str) -> Result<Self> {
        let reg: Registry = serde_json::from_str(json)?;
        for v in &reg.vessels {
            v.validate()?;
        }
        Ok(reg)
    }

    pub fn vessel(&self, name: &str) -> Result<&VesselConfig> {
        self.vessels
            .iter()
            .find(|v| v.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown vessel profile {name:?}")))
    }

    pub fn route(&self, name: &str) -> Result<(WaypointSet, f64)> {
        let r = self
            .routes
            .get(&name.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidParameter(format!("no default route for {name:?}")))?;
        Ok((WaypointSet::from_rows(&r.waypoints)?, r.delta))
    }
}

/// The registry compiled into the binary.
pub fn builtin() -> &'static Registry {
    static REG: OnceLock<Registry> = OnceLock::new();
    REG.get_or_init(|| Registry::parse(REGISTRY_JSON).expect("embedded vessel registry is valid"))
}

pub fn vessel(name: &str) -> Result<VesselConfig> {
    builtin().vessel(name).cloned()
}
