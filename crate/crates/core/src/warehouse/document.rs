//! Versioned on-disk document for warehouse instances.
//!
//! One JSON file carries the full state: layout, rack configurations, racks,
//! products, association rules and current assignments. Loading and saving
//! round-trips losslessly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    AssociationRule, Layout, Product, ProductAssignment, Rack, RackConfiguration, WarehouseState,
};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

/// Serialized form of a [`WarehouseState`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WarehouseDocument {
    pub format_version: u32,
    pub num_floors: u32,
    pub layout: Layout,
    pub configurations: Vec<RackConfiguration>,
    pub racks: Vec<Rack>,
    pub products: Vec<Product>,
    pub rules: Vec<AssociationRule>,
    pub assignments: Vec<ProductAssignment>,
}

impl WarehouseDocument {
    pub fn from_state(state: &WarehouseState) -> Self {
        WarehouseDocument {
            format_version: FORMAT_VERSION,
            num_floors: state.num_floors(),
            layout: state.layout().clone(),
            configurations: state.configurations().to_vec(),
            racks: state.racks().to_vec(),
            products: state.products().to_vec(),
            rules: state.rules().to_vec(),
            assignments: state.assignments().to_vec(),
        }
    }

    pub fn into_state(self) -> Result<WarehouseState> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported warehouse format version {} (expected {})",
                self.format_version, FORMAT_VERSION
            )));
        }
        WarehouseState::new(
            self.num_floors,
            self.layout,
            self.configurations,
            self.racks,
            self.products,
            self.rules,
            self.assignments,
        )
    }
}

pub fn save_state(state: &WarehouseState, path: &Path) -> Result<()> {
    let doc = WarehouseDocument::from_state(state);
    let json = serde_json::to_string_pretty(&doc)?;
    std::fs::write(path, json + "\n")?;
    Ok(())
}

pub fn load_state(path: &Path) -> Result<WarehouseState> {
    let text = std::fs::read_to_string(path)?;
    let doc: WarehouseDocument = serde_json::from_str(&text)?;
    doc.into_state()
}
