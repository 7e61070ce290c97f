//! Domain model of a mezzanine warehouse: floor geometry, racks,
//! compartments, products, orders, association rules and the hard-constraint
//! validation shared by both optimizers.
//!
//! A warehouse consists of `num_floors` identical floors. Each floor is a
//! grid: vertical periphery aisles at `x = 0` and `x = width`, horizontal
//! cross aisles at the rows listed in [`Layout::cross_aisle_rows`] (always
//! including `y = 0` and `y = height`), and interior pick aisles at the
//! columns listed in [`Layout::pick_aisles`]. Racks attach to pick aisles;
//! a rack's access point lies on its aisle column, strictly between two
//! cross aisles. Walking distances are Manhattan distances on this grid.

mod document;

pub use document::{load_state, save_state, WarehouseDocument, FORMAT_VERSION};

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grip-height band in meters: compartments intersecting it are `Zone::Grip`.
pub const GRIP_BAND: (f64, f64) = (0.75, 1.25);

macro_rules! id_newtype {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(
            Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_newtype!(
    /// 1-based floor number.
    FloorId
);
id_newtype!(
    /// Rack identifier, unique within one floor.
    RackId
);
id_newtype!(
    /// Rack configuration identifier.
    ConfigId
);
id_newtype!(
    /// Compartment identifier, unique within one rack configuration.
    CompartmentId
);
id_newtype!(
    /// Product number.
    ProductNo
);
id_newtype!(
    /// Customer order number.
    OrderNo
);
id_newtype!(
    /// Sub-aisle identifier, unique within one floor.
    SubAisleId
);

/// A point on the floor grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridPoint {
    pub x: i64,
    pub y: i64,
}

impl GridPoint {
    pub fn new(x: i64, y: i64) -> Self {
        GridPoint { x, y }
    }

    pub fn manhattan(self, other: GridPoint) -> i64 {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }
}

/// Manhattan distance between two coordinate vectors of equal dimension.
pub fn manhattan_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::usage(format!(
            "manhattan_distance: dimension mismatch ({} vs {})",
            p.len(),
            q.len()
        )));
    }
    Ok(p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum())
}

/// Pick aisle width class. Carts may only travel in wide aisles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AisleKind {
    Wide,
    Narrow,
}

/// An interior pick aisle column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PickAisle {
    pub x: i64,
    pub kind: AisleKind,
}

/// Side of a pick aisle on which a rack stands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn toggled(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Floor geometry shared by every floor of the warehouse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub width: i64,
    pub height: i64,
    pub pd_points: Vec<GridPoint>,
    /// Cross aisle rows, ascending; must contain 0 and `height`.
    pub cross_aisle_rows: Vec<i64>,
    /// Interior pick aisle columns, ascending by x.
    pub pick_aisles: Vec<PickAisle>,
}

impl Layout {
    /// Blocks as `(lower_row, upper_row)` pairs of consecutive cross aisles.
    pub fn blocks(&self) -> Vec<(i64, i64)> {
        self.cross_aisle_rows
            .windows(2)
            .map(|w| (w[0], w[1]))
            .collect()
    }

    /// Index of the block whose open row interval contains `y`.
    pub fn block_of_row(&self, y: i64) -> Option<usize> {
        self.blocks()
            .iter()
            .position(|&(lo, hi)| y > lo && y < hi)
    }

    /// Lane boundaries: periphery columns plus wide pick aisle columns.
    pub fn lane_boundaries(&self) -> Vec<i64> {
        let mut b = vec![0];
        b.extend(
            self.pick_aisles
                .iter()
                .filter(|a| a.kind == AisleKind::Wide)
                .map(|a| a.x),
        );
        b.push(self.width);
        b
    }

    pub fn is_periphery(&self, p: GridPoint) -> bool {
        p.x == 0 || p.x == self.width || p.y == 0 || p.y == self.height
    }

    fn validate(&self) -> Result<()> {
        if self.width < 2 || self.height < 2 {
            return Err(Error::configuration("layout dimensions too small"));
        }
        if self.cross_aisle_rows.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::configuration("cross aisle rows must be ascending"));
        }
        match (
            self.cross_aisle_rows.first(),
            self.cross_aisle_rows.last(),
        ) {
            (Some(&0), Some(&last)) if last == self.height => {}
            _ => {
                return Err(Error::configuration(
                    "cross aisle rows must include 0 and height",
                ))
            }
        }
        if self.pick_aisles.windows(2).any(|w| w[0].x >= w[1].x) {
            return Err(Error::configuration("pick aisles must be ascending by x"));
        }
        if self
            .pick_aisles
            .iter()
            .any(|a| a.x <= 0 || a.x >= self.width)
        {
            return Err(Error::configuration("pick aisles must be interior columns"));
        }
        if self.pd_points.is_empty() {
            return Err(Error::configuration("layout has no p/d-point"));
        }
        if let Some(p) = self.pd_points.iter().find(|&&p| !self.is_periphery(p)) {
            return Err(Error::configuration(format!(
                "p/d-point ({}, {}) not on a periphery aisle",
                p.x, p.y
            )));
        }
        Ok(())
    }
}

/// Physical item or compartment dimensions in meters (width, height, depth).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dims {
    pub w: f64,
    pub h: f64,
    pub d: f64,
}

impl Dims {
    pub fn new(w: f64, h: f64, d: f64) -> Self {
        Dims { w, h, d }
    }

    pub fn volume(&self) -> f64 {
        self.w * self.h * self.d
    }

    pub fn is_positive(&self) -> bool {
        self.w > 0.0 && self.h > 0.0 && self.d > 0.0
    }
}

/// A single storage location within a rack configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Compartment {
    pub id: CompartmentId,
    pub dims: Dims,
    pub shelf_level: u32,
    pub shelf_position: u32,
    /// Height of the compartment floor above ground, meters.
    pub bottom_height: f64,
}

/// Shelf/compartment arrangement a rack can be configured with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RackConfiguration {
    pub id: ConfigId,
    pub shelf_levels: u32,
    pub compartments_per_shelf: u32,
    pub compartments: Vec<Compartment>,
}

impl RackConfiguration {
    fn validate(&self) -> Result<()> {
        let mut seen = HashMap::new();
        let mut ids = HashMap::new();
        for c in &self.compartments {
            if !c.dims.is_positive() {
                return Err(Error::configuration(format!(
                    "compartment {} has non-positive dimensions",
                    c.id
                )));
            }
            if c.bottom_height < 0.0 {
                return Err(Error::configuration(format!(
                    "compartment {} below ground",
                    c.id
                )));
            }
            if seen.insert((c.shelf_level, c.shelf_position), c.id).is_some() {
                return Err(Error::configuration(format!(
                    "configuration {}: duplicate shelf slot ({}, {})",
                    self.id, c.shelf_level, c.shelf_position
                )));
            }
            if ids.insert(c.id, ()).is_some() {
                return Err(Error::configuration(format!(
                    "configuration {}: duplicate compartment id {}",
                    self.id, c.id
                )));
            }
        }
        Ok(())
    }
}

/// A storage rack, attached to one side of a pick aisle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rack {
    pub rack_id: RackId,
    pub floor: FloorId,
    pub access_point: GridPoint,
    /// Ordering of the rack within its block, 1-based.
    pub bay_number: u32,
    /// Block index (0-based, counted from the bottom cross aisle).
    pub block: u32,
    pub sub_aisle: SubAisleId,
    pub side: Side,
    pub config: ConfigId,
}

/// An assortment entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Product {
    pub number: ProductNo,
    pub dims: Dims,
    /// Weight of one item, kg.
    pub weight: f64,
    /// Order-frequency rank; 1 is the most frequently ordered product.
    pub rank: u32,
    /// Gaussian over the usually ordered quantity: (mu, sigma).
    pub order_frequency: (f64, f64),
}

impl Product {
    /// Target quantity that should be locally available: ceil(mu + 2 sigma),
    /// never below 1.
    pub fn target_quantity(&self) -> u32 {
        let (mu, sigma) = self.order_frequency;
        ((mu + 2.0 * sigma).ceil() as i64).max(1) as u32
    }
}

/// Quantity of one product stored in one compartment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductAssignment {
    pub floor: FloorId,
    pub rack: RackId,
    pub compartment: CompartmentId,
    pub product: ProductNo,
    pub quantity: u32,
}

/// One line of a customer order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderLine {
    pub product: ProductNo,
    pub quantity: u32,
}

/// A customer order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Order {
    pub number: OrderNo,
    pub lines: Vec<OrderLine>,
}

/// Directed correlation between two products with a confidence in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssociationRule {
    pub lhs: ProductNo,
    pub rhs: ProductNo,
    pub confidence: f64,
}

/// Fully qualified compartment address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CompartmentKey {
    pub floor: FloorId,
    pub rack: RackId,
    pub compartment: CompartmentId,
}

/// Vertical zone of a compartment relative to the grip-height band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Zone {
    Low,
    Grip,
    High,
}

/// Weight class of a product: light up to 3 kg, heavy over 7 kg.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightClass {
    Light,
    Medium,
    Heavy,
}

/// Movement class by relative rank thirds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MovementClass {
    Fast,
    Moderate,
    Slow,
}

/// Zone of a compartment. The grip band is closed; a compartment touching it
/// counts as grip.
pub fn zone_of(compartment: &Compartment) -> Zone {
    let bottom = compartment.bottom_height;
    let top = bottom + compartment.dims.h;
    if top < GRIP_BAND.0 {
        Zone::Low
    } else if bottom > GRIP_BAND.1 {
        Zone::High
    } else {
        Zone::Grip
    }
}

pub fn weight_class(product: &Product) -> WeightClass {
    if product.weight <= 3.0 {
        WeightClass::Light
    } else if product.weight <= 7.0 {
        WeightClass::Medium
    } else {
        WeightClass::Heavy
    }
}

pub fn movement_class(product: &Product, assortment_size: usize) -> MovementClass {
    let rel = product.rank as f64 / assortment_size.max(1) as f64;
    if rel <= 1.0 / 3.0 {
        MovementClass::Fast
    } else if rel <= 2.0 / 3.0 {
        MovementClass::Moderate
    } else {
        MovementClass::Slow
    }
}

/// Items of `product` that fit into an empty `compartment`, axis-aligned,
/// without rotation.
pub fn compartment_capacity(compartment: &Compartment, product: &Product) -> u32 {
    let per_axis = |c: f64, i: f64| ((c + 1e-9) / i).floor().max(0.0) as u32;
    let c = &compartment.dims;
    let i = &product.dims;
    per_axis(c.w, i.w) * per_axis(c.h, i.h) * per_axis(c.d, i.d)
}

/// Violations of the storage hard constraints, returned as data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Not every incoming item received a compartment.
    MissingPlacement { expected: u32, placed: u32 },
    /// A compartment already holds a different product.
    MixedProduct {
        key: CompartmentKey,
        occupant: ProductNo,
    },
    /// Assigned quantity exceeds the compartment's remaining capacity.
    CapacityExceeded {
        key: CompartmentKey,
        capacity: u32,
        assigned: u32,
    },
    /// Placement references a compartment that does not exist.
    UnknownCompartment { key: CompartmentKey },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingPlacement { expected, placed } => {
                write!(f, "HC1: {placed} of {expected} items placed")
            }
            Violation::MixedProduct { key, occupant } => write!(
                f,
                "HC2: compartment {}/{}/{} occupied by product {}",
                key.floor, key.rack, key.compartment, occupant
            ),
            Violation::CapacityExceeded {
                key,
                capacity,
                assigned,
            } => write!(
                f,
                "HC3: {} items into compartment {}/{}/{} with capacity {}",
                assigned, key.floor, key.rack, key.compartment, capacity
            ),
            Violation::UnknownCompartment { key } => write!(
                f,
                "unknown compartment {}/{}/{}",
                key.floor, key.rack, key.compartment
            ),
        }
    }
}

/// A sub-aisle: the part of one pick aisle within one block, with the rack
/// slots on both of its sides ordered from the lower cross aisle upwards.
#[derive(Debug, Clone)]
pub struct SubAisle {
    pub id: SubAisleId,
    pub floor: FloorId,
    pub aisle_x: i64,
    pub kind: AisleKind,
    pub block: u32,
    /// Bounding cross aisle rows (lower, upper).
    pub rows: (i64, i64),
    /// One slot per occupied bay row, ascending by y.
    pub slots: Vec<BaySlot>,
}

/// Racks on the two sides of one bay row of a sub-aisle.
#[derive(Debug, Clone, Copy)]
pub struct BaySlot {
    pub y: i64,
    /// Indices into `WarehouseState::racks`.
    pub left: Option<usize>,
    pub right: Option<usize>,
}

impl BaySlot {
    pub fn racks(&self) -> impl Iterator<Item = usize> + '_ {
        self.left.into_iter().chain(self.right)
    }
}

/// The immutable structure and state of a mezzanine warehouse.
///
/// All floors apply the same [`Layout`]. The state is never mutated during
/// an optimization run; [`WarehouseState::with_allocation`] produces the
/// successor state between runs.
#[derive(Debug, Clone)]
pub struct WarehouseState {
    num_floors: u32,
    layout: Layout,
    configurations: Vec<RackConfiguration>,
    racks: Vec<Rack>,
    products: Vec<Product>,
    rules: Vec<AssociationRule>,
    assignments: Vec<ProductAssignment>,
    // Derived indexes, rebuilt on construction.
    rack_lookup: HashMap<(FloorId, RackId), usize>,
    racks_by_floor: Vec<Vec<usize>>,
    config_lookup: HashMap<ConfigId, usize>,
    product_lookup: HashMap<ProductNo, usize>,
    occupancy: BTreeMap<CompartmentKey, (ProductNo, u32)>,
    rack_contents: Vec<BTreeMap<ProductNo, u32>>,
    rules_by_lhs: HashMap<ProductNo, Vec<usize>>,
    sub_aisles_by_floor: Vec<Vec<SubAisle>>,
}

impl WarehouseState {
    pub fn new(
        num_floors: u32,
        layout: Layout,
        configurations: Vec<RackConfiguration>,
        racks: Vec<Rack>,
        products: Vec<Product>,
        rules: Vec<AssociationRule>,
        assignments: Vec<ProductAssignment>,
    ) -> Result<Self> {
        let mut state = WarehouseState {
            num_floors,
            layout,
            configurations,
            racks,
            products,
            rules,
            assignments,
            rack_lookup: HashMap::new(),
            racks_by_floor: Vec::new(),
            config_lookup: HashMap::new(),
            product_lookup: HashMap::new(),
            occupancy: BTreeMap::new(),
            rack_contents: Vec::new(),
            rules_by_lhs: HashMap::new(),
            sub_aisles_by_floor: Vec::new(),
        };
        state.validate_and_index()?;
        Ok(state)
    }

    fn validate_and_index(&mut self) -> Result<()> {
        if self.num_floors == 0 {
            return Err(Error::configuration("warehouse needs at least one floor"));
        }
        self.layout.validate()?;

        self.config_lookup.clear();
        for (i, c) in self.configurations.iter().enumerate() {
            c.validate()?;
            if self.config_lookup.insert(c.id, i).is_some() {
                return Err(Error::configuration(format!(
                    "duplicate configuration id {}",
                    c.id
                )));
            }
        }

        self.product_lookup.clear();
        for (i, p) in self.products.iter().enumerate() {
            if p.weight <= 0.0 {
                return Err(Error::configuration(format!(
                    "product {} has non-positive weight",
                    p.number
                )));
            }
            if p.rank < 1 {
                return Err(Error::configuration(format!(
                    "product {} has rank below 1",
                    p.number
                )));
            }
            if p.order_frequency.1 < 0.0 {
                return Err(Error::configuration(format!(
                    "product {} has negative order-frequency sigma",
                    p.number
                )));
            }
            if self.product_lookup.insert(p.number, i).is_some() {
                return Err(Error::configuration(format!(
                    "duplicate product number {}",
                    p.number
                )));
            }
        }

        self.rules_by_lhs.clear();
        for (i, r) in self.rules.iter().enumerate() {
            if r.lhs == r.rhs {
                return Err(Error::configuration(format!(
                    "association rule {} -> {} is self-referential",
                    r.lhs, r.rhs
                )));
            }
            if !(0.0..=1.0).contains(&r.confidence) {
                return Err(Error::configuration(format!(
                    "association rule {} -> {} confidence outside [0, 1]",
                    r.lhs, r.rhs
                )));
            }
            self.rules_by_lhs.entry(r.lhs).or_default().push(i);
        }

        let aisle_kinds: HashMap<i64, AisleKind> = self
            .layout
            .pick_aisles
            .iter()
            .map(|a| (a.x, a.kind))
            .collect();

        self.rack_lookup.clear();
        self.racks_by_floor = vec![Vec::new(); self.num_floors as usize];
        let mut positions: HashMap<(FloorId, i64, i64, Side), RackId> = HashMap::new();
        for (i, r) in self.racks.iter().enumerate() {
            if r.floor.0 < 1 || r.floor.0 > self.num_floors {
                return Err(Error::configuration(format!(
                    "rack {} on unknown floor {}",
                    r.rack_id, r.floor
                )));
            }
            if self.rack_lookup.insert((r.floor, r.rack_id), i).is_some() {
                return Err(Error::configuration(format!(
                    "duplicate rack id {} on floor {}",
                    r.rack_id, r.floor
                )));
            }
            if r.bay_number < 1 {
                return Err(Error::configuration(format!(
                    "rack {} has bay number below 1",
                    r.rack_id
                )));
            }
            if !aisle_kinds.contains_key(&r.access_point.x) {
                return Err(Error::configuration(format!(
                    "rack {} access point not on a pick aisle",
                    r.rack_id
                )));
            }
            let block = self.layout.block_of_row(r.access_point.y).ok_or_else(|| {
                Error::configuration(format!(
                    "rack {} access point on a cross aisle or outside the floor",
                    r.rack_id
                ))
            })?;
            if block as u32 != r.block {
                return Err(Error::configuration(format!(
                    "rack {} declares block {} but lies in block {}",
                    r.rack_id, r.block, block
                )));
            }
            if !self.config_lookup.contains_key(&r.config) {
                return Err(Error::configuration(format!(
                    "rack {} references unknown configuration {}",
                    r.rack_id, r.config
                )));
            }
            if let Some(prev) = positions.insert(
                (r.floor, r.access_point.x, r.access_point.y, r.side),
                r.rack_id,
            ) {
                return Err(Error::configuration(format!(
                    "racks {} and {} occupy the same slot",
                    prev, r.rack_id
                )));
            }
            self.racks_by_floor[(r.floor.0 - 1) as usize].push(i);
        }

        // Sub-aisle grouping per floor, derived from geometry; the racks'
        // declared sub-aisle ids must map one-to-one onto the derived groups.
        self.sub_aisles_by_floor = Vec::with_capacity(self.num_floors as usize);
        for floor in 1..=self.num_floors {
            let floor = FloorId(floor);
            let mut groups: BTreeMap<(i64, u32), Vec<usize>> = BTreeMap::new();
            for &ri in &self.racks_by_floor[(floor.0 - 1) as usize] {
                let r = &self.racks[ri];
                groups
                    .entry((r.access_point.x, r.block))
                    .or_default()
                    .push(ri);
            }
            let mut sub_aisles = Vec::new();
            let mut seen_ids: HashMap<SubAisleId, (i64, u32)> = HashMap::new();
            for ((x, block), members) in groups {
                let id = self.racks[members[0]].sub_aisle;
                for &ri in &members {
                    if self.racks[ri].sub_aisle != id {
                        return Err(Error::configuration(format!(
                            "rack {} disagrees on the sub-aisle id of aisle x={x} block {block}",
                            self.racks[ri].rack_id
                        )));
                    }
                }
                if let Some(other) = seen_ids.insert(id, (x, block)) {
                    return Err(Error::configuration(format!(
                        "sub-aisle id {id} reused across aisle groups {other:?} and ({x}, {block})"
                    )));
                }
                let rows = self.layout.blocks()[block as usize];
                let mut by_row: BTreeMap<i64, BaySlot> = BTreeMap::new();
                for &ri in &members {
                    let r = &self.racks[ri];
                    let slot = by_row.entry(r.access_point.y).or_insert(BaySlot {
                        y: r.access_point.y,
                        left: None,
                        right: None,
                    });
                    match r.side {
                        Side::Left => slot.left = Some(ri),
                        Side::Right => slot.right = Some(ri),
                    }
                }
                sub_aisles.push(SubAisle {
                    id,
                    floor,
                    aisle_x: x,
                    kind: aisle_kinds[&x],
                    block,
                    rows,
                    slots: by_row.into_values().collect(),
                });
            }
            self.sub_aisles_by_floor.push(sub_aisles);
        }

        self.occupancy.clear();
        self.rack_contents = vec![BTreeMap::new(); self.racks.len()];
        for a in &self.assignments {
            if a.quantity == 0 {
                return Err(Error::configuration("assignment with zero quantity"));
            }
            let key = CompartmentKey {
                floor: a.floor,
                rack: a.rack,
                compartment: a.compartment,
            };
            let (rack_idx, cap) = {
                let (rack_idx, comp) = self.resolve_compartment(key).ok_or_else(|| {
                    Error::configuration(format!(
                        "assignment references unknown compartment {}/{}/{}",
                        a.floor, a.rack, a.compartment
                    ))
                })?;
                let product = self.product(a.product).ok_or_else(|| {
                    Error::configuration(format!(
                        "assignment references unknown product {}",
                        a.product
                    ))
                })?;
                (rack_idx, compartment_capacity(comp, product))
            };
            if self.occupancy.insert(key, (a.product, a.quantity)).is_some() {
                return Err(Error::configuration(format!(
                    "two assignments target compartment {}/{}/{}",
                    a.floor, a.rack, a.compartment
                )));
            }
            if a.quantity > cap {
                return Err(Error::configuration(format!(
                    "assignment of {} items exceeds capacity {} of {}/{}/{}",
                    a.quantity, cap, a.floor, a.rack, a.compartment
                )));
            }
            *self.rack_contents[rack_idx].entry(a.product).or_insert(0) += a.quantity;
        }
        Ok(())
    }

    pub fn num_floors(&self) -> u32 {
        self.num_floors
    }

    pub fn floor_ids(&self) -> impl Iterator<Item = FloorId> {
        (1..=self.num_floors).map(FloorId)
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn configurations(&self) -> &[RackConfiguration] {
        &self.configurations
    }

    pub fn racks(&self) -> &[Rack] {
        &self.racks
    }

    pub fn products(&self) -> &[Product] {
        &self.products
    }

    pub fn rules(&self) -> &[AssociationRule] {
        &self.rules
    }

    pub fn assignments(&self) -> &[ProductAssignment] {
        &self.assignments
    }

    pub fn product(&self, number: ProductNo) -> Option<&Product> {
        self.product_lookup.get(&number).map(|&i| &self.products[i])
    }

    pub fn configuration(&self, id: ConfigId) -> Option<&RackConfiguration> {
        self.config_lookup.get(&id).map(|&i| &self.configurations[i])
    }

    /// Indices into [`WarehouseState::racks`] for one floor.
    pub fn rack_indices(&self, floor: FloorId) -> &[usize] {
        &self.racks_by_floor[(floor.0 - 1) as usize]
    }

    pub fn rack_index(&self, floor: FloorId, rack: RackId) -> Option<usize> {
        self.rack_lookup.get(&(floor, rack)).copied()
    }

    pub fn rack_by_key(&self, floor: FloorId, rack: RackId) -> Option<&Rack> {
        self.rack_index(floor, rack).map(|i| &self.racks[i])
    }

    pub fn sub_aisles(&self, floor: FloorId) -> &[SubAisle] {
        &self.sub_aisles_by_floor[(floor.0 - 1) as usize]
    }

    /// Product quantities currently stored in the rack at `rack_idx`.
    pub fn rack_contents(&self, rack_idx: usize) -> &BTreeMap<ProductNo, u32> {
        &self.rack_contents[rack_idx]
    }

    pub fn occupant(&self, key: CompartmentKey) -> Option<(ProductNo, u32)> {
        self.occupancy.get(&key).copied()
    }

    /// Association rules with `product` on the left side.
    pub fn rules_for(&self, product: ProductNo) -> impl Iterator<Item = &AssociationRule> {
        self.rules_by_lhs
            .get(&product)
            .into_iter()
            .flatten()
            .map(|&i| &self.rules[i])
    }

    fn resolve_compartment(&self, key: CompartmentKey) -> Option<(usize, &Compartment)> {
        let rack_idx = self.rack_index(key.floor, key.rack)?;
        let config = self.configuration(self.racks[rack_idx].config)?;
        let comp = config.compartments.iter().find(|c| c.id == key.compartment)?;
        Some((rack_idx, comp))
    }

    pub fn compartment(&self, key: CompartmentKey) -> Option<&Compartment> {
        self.resolve_compartment(key).map(|(_, c)| c)
    }

    /// Walking distance from a rack's access point to its closest p/d-point.
    pub fn rack_walk_distance(&self, rack: &Rack) -> Result<i64> {
        rack_walk_distance(rack, &self.layout)
    }

    /// Remaining item capacity of a compartment for `product`: full capacity
    /// when empty, the unused rest when it already holds the same product,
    /// zero when occupied by a different product.
    pub fn remaining_capacity(&self, key: CompartmentKey, product: &Product) -> u32 {
        let Some((_, comp)) = self.resolve_compartment(key) else {
            return 0;
        };
        let cap = compartment_capacity(comp, product);
        match self.occupancy.get(&key) {
            None => cap,
            Some(&(occupant, qty)) if occupant == product.number => cap.saturating_sub(qty),
            Some(_) => 0,
        }
    }

    /// Remaining capacity of a whole rack for `product`, summed over its
    /// compartments.
    pub fn rack_remaining_capacity(&self, rack_idx: usize, product: &Product) -> u32 {
        let rack = &self.racks[rack_idx];
        let Some(config) = self.configuration(rack.config) else {
            return 0;
        };
        config
            .compartments
            .iter()
            .map(|c| {
                self.remaining_capacity(
                    CompartmentKey {
                        floor: rack.floor,
                        rack: rack.rack_id,
                        compartment: c.id,
                    },
                    product,
                )
            })
            .sum()
    }

    /// Quantity of `product` stored on `floor`.
    pub fn floor_product_total(&self, floor: FloorId, product: ProductNo) -> u32 {
        self.rack_indices(floor)
            .iter()
            .map(|&ri| self.rack_contents[ri].get(&product).copied().unwrap_or(0))
            .sum()
    }

    /// Total stored quantity of `product` across all floors.
    pub fn product_total(&self, product: ProductNo) -> u32 {
        self.floor_ids()
            .map(|f| self.floor_product_total(f, product))
            .sum()
    }

    /// Fraction of compartments currently holding at least one item.
    pub fn occupied_compartment_ratio(&self) -> f64 {
        let total: usize = self
            .racks
            .iter()
            .filter_map(|r| self.configuration(r.config))
            .map(|c| c.compartments.len())
            .sum();
        if total == 0 {
            return 0.0;
        }
        self.occupancy.len() as f64 / total as f64
    }

    /// Fraction of the total compartment volume currently occupied by items.
    pub fn occupied_volume_ratio(&self) -> f64 {
        let mut capacity = 0.0;
        for r in &self.racks {
            if let Some(c) = self.configuration(r.config) {
                capacity += c.compartments.iter().map(|c| c.dims.volume()).sum::<f64>();
            }
        }
        if capacity == 0.0 {
            return 0.0;
        }
        let mut used = 0.0;
        for (key, &(product, qty)) in &self.occupancy {
            if let (Some(p), Some(_)) = (self.product(product), self.compartment(*key)) {
                used += p.dims.volume() * qty as f64;
            }
        }
        used / capacity
    }

    /// Validate a storage allocation against the hard constraints. Violations
    /// are data, not faults: a feasible allocation yields an empty list.
    pub fn validate_storage_solution(
        &self,
        product: ProductNo,
        quantity: u32,
        placements: &[CompartmentKey],
    ) -> Vec<Violation> {
        let mut violations = Vec::new();
        if placements.len() as u32 != quantity {
            violations.push(Violation::MissingPlacement {
                expected: quantity,
                placed: placements.len() as u32,
            });
        }
        let Some(prod) = self.product(product) else {
            return violations;
        };
        let mut counts: BTreeMap<CompartmentKey, u32> = BTreeMap::new();
        for &key in placements {
            *counts.entry(key).or_insert(0) += 1;
        }
        for (key, count) in counts {
            let Some((_, comp)) = self.resolve_compartment(key) else {
                violations.push(Violation::UnknownCompartment { key });
                continue;
            };
            let mut existing_same = 0;
            if let Some(&(occupant, qty)) = self.occupancy.get(&key) {
                if occupant != product {
                    violations.push(Violation::MixedProduct { key, occupant });
                    continue;
                }
                existing_same = qty;
            }
            let cap = compartment_capacity(comp, prod);
            if existing_same + count > cap {
                violations.push(Violation::CapacityExceeded {
                    key,
                    capacity: cap.saturating_sub(existing_same),
                    assigned: count,
                });
            }
        }
        violations
    }

    /// Apply a feasible allocation, producing the successor warehouse state.
    pub fn with_allocation(
        &self,
        product: ProductNo,
        placements: &[CompartmentKey],
    ) -> Result<WarehouseState> {
        let violations =
            self.validate_storage_solution(product, placements.len() as u32, placements);
        if !violations.is_empty() {
            return Err(Error::usage(format!(
                "allocation violates hard constraints: {}",
                violations
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join("; ")
            )));
        }
        let mut counts: BTreeMap<CompartmentKey, u32> = BTreeMap::new();
        for &key in placements {
            *counts.entry(key).or_insert(0) += 1;
        }
        let mut assignments = self.assignments.clone();
        for (key, count) in counts {
            if let Some(existing) = assignments.iter_mut().find(|a| {
                a.floor == key.floor
                    && a.rack == key.rack
                    && a.compartment == key.compartment
                    && a.product == product
            }) {
                existing.quantity += count;
            } else {
                assignments.push(ProductAssignment {
                    floor: key.floor,
                    rack: key.rack,
                    compartment: key.compartment,
                    product,
                    quantity: count,
                });
            }
        }
        WarehouseState::new(
            self.num_floors,
            self.layout.clone(),
            self.configurations.clone(),
            self.racks.clone(),
            self.products.clone(),
            self.rules.clone(),
            assignments,
        )
    }
}

/// Walking distance from the rack's access point to the closest p/d-point
/// of the layout.
pub fn rack_walk_distance(rack: &Rack, layout: &Layout) -> Result<i64> {
    layout
        .pd_points
        .iter()
        .map(|&pd| rack.access_point.manhattan(pd))
        .min()
        .ok_or_else(|| Error::configuration("floor has no p/d-point"))
}
