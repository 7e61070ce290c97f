//! Market-graph representation of a warehouse for order picking.
//!
//! Every floor is divided along its wide pick aisles (and the periphery)
//! into vertical lanes. The part of a cross aisle within one lane is a
//! cross lane; each cross lane becomes a market whose zone comprises the
//! racks reachable from it up to the midpoints of the adjacent sub-aisles.
//! Markets form a complete directed graph with Manhattan edge weights plus
//! a floor penalty on cross-floor edges.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::warehouse::{FloorId, GridPoint, ProductNo, RackId, SubAisleId, WarehouseState};

/// Index of a market in its graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MarketId(pub usize);

impl std::fmt::Display for MarketId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A rack reachable from a market's cross lane.
#[derive(Debug, Clone)]
pub struct ZoneRack {
    /// Index into `WarehouseState::racks`.
    pub rack_idx: usize,
    pub rack_id: RackId,
    pub sub_aisle: SubAisleId,
    /// Walking distance from the cross lane into the sub-aisle.
    pub depth: i64,
    /// Stored quantities per product.
    pub stock: BTreeMap<ProductNo, u32>,
}

/// A market: one cross lane plus its reachable rack zone and supply.
#[derive(Debug, Clone)]
pub struct Market {
    pub id: MarketId,
    pub floor: FloorId,
    /// y coordinate of the cross aisle.
    pub cross_row: i64,
    /// Lane index on the floor.
    pub lane: usize,
    /// Lane boundaries (left x, right x).
    pub x_bounds: (i64, i64),
    /// Center of the cross lane.
    pub center: (f64, f64),
    /// Closest p/d-point on the same floor and its distance from the center.
    pub closest_pd: (GridPoint, f64),
    pub zone_racks: Vec<ZoneRack>,
    /// Total available quantity per product within the zone.
    pub supply: BTreeMap<ProductNo, u32>,
}

impl Market {
    /// x coordinate of the left or right entrance of the cross lane.
    pub fn entrance_x(&self, side: crate::warehouse::Side) -> i64 {
        match side {
            crate::warehouse::Side::Left => self.x_bounds.0,
            crate::warehouse::Side::Right => self.x_bounds.1,
        }
    }

    pub fn lane_width(&self) -> i64 {
        self.x_bounds.1 - self.x_bounds.0
    }
}

/// Complete directed market graph.
#[derive(Debug, Clone)]
pub struct MarketGraph {
    markets: Vec<Market>,
    /// Row-major edge weights; the diagonal is zero.
    weights: Vec<f64>,
    floor_penalty: f64,
}

impl MarketGraph {
    pub fn markets(&self) -> &[Market] {
        &self.markets
    }

    pub fn market(&self, id: MarketId) -> &Market {
        &self.markets[id.0]
    }

    pub fn len(&self) -> usize {
        self.markets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.markets.is_empty()
    }

    pub fn floor_penalty(&self) -> f64 {
        self.floor_penalty
    }

    /// Edge weight between two markets: Manhattan distance between their
    /// centers plus the floor penalty per floor change.
    pub fn weight(&self, from: MarketId, to: MarketId) -> f64 {
        self.weights[from.0 * self.markets.len() + to.0]
    }

    /// Total quantity available per product over all distinct racks.
    pub fn total_supply(&self) -> BTreeMap<ProductNo, u32> {
        let mut seen = std::collections::BTreeSet::new();
        let mut total = BTreeMap::new();
        for market in &self.markets {
            for zr in &market.zone_racks {
                if seen.insert(zr.rack_idx) {
                    for (&p, &q) in &zr.stock {
                        *total.entry(p).or_insert(0) += q;
                    }
                }
            }
        }
        total
    }
}

/// Build the market graph of a warehouse state.
pub fn build_market_graph(state: &WarehouseState, floor_penalty: f64) -> Result<MarketGraph> {
    let layout = state.layout();
    if layout.cross_aisle_rows.is_empty() {
        return Err(Error::configuration("floor has no cross aisles"));
    }
    let boundaries = layout.lane_boundaries();
    if boundaries.len() < 2 {
        return Err(Error::configuration("floor has no lanes"));
    }
    let lanes: Vec<(i64, i64)> = boundaries.windows(2).map(|w| (w[0], w[1])).collect();

    let mut markets: Vec<Market> = Vec::new();
    for floor in state.floor_ids() {
        for &row in &layout.cross_aisle_rows {
            for (lane, &(xl, xr)) in lanes.iter().enumerate() {
                let center = ((xl + xr) as f64 / 2.0, row as f64);
                let closest_pd = layout
                    .pd_points
                    .iter()
                    .map(|&pd| {
                        let d = (center.0 - pd.x as f64).abs() + (center.1 - pd.y as f64).abs();
                        (pd, d)
                    })
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .ok_or_else(|| Error::configuration("floor has no p/d-point"))?;
                markets.push(Market {
                    id: MarketId(markets.len()),
                    floor,
                    cross_row: row,
                    lane,
                    x_bounds: (xl, xr),
                    center,
                    closest_pd,
                    zone_racks: Vec::new(),
                    supply: BTreeMap::new(),
                });
            }
        }
    }

    // Assign racks to market zones: every sub-aisle half belongs to the
    // market at its adjacent cross aisle; a rack exactly on the midpoint is
    // reachable from both sides.
    let markets_per_floor = layout.cross_aisle_rows.len() * lanes.len();
    let market_index = |floor: FloorId, row: i64, lane: usize| -> Option<usize> {
        let row_idx = layout.cross_aisle_rows.iter().position(|&r| r == row)?;
        Some(
            (floor.0 as usize - 1) * markets_per_floor + row_idx * lanes.len() + lane,
        )
    };
    for floor in state.floor_ids() {
        for sa in state.sub_aisles(floor) {
            // Lane of a rack: narrow aisles lie strictly inside a lane; on a
            // boundary (wide) aisle the left-side rack belongs to the lane
            // left of it and the right-side rack to the lane right of it.
            let lane_of = |side: crate::warehouse::Side| -> Option<usize> {
                let x = sa.aisle_x;
                if let Some(lane) = lanes.iter().position(|&(xl, xr)| xl < x && x < xr) {
                    return Some(lane);
                }
                match side {
                    crate::warehouse::Side::Left => {
                        lanes.iter().position(|&(_, xr)| xr == x)
                    }
                    crate::warehouse::Side::Right => {
                        lanes.iter().position(|&(xl, _)| xl == x)
                    }
                }
            };
            let (lo, hi) = sa.rows;
            let mid = (lo + hi) as f64 / 2.0;
            for slot in &sa.slots {
                for ri in slot.racks() {
                    let rack = &state.racks()[ri];
                    let Some(lane) = lane_of(rack.side) else {
                        continue;
                    };
                    let y = rack.access_point.y as f64;
                    let mut rows = Vec::new();
                    if y <= mid {
                        rows.push(lo);
                    }
                    if y >= mid {
                        rows.push(hi);
                    }
                    for row in rows {
                        let Some(mi) = market_index(floor, row, lane) else {
                            continue;
                        };
                        let stock = state.rack_contents(ri).clone();
                        let market = &mut markets[mi];
                        for (&p, &q) in &stock {
                            *market.supply.entry(p).or_insert(0) += q;
                        }
                        market.zone_racks.push(ZoneRack {
                            rack_idx: ri,
                            rack_id: rack.rack_id,
                            sub_aisle: sa.id,
                            depth: (rack.access_point.y - row).abs(),
                            stock,
                        });
                    }
                }
            }
        }
    }

    let n = markets.len();
    let mut weights = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (a, b) = (&markets[i], &markets[j]);
            let d = (a.center.0 - b.center.0).abs() + (a.center.1 - b.center.1).abs();
            let floors = (a.floor.0 as f64 - b.floor.0 as f64).abs();
            weights[i * n + j] = d + floor_penalty * floors;
        }
    }

    Ok(MarketGraph {
        markets,
        weights,
        floor_penalty,
    })
}
