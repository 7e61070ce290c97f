//! Pick routes: two-layer structure (market sequence with entry/exit sides,
//! per-market rack sequence), the in-market collection loop, travel distance
//! and weight-violation objectives, and route reversal.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moo::ObjectiveVector;
use crate::warehouse::{FloorId, GridPoint, Order, ProductNo, RackId, Side, SubAisleId, WarehouseState};

use super::graph::{Market, MarketGraph, MarketId};

/// Products and quantities to collect in one route.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PickList {
    items: BTreeMap<ProductNo, u32>,
}

impl PickList {
    pub fn new(items: impl IntoIterator<Item = (ProductNo, u32)>) -> Self {
        let mut map = BTreeMap::new();
        for (p, q) in items {
            if q > 0 {
                *map.entry(p).or_insert(0) += q;
            }
        }
        PickList { items: map }
    }

    pub fn from_order(order: &Order) -> Self {
        PickList::new(order.lines.iter().map(|l| (l.product, l.quantity)))
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ProductNo, &u32)> {
        self.items.iter()
    }

    pub fn quantity(&self, product: ProductNo) -> u32 {
        self.items.get(&product).copied().unwrap_or(0)
    }
}

/// One picked order line at one rack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PickLine {
    pub product: ProductNo,
    pub quantity: u32,
    /// Item weight in kg, carried along for the weight-violation objective.
    pub weight: f64,
}

/// One visited rack with its picks, heaviest product first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RackPick {
    pub floor: FloorId,
    pub rack_id: RackId,
    pub sub_aisle: SubAisleId,
    /// Round-trip half-length: distance from the cross lane to the rack.
    pub depth: i64,
    pub picks: Vec<PickLine>,
}

/// One market visit with entry/exit sides and the rack sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketVisit {
    pub market: MarketId,
    pub entry: Side,
    pub exit: Side,
    pub racks: Vec<RackPick>,
}

/// A complete pick route with both objective values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PickRoute {
    pub visits: Vec<MarketVisit>,
    pub start_pd: GridPoint,
    pub start_floor: FloorId,
    pub end_pd: GridPoint,
    pub end_floor: FloorId,
    pub travel: f64,
    pub violations: u32,
}

impl PickRoute {
    /// An empty route for an empty pick list.
    pub fn empty(pd: GridPoint, floor: FloorId) -> Self {
        PickRoute {
            visits: Vec::new(),
            start_pd: pd,
            start_floor: floor,
            end_pd: pd,
            end_floor: floor,
            travel: 0.0,
            violations: 0,
        }
    }

    pub fn market_sequence(&self) -> Vec<MarketId> {
        self.visits.iter().map(|v| v.market).collect()
    }

    /// Both objectives as a minimizing vector (travel, violations).
    pub fn objectives(&self) -> ObjectiveVector {
        ObjectiveVector::minimizing(vec![self.travel, self.violations as f64])
            .expect("route objectives are finite")
    }

    /// All pick lines in collection order.
    pub fn pick_lines(&self) -> impl Iterator<Item = &PickLine> {
        self.visits
            .iter()
            .flat_map(|v| v.racks.iter())
            .flat_map(|r| r.picks.iter())
    }
}

/// Travel distance of a route on its graph: pd leg in, per-visit sub-aisle
/// round trips and cross-lane traversals, inter-market edges, pd leg out.
pub fn travel_distance(route: &PickRoute, graph: &MarketGraph) -> f64 {
    if route.visits.is_empty() {
        return 0.0;
    }
    let first = graph.market(route.visits[0].market);
    let last = graph.market(route.visits[route.visits.len() - 1].market);
    let pd_leg = |pd: GridPoint, m: &Market| -> f64 {
        (m.center.0 - pd.x as f64).abs() + (m.center.1 - pd.y as f64).abs()
    };
    let mut total = pd_leg(route.start_pd, first);
    for (i, visit) in route.visits.iter().enumerate() {
        let market = graph.market(visit.market);
        if i > 0 {
            total += graph.weight(route.visits[i - 1].market, visit.market);
        }
        total += (market.entrance_x(visit.entry) - market.entrance_x(visit.exit)).abs() as f64;
        total += visit
            .racks
            .iter()
            .map(|r| 2.0 * r.depth as f64)
            .sum::<f64>();
    }
    total + pd_leg(route.end_pd, last)
}

/// Count the weight violations in a pick-line sequence: a line violates when
/// its weight exceeds the minimum weight among all previously picked lines
/// by more than `allowed_difference`.
pub fn weight_violations<'a>(
    lines: impl Iterator<Item = &'a PickLine>,
    allowed_difference: f64,
) -> u32 {
    let mut min_before = f64::INFINITY;
    let mut violations = 0;
    for line in lines {
        if line.weight > min_before + allowed_difference {
            violations += 1;
        }
        min_before = min_before.min(line.weight);
    }
    violations
}

/// Builds a route by visiting markets one by one, tracking the purchasing
/// list and the per-rack quantities already taken.
pub(crate) struct RouteBuilder<'g> {
    graph: &'g MarketGraph,
    state: &'g WarehouseState,
    needed: BTreeMap<ProductNo, u32>,
    taken: BTreeMap<usize, BTreeMap<ProductNo, u32>>,
    sequence: Vec<(MarketId, Vec<RackPick>)>,
}

impl<'g> RouteBuilder<'g> {
    pub fn new(graph: &'g MarketGraph, state: &'g WarehouseState, list: &PickList) -> Self {
        RouteBuilder {
            graph,
            state,
            needed: list.items.clone(),
            taken: BTreeMap::new(),
            sequence: Vec::new(),
        }
    }

    pub fn done(&self) -> bool {
        self.needed.is_empty()
    }

    pub fn visited(&self, market: MarketId) -> bool {
        self.sequence.iter().any(|(m, _)| *m == market)
    }

    fn available(&self, rack_idx: usize, product: ProductNo, stock: u32) -> u32 {
        let already = self
            .taken
            .get(&rack_idx)
            .and_then(|m| m.get(&product))
            .copied()
            .unwrap_or(0);
        stock.saturating_sub(already)
    }

    /// Fraction of the still-needed items available at a market.
    pub fn supply_fraction(&self, market: MarketId) -> f64 {
        let total: u32 = self.needed.values().sum();
        if total == 0 {
            return 0.0;
        }
        let market = self.graph.market(market);
        let mut pickable = 0u32;
        for (&product, &need) in &self.needed {
            let mut here = 0u32;
            for zr in &market.zone_racks {
                if let Some(&stock) = zr.stock.get(&product) {
                    here += self.available(zr.rack_idx, product, stock);
                }
            }
            pickable += here.min(need);
        }
        pickable as f64 / total as f64
    }

    pub fn has_supply(&self, market: MarketId) -> bool {
        self.supply_fraction(market) > 0.0
    }

    /// Markets that still offer needed items (used for revisit fallbacks).
    pub fn supplying_markets(&self) -> Vec<MarketId> {
        (0..self.graph.len())
            .map(MarketId)
            .filter(|&m| self.has_supply(m))
            .collect()
    }

    /// Visit a market: iterate its zone racks in priority-rule order (racks
    /// with heavy needed products first, then closer to the sub-aisle
    /// entrance, then larger pickable quantity), picking still-needed
    /// products and entering each sub-aisle at most once per visit.
    pub fn visit(&mut self, market_id: MarketId) {
        let market = self.graph.market(market_id);
        let mut candidates: Vec<(usize, f64, u32)> = Vec::new();
        for (zi, zr) in market.zone_racks.iter().enumerate() {
            let mut heaviest = 0.0f64;
            let mut pickable = 0u32;
            for (&product, &stock) in &zr.stock {
                let Some(&need) = self.needed.get(&product) else {
                    continue;
                };
                let avail = self.available(zr.rack_idx, product, stock).min(need);
                if avail > 0 {
                    pickable += avail;
                    if let Some(p) = self.state.product(product) {
                        heaviest = heaviest.max(p.weight);
                    }
                }
            }
            if pickable > 0 {
                candidates.push((zi, heaviest, pickable));
            }
        }
        candidates.sort_by(|a, b| {
            let (za, zb) = (&market.zone_racks[a.0], &market.zone_racks[b.0]);
            b.1.total_cmp(&a.1)
                .then(za.depth.cmp(&zb.depth))
                .then(b.2.cmp(&a.2))
                .then(za.rack_id.cmp(&zb.rack_id))
        });

        let mut used_sub_aisles: Vec<SubAisleId> = Vec::new();
        let mut rack_picks: Vec<RackPick> = Vec::new();
        for (zi, _, _) in candidates {
            let zr = &market.zone_racks[zi];
            if used_sub_aisles.contains(&zr.sub_aisle) {
                continue;
            }
            // Heaviest needed product first within the rack.
            let mut lines: Vec<PickLine> = Vec::new();
            let mut products: Vec<(ProductNo, u32)> = zr
                .stock
                .iter()
                .filter_map(|(&p, &stock)| {
                    let need = self.needed.get(&p).copied().unwrap_or(0);
                    let avail = self.available(zr.rack_idx, p, stock).min(need);
                    (avail > 0).then_some((p, avail))
                })
                .collect();
            products.sort_by(|a, b| {
                let wa = self.state.product(a.0).map_or(0.0, |p| p.weight);
                let wb = self.state.product(b.0).map_or(0.0, |p| p.weight);
                wb.total_cmp(&wa).then(a.0.cmp(&b.0))
            });
            for (product, take) in products {
                let weight = self.state.product(product).map_or(0.0, |p| p.weight);
                lines.push(PickLine {
                    product,
                    quantity: take,
                    weight,
                });
                *self
                    .taken
                    .entry(zr.rack_idx)
                    .or_default()
                    .entry(product)
                    .or_insert(0) += take;
                let need = self.needed.get_mut(&product).expect("needed product");
                *need -= take;
                if *need == 0 {
                    self.needed.remove(&product);
                }
            }
            if !lines.is_empty() {
                used_sub_aisles.push(zr.sub_aisle);
                rack_picks.push(RackPick {
                    floor: market.floor,
                    rack_id: zr.rack_id,
                    sub_aisle: zr.sub_aisle,
                    depth: zr.depth,
                    picks: lines,
                });
            }
        }
        self.sequence.push((market_id, rack_picks));
    }

    /// Assemble the route: either with sides derived from the neighbor rule
    /// (entry faces the previous location, exit faces the next) or with the
    /// forced sides of a reversal.
    pub fn finish(
        self,
        allowed_weight_difference: f64,
        forced_sides: Option<&[(Side, Side)]>,
    ) -> Result<PickRoute> {
        if !self.needed.is_empty() {
            return Err(Error::infeasible_order(format!(
                "pick list not satisfiable: {} items missing",
                self.needed.values().sum::<u32>()
            )));
        }
        let Some((first, _)) = self.sequence.first() else {
            // Empty pick list: degenerate route at the first p/d-point.
            let layout = self.state.layout();
            let pd = layout.pd_points[0];
            return Ok(PickRoute::empty(pd, FloorId(1)));
        };
        let first_market = self.graph.market(*first);
        let last_market = self.graph.market(self.sequence.last().unwrap().0);
        let start_pd = first_market.closest_pd.0;
        let end_pd = last_market.closest_pd.0;

        let grid = |p: GridPoint| (p.x as f64, p.y as f64);
        // Side of the market whose entrance lies closer to a point.
        let closer_side = |m: &Market, point: (f64, f64), tie: Side| -> Side {
            let dist = |side: Side| {
                (m.entrance_x(side) as f64 - point.0).abs() + (m.cross_row as f64 - point.1).abs()
            };
            let (dl, dr) = (dist(Side::Left), dist(Side::Right));
            if dl < dr {
                Side::Left
            } else if dr < dl {
                Side::Right
            } else {
                tie
            }
        };

        let mut visits = Vec::with_capacity(self.sequence.len());
        for (i, (market_id, racks)) in self.sequence.iter().enumerate() {
            let market = self.graph.market(*market_id);
            let (entry, exit) = if let Some(sides) = forced_sides {
                sides[i]
            } else {
                let entry = if i == 0 {
                    closer_side(market, grid(start_pd), Side::Left)
                } else {
                    let prev = self.graph.market(self.sequence[i - 1].0);
                    closer_side(market, prev.center, Side::Left)
                };
                let exit = if i + 1 < self.sequence.len() {
                    let next = self.graph.market(self.sequence[i + 1].0);
                    closer_side(market, next.center, entry)
                } else {
                    closer_side(market, grid(end_pd), entry)
                };
                (entry, exit)
            };
            visits.push(MarketVisit {
                market: *market_id,
                entry,
                exit,
                racks: racks.clone(),
            });
        }

        let mut route = PickRoute {
            visits,
            start_pd,
            start_floor: first_market.floor,
            end_pd,
            end_floor: last_market.floor,
            travel: 0.0,
            violations: 0,
        };
        route.travel = travel_distance(&route, self.graph);
        route.violations = weight_violations(route.pick_lines(), allowed_weight_difference);
        Ok(route)
    }
}

/// Construct a route that visits the given markets in order, then extends
/// greedily (best supply fraction per distance) until the pick list is
/// satisfied. Markets where nothing can be picked are skipped.
pub fn route_for_market_sequence(
    graph: &MarketGraph,
    state: &WarehouseState,
    pick_list: &PickList,
    sequence: &[MarketId],
    allowed_weight_difference: f64,
) -> Result<PickRoute> {
    let mut builder = RouteBuilder::new(graph, state, pick_list);
    for &m in sequence {
        if builder.done() {
            break;
        }
        if builder.has_supply(m) {
            builder.visit(m);
        }
    }
    extend_greedily(&mut builder)?;
    builder.finish(allowed_weight_difference, None)
}

/// Append the most attractive supplying market (supply fraction over
/// distance from the current position) until the purchasing list is empty.
pub(crate) fn extend_greedily(builder: &mut RouteBuilder) -> Result<()> {
    while !builder.done() {
        let current = builder.sequence.last().map(|(m, _)| *m);
        let candidates = builder.supplying_markets();
        if candidates.is_empty() {
            return Err(Error::infeasible_order(
                "pick list not satisfiable from the warehouse supply",
            ));
        }
        let best = candidates
            .into_iter()
            .max_by(|&a, &b| {
                let score = |m: MarketId| {
                    let d = current.map_or(1.0, |c| builder.graph.weight(c, m).max(1.0));
                    builder.supply_fraction(m) / d
                };
                score(a).total_cmp(&score(b)).then(b.0.cmp(&a.0))
            })
            .expect("non-empty candidates");
        builder.visit(best);
    }
    Ok(())
}

/// Reverse a route: market sequence reversed, sides toggled and swapped,
/// rack sequences recomputed by replaying the collection, objectives
/// recomputed.
pub fn reverse_route(
    route: &PickRoute,
    graph: &MarketGraph,
    state: &WarehouseState,
    pick_list: &PickList,
    allowed_weight_difference: f64,
) -> Result<PickRoute> {
    if route.visits.is_empty() {
        return Ok(route.clone());
    }
    let mut builder = RouteBuilder::new(graph, state, pick_list);
    let mut sides = Vec::with_capacity(route.visits.len());
    for visit in route.visits.iter().rev() {
        builder.visit(visit.market);
        sides.push((visit.exit.toggled(), visit.entry.toggled()));
    }
    if !builder.done() {
        // The reversed collection order may strand items behind the
        // one-rack-per-sub-aisle rule; extend like any other construction.
        extend_greedily(&mut builder)?;
        while sides.len() < builder.sequence.len() {
            sides.push((Side::Left, Side::Left));
        }
    }
    builder.finish(allowed_weight_difference, Some(&sides))
}
