//! Modified S-Shape heuristic on the market graph: markets are traversed
//! lane by lane with alternating cross-aisle direction; every market serves
//! as the starting point once, and each route is also evaluated reversed.

use crate::error::Result;
use crate::moo::ParetoFront;
use crate::warehouse::WarehouseState;

use super::graph::{MarketGraph, MarketId};
use super::route::{
    extend_greedily, reverse_route, PickList, PickRoute, RouteBuilder,
};

/// Cyclic S-shaped order over all markets: floors ascending, lanes ascending,
/// cross aisles alternating up/down per lane.
fn s_order(graph: &MarketGraph) -> Vec<MarketId> {
    let mut ids: Vec<MarketId> = (0..graph.len()).map(MarketId).collect();
    ids.sort_by_key(|&m| {
        let market = graph.market(m);
        let y = market.cross_row;
        let key_y = if market.lane.is_multiple_of(2) { y } else { -y };
        (market.floor.0, market.lane, key_y)
    });
    ids
}

/// Construct the S-Shape front: one route per starting market plus the
/// reversed variants, Pareto-filtered.
pub fn s_shape_routes(
    graph: &MarketGraph,
    state: &WarehouseState,
    pick_list: &PickList,
    allowed_weight_difference: f64,
) -> Result<ParetoFront<PickRoute>> {
    if pick_list.is_empty() {
        let pd = state.layout().pd_points[0];
        let route = PickRoute::empty(pd, crate::warehouse::FloorId(1));
        let v = route.objectives();
        return Ok(ParetoFront::from_solutions(vec![(route, v)]));
    }
    let base = s_order(graph);
    let mut solutions = Vec::new();
    for start in 0..base.len() {
        let mut builder = RouteBuilder::new(graph, state, pick_list);
        for step in 0..base.len() {
            if builder.done() {
                break;
            }
            let m = base[(start + step) % base.len()];
            if builder.has_supply(m) {
                builder.visit(m);
            }
        }
        // Items stranded by the one-rack-per-sub-aisle rule need revisits.
        extend_greedily(&mut builder)?;
        let route = builder.finish(allowed_weight_difference, None)?;
        let reversed = reverse_route(&route, graph, state, pick_list, allowed_weight_difference)?;
        solutions.push((route.clone(), route.objectives()));
        solutions.push((reversed.clone(), reversed.objectives()));
    }
    Ok(ParetoFront::from_solutions(solutions))
}
