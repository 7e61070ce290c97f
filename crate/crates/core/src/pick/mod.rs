//! Order picking: market-graph construction, ant-based pick-route search in
//! two variants with cataclysm restarts, route objectives, and the modified
//! S-Shape baseline.

pub mod aco;
pub mod graph;
pub mod route;
pub mod sshape;

pub use aco::{
    aco_optimize, construct_pick_route, heuristic_value, pheromone_update_aco3,
    pheromone_update_aco4, transition_probability, AcoObserver, AcoParams, AcoVariant,
    NoopObserver, PheromoneMatrices,
};
pub use graph::{build_market_graph, Market, MarketGraph, MarketId, ZoneRack};
pub use route::{
    reverse_route, route_for_market_sequence, travel_distance, weight_violations, MarketVisit,
    PickLine, PickList, PickRoute, RackPick,
};
pub use sshape::s_shape_routes;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moo::ParetoFront;
use crate::warehouse::WarehouseState;

/// The order-picking algorithm roster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PickAlgorithm {
    Aco3,
    Aco4,
    SShape,
}

impl PickAlgorithm {
    pub fn is_deterministic(&self) -> bool {
        matches!(self, PickAlgorithm::SShape)
    }

    pub fn name(&self) -> &'static str {
        match self {
            PickAlgorithm::Aco3 => "aco3",
            PickAlgorithm::Aco4 => "aco4",
            PickAlgorithm::SShape => "sshape",
        }
    }
}

impl std::str::FromStr for PickAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "aco3" => Ok(PickAlgorithm::Aco3),
            "aco4" => Ok(PickAlgorithm::Aco4),
            "sshape" => Ok(PickAlgorithm::SShape),
            other => Err(Error::usage(format!("unknown picking algorithm '{other}'"))),
        }
    }
}

/// Solve one pick list with the chosen algorithm over a prebuilt graph.
pub fn solve_picking(
    graph: &MarketGraph,
    state: &WarehouseState,
    pick_list: &PickList,
    algorithm: PickAlgorithm,
    params: &AcoParams,
    seed: u64,
) -> Result<ParetoFront<PickRoute>> {
    match algorithm {
        PickAlgorithm::SShape => {
            s_shape_routes(graph, state, pick_list, params.allowed_weight_difference)
        }
        variant => {
            let mut params = *params;
            params.seed = seed;
            params.variant = match variant {
                PickAlgorithm::Aco3 => AcoVariant::Aco3,
                PickAlgorithm::Aco4 => AcoVariant::Aco4,
                PickAlgorithm::SShape => unreachable!(),
            };
            aco_optimize(graph, state, pick_list, &params, &mut NoopObserver)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::storage::fixtures::small_state;
    use crate::warehouse::{CompartmentId, CompartmentKey, FloorId, ProductNo, RackId, Side};

    fn key(floor: u32, rack: u32, compartment: u32) -> CompartmentKey {
        CompartmentKey {
            floor: FloorId(floor),
            rack: RackId(rack),
            compartment: CompartmentId(compartment),
        }
    }

    /// Store products around the small fixture so pick routes have work:
    /// product 1 (heavy) in rack 1 (aisle x=1, y=1) and rack 11 (x=3, y=1),
    /// product 2 (light) in rack 2 (x=1, y=1, right side).
    fn stocked_state() -> WarehouseState {
        let state = small_state(1);
        let state = state
            .with_allocation(
                ProductNo(1),
                &[key(1, 1, 1), key(1, 1, 1), key(1, 11, 1), key(1, 11, 1)],
            )
            .unwrap();
        state
            .with_allocation(ProductNo(2), &[key(1, 2, 1), key(1, 2, 1)])
            .unwrap()
    }

    #[test]
    fn heuristic_value_examples() {
        assert_eq!(heuristic_value(1.0, 1.0), 1.0);
        assert_eq!(heuristic_value(4.0, 0.0), 0.0);
        assert_eq!(heuristic_value(4.0, 1.0), 0.25);
    }

    #[test]
    fn transition_probability_examples() {
        let state = stocked_state();
        let graph = build_market_graph(&state, 50.0).unwrap();
        let params = AcoParams::default();
        let pheromones = PheromoneMatrices::new(graph.len(), &params);

        // Single candidate: probability 1.
        let (probs, sum) = transition_probability(
            MarketId(0),
            &[MarketId(1)],
            &[0.5],
            &pheromones,
            0,
            1.0,
            2.0,
        );
        assert_eq!(probs.len(), 1);
        assert!((probs[0].1 - 1.0).abs() < 1e-12);
        assert!((sum - 1.0).abs() < 1e-12);

        // Equal tau and eta: uniform.
        let (probs, _) = transition_probability(
            MarketId(0),
            &[MarketId(1), MarketId(2)],
            &[0.5, 0.5],
            &pheromones,
            0,
            1.0,
            2.0,
        );
        assert!((probs[0].1 - 0.5).abs() < 1e-12);
        assert!((probs[1].1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn transition_probability_ratio() {
        // tau = (2, 1), eta = (1, 1), alpha 1, beta 2 -> (2/3, 1/3).
        let state = stocked_state();
        let graph = build_market_graph(&state, 50.0).unwrap();
        let params = AcoParams {
            tau_min: 0.5,
            tau_max: 2.0,
            ..AcoParams::default()
        };
        let mut pheromones = PheromoneMatrices::new(graph.len(), &params);
        // All edges start at tau_max = 2; halve everything, then lift the
        // first edge back to 2.
        pheromones.evaporate(0, 0.5);
        pheromones.deposit(0, MarketId(0), MarketId(1), 1.0);
        let (probs, sum) = transition_probability(
            MarketId(0),
            &[MarketId(1), MarketId(2)],
            &[1.0, 1.0],
            &pheromones,
            0,
            1.0,
            2.0,
        );
        assert!((probs[0].1 - 2.0 / 3.0).abs() < 1e-12);
        assert!((probs[1].1 - 1.0 / 3.0).abs() < 1e-12);
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_market_route_when_fully_stocked() {
        // The middle cross aisle (row 4) reaches two sub-aisles of lane 0:
        // the upper half of block 0 and the lower half of block 1. Heavy
        // product 1 goes to rack 7 (block 1, y=5), light product 2 to rack 5
        // (block 0, y=3): one market visit can pick both racks.
        let state = small_state(1);
        let state = state
            .with_allocation(ProductNo(1), &[key(1, 7, 1), key(1, 7, 1)])
            .unwrap()
            .with_allocation(ProductNo(2), &[key(1, 5, 1)])
            .unwrap();
        let graph = build_market_graph(&state, 50.0).unwrap();
        let list = PickList::new([(ProductNo(1), 2), (ProductNo(2), 1)]);
        let start = graph
            .markets()
            .iter()
            .find(|m| m.cross_row == 4 && m.lane == 0)
            .unwrap()
            .id;
        let params = AcoParams::default();
        let pheromones = PheromoneMatrices::new(graph.len(), &params);
        let mut rng = crate::rng::seeded(1);
        let route = construct_pick_route(
            &graph,
            &state,
            &list,
            start,
            &pheromones,
            &params,
            &mut rng,
            &mut NoopObserver,
        )
        .unwrap();
        assert_eq!(route.visits.len(), 1);
        // The rack providing the heavy product (8 kg) comes first.
        let racks: Vec<RackId> = route.visits[0].racks.iter().map(|r| r.rack_id).collect();
        assert_eq!(racks, vec![RackId(7), RackId(5)]);
        assert_eq!(route.violations, 0);

        // Picked quantities match the pick list exactly.
        let mut picked = std::collections::BTreeMap::new();
        for line in route.pick_lines() {
            *picked.entry(line.product).or_insert(0) += line.quantity;
        }
        assert_eq!(picked.get(&ProductNo(1)), Some(&2));
        assert_eq!(picked.get(&ProductNo(2)), Some(&1));
    }

    #[test]
    fn collection_respects_one_rack_per_sub_aisle() {
        // Racks 1 and 2 share a sub-aisle; needing both forces a revisit.
        let state = small_state(1);
        let state = state
            .with_allocation(ProductNo(1), &[key(1, 1, 1)])
            .unwrap()
            .with_allocation(ProductNo(2), &[key(1, 2, 1)])
            .unwrap();
        let graph = build_market_graph(&state, 50.0).unwrap();
        let list = PickList::new([(ProductNo(1), 1), (ProductNo(2), 1)]);
        let start = graph
            .markets()
            .iter()
            .find(|m| m.cross_row == 0 && m.lane == 0)
            .unwrap()
            .id;
        let params = AcoParams::default();
        let pheromones = PheromoneMatrices::new(graph.len(), &params);
        let mut rng = crate::rng::seeded(1);
        let route = construct_pick_route(
            &graph,
            &state,
            &list,
            start,
            &pheromones,
            &params,
            &mut rng,
            &mut NoopObserver,
        )
        .unwrap();
        assert!(route.visits.len() >= 2);
        for v in &route.visits {
            let mut aisles: Vec<_> = v.racks.iter().map(|r| r.sub_aisle).collect();
            aisles.sort();
            assert!(aisles.windows(2).all(|w| w[0] != w[1]));
        }
        let total: u32 = route.pick_lines().map(|l| l.quantity).sum();
        assert_eq!(total, 2);
    }

    #[test]
    fn reverse_route_examples() {
        let state = stocked_state();
        let graph = build_market_graph(&state, 50.0).unwrap();
        let list = PickList::new([(ProductNo(1), 4)]);
        // Needs racks 1 (lane 0) and 11 (lane 1): two markets.
        let seq: Vec<MarketId> = graph
            .markets()
            .iter()
            .filter(|m| m.cross_row == 0)
            .map(|m| m.id)
            .collect();
        let route = route_for_market_sequence(&graph, &state, &list, &seq, 3.0).unwrap();
        assert_eq!(route.visits.len(), 2);

        let reversed = reverse_route(&route, &graph, &state, &list, 3.0).unwrap();
        let mut expect = route.market_sequence();
        expect.reverse();
        assert_eq!(reversed.market_sequence(), expect);
        // Sides toggle and swap.
        assert_eq!(reversed.visits[0].entry, route.visits[1].exit.toggled());
        assert_eq!(reversed.visits[0].exit, route.visits[1].entry.toggled());

        // Reversing twice restores the market sequence.
        let twice = reverse_route(&reversed, &graph, &state, &list, 3.0).unwrap();
        assert_eq!(twice.market_sequence(), route.market_sequence());
    }

    #[test]
    fn single_market_reverse_toggles_side() {
        let state = stocked_state();
        let graph = build_market_graph(&state, 50.0).unwrap();
        let list = PickList::new([(ProductNo(2), 1)]);
        let start = graph
            .markets()
            .iter()
            .find(|m| m.cross_row == 0 && m.lane == 0)
            .unwrap()
            .id;
        let route = route_for_market_sequence(&graph, &state, &list, &[start], 3.0).unwrap();
        let reversed = reverse_route(&route, &graph, &state, &list, 3.0).unwrap();
        assert_eq!(reversed.visits.len(), 1);
        assert_eq!(reversed.visits[0].entry, route.visits[0].exit.toggled());
    }

    #[test]
    fn weight_violation_examples() {
        let line = |w: f64| PickLine {
            product: ProductNo(1),
            quantity: 1,
            weight: w,
        };
        let picks = [line(8.0), line(2.0)];
        assert_eq!(weight_violations(picks.iter(), 3.0), 0);
        let picks = [line(2.0), line(8.0)];
        assert_eq!(weight_violations(picks.iter(), 3.0), 1);
        let picks = [line(2.0), line(4.0), line(8.0)];
        assert_eq!(weight_violations(picks.iter(), 3.0), 1);
    }

    #[test]
    fn travel_distance_segments() {
        let state = stocked_state();
        let graph = build_market_graph(&state, 50.0).unwrap();
        let list = PickList::new([(ProductNo(2), 1)]);
        let start = graph
            .markets()
            .iter()
            .find(|m| m.cross_row == 0 && m.lane == 0)
            .unwrap()
            .id;
        let route = route_for_market_sequence(&graph, &state, &list, &[start], 3.0).unwrap();
        // Market center (1, 0); pd (2, 0): pd legs 1 + 1; rack 2 at depth 1:
        // round trip 2; entry and exit both face the pd side, cross 0.
        let market = graph.market(start);
        assert_eq!(market.center, (1.0, 0.0));
        assert_eq!(route.visits[0].entry, Side::Right);
        assert_eq!(route.visits[0].exit, Side::Right);
        assert_eq!(route.travel, 1.0 + 2.0 + 0.0 + 1.0);
        assert_eq!(travel_distance(&route, &graph), route.travel);
    }

    #[test]
    fn empty_pick_list_gives_zero_route() {
        let state = stocked_state();
        let graph = build_market_graph(&state, 50.0).unwrap();
        let params = AcoParams::default();
        let front = aco_optimize(
            &graph,
            &state,
            &PickList::default(),
            &params,
            &mut NoopObserver,
        )
        .unwrap();
        assert_eq!(front.len(), 1);
        assert_eq!(front.solutions()[0].0.travel, 0.0);
    }

    #[test]
    fn infeasible_order_is_reported() {
        let state = stocked_state();
        let graph = build_market_graph(&state, 50.0).unwrap();
        let params = AcoParams::default();
        let list = PickList::new([(ProductNo(1), 1000)]);
        assert!(matches!(
            aco_optimize(&graph, &state, &list, &params, &mut NoopObserver),
            Err(crate::error::Error::InfeasibleOrder(_))
        ));
    }

    #[test]
    fn pheromone_update_aco3_examples() {
        let state = stocked_state();
        let graph = build_market_graph(&state, 50.0).unwrap();
        let params = AcoParams::default();
        let mut pheromones = PheromoneMatrices::new(graph.len(), &params);
        // Evaporate from 25 down to about 10.
        while pheromones.get(0, MarketId(0), MarketId(1)) > 10.0 {
            pheromones.evaporate(0, 0.02);
        }
        let list = PickList::new([(ProductNo(1), 4)]);
        let seq: Vec<MarketId> = graph
            .markets()
            .iter()
            .filter(|m| m.cross_row == 0)
            .map(|m| m.id)
            .collect();
        let route = route_for_market_sequence(&graph, &state, &list, &seq, 3.0).unwrap();
        let front = ParetoFront::from_solutions(vec![(route.clone(), route.objectives())]);
        let edge = (route.visits[0].market, route.visits[1].market);

        let tau_rewarded = pheromones.get(0, edge.0, edge.1);
        let tau_other = pheromones.get(0, MarketId(3), MarketId(4));
        let mut rng = crate::rng::seeded(5);
        pheromone_update_aco3(&mut pheromones, &front, &front, 0.02, &mut rng);
        assert!(
            (pheromones.get(0, edge.0, edge.1) - (tau_rewarded * 0.98 + 1.0)).abs() < 1e-12
        );
        // Unrewarded edges only evaporate.
        assert!((pheromones.get(0, MarketId(3), MarketId(4)) - tau_other * 0.98).abs() < 1e-12);

        // Repeated rewards saturate at tau_max.
        for _ in 0..300 {
            pheromone_update_aco3(&mut pheromones, &front, &front, 0.02, &mut rng);
        }
        assert!(pheromones.get(0, edge.0, edge.1) <= 25.0);
    }

    #[test]
    fn pheromone_update_aco4_examples() {
        let state = stocked_state();
        let graph = build_market_graph(&state, 50.0).unwrap();
        let params = AcoParams {
            variant: AcoVariant::Aco4,
            ..AcoParams::default()
        };
        let mut pheromones = PheromoneMatrices::new(graph.len(), &params);

        let list = PickList::new([(ProductNo(1), 4)]);
        let seq: Vec<MarketId> = graph
            .markets()
            .iter()
            .filter(|m| m.cross_row == 0)
            .map(|m| m.id)
            .collect();
        let route = route_for_market_sequence(&graph, &state, &list, &seq, 3.0).unwrap();
        let edge = (route.visits[0].market, route.visits[1].market);

        // of(ib) == of(gb): delta = 1; from tau_max everything stays clamped.
        let gb = [
            route.objectives().values()[0],
            route.objectives().values()[1],
        ];
        pheromone_update_aco4(&mut pheromones, &[&route, &route], &gb, 0.02);
        assert_eq!(pheromones.get(0, edge.0, edge.1), 25.0);

        // of(ib) = of(gb) + 2: delta = 1/3; matrices update independently.
        pheromones.evaporate(0, 0.2);
        pheromones.evaporate(1, 0.2);
        let gb_shifted = [gb[0] - 2.0, gb[1]];
        let tau0_before = pheromones.get(0, edge.0, edge.1);
        let tau1_before = pheromones.get(1, edge.0, edge.1);
        pheromone_update_aco4(&mut pheromones, &[&route, &route], &gb_shifted, 0.02);
        let expect0 = (tau0_before * 0.98 + 1.0 / 3.0).min(25.0);
        let expect1 = (tau1_before * 0.98 + 1.0).min(25.0);
        assert!((pheromones.get(0, edge.0, edge.1) - expect0).abs() < 1e-12);
        assert!((pheromones.get(1, edge.0, edge.1) - expect1).abs() < 1e-12);
    }

    #[test]
    fn aco_seed_determinism() {
        let state = stocked_state();
        let graph = build_market_graph(&state, 50.0).unwrap();
        let params = AcoParams {
            max_iter: 15,
            max_cons_iter_wo_impr: 5,
            seed: 99,
            ..AcoParams::default()
        };
        let list = PickList::new([(ProductNo(1), 4), (ProductNo(2), 2)]);
        let a = aco_optimize(&graph, &state, &list, &params, &mut NoopObserver).unwrap();
        let b = aco_optimize(&graph, &state, &list, &params, &mut NoopObserver).unwrap();
        assert_eq!(a.vectors(), b.vectors());
        assert_eq!(
            a.solutions()
                .iter()
                .map(|(r, _)| r.market_sequence())
                .collect::<Vec<_>>(),
            b.solutions()
                .iter()
                .map(|(r, _)| r.market_sequence())
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn sshape_front_is_nondominated_and_confined() {
        let state = stocked_state();
        let graph = build_market_graph(&state, 50.0).unwrap();
        // All items in lane-0 racks (1 and 2).
        let list = PickList::new([(ProductNo(1), 2), (ProductNo(2), 2)]);
        let front = s_shape_routes(&graph, &state, &list, 3.0).unwrap();
        assert!(!front.is_empty());
        for (route, _) in front.iter() {
            assert!(route.visits.iter().all(|v| graph.market(v.market).lane == 0));
        }
        let vectors = front.vectors();
        for a in &vectors {
            for b in &vectors {
                if a != b {
                    assert!(!crate::moo::dominates(a, b).unwrap());
                }
            }
        }
    }

    use crate::moo::ParetoFront;
}
