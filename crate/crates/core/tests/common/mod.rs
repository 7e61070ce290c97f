//! Shared fixtures for the integration tests: hand-built tiny warehouses
//! with controllable stock, plus independent brute-force oracles.
//!
//! Not every test binary uses every helper.
#![allow(dead_code)]

use std::collections::BTreeMap;

use mezzopt_core::moo::ObjectiveVector;
use mezzopt_core::pick::{MarketGraph, PickRoute};
use mezzopt_core::storage::FloorContext;
use mezzopt_core::warehouse::*;

/// A one-floor warehouse with a single narrow rack aisle per lane and one
/// block: width 4, cross aisles at 0 and `bays + 1`, racks on both sides of
/// x = 1 and x = 3. Rack capacity for every product is `capacity` items
/// (one compartment in the low zone, one in the grip zone).
pub fn tiny_warehouse(bays: i64, products: Vec<Product>, rules: Vec<AssociationRule>) -> WarehouseState {
    let height = bays + 1;
    let layout = Layout {
        width: 4,
        height,
        pd_points: vec![GridPoint::new(2, 0)],
        cross_aisle_rows: vec![0, height],
        pick_aisles: vec![
            PickAisle {
                x: 1,
                kind: AisleKind::Narrow,
            },
            PickAisle {
                x: 2,
                kind: AisleKind::Wide,
            },
            PickAisle {
                x: 3,
                kind: AisleKind::Narrow,
            },
        ],
    };
    let config = RackConfiguration {
        id: ConfigId(1),
        shelf_levels: 2,
        compartments_per_shelf: 1,
        compartments: vec![
            Compartment {
                id: CompartmentId(1),
                dims: Dims::new(1.0, 0.5, 1.0),
                shelf_level: 0,
                shelf_position: 0,
                bottom_height: 0.0,
            },
            Compartment {
                id: CompartmentId(2),
                dims: Dims::new(1.0, 0.4, 1.0),
                shelf_level: 1,
                shelf_position: 0,
                bottom_height: 0.8,
            },
        ],
    };
    let mut racks = Vec::new();
    let mut next_id = 1;
    for (aisle_idx, &x) in [1i64, 3].iter().enumerate() {
        for (bay, y) in (1..=bays).enumerate() {
            for side in [Side::Left, Side::Right] {
                racks.push(Rack {
                    rack_id: RackId(next_id),
                    floor: FloorId(1),
                    access_point: GridPoint::new(x, y),
                    bay_number: bay as u32 + 1,
                    block: 0,
                    sub_aisle: SubAisleId(aisle_idx as u32),
                    side,
                    config: ConfigId(1),
                });
                next_id += 1;
            }
        }
    }
    WarehouseState::new(1, layout, vec![config], racks, products, rules, vec![]).unwrap()
}

/// A compact product: half-shelf box (capacity 4 + 2 per rack), the given
/// weight, rank and order-frequency gaussian.
pub fn product(number: u32, weight: f64, rank: u32, mu: f64, sigma: f64) -> Product {
    Product {
        number: ProductNo(number),
        dims: Dims::new(0.5, 0.25, 0.5),
        weight,
        rank,
        order_frequency: (mu, sigma),
    }
}

/// Independent Pareto filter: keep exactly the vectors not strictly
/// dominated by any other (componentwise, in minimization view).
pub fn brute_pareto(vectors: &[ObjectiveVector]) -> Vec<ObjectiveVector> {
    let min_view = |v: &ObjectiveVector| -> Vec<f64> {
        (0..v.arity()).map(|i| v.min_view(i)).collect()
    };
    let dominates = |a: &ObjectiveVector, b: &ObjectiveVector| -> bool {
        let (x, y) = (min_view(a), min_view(b));
        x.iter().zip(&y).all(|(p, q)| p <= q) && x.iter().zip(&y).any(|(p, q)| p < q)
    };
    let mut kept: Vec<ObjectiveVector> = Vec::new();
    for v in vectors {
        if vectors.iter().any(|o| dominates(o, v)) {
            continue;
        }
        if !kept.iter().any(|k| k == v) {
            kept.push(v.clone());
        }
    }
    kept
}

/// Enumerate every feasible rack-count assignment of `quantity` items over
/// the fitting racks of a floor context and return the exact Pareto front
/// of the four storage scores.
pub fn exhaustive_storage_front(ctx: &FloorContext, quantity: u32) -> Vec<ObjectiveVector> {
    let mut vectors = Vec::new();
    let fitting = ctx.fitting.clone();
    let mut counts = vec![0u32; ctx.num_racks()];
    fn recurse(
        ctx: &FloorContext,
        fitting: &[usize],
        idx: usize,
        left: u32,
        counts: &mut Vec<u32>,
        out: &mut Vec<ObjectiveVector>,
    ) {
        if idx == fitting.len() {
            if left == 0 {
                out.push(ctx.evaluate_counts(counts));
            }
            return;
        }
        let rack = fitting[idx];
        let max_here = ctx.remaining[rack].min(left);
        for take in 0..=max_here {
            counts[rack] = take;
            recurse(ctx, fitting, idx + 1, left - take, counts, out);
        }
        counts[rack] = 0;
    }
    recurse(ctx, &fitting, 0, quantity, &mut counts, &mut vectors);
    brute_pareto(&vectors)
}

/// Replay a route's geometry directly on the warehouse grid, independent of
/// the graph's precomputed edge weights: p/d legs, per-visit cross-lane
/// spans and sub-aisle round trips, and center-to-center market legs with
/// the floor penalty.
pub fn segment_sum_travel(
    route: &PickRoute,
    graph: &MarketGraph,
    state: &WarehouseState,
    floor_penalty: f64,
) -> f64 {
    if route.visits.is_empty() {
        return 0.0;
    }
    let center = |m: mezzopt_core::pick::MarketId| -> (f64, f64, u32) {
        let market = graph.market(m);
        (market.center.0, market.center.1, market.floor.0)
    };
    let manhattan = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).abs() + (a.1 - b.1).abs();

    let first = center(route.visits[0].market);
    let last = center(route.visits[route.visits.len() - 1].market);
    let mut total = manhattan(
        (route.start_pd.x as f64, route.start_pd.y as f64),
        (first.0, first.1),
    );
    total += manhattan((route.end_pd.x as f64, route.end_pd.y as f64), (last.0, last.1));

    for (i, visit) in route.visits.iter().enumerate() {
        let market = graph.market(visit.market);
        if i > 0 {
            let a = center(route.visits[i - 1].market);
            let b = center(visit.market);
            total += manhattan((a.0, a.1), (b.0, b.1))
                + floor_penalty * (a.2 as f64 - b.2 as f64).abs();
        }
        total += (market.entrance_x(visit.entry) - market.entrance_x(visit.exit)).abs() as f64;
        // Sub-aisle round trips from the rack's access point back to the
        // cross lane, re-derived from the warehouse state.
        for rack_pick in &visit.racks {
            let rack = state
                .rack_by_key(rack_pick.floor, rack_pick.rack_id)
                .expect("route references existing rack");
            let depth = (rack.access_point.y - market.cross_row).abs();
            total += 2.0 * depth as f64;
        }
    }
    total
}

/// Total picked quantity per product across a route.
pub fn picked_quantities(route: &PickRoute) -> BTreeMap<ProductNo, u32> {
    let mut picked = BTreeMap::new();
    for line in route.pick_lines() {
        *picked.entry(line.product).or_insert(0) += line.quantity;
    }
    picked
}

/// Check a route against the picking hard constraints: picked quantities
/// match the pick list exactly, at most one rack per sub-aisle per market
/// visit, and no rack over-picked beyond its stock.
pub fn assert_route_feasible(
    route: &PickRoute,
    state: &WarehouseState,
    expected: &BTreeMap<ProductNo, u32>,
) {
    assert_eq!(&picked_quantities(route), expected, "HC2: picked != ordered");
    for visit in &route.visits {
        let mut aisles: Vec<_> = visit.racks.iter().map(|r| r.sub_aisle).collect();
        aisles.sort();
        assert!(
            aisles.windows(2).all(|w| w[0] != w[1]),
            "assumption iv: one rack per sub-aisle per visit"
        );
    }
    let mut per_rack: BTreeMap<(FloorId, RackId, ProductNo), u32> = BTreeMap::new();
    for visit in &route.visits {
        for rack_pick in &visit.racks {
            for line in &rack_pick.picks {
                *per_rack
                    .entry((rack_pick.floor, rack_pick.rack_id, line.product))
                    .or_insert(0) += line.quantity;
            }
        }
    }
    for ((floor, rack_id, product), picked) in per_rack {
        let ri = state.rack_index(floor, rack_id).expect("rack exists");
        let stock = state.rack_contents(ri).get(&product).copied().unwrap_or(0);
        assert!(
            picked <= stock,
            "rack {rack_id} over-picked: {picked} of {stock}"
        );
    }
}
