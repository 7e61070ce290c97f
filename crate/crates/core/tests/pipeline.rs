//! Cross-module pipeline invariants: elitism traces, trade-off selection
//! stability, conservation laws, hard-constraint fuzzing and document
//! round-trips.

mod common;

use common::*;

use mezzopt_core::moo::{weakly_dominates, ObjectiveVector, ParetoFront};
use mezzopt_core::pick::{
    aco_optimize, build_market_graph, AcoObserver, AcoParams, NoopObserver, PickList,
};
use mezzopt_core::rng;
use mezzopt_core::storage::{
    nsga2_assign_floor_traced, select_tradeoff, solve_storage, split_across_floors,
    AssignmentTask, Chromosome, NsgaParams, ScoreConfig, StoragePolicy,
};
use mezzopt_core::warehouse::{
    load_state, save_state, FloorId, ProductNo, RackId, WarehouseDocument,
};

use rand::Rng as _;

#[test]
fn nsga_front_history_never_loses_vectors() {
    let products = vec![
        product(1, 8.0, 1, 2.0, 1.0),
        product(2, 2.0, 2, 1.0, 0.5),
    ];
    let state = tiny_warehouse(3, products, vec![]);
    let task = AssignmentTask {
        product: ProductNo(1),
        quantity: 4,
    };
    let params = NsgaParams {
        parent_pop_size: 20,
        max_generations: 40,
        seed: 7,
        ..NsgaParams::default()
    };
    let (_, trace) = nsga2_assign_floor_traced(
        &task,
        FloorId(1),
        task.quantity,
        &state,
        &params,
        &ScoreConfig::default(),
    )
    .unwrap();
    assert!(trace.len() >= 2);
    for window in trace.windows(2) {
        for old in &window[0] {
            assert!(
                window[1].iter().any(|new| weakly_dominates(new, old)),
                "a non-dominated vector vanished between generations"
            );
        }
    }
}

#[test]
fn tradeoff_selection_is_affine_invariant() {
    let chromosome = |tag: u32| Chromosome {
        floor: FloorId(1),
        genes: vec![RackId(tag)],
    };
    let vector = |values: [f64; 4]| ObjectiveVector::maximizing(values.to_vec()).unwrap();
    let entries = vec![
        (chromosome(1), vector([-4.0, -1.0, 0.2, -3.0])),
        (chromosome(2), vector([-2.0, -2.0, 0.6, -2.0])),
        (chromosome(3), vector([-1.0, -4.0, 1.0, -1.0])),
    ];
    let front = ParetoFront::from_solutions(entries.clone());
    let picked = select_tradeoff(&front).unwrap().0.genes.clone();

    // Rescale the third objective: x -> 10x + 3.
    let rescaled: Vec<(Chromosome, ObjectiveVector)> = entries
        .into_iter()
        .map(|(c, v)| {
            let mut values = v.values().to_vec();
            values[2] = 10.0 * values[2] + 3.0;
            (c, ObjectiveVector::maximizing(values).unwrap())
        })
        .collect();
    let front = ParetoFront::from_solutions(rescaled);
    assert_eq!(select_tradeoff(&front).unwrap().0.genes, picked);
}

#[test]
fn tradeoff_singleton_and_ideal_point() {
    let vector = |values: [f64; 4]| ObjectiveVector::maximizing(values.to_vec()).unwrap();
    let single = ParetoFront::from_solutions(vec![(
        Chromosome {
            floor: FloorId(1),
            genes: vec![RackId(9)],
        },
        vector([-1.0, -1.0, 0.5, 0.0]),
    )]);
    assert_eq!(select_tradeoff(&single).unwrap().0.genes, vec![RackId(9)]);
}

#[test]
fn phase_one_conserves_quantity() {
    let products = vec![product(1, 5.0, 1, 3.0, 1.5)];
    let state = tiny_warehouse(3, products, vec![]);
    for quantity in [1u32, 3, 7, 11] {
        let task = AssignmentTask {
            product: ProductNo(1),
            quantity,
        };
        let split = split_across_floors(&task, &state, &mut rng::seeded(quantity as u64)).unwrap();
        assert_eq!(split.iter().map(|&(_, q)| q).sum::<u32>(), quantity);
    }
}

/// Fuzz: every storage policy's allocation passes the hard-constraint
/// validator on randomized tasks and states.
#[test]
fn storage_policies_never_violate_hard_constraints() {
    let config = ScoreConfig::default();
    let mut checked = 0;
    for seed in 0..40u64 {
        let mut rng = rng::seeded(seed);
        let products = vec![
            product(1, 8.0, 1, 2.0, 1.0),
            product(2, 2.0, 2, 1.0, 0.5),
            product(3, 5.0, 3, 2.0, 1.0),
        ];
        let rules = vec![mezzopt_core::warehouse::AssociationRule {
            lhs: ProductNo(1),
            rhs: ProductNo(3),
            confidence: 0.7,
        }];
        let mut state = tiny_warehouse(4, products, rules);
        // Random pre-fill.
        for _ in 0..rng.random_range(0..6) {
            let p = ProductNo(rng.random_range(1..=3));
            let rack = RackId(rng.random_range(1..=16));
            let key = mezzopt_core::warehouse::CompartmentKey {
                floor: FloorId(1),
                rack,
                compartment: mezzopt_core::warehouse::CompartmentId(rng.random_range(1..=2)),
            };
            if state.remaining_capacity(key, state.product(p).unwrap()) > 0 {
                state = state.with_allocation(p, &[key]).unwrap();
            }
        }
        let task = AssignmentTask {
            product: ProductNo(rng.random_range(1..=3)),
            quantity: rng.random_range(1..=6),
        };
        let params = NsgaParams {
            parent_pop_size: 12,
            max_generations: 12,
            ..NsgaParams::default()
        };
        for policy in [
            StoragePolicy::Nsga2,
            StoragePolicy::Random,
            StoragePolicy::ClosestOpen,
            StoragePolicy::RankBased,
        ] {
            let outcome =
                solve_storage(&state, &task, policy, &params, &config, seed, seed ^ 0x77).unwrap();
            let violations = state.validate_storage_solution(
                task.product,
                task.quantity,
                &outcome.allocation.placements,
            );
            assert!(
                violations.is_empty(),
                "seed {seed} policy {policy:?}: {violations:?}"
            );
            // Applying the allocation yields a consistent successor state.
            state
                .with_allocation(task.product, &outcome.allocation.placements)
                .unwrap();
            checked += 1;
        }
    }
    assert_eq!(checked, 160);
}

/// Fuzz: routes from both ACO variants and every start condition satisfy
/// the picking hard constraints.
#[test]
fn pick_routes_never_violate_hard_constraints() {
    for seed in 0..25u64 {
        let mut rng = rng::seeded(seed ^ 0xBEE);
        let products = vec![
            product(1, 8.0, 1, 2.0, 1.0),
            product(2, 2.0, 2, 1.0, 0.5),
            product(3, 5.0, 3, 2.0, 1.0),
        ];
        let mut state = tiny_warehouse(4, products, vec![]);
        for _ in 0..10 {
            let p = ProductNo(rng.random_range(1..=3));
            let rack = RackId(rng.random_range(1..=16));
            let key = mezzopt_core::warehouse::CompartmentKey {
                floor: FloorId(1),
                rack,
                compartment: mezzopt_core::warehouse::CompartmentId(1),
            };
            if state.remaining_capacity(key, state.product(p).unwrap()) > 0 {
                state = state.with_allocation(p, &[key]).unwrap();
            }
        }
        let graph = build_market_graph(&state, 50.0).unwrap();
        let mut wanted = std::collections::BTreeMap::new();
        for p in 1..=3u32 {
            let available = state.product_total(ProductNo(p));
            if available > 0 && rng.random_bool(0.8) {
                wanted.insert(ProductNo(p), rng.random_range(1..=available));
            }
        }
        if wanted.is_empty() {
            continue;
        }
        let list = PickList::new(wanted.iter().map(|(&p, &q)| (p, q)));
        for variant in [
            mezzopt_core::pick::AcoVariant::Aco3,
            mezzopt_core::pick::AcoVariant::Aco4,
        ] {
            let params = AcoParams {
                variant,
                max_iter: 8,
                max_cons_iter_wo_impr: 3,
                seed,
                ..AcoParams::default()
            };
            let front = aco_optimize(&graph, &state, &list, &params, &mut NoopObserver).unwrap();
            assert!(!front.is_empty());
            for (route, _) in front.iter() {
                assert_route_feasible(route, &state, &wanted);
            }
        }
        let sshape =
            mezzopt_core::pick::s_shape_routes(&graph, &state, &list, 3.0).unwrap();
        for (route, _) in sshape.iter() {
            assert_route_feasible(route, &state, &wanted);
        }
    }
}

/// The ACO global front never loses a non-dominated vector between
/// iterations except across a cataclysm.
#[test]
fn aco_global_front_is_elitist_between_cataclysms() {
    struct FrontTracker {
        previous: Option<Vec<ObjectiveVector>>,
        violations: u32,
    }
    impl AcoObserver for FrontTracker {
        fn on_iteration(&mut self, global: &[ObjectiveVector], cataclysm: bool) {
            if cataclysm {
                self.previous = None;
                return;
            }
            if let Some(prev) = &self.previous {
                for old in prev {
                    if !global.iter().any(|new| weakly_dominates(new, old)) {
                        self.violations += 1;
                    }
                }
            }
            self.previous = Some(global.to_vec());
        }
    }

    let (state, list) = {
        let products = vec![
            product(1, 8.0, 1, 2.0, 1.0),
            product(2, 2.0, 2, 1.0, 0.5),
        ];
        let mut state = tiny_warehouse(4, products, vec![]);
        for rack in [1u32, 4, 9, 14] {
            let key = mezzopt_core::warehouse::CompartmentKey {
                floor: FloorId(1),
                rack: RackId(rack),
                compartment: mezzopt_core::warehouse::CompartmentId(1),
            };
            state = state.with_allocation(ProductNo(1 + rack % 2), &[key, key]).unwrap();
        }
        (state, PickList::new([(ProductNo(1), 3), (ProductNo(2), 2)]))
    };
    let graph = build_market_graph(&state, 50.0).unwrap();
    let params = AcoParams {
        max_iter: 60,
        max_cons_iter_wo_impr: 8,
        max_cataclysms: 2,
        seed: 3,
        ..AcoParams::default()
    };
    let mut tracker = FrontTracker {
        previous: None,
        violations: 0,
    };
    aco_optimize(&graph, &state, &list, &params, &mut tracker).unwrap();
    assert_eq!(tracker.violations, 0);
}

#[test]
fn warehouse_document_round_trip_is_lossless() {
    let mut rng = rng::seeded(17);
    let products = vec![
        product(1, 8.0, 1, 2.0, 1.0),
        product(2, 2.0, 2, 1.0, 0.5),
    ];
    let rules = vec![mezzopt_core::warehouse::AssociationRule {
        lhs: ProductNo(1),
        rhs: ProductNo(2),
        confidence: 0.42,
    }];
    let mut state = tiny_warehouse(3, products, rules);
    for _ in 0..5 {
        let p = ProductNo(rng.random_range(1..=2));
        let key = mezzopt_core::warehouse::CompartmentKey {
            floor: FloorId(1),
            rack: RackId(rng.random_range(1..=12)),
            compartment: mezzopt_core::warehouse::CompartmentId(rng.random_range(1..=2)),
        };
        if state.remaining_capacity(key, state.product(p).unwrap()) > 0 {
            state = state.with_allocation(p, &[key]).unwrap();
        }
    }

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("warehouse.json");
    save_state(&state, &path).unwrap();
    let loaded = load_state(&path).unwrap();
    assert_eq!(
        serde_json::to_string(&WarehouseDocument::from_state(&state)).unwrap(),
        serde_json::to_string(&WarehouseDocument::from_state(&loaded)).unwrap()
    );

    // Saving the loaded state reproduces the file byte for byte.
    let path2 = dir.path().join("warehouse2.json");
    save_state(&loaded, &path2).unwrap();
    assert_eq!(
        std::fs::read(&path).unwrap(),
        std::fs::read(&path2).unwrap()
    );
}
