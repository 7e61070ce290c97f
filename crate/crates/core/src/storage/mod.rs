//! The 3-phase storage-assignment pipeline: quantity split across floors,
//! per-floor NSGA-II rack selection over four objective scores, and
//! penalty-driven compartment placement; plus three baseline policies.

pub mod nsga;
pub mod operators;
pub mod policy;
pub mod score;

pub use nsga::{
    combine_floor_fronts, nsga2_assign, nsga2_assign_floor_traced, select_tradeoff, solve_nsga2,
    NsgaParams, StorageOutcome,
};
pub use policy::{solve_storage, StoragePolicy};
pub use score::{
    correlation_score, distance_score, quantity_score, spread_score, AreaPartition, FloorContext,
    ScoreConfig, MASK_MODS,
};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moo::ObjectiveVector;
use crate::rng::Rng;
use crate::warehouse::{
    compartment_capacity, movement_class, weight_class, zone_of, Compartment, CompartmentKey,
    FloorId, MovementClass, ProductNo, RackId, WarehouseState, WeightClass, Zone,
};

/// One storage task: a quantity of a single product to put away.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentTask {
    pub product: ProductNo,
    pub quantity: u32,
}

/// A candidate rack selection for one floor: one gene (rack id) per
/// incoming item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chromosome {
    pub floor: FloorId,
    pub genes: Vec<RackId>,
}

impl Chromosome {
    /// Lexicographic gene order, used as a deterministic tie-break.
    pub fn lex_cmp(&self, other: &Chromosome) -> std::cmp::Ordering {
        self.genes
            .iter()
            .map(|g| g.0)
            .cmp(other.genes.iter().map(|g| g.0))
    }
}

/// The final product of a storage solve: a compartment per item plus the
/// objective scores of the selected rack choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorageAllocation {
    pub product: ProductNo,
    pub quantity: u32,
    pub placements: Vec<CompartmentKey>,
    /// (spread, distance, quantity, correlation), summed over floors.
    pub scores: ObjectiveVector,
}

/// Phase 1: split the incoming quantity across floors so every floor ends up
/// with as equal a total as its remaining capacity allows. Rounding
/// leftovers go to a seeded-random floor among the least-filled.
pub fn split_across_floors(
    task: &AssignmentTask,
    state: &WarehouseState,
    rng: &mut Rng,
) -> Result<Vec<(FloorId, u32)>> {
    let product = state
        .product(task.product)
        .ok_or_else(|| Error::usage(format!("unknown product {}", task.product)))?;
    let floors: Vec<FloorId> = state.floor_ids().collect();
    let mut totals: Vec<u32> = floors
        .iter()
        .map(|&f| state.floor_product_total(f, task.product))
        .collect();
    let caps: Vec<u32> = floors
        .iter()
        .map(|&f| {
            state
                .rack_indices(f)
                .iter()
                .map(|&ri| state.rack_remaining_capacity(ri, product))
                .sum()
        })
        .collect();
    if caps.iter().map(|&c| c as u64).sum::<u64>() < task.quantity as u64 {
        return Err(Error::infeasible_task(format!(
            "incoming quantity {} of product {} exceeds the remaining warehouse capacity",
            task.quantity, task.product
        )));
    }
    let mut assigned = vec![0u32; floors.len()];
    for _ in 0..task.quantity {
        let candidates: Vec<usize> = (0..floors.len())
            .filter(|&i| assigned[i] < caps[i])
            .collect();
        let min_total = candidates.iter().map(|&i| totals[i]).min().unwrap();
        let tied: Vec<usize> = candidates
            .into_iter()
            .filter(|&i| totals[i] == min_total)
            .collect();
        let pick = tied[rng.random_range(0..tied.len())];
        assigned[pick] += 1;
        totals[pick] += 1;
    }
    Ok(floors.into_iter().zip(assigned).collect())
}

/// Penalty for storing a product of the given weight class in a zone.
pub fn weight_penalty(zone: Zone, class: WeightClass) -> u32 {
    match (zone, class) {
        (Zone::High, WeightClass::Light) => 0,
        (Zone::High, WeightClass::Medium) => 2,
        (Zone::High, WeightClass::Heavy) => 3,
        (Zone::Grip, WeightClass::Light) => 1,
        (Zone::Grip, WeightClass::Medium) => 0,
        (Zone::Grip, WeightClass::Heavy) => 0,
        (Zone::Low, WeightClass::Light) => 0,
        (Zone::Low, WeightClass::Medium) => 1,
        (Zone::Low, WeightClass::Heavy) => 1,
    }
}

/// Penalty for storing a product of the given movement class in a zone.
pub fn rank_penalty(zone: Zone, class: MovementClass) -> u32 {
    match (zone, class) {
        (Zone::High, MovementClass::Slow) => 0,
        (Zone::High, MovementClass::Moderate) => 0,
        (Zone::High, MovementClass::Fast) => 2,
        (Zone::Grip, MovementClass::Slow) => 3,
        (Zone::Grip, MovementClass::Moderate) => 1,
        (Zone::Grip, MovementClass::Fast) => 0,
        (Zone::Low, MovementClass::Slow) => 0,
        (Zone::Low, MovementClass::Moderate) => 0,
        (Zone::Low, MovementClass::Fast) => 2,
    }
}

/// Phase 3: map a feasible chromosome onto compartments. Per rack,
/// compartments already holding the product fill up first (ascending id);
/// the rest goes to unoccupied fitting compartments in ascending
/// (penalty, id) order.
pub fn assign_compartments(
    chromosome: &Chromosome,
    state: &WarehouseState,
    product_no: ProductNo,
) -> Result<Vec<CompartmentKey>> {
    let product = state
        .product(product_no)
        .ok_or_else(|| Error::usage(format!("unknown product {product_no}")))?;
    let w_class = weight_class(product);
    let m_class = movement_class(product, state.products().len());

    let mut counts: std::collections::BTreeMap<RackId, u32> = std::collections::BTreeMap::new();
    for &g in &chromosome.genes {
        *counts.entry(g).or_insert(0) += 1;
    }

    let mut placements = Vec::with_capacity(chromosome.genes.len());
    for (rack_id, mut need) in counts {
        let rack = state.rack_by_key(chromosome.floor, rack_id).ok_or_else(|| {
            Error::usage(format!(
                "chromosome references unknown rack {rack_id} on floor {}",
                chromosome.floor
            ))
        })?;
        let config = state
            .configuration(rack.config)
            .ok_or_else(|| Error::usage(format!("rack {rack_id} has unknown configuration")))?;
        let key_of = |c: &Compartment| CompartmentKey {
            floor: chromosome.floor,
            rack: rack_id,
            compartment: c.id,
        };

        // Step 1: top up compartments that already hold this product.
        let mut own: Vec<&Compartment> = config
            .compartments
            .iter()
            .filter(|c| matches!(state.occupant(key_of(c)), Some((p, _)) if p == product_no))
            .collect();
        own.sort_by_key(|c| c.id);
        for c in own {
            if need == 0 {
                break;
            }
            let take = state.remaining_capacity(key_of(c), product).min(need);
            placements.extend(std::iter::repeat_n(key_of(c), take as usize));
            need -= take;
        }

        // Step 2: unoccupied compartments by ascending ergonomic penalty.
        let mut empty: Vec<(u32, u32, &Compartment)> = config
            .compartments
            .iter()
            .filter(|c| state.occupant(key_of(c)).is_none())
            .map(|c| {
                let zone = zone_of(c);
                let penalty = weight_penalty(zone, w_class) + rank_penalty(zone, m_class);
                (penalty, c.id.0, c)
            })
            .collect();
        empty.sort_by_key(|&(penalty, id, _)| (penalty, id));
        for (_, _, c) in empty {
            if need == 0 {
                break;
            }
            let take = compartment_capacity(c, product).min(need);
            placements.extend(std::iter::repeat_n(key_of(c), take as usize));
            need -= take;
        }

        if need > 0 {
            return Err(Error::usage(format!(
                "rack {rack_id} cannot absorb its selected quantity (repair contract violated)"
            )));
        }
    }
    Ok(placements)
}


#[cfg(test)]
mod tests {
    use super::fixtures::small_state;
    use super::*;
    use crate::warehouse::{CompartmentId, Zone};

    fn key(floor: u32, rack: u32, compartment: u32) -> CompartmentKey {
        CompartmentKey {
            floor: FloorId(floor),
            rack: RackId(rack),
            compartment: CompartmentId(compartment),
        }
    }

    #[test]
    fn split_matches_water_filling() {
        let state = small_state(2);
        // Pre-store 2 items on floor 1 and 4 on floor 2 (capacity 4 each).
        let state = state
            .with_allocation(
                ProductNo(1),
                &[
                    key(1, 1, 1),
                    key(1, 1, 1),
                    key(2, 1, 1),
                    key(2, 1, 1),
                    key(2, 2, 1),
                    key(2, 2, 1),
                ],
            )
            .unwrap();
        let task = AssignmentTask {
            product: ProductNo(1),
            quantity: 6,
        };
        let mut rng = crate::rng::seeded(7);
        let split = split_across_floors(&task, &state, &mut rng).unwrap();
        assert_eq!(split, vec![(FloorId(1), 4), (FloorId(2), 2)]);

        let task = AssignmentTask {
            product: ProductNo(2),
            quantity: 4,
        };
        let split = split_across_floors(&task, &state, &mut rng).unwrap();
        assert_eq!(split, vec![(FloorId(1), 2), (FloorId(2), 2)]);
    }

    #[test]
    fn split_conserves_quantity_and_reports_infeasible() {
        let state = small_state(2);
        let task = AssignmentTask {
            product: ProductNo(1),
            quantity: 1,
        };
        // A single leftover item lands on a seeded-random floor, reproducibly.
        let a = split_across_floors(&task, &state, &mut crate::rng::seeded(3)).unwrap();
        let b = split_across_floors(&task, &state, &mut crate::rng::seeded(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().map(|&(_, q)| q).sum::<u32>(), 1);

        let task = AssignmentTask {
            product: ProductNo(1),
            quantity: 1_000_000,
        };
        assert!(matches!(
            split_across_floors(&task, &state, &mut crate::rng::seeded(3)),
            Err(Error::InfeasibleTask(_))
        ));
    }

    #[test]
    fn penalty_tables() {
        assert_eq!(weight_penalty(Zone::Grip, WeightClass::Heavy), 0);
        assert_eq!(rank_penalty(Zone::Grip, MovementClass::Fast), 0);
        assert_eq!(weight_penalty(Zone::High, WeightClass::Heavy), 3);
        assert_eq!(rank_penalty(Zone::High, MovementClass::Fast), 2);
        assert_eq!(weight_penalty(Zone::Low, WeightClass::Medium), 1);
        assert_eq!(rank_penalty(Zone::Grip, MovementClass::Slow), 3);
    }

    #[test]
    fn compartment_assignment_prefers_partial_then_penalty() {
        let state = small_state(1);
        // Product 1 is heavy and fast: the grip compartment (id 2) has
        // penalty 0 + 0; the low compartment (id 1) has penalty 1 + 2.
        let chromosome = Chromosome {
            floor: FloorId(1),
            genes: vec![RackId(1), RackId(1)],
        };
        let placements = assign_compartments(&chromosome, &state, ProductNo(1)).unwrap();
        assert!(placements.iter().all(|k| k.compartment == CompartmentId(2)));

        // A partially filled same-product compartment wins over any empty one.
        let state = state
            .with_allocation(ProductNo(1), &[key(1, 1, 1)])
            .unwrap();
        let placements = assign_compartments(&chromosome, &state, ProductNo(1)).unwrap();
        assert_eq!(placements[0].compartment, CompartmentId(1));

        let violations = state.validate_storage_solution(ProductNo(1), 2, &placements);
        assert!(violations.is_empty(), "{violations:?}");
    }

    #[test]
    fn validation_flags_each_hard_constraint() {
        let state = small_state(1);
        // Occupy rack 1 compartment 1 with product 2.
        let state = state
            .with_allocation(ProductNo(2), &[key(1, 1, 1)])
            .unwrap();

        // HC2: placing product 1 into that compartment.
        let violations = state.validate_storage_solution(ProductNo(1), 1, &[key(1, 1, 1)]);
        assert!(matches!(
            violations.as_slice(),
            [crate::warehouse::Violation::MixedProduct { .. }]
        ));

        // HC3: 5 items into a compartment with capacity 4 (0.5 items in 1.0
        // box -> 2*2*... capacity is 8; use quantity beyond capacity).
        let cap = {
            let comp = state.compartment(key(1, 2, 1)).unwrap();
            crate::warehouse::compartment_capacity(comp, state.product(ProductNo(1)).unwrap())
        };
        let placements = vec![key(1, 2, 1); cap as usize + 1];
        let violations =
            state.validate_storage_solution(ProductNo(1), cap + 1, &placements);
        assert!(matches!(
            violations.as_slice(),
            [crate::warehouse::Violation::CapacityExceeded { .. }]
        ));

        // HC1: fewer placements than items.
        let violations = state.validate_storage_solution(ProductNo(1), 2, &[key(1, 2, 1)]);
        assert!(matches!(
            violations.as_slice(),
            [crate::warehouse::Violation::MissingPlacement { .. }]
        ));
    }
}
