//! The four storage-assignment objective scores and their shared evaluation
//! context.
//!
//! All four scores are maximized. Spread, distance and correlation are
//! negated deficit sums (0 at the ideal configuration); the quantity score
//! accumulates per-sub-aisle mask scores in [0, 1].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moo::ObjectiveVector;
use crate::warehouse::{FloorId, Product, ProductNo, RackId, WarehouseState};

use super::Chromosome;

/// Mask modifiers for the four quantity masks: single rack, facing pair,
/// half-sub-aisle window, whole sub-aisle.
pub const MASK_MODS: [f64; 4] = [1.0, 0.75, 0.5, 0.25];

/// How a floor is partitioned into equal areas for the spread score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AreaPartition {
    /// One area per block (the default).
    Blocks,
    /// A fixed number of equal-height horizontal bands.
    EqualBands(u32),
}

/// Scoring configuration shared by the NSGA-II and the baseline policies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreConfig {
    pub areas: AreaPartition,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig {
            areas: AreaPartition::Blocks,
        }
    }
}

/// One bay of a sub-aisle as local rack indices.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SlotView {
    pub left: Option<usize>,
    pub right: Option<usize>,
}

impl SlotView {
    fn racks(&self) -> impl Iterator<Item = usize> + '_ {
        self.left.into_iter().chain(self.right)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct SubAisleView {
    /// Bays ascending by y.
    pub slots: Vec<SlotView>,
}

#[derive(Debug, Clone)]
pub(crate) struct RuleView {
    /// Existing quantity of the correlated product per local rack.
    pub existing_cp: Vec<u32>,
    /// Target correlated quantity for this rule on this floor.
    pub ideal_corr_q: f64,
}

/// Precomputed evaluation context for one (product, floor, incoming
/// quantity) storage run. Everything chromosome-independent lives here.
pub struct FloorContext<'a> {
    pub state: &'a WarehouseState,
    pub product: &'a Product,
    pub floor: FloorId,
    pub incoming: u32,
    /// Global rack indices of this floor, ascending by rack id.
    pub rack_global: Vec<usize>,
    /// Rack id -> local index.
    pub rack_local: BTreeMap<RackId, usize>,
    /// Remaining capacity for the product per local rack.
    pub remaining: Vec<u32>,
    /// Existing quantity of the product per local rack.
    pub existing: Vec<u32>,
    /// Walking distance to the closest p/d-point per local rack.
    pub walk: Vec<f64>,
    /// Local rack indices with remaining capacity >= 1.
    pub fitting: Vec<usize>,
    /// Spread area index per local rack.
    pub area_of: Vec<usize>,
    pub num_areas: usize,
    /// Ideal walking distance for this product on this floor.
    pub ideal_dist: f64,
    /// Target quantity of the incoming product.
    pub tq: u32,
    pub(crate) sub_aisles: Vec<SubAisleView>,
    /// Sub-aisle index per local rack.
    pub sub_aisle_of: Vec<usize>,
    pub(crate) rules: Vec<RuleView>,
}

impl<'a> FloorContext<'a> {
    pub fn new(
        state: &'a WarehouseState,
        product_no: ProductNo,
        floor: FloorId,
        incoming: u32,
        config: &ScoreConfig,
    ) -> Result<Self> {
        let product = state
            .product(product_no)
            .ok_or_else(|| Error::usage(format!("unknown product {product_no}")))?;

        let mut rack_global: Vec<usize> = state.rack_indices(floor).to_vec();
        rack_global.sort_by_key(|&ri| state.racks()[ri].rack_id);
        let rack_local: BTreeMap<RackId, usize> = rack_global
            .iter()
            .enumerate()
            .map(|(local, &ri)| (state.racks()[ri].rack_id, local))
            .collect();

        let mut remaining = Vec::with_capacity(rack_global.len());
        let mut existing = Vec::with_capacity(rack_global.len());
        let mut walk = Vec::with_capacity(rack_global.len());
        for &ri in &rack_global {
            remaining.push(state.rack_remaining_capacity(ri, product));
            existing.push(
                state
                    .rack_contents(ri)
                    .get(&product_no)
                    .copied()
                    .unwrap_or(0),
            );
            walk.push(state.rack_walk_distance(&state.racks()[ri])? as f64);
        }
        let fitting: Vec<usize> = (0..rack_global.len())
            .filter(|&l| remaining[l] >= 1)
            .collect();

        let layout = state.layout();
        let blocks = layout.blocks();
        let (num_areas, area_of): (usize, Vec<usize>) = match config.areas {
            AreaPartition::Blocks => (
                blocks.len().max(1),
                rack_global
                    .iter()
                    .map(|&ri| state.racks()[ri].block as usize)
                    .collect(),
            ),
            AreaPartition::EqualBands(n) => {
                let n = n.max(1) as usize;
                let h = layout.height.max(1);
                (
                    n,
                    rack_global
                        .iter()
                        .map(|&ri| {
                            let y = state.racks()[ri].access_point.y;
                            (((y * n as i64) / h).clamp(0, n as i64 - 1)) as usize
                        })
                        .collect(),
                )
            }
        };

        // Ideal distance: rank-proportional index into the distance-sorted
        // rack list.
        let mut sorted_walk: Vec<f64> = walk.clone();
        sorted_walk.sort_by(f64::total_cmp);
        let rel_rank = product.rank as f64 / state.products().len().max(1) as f64;
        let ideal_dist = if sorted_walk.is_empty() {
            0.0
        } else {
            let idx = ((rel_rank * sorted_walk.len() as f64).floor() as usize)
                .min(sorted_walk.len() - 1);
            sorted_walk[idx]
        };

        let mut sub_aisles = Vec::new();
        let mut sub_aisle_of = vec![usize::MAX; rack_global.len()];
        for sa in state.sub_aisles(floor) {
            let mut slots = Vec::new();
            let sa_idx = sub_aisles.len();
            for slot in &sa.slots {
                let to_local = |g: Option<usize>| {
                    g.map(|ri| rack_local[&state.racks()[ri].rack_id])
                };
                let view = SlotView {
                    left: to_local(slot.left),
                    right: to_local(slot.right),
                };
                for l in view.racks() {
                    sub_aisle_of[l] = sa_idx;
                }
                slots.push(view);
            }
            sub_aisles.push(SubAisleView { slots });
        }

        let tq = product.target_quantity();
        let total_q_floor = existing.iter().sum::<u32>() + incoming;
        let q_clusters = (total_q_floor / tq.max(1)) as f64;
        let rules: Vec<RuleView> = state
            .rules_for(product_no)
            .filter_map(|rule| {
                let cp = state.product(rule.rhs)?;
                let existing_cp: Vec<u32> = rack_global
                    .iter()
                    .map(|&ri| state.rack_contents(ri).get(&rule.rhs).copied().unwrap_or(0))
                    .collect();
                let ideal_corr_q =
                    (q_clusters * cp.target_quantity() as f64 * rule.confidence).ceil();
                Some(RuleView {
                    existing_cp,
                    ideal_corr_q,
                })
            })
            .collect();

        Ok(FloorContext {
            state,
            product,
            floor,
            incoming,
            rack_global,
            rack_local,
            remaining,
            existing,
            walk,
            fitting,
            area_of,
            num_areas,
            ideal_dist,
            tq,
            sub_aisles,
            sub_aisle_of,
            rules,
        })
    }

    pub fn num_racks(&self) -> usize {
        self.rack_global.len()
    }

    pub fn local_of(&self, rack: RackId) -> Option<usize> {
        self.rack_local.get(&rack).copied()
    }

    pub fn rack_id(&self, local: usize) -> RackId {
        self.state.racks()[self.rack_global[local]].rack_id
    }

    /// Incoming item counts per local rack for a chromosome.
    pub fn counts_of(&self, chromosome: &Chromosome) -> Result<Vec<u32>> {
        let mut counts = vec![0u32; self.num_racks()];
        for gene in &chromosome.genes {
            let local = self.local_of(*gene).ok_or_else(|| {
                Error::usage(format!("gene rack {gene} not on floor {}", self.floor))
            })?;
            counts[local] += 1;
        }
        Ok(counts)
    }

    /// Existing + incoming quantity of the product, per local rack.
    fn totals(&self, counts: &[u32]) -> Vec<u32> {
        self.existing
            .iter()
            .zip(counts)
            .map(|(&e, &c)| e + c)
            .collect()
    }

    pub fn spread_score(&self, counts: &[u32]) -> f64 {
        let totals = self.totals(counts);
        let floor_total: u32 = totals.iter().sum();
        let ideal = floor_total as f64 / self.num_areas as f64;
        let mut per_area = vec![0.0f64; self.num_areas];
        for (local, &t) in totals.iter().enumerate() {
            per_area[self.area_of[local]] += t as f64;
        }
        -per_area.iter().map(|&t| (ideal - t).abs()).sum::<f64>()
    }

    pub fn distance_score(&self, counts: &[u32]) -> f64 {
        -counts
            .iter()
            .enumerate()
            .map(|(local, &c)| c as f64 * (self.ideal_dist - self.walk[local]).abs())
            .sum::<f64>()
    }

    /// Highest quantity of the product covered by mask `k` anywhere in the
    /// sub-aisle.
    fn mask_max(&self, sa: &SubAisleView, totals: &[u32], k: usize) -> u32 {
        let q = |local: usize| totals[local];
        let slot_q = |s: &SlotView| s.racks().map(q).sum::<u32>();
        match k {
            // Single rack.
            0 => sa
                .slots
                .iter()
                .flat_map(|s| s.racks())
                .map(q)
                .max()
                .unwrap_or(0),
            // Two facing racks.
            1 => sa.slots.iter().map(slot_q).max().unwrap_or(0),
            // Sliding window over half the sub-aisle's bays, both sides.
            2 => {
                let n = sa.slots.len();
                if n == 0 {
                    return 0;
                }
                let w = n.div_ceil(2);
                (0..=n - w)
                    .map(|start| sa.slots[start..start + w].iter().map(slot_q).sum::<u32>())
                    .max()
                    .unwrap_or(0)
            }
            // Whole sub-aisle.
            _ => sa.slots.iter().map(slot_q).sum(),
        }
    }

    pub fn quantity_score(&self, counts: &[u32]) -> f64 {
        let totals = self.totals(counts);
        let tq = self.tq.max(1) as f64;
        self.sub_aisles
            .iter()
            .map(|sa| {
                (0..4)
                    .map(|k| {
                        let q_factor = (self.mask_max(sa, &totals, k) as f64 / tq).min(1.0);
                        MASK_MODS[k] * q_factor
                    })
                    .fold(0.0, f64::max)
            })
            .sum()
    }

    /// Quantity of the product covered by mask `k` placed on top of the rack
    /// at `local`.
    fn mask_at(&self, local: usize, totals: &[u32], k: usize) -> u32 {
        let sa_idx = self.sub_aisle_of[local];
        if sa_idx == usize::MAX {
            return totals[local];
        }
        let sa = &self.sub_aisles[sa_idx];
        let q = |l: usize| totals[l];
        let slot_q = |s: &SlotView| s.racks().map(q).sum::<u32>();
        let bay = sa
            .slots
            .iter()
            .position(|s| s.racks().any(|l| l == local))
            .unwrap_or(0);
        match k {
            0 => totals[local],
            1 => slot_q(&sa.slots[bay]),
            2 => {
                let n = sa.slots.len();
                let w = n.div_ceil(2);
                (0..=n - w)
                    .filter(|&start| (start..start + w).contains(&bay))
                    .map(|start| sa.slots[start..start + w].iter().map(slot_q).sum::<u32>())
                    .max()
                    .unwrap_or(0)
            }
            _ => sa.slots.iter().map(slot_q).sum(),
        }
    }

    pub fn correlation_score(&self, counts: &[u32]) -> f64 {
        if self.rules.is_empty() {
            return 0.0;
        }
        let totals = self.totals(counts);
        let tq = self.tq.max(1) as f64;
        let mut score = 0.0;
        for rule in &self.rules {
            let mut corr_q = 0.0;
            for (local, &ex_cp) in rule.existing_cp.iter().enumerate() {
                if ex_cp == 0 {
                    continue;
                }
                let best = (0..4)
                    .map(|k| {
                        let q_factor = (self.mask_at(local, &totals, k) as f64 / tq).min(1.0);
                        ex_cp as f64 * q_factor * MASK_MODS[k]
                    })
                    .fold(0.0, f64::max);
                corr_q += best;
            }
            // Over-supply of a correlated product is not rewarded; the score
            // stays a pure deficit measure, zero at (or beyond) the ideal.
            score -= (rule.ideal_corr_q - corr_q).max(0.0);
        }
        score
    }

    /// All four scores as a maximizing objective vector:
    /// (spread, distance, quantity, correlation).
    pub fn evaluate_counts(&self, counts: &[u32]) -> ObjectiveVector {
        ObjectiveVector::maximizing(vec![
            self.spread_score(counts),
            self.distance_score(counts),
            self.quantity_score(counts),
            self.correlation_score(counts),
        ])
        .expect("scores are finite")
    }

    pub fn evaluate(&self, chromosome: &Chromosome) -> Result<ObjectiveVector> {
        Ok(self.evaluate_counts(&self.counts_of(chromosome)?))
    }
}

/// Spread score of a chromosome: negated sum of per-area deviations from the
/// ideal (equal) quantity.
pub fn spread_score(
    chromosome: &Chromosome,
    state: &WarehouseState,
    product: ProductNo,
    config: &ScoreConfig,
) -> Result<f64> {
    let ctx = FloorContext::new(
        state,
        product,
        chromosome.floor,
        chromosome.genes.len() as u32,
        config,
    )?;
    Ok(ctx.spread_score(&ctx.counts_of(chromosome)?))
}

/// Distance score: negated sum of per-item deviations from the product's
/// rank-ideal walking distance.
pub fn distance_score(
    chromosome: &Chromosome,
    state: &WarehouseState,
    product: ProductNo,
    config: &ScoreConfig,
) -> Result<f64> {
    let ctx = FloorContext::new(
        state,
        product,
        chromosome.floor,
        chromosome.genes.len() as u32,
        config,
    )?;
    Ok(ctx.distance_score(&ctx.counts_of(chromosome)?))
}

/// Quantity score: sum of the best mask score per sub-aisle.
pub fn quantity_score(
    chromosome: &Chromosome,
    state: &WarehouseState,
    product: ProductNo,
    config: &ScoreConfig,
) -> Result<f64> {
    let ctx = FloorContext::new(
        state,
        product,
        chromosome.floor,
        chromosome.genes.len() as u32,
        config,
    )?;
    Ok(ctx.quantity_score(&ctx.counts_of(chromosome)?))
}

/// Correlation score: negated deficit of correlated-product quantity in the
/// vicinity of the incoming product.
pub fn correlation_score(
    chromosome: &Chromosome,
    state: &WarehouseState,
    product: ProductNo,
    config: &ScoreConfig,
) -> Result<f64> {
    let ctx = FloorContext::new(
        state,
        product,
        chromosome.floor,
        chromosome.genes.len() as u32,
        config,
    )?;
    Ok(ctx.correlation_score(&ctx.counts_of(chromosome)?))
}
