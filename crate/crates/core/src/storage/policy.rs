//! Baseline storage policies: random clusters, closest open location and
//! rank-based placement. All baselines run through the same phase-1 floor
//! split and phase-3 compartment assignment as the NSGA-II, and their
//! results are scored with the four objective functions so fronts remain
//! comparable.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moo::{ObjectiveVector, ParetoFront};
use crate::rng::{self, Rng};
use crate::warehouse::{FloorId, RackId, WarehouseState};

use super::nsga::{solve_nsga2, NsgaParams, StorageOutcome, SPLIT_STREAM};
use super::score::{FloorContext, ScoreConfig};
use super::{assign_compartments, split_across_floors, AssignmentTask, Chromosome, StorageAllocation};

/// The storage-assignment algorithm roster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoragePolicy {
    Nsga2,
    Random,
    ClosestOpen,
    RankBased,
}

impl StoragePolicy {
    pub fn is_deterministic(&self) -> bool {
        matches!(self, StoragePolicy::ClosestOpen | StoragePolicy::RankBased)
    }

    pub fn name(&self) -> &'static str {
        match self {
            StoragePolicy::Nsga2 => "nsga2",
            StoragePolicy::Random => "random",
            StoragePolicy::ClosestOpen => "closest",
            StoragePolicy::RankBased => "rank",
        }
    }
}

impl std::str::FromStr for StoragePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nsga2" => Ok(StoragePolicy::Nsga2),
            "random" => Ok(StoragePolicy::Random),
            "closest" => Ok(StoragePolicy::ClosestOpen),
            "rank" => Ok(StoragePolicy::RankBased),
            other => Err(Error::usage(format!("unknown storage policy '{other}'"))),
        }
    }
}

/// Solve a storage task with the chosen policy. `split_seed` drives the
/// phase-1 split identically across policies; `seed` drives the policy's own
/// randomness (NSGA-II search, random clusters).
pub fn solve_storage(
    state: &WarehouseState,
    task: &AssignmentTask,
    policy: StoragePolicy,
    params: &NsgaParams,
    config: &ScoreConfig,
    split_seed: u64,
    seed: u64,
) -> Result<StorageOutcome> {
    match policy {
        StoragePolicy::Nsga2 => {
            let mut params = *params;
            params.seed = seed;
            solve_nsga2(state, task, &params, config, split_seed)
        }
        _ => solve_baseline(state, task, policy, config, split_seed, seed),
    }
}

fn solve_baseline(
    state: &WarehouseState,
    task: &AssignmentTask,
    policy: StoragePolicy,
    config: &ScoreConfig,
    split_seed: u64,
    seed: u64,
) -> Result<StorageOutcome> {
    let mut split_rng = rng::stream(split_seed, SPLIT_STREAM);
    let floor_quantities = split_across_floors(task, state, &mut split_rng)?;

    let mut floor_fronts: Vec<(FloorId, ParetoFront<Chromosome>)> = Vec::new();
    let mut placements = Vec::with_capacity(task.quantity as usize);
    let mut scores: Option<ObjectiveVector> = None;
    for &(floor, quantity) in &floor_quantities {
        if quantity == 0 {
            floor_fronts.push((floor, ParetoFront::empty()));
            continue;
        }
        let ctx = FloorContext::new(state, task.product, floor, quantity, config)?;
        let mut rng = rng::stream2(seed, 0xBA5E, floor.0 as u64);
        let genes = match policy {
            StoragePolicy::Random => random_genes(&ctx, &mut rng)?,
            StoragePolicy::ClosestOpen => closest_open_genes(&ctx)?,
            StoragePolicy::RankBased => rank_based_genes(&ctx)?,
            StoragePolicy::Nsga2 => unreachable!("handled by solve_storage"),
        };
        let chromosome = Chromosome { floor, genes };
        let vector = ctx.evaluate(&chromosome)?;
        placements.extend(assign_compartments(&chromosome, state, task.product)?);
        scores = Some(match scores {
            None => vector.clone(),
            Some(s) => s.add(&vector)?,
        });
        floor_fronts.push((
            floor,
            ParetoFront::from_solutions(vec![(chromosome, vector)]),
        ));
    }

    let scores = scores.unwrap_or(ObjectiveVector::maximizing(vec![0.0; 4])?);
    let task_front = super::nsga::combine_floor_fronts(&floor_fronts);
    Ok(StorageOutcome {
        task: *task,
        floor_quantities,
        floor_fronts,
        task_front,
        allocation: StorageAllocation {
            product: task.product,
            quantity: task.quantity,
            placements,
            scores,
        },
    })
}

/// Random policy: place items in clusters of target-quantity size into
/// random fitting racks, spilling a cluster over to further random racks
/// when the chosen rack cannot hold all of it.
fn random_genes(ctx: &FloorContext, rng: &mut Rng) -> Result<Vec<RackId>> {
    let mut counts = vec![0u32; ctx.num_racks()];
    let mut genes = Vec::with_capacity(ctx.incoming as usize);
    let mut left = ctx.incoming;
    while left > 0 {
        let mut cluster = ctx.tq.min(left);
        while cluster > 0 {
            let open: Vec<usize> = ctx
                .fitting
                .iter()
                .copied()
                .filter(|&l| counts[l] < ctx.remaining[l])
                .collect();
            if open.is_empty() {
                return Err(Error::infeasible_task(format!(
                    "floor {} ran out of capacity for product {}",
                    ctx.floor, ctx.product.number
                )));
            }
            let pick = open[rng.random_range(0..open.len())];
            let take = (ctx.remaining[pick] - counts[pick]).min(cluster);
            counts[pick] += take;
            genes.extend(std::iter::repeat_n(ctx.rack_id(pick), take as usize));
            cluster -= take;
            left -= take;
        }
    }
    Ok(genes)
}

/// Closest-open-location policy: fitting racks ascending by walking
/// distance, each filled to capacity before moving on.
fn closest_open_genes(ctx: &FloorContext) -> Result<Vec<RackId>> {
    first_fit(ctx, 0)
}

/// Rank-based policy: like closest-open, but starting at an offset
/// proportional to the product's relative rank, so slow movers start at the
/// far racks.
fn rank_based_genes(ctx: &FloorContext) -> Result<Vec<RackId>> {
    let rel_rank =
        ctx.product.rank as f64 / ctx.state.products().len().max(1) as f64;
    let offset = ((rel_rank * ctx.fitting.len() as f64).floor() as usize)
        .min(ctx.fitting.len().saturating_sub(1));
    first_fit(ctx, offset)
}

fn first_fit(ctx: &FloorContext, offset: usize) -> Result<Vec<RackId>> {
    let mut order: Vec<usize> = ctx.fitting.clone();
    order.sort_by(|&a, &b| {
        ctx.walk[a]
            .total_cmp(&ctx.walk[b])
            .then_with(|| ctx.rack_id(a).cmp(&ctx.rack_id(b)))
    });
    let shift = offset.min(order.len());
    order.rotate_left(shift);
    let mut genes = Vec::with_capacity(ctx.incoming as usize);
    let mut left = ctx.incoming;
    for l in order {
        if left == 0 {
            break;
        }
        let take = ctx.remaining[l].min(left);
        genes.extend(std::iter::repeat_n(ctx.rack_id(l), take as usize));
        left -= take;
    }
    if left > 0 {
        return Err(Error::infeasible_task(format!(
            "floor {} ran out of capacity for product {}",
            ctx.floor, ctx.product.number
        )));
    }
    Ok(genes)
}
