//! Genetic operators for the storage NSGA-II: binary tournament selection,
//! single-point crossover, the eight domain mutators and chromosome repair.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::moo::ObjectiveVector;
use crate::rng::Rng;
use crate::warehouse::{RackId, Side};

use super::score::FloorContext;
use super::Chromosome;

/// A population member with its NSGA-II bookkeeping.
#[derive(Debug, Clone)]
pub struct Evaluated {
    pub chromosome: Chromosome,
    pub vector: ObjectiveVector,
    pub rank: usize,
    pub crowding: f64,
}

/// Binary tournament: lower Pareto rank wins, then larger crowding distance,
/// then a coin flip. Two infinite crowding sentinels compare equal.
pub fn tournament_select(population: &[Evaluated], rng: &mut Rng) -> usize {
    let i = rng.random_range(0..population.len());
    let j = rng.random_range(0..population.len());
    let (a, b) = (&population[i], &population[j]);
    if a.rank != b.rank {
        return if a.rank < b.rank { i } else { j };
    }
    let cd_equal = (a.crowding.is_infinite() && b.crowding.is_infinite())
        || a.crowding == b.crowding;
    if !cd_equal {
        return if a.crowding > b.crowding { i } else { j };
    }
    if rng.random_bool(0.5) {
        i
    } else {
        j
    }
}

/// Traditional single-point crossover. Chromosomes shorter than two genes
/// are returned unchanged.
pub fn single_point_crossover(
    a: &Chromosome,
    b: &Chromosome,
    rng: &mut Rng,
) -> (Chromosome, Chromosome) {
    debug_assert_eq!(a.genes.len(), b.genes.len());
    debug_assert_eq!(a.floor, b.floor);
    let len = a.genes.len();
    if len < 2 {
        return (a.clone(), b.clone());
    }
    let cut = rng.random_range(1..len);
    let mut left = a.genes[..cut].to_vec();
    left.extend_from_slice(&b.genes[cut..]);
    let mut right = b.genes[..cut].to_vec();
    right.extend_from_slice(&a.genes[cut..]);
    (
        Chromosome {
            floor: a.floor,
            genes: left,
        },
        Chromosome {
            floor: b.floor,
            genes: right,
        },
    )
}

/// Repair a chromosome whose selected quantities exceed rack capacities:
/// the excess genes of every over-full rack move to the nearest fitting rack
/// with spare capacity (ties broken by the seeded rng).
pub fn repair(chromosome: &Chromosome, ctx: &FloorContext, rng: &mut Rng) -> Result<Chromosome> {
    let mut genes = chromosome.genes.clone();
    let mut counts = ctx.counts_of(chromosome)?;
    let overfull: Vec<usize> = (0..ctx.num_racks())
        .filter(|&l| counts[l] > ctx.remaining[l])
        .collect();
    for source in overfull {
        let excess = counts[source] - ctx.remaining[source];
        let positions: Vec<usize> = gene_positions(ctx, &genes, source);
        for &pos in positions.iter().rev().take(excess as usize) {
            let target = nearest_spare(ctx, &counts, source, rng)?;
            genes[pos] = ctx.rack_id(target);
            counts[source] -= 1;
            counts[target] += 1;
        }
    }
    Ok(Chromosome {
        floor: chromosome.floor,
        genes,
    })
}

fn nearest_spare(
    ctx: &FloorContext,
    counts: &[u32],
    source: usize,
    rng: &mut Rng,
) -> Result<usize> {
    let from = ctx.state.racks()[ctx.rack_global[source]].access_point;
    let mut best: Vec<usize> = Vec::new();
    let mut best_dist = i64::MAX;
    for &l in &ctx.fitting {
        if l == source || counts[l] >= ctx.remaining[l] {
            continue;
        }
        let to = ctx.state.racks()[ctx.rack_global[l]].access_point;
        let d = from.manhattan(to);
        if d < best_dist {
            best_dist = d;
            best = vec![l];
        } else if d == best_dist {
            best.push(l);
        }
    }
    if best.is_empty() {
        return Err(Error::infeasible_task(format!(
            "floor {} cannot absorb the incoming quantity of product {}",
            ctx.floor, ctx.product.number
        )));
    }
    Ok(best[rng.random_range(0..best.len())])
}

/// A fresh random chromosome over the fitting racks, repaired to feasibility.
pub fn random_chromosome(ctx: &FloorContext, rng: &mut Rng) -> Result<Chromosome> {
    if ctx.incoming > 0 && ctx.fitting.is_empty() {
        return Err(Error::infeasible_task(format!(
            "no fitting rack for product {} on floor {}",
            ctx.product.number, ctx.floor
        )));
    }
    let genes: Vec<RackId> = (0..ctx.incoming)
        .map(|_| ctx.rack_id(ctx.fitting[rng.random_range(0..ctx.fitting.len())]))
        .collect();
    repair(
        &Chromosome {
            floor: ctx.floor,
            genes,
        },
        ctx,
        rng,
    )
}

/// With `probability`, apply one of the eight mutators (chosen uniformly)
/// and repair the result; otherwise return the chromosome unchanged.
/// Inapplicable mutators degrade to the identity.
pub fn mutate(
    chromosome: &Chromosome,
    ctx: &FloorContext,
    rng: &mut Rng,
    probability: f64,
) -> Result<Chromosome> {
    if probability <= 0.0 || !rng.random_bool(probability.min(1.0)) {
        return Ok(chromosome.clone());
    }
    let mut genes = chromosome.genes.clone();
    match rng.random_range(0..8u32) {
        0 => fill_rack(ctx, &mut genes, rng),
        1 => move_rack(ctx, &mut genes, rng),
        2 => fill_sub_aisle(ctx, &mut genes, rng),
        3 => clear_sub_aisle(ctx, &mut genes, rng),
        4 => redistribute_exceeding(ctx, &mut genes),
        5 => shift_racks(ctx, &mut genes, rng),
        6 => swap_sub_aisles(ctx, &mut genes, rng),
        _ => swap_racks(ctx, &mut genes, rng),
    }
    repair(
        &Chromosome {
            floor: chromosome.floor,
            genes,
        },
        ctx,
        rng,
    )
}

fn gene_positions(ctx: &FloorContext, genes: &[RackId], local: usize) -> Vec<usize> {
    let id = ctx.rack_id(local);
    genes
        .iter()
        .enumerate()
        .filter_map(|(pos, &g)| (g == id).then_some(pos))
        .collect()
}

fn counts_from(ctx: &FloorContext, genes: &[RackId]) -> Vec<u32> {
    let mut counts = vec![0u32; ctx.num_racks()];
    for g in genes {
        if let Some(l) = ctx.local_of(*g) {
            counts[l] += 1;
        }
    }
    counts
}

/// Flattened rack list of one sub-aisle, slot order (left before right).
fn sub_aisle_racks(ctx: &FloorContext, sa: usize) -> Vec<usize> {
    ctx.sub_aisles[sa]
        .slots
        .iter()
        .flat_map(|s| s.left.into_iter().chain(s.right))
        .collect()
}

/// Fill a random rack with incoming items from the same sub-aisle.
fn fill_rack(ctx: &FloorContext, genes: &mut [RackId], rng: &mut Rng) {
    if ctx.fitting.is_empty() {
        return;
    }
    let target = ctx.fitting[rng.random_range(0..ctx.fitting.len())];
    let sa = ctx.sub_aisle_of[target];
    if sa == usize::MAX {
        return;
    }
    let counts = counts_from(ctx, genes);
    let mut spare = ctx.remaining[target].saturating_sub(counts[target]);
    if spare == 0 {
        return;
    }
    let target_id = ctx.rack_id(target);
    for gene in genes.iter_mut() {
        if spare == 0 {
            break;
        }
        let Some(l) = ctx.local_of(*gene) else {
            continue;
        };
        if l != target && ctx.sub_aisle_of[l] == sa {
            *gene = target_id;
            spare -= 1;
        }
    }
}

/// Move all incoming items of a random rack to another rack of the same
/// sub-aisle.
fn move_rack(ctx: &FloorContext, genes: &mut [RackId], rng: &mut Rng) {
    let counts = counts_from(ctx, genes);
    let sources: Vec<usize> = (0..ctx.num_racks()).filter(|&l| counts[l] > 0).collect();
    if sources.is_empty() {
        return;
    }
    let source = sources[rng.random_range(0..sources.len())];
    let sa = ctx.sub_aisle_of[source];
    if sa == usize::MAX {
        return;
    }
    let others: Vec<usize> = sub_aisle_racks(ctx, sa)
        .into_iter()
        .filter(|&l| l != source)
        .collect();
    if others.is_empty() {
        return;
    }
    let target_id = ctx.rack_id(others[rng.random_range(0..others.len())]);
    let source_id = ctx.rack_id(source);
    for g in genes.iter_mut() {
        if *g == source_id {
            *g = target_id;
        }
    }
}

/// Pull incoming items from other sub-aisles into a random sub-aisle until
/// it provides the target quantity.
fn fill_sub_aisle(ctx: &FloorContext, genes: &mut [RackId], rng: &mut Rng) {
    if ctx.sub_aisles.is_empty() {
        return;
    }
    let sa = rng.random_range(0..ctx.sub_aisles.len());
    let counts = counts_from(ctx, genes);
    let members = sub_aisle_racks(ctx, sa);
    let total: u32 = members
        .iter()
        .map(|&l| ctx.existing[l] + counts[l])
        .sum();
    let mut deficit = ctx.tq.saturating_sub(total);
    if deficit == 0 {
        return;
    }
    // Recipients in slot order, bounded by spare capacity.
    let mut recipients: Vec<(usize, u32)> = members
        .iter()
        .filter_map(|&l| {
            let spare = ctx.remaining[l].saturating_sub(counts[l]);
            (spare > 0).then_some((l, spare))
        })
        .collect();
    let mut r = 0;
    for gene in genes.iter_mut() {
        if deficit == 0 || r >= recipients.len() {
            break;
        }
        let Some(l) = ctx.local_of(*gene) else {
            continue;
        };
        if ctx.sub_aisle_of[l] == sa {
            continue;
        }
        *gene = ctx.rack_id(recipients[r].0);
        recipients[r].1 -= 1;
        if recipients[r].1 == 0 {
            r += 1;
        }
        deficit -= 1;
    }
}

/// Move every incoming item out of a random sub-aisle into another one.
fn clear_sub_aisle(ctx: &FloorContext, genes: &mut [RackId], rng: &mut Rng) {
    if ctx.sub_aisles.len() < 2 {
        return;
    }
    let sa = rng.random_range(0..ctx.sub_aisles.len());
    let mut other = rng.random_range(0..ctx.sub_aisles.len() - 1);
    if other >= sa {
        other += 1;
    }
    let targets: Vec<usize> = sub_aisle_racks(ctx, other)
        .into_iter()
        .filter(|&l| ctx.remaining[l] > 0)
        .collect();
    if targets.is_empty() {
        return;
    }
    for gene in genes.iter_mut() {
        let Some(l) = ctx.local_of(*gene) else {
            continue;
        };
        if ctx.sub_aisle_of[l] == sa {
            *gene = ctx.rack_id(targets[rng.random_range(0..targets.len())]);
        }
    }
}

/// Move incoming items of racks exceeding the target quantity to racks that
/// only need a few items to reach it.
fn redistribute_exceeding(ctx: &FloorContext, genes: &mut [RackId]) {
    let counts = counts_from(ctx, genes);
    let totals: Vec<u32> = (0..ctx.num_racks())
        .map(|l| ctx.existing[l] + counts[l])
        .collect();
    let mut receivers: Vec<(u32, usize, u32)> = (0..ctx.num_racks())
        .filter_map(|l| {
            let deficit = ctx.tq.saturating_sub(totals[l]);
            let spare = ctx.remaining[l].saturating_sub(counts[l]);
            (deficit > 0 && spare > 0).then_some((deficit, l, deficit.min(spare)))
        })
        .collect();
    receivers.sort();
    let mut r = 0;
    for source in 0..ctx.num_racks() {
        let mut excess = totals[source]
            .saturating_sub(ctx.tq)
            .min(counts[source]);
        if excess == 0 {
            continue;
        }
        let positions = gene_positions(ctx, genes, source);
        for &pos in positions.iter().rev() {
            if excess == 0 {
                break;
            }
            while r < receivers.len() && receivers[r].2 == 0 {
                r += 1;
            }
            let Some(recv) = receivers.get_mut(r) else {
                return;
            };
            genes[pos] = ctx.rack_id(recv.1);
            recv.2 -= 1;
            excess -= 1;
        }
    }
}

/// Shift every incoming item one rack towards a random direction, clamping
/// to the nearest valid rack in that direction.
fn shift_racks(ctx: &FloorContext, genes: &mut [RackId], rng: &mut Rng) {
    let direction = rng.random_range(0..4u32);
    // Physical coordinates: left-side racks sit west of their aisle column.
    let phys: Vec<(i64, i64)> = ctx
        .rack_global
        .iter()
        .map(|&ri| {
            let r = &ctx.state.racks()[ri];
            let px = 2 * r.access_point.x + if r.side == Side::Right { 1 } else { 0 };
            (px, r.access_point.y)
        })
        .collect();
    for gene in genes.iter_mut() {
        let Some(l) = ctx.local_of(*gene) else {
            continue;
        };
        let (px, py) = phys[l];
        let candidate = (0..ctx.num_racks())
            .filter(|&o| o != l)
            .filter(|&o| match direction {
                0 => phys[o].1 == py && phys[o].0 < px, // left
                1 => phys[o].1 == py && phys[o].0 > px, // right
                2 => phys[o].0 == px && phys[o].1 > py, // up
                _ => phys[o].0 == px && phys[o].1 < py, // down
            })
            .min_by_key(|&o| (phys[o].0 - px).abs() + (phys[o].1 - py).abs());
        if let Some(target) = candidate {
            *gene = ctx.rack_id(target);
        }
    }
}

/// Pair up the sub-aisles by a seeded shuffle and swap the incoming items
/// within each pair; an odd sub-aisle stays untouched.
fn swap_sub_aisles(ctx: &FloorContext, genes: &mut [RackId], rng: &mut Rng) {
    let n = ctx.sub_aisles.len();
    if n < 2 {
        return;
    }
    let mut order: Vec<usize> = (0..n).collect();
    shuffle(&mut order, rng);
    for pair in order.chunks_exact(2) {
        let a = sub_aisle_racks(ctx, pair[0]);
        let b = sub_aisle_racks(ctx, pair[1]);
        if a.is_empty() || b.is_empty() {
            continue;
        }
        for gene in genes.iter_mut() {
            let Some(l) = ctx.local_of(*gene) else {
                continue;
            };
            if let Some(i) = a.iter().position(|&x| x == l) {
                *gene = ctx.rack_id(b[i % b.len()]);
            } else if let Some(i) = b.iter().position(|&x| x == l) {
                *gene = ctx.rack_id(a[i % a.len()]);
            }
        }
    }
}

/// Pair up the racks by a seeded shuffle and swap the incoming items within
/// each pair.
fn swap_racks(ctx: &FloorContext, genes: &mut [RackId], rng: &mut Rng) {
    let n = ctx.num_racks();
    if n < 2 {
        return;
    }
    let mut order: Vec<usize> = (0..n).collect();
    shuffle(&mut order, rng);
    let mut partner: Vec<usize> = (0..n).collect();
    for pair in order.chunks_exact(2) {
        partner[pair[0]] = pair[1];
        partner[pair[1]] = pair[0];
    }
    for gene in genes.iter_mut() {
        let Some(l) = ctx.local_of(*gene) else {
            continue;
        };
        *gene = ctx.rack_id(partner[l]);
    }
}

/// Fisher-Yates with the crate rng.
fn shuffle(items: &mut [usize], rng: &mut Rng) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}
