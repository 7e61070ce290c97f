//! The per-floor NSGA-II loop, trade-off selection and whole-task solving.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moo::{
    crowding_distance_indexed, nondominated_sort, ObjectiveVector, ParetoFront,
};
use crate::rng;
use crate::warehouse::{FloorId, WarehouseState};

use super::operators::{
    mutate, random_chromosome, repair, single_point_crossover, tournament_select, Evaluated,
};
use super::score::{FloorContext, ScoreConfig};
use super::{assign_compartments, split_across_floors, AssignmentTask, Chromosome, StorageAllocation};

/// Stream tag for the phase-1 split rng; shared by all storage policies so
/// identical tasks split identically.
pub(crate) const SPLIT_STREAM: u64 = 0x51;

/// NSGA-II parameters. Defaults follow the small-warehouse setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NsgaParams {
    pub parent_pop_size: usize,
    pub mutation_probability: f64,
    /// Window length of the max-crowding-distance history used by the
    /// convergence stop.
    pub crowding_window: usize,
    /// Stop once the standard deviation of the windowed history falls to or
    /// below this threshold.
    pub crowding_std_limit: f64,
    pub max_generations: usize,
    pub seed: u64,
}

impl Default for NsgaParams {
    fn default() -> Self {
        NsgaParams {
            parent_pop_size: 50,
            mutation_probability: 0.95,
            crowding_window: 10,
            crowding_std_limit: 0.01,
            max_generations: 200,
            seed: 0,
        }
    }
}

impl NsgaParams {
    pub fn validate(&self) -> Result<()> {
        if self.parent_pop_size < 2 || !self.parent_pop_size.is_multiple_of(2) {
            return Err(Error::configuration(
                "parent population size must be even and at least 2",
            ));
        }
        if !(0.0..=1.0).contains(&self.mutation_probability) {
            return Err(Error::configuration("mutation probability outside [0, 1]"));
        }
        if self.crowding_window < 2 {
            return Err(Error::configuration("crowding window must be at least 2"));
        }
        Ok(())
    }
}

/// Assign ranks and crowding distances over one population.
fn rank_population(
    population: Vec<(Chromosome, ObjectiveVector)>,
) -> Vec<Evaluated> {
    let vectors: Vec<ObjectiveVector> = population.iter().map(|(_, v)| v.clone()).collect();
    let fronts = nondominated_sort(&vectors);
    let mut rank = vec![0usize; population.len()];
    let mut crowding = vec![0.0f64; population.len()];
    for (k, front) in fronts.iter().enumerate() {
        let cds = crowding_distance_indexed(&vectors, front);
        for (&i, cd) in front.iter().zip(cds) {
            rank[i] = k + 1;
            crowding[i] = cd;
        }
    }
    population
        .into_iter()
        .zip(rank.into_iter().zip(crowding))
        .map(|((chromosome, vector), (rank, crowding))| Evaluated {
            chromosome,
            vector,
            rank,
            crowding,
        })
        .collect()
}

/// Max finite crowding distance of the rank-1 members; 0 when the front has
/// only boundary sentinels.
fn max_finite_crowding(population: &[Evaluated]) -> f64 {
    population
        .iter()
        .filter(|e| e.rank == 1 && e.crowding.is_finite())
        .map(|e| e.crowding)
        .fold(0.0, f64::max)
}

fn windowed_std(history: &[f64], window: usize) -> Option<f64> {
    if history.len() < window {
        return None;
    }
    let tail = &history[history.len() - window..];
    let mean = tail.iter().sum::<f64>() / window as f64;
    let var = tail.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / window as f64;
    Some(var.sqrt())
}

/// NSGA-II survival: fill the next parent population front by front, the
/// last partial front by descending crowding distance.
fn survive(
    combined: Vec<(Chromosome, ObjectiveVector)>,
    target: usize,
) -> Vec<(Chromosome, ObjectiveVector)> {
    let vectors: Vec<ObjectiveVector> = combined.iter().map(|(_, v)| v.clone()).collect();
    let fronts = nondominated_sort(&vectors);
    let mut picked: Vec<usize> = Vec::with_capacity(target);
    for front in fronts {
        if picked.len() + front.len() <= target {
            picked.extend(front);
        } else {
            let cds = crowding_distance_indexed(&vectors, &front);
            let mut order: Vec<usize> = (0..front.len()).collect();
            order.sort_by(|&a, &b| cds[b].total_cmp(&cds[a]).then(front[a].cmp(&front[b])));
            picked.extend(
                order
                    .into_iter()
                    .take(target - picked.len())
                    .map(|k| front[k]),
            );
            break;
        }
    }
    let mut keep = vec![false; combined.len()];
    for i in picked {
        keep[i] = true;
    }
    combined
        .into_iter()
        .zip(keep)
        .filter_map(|(e, k)| k.then_some(e))
        .collect()
}

/// Run the NSGA-II for one floor and return its rank-1 front.
fn run_floor(
    ctx: &FloorContext,
    params: &NsgaParams,
    seed: u64,
) -> Result<ParetoFront<Chromosome>> {
    run_floor_inner(ctx, params, seed, None)
}

fn run_floor_inner(
    ctx: &FloorContext,
    params: &NsgaParams,
    seed: u64,
    mut trace: Option<&mut Vec<Vec<ObjectiveVector>>>,
) -> Result<ParetoFront<Chromosome>> {
    if ctx.incoming == 0 {
        return Ok(ParetoFront::empty());
    }
    params.validate()?;
    let mut rng = rng::seeded(seed);

    let mut parents: Vec<(Chromosome, ObjectiveVector)> =
        Vec::with_capacity(params.parent_pop_size);
    for _ in 0..params.parent_pop_size {
        let c = random_chromosome(ctx, &mut rng)?;
        let v = ctx.evaluate(&c)?;
        parents.push((c, v));
    }
    let mut ranked = rank_population(parents);

    let mut history: Vec<f64> = Vec::new();
    let mut gen = 0;
    while gen < params.max_generations {
        if let Some(std) = windowed_std(&history, params.crowding_window) {
            if std <= params.crowding_std_limit {
                break;
            }
        }
        gen += 1;

        let mut children: Vec<(Chromosome, ObjectiveVector)> =
            Vec::with_capacity(params.parent_pop_size);
        while children.len() < params.parent_pop_size {
            let a = tournament_select(&ranked, &mut rng);
            let b = tournament_select(&ranked, &mut rng);
            let (c1, c2) = single_point_crossover(
                &ranked[a].chromosome,
                &ranked[b].chromosome,
                &mut rng,
            );
            for child in [c1, c2] {
                let child = repair(&child, ctx, &mut rng)?;
                let child = mutate(&child, ctx, &mut rng, params.mutation_probability)?;
                let v = ctx.evaluate(&child)?;
                children.push((child, v));
                if children.len() == params.parent_pop_size {
                    break;
                }
            }
        }

        let mut combined: Vec<(Chromosome, ObjectiveVector)> = ranked
            .into_iter()
            .map(|e| (e.chromosome, e.vector))
            .collect();
        combined.extend(children);
        let next = survive(combined, params.parent_pop_size);
        ranked = rank_population(next);

        history.push(max_finite_crowding(&ranked));
        if let Some(trace) = trace.as_deref_mut() {
            trace.push(
                ranked
                    .iter()
                    .filter(|e| e.rank == 1)
                    .map(|e| e.vector.clone())
                    .collect(),
            );
        }
    }

    Ok(ParetoFront::from_solutions(
        ranked
            .into_iter()
            .filter(|e| e.rank == 1)
            .map(|e| (e.chromosome, e.vector))
            .collect(),
    ))
}

/// Like [`nsga2_assign`] for a single floor, additionally returning the
/// rank-1 front vectors of every generation (diagnostics and invariant
/// tests).
pub fn nsga2_assign_floor_traced(
    task: &AssignmentTask,
    floor: FloorId,
    quantity: u32,
    state: &WarehouseState,
    params: &NsgaParams,
    config: &ScoreConfig,
) -> Result<(ParetoFront<Chromosome>, Vec<Vec<ObjectiveVector>>)> {
    let ctx = FloorContext::new(state, task.product, floor, quantity, config)?;
    let mut trace = Vec::new();
    let front = run_floor_inner(
        &ctx,
        params,
        rng::derive_seed(params.seed, floor.0 as u64),
        Some(&mut trace),
    )?;
    Ok((front, trace))
}

/// Phase 2: run the NSGA-II independently per floor for the given per-floor
/// quantities and return one rank-1 front per floor.
pub fn nsga2_assign(
    task: &AssignmentTask,
    floor_quantities: &[(FloorId, u32)],
    state: &WarehouseState,
    params: &NsgaParams,
    config: &ScoreConfig,
) -> Result<Vec<(FloorId, ParetoFront<Chromosome>)>> {
    let mut fronts = Vec::with_capacity(floor_quantities.len());
    for &(floor, quantity) in floor_quantities {
        let ctx = FloorContext::new(state, task.product, floor, quantity, config)?;
        let front = run_floor(&ctx, params, rng::derive_seed(params.seed, floor.0 as u64))?;
        fronts.push((floor, front));
    }
    Ok(fronts)
}

/// Select the most valuable trade-off solution of a front: after per-front
/// min-max normalization, the solution closest (Euclidean) to the
/// per-objective-maxima reference point; ties fall to the lexicographically
/// smallest gene sequence.
pub fn select_tradeoff(front: &ParetoFront<Chromosome>) -> Option<&(Chromosome, ObjectiveVector)> {
    let entries = front.solutions();
    let first = entries.first()?;
    let arity = first.1.arity();
    let mut lo = vec![f64::INFINITY; arity];
    let mut hi = vec![f64::NEG_INFINITY; arity];
    for (_, v) in entries {
        for k in 0..arity {
            lo[k] = lo[k].min(v.values()[k]);
            hi[k] = hi[k].max(v.values()[k]);
        }
    }
    entries.iter().min_by(|a, b| {
        let dist = |v: &ObjectiveVector| -> f64 {
            (0..arity)
                .map(|k| {
                    let span = hi[k] - lo[k];
                    if span > 0.0 {
                        let norm = (v.values()[k] - lo[k]) / span;
                        (1.0 - norm).powi(2)
                    } else {
                        0.0
                    }
                })
                .sum::<f64>()
                .sqrt()
        };
        dist(&a.1)
            .total_cmp(&dist(&b.1))
            .then_with(|| a.0.lex_cmp(&b.0))
    })
}

/// Combine per-floor fronts into a task-level front: every combination of
/// one solution per active floor, objective vectors summed componentwise,
/// Pareto-filtered. Folding floor by floor with intermediate filtering is
/// sound because dominance is preserved under adding a common vector.
pub fn combine_floor_fronts(
    fronts: &[(FloorId, ParetoFront<Chromosome>)],
) -> ParetoFront<Vec<Chromosome>> {
    let active: Vec<&ParetoFront<Chromosome>> = fronts
        .iter()
        .filter(|(_, f)| !f.is_empty())
        .map(|(_, f)| f)
        .collect();
    let Some(first) = active.first() else {
        return ParetoFront::empty();
    };
    let mut combined: ParetoFront<Vec<Chromosome>> = ParetoFront::from_solutions(
        first
            .solutions()
            .iter()
            .map(|(c, v)| (vec![c.clone()], v.clone()))
            .collect(),
    );
    for front in &active[1..] {
        let mut product: Vec<(Vec<Chromosome>, ObjectiveVector)> = Vec::new();
        for (chain, base) in combined.solutions() {
            for (c, v) in front.solutions() {
                let mut chain = chain.clone();
                chain.push(c.clone());
                let sum = base.add(v).expect("floors share the objective space");
                product.push((chain, sum));
            }
        }
        combined = ParetoFront::from_solutions(product);
    }
    combined
}

/// Result of one whole-warehouse storage solve.
#[derive(Debug, Clone)]
pub struct StorageOutcome {
    pub task: AssignmentTask,
    pub floor_quantities: Vec<(FloorId, u32)>,
    /// Rank-1 front per floor (singleton fronts for the baseline policies).
    pub floor_fronts: Vec<(FloorId, ParetoFront<Chromosome>)>,
    /// Task-level front over floor combinations, vectors summed per floor.
    pub task_front: ParetoFront<Vec<Chromosome>>,
    pub allocation: StorageAllocation,
}

/// Full 3-phase NSGA-II solve of one task. `split_seed` drives the phase-1
/// leftover placement and is shared across policies for comparability.
pub fn solve_nsga2(
    state: &WarehouseState,
    task: &AssignmentTask,
    params: &NsgaParams,
    config: &ScoreConfig,
    split_seed: u64,
) -> Result<StorageOutcome> {
    let mut split_rng = rng::stream(split_seed, SPLIT_STREAM);
    let floor_quantities = split_across_floors(task, state, &mut split_rng)?;
    let floor_fronts = nsga2_assign(task, &floor_quantities, state, params, config)?;

    let mut placements = Vec::with_capacity(task.quantity as usize);
    let mut scores: Option<ObjectiveVector> = None;
    for (_, front) in &floor_fronts {
        let Some((chromosome, vector)) = select_tradeoff(front) else {
            continue;
        };
        placements.extend(assign_compartments(chromosome, state, task.product)?);
        scores = Some(match scores {
            None => vector.clone(),
            Some(s) => s.add(vector)?,
        });
    }
    let scores = scores.unwrap_or(ObjectiveVector::maximizing(vec![0.0; 4])?);
    let task_front = combine_floor_fronts(&floor_fronts);
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
