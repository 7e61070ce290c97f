//! Ant-colony search over the market graph, in two variants: a single
//! pheromone matrix rewarding whole fronts (variant 3) and one matrix per
//! objective with difference-scaled rewards (variant 4). Both use cataclysm
//! restarts to escape stagnation.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moo::{weakly_dominates, ObjectiveVector, ParetoFront};
use crate::rng;
use crate::warehouse::WarehouseState;

use super::graph::{MarketGraph, MarketId};
use super::route::{PickList, PickRoute, RouteBuilder};

/// Which multi-objective pheromone scheme to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcoVariant {
    Aco3,
    Aco4,
}

impl AcoVariant {
    pub fn name(&self) -> &'static str {
        match self {
            AcoVariant::Aco3 => "aco3",
            AcoVariant::Aco4 => "aco4",
        }
    }
}

/// ACO parameters. Defaults follow the reference parameter setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcoParams {
    pub alpha: f64,
    pub beta: f64,
    /// Evaporation factor.
    pub rho: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    pub floor_penalty: f64,
    /// Allowed weight difference (kg) before a pick counts as a violation.
    pub allowed_weight_difference: f64,
    pub max_cataclysms: usize,
    pub max_cons_iter_wo_impr: usize,
    pub max_iter: usize,
    pub variant: AcoVariant,
    pub seed: u64,
}

impl Default for AcoParams {
    fn default() -> Self {
        AcoParams {
            alpha: 1.0,
            beta: 2.0,
            rho: 0.02,
            tau_min: 1.0,
            tau_max: 25.0,
            floor_penalty: 50.0,
            allowed_weight_difference: 3.0,
            max_cataclysms: 3,
            max_cons_iter_wo_impr: 20,
            max_iter: 250,
            variant: AcoVariant::Aco3,
            seed: 0,
        }
    }
}

impl AcoParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::configuration("rho must lie strictly in (0, 1)"));
        }
        if self.tau_min >= self.tau_max {
            return Err(Error::configuration("tau_min must be below tau_max"));
        }
        if self.max_cataclysms < 1 || self.max_cons_iter_wo_impr < 1 || self.max_iter < 1 {
            return Err(Error::configuration("ACO counters must be at least 1"));
        }
        Ok(())
    }
}

/// Per-edge pheromone values, one matrix for variant 3 and two for
/// variant 4, clamped to `[tau_min, tau_max]` after every update.
#[derive(Debug, Clone)]
pub struct PheromoneMatrices {
    n: usize,
    matrices: Vec<Vec<f64>>,
    tau_min: f64,
    tau_max: f64,
}

impl PheromoneMatrices {
    pub fn new(n: usize, params: &AcoParams) -> Self {
        let count = match params.variant {
            AcoVariant::Aco3 => 1,
            AcoVariant::Aco4 => 2,
        };
        PheromoneMatrices {
            n,
            matrices: vec![vec![params.tau_max; n * n]; count],
            tau_min: params.tau_min,
            tau_max: params.tau_max,
        }
    }

    pub fn matrix_count(&self) -> usize {
        self.matrices.len()
    }

    pub fn get(&self, matrix: usize, from: MarketId, to: MarketId) -> f64 {
        self.matrices[matrix][from.0 * self.n + to.0]
    }

    fn clamp(&self, tau: f64) -> f64 {
        tau.clamp(self.tau_min, self.tau_max)
    }

    pub fn evaporate(&mut self, matrix: usize, rho: f64) {
        let (lo, hi) = (self.tau_min, self.tau_max);
        for tau in &mut self.matrices[matrix] {
            *tau = (*tau * (1.0 - rho)).clamp(lo, hi);
        }
    }

    pub fn deposit(&mut self, matrix: usize, from: MarketId, to: MarketId, delta: f64) {
        let idx = from.0 * self.n + to.0;
        let tau = self.matrices[matrix][idx] + delta;
        self.matrices[matrix][idx] = self.clamp(tau);
    }

    pub fn reset_edge(&mut self, matrix: usize, from: MarketId, to: MarketId) {
        self.matrices[matrix][from.0 * self.n + to.0] = self.tau_min;
    }

    pub fn values(&self, matrix: usize) -> &[f64] {
        &self.matrices[matrix]
    }
}

/// Heuristic value of moving from distance `d` to a market offering the
/// fraction `fraction` of the still-missing items.
pub fn heuristic_value(distance: f64, fraction: f64) -> f64 {
    if distance <= 0.0 {
        return fraction;
    }
    (1.0 / distance) * fraction
}

/// Transition distribution over candidate markets:
/// p(n) ∝ tau(m,n)^alpha * eta(m,n)^beta. All-zero numerators fall back to
/// the uniform distribution. Returns (candidates with probabilities, sum of
/// the normalized probabilities).
pub fn transition_probability(
    current: MarketId,
    candidates: &[MarketId],
    eta: &[f64],
    pheromones: &PheromoneMatrices,
    matrix: usize,
    alpha: f64,
    beta: f64,
) -> (Vec<(MarketId, f64)>, f64) {
    debug_assert_eq!(candidates.len(), eta.len());
    let numerators: Vec<f64> = candidates
        .iter()
        .zip(eta)
        .map(|(&n, &e)| pheromones.get(matrix, current, n).powf(alpha) * e.powf(beta))
        .collect();
    let total: f64 = numerators.iter().sum();
    let probs: Vec<(MarketId, f64)> = if total > 0.0 {
        candidates
            .iter()
            .zip(&numerators)
            .map(|(&n, &num)| (n, num / total))
            .collect()
    } else {
        let uniform = 1.0 / candidates.len() as f64;
        candidates.iter().map(|&n| (n, uniform)).collect()
    };
    let sum = probs.iter().map(|(_, p)| p).sum();
    (probs, sum)
}

fn roulette(probs: &[(MarketId, f64)], rng: &mut rng::Rng) -> MarketId {
    let draw: f64 = rng.random();
    let mut acc = 0.0;
    for &(m, p) in probs {
        acc += p;
        if draw < acc {
            return m;
        }
    }
    probs.last().expect("non-empty distribution").0
}

/// Observation hooks for instrumented runs; all methods default to no-ops.
pub trait AcoObserver {
    fn on_transition(&mut self, _probability_sum: f64) {}
    fn on_pheromones(&mut self, _pheromones: &PheromoneMatrices) {}
    /// Global-best front after each iteration, with the cataclysm flag of
    /// that iteration.
    fn on_iteration(&mut self, _global_front: &[ObjectiveVector], _cataclysm: bool) {}
}

/// The silent default observer.
pub struct NoopObserver;

impl AcoObserver for NoopObserver {}

/// One ant's walk: start at `start`, follow the transition distribution over
/// unvisited markets until the purchasing list is empty, falling back to
/// supplying markets (revisits) when no unvisited market helps.
#[allow(clippy::too_many_arguments)]
pub fn construct_pick_route(
    graph: &MarketGraph,
    state: &WarehouseState,
    pick_list: &PickList,
    start: MarketId,
    pheromones: &PheromoneMatrices,
    params: &AcoParams,
    rng: &mut rng::Rng,
    observer: &mut dyn AcoObserver,
) -> Result<PickRoute> {
    let mut builder = RouteBuilder::new(graph, state, pick_list);
    builder.visit(start);
    let mut current = start;
    while !builder.done() {
        let unvisited: Vec<MarketId> = (0..graph.len())
            .map(MarketId)
            .filter(|&m| !builder.visited(m))
            .collect();
        let useful_unvisited = unvisited.iter().any(|&m| builder.has_supply(m));
        let candidates: Vec<MarketId> = if useful_unvisited {
            unvisited
        } else {
            // Remaining items sit in already-visited markets (second rack of
            // a sub-aisle): revisit them.
            let revisit = builder.supplying_markets();
            if revisit.is_empty() {
                return Err(Error::infeasible_order(
                    "pick list not satisfiable from the warehouse supply",
                ));
            }
            revisit
        };
        let eta: Vec<f64> = candidates
            .iter()
            .map(|&m| {
                let d = if m == current {
                    1.0
                } else {
                    graph.weight(current, m)
                };
                heuristic_value(d, builder.supply_fraction(m))
            })
            .collect();
        let matrix = match params.variant {
            AcoVariant::Aco3 => 0,
            AcoVariant::Aco4 => rng.random_range(0..2),
        };
        let (probs, sum) = transition_probability(
            current,
            &candidates,
            &eta,
            pheromones,
            matrix,
            params.alpha,
            params.beta,
        );
        observer.on_transition(sum);
        current = roulette(&probs, rng);
        builder.visit(current);
    }
    builder.finish(params.allowed_weight_difference, None)
}

/// Directed edges of a route's market sequence.
fn route_edges(route: &PickRoute) -> Vec<(MarketId, MarketId)> {
    route
        .visits
        .windows(2)
        .map(|w| (w[0].market, w[1].market))
        .collect()
}

/// Variant-3 pheromone update: evaporate everything, then reward every edge
/// of the chosen front (the iteration front 90% of the time, the global
/// front 10%) with a unit deposit.
pub fn pheromone_update_aco3(
    pheromones: &mut PheromoneMatrices,
    iteration_front: &ParetoFront<PickRoute>,
    global_front: &ParetoFront<PickRoute>,
    rho: f64,
    rng: &mut rng::Rng,
) {
    pheromones.evaporate(0, rho);
    let reward_global = rng.random_bool(0.1);
    let front = if reward_global && !global_front.is_empty() {
        global_front
    } else {
        iteration_front
    };
    for (route, _) in front.iter() {
        for (from, to) in route_edges(route) {
            pheromones.deposit(0, from, to, 1.0);
        }
    }
}

/// Variant-4 pheromone update: per objective, evaporate its matrix and
/// reward the iteration-best route with 1 / (1 + of_i(ib) - of_i(gb)).
pub fn pheromone_update_aco4(
    pheromones: &mut PheromoneMatrices,
    iteration_best: &[&PickRoute; 2],
    global_best_values: &[f64; 2],
    rho: f64,
) {
    for (i, route) in iteration_best.iter().enumerate() {
        pheromones.evaporate(i, rho);
        let of_ib = route.objectives().values()[i];
        let delta = 1.0 / (1.0 + of_ib - global_best_values[i]);
        for (from, to) in route_edges(route) {
            pheromones.deposit(i, from, to, delta);
        }
    }
}

/// Best route per objective with deterministic tie-breaks: the other
/// objective, then the shorter market sequence, then the sequence itself.
fn per_objective_best(routes: &[PickRoute], objective: usize) -> Option<&PickRoute> {
    routes.iter().min_by(|a, b| {
        let (va, vb) = (a.objectives(), b.objectives());
        let other = 1 - objective;
        va.values()[objective]
            .total_cmp(&vb.values()[objective])
            .then(va.values()[other].total_cmp(&vb.values()[other]))
            .then(a.visits.len().cmp(&b.visits.len()))
            .then_with(|| a.market_sequence().cmp(&b.market_sequence()))
    })
}

/// True when the new front contains at least one objective vector that no
/// vector of the old front weakly dominates.
fn front_improved(old: &ParetoFront<PickRoute>, new: &ParetoFront<PickRoute>) -> bool {
    if old.is_empty() {
        return !new.is_empty();
    }
    new.iter().any(|(_, v)| {
        !old.iter().any(|(_, o)| weakly_dominates(o, v))
    })
}

/// Run the ACO and return the non-dominated set of all archived and final
/// global-best routes.
pub fn aco_optimize(
    graph: &MarketGraph,
    state: &WarehouseState,
    pick_list: &PickList,
    params: &AcoParams,
    observer: &mut dyn AcoObserver,
) -> Result<ParetoFront<PickRoute>> {
    params.validate()?;
    if pick_list.is_empty() {
        let pd = state.layout().pd_points[0];
        let route = PickRoute::empty(pd, crate::warehouse::FloorId(1));
        let v = route.objectives();
        return Ok(ParetoFront::from_solutions(vec![(route, v)]));
    }
    // Satisfiability against the stock of all distinct zone racks.
    let supply = graph.total_supply();
    for (&product, &need) in pick_list.iter() {
        let have = supply.get(&product).copied().unwrap_or(0);
        if have < need {
            return Err(Error::infeasible_order(format!(
                "product {product}: need {need}, warehouse supplies {have}"
            )));
        }
    }

    let mut pheromones = PheromoneMatrices::new(graph.len(), params);
    let mut global: ParetoFront<PickRoute> = ParetoFront::empty();
    let mut archive: Vec<(PickRoute, ObjectiveVector)> = Vec::new();
    let mut global_best_values = [f64::INFINITY; 2];
    let mut cataclysms = 0usize;
    let mut cons_wo_impr = 0usize;
    let mut iter = 0u64;

    while cataclysms < params.max_cataclysms && (iter as usize) < params.max_iter {
        iter += 1;
        // One ant per market, each on its own random stream; every route is
        // evaluated together with its reverse.
        let mut routes: Vec<PickRoute> = Vec::with_capacity(graph.len() * 2);
        for ant in 0..graph.len() {
            let mut ant_rng = rng::stream2(params.seed, iter, ant as u64);
            let route = construct_pick_route(
                graph,
                state,
                pick_list,
                MarketId(ant),
                &pheromones,
                params,
                &mut ant_rng,
                observer,
            )?;
            let reversed = super::route::reverse_route(
                &route,
                graph,
                state,
                pick_list,
                params.allowed_weight_difference,
            )?;
            routes.push(route);
            routes.push(reversed);
        }

        let iteration_front = ParetoFront::from_solutions(
            routes.iter().map(|r| (r.clone(), r.objectives())).collect(),
        );
        let merged = ParetoFront::reference_front(&[global.clone(), iteration_front.clone()]);

        for route in &routes {
            let v = route.objectives();
            for (best, &value) in global_best_values.iter_mut().zip(v.values()) {
                *best = best.min(value);
            }
        }

        match params.variant {
            AcoVariant::Aco3 => {
                let mut colony_rng = rng::stream2(params.seed, 0xC010, iter);
                pheromone_update_aco3(
                    &mut pheromones,
                    &iteration_front,
                    &merged,
                    params.rho,
                    &mut colony_rng,
                );
            }
            AcoVariant::Aco4 => {
                let ib0 = per_objective_best(&routes, 0).expect("routes non-empty");
                let ib1 = per_objective_best(&routes, 1).expect("routes non-empty");
                pheromone_update_aco4(
                    &mut pheromones,
                    &[ib0, ib1],
                    &global_best_values,
                    params.rho,
                );
            }
        }
        observer.on_pheromones(&pheromones);

        let mut cataclysm_now = false;
        if front_improved(&global, &merged) {
            global = merged;
            cons_wo_impr = 0;
        } else {
            cons_wo_impr += 1;
            if cons_wo_impr >= params.max_cons_iter_wo_impr {
                // Cataclysm: archive the global best, reset the pheromones
                // on its edges, and restart the search memory.
                for (route, v) in global.iter() {
                    archive.push((route.clone(), v.clone()));
                }
                for (route, _) in global.iter() {
                    for (from, to) in route_edges(route) {
                        for m in 0..pheromones.matrix_count() {
                            pheromones.reset_edge(m, from, to);
                        }
                    }
                }
                global = ParetoFront::empty();
                global_best_values = [f64::INFINITY; 2];
                cataclysms += 1;
                cons_wo_impr = 0;
                cataclysm_now = true;
            }
        }
        observer.on_iteration(&global.vectors(), cataclysm_now);
    }

    for (route, v) in global.iter() {
        archive.push((route.clone(), v.clone()));
    }
    Ok(ParetoFront::from_solutions(archive))
}
