//! Benchmark harness: experiment plans for the evaluation settings,
//! work-pool execution over task x repetition cells, reference-front
//! construction, indicator computation and CSV result tables.

mod csvout;

pub use csvout::{write_results, RAW_HEADER, SUMMARY_HEADER, TIMING_HEADER};

use std::time::Instant;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{generate_instance, GenSpec, GeneratedInstance, WarehouseSize};
use crate::moo::{
    hv_reference_point, reference_front, reference_solution, IndicatorReport, ObjectiveVector,
};
use crate::pick::{build_market_graph, solve_picking, AcoParams, PickAlgorithm, PickList};
use crate::rng;
use crate::storage::{
    solve_storage, AssignmentTask, NsgaParams, ScoreConfig, StoragePolicy,
};
use crate::warehouse::{Order, ProductNo, WarehouseState};

/// What a setting compares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SettingKind {
    /// Storage policies on one random-filled warehouse (setting family 1).
    Storage { policies: Vec<StoragePolicy> },
    /// Picking algorithms on one random-filled warehouse (family 2).
    Picking { algorithms: Vec<PickAlgorithm> },
    /// Picking algorithms across differently filled warehouses
    /// (families 3-5).
    Interaction {
        fills: Vec<StoragePolicy>,
        algorithms: Vec<PickAlgorithm>,
    },
}

/// A self-contained, reproducible experiment manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub setting: String,
    pub spec: GenSpec,
    pub seed: u64,
    /// Number of storage tasks or orders.
    pub tasks: u32,
    /// Repetitions for stochastic algorithms; deterministic policies run
    /// once and their single front is replicated for aggregation parity.
    pub repetitions: u32,
    pub kind: SettingKind,
    pub nsga: NsgaParams,
    pub aco: AcoParams,
    pub score: ScoreConfig,
}

/// NSGA-II parameters per warehouse size: population 50/60/70 and
/// 200/250/300 generations.
pub fn nsga_params_for(size: WarehouseSize) -> NsgaParams {
    let (pop, gens) = match size {
        WarehouseSize::Small => (50, 200),
        WarehouseSize::Medium => (60, 250),
        WarehouseSize::Large => (70, 300),
    };
    NsgaParams {
        parent_pop_size: pop,
        max_generations: gens,
        ..NsgaParams::default()
    }
}

impl ExperimentPlan {
    /// Build the plan of one of the predefined settings `1.a` .. `5.c`.
    pub fn for_setting(setting: &str, seed: u64) -> Result<ExperimentPlan> {
        let (family, size_tag) = setting
            .split_once('.')
            .ok_or_else(|| Error::usage(format!("malformed setting id '{setting}'")))?;
        let size = match size_tag {
            "a" => WarehouseSize::Small,
            "b" => WarehouseSize::Medium,
            "c" => WarehouseSize::Large,
            other => return Err(Error::usage(format!("unknown setting size '{other}'"))),
        };
        let kind = match family {
            "1" => SettingKind::Storage {
                policies: vec![
                    StoragePolicy::Random,
                    StoragePolicy::ClosestOpen,
                    StoragePolicy::RankBased,
                    StoragePolicy::Nsga2,
                ],
            },
            "2" => SettingKind::Picking {
                algorithms: vec![
                    PickAlgorithm::SShape,
                    PickAlgorithm::Aco3,
                    PickAlgorithm::Aco4,
                ],
            },
            "3" => SettingKind::Interaction {
                fills: vec![StoragePolicy::Random, StoragePolicy::Nsga2],
                algorithms: vec![PickAlgorithm::Aco3],
            },
            "4" => SettingKind::Interaction {
                fills: vec![StoragePolicy::Random, StoragePolicy::Nsga2],
                algorithms: vec![PickAlgorithm::Aco4],
            },
            "5" => SettingKind::Interaction {
                fills: vec![StoragePolicy::Nsga2],
                algorithms: vec![PickAlgorithm::Aco3, PickAlgorithm::Aco4],
            },
            other => return Err(Error::usage(format!("unknown setting family '{other}'"))),
        };
        Ok(ExperimentPlan {
            setting: setting.to_string(),
            spec: GenSpec::preset(size),
            seed,
            tasks: 5,
            repetitions: 10,
            kind,
            nsga: nsga_params_for(size),
            aco: AcoParams::default(),
            score: ScoreConfig::default(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        self.nsga.validate()?;
        self.aco.validate()?;
        if self.tasks < 1 || self.repetitions < 1 {
            return Err(Error::configuration(
                "plan needs at least one task and one repetition",
            ));
        }
        let roster_empty = match &self.kind {
            SettingKind::Storage { policies } => policies.is_empty(),
            SettingKind::Picking { algorithms } => algorithms.is_empty(),
            SettingKind::Interaction { fills, algorithms } => {
                fills.is_empty() || algorithms.is_empty()
            }
        };
        if roster_empty {
            return Err(Error::configuration("plan roster must not be empty"));
        }
        Ok(())
    }
}

/// Result of one (policy, task, repetition) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellResult {
    pub setting: String,
    pub policy: String,
    pub task: u32,
    pub repetition: u32,
    /// Missing when the algorithm failed on this cell.
    pub report: Option<IndicatorReport>,
    /// Wall-clock seconds of the solve call; recorded once per executed
    /// solve (replicated rows of deterministic policies repeat it).
    pub seconds: f64,
}

/// All rows of one experiment run.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<CellResult>,
}

/// Mean and standard deviation per policy over all rows with reports.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySummary {
    pub setting: String,
    pub policy: String,
    pub mean: [f64; 6],
    pub std: [f64; 6],
    pub mean_seconds: f64,
}

impl ResultTable {
    /// Aggregate C, GD, ED, PFS, GS, IGD per policy, preserving first-seen
    /// policy order. GS rows without a value are excluded from its moments.
    pub fn aggregate(&self) -> Vec<PolicySummary> {
        let mut order: Vec<(String, String)> = Vec::new();
        for row in &self.rows {
            let key = (row.setting.clone(), row.policy.clone());
            if !order.contains(&key) {
                order.push(key);
            }
        }
        order
            .into_iter()
            .map(|(setting, policy)| {
                let rows: Vec<&CellResult> = self
                    .rows
                    .iter()
                    .filter(|r| r.setting == setting && r.policy == policy)
                    .collect();
                let values = |f: &dyn Fn(&IndicatorReport) -> Option<f64>| -> Vec<f64> {
                    rows.iter()
                        .filter_map(|r| r.report.as_ref().and_then(f))
                        .collect()
                };
                let moments = |xs: &[f64]| -> (f64, f64) {
                    if xs.is_empty() {
                        return (f64::NAN, f64::NAN);
                    }
                    if xs.windows(2).all(|w| w[0] == w[1]) {
                        return (xs[0], 0.0);
                    }
                    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
                    let var =
                        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
                    (mean, var.sqrt())
                };
                let columns: [Vec<f64>; 6] = [
                    values(&|r| Some(r.c)),
                    values(&|r| Some(r.gd)),
                    values(&|r| Some(r.ed)),
                    values(&|r| Some(r.pfs as f64)),
                    values(&|r| r.gs),
                    values(&|r| Some(r.igd)),
                ];
                let mut mean = [0.0; 6];
                let mut std = [0.0; 6];
                for (i, col) in columns.iter().enumerate() {
                    let (m, s) = moments(col);
                    mean[i] = m;
                    std[i] = s;
                }
                let secs: Vec<f64> = rows.iter().map(|r| r.seconds).collect();
                let mean_seconds = if secs.is_empty() {
                    f64::NAN
                } else {
                    secs.iter().sum::<f64>() / secs.len() as f64
                };
                PolicySummary {
                    setting,
                    policy,
                    mean,
                    std,
                    mean_seconds,
                }
            })
            .collect()
    }

    /// Mean of one indicator for one policy; `idx` follows the column order
    /// C, GD, ED, PFS, GS, IGD.
    pub fn policy_mean(&self, policy: &str, idx: usize) -> Option<f64> {
        self.aggregate()
            .into_iter()
            .find(|s| s.policy == policy)
            .map(|s| s.mean[idx])
    }
}

/// The rayon pool honoring the MEZZOPT_THREADS cap.
fn work_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var("MEZZOPT_THREADS") {
        let n: usize = value
            .parse()
            .map_err(|_| Error::configuration("MEZZOPT_THREADS must be a positive integer"))?;
        if n == 0 {
            return Err(Error::configuration("MEZZOPT_THREADS must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::configuration(format!("cannot build work pool: {e}")))
}

/// Select storage tasks: random products that already have stock; the
/// incoming quantity equals the quantity already stored.
fn select_storage_tasks(
    state: &WarehouseState,
    count: u32,
    seed: u64,
) -> Result<Vec<AssignmentTask>> {
    let mut rng = rng::stream(seed, 0x7A5C);
    let n = state.products().len() as u32;
    let mut tasks = Vec::with_capacity(count as usize);
    let mut attempts = 0;
    while tasks.len() < count as usize {
        attempts += 1;
        if attempts > 10_000 {
            return Err(Error::configuration(
                "could not find stocked products for storage tasks",
            ));
        }
        let product = ProductNo(rng.random_range(1..=n));
        let existing = state.product_total(product);
        if existing == 0 || tasks.iter().any(|t: &AssignmentTask| t.product == product) {
            continue;
        }
        tasks.push(AssignmentTask {
            product,
            quantity: existing,
        });
    }
    Ok(tasks)
}

/// Select orders satisfiable from the given warehouse states.
fn select_orders<'o>(
    orders: &'o [Order],
    states: &[&WarehouseState],
    count: u32,
    seed: u64,
) -> Result<Vec<&'o Order>> {
    let mut indices: Vec<usize> = (0..orders.len()).collect();
    let mut rng = rng::stream(seed, 0x0DE5);
    for i in (1..indices.len()).rev() {
        let j = rng.random_range(0..=i);
        indices.swap(i, j);
    }
    let satisfiable = |order: &Order| -> bool {
        states.iter().all(|state| {
            order
                .lines
                .iter()
                .all(|l| state.product_total(l.product) >= l.quantity)
        })
    };
    let picked: Vec<&Order> = indices
        .into_iter()
        .map(|i| &orders[i])
        .filter(|o| satisfiable(o))
        .take(count as usize)
        .collect();
    if picked.len() < count as usize {
        return Err(Error::configuration(format!(
            "only {} of {} requested orders are satisfiable",
            picked.len(),
            count
        )));
    }
    Ok(picked)
}

struct SolvedCell {
    policy: String,
    task: u32,
    repetition: u32,
    front: Option<Vec<ObjectiveVector>>,
    seconds: f64,
}

/// Compute indicator reports per cell from the per-task reference fronts.
fn reports_from_cells(setting: &str, cells: Vec<SolvedCell>, table: &mut ResultTable) {
    let tasks: Vec<u32> = {
        let mut t: Vec<u32> = cells.iter().map(|c| c.task).collect();
        t.sort_unstable();
        t.dedup();
        t
    };
    for task in tasks {
        let pool: Vec<ObjectiveVector> = cells
            .iter()
            .filter(|c| c.task == task)
            .flat_map(|c| c.front.iter().flatten().cloned())
            .collect();
        let fronts: Vec<Vec<ObjectiveVector>> = cells
            .iter()
            .filter(|c| c.task == task)
            .filter_map(|c| c.front.clone())
            .collect();
        let pf_ref = reference_front(&fronts);
        let s_ref = reference_solution(&pool);
        let hv_ref = hv_reference_point(&pool);
        for cell in cells.iter().filter(|c| c.task == task) {
            let report = match (&cell.front, &s_ref, &hv_ref) {
                (Some(front), Ok(s_ref), Ok(hv_ref)) if !front.is_empty() => {
                    IndicatorReport::compute(front, &pf_ref, s_ref, hv_ref).ok()
                }
                _ => None,
            };
            table.rows.push(CellResult {
                setting: setting.to_string(),
                policy: cell.policy.clone(),
                task: cell.task,
                repetition: cell.repetition,
                report,
                seconds: cell.seconds,
            });
        }
    }
}

/// Execute a baseline-comparison setting (families 1 and 2).
pub fn run_setting(plan: &ExperimentPlan) -> Result<ResultTable> {
    plan.validate()?;
    match &plan.kind {
        SettingKind::Storage { policies } => run_storage_setting(plan, policies),
        SettingKind::Picking { algorithms } => run_picking_setting(plan, algorithms),
        SettingKind::Interaction { .. } => run_interaction(plan),
    }
}

fn run_storage_setting(
    plan: &ExperimentPlan,
    policies: &[StoragePolicy],
) -> Result<ResultTable> {
    let instance = generate_instance(
        &plan.spec,
        plan.seed,
        StoragePolicy::Random,
        &plan.nsga,
        &plan.score,
    )?;
    let tasks = select_storage_tasks(&instance.state, plan.tasks, plan.seed)?;

    // One work item per executed solve; deterministic policies run once.
    struct Item {
        policy: StoragePolicy,
        task_idx: u32,
        rep: u32,
    }
    let mut items = Vec::new();
    for (task_idx, _) in tasks.iter().enumerate() {
        for &policy in policies {
            let reps = if policy.is_deterministic() {
                1
            } else {
                plan.repetitions
            };
            for rep in 0..reps {
                items.push(Item {
                    policy,
                    task_idx: task_idx as u32,
                    rep,
                });
            }
        }
    }

    let state = &instance.state;
    let pool = work_pool()?;
    let solved: Vec<SolvedCell> = pool.install(|| {
        items
            .par_iter()
            .map(|item| {
                let task = &tasks[item.task_idx as usize];
                let split_seed = rng::derive_seed(plan.seed, 0x1000 + item.task_idx as u64);
                let solve_seed = rng::stream2(
                    plan.seed,
                    item.task_idx as u64,
                    (item.policy as u64) << 8 | item.rep as u64,
                )
                .random();
                let started = Instant::now();
                let outcome = solve_storage(
                    state,
                    task,
                    item.policy,
                    &plan.nsga,
                    &plan.score,
                    split_seed,
                    solve_seed,
                );
                let seconds = started.elapsed().as_secs_f64();
                SolvedCell {
                    policy: item.policy.name().to_string(),
                    task: item.task_idx,
                    repetition: item.rep,
                    front: outcome.ok().map(|o| {
                        o.task_front
                            .solutions()
                            .iter()
                            .map(|(_, v)| v.clone())
                            .collect()
                    }),
                    seconds,
                }
            })
            .collect()
    });

    // Replicate deterministic policies across repetitions for parity.
    let mut cells = solved;
    let mut replicated = Vec::new();
    for cell in &cells {
        let deterministic = policies
            .iter()
            .find(|p| p.name() == cell.policy)
            .is_some_and(|p| p.is_deterministic());
        if deterministic {
            for rep in 1..plan.repetitions {
                replicated.push(SolvedCell {
                    policy: cell.policy.clone(),
                    task: cell.task,
                    repetition: rep,
                    front: cell.front.clone(),
                    seconds: cell.seconds,
                });
            }
        }
    }
    cells.extend(replicated);
    cells.sort_by(|a, b| {
        (a.task, &a.policy, a.repetition).cmp(&(b.task, &b.policy, b.repetition))
    });

    let mut table = ResultTable::default();
    reports_from_cells(&plan.setting, cells, &mut table);
    Ok(table)
}

fn run_picking_setting(
    plan: &ExperimentPlan,
    algorithms: &[PickAlgorithm],
) -> Result<ResultTable> {
    let instance = generate_instance(
        &plan.spec,
        plan.seed,
        StoragePolicy::Random,
        &plan.nsga,
        &plan.score,
    )?;
    let graph = build_market_graph(&instance.state, plan.aco.floor_penalty)?;
    let orders = select_orders(&instance.orders, &[&instance.state], plan.tasks, plan.seed)?;

    struct Item {
        algorithm: PickAlgorithm,
        task_idx: u32,
        rep: u32,
    }
    let mut items = Vec::new();
    for (task_idx, _) in orders.iter().enumerate() {
        for &algorithm in algorithms {
            let reps = if algorithm.is_deterministic() {
                1
            } else {
                plan.repetitions
            };
            for rep in 0..reps {
                items.push(Item {
                    algorithm,
                    task_idx: task_idx as u32,
                    rep,
                });
            }
        }
    }

    let state = &instance.state;
    let pool = work_pool()?;
    let solved: Vec<SolvedCell> = pool.install(|| {
        items
            .par_iter()
            .map(|item| {
                let list = PickList::from_order(orders[item.task_idx as usize]);
                let seed = rng::stream2(
                    plan.seed,
                    0x9100 + item.task_idx as u64,
                    (item.algorithm as u64) << 8 | item.rep as u64,
                )
                .random();
                let started = Instant::now();
                let front = solve_picking(&graph, state, &list, item.algorithm, &plan.aco, seed);
                let seconds = started.elapsed().as_secs_f64();
                SolvedCell {
                    policy: item.algorithm.name().to_string(),
                    task: item.task_idx,
                    repetition: item.rep,
                    front: front.ok().map(|f| f.vectors()),
                    seconds,
                }
            })
            .collect()
    });

    let mut cells = solved;
    let mut replicated = Vec::new();
    for cell in &cells {
        let deterministic = algorithms
            .iter()
            .find(|a| a.name() == cell.policy)
            .is_some_and(|a| a.is_deterministic());
        if deterministic {
            for rep in 1..plan.repetitions {
                replicated.push(SolvedCell {
                    policy: cell.policy.clone(),
                    task: cell.task,
                    repetition: rep,
                    front: cell.front.clone(),
                    seconds: cell.seconds,
                });
            }
        }
    }
    cells.extend(replicated);
    cells.sort_by(|a, b| {
        (a.task, &a.policy, a.repetition).cmp(&(b.task, &b.policy, b.repetition))
    });

    let mut table = ResultTable::default();
    reports_from_cells(&plan.setting, cells, &mut table);
    Ok(table)
}

/// Execute an interaction setting: fill one warehouse per storage policy,
/// run the picking variants on all of them, and compare against the joint
/// per-order reference front.
pub fn run_interaction(plan: &ExperimentPlan) -> Result<ResultTable> {
    plan.validate()?;
    let SettingKind::Interaction { fills, algorithms } = &plan.kind else {
        return Err(Error::usage("run_interaction needs an interaction plan"));
    };

    // All arms share products, rules, layout and orders; only the fill
    // policy differs (identical fill seed per arm).
    let mut arms: Vec<(StoragePolicy, GeneratedInstance)> = Vec::new();
    for &fill in fills {
        let instance =
            generate_instance(&plan.spec, plan.seed, fill, &plan.nsga, &plan.score)?;
        arms.push((fill, instance));
    }
    let states: Vec<&WarehouseState> = arms.iter().map(|(_, i)| &i.state).collect();
    let orders = select_orders(&arms[0].1.orders, &states, plan.tasks, plan.seed)?;
    let graphs: Vec<crate::pick::MarketGraph> = arms
        .iter()
        .map(|(_, i)| build_market_graph(&i.state, plan.aco.floor_penalty))
        .collect::<Result<_>>()?;

    struct Item {
        arm: usize,
        algorithm: PickAlgorithm,
        task_idx: u32,
        rep: u32,
    }
    let mut items = Vec::new();
    for (task_idx, _) in orders.iter().enumerate() {
        for (arm, _) in arms.iter().enumerate() {
            for &algorithm in algorithms {
                for rep in 0..plan.repetitions {
                    items.push(Item {
                        arm,
                        algorithm,
                        task_idx: task_idx as u32,
                        rep,
                    });
                }
            }
        }
    }

    let pool = work_pool()?;
    let solved: Vec<SolvedCell> = pool.install(|| {
        items
            .par_iter()
            .map(|item| {
                let (fill, instance) = &arms[item.arm];
                let list = PickList::from_order(orders[item.task_idx as usize]);
                let seed = rng::stream2(
                    plan.seed,
                    0x3000 + item.task_idx as u64,
                    ((item.arm as u64) << 16)
                        | ((item.algorithm as u64) << 8)
                        | item.rep as u64,
                )
                .random();
                let started = Instant::now();
                let front = solve_picking(
                    &graphs[item.arm],
                    &instance.state,
                    &list,
                    item.algorithm,
                    &plan.aco,
                    seed,
                );
                let seconds = started.elapsed().as_secs_f64();
                SolvedCell {
                    policy: format!("{}+{}", fill.name(), item.algorithm.name()),
                    task: item.task_idx,
                    repetition: item.rep,
                    front: front.ok().map(|f| f.vectors()),
                    seconds,
                }
            })
            .collect()
    });

    let mut cells = solved;
    cells.sort_by(|a, b| {
        (a.task, &a.policy, a.repetition).cmp(&(b.task, &b.policy, b.repetition))
    });
    let mut table = ResultTable::default();
    reports_from_cells(&plan.setting, cells, &mut table);
    Ok(table)
}
