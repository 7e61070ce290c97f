//! Seeded synthetic generation of benchmark warehouses: layout and racks,
//! product assortments with a three-component weight mixture, association
//! rules, initial fill, and customer orders.

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Rng};
use crate::storage::{solve_storage, AssignmentTask, NsgaParams, ScoreConfig, StoragePolicy};
use crate::warehouse::{
    AisleKind, AssociationRule, Compartment, CompartmentId, ConfigId, Dims, FloorId, GridPoint,
    Layout, Order, OrderLine, OrderNo, PickAisle, Product, ProductNo, Rack, RackConfiguration,
    RackId, Side, SubAisleId, WarehouseState,
};

/// Warehouse size presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarehouseSize {
    Small,
    Medium,
    Large,
}

impl WarehouseSize {
    pub fn name(&self) -> &'static str {
        match self {
            WarehouseSize::Small => "small",
            WarehouseSize::Medium => "medium",
            WarehouseSize::Large => "large",
        }
    }
}

impl std::str::FromStr for WarehouseSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "small" => Ok(WarehouseSize::Small),
            "medium" => Ok(WarehouseSize::Medium),
            "large" => Ok(WarehouseSize::Large),
            other => Err(Error::usage(format!("unknown warehouse size '{other}'"))),
        }
    }
}

/// Physical layout dimensions of a generated warehouse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutSpec {
    pub floors: u32,
    /// Vertical lanes; each lane holds one narrow pick aisle with racks on
    /// both sides, and lanes are separated by wide aisles.
    pub lanes: u32,
    pub cross_aisles: u32,
    pub bays_per_sub_aisle: u32,
}

/// How the fill fraction is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillMeasure {
    Volume,
    Compartments,
}

/// Full specification of a synthetic benchmark instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub size: WarehouseSize,
    pub assortment_size: u32,
    pub fill_fraction: f64,
    pub fill_measure: FillMeasure,
    pub order_count: u32,
    pub order_lines: u32,
    pub layout: LayoutSpec,
}

impl GenSpec {
    pub fn preset(size: WarehouseSize) -> Self {
        let (assortment_size, layout) = match size {
            WarehouseSize::Small => (
                500,
                LayoutSpec {
                    floors: 2,
                    lanes: 2,
                    cross_aisles: 3,
                    bays_per_sub_aisle: 8,
                },
            ),
            WarehouseSize::Medium => (
                1000,
                LayoutSpec {
                    floors: 2,
                    lanes: 3,
                    cross_aisles: 3,
                    bays_per_sub_aisle: 10,
                },
            ),
            WarehouseSize::Large => (
                1500,
                LayoutSpec {
                    floors: 3,
                    lanes: 3,
                    cross_aisles: 4,
                    bays_per_sub_aisle: 12,
                },
            ),
        };
        GenSpec {
            size,
            assortment_size,
            fill_fraction: 0.5,
            fill_measure: FillMeasure::Volume,
            order_count: 100,
            order_lines: 20,
            layout,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.assortment_size < 1 {
            return Err(Error::configuration("assortment must not be empty"));
        }
        if !(self.fill_fraction > 0.0 && self.fill_fraction <= 1.0) {
            return Err(Error::configuration("fill fraction must lie in (0, 1]"));
        }
        if self.layout.floors < 1
            || self.layout.lanes < 1
            || self.layout.cross_aisles < 2
            || self.layout.bays_per_sub_aisle < 1
        {
            return Err(Error::configuration("degenerate layout dimensions"));
        }
        Ok(())
    }
}

/// The weight mixture: (probability, mean, standard deviation) per
/// component. A quarter of the products are light, half medium, a quarter
/// heavy.
pub const WEIGHT_MIXTURE: [(f64, f64, f64); 3] =
    [(0.25, 2.0, 1.0), (0.50, 5.0, 2.0), (0.25, 8.0, 1.0)];

/// Weights are clamped below at this value.
pub const MIN_WEIGHT_KG: f64 = 0.1;

/// Probabilities of a product having 0, 1, 2 or 3 correlated partners.
pub const CORRELATION_COUNTS: [f64; 4] = [0.3, 0.4, 0.2, 0.1];

/// Confidence range of generated association rules.
pub const CONFIDENCE_RANGE: (f64, f64) = (0.10, 0.90);

/// Probability of an order line coming from each rank quartile, highest
/// rank class first.
pub const QUARTILE_WEIGHTS: [f64; 4] = [0.4, 0.3, 0.2, 0.1];

/// Item box sizes; every box fits the smallest compartment at least once.
const BOX_SIZES: [(f64, f64, f64); 5] = [
    (0.20, 0.30, 0.40),
    (0.25, 0.30, 0.30),
    (0.20, 0.20, 0.25),
    (0.15, 0.25, 0.30),
    (0.25, 0.30, 0.45),
];

/// Draw one product weight; returns the weight and the mixture component it
/// came from (exposed for the statistical generator checks).
pub fn sample_weight(rng: &mut Rng) -> (f64, usize) {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut component = WEIGHT_MIXTURE.len() - 1;
    for (i, &(p, _, _)) in WEIGHT_MIXTURE.iter().enumerate() {
        acc += p;
        if u < acc {
            component = i;
            break;
        }
    }
    let (_, mean, std) = WEIGHT_MIXTURE[component];
    let normal = Normal::new(mean, std).expect("valid mixture component");
    let weight = normal.sample(rng).max(MIN_WEIGHT_KG);
    (weight, component)
}

/// Draw the number of correlated partners for one product (exposed for the
/// statistical generator checks).
pub fn sample_partner_count(rng: &mut Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in CORRELATION_COUNTS.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    CORRELATION_COUNTS.len() - 1
}

/// Draw the rank quartile of one order line, 0 = highest rank class
/// (exposed for the statistical generator checks).
pub fn sample_quartile(rng: &mut Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in QUARTILE_WEIGHTS.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    QUARTILE_WEIGHTS.len() - 1
}

/// Generate the product assortment: weights from the mixture, ranks as a
/// seeded permutation, order-frequency gaussians with mu in [1, 5] and
/// sigma in [0.5, 2].
pub fn generate_products(spec: &GenSpec, rng: &mut Rng) -> Vec<Product> {
    let n = spec.assortment_size;
    let mut ranks: Vec<u32> = (1..=n).collect();
    for i in (1..ranks.len()).rev() {
        let j = rng.random_range(0..=i);
        ranks.swap(i, j);
    }
    (0..n)
        .map(|i| {
            let (weight, _) = sample_weight(rng);
            let (w, h, d) = BOX_SIZES[rng.random_range(0..BOX_SIZES.len())];
            let mu = rng.random_range(1.0..=5.0);
            let sigma = rng.random_range(0.5..=2.0);
            Product {
                number: ProductNo(i + 1),
                dims: Dims::new(w, h, d),
                weight,
                rank: ranks[i as usize],
                order_frequency: (mu, sigma),
            }
        })
        .collect()
}

/// Generate association rules: per product 0-3 partners with the declared
/// probabilities, uniform partners without replacement, uniform confidence.
pub fn generate_correlations(products: &[Product], rng: &mut Rng) -> Vec<AssociationRule> {
    let n = products.len();
    let mut rules = Vec::new();
    if n < 2 {
        return rules;
    }
    for p in products {
        let count = sample_partner_count(rng).min(n - 1);
        let mut partners: Vec<ProductNo> = Vec::with_capacity(count);
        while partners.len() < count {
            let candidate = ProductNo(rng.random_range(1..=n as u32));
            if candidate != p.number && !partners.contains(&candidate) {
                partners.push(candidate);
            }
        }
        for cp in partners {
            rules.push(AssociationRule {
                lhs: p.number,
                rhs: cp,
                confidence: rng.random_range(CONFIDENCE_RANGE.0..=CONFIDENCE_RANGE.1),
            });
        }
    }
    rules
}

/// Generate customer orders: `order_count` orders of `order_lines` distinct
/// products each; lines drawn from rank quartiles with the declared
/// probabilities, quantities from the product's order-frequency gaussian.
pub fn generate_orders(spec: &GenSpec, products: &[Product], rng: &mut Rng) -> Result<Vec<Order>> {
    if products.len() < 4 || (products.len() / 4) < spec.order_lines as usize {
        return Err(Error::configuration(
            "assortment too small for the requested order shape",
        ));
    }
    // Products by ascending rank, split into four near-equal quartiles.
    let mut by_rank: Vec<&Product> = products.iter().collect();
    by_rank.sort_by_key(|p| p.rank);
    let n = by_rank.len();
    let bounds = [0, n / 4, n / 2, 3 * n / 4, n];
    let mut orders = Vec::with_capacity(spec.order_count as usize);
    for number in 1..=spec.order_count {
        let mut lines: Vec<OrderLine> = Vec::with_capacity(spec.order_lines as usize);
        while lines.len() < spec.order_lines as usize {
            let q = sample_quartile(rng);
            let slice = &by_rank[bounds[q]..bounds[q + 1]];
            let product = slice[rng.random_range(0..slice.len())];
            if lines.iter().any(|l| l.product == product.number) {
                continue;
            }
            let (mu, sigma) = product.order_frequency;
            let normal = Normal::new(mu, sigma).expect("valid frequency");
            let quantity = normal.sample(rng).round().max(1.0) as u32;
            lines.push(OrderLine {
                product: product.number,
                quantity,
            });
        }
        orders.push(Order {
            number: OrderNo(number),
            lines,
        });
    }
    Ok(orders)
}

/// The three rack configurations: 6, 12 and 24 compartments on an identical
/// 1.0 x 2.0 x 0.5 m rack body.
pub fn rack_configurations() -> Vec<RackConfiguration> {
    let build = |id: u32, shelves: u32, per_shelf: u32| {
        let shelf_height = 2.0 / shelves as f64;
        let width = 1.0 / per_shelf as f64;
        let mut compartments = Vec::new();
        for level in 0..shelves {
            for pos in 0..per_shelf {
                compartments.push(Compartment {
                    id: CompartmentId(level * per_shelf + pos + 1),
                    dims: Dims::new(width, shelf_height, 0.5),
                    shelf_level: level,
                    shelf_position: pos,
                    bottom_height: level as f64 * shelf_height,
                });
            }
        }
        RackConfiguration {
            id: ConfigId(id),
            shelf_levels: shelves,
            compartments_per_shelf: per_shelf,
            compartments,
        }
    };
    vec![build(1, 3, 2), build(2, 6, 2), build(3, 6, 4)]
}

/// Build the layout and racks of an empty warehouse.
pub fn build_empty_warehouse(
    spec: &GenSpec,
    products: Vec<Product>,
    rules: Vec<AssociationRule>,
    rng: &mut Rng,
) -> Result<WarehouseState> {
    spec.validate()?;
    let l = &spec.layout;
    let width = 2 * l.lanes as i64;
    let block_height = l.bays_per_sub_aisle as i64 + 1;
    let height = (l.cross_aisles as i64 - 1) * block_height;
    let cross_aisle_rows: Vec<i64> = (0..l.cross_aisles as i64)
        .map(|c| c * block_height)
        .collect();
    let mut pick_aisles = Vec::new();
    for x in 1..width {
        pick_aisles.push(PickAisle {
            x,
            kind: if x % 2 == 1 {
                AisleKind::Narrow
            } else {
                AisleKind::Wide
            },
        });
    }
    let layout = Layout {
        width,
        height,
        pd_points: vec![
            GridPoint::new(width / 2, 0),
            GridPoint::new(width / 2, height),
        ],
        cross_aisle_rows: cross_aisle_rows.clone(),
        pick_aisles,
    };

    let configurations = rack_configurations();
    let mut racks = Vec::new();
    for floor in 1..=l.floors {
        let mut next_id = 1u32;
        let mut next_sub_aisle = 0u32;
        for lane in 0..l.lanes as i64 {
            let x = 2 * lane + 1;
            for block in 0..(l.cross_aisles - 1) {
                let sub_aisle = SubAisleId(next_sub_aisle);
                next_sub_aisle += 1;
                let y0 = cross_aisle_rows[block as usize];
                for bay in 1..=l.bays_per_sub_aisle as i64 {
                    for side in [Side::Left, Side::Right] {
                        racks.push(Rack {
                            rack_id: RackId(next_id),
                            floor: FloorId(floor),
                            access_point: GridPoint::new(x, y0 + bay),
                            bay_number: bay as u32,
                            block,
                            sub_aisle,
                            side,
                            config: ConfigId(rng.random_range(1..=3)),
                        });
                        next_id += 1;
                    }
                }
            }
        }
    }

    WarehouseState::new(
        l.floors,
        layout,
        configurations,
        racks,
        products,
        rules,
        Vec::new(),
    )
}

/// Fill a warehouse up to the target fraction by repeatedly assigning a
/// random product's target quantity via the given storage policy.
pub fn fill_warehouse(
    state: WarehouseState,
    spec: &GenSpec,
    policy: StoragePolicy,
    nsga: &NsgaParams,
    score: &ScoreConfig,
    rng: &mut Rng,
) -> Result<WarehouseState> {
    let ratio_of = |s: &WarehouseState| match spec.fill_measure {
        FillMeasure::Volume => s.occupied_volume_ratio(),
        FillMeasure::Compartments => s.occupied_compartment_ratio(),
    };
    let mut state = state;
    let mut step = 0u64;
    let mut stalled = 0;
    while ratio_of(&state) < spec.fill_fraction {
        step += 1;
        if stalled > 200 {
            return Err(Error::configuration(format!(
                "cannot reach fill fraction {}: stuck at {:.3}",
                spec.fill_fraction,
                ratio_of(&state)
            )));
        }
        let product_no = ProductNo(rng.random_range(1..=state.products().len() as u32));
        let product = state.product(product_no).expect("generated product");
        let quantity = product.target_quantity();
        let task = AssignmentTask {
            product: product_no,
            quantity,
        };
        let split_seed = rng::derive_seed(nsga.seed, step);
        let solve_seed = rng::derive_seed(split_seed, 1);
        match solve_storage(&state, &task, policy, nsga, score, split_seed, solve_seed) {
            Ok(outcome) => {
                state = state.with_allocation(product_no, &outcome.allocation.placements)?;
                stalled = 0;
            }
            Err(Error::InfeasibleTask(_)) => {
                stalled += 1;
                continue;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(state)
}

/// A fully generated benchmark instance.
#[derive(Debug, Clone)]
pub struct GeneratedInstance {
    pub state: WarehouseState,
    pub orders: Vec<Order>,
}

/// Generate a complete instance: assortment, rules, empty warehouse, fill
/// via the chosen policy, and customer orders. Byte-reproducible from
/// (spec, seed).
pub fn generate_instance(
    spec: &GenSpec,
    seed: u64,
    fill_policy: StoragePolicy,
    nsga: &NsgaParams,
    score: &ScoreConfig,
) -> Result<GeneratedInstance> {
    spec.validate()?;
    let mut product_rng = rng::stream(seed, 1);
    let products = generate_products(spec, &mut product_rng);
    let mut rule_rng = rng::stream(seed, 2);
    let rules = generate_correlations(&products, &mut rule_rng);
    let mut layout_rng = rng::stream(seed, 3);
    let empty = build_empty_warehouse(spec, products.clone(), rules, &mut layout_rng)?;
    let mut fill_rng = rng::stream(seed, 4);
    let mut fill_params = *nsga;
    fill_params.seed = rng::derive_seed(seed, 5);
    let state = fill_warehouse(empty, spec, fill_policy, &fill_params, score, &mut fill_rng)?;
    let mut order_rng = rng::stream(seed, 6);
    let orders = generate_orders(spec, &products, &mut order_rng)?;
    Ok(GeneratedInstance { state, orders })
}
