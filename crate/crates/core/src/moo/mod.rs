//! Generic multi-objective machinery: dominance, non-dominated sorting,
//! crowding distance and Pareto fronts.

pub mod indicators;

pub use indicators::{
    coverage, euclidean_distance_indicator, generated_spread, generational_distance,
    hv_reference_point, hypervolume, inverted_generational_distance, min_max_normalize,
    nondominated_subset, pareto_front_size, reference_solution, IndicatorReport,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Optimization direction of one objective component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Minimize,
    Maximize,
}

/// A point in objective space with a per-component optimization direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    values: Vec<f64>,
    senses: Vec<Sense>,
}

impl ObjectiveVector {
    pub fn new(values: Vec<f64>, senses: Vec<Sense>) -> Result<Self> {
        if values.len() != senses.len() {
            return Err(Error::usage("objective values and senses differ in arity"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::usage("objective values must be finite"));
        }
        Ok(ObjectiveVector { values, senses })
    }

    /// All components minimized; the common case for route objectives.
    pub fn minimizing(values: Vec<f64>) -> Result<Self> {
        let senses = vec![Sense::Minimize; values.len()];
        ObjectiveVector::new(values, senses)
    }

    /// All components maximized; the storage-score case.
    pub fn maximizing(values: Vec<f64>) -> Result<Self> {
        let senses = vec![Sense::Maximize; values.len()];
        ObjectiveVector::new(values, senses)
    }

    pub fn arity(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn senses(&self) -> &[Sense] {
        &self.senses
    }

    /// Component `i` mapped to minimization orientation.
    pub fn min_view(&self, i: usize) -> f64 {
        match self.senses[i] {
            Sense::Minimize => self.values[i],
            Sense::Maximize => -self.values[i],
        }
    }

    pub fn same_space(&self, other: &ObjectiveVector) -> bool {
        self.senses == other.senses
    }

    /// Componentwise equality within `eps`.
    pub fn approx_eq(&self, other: &ObjectiveVector, eps: f64) -> bool {
        self.same_space(other)
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| (a - b).abs() <= eps)
    }

    pub fn euclidean(&self, other: &ObjectiveVector) -> f64 {
        debug_assert_eq!(self.arity(), other.arity());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Componentwise sum of two vectors in the same objective space.
    pub fn add(&self, other: &ObjectiveVector) -> Result<ObjectiveVector> {
        if !self.same_space(other) {
            return Err(Error::usage("adding vectors from different spaces"));
        }
        ObjectiveVector::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
            self.senses.clone(),
        )
    }

    /// Total order for deterministic output: lexicographic over values.
    pub fn lex_cmp(&self, other: &ObjectiveVector) -> std::cmp::Ordering {
        for (a, b) in self.values.iter().zip(&other.values) {
            let ord = a.total_cmp(b);
            if ord != std::cmp::Ordering::Equal {
                return ord;
            }
        }
        self.values.len().cmp(&other.values.len())
    }
}

/// True iff `a` is no worse than `b` in every component and strictly better
/// in at least one.
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> Result<bool> {
    if !a.same_space(b) {
        return Err(Error::usage("dominance over mismatched objective spaces"));
    }
    let mut strictly_better = false;
    for i in 0..a.arity() {
        let (x, y) = (a.min_view(i), b.min_view(i));
        if x > y {
            return Ok(false);
        }
        if x < y {
            strictly_better = true;
        }
    }
    Ok(strictly_better)
}

/// True iff `a` is no worse than `b` in every component.
pub fn weakly_dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> bool {
    debug_assert!(a.same_space(b));
    (0..a.arity()).all(|i| a.min_view(i) <= b.min_view(i))
}

/// Fast non-dominated sorting. Returns fronts of population indices; front 0
/// is the non-dominated set, front k the non-dominated set after removing
/// fronts below k. Every index appears exactly once.
pub fn nondominated_sort(population: &[ObjectiveVector]) -> Vec<Vec<usize>> {
    let n = population.len();
    if n == 0 {
        return Vec::new();
    }
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let a_dom_b = dominates(&population[i], &population[j]).unwrap_or(false);
            let b_dom_a = dominates(&population[j], &population[i]).unwrap_or(false);
            if a_dom_b {
                dominated_by[i].push(j);
                domination_count[j] += 1;
            } else if b_dom_a {
                dominated_by[j].push(i);
                domination_count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| domination_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                domination_count[j] -= 1;
                if domination_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    fronts
}

/// 1-based Pareto rank per individual, derived from [`nondominated_sort`].
pub fn pareto_ranks(population: &[ObjectiveVector]) -> Vec<usize> {
    let mut ranks = vec![0usize; population.len()];
    for (k, front) in nondominated_sort(population).iter().enumerate() {
        for &i in front {
            ranks[i] = k + 1;
        }
    }
    ranks
}

/// Crowding distance of the members of one front, index-aligned with
/// `front`. Boundary solutions receive an infinite sentinel; interior
/// solutions accumulate normalized neighbor gaps per objective.
pub fn crowding_distance_indexed(
    population: &[ObjectiveVector],
    front: &[usize],
) -> Vec<f64> {
    let n = front.len();
    if n == 0 {
        return Vec::new();
    }
    let mut distance = vec![0.0f64; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let arity = population[front[0]].arity();
    for obj in 0..arity {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            population[front[a]]
                .min_view(obj)
                .total_cmp(&population[front[b]].min_view(obj))
        });
        let lo = population[front[order[0]]].min_view(obj);
        let hi = population[front[order[n - 1]]].min_view(obj);
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        let span = hi - lo;
        if span <= 0.0 {
            continue;
        }
        for k in 1..n - 1 {
            let prev = population[front[order[k - 1]]].min_view(obj);
            let next = population[front[order[k + 1]]].min_view(obj);
            distance[order[k]] += (next - prev) / span;
        }
    }
    distance
}

/// Crowding distances of a standalone front.
pub fn crowding_distance(front: &[ObjectiveVector]) -> Vec<f64> {
    let idx: Vec<usize> = (0..front.len()).collect();
    crowding_distance_indexed(front, &idx)
}

/// A set of mutually non-dominated solutions. Duplicate objective vectors
/// collapse to one entry; entries are kept in lexicographic objective order
/// for deterministic output.
#[derive(Debug, Clone)]
pub struct ParetoFront<P> {
    entries: Vec<(P, ObjectiveVector)>,
}

impl<P> Default for ParetoFront<P> {
    fn default() -> Self {
        ParetoFront { entries: Vec::new() }
    }
}

impl<P> ParetoFront<P> {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Pareto-filter arbitrary solutions into a front.
    pub fn from_solutions(solutions: Vec<(P, ObjectiveVector)>) -> Self {
        let vectors: Vec<ObjectiveVector> =
            solutions.iter().map(|(_, v)| v.clone()).collect();
        let mut keep = vec![true; solutions.len()];
        for i in 0..vectors.len() {
            if !keep[i] {
                continue;
            }
            for j in 0..vectors.len() {
                if i != j && dominates(&vectors[j], &vectors[i]).unwrap_or(false) {
                    keep[i] = false;
                    break;
                }
            }
        }
        let mut entries: Vec<(P, ObjectiveVector)> = solutions
            .into_iter()
            .zip(keep)
            .filter_map(|(s, k)| k.then_some(s))
            .collect();
        entries.sort_by(|a, b| a.1.lex_cmp(&b.1));
        entries.dedup_by(|a, b| a.1 == b.1);
        ParetoFront { entries }
    }

    pub fn solutions(&self) -> &[(P, ObjectiveVector)] {
        &self.entries
    }

    pub fn vectors(&self) -> Vec<ObjectiveVector> {
        self.entries.iter().map(|(_, v)| v.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(P, ObjectiveVector)> {
        self.entries.iter()
    }
}

impl<P: Clone> ParetoFront<P> {
    /// Non-dominated subset of the union of several fronts.
    pub fn reference_front(fronts: &[ParetoFront<P>]) -> ParetoFront<P> {
        let union: Vec<(P, ObjectiveVector)> = fronts
            .iter()
            .flat_map(|f| f.entries.iter().cloned())
            .collect();
        ParetoFront::from_solutions(union)
    }
}

/// Non-dominated subset of the union of plain vector fronts.
pub fn reference_front(fronts: &[Vec<ObjectiveVector>]) -> Vec<ObjectiveVector> {
    let union: Vec<((), ObjectiveVector)> = fronts
        .iter()
        .flat_map(|f| f.iter().cloned().map(|v| ((), v)))
        .collect();
    ParetoFront::from_solutions(union)
        .entries
        .into_iter()
        .map(|(_, v)| v)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(values: &[f64]) -> ObjectiveVector {
        ObjectiveVector::minimizing(values.to_vec()).unwrap()
    }

    #[test]
    fn dominance_examples() {
        assert!(dominates(&v(&[1.0, 2.0]), &v(&[2.0, 3.0])).unwrap());
        assert!(!dominates(&v(&[1.0, 2.0]), &v(&[1.0, 2.0])).unwrap());
        assert!(!dominates(&v(&[1.0, 3.0]), &v(&[3.0, 1.0])).unwrap());
        assert!(!dominates(&v(&[3.0, 1.0]), &v(&[1.0, 3.0])).unwrap());
    }

    #[test]
    fn dominance_respects_sense() {
        let a = ObjectiveVector::maximizing(vec![2.0, 2.0]).unwrap();
        let b = ObjectiveVector::maximizing(vec![1.0, 2.0]).unwrap();
        assert!(dominates(&a, &b).unwrap());
        assert!(!dominates(&b, &a).unwrap());
        let m = ObjectiveVector::minimizing(vec![1.0]).unwrap();
        assert!(dominates(&a, &m).is_err());
    }

    #[test]
    fn sort_examples() {
        // All mutually non-dominated.
        let pop = vec![v(&[1.0, 3.0]), v(&[3.0, 1.0]), v(&[2.0, 2.0])];
        assert_eq!(nondominated_sort(&pop), vec![vec![0, 1, 2]]);

        // Totally ordered chain.
        let pop = vec![v(&[3.0, 3.0]), v(&[1.0, 1.0]), v(&[2.0, 2.0])];
        assert_eq!(nondominated_sort(&pop), vec![vec![1], vec![2], vec![0]]);

        // Mixed ranks.
        let pop = vec![v(&[1.0, 3.0]), v(&[3.0, 1.0]), v(&[2.0, 2.0]), v(&[4.0, 4.0])];
        assert_eq!(pareto_ranks(&pop), vec![1, 1, 1, 2]);
    }

    #[test]
    fn crowding_examples() {
        let front = vec![v(&[0.0, 2.0])];
        assert_eq!(crowding_distance(&front), vec![f64::INFINITY]);

        let front = vec![v(&[0.0, 2.0]), v(&[2.0, 0.0])];
        assert_eq!(crowding_distance(&front), vec![f64::INFINITY; 2]);

        let front = vec![v(&[0.0, 2.0]), v(&[1.0, 1.0]), v(&[2.0, 0.0])];
        let d = crowding_distance(&front);
        assert!(d[0].is_infinite() && d[2].is_infinite());
        assert!((d[1] - 2.0).abs() < 1e-12);

        // Interior duplicates contribute a zero gap.
        let front = vec![
            v(&[0.0, 3.0]),
            v(&[1.0, 1.0]),
            v(&[1.0, 1.0]),
            v(&[3.0, 0.0]),
        ];
        let d = crowding_distance(&front);
        assert!(d[1].is_finite() && d[2].is_finite());
    }

    #[test]
    fn front_dedupes_and_filters() {
        let front = ParetoFront::from_solutions(vec![
            ('a', v(&[1.0, 3.0])),
            ('b', v(&[2.0, 2.0])),
            ('c', v(&[2.0, 2.0])),
            ('d', v(&[2.5, 2.5])),
        ]);
        let vectors = front.vectors();
        assert_eq!(vectors.len(), 2);
        assert_eq!(vectors[0].values(), &[1.0, 3.0]);
        assert_eq!(vectors[1].values(), &[2.0, 2.0]);
    }

    #[test]
    fn reference_front_example() {
        let fixture = vec![v(&[1.0, 3.0]), v(&[2.0, 2.0]), v(&[3.0, 1.0])];
        let extra = vec![v(&[0.0, 4.0]), v(&[2.5, 2.5])];
        let result = reference_front(&[fixture, extra]);
        let expected = vec![v(&[0.0, 4.0]), v(&[1.0, 3.0]), v(&[2.0, 2.0]), v(&[3.0, 1.0])];
        assert_eq!(result, expected);

        // Fixed point.
        assert_eq!(reference_front(&[result.clone()]), result);
    }
}
