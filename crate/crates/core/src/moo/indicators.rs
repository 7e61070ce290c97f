//! Pareto front quality indicators: C, GD, ED, PFS, GS, IGD and HV.
//!
//! All indicators operate on raw objective values; the magnitudes reported
//! by the experiment harness are therefore directly comparable across
//! policies. [`min_max_normalize`] exists for diagnostics only.

use serde::{Deserialize, Serialize};

use super::{dominates, ObjectiveVector, Sense};
use crate::error::{Error, Result};

/// Tolerance for objective-vector membership tests (C indicator).
pub const MEMBERSHIP_EPS: f64 = 1e-9;

fn check_space(a: &[ObjectiveVector], b: &[ObjectiveVector]) -> Result<()> {
    if let (Some(x), Some(y)) = (a.first(), b.first()) {
        if !x.same_space(y) {
            return Err(Error::usage("fronts live in different objective spaces"));
        }
    }
    Ok(())
}

fn nearest_distance(from: &ObjectiveVector, to: &[ObjectiveVector]) -> f64 {
    to.iter()
        .map(|v| from.euclidean(v))
        .fold(f64::INFINITY, f64::min)
}

/// Fraction of the reference front covered by the computed front, with
/// membership decided by componentwise equality within [`MEMBERSHIP_EPS`].
pub fn coverage(pf_c: &[ObjectiveVector], pf_ref: &[ObjectiveVector]) -> Result<f64> {
    if pf_ref.is_empty() {
        return Err(Error::usage("coverage needs a non-empty reference front"));
    }
    check_space(pf_c, pf_ref)?;
    let members = pf_c
        .iter()
        .filter(|s| pf_ref.iter().any(|r| s.approx_eq(r, MEMBERSHIP_EPS)))
        .count();
    Ok(members as f64 / pf_ref.len() as f64)
}

/// Root of summed squared nearest-neighbor distances from the computed front
/// to the reference front, divided by the computed front size.
pub fn generational_distance(
    pf_c: &[ObjectiveVector],
    pf_ref: &[ObjectiveVector],
) -> Result<f64> {
    if pf_c.is_empty() || pf_ref.is_empty() {
        return Err(Error::usage("generational distance needs non-empty fronts"));
    }
    check_space(pf_c, pf_ref)?;
    let sum: f64 = pf_c
        .iter()
        .map(|s| nearest_distance(s, pf_ref).powi(2))
        .sum();
    Ok(sum.sqrt() / pf_c.len() as f64)
}

/// Distance from the reference solution to its closest computed solution.
pub fn euclidean_distance_indicator(
    pf_c: &[ObjectiveVector],
    s_ref: &ObjectiveVector,
) -> Result<f64> {
    if pf_c.is_empty() {
        return Err(Error::usage("ED needs a non-empty computed front"));
    }
    if !pf_c[0].same_space(s_ref) {
        return Err(Error::usage("reference solution in a different space"));
    }
    Ok(nearest_distance(s_ref, pf_c))
}

/// Number of distinct solutions in the computed front.
pub fn pareto_front_size(pf_c: &[ObjectiveVector]) -> usize {
    let mut distinct: Vec<&ObjectiveVector> = Vec::new();
    for v in pf_c {
        if !distinct.iter().any(|d| d.approx_eq(v, MEMBERSHIP_EPS)) {
            distinct.push(v);
        }
    }
    distinct.len()
}

/// Per-objective best solutions of a front: entry `k` is the member with the
/// best `k`-th component (ties broken lexicographically).
fn extreme_solutions(front: &[ObjectiveVector]) -> Vec<ObjectiveVector> {
    let arity = front.first().map_or(0, |v| v.arity());
    (0..arity)
        .filter_map(|k| {
            front
                .iter()
                .min_by(|a, b| {
                    a.min_view(k)
                        .total_cmp(&b.min_view(k))
                        .then_with(|| a.lex_cmp(b))
                })
                .cloned()
        })
        .collect()
}

/// Evenness of the computed front relative to the reference extremes. Lower
/// is more even. Undefined (None) for fronts of fewer than two solutions.
pub fn generated_spread(
    pf_c: &[ObjectiveVector],
    pf_ref: &[ObjectiveVector],
) -> Result<Option<f64>> {
    if pf_ref.is_empty() {
        return Err(Error::usage("GS needs a non-empty reference front"));
    }
    check_space(pf_c, pf_ref)?;
    if pf_c.len() < 2 {
        return Ok(None);
    }
    let extreme_term: f64 = extreme_solutions(pf_ref)
        .iter()
        .map(|e| nearest_distance(e, pf_c))
        .sum();
    // Nearest neighbor within the front, excluding the solution itself.
    let nn: Vec<f64> = (0..pf_c.len())
        .map(|i| {
            pf_c.iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, v)| pf_c[i].euclidean(v))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mean = nn.iter().sum::<f64>() / nn.len() as f64;
    let deviation: f64 = nn.iter().map(|d| (d - mean).abs()).sum();
    let denominator = extreme_term + pf_c.len() as f64 * mean;
    if denominator == 0.0 {
        return Ok(Some(0.0));
    }
    Ok(Some((extreme_term + deviation) / denominator))
}

/// Root of summed squared nearest-neighbor distances from the reference
/// front to the computed front, divided by the reference front size.
pub fn inverted_generational_distance(
    pf_c: &[ObjectiveVector],
    pf_ref: &[ObjectiveVector],
) -> Result<f64> {
    if pf_c.is_empty() || pf_ref.is_empty() {
        return Err(Error::usage("IGD needs non-empty fronts"));
    }
    check_space(pf_c, pf_ref)?;
    let sum: f64 = pf_ref
        .iter()
        .map(|s| nearest_distance(s, pf_c).powi(2))
        .sum();
    Ok(sum.sqrt() / pf_ref.len() as f64)
}

/// Lebesgue measure of the objective-space region dominated by the front and
/// bounded by `reference_point`. The reference point must be strictly worse
/// than every front member in every objective.
pub fn hypervolume(pf_c: &[ObjectiveVector], reference_point: &ObjectiveVector) -> Result<f64> {
    if pf_c.is_empty() {
        return Ok(0.0);
    }
    if !pf_c[0].same_space(reference_point) {
        return Err(Error::usage("HV reference point in a different space"));
    }
    let arity = reference_point.arity();
    let r: Vec<f64> = (0..arity).map(|i| reference_point.min_view(i)).collect();
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(pf_c.len());
    for v in pf_c {
        let p: Vec<f64> = (0..arity).map(|i| v.min_view(i)).collect();
        if p.iter().zip(&r).any(|(a, b)| a >= b) {
            return Err(Error::usage(
                "HV reference point must be strictly worse than every solution",
            ));
        }
        points.push(p);
    }
    Ok(hv_recursive(&points, &r))
}

fn hv_recursive(points: &[Vec<f64>], r: &[f64]) -> f64 {
    let d = r.len();
    if points.is_empty() {
        return 0.0;
    }
    if d == 1 {
        let best = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        return r[0] - best;
    }
    if d == 2 {
        return hv_2d(points, r);
    }
    // Slice along the last dimension and recurse on the projections.
    let mut cuts: Vec<f64> = points.iter().map(|p| p[d - 1]).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.push(r[d - 1]);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (z0, z1) = (w[0], w[1]);
        let active: Vec<Vec<f64>> = points
            .iter()
            .filter(|p| p[d - 1] <= z0)
            .map(|p| p[..d - 1].to_vec())
            .collect();
        total += hv_recursive(&active, &r[..d - 1]) * (z1 - z0);
    }
    total
}

fn hv_2d(points: &[Vec<f64>], r: &[f64]) -> f64 {
    let mut sorted: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut volume = 0.0;
    let mut prev_y = r[1];
    for (x, y) in sorted {
        if y < prev_y {
            volume += (r[0] - x) * (prev_y - y);
            prev_y = y;
        }
    }
    volume
}

/// Per-objective best values over a pool of solutions, combined into one
/// reference solution for the ED indicator.
pub fn reference_solution(pool: &[ObjectiveVector]) -> Result<ObjectiveVector> {
    let first = pool
        .first()
        .ok_or_else(|| Error::usage("reference solution needs solutions"))?;
    let arity = first.arity();
    let values: Vec<f64> = (0..arity)
        .map(|k| {
            let best = pool
                .iter()
                .map(|v| v.min_view(k))
                .fold(f64::INFINITY, f64::min);
            match first.senses()[k] {
                Sense::Minimize => best,
                Sense::Maximize => -best,
            }
        })
        .collect();
    ObjectiveVector::new(values, first.senses().to_vec())
}

/// Min-max normalization of a set of vectors over their own ranges;
/// a diagnostic aid, not used by the reported indicators.
pub fn min_max_normalize(vectors: &[ObjectiveVector]) -> Vec<ObjectiveVector> {
    let Some(first) = vectors.first() else {
        return Vec::new();
    };
    let arity = first.arity();
    let mut lo = vec![f64::INFINITY; arity];
    let mut hi = vec![f64::NEG_INFINITY; arity];
    for v in vectors {
        for k in 0..arity {
            lo[k] = lo[k].min(v.values()[k]);
            hi[k] = hi[k].max(v.values()[k]);
        }
    }
    vectors
        .iter()
        .map(|v| {
            let values: Vec<f64> = (0..arity)
                .map(|k| {
                    let span = hi[k] - lo[k];
                    if span > 0.0 {
                        (v.values()[k] - lo[k]) / span
                    } else {
                        0.0
                    }
                })
                .collect();
            ObjectiveVector::new(values, v.senses().to_vec()).expect("normalized values finite")
        })
        .collect()
}

/// The seven indicator values of one computed front against a reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorReport {
    pub c: f64,
    pub gd: f64,
    pub ed: f64,
    pub pfs: u32,
    /// Missing when the computed front has fewer than two solutions.
    pub gs: Option<f64>,
    pub igd: f64,
    pub hv: f64,
}

impl IndicatorReport {
    /// Compute all indicators of `pf_c` against `pf_ref`, with the reference
    /// solution and HV reference point supplied by the caller.
    pub fn compute(
        pf_c: &[ObjectiveVector],
        pf_ref: &[ObjectiveVector],
        s_ref: &ObjectiveVector,
        hv_ref: &ObjectiveVector,
    ) -> Result<IndicatorReport> {
        Ok(IndicatorReport {
            c: coverage(pf_c, pf_ref)?,
            gd: generational_distance(pf_c, pf_ref)?,
            ed: euclidean_distance_indicator(pf_c, s_ref)?,
            pfs: pareto_front_size(pf_c) as u32,
            gs: generated_spread(pf_c, pf_ref)?,
            igd: inverted_generational_distance(pf_c, pf_ref)?,
            hv: hypervolume(pf_c, hv_ref)?,
        })
    }
}

/// HV reference point for a pool of solutions: componentwise worst observed
/// value plus a 10% margin of the observed range (at least 1.0).
pub fn hv_reference_point(pool: &[ObjectiveVector]) -> Result<ObjectiveVector> {
    let first = pool
        .first()
        .ok_or_else(|| Error::usage("HV reference point needs solutions"))?;
    let arity = first.arity();
    let values: Vec<f64> = (0..arity)
        .map(|k| {
            let worst = pool
                .iter()
                .map(|v| v.min_view(k))
                .fold(f64::NEG_INFINITY, f64::max);
            let best = pool
                .iter()
                .map(|v| v.min_view(k))
                .fold(f64::INFINITY, f64::min);
            let margin = (0.1 * (worst - best)).max(1.0);
            let raw = worst + margin;
            match first.senses()[k] {
                Sense::Minimize => raw,
                Sense::Maximize => -raw,
            }
        })
        .collect();
    ObjectiveVector::new(values, first.senses().to_vec())
}

/// Drop any pool member strictly dominated by another; used to keep HV
/// reference points meaningful when algorithms return dominated fronts.
pub fn nondominated_subset(pool: &[ObjectiveVector]) -> Vec<ObjectiveVector> {
    pool.iter()
        .filter(|v| !pool.iter().any(|o| dominates(o, v).unwrap_or(false)))
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(values: &[f64]) -> ObjectiveVector {
        ObjectiveVector::minimizing(values.to_vec()).unwrap()
    }

    fn fixture() -> Vec<ObjectiveVector> {
        vec![v(&[1.0, 3.0]), v(&[2.0, 2.0]), v(&[3.0, 1.0])]
    }

    #[test]
    fn coverage_examples() {
        let r = fixture();
        assert_eq!(coverage(&r, &r).unwrap(), 1.0);
        let disjoint = vec![v(&[10.0, 10.0])];
        assert_eq!(coverage(&disjoint, &r).unwrap(), 0.0);
        let partial = vec![v(&[1.0, 3.0]), v(&[3.0, 3.0])];
        assert!((coverage(&partial, &r).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!(coverage(&r, &[]).is_err());
    }

    #[test]
    fn gd_examples() {
        let r = fixture();
        assert_eq!(generational_distance(&r, &r).unwrap(), 0.0);
        let partial = vec![v(&[1.0, 3.0]), v(&[3.0, 3.0])];
        let expected = 2.0f64.sqrt() / 2.0;
        assert!((generational_distance(&partial, &r).unwrap() - expected).abs() < 1e-12);
        let single = vec![v(&[3.0, 4.0])];
        let reference = vec![v(&[0.0, 0.0])];
        assert!((generational_distance(&single, &reference).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn ed_examples() {
        let r = fixture();
        // Reference solution inside the computed front.
        assert_eq!(euclidean_distance_indicator(&r, &r[1]).unwrap(), 0.0);
        let s_ref = v(&[1.0, 1.0]);
        let partial = vec![v(&[1.0, 3.0]), v(&[3.0, 3.0])];
        assert!((euclidean_distance_indicator(&partial, &s_ref).unwrap() - 2.0).abs() < 1e-12);
        let singleton = vec![v(&[4.0, 5.0])];
        assert!((euclidean_distance_indicator(&singleton, &s_ref).unwrap() - 5.0).abs() < 1e-12);
        assert!(euclidean_distance_indicator(&[], &s_ref).is_err());
    }

    #[test]
    fn pfs_examples() {
        assert_eq!(pareto_front_size(&[]), 0);
        assert_eq!(pareto_front_size(&fixture()), 3);
        let dup = vec![v(&[1.0, 3.0]), v(&[1.0, 3.0])];
        assert_eq!(pareto_front_size(&dup), 1);
    }

    #[test]
    fn gs_examples() {
        let r = fixture();
        let gs = generated_spread(&r, &r).unwrap().unwrap();
        assert!(gs.abs() < 1e-12);

        // Missing an extreme raises GS above zero.
        let partial = vec![v(&[2.0, 2.0]), v(&[3.0, 1.0])];
        assert!(generated_spread(&partial, &r).unwrap().unwrap() > 0.0);

        // Clustered solutions spread worse than even ones.
        let clustered = vec![v(&[1.0, 3.0]), v(&[1.1, 2.9]), v(&[3.0, 1.0])];
        let even = generated_spread(&r, &r).unwrap().unwrap();
        let uneven = generated_spread(&clustered, &r).unwrap().unwrap();
        assert!(uneven > even);

        // Undefined for singleton fronts.
        assert_eq!(generated_spread(&[v(&[1.0, 1.0])], &r).unwrap(), None);
    }

    #[test]
    fn igd_examples() {
        let r = fixture();
        assert_eq!(inverted_generational_distance(&r, &r).unwrap(), 0.0);
        let single = vec![v(&[1.0, 3.0])];
        let expected = 10.0f64.sqrt() / 3.0;
        assert!(
            (inverted_generational_distance(&single, &r).unwrap() - expected).abs() < 1e-12
        );
        // Symmetric to GD for singleton fronts.
        let a = vec![v(&[0.0, 0.0])];
        let b = vec![v(&[3.0, 4.0])];
        assert_eq!(
            generational_distance(&a, &b).unwrap(),
            inverted_generational_distance(&b, &a).unwrap()
        );
    }

    #[test]
    fn hv_examples() {
        let r = v(&[4.0, 4.0]);
        assert_eq!(hypervolume(&[], &r).unwrap(), 0.0);
        assert!((hypervolume(&fixture(), &r).unwrap() - 6.0).abs() < 1e-12);
        let unit = vec![v(&[1.0, 1.0])];
        assert!((hypervolume(&unit, &v(&[2.0, 2.0])).unwrap() - 1.0).abs() < 1e-12);
        // Overlapping reference point is a usage error.
        assert!(hypervolume(&fixture(), &v(&[3.0, 3.0])).is_err());
    }

    #[test]
    fn hv_3d() {
        // Two disjoint unit boxes against (2,2,2): (0,0,1)..(2,2,2) and
        // (1,1,0) adds the column below it.
        let points = vec![v(&[0.0, 0.0, 1.0]), v(&[1.0, 1.0, 0.0])];
        let r = v(&[2.0, 2.0, 2.0]);
        // volume = 2*2*1 (upper slab) + 1*1*1 (lower column) = 5
        assert!((hypervolume(&points, &r).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn reference_solution_uses_sense() {
        let pool = vec![
            ObjectiveVector::maximizing(vec![1.0, 5.0]).unwrap(),
            ObjectiveVector::maximizing(vec![3.0, 2.0]).unwrap(),
        ];
        let s = reference_solution(&pool).unwrap();
        assert_eq!(s.values(), &[3.0, 5.0]);
    }
}
