//! Cubature formulas Q(f) = Σ a_i f(x_i) and the operations shared by every
//! construction: canonical ordering, knot merging and central symmetry.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::weights::ProductWeight;

/// Relative threshold below which accumulated weights count as zero.
pub const ZERO_WEIGHT_REL: f64 = 1e-14;

/// Default absolute per-coordinate tolerance for identifying knots.
pub const MERGE_TOL: f64 = 1e-12;

/// The integral a formula approximates.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    /// ∫ f ρ over the product domain.
    Product(ProductWeight),
    /// Surface integral over the sphere of the given radius centred at 0.
    Sphere { radius: f64 },
    /// The discrete functional f ↦ Σ f(x) over all x with exactly `k`
    /// coordinates in {±radius} and the others zero.
    Mdk { k: usize, radius: f64 },
}

impl Target {
    pub fn kind(&self) -> &'static str {
        match self {
            Target::Product(_) => "product",
            Target::Sphere { .. } => "sphere",
            Target::Mdk { .. } => "mdk",
        }
    }
}

/// Point counts at the two stages of a construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counts {
    /// Points produced by the construction before any identification.
    pub raw: usize,
    /// Distinct knot positions after merging coincident points.
    pub merged: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubatureFormula {
    dim: usize,
    /// Row-major point coordinates.
    coords: Vec<f64>,
    weights: Vec<f64>,
    degree: usize,
    target: Target,
    counts: Counts,
}

impl CubatureFormula {
    pub fn new(dim: usize, coords: Vec<f64>, weights: Vec<f64>, degree: usize, target: Target) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if coords.len() != dim * weights.len() {
            return Err(Error::InvalidArgument(format!(
                "{} coordinates do not form {} points of dimension {dim}",
                coords.len(),
                weights.len()
            )));
        }
        if let Target::Product(w) = &target {
            if w.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: w.dim(),
                });
            }
        }
        let n = weights.len();
        Ok(CubatureFormula {
            dim,
            coords,
            weights,
            degree,
            target,
            counts: Counts { raw: n, merged: n },
        })
    }

    /// Builds from a list of (point, weight) terms.
    pub fn from_terms(dim: usize, terms: &[(Vec<f64>, f64)], degree: usize, target: Target) -> Result<Self> {
        let mut coords = Vec::with_capacity(dim * terms.len());
        let mut weights = Vec::with_capacity(terms.len());
        for (x, a) in terms {
            if x.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: x.len(),
                });
            }
            coords.extend_from_slice(x);
            weights.push(*a);
        }
        CubatureFormula::new(dim, coords, weights, degree, target)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Claimed degree of exactness.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    pub fn counts(&self) -> Counts {
        self.counts
    }

    pub fn with_counts(mut self, counts: Counts) -> Self {
        self.counts = counts;
        self
    }

    pub fn with_target(mut self, target: Target) -> Self {
        self.target = target;
        self
    }

    pub fn with_degree(mut self, degree: usize) -> Self {
        self.degree = degree;
        self
    }

    /// Σ a_i f(x_i).
    pub fn apply(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.points().zip(&self.weights).map(|(x, a)| a * f(x)).sum()
    }

    /// Σ a_i.
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Σ |a_i|.
    pub fn absolute_weight(&self) -> f64 {
        self.weights.iter().map(|a| a.abs()).sum()
    }

    pub fn max_abs_weight(&self) -> f64 {
        self.weights.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    /// Largest |x_j| over all knots.
    pub fn max_abs_coordinate(&self) -> f64 {
        self.coords.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Multiplies every coordinate of coordinate axis j by `scales[j]` and
    /// every weight by `weight_factor`.
    pub fn map_linear(mut self, scales: &[f64], weight_factor: f64) -> Self {
        assert_eq!(scales.len(), self.dim);
        for x in self.coords.chunks_exact_mut(self.dim) {
            for (xj, s) in x.iter_mut().zip(scales) {
                *xj *= s;
            }
        }
        for a in &mut self.weights {
            *a *= weight_factor;
        }
        self
    }

    /// For each point the index of its exact negation (itself for the
    /// origin). `None` if any point lacks a partner with a bit-identical
    /// weight.
    pub fn symmetry_pairs(&self) -> Option<Vec<usize>> {
        let key = |x: &[f64]| -> Vec<u64> { x.iter().map(|v| (v + 0.0).to_bits()).collect() };
        let index: HashMap<Vec<u64>, usize> = self.points().enumerate().map(|(i, x)| (key(x), i)).collect();
        if index.len() != self.len() {
            return None;
        }
        let mut partner = Vec::with_capacity(self.len());
        for (i, x) in self.points().enumerate() {
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            let j = *index.get(&key(&neg))?;
            if self.weights[i].to_bits() != self.weights[j].to_bits() {
                return None;
            }
            partner.push(j);
        }
        Some(partner)
    }

    /// True iff the point set is closed under x ↦ -x with identical weights,
    /// compared bit for bit.
    pub fn is_centrally_symmetric(&self) -> bool {
        self.symmetry_pairs().is_some()
    }

    /// Sorts points by (Euclidean norm, lexicographic coordinates).
    pub fn canonicalize(mut self) -> Self {
        let d = self.dim;
        let norms: Vec<f64> = self.points().map(|x| x.iter().map(|v| v * v).sum()).collect();
        let mut order: Vec<usize> = (0..self.len()).collect();
        let coords = &self.coords;
        order.sort_by(|&a, &b| {
            norms[a].total_cmp(&norms[b]).then_with(|| {
                let (xa, xb) = (&coords[a * d..(a + 1) * d], &coords[b * d..(b + 1) * d]);
                xa.iter()
                    .zip(xb)
                    .map(|(p, q)| p.total_cmp(q))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        });
        let mut new_coords = Vec::with_capacity(self.coords.len());
        let mut new_weights = Vec::with_capacity(self.len());
        for i in order {
            new_coords.extend_from_slice(&self.coords[i * d..(i + 1) * d]);
            new_weights.push(self.weights[i]);
        }
        self.coords = new_coords;
        self.weights = new_weights;
        self
    }

    /// Identifies points whose coordinates agree within `tol`, sums their
    /// weights, restores exact central symmetry where the merged set is
    /// symmetric up to `tol`, and drops weights below
    /// `ZERO_WEIGHT_REL · max|a|`. `counts.merged` records the number of
    /// distinct positions before zero weights are dropped; `counts.raw` is
    /// carried over from the input.
    pub fn merged(self, tol: f64) -> Self {
        assert!(tol > 0.0);
        let d = self.dim;
        let cell = 1000.0 * tol;
        let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        let mut rep_coords: Vec<f64> = Vec::new();
        let mut rep_weights: Vec<f64> = Vec::new();
        for (x, a) in self.points().zip(&self.weights) {
            let found = candidate_keys(x, cell, tol).into_iter().find_map(|key| {
                buckets.get(&key).and_then(|ids| {
                    ids.iter()
                        .copied()
                        .find(|&r| within(&rep_coords[r * d..(r + 1) * d], x, tol))
                })
            });
            match found {
                Some(r) => rep_weights[r] += a,
                None => {
                    let r = rep_weights.len();
                    rep_coords.extend_from_slice(x);
                    rep_weights.push(*a);
                    buckets.entry(cell_key(x, cell)).or_default().push(r);
                }
            }
        }
        let merged_count = rep_weights.len();
        symmetrize(d, &mut rep_coords, &mut rep_weights, &buckets, cell, tol);
        let max = rep_weights.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        let mut coords = Vec::with_capacity(rep_coords.len());
        let mut weights = Vec::with_capacity(rep_weights.len());
        for (i, a) in rep_weights.iter().enumerate() {
            if a.abs() >= ZERO_WEIGHT_REL * max && *a != 0.0 {
                // `+ 0.0` turns negative zeros into positive ones.
                coords.extend(rep_coords[i * d..(i + 1) * d].iter().map(|v| v + 0.0));
                weights.push(*a);
            }
        }
        CubatureFormula {
            dim: d,
            coords,
            weights,
            degree: self.degree,
            target: self.target,
            counts: Counts {
                raw: self.counts.raw,
                merged: merged_count,
            },
        }
        .canonicalize()
    }

    /// Concatenates the terms of several formulas scaled by coefficients.
    /// Counts are summed; no merging happens.
    pub fn linear_combination(parts: &[(f64, &CubatureFormula)], degree: usize, target: Target) -> Result<Self> {
        let dim = parts
            .first()
            .map(|(_, f)| f.dim)
            .ok_or_else(|| Error::InvalidArgument("empty combination".into()))?;
        let mut coords = Vec::new();
        let mut weights = Vec::new();
        for (c, f) in parts {
            if f.dim != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: f.dim,
                });
            }
            coords.extend_from_slice(&f.coords);
            weights.extend(f.weights.iter().map(|a| c * a));
        }
        CubatureFormula::new(dim, coords, weights, degree, target)
    }
}

// Cells are centred on multiples of `cell`, so 0 and other round values sit
// far from a cell boundary.
fn cell_key(x: &[f64], cell: f64) -> Vec<i64> {
    x.iter().map(|v| (v / cell).round() as i64).collect()
}

/// Cell keys a point within `tol` of `x` could have been filed under.
fn candidate_keys(x: &[f64], cell: f64, tol: f64) -> Vec<Vec<i64>> {
    let mut keys = vec![cell_key(x, cell)];
    for (j, v) in x.iter().enumerate() {
        let lo = ((v - tol) / cell).round() as i64;
        let hi = ((v + tol) / cell).round() as i64;
        for alt in [lo, hi] {
            if alt != keys[0][j] {
                let extra: Vec<Vec<i64>> = keys
                    .iter()
                    .map(|k| {
                        let mut k = k.clone();
                        k[j] = alt;
                        k
                    })
                    .collect();
                keys.extend(extra);
            }
        }
    }
    keys
}

fn within(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(p, q)| (p - q).abs() <= tol)
}

/// Makes partners x, -x exact negations with equal (averaged) weights.
fn symmetrize(
    d: usize,
    coords: &mut [f64],
    weights: &mut [f64],
    buckets: &HashMap<Vec<i64>, Vec<usize>>,
    cell: f64,
    tol: f64,
) {
    let n = weights.len();
    let mut done = vec![false; n];
    for i in 0..n {
        if done[i] {
            continue;
        }
        let neg: Vec<f64> = coords[i * d..(i + 1) * d].iter().map(|v| -v).collect();
        let partner = candidate_keys(&neg, cell, tol).into_iter().find_map(|key| {
            buckets.get(&key).and_then(|ids| {
                ids.iter()
                    .copied()
                    .find(|&r| !done[r] && within(&coords[r * d..(r + 1) * d], &neg, tol))
            })
        });
        let Some(j) = partner else { continue };
        done[i] = true;
        done[j] = true;
        if i == j {
            for v in &mut coords[i * d..(i + 1) * d] {
                *v = 0.0;
            }
            continue;
        }
        for t in 0..d {
            coords[j * d + t] = -coords[i * d + t];
        }
        let avg = 0.5 * (weights[i] + weights[j]);
        weights[i] = avg;
        weights[j] = avg;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::Weight1D;

    fn leb(d: usize) -> Target {
        Target::Product(ProductWeight::uniform(Weight1D::lebesgue(), d))
    }

    #[test]
    fn length_checks() {
        assert!(CubatureFormula::new(2, vec![0.0; 3], vec![1.0], 1, leb(2)).is_err());
        assert!(CubatureFormula::new(3, vec![0.0; 3], vec![1.0], 1, leb(2)).is_err());
    }

    #[test]
    fn merge_sums_and_drops() {
        let terms = vec![
            (vec![1.0, 0.0], 0.5),
            (vec![-1.0, 0.0], 1.0),
            (vec![1.0 + 1e-14, 0.0], 0.5),
            (vec![0.3, 0.3], 1e-20),
            (vec![0.0, 0.0], 2.0),
        ];
        let f = CubatureFormula::from_terms(2, &terms, 1, leb(2)).unwrap().merged(MERGE_TOL);
        assert_eq!(f.counts().merged, 4);
        assert_eq!(f.len(), 3);
        assert!(f.is_centrally_symmetric());
        assert_eq!(f.point(0), &[0.0, 0.0]);
        assert_eq!(f.total_weight(), 4.0);
    }

    #[test]
    fn merge_across_cell_boundary() {
        let boundary = 1000.0 * MERGE_TOL * 0.5;
        let terms = vec![(vec![boundary], 1.0), (vec![boundary + 1e-13], 1.0)];
        let f = CubatureFormula::from_terms(1, &terms, 1, leb(1)).unwrap().merged(MERGE_TOL);
        assert_eq!(f.len(), 1);
        assert_eq!(f.weights(), &[2.0]);
        let g = CubatureFormula::from_terms(1, &[(vec![0.0], 1.0), (vec![-1e-15], 1.0)], 1, leb(1))
            .unwrap()
            .merged(MERGE_TOL);
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn duplicated_halves_merge_back() {
        let terms = vec![(vec![0.5, -0.25], 1.5), (vec![-0.5, 0.25], 1.5), (vec![0.0, 0.0], 3.0)];
        let f = CubatureFormula::from_terms(2, &terms, 1, leb(2)).unwrap().canonicalize();
        let mut doubled: Vec<(Vec<f64>, f64)> = terms.iter().map(|(x, a)| (x.clone(), a / 2.0)).collect();
        doubled.extend(doubled.clone());
        let g = CubatureFormula::from_terms(2, &doubled, 1, leb(2)).unwrap().merged(MERGE_TOL);
        assert_eq!(f.coords(), g.coords());
        assert_eq!(f.weights(), g.weights());
    }

    #[test]
    fn symmetry_detection() {
        let sym = CubatureFormula::from_terms(1, &[(vec![-1.0], 2.0), (vec![1.0], 2.0)], 1, leb(1)).unwrap();
        assert!(sym.is_centrally_symmetric());
        let asym = CubatureFormula::from_terms(1, &[(vec![-1.0], 2.0), (vec![1.0], 2.5)], 1, leb(1)).unwrap();
        assert!(!asym.is_centrally_symmetric());
    }

    #[test]
    fn canonical_order() {
        let terms = vec![(vec![1.0, 1.0], 1.0), (vec![0.0, -1.0], 1.0), (vec![-1.0, 0.0], 1.0)];
        let f = CubatureFormula::from_terms(2, &terms, 1, leb(2)).unwrap().canonicalize();
        assert_eq!(f.point(0), &[-1.0, 0.0]);
        assert_eq!(f.point(1), &[0.0, -1.0]);
        assert_eq!(f.point(2), &[1.0, 1.0]);
    }
}
