//! Smolyak's combination of nested one-dimensional rules and the sparse
//! grids it lives on.

pub mod counts;

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::formula::{Counts, CubatureFormula, Target, ZERO_WEIGHT_REL};
use crate::special::binomial;
use crate::weights::{KnotLadder, ProductWeight};

pub use counts::{
    count_closed_form, count_projected, count_recursive, count_upper_bound, count_variant_recursion, golden_table,
    table, CountSequence, CountTable, TableId,
};

/// Parameters of A(q, d): the level sum q and one ladder per coordinate
/// (or a single ladder shared by all coordinates).
#[derive(Debug, Clone)]
pub struct SmolyakPlan {
    q: usize,
    d: usize,
    ladders: Vec<KnotLadder>,
}

impl SmolyakPlan {
    /// All coordinates use `ladder`.
    pub fn shared(q: usize, d: usize, ladder: KnotLadder) -> Result<Self> {
        SmolyakPlan::validate(q, d)?;
        let plan = SmolyakPlan {
            q,
            d,
            ladders: vec![ladder],
        };
        plan.check_depth()?;
        Ok(plan)
    }

    /// Coordinate j uses `ladders[j]`.
    pub fn per_coordinate(q: usize, ladders: Vec<KnotLadder>) -> Result<Self> {
        let d = ladders.len();
        SmolyakPlan::validate(q, d)?;
        let plan = SmolyakPlan { q, d, ladders };
        plan.check_depth()?;
        Ok(plan)
    }

    fn validate(q: usize, d: usize) -> Result<()> {
        if d == 0 || q < d {
            return Err(Error::InvalidArgument(format!("need q >= d >= 1, got q = {q}, d = {d}")));
        }
        Ok(())
    }

    fn check_depth(&self) -> Result<()> {
        let need = self.q - self.d + 1;
        for j in 0..self.d {
            let depth = self.ladder(j).depth();
            if depth < need {
                return Err(Error::LevelOutOfRange {
                    level: need,
                    coordinate: j,
                    depth,
                });
            }
        }
        Ok(())
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn ladder(&self, j: usize) -> &KnotLadder {
        if self.ladders.len() == 1 {
            &self.ladders[0]
        } else {
            &self.ladders[j]
        }
    }

    /// Every level vector i with lo <= |i| <= q and 1 <= i_j <= q - d + 1.
    fn level_vectors(&self, lo: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut current = vec![1usize; self.d];
        let max_level = self.q - self.d + 1;
        fn rec(pos: usize, budget: usize, lo_excess: usize, max_level: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            // `budget` is how much the level sum may still grow beyond d.
            if pos == cur.len() {
                let excess: usize = cur.iter().map(|i| i - 1).sum();
                if excess >= lo_excess {
                    out.push(cur.clone());
                }
                return;
            }
            for extra in 0..=budget.min(max_level - 1) {
                cur[pos] = 1 + extra;
                rec(pos + 1, budget - extra, lo_excess, max_level, cur, out);
            }
            cur[pos] = 1;
        }
        rec(0, self.q - self.d, lo - self.d, max_level, &mut current, &mut out);
        out
    }

    fn coordinates<'a>(&'a self, key: &'a [u32]) -> impl Iterator<Item = f64> + 'a {
        key.iter().enumerate().map(|(j, id)| self.ladder(j).knots()[*id as usize])
    }
}

/// Calls `visit` for every tensor knot of U^{i_1} ⊗ ... ⊗ U^{i_d} with its
/// knot-id key and product weight.
fn for_each_tensor_term(plan: &SmolyakPlan, levels: &[usize], mut visit: impl FnMut(&[u32], f64)) {
    let d = plan.dim();
    let factors: Vec<(&[usize], &[f64])> = (0..d)
        .map(|j| {
            let l = plan.ladder(j);
            (l.level_ids(levels[j]), l.rule(levels[j]).weights())
        })
        .collect();
    let mut idx = vec![0usize; d];
    let mut key = vec![0u32; d];
    loop {
        let mut w = 1.0;
        for j in 0..d {
            key[j] = factors[j].0[idx[j]] as u32;
            w *= factors[j].1[idx[j]];
        }
        visit(&key, w);
        let mut j = d;
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < factors[j].0.len() {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// A(q, d) = Σ_{q-d+1 <= |i| <= q} (-1)^{q-|i|} C(d-1, q-|i|) U^{i_1} ⊗ ... ⊗ U^{i_d}.
/// Weights are accumulated per knot-id key; cancelled weights are dropped.
/// The claimed degree is 2(q - d) + 1. `counts.raw` and `counts.merged` both
/// report the sparse-grid size; `len()` is the number of surviving points.
pub fn combine(plan: &SmolyakPlan, weight: &ProductWeight) -> Result<CubatureFormula> {
    let d = plan.dim();
    if weight.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: weight.dim(),
        });
    }
    let q = plan.q();
    let lo = d.max(q + 1 - d);
    let mut acc: HashMap<Vec<u32>, f64> = HashMap::new();
    let mut order: Vec<Vec<u32>> = Vec::new();
    for levels in plan.level_vectors(lo) {
        let sum: usize = levels.iter().sum();
        let gap = q - sum;
        let c = binomial((d - 1) as u64, gap as u64) as f64 * if gap % 2 == 0 { 1.0 } else { -1.0 };
        for_each_tensor_term(plan, &levels, |key, w| match acc.get_mut(key) {
            Some(v) => *v += c * w,
            None => {
                acc.insert(key.to_vec(), c * w);
                order.push(key.to_vec());
            }
        });
    }
    let grid = order.len();
    let max = acc.values().fold(0.0f64, |m, w| m.max(w.abs()));
    let mut coords = Vec::with_capacity(grid * d);
    let mut weights = Vec::with_capacity(grid);
    for key in &order {
        let w = acc[key];
        if w != 0.0 && w.abs() >= ZERO_WEIGHT_REL * max {
            coords.extend(plan.coordinates(key));
            weights.push(w);
        }
    }
    let f = CubatureFormula::new(d, coords, weights, 2 * (q - d) + 1, Target::Product(weight.clone()))?;
    Ok(f.with_counts(Counts { raw: grid, merged: grid }).canonicalize())
}

/// H(q, d) = ∪_{|i| = q} X^{i_1} × ... × X^{i_d}, sorted by (norm, lexicographic).
pub fn sparse_grid(plan: &SmolyakPlan) -> Vec<Vec<f64>> {
    let d = plan.dim();
    let mut seen: HashMap<Vec<u32>, ()> = HashMap::new();
    let mut keys = Vec::new();
    for levels in plan.level_vectors(plan.q()) {
        let ids: Vec<&[usize]> = (0..d).map(|j| plan.ladder(j).level_ids(levels[j])).collect();
        let mut idx = vec![0usize; d];
        'outer: loop {
            let key: Vec<u32> = (0..d).map(|j| ids[j][idx[j]] as u32).collect();
            if seen.insert(key.clone(), ()).is_none() {
                keys.push(key);
            }
            let mut j = d;
            loop {
                if j == 0 {
                    break 'outer;
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] < ids[j].len() {
                    break;
                }
                idx[j] = 0;
            }
        }
    }
    let mut pts: Vec<Vec<f64>> = keys.iter().map(|k| plan.coordinates(k).collect()).collect();
    pts.sort_by(|a, b| {
        let na: f64 = a.iter().map(|v| v * v).sum();
        let nb: f64 = b.iter().map(|v| v * v).sum();
        na.total_cmp(&nb).then_with(|| {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    pts
}
