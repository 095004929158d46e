//! Symmetric one-dimensional weight functions described by their even
//! moments, and the symmetric quadrature rules and nested knot ladders built
//! from them.
//!
//! Every construction in this crate reduces to moments: a weight never has to
//! be evaluated pointwise. Odd moments vanish by symmetry and are never
//! stored.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::solve_square;
use crate::special::gamma_half;

/// Relative tolerance used when certifying the degree of a 1D rule.
const RULE_DEGREE_TOL: f64 = 1e-12;

/// Knots closer than this (relative) are treated as identical.
const KNOT_EPS: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
enum Moments {
    /// Lebesgue measure on [-1, 1].
    Lebesgue,
    /// exp(-x^2) on the real line.
    Gaussian,
    /// Tabulated even moments m0, m2, m4, ...
    Table(Vec<f64>),
}

/// A symmetric weight function on a symmetric interval [-h, h] (h may be
/// infinite), known through its even moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight1D {
    label: String,
    base_half_width: f64,
    moments: Moments,
    /// The weight is the base weight seen in the coordinate y = x / scale,
    /// i.e. moment_{2j} = base_{2j} / scale^{2j}.
    scale: f64,
}

impl Weight1D {
    /// Lebesgue measure on [-1, 1].
    pub fn lebesgue() -> Self {
        Weight1D {
            label: "lebesgue".into(),
            base_half_width: 1.0,
            moments: Moments::Lebesgue,
            scale: 1.0,
        }
    }

    /// The Gaussian weight exp(-x^2) on the real line.
    pub fn gaussian() -> Self {
        Weight1D {
            label: "gaussian".into(),
            base_half_width: f64::INFINITY,
            moments: Moments::Gaussian,
            scale: 1.0,
        }
    }

    /// A custom weight from a table of even moments `[m0, m2, m4, ...]`.
    pub fn from_moments(
        label: impl Into<String>,
        half_width: f64,
        even_moments: Vec<f64>,
    ) -> Result<Self> {
        let label = label.into();
        if !(half_width > 0.0) {
            return Err(Error::InvalidWeight(format!(
                "`{label}`: half-width must be positive, got {half_width}"
            )));
        }
        if even_moments.is_empty() {
            return Err(Error::InvalidWeight(format!("`{label}`: empty moment table")));
        }
        if let Some((j, m)) = even_moments
            .iter()
            .enumerate()
            .find(|(_, m)| !(m.is_finite() && **m > 0.0))
        {
            return Err(Error::InvalidWeight(format!(
                "`{label}`: moment of order {} must be finite and positive, got {m}",
                2 * j
            )));
        }
        // Log-convexity of the even moments (Cauchy-Schwarz) and the support
        // bound m_{2j+2} <= h^2 m_{2j}.
        for j in 1..even_moments.len().saturating_sub(1) {
            let lhs = even_moments[j] * even_moments[j];
            let rhs = even_moments[j - 1] * even_moments[j + 1];
            if lhs > rhs * (1.0 + 1e-12) {
                return Err(Error::InvalidWeight(format!(
                    "`{label}`: moments violate Cauchy-Schwarz at order {}",
                    2 * j
                )));
            }
        }
        if half_width.is_finite() {
            for j in 1..even_moments.len() {
                if even_moments[j] > half_width * half_width * even_moments[j - 1] * (1.0 + 1e-12) {
                    return Err(Error::InvalidWeight(format!(
                        "`{label}`: moment of order {} too large for half-width {half_width}",
                        2 * j
                    )));
                }
            }
        }
        Ok(Weight1D {
            label,
            base_half_width: half_width,
            moments: Moments::Table(even_moments),
            scale: 1.0,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Radius of the symmetric domain; `f64::INFINITY` for the real line.
    pub fn half_width(&self) -> f64 {
        self.base_half_width / self.scale
    }

    /// `Some("lebesgue")` / `Some("gaussian")` for unscaled built-ins.
    pub fn builtin_name(&self) -> Option<&'static str> {
        if self.scale != 1.0 {
            return None;
        }
        match self.moments {
            Moments::Lebesgue => Some("lebesgue"),
            Moments::Gaussian => Some("gaussian"),
            Moments::Table(_) => None,
        }
    }

    /// Built-in name and scale, also for rescaled built-ins.
    pub fn builtin_parts(&self) -> Option<(&'static str, f64)> {
        match self.moments {
            Moments::Lebesgue => Some(("lebesgue", self.scale)),
            Moments::Gaussian => Some(("gaussian", self.scale)),
            Moments::Table(_) => None,
        }
    }

    /// Highest moment order available, `None` when unlimited.
    pub fn max_order(&self) -> Option<usize> {
        match &self.moments {
            Moments::Table(t) => Some(2 * (t.len() - 1)),
            _ => None,
        }
    }

    /// ∫ x^order ρ(x) dx. Odd orders are exactly zero.
    pub fn moment(&self, order: usize) -> Result<f64> {
        if order % 2 == 1 {
            return Ok(0.0);
        }
        let base = match &self.moments {
            Moments::Lebesgue => 2.0 / (order as f64 + 1.0),
            Moments::Gaussian => gamma_half(order as u32 + 1),
            Moments::Table(t) => *t.get(order / 2).ok_or_else(|| Error::InsufficientMoments {
                label: self.label.clone(),
                required: order,
                available: 2 * (t.len() - 1),
            })?,
        };
        Ok(base / self.scale.powi(order as i32))
    }

    /// Total mass m0.
    pub fn mass(&self) -> f64 {
        self.moment(0).expect("m0 always present")
    }

    /// m2 / m0.
    pub fn variance(&self) -> Result<f64> {
        Ok(self.moment(2)? / self.mass())
    }

    /// The weight expressed in the coordinate y = x / s. A rule with knots
    /// y_i and weights a_i for the returned weight is a rule with knots
    /// s y_i and the same weights for `self`.
    pub fn rescaled(&self, s: f64) -> Weight1D {
        assert!(s > 0.0 && s.is_finite());
        Weight1D {
            scale: self.scale * s,
            ..self.clone()
        }
    }

    /// Even moments m0..m_{2(count-1)} as a plain table, for serialisation.
    pub fn moment_table(&self, count: usize) -> Vec<f64> {
        let count = match self.max_order() {
            Some(max) => count.min(max / 2 + 1),
            None => count,
        };
        (0..count).map(|j| self.moment(2 * j).unwrap()).collect()
    }
}

/// A product weight ρ(x) = ρ_1(x_1) ... ρ_d(x_d).
#[derive(Debug, Clone, PartialEq)]
pub struct ProductWeight {
    factors: Vec<Weight1D>,
}

impl ProductWeight {
    pub fn new(factors: Vec<Weight1D>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument("product weight needs at least one factor".into()));
        }
        Ok(ProductWeight { factors })
    }

    /// The fully symmetric product of `d` copies of `w`.
    pub fn uniform(w: Weight1D, d: usize) -> Self {
        assert!(d >= 1);
        ProductWeight { factors: vec![w; d] }
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Weight1D] {
        &self.factors
    }

    pub fn factor(&self, j: usize) -> &Weight1D {
        &self.factors[j]
    }

    /// True iff all factors coincide.
    pub fn fully_symmetric(&self) -> bool {
        self.factors.windows(2).all(|w| w[0] == w[1])
    }

    /// ∫ x^α ρ(x) dx as a product of 1D moments.
    pub fn moment(&self, alpha: &[u32]) -> Result<f64> {
        if alpha.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: alpha.len(),
            });
        }
        if alpha.iter().any(|a| a % 2 == 1) {
            return Ok(0.0);
        }
        alpha
            .iter()
            .zip(&self.factors)
            .try_fold(1.0, |acc, (a, w)| Ok(acc * w.moment(*a as usize)?))
    }

    pub fn mass(&self) -> f64 {
        self.factors.iter().map(Weight1D::mass).product()
    }

    /// Coordinate-wise rescaling y_j = x_j / s_j.
    pub fn rescaled(&self, scales: &[f64]) -> ProductWeight {
        assert_eq!(scales.len(), self.dim());
        ProductWeight {
            factors: self
                .factors
                .iter()
                .zip(scales)
                .map(|(w, s)| w.rescaled(*s))
                .collect(),
        }
    }
}

/// A symmetric one-dimensional quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule1D {
    knots: Vec<f64>,
    weights: Vec<f64>,
    exact_degree: usize,
}

impl Rule1D {
    /// Knots in increasing order.
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Largest verified degree of polynomial exactness.
    pub fn exact_degree(&self) -> usize {
        self.exact_degree
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    /// Σ a_i f(x_i), with mirrored knots summed pairwise.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> f64 {
        let n = self.knots.len();
        let mut acc = 0.0;
        for i in 0..n / 2 {
            let j = n - 1 - i;
            acc += self.weights[i] * f(self.knots[i]) + self.weights[j] * f(self.knots[j]);
        }
        if n % 2 == 1 {
            acc += self.weights[n / 2] * f(self.knots[n / 2]);
        }
        acc
    }
}

/// Builds a rule from the non-negative radii and the weights attached to
/// them (`weights[0]` belongs to the origin when `has_origin`).
fn assemble_rule(w: &Weight1D, radii: &[f64], has_origin: bool, pair_weights: &[f64]) -> Result<Rule1D> {
    let mut knots = Vec::with_capacity(2 * radii.len() + 1);
    let mut weights = Vec::with_capacity(knots.capacity());
    let offset = usize::from(has_origin);
    for (r, a) in radii.iter().zip(&pair_weights[offset..]).rev() {
        knots.push(-r);
        weights.push(*a);
    }
    if has_origin {
        knots.push(0.0);
        weights.push(pair_weights[0]);
    }
    for (r, a) in radii.iter().zip(&pair_weights[offset..]) {
        knots.push(*r);
        weights.push(*a);
    }
    let mut rule = Rule1D {
        knots,
        weights,
        exact_degree: 0,
    };
    rule.exact_degree = certified_degree(w, &rule);
    Ok(rule)
}

/// Largest odd ℓ such that the rule reproduces every even moment up to ℓ - 1;
/// checks as far as the available moments allow, capped at twice the rule size.
fn certified_degree(w: &Weight1D, rule: &Rule1D) -> usize {
    let cap = 2 * rule.len() + 2;
    let mut order = 0;
    loop {
        if order > cap {
            break;
        }
        let Ok(m) = w.moment(order) else { break };
        let approx = rule.apply(|x| x.powi(order as i32));
        if (approx - m).abs() > RULE_DEGREE_TOL * m.abs() {
            break;
        }
        order += 2;
    }
    // `order` is the first failing (or unchecked) even order.
    order.saturating_sub(1)
}

/// Splits a symmetric knot set into its positive radii and an origin flag.
fn symmetric_radii(w: &Weight1D, knots: &[f64]) -> Result<(Vec<f64>, bool)> {
    if knots.is_empty() {
        return Err(Error::DegenerateKnots("empty knot set".into()));
    }
    let mut sorted = knots.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let scale = sorted.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    for i in 1..n {
        if sorted[i] - sorted[i - 1] <= KNOT_EPS * scale {
            return Err(Error::DegenerateKnots(format!("duplicate knot {}", sorted[i])));
        }
    }
    for i in 0..n / 2 {
        if (sorted[i] + sorted[n - 1 - i]).abs() > KNOT_EPS * scale {
            return Err(Error::DegenerateKnots(format!(
                "knot set is not symmetric: {} has no mirror image",
                sorted[i]
            )));
        }
    }
    let has_origin = n % 2 == 1;
    if has_origin && sorted[n / 2].abs() > KNOT_EPS * scale {
        return Err(Error::DegenerateKnots("odd symmetric knot set must contain 0".into()));
    }
    let hw = w.half_width();
    let radii: Vec<f64> = sorted[n.div_ceil(2)..].to_vec();
    if let Some(r) = radii.iter().find(|r| **r > hw * (1.0 + KNOT_EPS)) {
        return Err(Error::Domain(format!("knot {r} outside [-{hw}, {hw}]")));
    }
    Ok((radii, has_origin))
}

/// The interpolatory rule on a symmetric knot set: weights match the even
/// moments 0, 2, ..., and mirrored knots share a weight. The system is solved
/// in the scaled basis (x / r_max)^{2j}.
pub fn interpolatory_rule(w: &Weight1D, knots: &[f64]) -> Result<Rule1D> {
    let (radii, has_origin) = symmetric_radii(w, knots)?;
    let unknowns = radii.len() + usize::from(has_origin);
    if radii.is_empty() {
        return assemble_rule(w, &radii, true, &[w.mass()]);
    }
    let r_max = radii[radii.len() - 1];
    let mut a = DMatrix::zeros(unknowns, unknowns);
    let mut b = DVector::zeros(unknowns);
    for j in 0..unknowns {
        b[j] = w.moment(2 * j)? / r_max.powi(2 * j as i32);
        let mut col = 0;
        if has_origin {
            a[(j, 0)] = if j == 0 { 1.0 } else { 0.0 };
            col = 1;
        }
        for (t, r) in radii.iter().enumerate() {
            let y = (r / r_max) * (r / r_max);
            a[(j, col + t)] = 2.0 * y.powi(j as i32);
        }
    }
    let sol = solve_square(a, &b)
        .ok_or_else(|| Error::DegenerateKnots(format!("moment system singular for radii {radii:?}")))?;
    let rule = assemble_rule(w, &radii, has_origin, sol.as_slice())?;
    let required = if has_origin { knots.len() } else { knots.len() - 1 };
    if rule.exact_degree < required {
        return Err(Error::DegenerateKnots(format!(
            "interpolatory rule only reaches degree {} (expected {required})",
            rule.exact_degree
        )));
    }
    Ok(rule)
}

/// The 3-point Gauss rule {-a, 0, a}, a = sqrt(m4 / m2).
pub fn gauss3(w: &Weight1D) -> Result<Rule1D> {
    let (m0, m2, m4) = (w.moment(0)?, w.moment(2)?, w.moment(4)?);
    let a = (m4 / m2).sqrt();
    let hw = w.half_width();
    if a > hw * (1.0 + KNOT_EPS) {
        return Err(Error::GaussKnotOutsideDomain { knot: a, half_width: hw });
    }
    let pair = m2 * m2 / (2.0 * m4);
    let center = m0 - m2 * m2 / m4;
    assemble_rule(w, &[a], true, &[center, pair])
}

/// A nested family X^1 ⊂ X^2 ⊂ ... of symmetric knot sets together with the
/// interpolatory rule on each level.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotLadder {
    /// Distinct knots in order of first appearance.
    knots: Vec<f64>,
    /// Knot ids of each level, sorted by knot value (aligned with the rule).
    levels: Vec<Vec<usize>>,
    rules: Vec<Rule1D>,
}

impl KnotLadder {
    /// X^1 = {0}; level i >= 2 adds the pairs ±r for r in `new_radii[i - 2]`
    /// (an empty entry repeats the previous level).
    pub fn from_radii(w: &Weight1D, new_radii: &[Vec<f64>]) -> Result<Self> {
        let hw = w.half_width();
        let mut knots = vec![0.0];
        let mut radii: Vec<f64> = Vec::new();
        let mut levels = vec![vec![0usize]];
        let mut rules = vec![interpolatory_rule(w, &[0.0])?];
        for (step, added) in new_radii.iter().enumerate() {
            let level = step + 2;
            for &r in added {
                if !(r > 0.0) || r > hw * (1.0 + KNOT_EPS) {
                    return Err(Error::Ladder(format!(
                        "radius {r} at level {level} is not in (0, {hw}]"
                    )));
                }
                if radii.iter().any(|p| (p - r).abs() <= KNOT_EPS * p.max(r)) {
                    return Err(Error::Ladder(format!("radius {r} repeated at level {level}")));
                }
                radii.push(r);
                knots.push(-r);
                knots.push(r);
            }
            let mut ids: Vec<usize> = (0..knots.len()).collect();
            ids.sort_by(|a, b| knots[*a].total_cmp(&knots[*b]));
            let values: Vec<f64> = ids.iter().map(|i| knots[*i]).collect();
            let rule = interpolatory_rule(w, &values)?;
            if rule.exact_degree < 2 * level - 1 {
                return Err(Error::Ladder(format!(
                    "level {level} rule has degree {} < {}",
                    rule.exact_degree,
                    2 * level - 1
                )));
            }
            levels.push(ids);
            rules.push(rule);
        }
        Ok(KnotLadder { knots, levels, rules })
    }

    /// Number of levels.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// n_i = |X^i| for i = 1..depth.
    pub fn cardinalities(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    /// All distinct knots, indexed by knot id.
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Knot ids of level `i` (1-based), sorted by value.
    pub fn level_ids(&self, i: usize) -> &[usize] {
        &self.levels[i - 1]
    }

    /// Knot values of level `i` (1-based), sorted.
    pub fn level_knots(&self, i: usize) -> Vec<f64> {
        self.levels[i - 1].iter().map(|id| self.knots[*id]).collect()
    }

    /// Interpolatory rule of level `i` (1-based).
    pub fn rule(&self, i: usize) -> &Rule1D {
        &self.rules[i - 1]
    }
}

/// Ladder with n_i = 2i - 1: X^2 = {-c, 0, c}, and each further level adds
/// one new pair. On a bounded domain the new radii are equidistant in
/// (c, half_width]; on the real line r_i = c i / 2.
pub fn default_ladder(w: &Weight1D, max_level: usize, level2_radius: f64) -> Result<KnotLadder> {
    let radii = default_radii(w.half_width(), max_level, level2_radius)?;
    KnotLadder::from_radii(w, &radii)
}

/// The radii used by [`default_ladder`], shared by constructions that need
/// identical ladders for several weights.
pub fn default_radii(half_width: f64, max_level: usize, c: f64) -> Result<Vec<Vec<f64>>> {
    if max_level == 0 {
        return Err(Error::Ladder("max_level must be at least 1".into()));
    }
    if !(c > 0.0) || c > half_width * (1.0 + KNOT_EPS) {
        return Err(Error::Ladder(format!(
            "level-2 radius {c} not in (0, {half_width}]"
        )));
    }
    let mut radii = Vec::new();
    if max_level >= 2 {
        radii.push(vec![c]);
    }
    if max_level >= 3 {
        if half_width.is_finite() && half_width <= c * (1.0 + KNOT_EPS) {
            return Err(Error::Ladder(format!(
                "no room for levels above 2: level-2 radius {c} already at the boundary {half_width}"
            )));
        }
        let extra = max_level - 2;
        for t in 1..=extra {
            let r = if half_width.is_finite() {
                c + (half_width - c) * t as f64 / extra as f64
            } else {
                c * (t + 2) as f64 / 2.0
            };
            radii.push(vec![r]);
        }
    }
    Ok(radii)
}

/// Ladder with n_i = 2i - 1 for i != 3 and n_3 = 3: levels 2 and 3 both use
/// the 3-point Gauss rule, level 4 adds two pairs, later levels one pair.
pub fn ladder_variant_n3(w: &Weight1D, max_level: usize) -> Result<KnotLadder> {
    if max_level == 0 {
        return Err(Error::Ladder("max_level must be at least 1".into()));
    }
    let mut radii: Vec<Vec<f64>> = Vec::new();
    if max_level >= 2 {
        let g = gauss3(w)?;
        let a = g.knots()[2];
        radii.push(vec![a]);
        if max_level >= 3 {
            radii.push(Vec::new());
        }
        if max_level >= 4 {
            let pairs = max_level - 2;
            let hw = w.half_width();
            if hw.is_finite() && hw <= a * (1.0 + KNOT_EPS) {
                return Err(Error::Ladder(format!(
                    "Gauss knot {a} sits on the boundary; no room for level 4"
                )));
            }
            let r = |t: usize| {
                if hw.is_finite() {
                    a + (hw - a) * t as f64 / pairs as f64
                } else {
                    a * (1.0 + t as f64 / 2.0)
                }
            };
            radii.push(vec![r(1), r(2)]);
            for t in 3..=pairs {
                radii.push(vec![r(t)]);
            }
        }
    }
    KnotLadder::from_radii(w, &radii)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn builtin_moments() {
        let leb = Weight1D::lebesgue();
        assert_eq!(leb.moment(2).unwrap(), 2.0 / 3.0);
        assert_eq!(leb.moment(1).unwrap(), 0.0);
        let g = Weight1D::gaussian();
        assert!(close(g.moment(0).unwrap(), 1.7724538509055159, 1e-15));
        assert!(close(g.moment(4).unwrap(), 0.75 * PI.sqrt(), 1e-15));
    }

    #[test]
    fn table_moments_and_shortfall() {
        let w = Weight1D::from_moments("t", 1.0, vec![2.0, 2.0 / 3.0]).unwrap();
        assert_eq!(w.moment(2).unwrap(), 2.0 / 3.0);
        assert_eq!(w.moment(3).unwrap(), 0.0);
        match w.moment(4) {
            Err(Error::InsufficientMoments { required, available, .. }) => {
                assert_eq!((required, available), (4, 2));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_inconsistent_tables() {
        assert!(Weight1D::from_moments("neg", 1.0, vec![1.0, -1.0]).is_err());
        // m2^2 > m0 m4
        assert!(Weight1D::from_moments("cs", f64::INFINITY, vec![1.0, 1.0, 0.5]).is_err());
        // support bound
        assert!(Weight1D::from_moments("wide", 1.0, vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn cauchy_schwarz_for_builtins() {
        for w in [Weight1D::lebesgue(), Weight1D::gaussian()] {
            for a in (0..=16).step_by(2) {
                for b in (0..=16).step_by(2) {
                    let mid = w.moment((a + b) / 2).unwrap();
                    let lhs = w.moment(a).unwrap() * w.moment(b).unwrap();
                    assert!(lhs >= mid * mid * (1.0 - 1e-14));
                }
            }
        }
    }

    #[test]
    fn rescaling_moments() {
        let w = Weight1D::lebesgue().rescaled(0.5);
        assert_eq!(w.half_width(), 2.0);
        assert!(close(w.moment(2).unwrap(), 8.0 / 3.0, 1e-15));
        assert!(w.builtin_name().is_none());
    }

    #[test]
    fn simpson_weights() {
        let r = interpolatory_rule(&Weight1D::lebesgue(), &[-1.0, 0.0, 1.0]).unwrap();
        let expect = [1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0];
        for (a, e) in r.weights().iter().zip(expect) {
            assert!(close(*a, e, 1e-14));
        }
        assert_eq!(r.exact_degree(), 3);
    }

    #[test]
    fn single_node_rule() {
        for w in [Weight1D::lebesgue(), Weight1D::gaussian()] {
            let r = interpolatory_rule(&w, &[0.0]).unwrap();
            assert_eq!(r.weights(), &[w.mass()]);
        }
    }

    #[test]
    fn gaussian_three_knot_interpolatory() {
        let r = interpolatory_rule(&Weight1D::gaussian(), &[-1.0, 0.0, 1.0]).unwrap();
        let s = PI.sqrt();
        let expect = [s / 4.0, s / 2.0, s / 4.0];
        for (a, e) in r.weights().iter().zip(expect) {
            assert!(close(*a, e, 1e-14));
        }
    }

    #[test]
    fn gauss3_lebesgue() {
        let r = gauss3(&Weight1D::lebesgue()).unwrap();
        assert!(close(r.knots()[2], 0.6f64.sqrt(), 1e-15));
        let expect = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        for (a, e) in r.weights().iter().zip(expect) {
            assert!(close(*a, e, 1e-14));
        }
        assert!(r.exact_degree() >= 5);
        // Independent check: composite Simpson on [-1, 1] with 20000 panels.
        for j in 0..=5 {
            let n = 20000;
            let h = 2.0 / n as f64;
            let f = |x: f64| x.powi(j);
            let mut s = f(-1.0) + f(1.0);
            for i in 1..n {
                let x = -1.0 + i as f64 * h;
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
            }
            let numeric = s * h / 3.0;
            assert!((r.apply(f) - numeric).abs() < 1e-12, "x^{j}");
        }
        assert_eq!(r.apply(|x| x.powi(5)), 0.0);
    }

    #[test]
    fn gauss3_gaussian() {
        let r = gauss3(&Weight1D::gaussian()).unwrap();
        let s = PI.sqrt();
        assert!(close(r.knots()[2], 1.5f64.sqrt(), 1e-15));
        let expect = [s / 6.0, 2.0 * s / 3.0, s / 6.0];
        for (a, e) in r.weights().iter().zip(expect) {
            assert!(close(*a, e, 1e-14));
        }
    }

    #[test]
    fn gauss3_matches_interpolatory() {
        for w in [Weight1D::lebesgue(), Weight1D::gaussian()] {
            let g = gauss3(&w).unwrap();
            let i = interpolatory_rule(&w, g.knots()).unwrap();
            for (a, b) in g.weights().iter().zip(i.weights()) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn gauss_knot_near_boundary() {
        let w = Weight1D::from_moments("edge", 1.0, vec![2.0, 0.9, 0.8]).unwrap();
        let r = gauss3(&w).unwrap();
        assert!(close(r.knots()[2], (0.8f64 / 0.9).sqrt(), 1e-15));
        assert!(r.knots()[2] < 1.0);
    }

    #[test]
    fn degenerate_knots() {
        let w = Weight1D::lebesgue();
        assert!(matches!(
            interpolatory_rule(&w, &[-0.5, 0.0, 0.5, 0.5]),
            Err(Error::DegenerateKnots(_))
        ));
        assert!(matches!(interpolatory_rule(&w, &[-0.5, 0.3]), Err(Error::DegenerateKnots(_))));
        assert!(matches!(interpolatory_rule(&w, &[-2.0, 0.0, 2.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn even_cardinality_rule() {
        let r = interpolatory_rule(&Weight1D::lebesgue(), &[-0.5, 0.5]).unwrap();
        assert!(r.exact_degree() >= 1);
        assert!(close(r.weights()[0], 1.0, 1e-15));
    }

    #[test]
    fn ladders() {
        let w = Weight1D::lebesgue();
        let base = default_ladder(&w, 1, 0.5).unwrap();
        assert_eq!(base.cardinalities(), vec![1]);
        let l = default_ladder(&w, 3, 0.5).unwrap();
        assert_eq!(l.cardinalities(), vec![1, 3, 5]);
        let g = default_ladder(&Weight1D::gaussian(), 3, 1.0).unwrap();
        assert_eq!(g.cardinalities(), vec![1, 3, 5]);
        assert_eq!(g.level_knots(3), vec![-1.5, -1.0, 0.0, 1.0, 1.5]);
        // Lebesgue with c = 1 leaves no room for a third level.
        assert!(default_ladder(&w, 3, 1.0).is_err());
        assert_eq!(default_ladder(&w, 2, 1.0).unwrap().cardinalities(), vec![1, 3]);
    }

    #[test]
    fn ladder_nesting_and_degree() {
        for w in [Weight1D::lebesgue(), Weight1D::gaussian()] {
            let l = default_ladder(&w, 6, 0.5).unwrap();
            for i in 2..=l.depth() {
                let prev = l.level_knots(i - 1);
                let cur = l.level_knots(i);
                assert!(prev.iter().all(|x| cur.contains(x)));
                assert!(l.rule(i).exact_degree() >= 2 * i - 1);
                assert!(cur.iter().all(|x| x.abs() <= w.half_width()));
            }
        }
    }

    #[test]
    fn variant_ladder() {
        let g = Weight1D::gaussian();
        let l = ladder_variant_n3(&g, 4).unwrap();
        assert_eq!(l.cardinalities(), vec![1, 3, 3, 7]);
        let a = 1.5f64.sqrt();
        let k2 = l.level_knots(2);
        assert!((k2[0] + a).abs() < 1e-15 && k2[1] == 0.0 && (k2[2] - a).abs() < 1e-15);
        let r3 = l.rule(3);
        assert!(r3.exact_degree() >= 5);
        let m4 = g.moment(4).unwrap();
        assert!(close(r3.apply(|x| x.powi(4)), m4, 1e-12));
        let leb = ladder_variant_n3(&Weight1D::lebesgue(), 5).unwrap();
        assert_eq!(leb.cardinalities(), vec![1, 3, 3, 7, 9]);
        assert!(leb.rule(5).exact_degree() >= 9);
    }
}
