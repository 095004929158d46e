//! Few-point formulas assembled from point families: ring-form coefficient
//! solves, the degree 5 and 7 constructions for fully symmetric weights,
//! the construction for general product weights, and weight transfer.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::formula::{Counts, CubatureFormula, Target, MERGE_TOL};
use crate::linalg::solve_square;
use crate::multi_index::{self, MultiIndex};
use crate::smolyak::{combine, SmolyakPlan};
use crate::sphere::{
    decompose, h_points, m_points, mdk_replacement, mysovskikh_deg5_coefficients, mysovskikh_deg7_coefficients,
    product_deg5_coefficients, product_deg7_coefficients, projected_smolyak_sphere, rescale_sphere_rule, s_points,
    Decomposition, SimplexFrame,
};
use crate::verify::mdk_monomial;
use crate::weights::{default_radii, KnotLadder, ProductWeight, Weight1D};

/// Residual allowed in a coefficient solve, relative to the largest target
/// moment.
const SOLVE_TOL: f64 = 1e-10;

/// Agreement required between the direct solve and the route through the
/// Smolyak-type coefficients.
const CROSS_CHECK_TOL: f64 = 1e-9;

/// A symmetric point family used as a building block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// F^r(d, k): k coordinates equal to ±r, the others zero.
    M { k: usize, radius: f64 },
    /// Face centroids of a simplex of dimension k-1, radius r, with antipodes.
    S { k: usize, radius: f64 },
    /// The points v_i/4 + 3v_j/4 at radius r, with antipodes.
    STilde { radius: f64 },
    /// The origin.
    Origin,
}

impl Family {
    fn points(&self, d: usize, frame: &SimplexFrame) -> Result<Vec<Vec<f64>>> {
        match *self {
            Family::M { k, radius } => m_points(d, k, radius),
            Family::S { k, radius } => s_points(frame, k, radius),
            Family::STilde { radius } => Ok(h_points(frame, radius)),
            Family::Origin => Ok(vec![vec![0.0; d]]),
        }
    }

    /// Σ over the family of x^α; closed form for axis families.
    fn monomial_sum(&self, d: usize, frame: &SimplexFrame, alpha: &[u32]) -> Result<f64> {
        match *self {
            Family::M { k, radius } => Ok(mdk_monomial(d, k, radius, alpha)),
            Family::Origin => Ok(if alpha.iter().all(|a| *a == 0) { 1.0 } else { 0.0 }),
            _ => Ok(self
                .points(d, frame)?
                .iter()
                .map(|x| multi_index::eval(alpha, x))
                .sum()),
        }
    }

    fn describe(&self) -> String {
        match self {
            Family::M { k, radius } => format!("M(k={k}, r={radius})"),
            Family::S { k, radius } => format!("S(k={k}, r={radius})"),
            Family::STilde { radius } => format!("S~(r={radius})"),
            Family::Origin => "origin".into(),
        }
    }
}

/// Σ coefficient · (sum of f over the family).
#[derive(Debug, Clone)]
pub struct RingForm {
    pub dim: usize,
    pub degree: usize,
    pub terms: Vec<(Family, f64)>,
    pub frame: SimplexFrame,
}

impl RingForm {
    fn new(dim: usize, degree: usize, terms: Vec<(Family, f64)>, frame: SimplexFrame) -> Result<Self> {
        for (i, (a, _)) in terms.iter().enumerate() {
            if terms[..i].iter().any(|(b, _)| b == a) {
                return Err(Error::InvalidArgument(format!("family {} appears twice", a.describe())));
            }
        }
        Ok(RingForm {
            dim,
            degree,
            terms,
            frame,
        })
    }

    /// Value of the form on x^α.
    pub fn monomial(&self, alpha: &[u32]) -> Result<f64> {
        let mut acc = 0.0;
        for (f, c) in &self.terms {
            acc += c * f.monomial_sum(self.dim, &self.frame, alpha)?;
        }
        Ok(acc)
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.terms.iter().map(|(_, c)| *c).collect()
    }

    /// Expands the families into an explicit formula; coincident knots are
    /// merged. `counts.raw` is the total family size.
    pub fn to_formula(&self, target: Target) -> Result<CubatureFormula> {
        let mut terms = Vec::new();
        for (f, c) in &self.terms {
            for p in f.points(self.dim, &self.frame)? {
                terms.push((p, *c));
            }
        }
        let raw = terms.len();
        let f = CubatureFormula::from_terms(self.dim, &terms, self.degree, target)?.merged(MERGE_TOL);
        let merged = f.counts().merged;
        Ok(f.with_counts(Counts { raw, merged }))
    }
}

/// A square moment-matching solve and its verification residual.
#[derive(Debug, Clone)]
pub struct CoefficientSolve {
    pub basis: Vec<MultiIndex>,
    pub matrix: DMatrix<f64>,
    pub rhs: Vec<f64>,
    pub solution: Vec<f64>,
    /// Largest |form(x^α) - target(x^α)| over the verification set, relative
    /// to the largest target value there.
    pub residual: f64,
}

/// A column of the system: a fixed combination of families sharing one
/// unknown coefficient.
type Column = Vec<(Family, f64)>;

/// Exponent vectors with non-increasing even entries and total degree <= n,
/// padded to d: enough to certify fully symmetric forms.
fn even_partitions(d: usize, n: u32) -> Vec<MultiIndex> {
    multi_index::up_to_degree(d.min(n as usize / 2).max(1), n)
        .into_iter()
        .filter(|a| multi_index::all_even(a) && a.windows(2).all(|w| w[0] >= w[1]))
        .map(|mut a| {
            a.resize(d, 0);
            a
        })
        .collect()
}

fn solve_columns(
    d: usize,
    frame: &SimplexFrame,
    columns: &[Column],
    basis: &[MultiIndex],
    verify_set: &[MultiIndex],
    target: &dyn Fn(&[u32]) -> Result<f64>,
) -> Result<CoefficientSolve> {
    let n = columns.len();
    assert_eq!(basis.len(), n);
    let column_value = |col: &Column, alpha: &[u32]| -> Result<f64> {
        let mut acc = 0.0;
        for (f, c) in col {
            acc += c * f.monomial_sum(d, frame, alpha)?;
        }
        Ok(acc)
    };
    let mut a = DMatrix::zeros(n, n);
    let mut b = DVector::zeros(n);
    for (r, alpha) in basis.iter().enumerate() {
        b[r] = target(alpha)?;
        for (c, col) in columns.iter().enumerate() {
            a[(r, c)] = column_value(col, alpha)?;
        }
    }
    let x = solve_square(a.clone(), &b).ok_or_else(|| {
        let names: Vec<String> = columns
            .iter()
            .map(|c| c.iter().map(|(f, _)| f.describe()).collect::<Vec<_>>().join("+"))
            .collect();
        Error::SolveFailed(format!("singular system for families [{}]", names.join(", ")))
    })?;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for alpha in verify_set {
        let exact = target(alpha)?;
        let mut approx = 0.0;
        for (c, col) in columns.iter().enumerate() {
            approx += x[c] * column_value(col, alpha)?;
        }
        worst = worst.max((approx - exact).abs());
        scale = scale.max(exact.abs());
    }
    let residual = if scale > 0.0 { worst / scale } else { worst };
    if residual > SOLVE_TOL {
        return Err(Error::SolveFailed(format!("verification residual {residual:e} exceeds {SOLVE_TOL:e}")));
    }
    Ok(CoefficientSolve {
        basis: basis.to_vec(),
        matrix: a,
        rhs: b.iter().copied().collect(),
        solution: x.iter().copied().collect(),
        residual,
    })
}

fn basis_of(d: usize, rows: &[&[u32]]) -> Vec<MultiIndex> {
    rows.iter()
        .map(|r| {
            let mut a = r.to_vec();
            a.resize(d, 0);
            a
        })
        .collect()
}

fn uniform_moment(w: &Weight1D, alpha: &[u32]) -> Result<f64> {
    alpha.iter().try_fold(1.0, |acc, a| Ok(acc * w.moment(*a as usize)?))
}

fn check_gamma(w: &Weight1D, gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || gamma > w.half_width() * (1.0 + 1e-15) {
        return Err(Error::Domain(format!(
            "radius {gamma} outside (0, {}] for weight `{}`",
            w.half_width(),
            w.label()
        )));
    }
    Ok(())
}

const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn inv_sqrt3() -> f64 {
    (1.0f64 / 3.0).sqrt()
}

/// a1 M^{1/√2}_{d,2} + a2 M^{1/√2}_{d,1} + a3 M^γ_{d,1} + a4 Q0, exact of
/// degree 5 for the product of d copies of `w`.
pub fn ring_solve_deg5(w: &Weight1D, d: usize, gamma: f64) -> Result<(RingForm, CoefficientSolve)> {
    if d < 2 {
        return Err(Error::DimensionTooSmall { dim: d, degree: 5, min: 2 });
    }
    check_gamma(w, gamma)?;
    check_gamma(w, INV_SQRT2)?;
    if (gamma - INV_SQRT2).abs() <= 1e-12 {
        return Err(Error::SolveFailed(format!("radius {gamma} collides with 1/√2")));
    }
    let families = [
        Family::M { k: 2, radius: INV_SQRT2 },
        Family::M { k: 1, radius: INV_SQRT2 },
        Family::M { k: 1, radius: gamma },
        Family::Origin,
    ];
    let frame = SimplexFrame::aligned(d)?;
    let columns: Vec<Column> = families.iter().map(|f| vec![(*f, 1.0)]).collect();
    let basis = basis_of(d, &[&[], &[2], &[4], &[2, 2]]);
    let solve = solve_columns(d, &frame, &columns, &basis, &even_partitions(d, 4), &|a| uniform_moment(w, a))?;
    let terms = families.iter().copied().zip(solve.solution.iter().copied()).collect();
    Ok((RingForm::new(d, 5, terms, frame)?, solve))
}

/// a1 M^{1/√3}_{d,3} + a2 M^{1/√3}_{d,2} + a3 M^{1/√3}_{d,1} + a4 M^{γ1}_{d,2}
/// + a5 M^{γ1}_{d,1} + a6 M^{γ2}_{d,1} + a7 Q0, exact of degree 7.
pub fn ring_solve_deg7(w: &Weight1D, d: usize, gammas: (f64, f64)) -> Result<(RingForm, CoefficientSolve)> {
    if d < 3 {
        return Err(Error::DimensionTooSmall { dim: d, degree: 7, min: 3 });
    }
    let (g1, g2) = gammas;
    check_gamma(w, g1)?;
    check_gamma(w, g2)?;
    let s3 = inv_sqrt3();
    for (a, b) in [(g1, g2), (g1, s3), (g2, s3)] {
        if (a - b).abs() <= 1e-12 * a.max(b) {
            return Err(Error::SolveFailed(format!("radii {a} and {b} collide")));
        }
    }
    let families = [
        Family::M { k: 3, radius: s3 },
        Family::M { k: 2, radius: s3 },
        Family::M { k: 1, radius: s3 },
        Family::M { k: 2, radius: g1 },
        Family::M { k: 1, radius: g1 },
        Family::M { k: 1, radius: g2 },
        Family::Origin,
    ];
    let frame = SimplexFrame::aligned(d)?;
    let columns: Vec<Column> = families.iter().map(|f| vec![(*f, 1.0)]).collect();
    let basis = basis_of(d, &[&[], &[2], &[4], &[2, 2], &[2, 2, 2], &[4, 2], &[6]]);
    let solve = solve_columns(d, &frame, &columns, &basis, &even_partitions(d, 6), &|a| uniform_moment(w, a))?;
    let terms = families.iter().copied().zip(solve.solution.iter().copied()).collect();
    Ok((RingForm::new(d, 7, terms, frame)?, solve))
}

/// A constructed formula together with the data that produced it.
#[derive(Debug, Clone)]
pub struct Construction {
    pub formula: CubatureFormula,
    pub form: RingForm,
    /// Coefficients of the family groups from the direct solve.
    pub alphas: Vec<f64>,
    /// The same coefficients through the Smolyak-type coefficients and the
    /// sphere rules.
    pub alphas_via_ring: Vec<f64>,
    pub ring: CoefficientSolve,
    pub solve: CoefficientSolve,
    /// Factor applied to the knots to map back from the working scale.
    pub scale: f64,
}

/// Rescales `w` so that its half-width is at least 1; returns the working
/// weight and the factor mapping working knots back.
fn working_weight(w: &Weight1D) -> (Weight1D, f64) {
    let h = w.half_width();
    if h < 1.0 {
        (w.rescaled(h), h)
    } else {
        (w.clone(), 1.0)
    }
}

fn relative_gap(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

fn finish(
    form: RingForm,
    w: &Weight1D,
    d: usize,
    scale: f64,
    alphas: Vec<f64>,
    alphas_via_ring: Vec<f64>,
    ring: CoefficientSolve,
    solve: CoefficientSolve,
) -> Result<Construction> {
    let gap = relative_gap(&alphas, &alphas_via_ring);
    if gap > CROSS_CHECK_TOL {
        return Err(Error::Integrity(format!(
            "direct and Smolyak-route coefficients differ by {gap:e}"
        )));
    }
    let target = Target::Product(ProductWeight::uniform(w.clone(), d));
    let mut formula = form.to_formula(target)?;
    if scale != 1.0 {
        let counts = formula.counts();
        formula = formula.map_linear(&vec![scale; d], 1.0).with_counts(counts);
    }
    Ok(Construction {
        formula,
        form,
        alphas,
        alphas_via_ring,
        ring,
        solve,
        scale,
    })
}

/// The degree-5 formula
/// α1(S¹_{d,2} + d²(7-d)/(4(d-1)²) S¹_{d,1}) + α2 M¹_{d,1} + α3 M^{1/√2}_{d,1} + α4 Q0
/// for the product of d copies of `w`, d >= 4. The simplex frame has a
/// vertex at e_1, so the knot count is d² + 7d + 1.
pub fn build_deg5(w: &Weight1D, d: usize) -> Result<Construction> {
    if d < 4 {
        return Err(Error::DimensionTooSmall { dim: d, degree: 5, min: 4 });
    }
    let (ww, scale) = working_weight(w);
    let frame = SimplexFrame::aligned(d)?;
    let df = d as f64;
    let ratio = df * df * (7.0 - df) / (4.0 * (df - 1.0) * (df - 1.0));
    let columns: Vec<Column> = vec![
        vec![
            (Family::S { k: 2, radius: 1.0 }, 1.0),
            (Family::S { k: 1, radius: 1.0 }, ratio),
        ],
        vec![(Family::M { k: 1, radius: 1.0 }, 1.0)],
        vec![(Family::M { k: 1, radius: INV_SQRT2 }, 1.0)],
        vec![(Family::Origin, 1.0)],
    ];
    let basis = basis_of(d, &[&[], &[2], &[4], &[2, 2]]);
    let solve = solve_columns(d, &frame, &columns, &basis, &even_partitions(d, 4), &|a| uniform_moment(&ww, a))?;
    let alphas = solve.solution.clone();

    let (ring_form, _) = ring_solve_deg5(&ww, d, 1.0)?;
    let a = ring_form.coefficients();
    let (_, v2) = mysovskikh_deg5_coefficients(d);
    let (u1, u2) = product_deg5_coefficients(d);
    let via = vec![a[0] * v2 / u2, a[2] - a[0] * u1 / u2, a[1], a[3]];
    let (_, ring) = ring_solve_deg5(&ww, d, 1.0)?;

    let terms = vec![
        (Family::S { k: 2, radius: 1.0 }, alphas[0]),
        (Family::S { k: 1, radius: 1.0 }, alphas[0] * ratio),
        (Family::M { k: 1, radius: 1.0 }, alphas[1]),
        (Family::M { k: 1, radius: INV_SQRT2 }, alphas[2]),
        (Family::Origin, alphas[3]),
    ];
    let form = RingForm::new(d, 5, terms, frame)?;
    finish(form, w, d, scale, alphas, via, ring, solve)
}

/// The degree-7 formula
/// α1(v1 S¹_{d,1} + v2 S¹_{d,2} + v3 S¹_{d,3} + v4 S̃¹_d) + α2 M¹_{d,1}
/// + α3 M^{1/√2}_{d,2} + α4 M^{1/√2}_{d,1} + α5 M^{1/√3}_{d,2} + α6 M^{1/√3}_{d,1} + α7 Q0
/// for d >= 6, with (d³ + 21d² + 20d + 3)/3 knots.
pub fn build_deg7(w: &Weight1D, d: usize) -> Result<Construction> {
    if d < 6 {
        return Err(Error::DimensionTooSmall { dim: d, degree: 7, min: 6 });
    }
    let (ww, scale) = working_weight(w);
    let frame = SimplexFrame::aligned(d)?;
    let v = mysovskikh_deg7_coefficients(d, &frame)?;
    let s3 = inv_sqrt3();
    let simplex_group = vec![
        (Family::S { k: 1, radius: 1.0 }, v[0]),
        (Family::S { k: 2, radius: 1.0 }, v[1]),
        (Family::S { k: 3, radius: 1.0 }, v[2]),
        (Family::STilde { radius: 1.0 }, v[3]),
    ];
    let singles = [
        Family::M { k: 1, radius: 1.0 },
        Family::M { k: 2, radius: INV_SQRT2 },
        Family::M { k: 1, radius: INV_SQRT2 },
        Family::M { k: 2, radius: s3 },
        Family::M { k: 1, radius: s3 },
        Family::Origin,
    ];
    let mut columns: Vec<Column> = vec![simplex_group.clone()];
    columns.extend(singles.iter().map(|f| vec![(*f, 1.0)]));
    let basis = basis_of(d, &[&[], &[2], &[4], &[2, 2], &[2, 2, 2], &[4, 2], &[6]]);
    let solve = solve_columns(d, &frame, &columns, &basis, &even_partitions(d, 6), &|a| uniform_moment(&ww, a))?;
    let alphas = solve.solution.clone();

    let (ring_form, ring) = ring_solve_deg7(&ww, d, (INV_SQRT2, 1.0))?;
    let a = ring_form.coefficients();
    let [u1, u2, u3] = product_deg7_coefficients(d)?;
    let via = vec![a[0] / u3, a[5] - a[0] * u1 / u3, a[3] - a[0] * u2 / u3, a[4], a[1], a[2], a[6]];

    let mut terms: Vec<(Family, f64)> = simplex_group.iter().map(|(f, c)| (*f, c * alphas[0])).collect();
    terms.extend(singles.iter().copied().zip(alphas[1..].iter().copied()));
    let form = RingForm::new(d, 7, terms, frame)?;
    finish(form, w, d, scale, alphas, via, ring, solve)
}

/// Result of the construction for general product weights.
#[derive(Debug, Clone)]
pub struct GeneralConstruction {
    pub formula: CubatureFormula,
    /// Per-coordinate factors mapping working knots back.
    pub scales: Vec<f64>,
    /// Common weight of F(d, k) in the Smolyak rule (working scale).
    pub v: f64,
    /// Points of the Smolyak rule outside F(d, k).
    pub s: usize,
}

fn general_minimum(k: usize) -> Result<(usize, usize)> {
    match k {
        2 => Ok((5, 4)),
        3 => Ok((7, 6)),
        _ => Err(Error::Unsupported(format!("constructions exist for k in {{2, 3}}, got {k}"))),
    }
}

/// The degree-(2k+1) formula v(Q̃ - Q_r)/w + Q_s for a product weight whose
/// factors may differ (k = 2: d >= 4, k = 3: d >= 6).
///
/// Each coordinate is first rescaled so that all factors share the ratio
/// m2/m0 and every half-width is at least √k; the Smolyak rule then has one
/// common weight on F(d, k).
pub fn build_general(weight: &ProductWeight, k: usize) -> Result<GeneralConstruction> {
    let (degree, min) = general_minimum(k)?;
    let d = weight.dim();
    if d < min {
        return Err(Error::DimensionTooSmall { dim: d, degree, min });
    }
    let vars: Vec<f64> = weight.factors().iter().map(|w| w.variance()).collect::<Result<_>>()?;
    let kf = k as f64;
    let finite: Vec<f64> = weight
        .factors()
        .iter()
        .zip(&vars)
        .filter(|(w, _)| w.half_width().is_finite())
        .map(|(w, v)| kf * v / (w.half_width() * w.half_width()))
        .collect();
    let tau = if finite.is_empty() {
        vars.iter().fold(0.0f64, |m, v| m.max(*v))
    } else {
        finite.iter().fold(0.0f64, |m, v| m.max(*v))
    };
    let scales: Vec<f64> = vars.iter().map(|v| (v / tau).sqrt()).collect();
    let working = weight.rescaled(&scales);
    let ladders = working
        .factors()
        .iter()
        .map(|w| KnotLadder::from_radii(w, &default_radii(w.half_width(), k + 1, 1.0)?))
        .collect::<Result<Vec<_>>>()?;
    let plan = SmolyakPlan::per_coordinate(d + k, ladders)?;
    let smolyak = combine(&plan, &working)?;
    let Decomposition { w: v, remainder } = decompose(&smolyak, k, 1.0)?;
    let s = remainder.len();
    let frame = SimplexFrame::aligned(d)?;
    let z = mdk_replacement(d, k, &frame)?;
    let target = Target::Product(weight.clone());
    let combined = CubatureFormula::linear_combination(&[(v, &z), (1.0, &remainder)], degree, target.clone())?;
    let raw = z.counts().raw + s;
    let merged = combined.merged(MERGE_TOL);
    let counts = Counts {
        raw,
        merged: merged.counts().merged,
    };
    let formula = merged.map_linear(&scales, 1.0).with_counts(counts).canonicalize();
    check_domain(&formula, weight)?;
    Ok(GeneralConstruction { formula, scales, v, s })
}

/// Every knot lies in the closed domain of `weight`.
fn check_domain(rule: &CubatureFormula, weight: &ProductWeight) -> Result<()> {
    for x in rule.points() {
        for (xj, w) in x.iter().zip(weight.factors()) {
            let h = w.half_width();
            if xj.abs() > h * (1.0 + 1e-12) {
                return Err(Error::Domain(format!("knot coordinate {xj} outside [-{h}, {h}]")));
            }
        }
    }
    Ok(())
}

/// c_k = 2^{2k}/(k-1)!: the added-knot bound is c_k d^{k-1}.
pub fn transfer_bound(k: usize, d: usize) -> u128 {
    let fact: u128 = (1..k as u128).product();
    (1u128 << (2 * k)) / fact * (d as u128).pow(k as u32 - 1)
}

/// One side of a transfer: a product weight or the unit-sphere surface
/// measure.
#[derive(Debug, Clone, PartialEq)]
pub enum Side {
    Product(ProductWeight),
    Sphere,
}

impl Side {
    fn of(rule: &CubatureFormula) -> Result<Side> {
        match rule.target() {
            Target::Product(w) => Ok(Side::Product(w.clone())),
            Target::Sphere { .. } => Ok(Side::Sphere),
            Target::Mdk { .. } => Err(Error::InvalidArgument("cannot transfer a rule for M_(d,k)".into())),
        }
    }

    fn min_half_width(&self) -> f64 {
        match self {
            Side::Product(w) => w.factors().iter().fold(f64::INFINITY, |m, f| m.min(f.half_width())),
            Side::Sphere => f64::INFINITY,
        }
    }
}

/// Result of a transfer.
#[derive(Debug, Clone)]
pub struct Transfer {
    pub formula: CubatureFormula,
    /// Distinct knots of the output minus knots of the input.
    pub added: i64,
    /// c_k d^{k-1}.
    pub bound: u128,
    /// Common X² radius of both decompositions.
    pub c: f64,
    pub w_from: f64,
    pub w_to: f64,
}

/// Decomposition w M^c_{d,k} + Q_r of the Smolyak rule for a product weight
/// (n_i = 2i-1, shared radii), or of the projected Gaussian rule on the
/// sphere of radius c√k.
fn side_decomposition(side: &Side, d: usize, k: usize, c: f64, radii: &[Vec<f64>]) -> Result<Decomposition> {
    match side {
        Side::Product(w) => {
            let ladders = w
                .factors()
                .iter()
                .map(|f| KnotLadder::from_radii(f, radii))
                .collect::<Result<Vec<_>>>()?;
            let plan = SmolyakPlan::per_coordinate(d + k, ladders)?;
            decompose(&combine(&plan, w)?, k, c)
        }
        Side::Sphere => decompose(&projected_smolyak_sphere(d, k, c * (k as f64).sqrt())?, k, c),
    }
}

/// Moves `rule`, exact of degree 2k+1 for its own target, to the target
/// `to`: (w_to/w_from)(Q - Q_r,from) + Q_r,to, where w M^c_{d,k} + Q_r are
/// Smolyak decompositions for both sides sharing the radius c.
pub fn transfer_to(rule: &CubatureFormula, to: &Side, k: usize) -> Result<Transfer> {
    let (degree, _) = general_minimum(k)?;
    let d = rule.dim();
    if let Side::Product(w) = to {
        if w.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: w.dim(),
            });
        }
    }
    let from = Side::of(rule)?;
    let kf = (k as f64).sqrt();
    let both_sphere = from == Side::Sphere && *to == Side::Sphere;
    let h = from.min_half_width().min(to.min_half_width());
    let c = if both_sphere {
        1.0 / kf
    } else if h.is_finite() {
        (h / 2.0).min(1.0)
    } else {
        1.0
    };
    let radii = default_radii(h, k + 1, c)?;
    let working_radius = c * kf;
    let input = match from {
        Side::Sphere => rescale_sphere_rule(rule, working_radius)?,
        Side::Product(_) => rule.clone(),
    };
    let dec_from = side_decomposition(&from, d, k, c, &radii)?;
    let dec_to = side_decomposition(to, d, k, c, &radii)?;
    let ratio = dec_to.w / dec_from.w;
    let out_target = match to {
        Side::Product(w) => Target::Product(w.clone()),
        Side::Sphere => Target::Sphere { radius: working_radius },
    };
    // Combine the two remainders first so that identical decompositions
    // cancel exactly.
    let rest = CubatureFormula::linear_combination(
        &[(1.0, &dec_to.remainder), (-ratio, &dec_from.remainder)],
        degree,
        out_target.clone(),
    )?
    .merged(MERGE_TOL);
    let combined = CubatureFormula::linear_combination(&[(ratio, &input), (1.0, &rest)], degree, out_target)?;
    let raw = combined.len();
    let merged = combined.merged(MERGE_TOL);
    let mut formula = merged.clone().with_counts(Counts {
        raw,
        merged: merged.counts().merged,
    });
    match to {
        Side::Product(w) => check_domain(&formula, w)?,
        Side::Sphere => {
            let counts = formula.counts();
            formula = rescale_sphere_rule(&formula, 1.0)?.with_counts(counts).canonicalize();
        }
    }
    let added = formula.counts().merged as i64 - rule.len() as i64;
    Ok(Transfer {
        formula,
        added,
        bound: transfer_bound(k, d),
        c,
        w_from: dec_from.w,
        w_to: dec_to.w,
    })
}

/// Product-weight rule to another product weight.
pub fn transfer(rule: &CubatureFormula, target: &ProductWeight, k: usize) -> Result<Transfer> {
    transfer_to(rule, &Side::Product(target.clone()), k)
}

/// Product-weight rule to the surface measure of the unit sphere.
pub fn transfer_sphere(rule: &CubatureFormula, k: usize) -> Result<Transfer> {
    transfer_to(rule, &Side::Sphere, k)
}

/// Identifies knots within `tol` and sums their weights.
pub fn merge_knots(rule: &CubatureFormula, tol: f64) -> CubatureFormula {
    rule.clone().merged(tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::exactness;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn ring5_lebesgue_closed_forms() {
        for d in 2..=12 {
            let (form, solve) = ring_solve_deg5(&Weight1D::lebesgue(), d, 1.0).unwrap();
            let a: Vec<f64> = form.coefficients().iter().map(|x| x / 2f64.powi(d as i32)).collect();
            let df = d as f64;
            assert!(rel(a[0], 1.0 / 9.0) < 1e-12);
            assert!(rel(a[1], 22.0 / 45.0 - 2.0 * df / 9.0) < 1e-12);
            assert!(rel(a[2], 1.0 / 30.0) < 1e-12);
            assert!(rel(a[3], 2.0 * df * df / 9.0 - 37.0 * df / 45.0 + 1.0) < 1e-12);
            assert!(solve.residual < 1e-12);
            assert_eq!(form.monomial(&{
                let mut x = vec![0; d];
                x[0] = 1;
                x
            }).unwrap(), 0.0);
        }
    }

    #[test]
    fn ring5_exact_on_all_monomials() {
        for w in [Weight1D::lebesgue(), Weight1D::gaussian()] {
            for d in 2..=6 {
                let (form, _) = ring_solve_deg5(&w, d, 1.0).unwrap();
                let target = Target::Product(ProductWeight::uniform(w.clone(), d));
                let f = form.to_formula(target.clone()).unwrap();
                assert!(exactness(&f, &target, 5, 1e-12).unwrap().pass);
            }
        }
    }

    #[test]
    fn ring5_collision() {
        assert!(matches!(
            ring_solve_deg5(&Weight1D::lebesgue(), 4, INV_SQRT2),
            Err(Error::SolveFailed(_))
        ));
        assert!(ring_solve_deg5(&Weight1D::lebesgue(), 4, 1.5).is_err());
    }

    #[test]
    fn ring7_lebesgue_closed_forms() {
        for d in 3..=12 {
            let (form, _) = ring_solve_deg7(&Weight1D::lebesgue(), d, (INV_SQRT2, 1.0)).unwrap();
            let a: Vec<f64> = form.coefficients().iter().map(|x| x / 2f64.powi(d as i32)).collect();
            let df = d as f64;
            assert!(rel(a[0], 1.0 / 8.0) < 1e-12);
            assert!(rel(a[1], 7.0 / 20.0 - df / 4.0) < 1e-12);
            assert!(rel(a[2], 23.0 / 70.0 - 9.0 * df / 20.0 + df * df / 4.0) < 1e-12);
            assert!(rel(a[3], 8.0 / 45.0) < 1e-12);
            assert!(rel(a[4], 32.0 / 63.0 - 16.0 * df / 45.0) < 1e-12);
            assert!(rel(a[5], 1.0 / 21.0) < 1e-12);
            assert!(rel(a[6], -df.powi(3) / 6.0 + 5.0 * df * df / 9.0 - 659.0 * df / 630.0 + 1.0) < 1e-12);
        }
    }

    #[test]
    fn deg5_counts_and_exactness() {
        for w in [Weight1D::lebesgue(), Weight1D::gaussian()] {
            for d in 4..=8 {
                let c = build_deg5(&w, d).unwrap();
                assert_eq!(c.formula.counts().merged, d * d + 7 * d + 1, "d={d}");
                assert_eq!(c.formula.counts().raw, d * d + 7 * d + 3);
                let target = Target::Product(ProductWeight::uniform(w.clone(), d));
                assert!(exactness(&c.formula, &target, 5, 1e-9).unwrap().pass);
                assert!(!exactness(&c.formula, &target, 7, 1e-9).unwrap().pass);
            }
        }
        assert!(matches!(build_deg5(&Weight1D::lebesgue(), 3), Err(Error::DimensionTooSmall { .. })));
    }

    #[test]
    fn deg5_alpha_table() {
        for d in 4..=12 {
            let c = build_deg5(&Weight1D::lebesgue(), d).unwrap();
            let df = d as f64;
            let a: Vec<f64> = c.alphas.iter().map(|x| x / 2f64.powi(d as i32)).collect();
            assert!(rel(a[0], 2.0 * (df - 1.0).powi(2) / (9.0 * (df + 1.0).powi(2))) < 1e-12);
            assert!(rel(a[1], df / 18.0 - 17.0 / 90.0) < 1e-12);
            assert!(rel(a[2], 22.0 / 45.0 - 2.0 * df / 9.0) < 1e-12);
            assert!(rel(a[3], 2.0 * df * df / 9.0 - 37.0 * df / 45.0 + 1.0) < 1e-12);
        }
    }

    #[test]
    fn deg7_counts_and_exactness() {
        for w in [Weight1D::lebesgue(), Weight1D::gaussian()] {
            for d in 6..=7 {
                let c = build_deg7(&w, d).unwrap();
                assert_eq!(c.formula.counts().merged, (d * d * d + 21 * d * d + 20 * d + 3) / 3);
                let target = Target::Product(ProductWeight::uniform(w.clone(), d));
                let r = exactness(&c.formula, &target, 7, 1e-8).unwrap();
                assert!(r.pass, "{r:?}");
            }
        }
    }

    #[test]
    fn small_domain_is_rescaled() {
        let w = Weight1D::lebesgue().rescaled(2.0);
        assert_eq!(w.half_width(), 0.5);
        let c = build_deg5(&w, 5).unwrap();
        assert_eq!(c.scale, 0.5);
        assert!(c.formula.max_abs_coordinate() <= 0.5 + 1e-15);
        let target = Target::Product(ProductWeight::uniform(w, 5));
        assert!(exactness(&c.formula, &target, 5, 1e-9).unwrap().pass);
    }

    #[test]
    fn general_mixed_weights() {
        let leb = Weight1D::lebesgue();
        let gauss = Weight1D::gaussian();
        let t = Weight1D::from_moments("t", 2.0, vec![1.0, 0.5, 0.4, 0.4, 0.45]).unwrap();
        for d in 4..=6 {
            let factors: Vec<Weight1D> = (0..d).map(|j| [leb.clone(), gauss.clone(), t.clone()][j % 3].clone()).collect();
            let w = ProductWeight::new(factors).unwrap();
            let g = build_general(&w, 2).unwrap();
            let full = d * d + 9 * d + 3;
            // at d = 4 the axis part of the projected rule vanishes
            assert_eq!(g.formula.counts().raw, if d == 4 { full - 2 * d } else { full });
            assert!(g.formula.counts().merged <= full - 2);
            assert_eq!(g.s, 4 * d + 1);
            let target = Target::Product(w);
            let r = exactness(&g.formula, &target, 5, 1e-9).unwrap();
            assert!(r.pass, "d={d} {r:?}");
        }
    }

    #[test]
    fn general_degree7() {
        let w = ProductWeight::uniform(Weight1D::lebesgue(), 6);
        let g = build_general(&w, 3).unwrap();
        assert!(g.formula.counts().merged <= (216 + 1188 + 84 + 3) / 3);
        let r = exactness(&g.formula, &Target::Product(w), 7, 1e-8).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn transfer_lebesgue_gaussian() {
        for d in [4, 6, 8] {
            let src = build_deg5(&Weight1D::lebesgue(), d).unwrap().formula;
            let to = ProductWeight::uniform(Weight1D::gaussian(), d);
            let t = transfer(&src, &to, 2).unwrap();
            assert!(t.added <= 16 * d as i64);
            let r = exactness(&t.formula, &Target::Product(to), 5, 1e-9).unwrap();
            assert!(r.pass, "{r:?}");
            let back = build_deg5(&Weight1D::gaussian(), d).unwrap().formula;
            let to = ProductWeight::uniform(Weight1D::lebesgue(), d);
            let t = transfer(&back, &to, 2).unwrap();
            assert!(exactness(&t.formula, &Target::Product(to), 5, 1e-9).unwrap().pass);
        }
    }

    #[test]
    fn identity_transfer() {
        let src = build_deg5(&Weight1D::lebesgue(), 6).unwrap().formula;
        let t = transfer(&src, &ProductWeight::uniform(Weight1D::lebesgue(), 6), 2).unwrap();
        assert_eq!(t.added, 0);
        assert_eq!(t.formula.coords(), src.coords());
        assert_eq!(t.formula.weights(), src.weights());
    }

    #[test]
    fn transfer_to_and_from_sphere() {
        let d = 6;
        let src = build_deg5(&Weight1D::gaussian(), d).unwrap().formula;
        let t = transfer_sphere(&src, 2).unwrap();
        assert!(t.added <= 16 * d as i64);
        let r = exactness(&t.formula, &Target::Sphere { radius: 1.0 }, 5, 1e-9).unwrap();
        assert!(r.pass, "{r:?}");
        let sph = crate::sphere::mysovskikh_deg5(d, &SimplexFrame::aligned(d).unwrap()).unwrap();
        let to = ProductWeight::uniform(Weight1D::lebesgue(), d);
        let back = transfer(&sph, &to, 2).unwrap();
        assert!(exactness(&back.formula, &Target::Product(to), 5, 1e-9).unwrap().pass);
        let same = transfer_to(&sph, &Side::Sphere, 2).unwrap();
        assert!(exactness(&same.formula, &Target::Sphere { radius: 1.0 }, 5, 1e-9).unwrap().pass);
        assert_eq!(same.added, 0);
    }

    #[test]
    fn bounds() {
        assert_eq!(transfer_bound(2, 10), 160);
        assert_eq!(transfer_bound(3, 10), 3200);
    }
}
