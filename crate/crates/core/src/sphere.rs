//! Point families on spheres, cubature rules for the surface measure, and
//! the replacement rule for the discrete functional M_{d,k}.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::formula::{Counts, CubatureFormula, Target, MERGE_TOL};
use crate::linalg::{least_squares, solve_square};
use crate::multi_index::{self, MultiIndex};
use crate::smolyak::{combine, sparse_grid, SmolyakPlan};
use crate::special::{gamma_half, ln_gamma_half, sphere_area};
use crate::verify::mdk_monomial;
use crate::weights::{ladder_variant_n3, ProductWeight, Weight1D};

/// Residual allowed in the least-squares solve for the simplex degree-7 rule,
/// relative to the sphere area.
const SOLVE_RESIDUAL: f64 = 1e-10;

/// d + 1 unit vectors with pairwise inner products -1/d.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexFrame {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    aligned_first: bool,
}

impl SimplexFrame {
    /// With `aligned_first` the first vertex is exactly e_1; otherwise the
    /// aligned frame is turned by a fixed reflection so that no vertex lies
    /// on a coordinate axis.
    pub fn new(d: usize, aligned_first: bool) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("simplex frame needs d >= 1".into()));
        }
        let mut vertices = aligned_vertices(d);
        if !aligned_first && d > 1 {
            // Householder reflection I - 2uu^T with a generic u.
            let u: Vec<f64> = (0..d).map(|j| ((j + 2) as f64).sqrt()).collect();
            let norm2: f64 = u.iter().map(|x| x * x).sum();
            for v in &mut vertices {
                let dot: f64 = v.iter().zip(&u).map(|(a, b)| a * b).sum();
                for (x, uj) in v.iter_mut().zip(&u) {
                    *x -= 2.0 * dot / norm2 * uj;
                }
            }
        }
        Ok(SimplexFrame {
            dim: d,
            vertices,
            aligned_first,
        })
    }

    /// The frame with v_1 = e_1.
    pub fn aligned(d: usize) -> Result<Self> {
        SimplexFrame::new(d, true)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn aligned_first(&self) -> bool {
        self.aligned_first
    }
}

/// v_0 = e_1 and v_i = (-1/d, sqrt(1 - 1/d²) w_i) for the vertices w_i of
/// the (d-1)-dimensional frame.
fn aligned_vertices(d: usize) -> Vec<Vec<f64>> {
    if d == 1 {
        return vec![vec![1.0], vec![-1.0]];
    }
    let inner = aligned_vertices(d - 1);
    let df = d as f64;
    let shrink = (1.0 - 1.0 / (df * df)).sqrt();
    let mut out = Vec::with_capacity(d + 1);
    let mut first = vec![0.0; d];
    first[0] = 1.0;
    out.push(first);
    for w in inner {
        let mut v = Vec::with_capacity(d);
        v.push(-1.0 / df);
        v.extend(w.iter().map(|x| shrink * x));
        out.push(v);
    }
    out
}

fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn scaled_to(mut p: Vec<f64>, r: f64) -> Vec<f64> {
    let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(norm > 0.0, "degenerate direction");
    for x in &mut p {
        *x *= r / norm;
    }
    p
}

fn with_antipodes(points: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * points.len());
    for p in points {
        let neg: Vec<f64> = p.iter().map(|x| -x + 0.0).collect();
        out.push(p);
        out.push(neg);
    }
    out
}

/// F^r(d, k): all vectors with exactly k nonzero coordinates, each ±r.
pub fn m_points(d: usize, k: usize, r: f64) -> Result<Vec<Vec<f64>>> {
    if k == 0 || k > d {
        return Err(Error::EmptyFamily { k, d });
    }
    let mut out = Vec::new();
    for support in k_subsets(d, k) {
        for signs in 0..(1u64 << k) {
            let mut x = vec![0.0; d];
            for (t, j) in support.iter().enumerate() {
                x[*j] = if signs >> t & 1 == 1 { -r } else { r };
            }
            out.push(x);
        }
    }
    Ok(out)
}

/// Centroids of the (k-1)-dimensional faces of the simplex, scaled to
/// radius r, together with their antipodes.
pub fn s_points(frame: &SimplexFrame, k: usize, r: f64) -> Result<Vec<Vec<f64>>> {
    let d = frame.dim();
    if k == 0 || k > d {
        return Err(Error::EmptyFamily { k, d });
    }
    let pts = k_subsets(d + 1, k)
        .into_iter()
        .map(|face| {
            let mut c = vec![0.0; d];
            for i in face {
                for (x, v) in c.iter_mut().zip(&frame.vertices[i]) {
                    *x += v;
                }
            }
            scaled_to(c, r)
        })
        .collect();
    Ok(with_antipodes(pts))
}

/// The points v_i/4 + 3v_j/4 (i != j) scaled to radius r, with antipodes.
pub fn h_points(frame: &SimplexFrame, r: f64) -> Vec<Vec<f64>> {
    let v = frame.vertices();
    let mut pts = Vec::with_capacity(v.len() * (v.len() - 1));
    for (i, vi) in v.iter().enumerate() {
        for (j, vj) in v.iter().enumerate() {
            if i != j {
                pts.push(scaled_to(vi.iter().zip(vj).map(|(a, b)| 0.25 * a + 0.75 * b).collect(), r));
            }
        }
    }
    with_antipodes(pts)
}

/// ∫ x^α dω over the sphere of radius R in R^d:
/// 2 ∏Γ((α_j+1)/2) / Γ((d+|α|)/2) · R^{d-1+|α|}, zero when some α_j is odd.
pub fn sphere_monomial_integral(d: usize, alpha: &[u32], radius: f64) -> f64 {
    if alpha.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    let total: u32 = alpha.iter().sum();
    let den_arg = d as u32 + total;
    let scale = radius.powi(d as i32 - 1 + total as i32);
    if den_arg <= 300 {
        let num: f64 = alpha.iter().map(|a| gamma_half(a + 1)).product();
        2.0 * num / gamma_half(den_arg) * scale
    } else {
        let ln_num: f64 = alpha.iter().map(|a| ln_gamma_half(a + 1)).sum();
        2.0 * (ln_num - ln_gamma_half(den_arg)).exp() * scale
    }
}

fn family_terms(points: Vec<Vec<f64>>, weight: f64) -> Vec<(Vec<f64>, f64)> {
    points.into_iter().map(|p| (p, weight)).collect()
}

fn sphere_rule(d: usize, terms: &[(Vec<f64>, f64)], degree: usize, radius: f64) -> Result<CubatureFormula> {
    let raw = terms.len();
    let f = CubatureFormula::from_terms(d, terms, degree, Target::Sphere { radius })?;
    let merged = f.merged(MERGE_TOL);
    let counts = Counts {
        raw,
        merged: merged.counts().merged,
    };
    Ok(merged.with_counts(counts))
}

fn require_dim(d: usize, degree: usize, min: usize) -> Result<()> {
    if d < min {
        return Err(Error::DimensionTooSmall { dim: d, degree, min });
    }
    Ok(())
}

/// Coefficients (v1, v2) of the degree-5 simplex rule on the unit sphere.
pub fn mysovskikh_deg5_coefficients(d: usize) -> (f64, f64) {
    let (df, omega) = (d as f64, sphere_area(d));
    let p = (df + 1.0) * (df + 1.0) * (df + 2.0);
    (df * (7.0 - df) * omega / (2.0 * p), 2.0 * (df - 1.0) * (df - 1.0) * omega / (df * p))
}

/// v1 S¹_{d,1} + v2 S¹_{d,2}: (d+1)(d+2) points, degree 5 on the unit sphere.
pub fn mysovskikh_deg5(d: usize, frame: &SimplexFrame) -> Result<CubatureFormula> {
    require_dim(d, 5, 4)?;
    check_frame(frame, d)?;
    let (v1, v2) = mysovskikh_deg5_coefficients(d);
    let mut terms = family_terms(s_points(frame, 1, 1.0)?, v1);
    terms.extend(family_terms(s_points(frame, 2, 1.0)?, v2));
    sphere_rule(d, &terms, 5, 1.0)
}

/// Coefficients (u1, u2) of the degree-5 axis rule on the unit sphere.
pub fn product_deg5_coefficients(d: usize) -> (f64, f64) {
    let (df, omega) = (d as f64, sphere_area(d));
    ((4.0 - df) * omega / (2.0 * df * (df + 2.0)), omega / (df * (df + 2.0)))
}

/// u1 M¹_{d,1} + u2 M^{1/√2}_{d,2}: 2d² points, degree 5 on the unit sphere.
pub fn product_deg5_sphere(d: usize) -> Result<CubatureFormula> {
    require_dim(d, 5, 3)?;
    let (u1, u2) = product_deg5_coefficients(d);
    let mut terms = family_terms(m_points(d, 1, 1.0)?, u1);
    terms.extend(family_terms(m_points(d, 2, 0.5f64.sqrt())?, u2));
    sphere_rule(d, &terms, 5, 1.0)
}

/// Coefficients (u1, u2, u3) of u1 M¹_{d,1} + u2 M^{1/√2}_{d,2} + u3 M^{1/√3}_{d,3},
/// solved from the sphere integrals of 1, x1⁴, x1⁶.
pub fn product_deg7_coefficients(d: usize) -> Result<[f64; 3]> {
    require_dim(d, 7, 3)?;
    let radii = [1.0, 0.5f64.sqrt(), (1.0f64 / 3.0).sqrt()];
    let basis: [MultiIndex; 3] = [vec![], vec![4], vec![6]];
    let mut a = DMatrix::zeros(3, 3);
    let mut b = DVector::zeros(3);
    for (row, alpha) in basis.iter().enumerate() {
        let full = padded(alpha, d);
        b[row] = sphere_monomial_integral(d, &full, 1.0);
        for (col, r) in radii.iter().enumerate() {
            a[(row, col)] = mdk_monomial(d, col + 1, *r, &full);
        }
    }
    let x = solve_square(a, &b).ok_or_else(|| Error::SolveFailed("degree-7 axis sphere system is singular".into()))?;
    Ok([x[0], x[1], x[2]])
}

/// The degree-7 axis rule with (4d³ - 6d² + 8d)/3 points on the unit sphere.
pub fn product_deg7_sphere(d: usize) -> Result<CubatureFormula> {
    let [u1, u2, u3] = product_deg7_coefficients(d)?;
    let mut terms = family_terms(m_points(d, 1, 1.0)?, u1);
    terms.extend(family_terms(m_points(d, 2, 0.5f64.sqrt())?, u2));
    terms.extend(family_terms(m_points(d, 3, (1.0f64 / 3.0).sqrt())?, u3));
    sphere_rule(d, &terms, 7, 1.0)
}

fn padded(alpha: &[u32], d: usize) -> Vec<u32> {
    let mut full = alpha.to_vec();
    full.resize(d, 0);
    full
}

fn check_frame(frame: &SimplexFrame, d: usize) -> Result<()> {
    if frame.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: frame.dim(),
        });
    }
    Ok(())
}

/// Σ_{x ∈ points} x^α.
fn family_sum(points: &[Vec<f64>], alpha: &[u32]) -> f64 {
    points.iter().map(|x| multi_index::eval(alpha, x)).sum()
}

/// Coefficients (v1, ..., v4) of v1 S¹_{d,1} + v2 S¹_{d,2} + v3 S¹_{d,3} + v4 S̃¹_d,
/// fitted by least squares to the sphere integrals of every even monomial
/// of degree <= 6 in the first min(d, 4) coordinates.
pub fn mysovskikh_deg7_coefficients(d: usize, frame: &SimplexFrame) -> Result<[f64; 4]> {
    require_dim(d, 7, 6)?;
    check_frame(frame, d)?;
    let families = [
        s_points(frame, 1, 1.0)?,
        s_points(frame, 2, 1.0)?,
        s_points(frame, 3, 1.0)?,
        h_points(frame, 1.0),
    ];
    let lead = d.min(4);
    let rows: Vec<MultiIndex> = multi_index::up_to_degree(lead, 6)
        .into_iter()
        .filter(|a| multi_index::all_even(a))
        .map(|a| padded(&a, d))
        .collect();
    let mut a = DMatrix::zeros(rows.len(), 4);
    let mut b = DVector::zeros(rows.len());
    for (r, alpha) in rows.iter().enumerate() {
        b[r] = sphere_monomial_integral(d, alpha, 1.0);
        for (c, fam) in families.iter().enumerate() {
            a[(r, c)] = family_sum(fam, alpha);
        }
    }
    let (x, rank) = least_squares(&a, &b).ok_or_else(|| Error::SolveFailed("simplex degree-7 system".into()))?;
    if rank < 4 {
        return Err(Error::SolveFailed(format!("simplex degree-7 system has rank {rank} < 4")));
    }
    let residual = (&a * &x - &b).amax();
    let omega = sphere_area(d);
    if residual > SOLVE_RESIDUAL * omega {
        return Err(Error::SolveFailed(format!(
            "simplex degree-7 residual {residual:e} exceeds {:e}",
            SOLVE_RESIDUAL * omega
        )));
    }
    Ok([x[0], x[1], x[2], x[3]])
}

/// The degree-7 simplex rule with (d³ + 9d² + 14d + 6)/3 points.
pub fn mysovskikh_deg7(d: usize, frame: &SimplexFrame) -> Result<CubatureFormula> {
    let v = mysovskikh_deg7_coefficients(d, frame)?;
    let mut terms = family_terms(s_points(frame, 1, 1.0)?, v[0]);
    terms.extend(family_terms(s_points(frame, 2, 1.0)?, v[1]));
    terms.extend(family_terms(s_points(frame, 3, 1.0)?, v[2]));
    terms.extend(family_terms(h_points(frame, 1.0), v[3]));
    sphere_rule(d, &terms, 7, 1.0)
}

/// Scales a rule on the sphere of radius R1 to radius R2: points × R2/R1,
/// weights × (R2/R1)^{d-1}.
pub fn rescale_sphere_rule(rule: &CubatureFormula, radius: f64) -> Result<CubatureFormula> {
    let Target::Sphere { radius: from } = rule.target() else {
        return Err(Error::InvalidArgument("not a sphere rule".into()));
    };
    let t = radius / from;
    let d = rule.dim();
    let counts = rule.counts();
    Ok(rule
        .clone()
        .map_linear(&vec![t; d], t.powi(d as i32 - 1))
        .with_target(Target::Sphere { radius })
        .with_counts(counts))
}

/// c(R, d, k) = ∫_0^∞ (r/R)^{d-1+2k} e^{-r²} dr = Γ((d+2k)/2) / (2 R^{d-1+2k}).
pub fn projection_constant(radius: f64, d: usize, k: usize) -> f64 {
    gamma_half((d + 2 * k) as u32) / (2.0 * radius.powi((d - 1 + 2 * k) as i32))
}

/// Radially projects a centrally symmetric rule of degree 2k+1 for
/// exp(-‖x‖²) onto the sphere of radius R. Knots at the origin are dropped
/// and coincident projections merged.
pub fn project_to_sphere(rule: &CubatureFormula, radius: f64, k: usize) -> Result<CubatureFormula> {
    if !rule.is_centrally_symmetric() {
        return Err(Error::NotCentrallySymmetric);
    }
    let d = rule.dim();
    let c = projection_constant(radius, d, k);
    let r2k = radius.powi(2 * k as i32);
    let mut terms = Vec::with_capacity(rule.len());
    for (x, a) in rule.points().zip(rule.weights()) {
        let norm2: f64 = x.iter().map(|v| v * v).sum();
        if norm2 == 0.0 {
            continue;
        }
        let norm = norm2.sqrt();
        let p: Vec<f64> = x.iter().map(|v| radius * v / norm).collect();
        terms.push((p, a * norm2.powi(k as i32) / (r2k * c)));
    }
    let raw = terms.len();
    let f = CubatureFormula::from_terms(d, &terms, 2 * k + 1, Target::Sphere { radius })?.merged(MERGE_TOL);
    let merged = f.counts().merged;
    Ok(f.with_counts(Counts { raw, merged }))
}

/// The Smolyak rule A(d+k, d) for exp(-‖x‖²) on the ladder with n_3 = 3,
/// projected onto the sphere of radius R.
///
/// `counts` describe the projected grid (distinct directions of the sparse
/// grid points other than the origin); knots whose weights cancel, such as the axis points at
/// d = 4, k = 2, are counted there but absent from the formula.
pub fn projected_smolyak_sphere(d: usize, k: usize, radius: f64) -> Result<CubatureFormula> {
    if !(1..=d).contains(&k) {
        return Err(Error::InvalidArgument(format!("need 1 <= k <= d, got k = {k}, d = {d}")));
    }
    let g = Weight1D::gaussian();
    let plan = SmolyakPlan::shared(d + k, d, ladder_variant_n3(&g, k + 1)?)?;
    let smolyak = combine(&plan, &ProductWeight::uniform(g, d))?;
    let projected = project_to_sphere(&smolyak, radius, k)?;
    let directions: Vec<(Vec<f64>, f64)> = sparse_grid(&plan)
        .into_iter()
        .filter_map(|x| {
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            (norm > 0.0).then(|| (x.iter().map(|v| v / norm).collect(), 1.0))
        })
        .collect();
    let raw = directions.len();
    let merged = CubatureFormula::from_terms(d, &directions, 0, Target::Sphere { radius: 1.0 })?
        .merged(MERGE_TOL)
        .counts()
        .merged;
    Ok(projected.with_counts(Counts { raw, merged }))
}

/// A rule split as w·M^c_{d,k} + remainder.
#[derive(Debug, Clone)]
pub struct Decomposition {
    /// Common weight of the points of F^c(d, k).
    pub w: f64,
    /// The remaining terms.
    pub remainder: CubatureFormula,
}

/// Splits `rule` into w·M^c_{d,k} + remainder, where the points of F^c(d,k)
/// are recognised within `MERGE_TOL` and must all be present with one
/// common weight.
pub fn decompose(rule: &CubatureFormula, k: usize, c: f64) -> Result<Decomposition> {
    let d = rule.dim();
    let is_f = |x: &[f64]| {
        let nonzero = x.iter().filter(|v| v.abs() > MERGE_TOL).count();
        nonzero == k && x.iter().all(|v| v.abs() <= MERGE_TOL || (v.abs() - c).abs() <= MERGE_TOL)
    };
    let mut f_weights = Vec::new();
    let mut rest = Vec::new();
    for (x, a) in rule.points().zip(rule.weights()) {
        if is_f(x) {
            f_weights.push(*a);
        } else {
            rest.push((x.to_vec(), *a));
        }
    }
    let expected = mdk_monomial(d, k, 1.0, &[]) as usize;
    if f_weights.len() != expected {
        return Err(Error::Integrity(format!(
            "found {} of the {expected} points of F(d, {k}) at radius {c}",
            f_weights.len()
        )));
    }
    let w = f_weights[0];
    let spread = f_weights.iter().fold(0.0f64, |m, a| m.max((a - w).abs()));
    if spread > 1e-12 * w.abs() {
        return Err(Error::Integrity(format!(
            "weights on F(d, {k}) are not uniform (spread {spread:e})"
        )));
    }
    if !(w > 0.0) {
        return Err(Error::Integrity(format!("weight on F(d, {k}) is {w}, must be positive")));
    }
    let w = f_weights.iter().sum::<f64>() / f_weights.len() as f64;
    let remainder = CubatureFormula::from_terms(d, &rest, rule.degree(), rule.target().clone())?;
    Ok(Decomposition { w, remainder })
}

/// A rule for M_{d,k} built as (Q̃ - Q_r)/w, where w·M_{d,k} + Q_r is the
/// projected Smolyak rule on the sphere of radius √k and Q̃ is the simplex
/// rule of degree 2k+1 on the same sphere.
pub fn mdk_replacement(d: usize, k: usize, frame: &SimplexFrame) -> Result<CubatureFormula> {
    let (degree, min) = match k {
        2 => (5, 4),
        3 => (7, 6),
        _ => return Err(Error::Unsupported(format!("M_(d,k) replacement only for k in {{2, 3}}, got {k}"))),
    };
    require_dim(d, degree, min)?;
    let radius = (k as f64).sqrt();
    let projected = projected_smolyak_sphere(d, k, radius)?;
    let parts = decompose(&projected, k, 1.0)?;
    let simplex = if k == 2 {
        mysovskikh_deg5(d, frame)?
    } else {
        mysovskikh_deg7(d, frame)?
    };
    let simplex = rescale_sphere_rule(&simplex, radius)?;
    let inv = 1.0 / parts.w;
    let combined = CubatureFormula::linear_combination(
        &[(inv, &simplex), (-inv, &parts.remainder)],
        degree,
        Target::Mdk { k, radius: 1.0 },
    )?;
    let raw = combined.len();
    let merged = combined.merged(MERGE_TOL);
    let counts = Counts {
        raw,
        merged: merged.counts().merged,
    };
    Ok(merged.with_counts(counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::exactness;
    use std::f64::consts::PI;

    #[test]
    fn frame_geometry() {
        for d in 1..=12 {
            for aligned in [true, false] {
                let f = SimplexFrame::new(d, aligned).unwrap();
                let v = f.vertices();
                assert_eq!(v.len(), d + 1);
                for i in 0..=d {
                    let n: f64 = v[i].iter().map(|x| x * x).sum();
                    assert!((n - 1.0).abs() < 1e-14);
                    for j in 0..i {
                        let dot: f64 = v[i].iter().zip(&v[j]).map(|(a, b)| a * b).sum();
                        assert!((dot + 1.0 / d as f64).abs() < 1e-14, "d={d}");
                    }
                }
                for t in 0..d {
                    let s: f64 = v.iter().map(|x| x[t]).sum();
                    assert!(s.abs() < 1e-13);
                }
                if aligned {
                    assert_eq!(v[0][0], 1.0);
                    assert!(v[0][1..].iter().all(|x| *x == 0.0));
                }
            }
        }
    }

    #[test]
    fn family_sizes() {
        assert_eq!(m_points(3, 1, 1.0).unwrap().len(), 6);
        assert_eq!(m_points(10, 2, 1.0).unwrap().len(), 180);
        assert_eq!(m_points(4, 4, 1.0).unwrap().len(), 16);
        assert!(matches!(m_points(3, 4, 1.0), Err(Error::EmptyFamily { .. })));
        let f = SimplexFrame::aligned(4).unwrap();
        assert_eq!(s_points(&f, 1, 1.0).unwrap().len(), 10);
        let s2 = s_points(&f, 2, 1.0).unwrap();
        assert_eq!(s2.len(), 20);
        assert!(s2.iter().all(|p| (p.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-14));
        let h = h_points(&SimplexFrame::aligned(2).unwrap(), 2.0);
        assert_eq!(h.len(), 12);
        assert!(h.iter().all(|p| (p.iter().map(|x| x * x).sum::<f64>().sqrt() - 2.0).abs() < 1e-12));
        for d in 4..=9 {
            let f = SimplexFrame::aligned(d).unwrap();
            let n = s_points(&f, 1, 1.0).unwrap().len() + s_points(&f, 2, 1.0).unwrap().len();
            assert_eq!(n, (d + 1) * (d + 2));
        }
    }

    #[test]
    fn h_points_are_asymmetric() {
        let f = SimplexFrame::aligned(3).unwrap();
        let h = h_points(&f, 1.0);
        // p_ij and p_ji are consecutive pairs apart; check all distinct.
        for i in 0..h.len() {
            for j in 0..i {
                assert!(h[i].iter().zip(&h[j]).any(|(a, b)| (a - b).abs() > 1e-9));
            }
        }
    }

    #[test]
    fn sphere_integrals() {
        assert!((sphere_monomial_integral(3, &[0, 0, 0], 1.0) - 4.0 * PI).abs() < 1e-14);
        assert_eq!(sphere_monomial_integral(5, &[1, 0, 0, 0, 0], 1.0), 0.0);
        assert!((sphere_monomial_integral(4, &[2, 0, 0, 0], 1.0) - PI * PI / 2.0).abs() < 1e-14);
        // Large arguments go through logarithms.
        let big = sphere_monomial_integral(300, &padded(&[4], 300), 1.0);
        let ratio = big / sphere_monomial_integral(300, &padded(&[], 300), 1.0);
        assert!((ratio - 3.0 / (300.0 * 302.0)).abs() < 1e-14);
    }

    #[test]
    fn degree5_rules() {
        for d in 4..=10 {
            let f = SimplexFrame::aligned(d).unwrap();
            let m = mysovskikh_deg5(d, &f).unwrap();
            assert_eq!(m.counts().merged, (d + 1) * (d + 2));
            let r = exactness(&m, &Target::Sphere { radius: 1.0 }, 5, 1e-12).unwrap();
            assert!(r.pass, "d={d} {r:?}");
            let p = product_deg5_sphere(d).unwrap();
            assert_eq!(p.counts().merged, 2 * d * d);
            assert!(exactness(&p, &Target::Sphere { radius: 1.0 }, 5, 1e-12).unwrap().pass);
        }
        assert_eq!(mysovskikh_deg5_coefficients(7).0, 0.0);
        assert_eq!(product_deg5_coefficients(4).0, 0.0);
        assert!(mysovskikh_deg5(3, &SimplexFrame::aligned(3).unwrap()).is_err());
        assert_eq!(mysovskikh_deg5(7, &SimplexFrame::aligned(7).unwrap()).unwrap().len(), 56);
    }

    #[test]
    fn degree7_rules() {
        for d in 6..=8 {
            let f = SimplexFrame::aligned(d).unwrap();
            let m = mysovskikh_deg7(d, &f).unwrap();
            assert_eq!(m.counts().merged, (d * d * d + 9 * d * d + 14 * d + 6) / 3);
            assert!(exactness(&m, &Target::Sphere { radius: 1.0 }, 7, 1e-11).unwrap().pass);
            let p = product_deg7_sphere(d).unwrap();
            assert_eq!(p.counts().merged, (4 * d * d * d - 6 * d * d + 8 * d) / 3);
            assert!(exactness(&p, &Target::Sphere { radius: 1.0 }, 7, 1e-11).unwrap().pass);
        }
        assert_eq!(product_deg7_sphere(6).unwrap().counts().merged, 232);
        assert_eq!(mysovskikh_deg7(6, &SimplexFrame::aligned(6).unwrap()).unwrap().len(), 210);
        let p = product_deg7_sphere(5).unwrap();
        assert_eq!(p.apply(|x| x[0] * x[0] * x[0] * x[1]), 0.0);
    }

    #[test]
    fn projection() {
        assert!((projection_constant(1.0, 2, 0) - 0.5).abs() < 1e-15);
        for d in 4..=8 {
            let p = projected_smolyak_sphere(d, 2, 2f64.sqrt()).unwrap();
            assert_eq!(p.counts().merged, 2 * d * d);
            // axis weights carry the factor 4 - d
            assert_eq!(p.len(), if d == 4 { 2 * d * d - 2 * d } else { 2 * d * d });
            let r = exactness(&p, &Target::Sphere { radius: 2f64.sqrt() }, 5, 1e-10).unwrap();
            assert!(r.pass, "{r:?}");
            let area = sphere_area(d) * 2f64.sqrt().powi(d as i32 - 1);
            assert!((p.total_weight() - area).abs() < 1e-10 * area);
        }
        for d in 3..=7 {
            let p = projected_smolyak_sphere(d, 3, 3f64.sqrt()).unwrap();
            assert_eq!(p.counts().merged as u128, crate::smolyak::count_projected(3, d).unwrap());
            assert!(exactness(&p, &Target::Sphere { radius: 3f64.sqrt() }, 7, 1e-10).unwrap().pass);
        }
    }

    #[test]
    fn projection_rejects_asymmetric() {
        let f = CubatureFormula::from_terms(1, &[(vec![1.0], 1.0)], 1, Target::Sphere { radius: 1.0 }).unwrap();
        assert!(matches!(project_to_sphere(&f, 1.0, 1), Err(Error::NotCentrallySymmetric)));
    }

    #[test]
    fn replacement() {
        for d in 4..=10 {
            let z = mdk_replacement(d, 2, &SimplexFrame::aligned(d).unwrap()).unwrap();
            assert!(z.counts().merged <= d * d + 5 * d + 2);
            let target = Target::Mdk { k: 2, radius: 1.0 };
            let r = exactness(&z, &target, 5, 1e-9).unwrap();
            assert!(r.pass, "d={d} {r:?}");
            let count = mdk_monomial(d, 2, 1.0, &[]);
            assert!((z.total_weight() - count).abs() < 1e-9 * count);
            assert!(z.points().all(|x| (x.iter().map(|v| v * v).sum::<f64>() - 2.0).abs() < 1e-12));
        }
        for d in 6..=8 {
            let z = mdk_replacement(d, 3, &SimplexFrame::aligned(d).unwrap()).unwrap();
            assert!(z.counts().merged <= (d * d * d + 15 * d * d + 14 * d + 6) / 3);
            assert!(exactness(&z, &Target::Mdk { k: 3, radius: 1.0 }, 7, 1e-9).unwrap().pass);
        }
        assert!(mdk_replacement(3, 2, &SimplexFrame::aligned(3).unwrap()).is_err());
    }

    #[test]
    fn remainder_size() {
        for d in 4..=10 {
            let p = projected_smolyak_sphere(d, 2, 2f64.sqrt()).unwrap();
            let parts = decompose(&p, 2, 1.0).unwrap();
            assert!(parts.remainder.len() <= 2 * d);
        }
    }
}
