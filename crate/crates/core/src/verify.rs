//! Exactness certification, Möller's lower bounds, dimensions of even/odd
//! polynomial subspaces and condition numbers.

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::formula::{CubatureFormula, Target};
use crate::multi_index::MultiIndex;
use crate::smolyak::count_closed_form;
use crate::special::{binomial, binomial_f64};
use crate::sphere::sphere_monomial_integral;

/// Environment variable overriding the default relative tolerance.
pub const TOL_ENV: &str = "SYMCUBE_TOL";

/// Default relative tolerance for an exactness sweep of the given degree.
/// `SYMCUBE_TOL` overrides it when set to a positive number.
pub fn default_tolerance(degree: usize) -> f64 {
    if let Some(t) = std::env::var(TOL_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<f64>().ok())
        .filter(|t| *t > 0.0)
    {
        return t;
    }
    if degree <= 5 {
        1e-9
    } else {
        1e-8
    }
}

/// How the monomial sweep treats central symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepPath {
    /// Even-only when the rule is exactly centrally symmetric, full otherwise.
    Auto,
    /// Every monomial, summed pairwise when partners exist.
    Full,
    /// Monomials of even total degree only; requires exact central symmetry.
    EvenOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactnessReport {
    pub degree: usize,
    /// Number of monomials of total degree <= `degree`.
    pub monomials: u128,
    /// Monomials actually evaluated.
    pub evaluated: usize,
    pub worst: MultiIndex,
    pub worst_value: f64,
    pub worst_exact: f64,
    pub max_abs_error: f64,
    pub max_rel_error: f64,
    /// Largest error among monomials of odd total degree (0 for a symmetric rule).
    pub max_odd_error: f64,
    pub tol: f64,
    pub symmetric: bool,
    pub pass: bool,
}

/// Exact value of the target integral on x^α, and the scale against which
/// the error on x^α is measured.
fn oracle(target: &Target, d: usize, alpha: &[u32]) -> Result<(f64, f64)> {
    let evened: Vec<u32> = alpha.iter().map(|a| a & !1).collect();
    match target {
        Target::Product(w) => {
            let exact = w.moment(alpha)?;
            let scale = if exact != 0.0 { exact.abs() } else { w.moment(&evened)?.abs() };
            Ok((exact, scale))
        }
        Target::Sphere { radius } => {
            let exact = sphere_monomial_integral(d, alpha, *radius);
            let scale = if exact != 0.0 {
                exact.abs()
            } else {
                sphere_monomial_integral(d, &evened, *radius).abs()
            };
            Ok((exact, scale))
        }
        Target::Mdk { k, radius } => {
            let exact = mdk_monomial(d, *k, *radius, alpha);
            let total: u32 = alpha.iter().sum();
            let scale = if exact != 0.0 {
                exact.abs()
            } else {
                mdk_monomial(d, *k, 1.0, &[]) * radius.powi(total as i32)
            };
            Ok((exact, scale))
        }
    }
}

/// Σ x^α over all x with exactly k coordinates in {±r}, the rest zero.
/// With an empty `alpha` this is the number of such points.
pub fn mdk_monomial(d: usize, k: usize, r: f64, alpha: &[u32]) -> f64 {
    if alpha.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    let support = alpha.iter().filter(|a| **a > 0).count();
    if support > k || k > d {
        return 0.0;
    }
    let total: u32 = alpha.iter().sum();
    2f64.powi(k as i32) * binomial_f64(d - support, k - support) * r.powi(total as i32)
}

/// Sweeps every monomial of total degree <= `degree` and compares the rule
/// against `target`.
pub fn exactness(rule: &CubatureFormula, target: &Target, degree: usize, tol: f64) -> Result<ExactnessReport> {
    exactness_with(rule, target, degree, tol, SweepPath::Auto)
}

pub fn exactness_with(
    rule: &CubatureFormula,
    target: &Target,
    degree: usize,
    tol: f64,
    path: SweepPath,
) -> Result<ExactnessReport> {
    let d = rule.dim();
    if let Target::Product(w) = target {
        if w.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: w.dim(),
            });
        }
    }
    let pairs = rule.symmetry_pairs();
    let symmetric = pairs.is_some();
    let even_only = match path {
        SweepPath::Auto => symmetric,
        SweepPath::Full => false,
        SweepPath::EvenOnly => {
            if !symmetric {
                return Err(Error::NotCentrallySymmetric);
            }
            true
        }
    };
    // Representatives of the symmetry classes, with the partner index.
    let reps: Vec<(usize, usize)> = match &pairs {
        Some(p) => p.iter().enumerate().filter(|(i, j)| i <= j).map(|(i, j)| (i, *j)).collect(),
        None => (0..rule.len()).map(|i| (i, i)).collect(),
    };
    let n = reps.len();
    // powers[t][j][e] = x_{rep t, j}^e and the same for the partner.
    let power_table = |idx: usize| -> Vec<Vec<f64>> {
        rule.point(idx)
            .iter()
            .map(|x| {
                let mut p = Vec::with_capacity(degree + 1);
                let mut v = 1.0;
                for _ in 0..=degree {
                    p.push(v);
                    v *= x;
                }
                p
            })
            .collect()
    };
    let rep_pows: Vec<Vec<Vec<f64>>> = reps.iter().map(|(i, _)| power_table(*i)).collect();
    let partner_pows: Vec<Vec<Vec<f64>>> = if symmetric {
        reps.iter().map(|(_, j)| power_table(*j)).collect()
    } else {
        Vec::new()
    };
    let wts = rule.weights();
    let mut report = ExactnessReport {
        degree,
        monomials: binomial((d + degree) as u64, d as u64),
        evaluated: 0,
        worst: vec![0; d],
        worst_value: 0.0,
        worst_exact: 0.0,
        max_abs_error: 0.0,
        max_rel_error: 0.0,
        max_odd_error: 0.0,
        tol,
        symmetric,
        pass: true,
    };
    let mut alpha = vec![0u32; d];
    let ones = vec![1.0; n];
    let mut err: Option<Error> = None;
    let mut leaf = |alpha: &[u32], rep_prod: &[f64], partner_prod: &[f64]| {
        if err.is_some() {
            return;
        }
        let total: u32 = alpha.iter().sum();
        if even_only && total % 2 == 1 {
            return;
        }
        let mut value = 0.0;
        for (t, (i, j)) in reps.iter().enumerate() {
            value += if !symmetric || i == j {
                wts[*i] * rep_prod[t]
            } else {
                wts[*i] * rep_prod[t] + wts[*j] * partner_prod[t]
            };
        }
        let (exact, scale) = match oracle(target, d, alpha) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                return;
            }
        };
        let abs = (value - exact).abs();
        let rel = if scale > 0.0 { abs / scale } else { abs };
        report.evaluated += 1;
        if total % 2 == 1 {
            report.max_odd_error = report.max_odd_error.max(abs);
        }
        report.max_abs_error = report.max_abs_error.max(abs);
        if report.evaluated == 1 || rel > report.max_rel_error {
            report.max_rel_error = rel;
            report.worst = alpha.to_vec();
            report.worst_value = value;
            report.worst_exact = exact;
        }
    };
    sweep(
        0,
        degree as u32,
        &mut alpha,
        &ones,
        &ones,
        &rep_pows,
        &partner_pows,
        symmetric,
        &mut leaf,
    );
    if let Some(e) = err {
        return Err(e);
    }
    report.pass = report.max_rel_error <= tol;
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    j: usize,
    budget: u32,
    alpha: &mut Vec<u32>,
    rep_prod: &[f64],
    partner_prod: &[f64],
    rep_pows: &[Vec<Vec<f64>>],
    partner_pows: &[Vec<Vec<f64>>],
    symmetric: bool,
    leaf: &mut impl FnMut(&[u32], &[f64], &[f64]),
) {
    let d = alpha.len();
    if j == d || budget == 0 {
        leaf(alpha, rep_prod, partner_prod);
        return;
    }
    // Graded order: higher exponents of the leading coordinate first.
    for e in (0..=budget).rev() {
        alpha[j] = e;
        if e == 0 {
            sweep(j + 1, budget, alpha, rep_prod, partner_prod, rep_pows, partner_pows, symmetric, leaf);
            continue;
        }
        let r: Vec<f64> = rep_prod
            .iter()
            .zip(rep_pows)
            .map(|(p, pw)| p * pw[j][e as usize])
            .collect();
        let s: Vec<f64> = if symmetric {
            partner_prod
                .iter()
                .zip(partner_pows)
                .map(|(p, pw)| p * pw[j][e as usize])
                .collect()
        } else {
            Vec::new()
        };
        sweep(j + 1, budget - e, alpha, &r, &s, rep_pows, partner_pows, symmetric, leaf);
    }
    alpha[j] = 0;
}

/// Möller's lower bound for the number of knots of a degree-ℓ formula,
/// ℓ = 2k + 1, for a centrally symmetric weight in d dimensions. The sums are
/// evaluated exactly after multiplying through by 2^d.
pub fn moller_bound(degree: usize, d: usize) -> Result<u128> {
    if degree % 2 == 0 {
        return Err(Error::InvalidArgument(format!("degree must be odd, got {degree}")));
    }
    if d == 0 {
        return Err(Error::InvalidArgument("d must be positive".into()));
    }
    let k = (degree - 1) / 2;
    let big = |v: u128| BigUint::from(v);
    let two_d = BigUint::from(1u8) << d;
    let mut scaled = big(binomial((d + k) as u64, d as u64)) * &two_d;
    for s in 1..d {
        let two_s = BigUint::from(1u8) << s;
        if k % 2 == 1 {
            scaled += two_s * big(binomial((s + k) as u64, s as u64));
        } else if k > 0 {
            scaled += (&two_d - two_s) * big(binomial((s + k - 1) as u64, s as u64));
        }
    }
    let (quot, rem) = (&scaled / &two_d, &scaled % &two_d);
    if rem != BigUint::from(0u8) {
        return Err(Error::Integrity(format!("Möller sum for ℓ = {degree}, d = {d} is not an integer")));
    }
    u128::try_from(quot).map_err(|_| Error::InvalidArgument("Möller bound exceeds 128 bits".into()))
}

/// The closed forms d² + d + 1 (k = 2) and (d³ + 3d² + 8d)/3 (k = 3).
pub fn moller_simple(k: usize, d: usize) -> Result<u128> {
    let x = d as u128;
    match k {
        2 => Ok(x * x + x + 1),
        3 => Ok((x * x * x + 3 * x * x + 8 * x) / 3),
        _ => Err(Error::Unsupported(format!("closed form only for k in {{2, 3}}, got {k}"))),
    }
}

/// Numbers of monomials of total degree <= k with even and with odd total
/// degree.
pub fn dim_even_odd(k: usize, d: usize) -> (u128, u128) {
    let mut even = 0;
    let mut odd = 0;
    for j in 0..=k {
        let n = if d == 0 {
            u128::from(j == 0)
        } else {
            binomial((j + d - 1) as u64, (d - 1) as u64)
        };
        if j % 2 == 0 {
            even += n;
        } else {
            odd += n;
        }
    }
    (even, odd)
}

/// σ(Q) = Σ|a_i| divided by the total mass of the target.
pub fn condition_number(rule: &CubatureFormula, target: &Target) -> Result<f64> {
    let (mass, _) = oracle(target, rule.dim(), &vec![0; rule.dim()])?;
    if !(mass > 0.0) {
        return Err(Error::InvalidArgument("target has no positive mass".into()));
    }
    Ok(rule.absolute_weight() / mass)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticsRow {
    pub d: usize,
    pub moller: u128,
    /// Möller bound divided by 2d^k/k!.
    pub moller_ratio: f64,
    pub smolyak: u128,
    /// Smolyak count divided by 2^k d^k / k!.
    pub smolyak_ratio: f64,
    /// Both ratios lie in [0.5, 2] (only asserted for d >= 10k).
    pub within_envelope: bool,
}

/// Compares the Möller bound and the Smolyak count with their leading-order
/// terms.
pub fn order_asymptotics(k: usize, dims: &[usize]) -> Result<Vec<AsymptoticsRow>> {
    if k == 0 || k > 8 {
        return Err(Error::InvalidArgument(format!("need 1 <= k <= 8, got {k}")));
    }
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    dims.iter()
        .map(|&d| {
            let moller = moller_bound(2 * k + 1, d)?;
            let smolyak = count_closed_form(k, d)?;
            let dk = (d as f64).powi(k as i32);
            let moller_ratio = moller as f64 / (2.0 * dk / fact);
            let smolyak_ratio = smolyak as f64 / (2f64.powi(k as i32) * dk / fact);
            let inside = |r: f64| (0.5..=2.0).contains(&r);
            Ok(AsymptoticsRow {
                d,
                moller,
                moller_ratio,
                smolyak,
                smolyak_ratio,
                within_envelope: inside(moller_ratio) && inside(smolyak_ratio),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{ProductWeight, Weight1D};

    #[test]
    fn moller_examples() {
        assert_eq!(moller_bound(5, 10).unwrap(), 111);
        assert_eq!(moller_bound(7, 20).unwrap(), 3120);
        assert_eq!(moller_bound(7, 100).unwrap(), 343600);
        assert_eq!(moller_bound(1, 4).unwrap(), 1);
    }

    #[test]
    fn moller_closed_forms() {
        assert_eq!(moller_simple(2, 25).unwrap(), 651);
        assert_eq!(moller_simple(3, 10).unwrap(), 460);
        assert_eq!(moller_simple(2, 1).unwrap(), 3);
        for d in 1..=200 {
            for k in [2, 3] {
                assert_eq!(moller_simple(k, d).unwrap(), moller_bound(2 * k + 1, d).unwrap());
            }
        }
    }

    #[test]
    fn moller_from_subspace_dimensions() {
        // For odd k the bound is twice the number of odd-degree monomials,
        // for even k twice the number of even-degree monomials minus one.
        for k in 1..=6 {
            for d in 1..=30 {
                let (e, o) = dim_even_odd(k, d);
                let expect = if k % 2 == 1 { 2 * o } else { 2 * e - 1 };
                assert_eq!(moller_bound(2 * k + 1, d).unwrap(), expect, "k={k} d={d}");
            }
        }
    }

    #[test]
    fn even_odd_dimensions() {
        assert_eq!(dim_even_odd(2, 2), (4, 2));
        assert_eq!(dim_even_odd(0, 5), (1, 0));
        let (e, o) = dim_even_odd(3, 10);
        assert_eq!(e + o, binomial(13, 10));
        assert_eq!(2 * o, 460);
    }

    #[test]
    fn asymptotics() {
        let rows = order_asymptotics(2, &[100]).unwrap();
        assert!((rows[0].moller_ratio - 1.0101).abs() < 1e-12);
        assert!(rows[0].within_envelope);
        for k in 1..=8 {
            let dims: Vec<usize> = (10 * k..10 * k + 5).collect();
            assert!(order_asymptotics(k, &dims).unwrap().iter().all(|r| r.within_envelope), "k={k}");
        }
        assert!(order_asymptotics(0, &[5]).is_err());
    }

    #[test]
    fn exactness_of_tensor_gauss() {
        let w1 = Weight1D::lebesgue();
        let g = crate::weights::gauss3(&w1).unwrap();
        let mut terms = Vec::new();
        for (x, a) in g.knots().iter().zip(g.weights()) {
            for (y, b) in g.knots().iter().zip(g.weights()) {
                terms.push((vec![*x, *y], a * b));
            }
        }
        let target = Target::Product(ProductWeight::uniform(w1, 2));
        let f = CubatureFormula::from_terms(2, &terms, 5, target.clone()).unwrap();
        let r = exactness(&f, &target, 5, 1e-12).unwrap();
        assert!(r.pass && r.symmetric);
        assert_eq!(r.monomials, 21);
        assert_eq!(r.max_odd_error, 0.0);
        let full = exactness_with(&f, &target, 5, 1e-12, SweepPath::Full).unwrap();
        assert!(full.pass);
        assert_eq!(full.evaluated, 21);
        assert_eq!(full.max_odd_error, 0.0);
        let r7 = exactness(&f, &target, 7, 1e-12).unwrap();
        assert!(!r7.pass);
        assert_eq!(r7.worst.iter().sum::<u32>(), 6);
    }

    #[test]
    fn mdk_oracle() {
        assert_eq!(mdk_monomial(4, 2, 1.0, &[]), 24.0);
        assert_eq!(mdk_monomial(4, 2, 1.0, &[2, 0, 0, 0]), 12.0);
        assert_eq!(mdk_monomial(4, 2, 1.0, &[2, 2, 0, 0]), 4.0);
        assert_eq!(mdk_monomial(4, 2, 1.0, &[2, 2, 2, 0]), 0.0);
    }

    #[test]
    fn condition_of_positive_rule() {
        let w1 = Weight1D::gaussian();
        let g = crate::weights::gauss3(&w1).unwrap();
        let terms: Vec<(Vec<f64>, f64)> = g.knots().iter().zip(g.weights()).map(|(x, a)| (vec![*x], *a)).collect();
        let target = Target::Product(ProductWeight::uniform(w1, 1));
        let f = CubatureFormula::from_terms(1, &terms, 5, target.clone()).unwrap();
        assert!((condition_number(&f, &target).unwrap() - 1.0).abs() < 1e-15);
    }
}
