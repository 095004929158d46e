use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use symcube::compose::{build_deg5, merge_knots, ring_solve_deg5};
use symcube::document::{FormulaDocument, Provenance};
use symcube::multi_index;
use symcube::smolyak::{count_closed_form, count_recursive, CountSequence};
use symcube::special::sphere_area;
use symcube::sphere::{project_to_sphere, SimplexFrame};
use symcube::verify::{dim_even_odd, exactness_with, moller_bound, SweepPath};
use symcube::weights::default_ladder;
use symcube::{CubatureFormula, ProductWeight, Target, Weight1D};

fn weight(gauss: bool) -> Weight1D {
    if gauss {
        Weight1D::gaussian()
    } else {
        Weight1D::lebesgue()
    }
}

/// Σ c_α x^α over all |α| <= 5 with coefficients from `coef`.
fn poly(d: usize, coef: &[f64]) -> impl Fn(&[f64]) -> f64 + '_ {
    let basis = multi_index::up_to_degree(d, 5);
    move |x: &[f64]| basis.iter().zip(coef).map(|(a, c)| c * multi_index::eval(a, x)).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn closed_form_matches_recursion(k in 0usize..=10, d in 1usize..=30) {
        prop_assert_eq!(
            count_closed_form(k, d).unwrap(),
            count_recursive(&CountSequence::Standard, d + k, d).unwrap()
        );
    }

    #[test]
    fn subspace_dimensions(k in 0usize..=6, d in 1usize..=30) {
        let (even, odd) = dim_even_odd(k, d);
        prop_assert_eq!(even + odd, symcube::special::binomial((d + k) as u64, k as u64));
        let bound = moller_bound(2 * k + 1, d).unwrap();
        if k % 2 == 1 {
            prop_assert_eq!(bound, 2 * odd);
        } else {
            prop_assert_eq!(bound, 2 * even - 1);
        }
    }

    #[test]
    fn simplex_gram(d in 1usize..=40, aligned in any::<bool>()) {
        let f = SimplexFrame::new(d, aligned).unwrap();
        let v = f.vertices();
        prop_assert_eq!(v.len(), d + 1);
        for i in 0..=d {
            let n: f64 = v[i].iter().map(|x| x * x).sum();
            prop_assert!((n - 1.0).abs() < 1e-14);
            for j in 0..i {
                let dot: f64 = v[i].iter().zip(&v[j]).map(|(a, b)| a * b).sum();
                prop_assert!((dot + 1.0 / d as f64).abs() < 1e-14, "{} {} {}", i, j, dot);
            }
        }
    }

    #[test]
    fn projection_preserves_area(d in 2usize..=8, radius in 0.2f64..3.0) {
        let ladder = symcube::weights::ladder_variant_n3(&Weight1D::gaussian(), 3).unwrap();
        let plan = symcube::smolyak::SmolyakPlan::shared(d + 2, d, ladder).unwrap();
        let rule = symcube::smolyak::combine(&plan, &ProductWeight::uniform(Weight1D::gaussian(), d)).unwrap();
        let p = project_to_sphere(&rule, radius, 2).unwrap();
        let area = sphere_area(d) * radius.powi(d as i32 - 1);
        prop_assert!((p.total_weight() - area).abs() <= 1e-10 * area);
    }

    #[test]
    fn ring_form_is_odd_free(d in 2usize..=9, gauss in any::<bool>(), gamma in 0.75f64..1.0) {
        let (form, _) = ring_solve_deg5(&weight(gauss), d, gamma).unwrap();
        let mut alpha = vec![0u32; d];
        alpha[0] = 1;
        prop_assert_eq!(form.monomial(&alpha).unwrap(), 0.0);
        alpha[0] = 3;
        alpha[d - 1] += 2;
        prop_assert_eq!(form.monomial(&alpha).unwrap(), 0.0);
    }

    #[test]
    fn merge_is_linear(d in 4usize..=7, gauss in any::<bool>(), seed in any::<u64>()) {
        let rule = build_deg5(&weight(gauss), d).unwrap().formula;
        // halves of every term, listed twice, plus injected zero weights
        let mut terms: Vec<(Vec<f64>, f64)> = Vec::new();
        for (x, a) in rule.points().zip(rule.weights()) {
            terms.push((x.to_vec(), a / 2.0));
            terms.push((x.to_vec(), a / 2.0));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..5 {
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-0.5..0.5)).collect();
            terms.push((x, 0.0));
        }
        let doubled = CubatureFormula::from_terms(d, &terms, 5, rule.target().clone()).unwrap();
        let merged = merge_knots(&doubled, 1e-12);
        prop_assert_eq!(merged.len(), rule.len());
        let basis = multi_index::up_to_degree(d, 5).len();
        for _ in 0..10 {
            let coef: Vec<f64> = (0..basis).map(|_| rng.random_range(-1.0..1.0)).collect();
            let p = poly(d, &coef);
            let a = rule.apply(&p);
            let b = merged.apply(&p);
            prop_assert!((a - b).abs() <= 1e-13 * rule.absolute_weight() * coef.iter().map(|c| c.abs()).sum::<f64>());
        }
    }

    #[test]
    fn sweep_paths_agree(d in 2usize..=5, gauss in any::<bool>(), which in 0usize..3, eps_pow in 6i32..14) {
        let w = weight(gauss);
        let pw = ProductWeight::uniform(w.clone(), d);
        let c = if w.half_width().is_finite() { 0.5 } else { 1.0 };
        let ladder = default_ladder(&w, 3, c).unwrap();
        let plan = symcube::smolyak::SmolyakPlan::shared(d + 2, d, ladder).unwrap();
        let rule = symcube::smolyak::combine(&plan, &pw).unwrap();
        // perturb a symmetric pair of weights
        let eps = [0.0, 10f64.powi(-eps_pow), 10f64.powi(-eps_pow) * 3.0][which];
        let pairs = rule.symmetry_pairs().unwrap();
        let mut weights = rule.weights().to_vec();
        let i = weights.len() - 1;
        weights[i] *= 1.0 + eps;
        weights[pairs[i]] = weights[i];
        let perturbed = CubatureFormula::new(d, rule.coords().to_vec(), weights, 5, Target::Product(pw.clone())).unwrap();
        let target = Target::Product(pw);
        let full = exactness_with(&perturbed, &target, 5, 1e-9, SweepPath::Full).unwrap();
        let even = exactness_with(&perturbed, &target, 5, 1e-9, SweepPath::EvenOnly).unwrap();
        let auto = exactness_with(&perturbed, &target, 5, 1e-9, SweepPath::Auto).unwrap();
        prop_assert_eq!(full.pass, even.pass);
        prop_assert_eq!(full.pass, auto.pass);
        prop_assert_eq!(full.max_odd_error, 0.0);
    }

    #[test]
    fn document_round_trip(d in 4usize..=6, gauss in any::<bool>(), scale in 0.1f64..10.0) {
        let w = weight(gauss).rescaled(scale);
        let rule = build_deg5(&w, d).unwrap().formula;
        let doc = FormulaDocument::from_formula(&rule, Provenance::new("build_deg5"));
        let back = FormulaDocument::from_json(&doc.to_json()).unwrap().to_formula().unwrap();
        prop_assert_eq!(back.coords(), rule.coords());
        prop_assert_eq!(back.weights(), rule.weights());
        prop_assert_eq!(back.target(), rule.target());
    }
}
