use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use schur_besov::besov::dyadic_dilations;
use schur_besov::multiplier::{mikhlin_check, verify_fm_lq_lp};
use schur_besov::symbol::{IdentitySymbol, ScalarDecaySymbol};
use schur_besov::{
    apply_multiplier, convolve, BochnerFunction, CMatrix, MatrixField, NormedSpace, SearchBudget,
    Symbol, TorusGrid, C64,
};

fn random_scalar(grid: &TorusGrid, seed: u64) -> BochnerFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    grid.function(NormedSpace::scalar(), |_| {
        vec![C64::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        )]
    })
    .unwrap()
}

fn lp(grid: &TorusGrid, values: &[C64], p: f64) -> f64 {
    let h = grid.cell_volume();
    if p.is_infinite() {
        values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    } else {
        (h * values.iter().map(|z| z.norm().powf(p)).sum::<f64>()).powf(1.0 / p)
    }
}

#[test]
fn discrete_young_inequality_holds() {
    // ||k * f||_p <= ||k||_theta ||f||_q with 1/q + 1/theta = 1 + 1/p
    let grid = TorusGrid::new(1, 64, 16.0).unwrap();
    let k = MatrixField::from_fn(
        grid.clone(),
        NormedSpace::scalar(),
        NormedSpace::scalar(),
        |x| CMatrix::from_element(1, 1, C64::new((-x[0] * x[0]).exp(), 0.0)),
    )
    .unwrap();
    let kv: Vec<C64> = k.entries().iter().map(|m| m[(0, 0)]).collect();
    for (q, theta) in [(1.0, 2.0), (1.5, 1.5), (2.0, 1.0), (1.2, 3.0)] {
        let p = 1.0 / (1.0 / q + 1.0 / theta - 1.0);
        for seed in 0..5 {
            let f = random_scalar(&grid, seed);
            let g = convolve(&k, &f).unwrap();
            let lhs = lp(&grid, g.values(), p);
            let rhs = lp(&grid, &kv, theta) * lp(&grid, f.values(), q);
            assert!(
                lhs <= rhs * (1.0 + 1e-10),
                "q={q} theta={theta}: {lhs} > {rhs}"
            );
        }
    }
}

#[test]
fn multiplier_composition_multiplies_symbols() {
    let grid = TorusGrid::new(2, 16, 8.0).unwrap();
    let sym = |c: f64| {
        MatrixField::symbol_from_fn(
            &grid,
            NormedSpace::euclidean(2),
            NormedSpace::euclidean(2),
            |t| {
                CMatrix::from_fn(2, 2, |i, j| {
                    C64::new((c * (t[0] + i as f64) - t[1] * j as f64).cos(), c * t[1])
                })
            },
        )
        .unwrap()
    };
    let (a, b) = (sym(0.3), sym(-0.7));
    let ab = MatrixField::new(
        grid.dual(),
        NormedSpace::euclidean(2),
        NormedSpace::euclidean(2),
        a.entries()
            .iter()
            .zip(b.entries())
            .map(|(x, y)| x * y)
            .collect(),
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let f = grid
        .function(NormedSpace::euclidean(2), |_| {
            (0..2)
                .map(|_| C64::new(rng.sample(StandardNormal), 0.0))
                .collect()
        })
        .unwrap();
    let twice = apply_multiplier(&grid, &a, &apply_multiplier(&grid, &b, &f).unwrap()).unwrap();
    let once = apply_multiplier(&grid, &ab, &f).unwrap();
    let err = twice
        .values()
        .iter()
        .zip(once.values())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    assert!(err < 1e-11, "{err}");
}

#[test]
fn decay_symbol_derivative_bounds_match_closed_form() {
    // m(t) = (1 + t^2)^(-1/2): sup |m| = 1, sup (1 + |t|)|m'(t)| = sup (1+t)t/(1+t^2)^(3/2)
    let grid = TorusGrid::new(1, 256, 16.0).unwrap();
    let m = ScalarDecaySymbol::new(1.0, NormedSpace::scalar()).unwrap();
    let rep = mikhlin_check(&m, &grid, 2.0, 2.0, 1.0).unwrap();
    let first = grid
        .dual()
        .coordinates()
        .iter()
        .map(|t| {
            let t = t[0].abs();
            (1.0 + t) * t / (1.0 + t * t).powf(1.5)
        })
        .fold(0.0, f64::max);
    let term = rep.terms.iter().find(|(n, _)| n == "alpha=(1)").unwrap().1;
    assert!((term - first).abs() < 1e-9, "{term} vs {first}");
    assert!((rep.constant_a - 1.0).abs() < 1e-12);
    assert_eq!(rep.skipped_points, 0);
}

#[test]
fn identity_multiplier_has_unit_l2_norm() {
    let grid = TorusGrid::new(1, 32, 16.0).unwrap();
    let m: Arc<dyn Symbol> = Arc::new(IdentitySymbol::new(NormedSpace::euclidean(2)));
    let rep = verify_fm_lq_lp(
        m.as_ref(),
        &grid,
        2.0,
        2.0,
        2.0,
        &dyadic_dilations(3),
        &SearchBudget::default(),
        1,
    )
    .unwrap();
    assert!((rep.lower_bound - 1.0).abs() < 1e-9);
    assert!(rep.theory_constant.is_finite() && rep.theory_constant > 0.0);
}
