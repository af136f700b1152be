//! Schur-type constants of operator-valued kernels and the interpolated
//! `L_q -> L_p` bound `C1^(theta/p) (tau C2)^(1 - theta/p)`.

use serde::Serialize;

use crate::bochner::BochnerFunction;
use crate::error::Result;
use crate::exponent::{make_exponents, Exponent, ExponentTriple};
use crate::kernel::OperatorKernel;
use crate::operator::{estimate_norm, sphere_search, NormEstimate, SearchBudget};

/// Slack allowed on top of the bound when both constants are certified.
pub const EXACT_TOLERANCE: f64 = 1e-9;
/// Slack allowed when a constant comes from unit-sphere search.
pub const SEARCH_TOLERANCE: f64 = 1e-6;

/// A constant known through a searched lower estimate and a deterministic
/// upper bound. `exact` means the upper bound is the true value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConstantEstimate {
    pub lower: Option<f64>,
    pub upper: f64,
    pub exact: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SchurConstants {
    pub c1: ConstantEstimate,
    pub c2: ConstantEstimate,
    pub tau: f64,
    pub theta: f64,
}

/// Upper bound `max_s (sum_t mu_t ||k(t,s)||^theta)^(1/theta)` and whether it is exact.
pub fn schur_c1_upper(k: &OperatorKernel, theta: f64) -> Result<(f64, bool)> {
    let theta = Exponent::new(theta)?;
    let norms = k.pointwise_operator_norms();
    let ns = k.domain_space().len();
    let mu = k.codomain_space().weights();
    let scalar_source = k.source_space().dim() == 1;
    let mut exact = scalar_source;
    let mut best = 0.0_f64;
    for s in 0..ns {
        let col = mu.iter().enumerate().map(|(t, &w)| {
            let op = norms[t * ns + s];
            exact &= op.exact;
            (w, op.value)
        });
        best = best.max(theta.weighted_mean(col.collect::<Vec<_>>()));
    }
    Ok((best, exact))
}

/// `C1`: `sup_s sup_{||x||=1} (sum_t mu_t ||k(t,s) x||_Y^theta)^(1/theta)`.
pub fn schur_c1(
    k: &OperatorKernel,
    theta: f64,
    budget: &SearchBudget,
    seed: u64,
) -> Result<ConstantEstimate> {
    let (upper, exact) = schur_c1_upper(k, theta)?;
    if exact {
        return Ok(ConstantEstimate {
            lower: Some(upper),
            upper,
            exact,
        });
    }
    let lower = sup_column_norm(k, Exponent::new(theta)?, budget, seed)?.value;
    Ok(ConstantEstimate {
        lower: Some(lower.min(upper)),
        upper,
        exact,
    })
}

/// `C2`: the same quantity for the adjoint kernel `k*(s, t) = k(t, s)^H` on the duals.
pub fn schur_c2(
    k: &OperatorKernel,
    theta: f64,
    budget: &SearchBudget,
    seed: u64,
) -> Result<ConstantEstimate> {
    schur_c1(&k.adjoint_kernel(), theta, budget, seed)
}

pub fn schur_constants(
    k: &OperatorKernel,
    theta: f64,
    budget: &SearchBudget,
    seed: u64,
) -> Result<SchurConstants> {
    Ok(SchurConstants {
        c1: schur_c1(k, theta, budget, seed)?,
        c2: schur_c2(k, theta, budget, seed.wrapping_add(1))?,
        tau: 1.0,
        theta,
    })
}

/// Constants built from the deterministic upper bounds only.
pub fn schur_upper_constants(k: &OperatorKernel, theta: f64) -> Result<SchurConstants> {
    let (u1, e1) = schur_c1_upper(k, theta)?;
    let (u2, e2) = schur_c1_upper(&k.adjoint_kernel(), theta)?;
    Ok(SchurConstants {
        c1: ConstantEstimate {
            lower: None,
            upper: u1,
            exact: e1,
        },
        c2: ConstantEstimate {
            lower: None,
            upper: u2,
            exact: e2,
        },
        tau: 1.0,
        theta,
    })
}

/// `c1^lambda (tau c2)^(1 - lambda)` with `lambda = theta/p`.
pub fn interpolated_bound(c1: f64, c2: f64, tau: f64, lambda: f64) -> f64 {
    if lambda >= 1.0 {
        c1
    } else if lambda <= 0.0 {
        tau * c2
    } else {
        c1.powf(lambda) * (tau * c2).powf(1.0 - lambda)
    }
}

/// The operator-valued Schur bound on `||K||_{L_q -> L_p}`, evaluated on the
/// upper constants.
pub fn theorem27_bound(c: &SchurConstants, e: &ExponentTriple) -> f64 {
    interpolated_bound(c.c1.upper, c.c2.upper, c.tau, e.theta_over_p())
}

/// Certified lower bound on `||K||_{L_q(S,X) -> L_p(T,Y)}`.
pub fn norm_lower_bound(
    k: &OperatorKernel,
    q: Exponent,
    p: Exponent,
    restarts: usize,
    iterations: usize,
    seed: u64,
) -> Result<NormEstimate> {
    let budget = SearchBudget {
        restarts,
        iterations,
        ..SearchBudget::default()
    };
    estimate_norm(k, q, p, &budget, seed)
}

fn sup_column_norm(
    k: &OperatorKernel,
    p: Exponent,
    budget: &SearchBudget,
    seed: u64,
) -> Result<NormEstimate> {
    let mut best = NormEstimate {
        value: 0.0,
        witness: None,
    };
    for s in 0..k.domain_space().len() {
        let est = sphere_search(&k.column(s), p, budget, seed.wrapping_add(s as u64))?;
        if est.value > best.value {
            best = est;
        }
    }
    Ok(best)
}

/// `||K||_{L_1 -> L_p} = sup_s sup_{||x||=1} ||k(., s) x||_{L_p(T,Y)}`, attained
/// on weighted point masses. Exact for scalar `X`, a sphere-search lower
/// estimate otherwise.
pub fn exact_norm_q1(
    k: &OperatorKernel,
    p: Exponent,
    sphere_budget: &SearchBudget,
    seed: u64,
) -> Result<f64> {
    Ok(sup_column_norm(k, p, sphere_budget, seed)?.value)
}

#[derive(Clone, Debug, Serialize)]
pub struct SchurReport {
    pub exponents: ExponentTriple,
    pub constants: SchurConstants,
    pub bound: f64,
    pub lower_bound: f64,
    pub ratio: f64,
    pub tolerance: f64,
    pub violation: bool,
    #[serde(skip)]
    pub witness: Option<BochnerFunction>,
}

/// `lower / bound` with `0/0 = 0`.
pub fn slack_ratio(lower: f64, bound: f64) -> f64 {
    if lower == 0.0 {
        0.0
    } else {
        lower / bound
    }
}

/// Compares the empirical norm of `K: L_q -> L_p` with the Schur bound for
/// the admissible pair `(q, theta)`.
pub fn verify_schur_bound(
    k: &OperatorKernel,
    theta: f64,
    q: Exponent,
    budget: &SearchBudget,
    seed: u64,
) -> Result<SchurReport> {
    let exponents = make_exponents(q, theta)?;
    let constants = schur_constants(k, theta, budget, seed)?;
    let bound = theorem27_bound(&constants, &exponents);
    let est = estimate_norm(k, exponents.q, exponents.p, budget, seed.wrapping_add(2))?;
    let ratio = slack_ratio(est.value, bound);
    let tolerance = EXACT_TOLERANCE;
    Ok(SchurReport {
        exponents,
        constants,
        bound,
        lower_bound: est.value,
        ratio,
        tolerance,
        violation: ratio > 1.0 + tolerance,
        witness: est.witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::CMatrix;
    use crate::spaces::{DiscreteMeasureSpace, NormedSpace};
    use crate::C64;
    use std::sync::Arc;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn z4() -> OperatorKernel {
        OperatorKernel::circulant(&[c(1.0), c(1.0), c(0.0), c(0.0)]).unwrap()
    }

    fn budget() -> SearchBudget {
        SearchBudget::default()
    }

    #[test]
    fn zero_kernel_constants() {
        let s = Arc::new(DiscreteMeasureSpace::counting(3).unwrap());
        let k = OperatorKernel::zeros(
            s.clone(),
            s,
            NormedSpace::euclidean(2),
            NormedSpace::euclidean(2),
        );
        let c1 = schur_c1(&k, 2.0, &budget(), 1).unwrap();
        let c2 = schur_c2(&k, 2.0, &budget(), 1).unwrap();
        assert_eq!((c1.lower.unwrap(), c1.upper), (0.0, 0.0));
        assert_eq!((c2.lower.unwrap(), c2.upper), (0.0, 0.0));
        let r = verify_schur_bound(&k, 2.0, Exponent::ONE, &budget(), 3).unwrap();
        assert_eq!(r.ratio, 0.0);
        assert!(!r.violation);
        assert_eq!(
            norm_lower_bound(&k, Exponent::TWO, Exponent::TWO, 3, 10, 0)
                .unwrap()
                .value,
            0.0
        );
        assert_eq!(exact_norm_q1(&k, Exponent::TWO, &budget(), 0).unwrap(), 0.0);
    }

    #[test]
    fn z4_constants_are_sqrt2() {
        let k = z4();
        let c1 = schur_c1(&k, 2.0, &budget(), 1).unwrap();
        let c2 = schur_c2(&k, 2.0, &budget(), 1).unwrap();
        assert!(c1.exact && c2.exact);
        assert!((c1.upper - 2f64.sqrt()).abs() < 1e-15);
        assert!((c2.upper - 2f64.sqrt()).abs() < 1e-15);
        assert!(
            (exact_norm_q1(&k, Exponent::TWO, &budget(), 0).unwrap() - 2f64.sqrt()).abs() < 1e-15
        );
    }

    #[test]
    fn z4_equality_case() {
        let r = verify_schur_bound(&z4(), 2.0, Exponent::ONE, &budget(), 5).unwrap();
        assert!((r.bound - 2f64.sqrt()).abs() < 1e-12);
        assert!((r.lower_bound - 2f64.sqrt()).abs() < 1e-9);
        assert!((r.ratio - 1.0).abs() < 1e-9);
    }

    #[test]
    fn identity_diagonal_q1_norm_is_one() {
        let s = Arc::new(DiscreteMeasureSpace::counting(5).unwrap());
        let k = OperatorKernel::scalar(s.clone(), s, |t, s| if t == s { c(1.0) } else { c(0.0) })
            .unwrap();
        for p in [1.0, 2.0, 3.5] {
            let v = exact_norm_q1(&k, Exponent::new(p).unwrap(), &budget(), 0).unwrap();
            assert!((v - 1.0).abs() < 1e-14);
        }
        assert!((exact_norm_q1(&k, Exponent::INFINITY, &budget(), 0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn scalar_times_identity_sphere_search_matches_reduction() {
        let s = Arc::new(DiscreteMeasureSpace::new(vec![1.0, 0.5, 2.0]).unwrap());
        let t = Arc::new(DiscreteMeasureSpace::new(vec![0.3, 1.7]).unwrap());
        let a = |t: usize, s: usize| ((t * 3 + s) as f64).sin() + 0.2;
        let x = NormedSpace::euclidean(2);
        let k = OperatorKernel::from_fn(s.clone(), t.clone(), x.clone(), x, |ti, si| {
            CMatrix::identity(2, 2) * c(a(ti, si))
        })
        .unwrap();
        for theta in [1.0, 1.5, 2.0, 3.0] {
            let th = Exponent::new(theta).unwrap();
            let reduction = (0..3)
                .map(|si| th.weighted_mean((0..2).map(|ti| (t.weight(ti), a(ti, si).abs()))))
                .fold(0.0, f64::max);
            let est = schur_c1(&k, theta, &budget(), 4).unwrap();
            assert!((est.lower.unwrap() - reduction).abs() < 1e-9);
            assert!((est.upper - reduction).abs() < 1e-9);
        }
    }

    #[test]
    fn hermitian_kernel_has_equal_constants() {
        let x = NormedSpace::euclidean(2);
        let base = OperatorKernel::random_gaussian(4, 4, x.clone(), x.clone(), 17).unwrap();
        let w = Arc::new(DiscreteMeasureSpace::counting(4).unwrap());
        let k = OperatorKernel::from_fn(w.clone(), w, x.clone(), x, |t, s| {
            base.entry(t, s).clone() + base.entry(s, t).adjoint()
        })
        .unwrap();
        for theta in [1.0, 2.0, 2.5] {
            let c2 = schur_c2(&k, theta, &budget(), 1).unwrap();
            let c1 = schur_c1(&k, theta, &budget(), 1).unwrap();
            assert!((c2.upper - c1.upper).abs() < 1e-12);
            assert!((c2.lower.unwrap() - c1.lower.unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn lower_never_exceeds_upper() {
        for (i, (x, y)) in [
            (NormedSpace::ellinf(3), NormedSpace::ell1(2)),
            (NormedSpace::euclidean(3), NormedSpace::ell1(3)),
            (NormedSpace::ell1(2), NormedSpace::euclidean(4)),
        ]
        .into_iter()
        .enumerate()
        {
            let k = OperatorKernel::random_gaussian(5, 6, x, y, i as u64).unwrap();
            for theta in [1.0, 2.0] {
                let c = schur_constants(&k, theta, &budget(), 0).unwrap();
                assert!(c.c1.lower.unwrap() <= c.c1.upper);
                assert!(c.c2.lower.unwrap() <= c.c2.upper);
            }
        }
    }

    #[test]
    fn bound_formula_cases() {
        let sq2 = 2f64.sqrt();
        let exact = |v: f64| ConstantEstimate {
            lower: Some(v),
            upper: v,
            exact: true,
        };
        let c = SchurConstants {
            c1: exact(sq2),
            c2: exact(sq2),
            tau: 1.0,
            theta: 2.0,
        };
        let e = make_exponents(Exponent::ONE, 2.0).unwrap();
        assert!((theorem27_bound(&c, &e) - sq2).abs() < 1e-15);

        let c = SchurConstants {
            c1: exact(3.0),
            c2: exact(0.5),
            tau: 1.0,
            theta: 1.0,
        };
        for p in [1.0, 2.0, 4.0] {
            let e = make_exponents(Exponent::new(p).unwrap(), 1.0).unwrap();
            let expect = 3f64.powf(1.0 / p) * 0.5f64.powf(1.0 - 1.0 / p);
            assert!((theorem27_bound(&c, &e) - expect).abs() < 1e-14);
        }
        let e = make_exponents(Exponent::INFINITY, 1.0).unwrap();
        assert_eq!(theorem27_bound(&c, &e), 0.5);

        let c = SchurConstants {
            c1: exact(1.7),
            c2: exact(1.7),
            tau: 1.0,
            theta: 1.5,
        };
        for q in [1.0, 1.5, 2.5] {
            let e = make_exponents(Exponent::new(q).unwrap(), 1.5).unwrap();
            assert!((theorem27_bound(&c, &e) - 1.7).abs() < 1e-14);
        }
    }

    #[test]
    fn lower_bound_monotone_in_budget() {
        let k = OperatorKernel::random_gaussian(
            6,
            5,
            NormedSpace::ell1(2),
            NormedSpace::euclidean(3),
            8,
        )
        .unwrap();
        let (q, p) = (Exponent::new(1.5).unwrap(), Exponent::new(3.0).unwrap());
        let a = norm_lower_bound(&k, q, p, 2, 5, 9).unwrap().value;
        let b = norm_lower_bound(&k, q, p, 4, 5, 9).unwrap().value;
        let c = norm_lower_bound(&k, q, p, 4, 40, 9).unwrap().value;
        assert!(a <= b && b <= c);
    }

    #[test]
    fn witness_reproduces_value() {
        let k = OperatorKernel::random_gaussian(
            4,
            4,
            NormedSpace::euclidean(2),
            NormedSpace::ellinf(2),
            1,
        )
        .unwrap();
        let (q, p) = (Exponent::new(1.3).unwrap(), Exponent::new(2.2).unwrap());
        let est = norm_lower_bound(&k, q, p, 5, 30, 2).unwrap();
        let f = est.witness.unwrap();
        let v = k.apply_operator(&f).unwrap().lp_norm(p) / f.lp_norm(q);
        assert_eq!(v, est.value);
    }
}
