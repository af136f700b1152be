//! Linear operators between Bochner spaces and empirical `L_q -> L_p` norm
//! estimation by the generalized (nonlinear) power iteration
//!
//! ```text
//! f <- J_{q'}( K* J_p(K f) )
//! ```
//!
//! where `J_r` is the norming functional of `L_r`. Every iterate `f` is an
//! explicit witness: the reported value is always a ratio
//! `||K f||_p / ||f||_q` of concrete vectors, hence a certified lower bound.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bochner::BochnerFunction;
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::spaces::{DiscreteMeasureSpace, NormedSpace};
use crate::C64;

/// A bounded linear map `L(S, X) -> L(T, Y)` together with its adjoint
/// `L(T, Y*) -> L(S, X*)` for the weighted pairings.
pub trait BochnerOperator {
    fn domain(&self) -> &Arc<DiscreteMeasureSpace>;
    fn source(&self) -> &NormedSpace;
    fn codomain(&self) -> &Arc<DiscreteMeasureSpace>;
    fn target(&self) -> &NormedSpace;
    fn apply(&self, f: &BochnerFunction) -> Result<BochnerFunction>;
    fn apply_adjoint(&self, h: &BochnerFunction) -> Result<BochnerFunction>;
}

/// Search effort for norm estimation and unit-sphere maximization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchBudget {
    pub restarts: usize,
    pub iterations: usize,
    pub sphere_samples: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            restarts: 20,
            iterations: 50,
            sphere_samples: 1000,
        }
    }
}

/// A certified lower bound on an operator norm and the input achieving it.
#[derive(Clone, Debug)]
pub struct NormEstimate {
    pub value: f64,
    pub witness: Option<BochnerFunction>,
}

impl NormEstimate {
    fn zero() -> Self {
        NormEstimate {
            value: 0.0,
            witness: None,
        }
    }

    fn offer(&mut self, value: f64, f: &BochnerFunction) {
        if value > self.value {
            self.value = value;
            self.witness = Some(f.clone());
        }
    }
}

fn check_finite(value: f64, what: &str) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::IterationDiverged(format!("{what} is not finite")))
    }
}

/// `||K f||_p / ||f||_q`, or `None` for `f = 0`.
pub fn norm_ratio<K: BochnerOperator + ?Sized>(
    op: &K,
    f: &BochnerFunction,
    q: Exponent,
    p: Exponent,
) -> Result<Option<(f64, BochnerFunction)>> {
    let denom = f.lp_norm(q);
    check_finite(denom, "input norm")?;
    if denom == 0.0 {
        return Ok(None);
    }
    let g = op.apply(f)?;
    let num = g.lp_norm(p);
    check_finite(num, "output norm")?;
    Ok(Some((num / denom, g)))
}

fn random_function<R: Rng>(
    space: &Arc<DiscreteMeasureSpace>,
    target: &NormedSpace,
    rng: &mut R,
) -> BochnerFunction {
    let n = space.len() * target.dim();
    let values = (0..n)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    BochnerFunction::new(space.clone(), target.clone(), values).expect("shape by construction")
}

fn constant_function(space: &Arc<DiscreteMeasureSpace>, target: &NormedSpace) -> BochnerFunction {
    let ones = vec![C64::new(1.0, 0.0); target.dim()];
    BochnerFunction::from_fn(space.clone(), target.clone(), |_| ones.clone())
        .expect("shape by construction")
}

fn delta(
    space: &Arc<DiscreteMeasureSpace>,
    target: &NormedSpace,
    point: usize,
    v: &[C64],
) -> BochnerFunction {
    let mut f = BochnerFunction::zeros(space.clone(), target.clone());
    f.at_mut(point).copy_from_slice(v);
    f
}

/// Runs the power iteration from `start`, offering every iterate to `best`.
fn iterate<K: BochnerOperator + ?Sized>(
    op: &K,
    start: BochnerFunction,
    q: Exponent,
    p: Exponent,
    iterations: usize,
    best: &mut NormEstimate,
) -> Result<()> {
    let q_dual = q.conjugate();
    let mut f = start;
    let mut prev = -1.0;
    let mut stalled = 0;
    for _ in 0..iterations.max(1) {
        let Some((value, g)) = norm_ratio(op, &f, q, p)? else {
            return Ok(());
        };
        best.offer(value, &f);
        if value == 0.0 {
            return Ok(());
        }
        if (value - prev).abs() <= 1e-15 * value {
            stalled += 1;
            if stalled >= 3 {
                return Ok(());
            }
        } else {
            stalled = 0;
        }
        prev = value;
        let h = g.duality_map(p)?;
        let z = op.apply_adjoint(&h)?;
        check_finite(z.lp_norm(q_dual), "adjoint image")?;
        f = match z.duality_map(q_dual) {
            Ok(next) => next.with_target(op.source().clone())?,
            Err(Error::NoNormingFunctional) => return Ok(()),
            Err(e) => return Err(e),
        };
    }
    Ok(())
}

/// Certified lower bound on `||K||_{L_q -> L_p}`.
///
/// Starts: the constant function, `restarts - 1` random functions, and the
/// best extreme-point seed for the endpoints (`q = 1`: point masses times
/// basis vectors; `p = inf`: norming inputs of adjoint point masses).
/// The result is nondecreasing in `restarts` and `iterations`.
pub fn estimate_norm<K: BochnerOperator + ?Sized>(
    op: &K,
    q: Exponent,
    p: Exponent,
    budget: &SearchBudget,
    seed: u64,
) -> Result<NormEstimate> {
    if budget.restarts == 0 {
        return Err(Error::InvalidParameter(
            "restarts must be at least 1".into(),
        ));
    }
    let domain = op.domain();
    let source = op.source();
    let mut best = NormEstimate::zero();

    let mut seed_best = NormEstimate::zero();
    if q.is_one() {
        for s in 0..domain.len() {
            for j in 0..source.dim() {
                let f = delta(domain, source, s, &source.unit_basis_vector(j));
                if let Some((v, _)) = norm_ratio(op, &f, q, p)? {
                    seed_best.offer(v, &f);
                }
            }
        }
    }
    if p.is_infinite() {
        let codomain = op.codomain();
        let target_dual = op.target().dual();
        for t in 0..codomain.len() {
            for j in 0..target_dual.dim() {
                let mut v = target_dual.unit_basis_vector(j);
                v.iter_mut().for_each(|z| *z /= codomain.weight(t));
                let h = delta(codomain, &target_dual, t, &v);
                let z = op.apply_adjoint(&h)?;
                let f = match z.duality_map(q.conjugate()) {
                    Ok(f) => f.with_target(source.clone())?,
                    Err(Error::NoNormingFunctional) => continue,
                    Err(e) => return Err(e),
                };
                if let Some((v, _)) = norm_ratio(op, &f, q, p)? {
                    seed_best.offer(v, &f);
                }
            }
        }
    }
    if let Some(f) = seed_best.witness.take() {
        iterate(op, f, q, p, budget.iterations, &mut best)?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for r in 0..budget.restarts {
        let start = if r == 0 {
            constant_function(domain, source)
        } else {
            random_function(domain, source, &mut rng)
        };
        iterate(op, start, q, p, budget.iterations, &mut best)?;
    }
    Ok(best)
}

/// Maximizes `||A x||` over the unit sphere of the (one-point) domain of `op`
/// by random sampling followed by power-iteration ascent from the best samples.
pub(crate) fn sphere_search<K: BochnerOperator + ?Sized>(
    op: &K,
    p: Exponent,
    budget: &SearchBudget,
    seed: u64,
) -> Result<NormEstimate> {
    debug_assert_eq!(op.domain().len(), 1);
    let q = Exponent::ONE;
    let mut best = estimate_norm(
        op,
        q,
        p,
        &SearchBudget {
            restarts: 1,
            ..*budget
        },
        seed,
    )?;
    let source = op.source();
    if source.dim() == 1 {
        return Ok(best);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    let mut scored: Vec<(f64, BochnerFunction)> = Vec::with_capacity(budget.sphere_samples);
    for _ in 0..budget.sphere_samples {
        let x = source.random_unit_vector(&mut rng);
        let f = delta(op.domain(), source, 0, &x);
        if let Some((v, _)) = norm_ratio(op, &f, q, p)? {
            best.offer(v, &f);
            scored.push((v, f));
        }
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    for (_, f) in scored.into_iter().take(budget.restarts.max(1)) {
        iterate(op, f, q, p, budget.iterations, &mut best)?;
    }
    Ok(best)
}
