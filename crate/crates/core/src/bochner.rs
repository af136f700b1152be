//! Vector-valued functions on finite measure spaces and their `L_p` norms.

use std::sync::Arc;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::spaces::{pairing, DiscreteMeasureSpace, NormedSpace};
use crate::C64;

/// An element of `L_p(S, X)` for a finite weighted point set `S`.
///
/// Values are stored point-major: point `i` owns `values[i*dim..(i+1)*dim]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BochnerFunction {
    space: Arc<DiscreteMeasureSpace>,
    target: NormedSpace,
    values: Vec<C64>,
}

impl BochnerFunction {
    pub fn new(
        space: Arc<DiscreteMeasureSpace>,
        target: NormedSpace,
        values: Vec<C64>,
    ) -> Result<Self> {
        let expected = space.len() * target.dim();
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                what: "function values",
                expected,
                got: values.len(),
            });
        }
        Ok(BochnerFunction {
            space,
            target,
            values,
        })
    }

    pub fn zeros(space: Arc<DiscreteMeasureSpace>, target: NormedSpace) -> Self {
        let values = vec![C64::new(0.0, 0.0); space.len() * target.dim()];
        BochnerFunction {
            space,
            target,
            values,
        }
    }

    /// Builds a function from `f(point) -> vector`.
    pub fn from_fn<F>(
        space: Arc<DiscreteMeasureSpace>,
        target: NormedSpace,
        mut f: F,
    ) -> Result<Self>
    where
        F: FnMut(usize) -> Vec<C64>,
    {
        let dim = target.dim();
        let mut values = Vec::with_capacity(space.len() * dim);
        for i in 0..space.len() {
            let v = f(i);
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    what: "vector value",
                    expected: dim,
                    got: v.len(),
                });
            }
            values.extend(v);
        }
        Self::new(space, target, values)
    }

    /// Scalar-valued function on `space` (target `C` with the modulus).
    pub fn scalar(space: Arc<DiscreteMeasureSpace>, values: Vec<C64>) -> Result<Self> {
        Self::new(space, NormedSpace::scalar(), values)
    }

    #[inline]
    pub fn space(&self) -> &Arc<DiscreteMeasureSpace> {
        &self.space
    }

    #[inline]
    pub fn target(&self) -> &NormedSpace {
        &self.target
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.target.dim()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.space.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    #[inline]
    pub fn values(&self) -> &[C64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize) -> &[C64] {
        let d = self.dim();
        &self.values[i * d..(i + 1) * d]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize) -> &mut [C64] {
        let d = self.dim();
        &mut self.values[i * d..(i + 1) * d]
    }

    /// Replaces the target norm, keeping the values.
    pub fn with_target(mut self, target: NormedSpace) -> Result<Self> {
        if target.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "target dimension",
                expected: self.dim(),
                got: target.dim(),
            });
        }
        self.target = target;
        Ok(self)
    }

    pub fn pointwise_norms(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.target.norm(self.at(i)))
            .collect()
    }

    /// `(sum_s w_s ||f(s)||^p)^(1/p)`, or `max_s ||f(s)||` for `p = inf`.
    pub fn lp_norm(&self, p: Exponent) -> f64 {
        let norms = self.pointwise_norms();
        p.weighted_mean(self.space.weights().iter().cloned().zip(norms))
    }

    /// Number of points carrying a nonzero vector.
    pub fn support_size(&self) -> usize {
        (0..self.len())
            .filter(|&i| self.at(i).iter().any(|z| *z != C64::new(0.0, 0.0)))
            .count()
    }

    pub fn scale(&mut self, factor: C64) {
        self.values.iter_mut().for_each(|z| *z *= factor);
    }

    pub fn scaled(mut self, factor: C64) -> Self {
        self.scale(factor);
        self
    }

    pub fn add(&self, other: &BochnerFunction) -> Result<BochnerFunction> {
        self.check_same_shape(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Ok(BochnerFunction {
            space: self.space.clone(),
            target: self.target.clone(),
            values,
        })
    }

    pub(crate) fn check_same_shape(&self, other: &BochnerFunction) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                what: "point count",
                expected: self.len(),
                got: other.len(),
            });
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                what: "vector dimension",
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }

    /// `<g, f> = sum_s w_s <g(s), f(s)>` where `self = g` lives in the dual.
    pub fn pairing(&self, f: &BochnerFunction) -> Result<C64> {
        self.check_same_shape(f)?;
        Ok((0..self.len())
            .map(|i| pairing(self.at(i), f.at(i)) * self.space.weight(i))
            .sum())
    }

    /// Rescales to unit `L_p` norm; errors on the zero function.
    pub fn normalized(mut self, p: Exponent) -> Result<Self> {
        let n = self.lp_norm(p);
        if n == 0.0 {
            return Err(Error::NoNormingFunctional);
        }
        self.scale(C64::new(1.0 / n, 0.0));
        Ok(self)
    }

    /// The norming functional of `self` in `L_{p'}(S, X*)`: unit norm and
    /// `<h, f> = ||f||_{L_p}`.
    ///
    /// For `p = inf` the functional is a normalized point mass at the first
    /// point of maximal norm.
    pub fn duality_map(&self, p: Exponent) -> Result<BochnerFunction> {
        let total = self.lp_norm(p);
        if total == 0.0 {
            return Err(Error::NoNormingFunctional);
        }
        let dual = self.target.dual();
        let mut out = BochnerFunction::zeros(self.space.clone(), dual);
        let norms = self.pointwise_norms();
        if p.is_infinite() {
            let (best, _) =
                norms.iter().enumerate().fold(
                    (0, -1.0),
                    |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) },
                );
            let w = self.space.weight(best);
            let slot = out.at_mut(best);
            self.target
                .duality_map_into(self.at(best), norms[best], slot);
            slot.iter_mut().for_each(|z| *z /= w);
            return Ok(out);
        }
        for (i, &n) in norms.iter().enumerate() {
            if n == 0.0 {
                continue;
            }
            let factor = if p.is_one() {
                1.0
            } else {
                (n / total).powf(p.value() - 1.0)
            };
            let dim = self.dim();
            let mut slot = vec![C64::new(0.0, 0.0); dim];
            self.target.duality_map_into(self.at(i), n, &mut slot);
            for (o, z) in out.at_mut(i).iter_mut().zip(slot) {
                *o = z * factor;
            }
        }
        Ok(out)
    }
}

/// A finitely supported simple function: `sparsity` distinct points carry
/// random unit vectors of `target`, the rest are zero.
pub fn random_simple_function(
    space: Arc<DiscreteMeasureSpace>,
    target: NormedSpace,
    sparsity: usize,
    seed: u64,
) -> Result<BochnerFunction> {
    let points = space.len();
    if sparsity == 0 || sparsity > points {
        return Err(Error::SparsityOutOfRange { sparsity, points });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = sample(&mut rng, points, sparsity).into_vec();
    chosen.sort_unstable();
    let mut f = BochnerFunction::zeros(space, target.clone());
    for i in chosen {
        let v = target.random_unit_vector(&mut rng);
        f.at_mut(i).copy_from_slice(&v);
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn two_points() -> Arc<DiscreteMeasureSpace> {
        Arc::new(DiscreteMeasureSpace::counting(2).unwrap())
    }

    fn exps() -> Vec<Exponent> {
        [1.0, 1.5, 2.0, 3.0]
            .iter()
            .map(|&p| Exponent::new(p).unwrap())
            .chain(std::iter::once(Exponent::INFINITY))
            .collect()
    }

    #[test]
    fn lp_norm_examples() {
        let f = BochnerFunction::scalar(two_points(), vec![c(3.0), c(4.0)]).unwrap();
        assert!((f.lp_norm(Exponent::TWO) - 5.0).abs() < 1e-15);
        assert_eq!(f.lp_norm(Exponent::INFINITY), 4.0);
        let z = BochnerFunction::zeros(two_points(), NormedSpace::euclidean(3));
        assert_eq!(z.lp_norm(Exponent::TWO), 0.0);
    }

    #[test]
    fn weighted_lp_norm() {
        let space = Arc::new(DiscreteMeasureSpace::new(vec![0.25, 4.0]).unwrap());
        let f = BochnerFunction::scalar(space, vec![c(2.0), c(1.0)]).unwrap();
        assert!((f.lp_norm(Exponent::TWO) - 5.0_f64.sqrt()).abs() < 1e-15);
        assert!((f.lp_norm(Exponent::ONE) - 4.5).abs() < 1e-15);
    }

    #[test]
    fn mismatched_values_rejected() {
        assert!(
            BochnerFunction::new(two_points(), NormedSpace::euclidean(2), vec![c(1.0); 3]).is_err()
        );
    }

    #[test]
    fn simple_function_contract() {
        let space = Arc::new(DiscreteMeasureSpace::counting(10).unwrap());
        let x = NormedSpace::ell1(3);
        let full = random_simple_function(space.clone(), x.clone(), 10, 1).unwrap();
        assert_eq!(full.support_size(), 10);
        let a = random_simple_function(space.clone(), x.clone(), 4, 77).unwrap();
        let b = random_simple_function(space.clone(), x.clone(), 4, 77).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.support_size(), 4);
        for n in a.pointwise_norms() {
            assert!(n == 0.0 || (n - 1.0).abs() < 1e-12);
        }
        let delta = random_simple_function(space.clone(), x.clone(), 1, 3).unwrap();
        assert_eq!(delta.support_size(), 1);
        assert!(matches!(
            random_simple_function(space.clone(), x.clone(), 0, 1),
            Err(Error::SparsityOutOfRange { .. })
        ));
        assert!(random_simple_function(space, x, 11, 1).is_err());
    }

    #[test]
    fn lp_duality_map_attains_norm() {
        let space = Arc::new(DiscreteMeasureSpace::new(vec![0.5, 1.0, 2.0, 0.1]).unwrap());
        for target in [
            NormedSpace::euclidean(2),
            NormedSpace::ell1(2),
            NormedSpace::ellinf(2),
        ] {
            let f = random_simple_function(space.clone(), target.clone(), 3, 8).unwrap();
            for p in exps() {
                let h = f.duality_map(p).unwrap();
                let pair = h.pairing(&f).unwrap();
                assert!((pair.re - f.lp_norm(p)).abs() < 1e-12, "p={p} {target:?}");
                assert!(
                    (h.lp_norm(p.conjugate()) - 1.0).abs() < 1e-12,
                    "p={p} {target:?}"
                );
            }
        }
    }

    fn arb_pair() -> impl Strategy<Value = (Vec<f64>, Vec<(f64, f64)>, Vec<(f64, f64)>)> {
        (1usize..6).prop_flat_map(|n| {
            (
                prop::collection::vec(0.1f64..3.0, n),
                prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 2 * n),
                prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 2 * n),
            )
        })
    }

    fn build(w: &[f64], v: &[(f64, f64)], x: &NormedSpace) -> BochnerFunction {
        let space = Arc::new(DiscreteMeasureSpace::new(w.to_vec()).unwrap());
        BochnerFunction::new(
            space,
            x.clone(),
            v.iter().map(|&(a, b)| C64::new(a, b)).collect(),
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn holder_homogeneity_triangle((w, a, b) in arb_pair(), lam in -3.0f64..3.0) {
            for x in [NormedSpace::euclidean(2), NormedSpace::ell1(2), NormedSpace::ellinf(2)] {
                let f = build(&w, &a, &x);
                let g = build(&w, &b, &x.dual());
                let g_as_x = build(&w, &b, &x);
                for p in exps() {
                    let pair = g.pairing(&f).unwrap().norm();
                    prop_assert!(pair <= f.lp_norm(p) * g.lp_norm(p.conjugate()) * (1.0 + 1e-12) + 1e-12);
                    let scaled = f.clone().scaled(C64::new(lam, 0.0));
                    prop_assert!((scaled.lp_norm(p) - lam.abs() * f.lp_norm(p)).abs() < 1e-12 * (1.0 + f.lp_norm(p)));
                    let sum = f.add(&g_as_x).unwrap();
                    prop_assert!(sum.lp_norm(p) <= f.lp_norm(p) + g_as_x.lp_norm(p) + 1e-12);
                }
            }
        }

        #[test]
        fn holder_finite_measure((w, a, _b) in arb_pair()) {
            let f = build(&w, &a, &NormedSpace::euclidean(2));
            let mass = f.space().total_mass();
            let ex = exps();
            for (i, q) in ex.iter().enumerate() {
                for p in &ex[i..] {
                    let bound = f.lp_norm(*p) * mass.powf(q.recip() - p.recip());
                    prop_assert!(f.lp_norm(*q) <= bound * (1.0 + 1e-12) + 1e-12);
                }
            }
        }
    }
}
