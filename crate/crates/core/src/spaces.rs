//! Finite measure spaces and finite-dimensional normed coordinate spaces.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::C64;

/// A finite point set with strictly positive weights.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscreteMeasureSpace {
    weights: Vec<f64>,
}

impl DiscreteMeasureSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidMeasure(
                "at least one point is required".into(),
            ));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::InvalidMeasure(format!(
                "weight {w} at point {i} is not a positive finite number"
            )));
        }
        Ok(DiscreteMeasureSpace { weights })
    }

    /// Counting measure on `n` points.
    pub fn counting(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    pub fn uniform(n: usize, weight: f64) -> Result<Self> {
        Self::new(vec![weight; n])
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// The norm families available on `C^dim`.
///
/// `WeightedEllP` is `(sum w_i |v_i|^p)^(1/p)` for finite `p` and
/// `max w_i |v_i|` for `p = inf`; the family is closed under duality.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum NormKind {
    Euclidean,
    Ell1,
    EllInf,
    WeightedEllP { p: Exponent, weights: Vec<f64> },
}

/// `C^dim` with a norm from [`NormKind`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormedSpace {
    dim: usize,
    kind: NormKind,
    #[serde(skip)]
    exponent: Exponent,
    /// Coordinate scales `s_i` with `||v|| = ||(s_i v_i)||_p`; `None` means all ones.
    #[serde(skip)]
    scales: Option<Vec<f64>>,
}

impl NormedSpace {
    pub fn new(dim: usize, kind: NormKind) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidNorm("dimension must be at least 1".into()));
        }
        let (exponent, scales) = match &kind {
            NormKind::Euclidean => (Exponent::TWO, None),
            NormKind::Ell1 => (Exponent::ONE, None),
            NormKind::EllInf => (Exponent::INFINITY, None),
            NormKind::WeightedEllP { p, weights } => {
                if weights.len() != dim {
                    return Err(Error::DimensionMismatch {
                        what: "norm weights",
                        expected: dim,
                        got: weights.len(),
                    });
                }
                if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                    return Err(Error::InvalidNorm("norm weights must be positive".into()));
                }
                let scales = if p.is_infinite() {
                    weights.clone()
                } else {
                    weights.iter().map(|w| w.powf(p.recip())).collect()
                };
                (*p, Some(scales))
            }
        };
        Ok(NormedSpace {
            dim,
            kind,
            exponent,
            scales,
        })
    }

    pub fn euclidean(dim: usize) -> Self {
        Self::new(dim, NormKind::Euclidean).expect("dim >= 1")
    }

    pub fn ell1(dim: usize) -> Self {
        Self::new(dim, NormKind::Ell1).expect("dim >= 1")
    }

    pub fn ellinf(dim: usize) -> Self {
        Self::new(dim, NormKind::EllInf).expect("dim >= 1")
    }

    /// The scalar field `C` with its absolute value.
    pub fn scalar() -> Self {
        Self::euclidean(1)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &NormKind {
        &self.kind
    }

    /// The underlying `ell_p` exponent of the norm.
    pub fn exponent(&self) -> Exponent {
        self.exponent
    }

    /// True for the unweighted Euclidean norm or the one-dimensional modulus.
    pub fn is_euclidean(&self) -> bool {
        self.dim == 1 && self.scale(0) == 1.0 || matches!(self.kind, NormKind::Euclidean)
    }

    #[inline]
    fn scale(&self, i: usize) -> f64 {
        self.scales.as_ref().map_or(1.0, |s| s[i])
    }

    fn scale_vec(&self) -> Vec<f64> {
        self.scales.clone().unwrap_or_else(|| vec![1.0; self.dim])
    }

    pub fn norm(&self, v: &[C64]) -> f64 {
        debug_assert_eq!(v.len(), self.dim);
        match &self.scales {
            None => self
                .exponent
                .weighted_mean(v.iter().map(|z| (1.0, z.norm()))),
            Some(s) => self
                .exponent
                .weighted_mean(v.iter().zip(s).map(|(z, s)| (1.0, s * z.norm()))),
        }
    }

    /// Norm of a vector of nonnegative magnitudes (all norms here are absolute).
    pub fn norm_of_magnitudes(&self, m: &[f64]) -> f64 {
        match &self.scales {
            None => self.exponent.weighted_mean(m.iter().map(|&x| (1.0, x))),
            Some(s) => self
                .exponent
                .weighted_mean(m.iter().zip(s).map(|(x, s)| (1.0, s * x))),
        }
    }

    /// The dual space under the pairing `<u, v> = sum conj(u_i) v_i`.
    pub fn dual(&self) -> NormedSpace {
        let q = self.exponent.conjugate();
        let kind = match &self.kind {
            NormKind::Euclidean => NormKind::Euclidean,
            NormKind::Ell1 => NormKind::EllInf,
            NormKind::EllInf => NormKind::Ell1,
            NormKind::WeightedEllP { .. } => {
                let inv: Vec<f64> = self.scale_vec().iter().map(|s| 1.0 / s).collect();
                let weights = if q.is_infinite() {
                    inv
                } else {
                    inv.iter().map(|s| s.powf(q.value())).collect()
                };
                NormKind::WeightedEllP { p: q, weights }
            }
        };
        NormedSpace::new(self.dim, kind).expect("dual of a valid space is valid")
    }

    /// A unit vector `u` of the dual space with `<u, v> = ||v||`.
    ///
    /// Ties for non-smooth norms are broken deterministically: zero
    /// coordinates map to zero and the first maximizing index wins.
    pub fn duality_map(&self, v: &[C64]) -> Result<Vec<C64>> {
        let n = self.norm(v);
        if n == 0.0 {
            return Err(Error::NoNormingFunctional);
        }
        let mut u = vec![C64::new(0.0, 0.0); self.dim];
        self.duality_map_into(v, n, &mut u);
        Ok(u)
    }

    /// As [`Self::duality_map`] with the norm `n > 0` already known, writing into `out`.
    pub(crate) fn duality_map_into(&self, v: &[C64], n: f64, out: &mut [C64]) {
        let p = self.exponent;
        if p.is_infinite() {
            let mut best = 0;
            let mut best_val = -1.0;
            for (i, z) in v.iter().enumerate() {
                let a = self.scale(i) * z.norm();
                if a > best_val {
                    best_val = a;
                    best = i;
                }
            }
            out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
            out[best] = unit_phase(v[best]) * self.scale(best);
        } else if p.is_one() {
            for (i, (o, z)) in out.iter_mut().zip(v).enumerate() {
                *o = unit_phase(*z) * self.scale(i);
            }
        } else {
            let pm1 = p.value() - 1.0;
            for (i, (o, z)) in out.iter_mut().zip(v).enumerate() {
                let s = self.scale(i);
                let a = s * z.norm();
                *o = unit_phase(*z) * (s * (a / n).powf(pm1));
            }
        }
    }

    /// A random vector on the unit sphere (complex Gaussian direction).
    pub fn random_unit_vector<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<C64> {
        loop {
            let v: Vec<C64> = (0..self.dim)
                .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            let n = self.norm(&v);
            if n > 0.0 {
                return v.into_iter().map(|z| z / n).collect();
            }
        }
    }

    /// Unit vector along the `j`-th coordinate axis.
    pub fn unit_basis_vector(&self, j: usize) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.dim];
        v[j] = C64::new(1.0 / self.scale(j), 0.0);
        v
    }

    /// `sup ||x||_self` over the Euclidean unit sphere.
    fn embedding_from_euclidean(&self) -> f64 {
        let s = self.scale_vec();
        let p = self.exponent;
        if p.value() >= 2.0 {
            s.iter().cloned().fold(0.0, f64::max)
        } else {
            let r = Exponent::from_recip(p.recip() - 0.5).expect("1 <= p < 2");
            r.weighted_mean(s.iter().map(|&x| (1.0, x)))
        }
    }

    /// `sup ||x||_2` over the unit sphere of `self`.
    fn embedding_into_euclidean(&self) -> f64 {
        let inv: Vec<f64> = self.scale_vec().iter().map(|s| 1.0 / s).collect();
        let p = self.exponent;
        if p.value() <= 2.0 {
            inv.iter().cloned().fold(0.0, f64::max)
        } else {
            let r = Exponent::from_recip(0.5 - p.recip()).expect("p > 2");
            r.weighted_mean(inv.iter().map(|&x| (1.0, x)))
        }
    }
}

#[inline]
fn unit_phase(z: C64) -> C64 {
    let r = z.norm();
    if r == 0.0 {
        C64::new(0.0, 0.0)
    } else {
        z / r
    }
}

/// `<u, v> = sum conj(u_i) v_i`.
pub fn pairing(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Operator norm value with a flag telling whether it is exact or only an upper bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OperatorNorm {
    pub value: f64,
    pub exact: bool,
}

pub fn spectral_norm(a: &DMatrix<C64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().singular_values().max()
}

/// Norm of `a` as a map `source -> target`.
///
/// Exact when the source is `ell_1`-type or one-dimensional, the target is
/// `ell_inf`-type or one-dimensional, or both are (weighted) `ell_2`;
/// otherwise the smallest of three sound upper bounds.
pub fn operator_norm(a: &DMatrix<C64>, source: &NormedSpace, target: &NormedSpace) -> OperatorNorm {
    debug_assert_eq!(a.ncols(), source.dim());
    debug_assert_eq!(a.nrows(), target.dim());
    let col_norms: Vec<f64> = (0..a.ncols())
        .map(|j| {
            let col: Vec<C64> = a.column(j).iter().cloned().collect();
            target.norm(&col)
        })
        .collect();
    if source.dim() == 1 || source.exponent().is_one() {
        let value = col_norms
            .iter()
            .enumerate()
            .map(|(j, c)| c / source.scale(j))
            .fold(0.0, f64::max);
        return OperatorNorm { value, exact: true };
    }
    let source_dual = source.dual();
    let row_norms: Vec<f64> = (0..a.nrows())
        .map(|i| {
            let row: Vec<C64> = a.row(i).iter().map(|z| z.conj()).collect();
            source_dual.norm(&row)
        })
        .collect();
    if target.dim() == 1 || target.exponent().is_infinite() {
        let value = row_norms
            .iter()
            .enumerate()
            .map(|(i, r)| r * target.scale(i))
            .fold(0.0, f64::max);
        return OperatorNorm { value, exact: true };
    }
    if source.exponent() == Exponent::TWO && target.exponent() == Exponent::TWO {
        let mut scaled = a.clone();
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                scaled[(i, j)] *= target.scale(i) / source.scale(j);
            }
        }
        return OperatorNorm {
            value: spectral_norm(&scaled),
            exact: true,
        };
    }
    let by_columns = source_dual.norm_of_magnitudes(&col_norms);
    let by_rows = target.norm_of_magnitudes(&row_norms);
    let by_euclid =
        target.embedding_from_euclidean() * spectral_norm(a) * source.embedding_into_euclidean();
    OperatorNorm {
        value: by_columns.min(by_rows).min(by_euclid),
        exact: false,
    }
}
