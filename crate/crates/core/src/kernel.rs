//! Operator-valued kernels `k: T x S -> B(X, Y)` and the integral operator
//! `(K f)(t) = sum_s nu_s k(t, s) f(s)`.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bochner::BochnerFunction;
use crate::error::{Error, Result};
use crate::operator::BochnerOperator;
use crate::spaces::{operator_norm, DiscreteMeasureSpace, NormedSpace, OperatorNorm};
use crate::C64;

pub type CMatrix = DMatrix<C64>;

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorKernel {
    domain: Arc<DiscreteMeasureSpace>,
    codomain: Arc<DiscreteMeasureSpace>,
    source: NormedSpace,
    target: NormedSpace,
    /// Row-major over `(t, s)`: entry `t * |S| + s`, each `dim Y x dim X`.
    entries: Vec<CMatrix>,
}

impl OperatorKernel {
    pub fn new(
        domain: Arc<DiscreteMeasureSpace>,
        codomain: Arc<DiscreteMeasureSpace>,
        source: NormedSpace,
        target: NormedSpace,
        entries: Vec<CMatrix>,
    ) -> Result<Self> {
        let expected = domain.len() * codomain.len();
        if entries.len() != expected {
            return Err(Error::DimensionMismatch {
                what: "kernel entry grid",
                expected,
                got: entries.len(),
            });
        }
        for m in &entries {
            if m.nrows() != target.dim() || m.ncols() != source.dim() {
                return Err(Error::IncompatibleSpaces(format!(
                    "kernel entry is {}x{}, expected {}x{}",
                    m.nrows(),
                    m.ncols(),
                    target.dim(),
                    source.dim()
                )));
            }
        }
        Ok(OperatorKernel {
            domain,
            codomain,
            source,
            target,
            entries,
        })
    }

    /// Builds `k(t, s)` from a closure called in `(t, s)` row-major order.
    pub fn from_fn<F>(
        domain: Arc<DiscreteMeasureSpace>,
        codomain: Arc<DiscreteMeasureSpace>,
        source: NormedSpace,
        target: NormedSpace,
        mut f: F,
    ) -> Result<Self>
    where
        F: FnMut(usize, usize) -> CMatrix,
    {
        let mut entries = Vec::with_capacity(domain.len() * codomain.len());
        for t in 0..codomain.len() {
            for s in 0..domain.len() {
                entries.push(f(t, s));
            }
        }
        Self::new(domain, codomain, source, target, entries)
    }

    /// Scalar kernel `k(t, s) in C` acting on `X = Y = C`.
    pub fn scalar<F>(
        domain: Arc<DiscreteMeasureSpace>,
        codomain: Arc<DiscreteMeasureSpace>,
        mut f: F,
    ) -> Result<Self>
    where
        F: FnMut(usize, usize) -> C64,
    {
        Self::from_fn(
            domain,
            codomain,
            NormedSpace::scalar(),
            NormedSpace::scalar(),
            |t, s| CMatrix::from_element(1, 1, f(t, s)),
        )
    }

    /// `k(t, s) = g((t - s) mod n)` on `Z_n` with counting measure.
    pub fn circulant(g: &[C64]) -> Result<Self> {
        let n = g.len();
        let space = Arc::new(DiscreteMeasureSpace::counting(n)?);
        Self::scalar(space.clone(), space, |t, s| g[(t + n - s) % n])
    }

    /// Independent complex Gaussian entries on random positive weights in `[0.5, 2)`.
    pub fn random_gaussian(
        domain_points: usize,
        codomain_points: usize,
        source: NormedSpace,
        target: NormedSpace,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let domain = Arc::new(DiscreteMeasureSpace::new(
            (0..domain_points)
                .map(|_| rng.gen_range(0.5..2.0))
                .collect(),
        )?);
        let codomain = Arc::new(DiscreteMeasureSpace::new(
            (0..codomain_points)
                .map(|_| rng.gen_range(0.5..2.0))
                .collect(),
        )?);
        let (rows, cols) = (target.dim(), source.dim());
        Self::from_fn(domain, codomain, source, target, |_, _| {
            CMatrix::from_fn(rows, cols, |_, _| {
                C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            })
        })
    }

    pub fn zeros(
        domain: Arc<DiscreteMeasureSpace>,
        codomain: Arc<DiscreteMeasureSpace>,
        source: NormedSpace,
        target: NormedSpace,
    ) -> Self {
        let (rows, cols) = (target.dim(), source.dim());
        Self::from_fn(domain, codomain, source, target, |_, _| {
            CMatrix::zeros(rows, cols)
        })
        .expect("shapes by construction")
    }

    #[inline]
    pub fn entry(&self, t: usize, s: usize) -> &CMatrix {
        &self.entries[t * self.domain.len() + s]
    }

    pub fn entries(&self) -> &[CMatrix] {
        &self.entries
    }

    pub fn domain_space(&self) -> &Arc<DiscreteMeasureSpace> {
        &self.domain
    }

    pub fn codomain_space(&self) -> &Arc<DiscreteMeasureSpace> {
        &self.codomain
    }

    pub fn source_space(&self) -> &NormedSpace {
        &self.source
    }

    pub fn target_space(&self) -> &NormedSpace {
        &self.target
    }

    /// `k*(s, t) = k(t, s)^H`, a kernel `S x T -> B(Y*, X*)`.
    pub fn adjoint_kernel(&self) -> OperatorKernel {
        let (ns, nt) = (self.domain.len(), self.codomain.len());
        let mut entries = Vec::with_capacity(ns * nt);
        for s in 0..ns {
            for t in 0..nt {
                entries.push(self.entry(t, s).adjoint());
            }
        }
        OperatorKernel {
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            source: self.target.dual(),
            target: self.source.dual(),
            entries,
        }
    }

    /// `||k(t, s)||_{B(X, Y)}` for every pair, row-major over `(t, s)`.
    pub fn pointwise_operator_norms(&self) -> Vec<OperatorNorm> {
        self.entries
            .iter()
            .map(|m| operator_norm(m, &self.source, &self.target))
            .collect()
    }

    /// The integral operator `K f`.
    pub fn apply_operator(&self, f: &BochnerFunction) -> Result<BochnerFunction> {
        self.check_input(f.len(), f.dim(), self.domain.len(), self.source.dim())?;
        let mut out = BochnerFunction::zeros(self.codomain.clone(), self.target.clone());
        let ns = self.domain.len();
        for t in 0..self.codomain.len() {
            let acc = out.at_mut(t);
            for s in 0..ns {
                matvec_acc(self.entry(t, s), f.at(s), self.domain.weight(s), acc, false);
            }
        }
        Ok(out)
    }

    fn check_input(
        &self,
        points: usize,
        dim: usize,
        want_points: usize,
        want_dim: usize,
    ) -> Result<()> {
        if points != want_points {
            return Err(Error::DimensionMismatch {
                what: "input point count",
                expected: want_points,
                got: points,
            });
        }
        if dim != want_dim {
            return Err(Error::DimensionMismatch {
                what: "input vector dimension",
                expected: want_dim,
                got: dim,
            });
        }
        Ok(())
    }

    /// The operator `x -> (k(t, s) x)_t` from `X` into `L(T, Y)` for a fixed `s`.
    pub(crate) fn column(&self, s: usize) -> ColumnSlice<'_> {
        ColumnSlice {
            kernel: self,
            s,
            point: Arc::new(DiscreteMeasureSpace::counting(1).expect("one point")),
        }
    }
}

/// `acc += w * m x` (or `w * m^H x` when `adjoint`).
#[inline]
pub(crate) fn matvec_acc(m: &CMatrix, x: &[C64], w: f64, acc: &mut [C64], adjoint: bool) {
    let (rows, cols) = (m.nrows(), m.ncols());
    let data = m.as_slice();
    if !adjoint {
        for j in 0..cols {
            let xj = x[j] * w;
            if xj == C64::new(0.0, 0.0) {
                continue;
            }
            let col = &data[j * rows..(j + 1) * rows];
            for (a, mij) in acc.iter_mut().zip(col) {
                *a += mij * xj;
            }
        }
    } else {
        for (j, a) in acc.iter_mut().enumerate().take(cols) {
            let col = &data[j * rows..(j + 1) * rows];
            let dot: C64 = col.iter().zip(x).map(|(mij, xi)| mij.conj() * xi).sum();
            *a += dot * w;
        }
    }
}

impl BochnerOperator for OperatorKernel {
    fn domain(&self) -> &Arc<DiscreteMeasureSpace> {
        &self.domain
    }

    fn source(&self) -> &NormedSpace {
        &self.source
    }

    fn codomain(&self) -> &Arc<DiscreteMeasureSpace> {
        &self.codomain
    }

    fn target(&self) -> &NormedSpace {
        &self.target
    }

    fn apply(&self, f: &BochnerFunction) -> Result<BochnerFunction> {
        self.apply_operator(f)
    }

    fn apply_adjoint(&self, h: &BochnerFunction) -> Result<BochnerFunction> {
        self.check_input(h.len(), h.dim(), self.codomain.len(), self.target.dim())?;
        let mut out = BochnerFunction::zeros(self.domain.clone(), self.source.dual());
        for s in 0..self.domain.len() {
            let acc = out.at_mut(s);
            for t in 0..self.codomain.len() {
                matvec_acc(
                    self.entry(t, s),
                    h.at(t),
                    self.codomain.weight(t),
                    acc,
                    true,
                );
            }
        }
        Ok(out)
    }
}

pub(crate) struct ColumnSlice<'a> {
    kernel: &'a OperatorKernel,
    s: usize,
    point: Arc<DiscreteMeasureSpace>,
}

impl BochnerOperator for ColumnSlice<'_> {
    fn domain(&self) -> &Arc<DiscreteMeasureSpace> {
        &self.point
    }

    fn source(&self) -> &NormedSpace {
        &self.kernel.source
    }

    fn codomain(&self) -> &Arc<DiscreteMeasureSpace> {
        &self.kernel.codomain
    }

    fn target(&self) -> &NormedSpace {
        &self.kernel.target
    }

    fn apply(&self, f: &BochnerFunction) -> Result<BochnerFunction> {
        let k = self.kernel;
        k.check_input(f.len(), f.dim(), 1, k.source.dim())?;
        let mut out = BochnerFunction::zeros(k.codomain.clone(), k.target.clone());
        for t in 0..k.codomain.len() {
            matvec_acc(k.entry(t, self.s), f.at(0), 1.0, out.at_mut(t), false);
        }
        Ok(out)
    }

    fn apply_adjoint(&self, h: &BochnerFunction) -> Result<BochnerFunction> {
        let k = self.kernel;
        k.check_input(h.len(), h.dim(), k.codomain.len(), k.target.dim())?;
        let mut out = BochnerFunction::zeros(self.point.clone(), k.source.dual());
        let acc = out.at_mut(0);
        for t in 0..k.codomain.len() {
            matvec_acc(k.entry(t, self.s), h.at(t), k.codomain.weight(t), acc, true);
        }
        Ok(out)
    }
}
