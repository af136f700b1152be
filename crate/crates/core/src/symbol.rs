//! Operator-valued symbols `m: R^n -> B(X, Y)` with optional analytic
//! derivatives, and the finite-difference fallback used when a derivative is
//! not supplied.

use std::fmt;
use std::sync::Arc;

use crate::besov::dyadic_block;
use crate::error::{Error, Result};
use crate::kernel::CMatrix;
use crate::spaces::NormedSpace;
use crate::torus::{SymbolField, TorusGrid};
use crate::C64;

pub trait Symbol: Send + Sync {
    fn source(&self) -> &NormedSpace;
    fn target(&self) -> &NormedSpace;
    fn eval(&self, t: &[f64]) -> CMatrix;

    /// `D^alpha m(t)` when known in closed form.
    fn derivative(&self, _t: &[f64], _alpha: &[usize]) -> Option<CMatrix> {
        None
    }

    /// The frequency grid a sampled-only symbol is known on. Finite
    /// differences may not leave it.
    fn sample_domain(&self) -> Option<&TorusGrid> {
        None
    }
}

/// Samples `m` on the frequency grid of `grid`.
pub fn sample_symbol(m: &dyn Symbol, grid: &TorusGrid) -> Result<SymbolField> {
    SymbolField::symbol_from_fn(grid, m.source().clone(), m.target().clone(), |t| m.eval(t))
}

/// All multi-indices `alpha` in `n` variables with `|alpha| <= max_order`,
/// ordered by total order.
pub fn multi_indices(n: usize, max_order: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for order in 0..=max_order {
        let mut current = vec![0; n];
        fill(&mut current, 0, order, &mut out);
    }
    out
}

fn fill(current: &mut Vec<usize>, axis: usize, remaining: usize, out: &mut Vec<Vec<usize>>) {
    if axis + 1 == current.len() {
        current[axis] = remaining;
        out.push(current.clone());
        return;
    }
    for a in (0..=remaining).rev() {
        current[axis] = a;
        fill(current, axis + 1, remaining - a, out);
    }
    current[axis] = 0;
}

fn in_domain(grid: &TorusGrid, t: &[f64]) -> bool {
    let h = grid.spacing();
    let lo = -0.5 * grid.period() - 1e-9 * h;
    let hi = 0.5 * grid.period() - h + 1e-9 * h;
    t.iter().all(|&x| x >= lo && x <= hi)
}

/// `D^alpha m(t)`: the analytic derivative when available, otherwise
/// 4th-order centered differences with the given step.
pub fn derivative_of(m: &dyn Symbol, t: &[f64], alpha: &[usize], step: f64) -> Result<CMatrix> {
    if let Some(d) = m.derivative(t, alpha) {
        return Ok(d);
    }
    if alpha.iter().all(|&a| a == 0) {
        return Ok(m.eval(t));
    }
    finite_difference(m, t, alpha, step)
}

fn finite_difference(m: &dyn Symbol, t: &[f64], alpha: &[usize], h: f64) -> Result<CMatrix> {
    let Some(axis) = alpha.iter().position(|&a| a > 0) else {
        if let Some(grid) = m.sample_domain() {
            if !in_domain(grid, t) {
                return Err(Error::InsufficientResolution(format!(
                    "finite-difference stencil at {t:?} leaves the sampled frequency range"
                )));
            }
        }
        return Ok(m.eval(t));
    };
    let mut inner = alpha.to_vec();
    let (weights, denom): (&[f64; 5], f64) = if alpha[axis] >= 2 {
        inner[axis] -= 2;
        (&[-1.0, 16.0, -30.0, 16.0, -1.0], 12.0 * h * h)
    } else {
        inner[axis] -= 1;
        (&[1.0, -8.0, 0.0, 8.0, -1.0], 12.0 * h)
    };
    let mut acc = CMatrix::zeros(m.target().dim(), m.source().dim());
    let mut point = t.to_vec();
    for (j, w) in weights.iter().enumerate() {
        if *w == 0.0 {
            continue;
        }
        point[axis] = t[axis] + (j as f64 - 2.0) * h;
        acc += finite_difference(m, &point, &inner, h)? * C64::new(*w, 0.0);
    }
    Ok(acc / C64::new(denom, 0.0))
}

/// `D^alpha (1 + |t|^2)^(-beta/2)` for `|alpha| <= 2`.
fn decay_derivative(beta: f64, t: &[f64], alpha: &[usize]) -> Option<f64> {
    let r2: f64 = t.iter().map(|x| x * x).sum();
    let base = 1.0 + r2;
    let order: usize = alpha.iter().sum();
    match order {
        0 => Some(base.powf(-0.5 * beta)),
        1 => {
            let i = alpha.iter().position(|&a| a == 1)?;
            Some(-beta * t[i] * base.powf(-0.5 * beta - 1.0))
        }
        2 => {
            let mut axes = alpha
                .iter()
                .enumerate()
                .flat_map(|(i, &a)| std::iter::repeat_n(i, a));
            let (i, j) = (axes.next()?, axes.next()?);
            let diag = if i == j {
                -beta * base.powf(-0.5 * beta - 1.0)
            } else {
                0.0
            };
            Some(diag + beta * (beta + 2.0) * t[i] * t[j] * base.powf(-0.5 * beta - 2.0))
        }
        _ => None,
    }
}

#[derive(Clone, Debug)]
pub struct IdentitySymbol {
    space: NormedSpace,
}

impl IdentitySymbol {
    pub fn new(space: NormedSpace) -> Self {
        IdentitySymbol { space }
    }
}

impl Symbol for IdentitySymbol {
    fn source(&self) -> &NormedSpace {
        &self.space
    }

    fn target(&self) -> &NormedSpace {
        &self.space
    }

    fn eval(&self, _t: &[f64]) -> CMatrix {
        CMatrix::identity(self.space.dim(), self.space.dim())
    }

    fn derivative(&self, t: &[f64], alpha: &[usize]) -> Option<CMatrix> {
        if alpha.iter().all(|&a| a == 0) {
            Some(self.eval(t))
        } else {
            Some(CMatrix::zeros(self.space.dim(), self.space.dim()))
        }
    }
}

/// `(1 + |t|^2)^(-beta/2) I`.
#[derive(Clone, Debug)]
pub struct ScalarDecaySymbol {
    beta: f64,
    space: NormedSpace,
}

impl ScalarDecaySymbol {
    pub fn new(beta: f64, space: NormedSpace) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("decay exponent {beta}")));
        }
        Ok(ScalarDecaySymbol { beta, space })
    }
}

impl Symbol for ScalarDecaySymbol {
    fn source(&self) -> &NormedSpace {
        &self.space
    }

    fn target(&self) -> &NormedSpace {
        &self.space
    }

    fn eval(&self, t: &[f64]) -> CMatrix {
        let v = decay_derivative(self.beta, t, &vec![0; t.len()]).expect("order zero");
        CMatrix::identity(self.space.dim(), self.space.dim()) * C64::new(v, 0.0)
    }

    fn derivative(&self, t: &[f64], alpha: &[usize]) -> Option<CMatrix> {
        let v = decay_derivative(self.beta, t, alpha)?;
        Some(CMatrix::identity(self.space.dim(), self.space.dim()) * C64::new(v, 0.0))
    }
}

/// `diag((1 + |t|^2)^(-beta_i/2))` on a euclidean space.
#[derive(Clone, Debug)]
pub struct DiagDecaySymbol {
    betas: Vec<f64>,
    space: NormedSpace,
}

impl DiagDecaySymbol {
    pub fn new(betas: Vec<f64>) -> Result<Self> {
        if betas.is_empty() || betas.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidParameter(
                "decay exponents must be finite and nonempty".into(),
            ));
        }
        let space = NormedSpace::euclidean(betas.len());
        Ok(DiagDecaySymbol { betas, space })
    }
}

impl Symbol for DiagDecaySymbol {
    fn source(&self) -> &NormedSpace {
        &self.space
    }

    fn target(&self) -> &NormedSpace {
        &self.space
    }

    fn eval(&self, t: &[f64]) -> CMatrix {
        self.derivative(t, &vec![0; t.len()]).expect("order zero")
    }

    fn derivative(&self, t: &[f64], alpha: &[usize]) -> Option<CMatrix> {
        let diag: Option<Vec<C64>> = self
            .betas
            .iter()
            .map(|&b| decay_derivative(b, t, alpha).map(|v| C64::new(v, 0.0)))
            .collect();
        Some(CMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag?)))
    }
}

/// `phi_k(|t|) m(t)` for the dyadic block `k` of a partition with top block `k_max`.
#[derive(Clone)]
pub struct BlockSymbol {
    k: usize,
    k_max: usize,
    base: Arc<dyn Symbol>,
}

impl BlockSymbol {
    pub fn new(k: usize, k_max: usize, base: Arc<dyn Symbol>) -> Result<Self> {
        if k > k_max {
            return Err(Error::InvalidParameter(format!(
                "block {k} above top block {k_max}"
            )));
        }
        Ok(BlockSymbol { k, k_max, base })
    }
}

impl fmt::Debug for BlockSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlockSymbol")
            .field("k", &self.k)
            .field("k_max", &self.k_max)
            .finish()
    }
}

impl Symbol for BlockSymbol {
    fn source(&self) -> &NormedSpace {
        self.base.source()
    }

    fn target(&self) -> &NormedSpace {
        self.base.target()
    }

    fn eval(&self, t: &[f64]) -> CMatrix {
        let r = t.iter().map(|x| x * x).sum::<f64>().sqrt();
        let w = dyadic_block(self.k, self.k_max, r);
        if w == 0.0 {
            CMatrix::zeros(self.target().dim(), self.source().dim())
        } else {
            self.base.eval(t) * C64::new(w, 0.0)
        }
    }
}

/// `m(a t)`.
#[derive(Clone)]
pub struct DilatedSymbol<'a> {
    a: f64,
    base: &'a dyn Symbol,
}

impl<'a> DilatedSymbol<'a> {
    pub fn new(a: f64, base: &'a dyn Symbol) -> Self {
        DilatedSymbol { a, base }
    }
}

impl Symbol for DilatedSymbol<'_> {
    fn source(&self) -> &NormedSpace {
        self.base.source()
    }

    fn target(&self) -> &NormedSpace {
        self.base.target()
    }

    fn eval(&self, t: &[f64]) -> CMatrix {
        let s: Vec<f64> = t.iter().map(|x| self.a * x).collect();
        self.base.eval(&s)
    }

    fn derivative(&self, t: &[f64], alpha: &[usize]) -> Option<CMatrix> {
        let s: Vec<f64> = t.iter().map(|x| self.a * x).collect();
        let order: usize = alpha.iter().sum();
        Some(self.base.derivative(&s, alpha)? * C64::new(self.a.powi(order as i32), 0.0))
    }
}

type EvalFn = dyn Fn(&[f64]) -> CMatrix + Send + Sync;
type DerivFn = dyn Fn(&[f64], &[usize]) -> Option<CMatrix> + Send + Sync;

/// A symbol given by closures.
#[derive(Clone)]
pub struct FnSymbol {
    source: NormedSpace,
    target: NormedSpace,
    eval: Arc<EvalFn>,
    derivative: Option<Arc<DerivFn>>,
}

impl FnSymbol {
    pub fn new<F>(source: NormedSpace, target: NormedSpace, eval: F) -> Self
    where
        F: Fn(&[f64]) -> CMatrix + Send + Sync + 'static,
    {
        FnSymbol {
            source,
            target,
            eval: Arc::new(eval),
            derivative: None,
        }
    }

    pub fn with_derivative<D>(mut self, derivative: D) -> Self
    where
        D: Fn(&[f64], &[usize]) -> Option<CMatrix> + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(derivative));
        self
    }
}

impl fmt::Debug for FnSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnSymbol")
            .field("source", &self.source)
            .field("target", &self.target)
            .field("analytic_derivative", &self.derivative.is_some())
            .finish()
    }
}

impl Symbol for FnSymbol {
    fn source(&self) -> &NormedSpace {
        &self.source
    }

    fn target(&self) -> &NormedSpace {
        &self.target
    }

    fn eval(&self, t: &[f64]) -> CMatrix {
        (self.eval)(t)
    }

    fn derivative(&self, t: &[f64], alpha: &[usize]) -> Option<CMatrix> {
        self.derivative.as_ref().and_then(|d| d(t, alpha))
    }
}

/// A symbol known only through its samples on a frequency grid; evaluated by
/// multilinear interpolation and taken to vanish off the sampled range.
#[derive(Clone, Debug)]
pub struct GridSymbol {
    field: SymbolField,
}

impl GridSymbol {
    pub fn new(field: SymbolField) -> Self {
        GridSymbol { field }
    }
}

impl Symbol for GridSymbol {
    fn source(&self) -> &NormedSpace {
        self.field.source()
    }

    fn target(&self) -> &NormedSpace {
        self.field.target()
    }

    fn eval(&self, t: &[f64]) -> CMatrix {
        let grid = self.field.grid();
        let zero = CMatrix::zeros(self.target().dim(), self.source().dim());
        if t.len() != grid.dim() || !in_domain(grid, t) {
            return zero;
        }
        let h = grid.spacing();
        let n = grid.points_per_axis();
        let pos: Vec<(usize, f64)> = t
            .iter()
            .map(|&x| {
                let u = ((x + 0.5 * grid.period()) / h).max(0.0);
                let i = (u.floor() as usize).min(n - 1);
                (i, (u - i as f64).clamp(0.0, 1.0))
            })
            .collect();
        let mut acc = zero;
        for corner in 0..(1usize << t.len()) {
            let mut weight = 1.0;
            let mut idx = Vec::with_capacity(t.len());
            for (axis, &(i, frac)) in pos.iter().enumerate() {
                if corner >> axis & 1 == 1 {
                    weight *= frac;
                    idx.push(i + 1);
                } else {
                    weight *= 1.0 - frac;
                    idx.push(i);
                }
            }
            if weight == 0.0 {
                continue;
            }
            if idx.iter().any(|&i| i >= n) {
                continue;
            }
            acc += self.field.entry(grid.flat_index(&idx)) * C64::new(weight, 0.0);
        }
        acc
    }

    fn sample_domain(&self) -> Option<&TorusGrid> {
        Some(self.field.grid())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_index_enumeration() {
        assert_eq!(multi_indices(1, 2), vec![vec![0], vec![1], vec![2]]);
        let two = multi_indices(2, 2);
        assert_eq!(two.len(), 6);
        assert_eq!(two[0], vec![0, 0]);
        assert!(two.iter().all(|a| a.iter().sum::<usize>() <= 2));
    }

    #[test]
    fn analytic_decay_derivatives_match_finite_differences() {
        let bare = ScalarDecaySymbol::new(1.5, NormedSpace::scalar()).unwrap();
        let plain = FnSymbol::new(NormedSpace::scalar(), NormedSpace::scalar(), move |t| {
            bare.eval(t)
        });
        let analytic = ScalarDecaySymbol::new(1.5, NormedSpace::scalar()).unwrap();
        for t in [[0.3, -0.7], [1.5, 2.0], [-3.0, 0.1]] {
            for alpha in multi_indices(2, 2) {
                let a = derivative_of(&analytic, &t, &alpha, 1e-3).unwrap();
                let f = derivative_of(&plain, &t, &alpha, 1e-3).unwrap();
                assert!((a[(0, 0)] - f[(0, 0)]).norm() < 1e-7, "{alpha:?} at {t:?}");
            }
        }
    }

    #[test]
    fn fd_third_derivative_of_cubic() {
        let m = FnSymbol::new(NormedSpace::scalar(), NormedSpace::scalar(), |t| {
            CMatrix::from_element(1, 1, C64::new(t[0].powi(3), 0.0))
        });
        let d = derivative_of(&m, &[0.7], &[3], 0.1).unwrap();
        assert!((d[(0, 0)].re - 6.0).abs() < 1e-9);
    }

    #[test]
    fn grid_symbol_interpolates_and_guards_stencil() {
        let grid = TorusGrid::new(1, 32, 8.0).unwrap();
        let decay = ScalarDecaySymbol::new(1.0, NormedSpace::scalar()).unwrap();
        let field = sample_symbol(&decay, &grid).unwrap();
        let g = GridSymbol::new(field.clone());
        let dual = grid.dual();
        for i in 0..dual.len() {
            let t = dual.coordinate(i);
            assert!((g.eval(&t) - field.entry(i)).norm() < 1e-14);
        }
        let edge = dual.coordinate(0);
        let step = dual.spacing();
        assert!(matches!(
            derivative_of(&g, &edge, &[1], step),
            Err(Error::InsufficientResolution(_))
        ));
        assert!(derivative_of(&g, &[0.0], &[1], step).unwrap()[(0, 0)].norm() < 1e-12);
    }

    #[test]
    fn dilation_scales_derivatives() {
        let m = ScalarDecaySymbol::new(1.0, NormedSpace::scalar()).unwrap();
        let d = DilatedSymbol::new(2.0, &m);
        let direct = m.derivative(&[1.0], &[1]).unwrap()[(0, 0)] * 2.0;
        assert!((d.derivative(&[0.5], &[1]).unwrap()[(0, 0)] - direct).norm() < 1e-15);
    }
}
