//! Periodic grids standing in for `R^n`, unitary discrete Fourier transforms of
//! vector-valued functions, convolution with matrix-valued kernels and
//! Fourier multipliers `T_m f = F^{-1}[m F f]`.
//!
//! The grid with `N` points per axis and period `L` has points
//! `x_j = -L/2 + j L/N` and frequencies `xi_k = (2 pi / L)(k - N/2)`, both in
//! centered order, so the Nyquist frequency sits on the negative half-axis.
//! The frequency grid is itself a torus (period `2 pi N / L`), exposed as
//! [`TorusGrid::dual`]; the dual of the dual is the original grid.
//!
//! The transform approximates `(2 pi)^(-n/2) int f(x) e^(-i x.xi) dx` with
//! cell-volume weights on both sides, which makes it unitary between the
//! weighted `L_2` spaces.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::bochner::BochnerFunction;
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::kernel::{matvec_acc, CMatrix, OperatorKernel};
use crate::operator::{BochnerOperator, SearchBudget};
use crate::schur::{schur_c1, SchurConstants};
use crate::spaces::{DiscreteMeasureSpace, NormedSpace};
use crate::C64;

#[derive(Clone)]
pub struct TorusGrid {
    dim: usize,
    points_per_axis: usize,
    period: f64,
    space: Arc<DiscreteMeasureSpace>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid")
            .field("dim", &self.dim)
            .field("points_per_axis", &self.points_per_axis)
            .field("period", &self.period)
            .finish()
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.points_per_axis == other.points_per_axis
            && (self.period - other.period).abs() <= 1e-12 * self.period
    }
}

impl TorusGrid {
    pub fn new(dim: usize, points_per_axis: usize, period: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidGrid(
                "spatial dimension must be at least 1".into(),
            ));
        }
        if points_per_axis == 0 || !points_per_axis.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be even and positive, got {points_per_axis}"
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "period must be positive, got {period}"
            )));
        }
        let total = points_per_axis
            .checked_pow(dim as u32)
            .ok_or_else(|| Error::InvalidGrid("grid too large".into()))?;
        let cell = (period / points_per_axis as f64).powi(dim as i32);
        let space = Arc::new(DiscreteMeasureSpace::uniform(total, cell)?);
        let mut planner = FftPlanner::new();
        Ok(TorusGrid {
            dim,
            points_per_axis,
            period,
            space,
            forward: planner.plan_fft_forward(points_per_axis),
            inverse: planner.plan_fft_inverse(points_per_axis),
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    #[inline]
    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.points_per_axis as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn measure_space(&self) -> &Arc<DiscreteMeasureSpace> {
        &self.space
    }

    /// The frequency grid, as a torus in its own right.
    pub fn dual(&self) -> TorusGrid {
        let n = self.points_per_axis as f64;
        TorusGrid {
            period: 2.0 * PI * n / self.period,
            space: Arc::new(
                DiscreteMeasureSpace::uniform(
                    self.len(),
                    (2.0 * PI / self.period).powi(self.dim as i32),
                )
                .expect("positive cell volume"),
            ),
            ..self.clone()
        }
    }

    /// Largest frequency modulus `|xi|` on the grid.
    pub fn max_frequency(&self) -> f64 {
        let nyq = PI * self.points_per_axis as f64 / self.period;
        nyq * (self.dim as f64).sqrt()
    }

    /// Per-axis indices of the flat (row-major, last axis fastest) index.
    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let n = self.points_per_axis;
        let mut idx = vec![0; self.dim];
        let mut rest = flat;
        for slot in idx.iter_mut().rev() {
            *slot = rest % n;
            rest /= n;
        }
        idx
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .fold(0, |acc, &i| acc * self.points_per_axis + i)
    }

    pub fn coordinate(&self, flat: usize) -> Vec<f64> {
        let h = self.spacing();
        self.multi_index(flat)
            .into_iter()
            .map(|j| -0.5 * self.period + j as f64 * h)
            .collect()
    }

    pub fn coordinates(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.coordinate(i)).collect()
    }

    /// Index of the point `x = 0`.
    pub fn origin_index(&self) -> usize {
        self.flat_index(&vec![self.points_per_axis / 2; self.dim])
    }

    fn accepts(&self, f: &BochnerFunction) -> Result<()> {
        if f.len() != self.len() {
            return Err(Error::DimensionMismatch {
                what: "grid point count",
                expected: self.len(),
                got: f.len(),
            });
        }
        let w = f.space().weight(0);
        let cell = self.cell_volume();
        if (w - cell).abs() > 1e-12 * cell {
            return Err(Error::IncompatibleSpaces(format!(
                "function lives on cells of volume {w}, grid cells have volume {cell}"
            )));
        }
        Ok(())
    }

    /// Applies the 1-D transform along every axis of a scalar field in place.
    fn transform_scalar(&self, data: &mut [C64], inverse: bool) {
        let n = self.points_per_axis;
        let half = (n / 2) as i64;
        let sign = |k: usize| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        let shift_sign = |k: usize| {
            if (k as i64 - half).rem_euclid(2) == 0 {
                1.0
            } else {
                -1.0
            }
        };
        let plan = if inverse {
            &self.inverse
        } else {
            &self.forward
        };
        let mut line = vec![C64::new(0.0, 0.0); n];
        let mut scratch = vec![C64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        for axis in 0..self.dim {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            let outer = data.len() / (n * stride);
            for o in 0..outer {
                for inner in 0..stride {
                    let base = o * n * stride + inner;
                    for (j, slot) in line.iter_mut().enumerate() {
                        let pre = if inverse { shift_sign(j) } else { sign(j) };
                        *slot = data[base + j * stride] * pre;
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (k, z) in line.iter().enumerate() {
                        let post = if inverse { sign(k) } else { shift_sign(k) };
                        data[base + k * stride] = z * post;
                    }
                }
            }
        }
    }

    fn transform(
        &self,
        f: &BochnerFunction,
        inverse: bool,
        out_space: Arc<DiscreteMeasureSpace>,
        scale: f64,
    ) -> BochnerFunction {
        let dim = f.dim();
        let len = self.len();
        let mut out = BochnerFunction::zeros(out_space, f.target().clone());
        let mut buf = vec![C64::new(0.0, 0.0); len];
        for c in 0..dim {
            for (i, b) in buf.iter_mut().enumerate() {
                *b = f.values()[i * dim + c];
            }
            self.transform_scalar(&mut buf, inverse);
            let values = out.values_mut();
            for (i, b) in buf.iter().enumerate() {
                values[i * dim + c] = b * scale;
            }
        }
        out
    }

    /// `F f`, a function on the frequency grid.
    pub fn dft_forward(&self, f: &BochnerFunction) -> Result<BochnerFunction> {
        self.accepts(f)?;
        let scale = (2.0 * PI).powf(-0.5 * self.dim as f64) * self.cell_volume();
        let dual = self.dual();
        Ok(self.transform(f, false, dual.space.clone(), scale))
    }

    /// `F^{-1} g` for `g` on the frequency grid.
    pub fn dft_inverse(&self, g: &BochnerFunction) -> Result<BochnerFunction> {
        let dual = self.dual();
        dual.accepts(g)?;
        let scale = (2.0 * PI).powf(-0.5 * self.dim as f64) * dual.cell_volume();
        Ok(self.transform(g, true, self.space.clone(), scale))
    }

    /// Periodic translation by `offset` grid steps per axis: `(S f)(x) = f(x - offset h)`.
    pub fn translate(&self, f: &BochnerFunction, offset: &[i64]) -> Result<BochnerFunction> {
        self.accepts(f)?;
        let n = self.points_per_axis as i64;
        let mut out = BochnerFunction::zeros(f.space().clone(), f.target().clone());
        for i in 0..self.len() {
            let src: Vec<usize> = self
                .multi_index(i)
                .iter()
                .zip(offset)
                .map(|(&j, &o)| (j as i64 - o).rem_euclid(n) as usize)
                .collect();
            out.at_mut(i).copy_from_slice(f.at(self.flat_index(&src)));
        }
        Ok(out)
    }

    pub fn function<F>(&self, target: NormedSpace, mut f: F) -> Result<BochnerFunction>
    where
        F: FnMut(&[f64]) -> Vec<C64>,
    {
        BochnerFunction::from_fn(self.space.clone(), target, |i| f(&self.coordinate(i)))
    }
}

/// A `B(X, Y)`-valued field sampled on the points of a torus grid.
///
/// As a convolution kernel it lives on the spatial grid; as a multiplier
/// symbol for the grid `G` it lives on `G.dual()`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixField {
    grid: TorusGrid,
    source: NormedSpace,
    target: NormedSpace,
    entries: Vec<CMatrix>,
}

/// A multiplier symbol: a [`MatrixField`] on a frequency grid.
pub type SymbolField = MatrixField;

impl MatrixField {
    pub fn new(
        grid: TorusGrid,
        source: NormedSpace,
        target: NormedSpace,
        entries: Vec<CMatrix>,
    ) -> Result<Self> {
        if entries.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                what: "field samples",
                expected: grid.len(),
                got: entries.len(),
            });
        }
        if entries
            .iter()
            .any(|m| m.nrows() != target.dim() || m.ncols() != source.dim())
        {
            return Err(Error::IncompatibleSpaces(format!(
                "field entries must be {}x{}",
                target.dim(),
                source.dim()
            )));
        }
        if entries
            .iter()
            .any(|m| m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()))
        {
            return Err(Error::InvalidParameter(
                "field samples must be finite".into(),
            ));
        }
        Ok(MatrixField {
            grid,
            source,
            target,
            entries,
        })
    }

    pub fn from_fn<F>(
        grid: TorusGrid,
        source: NormedSpace,
        target: NormedSpace,
        mut f: F,
    ) -> Result<Self>
    where
        F: FnMut(&[f64]) -> CMatrix,
    {
        let entries = (0..grid.len()).map(|i| f(&grid.coordinate(i))).collect();
        Self::new(grid, source, target, entries)
    }

    /// Samples a symbol `m(xi)` on the frequency grid of `grid`.
    pub fn symbol_from_fn<F>(
        grid: &TorusGrid,
        source: NormedSpace,
        target: NormedSpace,
        f: F,
    ) -> Result<Self>
    where
        F: FnMut(&[f64]) -> CMatrix,
    {
        Self::from_fn(grid.dual(), source, target, f)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn source(&self) -> &NormedSpace {
        &self.source
    }

    pub fn target(&self) -> &NormedSpace {
        &self.target
    }

    pub fn entries(&self) -> &[CMatrix] {
        &self.entries
    }

    pub fn entry(&self, i: usize) -> &CMatrix {
        &self.entries[i]
    }

    /// Pointwise conjugate transpose, acting between the dual spaces.
    pub fn adjoint(&self) -> MatrixField {
        MatrixField {
            grid: self.grid.clone(),
            source: self.target.dual(),
            target: self.source.dual(),
            entries: self.entries.iter().map(|m| m.adjoint()).collect(),
        }
    }

    /// `max_i ||entry_i||_{B(X, Y)}`.
    pub fn sup_operator_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|m| crate::spaces::operator_norm(m, &self.source, &self.target).value)
            .fold(0.0, f64::max)
    }

    /// Applies `g` to each scalar entry field: output entry `(r, c)` is
    /// `g(samples of entry (r, c))` on `out_grid`.
    fn map_entries<G>(&self, out_grid: TorusGrid, mut g: G) -> Result<MatrixField>
    where
        G: FnMut(&BochnerFunction) -> Result<BochnerFunction>,
    {
        let (rows, cols) = (self.target.dim(), self.source.dim());
        let mut entries = vec![CMatrix::zeros(rows, cols); self.grid.len()];
        for r in 0..rows {
            for c in 0..cols {
                let vals: Vec<C64> = self.entries.iter().map(|m| m[(r, c)]).collect();
                let scalar = BochnerFunction::scalar(self.grid.measure_space().clone(), vals)?;
                let out = g(&scalar)?;
                for (e, v) in entries.iter_mut().zip(out.values()) {
                    e[(r, c)] = *v;
                }
            }
        }
        MatrixField::new(out_grid, self.source.clone(), self.target.clone(), entries)
    }
}

fn check_symbol(grid: &TorusGrid, m: &SymbolField) -> Result<()> {
    if *m.grid() != grid.dual() {
        return Err(Error::IncompatibleSpaces(format!(
            "symbol sampled on {:?}, expected the frequency grid {:?}",
            m.grid(),
            grid.dual()
        )));
    }
    Ok(())
}

/// `T_m f = F^{-1}[m(.) (F f)(.)]`.
pub fn apply_multiplier(
    grid: &TorusGrid,
    m: &SymbolField,
    f: &BochnerFunction,
) -> Result<BochnerFunction> {
    check_symbol(grid, m)?;
    if f.dim() != m.source().dim() {
        return Err(Error::DimensionMismatch {
            what: "multiplier input dimension",
            expected: m.source().dim(),
            got: f.dim(),
        });
    }
    let hat = grid.dft_forward(f)?;
    let mut prod = BochnerFunction::zeros(hat.space().clone(), m.target().clone());
    for i in 0..grid.len() {
        matvec_acc(m.entry(i), hat.at(i), 1.0, prod.at_mut(i), false);
    }
    grid.dft_inverse(&prod)
}

/// `F^{-1}[w F f]` for a real scalar weight `w` sampled on the frequency grid.
pub fn apply_scalar_multiplier(
    grid: &TorusGrid,
    weights: &[f64],
    f: &BochnerFunction,
) -> Result<BochnerFunction> {
    if weights.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            what: "scalar symbol samples",
            expected: grid.len(),
            got: weights.len(),
        });
    }
    let mut hat = grid.dft_forward(f)?;
    let dim = hat.dim();
    for (z, w) in hat
        .values_mut()
        .iter_mut()
        .enumerate()
        .map(|(i, z)| (z, weights[i / dim]))
    {
        *z *= w;
    }
    grid.dft_inverse(&hat)
}

/// The symbol `(2 pi)^(n/2) F k` whose multiplier is convolution with `k`.
pub fn kernel_symbol(k: &MatrixField) -> Result<SymbolField> {
    let grid = k.grid().clone();
    let scale = C64::new((2.0 * PI).powf(0.5 * grid.dim() as f64), 0.0);
    k.map_entries(grid.dual(), |e| Ok(grid.dft_forward(e)?.scaled(scale)))
}

/// The convolution kernel `(2 pi)^(-n/2) F^{-1} m` of a symbol, so that
/// `T_m f = convolve(kernel, f)`.
pub fn multiplier_kernel(grid: &TorusGrid, m: &SymbolField) -> Result<MatrixField> {
    check_symbol(grid, m)?;
    let scale = C64::new((2.0 * PI).powf(-0.5 * grid.dim() as f64), 0.0);
    m.map_entries(grid.clone(), |e| {
        let e = BochnerFunction::scalar(grid.dual().measure_space().clone(), e.values().to_vec())?;
        Ok(grid.dft_inverse(&e)?.scaled(scale))
    })
}

/// Periodic convolution `(k * f)(x) = int k(x - y) f(y) dy`, computed spectrally.
pub fn convolve(k: &MatrixField, f: &BochnerFunction) -> Result<BochnerFunction> {
    let grid = k.grid();
    grid.accepts(f)?;
    let symbol = kernel_symbol(k)?;
    apply_multiplier(grid, &symbol, f)
}

/// The multiplier `T_m` as an operator `L(grid, X) -> L(grid, Y)`.
#[derive(Clone, Debug)]
pub struct MultiplierOperator {
    grid: TorusGrid,
    symbol: SymbolField,
    adjoint: SymbolField,
}

impl MultiplierOperator {
    pub fn new(grid: TorusGrid, symbol: SymbolField) -> Result<Self> {
        check_symbol(&grid, &symbol)?;
        let adjoint = symbol.adjoint();
        Ok(MultiplierOperator {
            grid,
            symbol,
            adjoint,
        })
    }

    /// Convolution with `k` as a multiplier operator.
    pub fn convolution(k: &MatrixField) -> Result<Self> {
        Self::new(k.grid().clone(), kernel_symbol(k)?)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn symbol(&self) -> &SymbolField {
        &self.symbol
    }
}

impl BochnerOperator for MultiplierOperator {
    fn domain(&self) -> &Arc<DiscreteMeasureSpace> {
        self.grid.measure_space()
    }

    fn source(&self) -> &NormedSpace {
        self.symbol.source()
    }

    fn codomain(&self) -> &Arc<DiscreteMeasureSpace> {
        self.grid.measure_space()
    }

    fn target(&self) -> &NormedSpace {
        self.symbol.target()
    }

    fn apply(&self, f: &BochnerFunction) -> Result<BochnerFunction> {
        apply_multiplier(&self.grid, &self.symbol, f)
    }

    fn apply_adjoint(&self, h: &BochnerFunction) -> Result<BochnerFunction> {
        apply_multiplier(&self.grid, &self.adjoint, h)
    }
}

/// `C1 = sup_{||x||=1} ||k(.) x||_{L_theta(Y)}` and `C2` for `k(.)^H` on the duals.
pub fn convolution_schur_constants(
    k: &MatrixField,
    theta: f64,
    budget: &SearchBudget,
    seed: u64,
) -> Result<SchurConstants> {
    let point = Arc::new(DiscreteMeasureSpace::counting(1)?);
    let space = k.grid().measure_space().clone();
    let forward = OperatorKernel::new(
        point.clone(),
        space.clone(),
        k.source().clone(),
        k.target().clone(),
        k.entries().to_vec(),
    )?;
    let adj = k.adjoint();
    let backward = OperatorKernel::new(
        point,
        space,
        adj.source().clone(),
        adj.target().clone(),
        adj.entries().to_vec(),
    )?;
    Ok(SchurConstants {
        c1: schur_c1(&forward, theta, budget, seed)?,
        c2: schur_c1(&backward, theta, budget, seed.wrapping_add(1))?,
        tau: 1.0,
        theta,
    })
}

/// `||g||_{L_theta}` for a scalar field sampled on `grid`.
pub fn scalar_lp_norm(grid: &TorusGrid, values: &[C64], p: Exponent) -> f64 {
    let w = grid.cell_volume();
    p.weighted_mean(values.iter().map(|z| (w, z.norm())))
}
