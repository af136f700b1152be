//! Littlewood–Paley partition of unity on a frequency grid, discrete Besov
//! norms, the dilation quantity `M_u(m)`, and Fourier-type estimates.
//!
//! The profile is `psi(s) = b(s) / sum_j b(2^-j s)` with the bump
//! `b(s) = rho(s - 1/2) rho(2 - s)`, `rho(x) = exp(-1/x)` for `x > 0`. Blocks
//! `phi_k(t) = psi(2^-k |t|)` for `1 <= k < k_max`; the top block `k_max`
//! collects every dyadic piece above it and `phi_0` is the remainder.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bochner::BochnerFunction;
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::kernel::CMatrix;
use crate::operator::{estimate_norm, BochnerOperator, SearchBudget};
use crate::spaces::{operator_norm, DiscreteMeasureSpace, NormedSpace};
use crate::symbol::{DilatedSymbol, Symbol};
use crate::torus::{apply_scalar_multiplier, MatrixField, TorusGrid};
use crate::C64;

fn rho(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

fn bump(s: f64) -> f64 {
    rho(s - 0.5) * rho(2.0 - s)
}

/// The normalized profile `psi`, supported in `[1/2, 2]`.
pub fn psi(s: f64) -> f64 {
    let b = bump(s);
    if b == 0.0 {
        return 0.0;
    }
    let centre = s.log2().floor() as i32;
    let total: f64 = (centre - 2..=centre + 2)
        .map(|j| bump(s * 2f64.powi(-j)))
        .sum();
    b / total
}

/// `phi_k(r)` at radius `r` for a partition whose top block is `k_max`.
pub fn dyadic_block(k: usize, k_max: usize, r: f64) -> f64 {
    let piece = |j: usize| psi(r * 2f64.powi(-(j as i32)));
    let top = || {
        let mut sum = 0.0;
        let mut j = k_max;
        while j < 2000 && 2f64.powi(j as i32 - 1) < r {
            sum += piece(j);
            j += 1;
        }
        sum
    };
    if k > k_max {
        0.0
    } else if k == 0 {
        if r >= 2.0 {
            return 0.0;
        }
        let middle: f64 = (1..k_max).map(piece).sum();
        1.0 - middle - top()
    } else if k == k_max {
        top()
    } else {
        piece(k)
    }
}

/// Dyadic blocks of a grid, sampled on its frequency grid.
#[derive(Clone, Debug)]
pub struct DyadicPartition {
    grid: TorusGrid,
    k_max: usize,
    blocks: Vec<Vec<f64>>,
}

impl DyadicPartition {
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn block(&self, k: usize) -> &[f64] {
        &self.blocks[k]
    }

    pub fn blocks(&self) -> &[Vec<f64>] {
        &self.blocks
    }

    pub fn value(&self, k: usize, r: f64) -> f64 {
        dyadic_block(k, self.k_max, r)
    }

    /// `max_t |sum_k phi_k(t) - 1|` over the frequency grid.
    pub fn partition_defect(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| (self.blocks.iter().map(|b| b[i]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

pub fn build_partition(grid: &TorusGrid) -> Result<DyadicPartition> {
    let nyquist = std::f64::consts::PI * grid.points_per_axis() as f64 / grid.period();
    if nyquist < 2.0 {
        return Err(Error::GridTooCoarse(format!(
            "Nyquist frequency {nyquist} below 2; at least two dyadic blocks are needed"
        )));
    }
    let k_max = (grid.max_frequency().log2().ceil() as usize).max(1);
    let radii: Vec<f64> = grid
        .dual()
        .coordinates()
        .iter()
        .map(|t| t.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let blocks = (0..=k_max)
        .map(|k| radii.iter().map(|&r| dyadic_block(k, k_max, r)).collect())
        .collect();
    Ok(DyadicPartition {
        grid: grid.clone(),
        k_max,
        blocks,
    })
}

/// Smoothness `s`, main index `q` and fine index `r` of `B^s_{q,r}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovParams {
    pub s: f64,
    pub q: Exponent,
    pub r: Exponent,
}

impl BesovParams {
    /// Requires `1 <= q <= r <= inf`.
    pub fn new(s: f64, q: Exponent, r: Exponent) -> Result<Self> {
        if q.value() > r.value() {
            return Err(Error::OutsideAdmissibleRegion(format!(
                "Besov main index {} exceeds fine index {}",
                q.value(),
                r.value()
            )));
        }
        Self::any_order(s, q, r)
    }

    /// No ordering requirement between `q` and `r`; needed for `B_{u,1}`.
    pub fn any_order(s: f64, q: Exponent, r: Exponent) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::InvalidParameter(format!("smoothness {s}")));
        }
        Ok(BesovParams { s, q, r })
    }
}

fn check_partition(f_len: usize, partition: &DyadicPartition) -> Result<()> {
    if f_len != partition.grid.len() {
        return Err(Error::DimensionMismatch {
            what: "grid point count",
            expected: partition.grid.len(),
            got: f_len,
        });
    }
    Ok(())
}

/// The Littlewood–Paley pieces `phi_k(D) f`, `k = 0..=k_max`.
pub fn littlewood_paley_blocks(
    f: &BochnerFunction,
    partition: &DyadicPartition,
) -> Result<Vec<BochnerFunction>> {
    check_partition(f.len(), partition)?;
    partition
        .blocks
        .iter()
        .map(|b| apply_scalar_multiplier(&partition.grid, b, f))
        .collect()
}

fn combine(block_norms: &[f64], params: &BesovParams) -> f64 {
    params.r.weighted_mean(
        block_norms
            .iter()
            .enumerate()
            .map(|(k, n)| (1.0, 2f64.powf(k as f64 * params.s) * n)),
    )
}

/// `|| 2^{ks} ||phi_k(D) f||_{L_q} ||_{l_r}`.
pub fn besov_norm(
    f: &BochnerFunction,
    params: &BesovParams,
    partition: &DyadicPartition,
) -> Result<f64> {
    let norms: Vec<f64> = littlewood_paley_blocks(f, partition)?
        .iter()
        .map(|b| b.lp_norm(params.q))
        .collect();
    Ok(combine(&norms, params))
}

/// Besov norm of a `B(X, Y)`-valued field: blocks are formed entrywise and
/// measured through the pointwise operator norm.
pub fn besov_norm_matrix(
    field: &MatrixField,
    params: &BesovParams,
    partition: &DyadicPartition,
) -> Result<f64> {
    let grid = &partition.grid;
    if field.grid() != grid {
        return Err(Error::IncompatibleSpaces(
            "field and partition live on different grids".into(),
        ));
    }
    let (rows, cols) = (field.target().dim(), field.source().dim());
    let space = grid.measure_space().clone();
    let mut hats = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let vals = field.entries().iter().map(|m| m[(r, c)]).collect();
            hats.push(grid.dft_forward(&BochnerFunction::scalar(space.clone(), vals)?)?);
        }
    }
    let mut norms = Vec::with_capacity(partition.blocks.len());
    let mut block_entries = vec![CMatrix::zeros(rows, cols); grid.len()];
    for weights in &partition.blocks {
        if weights.iter().all(|&w| w == 0.0) {
            norms.push(0.0);
            continue;
        }
        for (e, hat) in hats.iter().enumerate() {
            let mut h = hat.clone();
            for (z, w) in h.values_mut().iter_mut().zip(weights) {
                *z *= w;
            }
            let piece = grid.dft_inverse(&h)?;
            for (m, v) in block_entries.iter_mut().zip(piece.values()) {
                m[(e / cols, e % cols)] = *v;
            }
        }
        let w = grid.cell_volume();
        norms.push(
            params.q.weighted_mean(
                block_entries
                    .iter()
                    .map(|m| (w, operator_norm(m, field.source(), field.target()).value)),
            ),
        );
    }
    Ok(combine(&norms, params))
}

/// `{2^-j, ..., 2^j}`.
pub fn dyadic_dilations(j: u32) -> Vec<f64> {
    let j = j as i32;
    (-j..=j).map(|i| 2f64.powi(i)).collect()
}

pub fn check_multiplier_exponents(u: Exponent, p: Exponent, q: Exponent) -> Result<()> {
    let gap = q.recip() - p.recip();
    if gap < -1e-12 || gap > u.recip() + 1e-12 {
        return Err(Error::OutsideAdmissibleRegion(format!(
            "need 0 <= 1/q - 1/p <= 1/u, got 1/q - 1/p = {gap} with u = {}",
            u.value()
        )));
    }
    Ok(())
}

/// Result of [`mu_estimate`]: the minimum and the dilation attaining it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuEstimate {
    pub value: f64,
    pub dilation: f64,
}

/// `min_a ||m(a .)||_{B^{n(1/u+1/p-1/q)}_{u,1}}` over `dilations`, with `m`
/// sampled on the frequency grid of `grid`. Dilations whose samples vanish
/// identically are skipped; if all do, the estimate is 0.
pub fn mu_estimate(
    m: &dyn Symbol,
    grid: &TorusGrid,
    u: Exponent,
    p: Exponent,
    q: Exponent,
    dilations: &[f64],
) -> Result<MuEstimate> {
    let symbol_partition = build_partition(&grid.dual())?;
    mu_estimate_with(m, grid, &symbol_partition, u, p, q, dilations)
}

pub(crate) fn mu_estimate_with(
    m: &dyn Symbol,
    grid: &TorusGrid,
    symbol_partition: &DyadicPartition,
    u: Exponent,
    p: Exponent,
    q: Exponent,
    dilations: &[f64],
) -> Result<MuEstimate> {
    check_multiplier_exponents(u, p, q)?;
    if dilations.is_empty() {
        return Err(Error::EmptyDilationGrid);
    }
    if dilations.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
        return Err(Error::InvalidParameter("dilations must be positive".into()));
    }
    let n = grid.dim() as f64;
    let params = BesovParams::any_order(n * (u.recip() + p.recip() - q.recip()), u, Exponent::ONE)?;
    let mut best: Option<MuEstimate> = None;
    for &a in dilations {
        let dilated = DilatedSymbol::new(a, m);
        let field =
            MatrixField::from_fn(grid.dual(), m.source().clone(), m.target().clone(), |t| {
                dilated.eval(t)
            })?;
        if field
            .entries()
            .iter()
            .all(|e| e.iter().all(|z| *z == C64::new(0.0, 0.0)))
        {
            continue;
        }
        let value = besov_norm_matrix(&field, &params, symbol_partition)?;
        if best.is_none_or(|b| value < b.value) {
            best = Some(MuEstimate { value, dilation: a });
        }
    }
    Ok(best.unwrap_or(MuEstimate {
        value: 0.0,
        dilation: dilations[0],
    }))
}

/// The transform `F: L(grid, X) -> L(frequency grid, X)` as an operator.
struct FourierOperator {
    grid: TorusGrid,
    dual: TorusGrid,
    space: NormedSpace,
}

impl BochnerOperator for FourierOperator {
    fn domain(&self) -> &Arc<DiscreteMeasureSpace> {
        self.grid.measure_space()
    }

    fn source(&self) -> &NormedSpace {
        &self.space
    }

    fn codomain(&self) -> &Arc<DiscreteMeasureSpace> {
        self.dual.measure_space()
    }

    fn target(&self) -> &NormedSpace {
        &self.space
    }

    fn apply(&self, f: &BochnerFunction) -> Result<BochnerFunction> {
        self.grid.dft_forward(f)
    }

    fn apply_adjoint(&self, h: &BochnerFunction) -> Result<BochnerFunction> {
        self.grid.dft_inverse(h)
    }
}

fn random_field<R: Rng>(
    grid: &TorusGrid,
    space: &NormedSpace,
    rng: &mut R,
) -> Result<BochnerFunction> {
    BochnerFunction::from_fn(grid.measure_space().clone(), space.clone(), |_| {
        (0..space.dim())
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect()
    })
}

/// Empirical lower estimate of the Fourier-type constant
/// `sup ||F f||_{L_u'} / ||f||_{L_u}` on `grid`: random samples, a point mass,
/// and a short power iteration on `F`.
pub fn fourier_type_constant(
    space: &NormedSpace,
    u: f64,
    grid: &TorusGrid,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if !(1.0..=2.0).contains(&u) {
        return Err(Error::OutsideAdmissibleRegion(format!(
            "Fourier type exponent {u} outside [1, 2]"
        )));
    }
    let u = Exponent::new(u)?;
    let u_dual = u.conjugate();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ratio = |f: &BochnerFunction| -> Result<f64> {
        Ok(grid.dft_forward(f)?.lp_norm(u_dual) / f.lp_norm(u))
    };
    let mut best = 0.0f64;
    let mut delta = BochnerFunction::zeros(grid.measure_space().clone(), space.clone());
    delta
        .at_mut(grid.origin_index())
        .copy_from_slice(&space.unit_basis_vector(0));
    best = best.max(ratio(&delta)?);
    for _ in 0..samples {
        best = best.max(ratio(&random_field(grid, space, &mut rng)?)?);
    }
    let op = FourierOperator {
        grid: grid.clone(),
        dual: grid.dual(),
        space: space.clone(),
    };
    let budget = SearchBudget {
        restarts: 2,
        iterations: 30,
        sphere_samples: 0,
    };
    best = best.max(estimate_norm(&op, u, u_dual, &budget, rng.gen())?.value);
    Ok(best)
}

/// Empirical ratios `||F^{-1} g||_{L_theta} / ||g||_{B^{n(1/theta - 1/u')}_{u,1}}`
/// over band-limited samples `g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corollary32Report {
    pub u: f64,
    pub theta: f64,
    pub samples: usize,
    pub skipped: usize,
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub mean_ratio: f64,
    pub ratios: Vec<f64>,
}

/// Samples `g = F h` with `h` a random field localized to one dyadic annulus
/// in space, so that `g` has finitely many Littlewood–Paley pieces.
pub fn check_corollary32(
    u: f64,
    theta: f64,
    grid: &TorusGrid,
    samples: usize,
    seed: u64,
) -> Result<Corollary32Report> {
    if !(1.0..=2.0).contains(&u) {
        return Err(Error::OutsideAdmissibleRegion(format!(
            "Fourier type exponent {u} outside [1, 2]"
        )));
    }
    let ue = Exponent::new(u)?;
    let th = Exponent::new(theta)?;
    if th.recip() < ue.conjugate().recip() - 1e-12 {
        return Err(Error::OutsideAdmissibleRegion(format!(
            "need 1 <= theta <= u' = {}, got theta = {theta}",
            ue.conjugate().value()
        )));
    }
    let dual = grid.dual();
    let partition = build_partition(&dual)?;
    let n = grid.dim() as f64;
    let params =
        BesovParams::any_order(n * (th.recip() - ue.conjugate().recip()), ue, Exponent::ONE)?;
    let radii: Vec<f64> = grid
        .coordinates()
        .iter()
        .map(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let scalar = NormedSpace::scalar();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ratios = Vec::with_capacity(samples);
    let mut skipped = 0;
    for _ in 0..samples {
        let k = rng.gen_range(0..=partition.k_max());
        let mut h = random_field(grid, &scalar, &mut rng)?;
        for (z, r) in h.values_mut().iter_mut().zip(&radii) {
            *z *= partition.value(k, *r);
        }
        let g = grid.dft_forward(&h)?;
        let denom = besov_norm(&g, &params, &partition)?;
        if denom == 0.0 {
            skipped += 1;
            continue;
        }
        ratios.push(grid.dft_inverse(&g)?.lp_norm(th) / denom);
    }
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let mean_ratio = if ratios.is_empty() {
        0.0
    } else {
        ratios.iter().sum::<f64>() / ratios.len() as f64
    };
    Ok(Corollary32Report {
        u,
        theta,
        samples,
        skipped,
        max_ratio,
        min_ratio: if ratios.is_empty() { 0.0 } else { min_ratio },
        mean_ratio,
        ratios,
    })
}
