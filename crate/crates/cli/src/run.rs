//! Scenario execution.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use schur_besov::besov::{
    besov_norm, build_partition, check_corollary32, dyadic_dilations, BesovParams,
};
use schur_besov::multiplier::{
    lemma36_check, mikhlin_check, verify_fm_besov, verify_fm_lq_lp, MultiplierReport,
};
use schur_besov::schur::{slack_ratio, theorem27_bound, verify_schur_bound, EXACT_TOLERANCE};
use schur_besov::symbol::{BlockSymbol, IdentitySymbol, ScalarDecaySymbol, Symbol};
use schur_besov::torus::convolution_schur_constants;
use schur_besov::{
    estimate_norm, make_exponents, BochnerFunction, CMatrix, DiscreteMeasureSpace, MatrixField,
    MultiplierOperator, NormedSpace, OperatorKernel, TorusGrid, C64,
};
use serde::{Deserialize, Serialize};

use crate::config::{FunctionSpec, GridSpec, KernelSpec, Scenario, ScenarioParams, SymbolSpec};

pub const VERSION: &str = concat!("schur-besov ", env!("CARGO_PKG_VERSION"));

/// Run-wide settings that scenarios may leave unset.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunDefaults {
    pub seed: u64,
    pub grid_n: usize,
    pub grid_points: usize,
    pub period: f64,
    /// Record wall-clock time per scenario; off by default so that output
    /// is byte-identical across runs.
    pub timing: bool,
}

impl Default for RunDefaults {
    fn default() -> Self {
        RunDefaults {
            seed: 0,
            grid_n: 1,
            grid_points: 64,
            period: 16.0,
            timing: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub name: String,
    pub kind: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<String>,
    pub params: serde_json::Value,
    pub constants: BTreeMap<String, f64>,
    pub bound: Option<f64>,
    pub lower_bound: Option<f64>,
    pub slack_ratio: Option<f64>,
    pub tolerance: Option<f64>,
    pub grid_points: Option<usize>,
    pub pass: bool,
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
    pub version: String,
}

#[derive(Default)]
struct Outcome {
    constants: BTreeMap<String, f64>,
    bound: Option<f64>,
    lower_bound: Option<f64>,
    slack_ratio: Option<f64>,
    tolerance: Option<f64>,
    grid_points: Option<usize>,
    pass: bool,
}

impl Outcome {
    fn constant(&mut self, key: impl Into<String>, value: f64) {
        self.constants.insert(key.into(), value);
    }

    /// Drops non-finite entries (JSON has no representation for them) and
    /// fails the scenario if any were present.
    fn sanitize(&mut self) -> Option<String> {
        let mut bad: Vec<String> = Vec::new();
        self.constants.retain(|k, v| {
            let ok = v.is_finite();
            if !ok {
                bad.push(k.clone());
            }
            ok
        });
        for (name, slot) in [
            ("bound", &mut self.bound),
            ("lower_bound", &mut self.lower_bound),
            ("slack_ratio", &mut self.slack_ratio),
        ] {
            if slot.is_some_and(|v| !v.is_finite()) {
                *slot = None;
                bad.push(name.to_string());
            }
        }
        if bad.is_empty() {
            None
        } else {
            self.pass = false;
            Some(format!("non-finite values: {}", bad.join(", ")))
        }
    }
}

type RunResult = Result<Outcome, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn build_grid(spec: &GridSpec, d: &RunDefaults) -> Result<TorusGrid, String> {
    TorusGrid::new(
        spec.n.unwrap_or(d.grid_n),
        spec.points.unwrap_or(d.grid_points),
        spec.period.unwrap_or(d.period),
    )
    .map_err(err)
}

fn finite_kernel(spec: &KernelSpec, seed: u64) -> Result<OperatorKernel, String> {
    match spec {
        KernelSpec::Circulant { g } => {
            let g: Vec<C64> = g.iter().map(|&x| C64::new(x, 0.0)).collect();
            OperatorKernel::circulant(&g).map_err(err)
        }
        KernelSpec::RandomGaussian {
            domain_points,
            codomain_points,
            source,
            target,
        } => OperatorKernel::random_gaussian(
            *domain_points,
            *codomain_points,
            source.build().map_err(err)?,
            target.build().map_err(err)?,
            seed,
        )
        .map_err(err),
        KernelSpec::Identity { points, space } => {
            let x = space.build().map_err(err)?;
            let s = Arc::new(DiscreteMeasureSpace::counting(*points).map_err(err)?);
            let d = x.dim();
            OperatorKernel::from_fn(s.clone(), s, x.clone(), x, |t, u| {
                if t == u {
                    CMatrix::identity(d, d)
                } else {
                    CMatrix::zeros(d, d)
                }
            })
            .map_err(err)
        }
        KernelSpec::ScalarDecay { .. } => {
            Err("scalar-decay is a torus kernel; use young-check".into())
        }
    }
}

fn schur_outcome(
    k: &OperatorKernel,
    theta: f64,
    q: schur_besov::Exponent,
    budget: &schur_besov::SearchBudget,
    seed: u64,
) -> RunResult {
    let rep = verify_schur_bound(k, theta, q, budget, seed).map_err(err)?;
    let mut out = Outcome::default();
    out.constant("c1", rep.constants.c1.upper);
    out.constant("c2", rep.constants.c2.upper);
    if let Some(l) = rep.constants.c1.lower {
        out.constant("c1_lower", l);
    }
    if let Some(l) = rep.constants.c2.lower {
        out.constant("c2_lower", l);
    }
    out.constant("p_recip", rep.exponents.p.recip());
    out.bound = Some(rep.bound);
    out.lower_bound = Some(rep.lower_bound);
    out.slack_ratio = Some(rep.ratio);
    out.tolerance = Some(rep.tolerance);
    out.pass = !rep.violation;
    Ok(out)
}

fn build_symbol(spec: &SymbolSpec, grid: &TorusGrid) -> Result<Arc<dyn Symbol>, String> {
    Ok(match spec {
        SymbolSpec::Identity { space } => {
            Arc::new(IdentitySymbol::new(space.build().map_err(err)?))
        }
        SymbolSpec::ScalarDecay { beta, space } => {
            Arc::new(ScalarDecaySymbol::new(*beta, space.build().map_err(err)?).map_err(err)?)
        }
        SymbolSpec::Block { k, beta } => {
            let k_max = build_partition(grid).map_err(err)?.k_max();
            let base: Arc<dyn Symbol> =
                Arc::new(ScalarDecaySymbol::new(*beta, NormedSpace::scalar()).map_err(err)?);
            Arc::new(BlockSymbol::new(*k, k_max, base).map_err(err)?)
        }
    })
}

fn build_function(
    spec: &FunctionSpec,
    grid: &TorusGrid,
    seed: u64,
) -> Result<BochnerFunction, String> {
    match spec {
        FunctionSpec::ScalarDecay { beta } => grid
            .function(NormedSpace::scalar(), |x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                vec![C64::new((1.0 + r2).powf(-0.5 * beta), 0.0)]
            })
            .map_err(err),
        FunctionSpec::Block { k } => {
            let partition = build_partition(grid).map_err(err)?;
            if *k > partition.k_max() {
                return Err(format!("block {k} above top block {}", partition.k_max()));
            }
            let dual = grid.dual();
            let block = partition.block(*k);
            let hat = BochnerFunction::from_fn(
                dual.measure_space().clone(),
                NormedSpace::scalar(),
                |i| vec![C64::new(block[i], 0.0)],
            )
            .map_err(err)?;
            grid.dft_inverse(&hat).map_err(err)
        }
        FunctionSpec::RandomGaussian { space } => {
            let x = space.build().map_err(err)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            grid.function(x.clone(), |_| {
                (0..x.dim())
                    .map(|_| {
                        C64::new(
                            StandardNormal.sample(&mut rng),
                            StandardNormal.sample(&mut rng),
                        )
                    })
                    .collect()
            })
            .map_err(err)
        }
    }
}

fn multiplier_outcome(rep: MultiplierReport, grid: &TorusGrid) -> Outcome {
    let mut out = Outcome::default();
    out.constant("a", rep.constant_a);
    out.constant("l", rep.derivative_order_l as f64);
    for (name, v) in &rep.terms {
        out.constant(name.clone(), *v);
    }
    for (k, v) in rep.per_k.iter().enumerate() {
        out.constant(format!("a_k{}", k + 1), *v);
    }
    if rep.skipped_points > 0 {
        out.constant("skipped_points", rep.skipped_points as f64);
    }
    out.grid_points = Some(grid.points_per_axis());
    out.pass = rep.admissible;
    out
}

fn execute(scenario: &Scenario, seed: u64, d: &RunDefaults) -> RunResult {
    match &scenario.params {
        ScenarioParams::SchurVerify(p) => {
            let k = finite_kernel(&p.kernel, seed)?;
            schur_outcome(&k, p.theta, p.q, &p.budget, seed)
        }
        ScenarioParams::YoungCheck(p) => match &p.kernel {
            KernelSpec::ScalarDecay { beta } => {
                let grid = build_grid(&p.grid, d)?;
                let k = MatrixField::from_fn(
                    grid.clone(),
                    NormedSpace::scalar(),
                    NormedSpace::scalar(),
                    |x| {
                        let r2: f64 = x.iter().map(|v| v * v).sum();
                        CMatrix::from_element(1, 1, C64::new((1.0 + r2).powf(-0.5 * beta), 0.0))
                    },
                )
                .map_err(err)?;
                let e = make_exponents(p.q, p.theta).map_err(err)?;
                let c = convolution_schur_constants(&k, p.theta, &p.budget, seed).map_err(err)?;
                let bound = theorem27_bound(&c, &e);
                let op = MultiplierOperator::convolution(&k).map_err(err)?;
                let lower = estimate_norm(&op, e.q, e.p, &p.budget, seed.wrapping_add(2))
                    .map_err(err)?
                    .value;
                let ratio = slack_ratio(lower, bound);
                let mut out = Outcome::default();
                out.constant("c1", c.c1.upper);
                out.constant("c2", c.c2.upper);
                out.constant("p_recip", e.p.recip());
                out.bound = Some(bound);
                out.lower_bound = Some(lower);
                out.slack_ratio = Some(ratio);
                out.tolerance = Some(EXACT_TOLERANCE);
                out.grid_points = Some(grid.points_per_axis());
                out.pass = ratio <= 1.0 + EXACT_TOLERANCE;
                Ok(out)
            }
            other => {
                let k = finite_kernel(other, seed)?;
                schur_outcome(&k, p.theta, p.q, &p.budget, seed)
            }
        },
        ScenarioParams::BesovNorm(p) => {
            let grid = build_grid(&p.grid, d)?;
            let partition = build_partition(&grid).map_err(err)?;
            let f = build_function(&p.function, &grid, seed)?;
            let params = BesovParams::new(p.s, p.q, p.r).map_err(err)?;
            let norm = besov_norm(&f, &params, &partition).map_err(err)?;
            let mut out = Outcome::default();
            out.constant("besov_norm", norm);
            out.constant("k_max", partition.k_max() as f64);
            out.grid_points = Some(grid.points_per_axis());
            out.pass = norm.is_finite();
            Ok(out)
        }
        ScenarioParams::FmCheck(p) => {
            let grid = build_grid(&p.grid, d)?;
            let m = build_symbol(&p.symbol, &grid)?;
            let dilations = dyadic_dilations(p.dilation_depth);
            let rep = match &p.besov {
                Some(b) => verify_fm_besov(
                    m,
                    &grid,
                    p.u,
                    p.q.value(),
                    p.p.value(),
                    b.s,
                    b.r.value(),
                    &dilations,
                    &p.budget,
                    seed,
                ),
                None => verify_fm_lq_lp(
                    m.as_ref(),
                    &grid,
                    p.u,
                    p.q.value(),
                    p.p.value(),
                    &dilations,
                    &p.budget,
                    seed,
                ),
            }
            .map_err(err)?;
            let mut out = Outcome::default();
            let key = if p.besov.is_some() { "a" } else { "mu" };
            out.constant(key, rep.theory_constant);
            out.constant("dilation", rep.dilation);
            out.bound = Some(rep.theory_constant);
            out.lower_bound = Some(rep.lower_bound);
            out.slack_ratio = Some(rep.ratio);
            out.grid_points = Some(grid.points_per_axis());
            out.pass = rep.ratio.is_finite();
            Ok(out)
        }
        ScenarioParams::MikhlinCheck(p) => {
            let grid = build_grid(&p.grid, d)?;
            let m = build_symbol(&p.symbol, &grid)?;
            let rep =
                mikhlin_check(m.as_ref(), &grid, p.u, p.p.value(), p.q.value()).map_err(err)?;
            Ok(multiplier_outcome(rep, &grid))
        }
        ScenarioParams::Lemma36Check(p) => {
            let grid = build_grid(&p.grid, d)?;
            let m = build_symbol(&p.symbol, &grid)?;
            let rep = lemma36_check(
                m.as_ref(),
                &grid,
                p.u,
                p.p.value(),
                p.q.value(),
                p.theta.value(),
            )
            .map_err(err)?;
            Ok(multiplier_outcome(rep, &grid))
        }
        ScenarioParams::Corollary32Check(p) => {
            let grid = build_grid(&p.grid, d)?;
            let rep = check_corollary32(p.u, p.theta, &grid, p.samples, seed).map_err(err)?;
            let mut out = Outcome::default();
            out.constant("max_ratio", rep.max_ratio);
            out.constant("mean_ratio", rep.mean_ratio);
            out.constant("min_ratio", rep.min_ratio);
            out.constant("skipped", rep.skipped as f64);
            out.lower_bound = Some(rep.max_ratio);
            out.grid_points = Some(grid.points_per_axis());
            out.pass = !rep.ratios.is_empty() && rep.max_ratio.is_finite();
            Ok(out)
        }
    }
}

pub fn run_scenario(scenario: &Scenario, defaults: &RunDefaults) -> RunReport {
    let seed = scenario.seed.unwrap_or(defaults.seed);
    let start = Instant::now();
    let result = execute(scenario, seed, defaults);
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let (mut outcome, mut error) = match result {
        Ok(o) => (o, None),
        Err(e) => (Outcome::default(), Some(e)),
    };
    if let Some(msg) = outcome.sanitize() {
        error.get_or_insert(msg);
    }
    RunReport {
        name: scenario.name.clone(),
        kind: scenario.kind.as_str().to_string(),
        seed,
        study: scenario.study.clone(),
        params: serde_json::to_value(&scenario.params).unwrap_or(serde_json::Value::Null),
        constants: outcome.constants,
        bound: outcome.bound,
        lower_bound: outcome.lower_bound,
        slack_ratio: outcome.slack_ratio,
        tolerance: outcome.tolerance,
        grid_points: outcome.grid_points,
        pass: error.is_none() && outcome.pass,
        error,
        elapsed_ms: defaults.timing.then_some(elapsed),
        version: VERSION.to_string(),
    }
}

/// Runs every scenario on a pool of `parallelism` threads; reports come back
/// in input order.
pub fn run_scenarios(
    scenarios: &[Scenario],
    parallelism: usize,
    defaults: &RunDefaults,
) -> Vec<RunReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| {
        scenarios
            .par_iter()
            .map(|s| run_scenario(s, defaults))
            .collect()
    })
}
