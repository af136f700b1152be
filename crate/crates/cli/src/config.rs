//! Scenario configuration files.
//!
//! A config is a TOML document holding an array of `[[scenario]]` tables:
//!
//! ```toml
//! [[scenario]]
//! name = "young-z4"
//! kind = "young-check"
//! seed = 1
//!
//! [scenario.params]
//! theta = 2.0
//! q = 1.0
//! kernel = { builtin = "circulant", g = [1.0, 1.0, 0.0, 0.0] }
//! ```
//!
//! `name` and `kind` are required, `seed` defaults to the run seed and
//! `study` optionally groups scenarios into one plot series. Parameters are
//! validated per kind; unknown keys are rejected everywhere.

use std::collections::HashSet;
use std::ops::Range;

use schur_besov::besov::BesovParams;
use schur_besov::exponent::make_exponents;
use schur_besov::{Exponent, NormedSpace, SearchBudget};
use serde::{Deserialize, Serialize};
use toml::Spanned;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("config syntax error: {0}")]
    Syntax(String),
    #[error("line {line}: scenario `{scenario}`: key `{key}`: {message}")]
    Invalid {
        line: usize,
        scenario: String,
        key: String,
        message: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    SchurVerify,
    YoungCheck,
    BesovNorm,
    FmCheck,
    MikhlinCheck,
    Lemma36Check,
    Corollary32Check,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::SchurVerify => "schur-verify",
            Kind::YoungCheck => "young-check",
            Kind::BesovNorm => "besov-norm",
            Kind::FmCheck => "fm-check",
            Kind::MikhlinCheck => "mikhlin-check",
            Kind::Lemma36Check => "lemma36-check",
            Kind::Corollary32Check => "corollary32-check",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormName {
    Euclidean,
    Ell1,
    Ellinf,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub dim: usize,
    pub norm: NormName,
}

impl Default for SpaceSpec {
    fn default() -> Self {
        SpaceSpec {
            dim: 1,
            norm: NormName::Euclidean,
        }
    }
}

impl SpaceSpec {
    pub fn build(&self) -> schur_besov::Result<NormedSpace> {
        if self.dim == 0 {
            return Err(schur_besov::Error::InvalidNorm(
                "dimension must be at least 1".into(),
            ));
        }
        Ok(match self.norm {
            NormName::Euclidean => NormedSpace::euclidean(self.dim),
            NormName::Ell1 => NormedSpace::ell1(self.dim),
            NormName::Ellinf => NormedSpace::ellinf(self.dim),
        })
    }
}

/// Torus grid settings; unset fields fall back to the run defaults.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
}

/// Kernels on finite measure spaces (`schur-verify`) or on the torus (`young-check`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builtin", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KernelSpec {
    /// Scalar circulant kernel `k(t, s) = g((t - s) mod n)` with counting measure.
    Circulant { g: Vec<f64> },
    /// Gaussian entries, random positive point weights.
    RandomGaussian {
        domain_points: usize,
        codomain_points: usize,
        #[serde(default)]
        source: SpaceSpec,
        #[serde(default)]
        target: SpaceSpec,
    },
    /// `k(t, s) = I` if `t = s`, else 0, on counting measure.
    Identity {
        points: usize,
        #[serde(default)]
        space: SpaceSpec,
    },
    /// Torus kernel `(1 + |x|^2)^(-beta/2)` (young-check only).
    ScalarDecay { beta: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builtin", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SymbolSpec {
    Identity {
        #[serde(default)]
        space: SpaceSpec,
    },
    /// `(1 + |t|^2)^(-beta/2) I`.
    ScalarDecay {
        beta: f64,
        #[serde(default)]
        space: SpaceSpec,
    },
    /// Dyadic block `phi_k(|t|) (1 + |t|^2)^(-beta/2)`, scalar.
    Block {
        k: usize,
        #[serde(default)]
        beta: f64,
    },
}

/// Grid functions for `besov-norm`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builtin", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSpec {
    /// `(1 + |x|^2)^(-beta/2)`.
    ScalarDecay { beta: f64 },
    /// The Littlewood–Paley wavelet of block `k`.
    Block { k: usize },
    /// Gaussian samples in the given space.
    RandomGaussian {
        #[serde(default)]
        space: SpaceSpec,
    },
}

fn default_dilation_depth() -> u32 {
    4
}

fn default_samples() -> usize {
    100
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchurVerifyParams {
    pub theta: f64,
    pub q: Exponent,
    pub kernel: KernelSpec,
    #[serde(default)]
    pub budget: SearchBudget,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YoungParams {
    pub theta: f64,
    pub q: Exponent,
    pub kernel: KernelSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub budget: SearchBudget,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BesovNormParams {
    pub s: f64,
    pub q: Exponent,
    pub r: Exponent,
    pub function: FunctionSpec,
    #[serde(default)]
    pub grid: GridSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BesovTarget {
    pub s: f64,
    pub r: Exponent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FmParams {
    pub u: f64,
    pub q: Exponent,
    pub p: Exponent,
    pub symbol: SymbolSpec,
    /// When present, check `B^s_{q,r} -> B^s_{p,r}` instead of `L_q -> L_p`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub besov: Option<BesovTarget>,
    #[serde(default = "default_dilation_depth")]
    pub dilation_depth: u32,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub budget: SearchBudget,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MikhlinParams {
    pub u: f64,
    pub q: Exponent,
    pub p: Exponent,
    pub symbol: SymbolSpec,
    #[serde(default)]
    pub grid: GridSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lemma36Params {
    pub u: f64,
    pub q: Exponent,
    pub p: Exponent,
    pub theta: Exponent,
    pub symbol: SymbolSpec,
    #[serde(default)]
    pub grid: GridSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Corollary32Params {
    pub u: f64,
    pub theta: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub grid: GridSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ScenarioParams {
    SchurVerify(SchurVerifyParams),
    YoungCheck(YoungParams),
    BesovNorm(BesovNormParams),
    FmCheck(FmParams),
    MikhlinCheck(MikhlinParams),
    Lemma36Check(Lemma36Params),
    Corollary32Check(Corollary32Params),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub kind: Kind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub study: Option<String>,
    pub params: ScenarioParams,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    scenario: Vec<Spanned<RawScenario>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Spanned<String>,
    kind: Spanned<Kind>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    study: Option<String>,
    #[serde(default)]
    params: Option<Spanned<toml::Table>>,
}

fn line_of(text: &str, span: Range<usize>) -> usize {
    text[..span.start.min(text.len())].matches('\n').count() + 1
}

fn admissible_q(theta: f64, q: Exponent) -> Result<(), String> {
    make_exponents(q, theta)
        .map(|_| ())
        .map_err(|e| e.to_string())
}

fn multiplier_exponents(u: f64, q: Exponent, p: Exponent) -> Result<(), String> {
    let u = Exponent::new(u).map_err(|e| e.to_string())?;
    schur_besov::besov::check_multiplier_exponents(u, p, q).map_err(|e| e.to_string())
}

/// Kind-level admissibility checks that need no computation; returns the offending key.
fn validate(params: &ScenarioParams) -> Result<(), (&'static str, String)> {
    match params {
        ScenarioParams::SchurVerify(p) => admissible_q(p.theta, p.q).map_err(|m| ("q", m)),
        ScenarioParams::YoungCheck(p) => {
            if matches!(
                p.kernel,
                KernelSpec::RandomGaussian { .. } | KernelSpec::Identity { .. }
            ) {
                return Err((
                    "kernel",
                    "young-check takes a circulant or scalar-decay kernel".into(),
                ));
            }
            admissible_q(p.theta, p.q).map_err(|m| ("q", m))
        }
        ScenarioParams::BesovNorm(p) => BesovParams::new(p.s, p.q, p.r)
            .map(|_| ())
            .map_err(|e| ("r", e.to_string())),
        ScenarioParams::FmCheck(p) => {
            multiplier_exponents(p.u, p.q, p.p).map_err(|m| ("p", m))?;
            if let Some(b) = &p.besov {
                BesovParams::new(b.s, p.q, b.r).map_err(|e| ("besov", e.to_string()))?;
                BesovParams::new(b.s, p.p, b.r).map_err(|e| ("besov", e.to_string()))?;
            }
            Ok(())
        }
        ScenarioParams::MikhlinCheck(p) => {
            multiplier_exponents(p.u, p.q, p.p).map_err(|m| ("p", m))
        }
        ScenarioParams::Lemma36Check(p) => {
            multiplier_exponents(p.u, p.q, p.p).map_err(|m| ("p", m))?;
            if p.theta.value() < p.u {
                return Err((
                    "theta",
                    format!("outside admissible region: need theta >= u = {}", p.u),
                ));
            }
            Ok(())
        }
        ScenarioParams::Corollary32Check(p) => {
            if !(1.0..=2.0).contains(&p.u) {
                return Err((
                    "u",
                    "outside admissible region: u must lie in [1, 2]".into(),
                ));
            }
            let u = Exponent::new(p.u).map_err(|e| ("u", e.to_string()))?;
            let theta = Exponent::new(p.theta).map_err(|e| ("theta", e.to_string()))?;
            if theta.recip() < u.conjugate().recip() - 1e-12 {
                return Err((
                    "theta",
                    format!(
                        "outside admissible region: need theta <= u' = {}",
                        u.conjugate().value()
                    ),
                ));
            }
            Ok(())
        }
    }
}

fn parse_params(kind: Kind, table: toml::Table) -> Result<ScenarioParams, toml::de::Error> {
    let v = toml::Value::Table(table);
    Ok(match kind {
        Kind::SchurVerify => ScenarioParams::SchurVerify(v.try_into()?),
        Kind::YoungCheck => ScenarioParams::YoungCheck(v.try_into()?),
        Kind::BesovNorm => ScenarioParams::BesovNorm(v.try_into()?),
        Kind::FmCheck => ScenarioParams::FmCheck(v.try_into()?),
        Kind::MikhlinCheck => ScenarioParams::MikhlinCheck(v.try_into()?),
        Kind::Lemma36Check => ScenarioParams::Lemma36Check(v.try_into()?),
        Kind::Corollary32Check => ScenarioParams::Corollary32Check(v.try_into()?),
    })
}

pub fn parse_config(text: &str) -> Result<Vec<Scenario>, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(raw.scenario.len());
    for entry in raw.scenario {
        let span = entry.span();
        let raw = entry.into_inner();
        let name = raw.name.get_ref().clone();
        let invalid = |line: usize, key: &str, message: String| ConfigError::Invalid {
            line,
            scenario: name.clone(),
            key: key.to_string(),
            message,
        };
        if name.is_empty() {
            return Err(invalid(
                line_of(text, raw.name.span()),
                "name",
                "must not be empty".into(),
            ));
        }
        if !seen.insert(name.clone()) {
            return Err(invalid(
                line_of(text, raw.name.span()),
                "name",
                "duplicate scenario name".into(),
            ));
        }
        let kind = *raw.kind.get_ref();
        let (table, params_line) = match raw.params {
            Some(p) => {
                let line = line_of(text, p.span());
                (p.into_inner(), line)
            }
            None => (toml::Table::new(), line_of(text, span)),
        };
        let params = parse_params(kind, table)
            .map_err(|e| invalid(params_line, "params", e.message().to_string()))?;
        validate(&params).map_err(|(key, message)| invalid(params_line, key, message))?;
        out.push(Scenario {
            name,
            kind,
            seed: raw.seed,
            study: raw.study,
            params,
        });
    }
    Ok(out)
}
