use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use schur_besov::{Exponent, SearchBudget};
use schur_besov_cli::config::{
    BesovNormParams, BesovTarget, Corollary32Params, FmParams, FunctionSpec, GridSpec, KernelSpec,
    Lemma36Params, MikhlinParams, NormName, SchurVerifyParams, SpaceSpec, SymbolSpec, YoungParams,
};
use schur_besov_cli::{
    emit_report, parse_config, run_scenarios, Format, Kind, RunDefaults, Scenario, ScenarioParams,
};

#[derive(Parser)]
#[command(
    name = "schur-besov",
    version,
    about = "Schur-test and Fourier-multiplier verification runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Seed for scenarios that do not set their own.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::JsonLines)]
    format: FormatArg,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Number of scenarios run concurrently.
    #[arg(long, global = true, default_value_t = 1)]
    parallel: usize,
    /// Spatial dimension of torus grids.
    #[arg(long, global = true, default_value_t = 1)]
    grid_n: usize,
    /// Grid points per axis.
    #[arg(long, global = true, default_value_t = 64)]
    grid_points: usize,
    /// Grid period.
    #[arg(long, global = true, default_value_t = 16.0)]
    period: f64,
    /// Include per-scenario wall-clock time (output is then not reproducible).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    JsonLines,
    Csv,
    PlotData,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Euclidean,
    Ell1,
    Ellinf,
}

impl From<NormArg> for NormName {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Euclidean => NormName::Euclidean,
            NormArg::Ell1 => NormName::Ell1,
            NormArg::Ellinf => NormName::Ellinf,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SymbolArg {
    Identity,
    ScalarDecay,
    Block,
}

#[derive(Args)]
struct SymbolOpts {
    #[arg(long, value_enum, default_value_t = SymbolArg::ScalarDecay)]
    symbol: SymbolArg,
    /// Decay exponent of scalar-decay and block symbols.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Block index of the block symbol.
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, value_enum, default_value_t = NormArg::Euclidean)]
    norm: NormArg,
}

impl SymbolOpts {
    fn spec(&self) -> SymbolSpec {
        let space = SpaceSpec {
            dim: self.dim,
            norm: self.norm.into(),
        };
        match self.symbol {
            SymbolArg::Identity => SymbolSpec::Identity { space },
            SymbolArg::ScalarDecay => SymbolSpec::ScalarDecay {
                beta: self.beta,
                space,
            },
            SymbolArg::Block => SymbolSpec::Block {
                k: self.k,
                beta: self.beta,
            },
        }
    }
}

#[derive(Args)]
struct MultiplierExponents {
    #[arg(long, default_value_t = 2.0)]
    u: f64,
    #[arg(long, default_value = "1")]
    q: Exponent,
    #[arg(long, default_value = "2")]
    p: Exponent,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario of a config file.
    Run { config: PathBuf },
    /// Schur bound against the power-iteration norm of a random kernel.
    SchurVerify {
        #[arg(long, default_value_t = 2.0)]
        theta: f64,
        #[arg(long, default_value = "1")]
        q: Exponent,
        #[arg(long, default_value_t = 8)]
        points: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, value_enum, default_value_t = NormArg::Euclidean)]
        norm: NormArg,
    },
    /// Young's inequality for a circulant kernel (`--g`) or a torus decay kernel.
    YoungCheck {
        #[arg(long, default_value_t = 2.0)]
        theta: f64,
        #[arg(long, default_value = "1")]
        q: Exponent,
        /// Circulant generator, comma separated; omit for the torus decay kernel.
        #[arg(long, value_delimiter = ',')]
        g: Option<Vec<f64>>,
        #[arg(long, default_value_t = 2.0)]
        beta: f64,
    },
    /// Besov norm of a block wavelet or decay function.
    BesovNorm {
        #[arg(long, default_value_t = 0.0)]
        s: f64,
        #[arg(long, default_value = "2")]
        q: Exponent,
        #[arg(long, default_value = "inf")]
        r: Exponent,
        /// Block index; omit for the decay function `(1+|x|^2)^(-beta/2)`.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 2.0)]
        beta: f64,
    },
    /// Empirical multiplier norm against `M_u(m)` (or `max_k M_u(phi_k m)` with `--s`).
    FmCheck {
        #[command(flatten)]
        symbol: SymbolOpts,
        #[command(flatten)]
        exponents: MultiplierExponents,
        /// Besov smoothness; selects the Besov-to-Besov check.
        #[arg(long)]
        s: Option<f64>,
        #[arg(long, default_value = "inf")]
        r: Exponent,
    },
    /// Derivative-decay constant of a symbol.
    MikhlinCheck {
        #[command(flatten)]
        symbol: SymbolOpts,
        #[command(flatten)]
        exponents: MultiplierExponents,
    },
    /// Rescaled-annulus `L_theta` constants of a symbol.
    Lemma36Check {
        #[command(flatten)]
        symbol: SymbolOpts,
        #[command(flatten)]
        exponents: MultiplierExponents,
        #[arg(long, default_value = "inf")]
        theta: Exponent,
    },
    /// Inverse-transform ratios over band-limited samples.
    Corollary32Check {
        #[arg(long, default_value_t = 2.0)]
        u: f64,
        #[arg(long, default_value_t = 2.0)]
        theta: f64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
}

fn single(kind: Kind, params: ScenarioParams) -> Vec<Scenario> {
    vec![Scenario {
        name: kind.as_str().to_string(),
        kind,
        seed: None,
        study: None,
        params,
    }]
}

fn scenarios(command: Command) -> Result<Vec<Scenario>, String> {
    let grid = GridSpec::default();
    let budget = SearchBudget::default();
    Ok(match command {
        Command::Run { config } => {
            let text =
                fs::read_to_string(&config).map_err(|e| format!("{}: {e}", config.display()))?;
            parse_config(&text).map_err(|e| format!("{}: {e}", config.display()))?
        }
        Command::SchurVerify {
            theta,
            q,
            points,
            dim,
            norm,
        } => {
            let space = SpaceSpec {
                dim,
                norm: norm.into(),
            };
            single(
                Kind::SchurVerify,
                ScenarioParams::SchurVerify(SchurVerifyParams {
                    theta,
                    q,
                    kernel: KernelSpec::RandomGaussian {
                        domain_points: points,
                        codomain_points: points,
                        source: space,
                        target: space,
                    },
                    budget,
                }),
            )
        }
        Command::YoungCheck { theta, q, g, beta } => {
            let kernel = match g {
                Some(g) => KernelSpec::Circulant { g },
                None => KernelSpec::ScalarDecay { beta },
            };
            single(
                Kind::YoungCheck,
                ScenarioParams::YoungCheck(YoungParams {
                    theta,
                    q,
                    kernel,
                    grid,
                    budget,
                }),
            )
        }
        Command::BesovNorm { s, q, r, k, beta } => {
            let function = match k {
                Some(k) => FunctionSpec::Block { k },
                None => FunctionSpec::ScalarDecay { beta },
            };
            single(
                Kind::BesovNorm,
                ScenarioParams::BesovNorm(BesovNormParams {
                    s,
                    q,
                    r,
                    function,
                    grid,
                }),
            )
        }
        Command::FmCheck {
            symbol,
            exponents,
            s,
            r,
        } => single(
            Kind::FmCheck,
            ScenarioParams::FmCheck(FmParams {
                u: exponents.u,
                q: exponents.q,
                p: exponents.p,
                symbol: symbol.spec(),
                besov: s.map(|s| BesovTarget { s, r }),
                dilation_depth: 4,
                grid,
                budget,
            }),
        ),
        Command::MikhlinCheck { symbol, exponents } => single(
            Kind::MikhlinCheck,
            ScenarioParams::MikhlinCheck(MikhlinParams {
                u: exponents.u,
                q: exponents.q,
                p: exponents.p,
                symbol: symbol.spec(),
                grid,
            }),
        ),
        Command::Lemma36Check {
            symbol,
            exponents,
            theta,
        } => single(
            Kind::Lemma36Check,
            ScenarioParams::Lemma36Check(Lemma36Params {
                u: exponents.u,
                q: exponents.q,
                p: exponents.p,
                theta,
                symbol: symbol.spec(),
                grid,
            }),
        ),
        Command::Corollary32Check { u, theta, samples } => single(
            Kind::Corollary32Check,
            ScenarioParams::Corollary32Check(Corollary32Params {
                u,
                theta,
                samples,
                grid,
            }),
        ),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = cli.global;
    let list = match scenarios(cli.command) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let defaults = RunDefaults {
        seed: g.seed,
        grid_n: g.grid_n,
        grid_points: g.grid_points,
        period: g.period,
        timing: g.timing,
    };
    let reports = run_scenarios(&list, g.parallel, &defaults);
    let format = match g.format {
        FormatArg::JsonLines => Format::JsonLines,
        FormatArg::Csv => Format::Csv,
        FormatArg::PlotData => Format::PlotData,
    };
    let bytes = match emit_report(&reports, format) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let written = match &g.out {
        Some(path) => fs::write(path, &bytes).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    for r in reports.iter().filter(|r| !r.pass) {
        eprintln!(
            "FAIL {}: {}",
            r.name,
            r.error.as_deref().unwrap_or("bound violated")
        );
    }
    if reports.iter().all(|r| r.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
