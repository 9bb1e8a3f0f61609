//! Argument grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rmf_lab::bounds::VarianceMode;
use rmf_lab::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse::<Mode>().map_err(|e| e.to_string())
}

fn parse_variance(s: &str) -> Result<VarianceMode, String> {
    s.parse::<VarianceMode>().map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "rmf-lab", version, about = "Numerical laboratory for random multiplicative functions")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Master seed; drawn from OS entropy when omitted and always echoed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "RMF_LAB_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Write results here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// `key=value` file of flag defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Prime cache file (RMFPRIM1 format), read when it covers the request.
    #[arg(long, global = true)]
    pub prime_cache: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    #[command(subcommand)]
    Sieve(SieveCmd),
    /// Prime signs and values of f for one trial.
    Sample(SampleArgs),
    #[command(subcommand)]
    Series(SeriesCmd),
    #[command(subcommand)]
    Oracle(OracleCmd),
    #[command(subcommand)]
    Mc(McCmd),
    #[command(subcommand)]
    Nt(NtCmd),
    #[command(subcommand)]
    Bounds(BoundsCmd),
}

#[derive(Debug, Subcommand)]
pub enum SieveCmd {
    /// Primes up to N.
    Primes {
        #[arg(long)]
        n: u64,
    },
    /// Factorization signature of n.
    Signature {
        #[arg(long)]
        n: u64,
    },
    /// Sieved signatures of [lo, hi].
    Block {
        #[arg(long)]
        lo: u64,
        #[arg(long)]
        hi: u64,
    },
}

#[derive(Debug, Args)]
pub struct TrialArgs {
    #[arg(long, default_value_t = 0)]
    pub trial: u64,
    #[arg(long, default_value = "squarefree", value_parser = parse_mode)]
    pub mode: Mode,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long = "nmax")]
    pub n_max: u64,
    #[command(flatten)]
    pub trial: TrialArgs,
}

#[derive(Debug, Subcommand)]
pub enum SeriesCmd {
    /// Partial sums S(y) at checkpoints.
    Trajectory {
        #[arg(long)]
        sigma: f64,
        #[arg(long = "nmax")]
        n_max: u64,
        #[arg(long, default_value_t = 1)]
        stride: u64,
        /// Positivity is checked on (x, N] when the stride is 1.
        #[arg(long, default_value_t = 1)]
        x: u64,
        #[command(flatten)]
        trial: TrialArgs,
    },
    /// Truncated Euler product and prime sum.
    Euler {
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        p: u64,
        #[command(flatten)]
        trial: TrialArgs,
    },
    /// Decomposition of the log Euler product.
    Logdecomp {
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
}

#[derive(Debug, Args)]
pub struct CoeffArgs {
    /// `reciprocal`, `ones`, or a list `n:a,...` with integer, fraction or decimal `a`.
    #[arg(long, default_value = "reciprocal")]
    pub coeffs: String,
    #[arg(long = "nmax")]
    pub n_max: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum OracleCmd {
    /// Exact probability that S(y) > 0 on (x, N].
    Positivity {
        #[arg(long = "nmax")]
        n_max: u64,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 1)]
        x: u64,
        #[arg(long, default_value = "squarefree", value_parser = parse_mode)]
        mode: Mode,
    },
    /// Exact E|Σ a(n) f(n)|^m and the signed moment.
    Moment {
        #[command(flatten)]
        coeffs: CoeffArgs,
        #[arg(long)]
        m: u32,
    },
}

#[derive(Debug, Subcommand)]
pub enum McCmd {
    /// Fraction of trials with S(y) > 0 on (x, N].
    Positivity {
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 1)]
        x: u64,
        #[arg(long = "nmax")]
        n_max: u64,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value = "squarefree", value_parser = parse_mode)]
        mode: Mode,
        #[arg(long, default_value_t = 0.99)]
        level: f64,
        /// Per-trial CSV `trial,passed,indeterminate`.
        #[arg(long)]
        trial_dump: Option<PathBuf>,
    },
    /// Sample mean of |Σ a(n) f(n)|^m.
    Moment {
        #[command(flatten)]
        coeffs: CoeffArgs,
        #[arg(long)]
        m: f64,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = 0.99)]
        level: f64,
    },
    /// Empirical P(Σ_{p≤P} f(p) p^{-σ} ≥ λ).
    PrimeTail {
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = 0.99)]
        level: f64,
    },
    /// Sign changes of S(y) on [1, N] per trial.
    SignChanges {
        #[arg(long)]
        sigma: f64,
        #[arg(long = "nmax")]
        n_max: u64,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value = "squarefree", value_parser = parse_mode)]
        mode: Mode,
    },
}

#[derive(Debug, Subcommand)]
pub enum NtCmd {
    /// Σ_{n≤x} μ²(n)(m−1)^ω(n) on grids of x and m.
    Tsum {
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<u64>,
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<f64>,
    },
    /// Weighted tail Σ_{n>x} with certified remainder.
    Tail {
        #[arg(long)]
        x: u64,
        #[arg(long)]
        m: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        cutoff: Option<u64>,
    },
    /// Σ_{p≤x} 1/p.
    Mertens {
        #[arg(long)]
        x: u64,
    },
    /// (m−1)θ(x) against c2 (m−1) x.
    Chebyshev {
        #[arg(long)]
        x: u64,
        #[arg(long, default_value_t = 2.0)]
        m: f64,
        #[arg(long, default_value_t = rmf_lab::nt::DEFAULT_CHEBYSHEV_C2)]
        c2: f64,
    },
    /// Riemann zeta at real s > 1.
    Zeta {
        #[arg(long)]
        s: f64,
    },
    /// Prime zeta function at real s > 1.
    Primezeta {
        #[arg(long)]
        s: f64,
    },
    /// Empirical witnesses (c3, c5) on a grid.
    FitLemma31 {
        #[arg(long, value_delimiter = ',', default_value = "100,1000,10000,100000,1000000")]
        x_grid: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "3,5,10")]
        m_grid: Vec<f64>,
    },
}

#[derive(Debug, Args)]
pub struct RegimeArgs {
    #[arg(long, required_unless_present = "log_x")]
    pub sigma: Option<f64>,
    /// Give log x directly instead of σ.
    #[arg(long, conflicts_with = "sigma")]
    pub log_x: Option<f64>,
    #[arg(long)]
    pub theta: f64,
    #[arg(long)]
    pub delta: f64,
}

#[derive(Debug, Subcommand)]
pub enum BoundsCmd {
    Theorem1(RegimeArgs),
    Corollary(RegimeArgs),
    Hoeffding {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value = "exact", value_parser = parse_variance)]
        variance: VarianceMode,
    },
    BhRhs {
        #[command(flatten)]
        coeffs: CoeffArgs,
        #[arg(long)]
        m: f64,
    },
    Maximal {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        m: f64,
        #[arg(long)]
        x: u64,
        #[arg(long)]
        sigma: f64,
        /// Defaults to the optimized κ at this m.
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        cutoff: Option<u64>,
    },
    Billingsley {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        theta_param: f64,
    },
    Kappa {
        #[arg(long)]
        m: f64,
        /// Also evaluate κ at this θ.
        #[arg(long)]
        theta_param: Option<f64>,
    },
    Lambda(RegimeArgs),
    Epsilon {
        #[arg(long, default_value_t = 1.0)]
        c9: f64,
        #[arg(long, default_value_t = 1.0)]
        c10: f64,
        #[arg(long, default_value_t = 1.0)]
        c11: f64,
        #[arg(long)]
        theta: f64,
    },
    Lemma41 {
        #[command(flatten)]
        regime: RegimeArgs,
        /// Defaults to the λ threshold of the regime.
        #[arg(long, allow_hyphen_values = true)]
        log_lambda: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        c9: f64,
        #[arg(long, default_value_t = 1.0)]
        c10: f64,
        #[arg(long, default_value_t = 1.0)]
        c11: f64,
    },
    AngeloXu {
        #[arg(long)]
        log_x: f64,
        #[arg(long)]
        beta_prime: f64,
    },
    Compare {
        #[arg(long, value_delimiter = ',', default_value = "10,100,1000,10000")]
        log_x_grid: Vec<f64>,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        beta_prime: f64,
    },
}
