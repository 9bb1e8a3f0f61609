//! One handler per subcommand.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use rmf_lab::bounds::{self, BoundReport, VarianceMode};
use rmf_lab::montecarlo::{self, PositivityParams};
use rmf_lab::oracle::{self, ExactCoeffs};
use rmf_lab::sampler::{FTable, SignAssignment};
use rmf_lab::series::{self, Positivity, WeightTable};
use rmf_lab::stats::csv_float;
use rmf_lab::summation::CompensatedSum;
use rmf_lab::{nt, sieve, zeta, Error, PrimeList};

use crate::cli::*;
use crate::record::ResultRecord;

#[derive(Debug)]
pub enum CmdError {
    Domain(Error),
    Usage(String),
    Io(String),
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        CmdError::Domain(e)
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Io(e.to_string())
    }
}

pub type CmdResult<T> = std::result::Result<T, CmdError>;

/// A table emitted verbatim in CSV mode.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Table {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

#[derive(Debug, Default)]
pub struct Output {
    pub records: Vec<ResultRecord>,
    pub table: Option<Table>,
}

impl Output {
    fn one(r: ResultRecord) -> Output {
        Output { records: vec![r], table: None }
    }

    fn with_table(mut self, t: Table) -> Output {
        self.table = Some(t);
        self
    }
}

pub struct Ctx<'a> {
    pub seed: u64,
    pub command: String,
    pub prime_cache: Option<&'a Path>,
}

impl Ctx<'_> {
    fn record(&self) -> ResultRecord {
        ResultRecord::new(&self.command, self.seed)
    }

    fn primes(&self, n: u64) -> CmdResult<Arc<PrimeList>> {
        Ok(Arc::new(match self.prime_cache {
            Some(p) => sieve::primes_up_to_cached(n, p)?,
            None => sieve::primes_up_to(n),
        }))
    }
}

fn rational_str(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn rational_val(r: ResultRecord, key: &str, q: &BigRational) -> ResultRecord {
    r.value(key, rational_str(q)).value(&format!("{key}_f64"), q.to_f64().unwrap_or(f64::NAN))
}

fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    let bad = || format!("cannot parse coefficient {s:?}");
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.trim_start().starts_with('-');
        let int = int.trim_start_matches(['-', '+']);
        let digits: BigInt = format!("{}{}", if int.is_empty() { "0" } else { int }, frac).parse().map_err(|_| bad())?;
        let q = BigRational::new(digits, num_traits::pow(BigInt::from(10), frac.len()));
        return Ok(if neg { -q } else { q });
    }
    Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?))
}

/// Exact coefficients and the universe size they live on.
fn parse_coeffs(args: &CoeffArgs) -> CmdResult<(ExactCoeffs, u64)> {
    let named = |f: fn(u64) -> BigRational| -> CmdResult<(ExactCoeffs, u64)> {
        let n = args.n_max.ok_or_else(|| CmdError::Usage(format!("--nmax is required with --coeffs {}", args.coeffs)))?;
        Ok(((1..=n).map(|k| (k, f(k))).collect(), n))
    };
    match args.coeffs.as_str() {
        "reciprocal" => named(|k| BigRational::new(1.into(), k.into())),
        "ones" => named(|_| BigRational::from_integer(1.into())),
        list => {
            let mut c = ExactCoeffs::new();
            for item in list.split(',').filter(|s| !s.trim().is_empty()) {
                let (n, a) = item.split_once(':').ok_or_else(|| CmdError::Usage(format!("expected n:a, got {item:?}")))?;
                let n: u64 = n.trim().parse().map_err(|_| CmdError::Usage(format!("bad index in {item:?}")))?;
                if n == 0 {
                    return Err(CmdError::Usage("coefficient indices start at 1".into()));
                }
                c.insert(n, parse_rational(a).map_err(CmdError::Usage)?);
            }
            let top = c.keys().next_back().copied().unwrap_or(1);
            let n = args.n_max.unwrap_or(top);
            if n < top {
                return Err(CmdError::Usage(format!("--nmax {n} is below the largest index {top}")));
            }
            Ok((c, n))
        }
    }
}

fn float_coeffs(c: &ExactCoeffs) -> Vec<(u64, f64)> {
    c.iter().map(|(&n, a)| (n, a.to_f64().unwrap_or(f64::NAN))).collect()
}

fn bound_record(ctx: &Ctx, b: &BoundReport) -> ResultRecord {
    let mut r = ctx
        .record()
        .value("name", b.name.as_str())
        .value("value", b.value)
        .value("log_value", b.log_value)
        .value("underflow", b.underflow)
        .value("overflow", b.overflow);
    for (k, v) in b.inputs.iter().chain(&b.extra) {
        r.set(k, *v);
    }
    r
}

fn bounds_table(rows: &[BoundReport]) -> CmdResult<Table> {
    let mut buf = Vec::new();
    bounds::write_bounds_csv(rows, &mut buf)?;
    csv_to_table(&buf)
}

fn csv_to_table(buf: &[u8]) -> CmdResult<Table> {
    let mut rd = csv::Reader::from_reader(buf);
    let header = rd.headers().map_err(|e| CmdError::Io(e.to_string()))?.iter().map(str::to_string).collect();
    let rows = rd
        .records()
        .map(|r| r.map(|r| r.iter().map(str::to_string).collect()))
        .collect::<Result<_, _>>()
        .map_err(|e| CmdError::Io(e.to_string()))?;
    Ok(Table { header, rows })
}

fn regime(a: &RegimeArgs) -> CmdResult<bounds::RegimeParams> {
    Ok(match (a.sigma, a.log_x) {
        (_, Some(lx)) => bounds::regime_from_log_x(lx, a.theta, a.delta)?,
        (Some(s), None) => bounds::regime_from_sigma(s, a.theta, a.delta)?,
        (None, None) => return Err(CmdError::Usage("one of --sigma or --log-x is required".into())),
    })
}

fn positivity_vals(r: ResultRecord, p: &Positivity) -> ResultRecord {
    match *p {
        Positivity::Positive => r.value("positivity", "positive"),
        Positivity::Negative { y } => r.value("positivity", "negative").value("positivity_y", y),
        Positivity::Indeterminate { y } => r.value("positivity", "indeterminate").value("positivity_y", y),
    }
}

pub fn execute(cmd: &Command, ctx: &Ctx) -> CmdResult<Output> {
    match cmd {
        Command::Sieve(c) => sieve_cmd(c, ctx),
        Command::Sample(a) => sample_cmd(a, ctx),
        Command::Series(c) => series_cmd(c, ctx),
        Command::Oracle(c) => oracle_cmd(c, ctx),
        Command::Mc(c) => mc_cmd(c, ctx),
        Command::Nt(c) => nt_cmd(c, ctx),
        Command::Bounds(c) => bounds_cmd(c, ctx),
    }
}

fn sieve_cmd(c: &SieveCmd, ctx: &Ctx) -> CmdResult<Output> {
    match *c {
        SieveCmd::Primes { n } => {
            let primes = ctx.primes(n)?;
            let mut t = Table::new(&["p"]);
            for p in primes.primes() {
                t.push(vec![p.to_string()]);
            }
            let r = ctx.record().value("count", primes.len()).value("largest", primes.primes().last().copied().unwrap_or(0));
            Ok(Output::one(r).with_table(t))
        }
        SieveCmd::Signature { n } => {
            let s = sieve::arith_signature(n)?;
            let r = ctx
                .record()
                .value("n", n)
                .value("squarefree", s.is_squarefree)
                .value("omega", s.omega)
                .value("primes", s.distinct_primes.clone())
                .value("exponents", s.exponents.iter().map(|&e| e as u64).collect::<Vec<_>>());
            Ok(Output::one(r))
        }
        SieveCmd::Block { lo, hi } => {
            let base = ctx.primes(sieve::isqrt(hi))?;
            let blocks = sieve::sieve_range(lo, hi, sieve::DEFAULT_BLOCK_SIZE, &base)?;
            let mut t = Table::new(&["n", "squarefree", "omega", "primes", "exponents"]);
            let mut hist = vec![0u64; 16];
            let mut squarefree = 0u64;
            for b in &blocks {
                for n in b.lo()..=b.hi() {
                    let sf = b.is_squarefree(n);
                    squarefree += sf as u64;
                    hist[b.omega(n) as usize] += 1;
                    let join = |v: Vec<String>| v.join(";");
                    t.push(vec![
                        n.to_string(),
                        (sf as u8).to_string(),
                        b.omega(n).to_string(),
                        join(b.primes_of(n).iter().map(u64::to_string).collect()),
                        join(b.exponents_of(n).iter().map(u8::to_string).collect()),
                    ]);
                }
            }
            while hist.len() > 1 && hist[hist.len() - 1] == 0 {
                hist.pop();
            }
            let r = ctx
                .record()
                .value("count", hi - lo + 1)
                .value("squarefree", squarefree)
                .value("omega_histogram", hist);
            Ok(Output::one(r).with_table(t))
        }
    }
}

fn sample_cmd(a: &SampleArgs, ctx: &Ctx) -> CmdResult<Output> {
    let primes = ctx.primes(a.n_max)?;
    let s = SignAssignment::sample_with_primes(ctx.seed, a.trial.trial, primes, a.trial.mode);
    let f = s.stream_f(1, a.n_max.max(1))?;
    let mut t = Table::new(&["n", "f"]);
    let mut counts = [0u64; 3];
    for (i, v) in f.iter().enumerate() {
        counts[(v.get() + 1) as usize] += 1;
        t.push(vec![(i + 1).to_string(), v.get().to_string()]);
    }
    let negative = (0..s.primes().len()).filter(|&r| s.is_negative_rank(r)).count();
    let head: Vec<i64> = (0..s.primes().len().min(100)).map(|r| s.sign_by_rank(r) as i64).collect();
    let r = ctx
        .record()
        .value("primes", s.primes().len())
        .value("negative_primes", negative)
        .value("f_plus", counts[2])
        .value("f_minus", counts[0])
        .value("f_zero", counts[1])
        .value("prime_signs_head", head);
    Ok(Output::one(r).with_table(t))
}

fn series_cmd(c: &SeriesCmd, ctx: &Ctx) -> CmdResult<Output> {
    match c {
        SeriesCmd::Trajectory { sigma, n_max, stride, x, trial } => {
            let a = SignAssignment::sample_with_primes(ctx.seed, trial.trial, ctx.primes(*n_max)?, trial.mode);
            let tr = series::partial_sum_trajectory(&a, *sigma, *n_max, *stride)?;
            let mut buf = Vec::new();
            tr.write_csv(&mut buf)?;
            let min = tr.checkpoints.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
            let mut r = ctx
                .record()
                .value("final_value", tr.checkpoints.last().map_or(0.0, |c| c.value))
                .value("min_value", min)
                .value("summation_error_bound", tr.summation_error_bound)
                .value("checkpoints", tr.checkpoints.len());
            if *stride == 1 {
                r = r.value("sign_changes", montecarlo::sign_changes(&tr)?);
                if *x < *n_max {
                    r = positivity_vals(r, &tr.positivity_check(*x)?);
                }
            }
            Ok(Output::one(r).with_table(csv_to_table(&buf)?))
        }
        SeriesCmd::Euler { sigma, p, trial } => {
            let a = SignAssignment::sample_with_primes(ctx.seed, trial.trial, ctx.primes(*p)?, trial.mode);
            let (ps, err) = series::prime_sum_with_error(&a, *sigma, *p)?;
            let r = ctx
                .record()
                .value("euler_product", series::euler_product_partial(&a, *sigma, *p)?)
                .value("prime_sum", ps)
                .value("prime_sum_error_bound", err);
            Ok(Output::one(r))
        }
        SeriesCmd::Logdecomp { sigma, p, trial } => {
            let a = SignAssignment::sample_with_primes(ctx.seed, *trial, ctx.primes(*p)?, rmf_lab::Mode::SquarefreeMult);
            let d = series::log_decomposition(&a, *sigma, *p)?;
            let r = ctx
                .record()
                .value("prime_sum", d.prime_sum)
                .value("half_log_term", d.half_log_term)
                .value("remainder", d.remainder)
                .value("log_product", d.log_product);
            Ok(Output::one(r))
        }
    }
}

fn oracle_cmd(c: &OracleCmd, ctx: &Ctx) -> CmdResult<Output> {
    match c {
        OracleCmd::Positivity { n_max, sigma, x, mode } => {
            let e = oracle::exact_probability(*n_max, *sigma, *x, *mode)?;
            let r = ctx
                .record()
                .value("probability", e.to_string())
                .value("value", e.to_f64())
                .value("numerator", e.numerator)
                .value("denominator", e.denominator)
                .value("universe_bits", e.universe_bits)
                .value("method", format!("{:?}", e.method).to_lowercase());
            Ok(Output::one(r))
        }
        OracleCmd::Moment { coeffs, m } => {
            let (c, n) = parse_coeffs(coeffs)?;
            let abs = oracle::exact_abs_moment(n, &c, *m)?;
            let signed = if m % 2 == 0 { abs.clone() } else { oracle::exact_moment(n, &c, *m)? };
            let r = rational_val(ctx.record(), "moment", &abs);
            let r = rational_val(r, "signed_moment", &signed).value("universe_bits", sieve::primes_up_to(n).len());
            Ok(Output::one(r))
        }
    }
}

fn mc_cmd(c: &McCmd, ctx: &Ctx) -> CmdResult<Output> {
    match c {
        McCmd::Positivity { sigma, x, n_max, trials, mode, level, trial_dump } => {
            let p = PositivityParams {
                sigma: *sigma,
                x: *x,
                n_max: *n_max,
                trials: *trials,
                master_seed: ctx.seed,
                mode: *mode,
                level: *level,
            };
            let est = montecarlo::mc_positivity(&p)?;
            if let Some(path) = trial_dump {
                dump_trials(&p, path)?;
            }
            let e = est.estimate;
            let r = ctx
                .record()
                .value("estimate", e.estimate)
                .value("trials", e.trials)
                .value("passed", est.passed)
                .value("failed", est.failed)
                .value("indeterminate", est.indeterminate)
                .value("level", e.level)
                .value("warnings", est.warnings.clone())
                .with_ci(e.ci_low, e.ci_high);
            Ok(Output::one(r))
        }
        McCmd::Moment { coeffs, m, trials, level } => {
            let (c, _) = parse_coeffs(coeffs)?;
            let est = montecarlo::mc_moment(&float_coeffs(&c), *m, *trials, ctx.seed, *level)?;
            let e = est.estimate;
            let r = ctx
                .record()
                .value("estimate", e.estimate)
                .value("trials", e.trials)
                .value("std_error", est.std_error)
                .value("excess_kurtosis", est.excess_kurtosis)
                .value("heavy_tailed", est.heavy_tailed)
                .value("level", e.level)
                .with_ci(e.ci_low, e.ci_high);
            Ok(Output::one(r))
        }
        McCmd::PrimeTail { sigma, lambda, p, trials, level } => {
            let e = montecarlo::mc_prime_tail(*sigma, *lambda, *p, *trials, ctx.seed, *level)?;
            let mut r = ctx
                .record()
                .value("estimate", e.estimate)
                .value("trials", e.trials)
                .value("level", e.level)
                .with_ci(e.ci_low, e.ci_high);
            if *sigma > 0.5 && *lambda >= 0.0 {
                r.set("hoeffding_exact", bounds::hoeffding_bound(*lambda, *sigma, VarianceMode::Exact)?.value);
            }
            Ok(Output::one(r))
        }
        McCmd::SignChanges { sigma, n_max, trials, mode } => {
            if *trials == 0 {
                return Err(Error::Domain { op: "mc sign-changes", reason: "trials must be ≥ 1".into() }.into());
            }
            if !(*sigma > 0.0) || *n_max == 0 {
                return Err(Error::Domain { op: "mc sign-changes", reason: "need sigma > 0 and N ≥ 1".into() }.into());
            }
            let table = FTable::new(*n_max, *mode);
            let weights = WeightTable::new(*n_max, *sigma);
            let len = *n_max as usize + 1;
            let counts: Vec<u64> = (0..*trials)
                .into_par_iter()
                .map_init(
                    || (Vec::new(), vec![0i8; len], Vec::with_capacity(len)),
                    |(words, f, values), t| {
                        table.evaluate_trial(ctx.seed, t, words, f);
                        values.clear();
                        let mut acc = CompensatedSum::new();
                        for n in 1..len {
                            match f[n] {
                                0 => {}
                                s => acc.add(s as f64 * weights.weight(n)),
                            }
                            values.push(acc.value());
                        }
                        montecarlo::sign_changes_in(values)
                    },
                )
                .collect();
            let mut t = Table::new(&["trial", "sign_changes"]);
            for (i, c) in counts.iter().enumerate() {
                t.push(vec![i.to_string(), c.to_string()]);
            }
            let total: u64 = counts.iter().sum();
            let r = ctx
                .record()
                .value("trials", *trials)
                .value("mean", total as f64 / *trials as f64)
                .value("max", counts.iter().copied().max().unwrap_or(0))
                .value("min", counts.iter().copied().min().unwrap_or(0))
                .value("none_fraction", counts.iter().filter(|&&c| c == 0).count() as f64 / *trials as f64);
            Ok(Output::one(r).with_table(t))
        }
    }
}

fn dump_trials(p: &PositivityParams, path: &PathBuf) -> CmdResult<()> {
    let outcomes = montecarlo::positivity_trials(p)?;
    let f = File::create(path).map_err(|e| CmdError::Io(format!("{}: {e}", path.display())))?;
    montecarlo::write_trials_csv(&outcomes, BufWriter::new(f))?;
    Ok(())
}

fn margin_row(x: u64, m: f64, sigma: Option<f64>, b: &nt::BoundMargin) -> Vec<String> {
    vec![
        x.to_string(),
        csv_float(m),
        sigma.map(csv_float).unwrap_or_default(),
        csv_float(b.lhs),
        csv_float(b.rhs),
        csv_float(b.ratio),
    ]
}

const GRID_HEADER: &[&str] = &["x", "m", "sigma", "lhs", "rhs", "ratio"];

fn nt_cmd(c: &NtCmd, ctx: &Ctx) -> CmdResult<Output> {
    match c {
        NtCmd::Tsum { x, m } => {
            let recs = nt::t_sums(x, m)?;
            let mut t = Table::new(&["x", "m", "value", "terms"]);
            let mut out = Vec::new();
            for s in &recs {
                t.push(vec![s.x.to_string(), csv_float(s.m), csv_float(s.value), s.terms.to_string()]);
                out.push(ctx.record().value("x", s.x).value("m", s.m).value("value", s.value).value("terms", s.terms));
            }
            Ok(Output { records: out, table: Some(t) })
        }
        NtCmd::Tail { x, m, sigma, cutoff } => {
            let cutoff = cutoff.unwrap_or_else(|| nt::default_tail_cutoff(*x));
            let t = nt::tail_series(*x, *m, *sigma, cutoff)?;
            let r = ctx
                .record()
                .value("partial", t.partial)
                .value("partial_error", t.partial_error)
                .value("remainder_low", 0.0)
                .value("remainder_high", t.remainder)
                .value("lower", t.lower())
                .value("upper", t.upper())
                .value("cutoff", cutoff);
            Ok(Output::one(r))
        }
        NtCmd::Mertens { x } => {
            let mut r = ctx.record().value("value", nt::mertens_sum(*x)?);
            if *x <= 1000 {
                r.set("exact", rational_str(&nt::mertens_sum_exact(*x)?));
            }
            if *x >= 3 {
                r.set("minus_log_log_x", nt::mertens_sum(*x)? - (*x as f64).ln().ln());
            }
            Ok(Output::one(r))
        }
        NtCmd::Chebyshev { x, m, c2 } => {
            let b = nt::chebyshev_sum(*x, *m, *c2)?;
            let (arg, worst) = nt::chebyshev_sweep(*x)?;
            let r = ctx
                .record()
                .value("lhs", b.lhs)
                .value("rhs", b.rhs)
                .value("ratio", b.ratio)
                .value("theta_over_x", b.ratio * c2)
                .value("sweep_max_theta_over_x", worst)
                .value("sweep_argmax", arg);
            let mut t = Table::new(GRID_HEADER);
            t.push(margin_row(*x, *m, None, &b));
            Ok(Output::one(r).with_table(t))
        }
        NtCmd::Zeta { s } => {
            let (v, e) = zeta::zeta_with_error(*s)?;
            Ok(Output::one(ctx.record().value("value", v).value("error_bound", e)))
        }
        NtCmd::Primezeta { s } => {
            let (v, e) = zeta::prime_zeta_with_error(*s)?;
            let mut r = ctx.record().value("value", v).value("error_bound", e);
            // defect against log(1/(σ − ½)) at σ = s/2
            if *s < 3.0 {
                let q = -(0.5 * s - 0.5).ln();
                r.set("log_inv_sigma_minus_half", q);
                r.set("defect", v - q);
                r.set("ratio", v / q);
            }
            Ok(Output::one(r))
        }
        NtCmd::FitLemma31 { x_grid, m_grid } => {
            let fit = nt::fit_lemma31_constants(x_grid, m_grid)?;
            let mut t = Table::new(GRID_HEADER);
            for (s, b) in &fit.points {
                t.push(margin_row(s.x, s.m, None, b));
            }
            let r = ctx
                .record()
                .value("c3", fit.c3)
                .value("c5", fit.c5)
                .value("max_ratio", fit.max_ratio)
                .value("points", fit.points.len());
            Ok(Output::one(r).with_table(t))
        }
    }
}

fn bounds_cmd(c: &BoundsCmd, ctx: &Ctx) -> CmdResult<Output> {
    let single = |b: BoundReport| -> CmdResult<Output> {
        let t = bounds_table(std::slice::from_ref(&b))?;
        Ok(Output::one(bound_record(ctx, &b)).with_table(t))
    };
    match c {
        BoundsCmd::Theorem1(a) => single(bounds::theorem1_lower_bound(&regime(a)?)?),
        BoundsCmd::Corollary(a) => single(bounds::corollary_upper_bound(&regime(a)?)?),
        BoundsCmd::Lambda(a) => single(bounds::lambda_threshold(&regime(a)?)?),
        BoundsCmd::Hoeffding { lambda, sigma, variance } => {
            let b = bounds::hoeffding_bound(*lambda, *sigma, *variance)?;
            let mut r = bound_record(ctx, &b).value("variance", variance.as_str());
            for mode in [VarianceMode::Exact, VarianceMode::Asymptotic] {
                if let Ok(o) = bounds::hoeffding_bound(*lambda, *sigma, mode) {
                    r.set(&format!("{}_value", mode.as_str()), o.value);
                }
            }
            Ok(Output::one(r).with_table(bounds_table(&[b])?))
        }
        BoundsCmd::BhRhs { coeffs, m } => {
            let (c, _) = parse_coeffs(coeffs)?;
            let mut r = ctx.record().value("value", bounds::bh_rhs(&float_coeffs(&c), *m)?);
            if m.fract() == 0.0 && *m >= 2.0 && (*m as u64) % 2 == 0 {
                r = rational_val(r, "exact", &bounds::bh_rhs_exact(&c, *m as u32)?);
            }
            Ok(Output::one(r))
        }
        BoundsCmd::Maximal { lambda, m, x, sigma, kappa, cutoff } => {
            let kappa = match kappa {
                Some(k) => *k,
                None => bounds::optimize_kappa(*m)?.kappa,
            };
            let cutoff = cutoff.unwrap_or_else(|| nt::default_tail_cutoff(*x));
            single(bounds::maximal_bound_with_cutoff(*lambda, *m, *x, *sigma, kappa, cutoff)?)
        }
        BoundsCmd::Billingsley { alpha, beta, theta_param } => {
            let lk = bounds::billingsley_log_constant(*alpha, *beta, *theta_param)?;
            Ok(Output::one(ctx.record().value("value", lk.exp()).value("log_value", lk)))
        }
        BoundsCmd::Kappa { m, theta_param } => {
            let k = bounds::optimize_kappa(*m)?;
            let mut r = ctx
                .record()
                .value("kappa", k.kappa)
                .value("theta_star", k.theta_star)
                .value("log_k", k.log_k)
                .value("theta_min", bounds::kappa_theta_min(*m));
            if let Some(t) = theta_param {
                r.set("kappa_at_theta_param", bounds::kappa_at(*m, *t)?);
            }
            Ok(Output::one(r))
        }
        BoundsCmd::Epsilon { c9, c10, c11, theta } => {
            let e = bounds::optimize_epsilon(*c9, *c10, *c11, *theta)?;
            Ok(Output::one(ctx.record().value("epsilon0", e.epsilon0).value("beta", e.beta).value("c12", e.c12)))
        }
        BoundsCmd::Lemma41 { regime: a, log_lambda, beta, epsilon, c9, c10, c11 } => {
            let r = regime(a)?;
            let log_lambda = match log_lambda {
                Some(l) => *l,
                None => bounds::lambda_threshold(&r)?.log_value,
            };
            let (beta, epsilon) = match (beta, epsilon) {
                (Some(b), Some(e)) => (*b, *e),
                (b, e) => {
                    let opt = bounds::optimize_epsilon(*c9, *c10, *c11, r.theta.min(1.0 - f64::EPSILON))?;
                    (b.unwrap_or(opt.beta), e.unwrap_or(opt.epsilon0))
                }
            };
            single(bounds::lemma41_bound(&r, log_lambda, beta, epsilon)?)
        }
        BoundsCmd::AngeloXu { log_x, beta_prime } => single(bounds::angelo_xu_bound(*log_x, *beta_prime)?),
        BoundsCmd::Compare { log_x_grid, theta, delta, beta_prime } => {
            let rows = bounds::compare_bounds(log_x_grid, *theta, *delta, *beta_prime)?;
            let records = rows.iter().map(|b| bound_record(ctx, b)).collect();
            Ok(Output { records, table: Some(bounds_table(&rows)?) })
        }
    }
}

pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Domain { .. } => "domain",
        Error::InsufficientBase { .. } => "insufficient_base",
        Error::OutOfRange { .. } => "out_of_range",
        Error::EnumerationTooLarge { .. } => "enumeration_too_large",
        Error::Pole { .. } => "pole",
        Error::LogDomain { .. } => "log_domain",
        Error::Divergent(_) => "divergent",
        Error::NoWitness(_) => "no_witness",
        Error::Undecided { .. } => "undecided",
        Error::Io(_) => "io",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("1/3").unwrap(), BigRational::new(1.into(), 3.into()));
        assert_eq!(parse_rational("0.25").unwrap(), BigRational::new(1.into(), 4.into()));
        assert_eq!(parse_rational("-1.5").unwrap(), BigRational::new((-3).into(), 2.into()));
        assert_eq!(parse_rational("7").unwrap(), BigRational::from_integer(7.into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn coefficient_specs() {
        let a = CoeffArgs { coeffs: "1:1,2:1/2,3:1/3".into(), n_max: None };
        let (c, n) = parse_coeffs(&a).unwrap();
        assert_eq!((c.len(), n), (3, 3));
        let a = CoeffArgs { coeffs: "reciprocal".into(), n_max: Some(3) };
        assert_eq!(parse_coeffs(&a).unwrap().0, c);
        assert!(parse_coeffs(&CoeffArgs { coeffs: "ones".into(), n_max: None }).is_err());
        assert!(parse_coeffs(&CoeffArgs { coeffs: "5:1".into(), n_max: Some(3) }).is_err());
    }
}
