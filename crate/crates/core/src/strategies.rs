//! The four solution strategies and the shared seed selection.
//!
//! S1 and S2 solve stationarity systems with Newton's method, on the joint
//! `(x, sigma)` system and on the dual residual alone. S3 maximizes the dual
//! inside `G > 0`. S4 minimizes the primal from the dual-recovered point.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dual::{
    certificate_of, dual_point, eval_dual, jacobian_xs, residual_dual, residual_xs, Certificate, Classification,
    DualPoint,
};
use crate::error::{check_len, Error, Result};
use crate::model::PolynomialProblem;
use crate::numerics::{SpectralFactor, PSD_TOL};
use crate::solvers::{
    barrier_maximize_dual, bfgs_minimize, default_mu_schedule, newton_solve, Gradient, Jacobian, SolverConfig,
    Termination,
};
use crate::matrix::SymMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    S1,
    S2,
    S3,
    S4,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::S1, Strategy::S2, Strategy::S3, Strategy::S4];
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::S1 => "s1",
            Strategy::S2 => "s2",
            Strategy::S3 => "s3",
            Strategy::S4 => "s4",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s1" | "1" => Ok(Strategy::S1),
            "s2" | "2" => Ok(Strategy::S2),
            "s3" | "3" => Ok(Strategy::S3),
            "s4" | "4" => Ok(Strategy::S4),
            _ => Err(Error::Parse(format!("unknown strategy {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SigmaSeed {
    Auto,
    Given(DVector<f64>),
}

/// Shift applied to the recovered primal start (S4 only).
#[derive(Debug, Clone, PartialEq)]
pub enum Translation {
    None,
    /// Adds the same scalar to every coordinate.
    Offset(f64),
    Vector(DVector<f64>),
    /// Adds `scale * N(0, 1)` draws from a ChaCha8 stream seeded with `seed`.
    Gaussian { seed: u64, scale: f64 },
}

impl Translation {
    pub fn vector(&self, n: usize) -> Result<DVector<f64>> {
        match self {
            Translation::None => Ok(DVector::zeros(n)),
            Translation::Offset(t) => Ok(DVector::from_element(n, *t)),
            Translation::Vector(v) => {
                check_len(n, v.len())?;
                Ok(v.clone())
            }
            Translation::Gaussian { seed, scale } => {
                let normal = Normal::new(0.0, *scale)
                    .map_err(|e| Error::InvalidConfig(format!("gaussian translation: {e}")))?;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok(DVector::from_iterator(n, (0..n).map(|_| normal.sample(&mut rng))))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyConfig {
    pub strategy: Strategy,
    pub sigma0: SigmaSeed,
    pub translation: Translation,
    /// Initial barrier weight for S3. `Some(0.0)` runs plain BFGS on `-P^d`
    /// with steps leaving `G > 0` rejected; `None` uses 1.
    pub penalty: Option<f64>,
    pub solver: SolverConfig,
    /// Required `lambda_min(G)` for automatic seed selection.
    pub auto_margin: f64,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig {
            strategy: Strategy::S1,
            sigma0: SigmaSeed::Auto,
            translation: Translation::None,
            penalty: None,
            solver: SolverConfig::default(),
            auto_margin: 0.1,
        }
    }
}

impl StrategyConfig {
    pub fn new(strategy: Strategy) -> Self {
        StrategyConfig { strategy, ..Default::default() }
    }

    pub fn with_sigma0(mut self, sigma0: DVector<f64>) -> Self {
        self.sigma0 = SigmaSeed::Given(sigma0);
        self
    }

    pub fn with_translation(mut self, translation: Translation) -> Self {
        self.translation = translation;
        self
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub strategy: Strategy,
    pub x_star: DVector<f64>,
    pub sigma_star: DVector<f64>,
    pub p_value: f64,
    pub pd_value: f64,
    pub gap: f64,
    pub certificate: Certificate,
    pub iterations: usize,
    pub wall_time: Duration,
    pub termination: Termination,
    pub sigma0: DVector<f64>,
    pub x0: DVector<f64>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.termination.is_converged()
    }
}

const MAX_T: f64 = 1e6;

fn lambda_min_along(p: &PolynomialProblem, d: &DVector<f64>, t: f64) -> Result<f64> {
    let sigma = d * t;
    let g = SymMatrix::combination(p.q(), sigma.iter().zip(p.measures()).map(|(&s, m)| (s, m.a())));
    Ok(SpectralFactor::new(&g)?.lambda_min())
}

/// Seed `t d` with `d_k = sign(trace A_k)` (zero as +1) and the smallest
/// `t >= 0` found by doubling then bisection with `lambda_min(G) >= margin`.
///
/// When no `t <= 1e6` reaches the margin (a structurally singular `G`), the
/// first `t` in `1, 2, 4, ...` with `G >= 0` is returned instead.
pub fn select_sigma0(p: &PolynomialProblem, margin: f64) -> Result<DVector<f64>> {
    let d = DVector::from_iterator(
        p.num_measures(),
        p.measures().iter().map(|m| if m.a().trace() < 0.0 { -1.0 } else { 1.0 }),
    );
    let lam = |t: f64| lambda_min_along(p, &d, t);
    if lam(0.0)? >= margin {
        return Ok(DVector::zeros(d.len()));
    }
    let mut hi = 1.0;
    while hi <= MAX_T {
        if lam(hi)? >= margin {
            let mut lo = hi / 2.0;
            if hi == 1.0 {
                lo = 0.0;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if lam(mid)? >= margin {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(d * hi);
        }
        hi *= 2.0;
    }
    let mut t = 1.0;
    while t <= MAX_T {
        let l = lam(t)?;
        if l >= -PSD_TOL * lambda_max_along(p, &d, t)?.abs().max(1.0) {
            return Ok(d * t);
        }
        t *= 2.0;
    }
    Err(Error::NoFeasibleSigma { margin })
}

fn lambda_max_along(p: &PolynomialProblem, d: &DVector<f64>, t: f64) -> Result<f64> {
    let sigma = d * t;
    let g = SymMatrix::combination(p.q(), sigma.iter().zip(p.measures()).map(|(&s, m)| (s, m.a())));
    Ok(SpectralFactor::new(&g)?.lambda_max())
}

fn resolve_sigma0(p: &PolynomialProblem, cfg: &StrategyConfig) -> Result<DVector<f64>> {
    match &cfg.sigma0 {
        SigmaSeed::Auto => select_sigma0(p, cfg.auto_margin),
        SigmaSeed::Given(s) => {
            check_len(p.num_measures(), s.len())?;
            Ok(s.clone())
        }
    }
}

fn require_psd(dp: &DualPoint) -> Result<()> {
    if !dp.factor.is_psd(PSD_TOL) {
        return Err(Error::SeedNotAdmissible("seed needs G(sigma0) >= 0"));
    }
    Ok(())
}

/// The dual residual is only well posed where `G` is invertible on the range
/// that matters, i.e. `F` lies in `Col(G)` and `G` is nonsingular.
fn require_regular(dp: &DualPoint) -> Result<()> {
    if dp.classification == Classification::Infeasible || dp.is_singular() {
        return Err(Error::SingularDual);
    }
    Ok(())
}

struct Outcome {
    x0: DVector<f64>,
    x: DVector<f64>,
    sigma: DVector<f64>,
    iterations: usize,
    termination: Termination,
}

fn assemble(p: &PolynomialProblem, strategy: Strategy, sigma0: DVector<f64>, o: Outcome, start: Instant) -> Result<SolveReport> {
    let p_value = p.eval_primal(&o.x)?;
    let dp = dual_point(p, &o.sigma)?;
    let pd_value = eval_dual(p, &o.sigma)?;
    let certificate = certificate_of(p, &dp);
    Ok(SolveReport {
        strategy,
        x_star: o.x,
        sigma_star: o.sigma,
        p_value,
        pd_value,
        gap: (p_value - pd_value).abs(),
        certificate,
        iterations: o.iterations,
        wall_time: start.elapsed(),
        termination: o.termination,
        sigma0,
        x0: o.x0,
    })
}

fn nan_on_error(r: Result<DVector<f64>>, len: usize) -> DVector<f64> {
    r.unwrap_or_else(|_| DVector::from_element(len, f64::NAN))
}

/// Newton on the joint system `G x = F`, `Lambda(x) = sigma / alpha`.
pub fn strategy1(p: &PolynomialProblem, cfg: &StrategyConfig) -> Result<SolveReport> {
    let start = Instant::now();
    let sigma0 = resolve_sigma0(p, cfg)?;
    let dp0 = dual_point(p, &sigma0)?;
    require_psd(&dp0)?;
    let (n, m) = (p.dim(), p.num_measures());
    let z0 = DVector::from_iterator(n + m, dp0.x.iter().chain(sigma0.iter()).copied());
    let split = |z: &DVector<f64>| (z.rows(0, n).into_owned(), z.rows(n, m).into_owned());
    let residual = |z: &DVector<f64>| {
        let (x, s) = split(z);
        nan_on_error(residual_xs(p, &x, &s), n + m)
    };
    let jacobian = |z: &DVector<f64>| {
        let (x, s) = split(z);
        jacobian_xs(p, &x, &s).unwrap_or_else(|_| nalgebra::DMatrix::from_element(n + m, n + m, f64::NAN))
    };
    let (z, trace) = newton_solve(&residual, Jacobian::Analytic(&jacobian), &z0, &cfg.solver)?;
    let (x, sigma) = split(&z);
    let outcome = Outcome { x0: dp0.x.clone(), x, sigma, iterations: trace.iterations(), termination: trace.termination };
    assemble(p, Strategy::S1, sigma0, outcome, start)
}

/// Newton on the dual stationarity residual, finite-difference Jacobian.
pub fn strategy2(p: &PolynomialProblem, cfg: &StrategyConfig) -> Result<SolveReport> {
    let start = Instant::now();
    let sigma0 = resolve_sigma0(p, cfg)?;
    let dp0 = dual_point(p, &sigma0)?;
    require_psd(&dp0)?;
    require_regular(&dp0)?;
    let m = p.num_measures();
    let residual = |s: &DVector<f64>| nan_on_error(residual_dual(p, s), m);
    let (sigma, trace) = newton_solve(&residual, Jacobian::FiniteDifference, &sigma0, &cfg.solver)?;
    let dp = dual_point(p, &sigma)?;
    require_regular(&dp)?;
    let outcome = Outcome { x0: dp0.x.clone(), x: dp.x.clone(), sigma, iterations: trace.iterations(), termination: trace.termination };
    assemble(p, Strategy::S2, sigma0, outcome, start)
}

/// Dual maximization inside `G > 0`, barrier-weighted unless `penalty` is 0.
pub fn strategy3(p: &PolynomialProblem, cfg: &StrategyConfig) -> Result<SolveReport> {
    let start = Instant::now();
    let sigma0 = resolve_sigma0(p, cfg)?;
    let dp0 = dual_point(p, &sigma0)?;
    require_regular(&dp0)?;
    let mu0 = cfg.penalty.unwrap_or(1.0);
    let schedule = if mu0 > 0.0 { default_mu_schedule(mu0) } else { Vec::new() };
    let (sigma, trace) = barrier_maximize_dual(p, &sigma0, &schedule, &cfg.solver)?;
    let dp = dual_point(p, &sigma)?;
    require_regular(&dp)?;
    if dp.classification != Classification::InteriorPlus {
        return Err(Error::FeasibleConeLost);
    }
    let outcome = Outcome { x0: dp0.x.clone(), x: dp.x.clone(), sigma, iterations: trace.iterations(), termination: trace.termination };
    assemble(p, Strategy::S3, sigma0, outcome, start)
}

/// BFGS on the primal from `G^+ F` at the seed, plus the configured translation.
/// The dual side of the report is `sigma = alpha o Lambda(x*)`.
pub fn strategy4(p: &PolynomialProblem, cfg: &StrategyConfig) -> Result<SolveReport> {
    let start = Instant::now();
    let sigma0 = resolve_sigma0(p, cfg)?;
    let dp0 = dual_point(p, &sigma0)?;
    require_psd(&dp0)?;
    let x0 = &dp0.x + cfg.translation.vector(p.dim())?;
    let value = |x: &DVector<f64>| p.eval_primal(x).unwrap_or(f64::NAN);
    let grad = |x: &DVector<f64>| nan_on_error(p.grad_primal(x), x.len());
    let (x, trace) = bfgs_minimize(&value, Gradient::Analytic(&grad), &x0, &cfg.solver)?;
    let sigma = p.duality_map(&p.eval_measure(&x)?)?;
    let outcome = Outcome { x0, x, sigma, iterations: trace.iterations(), termination: trace.termination };
    assemble(p, Strategy::S4, sigma0, outcome, start)
}

pub fn solve(p: &PolynomialProblem, cfg: &StrategyConfig) -> Result<SolveReport> {
    match cfg.strategy {
        Strategy::S1 => strategy1(p, cfg),
        Strategy::S2 => strategy2(p, cfg),
        Strategy::S3 => strategy3(p, cfg),
        Strategy::S4 => strategy4(p, cfg),
    }
}
