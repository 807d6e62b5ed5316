//! Time stepping: the positivity-preserving exponential scheme for
//! `(J, A, E)`, exact price transitions, and two Euler-type reference
//! steppers.

use std::fmt;

use crate::error::{param, Error, Result};
use crate::model::{clamp_band, jump_phi, validate_params, ModelParams, Population, PriceKind, PriceParams, StateVec};
use crate::noise::{CellDraws, JumpEvent, NoiseSource, SeedSpec, StreamNoise};

/// Largest exponent passed to `exp` in the lognormal factors.
const MAX_EXPONENT: f64 = 700.0;

/// Uniform grid `t_k = k T / N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub t_end: f64,
    pub n_steps: usize,
}

impl GridSpec {
    pub fn new(t_end: f64, n_steps: usize) -> Result<Self> {
        if !(t_end > 0.0 && t_end.is_finite()) || n_steps == 0 {
            return Err(param(format!("grid needs T > 0 and N >= 1, got T = {t_end}, N = {n_steps}")));
        }
        Ok(Self { t_end, n_steps })
    }

    /// Grid whose step also satisfies the positivity condition for `params`.
    pub fn for_params(t_end: f64, n_steps: usize, params: &ModelParams) -> Result<Self> {
        let grid = Self::new(t_end, n_steps)?;
        let check = validate_dt(params, grid.dt());
        if !check.valid {
            return Err(Error::TimeStep {
                dt: grid.dt(),
                slack: check.slack,
            });
        }
        Ok(grid)
    }

    /// Grid with step at most `dt_max`.
    pub fn with_max_step(t_end: f64, dt_max: f64) -> Result<Self> {
        if !(dt_max > 0.0) {
            return Err(param(format!("time step {dt_max} must be positive")));
        }
        Self::new(t_end, ((t_end / dt_max) - 1e-9).ceil().max(1.0) as usize)
    }

    #[inline]
    pub fn dt(&self) -> f64 {
        self.t_end / self.n_steps as f64
    }

    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        self.t_end * k as f64 / self.n_steps as f64
    }

    /// Index of `η(t)`, the last grid point strictly before `t` (0 for `t <= 0`).
    pub fn eta_index(&self, t: f64) -> usize {
        if t <= 0.0 {
            return 0;
        }
        let k = (t / self.dt()).ceil() as usize;
        k.saturating_sub(1).min(self.n_steps)
    }

    pub fn eta(&self, t: f64) -> f64 {
        self.time(self.eta_index(t))
    }

    /// `δ(t) = t − η(t)`.
    pub fn delta(&self, t: f64) -> f64 {
        t - self.eta(t)
    }

    /// Grid index nearest to `t`, clamped to the grid.
    pub fn nearest_index(&self, t: f64) -> usize {
        ((t / self.dt()).round().max(0.0) as usize).min(self.n_steps)
    }
}

/// Outcome of the positivity check on a time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtCheck {
    pub valid: bool,
    /// `1 − (sup κ_J ∨ sup κ_A) dt`.
    pub slack: f64,
}

/// `1 − (sup κ_J ∨ sup κ_A) dt ≥ 0`.
pub fn validate_dt(params: &ModelParams, dt: f64) -> DtCheck {
    let (kj, ka) = params.eco.loss_rate_sups();
    let slack = 1.0 - kj.max(ka) * dt;
    DtCheck {
        valid: dt > 0.0 && slack >= 0.0,
        slack,
    }
}

/// `exp(−σ² dt / 2 + σ ΔW)` with the exponent saturated.
#[inline]
pub fn lognormal_factor(sigma: f64, dt: f64, dw: f64) -> f64 {
    let x = -0.5 * sigma * sigma * dt + sigma * dw;
    x.min(MAX_EXPONENT).exp()
}

/// Exponential step of the biomass pair over one cell.
///
/// All coefficients are frozen at `prev`. A jump mark, when present, applies
/// to both populations.
#[inline]
pub fn step_biomass(params: &ModelParams, prev: &StateVec, dt: f64, dw_j: f64, dw_a: f64, mark: Option<f64>) -> (f64, f64) {
    let eco = &params.eco;
    let (kj, ka) = eco.loss_rate_pair(prev.e, prev.p);
    let rho_j = eco.recruitment_rate(prev.j, prev.a, prev.e, prev.p);
    let mut j = (prev.j + dt * (rho_j * prev.a - kj * prev.j)) * lognormal_factor(eco.sigma_j, dt, dw_j);
    let mut a = (prev.a + dt * (eco.rho_a * prev.j - ka * prev.a)) * lognormal_factor(eco.sigma_a, dt, dw_a);
    if let Some(z) = mark {
        j += jump_phi(Population::Juvenile, prev.j, z, &params.jumps);
        a += jump_phi(Population::Adult, prev.a, z, &params.jumps);
    }
    (j, a)
}

/// Truncated Euler step of the compliance fraction; the result lies in `[dt, 1 − dt]`.
#[inline]
pub fn step_compliance(params: &ModelParams, prev: &StateVec, dt: f64, dw_e: f64) -> f64 {
    let e = prev.e;
    let raw = e + params.compliance_drift(prev) * dt + params.compliance.sigma_e * (e * (1.0 - e)).max(0.0).sqrt() * dw_e;
    clamp_band(dt, raw)
}

/// Exact-in-law price transition. Never negative.
#[inline]
pub fn step_price(prev: f64, dt: f64, dw_p: f64, pp: &PriceParams) -> f64 {
    match pp.kind {
        PriceKind::Constant => prev,
        PriceKind::GeometricBrownian => {
            let x = (pp.mu - 0.5 * pp.sigma_p * pp.sigma_p) * dt + pp.sigma_p * dw_p;
            prev * x.min(MAX_EXPONENT).exp()
        }
        PriceKind::ExpOrnsteinUhlenbeck => {
            if prev <= 0.0 {
                return 0.0;
            }
            let m = pp.theta.ln();
            let x = prev.ln();
            let (decay, scale) = if pp.kappa_p > 0.0 {
                let d = (-pp.kappa_p * dt).exp();
                (d, ((1.0 - d * d) / (2.0 * pp.kappa_p * dt)).sqrt())
            } else {
                (1.0, 1.0)
            };
            // dw_p / sqrt(dt) is standard normal; `scale` turns it into the OU innovation.
            let next = m + (x - m) * decay + pp.sigma_p * scale * dw_p;
            next.min(MAX_EXPONENT).exp()
        }
    }
}

/// One cell of the exponential scheme; the price is stepped last.
#[inline]
pub fn step_exponential(params: &ModelParams, prev: &StateVec, dt: f64, draws: &CellDraws) -> StateVec {
    let mark = draws.jump.map(|c| c.mark);
    let (j, a) = step_biomass(params, prev, dt, draws.dw[0], draws.dw[1], mark);
    let e = step_compliance(params, prev, dt, draws.dw[2]);
    let p = step_price(prev.p, dt, draws.dw[3], &params.price);
    StateVec { j, a, e, p }
}

#[inline]
fn euler_like(params: &ModelParams, prev: &StateVec, dt: f64, draws: &CellDraws, clamp_k: impl Fn(f64) -> f64, clamp_e: impl Fn(f64) -> f64) -> StateVec {
    let eco = &params.eco;
    let (kj, ka) = eco.loss_rate_pair(prev.e, prev.p);
    let rho_j = eco.recruitment_rate(prev.j, prev.a, prev.e, prev.p);
    let (jc, ac, ec) = (clamp_k(prev.j), clamp_k(prev.a), clamp_e(prev.e));
    let (b0, b1) = params.compliance_rate_pair(prev);
    let mark = draws.jump.map(|c| c.mark);

    let mut j = prev.j + (rho_j * ac - kj * jc) * dt + eco.sigma_j * prev.j * draws.dw[0];
    let mut a = prev.a + (eco.rho_a * jc - ka * ac) * dt + eco.sigma_a * prev.a * draws.dw[1];
    if let Some(z) = mark {
        j += jump_phi(Population::Juvenile, prev.j, z, &params.jumps);
        a += jump_phi(Population::Adult, prev.a, z, &params.jumps);
    }
    let e = prev.e + (b1 * (1.0 - ec) - b0 * ec) * dt + params.compliance.sigma_e * (ec * (1.0 - ec)).max(0.0).sqrt() * draws.dw[2];
    let p = step_price(prev.p, dt, draws.dw[3], &params.price);
    StateVec { j, a, e, p }
}

/// Euler–Maruyama step of the `δ`-truncated system: biomass enters the
/// drift through `Ψ_{1−1/δ}` (a clamp to `[0, 1/δ]`) and `E` enters the
/// compliance coefficients through `Ψ_δ`.
pub fn step_truncated(delta: f64, params: &ModelParams, prev: &StateVec, dt: f64, draws: &CellDraws) -> Result<StateVec> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(param(format!("truncation level {delta} outside (0, 1/2)")));
    }
    let lo = 1.0 - 1.0 / delta;
    Ok(euler_like(params, prev, dt, draws, |x| clamp_band(lo, x), |e| clamp_band(delta, e)))
}

/// Plain Euler–Maruyama step of the untruncated system.
pub fn step_euler(params: &ModelParams, prev: &StateVec, dt: f64, draws: &CellDraws) -> StateVec {
    euler_like(params, prev, dt, draws, |x| x, |e| e)
}

/// Which stepper produced a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SchemeTag {
    #[default]
    Exponential,
    DeltaTruncated,
    EulerReference,
    Ibm,
}

impl SchemeTag {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeTag::Exponential => "exponential",
            SchemeTag::DeltaTruncated => "delta-truncated",
            SchemeTag::EulerReference => "euler-reference",
            SchemeTag::Ibm => "ibm",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "exponential" => Some(SchemeTag::Exponential),
            "delta-truncated" => Some(SchemeTag::DeltaTruncated),
            "euler-reference" => Some(SchemeTag::EulerReference),
            "ibm" => Some(SchemeTag::Ibm),
            _ => None,
        }
    }
}

impl fmt::Display for SchemeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Run-level options of the path simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub scheme: SchemeTag,
    /// Truncation level for [`SchemeTag::DeltaTruncated`].
    pub truncation: f64,
    /// Extraction is switched off on cells starting before this time.
    pub burn_in: f64,
    /// Keep every `record_stride`-th grid state.
    pub record_stride: usize,
}

impl SimOptions {
    pub fn with_stride(self, record_stride: usize) -> Self {
        Self { record_stride, ..self }
    }
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            scheme: SchemeTag::Exponential,
            truncation: 0.01,
            burn_in: 0.0,
            record_stride: 1,
        }
    }
}

/// One discretized trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub grid: GridSpec,
    pub record_stride: usize,
    /// States at grid indices `0, stride, 2 stride, …, N`.
    pub states: Vec<StateVec>,
    pub jumps: Vec<JumpEvent>,
    pub seed: SeedSpec,
    pub scheme: SchemeTag,
}

impl PathRecord {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.states.len()).map(move |i| self.grid.time(i * self.record_stride))
    }

    pub fn final_state(&self) -> StateVec {
        *self.states.last().expect("paths hold at least the initial state")
    }

    /// Index into `states` of the recorded point nearest to `t`.
    pub fn nearest_record(&self, t: f64) -> usize {
        let k = self.grid.nearest_index(t);
        ((k as f64 / self.record_stride as f64).round() as usize).min(self.states.len() - 1)
    }
}

/// A validated simulator for one parameter set and grid.
#[derive(Debug, Clone)]
pub struct Simulator {
    params: ModelParams,
    burn_in_params: ModelParams,
    grid: GridSpec,
    opts: SimOptions,
}

impl Simulator {
    /// Validate parameters, time step and options once.
    pub fn new(params: &ModelParams, grid: GridSpec, opts: SimOptions) -> Result<Self> {
        let report = validate_params(params);
        if !report.passed() {
            let failed: Vec<&str> = report.failures().map(|c| c.id).collect();
            return Err(param(format!("parameter validation failed: {}\n{report}", failed.join(", "))));
        }
        Self::new_unvalidated(params, grid, opts)
    }

    /// Like [`Simulator::new`] but without the assumption checks on the
    /// parameters; the time-step and option checks still apply. Used for
    /// degenerate systems such as noise-free limits.
    pub fn new_unvalidated(params: &ModelParams, grid: GridSpec, opts: SimOptions) -> Result<Self> {
        let dt = grid.dt();
        let check = validate_dt(params, dt);
        if !check.valid {
            return Err(Error::TimeStep { dt, slack: check.slack });
        }
        if opts.scheme == SchemeTag::Exponential && dt >= 0.5 {
            return Err(param(format!("time step {dt} must be below 1/2 for the compliance cut-off")));
        }
        if opts.scheme == SchemeTag::DeltaTruncated && !(opts.truncation > 0.0 && opts.truncation < 0.5) {
            return Err(param(format!("truncation level {} outside (0, 1/2)", opts.truncation)));
        }
        if opts.scheme == SchemeTag::Ibm {
            return Err(param("the path simulator does not run the individual-based chain"));
        }
        if opts.record_stride == 0 || grid.n_steps % opts.record_stride != 0 {
            return Err(param(format!(
                "record stride {} must divide the step count {}",
                opts.record_stride, grid.n_steps
            )));
        }
        Ok(Self {
            params: params.clone(),
            burn_in_params: params.without_extraction(),
            grid,
            opts,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn options(&self) -> SimOptions {
        self.opts
    }

    /// Initial state as the scheme sees it: for the exponential scheme `E`
    /// is moved into the cut-off band `[dt, 1 − dt]`.
    pub fn prepare_initial(&self, x0: &StateVec) -> Result<StateVec> {
        x0.check()?;
        let mut x = *x0;
        if self.opts.scheme == SchemeTag::Exponential {
            x.e = clamp_band(self.grid.dt(), x.e);
        }
        Ok(x)
    }

    /// Step the whole grid, calling `observe(k, state)` at every grid index.
    pub fn run_observed(&self, x0: &StateVec, noise: &mut impl NoiseSource, mut observe: impl FnMut(usize, &StateVec), jumps: &mut Vec<JumpEvent>) -> Result<StateVec> {
        let mut x = self.prepare_initial(x0)?;
        let dt = self.grid.dt();
        observe(0, &x);
        for k in 0..self.grid.n_steps {
            let t = self.grid.time(k);
            let params = if t < self.opts.burn_in { &self.burn_in_params } else { &self.params };
            let draws = noise.cell(k, dt);
            if let Some(c) = draws.jump {
                jumps.push(JumpEvent { time: t + c.offset, mark: c.mark });
            }
            x = match self.opts.scheme {
                SchemeTag::Exponential => step_exponential(params, &x, dt, &draws),
                SchemeTag::DeltaTruncated => step_truncated(self.opts.truncation, params, &x, dt, &draws)?,
                _ => step_euler(params, &x, dt, &draws),
            };
            observe(k + 1, &x);
        }
        Ok(x)
    }

    /// Simulate with the given noise and record the thinned path.
    pub fn run_with(&self, x0: &StateVec, noise: &mut impl NoiseSource, seed: SeedSpec) -> Result<PathRecord> {
        let stride = self.opts.record_stride;
        let mut states = Vec::with_capacity(self.grid.n_steps / stride + 1);
        let mut jumps = Vec::new();
        self.run_observed(
            x0,
            noise,
            |k, x| {
                if k % stride == 0 {
                    states.push(*x);
                }
            },
            &mut jumps,
        )?;
        Ok(PathRecord {
            grid: self.grid,
            record_stride: stride,
            states,
            jumps,
            seed,
            scheme: self.opts.scheme,
        })
    }

    /// Simulate with the seeded per-component streams.
    pub fn run(&self, x0: &StateVec, seed: SeedSpec) -> Result<PathRecord> {
        let mut noise = StreamNoise::new(seed, &self.params.jumps);
        self.run_with(x0, &mut noise, seed)
    }
}

/// Simulate one path of the exponential scheme.
pub fn simulate_path(params: &ModelParams, x0: &StateVec, grid: GridSpec, seed: SeedSpec) -> Result<PathRecord> {
    Simulator::new(params, grid, SimOptions::default())?.run(x0, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{drift_vector, ComplianceParams, EcologicalParams, Gain, JumpParams, MarkDist, RateFamily};
    use crate::noise::{CellJump, NoNoise};
    use crate::presets;

    fn zero_params() -> ModelParams {
        ModelParams {
            eco: EcologicalParams {
                r_j: RateFamily::zero(),
                k: 100.0,
                rho_a: 0.0,
                m_j: 0.0,
                m_a: 0.0,
                f_j: RateFamily::zero(),
                f_a: RateFamily::zero(),
                sigma_j: 0.0,
                sigma_a: 0.0,
            },
            compliance: ComplianceParams {
                beta0_bar: 0.0,
                beta1_bar: 0.0,
                tau_u: 0.0,
                sigma_e: 0.0,
                eta_sig: 0.0,
                p_min: 0.0,
                p_max: 0.0,
                subsidy: 0.0,
            },
            jumps: JumpParams::none(100.0),
            price: PriceParams::constant(50.0),
        }
    }

    #[test]
    fn validate_dt_examples() {
        let mut p = zero_params();
        assert!(validate_dt(&p, 1e6).valid);
        p.eco.m_j = 2.0;
        let bad = validate_dt(&p, 0.6);
        assert!(!bad.valid);
        assert!((bad.slack + 0.2).abs() < 1e-12);
        let edge = validate_dt(&p, 0.5);
        assert!(edge.valid);
        assert_eq!(edge.slack, 0.0);
    }

    #[test]
    fn grid_eta_and_delta() {
        let g = GridSpec::new(1.0, 10).unwrap();
        assert_eq!(g.eta_index(0.35), 3);
        assert_eq!(g.eta_index(0.4), 3);
        assert!((g.delta(0.4) - 0.1).abs() < 1e-12);
        assert_eq!(g.time(10), 1.0);
        assert!(GridSpec::new(0.0, 10).is_err());
    }

    #[test]
    fn zero_parameters_leave_state_unchanged() {
        let p = zero_params();
        let x = StateVec::new(3.0, 4.0, 0.4, 50.0);
        let (j, a) = step_biomass(&p, &x, 0.1, 0.0, 0.0, None);
        assert_eq!((j, a), (3.0, 4.0));
        assert_eq!(step_compliance(&p, &x, 0.1, 0.0), 0.4);
    }

    #[test]
    fn frozen_drift_step_by_hand() {
        let mut p = zero_params();
        p.eco.m_j = 0.5;
        let x = StateVec::new(10.0, 0.0, 0.5, 50.0);
        let (j, _) = step_biomass(&p, &x, 0.1, 0.0, 0.0, None);
        assert!((j - 9.5).abs() < 1e-12);
    }

    #[test]
    fn worst_jump_keeps_biomass_positive() {
        let mut p = zero_params();
        p.jumps = JumpParams {
            lambda: 1.0,
            marks: MarkDist::dirac(-1.0),
            gain_j: Gain::linear(0.9),
            gain_a: Gain::linear(0.9),
            eps1: 1.0,
            eps2: 0.1,
            cap: 100.0,
        };
        let x = StateVec::new(100.0, 100.0, 0.5, 50.0);
        let (j, a) = step_biomass(&p, &x, 0.1, 0.0, 0.0, Some(-1.0));
        assert!(j > 0.0 && a > 0.0);
        assert!((j - (100.0 - 0.9 * 99.0)).abs() < 1e-9);
    }

    #[test]
    fn compliance_step_examples() {
        let mut p = zero_params();
        p.compliance.beta1_bar = 1.0;
        let x = StateVec::new(1.0, 1.0, 0.5, 50.0);
        assert!((step_compliance(&p, &x, 0.1, 0.0) - 0.55).abs() < 1e-12);
        p.compliance.sigma_e = 0.5;
        assert_eq!(step_compliance(&p, &x, 0.1, 1e6), 0.9);
        assert_eq!(step_compliance(&p, &x, 0.1, -1e6), 0.1);
    }

    #[test]
    fn price_step_examples() {
        let pp = PriceParams::gbm(100.0, 0.0, 0.0);
        assert_eq!(step_price(100.0, 1.0, 0.7, &pp), 100.0);
        let pp = PriceParams::gbm(100.0, 0.04, 0.0);
        let p1 = step_price(100.0, 1.0, 0.0, &pp);
        assert!((p1 - 100.0 * 0.04f64.exp()).abs() < 1e-12);
        assert!((p1 - 104.081).abs() < 1e-3);
        assert_eq!(step_price(7.0, 1.0, 3.0, &PriceParams::constant(7.0)), 7.0);
        let ou = PriceParams {
            kind: PriceKind::ExpOrnsteinUhlenbeck,
            mu: 0.0,
            sigma_p: 0.0,
            theta: 50.0,
            kappa_p: 1.0,
            p0: 100.0,
        };
        let next = step_price(100.0, 1.0, 0.0, &ou);
        let oracle = (50f64.ln() + (100f64.ln() - 50f64.ln()) * (-1.0f64).exp()).exp();
        assert!((next - oracle).abs() < 1e-9);
        assert_eq!(step_price(0.0, 1.0, 1.0, &ou), 0.0);
    }

    #[test]
    fn truncated_matches_euler_in_safe_region() {
        let p = presets::dynamic_compliance().params;
        let delta = 0.01;
        let draws = CellDraws {
            dw: [0.05, -0.03, 0.02, 0.01],
            jump: Some(CellJump { offset: 0.01, mark: 1.0 }),
        };
        for x in [StateVec::new(10.0, 20.0, 0.5, 120.0), StateVec::new(0.03, 49.0, 0.021, 80.0)] {
            let a = step_truncated(delta, &p, &x, 0.05, &draws).unwrap();
            let b = step_euler(&p, &x, 0.05, &draws);
            assert!((a.j - b.j).abs() <= 1e-14 * (1.0 + b.j.abs()));
            assert!((a.a - b.a).abs() <= 1e-14 * (1.0 + b.a.abs()));
            assert!((a.e - b.e).abs() <= 1e-14);
        }
    }

    #[test]
    fn truncated_clamps_outside_safe_region() {
        let mut p = zero_params();
        p.compliance.sigma_e = 1.0;
        let delta = 0.1;
        let draws = CellDraws {
            dw: [0.0, 0.0, 1.0, 0.0],
            jump: None,
        };
        let x = StateVec::new(1.0, 1.0, 0.0, 50.0);
        let next = step_truncated(delta, &p, &x, 0.01, &draws).unwrap();
        assert!((next.e - (0.1f64 * 0.9).sqrt()).abs() < 1e-12);

        p.eco.m_j = 2.0;
        let x = StateVec::new(50.0, 0.0, 0.5, 50.0);
        let next = step_truncated(delta, &p, &x, 0.01, &CellDraws::default()).unwrap();
        assert!((next.j - (50.0 - 2.0 * 10.0 * 0.01)).abs() < 1e-12);
        assert!(step_truncated(0.5, &p, &x, 0.01, &CellDraws::default()).is_err());
    }

    #[test]
    fn constant_path_without_dynamics() {
        let p = zero_params();
        let grid = GridSpec::new(5.0, 50).unwrap();
        let x0 = StateVec::new(3.0, 4.0, 0.4, 50.0);
        let sim = Simulator::new_unvalidated(&p, grid, SimOptions::default()).unwrap();
        let path = sim.run(&x0, SeedSpec::new(1, 0)).unwrap();
        assert_eq!(path.states.len(), 51);
        assert!(path.states.iter().all(|s| *s == x0));
    }

    #[test]
    fn same_seed_same_path() {
        let s = presets::dynamic_compliance();
        let grid = GridSpec::new(10.0, 200).unwrap();
        let a = simulate_path(&s.params, &s.initial_state(), grid, SeedSpec::new(5, 3)).unwrap();
        let b = simulate_path(&s.params, &s.initial_state(), grid, SeedSpec::new(5, 3)).unwrap();
        assert_eq!(a, b);
        let c = simulate_path(&s.params, &s.initial_state(), grid, SeedSpec::new(5, 4)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn refuses_bad_inputs() {
        let s = presets::dynamic_compliance();
        let grid = GridSpec::new(10.0, 5).unwrap();
        assert!(matches!(simulate_path(&s.params, &s.initial_state(), grid, SeedSpec::default()), Err(Error::TimeStep { .. })));
        let grid = GridSpec::new(10.0, 200).unwrap();
        let bad = StateVec::new(-1.0, 1.0, 0.5, 1.0);
        assert!(simulate_path(&s.params, &bad, grid, SeedSpec::default()).is_err());
        let mut p = s.params.clone();
        p.compliance.sigma_e = 10.0;
        assert!(simulate_path(&p, &s.initial_state(), grid, SeedSpec::default()).is_err());
    }

    fn rk4(params: &ModelParams, x0: StateVec, t_end: f64, n: usize) -> Vec<StateVec> {
        let h = t_end / n as f64;
        let f = |x: &StateVec| drift_vector(x, params).unwrap();
        let add = |x: &StateVec, k: &[f64; 4], s: f64| StateVec::new(x.j + s * k[0], x.a + s * k[1], x.e + s * k[2], x.p + s * k[3]);
        let mut out = vec![x0];
        let mut x = x0;
        for _ in 0..n {
            let k1 = f(&x);
            let k2 = f(&add(&x, &k1, h / 2.0));
            let k3 = f(&add(&x, &k2, h / 2.0));
            let k4 = f(&add(&x, &k3, h));
            for i in 0..4 {
                let inc = h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                match i {
                    0 => x.j += inc,
                    1 => x.a += inc,
                    2 => x.e += inc,
                    _ => x.p += inc,
                }
            }
            out.push(x);
        }
        out
    }

    fn sup_gap(params: &ModelParams, x0: StateVec, t_end: f64, n: usize) -> f64 {
        let grid = GridSpec::new(t_end, n).unwrap();
        let sim = Simulator::new(params, grid, SimOptions::default()).unwrap();
        let path = sim.run_with(&x0, &mut NoNoise, SeedSpec::default()).unwrap();
        let fine = 64;
        let reference = rk4(params, x0, t_end, n * fine);
        path.states
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let r = reference[k * fine];
                (s.j - r.j).abs().max((s.a - r.a).abs()).max((s.e - r.e).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn noise_free_scheme_is_first_order() {
        let mut p = presets::dynamic_compliance().params;
        p.eco.sigma_j = 0.0;
        p.eco.sigma_a = 0.0;
        p.compliance.sigma_e = 0.0;
        p.jumps.lambda = 0.0;
        p.price = PriceParams::constant(p.price.p0);
        let x0 = StateVec::new(10.0, 20.0, 0.5, p.price.p0);
        let g1 = sup_gap(&p, x0, 5.0, 100);
        let g2 = sup_gap(&p, x0, 5.0, 200);
        let g3 = sup_gap(&p, x0, 5.0, 400);
        assert!(g1 < 1.0, "{g1}");
        for ratio in [g1 / g2, g2 / g3] {
            assert!((1.6..=2.4).contains(&ratio), "{g1} {g2} {g3}");
        }
    }

    #[test]
    fn burn_in_switches_off_extraction() {
        let mut p = zero_params();
        p.eco.f_a = RateFamily::constant(0.5);
        let grid = GridSpec::new(2.0, 20).unwrap();
        let opts = SimOptions {
            burn_in: 1.0,
            ..SimOptions::default()
        };
        let sim = Simulator::new_unvalidated(&p, grid, opts).unwrap();
        let path = sim.run_with(&StateVec::new(0.0, 10.0, 0.5, 50.0), &mut NoNoise, SeedSpec::default()).unwrap();
        assert_eq!(path.states[10].a, 10.0);
        assert!(path.states[20].a < 10.0);
    }

    #[test]
    fn stride_thins_records() {
        let s = presets::dynamic_compliance();
        let grid = GridSpec::new(10.0, 200).unwrap();
        let opts = SimOptions {
            record_stride: 20,
            ..SimOptions::default()
        };
        let thin = Simulator::new(&s.params, grid, opts).unwrap().run(&s.initial_state(), SeedSpec::new(1, 1)).unwrap();
        let full = simulate_path(&s.params, &s.initial_state(), grid, SeedSpec::new(1, 1)).unwrap();
        assert_eq!(thin.states.len(), 11);
        for (i, st) in thin.states.iter().enumerate() {
            assert_eq!(*st, full.states[20 * i]);
        }
        assert_eq!(thin.times().last(), Some(10.0));
        let bad = SimOptions {
            record_stride: 7,
            ..SimOptions::default()
        };
        assert!(Simulator::new(&s.params, grid, bad).is_err());
    }
}
