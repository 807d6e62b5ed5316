//! Exact event-driven simulation of the n-agent individual-based chain on
//! the complete graph.
//!
//! Biomass is counted in units of `1/n`, and so is the fraction of
//! compliers. With `time_rescale` every rate is multiplied by `n`, which is
//! the clock in which the chain approaches its mean-field limit.

use crate::error::{param, Error, Result};
use crate::model::{activation, clamp_band, ModelParams, StateVec};
use crate::noise::{Component, SeedSpec, Stream};

/// Transition channels, in rate-vector order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IbmEvent {
    /// `(j − 1/n, a + 1/n, e)`
    Maturation,
    /// `(j + 1/n, a, e)`
    Birth,
    /// `(j, a − 1/n, e)`
    AdultDeath,
    /// `(j − 1/n, a, e)`
    JuvenileDeath,
    /// `(j, a, e + 1/n)`
    ComplianceUp,
    /// `(j, a, e − 1/n)`
    ComplianceDown,
}

impl IbmEvent {
    pub const ALL: [IbmEvent; 6] = [
        IbmEvent::Maturation,
        IbmEvent::Birth,
        IbmEvent::AdultDeath,
        IbmEvent::JuvenileDeath,
        IbmEvent::ComplianceUp,
        IbmEvent::ComplianceDown,
    ];
}

/// State of the chain as integer counts; the scaled state is `count / n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IbmState {
    pub n: u64,
    pub juveniles: u64,
    pub adults: u64,
    pub compliers: u64,
}

impl IbmState {
    /// Round a scaled state `(j, a, e)` to the lattice.
    pub fn from_scaled(n: u64, j: f64, a: f64, e: f64) -> Result<Self> {
        if n < 2 {
            return Err(param(format!("agent count {n} must be at least 2")));
        }
        if !(j >= 0.0 && a >= 0.0 && (0.0..=1.0).contains(&e)) {
            return Err(Error::Domain(format!("(j, a, e) = ({j}, {a}, {e})")));
        }
        let nf = n as f64;
        Ok(Self {
            n,
            juveniles: (j * nf).round() as u64,
            adults: (a * nf).round() as u64,
            compliers: ((e * nf).round() as u64).min(n),
        })
    }

    pub fn j(&self) -> f64 {
        self.juveniles as f64 / self.n as f64
    }

    pub fn a(&self) -> f64 {
        self.adults as f64 / self.n as f64
    }

    pub fn e(&self) -> f64 {
        self.compliers as f64 / self.n as f64
    }

    /// Scaled state with price `p`.
    pub fn to_state(&self, p: f64) -> StateVec {
        StateVec::new(self.j(), self.a(), self.e(), p)
    }

    fn apply(&mut self, ev: IbmEvent) {
        match ev {
            IbmEvent::Maturation => {
                self.juveniles -= 1;
                self.adults += 1;
            }
            IbmEvent::Birth => self.juveniles += 1,
            IbmEvent::AdultDeath => self.adults -= 1,
            IbmEvent::JuvenileDeath => self.juveniles -= 1,
            IbmEvent::ComplianceUp => self.compliers += 1,
            IbmEvent::ComplianceDown => self.compliers -= 1,
        }
    }
}

/// Chain configuration. The price is held at `price`.
#[derive(Debug, Clone, PartialEq)]
pub struct IbmConfig {
    pub n: u64,
    pub gamma: f64,
    pub params: ModelParams,
    pub time_rescale: bool,
    pub price: f64,
    pub event_limit: u64,
}

impl IbmConfig {
    pub fn new(n: u64, gamma: f64, params: ModelParams, time_rescale: bool) -> Result<Self> {
        if n < 2 {
            return Err(param(format!("agent count {n} must be at least 2")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(param(format!("resampling rate {gamma} must be non-negative")));
        }
        let price = params.price.p0;
        Ok(Self {
            n,
            gamma,
            params,
            time_rescale,
            price,
            event_limit: 1_000_000_000,
        })
    }
}

/// Rates of the six channels plus whether a mutation probability was clamped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRates {
    pub rates: [f64; 6],
    pub clamped: bool,
}

impl EventRates {
    pub fn total(&self) -> f64 {
        self.rates.iter().sum()
    }
}

/// Price-dependent factors, fixed for the whole run.
#[derive(Debug, Clone, Copy)]
struct PriceTerms {
    /// `1 − I(P_min) + I(P_max)` in `β₀`.
    beta0_price: f64,
    /// `I(P_min)(P + s)` in `β₁`.
    beta1_price: f64,
}

impl PriceTerms {
    fn new(params: &ModelParams, p: f64) -> Self {
        let c = &params.compliance;
        Self {
            beta0_price: 1.0 - activation(c.eta_sig, c.p_min, p) + activation(c.eta_sig, c.p_max, p),
            beta1_price: activation(c.eta_sig, c.p_min, p + c.subsidy),
        }
    }
}

fn rates_with(cfg: &IbmConfig, terms: &PriceTerms, s: &IbmState) -> EventRates {
    let params = &cfg.params;
    let eco = &params.eco;
    let c = &params.compliance;
    let (j, a, e) = (s.j(), s.a(), s.e());
    let p = cfg.price;
    let nf = s.n as f64;

    let (kj, ka) = eco.loss_rate_pair(e, p);
    let rho_j = eco.recruitment_rate(j, a, e, p);
    let fill = clamp_band(0.0, (j + a) / eco.k);
    let beta0 = (fill + terms.beta0_price + 1.0) * c.tau_u * (1.0 - e) + c.beta0_bar;
    let beta1 = (1.0 - fill + terms.beta1_price + 1.0) * c.tau_u * e + c.beta1_bar;

    let q0_raw = beta0 / nf;
    let q1_raw = beta1 / nf;
    let q0 = q0_raw.clamp(0.0, 1.0);
    let q1 = q1_raw.clamp(0.0, 1.0);
    let clamped = q0 != q0_raw || q1 != q1_raw;

    let ne = s.compliers as f64;
    let nn = nf - ne;
    let up = if s.compliers < s.n {
        cfg.gamma * nf * (1.0 - e) * (ne / (nf - 1.0) * (1.0 - q0) + (nn - 1.0) / (nf - 1.0) * q1)
    } else {
        0.0
    };
    let down = if s.compliers > 0 {
        cfg.gamma * nf * e * (nn / (nf - 1.0) * (1.0 - q1) + (ne - 1.0) / (nf - 1.0) * q0)
    } else {
        0.0
    };

    let mut rates = [
        j * eco.rho_a,
        a * rho_j,
        a * ka,
        // Maturation is its own channel, so juveniles die at κ_J − ρ_A.
        j * (kj - eco.rho_a).max(0.0),
        up.max(0.0),
        down.max(0.0),
    ];
    if cfg.time_rescale {
        for r in &mut rates {
            *r *= nf;
        }
    }
    EventRates { rates, clamped }
}

/// Rates of the six transitions from `state`.
pub fn event_rates(state: &IbmState, cfg: &IbmConfig) -> EventRates {
    rates_with(cfg, &PriceTerms::new(&cfg.params, cfg.price), state)
}

/// Outcome of one event-driven step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    Jump {
        holding: f64,
        event: IbmEvent,
        state: IbmState,
    },
    /// Every rate is zero; the chain stays put forever.
    Absorbed,
}

fn pick(rates: &[f64; 6], total: f64, u: f64) -> IbmEvent {
    let target = u * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &r) in rates.iter().enumerate() {
        if r > 0.0 {
            acc += r;
            last = i;
            if target < acc {
                return IbmEvent::ALL[i];
            }
        }
    }
    IbmEvent::ALL[last]
}

/// One exact step: exponential holding time, channel chosen in proportion to
/// its rate.
pub fn gillespie_step(state: &IbmState, cfg: &IbmConfig, stream: &mut Stream) -> StepOutcome {
    let r = event_rates(state, cfg);
    step_from_rates(state, &r.rates, stream)
}

fn step_from_rates(state: &IbmState, rates: &[f64; 6], stream: &mut Stream) -> StepOutcome {
    let total: f64 = rates.iter().sum();
    if !(total > 0.0) {
        return StepOutcome::Absorbed;
    }
    let holding = stream.exponential(total);
    let event = pick(rates, total, stream.uniform());
    let mut next = *state;
    next.apply(event);
    StepOutcome::Jump { holding, event, state: next }
}

/// A chain trajectory sampled on a uniform reporting grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IbmPath {
    pub times: Vec<f64>,
    pub states: Vec<IbmState>,
    /// Cumulative event count at each reporting time.
    pub events: Vec<u64>,
    pub total_events: u64,
    pub clamped: bool,
    pub absorbed: bool,
    /// False if the event budget ran out; `times` then stops early.
    pub complete: bool,
    pub seed: SeedSpec,
}

/// Simulate up to `t_end` and report the state at `report_points + 1`
/// evenly spaced times.
pub fn simulate_ibm(cfg: &IbmConfig, x0: IbmState, t_end: f64, report_points: usize, seed: SeedSpec) -> Result<IbmPath> {
    if x0.n != cfg.n || x0.compliers > x0.n {
        return Err(Error::Domain(format!("initial state does not live on the n = {} lattice", cfg.n)));
    }
    if !(t_end > 0.0) || report_points == 0 {
        return Err(param("reporting grid needs T > 0 and at least one interval"));
    }
    let terms = PriceTerms::new(&cfg.params, cfg.price);
    let mut stream = seed.stream(Component::Events);
    let report_time = |i: usize| t_end * i as f64 / report_points as f64;

    let mut path = IbmPath {
        times: Vec::with_capacity(report_points + 1),
        states: Vec::with_capacity(report_points + 1),
        events: Vec::with_capacity(report_points + 1),
        total_events: 0,
        clamped: false,
        absorbed: false,
        complete: true,
        seed,
    };
    let mut state = x0;
    let mut t = 0.0;
    let mut next_report = 0;
    loop {
        let r = rates_with(cfg, &terms, &state);
        path.clamped |= r.clamped;
        let outcome = step_from_rates(&state, &r.rates, &mut stream);
        let t_next = match outcome {
            StepOutcome::Jump { holding, .. } => t + holding,
            StepOutcome::Absorbed => f64::INFINITY,
        };
        while next_report <= report_points && report_time(next_report) < t_next {
            path.times.push(report_time(next_report));
            path.states.push(state);
            path.events.push(path.total_events);
            next_report += 1;
        }
        match outcome {
            StepOutcome::Absorbed => {
                path.absorbed = true;
                break;
            }
            _ if next_report > report_points => break,
            StepOutcome::Jump { state: s, .. } => {
                if path.total_events >= cfg.event_limit {
                    path.complete = false;
                    break;
                }
                state = s;
                t = t_next;
                path.total_events += 1;
            }
        }
    }
    Ok(path)
}

/// Parameters of the mean-field limit in the rescaled clock: compliance
/// switching scaled by `γ`, compliance noise `√(2γ)`, no environmental
/// noise, no jumps, constant price.
pub fn limit_params(params: &ModelParams, gamma: f64) -> ModelParams {
    let mut limit = params.clone();
    limit.eco.sigma_j = 0.0;
    limit.eco.sigma_a = 0.0;
    limit.jumps.lambda = 0.0;
    limit.compliance = params.compliance.scaled(gamma);
    limit.compliance.sigma_e = (2.0 * gamma).sqrt();
    limit.price = crate::model::PriceParams::constant(params.price.p0);
    limit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RateFamily;
    use crate::presets;

    fn cfg(n: u64, gamma: f64, rescale: bool) -> IbmConfig {
        IbmConfig::new(n, gamma, presets::meanfield().params, rescale).unwrap()
    }

    fn zero_rate_params() -> ModelParams {
        let mut p = presets::meanfield().params;
        p.eco.r_j = RateFamily::zero();
        p.eco.rho_a = 0.0;
        p.eco.m_j = 0.0;
        p.eco.m_a = 0.0;
        p.eco.f_j = RateFamily::zero();
        p.eco.f_a = RateFamily::zero();
        p
    }

    #[test]
    fn empty_system_is_frozen() {
        let c = IbmConfig::new(10, 0.0, zero_rate_params(), true).unwrap();
        let s = IbmState::from_scaled(10, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(event_rates(&s, &c).total(), 0.0);
        let mut stream = SeedSpec::new(1, 0).stream(Component::Events);
        assert_eq!(gillespie_step(&s, &c, &mut stream), StepOutcome::Absorbed);
        let path = simulate_ibm(&c, s, 1.0, 4, SeedSpec::new(1, 0)).unwrap();
        assert!(path.absorbed && path.complete);
        assert_eq!(path.states.len(), 5);
        assert!(path.states.iter().all(|x| *x == s));
    }

    #[test]
    fn no_upward_flips_at_full_compliance() {
        let c = cfg(20, 1.0, false);
        let s = IbmState::from_scaled(20, 0.5, 0.5, 1.0).unwrap();
        let r = event_rates(&s, &c);
        assert_eq!(r.rates[4], 0.0);
        assert!(r.rates[5] > 0.0);
        let s0 = IbmState::from_scaled(20, 0.5, 0.5, 0.0).unwrap();
        assert_eq!(event_rates(&s0, &c).rates[5], 0.0);
    }

    /// Total mass of the transition kernel written out term by term.
    fn kernel_mass(s: &IbmState, c: &IbmConfig) -> f64 {
        let p = &c.params;
        let n = s.n as f64;
        let (j, a, e) = (s.j(), s.a(), s.e());
        let x = s.to_state(c.price);
        let (b0, b1) = p.compliance_rate_pair(&x);
        let rho_j = p.eco.r_j.eval(e, c.price) * (1.0 - (j + a) / p.eco.k).clamp(0.0, 1.0);
        let kappa_a = p.eco.m_a + p.eco.f_a.eval(e, c.price);
        let kappa_j_net = p.eco.m_j + p.eco.f_j.eval(e, c.price);
        let up = n * n * c.gamma * (1.0 - e) * (n * e / (n - 1.0) * (1.0 - b0 / n) + (n * (1.0 - e) - 1.0) / (n - 1.0) * b1 / n);
        let down = c.gamma * n * n * e * (n * (1.0 - e) / (n - 1.0) * (1.0 - b1 / n) + (n * e - 1.0) / (n - 1.0) * b0 / n);
        n * j * p.eco.rho_a + n * a * rho_j + n * a * kappa_a + n * j * kappa_j_net + up + down
    }

    #[test]
    fn rates_sum_to_kernel_mass() {
        let c = cfg(40, 0.7, true);
        let mut stream = SeedSpec::new(3, 0).stream(Component::Init);
        for _ in 0..200 {
            let s = IbmState {
                n: 40,
                juveniles: (stream.uniform() * 120.0) as u64,
                adults: (stream.uniform() * 120.0) as u64,
                compliers: 1 + (stream.uniform() * 38.0) as u64,
            };
            let total = event_rates(&s, &c).total();
            let oracle = kernel_mass(&s, &c);
            assert!((total - oracle).abs() <= 1e-9 * oracle.max(1.0), "{total} vs {oracle}");
        }
    }

    #[test]
    fn compliance_drift_matches_limit() {
        let c = cfg(50, 1.3, false);
        let s = IbmState::from_scaled(50, 0.3, 0.7, 0.4).unwrap();
        let r = event_rates(&s, &c);
        let (b0, b1) = c.params.compliance_rate_pair(&s.to_state(c.price));
        let drift = r.rates[4] - r.rates[5];
        let oracle = c.gamma * (b1 * (1.0 - s.e()) - b0 * s.e());
        assert!((drift - oracle).abs() < 1e-12, "{drift} {oracle}");
    }

    #[test]
    fn single_channel_always_fires() {
        let mut p = zero_rate_params();
        p.eco.rho_a = 1.0;
        let c = IbmConfig::new(10, 0.0, p, false).unwrap();
        let s = IbmState::from_scaled(10, 0.5, 0.2, 0.5).unwrap();
        let mut stream = SeedSpec::new(2, 0).stream(Component::Events);
        for _ in 0..100 {
            match gillespie_step(&s, &c, &mut stream) {
                StepOutcome::Jump { event, state, .. } => {
                    assert_eq!(event, IbmEvent::Maturation);
                    assert_eq!((state.juveniles, state.adults, state.compliers), (4, 3, 5));
                }
                StepOutcome::Absorbed => panic!("absorbed"),
            }
        }
    }

    #[test]
    fn equal_channels_split_evenly() {
        let mut p = zero_rate_params();
        p.eco.rho_a = 1.0;
        p.eco.m_a = 1.0;
        let c = IbmConfig::new(10, 0.0, p, false).unwrap();
        // j = a, so maturation and adult death have equal rates.
        let s = IbmState::from_scaled(10, 0.5, 0.5, 0.5).unwrap();
        let mut stream = SeedSpec::new(4, 0).stream(Component::Events);
        let n = 100_000;
        let mut hits = 0;
        for _ in 0..n {
            if let StepOutcome::Jump { event: IbmEvent::Maturation, .. } = gillespie_step(&s, &c, &mut stream) {
                hits += 1;
            }
        }
        let f = hits as f64 / n as f64;
        assert!((f - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt(), "{f}");
    }

    #[test]
    fn two_agent_step_distribution() {
        let c = cfg(2, 1.0, false);
        let s = IbmState {
            n: 2,
            juveniles: 1,
            adults: 2,
            compliers: 1,
        };
        let r = event_rates(&s, &c);
        let total = r.total();
        let mut stream = SeedSpec::new(6, 0).stream(Component::Events);
        let n = 100_000;
        let mut counts = [0usize; 6];
        for _ in 0..n {
            if let StepOutcome::Jump { event, .. } = gillespie_step(&s, &c, &mut stream) {
                counts[IbmEvent::ALL.iter().position(|e| *e == event).unwrap()] += 1;
            }
        }
        for i in 0..6 {
            let p = r.rates[i] / total;
            let f = counts[i] as f64 / n as f64;
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((f - p).abs() <= 3.0 * se + 1e-12, "channel {i}: {f} vs {p}");
        }
    }

    #[test]
    fn tiny_n_clamps_and_flags() {
        let mut p = presets::meanfield().params;
        p.compliance.beta0_bar = 5.0;
        let c = IbmConfig::new(2, 1.0, p, false).unwrap();
        let s = IbmState {
            n: 2,
            juveniles: 0,
            adults: 0,
            compliers: 1,
        };
        let r = event_rates(&s, &c);
        assert!(r.clamped);
        assert!(r.rates.iter().all(|x| *x >= 0.0));
    }

    #[test]
    fn lattice_validity_along_paths() {
        let c = cfg(30, 1.0, true);
        let x0 = IbmState::from_scaled(30, 0.4, 0.6, 0.5).unwrap();
        let path = simulate_ibm(&c, x0, 1.0, 10, SeedSpec::new(8, 1)).unwrap();
        assert!(path.complete);
        assert_eq!(path.times.len(), 11);
        assert!(path.states.iter().all(|s| s.compliers <= s.n));
        assert!(path.events.windows(2).all(|w| w[0] <= w[1]));
        let again = simulate_ibm(&c, x0, 1.0, 10, SeedSpec::new(8, 1)).unwrap();
        assert_eq!(path, again);
    }

    #[test]
    fn event_budget_stops_early() {
        let mut c = cfg(30, 1.0, true);
        c.event_limit = 5;
        let x0 = IbmState::from_scaled(30, 0.4, 0.6, 0.5).unwrap();
        let path = simulate_ibm(&c, x0, 10.0, 10, SeedSpec::new(8, 1)).unwrap();
        assert!(!path.complete);
        assert_eq!(path.total_events, 5);
    }
}
