//! Built-in scenarios.
//!
//! The numbers are an illustrative desk-scale parameter set chosen to show
//! the qualitative regimes (persistence under full compliance, dispersion
//! and near-extinction under dynamic compliance, the effect of subsidies
//! and price volatility). They are not a calibration to field data.

use crate::config::{ConvergeSettings, IbmSettings, InitSpec, RunConfig, ScenarioConfig, SweepAxis};
use crate::model::{
    ComplianceParams, EcologicalParams, Gain, JumpParams, MarkDist, ModelParams, PriceKind, PriceParams, RateFamily,
};
use crate::scheme::SchemeTag;

/// Names accepted by [`by_name`].
pub const NAMES: [&str; 7] = [
    "default",
    "full-compliance",
    "subsidy-sweep",
    "volatility-sweep",
    "extinction",
    "geometric-death",
    "meanfield",
];

fn base_params() -> ModelParams {
    let k = 100.0;
    ModelParams {
        eco: EcologicalParams {
            r_j: RateFamily::constant(3.0),
            k,
            rho_a: 0.5,
            m_j: 0.3,
            m_a: 0.2,
            f_j: RateFamily::new(0.0, 0.9),
            f_a: RateFamily::new(0.25, 0.9),
            sigma_j: 0.3,
            sigma_a: 0.2,
        },
        compliance: ComplianceParams {
            beta0_bar: 0.4,
            beta1_bar: 0.12,
            tau_u: 1.0,
            sigma_e: 0.4,
            eta_sig: 0.02,
            p_min: 300.0,
            p_max: 800.0,
            subsidy: 0.0,
        },
        jumps: JumpParams {
            lambda: 0.2,
            marks: MarkDist::two_point_enso(-1.0, 1.0, 0.5).expect("valid two-point table"),
            gain_j: Gain::linear(0.3),
            gain_a: Gain::linear(0.4),
            eps1: 1.0,
            eps2: 0.1,
            cap: k,
        },
        price: PriceParams {
            kind: PriceKind::GeometricBrownian,
            mu: 0.04,
            sigma_p: 0.07,
            theta: 150.0,
            kappa_p: 0.0,
            p0: 150.0,
        },
    }
}

fn base_run() -> RunConfig {
    RunConfig {
        t_end: 30.0,
        n_steps: 1500,
        paths: 15000,
        seed: 20240917,
        burn_in: 5.0,
        init: InitSpec::Fixed { j: 10.0, a: 20.0, e: 0.5 },
        scheme: SchemeTag::Exponential,
        truncation: 0.01,
        record_stride: 50,
        threshold: None,
        sample_paths: 10,
        bins: 40,
    }
}

fn base_ibm() -> IbmSettings {
    IbmSettings {
        n_list: vec![50, 200, 800],
        gamma: 1.0,
        replicas: 2000,
        t_end: 1.0,
        report_points: 20,
        time_rescale: true,
        event_limit: 1_000_000_000,
        limit_paths: 8000,
        limit_steps: 1000,
        x0: (0.4, 0.6, 0.5),
    }
}

fn base_converge() -> ConvergeSettings {
    ConvergeSettings {
        levels: 4,
        base_steps: 50,
        paths: 2000,
        t_end: 5.0,
    }
}

/// Dynamic compliance driven by the syndicate and price incentives.
pub fn dynamic_compliance() -> ScenarioConfig {
    ScenarioConfig {
        name: "default".into(),
        params: base_params(),
        run: base_run(),
        sweep: None,
        ibm: base_ibm(),
        converge: base_converge(),
    }
}

/// The scenario used when no preset or configuration is given.
pub fn default_scenario() -> ScenarioConfig {
    dynamic_compliance()
}

/// Nearly everyone complies: no syndicate pressure, strong baseline return
/// to compliance.
pub fn full_compliance() -> ScenarioConfig {
    let mut s = dynamic_compliance();
    s.name = "full-compliance".into();
    let c = &mut s.params.compliance;
    c.tau_u = 0.0;
    c.beta1_bar = 5.0;
    c.beta0_bar = 0.05;
    c.sigma_e = 0.1;
    s.run.init = InitSpec::Fixed { j: 10.0, a: 20.0, e: 0.9 };
    s
}

/// Subsidy levels 0, 150 and 300.
pub fn subsidy_sweep() -> ScenarioConfig {
    let mut s = dynamic_compliance();
    s.name = "subsidy-sweep".into();
    s.sweep = Some(SweepAxis {
        axis: "compliance.s".into(),
        values: vec![0.0, 150.0, 300.0],
    });
    s
}

/// Price volatilities 0.07, 0.09 and 0.11.
pub fn volatility_sweep() -> ScenarioConfig {
    let mut s = dynamic_compliance();
    s.name = "volatility-sweep".into();
    s.sweep = Some(SweepAxis {
        axis: "price.sigma_P".into(),
        values: vec![0.07, 0.09, 0.11],
    });
    s
}

/// Parameters meeting the extinction criterion with decay rate 0.8:
/// no jumps, unit noise, `m̌_A = 0.6`, `m̌_J = 0.4`, `r̂ = 0.3`.
pub fn extinction() -> ScenarioConfig {
    let mut s = dynamic_compliance();
    s.name = "extinction".into();
    s.params = ModelParams {
        eco: EcologicalParams {
            r_j: RateFamily::constant(0.3),
            k: 100.0,
            rho_a: 0.5,
            m_j: 0.4,
            m_a: 0.6,
            f_j: RateFamily::zero(),
            f_a: RateFamily::zero(),
            sigma_j: 1.0,
            sigma_a: 1.0,
        },
        compliance: ComplianceParams {
            beta0_bar: 0.5,
            beta1_bar: 0.5,
            tau_u: 0.0,
            sigma_e: 0.3,
            eta_sig: 0.0,
            p_min: 0.0,
            p_max: 0.0,
            subsidy: 0.0,
        },
        jumps: JumpParams::none(100.0),
        price: PriceParams::constant(100.0),
    };
    s.run = RunConfig {
        t_end: 200.0,
        n_steps: 4000,
        paths: 1000,
        burn_in: 0.0,
        record_stride: 20,
        ..base_run()
    };
    s
}

/// Juveniles only, dying geometrically: `dJ = −0.5 J dt + J dW`.
pub fn geometric_death() -> ScenarioConfig {
    let mut s = extinction();
    s.name = "geometric-death".into();
    let eco = &mut s.params.eco;
    eco.rho_a = 0.0;
    eco.r_j = RateFamily::zero();
    eco.m_j = 0.5;
    eco.sigma_j = 1.0;
    s.run.init = InitSpec::Fixed { j: 10.0, a: 0.0, e: 0.5 };
    s
}

/// Small carrying capacity and strong baseline switching for the
/// individual-based comparison.
pub fn meanfield() -> ScenarioConfig {
    let mut s = dynamic_compliance();
    s.name = "meanfield".into();
    let eco = &mut s.params.eco;
    eco.k = 2.0;
    eco.r_j = RateFamily::constant(1.0);
    eco.sigma_j = 0.0;
    eco.sigma_a = 0.0;
    s.params.jumps = JumpParams::none(2.0);
    s.params.price = PriceParams::constant(150.0);
    let c = &mut s.params.compliance;
    c.beta0_bar = 1.2;
    c.beta1_bar = 1.6;
    c.tau_u = 0.3;
    s
}

pub fn all() -> Vec<ScenarioConfig> {
    NAMES.iter().filter_map(|n| by_name(n)).collect()
}

pub fn by_name(name: &str) -> Option<ScenarioConfig> {
    Some(match name {
        "default" | "dynamic" => dynamic_compliance(),
        "full-compliance" => full_compliance(),
        "subsidy-sweep" => subsidy_sweep(),
        "volatility-sweep" => volatility_sweep(),
        "extinction" => extinction(),
        "geometric-death" => geometric_death(),
        "meanfield" => meanfield(),
        _ => return None,
    })
}
