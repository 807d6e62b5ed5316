//! Parameters and deterministic coefficient functions of the coupled
//! biomass / compliance / price system.
//!
//! State is `X = (J, A, E, P)`: juvenile and adult biomass densities, the
//! fraction of compliant harvesters, and the exogenous price. Every
//! coefficient of the dynamics is exposed here as a pure function of an
//! immutable parameter object so it can be tested in isolation and shared
//! freely between threads.

use std::fmt;

use crate::error::{param, Error, Result};

/// Number of points used when scanning a rate family over `E ∈ [0, 1]`.
pub const E_SCAN_POINTS: usize = 1001;

/// `Ψ_ε(z) = (ε ∨ z) ∧ (1 − ε)` without checking `ε`.
///
/// A negative `ε` is read as `0 ∨ ε` on the lower side, so `clamp_band(1 - 1/δ, x)`
/// clamps biomass into `[0, 1/δ]`.
#[inline]
pub fn clamp_band(eps: f64, z: f64) -> f64 {
    let lo = eps.max(0.0);
    let hi = 1.0 - eps;
    z.max(lo).min(hi)
}

/// The 1-Lipschitz cut-off `Ψ_ε(z) = (ε ∨ z) ∧ (1 − ε)` for `ε ∈ [0, 1/2)`.
pub fn cutoff(eps: f64, z: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&eps) {
        return Err(param(format!("cutoff level {eps} outside [0, 1/2)")));
    }
    Ok(clamp_band(eps, z))
}

/// Smooth indicator of `[p0, ∞)`: `1 / (1 + exp(−η (p − p0)))`.
///
/// Evaluated in the branch that cannot overflow, so extreme arguments
/// saturate to 0 or 1.
#[inline]
pub fn activation(eta_sig: f64, p0: f64, p: f64) -> f64 {
    let s = eta_sig * (p - p0);
    if s.is_nan() {
        return 0.5;
    }
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// Optional price modulation of a rate family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceActivation {
    pub eta: f64,
    pub p_low: f64,
}

/// A rate depending on the compliance fraction: linear interpolation between
/// the fully compliant (`E = 1`) and fully non-compliant (`E = 0`) values,
/// optionally damped by `activation(eta, p_low, P)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFamily {
    pub compliant: f64,
    pub noncompliant: f64,
    pub activation: Option<PriceActivation>,
}

impl RateFamily {
    pub fn new(compliant: f64, noncompliant: f64) -> Self {
        Self {
            compliant,
            noncompliant,
            activation: None,
        }
    }

    pub fn constant(value: f64) -> Self {
        Self::new(value, value)
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn with_activation(mut self, eta: f64, p_low: f64) -> Self {
        self.activation = Some(PriceActivation { eta, p_low });
        self
    }

    /// Rate at compliance `e` (clamped into `[0, 1]`) and price `p`.
    #[inline]
    pub fn eval(&self, e: f64, p: f64) -> f64 {
        let e = e.clamp(0.0, 1.0);
        let base = self.compliant * e + self.noncompliant * (1.0 - e);
        match self.activation {
            Some(a) => base * activation(a.eta, a.p_low, p),
            None => base,
        }
    }

    fn eval_unmodulated(&self, e: f64) -> f64 {
        self.compliant * e + self.noncompliant * (1.0 - e)
    }

    /// `(inf, sup)` over `E ∈ [0, 1]` and all prices, by dense grid scan.
    ///
    /// The activation factor ranges over `(0, 1)`, so a modulated family has
    /// infimum 0 and the same supremum as its unmodulated base.
    pub fn range(&self) -> (f64, f64) {
        let (lo, hi) = scan_extrema(|e| self.eval_unmodulated(e));
        match self.activation {
            Some(_) => (lo.min(0.0), hi.max(0.0)),
            None => (lo, hi),
        }
    }

    pub fn sup(&self) -> f64 {
        self.range().1
    }

    pub fn inf(&self) -> f64 {
        self.range().0
    }

    /// Largest finite-difference slope in `E` over the scan grid.
    pub fn lipschitz_estimate(&self) -> f64 {
        let h = 1.0 / (E_SCAN_POINTS - 1) as f64;
        (0..E_SCAN_POINTS - 1)
            .map(|i| {
                let e0 = i as f64 * h;
                ((self.eval_unmodulated(e0 + h) - self.eval_unmodulated(e0)) / h).abs()
            })
            .fold(0.0, f64::max)
    }

    fn is_nonnegative(&self) -> bool {
        self.compliant >= 0.0 && self.noncompliant >= 0.0
    }
}

pub(crate) fn scan_extrema(f: impl Fn(f64) -> f64) -> (f64, f64) {
    let h = 1.0 / (E_SCAN_POINTS - 1) as f64;
    (0..E_SCAN_POINTS)
        .map(|i| f(i as f64 * h))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
}

/// Ecological rates, carrying capacity and environmental noise intensities.
#[derive(Debug, Clone, PartialEq)]
pub struct EcologicalParams {
    /// Juvenile recruitment rate `r^(J)(E)` per unit adult biomass.
    pub r_j: RateFamily,
    /// Carrying capacity `K`.
    pub k: f64,
    /// Maturation rate `ρ_A`.
    pub rho_a: f64,
    pub m_j: f64,
    pub m_a: f64,
    /// Extraction rate on juveniles.
    pub f_j: RateFamily,
    /// Extraction rate on adults.
    pub f_a: RateFamily,
    pub sigma_j: f64,
    pub sigma_a: f64,
}

impl EcologicalParams {
    /// `ρ_J(K, E) = r^(J)(E) Ψ(1 − (A + J)/K)`.
    #[inline]
    pub fn recruitment_rate(&self, j: f64, a: f64, e: f64, p: f64) -> f64 {
        self.r_j.eval(e, p) * clamp_band(0.0, 1.0 - (a + j) / self.k)
    }

    /// `(κ_J, κ_A)` at compliance `e` and price `p`.
    #[inline]
    pub fn loss_rate_pair(&self, e: f64, p: f64) -> (f64, f64) {
        (
            self.rho_a + self.f_j.eval(e, p) + self.m_j,
            self.m_a + self.f_a.eval(e, p),
        )
    }

    /// `(sup κ_J, sup κ_A)` over the state space.
    pub fn loss_rate_sups(&self) -> (f64, f64) {
        (
            self.rho_a + self.f_j.sup() + self.m_j,
            self.m_a + self.f_a.sup(),
        )
    }

    /// Copy with both extraction families switched off.
    pub fn without_extraction(&self) -> Self {
        Self {
            f_j: RateFamily::zero(),
            f_a: RateFamily::zero(),
            ..self.clone()
        }
    }
}

/// Parameters of the compliance switching rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplianceParams {
    /// Baseline rate compliance → non-compliance.
    pub beta0_bar: f64,
    /// Baseline rate non-compliance → compliance.
    pub beta1_bar: f64,
    /// Fraction of harvesters in a syndicate.
    pub tau_u: f64,
    pub sigma_e: f64,
    /// Sigmoid steepness for the price thresholds.
    pub eta_sig: f64,
    pub p_min: f64,
    pub p_max: f64,
    /// Subsidy added on top of the price in the compliance incentive.
    pub subsidy: f64,
}

impl ComplianceParams {
    /// `(β₀, β₁)` at the given state, with `Ψ((J+A)/K)` precomputed by the caller.
    #[inline]
    fn rates_with_fill(&self, fill: f64, e: f64, p: f64) -> (f64, f64) {
        let i_min = activation(self.eta_sig, self.p_min, p);
        let i_max = activation(self.eta_sig, self.p_max, p);
        let i_min_sub = activation(self.eta_sig, self.p_min, p + self.subsidy);
        let beta0 = (fill + (1.0 - i_min + i_max) + 1.0) * self.tau_u * (1.0 - e) + self.beta0_bar;
        let beta1 = (1.0 - fill + i_min_sub + 1.0) * self.tau_u * e + self.beta1_bar;
        (beta0, beta1)
    }

    /// Multiply every switching rate by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            beta0_bar: self.beta0_bar * factor,
            beta1_bar: self.beta1_bar * factor,
            tau_u: self.tau_u * factor,
            ..*self
        }
    }
}

/// A probability atom of the mark distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkAtom {
    pub z: f64,
    pub p: f64,
}

/// Discrete mark distribution `ν`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkDist {
    atoms: Vec<MarkAtom>,
}

impl MarkDist {
    pub fn discrete(atoms: Vec<MarkAtom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(param("mark distribution has no atoms"));
        }
        if atoms.iter().any(|a| !(a.p >= 0.0) || !a.z.is_finite()) {
            return Err(param("mark probabilities must be non-negative and marks finite"));
        }
        let total: f64 = atoms.iter().map(|a| a.p).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(param(format!("mark probabilities sum to {total}, not 1")));
        }
        Ok(Self { atoms })
    }

    /// Two-phase climate model: a warm mark (negative gain) with probability
    /// `p_warm` and a cold mark otherwise.
    pub fn two_point_enso(warm: f64, cold: f64, p_warm: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_warm) {
            return Err(param(format!("warm-phase probability {p_warm} outside [0, 1]")));
        }
        Self::discrete(vec![
            MarkAtom { z: warm, p: p_warm },
            MarkAtom {
                z: cold,
                p: 1.0 - p_warm,
            },
        ])
    }

    /// Degenerate distribution at a single mark.
    pub fn dirac(z: f64) -> Self {
        Self {
            atoms: vec![MarkAtom { z, p: 1.0 }],
        }
    }

    pub fn atoms(&self) -> &[MarkAtom] {
        &self.atoms
    }

    /// Inverse-CDF sampling from a uniform `u ∈ [0, 1)`.
    pub fn sample(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for atom in &self.atoms {
            acc += atom.p;
            if u < acc {
                return atom.z;
            }
        }
        // Rounding in the cumulative sum; fall back to the last atom with mass.
        self.atoms
            .iter()
            .rev()
            .find(|a| a.p > 0.0)
            .map_or(self.atoms[self.atoms.len() - 1].z, |a| a.z)
    }

    /// `∫ f dν`, exact for a discrete table.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.atoms.iter().map(|a| a.p * f(a.z)).sum()
    }

    /// Marks with positive probability.
    pub fn support(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().filter(|a| a.p > 0.0).map(|a| a.z)
    }
}

/// Affine gain `g(z) = intercept + slope · z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gain {
    pub intercept: f64,
    pub slope: f64,
}

impl Gain {
    pub fn linear(slope: f64) -> Self {
        Self {
            intercept: 0.0,
            slope,
        }
    }

    #[inline]
    pub fn eval(&self, z: f64) -> f64 {
        self.intercept + self.slope * z
    }
}

/// Which biomass class a jump acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Population {
    Juvenile,
    Adult,
}

/// Poisson-driven environmental pulses.
///
/// The jump functions are `φ(x, z) = g(z) ((x ∧ cap) − ε₁) 1{x ≥ ε₁}`: no
/// pulse acts below `ε₁`, and a gain bounded by `1 − ε₂` keeps post-jump
/// biomass strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpParams {
    pub lambda: f64,
    pub marks: MarkDist,
    pub gain_j: Gain,
    pub gain_a: Gain,
    pub eps1: f64,
    pub eps2: f64,
    pub cap: f64,
}

impl JumpParams {
    /// No jumps at all.
    pub fn none(cap: f64) -> Self {
        Self {
            lambda: 0.0,
            marks: MarkDist::dirac(0.0),
            gain_j: Gain::linear(0.0),
            gain_a: Gain::linear(0.0),
            eps1: (cap * 1e-3).max(f64::MIN_POSITIVE),
            eps2: 0.5,
            cap,
        }
    }

    pub fn gain(&self, which: Population) -> Gain {
        match which {
            Population::Juvenile => self.gain_j,
            Population::Adult => self.gain_a,
        }
    }

    /// `(M₁, M₂)`: uniform-in-`x` bounds on `∫(|φ_A|+|φ_J|)dν` and `∫(φ_A²+φ_J²)dν`.
    pub fn moment_bounds(&self) -> (f64, f64) {
        let span = (self.cap - self.eps1).max(0.0);
        let m_abs = span
            * self
                .marks
                .integrate(|z| self.gain_a.eval(z).abs() + self.gain_j.eval(z).abs());
        let m_sq = span
            * span
            * self
                .marks
                .integrate(|z| self.gain_a.eval(z).powi(2) + self.gain_j.eval(z).powi(2));
        (m_abs, m_sq)
    }

    /// Largest `|g(z)|` over the support of `ν`.
    pub fn max_abs_gain(&self, which: Population) -> f64 {
        let g = self.gain(which);
        self.marks.support().map(|z| g.eval(z).abs()).fold(0.0, f64::max)
    }
}

/// Jump increment of one population.
#[inline]
pub fn jump_phi(which: Population, x: f64, z: f64, jp: &JumpParams) -> f64 {
    if x < jp.eps1 {
        return 0.0;
    }
    jp.gain(which).eval(z) * (x.min(jp.cap) - jp.eps1)
}

/// Law of the exogenous price.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriceKind {
    GeometricBrownian,
    ExpOrnsteinUhlenbeck,
    Constant,
}

impl PriceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PriceKind::GeometricBrownian => "gbm",
            PriceKind::ExpOrnsteinUhlenbeck => "exp-ou",
            PriceKind::Constant => "constant",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "gbm" | "geometric-brownian" => Some(PriceKind::GeometricBrownian),
            "exp-ou" | "exponential-ornstein-uhlenbeck" => Some(PriceKind::ExpOrnsteinUhlenbeck),
            "constant" => Some(PriceKind::Constant),
            _ => None,
        }
    }
}

/// Exogenous price process parameters.
///
/// For the exponential OU kind, `log P` reverts to `ln theta` at speed
/// `kappa_p` with volatility `sigma_p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceParams {
    pub kind: PriceKind,
    pub mu: f64,
    pub sigma_p: f64,
    pub theta: f64,
    pub kappa_p: f64,
    pub p0: f64,
}

impl PriceParams {
    pub fn constant(p0: f64) -> Self {
        Self {
            kind: PriceKind::Constant,
            mu: 0.0,
            sigma_p: 0.0,
            theta: p0.max(1.0),
            kappa_p: 0.0,
            p0,
        }
    }

    pub fn gbm(p0: f64, mu: f64, sigma_p: f64) -> Self {
        Self {
            kind: PriceKind::GeometricBrownian,
            mu,
            sigma_p,
            theta: p0.max(1.0),
            kappa_p: 0.0,
            p0,
        }
    }

    /// Drift `μ(P)` of the price SDE.
    pub fn drift(&self, p: f64) -> f64 {
        match self.kind {
            PriceKind::GeometricBrownian => self.mu * p,
            PriceKind::ExpOrnsteinUhlenbeck if p > 0.0 => {
                p * (self.kappa_p * (self.theta.ln() - p.ln()) + 0.5 * self.sigma_p * self.sigma_p)
            }
            PriceKind::ExpOrnsteinUhlenbeck | PriceKind::Constant => 0.0,
        }
    }
}

/// Full parameter set of the coupled system.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub eco: EcologicalParams,
    pub compliance: ComplianceParams,
    pub jumps: JumpParams,
    pub price: PriceParams,
}

impl ModelParams {
    /// `(β₀, β₁)` at state `x`.
    #[inline]
    pub fn compliance_rate_pair(&self, x: &StateVec) -> (f64, f64) {
        let fill = clamp_band(0.0, (x.j + x.a) / self.eco.k);
        self.compliance.rates_with_fill(fill, x.e, x.p)
    }

    /// `β₁(x)(1 − E) − β₀(x)E`.
    #[inline]
    pub fn compliance_drift(&self, x: &StateVec) -> f64 {
        let (b0, b1) = self.compliance_rate_pair(x);
        b1 * (1.0 - x.e) - b0 * x.e
    }

    /// `Δβ̃(K, P)`.
    #[inline]
    pub fn delta_beta(&self, j: f64, a: f64, p: f64) -> f64 {
        let c = &self.compliance;
        let fill = clamp_band(0.0, (j + a) / self.eco.k);
        c.tau_u
            * (activation(c.eta_sig, c.p_min, p + c.subsidy) + activation(c.eta_sig, c.p_min, p)
                - activation(c.eta_sig, c.p_max, p)
                - 2.0 * fill)
    }

    /// Copy with extraction switched off (burn-in phase).
    pub fn without_extraction(&self) -> Self {
        Self {
            eco: self.eco.without_extraction(),
            ..self.clone()
        }
    }
}

/// State `(J, A, E, P)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateVec {
    pub j: f64,
    pub a: f64,
    pub e: f64,
    pub p: f64,
}

impl StateVec {
    pub fn new(j: f64, a: f64, e: f64, p: f64) -> Self {
        Self { j, a, e, p }
    }

    /// Total biomass `J + A`.
    pub fn total(&self) -> f64 {
        self.j + self.a
    }

    /// Membership in `ℝ²₊ × [0,1] × ℝ₊`.
    pub fn check(&self) -> Result<()> {
        let finite = [self.j, self.a, self.e, self.p].iter().all(|v| v.is_finite());
        if !finite || self.j < 0.0 || self.a < 0.0 || !(0.0..=1.0).contains(&self.e) || self.p < 0.0
        {
            return Err(Error::Domain(format!(
                "(J, A, E, P) = ({}, {}, {}, {})",
                self.j, self.a, self.e, self.p
            )));
        }
        Ok(())
    }
}

fn check_biomass(j: f64, a: f64) -> Result<()> {
    if !(j >= 0.0 && a >= 0.0) {
        return Err(Error::Domain(format!("negative biomass J = {j}, A = {a}")));
    }
    Ok(())
}

/// Recruitment rate `r^(J)(E) Ψ(1 − (A + J)/K)`.
pub fn recruitment(j: f64, a: f64, e: f64, p: f64, eco: &EcologicalParams) -> Result<f64> {
    check_biomass(j, a)?;
    if !(0.0..=1.0).contains(&e) {
        return Err(Error::Domain(format!("compliance {e} outside [0, 1]")));
    }
    Ok(eco.recruitment_rate(j, a, e, p))
}

/// Loss rates `(κ_J, κ_A)`.
pub fn loss_rates(e: f64, p: f64, eco: &EcologicalParams) -> (f64, f64) {
    eco.loss_rate_pair(e, p)
}

/// Switching rates `(β₀, β₁)`.
pub fn compliance_rates(x: &StateVec, params: &ModelParams) -> (f64, f64) {
    params.compliance_rate_pair(x)
}

/// `Δβ̃` such that `β₁(1−E) − β₀E = Δβ̃·E(1−E) + β̄₁ − (β̄₀+β̄₁)E`.
pub fn delta_beta(j: f64, a: f64, p: f64, params: &ModelParams) -> f64 {
    params.delta_beta(j, a, p)
}

/// Drift `b(x)` of the four-dimensional system.
pub fn drift_vector(x: &StateVec, params: &ModelParams) -> Result<[f64; 4]> {
    x.check()?;
    Ok(drift_unchecked(x, params))
}

#[inline]
pub(crate) fn drift_unchecked(x: &StateVec, params: &ModelParams) -> [f64; 4] {
    let eco = &params.eco;
    let (kj, ka) = eco.loss_rate_pair(x.e, x.p);
    [
        eco.recruitment_rate(x.j, x.a, x.e, x.p) * x.a - kj * x.j,
        eco.rho_a * x.j - ka * x.a,
        params.compliance_drift(x),
        params.price.drift(x.p),
    ]
}

/// One entry of a [`ValidationReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub id: &'static str,
    pub description: &'static str,
    pub passed: bool,
    pub witnesses: Vec<(&'static str, f64)>,
}

/// Outcome of checking a parameter set against the well-posedness
/// assumptions. Failures are entries, never errors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, id: &'static str, description: &'static str, passed: bool, witnesses: Vec<(&'static str, f64)>) {
        self.checks.push(Check {
            id,
            description,
            passed,
            witnesses,
        });
    }

    /// Machine-readable `key=value` lines.
    pub fn key_values(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in &self.checks {
            out.push(format!("{}.pass={}", c.id, c.passed));
            for (k, v) in &c.witnesses {
                out.push(format!("{}.{}={}", c.id, k, v));
            }
        }
        out.push(format!("all.pass={}", self.passed()));
        out
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            write!(f, "[{status}] {:<10} {}", c.id, c.description)?;
            let w: Vec<String> = c.witnesses.iter().map(|(k, v)| format!("{k}={v}")).collect();
            if !w.is_empty() {
                write!(f, " ({})", w.join(", "))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Check the parameter set against the well-posedness and
/// origin-inaccessibility assumptions, reporting witness quantities.
pub fn validate_params(params: &ModelParams) -> ValidationReport {
    let mut report = ValidationReport::default();
    let eco = &params.eco;
    let cp = &params.compliance;
    let jp = &params.jumps;
    let pp = &params.price;

    let rates_ok = [eco.rho_a, eco.m_j, eco.m_a, eco.sigma_j, eco.sigma_a]
        .iter()
        .all(|v| *v >= 0.0 && v.is_finite())
        && eco.r_j.is_nonnegative()
        && eco.f_j.is_nonnegative()
        && eco.f_a.is_nonnegative();
    report.push(
        "domain",
        "K > 0 and all ecological rates non-negative",
        eco.k > 0.0 && eco.k.is_finite() && rates_ok,
        vec![("K", eco.k)],
    );

    let families = [&eco.r_j, &eco.f_j, &eco.f_a];
    let lips: Vec<f64> = families.iter().map(|f| f.lipschitz_estimate()).collect();
    let sups: Vec<f64> = families.iter().map(|f| f.sup()).collect();
    let h1 = lips.iter().chain(&sups).all(|v| v.is_finite()) && families.iter().all(|f| f.inf() >= 0.0);
    report.push(
        "H1",
        "r_J, F_J, F_A bounded and Lipschitz on [0,1]",
        h1,
        vec![
            ("lip_r_j", lips[0]),
            ("lip_f_j", lips[1]),
            ("lip_f_a", lips[2]),
            ("sup_r_j", sups[0]),
            ("sup_f_j", sups[1]),
            ("sup_f_a", sups[2]),
        ],
    );

    let gj = jp.max_abs_gain(Population::Juvenile);
    let ga = jp.max_abs_gain(Population::Adult);
    report.push(
        "H2.i",
        "linear growth |phi(x,z)| <= x |g(z)|",
        gj.is_finite() && ga.is_finite() && jp.lambda >= 0.0 && jp.lambda.is_finite(),
        vec![("sup_g_j", gj), ("sup_g_a", ga), ("lambda", jp.lambda)],
    );

    let l_j = jp.marks.integrate(|z| jp.gain_j.eval(z).powi(2));
    let l_a = jp.marks.integrate(|z| jp.gain_a.eval(z).powi(2));
    report.push(
        "H2.ii",
        "L2(nu)-Lipschitz jump coefficients",
        l_j.is_finite() && l_a.is_finite(),
        vec![("lip_phi_j", l_j), ("lip_phi_a", l_a)],
    );

    let bound = 1.0 - jp.eps2;
    let h2iii = jp.eps1 > 0.0 && jp.eps2 > 0.0 && jp.eps2 < 1.0 && gj <= bound && ga <= bound;
    report.push(
        "H2.iii",
        "lower control of jumps, |g| <= 1 - eps2",
        h2iii,
        vec![
            ("margin_j", bound - gj),
            ("margin_a", bound - ga),
            ("eps1", jp.eps1),
            ("eps2", jp.eps2),
        ],
    );

    let floor = 0.5 * cp.sigma_e * cp.sigma_e;
    let h3 = cp.beta0_bar >= 0.0 && cp.beta1_bar >= 0.0 && cp.beta0_bar.min(cp.beta1_bar) > floor;
    report.push(
        "H3",
        "min(beta0_bar, beta1_bar) > sigma_E^2 / 2",
        h3,
        vec![
            ("beta_min", cp.beta0_bar.min(cp.beta1_bar)),
            ("sigma_e_sq_half", floor),
            ("margin", cp.beta0_bar.min(cp.beta1_bar) - floor),
        ],
    );

    let compliance_ok = cp.tau_u >= 0.0 && cp.tau_u <= 1.0 && cp.eta_sig >= 0.0 && cp.p_min <= cp.p_max && cp.subsidy >= 0.0;
    report.push(
        "compliance",
        "tau_U in [0,1], eta >= 0, P_min <= P_max, s >= 0",
        compliance_ok,
        vec![("tau_u", cp.tau_u), ("p_min", cp.p_min), ("p_max", cp.p_max)],
    );

    let h4 = pp.p0 >= 0.0
        && pp.p0.is_finite()
        && pp.sigma_p >= 0.0
        && match pp.kind {
            PriceKind::ExpOrnsteinUhlenbeck => pp.theta > 0.0 && pp.kappa_p >= 0.0,
            _ => true,
        };
    report.push(
        "H4",
        "price coefficients admissible and price paths non-negative",
        h4,
        vec![("p0", pp.p0), ("sigma_p", pp.sigma_p)],
    );

    report.push(
        "origin.support",
        "no jumps below eps1",
        jp.eps1 > 0.0 && jp.cap > jp.eps1,
        vec![("eps1", jp.eps1), ("cap", jp.cap)],
    );

    let min_post = min_post_jump_value(jp);
    report.push(
        "origin.nokill",
        "x + phi(x,z) bounded away from 0 on the jump support",
        min_post > 0.0,
        vec![("min_post_jump", min_post)],
    );

    let (m_abs, m_sq) = jp.moment_bounds();
    report.push(
        "origin.excess",
        "integrated jump sizes bounded uniformly in x",
        m_abs.is_finite() && m_sq.is_finite(),
        vec![("m_abs", m_abs), ("m_sq", m_sq)],
    );

    report
}

/// `min x + φ(x, z)` over `x ≥ ε₁` and marks in the support, for both
/// populations. `φ` is piecewise linear in `x` with a kink at `cap`, so the
/// minimum sits at `ε₁` or `cap` (or the slope sends it to infinity).
fn min_post_jump_value(jp: &JumpParams) -> f64 {
    let mut min = f64::INFINITY;
    for which in [Population::Juvenile, Population::Adult] {
        for z in jp.marks.support() {
            let g = jp.gain(which).eval(z);
            if 1.0 + g < 0.0 {
                return f64::NEG_INFINITY;
            }
            for x in [jp.eps1, jp.cap.max(jp.eps1)] {
                min = min.min(x + jump_phi(which, x, z, jp));
            }
        }
    }
    min
}
