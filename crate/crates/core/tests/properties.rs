use kelpsim::analysis::{histogram, total_variation, wilson_interval, BinSpec};
use kelpsim::model::{activation, clamp_band, delta_beta, jump_phi, validate_params, Population};
use kelpsim::noise::{CellDraws, CellJump};
use kelpsim::scheme::{step_biomass, step_compliance, step_exponential, step_price, validate_dt};
use kelpsim::{presets, Gain, JumpParams, MarkAtom, MarkDist, ModelParams, PriceParams, RateFamily, StateVec};
use proptest::prelude::*;

fn compliance_params() -> impl Strategy<Value = ModelParams> {
    (0.0..3.0, 0.0..3.0, 0.0..2.0, 0.0..0.2, 0.0..500.0, 0.0..500.0, 0.0..400.0).prop_map(|(b0, b1, tau, eta, pmin, span, s)| {
        let mut p = presets::dynamic_compliance().params;
        let c = &mut p.compliance;
        c.beta0_bar = b0;
        c.beta1_bar = b1;
        c.tau_u = tau;
        c.eta_sig = eta;
        c.p_min = pmin;
        c.p_max = pmin + span;
        c.subsidy = s;
        p
    })
}

fn state() -> impl Strategy<Value = StateVec> {
    (0.0..300.0, 0.0..300.0, 0.0..=1.0, 0.0..2000.0).prop_map(|(j, a, e, p)| StateVec::new(j, a, e, p))
}

proptest! {
    #[test]
    fn decomposition_identity(params in compliance_params(), x in state()) {
        let c = &params.compliance;
        let lhs = params.compliance_drift(&x);
        let rhs = delta_beta(x.j, x.a, x.p, &params) * x.e * (1.0 - x.e) + c.beta1_bar - (c.beta0_bar + c.beta1_bar) * x.e;
        prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn delta_beta_bounded(params in compliance_params(), x in state()) {
        prop_assert!(delta_beta(x.j, x.a, x.p, &params).abs() <= 2.0 * params.compliance.tau_u + 1e-12);
    }

    #[test]
    fn cutoff_lands_in_band(eps in 0.0..0.5, z in -10.0..10.0f64) {
        let y = clamp_band(eps, z);
        prop_assert!(y >= eps && y <= 1.0 - eps);
        prop_assert_eq!(clamp_band(eps, y), y);
    }

    #[test]
    fn activation_is_monotone(eta in 0.0..1.0, p0 in 0.0..500.0, p in 0.0..1000.0, dp in 0.0..100.0) {
        let (a, b) = (activation(eta, p0, p), activation(eta, p0, p + dp));
        prop_assert!((0.0..=1.0).contains(&a) && b >= a);
    }

    #[test]
    fn rate_family_range_contains_values(c in 0.0..2.0, nc in 0.0..2.0, e in 0.0..=1.0) {
        let f = RateFamily::new(c, nc);
        let (lo, hi) = f.range();
        let v = f.eval(e, 0.0);
        prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
    }

    #[test]
    fn jumps_keep_biomass_positive(slope in 0.0..0.99, x in 0.0..500.0, z in -1.0..=1.0) {
        let jp = JumpParams {
            lambda: 1.0,
            marks: MarkDist::dirac(z),
            gain_j: Gain::linear(slope),
            gain_a: Gain::linear(slope),
            eps1: 1.0,
            eps2: 0.1,
            cap: 100.0,
        };
        for which in [Population::Juvenile, Population::Adult] {
            prop_assert!(x + jump_phi(which, x, z, &jp) >= 0.0);
        }
    }

    #[test]
    fn jump_moments_within_bounds(slope in 0.0..0.99, p in 0.0..=1.0, x in 0.0..500.0) {
        let jp = JumpParams {
            lambda: 1.0,
            marks: MarkDist::discrete(vec![MarkAtom { z: -1.0, p }, MarkAtom { z: 1.0, p: 1.0 - p }]).unwrap(),
            gain_j: Gain::linear(slope),
            gain_a: Gain::linear(0.5 * slope),
            eps1: 1.0,
            eps2: 0.1,
            cap: 100.0,
        };
        let (m_abs, m_sq) = jp.moment_bounds();
        let phi = |z| (jump_phi(Population::Juvenile, x, z, &jp), jump_phi(Population::Adult, x, z, &jp));
        let abs = jp.marks.integrate(|z| { let (a, b) = phi(z); a.abs() + b.abs() });
        let sq = jp.marks.integrate(|z| { let (a, b) = phi(z); a * a + b * b });
        prop_assert!(abs <= m_abs + 1e-9 && sq <= m_sq + 1e-9);
    }

    #[test]
    fn exponential_step_stays_positive(x in state(), dw in prop::array::uniform4(-3.0..3.0f64), dt_frac in 0.01..1.0f64, mark in prop::option::of(-1.0..=1.0f64)) {
        let params = presets::dynamic_compliance().params;
        let (kj, ka) = params.eco.loss_rate_sups();
        let dt = (dt_frac / kj.max(ka)).min(0.4);
        prop_assume!(validate_dt(&params, dt).valid);
        let mut x = x;
        x.e = clamp_band(dt, x.e);
        let sd = dt.sqrt();
        let draws = CellDraws {
            dw: dw.map(|w| w * sd),
            jump: mark.map(|m| CellJump { offset: 0.5 * dt, mark: m }),
        };
        let y = step_exponential(&params, &x, dt, &draws);
        prop_assert!(y.j >= 0.0 && y.a >= 0.0);
        prop_assert!(y.e >= dt && y.e <= 1.0 - dt);
        prop_assert!(y.p > 0.0);
        let (j, a) = step_biomass(&params, &x, dt, draws.dw[0], draws.dw[1], None);
        prop_assert!(j >= 0.0 && a >= 0.0);
        let e = step_compliance(&params, &x, dt, draws.dw[2]);
        prop_assert_eq!(e, y.e);
    }

    #[test]
    fn price_step_positive(p in 1e-3..1e4, dw in -5.0..5.0, mu in -0.5..0.5, sigma in 0.0..1.0) {
        prop_assert!(step_price(p, 0.1, dw, &PriceParams::gbm(p, mu, sigma)) > 0.0);
    }

    #[test]
    fn histogram_density_normalized(v in prop::collection::vec(-100.0..100.0f64, 1..300), bins in 1usize..50) {
        let h = histogram(&v, &BinSpec::auto(bins)).unwrap();
        let mass: f64 = (0..bins).map(|i| h.density[i] * h.width(i)).sum();
        prop_assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wilson_interval_is_a_probability_interval(n in 1usize..10_000, frac in 0.0..=1.0) {
        let k = (frac * n as f64) as usize;
        let (lo, hi) = wilson_interval(k, n, 1.96);
        prop_assert!(0.0 <= lo && lo <= k as f64 / n as f64 + 1e-12);
        prop_assert!(hi <= 1.0 && hi >= k as f64 / n as f64 - 1e-12);
    }

    #[test]
    fn total_variation_is_a_distance(a in prop::collection::vec(0.0..1.0f64, 5), b in prop::collection::vec(0.0..1.0f64, 5)) {
        let norm = |v: &[f64]| { let s: f64 = v.iter().sum(); v.iter().map(|x| x / s.max(1e-300)).collect::<Vec<_>>() };
        prop_assume!(a.iter().sum::<f64>() > 0.0 && b.iter().sum::<f64>() > 0.0);
        let (a, b) = (norm(&a), norm(&b));
        let d = total_variation(&a, &b);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&d));
        prop_assert!((d - total_variation(&b, &a)).abs() < 1e-15);
    }
}

#[test]
fn sigma_e_above_threshold_fails_h3() {
    let mut p = presets::dynamic_compliance().params;
    p.compliance.sigma_e = (2.0 * p.compliance.beta0_bar).sqrt() + 0.5;
    let r = validate_params(&p);
    assert!(!r.passed());
    assert!(!r.get("H3").unwrap().passed);
}
