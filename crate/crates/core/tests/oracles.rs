use kelpsim::analysis::{extinction_probability, lyapunov_ensemble, mean_var, run_ensemble};
use kelpsim::ibm::{simulate_ibm, IbmConfig, IbmState};
use kelpsim::noise::FixedNoise;
use kelpsim::{presets, GridSpec, RateFamily, SeedSpec, SimOptions, Simulator};

/// Pure juvenile death is solved exactly by the scheme:
/// `ln J_N = ln J_0 + N ln(1 − κΔt) − σ²T/2 + σW_T`.
#[test]
fn pure_death_matches_closed_form() {
    let s = presets::geometric_death();
    let grid = GridSpec::new(10.0, 200).unwrap();
    let dt = grid.dt();
    let sim = Simulator::new(&s.params, grid, SimOptions::default().with_stride(200)).unwrap();
    let x0 = s.initial_state();
    let mut st = SeedSpec::new(4, 0).stream(kelpsim::Component::J);
    let dw: Vec<f64> = (0..200).map(|_| dt.sqrt() * st.standard_normal()).collect();
    let w_t: f64 = dw.iter().sum();
    let mut noise = FixedNoise {
        dw: [dw, vec![0.0; 200], vec![0.0; 200], vec![0.0; 200]],
        jumps: vec![None; 200],
    };
    let path = sim.run_with(&x0, &mut noise, SeedSpec::default()).unwrap();
    let kappa = s.params.eco.m_j;
    let sigma = s.params.eco.sigma_j;
    let exact = x0.j.ln() + 200.0 * (1.0 - kappa * dt).ln() - 0.5 * sigma * sigma * 10.0 + sigma * w_t;
    assert!((path.final_state().j.ln() - exact).abs() < 1e-10);
}

#[test]
fn pure_death_ensemble_mean() {
    let s = presets::geometric_death();
    let grid = GridSpec::new(2.0, 40).unwrap();
    let ens = run_ensemble(&s.params, &s.run.init, grid, 20_000, 5, SimOptions::default().with_stride(40), 1e-6).unwrap();
    let finals: Vec<f64> = ens.summaries.iter().map(|x| x.final_total).collect();
    let (m, var) = mean_var(&finals);
    let exact = 10.0 * (1.0 - s.params.eco.m_j * grid.dt()).powi(40);
    assert!((m - exact).abs() < 4.0 * (var / finals.len() as f64).sqrt(), "{m} vs {exact}");
}

#[test]
fn geometric_death_slope() {
    let s = presets::geometric_death();
    let grid = s.grid().unwrap();
    let ens = run_ensemble(&s.params, &s.run.init, grid, 200, 1, s.sim_options(), s.threshold()).unwrap();
    let dt = grid.dt();
    let expected = (1.0 - 0.5 * dt).ln() / dt - 0.5;
    let l = lyapunov_ensemble(&ens, None).unwrap();
    assert!((l.median() - expected).abs() < 0.05, "{} vs {expected}", l.median());
    let p = extinction_probability(&ens, s.threshold(), grid.t_end).unwrap();
    assert_eq!(p.probability, 1.0);
}

/// With only the maturation channel, every juvenile matures at rate `ρ_A`.
#[test]
fn ibm_pure_maturation_mean() {
    let mut p = presets::meanfield().params;
    p.eco.r_j = RateFamily::zero();
    p.eco.m_j = 0.0;
    p.eco.m_a = 0.0;
    p.eco.f_j = RateFamily::zero();
    p.eco.f_a = RateFamily::zero();
    let n = 100;
    let cfg = IbmConfig::new(n, 0.0, p.clone(), true).unwrap();
    let x0 = IbmState::from_scaled(n, 0.5, 0.5, 0.5).unwrap();
    let finals: Vec<f64> = (0..2000)
        .map(|i| simulate_ibm(&cfg, x0, 1.0, 4, SeedSpec::new(2, i)).unwrap().states.last().unwrap().j())
        .collect();
    let (m, var) = mean_var(&finals);
    let exact = 0.5 * (-p.eco.rho_a).exp();
    assert!((m - exact).abs() < 4.0 * (var / 2000.0).sqrt(), "{m} vs {exact}");
    // Total biomass is conserved by maturation.
    let path = simulate_ibm(&cfg, x0, 1.0, 4, SeedSpec::new(2, 0)).unwrap();
    assert!(path.states.iter().all(|s| s.juveniles + s.adults == 100));
}
