//! Convergence harnesses: coupled strong-error estimation of the path
//! scheme and the distance between the individual-based chain and its
//! mean-field limit.

use rayon::prelude::*;

use crate::analysis::mean_var;
use crate::config::IbmSettings;
use crate::error::{param, Error, Result};
use crate::ibm::{limit_params, simulate_ibm, IbmConfig, IbmState};
use crate::model::{ModelParams, StateVec};
use crate::noise::{coarsen_increments, poisson_events, CellJump, Component, FixedNoise, JumpEvent, SeedSpec};
use crate::scheme::{GridSpec, SimOptions, Simulator};

/// Error components: J, A, E and their sum.
pub const ERROR_COMPONENTS: [&str; 4] = ["J", "A", "E", "total"];

/// Strong-error statistics of one level against the reference level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelError {
    pub level: usize,
    pub dt: f64,
    /// `sup_k Ê[(X − X̄)²(t_k)]` per component.
    pub sup_mse: [f64; 4],
    /// Standard error of the mean at the maximizing grid point.
    pub sup_se: [f64; 4],
    /// `Ê[(X − X̄)²(T)]` per component.
    pub terminal_mse: [f64; 4],
    pub terminal_se: [f64; 4],
    /// Jump events that shared a cell with an earlier one, summed over paths.
    pub dropped_jumps: u64,
}

/// Error table across levels with fitted orders.
#[derive(Debug, Clone, PartialEq)]
pub struct StrongErrorCurve {
    pub rows: Vec<LevelError>,
    pub reference_dt: f64,
    pub reference_dropped: u64,
    pub paths: usize,
    /// Slope of `log √(sup MSE)` against `log dt`, per component.
    pub sup_order: [f64; 4],
    pub terminal_order: [f64; 4],
}

impl StrongErrorCurve {
    /// True when the sup errors of component `c` decrease from level to
    /// level, allowing `z` combined standard errors of Monte Carlo noise.
    pub fn is_decreasing(&self, c: usize, z: f64) -> bool {
        self.rows.windows(2).all(|w| {
            let se = (w[0].sup_se[c].powi(2) + w[1].sup_se[c].powi(2)).sqrt();
            w[1].sup_mse[c] < w[0].sup_mse[c] + z * se
        })
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn order(dts: &[f64], mse: &[f64]) -> f64 {
    if mse.iter().any(|m| !(*m > 0.0)) {
        return f64::NAN;
    }
    let lx: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ly: Vec<f64> = mse.iter().map(|m| 0.5 * m.ln()).collect();
    fit_slope(&lx, &ly)
}

/// Place each event in the cell containing it; only the first one per cell
/// is kept. Returns the per-cell jumps and the number dropped.
pub fn assign_jumps(events: &[JumpEvent], dt: f64, n_steps: usize) -> (Vec<Option<CellJump>>, u64) {
    let mut cells = vec![None; n_steps];
    let mut dropped = 0;
    for ev in events {
        let k = ((ev.time / dt) as usize).min(n_steps - 1);
        if cells[k].is_some() {
            dropped += 1;
        } else {
            cells[k] = Some(CellJump {
                offset: ev.time - k as f64 * dt,
                mark: ev.mark,
            });
        }
    }
    (cells, dropped)
}

/// Coupled inputs of one trajectory at every level, coarsest first; the last
/// entry is the reference level.
pub fn coupled_noise(seed: SeedSpec, params: &ModelParams, t_end: f64, base_steps: usize, levels: usize) -> (Vec<FixedNoise>, Vec<u64>) {
    let finest = base_steps << levels;
    let sd = (t_end / finest as f64).sqrt();
    let comps = [Component::J, Component::A, Component::E, Component::P];
    let mut dw: [Vec<f64>; 4] = comps.map(|c| {
        let mut s = seed.stream(c);
        (0..finest).map(|_| sd * s.standard_normal()).collect()
    });
    let events = poisson_events(&mut seed.stream(Component::Jumps), params.jumps.lambda, t_end, &params.jumps.marks);

    let mut out = Vec::with_capacity(levels + 1);
    let mut dropped = Vec::with_capacity(levels + 1);
    for level in (0..=levels).rev() {
        let n = base_steps << level;
        let (jumps, d) = assign_jumps(&events, t_end / n as f64, n);
        out.push(FixedNoise { dw: dw.clone(), jumps });
        dropped.push(d);
        if level > 0 {
            dw = dw.map(|w| coarsen_increments(&w));
        }
    }
    out.reverse();
    dropped.reverse();
    (out, dropped)
}

/// Squared differences at coarse points, `[level][point][component]`.
type PathErrors = (Vec<Vec<[f64; 4]>>, Vec<u64>);

fn path_errors(sims: &[Simulator], x0: &StateVec, seed: SeedSpec, base_steps: usize) -> Result<PathErrors> {
    let levels = sims.len() - 1;
    let params = sims[0].params();
    let t_end = sims[0].grid().t_end;
    let (mut noise, dropped) = coupled_noise(seed, params, t_end, base_steps, levels);
    let mut runs = Vec::with_capacity(sims.len());
    for (sim, n) in sims.iter().zip(noise.iter_mut()) {
        runs.push(sim.run_with(x0, n, seed)?.states);
    }
    let reference = &runs[levels];
    let errs = runs[..levels]
        .iter()
        .map(|states| {
            states
                .iter()
                .zip(reference)
                .map(|(x, r)| {
                    let d = [(x.j - r.j).powi(2), (x.a - r.a).powi(2), (x.e - r.e).powi(2)];
                    [d[0], d[1], d[2], d[0] + d[1] + d[2]]
                })
                .collect()
        })
        .collect();
    Ok((errs, dropped))
}

/// Coupled strong errors of levels `dt₀ / 2^ℓ`, `ℓ = 0..levels`, against a
/// reference path at `dt₀ / 2^levels`. Brownian increments of a coarse level
/// are sums of the reference increments, and every level sees the same
/// jump events.
#[allow(clippy::too_many_arguments)]
pub fn strong_error_curve(
    params: &ModelParams,
    x0: &StateVec,
    t_end: f64,
    base_steps: usize,
    levels: usize,
    paths: usize,
    master_seed: u64,
    opts: SimOptions,
) -> Result<StrongErrorCurve> {
    if levels < 2 {
        return Err(param(format!("need at least 2 levels, got {levels}")));
    }
    if paths < 2 {
        return Err(param("need at least 2 coupled paths"));
    }
    let sims = (0..=levels)
        .map(|l| {
            let grid = GridSpec::new(t_end, base_steps << l)?;
            Simulator::new(params, grid, opts.with_stride(1 << l))
        })
        .collect::<Result<Vec<_>>>()?;

    let chunk = 64;
    let n_chunks = paths.div_ceil(chunk);
    let points = base_steps + 1;
    let zero = || (vec![vec![[0.0; 4]; points]; levels], vec![vec![[0.0; 4]; points]; levels], vec![0u64; levels + 1]);
    let partials = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let (mut s1, mut s2, mut dropped) = zero();
            for i in c * chunk..((c + 1) * chunk).min(paths) {
                let seed = SeedSpec::new(master_seed, i as u64);
                let (errs, d) = path_errors(&sims, x0, seed, base_steps).map_err(|e| Error::Path {
                    index: i,
                    source: Box::new(e),
                })?;
                for (l, level) in errs.iter().enumerate() {
                    for (k, e) in level.iter().enumerate() {
                        for q in 0..4 {
                            s1[l][k][q] += e[q];
                            s2[l][k][q] += e[q] * e[q];
                        }
                    }
                }
                for (acc, x) in dropped.iter_mut().zip(d) {
                    *acc += x;
                }
            }
            Ok((s1, s2, dropped))
        })
        .collect::<Result<Vec<_>>>()?;

    let (mut s1, mut s2, mut dropped) = zero();
    for (p1, p2, d) in partials {
        for l in 0..levels {
            for k in 0..points {
                for q in 0..4 {
                    s1[l][k][q] += p1[l][k][q];
                    s2[l][k][q] += p2[l][k][q];
                }
            }
        }
        for (acc, x) in dropped.iter_mut().zip(d) {
            *acc += x;
        }
    }

    let m = paths as f64;
    let stats = |a: f64, b: f64| {
        let mean = a / m;
        let var = ((b - m * mean * mean) / (m - 1.0)).max(0.0);
        (mean, (var / m).sqrt())
    };
    let rows: Vec<LevelError> = (0..levels)
        .map(|l| {
            let mut row = LevelError {
                level: l,
                dt: sims[l].grid().dt(),
                sup_mse: [0.0; 4],
                sup_se: [0.0; 4],
                terminal_mse: [0.0; 4],
                terminal_se: [0.0; 4],
                dropped_jumps: dropped[l],
            };
            for q in 0..4 {
                for k in 0..points {
                    let (mean, se) = stats(s1[l][k][q], s2[l][k][q]);
                    if mean > row.sup_mse[q] || k == 0 {
                        row.sup_mse[q] = mean;
                        row.sup_se[q] = se;
                    }
                }
                let (mean, se) = stats(s1[l][points - 1][q], s2[l][points - 1][q]);
                row.terminal_mse[q] = mean;
                row.terminal_se[q] = se;
            }
            row
        })
        .collect();
    let dts: Vec<f64> = rows.iter().map(|r| r.dt).collect();
    let fit = |f: fn(&LevelError) -> [f64; 4]| {
        let mut o = [0.0; 4];
        for (q, slot) in o.iter_mut().enumerate() {
            let v: Vec<f64> = rows.iter().map(|r| f(r)[q]).collect();
            *slot = order(&dts, &v);
        }
        o
    };
    let sup_order = fit(|r| r.sup_mse);
    let terminal_order = fit(|r| r.terminal_mse);
    Ok(StrongErrorCurve {
        reference_dt: sims[levels].grid().dt(),
        reference_dropped: dropped[levels],
        paths,
        sup_order,
        terminal_order,
        rows,
    })
}

/// Ensemble mean and variance curves of `(j, a, e)` on a reporting grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentCurves {
    pub times: Vec<f64>,
    /// `[time][component]`.
    pub mean: Vec<[f64; 3]>,
    pub var: Vec<[f64; 3]>,
    pub samples: usize,
}

impl MomentCurves {
    fn from_samples(times: Vec<f64>, samples: &[Vec<[f64; 3]>]) -> Self {
        let n_t = times.len();
        let mut mean = vec![[0.0; 3]; n_t];
        let mut var = vec![[0.0; 3]; n_t];
        for k in 0..n_t {
            for c in 0..3 {
                let v: Vec<f64> = samples.iter().map(|s| s[k][c]).collect();
                let (m, s2) = mean_var(&v);
                mean[k][c] = m;
                var[k][c] = s2;
            }
        }
        Self {
            times,
            mean,
            var,
            samples: samples.len(),
        }
    }
}

/// Distance between the chain with `n` agents and the limit system.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanfieldRow {
    pub n: u64,
    /// `sup_t max_c |mean_ibm − mean_limit|`.
    pub distance: f64,
    /// Standard error of the gap at the maximizing time and component.
    pub se: f64,
    /// `sup_t |mean gap|` per component.
    pub mean_gap: [f64; 3],
    /// `sup_t |variance gap|` per component.
    pub var_gap: [f64; 3],
    pub clamped: bool,
    pub incomplete: usize,
    pub mean_events: f64,
    pub curves: MomentCurves,
}

/// Chain-versus-limit distances across `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanfieldTable {
    pub rows: Vec<MeanfieldRow>,
    pub limit: MomentCurves,
}

impl MeanfieldTable {
    /// True when each distance is below the previous one plus `z` combined
    /// standard errors.
    pub fn is_decreasing(&self, z: f64) -> bool {
        self.rows.windows(2).all(|w| {
            let se = (w[0].se.powi(2) + w[1].se.powi(2)).sqrt();
            w[1].distance < w[0].distance + z * se
        })
    }
}

/// Mean and variance curves of the limit system.
pub fn limit_curves(params: &ModelParams, settings: &IbmSettings, master_seed: u64) -> Result<MomentCurves> {
    if settings.limit_steps % settings.report_points != 0 {
        return Err(param(format!(
            "limit steps {} must be a multiple of the report points {}",
            settings.limit_steps, settings.report_points
        )));
    }
    let lp = limit_params(params, settings.gamma);
    let grid = GridSpec::new(settings.t_end, settings.limit_steps)?;
    let opts = SimOptions::default().with_stride(settings.limit_steps / settings.report_points);
    let sim = Simulator::new_unvalidated(&lp, grid, opts)?;
    let (j0, a0, e0) = settings.x0;
    let x0 = StateVec::new(j0, a0, e0, lp.price.p0);
    let samples = (0..settings.limit_paths)
        .into_par_iter()
        .map(|i| {
            let rec = sim.run(&x0, SeedSpec::new(master_seed, i as u64))?;
            Ok(rec.states.iter().map(|s| [s.j, s.a, s.e]).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let times = (0..=settings.report_points)
        .map(|i| settings.t_end * i as f64 / settings.report_points as f64)
        .collect();
    Ok(MomentCurves::from_samples(times, &samples))
}

/// Chain ensembles for each `n` compared with the limit system started from
/// the same scaled state.
pub fn meanfield_error(params: &ModelParams, settings: &IbmSettings, master_seed: u64) -> Result<MeanfieldTable> {
    if settings.n_list.iter().any(|&n| n < 2) || settings.n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(param("agent counts must be increasing and at least 2"));
    }
    if settings.replicas < 2 || settings.limit_paths < 2 {
        return Err(param("need at least 2 replicas and 2 limit paths"));
    }
    let limit = limit_curves(params, settings, master_seed ^ 0x6c69_6d69_74)?;
    let (j0, a0, e0) = settings.x0;
    let mut rows = Vec::with_capacity(settings.n_list.len());
    for &n in &settings.n_list {
        let n = n as u64;
        let cfg = IbmConfig {
            event_limit: settings.event_limit,
            ..IbmConfig::new(n, settings.gamma, params.clone(), settings.time_rescale)?
        };
        let x0 = IbmState::from_scaled(n, j0, a0, e0)?;
        let paths = (0..settings.replicas)
            .into_par_iter()
            .map(|i| simulate_ibm(&cfg, x0, settings.t_end, settings.report_points, SeedSpec::new(master_seed ^ (n << 32), i as u64)))
            .collect::<Result<Vec<_>>>()?;
        let incomplete = paths.iter().filter(|p| !p.complete).count();
        if incomplete > 0 {
            return Err(Error::EventBudget {
                limit: settings.event_limit,
                time: paths.iter().filter(|p| !p.complete).map(|p| *p.times.last().unwrap_or(&0.0)).fold(f64::INFINITY, f64::min),
            });
        }
        let clamped = paths.iter().any(|p| p.clamped);
        let mean_events = paths.iter().map(|p| p.total_events as f64).sum::<f64>() / paths.len() as f64;
        let samples: Vec<Vec<[f64; 3]>> = paths
            .iter()
            .map(|p| p.states.iter().map(|s| [s.j(), s.a(), s.e()]).collect())
            .collect();
        let curves = MomentCurves::from_samples(limit.times.clone(), &samples);

        let mut row = MeanfieldRow {
            n,
            distance: 0.0,
            se: 0.0,
            mean_gap: [0.0; 3],
            var_gap: [0.0; 3],
            clamped,
            incomplete,
            mean_events,
            curves,
        };
        let m_ibm = settings.replicas as f64;
        let m_lim = settings.limit_paths as f64;
        for k in 0..limit.times.len() {
            for c in 0..3 {
                let gap = (row.curves.mean[k][c] - limit.mean[k][c]).abs();
                row.mean_gap[c] = row.mean_gap[c].max(gap);
                row.var_gap[c] = row.var_gap[c].max((row.curves.var[k][c] - limit.var[k][c]).abs());
                if gap > row.distance {
                    row.distance = gap;
                    row.se = (row.curves.var[k][c] / m_ibm + limit.var[k][c] / m_lim).sqrt();
                }
            }
        }
        rows.push(row);
    }
    Ok(MeanfieldTable { rows, limit })
}
