//! Ensembles and long-run diagnostics: densities, extinction frequencies,
//! Lyapunov slopes, the closed-form extinction criterion, moment curves and
//! occupation measures.

use rayon::prelude::*;

use crate::config::{params_hash, InitSpec};
use crate::error::{param, Error, Result};
use crate::model::ModelParams;
use crate::noise::SeedSpec;
use crate::scheme::{GridSpec, PathRecord, SimOptions, Simulator};

/// Per-path summary over the recorded states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSummary {
    pub final_total: f64,
    pub min_total: f64,
    pub extinct: bool,
}

/// Independent paths sharing grid and parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub paths: Vec<PathRecord>,
    pub master_seed: u64,
    pub params_hash: String,
    pub threshold: f64,
    pub summaries: Vec<PathSummary>,
}

impl Ensemble {
    /// Assemble an ensemble and recompute the summaries.
    pub fn from_paths(paths: Vec<PathRecord>, master_seed: u64, params_hash: String, threshold: f64) -> Result<Self> {
        let first = paths.first().ok_or_else(|| Error::Undefined("ensemble has no paths".into()))?;
        let (grid, stride, len) = (first.grid, first.record_stride, first.states.len());
        if paths.iter().any(|p| p.grid != grid || p.record_stride != stride || p.states.len() != len) {
            return Err(param("ensemble paths must share grid and recording stride"));
        }
        let summaries = paths
            .iter()
            .map(|p| {
                let final_total = p.final_state().total();
                PathSummary {
                    final_total,
                    min_total: p.states.iter().map(|s| s.total()).fold(f64::INFINITY, f64::min),
                    extinct: final_total < threshold,
                }
            })
            .collect();
        Ok(Self {
            paths,
            master_seed,
            params_hash,
            threshold,
            summaries,
        })
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn grid(&self) -> GridSpec {
        self.paths[0].grid
    }

    /// Recorded times, shared by every path.
    pub fn times(&self) -> Vec<f64> {
        self.paths[0].times().collect()
    }

    /// `J + A` of every path at record index `i`.
    pub fn totals_at(&self, i: usize) -> Vec<f64> {
        self.paths.iter().map(|p| p.states[i].total()).collect()
    }
}

/// Simulate `m` paths; path `i` uses `SeedSpec::new(master_seed, i)`.
/// The result does not depend on the number of threads.
pub fn run_ensemble(params: &ModelParams, init: &InitSpec, grid: GridSpec, m: usize, master_seed: u64, opts: SimOptions, threshold: f64) -> Result<Ensemble> {
    if m == 0 {
        return Err(param("ensemble size must be at least 1"));
    }
    let sim = Simulator::new(params, grid, opts)?;
    let p0 = params.price.p0;
    let paths = (0..m)
        .into_par_iter()
        .map(|i| {
            let seed = SeedSpec::new(master_seed, i as u64);
            let x0 = init.sample(seed, p0);
            sim.run(&x0, seed).map_err(|e| Error::Path {
                index: i,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ensemble::from_paths(paths, master_seed, params_hash(params), threshold)
}

/// Histogram range and resolution. Without bounds the range is the data range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinSpec {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub bins: usize,
}

impl BinSpec {
    pub fn auto(bins: usize) -> Self {
        Self { lo: None, hi: None, bins }
    }

    pub fn fixed(lo: f64, hi: f64, bins: usize) -> Self {
        Self {
            lo: Some(lo),
            hi: Some(hi),
            bins,
        }
    }

    fn edges(&self, values: impl Iterator<Item = f64> + Clone) -> Result<Vec<f64>> {
        if self.bins == 0 {
            return Err(param("histogram needs at least one bin"));
        }
        let (dmin, dmax) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        let mut lo = self.lo.unwrap_or(dmin);
        let mut hi = self.hi.unwrap_or(dmax);
        if !(lo.is_finite() && hi.is_finite()) || hi < lo {
            return Err(param(format!("invalid histogram range [{lo}, {hi}]")));
        }
        if hi == lo {
            lo -= 0.5;
            hi += 0.5;
        }
        let w = (hi - lo) / self.bins as f64;
        Ok((0..=self.bins).map(|i| if i == self.bins { hi } else { lo + w * i as f64 }).collect())
    }
}

fn bin_index(edges: &[f64], v: f64) -> Option<usize> {
    let bins = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[bins]);
    if !(v >= lo && v <= hi) {
        return None;
    }
    let i = ((v - lo) / (hi - lo) * bins as f64) as usize;
    Some(i.min(bins - 1))
}

/// One-dimensional density table with explicit bin edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// `count / (n · width)`; integrates to the in-range fraction.
    pub density: Vec<f64>,
    pub n: usize,
    pub underflow: u64,
    pub overflow: u64,
}

impl Histogram {
    pub fn width(&self, i: usize) -> f64 {
        self.edges[i + 1] - self.edges[i]
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Fraction of values in bins whose upper edge is at most `x`.
    pub fn mass_below(&self, x: f64) -> f64 {
        let c: u64 = (0..self.counts.len()).filter(|&i| self.edges[i + 1] <= x).map(|i| self.counts[i]).sum();
        (c + self.underflow) as f64 / self.n as f64
    }
}

/// Density histogram of `values`.
pub fn histogram(values: &[f64], spec: &BinSpec) -> Result<Histogram> {
    if values.is_empty() {
        return Err(Error::Undefined("histogram of an empty sample".into()));
    }
    let edges = spec.edges(values.iter().copied())?;
    let bins = edges.len() - 1;
    let mut counts = vec![0u64; bins];
    let (mut underflow, mut overflow) = (0, 0);
    for &v in values {
        match bin_index(&edges, v) {
            Some(i) => counts[i] += 1,
            None if v < edges[0] => underflow += 1,
            None => overflow += 1,
        }
    }
    let n = values.len();
    let density = (0..bins)
        .map(|i| counts[i] as f64 / (n as f64 * (edges[i + 1] - edges[i])))
        .collect();
    Ok(Histogram {
        edges,
        counts,
        density,
        n,
        underflow,
        overflow,
    })
}

/// Two-dimensional density table, row-major in `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram2d {
    pub x_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
    pub counts: Vec<f64>,
    pub density: Vec<f64>,
    pub n: usize,
    pub outside: u64,
}

impl Histogram2d {
    pub fn ny(&self) -> usize {
        self.y_edges.len() - 1
    }

    pub fn cell_area(&self, ix: usize, iy: usize) -> f64 {
        (self.x_edges[ix + 1] - self.x_edges[ix]) * (self.y_edges[iy + 1] - self.y_edges[iy])
    }

    /// Probability mass per cell.
    pub fn mass(&self) -> Vec<f64> {
        let total: f64 = self.counts.iter().sum();
        self.counts.iter().map(|c| c / total).collect()
    }
}

/// Joint density of `(x, y)` pairs.
pub fn joint_histogram(pairs: &[(f64, f64)], bx: &BinSpec, by: &BinSpec) -> Result<Histogram2d> {
    if pairs.is_empty() {
        return Err(Error::Undefined("histogram of an empty sample".into()));
    }
    let x_edges = bx.edges(pairs.iter().map(|p| p.0))?;
    let y_edges = by.edges(pairs.iter().map(|p| p.1))?;
    let (nx, ny) = (x_edges.len() - 1, y_edges.len() - 1);
    let mut counts = vec![0.0; nx * ny];
    let mut outside = 0;
    for &(x, y) in pairs {
        match (bin_index(&x_edges, x), bin_index(&y_edges, y)) {
            (Some(i), Some(k)) => counts[i * ny + k] += 1.0,
            _ => outside += 1,
        }
    }
    let n = pairs.len();
    let mut h = Histogram2d {
        x_edges,
        y_edges,
        counts,
        density: vec![0.0; nx * ny],
        n,
        outside,
    };
    for i in 0..nx {
        for k in 0..ny {
            h.density[i * ny + k] = h.counts[i * ny + k] / (n as f64 * h.cell_area(i, k));
        }
    }
    Ok(h)
}

/// Wilson score interval for `k` successes out of `n` at normal quantile `z`.
pub fn wilson_interval(k: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Fraction of paths below a biomass threshold at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtinctionEstimate {
    pub probability: f64,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub n: usize,
    /// Recorded time actually used.
    pub t: f64,
    /// True when the requested time was not a recorded time.
    pub snapped: bool,
}

/// Fraction of paths with `J + A < threshold` at time `t`, with a 95% Wilson interval.
pub fn extinction_probability(ens: &Ensemble, threshold: f64, t: f64) -> Result<ExtinctionEstimate> {
    if !(threshold >= 0.0) {
        return Err(param(format!("threshold {threshold} must be non-negative")));
    }
    let first = &ens.paths[0];
    let i = first.nearest_record(t);
    let t_used = first.grid.time(i * first.record_stride);
    let count = ens.paths.iter().filter(|p| p.states[i].total() < threshold).count();
    let n = ens.len();
    let (lo, hi) = wilson_interval(count, n, 1.959_963_984_540_054);
    Ok(ExtinctionEstimate {
        probability: count as f64 / n as f64,
        lo,
        hi,
        count,
        n,
        t: t_used,
        snapped: (t_used - t).abs() > 1e-9 * first.grid.t_end.max(1.0),
    })
}

/// Least-squares slope of `log(values)` against `times`.
pub fn lyapunov_slope(times: &[f64], values: &[f64]) -> Result<f64> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(Error::Undefined("slope needs at least two points".into()));
    }
    if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::Undefined("non-positive biomass in the fit window".into()));
    }
    let n = times.len() as f64;
    let mt = times.iter().sum::<f64>() / n;
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let ml = logs.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, l) in times.iter().zip(&logs) {
        sxy += (t - mt) * (l - ml);
        sxx += (t - mt) * (t - mt);
    }
    if sxx == 0.0 {
        return Err(Error::Undefined("fit window has a single time".into()));
    }
    Ok(sxy / sxx)
}

fn window_points(path: &PathRecord, window: (f64, f64)) -> (Vec<f64>, Vec<f64>) {
    let eps = 1e-9 * path.grid.t_end.max(1.0);
    path.times()
        .zip(&path.states)
        .filter(|(t, _)| *t >= window.0 - eps && *t <= window.1 + eps)
        .map(|(t, s)| (t, s.total()))
        .unzip()
}

/// Slope of `log(J + A)` over `window`; defaults to the last half of the horizon.
pub fn lyapunov_estimate(path: &PathRecord, window: Option<(f64, f64)>) -> Result<f64> {
    let w = window.unwrap_or((0.5 * path.grid.t_end, path.grid.t_end));
    let (t, v) = window_points(path, w);
    lyapunov_slope(&t, &v)
}

/// Distribution of per-path Lyapunov slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovSummary {
    /// Sorted slopes of the included paths.
    pub slopes: Vec<f64>,
    pub excluded: usize,
    pub window: (f64, f64),
}

impl LyapunovSummary {
    pub fn median(&self) -> f64 {
        quantile(&self.slopes, 0.5)
    }

    pub fn quantile(&self, q: f64) -> f64 {
        quantile(&self.slopes, q)
    }

    pub fn mean(&self) -> f64 {
        self.slopes.iter().sum::<f64>() / self.slopes.len() as f64
    }

    pub fn fraction_below(&self, x: f64) -> f64 {
        self.slopes.iter().filter(|s| **s < x).count() as f64 / self.slopes.len() as f64
    }
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let i = h.floor() as usize;
    let frac = h - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

/// Lyapunov slopes of every path; paths touching zero are excluded and counted.
pub fn lyapunov_ensemble(ens: &Ensemble, window: Option<(f64, f64)>) -> Result<LyapunovSummary> {
    let t_end = ens.grid().t_end;
    let w = window.unwrap_or((0.5 * t_end, t_end));
    let mut slopes = Vec::with_capacity(ens.len());
    let mut excluded = 0;
    for p in &ens.paths {
        match lyapunov_estimate(p, Some(w)) {
            Ok(s) => slopes.push(s),
            Err(_) => excluded += 1,
        }
    }
    if slopes.is_empty() {
        return Err(Error::Undefined(format!("all {excluded} paths excluded from the Lyapunov fit")));
    }
    slopes.sort_by(f64::total_cmp);
    Ok(LyapunovSummary {
        slopes,
        excluded,
        window: w,
    })
}

/// Closed-form sufficient condition for exponential extinction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtinctionCriterion {
    /// `sup r^(J)`.
    pub r_hat: f64,
    /// `min (m_A + F_A)`.
    pub m_check_a: f64,
    /// `min (m_J + F_J)`.
    pub m_check_j: f64,
    /// Uniform bound on the integrated jump sizes.
    pub m_bound: f64,
    pub eps1: f64,
    pub lambda: f64,
    pub sigma_a: f64,
    pub sigma_j: f64,
    /// `∫(φ_A² + φ_J²)dν` bounded.
    pub moment_ok: bool,
    /// `σ_A²/2 ∧ m̌_J + m̌_A − r̂ > 0`.
    pub drift_ok: bool,
    /// `min{m̌_J + σ_J²/2, m̌_A − r̂ + σ_A²/2} > Mλ/ε₁`.
    pub jump_ok: bool,
    /// Decay rate; meaningful only when every condition holds.
    pub eta: f64,
}

impl ExtinctionCriterion {
    pub fn passed(&self) -> bool {
        self.moment_ok && self.drift_ok && self.jump_ok
    }

    /// The decay rate when every condition holds.
    pub fn rate(&self) -> Option<f64> {
        (self.passed() && self.eta > 0.0).then_some(self.eta)
    }
}

/// Evaluate the extinction conditions. A price-modulated rate family
/// contributes 0 to infima.
pub fn extinction_criterion(params: &ModelParams) -> ExtinctionCriterion {
    let eco = &params.eco;
    let jp = &params.jumps;
    let r_hat = eco.r_j.sup();
    let m_check_a = eco.m_a + eco.f_a.inf();
    let m_check_j = eco.m_j + eco.f_j.inf();
    let (m_abs, m_sq) = jp.moment_bounds();
    let m_bound = m_abs.max(m_sq);
    let jump_term = if jp.lambda > 0.0 { m_bound * jp.lambda / jp.eps1 } else { 0.0 };
    let half_a = 0.5 * eco.sigma_a * eco.sigma_a;
    let half_j = 0.5 * eco.sigma_j * eco.sigma_j;
    let drift_ok = half_a.min(m_check_j) + m_check_a - r_hat > 0.0;
    let jump_ok = (m_check_j + half_j).min(m_check_a - r_hat + half_a) > jump_term;
    let eta = (half_a + m_check_a - r_hat - jump_term).min(m_check_j + half_j - jump_term);
    ExtinctionCriterion {
        r_hat,
        m_check_a,
        m_check_j,
        m_bound,
        eps1: jp.eps1,
        lambda: jp.lambda,
        sigma_a: eco.sigma_a,
        sigma_j: eco.sigma_j,
        moment_ok: m_sq.is_finite(),
        drift_ok,
        jump_ok,
        eta,
    }
}

/// Per-time empirical moments `E[(J + A)^p]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentCurve {
    pub order: f64,
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
    pub max: f64,
    pub argmax: f64,
}

/// Moment curve of total biomass.
pub fn moment_curve(ens: &Ensemble, p: f64) -> Result<MomentCurve> {
    if !(p >= 1.0) {
        return Err(param(format!("moment order {p} must be at least 1")));
    }
    let times = ens.times();
    let n = ens.len() as f64;
    let mut mean = Vec::with_capacity(times.len());
    let mut se = Vec::with_capacity(times.len());
    for i in 0..times.len() {
        let v: Vec<f64> = ens.paths.iter().map(|path| path.states[i].total().powf(p)).collect();
        let (m, var) = mean_var(&v);
        mean.push(m);
        se.push((var / n).sqrt());
    }
    let (k, max) = mean
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bk, bv), (k, &v)| if v > bv { (k, v) } else { (bk, bv) });
    Ok(MomentCurve {
        order: p,
        argmax: times[k],
        times,
        mean,
        se,
        max,
    })
}

/// Sample mean and unbiased variance (0 for a single value).
pub fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, var)
}

/// Time-averaged occupation of `(J, A)` cells by one path up to time `t`.
/// Points outside the grid are assigned to the nearest edge cell, so the
/// total mass is always 1.
pub fn occupation_measure(path: &PathRecord, t: f64, bj: &BinSpec, ba: &BinSpec) -> Result<Histogram2d> {
    let last = path.nearest_record(t);
    let pts: Vec<(f64, f64)> = path.states[..=last].iter().map(|s| (s.j, s.a)).collect();
    let x_edges = bj.edges(pts.iter().map(|p| p.0))?;
    let y_edges = ba.edges(pts.iter().map(|p| p.1))?;
    let clamp_to = |edges: &[f64], v: f64| v.clamp(edges[0], edges[edges.len() - 1]);
    let clamped: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (clamp_to(&x_edges, x), clamp_to(&y_edges, y))).collect();
    let fixed_x = BinSpec::fixed(x_edges[0], x_edges[x_edges.len() - 1], x_edges.len() - 1);
    let fixed_y = BinSpec::fixed(y_edges[0], y_edges[y_edges.len() - 1], y_edges.len() - 1);
    joint_histogram(&clamped, &fixed_x, &fixed_y)
}

/// Total variation distance between two mass vectors on the same cells.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Number of local maxima whose prominence exceeds `z` Poisson standard
/// deviations of the peak count. A side with no higher bar does not limit
/// the prominence, so the global maximum always counts.
pub fn significant_modes(h: &Histogram, z: f64) -> usize {
    let c: Vec<f64> = h.counts.iter().map(|&v| v as f64).collect();
    let n = c.len();
    (0..n)
        .filter(|&i| {
            let peak = c[i];
            let is_max = peak > 0.0 && (i == 0 || c[i - 1] < peak) && (i + 1 == n || c[i + 1] <= peak);
            if !is_max {
                return false;
            }
            let margin = z * peak.sqrt();
            let side_ok = |side: &mut dyn Iterator<Item = f64>| {
                let mut valley = peak;
                for v in side {
                    if v > peak {
                        return peak - valley > margin;
                    }
                    valley = valley.min(v);
                }
                true
            };
            side_ok(&mut c[..i].iter().rev().copied()) && side_ok(&mut c[i + 1..].iter().copied())
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{RateFamily, StateVec};
    use crate::noise::{Component, SeedSpec};
    use crate::presets;

    fn constant_path(x: StateVec, n: usize) -> PathRecord {
        PathRecord {
            grid: GridSpec::new(n as f64, n).unwrap(),
            record_stride: 1,
            states: vec![x; n + 1],
            jumps: vec![],
            seed: SeedSpec::default(),
            scheme: crate::scheme::SchemeTag::Exponential,
        }
    }

    #[test]
    fn histogram_single_value() {
        let h = histogram(&[3.0], &BinSpec::auto(5)).unwrap();
        assert_eq!(h.counts.iter().filter(|c| **c == 1).count(), 1);
        assert_eq!(h.counts.iter().sum::<u64>(), 1);
        assert!(histogram(&[], &BinSpec::auto(5)).is_err());
    }

    #[test]
    fn histogram_uniform_is_flat() {
        let mut s = SeedSpec::new(1, 0).stream(Component::Init);
        let n = 100_000;
        let v: Vec<f64> = (0..n).map(|_| s.uniform()).collect();
        let h = histogram(&v, &BinSpec::fixed(0.0, 1.0, 20)).unwrap();
        let mass: f64 = (0..20).map(|i| h.density[i] * h.width(i)).sum();
        assert!((mass - 1.0).abs() < 1e-12);
        assert_eq!(h.counts.iter().sum::<u64>() as usize, n);
        let p = 0.05;
        let se = (p * (1.0 - p) / n as f64).sqrt() / 0.05;
        for d in &h.density {
            assert!((d - 1.0).abs() < 4.0 * se, "{d}");
        }
    }

    #[test]
    fn joint_histogram_normalizes() {
        let pairs: Vec<(f64, f64)> = (0..1000).map(|i| ((i % 37) as f64, (i % 11) as f64 * 0.3)).collect();
        let h = joint_histogram(&pairs, &BinSpec::auto(7), &BinSpec::auto(4)).unwrap();
        let mass: f64 = (0..7)
            .flat_map(|i| (0..4).map(move |k| (i, k)))
            .map(|(i, k)| h.density[i * 4 + k] * h.cell_area(i, k))
            .sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wilson_interval_sane() {
        let (lo, hi) = wilson_interval(0, 100, 1.96);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
        let (lo, hi) = wilson_interval(50, 100, 1.96);
        assert!(lo < 0.5 && hi > 0.5);
    }

    #[test]
    fn extinction_thresholds() {
        let ens = Ensemble::from_paths(vec![constant_path(StateVec::new(1.0, 1.0, 0.5, 1.0), 10); 5], 0, "x".into(), 1e-6).unwrap();
        assert_eq!(extinction_probability(&ens, 0.0, 10.0).unwrap().probability, 0.0);
        assert_eq!(extinction_probability(&ens, f64::INFINITY, 10.0).unwrap().probability, 1.0);
        let off = extinction_probability(&ens, 1.0, 4.4).unwrap();
        assert!(off.snapped);
        assert_eq!(off.t, 4.0);
    }

    #[test]
    fn slope_of_exponential_decay() {
        let t: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
        let v: Vec<f64> = t.iter().map(|x| (-x).exp()).collect();
        assert!((lyapunov_slope(&t, &v).unwrap() + 1.0).abs() < 1e-9);
        let c = vec![2.0; t.len()];
        assert!(lyapunov_slope(&t, &c).unwrap().abs() < 1e-12);
        let mut z = v.clone();
        z[50] = 0.0;
        assert!(lyapunov_slope(&t, &z).is_err());
    }

    #[test]
    fn criterion_example() {
        let mut p = presets::extinction().params;
        p.eco.r_j = RateFamily::constant(0.3);
        let c = extinction_criterion(&p);
        assert!(c.passed());
        assert!((c.eta - 0.8).abs() < 1e-12, "{}", c.eta);
        assert!((c.m_check_a - 0.6).abs() < 1e-12 && (c.m_check_j - 0.4).abs() < 1e-12);

        p.eco.r_j = RateFamily::constant(1.2);
        let c = extinction_criterion(&p);
        assert!(!c.drift_ok);

        let mut z = p.clone();
        z.eco.r_j = RateFamily::zero();
        z.eco.m_a = 0.0;
        z.eco.m_j = 0.0;
        z.eco.sigma_a = 0.0;
        z.eco.sigma_j = 0.0;
        let c = extinction_criterion(&z);
        assert!(!c.passed());
        assert!(c.rate().is_none());
    }

    #[test]
    fn criterion_uses_jump_bound() {
        let mut p = presets::extinction().params;
        p.jumps = presets::dynamic_compliance().params.jumps;
        let c = extinction_criterion(&p);
        assert!(c.m_bound > 0.0);
        assert!(c.eta < 0.8);
    }

    #[test]
    fn moment_curve_of_constant_paths() {
        let ens = Ensemble::from_paths(vec![constant_path(StateVec::new(1.0, 2.0, 0.5, 1.0), 10); 3], 0, "x".into(), 0.0).unwrap();
        let m = moment_curve(&ens, 1.0).unwrap();
        assert!(m.mean.iter().all(|v| (*v - 3.0).abs() < 1e-12));
        assert_eq!(m.max, 3.0);
        assert!(moment_curve(&ens, 0.5).is_err());
    }

    #[test]
    fn occupation_of_constant_path_is_point_mass() {
        let p = constant_path(StateVec::new(1.0, 2.0, 0.5, 1.0), 10);
        let h = occupation_measure(&p, 10.0, &BinSpec::fixed(0.0, 4.0, 4), &BinSpec::fixed(0.0, 4.0, 4)).unwrap();
        let mass = h.mass();
        assert!((mass.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(mass.iter().filter(|m| **m > 0.0).count(), 1);
        assert_eq!(total_variation(&mass, &mass), 0.0);
    }

    #[test]
    fn ensemble_is_thread_independent() {
        let s = presets::dynamic_compliance();
        let grid = GridSpec::new(2.0, 100).unwrap();
        let run = || run_ensemble(&s.params, &s.run.init, grid, 16, 7, s.sim_options().with_stride(10), 1e-4);
        let a = run().unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(run).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 16);

        let single = crate::scheme::Simulator::new(&s.params, grid, s.sim_options().with_stride(10))
            .unwrap()
            .run(&s.initial_state(), SeedSpec::new(7, 0))
            .unwrap();
        assert_eq!(a.paths[0], single);
    }

    #[test]
    fn mode_counting() {
        let make = |counts: Vec<u64>| Histogram {
            edges: (0..=counts.len()).map(|i| i as f64).collect(),
            density: vec![0.0; counts.len()],
            n: counts.iter().sum::<u64>() as usize,
            counts,
            underflow: 0,
            overflow: 0,
        };
        assert_eq!(significant_modes(&make(vec![1, 10, 100, 400, 120, 20, 2]), 3.0), 1);
        assert_eq!(significant_modes(&make(vec![400, 50, 10, 50, 400]), 3.0), 2);
        assert_eq!(significant_modes(&make(vec![100, 102, 99, 101, 100]), 3.0), 1);
    }
}
