//! Statistics tables written for every ensemble. `simulate`, `sweep` and
//! `analyze` all go through [`write_statistics`], so a stored ensemble
//! reproduces the in-run files byte for byte.

use std::path::Path;

use kelpsim::analysis::{extinction_probability, histogram, lyapunov_ensemble, mean_var, moment_curve, BinSpec, Ensemble};
use kelpsim::io::{path_table, Table};
use kelpsim::Result;

pub const DENSITY_FILE: &str = "density.tsv";
pub const EXTINCTION_FILE: &str = "extinction.tsv";
pub const SUMMARY_FILE: &str = "summary.tsv";
pub const STATISTICS_FILES: [&str; 3] = [DENSITY_FILE, EXTINCTION_FILE, SUMMARY_FILE];

fn tag(t: &mut Table, ens: &Ensemble) {
    t.meta("params_hash", &ens.params_hash)
        .meta("master_seed", ens.master_seed)
        .meta("paths", ens.len());
}

/// Histograms of `J + A` at every recorded time on a shared range.
pub fn density_table(ens: &Ensemble, bins: usize) -> Result<Table> {
    let times = ens.times();
    let hi = ens
        .paths
        .iter()
        .flat_map(|p| p.states.iter().map(|s| s.total()))
        .fold(0.0, f64::max);
    let spec = BinSpec::fixed(0.0, if hi > 0.0 { hi } else { 1.0 }, bins);
    let mut t = Table::new(&["t", "bin_lo", "bin_hi", "count", "density"]);
    tag(&mut t, ens);
    t.meta("variable", "J+A").meta("bins", bins);
    for (i, time) in times.iter().enumerate() {
        let h = histogram(&ens.totals_at(i), &spec)?;
        for b in 0..bins {
            t.push_raw(vec![
                time.to_string(),
                h.edges[b].to_string(),
                h.edges[b + 1].to_string(),
                h.counts[b].to_string(),
                h.density[b].to_string(),
            ]);
        }
    }
    Ok(t)
}

/// Fraction of paths below the threshold at every recorded time.
pub fn extinction_table(ens: &Ensemble) -> Result<Table> {
    let mut t = Table::new(&["t", "probability", "ci_lo", "ci_hi", "count"]);
    tag(&mut t, ens);
    t.meta("threshold", ens.threshold).meta("interval", "wilson-95");
    for time in ens.times() {
        let e = extinction_probability(ens, ens.threshold, time)?;
        t.push(&[e.t, e.probability, e.lo, e.hi, e.count as f64]);
    }
    Ok(t)
}

/// Scalar summaries as `statistic value` rows.
pub fn summary_table(ens: &Ensemble) -> Result<Table> {
    let finals: Vec<f64> = ens.summaries.iter().map(|s| s.final_total).collect();
    let (mean, var) = mean_var(&finals);
    let mut sorted = finals.clone();
    sorted.sort_by(f64::total_cmp);
    let min_total = ens.summaries.iter().map(|s| s.min_total).fold(f64::INFINITY, f64::min);
    let extinct = ens.summaries.iter().filter(|s| s.extinct).count();
    let moments = moment_curve(ens, 1.0)?;

    let mut t = Table::new(&["statistic", "value"]);
    tag(&mut t, ens);
    let mut row = |k: &str, v: f64| t.push_raw(vec![k.to_string(), v.to_string()]);
    row("final_mean", mean);
    row("final_sd", var.sqrt());
    row("final_cv", var.sqrt() / mean);
    row("final_q05", kelpsim::analysis::quantile(&sorted, 0.05));
    row("final_median", kelpsim::analysis::quantile(&sorted, 0.5));
    row("final_q95", kelpsim::analysis::quantile(&sorted, 0.95));
    row("extinct_fraction", extinct as f64 / ens.len() as f64);
    row("min_total", min_total);
    row("max_mean_total", moments.max);
    row("argmax_mean_total", moments.argmax);
    match lyapunov_ensemble(ens, None) {
        Ok(l) => {
            row("lyapunov_median", l.median());
            row("lyapunov_q05", l.quantile(0.05));
            row("lyapunov_q95", l.quantile(0.95));
            row("lyapunov_excluded", l.excluded as f64);
        }
        Err(_) => row("lyapunov_excluded", ens.len() as f64),
    }
    Ok(t)
}

/// Write the statistics files into `dir`.
pub fn write_statistics(ens: &Ensemble, bins: usize, dir: &Path) -> Result<()> {
    density_table(ens, bins)?.write(&dir.join(DENSITY_FILE))?;
    extinction_table(ens)?.write(&dir.join(EXTINCTION_FILE))?;
    summary_table(ens)?.write(&dir.join(SUMMARY_FILE))?;
    Ok(())
}

/// Write the first `count` paths as `paths/path_XXXXX.tsv`.
pub fn write_sample_paths(ens: &Ensemble, count: usize, dir: &Path) -> Result<()> {
    if count == 0 {
        return Ok(());
    }
    let sub = dir.join("paths");
    std::fs::create_dir_all(&sub)?;
    for (i, p) in ens.paths.iter().take(count).enumerate() {
        path_table(p).write(&sub.join(format!("path_{i:05}.tsv")))?;
    }
    Ok(())
}
