//! Monte-Carlo experiment runner: NE distributions over ensembles,
//! concentration statistics versus dimension, chi fits, and the Lévy-bound
//! diagnostic.
//!
//! Determinism contract: sample `i` of a run is drawn from
//! `RngStream::new(seed, i)`, so results are identical for any worker count;
//! aggregation walks samples in index order.

mod chi;
mod special;

pub use chi::{chi_cdf, chi_fit, chi_mean, chi_pdf, chi_sample, ks_statistic, ChiFit};

use serde::{Deserialize, Serialize};

use crate::ensembles::{build_sampler, EnsembleSpec, RngStream, Sampler};
use crate::error::{Error, Result};
use crate::symmetry::ChargeFamily;
use crate::witness::NeWitness;

/// Lévy concentration constant c = 1/(18π³).
pub const LEVY_C: f64 = 1.0 / (18.0 * std::f64::consts::PI * std::f64::consts::PI * std::f64::consts::PI);

/// Declarative description of one NE-distribution experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub ensemble: EnsembleSpec,
    /// Witness charge family; defaults to the ensemble's own family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charge: Option<ChargeFamily>,
    pub samples: usize,
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Histogram bin count; Freedman-Diaconis when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub histogram_bins: Option<usize>,
}

fn default_workers() -> usize {
    1
}

impl ExperimentConfig {
    pub fn new(ensemble: EnsembleSpec, samples: usize, seed: u64) -> Self {
        ExperimentConfig {
            ensemble,
            charge: None,
            samples,
            seed,
            workers: 1,
            histogram_bins: None,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidConfig("samples must be >= 1".into()));
        }
        if let Some(bins) = self.histogram_bins {
            if bins < 2 {
                return Err(Error::InvalidConfig("histogram_bins must be >= 2".into()));
            }
        }
        Ok(())
    }

    /// The charge family driving both the ensemble and the witness, with the
    /// top-level `charge` field filling an ensemble that lacks one.
    pub fn resolved(&self) -> Result<(EnsembleSpec, ChargeFamily)> {
        let mut ensemble = self.ensemble.clone();
        let family = match (&self.charge, &ensemble.params.charge) {
            (Some(f), None) => {
                ensemble.params.charge = Some(f.clone());
                f.clone()
            }
            (Some(f), Some(_)) => f.clone(),
            (None, Some(f)) => f.clone(),
            (None, None) => {
                return Err(Error::MissingParam {
                    kind: "experiment".into(),
                    param: "charge",
                })
            }
        };
        Ok((ensemble, family))
    }
}

/// Histogram with explicit bin edges (`edges.len() == counts.len() + 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Build with a fixed bin count, or Freedman-Diaconis when `bins` is
    /// `None` (clamped to [2, 512]).
    pub fn build(values: &[f64], bins: Option<usize>) -> Histogram {
        assert!(!values.is_empty(), "histogram of empty sample set");
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let min = sorted[0];
        let max = *sorted.last().unwrap();
        let span = (max - min).max(1e-300);
        let n = sorted.len();
        let bins = bins.unwrap_or_else(|| {
            let q1 = sorted[(n - 1) / 4];
            let q3 = sorted[(3 * (n - 1)) / 4];
            let iqr = q3 - q1;
            if iqr <= 0.0 {
                2
            } else {
                let width = 2.0 * iqr / (n as f64).cbrt();
                ((span / width).ceil() as usize).clamp(2, 512)
            }
        });
        let mut counts = vec![0u64; bins];
        for &v in values {
            let mut b = ((v - min) / span * bins as f64) as usize;
            if b >= bins {
                b = bins - 1;
            }
            counts[b] += 1;
        }
        let edges = (0..=bins)
            .map(|i| min + span * i as f64 / bins as f64)
            .collect();
        Histogram { edges, counts }
    }
}

/// Summary statistics of one NE distribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistributionStats {
    /// Mean in bits.
    pub mean: f64,
    /// Bessel-corrected standard deviation in bits (0 for one sample).
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub histogram: Histogram,
    pub sample_count: usize,
}

impl DistributionStats {
    pub fn from_samples(values: &[f64], bins: Option<usize>) -> DistributionStats {
        assert!(!values.is_empty());
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        DistributionStats {
            mean,
            std,
            min,
            max,
            histogram: Histogram::build(values, bins),
            sample_count: values.len(),
        }
    }

    /// Standard error of the standard deviation, ≈ std/√(2(n−1)).
    pub fn std_standard_error(&self) -> f64 {
        if self.sample_count > 1 {
            self.std / (2.0 * (self.sample_count as f64 - 1.0)).sqrt()
        } else {
            0.0
        }
    }

    /// Fraction of samples with |x − mean| > alpha, estimated from the
    /// histogram. Bins that straddle the boundary count in full, so the
    /// estimate errs on the large side.
    pub fn tail_fraction(&self, alpha: f64) -> f64 {
        let (lo, hi) = (self.mean - alpha, self.mean + alpha);
        let mut outside = 0u64;
        for (i, &count) in self.histogram.counts.iter().enumerate() {
            let (left, right) = (self.histogram.edges[i], self.histogram.edges[i + 1]);
            if left < lo || right > hi {
                outside += count;
            }
        }
        outside as f64 / self.sample_count as f64
    }
}

/// Deterministic parallel map over sample indices: contiguous chunks, one
/// thread per chunk, results re-joined in index order.
pub fn parallel_map_indexed<T, F>(count: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = workers.max(1).min(count.max(1));
    if workers <= 1 {
        return (0..count).map(f).collect();
    }
    let chunk = count.div_ceil(workers);
    let mut out: Vec<Vec<T>> = Vec::with_capacity(workers);
    std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(workers);
        for w in 0..workers {
            let start = w * chunk;
            let end = ((w + 1) * chunk).min(count);
            let f = &f;
            handles.push(scope.spawn(move || (start..end).map(f).collect::<Vec<T>>()));
        }
        for h in handles {
            out.push(h.join().expect("sampler thread panicked"));
        }
    });
    out.into_iter().flatten().collect()
}

/// NE value of every sample, ordered by sample index.
pub fn run_ne_samples(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let (ensemble, family) = cfg.resolved()?;
    let sampler: Box<dyn Sampler> = build_sampler(&ensemble)?;
    let witness = NeWitness::from_family(&family)?;
    let values = parallel_map_indexed(cfg.samples, cfg.workers, |i| {
        let mut rng = RngStream::new(cfg.seed, i as u64);
        let rho = sampler.sample(&mut rng);
        witness.evaluate(&rho)
    });
    values.into_iter().collect()
}

/// Sample the ensemble, evaluate the NE witness, and aggregate.
pub fn run_ne_distribution(cfg: &ExperimentConfig) -> Result<DistributionStats> {
    let values = run_ne_samples(cfg)?;
    Ok(DistributionStats::from_samples(&values, cfg.histogram_bins))
}

/// Full experiment output: stats plus the chi fit when one is possible.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResults {
    pub config: ExperimentConfig,
    pub stats: DistributionStats,
    pub chi_fit: Option<ChiFit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_fit_error: Option<String>,
    pub wall_time_seconds: f64,
}

/// Run one experiment end to end. The echoed config has all defaulted
/// sampling parameters filled in, so fits stay comparable across runs; the
/// wall time is the only non-deterministic field of the result.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResults> {
    let start = std::time::Instant::now();
    let values = run_ne_samples(cfg)?;
    let stats = DistributionStats::from_samples(&values, cfg.histogram_bins);
    let (fit, fit_error) = match chi_fit(&values) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let mut config = cfg.clone();
    config.ensemble.resolve_defaults()?;
    Ok(ExperimentResults {
        config,
        stats,
        chi_fit: fit,
        chi_fit_error: fit_error,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Per-dimension outcome of a concentration sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepEntry {
    pub dims: Vec<usize>,
    pub stats: DistributionStats,
}

/// Concentration sweep report: per-dimension stats and the monotonicity of
/// the standard deviation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub entries: Vec<SweepEntry>,
    /// std(d_{i+1}) < std(d_i) at every step.
    pub std_strictly_decreasing: bool,
    /// The decrease additionally clears a 2-standard-error guard band, so
    /// Monte-Carlo noise cannot fake the trend.
    pub std_decreasing_with_guard: bool,
}

/// Run the configs in order (one per dimension setting) and report the
/// narrowing of the NE distribution.
pub fn concentration_sweep(configs: &[ExperimentConfig]) -> Result<SweepReport> {
    if configs.len() < 2 {
        return Err(Error::InvalidConfig(
            "concentration sweep needs at least two dimension settings".into(),
        ));
    }
    let mut entries = Vec::with_capacity(configs.len());
    for cfg in configs {
        let stats = run_ne_distribution(cfg)?;
        entries.push(SweepEntry {
            dims: cfg.ensemble.dims.clone(),
            stats,
        });
    }
    let mut strictly = true;
    let mut guarded = true;
    for pair in entries.windows(2) {
        let (a, b) = (&pair[0].stats, &pair[1].stats);
        strictly &= b.std < a.std;
        let guard = 2.0 * (a.std_standard_error() + b.std_standard_error());
        guarded &= b.std + guard < a.std;
    }
    Ok(SweepReport {
        entries,
        std_strictly_decreasing: strictly,
        std_decreasing_with_guard: guarded,
    })
}

/// One α row of the Lévy-bound diagnostic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevyEntry {
    pub alpha: f64,
    pub empirical_tail: f64,
    pub bound: f64,
    pub satisfied: bool,
}

/// Lévy-bound looseness diagnostic for an assumed purification dimension.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevyReport {
    pub assumed_dim: u64,
    pub entries: Vec<LevyEntry>,
    /// Largest purification dimension for which the bound survives every α
    /// of the grid (capped at 2^62). Large values mean the bound is loose.
    pub max_unviolated_dim: u64,
}

/// The concentration bound 2·exp(−c·D·α²/η²) with η = 4√2·log₂(D).
pub fn levy_bound(d: u64, alpha: f64) -> f64 {
    let d_eff = d.max(2) as f64;
    let eta = 4.0 * 2f64.sqrt() * d_eff.log2();
    2.0 * (-LEVY_C * d_eff * alpha * alpha / (eta * eta)).exp()
}

/// Compare empirical tails against the Lévy bound on an α grid for the
/// assumed purification dimension and find how far the dimension could grow
/// before the bound breaks.
pub fn levy_bound_check(
    stats: &DistributionStats,
    assumed_dim: u64,
    alpha_grid: &[f64],
) -> LevyReport {
    let entries: Vec<LevyEntry> = alpha_grid
        .iter()
        .map(|&alpha| {
            let empirical_tail = stats.tail_fraction(alpha);
            let bound = levy_bound(assumed_dim, alpha);
            LevyEntry {
                alpha,
                empirical_tail,
                bound,
                satisfied: empirical_tail <= bound,
            }
        })
        .collect();

    let holds = |d: u64| {
        alpha_grid
            .iter()
            .all(|&alpha| stats.tail_fraction(alpha) <= levy_bound(d, alpha))
    };
    const CAP: u64 = 1 << 62;
    let max_unviolated_dim = if !holds(2) {
        0
    } else if holds(CAP) {
        CAP
    } else {
        // The bound shrinks monotonically in D beyond small D, so bisect.
        let (mut lo, mut hi) = (2u64, CAP);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if holds(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    LevyReport {
        assumed_dim,
        entries,
        max_unviolated_dim,
    }
}

/// Histogram CSV: header `bin_lo,bin_hi,count`, shortest round-trip floats.
pub fn histogram_csv(h: &Histogram) -> String {
    let mut out = String::from("bin_lo,bin_hi,count\n");
    for (i, &count) in h.counts.iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", h.edges[i], h.edges[i + 1], count));
    }
    out
}

/// Static SVG of the histogram bars with the fitted chi pdf overlaid.
pub fn histogram_svg(stats: &DistributionStats, fit: Option<&ChiFit>, title: &str) -> String {
    let (w, h) = (640.0, 400.0);
    let (ml, mr, mt, mb) = (50.0, 15.0, 30.0, 40.0);
    let (pw, ph) = (w - ml - mr, h - mt - mb);
    let hist = &stats.histogram;
    let x_min = hist.edges[0];
    let x_max = *hist.edges.last().unwrap();
    let span = (x_max - x_min).max(1e-300);
    let n = stats.sample_count as f64;

    // Bars as densities so the pdf overlay shares the y axis.
    let densities: Vec<f64> = hist
        .counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let width = hist.edges[i + 1] - hist.edges[i];
            c as f64 / (n * width.max(1e-300))
        })
        .collect();
    let mut y_max = densities.iter().cloned().fold(0.0f64, f64::max);
    if let Some(f) = fit {
        for i in 0..=200 {
            let x = x_min + span * i as f64 / 200.0;
            y_max = y_max.max(chi_pdf(x, f.k, f.scale));
        }
    }
    let y_max = y_max.max(1e-300) * 1.05;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
        w / 2.0,
        title
    ));
    svg.push_str(&format!(
        "<rect x=\"{ml}\" y=\"{mt}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"#333\"/>\n"
    ));
    for (i, &d) in densities.iter().enumerate() {
        let x0 = ml + (hist.edges[i] - x_min) / span * pw;
        let x1 = ml + (hist.edges[i + 1] - x_min) / span * pw;
        let bar_h = d / y_max * ph;
        svg.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#7aa6c2\" stroke=\"#46788e\" stroke-width=\"0.5\"/>\n",
            x0,
            mt + ph - bar_h,
            (x1 - x0).max(0.1),
            bar_h
        ));
    }
    if let Some(f) = fit {
        let mut points = Vec::with_capacity(201);
        for i in 0..=200 {
            let x = x_min + span * i as f64 / 200.0;
            let y = chi_pdf(x, f.k, f.scale);
            points.push(format!(
                "{:.2},{:.2}",
                ml + (x - x_min) / span * pw,
                mt + ph - (y / y_max * ph).min(ph)
            ));
        }
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.5\"/>\n",
            points.join(" ")
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#c0392b\">chi fit: k={:.3}, s={:.4}</text>\n",
            ml + 8.0,
            mt + 16.0,
            f.k,
            f.scale
        ));
    }
    // Axis labels: min, max, and the mean tick.
    svg.push_str(&format!(
        "<text x=\"{ml}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{:.4}</text>\n",
        h - mb + 16.0,
        x_min
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{:.4}</text>\n",
        w - mr,
        h - mb + 16.0,
        x_max
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">NE (bits), mean {:.5}</text>\n",
        ml + pw / 2.0,
        h - 8.0,
        stats.mean
    ));
    svg.push_str("</svg>\n");
    svg
}
