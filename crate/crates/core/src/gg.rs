//! Monte-Carlo estimates of the integral of ψ∘γ(f, ·) over configurations
//! and its stabilization in the power of f.
//!
//! Sample i draws from its own ChaCha stream, so the sample set does not
//! depend on the thread count, and every reduction is a fixed-shape
//! pairwise sum over sample index.

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::braid::BraidWord;
use crate::cocycle::{extract_powers, TraceOptions};
use crate::dynamics::{Configuration, DiskMap, Point};
use crate::error::{Error, Result};
use crate::quasimorphism::BraidQm;
use crate::stats::{fit_line, mean_stderr, pairwise_sum, slope_weights};

const MAX_DRAWS_PER_SAMPLE: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCConfig {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    #[serde(default = "default_min_sep")]
    pub min_sep: f64,
    #[serde(default = "default_p_list")]
    pub p_list: Vec<u32>,
    #[serde(default)]
    pub trace: TraceOptions,
}

fn default_min_sep() -> f64 {
    1e-3
}

fn default_p_list() -> Vec<u32> {
    vec![1, 2, 4, 8]
}

impl MCConfig {
    pub fn new(n: usize, samples: usize, seed: u64, p_list: Vec<u32>) -> Self {
        MCConfig { n, samples, seed, min_sep: default_min_sep(), p_list, trace: TraceOptions::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Parameter("n must be at least 2".into()));
        }
        if self.samples == 0 {
            return Err(Error::Parameter("samples must be at least 1".into()));
        }
        if !(self.min_sep > 0.0) {
            return Err(Error::Parameter("min_sep must be positive".into()));
        }
        if self.p_list.is_empty() || self.p_list[0] == 0 || self.p_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parameter("p_list must be strictly increasing positive integers".into()));
        }
        self.trace.validate()
    }

    /// area(D²)^n
    pub fn volume_factor(&self) -> f64 {
        std::f64::consts::PI.powi(self.n as i32)
    }
}

/// Braids γ(f^p, x_i) for every sample i and every p in the list.
#[derive(Debug, Clone)]
pub struct BraidSamples {
    pub p_list: Vec<u32>,
    /// words[i][k] is the braid of sample i at power p_list[k].
    pub words: Vec<Vec<BraidWord>>,
    pub configurations: Vec<Configuration>,
    /// Draws rejected for min_sep.
    pub rejected_sep: usize,
    /// Draws rejected for degenerate or colliding traces.
    pub rejected_trace: usize,
}

impl BraidSamples {
    pub fn rejected(&self) -> usize {
        self.rejected_sep + self.rejected_trace
    }
}

fn uniform_disk<R: Rng>(rng: &mut R) -> Point {
    loop {
        let p = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if p.norm() < 1.0 {
            return p;
        }
    }
}

/// Uniform draw from configurations of n points in the open disk with
/// pairwise distance at least min_sep; returns the number of rejections.
pub fn draw_configuration<R: Rng>(rng: &mut R, n: usize, min_sep: f64) -> Result<(Configuration, usize)> {
    for tries in 0..MAX_DRAWS_PER_SAMPLE {
        let c = Configuration { points: (0..n).map(|_| uniform_disk(rng)).collect() };
        if c.min_separation() >= min_sep {
            return Ok((c, tries));
        }
    }
    Err(Error::Sampling(format!("min_sep {min_sep} rejected {MAX_DRAWS_PER_SAMPLE} draws in a row")))
}

fn sample_stream(seed: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng
}

/// Traces every sample through all powers in `mc.p_list`, sharing the
/// sampled configurations across powers.
pub fn sample_braids(f: &DiskMap, mc: &MCConfig) -> Result<BraidSamples> {
    mc.validate()?;
    let z = Configuration::base(mc.n);
    let per: Vec<Result<(Configuration, Vec<BraidWord>, usize, usize)>> = (0..mc.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_stream(mc.seed, i);
            let (mut sep, mut trace) = (0, 0);
            loop {
                let (x, r) = draw_configuration(&mut rng, mc.n, mc.min_sep)?;
                sep += r;
                match extract_powers(f, &x, &z, &mc.p_list, &mc.trace) {
                    Ok(rs) => return Ok((x, rs.into_iter().map(|r| r.word).collect(), sep, trace)),
                    Err(Error::Degeneracy(_)) | Err(Error::Collision(..)) => {
                        trace += 1;
                        if trace > MAX_DRAWS_PER_SAMPLE {
                            return Err(Error::Sampling("every draw gave a degenerate trace".into()));
                        }
                    }
                    Err(e) => return Err(e),
                }
            }
        })
        .collect();
    let mut out = BraidSamples {
        p_list: mc.p_list.clone(),
        words: Vec::with_capacity(mc.samples),
        configurations: Vec::with_capacity(mc.samples),
        rejected_sep: 0,
        rejected_trace: 0,
    };
    for r in per {
        let (x, w, sep, trace) = r?;
        out.configurations.push(x);
        out.words.push(w);
        out.rejected_sep += sep;
        out.rejected_trace += trace;
    }
    if out.rejected() > mc.samples {
        return Err(Error::Sampling(format!(
            "rejection rate {:.1}% exceeds 50% (min_sep too large?)",
            100.0 * out.rejected() as f64 / (out.rejected() + mc.samples) as f64
        )));
    }
    Ok(out)
}

/// values[k][i] = ψ(words[i][k]); words sharing a cache key are evaluated once.
pub fn evaluate(qm: &dyn BraidQm, s: &BraidSamples) -> Result<Vec<Vec<f64>>> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut unique: Vec<&BraidWord> = Vec::new();
    let mut slot: Vec<Vec<Option<usize>>> = Vec::with_capacity(s.words.len());
    for ws in &s.words {
        let mut row = Vec::with_capacity(ws.len());
        for w in ws {
            row.push(qm.cache_key(w).map(|k| {
                *index.entry(k).or_insert_with(|| {
                    unique.push(w);
                    unique.len() - 1
                })
            }));
        }
        slot.push(row);
    }
    let cached: Vec<f64> = unique.par_iter().map(|w| qm.value(w)).collect::<Result<_>>()?;
    let mut values = vec![vec![0.0; s.words.len()]; s.p_list.len()];
    let direct: Vec<Vec<f64>> = s
        .words
        .par_iter()
        .zip(slot.par_iter())
        .map(|(ws, row)| {
            ws.iter()
                .zip(row)
                .map(|(w, k)| match k {
                    Some(k) => Ok(cached[*k]),
                    None => qm.value(w),
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    for (i, row) in direct.into_iter().enumerate() {
        for (k, v) in row.into_iter().enumerate() {
            values[k][i] = v;
        }
    }
    Ok(values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub p: u32,
    /// Per-unit-volume mean of ψ∘γ(f^p, ·).
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
    pub rejected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GGEstimate {
    pub qm: String,
    /// Mean at the first power in the list, per unit volume.
    pub raw_mean: f64,
    pub std_err: f64,
    pub volume_factor: f64,
    /// Slope of the integral against p.
    pub stabilized: f64,
    /// One standard error of `stabilized`.
    pub ci: f64,
    pub per_p: Vec<PowerRow>,
}

impl GGEstimate {
    /// Stabilized value per unit volume.
    pub fn stabilized_mean(&self) -> f64 {
        self.stabilized / self.volume_factor
    }

    pub fn ci_mean(&self) -> f64 {
        self.ci / self.volume_factor
    }
}

/// Slope estimate from per-sample values at each power. The uncertainty
/// combines the spread of per-sample slopes (common random numbers) with
/// the residual scatter of the mean curve about its line.
pub fn estimate(name: &str, p_list: &[u32], values: &[Vec<f64>], rejected: usize, volume: f64) -> GGEstimate {
    let ps: Vec<f64> = p_list.iter().map(|&p| p as f64).collect();
    let per_p: Vec<PowerRow> = p_list
        .iter()
        .zip(values)
        .map(|(&p, v)| {
            let (mean, std_err) = mean_stderr(v);
            PowerRow { p, mean, std_err, samples: v.len(), rejected }
        })
        .collect();
    let n = values.first().map_or(0, |v| v.len());
    let slopes: Vec<f64> = if ps.len() == 1 {
        values[0].iter().map(|v| v / ps[0]).collect()
    } else {
        let w = slope_weights(&ps);
        (0..n).map(|i| pairwise_sum(&w.iter().zip(values).map(|(w, v)| w * v[i]).collect::<Vec<_>>())).collect()
    };
    let (slope, se_crn) = mean_stderr(&slopes);
    let means: Vec<f64> = per_p.iter().map(|r| r.mean).collect();
    let se_fit = fit_line(&ps, &means).slope_stderr;
    GGEstimate {
        qm: name.to_string(),
        raw_mean: per_p[0].mean,
        std_err: per_p[0].std_err,
        volume_factor: volume,
        stabilized: slope * volume,
        ci: (se_crn * se_crn + se_fit * se_fit).sqrt() * volume,
        per_p,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawEstimate {
    pub mean: f64,
    pub std_err: f64,
    /// volume_factor · mean
    pub integral: f64,
    pub samples: usize,
    pub rejected: usize,
}

/// Mean of ψ(γ(f, x)) over uniform configurations.
pub fn gg_raw(qm: &dyn BraidQm, f: &DiskMap, mc: &MCConfig) -> Result<RawEstimate> {
    let mc1 = MCConfig { p_list: vec![1], ..mc.clone() };
    let s = sample_braids(f, &mc1)?;
    let v = evaluate(qm, &s)?;
    let (mean, std_err) = mean_stderr(&v[0]);
    Ok(RawEstimate { mean, std_err, integral: mean * mc.volume_factor(), samples: mc.samples, rejected: s.rejected() })
}

pub fn gg_stab(qm: &dyn BraidQm, f: &DiskMap, mc: &MCConfig) -> Result<GGEstimate> {
    Ok(gg_stab_multi(&[qm], f, mc)?.remove(0))
}

/// Several integrands on one shared set of sampled braids.
pub fn gg_stab_multi(qms: &[&dyn BraidQm], f: &DiskMap, mc: &MCConfig) -> Result<Vec<GGEstimate>> {
    let s = sample_braids(f, mc)?;
    gg_from_samples(qms, &s, mc.volume_factor())
}

pub fn gg_from_samples(qms: &[&dyn BraidQm], s: &BraidSamples, volume: f64) -> Result<Vec<GGEstimate>> {
    qms.iter()
        .map(|qm| {
            let v = evaluate(*qm, s)?;
            Ok(estimate(&qm.name(), &s.p_list, &v, s.rejected(), volume))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VanishingReport {
    pub vanishes: bool,
    pub estimate: GGEstimate,
}

/// |stabilized| ≤ 3·ci for a map given by at most one primitive.
pub fn vanishing_check(qm: &dyn BraidQm, f: &DiskMap, mc: &MCConfig) -> Result<VanishingReport> {
    if f.steps.len() > 1 {
        return Err(Error::Parameter("vanishing check expects a single autonomous primitive".into()));
    }
    let estimate = gg_stab(qm, f, mc)?;
    Ok(VanishingReport { vanishes: estimate.stabilized.abs() <= 3.0 * estimate.ci, estimate })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceRow {
    pub delta: f64,
    /// Fraction of orbits returning within delta of their start by p_max.
    pub fraction: f64,
}

/// Return statistics of single-point orbits; deltas are sorted ascending.
pub fn recurrence(f: &DiskMap, samples: usize, seed: u64, deltas: &[f64], p_max: u32) -> Result<Vec<RecurrenceRow>> {
    let mut ds = deltas.to_vec();
    ds.sort_by(f64::total_cmp);
    let closest: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_stream(seed, i);
            let x = uniform_disk(&mut rng);
            let mut y = x;
            let mut best = f64::INFINITY;
            for _ in 0..p_max {
                y = f.eval(&y)?;
                best = best.min(y.dist(&x));
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    Ok(ds
        .into_iter()
        .map(|delta| RecurrenceRow {
            delta,
            fraction: closest.iter().filter(|&&c| c < delta).count() as f64 / samples.max(1) as f64,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Primitive;
    use crate::quasimorphism::Writhe;

    #[test]
    fn identity_is_zero() {
        let mc = MCConfig::new(3, 200, 1, vec![1, 2]);
        let e = gg_stab(&Writhe, &DiskMap::identity(), &mc).unwrap();
        assert_eq!(e.stabilized, 0.0);
        assert_eq!(e.ci, 0.0);
        assert!(e.per_p.iter().all(|r| r.mean == 0.0));
    }

    #[test]
    fn rejects_bad_configs() {
        let mut mc = MCConfig::new(3, 10, 1, vec![2, 1]);
        assert!(mc.validate().is_err());
        mc.p_list = vec![1, 2];
        mc.min_sep = 1.5;
        assert!(matches!(gg_raw(&Writhe, &DiskMap::identity(), &mc), Err(Error::Sampling(_))));
    }

    #[test]
    fn writhe_of_full_turn() {
        let f = DiskMap::single(Primitive::RigidRotation { angle: std::f64::consts::TAU }).unwrap();
        let mc = MCConfig::new(2, 300, 9, vec![1]);
        let a = gg_raw(&Writhe, &f, &mc).unwrap();
        let b = gg_raw(&Writhe, &f, &mc).unwrap();
        assert_eq!(a, b);
        // a full turn closes to the full twist whatever the connectors do
        assert_eq!(a.mean, 2.0);
    }

    #[test]
    fn recurrence_is_monotone() {
        let f = DiskMap::single(Primitive::RigidRotation { angle: 1.0 }).unwrap();
        let rows = recurrence(&f, 200, 3, &[0.3, 0.01, 0.1], 64).unwrap();
        assert!(rows.windows(2).all(|w| w[0].fraction <= w[1].fraction));
        assert!(rows[2].fraction > 0.9);
    }
}
