//! Topological entropy estimators: Bowen ball counting on a grid, curve
//! length growth, and braid entropy from Dynnikov coordinate growth with an
//! exact SL(2,Z) oracle for three strands. All values are in nats.

pub mod dynnikov;

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::braid::BraidWord;
use crate::dynamics::{transport_curve_partial, PolyCurve};
use crate::dynamics::{DiskMap, Point};
use crate::error::{Error, Result};
use crate::int::{ln_abs, Int};
use crate::stats::{fit_line, LineFit};
pub use dynnikov::{dynnikov_update, DynnikovCoord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Bowen,
    CurveGrowth,
    Dynnikov,
    Sl2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ErrorBar {
    /// Symmetric uncertainty (0 for closed forms).
    Value { value: f64 },
    /// The estimate bounds the entropy from below; `fit_stderr` is the
    /// regression error of the slope only.
    OneSidedLower { fit_stderr: f64 },
    /// Greedy covers of a finite grid undercount; treat as a rough lower
    /// estimate.
    BiasedLow { fit_stderr: f64 },
}

/// One point of the growth series behind an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub p: u32,
    /// ε for Bowen counts, 0 otherwise.
    pub scale: f64,
    /// Cover count, curve length or lamination norm.
    pub count: f64,
    pub log_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub value: f64,
    pub method: Method,
    pub params: serde_json::Value,
    pub error: ErrorBar,
    /// Range of p used by the slope fit.
    pub window: (u32, u32),
    pub series: Vec<SeriesRow>,
    /// False when a budget stopped the computation early.
    pub complete: bool,
}

impl EntropyEstimate {
    pub fn is_lower_bound(&self) -> bool {
        matches!(self.error, ErrorBar::OneSidedLower { .. })
    }
}

fn last_half(ps: &[u32]) -> usize {
    if ps.len() >= 4 {
        ps.len() / 2
    } else {
        0
    }
}

fn slope_fit(ps: &[u32], ys: &[f64]) -> (LineFit, (u32, u32)) {
    if ps.is_empty() {
        return (LineFit { intercept: 0.0, slope: 0.0, slope_stderr: 0.0 }, (0, 0));
    }
    let s = last_half(ps);
    let xs: Vec<f64> = ps[s..].iter().map(|&p| p as f64).collect();
    (fit_line(&xs, &ys[s..]), (ps[s], *ps.last().unwrap()))
}

/// Smallest (stride, degree) such that every residue class of `orbit` mod
/// stride has vanishing degree-th differences over the tail.
fn polynomial_tail(orbit: &[Vec<Int>], max_degree: usize) -> Option<(usize, usize)> {
    let tail = &orbit[orbit.len() / 2..];
    for stride in 1..=6 {
        for degree in 1..=max_degree {
            if tail.len() / stride < degree + 2 {
                continue;
            }
            let ok = (0..stride).all(|r| {
                let mut seq: Vec<Vec<Int>> = tail.iter().skip(r).step_by(stride).cloned().collect();
                for _ in 0..degree {
                    seq = seq.windows(2).map(|w| w[1].iter().zip(&w[0]).map(|(x, y)| x - y).collect()).collect();
                }
                let z = Int::from(0);
                seq.iter().all(|v| v.iter().all(|x| *x == z))
            });
            if ok {
                return Some((stride, degree));
            }
        }
    }
    None
}

/// Growth rate of ‖w^p c0‖₁. Orbits that are eventually periodic, or
/// eventually polynomial along residue classes, are detected exactly and
/// reported as 0; otherwise the value is the least-squares slope of the log
/// norm over the last half of p = 0..=p_max.
pub fn braid_entropy_dynnikov(w: &BraidWord, p_max: u32, c0: &DynnikovCoord) -> Result<EntropyEstimate> {
    if p_max < 8 {
        return Err(Error::Parameter(format!("p_max must be at least 8, got {p_max}")));
    }
    if w.n < 3 {
        return Ok(EntropyEstimate {
            value: 0.0,
            method: Method::Dynnikov,
            params: json!({ "p_max": p_max, "reason": "two strands" }),
            error: ErrorBar::Value { value: 0.0 },
            window: (0, p_max),
            series: Vec::new(),
            complete: true,
        });
    }
    if c0.n != w.n {
        return Err(Error::StrandMismatch(c0.n, w.n));
    }
    let mut c = c0.clone();
    let mut seen = HashSet::new();
    let mut periodic = None;
    let mut orbit = Vec::with_capacity(p_max as usize + 1);
    let mut ps = Vec::new();
    let mut ys = Vec::new();
    let mut series = Vec::new();
    for p in 0..=p_max {
        if p > 0 {
            c.apply_word(&w.letters);
        }
        if periodic.is_none() && !seen.insert(c.clone()) {
            periodic = Some(p);
        }
        let norm = c.l1_norm();
        let y = ln_abs(&norm);
        ps.push(p);
        ys.push(y);
        series.push(SeriesRow { p, scale: 0.0, count: y.exp(), log_value: y });
        orbit.push(c.a.iter().chain(&c.b).cloned().collect::<Vec<_>>());
    }
    let (fit, window) = slope_fit(&ps, &ys);
    let poly = if periodic.is_some() { None } else { polynomial_tail(&orbit, w.n - 1) };
    let (value, reason) = match (periodic, poly) {
        (Some(p), _) => (0.0, json!({ "periodic_from": p })),
        (None, Some((stride, degree))) => (0.0, json!({ "polynomial": { "stride": stride, "degree": degree } })),
        _ => (fit.slope.max(0.0), json!("slope")),
    };
    Ok(EntropyEstimate {
        value,
        method: Method::Dynnikov,
        params: json!({ "p_max": p_max, "n": w.n, "raw_slope": fit.slope, "reason": reason }),
        error: ErrorBar::OneSidedLower { fit_stderr: fit.slope_stderr },
        window,
        series,
        complete: true,
    })
}

/// Dynnikov growth from the default seed lamination.
pub fn braid_entropy(w: &BraidWord, p_max: u32) -> Result<EntropyEstimate> {
    if w.n < 3 {
        return braid_entropy_dynnikov(w, p_max, &DynnikovCoord::standard(3)?);
    }
    braid_entropy_dynnikov(w, p_max, &DynnikovCoord::standard(w.n)?)
}

/// log ρ(sl2_image(w)) for hyperbolic images, 0 otherwise.
pub fn braid_entropy_sl2(w: &BraidWord) -> Result<EntropyEstimate> {
    if w.n != 3 {
        return Err(Error::Parameter(format!("the SL(2,Z) oracle needs n = 3, got {}", w.n)));
    }
    let m = w.sl2_image()?;
    let t = m.trace();
    let value = if m.is_hyperbolic() {
        // ρ = (|t| + sqrt(t² − 4)) / 2, written to survive huge traces.
        let at = ln_abs(&t);
        let r = (-2.0 * at).exp() * 4.0;
        at + ((1.0 + (1.0 - r).sqrt()) / 2.0).ln()
    } else {
        0.0
    };
    Ok(EntropyEstimate {
        value,
        method: Method::Sl2,
        params: json!({ "trace": t.to_string() }),
        error: ErrorBar::Value { value: 0.0 },
        window: (0, 0),
        series: Vec::new(),
        complete: true,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BowenOptions {
    /// Strictly decreasing.
    pub eps_list: Vec<f64>,
    pub p_max: u32,
    /// Grid points per unit length.
    pub grid_density: usize,
    pub seed: u64,
}

impl Default for BowenOptions {
    fn default() -> Self {
        BowenOptions { eps_list: vec![0.2, 0.1, 0.05], p_max: 8, grid_density: 30, seed: 0 }
    }
}

/// Jittered square grid of the closed unit disk.
pub fn disk_grid(density: usize, seed: u64) -> Vec<Point> {
    let h = 1.0 / density as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ox, oy): (f64, f64) = (rng.gen::<f64>() * h, rng.gen::<f64>() * h);
    let k = density as i64 + 1;
    let mut pts = Vec::new();
    for i in -k..=k {
        for j in -k..=k {
            let p = Point::new(i as f64 * h + ox, j as f64 * h + oy);
            if p.norm() <= 1.0 {
                pts.push(p);
            }
        }
    }
    pts
}

fn greedy_cover(orbits: &[Vec<Point>], p: usize, eps: f64) -> usize {
    let mut centers: Vec<usize> = Vec::new();
    for (i, o) in orbits.iter().enumerate() {
        let covered = centers.iter().any(|&c| {
            let oc = &orbits[c];
            (0..=p).all(|k| o[k].dist(&oc[k]) < eps)
        });
        if !covered {
            centers.push(i);
        }
    }
    centers.len()
}

/// Greedy (p, ε)-cover counts of a grid under the Bowen metric. Only counts
/// below a quarter of the grid size enter the slope fit; above that the grid
/// cannot resolve further separation. The value is the slope at the smallest
/// ε that still resolves at least two powers.
pub fn bowen_entropy(f: &DiskMap, opts: &BowenOptions) -> Result<EntropyEstimate> {
    if opts.eps_list.is_empty() || opts.eps_list.windows(2).any(|w| w[1] >= w[0]) || opts.eps_list[0] <= 0.0 {
        return Err(Error::Parameter("eps_list must be positive and strictly decreasing".into()));
    }
    if opts.p_max == 0 || opts.grid_density < 2 {
        return Err(Error::Parameter("bowen_entropy needs p_max >= 1 and grid_density >= 2".into()));
    }
    let grid = disk_grid(opts.grid_density, opts.seed);
    let orbits: Vec<Vec<Point>> = grid
        .par_iter()
        .map(|x| {
            let mut o = Vec::with_capacity(opts.p_max as usize + 1);
            o.push(*x);
            for _ in 0..opts.p_max {
                let y = f.eval(o.last().unwrap())?;
                o.push(y);
            }
            Ok(o)
        })
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, u32)> =
        (0..opts.eps_list.len()).flat_map(|e| (0..=opts.p_max).map(move |p| (e, p))).collect();
    let counts: Vec<usize> =
        jobs.par_iter().map(|&(e, p)| greedy_cover(&orbits, p as usize, opts.eps_list[e])).collect();
    let cap = grid.len() / 4;
    let mut series = Vec::new();
    let mut slopes = Vec::new();
    let mut last = None;
    for (e, &eps) in opts.eps_list.iter().enumerate() {
        let mut ps = Vec::new();
        let mut ys = Vec::new();
        for p in 0..=opts.p_max {
            let m = counts[e * (opts.p_max as usize + 1) + p as usize];
            let y = (m as f64).ln();
            series.push(SeriesRow { p, scale: eps, count: m as f64, log_value: y });
            if m <= cap && ps.len() == p as usize {
                ps.push(p);
                ys.push(y);
            }
        }
        let fit = slope_fit(&ps, &ys);
        slopes.push(json!({ "eps": eps, "slope": fit.0.slope, "resolved_p": ps.last().copied().unwrap_or(0) }));
        if ps.len() >= 2 {
            last = Some((eps, fit));
        }
    }
    let (eps_used, (fit, window)) =
        last.unwrap_or((opts.eps_list[0], (LineFit { intercept: 0.0, slope: 0.0, slope_stderr: 0.0 }, (0, 0))));
    Ok(EntropyEstimate {
        value: fit.slope.max(0.0),
        method: Method::Bowen,
        params: json!({
            "eps_list": opts.eps_list,
            "p_max": opts.p_max,
            "grid_density": opts.grid_density,
            "grid_points": grid.len(),
            "seed": opts.seed,
            "per_eps": slopes,
            "eps_used": eps_used,
            "bits": fit.slope.max(0.0) / std::f64::consts::LN_2,
        }),
        error: ErrorBar::BiasedLow { fit_stderr: fit.slope_stderr },
        window,
        series,
        complete: last.is_some() && window.1 == opts.p_max,
    })
}

/// Growth rate of log length(f^p(c)). Stops at the first power whose
/// transport exceeds `budget` vertices and fits the completed prefix.
pub fn curve_growth(f: &DiskMap, c: &PolyCurve, p_max: u32, tol: f64, budget: usize) -> Result<EntropyEstimate> {
    if p_max == 0 {
        return Err(Error::Parameter("curve_growth needs p_max >= 1".into()));
    }
    let mut cur = c.clone();
    let mut ps = vec![0];
    let l0 = cur.length();
    let mut ys = vec![l0.ln()];
    let mut series = vec![SeriesRow { p: 0, scale: 0.0, count: l0, log_value: l0.ln() }];
    let mut complete = true;
    for p in 1..=p_max {
        let t = transport_curve_partial(f, &cur, tol, budget)?;
        if !t.complete {
            complete = false;
            break;
        }
        cur = t.curve;
        let l = cur.length();
        ps.push(p);
        ys.push(l.ln());
        series.push(SeriesRow { p, scale: 0.0, count: l, log_value: l.ln() });
    }
    let (fit, window) = slope_fit(&ps, &ys);
    Ok(EntropyEstimate {
        value: fit.slope.max(0.0),
        method: Method::CurveGrowth,
        params: json!({
            "p_max": p_max,
            "tol": tol,
            "budget": budget,
            "completed_p": ps.last().copied().unwrap_or(0),
            "vertices": cur.len(),
            "raw_slope": fit.slope,
        }),
        error: ErrorBar::OneSidedLower { fit_stderr: fit.slope_stderr },
        window,
        series,
        complete,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Primitive;

    fn golden() -> f64 {
        ((3.0 + 5f64.sqrt()) / 2.0).ln()
    }

    fn b3(l: &[i32]) -> BraidWord {
        BraidWord::new(3, l.to_vec()).unwrap()
    }

    #[test]
    fn sl2_values() {
        assert_eq!(braid_entropy_sl2(&b3(&[1])).unwrap().value, 0.0);
        assert!((braid_entropy_sl2(&b3(&[1, -2])).unwrap().value - golden()).abs() < 1e-14);
        assert!((braid_entropy_sl2(&b3(&[1, -2, 1, -2])).unwrap().value - 2.0 * golden()).abs() < 1e-13);
        assert!(braid_entropy_sl2(&BraidWord::new(4, vec![1]).unwrap()).is_err());
    }

    #[test]
    fn dynnikov_anchor() {
        let e = braid_entropy(&b3(&[1, -2]), 40).unwrap();
        assert!((e.value - golden()).abs() < 1e-2, "{}", e.value);
        assert!(e.is_lower_bound());
        assert_eq!(e.window, (20, 40));
    }

    #[test]
    fn dynnikov_zero_growth() {
        for w in [b3(&[]), b3(&[1]), b3(&[2, 2, 2]), b3(&[1, 2]), b3(&[1, 2, 1]), b3(&[-1, -1, -1, -1, -1])] {
            let e = braid_entropy(&w, 40).unwrap();
            assert_eq!(e.value, 0.0, "{:?}: {}", w.letters, e.params);
        }
        assert!(braid_entropy(&b3(&[1]), 7).is_err());
    }

    #[test]
    fn bowen_isometries_are_flat() {
        let opts = BowenOptions { eps_list: vec![0.3, 0.15], p_max: 5, grid_density: 10, seed: 1 };
        let id = bowen_entropy(&DiskMap::identity(), &opts).unwrap();
        assert_eq!(id.value, 0.0);
        let rot = bowen_entropy(&DiskMap::single(Primitive::RigidRotation { angle: 1.3 }).unwrap(), &opts).unwrap();
        assert!(rot.value < 0.05, "{}", rot.value);
        assert!(bowen_entropy(&DiskMap::identity(), &BowenOptions { eps_list: vec![0.1, 0.2], ..opts }).is_err());
    }

    #[test]
    fn curve_growth_isometry() {
        let c = PolyCurve::circle(Point::new(0.1, 0.0), 0.5, 64).unwrap();
        let rot = DiskMap::single(Primitive::RigidRotation { angle: 0.7 }).unwrap();
        let e = curve_growth(&rot, &c, 4, 1e-3, 10_000).unwrap();
        assert!(e.value < 1e-3 && e.complete);
        let e = curve_growth(&DiskMap::identity(), &c, 4, 1e-3, 10_000).unwrap();
        assert_eq!(e.value, 0.0);
    }
}
