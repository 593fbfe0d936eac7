//! Braids traced by configurations moving under the canonical isotopy.
//!
//! Strands are ordered by their projection onto the axis direction; an
//! exchange of adjacent strands k, k+1 emits ±k, positive when the pair
//! turns counterclockwise. Motions are sampled and linearly
//! interpolated, and a trajectory word is accepted once it agrees with the
//! word at twice the sampling density.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::braid::{BraidKey, BraidWord};
use crate::dynamics::{Configuration, DiskMap, Point, Primitive, Step};
use crate::error::{Error, Result};

const TIE: f64 = 1e-10;
const COLLISION: f64 = 1e-12;
const FALLBACK_TURN: f64 = 0.618_033_988_749_894_8;
const MAX_ARC: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TraceOptions {
    /// Initial sampling step, as a fraction of one primitive's time slot.
    pub dt_init: f64,
    pub max_refine: u32,
    pub axis_angle: f64,
    /// Samples per unit length along connector segments (0: one segment).
    pub connector_speed: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { dt_init: 0.125, max_refine: 10, axis_angle: 0.1, connector_speed: 0.0 }
    }
}

impl TraceOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_init > 0.0 && self.dt_init <= 1.0) || self.max_refine < 1 {
            return Err(Error::Parameter("trace options need 0 < dt_init <= 1 and max_refine >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceResult {
    #[serde(flatten)]
    pub word: BraidWord,
    #[serde(rename = "refinements")]
    pub refinements_used: u32,
    pub degenerate_events: u32,
}

#[derive(Debug)]
enum Fault {
    /// A near tie that finer sampling may resolve.
    Tie,
    Hard(Error),
}

impl From<Error> for Fault {
    fn from(e: Error) -> Self {
        Fault::Hard(e)
    }
}

/// Crossing letters of the piecewise-linear motion through `frames`.
struct Projector {
    c: f64,
    s: f64,
}

impl Projector {
    fn new(angle: f64) -> Self {
        Projector { c: angle.cos(), s: angle.sin() }
    }

    fn uv(&self, p: &Point) -> (f64, f64) {
        (self.c * p.x + self.s * p.y, -self.s * p.x + self.c * p.y)
    }

    fn order(&self, pts: &[Point]) -> std::result::Result<Vec<usize>, Fault> {
        let mut idx: Vec<usize> = (0..pts.len()).collect();
        let u: Vec<f64> = pts.iter().map(|p| self.uv(p).0).collect();
        idx.sort_by(|&a, &b| u[a].total_cmp(&u[b]));
        for w in idx.windows(2) {
            if u[w[1]] - u[w[0]] < TIE {
                return Err(Fault::Tie);
            }
        }
        Ok(idx)
    }

    /// Letters for the straight-line interpolation a → b.
    fn interval(&self, a: &[Point], b: &[Point], out: &mut Vec<i32>) -> std::result::Result<(), Fault> {
        let n = a.len();
        let ua: Vec<(f64, f64)> = a.iter().map(|p| self.uv(p)).collect();
        let ub: Vec<(f64, f64)> = b.iter().map(|p| self.uv(p)).collect();
        let mut events = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let d0 = ua[i].0 - ua[j].0;
                let d1 = ub[i].0 - ub[j].0;
                if d0.abs() < TIE || d1.abs() < TIE {
                    return Err(Fault::Tie);
                }
                if (d0 > 0.0) == (d1 > 0.0) {
                    continue;
                }
                let s = d0 / (d0 - d1);
                let vi = ua[i].1 + s * (ub[i].1 - ua[i].1);
                let vj = ua[j].1 + s * (ub[j].1 - ua[j].1);
                if (vi - vj).abs() < COLLISION {
                    return Err(Fault::Hard(Error::Collision(i, j)));
                }
                if (vi - vj).abs() < TIE {
                    return Err(Fault::Tie);
                }
                // the strand on the left before the exchange
                let (vl, vr) = if d0 < 0.0 { (vi, vj) } else { (vj, vi) };
                events.push((s, i, j, if vr > vl { 1 } else { -1 }));
            }
        }
        if events.is_empty() {
            return Ok(());
        }
        events.sort_by(|x, y| x.0.total_cmp(&y.0));
        for w in events.windows(2) {
            if w[1].0 - w[0].0 < TIE {
                return Err(Fault::Tie);
            }
        }
        let mut order = self.order(a)?;
        for (_, i, j, sign) in events {
            let pi = order.iter().position(|&k| k == i).unwrap();
            let pj = order.iter().position(|&k| k == j).unwrap();
            if pi.abs_diff(pj) != 1 {
                return Err(Fault::Tie);
            }
            let k = pi.min(pj);
            order.swap(pi, pj);
            out.push(sign * (k as i32 + 1));
        }
        Ok(())
    }

    fn frames(&self, frames: &[Vec<Point>], out: &mut Vec<i32>) -> std::result::Result<(), Fault> {
        for w in frames.windows(2) {
            self.interval(&w[0], &w[1], out)?;
        }
        Ok(())
    }
}

fn sequential_frames(a: &Configuration, b: &Configuration, speed: f64) -> Vec<Vec<Point>> {
    let mut cur = a.points.clone();
    let mut frames = vec![cur.clone()];
    for i in 0..cur.len() {
        let (p, q) = (a.points[i], b.points[i]);
        if p == q {
            continue;
        }
        let pieces = ((p.dist(&q) * speed).ceil() as usize).max(1);
        for k in 1..=pieces {
            cur[i] = p.lerp(&q, k as f64 / pieces as f64);
            frames.push(cur.clone());
        }
    }
    frames
}

fn connector_letters(a: &Configuration, b: &Configuration, opts: &TraceOptions, proj: &Projector) -> Result<Vec<i32>> {
    let mut out = Vec::new();
    match proj.frames(&sequential_frames(a, b, opts.connector_speed), &mut out) {
        Ok(()) => Ok(out),
        Err(Fault::Tie) => Err(Error::Degeneracy("connector segments meet a point".into())),
        Err(Fault::Hard(e)) => Err(e),
    }
}

/// Braid of the motion a → b moving point 1 along its segment, then point 2, ...
pub fn connector_braid(a: &Configuration, b: &Configuration, opts: &TraceOptions) -> Result<BraidWord> {
    if a.n() != b.n() {
        return Err(Error::StrandMismatch(a.n(), b.n()));
    }
    let letters = connector_letters(a, b, opts, &Projector::new(opts.axis_angle))?;
    BraidWord::new(a.n(), letters)
}

/// Sampled positions of the points through one step's isotopy.
fn step_frames(step: &Step, start: &[Point], pieces: usize) -> Vec<Vec<Point>> {
    (0..=pieces)
        .map(|k| {
            let t = k as f64 / pieces as f64;
            start.iter().map(|p| step.eval_t(p, t)).collect()
        })
        .collect()
}

struct Trajectory {
    letters: Vec<i32>,
    refinements: u32,
    ties: u32,
}

fn trajectory(f: &DiskMap, x: &Configuration, opts: &TraceOptions, proj: &Projector) -> std::result::Result<Trajectory, Fault> {
    let mut cur = x.points.clone();
    let mut letters = Vec::new();
    let mut refinements = 0u32;
    let mut ties = 0u32;
    for step in &f.steps {
        if cur.iter().all(|p| step.fixes(p)) {
            continue;
        }
        let sweep = cur.iter().map(|p| step.sweep(p)).fold(0.0, f64::max);
        if sweep == 0.0 && !matches!(step.primitive, Primitive::RigidRotation { .. }) {
            continue;
        }
        let base = ((1.0 / opts.dt_init).ceil() as usize).max((sweep / MAX_ARC).ceil() as usize).max(1);
        let mut accepted = None;
        for r in 0..=opts.max_refine {
            let pieces = base << r;
            let fine = step_frames(step, &cur, 2 * pieces);
            let coarse: Vec<Vec<Point>> = fine.iter().step_by(2).cloned().collect();
            let mut wc = Vec::new();
            let mut wf = Vec::new();
            let rc = proj.frames(&coarse, &mut wc);
            let rf = proj.frames(&fine, &mut wf);
            match (rc, rf) {
                (Ok(()), Ok(())) if wc == wf => {
                    refinements = refinements.max(r);
                    accepted = Some((wf, fine.last().unwrap().clone()));
                    break;
                }
                (Err(Fault::Hard(e)), _) | (_, Err(Fault::Hard(e))) => return Err(Fault::Hard(e)),
                (Err(Fault::Tie), _) | (_, Err(Fault::Tie)) => ties += 1,
                _ => {}
            }
        }
        match accepted {
            Some((w, end)) => {
                letters.extend(w);
                cur = end;
            }
            None => return Err(Fault::Tie),
        }
    }
    for i in 0..cur.len() {
        for j in i + 1..cur.len() {
            if cur[i].dist(&cur[j]) < COLLISION {
                return Err(Fault::Hard(Error::Collision(i, j)));
            }
        }
    }
    Ok(Trajectory { letters, refinements, ties })
}

/// Braid of the rigid rotation of z by `turn`, read along `proj`.
fn rotation_letters(z: &Configuration, turn: f64, proj: &Projector) -> std::result::Result<Vec<i32>, Fault> {
    let step = Step::new(Primitive::RigidRotation { angle: turn });
    let pieces = ((turn.abs() / MAX_ARC).ceil() as usize).max(1) * 8;
    let mut out = Vec::new();
    proj.frames(&step_frames(&step, &z.points, pieces), &mut out)?;
    Ok(out)
}

fn extract_along(f: &DiskMap, x: &Configuration, z: &Configuration, opts: &TraceOptions, angle: f64) -> std::result::Result<TraceResult, Fault> {
    let proj = Projector::new(angle);
    let fx = Configuration { points: x.points.iter().map(|p| f.eval(p)).collect::<Result<_>>()? };
    let head = connector_letters(z, x, opts, &proj)?;
    let tail = connector_letters(z, &fx, opts, &proj)?;
    let t = trajectory(f, x, opts, &proj)?;
    let mut letters = head;
    letters.extend(t.letters);
    letters.extend(tail.iter().rev().map(|l| -l));
    let word = BraidWord::new(x.n(), letters)?.free_reduce();
    Ok(TraceResult { word, refinements_used: t.refinements, degenerate_events: t.ties })
}

/// The braid γ(f, x): connector z → x, the isotopy of f, then the reverse
/// of the connector z → f(x).
pub fn extract_braid(f: &DiskMap, x: &Configuration, z: &Configuration, opts: &TraceOptions) -> Result<TraceResult> {
    opts.validate()?;
    if x.n() != z.n() {
        return Err(Error::StrandMismatch(x.n(), z.n()));
    }
    match extract_along(f, x, z, opts, opts.axis_angle) {
        Ok(r) => Ok(r),
        Err(Fault::Hard(e)) => Err(e),
        Err(Fault::Tie) => {
            // Re-read along a turned axis, then conjugate back to the
            // original projection by the rotation braid of z.
            let turned = opts.axis_angle + FALLBACK_TURN;
            let fail = || Error::Degeneracy("crossing order unresolved after refinement".into());
            let r = match extract_along(f, x, z, opts, turned) {
                Ok(r) => r,
                Err(Fault::Tie) => return Err(fail()),
                Err(Fault::Hard(e)) => return Err(e),
            };
            let p = match rotation_letters(z, -FALLBACK_TURN, &Projector::new(opts.axis_angle)) {
                Ok(p) => p,
                Err(Fault::Tie) => return Err(fail()),
                Err(Fault::Hard(e)) => return Err(e),
            };
            let pw = BraidWord::new(z.n(), p)?;
            let word = pw.concat(&r.word)?.concat(&pw.inverse())?.free_reduce();
            Ok(TraceResult { word, refinements_used: r.refinements_used, degenerate_events: r.degenerate_events + 1 })
        }
    }
}

fn powers_along(f: &DiskMap, x: &Configuration, z: &Configuration, ps: &[u32], opts: &TraceOptions, angle: f64) -> std::result::Result<Vec<TraceResult>, Fault> {
    let proj = Projector::new(angle);
    let mut letters = connector_letters(z, x, opts, &proj)?;
    let mut cur = x.clone();
    let mut out = Vec::with_capacity(ps.len());
    let (mut refinements, mut ties) = (0, 0);
    let p_max = ps.iter().copied().max().unwrap_or(0);
    for k in 1..=p_max {
        let t = trajectory(f, &cur, opts, &proj)?;
        letters.extend(t.letters);
        refinements = refinements.max(t.refinements);
        ties += t.ties;
        cur = Configuration { points: cur.points.iter().map(|p| f.eval(p)).collect::<Result<_>>()? };
        if ps.contains(&k) {
            let tail = connector_letters(z, &cur, opts, &proj)?;
            let mut w = letters.clone();
            w.extend(tail.iter().rev().map(|l| -l));
            let word = BraidWord::new(x.n(), w)?.free_reduce();
            out.push(TraceResult { word, refinements_used: refinements, degenerate_events: ties });
        }
    }
    Ok(out)
}

/// γ(f^p, x) for each p in `ps` (p >= 1), tracing the orbit once.
/// Each entry equals extract_braid on the p-th power of f.
pub fn extract_powers(f: &DiskMap, x: &Configuration, z: &Configuration, ps: &[u32], opts: &TraceOptions) -> Result<Vec<TraceResult>> {
    opts.validate()?;
    if x.n() != z.n() {
        return Err(Error::StrandMismatch(x.n(), z.n()));
    }
    if ps.contains(&0) {
        return Err(Error::Parameter("powers must be positive".into()));
    }
    let fail = || Error::Degeneracy("crossing order unresolved after refinement".into());
    match powers_along(f, x, z, ps, opts, opts.axis_angle) {
        Ok(r) => Ok(r),
        Err(Fault::Hard(e)) => Err(e),
        Err(Fault::Tie) => {
            let rs = match powers_along(f, x, z, ps, opts, opts.axis_angle + FALLBACK_TURN) {
                Ok(r) => r,
                Err(Fault::Tie) => return Err(fail()),
                Err(Fault::Hard(e)) => return Err(e),
            };
            let p = match rotation_letters(z, -FALLBACK_TURN, &Projector::new(opts.axis_angle)) {
                Ok(p) => p,
                Err(Fault::Tie) => return Err(fail()),
                Err(Fault::Hard(e)) => return Err(e),
            };
            let pw = BraidWord::new(z.n(), p)?;
            rs.into_iter()
                .map(|r| {
                    let word = pw.concat(&r.word)?.concat(&pw.inverse())?.free_reduce();
                    Ok(TraceResult { word, refinements_used: r.refinements_used, degenerate_events: r.degenerate_events + 1 })
                })
                .collect()
        }
    }
}

/// Checks γ(g then f, x) against γ(g, x) followed by γ(f, g(x)).
pub fn cocycle_check(f: &DiskMap, g: &DiskMap, x: &Configuration, z: &Configuration, opts: &TraceOptions) -> Result<bool> {
    let whole = extract_braid(&DiskMap::compose(g, f), x, z, opts)?;
    let gx = Configuration { points: x.points.iter().map(|p| g.eval(p)).collect::<Result<_>>()? };
    let first = extract_braid(g, x, z, opts)?;
    let second = extract_braid(f, &gx, z, opts)?;
    Ok(whole.word.equal(&first.word.concat(&second.word)?))
}

#[derive(Debug, Clone, Serialize)]
pub struct BraidClass {
    pub representative: BraidWord,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BraidHistogram {
    pub classes: Vec<BraidClass>,
    pub samples: usize,
    /// Draws discarded for degeneracy or collision.
    pub rejected: usize,
}

/// Classes of γ(f, x) over uniformly sampled x, most frequent first.
pub fn braid_support_histogram(f: &DiskMap, n: usize, samples: usize, seed: u64, opts: &TraceOptions) -> Result<BraidHistogram> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = Configuration::base(n);
    let mut classes: HashMap<BraidKey, BraidClass> = HashMap::new();
    let mut rejected = 0;
    let mut done = 0;
    while done < samples {
        let (x, _) = Configuration::sample(&mut rng, n, 1e-3, f.margin, 1000)?;
        match extract_braid(f, &x, &z, opts) {
            Ok(r) => {
                classes
                    .entry(r.word.class_key())
                    .and_modify(|c| c.count += 1)
                    .or_insert(BraidClass { representative: r.word, count: 1 });
                done += 1;
            }
            Err(Error::Degeneracy(_)) | Err(Error::Collision(..)) => {
                rejected += 1;
                if rejected > 10 * samples.max(10) {
                    return Err(Error::Sampling("too many degenerate configurations".into()));
                }
            }
            Err(e) => return Err(e),
        }
    }
    let mut classes: Vec<BraidClass> = classes.into_values().collect();
    classes.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.representative.letters.cmp(&b.representative.letters)));
    Ok(BraidHistogram { classes, samples, rejected })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(pts: &[(f64, f64)]) -> Configuration {
        Configuration::new(pts.iter().map(|&(x, y)| Point::new(x, y)).collect(), 0.05).unwrap()
    }

    #[test]
    fn parallel_swap_sign() {
        let opts = TraceOptions { axis_angle: 0.0, ..Default::default() };
        // left point passes below the right one: counterclockwise
        let a = cfg(&[(-0.3, -0.1), (0.3, 0.1)]);
        let b = cfg(&[(0.5, -0.1), (0.3, 0.1)]);
        assert_eq!(connector_braid(&a, &b, &opts).unwrap().letters, vec![1]);
        let b = cfg(&[(-0.3, -0.1), (-0.5, 0.1)]);
        assert_eq!(connector_braid(&a, &b, &opts).unwrap().letters, vec![1]);
        let a = cfg(&[(-0.3, 0.1), (0.3, -0.1)]);
        let b = cfg(&[(0.5, 0.1), (0.3, -0.1)]);
        assert_eq!(connector_braid(&a, &b, &opts).unwrap().letters, vec![-1]);
        assert!(connector_braid(&a, &a, &opts).unwrap().is_empty());
    }

    #[test]
    fn full_rotation_is_full_twist() {
        let f = DiskMap::single(Primitive::RigidRotation { angle: std::f64::consts::TAU }).unwrap();
        let x = cfg(&[(-0.5, 0.0), (0.5, 0.0)]);
        let r = extract_braid(&f, &x, &x, &TraceOptions::default()).unwrap();
        assert_eq!(r.word.letters, vec![1, 1]);
    }

    #[test]
    fn identity_is_trivial() {
        let x = cfg(&[(-0.5, 0.1), (0.2, 0.3), (0.4, -0.4)]);
        let z = Configuration::base(3);
        let r = extract_braid(&DiskMap::identity(), &x, &z, &TraceOptions::default()).unwrap();
        assert!(r.word.is_empty());
    }

    #[test]
    fn twist_around_both_points() {
        let f = DiskMap::single(Primitive::AnnulusTwist { center: [0.0, 0.0], r_in: 0.5, r_out: 0.8, turns: 1.0 })
            .unwrap();
        let x = cfg(&[(-0.3, 0.05), (0.3, -0.05)]);
        let r = extract_braid(&f, &x, &x, &TraceOptions::default()).unwrap();
        assert_eq!(r.word.letters, vec![1, 1]);
    }

    #[test]
    fn turned_axis_conjugates_back() {
        let f = crate::dynamics::egg_beater(3.0, &Default::default()).unwrap();
        let opts = TraceOptions::default();
        let z = Configuration::base(3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let (x, _) = Configuration::sample(&mut rng, 3, 0.01, 0.05, 100).unwrap();
            let direct = extract_along(&f, &x, &z, &opts, opts.axis_angle).unwrap().word;
            let r = extract_along(&f, &x, &z, &opts, opts.axis_angle + FALLBACK_TURN).unwrap().word;
            let p = BraidWord::new(3, rotation_letters(&z, -FALLBACK_TURN, &Projector::new(opts.axis_angle)).unwrap())
                .unwrap();
            let back = p.concat(&r).unwrap().concat(&p.inverse()).unwrap();
            assert!(direct.equal(&back), "{direct} vs {back}");
        }
    }

    #[test]
    fn powers_match_direct_extraction() {
        let f = crate::dynamics::egg_beater(2.0, &Default::default()).unwrap();
        let opts = TraceOptions::default();
        let z = Configuration::base(3);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let (x, _) = Configuration::sample(&mut rng, 3, 0.01, 0.05, 100).unwrap();
            let rs = extract_powers(&f, &x, &z, &[1, 2, 4], &opts).unwrap();
            for (r, p) in rs.iter().zip([1, 2, 4]) {
                let d = extract_braid(&f.power(p), &x, &z, &opts).unwrap();
                assert_eq!(r.word, d.word);
            }
        }
    }

    #[test]
    fn json_shape() {
        let r = TraceResult { word: BraidWord::new(3, vec![1, -2]).unwrap(), refinements_used: 0, degenerate_events: 0 };
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["braid"], serde_json::json!([1, -2]));
        assert_eq!(v["refinements"], 0);
    }
}
