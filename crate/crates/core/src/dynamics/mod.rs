//! Area-preserving maps of the unit disk built from closed-form primitives.
//!
//! Every primitive is a rotation of the level sets of a function ρ about a
//! center, by an angle depending only on ρ. Level sets are circles for the
//! twist, push and radial flow, and similar ellipses for the strip shear
//! (a linear change of coordinates conjugates it to a radial push, so its
//! Jacobian is exactly 1).

mod curve;
pub mod profile;

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use curve::{transport_curve, transport_curve_partial, PolyCurve, Transported};

pub const DEFAULT_MARGIN: f64 = 0.05;
pub const DEFAULT_ORDER: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(&self, o: &Point) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }

    pub fn lerp(&self, o: &Point, t: f64) -> Point {
        Point::new(self.x + t * (o.x - self.x), self.y + t * (o.y - self.y))
    }

    fn rotate(&self, c: f64, s: f64) -> Point {
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

/// An ordered tuple of distinct interior points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub points: Vec<Point>,
}

impl Configuration {
    pub fn new(points: Vec<Point>, margin: f64) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Parameter("a configuration needs at least two points".into()));
        }
        for p in &points {
            if p.norm() >= 1.0 - margin {
                return Err(Error::Domain(p.x, p.y));
            }
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if points[i].dist(&points[j]) == 0.0 {
                    return Err(Error::Parameter(format!("points {i} and {j} coincide")));
                }
            }
        }
        Ok(Configuration { points })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn min_separation(&self) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..self.points.len() {
            for j in i + 1..self.points.len() {
                m = m.min(self.points[i].dist(&self.points[j]));
            }
        }
        m
    }

    /// Fixed base tuple: points spread on a slightly tilted diameter.
    pub fn base(n: usize) -> Self {
        let points = (0..n)
            .map(|i| {
                let t = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 - 0.5 };
                Point::new(1.2 * t, 0.05 + 0.1 * t)
            })
            .collect();
        Configuration { points }
    }

    /// Uniform sample over configurations with pairwise distance >= min_sep.
    /// Returns the configuration and the number of rejected draws.
    pub fn sample<R: Rng>(rng: &mut R, n: usize, min_sep: f64, margin: f64, max_tries: usize) -> Result<(Self, usize)> {
        let r = 1.0 - margin;
        for tries in 0..max_tries {
            let mut pts = Vec::with_capacity(n);
            while pts.len() < n {
                let p = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                if p.norm() < r {
                    pts.push(p);
                }
            }
            let c = Configuration { points: pts };
            if c.min_separation() >= min_sep {
                return Ok((c, tries));
            }
        }
        Err(Error::Sampling(format!("no configuration with min_sep {min_sep} after {max_tries} draws")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RadialProfile {
    /// Rigid core turning 2πt, decaying to zero at the rim.
    #[default]
    Smoothstep,
    /// Bump vanishing at the center and at the rim.
    Bump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ShearProfile {
    /// Bump across the band: identity on both sides.
    #[default]
    Push,
    /// Rigid inner core turning by the full strength.
    Twist,
}

/// One closed-form generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Primitive {
    /// Angle 2πk(1 − S(s)), s = (r − r_in)/(r_out − r_in).
    AnnulusTwist { center: [f64; 2], r_in: f64, r_out: f64, turns: f64 },
    /// Angle 2πt·bump(s) inside the annulus.
    HamiltonianPush { center: [f64; 2], r_in: f64, r_out: f64, time: f64 },
    /// Rotation about the origin by an angle depending on r/radius.
    RadialFlow {
        #[serde(default)]
        profile: RadialProfile,
        time: f64,
        #[serde(default = "default_radius")]
        radius: f64,
    },
    /// Shear along nested ellipses elongated in direction `axis`: the long
    /// sides of each ellipse form a pair of opposite flowing bands.
    StripShear {
        #[serde(default)]
        axis: f64,
        #[serde(default)]
        offset: f64,
        half_length: f64,
        half_width: f64,
        #[serde(default = "default_inner")]
        inner: f64,
        strength: f64,
        #[serde(default)]
        profile: ShearProfile,
    },
    RigidRotation { angle: f64 },
}

fn default_radius() -> f64 {
    1.0 - DEFAULT_MARGIN
}

fn default_inner() -> f64 {
    0.3
}

fn default_order() -> u32 {
    DEFAULT_ORDER
}

/// p ↦ R_angle p + shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidMotion {
    #[serde(default)]
    pub angle: f64,
    #[serde(default)]
    pub shift: [f64; 2],
}

impl RigidMotion {
    pub fn translation(x: f64, y: f64) -> Self {
        RigidMotion { angle: 0.0, shift: [x, y] }
    }

    pub fn apply(&self, p: &Point) -> Point {
        let q = p.rotate(self.angle.cos(), self.angle.sin());
        Point::new(q.x + self.shift[0], q.y + self.shift[1])
    }

    pub fn apply_inverse(&self, p: &Point) -> Point {
        let q = Point::new(p.x - self.shift[0], p.y - self.shift[1]);
        q.rotate(self.angle.cos(), -self.angle.sin())
    }

    /// self ∘ other
    pub fn then_after(&self, other: &RigidMotion) -> RigidMotion {
        let s = self.apply(&Point::new(other.shift[0], other.shift[1]));
        RigidMotion { angle: self.angle + other.angle, shift: [s.x, s.y] }
    }
}

/// A primitive, optionally conjugated by a rigid motion h (h ∘ prim ∘ h⁻¹).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    #[serde(flatten)]
    pub primitive: Primitive,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<RigidMotion>,
    #[serde(default = "default_order")]
    pub order: u32,
}

impl From<Primitive> for Step {
    fn from(p: Primitive) -> Self {
        Step { primitive: p, frame: None, order: DEFAULT_ORDER }
    }
}

/// Level-set frame of a primitive: the angle of rotation at p, and the map
/// into coordinates where that rotation is Euclidean.
struct Local {
    theta: f64,
    center: Point,
    axis: f64,
    scale: (f64, f64),
}

impl Primitive {
    fn local(&self, p: &Point, t: f64, order: u32) -> Local {
        match *self {
            Primitive::AnnulusTwist { center, r_in, r_out, turns } => {
                let c = Point::new(center[0], center[1]);
                let s = (p.dist(&c) - r_in) / (r_out - r_in);
                let theta = if s >= 1.0 { 0.0 } else { TAU * turns * t * (1.0 - profile::smoothstep(order, s)) };
                Local { theta, center: c, axis: 0.0, scale: (1.0, 1.0) }
            }
            Primitive::HamiltonianPush { center, r_in, r_out, time } => {
                let c = Point::new(center[0], center[1]);
                let s = (p.dist(&c) - r_in) / (r_out - r_in);
                Local { theta: TAU * time * t * profile::bump(order, s), center: c, axis: 0.0, scale: (1.0, 1.0) }
            }
            Primitive::RadialFlow { profile: prof, time, radius } => {
                let u = p.norm() / radius;
                let v = match prof {
                    RadialProfile::Smoothstep => {
                        if u >= 1.0 {
                            0.0
                        } else {
                            1.0 - profile::smoothstep(order, u)
                        }
                    }
                    RadialProfile::Bump => profile::bump(order, u),
                };
                Local { theta: TAU * time * t * v, center: Point::new(0.0, 0.0), axis: 0.0, scale: (1.0, 1.0) }
            }
            Primitive::StripShear { axis, offset, half_length, half_width, inner, strength, profile: prof } => {
                let c = Point::new(-axis.sin() * offset, axis.cos() * offset);
                let q = Point::new(p.x - c.x, p.y - c.y).rotate(axis.cos(), -axis.sin());
                let rho = (q.x / half_length).hypot(q.y / half_width);
                let s = (rho - inner) / (1.0 - inner);
                let v = match prof {
                    ShearProfile::Push => profile::bump(order, s),
                    ShearProfile::Twist => {
                        if s >= 1.0 {
                            0.0
                        } else {
                            1.0 - profile::smoothstep(order, s)
                        }
                    }
                };
                Local { theta: strength * t * v, center: c, axis, scale: (half_length, half_width) }
            }
            Primitive::RigidRotation { angle } => {
                Local { theta: angle * t, center: Point::new(0.0, 0.0), axis: 0.0, scale: (1.0, 1.0) }
            }
        }
    }

    fn eval_t(&self, p: &Point, t: f64, order: u32) -> Point {
        let l = self.local(p, t, order);
        if l.theta == 0.0 {
            return *p;
        }
        let (c, s) = (l.theta.cos(), l.theta.sin());
        if l.scale == (1.0, 1.0) && l.axis == 0.0 {
            let q = Point::new(p.x - l.center.x, p.y - l.center.y).rotate(c, s);
            return Point::new(q.x + l.center.x, q.y + l.center.y);
        }
        let (ca, sa) = (l.axis.cos(), l.axis.sin());
        let q = Point::new(p.x - l.center.x, p.y - l.center.y).rotate(ca, -sa);
        let u = Point::new(q.x / l.scale.0, q.y / l.scale.1).rotate(c, s);
        let q = Point::new(u.x * l.scale.0, u.y * l.scale.1).rotate(ca, sa);
        Point::new(q.x + l.center.x, q.y + l.center.y)
    }

    /// Same primitive with its time parameter negated.
    pub fn inverse(&self) -> Primitive {
        let mut p = self.clone();
        match &mut p {
            Primitive::AnnulusTwist { turns, .. } => *turns = -*turns,
            Primitive::HamiltonianPush { time, .. } | Primitive::RadialFlow { time, .. } => *time = -*time,
            Primitive::StripShear { strength, .. } => *strength = -*strength,
            Primitive::RigidRotation { angle } => *angle = -*angle,
        }
        p
    }

    /// Same primitive with its time parameter multiplied by k.
    pub fn scaled(&self, k: f64) -> Primitive {
        let mut p = self.clone();
        match &mut p {
            Primitive::AnnulusTwist { turns, .. } => *turns *= k,
            Primitive::HamiltonianPush { time, .. } | Primitive::RadialFlow { time, .. } => *time *= k,
            Primitive::StripShear { strength, .. } => *strength *= k,
            Primitive::RigidRotation { angle } => *angle *= k,
        }
        p
    }

    /// Closed ball outside which the primitive is the identity; None if global.
    pub fn support(&self) -> Option<(Point, f64)> {
        match *self {
            Primitive::AnnulusTwist { center, r_out, .. } | Primitive::HamiltonianPush { center, r_out, .. } => {
                Some((Point::new(center[0], center[1]), r_out))
            }
            Primitive::RadialFlow { radius, .. } => Some((Point::new(0.0, 0.0), radius)),
            Primitive::StripShear { axis, offset, half_length, half_width, .. } => {
                Some((Point::new(-axis.sin() * offset, axis.cos() * offset), half_length.max(half_width)))
            }
            Primitive::RigidRotation { .. } => None,
        }
    }

    /// Largest rotation angle over the disk (used to size trace steps).
    pub fn max_angle(&self) -> f64 {
        match *self {
            Primitive::AnnulusTwist { turns, .. } => TAU * turns.abs(),
            Primitive::HamiltonianPush { time, .. } | Primitive::RadialFlow { time, .. } => TAU * time.abs(),
            Primitive::StripShear { strength, half_length, half_width, .. } => {
                strength.abs() * (half_length / half_width).max(half_width / half_length)
            }
            Primitive::RigidRotation { angle } => angle.abs(),
        }
    }

    pub fn is_autonomous_family(&self) -> bool {
        !matches!(self, Primitive::RigidRotation { .. })
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Construction(m.into()));
        match *self {
            Primitive::AnnulusTwist { r_in, r_out, .. } | Primitive::HamiltonianPush { r_in, r_out, .. } => {
                if !(0.0 <= r_in && r_in < r_out) {
                    return bad("annulus needs 0 <= r_in < r_out");
                }
            }
            Primitive::RadialFlow { radius, .. } => {
                if radius <= 0.0 {
                    return bad("radial flow needs radius > 0");
                }
            }
            Primitive::StripShear { half_length, half_width, inner, .. } => {
                if half_length <= 0.0 || half_width <= 0.0 || !(0.0..1.0).contains(&inner) {
                    return bad("strip shear needs positive semi-axes and 0 <= inner < 1");
                }
            }
            Primitive::RigidRotation { .. } => {}
        }
        Ok(())
    }
}

impl Step {
    pub fn new(primitive: Primitive) -> Self {
        primitive.into()
    }

    pub fn framed(primitive: Primitive, frame: RigidMotion) -> Self {
        Step { primitive, frame: Some(frame), order: DEFAULT_ORDER }
    }

    pub fn eval_t(&self, p: &Point, t: f64) -> Point {
        match &self.frame {
            None => self.primitive.eval_t(p, t, self.order),
            Some(h) => {
                let q = h.apply_inverse(p);
                let r = self.primitive.eval_t(&q, t, self.order);
                if r == q {
                    return *p;
                }
                h.apply(&r)
            }
        }
    }

    pub fn inverse(&self) -> Step {
        Step { primitive: self.primitive.inverse(), frame: self.frame, order: self.order }
    }

    pub fn support(&self) -> Option<(Point, f64)> {
        let (c, r) = self.primitive.support()?;
        Some((self.frame.map(|h| h.apply(&c)).unwrap_or(c), r))
    }

    /// Angle swept by p over the whole step, inflated by the level-set aspect ratio.
    pub fn sweep(&self, p: &Point) -> f64 {
        let q = self.frame.map(|h| h.apply_inverse(p)).unwrap_or(*p);
        let l = self.primitive.local(&q, 1.0, self.order);
        l.theta.abs() * (l.scale.0 / l.scale.1).max(l.scale.1 / l.scale.0)
    }

    /// True if the point lies outside the support (so it never moves).
    pub fn fixes(&self, p: &Point) -> bool {
        match self.support() {
            Some((c, r)) => p.dist(&c) > r,
            None => false,
        }
    }

    /// h ∘ self ∘ h⁻¹
    pub fn conjugated(&self, h: &RigidMotion) -> Step {
        let frame = match &self.frame {
            None => *h,
            Some(f) => h.then_after(f),
        };
        Step { primitive: self.primitive.clone(), frame: Some(frame), order: self.order }
    }
}

/// A composition of steps applied left to right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskMap {
    pub steps: Vec<Step>,
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_margin() -> f64 {
    DEFAULT_MARGIN
}

fn check_point(p: &Point) -> Result<()> {
    if !(p.norm() <= 1.0 + 1e-12) {
        return Err(Error::Domain(p.x, p.y));
    }
    Ok(())
}

impl DiskMap {
    pub fn identity() -> Self {
        DiskMap { steps: Vec::new(), margin: DEFAULT_MARGIN }
    }

    pub fn new(steps: Vec<Step>) -> Result<Self> {
        let m = DiskMap { steps, margin: DEFAULT_MARGIN };
        m.validate()?;
        Ok(m)
    }

    pub fn single(p: Primitive) -> Result<Self> {
        DiskMap::new(vec![p.into()])
    }

    /// Every compactly supported step must live inside the margin.
    pub fn validate(&self) -> Result<()> {
        for s in &self.steps {
            s.primitive.validate()?;
            if let Some((c, r)) = s.support() {
                if c.norm() + r > 1.0 - self.margin + 1e-12 {
                    return Err(Error::Construction(format!(
                        "support ball at ({:.3}, {:.3}) radius {r} leaves the disk of radius {}",
                        c.x,
                        c.y,
                        1.0 - self.margin
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_compactly_supported(&self) -> bool {
        self.steps.iter().all(|s| s.support().is_some())
    }

    pub fn eval(&self, p: &Point) -> Result<Point> {
        check_point(p)?;
        Ok(self.steps.iter().fold(*p, |q, s| s.eval_t(&q, 1.0)))
    }

    /// Canonical isotopy: step k runs on [k/n, (k+1)/n].
    pub fn eval_isotopy(&self, p: &Point, t: f64) -> Result<Point> {
        check_point(p)?;
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Parameter(format!("isotopy time {t} outside [0, 1]")));
        }
        let n = self.steps.len();
        if n == 0 || t == 1.0 {
            return self.eval(p);
        }
        let tn = t * n as f64;
        let full = (tn.floor() as usize).min(n);
        let mut q = *p;
        for s in &self.steps[..full] {
            q = s.eval_t(&q, 1.0);
        }
        let frac = tn - full as f64;
        if full < n && frac > 0.0 {
            q = self.steps[full].eval_t(&q, frac);
        }
        Ok(q)
    }

    /// a then b.
    pub fn compose(a: &DiskMap, b: &DiskMap) -> DiskMap {
        let mut steps = a.steps.clone();
        steps.extend(b.steps.iter().cloned());
        DiskMap { steps, margin: a.margin.min(b.margin) }
    }

    pub fn inverse(&self) -> DiskMap {
        DiskMap { steps: self.steps.iter().rev().map(Step::inverse).collect(), margin: self.margin }
    }

    pub fn power(&self, k: i64) -> DiskMap {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut steps = Vec::with_capacity(base.steps.len() * k.unsigned_abs() as usize);
        for _ in 0..k.unsigned_abs() {
            steps.extend(base.steps.iter().cloned());
        }
        DiskMap { steps, margin: self.margin }
    }

    /// h ∘ self ∘ h⁻¹ for a rigid motion h.
    pub fn conjugated(&self, h: &RigidMotion) -> DiskMap {
        DiskMap { steps: self.steps.iter().map(|s| s.conjugated(h)).collect(), margin: self.margin }
    }

    /// Union bound of the step supports: (center, radius) of a ball
    /// containing every support, None if some step is global.
    pub fn support_ball(&self) -> Option<(Point, f64)> {
        let balls: Vec<(Point, f64)> = self.steps.iter().map(|s| s.support()).collect::<Option<_>>()?;
        if balls.is_empty() {
            return Some((Point::new(0.0, 0.0), 0.0));
        }
        let n = balls.len() as f64;
        let c = Point::new(balls.iter().map(|b| b.0.x).sum::<f64>() / n, balls.iter().map(|b| b.0.y).sum::<f64>() / n);
        let r = balls.iter().map(|b| b.0.dist(&c) + b.1).fold(0.0, f64::max);
        Some((c, r))
    }

    /// Jacobian determinant by fourth-order central differences.
    pub fn jacobian_det(&self, p: &Point, h: f64) -> Result<f64> {
        if h <= 0.0 {
            return Err(Error::Parameter("stencil width must be positive".into()));
        }
        if self.steps.is_empty() {
            return Ok(1.0);
        }
        let mut d = [[0.0; 2]; 2];
        for (k, (ex, ey)) in [(1.0, 0.0), (0.0, 1.0)].into_iter().enumerate() {
            let mut f = [Point::new(0.0, 0.0); 4];
            for (slot, m) in [2.0, 1.0, -1.0, -2.0].into_iter().enumerate() {
                let q = Point::new(p.x + m * h * ex, p.y + m * h * ey);
                if q.norm() > 1.0 {
                    return Err(Error::Domain(q.x, q.y));
                }
                f[slot] = self.eval(&q)?;
            }
            d[0][k] = (-f[0].x + 8.0 * f[1].x - 8.0 * f[2].x + f[3].x) / (12.0 * h);
            d[1][k] = (-f[0].y + 8.0 * f[1].y - 8.0 * f[2].y + f[3].y) / (12.0 * h);
        }
        Ok(d[0][0] * d[1][1] - d[0][1] * d[1][0])
    }
}

/// A random primitive with moderate parameters, supported inside the margin.
pub fn random_primitive<R: Rng>(rng: &mut R) -> Primitive {
    let annulus = |rng: &mut R| {
        let r: f64 = rng.gen_range(0.0..0.45);
        let a = rng.gen_range(0.0..TAU);
        let r_in: f64 = rng.gen_range(0.05..0.3);
        let r_out: f64 = (r_in + rng.gen_range(0.1..0.3f64)).min(0.94 - r);
        ([r * a.cos(), r * a.sin()], r_in, r_out)
    };
    match rng.gen_range(0..5) {
        0 => {
            let (center, r_in, r_out) = annulus(rng);
            Primitive::AnnulusTwist { center, r_in, r_out, turns: rng.gen_range(-1.5..1.5) }
        }
        1 => {
            let (center, r_in, r_out) = annulus(rng);
            Primitive::HamiltonianPush { center, r_in, r_out, time: rng.gen_range(-1.5..1.5) }
        }
        2 => Primitive::RadialFlow {
            profile: if rng.gen() { RadialProfile::Bump } else { RadialProfile::Smoothstep },
            time: rng.gen_range(-1.0..1.0),
            radius: rng.gen_range(0.5..0.95),
        },
        3 => Primitive::StripShear {
            axis: rng.gen_range(0.0..std::f64::consts::PI),
            offset: rng.gen_range(-0.2..0.2),
            half_length: rng.gen_range(0.5..0.7),
            half_width: rng.gen_range(0.25..0.45),
            inner: rng.gen_range(0.0..0.4),
            strength: rng.gen_range(-4.0..4.0),
            profile: if rng.gen() { ShearProfile::Push } else { ShearProfile::Twist },
        },
        _ => Primitive::RigidRotation { angle: rng.gen_range(-4.0..4.0) },
    }
}

/// Product of 1..=max_len random primitives.
pub fn random_map<R: Rng>(rng: &mut R, max_len: usize) -> DiskMap {
    let k = rng.gen_range(1..=max_len.max(1));
    DiskMap { steps: (0..k).map(|_| Step::new(random_primitive(rng))).collect(), margin: DEFAULT_MARGIN }
}

/// Geometry of the two crossing elliptic bands of an egg-beater.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EggBeaterGeometry {
    pub half_length: f64,
    pub half_width: f64,
    pub inner: f64,
    /// Transverse offsets of the horizontal and vertical shears.
    #[serde(default)]
    pub offsets: [f64; 2],
}

impl Default for EggBeaterGeometry {
    fn default() -> Self {
        EggBeaterGeometry { half_length: 0.9, half_width: 0.6, inner: 0.0, offsets: [0.0, 0.0] }
    }
}

impl EggBeaterGeometry {
    pub fn scaled(&self, k: f64) -> Self {
        EggBeaterGeometry {
            half_length: self.half_length * k,
            half_width: self.half_width * k,
            inner: self.inner,
            offsets: [self.offsets[0] * k, self.offsets[1] * k],
        }
    }
}

/// Horizontal shear followed by vertical shear, both of strength τ.
pub fn egg_beater(tau: f64, g: &EggBeaterGeometry) -> Result<DiskMap> {
    let shear = |axis: f64, offset: f64| {
        Step::new(Primitive::StripShear {
            axis,
            offset,
            half_length: g.half_length,
            half_width: g.half_width,
            inner: g.inner,
            strength: tau,
            profile: ShearProfile::Push,
        })
    };
    DiskMap::new(vec![shear(0.0, g.offsets[0]), shear(std::f64::consts::FRAC_PI_2, g.offsets[1])])
}
