use serde::{Deserialize, Serialize};

use super::{DiskMap, Point};
use crate::error::{Error, Result};
use crate::stats::pairwise_sum;

/// Closed polygon; the last vertex connects back to the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyCurve {
    pub vertices: Vec<Point>,
    /// Indices of the configuration points enclosed, if known.
    #[serde(default)]
    pub encloses: Vec<usize>,
}

impl PolyCurve {
    pub fn new(vertices: Vec<Point>, encloses: Vec<usize>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::Parameter("a closed curve needs at least 3 vertices".into()));
        }
        let n = vertices.len();
        for i in 0..n {
            if vertices[i] == vertices[(i + 1) % n] {
                return Err(Error::Parameter(format!("vertices {i} and {} coincide", (i + 1) % n)));
            }
        }
        Ok(PolyCurve { vertices, encloses })
    }

    pub fn circle(center: Point, radius: f64, vertices: usize) -> Result<Self> {
        let n = vertices.max(3);
        let pts = (0..n)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / n as f64;
                Point::new(center.x + radius * a.cos(), center.y + radius * a.sin())
            })
            .collect();
        PolyCurve::new(pts, Vec::new())
    }

    /// Ellipse with semi-axes (a, b) and major axis rotated by `angle`.
    pub fn ellipse(center: Point, a: f64, b: f64, angle: f64, vertices: usize) -> Result<Self> {
        let n = vertices.max(3);
        let (ca, sa) = (angle.cos(), angle.sin());
        let pts = (0..n)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / n as f64;
                let (x, y) = (a * t.cos(), b * t.sin());
                Point::new(center.x + ca * x - sa * y, center.y + sa * x + ca * y)
            })
            .collect();
        PolyCurve::new(pts, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn length(&self) -> f64 {
        let n = self.vertices.len();
        let segs: Vec<f64> = (0..n).map(|i| self.vertices[i].dist(&self.vertices[(i + 1) % n])).collect();
        pairwise_sum(&segs)
    }

    /// Smallest distance from the polygon to any of the given points.
    pub fn clearance(&self, punctures: &[Point]) -> f64 {
        let n = self.vertices.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
            for p in punctures {
                best = best.min(segment_dist(&a, &b, p));
            }
        }
        best
    }
}

fn segment_dist(a: &Point, b: &Point, p: &Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let l2 = dx * dx + dy * dy;
    let t = if l2 == 0.0 { 0.0 } else { (((p.x - a.x) * dx + (p.y - a.y) * dy) / l2).clamp(0.0, 1.0) };
    p.dist(&a.lerp(b, t))
}

#[derive(Debug, Clone)]
pub struct Transported {
    pub curve: PolyCurve,
    /// False if the vertex budget stopped refinement early.
    pub complete: bool,
}

const MAX_DEPTH: u32 = 40;

/// Image of `c` under `map`, refined until every inserted midpoint's image
/// lies within `tol` of the chord between its neighbours' images.
pub fn transport_curve_partial(map: &DiskMap, c: &PolyCurve, tol: f64, budget: usize) -> Result<Transported> {
    if tol <= 0.0 {
        return Err(Error::Parameter("tolerance must be positive".into()));
    }
    let n = c.vertices.len();
    let images: Vec<Point> = c.vertices.iter().map(|p| map.eval(p)).collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(n * 2);
    let mut complete = true;
    for i in 0..n {
        let j = (i + 1) % n;
        out.push(images[i]);
        if complete {
            complete = refine(map, &c.vertices[i], &c.vertices[j], &images[i], &images[j], tol, MAX_DEPTH, budget, &mut out)?;
        }
    }
    out.dedup();
    while out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    Ok(Transported { curve: PolyCurve { vertices: out, encloses: c.encloses.clone() }, complete })
}

#[allow(clippy::too_many_arguments)]
fn refine(
    map: &DiskMap,
    a: &Point,
    b: &Point,
    fa: &Point,
    fb: &Point,
    tol: f64,
    depth: u32,
    budget: usize,
    out: &mut Vec<Point>,
) -> Result<bool> {
    if depth == 0 {
        return Ok(true);
    }
    let m = a.lerp(b, 0.5);
    let fm = map.eval(&m)?;
    if fm.dist(&fa.lerp(fb, 0.5)) <= tol {
        return Ok(true);
    }
    if out.len() >= budget {
        return Ok(false);
    }
    if !refine(map, a, &m, fa, &fm, tol, depth - 1, budget, out)? {
        return Ok(false);
    }
    out.push(fm);
    refine(map, &m, b, &fm, fb, tol, depth - 1, budget, out)
}

/// As [`transport_curve_partial`], failing if the budget was hit.
pub fn transport_curve(map: &DiskMap, c: &PolyCurve, tol: f64, budget: usize) -> Result<PolyCurve> {
    let t = transport_curve_partial(map, c, tol, budget)?;
    if !t.complete {
        return Err(Error::Resolution { vertices: t.curve.len() });
    }
    Ok(t.curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{egg_beater, EggBeaterGeometry, Primitive};

    #[test]
    fn identity_and_isometry() {
        let c = PolyCurve::circle(Point::new(0.1, 0.0), 0.4, 64).unwrap();
        let t = transport_curve(&DiskMap::identity(), &c, 1e-6, 10_000).unwrap();
        assert_eq!(t, c);
        let rot = DiskMap::single(Primitive::RigidRotation { angle: 1.3 }).unwrap();
        let t = transport_curve(&rot, &c, 1e-6, 10_000).unwrap();
        assert!((t.length() - c.length()).abs() < 1e-9);
    }

    #[test]
    fn length_converges() {
        let m = egg_beater(3.0, &EggBeaterGeometry::default()).unwrap();
        let c = PolyCurve::circle(Point::new(0.0, 0.0), 0.5, 32).unwrap();
        let coarse = transport_curve(&m, &c, 1e-4, 1_000_000).unwrap();
        let fine = transport_curve(&m, &c, 1e-6, 1_000_000).unwrap();
        assert!(fine.len() > coarse.len());
        assert!((coarse.length() - fine.length()).abs() < 1e-4 * coarse.len() as f64);
    }

    #[test]
    fn budget_is_reported() {
        let m = egg_beater(20.0, &EggBeaterGeometry::default()).unwrap();
        let c = PolyCurve::circle(Point::new(0.0, 0.0), 0.5, 16).unwrap();
        match transport_curve(&m, &c, 1e-9, 200) {
            Err(Error::Resolution { vertices }) => assert!(vertices >= 200),
            other => panic!("{other:?}"),
        }
        assert!(!transport_curve_partial(&m, &c, 1e-9, 200).unwrap().complete);
    }
}
