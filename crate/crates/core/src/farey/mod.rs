//! The Farey graph: slopes p/q joined when |ps - qr| = 1, with the
//! PSL(2,Z) action, exact distances and translation lengths.

mod corridor;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_traits::Signed;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::braid::IntMatrix2;
use crate::error::{Error, Result};
use crate::int::{int, Int};

pub use corridor::{paths_within, Corridor, PathStream};

/// A vertex of the Farey graph in canonical form: gcd 1, q >= 0, ∞ = 1/0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slope {
    p: Int,
    q: Int,
}

pub const INFINITY: Slope = Slope { p: Int::ONE, q: Int::ZERO };

impl Slope {
    pub fn new(p: Int, q: Int) -> Result<Slope> {
        if p.is_zero() && q.is_zero() {
            return Err(Error::Parameter("0/0 is not a slope".into()));
        }
        let g = p.gcd(&q);
        let (mut p, mut q) = if g.is_one() { (p, q) } else { (p / &g, q / &g) };
        if q.is_negative() || (q.is_zero() && p.is_negative()) {
            p = -p;
            q = -q;
        }
        Ok(Slope { p, q })
    }

    pub fn from_i64(p: i64, q: i64) -> Result<Slope> {
        Slope::new(int(p), int(q))
    }

    pub fn integer(n: Int) -> Slope {
        Slope { p: n, q: Int::ONE }
    }

    pub fn p(&self) -> &Int {
        &self.p
    }

    pub fn q(&self) -> &Int {
        &self.q
    }

    pub fn is_infinity(&self) -> bool {
        self.q.is_zero()
    }

    /// An element g with g·self = ∞.
    pub fn to_infinity(&self) -> IntMatrix2 {
        let e = self.p.extended_gcd(&self.q);
        // e.x p + e.y q = gcd = ±1
        let (x, y) = if e.gcd.is_one() { (e.x, e.y) } else { (-e.x, -e.y) };
        IntMatrix2 { a: x, b: y, c: -&self.q, d: self.p.clone() }
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl FromStr for Slope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Slope> {
        let bad = || Error::Parameter(format!("cannot parse slope '{s}' (expected p/q)"));
        let s = s.trim();
        if s == "inf" || s == "∞" {
            return Ok(INFINITY);
        }
        let (p, q) = match s.split_once('/') {
            Some((p, q)) => (p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?),
            None => (s.parse().map_err(|_| bad())?, Int::ONE),
        };
        Slope::new(p, q)
    }
}

impl Serialize for Slope {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Slope {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Slope, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A path in the Farey graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FareyPath {
    pub vertices: Vec<Slope>,
}

impl FareyPath {
    pub fn new(vertices: Vec<Slope>) -> Result<FareyPath> {
        if vertices.is_empty() {
            return Err(Error::Parameter("a path needs at least one vertex".into()));
        }
        for w in vertices.windows(2) {
            if !adjacent(&w[0], &w[1]) {
                return Err(Error::Parameter(format!("{} and {} are not adjacent", w[0], w[1])));
            }
        }
        Ok(FareyPath { vertices })
    }

    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn reversed(&self) -> FareyPath {
        FareyPath { vertices: self.vertices.iter().rev().cloned().collect() }
    }

    /// Turn numbers at the interior vertices.
    pub fn turns(&self) -> Vec<Int> {
        self.vertices.windows(3).map(|w| turn(&w[0], &w[1], &w[2])).collect()
    }

    pub fn act(&self, m: &IntMatrix2) -> FareyPath {
        FareyPath { vertices: self.vertices.iter().map(|s| act(m, s)).collect() }
    }
}

fn det(u: (&Int, &Int), v: (&Int, &Int)) -> Int {
    u.0 * v.1 - u.1 * v.0
}

pub fn intersection(s1: &Slope, s2: &Slope) -> Int {
    det((&s1.p, &s1.q), (&s2.p, &s2.q)).abs()
}

pub fn adjacent(s1: &Slope, s2: &Slope) -> bool {
    intersection(s1, s2).is_one()
}

/// For a path u -> v -> w of adjacent slopes, the unique t with
/// w = ±(u + t·v) when det(v, u) = 1. Turn 0 means backtracking.
pub fn turn(u: &Slope, v: &Slope, w: &Slope) -> Int {
    let vv = (&v.p, &v.q);
    let su = det(vv, (&u.p, &u.q)).signum();
    let sw = det(vv, (&w.p, &w.q)).signum();
    -(det((&u.p, &u.q), (&w.p, &w.q)) * su * sw)
}

/// The neighbor of v reached from u -> v with the given turn.
pub fn step(u: &Slope, v: &Slope, t: &Int) -> Slope {
    let su = det((&v.p, &v.q), (&u.p, &u.q)).signum();
    let x = &u.p * &su + t * &v.p;
    let y = &u.q * &su + t * &v.q;
    Slope::new(x, y).expect("adjacent slopes give a primitive vector")
}

pub fn act(m: &IntMatrix2, s: &Slope) -> Slope {
    let p = &m.a * &s.p + &m.b * &s.q;
    let q = &m.c * &s.p + &m.d * &s.q;
    Slope::new(p, q).expect("det 1 matrices preserve primitive vectors")
}

/// Exact graph distance.
pub fn distance(s1: &Slope, s2: &Slope) -> u32 {
    if s1 == s2 {
        return 0;
    }
    let x = act(&s1.to_infinity(), s2);
    let mut memo = HashMap::new();
    dist_from_infinity(&x.p, &x.q, &mut memo)
}

fn dist_from_infinity(p: &Int, q: &Int, memo: &mut HashMap<(Int, Int), u32>) -> u32 {
    if q.is_zero() {
        0
    } else if q.is_one() {
        1
    } else {
        frac_dist(p.mod_floor(q), q.clone(), memo)
    }
}

/// d(∞, r/q + n) for 0 < r < q coprime. The edge (n, n+1) separates ∞ from
/// x, so d = 1 + min(d(n, x), d(n+1, x)); runs of the second branch are
/// collapsed, and x ↦ -x lets us assume r <= q/2.
fn frac_dist(r: Int, q: Int, memo: &mut HashMap<(Int, Int), u32>) -> u32 {
    let r = r.clone().min(&q - &r);
    if r.is_one() {
        return 2;
    }
    if let Some(&d) = memo.get(&(r.clone(), q.clone())) {
        return d;
    }
    let (k, s) = q.div_rem(&r);
    let k = u32::try_from(&k).unwrap_or(u32::MAX);
    let a = dist_from_infinity(&-&q, &r, memo);
    let b = dist_from_infinity(&(&r + &s), &s, memo);
    let d = (1 + a).min(k.saturating_add(b));
    memo.insert((r, q), d);
    d
}

/// (estimate, upper) for the stable translation length of M from `base`.
pub fn translation_length(m: &IntMatrix2, base: &Slope, p_max: u32) -> Result<(f64, f64)> {
    if p_max < 2 {
        return Err(Error::Parameter("translation_length needs P_max >= 2".into()));
    }
    if !m.is_hyperbolic() {
        return Ok((0.0, 0.0));
    }
    let mut upper = f64::INFINITY;
    let mut s = base.clone();
    let mut last = 0.0;
    for p in 1..=p_max {
        s = act(m, &s);
        let r = distance(base, &s) as f64 / p as f64;
        upper = upper.min(r);
        last = r;
    }
    Ok((last, upper))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> Slope {
        x.parse().unwrap()
    }

    #[test]
    fn canonical_form() {
        assert_eq!(Slope::from_i64(-2, -4).unwrap(), s("1/2"));
        assert_eq!(Slope::from_i64(-3, 0).unwrap(), INFINITY);
        assert_eq!(s("3"), Slope::integer(int(3)));
        assert!(Slope::from_i64(0, 0).is_err());
        assert_eq!(s("-2/5").to_string(), "-2/5");
    }

    #[test]
    fn intersections() {
        assert_eq!(intersection(&INFINITY, &s("3/7")), int(7));
        assert_eq!(intersection(&s("2/5"), &s("2/5")), int(0));
        assert_eq!(intersection(&s("0/1"), &s("2/5")), int(2));
    }

    #[test]
    fn small_distances() {
        assert_eq!(distance(&s("0/1"), &INFINITY), 1);
        assert_eq!(distance(&s("0/1"), &s("2/5")), 2);
        assert_eq!(distance(&s("7/3"), &s("7/3")), 0);
        assert_eq!(distance(&INFINITY, &s("1/2")), 2);
        assert_eq!(distance(&INFINITY, &s("2/7")), 3);
    }

    #[test]
    fn normalization_hits_infinity() {
        for x in ["3/7", "-5/2", "0/1", "1/0", "13/8"] {
            let sl = s(x);
            let g = sl.to_infinity();
            assert_eq!(g.det(), int(1));
            assert_eq!(act(&g, &sl), INFINITY);
        }
    }

    #[test]
    fn turns_and_steps() {
        let (u, v) = (s("0/1"), INFINITY);
        for t in -3..=3 {
            let w = step(&u, &v, &int(t));
            assert!(adjacent(&v, &w));
            assert_eq!(turn(&u, &v, &w), int(t));
        }
        assert_eq!(step(&u, &v, &int(0)), u);
    }

    #[test]
    fn translation_lengths() {
        assert_eq!(translation_length(&IntMatrix2::identity(), &INFINITY, 5).unwrap(), (0.0, 0.0));
        assert_eq!(translation_length(&IntMatrix2::new(1, 1, 0, 1), &INFINITY, 5).unwrap(), (0.0, 0.0));
        let m = IntMatrix2::new(2, 1, 1, 1);
        let (e20, _) = translation_length(&m, &INFINITY, 20).unwrap();
        let (e40, u40) = translation_length(&m, &INFINITY, 40).unwrap();
        assert!(e20 > 0.0 && (e20 - e40).abs() < 0.1 && u40 <= e40 + 1e-12);
    }
}
