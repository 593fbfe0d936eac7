//! Artin braid words, their elementary invariants, the B3 -> SL(2,Z)
//! representation and a faithful equality test.

use std::fmt;

use serde::{Deserialize, Serialize};

use num_traits::Signed;

use crate::entropy::dynnikov::DynnikovCoord;
use crate::error::{Error, Result};
use crate::int::{int, to_f64, Int};

/// A braid word on `n` strands. Letter `i` is σ_i, `-i` is σ_i^{-1}.
/// Words are read left to right in time order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BraidWord {
    pub n: usize,
    #[serde(rename = "braid")]
    pub letters: Vec<i32>,
}

impl BraidWord {
    pub fn identity(n: usize) -> Self {
        BraidWord { n, letters: Vec::new() }
    }

    pub fn new(n: usize, letters: Vec<i32>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Parameter("braid words need n >= 2".into()));
        }
        for &l in &letters {
            if l == 0 || l.unsigned_abs() as usize >= n {
                return Err(Error::Parameter(format!("letter {l} out of range for n = {n}")));
            }
        }
        Ok(BraidWord { n, letters })
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn free_reduce(&self) -> BraidWord {
        let mut out: Vec<i32> = Vec::with_capacity(self.letters.len());
        for &l in &self.letters {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        BraidWord { n: self.n, letters: out }
    }

    pub fn concat(&self, other: &BraidWord) -> Result<BraidWord> {
        if self.n != other.n {
            return Err(Error::StrandMismatch(self.n, other.n));
        }
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Ok(BraidWord { n: self.n, letters })
    }

    pub fn inverse(&self) -> BraidWord {
        BraidWord { n: self.n, letters: self.letters.iter().rev().map(|l| -l).collect() }
    }

    pub fn power(&self, k: i64) -> BraidWord {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut letters = Vec::with_capacity(base.len() * k.unsigned_abs() as usize);
        for _ in 0..k.unsigned_abs() {
            letters.extend_from_slice(&base.letters);
        }
        BraidWord { n: self.n, letters }
    }

    /// Image in S_n, as the array `perm` with perm[i] = image of i (0-based).
    /// Words compose like functions, so σ1σ2 ↦ (1 2)∘(2 3) = (1 2 3).
    pub fn permutation(&self) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..self.n).collect();
        for &l in self.letters.iter().rev() {
            let i = l.unsigned_abs() as usize - 1;
            for v in perm.iter_mut() {
                if *v == i {
                    *v = i + 1;
                } else if *v == i + 1 {
                    *v = i;
                }
            }
        }
        perm
    }

    pub fn is_pure(&self) -> bool {
        self.permutation().iter().enumerate().all(|(i, &v)| i == v)
    }

    pub fn writhe(&self) -> i64 {
        self.letters.iter().map(|&l| l.signum() as i64).sum()
    }

    /// lk[i][j] = half the signed number of crossings between strands i and j.
    pub fn linking_matrix(&self) -> Result<Vec<Vec<i64>>> {
        if !self.is_pure() {
            return Err(Error::NotPure);
        }
        let n = self.n;
        let mut at: Vec<usize> = (0..n).collect();
        let mut twice = vec![vec![0i64; n]; n];
        for &l in &self.letters {
            let k = l.unsigned_abs() as usize - 1;
            let (s, t) = (at[k], at[k + 1]);
            let e = l.signum() as i64;
            twice[s][t] += e;
            twice[t][s] += e;
            at.swap(k, k + 1);
        }
        Ok(twice.into_iter().map(|row| row.into_iter().map(|v| v / 2).collect()).collect())
    }

    /// Image under σ1 ↦ [[1,1],[0,1]], σ2 ↦ [[1,0],[-1,1]], sign-normalized.
    pub fn sl2_image(&self) -> Result<IntMatrix2> {
        if self.n != 3 {
            return Err(Error::Parameter(format!("sl2_image needs n = 3, got {}", self.n)));
        }
        let gens = [
            IntMatrix2::new(1, 1, 0, 1),
            IntMatrix2::new(1, -1, 0, 1),
            IntMatrix2::new(1, 0, -1, 1),
            IntMatrix2::new(1, 0, 1, 1),
        ];
        let mut m = IntMatrix2::identity();
        for &l in &self.letters {
            let g = match l {
                1 => &gens[0],
                -1 => &gens[1],
                2 => &gens[2],
                _ => &gens[3],
            };
            m = m.mul(g);
        }
        Ok(m.normalized())
    }

    /// Complete invariant of the braid: writhe, permutation and the images of
    /// the round curves. Two words share a key iff they are equal in B_n.
    pub fn class_key(&self) -> BraidKey {
        let curves = if self.n >= 3 {
            (1..self.n)
                .map(|i| {
                    let mut c = DynnikovCoord::round_curve(self.n, i).unwrap();
                    c.apply_word(&self.letters);
                    c
                })
                .collect()
        } else {
            Vec::new()
        };
        BraidKey { n: self.n, writhe: self.writhe(), perm: self.permutation(), curves }
    }

    /// True iff the words represent the same element of B_n.
    pub fn equal(&self, other: &BraidWord) -> bool {
        if self.n != other.n {
            return false;
        }
        if self.writhe() != other.writhe() {
            return false;
        }
        if self.n == 2 {
            return true;
        }
        let q = BraidWord { n: self.n, letters: [&self.letters[..], &other.inverse().letters[..]].concat() }
            .free_reduce();
        if q.is_empty() {
            return true;
        }
        if !q.is_pure() {
            return false;
        }
        (1..self.n).all(|i| {
            let c = DynnikovCoord::round_curve(self.n, i).unwrap();
            let mut d = c.clone();
            d.apply_word(&q.letters);
            d == c
        })
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, l) in self.letters.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BraidKey {
    pub n: usize,
    pub writhe: i64,
    pub perm: Vec<usize>,
    pub curves: Vec<DynnikovCoord>,
}

/// Integer 2x2 matrix of determinant 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix2 {
    pub a: Int,
    pub b: Int,
    pub c: Int,
    pub d: Int,
}

impl IntMatrix2 {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        IntMatrix2 { a: int(a), b: int(b), c: int(c), d: int(d) }
    }

    pub fn from_entries(a: Int, b: Int, c: Int, d: Int) -> Result<Self> {
        let m = IntMatrix2 { a, b, c, d };
        if m.det() != Int::ONE {
            return Err(Error::Parameter(format!("matrix {m} has det != 1")));
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        IntMatrix2::new(1, 0, 0, 1)
    }

    pub fn det(&self) -> Int {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn trace(&self) -> Int {
        &self.a + &self.d
    }

    /// |trace| as f64 (saturating at f64 range).
    pub fn abs_trace(&self) -> f64 {
        to_f64(&self.trace().abs())
    }

    pub fn mul(&self, o: &IntMatrix2) -> IntMatrix2 {
        IntMatrix2 {
            a: &self.a * &o.a + &self.b * &o.c,
            b: &self.a * &o.b + &self.b * &o.d,
            c: &self.c * &o.a + &self.d * &o.c,
            d: &self.c * &o.b + &self.d * &o.d,
        }
    }

    pub fn inverse(&self) -> IntMatrix2 {
        IntMatrix2 { a: self.d.clone(), b: -&self.b, c: -&self.c, d: self.a.clone() }
    }

    pub fn pow(&self, k: i64) -> IntMatrix2 {
        let mut base = if k < 0 { self.inverse() } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = IntMatrix2::identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// g m g^{-1}
    pub fn conjugate_by(&self, g: &IntMatrix2) -> IntMatrix2 {
        g.mul(self).mul(&g.inverse())
    }

    /// Representative of ±M with a > 0, or a = 0 and c > 0.
    pub fn normalized(&self) -> IntMatrix2 {
        if self.a.is_negative() || (self.a.is_zero() && self.c.is_negative()) {
            IntMatrix2 { a: -&self.a, b: -&self.b, c: -&self.c, d: -&self.d }
        } else {
            self.clone()
        }
    }

    pub fn eq_psl(&self, o: &IntMatrix2) -> bool {
        self.normalized() == o.normalized()
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.trace().abs() > int(2)
    }

    /// Sum of absolute values of the entries.
    pub fn size(&self) -> Int {
        self.a.abs() + self.b.abs() + self.c.abs() + self.d.abs()
    }
}

impl fmt::Display for IntMatrix2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

impl Serialize for IntMatrix2 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let e = |x: &Int| match i64::try_from(x) {
            Ok(v) => serde_json::Value::from(v),
            Err(_) => serde_json::Value::from(x.to_string()),
        };
        let v = serde_json::json!([[e(&self.a), e(&self.b)], [e(&self.c), e(&self.d)]]);
        v.serialize(s)
    }
}
