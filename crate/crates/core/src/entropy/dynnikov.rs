//! Dynnikov coordinates for integral laminations in the n-punctured disk and
//! the piecewise-linear action of the Artin generators.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::int::Int;

/// Coordinates (a_1..a_{n-2}, b_1..b_{n-2}) of an integral lamination.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DynnikovCoord {
    pub n: usize,
    pub a: Vec<Int>,
    pub b: Vec<Int>,
}

fn pos(x: &Int) -> Int {
    if x.is_positive() {
        x.clone()
    } else {
        Int::zero()
    }
}

fn neg(x: &Int) -> Int {
    if x.is_negative() {
        x.clone()
    } else {
        Int::zero()
    }
}

impl DynnikovCoord {
    pub fn new(a: Vec<i64>, b: Vec<i64>) -> Result<Self> {
        if a.len() != b.len() || a.is_empty() {
            return Err(Error::Parameter(
                "Dynnikov coordinates need equal nonempty a and b blocks".into(),
            ));
        }
        if a.iter().chain(&b).all(|&v| v == 0) {
            return Err(Error::Parameter("Dynnikov coordinates must not all vanish".into()));
        }
        Ok(DynnikovCoord {
            n: a.len() + 2,
            a: a.into_iter().map(Int::from).collect(),
            b: b.into_iter().map(Int::from).collect(),
        })
    }

    /// The curve enclosing punctures i and i+1 (1-based, 1 <= i <= n-1).
    /// Its stabilizer is the centralizer of σ_i.
    pub fn round_curve(n: usize, i: usize) -> Result<Self> {
        if n < 3 || i == 0 || i >= n {
            return Err(Error::Parameter(format!("no round curve c_{i} for n = {n}")));
        }
        let m = n - 2;
        let mut b = vec![0i64; m];
        if i >= 2 {
            b[i - 2] = -1;
        }
        if i <= m {
            b[i - 1] = 1;
        }
        DynnikovCoord::new(vec![0; m], b)
    }

    /// Default seed lamination used for growth estimates: a = 0, b = -1.
    pub fn standard(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Parameter("Dynnikov coordinates need n >= 3".into()));
        }
        DynnikovCoord::new(vec![0; n - 2], vec![-1; n - 2])
    }

    pub fn l1_norm(&self) -> Int {
        self.a.iter().chain(&self.b).map(|v| v.abs()).sum()
    }

    /// Apply σ_|letter|^{sign(letter)}.
    pub fn apply(&mut self, letter: i32) {
        let i = letter.unsigned_abs() as usize;
        let n = self.n;
        assert!(i >= 1 && i < n, "generator index out of range");
        let inv = letter < 0;
        if i == 1 {
            let (a, b) = (&self.a[0], &self.b[0]);
            let (na, nb) = if !inv {
                let t = pos(b) - a;
                (a + neg(b) + neg(&t), t)
            } else {
                let t = a + pos(b);
                (a - neg(b) - neg(&t), t)
            };
            self.a[0] = na;
            self.b[0] = nb;
        } else if i == n - 1 {
            let l = n - 3;
            let (a, b) = (&self.a[l], &self.b[l]);
            let (na, nb) = if !inv {
                let t = neg(b) - a;
                (a + pos(b) + pos(&t), t)
            } else {
                let t = a + neg(b);
                (a - pos(b) - pos(&t), t)
            };
            self.a[l] = na;
            self.b[l] = nb;
        } else {
            let j = i - 2;
            let k = i - 1;
            let (aj, bj, ak, bk) = (&self.a[j], &self.b[j], &self.a[k], &self.b[k]);
            let (naj, nbj, nak, nbk) = if !inv {
                let c = aj - neg(bj) - ak + pos(bk);
                let naj = aj + pos(bj) + pos(&(pos(bk) - &c));
                let nbj = bk - pos(&c);
                let nak = ak + neg(bk) + neg(&(neg(bj) + &c));
                let nbk = bj + pos(&c);
                (naj, nbj, nak, nbk)
            } else {
                let d = aj + neg(bj) - ak - pos(bk);
                let naj = aj - pos(bj) - pos(&(pos(bk) + &d));
                let nbj = bk + neg(&d);
                let nak = ak - neg(bk) - neg(&(neg(bj) - &d));
                let nbk = bj - neg(&d);
                (naj, nbj, nak, nbk)
            };
            self.a[j] = naj;
            self.b[j] = nbj;
            self.a[k] = nak;
            self.b[k] = nbk;
        }
    }

    pub fn apply_word(&mut self, letters: &[i32]) {
        for &l in letters {
            self.apply(l);
        }
    }
}

/// `dynnikov_update`: one generator applied to a copy.
pub fn dynnikov_update(c: &DynnikovCoord, letter: i32) -> Result<DynnikovCoord> {
    let i = letter.unsigned_abs() as usize;
    if letter == 0 || i >= c.n {
        return Err(Error::Parameter(format!("generator {letter} out of range for n = {}", c.n)));
    }
    let mut out = c.clone();
    out.apply(letter);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coord(a: &[i64], b: &[i64]) -> DynnikovCoord {
        DynnikovCoord::new(a.to_vec(), b.to_vec()).unwrap()
    }

    #[test]
    fn inverse_letters_undo() {
        let mut c = coord(&[3, -2, 5], &[-4, 1, 0]);
        let orig = c.clone();
        for l in [1, -2, 3, 4, -4, -1, 2] {
            c.apply(l);
        }
        for l in [1, -2, 3, 4, -4, -1, 2].iter().rev() {
            c.apply(-l);
        }
        assert_eq!(c, orig);
    }

    #[test]
    fn round_curves_fixed_by_own_generator() {
        for n in 3..8 {
            for i in 1..n {
                let c = DynnikovCoord::round_curve(n, i).unwrap();
                for j in 1..n {
                    let mut d = c.clone();
                    d.apply(j as i32);
                    let far = j == i || (j as i64 - i as i64).abs() >= 2;
                    assert_eq!(d == c, far, "n={n} c_{i} under σ_{j}");
                }
            }
            // σ_i σ_{i+1} carries c_{i+1} back to c_i
            for i in 1..n - 1 {
                let mut c = DynnikovCoord::round_curve(n, i + 1).unwrap();
                c.apply_word(&[i as i32, i as i32 + 1]);
                assert_eq!(c, DynnikovCoord::round_curve(n, i).unwrap());
            }
        }
    }

}
