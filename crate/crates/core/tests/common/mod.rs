#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use qmlab::farey::Slope;
use qmlab::int::Int;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Farey graph restricted to slopes with |p|, |q| <= bound.
pub struct BoundedFarey {
    pub vertices: Vec<Slope>,
    pub index: HashMap<Slope, usize>,
    pub adj: Vec<Vec<usize>>,
}

fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = egcd(b, a.rem_euclid(b));
        (g, y, x - (a.div_euclid(b)) * y)
    }
}

impl BoundedFarey {
    pub fn new(bound: i128) -> Self {
        let mut vertices = Vec::new();
        for q in 0..=bound {
            for p in -bound..=bound {
                if let Ok(s) = Slope::from_i64(p as i64, q as i64) {
                    if *s.p() == Int::from(p) && *s.q() == Int::from(q) {
                        vertices.push(s);
                    }
                }
            }
        }
        let index: HashMap<Slope, usize> = vertices.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let mut adj = vec![Vec::new(); vertices.len()];
        for (i, v) in vertices.iter().enumerate() {
            // all (r, s) with p s - q r = ±1 lie on the lines (r0, s0) + t (p, q)
            let (p, q) = (i128::try_from(v.p()).unwrap(), i128::try_from(v.q()).unwrap());
            let (g, x, y) = egcd(p, q);
            // x p + y q = g = ±1  =>  p·x - q·(-y) = g
            let (r0, s0) = (-y * g, x * g);
            for t in -3 * bound..=3 * bound {
                let (r, s) = (r0 + t * p, s0 + t * q);
                if r.abs() <= bound && s.abs() <= bound {
                    if let Ok(w) = Slope::from_i64(r as i64, s as i64) {
                        if let Some(&j) = index.get(&w) {
                            if j != i && !adj[i].contains(&j) {
                                adj[i].push(j);
                            }
                        }
                    }
                }
            }
        }
        BoundedFarey { vertices, index, adj }
    }

    pub fn bfs(&self, src: &Slope) -> Vec<u32> {
        let s = self.index[src];
        let mut d = vec![u32::MAX; self.vertices.len()];
        d[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &w in &self.adj[v] {
                if d[w] == u32::MAX {
                    d[w] = d[v] + 1;
                    q.push_back(w);
                }
            }
        }
        d
    }

    /// Number of walks of length <= l from a to b.
    pub fn count_walks(&self, a: &Slope, b: &Slope, l: usize) -> u64 {
        let n = self.vertices.len();
        let mut cur = vec![0u64; n];
        cur[self.index[a]] = 1;
        let t = self.index[b];
        let mut total = cur[t];
        for _ in 0..l {
            let mut next = vec![0u64; n];
            for v in 0..n {
                if cur[v] > 0 {
                    for &w in &self.adj[v] {
                        next[w] += cur[v];
                    }
                }
            }
            total += next[t];
            cur = next;
        }
        total
    }
}

pub fn random_slope(rng: &mut ChaCha8Rng, bound: i128) -> Slope {
    loop {
        let p = rng.gen_range(-bound..=bound);
        let q = rng.gen_range(0..=bound);
        if let Ok(s) = Slope::from_i64(p as i64, q as i64) {
            if *s.p() == Int::from(p) && *s.q() == Int::from(q) {
                return s;
            }
        }
    }
}
