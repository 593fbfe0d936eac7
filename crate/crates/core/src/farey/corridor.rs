//! Finite corridors around Farey geodesics and bounded path enumeration.
//!
//! The corridor of radius R between s1 and s2 is the ladder of Farey
//! triangles crossed by the hyperbolic geodesic from s1 to s2 (it contains
//! every graph geodesic), together with the triangles hanging off its
//! boundary edges up to R generations deep.

use std::collections::{HashMap, HashSet, VecDeque};

use super::{act, Slope, INFINITY};
use crate::error::{Error, Result};
use crate::farey::FareyPath;
use crate::int::{floor_div, Int};

#[derive(Debug, Clone)]
pub struct Corridor {
    pub vertices: Vec<Slope>,
    pub index: HashMap<Slope, usize>,
    pub adj: Vec<Vec<usize>>,
    pub radius: u32,
}

fn mediant(a: &Slope, b: &Slope) -> Slope {
    Slope::new(a.p() + b.p(), a.q() + b.q()).expect("mediant of Farey neighbours")
}

fn less(a: &Slope, b: &Slope) -> bool {
    a.p() * b.q() < b.p() * a.q()
}

/// The two common neighbours of an edge (u, w): u + w and u - w.
fn apexes(u: &Slope, w: &Slope) -> [Slope; 2] {
    [
        Slope::new(u.p() + w.p(), u.q() + w.q()).expect("edge apex"),
        Slope::new(u.p() - w.p(), u.q() - w.q()).expect("edge apex"),
    ]
}

impl Corridor {
    /// Build the corridor; `budget` caps the number of vertices.
    pub fn new(s1: &Slope, s2: &Slope, radius: u32, budget: usize) -> Result<Corridor> {
        let g = s1.to_infinity();
        let ginv = g.inverse();
        let x = act(&g, s2);
        let mut triangles: Vec<[Slope; 3]> = Vec::new();
        let mut lone_edge: Option<(Slope, Slope)> = None;
        let mut singleton = false;
        if x.is_infinity() {
            singleton = true;
        } else if *x.q() == Int::ONE {
            lone_edge = Some((INFINITY, x));
        } else {
            let n: Int = floor_div(x.p(), x.q());
            let (mut l, mut r) = (Slope::integer(n.clone()), Slope::integer(n + Int::ONE));
            triangles.push([INFINITY, l.clone(), r.clone()]);
            loop {
                let m = mediant(&l, &r);
                triangles.push([l.clone(), m.clone(), r.clone()]);
                if triangles.len() > budget {
                    return Err(Error::Budget { emitted: triangles.len() });
                }
                if m == x {
                    break;
                }
                if less(&x, &m) {
                    r = m;
                } else {
                    l = m;
                }
            }
        }

        // Boundary edges with the vertex on the inner side (None: both sides free).
        let mut count: HashMap<(Slope, Slope), (usize, Slope)> = HashMap::new();
        for t in &triangles {
            for k in 0..3 {
                let (u, w, o) = (&t[k], &t[(k + 1) % 3], &t[(k + 2) % 3]);
                let key = if u < w { (u.clone(), w.clone()) } else { (w.clone(), u.clone()) };
                count.entry(key).and_modify(|e| e.0 += 1).or_insert((1, o.clone()));
            }
        }
        let mut frontier: Vec<(Slope, Slope, Option<Slope>)> = Vec::new();
        let mut boundary: Vec<_> =
            count.iter().filter(|(_, v)| v.0 == 1).map(|(k, v)| (k.0.clone(), k.1.clone(), Some(v.1.clone()))).collect();
        boundary.sort();
        frontier.extend(boundary);
        let mut edges: HashSet<(Slope, Slope)> = count.into_keys().collect();
        if let Some((u, w)) = lone_edge {
            frontier.push((u.clone(), w.clone(), None));
            edges.insert(ordered(u, w));
        }
        for _ in 0..radius {
            let mut next = Vec::new();
            for (u, w, inner) in frontier {
                for h in apexes(&u, &w) {
                    if Some(&h) == inner.as_ref() {
                        continue;
                    }
                    edges.insert(ordered(u.clone(), h.clone()));
                    edges.insert(ordered(w.clone(), h.clone()));
                    next.push((u.clone(), h.clone(), Some(w.clone())));
                    next.push((h, w.clone(), Some(u.clone())));
                }
            }
            frontier = next;
            if edges.len() > 3 * budget {
                return Err(Error::Budget { emitted: edges.len() });
            }
        }

        let mut vertices: Vec<Slope> = Vec::new();
        let mut adj: Vec<Vec<usize>> = Vec::new();
        let mut index: HashMap<Slope, usize> = HashMap::new();
        let mut id = |s: &Slope, vertices: &mut Vec<Slope>, adj: &mut Vec<Vec<usize>>| -> usize {
            let t = act(&ginv, s);
            *index.entry(t.clone()).or_insert_with(|| {
                vertices.push(t);
                adj.push(Vec::new());
                vertices.len() - 1
            })
        };
        id(&INFINITY, &mut vertices, &mut adj);
        if singleton {
            return Ok(Corridor { index: [(vertices[0].clone(), 0)].into_iter().collect(), vertices, adj, radius });
        }
        let mut sorted: Vec<_> = edges.into_iter().collect();
        sorted.sort();
        for (u, w) in sorted {
            let i = id(&u, &mut vertices, &mut adj);
            let j = id(&w, &mut vertices, &mut adj);
            adj[i].push(j);
            adj[j].push(i);
        }
        let index = vertices.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        if vertices.len() > budget {
            return Err(Error::Budget { emitted: vertices.len() });
        }
        Ok(Corridor { vertices, index, adj, radius })
    }

    pub fn contains(&self, s: &Slope) -> bool {
        self.index.contains_key(s)
    }

    /// Graph distances inside the corridor from vertex `src`.
    pub fn bfs(&self, src: usize) -> Vec<u32> {
        let mut d = vec![u32::MAX; self.vertices.len()];
        d[src] = 0;
        let mut q = VecDeque::from([src]);
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
}

/// Streaming enumeration of walks of length <= L_max from s1 to s2 inside the
/// corridor of radius R.
pub struct PathStream {
    corridor: Corridor,
    to_target: Vec<u32>,
    target: usize,
    l_max: usize,
    budget: usize,
    emitted: usize,
    stack: Vec<(usize, usize)>,
    started: bool,
    done: bool,
}

pub fn paths_within(s1: &Slope, s2: &Slope, l_max: usize, radius: u32, budget: usize) -> Result<PathStream> {
    let corridor = Corridor::new(s1, s2, radius, budget.max(1024))?;
    let src = corridor.index[s1];
    let target = corridor.index[s2];
    let to_target = corridor.bfs(target);
    Ok(PathStream {
        corridor,
        to_target,
        target,
        l_max,
        budget,
        emitted: 0,
        stack: vec![(src, 0)],
        started: false,
        done: false,
    })
}

impl PathStream {
    pub fn corridor(&self) -> &Corridor {
        &self.corridor
    }

    fn current(&self) -> FareyPath {
        FareyPath { vertices: self.stack.iter().map(|&(v, _)| self.corridor.vertices[v].clone()).collect() }
    }

    fn feasible(&self, v: usize, depth: usize) -> bool {
        (self.to_target[v] as usize) <= self.l_max - depth
    }

    /// Advance the DFS to the next node on the stack (pre-order).
    fn advance(&mut self) -> bool {
        loop {
            let depth = self.stack.len() - 1;
            let &(v, next) = self.stack.last().unwrap();
            if depth < self.l_max && next < self.corridor.adj[v].len() {
                self.stack.last_mut().unwrap().1 += 1;
                let w = self.corridor.adj[v][next];
                if self.feasible(w, depth + 1) {
                    self.stack.push((w, 0));
                    return true;
                }
            } else {
                self.stack.pop();
                if self.stack.is_empty() {
                    return false;
                }
            }
        }
    }
}

impl Iterator for PathStream {
    type Item = Result<FareyPath>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            let src = self.stack[0].0;
            if !self.feasible(src, 0) {
                self.done = true;
                return None;
            }
            if src == self.target {
                self.emitted += 1;
                return Some(Ok(self.current()));
            }
        }
        while self.advance() {
            if self.stack.last().unwrap().0 == self.target {
                if self.emitted >= self.budget {
                    self.done = true;
                    return Some(Err(Error::Budget { emitted: self.emitted }));
                }
                self.emitted += 1;
                return Some(Ok(self.current()));
            }
        }
        self.done = true;
        None
    }
}

fn ordered(u: Slope, w: Slope) -> (Slope, Slope) {
    if u < w {
        (u, w)
    } else {
        (w, u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> Slope {
        x.parse().unwrap()
    }

    #[test]
    fn corridor_edges_are_farey_edges() {
        let c = Corridor::new(&s("3/7"), &s("-11/4"), 2, 10_000).unwrap();
        for (i, nb) in c.adj.iter().enumerate() {
            for &j in nb {
                assert!(crate::farey::adjacent(&c.vertices[i], &c.vertices[j]));
            }
        }
        assert!(c.contains(&s("3/7")) && c.contains(&s("-11/4")));
    }

    #[test]
    fn trivial_streams() {
        assert_eq!(paths_within(&s("2/3"), &s("2/3"), 0, 2, 100).unwrap().count(), 1);
        let p: Vec<_> = paths_within(&s("0/1"), &INFINITY, 1, 2, 100).unwrap().collect();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].as_ref().unwrap().vertices, vec![s("0/1"), INFINITY]);
        assert_eq!(paths_within(&s("0/1"), &s("2/5"), 2, 1, 100).unwrap().count(), 2);
    }

    #[test]
    fn budget_is_reported() {
        let mut st = paths_within(&s("0/1"), &s("13/5"), 8, 2, 3).unwrap();
        let mut last = None;
        for r in st.by_ref() {
            last = Some(r);
        }
        assert_eq!(last, Some(Err(Error::Budget { emitted: 3 })));
    }
}
