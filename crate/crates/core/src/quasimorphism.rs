//! Counting quasimorphisms on the Farey graph, homogenization and defect
//! sampling, plus the braid-level wrappers used by the integral operator.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::braid::{BraidWord, IntMatrix2};
use crate::error::{Error, Result};
use crate::farey::{act, distance, step, Corridor, FareyPath, Slope, INFINITY};
use crate::int::Int;

pub const DEFAULT_RADIUS: u32 = 2;
pub const DEFAULT_CORRIDOR_BUDGET: usize = 400_000;

/// A pattern path ω with window W.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOmega", into = "RawOmega")]
pub struct OmegaSpec {
    omega: FareyPath,
    w: u32,
    turns: Vec<Int>,
}

#[derive(Serialize, Deserialize)]
struct RawOmega {
    omega: Vec<Slope>,
    #[serde(rename = "W", default = "one")]
    w: u32,
}

fn one() -> u32 {
    1
}

impl TryFrom<RawOmega> for OmegaSpec {
    type Error = Error;
    fn try_from(r: RawOmega) -> Result<Self> {
        OmegaSpec::new(FareyPath::new(r.omega)?, r.w)
    }
}

impl From<OmegaSpec> for RawOmega {
    fn from(o: OmegaSpec) -> Self {
        RawOmega { omega: o.omega.vertices, w: o.w }
    }
}

impl OmegaSpec {
    pub fn new(omega: FareyPath, w: u32) -> Result<Self> {
        let len = omega.len();
        if len < 2 {
            return Err(Error::Spec(format!("|ω| = {len}, need |ω| >= 2")));
        }
        if w == 0 || w as usize >= len {
            return Err(Error::Spec(format!("W = {w} violates 0 < W < |ω| = {len}")));
        }
        let turns = omega.turns();
        if turns.iter().any(|t| *t == Int::ZERO) {
            return Err(Error::Spec("ω backtracks".into()));
        }
        // Two copies offset by s share len - s edges; reject sharing of two or more.
        for s in 1..len - 1 {
            if turns[s..] == turns[..len - 1 - s] {
                return Err(Error::Spec(format!("ω overlaps itself at shift {s}")));
            }
        }
        Ok(OmegaSpec { omega, w, turns })
    }

    pub fn from_slopes(slopes: &[&str], w: u32) -> Result<Self> {
        let v = slopes.iter().map(|s| s.parse()).collect::<Result<Vec<Slope>>>()?;
        OmegaSpec::new(FareyPath::new(v)?, w)
    }

    /// Segment of the orbit α, Mα, ..., M^len α; a default pattern built
    /// from the axis of a hyperbolic element.
    pub fn axis_segment(m: &IntMatrix2, alpha: &Slope, len: usize, w: u32) -> Result<Self> {
        let mut v = vec![alpha.clone()];
        for _ in 0..len {
            v.push(act(m, v.last().unwrap()));
        }
        OmegaSpec::new(FareyPath::new(v)?, w)
    }

    pub fn path(&self) -> &FareyPath {
        &self.omega
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn window(&self) -> u32 {
        self.w
    }

    pub fn turns(&self) -> &[Int] {
        &self.turns
    }

    /// ω traversed backwards.
    pub fn inverse(&self) -> OmegaSpec {
        let omega = self.omega.reversed();
        let turns = omega.turns();
        OmegaSpec { omega, w: self.w, turns }
    }
}

/// Maximal number of edge-disjoint copies (PSL(2,Z)-translates) of ω in σ.
/// Every copy has the same length, so picking the leftmost copy first is an
/// optimal interval schedule.
pub fn copies_count(sigma: &FareyPath, omega: &FareyPath) -> usize {
    let l = omega.len();
    if l == 0 || sigma.len() < l {
        return 0;
    }
    let tw = omega.turns();
    let ts = sigma.turns();
    let mut count = 0;
    let mut i = 0;
    while i + l <= sigma.len() {
        if ts[i..i + l - 1] == tw[..] {
            count += 1;
            i += l;
        } else {
            i += 1;
        }
    }
    count
}

/// c_{ω,W}(α, β) over walks in the radius-R corridor.
pub fn c_omega(alpha: &Slope, beta: &Slope, spec: &OmegaSpec, radius: u32) -> Result<f64> {
    c_omega_budget(alpha, beta, spec, radius, DEFAULT_CORRIDOR_BUDGET)
}

pub fn c_omega_budget(alpha: &Slope, beta: &Slope, spec: &OmegaSpec, radius: u32, budget: usize) -> Result<f64> {
    if alpha == beta {
        return Ok(0.0);
    }
    let corridor = Corridor::new(alpha, beta, radius, budget)?;
    let d = distance(alpha, beta) as i64;
    let min = min_cost(&corridor, alpha, beta, spec)?;
    let l = spec.len() as i64;
    Ok((d * l - min) as f64 / l as f64)
}

/// min over walks σ of L·(|σ| − W·|σ|_ω), L = |ω|.
fn min_cost(c: &Corridor, alpha: &Slope, beta: &Slope, spec: &OmegaSpec) -> Result<i64> {
    let l = spec.len();
    let w = spec.window() as i64;
    let li = l as i64;
    let nv = c.vertices.len();
    // directed edge ids
    let mut offset = Vec::with_capacity(nv + 1);
    let mut acc = 0usize;
    for a in &c.adj {
        offset.push(acc);
        acc += a.len();
    }
    offset.push(acc);
    let ne = acc;
    // state ids: vertices [0, nv) free; copy states nv + e*(l-1) + (k-1)
    let total = nv + ne * (l - 1);
    let mut dist = vec![i64::MAX; total];
    let src = c.index[alpha];
    let dst = c.index[beta];
    let edge_id = |u: usize, v: usize| -> usize {
        let j = c.adj[u].iter().position(|&x| x == v).unwrap();
        offset[u] + j
    };
    let mut edge_ends = vec![(0usize, 0usize); ne];
    for u in 0..nv {
        for (j, &v) in c.adj[u].iter().enumerate() {
            edge_ends[offset[u] + j] = (u, v);
        }
    }
    let mut heap = BinaryHeap::new();
    dist[src] = 0;
    heap.push(Reverse((0i64, src)));
    while let Some(Reverse((cost, s))) = heap.pop() {
        if cost > dist[s] {
            continue;
        }
        if s == dst {
            return Ok(cost);
        }
        let mut relax = |t: usize, nc: i64, heap: &mut BinaryHeap<Reverse<(i64, usize)>>| {
            if nc < dist[t] {
                dist[t] = nc;
                heap.push(Reverse((nc, t)));
            }
        };
        if s < nv {
            for (j, &x) in c.adj[s].iter().enumerate() {
                relax(x, cost + li, &mut heap);
                let e = offset[s] + j;
                relax(nv + e * (l - 1), cost + li - w, &mut heap);
            }
        } else {
            let e = (s - nv) / (l - 1);
            let k = (s - nv) % (l - 1) + 1;
            let (u, v) = edge_ends[e];
            relax(v, cost + k as i64 * w, &mut heap);
            let nxt = step(&c.vertices[u], &c.vertices[v], &spec.turns()[k - 1]);
            if let Some(&x) = c.index.get(&nxt) {
                if k + 1 == l {
                    relax(x, cost + li - w, &mut heap);
                } else {
                    let e2 = edge_id(v, x);
                    relax(nv + e2 * (l - 1) + k, cost + li - w, &mut heap);
                }
            }
        }
    }
    Err(Error::Construction("corridor does not connect α and β".into()))
}

/// ψ_ω(M) = c_ω(α, Mα) − c_{ω⁻¹}(α, Mα).
pub fn psi_omega(m: &IntMatrix2, spec: &OmegaSpec, alpha: &Slope, radius: u32) -> Result<f64> {
    let beta = act(m, alpha);
    if beta == *alpha {
        return Ok(0.0);
    }
    Ok(c_omega(alpha, &beta, spec, radius)? - c_omega(alpha, &beta, &spec.inverse(), radius)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QmTerm {
    pub a: f64,
    #[serde(flatten)]
    pub omega: OmegaSpec,
}

/// Σ a_i ψ_{ω_i}, evaluated from the base slope α.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QmSpec {
    pub terms: Vec<QmTerm>,
    #[serde(default = "default_base")]
    pub base: Slope,
    #[serde(default = "default_radius")]
    pub radius: u32,
}

fn default_base() -> Slope {
    INFINITY
}

fn default_radius() -> u32 {
    DEFAULT_RADIUS
}

impl QmSpec {
    pub fn new(terms: Vec<(f64, OmegaSpec)>, base: Slope) -> Result<Self> {
        let q = QmSpec {
            terms: terms.into_iter().map(|(a, omega)| QmTerm { a, omega }).collect(),
            base,
            radius: DEFAULT_RADIUS,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn single(omega: OmegaSpec) -> Self {
        QmSpec { terms: vec![QmTerm { a: 1.0, omega }], base: INFINITY, radius: DEFAULT_RADIUS }
    }

    pub fn validate(&self) -> Result<()> {
        if self.terms.is_empty() {
            return Err(Error::Spec("a qm spec needs at least one term".into()));
        }
        if self.terms.iter().any(|t| !t.a.is_finite()) {
            return Err(Error::Spec("qm coefficients must be finite".into()));
        }
        Ok(())
    }

    /// C_ψ = Σ|a_i|.
    pub fn coefficient_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.a.abs()).sum()
    }

    pub fn eval(&self, m: &IntMatrix2) -> Result<f64> {
        let mut s = 0.0;
        for t in &self.terms {
            if t.a != 0.0 {
                s += t.a * psi_omega(m, &t.omega, &self.base, self.radius)?;
            }
        }
        Ok(s)
    }

    /// Homogenized value, computed on a reduced conjugate.
    pub fn eval_homogenized(&self, m: &IntMatrix2, p: u32, defect: f64) -> Result<QmValue> {
        if !m.is_hyperbolic() {
            return Ok(QmValue { value: 0.0, error: 0.0 });
        }
        let r = reduce_conjugacy(m);
        homogenize(|x: &IntMatrix2| self.eval(x), &r, p, defect)
    }
}

/// A value with its homogenization truncation bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QmValue {
    pub value: f64,
    pub error: f64,
}

/// Group elements admitting powers.
pub trait GroupElement: Clone {
    fn identity_like(&self) -> Self;
    fn mul(&self, other: &Self) -> Result<Self>;
    fn pow(&self, k: u32) -> Result<Self> {
        let mut acc = self.identity_like();
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }
}

impl GroupElement for IntMatrix2 {
    fn identity_like(&self) -> Self {
        IntMatrix2::identity()
    }
    fn mul(&self, other: &Self) -> Result<Self> {
        Ok(IntMatrix2::mul(self, other))
    }
    fn pow(&self, k: u32) -> Result<Self> {
        Ok(IntMatrix2::pow(self, k as i64))
    }
}

impl GroupElement for BraidWord {
    fn identity_like(&self) -> Self {
        BraidWord::identity(self.n)
    }
    fn mul(&self, other: &Self) -> Result<Self> {
        self.concat(other)
    }
    fn pow(&self, k: u32) -> Result<Self> {
        Ok(self.power(k as i64))
    }
}

/// ψ̄(x) ≈ ψ(x^P)/P with error D/P.
pub fn homogenize<G, F>(eval: F, x: &G, p_max: u32, defect: f64) -> Result<QmValue>
where
    G: GroupElement,
    F: Fn(&G) -> Result<f64>,
{
    if p_max == 0 {
        return Err(Error::Parameter("homogenize needs P_max >= 1".into()));
    }
    let xp = x.pow(p_max)?;
    Ok(QmValue { value: eval(&xp)? / p_max as f64, error: defect / p_max as f64 })
}

/// Largest sampled |ψ(a) − ψ(ab) + ψ(b)|: a lower bound on the defect.
pub fn defect_estimate<G, F, S>(eval: F, mut sampler: S, trials: usize, seed: u64) -> Result<f64>
where
    F: Fn(&G) -> Result<f64>,
    S: FnMut(&mut ChaCha8Rng) -> G,
    G: GroupElement,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for _ in 0..trials {
        let a = sampler(&mut rng);
        let b = sampler(&mut rng);
        let ab = a.mul(&b)?;
        let d = (eval(&a)? - eval(&ab)? + eval(&b)?).abs();
        best = best.max(d);
    }
    Ok(best)
}

fn r_gen() -> IntMatrix2 {
    IntMatrix2::new(1, 1, 0, 1)
}

fn l_gen() -> IntMatrix2 {
    IntMatrix2::new(1, 0, 1, 1)
}

/// Random product of up to `max_len` letters R^{±1}, L^{±1}.
pub fn random_psl2_word(rng: &mut ChaCha8Rng, max_len: usize) -> IntMatrix2 {
    let len = rng.gen_range(0..=max_len);
    let mut m = IntMatrix2::identity();
    for _ in 0..len {
        let g = match rng.gen_range(0..4) {
            0 => r_gen(),
            1 => r_gen().inverse(),
            2 => l_gen(),
            _ => l_gen().inverse(),
        };
        m = m.mul(&g);
    }
    m
}

/// A conjugate of m with locally minimal entries (greedy descent under
/// conjugation by R^{±1}, L^{±1}).
pub fn reduce_conjugacy(m: &IntMatrix2) -> IntMatrix2 {
    let mut cur = m.normalized();
    let gens = [r_gen(), r_gen().inverse(), l_gen(), l_gen().inverse()];
    loop {
        let mut best = cur.clone();
        for g in &gens {
            let c = cur.conjugate_by(g);
            if c.size() < best.size() {
                best = c.normalized();
            }
        }
        if best == cur {
            return cur;
        }
        cur = best;
    }
}

/// Real-valued functions on braids used as integrands.
pub trait BraidQm: Send + Sync {
    fn value(&self, w: &BraidWord) -> Result<f64>;
    fn name(&self) -> String;
    /// Words with equal keys are guaranteed equal values.
    fn cache_key(&self, _w: &BraidWord) -> Option<String> {
        None
    }
}

/// The writhe homomorphism.
pub struct Writhe;

impl BraidQm for Writhe {
    fn value(&self, w: &BraidWord) -> Result<f64> {
        Ok(w.writhe() as f64)
    }
    fn name(&self) -> String {
        "writhe".into()
    }
}

/// ψ∘sl2_image on B3, optionally homogenized at power P.
pub struct Sl2Qm {
    pub spec: QmSpec,
    pub homogenize: Option<u32>,
    pub label: String,
}

impl Sl2Qm {
    pub fn raw(spec: QmSpec, label: &str) -> Self {
        Sl2Qm { spec, homogenize: None, label: label.into() }
    }

    pub fn homogenized(spec: QmSpec, p: u32, label: &str) -> Self {
        Sl2Qm { spec, homogenize: Some(p), label: label.into() }
    }
}

impl BraidQm for Sl2Qm {
    fn value(&self, w: &BraidWord) -> Result<f64> {
        let m = w.sl2_image()?;
        match self.homogenize {
            None => self.spec.eval(&m),
            Some(p) => Ok(self.spec.eval_homogenized(&m, p, 0.0)?.value),
        }
    }
    fn name(&self) -> String {
        self.label.clone()
    }
    fn cache_key(&self, w: &BraidWord) -> Option<String> {
        w.sl2_image().ok().map(|m| m.normalized().to_string())
    }
}

/// Turns whose ψ sum is the default chiral integrand.
pub const CHIRAL_TURNS: [i64; 4] = [5, 7, 9, 11];
/// Large turns, sensitive to long twisting runs.
pub const TAIL_TURNS: [i64; 4] = [15, 18, 22, 28];

/// ω = (∞, 0, s) where s is reached from the edge (∞, 0) by turning t.
/// Turns ±1, ±2 produce paths that integrate to zero on the maps studied
/// here; turning −t mirrors turning t.
pub fn turn_omega(t: i64) -> Result<OmegaSpec> {
    let zero = Slope::from_i64(0, 1)?;
    let s = step(&INFINITY, &zero, &Int::from(t));
    OmegaSpec::new(FareyPath::new(vec![INFINITY, zero, s])?, 1)
}

/// Σ_t ψ over `turn_omega(t)` for t in `turns`.
pub fn turn_qm(turns: &[i64]) -> Result<QmSpec> {
    QmSpec::new(turns.iter().map(|&t| Ok((1.0, turn_omega(t)?))).collect::<Result<_>>()?, INFINITY)
}

/// Σ_k c_k · spec_k as one spec; all inputs must share base and radius.
pub fn combine(specs: &[QmSpec], coeffs: &[f64]) -> Result<QmSpec> {
    if specs.is_empty() || specs.len() != coeffs.len() {
        return Err(Error::Spec("combine needs one coefficient per spec".into()));
    }
    let (base, radius) = (specs[0].base.clone(), specs[0].radius);
    if specs.iter().any(|s| s.base != base || s.radius != radius) {
        return Err(Error::Spec("combined specs must share base slope and radius".into()));
    }
    let mut terms: Vec<QmTerm> = Vec::new();
    for (s, &c) in specs.iter().zip(coeffs) {
        for t in &s.terms {
            match terms.iter_mut().find(|u| u.omega == t.omega) {
                Some(u) => u.a += c * t.a,
                None => terms.push(QmTerm { a: c * t.a, omega: t.omega.clone() }),
            }
        }
    }
    let q = QmSpec { terms, base, radius };
    q.validate()?;
    Ok(q)
}

/// Product of up to `runs` factors R^{±e} or L^{±e}, 1 <= e <= max_exp.
pub fn random_psl2_runs(rng: &mut ChaCha8Rng, runs: usize, max_exp: i64) -> IntMatrix2 {
    let len = rng.gen_range(0..=runs);
    let mut m = IntMatrix2::identity();
    for _ in 0..len {
        let e = rng.gen_range(1..=max_exp) * if rng.gen::<bool>() { 1 } else { -1 };
        let g = if rng.gen::<bool>() { r_gen() } else { l_gen() };
        m = m.mul(&g.pow(e));
    }
    m
}

/// Defect lower bound of a spec. Half the trials use letter words of
/// length <= max_len, half use runs long enough to realise every turn of
/// every ω in the spec.
pub fn spec_defect(spec: &QmSpec, trials: usize, max_len: usize, seed: u64) -> Result<f64> {
    let big = spec.terms.iter().flat_map(|t| t.omega.turns().iter().map(crate::int::to_f64)).fold(2.0, |a: f64, b| a.max(b.abs()));
    let max_exp = 2 * big.min(1e6) as i64 + 4;
    defect_estimate(
        |m: &IntMatrix2| spec.eval(m),
        |rng: &mut ChaCha8Rng| {
            if rng.gen::<bool>() {
                random_psl2_word(rng, max_len)
            } else {
                random_psl2_runs(rng, max_len.div_ceil(2), max_exp)
            }
        },
        trials,
        seed,
    )
}
