//! Experiment configuration (TOML) and its semantic checks.

use std::collections::BTreeMap;
use std::path::PathBuf;

use qmlab::braid::BraidWord;
use qmlab::cocycle::TraceOptions;
use qmlab::dynamics::{egg_beater, Configuration, DiskMap, EggBeaterGeometry, Point, RigidMotion, Step};
use qmlab::farey::Slope;
use qmlab::gg::MCConfig;
use qmlab::quasimorphism::{turn_qm, BraidQm, QmSpec, QmTerm, Sl2Qm, Writhe, DEFAULT_RADIUS};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub maps: BTreeMap<String, MapSpec>,
    #[serde(default)]
    pub qms: BTreeMap<String, QmConfig>,
    #[serde(default)]
    pub mc: McSettings,
    #[serde(default)]
    pub trace: Option<TraceSection>,
    #[serde(default)]
    pub gg: Option<GgSection>,
    #[serde(default)]
    pub entropy: Option<EntropySection>,
    #[serde(default)]
    pub farey: Option<FareySection>,
    #[serde(default)]
    pub norms: Option<NormsSection>,
    #[serde(default)]
    pub verify: Option<VerifySection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Identity,
    EggBeater {
        tau: f64,
        #[serde(default)]
        geometry: Option<EggBeaterGeometry>,
        /// Spatial scale applied to the geometry.
        #[serde(default = "one")]
        scale: f64,
        /// Translation of the whole map.
        #[serde(default)]
        center: [f64; 2],
        #[serde(default = "one_i")]
        power: i64,
    },
    Steps {
        steps: Vec<Step>,
        #[serde(default)]
        center: [f64; 2],
        #[serde(default = "one_i")]
        power: i64,
    },
}

fn one() -> f64 {
    1.0
}

fn one_i() -> i64 {
    1
}

impl MapSpec {
    pub fn build(&self) -> qmlab::Result<DiskMap> {
        let (f, center, power) = match self {
            MapSpec::Identity => return Ok(DiskMap::identity()),
            MapSpec::EggBeater { tau, geometry, scale, center, power } => {
                (egg_beater(*tau, &geometry.unwrap_or_default().scaled(*scale))?, *center, *power)
            }
            MapSpec::Steps { steps, center, power } => (DiskMap::new(steps.clone())?, *center, *power),
        };
        let f = if center == [0.0, 0.0] { f } else { f.conjugated(&RigidMotion::translation(center[0], center[1])) };
        f.validate()?;
        Ok(f.power(power))
    }
}

/// A quasimorphism: `turns` shorthand, explicit `terms`, or the writhe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QmConfig {
    #[serde(default)]
    pub turns: Option<Vec<i64>>,
    #[serde(default)]
    pub terms: Option<Vec<QmTerm>>,
    #[serde(default)]
    pub base: Option<Slope>,
    #[serde(default)]
    pub radius: Option<u32>,
    /// Evaluate ψ(M^P)/P instead of ψ(M).
    #[serde(default)]
    pub homogenize: Option<u32>,
    #[serde(default)]
    pub writhe: bool,
}

pub enum BuiltQm {
    Sl2(Sl2Qm),
    Writhe,
}

impl BuiltQm {
    pub fn as_dyn(&self) -> &dyn BraidQm {
        match self {
            BuiltQm::Sl2(q) => q,
            BuiltQm::Writhe => &Writhe,
        }
    }

    pub fn spec(&self) -> Option<&QmSpec> {
        match self {
            BuiltQm::Sl2(q) => Some(&q.spec),
            BuiltQm::Writhe => None,
        }
    }
}

impl QmConfig {
    pub fn spec(&self) -> Result<Option<QmSpec>, String> {
        let kinds = self.turns.is_some() as u8 + self.terms.is_some() as u8 + self.writhe as u8;
        if kinds != 1 {
            return Err("exactly one of `turns`, `terms` or `writhe = true` must be given".into());
        }
        if self.writhe {
            return Ok(None);
        }
        let mut spec = match (&self.turns, &self.terms) {
            (Some(t), _) => {
                if t.is_empty() {
                    return Err("`turns` must not be empty".into());
                }
                if let Some(bad) = t.iter().find(|&&x| x == 0) {
                    return Err(format!("turn {bad} backtracks"));
                }
                turn_qm(t).map_err(|e| e.to_string())?
            }
            (_, Some(terms)) => QmSpec { terms: terms.clone(), base: qmlab::farey::INFINITY, radius: DEFAULT_RADIUS },
            _ => unreachable!(),
        };
        if let Some(b) = &self.base {
            spec.base = b.clone();
        }
        if let Some(r) = self.radius {
            spec.radius = r;
        }
        spec.validate().map_err(|e| e.to_string())?;
        Ok(Some(spec))
    }

    pub fn build(&self, id: &str) -> Result<BuiltQm, String> {
        Ok(match self.spec()? {
            None => BuiltQm::Writhe,
            Some(spec) => match self.homogenize {
                Some(p) if p == 0 => return Err("`homogenize` must be positive".into()),
                Some(p) => BuiltQm::Sl2(Sl2Qm::homogenized(spec, p, id)),
                None => BuiltQm::Sl2(Sl2Qm::raw(spec, id)),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSettings {
    #[serde(default = "three")]
    pub n: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_min_sep")]
    pub min_sep: f64,
    #[serde(default = "default_p_list")]
    pub p_list: Vec<u32>,
    #[serde(default)]
    pub trace: TraceOptions,
}

fn three() -> usize {
    3
}

fn default_samples() -> usize {
    2000
}

fn default_min_sep() -> f64 {
    1e-3
}

fn default_p_list() -> Vec<u32> {
    vec![16, 32, 64]
}

impl Default for McSettings {
    fn default() -> Self {
        McSettings { n: 3, samples: default_samples(), min_sep: default_min_sep(), p_list: default_p_list(), trace: TraceOptions::default() }
    }
}

impl McSettings {
    pub fn to_mc(&self, seed: u64) -> MCConfig {
        MCConfig { n: self.n, samples: self.samples, seed, min_sep: self.min_sep, p_list: self.p_list.clone(), trace: self.trace }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSection {
    pub map: String,
    /// Explicit configuration; otherwise `samples` random ones with `n` points.
    #[serde(default)]
    pub points: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub base: Option<Vec<[f64; 2]>>,
    #[serde(default = "three")]
    pub n: usize,
    #[serde(default = "one_u")]
    pub samples: usize,
    #[serde(default = "one_list")]
    pub powers: Vec<u32>,
}

fn one_u() -> usize {
    1
}

fn one_list() -> Vec<u32> {
    vec![1]
}

pub fn configuration(points: &[[f64; 2]]) -> qmlab::Result<Configuration> {
    Configuration::new(points.iter().map(|p| Point::new(p[0], p[1])).collect(), 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GgSection {
    pub maps: Vec<String>,
    pub qms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BraidEntry {
    pub n: usize,
    pub braid: Vec<i32>,
}

impl BraidEntry {
    pub fn build(&self) -> qmlab::Result<BraidWord> {
        BraidWord::new(self.n, self.braid.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapMethod {
    Bowen,
    CurveGrowth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSettings {
    #[serde(default)]
    pub center: [f64; 2],
    #[serde(default = "half")]
    pub radius: f64,
    #[serde(default = "default_vertices")]
    pub vertices: usize,
    #[serde(default = "default_curve_p")]
    pub p_max: u32,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn half() -> f64 {
    0.5
}

fn default_vertices() -> usize {
    64
}

fn default_curve_p() -> u32 {
    8
}

fn default_tol() -> f64 {
    1e-3
}

impl Default for CurveSettings {
    fn default() -> Self {
        CurveSettings { center: [0.0, 0.0], radius: 0.5, vertices: 64, p_max: 8, tol: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BowenSettings {
    #[serde(default = "default_eps")]
    pub eps_list: Vec<f64>,
    #[serde(default = "default_bowen_p")]
    pub p_max: u32,
    #[serde(default = "default_density")]
    pub grid_density: usize,
}

fn default_eps() -> Vec<f64> {
    vec![0.2, 0.1, 0.05]
}

fn default_bowen_p() -> u32 {
    6
}

fn default_density() -> usize {
    30
}

impl Default for BowenSettings {
    fn default() -> Self {
        BowenSettings { eps_list: default_eps(), p_max: default_bowen_p(), grid_density: default_density() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropySection {
    #[serde(default)]
    pub maps: Vec<String>,
    #[serde(default = "all_map_methods")]
    pub methods: Vec<MapMethod>,
    #[serde(default)]
    pub braids: Vec<BraidEntry>,
    #[serde(default = "default_braid_p")]
    pub braid_p_max: u32,
    #[serde(default)]
    pub bowen: BowenSettings,
    #[serde(default)]
    pub curve: CurveSettings,
}

fn all_map_methods() -> Vec<MapMethod> {
    vec![MapMethod::Bowen, MapMethod::CurveGrowth]
}

fn default_braid_p() -> u32 {
    40
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FareyQuery {
    Distance { a: Slope, b: Slope },
    Tau {
        matrix: [i64; 4],
        #[serde(default = "default_tau_p")]
        p_max: u32,
    },
    Qm {
        qm: String,
        matrix: [i64; 4],
        #[serde(default)]
        homogenize: Option<u32>,
    },
}

fn default_tau_p() -> u32 {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FareySection {
    pub queries: Vec<FareyQuery>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormsSection {
    #[serde(default)]
    pub bound: Option<BoundSettings>,
    #[serde(default)]
    pub embed: Option<EmbedSettings>,
    #[serde(default = "default_defect_trials")]
    pub defect_trials: usize,
    #[serde(default = "default_defect_len")]
    pub defect_len: usize,
}

fn default_defect_trials() -> usize {
    2000
}

fn default_defect_len() -> usize {
    12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSettings {
    pub map: String,
    pub qms: Vec<String>,
    #[serde(default = "one_list_i")]
    pub powers: Vec<i64>,
    #[serde(default = "two")]
    pub defect_multiplier: f64,
    /// Samples for the vanishing checks on autonomous witnesses.
    #[serde(default = "default_samples")]
    pub vanishing_samples: usize,
}

fn one_list_i() -> Vec<i64> {
    vec![1]
}

fn two() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbedSettings {
    /// One seed map per family member.
    pub seeds: Vec<String>,
    /// Base specs combined into duals on the calibration sample.
    pub base_qms: Vec<String>,
    #[serde(default)]
    pub k: Vec<Vec<i64>>,
    /// Seed offset of the calibration sample relative to the run seed.
    #[serde(default = "one_u64")]
    pub calibration_offset: u64,
    #[serde(default)]
    pub product_samples: Option<usize>,
    #[serde(default)]
    pub product_p_list: Option<Vec<u32>>,
}

fn one_u64() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    /// Include the Monte-Carlo groups (minutes of run time).
    #[serde(default)]
    pub full: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
    pub warning: bool,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}: {}", if self.warning { "warning" } else { "error" }, self.field, self.message)
    }
}

pub fn parse(text: &str) -> Result<ExperimentConfig, Vec<Diagnostic>> {
    toml::from_str(text).map_err(|e| {
        let field = match e.span() {
            Some(s) => {
                let line = text[..s.start].matches('\n').count() + 1;
                let col = s.start - text[..s.start].rfind('\n').map_or(0, |i| i + 1) + 1;
                format!("line {line}, column {col}")
            }
            None => "document".into(),
        };
        vec![Diagnostic { field, message: e.message().to_string(), warning: false }]
    })
}

impl ExperimentConfig {
    /// Semantic diagnostics; an empty list (or warnings only) means valid.
    pub fn check(&self) -> Vec<Diagnostic> {
        let mut d = Vec::new();
        let mut err = |field: String, message: String| d.push(Diagnostic { field, message, warning: false });
        for (id, m) in &self.maps {
            if let Err(e) = m.build() {
                err(format!("maps.{id}"), e.to_string());
            }
        }
        for (id, q) in &self.qms {
            if let Err(e) = q.build(id) {
                err(format!("qms.{id}"), e);
            }
        }
        let mc = self.mc.to_mc(self.seed);
        if !(self.mc.min_sep > 0.0) {
            err("mc.min_sep".into(), "min_sep must be positive".into());
        } else if let Err(e) = mc.validate() {
            err("mc".into(), e.to_string());
        }
        let has_map = |m: &String| self.maps.contains_key(m);
        let has_qm = |q: &String| self.qms.contains_key(q);
        if let Some(t) = &self.trace {
            if !has_map(&t.map) {
                err("trace.map".into(), format!("unknown map `{}`", t.map));
            }
            if t.powers.is_empty() || t.powers.contains(&0) {
                err("trace.powers".into(), "powers must be a nonempty list of positive integers".into());
            }
            if let Some(p) = &t.points {
                if let Err(e) = configuration(p) {
                    err("trace.points".into(), e.to_string());
                }
                if let Some(b) = &t.base {
                    if b.len() != p.len() {
                        err("trace.base".into(), "base and points must have the same length".into());
                    }
                }
            } else if t.n < 2 || t.samples == 0 {
                err("trace".into(), "random traces need n >= 2 and samples >= 1".into());
            }
            if let Some(b) = &t.base {
                if let Err(e) = configuration(b) {
                    err("trace.base".into(), e.to_string());
                }
            }
        }
        if let Some(g) = &self.gg {
            if g.maps.is_empty() || g.qms.is_empty() {
                err("gg".into(), "gg needs at least one map and one qm".into());
            }
            for m in g.maps.iter().filter(|m| !has_map(m)) {
                err("gg.maps".into(), format!("unknown map `{m}`"));
            }
            for q in g.qms.iter().filter(|q| !has_qm(q)) {
                err("gg.qms".into(), format!("unknown qm `{q}`"));
            }
        }
        if let Some(e) = &self.entropy {
            for m in e.maps.iter().filter(|m| !has_map(m)) {
                err("entropy.maps".into(), format!("unknown map `{m}`"));
            }
            for (i, b) in e.braids.iter().enumerate() {
                if let Err(x) = b.build() {
                    err(format!("entropy.braids[{i}]"), x.to_string());
                }
            }
            if e.braid_p_max < 8 {
                err("entropy.braid_p_max".into(), "braid_p_max must be at least 8".into());
            }
            let b = &e.bowen;
            if b.eps_list.is_empty() || b.eps_list.windows(2).any(|w| w[1] >= w[0]) || b.eps_list[0] <= 0.0 {
                err("entropy.bowen.eps_list".into(), "eps_list must be positive and strictly decreasing".into());
            }
            if b.p_max == 0 || b.grid_density < 2 {
                err("entropy.bowen".into(), "p_max >= 1 and grid_density >= 2 required".into());
            }
            let c = &e.curve;
            if c.vertices < 3 || !(c.radius > 0.0) || c.p_max == 0 || !(c.tol > 0.0) {
                err("entropy.curve".into(), "need vertices >= 3, radius > 0, p_max >= 1, tol > 0".into());
            } else if Point::new(c.center[0], c.center[1]).norm() + c.radius >= 1.0 {
                err("entropy.curve".into(), "curve must lie inside the open disk".into());
            }
        }
        if let Some(f) = &self.farey {
            for (i, q) in f.queries.iter().enumerate() {
                match q {
                    FareyQuery::Qm { qm, .. } if !has_qm(qm) => err(format!("farey.queries[{i}].qm"), format!("unknown qm `{qm}`")),
                    FareyQuery::Qm { matrix, .. } | FareyQuery::Tau { matrix, .. } if !det_one(matrix) => {
                        err(format!("farey.queries[{i}].matrix"), "matrix must have determinant 1".into())
                    }
                    FareyQuery::Tau { p_max, .. } if *p_max < 2 => err(format!("farey.queries[{i}].p_max"), "p_max must be at least 2".into()),
                    _ => {}
                }
            }
        }
        if let Some(n) = &self.norms {
            if n.defect_trials == 0 {
                err("norms.defect_trials".into(), "defect_trials must be positive".into());
            }
            if let Some(b) = &n.bound {
                if !has_map(&b.map) {
                    err("norms.bound.map".into(), format!("unknown map `{}`", b.map));
                }
                if b.qms.is_empty() {
                    err("norms.bound.qms".into(), "at least one qm is required".into());
                }
                for q in b.qms.iter().filter(|q| !has_qm(q)) {
                    err("norms.bound.qms".into(), format!("unknown qm `{q}`"));
                }
                if !(b.defect_multiplier >= 1.0) {
                    err("norms.bound.defect_multiplier".into(), "must be at least 1".into());
                }
                if b.powers.iter().any(|&p| p < 1) {
                    err("norms.bound.powers".into(), "powers must be positive".into());
                }
            }
            if let Some(e) = &n.embed {
                for m in e.seeds.iter().filter(|m| !has_map(m)) {
                    err("norms.embed.seeds".into(), format!("unknown map `{m}`"));
                }
                for q in e.base_qms.iter().filter(|q| !has_qm(q)) {
                    err("norms.embed.base_qms".into(), format!("unknown qm `{q}`"));
                }
                if e.seeds.is_empty() || e.seeds.len() != e.base_qms.len() {
                    err("norms.embed".into(), "need as many base qms as seed maps (at least one)".into());
                }
                if e.k.iter().any(|k| k.len() != e.seeds.len()) {
                    err("norms.embed.k".into(), "every k-vector needs one entry per seed map".into());
                }
                if e.calibration_offset == 0 {
                    err("norms.embed.calibration_offset".into(), "calibration must use an independent seed (offset > 0)".into());
                }
            }
        }
        drop(err);
        let uses_sl2 = self.qms.values().any(|q| !q.writhe);
        if uses_sl2 && self.mc.n != 3 {
            d.push(Diagnostic { field: "mc.n".into(), message: "ψ_ω specs read braids through B3 → PSL(2,Z); n ≠ 3 will fail".into(), warning: true });
        }
        if self.mc.samples < 1000 && (self.gg.is_some() || self.norms.is_some()) {
            d.push(Diagnostic { field: "mc.samples".into(), message: "fewer than 1000 samples: error bars will dominate".into(), warning: true });
        }
        if self.mc.p_list.len() < 2 && self.gg.is_some() {
            d.push(Diagnostic { field: "mc.p_list".into(), message: "a single power gives no stabilization slope".into(), warning: true });
        }
        d
    }

    pub fn map(&self, id: &str) -> qmlab::Result<DiskMap> {
        self.maps.get(id).ok_or_else(|| qmlab::Error::Spec(format!("unknown map `{id}`")))?.build()
    }

    pub fn qm(&self, id: &str) -> qmlab::Result<BuiltQm> {
        self.qms
            .get(id)
            .ok_or_else(|| qmlab::Error::Spec(format!("unknown qm `{id}`")))?
            .build(id)
            .map_err(qmlab::Error::Spec)
    }
}

fn det_one(m: &[i64; 4]) -> bool {
    (m[0] as i128) * (m[3] as i128) - (m[1] as i128) * (m[2] as i128) == 1
}
