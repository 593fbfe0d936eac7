//! Entropy-norm lower bounds from quasimorphisms, and the certificate that
//! disjointly supported conjugates span a quasi-isometric copy of Z^m.
//!
//! Units: a stabilized estimate Ψ(f) is an integral over configurations, so
//! its defect is at most volume · D(ψ). Bounds divide by that product.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{DiskMap, Point, Primitive, RadialProfile, RigidMotion, ShearProfile};
use crate::error::{Error, Result};
use crate::gg::{gg_from_samples, sample_braids, vanishing_check, GGEstimate, MCConfig, VanishingReport};
use crate::quasimorphism::{combine, BraidQm, QmSpec, Sl2Qm};

/// Single autonomous primitives used as vanishing witnesses.
pub fn autonomous_witnesses() -> Vec<(String, DiskMap)> {
    let prims = [
        ("radial_smoothstep", Primitive::RadialFlow { profile: RadialProfile::Smoothstep, time: 1.0, radius: 0.95 }),
        ("radial_bump", Primitive::RadialFlow { profile: RadialProfile::Bump, time: 1.0, radius: 0.95 }),
        (
            "shear_push",
            Primitive::StripShear {
                axis: 0.0,
                offset: 0.0,
                half_length: 0.9,
                half_width: 0.6,
                inner: 0.0,
                strength: 8.0,
                profile: ShearProfile::Push,
            },
        ),
        (
            "shear_twist",
            Primitive::StripShear {
                axis: 0.3,
                offset: 0.1,
                half_length: 0.8,
                half_width: 0.5,
                inner: 0.2,
                strength: 3.0,
                profile: ShearProfile::Twist,
            },
        ),
        ("annulus_twist", Primitive::AnnulusTwist { center: [0.1, 0.0], r_in: 0.2, r_out: 0.7, turns: 1.0 }),
        ("hamiltonian_push", Primitive::HamiltonianPush { center: [0.1, 0.0], r_in: 0.1, r_out: 0.8, time: 1.5 }),
    ];
    prims.into_iter().map(|(n, p)| (n.to_string(), DiskMap::single(p).expect("witness primitives are valid"))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VanishingEvidence {
    pub map: String,
    pub report: VanishingReport,
}

/// Runs `vanishing_check` of `qm` on every witness.
pub fn vanishing_suite(qm: &dyn BraidQm, witnesses: &[(String, DiskMap)], mc: &MCConfig) -> Result<Vec<VanishingEvidence>> {
    witnesses
        .iter()
        .map(|(name, f)| Ok(VanishingEvidence { map: name.clone(), report: vanishing_check(qm, f, mc)? }))
        .collect()
}

/// A quasimorphism entering a norm bound, with its defect lower bound and
/// the evidence that it vanishes on entropy-zero generators.
pub struct NormQm<'a> {
    pub qm: &'a dyn BraidQm,
    pub defect: f64,
    pub vanishing: Vec<VanishingEvidence>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub qm: String,
    pub estimate: f64,
    pub ci: f64,
    /// Defect lower bound of ψ (per unit volume).
    pub defect: f64,
    /// |Ψ(f)| / (volume · D̂) when |Ψ(f)| exceeds 3·ci, else 0. Indicative,
    /// since D̂ only bounds the defect from below.
    pub bound: f64,
    /// (|Ψ(f)| − 3·ci)⁺ / (multiplier · volume · D̂).
    pub conservative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedQm {
    pub qm: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormBoundReport {
    pub map: String,
    pub rows: Vec<NormRow>,
    pub excluded: Vec<ExcludedQm>,
    pub best: f64,
    pub best_conservative: f64,
    pub defect_multiplier: f64,
    pub assumptions: Vec<String>,
}

pub fn entropy_norm_lower(map: &str, f: &DiskMap, qms: &[NormQm], mc: &MCConfig, defect_multiplier: f64) -> Result<NormBoundReport> {
    if qms.is_empty() {
        return Err(Error::Parameter("entropy_norm_lower needs at least one quasimorphism".into()));
    }
    if !(defect_multiplier >= 1.0) {
        return Err(Error::Parameter("defect multiplier must be at least 1".into()));
    }
    let mut excluded = Vec::new();
    let mut kept = Vec::new();
    let mut assumptions = Vec::new();
    for q in qms {
        let failed: Vec<&str> = q.vanishing.iter().filter(|v| !v.report.vanishes).map(|v| v.map.as_str()).collect();
        let reason = if q.vanishing.is_empty() {
            Some("no vanishing evidence".to_string())
        } else if !failed.is_empty() {
            Some(format!("does not vanish on {}", failed.join(", ")))
        } else if !(q.defect > 0.0) {
            Some("defect estimate is not positive".to_string())
        } else {
            None
        };
        match reason {
            Some(reason) => excluded.push(ExcludedQm { qm: q.qm.name(), reason }),
            None => {
                let maps: Vec<&str> = q.vanishing.iter().map(|v| v.map.as_str()).collect();
                assumptions.push(format!(
                    "{} vanishes within 3 ci on autonomous witnesses [{}]; Ent(S) generation licensed, not checked",
                    q.qm.name(),
                    maps.join(", ")
                ));
                kept.push(q);
            }
        }
    }
    assumptions.push("defects are sampled lower bounds: rows are indicative".into());
    let rows = if kept.is_empty() {
        Vec::new()
    } else {
        let s = sample_braids(f, mc)?;
        let refs: Vec<&dyn BraidQm> = kept.iter().map(|q| q.qm).collect();
        let est = gg_from_samples(&refs, &s, mc.volume_factor())?;
        kept.iter().zip(est).map(|(q, e)| norm_row(&e, q.defect, defect_multiplier)).collect()
    };
    let best = rows.iter().map(|r| r.bound).fold(0.0, f64::max);
    let best_conservative = rows.iter().map(|r| r.conservative).fold(0.0, f64::max);
    Ok(NormBoundReport { map: map.into(), rows, excluded, best, best_conservative, defect_multiplier, assumptions })
}

fn norm_row(e: &GGEstimate, defect: f64, multiplier: f64) -> NormRow {
    let a = e.stabilized.abs();
    let d = defect * e.volume_factor;
    NormRow {
        qm: e.qm.clone(),
        estimate: e.stabilized,
        ci: e.ci,
        defect,
        bound: if a > 3.0 * e.ci { a / d } else { 0.0 },
        conservative: (a - 3.0 * e.ci).max(0.0) / (multiplier * d),
    }
}

/// Centres of m balls of radius < 1/m on the horizontal diameter.
fn slot(i: usize, m: usize) -> Point {
    Point::new(-1.0 + (2 * i + 1) as f64 / m as f64, 0.0)
}

/// Seed i recentred and moved to slot i. Each seed's support ball must
/// have radius < 1/m.
pub fn build_family_from_seeds(seeds: &[DiskMap]) -> Result<Vec<DiskMap>> {
    let m = seeds.len();
    if m == 0 {
        return Err(Error::Parameter("empty seed list".into()));
    }
    let out: Vec<DiskMap> = seeds
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let (c, r) = f.support_ball().ok_or_else(|| Error::Construction("seed map is not compactly supported".into()))?;
            if r >= 1.0 / m as f64 {
                return Err(Error::Construction(format!("support radius {r} is not below 1/m = {}", 1.0 / m as f64)));
            }
            if m == 1 {
                return Ok(f.clone());
            }
            let t = slot(i, m);
            Ok(f.conjugated(&RigidMotion::translation(t.x - c.x, t.y - c.y)))
        })
        .collect::<Result<_>>()?;
    if !pairwise_disjoint(&out) {
        return Err(Error::Construction("family supports overlap".into()));
    }
    Ok(out)
}

/// m translates of f0 with pairwise disjoint supports.
pub fn build_disjoint_family(f0: &DiskMap, m: usize) -> Result<Vec<DiskMap>> {
    if m == 0 {
        return Err(Error::Parameter("m must be at least 1".into()));
    }
    build_family_from_seeds(&vec![f0.clone(); m])
}

/// Support balls pairwise disjoint and inside the closed disk.
pub fn pairwise_disjoint(family: &[DiskMap]) -> bool {
    let balls: Option<Vec<(Point, f64)>> = family.iter().map(|f| f.support_ball()).collect();
    let Some(balls) = balls else { return false };
    let inside = balls.iter().all(|(c, r)| c.norm() + r <= 1.0);
    inside && balls.iter().enumerate().all(|(i, a)| balls[i + 1..].iter().all(|b| a.0.dist(&b.0) > a.1 + b.1))
}

/// Per-generator entropy-norm upper bound from the construction: the
/// number of autonomous factors.
pub fn construction_norm(f: &DiskMap) -> Option<usize> {
    f.steps.iter().all(|s| s.primitive.is_autonomous_family()).then_some(f.steps.len())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub value: f64,
    pub ci: f64,
}

/// Ψ_i(f_j) for base specs; `duals[i]` = Σ_k (A⁻¹)_{ik} base_k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub matrix: Vec<Vec<Entry>>,
    pub inverse: Vec<Vec<f64>>,
    pub duals: Vec<QmSpec>,
    pub seed: u64,
}

fn estimate_matrix(family: &[DiskMap], qms: &[Sl2Qm], mc: &MCConfig) -> Result<Vec<Vec<Entry>>> {
    let refs: Vec<&dyn BraidQm> = qms.iter().map(|q| q as &dyn BraidQm).collect();
    // Columns are independent sample sets; rows share each column's braids.
    let cols: Vec<Vec<GGEstimate>> = family
        .par_iter()
        .map(|f| {
            let s = sample_braids(f, mc)?;
            gg_from_samples(&refs, &s, mc.volume_factor())
        })
        .collect::<Result<_>>()?;
    Ok((0..qms.len()).map(|i| cols.iter().map(|c| Entry { value: c[i].stabilized, ci: c[i].ci }).collect()).collect())
}

fn invert(a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let m = a.len();
    let mut aug: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..m).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    let scale = a.iter().flatten().fold(0.0f64, |s, x| s.max(x.abs()));
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| aug[i][col].abs().total_cmp(&aug[j][col].abs())).unwrap();
        if !(aug[piv][col].abs() > 1e-12 * scale) {
            return Err(Error::Degeneracy("calibration matrix is singular".into()));
        }
        aug.swap(col, piv);
        let p = aug[col][col];
        aug[col].iter_mut().for_each(|x| *x /= p);
        for r in 0..m {
            if r != col {
                let f = aug[r][col];
                if f != 0.0 {
                    let pr = aug[col].clone();
                    aug[r].iter_mut().zip(&pr).for_each(|(x, y)| *x -= f * y);
                }
            }
        }
    }
    Ok(aug.into_iter().map(|r| r[m..].to_vec()).collect())
}

/// Estimates A_ij = Ψ_{base_i}(f_j) and the dual specs normalised to
/// Ψ'_i(f_j) = δ_ij on this sample.
pub fn calibrate_duals(family: &[DiskMap], base: &[QmSpec], mc: &MCConfig) -> Result<Calibration> {
    if family.len() != base.len() {
        return Err(Error::Parameter(format!("{} maps but {} base specs", family.len(), base.len())));
    }
    let qms: Vec<Sl2Qm> = base.iter().enumerate().map(|(i, s)| Sl2Qm::raw(s.clone(), &format!("base{i}"))).collect();
    let matrix = estimate_matrix(family, &qms, mc)?;
    let a: Vec<Vec<f64>> = matrix.iter().map(|r| r.iter().map(|e| e.value).collect()).collect();
    let inverse = invert(&a)?;
    let duals = inverse.iter().map(|c| combine(base, c)).collect::<Result<_>>()?;
    Ok(Calibration { matrix, inverse, duals, seed: mc.seed })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KTrial {
    pub k: Vec<i64>,
    pub lower: f64,
    pub upper: f64,
    /// Ψ_i of the product f_1^{k_1}⋯f_m^{k_m}, when measured.
    pub measured: Option<Vec<Entry>>,
    /// Whether every measured Ψ_i is within 3·ci of k_i.
    pub linear: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Offending {
    pub i: usize,
    pub j: usize,
    pub value: f64,
    pub ci: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingCertificate {
    pub m: usize,
    pub supports: Vec<(Point, f64)>,
    pub qms: Vec<String>,
    pub matrix: Vec<Vec<Entry>>,
    /// max_i volume · D̂(ψ_i).
    pub defect_bound: f64,
    /// max_i construction norm of f_i.
    pub norm_bound: f64,
    pub trials: Vec<KTrial>,
    pub valid: bool,
    pub offending: Vec<Offending>,
    pub seed: u64,
    pub note: String,
}

pub struct CertificateInput<'a> {
    pub family: &'a [DiskMap],
    pub qms: &'a [Sl2Qm],
    /// Per-unit-volume defect lower bounds, one per qm.
    pub defects: &'a [f64],
    pub k_vectors: &'a [Vec<i64>],
    pub mc: &'a MCConfig,
    /// Sampling settings for products; None skips the linearity check.
    pub product_mc: Option<&'a MCConfig>,
}

fn product(family: &[DiskMap], k: &[i64]) -> DiskMap {
    family.iter().zip(k).fold(DiskMap::identity(), |acc, (f, &e)| DiskMap::compose(&acc, &f.power(e)))
}

pub fn zm_embedding_report(input: &CertificateInput) -> Result<EmbeddingCertificate> {
    let m = input.family.len();
    if m == 0 || input.qms.len() != m || input.defects.len() != m {
        return Err(Error::Parameter("need one qm and one defect per family member".into()));
    }
    if !pairwise_disjoint(input.family) {
        return Err(Error::Construction("family supports are not pairwise disjoint".into()));
    }
    if input.k_vectors.iter().any(|k| k.len() != m) {
        return Err(Error::Parameter(format!("k-vectors must have length {m}")));
    }
    let norms: Vec<usize> = input
        .family
        .iter()
        .map(|f| construction_norm(f).ok_or_else(|| Error::Construction("family member has a non-autonomous factor".into())))
        .collect::<Result<_>>()?;
    let matrix = estimate_matrix(input.family, input.qms, input.mc)?;
    let mut offending = Vec::new();
    for (i, row) in matrix.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            if (e.value - target).abs() > 3.0 * e.ci {
                offending.push(Offending { i, j, value: e.value, ci: e.ci });
            }
        }
    }
    let volume = input.mc.volume_factor();
    let defect_bound = input.defects.iter().fold(0.0f64, |a, &d| a.max(d)) * volume;
    let norm_bound = norms.iter().copied().max().unwrap_or(0) as f64;
    let mut trials = Vec::new();
    for k in input.k_vectors {
        let l1: i64 = k.iter().map(|x| x.abs()).sum();
        let lower = if l1 == 0 { 0.0 } else { l1 as f64 / (m as f64 * defect_bound) };
        let upper = norm_bound * l1 as f64;
        let (measured, linear) = match input.product_mc {
            Some(pmc) if l1 > 0 => {
                let g = product(input.family, k);
                let refs: Vec<&dyn BraidQm> = input.qms.iter().map(|q| q as &dyn BraidQm).collect();
                let est = gg_from_samples(&refs, &sample_braids(&g, pmc)?, pmc.volume_factor())?;
                let entries: Vec<Entry> = est.iter().map(|e| Entry { value: e.stabilized, ci: e.ci }).collect();
                let ok = entries.iter().zip(k).all(|(e, &ki)| (e.value - ki as f64).abs() <= 3.0 * e.ci);
                (Some(entries), Some(ok))
            }
            _ => (None, None),
        };
        trials.push(KTrial { k: k.clone(), lower, upper, measured, linear });
    }
    Ok(EmbeddingCertificate {
        m,
        supports: input.family.iter().map(|f| f.support_ball().unwrap()).collect(),
        qms: input.qms.iter().map(|q| q.name()).collect(),
        matrix,
        defect_bound,
        norm_bound,
        trials,
        valid: offending.is_empty(),
        offending,
        seed: input.mc.seed,
        note: "lower bounds hold modulo defect estimation".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{egg_beater, EggBeaterGeometry};

    fn small_egg() -> DiskMap {
        egg_beater(8.0, &EggBeaterGeometry::default().scaled(0.2)).unwrap()
    }

    #[test]
    fn family_geometry() {
        let f0 = small_egg();
        assert_eq!(build_disjoint_family(&f0, 1).unwrap(), vec![f0.clone()]);
        let fam = build_disjoint_family(&f0, 3).unwrap();
        assert!(pairwise_disjoint(&fam));
        let p = Point::new(-0.62, 0.03);
        for i in 0..3 {
            for j in 0..3 {
                let a = fam[i].eval(&fam[j].eval(&p).unwrap()).unwrap();
                let b = fam[j].eval(&fam[i].eval(&p).unwrap()).unwrap();
                assert!(a.dist(&b) < 1e-12);
            }
        }
        let big = egg_beater(8.0, &EggBeaterGeometry::default().scaled(0.5)).unwrap();
        assert!(build_disjoint_family(&big, 3).is_err());
    }

    #[test]
    fn inverse_of_small_matrix() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 1.0]];
        let b = invert(&a).unwrap();
        assert_eq!(b, vec![vec![1.0, -1.0], vec![-1.0, 2.0]]);
        assert!(invert(&[vec![1.0, 2.0], vec![2.0, 4.0]]).is_err());
    }

    #[test]
    fn construction_counts() {
        assert_eq!(construction_norm(&small_egg()), Some(2));
        assert_eq!(construction_norm(&DiskMap::single(Primitive::RigidRotation { angle: 1.0 }).unwrap()), None);
    }

    #[test]
    fn empty_qm_list_is_an_error() {
        let mc = MCConfig::new(3, 10, 0, vec![1, 2]);
        assert!(entropy_norm_lower("id", &DiskMap::identity(), &[], &mc, 2.0).is_err());
    }
}
