//! One function per subcommand. Each writes its rows into the run as it
//! goes, so an aborted run still leaves flagged partial tables.

use qmlab::braid::IntMatrix2;
use qmlab::cocycle::extract_powers;
use qmlab::dynamics::{Configuration, PolyCurve, Point, DEFAULT_MARGIN};
use qmlab::entropy::{bowen_entropy, braid_entropy, braid_entropy_sl2, curve_growth, BowenOptions, EntropyEstimate, ErrorBar};
use qmlab::farey::{act, distance, translation_length, Slope};
use qmlab::gg::{gg_from_samples, sample_braids, MCConfig};
use qmlab::norms::{
    autonomous_witnesses, build_family_from_seeds, calibrate_duals, entropy_norm_lower, vanishing_suite, zm_embedding_report,
    CertificateInput, NormQm,
};
use qmlab::quasimorphism::{c_omega_budget, reduce_conjugacy, spec_defect, BraidQm, QmSpec, Sl2Qm, DEFAULT_CORRIDOR_BUDGET};
use qmlab::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{configuration, BuiltQm, ExperimentConfig, FareyQuery, MapMethod};
use crate::output::{num, Run};
use crate::suite;
use crate::CliError;

pub const DEFAULT_CURVE_BUDGET: usize = 200_000;

fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    s.as_ref().ok_or_else(|| CliError::Usage(format!("the configuration has no [{name}] section")))
}

fn points_str(x: &Configuration) -> String {
    x.points.iter().map(|p| format!("{} {}", num(p.x), num(p.y))).collect::<Vec<_>>().join(";")
}

pub fn trace(cfg: &ExperimentConfig, seed: u64, run: &mut Run) -> Result<(), CliError> {
    let t = section(&cfg.trace, "trace")?;
    let f = cfg.map(&t.map)?;
    let opts = cfg.mc.trace;
    let xs: Vec<Configuration> = match &t.points {
        Some(p) => vec![configuration(p)?],
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..t.samples)
                .map(|_| Configuration::sample(&mut rng, t.n, cfg.mc.min_sep, DEFAULT_MARGIN, 10_000).map(|(x, _)| x))
                .collect::<qmlab::Result<_>>()?
        }
    };
    let z = match &t.base {
        Some(b) => configuration(b)?,
        None => Configuration::base(xs[0].n()),
    };
    let mut powers = t.powers.clone();
    powers.sort_unstable();
    powers.dedup();
    run.operation(json!({"op": "trace", "map": t.map, "powers": powers, "trace": opts, "seed": seed}));
    let tab = run.add_table(
        "trace",
        &["sample", "points", "power", "n", "status", "word", "length", "writhe", "permutation", "refinements", "degenerate_events", "sl2"],
    );
    for (i, x) in xs.iter().enumerate() {
        let n = x.n();
        match extract_powers(&f, x, &z, &powers, &opts) {
            Ok(rs) => {
                for (p, r) in powers.iter().zip(rs) {
                    let w = &r.word;
                    let perm = w.permutation().iter().map(|k| k.to_string()).collect::<Vec<_>>().join(" ");
                    let sl2 = if n == 3 { w.sl2_image()?.to_string() } else { String::new() };
                    run.push(
                        tab,
                        vec![
                            i.to_string(),
                            points_str(x),
                            p.to_string(),
                            n.to_string(),
                            "ok".into(),
                            w.to_string(),
                            w.len().to_string(),
                            w.writhe().to_string(),
                            perm,
                            r.refinements_used.to_string(),
                            r.degenerate_events.to_string(),
                            sl2,
                        ],
                    );
                }
            }
            Err(e @ (Error::Degeneracy(_) | Error::Collision(..))) => {
                let status = if matches!(e, Error::Degeneracy(_)) { "degenerate" } else { "collision" };
                let mut row = vec![i.to_string(), points_str(x), String::new(), n.to_string(), status.into()];
                row.extend(std::iter::repeat_n(String::new(), 7));
                run.push(tab, row);
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

pub fn gg(cfg: &ExperimentConfig, seed: u64, run: &mut Run) -> Result<(), CliError> {
    let g = section(&cfg.gg, "gg")?;
    let mc = cfg.mc.to_mc(seed);
    let qms: Vec<BuiltQm> = g.qms.iter().map(|id| cfg.qm(id)).collect::<qmlab::Result<_>>()?;
    let refs: Vec<&dyn BraidQm> = qms.iter().map(|q| q.as_dyn()).collect();
    let powers = run.add_table("gg_powers", &["map", "qm", "p", "mean", "std_err", "samples", "rejected"]);
    let summary = run.add_table(
        "gg_summary",
        &["map", "qm", "raw_mean", "std_err", "stabilized", "ci", "stabilized_mean", "ci_mean", "volume_factor", "significant"],
    );
    for id in &g.maps {
        let f = cfg.map(id)?;
        run.operation(json!({"op": "gg", "map": id, "qms": g.qms, "mc": mc}));
        let s = sample_braids(&f, &mc)?;
        for e in gg_from_samples(&refs, &s, mc.volume_factor())? {
            for r in &e.per_p {
                run.push(
                    powers,
                    vec![id.clone(), e.qm.clone(), r.p.to_string(), num(r.mean), num(r.std_err), r.samples.to_string(), r.rejected.to_string()],
                );
            }
            run.push(
                summary,
                vec![
                    id.clone(),
                    e.qm.clone(),
                    num(e.raw_mean),
                    num(e.std_err),
                    num(e.stabilized),
                    num(e.ci),
                    num(e.stabilized_mean()),
                    num(e.ci_mean()),
                    num(e.volume_factor),
                    (e.stabilized.abs() > 3.0 * e.ci).to_string(),
                ],
            );
        }
    }
    Ok(())
}

fn error_cols(e: &ErrorBar) -> (String, String) {
    match e {
        ErrorBar::Value { value } => ("value".into(), num(*value)),
        ErrorBar::OneSidedLower { fit_stderr } => ("one_sided_lower".into(), num(*fit_stderr)),
        ErrorBar::BiasedLow { fit_stderr } => ("biased_low".into(), num(*fit_stderr)),
    }
}

struct EntropyTables {
    series: usize,
    summary: usize,
    all: Vec<serde_json::Value>,
}

impl EntropyTables {
    fn record(&mut self, run: &mut Run, target: &str, e: &EntropyEstimate) {
        let method = serde_json::to_value(e.method).unwrap().as_str().unwrap().to_string();
        for r in &e.series {
            run.push(self.series, vec![target.into(), method.clone(), r.p.to_string(), num(r.scale), num(r.count), num(r.log_value)]);
        }
        let (kind, err) = error_cols(&e.error);
        run.push(
            self.summary,
            vec![
                target.into(),
                method,
                num(e.value),
                kind,
                err,
                e.window.0.to_string(),
                e.window.1.to_string(),
                e.complete.to_string(),
                e.is_lower_bound().to_string(),
            ],
        );
        self.all.push(json!({"target": target, "estimate": e}));
    }
}

pub fn entropy(cfg: &ExperimentConfig, seed: u64, budget: Option<usize>, run: &mut Run) -> Result<(), CliError> {
    let s = section(&cfg.entropy, "entropy")?;
    let mut t = EntropyTables {
        series: run.add_table("entropy_series", &["target", "method", "p", "scale", "count", "log_value"]),
        summary: run.add_table(
            "entropy_summary",
            &["target", "method", "value", "error_kind", "error", "window_lo", "window_hi", "complete", "lower_bound"],
        ),
        all: Vec::new(),
    };
    let result = entropy_rows(cfg, s, seed, budget, run, &mut t);
    run.json("entropy", serde_json::Value::Array(std::mem::take(&mut t.all)));
    result
}

fn entropy_rows(
    cfg: &ExperimentConfig,
    s: &crate::config::EntropySection,
    seed: u64,
    budget: Option<usize>,
    run: &mut Run,
    t: &mut EntropyTables,
) -> Result<(), CliError> {
    for (i, b) in s.braids.iter().enumerate() {
        let w = b.build()?;
        let target = format!("braid{i}");
        run.operation(json!({"op": "braid_entropy", "target": target, "n": b.n, "braid": b.braid, "p_max": s.braid_p_max}));
        t.record(run, &target, &braid_entropy(&w, s.braid_p_max)?);
        if b.n == 3 {
            t.record(run, &target, &braid_entropy_sl2(&w)?);
        }
    }
    for id in &s.maps {
        let f = cfg.map(id)?;
        for m in &s.methods {
            match m {
                MapMethod::Bowen => {
                    let o = BowenOptions { eps_list: s.bowen.eps_list.clone(), p_max: s.bowen.p_max, grid_density: s.bowen.grid_density, seed };
                    run.operation(json!({"op": "bowen", "map": id, "options": o}));
                    t.record(run, id, &bowen_entropy(&f, &o)?);
                }
                MapMethod::CurveGrowth => {
                    let c = &s.curve;
                    let budget = budget.unwrap_or(DEFAULT_CURVE_BUDGET);
                    run.operation(json!({"op": "curve_growth", "map": id, "curve": c, "budget": budget}));
                    let curve = PolyCurve::circle(Point::new(c.center[0], c.center[1]), c.radius, c.vertices)?;
                    let e = curve_growth(&f, &curve, c.p_max, c.tol, budget)?;
                    if !e.complete {
                        run.partial(format!("entropy_series: curve_growth on `{id}` stopped at the vertex budget (window {:?})", e.window));
                    }
                    t.record(run, id, &e);
                }
            }
        }
    }
    Ok(())
}

fn matrix(m: &[i64; 4]) -> IntMatrix2 {
    IntMatrix2::new(m[0], m[1], m[2], m[3])
}

/// Σ a_i ψ_{ω_i}(M) with an explicit corridor budget.
fn eval_budget(spec: &QmSpec, m: &IntMatrix2, budget: usize) -> qmlab::Result<f64> {
    let beta = act(m, &spec.base);
    if beta == spec.base {
        return Ok(0.0);
    }
    let mut s = 0.0;
    for t in spec.terms.iter().filter(|t| t.a != 0.0) {
        let c = c_omega_budget(&spec.base, &beta, &t.omega, spec.radius, budget)?
            - c_omega_budget(&spec.base, &beta, &t.omega.inverse(), spec.radius, budget)?;
        s += t.a * c;
    }
    Ok(s)
}

pub fn farey_queries(
    queries: &[FareyQuery],
    spec_of: &dyn Fn(&str) -> qmlab::Result<QmSpec>,
    budget: Option<usize>,
    run: &mut Run,
) -> Result<(), CliError> {
    let budget = budget.unwrap_or(DEFAULT_CORRIDOR_BUDGET);
    let tab = run.add_table("farey", &["query", "kind", "input", "value", "upper"]);
    for (i, q) in queries.iter().enumerate() {
        run.operation(json!({"op": "farey", "query": q, "budget": budget}));
        let row = match q {
            FareyQuery::Distance { a, b } => vec!["distance".into(), format!("{a} {b}"), distance(a, b).to_string(), String::new()],
            FareyQuery::Tau { matrix: m, p_max } => {
                let (est, upper) = translation_length(&matrix(m), &qmlab::farey::INFINITY, *p_max)?;
                vec!["tau".into(), matrix(m).to_string(), num(est), num(upper)]
            }
            FareyQuery::Qm { qm, matrix: m, homogenize } => {
                let spec = spec_of(qm)?;
                let mm = matrix(m);
                let v = match homogenize {
                    None => eval_budget(&spec, &mm, budget)?,
                    Some(_) if !mm.is_hyperbolic() => 0.0,
                    Some(p) => eval_budget(&spec, &reduce_conjugacy(&mm).pow(*p as i64), budget)? / *p as f64,
                };
                let kind = match homogenize {
                    None => format!("qm:{qm}"),
                    Some(p) => format!("qm:{qm}:P={p}"),
                };
                vec![kind, mm.to_string(), num(v), String::new()]
            }
        };
        let mut full = vec![i.to_string()];
        full.extend(row);
        run.push(tab, full);
    }
    Ok(())
}

pub fn farey(cfg: &ExperimentConfig, budget: Option<usize>, run: &mut Run) -> Result<(), CliError> {
    let s = section(&cfg.farey, "farey")?;
    let spec_of = |id: &str| -> qmlab::Result<QmSpec> {
        cfg.qm(id)?.spec().cloned().ok_or_else(|| Error::Spec(format!("qm `{id}` is not a ψ_ω combination")))
    };
    farey_queries(&s.queries, &spec_of, budget, run)
}

pub fn parse_slope(s: &str) -> Result<Slope, CliError> {
    s.parse().map_err(|e: Error| CliError::Usage(format!("bad slope `{s}`: {e}")))
}

pub fn parse_ints(s: &str) -> Result<Vec<i64>, CliError> {
    s.split(',')
        .map(|x| x.trim().parse::<i64>().map_err(|_| CliError::Usage(format!("bad integer list `{s}`"))))
        .collect()
}

pub fn parse_matrix(s: &str) -> Result<[i64; 4], CliError> {
    let v = parse_ints(s)?;
    let m: [i64; 4] = v.try_into().map_err(|_| CliError::Usage(format!("a matrix needs four entries a,b,c,d, got `{s}`")))?;
    if (m[0] as i128) * (m[3] as i128) - (m[1] as i128) * (m[2] as i128) != 1 {
        return Err(CliError::Usage(format!("matrix `{s}` does not have determinant 1")));
    }
    Ok(m)
}

struct PreparedQm {
    id: String,
    built: BuiltQm,
    defect: f64,
}

fn defect_of(built: &BuiltQm, trials: usize, len: usize, seed: u64) -> qmlab::Result<f64> {
    match built.spec() {
        Some(spec) => spec_defect(spec, trials, len, seed),
        // A homomorphism.
        None => Ok(0.0),
    }
}

pub fn norms_bound(cfg: &ExperimentConfig, seed: u64, run: &mut Run) -> Result<(), CliError> {
    let n = section(&cfg.norms, "norms")?;
    let b = section(&n.bound, "norms.bound")?;
    let mc = cfg.mc.to_mc(seed);
    let vmc = MCConfig { samples: b.vanishing_samples, seed: seed.wrapping_add(1), ..mc.clone() };
    let witnesses = autonomous_witnesses();
    let vt = run.add_table("norms_vanishing", &["qm", "witness", "stabilized", "ci", "vanishes"]);
    let bt = run.add_table("norms_bound", &["map", "power", "qm", "estimate", "ci", "defect", "bound", "conservative"]);
    let mut prepared = Vec::new();
    let mut evidence = Vec::new();
    for id in &b.qms {
        let built = cfg.qm(id)?;
        let defect = defect_of(&built, n.defect_trials, n.defect_len, seed)?;
        run.operation(json!({"op": "defect", "qm": id, "trials": n.defect_trials, "len": n.defect_len, "value": defect}));
        run.operation(json!({"op": "vanishing_suite", "qm": id, "mc": vmc}));
        let ev = vanishing_suite(built.as_dyn(), &witnesses, &vmc)?;
        for v in &ev {
            let e = &v.report.estimate;
            run.push(vt, vec![id.clone(), v.map.clone(), num(e.stabilized), num(e.ci), v.report.vanishes.to_string()]);
        }
        prepared.push(PreparedQm { id: id.clone(), built, defect });
        evidence.push(ev);
    }
    let f0 = cfg.map(&b.map)?;
    let mut reports = Vec::new();
    for &k in &b.powers {
        let f = f0.power(k);
        let qms: Vec<NormQm> = prepared
            .iter()
            .zip(&evidence)
            .map(|(p, ev)| NormQm { qm: p.built.as_dyn(), defect: p.defect, vanishing: ev.clone() })
            .collect();
        run.operation(json!({"op": "entropy_norm_lower", "map": b.map, "power": k, "mc": mc, "defect_multiplier": b.defect_multiplier}));
        let name = format!("{}^{k}", b.map);
        let r = entropy_norm_lower(&name, &f, &qms, &mc, b.defect_multiplier)?;
        for row in &r.rows {
            run.push(
                bt,
                vec![
                    b.map.clone(),
                    k.to_string(),
                    row.qm.clone(),
                    num(row.estimate),
                    num(row.ci),
                    num(row.defect),
                    num(row.bound),
                    num(row.conservative),
                ],
            );
        }
        reports.push(r);
    }
    let ids: Vec<&str> = prepared.iter().map(|p| p.id.as_str()).collect();
    run.json("norms", json!({"qms": ids, "reports": reports}));
    Ok(())
}

pub fn norms_embed(cfg: &ExperimentConfig, seed: u64, m: Option<usize>, extra_k: &[Vec<i64>], run: &mut Run) -> Result<(), CliError> {
    let n = section(&cfg.norms, "norms")?;
    let e = section(&n.embed, "norms.embed")?;
    let size = e.seeds.len();
    if let Some(m) = m {
        if m != size {
            return Err(CliError::Usage(format!("--m {m} but the configuration lists {size} seed maps")));
        }
    }
    let mut ks = e.k.clone();
    ks.extend(extra_k.iter().cloned());
    if let Some(bad) = ks.iter().find(|k| k.len() != size) {
        return Err(CliError::Usage(format!("k-vector {bad:?} needs {size} entries")));
    }
    if ks.is_empty() {
        ks = (0..size).map(|i| (0..size).map(|j| (i == j) as i64).collect()).collect();
    }
    let seeds = e.seeds.iter().map(|id| cfg.map(id)).collect::<qmlab::Result<Vec<_>>>()?;
    let family = build_family_from_seeds(&seeds)?;
    let base: Vec<QmSpec> = e
        .base_qms
        .iter()
        .map(|id| cfg.qm(id)?.spec().cloned().ok_or_else(|| Error::Spec(format!("base qm `{id}` is not a ψ_ω combination"))))
        .collect::<qmlab::Result<_>>()?;
    let mc = cfg.mc.to_mc(seed);
    let cal_mc = MCConfig { seed: seed.wrapping_add(e.calibration_offset), ..mc.clone() };
    run.operation(json!({"op": "calibrate_duals", "seeds": e.seeds, "base_qms": e.base_qms, "mc": cal_mc}));
    let cal = calibrate_duals(&family, &base, &cal_mc)?;
    let ct = run.add_table("calibration", &["i", "j", "value", "ci", "inverse"]);
    for (i, row) in cal.matrix.iter().enumerate() {
        for (j, en) in row.iter().enumerate() {
            run.push(ct, vec![i.to_string(), j.to_string(), num(en.value), num(en.ci), num(cal.inverse[i][j])]);
        }
    }
    let duals: Vec<Sl2Qm> = cal.duals.iter().enumerate().map(|(i, s)| Sl2Qm::raw(s.clone(), &format!("dual{i}"))).collect();
    let defects = cal.duals.iter().map(|s| spec_defect(s, n.defect_trials, n.defect_len, seed)).collect::<qmlab::Result<Vec<_>>>()?;
    run.operation(json!({"op": "defects", "trials": n.defect_trials, "len": n.defect_len, "values": defects}));
    let pmc = e.product_samples.map(|samples| MCConfig {
        samples,
        seed: seed.wrapping_add(2 * e.calibration_offset),
        p_list: e.product_p_list.clone().unwrap_or_else(|| mc.p_list.clone()),
        ..mc.clone()
    });
    run.operation(json!({"op": "zm_embedding_report", "k": ks, "mc": mc, "product_mc": pmc}));
    let cert = zm_embedding_report(&CertificateInput {
        family: &family,
        qms: &duals,
        defects: &defects,
        k_vectors: &ks,
        mc: &mc,
        product_mc: pmc.as_ref(),
    })?;
    let mt = run.add_table("certificate_matrix", &["i", "j", "value", "ci", "target", "within_3ci"]);
    for (i, row) in cert.matrix.iter().enumerate() {
        for (j, en) in row.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            run.push(
                mt,
                vec![i.to_string(), j.to_string(), num(en.value), num(en.ci), num(target), ((en.value - target).abs() <= 3.0 * en.ci).to_string()],
            );
        }
    }
    let tt = run.add_table("certificate_trials", &["k", "lower", "upper", "measured", "linear"]);
    for t in &cert.trials {
        let k = t.k.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let measured = t.measured.as_ref().map_or(String::new(), |v| {
            v.iter().map(|e| format!("{}±{}", num(e.value), num(e.ci))).collect::<Vec<_>>().join(" ")
        });
        let linear = t.linear.map_or(String::new(), |b| b.to_string());
        run.push(tt, vec![k, num(t.lower), num(t.upper), measured, linear]);
    }
    run.json("certificate", json!({"certificate": cert, "calibration": cal, "defects": defects}));
    println!("certificate {} ({} offending entries)", if cert.valid { "VALID" } else { "INVALID" }, cert.offending.len());
    Ok(())
}

pub fn verify(seed: u64, full: bool, run: &mut Run) -> Result<(), CliError> {
    let ids: Vec<u32> = if full { (1..=9).collect() } else { vec![1, 2, 3, 4, 5, 9] };
    run.operation(json!({"op": "verify", "criteria": ids, "seed": seed}));
    let tab = run.add_table("verify", &["criterion", "name", "pass", "detail"]);
    let mut failed = Vec::new();
    for id in ids {
        let r = suite::run_criterion(id, seed);
        println!("{}", r.line());
        run.push(tab, vec![r.id.to_string(), r.name.to_string(), r.pass.to_string(), r.details.join("; ")]);
        if !r.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("criteria {failed:?} failed")))
    }
}
