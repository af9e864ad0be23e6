use std::collections::BTreeMap;
use std::path::Path;

use anosov::certifier::{
    certify_anosov, gap_profiles, limit_map_sample_with, pingpong_power, pingpong_subgroup, search_positivity_witness,
    track_ell1_along_path, CertificateEstimate, Ell1Verdict, GapProfile, PositivityVerdict, Verdict,
};
use anosov::constructions::perturb_path;
use anosov::words::{enumerate_ball, parse_word, Representation};
use anosov::Error;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::{ExperimentConfig, Status};

/// A CSV table held in memory.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()
    }
}

pub(crate) struct Report {
    pub status: Status,
    pub results: Value,
    /// `(file name, table)`.
    pub tables: Vec<(String, Table)>,
    /// Lines for the human summary.
    pub lines: Vec<String>,
}

impl Report {
    pub fn inconclusive(e: &Error) -> Report {
        Report {
            status: Status::Inconclusive,
            results: Value::Null,
            tables: vec![],
            lines: vec![format!("error: {e}")],
        }
    }
}

fn num(x: f64) -> String {
    x.to_string()
}

fn gap_table(profiles: &[GapProfile]) -> Table {
    let mut header = vec!["word".to_string(), "length".to_string()];
    header.extend(profiles.iter().map(|p| format!("log_gap_{}", p.k)));
    header.push("log_total_ratio".into());
    let rows = (0..profiles[0].rows.len())
        .map(|i| {
            let first = &profiles[0].rows[i];
            let mut r = vec![first.word.clone(), first.length.to_string()];
            r.extend(profiles.iter().map(|p| num(p.rows[i].log_gap)));
            r.push(num(first.log_total_ratio));
            r
        })
        .collect();
    Table { header, rows }
}

/// Refuted if any index is refuted, else Inconclusive if any is, else Certified.
fn combine(verdicts: impl IntoIterator<Item = Verdict>) -> Status {
    let v: Vec<Verdict> = verdicts.into_iter().collect();
    if v.contains(&Verdict::Refuted) {
        Status::Refuted
    } else if v.contains(&Verdict::Inconclusive) {
        Status::Inconclusive
    } else {
        Status::Certified
    }
}

fn certificate_line(c: &CertificateEstimate) -> String {
    let mut s = format!(
        "k={}: {:?} (empirical at radius {}) alpha_hat={:.4} log_c_hat={:.4} min_margin={:.4} qie={}",
        c.k,
        c.verdict,
        c.radius,
        c.alpha_hat,
        c.log_c_hat,
        c.min_margin,
        if c.qie.passes { "passes" } else { "fails" }
    );
    if let Some(w) = &c.witness {
        s.push_str(&format!(" witness={} (length {}, log gap {:e})", w.word, w.length, w.log_gap));
    }
    s
}

fn certify_profiles(
    rep: &Representation,
    cfg: &ExperimentConfig,
) -> anosov::Result<(Vec<GapProfile>, Vec<CertificateEstimate>)> {
    let profiles = gap_profiles(rep, &cfg.k, cfg.radius)?;
    let certs = profiles
        .iter()
        .map(|p| certify_anosov(p, cfg.tolerances.alpha_min, cfg.ell_min))
        .collect::<anosov::Result<Vec<_>>>()?;
    Ok((profiles, certs))
}

pub(crate) fn construct(rep: &Representation) -> Report {
    let results = json!({
        "dim": rep.dim(),
        "n_generators": rep.generators().len(),
        "relator_defect": rep.relator_defect(),
    });
    Report {
        status: Status::Constructed,
        results,
        tables: vec![],
        lines: vec![format!("relator defect {:e}", rep.relator_defect())],
    }
}

pub(crate) fn certify(rep: &Representation, cfg: &ExperimentConfig) -> anosov::Result<Report> {
    let (profiles, certs) = certify_profiles(rep, cfg)?;
    Ok(Report {
        status: combine(certs.iter().map(|c| c.verdict)),
        results: json!({ "n_words": profiles[0].rows.len(), "certificates": certs }),
        tables: vec![("gap_profile.csv".into(), gap_table(&profiles))],
        lines: certs.iter().map(certificate_line).collect(),
    })
}

pub(crate) fn gap_profile(rep: &Representation, cfg: &ExperimentConfig) -> anosov::Result<Report> {
    let profiles = gap_profiles(rep, &cfg.k, cfg.radius)?;
    let per_k: Vec<Value> = profiles
        .iter()
        .map(|p| {
            let mut minima: BTreeMap<usize, f64> = BTreeMap::new();
            for r in &p.rows {
                let m = minima.entry(r.length).or_insert(f64::INFINITY);
                *m = m.min(r.log_gap);
            }
            json!({ "k": p.k, "per_length_min": minima.into_iter().collect::<Vec<_>>() })
        })
        .collect();
    Ok(Report {
        status: Status::Profiled,
        results: json!({ "n_words": profiles[0].rows.len(), "profiles": per_k }),
        tables: vec![("gap_profile.csv".into(), gap_table(&profiles))],
        lines: vec![format!("{} words profiled for k = {:?}", profiles[0].rows.len(), cfg.k)],
    })
}

/// Number of semi-proximality failures echoed in the summary; the CSV
/// carries all of them.
const FAILURES_SHOWN: usize = 20;

pub(crate) fn scan_positivity(rep: &Representation, cfg: &ExperimentConfig) -> anosov::Result<Report> {
    let mut statuses = Vec::new();
    let mut results = Vec::new();
    let mut tables = Vec::new();
    let mut lines = Vec::new();
    for &k in &cfg.k {
        let search = search_positivity_witness(rep, k, cfg.radius, cfg.tolerances.eps_gap)?;
        let r = &search.report;
        statuses.push(match &r.verdict {
            PositivityVerdict::PositivelyProximal => Status::PositivelyProximal,
            PositivityVerdict::NotPositivelyProximal { .. } => Status::NotPositivelyProximal,
            PositivityVerdict::NoProximalFound => Status::NoProximalFound,
        });
        let mut line = format!(
            "k={k}: {} words at radius {} in dimension {}, {} proximal, {} negative",
            r.rows.len(),
            r.radius,
            r.scanned_dim,
            r.n_proximal,
            r.n_negative
        );
        match &r.verdict {
            PositivityVerdict::NotPositivelyProximal { witness } => line.push_str(&format!(
                ", witness {} (length {}, log|ℓ_1| {:.6}, reverified {})",
                witness.word, witness.length, witness.log_abs_ell1, witness.reverified
            )),
            v => line.push_str(&format!(", {v:?}")),
        }
        if !r.semiproximal_failures.is_empty() {
            line.push_str(&format!(", {} semi-proximality failures", r.semiproximal_failures.len()));
        }
        lines.push(line);
        results.push(json!({
            "k": k,
            "radii_scanned": search.radii,
            "radius": r.radius,
            "scanned_dim": r.scanned_dim,
            "n_words": r.rows.len(),
            "n_proximal": r.n_proximal,
            "n_negative": r.n_negative,
            "verdict": r.verdict,
            "n_semiproximal_failures": r.semiproximal_failures.len(),
            "semiproximal_failures": r.semiproximal_failures.iter().take(FAILURES_SHOWN).collect::<Vec<_>>(),
        }));
        let header = ["word", "length", "log_gap_eig", "proximal", "ell1_sign", "semiproximal_positive"];
        let rows = r
            .rows
            .iter()
            .map(|row| {
                vec![
                    row.word.clone(),
                    row.length.to_string(),
                    num(row.log_gap_eig),
                    row.proximal.to_string(),
                    row.ell1_sign.map(|s| s.to_string()).unwrap_or_default(),
                    row.semiproximal_positive.to_string(),
                ]
            })
            .collect();
        tables.push((format!("positivity_k{k}.csv"), Table { header: header.map(String::from).to_vec(), rows }));
    }
    let status = if statuses.contains(&Status::NotPositivelyProximal) {
        Status::NotPositivelyProximal
    } else if statuses.contains(&Status::NoProximalFound) {
        Status::NoProximalFound
    } else {
        Status::PositivelyProximal
    };
    Ok(Report { status, results: json!({ "scans": results }), tables, lines })
}

fn flatten(m: &DMatrix<f64>) -> String {
    m.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" ")
}

pub(crate) fn limit_set(rep: &Representation, cfg: &ExperimentConfig) -> anosov::Result<Report> {
    let mut statuses = Vec::new();
    let mut results = Vec::new();
    let mut tables = Vec::new();
    let mut lines = Vec::new();
    for &k in &cfg.k {
        let s = match limit_map_sample_with(rep, k, cfg.radius, cfg.tolerances.eps_gap, cfg.tolerances.cond_threshold) {
            Ok(s) => s,
            Err(e @ Error::NoProximalElements(_)) => {
                statuses.push(Status::Inconclusive);
                lines.push(format!("k={k}: {e}"));
                results.push(json!({ "k": k, "error": e.to_string() }));
                continue;
            }
            Err(e) => return Err(e),
        };
        let n_dyn = s.points.iter().filter(|p| p.dynamics_preserving).count();
        statuses.push(if s.all_transverse() && n_dyn == s.points.len() {
            Status::Transverse
        } else {
            Status::NotTransverse
        });
        lines.push(format!(
            "k={k}: {} boundary samples ({} dynamics preserving), {} pairs, {} non-transverse, max condition {:.3e}, span rank {}/{}",
            s.points.len(),
            n_dyn,
            s.n_pairs,
            s.failures.len(),
            s.max_condition,
            s.span_rank,
            s.span_ambient
        ));
        results.push(json!({
            "k": k,
            "n_points": s.points.len(),
            "n_dynamics_preserving": n_dyn,
            "n_pairs": s.n_pairs,
            "failures": s.failures,
            "max_condition": s.max_condition,
            "span_rank": s.span_rank,
            "span_ambient": s.span_ambient,
        }));
        let header = ["label", "word", "dynamics_preserving", "xi_k", "xi_dk"];
        let rows = s
            .points
            .iter()
            .map(|p| {
                vec![
                    p.label.clone(),
                    p.word.to_string(),
                    p.dynamics_preserving.to_string(),
                    flatten(p.xi_k.basis()),
                    flatten(p.xi_dk.basis()),
                ]
            })
            .collect();
        tables.push((format!("limit_set_k{k}.csv"), Table { header: header.map(String::from).to_vec(), rows }));
    }
    let status = if statuses.contains(&Status::NotTransverse) {
        Status::NotTransverse
    } else if statuses.contains(&Status::Inconclusive) {
        Status::Inconclusive
    } else {
        Status::Transverse
    };
    Ok(Report { status, results: json!({ "samples": results }), tables, lines })
}

pub(crate) fn deform(rep: &Representation, cfg: &ExperimentConfig) -> anosov::Result<Report> {
    let path = perturb_path(rep, cfg.deform.magnitude, cfg.seed, cfg.deform.steps)?;
    let ball = enumerate_ball(rep.presentation(), cfg.radius)?;
    let words: Vec<_> = ball.words().iter().filter(|w| !w.is_empty()).collect();
    let mut all_constant = true;
    let mut results = Vec::new();
    let mut tables = Vec::new();
    let mut lines = Vec::new();
    for &k in &cfg.k {
        let traces =
            words.par_iter().map(|w| track_ell1_along_path(&path, w, k)).collect::<anosov::Result<Vec<_>>>()?;
        let mut failures = Vec::new();
        let rows = traces
            .iter()
            .map(|t| {
                let (verdict, step, sign) = match t.verdict {
                    Ell1Verdict::Constant { sign } => ("constant", String::new(), sign.to_string()),
                    Ell1Verdict::SignChange { step } => ("sign-change", step.to_string(), String::new()),
                    Ell1Verdict::Inconclusive { step } => ("inconclusive", step.to_string(), String::new()),
                };
                if !matches!(t.verdict, Ell1Verdict::Constant { .. }) {
                    failures.push(json!({ "word": t.word, "verdict": t.verdict }));
                }
                let min_gap = t.steps.iter().map(|s| s.log_gap_eig).fold(f64::INFINITY, f64::min);
                vec![t.word.clone(), t.word.chars().count().to_string(), verdict.into(), step, sign, num(min_gap)]
            })
            .collect();
        all_constant &= failures.is_empty();
        lines.push(format!(
            "k={k}: {} words tracked over {} steps, {} with constant ℓ_1 sign",
            traces.len(),
            path.len() - 1,
            traces.len() - failures.len()
        ));
        results.push(json!({ "k": k, "n_words": traces.len(), "failures": failures }));
        let header = ["word", "length", "verdict", "step", "sign", "min_log_gap_eig"];
        tables.push((format!("deform_k{k}.csv"), Table { header: header.map(String::from).to_vec(), rows }));
    }
    Ok(Report {
        status: if all_constant { Status::SignsConstant } else { Status::Inconclusive },
        results: json!({ "magnitude": cfg.deform.magnitude, "steps": cfg.deform.steps, "tracks": results }),
        tables,
        lines,
    })
}

pub(crate) fn pingpong(rep: &Representation, cfg: &ExperimentConfig) -> anosov::Result<Report> {
    let g = parse_word(&cfg.pingpong.g, rep.presentation())?;
    let t = parse_word(&cfg.pingpong.t, rep.presentation())?;
    let Some(cert) = pingpong_power(rep, &g, &t, cfg.pingpong.max_power)? else {
        return Ok(Report {
            status: Status::Inconclusive,
            results: json!({ "certificate": null }),
            tables: vec![],
            lines: vec![format!("no ping-pong power up to {}", cfg.pingpong.max_power)],
        });
    };
    let sub = pingpong_subgroup(rep, &g, &t, cert.power)?;
    let (profiles, certs) = certify_profiles(&sub, cfg)?;
    let mut lines = vec![format!(
        "ping-pong at power {} with delta {:.4}, separation {:.4}; subgroup <g^N, t g^N t^-1>:",
        cert.power, cert.delta, cert.separation
    )];
    lines.extend(certs.iter().map(certificate_line));
    Ok(Report {
        status: combine(certs.iter().map(|c| c.verdict)),
        results: json!({ "certificate": cert, "subgroup_certificates": certs }),
        tables: vec![("gap_profile.csv".into(), gap_table(&profiles))],
        lines,
    })
}
