//! Boundary classification from sphere-complex evidence.
//!
//! The verdict is a pure function of the evidence fields, so anyone holding a
//! report can recompute it with [`derive_verdict`].

use crate::ball::CayleyBall;
use crate::complex::{build_sphere_complex, connected_components, ComplexError, H1Summary, HomologyContext};
use crate::inverse::{audit_projection_simplicial, check_functoriality, project_vertex, InverseError};
use crate::word::HalfInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const REPORT_SCHEMA: &str = "rips-boundary/report/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    TwoPoint,
    #[serde(rename = "Cantor-like")]
    CantorLike,
    CircleLike,
    ConnectedUnclassified,
    DisconnectedUnclassified,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::TwoPoint => "two-point",
            Verdict::CantorLike => "Cantor-like",
            Verdict::CircleLike => "circle-like",
            Verdict::ConnectedUnclassified => "connected-unclassified",
            Verdict::DisconnectedUnclassified => "disconnected-unclassified",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereEvidence {
    pub n: usize,
    pub vertices: usize,
    pub edges: u64,
    pub components: usize,
    /// Every component spans a simplex.
    pub components_are_simplices: bool,
    pub betti_0: Option<usize>,
    pub betti_1: Option<usize>,
    pub torsion: Option<Vec<String>>,
    /// Rank of the image of the `H_1` generators of `K_n` in `K_{n-1}`, when
    /// both are audited and the image walks are closed edge loops.
    pub h1_image_rank: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditDigest {
    pub functoriality_checked: u64,
    pub functoriality_failures: usize,
    pub projection_pairs: usize,
    pub projection_violations: usize,
    pub projection_counterexamples: usize,
    pub projection_undecided: u64,
}

/// Pass/fail line for a check run alongside the classification.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckDigest {
    pub name: String,
    pub pass: Option<bool>,
    pub summary: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub schema: String,
    pub d: u32,
    pub delta: HalfInt,
    /// `D >= 12 delta`.
    pub conforming: bool,
    pub n_range: (usize, usize),
    pub spheres: Vec<SphereEvidence>,
    pub audits: AuditDigest,
    pub checks: Vec<CheckDigest>,
    pub verdict: Verdict,
    pub qualifier: String,
    pub evidence: Vec<String>,
    pub anomalies: Vec<String>,
}

impl BoundaryReport {
    /// Recomputes the verdict from the evidence and compares.
    pub fn verdict_is_rederivable(&self) -> bool {
        let (v, _, a) = derive_verdict(&self.spheres);
        v == self.verdict && a == self.anomalies
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("empty n-range")]
    EmptyRange,
    #[error("n-range ends at {n}, beyond the ball radius {radius}")]
    RangeBeyondBall { n: usize, radius: usize },
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Inverse(#[from] InverseError),
}

#[derive(Clone, Debug)]
pub struct ClassifyConfig {
    pub n_lo: usize,
    pub n_hi: usize,
    pub d: u32,
    pub delta: HalfInt,
    /// Compute `H_1`; when off, circle-like is never concluded.
    pub homology: bool,
}

fn oscillates(counts: &[usize]) -> bool {
    let ups = counts.windows(2).any(|w| w[1] > w[0]);
    let downs = counts.windows(2).any(|w| w[1] < w[0]);
    ups && downs
}

/// The classification rules. Returns the verdict, evidence lines and anomalies.
pub fn derive_verdict(spheres: &[SphereEvidence]) -> (Verdict, Vec<String>, Vec<String>) {
    let mut evidence = Vec::new();
    let mut anomalies = Vec::new();
    let counts: Vec<usize> = spheres.iter().map(|s| s.components).collect();
    evidence.push(format!("component counts {counts:?}"));
    let simplices = spheres.iter().all(|s| s.components_are_simplices);
    if oscillates(&counts) {
        anomalies.push(format!("component counts oscillate: {counts:?}"));
    }
    let last_connected = counts.last() == Some(&1);
    let fallback = if last_connected { Verdict::ConnectedUnclassified } else { Verdict::DisconnectedUnclassified };
    if spheres.is_empty() {
        return (fallback, evidence, anomalies);
    }
    if !anomalies.is_empty() {
        return (fallback, evidence, anomalies);
    }
    if counts.iter().all(|&c| c == 2) && simplices {
        evidence.push("every K_n is two simplices".into());
        return (Verdict::TwoPoint, evidence, anomalies);
    }
    if counts.len() >= 2 && counts.windows(2).all(|w| w[1] > w[0]) && simplices {
        evidence.push("counts strictly increase and every component is a simplex".into());
        return (Verdict::CantorLike, evidence, anomalies);
    }
    if let Some(i0) = counts.iter().position(|&c| c == 1) {
        let tail = &spheres[i0..];
        if tail.iter().any(|s| s.components != 1) {
            anomalies.push(format!("K_{} is connected but a later sphere is not", tail[0].n));
            return (fallback, evidence, anomalies);
        }
        evidence.push(format!("connected from n = {}", tail[0].n));
        let circle_h1 = tail.iter().all(|s| s.betti_1 == Some(1) && s.torsion.as_ref().is_some_and(|t| t.is_empty()));
        let ranks_kept = tail.iter().skip(1).all(|s| s.h1_image_rank == Some(1));
        let betti: Vec<Option<usize>> = tail.iter().map(|s| s.betti_1).collect();
        evidence.push(format!("betti_1 from n = {}: {betti:?}", tail[0].n));
        if circle_h1 && ranks_kept {
            evidence.push("H_1 = Z with rank-preserving bonding maps".into());
            return (Verdict::CircleLike, evidence, anomalies);
        }
    }
    (fallback, evidence, anomalies)
}

fn is_clique(k: &crate::complex::SphereComplex, comp: &[u32]) -> bool {
    let s = comp.len() as u64;
    let deg: u64 = comp.iter().map(|&v| k.graph.degree(v) as u64).sum();
    deg == s * (s - 1)
}

/// Builds `K_n` for every audited `n`, computes components and `H_1`, audits
/// the bonding maps, and applies the classification rules.
pub fn classify_boundary(ball: &CayleyBall, cfg: &ClassifyConfig) -> Result<BoundaryReport, ReportError> {
    if cfg.n_lo > cfg.n_hi || cfg.n_lo == 0 {
        return Err(ReportError::EmptyRange);
    }
    if cfg.n_hi > ball.radius() {
        return Err(ReportError::RangeBeyondBall { n: cfg.n_hi, radius: ball.radius() });
    }
    let mut spheres: Vec<SphereEvidence> = Vec::new();
    let mut prev: Option<(crate::complex::SphereComplex, Option<HomologyContext>)> = None;
    let mut anomalies_extra = Vec::new();
    for n in cfg.n_lo..=cfg.n_hi {
        let k = build_sphere_complex(ball, n, cfg.d)?;
        let comps = connected_components(&k);
        let h = if cfg.homology {
            match HomologyContext::new(&k) {
                Ok(h) => Some(h),
                Err(e) => {
                    anomalies_extra.push(format!("H_1 of K_{n} skipped: {e}"));
                    None
                }
            }
        } else {
            None
        };
        let mut image_rank = None;
        if let (Some(h), Some((pk, Some(ph)))) = (&h, &prev) {
            let mut images = Vec::new();
            let mut closed = true;
            for lp in h.generator_loops() {
                let img: Vec<u32> = lp.iter().map(|&v| pk.vertex_of(project_vertex(ball, k.element(v), n - 1))).collect();
                let len = img.len();
                closed &= (0..len).all(|i| img[i] == img[(i + 1) % len] || pk.graph.has_edge(img[i], img[(i + 1) % len]));
                images.push(img);
            }
            if closed {
                image_rank = Some(ph.class_rank(&images));
            }
        }
        let s = h.as_ref().map(|h| h.summary().clone());
        spheres.push(SphereEvidence {
            n,
            vertices: k.vertex_count(),
            edges: k.edge_count(),
            components: comps.len(),
            components_are_simplices: comps.iter().all(|c| is_clique(&k, c)),
            betti_0: s.as_ref().map(|s: &H1Summary| s.betti_0),
            betti_1: s.as_ref().map(|s| s.betti_1),
            torsion: s.as_ref().map(|s| s.torsion.iter().map(|t| t.to_string()).collect()),
            h1_image_rank: image_rank,
        });
        prev = Some((k, h));
    }
    let mut audits = AuditDigest {
        functoriality_checked: 0,
        functoriality_failures: 0,
        projection_pairs: 0,
        projection_violations: 0,
        projection_counterexamples: 0,
        projection_undecided: 0,
    };
    for n in cfg.n_lo..=cfg.n_hi {
        let (c, bad) = check_functoriality(ball, n);
        audits.functoriality_checked += c;
        audits.functoriality_failures += bad.len();
        for m in 1..n {
            let a = audit_projection_simplicial(ball, n, m, cfg.d, cfg.delta)?;
            audits.projection_pairs += 1;
            audits.projection_violations += a.violations.len();
            audits.projection_counterexamples += a.lemma_counterexamples;
            audits.projection_undecided += a.undecided;
        }
    }
    let (verdict, evidence, anomalies) = derive_verdict(&spheres);
    let mut report = BoundaryReport {
        schema: REPORT_SCHEMA.into(),
        d: cfg.d,
        delta: cfg.delta,
        conforming: HalfInt::from_int(cfg.d as i64) >= cfg.delta.times(12),
        n_range: (cfg.n_lo, cfg.n_hi),
        spheres,
        audits,
        checks: Vec::new(),
        verdict,
        qualifier: format!("at audited range n in [{}..{}], D = {}", cfg.n_lo, cfg.n_hi, cfg.d),
        evidence,
        anomalies,
    };
    report.evidence.extend(anomalies_extra);
    Ok(report)
}
