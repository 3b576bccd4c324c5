//! Finite horoball stages.
//!
//! A sequence `v_n` in `S_n` is translated back to the base vertex by
//! `g_n = v v_n^{-1}`. Stage `i` keeps the translated sphere `g_n S_n` inside
//! the window `N_i(v)`; stages are admitted greedily when their windows agree
//! with every earlier stage on the earlier (smaller) windows.
//!
//! The base vertex only shifts every pattern, so patterns are stored in
//! identity coordinates: stage `i` at source `v_n` is the set of `k` with
//! `|k| <= i` and `|v_n k| = n`.

use crate::ball::{CayleyBall, DistanceBounds, ProductBounds};
use crate::complex::Graph;
use crate::inverse::{compare, neighborhood_radius};
use crate::oracle::OracleError;
use crate::par;
use crate::word::HalfInt;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HoroError {
    #[error("sequence entry {index} does not lie on S_{index}")]
    NotOnSphere { index: usize },
    #[error("target {target} sits at distance {depth} from the stage centre, not beyond {n}")]
    TargetTooShallow { target: String, depth: usize, n: usize },
    #[error("{0} leaves the ball")]
    OutsideBall(String),
    #[error("radius {radius} cannot decide distances up to {t} on S_{n}")]
    InsufficientRadius { n: usize, t: u32, radius: usize },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HoroballStage {
    pub i: usize,
    pub n: usize,
    /// `v_{n_i}`.
    #[serde(skip)]
    pub source: u32,
    pub source_word: String,
    /// `g_i` for the identity base.
    pub g_word: String,
    /// Pattern elements `k`, sorted.
    #[serde(skip)]
    pub vertices: Vec<u32>,
    pub vertex_words: Vec<String>,
    pub pattern_hash: String,
    /// Rips edges on the pattern, as positions in `vertices`.
    pub edges: Vec<(u32, u32)>,
}

impl HoroballStage {
    pub fn contains(&self, k: u32) -> bool {
        self.vertices.binary_search(&k).is_ok()
    }

    pub fn graph(&self) -> Graph {
        Graph::from_edges(self.vertices.len(), &self.edges)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageAttempt {
    pub n: usize,
    pub i: usize,
    pub admitted: bool,
    /// Earlier stage whose window disagreed.
    pub mismatch: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageExtraction {
    pub base: String,
    pub d: u32,
    pub stages: Vec<HoroballStage>,
    pub attempts: Vec<StageAttempt>,
    /// `g_N` at the deepest available index, standing in for the limit point.
    pub direction: String,
}

/// `{k : |k| <= j, |v k| = n}` where `n = |v|`.
pub fn stage_pattern(ball: &CayleyBall, v: u32, j: usize) -> Result<Vec<u32>, HoroError> {
    let n = ball.level(v);
    let end = ball.offsets()[j.min(ball.radius()) + 1];
    let hits = par::map_range(end, |k| {
        ball.translate(v, ball.word(k as u32).letters()).map(|g| g.is_some_and(|g| ball.level(g) == n))
    });
    let mut out = Vec::new();
    for (k, h) in hits.into_iter().enumerate() {
        if h? {
            out.push(k as u32);
        }
    }
    Ok(out)
}

fn pattern_hash(ball: &CayleyBall, vertices: &[u32]) -> String {
    let mut h = Sha256::new();
    for &k in vertices {
        h.update(ball.render(k).as_bytes());
        h.update(b";");
    }
    h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn inverse_word(ball: &CayleyBall, v: u32) -> String {
    let p = ball.presentation();
    let w = p.alphabet.inverse_word(ball.word(v).letters());
    if w.is_empty() {
        "e".into()
    } else {
        p.alphabet.render(w.letters())
    }
}

/// Greedy extraction of up to `max_stage` stages from `seq`, where `seq[n]`
/// lies on `S_n`. Stage `i` needs a source index `n >= i`, beyond the
/// previous stage, and its window must agree with every earlier stage.
pub fn extract_stable_stages(
    ball: &CayleyBall,
    seq: &[u32],
    max_stage: usize,
    d: u32,
) -> Result<StageExtraction, HoroError> {
    for (index, &v) in seq.iter().enumerate() {
        if ball.level(v) != index {
            return Err(HoroError::NotOnSphere { index });
        }
    }
    let mut stages: Vec<HoroballStage> = Vec::new();
    let mut attempts = Vec::new();
    for (n, &v) in seq.iter().enumerate().skip(1) {
        let i = stages.len() + 1;
        if i > max_stage {
            break;
        }
        if n < i {
            continue;
        }
        let pattern = stage_pattern(ball, v, i)?;
        let mismatch = stages.iter().find(|s| {
            let cut: Vec<u32> = pattern.iter().copied().filter(|&k| ball.level(k) <= s.i).collect();
            cut != s.vertices
        });
        attempts.push(StageAttempt { n, i, admitted: mismatch.is_none(), mismatch: mismatch.map(|s| s.i) });
        if mismatch.is_some() {
            continue;
        }
        let rows = par::map_range(pattern.len(), |a| {
            (a + 1..pattern.len())
                .filter(|&b| ball.distance(pattern[a], pattern[b]).hi <= d)
                .map(|b| (a as u32, b as u32))
                .collect::<Vec<_>>()
        });
        stages.push(HoroballStage {
            i,
            n,
            source: v,
            source_word: ball.render(v),
            g_word: inverse_word(ball, v),
            vertex_words: pattern.iter().map(|&k| ball.render(k)).collect(),
            pattern_hash: pattern_hash(ball, &pattern),
            edges: rows.into_iter().flatten().collect(),
            vertices: pattern,
        });
    }
    let direction = seq.last().map(|&v| inverse_word(ball, v)).unwrap_or_else(|| "e".into());
    Ok(StageExtraction { base: "e".into(), d, stages, attempts, direction })
}

/// Compares the Rips graph on a stage with the graph on its image `v_n k` in
/// `S_n`; left translation is an isometry, so any difference is a bug.
/// Returns the number of mismatched pairs.
pub fn check_translation_isometry(ball: &CayleyBall, stage: &HoroballStage, d: u32) -> Result<usize, HoroError> {
    let mut images = Vec::with_capacity(stage.vertices.len());
    for &k in &stage.vertices {
        let g = ball
            .translate(stage.source, ball.word(k).letters())?
            .ok_or_else(|| HoroError::OutsideBall(ball.render(k)))?;
        images.push(g);
    }
    let g = stage.graph();
    let bad = par::sum_range(images.len(), |a| {
        (a + 1..images.len())
            .filter(|&b| {
                let near = ball.distance(images[a], images[b]).hi <= d;
                near != g.has_edge(a as u32, b as u32)
            })
            .count() as u64
    });
    Ok(bad as usize)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageProjection {
    pub stage: usize,
    pub target: String,
    /// Projection vertices in stage coordinates that fall inside the window.
    #[serde(skip)]
    pub vertices: Vec<u32>,
    pub vertex_words: Vec<String>,
    /// Projection vertices outside the window `N_i(v)`.
    pub outside: usize,
    pub diameter: DistanceBounds,
    pub bound: HalfInt,
    pub within_bound: Option<bool>,
    /// Projection vertices on `S_{n_i}` before translating back.
    #[serde(skip)]
    pub sphere_vertices: Vec<u32>,
}

impl StageProjection {
    /// The whole simplex lies in `H_i`.
    pub fn inside(&self) -> bool {
        self.outside == 0
    }
}

/// `q_i(z)`: the admissible set at level `n_i` of the geodesics from `g_i`
/// towards `z`, in stage coordinates. Computed on `S_{n_i}` after
/// translating by `v_{n_i}`.
pub fn stage_projection(
    ball: &CayleyBall,
    stage: &HoroballStage,
    z: u32,
    delta: HalfInt,
) -> Result<StageProjection, HoroError> {
    let n = stage.n;
    let t = ball
        .translate(stage.source, ball.word(z).letters())?
        .ok_or_else(|| HoroError::OutsideBall(format!("{} {}", stage.source_word, ball.render(z))))?;
    if ball.level(t) <= n {
        return Err(HoroError::TargetTooShallow { target: ball.render(z), depth: ball.level(t), n });
    }
    let trace = ball.geodesic_cone(t, n);
    let r = neighborhood_radius(delta);
    let set = ball
        .sphere_neighborhood(&trace, n, r)
        .ok_or(HoroError::InsufficientRadius { n, t: r, radius: ball.radius() })?;
    let bound = delta.times(6).plus_int(1);
    let (diameter, _) = ball.max_cross_distance(&set, &set, bound.floor().max(0) as u32);
    let back = par::map_slice(&set, |&a| ball.quotient(stage.source, a));
    let mut vertices = Vec::new();
    let mut outside = 0;
    for h in back {
        match h? {
            Some(h) if ball.level(h) <= stage.i => vertices.push(h),
            _ => outside += 1,
        }
    }
    vertices.sort_unstable();
    Ok(StageProjection {
        stage: stage.i,
        target: ball.render(z),
        vertex_words: vertices.iter().map(|&h| ball.render(h)).collect(),
        vertices,
        outside,
        within_bound: compare(diameter, bound),
        diameter,
        bound,
        sphere_vertices: set,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StabilityReport {
    pub i0: usize,
    pub i: usize,
    pub target: String,
    /// Both projections lie inside their windows.
    pub applies: bool,
    pub max_distance: DistanceBounds,
    pub bound: HalfInt,
    pub pass: Option<bool>,
    pub witness: Option<(String, String)>,
}

/// Distance between `q_{i0}(z)` and `q_i(z)` in stage coordinates, against `10 delta + 2`.
pub fn check_stage_stability(
    ball: &CayleyBall,
    s0: &HoroballStage,
    s: &HoroballStage,
    z: u32,
    delta: HalfInt,
) -> Result<StabilityReport, HoroError> {
    let p0 = stage_projection(ball, s0, z, delta)?;
    let p = stage_projection(ball, s, z, delta)?;
    let bound = delta.times(10).plus_int(2);
    let applies = p0.inside() && p.inside();
    let (max_distance, w) = if applies {
        ball.max_cross_distance(&p0.vertices, &p.vertices, bound.floor().max(0) as u32)
    } else {
        (DistanceBounds::exact(0), None)
    };
    Ok(StabilityReport {
        i0: s0.i,
        i: s.i,
        target: ball.render(z),
        applies,
        max_distance,
        bound,
        pass: if applies { compare(max_distance, bound) } else { None },
        witness: w.map(|(a, b)| (ball.render(a), ball.render(b))),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalDiameterReport {
    pub stage: usize,
    pub cluster: usize,
    /// Smallest pairwise product of the cluster seen from `g_i`.
    pub min_product: Option<ProductBounds>,
    pub threshold: HalfInt,
    pub cluster_ok: bool,
    pub diameter: DistanceBounds,
    pub bound: HalfInt,
    pub pass: Option<bool>,
}

/// Diameter of the union of the projections of a cluster of targets, against
/// `6 delta + 2 + 2D`.
pub fn check_local_diameter(
    ball: &CayleyBall,
    stage: &HoroballStage,
    cluster: &[u32],
    delta: HalfInt,
    d: u32,
) -> Result<LocalDiameterReport, HoroError> {
    let mut union = Vec::new();
    let mut targets = Vec::new();
    for &z in cluster {
        let p = stage_projection(ball, stage, z, delta)?;
        union.extend(p.sphere_vertices);
        targets.push(ball.translate(stage.source, ball.word(z).letters())?.expect("checked by the projection"));
    }
    union.sort_unstable();
    union.dedup();
    let threshold = delta.times(6).plus_int(stage.n as i64);
    let mut min_product: Option<ProductBounds> = None;
    for a in 0..targets.len() {
        for b in a + 1..targets.len() {
            let p = ball.gromov_product(0, targets[a], targets[b]);
            if min_product.map_or(true, |m| p.lo < m.lo) {
                min_product = Some(p);
            }
        }
    }
    let cluster_ok = min_product.map_or(true, |p| p.lo >= threshold);
    let bound = delta.times(6).plus_int(2 + 2 * d as i64);
    let (diameter, _) = ball.max_cross_distance(&union, &union, bound.floor().max(0) as u32);
    Ok(LocalDiameterReport {
        stage: stage.i,
        cluster: cluster.len(),
        min_product,
        threshold,
        cluster_ok,
        diameter,
        bound,
        pass: compare(diameter, bound),
    })
}

/// Where the geodesic from `g_i` to the target crosses `g_i S_{n_i}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageCrossing {
    pub stage: usize,
    pub start: String,
    pub length: usize,
    pub crossing: String,
    /// Distance from the crossing to the base vertex.
    pub crossing_distance: u32,
    /// Closest point of the path to the base vertex.
    pub nearest: String,
    pub nearest_distance: u32,
    pub bound: HalfInt,
    /// The crossing lies in the stage's window `N_i(v)`.
    pub in_window: bool,
    pub within_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceReport {
    pub end: String,
    pub crossings: Vec<StageCrossing>,
    /// Some crossing is a vertex of its stage.
    pub meets: bool,
    /// `None` when every crossing is within bound but none lands in a window.
    pub pass: Option<bool>,
}

/// For each stage, follows the normal-form geodesic from `g_i` to `z`; it
/// leaves the ball of radius `n_i` about `g_i` at a point of `g_i S_{n_i}`,
/// which must be within `2 d(x, v) + 2 delta` of `v`.
pub fn trace_geodesic_through_horoball(
    ball: &CayleyBall,
    stages: &[HoroballStage],
    z: u32,
    delta: HalfInt,
) -> Result<TraceReport, HoroError> {
    let mut crossings = Vec::with_capacity(stages.len());
    for s in stages {
        let u = ball.inverse(s.source)?.ok_or_else(|| HoroError::OutsideBall(s.g_word.clone()))?;
        let q = ball
            .quotient(u, z)?
            .ok_or_else(|| HoroError::OutsideBall(format!("{} {}", s.source_word, ball.render(z))))?;
        let w = ball.word(q);
        if w.len() < s.n {
            return Err(HoroError::TargetTooShallow { target: ball.render(z), depth: w.len(), n: s.n });
        }
        let mut path = Vec::with_capacity(w.len() + 1);
        for k in 0..=w.len() {
            let p = ball
                .translate(u, &w.letters()[..k])?
                .ok_or_else(|| HoroError::OutsideBall(format!("point {k} of the traced path")))?;
            path.push(p);
        }
        // normal forms are geodesic, so the path realises d(g_i, z)
        let (nearest, nearest_distance) =
            path.iter().map(|&p| (p, ball.level(p) as u32)).min_by_key(|&(p, l)| (l, p)).unwrap();
        let bound = delta.times(2).plus_int(2 * nearest_distance as i64);
        let p = path[s.n];
        let crossing_distance = ball.level(p) as u32;
        crossings.push(StageCrossing {
            stage: s.i,
            start: ball.render(u),
            length: w.len(),
            crossing: ball.render(p),
            crossing_distance,
            nearest: ball.render(nearest),
            nearest_distance,
            bound,
            in_window: s.contains(p),
            within_bound: HalfInt::from_int(crossing_distance as i64) <= bound,
        });
    }
    let meets = crossings.iter().any(|c| c.in_window);
    let pass = if crossings.iter().any(|c| !c.within_bound) {
        Some(false)
    } else if meets {
        Some(true)
    } else {
        None
    };
    Ok(TraceReport { end: ball.render(z), crossings, meets, pass })
}

#[derive(Serialize)]
struct StageJson<'a> {
    i: usize,
    n_i: usize,
    g_i: &'a str,
    base: &'a str,
    #[serde(rename = "D")]
    d: u32,
    vertices: &'a [String],
    edges: Vec<[u32; 2]>,
    triangles: Vec<[u32; 3]>,
}

/// The complex export format with the stage data attached.
pub fn export_stage_json(stage: &HoroballStage, d: u32) -> String {
    let g = stage.graph();
    let json = StageJson {
        i: stage.i,
        n_i: stage.n,
        g_i: &stage.g_word,
        base: "e",
        d,
        vertices: &stage.vertex_words,
        edges: stage.edges.iter().map(|&(a, b)| [a, b]).collect(),
        triangles: g.triangles().map(|(a, b, c)| [a, b, c]).collect(),
    };
    serde_json::to_string_pretty(&json).unwrap()
}

/// `seq[n] = ray(n)` for the normal form of `end`.
pub fn ray_sequence(ball: &CayleyBall, end: u32) -> Vec<u32> {
    (0..=ball.level(end)).map(|k| ball.prefix(end, k)).collect()
}
