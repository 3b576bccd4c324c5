//! Truncation maps between sphere complexes and projections of boundary rays.
//!
//! A boundary point is represented by a sphere element of depth `N`; its
//! normal form is a geodesic word whose prefixes give the ray.

use crate::ball::{CayleyBall, DistanceBounds, ProductBounds};
use crate::complex::{build_sphere_complex, ComplexError};
use crate::par;
use crate::word::{HalfInt, NormalWord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InverseError {
    #[error("ray of depth {depth} cannot be projected to level {n} with slack {slack}")]
    RayTooShort { depth: usize, n: usize, slack: usize },
    #[error("radius {radius} too small to decide distances up to {t} around S_{n}")]
    InsufficientRadius { n: usize, t: u32, radius: usize },
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// Depth-`N` proxy for a boundary point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryRay {
    /// `ray(k)` for `k = 0..=N`.
    points: Vec<u32>,
    word: NormalWord,
}

impl BoundaryRay {
    pub fn new(ball: &CayleyBall, end: u32) -> Self {
        let depth = ball.level(end);
        let points = (0..=depth).map(|k| ball.prefix(end, k)).collect();
        BoundaryRay { points, word: ball.normal_word(end) }
    }

    pub fn depth(&self) -> usize {
        self.points.len() - 1
    }

    pub fn at(&self, k: usize) -> u32 {
        self.points[k]
    }

    pub fn end(&self) -> u32 {
        *self.points.last().unwrap()
    }

    pub fn word(&self) -> &NormalWord {
        &self.word
    }

    /// `count` rays drawn uniformly (with replacement) from `S_depth`.
    pub fn sample(ball: &CayleyBall, depth: usize, count: usize, seed: u64) -> Vec<BoundaryRay> {
        let range = ball.sphere(depth);
        if range.is_empty() {
            return Vec::new();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| BoundaryRay::new(ball, rng.gen_range(range.clone()))).collect()
    }
}

/// `p^n_m(v)`: the element spelled by the first `m` letters of the normal form of `v`.
pub fn project_vertex(ball: &CayleyBall, v: u32, m: usize) -> u32 {
    ball.prefix(v, m)
}

/// Checks `p^m_l ∘ p^n_m = p^n_l` on every element of `S_n` for every
/// `l <= m <= n`, comparing against truncation of the spelled word.
/// Returns the number of checked triples and the failures.
pub fn check_functoriality(ball: &CayleyBall, n: usize) -> (u64, Vec<(u32, usize, usize)>) {
    let range = ball.sphere(n);
    let per: Vec<(u64, Vec<(u32, usize, usize)>)> = par::map_range((range.end - range.start) as usize, |i| {
        let v = range.start + i as u32;
        let w = ball.word(v);
        let mut bad = Vec::new();
        let mut count = 0;
        for m in 0..=n {
            let pm = project_vertex(ball, v, m);
            if ball.walk(&w.letters()[..m]) != Some(pm) {
                bad.push((v, m, m));
            }
            for l in 0..=m {
                count += 1;
                if project_vertex(ball, pm, l) != project_vertex(ball, v, l) {
                    bad.push((v, m, l));
                }
            }
        }
        (count, bad)
    });
    let mut total = 0;
    let mut bad = Vec::new();
    for (c, b) in per {
        total += c;
        bad.extend(b);
    }
    (total, bad)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProjectionViolation {
    pub edge: (String, String),
    pub image: (String, String),
    pub image_distance: DistanceBounds,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProjectionAudit {
    pub n: usize,
    pub m: usize,
    pub bound_used: u32,
    pub delta: HalfInt,
    pub checked_edges: u64,
    /// Image pairs whose distance was actually computed.
    pub distinct_images: u64,
    pub violations: Vec<ProjectionViolation>,
    /// Pairs whose image distance could not be decided inside the ball.
    pub undecided: u64,
    /// `n - m > D + delta`.
    pub in_hypothesis_zone: bool,
    /// Violations inside the hypothesis zone.
    pub lemma_counterexamples: usize,
}

/// Checks that `p^n_m` sends every edge of `K_n` to an edge or a vertex of `K_m`.
pub fn audit_projection_simplicial(
    ball: &CayleyBall,
    n: usize,
    m: usize,
    d: u32,
    delta: HalfInt,
) -> Result<ProjectionAudit, InverseError> {
    assert!(m <= n, "projection goes down");
    let k = build_sphere_complex(ball, n, d)?;
    let in_zone = HalfInt::from_int(n as i64 - m as i64) > delta.plus_int(d as i64);
    let checked_edges = k.edge_count();
    let mut audit = ProjectionAudit {
        n,
        m,
        bound_used: d,
        delta,
        checked_edges,
        distinct_images: 0,
        violations: Vec::new(),
        undecided: 0,
        in_hypothesis_zone: in_zone,
        lemma_counterexamples: 0,
    };
    if d as usize >= 2 * m {
        // any two points of S_m are within 2m
        return Ok(audit);
    }
    let mut images: HashSet<(u32, u32)> = HashSet::new();
    let mut witness = std::collections::HashMap::new();
    for (u, v) in k.graph.edges() {
        let (a, b) = (project_vertex(ball, k.element(u), m), project_vertex(ball, k.element(v), m));
        if a != b {
            let key = (a.min(b), a.max(b));
            if images.insert(key) {
                witness.insert(key, (k.element(u), k.element(v)));
            }
        }
    }
    let mut pairs: Vec<(u32, u32)> = images.into_iter().collect();
    pairs.sort_unstable();
    audit.distinct_images = pairs.len() as u64;
    let verdicts = par::map_slice(&pairs, |&(a, b)| ball.distance_at_most(a, b, d));
    for (&(a, b), v) in pairs.iter().zip(verdicts) {
        match v {
            Some(true) => {}
            Some(false) => {
                let (g, h) = witness[&(a, b)];
                audit.violations.push(ProjectionViolation {
                    edge: (ball.render(g), ball.render(h)),
                    image: (ball.render(a), ball.render(b)),
                    image_distance: ball.distance(a, b),
                });
            }
            None => audit.undecided += 1,
        }
    }
    if in_zone {
        audit.lemma_counterexamples = audit.violations.len();
    }
    Ok(audit)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdmissibleSet {
    pub n: usize,
    pub slack: usize,
    /// Ball elements of `S_n`, sorted.
    pub vertices: Vec<u32>,
    /// `ray(n)`.
    pub canonical: u32,
    /// Points at level `n` of geodesics from `e` to `ray(n + slack)`.
    pub trace: Vec<u32>,
    pub diameter: DistanceBounds,
    pub bound: HalfInt,
    pub within_bound: Option<bool>,
}

/// `2 delta + 1`, rounded down to a whole distance.
pub fn neighborhood_radius(delta: HalfInt) -> u32 {
    delta.times(2).plus_int(1).floor().max(0) as u32
}

/// Decides `value <= bound` for bounds on an integer distance.
pub fn compare(value: DistanceBounds, bound: HalfInt) -> Option<bool> {
    if HalfInt::from_int(value.hi as i64) <= bound {
        Some(true)
    } else if HalfInt::from_int(value.lo as i64) > bound {
        Some(false)
    } else {
        None
    }
}

/// Vertices of `S_n` within `2 delta + 1` of the time-`n` point of some
/// geodesic from `e` to `ray(n + slack)`.
pub fn admissible_projections(
    ball: &CayleyBall,
    ray: &BoundaryRay,
    n: usize,
    delta: HalfInt,
    slack: usize,
) -> Result<AdmissibleSet, InverseError> {
    if n + slack > ray.depth() {
        return Err(InverseError::RayTooShort { depth: ray.depth(), n, slack });
    }
    let trace = ball.geodesic_cone(ray.at(n + slack), n);
    let t = neighborhood_radius(delta);
    let vertices = ball
        .sphere_neighborhood(&trace, n, t)
        .ok_or(InverseError::InsufficientRadius { n, t, radius: ball.radius() })?;
    let bound = delta.times(6).plus_int(2);
    let bound_int = bound.floor().max(0) as u32;
    let (diameter, _) = ball.max_cross_distance(&vertices, &vertices, bound_int);
    Ok(AdmissibleSet { n, slack, canonical: ray.at(n), trace, within_bound: compare(diameter, bound), diameter, bound, vertices })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CloseProjectionReport {
    pub n: usize,
    pub max_distance: DistanceBounds,
    pub bound: HalfInt,
    pub pass: Option<bool>,
    pub witness: Option<(String, String)>,
}

/// Largest distance between admissible vertices at levels `n` and `n + 1`,
/// against `6 delta + 3 + 2D`.
pub fn check_close_projections(
    ball: &CayleyBall,
    ray: &BoundaryRay,
    n: usize,
    delta: HalfInt,
    d: u32,
    slack: usize,
) -> Result<CloseProjectionReport, InverseError> {
    let a = admissible_projections(ball, ray, n, delta, slack)?;
    let b = admissible_projections(ball, ray, n + 1, delta, slack)?;
    let bound = delta.times(6).plus_int(3 + 2 * d as i64);
    let (max_distance, w) = ball.max_cross_distance(&a.vertices, &b.vertices, bound.floor().max(0) as u32);
    Ok(CloseProjectionReport {
        n,
        max_distance,
        bound,
        pass: compare(max_distance, bound),
        witness: w.map(|(x, y)| (ball.render(x), ball.render(y))),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CommonSimplexVerdict {
    pub n: usize,
    pub product: ProductBounds,
    pub threshold: HalfInt,
    /// The product is certified to reach the threshold.
    pub applies: bool,
    pub max_distance: DistanceBounds,
    pub d: u32,
    /// `None` when the hypothesis does not apply or a distance is undecided.
    pub pass: Option<bool>,
}

/// If the rays fellow-travel past `n + 6 delta`, both admissible sets at
/// level `n` must fit in one simplex of `K_n`.
pub fn common_simplex_threshold(
    ball: &CayleyBall,
    ray1: &BoundaryRay,
    ray2: &BoundaryRay,
    n: usize,
    delta: HalfInt,
    d: u32,
    slack: usize,
) -> Result<CommonSimplexVerdict, InverseError> {
    let product = ball.gromov_product(0, ray1.end(), ray2.end());
    let threshold = delta.times(6).plus_int(n as i64);
    let applies = product.lo >= threshold;
    let a = admissible_projections(ball, ray1, n, delta, slack)?;
    let b = admissible_projections(ball, ray2, n, delta, slack)?;
    let mut all: Vec<u32> = a.vertices.iter().chain(&b.vertices).copied().collect();
    all.sort_unstable();
    all.dedup();
    let (max_distance, _) = ball.max_cross_distance(&all, &all, d);
    let pass = if applies { max_distance.at_most(d) } else { None };
    Ok(CommonSimplexVerdict { n, product, threshold, applies, max_distance, d, pass })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RayProductReport {
    pub m1: usize,
    pub m2: usize,
    pub lhs: ProductBounds,
    pub rhs: ProductBounds,
    /// Lower bound of `lhs - rhs`.
    pub margin: HalfInt,
    pub pass: Option<bool>,
}

/// `(ray1(m1)|ray2(m2))_e >= min{m1 - 3δ, m2 - 3δ, (ray1(N)|ray2(N))_e - 6δ}`,
/// with the depth-`N` product standing in for the product of the limit points.
pub fn check_ray_product_bound(
    ball: &CayleyBall,
    ray1: &BoundaryRay,
    ray2: &BoundaryRay,
    m1: usize,
    m2: usize,
    delta: HalfInt,
) -> RayProductReport {
    let lhs = ball.gromov_product(0, ray1.at(m1), ray2.at(m2));
    let far = ball.gromov_product(0, ray1.end(), ray2.end());
    let a = HalfInt::from_int(m1 as i64) - delta.times(3);
    let b = HalfInt::from_int(m2 as i64) - delta.times(3);
    let rhs = ProductBounds { lo: a.min(b).min(far.lo - delta.times(6)), hi: a.min(b).min(far.hi - delta.times(6)) };
    let pass = if lhs.lo >= rhs.hi {
        Some(true)
    } else if lhs.hi < rhs.lo {
        Some(false)
    } else {
        None
    };
    RayProductReport { m1, m2, lhs, rhs, margin: lhs.lo - rhs.hi, pass }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{BallOptions, GroupPresentation};

    fn ball(text: &str, r: usize) -> CayleyBall {
        CayleyBall::build(&GroupPresentation::parse(text).unwrap(), BallOptions::new(r)).unwrap()
    }

    fn elem(b: &CayleyBall, w: &str) -> u32 {
        let word = b.presentation().parse_word(w).unwrap();
        b.locate(word.letters()).unwrap().unwrap()
    }

    #[test]
    fn truncation_examples() {
        let z = ball("gens: a", 6);
        assert_eq!(project_vertex(&z, elem(&z, "a^5"), 2), elem(&z, "a^2"));
        let f = ball("gens: a b", 3);
        let g = elem(&f, "a b a");
        assert_eq!(project_vertex(&f, g, 1), elem(&f, "a"));
        assert_eq!(project_vertex(&f, g, 3), g);
        assert_eq!(project_vertex(&f, g, 0), 0);
        let (count, bad) = check_functoriality(&f, 3);
        assert!(bad.is_empty());
        assert_eq!(count, 36 * 10);
    }

    #[test]
    fn free_group_audits_are_vacuous() {
        let f = ball("gens: a b", 4);
        let a = audit_projection_simplicial(&f, 4, 2, 1, HalfInt::ZERO).unwrap();
        assert_eq!(a.checked_edges, 0);
        assert!(a.violations.is_empty());
        assert!(a.in_hypothesis_zone);
    }

    #[test]
    fn free_group_admissible_sets_are_singletons() {
        let f = ball("gens: a b", 5);
        for ray in BoundaryRay::sample(&f, 5, 20, 1) {
            for n in 1..=4 {
                let s = admissible_projections(&f, &ray, n, HalfInt::ZERO, 1).unwrap();
                assert_eq!(s.vertices, vec![ray.at(n)]);
                assert_eq!(s.diameter, DistanceBounds::exact(0));
                let c = check_close_projections(&f, &ray, n.min(3), HalfInt::ZERO, 1, 1).unwrap();
                assert_eq!(c.max_distance, DistanceBounds::exact(1));
            }
        }
    }

    #[test]
    fn tree_ray_products_meet_the_bound_exactly() {
        let f = ball("gens: a b", 6);
        let r1 = BoundaryRay::new(&f, elem(&f, "a b a b a b"));
        let r2 = BoundaryRay::new(&f, elem(&f, "a b a^-1 b a b"));
        for m in 0..=6 {
            let r = check_ray_product_bound(&f, &r1, &r2, m, m, HalfInt::ZERO);
            assert_eq!(r.lhs.lo, HalfInt::from_int(m.min(2) as i64));
            assert_eq!(r.margin, HalfInt::ZERO);
            assert_eq!(r.pass, Some(true));
        }
        let v = common_simplex_threshold(&f, &r1, &r2, 2, HalfInt::ZERO, 1, 1).unwrap();
        assert!(v.applies);
        assert_eq!(v.max_distance, DistanceBounds::exact(0));
        assert_eq!(v.pass, Some(true));
    }

    #[test]
    fn surface_admissible_sets_at_small_delta() {
        let s = ball("gens: a b c d\nrel: [a,b][c,d]", 4);
        let ray = BoundaryRay::new(&s, s.sphere(4).start + 100);
        let a = admissible_projections(&s, &ray, 2, HalfInt::from_int(1), 1).unwrap();
        assert!(a.vertices.contains(&a.canonical));
        assert_eq!(a.within_bound, Some(true));
    }
}
