//! Checkers for the detour conditions, the loop-filling condition and the
//! approximate sections `i^n_{n+1}`.

mod imap;
mod scond;

pub use imap::{
    build_imap, check_bounded_step_product, check_near_geodesic_rays, imap_orbit, imap_vertex, iterate_imap,
    BoundedStepReport, DiskBudgets, GrowthSample, GrowthStats, IMap, IMapHole, NearRaysReport,
};
pub use scond::{check_s_condition, sample_loop, LoopOutcome, LoopSource, SReport};

use crate::ball::{CayleyBall, DistanceBounds};
use crate::complex::{ComplexError, FlagComplex, SphereComplex};
use crate::inverse::{admissible_projections, BoundaryRay, InverseError};
use crate::par;
use crate::word::HalfInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConditionError {
    #[error("ball of radius {radius} leaves no room for detours around S_{n}")]
    RadiusTooSmall { n: usize, radius: usize },
    #[error("cannot decide which pairs of S_{n} lie within {m} at radius {radius}")]
    PairsUndecidable { n: usize, m: u32, radius: usize },
    #[error("no map out of S_{n} in the chain")]
    MissingMap { n: usize },
    #[error("sequence is not radial at step {index}")]
    NonRadial { index: usize },
    #[error("vertex {vertex} of S_{n} has no extension within {bound}")]
    NoExtension { n: usize, vertex: String, bound: HalfInt },
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Inverse(#[from] InverseError),
}

/// How the forbidden ball around `e` is sized for a pair `x, y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DdagRadius {
    /// `d(x, y) - c`.
    PairDistance,
    /// `n - c`.
    Sphere,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairPolicy {
    Exhaustive,
    Sampled { count: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DetourPath {
    pub x: String,
    pub y: String,
    pub distance: DistanceBounds,
    pub forbidden_radius: i64,
    pub length: u32,
    pub path: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DdagFailure {
    pub x: String,
    pub y: String,
    pub distance: DistanceBounds,
    pub forbidden_radius: i64,
    pub reason: String,
    pub explored: usize,
    /// No path of length at most the budget exists at all, not only inside the ball.
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DdagReport {
    pub n: usize,
    pub m: u32,
    pub c: HalfInt,
    pub mode: DdagRadius,
    pub l_budget: u32,
    pub policy: PairPolicy,
    pub ball_radius: usize,
    pub pairs_checked: u64,
    /// Pairs settled without search because a geodesic already avoids the ball.
    pub pairs_geodesic: u64,
    pub l_min: Option<u32>,
    /// Every shortest length is exact rather than an upper bound from inside the ball.
    pub l_min_exact: bool,
    pub histogram: BTreeMap<u32, u64>,
    pub worst: Option<DetourPath>,
    pub failure_count: u64,
    pub failures: Vec<DdagFailure>,
}

impl DdagReport {
    pub fn pass(&self) -> bool {
        self.failure_count == 0
    }
}

const LISTED_FAILURES: usize = 50;

struct PairResult {
    x: u32,
    y: u32,
    distance: DistanceBounds,
    radius: i64,
    /// Length and exactness, or reason, explored count and certification.
    outcome: Result<(u32, bool), (String, usize, bool)>,
    geodesic: bool,
}

thread_local! {
    static BFS: std::cell::RefCell<(Vec<u32>, Vec<u32>, Vec<u32>, u32)> =
        const { std::cell::RefCell::new((Vec::new(), Vec::new(), Vec::new(), 0)) };
}

/// Breadth-first search from `x` through ball elements above level `radius`,
/// to depth `max_len`, stopping once every target is reached. Returns the
/// distance to each target, the number of visited elements and a shortest
/// path to `longest` when asked.
fn region_bfs(
    ball: &CayleyBall,
    x: u32,
    radius: i64,
    max_len: u32,
    targets: &[u32],
    want_path: bool,
) -> (Vec<Option<u32>>, usize, Option<Vec<u32>>) {
    BFS.with(|cell| {
        let mut cell = cell.borrow_mut();
        let (stamp, dist, parent, gen) = &mut *cell;
        if stamp.len() != ball.len() {
            *stamp = vec![0; ball.len()];
            *dist = vec![0; ball.len()];
            *parent = vec![0; ball.len()];
            *gen = 0;
        }
        *gen += 1;
        let g = *gen;
        let mut is_target: HashMap<u32, usize> = HashMap::new();
        for (i, &t) in targets.iter().enumerate() {
            is_target.insert(t, i);
        }
        let mut remaining = is_target.len();
        let mut out = vec![None; targets.len()];
        stamp[x as usize] = g;
        dist[x as usize] = 0;
        parent[x as usize] = x;
        let mut queue = VecDeque::from([x]);
        let mut visited = 1;
        let mut last_found = None;
        if let Some(&i) = is_target.get(&x) {
            out[i] = Some(0);
            remaining -= 1;
            last_found = Some(x);
        }
        while let Some(u) = queue.pop_front() {
            if remaining == 0 {
                break;
            }
            let du = dist[u as usize];
            if du >= max_len {
                break;
            }
            for v in ball.neighbors(u) {
                if stamp[v as usize] == g || ball.level(v) as i64 <= radius {
                    continue;
                }
                stamp[v as usize] = g;
                dist[v as usize] = du + 1;
                parent[v as usize] = u;
                visited += 1;
                queue.push_back(v);
                if let Some(&i) = is_target.get(&v) {
                    if out[i].is_none() {
                        out[i] = Some(du + 1);
                        remaining -= 1;
                        last_found = Some(v);
                    }
                }
            }
        }
        let path = if want_path {
            last_found.map(|mut z| {
                let mut p = vec![z];
                while z != x {
                    z = parent[z as usize];
                    p.push(z);
                }
                p.reverse();
                p
            })
        } else {
            None
        };
        (out, visited, path)
    })
}

/// Shortest path from `x` to `y` through ball elements accepted by `allowed`,
/// of length at most `max_len`. Returns the vertex path, or the number of
/// explored vertices when there is none.
pub fn restricted_path(
    ball: &CayleyBall,
    x: u32,
    y: u32,
    allowed: impl Fn(u32) -> bool,
    max_len: u32,
) -> Result<Vec<u32>, usize> {
    if x == y {
        return Ok(vec![x]);
    }
    let mut maps: [HashMap<u32, u32>; 2] = [HashMap::from([(x, x)]), HashMap::from([(y, y)])];
    let mut dist: [HashMap<u32, u32>; 2] = [HashMap::from([(x, 0)]), HashMap::from([(y, 0)])];
    let mut frontier = [vec![x], vec![y]];
    let mut level = [0u32; 2];
    let mut best: Option<(u32, u32)> = None;
    loop {
        if let Some((b, _)) = best {
            if b <= level[0] + level[1] {
                break;
            }
        }
        if level[0] + level[1] >= max_len {
            break;
        }
        let s = usize::from(frontier[1].len() < frontier[0].len());
        if frontier[s].is_empty() {
            break;
        }
        let mut next = Vec::new();
        for &u in &frontier[s] {
            for v in ball.neighbors(u) {
                if maps[s].contains_key(&v) || !allowed(v) {
                    continue;
                }
                maps[s].insert(v, u);
                dist[s].insert(v, level[s] + 1);
                next.push(v);
                if let Some(&o) = dist[1 - s].get(&v) {
                    let total = level[s] + 1 + o;
                    if best.map_or(true, |(b, _)| total < b) {
                        best = Some((total, v));
                    }
                }
            }
        }
        frontier[s] = next;
        level[s] += 1;
    }
    match best {
        Some((b, meet)) if b <= max_len => {
            let mut left = vec![meet];
            let mut z = meet;
            while z != x {
                z = maps[0][&z];
                left.push(z);
            }
            left.reverse();
            let mut z = meet;
            while z != y {
                z = maps[1][&z];
                left.push(z);
            }
            Ok(left)
        }
        _ => Err(maps[0].len() + maps[1].len()),
    }
}

/// Checks that `path` is an edge path from `x` to `y` avoiding the closed
/// ball of radius `radius` about `e`.
pub fn verify_detour(ball: &CayleyBall, path: &[u32], x: u32, y: u32, radius: i64) -> bool {
    path.first() == Some(&x)
        && path.last() == Some(&y)
        && path.iter().all(|&g| ball.level(g) as i64 > radius)
        && path.windows(2).all(|w| ball.neighbors(w[0]).any(|h| h == w[1]))
}

fn forbidden_radius(mode: DdagRadius, n: usize, d: DistanceBounds, c: HalfInt) -> i64 {
    let base = match mode {
        // the larger end of the bracket gives the stronger requirement
        DdagRadius::PairDistance => d.hi as i64,
        DdagRadius::Sphere => n as i64,
    };
    (HalfInt::from_int(base) - c).floor()
}

/// All pairs `(x, y)` sharing the source `x`, with the longest detour path among them.
fn check_source(
    ball: &CayleyBall,
    n: usize,
    x: u32,
    ys: &[u32],
    c: HalfInt,
    mode: DdagRadius,
    l_budget: u32,
) -> (Vec<PairResult>, Option<(u32, Vec<u32>)>) {
    let mut results: Vec<PairResult> = Vec::with_capacity(ys.len());
    let mut pending: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for &y in ys {
        let distance = ball.distance(x, y);
        let radius = forbidden_radius(mode, n, distance, c);
        let mut r = PairResult { x, y, distance, radius, outcome: Ok((0, true)), geodesic: false };
        if n as i64 <= radius {
            r.outcome = Err(("endpoints lie in the forbidden ball".into(), 0, true));
        } else if distance.lo > l_budget {
            r.outcome = Err((format!("distance exceeds the budget {l_budget}"), 0, true));
        } else {
            match distance.value() {
                // every geodesic between x and y stays at level >= n - floor(d/2)
                Some(d) if radius < n as i64 - (d / 2) as i64 => {
                    r.geodesic = true;
                    r.outcome = Ok((d, true));
                }
                _ => pending.entry(radius).or_default().push(results.len()),
            }
        }
        results.push(r);
    }
    // a path leaving the ball has length at least 2(R + 1 - n)
    let outside = 2 * (ball.radius() as u32 + 1 - n as u32);
    let mut worst: Option<(u32, Vec<u32>)> = None;
    for (radius, idx) in pending {
        let targets: Vec<u32> = idx.iter().map(|&i| results[i].y).collect();
        let (lens, explored, path) = region_bfs(ball, x, radius, l_budget, &targets, true);
        for (&i, len) in idx.iter().zip(lens) {
            results[i].outcome = match len {
                Some(l) => Ok((l, l <= outside)),
                None => Err((
                    format!("no path of length <= {l_budget} inside the ball outside radius {radius}"),
                    explored,
                    l_budget < outside,
                )),
            };
        }
        if let Some(p) = path {
            let len = (p.len() - 1) as u32;
            if worst.as_ref().map_or(true, |w| len > w.0) {
                worst = Some((len, p));
            }
        }
    }
    (results, worst)
}

/// Pairs `x < y` of `S_n` with `d(x, y) <= m`, as offsets into the sphere.
fn close_pairs(ball: &CayleyBall, n: usize, m: u32, policy: PairPolicy) -> Result<Vec<(u32, u32)>, ConditionError> {
    let range = ball.sphere(n);
    let size = range.len() as u32;
    let all = m as usize >= 2 * n;
    let undecidable = || ConditionError::PairsUndecidable { n, m, radius: ball.radius() };
    match policy {
        PairPolicy::Exhaustive => {
            if all {
                return Ok((0..size).flat_map(|i| (i + 1..size).map(move |j| (i, j))).collect());
            }
            let rows = par::map_range(size as usize, |i| {
                let x = range.start + i as u32;
                ball.sphere_neighborhood(&[x], n, m).map(|nb| {
                    nb.into_iter().filter(|&y| y > x).map(|y| (i as u32, y - range.start)).collect::<Vec<_>>()
                })
            });
            let mut out = Vec::new();
            for r in rows {
                out.extend(r.ok_or_else(undecidable)?);
            }
            Ok(out)
        }
        PairPolicy::Sampled { count, seed } => {
            if size < 2 {
                return Ok(Vec::new());
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut out = BTreeSet::new();
            let mut attempts = 0;
            while out.len() < count && attempts < 20 * count {
                attempts += 1;
                let i = rng.gen_range(0..size);
                let j = if all {
                    rng.gen_range(0..size)
                } else {
                    let nb = ball.sphere_neighborhood(&[range.start + i], n, m).ok_or_else(undecidable)?;
                    nb[rng.gen_range(0..nb.len())] - range.start
                };
                if i != j {
                    out.insert((i.min(j), i.max(j)));
                }
            }
            Ok(out.into_iter().collect())
        }
    }
}

/// Bounded-detour check on `S_n`: every pair at distance at most `m` must be
/// joined by a path of length at most `l_budget` avoiding the closed ball
/// about `e` whose radius is set by `mode` and `c`.
pub fn check_ddag(
    ball: &CayleyBall,
    n: usize,
    m: u32,
    l_budget: u32,
    c: HalfInt,
    mode: DdagRadius,
    policy: PairPolicy,
) -> Result<DdagReport, ConditionError> {
    if n >= ball.radius() {
        return Err(ConditionError::RadiusTooSmall { n, radius: ball.radius() });
    }
    let first = ball.sphere(n).start;
    let mut groups: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for (i, j) in close_pairs(ball, n, m, policy)? {
        groups.entry(first + i).or_default().push(first + j);
    }
    let groups: Vec<(u32, Vec<u32>)> = groups.into_iter().collect();
    let per_source = par::map_slice(&groups, |(x, ys)| check_source(ball, n, *x, ys, c, mode, l_budget));

    let mut report = DdagReport {
        n,
        m,
        c,
        mode,
        l_budget,
        policy,
        ball_radius: ball.radius(),
        pairs_checked: 0,
        pairs_geodesic: 0,
        l_min: None,
        l_min_exact: true,
        histogram: BTreeMap::new(),
        worst: None,
        failure_count: 0,
        failures: Vec::new(),
    };
    let mut longest = 0;
    let mut longest_pair: Option<(u32, u32, i64, DistanceBounds)> = None;
    for (results, worst) in per_source {
        for r in &results {
            report.pairs_checked += 1;
            report.pairs_geodesic += u64::from(r.geodesic);
            match &r.outcome {
                Ok((len, exact)) => {
                    *report.histogram.entry(*len).or_insert(0) += 1;
                    report.l_min_exact &= *exact;
                    if longest_pair.is_none() || *len > longest {
                        longest = *len;
                        longest_pair = Some((r.x, r.y, r.radius, r.distance));
                    }
                }
                Err((reason, explored, certified)) => {
                    report.failure_count += 1;
                    if report.failures.len() < LISTED_FAILURES {
                        report.failures.push(DdagFailure {
                            x: ball.render(r.x),
                            y: ball.render(r.y),
                            distance: r.distance,
                            forbidden_radius: r.radius,
                            reason: reason.clone(),
                            explored: *explored,
                            certified: *certified,
                        });
                    }
                }
            }
        }
        if let Some((len, path)) = worst {
            if report.worst.as_ref().map_or(true, |w| len > w.length) {
                let (x, y) = (path[0], *path.last().unwrap());
                let r = results.iter().find(|r| r.y == y).expect("path ends at a target");
                debug_assert!(verify_detour(ball, &path, x, y, r.radius));
                report.worst = Some(DetourPath {
                    x: ball.render(x),
                    y: ball.render(y),
                    distance: r.distance,
                    forbidden_radius: r.radius,
                    length: len,
                    path: path.iter().map(|&g| ball.render(g)).collect(),
                });
            }
        }
    }
    if report.failure_count == 0 {
        report.l_min = Some(longest);
    }
    if let Some((x, y, radius, distance)) = longest_pair {
        if report.worst.as_ref().map_or(true, |w| w.length < longest) {
            // settled without search; recover an explicit path
            if let (_, _, Some(path)) = region_bfs(ball, x, radius, longest, &[y], true) {
                report.worst = Some(DetourPath {
                    x: ball.render(x),
                    y: ball.render(y),
                    distance,
                    forbidden_radius: radius,
                    length: (path.len() - 1) as u32,
                    path: path.iter().map(|&g| ball.render(g)).collect(),
                });
            }
        }
    }
    Ok(report)
}

/// Smallest `L` with `2^L >= edges`.
pub fn subdivisions_for(edges: usize) -> u32 {
    let mut l = 0;
    while (1usize << l) < edges {
        l += 1;
    }
    l
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DdagPrimeReport {
    pub n: usize,
    pub m: u32,
    pub l_budget: u32,
    pub delta: HalfInt,
    pub d: u32,
    pub rays: usize,
    pub ray_depth: usize,
    pub slack: usize,
    pub seed: u64,
    pub ray_pairs: u64,
    /// Ray pairs whose admissible sets come within `m`.
    pub close_ray_pairs: u64,
    pub vertex_pairs: u64,
    /// Path lengths in edges.
    pub histogram: BTreeMap<u32, u64>,
    pub l_needed: Option<u32>,
    pub failures: Vec<(String, String)>,
    pub note: &'static str,
}

impl DdagPrimeReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Edge-path version of the detour condition inside `K_n`, with endpoints
/// drawn from admissible sets of sampled rays.
#[allow(clippy::too_many_arguments)]
pub fn check_ddag_prime(
    ball: &CayleyBall,
    k: &SphereComplex,
    m: u32,
    l_budget: u32,
    delta: HalfInt,
    rays: &[BoundaryRay],
    slack: usize,
    seed: u64,
) -> Result<DdagPrimeReport, ConditionError> {
    let n = k.n;
    let sets: Vec<Vec<u32>> = rays
        .iter()
        .map(|r| admissible_projections(ball, r, n, delta, slack).map(|a| a.vertices))
        .collect::<Result<_, _>>()?;
    let mut report = DdagPrimeReport {
        n,
        m,
        l_budget,
        delta,
        d: k.d,
        rays: rays.len(),
        ray_depth: rays.iter().map(|r| r.depth()).min().unwrap_or(0),
        slack,
        seed,
        ray_pairs: 0,
        close_ray_pairs: 0,
        vertex_pairs: 0,
        histogram: BTreeMap::new(),
        l_needed: None,
        failures: Vec::new(),
        note: "endpoints come from ray projections; factoring through a boundary path is not certified",
    };
    let max_edges = 1usize << l_budget.min(40);
    let mut targets: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
    let mut unit_pairs = 0u64;
    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            report.ray_pairs += 1;
            let (sa, sb) = (&sets[a], &sets[b]);
            let close = m as usize >= 2 * n || min_cross_distance(ball, sa, sb, m);
            if !close {
                continue;
            }
            report.close_ray_pairs += 1;
            let mut union: Vec<u32> = sa.iter().chain(sb).copied().collect();
            union.sort_unstable();
            union.dedup();
            if ball.max_cross_distance(&union, &union, k.d).0.hi <= k.d {
                // the whole union spans one simplex
                let shared = sa.iter().filter(|x| sb.binary_search(x).is_ok()).count() as u64;
                *report.histogram.entry(0).or_insert(0) += shared;
                unit_pairs += (sa.len() * sb.len()) as u64 - shared;
                report.vertex_pairs += shared;
                continue;
            }
            for &x in sa {
                targets.entry(k.vertex_of(x)).or_default().extend(sb.iter().map(|&y| k.vertex_of(y)));
            }
        }
    }
    if unit_pairs > 0 {
        report.vertex_pairs += unit_pairs;
        *report.histogram.entry(1).or_insert(0) += unit_pairs;
    }
    let sources: Vec<(u32, Vec<u32>)> = targets.into_iter().map(|(s, t)| (s, t.into_iter().collect())).collect();
    let lengths = par::map_slice(&sources, |(s, ts)| {
        let dist = bfs_distances(k, *s, max_edges);
        ts.iter().map(|t| (*t, dist.get(t).copied())).collect::<Vec<_>>()
    });
    for ((s, _), row) in sources.iter().zip(lengths) {
        for (t, len) in row {
            report.vertex_pairs += 1;
            match len {
                Some(l) => *report.histogram.entry(l).or_insert(0) += 1,
                None => report.failures.push((ball.render(k.element(*s)), ball.render(k.element(t)))),
            }
        }
    }
    if report.failures.is_empty() {
        let longest = report.histogram.keys().next_back().copied().unwrap_or(0);
        report.l_needed = Some(subdivisions_for(longest as usize));
    }
    Ok(report)
}

fn min_cross_distance(ball: &CayleyBall, a: &[u32], b: &[u32], m: u32) -> bool {
    a.iter().any(|&x| b.iter().any(|&y| ball.distance_at_most(x, y, m) == Some(true)))
}

fn bfs_distances(k: &impl FlagComplex, s: u32, max_edges: usize) -> HashMap<u32, u32> {
    let g = k.graph();
    let mut dist = HashMap::from([(s, 0u32)]);
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        let du = dist[&u];
        if du as usize >= max_edges {
            continue;
        }
        for v in g.neighbors(u) {
            dist.entry(v).or_insert_with(|| {
                queue.push_back(v);
                du + 1
            });
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::BallOptions;
    use crate::complex::build_sphere_complex;
    use crate::presentation::GroupPresentation;

    fn ball(text: &str, r: usize) -> CayleyBall {
        CayleyBall::build(&GroupPresentation::parse(text).unwrap(), BallOptions::new(r)).unwrap()
    }

    #[test]
    fn line_pairs_detour_trivially() {
        let b = ball("gens: a\n", 6);
        for n in 2..=4 {
            let r = check_ddag(&b, n, 2, 4, HalfInt::ZERO, DdagRadius::PairDistance, PairPolicy::Exhaustive).unwrap();
            // antipodes are 2n apart
            assert_eq!(r.pairs_checked, 0);
            assert!(r.pass());
        }
    }

    #[test]
    fn free_group_siblings_fail_near_the_root() {
        let b = ball("gens: a b\n", 6);
        let r = check_ddag(&b, 2, 2, 6, HalfInt::ZERO, DdagRadius::PairDistance, PairPolicy::Exhaustive).unwrap();
        // 12 points in 4 sibling triples
        assert_eq!(r.pairs_checked, 12);
        assert_eq!(r.failure_count, 12);
        assert!(r.failures.iter().all(|f| f.certified));
        let r = check_ddag(&b, 3, 2, 6, HalfInt::ZERO, DdagRadius::Sphere, PairPolicy::Exhaustive).unwrap();
        assert_eq!(r.failure_count, r.pairs_checked);
    }

    #[test]
    fn free_group_deep_siblings_pass_with_pair_radius() {
        let b = ball("gens: a b\n", 6);
        let r = check_ddag(&b, 4, 2, 4, HalfInt::ZERO, DdagRadius::PairDistance, PairPolicy::Exhaustive).unwrap();
        assert!(r.pass());
        assert_eq!(r.l_min, Some(2));
        let w = r.worst.unwrap();
        assert_eq!(w.path.len(), 3);
    }

    #[test]
    fn restricted_path_matches_plain_bfs() {
        let b = ball("gens: a b c d\nrel: [a,b][c,d]\n", 4);
        let s = b.sphere(2);
        for x in s.clone().step_by(7) {
            for y in s.clone().step_by(5) {
                let p = restricted_path(&b, x, y, |_| true, 8).unwrap();
                assert_eq!((p.len() - 1) as u32, b.distance(x, y).value().unwrap());
                assert!(verify_detour(&b, &p, x, y, -1));
            }
        }
        // avoiding e costs at least as much
        let x = s.start;
        let y = s.end - 1;
        let d = b.distance(x, y).value().unwrap() as usize;
        let p = restricted_path(&b, x, y, |g| g != 0, 40).unwrap();
        assert!(verify_detour(&b, &p, x, y, 0));
        assert!(p.len() - 1 >= d);
    }

    #[test]
    fn surface_small_sphere_detours() {
        let b = ball("gens: a b c d\nrel: [a,b][c,d]\n", 5);
        let r = check_ddag(&b, 3, 6, 40, HalfInt::from_int(6), DdagRadius::PairDistance, PairPolicy::Exhaustive)
            .unwrap();
        assert!(r.pass(), "{:?}", r.failures.first());
        assert!(r.l_min.unwrap() >= 6);
        // the recorded worst path is a searched detour, never longer than the maximum
        let w = r.worst.as_ref().unwrap();
        assert_eq!(w.length, r.l_min.unwrap());
        assert_eq!(w.path.len() as u32, w.length + 1);
        // a thin band of levels above a larger forbidden ball falls apart
        let r = check_ddag(&b, 3, 6, 40, HalfInt::from_int(2), DdagRadius::PairDistance, PairPolicy::Exhaustive)
            .unwrap();
        assert!(r.failure_count > 0);
    }

    #[test]
    fn sampled_pairs_are_deterministic() {
        let b = ball("gens: a b c d\nrel: [a,b][c,d]\n", 5);
        let p = PairPolicy::Sampled { count: 40, seed: 3 };
        let r1 = check_ddag(&b, 3, 6, 10, HalfInt::from_int(2), DdagRadius::PairDistance, p).unwrap();
        let r2 = check_ddag(&b, 3, 6, 10, HalfInt::from_int(2), DdagRadius::PairDistance, p).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(r1.pairs_checked, 40);
    }

    #[test]
    fn subdivision_counts() {
        assert_eq!(subdivisions_for(0), 0);
        assert_eq!(subdivisions_for(1), 0);
        assert_eq!(subdivisions_for(2), 1);
        assert_eq!(subdivisions_for(3), 2);
        assert_eq!(subdivisions_for(8), 3);
    }

    #[test]
    fn ddag_prime_on_the_surface() {
        let b = ball("gens: a b c d\nrel: [a,b][c,d]\n", 6);
        let k = build_sphere_complex(&b, 3, 3).unwrap();
        let rays = BoundaryRay::sample(&b, 6, 12, 9);
        let r = check_ddag_prime(&b, &k, 7, 10, HalfInt::from_int(1), &rays, 2, 9).unwrap();
        assert_eq!(r.ray_pairs, 66);
        assert!(r.vertex_pairs > 0);
        // with a path budget beyond the vertex count, failures are exactly the disconnected pairs
        let comp = crate::complex::connected_components(&k);
        let mut label = vec![0; k.vertex_count()];
        for (i, c) in comp.iter().enumerate() {
            for &v in c {
                label[v as usize] = i;
            }
        }
        let find = |w: &str| {
            let g = b.locate(b.presentation().parse_word(w).unwrap().letters()).unwrap().unwrap();
            label[k.vertex_of(g) as usize]
        };
        for (x, y) in &r.failures {
            assert_ne!(find(x), find(y));
        }
        let k = build_sphere_complex(&b, 3, 6).unwrap();
        let r = check_ddag_prime(&b, &k, 7, 3, HalfInt::from_int(1), &rays, 2, 9).unwrap();
        assert!(r.pass());
        assert_eq!(r.l_needed, Some(0));
    }
}
