//! The approximate sections `i^n_{n+1}: K_n -> K_{n+1}` and the growth of
//! Gromov products along their iterates.

use super::ConditionError;
use crate::ball::{CayleyBall, DistanceBounds, NONE};
use crate::complex::{
    edge_path_search, null_homotopy_search, DiskDiagram, HomologyContext, NullHomotopyVerdict, SimplicialLoop,
    SphereComplex,
};
use crate::inverse::BoundaryRay;
use crate::par;
use crate::word::HalfInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

/// Smallest child in the normal-form tree of every element of `S_n`
/// (`NONE` for dead ends).
fn first_children(ball: &CayleyBall, n: usize) -> Vec<u32> {
    let s = ball.sphere(n);
    let mut out = vec![NONE; s.len()];
    for y in ball.sphere(n + 1).rev() {
        out[(ball.parent(y) - s.start) as usize] = y;
    }
    out
}

/// `i(x)`: the shortlex-least `y` in `S_{n+1}` whose normal form runs as close
/// as possible to `x` at time `n`, within `2 delta`. Returns `y` and
/// `d(x, prefix_n(y))`.
pub fn imap_vertex(ball: &CayleyBall, children: &[u32], x: u32, delta: HalfInt) -> Option<(u32, u32)> {
    let n = ball.level(x);
    let first = ball.sphere(n).start;
    let child = |c: u32| children[(c - first) as usize];
    if child(x) != NONE {
        return Some((child(x), 0));
    }
    let limit = delta.times(2).floor().max(0) as u32;
    for t in 1..=limit {
        let near = ball.sphere_neighborhood(&[x], n, t)?;
        if let Some(y) = near.iter().map(|&c| child(c)).filter(|&y| y != NONE).min() {
            return Some((y, t));
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DiskBudgets {
    pub depth: u32,
    pub area: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IMapHole {
    /// Vertices of `K_n`.
    pub cell: Vec<u32>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IMap {
    pub n: usize,
    pub d: u32,
    pub delta: HalfInt,
    /// Edge paths have at most `2^l_edge` edges.
    pub l_edge: u32,
    pub disk_budgets: DiskBudgets,
    /// Ball element in `S_{n+1}` for each vertex of `K_n`.
    pub vertex_images: Vec<u32>,
    /// Largest `d(x, prefix_n(i(x)))`.
    pub max_offset: u32,
    /// Largest `d(x, i(x))`.
    pub max_image_distance: DistanceBounds,
    /// Edges of `K_n` whose endpoint images are equal or adjacent.
    pub simplicial_edges: u64,
    /// Paths in `K_{n+1}` (local vertices) for the remaining edges.
    pub edge_paths: BTreeMap<(u32, u32), Vec<u32>>,
    /// Triangles of `K_n` whose image is a simplex.
    pub simplex_triangles: u64,
    pub triangle_disks: BTreeMap<(u32, u32, u32), DiskDiagram>,
    pub holes: Vec<IMapHole>,
    pub max_edge_path: usize,
    pub max_disk_depth: u32,
}

impl IMap {
    pub fn is_total(&self) -> bool {
        self.holes.is_empty()
    }

    /// Image path of the edge `u -> v` of `K_n`, as local vertices of `K_{n+1}`.
    pub fn edge_image(&self, next: &SphereComplex, u: u32, v: u32) -> Option<Vec<u32>> {
        let (a, b) = (next.vertex_of(self.vertex_images[u as usize]), next.vertex_of(self.vertex_images[v as usize]));
        if a == b {
            return Some(vec![a]);
        }
        if next.graph.has_edge(a, b) {
            return Some(vec![a, b]);
        }
        let p = self.edge_paths.get(&(u.min(v), u.max(v)))?;
        let mut p = p.clone();
        if u > v {
            p.reverse();
        }
        Some(p)
    }

    /// The loop `i(u) -> i(v) -> i(w) -> i(u)` glued from the edge images.
    pub fn triangle_boundary(&self, next: &SphereComplex, u: u32, v: u32, w: u32) -> Option<Vec<u32>> {
        let mut walk = Vec::new();
        for (a, b) in [(u, v), (v, w), (w, u)] {
            let p = self.edge_image(next, a, b)?;
            walk.extend(&p[..p.len() - 1]);
        }
        if walk.is_empty() {
            walk.push(next.vertex_of(self.vertex_images[u as usize]));
        }
        Some(walk)
    }
}

/// Builds `i^n_{n+1}` on the 2-skeleton of `K_n`. Cells whose paths or disks
/// exceed the budgets are recorded as holes.
pub fn build_imap(
    ball: &CayleyBall,
    k: &SphereComplex,
    next: &SphereComplex,
    delta: HalfInt,
    l_edge: u32,
    budgets: DiskBudgets,
    homology: Option<&HomologyContext>,
) -> Result<IMap, ConditionError> {
    let n = k.n;
    let children = first_children(ball, n);
    let count = k.vertex_count();
    let found = par::map_range(count, |i| imap_vertex(ball, &children, k.element(i as u32), delta));
    let mut vertex_images = Vec::with_capacity(count);
    let mut max_offset = 0;
    for (i, f) in found.into_iter().enumerate() {
        let (y, t) = f.ok_or_else(|| ConditionError::NoExtension {
            n,
            vertex: ball.render(k.element(i as u32)),
            bound: delta.times(2),
        })?;
        vertex_images.push(y);
        max_offset = max_offset.max(t);
    }
    let dists = par::map_range(count, |i| ball.distance(k.element(i as u32), vertex_images[i]));
    let max_image_distance = dists
        .iter()
        .fold(DistanceBounds::exact(0), |a, d| DistanceBounds { lo: a.lo.max(d.lo), hi: a.hi.max(d.hi) });

    let mut map = IMap {
        n,
        d: k.d,
        delta,
        l_edge,
        disk_budgets: budgets,
        vertex_images,
        max_offset,
        max_image_distance,
        simplicial_edges: 0,
        edge_paths: BTreeMap::new(),
        simplex_triangles: 0,
        triangle_disks: BTreeMap::new(),
        holes: Vec::new(),
        max_edge_path: 1,
        max_disk_depth: 0,
    };
    let local: Vec<u32> = map.vertex_images.iter().map(|&y| next.vertex_of(y)).collect();
    let next_complete = next.edge_count() == (next.vertex_count() as u64 * (next.vertex_count() as u64).saturating_sub(1)) / 2;
    let edges = k.edge_count();
    if next_complete {
        // every image pair spans an edge, so i is simplicial
        map.simplicial_edges = edges;
        map.simplex_triangles = k.triangle_count();
        return Ok(map);
    }

    let max_edges = 1usize << l_edge.min(40);
    let rows = par::map_range(count, |u| {
        let mut simplicial = 0u64;
        let mut paths = Vec::new();
        for v in k.graph.neighbors(u as u32) {
            if v <= u as u32 {
                continue;
            }
            let (a, b) = (local[u], local[v as usize]);
            if a == b || next.graph.has_edge(a, b) {
                simplicial += 1;
            } else {
                paths.push(((u as u32, v), edge_path_search(next, a, b, max_edges)));
            }
        }
        (simplicial, paths)
    });
    for (s, paths) in rows {
        map.simplicial_edges += s;
        for (e, p) in paths {
            match p {
                Some(p) => {
                    map.max_edge_path = map.max_edge_path.max(p.len() - 1);
                    map.edge_paths.insert(e, p);
                }
                None => map.holes.push(IMapHole {
                    cell: vec![e.0, e.1],
                    reason: format!("no edge path of at most {max_edges} edges"),
                }),
            }
        }
    }
    let hole_edges: HashSet<(u32, u32)> = map.holes.iter().map(|h| (h.cell[0], h.cell[1])).collect();

    // only triangles touching a non-simplicial edge need a disk
    let mut special: BTreeSet<(u32, u32, u32)> = BTreeSet::new();
    for &(u, v) in map.edge_paths.keys().chain(hole_edges.iter()) {
        let nu = k.graph.neighbors(u);
        for w in k.graph.neighbors(v) {
            if w != u && nu.binary_search(&w).is_ok() {
                let mut t = [u, v, w];
                t.sort_unstable();
                special.insert((t[0], t[1], t[2]));
            }
        }
    }
    map.simplex_triangles = k.triangle_count() - special.len() as u64;
    let special: Vec<(u32, u32, u32)> = special.into_iter().collect();
    let disks = par::map_slice(&special, |&(u, v, w)| {
        if [(u, v), (u, w), (v, w)].iter().any(|e| hole_edges.contains(e)) {
            return Err("an edge has no image path".to_string());
        }
        let walk = map.triangle_boundary(next, u, v, w).expect("edge images exist");
        let lp = SimplicialLoop::new(next, &walk)?;
        match null_homotopy_search(next, &lp, budgets.depth, budgets.area, homology) {
            NullHomotopyVerdict::Disk(d) => {
                d.certify(next, &lp)?;
                Ok(d)
            }
            NullHomotopyVerdict::NontrivialH1 => Err("boundary loop is nonzero in H_1".to_string()),
            NullHomotopyVerdict::Unknown { explored } => Err(format!("disk search gave up after {explored} states")),
        }
    });
    for (t, d) in special.into_iter().zip(disks) {
        match d {
            Ok(d) => {
                map.max_disk_depth = map.max_disk_depth.max(d.depth);
                map.triangle_disks.insert(t, d);
            }
            Err(reason) => map.holes.push(IMapHole { cell: vec![t.0, t.1, t.2], reason }),
        }
    }
    Ok(map)
}

/// `x, i(x), i^2(x), ...` through the chain.
pub fn imap_orbit(ball: &CayleyBall, maps: &[IMap], x: u32) -> Result<Vec<u32>, ConditionError> {
    let mut out = vec![x];
    let mut cur = x;
    loop {
        let lv = ball.level(cur);
        let Some(map) = maps.iter().find(|m| m.n == lv) else { break };
        cur = map.vertex_images[(cur - ball.sphere(lv).start) as usize];
        out.push(cur);
    }
    Ok(out)
}

fn compose(ball: &CayleyBall, maps: &[IMap], x: u32, n: usize) -> Result<u32, ConditionError> {
    let mut cur = x;
    for lv in ball.level(x)..n {
        let map = maps.iter().find(|m| m.n == lv).ok_or(ConditionError::MissingMap { n: lv })?;
        cur = map.vertex_images[(cur - ball.sphere(lv).start) as usize];
    }
    Ok(cur)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GrowthSample {
    pub x: String,
    pub image: String,
    pub product: crate::ball::ProductBounds,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GrowthStats {
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub vertices: usize,
    pub mates: usize,
    pub rays: usize,
    /// Largest `m - (e | i^m_n(x), x)`, from the lower bound of each product.
    pub c_fit: HalfInt,
    pub simplex_c_fit: HalfInt,
    pub ray_c_fit: HalfInt,
    /// All products entering the fits were exact.
    pub exact: bool,
    /// The sample attaining `c_fit`.
    pub worst: Option<GrowthSample>,
}

/// Gromov-product growth of `i^m_n` on vertices of `K_m`, on pairs of
/// adjacent vertices, and along rays. At most `cap` vertices and `cap` edges
/// are used; larger populations are sampled with `seed`.
pub fn iterate_imap(
    ball: &CayleyBall,
    km: &SphereComplex,
    maps: &[IMap],
    n: usize,
    rays: &[BoundaryRay],
    cap: usize,
    seed: u64,
) -> Result<GrowthStats, ConditionError> {
    let m = km.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = km.vertex_count() as u32;
    let verts: Vec<u32> = if (count as usize) <= cap {
        (0..count).collect()
    } else {
        let mut v: Vec<u32> = (0..cap).map(|_| rng.gen_range(0..count)).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let mut images = vec![NONE; count as usize];
    for &v in &verts {
        images[v as usize] = compose(ball, maps, km.element(v), n)?;
    }
    let mh = HalfInt::from_int(m as i64);
    let prods = par::map_slice(&verts, |&v| ball.gromov_product(0, images[v as usize], km.element(v)));
    let mut stats = GrowthStats {
        m,
        n,
        seed,
        vertices: verts.len(),
        mates: 0,
        rays: rays.len(),
        c_fit: HalfInt::ZERO,
        simplex_c_fit: HalfInt::ZERO,
        ray_c_fit: HalfInt::ZERO,
        exact: true,
        worst: None,
    };
    for (&v, p) in verts.iter().zip(&prods) {
        stats.exact &= p.is_exact();
        if mh - p.lo > stats.c_fit || stats.worst.is_none() {
            stats.c_fit = stats.c_fit.max(mh - p.lo);
            stats.worst = Some(GrowthSample {
                x: ball.render(km.element(v)),
                image: ball.render(images[v as usize]),
                product: *p,
            });
        }
    }

    let edges: Vec<(u32, u32)> = if km.edge_count() <= cap as u64 {
        km.graph.edges().collect()
    } else {
        let mut e = BTreeSet::new();
        let mut tries = 0;
        while e.len() < cap && tries < 20 * cap {
            tries += 1;
            let u = rng.gen_range(0..count);
            let nb = km.graph.neighbors(u);
            if nb.is_empty() {
                continue;
            }
            let v = nb[rng.gen_range(0..nb.len())];
            e.insert((u.min(v), u.max(v)));
        }
        e.into_iter().collect()
    };
    for &(u, v) in &edges {
        for w in [u, v] {
            if images[w as usize] == NONE {
                images[w as usize] = compose(ball, maps, km.element(w), n)?;
            }
        }
    }
    let mates = par::map_slice(&edges, |&(u, v)| ball.gromov_product(0, images[u as usize], images[v as usize]));
    stats.mates = edges.len();
    for p in &mates {
        stats.exact &= p.is_exact();
        stats.simplex_c_fit = stats.simplex_c_fit.max(mh - p.lo);
    }

    for r in rays {
        let x = r.at(m);
        let p = ball.gromov_product(0, r.end(), compose(ball, maps, x, n)?);
        stats.exact &= p.is_exact();
        stats.ray_c_fit = stats.ray_c_fit.max(mh - p.lo);
    }
    Ok(stats)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundedStepReport {
    pub len: usize,
    /// Largest `d(x_{k+1}, x_k)`.
    pub step: DistanceBounds,
    /// Largest `d(e, x_m) - (x_m | x_n)_e` over `m < n`, from product lower bounds.
    pub c_fit: HalfInt,
    pub exact: bool,
    pub worst: Option<(usize, usize)>,
}

/// Product growth along a radial sequence (`|x_{k+1}| = |x_k| + 1`).
pub fn check_bounded_step_product(ball: &CayleyBall, seq: &[u32]) -> Result<BoundedStepReport, ConditionError> {
    for k in 1..seq.len() {
        if ball.level(seq[k]) != ball.level(seq[k - 1]) + 1 {
            return Err(ConditionError::NonRadial { index: k });
        }
    }
    let mut r = BoundedStepReport {
        len: seq.len(),
        step: DistanceBounds::exact(0),
        c_fit: HalfInt::ZERO,
        exact: true,
        worst: None,
    };
    for w in seq.windows(2) {
        let d = ball.distance(w[0], w[1]);
        r.exact &= d.is_exact();
        r.step = DistanceBounds { lo: r.step.lo.max(d.lo), hi: r.step.hi.max(d.hi) };
    }
    let rows = par::map_range(seq.len(), |a| {
        (a + 1..seq.len())
            .map(|b| {
                let p = ball.gromov_product(0, seq[a], seq[b]);
                (HalfInt::from_int(ball.level(seq[a]) as i64) - p.lo, p.is_exact(), b)
            })
            .collect::<Vec<_>>()
    });
    for (a, row) in rows.into_iter().enumerate() {
        for (deficit, exact, b) in row {
            r.exact &= exact;
            if deficit > r.c_fit {
                r.c_fit = deficit;
                r.worst = Some((a, b));
            }
        }
    }
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NearRaysReport {
    pub k: usize,
    pub delta: HalfInt,
    pub checked: u64,
    /// Elements with no `y` in `S_{n+k}` whose normal form passes within `delta`.
    pub path_misses: Vec<String>,
    /// Elements with no `y` in `S_{n+k}` whose prefix at time `n` is within `2 delta`.
    pub prefix_misses: Vec<String>,
    /// Searches that could not be completed inside the ball.
    pub undecided: u64,
}

/// Every `x` with `|x| + k <= R` lies near the normal form of some element
/// `k` levels further out, both along the path and at time `|x|`.
pub fn check_near_geodesic_rays(ball: &CayleyBall, k: usize, delta: HalfInt) -> NearRaysReport {
    let r = ball.radius();
    let mut report =
        NearRaysReport { k, delta, checked: 0, path_misses: Vec::new(), prefix_misses: Vec::new(), undecided: 0 };
    if k > r {
        return report;
    }
    let t_path = delta.floor().max(0) as u32;
    let t_prefix = delta.times(2).floor().max(0) as u32;
    for n in 0..=r - k {
        // prefixes of elements of S_{n+k}
        let mut prefix = vec![false; ball.len()];
        for y in ball.sphere(n + k) {
            let mut g = y;
            while !prefix[g as usize] {
                prefix[g as usize] = true;
                if g == 0 {
                    break;
                }
                g = ball.parent(g);
            }
        }
        let first = ball.sphere(n).start;
        let res = par::map_range(ball.sphere_size(n), |i| {
            let x = first + i as u32;
            let near_path = within(ball, x, t_path, |g| prefix[g as usize] && ball.level(g) <= n + k);
            let near_prefix = within(ball, x, t_prefix, |g| prefix[g as usize] && ball.level(g) == n);
            (x, near_path, near_prefix)
        });
        for (x, a, b) in res {
            report.checked += 1;
            // a miss inside the ball is only conclusive when the search stayed inside
            let inside = n as u32 + t_prefix <= r as u32;
            match a {
                true => {}
                false if inside => report.path_misses.push(ball.render(x)),
                false => report.undecided += 1,
            }
            match b {
                true => {}
                false if inside => report.prefix_misses.push(ball.render(x)),
                false => report.undecided += 1,
            }
        }
    }
    report
}

/// Some ball element within `t` of `x` (through the ball) satisfies `hit`.
fn within(ball: &CayleyBall, x: u32, t: u32, hit: impl Fn(u32) -> bool) -> bool {
    if hit(x) {
        return true;
    }
    let mut seen: HashSet<u32> = HashSet::from([x]);
    let mut queue = VecDeque::from([(x, 0u32)]);
    while let Some((u, d)) = queue.pop_front() {
        if d == t {
            continue;
        }
        for v in ball.neighbors(u) {
            if seen.insert(v) {
                if hit(v) {
                    return true;
                }
                queue.push_back((v, d + 1));
            }
        }
    }
    false
}
