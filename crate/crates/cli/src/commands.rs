use crate::config::{NRange, Run};
use anyhow::{anyhow, bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rips_boundary::complex::{
    build_sphere_complex, connected_components, export_dot, export_json, HomologyContext, SphereComplex,
};
use rips_boundary::conditions::{
    build_imap, check_bounded_step_product, check_ddag, check_ddag_prime, check_s_condition, iterate_imap,
    DdagRadius, DiskBudgets, IMap, LoopSource, PairPolicy,
};
use rips_boundary::horoball::{
    check_local_diameter, check_stage_stability, check_translation_isometry, export_stage_json,
    extract_stable_stages, ray_sequence, stage_projection, trace_geodesic_through_horoball,
};
use rips_boundary::inverse::{
    admissible_projections, audit_projection_simplicial, check_close_projections, check_functoriality,
    check_ray_product_bound, common_simplex_threshold, compare, project_vertex, BoundaryRay,
};
use rips_boundary::report::{classify_boundary, ClassifyConfig};
use rips_boundary::{DistanceBounds, HalfInt};
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;

/// Ordered by severity; the exit code is the worst status seen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Unknown,
    Violations,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Violations => 1,
            Status::Unknown => 2,
        }
    }

    fn of(pass: Option<bool>) -> Status {
        match pass {
            Some(true) => Status::Pass,
            Some(false) => Status::Violations,
            None => Status::Unknown,
        }
    }
}

pub struct Outcome {
    pub status: Status,
    pub result: Value,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn check_range(run: &Run, n: NRange) -> Result<()> {
    if n.hi > run.ball.radius() {
        bail!("n = {} is beyond the ball radius {}", n.hi, run.ball.radius());
    }
    Ok(())
}

pub fn ball(run: &Run) -> Result<Outcome> {
    let b = &run.ball;
    Ok(Outcome {
        status: Status::Pass,
        result: json!({ "elements": b.len(), "sphere_sizes": b.sphere_sizes() }),
    })
}

pub fn sphere(run: &Run, n: NRange, homology: bool) -> Result<Outcome> {
    check_range(run, n)?;
    let mut status = Status::Pass;
    let mut rows = Vec::new();
    for k in n.lo..=n.hi {
        let c = build_sphere_complex(&run.ball, k, run.d)?;
        let comps = connected_components(&c);
        let h1 = if homology {
            match HomologyContext::new(&c) {
                Ok(h) => to_value(h.summary()),
                Err(e) => {
                    status = status.max(Status::Unknown);
                    json!({ "refused": e.to_string() })
                }
            }
        } else {
            Value::Null
        };
        rows.push(json!({
            "n": k,
            "vertices": c.vertex_count(),
            "edges": c.edge_count(),
            "triangles": c.triangle_count(),
            "components": comps.len(),
            "h1": h1,
        }));
    }
    Ok(Outcome { status, result: json!({ "spheres": rows }) })
}

pub fn project(run: &Run, n: usize, m: usize) -> Result<Outcome> {
    if m > n || n > run.ball.radius() {
        bail!("need m <= n <= radius");
    }
    let b = &run.ball;
    let mut fibres: BTreeMap<u32, u64> = BTreeMap::new();
    for v in b.sphere(n) {
        *fibres.entry(project_vertex(b, v, m)).or_insert(0) += 1;
    }
    let mut sizes: BTreeMap<u64, u64> = BTreeMap::new();
    for &s in fibres.values() {
        *sizes.entry(s).or_insert(0) += 1;
    }
    let (checked, bad) = check_functoriality(b, n);
    let sample: Vec<(String, String)> =
        b.sphere(n).take(20).map(|v| (b.render(v), b.render(project_vertex(b, v, m)))).collect();
    Ok(Outcome {
        status: if bad.is_empty() { Status::Pass } else { Status::Violations },
        result: json!({
            "n": n,
            "m": m,
            "sphere_size": b.sphere_size(n),
            "image_size": fibres.len(),
            "surjective": fibres.len() == b.sphere_size(m),
            "fibre_sizes": sizes,
            "functoriality": { "checked": checked, "failures": bad.len() },
            "sample": sample,
        }),
    })
}

pub fn audit_projection(run: &Run, n: usize, m: usize) -> Result<Outcome> {
    let a = audit_projection_simplicial(&run.ball, n, m, run.d, run.delta.delta)?;
    let status = if a.lemma_counterexamples > 0 {
        Status::Violations
    } else if a.in_hypothesis_zone && a.undecided > 0 {
        Status::Unknown
    } else {
        Status::Pass
    };
    Ok(Outcome { status, result: to_value(&a) })
}

#[derive(Serialize, Default)]
struct Tally {
    checked: u64,
    failures: u64,
    undecided: u64,
    max: Option<DistanceBounds>,
}

impl Tally {
    fn add(&mut self, d: DistanceBounds, pass: Option<bool>) {
        self.checked += 1;
        match pass {
            Some(false) => self.failures += 1,
            None => self.undecided += 1,
            _ => {}
        }
        self.max = Some(match self.max {
            None => d,
            Some(m) => DistanceBounds { lo: m.lo.max(d.lo), hi: m.hi.max(d.hi) },
        });
    }

    fn status(&self) -> Status {
        if self.failures > 0 {
            Status::Violations
        } else if self.undecided > 0 {
            Status::Unknown
        } else {
            Status::Pass
        }
    }
}

pub fn rays(run: &Run, depth: usize, count: usize, tuples: usize, slack: usize) -> Result<Outcome> {
    let b = &run.ball;
    let delta = run.delta.delta;
    if depth > b.radius() || depth <= slack {
        bail!("ray depth must lie in ({slack}, {}]", b.radius());
    }
    let rays = BoundaryRay::sample(b, depth, count, run.args.seed);
    let top = depth - slack;
    let per: Vec<Result<(Vec<(DistanceBounds, Option<bool>, usize)>, Vec<(DistanceBounds, Option<bool>)>)>> =
        rips_boundary::par::map_slice(&rays, |ray| {
            let mut diam = Vec::new();
            let mut close = Vec::new();
            for n in 1..=top {
                let s = admissible_projections(b, ray, n, delta, slack)?;
                diam.push((s.diameter, s.within_bound, s.vertices.len()));
                if n < top {
                    let c = check_close_projections(b, ray, n, delta, run.d, slack)?;
                    close.push((c.max_distance, c.pass));
                }
            }
            Ok((diam, close))
        });
    let mut diameters = Tally::default();
    let mut consecutive = Tally::default();
    let mut largest_set = 0;
    for r in per {
        let (d, c) = r?;
        for (x, p, size) in d {
            diameters.add(x, p);
            largest_set = largest_set.max(size);
        }
        for (x, p) in c {
            consecutive.add(x, p);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(run.args.seed ^ 0x5eed);
    let mut product_fail = 0u64;
    let mut product_undecided = 0u64;
    let mut min_margin: Option<HalfInt> = None;
    let mut simplex = Tally::default();
    if rays.len() >= 2 {
        for _ in 0..tuples {
            let i = rng.gen_range(0..rays.len());
            let j = rng.gen_range(0..rays.len());
            let (m1, m2) = (rng.gen_range(0..=depth), rng.gen_range(0..=depth));
            let r = check_ray_product_bound(b, &rays[i], &rays[j], m1, m2, delta);
            match r.pass {
                Some(false) => product_fail += 1,
                None => product_undecided += 1,
                _ => {}
            }
            min_margin = Some(min_margin.map_or(r.margin, |m| m.min(r.margin)));
            let n = rng.gen_range(1..=top);
            let v = common_simplex_threshold(b, &rays[i], &rays[j], n, delta, run.d, slack)?;
            if v.applies {
                simplex.add(v.max_distance, v.pass);
            }
        }
    }
    let products = json!({
        "checked": tuples, "failures": product_fail, "undecided": product_undecided, "min_margin": min_margin,
    });
    let product_status = Status::of(if product_fail > 0 {
        Some(false)
    } else if product_undecided > 0 {
        None
    } else {
        Some(true)
    });
    let status = diameters.status().max(consecutive.status()).max(product_status).max(simplex.status());
    Ok(Outcome {
        status,
        result: json!({
            "rays": rays.len(),
            "depth": depth,
            "slack": slack,
            "largest_admissible_set": largest_set,
            "diameter_bound": delta.times(6).plus_int(2),
            "diameters": diameters,
            "consecutive_bound": delta.times(6).plus_int(3 + 2 * run.d as i64),
            "consecutive": consecutive,
            "products": products,
            "common_simplex": simplex,
        }),
    })
}

/// `Some(true)` when `next <= prev + slack` is certain, `Some(false)` when its
/// failure is certain, from lengths that are exact or upper bounds.
fn growth_holds(prev: (u32, bool), next: (u32, bool), slack: HalfInt) -> Option<bool> {
    let ok = HalfInt::from_int(next.0 as i64) <= slack.plus_int(prev.0 as i64);
    match (ok, prev.1, next.1) {
        (true, true, _) => Some(true),
        (false, true, true) => Some(false),
        _ => None,
    }
}

#[allow(clippy::too_many_arguments)]
pub fn ddag(
    run: &Run,
    n: NRange,
    m: Option<u32>,
    l_budget: u32,
    mode: DdagRadius,
    pairs: Option<usize>,
) -> Result<Outcome> {
    check_range(run, n)?;
    let delta = run.delta.delta;
    let m = m.unwrap_or(delta.times(8).plus_int(3).floor() as u32);
    let policy = match pairs {
        None => PairPolicy::Exhaustive,
        Some(count) => PairPolicy::Sampled { count, seed: run.args.seed },
    };
    let mut status = Status::Pass;
    let mut table = Vec::new();
    let mut reports = Vec::new();
    for k in n.lo..=n.hi {
        let r = check_ddag(&run.ball, k, m, l_budget, delta, mode, policy)?;
        if r.failures.iter().any(|f| f.certified) {
            status = status.max(Status::Violations);
        } else if r.failure_count > 0 {
            status = status.max(Status::Unknown);
        }
        table.push(json!({
            "n": k,
            "pairs": r.pairs_checked,
            "l_min": r.l_min,
            "exact": r.l_min_exact,
            "failures": r.failure_count,
        }));
        reports.push(r);
    }
    let mut growth = Vec::new();
    for w in reports.windows(2) {
        if let (Some(a), Some(b)) = (w[0].l_min, w[1].l_min) {
            let h = growth_holds((a, w[0].l_min_exact), (b, w[1].l_min_exact), delta.times(4));
            status = status.max(Status::of(h));
            growth.push(json!({ "n": w[1].n, "l_min_prev": a, "l_min": b, "slack": delta.times(4), "holds": h }));
        }
    }
    Ok(Outcome {
        status,
        result: json!({ "m": m, "mode": mode, "table": table, "growth": growth, "reports": reports }),
    })
}

#[allow(clippy::too_many_arguments)]
pub fn ddag_prime(
    run: &Run,
    n: NRange,
    m: Option<u32>,
    l_budget: u32,
    rays: usize,
    slack: usize,
) -> Result<Outcome> {
    check_range(run, n)?;
    let delta = run.delta.delta;
    let m = m.unwrap_or(delta.times(8).plus_int(3).floor() as u32);
    let depth = run.ball.radius();
    if n.hi + slack > depth {
        bail!("rays of depth {depth} cannot carry slack {slack} past n = {}", n.hi);
    }
    let sample = BoundaryRay::sample(&run.ball, depth, rays, run.args.seed);
    let mut status = Status::Pass;
    let mut reports = Vec::new();
    for k in n.lo..=n.hi {
        let c = build_sphere_complex(&run.ball, k, run.d)?;
        let r = check_ddag_prime(&run.ball, &c, m, l_budget, delta, &sample, slack, run.args.seed)?;
        if !r.pass() {
            status = Status::Violations;
        }
        reports.push(r);
    }
    Ok(Outcome { status, result: json!({ "m": m, "reports": reports }) })
}

pub fn scond(
    run: &Run,
    n: NRange,
    m: u32,
    depth: u32,
    area: usize,
    loops: usize,
    generators: bool,
) -> Result<Outcome> {
    check_range(run, n)?;
    let mut status = Status::Pass;
    let mut reports = Vec::new();
    for k in n.lo..=n.hi {
        let c = build_sphere_complex(&run.ball, k, run.d)?;
        let h = HomologyContext::new(&c)?;
        let source = if generators {
            LoopSource::Generators
        } else {
            LoopSource::Sampled { count: loops, seed: run.args.seed }
        };
        let r = check_s_condition(&c, k, m, depth, area, &source, &h);
        if r.obstructed > 0 || !r.all_disks_certified {
            status = Status::Violations;
        } else if r.unknown > 0 {
            status = status.max(Status::Unknown);
        }
        reports.push(json!({
            "n": k,
            "solved_fraction": r.solved_fraction(),
            "h1": h.summary(),
            "report": r,
        }));
    }
    Ok(Outcome { status, result: json!({ "reports": reports }) })
}

pub struct ImapParams {
    pub l_edge: u32,
    pub budgets: DiskBudgets,
}

fn build_chain(run: &Run, lo: usize, hi: usize, p: &ImapParams) -> Result<(Vec<SphereComplex>, Vec<IMap>)> {
    if hi + 1 > run.ball.radius() {
        bail!("maps out of S_{hi} need radius at least {}", hi + 1);
    }
    let mut ks = Vec::new();
    for k in lo..=hi + 1 {
        ks.push(build_sphere_complex(&run.ball, k, run.d)?);
    }
    let mut maps = Vec::new();
    for i in 0..ks.len() - 1 {
        let h = HomologyContext::new(&ks[i + 1]).ok();
        maps.push(build_imap(&run.ball, &ks[i], &ks[i + 1], run.delta.delta, p.l_edge, p.budgets, h.as_ref())?);
    }
    Ok((ks, maps))
}

pub fn imap(run: &Run, n: NRange, p: &ImapParams) -> Result<Outcome> {
    let (_, maps) = build_chain(run, n.lo, n.hi, p)?;
    let bound = run.delta.delta.times(2).plus_int(1);
    let mut status = Status::Pass;
    let mut rows = Vec::new();
    for m in &maps {
        let within = compare(m.max_image_distance, bound);
        status = status.max(Status::of(within));
        if !m.is_total() {
            status = status.max(Status::Unknown);
        }
        rows.push(json!({
            "n": m.n,
            "vertices": m.vertex_images.len(),
            "max_image_distance": m.max_image_distance,
            "max_offset": m.max_offset,
            "vertex_bound": bound,
            "within_bound": within,
            "simplicial_edges": m.simplicial_edges,
            "path_edges": m.edge_paths.len(),
            "max_edge_path": m.max_edge_path,
            "simplex_triangles": m.simplex_triangles,
            "disk_triangles": m.triangle_disks.len(),
            "max_disk_depth": m.max_disk_depth,
            "total": m.is_total(),
            "holes": m.holes,
        }));
    }
    Ok(Outcome { status, result: json!({ "maps": rows }) })
}

pub fn growth(run: &Run, m: usize, n: NRange, p: &ImapParams, rays: usize, cap: usize) -> Result<Outcome> {
    if n.lo <= m {
        bail!("targets must lie above m = {m}");
    }
    let (ks, maps) = build_chain(run, m, n.hi - 1, p)?;
    let sample = BoundaryRay::sample(&run.ball, run.ball.radius(), rays, run.args.seed);
    let mut stats = Vec::new();
    for t in n.lo..=n.hi {
        stats.push(iterate_imap(&run.ball, &ks[0], &maps, t, &sample, cap, run.args.seed)?);
    }
    let slack = run.delta.delta.times(2);
    let mut status = Status::Pass;
    let mut steps = Vec::new();
    for w in stats.windows(2) {
        let holds = w[1].c_fit <= w[0].c_fit + slack;
        if !holds {
            status = Status::Violations;
        }
        steps.push(json!({ "n": w[1].n, "c_fit_prev": w[0].c_fit, "c_fit": w[1].c_fit, "slack": slack, "holds": holds }));
    }
    if stats.iter().any(|s| !s.exact) {
        status = status.max(Status::Unknown);
    }
    let radial: Vec<Value> = sample
        .iter()
        .take(5)
        .map(|r| {
            let seq: Vec<u32> = (0..=r.depth()).map(|k| r.at(k)).collect();
            to_value(&check_bounded_step_product(&run.ball, &seq).expect("rays are radial"))
        })
        .collect();
    Ok(Outcome { status, result: json!({ "m": m, "stats": stats, "steps": steps, "radial_sequences": radial }) })
}

pub struct HoroParams {
    pub end: Option<String>,
    pub stages: usize,
    pub samples: usize,
    pub target_len: usize,
    pub cluster: usize,
}

pub fn horoball(run: &Run, p: &HoroParams) -> Result<Outcome> {
    let b = &run.ball;
    let delta = run.delta.delta;
    let depth = b.radius().saturating_sub(p.target_len.max(p.stages));
    if depth < 2 {
        bail!("radius {} leaves no room for stages", b.radius());
    }
    let end = match &p.end {
        Some(w) => {
            let g = run.element(w)?;
            b.prefix(g, depth)
        }
        None => BoundaryRay::sample(b, depth, 1, run.args.seed)[0].end(),
    };
    if b.level(end) != depth {
        bail!("the sequence end must lie on S_{depth}");
    }
    let seq = ray_sequence(b, end);
    let ex = extract_stable_stages(b, &seq, p.stages, run.d)?;
    let mut status = Status::Pass;
    // nesting and stabilization, rechecked from the stored sets
    let mut nesting_ok = true;
    for (a, s) in ex.stages.iter().enumerate() {
        for t in &ex.stages[..a] {
            let cut: Vec<u32> = s.vertices.iter().copied().filter(|&k| b.level(k) <= t.i).collect();
            nesting_ok &= cut == t.vertices;
        }
    }
    if !nesting_ok {
        status = Status::Violations;
    }
    let mut isometry_mismatches = 0;
    for s in &ex.stages {
        isometry_mismatches += check_translation_isometry(b, s, run.d)?;
    }
    if isometry_mismatches > 0 {
        status = Status::Violations;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(run.args.seed ^ 0x0b0b);
    let zs: Vec<u32> = {
        let range = b.sphere(p.target_len);
        let mut out = Vec::new();
        let mut tries = 0;
        while out.len() < p.samples && tries < 50 * p.samples.max(1) && !range.is_empty() {
            tries += 1;
            let z = rng.gen_range(range.clone());
            let deep = ex.stages.iter().all(|s| {
                matches!(b.translate(s.source, b.word(z).letters()), Ok(Some(t)) if b.level(t) > s.n)
            });
            if deep {
                out.push(z);
            }
        }
        out
    };
    let diameter_bound = delta.times(6).plus_int(1);
    let mut projections = Tally::default();
    let mut inside = 0u64;
    for s in &ex.stages {
        for &z in &zs {
            let q = stage_projection(b, s, z, delta)?;
            projections.add(q.diameter, q.within_bound);
            inside += q.inside() as u64;
        }
    }
    let mut stability = Tally::default();
    let mut stability_vacuous = 0u64;
    for w in ex.stages.windows(2) {
        for &z in &zs {
            let r = check_stage_stability(b, &w[0], &w[1], z, delta)?;
            if r.applies {
                stability.add(r.max_distance, r.pass);
            } else {
                stability_vacuous += 1;
            }
        }
    }
    let mut local = Vec::new();
    if let Some(s) = ex.stages.last() {
        for chunk in zs.chunks(p.cluster.max(1)).take(10) {
            local.push(check_local_diameter(b, s, chunk, delta, run.d)?);
        }
    }
    let local_fail = local.iter().filter(|r| r.cluster_ok && r.pass == Some(false)).count();
    let mut traces = Vec::new();
    let mut trace_fail = 0;
    let mut trace_open = 0;
    for &z in &zs {
        let t = trace_geodesic_through_horoball(b, &ex.stages, z, delta)?;
        match t.pass {
            Some(false) => trace_fail += 1,
            None => trace_open += 1,
            Some(true) => {}
        }
        traces.push(t);
    }
    status = status.max(projections.status()).max(stability.status());
    if trace_open > 0 {
        status = status.max(Status::Unknown);
    }
    if local_fail > 0 || trace_fail > 0 {
        status = Status::Violations;
    }
    Ok(Outcome {
        status,
        result: json!({
            "base": ex.base,
            "direction": ex.direction,
            "sequence_end": b.render(end),
            "stages": ex.stages,
            "attempts": ex.attempts,
            "nesting_ok": nesting_ok,
            "isometry_mismatches": isometry_mismatches,
            "targets": zs.len(),
            "projection_bound": diameter_bound,
            "projections": projections,
            "projections_inside_window": inside,
            "stability_bound": delta.times(10).plus_int(2),
            "stability": stability,
            "stability_not_applicable": stability_vacuous,
            "local_diameter": local,
            "trace_failures": trace_fail,
            "traces_outside_window": trace_open,
            "traces": traces,
        }),
    })
}

pub fn classify(run: &Run, n: NRange, homology: bool) -> Result<Outcome> {
    check_range(run, n)?;
    let r = classify_boundary(
        &run.ball,
        &ClassifyConfig { n_lo: n.lo, n_hi: n.hi, d: run.d, delta: run.delta.delta, homology },
    )?;
    let status = if r.audits.functoriality_failures > 0 || r.audits.projection_counterexamples > 0 {
        Status::Violations
    } else {
        Status::Pass
    };
    Ok(Outcome { status, result: to_value(&r) })
}

pub fn export(run: &Run, n: usize, dot: bool, max_triangles: u64, stage: Option<usize>) -> Result<String> {
    if let Some(i) = stage {
        let depth = run.ball.radius();
        let end = BoundaryRay::sample(&run.ball, depth, 1, run.args.seed)[0].end();
        let ex = extract_stable_stages(&run.ball, &ray_sequence(&run.ball, end), i, run.d)?;
        let s = ex.stages.get(i - 1).ok_or_else(|| anyhow!("only {} stages admitted", ex.stages.len()))?;
        return Ok(export_stage_json(s, run.d));
    }
    let c = build_sphere_complex(&run.ball, n, run.d)?;
    Ok(if dot { export_dot(&run.ball, &c) } else { export_json(&run.ball, &c, max_triangles) })
}
