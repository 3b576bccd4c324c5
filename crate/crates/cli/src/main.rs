mod commands;
mod config;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use commands::{HoroParams, ImapParams, Outcome};
use config::{GroupArgs, NRange, Run};
use rips_boundary::cache::write_atomic;
use rips_boundary::conditions::{DdagRadius, DiskBudgets};
use rips_boundary::report::REPORT_SCHEMA;
use serde_json::json;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "rips-boundary", version, about = "Rips complexes of spheres in hyperbolic groups")]
struct Cli {
    /// Run every computation on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RadiusMode {
    /// Forbidden ball of radius d(x, y) - c.
    Pair,
    /// Forbidden ball of radius n - c.
    Sphere,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Dot,
}

/// `auto` or an explicit threshold.
#[derive(Clone, Copy, Debug)]
struct Threshold(Option<u32>);

fn parse_m(s: &str) -> Result<Threshold, String> {
    if s == "auto" {
        Ok(Threshold(None))
    } else {
        s.parse().map(|v| Threshold(Some(v))).map_err(|e| format!("{s:?}: {e}"))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the ball and report sphere sizes.
    Ball {
        #[command(flatten)]
        g: GroupArgs,
    },
    /// Sizes, components and H_1 of K_n.
    Sphere {
        #[command(flatten)]
        g: GroupArgs,
        #[arg(long, default_value = "1..3")]
        n: NRange,
        #[arg(long)]
        no_homology: bool,
    },
    /// The truncation map p^n_m.
    Project {
        #[command(flatten)]
        g: GroupArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
    },
    /// Check that p^n_m is simplicial.
    AuditProjection {
        #[command(flatten)]
        g: GroupArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
    },
    /// Admissible sets and product bounds along sampled rays.
    Rays {
        #[command(flatten)]
        g: GroupArgs,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 500)]
        tuples: usize,
        #[arg(long, default_value_t = 1)]
        slack: usize,
    },
    /// Detours between close points of S_n avoiding a ball around e.
    Ddag {
        #[command(flatten)]
        g: GroupArgs,
        #[arg(long, default_value = "2..3")]
        n: NRange,
        /// Closeness threshold; `auto` is 8 delta + 3.
        #[arg(long = "M", default_value = "auto", value_parser = parse_m)]
        m: Threshold,
        /// Longest detour searched for.
        #[arg(long = "L", default_value_t = 2000)]
        l: u32,
        #[arg(long, value_enum, default_value = "pair")]
        radius_mode: RadiusMode,
        /// Sample this many pairs instead of checking all of them.
        #[arg(long)]
        pairs: Option<usize>,
    },
    /// Edge-path detours inside K_n between admissible sets of rays.
    DdagPrime {
        #[command(flatten)]
        g: GroupArgs,
        #[arg(long, default_value = "2..3")]
        n: NRange,
        #[arg(long = "M", default_value = "auto", value_parser = parse_m)]
        m: Threshold,
        #[arg(long = "L", default_value_t = 8)]
        l: u32,
        #[arg(long, default_value_t = 40)]
        rays: usize,
        #[arg(long, default_value_t = 1)]
        slack: usize,
    },
    /// Fill loops of K_n by subdivided disks.
    Scond {
        #[command(flatten)]
        g: GroupArgs,
        #[arg(long, default_value = "2..3")]
        n: NRange,
        /// Loops have length 3 * 2^M.
        #[arg(long = "M", default_value_t = 2)]
        m: u32,
        #[arg(long, default_value_t = 3)]
        depth: u32,
        #[arg(long, default_value_t = 5000)]
        area: usize,
        #[arg(long, default_value_t = 100)]
        loops: usize,
        /// Use H_1 generator cycles instead of random loops.
        #[arg(long)]
        generators: bool,
    },
    /// Build the sections i^n_{n+1}.
    Imap {
        #[command(flatten)]
        g: GroupArgs,
        #[arg(long, default_value = "1..2")]
        n: NRange,
        #[arg(long, default_value_t = 3)]
        l_edge: u32,
        #[arg(long, default_value_t = 3)]
        depth: u32,
        #[arg(long, default_value_t = 5000)]
        area: usize,
    },
    /// Gromov-product growth of composed sections.
    Growth {
        #[command(flatten)]
        g: GroupArgs,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value = "2..3")]
        n: NRange,
        #[arg(long, default_value_t = 3)]
        l_edge: u32,
        #[arg(long, default_value_t = 3)]
        depth: u32,
        #[arg(long, default_value_t = 5000)]
        area: usize,
        #[arg(long, default_value_t = 20)]
        rays: usize,
        /// Vertices and edges used per fit.
        #[arg(long = "fit-cap", default_value_t = 2000)]
        fit_cap: usize,
    },
    /// Horoball stages along a ray and their projections.
    Horoball {
        #[command(flatten)]
        g: GroupArgs,
        /// Word whose normal form gives the vertex sequence.
        #[arg(long)]
        end: Option<String>,
        #[arg(long, default_value_t = 3)]
        stages: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 2)]
        target_len: usize,
        #[arg(long, default_value_t = 5)]
        cluster: usize,
    },
    /// Classify the boundary from the audited spheres.
    Classify {
        #[command(flatten)]
        g: GroupArgs,
        #[arg(long, default_value = "1..3")]
        n: NRange,
        #[arg(long)]
        no_homology: bool,
    },
    /// Write K_n (or a horoball stage) as JSON or DOT.
    Export {
        #[command(flatten)]
        g: GroupArgs,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long, default_value_t = 1_000_000)]
        max_triangles: u64,
        /// Export horoball stage i instead.
        #[arg(long)]
        stage: Option<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ball { .. } => "ball",
            Command::Sphere { .. } => "sphere",
            Command::Project { .. } => "project",
            Command::AuditProjection { .. } => "audit-projection",
            Command::Rays { .. } => "rays",
            Command::Ddag { .. } => "ddag",
            Command::DdagPrime { .. } => "ddag-prime",
            Command::Scond { .. } => "scond",
            Command::Imap { .. } => "imap",
            Command::Growth { .. } => "growth",
            Command::Horoball { .. } => "horoball",
            Command::Classify { .. } => "classify",
            Command::Export { .. } => "export",
        }
    }

    fn group(&self) -> &GroupArgs {
        match self {
            Command::Ball { g }
            | Command::Sphere { g, .. }
            | Command::Project { g, .. }
            | Command::AuditProjection { g, .. }
            | Command::Rays { g, .. }
            | Command::Ddag { g, .. }
            | Command::DdagPrime { g, .. }
            | Command::Scond { g, .. }
            | Command::Imap { g, .. }
            | Command::Growth { g, .. }
            | Command::Horoball { g, .. }
            | Command::Classify { g, .. }
            | Command::Export { g, .. } => g,
        }
    }

    /// Ball radius used when `--radius` is absent.
    fn default_radius(&self) -> usize {
        match self {
            Command::Ball { .. } => 4,
            // one level of room keeps small-D neighbourhoods local
            Command::Sphere { n, .. } | Command::Classify { n, .. } => (n.hi + 1).max(4),
            Command::Project { n, .. } | Command::AuditProjection { n, .. } => (*n + 1).max(4),
            Command::Rays { depth, .. } => (*depth).max(4),
            Command::Ddag { n, .. } => n.hi + 2,
            Command::DdagPrime { n, slack, .. } => (n.hi + slack).max(4),
            Command::Scond { n, .. } => (n.hi + 1).max(4),
            Command::Imap { n, .. } => (n.hi + 1).max(4),
            Command::Growth { n, .. } => (n.hi + 1).max(4),
            Command::Horoball { stages, target_len, .. } => (stages + target_len + 2).max(6),
            Command::Export { n, .. } => (*n + 1).max(4),
        }
    }
}

fn run(cli: &Cli) -> Result<i32> {
    let g = cli.command.group();
    let cfg = Run::open(g, cli.command.default_radius())?;
    let outcome: Outcome = match &cli.command {
        Command::Ball { .. } => commands::ball(&cfg)?,
        Command::Sphere { n, no_homology, .. } => commands::sphere(&cfg, *n, !no_homology)?,
        Command::Project { n, m, .. } => commands::project(&cfg, *n, *m)?,
        Command::AuditProjection { n, m, .. } => commands::audit_projection(&cfg, *n, *m)?,
        Command::Rays { depth, count, tuples, slack, .. } => commands::rays(&cfg, *depth, *count, *tuples, *slack)?,
        Command::Ddag { n, m, l, radius_mode, pairs, .. } => {
            let mode = match radius_mode {
                RadiusMode::Pair => DdagRadius::PairDistance,
                RadiusMode::Sphere => DdagRadius::Sphere,
            };
            commands::ddag(&cfg, *n, m.0, *l, mode, *pairs)?
        }
        Command::DdagPrime { n, m, l, rays, slack, .. } => commands::ddag_prime(&cfg, *n, m.0, *l, *rays, *slack)?,
        Command::Scond { n, m, depth, area, loops, generators, .. } => {
            commands::scond(&cfg, *n, *m, *depth, *area, *loops, *generators)?
        }
        Command::Imap { n, l_edge, depth, area, .. } => {
            commands::imap(&cfg, *n, &ImapParams { l_edge: *l_edge, budgets: DiskBudgets { depth: *depth, area: *area } })?
        }
        Command::Growth { m, n, l_edge, depth, area, rays, fit_cap, .. } => commands::growth(
            &cfg,
            *m,
            *n,
            &ImapParams { l_edge: *l_edge, budgets: DiskBudgets { depth: *depth, area: *area } },
            *rays,
            *fit_cap,
        )?,
        Command::Horoball { end, stages, samples, target_len, cluster, .. } => commands::horoball(
            &cfg,
            &HoroParams {
                end: end.clone(),
                stages: *stages,
                samples: *samples,
                target_len: *target_len,
                cluster: *cluster,
            },
        )?,
        Command::Classify { n, no_homology, .. } => commands::classify(&cfg, *n, !no_homology)?,
        Command::Export { n, format, max_triangles, stage, .. } => {
            let text = commands::export(&cfg, *n, matches!(format, Format::Dot), *max_triangles, *stage)?;
            emit(g, &text)?;
            return Ok(0);
        }
    };
    let mut envelope = json!({
        "schema": REPORT_SCHEMA,
        "command": cli.command.name(),
        "config": cfg.echo(),
        "status": outcome.status,
        "result": outcome.result,
    });
    if !cfg.conforming {
        envelope["watermark"] = json!("non-conforming: D < 12 delta");
    }
    emit(g, &(serde_json::to_string_pretty(&envelope)? + "\n"))?;
    Ok(outcome.status.exit_code())
}

fn emit(g: &GroupArgs, text: &str) -> Result<()> {
    match &g.out {
        Some(p) => write_atomic(p, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Parses `argv`, runs the command and returns the process exit code.
fn dispatch<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // usage errors must not look like a finished run
            return if e.use_stderr() { 64 } else { 0 };
        }
    };
    if cli.sequential {
        rips_boundary::par::force_sequential(true);
    }
    match run(&cli) {
        Ok(code) => code as u8,
        Err(e) => {
            eprintln!("error: {e:#}");
            3
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(dispatch(std::env::args_os()))
}

#[cfg(test)]
mod tests;
