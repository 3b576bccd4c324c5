use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use rips_boundary::cache::{ball_hash, hex_digest, load_ball, save_ball};
use rips_boundary::delta::{estimate_delta, Coverage, DeltaMode};
use rips_boundary::presets::preset;
use rips_boundary::{BallOptions, CayleyBall, GroupPresentation, HalfInt};
use serde::Serialize;
use std::path::{Path, PathBuf};

/// Inclusive range written `4..6` or `5`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct NRange {
    pub lo: usize,
    pub hi: usize,
}

impl std::str::FromStr for NRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
            None => {
                let v = parse(s)?;
                (v, v)
            }
        };
        if lo > hi {
            return Err(format!("empty range {s}"));
        }
        Ok(NRange { lo, hi })
    }
}

fn parse_half(s: &str) -> Result<HalfInt, String> {
    HalfInt::parse(s).ok_or_else(|| format!("{s:?} is not a multiple of 1/2"))
}

#[derive(Args, Clone, Debug)]
pub struct GroupArgs {
    /// Built-in presentation: z, f2, f3, surface2, surface3, smallcancel.
    #[arg(long, conflicts_with = "presentation")]
    pub preset: Option<String>,
    /// Presentation file.
    #[arg(long)]
    pub presentation: Option<PathBuf>,
    /// Ball radius; each command picks a default from its n-range.
    #[arg(long)]
    pub radius: Option<usize>,
    /// Element cap for the ball.
    #[arg(long, default_value_t = 2_000_000)]
    pub cap: usize,
    /// Use this delta instead of estimating it.
    #[arg(long, value_parser = parse_half)]
    pub delta: Option<HalfInt>,
    /// Largest radius for the exhaustive delta estimate.
    #[arg(long, default_value_t = 4)]
    pub delta_radius: usize,
    /// Rips parameter; defaults to 12 delta + 2.
    #[arg(long = "D")]
    pub d: Option<u32>,
    /// Use D = 10^6 delta + 10^6.
    #[arg(long = "paper-D", conflicts_with = "d")]
    pub paper_d: bool,
    /// Accept D < 12 delta; reports are marked non-conforming.
    #[arg(long)]
    pub force_d: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Directory for ball caches.
    #[arg(long, env = "RIPS_BOUNDARY_CACHE")]
    pub cache_dir: Option<PathBuf>,
    /// Report path; standard output when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaInfo {
    pub delta: HalfInt,
    /// `user` or the estimate's coverage.
    pub source: String,
    pub delta_raw: Option<HalfInt>,
}

/// Resolved inputs shared by every command.
pub struct Run {
    pub args: GroupArgs,
    pub presentation: GroupPresentation,
    pub label: String,
    pub ball: CayleyBall,
    pub ball_hash: String,
    pub delta: DeltaInfo,
    pub d: u32,
    pub conforming: bool,
}

#[derive(Serialize)]
pub struct ConfigEcho<'a> {
    pub group: &'a str,
    pub presentation: String,
    pub radius: usize,
    pub ball_hash: &'a str,
    pub delta: &'a DeltaInfo,
    #[serde(rename = "D")]
    pub d: u32,
    pub conforming: bool,
    pub seed: u64,
}

fn cache_path(dir: &Path, text: &str, radius: usize) -> PathBuf {
    let key = hex_digest(format!("{text}\nradius {radius}").as_bytes());
    dir.join(format!("ball-{}-r{radius}.bin", &key[..16]))
}

impl Run {
    pub fn open(args: &GroupArgs, default_radius: usize) -> Result<Run> {
        let (text, label, base) = match (&args.preset, &args.presentation) {
            (Some(name), _) => {
                let t = preset(name).ok_or_else(|| anyhow!("unknown preset {name:?}"))?;
                (t.to_string(), name.clone(), None)
            }
            (None, Some(path)) => {
                let t = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                (t, path.display().to_string(), path.parent().map(Path::to_path_buf))
            }
            (None, None) => bail!("give --preset or --presentation"),
        };
        let presentation = GroupPresentation::parse_with_base(&text, base.as_deref())?;
        let radius = args.radius.unwrap_or(default_radius);
        let canonical = presentation.canonical_text();
        let ball = match &args.cache_dir {
            Some(dir) => {
                let path = cache_path(dir, &canonical, radius);
                match load_ball(&path, base.as_deref()) {
                    Ok(b) if b.radius() == radius => b,
                    _ => {
                        let b = CayleyBall::build(&presentation, BallOptions { radius, element_cap: args.cap })?;
                        save_ball(&b, &path)?;
                        b
                    }
                }
            }
            None => CayleyBall::build(&presentation, BallOptions { radius, element_cap: args.cap })?,
        };
        let delta = match args.delta {
            Some(d) => DeltaInfo { delta: d, source: "user".into(), delta_raw: None },
            None => {
                let mut r = args.delta_radius.min(ball.radius()).max(1);
                while r > 1 && ball.offsets()[r + 1] > 8192 {
                    r -= 1;
                }
                let est = estimate_delta(&ball, DeltaMode::Exhaustive { radius: r })?;
                let source = match est.coverage {
                    Coverage::Exhaustive { radius, triangles } => format!("exhaustive(radius={radius}, triangles={triangles})"),
                    Coverage::Sampled { radius, count, seed } => format!("sampled(radius={radius}, count={count}, seed={seed})"),
                };
                DeltaInfo { delta: est.delta_ideal, source, delta_raw: Some(est.delta_raw) }
            }
        };
        let twelve = delta.delta.times(12);
        let d = if args.paper_d {
            delta.delta.times(1_000_000).plus_int(1_000_000).ceil() as u32
        } else {
            args.d.unwrap_or(twelve.plus_int(2).ceil() as u32)
        };
        let conforming = HalfInt::from_int(d as i64) >= twelve;
        if !conforming && !args.force_d {
            bail!("D = {d} is below 12 delta = {twelve}; pass --force-d to run anyway");
        }
        Ok(Run {
            args: args.clone(),
            label,
            ball_hash: ball_hash(&ball),
            presentation,
            ball,
            delta,
            d,
            conforming,
        })
    }

    pub fn echo(&self) -> ConfigEcho<'_> {
        ConfigEcho {
            group: &self.label,
            presentation: self.presentation.canonical_text(),
            radius: self.ball.radius(),
            ball_hash: &self.ball_hash,
            delta: &self.delta,
            d: self.d,
            conforming: self.conforming,
            seed: self.args.seed,
        }
    }

    pub fn element(&self, word: &str) -> Result<u32> {
        let w = self.presentation.parse_word(word)?;
        self.ball.locate(w.letters())?.ok_or_else(|| anyhow!("{word} lies outside the ball"))
    }
}
