use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};
use wlab_core::complex::Caps;
use wlab_core::verify::Suite;
use wlab_core::{load_group_spec, write_group_spec, FreeProduct, NormKind};

use crate::error::{CliError, Result};

/// Pointed-tree complexes of free products of finite groups.
#[derive(Debug, Parser)]
#[command(name = "wlab", version)]
pub struct Cli {
    /// Group-spec file.
    #[arg(short = 'g', long, env = "WLAB_GROUP", global = true)]
    pub group: Option<PathBuf>,

    /// `𝒲₀` radius; defaults depend on the command.
    #[arg(short = 'R', long, env = "WLAB_RADIUS", global = true)]
    pub radius: Option<usize>,

    #[arg(long, value_enum, env = "WLAB_NORM", default_value = "zg", global = true)]
    pub norm: Norm,

    #[arg(long, env = "WLAB_CAP_BALL", global = true)]
    pub cap_ball: Option<usize>,

    #[arg(long, env = "WLAB_CAP_ORDER", global = true)]
    pub cap_order: Option<usize>,

    /// Largest element-order prefix used by `ℤ^G` comparisons.
    #[arg(long, env = "WLAB_CUTOFF", global = true)]
    pub cutoff: Option<usize>,

    #[arg(long, env = "WLAB_SEED", default_value_t = 0, global = true)]
    pub seed: u64,

    /// Output directory; a manifest is written alongside the artifacts.
    #[arg(long, env = "WLAB_OUT", global = true)]
    pub out: Option<PathBuf>,

    /// Suites to run (repeatable or comma separated); all when absent.
    #[arg(long, env = "WLAB_SUITE", value_delimiter = ',', global = true)]
    pub suite: Vec<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    W0,
    Zg,
}

impl From<Norm> for NormKind {
    fn from(n: Norm) -> Self {
        match n {
            Norm::W0 => NormKind::W0,
            Norm::Zg => NormKind::Zg,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Nuclear vertices of a `𝒲₀` ball as JSON lines, plus a DOT skeleton.
    Ball,
    /// Run verification suites.
    Verify,
    /// Peak-reduce a basis to `ℋ₀`.
    Reduce {
        /// Basis as a JSON array of conjugators, each a list of [factor, element].
        basis: Option<String>,
        /// Start from a seeded random basis of at most this many moves instead.
        #[arg(long, conflicts_with = "basis")]
        random: Option<usize>,
    },
    /// Fixed subcomplexes of cyclic subgroups inside a ball.
    Fixed {
        /// Number of cyclic subgroups.
        #[arg(long, default_value_t = 3)]
        subgroups: usize,
    },
    /// Enumerate pointed trees.
    Trees {
        #[arg(short = 'n', long)]
        n: usize,
        /// Also write one DOT file per tree under --out.
        #[arg(long)]
        dot: bool,
    },
}

/// Everything that determines a run's output, hashed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub group: Option<String>,
    pub radius: Option<usize>,
    pub norm: Norm,
    pub cap_ball: usize,
    pub cap_order: usize,
    pub cutoff: usize,
    pub seed: u64,
    pub suites: Vec<String>,
}

impl RunConfig {
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

pub struct Loaded {
    pub config: RunConfig,
    pub fp: Option<FreeProduct>,
    pub caps: Caps,
    pub suites: Vec<Suite>,
}

fn positive(name: &str, v: Option<usize>, default: usize) -> Result<usize> {
    match v {
        Some(0) => Err(CliError::Usage(format!("--{name} must be positive"))),
        Some(x) => Ok(x),
        None => Ok(default),
    }
}

impl Cli {
    pub fn load(&self) -> Result<Loaded> {
        let defaults = Caps::default();
        let caps = Caps {
            ball: positive("cap-ball", self.cap_ball, defaults.ball)?,
            order: positive("cap-order", self.cap_order, defaults.order)?,
            cutoff: positive("cutoff", self.cutoff, defaults.cutoff)?,
            ..defaults
        };
        let fp = match &self.group {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                Some(load_group_spec(&text)?)
            }
            None => None,
        };
        let mut suites = Vec::new();
        for s in &self.suite {
            let s: Suite = s.trim().parse()?;
            if !suites.contains(&s) {
                suites.push(s);
            }
        }
        let config = RunConfig {
            group: fp.as_ref().map(write_group_spec),
            radius: self.radius,
            norm: self.norm,
            cap_ball: caps.ball,
            cap_order: caps.order,
            cutoff: caps.cutoff,
            seed: self.seed,
            suites: suites.iter().map(|s| s.name().to_string()).collect(),
        };
        Ok(Loaded {
            config,
            fp,
            caps,
            suites,
        })
    }
}

impl Loaded {
    pub fn require_group(&self) -> Result<&FreeProduct> {
        self.fp
            .as_ref()
            .ok_or_else(|| CliError::Usage("a group spec is required (-g or WLAB_GROUP)".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("wlab").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn hash_tracks_config() {
        let a = parse(&["--seed", "1", "trees", "-n", "2"]).load().unwrap();
        let b = parse(&["--seed", "1", "trees", "-n", "3"]).load().unwrap();
        let c = parse(&["--seed", "2", "trees", "-n", "2"]).load().unwrap();
        assert_eq!(a.config.hash(), b.config.hash());
        assert_ne!(a.config.hash(), c.config.hash());
        assert_eq!(a.config.hash().len(), 64);
    }

    #[test]
    fn caps_must_be_positive() {
        assert!(parse(&["--cap-ball", "0", "ball"]).load().is_err());
        assert!(parse(&["--cutoff", "5", "ball"]).load().is_ok());
    }

    #[test]
    fn suites_parse_and_dedupe() {
        let l = parse(&["--suite", "homology,trees", "--suite", "homology", "verify"]).load().unwrap();
        assert_eq!(l.suites, vec![Suite::Homology, Suite::Trees]);
        assert!(parse(&["--suite", "x", "verify"]).load().is_err());
    }

    #[test]
    fn group_required_for_ball() {
        let l = parse(&["ball"]).load().unwrap();
        assert!(l.require_group().is_err());
    }
}
