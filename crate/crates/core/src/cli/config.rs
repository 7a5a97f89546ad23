//! Run configuration: defaults, overridden by a flat `key = value` file,
//! overridden by command-line flags.

use std::fmt::Write as _;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::nmr::SpinSystem;

#[derive(Copy, Clone, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Json => "json",
            Self::Csv => "csv",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub spin_system: SpinSystem,
    pub output_dir: PathBuf,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { seed: 0, spin_system: SpinSystem::default(), output_dir: PathBuf::from("."), format: Format::Json }
    }
}

/// Values that may come from either the file or the flags.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub format: Option<Format>,
    pub nu1: Option<f64>,
    pub nu2: Option<f64>,
    pub j12: Option<f64>,
    pub gamma_c: Option<f64>,
    pub gamma_h: Option<f64>,
}

impl Overrides {
    /// Parses lines of `key = value`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut o = Self::default();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .map(|(a, b)| (a.trim(), b.trim()))
                .ok_or_else(|| Error::Parse { line, message: format!("expected 'key = value', found '{body}'") })?;
            let num = |v: &str| -> Result<f64> {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::Parse { line, message: format!("invalid number '{v}' for {key}") })
            };
            match key {
                "seed" => {
                    o.seed = Some(
                        value.parse().map_err(|_| Error::Parse { line, message: format!("invalid seed '{value}'") })?,
                    )
                }
                "out" | "output_dir" => o.output_dir = Some(PathBuf::from(value)),
                "format" => {
                    o.format = Some(match value {
                        "json" => Format::Json,
                        "csv" => Format::Csv,
                        _ => return Err(Error::Parse { line, message: format!("unknown format '{value}'") }),
                    })
                }
                "nu1" => o.nu1 = Some(num(value)?),
                "nu2" => o.nu2 = Some(num(value)?),
                "j12" => o.j12 = Some(num(value)?),
                "gamma_c" => o.gamma_c = Some(num(value)?),
                "gamma_h" => o.gamma_h = Some(num(value)?),
                other => return Err(Error::Parse { line, message: format!("unknown key '{other}'") }),
            }
        }
        Ok(o)
    }

    /// Fills unset fields from `lower`.
    pub fn or(self, lower: Self) -> Self {
        Self {
            seed: self.seed.or(lower.seed),
            output_dir: self.output_dir.or(lower.output_dir),
            format: self.format.or(lower.format),
            nu1: self.nu1.or(lower.nu1),
            nu2: self.nu2.or(lower.nu2),
            j12: self.j12.or(lower.j12),
            gamma_c: self.gamma_c.or(lower.gamma_c),
            gamma_h: self.gamma_h.or(lower.gamma_h),
        }
    }

    pub fn resolve(self) -> Result<RunConfig> {
        let d = RunConfig::default();
        let s = d.spin_system;
        let cfg = RunConfig {
            seed: self.seed.unwrap_or(d.seed),
            spin_system: SpinSystem {
                nu1: self.nu1.unwrap_or(s.nu1),
                nu2: self.nu2.unwrap_or(s.nu2),
                j12: self.j12.unwrap_or(s.j12),
                gamma_c: self.gamma_c.unwrap_or(s.gamma_c),
                gamma_h: self.gamma_h.unwrap_or(s.gamma_h),
            },
            output_dir: self.output_dir.unwrap_or(d.output_dir),
            format: self.format.unwrap_or(d.format),
        };
        cfg.spin_system.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    /// Short SHA-256 digest of everything that can change an output file,
    /// including the command's own arguments.
    pub fn hash(&self, command: &str) -> String {
        let s = &self.spin_system;
        let canonical = format!(
            "seed={}\nnu1={:?}\nnu2={:?}\nj12={:?}\ngamma_c={:?}\ngamma_h={:?}\nformat={:?}\ncommand={command}\n",
            self.seed, s.nu1, s.nu2, s.j12, s.gamma_c, s.gamma_h, self.format
        );
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().take(8).fold(String::new(), |mut out, b| {
            let _ = write!(out, "{b:02x}");
            out
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_files() {
        let o = Overrides::parse("# run\nseed = 9\nj12=200 # Hz\n\nformat = csv\nout = results\n").unwrap();
        let cfg = o.resolve().unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.spin_system.j12, 200.0);
        assert_eq!(cfg.format, Format::Csv);
        assert_eq!(cfg.output_dir, PathBuf::from("results"));
    }

    #[test]
    fn flags_win_over_file() {
        let file = Overrides::parse("seed = 1\nnu1 = 50").unwrap();
        let flags = Overrides { seed: Some(2), ..Default::default() };
        let cfg = flags.or(file).resolve().unwrap();
        assert_eq!((cfg.seed, cfg.spin_system.nu1), (2, 50.0));
    }

    #[test]
    fn rejects_bad_lines() {
        for (text, want) in [("seed 3", 1), ("\nfoo = 1", 2), ("j12 = abc", 1), ("seed = -1", 1), ("format = xml", 1)] {
            match Overrides::parse(text) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        assert!(Overrides::parse("j12 = 0").unwrap().resolve().is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.hash("chc"), cfg.hash("chc"));
        assert_eq!(cfg.hash("chc").len(), 16);
        assert_ne!(cfg.hash("chc"), cfg.hash("tomo"));
        let other = RunConfig { seed: 1, ..RunConfig::default() };
        assert_ne!(cfg.hash("chc"), other.hash("chc"));
    }
}
