//! Subcommand pipelines. Each writes its artifacts into the output directory
//! and returns a [`Report`] carrying the summary text and pass/fail checks.

mod converse;
mod near_codeword;
mod pack;
mod scales;
mod simulate;
mod sweep;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use dilab_core::io::codebook_from_json;
use dilab_core::{ChannelModel, Codebook, FadingSpec, Result as CoreResult};
use serde::Serialize;

use crate::config::ChannelConfig;
use crate::error::{CliError, Context as _, Result};

pub use converse::converse_check;
pub use near_codeword::near_codeword;
pub use pack::pack;
pub use scales::scales;
pub use simulate::simulate;
pub use sweep::sweep;

/// Resolved run-wide settings.
#[derive(Debug, Clone)]
pub struct Context {
    pub seed: u64,
    pub trials: u64,
    pub out: OutDir,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Summary text plus the checks a run performed.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: &'static str,
    pub echo: String,
    pub lines: Vec<String>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(command: &'static str, echo: &impl Serialize) -> Self {
        Self {
            command,
            echo: toml::to_string(echo).unwrap_or_else(|e| format!("# unserializable config: {e}\n")),
            lines: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn line(&mut self, text: impl Into<String>) {
        self.lines.push(text.into());
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dilab {}", self.command);
        s.push_str("\n[config]\n");
        s.push_str(&self.echo);
        s.push_str("\n[results]\n");
        for l in &self.lines {
            let _ = writeln!(s, "{l}");
        }
        s.push_str("\n[checks]\n");
        for c in &self.checks {
            let _ = writeln!(s, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        let _ = writeln!(s, "\nstatus: {}", if self.passed() { "pass" } else { "fail" });
        s
    }
}

/// Output directory with error-mapped writers.
#[derive(Debug, Clone)]
pub struct OutDir(PathBuf);

impl OutDir {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self(path.into())
    }

    pub fn path(&self) -> &Path {
        &self.0
    }

    pub fn join(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    pub fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
        let path = self.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(CliError::io("creating", parent))?;
        }
        std::fs::write(&path, contents).map_err(CliError::io("writing", &path))?;
        Ok(path)
    }

    /// Renders a CSV table in memory with one of the core writers, then writes it.
    pub fn csv(&self, name: &str, render: impl FnOnce(&mut Vec<u8>) -> CoreResult<()>) -> Result<PathBuf> {
        let mut buf = Vec::new();
        render(&mut buf).map_err(|e| CliError::Io {
            action: "formatting",
            path: self.join(name),
            source: std::io::Error::other(e.to_string()),
        })?;
        self.write(name, buf)
    }
}

pub(crate) fn load_codebook(path: &Path) -> Result<Codebook> {
    let text = std::fs::read_to_string(path).map_err(CliError::io("reading", path))?;
    codebook_from_json(&text).map_err(|e| CliError::Config {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Fading spec and channel model for a codebook under the configured channel.
pub(crate) fn channel_model(section: &str, ch: &ChannelConfig, codebook_power: f64) -> Result<ChannelModel> {
    let spec = FadingSpec::build(ch.fading.clone(), ch.zero_in_closure).param(&format!("{section}.fading"))?;
    ChannelModel::new(
        ch.flavor,
        ch.noise_variance,
        spec,
        ch.normalized,
        ch.power.unwrap_or(codebook_power),
    )
    .param(section)
}

/// Configured decoder slack, or `gamma^2 eps_n / 3` when the support is bounded away from 0.
pub(crate) fn decoder_delta(section: &str, ch: &ChannelConfig, model: &ChannelModel, epsilon: f64) -> Result<f64> {
    match ch.delta {
        Some(d) if d >= 0.0 && d.is_finite() => Ok(d),
        Some(d) => Err(CliError::Precondition {
            param: format!("{section}.delta"),
            source: dilab_core::Error::InvalidParameter {
                name: "delta",
                reason: format!("must be finite and >= 0, got {d}"),
            },
        }),
        None if model.fading.gamma() > 0.0 => {
            dilab_core::delta_n(model.fading.gamma(), epsilon).param(&format!("{section}.delta"))
        }
        None => Err(CliError::Missing(format!(
            "{section}.delta (the gain support reaches 0, so the default slack is undefined)"
        ))),
    }
}

/// Config echo: run-wide values plus the command's resolved table.
pub(crate) fn echo(ctx: &Context, uses_trials: bool, table: &str, section: &impl Serialize) -> toml::Table {
    let mut t = toml::Table::new();
    let seed = i64::try_from(ctx.seed).map_or_else(|_| toml::Value::String(ctx.seed.to_string()), toml::Value::Integer);
    t.insert("seed".into(), seed);
    if uses_trials {
        t.insert("trials".into(), toml::Value::Integer(ctx.trials as i64));
    }
    match toml::Value::try_from(section) {
        Ok(v) => {
            t.insert(table.into(), v);
        }
        Err(e) => {
            t.insert(table.into(), toml::Value::String(format!("unserializable: {e}")));
        }
    }
    t
}

/// `value`, or `value (vacuous)` when a probability bound exceeds 1.
pub(crate) fn bound_text(bound: Option<f64>) -> String {
    match bound {
        Some(b) if b > 1.0 => format!("{b:.6e} (vacuous)"),
        Some(b) => format!("{b:.6e}"),
        None => "n/a".into(),
    }
}

/// `value`, or `value (vacuous)` when a rate lower bound is not positive.
pub(crate) fn rate_bound_text(lower: f64) -> String {
    if lower <= 0.0 {
        format!("{lower:.6} (vacuous)")
    } else {
        format!("{lower:.6}")
    }
}
