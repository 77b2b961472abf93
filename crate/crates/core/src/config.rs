//! Flat `key = value` configuration.

use crate::diag::{content_lines, Diagnostics};
use crate::symbol::Symbol;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    /// Tokens that always stand as a segment of their own.
    pub markers: Vec<String>,
    pub default_tag: Symbol,
    pub runtime: RuntimeConfig,
    pub trainer: TrainerConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuntimeConfig {
    pub max_deletions: usize,
    pub time_budget_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainerConfig {
    pub cap_base: usize,
    pub cap_per_generalizable: usize,
    /// Training set size used when the command line gives none.
    pub top: usize,
}

impl Default for RuntimeConfig {
    fn default() -> Self {
        RuntimeConfig {
            max_deletions: 2,
            time_budget_ms: 50,
        }
    }
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            cap_base: 2,
            cap_per_generalizable: 2,
            top: 18_000,
        }
    }
}

impl Default for Config {
    fn default() -> Self {
        Config {
            markers: Vec::new(),
            default_tag: Symbol::from("noun"),
            runtime: RuntimeConfig::default(),
            trainer: TrainerConfig::default(),
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, Diagnostics> {
        let mut cfg = Config::default();
        let mut diags = Diagnostics::default();
        for (line, content) in content_lines(text) {
            let Some((key, value)) = content.split_once('=') else {
                diags.push(line, "expected `key = value`");
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            let mut number = |slot: &mut usize| match value.parse() {
                Ok(n) => *slot = n,
                Err(_) => diags.push(line, format!("`{key}` needs a non-negative integer, got `{value}`")),
            };
            match key {
                "segmenter.markers" => {
                    cfg.markers = value
                        .split([',', ' '])
                        .filter(|m| !m.is_empty())
                        .map(str::to_lowercase)
                        .collect();
                }
                "tagger.default_tag" => cfg.default_tag = Symbol::from(value),
                "runtime.max_deletions" => number(&mut cfg.runtime.max_deletions),
                "runtime.time_budget_ms" => {
                    let mut ms = cfg.runtime.time_budget_ms as usize;
                    number(&mut ms);
                    cfg.runtime.time_budget_ms = ms as u64;
                }
                "trainer.cap_base" => number(&mut cfg.trainer.cap_base),
                "trainer.cap_per_generalizable" => number(&mut cfg.trainer.cap_per_generalizable),
                "trainer.top" => number(&mut cfg.trainer.top),
                other => diags.push(line, format!("unknown key `{other}`")),
            }
        }
        diags.into_result(cfg)
    }
}
