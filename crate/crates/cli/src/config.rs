//! Run configuration: a TOML file with defaults for every field, `--set`
//! dotted-path overrides, and validation that names the offending key.

use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: String,
    /// Self-play worker threads; 0 means all available cores.
    pub workers: usize,
    pub env: EnvConfig,
    pub net: NetSection,
    pub search: SearchSection,
    pub train: TrainSection,
    pub eval: EvalSection,
    pub bench: BenchSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out_dir: "runs/out".into(),
            workers: 1,
            env: EnvConfig::default(),
            net: NetSection::default(),
            search: SearchSection::default(),
            train: TrainSection::default(),
            eval: EvalSection::default(),
            bench: BenchSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    /// `matching_pennies(H)`, `rps(H)`, `asym22(H)`, `grid_pursuit(k,H)`,
    /// `dubin`, or `sda`.
    pub name: String,
    /// Discount factor used by the environment, the search, and training.
    pub gamma: f64,
    pub dubin: DubinSection,
    pub sda: SdaSection,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            name: "asym22(1)".into(),
            gamma: 1.0,
            dubin: DubinSection::default(),
            sda: SdaSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DubinSection {
    pub v_attacker: f64,
    pub v_defender: f64,
    pub u_max: f64,
    pub dt: f64,
    pub goal_radius: f64,
    pub capture_radius: f64,
    pub horizon: usize,
    pub arena_scale: f64,
    pub attacker_spawn: (f64, f64),
    pub defender_spawn: (f64, f64),
}

impl Default for DubinSection {
    fn default() -> Self {
        let d = simmax::envs::dubin::DubinConfig::default();
        Self {
            v_attacker: d.v_attacker,
            v_defender: d.v_defender,
            u_max: d.u_max,
            dt: d.dt,
            goal_radius: d.goal_radius,
            capture_radius: d.capture_radius,
            horizon: d.horizon,
            arena_scale: d.arena_scale,
            attacker_spawn: d.attacker_spawn,
            defender_spawn: d.defender_spawn,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SdaSection {
    pub dv: f64,
    pub dt: f64,
    pub mu: f64,
    pub earth_radius: f64,
    pub sun_exclusion_half_angle: f64,
    pub horizon: usize,
    pub sun_rotation_period: f64,
    pub rk4_substeps: usize,
    pub observer_radius: f64,
    pub target_radius: f64,
    pub target_phase_range: (f64, f64),
    pub sun_angle: f64,
}

impl Default for SdaSection {
    fn default() -> Self {
        let s = simmax::envs::sda::SdaConfig::default();
        Self {
            dv: s.dv,
            dt: s.dt,
            mu: s.mu,
            earth_radius: s.earth_radius,
            sun_exclusion_half_angle: s.sun_exclusion_half_angle,
            horizon: s.horizon,
            sun_rotation_period: s.sun_rotation_period,
            rk4_substeps: s.rk4_substeps,
            observer_radius: s.observer_radius,
            target_radius: s.target_radius,
            target_phase_range: s.target_phase_range,
            sun_angle: s.sun_angle,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetSection {
    pub trunk_widths: Vec<usize>,
    pub head_hidden: Vec<usize>,
    pub value_bins: usize,
    /// Half-range of the value bins; 0 derives it from the environment's
    /// discounted reward bound.
    pub value_scale: f64,
    /// "f64" or "f32".
    pub precision: String,
}

impl Default for NetSection {
    fn default() -> Self {
        Self {
            trunk_widths: vec![64, 64],
            head_hidden: vec![64],
            value_bins: 51,
            value_scale: 0.0,
            precision: "f64".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSection {
    pub n_sim: usize,
    pub c_puct: f64,
    pub rm_iters: usize,
    pub root_rm_iters: usize,
    /// Search frontier depth; 0 uses the environment horizon.
    pub horizon: usize,
}

impl Default for SearchSection {
    fn default() -> Self {
        let s = simmax::mcts::SearchConfig::default();
        Self {
            n_sim: s.n_sim,
            c_puct: s.c_puct,
            rm_iters: s.rm_iters,
            root_rm_iters: s.root_rm_iters,
            horizon: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub n_iter: usize,
    pub n_ep: usize,
    pub grad_steps: usize,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub bootstrap_truncated: bool,
    /// "adam" or "sgd".
    pub optimizer: String,
    /// Per-iteration exploitability probe (tabular environments only).
    pub probe_exploitability: bool,
}

impl Default for TrainSection {
    fn default() -> Self {
        Self {
            n_iter: 50,
            n_ep: 16,
            grad_steps: 64,
            batch_size: 256,
            buffer_capacity: 50_000,
            learning_rate: 1e-3,
            weight_decay: 1e-4,
            bootstrap_truncated: true,
            optimizer: "adam".into(),
            probe_exploitability: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    /// "raw" or "mcts".
    pub mode: String,
    pub iters_list: Vec<usize>,
    pub seeds: usize,
    /// "exact", "sampled", or "auto".
    pub br: String,
    pub br_episodes: usize,
    pub br_search_sims: usize,
    pub node_budget: usize,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            mode: "mcts".into(),
            iters_list: vec![8, 32, 128, 512],
            seeds: 8,
            br: "auto".into(),
            br_episodes: 64,
            br_search_sims: 256,
            node_budget: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSection {
    /// Minimum wall time per benchmarked section (ms).
    pub duration_ms: u64,
}

impl Default for BenchSection {
    fn default() -> Self {
        Self { duration_ms: 500 }
    }
}

impl RunConfig {
    /// Loads the TOML file, applies `--set key=value` overrides, and
    /// deserializes with defaults for omitted fields.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))
            .map_err(|e| CliError::Validation(format!("{e:#}")))?;
        let mut table: toml::Table = text
            .parse()
            .map_err(|e| CliError::Validation(format!("config parse error: {e}")))?;
        for (key, value) in overrides.iter().map(|s| split_override(s)).collect::<Result<Vec<_>, _>>()? {
            apply_override(&mut table, &key, value)?;
        }
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e| CliError::Validation(format!("config error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |msg: String| Err(CliError::Validation(msg));
        if !(0.0..=1.0).contains(&self.env.gamma) {
            return fail(format!(
                "env.gamma must lie in [0, 1], got {}",
                self.env.gamma
            ));
        }
        if self.net.value_bins < 6 {
            return fail(format!(
                "net.value_bins must be at least 6, got {}",
                self.net.value_bins
            ));
        }
        if self.net.value_scale < 0.0 {
            return fail(format!(
                "net.value_scale must be nonnegative, got {}",
                self.net.value_scale
            ));
        }
        match self.net.precision.as_str() {
            "f64" | "f32" => {}
            other => return fail(format!("net.precision must be f64 or f32, got {other:?}")),
        }
        if self.search.n_sim == 0 {
            return fail("search.n_sim must be at least 1".into());
        }
        if self.search.c_puct < 0.0 {
            return fail(format!(
                "search.c_puct must be nonnegative, got {}",
                self.search.c_puct
            ));
        }
        if self.search.rm_iters == 0 || self.search.root_rm_iters == 0 {
            return fail("search.rm_iters and search.root_rm_iters must be at least 1".into());
        }
        if self.train.n_iter == 0
            || self.train.n_ep == 0
            || self.train.grad_steps == 0
            || self.train.batch_size == 0
            || self.train.buffer_capacity == 0
        {
            return fail("train counts (n_iter, n_ep, grad_steps, batch_size, buffer_capacity) must be at least 1".into());
        }
        if !(self.train.learning_rate > 0.0) {
            return fail(format!(
                "train.learning_rate must be positive, got {}",
                self.train.learning_rate
            ));
        }
        if self.train.weight_decay < 0.0 {
            return fail(format!(
                "train.weight_decay must be nonnegative, got {}",
                self.train.weight_decay
            ));
        }
        match self.train.optimizer.as_str() {
            "adam" | "sgd" => {}
            other => return fail(format!("train.optimizer must be adam or sgd, got {other:?}")),
        }
        match self.eval.mode.as_str() {
            "raw" | "mcts" => {}
            other => return fail(format!("eval.mode must be raw or mcts, got {other:?}")),
        }
        match self.eval.br.as_str() {
            "exact" | "sampled" | "auto" => {}
            other => {
                return fail(format!(
                    "eval.br must be exact, sampled or auto, got {other:?}"
                ))
            }
        }
        if self.eval.iters_list.is_empty() || self.eval.iters_list.iter().any(|n| *n == 0) {
            return fail("eval.iters_list must be nonempty positive simulation counts".into());
        }
        if self.eval.seeds == 0 {
            return fail("eval.seeds must be at least 1".into());
        }
        if self.bench.duration_ms == 0 {
            return fail("bench.duration_ms must be positive".into());
        }
        Ok(())
    }

    /// Serializes the fully resolved config (defaults applied) for the
    /// provenance echo.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

fn split_override(raw: &str) -> Result<(String, String), CliError> {
    match raw.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(CliError::Validation(format!(
            "--set expects key=value, got {raw:?}"
        ))),
    }
}

/// Sets a dotted-path key in the TOML tree, parsing the value as TOML when
/// possible and falling back to a string.
fn apply_override(table: &mut toml::Table, key: &str, value: String) -> Result<(), CliError> {
    let parsed: toml::Value = match format!("x = {value}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("x").expect("just inserted"),
        Err(_) => toml::Value::String(value),
    };
    let parts: Vec<&str> = key.split('.').collect();
    let mut current = table;
    for part in &parts[..parts.len() - 1] {
        current = current
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| {
                CliError::Validation(format!("--set path {key:?} crosses a non-table value"))
            })?;
    }
    current.insert(parts[parts.len() - 1].to_string(), parsed);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = RunConfig::default();
        let text = cfg.to_toml();
        let parsed: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(parsed.env.name, cfg.env.name);
        assert_eq!(parsed.train.n_iter, cfg.train.n_iter);
    }

    #[test]
    fn overrides_reach_nested_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "[env]\nname = \"rps(2)\"\n").unwrap();
        let cfg = RunConfig::load(
            &path,
            &["train.n_iter=7".into(), "env.gamma=0.5".into()],
        )
        .unwrap();
        assert_eq!(cfg.train.n_iter, 7);
        assert_eq!(cfg.env.gamma, 0.5);
        assert_eq!(cfg.env.name, "rps(2)");
    }

    #[test]
    fn bad_gamma_is_rejected_with_key_name() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "[env]\ngamma = 1.5\n").unwrap();
        let err = RunConfig::load(&path, &[]).unwrap_err();
        assert!(err.to_string().contains("gamma"));
    }
}
