//! Configuration document and flag merging.
//!
//! One JSON document with four sections (`weights`, `pipeline`, `ap`,
//! `noise`). Absent keys take the documented defaults; unknown keys are
//! rejected with the offending path named. Command-line flags override
//! file values, which override defaults.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use lekb_core::ap::{ApParams, PreferenceMode};
use lekb_core::synth::NoiseConfig;
use lekb_core::{PipelineConfig, Role, RoleWeights, SimMode};

use crate::error::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PipelineSection {
    sim_mode: Option<String>,
    min_cluster_size: Option<usize>,
    seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ApSection {
    damping: Option<f64>,
    max_iter: Option<usize>,
    convergence_iter: Option<usize>,
    preference_mode: Option<String>,
    preference_value: Option<f64>,
    jitter_scale: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseSection {
    p_char: Option<f64>,
    p_drop: Option<f64>,
    p_variant: Option<f64>,
    p_wrong: Option<f64>,
}

/// Flag-level overrides shared by the subcommands.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub min_cluster_size: Option<usize>,
    pub damping: Option<f64>,
    pub preference: Option<String>,
    pub max_iter: Option<usize>,
    pub sim_mode: Option<String>,
    pub p_char: Option<f64>,
    pub p_drop: Option<f64>,
    pub p_variant: Option<f64>,
    pub p_wrong: Option<f64>,
}

/// Fully resolved configuration.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub pipeline: PipelineConfig,
    pub noise: NoiseConfig,
}

fn parse_sim_mode(raw: &str) -> Result<SimMode, CliError> {
    match raw {
        "raw_sum" => Ok(SimMode::RawSum),
        "renormalized" => Ok(SimMode::Renormalized),
        other => Err(CliError::validation(
            "invalid_config",
            format!("sim_mode must be \"raw_sum\" or \"renormalized\", got {other:?}"),
        )),
    }
}

/// Accepts `median` / `median_offdiag` or a fixed numeric preference.
fn parse_preference_flag(raw: &str) -> Result<PreferenceMode, CliError> {
    match raw {
        "median" | "median_offdiag" => Ok(PreferenceMode::MedianOffDiagonal),
        other => other.parse::<f64>().map(PreferenceMode::Fixed).map_err(|_| {
            CliError::validation(
                "invalid_flag",
                format!("--preference takes \"median\" or a number, got {other:?}"),
            )
        }),
    }
}

fn section<'a, T: Deserialize<'a>>(
    doc: &'a serde_json::Map<String, serde_json::Value>,
    name: &str,
) -> Result<Option<T>, CliError> {
    match doc.get(name) {
        None => Ok(None),
        Some(value) => T::deserialize(value.clone()).map(Some).map_err(|e| {
            CliError::validation("invalid_config", format!("in section \"{name}\": {e}"))
        }),
    }
}

const SECTIONS: [&str; 4] = ["weights", "pipeline", "ap", "noise"];

/// Loads and resolves the configuration: defaults, then the optional file,
/// then the flag overrides.
pub fn resolve(path: Option<&Path>, overrides: &Overrides) -> Result<Resolved, CliError> {
    let mut pipeline = PipelineConfig::default();
    let mut noise = NoiseConfig::default();

    if let Some(path) = path {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::validation("missing_file", format!("{}: {e}", path.display()))
        })?;
        let doc: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
            CliError::validation("invalid_config", format!("{}: {e}", path.display()))
        })?;
        let doc = doc.as_object().ok_or_else(|| {
            CliError::validation(
                "invalid_config",
                format!("{}: top level must be a JSON object", path.display()),
            )
        })?;
        for key in doc.keys() {
            if !SECTIONS.contains(&key.as_str()) {
                return Err(CliError::validation(
                    "unknown_config_key",
                    format!("unknown config section \"{key}\""),
                ));
            }
        }

        if let Some(weights) = section::<BTreeMap<String, f64>>(doc, "weights")? {
            let mut map = BTreeMap::new();
            for (name, weight) in &weights {
                let role = Role::parse(name).ok_or_else(|| {
                    CliError::validation(
                        "unknown_config_key",
                        format!("weights.{name}: unknown role"),
                    )
                })?;
                map.insert(role, *weight);
            }
            pipeline.weights = RoleWeights::from_map(&map).map_err(|e| {
                CliError::validation("invalid_config", format!("in section \"weights\": {e}"))
            })?;
        }
        if let Some(s) = section::<PipelineSection>(doc, "pipeline")? {
            if let Some(mode) = &s.sim_mode {
                pipeline.sim_mode = parse_sim_mode(mode)?;
            }
            if let Some(v) = s.min_cluster_size {
                pipeline.min_cluster_size = v;
            }
            if let Some(v) = s.seed {
                pipeline.seed = v;
            }
        }
        if let Some(s) = section::<ApSection>(doc, "ap")? {
            apply_ap_section(&mut pipeline.ap, &s)?;
        }
        if let Some(s) = section::<NoiseSection>(doc, "noise")? {
            if let Some(v) = s.p_char {
                noise.p_char = v;
            }
            if let Some(v) = s.p_drop {
                noise.p_drop = v;
            }
            if let Some(v) = s.p_variant {
                noise.p_variant = v;
            }
            if let Some(v) = s.p_wrong {
                noise.p_wrong = v;
            }
        }
    }

    if let Some(v) = overrides.seed {
        pipeline.seed = v;
    }
    if let Some(v) = overrides.min_cluster_size {
        pipeline.min_cluster_size = v;
    }
    if let Some(v) = overrides.damping {
        pipeline.ap.damping = v;
    }
    if let Some(raw) = &overrides.preference {
        pipeline.ap.preference = parse_preference_flag(raw)?;
    }
    if let Some(v) = overrides.max_iter {
        pipeline.ap.max_iter = v;
        pipeline.ap.convergence_iter = pipeline.ap.convergence_iter.min(v);
    }
    if let Some(raw) = &overrides.sim_mode {
        pipeline.sim_mode = parse_sim_mode(raw)?;
    }
    if let Some(v) = overrides.p_char {
        noise.p_char = v;
    }
    if let Some(v) = overrides.p_drop {
        noise.p_drop = v;
    }
    if let Some(v) = overrides.p_variant {
        noise.p_variant = v;
    }
    if let Some(v) = overrides.p_wrong {
        noise.p_wrong = v;
    }

    pipeline
        .validate()
        .map_err(|e| CliError::validation("invalid_config", e.to_string()))?;
    noise
        .validate()
        .map_err(|e| CliError::validation("invalid_config", e.to_string()))?;
    Ok(Resolved { pipeline, noise })
}

fn apply_ap_section(ap: &mut ApParams, s: &ApSection) -> Result<(), CliError> {
    if let Some(v) = s.damping {
        ap.damping = v;
    }
    if let Some(v) = s.max_iter {
        ap.max_iter = v;
    }
    if let Some(v) = s.convergence_iter {
        ap.convergence_iter = v;
    }
    if let Some(v) = s.jitter_scale {
        ap.jitter_scale = v;
    }
    match s.preference_mode.as_deref() {
        None => {
            if let Some(v) = s.preference_value {
                ap.preference = PreferenceMode::Fixed(v);
            }
        }
        Some("median_offdiag") => ap.preference = PreferenceMode::MedianOffDiagonal,
        Some("fixed") => {
            let value = s.preference_value.ok_or_else(|| {
                CliError::validation(
                    "invalid_config",
                    "ap.preference_mode \"fixed\" requires ap.preference_value".to_string(),
                )
            })?;
            ap.preference = PreferenceMode::Fixed(value);
        }
        Some(other) => {
            return Err(CliError::validation(
                "invalid_config",
                format!("ap.preference_mode must be \"median_offdiag\" or \"fixed\", got {other:?}"),
            ));
        }
    }
    Ok(())
}

/// The resolved configuration echoed into every artifact, in the same shape
/// as the configuration file.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    weights: BTreeMap<String, f64>,
    pipeline: PipelineEcho,
    ap: ApEcho,
    noise: NoiseEcho,
}

#[derive(Debug, Clone, Serialize)]
struct PipelineEcho {
    sim_mode: &'static str,
    min_cluster_size: usize,
    seed: u64,
}

#[derive(Debug, Clone, Serialize)]
struct ApEcho {
    damping: f64,
    max_iter: usize,
    convergence_iter: usize,
    preference_mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    preference_value: Option<f64>,
    jitter_scale: f64,
}

#[derive(Debug, Clone, Serialize)]
struct NoiseEcho {
    p_char: f64,
    p_drop: f64,
    p_variant: f64,
    p_wrong: f64,
}

impl ConfigEcho {
    pub fn of(resolved: &Resolved) -> Self {
        let p = &resolved.pipeline;
        let (preference_mode, preference_value) = match p.ap.preference {
            PreferenceMode::MedianOffDiagonal => ("median_offdiag", None),
            PreferenceMode::Fixed(v) => ("fixed", Some(v)),
        };
        ConfigEcho {
            weights: Role::ALL
                .iter()
                .map(|&r| (String::from(r.name()), p.weights.get(r)))
                .collect(),
            pipeline: PipelineEcho {
                sim_mode: match p.sim_mode {
                    SimMode::RawSum => "raw_sum",
                    SimMode::Renormalized => "renormalized",
                },
                min_cluster_size: p.min_cluster_size,
                seed: p.seed,
            },
            ap: ApEcho {
                damping: p.ap.damping,
                max_iter: p.ap.max_iter,
                convergence_iter: p.ap.convergence_iter,
                preference_mode,
                preference_value,
                jitter_scale: p.ap.jitter_scale,
            },
            noise: NoiseEcho {
                p_char: resolved.noise.p_char,
                p_drop: resolved.noise.p_drop,
                p_variant: resolved.noise.p_variant,
                p_wrong: resolved.noise.p_wrong,
            },
        }
    }
}
