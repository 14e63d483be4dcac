//! Planner configuration: a JSON file whose keys can be overridden by flags.

use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use tripweaver_core::ingest::{BuildParams, TransitParams};
use tripweaver_core::{PlanParams, ScheduleParams, ScoreParams, SearchParams};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub alpha: f64,
    pub max_wait: f64,
    pub candidate_limit: usize,
    pub local_search_rounds: usize,
    pub seed: u64,
    pub utc_offset_min: i32,
    pub trim_low: f64,
    pub trim_high: f64,
    pub stay_dist_m: f64,
    pub stay_time_min: f64,
    pub snap_radius_m: f64,
    pub top_k: usize,
    pub smoothing: f64,
    pub observation_days: i64,
    pub default_speed_kmh: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        let plan = PlanParams::default();
        let build = BuildParams::default();
        Self {
            alpha: plan.score.alpha,
            max_wait: plan.schedule.max_wait,
            candidate_limit: plan.search.candidate_limit,
            local_search_rounds: plan.search.local_search_rounds,
            seed: 42,
            utc_offset_min: build.transit.utc_offset_min,
            trim_low: build.transit.trim.0,
            trim_high: build.transit.trim.1,
            stay_dist_m: build.transit.stay_dist_m,
            stay_time_min: build.transit.stay_time_min,
            snap_radius_m: build.transit.snap_radius_m,
            top_k: build.top_k,
            smoothing: build.smoothing,
            observation_days: build.observation_days,
            default_speed_kmh: build.transit.default_speed_kmh,
        }
    }
}

impl PlannerConfig {
    /// Defaults, overlaid with the JSON file at `path` when given.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))
            .map_err(CliError::io)?;
        serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))
            .map_err(CliError::usage)
    }

    pub fn plan_params(&self) -> PlanParams {
        PlanParams {
            score: ScoreParams { alpha: self.alpha },
            schedule: ScheduleParams {
                max_wait: self.max_wait,
            },
            search: SearchParams {
                candidate_limit: self.candidate_limit,
                local_search_rounds: self.local_search_rounds,
                rng_seed: self.seed,
            },
        }
    }

    pub fn build_params(&self) -> BuildParams {
        BuildParams {
            observation_days: self.observation_days,
            top_k: self.top_k,
            smoothing: self.smoothing,
            transit: TransitParams {
                snap_radius_m: self.snap_radius_m,
                trim: (self.trim_low, self.trim_high),
                stay_dist_m: self.stay_dist_m,
                stay_time_min: self.stay_time_min,
                utc_offset_min: self.utc_offset_min,
                default_speed_kmh: self.default_speed_kmh,
                ..TransitParams::default()
            },
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.plan_params().validate().map_err(CliError::from)?;
        self.build_params().transit.validate().map_err(CliError::from)?;
        if self.top_k == 0 || self.observation_days <= 0 || self.smoothing.is_nan() || self.smoothing <= 0.0 {
            return Err(CliError::usage(anyhow::anyhow!(
                "top_k, observation_days and smoothing must be positive"
            )));
        }
        Ok(())
    }
}
