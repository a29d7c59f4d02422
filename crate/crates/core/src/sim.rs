//! Monte Carlo estimation of the closed-loop average cost.
//!
//! Decode outcomes are i.i.d. Bernoulli with the code's error probability;
//! the channel is never simulated at symbol level. Each block boundary
//! `t = k n` runs, in order: decode outcome, actuation, range update,
//! pattern update, cost accounting, new command, quantization. The plant
//! then advances `n` slots with the action applied only in the first.
//!
//! The down-sampled cost is taken on the post-actuation state
//! `x_kn + (b / a) u_kn`, which equals the accumulated block disturbance
//! plus the scaled quantization noise and is the quantity the analytical
//! bounds describe. The all-slot cost averages `x_t^2` over every slot.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, CodePoint};
use crate::error::{Error, Result};
use crate::plant::{
    actuator_action, control_command, pattern_update, plant_step, predict_state, DisturbanceLaw, LoopState,
    PlantParams,
};
use crate::quantizer::{quantize_value, update_range, validate_config, QuantizerConfig, ValidationReport};
use crate::stability::practical_necessary_code;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub plant: PlantParams,
    pub channel: ChannelParams,
    pub code: CodePoint,
    pub quantizer: QuantizerConfig,
    pub horizon_blocks: u64,
    pub trials: u32,
    pub seed: u64,
    pub burn_in_blocks: u64,
    /// Send the unquantized command.
    pub exact_commands: bool,
    /// Abort a trial on a range violation; otherwise saturate the command
    /// to zero and count it.
    pub strict: bool,
}

impl SimConfig {
    /// Configuration for the code `(n, rate)` on `channel`, with the
    /// quantizer built from `xi0` and an optional zoom factor. Defaults:
    /// 2e4 blocks, 100 trials, seed 0, 10% burn-in, strict.
    pub fn for_code(
        plant: PlantParams,
        channel: ChannelParams,
        n: u32,
        rate: f64,
        xi0: f64,
        scale_override: Option<f64>,
    ) -> Result<Self> {
        let code = CodePoint::derive(n, rate, &channel)?;
        let quantizer = QuantizerConfig::for_code(&plant, n, rate, xi0, scale_override)?;
        Ok(Self {
            plant,
            channel,
            code,
            quantizer,
            horizon_blocks: 20_000,
            trials: 100,
            seed: 0,
            burn_in_blocks: 2_000,
            exact_commands: false,
            strict: true,
        })
    }

    /// Replace the channel-derived error probability.
    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.code = CodePoint::with_epsilon(self.code.n, self.code.rate, epsilon)?;
        Ok(self)
    }

    /// Set the horizon and reset the burn-in to 10% of it.
    pub fn with_horizon(mut self, horizon_blocks: u64) -> Self {
        self.horizon_blocks = horizon_blocks;
        self.burn_in_blocks = horizon_blocks / 10;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.horizon_blocks <= self.burn_in_blocks {
            return Err(Error::Config(format!(
                "horizon_blocks ({}) must exceed burn_in_blocks ({})",
                self.horizon_blocks, self.burn_in_blocks
            )));
        }
        if self.quantizer.bits == 0 {
            return Err(Error::Config("the code carries no quantizer bits".into()));
        }
        Ok(())
    }

    /// Whether the configuration passes the range-containment checks and
    /// lies in the practical necessary region.
    pub fn expected_stable(&self) -> bool {
        validate_config(&self.quantizer, &self.plant, self.code.n, self.code.rate).all_pass()
            && practical_necessary_code(&self.code, self.plant.a).unwrap_or(false)
    }

    /// Deterministic seed of trial `k`.
    pub fn trial_seed(&self, k: u32) -> u64 {
        splitmix64(self.seed ^ splitmix64(k as u64 ^ 0x5DEE_CE66_D1CE_4E5B))
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial accumulators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub seed: u64,
    pub mean_cost_downsampled: f64,
    pub mean_cost_all_slots: f64,
    pub max_abs_state: f64,
    pub range_violations: u64,
    pub failed_blocks: u64,
    pub decoded_blocks: u64,
    pub pattern_counts: Vec<u64>,
    pub range_counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub mean_cost_downsampled: f64,
    pub mean_cost_all_slots: f64,
    /// 95% halfwidth of `mean_cost_downsampled` across trials (0 for one
    /// trial).
    pub ci95_halfwidth: f64,
    pub ci95_halfwidth_all_slots: f64,
    pub max_abs_state: f64,
    pub range_violations: u64,
    pub empirical_epsilon: f64,
    /// Fraction of post-burn-in boundaries at each pattern `j`.
    pub empirical_pattern_hist: Vec<f64>,
    /// Fraction of post-burn-in boundaries at each zoom index `i`.
    pub empirical_range_hist: Vec<f64>,
    pub trials: u32,
    pub horizon_blocks: u64,
    pub burn_in_blocks: u64,
    pub seed: u64,
    pub expected_stable: bool,
    pub validation: ValidationReport,
}

/// One disturbance draw, strictly inside `(-w_max, w_max)`.
pub fn sample_disturbance<R: Rng + ?Sized>(rng: &mut R, plant: &PlantParams) -> f64 {
    let w_max = plant.w_max();
    if w_max == 0.0 {
        return 0.0;
    }
    match plant.disturbance {
        DisturbanceLaw::Uniform => loop {
            let w = rng.gen_range(-w_max..w_max);
            if w != -w_max {
                return w;
            }
        },
        DisturbanceLaw::TruncatedGaussian { k } => {
            let parent = plant.sigma_w_sq.sqrt() * DisturbanceLaw::gaussian_scale(k);
            let normal = Normal::new(0.0, parent).expect("finite positive scale");
            loop {
                let w: f64 = normal.sample(rng);
                if w.abs() < w_max {
                    return w;
                }
            }
        }
    }
}

fn bump(counts: &mut Vec<u64>, at: usize) {
    if counts.len() <= at {
        counts.resize(at + 1, 0);
    }
    counts[at] += 1;
}

fn diverged(block: u64, reason: impl Into<String>) -> Error {
    Error::Diverged {
        block,
        reason: reason.into(),
    }
}

/// Simulate one trial. Fails on non-finite state, range-index overflow,
/// a broken block identity, or (when strict) a range violation.
pub fn run_trial(config: &SimConfig, trial_seed: u64) -> Result<TrialStats> {
    config.validate()?;
    let plant = &config.plant;
    let n = config.code.n;
    let eps = config.code.epsilon;
    let q_cfg = &config.quantizer;
    let omega_max = plant.omega_max(n);
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);

    let x0 = loop {
        let x = rng.gen_range(-plant.x0_max..plant.x0_max);
        if x != -plant.x0_max {
            break x;
        }
    };
    let mut state = LoopState {
        x: x0,
        ..LoopState::default()
    };
    let mut q_state = q_cfg.initial_state();
    let mut in_flight = 0.0;
    let mut last_ok = false;
    let mut omega = 0.0;

    let mut stats = TrialStats {
        seed: trial_seed,
        mean_cost_downsampled: 0.0,
        mean_cost_all_slots: 0.0,
        max_abs_state: x0.abs(),
        range_violations: 0,
        failed_blocks: 0,
        decoded_blocks: 0,
        pattern_counts: Vec::new(),
        range_counts: Vec::new(),
    };
    let (mut sum_down, mut sum_all) = (0.0, 0.0);
    let (mut count_down, mut count_all) = (0u64, 0u64);

    for k in 0..config.horizon_blocks {
        let u = if k == 0 {
            0.0
        } else {
            let ok = !rng.gen_bool(eps);
            if ok {
                stats.decoded_blocks += 1;
            } else {
                stats.failed_blocks += 1;
            }
            let residual = state.x - state.x_hat - omega;
            let scale = state.x.abs().max(state.x_hat.abs()).max(omega.abs());
            if !(residual.abs() <= 1e-9 * scale + f64::MIN_POSITIVE) {
                return Err(diverged(k, format!("block identity broken: residual {residual:e}")));
            }
            if omega_max > 0.0 && !(omega.abs() < omega_max) {
                return Err(diverged(k, format!("accumulated disturbance {omega:e} exceeds {omega_max:e}")));
            }
            q_state = update_range(q_state, ok, q_cfg).map_err(|e| diverged(k, e.to_string()))?;
            if !q_state.h.is_finite() {
                return Err(diverged(k, "quantizer range overflows f64"));
            }
            state.pattern = pattern_update(state.pattern, ok);
            last_ok = ok;
            actuator_action(in_flight, ok, true)
        };
        state.u = u;
        state.t = k * n as u64;

        if k >= config.burn_in_blocks {
            let post = state.x + plant.b / plant.a * u;
            sum_down += post * post;
            count_down += 1;
            bump(&mut stats.pattern_counts, state.pattern as usize);
            bump(&mut stats.range_counts, q_state.range_index as usize);
        }

        let command = control_command(state.x, u, last_ok, n, plant);
        in_flight = if config.exact_commands {
            command
        } else {
            match quantize_value(command, q_state.h, q_cfg.bits) {
                Ok(v) => v,
                Err(Error::RangeViolation { value, half_range }) => {
                    if config.strict {
                        return Err(Error::RangeViolation { value, half_range });
                    }
                    stats.range_violations += 1;
                    0.0
                }
                Err(e) => return Err(e),
            }
        };
        state.x_hat = predict_state(state.x, u, last_ok, n, plant);

        omega = 0.0;
        let record = k >= config.burn_in_blocks;
        for slot in 0..n {
            if record {
                sum_all += state.x * state.x;
                count_all += 1;
            }
            let w = sample_disturbance(&mut rng, plant);
            let action = if slot == 0 { u } else { 0.0 };
            state.x = plant_step(state.x, action, w, plant);
            omega = plant.a * omega + w;
            stats.max_abs_state = stats.max_abs_state.max(state.x.abs());
        }
        if !state.x.is_finite() {
            return Err(diverged(k, "state is not finite"));
        }
    }

    stats.mean_cost_downsampled = sum_down / count_down as f64;
    stats.mean_cost_all_slots = sum_all / count_all as f64;
    Ok(stats)
}

fn mean_and_ci(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
    (mean, 1.96 * (var / m).sqrt())
}

fn merge_counts(into: &mut Vec<u64>, from: &[u64]) {
    if into.len() < from.len() {
        into.resize(from.len(), 0);
    }
    for (a, b) in into.iter_mut().zip(from) {
        *a += b;
    }
}

fn normalize(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    counts.iter().map(|c| *c as f64 / total as f64).collect()
}

/// Run all trials (in parallel) and aggregate in trial order.
pub fn estimate_average_cost(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let outcomes: Vec<Result<TrialStats>> = (0..config.trials)
        .into_par_iter()
        .map(|k| {
            let seed = config.trial_seed(k);
            run_trial(config, seed).map_err(|e| Error::TrialFailed {
                trial: k as usize,
                seed,
                source: Box::new(e),
            })
        })
        .collect();
    let trials = outcomes.into_iter().collect::<Result<Vec<_>>>()?;

    let down: Vec<f64> = trials.iter().map(|t| t.mean_cost_downsampled).collect();
    let all: Vec<f64> = trials.iter().map(|t| t.mean_cost_all_slots).collect();
    let (mean_down, ci_down) = mean_and_ci(&down);
    let (mean_all, ci_all) = mean_and_ci(&all);

    let mut pattern_counts = Vec::new();
    let mut range_counts = Vec::new();
    let (mut failed, mut decoded, mut violations) = (0u64, 0u64, 0u64);
    let mut max_abs_state = 0.0f64;
    for t in &trials {
        merge_counts(&mut pattern_counts, &t.pattern_counts);
        merge_counts(&mut range_counts, &t.range_counts);
        failed += t.failed_blocks;
        decoded += t.decoded_blocks;
        violations += t.range_violations;
        max_abs_state = max_abs_state.max(t.max_abs_state);
    }

    Ok(SimResult {
        mean_cost_downsampled: mean_down,
        mean_cost_all_slots: mean_all,
        ci95_halfwidth: ci_down,
        ci95_halfwidth_all_slots: ci_all,
        max_abs_state,
        range_violations: violations,
        empirical_epsilon: failed as f64 / (failed + decoded) as f64,
        empirical_pattern_hist: normalize(&pattern_counts),
        empirical_range_hist: normalize(&range_counts),
        trials: config.trials,
        horizon_blocks: config.horizon_blocks,
        burn_in_blocks: config.burn_in_blocks,
        seed: config.seed,
        expected_stable: config.expected_stable(),
        validation: validate_config(&config.quantizer, &config.plant, config.code.n, config.code.rate),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smoke(eps: Option<f64>) -> SimConfig {
        let plant = PlantParams::uniform(1.01, 1.0, 1e-10, 1.0).unwrap();
        let channel = ChannelParams::from_db(3.0).unwrap();
        let mut cfg = SimConfig::for_code(plant, channel, 20, 1.0, 1e5, Some(100.0)).unwrap();
        if let Some(e) = eps {
            cfg = cfg.with_epsilon(e).unwrap();
        }
        cfg.with_horizon(2_000)
    }

    #[test]
    fn disturbance_moments() {
        let plant = PlantParams::uniform(2.0, 1.0, 1e-10, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let draws: Vec<f64> = (0..1_000_000).map(|_| sample_disturbance(&mut rng, &plant)).collect();
        let m = draws.len() as f64;
        let mean = draws.iter().sum::<f64>() / m;
        let var = draws.iter().map(|w| (w - mean) * (w - mean)).sum::<f64>() / (m - 1.0);
        assert!(mean.abs() < 4.0 * 1e-5 / 1e3);
        assert!((var - 1e-10).abs() < 0.01 * 1e-10);
        assert!(draws.iter().all(|w| w.abs() < plant.w_max()));
    }

    #[test]
    fn truncated_gaussian_moments() {
        let plant = PlantParams::new(2.0, 1.0, 4.0, 1.0, DisturbanceLaw::TruncatedGaussian { k: 1.5 }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let draws: Vec<f64> = (0..400_000).map(|_| sample_disturbance(&mut rng, &plant)).collect();
        let m = draws.len() as f64;
        let var = draws.iter().map(|w| w * w).sum::<f64>() / m;
        assert!((var - 4.0).abs() < 0.02 * 4.0, "var = {var}");
        assert!(draws.iter().all(|w| w.abs() < plant.w_max()));
    }

    #[test]
    fn perfect_loop_settles_after_one_block() {
        // powers of two keep every product exact
        let plant = PlantParams::uniform(2.0, 1.0, 0.0, 1.0).unwrap();
        let channel = ChannelParams::from_db(30.0).unwrap();
        let mut cfg = SimConfig::for_code(plant, channel, 4, 3.0, 1e3, Some(32.0))
            .unwrap()
            .with_epsilon(0.0)
            .unwrap()
            .with_horizon(200);
        cfg.exact_commands = true;
        cfg.burn_in_blocks = 1;
        cfg.trials = 3;
        let r = estimate_average_cost(&cfg).unwrap();
        assert_eq!(r.mean_cost_downsampled, 0.0);
        assert_eq!(r.empirical_epsilon, 0.0);
        assert_eq!(r.empirical_pattern_hist, vec![1.0]);

        let mut cfg = smoke(Some(0.0));
        cfg.plant.sigma_w_sq = 0.0;
        cfg.exact_commands = true;
        cfg.burn_in_blocks = 1;
        cfg.trials = 3;
        let r = estimate_average_cost(&cfg).unwrap();
        assert!(r.mean_cost_downsampled < 1e-30);
    }

    #[test]
    fn always_failing_channel_diverges() {
        let mut cfg = smoke(Some(1.0));
        cfg.trials = 1;
        let err = run_trial(&cfg, 7).unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }), "{err}");
    }

    #[test]
    fn one_trial_equals_run_trial() {
        let mut cfg = smoke(Some(0.05));
        cfg.trials = 1;
        let r = estimate_average_cost(&cfg).unwrap();
        let t = run_trial(&cfg, cfg.trial_seed(0)).unwrap();
        assert_eq!(r.mean_cost_downsampled, t.mean_cost_downsampled);
        assert_eq!(r.ci95_halfwidth, 0.0);
    }

    #[test]
    fn deterministic_for_a_seed() {
        let mut cfg = smoke(Some(0.1));
        cfg.trials = 4;
        cfg.seed = 42;
        let a = serde_json::to_string(&estimate_average_cost(&cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&estimate_average_cost(&cfg).unwrap()).unwrap();
        assert_eq!(a, b);
        cfg.seed = 43;
        let c = serde_json::to_string(&estimate_average_cost(&cfg).unwrap()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn empirical_epsilon_within_five_standard_errors() {
        let mut cfg = smoke(Some(0.1)).with_horizon(20_000);
        cfg.trials = 2;
        let r = estimate_average_cost(&cfg).unwrap();
        let blocks = 2.0 * (20_000.0 - 1.0);
        let se = (0.1f64 * 0.9 / blocks).sqrt();
        assert!((r.empirical_epsilon - 0.1).abs() < 5.0 * se);
        assert_eq!(r.range_violations, 0);
    }

    #[test]
    fn pattern_histogram_matches_geometric_law() {
        let mut cfg = smoke(Some(0.1)).with_horizon(10_000);
        cfg.burn_in_blocks = 1;
        cfg.trials = 1;
        let r = estimate_average_cost(&cfg).unwrap();
        let psi = crate::plant::pattern_stationary_distribution(0.1, r.empirical_pattern_hist.len() as u32 - 1).unwrap();
        let tv = 0.5
            * r.empirical_pattern_hist
                .iter()
                .zip(&psi)
                .map(|(e, p)| (e - p).abs())
                .sum::<f64>();
        assert!(tv < 1e-2, "tv = {tv}");
    }

    #[test]
    fn ci_shrinks_with_more_trials() {
        let plant = PlantParams::uniform(1.01, 1.0, 1e-10, 1.0).unwrap();
        let channel = ChannelParams::from_db(3.0).unwrap();
        // small L keeps the cost distribution light-tailed
        let mut cfg = SimConfig::for_code(plant, channel, 20, 1.0, 1e5, Some(2.0))
            .unwrap()
            .with_epsilon(0.05)
            .unwrap()
            .with_horizon(500);
        cfg.trials = 200;
        let small = estimate_average_cost(&cfg).unwrap().ci95_halfwidth;
        cfg.trials = 400;
        let large = estimate_average_cost(&cfg).unwrap().ci95_halfwidth;
        let ratio = large / small;
        assert!((ratio - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.2 * std::f64::consts::FRAC_1_SQRT_2, "{ratio}");
    }

    #[test]
    fn config_validation() {
        let mut cfg = smoke(None);
        cfg.trials = 0;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = smoke(None);
        cfg.burn_in_blocks = cfg.horizon_blocks;
        assert!(cfg.validate().is_err());
    }
}
