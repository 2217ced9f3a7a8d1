use crate::model::{Action, DecisionState, LaneLayout};

pub const TARGET_WEIGHT: f64 = 0.4;
pub const CENTER_WEIGHT: f64 = 0.3;
pub const CONSISTENCY_WEIGHT: f64 = 0.3;

/// One vehicle's decision chain: states from the root on (`actions.len() + 1`
/// of them) and the action that preceded the root, if any.
#[derive(Debug, Clone, Copy)]
pub struct VehicleChain<'a> {
    pub states: &'a [DecisionState],
    pub actions: &'a [Action],
    pub prior_action: Option<Action>,
}

/// Lane-relative terms needed to score a chain.
#[derive(Debug, Clone, Copy)]
pub struct RewardContext {
    pub layout: LaneLayout,
    pub delta_d: f64,
    pub target_lane: usize,
    /// Number of steps the completion-time term is normalised by.
    pub horizon: usize,
}

/// `1 - t_finish / horizon`, where `t_finish` is the first step from which
/// the vehicle occupies only its target lane through the end of the chain.
pub fn target_term(chain: &VehicleChain<'_>, ctx: &RewardContext) -> f64 {
    let inside = |s: &DecisionState| ctx.layout.occupancy(s.d, ctx.delta_d).is_only(ctx.target_lane);
    let n = chain.states.len();
    let trailing = chain.states.iter().rev().take_while(|s| inside(s)).count();
    if trailing == 0 {
        return 0.0;
    }
    let t_finish = (n - trailing) as f64;
    (1.0 - t_finish / ctx.horizon as f64).max(0.0)
}

/// `1 - mean |d - lane center| / (lane_width / 2)`, clamped to `[0, 1]`.
pub fn center_term(chain: &VehicleChain<'_>, ctx: &RewardContext) -> f64 {
    let half = 0.5 * ctx.layout.lane_width;
    let mean = chain
        .states
        .iter()
        .map(|s| (s.d - ctx.layout.lane_center(ctx.layout.nearest_lane(s.d))).abs())
        .sum::<f64>()
        / chain.states.len() as f64;
    (1.0 - mean / half).clamp(0.0, 1.0)
}

/// `1 - switches / (len - 1)` over the action sequence, with the action
/// preceding the root prepended.
pub fn consistency_term(chain: &VehicleChain<'_>) -> f64 {
    let seq: Vec<Action> = chain.prior_action.into_iter().chain(chain.actions.iter().copied()).collect();
    if seq.len() < 2 {
        return 1.0;
    }
    let switches = seq.windows(2).filter(|w| w[0] != w[1]).count();
    1.0 - switches as f64 / (seq.len() - 1) as f64
}

/// Weighted sum of the target-lane, centering and consistency terms, in `[0, 1]`.
pub fn vehicle_reward(chain: &VehicleChain<'_>, ctx: &RewardContext) -> f64 {
    TARGET_WEIGHT * target_term(chain, ctx)
        + CENTER_WEIGHT * center_term(chain, ctx)
        + CONSISTENCY_WEIGHT * consistency_term(chain)
}

/// Cooperation-weighted flow reward:
/// `(1/K) sum_i (R_i + gamma_i sum_{j != i} R_j) / (1 + (K - 1) gamma_i)`.
pub fn flow_reward(rewards: &[f64], gammas: &[f64]) -> f64 {
    let k = rewards.len();
    assert!(k > 0 && gammas.len() == k, "one gamma per reward");
    let total: f64 = rewards.iter().sum();
    let sum: f64 = rewards
        .iter()
        .zip(gammas)
        .map(|(&r, &g)| (r + g * (total - r)) / (1.0 + (k as f64 - 1.0) * g))
        .sum();
    sum / k as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(target: usize) -> RewardContext {
        RewardContext {
            layout: LaneLayout { main_lanes: 4, lane_width: 3.5, speed_limit: 16.7, ramp: None },
            delta_d: 1.75,
            target_lane: target,
            horizon: 7,
        }
    }

    fn straight(n: usize, d: f64) -> Vec<DecisionState> {
        (0..n).map(|k| DecisionState { s: 15.0 * k as f64, d, v: 10.0 }).collect()
    }

    #[test]
    fn centered_in_target_all_keep_speed_scores_one() {
        let states = straight(8, 3.5);
        let actions = [Action::KS; 7];
        let chain = VehicleChain { states: &states, actions: &actions, prior_action: None };
        assert_eq!(vehicle_reward(&chain, &ctx(1)), 1.0);
    }

    #[test]
    fn never_reaching_target_scores_point_six() {
        let states = straight(8, 3.5);
        let actions = [Action::KS; 7];
        let chain = VehicleChain { states: &states, actions: &actions, prior_action: Some(Action::KS) };
        assert!((vehicle_reward(&chain, &ctx(2)) - 0.6).abs() < 1e-12);
    }

    #[test]
    fn alternating_actions_have_no_consistency() {
        let states = straight(8, 3.5);
        let actions = [Action::AC, Action::DC, Action::AC, Action::DC, Action::AC, Action::DC, Action::AC];
        let chain = VehicleChain { states: &states, actions: &actions, prior_action: None };
        assert_eq!(consistency_term(&chain), 0.0);
        let r = vehicle_reward(&chain, &ctx(1));
        assert!((r - (0.4 * target_term(&chain, &ctx(1)) + 0.3 * center_term(&chain, &ctx(1)))).abs() < 1e-12);
    }

    #[test]
    fn completion_time_term() {
        let mut states = straight(8, 3.5);
        states[1].d = 5.25;
        for s in states.iter_mut().skip(2) {
            s.d = 7.0;
        }
        let actions = [Action::LCR, Action::LCR, Action::KS, Action::KS, Action::KS, Action::KS, Action::KS];
        let chain = VehicleChain { states: &states, actions: &actions, prior_action: None };
        assert!((target_term(&chain, &ctx(2)) - (1.0 - 2.0 / 7.0)).abs() < 1e-12);
        assert!((center_term(&chain, &ctx(2)) - 7.0 / 8.0).abs() < 1e-12);
        assert!((consistency_term(&chain) - 5.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn flow_reward_cases() {
        assert_eq!(flow_reward(&[0.37], &[0.8]), 0.37);
        assert!((flow_reward(&[1.0, 0.0], &[0.0, 0.0]) - 0.5).abs() < 1e-12);
        assert!((flow_reward(&[1.0, 0.0], &[1.0, 1.0]) - 0.5).abs() < 1e-12);
    }
}
