//! Joint decision-making for all controlled vehicles: pruned enumeration of
//! joint actions, cooperation-weighted rewards, and a UCT tree search whose
//! nodes assign one action to every controlled vehicle at once.

mod flow;
mod mcts;
mod reward;

pub use flow::{DecisionProblem, FlowState, FlowVehicle, JointAction, VehicleFlowState};
pub use mcts::{
    backpropagate, rollout, search, uct_select, DecisionOutput, MctsConfig, Metanode, SearchStats,
    SearchTree, VehicleSequence,
};
pub use reward::{
    center_term, consistency_term, flow_reward, target_term, vehicle_reward, RewardContext,
    VehicleChain, CENTER_WEIGHT, CONSISTENCY_WEIGHT, TARGET_WEIGHT,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecisionError {
    #[error("unknown vehicle {0}")]
    UnknownVehicle(u32),
    #[error("vehicle {0} is not controlled")]
    NotControlled(u32),
    #[error("no joint action combination survives pruning")]
    NoValidCombination,
    #[error("node is not fully expanded")]
    NotFullyExpanded,
    #[error("invalid decision problem: {0}")]
    InvalidProblem(String),
}

#[cfg(test)]
mod tests;
