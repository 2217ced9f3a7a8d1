use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::flow::{DecisionProblem, FlowState, JointAction};
use super::reward::{flow_reward, vehicle_reward, RewardContext, VehicleChain};
use super::DecisionError;
use crate::model::{Action, DecisionState};

/// Random joint picks tried before a playout step enumerates all combinations.
const PLAYOUT_TRIES: usize = 64;

/// Visits a non-root child needs before extraction trusts its statistics.
const MIN_EXTRACT_VISITS: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MctsConfig {
    /// Exploration constant.
    pub c_p: f64,
    pub max_iterations: usize,
    /// Decision steps in one search horizon.
    pub max_depth: usize,
    /// Decision steps the completion-time reward is normalised by.
    pub completion_steps: usize,
    /// Distance to drive inside the target lane before an intention counts
    /// as complete (m).
    pub target_distance: f64,
    /// Probability that a playout step moves a vehicle toward its target
    /// lane; failing that, the same probability of repeating the vehicle's
    /// previous action before picking uniformly. Zero keeps playouts uniform.
    pub rollout_bias: f64,
    pub seed: u64,
}

fn default_completion_steps() -> usize {
    7
}

fn default_rollout_bias() -> f64 {
    0.0
}

impl Default for MctsConfig {
    fn default() -> Self {
        Self {
            c_p: std::f64::consts::FRAC_1_SQRT_2,
            max_iterations: 3000,
            max_depth: 7,
            completion_steps: default_completion_steps(),
            target_distance: 20.0,
            rollout_bias: default_rollout_bias(),
            seed: 0,
        }
    }
}

impl MctsConfig {
    pub fn validate(&self) -> Result<(), DecisionError> {
        if !(self.c_p > 0.0)
            || self.max_iterations == 0
            || self.max_depth == 0
            || self.completion_steps == 0
            || !(0.0..=1.0).contains(&self.rollout_bias)
        {
            return Err(DecisionError::InvalidProblem(
                "c_p must be positive, iterations, depth and completion steps at least 1, rollout bias in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Tree node holding a joint action and its visit statistics.
#[derive(Debug, Clone)]
pub struct Metanode {
    pub parent: Option<usize>,
    pub action: Option<JointAction>,
    pub flow: FlowState,
    pub depth: usize,
    pub visits: u32,
    pub total_reward: f64,
    pub children: Vec<usize>,
    untried: Option<Vec<(JointAction, FlowState)>>,
    terminal: bool,
}

impl Metanode {
    fn new(parent: Option<usize>, action: Option<JointAction>, flow: FlowState, depth: usize) -> Self {
        Self {
            parent,
            action,
            flow,
            depth,
            visits: 0,
            total_reward: 0.0,
            children: Vec::new(),
            untried: None,
            terminal: false,
        }
    }

    pub fn mean_reward(&self) -> f64 {
        if self.visits == 0 {
            0.0
        } else {
            self.total_reward / self.visits as f64
        }
    }

    pub fn fully_expanded(&self) -> bool {
        self.untried.as_ref().is_some_and(|u| u.is_empty())
    }
}

/// Arena of metanodes; index 0 is the root.
#[derive(Debug, Clone)]
pub struct SearchTree {
    pub nodes: Vec<Metanode>,
}

impl SearchTree {
    pub fn new(root: FlowState) -> Self {
        Self { nodes: vec![Metanode::new(None, None, root, 0)] }
    }

    /// Nodes created below the root.
    pub fn expanded_nodes(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Test-only builder: appends a child with preset statistics.
    #[doc(hidden)]
    pub fn push_child(&mut self, parent: usize, visits: u32, mean: f64) -> usize {
        let flow = self.nodes[parent].flow.clone();
        let depth = self.nodes[parent].depth + 1;
        let mut node = Metanode::new(Some(parent), None, flow, depth);
        node.visits = visits;
        node.total_reward = mean * visits as f64;
        let idx = self.nodes.len();
        self.nodes.push(node);
        self.nodes[parent].children.push(idx);
        self.nodes[parent].untried = Some(Vec::new());
        idx
    }
}

/// Child maximising `mean + 2 c_p sqrt(2 ln n / n_j)`; lowest index on ties.
pub fn uct_select(tree: &SearchTree, node: usize, c_p: f64) -> Result<usize, DecisionError> {
    let n = &tree.nodes[node];
    if !n.fully_expanded() || n.children.is_empty() {
        return Err(DecisionError::NotFullyExpanded);
    }
    let ln_n = (n.visits.max(1) as f64).ln();
    let mut best = None;
    let mut best_score = f64::NEG_INFINITY;
    for &c in &n.children {
        let ch = &tree.nodes[c];
        if ch.visits == 0 {
            return Err(DecisionError::NotFullyExpanded);
        }
        let score = ch.mean_reward() + 2.0 * c_p * (2.0 * ln_n / ch.visits as f64).sqrt();
        if score > best_score {
            best_score = score;
            best = Some(c);
        }
    }
    Ok(best.unwrap())
}

/// Adds one visit and `reward` to every node on `path`.
pub fn backpropagate(tree: &mut SearchTree, path: &[usize], reward: f64) {
    for &i in path {
        tree.nodes[i].visits += 1;
        tree.nodes[i].total_reward += reward;
    }
}

/// Per-vehicle action sequence with its human-facing signals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleSequence {
    pub id: u32,
    pub actions: Vec<Action>,
    pub signals: Vec<Option<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionOutput {
    pub sequences: Vec<VehicleSequence>,
    /// True when the root had no admissible joint action and every vehicle
    /// was told to brake.
    pub emergency: bool,
}

impl DecisionOutput {
    pub fn sequence(&self, id: u32) -> Option<&[Action]> {
        self.sequences.iter().find(|s| s.id == id).map(|s| s.actions.as_slice())
    }

    fn from_joint(problem: &DecisionProblem, joints: &[JointAction], emergency: bool) -> Self {
        let sequences = problem
            .controlled()
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let actions: Vec<Action> = joints.iter().map(|j| j.0[k]).collect();
                VehicleSequence {
                    id: problem.vehicles()[c].id,
                    signals: actions.iter().map(|a| a.signal().map(str::to_string)).collect(),
                    actions,
                }
            })
            .collect();
        Self { sequences, emergency }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub iterations: usize,
    pub expanded_nodes: usize,
    pub root_combinations: usize,
}

struct Search<'a> {
    problem: &'a DecisionProblem,
    cfg: MctsConfig,
    rng: ChaCha8Rng,
    tree: SearchTree,
}

impl<'a> Search<'a> {
    fn reward_context(&self, idx: usize) -> RewardContext {
        RewardContext {
            layout: self.problem.layout,
            delta_d: self.problem.actions.delta_d,
            target_lane: self.problem.vehicles()[idx].target_lane,
            horizon: self.cfg.completion_steps,
        }
    }

    /// Lane change toward the target lane, or keep speed once inside it.
    fn toward_target(&self, flow: &FlowState, c: usize) -> Action {
        let layout = &self.problem.layout;
        let off = layout.lane_center(self.problem.vehicles()[c].target_lane) - flow.vehicles[c].state.d;
        if off.abs() < 1e-6 {
            Action::KS
        } else if off < 0.0 {
            Action::LCL
        } else {
            Action::LCR
        }
    }

    fn done(&self, flow: &FlowState) -> bool {
        self.problem.intentions_done(flow, self.cfg.target_distance)
    }

    /// Scores a chain of flows (root first) reached through `joints`.
    fn score(&self, flows: &[&FlowState], joints: &[&JointAction]) -> f64 {
        let mut rewards = Vec::with_capacity(self.problem.controlled().len());
        let mut gammas = Vec::with_capacity(rewards.capacity());
        for (k, &c) in self.problem.controlled().iter().enumerate() {
            let states: Vec<DecisionState> = flows.iter().map(|f| f.vehicles[c].state).collect();
            let actions: Vec<Action> = joints.iter().map(|j| j.0[k]).collect();
            let chain = VehicleChain {
                states: &states,
                actions: &actions,
                prior_action: flows[0].vehicles[c].last_action,
            };
            rewards.push(vehicle_reward(&chain, &self.reward_context(c)));
            gammas.push(self.problem.vehicles()[c].gamma);
        }
        flow_reward(&rewards, &gammas)
    }

    fn ensure_untried(&mut self, node: usize) {
        if self.tree.nodes[node].untried.is_some() {
            return;
        }
        let combos = match self.problem.expand_combinations(&self.tree.nodes[node].flow) {
            Ok(mut c) => {
                c.shuffle(&mut self.rng);
                c
            }
            Err(_) => Vec::new(),
        };
        let n = &mut self.tree.nodes[node];
        if combos.is_empty() && n.children.is_empty() {
            n.terminal = true;
        }
        n.untried = Some(combos);
    }

    /// Random admissible joint step: rejection sampling over the per-vehicle
    /// action sets, then exhaustive enumeration.
    fn playout_step(&mut self, flow: &FlowState, prev: Option<&JointAction>) -> Option<(JointAction, FlowState)> {
        let (options, next_unc) = self.problem.playout_options(flow);
        for _ in 0..PLAYOUT_TRIES {
            let pick: Vec<Action> = options
                .iter()
                .zip(self.problem.controlled())
                .enumerate()
                .map(|(k, (o, &c))| {
                    let want = self.toward_target(flow, c);
                    let last = prev.map(|j| j.0[k]).filter(|a| o.contains(a));
                    if o.contains(&want) && self.rng.gen_bool(self.cfg.rollout_bias) {
                        want
                    } else if let Some(a) = last.filter(|_| self.rng.gen_bool(self.cfg.rollout_bias)) {
                        a
                    } else {
                        o[self.rng.gen_range(0..o.len())]
                    }
                })
                .collect();
            if let Some(next) = self.problem.try_joint(flow, &pick, &next_unc) {
                return Some((JointAction(pick), next));
            }
        }
        let mut all = self.problem.expand_combinations(flow).ok()?;
        let i = self.rng.gen_range(0..all.len());
        Some(all.swap_remove(i))
    }

    fn rollout(&mut self, path: &[usize]) -> f64 {
        let mut flows: Vec<FlowState> = Vec::new();
        let mut joints: Vec<JointAction> = Vec::new();
        let leaf = *path.last().unwrap();
        let mut depth = self.tree.nodes[leaf].depth;
        let mut cur = self.tree.nodes[leaf].flow.clone();
        if !self.tree.nodes[leaf].terminal {
            while depth < self.cfg.max_depth && !self.done(&cur) {
                let prev = joints.last().or(self.tree.nodes[leaf].action.as_ref()).cloned();
                let Some((joint, next)) = self.playout_step(&cur, prev.as_ref()) else { break };
                joints.push(joint);
                flows.push(next.clone());
                cur = next;
                depth += 1;
            }
        }
        let mut chain_flows: Vec<&FlowState> = path.iter().map(|&i| &self.tree.nodes[i].flow).collect();
        chain_flows.extend(flows.iter());
        let mut chain_joints: Vec<&JointAction> =
            path[1..].iter().map(|&i| self.tree.nodes[i].action.as_ref().unwrap()).collect();
        chain_joints.extend(joints.iter());
        self.score(&chain_flows, &chain_joints)
    }

    fn iterate(&mut self) {
        let mut path = vec![0usize];
        let mut node = 0usize;
        loop {
            let n = &self.tree.nodes[node];
            if n.terminal {
                break;
            }
            if n.depth >= self.cfg.max_depth || (node != 0 && self.done(&n.flow)) {
                self.tree.nodes[node].terminal = true;
                break;
            }
            self.ensure_untried(node);
            if self.tree.nodes[node].terminal {
                break;
            }
            if let Some((joint, flow)) = self.tree.nodes[node].untried.as_mut().unwrap().pop() {
                let depth = self.tree.nodes[node].depth + 1;
                let child = self.tree.nodes.len();
                self.tree.nodes.push(Metanode::new(Some(node), Some(joint), flow, depth));
                self.tree.nodes[node].children.push(child);
                path.push(child);
                break;
            }
            node = uct_select(&self.tree, node, self.cfg.c_p).expect("expanded node has visited children");
            path.push(node);
        }
        let reward = self.rollout(&path);
        backpropagate(&mut self.tree, &path, reward);
    }

    /// Greedy descent by mean reward through children visited often enough
    /// to trust, then fills the horizon with the
    /// admissible joint step closest to every vehicle heading for its target.
    fn extract(&self) -> Vec<JointAction> {
        let mut joints = Vec::new();
        let mut node = 0usize;
        loop {
            let n = &self.tree.nodes[node];
            let mut best: Option<usize> = None;
            for &c in &n.children {
                let ch = &self.tree.nodes[c];
                let floor = if node == 0 { 1 } else { MIN_EXTRACT_VISITS };
                if ch.visits >= floor
                    && best.is_none_or(|b| ch.mean_reward() > self.tree.nodes[b].mean_reward())
                {
                    best = Some(c);
                }
            }
            match best {
                Some(c) => {
                    joints.push(self.tree.nodes[c].action.clone().unwrap());
                    node = c;
                }
                None => break,
            }
        }
        let mut flow = self.tree.nodes[node].flow.clone();
        while joints.len() < self.cfg.max_depth {
            let Ok(combos) = self.problem.expand_combinations(&flow) else { break };
            let want: Vec<Action> =
                self.problem.controlled().iter().map(|&c| self.toward_target(&flow, c)).collect();
            let score = |j: &JointAction| {
                let hits = j.0.iter().zip(&want).filter(|(a, w)| a == w).count();
                let keeps = j.0.iter().filter(|&&a| a == Action::KS).count();
                (hits, keeps)
            };
            let pick = combos
                .iter()
                .enumerate()
                .max_by_key(|(i, (j, _))| (score(j), std::cmp::Reverse(*i)))
                .map(|(i, _)| i)
                .unwrap_or(0);
            let (joint, next) = combos.into_iter().nth(pick).unwrap();
            joints.push(joint);
            flow = next;
        }
        joints
    }
}

/// Runs the joint tree search from `root` and extracts one action sequence
/// per controlled vehicle.
pub fn search(
    problem: &DecisionProblem,
    root: &FlowState,
    cfg: &MctsConfig,
) -> Result<(DecisionOutput, SearchStats), DecisionError> {
    cfg.validate()?;
    if root.vehicles.len() != problem.vehicles().len() {
        return Err(DecisionError::InvalidProblem("flow does not match the roster".into()));
    }
    let mut s = Search {
        problem,
        cfg: *cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        tree: SearchTree::new(root.clone()),
    };
    s.ensure_untried(0);
    let root_combinations = s.tree.nodes[0].untried.as_ref().map_or(0, Vec::len);
    if root_combinations == 0 {
        let dc = JointAction(vec![Action::DC; problem.controlled().len()]);
        let joints = vec![dc; cfg.max_depth];
        return Ok((
            DecisionOutput::from_joint(problem, &joints, true),
            SearchStats { iterations: 0, expanded_nodes: 0, root_combinations: 0 },
        ));
    }
    for _ in 0..cfg.max_iterations {
        s.iterate();
    }
    let joints = s.extract();
    Ok((
        DecisionOutput::from_joint(problem, &joints, false),
        SearchStats {
            iterations: cfg.max_iterations,
            expanded_nodes: s.tree.expanded_nodes(),
            root_combinations,
        },
    ))
}

/// Replays a rollout from `root` for tests: returns the flow reward of one
/// random playout of at most `cfg.max_depth` steps.
pub fn rollout(problem: &DecisionProblem, root: &FlowState, cfg: &MctsConfig) -> f64 {
    let mut s = Search {
        problem,
        cfg: *cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        tree: SearchTree::new(root.clone()),
    };
    s.rollout(&[0])
}
