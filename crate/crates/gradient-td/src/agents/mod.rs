//! Learning updates: prediction, greedy control, and actor-critic.

mod actor_critic;
mod control;
mod prediction;

pub use actor_critic::{actor_critic_update, ActorCriticAgent, CriticKind, PolicyParams};
pub use control::{q_update, q_update_sparse, ControlAgent, ControlUpdate, ControlVariant};
pub use prediction::{
    gtd2_update, htd_update, td_error, td_update, tdc_update, tdcpp_update, tdrc_update,
    vtrace_update, Hyper, PredictionAgent, PredictionAlg, DIVERGENCE_THRESHOLD,
};
