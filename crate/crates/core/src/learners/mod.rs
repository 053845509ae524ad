//! Round-by-round learning agents behind a common interface.
//!
//! Three agents are provided: [`EvolvingEwa`] (full information,
//! exponential weights over the latest revised cumulative loss),
//! [`EvolvingFtrl`] (bandit information, follow-the-regularized-leader
//! with negative entropy plus log barrier and importance-weighted
//! estimates), and [`SkippingWrapper`] (freezes any environment's feedback
//! after a configurable number of rounds so the wrapped agent sees a
//! bounded evolution horizon). [`tuning`] holds the closed-form parameter
//! rules for both learners.

mod config;
mod ewa;
mod ftrl;
mod interface;
mod skip;
pub mod tuning;

pub use config::{AutoTune, BuiltLearner, LearnerAlgo, LearnerConfig};
pub use ewa::EvolvingEwa;
pub use ftrl::{importance_estimate, EvolvingFtrl};
pub use interface::{
    FeedbackEntry, FeedbackValue, InfoModel, Learner, LearnerError, RoundFeedback,
};
pub use skip::{skip_wrap, SkippingWrapper};
