//! Leader-follower mission engine and campaign runner.

mod campaign;
mod ledger;
mod mission;

pub use campaign::*;
pub use ledger::*;
pub use mission::*;
