//! Place bisimulations and their variants for finite P/T nets.

pub mod closure;
pub mod decide;
pub mod format;
pub mod gen;
pub mod multiset;
pub mod net;
pub mod oracles;
pub mod relation;
pub mod verify;

pub use closure::{closure_contains, minimal_pair_sets, related_markings, substitution_images, PairingWitness, Side};
pub use decide::{decide, enumerate_bisimulations, maximal_bisimulations, DecideError, DecideOptions, Strategy, Verdict};
pub use format::{FormatError, NetDocument, RelationDocument};
pub use multiset::{Multiset, Overflow, Place};
pub use net::{Label, Net, NetError, Reachability, Step, Transition, TransitionId};
pub use oracles::{bounded_game_oracle, closure_oracle, interleaving_bisimilar, step_bisimilar, GameOutcome, GameViolation, OracleError};
pub use relation::{PlaceRelation, RelationError, RelationKind, Slot};
pub use verify::{verify, BisimKind, CheckReport, Obligation, VerifyError, VerifyOptions};
