//! Determinization of timed CEA whose resets are synchronous, and the
//! decision procedure for synchronous resets.

mod guards;
mod region;
mod subset;
mod sync;

pub use guards::{guard_types, predicate_of_type, predicate_types, simplify_union};
pub use region::{Part, Region, RegionSpace};
pub use subset::{determinize, determinize_with, size_bound, DeterminizeError, DeterminizeOptions};
pub use sync::{check_sync, check_sync_with, SyncVerdict, SyncWitness, DEFAULT_SYNC_CAP};
