//! Discrete-event system simulator: lockstep time control over the engine,
//! federation formation, antenna switching, energy and WPT planning.

pub mod backend;
pub mod energy;
pub mod federation;
pub mod kernel;
pub mod results;
pub mod sim;
pub mod snr;
pub mod utility;

pub use backend::{EngineBackend, EntityInfo};
pub use energy::{
    consumed_power, energy_report, harvested_power, wpt_schedule, Activation, ChargePlan, Device, EnergyError,
    EnergyModel, WptConfig, WptError,
};
pub use federation::{
    allocate_federations, federation_utility, gain_order, meets_targets, select_active_antennas, AntennaSelection,
    Federation, UeDemand,
};
pub use kernel::{lockstep_violations, EventQueue, Kernel, KernelError, TimeMaster, TraceEntry};
pub use results::{ResultEvent, ResultsWriter};
pub use sim::{run_system, SimError, SimSummary, SysPolicy, WptPolicy};
pub use snr::{compute_snr, GainTable, MissingChannel, SnrParams};
pub use utility::{Utility, UtilityConfig};
