//! States, measurements, and channels stored canonically as Choi matrices.

mod channel;
mod state;

pub use channel::{
    apply_channel_on_subsystems, apply_choi, choi_of_kraus, extend_channel, maximally_entangled, verify_cptp,
    ChoiOp, CptpReport, KrausChannel,
};
pub use state::{Povm, State};
