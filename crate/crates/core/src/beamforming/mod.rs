//! Digital beamforming at the full-duplex node: the TX precoder search for a
//! given analog canceller, the sub-precoders it uses, the uplink combiner and
//! the achievable-rate functionals.

mod combiner;
mod precoder;
mod rates;
mod waterfill;

pub use combiner::{optimal_combiner, Combiner};
pub use precoder::{
    algorithm1_precoders, resolve_mode, sub_precoder, PrecoderCandidate, PrecoderSearch,
    SubPrecoderMode,
};
pub use rates::{dl_rate, residual_si_row_powers, ul_rate, uplink_precoder};
pub use waterfill::waterfilling;
