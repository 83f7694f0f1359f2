//! Run-time channel computation: path search, gains, fading, Doppler and H synthesis.

mod entity;
mod fading;
mod paths;
mod radio;
mod synth;

pub use entity::{Entity, EntityKind};
pub use fading::{gamma_multiplier, gamma_quantile_from_normal, normal_cdf, update_fading, FadingParams, FadingState};
pub use paths::{chain_points, doppler_shift, hop_angles, path_average_gain, path_stream, ChannelModel, PathChain};
pub use radio::{RadioParams, SPEED_OF_LIGHT};
pub use synth::{synthesize_channel, ChannelRealization, PathSummary};
