//! Seeded idler/signal click stream simulation and window counting.

mod bits;
pub mod format;
mod streams;

pub use bits::BitStream;
pub use streams::{
    count_window, generate_streams, sample_window_counts, trial_rng, ClickStreams, ShotModel, Target, WindowCounts,
    GENERATOR_ID,
};
