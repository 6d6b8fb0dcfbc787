use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Geometric};
use serde::{Deserialize, Serialize};

use super::bits::BitStream;
use crate::error::{check_unit, Error, Result};
use crate::optics::ClickProbabilities;

/// Name of the generator behind every seeded stream, for output metadata.
pub const GENERATOR_ID: &str = "ChaCha8Rng (rand_chacha 0.9), seed_from_u64 + set_stream";

/// Seeded generator for independent substream `stream` of `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Per-shot Bernoulli probabilities of the physical truth being simulated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotModel {
    pub p_idler: f64,
    /// Signal click probability in the bin matched to an idler click.
    pub p_coinc: f64,
    /// Signal click probability in the bin matched to an idler no-click.
    pub p_noncoinc: f64,
    /// Signal click probability with no returned light (background only).
    pub p_background: f64,
}

impl ShotModel {
    pub fn present(p: &ClickProbabilities) -> Self {
        Self {
            p_idler: p.p_i,
            p_coinc: p.p_h1_i1,
            p_noncoinc: p.p_h1_i0,
            p_background: p.p_h0,
        }
    }

    pub fn absent(p: &ClickProbabilities) -> Self {
        Self {
            p_idler: p.p_i,
            p_coinc: p.p_h0,
            p_noncoinc: p.p_h0,
            p_background: p.p_h0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("p_idler", self.p_idler)?;
        check_unit("p_coinc", self.p_coinc)?;
        check_unit("p_noncoinc", self.p_noncoinc)?;
        check_unit("p_background", self.p_background)?;
        Ok(())
    }
}

/// Where, if anywhere, the object is.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "state")]
pub enum Target {
    Absent,
    /// Returned light lands `delay` bins after its pump shot, for every pump
    /// shot from `onset` on.
    Present { delay: u64, onset: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClickStreams {
    pub idler: BitStream,
    pub signal: BitStream,
    pub seed: u64,
    pub stream_id: u64,
    pub target: Target,
    /// True object distance, when known.
    pub distance_m: Option<f64>,
}

impl ClickStreams {
    pub fn len(&self) -> u64 {
        self.idler.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idler.is_empty()
    }
}

/// Sets each bit of `[start, end)` independently with probability `p`, by
/// geometric skipping over the gaps between set bits.
fn bernoulli_fill<R: Rng + ?Sized>(bits: &mut BitStream, start: u64, end: u64, p: f64, rng: &mut R) {
    if start >= end || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        bits.fill(start, end);
        return;
    }
    let gap = Geometric::new(p).expect("p in (0, 1)");
    let mut pos = start;
    loop {
        let skip = gap.sample(rng);
        match pos.checked_add(skip) {
            Some(i) if i < end => {
                bits.set(i, true);
                pos = i + 1;
            }
            _ => break,
        }
    }
}

/// Simulates `n` shots of idler and signal clicks.
///
/// The signal bin `i + delay` paired with an idler click at `i` clicks with
/// `p_coinc`, the bin paired with an idler no-click with `p_noncoinc`. Bins
/// not reached by returned light (before `onset + delay`, or every bin when
/// the object is absent) click with `p_background`. The whole signal outcome,
/// returned light and background together, is what gets delayed.
pub fn generate_streams(model: &ShotModel, target: Target, n: u64, seed: u64, stream_id: u64) -> Result<ClickStreams> {
    model.validate()?;
    let mut rng = trial_rng(seed, stream_id);
    let mut idler = BitStream::zeros(n);
    let mut signal = BitStream::zeros(n);
    bernoulli_fill(&mut idler, 0, n, model.p_idler, &mut rng);
    match target {
        Target::Absent => bernoulli_fill(&mut signal, 0, n, model.p_background, &mut rng),
        Target::Present { delay, onset } => {
            let first_lit = onset
                .checked_add(delay)
                .ok_or_else(|| Error::Setup("onset + delay overflows the shot index".into()))?;
            bernoulli_fill(&mut signal, 0, first_lit.min(n), model.p_background, &mut rng);
            bernoulli_fill(&mut signal, first_lit.min(n), n, model.p_noncoinc, &mut rng);
            let end = n.saturating_sub(delay);
            let heralds: Vec<u64> = idler.ones().filter(|&i| i >= onset && i < end).collect();
            for i in heralds {
                signal.set(i + delay, rng.random::<f64>() < model.p_coinc);
            }
        }
    }
    Ok(ClickStreams {
        idler,
        signal,
        seed,
        stream_id,
        target,
        distance_m: None,
    })
}

/// Click counts over one window of shots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WindowCounts {
    /// Signal clicks in bins matched to idler clicks.
    pub x: u64,
    /// Signal clicks in bins matched to idler no-clicks.
    pub y: u64,
    /// Idler clicks.
    pub k: u64,
    /// Shots.
    pub n: u64,
}

/// Counts idler shots `[offset, offset + n)` against signal bins shifted by `delay`.
pub fn count_window(streams: &ClickStreams, offset: u64, n: u64, delay: u64) -> Result<WindowCounts> {
    let len = streams.len();
    let end = offset.checked_add(n).and_then(|e| e.checked_add(delay));
    match end {
        Some(e) if e <= len => {}
        _ => {
            return Err(Error::OutOfBounds {
                start: offset,
                end: offset.saturating_add(n).saturating_add(delay),
                len,
            })
        }
    }
    let (mut x, mut y, mut k) = (0u64, 0u64, 0u64);
    let mut done = 0u64;
    while done < n {
        let take = (n - done).min(64);
        let mask = if take == 64 { u64::MAX } else { (1u64 << take) - 1 };
        let i = streams.idler.word_at(offset + done) & mask;
        let s = streams.signal.word_at(offset + delay + done) & mask;
        x += (i & s).count_ones() as u64;
        y += (!i & s).count_ones() as u64;
        k += i.count_ones() as u64;
        done += take;
    }
    Ok(WindowCounts { x, y, k, n })
}

/// Draws window counts directly from their binomial distributions, equivalent
/// in distribution to counting a delay-matched stream of `n` shots.
pub fn sample_window_counts<R: Rng + ?Sized>(model: &ShotModel, n: u64, rng: &mut R) -> Result<WindowCounts> {
    model.validate()?;
    let draw = |trials: u64, p: f64, rng: &mut R| -> u64 {
        if trials == 0 {
            0
        } else {
            Binomial::new(trials, p).expect("validated probability").sample(rng)
        }
    };
    let k = draw(n, model.p_idler, rng);
    let x = draw(k, model.p_coinc, rng);
    let y = draw(n - k, model.p_noncoinc, rng);
    Ok(WindowCounts { x, y, k, n })
}
