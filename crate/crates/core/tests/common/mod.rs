//! Independent reference computations shared by the oracle and acceptance suites.
#![allow(dead_code)]

use qirange_core::{
    count_window, generate_streams, sample_window_counts, trial_rng, ShotModel, Target, WindowCounts,
};
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, Discrete};

/// Photon-number truncation of the Fock sums.
pub const FOCK_CUTOFF: u32 = 2000;

/// Signal and idler click probabilities by explicit Fock-basis summation.
#[derive(Debug, Clone, Copy)]
pub struct FockClicks {
    pub p_i: f64,
    pub p_h1_i1: f64,
    pub p_h1_i0: f64,
    pub p_h0: f64,
    pub p_h1_ci: f64,
}

/// `<n| pi_noclick |n>` written out term by term, not via the library.
pub fn noclick(n: u32, loss: f64, bg: f64) -> f64 {
    let b1 = 1.0 + bg;
    let r = (b1 - loss) / b1;
    let mut w = 1.0 / b1;
    for _ in 0..n {
        w *= r;
    }
    w
}

/// Thermal (and TMSV marginal) photon-number distribution.
pub fn thermal_weight(n: u32, mean: f64) -> f64 {
    (n as f64 * (mean / (mean + 1.0)).ln()).exp() / (mean + 1.0)
}

/// Sums the joint photon-number distribution of a TMSV (perfectly correlated
/// pairs) against both detectors' no-click diagonals.
pub fn fock_clicks(nbar: f64, signal_loss: f64, bg_s: f64, eta_i: f64, bg_i: f64) -> FockClicks {
    let mut idler_dark = 0.0;
    let mut signal_dark = 0.0;
    let mut both_dark = 0.0;
    for n in 0..FOCK_CUTOFF {
        let p = thermal_weight(n, nbar);
        let wi = noclick(n, eta_i, bg_i);
        let ws = noclick(n, signal_loss, bg_s);
        idler_dark += p * wi;
        signal_dark += p * ws;
        both_dark += p * wi * ws;
    }
    let p_i = 1.0 - idler_dark;
    FockClicks {
        p_i,
        p_h1_i1: 1.0 - (signal_dark - both_dark) / p_i,
        p_h1_i0: 1.0 - both_dark / idler_dark,
        p_h0: 1.0 - noclick(0, 0.0, bg_s),
        p_h1_ci: 1.0 - signal_dark,
    }
}

/// Log of the binomial likelihood ratio of the counts under the two hypotheses.
pub fn binomial_log_ratio(x: u64, y: u64, k: u64, n: u64, p11: f64, p10: f64, p0: f64) -> f64 {
    let lp = |c: u64, t: u64, p: f64| Binomial::new(p, t).unwrap().ln_pmf(c);
    (lp(x, k, p11) + lp(y, n - k, p10)) - (lp(x, k, p0) + lp(y, n - k, p0))
}

/// Two-sample chi-square on equal-size samples of non-negative integers.
/// Adjacent values are merged from the left until each bin holds at least 10
/// pooled observations. Returns the p-value.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let max = a.iter().chain(b).copied().max().unwrap_or(0) as usize;
    let mut ha = vec![0u64; max + 1];
    let mut hb = vec![0u64; max + 1];
    for &v in a {
        ha[v as usize] += 1;
    }
    for &v in b {
        hb[v as usize] += 1;
    }
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut ca, mut cb) = (0.0, 0.0);
    for (x, y) in ha.into_iter().zip(hb) {
        ca += x as f64;
        cb += y as f64;
        if ca + cb >= 10.0 {
            bins.push((ca, cb));
            ca = 0.0;
            cb = 0.0;
        }
    }
    if ca + cb > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += ca;
                last.1 += cb;
            }
            None => bins.push((ca, cb)),
        }
    }
    if bins.len() < 2 {
        return 1.0;
    }
    let stat: f64 = bins.iter().map(|(x, y)| (x - y) * (x - y) / (x + y)).sum();
    let df = (bins.len() - 1) as f64;
    1.0 - ChiSquared::new(df).unwrap().cdf(stat)
}

/// Window counts from the per-shot simulator and from the binomial shortcut,
/// `windows` each of `n` shots.
pub fn paired_window_samples(model: &ShotModel, n: u64, windows: u64, seed: u64) -> (Vec<WindowCounts>, Vec<WindowCounts>) {
    let delay = 7;
    let streams = generate_streams(model, Target::Present { delay, onset: 0 }, windows * n + delay, seed, 0).unwrap();
    let per_shot = (0..windows)
        .map(|w| count_window(&streams, w * n, n, delay).unwrap())
        .collect();
    let mut rng = trial_rng(seed, 1);
    let shortcut = (0..windows)
        .map(|_| sample_window_counts(model, n, &mut rng).unwrap())
        .collect();
    (per_shot, shortcut)
}

/// Smallest chi-square p-value over the `x`, `y` and `k` marginals.
pub fn sampler_agreement(model: &ShotModel, n: u64, windows: u64, seed: u64) -> f64 {
    let (a, b) = paired_window_samples(model, n, windows, seed);
    let pick = |v: &[WindowCounts], f: fn(&WindowCounts) -> u64| v.iter().map(f).collect::<Vec<_>>();
    [|w: &WindowCounts| w.x, |w: &WindowCounts| w.y, |w: &WindowCounts| w.k]
        .into_iter()
        .map(|f| chi_square_two_sample(&pick(&a, f), &pick(&b, f)))
        .fold(1.0, f64::min)
}

/// The grid used by the Fock cross-check: mean photons, signal transmission,
/// signal background, idler background. Idler efficiency is swept alongside.
pub fn fock_grid() -> Vec<(f64, f64, f64, f64, f64)> {
    let mut v = Vec::new();
    for &nbar in &[1e-3, 2.19e-2, 0.3, 2.0] {
        for &loss in &[0.0, 4.42e-3, 0.1, 0.9] {
            for &bg_s in &[0.0, 5.06e-2, 0.5] {
                for &bg_i in &[0.0, 4.49e-4, 0.2] {
                    for &eta_i in &[0.5, 1.0] {
                        v.push((nbar, loss, bg_s, eta_i, bg_i));
                    }
                }
            }
        }
    }
    v
}

/// Count grid for the LLV linear-form check: `(x, y, k, n)`.
pub fn count_grid() -> Vec<(u64, u64, u64, u64)> {
    let mut v = Vec::new();
    for &n in &[10u64, 1_000, 52_900, 1_760_000] {
        for &kf in &[0.0, 0.011, 0.5, 1.0] {
            let k = (n as f64 * kf) as u64;
            for &xf in &[0.0, 0.05, 1.0] {
                for &yf in &[0.0, 0.048, 1.0] {
                    let x = (k as f64 * xf) as u64;
                    let y = ((n - k) as f64 * yf) as u64;
                    v.push((x, y, k, n));
                }
            }
        }
    }
    v
}
