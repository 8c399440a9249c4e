//! False-alarm and detection probabilities under the exponential
//! square-law noise model.
//!
//! A square-law sample has density `(1/2λ) exp(-x/2λ)`, i.e. mean `2λ`, with
//! `λ = μ` for noise alone and `λ = μ(1 + S)` with a target of average SNR
//! `S`. For the cell-averaging statistic `Z` (a sum of `w` such samples) the
//! threshold `a Z + b` gives
//!
//! ```text
//! PFA = (1 + a)^-w           * exp(-b / 2μ)
//! PD  = (1 + a/(1 + S))^-w   * exp(-b / 2μ(1 + S))
//! ```
//!
//! `w` is always the reference-cell count (the full window).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile used for Wilson intervals.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Trials per independently seeded generator stream.
const MC_CHUNK: u64 = 1 << 16;

/// Smallest Monte Carlo run accepted by [`mc_estimate`].
pub const MIN_TRIALS: u64 = 10_000;

fn check_threshold(a: f64, b: f64) -> Result<()> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!("a = {a} must be finite and >= 0")));
    }
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::Domain(format!("b = {b} must be finite and >= 0")));
    }
    Ok(())
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Domain(format!("mu = {mu} must be positive")));
    }
    Ok(())
}

fn check_w(w: usize) -> Result<()> {
    if w == 0 {
        return Err(Error::Domain("reference cell count must be >= 1".into()));
    }
    Ok(())
}

fn check_snr(s: f64) -> Result<()> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!("snr = {s} must be finite and >= 0")));
    }
    Ok(())
}

/// `(1 + a)^-w`: the false-alarm probability at `b = 0`, and its supremum over μ.
pub fn pfa_upper_bound(a: f64, w: usize) -> Result<f64> {
    check_threshold(a, 0.0)?;
    check_w(w)?;
    Ok((-(w as f64) * a.ln_1p()).exp())
}

pub fn pfa_closed_form(a: f64, b: f64, mu: f64, w: usize) -> Result<f64> {
    check_threshold(a, b)?;
    check_mu(mu)?;
    Ok(pfa_upper_bound(a, w)? * (-b / (2.0 * mu)).exp())
}

pub fn pd_closed_form(a: f64, b: f64, mu: f64, s: f64, w: usize) -> Result<f64> {
    check_threshold(a, b)?;
    check_mu(mu)?;
    check_snr(s)?;
    check_w(w)?;
    let lambda = 1.0 + s;
    Ok((-(w as f64) * (a / lambda).ln_1p()).exp() * (-b / (2.0 * mu * lambda)).exp())
}

/// Inverts [`pfa_upper_bound`]: the scale that yields `pfa_ub` with `w` reference cells.
pub fn solve_a_for_bound(pfa_ub: f64, w: usize) -> Result<f64> {
    if !(pfa_ub > 0.0 && pfa_ub <= 1.0) {
        return Err(Error::Domain(format!("bound {pfa_ub} outside (0, 1]")));
    }
    check_w(w)?;
    Ok((-pfa_ub.ln() / w as f64).exp_m1())
}

/// Wilson score interval at 95%: `(center, half_width)`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    (center, half)
}

/// Probability summary, either closed-form or Monte Carlo.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionStats {
    pub pfa: f64,
    pub pd: f64,
    pub pfa_upper_bound: f64,
    /// Zero for closed-form results.
    pub trials: u64,
    /// 95% Wilson half-width of `pfa` (zero for closed-form results).
    pub wilson_halfwidth: f64,
    /// 95% Wilson half-width of `pd`.
    pub pd_wilson_halfwidth: f64,
}

impl DetectionStats {
    pub fn closed_form(a: f64, b: f64, mu: f64, s: f64, w: usize) -> Result<Self> {
        Ok(Self {
            pfa: pfa_closed_form(a, b, mu, w)?,
            pd: pd_closed_form(a, b, mu, s, w)?,
            pfa_upper_bound: pfa_upper_bound(a, w)?,
            trials: 0,
            wilson_halfwidth: 0.0,
            pd_wilson_halfwidth: 0.0,
        })
    }
}

/// Inputs to a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub a: f64,
    pub b: f64,
    pub mu: f64,
    pub snr: f64,
    pub w: usize,
    /// Guard cells are excluded from `Z`; they do not change the single-cell
    /// statistics of independent samples and are recorded for completeness.
    pub guard: usize,
    pub trials: u64,
    pub seed: u64,
}

/// Simulates the single-cell decision `X > a Σ X_i + b`.
///
/// Each trial draws `w` reference samples with mean `2μ` and two CUT samples:
/// one with mean `2μ` (counted towards PFA) and one with mean `2μ(1 + S)`
/// (counted towards PD). Trials are split into fixed chunks, each with its own
/// ChaCha stream keyed by the chunk index, so the result depends only on the
/// seed.
pub fn mc_estimate(cfg: &McConfig) -> Result<DetectionStats> {
    check_threshold(cfg.a, cfg.b)?;
    check_mu(cfg.mu)?;
    check_snr(cfg.snr)?;
    check_w(cfg.w)?;
    if cfg.trials < MIN_TRIALS {
        return Err(Error::Domain(format!(
            "{} trials is below the minimum of {MIN_TRIALS}",
            cfg.trials
        )));
    }
    let chunks = cfg.trials.div_ceil(MC_CHUNK);
    let noise_mean = 2.0 * cfg.mu;
    let target_mean = noise_mean * (1.0 + cfg.snr);
    let (false_alarms, detections) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(c);
            let n = MC_CHUNK.min(cfg.trials - c * MC_CHUNK);
            let mut fa = 0u64;
            let mut det = 0u64;
            for _ in 0..n {
                let mut z = 0.0;
                for _ in 0..cfg.w {
                    let x: f64 = Exp1.sample(&mut rng);
                    z += x;
                }
                let threshold = cfg.a * noise_mean * z + cfg.b;
                let h0: f64 = Exp1.sample(&mut rng);
                let h1: f64 = Exp1.sample(&mut rng);
                fa += u64::from(noise_mean * h0 > threshold);
                det += u64::from(target_mean * h1 > threshold);
            }
            (fa, det)
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    let n = cfg.trials as f64;
    Ok(DetectionStats {
        pfa: false_alarms as f64 / n,
        pd: detections as f64 / n,
        pfa_upper_bound: pfa_upper_bound(cfg.a, cfg.w)?,
        trials: cfg.trials,
        wilson_halfwidth: wilson_interval(false_alarms, cfg.trials).1,
        pd_wilson_halfwidth: wilson_interval(detections, cfg.trials).1,
    })
}

/// Which threshold parameter a ROC sweep varies.
#[derive(Debug, Clone, PartialEq)]
pub enum RocSweep {
    /// Vary `a` at a fixed offset `b`.
    Scale { values: Vec<f64>, offset_b: f64 },
    /// Vary `b` at a fixed scale `a`.
    Offset { values: Vec<f64>, scale_a: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub param: f64,
    pub pfa: f64,
    pub pd: f64,
}

/// Closed-form `(pfa, pd)` pairs along a sweep, in sweep order.
pub fn roc_curve(sweep: &RocSweep, mu: f64, s: f64, w: usize) -> Result<Vec<RocPoint>> {
    let eval = |a: f64, b: f64, param: f64| -> Result<RocPoint> {
        Ok(RocPoint {
            param,
            pfa: pfa_closed_form(a, b, mu, w)?,
            pd: pd_closed_form(a, b, mu, s, w)?,
        })
    };
    match sweep {
        RocSweep::Scale { values, offset_b } => {
            values.iter().map(|&a| eval(a, *offset_b, a)).collect()
        }
        RocSweep::Offset { values, scale_a } => {
            values.iter().map(|&b| eval(*scale_a, b, b)).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn no_threshold_always_fires() {
        assert_eq!(pfa_closed_form(0.0, 0.0, 3.0, 10).unwrap(), 1.0);
        assert_eq!(pfa_upper_bound(0.0, 40).unwrap(), 1.0);
    }

    #[test]
    fn fixed_level_reduction() {
        let b = 2.0 * 100f64.ln();
        assert!((pfa_closed_form(0.0, b, 1.0, 40).unwrap() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn product_form() {
        let v = pfa_closed_form(1.0, 20.0, 5.0, 40).unwrap();
        let expected = 2f64.powi(-40) * (-2f64).exp();
        assert!((v - expected).abs() / expected < 1e-13);
    }

    #[test]
    fn published_bound_values_with_twenty_cells() {
        assert!((pfa_upper_bound(1.0, 20).unwrap() - 9.5367e-7).abs() < 1e-10);
        assert!((pfa_upper_bound(3.0, 20).unwrap() - 9.095e-13).abs() < 1e-15);
    }

    #[test]
    fn solve_inverts_bound() {
        assert_eq!(solve_a_for_bound(1.0, 20).unwrap(), 0.0);
        assert!((solve_a_for_bound(9.5367431640625e-7, 20).unwrap() - 1.0).abs() < 1e-12);
        assert!(solve_a_for_bound(0.0, 20).is_err());
        assert!(solve_a_for_bound(1.5, 20).is_err());
    }

    #[test]
    fn pd_limits() {
        let pfa = pfa_closed_form(0.7, 3.0, 2.0, 16).unwrap();
        assert!((pd_closed_form(0.7, 3.0, 2.0, 0.0, 16).unwrap() - pfa).abs() < 1e-15);
        assert!((pd_closed_form(1.0, 20.0, 5.0, 1e12, 40).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn domain_errors() {
        assert!(pfa_closed_form(-1.0, 0.0, 1.0, 4).is_err());
        assert!(pfa_closed_form(1.0, -1.0, 1.0, 4).is_err());
        assert!(pfa_closed_form(1.0, 1.0, 0.0, 4).is_err());
        assert!(pfa_closed_form(1.0, 1.0, 1.0, 0).is_err());
        assert!(pd_closed_form(1.0, 1.0, 1.0, -0.5, 4).is_err());
    }

    #[test]
    fn wilson_interval_is_sane() {
        let (c, h) = wilson_interval(0, 1_000_000);
        assert!(c > 0.0 && h > 0.0 && c - h < 1e-12);
        let (c, h) = wilson_interval(500, 1000);
        assert!((c - 0.5).abs() < 1e-12);
        assert!((h - 0.0309).abs() < 1e-3);
    }

    #[test]
    fn monte_carlo_without_threshold_is_one() {
        let cfg = McConfig { a: 0.0, b: 0.0, mu: 2.0, snr: 0.0, w: 8, guard: 2, trials: 20_000, seed: 1 };
        let stats = mc_estimate(&cfg).unwrap();
        assert_eq!(stats.pfa, 1.0);
        assert_eq!(stats.pd, 1.0);
    }

    #[test]
    fn monte_carlo_rejects_small_runs() {
        let cfg = McConfig { a: 1.0, b: 0.0, mu: 2.0, snr: 0.0, w: 8, guard: 2, trials: 9_999, seed: 1 };
        assert!(mc_estimate(&cfg).is_err());
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let cfg = McConfig { a: 0.1, b: 2.0, mu: 1.5, snr: 3.0, w: 10, guard: 2, trials: 200_000, seed: 9 };
        assert_eq!(mc_estimate(&cfg).unwrap(), mc_estimate(&cfg).unwrap());
        let other = McConfig { seed: 10, ..cfg };
        assert_ne!(mc_estimate(&cfg).unwrap().pfa, mc_estimate(&other).unwrap().pfa);
    }

    #[test]
    fn roc_endpoints_and_fixed_level_curve() {
        let sweep = RocSweep::Offset { values: vec![0.0, 1.0, 5.0, 1e6], scale_a: 0.0 };
        let roc = roc_curve(&sweep, 2.0, 4.0, 16).unwrap();
        assert_eq!((roc[0].pfa, roc[0].pd), (1.0, 1.0));
        assert!(roc[3].pfa < 1e-12 && roc[3].pd < 1e-12);
        for p in &roc {
            assert!((p.pfa - (-p.param / 4.0).exp()).abs() < 1e-15);
            assert!((p.pd - (-p.param / 20.0).exp()).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn solve_round_trip(a in 0.0f64..5.0, w in 1usize..80) {
            let ub = pfa_upper_bound(a, w).unwrap();
            prop_assume!(ub > 1e-300);
            let back = solve_a_for_bound(ub, w).unwrap();
            prop_assert!((back - a).abs() <= 1e-10 * (1.0 + a));
        }

        #[test]
        fn bound_dominates_and_monotone(
            a in 0.0f64..3.0, b in 0.0f64..60.0, mu in 0.1f64..100.0, w in 1usize..60,
        ) {
            let pfa = pfa_closed_form(a, b, mu, w).unwrap();
            let ub = pfa_upper_bound(a, w).unwrap();
            prop_assert!(pfa <= ub);
            prop_assert!(pfa <= pfa_closed_form(a, b, mu * 1.5, w).unwrap());
            prop_assert!(pfa >= pfa_closed_form(a + 0.1, b, mu, w).unwrap());
            prop_assert!(pfa >= pfa_closed_form(a, b + 1.0, mu, w).unwrap());
            prop_assert!(pfa >= pfa_closed_form(a, b, mu, w + 1).unwrap());
        }

        #[test]
        fn pd_with_zero_snr_equals_pfa(
            a in 0.0f64..3.0, b in 0.0f64..60.0, mu in 0.1f64..100.0, w in 1usize..60,
        ) {
            let pfa = pfa_closed_form(a, b, mu, w).unwrap();
            let pd = pd_closed_form(a, b, mu, 0.0, w).unwrap();
            prop_assert!((pfa - pd).abs() <= 1e-12 * pfa.max(1e-300));
        }

        #[test]
        fn roc_pd_dominates_pfa(
            mut values in prop::collection::vec(0.0f64..80.0, 2..20),
            a in 0.0f64..2.0, mu in 0.5f64..20.0, s in 0.01f64..100.0, w in 2usize..40,
        ) {
            values.sort_by(f64::total_cmp);
            let roc = roc_curve(&RocSweep::Offset { values, scale_a: a }, mu, s, w).unwrap();
            for pair in roc.windows(2) {
                prop_assert!(pair[1].pfa <= pair[0].pfa && pair[1].pd <= pair[0].pd);
            }
            for p in &roc {
                prop_assert!(p.pd >= p.pfa);
            }
        }
    }
}
