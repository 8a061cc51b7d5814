//! Monte-Carlo oracle for the analytic covariance engine.
//!
//! Per-pair flux fluctuations are drawn from the pair's 2x2 moment matrix
//! (Gaussian linearization); partition noise is added as conditionally
//! independent Gaussian region fluctuations whose covariance matches the
//! binomial partition moments. The sampler mirrors the physical chain
//! (amplify, then split, then sign and sum) rather than the analytic
//! accumulation, so agreement between the two is a real check.
//!
//! Identical seed and inputs give identical output bit for bit; batches
//! carry independently derived RNG streams, so the result is also
//! independent of the worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::exec::map_indexed;
use crate::noise::{pair_moments, DetectionAssignment, NoiseResult, Sign};
use crate::util::mix_seed;
use crate::{Error, Execution, Result};

const MIN_SAMPLES: u64 = 10_000;
const BATCHES: u64 = 20;

/// Lower-triangular Cholesky factor of a small positive semidefinite
/// matrix; semidefinite directions get zero columns.
fn cholesky_psd(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        if d <= 1e-14 * a[j][j].abs().max(1e-300) {
            continue; // singular direction
        }
        l[j][j] = d.sqrt();
        for i in (j + 1)..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / l[j][j];
        }
    }
    l
}

struct ArmSampler {
    /// Signed weights of the counted regions.
    weights: Vec<f64>,
    transmissions: Vec<f64>,
    /// Cholesky factor of the multinomial partition covariance
    /// `mean (diag(t) - t t')`.
    chol: Vec<Vec<f64>>,
}

impl ArmSampler {
    fn build(shares: &[(f64, f64)], mean: f64) -> Self {
        // shares: (weight, transmission) of counted regions only.
        let n = shares.len();
        let t: Vec<f64> = shares.iter().map(|s| s.1).collect();
        let mut cov = vec![vec![0.0; n]; n];
        for r in 0..n {
            for q in 0..n {
                cov[r][q] = if r == q {
                    mean * t[r] * (1.0 - t[r])
                } else {
                    -mean * t[r] * t[q]
                };
            }
        }
        ArmSampler {
            weights: shares.iter().map(|s| s.0).collect(),
            transmissions: t,
            chol: cholesky_psd(&cov),
        }
    }

    /// Signed contribution of this arm given the arm-total fluctuation.
    fn sample(&self, delta_arm: f64, rng: &mut ChaCha12Rng, g: &mut Vec<f64>) -> f64 {
        let n = self.weights.len();
        g.clear();
        for _ in 0..n {
            g.push(StandardNormal.sample(rng));
        }
        let mut s = 0.0;
        for r in 0..n {
            let mut xi = 0.0;
            for k in 0..=r {
                xi += self.chol[r][k] * g[k];
            }
            s += self.weights[r] * (self.transmissions[r] * delta_arm + xi);
        }
        s
    }
}

struct PairSampler {
    /// Cholesky of the 2x2 arm-total covariance.
    l11: f64,
    l21: f64,
    l22: f64,
    probe: ArmSampler,
    conj: ArmSampler,
}

fn build_samplers(assignment: &DetectionAssignment) -> Vec<PairSampler> {
    let eps = assignment.cmrr_imbalance;
    assignment
        .pairs
        .iter()
        .map(|det| {
            let m = pair_moments(&det.pair);
            let l11 = m.var_probe.sqrt();
            let l21 = if l11 > 0.0 { m.cov / l11 } else { 0.0 };
            let l22 = (m.var_conj - l21 * l21).max(0.0).sqrt();
            let counted = |shares: &[crate::noise::Share]| -> Vec<(f64, f64)> {
                shares
                    .iter()
                    .filter(|s| !matches!(s.sign, Sign::Off))
                    .map(|s| {
                        let w = match s.sign {
                            Sign::Plus => 1.0,
                            Sign::Minus => -(1.0 - eps),
                            Sign::Off => 0.0,
                        };
                        (w, s.transmission)
                    })
                    .collect()
            };
            PairSampler {
                l11,
                l21,
                l22,
                probe: ArmSampler::build(&counted(&det.probe), m.mean_probe),
                conj: ArmSampler::build(&counted(&det.conj), m.mean_conj),
            }
        })
        .collect()
}

fn analytic_snl(assignment: &DetectionAssignment) -> f64 {
    assignment
        .pairs
        .iter()
        .map(|det| {
            let m = pair_moments(&det.pair);
            let arm = |shares: &[crate::noise::Share], mean: f64| -> f64 {
                shares
                    .iter()
                    .filter(|s| !matches!(s.sign, Sign::Off))
                    .map(|s| s.transmission * mean)
                    .sum()
            };
            arm(&det.probe, m.mean_probe) + arm(&det.conj, m.mean_conj)
        })
        .sum()
}

/// Sample variance of the signed sum within one batch.
fn batch_variance(samplers: &[PairSampler], m: u64, seed: u64) -> f64 {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    let mut g = Vec::with_capacity(4);
    for _ in 0..m {
        let mut s = 0.0;
        for p in samplers {
            let g1: f64 = StandardNormal.sample(&mut rng);
            let g2: f64 = StandardNormal.sample(&mut rng);
            let dp = p.l11 * g1;
            let dc = p.l21 * g1 + p.l22 * g2;
            s += p.probe.sample(dp, &mut rng, &mut g);
            s += p.conj.sample(dc, &mut rng, &mut g);
        }
        sum += s;
        sumsq += s * s;
    }
    let mf = m as f64;
    (sumsq - sum * sum / mf) / (mf - 1.0)
}

/// Monte-Carlo estimate of the noise of a signed assignment, with the
/// standard error of the NRF from batch means.
pub fn monte_carlo_nrf(
    assignment: &DetectionAssignment,
    n_samples: u64,
    rng_seed: u64,
) -> Result<NoiseResult> {
    monte_carlo_nrf_exec(assignment, n_samples, rng_seed, Execution::default())
}

/// [`monte_carlo_nrf`] with an explicit execution strategy; the result is
/// identical for both strategies.
pub fn monte_carlo_nrf_exec(
    assignment: &DetectionAssignment,
    n_samples: u64,
    rng_seed: u64,
    exec: Execution,
) -> Result<NoiseResult> {
    if n_samples < MIN_SAMPLES {
        return Err(Error::Domain(format!(
            "need at least {MIN_SAMPLES} samples, got {n_samples}"
        )));
    }
    let snl = analytic_snl(assignment);
    if !(snl > 0.0) {
        return Err(Error::ZeroShotNoise);
    }
    let samplers = build_samplers(assignment);
    let m = n_samples / BATCHES;
    let batch_vars = map_indexed(exec, BATCHES as usize, |b| {
        batch_variance(&samplers, m, mix_seed(rng_seed, b as u64))
    });
    let bf = BATCHES as f64;
    let mean_var = batch_vars.iter().sum::<f64>() / bf;
    let spread = batch_vars
        .iter()
        .map(|v| (v - mean_var) * (v - mean_var))
        .sum::<f64>()
        / (bf - 1.0);
    let stderr_var = (spread / bf).sqrt();
    let variance = mean_var + assignment.background * snl;
    let mut r = NoiseResult::from_variance(variance, snl, stderr_var / snl)?;
    // Guard nrf_db for pathological all-cancelling configurations.
    if !r.nrf_db.is_finite() {
        r.nrf_db = f64::NEG_INFINITY;
    }
    Ok(r)
}
