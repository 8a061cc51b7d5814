//! Photocurrent noise models for partially detected twin-beam pairs.
//!
//! Two algebraic routes are exposed side by side:
//!
//! * [`nrf_single_mode`] / [`noise_multimode`] — the published
//!   intensity-difference noise model, `1/(eta (2G-1))`, and its
//!   multimode generalization. These are reference formulas kept exactly
//!   as printed. Note that the printed single-pair loss scaling differs
//!   from the standard beam-splitter result `1 - eta + eta/(2G-1)`;
//!   neither is silently corrected into the other.
//! * [`nrf_covariance`] — a linearized covariance engine for arbitrary
//!   signed assignments of partially detected pairs. It follows standard
//!   loss physics and therefore reproduces `1/(2G-1)` at unit efficiency
//!   and `1 - eta + eta/(2G-1)` under symmetric loss.
//!
//! Bright-seed Gaussian linearization is used throughout: fluctuations
//! are small against mean fluxes, photon-number partition across detector
//! regions carries exact binomial second moments, and distinct pairs are
//! statistically independent.

use crate::{Error, Result};

/// One coherence-area pair: the gain of the four-wave-mixing process and
/// the mean seed photon flux feeding it (arbitrary linear power units).
///
/// Mean probe flux is `G * N0`, mean conjugate flux `(G - 1) * N0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeSqueezedPair {
    pub gain: f64,
    pub seed_flux: f64,
    pub id: String,
}

impl TwoModeSqueezedPair {
    pub fn new(gain: f64, seed_flux: f64, id: impl Into<String>) -> Result<Self> {
        if !(gain >= 1.0) {
            return Err(Error::Domain(format!("gain must be >= 1, got {gain}")));
        }
        if !(seed_flux > 0.0) {
            return Err(Error::Domain(format!(
                "seed flux must be > 0, got {seed_flux}"
            )));
        }
        Ok(Self {
            gain,
            seed_flux,
            id: id.into(),
        })
    }

    pub fn mean_probe_flux(&self) -> f64 {
        self.gain * self.seed_flux
    }

    pub fn mean_conjugate_flux(&self) -> f64 {
        (self.gain - 1.0) * self.seed_flux
    }
}

/// Second moments of the probe/conjugate flux fluctuations of one pair,
/// in the bright-seed linearization.
///
/// Chosen so that perfect difference detection gives
/// `Var(Np - Nc) = N0`, i.e. an NRF of `1/(2G-1)` at unit efficiency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairMoments {
    pub mean_probe: f64,
    pub mean_conj: f64,
    pub var_probe: f64,
    pub var_conj: f64,
    pub cov: f64,
}

/// Linearized flux moments of a pair: `Var(Np) = G(2G-1)N0`,
/// `Var(Nc) = (G-1)(2G-1)N0`, `Cov(Np,Nc) = 2G(G-1)N0`.
pub fn pair_moments(pair: &TwoModeSqueezedPair) -> PairMoments {
    let g = pair.gain;
    let n0 = pair.seed_flux;
    PairMoments {
        mean_probe: g * n0,
        mean_conj: (g - 1.0) * n0,
        var_probe: g * (2.0 * g - 1.0) * n0,
        var_conj: (g - 1.0) * (2.0 * g - 1.0) * n0,
        cov: 2.0 * g * (g - 1.0) * n0,
    }
}

/// The published single-pair intensity-difference noise, exactly as
/// printed: `1 / (eta (2G - 1))`.
///
/// This is the reference formula for a fully detected pair, not the
/// covariance engine's prediction; at `eta < 1` the two disagree (see the
/// module docs).
pub fn nrf_single_mode(gain: f64, eta: f64) -> Result<f64> {
    if !(gain >= 1.0) {
        return Err(Error::Domain(format!("gain must be >= 1, got {gain}")));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Domain(format!(
            "efficiency must be in (0, 1], got {eta}"
        )));
    }
    Ok(1.0 / (eta * (2.0 * gain - 1.0)))
}

/// Inputs of the multimode noise formula: power in fully isolated
/// coherence areas, total power, and the per-mode power/efficiency of the
/// modes split across the detector.
#[derive(Debug, Clone, PartialEq)]
pub struct MultimodeNoiseInputs {
    /// Power in coherence areas isolated on one detector channel.
    pub p_sw: f64,
    /// Total optical power.
    pub p_0: f64,
    /// `(P_i, eta_i)` of each mode partially incident on a channel;
    /// `eta_i` includes the attenuation from being split.
    pub modes: Vec<(f64, f64)>,
    /// Combined detector efficiency.
    pub eta_d: f64,
    /// Common four-wave-mixing gain of all modes.
    pub gain: f64,
}

impl MultimodeNoiseInputs {
    fn validate(&self) -> Result<()> {
        if !(self.p_0 > 0.0) {
            return Err(Error::Domain(format!("P_0 must be > 0, got {}", self.p_0)));
        }
        if self.p_sw < 0.0 || self.modes.iter().any(|&(p, _)| p < 0.0) {
            return Err(Error::Domain("powers must be >= 0".into()));
        }
        let ok_eta = |e: f64| (0.0..=1.0).contains(&e);
        if !ok_eta(self.eta_d) || self.modes.iter().any(|&(_, e)| !ok_eta(e)) {
            return Err(Error::Domain("efficiencies must be in [0, 1]".into()));
        }
        if !(self.gain >= 1.0) {
            return Err(Error::Domain(format!(
                "gain must be >= 1, got {}",
                self.gain
            )));
        }
        let sum: f64 = self.p_sw + self.modes.iter().map(|&(p, _)| p).sum::<f64>();
        if (sum - self.p_0).abs() > 1e-9 * self.p_0 {
            return Err(Error::Domain(format!(
                "P_sw + sum(P_i) = {sum} must equal P_0 = {}",
                self.p_0
            )));
        }
        Ok(())
    }
}

/// The published multimode noise: the reciprocal of
/// `(1/P_0) [P_sw eta_d (2G-1) + sum_i P_i eta_i (2G-1)]`.
pub fn noise_multimode(inputs: &MultimodeNoiseInputs) -> Result<f64> {
    inputs.validate()?;
    let two_g = 2.0 * inputs.gain - 1.0;
    let bracket = (inputs.p_sw * inputs.eta_d * two_g
        + inputs
            .modes
            .iter()
            .map(|&(p, e)| p * e * two_g)
            .sum::<f64>())
        / inputs.p_0;
    if bracket <= 0.0 {
        return Err(Error::ZeroShotNoise);
    }
    Ok(1.0 / bracket)
}

/// Mean and variance of one arm's total detected flux.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmMoments {
    pub mean: f64,
    pub var: f64,
}

/// Means and covariance matrix of the fluxes detected in each region
/// after partitioning one arm.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedArm {
    pub means: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

fn validate_transmissions(ts: &[f64]) -> Result<()> {
    if ts.iter().any(|&t| t < 0.0) {
        return Err(Error::Partition("negative transmission".into()));
    }
    let sum: f64 = ts.iter().sum();
    if sum > 1.0 + 1e-12 {
        return Err(Error::Partition(format!(
            "transmissions sum to {sum} > 1"
        )));
    }
    Ok(())
}

/// Binomial partition of one arm over detector regions with transmissions
/// `ts` (remainder is undetected loss).
///
/// `Var(N_r) = t_r^2 Var(N) + t_r (1 - t_r) mean`,
/// `Cov(N_r, N_q) = t_r t_q (Var(N) - mean)` for `r != q`,
/// detected means scale as `t_r * mean`.
pub fn partition_covariance(arm: ArmMoments, ts: &[f64]) -> Result<PartitionedArm> {
    validate_transmissions(ts)?;
    let n = ts.len();
    let mut cov = vec![vec![0.0; n]; n];
    for r in 0..n {
        for q in 0..n {
            cov[r][q] = if r == q {
                ts[r] * ts[r] * arm.var + ts[r] * (1.0 - ts[r]) * arm.mean
            } else {
                ts[r] * ts[q] * (arm.var - arm.mean)
            };
        }
    }
    Ok(PartitionedArm {
        means: ts.iter().map(|&t| t * arm.mean).collect(),
        cov,
    })
}

/// Signed routing of one detected region share.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    /// Counted on the positive channel.
    Plus,
    /// Counted on the negative (subtracted) channel.
    Minus,
    /// Detected but not used (blocked/ignored in the signed sum).
    Off,
}

impl Sign {
    fn weight(self, cmrr_imbalance: f64) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -(1.0 - cmrr_imbalance),
            Sign::Off => 0.0,
        }
    }

    fn counted(self) -> bool {
        !matches!(self, Sign::Off)
    }
}

/// One region's share of an arm: geometric transmission and routing sign.
#[derive(Debug, Clone, PartialEq)]
pub struct Share {
    pub region: String,
    pub transmission: f64,
    pub sign: Sign,
}

impl Share {
    pub fn new(region: impl Into<String>, transmission: f64, sign: Sign) -> Self {
        Self {
            region: region.into(),
            transmission,
            sign,
        }
    }
}

/// Region shares of one pair's probe and conjugate arms.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDetection {
    pub pair: TwoModeSqueezedPair,
    pub probe: Vec<Share>,
    pub conj: Vec<Share>,
}

/// Which beam regions hit which detector element with which sign, for
/// every pair in the scene, plus detector imperfections.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionAssignment {
    pub pairs: Vec<PairDetection>,
    /// Additive variance in shot-noise units (scattered pump,
    /// electronics floor). Default 0.
    pub background: f64,
    /// Subtraction gain mismatch of the balanced detector: the negative
    /// channel is weighted by `1 - epsilon`. Default 0.
    pub cmrr_imbalance: f64,
}

impl DetectionAssignment {
    pub fn new(pairs: Vec<PairDetection>) -> Self {
        Self {
            pairs,
            background: 0.0,
            cmrr_imbalance: 0.0,
        }
    }
}

/// Variance, shot-noise level and their ratio for one signed measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseResult {
    /// Signed-sum photocurrent variance, in flux units.
    pub variance: f64,
    /// Shot-noise level: the variance coherent light of the same detected
    /// power would produce.
    pub snl: f64,
    /// `variance / snl`; below one means squeezing.
    pub nrf: f64,
    /// `10 log10(nrf)`.
    pub nrf_db: f64,
    /// Statistical uncertainty on `nrf` (Monte-Carlo engine only).
    pub stderr_nrf: f64,
}

impl NoiseResult {
    pub(crate) fn from_variance(variance: f64, snl: f64, stderr_nrf: f64) -> Result<Self> {
        if !(snl > 0.0) {
            return Err(Error::ZeroShotNoise);
        }
        let nrf = variance / snl;
        Ok(NoiseResult {
            variance,
            snl,
            nrf,
            nrf_db: 10.0 * nrf.log10(),
            stderr_nrf,
        })
    }
}

/// Per-pair contribution to the signed-sum variance and the shot-noise
/// level, in closed form.
///
/// With within-arm signed weights `w_r` and transmissions `t_r`,
/// the arm contributes `(sum w t)^2 (Var - mean) + (sum w^2 t) mean`, and
/// the two arms couple through `2 (sum w t)_p (sum w t)_c Cov(Np, Nc)`.
pub(crate) fn pair_variance_snl(det: &PairDetection, cmrr_imbalance: f64) -> Result<(f64, f64)> {
    let m = pair_moments(&det.pair);
    let arm = |shares: &[Share], mean: f64, var: f64| -> Result<(f64, f64, f64)> {
        let ts: Vec<f64> = shares.iter().map(|s| s.transmission).collect();
        validate_transmissions(&ts)?;
        let mut wt = 0.0;
        let mut w2t = 0.0;
        let mut counted_t = 0.0;
        for s in shares {
            let w = s.sign.weight(cmrr_imbalance);
            wt += w * s.transmission;
            w2t += w * w * s.transmission;
            if s.sign.counted() {
                counted_t += s.transmission;
            }
        }
        let var_arm = wt * wt * (var - mean) + w2t * mean;
        Ok((wt, var_arm, counted_t * mean))
    };
    let (ap, var_p, snl_p) = arm(&det.probe, m.mean_probe, m.var_probe)?;
    let (ac, var_c, snl_c) = arm(&det.conj, m.mean_conj, m.var_conj)?;
    Ok((var_p + var_c + 2.0 * ap * ac * m.cov, snl_p + snl_c))
}

/// Analytic noise of the signed sum over all detected regions.
///
/// Pairs are statistically independent, so the total variance is the sum
/// of per-pair contributions; the background adds
/// `background * SNL` to the variance.
pub fn nrf_covariance(assignment: &DetectionAssignment) -> Result<NoiseResult> {
    let mut variance = 0.0;
    let mut snl = 0.0;
    for det in &assignment.pairs {
        let (v, s) = pair_variance_snl(det, assignment.cmrr_imbalance)?;
        variance += v;
        snl += s;
    }
    NoiseResult::from_variance(variance + assignment.background * snl, snl, 0.0)
}
