//! Shared scenario fixtures for tests, benches and bundled scenes.
//!
//! The beam scale follows the measured image-plane spot sizes (1.6 mm
//! probe, 0.8 mm conjugate FWHM); coherence-area widths are set so that
//! roughly four areas fit across the probe FWHM. Standalone squeezing
//! levels of the fixture pairs are anchored at just under 1 dB for the
//! weakly correlated area and roughly 2 dB for the strongly correlated
//! one.

use crate::geometry::{BeamLayout, CoherenceArea, FWHM_PER_SIGMA};
use crate::noise::TwoModeSqueezedPair;
use crate::scan::{linspace, ScanPlan};

/// Probe beam FWHM in its image plane, mm.
pub const PROBE_FWHM_MM: f64 = 1.6;

/// Conjugate/probe footprint ratio (0.8 mm vs 1.6 mm spots).
pub const CONJ_SCALE: f64 = 0.5;

/// Coherence-area intensity std-dev, mm.
pub const AREA_SIGMA_MM: f64 = 0.15;

/// Probe beam intensity std-dev, mm.
pub fn probe_sigma() -> f64 {
    PROBE_FWHM_MM / FWHM_PER_SIGMA
}

/// Gain whose fully detected pair squeezes by `db` (positive number of
/// dB below shot noise): `1/(2G-1) = 10^(-db/10)`.
pub fn gain_for_standalone_db(db: f64) -> f64 {
    (10f64.powf(db / 10.0) + 1.0) / 2.0
}

fn area(id: &str, x: f64, gain: f64) -> CoherenceArea {
    CoherenceArea::new(
        (x, 0.0),
        AREA_SIGMA_MM,
        TwoModeSqueezedPair::new(gain, 1.0, id).unwrap(),
    )
    .unwrap()
}

/// Two-area scene: a strongly squeezed pair (about 2 dB standalone) on
/// the A side of the probe and a weak one (about 0.8 dB) on the other.
pub fn two_area_layout() -> BeamLayout {
    BeamLayout::new(
        (0.0, 0.0),
        vec![
            area("strong", -0.4, gain_for_standalone_db(2.0)),
            area("weak", 0.4, gain_for_standalone_db(0.8)),
        ],
        CONJ_SCALE,
    )
    .unwrap()
}

/// Three areas aligned horizontally: weak on the left, a middle pair,
/// and the strong pair on the right. The gap between the middle and
/// right areas sits near 0.2 mm, where a cut isolates both.
pub fn three_area_layout() -> BeamLayout {
    BeamLayout::new(
        (0.0, 0.0),
        vec![
            area("weak", -0.4, gain_for_standalone_db(0.8)),
            area("mid", 0.0, gain_for_standalone_db(1.0)),
            area("strong", 0.4, gain_for_standalone_db(2.0)),
        ],
        CONJ_SCALE,
    )
    .unwrap()
}

/// Pump-symmetric layout with unit conjugate scale, for mirror-pairing
/// properties.
pub fn symmetric_layout() -> BeamLayout {
    BeamLayout::new(
        (0.0, 0.0),
        vec![area("left", -0.3, 2.0), area("right", 0.3, 2.0)],
        1.0,
    )
    .unwrap()
}

/// The raster protocol: 40 probe steps by 15 conjugate steps spanning
/// 2.5 beam sigmas on each arm, 600 cells total.
pub fn raster_plan() -> ScanPlan {
    let probe_half = 2.5 * probe_sigma();
    let conj_half = probe_half * CONJ_SCALE;
    ScanPlan::analytic(
        linspace(-probe_half, probe_half, 40),
        linspace(-conj_half, conj_half, 15),
    )
}

/// Mode-count anchor: pump waist (mm), wavelength (nm) and acceptance
/// half-angle (mrad) calibrated to support about 70 modes.
pub const MODE_COUNT_PUMP_WAIST_MM: f64 = 0.65;
pub const MODE_COUNT_WAVELENGTH_NM: f64 = 795.0;
pub const MODE_COUNT_ACCEPTANCE_MRAD: f64 = 3.25;
