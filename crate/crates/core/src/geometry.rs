//! Spatial model: Gaussian coherence-area footprints, detector regions,
//! geometric transmissions, probe/conjugate inversion symmetry and
//! defocus broadening.
//!
//! Units: mm for transverse coordinates, cm along the propagation axis,
//! nm for wavelength.

use statrs::function::erf::erfc;

use crate::noise::TwoModeSqueezedPair;
use crate::{Error, Result};

/// Default wavelength (Rb D1 line), nm.
pub const DEFAULT_WAVELENGTH_NM: f64 = 795.0;

/// FWHM of a Gaussian per unit sigma.
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Keep coordinates below (<=) the edge.
    Below,
    /// Keep coordinates above (>=) the edge.
    Above,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    Probe,
    Conjugate,
}

/// Point in the transverse plane, mm.
pub type Point = (f64, f64);

/// One coherence area in the probe image plane: isotropic Gaussian
/// intensity footprint plus the squeezed pair it carries.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceArea {
    pub center: Point,
    /// Gaussian intensity standard deviation, mm.
    pub sigma: f64,
    pub pair: TwoModeSqueezedPair,
}

impl CoherenceArea {
    pub fn new(center: Point, sigma: f64, pair: TwoModeSqueezedPair) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::Domain(format!("sigma must be > 0, got {sigma}")));
        }
        Ok(Self {
            center,
            sigma,
            pair,
        })
    }

    pub fn fwhm(&self) -> f64 {
        FWHM_PER_SIGMA * self.sigma
    }
}

/// The full quantum scene: pump center, coherence areas, and the
/// conjugate/probe footprint ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamLayout {
    pub pump_center: Point,
    pub areas: Vec<CoherenceArea>,
    /// Conjugate footprint size relative to the probe footprint.
    pub conj_scale: f64,
    /// Image-plane positions along propagation, cm from the cell center.
    pub probe_image_z: f64,
    pub conj_image_z: f64,
}

impl BeamLayout {
    pub fn new(pump_center: Point, areas: Vec<CoherenceArea>, conj_scale: f64) -> Result<Self> {
        if !(conj_scale > 0.0) {
            return Err(Error::Domain(format!(
                "conj_scale must be > 0, got {conj_scale}"
            )));
        }
        let mut ids: Vec<&str> = areas.iter().map(|a| a.pair.id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Domain("area ids must be unique".into()));
        }
        Ok(Self {
            pump_center,
            areas,
            conj_scale,
            probe_image_z: 94.0,
            conj_image_z: 32.0,
        })
    }

    /// Content fingerprint of the layout, for map provenance.
    pub fn fingerprint(&self) -> u64 {
        let mut s = String::new();
        s.push_str(&format!(
            "pump({:?},{:?});scale{:?};zp{:?};zc{:?}",
            self.pump_center.0, self.pump_center.1, self.conj_scale, self.probe_image_z,
            self.conj_image_z
        ));
        for a in &self.areas {
            s.push_str(&format!(
                ";{}:({:?},{:?}),s{:?},g{:?},n{:?}",
                a.pair.id, a.center.0, a.center.1, a.sigma, a.pair.gain, a.pair.seed_flux
            ));
        }
        crate::util::fnv1a64(s.as_bytes())
    }
}

/// Detector region selected by a D-mirror or split-photodiode element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Full,
    HalfPlane {
        edge: f64,
        axis: Axis,
        keep: Side,
    },
    Strip {
        lo: f64,
        hi: f64,
        axis: Axis,
    },
}

/// Axial offset from the image plane and the beamlet Rayleigh range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefocusParams {
    /// cm from the image plane.
    pub z_offset: f64,
    /// Rayleigh range override, cm. `None` derives it per coherence area
    /// from its sigma and the default wavelength.
    pub rayleigh_range: Option<f64>,
}

impl DefocusParams {
    pub fn none() -> Self {
        Self {
            z_offset: 0.0,
            rayleigh_range: None,
        }
    }

    pub fn at(z_offset: f64) -> Self {
        Self {
            z_offset,
            rayleigh_range: None,
        }
    }
}

/// Rayleigh range of a beamlet of intensity std-dev `sigma` (mm), in cm:
/// `z_R = pi (2 sigma)^2 / lambda`.
pub fn rayleigh_range_cm(sigma_mm: f64, wavelength_nm: f64) -> f64 {
    let w_mm = 2.0 * sigma_mm;
    let lambda_mm = wavelength_nm * 1e-6;
    std::f64::consts::PI * w_mm * w_mm / lambda_mm / 10.0
}

/// Gaussian beamlet broadening away from the image plane:
/// `sigma0 * sqrt(1 + (z / z_R)^2)`.
pub fn effective_sigma(sigma0: f64, z_offset: f64, rayleigh_range: f64) -> f64 {
    let r = z_offset / rayleigh_range;
    sigma0 * (1.0 + r * r).sqrt()
}

/// Point reflection of a probe-plane center through the pump center.
///
/// Momentum conservation in four-wave mixing maps each probe coherence
/// area onto its conjugate partner by inversion symmetry about the pump.
pub fn conjugate_center(probe_center: Point, pump_center: Point) -> Point {
    (
        2.0 * pump_center.0 - probe_center.0,
        2.0 * pump_center.1 - probe_center.1,
    )
}

/// Standard normal CDF.
pub(crate) fn phi(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Fraction of an area's intensity falling inside `region`, for the given
/// arm and defocus.
///
/// The conjugate footprint uses the inversion-reflected center and the
/// `conj_scale`-reduced sigma; defocus broadens the footprint without
/// moving it. Closed form via the Gaussian CDF for half-planes and
/// strips.
pub fn transmission(
    area: &CoherenceArea,
    region: Region,
    defocus: DefocusParams,
    arm: Arm,
    layout: &BeamLayout,
) -> f64 {
    let (center, sigma0) = match arm {
        Arm::Probe => (area.center, area.sigma),
        Arm::Conjugate => (
            conjugate_center(area.center, layout.pump_center),
            area.sigma * layout.conj_scale,
        ),
    };
    let z_r = defocus
        .rayleigh_range
        .unwrap_or_else(|| rayleigh_range_cm(sigma0, DEFAULT_WAVELENGTH_NM));
    let sigma = effective_sigma(sigma0, defocus.z_offset, z_r);
    match region {
        Region::Full => 1.0,
        Region::HalfPlane { edge, axis, keep } => {
            let c = match axis {
                Axis::X => center.0,
                Axis::Y => center.1,
            };
            match keep {
                Side::Below => phi((edge - c) / sigma),
                Side::Above => phi((c - edge) / sigma),
            }
        }
        Region::Strip { lo, hi, axis } => {
            let c = match axis {
                Axis::X => center.0,
                Axis::Y => center.1,
            };
            (phi((hi - c) / sigma) - phi((lo - c) / sigma)).max(0.0)
        }
    }
}

/// Transmissions of the two half-planes sharing one edge; they sum to one.
pub fn complementary_check(
    area: &CoherenceArea,
    edge: f64,
    axis: Axis,
    layout: &BeamLayout,
) -> (f64, f64) {
    let below = transmission(
        area,
        Region::HalfPlane {
            edge,
            axis,
            keep: Side::Below,
        },
        DefocusParams::none(),
        Arm::Probe,
        layout,
    );
    let above = transmission(
        area,
        Region::HalfPlane {
            edge,
            axis,
            keep: Side::Above,
        },
        DefocusParams::none(),
        Arm::Probe,
        layout,
    );
    (below, above)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn area(cx: f64, cy: f64, sigma: f64) -> CoherenceArea {
        CoherenceArea::new(
            (cx, cy),
            sigma,
            TwoModeSqueezedPair::new(2.0, 1.0, format!("a{cx}{cy}")).unwrap(),
        )
        .unwrap()
    }

    fn layout(areas: Vec<CoherenceArea>) -> BeamLayout {
        BeamLayout::new((0.0, 0.0), areas, 0.5).unwrap()
    }

    #[test]
    fn conjugate_center_examples() {
        assert_eq!(conjugate_center((0.0, 0.0), (0.0, 0.0)), (0.0, 0.0));
        assert_eq!(conjugate_center((0.4, 0.0), (0.0, 0.0)), (-0.4, 0.0));
        let c = conjugate_center((0.3, 0.1), (0.1, 0.0));
        assert_abs_diff_eq!(c.0, -0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(c.1, -0.1, epsilon = 1e-15);
    }

    #[test]
    fn half_plane_through_center_is_half() {
        let a = area(0.3, 0.0, 0.2);
        let l = layout(vec![a.clone()]);
        let t = transmission(
            &a,
            Region::HalfPlane {
                edge: 0.3,
                axis: Axis::X,
                keep: Side::Below,
            },
            DefocusParams::none(),
            Arm::Probe,
            &l,
        );
        assert_abs_diff_eq!(t, 0.5, epsilon = 1e-15);
        let t = transmission(&a, Region::Full, DefocusParams::none(), Arm::Probe, &l);
        assert_eq!(t, 1.0);
    }

    /// Trapezoid quadrature of the 1D Gaussian marginal; independent
    /// oracle for the closed-form CDF route.
    fn quadrature_half_plane(center: f64, sigma: f64, edge: f64) -> f64 {
        let n = 400_000;
        let lo = center - 10.0 * sigma;
        let hi = edge;
        if hi <= lo {
            return 0.0;
        }
        let h = (hi - lo) / n as f64;
        let pdf = |x: f64| {
            let u = (x - center) / sigma;
            (-0.5 * u * u).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
        };
        let mut s = 0.5 * (pdf(lo) + pdf(hi));
        for i in 1..n {
            s += pdf(lo + i as f64 * h);
        }
        s * h
    }

    #[test]
    fn half_plane_one_sigma_matches_quadrature_oracle() {
        let a = area(0.1, 0.0, 0.25);
        let l = layout(vec![a.clone()]);
        let edge = 0.1 + 0.25; // center + 1 sigma
        let t = transmission(
            &a,
            Region::HalfPlane {
                edge,
                axis: Axis::X,
                keep: Side::Below,
            },
            DefocusParams::none(),
            Arm::Probe,
            &l,
        );
        // The erfc-backed CDF agrees with the reference value to ~1e-11;
        // that is the implementation's accuracy, not the oracle's.
        assert_abs_diff_eq!(t, 0.841344746068543, epsilon = 1e-9);
        assert_abs_diff_eq!(t, quadrature_half_plane(0.1, 0.25, edge), epsilon = 1e-9);
    }

    #[test]
    fn strip_matches_difference_of_half_planes() {
        let a = area(-0.2, 0.0, 0.15);
        let l = layout(vec![a.clone()]);
        let strip = transmission(
            &a,
            Region::Strip {
                lo: -0.3,
                hi: 0.1,
                axis: Axis::X,
            },
            DefocusParams::none(),
            Arm::Probe,
            &l,
        );
        let below_hi = phi((0.1 - -0.2) / 0.15);
        let below_lo = phi((-0.3 - -0.2) / 0.15);
        assert_relative_eq!(strip, below_hi - below_lo, max_relative = 1e-12);
    }

    #[test]
    fn complementary_halves_sum_to_one() {
        let a = area(0.05, 0.0, 0.2);
        let l = layout(vec![a.clone()]);
        let (below, above) = complementary_check(&a, 0.05, Axis::X, &l);
        assert_abs_diff_eq!(below + above, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(below, 0.5, epsilon = 1e-15);

        let (below, above) = complementary_check(&a, 0.05 + 8.0 * 0.2, Axis::X, &l);
        assert_abs_diff_eq!(below, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(above, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn conjugate_uses_reflected_center_and_scaled_sigma() {
        let a = area(0.4, 0.0, 0.2);
        let l = layout(vec![a.clone()]);
        // Conjugate footprint sits at -0.4 with sigma 0.1: an edge at
        // -0.4 + 0.1 keeps Phi(1) of the flux.
        let t = transmission(
            &a,
            Region::HalfPlane {
                edge: -0.3,
                axis: Axis::X,
                keep: Side::Below,
            },
            DefocusParams::none(),
            Arm::Conjugate,
            &l,
        );
        assert_abs_diff_eq!(t, phi(1.0), epsilon = 1e-14);
    }

    #[test]
    fn effective_sigma_examples() {
        assert_eq!(effective_sigma(0.2, 0.0, 35.0), 0.2);
        assert_relative_eq!(
            effective_sigma(0.2, 35.0, 35.0),
            0.2 * 2.0_f64.sqrt(),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            effective_sigma(0.2, 70.0, 35.0),
            0.2 * 5.0_f64.sqrt(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn defocus_broadens_but_does_not_move() {
        let a = area(0.0, 0.0, 0.2);
        let l = layout(vec![a.clone()]);
        let half = |z: f64| {
            transmission(
                &a,
                Region::HalfPlane {
                    edge: 0.0,
                    axis: Axis::X,
                    keep: Side::Below,
                },
                DefocusParams::at(z),
                Arm::Probe,
                &l,
            )
        };
        // Edge through the center stays a 50/50 split at any defocus.
        assert_abs_diff_eq!(half(0.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(half(100.0), 0.5, epsilon = 1e-15);

        // An off-center edge relaxes toward 0.5 as the footprint grows.
        let off = |z: f64| {
            transmission(
                &a,
                Region::HalfPlane {
                    edge: 0.1,
                    axis: Axis::X,
                    keep: Side::Below,
                },
                DefocusParams::at(z),
                Arm::Probe,
                &l,
            )
        };
        let t0 = off(0.0);
        let t1 = off(rayleigh_range_cm(0.2, DEFAULT_WAVELENGTH_NM));
        assert!(t1 < t0 && t1 > 0.5);
    }

    #[test]
    fn rejects_duplicate_ids_and_bad_sigma() {
        assert!(CoherenceArea::new(
            (0.0, 0.0),
            0.0,
            TwoModeSqueezedPair::new(2.0, 1.0, "x").unwrap()
        )
        .is_err());
        let a = CoherenceArea::new(
            (0.0, 0.0),
            0.1,
            TwoModeSqueezedPair::new(2.0, 1.0, "dup").unwrap(),
        )
        .unwrap();
        let b = CoherenceArea::new(
            (0.3, 0.0),
            0.1,
            TwoModeSqueezedPair::new(2.0, 1.0, "dup").unwrap(),
        )
        .unwrap();
        assert!(BeamLayout::new((0.0, 0.0), vec![a, b], 0.5).is_err());
    }
}
