//! Experimental protocol emulation: pseudo-split-detector channel
//! configurations, D-mirror rasters, 1D sweeps and the axial image-plane
//! search.
//!
//! The four mode labels follow the D-mirror picture: `A`/`B` are the
//! probe regions below/above the probe edge, `C`/`D` the conjugate
//! regions below/above the conjugate edge. Mixing A with C and B with D
//! on a balanced photodiode emulates a split detector; blocking B and C
//! measures the A/D correlation alone.

use crate::exec::map_indexed;
use crate::geometry::{transmission, Arm, Axis, BeamLayout, DefocusParams, Region, Side};
use crate::mc::monte_carlo_nrf_exec;
use crate::noise::{
    nrf_covariance, DetectionAssignment, NoiseResult, PairDetection, Share, Sign,
};
use crate::util::mix_seed;
use crate::{Error, Execution, Result};

/// Routing of one mode label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeState {
    Plus,
    Minus,
    /// Light dumped before detection: zero flux, zero variance.
    Blocked,
}

impl ModeState {
    fn sign(self) -> Option<Sign> {
        match self {
            ModeState::Plus => Some(Sign::Plus),
            ModeState::Minus => Some(Sign::Minus),
            ModeState::Blocked => None,
        }
    }
}

/// Signed assignment of the A/B/C/D modes and the cut axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelConfig {
    pub a: ModeState,
    pub b: ModeState,
    pub c: ModeState,
    pub d: ModeState,
    pub sweep_axis: Axis,
}

impl ChannelConfig {
    /// Pseudo-split detector: A and C on one channel, B and D on the
    /// other.
    pub fn split() -> Self {
        ChannelConfig {
            a: ModeState::Plus,
            c: ModeState::Plus,
            b: ModeState::Minus,
            d: ModeState::Minus,
            sweep_axis: Axis::X,
        }
    }

    /// A/D correlation alone; B and C blocked.
    pub fn ad_only() -> Self {
        ChannelConfig {
            a: ModeState::Plus,
            d: ModeState::Minus,
            b: ModeState::Blocked,
            c: ModeState::Blocked,
            sweep_axis: Axis::X,
        }
    }

    /// Probe minus conjugate with both D-mirror cuts present.
    pub fn all_diff() -> Self {
        ChannelConfig {
            a: ModeState::Plus,
            b: ModeState::Plus,
            c: ModeState::Minus,
            d: ModeState::Minus,
            sweep_axis: Axis::X,
        }
    }

    fn validate(&self) -> Result<()> {
        if [self.a, self.b, self.c, self.d]
            .iter()
            .all(|m| matches!(m, ModeState::Blocked))
        {
            return Err(Error::Scan("all modes are blocked".into()));
        }
        Ok(())
    }
}

/// Detector imperfections shared by every cell of a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionOptions {
    /// Additive variance in shot-noise units.
    pub background: f64,
    /// Balanced-subtraction gain mismatch.
    pub cmrr_imbalance: f64,
}

impl Default for DetectionOptions {
    fn default() -> Self {
        DetectionOptions {
            background: 0.0,
            cmrr_imbalance: 0.0,
        }
    }
}

/// Engine used to evaluate each scan cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Analytic,
    MonteCarlo { n_samples: u64, seed: u64 },
}

/// A raster plan: edge coordinates for both D-mirrors plus per-arm
/// defocus and the cell engine.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPlan {
    pub probe_positions: Vec<f64>,
    pub conj_positions: Vec<f64>,
    pub probe_defocus: DefocusParams,
    pub conj_defocus: DefocusParams,
    pub engine: Engine,
    pub detection: DetectionOptions,
}

impl ScanPlan {
    pub fn analytic(probe_positions: Vec<f64>, conj_positions: Vec<f64>) -> Self {
        ScanPlan {
            probe_positions,
            conj_positions,
            probe_defocus: DefocusParams::none(),
            conj_defocus: DefocusParams::none(),
            engine: Engine::Analytic,
            detection: DetectionOptions::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        let monotone = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
        if self.probe_positions.is_empty() || self.conj_positions.is_empty() {
            return Err(Error::Scan("position lists must be nonempty".into()));
        }
        if !monotone(&self.probe_positions) || !monotone(&self.conj_positions) {
            return Err(Error::Scan("positions must be strictly increasing".into()));
        }
        Ok(())
    }
}

/// Uniform grid helper: `steps` points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![start];
    }
    (0..steps)
        .map(|i| start + (stop - start) * i as f64 / (steps - 1) as f64)
        .collect()
}

/// Gridded noise results over probe and conjugate cut positions,
/// row-major in the probe coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseMap {
    pub probe_coords: Vec<f64>,
    pub conj_coords: Vec<f64>,
    pub values: Vec<NoiseResult>,
    pub config: ChannelConfig,
    pub layout_fingerprint: u64,
}

impl NoiseMap {
    pub fn value(&self, probe_idx: usize, conj_idx: usize) -> &NoiseResult {
        &self.values[probe_idx * self.conj_coords.len() + conj_idx]
    }

    pub fn n_cells(&self) -> usize {
        self.values.len()
    }
}

/// Profile axis selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapAxis {
    Probe,
    Conjugate,
}

/// One point of an optimal-noise profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub coord: f64,
    pub nrf_db: f64,
    /// Coordinate along the other axis where the minimum was found.
    pub argmin_coord: f64,
}

/// Builds the signed region assignment for one (probe edge, conjugate
/// edge) cell.
pub fn build_assignment(
    layout: &BeamLayout,
    config: &ChannelConfig,
    probe_edge: f64,
    conj_edge: f64,
    probe_defocus: DefocusParams,
    conj_defocus: DefocusParams,
    detection: DetectionOptions,
) -> DetectionAssignment {
    let axis = config.sweep_axis;
    let pairs = layout
        .areas
        .iter()
        .map(|area| {
            let mut probe = Vec::with_capacity(2);
            let mut conj = Vec::with_capacity(2);
            let push = |out: &mut Vec<Share>,
                            label: &str,
                            state: ModeState,
                            arm: Arm,
                            edge: f64,
                            keep: Side,
                            defocus: DefocusParams| {
                if let Some(sign) = state.sign() {
                    let t = transmission(
                        area,
                        Region::HalfPlane { edge, axis, keep },
                        defocus,
                        arm,
                        layout,
                    );
                    out.push(Share::new(label, t, sign));
                }
            };
            push(
                &mut probe,
                "A",
                config.a,
                Arm::Probe,
                probe_edge,
                Side::Below,
                probe_defocus,
            );
            push(
                &mut probe,
                "B",
                config.b,
                Arm::Probe,
                probe_edge,
                Side::Above,
                probe_defocus,
            );
            push(
                &mut conj,
                "C",
                config.c,
                Arm::Conjugate,
                conj_edge,
                Side::Below,
                conj_defocus,
            );
            push(
                &mut conj,
                "D",
                config.d,
                Arm::Conjugate,
                conj_edge,
                Side::Above,
                conj_defocus,
            );
            PairDetection {
                pair: area.pair.clone(),
                probe,
                conj,
            }
        })
        .collect();
    DetectionAssignment {
        pairs,
        background: detection.background,
        cmrr_imbalance: detection.cmrr_imbalance,
    }
}

/// Rasters both D-mirrors over the plan grid and evaluates the configured
/// engine in every cell.
pub fn run_raster(layout: &BeamLayout, plan: &ScanPlan, config: &ChannelConfig) -> Result<NoiseMap> {
    run_raster_exec(layout, plan, config, Execution::default())
}

/// [`run_raster`] with an explicit execution strategy; cells are
/// independent, so the result is identical to sequential evaluation.
pub fn run_raster_exec(
    layout: &BeamLayout,
    plan: &ScanPlan,
    config: &ChannelConfig,
    exec: Execution,
) -> Result<NoiseMap> {
    plan.validate()?;
    config.validate()?;
    let np = plan.probe_positions.len();
    let nc = plan.conj_positions.len();
    let cells = map_indexed(exec, np * nc, |idx| {
        let (i, j) = (idx / nc, idx % nc);
        let assignment = build_assignment(
            layout,
            config,
            plan.probe_positions[i],
            plan.conj_positions[j],
            plan.probe_defocus,
            plan.conj_defocus,
            plan.detection,
        );
        match plan.engine {
            Engine::Analytic => nrf_covariance(&assignment),
            Engine::MonteCarlo { n_samples, seed } => monte_carlo_nrf_exec(
                &assignment,
                n_samples,
                mix_seed(seed, idx as u64),
                Execution::Sequential,
            ),
        }
    });
    let values = cells.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(NoiseMap {
        probe_coords: plan.probe_positions.clone(),
        conj_coords: plan.conj_positions.clone(),
        values,
        config: *config,
        layout_fingerprint: layout.fingerprint(),
    })
}

/// For each coordinate along `axis`, the minimum `nrf_db` over the other
/// axis and where it occurs.
pub fn optimal_profile(map: &NoiseMap, axis: MapAxis) -> Vec<ProfilePoint> {
    let (outer, inner) = match axis {
        MapAxis::Probe => (&map.probe_coords, &map.conj_coords),
        MapAxis::Conjugate => (&map.conj_coords, &map.probe_coords),
    };
    outer
        .iter()
        .enumerate()
        .map(|(i, &coord)| {
            let mut best = f64::INFINITY;
            let mut arg = inner[0];
            for (j, &other) in inner.iter().enumerate() {
                let v = match axis {
                    MapAxis::Probe => map.value(i, j).nrf_db,
                    MapAxis::Conjugate => map.value(j, i).nrf_db,
                };
                if v < best {
                    best = v;
                    arg = other;
                }
            }
            ProfilePoint {
                coord,
                nrf_db: best,
                argmin_coord: arg,
            }
        })
        .collect()
}

/// Result of the axial image-plane search.
#[derive(Debug, Clone, PartialEq)]
pub struct AxialSweep {
    pub points: Vec<(f64, NoiseResult)>,
    pub argmin_z: f64,
}

/// Sweeps one arm's D-mirror along the propagation axis with both edges
/// half-blocking at the pump center, measuring A/D correlations.
///
/// Away from the image plane the swept arm's footprints broaden, the
/// mirror-image pairing degrades, and excess noise appears; the optimum
/// identifies the image plane.
pub fn axial_sweep(
    layout: &BeamLayout,
    z_values: &[f64],
    arm: Arm,
    detection: DetectionOptions,
) -> Result<AxialSweep> {
    if z_values.is_empty() {
        return Err(Error::Scan("z grid must be nonempty".into()));
    }
    let config = ChannelConfig::ad_only();
    let edge = match config.sweep_axis {
        Axis::X => layout.pump_center.0,
        Axis::Y => layout.pump_center.1,
    };
    let mut points = Vec::with_capacity(z_values.len());
    for &z in z_values {
        let (pd, cd) = match arm {
            Arm::Probe => (DefocusParams::at(z), DefocusParams::none()),
            Arm::Conjugate => (DefocusParams::none(), DefocusParams::at(z)),
        };
        let assignment = build_assignment(layout, &config, edge, edge, pd, cd, detection);
        points.push((z, nrf_covariance(&assignment)?));
    }
    let argmin_z = points
        .iter()
        .min_by(|a, b| {
            (a.1.nrf, a.0.abs())
                .partial_cmp(&(b.1.nrf, b.0.abs()))
                .unwrap()
        })
        .unwrap()
        .0;
    Ok(AxialSweep { points, argmin_z })
}

/// Options of the 1D combined-channel sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// Combined detector efficiency.
    pub eta_d: f64,
    /// Edge-scatter background: additive variance in shot-noise units,
    /// weighted by the power fraction the cut renders split.
    pub background: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            eta_d: 1.0,
            background: 0.0,
        }
    }
}

/// 1D sweep of mirror-image cuts through the pump center with all four
/// modes combined, evaluated with the published multimode model
/// generalized to per-pair gain.
///
/// A pair cut with transmission `t` keeps only the mirror-paired fraction
/// `t^2 + (1-t)^2` of its correlated detection efficiency: 1 when
/// isolated, 1/2 when evenly split (the 3 dB limit). Edge scatter is
/// modeled as background weighted by the split power fraction, so an
/// out-of-beam mirror contributes none.
pub fn sweep_1d(
    layout: &BeamLayout,
    axis: Axis,
    positions: &[f64],
    opts: SweepOptions,
) -> Result<Vec<(f64, NoiseResult)>> {
    if positions.is_empty() {
        return Err(Error::Scan("position list must be nonempty".into()));
    }
    if !(opts.eta_d > 0.0 && opts.eta_d <= 1.0) {
        return Err(Error::Domain(format!(
            "eta_d must be in (0, 1], got {}",
            opts.eta_d
        )));
    }
    let total_power: f64 = layout.areas.iter().map(|a| a.pair.mean_probe_flux()).sum();
    if !(total_power > 0.0) {
        return Err(Error::ZeroShotNoise);
    }
    positions
        .iter()
        .map(|&pos| {
            let mut bracket = 0.0;
            let mut kept = 0.0;
            for area in &layout.areas {
                let t = transmission(
                    area,
                    Region::HalfPlane {
                        edge: pos,
                        axis,
                        keep: Side::Below,
                    },
                    DefocusParams::none(),
                    Arm::Probe,
                    layout,
                );
                let c = t * t + (1.0 - t) * (1.0 - t);
                let w = area.pair.mean_probe_flux() / total_power;
                bracket += w * (2.0 * area.pair.gain - 1.0) * c;
                kept += w * c;
            }
            let noise = 1.0 / (opts.eta_d * bracket) + opts.background * (1.0 - kept);
            Ok((
                pos,
                NoiseResult {
                    variance: noise,
                    snl: 1.0,
                    nrf: noise,
                    nrf_db: 10.0 * noise.log10(),
                    stderr_nrf: 0.0,
                },
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::geometry::CoherenceArea;
    use crate::noise::TwoModeSqueezedPair;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn single_pair_layout(g: f64, center: f64, sigma: f64) -> BeamLayout {
        BeamLayout::new(
            (0.0, 0.0),
            vec![CoherenceArea::new(
                (center, 0.0),
                sigma,
                TwoModeSqueezedPair::new(g, 1.0, "only").unwrap(),
            )
            .unwrap()],
            0.5,
        )
        .unwrap()
    }

    #[test]
    fn degenerate_cut_recovers_full_detection() {
        // SPLIT config with edges far outside the beams: all probe in A,
        // all conjugate in C... A and C share a sign, so choose edges so
        // the probe lands in A and the conjugate in C entirely; nothing
        // is split and the full-detection value must appear.
        let g = 2.0;
        let layout = single_pair_layout(g, 0.0, 0.1);
        // Probe fully below +0.8 (A, +1); conjugate fully below +0.8 is
        // also C (+1): that sums the beams instead of differencing them.
        // The degenerate split-detector measurement pairs A with D, so
        // put the conjugate above the conjugate edge.
        let plan = ScanPlan::analytic(vec![0.8], vec![-0.8]);
        let map = run_raster(&layout, &plan, &ChannelConfig::split()).unwrap();
        assert_relative_eq!(
            map.value(0, 0).nrf,
            1.0 / (2.0 * g - 1.0),
            max_relative = 1e-9
        );
    }

    #[test]
    fn blocked_modes_do_not_depend_on_their_edges() {
        let layout = fixtures::two_area_layout();
        let cfg = ChannelConfig::ad_only();
        // AD_ONLY at two different "bookkeeping" positions of the blocked
        // B/C edges is the same measurement by construction: B and C are
        // simply absent from the assignment.
        let a1 = build_assignment(
            &layout,
            &cfg,
            0.1,
            -0.1,
            DefocusParams::none(),
            DefocusParams::none(),
            DetectionOptions::default(),
        );
        for det in &a1.pairs {
            assert_eq!(det.probe.len(), 1);
            assert_eq!(det.conj.len(), 1);
        }
    }

    #[test]
    fn raster_dimensions_and_determinism() {
        let layout = fixtures::two_area_layout();
        let plan = ScanPlan {
            engine: Engine::MonteCarlo {
                n_samples: 20_000,
                seed: 5,
            },
            ..ScanPlan::analytic(linspace(-0.6, 0.6, 4), linspace(-0.3, 0.3, 3))
        };
        let m1 = run_raster(&layout, &plan, &ChannelConfig::split()).unwrap();
        let m2 = run_raster_exec(
            &layout,
            &plan,
            &ChannelConfig::split(),
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(m1.n_cells(), 12);
        for (a, b) in m1.values.iter().zip(&m2.values) {
            assert_eq!(a.nrf.to_bits(), b.nrf.to_bits());
        }
    }

    #[test]
    fn raster_rejects_bad_plans() {
        let layout = fixtures::two_area_layout();
        let bad = ScanPlan::analytic(vec![0.2, 0.1], vec![0.0]);
        assert!(run_raster(&layout, &bad, &ChannelConfig::split()).is_err());
        let empty = ScanPlan::analytic(vec![], vec![0.0]);
        assert!(run_raster(&layout, &empty, &ChannelConfig::split()).is_err());
    }

    #[test]
    fn optimal_profile_shape_and_constant_map() {
        let layout = single_pair_layout(2.0, 0.0, 0.1);
        let plan = ScanPlan::analytic(linspace(-0.9, 0.9, 7), linspace(-0.9, 0.9, 5));
        let map = run_raster(&layout, &plan, &ChannelConfig::ad_only()).unwrap();
        let profile = optimal_profile(&map, MapAxis::Probe);
        assert_eq!(profile.len(), 7);
        for p in &profile {
            let min_manual = map
                .conj_coords
                .iter()
                .enumerate()
                .map(|(j, _)| {
                    map.value(
                        map.probe_coords.iter().position(|&x| x == p.coord).unwrap(),
                        j,
                    )
                    .nrf_db
                })
                .fold(f64::INFINITY, f64::min);
            assert_abs_diff_eq!(p.nrf_db, min_manual, epsilon = 1e-12);
        }
    }

    #[test]
    fn pump_symmetric_layout_gives_point_symmetric_map() {
        // Negating both cut positions swaps the two equal pairs and the
        // below/above roles; with all four channels counted the noise is
        // invariant, so the raster has exact point symmetry.
        let layout = fixtures::symmetric_layout();
        let coords = linspace(-0.8, 0.8, 9);
        let plan = ScanPlan::analytic(coords.clone(), coords.clone());
        let map = run_raster(&layout, &plan, &ChannelConfig::split()).unwrap();
        let n = coords.len();
        for i in 0..n {
            for j in 0..n {
                assert_abs_diff_eq!(
                    map.value(i, j).nrf,
                    map.value(n - 1 - i, n - 1 - j).nrf,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn axial_sweep_prefers_the_image_plane() {
        // Conjugate-arm sweep: at the image plane the strong pair's
        // conjugate sits cleanly in channel D and the blocked weak pair
        // leaks nothing; any broadening only degrades both, so the
        // argmin is exactly z = 0 and the curve worsens monotonically.
        let layout = fixtures::two_area_layout();
        let zr = crate::geometry::rayleigh_range_cm(
            fixtures::AREA_SIGMA_MM * fixtures::CONJ_SCALE,
            crate::geometry::DEFAULT_WAVELENGTH_NM,
        );
        let zs: Vec<f64> = vec![-4.0 * zr, -zr, 0.0, zr, 4.0 * zr];
        let sweep = axial_sweep(&layout, &zs, Arm::Conjugate, DetectionOptions::default()).unwrap();
        assert_eq!(sweep.argmin_z, 0.0);
        let at = |z: f64| {
            sweep
                .points
                .iter()
                .find(|(zz, _)| *zz == z)
                .unwrap()
                .1
                .nrf
        };
        assert!(at(zr) > at(0.0));
        assert!(at(4.0 * zr) > at(zr));
        assert!(at(-4.0 * zr) > at(-zr));
        // Probe-arm sweep: far from the image plane the noise is
        // strictly worse than at it, even though a slight defocus can
        // trade partition loss against probe/conjugate power balance.
        let zrp = crate::geometry::rayleigh_range_cm(
            fixtures::AREA_SIGMA_MM,
            crate::geometry::DEFAULT_WAVELENGTH_NM,
        );
        let zsp = vec![-4.0 * zrp, 0.0, 4.0 * zrp];
        let probe =
            axial_sweep(&layout, &zsp, Arm::Probe, DetectionOptions::default()).unwrap();
        assert!(probe.points[0].1.nrf > probe.points[1].1.nrf);
        assert!(probe.points[2].1.nrf > probe.points[1].1.nrf);
    }

    #[test]
    fn sweep_even_split_is_three_db_above_unsplit() {
        let layout = fixtures::three_area_layout();
        let opts = SweepOptions {
            eta_d: 0.85,
            background: 0.0,
        };
        // Vertical sweep: all areas sit at y = 0, so a cut at y = 0
        // splits every pair evenly.
        let pts = sweep_1d(&layout, Axis::Y, &[-10.0, 0.0], opts).unwrap();
        let rise = pts[1].1.nrf_db - pts[0].1.nrf_db;
        assert_abs_diff_eq!(rise, 10.0 * 2.0_f64.log10(), epsilon = 1e-9);
    }

    #[test]
    fn single_area_sweeps_are_isotropic() {
        let layout = single_pair_layout(2.0, 0.0, 0.15);
        let pos = linspace(-0.5, 0.5, 21);
        let h = sweep_1d(&layout, Axis::X, &pos, SweepOptions::default()).unwrap();
        let v = sweep_1d(&layout, Axis::Y, &pos, SweepOptions::default()).unwrap();
        for (a, b) in h.iter().zip(&v) {
            assert_abs_diff_eq!(a.1.nrf, b.1.nrf, epsilon = 1e-14);
        }
    }
}
