//! Scene files: the declarative input of `simulate`. TOML documents with
//! a strict schema — unknown keys are rejected with line/column
//! diagnostics so a typo cannot silently fall back to a default.

use cohmap_core::geometry::{Arm, Axis, BeamLayout, CoherenceArea};
use cohmap_core::noise::TwoModeSqueezedPair;
use cohmap_core::scan::{
    linspace, ChannelConfig, DetectionOptions, Engine, ModeState, ScanPlan, SweepOptions,
};
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SceneKind {
    /// 2D D-mirror raster over probe and conjugate cut positions.
    Raster,
    /// 1D mirror-image cut sweep evaluated with the published multimode
    /// model.
    Sweep,
    /// Image-plane search: defocus one arm along the propagation axis.
    Axial,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub kind: SceneKind,
    #[serde(default)]
    pub seed: u64,
    pub layout: LayoutSpec,
    #[serde(default)]
    pub channels: ChannelSpec,
    #[serde(default)]
    pub detection: DetectionSpec,
    pub raster: Option<RasterSpec>,
    pub sweep: Option<SweepSpec>,
    pub axial: Option<AxialSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutSpec {
    #[serde(default)]
    pub pump_center: [f64; 2],
    pub conj_scale: f64,
    pub areas: Vec<AreaSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaSpec {
    pub id: String,
    pub center: [f64; 2],
    pub sigma: f64,
    pub gain: f64,
    #[serde(default = "one")]
    pub weight: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeSpec {
    Plus,
    Minus,
    Blocked,
}

impl From<ModeSpec> for ModeState {
    fn from(m: ModeSpec) -> Self {
        match m {
            ModeSpec::Plus => ModeState::Plus,
            ModeSpec::Minus => ModeState::Minus,
            ModeSpec::Blocked => ModeState::Blocked,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxisSpec {
    X,
    Y,
}

impl From<AxisSpec> for Axis {
    fn from(a: AxisSpec) -> Self {
        match a {
            AxisSpec::X => Axis::X,
            AxisSpec::Y => Axis::Y,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    /// Named preset: `split`, `ad-only` or `all-diff`. Individual mode
    /// keys override the preset's states.
    pub preset: Option<String>,
    pub a: Option<ModeSpec>,
    pub b: Option<ModeSpec>,
    pub c: Option<ModeSpec>,
    pub d: Option<ModeSpec>,
    pub sweep_axis: Option<AxisSpec>,
}

impl ChannelSpec {
    pub fn resolve(&self) -> Result<ChannelConfig> {
        let mut config = match self.preset.as_deref() {
            None | Some("split") => ChannelConfig::split(),
            Some("ad-only") => ChannelConfig::ad_only(),
            Some("all-diff") => ChannelConfig::all_diff(),
            Some(other) => {
                return Err(CliError::Input(format!(
                    "unknown channel preset '{other}' (expected split, ad-only or all-diff)"
                )))
            }
        };
        if let Some(a) = self.a {
            config.a = a.into();
        }
        if let Some(b) = self.b {
            config.b = b.into();
        }
        if let Some(c) = self.c {
            config.c = c.into();
        }
        if let Some(d) = self.d {
            config.d = d.into();
        }
        if let Some(axis) = self.sweep_axis {
            config.sweep_axis = axis.into();
        }
        Ok(config)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionSpec {
    #[serde(default)]
    pub background: f64,
    #[serde(default)]
    pub cmrr_imbalance: f64,
}

/// Inclusive, evenly spaced grid.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl GridSpec {
    pub fn positions(&self) -> Vec<f64> {
        linspace(self.start, self.stop, self.steps)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RasterSpec {
    pub probe: GridSpec,
    pub conj: GridSpec,
    #[serde(default)]
    pub probe_defocus_cm: f64,
    #[serde(default)]
    pub conj_defocus_cm: f64,
    #[serde(default)]
    pub engine: EngineSpec,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub enum EngineSpec {
    #[default]
    Analytic,
    MonteCarlo {
        samples: u64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: AxisSpec,
    pub positions: GridSpec,
    #[serde(default = "one")]
    pub eta_d: f64,
    #[serde(default)]
    pub background: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArmSpec {
    Probe,
    Conjugate,
}

impl From<ArmSpec> for Arm {
    fn from(a: ArmSpec) -> Self {
        match a {
            ArmSpec::Probe => Arm::Probe,
            ArmSpec::Conjugate => Arm::Conjugate,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxialSpec {
    pub arm: ArmSpec,
    pub z_cm: GridSpec,
}

impl SceneFile {
    pub fn layout(&self) -> Result<BeamLayout> {
        let areas = self
            .layout
            .areas
            .iter()
            .map(|a| {
                let pair = TwoModeSqueezedPair::new(a.gain, a.weight, a.id.clone())?;
                CoherenceArea::new((a.center[0], a.center[1]), a.sigma, pair)
            })
            .collect::<cohmap_core::Result<Vec<_>>>()?;
        Ok(BeamLayout::new(
            (self.layout.pump_center[0], self.layout.pump_center[1]),
            areas,
            self.layout.conj_scale,
        )?)
    }

    pub fn detection(&self) -> DetectionOptions {
        DetectionOptions {
            background: self.detection.background,
            cmrr_imbalance: self.detection.cmrr_imbalance,
        }
    }

    pub fn scan_plan(&self, seed: u64) -> Result<ScanPlan> {
        let raster = self
            .raster
            .as_ref()
            .ok_or_else(|| CliError::Input("kind = \"raster\" requires a [raster] table".into()))?;
        let engine = match raster.engine {
            EngineSpec::Analytic => Engine::Analytic,
            EngineSpec::MonteCarlo { samples } => Engine::MonteCarlo {
                n_samples: samples,
                seed,
            },
        };
        let mut plan = ScanPlan::analytic(raster.probe.positions(), raster.conj.positions());
        plan.probe_defocus = cohmap_core::geometry::DefocusParams::at(raster.probe_defocus_cm);
        plan.conj_defocus = cohmap_core::geometry::DefocusParams::at(raster.conj_defocus_cm);
        plan.engine = engine;
        plan.detection = self.detection();
        Ok(plan)
    }

    pub fn sweep_options(&self) -> Result<(Axis, Vec<f64>, SweepOptions)> {
        let sweep = self
            .sweep
            .as_ref()
            .ok_or_else(|| CliError::Input("kind = \"sweep\" requires a [sweep] table".into()))?;
        Ok((
            sweep.axis.into(),
            sweep.positions.positions(),
            SweepOptions {
                eta_d: sweep.eta_d,
                background: sweep.background,
            },
        ))
    }

    pub fn axial_options(&self) -> Result<(Arm, Vec<f64>)> {
        let axial = self
            .axial
            .as_ref()
            .ok_or_else(|| CliError::Input("kind = \"axial\" requires an [axial] table".into()))?;
        Ok((axial.arm.into(), axial.z_cm.positions()))
    }
}

/// Parses a scene document, translating TOML errors into diagnostics
/// with a 1-based line and column.
pub fn parse_scene(text: &str, path: &str) -> Result<SceneFile> {
    toml::from_str::<SceneFile>(text).map_err(|e| {
        let loc = e
            .span()
            .map(|span| {
                let upto = &text[..span.start.min(text.len())];
                let line = upto.bytes().filter(|&b| b == b'\n').count() + 1;
                let col = upto.len() - upto.rfind('\n').map_or(0, |i| i + 1) + 1;
                format!("{path}:{line}:{col}: ")
            })
            .unwrap_or_else(|| format!("{path}: "));
        CliError::Input(format!("{loc}{}", e.message()))
    })
}
