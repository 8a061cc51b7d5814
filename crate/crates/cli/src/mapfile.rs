//! Noise-map persistence: CSV with `#`-prefixed metadata comments.
//!
//! The format is byte-stable: write -> read -> write reproduces the file
//! exactly. Floats are emitted with Rust's shortest round-trip
//! representation, and the metadata block has a fixed key order.

use cohmap_core::geometry::Axis;
use cohmap_core::noise::NoiseResult;
use cohmap_core::scan::{ChannelConfig, ModeState, NoiseMap};

use crate::error::{CliError, Result};

pub const HEADER: &str = "probe_mm,conj_mm,variance,snl,nrf,nrf_db,stderr_nrf";
const MAGIC: &str = "# cohmap-map v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocKind {
    /// 2D raster: `probe_mm` x `conj_mm` grid.
    Raster,
    /// 1D mirror-image cut sweep; `conj_mm` is a placeholder zero.
    Sweep,
    /// Axial defocus sweep; `probe_mm` carries z in cm.
    Axial,
}

impl DocKind {
    fn as_str(self) -> &'static str {
        match self {
            DocKind::Raster => "raster",
            DocKind::Sweep => "sweep",
            DocKind::Axial => "axial",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "raster" => Ok(DocKind::Raster),
            "sweep" => Ok(DocKind::Sweep),
            "axial" => Ok(DocKind::Axial),
            other => Err(CliError::Input(format!("unknown map kind '{other}'"))),
        }
    }
}

/// A noise map plus the provenance metadata persisted alongside it.
#[derive(Debug, Clone, PartialEq)]
pub struct MapDocument {
    pub kind: DocKind,
    pub engine: String,
    pub seed: u64,
    pub map: NoiseMap,
}

/// Wraps a 1D curve (sweep or axial) as a single-column map document.
pub fn from_curve(
    kind: DocKind,
    engine: String,
    seed: u64,
    points: Vec<(f64, NoiseResult)>,
    config: ChannelConfig,
    layout_fingerprint: u64,
) -> MapDocument {
    MapDocument {
        kind,
        engine,
        seed,
        map: NoiseMap {
            probe_coords: points.iter().map(|p| p.0).collect(),
            conj_coords: vec![0.0],
            values: points.into_iter().map(|p| p.1).collect(),
            config,
            layout_fingerprint,
        },
    }
}

fn mode_str(m: ModeState) -> &'static str {
    match m {
        ModeState::Plus => "plus",
        ModeState::Minus => "minus",
        ModeState::Blocked => "blocked",
    }
}

fn parse_mode(s: &str) -> Result<ModeState> {
    match s {
        "plus" => Ok(ModeState::Plus),
        "minus" => Ok(ModeState::Minus),
        "blocked" => Ok(ModeState::Blocked),
        other => Err(CliError::Input(format!("unknown mode state '{other}'"))),
    }
}

fn channels_line(c: &ChannelConfig) -> String {
    format!(
        "a={} b={} c={} d={} axis={}",
        mode_str(c.a),
        mode_str(c.b),
        mode_str(c.c),
        mode_str(c.d),
        match c.sweep_axis {
            Axis::X => "x",
            Axis::Y => "y",
        }
    )
}

fn parse_channels(line: &str) -> Result<ChannelConfig> {
    let mut config = ChannelConfig::split();
    for field in line.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("malformed channels field '{field}'")))?;
        match key {
            "a" => config.a = parse_mode(value)?,
            "b" => config.b = parse_mode(value)?,
            "c" => config.c = parse_mode(value)?,
            "d" => config.d = parse_mode(value)?,
            "axis" => {
                config.sweep_axis = match value {
                    "x" => Axis::X,
                    "y" => Axis::Y,
                    other => {
                        return Err(CliError::Input(format!("unknown sweep axis '{other}'")))
                    }
                }
            }
            other => return Err(CliError::Input(format!("unknown channels key '{other}'"))),
        }
    }
    Ok(config)
}

pub fn write_document(doc: &MapDocument) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!("# kind: {}\n", doc.kind.as_str()));
    out.push_str(&format!("# engine: {}\n", doc.engine));
    out.push_str(&format!("# seed: {}\n", doc.seed));
    out.push_str(&format!("# layout: {:016x}\n", doc.map.layout_fingerprint));
    out.push_str(&format!("# channels: {}\n", channels_line(&doc.map.config)));
    out.push_str(HEADER);
    out.push('\n');
    let nc = doc.map.conj_coords.len();
    for (i, &p) in doc.map.probe_coords.iter().enumerate() {
        for (j, &c) in doc.map.conj_coords.iter().enumerate() {
            let v = &doc.map.values[i * nc + j];
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                p, c, v.variance, v.snl, v.nrf, v.nrf_db, v.stderr_nrf
            ));
        }
    }
    out
}

fn parse_float(s: &str, what: &str, line_no: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| CliError::Input(format!("line {line_no}: invalid {what} value '{s}'")))
}

/// Parses a map document. Metadata comments are optional (hand-made
/// measurement files may omit them), the header row is not: a wrong
/// header is rejected naming both the expected and the found line. The
/// trailing `stderr_nrf` column may be omitted and defaults to zero.
pub fn read_document(text: &str, path: &str) -> Result<MapDocument> {
    let mut kind = DocKind::Raster;
    let mut engine = String::from("unknown");
    let mut seed = 0u64;
    let mut fingerprint = 0u64;
    let mut config = ChannelConfig::split();
    let mut header_seen = false;
    let mut rows: Vec<(f64, f64, NoiseResult)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some((key, value)) = comment.split_once(':') {
                let value = value.trim();
                match key.trim() {
                    "kind" => kind = DocKind::parse(value)?,
                    "engine" => engine = value.to_string(),
                    "seed" => {
                        seed = value.parse().map_err(|_| {
                            CliError::Input(format!("line {line_no}: invalid seed '{value}'"))
                        })?
                    }
                    "layout" => {
                        fingerprint = u64::from_str_radix(value, 16).map_err(|_| {
                            CliError::Input(format!(
                                "line {line_no}: invalid layout hash '{value}'"
                            ))
                        })?
                    }
                    "channels" => config = parse_channels(value)?,
                    _ => {}
                }
            }
            continue;
        }
        if !header_seen {
            if line != HEADER {
                return Err(CliError::Input(format!(
                    "{path}:{line_no}: malformed header '{line}' (expected '{HEADER}')"
                )));
            }
            header_seen = true;
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 && cols.len() != 7 {
            return Err(CliError::Input(format!(
                "{path}:{line_no}: expected 6 or 7 columns, found {}",
                cols.len()
            )));
        }
        let probe = parse_float(cols[0], "probe_mm", line_no)?;
        let conj = parse_float(cols[1], "conj_mm", line_no)?;
        let result = NoiseResult {
            variance: parse_float(cols[2], "variance", line_no)?,
            snl: parse_float(cols[3], "snl", line_no)?,
            nrf: parse_float(cols[4], "nrf", line_no)?,
            nrf_db: parse_float(cols[5], "nrf_db", line_no)?,
            stderr_nrf: if cols.len() == 7 {
                parse_float(cols[6], "stderr_nrf", line_no)?
            } else {
                0.0
            },
        };
        rows.push((probe, conj, result));
    }

    if !header_seen {
        return Err(CliError::Input(format!(
            "{path}: empty map file (no '{HEADER}' header)"
        )));
    }
    if rows.is_empty() {
        return Err(CliError::Input(format!("{path}: map has no data rows")));
    }

    // Reconstruct the row-major grid.
    let mut conj_coords: Vec<f64> = Vec::new();
    for &(_, c, _) in &rows {
        if conj_coords.contains(&c) {
            break;
        }
        conj_coords.push(c);
    }
    let nc = conj_coords.len();
    if rows.len() % nc != 0 {
        return Err(CliError::Input(format!(
            "{path}: {} rows do not tile a grid with {nc} conjugate positions",
            rows.len()
        )));
    }
    let np = rows.len() / nc;
    let mut probe_coords = Vec::with_capacity(np);
    for i in 0..np {
        probe_coords.push(rows[i * nc].0);
        for j in 0..nc {
            let (p, c, _) = rows[i * nc + j];
            if p != rows[i * nc].0 || c != conj_coords[j] {
                return Err(CliError::Input(format!(
                    "{path}: irregular grid near data row {}",
                    i * nc + j + 1
                )));
            }
        }
    }
    Ok(MapDocument {
        kind,
        engine,
        seed,
        map: NoiseMap {
            probe_coords,
            conj_coords,
            values: rows.into_iter().map(|(_, _, v)| v).collect(),
            config,
            layout_fingerprint: fingerprint,
        },
    })
}
