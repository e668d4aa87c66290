//! Instance and result files, instance generation, the independent checker
//! and SVG rendering.
//!
//! Both file kinds are JSON documents. See the README for the schema.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netmodel::{
    is_legal, total_bb_netlength, total_overlap_area, Macro, ModelError, Net, Netlist, Placement,
    PlacementArea, Point, Rect,
};
use crate::placer::{PlacerConfig, RoundStats};

mod check;
mod gen;
mod svg;

pub use check::{check_result, CheckReport};
pub use gen::{generate_instance, GenSpec};
pub use svg::{render_svg, write_svg};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("result does not match instance: missing {missing:?}, unexpected {unexpected:?}")]
    Mismatch {
        missing: Vec<String>,
        unexpected: Vec<String>,
    },
    #[error("cannot generate instance: {0}")]
    Generate(String),
}

impl From<ModelError> for IoError {
    fn from(e: ModelError) -> Self {
        IoError::Invalid(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaSpec {
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PositionEntry {
    pub id: String,
    pub x: f64,
    pub y: f64,
}

/// On-disk instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub area: AreaSpec,
    #[serde(default)]
    pub blockages: Vec<Rect>,
    pub macros: Vec<Macro>,
    #[serde(default)]
    pub nets: Vec<NetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_placement: Option<Vec<PositionEntry>>,
}

/// A validated instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub netlist: Netlist,
    pub area: PlacementArea,
    pub initial: Option<Placement>,
}

impl NetSpec {
    fn display_name(&self, index: usize) -> String {
        self.name.clone().unwrap_or_else(|| format!("#{index}"))
    }
}

impl InstanceFile {
    /// Checks every invariant and builds the domain objects.
    pub fn to_instance(&self) -> Result<Instance, IoError> {
        let area = PlacementArea::new(self.area.width, self.area.height, self.blockages.clone())?;
        let mut index = HashMap::with_capacity(self.macros.len());
        for (i, m) in self.macros.iter().enumerate() {
            if index.insert(m.id.as_str(), i).is_some() {
                return Err(IoError::Invalid(format!("duplicate macro id '{}'", m.id)));
            }
        }
        let mut nets = Vec::with_capacity(self.nets.len());
        for (i, n) in self.nets.iter().enumerate() {
            let name = n.display_name(i);
            let members = n
                .members
                .iter()
                .map(|id| {
                    index.get(id.as_str()).copied().ok_or_else(|| {
                        IoError::Invalid(format!("net '{name}' references unknown macro '{id}'"))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            nets.push(Net { name, members });
        }
        let netlist = Netlist::new(self.macros.clone(), nets)?;
        let initial = match &self.initial_placement {
            None => None,
            Some(entries) => Some(positions_to_placement(entries, &netlist)?),
        };
        Ok(Instance {
            netlist,
            area,
            initial,
        })
    }

    pub fn from_instance(netlist: &Netlist, area: &PlacementArea, initial: Option<&Placement>) -> Self {
        InstanceFile {
            area: AreaSpec {
                width: area.width,
                height: area.height,
            },
            blockages: area.blockages.clone(),
            macros: netlist.macros().to_vec(),
            nets: netlist
                .nets()
                .iter()
                .map(|n| NetSpec {
                    name: Some(n.name.clone()),
                    members: n.members.iter().map(|&m| netlist.macros()[m].id.clone()).collect(),
                })
                .collect(),
            initial_placement: initial.map(|p| placement_to_positions(p, netlist)),
        }
    }
}

/// Resolves position entries by macro id; every macro must appear exactly once.
pub fn positions_to_placement(entries: &[PositionEntry], netlist: &Netlist) -> Result<Placement, IoError> {
    let mut placement = Placement::empty(netlist.len());
    let mut unexpected = Vec::new();
    let mut seen = HashSet::new();
    for e in entries {
        match netlist.index_of(&e.id) {
            Some(i) if seen.insert(i) => placement.set(i, Point::new(e.x, e.y)),
            Some(_) => return Err(IoError::Invalid(format!("macro '{}' is positioned twice", e.id))),
            None => unexpected.push(e.id.clone()),
        }
    }
    let missing: Vec<String> = netlist
        .macros()
        .iter()
        .enumerate()
        .filter(|(i, _)| placement.get(*i).is_none())
        .map(|(_, m)| m.id.clone())
        .collect();
    if !missing.is_empty() || !unexpected.is_empty() {
        return Err(IoError::Mismatch {
            missing,
            unexpected,
        });
    }
    Ok(placement)
}

/// Position entries in netlist order; unplaced macros are skipped.
pub fn placement_to_positions(placement: &Placement, netlist: &Netlist) -> Vec<PositionEntry> {
    netlist
        .macros()
        .iter()
        .enumerate()
        .filter_map(|(i, m)| {
            placement.get(i).map(|p| PositionEntry {
                id: m.id.clone(),
                x: p.x,
                y: p.y,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultSummary {
    pub netlength_bb: f64,
    pub overlap_area: f64,
    pub legal: bool,
}

/// On-disk placement result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultFile {
    pub positions: Vec<PositionEntry>,
    pub summary: ResultSummary,
    pub legalized: bool,
    pub config: PlacerConfig,
}

impl ResultFile {
    /// Builds a result, computing the summary from the placement.
    pub fn new(
        netlist: &Netlist,
        area: &PlacementArea,
        placement: &Placement,
        config: &PlacerConfig,
        legalized: bool,
    ) -> Result<Self, IoError> {
        Ok(ResultFile {
            positions: placement_to_positions(placement, netlist),
            summary: ResultSummary {
                netlength_bb: total_bb_netlength(netlist, placement)?,
                overlap_area: total_overlap_area(placement, netlist)?,
                legal: is_legal(placement, netlist, area)?.is_legal(),
            },
            legalized,
            config: config.clone(),
        })
    }
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T, IoError> {
    serde_json::from_str(text).map_err(|e| IoError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn read_instance_file(path: &Path) -> Result<InstanceFile, IoError> {
    parse(path, &read(path)?)
}

pub fn load_instance(path: &Path) -> Result<Instance, IoError> {
    read_instance_file(path)?.to_instance()
}

pub fn load_result(path: &Path) -> Result<ResultFile, IoError> {
    parse(path, &read(path)?)
}

pub fn load_config(path: &Path) -> Result<PlacerConfig, IoError> {
    parse(path, &read(path)?)
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("plain data serializes");
    out.push(b'\n');
    out
}

pub fn save_instance(path: &Path, instance: &InstanceFile) -> Result<(), IoError> {
    write_atomic(path, &to_json(instance))
}

pub fn save_result(path: &Path, result: &ResultFile) -> Result<(), IoError> {
    write_atomic(path, &to_json(result))
}

/// Writes via a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let err = |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(bytes).map_err(err)?;
    tmp.as_file().sync_all().map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

/// The statistics stream as CSV with a fixed header.
pub fn stats_csv(stats: &[RoundStats]) -> String {
    let mut out = String::with_capacity(64 * (stats.len() + 1));
    out.push_str(RoundStats::CSV_HEADER);
    out.push('\n');
    for s in stats {
        out.push_str(&s.csv_line());
        out.push('\n');
    }
    out
}
