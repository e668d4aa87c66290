//! Netlists, placements, legality and netlength models.
//!
//! Coordinates are real area units with the origin at the lower-left corner
//! of the placement area. Every pin of a macro sits at its center, so nets
//! are measured between macro centers.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance for geometric predicates. Intersections thinner than
/// this and boundary excursions smaller than this are ignored, so positions
/// that differ from an exact tiling only by rounding still count as legal.
pub const GEOM_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("macro '{id}': {reason}")]
    InvalidMacro { id: String, reason: String },
    #[error("duplicate macro id '{0}'")]
    DuplicateMacro(String),
    #[error("net '{net}' references unknown macro '{member}'")]
    UnknownMember { net: String, member: String },
    #[error("net '{net}' has {count} distinct member(s); at least 2 are required")]
    NetTooSmall { net: String, count: usize },
    #[error("invalid placement area: {0}")]
    InvalidArea(String),
    #[error("macro '{0}' has no position")]
    MissingPosition(String),
    #[error("macro '{macro_id}' of net '{net}' has no position")]
    UnplacedMember { macro_id: String, net: String },
    #[error("a net needs at least 2 pins, got {0}")]
    TooFewPoints(usize),
    #[error("round {round} is outside 1..={max_rounds}")]
    RoundOutOfRange { round: u64, max_rounds: u64 },
    #[error("invalid model parameter: {0}")]
    BadParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

/// Axis-parallel rectangle `(x1, x2] x (y1, y2]` in area units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl Rect {
    pub const fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        Rect { x1, y1, x2, y2 }
    }

    pub fn width(&self) -> f64 {
        (self.x2 - self.x1).max(0.0)
    }

    pub fn height(&self) -> f64 {
        (self.y2 - self.y1).max(0.0)
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Perimeter; zero for a degenerate rectangle.
    pub fn circumference(&self) -> f64 {
        if self.width() > 0.0 && self.height() > 0.0 {
            2.0 * (self.width() + self.height())
        } else {
            0.0
        }
    }

    /// The common part of two rectangles, if it has positive area.
    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let r = Rect {
            x1: self.x1.max(other.x1),
            y1: self.y1.max(other.y1),
            x2: self.x2.min(other.x2),
            y2: self.y2.min(other.y2),
        };
        (r.x1 < r.x2 && r.y1 < r.y2).then_some(r)
    }

    /// Overlap test with [`GEOM_EPS`] slack on both axes.
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.x1.max(other.x1) + GEOM_EPS < self.x2.min(other.x2)
            && self.y1.max(other.y1) + GEOM_EPS < self.y2.min(other.y2)
    }

    /// Containment with [`GEOM_EPS`] slack.
    pub fn contains(&self, inner: &Rect) -> bool {
        inner.x1 >= self.x1 - GEOM_EPS
            && inner.y1 >= self.y1 - GEOM_EPS
            && inner.x2 <= self.x2 + GEOM_EPS
            && inner.y2 <= self.y2 + GEOM_EPS
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Macro {
    pub id: String,
    pub size_x: f64,
    pub size_y: f64,
}

impl Macro {
    pub fn new(id: impl Into<String>, size_x: f64, size_y: f64) -> Self {
        Macro {
            id: id.into(),
            size_x,
            size_y,
        }
    }

    pub fn area(&self) -> f64 {
        self.size_x * self.size_y
    }

    /// The region the macro occupies when centered at `pos`.
    pub fn footprint(&self, pos: Point) -> Rect {
        footprint(self, pos)
    }
}

pub fn footprint(m: &Macro, pos: Point) -> Rect {
    let (hx, hy) = (m.size_x / 2.0, m.size_y / 2.0);
    Rect::new(pos.x - hx, pos.y - hy, pos.x + hx, pos.y + hy)
}

/// A net over macro indices of its netlist.
#[derive(Debug, Clone, PartialEq)]
pub struct Net {
    pub name: String,
    pub members: Vec<usize>,
}

/// Macros plus the hypergraph of nets over them.
#[derive(Debug, Clone, PartialEq)]
pub struct Netlist {
    macros: Vec<Macro>,
    nets: Vec<Net>,
    nets_of: Vec<Vec<usize>>,
    by_id: HashMap<String, usize>,
}

impl Netlist {
    /// Validates the macros and nets; duplicate members of a net are merged.
    pub fn new(macros: Vec<Macro>, nets: Vec<Net>) -> Result<Self, ModelError> {
        let mut by_id = HashMap::with_capacity(macros.len());
        for (i, m) in macros.iter().enumerate() {
            if !(m.size_x.is_finite() && m.size_x > 0.0 && m.size_y.is_finite() && m.size_y > 0.0) {
                return Err(ModelError::InvalidMacro {
                    id: m.id.clone(),
                    reason: format!("sizes must be positive, got {} x {}", m.size_x, m.size_y),
                });
            }
            if by_id.insert(m.id.clone(), i).is_some() {
                return Err(ModelError::DuplicateMacro(m.id.clone()));
            }
        }
        let mut nets_of = vec![Vec::new(); macros.len()];
        let mut clean = Vec::with_capacity(nets.len());
        for (ni, mut net) in nets.into_iter().enumerate() {
            if let Some(&bad) = net.members.iter().find(|&&m| m >= macros.len()) {
                return Err(ModelError::UnknownMember {
                    net: net.name,
                    member: format!("#{bad}"),
                });
            }
            let mut seen = Vec::with_capacity(net.members.len());
            net.members.retain(|m| {
                let fresh = !seen.contains(m);
                seen.push(*m);
                fresh
            });
            if net.members.len() < 2 {
                return Err(ModelError::NetTooSmall {
                    net: net.name,
                    count: net.members.len(),
                });
            }
            for &m in &net.members {
                nets_of[m].push(ni);
            }
            clean.push(net);
        }
        Ok(Netlist {
            macros,
            nets: clean,
            nets_of,
            by_id,
        })
    }

    pub fn macros(&self) -> &[Macro] {
        &self.macros
    }

    pub fn nets(&self) -> &[Net] {
        &self.nets
    }

    /// Indices of the nets containing macro `m`.
    pub fn nets_of(&self, m: usize) -> &[usize] {
        &self.nets_of[m]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.macros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.macros.is_empty()
    }

    pub fn total_macro_area(&self) -> f64 {
        self.macros.iter().map(Macro::area).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementArea {
    pub width: f64,
    pub height: f64,
    #[serde(default)]
    pub blockages: Vec<Rect>,
}

impl PlacementArea {
    pub fn new(width: f64, height: f64, blockages: Vec<Rect>) -> Result<Self, ModelError> {
        if !(width.is_finite() && width > 0.0 && height.is_finite() && height > 0.0) {
            return Err(ModelError::InvalidArea(format!(
                "size must be positive, got {width} x {height}"
            )));
        }
        let area = PlacementArea {
            width,
            height,
            blockages,
        };
        for (i, b) in area.blockages.iter().enumerate() {
            if !(b.x1 < b.x2 && b.y1 < b.y2) || !area.bounds().contains(b) {
                return Err(ModelError::InvalidArea(format!(
                    "blockage {i} ({}, {})-({}, {}) is empty or leaves the area",
                    b.x1, b.y1, b.x2, b.y2
                )));
            }
        }
        Ok(area)
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(0.0, 0.0, self.width, self.height)
    }

    pub fn size(&self) -> f64 {
        self.width * self.height
    }
}

/// Macro centers, indexed like the netlist's macros.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Placement {
    positions: Vec<Option<Point>>,
}

impl Placement {
    /// A placement of `count` macros with nothing placed yet.
    pub fn empty(count: usize) -> Self {
        Placement {
            positions: vec![None; count],
        }
    }

    pub fn from_points(points: Vec<Point>) -> Self {
        Placement {
            positions: points.into_iter().map(Some).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn get(&self, m: usize) -> Option<Point> {
        self.positions.get(m).copied().flatten()
    }

    pub fn set(&mut self, m: usize, pos: Point) {
        self.positions[m] = Some(pos);
    }

    pub fn is_total(&self) -> bool {
        self.positions.iter().all(Option::is_some)
    }

    pub fn iter(&self) -> impl Iterator<Item = Option<Point>> + '_ {
        self.positions.iter().copied()
    }

    /// All positions, failing on the first unplaced macro.
    pub fn points(&self, netlist: &Netlist) -> Result<Vec<Point>, ModelError> {
        netlist
            .macros()
            .iter()
            .enumerate()
            .map(|(i, m)| self.get(i).ok_or_else(|| ModelError::MissingPosition(m.id.clone())))
            .collect()
    }
}

/// Violations of the legality conditions. Indices refer to the netlist's
/// macros and the area's blockages.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LegalityReport {
    pub out_of_area: Vec<usize>,
    pub overlapping: Vec<(usize, usize)>,
    pub blocked: Vec<(usize, usize)>,
}

impl LegalityReport {
    pub fn is_legal(&self) -> bool {
        self.out_of_area.is_empty() && self.overlapping.is_empty() && self.blocked.is_empty()
    }
}

pub fn is_legal(
    placement: &Placement,
    netlist: &Netlist,
    area: &PlacementArea,
) -> Result<LegalityReport, ModelError> {
    let points = placement.points(netlist)?;
    let feet: Vec<Rect> = netlist
        .macros()
        .iter()
        .zip(&points)
        .map(|(m, &p)| footprint(m, p))
        .collect();
    let bounds = area.bounds();
    let mut report = LegalityReport::default();
    for (i, f) in feet.iter().enumerate() {
        if !bounds.contains(f) {
            report.out_of_area.push(i);
        }
        for (j, g) in feet.iter().enumerate().skip(i + 1) {
            if f.overlaps(g) {
                report.overlapping.push((i, j));
            }
        }
        for (b, blk) in area.blockages.iter().enumerate() {
            if f.overlaps(blk) {
                report.blocked.push((i, b));
            }
        }
    }
    Ok(report)
}

/// Sum of pairwise footprint intersection areas.
pub fn total_overlap_area(placement: &Placement, netlist: &Netlist) -> Result<f64, ModelError> {
    let points = placement.points(netlist)?;
    let feet: Vec<Rect> = netlist
        .macros()
        .iter()
        .zip(&points)
        .map(|(m, &p)| footprint(m, p))
        .collect();
    let mut total = 0.0;
    for (i, f) in feet.iter().enumerate() {
        for g in &feet[i + 1..] {
            total += f.intersection(g).map_or(0.0, |r| r.area());
        }
    }
    Ok(total)
}

fn check_points(points: &[Point]) -> Result<(), ModelError> {
    if points.len() < 2 {
        Err(ModelError::TooFewPoints(points.len()))
    } else {
        Ok(())
    }
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Half-perimeter of the bounding box of `points`.
pub fn bb_netlength(points: &[Point]) -> Result<f64, ModelError> {
    check_points(points)?;
    let (x0, x1) = extent(points.iter().map(|p| p.x));
    let (y0, y1) = extent(points.iter().map(|p| p.y));
    Ok((x1 - x0) + (y1 - y0))
}

fn lse_axis(values: &[f64], alpha: f64) -> f64 {
    let (lo, hi) = extent(values.iter().copied());
    let up: f64 = values.iter().map(|v| ((v - hi) / alpha).exp()).sum();
    let down: f64 = values.iter().map(|v| ((lo - v) / alpha).exp()).sum();
    (hi - lo) + alpha * (up.ln() + down.ln())
}

/// Log-sum-exp smoothing of the bounding box; approaches it from above as
/// `alpha -> 0`.
pub fn lse_netlength(points: &[Point], alpha: f64) -> Result<f64, ModelError> {
    check_points(points)?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(ModelError::BadParameter(format!("LSE alpha must be positive, got {alpha}")));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.y).collect();
    Ok(lse_axis(&xs, alpha) + lse_axis(&ys, alpha))
}

fn lp_pair(d: f64, alpha: f64, pw: f64) -> f64 {
    // (d^pw + alpha)^(1/pw) evaluated in log space so large pw cannot overflow.
    if d == 0.0 {
        return alpha.powf(1.0 / pw);
    }
    let (a, b) = (pw * d.ln(), alpha.ln());
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    ((hi + (lo - hi).exp().ln_1p()) / pw).exp()
}

/// `L_p` clique model over unordered pin pairs, using absolute coordinate
/// differences.
pub fn lp_netlength(points: &[Point], alpha: f64, pw: f64) -> Result<f64, ModelError> {
    check_points(points)?;
    if !(alpha > 0.0 && alpha.is_finite()) || !(pw >= 1.0 && pw.is_finite()) {
        return Err(ModelError::BadParameter(format!(
            "LP needs alpha > 0 and pw >= 1, got alpha = {alpha}, pw = {pw}"
        )));
    }
    let mut total = 0.0;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            total += lp_pair((p.x - q.x).abs(), alpha, pw);
            total += lp_pair((p.y - q.y).abs(), alpha, pw);
        }
    }
    Ok(total)
}

fn nl_axis(delta: f64, beta: f64) -> f64 {
    // log(e^z + e^-z) = |z| + log1p(e^(-2|z|))
    let z = (beta * delta).abs();
    (z + (-2.0 * z).exp().ln_1p()) / beta
}

/// Exponential smoothing of a single edge with coordinate differences
/// `dx`, `dy`.
pub fn nl_netlength(dx: f64, dy: f64, beta: f64) -> Result<f64, ModelError> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(ModelError::BadParameter(format!("NL beta must be positive, got {beta}")));
    }
    Ok(nl_axis(dx, beta) + nl_axis(dy, beta))
}

/// `max_rounds / (max_rounds - round + 1)`: 1 in the first round, `max_rounds`
/// in the last.
pub fn beta_schedule(round: u64, max_rounds: u64) -> Result<f64, ModelError> {
    if round < 1 || round > max_rounds {
        return Err(ModelError::RoundOutOfRange { round, max_rounds });
    }
    Ok(max_rounds as f64 / (max_rounds - round + 1) as f64)
}

/// Netlength model selector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NetModel {
    /// Exact bounding box.
    Bb,
    Lse { alpha: f64 },
    Lp { alpha: f64, pw: f64 },
    /// Exponential edge smoothing applied to the net's coordinate extents.
    Nl { beta: f64 },
    /// `Nl` on 2-pin nets, `Lse` with `alpha = 1 / beta` on larger nets.
    Smoothed { beta: f64 },
}

impl NetModel {
    pub fn length(&self, points: &[Point]) -> Result<f64, ModelError> {
        match *self {
            NetModel::Bb => bb_netlength(points),
            NetModel::Lse { alpha } => lse_netlength(points, alpha),
            NetModel::Lp { alpha, pw } => lp_netlength(points, alpha, pw),
            NetModel::Nl { beta } => {
                check_points(points)?;
                let (x0, x1) = extent(points.iter().map(|p| p.x));
                let (y0, y1) = extent(points.iter().map(|p| p.y));
                nl_netlength(x1 - x0, y1 - y0, beta)
            }
            NetModel::Smoothed { beta } if points.len() == 2 => {
                nl_netlength(points[0].x - points[1].x, points[0].y - points[1].y, beta)
            }
            NetModel::Smoothed { beta } => {
                if beta.is_nan() || beta <= 0.0 {
                    return Err(ModelError::BadParameter(format!("beta must be positive, got {beta}")));
                }
                lse_netlength(points, 1.0 / beta)
            }
        }
    }
}

fn net_points(
    netlist: &Netlist,
    net: usize,
    placement: &Placement,
    moved: Option<(usize, Point)>,
) -> Result<Vec<Point>, ModelError> {
    let n = &netlist.nets()[net];
    n.members
        .iter()
        .map(|&m| match moved {
            Some((mm, pos)) if mm == m => Ok(pos),
            _ => placement.get(m).ok_or_else(|| ModelError::UnplacedMember {
                macro_id: netlist.macros()[m].id.clone(),
                net: n.name.clone(),
            }),
        })
        .collect()
}

/// Length of net `net` under `model`.
pub fn net_length(
    netlist: &Netlist,
    net: usize,
    placement: &Placement,
    model: &NetModel,
) -> Result<f64, ModelError> {
    model.length(&net_points(netlist, net, placement, None)?)
}

/// Total length of the nets containing `m` with `m` moved to `pos`.
pub fn incident_length(
    netlist: &Netlist,
    m: usize,
    pos: Point,
    placement: &Placement,
    model: &NetModel,
) -> Result<f64, ModelError> {
    netlist
        .nets_of(m)
        .iter()
        .map(|&n| model.length(&net_points(netlist, n, placement, Some((m, pos)))?))
        .sum()
}

/// Field cost at the candidate plus the length of every net containing `m`,
/// with `m` hypothetically moved to `pos`.
pub fn marginal_cost(
    netlist: &Netlist,
    m: usize,
    pos: Point,
    placement: &Placement,
    field_cost: f64,
    model: &NetModel,
) -> Result<f64, ModelError> {
    Ok(field_cost + incident_length(netlist, m, pos, placement, model)?)
}

/// Sum of exact bounding-box lengths over all nets.
pub fn total_bb_netlength(netlist: &Netlist, placement: &Placement) -> Result<f64, ModelError> {
    (0..netlist.nets().len())
        .map(|n| net_length(netlist, n, placement, &NetModel::Bb))
        .sum()
}
