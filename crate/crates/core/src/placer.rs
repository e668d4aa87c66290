//! The iterative global placer and a greedy final legalizer.
//!
//! Each round picks a random macro, proposes `t` nearby positions, moves the
//! macro to the cheapest of the proposals and its current position, and then
//! raises the dual cost field under every overlap the macro now has. Penalty
//! and overlap increments grow geometrically with the round number, so any
//! persistent overlap eventually becomes more expensive than separating.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netmodel::{
    beta_schedule, footprint, incident_length, is_legal, total_bb_netlength, total_overlap_area,
    Macro, ModelError, NetModel, Netlist, Placement, PlacementArea, Point, Rect, GEOM_EPS,
};
use crate::stepfield::{CostField, FieldError, GridRect};

/// Rounds between full recomputations of the running statistics.
const STATS_RESYNC: u64 = 1024;

#[derive(Debug, Error)]
pub enum PlaceError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("macro '{id}' ({size_x} x {size_y}) does not fit the {width} x {height} area")]
    MacroTooLarge {
        id: String,
        size_x: f64,
        size_y: f64,
        width: f64,
        height: f64,
    },
    #[error("initial placement: {0}")]
    BadInitial(String),
    #[error("all {0} rounds have already run")]
    Finished(u64),
    #[error("no legal position found for macro '{0}'")]
    LegalizationFailed(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Every tunable of the placer.
///
/// `delta_growth`, `overlap_growth` and `model_switch_round` default to values
/// derived from `max_rounds` when left unset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlacerConfig {
    pub max_rounds: u64,
    /// Candidate positions proposed per round (`t`).
    pub candidates: u32,
    pub grid_p: u32,
    pub grid_q: u32,
    /// Penalty constant `c`.
    pub penalty_c: f64,
    pub delta0: f64,
    /// Per-round multiplier of the penalty weight; defaults to `1000^(1/max_rounds)`.
    pub delta_growth: Option<f64>,
    /// Per-cell increment under overlaps in round 0.
    pub overlap_w0: f64,
    /// Per-round multiplier of the increment; defaults to `100^(1/max_rounds)`.
    pub overlap_growth: Option<f64>,
    pub inflation_rho: f64,
    pub blockage_weight: f64,
    pub seed: u64,
    /// First round scored with the exact bounding box; defaults to `0.8 * max_rounds`.
    pub model_switch_round: Option<u64>,
}

impl Default for PlacerConfig {
    fn default() -> Self {
        PlacerConfig {
            max_rounds: 50_000,
            candidates: 8,
            grid_p: 6,
            grid_q: 6,
            penalty_c: 1.0,
            delta0: 0.01,
            delta_growth: None,
            overlap_w0: 0.001,
            overlap_growth: None,
            inflation_rho: 0.9995,
            blockage_weight: 1000.0,
            seed: 1,
            model_switch_round: None,
        }
    }
}

impl PlacerConfig {
    pub fn validate(&self) -> Result<(), PlaceError> {
        let bad = |msg: String| Err(PlaceError::Config(msg));
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !(self.penalty_c.is_finite() && self.penalty_c >= 0.0) {
            return bad(format!("penalty_c must be non-negative, got {}", self.penalty_c));
        }
        if !pos(self.delta0) {
            return bad(format!("delta0 must be positive, got {}", self.delta0));
        }
        if let Some(g) = self.delta_growth {
            if !(g.is_finite() && g > 1.0) {
                return bad(format!("delta_growth must exceed 1, got {g}"));
            }
        }
        if !pos(self.overlap_w0) {
            return bad(format!("overlap_w0 must be positive, got {}", self.overlap_w0));
        }
        if let Some(g) = self.overlap_growth {
            if !(g.is_finite() && g >= 1.0) {
                return bad(format!("overlap_growth must be at least 1, got {g}"));
            }
        }
        if !(self.inflation_rho > 0.0 && self.inflation_rho <= 1.0) {
            return bad(format!("inflation_rho must lie in (0, 1], got {}", self.inflation_rho));
        }
        if !(self.blockage_weight.is_finite() && self.blockage_weight >= 0.0) {
            return bad(format!("blockage_weight must be non-negative, got {}", self.blockage_weight));
        }
        CostField::new(self.grid_p, self.grid_q)?;
        Ok(())
    }

    pub fn delta_growth(&self) -> f64 {
        self.delta_growth
            .unwrap_or_else(|| 1000f64.powf(1.0 / self.max_rounds.max(1) as f64))
    }

    pub fn overlap_growth(&self) -> f64 {
        self.overlap_growth
            .unwrap_or_else(|| 100f64.powf(1.0 / self.max_rounds.max(1) as f64))
    }

    pub fn model_switch_round(&self) -> u64 {
        self.model_switch_round
            .unwrap_or((self.max_rounds as f64 * 0.8).round() as u64)
    }

    /// Penalty weight `delta_step = delta0 * g^step`.
    pub fn delta(&self, step: u64) -> f64 {
        self.delta0 * self.delta_growth().powf(step as f64)
    }

    /// Per-cell overlap increment `w = w0 * growth^step`.
    pub fn overlap_increment(&self, step: u64) -> f64 {
        self.overlap_w0 * self.overlap_growth().powf(step as f64)
    }

    /// Scoring model for 1-based round `step`.
    pub fn model(&self, step: u64) -> NetModel {
        if step < self.model_switch_round() {
            NetModel::Smoothed {
                beta: beta_schedule(step, self.max_rounds).unwrap_or(1.0),
            }
        } else {
            NetModel::Bb
        }
    }
}

/// Feasible center range of a macro.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroBounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl MacroBounds {
    pub fn new(m: &Macro, area: &PlacementArea) -> Result<Self, PlaceError> {
        let b = MacroBounds {
            x_min: m.size_x / 2.0,
            x_max: area.width - m.size_x / 2.0,
            y_min: m.size_y / 2.0,
            y_max: area.height - m.size_y / 2.0,
        };
        if b.x_min > b.x_max || b.y_min > b.y_max {
            return Err(PlaceError::MacroTooLarge {
                id: m.id.clone(),
                size_x: m.size_x,
                size_y: m.size_y,
                width: area.width,
                height: area.height,
            });
        }
        Ok(b)
    }

    pub fn clamp(&self, p: Point) -> Point {
        Point::new(p.x.clamp(self.x_min, self.x_max), p.y.clamp(self.y_min, self.y_max))
    }

    pub fn contains(&self, p: Point) -> bool {
        (self.x_min..=self.x_max).contains(&p.x) && (self.y_min..=self.y_max).contains(&p.y)
    }
}

fn cell_floor(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < 1e-9 {
        r
    } else {
        v.floor()
    }
}

fn cell_ceil(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < 1e-9 {
        r
    } else {
        v.ceil()
    }
}

/// Smallest block of grid cells covering `rect` after clipping it to the
/// area. `None` when nothing of positive size is left.
pub fn snap_to_grid(rect: &Rect, width: f64, height: f64, n: u32, m: u32) -> Option<GridRect> {
    let x1 = rect.x1.max(0.0);
    let y1 = rect.y1.max(0.0);
    let x2 = rect.x2.min(width);
    let y2 = rect.y2.min(height);
    if !(x1 < x2 && y1 < y2) {
        return None;
    }
    let (cx, cy) = (width / f64::from(n), height / f64::from(m));
    let a1 = (cell_floor(x1 / cx) as u32).min(n - 1);
    let b1 = (cell_floor(y1 / cy) as u32).min(m - 1);
    let a2 = (cell_ceil(x2 / cx) as u32).clamp(a1 + 1, n);
    let b2 = (cell_ceil(y2 / cy) as u32).clamp(b1 + 1, m);
    Some(GridRect::new(a1, b1, a2, b2))
}

/// Log-uniform jump length on `[1, span]`; zero when less than one unit of
/// room is left.
pub fn gamma(span: f64, u: f64) -> f64 {
    if span < 1.0 {
        0.0
    } else {
        (span.ln() * u).exp()
    }
}

/// One coordinate of a proposal: `toward_low` moves toward the lower bound.
pub fn propose_axis(x: f64, lo: f64, hi: f64, toward_low: bool, u: f64) -> f64 {
    let next = if toward_low {
        x - gamma(x - lo + 1.0, u)
    } else {
        x + gamma(hi - x, u)
    };
    next.clamp(lo, hi)
}

/// Random nearby position for a macro currently at `pos`.
pub fn move_macro<R: Rng + ?Sized>(pos: Point, bounds: &MacroBounds, rng: &mut R) -> Point {
    let a: bool = rng.gen();
    let b: bool = rng.gen();
    let ux: f64 = rng.gen();
    let uy: f64 = rng.gen();
    Point::new(
        propose_axis(pos.x, bounds.x_min, bounds.x_max, a, ux),
        propose_axis(pos.y, bounds.y_min, bounds.y_max, b, uy),
    )
}

/// `c * delta * sum Circ(overlap)` over every other placed macro.
pub fn penalty(
    m: usize,
    pos: Point,
    placement: &Placement,
    netlist: &Netlist,
    c: f64,
    delta: f64,
) -> f64 {
    let fp = footprint(&netlist.macros()[m], pos);
    let circ: f64 = netlist
        .macros()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != m)
        .filter_map(|(i, other)| placement.get(i).map(|p| footprint(other, p)))
        .filter_map(|g| fp.intersection(&g))
        .map(|r| r.circumference())
        .sum();
    c * delta * circ
}

/// One line of the per-round statistics stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundStats {
    pub round: u64,
    pub netlength_bb: f64,
    pub overlap_area: f64,
    pub delta: f64,
    pub beta: f64,
    pub w: f64,
}

impl RoundStats {
    pub const CSV_HEADER: &'static str = "round,netlength_bb,overlap_area,delta,beta,w";

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.round, self.netlength_bb, self.overlap_area, self.delta, self.beta, self.w
        )
    }
}

/// Placer state between rounds.
pub struct Placer<'a> {
    netlist: &'a Netlist,
    area: &'a PlacementArea,
    config: PlacerConfig,
    bounds: Vec<MacroBounds>,
    placement: Placement,
    field: CostField,
    round: u64,
    rng: ChaCha8Rng,
    netlength: f64,
    overlap: f64,
}

impl<'a> Placer<'a> {
    /// Validates inputs, sets up the initial placement (random when
    /// `initial` is `None`) and seeds the field with the blockage cost.
    /// Initial positions outside a macro's feasible range are clamped.
    pub fn new(
        netlist: &'a Netlist,
        area: &'a PlacementArea,
        initial: Option<&Placement>,
        config: PlacerConfig,
    ) -> Result<Self, PlaceError> {
        config.validate()?;
        let bounds = netlist
            .macros()
            .iter()
            .map(|m| MacroBounds::new(m, area))
            .collect::<Result<Vec<_>, _>>()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let placement = match initial {
            Some(p) => {
                if p.len() != netlist.len() {
                    return Err(PlaceError::BadInitial(format!(
                        "{} positions for {} macros",
                        p.len(),
                        netlist.len()
                    )));
                }
                let pts = p.points(netlist)?;
                Placement::from_points(pts.iter().zip(&bounds).map(|(&q, b)| b.clamp(q)).collect())
            }
            None => random_placement(&bounds, &mut rng),
        };
        let mut field = CostField::new(config.grid_p, config.grid_q)?;
        if config.blockage_weight > 0.0 {
            for b in &area.blockages {
                if let Some(r) = snap_to_grid(b, area.width, area.height, field.n(), field.m()) {
                    field.increase(&r, config.blockage_weight)?;
                }
            }
        }
        let netlength = total_bb_netlength(netlist, &placement)?;
        let overlap = total_overlap_area(&placement, netlist)?;
        Ok(Placer {
            netlist,
            area,
            config,
            bounds,
            placement,
            field,
            round: 0,
            rng,
            netlength,
            overlap,
        })
    }

    pub fn placement(&self) -> &Placement {
        &self.placement
    }

    pub fn field(&self) -> &CostField {
        &self.field
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn config(&self) -> &PlacerConfig {
        &self.config
    }

    pub fn bounds(&self) -> &[MacroBounds] {
        &self.bounds
    }

    pub fn is_finished(&self) -> bool {
        self.round >= self.config.max_rounds
    }

    /// Running total bounding-box netlength.
    pub fn netlength(&self) -> f64 {
        self.netlength
    }

    /// Running total pairwise overlap area.
    pub fn overlap_area(&self) -> f64 {
        self.overlap
    }

    fn snap(&self, r: &Rect) -> Option<GridRect> {
        snap_to_grid(r, self.area.width, self.area.height, self.field.n(), self.field.m())
    }

    /// Field integral over the snapped footprint, netlength of the macro's
    /// nets after the move, overlap penalty and blockage overlap area.
    pub fn candidate_score(
        &self,
        m: usize,
        pos: Point,
        model: &NetModel,
        delta: f64,
    ) -> Result<f64, PlaceError> {
        let mac = &self.netlist.macros()[m];
        let fp = footprint(mac, pos);
        let weight = match self.snap(&fp) {
            Some(r) => self.field.cost(&r)?,
            None => 0.0,
        };
        let nets = incident_length(self.netlist, m, pos, &self.placement, model)?;
        let pen = penalty(m, pos, &self.placement, self.netlist, self.config.penalty_c, delta);
        let blocked: f64 = self
            .area
            .blockages
            .iter()
            .filter_map(|b| fp.intersection(b))
            .map(|r| r.area())
            .sum();
        Ok(weight + nets + pen + self.config.blockage_weight * blocked)
    }

    /// Runs one round and returns its statistics.
    pub fn round_step(&mut self) -> Result<RoundStats, PlaceError> {
        if self.is_finished() {
            return Err(PlaceError::Finished(self.config.max_rounds));
        }
        let step = self.round + 1;
        let delta = self.config.delta(step);
        let w = self.config.overlap_increment(step);
        let beta = beta_schedule(step, self.config.max_rounds)?;
        let model = self.config.model(step);

        if !self.netlist.is_empty() {
            let m = self.rng.gen_range(0..self.netlist.len());
            let current = self.placement.get(m).expect("placement is total");
            let mut best = current;
            let mut best_score = self.candidate_score(m, current, &model, delta)?;
            for _ in 0..self.config.candidates {
                let cand = move_macro(current, &self.bounds[m], &mut self.rng);
                let score = self.candidate_score(m, cand, &model, delta)?;
                if score < best_score {
                    best = cand;
                    best_score = score;
                }
            }
            self.apply_move(m, current, best)?;
        }

        self.field.inflate(self.config.inflation_rho)?;
        self.round = step;
        if step.is_multiple_of(STATS_RESYNC) {
            self.netlength = total_bb_netlength(self.netlist, &self.placement)?;
            self.overlap = total_overlap_area(&self.placement, self.netlist)?;
        }
        Ok(RoundStats {
            round: step,
            netlength_bb: self.netlength,
            overlap_area: self.overlap,
            delta,
            beta,
            w,
        })
    }

    fn apply_move(&mut self, m: usize, old: Point, new: Point) -> Result<(), PlaceError> {
        let mac = &self.netlist.macros()[m];
        let w = self.config.overlap_increment(self.round + 1);
        let before = incident_length(self.netlist, m, old, &self.placement, &NetModel::Bb)?;
        let after = incident_length(self.netlist, m, new, &self.placement, &NetModel::Bb)?;
        self.netlength += after - before;

        let (fold, fnew) = (footprint(mac, old), footprint(mac, new));
        let mut increases = Vec::new();
        for (i, other) in self.netlist.macros().iter().enumerate() {
            if i == m {
                continue;
            }
            let g = footprint(other, self.placement.get(i).expect("placement is total"));
            let was = fold.intersection(&g).map_or(0.0, |r| r.area());
            let now = fnew.intersection(&g);
            self.overlap += now.map_or(0.0, |r| r.area()) - was;
            if let Some(r) = now.as_ref().and_then(|r| self.snap(r)) {
                increases.push(r);
            }
        }
        if self.overlap.abs() < GEOM_EPS {
            self.overlap = 0.0;
        }
        for r in &increases {
            self.field.increase(r, w)?;
        }
        self.placement.set(m, new);
        Ok(())
    }

    /// Runs the remaining rounds, handing each round's statistics to `observe`.
    pub fn run_with<F: FnMut(&RoundStats)>(
        mut self,
        mut observe: F,
    ) -> Result<(Placement, Vec<RoundStats>), PlaceError> {
        let mut trace = Vec::with_capacity((self.config.max_rounds - self.round) as usize);
        if self.netlist.is_empty() {
            return Ok((self.placement, trace));
        }
        while !self.is_finished() {
            let stats = self.round_step()?;
            observe(&stats);
            trace.push(stats);
        }
        Ok((self.placement, trace))
    }
}

fn random_placement<R: Rng + ?Sized>(bounds: &[MacroBounds], rng: &mut R) -> Placement {
    let uniform = |rng: &mut R, lo: f64, hi: f64| if lo < hi { rng.gen_range(lo..=hi) } else { lo };
    Placement::from_points(
        bounds
            .iter()
            .map(|b| {
                let x = uniform(rng, b.x_min, b.x_max);
                let y = uniform(rng, b.y_min, b.y_max);
                Point::new(x, y)
            })
            .collect(),
    )
}

/// Runs the full placement; returns the final placement and one statistics
/// record per round (none for an empty netlist).
pub fn run_placer(
    netlist: &Netlist,
    area: &PlacementArea,
    initial: Option<&Placement>,
    config: PlacerConfig,
) -> Result<(Placement, Vec<RoundStats>), PlaceError> {
    Placer::new(netlist, area, initial, config)?.run_with(|_| {})
}

/// Coordinates worth trying along one axis, nearest to `target` first.
fn axis_candidates(target: f64, lo: f64, hi: f64, edges: &[f64], steps: u32) -> Vec<f64> {
    let mut out = vec![lo, hi, target.clamp(lo, hi)];
    out.extend(edges.iter().copied().filter(|v| (lo..=hi).contains(v)));
    if hi > lo {
        let h = (hi - lo) / f64::from(steps);
        out.extend((1..steps).map(|i| lo + h * f64::from(i)));
    }
    out.sort_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()).then(a.total_cmp(b)));
    out.dedup();
    out
}

/// Greedy legalizer. Macros are visited largest first; each keeps its
/// position when that is free, otherwise it moves to the nearest (Manhattan)
/// free position among the edges of already placed obstacles and a regular
/// sweep of its feasible range.
pub fn naive_legalize(
    placement: &Placement,
    netlist: &Netlist,
    area: &PlacementArea,
) -> Result<Placement, PlaceError> {
    const SWEEP_STEPS: u32 = 128;
    let points = placement.points(netlist)?;
    let macros = netlist.macros();
    let mut order: Vec<usize> = (0..macros.len()).collect();
    order.sort_by(|&a, &b| macros[b].area().total_cmp(&macros[a].area()).then(a.cmp(&b)));

    let bounds_rect = area.bounds();
    let mut obstacles: Vec<Rect> = area.blockages.clone();
    let mut out = placement.clone();
    for &i in &order {
        let mac = &macros[i];
        let bounds = MacroBounds::new(mac, area)?;
        let free = |p: Point, obstacles: &[Rect]| {
            let fp = footprint(mac, p);
            bounds_rect.contains(&fp) && !obstacles.iter().any(|o| fp.overlaps(o))
        };
        let cur = points[i];
        let chosen = if free(cur, &obstacles) {
            cur
        } else {
            let (hx, hy) = (mac.size_x / 2.0, mac.size_y / 2.0);
            let xe: Vec<f64> = obstacles.iter().flat_map(|o| [o.x2 + hx, o.x1 - hx]).collect();
            let ye: Vec<f64> = obstacles.iter().flat_map(|o| [o.y2 + hy, o.y1 - hy]).collect();
            let xs = axis_candidates(cur.x, bounds.x_min, bounds.x_max, &xe, SWEEP_STEPS);
            let ys = axis_candidates(cur.y, bounds.y_min, bounds.y_max, &ye, SWEEP_STEPS);
            let mut combos: Vec<(f64, Point)> = xs
                .iter()
                .flat_map(|&x| ys.iter().map(move |&y| Point::new(x, y)))
                .map(|p| ((p.x - cur.x).abs() + (p.y - cur.y).abs(), p))
                .collect();
            combos.sort_by(|a, b| {
                a.0.total_cmp(&b.0)
                    .then(a.1.x.total_cmp(&b.1.x))
                    .then(a.1.y.total_cmp(&b.1.y))
            });
            combos
                .into_iter()
                .map(|(_, p)| p)
                .find(|&p| free(p, &obstacles))
                .ok_or_else(|| PlaceError::LegalizationFailed(mac.id.clone()))?
        };
        out.set(i, chosen);
        obstacles.push(footprint(mac, chosen));
    }
    let report = is_legal(&out, netlist, area)?;
    if !report.is_legal() {
        let culprit = report
            .out_of_area
            .first()
            .or(report.overlapping.first().map(|p| &p.1))
            .or(report.blocked.first().map(|p| &p.0))
            .copied()
            .unwrap_or(0);
        return Err(PlaceError::LegalizationFailed(macros[culprit].id.clone()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::Net;

    fn area(w: f64, h: f64) -> PlacementArea {
        PlacementArea::new(w, h, vec![]).unwrap()
    }

    #[test]
    fn snap_examples() {
        let r = snap_to_grid(&Rect::new(0.3, 0.2, 2.5, 1.0), 8.0, 8.0, 8, 8).unwrap();
        assert_eq!(r, GridRect::new(0, 0, 3, 1));
        let aligned = snap_to_grid(&Rect::new(1.0, 2.0, 3.0, 5.0), 8.0, 8.0, 8, 8).unwrap();
        assert_eq!(aligned, GridRect::new(1, 2, 3, 5));
        let inner = snap_to_grid(&Rect::new(4.2, 4.3, 4.6, 4.9), 8.0, 8.0, 8, 8).unwrap();
        assert_eq!(inner, GridRect::new(4, 4, 5, 5));
        // rounding noise on a grid line does not grow the cover
        let noisy = snap_to_grid(&Rect::new(0.1 * 3.0, 0.0, 0.6, 0.2), 1.0, 1.0, 10, 5);
        assert_eq!(noisy, Some(GridRect::new(3, 0, 6, 1)));
        assert_eq!(snap_to_grid(&Rect::new(2.0, 2.0, 2.0, 3.0), 8.0, 8.0, 8, 8), None);
        assert_eq!(snap_to_grid(&Rect::new(9.0, 2.0, 10.0, 3.0), 8.0, 8.0, 8, 8), None);
        let clipped = snap_to_grid(&Rect::new(-1.0, 7.5, 0.5, 9.0), 8.0, 8.0, 8, 8).unwrap();
        assert_eq!(clipped, GridRect::new(0, 7, 1, 8));
    }

    #[test]
    fn gamma_examples() {
        for x in [1.0, 2.5, 40.0] {
            assert_eq!(gamma(x, 0.0), 1.0);
            assert!((gamma(x, 1.0) - x).abs() < 1e-12);
        }
        assert_eq!(gamma(0.5, 0.3), 0.0);
        assert_eq!(gamma(0.0, 1.0), 0.0);
    }

    #[test]
    fn propose_axis_examples() {
        assert_eq!(propose_axis(5.0, 1.0, 9.0, true, 0.0), 4.0);
        assert_eq!(propose_axis(1.5, 1.0, 9.0, true, 0.0), 1.0);
        assert_eq!(propose_axis(9.0, 1.0, 9.0, false, 0.7), 9.0);
        // the leftward jump never leaves the range
        assert_eq!(propose_axis(3.0, 1.0, 9.0, true, 1.0), 1.0);
    }

    #[test]
    fn penalty_examples() {
        let nl = Netlist::new(vec![Macro::new("a", 2.0, 3.0), Macro::new("b", 4.0, 4.0)], vec![]).unwrap();
        let mut p = Placement::empty(2);
        p.set(1, Point::new(10.0, 10.0));
        assert_eq!(penalty(0, Point::new(1.0, 1.5), &p, &nl, 1.0, 0.5), 0.0);
        // a sits inside b: intersection 2 x 3
        assert_eq!(penalty(0, Point::new(10.0, 10.0), &p, &nl, 1.0, 0.5), 5.0);
        // touching only: zero-width intersection contributes nothing
        assert_eq!(penalty(0, Point::new(13.0, 10.0), &p, &nl, 1.0, 0.5), 0.0);
    }

    #[test]
    fn config_defaults_and_validation() {
        let c = PlacerConfig::default();
        c.validate().unwrap();
        let ratio = c.delta(c.max_rounds) / c.delta0;
        assert!((ratio - 1000.0).abs() < 1e-6 * 1000.0);
        assert_eq!(c.model_switch_round(), 40_000);
        assert!(matches!(c.model(1), NetModel::Smoothed { beta } if beta == 1.0));
        assert_eq!(c.model(40_000), NetModel::Bb);
        for bad in [
            PlacerConfig { inflation_rho: 0.0, ..c.clone() },
            PlacerConfig { delta0: -1.0, ..c.clone() },
            PlacerConfig { delta_growth: Some(1.0), ..c.clone() },
            PlacerConfig { overlap_growth: Some(0.9), ..c.clone() },
            PlacerConfig { grid_p: 40, ..c.clone() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn single_macro_never_worsens() {
        let nl = Netlist::new(vec![Macro::new("a", 2.0, 2.0)], vec![]).unwrap();
        let ar = area(16.0, 16.0);
        let cfg = PlacerConfig { max_rounds: 200, seed: 3, ..Default::default() };
        let mut placer = Placer::new(&nl, &ar, None, cfg).unwrap();
        while !placer.is_finished() {
            let before = placer.placement().get(0).unwrap();
            let step = placer.round() + 1;
            let model = placer.config().model(step);
            let delta = placer.config().delta(step);
            let stay = placer.candidate_score(0, before, &model, delta).unwrap();
            placer.round_step().unwrap();
            let after = placer.placement().get(0).unwrap();
            assert!(placer.candidate_score(0, after, &model, delta).unwrap() <= stay);
            assert!(placer.bounds()[0].contains(after));
        }
        let (p, _) = run_placer(&nl, &ar, None, PlacerConfig { max_rounds: 50, ..Default::default() }).unwrap();
        assert!(is_legal(&p, &nl, &ar).unwrap().is_legal());
    }

    #[test]
    fn zero_candidates_keep_placement_but_grow_field() {
        let nl = Netlist::new(vec![Macro::new("a", 2.0, 2.0), Macro::new("b", 2.0, 2.0)], vec![]).unwrap();
        let ar = area(8.0, 8.0);
        let init = Placement::from_points(vec![Point::new(3.0, 3.0), Point::new(3.5, 3.0)]);
        let cfg = PlacerConfig { max_rounds: 20, candidates: 0, inflation_rho: 1.0, ..Default::default() };
        let mut placer = Placer::new(&nl, &ar, Some(&init), cfg).unwrap();
        let probe = GridRect::new(0, 0, 64, 64);
        let mut last = 0.0;
        while !placer.is_finished() {
            placer.round_step().unwrap();
            let c = placer.field().cost(&probe).unwrap();
            assert!(c > last);
            last = c;
        }
        assert_eq!(placer.placement(), &init);
        assert!(placer.round_step().is_err());
    }

    #[test]
    fn empty_instance() {
        let nl = Netlist::new(vec![], vec![]).unwrap();
        let (p, trace) = run_placer(&nl, &area(4.0, 4.0), None, PlacerConfig::default()).unwrap();
        assert!(p.is_empty());
        assert!(trace.is_empty());
    }

    #[test]
    fn oversized_macro_rejected() {
        let nl = Netlist::new(vec![Macro::new("big", 5.0, 1.0)], vec![]).unwrap();
        let err = run_placer(&nl, &area(4.0, 4.0), None, PlacerConfig::default()).err().unwrap();
        assert!(matches!(err, PlaceError::MacroTooLarge { ref id, .. } if id == "big"));
    }

    #[test]
    fn attraction_toward_neighbor() {
        let nl = Netlist::new(
            vec![Macro::new("m", 1.0, 1.0), Macro::new("fixed", 1.0, 1.0)],
            vec![Net { name: "e".into(), members: vec![0, 1] }],
        )
        .unwrap();
        let ar = area(16.0, 16.0);
        let init = Placement::from_points(vec![Point::new(2.0, 2.0), Point::new(10.0, 10.0)]);
        let placer = Placer::new(&nl, &ar, Some(&init), PlacerConfig::default()).unwrap();
        let score = |x: f64, y: f64| placer.candidate_score(0, Point::new(x, y), &NetModel::Bb, 0.0).unwrap();
        assert_eq!(score(10.0, 10.0), 0.0);
        assert!(score(10.0, 10.0) < score(9.0, 10.0));
        assert!(score(9.0, 10.0) < score(2.0, 2.0));
    }

    #[test]
    fn legalize_examples() {
        let nl = Netlist::new(vec![Macro::new("a", 1.0, 1.0), Macro::new("b", 1.0, 1.0)], vec![]).unwrap();
        let ar = area(2.0, 1.0);
        let legal = Placement::from_points(vec![Point::new(0.5, 0.5), Point::new(1.5, 0.5)]);
        assert_eq!(naive_legalize(&legal, &nl, &ar).unwrap(), legal);

        let stacked = Placement::from_points(vec![Point::new(0.5, 0.5), Point::new(0.5, 0.5)]);
        let fixed = naive_legalize(&stacked, &nl, &ar).unwrap();
        assert!(is_legal(&fixed, &nl, &ar).unwrap().is_legal());
        assert_eq!(fixed.get(0), Some(Point::new(0.5, 0.5)));
        assert_eq!(fixed.get(1), Some(Point::new(1.5, 0.5)));

        let crowded = Netlist::new(
            vec![Macro::new("a", 1.0, 1.0), Macro::new("b", 1.0, 1.0), Macro::new("c", 1.0, 1.0)],
            vec![],
        )
        .unwrap();
        let p = Placement::from_points(vec![Point::new(0.5, 0.5); 3]);
        assert!(matches!(
            naive_legalize(&p, &crowded, &ar),
            Err(PlaceError::LegalizationFailed(id)) if id == "c"
        ));
    }

    #[test]
    fn legalize_avoids_blockages() {
        let nl = Netlist::new(vec![Macro::new("a", 2.0, 2.0)], vec![]).unwrap();
        let ar = PlacementArea::new(6.0, 2.0, vec![Rect::new(0.0, 0.0, 3.0, 2.0)]).unwrap();
        let p = Placement::from_points(vec![Point::new(1.0, 1.0)]);
        let out = naive_legalize(&p, &nl, &ar).unwrap();
        assert_eq!(out.get(0), Some(Point::new(4.0, 1.0)));
    }
}
