//! Result checker.
//!
//! Works directly on the file structures and recomputes legality and the
//! bounding-box netlength with its own geometry, so it shares nothing with
//! the placer's bookkeeping.

use std::collections::HashMap;

use super::{InstanceFile, IoError, ResultFile};

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CheckReport {
    pub netlength_bb: f64,
    pub out_of_area: Vec<String>,
    pub overlapping: Vec<(String, String)>,
    /// Macro id and blockage index.
    pub blocked: Vec<(String, usize)>,
}

impl CheckReport {
    pub fn is_legal(&self) -> bool {
        self.out_of_area.is_empty() && self.overlapping.is_empty() && self.blocked.is_empty()
    }
}

// (x1, y1, x2, y2), half-open on the low side
type Box2 = (f64, f64, f64, f64);

fn strictly_overlap(a: Box2, b: Box2) -> bool {
    a.0.max(b.0) + EPS < a.2.min(b.2) && a.1.max(b.1) + EPS < a.3.min(b.3)
}

pub fn check_result(instance: &InstanceFile, result: &ResultFile) -> Result<CheckReport, IoError> {
    let mut pos: HashMap<&str, (f64, f64)> = HashMap::new();
    for p in &result.positions {
        pos.insert(p.id.as_str(), (p.x, p.y));
    }
    let missing: Vec<String> = instance
        .macros
        .iter()
        .filter(|m| !pos.contains_key(m.id.as_str()))
        .map(|m| m.id.clone())
        .collect();
    let unexpected: Vec<String> = result
        .positions
        .iter()
        .filter(|p| !instance.macros.iter().any(|m| m.id == p.id))
        .map(|p| p.id.clone())
        .collect();
    if !missing.is_empty() || !unexpected.is_empty() || pos.len() != result.positions.len() {
        return Err(IoError::Mismatch {
            missing,
            unexpected,
        });
    }

    let boxes: Vec<(&str, Box2)> = instance
        .macros
        .iter()
        .map(|m| {
            let (x, y) = pos[m.id.as_str()];
            (m.id.as_str(), (x - m.size_x / 2.0, y - m.size_y / 2.0, x + m.size_x / 2.0, y + m.size_y / 2.0))
        })
        .collect();

    let mut report = CheckReport::default();
    let (w, h) = (instance.area.width, instance.area.height);
    for (i, &(id, b)) in boxes.iter().enumerate() {
        if b.0 < -EPS || b.1 < -EPS || b.2 > w + EPS || b.3 > h + EPS {
            report.out_of_area.push(id.to_string());
        }
        for &(other, c) in &boxes[i + 1..] {
            if strictly_overlap(b, c) {
                report.overlapping.push((id.to_string(), other.to_string()));
            }
        }
        for (k, blk) in instance.blockages.iter().enumerate() {
            if strictly_overlap(b, (blk.x1, blk.y1, blk.x2, blk.y2)) {
                report.blocked.push((id.to_string(), k));
            }
        }
    }

    for net in &instance.nets {
        let mut xs = Vec::with_capacity(net.members.len());
        let mut ys = Vec::with_capacity(net.members.len());
        for id in &net.members {
            let &(x, y) = pos
                .get(id.as_str())
                .ok_or_else(|| IoError::Invalid(format!("net member '{id}' is not an instance macro")))?;
            xs.push(x);
            ys.push(y);
        }
        let span = |v: &[f64]| {
            v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min)
        };
        report.netlength_bb += span(&xs) + span(&ys);
    }
    Ok(report)
}
