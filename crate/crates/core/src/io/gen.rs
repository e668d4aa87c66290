//! Random instance generator.
//!
//! Nets are mostly 2-pin, sometimes 3-pin and rarely larger, and no macro is
//! put in more than `max_nets_per_macro` nets. The area is a square sized so
//! the total macro area divided by the area equals the utilization target.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AreaSpec, InstanceFile, IoError, NetSpec};
use crate::netmodel::Macro;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenSpec {
    pub macros: usize,
    /// Integer side lengths are drawn uniformly from `size_min..=size_max`.
    pub size_min: u32,
    pub size_max: u32,
    pub nets: usize,
    /// Relative weights of net degrees 2, 3, 4, ...
    pub degree_weights: Vec<f64>,
    pub max_nets_per_macro: usize,
    pub utilization: f64,
    pub seed: u64,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            macros: 20,
            size_min: 2,
            size_max: 8,
            nets: 30,
            degree_weights: vec![0.7, 0.2, 0.07, 0.03],
            max_nets_per_macro: 10,
            utilization: 0.5,
            seed: 1,
        }
    }
}

fn pick_degree<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i + 2;
        }
        u -= w;
    }
    weights.len() + 1
}

pub fn generate_instance(spec: &GenSpec) -> Result<InstanceFile, IoError> {
    let fail = |msg: String| Err(IoError::Generate(msg));
    if !(spec.utilization > 0.0 && spec.utilization <= 1.0) {
        return fail(format!("utilization must lie in (0, 1], got {}", spec.utilization));
    }
    if spec.size_min == 0 || spec.size_min > spec.size_max {
        return fail(format!("bad size range {}..={}", spec.size_min, spec.size_max));
    }
    if spec.degree_weights.is_empty() || spec.degree_weights.iter().any(|w| w.is_nan() || *w < 0.0) {
        return fail("degree weights must be non-negative and non-empty".into());
    }
    if spec.degree_weights.iter().sum::<f64>() <= 0.0 {
        return fail("degree weights sum to zero".into());
    }
    if spec.nets > 0 && spec.macros < 2 {
        return fail("nets need at least 2 macros".into());
    }
    if spec.macros > 0 && 2 * spec.nets > spec.macros * spec.max_nets_per_macro {
        return fail(format!(
            "{} nets cannot fit with {} macros in at most {} nets each",
            spec.nets, spec.macros, spec.max_nets_per_macro
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let macros: Vec<Macro> = (0..spec.macros)
        .map(|i| {
            let sx = rng.gen_range(spec.size_min..=spec.size_max);
            let sy = rng.gen_range(spec.size_min..=spec.size_max);
            Macro::new(format!("m{i}"), f64::from(sx), f64::from(sy))
        })
        .collect();
    let total: f64 = macros.iter().map(Macro::area).sum();
    let side = if macros.is_empty() {
        f64::from(spec.size_max)
    } else {
        (total / spec.utilization).sqrt()
    };
    if let Some(m) = macros.iter().find(|m| m.size_x > side || m.size_y > side) {
        return fail(format!("macro '{}' does not fit the {side:.3} wide area", m.id));
    }

    let mut uses = vec![0usize; spec.macros];
    let mut nets = Vec::with_capacity(spec.nets);
    for i in 0..spec.nets {
        let open: Vec<usize> = (0..spec.macros).filter(|&m| uses[m] < spec.max_nets_per_macro).collect();
        if open.len() < 2 {
            return fail(format!("ran out of macros with free net capacity at net {i}"));
        }
        let degree = pick_degree(&spec.degree_weights, &mut rng).min(open.len());
        let mut members: Vec<usize> = sample(&mut rng, open.len(), degree).into_iter().map(|k| open[k]).collect();
        members.sort_unstable();
        for &m in &members {
            uses[m] += 1;
        }
        nets.push(NetSpec {
            name: Some(format!("n{i}")),
            members: members.iter().map(|&m| macros[m].id.clone()).collect(),
        });
    }

    Ok(InstanceFile {
        area: AreaSpec {
            width: side,
            height: side,
        },
        blockages: Vec::new(),
        macros,
        nets,
        initial_placement: None,
    })
}
