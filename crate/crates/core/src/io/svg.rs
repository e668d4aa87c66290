//! SVG rendering of a placement.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{write_atomic, InstanceFile, IoError, PositionEntry};

const CANVAS: f64 = 800.0;
const MARGIN: f64 = 10.0;

/// Renders the area outline, hatched blockages, labelled macro rectangles and
/// net wiring. 2-pin nets are drawn as a segment, larger nets as a star from
/// the centroid of their pins. Macros without a position are skipped.
pub fn render_svg(instance: &InstanceFile, positions: &[PositionEntry]) -> String {
    let (w, h) = (instance.area.width, instance.area.height);
    let scale = CANVAS / w.max(h);
    let px = |x: f64| MARGIN + x * scale;
    // SVG y grows downward
    let py = |y: f64| MARGIN + (h - y) * scale;
    let pos: HashMap<&str, (f64, f64)> = positions.iter().map(|p| (p.id.as_str(), (p.x, p.y))).collect();

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {:.3} {:.3}">"#,
        w * scale + 2.0 * MARGIN,
        h * scale + 2.0 * MARGIN,
        w * scale + 2.0 * MARGIN,
        h * scale + 2.0 * MARGIN
    );
    s.push_str(concat!(
        r#"<defs><pattern id="hatch" width="8" height="8" patternUnits="userSpaceOnUse" patternTransform="rotate(45)">"#,
        r##"<line x1="0" y1="0" x2="0" y2="8" stroke="#888" stroke-width="2"/></pattern></defs>"##,
        "\n"
    ));
    let _ = writeln!(
        s,
        r#"<rect class="area" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="black" stroke-width="2"/>"#,
        px(0.0),
        py(h),
        w * scale,
        h * scale
    );
    for b in &instance.blockages {
        let _ = writeln!(
            s,
            r##"<rect class="blockage" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="url(#hatch)" stroke="#444"/>"##,
            px(b.x1),
            py(b.y2),
            (b.x2 - b.x1) * scale,
            (b.y2 - b.y1) * scale
        );
    }
    for m in &instance.macros {
        let Some(&(x, y)) = pos.get(m.id.as_str()) else { continue };
        let _ = writeln!(
            s,
            r#"<rect class="macro" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="steelblue" fill-opacity="0.5" stroke="navy"/>"#,
            px(x - m.size_x / 2.0),
            py(y + m.size_y / 2.0),
            m.size_x * scale,
            m.size_y * scale
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" font-size="10" text-anchor="middle">{}</text>"#,
            px(x),
            py(y),
            escape(&m.id)
        );
    }
    for net in &instance.nets {
        let pins: Vec<(f64, f64)> = net.members.iter().filter_map(|id| pos.get(id.as_str()).copied()).collect();
        if pins.len() < 2 {
            continue;
        }
        let mut points = Vec::new();
        if pins.len() == 2 {
            points.push(pins[0]);
            points.push(pins[1]);
        } else {
            let k = pins.len() as f64;
            let c = (pins.iter().map(|p| p.0).sum::<f64>() / k, pins.iter().map(|p| p.1).sum::<f64>() / k);
            for &p in &pins {
                points.push(c);
                points.push(p);
            }
        }
        let coords: Vec<String> = points.iter().map(|&(x, y)| format!("{:.3},{:.3}", px(x), py(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline class="net" points="{}" fill="none" stroke="crimson" stroke-width="1"/>"#,
            coords.join(" ")
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn write_svg(path: &Path, instance: &InstanceFile, positions: &[PositionEntry]) -> Result<(), IoError> {
    write_atomic(path, render_svg(instance, positions).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::AreaSpec;
    use crate::netmodel::Macro;

    fn two_macros() -> (InstanceFile, Vec<PositionEntry>) {
        let inst = InstanceFile {
            area: AreaSpec { width: 10.0, height: 5.0 },
            blockages: vec![],
            macros: vec![Macro::new("a", 2.0, 2.0), Macro::new("b", 2.0, 2.0)],
            nets: vec![],
            initial_placement: None,
        };
        let pos = vec![
            PositionEntry { id: "a".into(), x: 3.0, y: 2.0 },
            PositionEntry { id: "b".into(), x: 3.5, y: 2.0 },
        ];
        (inst, pos)
    }

    #[test]
    fn empty_instance_has_only_outline() {
        let (mut inst, _) = two_macros();
        inst.macros.clear();
        let svg = render_svg(&inst, &[]);
        assert_eq!(svg.matches("<rect").count(), 1);
        assert!(svg.contains(r#"class="area""#));
    }

    #[test]
    fn overlapping_macros_both_drawn() {
        let (inst, pos) = two_macros();
        let svg = render_svg(&inst, &pos);
        assert_eq!(svg.matches(r#"class="macro""#).count(), 2);
        assert_eq!(svg, render_svg(&inst, &pos));
    }
}
