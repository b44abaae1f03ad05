//! Chart emission: aligned monospace grids and static SVG, one file per
//! page, deterministic bytes for fixed input.

use crate::graded::Window;
use crate::homalg::BigradedTable;
use std::fmt::Write as _;

/// Renders a bidegree table as an aligned text grid. Columns are the
/// filtration `n`, rows the internal degree `m` (descending). Cells show
/// the free rank, `t` markers for torsion summands, and `~` for entries
/// flagged partial.
pub fn text_grid(table: &BigradedTable, n_window: Window, m_window: Window) -> String {
    let cell = |n: i64, m: i64| -> String {
        match table.get(n, m) {
            None => ".".into(),
            Some(e) if e.shape.is_zero() && !e.partial => ".".into(),
            Some(e) => {
                let mut s = String::new();
                if e.shape.free_rank > 0 {
                    let _ = write!(s, "{}", e.shape.free_rank);
                }
                if !e.shape.torsion.is_empty() {
                    let _ = write!(s, "t{}", e.shape.torsion.len());
                }
                if e.partial {
                    s.push('~');
                }
                if s.is_empty() {
                    s.push('0');
                }
                s
            }
        }
    };
    let mut width = 2;
    for n in n_window.iter() {
        for m in m_window.iter() {
            width = width.max(cell(n, m).len());
        }
        width = width.max(n.to_string().len());
    }
    let mut out = String::new();
    let _ = writeln!(out, "# {}", table.provenance);
    for m in m_window.iter().collect::<Vec<_>>().into_iter().rev() {
        let _ = write!(out, "{m:>6} |");
        for n in n_window.iter() {
            let _ = write!(out, " {:>width$}", cell(n, m));
        }
        let _ = writeln!(out);
    }
    let _ = write!(out, "{:>6} +", "");
    for _ in n_window.iter() {
        let _ = write!(out, "-{:->width$}", "");
    }
    let _ = writeln!(out);
    let _ = write!(out, "{:>6}  ", "n:");
    for n in n_window.iter() {
        let _ = write!(out, " {n:>width$}");
    }
    let _ = writeln!(out);
    out
}

const CELL: i64 = 28;
const PAD: i64 = 40;

/// Static SVG 1.1 chart: one dot per nonzero entry, labelled with its
/// class names, with optional differential arrows between slots.
pub fn svg_chart(
    table: &BigradedTable,
    n_window: Window,
    m_window: Window,
    arrows: &[((i64, i64), (i64, i64))],
) -> String {
    let x = |n: i64| PAD + (n - n_window.lo) * CELL;
    let y = |m: i64| PAD + (m_window.hi - m) * CELL;
    let w = PAD * 2 + (n_window.hi - n_window.lo + 1) * CELL;
    let h = PAD * 2 + (m_window.hi - m_window.lo + 1) * CELL;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"##
    );
    let _ = writeln!(
        out,
        r##"<rect width="{w}" height="{h}" fill="white" stroke="none"/>"##
    );
    // axes
    let _ = writeln!(
        out,
        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#888" stroke-width="1"/>"##,
        x(n_window.lo) - CELL / 2,
        y(0),
        x(n_window.hi) + CELL / 2,
        y(0)
    );
    if n_window.contains(0) {
        let _ = writeln!(
            out,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#888" stroke-width="1"/>"##,
            x(0),
            y(m_window.lo) + CELL / 2,
            x(0),
            y(m_window.hi) - CELL / 2
        );
    }
    for ((n1, m1), (n2, m2)) in arrows {
        let _ = writeln!(
            out,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#c33" stroke-width="1.2" marker-end="url(#tip)"/>"##,
            x(*n1),
            y(*m1),
            x(*n2),
            y(*m2)
        );
    }
    let _ = writeln!(
        out,
        r##"<defs><marker id="tip" markerWidth="8" markerHeight="8" refX="6" refY="3" orient="auto"><path d="M0,0 L6,3 L0,6 z" fill="#c33"/></marker></defs>"##
    );
    for (&(n, m), entry) in table.nonzero() {
        if !n_window.contains(n) || !m_window.contains(m) {
            continue;
        }
        let fill = if entry.shape.torsion.is_empty() {
            "#222"
        } else {
            "#26c"
        };
        let stroke = if entry.partial { "#c33" } else { "none" };
        let _ = writeln!(
            out,
            r##"<circle cx="{}" cy="{}" r="4" fill="{fill}" stroke="{stroke}"/>"##,
            x(n),
            y(m)
        );
        if !entry.names.is_empty() {
            let label = entry.names.join(", ");
            let _ = writeln!(
                out,
                r##"<text x="{}" y="{}" font-family="monospace" font-size="8" fill="#444">{}</text>"##,
                x(n) + 5,
                y(m) - 4,
                xml_escape(&label)
            );
        }
        let rank = entry.shape.free_rank + entry.shape.torsion.len();
        if rank > 1 {
            let _ = writeln!(
                out,
                r##"<text x="{}" y="{}" font-family="monospace" font-size="9" fill="#000">{rank}</text>"##,
                x(n) - 10,
                y(m) + 3
            );
        }
    }
    // axis labels every 4 columns
    for n in n_window.iter() {
        if n.rem_euclid(4) == 0 {
            let _ = writeln!(
                out,
                r##"<text x="{}" y="{}" font-family="monospace" font-size="9" fill="#666" text-anchor="middle">{n}</text>"##,
                x(n),
                h - PAD / 2
            );
        }
    }
    for m in m_window.iter() {
        if m.rem_euclid(4) == 0 {
            let _ = writeln!(
                out,
                r##"<text x="{}" y="{}" font-family="monospace" font-size="9" fill="#666" text-anchor="end">{m}</text>"##,
                PAD / 2 + 10,
                y(m) + 3
            );
        }
    }
    let _ = writeln!(out, "</svg>");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
