//! Canonical printer for scenarios: `parse(print(s))` reproduces `s`.

use super::model::*;
use crate::base::{BaseRing, FgAbelianShape, Rat};
use crate::graded::family::{Constraint, ConstraintKind, LinForm};
use num::{One, Signed, Zero};
use std::fmt::Write as _;

fn base_str(b: BaseRing) -> String {
    match b {
        BaseRing::Integers => "Z".into(),
        BaseRing::PLocal(p) => format!("Z({p})"),
        BaseRing::PrimeField(p) => format!("F({p})"),
    }
}

fn rat_str(c: &Rat) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

/// Affine form with named parameters, e.g. `-4*n - 8*m - 1`.
pub fn linform_str(f: &LinForm, params: &[String]) -> String {
    let mut parts: Vec<(bool, String)> = vec![];
    for (i, c) in f.coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        let a = c.abs();
        let body = if a.is_one() {
            params[i].clone()
        } else if a.is_integer() {
            format!("{}*{}", a.numer(), params[i])
        } else {
            format!("{}*{}/{}", a.numer(), params[i], a.denom())
        };
        parts.push((neg, body));
    }
    if !f.konst.is_zero() {
        parts.push((f.konst.is_negative(), rat_str(&f.konst.abs())));
    }
    if parts.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (neg, body)) in parts.iter().enumerate() {
        if i == 0 {
            if *neg {
                out.push('-');
            }
        } else {
            out.push_str(if *neg { " - " } else { " + " });
        }
        out.push_str(body);
    }
    out
}

fn constraints_str(cons: &[Constraint], params: &[String]) -> String {
    cons.iter()
        .map(|c| match &c.kind {
            ConstraintKind::Ge0 => {
                // printed as `form + k >= -k`-free canonical `expr >= 0`
                format!("{} >= 0", linform_str(&c.form, params))
            }
            ConstraintKind::ModEq { modulus, residue } => {
                format!("{} == {residue} mod {modulus}", linform_str(&c.form, params))
            }
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn poly_str(p: &ExprPoly) -> String {
    if p.terms.is_empty() {
        return "0".into();
    }
    let mono = |m: &[(String, i64)]| -> String {
        if m.is_empty() {
            return "1".into();
        }
        m.iter()
            .map(|(g, e)| {
                if *e == 1 {
                    g.clone()
                } else if *e < 0 {
                    format!("{g}^({e})")
                } else {
                    format!("{g}^{e}")
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    };
    let mut out = String::new();
    for (i, (c, m)) in p.terms.iter().enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        let body = if a.is_one() && !m.is_empty() {
            mono(m)
        } else if m.is_empty() {
            rat_str(&a)
        } else {
            format!("{}*{}", rat_str(&a), mono(m))
        };
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        out.push_str(&body);
    }
    out
}

pub fn shape_str(s: &FgAbelianShape) -> String {
    if s.is_zero() {
        return "0".into();
    }
    let mut parts = vec![];
    if s.free_rank == 1 {
        parts.push("Z".to_string());
    } else if s.free_rank > 1 {
        parts.push(format!("Z^{}", s.free_rank));
    }
    for d in &s.torsion {
        parts.push(format!("Z/{d}"));
    }
    parts.join(" + ")
}

/// Prints a scenario in the canonical `.scn` layout.
pub fn print_scenario(s: &Scenario) -> String {
    let mut o = String::new();
    let w = &mut o;
    let _ = writeln!(w, "scenario {}", s.name);
    let _ = writeln!(w, "kind {}", s.kind.as_str());
    if !s.tags.is_empty() {
        let _ = writeln!(w, "tags {}", s.tags.join(" "));
    }
    let _ = writeln!(w, "citation \"{}\"", s.citation);
    let _ = writeln!(w, "base {}", base_str(s.base));
    let _ = writeln!(
        w,
        "window degrees {} {}",
        s.degree_window.lo, s.degree_window.hi
    );
    if let Some(fw) = s.filtration_window {
        let _ = writeln!(w, "window filtration {} {}", fw.lo, fw.hi);
    }
    if let Some(aw) = s.abutment_window {
        let _ = writeln!(w, "window abutment {} {}", aw.lo, aw.hi);
    }
    if s.hints.edge_protected {
        let _ = writeln!(w, "hint edge_protected");
    }
    if s.hints.r_max != 24 {
        let _ = writeln!(w, "hint r_max {}", s.hints.r_max);
    }
    if let Some((a, b)) = s.norm_range {
        let _ = writeln!(w, "norms {a} {b}");
    }
    for alg in &s.algebras {
        let _ = writeln!(w, "begin algebra {}", alg.name);
        for g in &alg.gens {
            let mut line = format!("  gen {} degree {}", g.name, g.degree);
            if g.filtration != 0 {
                let _ = write!(line, " filtration {}", g.filtration);
            }
            if g.weight != 0 {
                let _ = write!(line, " weight {}", g.weight);
            }
            if g.invertible {
                line.push_str(" invertible");
            }
            if g.square_zero {
                line.push_str(" square_zero");
            }
            if let Some((lo, hi)) = g.range {
                let _ = write!(line, " range {lo} {hi}");
            }
            let _ = writeln!(w, "{line}");
        }
        for (g, p, rhs) in &alg.rules {
            let _ = writeln!(w, "  rule {g}^{p} -> {}", poly_str(rhs));
        }
        let _ = writeln!(w, "end");
    }
    for m in &s.modules {
        let _ = writeln!(w, "begin module {}", m.name);
        match &m.body {
            ModuleBody::Ranks(ranks) => {
                let list = ranks
                    .iter()
                    .map(|(d, r)| format!("{d}:{r}"))
                    .collect::<Vec<_>>()
                    .join(", ");
                let _ = writeln!(w, "  ranks {list}");
            }
            body => {
                let _ = writeln!(w, "  over {}", m.over);
                match body {
                    ModuleBody::Quotient { rules } => {
                        for (g, p, rhs) in rules {
                            if *p == 1 {
                                let _ = writeln!(w, "  quotient {g} -> {}", poly_str(rhs));
                            } else {
                                let _ = writeln!(w, "  quotient {g}^{p} -> {}", poly_str(rhs));
                            }
                        }
                    }
                    ModuleBody::Families { families, actions } => {
                        for f in families {
                            let mut line = format!(
                                "  family {}({}) degree {}",
                                f.name,
                                f.params.join(", "),
                                linform_str(&f.degree, &f.params)
                            );
                            if !f.constraints.is_empty() {
                                let _ = write!(
                                    line,
                                    " where {}",
                                    constraints_str(&f.constraints, &f.params)
                                );
                            }
                            let _ = writeln!(w, "{line}");
                        }
                        for a in actions {
                            let fam = families.iter().find(|f| f.name == a.family).unwrap();
                            let mut line = format!(
                                "  action {}: {}({}) -> ",
                                a.gen,
                                a.family,
                                fam.params.join(", ")
                            );
                            match &a.value {
                                None => line.push('0'),
                                Some((coeff, target, tps)) => {
                                    if !(coeff.is_constant() && coeff.konst.is_one()) {
                                        let _ = write!(
                                            line,
                                            "({}) ",
                                            linform_str(coeff, &fam.params)
                                        );
                                    }
                                    let args = tps
                                        .iter()
                                        .map(|f| linform_str(f, &fam.params))
                                        .collect::<Vec<_>>()
                                        .join(", ");
                                    let _ = write!(line, "{target}({args})");
                                }
                            }
                            if !a.guard.is_empty() {
                                let _ =
                                    write!(line, " if {}", constraints_str(&a.guard, &fam.params));
                            }
                            let _ = writeln!(w, "{line}");
                        }
                    }
                    ModuleBody::Sum(parts) => {
                        let _ = writeln!(w, "  sum {}", parts.join(" "));
                    }
                    ModuleBody::Ranks(_) => unreachable!(),
                }
            }
        }
        let _ = writeln!(w, "end");
    }
    for r in &s.resolutions {
        let _ = writeln!(w, "begin resolution {}", r.name);
        let _ = writeln!(w, "  over {} of {}", r.over, r.of);
        for (shift, map) in &r.stages {
            let _ = writeln!(w, "  stage shift {shift} map {}", poly_str(map));
        }
        if let Some((from, period, step)) = r.periodic {
            let _ = writeln!(w, "  periodic from {from} period {period} step {step}");
        }
        let _ = writeln!(w, "end");
    }
    if let Some(t) = &s.tor {
        let _ = writeln!(w, "begin tor");
        let _ = writeln!(
            w,
            "  resolution {} coefficients {}",
            t.resolution, t.coefficients
        );
        let _ = writeln!(w, "  max_filtration {}", t.max_filtration);
        if !t.verify_resolution {
            let _ = writeln!(w, "  skip_verify");
        }
        let _ = writeln!(w, "end");
    }
    if let Some(t) = &s.tate {
        let _ = writeln!(w, "begin tate");
        let _ = writeln!(w, "  module {}", t.module);
        let _ = writeln!(w, "  order {}", t.order);
        let action = match t.action {
            ActionKindDecl::Trivial => "trivial",
            ActionKindDecl::SignByWeight => "sign_by_weight",
        };
        let _ = writeln!(w, "  action {action}");
        let _ = writeln!(w, "end");
    }
    for p in &s.pages {
        let _ = writeln!(w, "begin page {}", p.index);
        if let Some(c) = p.coefficients {
            let _ = writeln!(w, "  coefficients {}", base_str(c));
        }
        if !p.compare_names {
            let _ = writeln!(w, "  compare ranks");
        }
        for a in &p.ambient {
            let mut line = format!("  ambient {} bidegree ({}, {})", a.name, a.n, a.m);
            if a.weight != 0 {
                let _ = write!(line, " weight {}", a.weight);
            }
            if let Some((lo, hi)) = a.range {
                let _ = write!(line, " range {lo} {hi}");
            }
            if a.square_zero {
                line.push_str(" square_zero");
            }
            let _ = writeln!(w, "{line}");
        }
        for (name, mono) in &p.factors {
            let body = mono
                .iter()
                .map(|(g, e)| if *e == 1 { g.clone() } else { format!("{g}^{e}") })
                .collect::<Vec<_>>()
                .join("*");
            let _ = writeln!(w, "  factor {name} = {body}");
        }
        for f in &p.families {
            let powers = f
                .powers
                .iter()
                .map(|(n, form)| {
                    if form.is_constant() && form.konst.is_one() {
                        n.clone()
                    } else {
                        format!("{n}^({})", linform_str(form, &f.params))
                    }
                })
                .collect::<Vec<_>>()
                .join(" ");
            let mut line = format!("  family {}({}) = {powers}", f.name, f.params.join(", "));
            if !f.constraints.is_empty() {
                let _ = write!(line, " where {}", constraints_str(&f.constraints, &f.params));
            }
            let _ = writeln!(w, "{line}");
        }
        let _ = writeln!(w, "end");
    }
    for d in &s.diffs {
        let _ = writeln!(w, "begin differential {}", d.r);
        if d.truncate_outside_support {
            let _ = writeln!(w, "  truncate_outside_support");
        }
        for rule in &d.rules {
            match rule {
                DiffRuleDecl::Factor { factor, value } => {
                    let _ = writeln!(w, "  on {factor} -> {}", poly_str(value));
                }
                DiffRuleDecl::Family {
                    family,
                    guard,
                    coeff,
                    target,
                    target_params,
                    check_only,
                } => {
                    // parameters are positional; print canonical names
                    let params: Vec<String> =
                        (0..coeff.coeffs.len()).map(|i| format!("p{i}")).collect();
                    let head = if *check_only { "check family" } else { "family" };
                    let mut line = format!("  {head} {family}({}) -> ", params.join(", "));
                    if coeff.is_constant() && coeff.konst.is_zero() {
                        line.push('0');
                    } else {
                        if !(coeff.is_constant() && coeff.konst.is_one()) {
                            let _ = write!(line, "({}) ", linform_str(coeff, &params));
                        }
                        let args = target_params
                            .iter()
                            .map(|f| linform_str(f, &params))
                            .collect::<Vec<_>>()
                            .join(", ");
                        let _ = write!(line, "{target}({args})");
                    }
                    if !guard.is_empty() {
                        let _ = write!(line, " if {}", constraints_str(guard, &params));
                    }
                    let _ = writeln!(w, "{line}");
                }
            }
        }
        let _ = writeln!(w, "end");
    }
    if let Some(c) = &s.cone {
        let _ = writeln!(w, "begin cone");
        for d in &c.degrees {
            let mut line = format!(
                "  map {}: {} -> {}",
                d.degree,
                shape_str(&d.source),
                shape_str(&d.target)
            );
            if let Some(rows) = &d.matrix {
                let body = rows
                    .iter()
                    .map(|r| {
                        r.iter()
                            .map(|v| v.to_string())
                            .collect::<Vec<_>>()
                            .join(" ")
                    })
                    .collect::<Vec<_>>()
                    .join("; ");
                let _ = write!(line, " matrix [{body}]");
            }
            let _ = writeln!(w, "{line}");
        }
        for (d, note) in &c.torsion_free_hints {
            let _ = writeln!(w, "  hint torsion_free {d} \"{note}\"");
        }
        let _ = writeln!(w, "end");
    }
    if let Some(d) = &s.disc {
        let _ = writeln!(w, "begin discriminant");
        match d {
            DiscDecl::Trace {
                var_degree,
                modulus,
                coeff,
                power_mult,
                power_off,
                arg_includes_var_power,
                source,
                target,
            } => {
                let mut line = format!(
                    "  trace var_degree {var_degree} modulus {modulus} coeff {coeff} power_mult {power_mult} power_off {power_off}"
                );
                if *arg_includes_var_power {
                    line.push_str(" arg_includes_var");
                }
                let _ = writeln!(w, "{line}");
                let fmt = |list: &[(i64, i64)]| {
                    list.iter()
                        .map(|(l, s)| format!("{l}:{s}"))
                        .collect::<Vec<_>>()
                        .join(", ")
                };
                let _ = writeln!(w, "  source {}", fmt(source));
                let _ = writeln!(w, "  target {}", fmt(target));
            }
            DiscDecl::ShiftMap {
                var_degree,
                source_shift,
                target_shift,
                power_shift,
                coeff,
            } => {
                let _ = writeln!(
                    w,
                    "  shift_map var_degree {var_degree} source_shift {source_shift} target_shift {target_shift} power_shift {power_shift} coeff {coeff}"
                );
            }
        }
        let _ = writeln!(w, "end");
    }
    for e in &s.expects {
        match e {
            ExpectBlock::Page {
                r,
                compare_names,
                patterns,
                exhaustive,
            } => {
                let _ = writeln!(w, "begin expect page {r}");
                if *compare_names {
                    let _ = writeln!(w, "  compare names");
                }
                for p in patterns {
                    let _ = writeln!(w, "{}", pattern_str(p, true));
                }
                if *exhaustive {
                    let _ = writeln!(w, "  exhaustive");
                }
                let _ = writeln!(w, "end");
            }
            ExpectBlock::Abutment {
                patterns,
                exhaustive,
            } => {
                let _ = writeln!(w, "begin expect abutment");
                for p in patterns {
                    let _ = writeln!(w, "{}", pattern_str(p, false));
                }
                if *exhaustive {
                    let _ = writeln!(w, "  exhaustive");
                }
                let _ = writeln!(w, "end");
            }
            ExpectBlock::Degrees {
                entries,
                default_zero,
            } => {
                let _ = writeln!(w, "begin expect degrees");
                for (d, sh) in entries {
                    match sh {
                        ExpectedShape::Exact(s) => {
                            let _ = writeln!(w, "  at {d}: {}", shape_str(s));
                        }
                        ExpectedShape::Ambiguous(cands) => {
                            let body = cands
                                .iter()
                                .map(shape_str)
                                .collect::<Vec<_>>()
                                .join(", ");
                            let _ = writeln!(w, "  at {d}: ambiguous {{{body}}}");
                        }
                    }
                }
                if *default_zero {
                    let _ = writeln!(w, "  default 0");
                }
                let _ = writeln!(w, "end");
            }
            ExpectBlock::Verdicts {
                nontrivial,
                trivial,
            } => {
                let _ = writeln!(w, "begin expect verdicts");
                if !nontrivial.is_empty() {
                    let list = nontrivial
                        .iter()
                        .map(|n| n.to_string())
                        .collect::<Vec<_>>()
                        .join(" ");
                    let _ = writeln!(w, "  nontrivial {list}");
                }
                if !trivial.is_empty() {
                    let list = trivial
                        .iter()
                        .map(|n| n.to_string())
                        .collect::<Vec<_>>()
                        .join(" ");
                    let _ = writeln!(w, "  trivial {list}");
                }
                let _ = writeln!(w, "end");
            }
        }
    }
    o
}

fn pattern_str(p: &ExpectPattern, bigraded: bool) -> String {
    let mut line = format!("  pattern {}", p.name);
    if !p.params.is_empty() {
        let _ = write!(line, "({})", p.params.join(", "));
    }
    if bigraded {
        let nf = p.n_form.as_ref().expect("page pattern has a bidegree");
        let _ = write!(
            line,
            ": bidegree ({}, {})",
            linform_str(nf, &p.params),
            linform_str(&p.m_form, &p.params)
        );
    } else {
        let _ = write!(line, ": degree {}", linform_str(&p.m_form, &p.params));
    }
    if !p.constraints.is_empty() {
        let _ = write!(line, " where {}", constraints_str(&p.constraints, &p.params));
    }
    if p.shape.free_rank > 0 || p.shape.torsion.is_empty() {
        let _ = write!(line, " rank {}", p.shape.free_rank);
    }
    if !p.shape.torsion.is_empty() {
        let list = p
            .shape
            .torsion
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        let _ = write!(line, " torsion {list}");
    }
    if let Some(t) = &p.name_template {
        let _ = write!(line, " names \"{t}\"");
    }
    line
}
