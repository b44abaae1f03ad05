//! Scenario pipelines: dispatch a parsed scenario to the engines, diff
//! the results against its expected blocks, and assemble a report.

use super::build::*;
use super::model::*;
use super::ScenarioError;
use crate::base::FgAbelianShape;
use crate::graded::{Bidegree, Window};
use crate::homalg::{
    cone_les_solve, discriminant_cokernel, power_shift_family, tate_cyclic, tor_table,
    trace_gram, BigradedTable, ConeDegree, GradedMatrixFamily, TableEntry, TraceRule,
};
use crate::numtheory::NormVerdict;
use crate::specseq::{
    assemble_abutment, check_d_squared, crosscheck_rules, detect_collapse, turn_page_at,
    AbutmentDegree, CollapseVerdict, DifferentialSpec, FamilyPage, TurnOptions,
};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Outcome of one scenario run. The serialized dump is deterministic;
/// timing is reported separately so byte-level comparisons stay stable.
#[derive(Debug, serde::Serialize)]
pub struct Report {
    pub scenario: String,
    pub kind: &'static str,
    pub passed: bool,
    pub diffs: Vec<String>,
    pub notes: Vec<String>,
    /// Computed tables keyed by page index (or 0 for plain tables).
    pub tables: BTreeMap<i64, BigradedTable>,
    /// Assembled abutment by total degree, when applicable.
    pub abutment: BTreeMap<i64, AbutmentDegree>,
    #[serde(skip)]
    pub timing: std::time::Duration,
}

impl Report {
    fn new(s: &Scenario) -> Report {
        Report {
            scenario: s.name.clone(),
            kind: s.kind.as_str(),
            passed: true,
            diffs: vec![],
            notes: vec![],
            tables: BTreeMap::new(),
            abutment: BTreeMap::new(),
            timing: std::time::Duration::ZERO,
        }
    }

    fn fail(&mut self, msg: impl Into<String>) {
        self.passed = false;
        self.diffs.push(msg.into());
    }

    /// Human-readable summary (deterministic).
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let status = if self.passed { "pass" } else { "FAIL" };
        let _ = writeln!(out, "scenario {}: {status}", self.scenario);
        for n in &self.notes {
            let _ = writeln!(out, "  note: {n}");
        }
        for d in &self.diffs {
            let _ = writeln!(out, "  diff: {d}");
        }
        out
    }

    /// Stable machine-readable dump.
    pub fn render_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs one scenario end to end.
pub fn run_scenario(s: &Scenario) -> Result<Report, ScenarioError> {
    let start = std::time::Instant::now();
    let mut report = Report::new(s);
    match s.kind {
        Kind::TorThh => run_tor(s, &mut report)?,
        Kind::TateCyclic | Kind::TateSigma3 => run_tate(s, &mut report)?,
        Kind::Discriminant => run_disc(s, &mut report)?,
        Kind::ConeLes => run_cone(s, &mut report)?,
        Kind::NormVerdict => run_norms(s, &mut report)?,
    }
    report.timing = start.elapsed();
    Ok(report)
}

fn filtration_window(s: &Scenario) -> Window {
    s.filtration_window.unwrap_or_else(|| Window::new(0, 12))
}

fn run_tor(s: &Scenario, report: &mut Report) -> Result<(), ScenarioError> {
    let tor = s
        .tor
        .as_ref()
        .ok_or_else(|| ScenarioError::Validation("tor scenario needs a `tor` block".into()))?;
    let decl = s.resolution(&tor.resolution).unwrap();
    let padded = padded_window(s);
    let res = build_resolution(s, decl, padded)?;
    res.check_d_squared(tor.max_filtration + 2)
        .map_err(|e| ScenarioError::Engine(e.to_string()))?;
    if tor.verify_resolution {
        let v = res
            .verify_on(tor.max_filtration + 1, s.degree_window)
            .map_err(|e| ScenarioError::Engine(e.to_string()))?;
        if !v.is_exact() {
            for (k, d, msg) in v.failures.iter().take(5) {
                report.fail(format!("resolution inexact at stage {k}, degree {d}: {msg}"));
            }
            return Ok(());
        }
        report.notes.push("resolution verified exact".into());
    }
    let coeffs = build_module(s, &tor.coefficients, padded)?;
    let table = tor_table(&res, &coeffs, s.degree_window, tor.max_filtration)
        .map_err(|e| ScenarioError::Engine(e.to_string()))?;
    let verdict = detect_collapse(&table, s.hints.edge_protected, 2, s.hints.r_max);
    report.notes.push(format!("collapse: {verdict:?}"));
    if verdict == CollapseVerdict::Unknown {
        report.fail("collapse verdict is Unknown; abutment not assembled");
    }
    let abutment = assemble_abutment(&table);
    evaluate_expects(s, report, &[(2, &table)], &abutment)?;
    report.tables.insert(2, table);
    report.abutment = abutment;
    Ok(())
}

fn run_tate(s: &Scenario, report: &mut Report) -> Result<(), ScenarioError> {
    let filt = filtration_window(s);
    let mut computed: Vec<(i64, BigradedTable)> = vec![];

    // honest E2 from the cyclic action, when declared
    if let Some(tate) = &s.tate {
        let action = build_cyclic_action(s, tate, s.degree_window)?;
        let table = tate_cyclic(&action, s.degree_window, filt)
            .map_err(|e| ScenarioError::Engine(e.to_string()))?;
        if table
            .nonzero()
            .next()
            .is_some()
        {
            report
                .notes
                .push("tate table is nonzero: nontrivial Tate construction".into());
        }
        computed.push((2, table));
    }

    // fold declared pages through their differentials
    let pages: Vec<(FamilyPage, Option<&DiffDecl>)> = {
        let mut out = vec![];
        for (i, pd) in s.pages.iter().enumerate() {
            let page = build_page(s.base, pd)?;
            out.push((page, s.diffs.get(i)));
        }
        out
    };

    // check the first declared page against the computed Tate table
    if let (Some((page, _)), Some((_, table))) = (pages.first(), computed.first()) {
        compare_page_with_table(s, report, page, table)?;
    }

    for (idx, (page, diff)) in pages.iter().enumerate() {
        let Some(diff) = diff else { continue };
        let (spec, check_spec) = build_differential(page, diff)?;
        let mut opts = TurnOptions::for_page(page, &spec);
        opts.truncate_outside_support = diff.truncate_outside_support;
        let cells = support_cells(page, &spec, filt, s.degree_window)?;
        if let Some(check) = &check_spec {
            let degrees: Vec<Bidegree> = cells.clone();
            crosscheck_rules(page, &spec, check, &degrees)
                .map_err(|e| ScenarioError::Engine(e.to_string()))?;
            report
                .notes
                .push(format!("d{} closed forms match the Leibniz extension", diff.r));
        }
        check_d_squared(page, &spec, &cells, &opts)
            .map_err(|e| ScenarioError::Engine(e.to_string()))?;
        let table = turn_page_at(page, &spec, &cells, &opts)
            .map_err(|e| ScenarioError::Engine(e.to_string()))?;
        let next_index = diff.r + 1;
        // compare against the next declared page, if any
        if let Some((next_page, _)) = pages.get(idx + 1) {
            compare_table_with_page(s, report, &table, next_page, s.pages[idx + 1].compare_names)?;
        }
        computed.push((next_index, table));
    }

    if let Some((r, table)) = computed.last() {
        let verdict = detect_collapse(table, s.hints.edge_protected, *r, s.hints.r_max);
        report.notes.push(format!("collapse: {verdict:?}"));
        if verdict == CollapseVerdict::Unknown {
            report.fail("final page does not visibly collapse");
        }
        let abutment = assemble_abutment(table);
        let tables: Vec<(i64, &BigradedTable)> =
            computed.iter().map(|(r, t)| (*r, t)).collect();
        evaluate_expects(s, report, &tables, &abutment)?;
        report.abutment = abutment;
    }
    for (r, t) in computed {
        report.tables.insert(r, t);
    }
    Ok(())
}

/// Bidegrees worth computing: slots where the page or either differential
/// neighbour has classes, inside the scenario windows.
fn support_cells(
    page: &FamilyPage,
    spec: &DifferentialSpec,
    filt: Window,
    degrees: Window,
) -> Result<Vec<Bidegree>, ScenarioError> {
    let zero_pad = vec![0i64; page.num_gens()];
    let mut cells = vec![];
    for n in filt.iter() {
        for m in degrees.iter() {
            let b = Bidegree::new(n, m);
            let here = !page
                .instances_at(b, &zero_pad)
                .map_err(|e| ScenarioError::Engine(e.to_string()))?
                .is_empty();
            let src = !page
                .instances_at(b.plus(Bidegree::new(spec.r, -(spec.r - 1))), &zero_pad)
                .map_err(|e| ScenarioError::Engine(e.to_string()))?
                .is_empty();
            if here || src {
                cells.push(b);
            }
        }
    }
    Ok(cells)
}

/// Checks that a declared page enumerates the same ranks (and marshalled
/// class names) as a computed Tate table.
fn compare_page_with_table(
    s: &Scenario,
    report: &mut Report,
    page: &FamilyPage,
    table: &BigradedTable,
) -> Result<(), ScenarioError> {
    let filt = filtration_window(s);
    let zero_pad = vec![0i64; page.num_gens()];
    // generators with nonzero filtration degree are the column dressing
    let skip: Vec<usize> = page
        .ambient
        .iter()
        .enumerate()
        .filter(|(_, g)| g.degree.n != 0)
        .map(|(i, _)| i)
        .collect();
    for n in filt.iter() {
        for m in s.degree_window.iter() {
            let b = Bidegree::new(n, m);
            let insts = page
                .instances_at(b, &zero_pad)
                .map_err(|e| ScenarioError::Engine(e.to_string()))?;
            let table_entry = table.get(n, m);
            let trank = table_entry.map_or(0, |e| {
                e.shape.free_rank + e.shape.torsion.len()
            });
            if insts.len() != trank {
                report.fail(format!(
                    "declared page {} has {} classes at ({n},{m}) but the computed table has {trank}",
                    page.index,
                    insts.len()
                ));
                continue;
            }
            if let Some(e) = table_entry {
                if !e.names.is_empty() {
                    let mut want: Vec<String> = insts
                        .iter()
                        .map(|i| page.instance_monomial_name(i, &skip))
                        .collect::<Result<_, _>>()
                        .map_err(|e| ScenarioError::Engine(e.to_string()))?;
                    let mut got = e.names.clone();
                    want.sort();
                    got.sort();
                    if want != got {
                        report.fail(format!(
                            "page {} classes at ({n},{m}) are {want:?} but the table carries {got:?}",
                            page.index
                        ));
                    }
                }
            }
        }
    }
    report.notes.push(format!(
        "declared page {} matches the computed Tate table",
        page.index
    ));
    Ok(())
}

/// Checks a computed table against the next declared page.
fn compare_table_with_page(
    s: &Scenario,
    report: &mut Report,
    table: &BigradedTable,
    page: &FamilyPage,
    compare_names: bool,
) -> Result<(), ScenarioError> {
    let zero_pad = vec![0i64; page.num_gens()];
    let filt = filtration_window(s);
    let mut checked = 0usize;
    for (&(n, m), entry) in table.nonzero() {
        if entry.partial || !filt.contains(n) || !s.degree_window.contains(m) {
            continue;
        }
        let insts = page
            .instances_at(Bidegree::new(n, m), &zero_pad)
            .map_err(|e| ScenarioError::Engine(e.to_string()))?;
        let rank = entry.shape.free_rank + entry.shape.torsion.len();
        if insts.len() != rank {
            report.fail(format!(
                "computed page has rank {rank} at ({n},{m}) but page {} declares {}",
                page.index,
                insts.len()
            ));
            continue;
        }
        if compare_names {
            let mut want: Vec<String> = insts.iter().map(|i| i.name(page)).collect();
            let mut got = entry.names.clone();
            want.sort();
            got.sort();
            if want != got {
                report.fail(format!(
                    "page {} classes at ({n},{m}): declared {want:?}, computed {got:?}",
                    page.index
                ));
            }
        }
        checked += 1;
    }
    // and declared classes must not exceed computed support
    for n in filt.iter() {
        for m in s.degree_window.iter() {
            let insts = page
                .instances_at(Bidegree::new(n, m), &zero_pad)
                .map_err(|e| ScenarioError::Engine(e.to_string()))?;
            if insts.is_empty() {
                continue;
            }
            let present = table
                .get(n, m)
                .map(|e| e.shape.free_rank + e.shape.torsion.len())
                .unwrap_or(0);
            if present != insts.len() && table.get(n, m).map_or(true, |e| !e.partial) {
                report.fail(format!(
                    "page {} declares {} classes at ({n},{m}) but {present} were computed",
                    page.index,
                    insts.len()
                ));
            }
        }
    }
    report.notes.push(format!(
        "computed page matches declared page {} on {checked} slots",
        page.index
    ));
    Ok(())
}

fn run_disc(s: &Scenario, report: &mut Report) -> Result<(), ScenarioError> {
    let decl = s.disc.as_ref().ok_or_else(|| {
        ScenarioError::Validation("discriminant scenario needs a `discriminant` block".into())
    })?;
    let family: GradedMatrixFamily = match decl {
        DiscDecl::Trace {
            var_degree,
            modulus,
            coeff,
            power_mult,
            power_off,
            arg_includes_var_power,
            source,
            target,
        } => trace_gram(
            s.base,
            *var_degree,
            source,
            target,
            &TraceRule {
                modulus: *modulus,
                coeff: *coeff,
                power_mult: *power_mult,
                power_off: *power_off,
                arg_includes_var_power: *arg_includes_var_power,
            },
            s.degree_window,
        ),
        DiscDecl::ShiftMap {
            var_degree,
            source_shift,
            target_shift,
            power_shift,
            coeff,
        } => power_shift_family(
            s.base,
            *var_degree,
            *source_shift,
            *target_shift,
            *power_shift,
            *coeff,
            s.degree_window,
        ),
    };
    let (shapes, nonzero) = discriminant_cokernel(&family, s.degree_window)
        .map_err(|e| ScenarioError::Engine(e.to_string()))?;
    report
        .notes
        .push(format!("cokernel supported in degrees {nonzero:?}"));
    let by_degree: BTreeMap<i64, FgAbelianShape> = shapes;
    evaluate_degree_expects(s, report, &by_degree, None)?;
    Ok(())
}

fn run_cone(s: &Scenario, report: &mut Report) -> Result<(), ScenarioError> {
    let decl = s
        .cone
        .as_ref()
        .ok_or_else(|| ScenarioError::Validation("cone scenario needs a `cone` block".into()))?;
    let (data, hints) = build_cone_data(s, decl)?;
    let out = cone_les_solve(s.base, &data, &hints, s.degree_window)
        .map_err(|e| ScenarioError::Engine(e.to_string()))?;
    let mut shapes = BTreeMap::new();
    let mut ambiguous = BTreeMap::new();
    for (d, res) in &out {
        match res {
            ConeDegree::Exact(sh) => {
                shapes.insert(*d, sh.clone());
            }
            ConeDegree::AmbiguousExtension { candidates, .. } => {
                ambiguous.insert(*d, candidates.clone());
                report
                    .notes
                    .push(format!("degree {d}: ambiguous extension, candidates {candidates:?}"));
            }
        }
    }
    evaluate_degree_expects(s, report, &shapes, Some(&ambiguous))?;
    Ok(())
}

fn run_norms(s: &Scenario, report: &mut Report) -> Result<(), ScenarioError> {
    let (from, to) = s
        .norm_range
        .ok_or_else(|| ScenarioError::Validation("norm scenario needs a `norms` line".into()))?;
    let reports: Vec<_> = crate::numtheory::verdict_table(from, to);
    for block in &s.expects {
        if let ExpectBlock::Verdicts {
            nontrivial,
            trivial,
        } = block
        {
            for r in &reports {
                if nontrivial.contains(&r.n) && r.verdict != NormVerdict::NontrivialTate {
                    report.fail(format!("n = {}: expected NontrivialTate", r.n));
                }
                if trivial.contains(&r.n) && r.verdict != NormVerdict::TrivialPi0Cokernel {
                    report.fail(format!("n = {}: expected TrivialPi0Cokernel", r.n));
                }
            }
            for n in nontrivial.iter().chain(trivial) {
                if !reports.iter().any(|r| &r.n == n) {
                    report.fail(format!("n = {n} not covered by the declared range"));
                }
            }
        }
    }
    for r in &reports {
        report.notes.push(format!(
            "n = {}: |GL2| = {}, |SL2| = {}, content {} -> {:?}",
            r.n, r.gl2_order, r.sl2_order, r.image_gcd_content, r.verdict
        ));
    }
    // a nontriviality verdict on pi_0 only ever shows NONvanishing; a
    // trivial pi_0 cokernel proves nothing about the full Tate spectrum
    report.notes.push(
        "trivial pi_0 cokernels do not decide vanishing of the full Tate spectrum".into(),
    );
    Ok(())
}

/// Evaluates `expect page` / `expect abutment` blocks against computed
/// tables and the assembled abutment.
fn evaluate_expects(
    s: &Scenario,
    report: &mut Report,
    tables: &[(i64, &BigradedTable)],
    abutment: &BTreeMap<i64, AbutmentDegree>,
) -> Result<(), ScenarioError> {
    let filt = filtration_window(s);
    for block in &s.expects {
        match block {
            ExpectBlock::Page {
                r,
                compare_names,
                patterns,
                exhaustive,
            } => {
                let Some((_, table)) = tables.iter().find(|(rr, _)| rr == r) else {
                    report.fail(format!("no computed page {r} to compare against"));
                    continue;
                };
                let expected = expand_to_table(s, patterns, Some(filt))?;
                let diffs = diff_tables(
                    table,
                    &expected,
                    filt,
                    s.degree_window,
                    *compare_names,
                    *exhaustive,
                );
                for d in diffs {
                    report.fail(format!("page {r}: {d}"));
                }
            }
            ExpectBlock::Abutment {
                patterns,
                exhaustive,
            } => {
                let window = s.abutment_window.unwrap_or(s.degree_window);
                let mut expected: BTreeMap<i64, FgAbelianShape> = BTreeMap::new();
                let mut expected_names: BTreeMap<i64, Vec<String>> = BTreeMap::new();
                for p in patterns {
                    for (_, d, shape, name) in expand_pattern(p, None, window)? {
                        let slot = expected.entry(d).or_insert_with(FgAbelianShape::zero);
                        *slot = slot.direct_sum(&shape);
                        if let Some(n) = name {
                            expected_names.entry(d).or_default().push(n);
                        }
                    }
                }
                for (d, want) in &expected {
                    let got = abutment.get(d);
                    let got_shape = got
                        .map(|a| a.shape.clone())
                        .unwrap_or_else(FgAbelianShape::zero);
                    if &got_shape != want {
                        report.fail(format!(
                            "abutment degree {d}: got {}, expected {}",
                            got_shape.display(s.base),
                            want.display(s.base)
                        ));
                        continue;
                    }
                    if let (Some(names), Some(a)) = (expected_names.get(d), got) {
                        let mut w = names.clone();
                        let mut g = a.names.clone();
                        w.sort();
                        g.sort();
                        if w != g {
                            report
                                .fail(format!("abutment degree {d}: names {g:?}, expected {w:?}"));
                        }
                    }
                }
                if *exhaustive {
                    for (d, a) in abutment {
                        if !window.contains(*d) || !a.complete {
                            continue;
                        }
                        if !a.shape.is_zero() && !expected.contains_key(d) {
                            report.fail(format!(
                                "abutment degree {d} is {} but no pattern covers it",
                                a.shape.display(s.base)
                            ));
                        }
                    }
                }
            }
            ExpectBlock::Degrees { .. } | ExpectBlock::Verdicts { .. } => {}
        }
    }
    Ok(())
}

fn expand_to_table(
    s: &Scenario,
    patterns: &[ExpectPattern],
    filt: Option<Window>,
) -> Result<BigradedTable, ScenarioError> {
    let mut table = BigradedTable::new(s.base, "expected");
    for p in patterns {
        for (n, m, shape, name) in expand_pattern(p, filt, s.degree_window)? {
            let n = n.ok_or_else(|| {
                ScenarioError::Validation(format!(
                    "pattern `{}` needs a bidegree in a page expectation",
                    p.name
                ))
            })?;
            let old = table.shape(n, m);
            let mut names = table.get(n, m).map(|e| e.names.clone()).unwrap_or_default();
            if let Some(nm) = name {
                names.push(nm);
            }
            table.set(n, m, TableEntry::new(old.direct_sum(&shape), names));
        }
    }
    Ok(table)
}

fn diff_tables(
    got: &BigradedTable,
    want: &BigradedTable,
    filt: Window,
    degrees: Window,
    compare_names: bool,
    exhaustive: bool,
) -> Vec<String> {
    let mut out = vec![];
    for (&(n, m), we) in want.nonzero() {
        if !filt.contains(n) || !degrees.contains(m) {
            continue;
        }
        match got.get(n, m) {
            None => out.push(format!(
                "({n},{m}): expected {} but the slot is zero",
                we.shape
            )),
            Some(ge) => {
                if ge.partial {
                    out.push(format!("({n},{m}): expected entry is window-clipped"));
                    continue;
                }
                if ge.shape != we.shape {
                    out.push(format!(
                        "({n},{m}): got {}, expected {}",
                        ge.shape, we.shape
                    ));
                    continue;
                }
                if compare_names && !we.names.is_empty() {
                    let mut a = ge.names.clone();
                    let mut b = we.names.clone();
                    a.sort();
                    b.sort();
                    if a != b {
                        out.push(format!("({n},{m}): names {a:?}, expected {b:?}"));
                    }
                }
            }
        }
    }
    if exhaustive {
        for (&(n, m), ge) in got.nonzero() {
            if !filt.contains(n) || !degrees.contains(m) || ge.partial {
                continue;
            }
            if want.get(n, m).is_none() {
                out.push(format!(
                    "({n},{m}): computed {} not covered by any pattern",
                    ge.shape
                ));
            }
        }
    }
    out
}

fn evaluate_degree_expects(
    s: &Scenario,
    report: &mut Report,
    shapes: &BTreeMap<i64, FgAbelianShape>,
    ambiguous: Option<&BTreeMap<i64, Vec<FgAbelianShape>>>,
) -> Result<(), ScenarioError> {
    for block in &s.expects {
        let ExpectBlock::Degrees {
            entries,
            default_zero,
        } = block
        else {
            continue;
        };
        let mut covered = std::collections::BTreeSet::new();
        for (d, expected) in entries {
            covered.insert(*d);
            match expected {
                ExpectedShape::Exact(want) => match shapes.get(d) {
                    Some(got) if got == want => {}
                    Some(got) => report.fail(format!(
                        "degree {d}: got {}, expected {}",
                        got.display(s.base),
                        want.display(s.base)
                    )),
                    None => {
                        if ambiguous.is_some_and(|a| a.contains_key(d)) {
                            report.fail(format!(
                                "degree {d}: expected {} but the extension is ambiguous",
                                want.display(s.base)
                            ));
                        } else {
                            report.fail(format!(
                                "degree {d}: expected {} but nothing was computed",
                                want.display(s.base)
                            ));
                        }
                    }
                },
                ExpectedShape::Ambiguous(cands) => {
                    let got = ambiguous.and_then(|a| a.get(d));
                    match got {
                        Some(got) => {
                            let mut a = got.clone();
                            let mut b = cands.clone();
                            a.sort();
                            b.sort();
                            if a != b {
                                report.fail(format!(
                                    "degree {d}: ambiguous candidates {a:?}, expected {b:?}"
                                ));
                            }
                        }
                        None => report.fail(format!(
                            "degree {d}: expected an ambiguous extension, got a definite answer"
                        )),
                    }
                }
            }
        }
        if *default_zero {
            for (d, got) in shapes {
                if !covered.contains(d) && !got.is_zero() {
                    report.fail(format!(
                        "degree {d}: computed {} but expected zero",
                        got.display(s.base)
                    ));
                }
            }
        }
    }
    Ok(())
}
