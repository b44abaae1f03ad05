use super::diff::{locate_target, DifferentialSpec, TargetHit};
use super::page::{FamilyPage, Instance};
use super::SpecseqError;
use crate::base::{homology_named, FgAbelianShape, HomologyClass, Matrix};
use crate::graded::Bidegree;
use crate::homalg::{BigradedTable, TableEntry};
use num::Zero;
use std::collections::BTreeMap;

/// Options steering one page turn.
#[derive(Debug, Clone)]
pub struct TurnOptions {
    /// Per-generator window padding used to distinguish boundary escapes
    /// from support violations; derive it from the differential's
    /// exponent reach.
    pub pads: Vec<i64>,
    /// Treat differential targets outside the support constraints as
    /// zero (connective-truncation semantics) instead of failing.
    pub truncate_outside_support: bool,
}

impl TurnOptions {
    pub fn for_page(page: &FamilyPage, spec: &DifferentialSpec) -> Self {
        TurnOptions {
            pads: rule_pads(page, spec),
            truncate_outside_support: false,
        }
    }
}

/// Worst-case exponent movement of the differential per ambient
/// generator, for padding windows in clip detection.
fn rule_pads(page: &FamilyPage, spec: &DifferentialSpec) -> Vec<i64> {
    let mut pads = vec![0i64; page.num_gens()];
    for rule in &spec.rules {
        match rule {
            super::diff::DiffRule::Factor { factor, value } => {
                for (_, dexps) in &value.terms {
                    for g in 0..page.num_gens() {
                        let delta = (dexps[g] - page.factors[*factor].exponents[g]).abs();
                        pads[g] = pads[g].max(delta);
                    }
                }
            }
            super::diff::DiffRule::Family { .. } => {
                // family rules move exponents by a bounded fixed amount;
                // the generic bidegree reach |r| + |r-1| is a safe cap
                for g in 0..page.num_gens() {
                    pads[g] = pads[g].max(spec.r.abs() + (spec.r - 1).abs());
                }
            }
        }
    }
    pads
}

/// The degreewise matrix of `d^r` leaving `at`, plus escape flags.
pub struct DiffMatrix {
    pub matrix: Matrix,
    pub source: Vec<Instance>,
    pub target: Vec<Instance>,
    pub escaped: bool,
}

pub fn differential_matrix(
    page: &FamilyPage,
    spec: &DifferentialSpec,
    at: Bidegree,
    opts: &TurnOptions,
) -> Result<DiffMatrix, SpecseqError> {
    let zero_pad = vec![0i64; page.num_gens()];
    let source = page.instances_at(at, &zero_pad)?;
    let target = page.instances_at(at.plus(spec.bidegree()), &zero_pad)?;
    let mut matrix = Matrix::zero(page.coeff, target.len(), source.len());
    let mut escaped = false;
    for (j, inst) in source.iter().enumerate() {
        for (coeff, exps) in spec.apply(page, inst)? {
            match locate_target(page, &target, coeff, &exps, &opts.pads)? {
                TargetHit::Inside(i, c) => {
                    let v = matrix.get(i, j) + &c;
                    matrix.set(i, j, v);
                }
                TargetHit::Escaped(_) => {
                    escaped = true;
                }
                TargetHit::OutsideSupport(e) => {
                    if !opts.truncate_outside_support {
                        return Err(SpecseqError::TargetOutsideSupport(format!(
                            "d{}({}) hits ambient exponents {:?} outside every family",
                            spec.r,
                            inst.name(page),
                            e
                        )));
                    }
                }
            }
        }
    }
    Ok(DiffMatrix {
        matrix,
        source,
        target,
        escaped,
    })
}

/// Verifies `d o d = 0` on every listed bidegree, with a witness name.
pub fn check_d_squared(
    page: &FamilyPage,
    spec: &DifferentialSpec,
    bidegrees: &[Bidegree],
    opts: &TurnOptions,
) -> Result<(), SpecseqError> {
    for &b in bidegrees {
        let first = differential_matrix(page, spec, b, opts)?;
        if first.matrix.is_zero() {
            continue;
        }
        let second = differential_matrix(page, spec, b.plus(spec.bidegree()), opts)?;
        if second.escaped || first.escaped {
            continue; // window-clipped composite; flagged partial elsewhere
        }
        let composite = second.matrix.mul(&first.matrix);
        if !composite.is_zero() {
            let mut witness = String::from("?");
            'find: for j in 0..composite.cols {
                for i in 0..composite.rows {
                    if !composite.get(i, j).is_zero() {
                        witness = first.source[j].name(page);
                        break 'find;
                    }
                }
            }
            return Err(SpecseqError::DSquaredNonzero(witness));
        }
    }
    Ok(())
}

/// Homology of the page at the given bidegrees: entry `(n, m)` is
/// `ker(d at (n,m)) / im(d from (n+r, m-r+1))`, with class names carried
/// when single monomials survive. Entries whose own slot or either
/// neighbour slot is window-clipped are flagged partial.
pub fn turn_page_at(
    page: &FamilyPage,
    spec: &DifferentialSpec,
    bidegrees: &[Bidegree],
    opts: &TurnOptions,
) -> Result<BigradedTable, SpecseqError> {
    spec.validate(page)?;
    let mut table = BigradedTable::new(page.coeff, format!("E{} turned by d{}", page.index, spec.r));
    for &b in bidegrees {
        let out = differential_matrix(page, spec, b, opts)?;
        let src_slot = b.plus(Bidegree::new(spec.r, -(spec.r - 1)));
        let inn = differential_matrix(page, spec, src_slot, opts)?;
        debug_assert_eq!(inn.target.len(), out.source.len());
        let (shape, classes) = homology_named(&out.matrix, &inn.matrix);
        let names = classes
            .iter()
            .map(|c| match c {
                HomologyClass::Ambient(idx, _) => out.source[*idx].name(page),
                HomologyClass::Synthetic(idx, _) => format!("c({},{});{}", b.n, b.m, idx),
            })
            .collect();
        let mut entry = TableEntry::new(shape, names);
        entry.partial = out.escaped
            || inn.escaped
            || page.clipped_at(b, &opts.pads)?
            || page.clipped_at(b.plus(spec.bidegree()), &opts.pads)?
            || page.clipped_at(src_slot, &opts.pads)?;
        table.set(b.n, b.m, entry);
    }
    Ok(table)
}

/// Collapse verdicts, in the order they are tried.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub enum CollapseVerdict {
    /// Positive-filtration classes all sit in odd total degree and the
    /// zero-filtration row is protected by the unit edge morphism.
    OddPositiveFiltration,
    /// Everything concentrates on a single surviving line.
    RowZeroOnly,
    /// No differential up to `r_max` connects two nonzero slots.
    CollapsedAt(i64),
    Unknown,
}

pub fn detect_collapse(
    table: &BigradedTable,
    edge_protected: bool,
    current_r: i64,
    r_max: i64,
) -> CollapseVerdict {
    let nonzero: Vec<(i64, i64)> = table.nonzero().map(|(&k, _)| k).collect();
    if nonzero.is_empty() {
        return CollapseVerdict::RowZeroOnly;
    }
    if edge_protected
        && nonzero
            .iter()
            .all(|&(n, m)| n == 0 || (n + m).rem_euclid(2) == 1)
        && nonzero.iter().any(|&(n, _)| n > 0)
    {
        return CollapseVerdict::OddPositiveFiltration;
    }
    if nonzero.iter().all(|&(_, m)| m == 0) || nonzero.iter().all(|&(n, _)| n == 0) {
        return CollapseVerdict::RowZeroOnly;
    }
    let occupied: std::collections::BTreeSet<(i64, i64)> = nonzero.iter().copied().collect();
    for r in current_r..=r_max {
        for &(n, m) in &nonzero {
            if occupied.contains(&(n - r, m + r - 1)) {
                return CollapseVerdict::Unknown;
            }
        }
    }
    CollapseVerdict::CollapsedAt(current_r)
}

/// One total degree of an assembled abutment.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct AbutmentDegree {
    pub shape: FgAbelianShape,
    pub names: Vec<String>,
    /// All contributing entries were free (no additive extension issues).
    pub resolved: bool,
    /// No contributing entry was window-clipped.
    pub complete: bool,
}

/// Sums the table along diagonals `n + m = d`. A degree is `resolved`
/// when every contribution is free over the base (additive extensions
/// then split); otherwise the entry reports the associated graded only.
pub fn assemble_abutment(table: &BigradedTable) -> BTreeMap<i64, AbutmentDegree> {
    let mut out = BTreeMap::new();
    for (total, cells) in table.by_total_degree() {
        let mut shape = FgAbelianShape::zero();
        let mut names = vec![];
        let mut complete = true;
        let mut all_free = true;
        for (_, entry) in &cells {
            shape = shape.direct_sum(&entry.shape);
            names.extend(entry.names.iter().cloned());
            complete &= !entry.partial;
            all_free &= entry.shape.is_free();
        }
        let resolved = all_free || cells.len() == 1;
        out.insert(
            total,
            AbutmentDegree {
                shape,
                names,
                resolved,
                complete,
            },
        );
    }
    out
}
