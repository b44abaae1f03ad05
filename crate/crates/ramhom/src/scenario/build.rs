//! Resolves parsed declarations into engine objects.

use super::model::*;
use super::ScenarioError;
use crate::base::{rat, BaseRing, FgAbelianShape, Matrix};
use crate::graded::family::LinForm;
use crate::graded::{
    ActionRule, BasisFamily, Bidegree, DegreewiseModule, ExpBounds, FreeGen, GeneratorSpec, Poly,
    Presentation, PresentedGradedAlgebra, Window,
};
use crate::homalg::{
    ActionKind, CyclicAction, FreeResolution, PeriodicTail, Stage,
};
use crate::specseq::{AmbientGen, DiffRule, DifferentialSpec, Factor, FamilyPage, PageFamily, PagePoly};

pub struct BuiltAlgebra {
    pub algebra: PresentedGradedAlgebra,
    pub bounds: ExpBounds,
}

/// Lowers an `ExprPoly` against a generator list.
pub fn lower_poly(
    alg: &PresentedGradedAlgebra,
    p: &ExprPoly,
) -> Result<Poly, ScenarioError> {
    let mut out = Poly::zero();
    for (c, mono) in &p.terms {
        let mut exps = vec![0i64; alg.num_gens()];
        for (g, e) in mono {
            let idx = alg
                .gen_index(g)
                .map_err(|e| ScenarioError::Validation(e.to_string()))?;
            exps[idx] += e;
        }
        out.add_term(exps, c.clone(), alg.base());
    }
    Ok(out)
}

pub fn build_algebra(
    base: BaseRing,
    decl: &AlgebraDecl,
) -> Result<BuiltAlgebra, ScenarioError> {
    let gens: Vec<GeneratorSpec> = decl
        .gens
        .iter()
        .map(|g| GeneratorSpec {
            name: g.name.clone(),
            degree: Bidegree::new(g.filtration, g.degree),
            weight: g.weight,
            invertible: g.invertible,
            square_zero: g.square_zero,
        })
        .collect();
    // two-phase: raw algebra for lowering rule expressions, then rebuild
    let raw = PresentedGradedAlgebra::new(base, gens.clone(), vec![])
        .map_err(|e| ScenarioError::Validation(e.to_string()))?;
    let mut rules = vec![];
    for (g, power, rhs) in &decl.rules {
        let idx = raw
            .gen_index(g)
            .map_err(|e| ScenarioError::Validation(e.to_string()))?;
        rules.push((idx, *power, lower_poly(&raw, rhs)?));
    }
    let algebra = PresentedGradedAlgebra::new(base, gens, rules)
        .map_err(|e| ScenarioError::Validation(e.to_string()))?;
    let mut bounds = ExpBounds::none();
    for (i, g) in decl.gens.iter().enumerate() {
        if let Some((lo, hi)) = g.range {
            bounds = bounds.with(i, lo, hi);
        }
    }
    Ok(BuiltAlgebra { algebra, bounds })
}

/// Builds a module declaration, window padded so tensor/tate evaluations
/// near the scenario window stay exact.
pub fn build_module(
    scenario: &Scenario,
    name: &str,
    window: Window,
) -> Result<DegreewiseModule, ScenarioError> {
    let decl = scenario
        .module(name)
        .ok_or_else(|| ScenarioError::Validation(format!("unknown module `{name}`")))?;
    match &decl.body {
        ModuleBody::Quotient { rules } => {
            let built = build_algebra(
                scenario.base,
                scenario.algebra(&decl.over).ok_or_else(|| {
                    ScenarioError::Validation(format!("unknown algebra `{}`", decl.over))
                })?,
            )?;
            let lowered: Vec<(usize, i64, Poly)> = rules
                .iter()
                .map(|(g, p, rhs)| {
                    let idx = built
                        .algebra
                        .gen_index(g)
                        .map_err(|e| ScenarioError::Validation(e.to_string()))?;
                    Ok((idx, *p, lower_poly(&built.algebra, rhs)?))
                })
                .collect::<Result<_, ScenarioError>>()?;
            DegreewiseModule::quotient(built.algebra, lowered, window, built.bounds)
                .map_err(|e| ScenarioError::Validation(e.to_string()))
        }
        ModuleBody::Families { families, actions } => {
            let built = build_algebra(
                scenario.base,
                scenario.algebra(&decl.over).ok_or_else(|| {
                    ScenarioError::Validation(format!("unknown algebra `{}`", decl.over))
                })?,
            )?;
            let fams: Vec<BasisFamily> = families
                .iter()
                .map(|f| BasisFamily {
                    name: f.name.clone(),
                    nparams: f.params.len(),
                    degree: f.degree.clone(),
                    constraints: f.constraints.clone(),
                })
                .collect();
            let find_family = |n: &str| families.iter().position(|f| f.name == n);
            let mut acts = vec![];
            for a in actions {
                let Some((coeff, target, target_params)) = &a.value else {
                    continue; // explicit zero action: omitted rules act by zero
                };
                acts.push(ActionRule {
                    gen: built
                        .algebra
                        .gen_index(&a.gen)
                        .map_err(|e| ScenarioError::Validation(e.to_string()))?,
                    family: find_family(&a.family).unwrap(),
                    guard: a.guard.clone(),
                    coeff: coeff.clone(),
                    target_family: find_family(target).unwrap(),
                    target_params: target_params.clone(),
                });
            }
            DegreewiseModule::new(
                built.algebra,
                Presentation::Rule {
                    families: fams,
                    actions: acts,
                },
                window,
                built.bounds,
            )
            .map_err(|e| ScenarioError::Validation(e.to_string()))
        }
        ModuleBody::Sum(parts) => {
            let built: Vec<DegreewiseModule> = parts
                .iter()
                .map(|p| build_module(scenario, p, window))
                .collect::<Result<_, _>>()?;
            let algebra = built[0].algebra.clone();
            DegreewiseModule::new(algebra, Presentation::Sum(built), window, ExpBounds::none())
                .map_err(|e| ScenarioError::Validation(e.to_string()))
        }
        ModuleBody::Ranks(ranks) => {
            // placeholder even-degree generator; families carry the ranks
            let gens = vec![GeneratorSpec::internal("s", 2)];
            let alg = PresentedGradedAlgebra::new(
                scenario.base,
                gens,
                vec![(0, 1, Poly::zero())],
            )
            .map_err(|e| ScenarioError::Validation(e.to_string()))?;
            let families = ranks
                .iter()
                .map(|&(d, r)| BasisFamily {
                    name: format!("b{}", d.to_string().replace('-', "m")),
                    nparams: 1,
                    degree: LinForm::constant(1, rat(d)),
                    constraints: vec![
                        crate::graded::family::Constraint::ge0(LinForm::from_i64(&[1], 0)),
                        crate::graded::family::Constraint::ge0(LinForm::from_i64(
                            &[-1],
                            r as i64 - 1,
                        )),
                    ],
                })
                .collect();
            DegreewiseModule::new(
                alg,
                Presentation::Rule {
                    families,
                    actions: vec![],
                },
                window,
                ExpBounds::none(),
            )
            .map_err(|e| ScenarioError::Validation(e.to_string()))
        }
    }
}

pub fn build_resolution(
    scenario: &Scenario,
    decl: &ResolutionDecl,
    window: Window,
) -> Result<FreeResolution, ScenarioError> {
    let built = build_algebra(
        scenario.base,
        scenario
            .algebra(&decl.over)
            .ok_or_else(|| ScenarioError::Validation(format!("unknown algebra `{}`", decl.over)))?,
    )?;
    let target = build_module(scenario, &decl.of, window)?;
    let mut stages = vec![Stage {
        gens: vec![FreeGen {
            name: "e0".into(),
            shift: 0,
        }],
        map: vec![],
    }];
    for (k, (shift, map)) in decl.stages.iter().enumerate() {
        let poly = lower_poly(&built.algebra, map)?;
        stages.push(Stage {
            gens: vec![FreeGen {
                name: format!("e{}", k + 1),
                shift: *shift,
            }],
            map: vec![vec![poly]],
        });
    }
    let periodic = decl.periodic.map(|(from, period, step)| PeriodicTail {
        from,
        period,
        shift_step: step,
    });
    Ok(FreeResolution::assemble(
        built.algebra,
        target,
        stages,
        periodic,
        window,
    ))
}

pub fn build_cyclic_action(
    scenario: &Scenario,
    decl: &TateDecl,
    window: Window,
) -> Result<CyclicAction, ScenarioError> {
    let module = build_module(scenario, &decl.module, window)?;
    let kind = match decl.action {
        ActionKindDecl::Trivial => ActionKind::Trivial,
        ActionKindDecl::SignByWeight => ActionKind::SignByWeight,
    };
    Ok(CyclicAction {
        module,
        order: decl.order,
        kind,
    })
}

pub fn build_page(base: BaseRing, decl: &PageDecl) -> Result<FamilyPage, ScenarioError> {
    let base = decl.coefficients.unwrap_or(base);
    let ambient: Vec<AmbientGen> = decl
        .ambient
        .iter()
        .map(|a| AmbientGen {
            name: a.name.clone(),
            degree: Bidegree::new(a.n, a.m),
            weight: a.weight,
            range: a.range,
            square_zero: a.square_zero,
        })
        .collect();
    let gen_index = |n: &str| -> Result<usize, ScenarioError> {
        ambient
            .iter()
            .position(|g| g.name == n)
            .ok_or_else(|| ScenarioError::Validation(format!("unknown ambient generator `{n}`")))
    };
    let mut factors = vec![];
    for (name, mono) in &decl.factors {
        let mut exps = vec![0i64; ambient.len()];
        for (g, e) in mono {
            exps[gen_index(g)?] += e;
        }
        factors.push(Factor {
            name: name.clone(),
            exponents: exps,
        });
    }
    let factor_index = |n: &str| -> Result<usize, ScenarioError> {
        factors
            .iter()
            .position(|f| f.name == n)
            .ok_or_else(|| ScenarioError::Validation(format!("unknown factor `{n}`")))
    };
    let mut families = vec![];
    for f in &decl.families {
        let mut powers = vec![];
        for (fname, form) in &f.powers {
            powers.push((factor_index(fname)?, form.clone()));
        }
        families.push(PageFamily {
            name: f.name.clone(),
            params: f.params.clone(),
            factor_powers: powers,
            constraints: f.constraints.clone(),
        });
    }
    Ok(FamilyPage {
        index: decl.index,
        coeff: base,
        ambient,
        factors,
        families,
        cache: Default::default(),
    })
}

/// Lowers differential rules against a page; returns the executable spec
/// plus any `check`-flagged closed-form spec for cross-validation.
pub fn build_differential(
    page: &FamilyPage,
    decl: &DiffDecl,
) -> Result<(DifferentialSpec, Option<DifferentialSpec>), ScenarioError> {
    let factor_index = |n: &str| -> Result<usize, ScenarioError> {
        page.factors
            .iter()
            .position(|f| f.name == n)
            .ok_or_else(|| ScenarioError::Validation(format!("unknown factor `{n}`")))
    };
    let family_index = |n: &str| -> Result<usize, ScenarioError> {
        page.families
            .iter()
            .position(|f| f.name == n)
            .ok_or_else(|| ScenarioError::Validation(format!("unknown family `{n}`")))
    };
    let gen_index = |n: &str| -> Result<usize, ScenarioError> {
        page.ambient
            .iter()
            .position(|g| g.name == n)
            .ok_or_else(|| ScenarioError::Validation(format!("unknown ambient generator `{n}`")))
    };
    let mut rules = vec![];
    let mut checks = vec![];
    for rule in &decl.rules {
        match rule {
            DiffRuleDecl::Factor { factor, value } => {
                let mut poly = PagePoly::zero();
                for (c, mono) in &value.terms {
                    let mut exps = vec![0i64; page.num_gens()];
                    for (g, e) in mono {
                        exps[gen_index(g)?] += e;
                    }
                    poly.terms.push((c.clone(), exps));
                }
                rules.push(DiffRule::Factor {
                    factor: factor_index(factor)?,
                    value: poly,
                });
            }
            DiffRuleDecl::Family {
                family,
                guard,
                coeff,
                target,
                target_params,
                check_only,
            } => {
                let lowered = DiffRule::Family {
                    family: family_index(family)?,
                    guard: guard.clone(),
                    coeff: coeff.clone(),
                    target_family: family_index(target)?,
                    target_params: target_params.clone(),
                };
                if *check_only {
                    checks.push(lowered);
                } else {
                    rules.push(lowered);
                }
            }
        }
    }
    let spec = DifferentialSpec { r: decl.r, rules };
    let check_spec = if checks.is_empty() {
        None
    } else {
        Some(DifferentialSpec {
            r: decl.r,
            rules: checks,
        })
    };
    Ok((spec, check_spec))
}

pub fn build_cone_data(
    scenario: &Scenario,
    decl: &ConeDecl,
) -> Result<
    (
        std::collections::BTreeMap<i64, crate::homalg::DegreeMap>,
        crate::homalg::ConeHints,
    ),
    ScenarioError,
> {
    use crate::homalg::{ConeHints, DegreeMap, PresentedGroup};
    let ring = scenario.base;
    let mut data = std::collections::BTreeMap::new();
    for d in &decl.degrees {
        let source = PresentedGroup::new(d.source.clone());
        let target = PresentedGroup::new(d.target.clone());
        let matrix = match &d.matrix {
            None => Matrix::zero(ring, target.num_gens(), source.num_gens()),
            Some(rows) => {
                let mut m = Matrix::zero(ring, target.num_gens(), source.num_gens());
                for (i, row) in rows.iter().enumerate() {
                    for (j, &v) in row.iter().enumerate() {
                        m.set(i, j, rat(v));
                    }
                }
                m
            }
        };
        data.insert(
            d.degree,
            DegreeMap {
                source,
                target,
                matrix,
            },
        );
    }
    let mut hints = ConeHints::default();
    for (d, note) in &decl.torsion_free_hints {
        hints.torsion_free_total.insert(*d, note.clone());
    }
    Ok((data, hints))
}

/// Expands an expected pattern into concrete `(bidegree or degree, shape,
/// names)` contributions within the given windows.
pub fn expand_pattern(
    pattern: &ExpectPattern,
    n_window: Option<Window>,
    m_window: Window,
) -> Result<Vec<(Option<i64>, i64, FgAbelianShape, Option<String>)>, ScenarioError> {
    use crate::graded::family::{enumerate_params, Constraint};
    let np = pattern.params.len();
    let mut cons = pattern.constraints.clone();
    // window bounds on the degree forms keep the enumeration finite
    let bound = |form: &LinForm, w: Window, cons: &mut Vec<Constraint>| {
        let mut upper = form.scale(&rat(-1));
        upper.konst += rat(w.hi);
        cons.push(Constraint::ge0(upper));
        let mut lower = form.clone();
        lower.konst -= rat(w.lo);
        cons.push(Constraint::ge0(lower));
    };
    bound(&pattern.m_form, m_window, &mut cons);
    if let (Some(nf), Some(nw)) = (&pattern.n_form, n_window) {
        bound(nf, nw, &mut cons);
    }
    let sols = enumerate_params(np, &[], &cons)
        .map_err(|e| ScenarioError::Validation(format!("pattern `{}`: {e}", pattern.name)))?;
    let mut out = vec![];
    for params in sols {
        let m = pattern
            .m_form
            .eval_int(&params)
            .ok_or_else(|| ScenarioError::Validation("non-integral pattern degree".into()))?;
        let n = match &pattern.n_form {
            Some(f) => Some(f.eval_int(&params).ok_or_else(|| {
                ScenarioError::Validation("non-integral pattern filtration".into())
            })?),
            None => None,
        };
        let name = pattern
            .name_template
            .as_ref()
            .map(|t| fill_template(t, &pattern.params, &params))
            .transpose()?;
        out.push((n, m, pattern.shape.clone(), name));
    }
    Ok(out)
}

/// Fills `{affine-expr}` holes in a name template.
pub fn fill_template(
    template: &str,
    params: &[String],
    values: &[i64],
) -> Result<String, ScenarioError> {
    let mut out = String::new();
    let mut rest = template;
    while let Some(start) = rest.find('{') {
        out.push_str(&rest[..start]);
        let end = rest[start..]
            .find('}')
            .ok_or_else(|| ScenarioError::Validation("unclosed `{` in name template".into()))?
            + start;
        let inner = &rest[start + 1..end];
        let toks = super::expr::lex(inner, 1)?;
        let mut cur = super::expr::Cursor::new(&toks, 1);
        let poly = super::expr::parse_sympoly(&mut cur)?;
        let form = super::expr::sympoly_to_linform(&poly, &params.to_vec(), 1)?;
        let v = form.eval(values);
        if !v.is_integer() {
            return Err(ScenarioError::Validation(
                "name template value is not an integer".into(),
            ));
        }
        out.push_str(&v.numer().to_string());
        rest = &rest[end + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

/// Window padding so that degreewise evaluation near the edges of the
/// scenario window never leaves module windows.
pub fn padded_window(scenario: &Scenario) -> Window {
    let mut pad = 16i64;
    for r in &scenario.resolutions {
        for (shift, _) in &r.stages {
            pad = pad.max(shift.abs());
        }
        if let Some((_, _, step)) = r.periodic {
            // unrolling across the filtration range adds whole periods
            let max_filt = scenario
                .tor
                .as_ref()
                .map(|t| t.max_filtration as i64 + 2)
                .unwrap_or(12);
            pad = pad.max(step.abs() * (max_filt / 2 + 2) + 16);
        }
    }
    scenario.degree_window.pad(pad)
}


