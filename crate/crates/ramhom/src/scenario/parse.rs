//! Line-oriented parser for `.scn` scenario files. See `docs/scn-format.md`
//! in the repository root for the grammar.

use super::expr::{
    err, lex, parse_constraints, parse_sympoly, sympoly_to_exprpoly, sympoly_to_linform, Cursor,
    Tok, Token,
};
use super::model::*;
use super::ScenarioError;
use crate::base::{BaseRing, FgAbelianShape, Int};
use crate::graded::family::LinForm;
use crate::graded::Window;

struct Lines<'a> {
    lines: Vec<(usize, Vec<Token>)>,
    src: std::marker::PhantomData<&'a str>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Result<Self, ScenarioError> {
        let mut lines = vec![];
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            if line.trim().is_empty() {
                continue;
            }
            let toks = lex(line, i + 1)?;
            if !toks.is_empty() {
                lines.push((i + 1, toks));
            }
        }
        Ok(Lines {
            lines,
            src: std::marker::PhantomData,
            pos: 0,
        })
    }

    fn next(&mut self) -> Option<&(usize, Vec<Token>)> {
        let l = self.lines.get(self.pos);
        if l.is_some() {
            self.pos += 1;
        }
        l
    }
}

/// Parses a scenario file, reporting the first error with line and column.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut lines = Lines::new(text)?;
    let mut name = None;
    let mut kind = None;
    let mut tags = vec![];
    let mut citation = None;
    let mut base = None;
    let mut degree_window = None;
    let mut filtration_window = None;
    let mut abutment_window = None;
    let mut algebras = vec![];
    let mut modules = vec![];
    let mut resolutions = vec![];
    let mut tor = None;
    let mut tate = None;
    let mut pages: Vec<PageDecl> = vec![];
    let mut diffs = vec![];
    let mut cone = None;
    let mut disc = None;
    let mut norm_range = None;
    let mut expects = vec![];
    let mut hints = Hints {
        edge_protected: false,
        r_max: 24,
    };

    while let Some((lineno, toks)) = lines.next().map(|(l, t)| (*l, t.clone())) {
        let mut cur = Cursor::new(&toks, lineno);
        let head = cur.expect_ident()?;
        match head.as_str() {
            "scenario" => {
                name = Some(cur.expect_ident()?);
                cur.expect_end()?;
            }
            "kind" => {
                let k = cur.expect_ident()?;
                kind = Some(Kind::parse(&k).ok_or_else(|| {
                    err(lineno, cur.col(), format!("unknown scenario kind `{k}`"))
                })?);
                cur.expect_end()?;
            }
            "tags" => {
                while !cur.at_end() {
                    tags.push(cur.expect_ident()?);
                }
            }
            "citation" => {
                citation = Some(cur.expect_str()?);
                cur.expect_end()?;
            }
            "base" => {
                base = Some(parse_base(&mut cur)?);
                cur.expect_end()?;
            }
            "window" => {
                let which = cur.expect_ident()?;
                let lo = cur.expect_int()?;
                let hi = cur.expect_int()?;
                cur.expect_end()?;
                let w = Window::new(lo, hi);
                match which.as_str() {
                    "degrees" => degree_window = Some(w),
                    "filtration" => filtration_window = Some(w),
                    "abutment" => abutment_window = Some(w),
                    other => {
                        return Err(err(lineno, 1, format!("unknown window `{other}`")));
                    }
                }
            }
            "hint" => {
                let which = cur.expect_ident()?;
                match which.as_str() {
                    "edge_protected" => hints.edge_protected = true,
                    "r_max" => hints.r_max = cur.expect_int()?,
                    other => return Err(err(lineno, 1, format!("unknown hint `{other}`"))),
                }
                cur.expect_end()?;
            }
            "norms" => {
                let a = cur.expect_int()?;
                let b = cur.expect_int()?;
                norm_range = Some((a as u64, b as u64));
                cur.expect_end()?;
            }
            "begin" => {
                let what = cur.expect_ident()?;
                match what.as_str() {
                    "algebra" => algebras.push(parse_algebra(&mut cur, &mut lines)?),
                    "module" => modules.push(parse_module(&mut cur, &mut lines)?),
                    "resolution" => resolutions.push(parse_resolution(&mut cur, &mut lines)?),
                    "tor" => tor = Some(parse_tor(&mut cur, &mut lines)?),
                    "tate" => tate = Some(parse_tate(&mut cur, &mut lines)?),
                    "page" => pages.push(parse_page(&mut cur, &mut lines, pages.last())?),
                    "differential" => diffs.push(parse_differential(&mut cur, &mut lines)?),
                    "cone" => cone = Some(parse_cone(&mut cur, &mut lines)?),
                    "discriminant" => disc = Some(parse_disc(&mut cur, &mut lines)?),
                    "expect" => expects.push(parse_expect(&mut cur, &mut lines)?),
                    other => {
                        return Err(err(lineno, 1, format!("unknown block `{other}`")));
                    }
                }
            }
            other => return Err(err(lineno, 1, format!("unknown directive `{other}`"))),
        }
    }

    let name = name.ok_or(ScenarioError::Validation("missing `scenario` line".into()))?;
    let kind = kind.ok_or(ScenarioError::Validation("missing `kind` line".into()))?;
    let citation =
        citation.ok_or(ScenarioError::Validation("missing `citation` line".into()))?;
    if citation.trim().is_empty() {
        return Err(ScenarioError::Validation("citation must be nonempty".into()));
    }
    let base = base.ok_or(ScenarioError::Validation("missing `base` line".into()))?;
    let degree_window = degree_window
        .ok_or(ScenarioError::Validation("missing `window degrees`".into()))?;

    let scenario = Scenario {
        name,
        kind,
        tags,
        citation,
        base,
        degree_window,
        filtration_window,
        abutment_window,
        algebras,
        modules,
        resolutions,
        tor,
        tate,
        pages,
        diffs,
        cone,
        disc,
        norm_range,
        expects,
        hints,
    };
    validate(&scenario)?;
    Ok(scenario)
}

fn parse_base(cur: &mut Cursor) -> Result<BaseRing, ScenarioError> {
    let name = cur.expect_ident()?;
    match name.as_str() {
        "Z" => {
            if cur.eat_sym('(') {
                let p = cur.expect_int()? as u64;
                cur.expect_sym(')')?;
                BaseRing::p_local(p).map_err(|e| ScenarioError::Validation(e.to_string()))
            } else {
                Ok(BaseRing::Integers)
            }
        }
        "F" => {
            cur.expect_sym('(')?;
            let p = cur.expect_int()? as u64;
            cur.expect_sym(')')?;
            BaseRing::prime_field(p).map_err(|e| ScenarioError::Validation(e.to_string()))
        }
        other => Err(err(cur.line, 1, format!("unknown base ring `{other}`"))),
    }
}

fn block_lines(
    lines: &mut Lines,
) -> Result<Vec<(usize, Vec<Token>)>, ScenarioError> {
    let mut out = vec![];
    loop {
        let Some((lineno, toks)) = lines.next().map(|(l, t)| (*l, t.clone())) else {
            return Err(ScenarioError::Validation(
                "unterminated block (missing `end`)".into(),
            ));
        };
        if toks.len() == 1 && toks[0].tok == Tok::Ident("end".into()) {
            return Ok(out);
        }
        out.push((lineno, toks));
    }
}

fn parse_algebra(cur: &mut Cursor, lines: &mut Lines) -> Result<AlgebraDecl, ScenarioError> {
    let name = cur.expect_ident()?;
    cur.expect_end()?;
    let mut gens = vec![];
    let mut rules = vec![];
    for (lineno, toks) in block_lines(lines)? {
        let mut c = Cursor::new(&toks, lineno);
        let head = c.expect_ident()?;
        match head.as_str() {
            "gen" => gens.push(parse_gen(&mut c)?),
            "rule" => {
                let g = c.expect_ident()?;
                let power = if c.eat_sym('^') { c.expect_int()? } else { 1 };
                match c.next().map(|t| t.tok.clone()) {
                    Some(Tok::Arrow) => {}
                    _ => return Err(err(lineno, c.col(), "expected `->`")),
                }
                let rhs = if c.peek() == Some(&Tok::Int(0)) && c.toks.len() == c.pos + 1 {
                    c.pos += 1;
                    ExprPoly::zero()
                } else {
                    sympoly_to_exprpoly(&parse_sympoly(&mut c)?)
                };
                c.expect_end()?;
                rules.push((g, power, rhs));
            }
            other => return Err(err(lineno, 1, format!("unknown algebra item `{other}`"))),
        }
    }
    Ok(AlgebraDecl { name, gens, rules })
}

fn parse_gen(c: &mut Cursor) -> Result<GenDecl, ScenarioError> {
    let name = c.expect_ident()?;
    let mut decl = GenDecl {
        name,
        degree: 0,
        filtration: 0,
        weight: 0,
        invertible: false,
        square_zero: false,
        range: None,
    };
    let mut saw_degree = false;
    while !c.at_end() {
        let key = c.expect_ident()?;
        match key.as_str() {
            "degree" => {
                decl.degree = c.expect_int()?;
                saw_degree = true;
            }
            "filtration" => decl.filtration = c.expect_int()?,
            "weight" => decl.weight = (c.expect_int()?.rem_euclid(2)) as u8,
            "invertible" => decl.invertible = true,
            "square_zero" => decl.square_zero = true,
            "range" => {
                let lo = c.expect_int()?;
                let hi = c.expect_int()?;
                decl.range = Some((lo, hi));
            }
            other => return Err(err(c.line, c.col(), format!("unknown gen key `{other}`"))),
        }
    }
    if !saw_degree {
        return Err(err(c.line, 1, "generator needs a degree"));
    }
    Ok(decl)
}

fn parse_module(cur: &mut Cursor, lines: &mut Lines) -> Result<ModuleDecl, ScenarioError> {
    let name = cur.expect_ident()?;
    cur.expect_end()?;
    let mut over = String::new();
    let mut quotient_rules = vec![];
    let mut families = vec![];
    let mut actions = vec![];
    let mut sum = vec![];
    let mut ranks = vec![];
    for (lineno, toks) in block_lines(lines)? {
        let mut c = Cursor::new(&toks, lineno);
        let head = c.expect_ident()?;
        match head.as_str() {
            "over" => over = c.expect_ident()?,
            "quotient" => {
                let g = c.expect_ident()?;
                let power = if c.eat_sym('^') { c.expect_int()? } else { 1 };
                match c.next().map(|t| t.tok.clone()) {
                    Some(Tok::Arrow) => {}
                    _ => return Err(err(lineno, c.col(), "expected `->`")),
                }
                let rhs = if c.peek() == Some(&Tok::Int(0)) && c.toks.len() == c.pos + 1 {
                    c.pos += 1;
                    ExprPoly::zero()
                } else {
                    sympoly_to_exprpoly(&parse_sympoly(&mut c)?)
                };
                quotient_rules.push((g, power, rhs));
            }
            "family" => {
                let fname = c.expect_ident()?;
                c.expect_sym('(')?;
                let mut params = vec![];
                loop {
                    params.push(c.expect_ident()?);
                    if !c.eat_sym(',') {
                        break;
                    }
                }
                c.expect_sym(')')?;
                if !c.eat_ident("degree") {
                    return Err(err(lineno, c.col(), "expected `degree`"));
                }
                let dp = parse_sympoly(&mut c)?;
                let degree = sympoly_to_linform(&dp, &params, lineno)?;
                let constraints = if c.eat_ident("where") {
                    parse_constraints(&mut c, &params)?
                } else {
                    vec![]
                };
                c.expect_end()?;
                families.push(FamilyDecl {
                    name: fname,
                    params,
                    degree,
                    constraints,
                });
            }
            "action" => {
                let gen = c.expect_ident()?;
                c.expect_sym(':')?;
                let fname = c.expect_ident()?;
                c.expect_sym('(')?;
                let mut params = vec![];
                loop {
                    params.push(c.expect_ident()?);
                    if !c.eat_sym(',') {
                        break;
                    }
                }
                c.expect_sym(')')?;
                match c.next().map(|t| t.tok.clone()) {
                    Some(Tok::Arrow) => {}
                    _ => return Err(err(lineno, c.col(), "expected `->`")),
                }
                let value = parse_rule_rhs(&mut c, &params)?;
                let guard = if c.eat_ident("if") {
                    parse_constraints(&mut c, &params)?
                } else {
                    vec![]
                };
                c.expect_end()?;
                actions.push(ActionDecl {
                    gen,
                    family: fname,
                    guard,
                    value,
                });
            }
            "sum" => {
                while !c.at_end() {
                    sum.push(c.expect_ident()?);
                }
            }
            "ranks" => loop {
                let d = c.expect_int()?;
                c.expect_sym(':')?;
                let r = c.expect_int()?;
                ranks.push((d, r as usize));
                if !c.eat_sym(',') {
                    break;
                }
            },
            other => return Err(err(lineno, 1, format!("unknown module item `{other}`"))),
        }
    }
    let body = if !sum.is_empty() {
        ModuleBody::Sum(sum)
    } else if !ranks.is_empty() {
        ModuleBody::Ranks(ranks)
    } else if !families.is_empty() {
        ModuleBody::Families { families, actions }
    } else {
        ModuleBody::Quotient {
            rules: quotient_rules,
        }
    };
    Ok(ModuleDecl { name, over, body })
}

/// `0` or `[(coeff)] fam(expr, ...)`
fn parse_rule_rhs(
    c: &mut Cursor,
    params: &[String],
) -> Result<Option<(LinForm, String, Vec<LinForm>)>, ScenarioError> {
    if c.peek() == Some(&Tok::Int(0))
        && !matches!(c.toks.get(c.pos + 1).map(|t| &t.tok), Some(Tok::Sym('(')))
    {
        c.pos += 1;
        return Ok(None);
    }
    let coeff = if c.peek() == Some(&Tok::Sym('(')) {
        c.expect_sym('(')?;
        let p = parse_sympoly(c)?;
        c.expect_sym(')')?;
        sympoly_to_linform(&p, params, c.line)?
    } else {
        LinForm::constant(params.len(), crate::base::rat(1))
    };
    let target = c.expect_ident()?;
    c.expect_sym('(')?;
    let mut target_params = vec![];
    loop {
        let p = parse_sympoly(c)?;
        target_params.push(sympoly_to_linform(&p, params, c.line)?);
        if !c.eat_sym(',') {
            break;
        }
    }
    c.expect_sym(')')?;
    Ok(Some((coeff, target, target_params)))
}

fn parse_resolution(cur: &mut Cursor, lines: &mut Lines) -> Result<ResolutionDecl, ScenarioError> {
    let name = cur.expect_ident()?;
    cur.expect_end()?;
    let mut over = String::new();
    let mut of = String::new();
    let mut stages = vec![];
    let mut periodic = None;
    for (lineno, toks) in block_lines(lines)? {
        let mut c = Cursor::new(&toks, lineno);
        let head = c.expect_ident()?;
        match head.as_str() {
            "over" => {
                over = c.expect_ident()?;
                if c.eat_ident("of") {
                    of = c.expect_ident()?;
                }
            }
            "stage" => {
                if !c.eat_ident("shift") {
                    return Err(err(lineno, c.col(), "expected `shift`"));
                }
                let s = c.expect_int()?;
                if !c.eat_ident("map") {
                    return Err(err(lineno, c.col(), "expected `map`"));
                }
                let p = sympoly_to_exprpoly(&parse_sympoly(&mut c)?);
                stages.push((s, p));
            }
            "periodic" => {
                if !c.eat_ident("from") {
                    return Err(err(lineno, c.col(), "expected `from`"));
                }
                let from = c.expect_int()? as usize;
                if !c.eat_ident("period") {
                    return Err(err(lineno, c.col(), "expected `period`"));
                }
                let period = c.expect_int()? as usize;
                if !c.eat_ident("step") {
                    return Err(err(lineno, c.col(), "expected `step`"));
                }
                let step = c.expect_int()?;
                periodic = Some((from, period, step));
            }
            other => return Err(err(lineno, 1, format!("unknown resolution item `{other}`"))),
        }
    }
    Ok(ResolutionDecl {
        name,
        over,
        of,
        stages,
        periodic,
    })
}

fn parse_tor(cur: &mut Cursor, lines: &mut Lines) -> Result<TorDecl, ScenarioError> {
    cur.expect_end()?;
    let mut resolution = String::new();
    let mut coefficients = String::new();
    let mut max_filtration = 9;
    let mut verify_resolution = true;
    for (lineno, toks) in block_lines(lines)? {
        let mut c = Cursor::new(&toks, lineno);
        let head = c.expect_ident()?;
        match head.as_str() {
            "resolution" => {
                resolution = c.expect_ident()?;
                if c.eat_ident("coefficients") {
                    coefficients = c.expect_ident()?;
                }
            }
            "max_filtration" => max_filtration = c.expect_int()? as usize,
            "skip_verify" => verify_resolution = false,
            other => return Err(err(lineno, 1, format!("unknown tor item `{other}`"))),
        }
    }
    Ok(TorDecl {
        resolution,
        coefficients,
        max_filtration,
        verify_resolution,
    })
}

fn parse_tate(cur: &mut Cursor, lines: &mut Lines) -> Result<TateDecl, ScenarioError> {
    cur.expect_end()?;
    let mut module = String::new();
    let mut order = 2;
    let mut action = ActionKindDecl::Trivial;
    for (lineno, toks) in block_lines(lines)? {
        let mut c = Cursor::new(&toks, lineno);
        let head = c.expect_ident()?;
        match head.as_str() {
            "module" => module = c.expect_ident()?,
            "order" => order = c.expect_int()? as u64,
            "action" => {
                let a = c.expect_ident()?;
                action = match a.as_str() {
                    "trivial" => ActionKindDecl::Trivial,
                    "sign_by_weight" => ActionKindDecl::SignByWeight,
                    other => {
                        return Err(err(lineno, c.col(), format!("unknown action `{other}`")))
                    }
                };
            }
            other => return Err(err(lineno, 1, format!("unknown tate item `{other}`"))),
        }
    }
    Ok(TateDecl {
        module,
        order,
        action,
    })
}

fn parse_page(
    cur: &mut Cursor,
    lines: &mut Lines,
    prev: Option<&PageDecl>,
) -> Result<PageDecl, ScenarioError> {
    let index = cur.expect_int()?;
    cur.expect_end()?;
    let mut ambient = vec![];
    let mut factors = vec![];
    let mut families = vec![];
    let mut compare_names = true;
    let mut coefficients = None;
    for (lineno, toks) in block_lines(lines)? {
        let mut c = Cursor::new(&toks, lineno);
        let head = c.expect_ident()?;
        match head.as_str() {
            "coefficients" => {
                coefficients = Some(parse_base(&mut c)?);
                c.expect_end()?;
            }
            "inherit" => {
                if !c.eat_ident("ambient") {
                    return Err(err(lineno, c.col(), "expected `inherit ambient`"));
                }
                let prev = prev.ok_or_else(|| {
                    err(lineno, 1, "no previous page to inherit ambient generators from")
                })?;
                ambient = prev.ambient.clone();
            }
            "compare" => {
                let what = c.expect_ident()?;
                compare_names = match what.as_str() {
                    "ranks" => false,
                    "names" => true,
                    other => {
                        return Err(err(lineno, c.col(), format!("unknown compare `{other}`")))
                    }
                };
            }
            "ambient" => {
                let name = c.expect_ident()?;
                if !c.eat_ident("bidegree") {
                    return Err(err(lineno, c.col(), "expected `bidegree`"));
                }
                c.expect_sym('(')?;
                let n = c.expect_int()?;
                c.expect_sym(',')?;
                let m = c.expect_int()?;
                c.expect_sym(')')?;
                let mut decl = AmbientDecl {
                    name,
                    n,
                    m,
                    weight: 0,
                    range: None,
                    square_zero: false,
                };
                while !c.at_end() {
                    let key = c.expect_ident()?;
                    match key.as_str() {
                        "weight" => decl.weight = (c.expect_int()?.rem_euclid(2)) as u8,
                        "range" => {
                            let lo = c.expect_int()?;
                            let hi = c.expect_int()?;
                            decl.range = Some((lo, hi));
                        }
                        "square_zero" => decl.square_zero = true,
                        other => {
                            return Err(err(lineno, c.col(), format!("unknown key `{other}`")))
                        }
                    }
                }
                ambient.push(decl);
            }
            "factor" => {
                let name = c.expect_ident()?;
                c.expect_sym('=')?;
                let p = parse_sympoly(&mut c)?;
                c.expect_end()?;
                if p.terms.len() != 1 || !num::One::is_one(&p.terms[0].0) {
                    return Err(err(lineno, 1, "factor must be a single monomial"));
                }
                factors.push((name, p.terms[0].1.clone()));
            }
            "family" => {
                let name = c.expect_ident()?;
                c.expect_sym('(')?;
                let mut params = vec![];
                loop {
                    params.push(c.expect_ident()?);
                    if !c.eat_sym(',') {
                        break;
                    }
                }
                c.expect_sym(')')?;
                c.expect_sym('=')?;
                // product of factor powers: NAME[^expr] ...
                let mut powers = vec![];
                while !c.at_end() && !matches!(c.peek(), Some(Tok::Ident(w)) if w == "where") {
                    let fname = c.expect_ident()?;
                    let form = if c.eat_sym('^') {
                        if c.eat_sym('(') {
                            let p = parse_sympoly(&mut c)?;
                            c.expect_sym(')')?;
                            sympoly_to_linform(&p, &params, lineno)?
                        } else {
                            let p = parse_sympoly(&mut c)?;
                            sympoly_to_linform(&p, &params, lineno)?
                        }
                    } else {
                        LinForm::constant(params.len(), crate::base::rat(1))
                    };
                    powers.push((fname, form));
                }
                let constraints = if c.eat_ident("where") {
                    parse_constraints(&mut c, &params)?
                } else {
                    vec![]
                };
                c.expect_end()?;
                families.push(PageFamilyDecl {
                    name,
                    params,
                    powers,
                    constraints,
                });
            }
            other => return Err(err(lineno, 1, format!("unknown page item `{other}`"))),
        }
    }
    Ok(PageDecl {
        index,
        coefficients,
        ambient,
        factors,
        families,
        compare_names,
    })
}

fn parse_differential(cur: &mut Cursor, lines: &mut Lines) -> Result<DiffDecl, ScenarioError> {
    let r = cur.expect_int()?;
    cur.expect_end()?;
    let mut rules = vec![];
    let mut truncate = false;
    for (lineno, toks) in block_lines(lines)? {
        let mut c = Cursor::new(&toks, lineno);
        let head = c.expect_ident()?;
        match head.as_str() {
            "truncate_outside_support" => truncate = true,
            "on" => {
                let factor = c.expect_ident()?;
                match c.next().map(|t| t.tok.clone()) {
                    Some(Tok::Arrow) => {}
                    _ => return Err(err(lineno, c.col(), "expected `->`")),
                }
                let value = if c.peek() == Some(&Tok::Int(0)) && c.toks.len() == c.pos + 1 {
                    c.pos += 1;
                    ExprPoly::zero()
                } else {
                    sympoly_to_exprpoly(&parse_sympoly(&mut c)?)
                };
                c.expect_end()?;
                rules.push(DiffRuleDecl::Factor { factor, value });
            }
            "family" | "check" => {
                let check_only = if head == "check" {
                    if !c.eat_ident("family") {
                        return Err(err(lineno, c.col(), "expected `check family`"));
                    }
                    true
                } else {
                    false
                };
                let family = c.expect_ident()?;
                c.expect_sym('(')?;
                let mut params = vec![];
                loop {
                    params.push(c.expect_ident()?);
                    if !c.eat_sym(',') {
                        break;
                    }
                }
                c.expect_sym(')')?;
                match c.next().map(|t| t.tok.clone()) {
                    Some(Tok::Arrow) => {}
                    _ => return Err(err(lineno, c.col(), "expected `->`")),
                }
                let value = parse_rule_rhs(&mut c, &params)?;
                let guard = if c.eat_ident("if") {
                    parse_constraints(&mut c, &params)?
                } else {
                    vec![]
                };
                c.expect_end()?;
                let (coeff, target, target_params) = match value {
                    Some(v) => v,
                    None => (
                        LinForm::constant(params.len(), crate::base::rat(0)),
                        family.clone(),
                        params
                            .iter()
                            .enumerate()
                            .map(|(i, _)| LinForm::var(params.len(), i))
                            .collect(),
                    ),
                };
                rules.push(DiffRuleDecl::Family {
                    family,
                    guard,
                    coeff,
                    target,
                    target_params,
                    check_only,
                });
            }
            other => {
                return Err(err(lineno, 1, format!("unknown differential item `{other}`")))
            }
        }
    }
    Ok(DiffDecl {
        r,
        rules,
        truncate_outside_support: truncate,
    })
}

/// `0 | Z | Z^k | Z/d | (Z/d)^k`, joined by `+`.
pub fn parse_shape(c: &mut Cursor) -> Result<FgAbelianShape, ScenarioError> {
    if c.peek() == Some(&Tok::Int(0)) {
        c.pos += 1;
        return Ok(FgAbelianShape::zero());
    }
    let mut free = 0usize;
    let mut torsion: Vec<Int> = vec![];
    loop {
        if c.eat_sym('(') {
            // (Z/d)^k
            if !c.eat_ident("Z") {
                return Err(err(c.line, c.col(), "expected `Z`"));
            }
            c.expect_sym('/')?;
            let d = c.expect_int()?;
            c.expect_sym(')')?;
            c.expect_sym('^')?;
            let k = c.expect_int()?;
            for _ in 0..k {
                torsion.push(Int::from(d));
            }
        } else {
            if !c.eat_ident("Z") {
                return Err(err(c.line, c.col(), "expected `Z`"));
            }
            if c.eat_sym('/') {
                let d = c.expect_int()?;
                torsion.push(Int::from(d));
            } else if c.eat_sym('^') {
                free += c.expect_int()? as usize;
            } else {
                free += 1;
            }
        }
        if !c.eat_sym('+') {
            break;
        }
    }
    torsion.sort();
    Ok(FgAbelianShape::new(free, torsion))
}

fn parse_cone(cur: &mut Cursor, lines: &mut Lines) -> Result<ConeDecl, ScenarioError> {
    cur.expect_end()?;
    let mut degrees = vec![];
    let mut torsion_free_hints = vec![];
    for (lineno, toks) in block_lines(lines)? {
        let mut c = Cursor::new(&toks, lineno);
        let head = c.expect_ident()?;
        match head.as_str() {
            "map" => {
                let degree = c.expect_int()?;
                c.expect_sym(':')?;
                let source = parse_shape(&mut c)?;
                match c.next().map(|t| t.tok.clone()) {
                    Some(Tok::Arrow) => {}
                    _ => return Err(err(lineno, c.col(), "expected `->`")),
                }
                let target = parse_shape(&mut c)?;
                let matrix = if c.eat_ident("matrix") {
                    Some(parse_int_matrix(&mut c)?)
                } else {
                    None
                };
                c.expect_end()?;
                degrees.push(ConeDegreeDecl {
                    degree,
                    source,
                    target,
                    matrix,
                });
            }
            "hint" => {
                if !c.eat_ident("torsion_free") {
                    return Err(err(lineno, c.col(), "expected `torsion_free`"));
                }
                let d = c.expect_int()?;
                let note = c.expect_str()?;
                torsion_free_hints.push((d, note));
            }
            other => return Err(err(lineno, 1, format!("unknown cone item `{other}`"))),
        }
    }
    Ok(ConeDecl {
        degrees,
        torsion_free_hints,
    })
}

/// `[a b; c d]`
fn parse_int_matrix(c: &mut Cursor) -> Result<Vec<Vec<i64>>, ScenarioError> {
    c.expect_sym('[')?;
    let mut rows = vec![vec![]];
    loop {
        if c.eat_sym(']') {
            break;
        }
        if c.eat_sym(';') {
            rows.push(vec![]);
            continue;
        }
        let v = c.expect_int()?;
        rows.last_mut().unwrap().push(v);
    }
    Ok(rows)
}

fn parse_disc(cur: &mut Cursor, lines: &mut Lines) -> Result<DiscDecl, ScenarioError> {
    cur.expect_end()?;
    let mut mode: Option<DiscDecl> = None;
    let mut source = vec![];
    let mut target = vec![];
    for (lineno, toks) in block_lines(lines)? {
        let mut c = Cursor::new(&toks, lineno);
        let head = c.expect_ident()?;
        match head.as_str() {
            "trace" => {
                let mut var_degree = 2;
                let mut modulus = 1;
                let mut coeff = 1;
                let mut power_mult = 1;
                let mut power_off = 0;
                let mut arg_includes_var_power = false;
                while !c.at_end() {
                    let key = c.expect_ident()?;
                    match key.as_str() {
                        "var_degree" => var_degree = c.expect_int()?,
                        "modulus" => modulus = c.expect_int()?,
                        "coeff" => coeff = c.expect_int()?,
                        "power_mult" => power_mult = c.expect_int()?,
                        "power_off" => power_off = c.expect_int()?,
                        "arg_includes_var" => arg_includes_var_power = true,
                        other => {
                            return Err(err(lineno, c.col(), format!("unknown key `{other}`")))
                        }
                    }
                }
                mode = Some(DiscDecl::Trace {
                    var_degree,
                    modulus,
                    coeff,
                    power_mult,
                    power_off,
                    arg_includes_var_power,
                    source: vec![],
                    target: vec![],
                });
            }
            "shift_map" => {
                let mut var_degree = 2;
                let mut source_shift = 0;
                let mut target_shift = 0;
                let mut power_shift = 0;
                let mut coeff = 1;
                while !c.at_end() {
                    let key = c.expect_ident()?;
                    match key.as_str() {
                        "var_degree" => var_degree = c.expect_int()?,
                        "source_shift" => source_shift = c.expect_int()?,
                        "target_shift" => target_shift = c.expect_int()?,
                        "power_shift" => power_shift = c.expect_int()?,
                        "coeff" => coeff = c.expect_int()?,
                        other => {
                            return Err(err(lineno, c.col(), format!("unknown key `{other}`")))
                        }
                    }
                }
                mode = Some(DiscDecl::ShiftMap {
                    var_degree,
                    source_shift,
                    target_shift,
                    power_shift,
                    coeff,
                });
            }
            "source" | "target" => {
                let list = if head == "source" {
                    &mut source
                } else {
                    &mut target
                };
                loop {
                    let label = c.expect_int()?;
                    c.expect_sym(':')?;
                    let shift = c.expect_int()?;
                    list.push((label, shift));
                    if !c.eat_sym(',') {
                        break;
                    }
                }
            }
            other => return Err(err(lineno, 1, format!("unknown discriminant item `{other}`"))),
        }
    }
    match mode {
        Some(DiscDecl::Trace {
            var_degree,
            modulus,
            coeff,
            power_mult,
            power_off,
            arg_includes_var_power,
            ..
        }) => Ok(DiscDecl::Trace {
            var_degree,
            modulus,
            coeff,
            power_mult,
            power_off,
            arg_includes_var_power,
            source,
            target,
        }),
        Some(other) => Ok(other),
        None => Err(ScenarioError::Validation(
            "discriminant block needs `trace` or `shift_map`".into(),
        )),
    }
}

fn parse_expect(cur: &mut Cursor, lines: &mut Lines) -> Result<ExpectBlock, ScenarioError> {
    let what = cur.expect_ident()?;
    match what.as_str() {
        "page" => {
            let r = cur.expect_int()?;
            cur.expect_end()?;
            let mut patterns = vec![];
            let mut exhaustive = false;
            let mut compare_names = false;
            for (lineno, toks) in block_lines(lines)? {
                let mut c = Cursor::new(&toks, lineno);
                let head = c.expect_ident()?;
                match head.as_str() {
                    "exhaustive" => exhaustive = true,
                    "compare" => {
                        let w = c.expect_ident()?;
                        compare_names = w == "names";
                    }
                    "pattern" => patterns.push(parse_pattern(&mut c, true)?),
                    other => {
                        return Err(err(lineno, 1, format!("unknown expect item `{other}`")))
                    }
                }
            }
            Ok(ExpectBlock::Page {
                r,
                compare_names,
                patterns,
                exhaustive,
            })
        }
        "abutment" => {
            cur.expect_end()?;
            let mut patterns = vec![];
            let mut exhaustive = false;
            for (lineno, toks) in block_lines(lines)? {
                let mut c = Cursor::new(&toks, lineno);
                let head = c.expect_ident()?;
                match head.as_str() {
                    "exhaustive" => exhaustive = true,
                    "pattern" => patterns.push(parse_pattern(&mut c, false)?),
                    other => {
                        return Err(err(lineno, 1, format!("unknown expect item `{other}`")))
                    }
                }
            }
            Ok(ExpectBlock::Abutment {
                patterns,
                exhaustive,
            })
        }
        "degrees" => {
            cur.expect_end()?;
            let mut entries = vec![];
            let mut default_zero = false;
            for (lineno, toks) in block_lines(lines)? {
                let mut c = Cursor::new(&toks, lineno);
                let head = c.expect_ident()?;
                match head.as_str() {
                    "at" => {
                        let d = c.expect_int()?;
                        c.expect_sym(':')?;
                        if c.eat_ident("ambiguous") {
                            c.expect_sym('{')?;
                            let mut cands = vec![];
                            loop {
                                cands.push(parse_shape(&mut c)?);
                                if !c.eat_sym(',') {
                                    break;
                                }
                            }
                            c.expect_sym('}')?;
                            entries.push((d, ExpectedShape::Ambiguous(cands)));
                        } else {
                            entries.push((d, ExpectedShape::Exact(parse_shape(&mut c)?)));
                        }
                    }
                    "default" => {
                        if c.peek() == Some(&Tok::Int(0)) {
                            c.pos += 1;
                            default_zero = true;
                        }
                    }
                    other => {
                        return Err(err(lineno, 1, format!("unknown expect item `{other}`")))
                    }
                }
            }
            Ok(ExpectBlock::Degrees {
                entries,
                default_zero,
            })
        }
        "verdicts" => {
            cur.expect_end()?;
            let mut nontrivial = vec![];
            let mut trivial = vec![];
            for (lineno, toks) in block_lines(lines)? {
                let mut c = Cursor::new(&toks, lineno);
                let head = c.expect_ident()?;
                let list = match head.as_str() {
                    "nontrivial" => &mut nontrivial,
                    "trivial" => &mut trivial,
                    other => {
                        return Err(err(lineno, 1, format!("unknown verdict list `{other}`")))
                    }
                };
                while !c.at_end() {
                    list.push(c.expect_int()? as u64);
                }
            }
            Ok(ExpectBlock::Verdicts {
                nontrivial,
                trivial,
            })
        }
        other => Err(err(cur.line, 1, format!("unknown expect block `{other}`"))),
    }
}

/// `name(params): bidegree (nf, mf) [where ...] rank k [torsion d ...]
///  [names "tmpl"]`, or with `degree mf` for abutment patterns.
fn parse_pattern(c: &mut Cursor, bigraded: bool) -> Result<ExpectPattern, ScenarioError> {
    let name = c.expect_ident()?;
    let mut params = vec![];
    if c.eat_sym('(') {
        loop {
            params.push(c.expect_ident()?);
            if !c.eat_sym(',') {
                break;
            }
        }
        c.expect_sym(')')?;
    }
    c.expect_sym(':')?;
    let (n_form, m_form) = if bigraded {
        if !c.eat_ident("bidegree") {
            return Err(err(c.line, c.col(), "expected `bidegree`"));
        }
        c.expect_sym('(')?;
        let nf = sympoly_to_linform(&parse_sympoly(c)?, &params, c.line)?;
        c.expect_sym(',')?;
        let mf = sympoly_to_linform(&parse_sympoly(c)?, &params, c.line)?;
        c.expect_sym(')')?;
        (Some(nf), mf)
    } else {
        if !c.eat_ident("degree") {
            return Err(err(c.line, c.col(), "expected `degree`"));
        }
        let mf = sympoly_to_linform(&parse_sympoly(c)?, &params, c.line)?;
        (None, mf)
    };
    let constraints = if c.eat_ident("where") {
        parse_constraints(c, &params)?
    } else {
        vec![]
    };
    let mut free = 0usize;
    let mut torsion = vec![];
    let mut name_template = None;
    while !c.at_end() {
        let key = c.expect_ident()?;
        match key.as_str() {
            "rank" => free = c.expect_int()? as usize,
            "torsion" => {
                while matches!(c.peek(), Some(Tok::Int(_))) {
                    torsion.push(Int::from(c.expect_int()?));
                }
            }
            "names" => name_template = Some(c.expect_str()?),
            other => return Err(err(c.line, c.col(), format!("unknown pattern key `{other}`"))),
        }
    }
    torsion.sort();
    Ok(ExpectPattern {
        name,
        params,
        n_form,
        m_form,
        constraints,
        shape: FgAbelianShape::new(free, torsion),
        name_template,
    })
}

/// Structural validation: every referenced name must be declared,
/// windows nonempty (enforced by construction) and kinds consistent.
pub fn validate(s: &Scenario) -> Result<(), ScenarioError> {
    let module_names: Vec<&str> = s.modules.iter().map(|m| m.name.as_str()).collect();
    for m in &s.modules {
        if !matches!(m.body, ModuleBody::Ranks(_)) {
            if s.algebra(&m.over).is_none() {
                return Err(ScenarioError::Validation(format!(
                    "module `{}` references unknown algebra `{}`",
                    m.name, m.over
                )));
            }
        }
        match &m.body {
            ModuleBody::Quotient { rules } => {
                let alg = s.algebra(&m.over).unwrap();
                for (g, _, rhs) in rules {
                    check_gen(alg, g, &m.name)?;
                    for (_, mono) in &rhs.terms {
                        for (g, _) in mono {
                            check_gen(alg, g, &m.name)?;
                        }
                    }
                }
            }
            ModuleBody::Families { families, actions } => {
                let alg = s.algebra(&m.over).unwrap();
                for a in actions {
                    check_gen(alg, &a.gen, &m.name)?;
                    if !families.iter().any(|f| f.name == a.family) {
                        return Err(ScenarioError::Validation(format!(
                            "action references unknown family `{}`",
                            a.family
                        )));
                    }
                    if let Some((_, tf, _)) = &a.value {
                        if !families.iter().any(|f| &f.name == tf) {
                            return Err(ScenarioError::Validation(format!(
                                "action targets unknown family `{tf}`"
                            )));
                        }
                    }
                }
            }
            ModuleBody::Sum(parts) => {
                for p in parts {
                    if !module_names.contains(&p.as_str()) {
                        return Err(ScenarioError::Validation(format!(
                            "sum module `{}` references unknown summand `{p}`",
                            m.name
                        )));
                    }
                }
            }
            ModuleBody::Ranks(_) => {}
        }
    }
    for r in &s.resolutions {
        let alg = s.algebra(&r.over).ok_or_else(|| {
            ScenarioError::Validation(format!(
                "resolution `{}` references unknown algebra `{}`",
                r.name, r.over
            ))
        })?;
        if s.module(&r.of).is_none() {
            return Err(ScenarioError::Validation(format!(
                "resolution `{}` resolves unknown module `{}`",
                r.name, r.of
            )));
        }
        for (_, p) in &r.stages {
            for (_, mono) in &p.terms {
                for (g, _) in mono {
                    check_gen(alg, g, &r.name)?;
                }
            }
        }
    }
    if let Some(t) = &s.tor {
        if s.resolution(&t.resolution).is_none() {
            return Err(ScenarioError::Validation(format!(
                "tor block references unknown resolution `{}`",
                t.resolution
            )));
        }
        if s.module(&t.coefficients).is_none() {
            return Err(ScenarioError::Validation(format!(
                "tor block references unknown coefficient module `{}`",
                t.coefficients
            )));
        }
    }
    if let Some(t) = &s.tate {
        if s.module(&t.module).is_none() {
            return Err(ScenarioError::Validation(format!(
                "tate block references unknown module `{}`",
                t.module
            )));
        }
    }
    for page in &s.pages {
        for (fname, mono) in &page.factors {
            for (g, _) in mono {
                if !page.ambient.iter().any(|a| &a.name == g) {
                    return Err(ScenarioError::Validation(format!(
                        "factor `{fname}` uses undeclared generator `{g}`"
                    )));
                }
            }
        }
        for fam in &page.families {
            for (f, _) in &fam.powers {
                if !page.factors.iter().any(|(n, _)| n == f) {
                    return Err(ScenarioError::Validation(format!(
                        "family `{}` uses undeclared factor `{f}`",
                        fam.name
                    )));
                }
            }
        }
    }
    for d in &s.diffs {
        // differential rules must reference a declared page's factors or
        // families at the matching index (checked when resolved; here we
        // only require that some page exists for page-based kinds)
        if s.pages.is_empty()
            && matches!(s.kind, Kind::TateCyclic | Kind::TateSigma3 | Kind::TorThh)
            && d.r > 0
        {
            return Err(ScenarioError::Validation(
                "differential declared without any page".into(),
            ));
        }
    }
    Ok(())
}

fn check_gen(alg: &AlgebraDecl, g: &str, ctx: &str) -> Result<(), ScenarioError> {
    if alg.gens.iter().any(|d| d.name == g) {
        Ok(())
    } else {
        Err(ScenarioError::Validation(format!(
            "`{ctx}` references undeclared generator `{g}`"
        )))
    }
}
