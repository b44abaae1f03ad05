use super::algebra::{ExpBounds, Monomial, Poly, PresentedGradedAlgebra};
use super::family::{enumerate_params, Constraint, LinForm};
use super::{GradedError, Window};
use crate::base::{Matrix, Rat};
use num::{One, Zero};
use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};

/// A generator of a free module, a shifted copy of the algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeGen {
    pub name: String,
    /// Internal-degree shift of this summand.
    pub shift: i64,
}

/// A closed-form basis family: instances are named tuples of integers,
/// each sitting in an affine degree.
#[derive(Debug, Clone)]
pub struct BasisFamily {
    pub name: String,
    pub nparams: usize,
    pub degree: LinForm,
    pub constraints: Vec<Constraint>,
}

/// Action of one algebra generator on one family:
/// `gen * fam(params) = coeff(params) * fam(target(params))` under a guard,
/// zero outside the guard.
#[derive(Debug, Clone)]
pub struct ActionRule {
    pub gen: usize,
    pub family: usize,
    pub guard: Vec<Constraint>,
    pub coeff: LinForm,
    pub target_family: usize,
    pub target_params: Vec<LinForm>,
}

#[derive(Debug, Clone)]
pub enum Presentation {
    /// The algebra modulo extra principal-power module rules
    /// (`r -> 0`, `lambda2 -> lambda1`, ...): basis = surviving monomials.
    Quotient {
        rules: Vec<(usize, i64, Poly)>,
    },
    /// Free module on shifted generators.
    Free { gens: Vec<FreeGen> },
    /// Closed-form basis families with per-generator action rules.
    Rule {
        families: Vec<BasisFamily>,
        actions: Vec<ActionRule>,
    },
    /// Concatenation of summands.
    Sum(Vec<DegreewiseModule>),
}

/// A named basis element of one graded piece.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum BasisElem {
    Mono(Monomial),
    FreeGen { gen: usize, mono: Monomial },
    Fam { family: usize, params: Vec<i64> },
    Part { part: usize, inner: Box<BasisElem> },
}

struct DegreeData {
    basis: Vec<BasisElem>,
    index: BTreeMap<BasisElem, usize>,
}

/// A graded module with finite free pieces per degree inside a window.
///
/// Immutable after construction; per-degree bases are memoized behind a
/// lock so concurrent readers stay deterministic.
pub struct DegreewiseModule {
    pub algebra: PresentedGradedAlgebra,
    pub presentation: Presentation,
    pub window: Window,
    /// Extra exponent bounds for enumeration (invertible generators).
    pub bounds: ExpBounds,
    /// Quotient modules reuse the algebra with module rules appended.
    quotient_algebra: Option<PresentedGradedAlgebra>,
    memo: RwLock<BTreeMap<i64, Arc<DegreeData>>>,
}

impl Clone for DegreewiseModule {
    fn clone(&self) -> Self {
        DegreewiseModule {
            algebra: self.algebra.clone(),
            presentation: self.presentation.clone(),
            window: self.window,
            bounds: self.bounds.clone(),
            quotient_algebra: self.quotient_algebra.clone(),
            memo: RwLock::new(BTreeMap::new()),
        }
    }
}

impl std::fmt::Debug for DegreewiseModule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "DegreewiseModule(window [{}, {}])", self.window.lo, self.window.hi)
    }
}

impl DegreewiseModule {
    pub fn new(
        algebra: PresentedGradedAlgebra,
        presentation: Presentation,
        window: Window,
        bounds: ExpBounds,
    ) -> Result<Self, GradedError> {
        let quotient_algebra = match &presentation {
            Presentation::Quotient { rules } => {
                Some(combine_quotient_rules(&algebra, rules)?)
            }
            _ => None,
        };
        Ok(DegreewiseModule {
            algebra,
            presentation,
            window,
            bounds,
            quotient_algebra,
            memo: RwLock::new(BTreeMap::new()),
        })
    }

    /// The algebra as a module over itself.
    pub fn regular(
        algebra: PresentedGradedAlgebra,
        window: Window,
        bounds: ExpBounds,
    ) -> Result<Self, GradedError> {
        DegreewiseModule::new(
            algebra,
            Presentation::Quotient { rules: vec![] },
            window,
            bounds,
        )
    }

    pub fn quotient(
        algebra: PresentedGradedAlgebra,
        rules: Vec<(usize, i64, Poly)>,
        window: Window,
        bounds: ExpBounds,
    ) -> Result<Self, GradedError> {
        DegreewiseModule::new(algebra, Presentation::Quotient { rules }, window, bounds)
    }

    pub fn base(&self) -> crate::base::BaseRing {
        self.algebra.base()
    }

    fn check_window(&self, d: i64) -> Result<(), GradedError> {
        if self.window.contains(d) {
            Ok(())
        } else {
            Err(GradedError::OutsideWindow(d, self.window.lo, self.window.hi))
        }
    }

    fn degree_data(&self, d: i64) -> Result<Arc<DegreeData>, GradedError> {
        self.check_window(d)?;
        if let Some(hit) = self.memo.read().unwrap().get(&d) {
            return Ok(hit.clone());
        }
        let basis = self.compute_basis(d)?;
        let index = basis
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, b)| (b, i))
            .collect();
        let data = Arc::new(DegreeData { basis, index });
        self.memo.write().unwrap().insert(d, data.clone());
        Ok(data)
    }

    fn compute_basis(&self, d: i64) -> Result<Vec<BasisElem>, GradedError> {
        match &self.presentation {
            Presentation::Quotient { .. } => {
                let alg = self.quotient_algebra.as_ref().unwrap();
                Ok(alg
                    .monomial_basis(d, &self.bounds)?
                    .into_iter()
                    .map(BasisElem::Mono)
                    .collect())
            }
            Presentation::Free { gens } => {
                let mut out = vec![];
                for (gi, g) in gens.iter().enumerate() {
                    for mono in self.algebra.monomial_basis(d - g.shift, &self.bounds)? {
                        out.push(BasisElem::FreeGen { gen: gi, mono });
                    }
                }
                Ok(out)
            }
            Presentation::Rule { families, .. } => {
                let mut out = vec![];
                for (fi, fam) in families.iter().enumerate() {
                    let sols = enumerate_params(
                        fam.nparams,
                        &[(fam.degree.clone(), crate::base::rat(d))],
                        &fam.constraints,
                    )?;
                    for params in sols {
                        out.push(BasisElem::Fam { family: fi, params });
                    }
                }
                Ok(out)
            }
            Presentation::Sum(parts) => {
                let mut out = vec![];
                for (pi, part) in parts.iter().enumerate() {
                    for inner in part.basis(d)? {
                        out.push(BasisElem::Part {
                            part: pi,
                            inner: Box::new(inner),
                        });
                    }
                }
                Ok(out)
            }
        }
    }

    /// Ordered basis of the degree-`d` piece.
    pub fn basis(&self, d: i64) -> Result<Vec<BasisElem>, GradedError> {
        Ok(self.degree_data(d)?.basis.clone())
    }

    pub fn dim(&self, d: i64) -> Result<usize, GradedError> {
        Ok(self.degree_data(d)?.basis.len())
    }

    /// Matrix of multiplication by one algebra generator from degree `d`.
    pub fn gen_action(&self, gen: usize, d: i64) -> Result<Matrix, GradedError> {
        let gdeg = self.algebra.gens()[gen].degree.m;
        let src = self.degree_data(d)?;
        let dst = self.degree_data(d + gdeg)?;
        let ring = self.base();
        let mut mat = Matrix::zero(ring, dst.basis.len(), src.basis.len());
        for (j, b) in src.basis.iter().enumerate() {
            for (target, coeff) in self.apply_gen(gen, b)? {
                if let Some(&i) = dst.index.get(&target) {
                    let v = mat.get(i, j) + &coeff;
                    mat.set(i, j, v);
                } else if !coeff.is_zero() {
                    // target escaped the enumerated basis: only legal when a
                    // windowed exponent fell off the edge; treated as zero by
                    // the caller via partiality flags upstream.
                    return Err(GradedError::OutsideWindow(
                        d + gdeg,
                        self.window.lo,
                        self.window.hi,
                    ));
                }
            }
        }
        Ok(mat)
    }

    fn apply_gen(&self, gen: usize, b: &BasisElem) -> Result<Vec<(BasisElem, Rat)>, GradedError> {
        match (&self.presentation, b) {
            (Presentation::Quotient { .. }, BasisElem::Mono(mono)) => {
                let alg = self.quotient_algebra.as_ref().unwrap();
                let prod = alg.mul(
                    &Poly::monomial(mono.clone(), Rat::one()),
                    &alg.gen_poly(gen),
                );
                Ok(prod
                    .terms
                    .into_iter()
                    .map(|(m, c)| (BasisElem::Mono(m), c))
                    .collect())
            }
            (Presentation::Free { .. }, BasisElem::FreeGen { gen: gi, mono }) => {
                let prod = self.algebra.mul(
                    &Poly::monomial(mono.clone(), Rat::one()),
                    &self.algebra.gen_poly(gen),
                );
                Ok(prod
                    .terms
                    .into_iter()
                    .map(|(m, c)| (BasisElem::FreeGen { gen: *gi, mono: m }, c))
                    .collect())
            }
            (Presentation::Rule { actions, .. }, BasisElem::Fam { family, params }) => {
                for rule in actions {
                    if rule.gen != gen || rule.family != *family {
                        continue;
                    }
                    if !rule.guard.iter().all(|c| c.holds(params)) {
                        continue;
                    }
                    let coeff = self.base().normalize(rule.coeff.eval(params));
                    if coeff.is_zero() {
                        return Ok(vec![]);
                    }
                    let target: Option<Vec<i64>> = rule
                        .target_params
                        .iter()
                        .map(|f| f.eval_int(params))
                        .collect();
                    let Some(target) = target else {
                        return Err(GradedError::NotHomogeneous);
                    };
                    return Ok(vec![(
                        BasisElem::Fam {
                            family: rule.target_family,
                            params: target,
                        },
                        coeff,
                    )]);
                }
                // no matching rule: the generator acts by zero
                Ok(vec![])
            }
            (Presentation::Sum(parts), BasisElem::Part { part, inner }) => {
                let hits = parts[*part].apply_gen(gen, inner)?;
                Ok(hits
                    .into_iter()
                    .map(|(b, c)| {
                        (
                            BasisElem::Part {
                                part: *part,
                                inner: Box::new(b),
                            },
                            c,
                        )
                    })
                    .collect())
            }
            _ => unreachable!("basis element does not match presentation"),
        }
    }

    /// Matrix of multiplication by a homogeneous element from degree `d`.
    pub fn elem_action(&self, elem: &Poly, d: i64) -> Result<Matrix, GradedError> {
        let deg = self
            .algebra
            .degree_of(elem)
            .ok_or(GradedError::NotHomogeneous)?;
        let src = self.degree_data(d)?;
        let dst = self.degree_data(d + deg.m)?;
        let ring = self.base();
        let mut acc = Matrix::zero(ring, dst.basis.len(), src.basis.len());
        for (mono, coeff) in &elem.terms {
            let mut cur = Matrix::identity(ring, src.basis.len());
            let mut cur_deg = d;
            for (gi, &e) in mono.iter().enumerate() {
                if e < 0 {
                    return Err(GradedError::NegativeActionExponent);
                }
                for _ in 0..e {
                    let step = self.gen_action(gi, cur_deg)?;
                    cur = step.mul(&cur);
                    cur_deg += self.algebra.gens()[gi].degree.m;
                }
            }
            debug_assert_eq!(cur_deg, d + deg.m);
            acc = acc.add(&cur.scale(coeff));
        }
        Ok(acc)
    }

    /// Human-readable basis element name.
    pub fn name_of(&self, b: &BasisElem) -> String {
        match (&self.presentation, b) {
            (_, BasisElem::Mono(m)) => self.algebra.monomial_name(m),
            (Presentation::Free { gens }, BasisElem::FreeGen { gen, mono }) => {
                let mname = self.algebra.monomial_name(mono);
                if mname == "1" {
                    gens[*gen].name.clone()
                } else {
                    format!("{}*{}", gens[*gen].name, mname)
                }
            }
            (Presentation::Rule { families, .. }, BasisElem::Fam { family, params }) => {
                let ps: Vec<String> = params.iter().map(|p| p.to_string()).collect();
                format!("{}({})", families[*family].name, ps.join(","))
            }
            (Presentation::Sum(parts), BasisElem::Part { part, inner }) => {
                parts[*part].name_of(inner)
            }
            _ => unreachable!("basis element does not match presentation"),
        }
    }

    pub fn names(&self, d: i64) -> Result<Vec<String>, GradedError> {
        Ok(self.basis(d)?.iter().map(|b| self.name_of(b)).collect())
    }

    /// Spot-check that generator actions commute pairwise on random basis
    /// elements, a cheap stand-in for full associativity of the action.
    pub fn spot_check_action(&self, degrees: &[i64]) -> Result<(), GradedError> {
        let ngens = self.algebra.num_gens();
        for &d in degrees {
            if !self.window.contains(d) {
                continue;
            }
            for g1 in 0..ngens {
                for g2 in g1..ngens {
                    let d1 = self.algebra.gens()[g1].degree.m;
                    let d2 = self.algebra.gens()[g2].degree.m;
                    if !(self.window.contains(d + d1)
                        && self.window.contains(d + d2)
                        && self.window.contains(d + d1 + d2))
                    {
                        continue;
                    }
                    let a = self.gen_action(g2, d + d1)?.mul(&self.gen_action(g1, d)?);
                    let b = self.gen_action(g1, d + d2)?.mul(&self.gen_action(g2, d)?);
                    if a != b {
                        return Err(GradedError::InvalidRule(format!(
                            "actions of generators {g1} and {g2} do not commute at degree {d}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Merges module quotient rules into the algebra presentation. When a
/// generator carries both an algebra rule and a module rule, the lower
/// power wins and the higher-power rule must be a consequence of the
/// combined system (otherwise the presentation needs completion, which
/// is out of scope).
pub(crate) fn combine_quotient_rules(
    algebra: &PresentedGradedAlgebra,
    extra: &[(usize, i64, Poly)],
) -> Result<PresentedGradedAlgebra, GradedError> {
    let mut per_gen: BTreeMap<usize, Vec<(i64, Poly)>> = BTreeMap::new();
    for r in algebra.rules().iter().flatten() {
        per_gen
            .entry(r.gen)
            .or_default()
            .push((r.power, r.rhs.clone()));
    }
    for (g, p, rhs) in extra {
        per_gen.entry(*g).or_default().push((*p, rhs.clone()));
    }
    let mut kept = vec![];
    let mut dropped = vec![];
    for (g, mut rules) in per_gen {
        rules.sort_by_key(|(p, _)| *p);
        let (p, rhs) = rules.remove(0);
        kept.push((g, p, rhs));
        for (p, rhs) in rules {
            dropped.push((g, p, rhs));
        }
    }
    // Square-zero flags re-add implicit power-2 rules inside the
    // constructor; strip flags on generators that now carry an explicit
    // lower-power rule so the duplicate check stays meaningful.
    let mut gens = algebra.gens().to_vec();
    for (g, p, _) in &kept {
        if gens[*g].square_zero && *p < 2 {
            gens[*g].square_zero = false;
        }
    }
    let combined = PresentedGradedAlgebra::new(algebra.base(), gens, kept)?;
    for (g, p, rhs) in dropped {
        let mut lhs_mono = vec![0i64; combined.num_gens()];
        lhs_mono[g] = p;
        let lhs_nf = combined.normal_form(&Poly::monomial(lhs_mono, Rat::one()));
        let rhs_nf = combined.normal_form(&rhs);
        if lhs_nf != rhs_nf {
            return Err(GradedError::NonConfluentRules(format!(
                "{}^{p} has inequivalent reductions in the quotient",
                combined.gens()[g].name
            )));
        }
    }
    Ok(combined)
}

impl DegreewiseModule {
    /// The rewrite presentation realizing a `Quotient` module.
    pub fn quotient_algebra(&self) -> Option<&PresentedGradedAlgebra> {
        self.quotient_algebra.as_ref()
    }
}

/// A degreewise family of base matrices between two graded modules.
#[derive(Debug, Clone)]
pub struct GradedMap {
    /// Internal-degree shift: degree `d` of the source maps to `d + shift`.
    pub shift: i64,
    pub matrices: BTreeMap<i64, Matrix>,
}

impl GradedMap {
    pub fn new(shift: i64) -> Self {
        GradedMap {
            shift,
            matrices: BTreeMap::new(),
        }
    }

    pub fn at(&self, d: i64) -> Option<&Matrix> {
        self.matrices.get(&d)
    }

    /// Checks commutation with every generator action degreewise.
    pub fn check_equivariant(
        &self,
        source: &DegreewiseModule,
        target: &DegreewiseModule,
        window: Window,
    ) -> Result<(), GradedError> {
        for gi in 0..source.algebra.num_gens() {
            let gdeg = source.algebra.gens()[gi].degree.m;
            for d in window.iter() {
                let (Some(f_d), Some(f_dg)) = (self.at(d), self.at(d + gdeg)) else {
                    continue;
                };
                if !window.contains(d + gdeg) {
                    continue;
                }
                let lhs = f_dg.mul(&source.gen_action(gi, d)?);
                let rhs = target.gen_action(gi, d + self.shift)?.mul(f_d);
                if lhs != rhs {
                    return Err(GradedError::InvalidRule(format!(
                        "map does not commute with generator {gi} at degree {d}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::{rat, BaseRing};
    use crate::graded::GeneratorSpec;

    fn z3() -> BaseRing {
        BaseRing::p_local(3).unwrap()
    }

    /// Z(3)[a2, a4, r] / (r^3 + a2 r^2 + a4 r)
    pub(crate) fn tmf02_smash_algebra() -> PresentedGradedAlgebra {
        let gens = vec![
            GeneratorSpec::internal("a2", 4),
            GeneratorSpec::internal("a4", 8),
            GeneratorSpec::internal("r", 4),
        ];
        // r^3 -> -a2 r^2 - a4 r
        let mut rhs = Poly::zero();
        rhs.add_term(vec![1, 0, 2], rat(-1), z3());
        rhs.add_term(vec![0, 1, 1], rat(-1), z3());
        PresentedGradedAlgebra::new(z3(), gens, vec![(2, 3, rhs)]).unwrap()
    }

    /// The negative-degree part of pi_* Tmf_0(2): basis inv(n, m) in degree
    /// -4n - 8m - 1 for n, m >= 1, with the shift-down action.
    pub(crate) fn tmf02_negative_part(window: Window) -> DegreewiseModule {
        let alg = tmf02_smash_algebra();
        let families = vec![BasisFamily {
            name: "inv".into(),
            nparams: 2,
            degree: LinForm::from_i64(&[-4, -8], -1),
            constraints: vec![
                Constraint::ge0(LinForm::from_i64(&[1, 0], -1)),
                Constraint::ge0(LinForm::from_i64(&[0, 1], -1)),
            ],
        }];
        let actions = vec![
            ActionRule {
                gen: 0, // a2 . inv(n,m) = inv(n-1, m) if n >= 2
                family: 0,
                guard: vec![Constraint::ge0(LinForm::from_i64(&[1, 0], -2))],
                coeff: LinForm::constant(2, rat(1)),
                target_family: 0,
                target_params: vec![LinForm::from_i64(&[1, 0], -1), LinForm::from_i64(&[0, 1], 0)],
            },
            ActionRule {
                gen: 1, // a4 . inv(n,m) = inv(n, m-1) if m >= 2
                family: 0,
                guard: vec![Constraint::ge0(LinForm::from_i64(&[0, 1], -2))],
                coeff: LinForm::constant(2, rat(1)),
                target_family: 0,
                target_params: vec![LinForm::from_i64(&[1, 0], 0), LinForm::from_i64(&[0, 1], -1)],
            },
        ];
        DegreewiseModule::new(
            alg,
            Presentation::Rule { families, actions },
            window,
            ExpBounds::none(),
        )
        .unwrap()
    }

    #[test]
    fn quotient_basis_matches_hand_count() {
        // Z(3)[a2,a4,r]/I in degree 4: {a2, r}; degree 8: 4 monomials.
        let alg = tmf02_smash_algebra();
        let m = DegreewiseModule::regular(alg, Window::new(0, 60), ExpBounds::none()).unwrap();
        assert_eq!(m.names(4).unwrap(), vec!["a2", "r"]);
        assert_eq!(
            m.names(8).unwrap(),
            vec!["a2^2", "a2*r", "a4", "r^2"]
        );
    }

    #[test]
    fn rule_module_degree_basis() {
        let m = tmf02_negative_part(Window::new(-60, -1));
        assert_eq!(m.names(-13).unwrap(), vec!["inv(1,1)"]);
        assert_eq!(m.names(-14).unwrap(), Vec::<String>::new());
        // degree -29: -4n-8m-1 = -29 => n + 2m = 7 => (5,1), (3,2), (1,3)
        assert_eq!(m.dim(-29).unwrap(), 3);
    }

    #[test]
    fn rule_module_action_examples() {
        let m = tmf02_negative_part(Window::new(-60, -1));
        // a2 at degree -17 sends inv(2,1) to inv(1,1)
        let act = m.gen_action(0, -17).unwrap();
        assert_eq!((act.rows, act.cols), (1, 1));
        assert_eq!(act.get(0, 0), &rat(1));
        // a4 at degree -13 is zero on inv(1,1)
        let act = m.gen_action(1, -13).unwrap();
        assert!(act.is_zero());
    }

    #[test]
    fn defining_relation_acts_as_zero() {
        let alg = tmf02_smash_algebra();
        let m = DegreewiseModule::regular(alg.clone(), Window::new(0, 60), ExpBounds::none())
            .unwrap();
        // r^3 + a2 r^2 + a4 r
        let mut rel = Poly::zero();
        rel.add_term(vec![0, 0, 3], rat(1), z3());
        rel.add_term(vec![1, 0, 2], rat(1), z3());
        rel.add_term(vec![0, 1, 1], rat(1), z3());
        for d in [0, 4, 8, 12, 16] {
            assert!(m.elem_action(&rel, d).unwrap().is_zero());
        }
    }

    #[test]
    fn action_spot_check_passes() {
        let m = tmf02_negative_part(Window::new(-60, -1));
        m.spot_check_action(&[-13, -17, -21, -29, -33]).unwrap();
    }
}
