use super::page::{FamilyPage, Instance};
use super::SpecseqError;
use crate::base::{BaseRing, Rat};
use crate::graded::family::{Constraint, LinForm};
use crate::graded::Bidegree;
use num::Zero;

/// A formal sum of ambient monomials with base-ring coefficients.
#[derive(Debug, Clone, Default)]
pub struct PagePoly {
    pub terms: Vec<(Rat, Vec<i64>)>,
}

impl PagePoly {
    pub fn zero() -> Self {
        PagePoly::default()
    }

    pub fn monomial(coeff: Rat, exps: Vec<i64>) -> Self {
        PagePoly {
            terms: vec![(coeff, exps)],
        }
    }
}

/// One assignment of a differential.
#[derive(Debug, Clone)]
pub enum DiffRule {
    /// Value of `d` on a named factor, to be extended by the Leibniz rule.
    Factor { factor: usize, value: PagePoly },
    /// Closed-form rule on a family:
    /// `d(name(params)) = coeff(params) * target(target_params(params))`.
    Family {
        family: usize,
        guard: Vec<Constraint>,
        coeff: LinForm,
        target_family: usize,
        target_params: Vec<LinForm>,
    },
}

/// A page differential: the page index `r` fixes the bidegree `(-r, r-1)`.
#[derive(Debug, Clone)]
pub struct DifferentialSpec {
    pub r: i64,
    pub rules: Vec<DiffRule>,
}

impl DifferentialSpec {
    pub fn bidegree(&self) -> Bidegree {
        Bidegree::new(-self.r, self.r - 1)
    }

    fn factor_rules(&self) -> Vec<(usize, &PagePoly)> {
        self.rules
            .iter()
            .filter_map(|r| match r {
                DiffRule::Factor { factor, value } => Some((*factor, value)),
                _ => None,
            })
            .collect()
    }

    fn family_rules(&self, family: usize) -> Vec<&DiffRule> {
        self.rules
            .iter()
            .filter(|r| matches!(r, DiffRule::Family { family: f, .. } if *f == family))
            .collect()
    }

    /// Validates every factor rule against the differential bidegree.
    pub fn validate(&self, page: &FamilyPage) -> Result<(), SpecseqError> {
        let want = self.bidegree();
        for (f, value) in self.factor_rules() {
            let src = page.factor_degree(f);
            for (c, exps) in &value.terms {
                if c.is_zero() {
                    continue;
                }
                let got = page.exponents_degree(exps);
                if got != src.plus(want) {
                    return Err(SpecseqError::BidegreeMismatch(format!(
                        "d{}({}) lands in {} instead of {}",
                        self.r,
                        page.factors[f].name,
                        got,
                        src.plus(want)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Applies the differential to one instance, returning ambient-exponent
    /// targets with coefficients. Factor rules are extended by the graded
    /// Leibniz rule (signs from total degrees, square-zero kills applied);
    /// a direct family rule overrides the Leibniz extension for its family.
    pub fn apply(
        &self,
        page: &FamilyPage,
        inst: &Instance,
    ) -> Result<Vec<(Rat, Vec<i64>)>, SpecseqError> {
        let direct = self.family_rules(inst.family);
        if !direct.is_empty() {
            let mut out = vec![];
            for rule in direct {
                let DiffRule::Family {
                    guard,
                    coeff,
                    target_family,
                    target_params,
                    ..
                } = rule
                else {
                    unreachable!()
                };
                if !guard.iter().all(|c| c.holds(&inst.params)) {
                    continue;
                }
                let c = page.coeff.normalize(coeff.eval(&inst.params));
                if c.is_zero() {
                    continue;
                }
                let tp: Option<Vec<i64>> = target_params
                    .iter()
                    .map(|f| f.eval_int(&inst.params))
                    .collect();
                let Some(tp) = tp else {
                    return Err(SpecseqError::NonIntegralIndex(inst.name(page)));
                };
                let target = Instance {
                    family: *target_family,
                    params: tp,
                };
                out.push((c, page.instance_exponents(&target)?));
            }
            return Ok(out);
        }
        self.leibniz_apply(page, inst)
    }

    /// Leibniz extension over the family's factor decomposition.
    fn leibniz_apply(
        &self,
        page: &FamilyPage,
        inst: &Instance,
    ) -> Result<Vec<(Rat, Vec<i64>)>, SpecseqError> {
        let fam = &page.families[inst.family];
        let ring = page.coeff;
        let rules = self.factor_rules();
        let mut out: Vec<(Rat, Vec<i64>)> = vec![];
        // powers of each factor at this instance
        let powers: Vec<(usize, i64)> = fam
            .factor_powers
            .iter()
            .map(|(fi, form)| {
                form.eval_int(&inst.params)
                    .map(|e| (*fi, e))
                    .ok_or_else(|| SpecseqError::NonIntegralIndex(inst.name(page)))
            })
            .collect::<Result<_, _>>()?;
        for (j, &(fj, ej)) in powers.iter().enumerate() {
            if ej == 0 {
                continue;
            }
            let Some((_, value)) = rules.iter().find(|(f, _)| *f == fj) else {
                return Err(SpecseqError::MissingFactorRule(
                    page.factors[fj].name.clone(),
                ));
            };
            let fdeg = page.factor_degree(fj).total();
            // d(M^e): e * M^{e-1} d(M) for even |M|, (e mod 2) for odd |M|
            let mult: i64 = if fdeg.rem_euclid(2) == 0 {
                ej
            } else {
                ej.rem_euclid(2)
            };
            if ring.normalize(crate::base::rat(mult)).is_zero() {
                continue;
            }
            // Koszul sign from the factors to the left
            let mut prefix: i64 = 0;
            for &(fl, el) in &powers[..j] {
                prefix += el * page.factor_degree(fl).total();
            }
            let prefix_sign = if prefix.rem_euclid(2) == 1 { -1 } else { 1 };
            for (c, dexps) in &value.terms {
                if c.is_zero() {
                    continue;
                }
                // move d(M_j) (degree |M_j| - 1) past the suffix
                let mut suffix: i64 = 0;
                for &(fl, el) in &powers[j + 1..] {
                    suffix += el * page.factor_degree(fl).total();
                }
                let move_sign = if ((fdeg - 1) * suffix).rem_euclid(2) == 1 {
                    -1
                } else {
                    1
                };
                let coeff = ring.normalize(
                    crate::base::rat(mult * prefix_sign * move_sign) * c,
                );
                if coeff.is_zero() {
                    continue;
                }
                let mut exps = page.instance_exponents(inst)?;
                for (g, &fe) in page.factors[fj].exponents.iter().enumerate() {
                    exps[g] -= fe;
                }
                for (g, &de) in dexps.iter().enumerate() {
                    exps[g] += de;
                }
                // square-zero generators kill any exponent >= 2
                if exps
                    .iter()
                    .zip(&page.ambient)
                    .any(|(&e, g)| g.square_zero && e >= 2)
                {
                    continue;
                }
                merge_term(&mut out, coeff, exps, ring);
            }
        }
        Ok(out)
    }
}

fn merge_term(out: &mut Vec<(Rat, Vec<i64>)>, coeff: Rat, exps: Vec<i64>, ring: BaseRing) {
    for (c, e) in out.iter_mut() {
        if *e == exps {
            *c = ring.normalize(std::mem::take(c) + coeff);
            return;
        }
    }
    out.push((coeff, exps));
}

/// Outcome of locating a differential value in the target basis.
pub enum TargetHit {
    /// Column index and coefficient.
    Inside(usize, Rat),
    /// The value lies outside every family's support constraints.
    OutsideSupport(Vec<i64>),
    /// The value violates only an exponent window: boundary escape.
    Escaped(Vec<i64>),
}

/// Locates one `(coeff, exps)` differential value in the basis enumerated
/// at the target bidegree. Distinguishes window clipping from genuine
/// support violations by re-enumerating with widened windows.
pub fn locate_target(
    page: &FamilyPage,
    target_basis: &[Instance],
    coeff: Rat,
    exps: &[i64],
    pad: &[i64],
) -> Result<TargetHit, SpecseqError> {
    if let Some(idx) = page.find_by_exponents(target_basis, exps)? {
        return Ok(TargetHit::Inside(idx, coeff));
    }
    let deg = page.exponents_degree(exps);
    let wide = page.instances_at(deg, pad)?;
    for inst in &wide {
        if page.instance_exponents(inst)? == exps {
            return Ok(TargetHit::Escaped(exps.to_vec()));
        }
    }
    Ok(TargetHit::OutsideSupport(exps.to_vec()))
}

/// Cross-checks a closed-form family rule against the Leibniz extension
/// of the factor rules, instance by instance over the given degrees.
pub fn crosscheck_rules(
    page: &FamilyPage,
    factor_spec: &DifferentialSpec,
    family_spec: &DifferentialSpec,
    degrees: &[Bidegree],
) -> Result<(), SpecseqError> {
    let ring = page.coeff;
    let zero_pad = vec![0i64; page.num_gens()];
    for &degree in degrees {
        for inst in page.instances_at(degree, &zero_pad)? {
            if family_spec.family_rules(inst.family).is_empty() {
                continue; // this family carries no closed form to check
            }
            let mut a = factor_spec.leibniz_apply(page, &inst)?;
            let mut b = family_spec.apply(page, &inst)?;
            a.retain(|(c, _)| !ring.normalize(c.clone()).is_zero());
            b.retain(|(c, _)| !ring.normalize(c.clone()).is_zero());
            a.sort_by(|x, y| x.1.cmp(&y.1));
            b.sort_by(|x, y| x.1.cmp(&y.1));
            let norm = |v: Vec<(Rat, Vec<i64>)>| -> Vec<(Rat, Vec<i64>)> {
                v.into_iter()
                    .map(|(c, e)| (ring.normalize(c), e))
                    .collect()
            };
            let (a, b) = (norm(a), norm(b));
            if a != b {
                return Err(SpecseqError::RuleMismatch(format!(
                    "Leibniz and closed-form differentials disagree on {}",
                    inst.name(page)
                )));
            }
        }
    }
    Ok(())
}
