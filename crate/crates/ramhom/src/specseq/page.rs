use crate::base::{rat, BaseRing, Rat};
use crate::graded::family::{enumerate_params, Constraint, LinForm};
use crate::graded::{Bidegree, Window};
use num::Zero;
use std::collections::BTreeMap;
use std::fmt;

use super::SpecseqError;

/// One multiplicative generator of the ambient bigraded ring of a page.
#[derive(Debug, Clone)]
pub struct AmbientGen {
    pub name: String,
    pub degree: Bidegree,
    /// Z/2 bookkeeping weight.
    pub weight: u8,
    /// Exponent window; `None` means natural-number exponents.
    pub range: Option<(i64, i64)>,
    pub square_zero: bool,
}

/// A named even-weight monomial in the ambient generators; families are
/// products of factor powers, and differentials are declared on factors.
#[derive(Debug, Clone)]
pub struct Factor {
    pub name: String,
    pub exponents: Vec<i64>,
}

/// An indexed basis family: `name(params) = prod_j factor_j^{power_j}`,
/// powers affine in the parameters, inside linear support constraints.
#[derive(Debug, Clone)]
pub struct PageFamily {
    pub name: String,
    pub params: Vec<String>,
    /// `(factor index, exponent form)`
    pub factor_powers: Vec<(usize, LinForm)>,
    pub constraints: Vec<Constraint>,
}

/// A spectral-sequence page presented by indexed monomial families.
///
/// Per-bidegree enumerations are memoized; clones share the memo, which
/// is sound because pages are immutable once built.
#[derive(Debug, Clone, Default)]
pub struct EnumCache(
    std::sync::Arc<std::sync::RwLock<BTreeMap<(i64, i64, Vec<i64>), Vec<Instance>>>>,
);

#[derive(Debug, Clone)]
pub struct FamilyPage {
    pub index: i64,
    pub coeff: BaseRing,
    pub ambient: Vec<AmbientGen>,
    pub factors: Vec<Factor>,
    pub families: Vec<PageFamily>,
    pub cache: EnumCache,
}

/// One enumerated basis class.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Instance {
    pub family: usize,
    pub params: Vec<i64>,
}

impl Instance {
    pub fn name(&self, page: &FamilyPage) -> String {
        let ps: Vec<String> = self.params.iter().map(|p| p.to_string()).collect();
        format!("{}({})", page.families[self.family].name, ps.join(","))
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ps: Vec<String> = self.params.iter().map(|p| p.to_string()).collect();
        write!(f, "#{}({})", self.family, ps.join(","))
    }
}

impl FamilyPage {
    pub fn num_gens(&self) -> usize {
        self.ambient.len()
    }

    pub fn factor_degree(&self, f: usize) -> Bidegree {
        let mut d = Bidegree::new(0, 0);
        for (g, &e) in self.ambient.iter().zip(&self.factors[f].exponents) {
            d = d.plus(g.degree.times(e));
        }
        d
    }

    /// Ambient exponent vector of an instance.
    pub fn instance_exponents(&self, inst: &Instance) -> Result<Vec<i64>, SpecseqError> {
        let fam = &self.families[inst.family];
        let mut exps = vec![0i64; self.num_gens()];
        for (fi, form) in &fam.factor_powers {
            let e = form
                .eval_int(&inst.params)
                .ok_or_else(|| SpecseqError::NonIntegralIndex(inst.name(self)))?;
            for (g, &fe) in self.factors[*fi].exponents.iter().enumerate() {
                exps[g] += fe * e;
            }
        }
        Ok(exps)
    }

    pub fn exponents_degree(&self, exps: &[i64]) -> Bidegree {
        let mut d = Bidegree::new(0, 0);
        for (g, &e) in self.ambient.iter().zip(exps) {
            d = d.plus(g.degree.times(e));
        }
        d
    }

    pub fn instance_degree(&self, inst: &Instance) -> Result<Bidegree, SpecseqError> {
        Ok(self.exponents_degree(&self.instance_exponents(inst)?))
    }

    /// Monomial name of an instance in ambient generators, optionally
    /// skipping some generators (used to match Tate-table class names
    /// where the filtration letter is implicit in the column).
    pub fn instance_monomial_name(
        &self,
        inst: &Instance,
        skip: &[usize],
    ) -> Result<String, SpecseqError> {
        let exps = self.instance_exponents(inst)?;
        let mut parts = vec![];
        for (g, &e) in exps.iter().enumerate() {
            if e == 0 || skip.contains(&g) {
                continue;
            }
            if e == 1 {
                parts.push(self.ambient[g].name.clone());
            } else {
                parts.push(format!("{}^{}", self.ambient[g].name, e));
            }
        }
        Ok(if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        })
    }

    /// The bidegree of an instance as two affine forms in the parameters.
    fn degree_forms(&self, family: usize) -> (LinForm, LinForm) {
        let fam = &self.families[family];
        let np = fam.params.len();
        let mut n_form = LinForm::constant(np, Rat::zero());
        let mut m_form = LinForm::constant(np, Rat::zero());
        for (fi, form) in &fam.factor_powers {
            let d = self.factor_degree(*fi);
            n_form = n_form.add(&form.scale(&rat(d.n)));
            m_form = m_form.add(&form.scale(&rat(d.m)));
        }
        (n_form, m_form)
    }

    /// Per-generator exponent forms of one family.
    fn exponent_forms(&self, family: usize) -> Vec<LinForm> {
        let fam = &self.families[family];
        let np = fam.params.len();
        let mut forms = vec![LinForm::constant(np, Rat::zero()); self.num_gens()];
        for (fi, form) in &fam.factor_powers {
            for (g, &fe) in self.factors[*fi].exponents.iter().enumerate() {
                if fe != 0 {
                    forms[g] = forms[g].add(&form.scale(&rat(fe)));
                }
            }
        }
        forms
    }

    /// Constraints from ambient exponent ranges (plus naturality for
    /// unranged generators), with ranges widened by `pad` per generator.
    fn range_constraints(&self, family: usize, pad: &[i64]) -> Vec<Constraint> {
        let forms = self.exponent_forms(family);
        let mut out = vec![];
        for (g, form) in forms.iter().enumerate() {
            if form.is_constant() {
                continue;
            }
            let p = pad.get(g).copied().unwrap_or(0);
            match self.ambient[g].range {
                Some((lo, hi)) => {
                    let mut upper = form.scale(&rat(-1));
                    upper.konst += rat(hi + p);
                    out.push(Constraint::ge0(upper)); // e <= hi + pad
                    let mut lower = form.clone();
                    lower.konst -= rat(lo - p);
                    out.push(Constraint::ge0(lower)); // e >= lo - pad
                }
                None => {
                    out.push(Constraint::ge0(form.clone())); // e >= 0
                }
            }
        }
        out
    }

    /// All instances at one bidegree, deterministically ordered by
    /// family then lexicographic parameters. `pad` widens every ranged
    /// exponent window (used for clipping detection).
    pub fn instances_at(
        &self,
        degree: Bidegree,
        pad: &[i64],
    ) -> Result<Vec<Instance>, SpecseqError> {
        let key = (degree.n, degree.m, pad.to_vec());
        if let Some(hit) = self.cache.0.read().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let mut out = vec![];
        for f in 0..self.families.len() {
            let fam = &self.families[f];
            let (n_form, m_form) = self.degree_forms(f);
            let mut cons = fam.constraints.clone();
            cons.extend(self.range_constraints(f, pad));
            let eqs = vec![(n_form, rat(degree.n)), (m_form, rat(degree.m))];
            let sols = enumerate_params(fam.params.len(), &eqs, &cons)
                .map_err(SpecseqError::Family)?;
            for params in sols {
                out.push(Instance { family: f, params });
            }
        }
        self.cache.0.write().unwrap().insert(key, out.clone());
        Ok(out)
    }

    /// Looks up the instance with given ambient exponents at a bidegree
    /// basis, assuming families are exponent-injective.
    pub fn find_by_exponents(
        &self,
        basis: &[Instance],
        exps: &[i64],
    ) -> Result<Option<usize>, SpecseqError> {
        for (i, inst) in basis.iter().enumerate() {
            if self.instance_exponents(inst)? == exps {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// Does any instance at this bidegree touch a (padded) range edge?
    /// Compares the enumeration against one with ranges widened by `pad`;
    /// a count difference means the window clipped this slot.
    pub fn clipped_at(&self, degree: Bidegree, pad: &[i64]) -> Result<bool, SpecseqError> {
        let zero_pad = vec![0i64; self.num_gens()];
        let tight = self.instances_at(degree, &zero_pad)?;
        let wide = self.instances_at(degree, pad)?;
        Ok(tight.len() != wide.len())
    }

    /// Total instances over a bidegree rectangle (for sanity checks).
    pub fn grid_instances(
        &self,
        n_window: Window,
        m_window: Window,
    ) -> Result<BTreeMap<(i64, i64), Vec<Instance>>, SpecseqError> {
        let mut out = BTreeMap::new();
        let zero_pad = vec![0i64; self.num_gens()];
        for n in n_window.iter() {
            for m in m_window.iter() {
                let basis = self.instances_at(Bidegree::new(n, m), &zero_pad)?;
                if !basis.is_empty() {
                    out.insert((n, m), basis);
                }
            }
        }
        Ok(out)
    }
}
