use super::table::{BigradedTable, TableEntry};
use super::HomalgError;
use crate::base::{
    homology_named, kernel_matrix, rank, solve, BaseRing, FgAbelianShape, HomologyClass, Matrix,
    Rat,
};
use crate::graded::{DegreewiseModule, GradedMap, Window};
use num::{One, Zero};
use std::collections::BTreeMap;

/// How the chosen generator of a cyclic group acts on a graded module.
#[derive(Debug, Clone)]
pub enum ActionKind {
    Trivial,
    /// The generator negates odd-weight monomials: `t(x) = (-1)^{w(x)} x`.
    SignByWeight,
    /// Explicit matrices per degree.
    Matrices(BTreeMap<i64, Matrix>),
}

/// A cyclic group of order `order` acting on a degreewise module.
pub struct CyclicAction {
    pub module: DegreewiseModule,
    pub order: u64,
    pub kind: ActionKind,
}

impl CyclicAction {
    pub fn generator_matrix(&self, d: i64) -> Result<Matrix, HomalgError> {
        let ring = self.module.base();
        let dim = self.module.dim(d)?;
        match &self.kind {
            ActionKind::Trivial => Ok(Matrix::identity(ring, dim)),
            ActionKind::SignByWeight => {
                let mut t = Matrix::zero(ring, dim, dim);
                for (i, b) in self.module.basis(d)?.iter().enumerate() {
                    let w = match b {
                        crate::graded::BasisElem::Mono(m) => self.module.algebra.monomial_weight(m),
                        _ => {
                            return Err(HomalgError::Internal(
                                "sign action needs a monomial basis".into(),
                            ))
                        }
                    };
                    t.set(i, i, if w % 2 == 1 { -Rat::one() } else { Rat::one() });
                }
                Ok(t)
            }
            ActionKind::Matrices(map) => map.get(&d).cloned().ok_or_else(|| {
                HomalgError::InsufficientWindow(format!("no action matrix at degree {d}"))
            }),
        }
    }

    /// The norm `N = 1 + t + ... + t^{k-1}` at degree `d`.
    pub fn norm_matrix(&self, d: i64) -> Result<Matrix, HomalgError> {
        let t = self.generator_matrix(d)?;
        let mut acc = Matrix::identity(t.ring, t.rows);
        let mut power = Matrix::identity(t.ring, t.rows);
        for _ in 1..self.order {
            power = t.mul(&power);
            acc = acc.add(&power);
        }
        Ok(acc)
    }

    /// Checks `t^order = id` degreewise.
    pub fn verify(&self, window: Window) -> Result<(), HomalgError> {
        for d in window.iter() {
            let t = self.generator_matrix(d)?;
            let mut power = Matrix::identity(t.ring, t.rows);
            for _ in 0..self.order {
                power = t.mul(&power);
            }
            if power != Matrix::identity(t.ring, t.rows) {
                return Err(HomalgError::NotExact(format!(
                    "generator matrix at degree {d} does not have order {}",
                    self.order
                )));
            }
        }
        Ok(())
    }
}

/// Tate cohomology of a cyclic group, two-periodic across columns:
/// even columns carry `M^G / N M`, odd columns `ker N / im(t - 1)`.
/// Entry `(n, m)` is `Hhat^{-n}(G; M_m)`.
pub fn tate_cyclic(
    action: &CyclicAction,
    m_window: Window,
    n_window: Window,
) -> Result<BigradedTable, HomalgError> {
    action.verify(m_window)?;
    let ring = action.module.base();
    let mut table = BigradedTable::new(ring, "tate-cyclic");
    for m in m_window.iter() {
        let dim = action.module.dim(m)?;
        if dim == 0 {
            continue;
        }
        let names = action.module.names(m)?;
        let t = action.generator_matrix(m)?;
        let norm = action.norm_matrix(m)?;
        let t_minus_1 = t.add(&Matrix::identity(ring, dim).scale(&-Rat::one()));
        let even = tate_slot(&t_minus_1, &norm, &names, m, "even");
        let odd = tate_slot(&norm, &t_minus_1, &names, m, "odd");
        for n in n_window.iter() {
            let entry = if n.rem_euclid(2) == 0 { &even } else { &odd };
            table.set(n, m, entry.clone());
        }
    }
    Ok(table)
}

fn tate_slot(
    d_out: &Matrix,
    d_in: &Matrix,
    names: &[String],
    m: i64,
    parity: &str,
) -> TableEntry {
    let (shape, classes) = homology_named(d_out, d_in);
    let carried = classes
        .iter()
        .map(|c| match c {
            HomologyClass::Ambient(idx, _) => names[*idx].clone(),
            HomologyClass::Synthetic(idx, _) => format!("t{parity};{m};{idx}"),
        })
        .collect();
    TableEntry::new(shape, carried)
}

/// Tate table of the symmetric group on three letters at `p = 3`, computed
/// as the fixed part of the cyclic 3-Sylow table under the action induced
/// by a transposition.
///
/// `weyl` must normalize the cyclic action (`w t = t^2 w` degreewise) and
/// square to the identity. Fixed parts are taken columnwise on the Tate
/// subquotients exactly as supplied; callers owning a twist on the
/// periodicity generator must fold it into `weyl` per column block.
pub fn tate_sigma3_via_sylow(
    action: &CyclicAction,
    weyl: &GradedMap,
    m_window: Window,
    n_window: Window,
) -> Result<BigradedTable, HomalgError> {
    if action.order != 3 {
        return Err(HomalgError::NotNormalizing(
            "the Sylow route needs a cyclic group of order 3".into(),
        ));
    }
    action.verify(m_window)?;
    let ring = action.module.base();
    let p = Rat::from_integer(3.into());
    let mut table = BigradedTable::new(ring, "tate-sigma3");
    for m in m_window.iter() {
        let dim = action.module.dim(m)?;
        if dim == 0 {
            continue;
        }
        let t = action.generator_matrix(m)?;
        let w = weyl
            .at(m)
            .ok_or_else(|| {
                HomalgError::InsufficientWindow(format!("no weyl matrix at degree {m}"))
            })?
            .clone();
        // w t = t^2 w and w^2 = 1
        if w.mul(&t) != t.mul(&t).mul(&w) {
            return Err(HomalgError::NotNormalizing(format!(
                "w t != t^2 w at degree {m}"
            )));
        }
        if w.mul(&w) != Matrix::identity(ring, dim) {
            return Err(HomalgError::NotNormalizing(format!(
                "w^2 != 1 at degree {m}"
            )));
        }
        let norm = action.norm_matrix(m)?;
        let t_minus_1 = t.add(&Matrix::identity(ring, dim).scale(&-Rat::one()));
        let even = fixed_rank(&t_minus_1, &norm, &w, ring)?;
        let odd = fixed_rank(&norm, &t_minus_1, &w, ring)?;
        for n in n_window.iter() {
            let r = if n.rem_euclid(2) == 0 { even } else { odd };
            let shape = if ring.is_field() {
                FgAbelianShape::free(r)
            } else {
                FgAbelianShape::new(0, vec![p.numer().clone(); r])
            };
            table.set(n, m, TableEntry::new(shape, vec![]));
        }
    }
    Ok(table)
}

/// Dimension over `F_3` of the fixed part of `w` acting on the Tate slot
/// `ker(d_out) / im(d_in)`. The slot is elementary 3-torsion, so after
/// expressing everything in kernel coordinates the computation reduces
/// mod 3: `dim = s - rank [w - 1 | boundaries]`.
fn fixed_rank(
    d_out: &Matrix,
    d_in: &Matrix,
    w: &Matrix,
    ring: BaseRing,
) -> Result<usize, HomalgError> {
    let k = kernel_matrix(d_out);
    let s = k.cols;
    if s == 0 {
        return Ok(0);
    }
    let x = solve(&k, d_in).map_err(|_| {
        HomalgError::Internal("boundaries do not lie in the Tate kernel".into())
    })?;
    let wk = solve(&k, &w.mul(&k)).map_err(|_| {
        HomalgError::Internal("weyl action does not preserve the Tate kernel".into())
    })?;
    let f3 = BaseRing::prime_field(3).unwrap();
    let wk_minus_1 = wk.add(&Matrix::identity(ring, s).scale(&-Rat::one()));
    // The slot is elementary 3-torsion: in kernel coordinates the
    // boundaries contain 3.Z^s, so the fixed part of the quotient has
    // dimension s - rank [w - 1 | boundaries] over F_3.
    let stacked = reduce_mod3(&wk_minus_1, f3)?.hstack(&reduce_mod3(&x, f3)?);
    Ok(s - rank(&stacked))
}

fn reduce_mod3(m: &Matrix, f3: BaseRing) -> Result<Matrix, HomalgError> {
    let mut out = Matrix::zero(f3, m.rows, m.cols);
    for i in 0..m.rows {
        for j in 0..m.cols {
            let v = m.get(i, j);
            if v.is_zero() {
                continue;
            }
            // numerator * denom^{-1} mod 3; denominators are prime to 3
            let denom = Rat::from_integer(v.denom().clone());
            if !f3.is_unit(&denom) && !denom.is_one() {
                return Err(HomalgError::Internal(
                    "denominator divisible by 3 in a 3-local matrix".into(),
                ));
            }
            let inv = if denom.is_one() {
                Rat::one()
            } else {
                f3.inverse(&denom)
            };
            out.set(i, j, f3.normalize(Rat::from_integer(v.numer().clone()) * inv));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::rat;
    use crate::graded::{ExpBounds, GeneratorSpec, Presentation, PresentedGradedAlgebra};

    fn f3() -> BaseRing {
        BaseRing::prime_field(3).unwrap()
    }

    /// Z(2)[a1, a3] with the sign action.
    fn tmf13_module(window: Window) -> DegreewiseModule {
        let z2 = BaseRing::p_local(2).unwrap();
        let gens = vec![
            GeneratorSpec::internal("a1", 2).with_weight(1),
            GeneratorSpec::internal("a3", 6).with_weight(1),
        ];
        let alg = PresentedGradedAlgebra::new(z2, gens, vec![]).unwrap();
        DegreewiseModule::regular(alg, window, ExpBounds::none()).unwrap()
    }

    #[test]
    fn sign_action_counts_parity_classes() {
        // Entry (n, m) has F2-rank = #monomials a1^i a3^j of degree m with
        // i + j = n mod 2 (weights odd: even columns pick even monomials).
        let window = Window::new(0, 24);
        let action = CyclicAction {
            module: tmf13_module(window),
            order: 2,
            kind: ActionKind::SignByWeight,
        };
        let table = tate_cyclic(&action, window, Window::new(-4, 4)).unwrap();
        for m in (0..=24i64).step_by(2) {
            let count = |parity: i64| -> usize {
                let mut c = 0;
                for j in 0..=m / 6 {
                    let rest = m - 6 * j;
                    if rest % 2 == 0 {
                        let i = rest / 2;
                        if (i + j).rem_euclid(2) == parity {
                            c += 1;
                        }
                    }
                }
                c
            };
            for n in -4..=4i64 {
                let expect = count(n.rem_euclid(2));
                let torsion = vec![2i64; expect];
                assert_eq!(
                    table.shape(n, m),
                    FgAbelianShape::torsion_i64(0, &torsion),
                    "entry ({n}, {m})"
                );
            }
        }
        // names carried from the diagonal basis
        let e = table.get(0, 8).unwrap();
        assert_eq!(e.names, vec!["a1^4", "a1*a3"]);
    }

    #[test]
    fn trivial_action_on_z_in_degree_zero() {
        // Even columns Z/2, odd columns 0.
        let z = BaseRing::Integers;
        let gens = vec![GeneratorSpec::internal("x", 2)];
        let alg = PresentedGradedAlgebra::new(z, gens, vec![(0, 1, crate::graded::Poly::zero())])
            .unwrap();
        let module = DegreewiseModule::regular(alg, Window::new(0, 0), ExpBounds::none()).unwrap();
        let action = CyclicAction {
            module,
            order: 2,
            kind: ActionKind::Trivial,
        };
        let table = tate_cyclic(&action, Window::new(0, 0), Window::new(-3, 3)).unwrap();
        for n in -3..=3i64 {
            let expect = if n % 2 == 0 {
                FgAbelianShape::torsion_i64(0, &[2])
            } else {
                FgAbelianShape::zero()
            };
            assert_eq!(table.shape(n, 0), expect, "column {n}");
        }
    }

    #[test]
    fn free_cyclic_action_has_vanishing_tate() {
        // Regular representation of C3 on F3^3 (permutation matrices).
        let module = rank_module(f3(), &[(0, 3)]);
        let mut perm = Matrix::zero(f3(), 3, 3);
        perm.set(0, 2, rat(1));
        perm.set(1, 0, rat(1));
        perm.set(2, 1, rat(1));
        let action = CyclicAction {
            module,
            order: 3,
            kind: ActionKind::Matrices([(0i64, perm)].into_iter().collect()),
        };
        let table = tate_cyclic(&action, Window::new(0, 0), Window::new(-3, 3)).unwrap();
        assert!(table.is_empty());
    }

    /// A module with prescribed free rank per degree over `base`
    /// (placeholder algebra; basis families carry everything).
    pub(crate) fn rank_module(base: BaseRing, ranks: &[(i64, usize)]) -> DegreewiseModule {
        use crate::graded::family::LinForm;
        use crate::graded::{BasisFamily, Presentation};
        let gens = vec![GeneratorSpec::internal("s", 2)];
        let alg = PresentedGradedAlgebra::new(base, gens, vec![(0, 1, crate::graded::Poly::zero())])
            .unwrap();
        let families = ranks
            .iter()
            .map(|&(d, r)| BasisFamily {
                name: format!("b{d}"),
                nparams: 1,
                degree: LinForm::constant(1, rat(d)),
                constraints: vec![
                    crate::graded::family::Constraint::ge0(LinForm::from_i64(&[1], 0)),
                    crate::graded::family::Constraint::ge0(LinForm::from_i64(&[-1], r as i64 - 1)),
                ],
            })
            .collect();
        let lo = ranks.iter().map(|r| r.0).min().unwrap();
        let hi = ranks.iter().map(|r| r.0).max().unwrap();
        DegreewiseModule::new(
            alg,
            Presentation::Rule {
                families,
                actions: vec![],
            },
            Window::new(lo, hi),
            ExpBounds::none(),
        )
        .unwrap()
    }

    #[test]
    fn lubin_tate_truncation_mod_nine() {
        // C_9 acting trivially on free Z(3)-pieces in even degrees:
        // even columns (Z/9)^rank, odd columns zero.
        let z3 = BaseRing::p_local(3).unwrap();
        let module = rank_module(z3, &[(-4, 1), (-2, 2), (0, 1), (2, 2), (4, 1)]);
        let action = CyclicAction {
            module,
            order: 9,
            kind: ActionKind::Trivial,
        };
        let table = tate_cyclic(&action, Window::new(-4, 4), Window::new(-4, 4)).unwrap();
        for m in [-4i64, -2, 0, 2, 4] {
            let r = if m % 4 == 0 { 1 } else { 2 };
            for n in -4..=4i64 {
                let expect = if n % 2 == 0 {
                    FgAbelianShape::torsion_i64(0, &vec![9; r])
                } else {
                    FgAbelianShape::zero()
                };
                assert_eq!(table.shape(n, m), expect);
            }
        }
    }

    #[test]
    fn sigma3_trivial_weyl_keeps_everything() {
        // Trivial C3-action on F3 in degree 0 with trivial weyl:
        // all columns F3.
        let module = rank_module(f3(), &[(0, 1)]);
        let action = CyclicAction {
            module,
            order: 3,
            kind: ActionKind::Trivial,
        };
        let mut weyl = GradedMap::new(0);
        weyl.matrices.insert(0, Matrix::identity(f3(), 1));
        let table =
            tate_sigma3_via_sylow(&action, &weyl, Window::new(0, 0), Window::new(-3, 3)).unwrap();
        for n in -3..=3i64 {
            assert_eq!(table.shape(n, 0), FgAbelianShape::free(1), "column {n}");
        }
    }

    #[test]
    fn sigma3_regular_representation_vanishes() {
        // C3 permutation action on F3^3, weyl = a transposition:
        // direct kernel/image computation gives 0 everywhere.
        let module = rank_module(f3(), &[(0, 3)]);
        let mut perm = Matrix::zero(f3(), 3, 3);
        perm.set(0, 2, rat(1));
        perm.set(1, 0, rat(1));
        perm.set(2, 1, rat(1));
        let action = CyclicAction {
            module,
            order: 3,
            kind: ActionKind::Matrices([(0i64, perm)].into_iter().collect()),
        };
        // transposition swapping basis 1 and 2 conjugates the 3-cycle to
        // its inverse
        let mut w = Matrix::zero(f3(), 3, 3);
        w.set(0, 0, rat(1));
        w.set(1, 2, rat(1));
        w.set(2, 1, rat(1));
        let mut weyl = GradedMap::new(0);
        weyl.matrices.insert(0, w);
        let table =
            tate_sigma3_via_sylow(&action, &weyl, Window::new(0, 0), Window::new(-3, 3)).unwrap();
        assert!(table.is_empty());
    }
}
