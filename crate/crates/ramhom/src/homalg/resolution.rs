use super::HomalgError;
use crate::base::{kernel_basis, solve, Matrix, Rat};
use crate::graded::{
    DegreewiseModule, ExpBounds, FreeGen, Poly, Presentation, PresentedGradedAlgebra, Window,
};
use num::{One, Zero};
use std::collections::BTreeMap;

/// One stage of a free resolution: a free module on shifted generators
/// and the matrix of algebra elements mapping it to the previous stage
/// (rows = previous stage generators; stage 0 maps onto the resolved
/// module via its augmentation instead).
#[derive(Debug, Clone)]
pub struct Stage {
    pub gens: Vec<FreeGen>,
    pub map: Vec<Vec<Poly>>,
}

/// Repetition pattern for the tail of a resolution: stages past the
/// declared list repeat with a fixed shift increment per period.
#[derive(Debug, Clone, Copy)]
pub struct PeriodicTail {
    /// First declared stage index that participates in the cycle.
    pub from: usize,
    pub period: usize,
    /// Added to every generator shift after each full period.
    pub shift_step: i64,
}

/// A free resolution of a cyclic module over a presented graded algebra,
/// evaluated degreewise inside a window.
pub struct FreeResolution {
    pub algebra: PresentedGradedAlgebra,
    /// The resolved module; must carry a `Quotient` presentation so the
    /// augmentation is the quotient projection.
    pub target: DegreewiseModule,
    pub stages: Vec<Stage>,
    pub periodic: Option<PeriodicTail>,
    pub window: Window,
    stage_cache: std::sync::RwLock<BTreeMap<usize, std::sync::Arc<DegreewiseModule>>>,
}

impl FreeResolution {
    pub fn assemble(
        algebra: PresentedGradedAlgebra,
        target: DegreewiseModule,
        stages: Vec<Stage>,
        periodic: Option<PeriodicTail>,
        window: Window,
    ) -> Self {
        FreeResolution {
            algebra,
            target,
            stages,
            periodic,
            window,
            stage_cache: std::sync::RwLock::new(BTreeMap::new()),
        }
    }
}

/// Result of checking `d o d = 0` and degreewise exactness.
#[derive(Debug, Clone, Default)]
pub struct ExactnessReport {
    /// `(stage, degree, description)` for every failure found.
    pub failures: Vec<(usize, i64, String)>,
}

impl ExactnessReport {
    pub fn is_exact(&self) -> bool {
        self.failures.is_empty()
    }
}

impl FreeResolution {
    /// Generators of stage `k`, unrolling the periodic tail.
    pub fn stage_gens(&self, k: usize) -> Vec<FreeGen> {
        if k < self.stages.len() {
            return self.stages[k].gens.clone();
        }
        let tail = self
            .periodic
            .as_ref()
            .expect("stage beyond declared list requires a periodic tail");
        let offset = k - tail.from;
        let base = tail.from + offset % tail.period;
        let cycles = (offset / tail.period) as i64;
        self.stages[base]
            .gens
            .iter()
            .map(|g| FreeGen {
                name: format!("{}{}", g.name, if cycles > 0 { format!("+{cycles}") } else { String::new() }),
                shift: g.shift + cycles * tail.shift_step,
            })
            .collect()
    }

    /// Matrix of algebra elements for `d_k: F_k -> F_{k-1}`, `k >= 1`.
    pub fn stage_map(&self, k: usize) -> Vec<Vec<Poly>> {
        assert!(k >= 1, "stage 0 maps via the augmentation");
        if k < self.stages.len() {
            return self.stages[k].map.clone();
        }
        let tail = self.periodic.as_ref().unwrap();
        let offset = k - tail.from;
        let base = tail.from + offset % tail.period;
        self.stages[base].map.clone()
    }

    /// Stage `k` is identically zero on the window once the minimal
    /// generator shift exceeds the window top.
    pub fn stage_vanishes(&self, k: usize) -> bool {
        if k >= self.stages.len() && self.periodic.is_none() {
            return true;
        }
        self.stage_gens(k)
            .iter()
            .all(|g| g.shift > self.window.hi)
    }

    /// The free module at stage `k` as a degreewise module (memoized).
    pub fn stage_module(&self, k: usize) -> Result<std::sync::Arc<DegreewiseModule>, HomalgError> {
        if let Some(hit) = self.stage_cache.read().unwrap().get(&k) {
            return Ok(hit.clone());
        }
        let module = std::sync::Arc::new(DegreewiseModule::new(
            self.algebra.clone(),
            Presentation::Free {
                gens: self.stage_gens(k),
            },
            self.window,
            ExpBounds::none(),
        )?);
        self.stage_cache
            .write()
            .unwrap()
            .insert(k, module.clone());
        Ok(module)
    }

    /// Degreewise matrix of `d_k` at internal degree `d` (`k >= 1`).
    pub fn stage_matrix(&self, k: usize, d: i64) -> Result<Matrix, HomalgError> {
        let src = self.stage_module(k)?;
        let dst = self.stage_module(k - 1)?;
        let map = self.stage_map(k);
        assembled_map(&self.algebra, src.as_ref(), dst.as_ref(), &map, d)
    }

    /// Degreewise matrix of the augmentation `F_0 -> M` at degree `d`.
    pub fn augmentation_matrix(&self, d: i64) -> Result<Matrix, HomalgError> {
        let f0 = self.stage_module(0)?;
        let src_basis = f0.basis(d)?;
        let dst_basis = self.target.basis(d)?;
        let dst_index: BTreeMap<_, _> = dst_basis
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, b)| (b, i))
            .collect();
        let ring = self.algebra.base();
        let mut mat = Matrix::zero(ring, dst_basis.len(), src_basis.len());
        for (j, b) in src_basis.iter().enumerate() {
            let crate::graded::BasisElem::FreeGen { gen, mono } = b else {
                unreachable!("free stage has free basis")
            };
            debug_assert_eq!(*gen, 0, "cyclic resolutions have one augmentation generator");
            // project the monomial into the quotient
            let img = self.target_projection(mono)?;
            for (m, c) in img.terms {
                let key = crate::graded::BasisElem::Mono(m);
                if let Some(&i) = dst_index.get(&key) {
                    let v = mat.get(i, j) + &c;
                    mat.set(i, j, v);
                } else if !c.is_zero() {
                    return Err(HomalgError::Internal(
                        "augmentation image escaped the module basis".into(),
                    ));
                }
            }
        }
        Ok(mat)
    }

    fn target_projection(&self, mono: &crate::graded::Monomial) -> Result<Poly, HomalgError> {
        let quotient = self
            .target
            .quotient_algebra()
            .ok_or(HomalgError::NotCyclic)?;
        Ok(quotient.normal_form(&Poly::monomial(mono.clone(), Rat::one())))
    }

    /// Symbolic check that consecutive maps compose to zero: every entry
    /// of the product matrix must normalize to the zero polynomial.
    pub fn check_d_squared(&self, stages: usize) -> Result<(), HomalgError> {
        for k in 2..=stages {
            if self.stage_vanishes(k) {
                break;
            }
            let a = self.stage_map(k - 1); // F_{k-1} -> F_{k-2}
            let b = self.stage_map(k); // F_k -> F_{k-1}
            let rows = a.len();
            let mids = b.len();
            let cols = b.first().map_or(0, |r| r.len());
            for i in 0..rows {
                for j in 0..cols {
                    let mut acc = Poly::zero();
                    for l in 0..mids {
                        let prod = self.algebra.mul(&a[i][l], &b[l][j]);
                        acc = acc.add(&prod, self.algebra.base());
                    }
                    let nf = self.algebra.normal_form(&acc);
                    if !nf.is_zero() {
                        return Err(HomalgError::NotExact(format!(
                            "d o d != 0 symbolically at stages {}/{k} entry ({i},{j})",
                            k - 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Full verification over the resolution's own window.
    pub fn verify(&self, max_stage: usize) -> Result<ExactnessReport, HomalgError> {
        self.verify_on(max_stage, self.window)
    }

    /// Full verification: `d o d = 0` degreewise plus exactness of every
    /// interior stage (and of the augmented end) within a window.
    pub fn verify_on(
        &self,
        max_stage: usize,
        window: crate::graded::Window,
    ) -> Result<ExactnessReport, HomalgError> {
        let mut report = ExactnessReport::default();
        for d in window.iter() {
            // surjectivity of the augmentation
            let aug = self.augmentation_matrix(d)?;
            let d1 = if self.stage_vanishes(1) {
                Matrix::zero(self.algebra.base(), aug.cols, 0)
            } else {
                self.stage_matrix(1, d)?
            };
            if !crate::base::cokernel_shape(&aug).is_zero() {
                report
                    .failures
                    .push((0, d, "augmentation is not surjective".into()));
            }
            exactness_at(&aug, &d1, 0, d, &mut report);
            let mut k = 1;
            loop {
                if k >= max_stage || self.stage_vanishes(k) {
                    break;
                }
                let out = self.stage_matrix(k, d)?;
                let inn = if self.stage_vanishes(k + 1) {
                    Matrix::zero(self.algebra.base(), out.cols, 0)
                } else {
                    self.stage_matrix(k + 1, d)?
                };
                exactness_at(&out, &inn, k, d, &mut report);
                k += 1;
            }
        }
        Ok(report)
    }
}

/// Records, at one slot, both halves of exactness: `im(in) ⊆ ker(out)`
/// (else `d o d != 0`) and `ker(out) ⊆ im(in)` (else an unbounded kernel
/// class witnesses the defect).
fn exactness_at(out: &Matrix, inn: &Matrix, stage: usize, d: i64, report: &mut ExactnessReport) {
    if !out.mul(inn).is_zero() {
        report.failures.push((stage, d, "d o d != 0".into()));
    }
    let kernel = kernel_basis(out);
    for (idx, vec) in kernel.iter().enumerate() {
        let b = Matrix::from_columns(out.ring, vec.len(), vec![vec.clone()]);
        let hit = if inn.cols == 0 {
            vec.iter().all(Zero::is_zero)
        } else {
            solve(inn, &b).is_ok()
        };
        if !hit {
            report.failures.push((
                stage,
                d,
                format!("kernel class #{idx} is not a boundary"),
            ));
        }
    }
}

/// Assembles the degreewise base matrix of a map of free modules given by
/// an algebra-entry matrix (rows index target generators).
fn assembled_map(
    algebra: &PresentedGradedAlgebra,
    src: &DegreewiseModule,
    dst: &DegreewiseModule,
    map: &[Vec<Poly>],
    d: i64,
) -> Result<Matrix, HomalgError> {
    let src_basis = src.basis(d)?;
    let dst_basis = dst.basis(d)?;
    let dst_index: BTreeMap<_, _> = dst_basis
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, b)| (b, i))
        .collect();
    let ring = algebra.base();
    let mut mat = Matrix::zero(ring, dst_basis.len(), src_basis.len());
    for (j, b) in src_basis.iter().enumerate() {
        let crate::graded::BasisElem::FreeGen { gen, mono } = b else {
            unreachable!("free module has free basis")
        };
        for (i_gen, row) in map.iter().enumerate() {
            let entry = &row[*gen];
            if entry.is_zero() {
                continue;
            }
            let prod = algebra.mul(entry, &Poly::monomial(mono.clone(), Rat::one()));
            for (m, c) in prod.terms {
                let key = crate::graded::BasisElem::FreeGen {
                    gen: i_gen,
                    mono: m,
                };
                if let Some(&i) = dst_index.get(&key) {
                    let v = mat.get(i, j) + &c;
                    mat.set(i, j, v);
                } else if !c.is_zero() {
                    return Err(HomalgError::Internal(
                        "map image escaped the stage basis".into(),
                    ));
                }
            }
        }
    }
    Ok(mat)
}

/// Builds a resolution of the cyclic module `algebra / (rules)` degreewise:
/// at each stage, minimal kernel generators are taken lowest degree first
/// with ties broken by basis order.
pub fn resolve_cyclic_auto(
    algebra: &PresentedGradedAlgebra,
    quotient_rules: Vec<(usize, i64, Poly)>,
    window: Window,
    max_stages: usize,
) -> Result<FreeResolution, HomalgError> {
    let target = DegreewiseModule::quotient(
        algebra.clone(),
        quotient_rules,
        window,
        ExpBounds::none(),
    )?;
    let mut res = FreeResolution::assemble(
        algebra.clone(),
        target,
        vec![Stage {
            gens: vec![FreeGen {
                name: "e0".into(),
                shift: 0,
            }],
            map: vec![],
        }],
        None,
        window,
    );

    for k in 1..=max_stages {
        let prev = res.stage_module(k - 1)?;
        // Matrices of the previous differential per degree.
        let prev_matrix = |d: i64| -> Result<Matrix, HomalgError> {
            if k == 1 {
                res.augmentation_matrix(d)
            } else {
                res.stage_matrix(k - 1, d)
            }
        };
        let mut gens: Vec<FreeGen> = vec![];
        let mut gen_vectors: Vec<(i64, Vec<Poly>)> = vec![]; // (degree, components over prev gens)
        let prev_gens = res.stage_gens(k - 1);

        for d in window.iter() {
            let out = prev_matrix(d)?;
            let kernel = kernel_basis(&out);
            if kernel.is_empty() {
                continue;
            }
            let prev_basis = prev.basis(d)?;
            for vec in kernel {
                // span of monomial multiples of already-chosen generators
                let span = generator_span(&res, prev.as_ref(), &gen_vectors, d)?;
                let b = Matrix::from_columns(algebra.base(), vec.len(), vec![vec.clone()]);
                let in_span = if span.cols == 0 {
                    vec.iter().all(Zero::is_zero)
                } else {
                    solve(&span, &b).is_ok()
                };
                if in_span {
                    continue;
                }
                // record the new generator as polynomial components
                let mut comps = vec![Poly::zero(); prev_gens.len()];
                for (idx, coeff) in vec.iter().enumerate() {
                    if coeff.is_zero() {
                        continue;
                    }
                    let crate::graded::BasisElem::FreeGen { gen, mono } = &prev_basis[idx] else {
                        unreachable!()
                    };
                    comps[*gen].add_term(mono.clone(), coeff.clone(), algebra.base());
                }
                gens.push(FreeGen {
                    name: format!("e{k}_{}", gens.len()),
                    shift: d,
                });
                gen_vectors.push((d, comps));
            }
        }

        if gens.is_empty() {
            break; // kernel vanished: the resolution terminated
        }
        // map matrix: rows = prev gens, cols = new gens
        let map: Vec<Vec<Poly>> = (0..prev_gens.len())
            .map(|i| gen_vectors.iter().map(|(_, c)| c[i].clone()).collect())
            .collect();
        res.stages.push(Stage { gens, map });
    }
    Ok(res)
}

/// Columns spanning, at degree `d`, the submodule of stage `k-1` generated
/// by the already-chosen kernel generators.
fn generator_span(
    res: &FreeResolution,
    prev: &DegreewiseModule,
    gen_vectors: &[(i64, Vec<Poly>)],
    d: i64,
) -> Result<Matrix, HomalgError> {
    let algebra = &res.algebra;
    let ring = algebra.base();
    let prev_basis = prev.basis(d)?;
    let prev_index: BTreeMap<_, _> = prev_basis
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, b)| (b, i))
        .collect();
    let mut cols: Vec<Vec<Rat>> = vec![];
    for (gdeg, comps) in gen_vectors {
        if *gdeg > d {
            continue;
        }
        for mono in algebra.monomial_basis(d - gdeg, &ExpBounds::none())? {
            let mpoly = Poly::monomial(mono, Rat::one());
            let mut col = vec![Rat::zero(); prev_basis.len()];
            for (gi, comp) in comps.iter().enumerate() {
                if comp.is_zero() {
                    continue;
                }
                let prod = algebra.mul(comp, &mpoly);
                for (m, c) in prod.terms {
                    let key = crate::graded::BasisElem::FreeGen { gen: gi, mono: m };
                    if let Some(&i) = prev_index.get(&key) {
                        col[i] = ring.normalize(std::mem::take(&mut col[i]) + c);
                    }
                }
            }
            cols.push(col);
        }
    }
    Ok(Matrix::from_columns(ring, prev_basis.len(), cols))
}

impl FreeResolution {
    /// Shifts of generators per stage, handy for asserting resolution shape.
    pub fn shift_profile(&self, stages: usize) -> Vec<Vec<i64>> {
        (0..=stages)
            .map(|k| {
                if self.stage_vanishes(k) {
                    vec![]
                } else {
                    self.stage_gens(k).iter().map(|g| g.shift).collect()
                }
            })
            .collect()
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::base::{rat, BaseRing};
    use crate::graded::GeneratorSpec;

    fn z3() -> BaseRing {
        BaseRing::p_local(3).unwrap()
    }

    pub(crate) fn smash_algebra() -> PresentedGradedAlgebra {
        let gens = vec![
            GeneratorSpec::internal("a2", 4),
            GeneratorSpec::internal("a4", 8),
            GeneratorSpec::internal("r", 4),
        ];
        let mut rhs = Poly::zero();
        rhs.add_term(vec![1, 0, 2], rat(-1), z3());
        rhs.add_term(vec![0, 1, 1], rat(-1), z3());
        PresentedGradedAlgebra::new(z3(), gens, vec![(2, 3, rhs)]).unwrap()
    }

    fn poly(alg: &PresentedGradedAlgebra, terms: &[(i64, &[i64])]) -> Poly {
        let mut p = Poly::zero();
        for (c, m) in terms {
            p.add_term(m.to_vec(), rat(*c), alg.base());
        }
        p
    }

    /// The hand-built period-2 resolution of Z(3)[a2,a4] = alg/(r):
    /// ... -> S^12 alg --(r^2+a2 r+a4)--> S^4 alg --r--> alg.
    pub(crate) fn paper_resolution(window: Window) -> FreeResolution {
        let alg = smash_algebra();
        let target =
            DegreewiseModule::quotient(alg.clone(), vec![(2, 1, Poly::zero())], window, ExpBounds::none())
                .unwrap();
        let r = poly(&alg, &[(1, &[0, 0, 1])]);
        let quad = poly(&alg, &[(1, &[0, 0, 2]), (1, &[1, 0, 1]), (1, &[0, 1, 0])]);
        let stages = vec![
            Stage {
                gens: vec![FreeGen { name: "e0".into(), shift: 0 }],
                map: vec![],
            },
            Stage {
                gens: vec![FreeGen { name: "e1".into(), shift: 4 }],
                map: vec![vec![r]],
            },
            Stage {
                gens: vec![FreeGen { name: "e2".into(), shift: 12 }],
                map: vec![vec![quad]],
            },
        ];
        FreeResolution::assemble(
            alg,
            target,
            stages,
            Some(PeriodicTail { from: 1, period: 2, shift_step: 12 }),
            window,
        )
    }

    #[test]
    fn periodic_tail_unrolls_shifts() {
        let res = paper_resolution(Window::new(0, 60));
        let profile = res.shift_profile(6);
        assert_eq!(
            profile,
            vec![
                vec![0],
                vec![4],
                vec![12],
                vec![16],
                vec![24],
                vec![28],
                vec![36]
            ]
        );
    }

    #[test]
    fn paper_resolution_is_exact() {
        let res = paper_resolution(Window::new(0, 48));
        res.check_d_squared(8).unwrap();
        let report = res.verify(8).unwrap();
        assert!(report.is_exact(), "failures: {:?}", report.failures);
    }

    #[test]
    fn corrupted_resolution_detected_at_degree_12() {
        // Replacing the quadratic map by r^2 breaks exactness: a4 * e1
        // lies in ker(.r) but is no longer hit.
        let alg = smash_algebra();
        let window = Window::new(0, 24);
        let target =
            DegreewiseModule::quotient(alg.clone(), vec![(2, 1, Poly::zero())], window, ExpBounds::none())
                .unwrap();
        let r = poly(&alg, &[(1, &[0, 0, 1])]);
        let rsq = poly(&alg, &[(1, &[0, 0, 2])]);
        let stages = vec![
            Stage { gens: vec![FreeGen { name: "e0".into(), shift: 0 }], map: vec![] },
            Stage { gens: vec![FreeGen { name: "e1".into(), shift: 4 }], map: vec![vec![r]] },
            Stage { gens: vec![FreeGen { name: "e2".into(), shift: 12 }], map: vec![vec![rsq]] },
        ];
        let res = FreeResolution::assemble(
            alg,
            target,
            stages,
            Some(PeriodicTail { from: 1, period: 2, shift_step: 12 }),
            window,
        );
        let report = res.verify(4).unwrap();
        assert!(!report.is_exact());
        assert!(
            report.failures.iter().any(|(k, d, _)| *k == 1 && *d == 12),
            "expected a witness at stage 1, degree 12: {:?}",
            report.failures
        );
    }

    #[test]
    fn zero_length_resolution_of_algebra_by_itself() {
        let alg = smash_algebra();
        let window = Window::new(0, 24);
        let target = DegreewiseModule::regular(alg.clone(), window, ExpBounds::none()).unwrap();
        let res = FreeResolution::assemble(
            alg,
            target,
            vec![Stage { gens: vec![FreeGen { name: "e0".into(), shift: 0 }], map: vec![] }],
            None,
            window,
        );
        let report = res.verify(4).unwrap();
        assert!(report.is_exact());
    }

    #[test]
    fn auto_resolution_matches_paper_pattern() {
        let alg = smash_algebra();
        let res =
            resolve_cyclic_auto(&alg, vec![(2, 1, Poly::zero())], Window::new(0, 40), 5).unwrap();
        let profile = res.shift_profile(4);
        assert_eq!(profile[0], vec![0]);
        assert_eq!(profile[1], vec![4]);
        assert_eq!(profile[2], vec![12]);
        assert_eq!(profile[3], vec![16]);
        assert_eq!(profile[4], vec![24]);
        let report = res.verify(4).unwrap();
        assert!(report.is_exact(), "failures: {:?}", report.failures);
    }

    #[test]
    fn auto_resolution_of_tmf2_pattern() {
        // Z(3)[l1, l2, a]/(a^2 + l1 a - l2 a) resolving alg/(a):
        // alternating (.a), (.a + l1 - l2), shifts 0, 4, 8, 12, ...
        let gens = vec![
            GeneratorSpec::internal("l1", 4),
            GeneratorSpec::internal("l2", 4),
            GeneratorSpec::internal("a", 4),
        ];
        let mut rhs = Poly::zero();
        rhs.add_term(vec![1, 0, 1], rat(-1), z3());
        rhs.add_term(vec![0, 1, 1], rat(1), z3());
        let alg = PresentedGradedAlgebra::new(z3(), gens, vec![(2, 2, rhs)]).unwrap();
        let res =
            resolve_cyclic_auto(&alg, vec![(2, 1, Poly::zero())], Window::new(0, 32), 6).unwrap();
        let profile = res.shift_profile(5);
        assert_eq!(
            profile,
            vec![vec![0], vec![4], vec![8], vec![12], vec![16], vec![20]]
        );
        assert!(res.verify(5).unwrap().is_exact());
    }
}
