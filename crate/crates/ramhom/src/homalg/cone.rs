use super::HomalgError;
use crate::base::{
    cokernel_shape, kernel_matrix, smith_normal_form, solve, BaseRing, FgAbelianShape, Int,
    Matrix, Rat,
};
use crate::graded::Window;
use num::{One, Zero};
use std::collections::{BTreeMap, BTreeSet};

/// A finitely generated group in canonical presentation: free generators
/// first, then one generator per invariant factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PresentedGroup {
    pub shape: FgAbelianShape,
}

impl PresentedGroup {
    pub fn new(shape: FgAbelianShape) -> Self {
        PresentedGroup { shape }
    }

    pub fn zero() -> Self {
        PresentedGroup::new(FgAbelianShape::zero())
    }

    pub fn num_gens(&self) -> usize {
        self.shape.free_rank + self.shape.torsion.len()
    }

    /// Relation matrix: `d_i` on the torsion generators.
    pub fn relations(&self, ring: BaseRing) -> Matrix {
        let g = self.num_gens();
        let t = self.shape.torsion.len();
        let mut rel = Matrix::zero(ring, g, t);
        for (j, d) in self.shape.torsion.iter().enumerate() {
            rel.set(self.shape.free_rank + j, j, Rat::from_integer(d.clone()));
        }
        rel
    }
}

/// One degree of the map data for a cone computation.
#[derive(Debug, Clone)]
pub struct DegreeMap {
    pub source: PresentedGroup,
    pub target: PresentedGroup,
    /// Matrix on generators, target gens x source gens.
    pub matrix: Matrix,
}

impl DegreeMap {
    pub fn zero_between(ring: BaseRing, source: FgAbelianShape, target: FgAbelianShape) -> Self {
        let source = PresentedGroup::new(source);
        let target = PresentedGroup::new(target);
        let matrix = Matrix::zero(ring, target.num_gens(), source.num_gens());
        DegreeMap {
            source,
            target,
            matrix,
        }
    }
}

/// How one degree of the cone was resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConeDegree {
    Exact(FgAbelianShape),
    /// The extension `0 -> sub -> ? -> quot -> 0` could not be resolved.
    AmbiguousExtension {
        sub: FgAbelianShape,
        quot: FgAbelianShape,
        candidates: Vec<FgAbelianShape>,
        /// Whether `candidates` provably lists every isomorphism class.
        complete: bool,
    },
}

/// Hints resolving extension ambiguities, each citing its justification.
#[derive(Debug, Clone, Default)]
pub struct ConeHints {
    /// Degrees where the total group is known to be torsion-free.
    pub torsion_free_total: BTreeMap<i64, String>,
}

/// Degreewise homotopy of a mapping cone from the long exact sequence:
/// `0 -> coker(f_d) -> cone_d -> ker(f_{d-1}) -> 0`.
///
/// An extension is only resolved when one side vanishes, the quotient is
/// free (free quotients split), or a torsion-free-total hint is supplied;
/// the solver never guesses.
pub fn cone_les_solve(
    ring: BaseRing,
    data: &BTreeMap<i64, DegreeMap>,
    hints: &ConeHints,
    window: Window,
) -> Result<BTreeMap<i64, ConeDegree>, HomalgError> {
    for d in window.lo - 1..=window.hi {
        if !data.contains_key(&d) {
            return Err(HomalgError::InsufficientWindow(format!(
                "cone data must cover degree {d}"
            )));
        }
    }
    let mut out = BTreeMap::new();
    for d in window.iter() {
        let here = &data[&d];
        let below = &data[&(d - 1)];
        let coker = map_cokernel(ring, here)?;
        let ker = map_kernel(ring, below)?;
        out.insert(d, resolve_extension(coker, ker, hints.torsion_free_total.get(&d))?);
    }
    Ok(out)
}

fn resolve_extension(
    sub: FgAbelianShape,
    quot: FgAbelianShape,
    torsion_free_hint: Option<&String>,
) -> Result<ConeDegree, HomalgError> {
    if sub.is_zero() {
        return Ok(ConeDegree::Exact(quot));
    }
    if quot.is_zero() {
        return Ok(ConeDegree::Exact(sub));
    }
    if quot.is_free() {
        // free quotients are projective: the sequence splits
        return Ok(ConeDegree::Exact(sub.direct_sum(&quot)));
    }
    if let Some(_why) = torsion_free_hint {
        if !sub.is_free() {
            return Err(HomalgError::InconsistentHint(format!(
                "total group declared torsion-free but the subgroup is {sub}"
            )));
        }
        return Ok(ConeDegree::Exact(FgAbelianShape::free(
            sub.free_rank + quot.free_rank,
        )));
    }
    let (candidates, complete) = extension_candidates(&sub, &quot);
    Ok(ConeDegree::AmbiguousExtension {
        sub,
        quot,
        candidates,
        complete,
    })
}

/// Isomorphism classes of extensions `0 -> sub -> E -> quot -> 0`.
///
/// Complete exactly when `sub` is free and `quot` is a single cyclic
/// prime-power group `Z/p^e`: the class group is `(Z/p^e)^rank` and `E`
/// is determined by the valuation of the class, giving
/// `{Z^rank + Z/p^k : 0 <= k <= e}`. Otherwise only the split candidate
/// is listed and `complete` is false.
fn extension_candidates(
    sub: &FgAbelianShape,
    quot: &FgAbelianShape,
) -> (Vec<FgAbelianShape>, bool) {
    let split = sub.direct_sum(quot);
    if sub.is_free() && quot.free_rank == 0 && quot.torsion.len() == 1 {
        let q = &quot.torsion[0];
        if let Some((p, e)) = prime_power(q) {
            let mut set = BTreeSet::new();
            for k in 0..=e {
                let tors = if k == 0 {
                    vec![]
                } else {
                    vec![p.pow(k)]
                };
                set.insert(FgAbelianShape::new(sub.free_rank, tors));
            }
            let cands: Vec<FgAbelianShape> = set.into_iter().collect();
            return (cands, true);
        }
    }
    (vec![split], false)
}

fn prime_power(n: &Int) -> Option<(Int, u32)> {
    let mut n = n.clone();
    let mut p = Int::from(2);
    while &p * &p <= n {
        if (&n % &p).is_zero() {
            break;
        }
        p += 1;
    }
    if &p * &p > n {
        return Some((n, 1));
    }
    let mut e = 0u32;
    while (&n % &p).is_zero() {
        n /= &p;
        e += 1;
    }
    if n.is_one() {
        Some((p, e))
    } else {
        None
    }
}

/// Cokernel of a map of presented groups: quotient the target by both its
/// relations and the image.
fn map_cokernel(ring: BaseRing, map: &DegreeMap) -> Result<FgAbelianShape, HomalgError> {
    let rel = map.target.relations(ring);
    let stacked = map.matrix.hstack(&rel);
    Ok(cokernel_shape(&stacked))
}

/// Kernel of a map of presented groups as an abstract group: pull back the
/// target relations, then present the resulting subgroup of the source
/// modulo the source relations.
fn map_kernel(ring: BaseRing, map: &DegreeMap) -> Result<FgAbelianShape, HomalgError> {
    let src_gens = map.source.num_gens();
    if src_gens == 0 {
        return Ok(FgAbelianShape::zero());
    }
    let rel_b = map.target.relations(ring);
    // x in F_A with f(x) in im(R_B): kernel of [f | R_B], first block rows
    let stacked = map.matrix.hstack(&rel_b);
    let big_kernel = kernel_matrix(&stacked);
    // columns restricted to the F_A block span the pullback lattice
    let mut cols = vec![];
    for j in 0..big_kernel.cols {
        let col: Vec<Rat> = (0..src_gens).map(|i| big_kernel.get(i, j).clone()).collect();
        cols.push(col);
    }
    let pullback = Matrix::from_columns(ring, src_gens, cols);
    // a lattice basis of the column span: P * V has the first `rank`
    // columns equal to U^{-1} S
    let snf = smith_normal_form(&pullback);
    let pv = pullback.mul(&snf.v);
    let mut basis_cols = vec![];
    for j in 0..snf.rank {
        basis_cols.push(pv.column(j));
    }
    let basis = Matrix::from_columns(ring, src_gens, basis_cols);
    if basis.cols == 0 {
        return Ok(FgAbelianShape::zero());
    }
    // express the source relations in this basis and quotient them out
    let rel_a = map.source.relations(ring);
    let y = solve(&basis, &rel_a).map_err(|_| {
        HomalgError::Internal("source relations escape the kernel pullback".into())
    })?;
    Ok(cokernel_shape(&y))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z_p(p: u64) -> BaseRing {
        BaseRing::p_local(p).unwrap()
    }

    fn free1() -> FgAbelianShape {
        FgAbelianShape::free(1)
    }

    #[test]
    fn adams_summand_bottom_group() {
        // degrees 1..3 of l -> ku_(p): pi_2(l) = 0, pi_2(ku) = Z(p),
        // pi_1 both zero: cone degree 2 is exactly Z(p).
        let ring = z_p(5);
        let mut data = BTreeMap::new();
        for d in 0..=3i64 {
            let (s, t) = match d {
                0 => (free1(), free1()),
                2 => (FgAbelianShape::zero(), free1()),
                _ => (FgAbelianShape::zero(), FgAbelianShape::zero()),
            };
            let mut dm = DegreeMap::zero_between(ring, s, t);
            if d == 0 {
                dm.matrix.set(0, 0, crate::base::rat(1)); // iso on pi_0
            }
            data.insert(d, dm);
        }
        let out = cone_les_solve(ring, &data, &ConeHints::default(), Window::new(1, 3)).unwrap();
        assert_eq!(out[&2], ConeDegree::Exact(free1()));
        assert_eq!(out[&1], ConeDegree::Exact(FgAbelianShape::zero()));
        assert_eq!(out[&3], ConeDegree::Exact(FgAbelianShape::zero()));
    }

    #[test]
    fn tmf_level_two_ambiguity_and_hint() {
        // degree 4 of tmf -> tmf0(2) at p = 3: coker = Z(3),
        // ker(pi_3) = Z/3; without a hint both candidates are reported,
        // with the torsion-free hint the answer is Z(3).
        let ring = z_p(3);
        let mut data = BTreeMap::new();
        // degree 3: pi_3 tmf = Z/3 -> pi_3 tmf0(2) = 0
        data.insert(
            3,
            DegreeMap::zero_between(ring, FgAbelianShape::torsion_i64(0, &[3]), FgAbelianShape::zero()),
        );
        // degree 4: pi_4 tmf = 0 -> pi_4 tmf0(2) = Z(3)
        data.insert(
            4,
            DegreeMap::zero_between(ring, FgAbelianShape::zero(), free1()),
        );
        data.insert(
            5,
            DegreeMap::zero_between(ring, FgAbelianShape::zero(), FgAbelianShape::zero()),
        );
        let out = cone_les_solve(ring, &data, &ConeHints::default(), Window::new(4, 5)).unwrap();
        match &out[&4] {
            ConeDegree::AmbiguousExtension {
                candidates,
                complete,
                ..
            } => {
                assert!(*complete);
                assert_eq!(
                    candidates,
                    &vec![free1(), FgAbelianShape::torsion_i64(1, &[3])]
                );
            }
            other => panic!("expected ambiguity, got {other:?}"),
        }
        let mut hints = ConeHints::default();
        hints
            .torsion_free_total
            .insert(4, "smashing with the alpha-cone keeps the total free".into());
        let out = cone_les_solve(ring, &data, &hints, Window::new(4, 5)).unwrap();
        assert_eq!(out[&4], ConeDegree::Exact(free1()));
    }

    #[test]
    fn identity_map_has_zero_cone() {
        let ring = BaseRing::Integers;
        let mut data = BTreeMap::new();
        for d in -1..=2i64 {
            let mut dm = DegreeMap::zero_between(ring, free1(), free1());
            dm.matrix.set(0, 0, crate::base::rat(1));
            data.insert(d, dm);
        }
        let out = cone_les_solve(ring, &data, &ConeHints::default(), Window::new(0, 2)).unwrap();
        for d in 0..=2i64 {
            assert_eq!(out[&d], ConeDegree::Exact(FgAbelianShape::zero()));
        }
    }

    #[test]
    fn kernel_of_presented_torsion_map() {
        // Z/4 --x2--> Z/4 has kernel Z/2 and cokernel Z/2.
        let ring = BaseRing::Integers;
        let source = PresentedGroup::new(FgAbelianShape::torsion_i64(0, &[4]));
        let target = PresentedGroup::new(FgAbelianShape::torsion_i64(0, &[4]));
        let mut matrix = Matrix::zero(ring, 1, 1);
        matrix.set(0, 0, crate::base::rat(2));
        let dm = DegreeMap {
            source,
            target,
            matrix,
        };
        assert_eq!(
            map_kernel(ring, &dm).unwrap(),
            FgAbelianShape::torsion_i64(0, &[2])
        );
        assert_eq!(
            map_cokernel(ring, &dm).unwrap(),
            FgAbelianShape::torsion_i64(0, &[2])
        );
    }

    #[test]
    fn free_quotient_always_splits() {
        let sub = FgAbelianShape::torsion_i64(0, &[2]);
        let quot = free1();
        let got = resolve_extension(sub.clone(), quot.clone(), None).unwrap();
        assert_eq!(got, ConeDegree::Exact(FgAbelianShape::torsion_i64(1, &[2])));
    }
}
