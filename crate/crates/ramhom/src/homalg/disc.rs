use super::HomalgError;
use crate::base::{cokernel_shape, BaseRing, FgAbelianShape, Matrix, Rat};
use crate::graded::Window;
use std::collections::BTreeMap;

/// Closed-form trace values on a free graded module with basis powers of
/// one element `u`: `tr(u^k) = coeff * v^{power(k)}` when `modulus | k`,
/// zero otherwise, with `power(k) = (k / modulus) * power_mult +
/// power_off + a * passthrough` for a source variable power `a`.
///
/// When `arg_includes_var_power` is set the trace argument is the
/// variable power itself (`k = labels + a`), and the variable power does
/// not pass through separately.
#[derive(Debug, Clone)]
pub struct TraceRule {
    pub modulus: i64,
    pub coeff: i64,
    pub power_mult: i64,
    pub power_off: i64,
    pub arg_includes_var_power: bool,
}

impl TraceRule {
    /// `(coefficient, target variable power)` for a component labelled
    /// `label_sum` applied to `v^a`, or `None` when the trace vanishes.
    pub fn apply(&self, label_sum: i64, a: i64) -> Option<(i64, i64)> {
        let k = label_sum + if self.arg_includes_var_power { a } else { 0 };
        if k.rem_euclid(self.modulus) != 0 {
            return None;
        }
        let passthrough = if self.arg_includes_var_power { 0 } else { a };
        let power = (k / self.modulus) * self.power_mult + self.power_off + passthrough;
        Some((self.coeff, power))
    }
}

/// A degreewise family of matrices between two graded free modules whose
/// summands are shifted one-variable polynomial algebras.
#[derive(Debug, Clone)]
pub struct GradedMatrixFamily {
    pub base: BaseRing,
    pub matrices: BTreeMap<i64, Matrix>,
}

/// Builds the graded adjoint of a trace pairing: source summands
/// `S^{shift_i} R` (labelled by powers), target summands `S^{shift_j} R`,
/// with `R = base[v]`, `|v| = var_degree`, and component maps given by
/// the trace rule on `label_i + label_j`.
pub fn trace_gram(
    base: BaseRing,
    var_degree: i64,
    source: &[(i64, i64)], // (label, shift)
    target: &[(i64, i64)],
    rule: &TraceRule,
    window: Window,
) -> GradedMatrixFamily {
    let basis = |summands: &[(i64, i64)], d: i64| -> Vec<(usize, i64)> {
        let mut out = vec![];
        for (idx, &(_, shift)) in summands.iter().enumerate() {
            if var_degree == 0 {
                if d == shift {
                    out.push((idx, 0));
                }
                continue;
            }
            let rem = d - shift;
            if rem % var_degree == 0 && rem / var_degree >= 0 {
                out.push((idx, rem / var_degree));
            }
        }
        out
    };
    let mut matrices = BTreeMap::new();
    for d in window.iter() {
        let src = basis(source, d);
        let dst = basis(target, d);
        let mut mat = Matrix::zero(base, dst.len(), src.len());
        for (j, &(si, a)) in src.iter().enumerate() {
            for (i, &(ti, b)) in dst.iter().enumerate() {
                let labels = source[si].0 + target[ti].0;
                if let Some((c, power)) = rule.apply(labels, a) {
                    if power == b {
                        mat.set(i, j, crate::base::rat(c));
                    }
                }
            }
        }
        matrices.insert(d, mat);
    }
    GradedMatrixFamily {
        base,
        matrices,
    }
}

/// A single power-shift map `u^i -> coeff * u^{i + power_shift}` between
/// two shifted one-variable summands, evaluated degreewise.
#[allow(clippy::too_many_arguments)]
pub fn power_shift_family(
    base: BaseRing,
    var_degree: i64,
    source_shift: i64,
    target_shift: i64,
    power_shift: i64,
    coeff: i64,
    window: Window,
) -> GradedMatrixFamily {
    let mut matrices = BTreeMap::new();
    for d in window.iter() {
        let src_pow = (d - source_shift) % var_degree == 0 && (d - source_shift) / var_degree >= 0;
        let src_dim = usize::from(src_pow);
        let tgt_rem = d - target_shift;
        let tgt_pow = tgt_rem % var_degree == 0 && tgt_rem / var_degree >= 0;
        let tgt_dim = usize::from(tgt_pow);
        let mut mat = Matrix::zero(base, tgt_dim, src_dim);
        if src_dim == 1 && tgt_dim == 1 {
            let i = (d - source_shift) / var_degree;
            let k = tgt_rem / var_degree;
            if k == i + power_shift {
                mat.set(0, 0, crate::base::rat(coeff));
            }
        }
        matrices.insert(d, mat);
    }
    GradedMatrixFamily { base, matrices }
}

/// Degreewise cokernel of a graded matrix family, with the degrees
/// carrying a nonzero piece listed separately.
pub fn discriminant_cokernel(
    family: &GradedMatrixFamily,
    window: Window,
) -> Result<(BTreeMap<i64, FgAbelianShape>, Vec<i64>), HomalgError> {
    let mut shapes = BTreeMap::new();
    let mut nonzero = vec![];
    for d in window.iter() {
        let m = family.matrices.get(&d).ok_or_else(|| {
            HomalgError::InsufficientWindow(format!("no matrix at degree {d}"))
        })?;
        let shape = cokernel_shape(m);
        if !shape.is_zero() {
            nonzero.push(d);
        }
        shapes.insert(d, shape);
    }
    Ok((shapes, nonzero))
}

/// Scales a family by a unit (used for tests of unit-diagonal grams).
pub fn scale_family(family: &GradedMatrixFamily, c: &Rat) -> GradedMatrixFamily {
    GradedMatrixFamily {
        base: family.base,
        matrices: family
            .matrices
            .iter()
            .map(|(d, m)| (*d, m.scale(c)))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adams_summand_gram_at_p_five() {
        // source S^{2i} l, target S^{-2j} l, tr(u^{i+j}) = 4 v^{(i+j)/4};
        // summand maps: x4 on i = 0, x4 v on i = 1, 2, 3.
        let z5 = BaseRing::p_local(5).unwrap();
        let window = Window::new(-20, 20);
        let source: Vec<(i64, i64)> = (0..4).map(|i| (i, 2 * i)).collect();
        let target: Vec<(i64, i64)> = (0..4).map(|j| (j, -2 * j)).collect();
        let rule = TraceRule {
            modulus: 4,
            coeff: 4,
            power_mult: 1,
            power_off: 0,
            arg_includes_var_power: false,
        };
        let fam = trace_gram(z5, 8, &source, &target, &rule, window);
        // degree 0: unit entry 4 (i = j = 0)
        let m0 = &fam.matrices[&0];
        assert_eq!((m0.rows, m0.cols), (1, 1));
        assert_eq!(m0.get(0, 0), &crate::base::rat(4));
        // cokernel: Z(5) exactly in degrees -6, -4, -2
        let (shapes, nonzero) = discriminant_cokernel(&fam, window).unwrap();
        assert_eq!(nonzero, vec![-6, -4, -2]);
        for d in nonzero {
            assert_eq!(shapes[&d], FgAbelianShape::free(1));
        }
    }

    #[test]
    fn unit_diagonal_gram_has_zero_cokernel() {
        let z5 = BaseRing::p_local(5).unwrap();
        let window = Window::new(-8, 8);
        let rule = TraceRule {
            modulus: 1,
            coeff: 1,
            power_mult: 1,
            power_off: 0,
            arg_includes_var_power: false,
        };
        let fam = trace_gram(z5, 2, &[(0, 0)], &[(0, 0)], &rule, window);
        let (_, nonzero) = discriminant_cokernel(&fam, window).unwrap();
        assert!(nonzero.is_empty());
    }

    #[test]
    fn rank_one_group_trace() {
        // tr(1) = |G| gives the 1x1 matrix [|G|].
        let z = BaseRing::Integers;
        let rule = TraceRule {
            modulus: 1,
            coeff: 6,
            power_mult: 0,
            power_off: 0,
            arg_includes_var_power: false,
        };
        let fam = trace_gram(z, 2, &[(0, 0)], &[(0, 0)], &rule, Window::new(0, 0));
        assert_eq!(fam.matrices[&0].get(0, 0), &crate::base::rat(6));
    }

    #[test]
    fn ku_over_ko_unit_component_parity() {
        // tr(u^k) = (1 + (-1)^k) u^k: even powers map by 2 u^k, odd by 0.
        let z = BaseRing::Integers;
        let window = Window::new(0, 12);
        let rule = TraceRule {
            modulus: 2,
            coeff: 2,
            power_mult: 2,
            power_off: 0,
            arg_includes_var_power: true,
        };
        let fam = trace_gram(z, 2, &[(0, 0)], &[(0, 0)], &rule, window);
        for d in (0..=12i64).step_by(2) {
            let a = d / 2;
            let m = &fam.matrices[&d];
            if a % 2 == 0 {
                assert_eq!(m.get(0, 0), &crate::base::rat(2), "degree {d}");
            } else {
                assert!(m.is_zero(), "degree {d}");
            }
        }
    }

    #[test]
    fn ku_over_ko_discriminant_cokernel() {
        // u^i -> u^{i+1} into S^{-2} ku: cokernel Z exactly in degree -2.
        let z = BaseRing::Integers;
        let window = Window::new(-20, 20);
        let fam = power_shift_family(z, 2, 0, -2, 1, 1, window);
        let (shapes, nonzero) = discriminant_cokernel(&fam, window).unwrap();
        assert_eq!(nonzero, vec![-2]);
        assert_eq!(shapes[&-2], FgAbelianShape::free(1));
    }
}
