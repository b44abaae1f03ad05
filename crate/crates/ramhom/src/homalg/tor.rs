use super::resolution::FreeResolution;
use super::table::{BigradedTable, TableEntry};
use super::HomalgError;
use crate::base::{homology_named, HomologyClass, Matrix};
use num::Zero;
use crate::graded::{DegreewiseModule, Window};

/// Bigraded Tor table: tensors a free resolution with a coefficient module
/// and takes degreewise homology. Entry `(n, m)` is `Tor_{n,m}`; the
/// filtration-zero row is the degreewise tensor product.
pub fn tor_table(
    res: &FreeResolution,
    coeffs: &DegreewiseModule,
    m_window: Window,
    max_filtration: usize,
) -> Result<BigradedTable, HomalgError> {
    let ring = res.algebra.base();
    check_coefficient_window(res, coeffs, m_window, max_filtration)?;
    let mut table = BigradedTable::new(ring, "tor");
    for m in m_window.iter() {
        for n in 0..=max_filtration {
            if res.stage_vanishes(n) {
                break;
            }
            let (out, labels) = tensored_matrix(res, coeffs, n, m)?;
            let inn = if res.stage_vanishes(n + 1) {
                Matrix::zero(ring, out.cols, 0)
            } else {
                tensored_matrix(res, coeffs, n + 1, m)?.0
            };
            let (shape, classes) = homology_named(&out, &inn);
            let names = classes
                .iter()
                .filter_map(|c| match c {
                    HomologyClass::Ambient(idx, _) => Some(labels[*idx].clone()),
                    HomologyClass::Synthetic(idx, _) => Some(format!("h{n};{m};{idx}")),
                })
                .collect();
            table.set(n as i64, m, TableEntry::new(shape, names));
        }
    }
    Ok(table)
}

/// The differential of the tensored complex at slot `n`, internal degree
/// `m`, together with labels for the source basis (slot `n`).
///
/// For `n = 0` the differential is the zero map out of `F_0 (x) N`.
fn tensored_matrix(
    res: &FreeResolution,
    coeffs: &DegreewiseModule,
    n: usize,
    m: i64,
) -> Result<(Matrix, Vec<String>), HomalgError> {
    let ring = res.algebra.base();
    let src_gens = res.stage_gens(n);
    let mut src_offsets = vec![0usize];
    let mut labels = vec![];
    for g in &src_gens {
        let basis = coeffs.names(m - g.shift)?;
        for b in &basis {
            labels.push(if n == 0 {
                b.clone()
            } else if b == "1" {
                g.name.clone()
            } else {
                format!("{}*{}", g.name, b)
            });
        }
        src_offsets.push(labels.len());
    }
    let src_dim = labels.len();
    if n == 0 {
        return Ok((Matrix::zero(ring, 0, src_dim), labels));
    }

    let dst_gens = res.stage_gens(n - 1);
    let mut dst_dims = vec![];
    for g in &dst_gens {
        dst_dims.push(coeffs.dim(m - g.shift)?);
    }
    let dst_dim: usize = dst_dims.iter().sum();
    let map = res.stage_map(n);
    let mut mat = Matrix::zero(ring, dst_dim, src_dim);
    for (j, gj) in src_gens.iter().enumerate() {
        let mut row_base = 0usize;
        for (i, _gi) in dst_gens.iter().enumerate() {
            let entry = &map[i][j];
            if !entry.is_zero() {
                let block = coeffs.elem_action(entry, m - gj.shift)?;
                for bi in 0..block.rows {
                    for bj in 0..block.cols {
                        let v = block.get(bi, bj);
                        if !v.is_zero() {
                            mat.set(row_base + bi, src_offsets[j] + bj, v.clone());
                        }
                    }
                }
            }
            row_base += dst_dims[i];
        }
    }
    Ok((mat, labels))
}

fn check_coefficient_window(
    res: &FreeResolution,
    coeffs: &DegreewiseModule,
    m_window: Window,
    max_filtration: usize,
) -> Result<(), HomalgError> {
    let mut max_shift = 0i64;
    let mut min_shift = 0i64;
    for n in 0..=max_filtration + 1 {
        if res.stage_vanishes(n) {
            break;
        }
        for g in res.stage_gens(n) {
            max_shift = max_shift.max(g.shift);
            min_shift = min_shift.min(g.shift);
        }
    }
    let need_lo = m_window.lo - max_shift;
    let need_hi = m_window.hi - min_shift;
    if coeffs.window.lo > need_lo || coeffs.window.hi < need_hi {
        return Err(HomalgError::InsufficientWindow(format!(
            "coefficient module covers [{}, {}] but the Tor window needs [{}, {}]",
            coeffs.window.lo, coeffs.window.hi, need_lo, need_hi
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::FgAbelianShape;
    use crate::graded::{ExpBounds, Poly};
    use crate::homalg::resolution::tests::{paper_resolution, smash_algebra};

    /// Row profile of the THH Tor table for tmf0(2) over tmf at p = 3:
    /// row 0 is Z(3)[a2, a4], odd rows 2k+1 are S^{4+12k} Z(3)[a2], even
    /// positive rows vanish.
    #[test]
    fn thh_tmf02_rows() {
        let window = Window::new(0, 60);
        let res = paper_resolution(window.pad(12));
        let alg = smash_algebra();
        let coeffs = DegreewiseModule::quotient(
            alg,
            vec![(2, 1, Poly::zero())],
            window.pad(72),
            ExpBounds::none(),
        )
        .unwrap();
        let table = tor_table(&res, &coeffs, window, 9).unwrap();

        let poly2_dim = |d: i64| -> usize {
            // monomials a2^j a4^k of degree d
            if d < 0 || d % 4 != 0 {
                0
            } else {
                (0..=d / 8).count()
            }
        };
        for m in 0..=60 {
            // row 0 = Z(3)[a2, a4]
            assert_eq!(
                table.shape(0, m),
                FgAbelianShape::free(poly2_dim(m)),
                "row 0, m = {m}"
            );
            for k in 0..=4i64 {
                // odd rows: shifted Z(3)[a2]
                let n = 2 * k + 1;
                let s = 4 + 12 * k;
                let expect = if m >= s && (m - s) % 4 == 0 { 1 } else { 0 };
                assert_eq!(
                    table.shape(n, m),
                    FgAbelianShape::free(expect),
                    "row {n}, m = {m}"
                );
                // even positive rows vanish
                if 2 * k + 2 <= 9 {
                    assert_eq!(table.shape(2 * k + 2, m), FgAbelianShape::zero());
                }
            }
        }
        // spot-check carried names on row 1: generator e1 * a2^j
        let entry = table.get(1, 8).unwrap();
        assert_eq!(entry.names, vec!["e1*a2"]);
    }

    #[test]
    fn tor_zero_row_is_tensor_product() {
        // Tor_0 = N/(im d1) = M (x) N degreewise; for N = M this is the
        // quotient ring itself.
        let window = Window::new(0, 40);
        let res = paper_resolution(window.pad(12));
        let alg = smash_algebra();
        let coeffs = DegreewiseModule::quotient(
            alg,
            vec![(2, 1, Poly::zero())],
            window.pad(52),
            ExpBounds::none(),
        )
        .unwrap();
        let table = tor_table(&res, &coeffs, window, 2).unwrap();
        for m in 0..=40 {
            let direct = coeffs.dim(m).unwrap();
            assert_eq!(table.shape(0, m), FgAbelianShape::free(direct));
        }
    }
}
