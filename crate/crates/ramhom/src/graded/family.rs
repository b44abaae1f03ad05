//! Linear forms, constraints and bounded enumeration over integer parameters.
//!
//! Indexed basis families (`inv(n,m)` in degree `-4n-8m-1`, page classes
//! `d(n,m,i)` and friends) describe their degrees, guards and differential
//! targets with affine forms in the parameters. Enumeration intersects the
//! constraint region with degree equations and exponent windows, so each
//! query is a finite box scan.

use crate::base::{rat, Rat};
use num::{Signed, Zero};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinForm {
    /// Coefficient per parameter.
    pub coeffs: Vec<Rat>,
    pub konst: Rat,
}

impl LinForm {
    pub fn constant(nparams: usize, c: Rat) -> Self {
        LinForm {
            coeffs: vec![Rat::zero(); nparams],
            konst: c,
        }
    }

    pub fn var(nparams: usize, i: usize) -> Self {
        let mut coeffs = vec![Rat::zero(); nparams];
        coeffs[i] = rat(1);
        LinForm {
            coeffs,
            konst: Rat::zero(),
        }
    }

    pub fn from_i64(coeffs: &[i64], konst: i64) -> Self {
        LinForm {
            coeffs: coeffs.iter().map(|&c| rat(c)).collect(),
            konst: rat(konst),
        }
    }

    pub fn eval(&self, params: &[i64]) -> Rat {
        let mut acc = self.konst.clone();
        for (c, &p) in self.coeffs.iter().zip(params) {
            if !c.is_zero() {
                acc += c * rat(p);
            }
        }
        acc
    }

    /// Evaluates and demands an integer value.
    pub fn eval_int(&self, params: &[i64]) -> Option<i64> {
        let v = self.eval(params);
        if v.is_integer() {
            i64::try_from(v.numer()).ok()
        } else {
            None
        }
    }

    pub fn scale(&self, c: &Rat) -> LinForm {
        LinForm {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
            konst: &self.konst * c,
        }
    }

    pub fn add(&self, other: &LinForm) -> LinForm {
        LinForm {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
            konst: &self.konst + &other.konst,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }
}

impl fmt::Display for LinForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if first {
                write!(f, "{c}*p{i}")?;
            } else {
                write!(f, " + {c}*p{i}")?;
            }
            first = false;
        }
        if first {
            write!(f, "{}", self.konst)
        } else if !self.konst.is_zero() {
            write!(f, " + {}", self.konst)
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstraintKind {
    /// `form >= 0`
    Ge0,
    /// `form ≡ residue (mod modulus)`
    ModEq { modulus: i64, residue: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub form: LinForm,
    pub kind: ConstraintKind,
}

impl Constraint {
    pub fn ge0(form: LinForm) -> Self {
        Constraint {
            form,
            kind: ConstraintKind::Ge0,
        }
    }

    pub fn mod_eq(form: LinForm, modulus: i64, residue: i64) -> Self {
        Constraint {
            form,
            kind: ConstraintKind::ModEq {
                modulus,
                residue: residue.rem_euclid(modulus),
            },
        }
    }

    pub fn holds(&self, params: &[i64]) -> bool {
        let v = self.form.eval(params);
        match &self.kind {
            ConstraintKind::Ge0 => !v.is_negative(),
            ConstraintKind::ModEq { modulus, residue } => {
                if !v.is_integer() {
                    return false;
                }
                match i64::try_from(v.numer()) {
                    Ok(n) => n.rem_euclid(*modulus) == *residue,
                    Err(_) => false,
                }
            }
        }
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum FamilyError {
    #[error("parameter p{0} cannot be bounded from the constraints")]
    Unbounded(usize),
    #[error("enumeration box exceeds {0} points")]
    BoxTooLarge(u64),
}

const MAX_BOX: u64 = 8_000_000;
const PROPAGATION_ROUNDS: usize = 40;

/// A linear form with cleared denominators, for fast propagation.
struct IntForm {
    coeffs: Vec<i128>,
    konst: i128,
}

impl IntForm {
    /// Scales the rational form by the lcm of its denominators; the sign
    /// is preserved, so `form >= 0` is equivalent.
    fn from_lin(form: &LinForm) -> IntForm {
        use num::Integer;
        let mut lcm = num::BigInt::from(1);
        for c in form.coeffs.iter().chain(std::iter::once(&form.konst)) {
            lcm = lcm.lcm(c.denom());
        }
        let to_int = |c: &Rat| -> i128 {
            let v = c * Rat::from_integer(lcm.clone());
            i128::try_from(v.numer()).expect("scaled coefficient fits i128")
        };
        IntForm {
            coeffs: form.coeffs.iter().map(to_int).collect(),
            konst: to_int(&form.konst),
        }
    }

    fn eval(&self, params: &[i64]) -> i128 {
        let mut acc = self.konst;
        for (c, &p) in self.coeffs.iter().zip(params) {
            acc += c * p as i128;
        }
        acc
    }
}

/// Enumerates all integer parameter vectors satisfying every equation
/// `form = value` and every constraint, in lexicographic order.
///
/// Bounds come from interval propagation over the inequalities (each
/// equation contributes both directions), so callers never supply boxes.
pub fn enumerate_params(
    nparams: usize,
    equations: &[(LinForm, Rat)],
    constraints: &[Constraint],
) -> Result<Vec<Vec<i64>>, FamilyError> {
    if nparams == 0 {
        let ok = equations.iter().all(|(f, v)| &f.konst == v)
            && constraints.iter().all(|c| c.holds(&[]));
        return Ok(if ok { vec![vec![]] } else { vec![] });
    }

    // All one-sided bounds: form >= 0, and equations as forms that must
    // evaluate to exactly zero.
    let mut ineqs: Vec<IntForm> = vec![];
    let mut eq_forms: Vec<IntForm> = vec![];
    for (f, v) in equations {
        let mut diff = f.clone();
        diff.konst -= v; // f - v
        let int = IntForm::from_lin(&diff);
        ineqs.push(IntForm {
            coeffs: int.coeffs.iter().map(|c| -c).collect(),
            konst: -int.konst,
        });
        eq_forms.push(IntForm::from_lin(&diff));
        ineqs.push(int);
    }
    let mut mod_checks: Vec<&Constraint> = vec![];
    for c in constraints {
        match c.kind {
            ConstraintKind::Ge0 => ineqs.push(IntForm::from_lin(&c.form)),
            ConstraintKind::ModEq { .. } => mod_checks.push(c),
        }
    }

    let mut lo = vec![None::<i64>; nparams];
    let mut hi = vec![None::<i64>; nparams];
    for _ in 0..PROPAGATION_ROUNDS {
        let mut changed = false;
        for form in &ineqs {
            for p in 0..nparams {
                let cp = form.coeffs[p];
                if cp == 0 {
                    continue;
                }
                // form = cp*p + rest >= 0 and rest <= rest_max give the
                // necessary bound cp*p >= -rest_max. Computing rest_max
                // needs hi[q] where cq > 0 and lo[q] where cq < 0.
                let mut rest_max = form.konst;
                let mut ok = true;
                for q in 0..nparams {
                    if q == p {
                        continue;
                    }
                    let cq = form.coeffs[q];
                    if cq == 0 {
                        continue;
                    }
                    let extreme = if cq > 0 { hi[q] } else { lo[q] };
                    match extreme {
                        Some(x) => rest_max += cq * x as i128,
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if !ok {
                    continue;
                }
                if cp > 0 {
                    let b = div_ceil_i128(-rest_max, cp);
                    if lo[p].map_or(true, |cur| b > cur as i128) {
                        lo[p] = Some(i64::try_from(b).expect("bound fits i64"));
                        changed = true;
                    }
                } else {
                    let b = div_floor_i128(-rest_max, cp);
                    if hi[p].map_or(true, |cur| b < cur as i128) {
                        hi[p] = Some(i64::try_from(b).expect("bound fits i64"));
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut box_size: u64 = 1;
    for p in 0..nparams {
        let (Some(l), Some(h)) = (lo[p], hi[p]) else {
            return Err(FamilyError::Unbounded(p));
        };
        if h < l {
            return Ok(vec![]);
        }
        box_size = box_size.saturating_mul((h - l + 1) as u64);
        if box_size > MAX_BOX {
            return Err(FamilyError::BoxTooLarge(MAX_BOX));
        }
    }

    let mut out = vec![];
    let mut cur = vec![0i64; nparams];
    let ge_forms: Vec<&IntForm> = ineqs.iter().collect();
    scan(
        0,
        &mut cur,
        &lo,
        &hi,
        &eq_forms,
        &ge_forms,
        &mod_checks,
        &mut out,
    );
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn scan(
    level: usize,
    cur: &mut Vec<i64>,
    lo: &[Option<i64>],
    hi: &[Option<i64>],
    eq_forms: &[IntForm],
    ge_forms: &[&IntForm],
    mod_checks: &[&Constraint],
    out: &mut Vec<Vec<i64>>,
) {
    if level == cur.len() {
        if eq_forms.iter().all(|f| f.eval(cur) == 0)
            && ge_forms.iter().all(|f| f.eval(cur) >= 0)
            && mod_checks.iter().all(|c| c.holds(cur))
        {
            out.push(cur.clone());
        }
        return;
    }
    for x in lo[level].unwrap()..=hi[level].unwrap() {
        cur[level] = x;
        scan(level + 1, cur, lo, hi, eq_forms, ge_forms, mod_checks, out);
    }
}

fn div_ceil_i128(a: i128, b: i128) -> i128 {
    debug_assert!(b > 0);
    let q = a / b;
    if a % b != 0 && a > 0 {
        q + 1
    } else {
        q
    }
}

fn div_floor_i128(a: i128, b: i128) -> i128 {
    // b < 0 in the caller: floor(a / b)
    let q = a / b;
    if a % b != 0 && ((a > 0) != (b > 0)) {
        q - 1
    } else {
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_slice_of_inverse_family() {
        // degree(-4n - 8m - 1) = -13 with n, m >= 1  =>  (1, 1)
        let deg = LinForm::from_i64(&[-4, -8], -1);
        let n_ge_1 = Constraint::ge0(LinForm::from_i64(&[1, 0], -1));
        let m_ge_1 = Constraint::ge0(LinForm::from_i64(&[0, 1], -1));
        let sols = enumerate_params(2, &[(deg, rat(-13))], &[n_ge_1, m_ge_1]).unwrap();
        assert_eq!(sols, vec![vec![1, 1]]);
    }

    #[test]
    fn parity_constraints_filter() {
        let deg = LinForm::from_i64(&[2], 0);
        let even = Constraint::mod_eq(LinForm::from_i64(&[1], 0), 2, 0);
        let ge = Constraint::ge0(LinForm::from_i64(&[1], 0));
        let le = Constraint::ge0(LinForm::from_i64(&[-1], 10));
        let sols = enumerate_params(1, &[], &[even, ge, le, Constraint::ge0(deg)]).unwrap();
        assert_eq!(sols, vec![vec![0], vec![2], vec![4], vec![6], vec![8], vec![10]]);
    }

    #[test]
    fn unbounded_reported() {
        let err = enumerate_params(1, &[], &[]).unwrap_err();
        assert_eq!(err, FamilyError::Unbounded(0));
    }
}
