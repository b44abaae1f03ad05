use super::{BaseRing, Int};
use num::One;
use std::fmt;

/// The shape of a finitely generated module over a base ring:
/// a free rank plus an invariant-factor chain `d1 | d2 | ...`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct FgAbelianShape {
    pub free_rank: usize,
    /// Nontrivial invariant factors, each dividing the next.
    pub torsion: Vec<Int>,
}

impl FgAbelianShape {
    pub fn zero() -> Self {
        FgAbelianShape {
            free_rank: 0,
            torsion: vec![],
        }
    }

    pub fn free(rank: usize) -> Self {
        FgAbelianShape {
            free_rank: rank,
            torsion: vec![],
        }
    }

    pub fn new(free_rank: usize, torsion: Vec<Int>) -> Self {
        let shape = FgAbelianShape { free_rank, torsion };
        debug_assert!(shape.chain_ok(), "invariant factors must form a chain");
        shape
    }

    pub fn torsion_i64(free_rank: usize, torsion: &[i64]) -> Self {
        FgAbelianShape::new(free_rank, torsion.iter().map(|&d| Int::from(d)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    pub fn is_free(&self) -> bool {
        self.torsion.is_empty()
    }

    fn chain_ok(&self) -> bool {
        use num::Integer;
        self.torsion.iter().all(|d| d > &Int::one())
            && self
                .torsion
                .windows(2)
                .all(|w| w[1].is_multiple_of(&w[0]))
    }

    /// Direct sum, renormalizing the invariant-factor chain.
    pub fn direct_sum(&self, other: &FgAbelianShape) -> FgAbelianShape {
        let mut torsion: Vec<Int> = self
            .torsion
            .iter()
            .chain(other.torsion.iter())
            .cloned()
            .collect();
        renormalize_chain(&mut torsion);
        FgAbelianShape {
            free_rank: self.free_rank + other.free_rank,
            torsion,
        }
    }

    /// Is every element killed by `k`? (Free rank must vanish.)
    pub fn annihilated_by(&self, k: &Int) -> bool {
        use num::Integer;
        self.free_rank == 0 && self.torsion.iter().all(|d| k.is_multiple_of(d))
    }

    /// Renders with an explicit base ring, e.g. `Z(3) + Z/9` or `F(2)^2`.
    pub fn display(&self, ring: BaseRing) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let free_name = match ring {
            BaseRing::Integers => "Z".to_string(),
            BaseRing::PLocal(p) => format!("Z({p})"),
            BaseRing::PrimeField(p) => format!("F({p})"),
        };
        let mut parts = vec![];
        if self.free_rank == 1 {
            parts.push(free_name.clone());
        } else if self.free_rank > 1 {
            parts.push(format!("{free_name}^{}", self.free_rank));
        }
        let mut i = 0;
        while i < self.torsion.len() {
            let d = &self.torsion[i];
            let mut count = 1;
            while i + count < self.torsion.len() && &self.torsion[i + count] == d {
                count += 1;
            }
            if count == 1 {
                parts.push(format!("Z/{d}"));
            } else {
                parts.push(format!("(Z/{d})^{count}"));
            }
            i += count;
        }
        parts.join(" + ")
    }
}

/// Sorts prime-power / integer elementary divisors into an invariant chain.
///
/// Inputs need not form a chain; the output does. For clean prime-power
/// inputs (the p-local case) a sort suffices; over `Z` we repeatedly replace
/// offending pairs `(a, b)` by `(gcd, lcm)`.
pub(crate) fn renormalize_chain(divisors: &mut Vec<Int>) {
    use num::Integer;
    divisors.retain(|d| !d.is_one());
    divisors.sort();
    let n = divisors.len();
    if n < 2 {
        return;
    }
    loop {
        let mut changed = false;
        for i in 0..n - 1 {
            let (a, b) = (divisors[i].clone(), divisors[i + 1].clone());
            if !b.is_multiple_of(&a) {
                let g = a.gcd(&b);
                let l = &a / &g * &b;
                divisors[i] = g;
                divisors[i + 1] = l;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        divisors.sort();
    }
}

impl fmt::Display for FgAbelianShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display(BaseRing::Integers))
    }
}

impl std::ops::Add for FgAbelianShape {
    type Output = FgAbelianShape;
    fn add(self, rhs: FgAbelianShape) -> FgAbelianShape {
        self.direct_sum(&rhs)
    }
}
