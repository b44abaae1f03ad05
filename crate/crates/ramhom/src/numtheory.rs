//! Exact arithmetic deciding Tate non-vanishing on `pi_0` for full level
//! structures: Moebius and Euler functions, Ramanujan sums, orders of
//! `GL_2` and `SL_2` over `Z/n`, and the content of the norm image in
//! `Z[1/n]`.

use num::integer::gcd;
use serde::Serialize;

/// Prime factorization with multiplicities, smallest prime first.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n >= 1, "factorize needs a positive integer");
    let mut out = vec![];
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Moebius function.
pub fn mobius(n: u64) -> i64 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Euler totient.
pub fn euler_phi(n: u64) -> u64 {
    let mut phi = n;
    for (p, _) in factorize(n) {
        phi = phi / p * (p - 1);
    }
    phi
}

/// Ramanujan sum `c_n(i)`, the sum of `zeta_n^{ir}` over units `r`,
/// via the closed form `mu(n/g) * phi(n) / phi(n/g)` with `g = gcd(i, n)`.
pub fn ramanujan_sum(n: u64, i: u64) -> i64 {
    let g = gcd(i, n); // gcd(0, n) = n covers i = 0
    let q = n / g;
    mobius(q) * (euler_phi(n) / euler_phi(q)) as i64
}

/// Orders of `GL_2(Z/n)` and `SL_2(Z/n)`:
/// `|GL_2| = phi(n) n^3 prod_{p|n} (1 - 1/p^2)` and `|SL_2| phi(n) = |GL_2|`.
pub fn group_orders(n: u64) -> (u64, u64) {
    assert!(n >= 2);
    let mut gl: u128 = (euler_phi(n) as u128) * (n as u128).pow(3);
    for (p, _) in factorize(n) {
        // multiply by (1 - 1/p^2) = (p^2 - 1)/p^2 exactly
        let p2 = (p as u128) * (p as u128);
        debug_assert_eq!(gl % p2, 0);
        gl = gl / p2 * (p2 - 1);
    }
    let gl = u64::try_from(gl).expect("group order fits u64 at desk scale");
    let sl = gl / euler_phi(n);
    (gl, sl)
}

/// Brute-force matrix enumeration oracle for small `n`.
pub fn group_orders_bruteforce(n: u64) -> (u64, u64) {
    assert!(n <= 12, "enumeration oracle is for small n");
    let n = n as i64;
    let (mut gl, mut sl) = (0u64, 0u64);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let det = (a * d - b * c).rem_euclid(n);
                    if gcd(det, n) == 1 {
                        gl += 1;
                        if det == 1 {
                            sl += 1;
                        }
                    }
                }
            }
        }
    }
    (gl, sl)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NormVerdict {
    /// The norm image on `pi_0` misses a unit: the Tate construction is
    /// nontrivial.
    NontrivialTate,
    /// The `pi_0` cokernel vanishes; nothing follows about the full Tate
    /// spectrum.
    TrivialPi0Cokernel,
}

/// The norm image on `pi_0` of the full-level Tate construction, in the
/// integer content model: ideals of `Z[1/n]` are integers with prime
/// factors coprime to `n`, and the image is generated by
/// `|SL_2| * c_n(i)` for `0 <= i < n` together with `|GL_2|`.
#[derive(Debug, Clone, Serialize)]
pub struct NormReport {
    pub n: u64,
    pub gl2_order: u64,
    pub sl2_order: u64,
    pub image_generators: Vec<i64>,
    /// Generator of the image ideal in `Z[1/n]`: the gcd of the
    /// generators with every prime dividing `n` stripped.
    pub image_gcd_content: u64,
    pub verdict: NormVerdict,
}

/// Decides nontriviality of the Tate construction on `pi_0`.
pub fn norm_image(n: u64) -> NormReport {
    let (gl, sl) = group_orders(n);
    let mut gens: Vec<i64> = (0..n)
        .map(|i| sl as i64 * ramanujan_sum(n, i))
        .collect();
    gens.push(gl as i64);
    let mut g: u64 = 0;
    for &v in &gens {
        g = gcd(g, v.unsigned_abs());
    }
    for (p, _) in factorize(n) {
        while g % p == 0 {
            g /= p;
        }
    }
    let verdict = if g == 1 {
        NormVerdict::TrivialPi0Cokernel
    } else {
        NormVerdict::NontrivialTate
    };
    NormReport {
        n,
        gl2_order: gl,
        sl2_order: sl,
        image_generators: gens,
        image_gcd_content: g,
        verdict,
    }
}

/// Batch reports over an inclusive range.
pub fn verdict_table(from: u64, to: u64) -> Vec<NormReport> {
    (from.max(2)..=to).map(norm_image).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mobius_and_phi_values() {
        assert_eq!(mobius(1), 1);
        assert_eq!(euler_phi(1), 1);
        assert_eq!(mobius(12), 0);
        // factorization oracle: 30 = 2 * 3 * 5
        assert_eq!(factorize(30), vec![(2, 1), (3, 1), (5, 1)]);
        assert_eq!(mobius(30), -1);
        assert_eq!(euler_phi(30), 8);
    }

    #[test]
    fn ramanujan_sum_values() {
        assert_eq!(ramanujan_sum(6, 0), euler_phi(6) as i64);
        // direct root-of-unity summation over units of Z/6
        assert_eq!(ramanujan_sum(6, 1), mobius(6));
        assert_eq!(ramanujan_sum(6, 1), 1);
        // c_4(2) = sum over r in {1,3} of i^{2r} = (-1) + (-1) = -2
        assert_eq!(ramanujan_sum(4, 2), -2);
    }

    #[test]
    fn ramanujan_closed_form_matches_exponential_sums() {
        // cross-check against complex exponential summation to rounding
        for n in 1..=60u64 {
            for i in 0..n {
                let mut re = 0.0f64;
                for r in 1..=n {
                    if gcd(r, n) == 1 {
                        let theta = 2.0 * std::f64::consts::PI * (i * r % n) as f64 / n as f64;
                        re += theta.cos();
                    }
                }
                let exact = ramanujan_sum(n, i) as f64;
                assert!(
                    (re - exact).abs() < 1e-6,
                    "c_{n}({i}): float {re} vs exact {exact}"
                );
            }
        }
    }

    #[test]
    fn group_orders_against_enumeration() {
        for n in 2..=8u64 {
            let (gl, sl) = group_orders(n);
            assert_eq!((gl, sl), group_orders_bruteforce(n), "n = {n}");
        }
        // |GL_2(Z/2)| = 6 with |SL_2| = 6
        assert_eq!(group_orders(2), (6, 6));
        // n = 6: phi(6) * 216 * (3/4) * (8/9) = 288
        assert_eq!(group_orders(6).0, 288);
    }

    #[test]
    fn sl2_at_two_powers() {
        // |SL_2(Z/2^k)| = 2^{3k} * 3/4
        for k in 1..=5u32 {
            let n = 2u64.pow(k);
            let expect = 2u64.pow(3 * k) * 3 / 4;
            assert_eq!(group_orders(n).1, expect, "k = {k}");
        }
    }

    #[test]
    fn norm_verdicts() {
        // odd n: a factor p - 1 is even, and 2 stays non-invertible
        let r5 = norm_image(5);
        assert_eq!(r5.verdict, NormVerdict::NontrivialTate);
        assert_eq!(r5.image_gcd_content % 2, 0);
        // powers of two keep the factor 3
        let r4 = norm_image(4);
        assert_eq!(r4.verdict, NormVerdict::NontrivialTate);
        assert_eq!(r4.image_gcd_content % 3, 0);
        // n = 6: the group order is a unit in Z[1/6]
        assert_eq!(norm_image(6).verdict, NormVerdict::TrivialPi0Cokernel);
        assert_eq!(norm_image(6).image_gcd_content, 1);
    }

    #[test]
    fn verdict_table_ranges() {
        for report in verdict_table(2, 30) {
            let n = report.n;
            if n % 2 == 1 || n.is_power_of_two() {
                assert_eq!(
                    report.verdict,
                    NormVerdict::NontrivialTate,
                    "n = {n} should be nontrivial"
                );
            }
            if [6, 12, 18, 24, 30].contains(&n) {
                assert_eq!(
                    report.verdict,
                    NormVerdict::TrivialPi0Cokernel,
                    "n = {n} should be trivial on pi_0"
                );
            }
        }
        // product of the first three primes
        assert_eq!(norm_image(30).verdict, NormVerdict::TrivialPi0Cokernel);
    }
}
