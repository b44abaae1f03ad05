//! End-to-end page arithmetic on the level-structure Tate computations.

use super::*;
use crate::base::{rat, BaseRing, FgAbelianShape};
use crate::graded::family::{Constraint, LinForm};
use crate::graded::{Bidegree, Window};

fn f2() -> BaseRing {
    BaseRing::prime_field(2).unwrap()
}

fn f3() -> BaseRing {
    BaseRing::prime_field(3).unwrap()
}

/// The C2-Tate E2 page for Z(2)[a1, a3]: even part of F2[a1, a3, z^pm]
/// carried by the four parity families, `z` the filtration class.
///
/// `a3_range = None` is the connective page; an explicit range inverts
/// `a3` (the periodic page).
pub(crate) fn level3_e2(z_range: (i64, i64), a3_range: Option<(i64, i64)>) -> FamilyPage {
    let ambient = vec![
        AmbientGen {
            name: "a1".into(),
            degree: Bidegree::new(0, 2),
            weight: 1,
            range: None,
            square_zero: false,
        },
        AmbientGen {
            name: "a3".into(),
            degree: Bidegree::new(0, 6),
            weight: 1,
            range: a3_range,
            square_zero: false,
        },
        AmbientGen {
            name: "z".into(),
            degree: Bidegree::new(-1, 0),
            weight: 1,
            range: Some(z_range),
            square_zero: false,
        },
    ];
    let factors = vec![
        Factor { name: "A".into(), exponents: vec![2, 0, 0] },  // a1^2
        Factor { name: "S".into(), exponents: vec![0, 2, 0] },  // a3^2
        Factor { name: "Z".into(), exponents: vec![0, 0, 2] },  // z^2
        Factor { name: "Q".into(), exponents: vec![1, 1, 0] },  // a1 a3
        Factor { name: "F".into(), exponents: vec![1, 0, 1] },  // a1 z
        Factor { name: "G".into(), exponents: vec![0, 1, 1] },  // a3 z
    ];
    let three = |lead: Option<usize>| -> Vec<(usize, LinForm)> {
        let mut v = vec![
            (0usize, LinForm::var(3, 0)),
            (1usize, LinForm::var(3, 1)),
            (2usize, LinForm::var(3, 2)),
        ];
        if let Some(extra) = lead {
            v.push((extra, LinForm::constant(3, rat(1))));
        }
        v
    };
    let nat = |i: usize| Constraint::ge0(LinForm::var(3, i));
    let base_cons = |connective: bool| -> Vec<Constraint> {
        if connective {
            vec![nat(0), nat(1)]
        } else {
            vec![nat(0)]
        }
    };
    let connective = a3_range.is_none();
    let families = vec![
        PageFamily {
            name: "d".into(),
            params: vec!["n".into(), "m".into(), "i".into()],
            factor_powers: three(None),
            constraints: base_cons(connective),
        },
        PageFamily {
            name: "e".into(),
            params: vec!["n".into(), "m".into(), "i".into()],
            factor_powers: three(Some(3)),
            constraints: base_cons(connective),
        },
        PageFamily {
            name: "f".into(),
            params: vec!["n".into(), "m".into(), "i".into()],
            factor_powers: three(Some(4)),
            constraints: base_cons(connective),
        },
        PageFamily {
            name: "g".into(),
            params: vec!["n".into(), "m".into(), "i".into()],
            factor_powers: three(Some(5)),
            constraints: base_cons(connective),
        },
    ];
    FamilyPage {
        index: 2,
        coeff: f2(),
        ambient,
        factors,
        families,
        cache: Default::default(),
    }
}

/// The paper's d3 on the six even-part generators.
pub(crate) fn level3_d3() -> DifferentialSpec {
    DifferentialSpec {
        r: 3,
        rules: vec![
            // d3(a1^2) = (a1 z)^3
            DiffRule::Factor { factor: 0, value: PagePoly::monomial(rat(1), vec![3, 0, 3]) },
            // d3(a3^2) = a1 a3^2 z^3
            DiffRule::Factor { factor: 1, value: PagePoly::monomial(rat(1), vec![1, 2, 3]) },
            // d3(z^2) = a1 z^5
            DiffRule::Factor { factor: 2, value: PagePoly::monomial(rat(1), vec![1, 0, 5]) },
            // d3(a1 a3) = 0
            DiffRule::Factor { factor: 3, value: PagePoly::zero() },
            // d3(a1 z) = 0
            DiffRule::Factor { factor: 4, value: PagePoly::zero() },
            // d3(a3 z) = (a1 a3) z^4
            DiffRule::Factor { factor: 5, value: PagePoly::monomial(rat(1), vec![1, 1, 4]) },
        ],
    }
}

/// The paper's closed-form d3 on the four families.
fn level3_d3_families() -> DifferentialSpec {
    let nmi = LinForm::from_i64(&[1, 1, 1], 0);
    let nmi1 = LinForm::from_i64(&[1, 1, 1], 1);
    let shift = |dn: i64, di: i64| -> Vec<LinForm> {
        vec![
            LinForm::from_i64(&[1, 0, 0], dn),
            LinForm::from_i64(&[0, 1, 0], 0),
            LinForm::from_i64(&[0, 0, 1], di),
        ]
    };
    DifferentialSpec {
        r: 3,
        rules: vec![
            DiffRule::Family {
                family: 0,
                guard: vec![],
                coeff: nmi.clone(),
                target_family: 2,
                target_params: shift(0, 1),
            },
            DiffRule::Family {
                family: 1,
                guard: vec![],
                coeff: nmi.clone(),
                target_family: 3,
                target_params: shift(1, 1),
            },
            DiffRule::Family {
                family: 2,
                guard: vec![],
                coeff: nmi,
                target_family: 0,
                target_params: shift(1, 2),
            },
            DiffRule::Family {
                family: 3,
                guard: vec![],
                coeff: nmi1,
                target_family: 1,
                target_params: shift(0, 2),
            },
        ],
    }
}

fn grid(n: Window, m: Window) -> Vec<Bidegree> {
    let mut v = vec![];
    for nn in n.iter() {
        for mm in m.iter() {
            v.push(Bidegree::new(nn, mm));
        }
    }
    v
}

#[test]
fn leibniz_reproduces_family_formulas() {
    let page = level3_e2((-20, 20), None);
    let degrees: Vec<Bidegree> = grid(Window::new(-10, 10), Window::new(0, 30));
    crosscheck_rules(&page, &level3_d3(), &level3_d3_families(), &degrees).unwrap();
}

#[test]
fn connective_level3_page_turn() {
    let page = level3_e2((-24, 24), None);
    let d3 = level3_d3();
    let opts = TurnOptions::for_page(&page, &d3);
    let n_win = Window::new(-16, 16);
    let m_win = Window::new(0, 30);
    let cells = grid(n_win, m_win);
    check_d_squared(&page, &d3, &cells, &opts).unwrap();
    let e4 = turn_page_at(&page, &d3, &cells, &opts).unwrap();
    // paper: E4 = {d(0,m,i) : m+i even} + {g(0,m,i) : m+i odd}
    for (&(n, m), entry) in e4.nonzero() {
        if entry.partial {
            continue;
        }
        for name in &entry.names {
            assert!(
                name.starts_with("d(0,") || name.starts_with("g(0,"),
                "unexpected E4 class {name} at ({n},{m})"
            );
        }
    }
    // spot-check: bidegree of d(0,2,1) is (-2, 24); m+i = 3 odd -> dies
    assert!(e4
        .get(-2, 24)
        .map_or(true, |e| !e.names.contains(&"d(0,2,1)".to_string())));
    // d(0,2,0): m+i = 2 even -> survives at (0, 24)
    let e = e4.get(0, 24).expect("entry at (0,24)");
    assert!(e.names.contains(&"d(0,2,0)".to_string()));
}

/// Declared E4 for the connective page: families d4(m, i) = S^m Z^i with
/// m + i even, g4(m, i) = G S^m Z^i with m + i odd.
fn level3_e4() -> FamilyPage {
    let mut page = level3_e2((-24, 24), None);
    page.index = 4;
    let powers = |lead: Option<usize>| -> Vec<(usize, LinForm)> {
        let mut v = vec![(1usize, LinForm::var(2, 0)), (2usize, LinForm::var(2, 1))];
        if let Some(extra) = lead {
            v.push((extra, LinForm::constant(2, rat(1))));
        }
        v
    };
    page.families = vec![
        PageFamily {
            name: "d4".into(),
            params: vec!["m".into(), "i".into()],
            factor_powers: powers(None),
            constraints: vec![
                Constraint::ge0(LinForm::var(2, 0)),
                Constraint::mod_eq(LinForm::from_i64(&[1, 1], 0), 2, 0),
            ],
        },
        PageFamily {
            name: "g4".into(),
            params: vec!["m".into(), "i".into()],
            factor_powers: powers(Some(5)),
            constraints: vec![
                Constraint::ge0(LinForm::var(2, 0)),
                Constraint::mod_eq(LinForm::from_i64(&[1, 1], 1), 2, 0),
            ],
        },
    ];
    page
}

/// d7 family rules: d4(m,i) -> ((m-3i)/2) g4(m, i+3),
/// g4(m,i) -> ((m-3i-1)/2) d4(m+1, i+4).
fn level3_d7() -> DifferentialSpec {
    DifferentialSpec {
        r: 7,
        rules: vec![
            DiffRule::Family {
                family: 0,
                guard: vec![],
                coeff: LinForm {
                    coeffs: vec![crate::base::ratio(1, 2), crate::base::ratio(-3, 2)],
                    konst: rat(0),
                },
                target_family: 1,
                target_params: vec![
                    LinForm::from_i64(&[1, 0], 0),
                    LinForm::from_i64(&[0, 1], 3),
                ],
            },
            DiffRule::Family {
                family: 1,
                guard: vec![],
                coeff: LinForm {
                    coeffs: vec![crate::base::ratio(1, 2), crate::base::ratio(-3, 2)],
                    konst: crate::base::ratio(-1, 2),
                },
                target_family: 0,
                target_params: vec![
                    LinForm::from_i64(&[1, 0], 1),
                    LinForm::from_i64(&[0, 1], 4),
                ],
            },
        ],
    }
}

#[test]
fn connective_level3_e8_is_zeta_powers() {
    let e4 = level3_e4();
    let d7 = level3_d7();
    let opts = TurnOptions::for_page(&e4, &d7);
    let n_win = Window::new(-16, 16);
    let m_win = Window::new(0, 24);
    let cells = grid(n_win, m_win);
    check_d_squared(&e4, &d7, &cells, &opts).unwrap();
    let e8 = turn_page_at(&e4, &d7, &cells, &opts).unwrap();
    for (&(n, m), entry) in e8.nonzero() {
        if entry.partial {
            continue;
        }
        assert_eq!(m, 0, "E8 class off the zero row at ({n},{m})");
        assert_eq!(n.rem_euclid(8), 0, "E8 class at filtration {n}");
        assert_eq!(entry.shape, FgAbelianShape::free(1));
    }
    // zeta^8 = z^8 = d4(0, 4) survives at (-8, 0)
    let e = e8.get(-8, 0).expect("entry at (-8, 0)");
    assert!(!e.partial);
    assert_eq!(e.names, vec!["d4(0,4)"]);
    // and (8, 0) carries zeta^{-8}
    assert!(e8.get(8, 0).is_some());
    // abutment: F2 in degrees 0 mod 8 within the safe window
    let ab = assemble_abutment(&e8);
    for (d, deg) in &ab {
        if deg.complete && !deg.shape.is_zero() {
            assert_eq!(d.rem_euclid(8), 0);
            assert_eq!(deg.shape, FgAbelianShape::free(1));
        }
    }
    let verdict = detect_collapse(&e8, false, 8, 20);
    assert_eq!(verdict, CollapseVerdict::RowZeroOnly);
}

#[test]
fn sigma3_pages() {
    // F3[alpha, beta^pm, Delta^pm]/alpha^2 with connective support.
    let ambient = vec![
        AmbientGen {
            name: "alpha".into(),
            degree: Bidegree::new(-1, 4),
            weight: 0,
            range: None,
            square_zero: true,
        },
        AmbientGen {
            name: "beta".into(),
            degree: Bidegree::new(-2, 12),
            weight: 0,
            range: Some((-40, 40)),
            square_zero: false,
        },
        AmbientGen {
            name: "Delta".into(),
            degree: Bidegree::new(0, 24),
            weight: 0,
            range: Some((-20, 20)),
            square_zero: false,
        },
    ];
    let factors = vec![
        Factor { name: "al".into(), exponents: vec![1, 0, 0] },
        Factor { name: "be".into(), exponents: vec![0, 1, 0] },
        Factor { name: "De".into(), exponents: vec![0, 0, 1] },
    ];
    let families = vec![
        PageFamily {
            name: "b".into(),
            params: vec!["k".into(), "l".into()],
            factor_powers: vec![(1, LinForm::var(2, 0)), (2, LinForm::var(2, 1))],
            constraints: vec![Constraint::ge0(LinForm::from_i64(&[1, 2], 0))],
        },
        PageFamily {
            name: "a".into(),
            params: vec!["k".into(), "l".into()],
            factor_powers: vec![
                (0, LinForm::constant(2, rat(1))),
                (1, LinForm::var(2, 0)),
                (2, LinForm::var(2, 1)),
            ],
            constraints: vec![Constraint::ge0(LinForm::from_i64(&[3, 6], 1))],
        },
    ];
    let page2 = FamilyPage {
        index: 2,
        coeff: f3(),
        ambient,
        factors,
        families,
        cache: Default::default(),
    };
    let d5 = DifferentialSpec {
        r: 5,
        rules: vec![
            DiffRule::Factor { factor: 0, value: PagePoly::zero() },
            DiffRule::Factor { factor: 1, value: PagePoly::zero() },
            // d5(Delta) = alpha beta^2
            DiffRule::Factor { factor: 2, value: PagePoly::monomial(rat(1), vec![1, 2, 0]) },
        ],
    };
    let opts = TurnOptions::for_page(&page2, &d5);
    let cells = grid(Window::new(-30, 30), Window::new(-6, 120));
    check_d_squared(&page2, &d5, &cells, &opts).unwrap();
    let e6 = turn_page_at(&page2, &d5, &cells, &opts).unwrap();
    // survivors: b(k, l) with l = 0 mod 3, a(k, l) with l = 2 mod 3
    for (&(n, m), entry) in e6.nonzero() {
        if entry.partial {
            continue;
        }
        for name in &entry.names {
            let inner = name
                .trim_start_matches("b(")
                .trim_start_matches("a(")
                .trim_end_matches(')');
            let l: i64 = inner.split(',').nth(1).unwrap().parse().unwrap();
            if name.starts_with("b(") {
                assert_eq!(l.rem_euclid(3), 0, "{name} at ({n},{m})");
            } else {
                assert_eq!(l.rem_euclid(3), 2, "{name} at ({n},{m})");
            }
        }
    }

    // Declared E6 in the paper's basis: b6 = beta^k Delta3^l, a6 = AD2 ...
    let factors6 = vec![
        Factor { name: "AD2".into(), exponents: vec![1, 0, 2] },
        Factor { name: "be".into(), exponents: vec![0, 1, 0] },
        Factor { name: "De3".into(), exponents: vec![0, 0, 3] },
    ];
    let families6 = vec![
        PageFamily {
            name: "b6".into(),
            params: vec!["k".into(), "l".into()],
            factor_powers: vec![(1, LinForm::var(2, 0)), (2, LinForm::var(2, 1))],
            constraints: vec![Constraint::ge0(LinForm::from_i64(&[1, 6], 0))],
        },
        PageFamily {
            name: "a6".into(),
            params: vec!["k".into(), "l".into()],
            factor_powers: vec![
                (0, LinForm::constant(2, rat(1))),
                (1, LinForm::var(2, 0)),
                (2, LinForm::var(2, 1)),
            ],
            constraints: vec![Constraint::ge0(LinForm::from_i64(&[3, 18], 13))],
        },
    ];
    let page6 = FamilyPage {
        index: 6,
        coeff: f3(),
        ambient: page2.ambient.clone(),
        factors: factors6,
        families: families6,
        cache: Default::default(),
    };
    // ranks of computed E6 match the declared page on interior cells
    let zero_pad = vec![0i64; 3];
    for (&(n, m), entry) in e6.nonzero() {
        if entry.partial {
            continue;
        }
        let declared = page6
            .instances_at(Bidegree::new(n, m), &zero_pad)
            .unwrap()
            .len();
        assert_eq!(
            entry.shape.free_rank, declared,
            "E6 rank mismatch at ({n},{m})"
        );
    }

    let d9 = DifferentialSpec {
        r: 9,
        rules: vec![
            // d9(alpha Delta^2) = beta^5
            DiffRule::Factor { factor: 0, value: PagePoly::monomial(rat(1), vec![0, 5, 0]) },
            DiffRule::Factor { factor: 1, value: PagePoly::zero() },
            DiffRule::Factor { factor: 2, value: PagePoly::zero() },
        ],
    };
    let opts9 = TurnOptions::for_page(&page6, &d9);
    let cells9 = grid(Window::new(-40, 40), Window::new(-2, 2));
    check_d_squared(&page6, &d9, &cells9, &opts9).unwrap();
    let e10 = turn_page_at(&page6, &d9, &cells9, &opts9).unwrap();
    for (&(n, m), entry) in e10.nonzero() {
        if entry.partial {
            continue;
        }
        assert_eq!(m, 0);
        assert_eq!(n.rem_euclid(12), 0, "entry at ({n},{m})");
        assert_eq!(entry.shape, FgAbelianShape::free(1));
    }
    // (beta^-6 Delta^3)^1 = b6(-6, 2)? No: Delta3-exponent counts Delta^3
    // blocks: beta^-6 Delta^3 = b6(-6, 1), at bidegree (12, 0).
    let e = e10.get(12, 0).expect("entry at (12, 0)");
    assert_eq!(e.names, vec!["b6(-6,1)"]);
}
