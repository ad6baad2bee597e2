use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qarrange::geometry::{orth_complement, span, Vector};
use qarrange::groups::*;
use qarrange::poly::IntPoly;
use qarrange::scalars::Quat;
use qarrange::systems::{gamma_group, DeltaSpec, GammaSpec, LineSystem, SystemSpec};

fn sys(s: &str) -> LineSystem {
    SystemSpec::parse(s).unwrap().build().unwrap()
}

#[test]
fn w3_q8_order_and_census() {
    let ls = sys("family:Q8:pm1:3");
    let g = reflection_group(&ls, DEFAULT_CAP).unwrap();
    assert_eq!(g.order(), 768);
    let census = g.codim_census();
    assert_eq!(census, IntPoly::from_i64(&[1, 27, 215, 525]));
    assert_eq!(census, family_codim_poly(8, 2, 3));
    let gg = gamma_group(GammaSpec::BinaryDihedral(2)).unwrap().with_delta(DeltaSpec::PlusMinusOne).unwrap();
    assert_eq!(census, family_codim_census(&gg, 3));
}

#[test]
fn family_orders_match_formula() {
    for (spec, m, d, n) in
        [("family:C3:full:2", 3usize, 3usize, 2usize), ("family:C4:index2:3", 4, 2, 3), ("family:Q8:full:2", 8, 8, 2)]
    {
        let g = reflection_group(&sys(spec), DEFAULT_CAP).unwrap();
        let mut want = m.pow(n as u32) * d / m;
        for k in 2..=n {
            want *= k;
        }
        assert_eq!(g.order(), want, "{spec}");
        assert_eq!(g.codim_census(), family_codim_poly(m as u64, d as u64, n as u64), "{spec}");
    }
}

#[test]
fn census_formula_matches_enumeration_for_non_abelian_gammas() {
    for (g, d, n) in
        [(GammaSpec::BinaryDihedral(2), DeltaSpec::Full, 3), (GammaSpec::BinaryTetrahedral, DeltaSpec::Full, 2)]
    {
        let gg = gamma_group(g).unwrap().with_delta(d).unwrap();
        let ls = qarrange::systems::family_lines(&gg, n);
        let grp = reflection_group(&ls, DEFAULT_CAP).unwrap();
        assert_eq!(grp.codim_census(), family_codim_census(&gg, n), "{}", gg.name());
    }
}

fn random_monomial(rng: &mut ChaCha8Rng, gamma: &[Quat], n: usize) -> UnitaryMatrix {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let entries: Vec<Quat> = (0..n).map(|_| gamma[rng.gen_range(0..gamma.len())].clone()).collect();
    UnitaryMatrix::monomial(&perm, &entries)
}

#[test]
fn random_product_decompositions() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let specs =
        [GammaSpec::Cyclic(3), GammaSpec::Cyclic(4), GammaSpec::BinaryDihedral(2), GammaSpec::BinaryTetrahedral];
    let mut cases = 0;
    while cases < 200 {
        let gg = gamma_group(specs[cases % specs.len()]).unwrap();
        let n = 2 + cases % 3;
        let w = random_monomial(&mut rng, gg.elements(), n);
        let (x, v) = product_decomposition(&w, &gg).unwrap();
        assert_eq!(x.mul(&v), w);
        let en = Vector::unit(n, n - 1);
        assert_eq!(v.apply(&en), en, "v fixes e_n");
        // x is 1, diag(1,…,γ), or swaps e_n with e_m·γ
        let xe = x.apply(&en);
        let m = xe.first_nonzero().unwrap();
        assert!(gg.contains(&xe.0[m]));
        if m == n - 1 {
            assert!((0..n - 1).all(|c| x.apply(&Vector::unit(n, c)) == Vector::unit(n, c)));
        } else {
            assert!(x.mul(&x).apply(&en) == en || !gg.is_abelian());
        }
        cases += 1;
    }
}

#[test]
fn decomposition_rejects_non_members() {
    let gg = gamma_group(GammaSpec::Cyclic(3)).unwrap();
    let w = UnitaryMatrix::monomial(&[1, 0], &[Quat::i(), Quat::one()]);
    assert!(matches!(product_decomposition(&w, &gg), Err(GroupError::NotInGroup(_))));
}

/// The moved space `Fix(w)^⊥` of every element is spanned by the lines it
/// contains.
fn moved_spaces_are_flats(ls: &LineSystem) {
    let g = reflection_group(ls, DEFAULT_CAP).unwrap();
    let mut checked = 0;
    g.for_each_element(|w| {
        let moved = orth_complement(&w.fixed_space());
        let inside: Vec<Vector> =
            ls.lines().iter().filter(|l| moved.contains_line(l)).map(|l| l.rep().clone()).collect();
        let r = if inside.is_empty() { 0 } else { span(&inside).unwrap().rank() };
        assert_eq!(r, moved.rank(), "{}", ls.name());
        assert_eq!(w.fixed_codim(), moved.rank());
        checked += 1;
    });
    assert_eq!(checked, g.order());
}

#[test]
fn fixed_spaces_are_flats() {
    for s in ["G(3,3,3)", "B3", "family:Q8:pm1:3", "H3"] {
        moved_spaces_are_flats(&sys(s));
    }
}

#[test]
fn exceptional_orders_by_enumeration() {
    for name in ["Q", "S1"] {
        let g = reflection_group(&sys(name), DEFAULT_CAP).unwrap();
        assert_eq!(Some(g.order() as u64), registry_order(name));
    }
    assert!(matches!(reflection_group(&sys("R"), DEFAULT_CAP), Err(GroupError::CapExceeded(_))));
}

#[test]
fn reflections_are_unitary_with_given_eigenvalue() {
    let ls = sys("family:C3:full:2");
    for (i, l) in ls.lines().iter().enumerate() {
        for d in ls.eigenvalues(i) {
            let r = UnitaryMatrix::reflection(l, d);
            assert!(r.is_unitary());
            assert_eq!(r.fixed_codim(), 1);
            assert_eq!(r.apply(l.rep()), l.rep().mul_right(d));
        }
    }
}
