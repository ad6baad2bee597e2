use std::collections::{BTreeMap, HashSet};

use qarrange::geometry::{angle_class, reflect_line, span, AngleClass, Line, Vector};
use qarrange::groups::{close_group, UnitaryMatrix};
use qarrange::scalars::Quat;
use qarrange::systems::*;

fn sys(s: &str) -> LineSystem {
    SystemSpec::parse(s).unwrap().build().unwrap()
}

#[test]
fn exceptional_line_counts() {
    for (name, n, dim) in
        [("Q", 63, 3), ("R", 315, 3), ("S1", 36, 4), ("S2", 72, 4), ("S3", 180, 4), ("T", 180, 4), ("U", 165, 5)]
    {
        let ls = exceptional_lines(name).unwrap();
        assert_eq!(ls.len(), n, "{name}");
        assert_eq!(ls.dim(), dim, "{name}");
        assert_eq!(ls.name(), name);
    }
    assert!(matches!(exceptional_lines("V"), Err(SystemError::UnknownSystem(_))));
}

#[test]
fn q_uses_three_angles() {
    let q = exceptional_lines("Q").unwrap();
    let tab = q.angle_table();
    let mut seen = HashSet::new();
    for i in 0..q.len() {
        for j in 0..q.len() {
            if i != j {
                seen.insert(tab.angle(i, j));
            }
        }
    }
    let want: HashSet<_> = [AngleClass::Right, AngleClass::Pi3, AngleClass::Pi4].into_iter().map(Some).collect();
    assert_eq!(seen, want);
    let e1 = q.index_of(&Line::from_ints(&[1, 0, 0])).unwrap();
    let census = tab.census_from(e1);
    assert_eq!(census[&Some(AngleClass::Right)], 6);
    assert_eq!(census[&Some(AngleClass::Pi3)], 32);
    assert_eq!(census[&Some(AngleClass::Pi4)], 24);
}

#[test]
fn r_angle_census_from_coordinate_line() {
    let r = exceptional_lines("R").unwrap();
    let e1 = r.index_of(&Line::from_ints(&[1, 0, 0])).unwrap();
    let want: BTreeMap<_, _> = R_CENSUS.iter().map(|&(a, c)| (Some(a), c)).collect();
    assert_eq!(r.angle_table().census_from(e1), want);
    assert!(r.angle_table().all_in_catalog());
}

#[test]
fn r_seed_search_regression() {
    let q8: Vec<[i64; 4]> =
        [[2, 0, 0, 0], [0, 2, 0, 0], [0, 0, 2, 0], [0, 0, 0, 2]].iter().flat_map(|u| [*u, u.map(|x| -x)]).collect();
    assert_eq!(search_r_seed(&q8).unwrap(), None);
    let mut halves = Vec::new();
    for s in 0..16 {
        halves.push([0, 1, 2, 3].map(|b| if s >> b & 1 == 1 { -1 } else { 1 }));
    }
    let found = search_r_seed(&halves).unwrap().expect("a seed among the half-integer units");
    let mut seed: Vec<Line> = sys("family:Q8:pm1:3").lines().to_vec();
    seed.push(r_seed_line(found.0, found.1));
    assert_eq!(reflection_closure(&seed, 400).unwrap().len(), 315);
    assert!(halves.contains(&R_SEED_UNITS.0) && halves.contains(&R_SEED_UNITS.1));
}

#[test]
fn s1_frames() {
    let s1 = exceptional_lines("S1").unwrap();
    let frames = s1.orthogonal_frames().expect("orthogonality is an equivalence relation");
    assert_eq!(frames.len(), 9);
    assert!(frames.iter().all(|f| f.len() == 4));
    assert!(exceptional_lines("S2").unwrap().orthogonal_frames().is_none());
}

#[test]
fn t_as_conjugation_orbit() {
    let t = exceptional_lines("T").unwrap();
    for left in [true, false] {
        let lines = t_conjugation_lines(left).unwrap();
        assert_eq!(lines.len(), 120);
        assert!(lines.iter().all(|l| t.index_of(l).is_some()));
    }
    let h4 = sys("H4");
    assert_eq!(h4.len(), 60);
    assert!(h4.lines().iter().all(|l| t.index_of(l).is_some()));
}

#[test]
fn u_change_of_basis_matches() {
    let m = UnitaryMatrix::from_rows(u_change_of_basis());
    assert!(m.is_unitary());
    let u = exceptional_lines("U").unwrap();
    let cyclic = u_cyclic_lines();
    assert_eq!(cyclic.len(), 165);
    let mapped: HashSet<Line> = cyclic.iter().map(|l| Line::new(m.apply(l.rep())).unwrap()).collect();
    let ours: HashSet<Line> = u.lines().iter().cloned().collect();
    assert_eq!(mapped, ours);
}

#[test]
fn u_contains_d4_and_a_coordinate_line() {
    let u = exceptional_lines("U").unwrap();
    for l in sys("D4").lines() {
        let mut v = l.rep().0.clone();
        v.push(Quat::zero());
        assert!(u.index_of(&Line::new(Vector(v)).unwrap()).is_some());
    }
    assert!(u.index_of(&Line::from_ints(&[0, 0, 0, 0, 1])).is_some());
}

#[test]
fn angle_determines_product_order() {
    let pairs = [
        (sys("A2"), AngleClass::Pi3, 6),
        (sys("B2"), AngleClass::Pi4, 8),
        (sys("H3"), AngleClass::Pi5, 10),
        (sys("H3"), AngleClass::TwoPi5, 10),
        (sys("A1*A1"), AngleClass::Right, 4),
    ];
    for (ls, class, order) in pairs {
        let tab = ls.angle_table();
        let (i, j) = (0..ls.len())
            .flat_map(|i| (0..ls.len()).map(move |j| (i, j)))
            .find(|&(i, j)| i != j && tab.angle(i, j) == Some(class))
            .unwrap();
        let m1 = Quat::from_int(-1);
        let g = close_group(
            &[UnitaryMatrix::reflection(ls.line(i), &m1), UnitaryMatrix::reflection(ls.line(j), &m1)],
            1000,
        )
        .unwrap();
        assert_eq!(g.order(), order, "{class}");
        assert_eq!(2 * class.product_order(), order as u64);
    }
}

#[test]
fn star_is_unique_third_line() {
    for name in ["Q", "S1", "S2"] {
        let ls = exceptional_lines(name).unwrap();
        let tab = ls.angle_table();
        for k in 0..ls.len() {
            for l in 0..ls.len() {
                if k == l || tab.angle(k, l) != Some(AngleClass::Pi3) {
                    continue;
                }
                let plane = span(&[ls.line(k).rep().clone(), ls.line(l).rep().clone()]).unwrap();
                let thirds: Vec<usize> = (0..ls.len())
                    .filter(|&m| m != k && m != l && plane.contains_line(ls.line(m)))
                    .filter(|&m| tab.angle(m, k) == Some(AngleClass::Pi3) && tab.angle(m, l) == Some(AngleClass::Pi3))
                    .collect();
                assert_eq!(thirds.len(), 1, "{name}");
                assert_eq!(ls.line(thirds[0]), &reflect_line(ls.line(k), ls.line(l)));
            }
        }
    }
}

#[test]
fn family_counts() {
    assert_eq!(sys("family:C3:triv:3").len(), 9);
    assert_eq!(sys("G(3,3,3)").len(), 9);
    assert_eq!(sys("family:C3:full:3").len(), 12);
    assert_eq!(sys("family:Q8:pm1:3").len(), 27);
    assert_eq!(sys("family:Q8:full:4").len(), 4 * 3 / 2 * 8 + 4);
    assert_eq!(sys("family:C2:triv:4").len(), 12);
    let fam = sys("family:Q8:pm1:3");
    assert!(fam.is_star_closed() && fam.only_order_two());
    let c3 = sys("family:C3:full:3");
    assert_eq!(c3.n_hyperplanes(), 12);
    assert_eq!(c3.n_reflections(), 9 + 3 * 2);
}

#[test]
fn family_rejects_bad_delta() {
    let q8 = gamma_group(GammaSpec::BinaryDihedral(2)).unwrap();
    assert!(matches!(q8.clone().with_delta(DeltaSpec::Trivial), Err(SystemError::IllegalDelta { .. })));
    assert!(matches!(q8.with_delta(DeltaSpec::Index(3)), Err(SystemError::IllegalDelta { .. })));
    assert!(SystemSpec::parse("family:C7:full:2").unwrap().build().is_err());
}

#[test]
fn user_systems_may_have_outside_angles() {
    let ls = LineSystem::new("odd", 2, vec![Line::from_ints(&[1, 0]), Line::from_ints(&[1, 2])]).unwrap();
    assert!(!ls.angle_table().all_in_catalog());
    assert_eq!(angle_class(ls.line(0), ls.line(1)).unwrap(), None);
    assert!(!ls.is_star_closed());
}

#[test]
fn documents_roundtrip() {
    for name in ["S1", "U", "family:C3:full:2"] {
        let ls = sys(name);
        let text = serde_json::to_string(&ls.to_doc()).unwrap();
        let back = LineSystem::from_doc(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.lines(), ls.lines());
        assert_eq!(back.name(), ls.name());
        for i in 0..ls.len() {
            assert_eq!(back.eigenvalues(i), ls.eigenvalues(i));
        }
    }
    let doc = sys("A2").to_doc();
    assert_eq!(doc.field_basis, FIELD_BASIS.map(String::from).to_vec());
}

#[test]
fn spec_names() {
    assert_eq!(SystemSpec::parse("G(4,2,3)").unwrap().canonical_name(), "family:C4:index2:3");
    assert_eq!(SystemSpec::parse("A2*A1").unwrap().build().unwrap().len(), 4);
    assert!(SystemSpec::parse("family:Q8:pm1").is_err());
    assert!(SystemSpec::parse("").is_err());
}
