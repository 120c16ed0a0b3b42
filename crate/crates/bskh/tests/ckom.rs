//! Tests for curved-complex structure: sprinkle signs, integrity, chain
//! maps, homotopies, filtration, sign-rule bridging, and Gaussian
//! simplification.

use bskh::bs::{bs_complex, bs_complex_with_rule, sign_rule_iso};
use bskh::cobcat::CobMorphism;
use bskh::ckom::{
    associated_graded, blocks_insert, cube_sign_bridge, filtration_level, gaussian_simplify,
    sprinkle_sign, verify_chain_map, Blocks, ChainMap, CurvedComplex, Gen, Homotopy, SignRule,
};
use bskh::coeff::Ring;
use bskh::diagram::{parse_tangle, Resolution};
use bskh::Error;

const TREFOIL: &str = "
tangle ring=Z
X c1 = (e1,e4,e2,e5)
X c2 = (e3,e6,e4,e1)
X c3 = (e5,e2,e6,e3)
component k1 edges=(e1,e2,e3,e4,e5,e6) weight=0
end
";

const HOPF_01: &str = "
tangle ring=Q
X c1 = (e4,e1,e3,e2)
X c2 = (e2,e3,e1,e4)
component k1 edges=(e1,e2) weight=0
component k2 edges=(e3,e4) weight=1
end
";

fn circle(edges: &[&str]) -> Resolution {
    Resolution {
        v: vec![],
        circles: vec![edges.iter().map(|s| s.to_string()).collect()],
        arcs: vec![],
    }
}

#[test]
fn sprinkle_examples() {
    // One crossing: the sum is empty.
    let one = parse_tangle(
        "
tangle ring=Z
X c1 = (e1,e2,e2,e1)
component k1 edges=(e1,e2) weight=0
end
",
    )
    .unwrap();
    assert_eq!(sprinkle_sign(&one, &[0], &[1]).unwrap(), 1);
    // Two positive crossings: (1,0) -> (1,1) sees v_1 = 1 at a positive
    // crossing, so the sign is -1.
    let hopf = parse_tangle(HOPF_01).unwrap();
    assert!(hopf.crossing_data().crossings.iter().all(|c| c.positive));
    assert_eq!(sprinkle_sign(&hopf, &[1, 0], &[1, 1]).unwrap(), -1);
    assert_eq!(sprinkle_sign(&hopf, &[0, 0], &[1, 0]).unwrap(), 1);
    assert_eq!(sprinkle_sign(&hopf, &[0, 0], &[0, 1]).unwrap(), 1);
    assert_eq!(sprinkle_sign(&hopf, &[0, 1], &[1, 1]).unwrap(), 1);
    // Not an immediate successor pair.
    assert!(sprinkle_sign(&hopf, &[0, 0], &[1, 1]).is_err());
    assert!(sprinkle_sign(&hopf, &[1, 0], &[0, 1]).is_err());
}

#[test]
fn sprinkle_square_anticommutation() {
    // Around every square face of the cube, the four edge signs multiply
    // to -1.
    let tre = parse_tangle(TREFOIL).unwrap();
    for rule in [SignRule::Paper, SignRule::BarNatan] {
        let crossings = &tre.crossing_data().crossings;
        for a in 0..3usize {
            for b in (a + 1)..3 {
                for rest in [0u8, 1] {
                    let mut v = vec![rest; 3];
                    let other = 3 - a - b;
                    v[a] = 0;
                    v[b] = 0;
                    v[other] = rest;
                    let mut va = v.clone();
                    va[a] = 1;
                    let mut vb = v.clone();
                    vb[b] = 1;
                    let mut vv = v.clone();
                    vv[a] = 1;
                    vv[b] = 1;
                    let total = bskh::ckom::sign_exponent(rule, crossings, &v, &va).unwrap()
                        + bskh::ckom::sign_exponent(rule, crossings, &va, &vv).unwrap()
                        + bskh::ckom::sign_exponent(rule, crossings, &v, &vb).unwrap()
                        + bskh::ckom::sign_exponent(rule, crossings, &vb, &vv).unwrap();
                    assert_eq!(total % 2, 1);
                }
            }
        }
    }
}

#[test]
fn trefoil_complex_integrity() {
    let tre = parse_tangle(TREFOIL).unwrap();
    let cx = bs_complex(&tre).unwrap();
    cx.integrity().unwrap();
    assert_eq!(cx.gens.len(), 8);
    // Closed diagram: the curvature vanishes.
    for lam in cx.curvature().unwrap() {
        assert!(lam.is_zero());
    }
    // Gradings: n+ = 3, n- = 0, so h ranges over 0..=3 with shift 3.
    assert_eq!(cx.gens.iter().map(|g| g.h).min(), Some(0));
    assert_eq!(cx.gens.iter().map(|g| g.h).max(), Some(3));
    assert!(cx.gens.iter().all(|g| g.shift == 3));
    // A knot has a single weight, so d- = 0.
    assert!(cx.d_minus.is_empty());
}

#[test]
fn hopf_weighted_complex_has_dminus() {
    let hopf = parse_tangle(HOPF_01).unwrap();
    let cx = bs_complex(&hopf).unwrap();
    cx.integrity().unwrap();
    assert!(!cx.d_minus.is_empty());
    for lam in cx.curvature().unwrap() {
        assert!(lam.is_zero());
    }
}

#[test]
fn identity_chain_map_verifies() {
    let hopf = parse_tangle(HOPF_01).unwrap();
    let cx = bs_complex(&hopf).unwrap();
    let id = ChainMap::identity(&cx);
    assert!(verify_chain_map(&id).ok());
    assert_eq!(id.degree(), Some(0));
    assert_eq!(filtration_level(&id), Some(0));
    // A wrong map fails with a reported residual.
    let bad = id.scale(&Ring::Q.from_i64(2)).add(&{
        let mut blocks = Blocks::new();
        blocks_insert(
            &mut blocks,
            (0, 3),
            CobMorphism::minimal(Ring::Q, &cx.gens[0].res, &cx.gens[3].res),
        );
        ChainMap::new(cx.clone(), cx.clone(), blocks).unwrap()
    });
    assert!(!verify_chain_map(&bad).ok());
}

#[test]
fn dotted_identity_filtration_level() {
    let hopf = parse_tangle(HOPF_01).unwrap();
    let cx = bs_complex(&hopf).unwrap();
    let mut blocks = Blocks::new();
    for (i, g) in cx.gens.iter().enumerate() {
        let e = g.res.circles[0].iter().next().cloned().unwrap_or_else(|| {
            g.res.arcs[0].edges.iter().next().unwrap().clone()
        });
        blocks_insert(
            &mut blocks,
            (i, i),
            CobMorphism::dot(Ring::Q, &g.res, &e).unwrap(),
        );
    }
    let f = ChainMap::new(cx.clone(), cx.clone(), blocks).unwrap();
    assert_eq!(filtration_level(&f), Some(-2));
}

#[test]
fn sign_rule_bridge_is_cocycle_and_iso() {
    let tre = parse_tangle(TREFOIL).unwrap();
    let crossings = tre.crossing_data().crossings.clone();
    // Same rule: phi identically 0.
    let phi = cube_sign_bridge(&crossings, SignRule::Paper, SignRule::Paper).unwrap();
    assert!(phi.iter().all(|&x| x == 0));
    let iso = sign_rule_iso(&tre, SignRule::Paper, SignRule::Paper).unwrap();
    assert_eq!(iso.blocks, ChainMap::identity(&iso.source).blocks);
    // Bridging to the other rule gives a verified isomorphism.
    let iso = sign_rule_iso(&tre, SignRule::Paper, SignRule::BarNatan).unwrap();
    assert!(verify_chain_map(&iso).ok());
    let back = sign_rule_iso(&tre, SignRule::BarNatan, SignRule::Paper).unwrap();
    let round = back.compose(&iso);
    assert_eq!(round.blocks, ChainMap::identity(&round.source).blocks);
    // The other-rule complex is a genuine complex too.
    bs_complex_with_rule(&tre, SignRule::BarNatan)
        .unwrap()
        .integrity()
        .unwrap();
}

#[test]
fn sign_rule_iso_weighted() {
    let hopf = parse_tangle(HOPF_01).unwrap();
    let iso = sign_rule_iso(&hopf, SignRule::Paper, SignRule::BarNatan).unwrap();
    assert!(verify_chain_map(&iso).ok());
}

#[test]
fn associated_graded_drops_shifted_blocks() {
    let hopf = parse_tangle(HOPF_01).unwrap();
    let cx = bs_complex(&hopf).unwrap();
    let id = ChainMap::identity(&cx);
    let gr = associated_graded(&id, 0).unwrap();
    assert!(gr.source.d_minus.is_empty());
    assert_eq!(gr.blocks, id.blocks);
    assert!(verify_chain_map(&gr).ok());
}

#[test]
fn gaussian_eliminates_identity_entries() {
    // An acyclic two-generator complex plus a surviving spectator circle.
    let r = Ring::Q;
    let a = circle(&["x"]);
    let gens = vec![
        Gen {
            v: vec![],
            res: a.clone(),
            h: 0,
            shift: 0,
        },
        Gen {
            v: vec![],
            res: a.clone(),
            h: 1,
            shift: -1,
        },
        Gen {
            v: vec![],
            res: circle(&["y"]),
            h: 0,
            shift: 0,
        },
    ];
    let mut d_plus = Blocks::new();
    blocks_insert(&mut d_plus, (0, 1), CobMorphism::identity(r, &a));
    let cx = CurvedComplex {
        ring: r,
        boundary: vec![],
        gens,
        d_plus,
        d_minus: Blocks::new(),
    };
    cx.integrity().unwrap();
    let (small, project, include) = gaussian_simplify(&cx).unwrap();
    assert_eq!(small.gens.len(), 1);
    assert!(small.d_plus.is_empty());
    assert!(verify_chain_map(&project).ok());
    assert!(verify_chain_map(&include).ok());
    // project . include = id on the small complex.
    let round = project.compose(&include);
    assert_eq!(round.blocks, ChainMap::identity(&small).blocks);
    // include . project is homotopic to the identity: h = u^{-1} placed on
    // the cancelled pair.
    let mut h_blocks = Blocks::new();
    blocks_insert(&mut h_blocks, (1, 0), CobMorphism::identity(r, &a));
    let h = Homotopy::new(cx.clone(), cx.clone(), h_blocks).unwrap();
    let back = include.compose(&project);
    assert!(h.relates(&ChainMap::identity(&cx), &back));
}

#[test]
fn gaussian_refuses_curved_complexes() {
    let one = parse_tangle(
        "
tangle ring=Q boundary=(b1,b2,b3,b4) basepoint-after=b1 shading=outer-unshaded
X c1 = (e1,e2,e3,e4)
component k1 edges=(e1,e3) weight=0
component k2 edges=(e2,e4) weight=1
end
",
    )
    .unwrap();
    let cx = bs_complex(&one).unwrap();
    assert!(matches!(
        gaussian_simplify(&cx),
        Err(Error::CurvedNotSupported(_))
    ));
}
