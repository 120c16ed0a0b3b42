//! Tests for the Batson–Seed complex: the one-crossing local picture,
//! curvature, weight/shading symmetries, and locality under planar gluing.

use bskh::bs::{bs_complex, expected_curvature, one_crossing_decomposition};
use bskh::ckom::{glue, CurvedComplex};
use bskh::cobcat::CobMorphism;
use bskh::coeff::Ring;
use bskh::diagram::{parse_tangle, Shading};

const ONE_CROSSING: &str = "
tangle ring=Q boundary=(b1,b2,b3,b4) basepoint-after=b1 shading=outer-unshaded
X c1 = (e1,e2,e3,e4)
component k1 edges=(e1,e3) weight=0
component k2 edges=(e2,e4) weight=1
end
";

const TREFOIL_Z: &str = "
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

/// Compare two complexes entry for entry, matching generators by cube
/// vertex.
fn assert_same_complex(a: &CurvedComplex, b: &CurvedComplex) {
    assert_eq!(a.gens.len(), b.gens.len());
    let b_of = |v: &[u8]| b.gen_by_v(v).expect("missing vertex");
    for g in &a.gens {
        let gb = &b.gens[b_of(&g.v)];
        assert_eq!(g.res, gb.res, "resolutions differ at v={:?}", g.v);
        assert_eq!(g.h, gb.h);
        assert_eq!(g.shift, gb.shift);
    }
    for (name, da, db) in [("d+", &a.d_plus, &b.d_plus), ("d-", &a.d_minus, &b.d_minus)] {
        assert_eq!(da.len(), db.len(), "{name} sparsity differs");
        for ((i, j), m) in da {
            let key = (b_of(&a.gens[*i].v), b_of(&a.gens[*j].v));
            let mb = db.get(&key).unwrap_or_else(|| {
                panic!("{name} entry {:?}->{:?} missing", a.gens[*i].v, a.gens[*j].v)
            });
            assert_eq!(m, mb, "{name} entry at {:?}->{:?}", a.gens[*i].v, a.gens[*j].v);
        }
    }
}

#[test]
fn one_crossing_matches_local_picture() {
    // Positive crossing, s(c)=1, under weight a=0, over weight b=1:
    // forward saddle with coefficient 1, backward saddle with b-a = 1.
    let d = parse_tangle(ONE_CROSSING).unwrap();
    let cx = bs_complex(&d).unwrap();
    assert_eq!(cx.gens.len(), 2);
    assert_eq!(cx.gens[0].h, 0);
    assert_eq!(cx.gens[1].h, 1);
    assert_eq!(cx.gens[0].shift, 1);
    let fwd = &cx.d_plus[&(0, 1)];
    assert_eq!(
        *fwd,
        CobMorphism::minimal(Ring::Q, &cx.gens[0].res, &cx.gens[1].res)
    );
    let back = &cx.d_minus[&(1, 0)];
    assert_eq!(
        *back,
        CobMorphism::minimal(Ring::Q, &cx.gens[1].res, &cx.gens[0].res)
    );
    assert_eq!(fwd.degree(), Some(-1)); // a single saddle
    cx.integrity().unwrap();
}

#[test]
fn one_crossing_curvature_formula() {
    let d = parse_tangle(ONE_CROSSING).unwrap();
    let cx = bs_complex(&d).unwrap();
    let lam = cx.curvature().unwrap();
    for (i, g) in cx.gens.iter().enumerate() {
        let want = expected_curvature(&d, g);
        assert_eq!(lam[i], want, "curvature at v={:?}", g.v);
    }
    assert!(!lam[0].is_zero());
}

#[test]
fn cut_trefoil_curvature_formula() {
    // A single open strand: the weights agree, so both the actual and the
    // stated curvature vanish (ends of each resolution arc carry opposite
    // boundary signs).
    let d = parse_tangle(
        "
tangle ring=Q boundary=(b1,b2)
X c1 = (e1,e4,e2,e5)
X c2 = (e3y,e6,e4,e1)
X c3 = (e5,e2,e6,e3x)
component k1 edges=(e3y,e4,e5,e6,e1,e2,e3x) weight=3
end
",
    )
    .unwrap();
    let cx = bs_complex(&d).unwrap();
    let lam = cx.curvature().unwrap();
    for (i, g) in cx.gens.iter().enumerate() {
        assert!(lam[i].is_zero());
        assert_eq!(lam[i], expected_curvature(&d, g));
    }
}

#[test]
fn weighted_two_boundary_tangle_curvature() {
    // A positive clasp on two strands with different weights; nonzero
    // curvature matching the boundary-dot formula.
    let d = parse_tangle(
        "
tangle ring=Q boundary=(p1,p2,p3,p4) basepoint-after=p1 shading=outer-unshaded
X c1 = (u1,a1,u2,a2)
X c2 = (a2,u2,a3,u3)
component ka edges=(a1,a2,a3) weight=0
component kb edges=(u1,u2,u3) weight=2
end
",
    )
    .unwrap();
    let cx = bs_complex(&d).unwrap();
    let lam = cx.curvature().unwrap();
    for (i, g) in cx.gens.iter().enumerate() {
        assert_eq!(lam[i], expected_curvature(&d, g), "at v={:?}", g.v);
    }
}

#[test]
fn negated_weights_equal_flipped_shading() {
    let d = parse_tangle(ONE_CROSSING).unwrap();
    // Negate every weight.
    let negated = parse_tangle(&ONE_CROSSING.replace("weight=1", "weight=-1")).unwrap();
    let flipped = d.with_shading(Shading::OuterShaded).unwrap();
    // weight=0 is its own negation, so only k2 changes.
    let ca = bs_complex(&negated).unwrap();
    let cb = bs_complex(&flipped).unwrap();
    assert_same_complex(&ca, &cb);
}

#[test]
fn trefoil_glues_from_one_crossing_pieces() {
    let d = parse_tangle(TREFOIL_Z).unwrap();
    let ambient = bs_complex(&d).unwrap();
    let (pad, pieces) = one_crossing_decomposition(&d).unwrap();
    let locals: Vec<CurvedComplex> = pieces.iter().map(|p| bs_complex(p).unwrap()).collect();
    let refs: Vec<&CurvedComplex> = locals.iter().collect();
    let glued = glue(&pad, &refs).unwrap();
    glued.integrity().unwrap();
    assert_same_complex(&glued, &ambient);
}

#[test]
fn weighted_hopf_glues_from_one_crossing_pieces() {
    let d = parse_tangle(HOPF_01).unwrap();
    let ambient = bs_complex(&d).unwrap();
    let (pad, pieces) = one_crossing_decomposition(&d).unwrap();
    // The pieces carry the ambient crossing signs and weights.
    for (p, c) in pieces.iter().zip(&d.crossing_data().crossings) {
        let info = &p.crossing_data().crossings[0];
        assert_eq!(info.s, c.s);
        assert_eq!(info.positive, c.positive);
        assert_eq!(info.w_over, c.w_over);
        assert_eq!(info.w_under, c.w_under);
    }
    let locals: Vec<CurvedComplex> = pieces.iter().map(|p| bs_complex(p).unwrap()).collect();
    let refs: Vec<&CurvedComplex> = locals.iter().collect();
    let glued = glue(&pad, &refs).unwrap();
    assert_same_complex(&glued, &ambient);
}

#[test]
fn glue_through_identity_diagram_is_identity() {
    let d = parse_tangle(ONE_CROSSING).unwrap();
    let cx = bs_complex(&d).unwrap();
    let mut universe = std::collections::BTreeSet::new();
    for c in &d.components {
        for e in &c.edges {
            universe.insert(e.clone());
        }
    }
    let pad = bskh::cobcat::PlanarArcDiagram::identity(&d.boundary, universe);
    // The identity arc diagram renames nothing: resolutions keep their edge
    // sets, so the glued complex matches entry for entry.
    let glued = glue(&pad, &[&cx]).unwrap();
    assert_same_complex(&glued, &cx);
}

#[test]
fn free_circle_component_glues() {
    // Ambient diagram with a crossing and a disjoint free circle.
    let d = parse_tangle(
        "
tangle ring=Q boundary=(b1,b2,b3,b4) basepoint-after=b1 shading=outer-unshaded
X c1 = (e1,e2,e3,e4)
component k1 edges=(e1,e3) weight=0
component k2 edges=(e2,e4) weight=1
component k3 edges=(e9) weight=5
end
",
    )
    .unwrap();
    let ambient = bs_complex(&d).unwrap();
    let (pad, pieces) = one_crossing_decomposition(&d).unwrap();
    assert_eq!(pad.loops.len(), 1);
    let locals: Vec<CurvedComplex> = pieces.iter().map(|p| bs_complex(p).unwrap()).collect();
    let refs: Vec<&CurvedComplex> = locals.iter().collect();
    let glued = glue(&pad, &refs).unwrap();
    assert_same_complex(&glued, &ambient);
}
