//! Tests for the dotted cobordism category: normal forms, composition,
//! closed-surface evaluations, and planar gluing.

use bskh::cobcat::{side_cycles, CobMorphism, Curve, DArc, PadPoint, PlanarArcDiagram};
use bskh::coeff::Ring;
use bskh::diagram::{ResArc, Resolution};
use std::collections::BTreeSet;

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn circles(sets: &[&[&str]]) -> Resolution {
    let mut cs: Vec<BTreeSet<String>> = sets.iter().map(|s| set(s)).collect();
    cs.sort();
    Resolution {
        v: vec![],
        circles: cs,
        arcs: vec![],
    }
}

fn empty() -> Resolution {
    circles(&[])
}

/// Two boundary arcs b1-b4 and b2-b3 (the 0-smoothing of one crossing).
fn smoothing0() -> Resolution {
    Resolution {
        v: vec![0],
        circles: vec![],
        arcs: vec![
            ResArc {
                ends: ("b1".into(), "b4".into()),
                edges: set(&["p"]),
            },
            ResArc {
                ends: ("b2".into(), "b3".into()),
                edges: set(&["q"]),
            },
        ],
    }
}

/// Two boundary arcs b1-b2 and b3-b4 (the 1-smoothing of one crossing).
fn smoothing1() -> Resolution {
    Resolution {
        v: vec![1],
        circles: vec![],
        arcs: vec![
            ResArc {
                ends: ("b1".into(), "b2".into()),
                edges: set(&["r"]),
            },
            ResArc {
                ends: ("b3".into(), "b4".into()),
                edges: set(&["s"]),
            },
        ],
    }
}

#[test]
fn elementary_degrees() {
    let r = Ring::Z;
    let one = circles(&[&["c"]]);
    let two = circles(&[&["a"], &["b"]]);
    assert_eq!(CobMorphism::minimal(r, &empty(), &one).degree(), Some(1)); // birth
    assert_eq!(CobMorphism::minimal(r, &one, &empty()).degree(), Some(1)); // death
    assert_eq!(CobMorphism::minimal(r, &two, &one).degree(), Some(-1)); // merge
    assert_eq!(CobMorphism::minimal(r, &one, &two).degree(), Some(-1)); // split
    assert_eq!(CobMorphism::identity(r, &one).degree(), Some(0));
    assert_eq!(CobMorphism::dot(r, &one, "c").unwrap().degree(), Some(-2));
    // Boundary saddle between the two smoothings of a crossing.
    let saddle = CobMorphism::minimal(r, &smoothing0(), &smoothing1());
    assert_eq!(saddle.degree(), Some(-1));
    assert_eq!(saddle.terms.len(), 1);
    assert_eq!(
        CobMorphism::identity(r, &smoothing0()).degree(),
        Some(0)
    );
}

#[test]
fn identity_of_circle_is_neck_cut_sum() {
    // Neck-cutting the identity cylinder: dot on the source disk plus dot on
    // the target disk.
    let r = Ring::Z;
    let one = circles(&[&["c"]]);
    let id = CobMorphism::identity(r, &one);
    assert_eq!(id.terms.len(), 2);
    let src_dot: BTreeSet<Curve> = [Curve::Src(set(&["c"]))].into();
    let tgt_dot: BTreeSet<Curve> = [Curve::Tgt(set(&["c"]))].into();
    assert_eq!(id.terms[&src_dot], r.one());
    assert_eq!(id.terms[&tgt_dot], r.one());
    // Identity is idempotent under composition.
    assert_eq!(id.compose(&id), id);
}

#[test]
fn identity_is_two_sided_unit() {
    let r = Ring::Z;
    let one = circles(&[&["c"]]);
    let two = circles(&[&["a"], &["b"]]);
    let merge = CobMorphism::minimal(r, &two, &one);
    assert_eq!(CobMorphism::identity(r, &one).compose(&merge), merge);
    assert_eq!(merge.compose(&CobMorphism::identity(r, &two)), merge);
    let saddle = CobMorphism::minimal(r, &smoothing0(), &smoothing1());
    assert_eq!(
        CobMorphism::identity(r, &smoothing1()).compose(&saddle),
        saddle
    );
    assert_eq!(
        saddle.compose(&CobMorphism::identity(r, &smoothing0())),
        saddle
    );
}

#[test]
fn sphere_relations() {
    let r = Ring::Z;
    let one = circles(&[&["c"]]);
    let birth = CobMorphism::minimal(r, &empty(), &one);
    let death = CobMorphism::minimal(r, &one, &empty());
    let dot = CobMorphism::dot(r, &one, "c").unwrap();
    // Undotted sphere evaluates to zero.
    assert!(death.compose(&birth).is_zero());
    // Dotted sphere evaluates to one.
    let dotted_sphere = death.compose(&dot).compose(&birth);
    assert_eq!(dotted_sphere.terms.len(), 1);
    assert_eq!(dotted_sphere.terms[&BTreeSet::new()], r.one());
    // Two dots kill a component.
    assert!(dot.compose(&dot).is_zero());
}

#[test]
fn torus_evaluates_to_two() {
    let r = Ring::Z;
    let one = circles(&[&["c"]]);
    let two = circles(&[&["a"], &["b"]]);
    let merge = CobMorphism::minimal(r, &two, &one);
    let split = CobMorphism::minimal(r, &one, &two);
    // Merge after split is twice the dotted cylinder.
    let pinched = merge.compose(&split);
    let dot = CobMorphism::dot(r, &one, "c").unwrap();
    assert_eq!(pinched, dot.scale(&r.from_i64(2)));
    // Capping off gives the torus.
    let birth = CobMorphism::minimal(r, &empty(), &one);
    let death = CobMorphism::minimal(r, &one, &empty());
    let torus = death.compose(&pinched).compose(&birth);
    assert_eq!(torus.terms.len(), 1);
    assert_eq!(torus.terms[&BTreeSet::new()], r.from_i64(2));
    // Genus two (and the dotted torus) evaluate to zero.
    let genus2 = death
        .compose(&pinched)
        .compose(&pinched)
        .compose(&birth);
    assert!(genus2.is_zero());
    let dotted_torus = death.compose(&dot).compose(&pinched).compose(&birth);
    assert!(dotted_torus.is_zero());
}

#[test]
fn split_after_merge_neck_cuts() {
    // The tube between two parallel circles equals the sum of the two dotted
    // identities.
    let r = Ring::Z;
    let one = circles(&[&["c"]]);
    let two = circles(&[&["a"], &["b"]]);
    let merge = CobMorphism::minimal(r, &two, &one);
    let split = CobMorphism::minimal(r, &one, &two);
    let tube = split.compose(&merge);
    let expected = CobMorphism::dot(r, &two, "a")
        .unwrap()
        .add(&CobMorphism::dot(r, &two, "b").unwrap());
    assert_eq!(tube, expected);
}

#[test]
fn boundary_tube_neck_cuts() {
    // Saddle up then saddle back down: the tube between the two sheets
    // equals dotting either sheet.
    let r = Ring::Z;
    let up = CobMorphism::minimal(r, &smoothing0(), &smoothing1());
    let down = CobMorphism::minimal(r, &smoothing1(), &smoothing0());
    let tube = down.compose(&up);
    let expected = CobMorphism::dot(r, &smoothing0(), "p")
        .unwrap()
        .add(&CobMorphism::dot(r, &smoothing0(), "q").unwrap());
    assert_eq!(tube, expected);
    assert_eq!(tube.degree(), Some(-2));
}

#[test]
fn composition_is_associative_and_bilinear() {
    let r = Ring::Z;
    let one = circles(&[&["c"]]);
    let two = circles(&[&["a"], &["b"]]);
    let merge = CobMorphism::minimal(r, &two, &one);
    let split = CobMorphism::minimal(r, &one, &two);
    let dot = CobMorphism::dot(r, &one, "c").unwrap();
    let lhs = dot.compose(&merge).compose(&split);
    let rhs = dot.compose(&merge.compose(&split));
    assert_eq!(lhs, rhs);
    let f = merge.add(&merge.scale(&r.from_i64(2)));
    assert_eq!(f, merge.scale(&r.from_i64(3)));
    assert_eq!(
        dot.compose(&f),
        dot.compose(&merge).scale(&r.from_i64(3))
    );
}

#[test]
fn side_cycles_of_crossing_smoothings() {
    let s = side_cycles(&smoothing0(), &smoothing1());
    assert_eq!(s.len(), 1);
    assert_eq!(s[0], set(&["b1", "b2", "b3", "b4"]));
    let t = side_cycles(&smoothing0(), &smoothing0());
    assert_eq!(t.len(), 2);
}

#[test]
fn pad_identity_passthrough() {
    let r = Ring::Z;
    let arc = Resolution {
        v: vec![],
        circles: vec![],
        arcs: vec![ResArc {
            ends: ("b1".into(), "b2".into()),
            edges: set(&["p"]),
        }],
    };
    let pad = PlanarArcDiagram::identity(&["b1".to_string(), "b2".to_string()], set(&["p"]));
    let id = CobMorphism::identity(r, &arc);
    let plugged = pad.plug_morphisms(&[&id]).unwrap();
    let out_res = pad.plug_resolutions(&[&arc]).unwrap();
    assert_eq!(plugged, CobMorphism::identity(r, &out_res));
}

#[test]
fn pad_closure_turns_sheet_into_cylinder() {
    // Close an arc up into a circle: the identity sheet becomes the identity
    // cylinder (in neck-cut normal form, two dotted terms).
    let r = Ring::Z;
    let arc = Resolution {
        v: vec![],
        circles: vec![],
        arcs: vec![ResArc {
            ends: ("b1".into(), "b2".into()),
            edges: set(&["p"]),
        }],
    };
    let pad = PlanarArcDiagram {
        inputs: vec![vec!["b1".to_string(), "b2".to_string()]],
        output: vec![],
        arcs: vec![DArc {
            ends: (
                PadPoint::In(0, "b1".to_string()),
                PadPoint::In(0, "b2".to_string()),
            ),
            edges: set(&["x"]),
        }],
        loops: vec![],
        universe: set(&["p", "x"]),
    };
    let closed = pad.plug_resolutions(&[&arc]).unwrap();
    assert_eq!(closed.circles, vec![set(&["p", "x"])]);
    assert!(closed.arcs.is_empty());
    let id = CobMorphism::identity(r, &arc);
    let plugged = pad.plug_morphisms(&[&id]).unwrap();
    assert_eq!(plugged, CobMorphism::identity(r, &closed));
}

#[test]
fn pad_closure_of_boundary_saddle_is_merge() {
    // Closing the four boundary points of a crossing-smoothing saddle in the
    // pattern b1-b2, b3-b4 turns the 0-smoothing into two circles, the
    // 1-smoothing into... the same count check plus functoriality of gluing.
    let r = Ring::Z;
    let pad = PlanarArcDiagram {
        inputs: vec![(1..=4).map(|i| format!("b{i}")).collect()],
        output: vec![],
        arcs: vec![
            DArc {
                ends: (
                    PadPoint::In(0, "b1".to_string()),
                    PadPoint::In(0, "b4".to_string()),
                ),
                edges: set(&["x"]),
            },
            DArc {
                ends: (
                    PadPoint::In(0, "b2".to_string()),
                    PadPoint::In(0, "b3".to_string()),
                ),
                edges: set(&["y"]),
            },
        ],
        loops: vec![],
        universe: set(&["p", "q", "r", "s", "x", "y"]),
    };
    let c0 = pad.plug_resolutions(&[&smoothing0()]).unwrap();
    let c1 = pad.plug_resolutions(&[&smoothing1()]).unwrap();
    assert_eq!(c0.circles.len(), 2);
    assert_eq!(c1.circles.len(), 1);
    let saddle = CobMorphism::minimal(r, &smoothing0(), &smoothing1());
    let plugged = pad.plug_morphisms(&[&saddle]).unwrap();
    assert_eq!(plugged, CobMorphism::minimal(r, &c0, &c1));
    // Gluing commutes with composition.
    let back = CobMorphism::minimal(r, &smoothing1(), &smoothing0());
    let lhs = pad.plug_morphisms(&[&back.compose(&saddle)]).unwrap();
    let rhs = pad
        .plug_morphisms(&[&back])
        .unwrap()
        .compose(&pad.plug_morphisms(&[&saddle]).unwrap());
    assert_eq!(lhs, rhs);
}

#[test]
fn pad_free_loop_contributes_identity_cylinder() {
    let r = Ring::Z;
    let arc = Resolution {
        v: vec![],
        circles: vec![],
        arcs: vec![ResArc {
            ends: ("b1".into(), "b2".into()),
            edges: set(&["p"]),
        }],
    };
    let mut pad = PlanarArcDiagram::identity(&["b1".to_string(), "b2".to_string()], set(&["p", "z"]));
    pad.loops.push(set(&["z"]));
    let out_res = pad.plug_resolutions(&[&arc]).unwrap();
    assert_eq!(out_res.circles, vec![set(&["z"])]);
    let id = CobMorphism::identity(r, &arc);
    let plugged = pad.plug_morphisms(&[&id]).unwrap();
    assert_eq!(plugged, CobMorphism::identity(r, &out_res));
}

#[test]
fn two_input_pad_disjoint_union() {
    // A disjoint-union diagram: gluing two circle identities gives the
    // identity of the two-circle resolution (four neck-cut terms).
    let r = Ring::Z;
    let a = circles(&[&["a"]]);
    let b = circles(&[&["b"]]);
    let pad = PlanarArcDiagram {
        inputs: vec![vec![], vec![]],
        output: vec![],
        arcs: vec![],
        loops: vec![],
        universe: set(&["a", "b"]),
    };
    let both = pad.plug_resolutions(&[&a, &b]).unwrap();
    assert_eq!(both.circles.len(), 2);
    let plugged = pad
        .plug_morphisms(&[
            &CobMorphism::identity(r, &a),
            &CobMorphism::identity(r, &b),
        ])
        .unwrap();
    assert_eq!(plugged, CobMorphism::identity(r, &both));
    assert_eq!(plugged.terms.len(), 4);
}

#[test]
fn connected_on_builds_cylinder() {
    let r = Ring::Z;
    let one = circles(&[&["c"]]);
    let curves: BTreeSet<Curve> = [Curve::Src(set(&["c"])), Curve::Tgt(set(&["c"]))].into();
    let cyl = CobMorphism::connected_on(r, &one, &one, &curves, 0).unwrap();
    assert_eq!(cyl, CobMorphism::identity(r, &one));
    let dotted = CobMorphism::connected_on(r, &one, &one, &curves, 1).unwrap();
    assert_eq!(dotted, CobMorphism::dot(r, &one, "c").unwrap());
    assert!(CobMorphism::connected_on(r, &one, &one, &curves, 2)
        .unwrap()
        .is_zero());
}

#[test]
fn from_pieces_keeps_parallel_sheets_separate() {
    // Renaming one circle while birthing another: the piece partition keeps
    // the cylinder and the cap disjoint, unlike `minimal`, which fuses all
    // changed curves into a single pair of pants.
    let r = Ring::Z;
    let src = circles(&[&["x"]]);
    let tgt = circles(&[&["x", "y"], &["z"]]);
    let cyl: BTreeSet<Curve> = [Curve::Src(set(&["x"])), Curve::Tgt(set(&["x", "y"]))].into();
    let cap: BTreeSet<Curve> = [Curve::Tgt(set(&["z"]))].into();
    let f = CobMorphism::from_pieces(r, &src, &tgt, &[(cyl.clone(), 0), (cap.clone(), 0)]).unwrap();
    // Cylinder expands to dot-src + dot-tgt; the undotted cap is a free factor.
    assert_eq!(f.terms.len(), 2);
    assert!(f.terms.keys().all(|k| k.len() == 1 && !k.contains(&Curve::Tgt(set(&["z"])))));
    let fused = CobMorphism::minimal(r, &src, &tgt);
    assert_ne!(f, fused);
    // Dotting both pieces leaves the single fully-dotted term; a second dot
    // on either piece kills it.
    let g = CobMorphism::from_pieces(r, &src, &tgt, &[(cyl.clone(), 1), (cap.clone(), 1)]).unwrap();
    assert_eq!(g.terms.len(), 1);
    assert!(g.terms.keys().next().unwrap().len() == 3);
    let h = CobMorphism::from_pieces(r, &src, &tgt, &[(cyl.clone(), 2), (cap.clone(), 0)]).unwrap();
    assert!(h.is_zero());
    let h = CobMorphism::from_pieces(r, &src, &tgt, &[(cyl.clone(), 0), (cap, 1)]).unwrap();
    assert_eq!(h.terms.len(), 2);
    // Coverage errors are rejected.
    assert!(CobMorphism::from_pieces(r, &src, &tgt, &[(cyl, 0)]).is_err());
}
