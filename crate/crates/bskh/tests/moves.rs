//! Tests for movie events and their induced chain maps.

use bskh::diagram::{parse_tangle, TangleDiagram};
use bskh::moves::{apply_event, parse_movie, MovieEvent, R1Side};
use bskh::Error;

const TREFOIL: &str = "
tangle ring=Z
X c1 = (e1,e4,e2,e5)
X c2 = (e3,e6,e4,e1)
X c3 = (e5,e2,e6,e3)
component k1 edges=(e1,e2,e3,e4,e5,e6) weight=0
end
";

const CIRCLE: &str = "
tangle ring=Q
component k1 edges=(u1) weight=0
end
";

const TWO_CIRCLES: &str = "
tangle ring=Q
component k1 edges=(u1) weight=0
component k2 edges=(u2) weight=1
end
";

/// A 3-strand braid with the word s1 s2 s1 drawn top to bottom; strand b
/// passes over both others, so the middle triangle admits an R3 move with
/// pivot on b.
const BRAID: &str = "
tangle ring=Q boundary=(p1,p2,p3,p4,p5,p6) basepoint-after=p6
X x1 = (a1,b1,a2,b2)
X x2 = (c1,a3,c2,a2)
X x3 = (c2,b3,c3,b2)
component ka edges=(a1,a2,a3) weight=0
component kb edges=(b1,b2,b3) weight=0
component kc edges=(c1,c2,c3) weight=0
end
";

fn same_diagram(a: &TangleDiagram, b: &TangleDiagram) {
    assert_eq!(a.crossings, b.crossings);
    assert_eq!(a.components, b.components);
    assert_eq!(a.boundary, b.boundary);
}

#[test]
fn r1_add_remove_roundtrip_on_knot() {
    let d = parse_tangle(TREFOIL).unwrap();
    for sign in [1i8, -1] {
        for side in [R1Side::Left, R1Side::Right] {
            let add = MovieEvent::R1Add {
                edge: "e2".into(),
                sign,
                side,
                new_crossing: "c9".into(),
                new_edges: ("f1".into(), "f2".into()),
            };
            let kinked = apply_event(&d, &add).unwrap();
            assert_eq!(kinked.n_crossings(), 4);
            let data = kinked.crossing_data();
            assert_eq!(data.crossings[3].id, "c9");
            assert_eq!(data.crossings[3].positive, sign == 1);
            // Writhe changes by the kink sign only.
            assert_eq!(
                data.n_plus as i64 - data.n_minus as i64,
                3 + sign as i64
            );
            let back = apply_event(
                &kinked,
                &MovieEvent::R1Remove {
                    crossing: "c9".into(),
                },
            )
            .unwrap();
            same_diagram(&back, &d);
        }
    }
}

#[test]
fn r1_on_free_circle() {
    let d = parse_tangle(CIRCLE).unwrap();
    let add = MovieEvent::R1Add {
        edge: "u1".into(),
        sign: -1,
        side: R1Side::Left,
        new_crossing: "c1".into(),
        new_edges: ("f1".into(), "f2".into()),
    };
    let kinked = apply_event(&d, &add).unwrap();
    assert_eq!(kinked.n_crossings(), 1);
    assert!(!kinked.crossing_data().crossings[0].positive);
    let back = apply_event(
        &kinked,
        &MovieEvent::R1Remove {
            crossing: "c1".into(),
        },
    )
    .unwrap();
    assert_eq!(back.n_crossings(), 0);
    assert_eq!(back.free_circles.len(), 1);
    assert_eq!(back.components.len(), 1);
}

#[test]
fn r2_add_remove_roundtrip() {
    let d = parse_tangle(TWO_CIRCLES).unwrap();
    // Equal weights are not required for an R2 poke.
    let add = MovieEvent::R2Add {
        over: "u1".into(),
        under: "u2".into(),
        new_crossings: ("c1".into(), "c2".into()),
        new_edges: ("f1".into(), "f2".into(), "f3".into(), "f4".into()),
    };
    let poked = apply_event(&d, &add).unwrap();
    assert_eq!(poked.n_crossings(), 2);
    let data = poked.crossing_data();
    assert_ne!(data.crossings[0].positive, data.crossings[1].positive);
    // The under strand holds slots 1 and 3 (0-indexed 0 and 2) at both.
    for x in &poked.crossings {
        for s in [0, 2] {
            let e = &x.slots[s];
            assert!(poked.component_of(e).id == "k2");
        }
    }
    let back = apply_event(
        &poked,
        &MovieEvent::R2Remove {
            crossings: ("c1".into(), "c2".into()),
        },
    )
    .unwrap();
    assert_eq!(back.n_crossings(), 0);
    assert_eq!(back.free_circles.len(), 2);
}

#[test]
fn r2_add_on_knot_edges_roundtrip() {
    let d = parse_tangle(TREFOIL).unwrap();
    let add = MovieEvent::R2Add {
        over: "e1".into(),
        under: "e4".into(),
        new_crossings: ("c8".into(), "c9".into()),
        new_edges: ("f1".into(), "f2".into(), "f3".into(), "f4".into()),
    };
    let poked = apply_event(&d, &add).unwrap();
    assert_eq!(poked.n_crossings(), 5);
    let back = apply_event(
        &poked,
        &MovieEvent::R2Remove {
            crossings: ("c8".into(), "c9".into()),
        },
    )
    .unwrap();
    same_diagram(&back, &d);
}

#[test]
fn saddle_merge_and_split_circles() {
    let d = parse_tangle(TWO_CIRCLES).unwrap();
    // Different weights: rejected.
    let bad = MovieEvent::Saddle {
        edges: ("u1".into(), "u2".into()),
        new_edges: vec!["f1".into()],
    };
    assert!(matches!(apply_event(&d, &bad), Err(Error::WeightMismatch)));
    // Same weights: two circles merge into one.
    let d0 = parse_tangle(&TWO_CIRCLES.replace("weight=1", "weight=0")).unwrap();
    let merged = apply_event(&d0, &bad).unwrap();
    assert_eq!(merged.free_circles, vec!["f1".to_string()]);
    assert_eq!(merged.components.len(), 1);
    // And one circle splits into two.
    let split = MovieEvent::Saddle {
        edges: ("f1".into(), "f1".into()),
        new_edges: vec!["g1".into(), "g2".into()],
    };
    let two = apply_event(&merged, &split).unwrap();
    assert_eq!(two.free_circles.len(), 2);
    assert_eq!(two.components.len(), 2);
    assert_eq!(two.components[1].weight, two.components[0].weight);
}

#[test]
fn saddle_splits_knot_component() {
    let d = parse_tangle(TREFOIL).unwrap();
    // e1 and e3 cobound a face and run anti-parallel along it; a band
    // between them splits the knot into a two-component link.
    let saddle = MovieEvent::Saddle {
        edges: ("e1".into(), "e3".into()),
        new_edges: vec!["g1".into(), "g2".into()],
    };
    let split = apply_event(&d, &saddle).unwrap();
    assert_eq!(split.components.len(), 2);
    assert_eq!(split.n_crossings(), 3);
    // e1 and e4 run parallel along their bigon: the oriented band does not
    // embed.
    let bad = MovieEvent::Saddle {
        edges: ("e1".into(), "e4".into()),
        new_edges: vec!["g1".into(), "g2".into()],
    };
    assert!(apply_event(&d, &bad).is_err());
}

#[test]
fn birth_and_death() {
    let d = parse_tangle(CIRCLE).unwrap();
    let birth = MovieEvent::Birth {
        circle_edge: "z".into(),
        weight: "5".into(),
        component: "kz".into(),
        part: None,
    };
    let with = apply_event(&d, &birth).unwrap();
    assert_eq!(with.components.len(), 2);
    assert_eq!(with.free_circles.len(), 2);
    assert_eq!(*with.weight_of_edge("z"), with.ring.from_i64(5));
    let gone = apply_event(
        &with,
        &MovieEvent::Death {
            circle_edge: "z".into(),
        },
    )
    .unwrap();
    same_diagram(&gone, &d);
    // A knotted component cannot die.
    let d2 = parse_tangle(TREFOIL).unwrap();
    assert!(apply_event(
        &d2,
        &MovieEvent::Death {
            circle_edge: "e1".into()
        }
    )
    .is_err());
}

#[test]
fn r3_triangle_flip() {
    let d = parse_tangle(BRAID).unwrap();
    let ev = MovieEvent::R3 {
        crossings: ["x1".into(), "x2".into(), "x3".into()],
        pivot_edge: "b2".into(),
    };
    let flipped = apply_event(&d, &ev).unwrap();
    // Crossings keep their ids, order, and signs.
    let da = d.crossing_data();
    let db = flipped.crossing_data();
    for (a, b) in da.crossings.iter().zip(&db.crossings) {
        assert_eq!(a.id, b.id);
        assert_eq!(a.positive, b.positive);
    }
    assert_ne!(d.crossings, flipped.crossings);
    // The flip is an involution.
    let back = apply_event(&flipped, &ev).unwrap();
    same_diagram(&back, &d);
    // A middle-strand pivot is rejected: strand a is under b but over c.
    let badpivot = MovieEvent::R3 {
        crossings: ["x1".into(), "x2".into(), "x3".into()],
        pivot_edge: "a2".into(),
    };
    assert!(apply_event(&d, &badpivot).is_err());
    // A non-triangle edge is rejected.
    let notri = MovieEvent::R3 {
        crossings: ["x1".into(), "x2".into(), "x3".into()],
        pivot_edge: "a1".into(),
    };
    assert!(apply_event(&d, &notri).is_err());
}

#[test]
fn movie_parse_and_frames() {
    let m = parse_movie(
        "
# a torus: birth, split, merge, death
movie ring=Q
tangle ring=Q
end
event birth circle_edge=x weight=0 component=k1
event saddle edges=(x,x) new_edges=(p,q)
event saddle edges=(p,q) new_edges=(r)
event death circle_edge=r
end
",
    )
    .unwrap();
    assert_eq!(m.events.len(), 4);
    let frames = m.frames().unwrap();
    assert_eq!(frames.len(), 5);
    assert_eq!(frames[0].components.len(), 0);
    assert_eq!(frames[2].components.len(), 2);
    assert_eq!(frames[4].components.len(), 0);
    // A bad event reports its index.
    let bad = parse_movie(
        "
movie ring=Q
tangle ring=Q
end
event birth circle_edge=x weight=0 component=k1
event death circle_edge=y
end
",
    )
    .unwrap();
    match bad.frames() {
        Err(Error::BadEvent { index, .. }) => assert_eq!(index, 1),
        other => panic!("expected BadEvent, got {other:?}"),
    }
}

#[test]
fn movie_partition_rules() {
    let text = "
movie ring=Q
tangle ring=Q
component k1 edges=(u1) weight=0
component k2 edges=(u2) weight=0
end
part k1=1 k2=2
event saddle edges=(u1,u2) new_edges=(f1)
end
";
    let m = parse_movie(text).unwrap();
    // Equal weights but different parts: the partitioned movie rejects it.
    assert!(matches!(m.frames(), Err(Error::BadEvent { index: 0, .. })));
    let ok = parse_movie(&text.replace("k2=2", "k2=1")).unwrap();
    assert!(ok.frames().is_ok());
}
