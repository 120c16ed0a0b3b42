use bskh::ckom::verify_chain_map;
use bskh::diagram::parse_tangle;
use bskh::moves::MovieEvent;

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

const BRAID_W: &str = "
tangle ring=Q boundary=(p1,p2,p3,p4,p5,p6) basepoint-after=p6
X x1 = (a1,b1,a2,b2)
X x2 = (c1,a3,c2,a2)
X x3 = (c2,b3,c3,b2)
component ka edges=(a1,a2,a3) weight=0
component kb edges=(b1,b2,b3) weight=2
component kc edges=(c1,c2,c3) weight=5
end
";

fn check(dtxt: &str, label: &str) {
    let d = parse_tangle(dtxt).unwrap();
    let ev = MovieEvent::R3 {
        crossings: ["x1".into(), "x2".into(), "x3".into()],
        pivot_edge: "b2".into(),
    };
    match bskh::maps::r3_maps(&d, &ev) {
        Ok(r) => {
            let nblocks = r.f.blocks.len();
            println!(
                "{label}: f ok={} blocks={} nonzero={}",
                verify_chain_map(&r.f).ok(),
                nblocks,
                !r.f.is_zero()
            );
        }
        Err(e) => println!("{label}: err {e}"),
    }
}

fn check_kinked(dtxt: &str, kink_edge: &str, label: &str) {
    // A kink away from the triangle exercises the rest-cube gluing.
    let d = parse_tangle(dtxt).unwrap();
    let kinked = bskh::moves::apply_event(
        &d,
        &MovieEvent::R1Add {
            edge: kink_edge.into(),
            sign: 1,
            side: bskh::moves::R1Side::Left,
            new_crossing: "c9".into(),
            new_edges: ("f1".into(), "f2".into()),
        },
    )
    .unwrap();
    let ev = MovieEvent::R3 {
        crossings: ["x1".into(), "x2".into(), "x3".into()],
        pivot_edge: "b2".into(),
    };
    match bskh::maps::r3_maps(&kinked, &ev) {
        Ok(r) => println!(
            "{label}: f ok={} blocks={} nonzero={}",
            verify_chain_map(&r.f).ok(),
            r.f.blocks.len(),
            !r.f.is_zero()
        ),
        Err(e) => println!("{label}: err {e}"),
    }
}

fn main() {
    check(BRAID, "braid unweighted");
    check(BRAID_W, "braid weighted");
    check_kinked(BRAID, "c3", "kinked braid");
    check_kinked(BRAID_W, "c3", "kinked braid weighted");
    check_kinked(BRAID_W, "a1", "kinked braid weighted a1");
}
