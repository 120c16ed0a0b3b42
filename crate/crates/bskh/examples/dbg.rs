use bskh::ckom::{verify_chain_map, ChainMap};
use bskh::diagram::parse_tangle;
use bskh::maps::r1_add_maps;
use bskh::moves::{MovieEvent, R1Side};
const TREFOIL: &str = "
tangle ring=Z
X c1 = (e1,e4,e2,e5)
X c2 = (e3,e6,e4,e1)
X c3 = (e5,e2,e6,e3)
component k1 edges=(e1,e2,e3,e4,e5,e6) weight=0
end
";
const HOPF_W: &str = "
tangle ring=Z
X c1 = (x1,y1,x2,y2)
X c2 = (y2,x2,y1,x1)
component ka edges=(x1,x2) weight=0
component kb edges=(y1,y2) weight=3
end
";
const CIRCLE: &str = "
tangle ring=Z
component k1 edges=(u1) weight=0
end
";
fn check(dtxt: &str, edge: &str, label: &str) {
    let d = parse_tangle(dtxt).unwrap();
    for sign in [1i8, -1] {
        for side in [R1Side::Left, R1Side::Right] {
            let ev = MovieEvent::R1Add {
                edge: edge.into(), sign, side,
                new_crossing: "c9".into(),
                new_edges: ("f1".into(), "f2".into()),
            };
            let r = match r1_add_maps(&d, &ev) { Ok(r) => r, Err(e) => { println!("{label} {sign} {side:?}: build err {e}"); continue } };
            let gf = r.g.compose(&r.f);
            let fg = r.f.compose(&r.g);
            println!("{label} {sign} {side:?}: f ok={} g ok={} gf=id {} fg~id {}",
                verify_chain_map(&r.f).ok(), verify_chain_map(&r.g).ok(),
                gf.sub(&ChainMap::identity(&r.f.source)).is_zero(),
                r.h.relates(&fg, &ChainMap::identity(&r.f.target)));
        }
    }
}
fn check_r2(dtxt: &str, over: &str, under: &str, label: &str) {
    let d = parse_tangle(dtxt).unwrap();
    let ev = MovieEvent::R2Add {
        over: over.into(),
        under: under.into(),
        new_crossings: ("c8".into(), "c9".into()),
        new_edges: ("f1".into(), "f2".into(), "f3".into(), "f4".into()),
    };
    let r = match bskh::maps::r2_add_maps(&d, &ev) {
        Ok(r) => r,
        Err(e) => {
            println!("{label}: build err {e}");
            return;
        }
    };
    let gf = r.g.compose(&r.f);
    println!(
        "{label}: f ok={} g ok={} gf=id {}",
        verify_chain_map(&r.f).ok(),
        verify_chain_map(&r.g).ok(),
        gf.sub(&ChainMap::identity(&r.f.source)).is_zero()
    );
}
fn check_cc(dtxt: &str, c: &str, label: &str) {
    let d = parse_tangle(dtxt).unwrap();
    let info = d
        .crossing_data()
        .crossings
        .iter()
        .find(|x| x.id == c)
        .unwrap()
        .clone();
    let (after, cc) = bskh::maps::crossing_change(&d, c).unwrap();
    let (back, cc_rev) = bskh::maps::crossing_change(&after, c).unwrap();
    let want = &d.ring.from_i64(info.s as i64) * &(&info.w_over - &info.w_under);
    let round = cc_rev.compose(&cc);
    let expect = ChainMap::identity(&cc.source).scale(&want);
    println!(
        "{label}: back==d {} cc ok={} rev ok={} round==s(wo-wu)id {}",
        back.crossings == d.crossings,
        verify_chain_map(&cc).ok(),
        verify_chain_map(&cc_rev).ok(),
        round.sub(&expect).is_zero()
    );
}
fn main() {
    check(TREFOIL, "e2", "trefoil");
    check(HOPF_W, "x2", "hopfW");
    check(CIRCLE, "u1", "circle");
    check_r2(TREFOIL, "e1", "e4", "r2 trefoil e1/e4");
    check_r2(TREFOIL, "e4", "e1", "r2 trefoil e4/e1");
    check_r2(HOPF_W, "x1", "y1", "r2 hopfW x1/y1");
    check_r2(
        "
tangle ring=Q
component k1 edges=(u1) weight=0
component k2 edges=(u2) weight=1
end
",
        "u1",
        "u2",
        "r2 two circles",
    );
    // Removal maps, with the removed crossings conjugated away from the
    // last cube positions.
    {
        let d = parse_tangle(TREFOIL).unwrap();
        for sign in [1i8, -1] {
            for side in [R1Side::Left, R1Side::Right] {
                let ev = MovieEvent::R1Add {
                    edge: "e2".into(),
                    sign,
                    side,
                    new_crossing: "c9".into(),
                    new_edges: ("f1".into(), "f2".into()),
                };
                let kinked = bskh::moves::apply_event(&d, &ev).unwrap();
                let order: Vec<String> =
                    ["c9", "c2", "c1", "c3"].iter().map(|s| s.to_string()).collect();
                let (shuffled, iso) = bskh::maps::reorder_crossings(&kinked, &order).unwrap();
                let back: Vec<String> =
                    kinked.crossings.iter().map(|x| x.id.clone()).collect();
                let (_, iso_back) = bskh::maps::reorder_crossings(&shuffled, &back).unwrap();
                let round = iso_back.compose(&iso);
                let r = bskh::maps::r1_remove_maps(&shuffled, "c9").unwrap();
                println!(
                    "r1rm {sign} {side:?}: iso ok={} round=id {} f ok={} g ok={} fg=id {}",
                    verify_chain_map(&iso).ok(),
                    round.sub(&ChainMap::identity(&iso.source)).is_zero(),
                    verify_chain_map(&r.f).ok(),
                    verify_chain_map(&r.g).ok(),
                    r.f.compose(&r.g)
                        .sub(&ChainMap::identity(&r.g.source))
                        .is_zero()
                );
            }
        }
        let ev = MovieEvent::R2Add {
            over: "e1".into(),
            under: "e4".into(),
            new_crossings: ("c8".into(), "c9".into()),
            new_edges: ("f1".into(), "f2".into(), "f3".into(), "f4".into()),
        };
        let poked = bskh::moves::apply_event(&d, &ev).unwrap();
        let order: Vec<String> =
            ["c9", "c2", "c8", "c1", "c3"].iter().map(|s| s.to_string()).collect();
        let (shuffled, _) = bskh::maps::reorder_crossings(&poked, &order).unwrap();
        let r = bskh::maps::r2_remove_maps(&shuffled, "c8", "c9").unwrap();
        println!(
            "r2rm: f ok={} g ok={} fg=id {}",
            verify_chain_map(&r.f).ok(),
            verify_chain_map(&r.g).ok(),
            r.f.compose(&r.g)
                .sub(&ChainMap::identity(&r.g.source))
                .is_zero()
        );
    }
    check_cc(HOPF_W, "c1", "cc hopfW c1");
    check_cc(HOPF_W, "c2", "cc hopfW c2");
    check_cc(TREFOIL, "c2", "cc trefoil c2");
}
