use bskh::diagram::parse_tangle;
use bskh::moves::{apply_event, MovieEvent};
const TREFOIL: &str = "
tangle ring=Z
X c1 = (e1,e4,e2,e5)
X c2 = (e3,e6,e4,e1)
X c3 = (e5,e2,e6,e3)
component k1 edges=(e1,e2,e3,e4,e5,e6) weight=0
end
";
fn main() {
    let d = parse_tangle(TREFOIL).unwrap();
    let ev = MovieEvent::R2Add {
        over: "e1".into(),
        under: "e4".into(),
        new_crossings: ("c8".into(), "c9".into()),
        new_edges: ("f1".into(), "f2".into(), "f3".into(), "f4".into()),
    };
    let a = apply_event(&d, &ev).unwrap();
    for x in &a.crossings { println!("{} {:?}", x.id, x.slots); }
    for v in [[0u8,0,0,0,1],[0,0,0,1,0]] {
        let r = a.resolve(&v).unwrap();
        println!("v={v:?} circles={:?}", r.circles);
    }
    let rb = d.resolve(&[0,0,0]).unwrap();
    println!("before circles={:?}", rb.circles);
}
