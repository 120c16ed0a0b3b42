use bskh::moves::parse_movie;

fn check(text: &str, label: &str) {
    let m = parse_movie(text).unwrap();
    match bskh::maps::movie_map(&m) {
        Ok(f) => match bskh::tqft::kj_number(&f) {
            Ok(x) => println!("{label}: scalar {x:?}"),
            Err(e) => println!("{label}: kj err {e}"),
        },
        Err(e) => println!("{label}: err {e}"),
    }
}

fn main() {
    check(
        "
movie ring=Z
tangle ring=Z
end
event birth circle_edge=x weight=0 component=k1
event death circle_edge=x
end
",
        "sphere",
    );
    check(
        "
movie ring=Z
tangle ring=Z
end
event birth circle_edge=x weight=0 component=k1
event dot edge=x
event death circle_edge=x
end
",
        "dotted sphere",
    );
    check(
        "
movie ring=Z
tangle ring=Z
end
event birth circle_edge=x weight=0 component=k1
event saddle edges=(x,x) new_edges=(p,q)
event saddle edges=(p,q) new_edges=(r)
event death circle_edge=r
end
",
        "torus",
    );
    check(
        "
movie ring=Z
tangle ring=Z
end
event birth circle_edge=x weight=0 component=k1
event dot edge=x
event saddle edges=(x,x) new_edges=(p,q)
event saddle edges=(p,q) new_edges=(r)
event death circle_edge=r
end
",
        "dotted torus",
    );
    check(
        "
movie ring=Z
tangle ring=Z
end
event birth circle_edge=x weight=0 component=k1
event saddle edges=(x,x) new_edges=(p,q)
event saddle edges=(p,q) new_edges=(r)
event saddle edges=(r,r) new_edges=(s,t)
event saddle edges=(s,t) new_edges=(u)
event death circle_edge=u
end
",
        "genus 2",
    );
}
