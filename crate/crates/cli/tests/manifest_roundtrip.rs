use bht_cli::manifest::Manifest;
use bht_core::fields::{classify, Tolerances};
use bht_core::graph::{preset, PRESETS};

#[test]
fn catalog_round_trips_through_text() {
    let mut m = Manifest::from_catalog().unwrap();
    for name in PRESETS {
        m.graphs.push(preset(name, 2).unwrap());
    }
    let text = m.to_text();
    let back = Manifest::parse(&text).unwrap();
    assert_eq!(back.to_text(), text);
    assert_eq!(back.graphs, m.graphs);
    assert_eq!(back.maps.len(), m.maps.len());

    let tol = Tolerances::default();
    for (a, b) in m.maps.iter().zip(&back.maps) {
        assert_eq!(a.name, b.name);
        assert_eq!(
            (a.expected, a.claimed, &a.locus),
            (b.expected, b.claimed, &b.locus)
        );
        assert_eq!(a.map.domain, b.map.domain, "{}", a.name);
        assert_eq!(a.map.target, b.map.target, "{}", a.name);
        assert_eq!(a.map.components, b.map.components, "{}", a.name);
        assert_eq!(a.map.region, b.map.region, "{}", a.name);
        let ra = classify(&a.map, 64, &tol, true).unwrap();
        let rb = classify(&b.map, 64, &tol, true).unwrap();
        assert_eq!(ra.verdict, rb.verdict, "{}", a.name);
        assert_eq!(ra.points, rb.points, "{}", a.name);
        assert_eq!(ra.sup_bitension, rb.sup_bitension, "{}", a.name);
    }
}
