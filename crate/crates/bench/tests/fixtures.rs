use levykb_bench::presets;

#[test]
fn presets_are_distinct_and_evaluate() {
    let all = presets();
    assert_eq!(all.len(), 4);
    for (name, m) in &all {
        let psi = m.psi(3.0).unwrap();
        assert!(psi.re > 0.0 && psi.re.is_finite(), "{name}");
    }
    let hashes: std::collections::BTreeSet<String> = all.iter().map(|(_, m)| m.spec().hash_hex()).collect();
    assert_eq!(hashes.len(), 4);
}
