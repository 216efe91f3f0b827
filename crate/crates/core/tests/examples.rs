macro_rules! example {
    ($name:ident, $path:literal, $needle:literal) => {
        mod $name {
            #![allow(dead_code)]
            include!($path);

            #[test]
            fn runs() {
                let mut out = Vec::new();
                run(&mut out).unwrap();
                let text = String::from_utf8(out).unwrap();
                assert!(text.contains($needle), "{text}");
            }
        }
    };
}

example!(
    bell_correlations,
    "../examples/bell_correlations.rs",
    "worst disagreement"
);
example!(cat_evolution, "../examples/cat_evolution.rs", "distance to the singlet");
example!(quantum_eraser, "../examples/quantum_eraser.rs", "z  +  - 0.000000");
example!(ghz_paradox, "../examples/ghz_paradox.rs", "XXX eigenvalue -1.0");
example!(
    ghz_consistent_sets,
    "../examples/ghz_consistent_sets.rs",
    "boundary-inclusive: passed false"
);
example!(zwm_visibility, "../examples/zwm_visibility.rs", "1.0   1.000000000");
example!(
    photoelectric,
    "../examples/photoelectric.rs",
    "Electron marginal Some((0.5, 0.5))"
);
