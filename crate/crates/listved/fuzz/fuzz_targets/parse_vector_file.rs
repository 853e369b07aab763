#![no_main]

use libfuzzer_sys::fuzz_target;

use listved::geometry::{gram_of, ved, verify_kkt, Strategy};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(vectors) = listved::geometry::parse_vector_file(text) else {
        return;
    };
    // Small accepted inputs must solve cleanly and self-certify.
    let coords: usize = vectors.iter().map(|v| v.coords().len()).sum();
    if vectors.len() <= 6 && coords <= 24 {
        let problem = gram_of(vectors).unwrap();
        if let Ok(solution) = ved(&problem, Strategy::Exhaustive) {
            assert!(solution.ved.is_finite());
            assert!(verify_kkt(&problem, &solution).passes(1e-6));
        }
    }
});
