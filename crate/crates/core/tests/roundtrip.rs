use spps::problem::{builtin, builtin_names, load_problem_file, save_problem, BuiltinOptions, SpectralProblem};
use std::io::Write;

fn same_samples(a: &SpectralProblem, b: &SpectralProblem) -> bool {
    let bits = |p: &SpectralProblem| {
        let mut v: Vec<u64> = Vec::new();
        let mut push = |f: &spps::quadrature::SampledFunction| {
            v.extend(f.values().iter().flat_map(|z| [z.re.to_bits(), z.im.to_bits()]));
        };
        push(&p.p);
        push(&p.q);
        for t in &p.terms {
            push(&t.r);
            push(&t.s);
        }
        v
    };
    a.grid.nodes() == b.grid.nodes() && bits(a) == bits(b)
}

#[test]
fn every_builtin_round_trips_through_a_file() {
    let opts = BuiltinOptions { intervals: Some(200), ..Default::default() };
    for name in builtin_names() {
        let original = builtin(name, &opts).unwrap();
        let text = save_problem(&original).unwrap();
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(text.as_bytes()).unwrap();
        let loaded = load_problem_file(file.path()).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(same_samples(&original, &loaded), "{name} changed on save/load");
        assert_eq!(original.bc_left, loaded.bc_left, "{name}");
        assert_eq!(original.bc_right, loaded.bc_right, "{name}");
        assert_eq!(original.flags, loaded.flags, "{name}");
    }
}
