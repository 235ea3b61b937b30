use reslab_core::constructor::{big_rectangle, build_even_pair, Offset, DEFAULT_RANGE};
use reslab_core::resonance::{classify_trichotomy, scan_energy, ResonanceOptions, Trichotomy};

fn fractions(n: usize) -> Vec<f64> {
    (0..n).map(|j| (j as f64 + 0.5) / n as f64).collect()
}

#[test]
fn even_pair_resonates_only_at_its_level() {
    let r = build_even_pair(&[0.0, 0.0, 1.0], 1.0, Offset::Fixed(1.0), DEFAULT_RANGE).unwrap();
    let p = big_rectangle(&r.v1, &r.v2, 2.0, 2.0).unwrap();
    let opts = ResonanceOptions::default();
    for (e, resonant) in [(1.0, true), (1.5, false), (0.5, false)] {
        let thetas: Vec<f64> = fractions(40).iter().map(|f| f * e).collect();
        let s = scan_energy(&p, &r.v1, &r.v2, e, &thetas, &opts).unwrap();
        for iv in &s.intervals {
            let f = iv.fraction.unwrap();
            if resonant {
                assert_eq!(f, 1.0);
            } else {
                assert!(f < 0.05, "E = {e}: {f}");
            }
        }
        assert_eq!(s.candidate, resonant);
    }
    let t = classify_trichotomy(&r.v1, &r.v2, &p, &[0.5, 1.0, 1.5], &fractions(20), &opts).unwrap();
    assert_eq!(t.verdict, Trichotomy::SingletonCandidate { energy: 1.0 });
    assert!(t.warnings.is_empty());
}
