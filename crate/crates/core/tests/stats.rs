use percept_core::stats::{anova_oneway, ptukey_upper, tukey_hsd, GroupSample};
use proptest::prelude::*;

fn groups(data: &[&[f64]]) -> Vec<GroupSample> {
    data.iter()
        .enumerate()
        .map(|(i, v)| GroupSample::new(format!("g{i}"), v.to_vec()))
        .collect()
}

const EQUAL: [&[f64]; 3] = [
    &[2.1, 2.5, 1.9, 2.8, 2.3],
    &[1.2, 0.8, 1.5, 1.1, 0.9],
    &[2.0, 2.6, 2.9, 2.4, 3.1],
];

// scipy 1.15.3: stats.tukey_hsd and stats.studentized_range.sf
const EQUAL_Q: [(usize, usize, f64, f64, f64); 3] = [
    (0, 1, 1.22, 7.644_934_674_541_732, 4.305_706_113_786_334e-4),
    (0, 2, -0.28, 1.754_575_171_206_297_6, 0.453_242_627_905_778_3),
    (1, 2, -1.5, 9.399_509_845_748_03, 6.528_871_210_242_926e-5),
];

#[test]
fn tukey_matches_reference_on_equal_groups() {
    let g = groups(&EQUAL);
    let a = anova_oneway(&g).unwrap();
    assert!((a.f - 24.979_057_591_623_015).abs() < 1e-9);
    assert!((a.p - 5.278_351_286_219_548e-5).abs() < 1e-6);
    let t = tukey_hsd(&g, 0.05).unwrap();
    for (i, j, diff, q, p) in EQUAL_Q {
        let e = t.entry(&format!("g{i}"), &format!("g{j}")).unwrap();
        assert!((e.difference - diff).abs() < 1e-9, "{e:?}");
        assert!((e.q - q).abs() < 1e-3, "{e:?}");
        assert!((e.p - p).abs() < 1e-3, "{e:?}");
        let back = t.entry(&format!("g{j}"), &format!("g{i}")).unwrap();
        assert_eq!(back.difference, -e.difference);
        assert_eq!(back.significant, e.significant);
    }
}

#[test]
fn tukey_kramer_on_unequal_groups() {
    let g = groups(&[
        &[1.0, 2.0, 3.0, 2.5],
        &[2.2, 3.1, 4.0, 3.3, 2.9, 3.5],
        &[0.5, 1.1, 0.7],
    ]);
    let a = anova_oneway(&g).unwrap();
    assert!((a.f - 13.882_032_999_680_055).abs() < 1e-9);
    let t = tukey_hsd(&g, 0.05).unwrap();
    for (i, j, diff, p) in [
        (0, 1, -1.041_666_666_666_666_7, 0.075_507_38),
        (0, 2, 1.358_333_333_333_333_3, 0.049_958_65),
        (1, 2, 2.4, 0.001_010_76),
    ] {
        let e = t.entry(&format!("g{i}"), &format!("g{j}")).unwrap();
        assert!((e.difference - diff).abs() < 1e-9);
        assert!((e.p - p).abs() < 1e-3, "{e:?}");
    }
}

#[test]
fn studentized_range_tail_points() {
    for (q, k, df, p) in [
        (1.0, 2, 5, 0.511_084_080_430_280_5),
        (3.0, 4, 20, 0.180_473_451_469_107_43),
        (5.0, 5, 10, 0.034_206_858_049_940_39),
        (2.5, 3, 3, 0.318_774_192_463_037_4),
        (4.2, 10, 60, 0.109_368_270_807_481_57),
        (3.77, 3, 12, 0.050_182_361_760_553_57),
    ] {
        let got = ptukey_upper(q, k, df).unwrap();
        assert!((got - p).abs() < 1e-5, "q={q} k={k} df={df}: {got} vs {p}");
    }
}

#[test]
fn tail_is_monotone() {
    let mut last = 1.0;
    for i in 1..30 {
        let p = ptukey_upper(i as f64 * 0.25, 3, 12).unwrap();
        assert!(p < last, "{p} {last}");
        last = p;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn affine_invariance(
        data in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 4), 3),
        shift in -100.0f64..100.0,
        scale in 0.1f64..50.0,
    ) {
        let g: Vec<GroupSample> = data.iter().enumerate()
            .map(|(i, v)| GroupSample::new(format!("g{i}"), v.clone())).collect();
        let moved: Vec<GroupSample> = g.iter()
            .map(|s| GroupSample::new(s.id.clone(), s.observations.iter().map(|v| v * scale + shift).collect()))
            .collect();
        let (a, b) = (anova_oneway(&g).unwrap(), anova_oneway(&moved).unwrap());
        prop_assert!((a.f - b.f).abs() <= 1e-7 * a.f.max(1.0));
        let (ta, tb) = (tukey_hsd(&g, 0.05).unwrap(), tukey_hsd(&moved, 0.05).unwrap());
        for (x, y) in ta.entries.iter().zip(&tb.entries) {
            prop_assert!((x.q - y.q).abs() <= 1e-7 * x.q.max(1.0));
        }
    }

    #[test]
    fn anova_outputs_are_in_range(data in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 5), 2..5)) {
        let g: Vec<GroupSample> = data.iter().enumerate()
            .map(|(i, v)| GroupSample::new(format!("g{i}"), v.clone())).collect();
        let a = anova_oneway(&g).unwrap();
        prop_assert!(a.f >= 0.0 && (0.0..=1.0).contains(&a.p));
        let t = tukey_hsd(&g, 0.05).unwrap();
        if a.p > 0.05 {
            // not a strict implication; only count
            let flagged = t.entries.iter().filter(|e| e.significant).count();
            if flagged > 0 {
                eprintln!("finding: ANOVA p={} but {flagged} Tukey pairs significant", a.p);
            }
        }
    }
}
