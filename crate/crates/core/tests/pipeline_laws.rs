mod common;

use qhs_core::recover::character_is_trivial;
use qhs_core::{
    build_instance, build_instance_with_codomain, fourier_operator, run_pipeline, sample,
    sample_trials, step_trace, BasisOrdering, FiniteGroup, MeasureGranularity, OutcomeLabel,
    PipelineConfig, SecondTransform,
};

fn abelian_groups() -> Vec<FiniteGroup> {
    common::builtin_groups_upto_64()
        .into_iter()
        .filter(|g| g.is_abelian() && g.order() <= 24 && !matches!(g.kind(), qhs_core::GroupKind::Dihedral(_)))
        .collect()
}

#[test]
fn abelian_outcomes_are_uniform_on_the_annihilator() {
    for g in abelian_groups() {
        let f = fourier_operator(&g, &BasisOrdering::default()).unwrap();
        for k in g.all_subgroups().unwrap() {
            let inst = build_instance(&g, &k, 17).unwrap();
            let dist = run_pipeline(&inst, &f, &PipelineConfig::default()).unwrap();
            let perp: Vec<usize> = g
                .elements()
                .filter(|&y| k.elements().iter().all(|&x| character_is_trivial(&g, y, x).unwrap()))
                .collect();
            assert_eq!(perp.len() * k.order(), g.order(), "{g}: |K^⊥| = [G:K]");
            for (label, p) in dist.iter() {
                let OutcomeLabel::Character(y) = label else {
                    panic!("{g}: unexpected label {label}")
                };
                if perp.contains(&y) {
                    assert!((p - 1.0 / perp.len() as f64).abs() < 1e-10, "{g} {:?} y={y}", k.elements());
                } else {
                    assert!(p.abs() < 1e-12, "{g} {:?} y={y}", k.elements());
                }
            }
        }
    }
}

#[test]
fn distribution_does_not_depend_on_the_injection() {
    let groups: Vec<FiniteGroup> = ["Z12", "Z2^3", "Z2xZ6", "D3", "D4", "D6"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    for g in groups {
        let f = fourier_operator(&g, &BasisOrdering::default()).unwrap();
        for k in g.all_subgroups().unwrap() {
            let reference = run_pipeline(&build_instance(&g, &k, 0).unwrap(), &f, &PipelineConfig::default()).unwrap();
            for seed in 1..=5 {
                let inst = build_instance(&g, &k, seed).unwrap();
                let dist = run_pipeline(&inst, &f, &PipelineConfig::default()).unwrap();
                assert_eq!(dist.labels(), reference.labels());
                let dev = dist
                    .probs()
                    .iter()
                    .zip(reference.probs())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                assert!(dev < 1e-12, "{g} {:?} seed {seed}: {dev}", k.elements());
            }
            // a larger codomain changes nothing either
            let wide = build_instance_with_codomain(&g, &k, 9, g.order() + 3).unwrap();
            let dist = run_pipeline(&wide, &f, &PipelineConfig::default()).unwrap();
            assert!(dist.total_variation(&reference).unwrap() < 1e-12);
        }
    }
}

#[test]
fn every_step_preserves_the_norm() {
    for spec in ["Z8", "Z2^4", "D5", "D8"] {
        let g: FiniteGroup = spec.parse().unwrap();
        let f = fourier_operator(&g, &BasisOrdering::default()).unwrap();
        for k in g.all_subgroups().unwrap() {
            let inst = build_instance(&g, &k, 3).unwrap();
            for second in [SecondTransform::Forward, SecondTransform::Inverse] {
                let cfg = PipelineConfig {
                    second_transform: second,
                    ..Default::default()
                };
                let trace = step_trace(&inst, &f, &cfg).unwrap();
                assert_eq!(trace.len(), 4);
                for snap in &trace {
                    assert!((snap.norm - 1.0).abs() < 1e-12, "{spec} step {}", snap.step);
                }
                let amp = 1.0 / (g.order() as f64).sqrt();
                for gi in g.elements() {
                    assert!((trace[1].state.amplitude(gi, 0).norm() - amp).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn inverse_transform_negates_cyclic_outcomes() {
    for n in [6usize, 12, 20] {
        let g = FiniteGroup::cyclic(n).unwrap();
        let f = fourier_operator(&g, &BasisOrdering::default()).unwrap();
        for k in g.all_subgroups().unwrap() {
            let inst = build_instance(&g, &k, 1).unwrap();
            let fwd = run_pipeline(&inst, &f, &PipelineConfig::default()).unwrap();
            let inv = run_pipeline(
                &inst,
                &f,
                &PipelineConfig {
                    second_transform: SecondTransform::Inverse,
                    ..Default::default()
                },
            )
            .unwrap();
            for y in 0..n {
                let a = fwd.prob_of(&OutcomeLabel::Character(y));
                let b = inv.prob_of(&OutcomeLabel::Character((n - y) % n));
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn weak_sampling_sums_full_triples() {
    for n in [3usize, 4, 5, 6, 8] {
        let g = FiniteGroup::dihedral(n).unwrap();
        let f = fourier_operator(&g, &BasisOrdering::default()).unwrap();
        for k in g.all_subgroups().unwrap() {
            let inst = build_instance(&g, &k, 2).unwrap();
            let full = run_pipeline(&inst, &f, &PipelineConfig::default()).unwrap();
            let weak = run_pipeline(
                &inst,
                &f,
                &PipelineConfig {
                    measure_granularity: MeasureGranularity::IrrepLabelOnly,
                    ..Default::default()
                },
            )
            .unwrap();
            for (label, p) in weak.iter() {
                let OutcomeLabel::Irrep(i) = label else { panic!("{label}") };
                let summed: f64 = full
                    .iter()
                    .filter(|(l, _)| matches!(l, OutcomeLabel::Triple(r) if r.irrep == i))
                    .map(|(_, q)| q)
                    .sum();
                assert!((p - summed).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn sampling_is_reproducible_and_stays_on_support() {
    let g: FiniteGroup = "Z2^4".parse().unwrap();
    let k = g.subgroup_from_generators(&[0b0110, 0b1001]).unwrap();
    let f = fourier_operator(&g, &BasisOrdering::default()).unwrap();
    let dist = run_pipeline(&build_instance(&g, &k, 0).unwrap(), &f, &PipelineConfig::default()).unwrap();
    let support = dist.support();
    let a = sample_trials(&dist, 500, 77);
    let b = sample_trials(&dist, 500, 77);
    assert_eq!(a, b);
    assert!(a.iter().all(|l| support.contains(l)));
    assert_ne!(a, sample_trials(&dist, 500, 78));
    assert_eq!(sample(&dist, 50, 4), sample(&dist, 50, 4));
}
