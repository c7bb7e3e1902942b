mod common;

use common::*;
use maxent_augment::mixer::transform_image_traced;
use maxent_augment::transforms::StrengthInterval;
use maxent_augment::{
    preset, replay, transform_image, DepthMode, Family, MixOverrides, PipelineConfig, RngStream,
};
use proptest::prelude::*;

fn config_strategy() -> impl Strategy<Value = PipelineConfig> {
    (
        1usize..=4,
        1usize..=3,
        any::<bool>(),
        (0.2f64..5.0, 0.2f64..8.0, 0.2f64..8.0),
        prop::sample::subsequence(Family::ALL.to_vec(), 1..=3),
        (2usize..=6, prop::option::of(0.0f64..2.0)),
        (1usize..=200, 0.0f64..0.05),
        (prop::sample::select(vec![1usize, 3, 5]), 0.0f64..0.3),
        (
            prop::sample::select(vec![0.0f64, 1.0, 1.5]),
            prop::sample::select(vec![0.0f64, 2.0, 3.0]),
        ),
    )
        .prop_map(
            |(
                width,
                depth,
                uniform,
                (conc, a, b),
                pool,
                (kt, st),
                (kg, sg),
                (ko, so),
                (dg, dw),
            )| {
                let mut cfg = preset("default").unwrap();
                cfg.width = width;
                cfg.depth = depth;
                cfg.depth_mode = if uniform {
                    DepthMode::UniformUpTo
                } else {
                    DepthMode::Fixed
                };
                cfg.dirichlet_concentration = conc;
                cfg.beta_alpha = a;
                cfg.beta_beta = b;
                cfg.family_pool = pool;
                cfg.diffeo.smoothness_cutoff = kt;
                cfg.diffeo.strength = st;
                cfg.diffeo.strength_interval = StrengthInterval::Auto;
                cfg.color.smoothness_cutoff = kg;
                cfg.color.strength = sg;
                cfg.spectral.kernel_size = ko;
                cfg.spectral.strength = so;
                cfg.color.decay_exponent = dg;
                cfg.spectral.decay_exponent = dw;
                cfg
            },
        )
}

fn image_strategy() -> impl Strategy<Value = maxent_augment::ImageTensor> {
    (
        any::<u64>(),
        prop::sample::select(vec![12usize, 16]),
        prop::sample::select(vec![1usize, 3]),
    )
        .prop_map(|(seed, side, ch)| random_image(seed, side, side + 2, ch))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn blend_stays_in_convex_hull(cfg in config_strategy(), img in image_strategy(), seed in any::<u64>()) {
        let (_, _, trace) = transform_image_traced(RngStream::new(seed, 1), &cfg, &img, &MixOverrides::default()).unwrap();
        for (idx, &v) in trace.unclamped.iter().enumerate() {
            let mut lo = img.data()[idx];
            let mut hi = lo;
            for b in &trace.branch_outputs {
                lo = lo.min(b.data()[idx]);
                hi = hi.max(b.data()[idx]);
            }
            prop_assert!(v >= lo && v <= hi, "pixel {idx}: {v} outside [{lo}, {hi}]");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn zero_strength_is_neutral(cfg in config_strategy(), img in image_strategy(), seed in any::<u64>()) {
        let cfg = cfg.with_zero_strengths();
        let (out, _) = transform_image(RngStream::new(seed, 0), &cfg, &img).unwrap();
        prop_assert!(out.max_abs_diff(&img).unwrap() <= 1e-6);
    }

    #[test]
    fn records_replay_exactly(cfg in config_strategy(), img in image_strategy(), seed in any::<u64>(), stream in any::<u64>()) {
        let (out, record) = transform_image(RngStream::new(seed, stream), &cfg, &img).unwrap();
        let json = serde_json::to_string(&record).unwrap();
        let parsed = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&record, &parsed);
        let again = replay(&parsed, &img).unwrap();
        prop_assert_eq!(out.data(), again.data());
    }

    #[test]
    fn same_stream_same_output(cfg in config_strategy(), img in image_strategy(), seed in any::<u64>()) {
        let a = transform_image(RngStream::new(seed, 5), &cfg, &img).unwrap();
        let b = transform_image(RngStream::new(seed, 5), &cfg, &img).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn tampered_record_is_rejected() {
    let cfg = preset("S1").unwrap();
    let img = random_image(1, 24, 24, 3);
    let (_, mut record) = transform_image(RngStream::new(1, 2), &cfg, &img).unwrap();
    record.branches[0][0].digest = "0000000000000000".into();
    assert!(replay(&record, &img).is_err());
}

#[test]
fn streams_differ() {
    let cfg = preset("S1").unwrap();
    let img = random_image(1, 24, 24, 3);
    let (a, _) = transform_image(RngStream::new(1, 0), &cfg, &img).unwrap();
    let (b, _) = transform_image(RngStream::new(1, 1), &cfg, &img).unwrap();
    assert!(a.max_abs_diff(&b).unwrap() > 1e-3);
}
