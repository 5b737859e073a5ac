use nlm_core::{
    denoise, gaussian_patch_kernel, naive_reference_denoise, patch_distance_sq, search_window,
    BorderPolicy, CenterPolicy, Coord, DenoiseConfig, DistanceSource, GrayImage, SelectionRule,
    SelfWeight,
};
use proptest::prelude::*;

fn image(max_side: usize) -> impl Strategy<Value = GrayImage> {
    (6..=max_side, 6..=max_side).prop_flat_map(|(w, h)| {
        prop::collection::vec(0.0f64..255.0, w * h)
            .prop_map(move |data| GrayImage::new(w, h, data).unwrap())
    })
}

fn image_pair(max_side: usize) -> impl Strategy<Value = (GrayImage, GrayImage)> {
    image(max_side).prop_flat_map(|u| {
        let n = u.len();
        prop::collection::vec(-40.0f64..40.0, n).prop_map(move |noise| {
            let v = GrayImage::new(
                u.width(),
                u.height(),
                u.data().iter().zip(&noise).map(|(a, b)| a + b).collect(),
            )
            .unwrap();
            (u.clone(), v)
        })
    })
}

fn selection() -> impl Strategy<Value = SelectionRule> {
    prop_oneof![
        Just(SelectionRule::All),
        (1usize..90).prop_map(SelectionRule::TopK),
        (0.01f64..1.0).prop_map(SelectionRule::Threshold),
    ]
}

fn config() -> impl Strategy<Value = DenoiseConfig> {
    (
        (0usize..7, 1usize..=3, 5.0f64..60.0),
        prop_oneof![Just(f64::INFINITY), 0.5f64..4.0],
        selection(),
        prop_oneof![Just(DistanceSource::Noisy), Just(DistanceSource::Oracle)],
        prop_oneof![Just(CenterPolicy::Include), Just(CenterPolicy::Exclude)],
        prop_oneof![Just(SelfWeight::Literal), Just(SelfWeight::MaxOther)],
        prop_oneof![Just(BorderPolicy::Mirror), Just(BorderPolicy::Crop)],
    )
        .prop_map(
            |((d, patch_radius, h), kernel_a, selection, source, center, self_weight, border)| {
                DenoiseConfig {
                    h,
                    patch_radius,
                    kernel_a,
                    selection,
                    source,
                    center,
                    self_weight,
                    border,
                    ..DenoiseConfig::new(20.0, d)
                }
            },
        )
}

fn max_abs_diff(a: &GrayImage, b: &GrayImage) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fast_engine_equals_reference((u, v) in image_pair(14), cfg in config()) {
        let fast = denoise(&v, &cfg, Some(&u)).unwrap();
        let slow = naive_reference_denoise(&v, &cfg, Some(&u)).unwrap();
        prop_assert!(max_abs_diff(&fast, &slow) <= 1e-10);
    }

    #[test]
    fn output_stays_within_input_range((u, v) in image_pair(14), cfg in config()) {
        let (lo, hi) = v.min_max();
        let out = denoise(&v, &cfg, Some(&u)).unwrap();
        let tol = 1e-9 * (1.0 + hi.abs().max(lo.abs()));
        for &x in out.data() {
            prop_assert!(x >= lo - tol && x <= hi + tol);
        }
    }

    #[test]
    fn adding_a_constant_shifts_the_output((u, v) in image_pair(12), cfg in config(), c in -100.0f64..100.0) {
        let out = denoise(&v, &cfg, Some(&u)).unwrap();
        let shifted = denoise(&v.map(|x| x + c).unwrap(), &cfg, Some(&u.map(|x| x + c).unwrap())).unwrap();
        let expected = out.map(|x| x + c).unwrap();
        prop_assert!(max_abs_diff(&shifted, &expected) <= 1e-8);
    }

    #[test]
    fn runs_are_deterministic((u, v) in image_pair(12), cfg in config()) {
        let a = denoise(&v, &cfg, Some(&u)).unwrap();
        let b = denoise(&v, &cfg, Some(&u)).unwrap();
        prop_assert_eq!(a.data(), b.data());
    }

    #[test]
    fn large_top_k_equals_all((u, v) in image_pair(12), cfg in config(), extra in 0usize..10) {
        let window = (2 * cfg.d + 1).pow(2);
        let all = DenoiseConfig { selection: SelectionRule::All, ..cfg.clone() };
        let top = DenoiseConfig { selection: SelectionRule::TopK(window + extra), ..cfg };
        prop_assert_eq!(
            denoise(&v, &all, Some(&u)).unwrap().into_data(),
            denoise(&v, &top, Some(&u)).unwrap().into_data()
        );
    }

    #[test]
    fn oracle_equal_to_noisy_image_changes_nothing(v in image(12), cfg in config()) {
        let noisy = DenoiseConfig { source: DistanceSource::Noisy, ..cfg.clone() };
        let oracle = DenoiseConfig { source: DistanceSource::Oracle, ..cfg };
        prop_assert_eq!(
            denoise(&v, &noisy, None).unwrap().into_data(),
            denoise(&v, &oracle, Some(&v)).unwrap().into_data()
        );
    }

    #[test]
    fn patch_distance_symmetry_shift_and_scale(
        img in image(16),
        a in prop_oneof![Just(f64::INFINITY), 0.5f64..4.0],
        c in -50.0f64..50.0,
        s in 0.1f64..4.0,
        picks in (0usize..1000, 0usize..1000),
        exclude in any::<bool>(),
    ) {
        let k = gaussian_patch_kernel(3, a).unwrap();
        let center = if exclude { CenterPolicy::Exclude } else { CenterPolicy::Include };
        let at = |i: usize| Coord::new((i / img.width()) % img.height(), i % img.width());
        let (x, y) = (at(picks.0), at(picks.1));
        let m = BorderPolicy::Mirror;
        let dxy = patch_distance_sq(&img, x, y, &k, center, m).unwrap();
        prop_assert_eq!(dxy, patch_distance_sq(&img, y, x, &k, center, m).unwrap());
        prop_assert_eq!(patch_distance_sq(&img, x, x, &k, center, m).unwrap(), 0.0);

        let shifted = patch_distance_sq(&img.map(|p| p + c).unwrap(), x, y, &k, center, m).unwrap();
        prop_assert!((shifted - dxy).abs() <= 1e-9 * (1.0 + dxy));
        let scaled = patch_distance_sq(&img.map(|p| p * s).unwrap(), x, y, &k, center, m).unwrap();
        prop_assert!((scaled - s * s * dxy).abs() <= 1e-9 * (1.0 + s * s * dxy));
    }

    #[test]
    fn window_is_the_clipped_disc(w in 1usize..30, h in 1usize..30, d in 0usize..8, pick in 0usize..900) {
        let x = Coord::new(pick / w % h, pick % w);
        let got = search_window(x, d, w, h);
        let expected: Vec<Coord> = (0..h)
            .flat_map(|r| (0..w).map(move |c| Coord::new(r, c)))
            .filter(|&y| x.dist_sq(y) <= d * d)
            .collect();
        prop_assert_eq!(got, expected);
    }
}
