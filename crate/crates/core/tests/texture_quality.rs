use mstruct::quality::{mse, psnr, ssim, volume_quality, SsimParams};
use mstruct::synth::{complement, generate, FixtureSpec, FixtureVariant};
use mstruct::texture::{anisotropy_index, classify_volume, directional_features, glcm, GlcmParams, Verdict};
use mstruct::{Axis, SliceImage, VoxelVolume};
use proptest::prelude::*;

fn laminate(dims: [usize; 3], t: usize) -> VoxelVolume {
    generate(&FixtureSpec::new(FixtureVariant::Laminate { axis: Axis::Z, slab_thickness: t }, dims), 0).unwrap()
}

#[test]
fn laminate_features_match_hand_count() {
    // 8^3, slabs of 2 along Z: rows of X and Y slices flip at 3 of 7 row pairs.
    let vol = laminate([8, 8, 8], 2);
    let params = GlcmParams::default();
    let f = 3.0 / 7.0;
    let d2 = 255.0f64 * 255.0;
    // 0 deg pairs never cross a slab boundary; 45, 90 and 135 deg pairs do at rate f
    let contrast = 0.75 * d2 * f;
    let homogeneity = 0.25 + 0.75 * (1.0 - f + f / (1.0 + d2));
    for axis in [Axis::X, Axis::Y] {
        let s = directional_features(&vol, axis, &params).unwrap();
        assert!((s.contrast - contrast).abs() < 1e-9 * contrast, "{axis}: {}", s.contrast);
        assert!((s.homogeneity - homogeneity).abs() < 1e-12, "{axis}: {}", s.homogeneity);
    }
    let z = directional_features(&vol, Axis::Z, &params).unwrap();
    assert_eq!(z.contrast, 0.0);
    assert_eq!(z.homogeneity, 1.0);
    assert_eq!(z.energy, 1.0);
    assert_eq!(z.entropy, 0.0);

    let report = classify_volume(&vol, &params).unwrap();
    assert_eq!(report.verdict, Verdict::Anisotropy);
    assert!(report.sigmas.contrast > 100.0);
}

fn rotate_about_z(vol: &VoxelVolume) -> VoxelVolume {
    // new(x, y, z) = old(y, n - 1 - x, z)
    let [n, _, nz] = vol.dims();
    let mut data = Vec::with_capacity(vol.len());
    for z in 0..nz {
        for y in 0..n {
            for x in 0..n {
                data.push(vol.get(y, n - 1 - x, z));
            }
        }
    }
    VoxelVolume::new_phase(vol.dims(), data, vol.n_phases().unwrap()).unwrap()
}

#[test]
fn rotation_swaps_x_and_y() {
    for seed in 0..3 {
        let vol = generate(&FixtureSpec::new(FixtureVariant::Bernoulli { p: 0.3 }, [9, 9, 6]), seed).unwrap();
        let params = GlcmParams::default();
        let a = classify_volume(&vol, &params).unwrap();
        let b = classify_volume(&rotate_about_z(&vol), &params).unwrap();
        for (p, q) in [(a.x, b.y), (a.y, b.x), (a.z, b.z)] {
            for (u, v) in p.as_array().into_iter().zip(q.as_array()) {
                assert!((u - v).abs() <= 1e-12 * u.abs().max(1.0), "{u} vs {v}");
            }
        }
        assert!((a.ai - b.ai).abs() <= 1e-12 * a.ai.max(1.0));
        assert_eq!(a.verdict, b.verdict);
    }
}

#[test]
fn constant_volume_is_isotropic() {
    let vol = VoxelVolume::new_gray([6, 7, 8], vec![90; 336]).unwrap();
    let r = classify_volume(&vol, &GlcmParams::default_for(vol.kind())).unwrap();
    assert_eq!(r.ai, 0.0);
    assert_eq!(r.verdict, Verdict::Isotropy);
}

/// Closed-form SSIM of a window where a fraction `f` of pixels is 255 in `a`
/// and `b = 255 - a`.
fn complement_window_ssim(f: f64, params: &SsimParams) -> f64 {
    let l = params.dynamic_range;
    let c1 = (params.k1 * l).powi(2);
    let c2 = (params.k2 * l).powi(2);
    let (mu_a, mu_b) = (l * f, l * (1.0 - f));
    let var = l * l * f * (1.0 - f);
    ((2.0 * mu_a * mu_b + c1) * (-2.0 * var + c2)) / ((mu_a * mu_a + mu_b * mu_b + c1) * (2.0 * var + c2))
}

#[test]
fn laminate_against_complement_matches_closed_form() {
    let (n, t) = (10usize, 3usize);
    let vol = laminate([n, n, n], t);
    let comp = complement(&vol).unwrap();
    let params = SsimParams::default();
    let k = params.window;
    let on = |z: usize| (z / t) % 2 == 1;

    // Z slices are constant images
    let z_mean = (0..n)
        .map(|z| complement_window_ssim(if on(z) { 1.0 } else { 0.0 }, &params))
        .sum::<f64>()
        / n as f64;
    // X and Y slices have rows along Z; every slice is the same striped image
    let positions = n - k + 1;
    let striped = (0..positions)
        .map(|r| complement_window_ssim((r..r + k).filter(|&z| on(z)).count() as f64 / k as f64, &params))
        .sum::<f64>()
        / positions as f64;
    let expected = (z_mean + 2.0 * striped) / 3.0;

    let q = volume_quality(&vol, &comp, &params).unwrap();
    assert!((q.mean_ssim - expected).abs() < 1e-9, "{} vs {expected}", q.mean_ssim);
    assert!((q.per_axis[2].mean_ssim - z_mean).abs() < 1e-9);
    assert!((q.per_axis[0].mean_ssim - striped).abs() < 1e-9);
    // every pixel differs by 255
    assert_eq!(q.mean_psnr, 0.0);
}

#[test]
fn overall_mean_is_slice_weighted() {
    let a = generate(&FixtureSpec::new(FixtureVariant::Bernoulli { p: 0.5 }, [8, 9, 10]), 1).unwrap();
    let b = generate(&FixtureSpec::new(FixtureVariant::Bernoulli { p: 0.5 }, [8, 9, 10]), 2).unwrap();
    let q = volume_quality(&a, &b, &SsimParams::default()).unwrap();
    assert_eq!(q.n_slices, 27);
    let w: f64 = q.per_axis.iter().map(|p| p.n_slices as f64 * p.mean_ssim).sum::<f64>() / 27.0;
    assert_eq!(q.mean_ssim, w);
}

fn image(w: usize, h: usize) -> impl Strategy<Value = SliceImage> {
    proptest::collection::vec(any::<u8>(), w * h).prop_map(move |d| SliceImage::new(w, h, d).unwrap())
}

fn image_pair() -> impl Strategy<Value = (SliceImage, SliceImage)> {
    (7usize..14, 7usize..14).prop_flat_map(|(w, h)| (image(w, h), image(w, h)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_properties((a, b) in image_pair()) {
        let params = SsimParams::default();
        prop_assert_eq!(ssim(&a, &a, &params).unwrap(), 1.0);
        prop_assert_eq!(psnr(&a, &a, 255.0).unwrap(), f64::INFINITY);
        let m = mse(&a, &b).unwrap();
        prop_assert_eq!(m, mse(&b, &a).unwrap());
        prop_assert_eq!(m == 0.0, a == b);
        let s = ssim(&a, &b, &params).unwrap();
        prop_assert!((-1.0..=1.0).contains(&s));
        if a != b {
            prop_assert!(s < 1.0);
        }
    }

    #[test]
    fn glcm_is_normalized_and_symmetric(img in image(9, 8), levels in 2u16..=256) {
        let params = GlcmParams { levels, ..GlcmParams::default() };
        let g = glcm(&img, &params).unwrap();
        prop_assert!((g.sum() - 1.0).abs() < 1e-12);
        let n = g.levels;
        for i in 0..n {
            for j in 0..i {
                prop_assert_eq!(g.at(i, j), g.at(j, i));
            }
        }
        let f = mstruct::texture::glcm_features(&g).unwrap();
        prop_assert!(f.contrast >= 0.0);
        prop_assert!(f.homogeneity > 0.0 && f.homogeneity <= 1.0 + 1e-12);
        prop_assert!(f.energy > 0.0 && f.energy <= 1.0 + 1e-12);
        prop_assert!(f.entropy >= 0.0 && f.entropy <= 2.0 * f64::from(levels).log2() + 1e-9);
    }

    #[test]
    fn anisotropy_is_permutation_invariant(v in proptest::array::uniform12(0.0f64..500.0)) {
        use mstruct::texture::FeatureStats;
        let s = |k: usize| FeatureStats { contrast: v[k], homogeneity: v[k + 1], energy: v[k + 2], entropy: v[k + 3] };
        let (x, y, z) = (s(0), s(4), s(8));
        let base = anisotropy_index(x, y, z).unwrap().ai;
        prop_assert!(base >= 0.0);
        for (a, b, c) in [(x, z, y), (y, x, z), (y, z, x), (z, x, y), (z, y, x)] {
            prop_assert_eq!(anisotropy_index(a, b, c).unwrap().ai, base);
        }
        prop_assert_eq!(anisotropy_index(x, x, x).unwrap().ai, 0.0);
    }
}
