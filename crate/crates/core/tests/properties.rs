use blockfade::channel::FadingSpec;
use blockfade::codedmod::{ConvCode, Demapper, FrameConfig};
use blockfade::exec::{stream_rng, Stream};
use blockfade::exponents::{
    block_diversity, random_coding_lower_bound, singleton_block_diversity, theorem_exponent, upper_bound,
    ExponentQuery, RateRatio,
};
use blockfade::mutual_info::{gaussian_logdet_mi, gaussian_mi, log2_det_block, BlockMi, MiOptions};
use blockfade::outage::{estimate_outage, OutageConfig};
use blockfade::{Complex64, Constellation, InputModel, Labeling, MiMethod, Rotation, Scheme};
use proptest::prelude::*;

fn constellation(m: usize) -> Constellation {
    Constellation::qam(m, Labeling::Gray).unwrap()
}

fn catalog(i: usize) -> Rotation {
    [Rotation::identity(1), Rotation::cyclotomic2(), Rotation::kruskemper4(), Rotation::identity(3)][i].clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rotate_preserves_norm(r in 0usize..4, big in any::<bool>(), labels in prop::collection::vec(0usize..16, 4)) {
        let rot = catalog(r);
        let c = constellation(if big { 4 } else { 2 });
        let s: Vec<Complex64> = labels[..rot.dim()].iter().map(|&l| c.symbol(l % c.size())).collect();
        let x = rot.rotate(&s).unwrap();
        let before: f64 = s.iter().map(|z| z.norm_sqr()).sum();
        let after: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((before - after).abs() <= 1e-9);
    }

    #[test]
    fn negated_difference_has_same_component_moduli(r in 1usize..3, idx in prop::collection::vec(0usize..1000, 4)) {
        let rot = catalog(r);
        let d_set = constellation(4).difference_set();
        let d: Vec<Complex64> = idx[..rot.dim()].iter().map(|&i| d_set[i % d_set.len()]).collect();
        let neg: Vec<Complex64> = d.iter().map(|z| -z).collect();
        let a = rot.rotate(&d).unwrap();
        let b = rot.rotate(&neg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(x.norm(), y.norm());
        }
        prop_assert!(d_set.iter().all(|z| d_set.contains(&-z)));
    }

    #[test]
    fn gaussian_information_is_rotation_invariant(
        gamma in prop::collection::vec(1e-3f64..20.0, 4),
        snr_db in -10.0f64..50.0,
        set in 0usize..3,
    ) {
        let rotations = match set {
            0 => vec![Rotation::kruskemper4()],
            1 => vec![Rotation::cyclotomic2(), Rotation::cyclotomic2()],
            _ => vec![Rotation::identity(1), Rotation::cyclotomic2(), Rotation::identity(1)],
        };
        let snr = 10f64.powf(snr_db / 10.0);
        let closed = gaussian_mi(snr, &gamma).value;
        let rotated = gaussian_logdet_mi(snr, &gamma, &rotations).unwrap();
        prop_assert!((closed - rotated).abs() <= 1e-10, "{closed} vs {rotated}");
    }

    #[test]
    fn discrete_information_is_bounded(h in 0.05f64..3.0, snr_db in -10.0f64..30.0, big in any::<bool>()) {
        let c = constellation(if big { 4 } else { 2 });
        let block = BlockMi::new(&c, &Rotation::identity(1)).unwrap();
        let snr = 10f64.powf(snr_db / 10.0);
        let i = block.gauss_hermite(&[h], snr, 16, u128::MAX).unwrap().value;
        let gauss = log2_det_block(snr, &[h], &Rotation::identity(1)).unwrap();
        prop_assert!(i >= 0.0);
        prop_assert!(i <= (block.bits() as f64).min(gauss) + 1e-6, "{i} above min({}, {gauss})", block.bits());
    }

    #[test]
    fn discrete_information_grows_with_snr(h in 0.1f64..2.0, lo in -10.0f64..20.0, step in 0.5f64..10.0) {
        let block = BlockMi::new(&constellation(4), &Rotation::identity(1)).unwrap();
        let at = |db: f64| block.gauss_hermite(&[h], 10f64.powf(db / 10.0), 16, u128::MAX).unwrap().value;
        prop_assert!(at(lo + step) >= at(lo) - 1e-9);
    }

    #[test]
    fn identity_scheme_is_symmetric_in_blocks(gamma in prop::collection::vec(0.01f64..5.0, 4), snr_db in 0.0f64..25.0) {
        let scheme = Scheme::parse(constellation(2), "unrotated", 4).unwrap();
        let snr = 10f64.powf(snr_db / 10.0);
        let opts = MiOptions::default();
        let method = MiMethod::GaussHermite { nodes: 16 };
        let a = scheme.mi(&gamma, snr, method, &opts).unwrap().value;
        let mut rev = gamma.clone();
        rev.reverse();
        let b = scheme.mi(&rev, snr, method, &opts).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn upper_bound_dominates_lower_bound(
        k in 1usize..5,
        n_pow in 0u32..3,
        m in 0.25f64..4.0,
        num in 0u64..=24,
        lambda in prop_oneof![Just(f64::INFINITY), 0.0f64..20.0],
    ) {
        let n = 1usize << n_pow;
        let q = ExponentQuery::new(k * n, n, m, 2, RateRatio::new(num, 24).unwrap()).unwrap();
        let q = q.lambda(lambda).unwrap();
        let lb = random_coding_lower_bound(&q);
        prop_assert!(upper_bound(&q) >= lb - 1e-12);
        if lambda.is_infinite() && !q.x_is_integer() {
            prop_assert!((upper_bound(&q) - lb).abs() <= 1e-12);
        }
    }

    #[test]
    fn theorem_exponent_is_nonincreasing_in_rate(k in 1usize..5, n_pow in 0u32..3, m in 0.25f64..4.0, num in 0u64..24) {
        let n = 1usize << n_pow;
        let at = |i: u64| theorem_exponent(&ExponentQuery::new(k * n, n, m, 2, RateRatio::new(i, 24).unwrap()).unwrap()).upper();
        prop_assert!(at(num + 1) <= at(num));
    }

    #[test]
    fn larger_rotations_never_lose(c_pow in 1u32..3, m in 0.25f64..4.0, num in 0u64..=32) {
        let blocks = 8;
        let ratio = RateRatio::new(num, 32).unwrap();
        let base = ExponentQuery::new(blocks, 1, m, 2, ratio).unwrap();
        let wide = ExponentQuery::new(blocks, 1 << c_pow, m, 2, ratio).unwrap();
        if !base.x_is_integer() && !wide.x_is_integer() {
            prop_assert!(theorem_exponent(&wide).upper() >= theorem_exponent(&base).upper());
        }
    }

    #[test]
    fn block_diversity_respects_singleton(
        blocks in 2usize..5,
        len in 1usize..3,
        k in 1u32..5,
        seed in any::<u64>(),
    ) {
        // 2^k distinct random codewords over QPSK labels.
        use rand::Rng;
        let mut rng = stream_rng(seed, Stream::Data, 0);
        let mut book: Vec<Vec<Vec<u8>>> = Vec::new();
        while book.len() < 1 << k {
            let w: Vec<Vec<u8>> = (0..blocks).map(|_| (0..len).map(|_| rng.random_range(0..4u8)).collect()).collect();
            if !book.contains(&w) {
                book.push(w);
            }
        }
        let ratio = RateRatio::new(k as u64, (2 * blocks * len) as u64).unwrap();
        prop_assume!(ratio.value() <= 1.0);
        let q = ExponentQuery::new(blocks, 1, 1.0, 2, ratio).unwrap();
        prop_assert!(block_diversity(&book, 1 << 16).unwrap() as u64 <= singleton_block_diversity(&q));
    }

    #[test]
    fn demapper_extrinsic_ignores_own_prior(
        seed in any::<u64>(),
        bit in 0usize..4,
        delta in -30.0f64..30.0,
        priors in prop::collection::vec(-8.0f64..8.0, 4),
    ) {
        let dm = Demapper::new(&constellation(2), &Rotation::cyclotomic2(), 1 << 16).unwrap();
        let mut rng = stream_rng(seed, Stream::Noise, 0);
        let y: Vec<Complex64> = (0..2).map(|_| blockfade::channel::complex_noise(&mut rng)).collect();
        let h = [0.7, 1.3];
        let mut a = vec![0.0; 4];
        dm.extrinsic(&y, &h, 3.0, &priors, &mut a).unwrap();
        let mut changed = priors.clone();
        changed[bit] += delta;
        let mut b = vec![0.0; 4];
        dm.extrinsic(&y, &h, 3.0, &changed, &mut b).unwrap();
        prop_assert_eq!(a[bit], b[bit]);
    }

    #[test]
    fn fading_stream_is_deterministic(seed in any::<u64>(), index in any::<u64>(), m in 0.2f64..5.0) {
        let f = FadingSpec::new(4, m).unwrap();
        let mut a = [0.0; 4];
        let mut b = [0.0; 4];
        f.sample_into(&mut stream_rng(seed, Stream::Fading, index), &mut a);
        f.sample_into(&mut stream_rng(seed, Stream::Fading, index), &mut b);
        prop_assert_eq!(a, b);
        prop_assert!(a.iter().all(|&g| g > 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn gaussian_outage_is_monotone(seed in any::<u64>(), snr_db in 0.0f64..20.0, rate in 0.5f64..3.0) {
        let fading = FadingSpec::new(2, 1.0).unwrap();
        let p = |snr: f64, r: f64| {
            estimate_outage(&InputModel::Gaussian, &OutageConfig::new(fading, r, 4000, seed), snr).unwrap().estimate
        };
        let base = p(snr_db, rate);
        prop_assert!(p(snr_db + 2.0, rate) <= base);
        prop_assert!(p(snr_db, rate + 0.5) >= base);
    }
}

#[test]
fn frame_rate_bookkeeping() {
    for (m, rate) in [(2, 1.0), (4, 2.0)] {
        let c = constellation(m);
        let cfg = FrameConfig::new(c, vec![Rotation::cyclotomic2(), Rotation::cyclotomic2()]);
        assert_eq!(cfg.rate(), rate);
        cfg.check_rate(rate).unwrap();
        assert!(cfg.check_rate(rate + 0.5).is_err());
    }
    assert_eq!(ConvCode::default().rate(), 0.5);
}
