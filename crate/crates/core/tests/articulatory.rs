use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use xprs_core::articulatory::{estimate_from_spliced, train_inversion, tv_valence_correlation, ForwardMap, InversionConfig};
use xprs_core::metrics::pearson;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn valence_correlation_ignores_affine_rescaling(seed in 0u64..1000, valence in prop::collection::vec(1.0..7.0f64, 4..10), a in 0.1..5.0f64, b in -3.0..3.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tvs: Vec<_> = valence.iter().map(|_| ForwardMap::random_tvs(40, &mut rng)).collect();
        let items: Vec<_> = tvs.iter().zip(valence.iter().copied()).collect();
        let rescaled: Vec<_> = tvs.iter().zip(valence.iter().map(|v| a * v + b)).collect();
        let r1 = tv_valence_correlation(&items).unwrap();
        let r2 = tv_valence_correlation(&rescaled).unwrap();
        for j in 0..8 {
            prop_assert!((r1.r[j] - r2.r[j]).abs() < 1e-9);
        }
    }
}

#[test]
fn too_few_utterances_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let tv = ForwardMap::random_tvs(10, &mut rng);
    assert!(tv_valence_correlation(&[(&tv, 1.0), (&tv, 2.0)]).is_err());
}

#[test]
fn short_training_already_tracks_every_tv() {
    let map = ForwardMap::new(5, 16, 0.05);
    let train = map.generate(24, 80, 160, 1).unwrap();
    let test = map.generate(8, 80, 160, 2).unwrap();
    let pairs: Vec<_> = train.iter().map(|p| (&p.features, &p.tvs)).collect();
    let mut cfg = InversionConfig { hidden_dim: 32, embedding_dim: 32, ..Default::default() };
    cfg.train.max_epochs = 6;
    let ck = train_inversion(&pairs, &cfg).unwrap();
    let feats: Vec<_> = test.iter().map(|p| p.features.clone()).collect();
    let est = estimate_from_spliced(&feats, &ck).unwrap();
    for j in 0..8 {
        let a: Vec<f64> = est.iter().flat_map(|m| m.column(j)).collect();
        let b: Vec<f64> = test.iter().flat_map(|m| m.tvs.column(j)).collect();
        let r = pearson(&a, &b).unwrap();
        assert!(r > 0.3, "TV {j}: r = {r}");
    }
}
