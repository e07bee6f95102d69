use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use unitrack_core::assoc::{match_frames, DistanceMatrix};
use unitrack_core::calib::{counts_at, distance_histogram, objective, sweep_threshold, LabeledDistance};
use unitrack_core::data::{simulate, SimConfig};
use unitrack_core::trackhead::{
    finite_diff_gradient, gradient, pairwise_distances, pull_loss, triplet_loss, HeadDims, LabeledBatch, LossConfig,
    TrackHeadParams,
};
use unitrack_core::Matrix;

fn embeddings(dim: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<u32>)> {
    (2usize..10).prop_flat_map(move |n| {
        (
            proptest::collection::vec(proptest::collection::vec(-5.0..5.0f64, dim), n),
            proptest::collection::vec(0u32..4, n),
        )
    })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn losses_non_negative_and_order_free((emb, ids) in embeddings(3), m in 0.1..6.0f64, m_pull in 0.0..3.0f64, rot in 0usize..10) {
        let d = pairwise_distances(&emb);
        let tri = triplet_loss(&d, &ids, m);
        let pull = pull_loss(&d, &ids, m_pull);
        prop_assert!(tri >= 0.0 && pull >= 0.0);

        let n = emb.len();
        let perm: Vec<usize> = (0..n).map(|k| (k * 7 + rot) % n).collect();
        let mut seen = perm.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() == n {
            let e2: Vec<_> = perm.iter().map(|&k| emb[k].clone()).collect();
            let i2: Vec<_> = perm.iter().map(|&k| ids[k]).collect();
            let d2 = pairwise_distances(&e2);
            prop_assert!(close(tri, triplet_loss(&d2, &i2, m)));
            prop_assert!(close(pull, pull_loss(&d2, &i2, m_pull)));
        }

        let renamed: Vec<u32> = ids.iter().map(|i| 100 - 3 * i).collect();
        prop_assert_eq!(tri, triplet_loss(&d, &renamed, m));
        prop_assert!(close(pull, pull_loss(&d, &renamed, m_pull)));
    }

    #[test]
    fn matching_is_partial_and_below_threshold(rows in 0usize..6, cols in 0usize..6, seed in any::<u64>(), h in 0.01..2.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..rows * cols).map(|_| rng.random::<f64>()).collect();
        let d = DistanceMatrix::new(Matrix::from_row_major(rows, cols, data)).unwrap();
        let out = match_frames(&d, h);
        prop_assert_eq!(out.len(), rows);
        let mut used = vec![false; cols];
        for (i, m) in out.iter().enumerate() {
            if let Some(j) = *m {
                prop_assert!(!used[j]);
                used[j] = true;
                prop_assert!(d.get(i, j) < h);
            }
        }
    }

    #[test]
    fn matching_ignores_offsets_above_row_minima(seed in any::<u64>(), offset in 0.01..10.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (rows, cols) = (rng.random_range(1..5), rng.random_range(1..5));
        let data: Vec<f64> = (0..rows * cols).map(|_| rng.random::<f64>()).collect();
        let base = Matrix::from_row_major(rows, cols, data);
        let ceiling = (0..rows)
            .map(|i| base.row(i).iter().cloned().fold(f64::INFINITY, f64::min))
            .fold(f64::NEG_INFINITY, f64::max);
        let mut lifted = base.clone();
        for i in 0..rows {
            for j in 0..cols {
                if base.get(i, j) > ceiling {
                    lifted.set(i, j, base.get(i, j) + offset);
                }
            }
        }
        let a = match_frames(&DistanceMatrix::new(base).unwrap(), 0.8);
        let b = match_frames(&DistanceMatrix::new(lifted).unwrap(), 0.8);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn counts_consistent_and_monotone(ds in proptest::collection::vec((0.0..10.0f64, any::<bool>()), 1..40), h1 in 0.0..11.0f64, h2 in 0.0..11.0f64) {
        let pairs: Vec<_> = ds.iter().map(|&(distance, is_same)| LabeledDistance { distance, is_same }).collect();
        let (lo, hi) = if h1 <= h2 { (h1, h2) } else { (h2, h1) };
        let a = counts_at(&pairs, lo);
        let b = counts_at(&pairs, hi);
        prop_assert!(a.is_consistent() && b.is_consistent());
        prop_assert!(a.tp <= b.tp);
        prop_assert!(a.tn >= b.tn);
    }

    #[test]
    fn sweep_beats_random_thresholds(ds in proptest::collection::vec((0.0..10.0f64, any::<bool>()), 2..40), hs in proptest::collection::vec(0.0..12.0f64, 50)) {
        let mut pairs: Vec<_> = ds.iter().map(|&(distance, is_same)| LabeledDistance { distance, is_same }).collect();
        pairs.push(LabeledDistance::same(1.0));
        pairs.push(LabeledDistance::diff(2.0));
        let best = sweep_threshold(&pairs).unwrap();
        for h in hs {
            prop_assert!(best.objective <= objective(&counts_at(&pairs, h)).unwrap());
        }
    }

    #[test]
    fn histogram_conserves_counts(ds in proptest::collection::vec((0.0..10.0f64, any::<bool>()), 0..40), bins in 1usize..30) {
        let pairs: Vec<_> = ds.iter().map(|&(distance, is_same)| LabeledDistance { distance, is_same }).collect();
        let h = distance_histogram(&pairs, bins).unwrap();
        let same = pairs.iter().filter(|p| p.is_same).count() as u64;
        prop_assert_eq!(h.same.iter().sum::<u64>(), same);
        prop_assert_eq!(h.diff.iter().sum::<u64>(), pairs.len() as u64 - same);
    }
}

#[test]
fn simulated_features_are_separable() {
    for seed in 0..40 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let identities = rng.random_range(2..7);
        let spread = rng.random_range(1.0..20.0);
        let cfg = SimConfig {
            identities,
            feature_dim: rng.random_range(identities.max(4)..24),
            archetype_spread: spread,
            noise_sigma: spread * rng.random_range(0.0..0.1),
            frames: 15,
            seed,
            ..SimConfig::default()
        };
        let sim = simulate(&cfg).unwrap();
        for w in sim.frames.windows(2) {
            let mut same_max = f64::NEG_INFINITY;
            let mut diff_min = f64::INFINITY;
            for a in &w[0].detections {
                for b in &w[1].detections {
                    let d: f64 = a.feature.iter().zip(&b.feature).map(|(x, y)| (x - y).powi(2)).sum();
                    if a.gt_identity == b.gt_identity {
                        same_max = same_max.max(d);
                    } else {
                        diff_min = diff_min.min(d);
                    }
                }
            }
            assert!(same_max < diff_min, "seed {seed}: {same_max} vs {diff_min}");
        }
    }
}

#[test]
fn finite_difference_step_halving_is_stable() {
    let dims = HeadDims::new(4, 6, 3);
    let cfg = LossConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for seed in 0..4 {
        let p = TrackHeadParams::init(dims, seed).unwrap();
        let feats = (0..6)
            .map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let b = LabeledBatch::new(feats, vec![0, 0, 1, 1, 2, 2]).unwrap();
        let coarse = finite_diff_gradient(&p, &b, &cfg, 1e-4).unwrap();
        let fine = finite_diff_gradient(&p, &b, &cfg, 1e-5).unwrap();
        for (c, f) in coarse.values().zip(fine.values()) {
            assert!((c - f).abs() < 1e-6);
        }
        let g = gradient(&p, &b, &cfg).unwrap();
        for (a, f) in g.values().zip(fine.values()) {
            assert!((a - f).abs() < 1e-6);
        }
    }
}

#[test]
fn label_groups_drive_pull_term() {
    // pull averages over identities, not members
    let emb = vec![vec![0.0], vec![1.0], vec![1.0], vec![10.0], vec![12.0]];
    let d = pairwise_distances(&emb);
    let mut expected = BTreeMap::new();
    expected.insert(0, (1.0f64 - 1.0).abs());
    expected.insert(1, (4.0f64 - 1.0).abs());
    let mean = expected.values().sum::<f64>() / 2.0;
    assert_eq!(pull_loss(&d, &[0, 0, 0, 1, 1], 1.0), mean);
}
