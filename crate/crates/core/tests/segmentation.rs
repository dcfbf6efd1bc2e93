// SPDX-License-Identifier: MIT OR Apache-2.0

mod common;

use common::*;
use kscpd_core::segmentation::NwbsPath;
use kscpd_core::{Dataset, nbs, nwbs, sample_intervals};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn nbs_matches_recursion(samples in samples(2..=12, 4), tau in 0.05f64..2.5) {
        let data = Dataset::new(samples.clone()).unwrap();
        let got = nbs(&data, 1, samples.len(), tau).unwrap().times();
        let mut want = Vec::new();
        brute_nbs(&samples, 1, samples.len(), tau, &mut want);
        prop_assert_eq!(got, sorted(want));
    }

    #[test]
    fn nwbs_matches_recursion(
        (samples, pairs) in with_intervals(2..=12, 4, 8),
        tau in 0.05f64..2.5,
    ) {
        let data = Dataset::new(samples.clone()).unwrap();
        let got = nwbs(&data, 1, samples.len(), &to_intervals(&pairs), tau).unwrap().times();
        let mut want = Vec::new();
        brute_nwbs(&samples, 1, samples.len(), &pairs, tau, &mut want);
        prop_assert_eq!(got, sorted(want));
    }

    #[test]
    fn path_matches_direct_runs(
        (samples, pairs) in with_intervals(2..=25, 3, 12),
        taus in prop::collection::vec(0.05f64..3.0, 1..6),
    ) {
        let data = Dataset::new(samples.clone()).unwrap();
        let ivs = to_intervals(&pairs);
        let path = NwbsPath::build(&data, 1, samples.len(), &ivs, 0.05).unwrap();
        for tau in taus {
            prop_assert_eq!(path.at(tau), nwbs(&data, 1, samples.len(), &ivs, tau).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn outputs_are_invariant_under_monotone_maps(
        (samples, pairs) in with_intervals(2..=30, 4, 15),
        map in monotone(),
        tau in 0.2f64..2.0,
    ) {
        let data = Dataset::new(samples.clone()).unwrap();
        let mapped = data.map_values(|x| map.apply(x)).unwrap();
        let len = samples.len();
        let ivs = to_intervals(&pairs);
        prop_assert_eq!(nbs(&data, 1, len, tau).unwrap(), nbs(&mapped, 1, len, tau).unwrap());
        prop_assert_eq!(
            nwbs(&data, 1, len, &ivs, tau).unwrap(),
            nwbs(&mapped, 1, len, &ivs, tau).unwrap()
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn larger_threshold_gives_subset(
        (samples, pairs) in with_intervals(5..=60, 3, 30),
        lo in 0.05f64..1.5,
        gap in 0.01f64..1.5,
    ) {
        let data = Dataset::new(samples.clone()).unwrap();
        let ivs = to_intervals(&pairs);
        let len = samples.len();
        let small = nwbs(&data, 1, len, &ivs, lo).unwrap();
        let large = nwbs(&data, 1, len, &ivs, lo + gap).unwrap();
        for t in large.times() {
            prop_assert!(small.contains(t), "{:?} not within {:?}", large.times(), small.times());
        }
    }

    #[test]
    fn sampled_intervals_stay_in_range(len in 2usize..200, count in 1usize..50, cap in 2usize..200, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cap = cap.min(len);
        let ivs = sample_intervals(len, count, Some(cap), &mut rng).unwrap();
        prop_assert_eq!(ivs.len(), count);
        for iv in ivs {
            prop_assert!(1 <= iv.alpha && iv.alpha <= iv.beta && iv.beta <= len);
            prop_assert!(iv.len() <= cap);
        }
    }
}

#[test]
fn outputs_are_sorted_and_inside_the_window() {
    let samples: Samples = (0..40)
        .map(|t| {
            let level = if (13..27).contains(&t) { 5.0 } else { 0.0 };
            vec![level, level + 0.1]
        })
        .collect();
    let data = Dataset::new(samples).unwrap();
    let seg = nbs(&data, 1, 40, 0.5).unwrap();
    let times = seg.times();
    assert!(times.windows(2).all(|w| w[0] < w[1]));
    assert!(times.contains(&13) && times.contains(&27), "{times:?}");
    assert!(times.iter().all(|&t| (1..40).contains(&t)));
}
