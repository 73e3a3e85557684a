//! Random-shift stationarization of small enumerable block laws.

use std::sync::Arc;

use proptest::prelude::*;

use renyi_core::block::{BlockLaw, BlockModel, CellPartition};
use renyi_core::rng;
use renyi_core::stationarize::{self, BoundaryStats};
use renyi_core::ExecPolicy;

/// A block law on `cells` cells of random widths with random probabilities,
/// some of them zero.
fn block_law(seed: u64, cells: usize, n: usize) -> BlockLaw {
    use rand::Rng;
    let mut r = rng::stream(seed, 0);
    let mut edges = vec![0.0];
    for _ in 0..cells {
        let w: f64 = r.random_range(0.2..2.0);
        edges.push(edges.last().unwrap() + w);
    }
    let mut probs: Vec<f64> = (0..cells.pow(n as u32)).map(|_| if r.random_bool(0.15) { 0.0 } else { r.random_range(0.01..1.0) }).collect();
    if probs.iter().all(|&p| p == 0.0) {
        probs[0] = 1.0;
    }
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    BlockLaw::new(CellPartition::new(edges).unwrap(), n, probs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_window_entropy_lies_within_bounds(seed: u64, n in 2usize..=3, extra in 1usize..=4, alpha in prop_oneof![0.3..0.9f64, Just(1.0), 1.2..4.0f64]) {
        let law = block_law(seed, 2, n);
        let m = 2 * n + extra;
        let stats = BoundaryStats::from_model(&law, alpha).unwrap();
        let r = stationarize::window_rate_bounds(&stats, m).unwrap();
        let h = stationarize::exact_window_entropy(&law, m, alpha, ExecPolicy::Sequential).unwrap();
        prop_assert!(r.lower - 1e-9 <= h && h <= r.upper + 1e-9, "{} ≤ {h} ≤ {}", r.lower, r.upper);
        prop_assert!(r.lower_literal <= r.lower + 1e-12);
    }

    #[test]
    fn exact_window_entropy_matches_dense_window_law(seed: u64, n in 2usize..=3, m in 1usize..=7, alpha in prop_oneof![0.5..0.9f64, Just(1.0), 1.5..3.0f64]) {
        let law = block_law(seed, 2, n);
        let dense = stationarize::window_law(&law, m, 1 << 12).unwrap();
        let h = stationarize::exact_window_entropy(&law, m, alpha, ExecPolicy::Sequential).unwrap();
        prop_assert!((h - dense.entropy(alpha)).abs() < 1e-10 * (1.0 + h.abs()));
    }

    #[test]
    fn shifted_windows_share_one_law(seed: u64, cells in 2usize..=3, n in 1usize..=3, w in 1usize..=4) {
        let law = block_law(seed, cells, n);
        prop_assert!(stationarize::stationarity_gap(&law, w, 1 << 12).unwrap() < 1e-12);
    }

    #[test]
    fn window_law_marginals_are_the_block_marginals_averaged(seed: u64, n in 2usize..=3) {
        let law = block_law(seed, 2, n);
        let one = stationarize::window_law(&law, 1, 16).unwrap();
        let avg: Vec<f64> = (0..2)
            .map(|c| (0..n).map(|i| law.marginal(i, 1).unwrap().probs()[c]).sum::<f64>() / n as f64)
            .collect();
        for (a, b) in one.probs().iter().zip(&avg) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn sequential_and_parallel_enumeration_agree_bitwise() {
    for seed in 0..4 {
        let law = block_law(seed, 3, 3);
        for m in [7, 10] {
            let a = stationarize::exact_window_entropy(&law, m, 2.0, ExecPolicy::Sequential).unwrap();
            let b = stationarize::exact_window_entropy(&law, m, 2.0, ExecPolicy::Parallel).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

#[test]
fn window_rate_approaches_block_rate() {
    let law = block_law(17, 2, 3);
    let alpha = 2.0;
    let rate = law.block_entropy(alpha).unwrap() / 3.0;
    let gap = |m: usize| (stationarize::exact_window_entropy(&law, m, alpha, ExecPolicy::Parallel).unwrap() / m as f64 - rate).abs();
    let (early, late) = (gap(7), gap(22));
    assert!(late < early, "{late} ≥ {early}");
}

#[test]
fn sampled_windows_fit_the_exact_law() {
    let law = block_law(3, 2, 3);
    let process = stationarize::build_block_process(Arc::new(law.clone()), 5);
    let fit = stationarize::window_goodness_of_fit(&process, &law, 3, 20_000, ExecPolicy::Parallel).unwrap();
    assert!(fit.p_value > 1e-3, "{fit:?}");
}
