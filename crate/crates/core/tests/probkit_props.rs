mod common;

use common::{cascade_direct, entropy_direct, hb_direct, random_pmf};
use dirnet_core::probkit::{
    bsc_convolve, cond_entropy, hb, marginalize, mutual_info, solve_crossover, validate_markov,
};
use dirnet_core::{DemandMap, JointPmf, SinkSet, VarSubset, Variable};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pmf_strategy() -> impl Strategy<Value = JointPmf> {
    (any::<u64>(), prop::collection::vec(2usize..=3, 2..=4))
        .prop_map(|(seed, alphabets)| random_pmf(&mut ChaCha8Rng::seed_from_u64(seed), &alphabets))
}

/// Split `0..n` into two disjoint sets using `mask` (two bits per variable).
fn split(n: usize, mask: u32) -> (VarSubset, VarSubset) {
    let mut a = VarSubset::EMPTY;
    let mut b = VarSubset::EMPTY;
    for v in 0..n {
        match (mask >> (2 * v)) & 3 {
            0 | 1 => a = a.union(VarSubset::single(v)),
            2 => b = b.union(VarSubset::single(v)),
            _ => {}
        }
    }
    if a.is_empty() {
        a = VarSubset::single(0);
        b = VarSubset::new(b.iter().filter(|&v| v != 0)).unwrap();
    }
    (a, b)
}

proptest! {
    #[test]
    fn chain_rule(pmf in pmf_strategy(), mask in any::<u32>()) {
        let (a, b) = split(pmf.num_vars(), mask);
        prop_assume!(!b.is_empty());
        let joint = pmf.entropy(a.union(b)).unwrap();
        let parts = pmf.entropy(a).unwrap() + cond_entropy(&pmf, b, a).unwrap();
        prop_assert!((joint - parts).abs() <= 1e-9);
    }

    #[test]
    fn conditioning_reduces_entropy(pmf in pmf_strategy(), mask in any::<u32>()) {
        let (a, b) = split(pmf.num_vars(), mask);
        prop_assume!(!b.is_empty());
        prop_assert!(cond_entropy(&pmf, a, b).unwrap() <= pmf.entropy(a).unwrap() + 1e-12);
    }

    #[test]
    fn mutual_information_identity(pmf in pmf_strategy(), mask in any::<u32>()) {
        let (a, b) = split(pmf.num_vars(), mask);
        prop_assume!(!b.is_empty());
        let i = mutual_info(&pmf, a, b, VarSubset::EMPTY).unwrap();
        prop_assert!(i >= 0.0);
        let via_h = pmf.entropy(a).unwrap() - cond_entropy(&pmf, a, b).unwrap();
        prop_assert!((i - via_h).abs() <= 1e-9);
        let sym = mutual_info(&pmf, b, a, VarSubset::EMPTY).unwrap();
        prop_assert!((i - sym).abs() <= 1e-12);
    }

    #[test]
    fn marginalize_preserves_entropies(pmf in pmf_strategy(), mask in any::<u32>()) {
        let (a, b) = split(pmf.num_vars(), mask);
        prop_assume!(!b.is_empty());
        let kept = a.union(b);
        let small = marginalize(&pmf, kept).unwrap();
        // Positions in the marginal follow the sorted order of `kept`.
        let remap = |s: VarSubset| -> VarSubset {
            s.iter().map(|v| kept.iter().position(|k| k == v).unwrap()).collect()
        };
        let direct = cond_entropy(&pmf, a, b).unwrap();
        let via = cond_entropy(&small, remap(a), remap(b)).unwrap();
        prop_assert!((direct - via).abs() <= 1e-9);
        let total: f64 = small.probs().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn crossover_inverse(p in 0.0f64..0.499, frac in 0.0f64..=1.0) {
        let lo = hb(p).unwrap();
        let target = lo + frac * (1.0 - lo);
        let x = solve_crossover(p, target).unwrap();
        prop_assert!((0.0..=0.5).contains(&x));
        prop_assert!((hb(bsc_convolve(p, x).unwrap()).unwrap() - target).abs() <= 1e-10);
    }

    #[test]
    fn convolve_matches_cascade(p in 0.0f64..=1.0, q in 0.0f64..=1.0) {
        let c = bsc_convolve(p, q).unwrap();
        prop_assert!((c - cascade_direct(p, q)).abs() <= 1e-15);
        prop_assert!((c - bsc_convolve(q, p).unwrap()).abs() <= 1e-15);
    }

    #[test]
    fn hb_concave_and_symmetric(p in 0.0f64..=1.0, q in 0.0f64..=1.0) {
        prop_assert!((hb(p).unwrap() - hb(1.0 - p).unwrap()).abs() <= 1e-12);
        let mid = hb(0.5 * (p + q)).unwrap();
        prop_assert!(mid + 1e-12 >= 0.5 * (hb(p).unwrap() + hb(q).unwrap()));
    }
}

#[test]
fn dsbs_marginal_is_fair_bit() {
    let pmf = JointPmf::dsbs_star(0.1, 0.2).unwrap();
    let m = marginalize(&pmf, VarSubset::single(0)).unwrap();
    // Sum the table rows with X0 fixed.
    let rows: Vec<f64> = (0..2).map(|x0| pmf.probs()[x0 * 4..x0 * 4 + 4].iter().sum()).collect();
    assert!((m.probs()[0] - rows[0]).abs() < 1e-15 && (m.probs()[1] - rows[1]).abs() < 1e-15);
    assert!((m.probs()[0] - 0.5).abs() < 1e-12);
}

#[test]
fn conditional_entropy_through_bsc() {
    let pmf = JointPmf::dsbs_star(0.1, 0.2).unwrap();
    let h = cond_entropy(&pmf, VarSubset::single(0), VarSubset::single(1)).unwrap();
    assert!((h - hb_direct(0.1)).abs() < 1e-12);
    assert!((h - 0.4690).abs() < 1e-4);
    let i = mutual_info(&pmf, VarSubset::single(0), VarSubset::single(1), VarSubset::EMPTY).unwrap();
    assert!((i - (1.0 - hb_direct(0.1))).abs() < 1e-12);
}

#[test]
fn joint_entropy_matches_table() {
    let pmf = JointPmf::dsbs_star(0.1, 0.2).unwrap();
    assert!((pmf.entropy(pmf.all()).unwrap() - entropy_direct(pmf.probs())).abs() < 1e-12);
}

#[test]
fn crossover_against_grid_scan() {
    let target = 0.5690;
    let x = solve_crossover(0.1, target).unwrap();
    // Dense scan for the grid point closest to the target.
    let steps = 200_000;
    let best = (0..=steps)
        .map(|k| 0.5 * k as f64 / steps as f64)
        .min_by(|a, b| {
            let fa = (hb_direct(cascade_direct(0.1, *a)) - target).abs();
            let fb = (hb_direct(cascade_direct(0.1, *b)) - target).abs();
            fa.total_cmp(&fb)
        })
        .unwrap();
    assert!((x - best).abs() <= 0.5 / steps as f64 + 1e-12, "{x} vs {best}");
    assert!((hb_direct(cascade_direct(0.1, x)) - target).abs() <= 1e-10);
}

#[test]
fn markov_holds_for_degraded_auxiliary() {
    // U attached to X0 through BSC(0.3).
    let vars = vec![
        Variable::source("X0", 0, 2),
        Variable::source("X1", 1, 2),
        Variable::source("X2", 2, 2),
        Variable::auxiliary("U", 0, SinkSet::full(2), 2),
    ];
    let flip = |p: f64, a: usize, b: usize| if a == b { 1.0 - p } else { p };
    let pmf = JointPmf::from_fn(vars, |d| {
        0.5 * flip(0.1, d[0], d[1]) * flip(0.2, d[0], d[2]) * flip(0.3, d[0], d[3])
    })
    .unwrap();
    let demands = DemandMap::new(3, vec![vec![0, 1], vec![0, 2]]).unwrap();
    assert!(validate_markov(&pmf, &demands).unwrap().holds());
}

#[test]
fn markov_fails_when_auxiliary_copies_other_source() {
    let vars = vec![
        Variable::source("X0", 0, 2),
        Variable::source("X1", 1, 2),
        Variable::source("X2", 2, 2),
        Variable::auxiliary("U", 0, SinkSet::singleton(0), 2),
    ];
    let flip = |p: f64, a: usize, b: usize| if a == b { 1.0 - p } else { p };
    let pmf = JointPmf::from_fn(vars, |d| {
        0.5 * flip(0.1, d[0], d[1]) * flip(0.2, d[0], d[2]) * if d[3] == d[1] { 1.0 } else { 0.0 }
    })
    .unwrap();
    let demands = DemandMap::new(3, vec![vec![0, 1], vec![0, 2]]).unwrap();
    assert!(!validate_markov(&pmf, &demands).unwrap().holds());
}

#[test]
fn pmf_rejects_bad_normalisation() {
    let vars = vec![Variable::source("X0", 0, 2)];
    let err = JointPmf::new(vars, vec![0.5, 0.49]).unwrap_err();
    assert!(err.to_string().contains("normalization"), "{err}");
}
