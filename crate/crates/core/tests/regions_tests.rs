mod common;

use std::collections::BTreeMap;

use common::{brute_force_qstar, closed_family, entropy_direct, fig2_demands, hb_direct, random_demands, random_pmf};
use dirnet_core::regions::{
    broadcast_region, enumerate_qstar, helper_pmf, helper_rates, helper_region, helper_sweep, power_binning_region,
    theorem1_region, HelperAux,
};
use dirnet_core::{minimize, DemandMap, Error, JointPmf, LinearProgram, RateRegion, RateVar, SinkSet, Variable};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rows(region: &RateRegion) -> Vec<(Vec<String>, f64)> {
    region
        .constraints()
        .iter()
        .map(|c| (c.coeffs().iter().map(|(v, _)| v.to_string()).collect(), c.rhs))
        .collect()
}

fn has_row(region: &RateRegion, vars: &[&str], rhs: f64) -> bool {
    rows(region).iter().any(|(vs, r)| {
        let mut want: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        want.sort();
        let mut got = vs.clone();
        got.sort();
        got == want && (r - rhs).abs() < 1e-12
    })
}

fn solve(region: &RateRegion, weights: &BTreeMap<RateVar, f64>) -> f64 {
    let obj = region
        .vars()
        .iter()
        .filter_map(|v| weights.get(v).map(|w| (*v, *w)))
        .collect();
    minimize(&LinearProgram::new(region.clone(), obj).unwrap())
        .unwrap()
        .value
}

#[test]
fn qstar_matches_brute_force() {
    for m in 1..=3 {
        let fams = enumerate_qstar(SinkSet::full(m));
        let universe: Vec<SinkSet> = SinkSet::full(m).nonempty_subsets().collect();
        assert!(fams.iter().all(|f| f.is_superset_closed(&universe) && !f.is_empty()));
        // Closure predicate written independently over bitmask families.
        for f in &fams {
            let mask = f.iter().fold(0u32, |acc, k| acc | 1 << (k.bits() - 1));
            assert!(closed_family(m, mask));
        }
        assert_eq!(fams.len(), brute_force_qstar(m).len());
    }
}

#[test]
fn fig2_broadcast_constraints() {
    let pmf = JointPmf::dsbs_star(0.1, 0.2).unwrap();
    let region = broadcast_region(&pmf, &fig2_demands()).unwrap();
    let (h1, h2) = (hb_direct(0.1), hb_direct(0.2));
    assert_eq!(region.constraints().len(), 6);
    assert!(has_row(&region, &["R[0]"], h1));
    assert!(has_row(&region, &["R[0]"], h2));
    assert!(has_row(&region, &["R[1]"], h1));
    assert!(has_row(&region, &["R[2]"], h2));
    assert!(has_row(&region, &["R[0]", "R[1]"], 1.0 + h1));
    assert!(has_row(&region, &["R[0]", "R[2]"], 1.0 + h2));
}

#[test]
fn independent_sources_broadcast_is_marginal_entropies() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let marginals: Vec<Vec<f64>> = (0..3)
        .map(|_| {
            let w: Vec<f64> = (0..2).map(|_| rng.random::<f64>() + 0.05).collect();
            let t: f64 = w.iter().sum();
            w.iter().map(|x| x / t).collect()
        })
        .collect();
    let vars = (0..3).map(|i| Variable::source(format!("X{i}"), i, 2)).collect();
    let pmf = JointPmf::from_fn(vars, |d| (0..3).map(|i| marginals[i][d[i]]).product()).unwrap();
    let demands = DemandMap::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
    let region = broadcast_region(&pmf, &demands).unwrap();
    let weights: BTreeMap<RateVar, f64> = (0..3).map(|i| (RateVar::Broadcast(i), 1.0 + i as f64)).collect();
    let expected: f64 = (0..3).map(|i| (1.0 + i as f64) * entropy_direct(&marginals[i])).sum();
    assert!((solve(&region, &weights) - expected).abs() < 1e-10);
}

#[test]
fn single_sink_is_slepian_wolf() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pmf = random_pmf(&mut rng, &[2, 3, 2]);
    let demands = DemandMap::new(3, vec![vec![0, 1, 2]]).unwrap();
    let region = broadcast_region(&pmf, &demands).unwrap();
    assert_eq!(region.constraints().len(), 7);
    // H(X_S | X_rest) = H(all) - H(rest), with marginals summed by hand.
    let total = entropy_direct(pmf.probs());
    for c in region.constraints() {
        let inside: Vec<usize> = c.coeffs().iter().map(|(v, _)| v.source()).collect();
        let rest: Vec<usize> = (0..3).filter(|i| !inside.contains(i)).collect();
        let mut marg = BTreeMap::<Vec<usize>, f64>::new();
        for (idx, &p) in pmf.probs().iter().enumerate() {
            let digits = [idx / 6, (idx / 2) % 3, idx % 2];
            *marg.entry(rest.iter().map(|&i| digits[i]).collect()).or_default() += p;
        }
        let h_rest = entropy_direct(&marg.values().copied().collect::<Vec<_>>());
        assert!((c.rhs - (total - h_rest)).abs() < 1e-12, "{c}");
    }
}

#[test]
fn fig2_power_binning_constraints() {
    let pmf = JointPmf::dsbs_star(0.1, 0.2).unwrap();
    let region = power_binning_region(&pmf, &fig2_demands()).unwrap();
    let (h1, h2) = (hb_direct(0.1), hb_direct(0.2));
    assert_eq!(region.constraints().len(), 6);
    assert!(has_row(&region, &["R[0,1]", "R[0,12]"], h1));
    assert!(has_row(&region, &["R[0,2]", "R[0,12]"], h2));
    assert!(has_row(&region, &["R[1,1]"], h1));
    assert!(has_row(&region, &["R[2,2]"], h2));
    assert!(has_row(&region, &["R[0,1]", "R[0,12]", "R[1,1]"], 1.0 + h1));
    assert!(has_row(&region, &["R[0,2]", "R[0,12]", "R[2,2]"], 1.0 + h2));
}

#[test]
fn side_information_leaves_two_constraints() {
    let pmf = JointPmf::dsbs_star(0.1, 0.2).unwrap();
    let region = power_binning_region(&pmf, &fig2_demands())
        .unwrap()
        .fix(RateVar::packet(1, SinkSet::singleton(0)), 1.0)
        .unwrap()
        .fix(RateVar::packet(2, SinkSet::singleton(1)), 1.0)
        .unwrap();
    assert_eq!(region.constraints().len(), 2);
    assert!(has_row(&region, &["R[0,1]", "R[0,12]"], hb_direct(0.1)));
    assert!(has_row(&region, &["R[0,2]", "R[0,12]"], hb_direct(0.2)));
}

#[test]
fn one_source_one_sink() {
    let pmf = random_pmf(&mut ChaCha8Rng::seed_from_u64(9), &[3]);
    let demands = DemandMap::new(1, vec![vec![0]]).unwrap();
    let region = power_binning_region(&pmf, &demands).unwrap();
    assert_eq!(region.constraints().len(), 1);
    assert!((region.constraints()[0].rhs - entropy_direct(pmf.probs())).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn power_binning_row_count(seed in any::<u64>(), n in 1usize..=4, m in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let demands = random_demands(&mut rng, n, m);
        let pmf = random_pmf(&mut rng, &vec![2; n]);
        let region = power_binning_region(&pmf, &demands).unwrap();
        let expected: usize = (0..m).map(|j| (1 << demands.sigma(j).len()) - 1).sum();
        prop_assert_eq!(region.constraints().len(), expected);
        prop_assert!(region.constraints().iter().all(|c| c.rhs.is_finite() && c.rhs >= 0.0));
    }

    #[test]
    fn constant_auxiliaries_reduce_to_power_binning(seed in any::<u64>(), n in 1usize..=3, m in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let demands = random_demands(&mut rng, n, m);
        let pmf = random_pmf(&mut rng, &vec![2; n]);
        let pb = power_binning_region(&pmf, &demands).unwrap();
        let t1 = theorem1_region(&pmf, &demands).unwrap();
        for _ in 0..20 {
            let w: BTreeMap<RateVar, f64> = t1
                .vars()
                .iter()
                .filter(|v| matches!(v, RateVar::Packet(_)))
                .map(|&v| (v, rng.random_range(0.0..3.0)))
                .collect();
            let a = solve(&pb, &w);
            let b = solve(&t1, &w);
            prop_assert!((a - b).abs() <= 1e-9, "{} vs {}", a, b);
        }
    }

    #[test]
    fn theorem1_rhs_signs(seed in any::<u64>(), n in 1usize..=2, m in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let demands = random_demands(&mut rng, n, m);
        let pmf = with_random_auxiliaries(&mut rng, n, m);
        let region = theorem1_region(&pmf, &demands).unwrap();
        for c in region.constraints() {
            prop_assert!(c.rhs.is_finite());
            if c.label.starts_with("alpha") || c.label.starts_with("H(") {
                prop_assert!(c.rhs >= -1e-12, "{}", c);
            }
        }
    }
}

/// Sources from a random pmf, each auxiliary `U_{i,K}` drawn from `X_i`
/// through its own random channel, so the per-sink factorisation holds.
fn with_random_auxiliaries<R: Rng>(rng: &mut R, n: usize, m: usize) -> JointPmf {
    let base = random_pmf(rng, &vec![2; n]);
    let mut vars = base.vars().to_vec();
    let mut channels = Vec::new();
    for i in 0..n {
        for k in SinkSet::full(m).nonempty_subsets() {
            if rng.random_bool(0.6) {
                vars.push(Variable::auxiliary(format!("U{i}_{k}"), i, k, 2));
                let c: [f64; 2] = [rng.random(), rng.random()];
                channels.push((i, c));
            }
        }
    }
    let probs = base.probs().to_vec();
    JointPmf::from_fn(vars, |d| {
        let x_idx = d[..n].iter().fold(0, |acc, &v| acc * 2 + v);
        let mut p = probs[x_idx];
        for (k, (i, c)) in channels.iter().enumerate() {
            let q = c[d[*i]];
            p *= if d[n + k] == 1 { q } else { 1.0 - q };
        }
        p
    })
    .unwrap()
}

#[test]
fn deterministic_sources_have_zero_rhs() {
    let vars = vec![Variable::source("X0", 0, 2), Variable::source("X1", 1, 2)];
    let pmf = JointPmf::new(vars, vec![0.0, 0.0, 1.0, 0.0]).unwrap();
    let demands = DemandMap::new(2, vec![vec![0, 1], vec![1]]).unwrap();
    let region = theorem1_region(&pmf, &demands).unwrap();
    assert!(region.constraints().iter().all(|c| c.rhs.abs() < 1e-12));
    assert_eq!(region.max_violation(&BTreeMap::new()), 0.0);
}

#[test]
fn theorem1_rejects_markov_violation() {
    let vars = vec![
        Variable::source("X0", 0, 2),
        Variable::source("X1", 1, 2),
        Variable::auxiliary("U", 0, SinkSet::singleton(0), 2),
    ];
    // U copies X1 but is labelled as an auxiliary of X0.
    let flip = |a: usize, b: usize| if a == b { 0.9 } else { 0.1 };
    let pmf = JointPmf::from_fn(vars, |d| 0.5 * flip(d[0], d[1]) * if d[2] == d[1] { 1.0 } else { 0.0 }).unwrap();
    let demands = DemandMap::new(2, vec![vec![0, 1]]).unwrap();
    assert!(matches!(
        theorem1_region(&pmf, &demands),
        Err(Error::MarkovViolation { .. })
    ));
}

#[test]
fn theorem1_rejects_auxiliary_of_unknown_source() {
    let vars = vec![
        Variable::source("X0", 0, 2),
        Variable::auxiliary("U", 3, SinkSet::singleton(0), 1),
    ];
    let pmf = JointPmf::new(vars, vec![0.5, 0.5]).unwrap();
    let demands = DemandMap::new(1, vec![vec![0]]).unwrap();
    assert!(theorem1_region(&pmf, &demands).is_err());
}

#[test]
fn general_region_matches_helper_region() {
    let (p1, p2, delta) = (0.1, 0.2, 0.1);
    let demands = DemandMap::new(3, vec![vec![1], vec![2]]).unwrap();
    for aux in [
        HelperAux::analytic(p1, p2, delta).unwrap(),
        HelperAux {
            p_fine: 0.07,
            p_extra: 0.2,
            fine_sink: 1,
        },
        HelperAux::useless(),
    ] {
        let pmf = helper_pmf(p1, p2, aux).unwrap();
        let general = theorem1_region(&pmf, &demands).unwrap();
        let helper = helper_region(p1, p2, aux).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10 {
            let (w0, w1, w2) = (
                rng.random_range(0.1..2.0),
                rng.random_range(0.1..2.0),
                rng.random_range(0.1..2.0),
            );
            let (w11, w22) = (rng.random_range(0.1..4.0), rng.random_range(0.1..4.0));
            let both = SinkSet::full(2);
            let (s1, s2) = (SinkSet::singleton(0), SinkSet::singleton(1));
            let mut weights: BTreeMap<RateVar, f64> = general
                .vars()
                .iter()
                .filter(|v| matches!(v, RateVar::Packet(_)))
                .map(|&v| (v, 5.0))
                .collect();
            weights.insert(RateVar::packet(0, both), w0 + w1 + w2);
            weights.insert(RateVar::packet(0, s1), w0 + w1);
            weights.insert(RateVar::packet(0, s2), w0 + w2);
            weights.insert(RateVar::packet(1, s1), w11);
            weights.insert(RateVar::packet(2, s2), w22);
            let a = solve(&general, &weights);
            let b = solve(&helper, &weights);
            assert!((a - b).abs() < 1e-9, "{aux:?}: general {a} vs helper {b}");
        }
    }
}

#[test]
fn helper_analytic_point_is_tight() {
    let (p1, p2, delta) = (0.1, 0.2, 0.1);
    let aux = HelperAux::analytic(p1, p2, delta).unwrap();
    let (r1, r2) = HelperAux::roots(p1, p2, delta).unwrap();
    let r = helper_rates(p1, p2, aux).unwrap();
    assert!((r.r012 - (1.0 - hb_direct(r2))).abs() < 1e-9);
    assert!((r.r01 - (hb_direct(r2) - hb_direct(r1))).abs() < 1e-9);
    assert!(r.r02.abs() < 1e-12);
    assert!((r.r11 - (hb_direct(p1) + delta)).abs() < 1e-9);
    assert!((r.r22 - (hb_direct(p2) + delta)).abs() < 1e-9);
}

#[test]
fn helper_sweep_lands_on_analytic_choice() {
    let (p1, p2, delta) = (0.1, 0.2, 0.1);
    let s = helper_sweep(p1, p2, delta, 200).unwrap();
    let (r1, r2) = HelperAux::roots(p1, p2, delta).unwrap();
    assert!((s.rates.r012 - (1.0 - hb_direct(r1.max(r2)))).abs() < 1e-3, "{s:?}");
    assert_eq!(s.aux.fine_sink, s.analytic.fine_sink);
    assert!((s.aux.p_fine - s.analytic.p_fine).abs() <= s.cell);
    assert!((s.aux.p_coarse() - s.analytic.p_coarse()).abs() <= s.cell);
}

#[test]
fn helper_sweep_symmetric() {
    let s = helper_sweep(0.15, 0.15, 0.1, 60).unwrap();
    assert!(s.rates.r01 < 1e-6 && s.rates.r02 < 1e-6, "{s:?}");
    let (r1, r2) = HelperAux::roots(0.15, 0.15, 0.1).unwrap();
    assert_eq!(r1, r2);
}
