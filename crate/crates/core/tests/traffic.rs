use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topotraffic::traffic::*;

fn params(m1: f64, m2: f64, d: f64) -> ErramilliParams {
    ErramilliParams::new(m1, m2, d).unwrap()
}

fn on_fraction(bits: &[u8]) -> f64 {
    bits.iter().map(|&b| b as f64).sum::<f64>() / bits.len() as f64
}

#[test]
fn map_fixtures() {
    let p = params(2.0, 2.0, 0.5);
    assert_eq!(map_step(&p, 0.0), 0.0);
    assert_eq!(map_step(&p, 0.5), 1.0);
    assert_eq!(map_step(&p, 1.0), 1.0);
    assert!((map_step(&p, 0.9) - 0.88).abs() < 1e-12);
}

#[test]
fn parameter_ranges_are_enforced() {
    assert!(ErramilliParams::new(1.4, 2.0, 0.5).is_err());
    assert!(ErramilliParams::new(1.5, 2.1, 0.5).is_err());
    assert!(ErramilliParams::new(2.0, 2.0, 0.0).is_err());
    assert!(ErramilliParams::new(2.0, 2.0, 1.0).is_err());
}

#[test]
fn crossing_the_threshold_turns_on() {
    let p = params(2.0, 2.0, 0.5);
    let mut src = ErramilliSource::with_initial(p, 0.49, 0);
    assert_eq!(src.next_bit(), 1);
    assert!(src.x() > 0.5);
}

#[test]
fn orbits_are_deterministic() {
    for (m1, m2) in [(1.5, 1.5), (2.0, 1.7), (2.0, 2.0)] {
        let p = params(m1, m2, 0.3);
        let a = ErramilliSource::new(p, 17).bits(50_000);
        let b = ErramilliSource::new(p, 17).bits(50_000);
        assert_eq!(a, b);
        let c = ErramilliSource::with_initial(p, 0.123, 4).bits(50_000);
        let d = ErramilliSource::with_initial(p, 0.123, 4).bits(50_000);
        assert_eq!(c, d);
    }
}

#[test]
fn high_threshold_means_long_off_runs() {
    let bits = ErramilliSource::new(params(1.5, 1.5, 0.999), 3).bits(200_000);
    assert!(on_fraction(&bits) < 0.05);
    let longest_off = bits.split(|&b| b == 1).map(<[u8]>::len).max().unwrap();
    assert!(longest_off > 1000, "longest Off run {longest_off}");
}

#[test]
fn on_fraction_srd_fixture() {
    for seed in 0..5 {
        let bits = ErramilliSource::new(params(1.5, 1.5, 0.5), seed).bits(1_000_000);
        let f = on_fraction(&bits);
        assert!((0.35..=0.65).contains(&f), "seed {seed}: {f}");
    }
}

#[test]
fn rate_limits_at_extreme_thresholds() {
    for m in [1.5, 2.0] {
        assert!(estimate_rate(&params(m, m, 1.0 - 1e-6), DEFAULT_BURN_IN, 100_000, 1) < 0.01);
        assert!(estimate_rate(&params(m, m, 1e-6), DEFAULT_BURN_IN, 100_000, 1) > 0.99);
    }
}

#[test]
fn rate_is_non_increasing_in_threshold() {
    for m in [1.5, 1.7] {
        let p = params(m, m, 0.5);
        let grid: Vec<f64> = (1..=10).map(|i| i as f64 / 11.0).collect();
        let rates: Vec<f64> = grid.iter().map(|&d| estimate_rate(&p.with_d(d).unwrap(), DEFAULT_BURN_IN, 100_000, 5)).collect();
        for w in rates.windows(2) {
            assert!(w[1] <= w[0], "m={m}: {rates:?}");
        }
    }
}

#[test]
fn rate_fixture_m17() {
    // Recorded after the doubling check below; the symmetric map has rate 1/2.
    const V_STAR: f64 = 0.49978049999999996;
    let p = params(1.7, 1.7, 0.5);
    let v = estimate_rate(&p, DEFAULT_BURN_IN, 1_000_000, 2);
    assert_eq!(v, V_STAR);
    let doubled = estimate_rate(&p, DEFAULT_BURN_IN, 2_000_000, 2);
    assert!((doubled - v).abs() < 0.005, "{v} vs {doubled}");
    assert!((v - 0.5).abs() < 0.01);
}

#[test]
fn calibration_recovers_its_own_fixed_point() {
    for (m, seed) in [(1.5, 9), (1.8, 4)] {
        let target = estimate_rate(&params(m, m, 0.5), DEFAULT_BURN_IN, 100_000, seed);
        let d = calibrate_d(m, m, target, 0.002, seed).unwrap();
        assert!((d - 0.5).abs() < 0.02, "m={m}: d={d}");
    }
}

#[test]
fn calibration_meets_its_tolerance() {
    let d = calibrate_d(2.0, 2.0, 0.05, 0.0025, 3).unwrap();
    assert!(d > 0.5 && d < 1.0, "d={d}");
    let achieved = estimate_rate(&params(2.0, 2.0, d), DEFAULT_BURN_IN, 100_000, 3);
    assert!((achieved - 0.05).abs() <= 0.0025);

    for (target, seed) in [(0.01, 1), (0.2, 2), (0.7, 3)] {
        let d = calibrate_d(1.6, 1.9, target, 0.01, seed).unwrap();
        let achieved = estimate_rate(&params(1.6, 1.9, d), DEFAULT_BURN_IN, 100_000, seed);
        assert!((achieved - target).abs() <= 0.01, "target {target}: {achieved}");
    }
}

#[test]
fn calibration_reports_unreachable_tolerance() {
    let opts = CalibrationOptions { samples: 1_000, max_steps: 3, ..Default::default() };
    assert!(matches!(
        calibrate_d_with(2.0, 2.0, 0.05, 1e-9, 0, &opts),
        Err(TrafficError::NoConvergence { .. })
    ));
    assert!(calibrate_d(2.0, 2.0, 1.0, 0.01, 0).is_err());
}

#[test]
fn hurst_of_fair_coin_flips() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let bits: Vec<u8> = (0..1_000_000).map(|_| rng.random_bool(0.5) as u8).collect();
    let h = hurst_aggregated_variance(&bits, &default_block_sizes(bits.len())).unwrap();
    assert!((0.45..=0.55).contains(&h), "H = {h}");
}

#[test]
fn hurst_needs_enough_data() {
    let bits = [0u8, 1].repeat(5_000);
    assert!(matches!(hurst_aggregated_variance(&bits, &[10, 20, 50, 100]), Err(TrafficError::InsufficientData(_))));
    assert!(matches!(hurst_aggregated_variance(&bits, &[1, 2, 3]), Err(TrafficError::InsufficientData(_))));
    assert!(matches!(hurst_aggregated_variance(&bits, &[1, 2, 5, 10]), Err(TrafficError::InsufficientData(_))));
    assert!(default_block_sizes(5_000).is_empty());
}

fn valid_params() -> impl Strategy<Value = ErramilliParams> {
    (1.5f64..=2.0, 1.5f64..=2.0, 0.001f64..0.999).prop_map(|(m1, m2, d)| params(m1, m2, d))
}

proptest! {
    #[test]
    fn map_stays_in_unit_interval(p in valid_params(), x in 0.0f64..=1.0) {
        let y = map_step(&p, x);
        prop_assert!((0.0..=1.0).contains(&y));
    }

    #[test]
    fn first_branch_is_strictly_increasing(p in valid_params(), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = if a < b { (a * p.d(), b * p.d()) } else { (b * p.d(), a * p.d()) };
        prop_assume!(lo < hi);
        prop_assert!(map_step(&p, lo) < map_step(&p, hi));
    }

    #[test]
    fn orbit_stays_in_unit_interval(p in valid_params(), seed: u64) {
        let mut src = ErramilliSource::with_burn_in(p, seed, 0);
        for _ in 0..2_000 {
            let bit = src.next_bit();
            let x = src.x();
            prop_assert!((0.0..=1.0).contains(&x));
            prop_assert_eq!(bit == 1, x > p.d());
        }
    }
}
