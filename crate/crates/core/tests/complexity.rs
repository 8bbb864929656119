use isect4d::complexity::*;
use isect4d::Error;
use num_rational::Rational64;
use proptest::prelude::*;

fn r(a: i64, b: i64) -> Rational64 {
    Rational64::new(a, b)
}

fn f(x: Rational64) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

fn grid() -> Vec<f64> {
    power_grid(10, 24)
}

#[test]
fn tradeoff_examples() {
    assert_eq!(q_tradeoff_exponent(r(2, 1)).unwrap(), r(1, 2));
    assert_eq!(q_tradeoff_exponent(r(1, 1)).unwrap(), r(5, 6));
    assert_eq!(q_tradeoff_exponent(r(6, 1)).unwrap(), r(0, 1));
    // Both branches meet at sigma = 2.
    assert_eq!(r(7, 6) - r(2, 3), r(3, 4) - r(2, 8));
    assert!(matches!(q_tradeoff_exponent(r(1, 2)), Err(Error::OutOfRange(_))));
    assert!(q_tradeoff_exponent(r(13, 2)).is_err());
}

#[test]
fn batched_examples() {
    let one = batched_cost_exponents(r(1, 1)).unwrap();
    assert_eq!(one.total, r(13, 8));
    assert!(one.first_dominates);
    let mid = batched_cost_exponents(r(3, 2)).unwrap();
    assert_eq!((mid.first, mid.second), (r(2, 1), r(2, 1)));
    assert_eq!(batched_cost_exponents(r(0, 1)).unwrap().total, r(1, 1));
    assert_eq!(batched_breakpoint(), r(3, 2));
    assert!(!batched_cost_exponents(r(2, 1)).unwrap().first_dominates);
    assert_eq!(batched_cost_exponents(r(7, 1)).unwrap().total, r(7, 1));
    assert!(batched_cost_exponents(r(-1, 2)).is_err());
}

#[test]
fn leaf_and_stop_sizes() {
    for n in [16.0, 1000.0, 4096.0] {
        assert!((leaf_size(n, n).unwrap() / n - 1.0).abs() < 1e-12);
        assert!((leaf_size(n, n.powi(6)).unwrap() - 1.0).abs() < 1e-9);
        let s = n * n;
        let lim = (s / n).powf(1.2);
        let near = stop_r_omega(n, s, 1e-9).unwrap();
        assert!((near / lim - 1.0).abs() < 1e-6);
        assert!(stop_r_omega(n, s, 0.01).unwrap() < lim);
    }
    assert_eq!(leaf_size_exponent(r(1, 1)).unwrap(), r(1, 1));
    assert_eq!(leaf_size_exponent(r(6, 1)).unwrap(), r(0, 1));
    assert!(leaf_size(100.0, 10.0).is_err());
    assert!(stop_r_omega(100.0, 1000.0, 0.2).is_err());
}

#[test]
fn model_validation() {
    assert!(CostModel::default().validate().is_ok());
    let m = CostModel::default();
    assert!(CostModel { r0: r(16, 1), ..m }.validate().is_err());
    assert!(CostModel { d: r(1, 1), ..m }.validate().is_err());
    assert!(CostModel { delta: r(1, 6), ..m }.validate().is_err());
    assert!(CostModel { c0: r(0, 1), ..m }.validate().is_err());
    assert!(unfold_wide(&grid(), 2.0, &CostModel { r0: r(8, 1), ..m }, Unfolding::Modeled).is_err());
}

#[test]
fn fit_recovers_pure_powers() {
    let ns = grid();
    let fit = fit_exponent(&ns.iter().map(|&n| (n, 3.0 * n.powf(1.75))).collect::<Vec<_>>());
    assert!((fit.exponent - 1.75).abs() < 1e-12);
    assert!(fit.residual < 1e-9);
}

#[test]
fn wide_base_case_costs_its_size() {
    let m = CostModel::default();
    for mode in [Unfolding::Modeled, Unfolding::Literal] {
        assert_eq!(wide_costs(37.0, 1000.0, 40.0, &m, mode), (37.0, 37.0));
    }
}

#[test]
fn wide_unfolding_at_quadratic_storage() {
    let fit = unfold_wide(&grid(), 2.0, &CostModel::default(), Unfolding::Modeled).unwrap();
    assert!((fit.storage.exponent - 2.0).abs() <= 0.05, "{fit:?}");
    assert!((fit.query.exponent - 0.5).abs() <= 0.05, "{fit:?}");
}

#[test]
fn literal_unfolding_carries_the_branching_constants() {
    // Keeping c0 and the query fan-out 2 adds log_r0(c0)/2 and log_r0(2)/2 to the exponents.
    let m = CostModel::default();
    let fit = unfold_wide(&grid(), 2.0, &m, Unfolding::Literal).unwrap();
    let (c0, r0) = (f(m.c0), f(m.r0));
    let storage = 2.0 + c0.ln() / r0.ln() / 2.0;
    let query = 0.5 + 2f64.ln() / r0.ln() / 2.0;
    assert!((fit.storage.exponent - storage).abs() < 0.05, "{fit:?}");
    assert!((fit.query.exponent - query).abs() < 0.05, "{fit:?}");
    assert!(fit.storage.exponent > 2.05);
}

#[test]
fn main_unfolding() {
    let m = CostModel::default();
    let full = unfold_main(&grid(), &m, Unfolding::Modeled, ZeroSetCosts::default()).unwrap();
    assert!((full.storage.exponent - 2.0).abs() <= 0.05, "{full:?}");
    assert!((full.query.exponent - 0.5).abs() <= 0.05, "{full:?}");

    let no_s1 = unfold_main(&grid(), &m, Unfolding::Modeled, ZeroSetCosts { storage: false, query: true }).unwrap();
    assert!(no_s1.storage.exponent <= 2.0 + 1e-9);

    let doubled = CostModel { d: m.d * 2, r0: m.r0 * 2, ..m };
    let d2 = unfold_main(&grid(), &doubled, Unfolding::Modeled, ZeroSetCosts::default()).unwrap();
    assert!((d2.storage.exponent - full.storage.exponent).abs() < 0.02);
    assert!((d2.query.exponent - full.query.exponent).abs() < 0.02);

    let bare = unfold_main(&grid(), &m, Unfolding::Modeled, ZeroSetCosts { storage: false, query: false }).unwrap();
    assert!((bare.query.exponent - 0.5).abs() <= 0.05, "{bare:?}");
}

#[test]
fn premature_examples() {
    let m = CostModel::default();
    let n = 2f64.powi(20);
    let two = unfold_premature(n, 2.0, &m).unwrap();
    assert!((two.exponent - 0.5).abs() < 1e-9);
    assert!((two.dk_exponent - 0.5).abs() < 1e-9);
    let six = unfold_premature(n, 6.0, &m).unwrap();
    assert!(six.exponent.abs() < 1e-9);
    assert!(six.balanced_first);
    assert!(!unfold_premature(n, 1.5, &m).unwrap().balanced_first);
}

#[test]
fn premature_matches_tradeoff_on_grid() {
    let curve = tradeoff_curve(r(1, 10), 2f64.powi(20), &CostModel::default()).unwrap();
    assert_eq!(curve.len(), 51);
    for p in &curve {
        assert!((p.premature - p.exponent).abs() <= 0.02, "{p:?}");
    }
    // The balance switches at sigma = 2.
    let switch = curve
        .windows(2)
        .find(|w| !unfold_premature(2f64.powi(20), w[0].sigma, &CostModel::default()).unwrap().balanced_first
            && unfold_premature(2f64.powi(20), w[1].sigma, &CostModel::default()).unwrap().balanced_first)
        .map(|w| w[1].sigma)
        .unwrap();
    assert!((switch - 2.0).abs() <= 0.1 + 1e-9, "{switch}");
}

proptest! {
    #[test]
    fn tradeoff_is_non_increasing_and_continuous(a in 0i64..=500, b in 0i64..=500) {
        let (lo, hi) = (a.min(b), a.max(b));
        let x = q_tradeoff_exponent(r(100 + lo, 100)).unwrap();
        let y = q_tradeoff_exponent(r(100 + hi, 100)).unwrap();
        prop_assert!(y <= x);
        // Lipschitz with the steeper slope 1/3.
        prop_assert!(x - y <= r(hi - lo, 300));
    }

    #[test]
    fn unfoldings_grow_with_n(e in 8u32..30, d in 2i64..16) {
        let m = CostModel { d: r(d, 1), ..CostModel::default() };
        let mode = Unfolding::Modeled;
        let (n1, n2) = (2f64.powi(e as i32), 2f64.powi(e as i32 + 1));
        let (s1, q1) = wide_costs(n1, n1 * n1, wide_stop(n1, n1 * n1), &m, mode);
        let (s2, q2) = wide_costs(n2, n2 * n2, wide_stop(n2, n2 * n2), &m, mode);
        prop_assert!(s2 >= s1 && q2 >= q1);
        let (s1, q1) = main_costs(n1, &m, mode, ZeroSetCosts::default());
        let (s2, q2) = main_costs(n2, &m, mode, ZeroSetCosts::default());
        prop_assert!(s2 >= s1 && q2 >= q1);
    }
}
