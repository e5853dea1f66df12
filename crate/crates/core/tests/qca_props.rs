mod common;

use std::sync::Arc;

use proptest::prelude::*;
use qca_anomaly::anomaly::presets;
use qca_anomaly::opwin::{op_distance, pauli, LocalOperator, SiteSpec, Window};
use qca_anomaly::qca::{
    balance_shifts, compose, gnvw_numeric, gnvw_numeric_detailed, gnvw_symbolic, invert, max_deviation_on_units,
    support_algebra_dim, swap_layers, BlockLayer, PrimeLog, QcaExpr,
};
use qca_anomaly::{CMatrix, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn qubits() -> Arc<SiteSpec> {
    Arc::new(SiteSpec::qubits())
}

fn on(sites: &Arc<SiteSpec>, j: i64, m: CMatrix) -> LocalOperator {
    LocalOperator::on_site(sites.clone(), j, m).unwrap()
}

fn close(a: &LocalOperator, b: &LocalOperator) -> bool {
    op_distance(&a.clone().compact(1e-11), &b.clone().compact(1e-11)).unwrap() < 1e-9
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

#[test]
fn shift_translates_operators() {
    let s = qubits();
    let e = QcaExpr::identity(s.clone()).then_shift(0, 1).unwrap();
    assert!(close(&e.apply(&on(&s, 0, pauli::x())).unwrap(), &on(&s, 1, pauli::x())));
    let back = invert(&e);
    assert!(close(&back.apply(&on(&s, 3, pauli::z())).unwrap(), &on(&s, 2, pauli::z())));
}

#[test]
fn levin_gu_images() {
    let s = qubits();
    let gamma = presets::levin_gu_gamma(&s).unwrap();
    let zxz =
        LocalOperator::new(s.clone(), Window::new(-1, 1), kron(&kron(&pauli::z(), &pauli::x()), &pauli::z())).unwrap();
    assert!(close(&gamma.apply(&on(&s, 0, pauli::x())).unwrap(), &zxz));
    assert!(close(&gamma.apply(&on(&s, 0, pauli::z())).unwrap(), &on(&s, 0, -pauli::z())));
    let twice = compose(&gamma, &gamma).unwrap();
    let id = QcaExpr::identity(s);
    assert!(max_deviation_on_units(&twice, &id, Window::new(-2, 2)).unwrap() < 1e-9);
}

#[test]
fn composition_order() {
    let s = qubits();
    let x_layer = QcaExpr::identity(s.clone()).then_layer(BlockLayer::on_site(&s, pauli::x()).unwrap()).unwrap();
    let shift = QcaExpr::identity(s.clone()).then_shift(0, 1).unwrap();
    let e = compose(&shift, &x_layer).unwrap();
    assert_eq!(e.steps().len(), 2);
    assert!(matches!(e.steps()[0], qca_anomaly::qca::Step::Layer(_)));
    // X-conjugation flips Z, the shift then moves it
    assert!(close(&e.apply(&on(&s, 0, pauli::z())).unwrap(), &on(&s, 1, -pauli::z())));
}

#[test]
fn symbolic_index() {
    let s = qubits();
    let e = QcaExpr::identity(s).then_shift(0, 1).unwrap();
    assert_eq!(gnvw_symbolic(&e), PrimeLog::log_of(2, 1));
    let s6 = Arc::new(SiteSpec::new(vec![6, 4]).unwrap());
    let e = QcaExpr::identity(s6).then_shift(0, 1).unwrap().then_shift(1, -2).unwrap();
    let idx = gnvw_symbolic(&e);
    assert_eq!(idx.exponent(2), 1 - 4);
    assert_eq!(idx.exponent(3), 1);
    assert!(gnvw_symbolic(&presets::levin_gu_gamma(&qubits()).unwrap()).is_zero());
}

#[test]
fn support_algebra_examples() {
    let s = qubits();
    let zz = LocalOperator::new(s.clone(), Window::new(0, 1), kron(&pauli::z(), &pauli::z())).unwrap();
    assert_eq!(support_algebra_dim(&[zz], Window::site(1)).unwrap(), 2);
    let mut swap = CMatrix::zeros(4, 4);
    for (a, b) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        swap[(a, b)] = C64::new(1.0, 0.0);
    }
    let swap = LocalOperator::new(s.clone(), Window::new(0, 1), swap).unwrap();
    assert_eq!(support_algebra_dim(&[swap], Window::site(1)).unwrap(), 4);
    let id = LocalOperator::identity(s, Window::new(0, 1)).unwrap();
    assert_eq!(support_algebra_dim(&[id], Window::site(1)).unwrap(), 1);
}

#[test]
fn numeric_index_examples() {
    let s = qubits();
    let shift = QcaExpr::identity(s.clone()).then_shift(0, 1).unwrap();
    let n = gnvw_numeric_detailed(&shift).unwrap();
    assert_eq!((n.dim_right, n.dim_left), (4, 1));
    assert_eq!(n.index, PrimeLog::log_of(2, 1));
    let left = gnvw_numeric_detailed(&invert(&shift)).unwrap();
    assert_eq!((left.dim_right, left.dim_left), (1, 4));

    let two = Arc::new(SiteSpec::new(vec![2, 2]).unwrap());
    let [sw, sw_tilde] = swap_layers(&two, 0, 1).unwrap();
    let circuit = QcaExpr::identity(two).then_layer(sw).unwrap().then_layer(sw_tilde).unwrap();
    let n = gnvw_numeric_detailed(&circuit).unwrap();
    assert_eq!(n.dim_right, n.dim_left);
    assert!(n.index.is_zero());

    assert!(gnvw_numeric(&presets::levin_gu_gamma(&s).unwrap()).unwrap().is_zero());
}

#[test]
fn swap_layers_move_registers() {
    let two = Arc::new(SiteSpec::new(vec![2, 2]).unwrap());
    let [sw, sw_tilde] = swap_layers(&two, 0, 1).unwrap();
    let circuit = QcaExpr::identity(two.clone()).then_layer(sw).unwrap().then_layer(sw_tilde).unwrap();
    let shifts = QcaExpr::identity(two.clone()).then_shift(0, 1).unwrap().then_shift(1, -1).unwrap();
    assert!(max_deviation_on_units(&circuit, &shifts, Window::new(-2, 2)).unwrap() < 1e-9);
}

#[test]
fn balance_shifts_replaces_opposite_shifts() {
    let two = Arc::new(SiteSpec::new(vec![2, 2]).unwrap());
    let cz = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(
        [1.0, 1.0, 1.0, -1.0].iter().map(|&x| C64::new(x, 0.0)).collect(),
    ));
    let e = QcaExpr::identity(two.clone())
        .then_shift(0, 1)
        .unwrap()
        .then_layer(BlockLayer::on_site(&two, cz).unwrap())
        .unwrap()
        .then_shift(1, -1)
        .unwrap();
    let b = balance_shifts(&e).unwrap();
    assert!(b.is_layer_only());
    assert!(max_deviation_on_units(&e, &b, Window::new(-3, 3)).unwrap() < 1e-9);

    let unbalanced = QcaExpr::identity(two).then_shift(0, 1).unwrap();
    assert!(balance_shifts(&unbalanced).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn inverse_cancels(seed in any::<u64>(), d in 2usize..4) {
        let e = common::random::expr(seed, d, 4 - d);
        let id = QcaExpr::identity(e.sites().clone());
        prop_assert!(max_deviation_on_units(&compose(&e, &invert(&e)).unwrap(), &id, Window::new(-1, 1)).unwrap() < 1e-9);
        prop_assert!(max_deviation_on_units(&compose(&invert(&e), &e).unwrap(), &id, Window::new(-1, 1)).unwrap() < 1e-9);
    }

    #[test]
    fn images_are_homomorphic(seed in any::<u64>(), d in 2usize..4) {
        let e = common::random::expr(seed, d, 4 - d);
        let s = e.sites().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let a = LocalOperator::new(s.clone(), Window::new(0, 1), common::random::unitary(d * d, &mut rng)).unwrap();
        let b = LocalOperator::new(s.clone(), Window::new(1, 1), common::random::unitary(d, &mut rng)).unwrap();
        let ab = e.apply(&a.product(&b).unwrap()).unwrap();
        let prod = e.apply(&a).unwrap().product(&e.apply(&b).unwrap()).unwrap();
        prop_assert!(op_distance(&ab, &prod).unwrap() < 1e-9);
        let adj = e.apply(&a.adjoint()).unwrap();
        prop_assert!(op_distance(&adj, &e.apply(&a).unwrap().adjoint()).unwrap() < 1e-9);
        prop_assert!((e.apply(&a).unwrap().norm() - a.norm()).abs() < 1e-9);
    }

    #[test]
    fn numeric_index_is_symbolic(seed in any::<u64>(), d in 2usize..4) {
        let e = common::random::expr(seed, d, 4 - d);
        prop_assert_eq!(gnvw_numeric_detailed(&e).unwrap().index, gnvw_symbolic(&e));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn index_is_additive(s1 in any::<u64>(), s2 in any::<u64>()) {
        let (a, b) = (common::random::expr(s1, 2, 1), common::random::expr(s2, 2, 1));
        let ab = compose(&a, &b).unwrap();
        prop_assert_eq!(gnvw_symbolic(&ab), gnvw_symbolic(&a).add(&gnvw_symbolic(&b)));
        prop_assert_eq!(gnvw_numeric(&ab).unwrap(), gnvw_numeric(&a).unwrap().add(&gnvw_numeric(&b).unwrap()));
    }
}
