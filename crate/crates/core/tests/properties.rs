use std::f64::consts::{FRAC_PI_2, PI};

use approx::{abs_diff_eq, assert_abs_diff_eq};
use num_complex::Complex64 as Complex;
use proptest::prelude::*;

use statelab::bell::{
    conditional_prob, expectation_concurrent, expectation_qm, hidden_variable_table, AxisPair, OutcomePair,
};
use statelab::cat_eraser::{build_cat_s, evolve, sew_joint_prob, CatLabel, CatPhases, EraserBasis};
use statelab::ghz::{
    assign_spin, compat_amplitude, solve_theta_k, ConsistentSet, Pole, SpinAssignment, TripleDirections,
    DEFAULT_EPSILON,
};
use statelab::photo::{build_photo_s, evolve_uniform, Excitation, PhotoConfig, Site};
use statelab::qcore::{
    apply, compat_prob, eigen_residual, eigenspinor_plus, sigma_dot_n, spin_basis, tensor, Direction, Ket, Operator,
    Sign,
};
use statelab::zwm::{signal_intensity, visibility, ZwmConfig};

fn direction() -> impl Strategy<Value = Direction> {
    (-1.0f64..=1.0, 0.0f64..2.0 * PI).prop_map(|(z, phi)| Direction::new(z.acos(), phi).unwrap())
}

fn complex(r: f64) -> impl Strategy<Value = Complex> {
    (0.0..r, 0.0..2.0 * PI).prop_map(|(m, a)| Complex::from_polar(m, a))
}

fn spinor() -> impl Strategy<Value = Ket> {
    (complex(1.0), complex(1.0))
        .prop_filter("nonzero", |(a, b)| a.norm() + b.norm() > 1e-3)
        .prop_map(|(a, b)| Ket::new(spin_basis(), vec![a, b]).unwrap())
}

fn sign() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Plus), Just(Sign::Minus)]
}

/// Spinor of `+n` written out by hand.
fn raw_spinor(n: Direction, s: Sign) -> [Complex; 2] {
    let (theta, phi) = match s {
        Sign::Plus => (n.theta(), n.phi()),
        Sign::Minus => (PI - n.theta(), n.phi() + PI),
    };
    [
        Complex::new((theta / 2.0).cos(), 0.0),
        Complex::from_polar((theta / 2.0).sin(), phi),
    ]
}

fn raw_joint(pair: &AxisPair, out: OutcomePair) -> [Complex; 4] {
    let (u, v) = (raw_spinor(pair.a, out.a), raw_spinor(pair.b, out.b));
    [u[0] * v[0], u[0] * v[1], u[1] * v[0], u[1] * v[1]]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn eigenspinors_and_pauli_square(n in direction()) {
        let plus = eigenspinor_plus(n);
        prop_assert!((plus.norm() - 1.0).abs() < 1e-12);
        let (lambda, residual) = eigen_residual(&sigma_dot_n(n), &plus).unwrap();
        prop_assert!(residual < 1e-12);
        prop_assert!((lambda.re - 1.0).abs() < 1e-12);
        let square = sigma_dot_n(n).compose(&sigma_dot_n(n)).unwrap();
        prop_assert!(square.max_abs_diff(&Operator::identity(&spin_basis())).unwrap() < 1e-12);
    }

    #[test]
    fn compat_prob_is_symmetric_bounded_and_phase_blind(u in spinor(), v in spinor(), alpha in 0.0..2.0 * PI) {
        let (u, v) = (u.normalize().unwrap(), v.normalize().unwrap());
        let p = compat_prob(&u, &v).unwrap();
        prop_assert_eq!(p, compat_prob(&v, &u).unwrap());
        prop_assert!((0.0..=1.0).contains(&p));
        let rotated = u.scale(Complex::from_polar(1.0, alpha));
        prop_assert!(abs_diff_eq!(compat_prob(&rotated, &v).unwrap(), p, epsilon = 1e-14));
    }

    #[test]
    fn tensor_multiplies_norms(u in spinor(), v in spinor()) {
        let t = tensor(&[u.clone(), v.clone()]).unwrap();
        prop_assert!((t.norm() - u.norm() * v.norm()).abs() < 1e-12);
    }

    #[test]
    fn bell_chain_and_table(a in direction(), b in direction()) {
        let pair = AxisPair::new(a, b);
        let concurrent = expectation_concurrent(&pair);
        let qm = expectation_qm(&pair).unwrap();
        prop_assert!((concurrent - qm).abs() < 1e-12);
        prop_assert!((qm + a.dot(&b)).abs() < 1e-12);
        let table = hidden_variable_table(&pair);
        prop_assert!(table.entries.iter().all(|e| e.rho >= 0.0));
        prop_assert!((table.total_weight() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conditional_prob_needs_no_reference_state(
        a in direction(), b in direction(), c in direction(), d in direction(),
        s in proptest::array::uniform4(sign()),
    ) {
        let (from, to) = (AxisPair::new(a, b), AxisPair::new(c, d));
        let (o1, o2) = (OutcomePair::new(s[0], s[1]), OutcomePair::new(s[2], s[3]));
        let (x, y) = (raw_joint(&from, o1), raw_joint(&to, o2));
        let overlap: Complex = x.iter().zip(&y).map(|(p, q)| p.conj() * q).sum();
        prop_assert!((conditional_prob((&from, o1), (&to, o2)) - overlap.norm_sqr()).abs() < 1e-14);
    }

    #[test]
    fn cat_probability_conservation(phi in -10.0f64..10.0, chi in -10.0f64..10.0) {
        let p = CatPhases::new(phi, chi).unwrap();
        prop_assert!(build_cat_s(p).unwrap().unitarity_residual() < 1e-12);
        for initial in CatLabel::ALL {
            let total: f64 = evolve(initial, p).unwrap().amps().iter().map(|z| z.norm_sqr()).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn solve_theta_k_closes_the_cot_product(ti in 1e-3f64..PI - 1e-3, tj in 1e-3f64..PI - 1e-3) {
        let cot = |x: f64| 1.0 / (x / 2.0).tan();
        if let Ok(tk) = solve_theta_k(ti, tj) {
            let product = cot(ti) * cot(tj) * cot(tk);
            prop_assert!((product - 1.0).abs() <= 1e-12, "product {}", product);
        } else {
            // only a cot product that cannot be inverted inside (0, π) is rejected
            prop_assert!(!(cot(ti) * cot(tj)).is_finite() || cot(ti) * cot(tj) <= 0.0);
        }
    }

    #[test]
    fn hemisphere_products_stay_off_unity(
        z in proptest::array::uniform3(0.0f64..1.0),
        phi in proptest::array::uniform3(0.0f64..2.0 * PI),
    ) {
        let cot = |x: f64| 1.0 / (x / 2.0).tan();
        for (pole, above) in [(Pole::North, true), (Pole::South, false)] {
            let set = ConsistentSet::hemisphere(pole, DEFAULT_EPSILON).unwrap();
            let signed = if above { 1.0 } else { -1.0 };
            let dirs = std::array::from_fn::<_, 3, _>(|k| Direction::new((signed * z[k]).acos(), phi[k]).unwrap());
            if (0..3).all(|k| assign_spin(&set, k, dirs[k]) == SpinAssignment::Up) {
                let product: f64 = dirs.iter().map(|n| cot(n.theta())).product();
                let off_unity = if above { product > 1.0 } else { product < 1.0 };
                prop_assert!(off_unity, "product {}", product);
                let amp = compat_amplitude(&TripleDirections(dirs), [Sign::Plus; 3]).norm();
                prop_assert!(amp > 0.0);
            }
        }
    }

    #[test]
    fn zwm_forms_and_visibility(seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let cfg = ZwmConfig::random(&mut rng);
        let i = signal_intensity(&cfg).unwrap();
        prop_assert!((i.operator_form - i.closed_form).abs() < 1e-12);
        let v = visibility(&cfg).unwrap();
        prop_assert!((0.0..=1.0 + 1e-15).contains(&v));
        let half = visibility(&cfg.with_transmission(cfg.t_amp * 0.5)).unwrap();
        prop_assert!((half - 0.5 * v).abs() < 1e-12);
    }

    #[test]
    fn photo_blocks_are_site_local_with_phase_covariance(
        a in complex(1.0), b in proptest::array::uniform4(complex(1.0)),
        phi in 0.0f64..2.0 * PI, delta in -PI..PI,
    ) {
        let cfg = PhotoConfig { a, b_plus: b[0], b_minus: b[1], c_plus: b[2], c_minus: b[3] };
        prop_assume!(cfg.validate().is_ok());
        let s = build_photo_s(&cfg).unwrap();
        for from in Excitation::ALL {
            let column = apply(&s, &from.ket()).unwrap();
            for to in Excitation::ALL {
                if to.site != from.site {
                    prop_assert_eq!(column.amps()[to.index()], Complex::new(0.0, 0.0));
                }
            }
        }
        if let (Ok(x), Ok(y)) = (evolve_uniform(&cfg, phi), evolve_uniform(&cfg, phi + delta)) {
            for e in Excitation::ALL {
                let turn = Complex::from_polar(1.0, if e.site == Site::Plus { delta } else { -delta });
                prop_assert!((y.amps()[e.index()] - x.amps()[e.index()] * turn).norm() < 1e-14);
            }
        }
    }
}

#[test]
fn eraser_combinations_sum_to_one() {
    for b1 in EraserBasis::BOTH {
        for b2 in EraserBasis::BOTH {
            let total: f64 = [Sign::Plus, Sign::Minus]
                .iter()
                .flat_map(|&s1| [Sign::Plus, Sign::Minus].map(move |s2| sew_joint_prob(b1, b2, s1, s2)))
                .sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 4.0 * f64::EPSILON);
        }
    }
}

#[test]
fn equator_triple_is_orthogonal() {
    let t = TripleDirections::from_angles([(FRAC_PI_2, 0.0); 3]).unwrap();
    assert_abs_diff_eq!(compat_amplitude(&t, [Sign::Plus; 3]).norm(), 0.0, epsilon = 1e-15);
}
