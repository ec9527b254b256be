use num_complex::Complex64;
use onebit_mcrb::{signal, steering, steering_d1, steering_d2, SteeringModel, Theta};
use proptest::prelude::*;

fn models() -> Vec<SteeringModel> {
    vec![
        SteeringModel::ula(1).unwrap(),
        SteeringModel::ula(16).unwrap(),
        SteeringModel::tone(4e-3, 2500.0, 2500.0).unwrap(),
        SteeringModel::tone(8e-3, 10_000.0, 2500.0).unwrap(),
    ]
}

#[test]
fn unit_norm_on_grid() {
    for model in models() {
        for phi in model.grid(201) {
            let a = steering(&model, phi).unwrap();
            assert!((a.norm() - 1.0).abs() < 1e-12, "{phi}");
        }
    }
}

#[test]
fn derivatives_match_finite_differences() {
    for model in models() {
        let h = 1e-6 * model.domain().width();
        for phi in model.grid(41).into_iter().skip(1).take(39) {
            let fd1 = (steering(&model, phi + h).unwrap() - steering(&model, phi - h).unwrap()) / Complex64::from(2.0 * h);
            let fd2 = (steering_d1(&model, phi + h).unwrap() - steering_d1(&model, phi - h).unwrap())
                / Complex64::from(2.0 * h);
            let d1 = steering_d1(&model, phi).unwrap();
            let d2 = steering_d2(&model, phi).unwrap();
            assert!((fd1 - &d1).norm() <= 1e-6 * d1.norm().max(1.0), "d1 at {phi}");
            assert!((fd2 - &d2).norm() <= 1e-6 * d2.norm().max(1.0), "d2 at {phi}");
        }
    }
}

#[test]
fn domain_edges_rejected() {
    let ula = SteeringModel::ula(8).unwrap();
    assert!(steering(&ula, std::f64::consts::FRAC_PI_2).is_err());
    assert!(steering(&ula, f64::NAN).is_err());
    let tone = SteeringModel::tone(4e-3, 2500.0, 2500.0).unwrap();
    assert!(steering(&tone, 0.0).is_ok());
    assert!(steering(&tone, 2500.0).is_err());
    assert_eq!(tone.len(), 11);
}

proptest! {
    #[test]
    fn ula_is_conjugate_symmetric(n in 1usize..40, u in -0.999f64..0.999) {
        let model = SteeringModel::ula(n).unwrap();
        let a = steering(&model, u.asin()).unwrap();
        for k in 0..n {
            prop_assert!((a[k] - a[n - 1 - k].conj()).norm() < 1e-12);
        }
        prop_assert!((a.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn signal_scales_with_amplitude(u in -0.99f64..0.99, r in 0.01f64..100.0, ph in -3.2f64..3.2) {
        let model = SteeringModel::ula(8).unwrap();
        let theta = Theta::from_polar(u.asin(), r, ph);
        let s = signal(&model, &theta).unwrap();
        prop_assert!((s.norm() - r).abs() < 1e-10 * r);
        let a = steering(&model, theta.phi).unwrap();
        prop_assert!((s - a * theta.beta).norm() < 1e-12 * r);
    }
}
