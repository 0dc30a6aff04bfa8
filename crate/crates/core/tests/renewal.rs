mod common;

use proptest::prelude::*;
use qreset::linalg::{self, random_density_matrix, stream_rng, CMatrix, CVector};
use qreset::renewal::{
    constant_r_map, generalized_schedule_from_survival, time_local_map, StationaryOptions,
};
use qreset::{DensityMatrix, Error, KrausChannel, RenewalTables, ResetProcess, ResetSchedule};
use rand::Rng;

fn random_rates<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>()).collect()
}

fn random_process(seed: u64, dim: usize, horizon: usize) -> (ResetProcess, CMatrix) {
    let mut rng = stream_rng(seed, 0);
    let channel = KrausChannel::random(dim, 2, &mut rng);
    let reset = random_density_matrix(dim, &mut rng);
    let rho0 = random_density_matrix(dim, &mut rng).into_matrix();
    let rates = random_rates(horizon, &mut rng);
    let process =
        ResetProcess::new(channel, reset, ResetSchedule::from_values(rates).unwrap()).unwrap();
    (process, rho0)
}

fn vec_of(x: &CMatrix) -> CVector {
    CVector::from_column_slice(x.as_slice())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn propagation_matches_pattern_enumeration(seed in any::<u64>(), dim in 2usize..4, horizon in 1usize..=10) {
        let (process, rho0) = random_process(seed, dim, horizon);
        let states = process.propagate(&rho0, horizon).unwrap();
        let rates = process.schedule().values();
        for (t, state) in states.iter().enumerate() {
            let expected = common::enumerate_patterns(
                process.channel().kraus_ops(),
                process.reset_state().matrix(),
                &rates,
                &rho0,
                t,
            );
            prop_assert!(common::max_abs_diff(state, &expected) < 1e-12, "t = {}", t);
        }
    }

    #[test]
    fn reset_rate_recursion_matches_explicit_form(seed in any::<u64>(), horizon in 1usize..120) {
        let rates = random_rates(horizon, &mut stream_rng(seed, 1));
        let tables = RenewalTables::build(&ResetSchedule::from_values(rates.clone()).unwrap()).unwrap();
        let explicit = common::nu_explicit(&rates);
        for t in 1..=horizon {
            let nu = tables.nu(t);
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&nu));
            prop_assert!((nu - explicit[t]).abs() < 1e-12);
        }
    }

    #[test]
    fn maps_reproduce_propagation_and_stay_cptp(seed in any::<u64>(), dim in 2usize..4) {
        let horizon = 12;
        let (process, rho0) = random_process(seed, dim, horizon);
        let states = process.propagate(&rho0, horizon).unwrap();
        let maps = process.dynamical_maps(horizon).unwrap();
        let duals = process.dual_dynamical_maps(horizon).unwrap();
        for t in 0..=horizon {
            prop_assert!(common::max_abs_diff(&maps[t].apply(&rho0).unwrap(), &states[t]) < 1e-12);
            let report = maps[t].is_cptp(1e-10);
            prop_assert!(report.is_cptp, "{:?}", report);
            prop_assert!(duals[t].max_abs_diff(&maps[t].adjoint()) < 1e-12);
            prop_assert!(duals[t].unitality_defect() < 1e-12);
        }
    }

    #[test]
    fn constant_rate_gives_semigroup(seed in any::<u64>(), r in 0.0f64..=1.0) {
        let mut rng = stream_rng(seed, 2);
        let channel = KrausChannel::random(2, 2, &mut rng);
        let reset = random_density_matrix(2, &mut rng);
        let step = constant_r_map(&channel, &reset, r).unwrap();
        let process = ResetProcess::new(channel, reset, ResetSchedule::constant(r, 15).unwrap()).unwrap();
        for (t, map) in process.dynamical_maps(15).unwrap().iter().enumerate() {
            prop_assert!(map.max_abs_diff(&step.pow(t)) < 1e-11);
        }
    }
}

#[test]
fn time_local_map_is_ordered_composition() {
    let mut rng = stream_rng(3, 0);
    let channel = KrausChannel::random(2, 3, &mut rng);
    let reset = random_density_matrix(2, &mut rng);
    let rates = random_rates(6, &mut rng);
    let rho0 = random_density_matrix(2, &mut rng).into_matrix();
    let mut expected = rho0.clone();
    for &r in &rates {
        let evolved = common::apply_kraus(channel.kraus_ops(), &expected);
        expected = evolved * linalg::c(1.0 - r, 0.0) + reset.matrix() * linalg::c(r, 0.0);
    }
    let map = time_local_map(&channel, &reset, &rates, 6).unwrap();
    assert!(common::max_abs_diff(&map.apply(&rho0).unwrap(), &expected) < 1e-13);
    assert!(matches!(
        time_local_map(&channel, &reset, &rates, 7),
        Err(Error::HorizonExceeded { .. })
    ));
}

#[test]
fn constant_rate_stationary_state_solves_fixed_point_equation() {
    // ρ = r (1 - (1 - r) E)⁻¹ ρ_reset, solved as a dense linear system
    let mut rng = stream_rng(4, 0);
    let channel = KrausChannel::random(3, 2, &mut rng);
    let reset = random_density_matrix(3, &mut rng);
    let r = 0.3;
    let e = channel.to_superoperator().into_matrix();
    let system = CMatrix::identity(9, 9) - e * linalg::c(1.0 - r, 0.0);
    let rhs = vec_of(reset.matrix()) * linalg::c(r, 0.0);
    let solution = system.lu().solve(&rhs).unwrap();
    let expected = CMatrix::from_column_slice(3, 3, solution.as_slice());

    let process = ResetProcess::new(
        channel,
        reset.clone(),
        ResetSchedule::constant(r, 1).unwrap(),
    )
    .unwrap();
    let report = process
        .stationary_state(
            &DensityMatrix::maximally_mixed(3).into_matrix(),
            &StationaryOptions::default(),
        )
        .unwrap();
    assert!(report.converged);
    assert!(common::max_abs_diff(&report.state, &expected) < 1e-9);
}

/// Renewal limit `Σ_k S(k) E^k[ρ_reset] / Σ_k S(k)`.
fn renewal_limit(process: &ResetProcess, terms: usize) -> CMatrix {
    let schedule = process.schedule();
    let mut survival = 1.0;
    let mut orbit = process.reset_state().matrix().clone();
    let mut acc = CMatrix::zeros(orbit.nrows(), orbit.ncols());
    let mut norm = 0.0;
    for k in 0..terms {
        if k > 0 {
            survival *= 1.0 - schedule.r(k);
            orbit = common::apply_kraus(process.channel().kraus_ops(), &orbit);
        }
        acc += &orbit * linalg::c(survival, 0.0);
        norm += survival;
    }
    acc.unscale(norm)
}

#[test]
fn time_dependent_schedules_settle_at_renewal_limit() {
    let mut rng = stream_rng(5, 0);
    let channel = KrausChannel::unitary(linalg::haar_unitary(2, &mut rng)).unwrap();
    let reset = DensityMatrix::basis(2, 0);
    for (schedule, tol) in [
        (ResetSchedule::ramp(0.01, 0.2, 1).unwrap(), 1e-9),
        (ResetSchedule::cosine(1).unwrap(), 1e-7),
    ] {
        let process = ResetProcess::new(channel.clone(), reset.clone(), schedule).unwrap();
        let report = process
            .stationary_state(reset.matrix(), &StationaryOptions::default())
            .unwrap();
        assert!(report.converged, "{:?}", report.rule);
        let expected = renewal_limit(&process, 5000);
        assert!(common::max_abs_diff(&report.state, &expected) < tol);
    }
}

#[test]
fn survival_curves_round_trip_through_generalized_schedules() {
    let survival = [1.0, 0.5, 0.8, 0.3, 0.3, 0.0];
    let schedule = generalized_schedule_from_survival(&survival).unwrap();
    assert!((schedule.r(2) + 0.6).abs() < 1e-15);
    let tables = RenewalTables::build(&schedule).unwrap();
    for (t, &s) in survival.iter().enumerate() {
        assert!((tables.survival(t) - s).abs() < 1e-15);
    }
    assert!(generalized_schedule_from_survival(&[1.0, 1.2]).is_err());
    assert!(generalized_schedule_from_survival(&[0.9, 0.5]).is_err());
    // a survival of zero cannot be followed by a nonzero value
    assert!(generalized_schedule_from_survival(&[1.0, 0.0, 0.5]).is_err());
}

#[test]
fn schedule_text_round_trips_exactly() {
    let schedule = ResetSchedule::from_values(random_rates(30, &mut stream_rng(6, 0))).unwrap();
    let parsed = ResetSchedule::from_text(&schedule.to_text()).unwrap();
    assert_eq!(parsed, schedule);
}

#[test]
fn classical_schedules_reject_probabilities_outside_unit_interval() {
    assert!(matches!(
        ResetSchedule::from_values(vec![0.1, 1.5]),
        Err(Error::InvalidResetProbability { t: 2, .. })
    ));
    assert!(ResetSchedule::constant(-0.1, 3).is_err());
}
