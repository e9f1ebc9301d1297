use svine_core::inference::{fit_copula, pseudo_observations};
use svine_core::linear_oracle::tau_from_alpha;
use svine_core::process::{invert_to_innovations, simulate, simulate_stream};
use svine_core::rosenblatt::log_joint_density;
use svine_core::{
    CopulaSequence, Error, Family, KpacfSpec, MarginalModel, NegativeRule, PairCopula, Rotation, SVineModel,
};

#[test]
fn simulate_and_invert_with_margin() {
    let spec = KpacfSpec::arma(&[0.7], &[0.2], 12).unwrap();
    let margin = MarginalModel::skewed_student(1.0, 0.5, 6.0, 1.3).unwrap();
    let model =
        SVineModel::from_kpacf(spec, Family::Joe, NegativeRule::default(), 12).unwrap().with_margin(margin.clone());
    let path = simulate(&model, 500, 11).unwrap();
    let x = path.x.as_ref().unwrap();
    for (u, x) in path.u.iter().zip(x) {
        assert!((margin.cdf(*x) - u).abs() < 1e-9);
    }
    let z = invert_to_innovations(&model.seq, &path.u);
    for (a, b) in z.iter().zip(&path.z) {
        assert!((a - b).abs() < 1e-9);
    }
    assert_eq!(simulate(&model, 500, 11).unwrap(), path);
    assert_ne!(simulate_stream(&model, 500, 11, 1).unwrap().u, path.u);
}

#[test]
fn gaussian_kpacf_matches_explicit_sequence() {
    let spec = KpacfSpec::fgn(0.8, 6).unwrap();
    let alpha = spec.pacf(6).unwrap();
    let from_spec = CopulaSequence::from_spec(&spec, Family::Gauss, NegativeRule::default(), 6).unwrap();
    let direct = CopulaSequence::gaussian(&alpha).unwrap();
    for k in 1..=6 {
        assert!((from_spec.lag(k).kendall_tau() - tau_from_alpha(alpha[k - 1])).abs() < 1e-12);
        assert!((from_spec.lag(k).params()[0] - direct.lag(k).params()[0]).abs() < 1e-12);
    }
}

#[test]
fn negative_taus_follow_the_rule() {
    let spec = KpacfSpec::arma(&[-0.6], &[], 3).unwrap();
    let rot = CopulaSequence::from_spec(&spec, Family::Gumbel, NegativeRule::Rotate90, 3).unwrap();
    assert_eq!(rot.lag(1).rotation(), Rotation::R90);
    assert!(rot.lag(1).kendall_tau() < 0.0);
    let sub = CopulaSequence::from_spec(&spec, Family::Gumbel, NegativeRule::SubstituteGauss, 3).unwrap();
    assert_eq!(sub.lag(1).family(), Family::Gauss);
    assert!(sub.lag(2).is_independence());
}

#[test]
fn fitted_report_reproduces_its_loglik() {
    let truth = KpacfSpec::arma(&[0.6], &[], 4).unwrap();
    let model = SVineModel::from_kpacf(truth.clone(), Family::Frank, NegativeRule::default(), 4).unwrap();
    let u = pseudo_observations(&simulate(&model, 800, 5).unwrap().u);
    let report = match fit_copula(&u, &truth.with_theta(vec![]), Family::Frank, NegativeRule::default(), 4) {
        Ok(r) => r,
        Err(Error::NotConverged(r)) => *r,
        Err(e) => panic!("{e}"),
    };
    let ll = log_joint_density(&report.sequence().unwrap(), &u).unwrap();
    assert!((ll - report.copula_loglik).abs() < 1e-8 * ll.abs().max(1.0));
    assert!((report.theta_hat[0] - 0.6).abs() < 0.1);
}

#[test]
fn sequence_and_margin_json_roundtrip() {
    let seq = CopulaSequence::new(vec![
        PairCopula::student_t(0.4, 5.0).unwrap(),
        PairCopula::clayton(1.5).unwrap().rotated(Rotation::R270),
    ]);
    let back: CopulaSequence = serde_json::from_str(&serde_json::to_string(&seq).unwrap()).unwrap();
    assert_eq!(back, seq);
    let margin = MarginalModel::normal(0.0, 2.0).unwrap();
    let back: MarginalModel = serde_json::from_str(&serde_json::to_string(&margin).unwrap()).unwrap();
    assert_eq!(back, margin);
}
