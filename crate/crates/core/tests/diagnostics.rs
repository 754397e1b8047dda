use banditlab::harness::{pinsker_info_lock, pinsker_informative, separation_experiment, unlearnability_diagnostic};
use banditlab::metrics::{huber_bretagnolle_bound, pinsker_bound};

#[test]
fn unlearnability_is_reported_not_asserted() {
    let r = unlearnability_diagnostic(&[1, 2], 1.0, 20, 5).unwrap();
    assert!(!r.probative);
    assert_eq!(r.rows.len(), 2);
    assert_eq!(r.rows[0].n_functions, 16);
    assert_eq!(r.rows[1].n_functions, 32);
    for row in &r.rows {
        assert!(row.worst_success <= row.mean_success);
        assert_eq!(row.below_threshold, row.worst_success < r.threshold);
    }
}

#[test]
fn pinsker_reports_are_self_consistent() {
    for r in [pinsker_informative(8, 1.0, 300, 1).unwrap(), pinsker_info_lock(2, 0.1, 1.0, 300, 2).unwrap()] {
        assert!(r.kl > 0.0);
        assert_eq!(r.pinsker_bound, pinsker_bound(r.kl));
        assert_eq!(r.huber_bretagnolle_bound, huber_bretagnolle_bound(r.kl));
        assert!(r.pinsker_holds && r.hb_holds);
    }
}

#[test]
fn info_lock_kl_matches_pull_count() {
    // The decode learner pulls the single A_1 action n times under f_0', whose
    // A_1 mean differs from f_1's by eps1; nothing else differs.
    let r = pinsker_info_lock(2, 0.1, 1.0, 50, 3).unwrap();
    let n = r.mean_pulls[0];
    assert_eq!(r.mean_pulls.iter().sum::<f64>(), n);
    assert!((r.kl - n * 0.01 / 2.0).abs() < 1e-9);
}

#[test]
fn small_separation_run() {
    let r = separation_experiment(2, 16.0, 2000, 1.0, 40, 9).unwrap();
    assert!(r.identification.worst_function.mean_regret >= r.regret_floor);
    assert!(r.ucb.mean_regret <= r.ucb_ceiling);
    assert!(r.identification_budget as f64 >= r.sandwich[0]);
    assert!(r.identification_budget as f64 <= r.sandwich[1]);
}
