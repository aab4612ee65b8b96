use multilevel_rabi::rmt::{moment_lambda1, sample_largest_singular_values, variance_lambda1, Ensemble, SvDistribution};

fn sample_moments(n: usize, ensemble: Ensemble, trials: usize, seed: u64) -> (f64, f64) {
    let s = sample_largest_singular_values(n, n, ensemble, trials, seed).unwrap();
    let k = s.len() as f64;
    let mean = s.iter().sum::<f64>() / k;
    (mean, s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0))
}

#[test]
fn variance_tracks_monte_carlo_at_moderate_size() {
    let d = SvDistribution::new(Ensemble::Complex, 30, 30).unwrap();
    let (_, mc) = sample_moments(30, Ensemble::Complex, 1000, 3);
    let analytic = variance_lambda1(&d).unwrap();
    assert!((analytic / mc - 1.0).abs() < 0.25, "analytic {analytic}, sampled {mc}");
}

#[test]
fn mean_tracks_monte_carlo_for_both_ensembles() {
    for ensemble in [Ensemble::Complex, Ensemble::Real] {
        let d = SvDistribution::new(ensemble, 40, 40).unwrap();
        let (mc, var) = sample_moments(40, ensemble, 1000, 5);
        let z = (moment_lambda1(&d, 1).unwrap() - mc).abs() / (var / 1000.0).sqrt();
        assert!(z < 4.0, "{} z = {z}", ensemble.name());
    }
}
