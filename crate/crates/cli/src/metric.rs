//! The mode-averaged relative deviation between two occupation
//! trajectories, (1/L) Σ_q |(n_q^a - n_q^b)/n_q^b| per time stamp.

use crate::RunError;

/// One trajectory: (time stamp, per-mode occupations) in time order.
pub type OccupationSeries = Vec<(f64, Vec<f64>)>;

/// Per-time-stamp relative error of `a` against the reference `b`.
/// Time stamps and grids must match.
pub fn relative_error_metric(
    a: &OccupationSeries,
    b: &OccupationSeries,
) -> Result<Vec<(f64, f64)>, RunError> {
    if a.len() != b.len() {
        return Err(RunError::Config(format!(
            "series lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    a.iter()
        .zip(b)
        .map(|((ta, na), (tb, nb))| {
            if (ta - tb).abs() > 1e-9 * ta.abs().max(1.0) {
                return Err(RunError::Config(format!(
                    "time stamps differ: {ta} vs {tb}"
                )));
            }
            if na.len() != nb.len() {
                return Err(RunError::Config(format!(
                    "grids differ at t = {ta}: {} vs {} modes",
                    na.len(),
                    nb.len()
                )));
            }
            let metric = na
                .iter()
                .zip(nb)
                .map(|(x, y)| ((x - y) / y).abs())
                .sum::<f64>()
                / na.len() as f64;
            Ok((*ta, metric))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_series_give_zero() {
        let s = vec![(0.0, vec![0.5, 0.5]), (1.0, vec![0.4, 0.6])];
        let m = relative_error_metric(&s, &s).unwrap();
        assert!(m.iter().all(|(_, v)| *v == 0.0));
    }

    #[test]
    fn uniform_offset_gives_two_x() {
        let b = vec![(0.0, vec![0.5; 8])];
        let x = 0.03;
        let a = vec![(0.0, vec![0.5 + x; 8])];
        let m = relative_error_metric(&a, &b).unwrap();
        assert!((m[0].1 - 2.0 * x).abs() < 1e-15);
    }

    #[test]
    fn coarse_steps_err_more_at_early_times() {
        use ggescatter::gge::GgeState;
        use ggescatter::lindblad::{evolve, FactorizedKernel};
        use ggescatter::model::{BogoliubovTable, ModelParams, MomentumGrid};
        use std::sync::Arc;

        let params = ModelParams::continuous(1.0, 0.6).unwrap();
        let grid = MomentumGrid::even_sector(64).unwrap();
        let table = Arc::new(BogoliubovTable::build(params, grid).unwrap());
        let kernel = FactorizedKernel::new(&table).unwrap();
        let run = |dt: f64| -> OccupationSeries {
            let mut state = GgeState::thermal(table.clone(), 0.323);
            let mut series = Vec::new();
            for t in [3.0, 30.0] {
                evolve(&mut state, &kernel, t, dt, usize::MAX, |_| {}).unwrap();
                series.push((t, state.occupations().to_vec()));
            }
            series
        };
        let coarse = run(0.6);
        let reference = run(0.005);
        let metric = relative_error_metric(&coarse, &reference).unwrap();
        assert!(
            metric[0].1 > metric[1].1,
            "early-time error {} should exceed late-time error {}",
            metric[0].1,
            metric[1].1
        );
        assert!(metric[1].1 < 1e-2);
    }

    #[test]
    fn mismatches_are_rejected() {
        let a = vec![(0.0, vec![0.5; 4])];
        let b = vec![(0.5, vec![0.5; 4])];
        assert!(relative_error_metric(&a, &b).is_err());
        let b = vec![(0.0, vec![0.5; 5])];
        assert!(relative_error_metric(&a, &b).is_err());
        let b = vec![(0.0, vec![0.5; 4]), (1.0, vec![0.5; 4])];
        assert!(relative_error_metric(&a, &b).is_err());
    }
}
