use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Root mean squared position error over `M` runs:
/// `sqrt( Σ_m Σ_j ‖truth_j − est_m,j‖² / (M·N) )`.
pub fn rmse<T: Scalar>(truth: &[Vec<T>], estimates: &[Vec<Vec<T>>]) -> Result<T> {
    if estimates.is_empty() || truth.is_empty() {
        return Err(Error::DimensionMismatch("rmse needs at least one run and one sensor".into()));
    }
    let d = truth[0].len();
    let mut total = T::zero();
    for (m, run) in estimates.iter().enumerate() {
        if run.len() != truth.len() {
            return Err(Error::DimensionMismatch(format!(
                "run {m} has {} sensors, expected {}",
                run.len(),
                truth.len()
            )));
        }
        for (p, q) in truth.iter().zip(run) {
            if p.len() != d || q.len() != d {
                return Err(Error::DimensionMismatch(format!("run {m}: expected dimension {d}")));
            }
            for (&a, &b) in p.iter().zip(q) {
                total += (a - b) * (a - b);
            }
        }
    }
    Ok((total / (T::of_usize(estimates.len()) * T::of_usize(truth.len()))).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_four_five() {
        let v = rmse(&[vec![0.0, 0.0]], &[vec![vec![0.3, 0.4]]]).unwrap();
        assert!((v - 0.5f64).abs() < 1e-15);
    }

    #[test]
    fn averaged_over_runs() {
        let t = vec![vec![0.0, 0.0]];
        let v = rmse(&t, &[vec![vec![1.0, 0.0]], vec![vec![0.0, 0.0]]]).unwrap();
        assert!((v - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn mismatch_rejected() {
        assert!(rmse(&[vec![0.0f32, 0.0]], &[vec![vec![0.0, 0.0], vec![1.0, 1.0]]]).is_err());
        assert!(rmse(&[vec![0.0, 0.0]], &[vec![vec![0.0]]]).is_err());
    }
}
