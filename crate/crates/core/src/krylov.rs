//! Left-preconditioned BiCGSTAB.

use crate::error::{Error, Result};
use crate::la::{dot, norm2};

/// Wall-clock seconds per pipeline stage.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StageTimings {
    pub setup: f64,
    pub assembly: f64,
    pub solve: f64,
    pub reconstruction: f64,
}

impl StageTimings {
    pub fn total(&self) -> f64 {
        self.setup + self.assembly + self.solve + self.reconstruction
    }

    pub fn accumulate(&mut self, other: &StageTimings) {
        self.setup += other.setup;
        self.assembly += other.assembly;
        self.solve += other.solve;
        self.reconstruction += other.reconstruction;
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveReport {
    /// Full BiCGSTAB steps taken (a half-step exit counts as one).
    pub iterations: usize,
    pub converged: bool,
    /// Relative preconditioned residual: the initial value, then one entry
    /// per half step.
    pub residual_history: Vec<f64>,
    /// `‖b − A x‖ / ‖b‖` at exit.
    pub true_residual: f64,
    /// Whatever the per-step observer returned, one entry per full step.
    pub error_history: Vec<f64>,
    /// `‖b − A x‖ / ‖b‖` per full step, filled only by callers that track it.
    pub true_residual_history: Vec<f64>,
    pub stage_timings: StageTimings,
    pub restarts: usize,
    /// `‖b − A M b‖ / ‖b‖`, the residual after one preconditioner application.
    pub cycle_reduction: Option<f64>,
}

impl SolveReport {
    /// Preconditioned residual after each full step, starting at step 0.
    pub fn full_step_residuals(&self) -> Vec<f64> {
        self.residual_history.iter().step_by(2).copied().collect()
    }
}

/// Per-full-step observer `(iteration, x)`; a returned value is appended to
/// [`SolveReport::error_history`].
pub type Observer<'a> = &'a mut dyn FnMut(usize, &[f64]) -> Option<f64>;

const BREAKDOWN: f64 = 1e-30;

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Solves `A x = b` from `x = 0` with left preconditioner `M`, declaring
/// convergence when `‖M(b − A x)‖ ≤ tol ‖M b‖`. Hitting `maxit` is reported
/// through `converged = false`, not as an error.
pub fn bicgstab(
    mut apply_a: impl FnMut(&[f64]) -> Vec<f64>,
    mut apply_m: impl FnMut(&[f64]) -> Vec<f64>,
    b: &[f64],
    tol: f64,
    maxit: usize,
    mut observer: Option<Observer<'_>>,
) -> Result<(Vec<f64>, SolveReport)> {
    if !(tol > 0.0) || maxit == 0 {
        return Err(Error::InvalidArgument(format!(
            "tol = {tol}, maxit = {maxit}"
        )));
    }
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut report = SolveReport::default();
    let bnorm = norm2(b);
    let mut r = apply_m(b);
    let r0norm = norm2(&r);
    report.residual_history.push(1.0);
    if bnorm == 0.0 || r0norm == 0.0 {
        report.converged = true;
        return Ok((x, report));
    }
    let mut rhat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut it = 0;
    while it < maxit {
        let rho_new = dot(&rhat, &r);
        let mut broke = rho_new.abs() < BREAKDOWN * norm2(&rhat) * norm2(&r);
        let mut s = Vec::new();
        let mut t = Vec::new();
        if !broke {
            let beta = (rho_new / rho) * (alpha / omega);
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
            v = apply_m(&apply_a(&p));
            let rv = dot(&rhat, &v);
            broke = rv.abs() < BREAKDOWN * norm2(&rhat) * norm2(&v) || rv == 0.0;
            if !broke {
                alpha = rho_new / rv;
                rho = rho_new;
                s = r.clone();
                axpy(&mut s, -alpha, &v);
                let snorm = norm2(&s) / r0norm;
                report.residual_history.push(snorm);
                if snorm <= tol {
                    axpy(&mut x, alpha, &p);
                    it += 1;
                    report.converged = true;
                    if let Some(obs) = observer.as_mut() {
                        if let Some(e) = obs(it, &x) {
                            report.error_history.push(e);
                        }
                    }
                    break;
                }
                t = apply_m(&apply_a(&s));
                let tt = dot(&t, &t);
                broke = tt == 0.0;
                if !broke {
                    omega = dot(&t, &s) / tt;
                    broke = omega.abs() < BREAKDOWN;
                }
            }
        }
        if broke {
            if report.restarts > 0 {
                return Err(Error::Breakdown { iteration: it });
            }
            report.restarts += 1;
            // drop a dangling half-step entry so history stays aligned
            if report.residual_history.len() % 2 == 0 {
                report.residual_history.pop();
            }
            let ax = apply_a(&x);
            let res: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            r = apply_m(&res);
            rhat = r.clone();
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
            v.iter_mut().for_each(|e| *e = 0.0);
            p.iter_mut().for_each(|e| *e = 0.0);
            continue;
        }
        axpy(&mut x, alpha, &p);
        axpy(&mut x, omega, &s);
        r = s;
        axpy(&mut r, -omega, &t);
        it += 1;
        let rnorm = norm2(&r) / r0norm;
        report.residual_history.push(rnorm);
        if let Some(obs) = observer.as_mut() {
            if let Some(e) = obs(it, &x) {
                report.error_history.push(e);
            }
        }
        if rnorm <= tol {
            report.converged = true;
            break;
        }
    }
    report.iterations = it;
    let ax = apply_a(&x);
    let res: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    report.true_residual = norm2(&res) / bnorm;
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_op(a: &DMatrix<f64>) -> impl FnMut(&[f64]) -> Vec<f64> + '_ {
        move |x| (a * DVector::from_column_slice(x)).as_slice().to_vec()
    }

    #[test]
    fn identity_converges_immediately() {
        let b = vec![1.0, -2.0, 3.0];
        let (x, rep) = bicgstab(|v| v.to_vec(), |v| v.to_vec(), &b, 1e-12, 10, None).unwrap();
        assert!(rep.converged);
        assert!(rep.iterations <= 1);
        assert_eq!(x, b);
    }

    #[test]
    fn random_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = DMatrix::from_fn(50, 50, |_, _| rng.gen_range(-1.0..1.0));
        let a = &g * g.transpose() + DMatrix::identity(50, 50) * 5.0;
        let b: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (x, rep) = bicgstab(dense_op(&a), |v| v.to_vec(), &b, 1e-10, 500, None).unwrap();
        assert!(rep.converged);
        assert!(rep.true_residual <= 1e-8);
        let oracle = a.lu().solve(&DVector::from_column_slice(&b)).unwrap();
        let diff = (DVector::from_column_slice(&x) - oracle).amax();
        assert!(diff < 1e-7, "{diff}");
        // 1 + 2·it after a full step, 2·it after a half-step exit
        let len = rep.residual_history.len();
        assert!(len == 2 * rep.iterations || len == 2 * rep.iterations + 1);
    }

    #[test]
    fn exact_preconditioner_two_iterations() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = DMatrix::from_fn(20, 20, |i, j| {
            if i == j {
                3.0
            } else {
                rng.gen_range(-0.5..0.5)
            }
        });
        let ainv = a.clone().try_inverse().unwrap();
        let b: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let (_, rep) = bicgstab(dense_op(&a), dense_op(&ainv), &b, 1e-12, 50, None).unwrap();
        assert!(rep.converged && rep.iterations <= 2);
    }

    #[test]
    fn maxit_reports_nonconvergence() {
        let a = DMatrix::from_fn(30, 30, |i, j| {
            if i == j {
                1.0 + i as f64
            } else if j == i + 1 {
                1.0
            } else {
                0.0
            }
        });
        let b = vec![1.0; 30];
        let (_, rep) = bicgstab(dense_op(&a), |v| v.to_vec(), &b, 1e-14, 2, None).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 2);
    }

    #[test]
    fn skew_matrix_breaks_down_twice() {
        // (b, A b) = 0 for skew A, so the first α-step breaks down
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let r = bicgstab(dense_op(&a), |v| v.to_vec(), &[1.0, 0.0], 1e-12, 10, None);
        assert!(matches!(r, Err(Error::Breakdown { .. })));
    }

    #[test]
    fn observer_sees_every_full_step() {
        let a = DMatrix::from_fn(10, 10, |i, j| {
            if i == j {
                2.0
            } else if j + 1 == i {
                -1.0
            } else {
                0.0
            }
        });
        let b = vec![1.0; 10];
        let mut seen = Vec::new();
        let mut obs = |it: usize, _: &[f64]| {
            seen.push(it);
            Some(it as f64)
        };
        let (_, rep) =
            bicgstab(dense_op(&a), |v| v.to_vec(), &b, 1e-12, 100, Some(&mut obs)).unwrap();
        assert_eq!(seen, (1..=rep.iterations).collect::<Vec<_>>());
        assert_eq!(rep.error_history.len(), rep.iterations);
    }
}
