//! Unpreconditioned BiCGSTAB for the implicit systems of the diffusion
//! integrator.

use super::TimesteppingError;

/// Solves `A x = b` given only the matrix-vector action of `A`.
///
/// Iterates until the true residual satisfies `||b - A x|| <= tol * ||b||`.
/// The recursive residual drives iteration; acceptance re-checks the
/// explicit residual so drift cannot produce a false convergence claim.
/// Returns the solution, the iteration count and the final relative
/// residual.
pub fn bicgstab<F>(
    apply: F,
    b: &[f64],
    x0: &[f64],
    tol: f64,
    maxit: usize,
) -> Result<(Vec<f64>, usize, f64), TimesteppingError>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    assert_eq!(x0.len(), n, "initial guess dimension mismatch");

    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok((vec![0.0; n], 0, 0.0));
    }

    let mut x = x0.to_vec();
    let mut work = vec![0.0; n];
    apply(&x, &mut work);
    let mut r: Vec<f64> = b.iter().zip(&work).map(|(bi, ax)| bi - ax).collect();
    let r_hat = r.clone();

    // Explicit-residual convergence check, with one guard iteration budget.
    let true_residual = |x: &[f64], work: &mut Vec<f64>| -> f64 {
        apply(x, work);
        let mut acc = 0.0;
        for i in 0..n {
            let d = b[i] - work[i];
            acc += d * d;
        }
        acc.sqrt()
    };

    if norm(&r) <= tol * b_norm {
        let res = true_residual(&x, &mut work);
        if res <= tol * b_norm {
            return Ok((x, 0, res / b_norm));
        }
    }

    let mut rho = 1.0f64;
    let mut alpha = 1.0f64;
    let mut omega = 1.0f64;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];

    for it in 1..=maxit {
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 {
            return Err(TimesteppingError::Breakdown("rho vanished".into()));
        }
        let beta = (rho_new / rho) * (alpha / omega);
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        apply(&p, &mut v);
        let rv = dot(&r_hat, &v);
        if rv == 0.0 {
            return Err(TimesteppingError::Breakdown("r_hat . v vanished".into()));
        }
        alpha = rho_new / rv;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) <= tol * b_norm {
            for i in 0..n {
                x[i] += alpha * p[i];
            }
            let res = true_residual(&x, &mut work);
            if res <= tol * b_norm {
                return Ok((x, it, res / b_norm));
            }
            // Not actually converged: rebuild the residual and carry on.
            for i in 0..n {
                r[i] = b[i] - work[i];
            }
            rho = rho_new;
            omega = 1.0;
            continue;
        }
        apply(&s, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            return Err(TimesteppingError::Breakdown("t . t vanished".into()));
        }
        omega = dot(&t, &s) / tt;
        if omega == 0.0 {
            return Err(TimesteppingError::Breakdown("omega vanished".into()));
        }
        for i in 0..n {
            x[i] += alpha * p[i] + omega * s[i];
            r[i] = s[i] - omega * t[i];
        }
        if norm(&r) <= tol * b_norm {
            let res = true_residual(&x, &mut work);
            if res <= tol * b_norm {
                return Ok((x, it, res / b_norm));
            }
            for i in 0..n {
                r[i] = b[i] - work[i];
            }
        }
        rho = rho_new;
    }

    let res = true_residual(&x, &mut work) / b_norm;
    Err(TimesteppingError::NotConverged {
        iterations: maxit,
        residual: res,
    })
}
