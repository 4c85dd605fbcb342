//! Symmetric tridiagonal eigensolver: Sturm-sequence bisection for
//! eigenvalues restricted to an interval, inverse iteration for
//! eigenvectors, and a Rayleigh-quotient polish.
//!
//! Sized for the waveguide problem: a handful of eigenvalues at the top of
//! the spectrum of a matrix with a few thousand rows.

/// Symmetric tridiagonal matrix: `diag` length n, `off` length n-1.
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Minimum pivot magnitude for the Sturm recurrence.
    fn pivmin(&self) -> f64 {
        let max_off2 = self.off.iter().map(|o| o * o).fold(0.0_f64, f64::max);
        (f64::MIN_POSITIVE / f64::EPSILON) * max_off2.max(1.0)
    }

    /// Number of eigenvalues strictly below `x` (Sturm count via the LDL^T
    /// pivot signs).
    pub fn count_below(&self, x: f64) -> usize {
        let pivmin = self.pivmin();
        let mut count = 0usize;
        let mut d = self.diag[0] - x;
        if d.abs() < pivmin {
            d = -pivmin;
        }
        if d < 0.0 {
            count += 1;
        }
        for j in 1..self.n() {
            d = self.diag[j] - x - self.off[j - 1] * self.off[j - 1] / d;
            if d.abs() < pivmin {
                d = -pivmin;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Matrix-vector product.
    pub fn mul(&self, v: &[f64], out: &mut [f64]) {
        let n = self.n();
        for j in 0..n {
            let mut s = self.diag[j] * v[j];
            if j > 0 {
                s += self.off[j - 1] * v[j - 1];
            }
            if j + 1 < n {
                s += self.off[j] * v[j + 1];
            }
            out[j] = s;
        }
    }

    /// Eigenvalues inside `(lo, hi)`, largest first, at most `max_count`
    /// counted from the top of the interval.
    pub fn eigenvalues_in(&self, lo: f64, hi: f64, max_count: usize) -> Vec<f64> {
        if !(hi > lo) || max_count == 0 {
            return Vec::new();
        }
        let n_lo = self.count_below(lo);
        let n_hi = self.count_below(hi);
        if n_hi == n_lo {
            return Vec::new();
        }
        let first = n_hi.saturating_sub(max_count).max(n_lo);
        let mut out = Vec::with_capacity(n_hi - first);
        // Highest index = largest eigenvalue.
        for idx in (first..n_hi).rev() {
            out.push(self.bisect_index(idx, lo, hi));
        }
        out
    }

    /// Bisection for the `idx`-th smallest eigenvalue (0-based), known to lie
    /// in `(lo, hi)`.
    fn bisect_index(&self, idx: usize, lo: f64, hi: f64) -> f64 {
        let (mut a, mut b) = (lo, hi);
        let scale = a.abs().max(b.abs());
        let tol = 1e-13 * scale.max(1e-30);
        while b - a > tol {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if self.count_below(mid) > idx {
                b = mid;
            } else {
                a = mid;
            }
        }
        0.5 * (a + b)
    }

    /// Eigenvector for an isolated eigenvalue near `lambda` via inverse
    /// iteration, plus a Rayleigh-quotient refinement of the eigenvalue.
    /// Returns `(lambda_refined, v)` with `v` unit length.
    pub fn eigenvector(&self, lambda: f64) -> (f64, Vec<f64>) {
        let n = self.n();
        // Deterministic pseudo-random start vector.
        let mut v: Vec<f64> = (0..n)
            .map(|j| {
                let x = (j as u64).wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        normalize(&mut v);

        let mut lam = lambda;
        let mut tmp = vec![0.0; n];
        for iter in 0..6 {
            let solved = self.solve_shifted(lam, &v);
            v = solved;
            normalize(&mut v);
            // Rayleigh quotient.
            self.mul(&v, &mut tmp);
            let rq: f64 = v.iter().zip(&tmp).map(|(a, b)| a * b).sum();
            let res: f64 = tmp
                .iter()
                .zip(&v)
                .map(|(av, vv)| (av - rq * vv) * (av - rq * vv))
                .sum::<f64>()
                .sqrt();
            // Keep the refinement only while it stays near the bisection
            // estimate; a large jump means we latched onto a neighbour.
            if (rq - lambda).abs() < 1e-6 * lambda.abs().max(1e-30) {
                lam = rq;
            }
            if res < 1e-12 * rq.abs().max(1.0) && iter >= 1 {
                break;
            }
        }
        (lam, v)
    }

    /// Solve `(T - sigma I) x = b` by LU with partial pivoting (stable even
    /// for sigma at an eigenvalue, which is exactly the inverse-iteration
    /// use case).
    fn solve_shifted(&self, sigma: f64, b: &[f64]) -> Vec<f64> {
        let n = self.n();
        // Band storage: lower, main, upper, and the fill-in diagonal two
        // above the main that partial pivoting introduces.
        let mut dl: Vec<f64> = self.off.clone();
        let mut d: Vec<f64> = self.diag.iter().map(|x| x - sigma).collect();
        let mut du: Vec<f64> = self.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut x: Vec<f64> = b.to_vec();
        let mut pivoted = vec![false; n.saturating_sub(1)];

        for j in 0..n - 1 {
            if dl[j].abs() > d[j].abs() {
                // Swap rows j and j+1.
                pivoted[j] = true;
                std::mem::swap(&mut d[j], &mut dl[j]);
                std::mem::swap(&mut du[j], &mut d[j + 1]);
                if j + 2 < n {
                    du2[j] = du[j + 1];
                    du[j + 1] = 0.0;
                }
                x.swap(j, j + 1);
            }
            let mut piv = d[j];
            if piv == 0.0 {
                piv = f64::MIN_POSITIVE.sqrt();
                d[j] = piv;
            }
            let m = dl[j] / piv;
            d[j + 1] -= m * du[j];
            if j + 2 < n && pivoted[j] {
                du[j + 1] -= m * du2[j];
            }
            x[j + 1] -= m * x[j];
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = f64::MIN_POSITIVE.sqrt();
        }
        // Back substitution.
        x[n - 1] /= d[n - 1];
        if n >= 2 {
            x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
        }
        for j in (0..n.saturating_sub(2)).rev() {
            let mut s = x[j] - du[j] * x[j + 1];
            if pivoted[j] {
                s -= du2[j] * x[j + 2];
            }
            x[j] = s / d[j];
        }
        // Inverse iteration blows the solution up on purpose; rescale to
        // avoid infinities leaking out.
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm.is_finite() && norm > 0.0 {
            for v in &mut x {
                *v /= norm;
            }
        }
        x
    }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Discrete Dirichlet Laplacian eigenvalues are known in closed form:
    /// for -psi'' on n interior points of (0, L), lambda_m =
    /// (2/h^2)(1 - cos(m pi h / L)).
    fn laplacian(n: usize, h: f64) -> SymTridiag {
        SymTridiag {
            diag: vec![-2.0 / (h * h); n],
            off: vec![1.0 / (h * h); n - 1],
        }
    }

    #[test]
    fn sturm_count_matches_analytic_laplacian() {
        let n = 200;
        let h = 1.0 / (n as f64 + 1.0);
        let t = laplacian(n, h);
        let analytic: Vec<f64> = (1..=n)
            .map(|m| -2.0 / (h * h) * (1.0 - (m as f64 * std::f64::consts::PI * h).cos()))
            .collect();
        let x = analytic[5] + 1e-9;
        // Eigenvalues here are negative and decreasing with m; count strictly
        // below x counts the larger-m tail.
        let expect = analytic.iter().filter(|&&l| l < x).count();
        assert_eq!(t.count_below(x), expect);
    }

    #[test]
    fn top_eigenvalues_match_analytic() {
        let n = 500;
        let h = 1.0 / (n as f64 + 1.0);
        let t = laplacian(n, h);
        let analytic: Vec<f64> = (1..=3)
            .map(|m| -2.0 / (h * h) * (1.0 - (m as f64 * std::f64::consts::PI * h).cos()))
            .collect();
        let got = t.eigenvalues_in(analytic[2] - 1.0, 0.0, 3);
        assert_eq!(got.len(), 3);
        for (g, a) in got.iter().zip(&analytic) {
            assert!((g - a).abs() < 1e-8 * a.abs(), "got {g}, want {a}");
        }
    }

    #[test]
    fn eigenvector_residual_is_tiny() {
        let n = 300;
        let h = 1.0 / (n as f64 + 1.0);
        let t = laplacian(n, h);
        let lam_top = -2.0 / (h * h) * (1.0 - (std::f64::consts::PI * h).cos());
        let eigs = t.eigenvalues_in(lam_top - 100.0, 0.0, 1);
        let (lam, v) = t.eigenvector(eigs[0]);
        let mut av = vec![0.0; n];
        t.mul(&v, &mut av);
        let res: f64 = av
            .iter()
            .zip(&v)
            .map(|(a, x)| (a - lam * x) * (a - lam * x))
            .sum::<f64>()
            .sqrt();
        assert!(res < 1e-10 * lam.abs(), "residual {res}");
    }

    #[test]
    fn empty_interval_yields_nothing() {
        let t = laplacian(50, 0.02);
        assert!(t.eigenvalues_in(10.0, 20.0, 5).is_empty());
    }
}
