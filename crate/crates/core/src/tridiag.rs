//! Tridiagonal matrices and the Thomas algorithm.

/// Square tridiagonal matrix. `lower[i]` is entry `(i, i-1)` and `upper[i]`
/// is entry `(i, i+1)`; `lower[0]` and `upper[n-1]` are unused.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveError {
    ZeroPivot(usize),
    NonFinite,
}

impl std::fmt::Display for SolveError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolveError::ZeroPivot(i) => write!(f, "zero pivot in row {i}"),
            SolveError::NonFinite => write!(f, "non-finite entry in solution"),
        }
    }
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// `xᵀ A x`
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// `self + scale * other`, in place.
    pub fn add_scaled(&mut self, scale: f64, other: &Tridiagonal) {
        for (a, b) in self.lower.iter_mut().zip(&other.lower) {
            *a += scale * b;
        }
        for (a, b) in self.diag.iter_mut().zip(&other.diag) {
            *a += scale * b;
        }
        for (a, b) in self.upper.iter_mut().zip(&other.upper) {
            *a += scale * b;
        }
    }

    pub fn add_diagonal(&mut self, scale: f64, d: &[f64]) {
        for (a, b) in self.diag.iter_mut().zip(d) {
            *a += scale * b;
        }
    }

    /// Replaces row `i` by the identity row.
    pub fn pin_row(&mut self, i: usize) {
        self.lower[i] = 0.0;
        self.upper[i] = 0.0;
        self.diag[i] = 1.0;
    }

    /// Solves `A x = rhs` by forward elimination and back substitution
    /// without pivoting.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, SolveError> {
        let n = self.len();
        assert_eq!(rhs.len(), n);
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut pivot = self.diag[0];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(SolveError::ZeroPivot(0));
        }
        c[0] = self.upper[0] / pivot;
        d[0] = rhs[0] / pivot;
        for i in 1..n {
            pivot = self.diag[i] - self.lower[i] * c[i - 1];
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(SolveError::ZeroPivot(i));
            }
            c[i] = if i + 1 < n { self.upper[i] / pivot } else { 0.0 };
            d[i] = (rhs[i] - self.lower[i] * d[i - 1]) / pivot;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        if d.iter().any(|x| !x.is_finite()) {
            return Err(SolveError::NonFinite);
        }
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn solves_poisson_matrix() {
        let n = 9;
        let mut a = Tridiagonal::zeros(n);
        for i in 0..n {
            a.diag[i] = 2.0;
            a.lower[i] = -1.0;
            a.upper[i] = -1.0;
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let b = a.matvec(&x);
        let y = a.solve(&b).unwrap();
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_pivot_reported() {
        let a = Tridiagonal::zeros(3);
        assert_eq!(a.solve(&[1.0, 1.0, 1.0]), Err(SolveError::ZeroPivot(0)));
    }

    proptest! {
        #[test]
        fn diagonally_dominant_round_trip(
            off in proptest::collection::vec(-1.0f64..1.0, 24),
            x in proptest::collection::vec(-10.0f64..10.0, 12),
        ) {
            let n = 12;
            let mut a = Tridiagonal::zeros(n);
            for i in 0..n {
                a.lower[i] = off[i];
                a.upper[i] = off[n + i];
                a.diag[i] = 2.5 + off[i].abs();
            }
            let b = a.matvec(&x);
            let y = a.solve(&b).unwrap();
            for (p, q) in x.iter().zip(&y) {
                prop_assert!((p - q).abs() < 1e-10);
            }
        }
    }
}
