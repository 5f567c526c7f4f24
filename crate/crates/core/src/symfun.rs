//! Schur functions from power sums, from matrices and from hook-content forms.
//!
//! Every matrix-valued Schur evaluation goes through power sums
//! `p_m = Tr(Y^m)`: Newton's identities give the complete homogeneous
//! functions `h_k`, and the Jacobi–Trudi determinant `det(h_{λ_i - i + j})`
//! gives `s_λ`. The hook-content closed forms run in whatever scalar type the
//! caller picks; with [`crate::Rational`] they are exact and serve as the
//! reference for the floating path.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{determinant, power_traces};
use crate::partitions::Partition;
use crate::scalar::Scalar;

/// A truncated power-sum sequence `(p_1, …, p_D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSums<T> {
    values: Vec<T>,
}

impl<T: Scalar> PowerSums<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("power sums need degree at least 1".into()));
        }
        Ok(PowerSums { values })
    }

    pub fn degree(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `p_m`, 1-based; zero beyond the truncation.
    pub fn get(&self, m: usize) -> T {
        assert!(m >= 1, "power sums are 1-based");
        self.values.get(m - 1).cloned().unwrap_or_else(T::zero)
    }

    /// The constant point `p(u) = (u, u, …)`.
    pub fn constant(u: T, degree: usize) -> Self {
        PowerSums { values: vec![u; degree.max(1)] }
    }

    /// `p_∞ = (1, 0, 0, …)`.
    pub fn p_infinity(degree: usize) -> Self {
        Self::p1_only(T::one(), degree)
    }

    /// `(c, 0, 0, …)`.
    pub fn p1_only(c: T, degree: usize) -> Self {
        let mut values = vec![T::zero(); degree.max(1)];
        values[0] = c;
        PowerSums { values }
    }

    pub fn zero(degree: usize) -> Self {
        PowerSums { values: vec![T::zero(); degree.max(1)] }
    }

    /// Truncates or zero-pads to `degree`.
    pub fn with_degree(&self, degree: usize) -> Self {
        let values = (1..=degree.max(1)).map(|m| self.get(m)).collect();
        PowerSums { values }
    }

    /// `Some(c)` when only `p_1` is (possibly) nonzero.
    pub fn as_p1_only(&self) -> Option<T> {
        if self.values[1..].iter().all(|v| v.is_zero()) {
            Some(self.values[0].clone())
        } else {
            None
        }
    }
}

pub fn scale_power_sums<T: Scalar>(p: &PowerSums<T>, c: &T) -> PowerSums<T> {
    PowerSums { values: p.values.iter().map(|v| v.clone() * c.clone()).collect() }
}

/// Componentwise product `p_m q_m`: the power sums of a tensor-product point.
pub fn multiply_power_sums<T: Scalar>(p: &PowerSums<T>, q: &PowerSums<T>) -> PowerSums<T> {
    let d = p.degree().min(q.degree());
    PowerSums { values: (1..=d).map(|m| p.get(m) * q.get(m)).collect() }
}

/// An `N × N` matrix argument, given explicitly, by its eigenvalues, or both.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMatrix<T: Scalar> {
    dim: usize,
    explicit: Option<DMatrix<T>>,
    eigenvalues: Option<Vec<T>>,
}

impl<T: Scalar> SpectralMatrix<T> {
    pub fn from_matrix(m: DMatrix<T>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Shape(format!("{}x{} matrix is not square", m.nrows(), m.ncols())));
        }
        if m.nrows() == 0 {
            return Err(Error::Shape("empty matrix".into()));
        }
        Ok(SpectralMatrix { dim: m.nrows(), explicit: Some(m), eigenvalues: None })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        Self::from_matrix(crate::linalg::square_from_rows(rows)?)
    }

    pub fn from_eigenvalues(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Shape("empty eigenvalue list".into()));
        }
        Ok(SpectralMatrix { dim: values.len(), explicit: None, eigenvalues: Some(values) })
    }

    /// Both forms; their power traces must agree up to `degree`.
    pub fn with_both(m: DMatrix<T>, values: Vec<T>, degree: usize) -> Result<Self> {
        let explicit = Self::from_matrix(m)?;
        let listed = Self::from_eigenvalues(values)?;
        if explicit.dim != listed.dim {
            return Err(Error::Shape(format!(
                "matrix is {}x{} but {} eigenvalues were given",
                explicit.dim, explicit.dim, listed.dim
            )));
        }
        let a = explicit.power_traces(degree);
        let b = listed.power_traces(degree);
        for (m, (x, y)) in a.iter().zip(&b).enumerate() {
            let scale = 1.0 + x.magnitude().max(y.magnitude());
            if (x.clone() - y.clone()).magnitude() > 1e-9 * scale {
                return Err(Error::Shape(format!(
                    "Tr(Y^{}) disagrees between the matrix and its eigenvalue list",
                    m + 1
                )));
            }
        }
        Ok(SpectralMatrix { dim: explicit.dim, explicit: explicit.explicit, eigenvalues: listed.eigenvalues })
    }

    /// `I_N`.
    pub fn identity(n: usize) -> Self {
        SpectralMatrix { dim: n, explicit: None, eigenvalues: Some(vec![T::one(); n]) }
    }

    /// `I[p]`: `p` unit eigenvalues and `N - p` zeros.
    pub fn partial_identity(n: usize, units: usize) -> Result<Self> {
        if units > n {
            return Err(Error::Domain(format!("I[{units}] needs at most N = {n} units")));
        }
        let values = (0..n).map(|k| if k < units { T::one() } else { T::zero() }).collect();
        Ok(SpectralMatrix { dim: n, explicit: None, eigenvalues: Some(values) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn explicit(&self) -> Option<&DMatrix<T>> {
        self.explicit.as_ref()
    }

    pub fn eigenvalues(&self) -> Option<&[T]> {
        self.eigenvalues.as_deref()
    }

    fn power_traces(&self, degree: usize) -> Vec<T> {
        if let Some(values) = &self.eigenvalues {
            let mut powers = values.clone();
            let mut out = Vec::with_capacity(degree);
            for m in 1..=degree {
                if m > 1 {
                    for (pw, v) in powers.iter_mut().zip(values) {
                        *pw = pw.clone() * v.clone();
                    }
                }
                out.push(powers.iter().fold(T::zero(), |acc, x| acc + x.clone()));
            }
            out
        } else {
            power_traces(self.explicit.as_ref().expect("one form is always present"), degree)
        }
    }

    pub fn determinant(&self) -> T {
        match &self.eigenvalues {
            Some(v) => v.iter().fold(T::one(), |acc, x| acc * x.clone()),
            None => determinant(self.explicit.as_ref().expect("one form is always present")),
        }
    }
}

/// `p_m = Tr(Y^m)`, `m = 1..=degree`.
pub fn power_sums_of_matrix<T: Scalar>(y: &SpectralMatrix<T>, degree: usize) -> Result<PowerSums<T>> {
    if degree == 0 {
        return Err(Error::Domain("power sums need degree at least 1".into()));
    }
    PowerSums::new(y.power_traces(degree))
}

/// `h_0, …, h_D` from `p` by Newton's identities, `k h_k = Σ_{i≤k} p_i h_{k-i}`.
pub fn complete_homogeneous<T: Scalar>(p: &PowerSums<T>, degree: usize) -> Vec<T> {
    let mut h = Vec::with_capacity(degree + 1);
    h.push(T::one());
    for k in 1..=degree {
        let s = (1..=k).fold(T::zero(), |acc, i| acc + p.get(i) * h[k - i].clone());
        h.push(s / T::from_i64(k as i64));
    }
    h
}

/// `e_0, …, e_D` from `p`, `k e_k = Σ_{i≤k} (-1)^{i-1} p_i e_{k-i}`.
pub fn elementary<T: Scalar>(p: &PowerSums<T>, degree: usize) -> Vec<T> {
    let mut e = Vec::with_capacity(degree + 1);
    e.push(T::one());
    for k in 1..=degree {
        let s = (1..=k).fold(T::zero(), |acc, i| {
            let term = p.get(i) * e[k - i].clone();
            if i % 2 == 1 {
                acc + term
            } else {
                acc - term
            }
        });
        e.push(s / T::from_i64(k as i64));
    }
    e
}

/// Evaluates many Schur functions at one point, sharing the `h_k`.
#[derive(Debug, Clone)]
pub struct SchurEvaluator<T> {
    h: Vec<T>,
}

impl<T: Scalar> SchurEvaluator<T> {
    pub fn new(p: &PowerSums<T>) -> Self {
        SchurEvaluator { h: complete_homogeneous(p, p.degree()) }
    }

    pub fn degree(&self) -> usize {
        self.h.len() - 1
    }

    pub fn schur(&self, lambda: &Partition) -> Result<T> {
        let required = lambda.weight();
        if required > self.degree() {
            return Err(Error::Degree { required, available: self.degree() });
        }
        Ok(jacobi_trudi(lambda, &self.h))
    }
}

fn jacobi_trudi<T: Scalar>(lambda: &Partition, h: &[T]) -> T {
    let l = lambda.length();
    let entry = |i: usize, j: usize| -> T {
        let k = lambda.part(i) as i64 - i as i64 + j as i64;
        if k < 0 {
            T::zero()
        } else {
            h.get(k as usize).cloned().unwrap_or_else(T::zero)
        }
    };
    match l {
        0 => T::one(),
        1 => entry(0, 0),
        2 => entry(0, 0) * entry(1, 1) - entry(0, 1) * entry(1, 0),
        _ => determinant(&DMatrix::from_fn(l, l, entry)),
    }
}

/// `s_λ(p)` via Newton's identities and the Jacobi–Trudi determinant.
pub fn schur_from_power_sums<T: Scalar>(lambda: &Partition, p: &PowerSums<T>) -> Result<T> {
    let required = lambda.weight();
    if required > p.degree() {
        return Err(Error::Degree { required, available: p.degree() });
    }
    let h = complete_homogeneous(p, required);
    Ok(jacobi_trudi(lambda, &h))
}

/// `s_λ(Y)` for a matrix argument.
pub fn schur_of_matrix<T: Scalar>(lambda: &Partition, y: &SpectralMatrix<T>) -> Result<T> {
    let p = power_sums_of_matrix(y, lambda.weight().max(1))?;
    schur_from_power_sums(lambda, &p)
}

/// `s_λ(I_N) = Π (N + j - i) / h(i,j)`; zero when `ℓ(λ) > N`.
pub fn schur_identity<T: Scalar>(lambda: &Partition, n: usize) -> T {
    if lambda.length() > n {
        return T::zero();
    }
    let n = T::from_i64(n as i64);
    lambda
        .contents()
        .zip(lambda.hook_lengths())
        .fold(T::one(), |acc, (c, h)| {
            acc * (n.clone() + T::from_i64(c)) / T::from_i64(h as i64)
        })
}

/// `s_λ(p(u)) = s_λ(I_N) Π (u + j - i)/(N + j - i)`, zero when `ℓ(λ) > N`.
pub fn schur_content_value<T: Scalar>(lambda: &Partition, u: &T, n: usize) -> T {
    if lambda.length() > n {
        return T::zero();
    }
    let nn = T::from_i64(n as i64);
    lambda.contents().fold(schur_identity(lambda, n), |acc, c| {
        let c = T::from_i64(c);
        acc * (u.clone() + c.clone()) / (nn.clone() + c)
    })
}

/// `s_λ(p_∞) = Π 1/h(i,j)`.
pub fn schur_p_infinity<T: Scalar>(lambda: &Partition) -> T {
    lambda
        .hook_lengths()
        .into_iter()
        .fold(T::one(), |acc, h| acc / T::from_i64(h as i64))
}

/// Coefficients `c_0 = 1, c_1, …, c_N` of `det(z I - Y) = Σ (-1)^k e_k z^{N-k}`,
/// returned as `e_0..e_N`.
pub fn characteristic_coefficients<T: Scalar>(y: &SpectralMatrix<T>) -> Result<Vec<T>> {
    let p = power_sums_of_matrix(y, y.dim())?;
    Ok(elementary(&p, y.dim()))
}
