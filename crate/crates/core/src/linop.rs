//! Dense complex operators on `n`-qubit spaces.
//!
//! Qubits are numbered from 1 and the ordering is little-endian: qubit `k`
//! is bit `k - 1` of a computational-basis index. In a tensor product the
//! rightmost factor therefore acts on qubit 1. Composition follows circuit
//! order read right to left, so `b.mul(&a)` applies `a` first.

use faer::Side;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest supported qubit count for dense storage.
pub const MAX_DENSE_QUBITS: usize = 12;
/// Largest supported dense dimension.
pub const MAX_DENSE_DIM: usize = 1 << MAX_DENSE_QUBITS;
/// Hermiticity tolerance applied before eigendecomposition.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Eigenvalues below this are treated as zero when detecting supports.
pub const ZERO_EIGENVALUE: f64 = 1e-12;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

pub(crate) fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// A square complex matrix whose dimension is a power of two.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    m: DMatrix<C64>,
}

impl Operator {
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        check_dim(m.nrows())?;
        Ok(Self { m })
    }

    /// Builds from row-major entries.
    pub fn from_rows(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Self::from_matrix(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_real_rows(dim: usize, entries: &[f64]) -> Result<Self> {
        let c: Vec<C64> = entries.iter().map(|&x| re(x)).collect();
        Self::from_rows(dim, &c)
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            m: DMatrix::from_fn(dim, dim, f),
        })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            m: DMatrix::zeros(dim, dim),
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            m: DMatrix::identity(dim, dim),
        })
    }

    /// `|psi><psi|` for a state vector.
    pub fn projector(psi: &DVector<C64>) -> Result<Self> {
        Self::from_matrix(psi * psi.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn num_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.m[(row, col)]
    }

    pub fn dagger(&self) -> Self {
        Self {
            m: self.m.adjoint(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            m: self.m.transpose(),
        }
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        Self {
            m: &self.m * &rhs.m,
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self {
            m: &self.m + &rhs.m,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self {
            m: &self.m - &rhs.m,
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { m: &self.m * s }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(re(s))
    }

    /// `U A U^dagger`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        Self {
            m: &u.m * &self.m * u.m.adjoint(),
        }
    }

    pub fn apply(&self, psi: &DVector<C64>) -> DVector<C64> {
        &self.m * psi
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "operator dimensions differ");
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim();
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// `max |U U^dagger - I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let prod = &self.m * self.m.adjoint();
        let id = DMatrix::<C64>::identity(self.dim(), self.dim());
        prod.iter()
            .zip(id.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Checks the density-operator conditions: Hermitian, unit trace and
    /// eigenvalues no lower than `-tol`.
    pub fn validate_density(&self, tol: f64) -> Result<()> {
        let dev = self.hermiticity_deviation();
        if dev > tol {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let tr = self.trace();
        if (tr - ONE).norm() > tol {
            return Err(Error::Invalid(format!("trace {tr} differs from 1")));
        }
        let spec = hermitian_eig(self)?;
        if let Some(&min) = spec.eigenvalues.first() {
            if min < -tol {
                return Err(Error::Invalid(format!("negative eigenvalue {min:e}")));
            }
        }
        Ok(())
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    if dim > MAX_DENSE_DIM {
        return Err(Error::DimensionCap {
            dim,
            cap: MAX_DENSE_DIM,
        });
    }
    Ok(())
}

fn check_qubits(indices: &[usize], n_qubits: usize) -> Result<()> {
    if indices.is_empty() {
        return Err(Error::EmptyQubitSet);
    }
    for (k, &q) in indices.iter().enumerate() {
        if q == 0 || q > n_qubits {
            return Err(Error::QubitOutOfRange { index: q, n_qubits });
        }
        if indices[..k].contains(&q) {
            return Err(Error::DuplicateQubit(q));
        }
    }
    Ok(())
}

fn qubit_mask(indices: &[usize]) -> usize {
    indices.iter().fold(0, |acc, &q| acc | (1 << (q - 1)))
}

/// Computational basis vector `|index>` in dimension `dim`.
pub fn basis_ket(dim: usize, index: usize) -> DVector<C64> {
    let mut v = DVector::from_element(dim, ZERO);
    v[index] = ONE;
    v
}

/// Kronecker product `f_0 (x) f_1 (x) ...`; the last factor acts on qubit 1.
pub fn tensor(factors: &[Operator]) -> Result<Operator> {
    let (first, rest) = factors.split_first().ok_or(Error::EmptyFactors)?;
    let dim: usize = factors.iter().map(Operator::dim).product();
    check_dim(dim)?;
    let m = rest
        .iter()
        .fold(first.m.clone(), |acc, f| acc.kronecker(&f.m));
    Ok(Operator { m })
}

/// Traces out every qubit not listed in `keep`. Kept qubits retain their
/// relative order.
pub fn partial_trace(a: &Operator, keep: &[usize]) -> Result<Operator> {
    let n = a.num_qubits();
    check_qubits(keep, n)?;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    let keep_mask = qubit_mask(&kept);
    let sub = |x: usize| -> usize {
        kept.iter()
            .enumerate()
            .fold(0, |acc, (pos, &q)| acc | (((x >> (q - 1)) & 1) << pos))
    };
    let dim_out = 1 << kept.len();
    let mut out = DMatrix::from_element(dim_out, dim_out, ZERO);
    let dim = a.dim();
    for i in 0..dim {
        for j in 0..dim {
            if (i & !keep_mask) == (j & !keep_mask) {
                out[(sub(i), sub(j))] += a.m[(i, j)];
            }
        }
    }
    Operator::from_matrix(out)
}

/// Transposes the indices belonging to `subsystem`, leaving the rest alone.
pub fn partial_transpose(a: &Operator, subsystem: &[usize]) -> Result<Operator> {
    let n = a.num_qubits();
    check_qubits(subsystem, n)?;
    let mask = qubit_mask(subsystem);
    let dim = a.dim();
    let mut out = DMatrix::from_element(dim, dim, ZERO);
    for i in 0..dim {
        for j in 0..dim {
            let i2 = (i & !mask) | (j & mask);
            let j2 = (j & !mask) | (i & mask);
            out[(i2, j2)] = a.m[(i, j)];
        }
    }
    Ok(Operator { m: out })
}

/// Lifts `op`, acting on `targets` (first target = most significant qubit of
/// `op`), to the full `n_qubits` space.
pub fn embed(op: &Operator, targets: &[usize], n_qubits: usize) -> Result<Operator> {
    check_qubits(targets, n_qubits)?;
    if op.dim() != 1 << targets.len() {
        return Err(Error::DimensionMismatch {
            expected: 1 << targets.len(),
            found: op.dim(),
        });
    }
    let mask = qubit_mask(targets);
    let k = targets.len();
    let local = |x: usize| -> usize {
        targets.iter().enumerate().fold(0, |acc, (t, &q)| {
            acc | (((x >> (q - 1)) & 1) << (k - 1 - t))
        })
    };
    Operator::from_fn(1 << n_qubits, |i, j| {
        if (i & !mask) == (j & !mask) {
            op.m[(local(i), local(j))]
        } else {
            ZERO
        }
    })
}

/// Eigendecomposition of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector for `eigenvalues[k]`.
    pub eigenvectors: DMatrix<C64>,
}

impl Spectrum {
    /// `V diag(w) V^dagger`.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, &w) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(k).scale_mut(w);
        }
        scaled * v.adjoint()
    }
}

pub fn hermitian_eig(a: &Operator) -> Result<Spectrum> {
    let dev = a.hermiticity_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let n = a.dim();
    let sym = faer::Mat::<C64>::from_fn(n, n, |i, j| (a.m[(i, j)] + a.m[(j, i)].conj()) * 0.5);
    let eig = sym
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Invalid(format!("eigensolver did not converge: {e:?}")))?;
    let (w, v) = (eig.S(), eig.U());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| w[x].re.total_cmp(&w[y].re));
    let eigenvalues = order.iter().map(|&k| w[k].re).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Gate builders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    PauliX,
    PauliY,
    PauliZ,
    Hadamard,
    /// Two-qubit controlled-Z, symmetric in its qubits.
    ControlledZ,
    Swap,
    /// Coin-toss rotation `[[sqrt(l), -sqrt(1-l)], [sqrt(1-l), sqrt(l)]]`.
    CoinToss(f64),
}

pub fn gate(kind: Gate) -> Result<Operator> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match kind {
        Gate::PauliX => Operator::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]),
        Gate::PauliY => Operator::from_rows(2, &[ZERO, -I, I, ZERO]),
        Gate::PauliZ => Operator::from_real_rows(2, &[1.0, 0.0, 0.0, -1.0]),
        Gate::Hadamard => Operator::from_real_rows(2, &[h, h, h, -h]),
        Gate::ControlledZ => Operator::from_fn(4, |i, j| match (i, j) {
            (3, 3) => -ONE,
            (i, j) if i == j => ONE,
            _ => ZERO,
        }),
        Gate::Swap => Operator::from_fn(4, |i, j| {
            let swapped = ((i & 1) << 1) | (i >> 1);
            if swapped == j {
                ONE
            } else {
                ZERO
            }
        }),
        Gate::CoinToss(lambda) => {
            crate::error::check_lambda(lambda)?;
            let a = lambda.sqrt();
            let b = (1.0 - lambda).sqrt();
            Operator::from_real_rows(2, &[a, -b, b, a])
        }
    }
}

/// Single-qubit Bloch vector `(r_x, r_y, r_z)` with norm at most 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Self { x, y, z };
        let r = v.norm();
        if !r.is_finite() || r > 1.0 + 1e-12 {
            return Err(Error::Parameter {
                name: "|r|",
                value: r,
                constraint: "|r| <= 1",
            });
        }
        Ok(v)
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}
