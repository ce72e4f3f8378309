//! Symmetric logarithmic derivatives and quantum Fisher information.
//!
//! Three routes are provided and cross-checked in the tests:
//!
//! * [`sld_2x2`]: closed form for operators on a two-dimensional space,
//!   needing no eigendecomposition;
//! * [`sld_block_sum`]: additivity over blocks with mutually orthogonal
//!   supports;
//! * [`sld_eig`]: the general eigenbasis formula, used as the brute-force
//!   oracle.

use crate::channels::{dephasing_factor_derivative, BlockPair};
use crate::error::{check_lambda, check_range, Error, Result};
use crate::linop::{hermitian_eig, Operator, HERMITIAN_TOL, I, ZERO, ZERO_EIGENVALUE};

/// Relative threshold on `alpha / (Tr A)^2` that selects the pure branch of
/// the 2x2 formula.
pub const ALPHA_BRANCH_TOL: f64 = 1e-12;
/// Default support cutoff on eigenvalue sums in [`sld_eig`].
pub const DEFAULT_SUPPORT_TOL: f64 = ZERO_EIGENVALUE;

/// An SLD together with the Fisher information it produces.
#[derive(Debug, Clone, PartialEq)]
pub struct SldResult {
    pub sld: Operator,
    pub qfi: f64,
}

impl SldResult {
    /// `max |drho - (L rho + rho L)/2|`.
    pub fn residual(&self, rho: &Operator, drho: &Operator) -> f64 {
        let anti = self.sld.mul(rho).add(&rho.mul(&self.sld)).scale_re(0.5);
        drho.max_abs_diff(&anti)
    }
}

/// SLD of an operator `a` on a two-dimensional space with derivative `da`.
///
/// With `alpha = Tr(A^2) - (Tr A)^2`, the pure branch (`alpha = 0`) uses
/// `L = (2 dA - dln(Tr A) A) / Tr A`; otherwise
/// `L = (2 dA - dln(alpha) A) / Tr A + d(ln alpha - ln Tr A) I`.
pub fn sld_2x2(a: &Operator, da: &Operator) -> Result<SldResult> {
    for op in [a, da] {
        if op.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: op.dim(),
            });
        }
    }
    let tr = a.trace().re;
    if tr.abs() <= 1e-12 {
        return Err(Error::ZeroTrace(tr));
    }
    let dtr = da.trace().re;
    let alpha = a.mul(a).trace().re - tr * tr;
    let dlog_tr = dtr / tr;
    let sld = if alpha.abs() < ALPHA_BRANCH_TOL * tr * tr {
        da.scale_re(2.0)
            .sub(&a.scale_re(dlog_tr))
            .scale_re(1.0 / tr)
    } else {
        let dalpha = 2.0 * a.mul(da).trace().re - 2.0 * tr * dtr;
        let dlog_alpha = dalpha / alpha;
        let id = Operator::identity(2)?;
        da.scale_re(2.0)
            .sub(&a.scale_re(dlog_alpha))
            .scale_re(1.0 / tr)
            .add(&id.scale_re(dlog_alpha - dlog_tr))
    };
    let qfi = da.mul(&sld).trace().re;
    Ok(SldResult { sld, qfi })
}

/// Sums SLDs of blocks with mutually orthogonal supports, each already
/// embedded in the full space.
pub fn sld_block_sum(parts: &[SldResult]) -> Result<SldResult> {
    let (first, rest) = parts
        .split_first()
        .ok_or_else(|| Error::Invalid("no blocks to sum".into()))?;
    let mut sld = first.sld.clone();
    let mut qfi = first.qfi;
    for p in rest {
        if p.sld.dim() != sld.dim() {
            return Err(Error::DimensionMismatch {
                expected: sld.dim(),
                found: p.sld.dim(),
            });
        }
        sld = sld.add(&p.sld);
        qfi += p.qfi;
    }
    Ok(SldResult { sld, qfi })
}

/// Places a 2x2 operator, written in the ordered basis `(|b0>, |b1>)`, into
/// a `dim`-dimensional space.
pub fn embed_block(local: &Operator, basis: [usize; 2], dim: usize) -> Result<Operator> {
    if local.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: local.dim(),
        });
    }
    let mut out = Operator::zeros(dim)?.into_matrix();
    for (a, &ia) in basis.iter().enumerate() {
        for (b, &ib) in basis.iter().enumerate() {
            out[(ia, ib)] = local.get(a, b);
        }
    }
    Operator::from_matrix(out)
}

/// Local derivative of a post-channel block in the basis `(|x>, |N-x>)`.
fn block_derivative(block: &BlockPair, lambda: f64, m: usize) -> Operator {
    let d = dephasing_factor_derivative(lambda, m) * block.offdiag_weight;
    Operator::from_rows(2, &[ZERO, I * d, -I * d, ZERO]).expect("2x2 is a valid dimension")
}

/// Quantum Fisher information of post-channel blocks by applying the 2x2
/// formula to every block and adding. Works without dense storage.
pub fn block_qfi_sum(blocks: &[BlockPair], lambda: f64, m: usize) -> Result<f64> {
    blocks.iter().try_fold(0.0, |acc, b| {
        let h = sld_2x2(&b.local_operator(), &block_derivative(b, lambda, m))?.qfi;
        Ok(acc + h)
    })
}

/// Full SLD of the post-channel state assembled block by block.
pub fn block_route_sld(blocks: &[BlockPair], lambda: f64, m: usize) -> Result<SldResult> {
    let n = blocks
        .first()
        .ok_or_else(|| Error::Invalid("no blocks".into()))?
        .n_qubits();
    let dim = 1usize << n;
    let parts = blocks
        .iter()
        .map(|b| {
            let local = sld_2x2(&b.local_operator(), &block_derivative(b, lambda, m))?;
            let basis = [b.x as usize, b.partner as usize];
            Ok(SldResult {
                sld: embed_block(&local.sld, basis, dim)?,
                qfi: local.qfi,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    sld_block_sum(&parts)
}

/// General SLD from the eigendecomposition of `rho`:
/// `L_ij = 2 <i|drho|j> / (p_i + p_j)` and
/// `H = sum 2 |<i|drho|j>|^2 / (p_i + p_j)` over pairs with `p_i + p_j > tol`.
pub fn sld_eig(rho: &Operator, drho: &Operator, tol: f64) -> Result<SldResult> {
    if rho.dim() != drho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: drho.dim(),
        });
    }
    let dev = drho.hermiticity_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let spec = hermitian_eig(rho)?;
    let v = &spec.eigenvectors;
    let p = &spec.eigenvalues;
    let d = v.adjoint() * drho.matrix() * v;
    let dim = rho.dim();
    let coupling_limit = tol.sqrt();
    let mut local = Operator::zeros(dim)?.into_matrix();
    let mut qfi = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let s = p[i] + p[j];
            let dij = d[(i, j)];
            if s > tol {
                local[(i, j)] = dij * (2.0 / s);
                qfi += 2.0 * dij.norm_sqr() / s;
            } else if dij.norm() > coupling_limit {
                return Err(Error::IllDefinedQfi {
                    coupling: dij.norm(),
                });
            }
        }
    }
    let sld = Operator::from_matrix(v * local * v.adjoint())?;
    Ok(SldResult { sld, qfi })
}

/// Single-qubit, single-use QFI for Bloch vector `v` under z dephasing:
/// `4 (1 - rz^2)(r^2 - rz^2) / [(1-2l)^2 (1 - r^2) + 4 l (1-l)(1 - rz^2)]`.
pub fn qfi_single_use(v: crate::linop::BlochVector, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let r2 = v.norm().powi(2).min(1.0);
    let rz2 = v.z * v.z;
    if is_pure_corner(r2, lambda) {
        return Err(Error::PureStateCorner);
    }
    let num = 4.0 * (1.0 - rz2) * (r2 - rz2);
    if num <= 0.0 {
        return Ok(0.0);
    }
    let den =
        (1.0 - 2.0 * lambda).powi(2) * (1.0 - r2) + 4.0 * lambda * (1.0 - lambda) * (1.0 - rz2);
    Ok(num / den)
}

/// Optimal independent-protocol QFI `4 r^2 m / (1 - (1-2l)^2 r^2)`.
pub fn qfi_independent_opt(r: f64, lambda: f64, m: usize) -> Result<f64> {
    check_range("r", r, 0.0, 1.0, "0 <= r <= 1")?;
    check_lambda(lambda)?;
    check_invocations(m)?;
    if is_pure_corner(r * r, lambda) {
        return Err(Error::PureStateCorner);
    }
    let mu2 = (1.0 - 2.0 * lambda).powi(2);
    Ok(4.0 * r * r * m as f64 / (1.0 - mu2 * r * r))
}

/// The channel-extension bound `m / (lambda (1 - lambda))`.
pub fn qfi_upper_bound(lambda: f64, m: usize) -> Result<f64> {
    check_lambda(lambda)?;
    check_invocations(m)?;
    if lambda == 0.0 || lambda == 1.0 {
        return Err(Error::InfiniteBound(lambda));
    }
    Ok(m as f64 / (lambda * (1.0 - lambda)))
}

fn is_pure_corner(r2: f64, lambda: f64) -> bool {
    r2 >= 1.0 && (lambda == 0.0 || lambda == 1.0)
}

pub(crate) fn check_invocations(m: usize) -> Result<()> {
    if m == 0 {
        Err(Error::Parameter {
            name: "m",
            value: 0.0,
            constraint: "m >= 1",
        })
    } else {
        Ok(())
    }
}

/// `d rho / d lambda` for one z-dephasing use on a single qubit.
pub fn single_qubit_channel_derivative(rho: &Operator) -> Operator {
    let z = crate::linop::gate(crate::linop::Gate::PauliZ).expect("Pauli Z");
    rho.conjugate_by(&z).sub(rho)
}
