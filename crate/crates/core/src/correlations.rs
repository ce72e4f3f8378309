//! Separability and quantum discord of the two-qubit pre-measurement state.

use crate::error::{check_lambda, check_mixed_r, Error, Result};
use crate::linop::{gate, hermitian_eig, partial_transpose, tensor, Gate, Operator, C64};

/// Default tolerance on the smallest partial-transpose eigenvalue.
pub const PPT_TOL: f64 = 1e-10;
/// Bell-diagonal validity guard on the four eigenvalue combinations.
pub const LAMBDA_CLAMP_TOL: f64 = 1e-10;
/// Largest tolerated Pauli coefficient outside the `sigma_j (x) sigma_j`
/// diagonal after [`bell_diagonalize`].
pub const X_STATE_TOL: f64 = 1e-10;

/// Two-qubit post-channel state in the basis `|00>, |01>, |10>, |11>`:
/// diagonal `((1+r^2), (1-r^2), (1-r^2), (1+r^2)) / 4` and corners
/// `+- i r mu / 2` with `mu = (1 - 2 lambda)^m`.
pub fn rho_final_two_qubit(r: f64, lambda: f64, m: usize) -> Result<Operator> {
    check_mixed_r(r)?;
    check_lambda(lambda)?;
    crate::qfi::check_invocations(m)?;
    let mu = crate::channels::dephasing_factor(lambda, m);
    let (hi, lo) = ((1.0 + r * r) / 4.0, (1.0 - r * r) / 4.0);
    let corner = C64::new(0.0, r * mu / 2.0);
    let z = C64::new(0.0, 0.0);
    let re = |x: f64| C64::new(x, 0.0);
    Operator::from_rows(
        4,
        &[
            re(hi),
            z,
            z,
            corner, //
            z,
            re(lo),
            z,
            z, //
            z,
            z,
            re(lo),
            z, //
            -corner,
            z,
            z,
            re(hi),
        ],
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PptVerdict {
    pub separable: bool,
    pub min_eigenvalue: f64,
}

/// Peres-Horodecki test on a two-qubit state.
pub fn is_separable_ppt(rho: &Operator, tol: f64) -> Result<PptVerdict> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    let pt = partial_transpose(rho, &[1])?;
    let min_eigenvalue = hermitian_eig(&pt)?.eigenvalues[0];
    Ok(PptVerdict {
        separable: min_eigenvalue >= -tol,
        min_eigenvalue,
    })
}

/// Largest polarization for which the post-channel state stays separable:
/// `sqrt(mu^2 + 1) - |mu|`.
pub fn separability_threshold(m: usize, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    crate::qfi::check_invocations(m)?;
    let mu = crate::channels::dephasing_factor(lambda, m);
    Ok((mu * mu + 1.0).sqrt() - mu.abs())
}

/// Coefficients of `(I + sum_j c_j sigma_j (x) sigma_j) / 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellDiagonalCoeffs {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl BellDiagonalCoeffs {
    /// `1 - c1 - c2 - c3`, `1 - c1 + c2 + c3`, `1 + c1 - c2 + c3`,
    /// `1 + c1 + c2 - c3`.
    pub fn lambdas(&self) -> [f64; 4] {
        let (a, b, c) = (self.c1, self.c2, self.c3);
        [
            1.0 - a - b - c,
            1.0 - a + b + c,
            1.0 + a - b + c,
            1.0 + a + b - c,
        ]
    }

    pub fn to_operator(&self) -> Operator {
        let paulis = [Gate::PauliX, Gate::PauliY, Gate::PauliZ].map(|g| gate(g).expect("Pauli"));
        let mut acc = Operator::identity(4).expect("dim 4");
        for (p, c) in paulis.iter().zip([self.c1, self.c2, self.c3]) {
            acc = acc.add(&tensor(&[p.clone(), p.clone()]).expect("dim 4").scale_re(c));
        }
        acc.scale_re(0.25)
    }
}

/// Local unitary `[[0, e^{i pi/8}], [e^{-i pi/8}, 0]]` applied to both qubits.
pub fn bell_rotation() -> Operator {
    let ph = C64::from_polar(1.0, std::f64::consts::PI / 8.0);
    let z = C64::new(0.0, 0.0);
    let u = Operator::from_rows(2, &[z, ph, ph.conj(), z]).expect("dim 2");
    tensor(&[u.clone(), u]).expect("dim 4")
}

/// Rotates a state of the post-channel family into Bell-diagonal form and
/// reads off `c_j = Tr[rho sigma_j (x) sigma_j]`. Every other Pauli
/// coefficient must vanish.
pub fn bell_diagonalize(rho: &Operator) -> Result<BellDiagonalCoeffs> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    let rotated = rho.conjugate_by(&bell_rotation());
    let mut paulis = vec![Operator::identity(2)?];
    for g in [Gate::PauliX, Gate::PauliY, Gate::PauliZ] {
        paulis.push(gate(g)?);
    }
    let mut diag = [0.0; 3];
    let mut residual: f64 = 0.0;
    for (a, pa) in paulis.iter().enumerate() {
        for (b, pb) in paulis.iter().enumerate() {
            if a == 0 && b == 0 {
                continue;
            }
            let coeff = rotated.mul(&tensor(&[pa.clone(), pb.clone()])?).trace();
            if a == b {
                diag[a - 1] = coeff.re;
                residual = residual.max(coeff.im.abs());
            } else {
                residual = residual.max(coeff.norm());
            }
        }
    }
    if residual > X_STATE_TOL {
        return Err(Error::NotXState { residual });
    }
    Ok(BellDiagonalCoeffs {
        c1: diag[0],
        c2: diag[1],
        c3: diag[2],
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscordReport {
    /// Discord in bits.
    pub q: f64,
    /// `max |c_j|`.
    pub c: f64,
    pub lambdas: [f64; 4],
}

/// `x log2 x` with `0 log 0 = 0`.
fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

fn discord_from(lambdas: [f64; 4], c: f64) -> DiscordReport {
    let q = 0.25 * lambdas.iter().map(|&l| xlog2x(l)).sum::<f64>()
        - 0.5 * xlog2x(1.0 - c)
        - 0.5 * xlog2x(1.0 + c);
    DiscordReport { q, c, lambdas }
}

/// Closed-form discord of a Bell-diagonal state.
pub fn discord_xstate(coeffs: &BellDiagonalCoeffs) -> Result<DiscordReport> {
    let mut lambdas = coeffs.lambdas();
    for l in lambdas.iter_mut() {
        if *l < -LAMBDA_CLAMP_TOL {
            return Err(Error::Invalid(format!(
                "Bell-diagonal coefficients {coeffs:?} do not describe a state"
            )));
        }
        *l = l.max(0.0);
    }
    let c = coeffs.c1.abs().max(coeffs.c2.abs()).max(coeffs.c3.abs());
    Ok(discord_from(lambdas, c))
}

/// Discord of the two-qubit post-channel state from its closed-form
/// eigenvalue combinations; depends on `mu` only through `|mu|`.
pub fn discord_protocol(r: f64, lambda: f64, m: usize) -> Result<DiscordReport> {
    check_mixed_r(r)?;
    check_lambda(lambda)?;
    crate::qfi::check_invocations(m)?;
    discord_rmu(r, crate::channels::dephasing_factor(lambda, m))
}

/// Closed-form discord as a function of polarization and coherence factor
/// `mu in [-1, 1]`.
pub fn discord_rmu(r: f64, mu: f64) -> Result<DiscordReport> {
    check_mixed_r(r)?;
    crate::error::check_range("mu", mu, -1.0, 1.0, "-1 <= mu <= 1")?;
    let mu = mu.abs();
    let r2 = r * r;
    let lambdas = [
        1.0 - r2,
        1.0 + 2.0 * r * mu + r2,
        (1.0 - 2.0 * r * mu + r2).max(0.0),
        1.0 - r2,
    ];
    Ok(discord_from(lambdas, r2.max(r * mu)))
}

/// Discord before the channel: `(1+r)/2 log2(1+r) + (1-r)/2 log2(1-r)`.
pub fn discord_prep(r: f64) -> Result<f64> {
    crate::error::check_range("r", r, 0.0, 1.0, "0 <= r <= 1")?;
    Ok(0.5 * xlog2x(1.0 + r) + 0.5 * xlog2x(1.0 - r))
}
