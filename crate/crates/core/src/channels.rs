//! Pauli-channel evolution, its coin-toss dilation, the preparatory unitary
//! and the two-dimensional block structure of the prepared state.

use nalgebra::DVector;

use crate::error::{check_lambda, check_mixed_r, Error, Result};
use crate::linop::{
    gate, tensor, BlochVector, Gate, Operator, C64, I, MAX_DENSE_QUBITS, ONE, ZERO,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn pauli(self) -> Operator {
        let g = match self {
            Axis::X => Gate::PauliX,
            Axis::Y => Gate::PauliY,
            Axis::Z => Gate::PauliZ,
        };
        gate(g).expect("Pauli gates are always constructible")
    }
}

/// A Pauli channel `(1 - lambda) rho + lambda s rho s` invoked `m` times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub axis: Axis,
    pub lambda: f64,
    pub m: usize,
}

impl ChannelSpec {
    pub fn new(axis: Axis, lambda: f64, m: usize) -> Result<Self> {
        check_lambda(lambda)?;
        if m == 0 {
            return Err(Error::Parameter {
                name: "m",
                value: 0.0,
                constraint: "m >= 1",
            });
        }
        Ok(Self { axis, lambda, m })
    }

    pub fn dephasing(lambda: f64, m: usize) -> Result<Self> {
        Self::new(Axis::Z, lambda, m)
    }
}

/// `(I + r . sigma) / 2`.
pub fn bloch_state(v: BlochVector) -> Operator {
    let h = 0.5;
    Operator::from_rows(
        2,
        &[
            C64::new(h * (1.0 + v.z), 0.0),
            C64::new(h * v.x, -h * v.y),
            C64::new(h * v.x, h * v.y),
            C64::new(h * (1.0 - v.z), 0.0),
        ],
    )
    .expect("2x2 is a valid dimension")
}

/// Applies the channel once to each qubit in `targets`. The number of
/// targets must equal `spec.m`.
pub fn apply_pauli_channel(
    rho: &Operator,
    spec: &ChannelSpec,
    targets: &[usize],
) -> Result<Operator> {
    check_lambda(spec.lambda)?;
    if targets.len() != spec.m {
        return Err(Error::Invalid(format!(
            "{} targets listed for {} channel invocations",
            targets.len(),
            spec.m
        )));
    }
    let mut out = rho.clone();
    for (k, &q) in targets.iter().enumerate() {
        if targets[..k].contains(&q) {
            return Err(Error::DuplicateQubit(q));
        }
        let flipped = pauli_conjugate(&out, spec.axis, q)?;
        out = out
            .scale_re(1.0 - spec.lambda)
            .add(&flipped.scale_re(spec.lambda));
    }
    Ok(out)
}

/// `s_q rho s_q` for the Pauli `s` along `axis` on qubit `q`, computed as a
/// signed permutation of entries.
pub fn pauli_conjugate(rho: &Operator, axis: Axis, q: usize) -> Result<Operator> {
    let n = rho.num_qubits();
    if q == 0 || q > n {
        return Err(Error::QubitOutOfRange {
            index: q,
            n_qubits: n,
        });
    }
    let bit = 1usize << (q - 1);
    // s has one nonzero per row, s[i][flip(i)] = phase(i), so
    // (s rho s^dagger)_ij = phase(i) conj(phase(j)) rho[flip(i)][flip(j)].
    let (flip, phase): (usize, fn(bool) -> C64) = match axis {
        Axis::X => (bit, |_| ONE),
        Axis::Y => (bit, |set| if set { I } else { -I }),
        Axis::Z => (0, |set| if set { -ONE } else { ONE }),
    };
    Operator::from_fn(rho.dim(), |i, j| {
        let (si, sj) = (i ^ flip, j ^ flip);
        phase(i & bit != 0) * phase(j & bit != 0).conj() * rho.get(si, sj)
    })
}

/// Two-qubit output of the unitary dilation of the phase-flip channel.
///
/// The ancilla is qubit 2 and starts in `|0>`; the channel qubit is qubit 1.
/// After the coin toss `V(lambda)` on the ancilla, `Z` acts on the channel
/// qubit when the ancilla is `|0>`, which is the branch carrying amplitude
/// `sqrt(lambda)`. Tracing out qubit 2 then reproduces the z-axis channel.
pub fn extended_channel_state(rho_channel: &Operator, lambda: f64) -> Result<Operator> {
    if rho_channel.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho_channel.dim(),
        });
    }
    let coin = gate(Gate::CoinToss(lambda))?;
    let ancilla0 = Operator::from_rows(2, &[ONE, ZERO, ZERO, ZERO])?;
    let initial = tensor(&[ancilla0, rho_channel.clone()])?;
    let id = Operator::identity(2)?;
    let x_anc = tensor(&[gate(Gate::PauliX)?, id.clone()])?;
    let controlled = x_anc.mul(&gate(Gate::ControlledZ)?).mul(&x_anc);
    let u = controlled.mul(&tensor(&[coin, id])?);
    Ok(initial.conjugate_by(&u))
}

/// Pairwise controlled-Z on every distinct pair, followed by a Hadamard on
/// every qubit.
pub fn build_uprep(n: usize) -> Result<Operator> {
    if n < 2 {
        return Err(Error::Parameter {
            name: "n",
            value: n as f64,
            constraint: "n >= 2",
        });
    }
    if n > MAX_DENSE_QUBITS {
        return Err(Error::DimensionCap {
            dim: 1usize.checked_shl(n as u32).unwrap_or(usize::MAX),
            cap: 1 << MAX_DENSE_QUBITS,
        });
    }
    let dim = 1usize << n;
    // All CZ gates are diagonal: the phase is (-1)^(number of 11 pairs).
    let cz_all = Operator::from_fn(dim, |i, j| {
        if i != j {
            return ZERO;
        }
        let ones = i.count_ones();
        if (ones * ones.saturating_sub(1) / 2) % 2 == 0 {
            ONE
        } else {
            -ONE
        }
    })?;
    let hadamards = tensor(&vec![gate(Gate::Hadamard)?; n])?;
    Ok(hadamards.mul(&cz_all))
}

/// Product-state weight `(1+r)^j (1-r)^(n-j) / 2^n` where `j` counts the
/// zero bits of `x`.
pub fn f_weight(x: u64, n: u32, r: f64) -> Result<f64> {
    check_mixed_r(r)?;
    if n == 0 || n > 63 || x >> n != 0 {
        return Err(Error::Invalid(format!("x = {x} outside 0..2^{n}")));
    }
    let j = n - x.count_ones();
    Ok((1.0 + r).powi(j as i32) * (1.0 - r).powi((n - j) as i32) / 2f64.powi(n as i32))
}

/// One invariant two-dimensional block on `span{|x>, |N-x>}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockPair {
    pub x: u64,
    /// `N - x`, the bitwise complement of `x`.
    pub partner: u64,
    pub diag_weight: f64,
    pub offdiag_weight: f64,
    /// `(1 - 2 lambda)^m`; one before the channel.
    pub offdiag_scale: f64,
}

impl BlockPair {
    pub fn n_qubits(&self) -> u32 {
        (self.x + self.partner + 1).trailing_zeros()
    }

    /// The block as a 2x2 operator in the ordered basis `(|x>, |N-x>)`.
    pub fn local_operator(&self) -> Operator {
        let off = self.offdiag_scale * self.offdiag_weight;
        Operator::from_rows(
            2,
            &[
                C64::new(self.diag_weight, 0.0),
                C64::new(0.0, off),
                C64::new(0.0, -off),
                C64::new(self.diag_weight, 0.0),
            ],
        )
        .expect("2x2 is a valid dimension")
    }
}

/// Largest qubit count for which block lists are materialised.
pub const MAX_BLOCK_QUBITS: usize = 24;

/// Blocks of `U_prep (rho_0 (x) ... (x) rho_0) U_prep^dagger` with
/// `rho_0 = (I + r sigma_y)/2`.
pub fn prepared_state_blocks(n: usize, r: f64) -> Result<Vec<BlockPair>> {
    check_mixed_r(r)?;
    if !(2..=MAX_BLOCK_QUBITS).contains(&n) {
        return Err(Error::Parameter {
            name: "n",
            value: n as f64,
            constraint: "2 <= n <= 24",
        });
    }
    let big_n: u64 = (1u64 << n) - 1;
    (0..=(big_n - 1) / 2)
        .map(|x| {
            let fx = f_weight(x, n as u32, r)?;
            let fp = f_weight(big_n - x, n as u32, r)?;
            Ok(BlockPair {
                x,
                partner: big_n - x,
                diag_weight: (fx + fp) / 2.0,
                offdiag_weight: (fx - fp) / 2.0,
                offdiag_scale: 1.0,
            })
        })
        .collect()
}

/// `(1 - 2 lambda)^m` with `0^0 = 1`.
pub fn dephasing_factor(lambda: f64, m: usize) -> f64 {
    (1.0 - 2.0 * lambda).powi(m as i32)
}

/// `d/dlambda (1 - 2 lambda)^m`.
pub fn dephasing_factor_derivative(lambda: f64, m: usize) -> f64 {
    -2.0 * m as f64 * (1.0 - 2.0 * lambda).powi(m as i32 - 1)
}

/// Applies the dephasing channel to the `m` least significant qubits of a
/// block-decomposed state.
pub fn post_channel_blocks(blocks: &[BlockPair], lambda: f64, m: usize) -> Result<Vec<BlockPair>> {
    check_lambda(lambda)?;
    let n = blocks.first().map_or(0, |b| b.n_qubits() as usize);
    if m > n {
        return Err(Error::Parameter {
            name: "m",
            value: m as f64,
            constraint: "m <= n",
        });
    }
    let factor = dephasing_factor(lambda, m);
    Ok(blocks
        .iter()
        .map(|b| BlockPair {
            offdiag_scale: b.offdiag_scale * factor,
            ..*b
        })
        .collect())
}

/// Dense `2^n x 2^n` matrix assembled from blocks.
pub fn assemble_blocks(blocks: &[BlockPair]) -> Result<Operator> {
    assemble_with(blocks, |b| {
        (b.diag_weight, b.offdiag_scale * b.offdiag_weight)
    })
}

/// Dense `d rho / d lambda` of the post-channel state: only the
/// off-diagonal coherences depend on `lambda`.
pub fn assemble_block_derivative(blocks: &[BlockPair], lambda: f64, m: usize) -> Result<Operator> {
    let d = dephasing_factor_derivative(lambda, m);
    assemble_with(blocks, |b| (0.0, d * b.offdiag_weight))
}

fn assemble_with(
    blocks: &[BlockPair],
    weights: impl Fn(&BlockPair) -> (f64, f64),
) -> Result<Operator> {
    let first = blocks.first().ok_or(Error::Invalid("no blocks".into()))?;
    let n = first.n_qubits();
    if n as usize > MAX_DENSE_QUBITS {
        return Err(Error::DimensionCap {
            dim: 1 << n,
            cap: 1 << MAX_DENSE_QUBITS,
        });
    }
    let mut out = Operator::zeros(1 << n)?.into_matrix();
    for b in blocks {
        let (x, p) = (b.x as usize, b.partner as usize);
        let (diag, off) = weights(b);
        out[(x, x)] += C64::new(diag, 0.0);
        out[(p, p)] += C64::new(diag, 0.0);
        out[(x, p)] += I * off;
        out[(p, x)] -= I * off;
    }
    Operator::from_matrix(out)
}

/// `sigma_y` eigenbasis state: bit 0 of `x` maps to `|+y>`, bit 1 to `|-y>`,
/// with `|+-y> = (|0> +- i|1>)/sqrt(2)`.
pub fn y_basis_ket(n: usize, x: usize) -> Result<DVector<C64>> {
    if n == 0 || n > MAX_DENSE_QUBITS || x >> n != 0 {
        return Err(Error::Invalid(format!("x = {x} outside 0..2^{n}")));
    }
    let dim = 1usize << n;
    let norm = (dim as f64).sqrt().recip();
    Ok(DVector::from_fn(dim, |z, _| {
        // prod_j i^{z_j} (-1)^{x_j z_j}
        let ones = z.count_ones();
        let sign = if (x & z).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        I.powu(ones) * sign * norm
    }))
}

/// `rho_0 (x) ... (x) rho_0` for `rho_0 = (I + r sigma_y)/2`.
pub fn product_input_state(n: usize, r: f64) -> Result<Operator> {
    let rho0 = bloch_state(BlochVector::new(0.0, r, 0.0)?);
    tensor(&vec![rho0; n])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linop::{embed, hermitian_eig, partial_trace};

    fn y_state(r: f64) -> Operator {
        bloch_state(BlochVector::new(0.0, r, 0.0).unwrap())
    }

    #[test]
    fn bloch_state_examples() {
        let zero = bloch_state(BlochVector::new(0.0, 0.0, 0.0).unwrap());
        assert!(zero.max_abs_diff(&Operator::identity(2).unwrap().scale_re(0.5)) < 1e-16);
        let pure = hermitian_eig(&y_state(1.0)).unwrap().eigenvalues;
        assert!(pure[0].abs() < 1e-15 && (pure[1] - 1.0).abs() < 1e-15);
        let half = hermitian_eig(&y_state(0.5)).unwrap().eigenvalues;
        assert!((half[0] - 0.25).abs() < 1e-15 && (half[1] - 0.75).abs() < 1e-15);
        assert!(BlochVector::new(0.0, 1.2, 0.0).is_err());
    }

    #[test]
    fn channel_identity_at_zero_and_full_dephasing_at_half() {
        let rho = y_state(0.7);
        let id = apply_pauli_channel(&rho, &ChannelSpec::dephasing(0.0, 1).unwrap(), &[1]).unwrap();
        assert_eq!(id, rho);
        let mixed =
            apply_pauli_channel(&rho, &ChannelSpec::dephasing(0.5, 1).unwrap(), &[1]).unwrap();
        assert!(mixed.max_abs_diff(&Operator::identity(2).unwrap().scale_re(0.5)) < 1e-16);
    }

    #[test]
    fn z_channel_scales_y_component() {
        let (r, l) = (0.8, 0.3);
        let out =
            apply_pauli_channel(&y_state(r), &ChannelSpec::dephasing(l, 1).unwrap(), &[1]).unwrap();
        assert!(out.max_abs_diff(&y_state(r * (1.0 - 2.0 * l))) < 1e-15);
    }

    #[test]
    fn pauli_conjugate_matches_dense_embedding() {
        let rho = Operator::from_fn(8, |i, j| {
            C64::new((i * 3 + j) as f64 * 0.1, i as f64 - j as f64)
        })
        .unwrap();
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            for q in 1..=3 {
                let s = embed(&axis.pauli(), &[q], 3).unwrap();
                let fast = pauli_conjugate(&rho, axis, q).unwrap();
                assert!(
                    fast.max_abs_diff(&rho.conjugate_by(&s)) < 1e-15,
                    "{axis:?} on {q}"
                );
            }
        }
        assert!(pauli_conjugate(&rho, Axis::Z, 4).is_err());
    }

    #[test]
    fn channel_rejects_duplicates_and_count_mismatch() {
        let rho = product_input_state(2, 0.3).unwrap();
        let spec = ChannelSpec::dephasing(0.2, 2).unwrap();
        assert_eq!(
            apply_pauli_channel(&rho, &spec, &[1, 1]),
            Err(Error::DuplicateQubit(1))
        );
        assert!(apply_pauli_channel(&rho, &spec, &[1]).is_err());
        assert!(ChannelSpec::dephasing(1.2, 1).is_err());
        assert!(ChannelSpec::dephasing(0.2, 0).is_err());
    }

    #[test]
    fn extended_channel_matches_direct_channel() {
        let rho = bloch_state(BlochVector::new(0.3, -0.5, 0.4).unwrap());
        for k in 0..=10 {
            let l = k as f64 / 10.0;
            let ext = extended_channel_state(&rho, l).unwrap();
            let reduced = partial_trace(&ext, &[1]).unwrap();
            let direct =
                apply_pauli_channel(&rho, &ChannelSpec::dephasing(l, 1).unwrap(), &[1]).unwrap();
            assert!(reduced.max_abs_diff(&direct) < 1e-12, "lambda = {l}");
        }
        assert!(extended_channel_state(&rho, 1.1).is_err());
    }

    #[test]
    fn uprep_column_structure_two_qubits() {
        let u = build_uprep(2).unwrap();
        // x-bar for x = 0 is |+y +y>.
        let out = u.apply(&y_basis_ket(2, 0).unwrap());
        let a = C64::new(0.5, 0.5);
        let b = C64::new(0.5, -0.5);
        assert!((out[0] - a).norm() < 1e-15);
        assert!((out[3] - b).norm() < 1e-15);
        assert!(out[1].norm() < 1e-15 && out[2].norm() < 1e-15);
        assert!(build_uprep(3).unwrap().unitarity_deviation() < 1e-12);
        assert!(build_uprep(1).is_err());
        assert!(matches!(build_uprep(13), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn f_weight_examples() {
        for x in 0..8 {
            assert!((f_weight(x, 3, 0.0).unwrap() - 0.125).abs() < 1e-16);
        }
        assert!((f_weight(0, 2, 0.5).unwrap() - 0.5625).abs() < 1e-15);
        assert!(f_weight(0, 2, 1.0).is_err());
        assert!(f_weight(4, 2, 0.5).is_err());
    }

    #[test]
    fn block_examples() {
        let flat = prepared_state_blocks(3, 0.0).unwrap();
        assert_eq!(flat.len(), 4);
        for b in &flat {
            assert_eq!(b.offdiag_weight, 0.0);
            assert!((b.diag_weight - 0.125).abs() < 1e-16);
        }
        let b = prepared_state_blocks(2, 0.5).unwrap();
        assert!((b[0].diag_weight - 0.3125).abs() < 1e-15);
        assert_eq!(b[0].partner, 3);
        assert_eq!(b[0].n_qubits(), 2);
    }

    #[test]
    fn post_channel_scale_examples() {
        let blocks = prepared_state_blocks(3, 0.4).unwrap();
        assert_eq!(post_channel_blocks(&blocks, 0.0, 2).unwrap(), blocks);
        for b in post_channel_blocks(&blocks, 0.5, 2).unwrap() {
            assert_eq!(b.offdiag_scale, 0.0);
        }
        assert!(post_channel_blocks(&blocks, 0.2, 4).is_err());
        // m odd, lambda > 1/2 keeps the sign
        let neg = post_channel_blocks(&blocks, 0.75, 1).unwrap();
        assert_eq!(neg[0].offdiag_scale, -0.5);
    }

    #[test]
    fn dense_block_state_matches_channel_on_prepared_state() {
        let (n, m, l, r) = (3, 2, 0.2, 0.4);
        let blocks = prepared_state_blocks(n, r).unwrap();
        let prepared = assemble_blocks(&blocks).unwrap();
        let direct =
            apply_pauli_channel(&prepared, &ChannelSpec::dephasing(l, m).unwrap(), &[1, 2])
                .unwrap();
        let via_blocks = assemble_blocks(&post_channel_blocks(&blocks, l, m).unwrap()).unwrap();
        assert!(via_blocks.max_abs_diff(&direct) < 1e-10);
    }
}
