//! Cross-module consistency suites. Each suite returns a single report with
//! its largest observed deviation; the CLI prints one line per suite.

use std::fmt;

use crate::channels::{
    apply_pauli_channel, assemble_block_derivative, assemble_blocks, build_uprep,
    extended_channel_state, pauli_conjugate, post_channel_blocks, prepared_state_blocks,
    product_input_state, y_basis_ket, Axis, ChannelSpec,
};
use crate::correlations::{
    bell_diagonalize, discord_prep, discord_protocol, discord_rmu, discord_xstate,
    is_separable_ppt, rho_final_two_qubit, separability_threshold, PPT_TOL,
};
use crate::error::{Error, Result};
use crate::linop::{partial_trace, Operator, C64};
use crate::protocol::{
    binomial, cj_dj, gain, lambda_from_t2, lambda_threshold_gain_n, qfi_correlated,
    stationary_polarizations, ProtocolPoint,
};
use crate::qfi::{
    block_qfi_sum, qfi_independent_opt, qfi_upper_bound, sld_2x2, sld_eig, DEFAULT_SUPPORT_TOL,
};

/// Largest `n` accepted by the oracle suite (dense eigensolves).
pub const ORACLE_MAX_QUBITS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Oracle,
    Bounds,
    Coefficients,
    Separability,
    Discord,
    Stationary,
    Nmr,
    ExtendedChannel,
    Uprep,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Oracle,
        Suite::Bounds,
        Suite::Coefficients,
        Suite::Separability,
        Suite::Discord,
        Suite::Stationary,
        Suite::Nmr,
        Suite::ExtendedChannel,
        Suite::Uprep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Oracle => "oracle",
            Suite::Bounds => "bounds",
            Suite::Coefficients => "coefficients",
            Suite::Separability => "separability",
            Suite::Discord => "discord",
            Suite::Stationary => "stationary",
            Suite::Nmr => "nmr",
            Suite::ExtendedChannel => "extended-channel",
            Suite::Uprep => "uprep",
        }
    }

    pub fn from_name(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    pub max_error: f64,
    pub detail: String,
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} max_error={:.3e} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.max_error,
            self.detail
        )
    }
}

/// Tracks the worst deviation against a tolerance.
#[derive(Default)]
struct Tally {
    max_error: f64,
    failures: Vec<String>,
}

impl Tally {
    fn check(&mut self, err: f64, tol: f64, what: impl FnOnce() -> String) {
        let err = if err.is_nan() { f64::INFINITY } else { err };
        self.max_error = self.max_error.max(err);
        if err > tol {
            self.fail(what());
        }
    }

    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.fail(what());
        }
    }

    fn fail(&mut self, msg: String) {
        if self.failures.len() < 3 {
            self.failures.push(msg);
        } else if self.failures.len() == 3 {
            self.failures.push("...".into());
        }
    }

    fn report(self, suite: Suite, summary: String) -> SuiteReport {
        let passed = self.failures.is_empty();
        let detail = if passed {
            summary
        } else {
            format!("{summary}; {}", self.failures.join("; "))
        };
        SuiteReport {
            name: suite.name(),
            passed,
            max_error: self.max_error,
            detail,
        }
    }
}

/// `{step, 2 step, ..., 1 - step}` computed as integer multiples.
pub fn open_grid(step: f64) -> Vec<f64> {
    let k = (1.0 / step).round() as usize;
    (1..k).map(|i| i as f64 / k as f64).collect()
}

/// `|a - b| / |b|`, or `|a|` when `b` vanishes.
pub fn rel_err(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

/// Post-channel state and its `lambda` derivative built from scratch:
/// product input, dense `U_prep`, then the dephasing channel on qubits
/// `1..=m`. The derivative follows from the product rule over channel uses.
pub fn dense_post_channel(n: usize, r: f64, lambda: f64, m: usize) -> Result<(Operator, Operator)> {
    dense_channel_on(&dense_prepared(n, r)?, lambda, m)
}

/// `U_prep (rho_0 (x) ... (x) rho_0) U_prep^dagger`, dense.
pub fn dense_prepared(n: usize, r: f64) -> Result<Operator> {
    Ok(product_input_state(n, r)?.conjugate_by(&build_uprep(n)?))
}

fn dense_channel_on(prepared: &Operator, lambda: f64, m: usize) -> Result<(Operator, Operator)> {
    let n = prepared.num_qubits();
    if m == 0 || m > n {
        return Err(Error::Parameter {
            name: "m",
            value: m as f64,
            constraint: "1 <= m <= n",
        });
    }
    let targets: Vec<usize> = (1..=m).collect();
    let rho = apply_pauli_channel(prepared, &ChannelSpec::dephasing(lambda, m)?, &targets)?;
    let mut drho = Operator::zeros(prepared.dim())?;
    for &k in &targets {
        let others: Vec<usize> = targets.iter().copied().filter(|&q| q != k).collect();
        let partial = if others.is_empty() {
            prepared.clone()
        } else {
            apply_pauli_channel(
                prepared,
                &ChannelSpec::dephasing(lambda, others.len())?,
                &others,
            )?
        };
        drho = drho.add(&pauli_conjugate(&partial, Axis::Z, k)?.sub(&partial));
    }
    Ok((rho, drho))
}

pub fn run_suite(suite: Suite, n_max: usize) -> Result<SuiteReport> {
    match suite {
        Suite::Oracle => oracle(n_max),
        Suite::Bounds => bounds(),
        Suite::Coefficients => coefficients(),
        Suite::Separability => separability(),
        Suite::Discord => discord(),
        Suite::Stationary => stationary(),
        Suite::Nmr => nmr(),
        Suite::ExtendedChannel => extended_channel(),
        Suite::Uprep => uprep(),
    }
}

pub fn run_all(n_max: usize) -> Result<Vec<SuiteReport>> {
    Suite::ALL
        .into_iter()
        .map(|s| run_suite(s, n_max))
        .collect()
}

/// Closed form against the dense eigenbasis route and the block route.
fn oracle(n_max: usize) -> Result<SuiteReport> {
    if !(2..=ORACLE_MAX_QUBITS).contains(&n_max) {
        return Err(Error::Parameter {
            name: "n-max",
            value: n_max as f64,
            constraint: "2 <= n-max <= 8",
        });
    }
    const TOL: f64 = 1e-8;
    let mut t = Tally::default();
    let mut points = 0;
    for n in 2..=n_max {
        for r in open_grid(0.1) {
            let blocks = prepared_state_blocks(n, r)?;
            let prepared = dense_prepared(n, r)?;
            for m in 1..=n {
                for l in open_grid(0.1) {
                    let h = qfi_correlated(&ProtocolPoint::new(n, m, r, l)?);
                    let (rho, drho) = dense_channel_on(&prepared, l, m)?;
                    let dense = sld_eig(&rho, &drho, DEFAULT_SUPPORT_TOL)?.qfi;
                    let block = block_qfi_sum(&post_channel_blocks(&blocks, l, m)?, l, m)?;
                    let e = rel_err(dense, h).max(rel_err(block, h));
                    t.check(e, TOL, || {
                        format!("n={n} m={m} r={r} lambda={l}: {h} vs {dense}, {block}")
                    });
                    points += 1;
                }
            }
        }
    }
    Ok(t.report(Suite::Oracle, format!("{points} points, n <= {n_max}")))
}

fn bounds() -> Result<SuiteReport> {
    let mut t = Tally::default();
    for n in 2..=5 {
        for m in 1..=n {
            for r in open_grid(0.1) {
                let blocks = prepared_state_blocks(n, r)?;
                let prepared = dense_prepared(n, r)?;
                for l in open_grid(0.1) {
                    let bound = qfi_upper_bound(l, m)?;
                    let (rho, drho) = dense_channel_on(&prepared, l, m)?;
                    let hs = [
                        qfi_correlated(&ProtocolPoint::new(n, m, r, l)?),
                        block_qfi_sum(&post_channel_blocks(&blocks, l, m)?, l, m)?,
                        sld_eig(&rho, &drho, DEFAULT_SUPPORT_TOL)?.qfi,
                        qfi_independent_opt(r, l, m)?,
                    ];
                    for h in hs {
                        t.check((h - bound).max(0.0), 1e-8, || {
                            format!("n={n} m={m} r={r} lambda={l}: H={h} > {bound}")
                        });
                    }
                }
            }
        }
    }
    let r = 1.0 - 1e-8;
    let mut worst_limit: f64 = 0.0;
    for m in 1..=4 {
        for l in open_grid(0.1) {
            let e = rel_err(qfi_independent_opt(r, l, m)?, qfi_upper_bound(l, m)?);
            worst_limit = worst_limit.max(e);
            t.require(e < 1e-4, || {
                format!("pure limit m={m} lambda={l}: rel {e:e}")
            });
        }
    }
    Ok(t.report(
        Suite::Bounds,
        format!("max_error is the excess over m/(lambda(1-lambda)); pure-limit rel error {worst_limit:.3e}"),
    ))
}

fn coefficients() -> Result<SuiteReport> {
    let mut t = Tally::default();
    let rs = open_grid(0.02);
    for n in 2..=8 {
        for &r in &rs {
            let r2 = r * r;
            let mut sum = 0.0;
            for j in 0..=n {
                let cd = cj_dj(n, j, r)?;
                sum += binomial(n, j) * cd.c * cd.c / cd.d;
                if 2 * j != n {
                    let ratio = cd.c * cd.c / (cd.d * cd.d);
                    t.check((r2 - ratio) / r2, 1e-12, || {
                        format!("c^2/d^2 < r^2 at n={n} j={j} r={r}")
                    });
                }
                let floor = 2.0 * (1.0 - r2).powi(n as i32 - 1);
                t.check((floor - cd.d) / floor, 1e-12, || {
                    format!("d_j below floor at n={n} j={j} r={r}")
                });
            }
            let floor = 2f64.powi(n as i32 + 1) * r2;
            t.check((floor - sum) / floor, 1e-12, || {
                format!("sum below 2^(n+1) r^2 at n={n} r={r}")
            });
            for l in open_grid(0.05) {
                let g = gain(&ProtocolPoint::new(n, 1, r, l)?)?;
                t.require(g > 1.0, || format!("G={g} <= 1 at n={n} r={r} lambda={l}"));
            }
        }
    }
    Ok(t.report(Suite::Coefficients, "n in 2..=8, m = 1".into()))
}

fn separability() -> Result<SuiteReport> {
    let mut t = Tally::default();
    let margin = 1e-6;
    for m in 1..=3 {
        for l in open_grid(0.05) {
            let th = separability_threshold(m, l)?;
            let below = is_separable_ppt(&rho_final_two_qubit(th - margin, l, m)?, PPT_TOL)?;
            t.require(below.separable, || {
                format!("entangled below threshold m={m} lambda={l}")
            });
            if th + margin < 1.0 {
                let above = is_separable_ppt(&rho_final_two_qubit(th + margin, l, m)?, PPT_TOL)?;
                t.require(!above.separable, || {
                    format!("separable above threshold m={m} lambda={l}")
                });
            }
            // min PT eigenvalue closed form: ((1 - r^2) - 2 r |mu|) / 4
            let r = 0.5 * th;
            let mu = crate::channels::dephasing_factor(l, m).abs();
            let v = is_separable_ppt(&rho_final_two_qubit(r, l, m)?, PPT_TOL)?;
            t.check(
                (v.min_eigenvalue - (1.0 - r * r - 2.0 * r * mu) / 4.0).abs(),
                1e-12,
                || format!("min PT eigenvalue m={m} lambda={l}"),
            );
        }
    }
    let mut witnesses = 0;
    for m in 1..=2 {
        for l in open_grid(0.05) {
            for r in open_grid(0.05) {
                let g = gain(&ProtocolPoint::new(2, m, r, l)?)?;
                if g > 1.0 && is_separable_ppt(&rho_final_two_qubit(r, l, m)?, PPT_TOL)?.separable {
                    witnesses += 1;
                }
            }
        }
    }
    t.require(witnesses > 0, || "no separable point with gain > 1".into());
    Ok(t.report(
        Suite::Separability,
        format!("{witnesses} separable grid points with gain > 1"),
    ))
}

fn discord() -> Result<SuiteReport> {
    let mut t = Tally::default();
    for r in open_grid(0.05) {
        let q = discord_protocol(r, 0.5, 1)?.q;
        t.check(q.abs(), 1e-12, || format!("Q={q} at lambda=1/2 r={r}"));
        let g = gain(&ProtocolPoint::new(2, 1, r, 0.5)?)?;
        t.check((g - 2.0 / (1.0 + r * r)).abs(), 1e-10, || {
            format!("G at lambda=1/2 r={r}")
        });
        t.require(g > 1.0, || format!("G <= 1 at lambda=1/2 r={r}"));
    }
    for m in 1..=3 {
        for l in open_grid(0.1) {
            for r in open_grid(0.1) {
                let closed = discord_protocol(r, l, m)?.q;
                let generic = discord_xstate(&bell_diagonalize(&rho_final_two_qubit(r, l, m)?)?)?.q;
                t.check((closed - generic).abs(), 1e-10, || {
                    format!("route mismatch m={m} lambda={l} r={r}")
                });
            }
        }
    }
    let h = 1e-4;
    for r in open_grid(0.05) {
        for mu in open_grid(0.05) {
            let dq_dmu = discord_rmu(r, mu + h)?.q - discord_rmu(r, mu - h)?.q;
            let dq_dr = discord_rmu(r + h, mu)?.q - discord_rmu(r - h, mu)?.q;
            t.require(dq_dmu > 0.0 && dq_dr > 0.0, || {
                format!("Q not increasing at r={r} mu={mu}")
            });
            let sym = (discord_rmu(r, mu)?.q - discord_rmu(r, -mu)?.q).abs();
            t.check(sym, 0.0, || format!("mu sign asymmetry at r={r} mu={mu}"));
        }
    }
    let q_half = discord_prep(0.5)?;
    t.check((q_half - 0.18872).abs(), 1e-5, || {
        format!("Q_prep(0.5) = {q_half}")
    });

    // Fine r grid at lambda = 0.95, m = 1: discord rises while gain falls.
    let rs: Vec<f64> = (1..1000).map(|i| i as f64 / 1000.0).collect();
    let mut opposite = 0;
    for w in rs.windows(2) {
        let dq = discord_protocol(w[1], 0.95, 1)?.q - discord_protocol(w[0], 0.95, 1)?.q;
        let dg = gain(&ProtocolPoint::new(2, 1, w[1], 0.95)?)?
            - gain(&ProtocolPoint::new(2, 1, w[0], 0.95)?)?;
        if dq > 0.0 && dg < 0.0 {
            opposite += 1;
        }
    }
    t.require(opposite > 0, || {
        "no interval where discord rises and gain falls".into()
    });
    Ok(t.report(
        Suite::Discord,
        format!("{opposite} discord-up/gain-down steps at lambda=0.95"),
    ))
}

/// Published two-decimal stationary polarizations.
pub const STATIONARY_ROOTS: [(usize, f64, f64); 4] = [
    (1, 0.95, 0.66),
    (1, 0.99, 0.83),
    (2, 0.95, 0.48),
    (2, 0.99, 0.76),
];

fn stationary() -> Result<SuiteReport> {
    let mut t = Tally::default();
    let mut found = Vec::new();
    for &(m, l, expected) in &STATIONARY_ROOTS {
        let roots = stationary_polarizations(m, l)?;
        let Some(&root) = roots
            .iter()
            .min_by(|a, b| (*a - expected).abs().total_cmp(&(*b - expected).abs()))
        else {
            t.fail(format!("no root for m={m} lambda={l}"));
            continue;
        };
        found.push(format!("{root:.4}"));
        t.check((root - expected).abs(), 0.005, || {
            format!("m={m} lambda={l}: {root} vs {expected}")
        });
        let h = 1e-6;
        let slope = (gain(&ProtocolPoint::new(2, m, root + h, l)?)?
            - gain(&ProtocolPoint::new(2, m, root - h, l)?)?)
            / (2.0 * h);
        t.require(slope.abs() < 1e-5, || {
            format!("slope {slope:e} at m={m} lambda={l}")
        });
    }
    Ok(t.report(Suite::Stationary, format!("roots [{}]", found.join(", "))))
}

fn nmr() -> Result<SuiteReport> {
    let mut t = Tally::default();
    let l_claim = lambda_from_t2(0.22, 1.0)?;
    t.require(l_claim <= 0.10, || format!("lambda(0.22 T2) = {l_claim}"));
    let n = 5;
    let th = lambda_threshold_gain_n(n)?;
    let mut worst = f64::INFINITY;
    for k in 1..=20 {
        let l = th * k as f64 / 20.0;
        let g = gain(&ProtocolPoint::new(n, n, 1e-4, l)?)?;
        worst = worst.min(g);
        t.require(g >= n as f64 - 0.1, || format!("G={g} at lambda={l}"));
    }
    let g_quoted = gain(&ProtocolPoint::new(n, n, 1e-4, 0.0986)?)?;
    Ok(t.report(
        Suite::Nmr,
        format!(
            "lambda(0.22 T2)={l_claim:.6}, gain-{n} threshold {th:.6}, min G below threshold {worst:.4}, \
             G(lambda=0.0986)={g_quoted:.4}"
        ),
    ))
}

fn extended_channel() -> Result<SuiteReport> {
    let mut t = Tally::default();
    let states = [
        Operator::from_rows(
            2,
            &[
                C64::new(0.5, 0.0),
                C64::new(0.0, -0.3),
                C64::new(0.0, 0.3),
                C64::new(0.5, 0.0),
            ],
        )?,
        Operator::from_real_rows(2, &[0.8, 0.2, 0.2, 0.2])?,
    ];
    for rho in &states {
        for l in open_grid(0.05) {
            let reduced = partial_trace(&extended_channel_state(rho, l)?, &[1])?;
            let direct = apply_pauli_channel(rho, &ChannelSpec::dephasing(l, 1)?, &[1])?;
            t.check(reduced.max_abs_diff(&direct), 1e-12, || {
                format!("lambda={l}")
            });
        }
    }
    for l in open_grid(0.05) {
        let (a, b) = (l.sqrt(), (1.0 - l).sqrt());
        let psi = nalgebra::DVector::from_vec(vec![C64::new(a, 0.0), C64::new(b, 0.0)]);
        let dpsi =
            nalgebra::DVector::from_vec(vec![C64::new(0.5 / a, 0.0), C64::new(-0.5 / b, 0.0)]);
        let rho = Operator::projector(&psi)?;
        let drho = Operator::from_matrix(&dpsi * psi.adjoint() + &psi * dpsi.adjoint())?;
        let h = sld_2x2(&rho, &drho)?.qfi;
        t.check(rel_err(h, 1.0 / (l * (1.0 - l))), 1e-10, || {
            format!("coin QFI at lambda={l}")
        });
    }
    Ok(t.report(
        Suite::ExtendedChannel,
        "dilation reproduces the channel; coin QFI 1/(l(1-l))".into(),
    ))
}

fn uprep() -> Result<SuiteReport> {
    let mut t = Tally::default();
    let plus = C64::new(0.5, 0.5);
    let minus = C64::new(0.5, -0.5);
    for n in 2..=4 {
        let u = build_uprep(n)?;
        t.check(u.unitarity_deviation(), 1e-12, || {
            format!("U_prep not unitary at n={n}")
        });
        let big_n = (1usize << n) - 1;
        for x in 0..=big_n {
            let col = u.apply(&y_basis_ket(n, x)?);
            let nonzero: Vec<usize> = (0..col.len()).filter(|&i| col[i].norm() > 1e-12).collect();
            t.require(
                nonzero == {
                    let mut v = vec![x.min(big_n - x), x.max(big_n - x)];
                    v.dedup();
                    v
                },
                || format!("n={n} x={x}: support {nonzero:?}"),
            );
            let (a, b) = (col[x], col[big_n - x]);
            let e = (a - plus)
                .norm()
                .max((b - minus).norm())
                .min((a - minus).norm().max((b - plus).norm()));
            t.check(e, 1e-12, || format!("n={n} x={x}: amplitudes {a}, {b}"));
        }
        for r in [0.2, 0.7] {
            let dense = product_input_state(n, r)?.conjugate_by(&u);
            let blocks = assemble_blocks(&prepared_state_blocks(n, r)?)?;
            t.check(dense.max_abs_diff(&blocks), 1e-12, || {
                format!("block form n={n} r={r}")
            });
            let derivative = assemble_block_derivative(
                &post_channel_blocks(&prepared_state_blocks(n, r)?, 0.3, 1)?,
                0.3,
                1,
            )?;
            let (_, direct) = dense_post_channel(n, r, 0.3, 1)?;
            t.check(derivative.max_abs_diff(&direct), 1e-12, || {
                format!("derivative n={n} r={r}")
            });
        }
    }
    Ok(t.report(
        Suite::Uprep,
        "two amplitudes (1 +- i)/2 per column, n in 2..=4".into(),
    ))
}
