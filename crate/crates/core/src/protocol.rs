//! Closed-form Fisher information and gain of the correlated-state protocol.
//!
//! Throughout, `x = (1 - 2 lambda)^2`. Powers `x^(m-1)` follow `0^0 = 1`, so
//! for a single invocation the gain stays continuous at `lambda = 1/2`.

use crate::error::{check_lambda, check_mixed_r, Error, Result};
use crate::qfi::qfi_independent_opt;

/// Largest qubit count accepted by the analytic path.
pub const MAX_ANALYTIC_QUBITS: usize = 64;

/// One evaluation point `(n, m, r, lambda)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolPoint {
    pub n: usize,
    pub m: usize,
    pub r: f64,
    pub lambda: f64,
}

impl ProtocolPoint {
    pub fn new(n: usize, m: usize, r: f64, lambda: f64) -> Result<Self> {
        check_qubits(n)?;
        check_m(n, m)?;
        check_mixed_r(r)?;
        check_lambda(lambda)?;
        Ok(Self { n, m, r, lambda })
    }

    fn x(&self) -> f64 {
        (1.0 - 2.0 * self.lambda).powi(2)
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if (2..=MAX_ANALYTIC_QUBITS).contains(&n) {
        Ok(())
    } else {
        Err(Error::Parameter {
            name: "n",
            value: n as f64,
            constraint: "2 <= n <= 64",
        })
    }
}

fn check_m(n: usize, m: usize) -> Result<()> {
    if (1..=n).contains(&m) {
        Ok(())
    } else {
        Err(Error::Parameter {
            name: "m",
            value: m as f64,
            constraint: "1 <= m <= n",
        })
    }
}

fn check_open_r(r: f64) -> Result<()> {
    if r == 0.0 {
        return Err(Error::GainAtZeroPolarization);
    }
    check_mixed_r(r)
}

/// Binomial coefficient by multiplicative recurrence.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `c_j = (1+r)^j (1-r)^(n-j) - (1+r)^(n-j) (1-r)^j`, and `d_j` the sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CjDj {
    pub c: f64,
    pub d: f64,
}

pub fn cj_dj(n: usize, j: usize, r: f64) -> Result<CjDj> {
    check_mixed_r(r)?;
    if j > n {
        return Err(Error::Invalid(format!("j = {j} exceeds n = {n}")));
    }
    let a = (1.0 + r).powi(j as i32) * (1.0 - r).powi((n - j) as i32);
    let b = (1.0 + r).powi((n - j) as i32) * (1.0 - r).powi(j as i32);
    Ok(CjDj { c: a - b, d: a + b })
}

fn terms(n: usize, r: f64) -> impl Iterator<Item = (f64, CjDj)> {
    (0..=n).map(move |j| (binomial(n, j), cj_dj(n, j, r).expect("validated r")))
}

/// Correlated-protocol QFI
/// `m^2 x^(m-1) / 2^(n-1) * sum_j C(n,j) c_j^2 d_j / (d_j^2 - x^m c_j^2)`.
pub fn qfi_correlated(p: &ProtocolPoint) -> f64 {
    let x = p.x();
    let xm = x.powi(p.m as i32);
    let sum: f64 = terms(p.n, p.r)
        .map(|(b, t)| b * t.c * t.c * t.d / (t.d * t.d - xm * t.c * t.c))
        .sum();
    (p.m * p.m) as f64 * x.powi(p.m as i32 - 1) / 2f64.powi(p.n as i32 - 1) * sum
}

/// Gain `G = H_corr / H_ind` evaluated in its closed form.
pub fn gain(p: &ProtocolPoint) -> Result<f64> {
    check_open_r(p.r)?;
    let (x, r2) = (p.x(), p.r * p.r);
    let xm = x.powi(p.m as i32);
    let sum: f64 = terms(p.n, p.r)
        .map(|(b, t)| {
            let ratio = t.c * t.c / (t.d * t.d);
            b * t.c * t.c / t.d * (1.0 - x * r2) / (1.0 - xm * ratio)
        })
        .sum();
    Ok(p.m as f64 * x.powi(p.m as i32 - 1) / (2f64.powi(p.n as i32 + 1) * r2) * sum)
}

/// `sum_j C(n,j) c_j^2 / d_j / (2^(n+1) r^2)`, the single-use gain at
/// `lambda = 1/2`.
fn half_lambda_sum(n: usize, r: f64) -> f64 {
    let sum: f64 = terms(n, r).map(|(b, t)| b * t.c * t.c / t.d).sum();
    sum / (2f64.powi(n as i32 + 1) * r * r)
}

/// Minimum of the gain over `lambda` at fixed polarization; attained at
/// `lambda = 1/2`. Zero whenever `m > 1`.
pub fn gain_min(n: usize, m: usize, r: f64) -> Result<f64> {
    check_qubits(n)?;
    check_m(n, m)?;
    check_open_r(r)?;
    Ok(if m == 1 { half_lambda_sum(n, r) } else { 0.0 })
}

/// Maximum of the gain over `lambda`, the `lambda -> 0` limit.
pub fn gain_max(n: usize, m: usize, r: f64) -> Result<f64> {
    check_qubits(n)?;
    check_m(n, m)?;
    check_open_r(r)?;
    let r2 = r * r;
    let sum: f64 = terms(n, r)
        .map(|(b, t)| {
            let ratio = t.c * t.c / (t.d * t.d);
            b * t.c * t.c / t.d * (1.0 - r2) / (1.0 - ratio)
        })
        .sum();
    Ok(m as f64 / (2f64.powi(n as i32 + 1) * r2) * sum)
}

/// `G -> m n x^(m-1)` as `r -> 0`.
pub fn gain_limit_r0(n: usize, m: usize, lambda: f64) -> Result<f64> {
    check_qubits(n)?;
    check_m(n, m)?;
    check_lambda(lambda)?;
    let x = (1.0 - 2.0 * lambda).powi(2);
    Ok((m * n) as f64 * x.powi(m as i32 - 1))
}

/// `G -> m x^(m-1) (1 - x) / (1 - x^m)` as `r -> 1`. Undefined at
/// `lambda in {0, 1}`.
pub fn gain_limit_r1(m: usize, lambda: f64) -> Result<f64> {
    crate::qfi::check_invocations(m)?;
    check_lambda(lambda)?;
    if lambda == 0.0 || lambda == 1.0 {
        return Err(Error::PureStateCorner);
    }
    let x = (1.0 - 2.0 * lambda).powi(2);
    Ok(m as f64 * x.powi(m as i32 - 1) * (1.0 - x) / (1.0 - x.powi(m as i32)))
}

/// Two-qubit gain
/// `2m x^(m-1) (1+r^2) (1 - x r^2) / ((1+r^2)^2 - 4 r^2 x^m)`.
pub fn gain_two_qubit(m: usize, r: f64, lambda: f64) -> Result<f64> {
    check_m(2, m)?;
    check_open_r(r)?;
    check_lambda(lambda)?;
    let (x, r2) = ((1.0 - 2.0 * lambda).powi(2), r * r);
    let s = 1.0 + r2;
    Ok(2.0 * m as f64 * x.powi(m as i32 - 1) * s * (1.0 - x * r2)
        / (s * s - 4.0 * r2 * x.powi(m as i32)))
}

/// Polarizations in `(0, 1)` where the two-qubit gain is stationary in `r`.
///
/// With `s = r^2` and `nu = (1 - 2 lambda)^2`, the stationarity condition is
/// `(4 nu^(m+1) - 1 - nu) s^2 - 2 (1 + nu) s + (4 nu^m - 1 - nu) = 0`.
pub fn stationary_polarizations(m: usize, lambda: f64) -> Result<Vec<f64>> {
    crate::qfi::check_invocations(m)?;
    check_lambda(lambda)?;
    if lambda == 0.5 {
        return Err(Error::Parameter {
            name: "lambda",
            value: lambda,
            constraint: "lambda != 1/2",
        });
    }
    let nu = (1.0 - 2.0 * lambda).powi(2);
    let num = nu.powi(m as i32);
    let a = 4.0 * num * nu - 1.0 - nu;
    let b = -2.0 * (1.0 + nu);
    let c = 4.0 * num - 1.0 - nu;
    let mut roots_s = Vec::new();
    if a.abs() < 1e-14 {
        roots_s.push(-c / b);
    } else {
        // b^2 - 4ac = 16 [(1+nu)^2 nu^m - 4 nu^(2m+1)]
        let disc = (1.0 + nu).powi(2) * num - 4.0 * num * num * nu;
        if disc >= 0.0 {
            let q = -0.5 * (b - 4.0 * disc.sqrt());
            roots_s.push(q / a);
            if q != 0.0 {
                roots_s.push(c / q);
            }
        }
    }
    let mut roots: Vec<f64> = roots_s
        .into_iter()
        .filter(|s| s.is_finite() && *s > 0.0 && *s < 1.0)
        .map(f64::sqrt)
        .collect();
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    Ok(roots)
}

/// Largest `lambda` for which the small-polarization gain reaches `n`:
/// `(1 - m^(-1/(2m-2))) / 2`.
pub fn lambda_threshold_gain_n(m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::Parameter {
            name: "m",
            value: m as f64,
            constraint: "m >= 2",
        });
    }
    let m = m as f64;
    Ok(0.5 * (1.0 - m.powf(-1.0 / (2.0 * m - 2.0))))
}

/// Phase-flip parameter after evolving for `t` with dephasing time `t2`.
pub fn lambda_from_t2(t: f64, t2: f64) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Parameter {
            name: "t",
            value: t,
            constraint: "t >= 0",
        });
    }
    if !(t2.is_finite() && t2 > 0.0) {
        return Err(Error::Parameter {
            name: "T2",
            value: t2,
            constraint: "T2 > 0",
        });
    }
    Ok(-0.5 * (-t / t2).exp_m1())
}

/// Independent and correlated QFIs, their ratio and the absolute bound at
/// one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolEval {
    pub h_ind: f64,
    pub h_corr: f64,
    /// `None` at `r = 0`.
    pub gain: Option<f64>,
    /// `None` at `lambda in {0, 1}`.
    pub bound: Option<f64>,
}

pub fn evaluate(p: &ProtocolPoint) -> Result<ProtocolEval> {
    let h_ind = qfi_independent_opt(p.r, p.lambda, p.m)?;
    let h_corr = qfi_correlated(p);
    let gain = if p.r > 0.0 { Some(gain(p)?) } else { None };
    let bound = crate::qfi::qfi_upper_bound(p.lambda, p.m).ok();
    Ok(ProtocolEval {
        h_ind,
        h_corr,
        gain,
        bound,
    })
}
