//! Analytic ground truth: Bessel-based disk spectra, rectangle spectra and
//! the closed-form test-function upper bound for the wheel's first
//! nontrivial eigenvalue.

use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("no sign change found for J'_{k} zero #{m} within the scan range")]
    BracketNotFound { k: u32, m: u32 },
}

/// Bessel function of the first kind `J_k(x)` for integer order `k >= 0`.
///
/// Power series for small arguments, downward (Miller) recurrence
/// normalised by `J_0 + 2 J_2 + 2 J_4 + ... = 1` elsewhere. Absolute error
/// below 1e-12 for `x <= 50`.
pub fn bessel_j(k: u32, x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x <= (12.0f64).max(2.0 * k as f64) {
        bessel_j_series(k, x)
    } else {
        bessel_j_miller(k, x)
    }
}

fn bessel_j_series(k: u32, x: f64) -> f64 {
    // J_k(x) = sum_m (-1)^m / (m! (m+k)!) (x/2)^{2m+k}
    let half = x / 2.0;
    let mut term = 1.0;
    for i in 1..=k {
        term *= half / i as f64;
    }
    let mut sum = term;
    let h2 = half * half;
    for m in 1..200 {
        term *= -h2 / (m as f64 * (m + k) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-30) {
            break;
        }
    }
    sum
}

fn bessel_j_miller(k: u32, x: f64) -> f64 {
    // start the downward recurrence well above both the order and argument
    let start = ((x + 15.0 + 2.0 * x.sqrt()) as usize).max(k as usize + 20);
    let start = if start % 2 == 0 { start } else { start + 1 };
    let mut jp = 0.0f64; // J_{n+1}
    let mut j = 1e-30f64; // J_n (arbitrary scale)
    let mut norm = 0.0f64;
    let mut result = 0.0f64;
    for n in (0..=start).rev() {
        let jm = (2.0 * (n + 1) as f64 / x) * j - jp; // J_n from J_{n+1}, J_{n+2}
        jp = j;
        j = jm;
        if n % 2 == 0 {
            norm += if n == 0 { j } else { 2.0 * j };
        }
        if n == k as usize {
            result = j;
        }
        // rescale to avoid overflow
        if j.abs() > 1e250 {
            jp /= 1e250;
            j /= 1e250;
            norm /= 1e250;
            result /= 1e250;
        }
    }
    result / norm
}

/// Derivative `J_k'(x) = (J_{k-1}(x) - J_{k+1}(x)) / 2`, with `J_{-1} = -J_1`.
pub fn bessel_j_deriv(k: u32, x: f64) -> f64 {
    if k == 0 {
        -bessel_j(1, x)
    } else {
        0.5 * (bessel_j(k - 1, x) - bessel_j(k + 1, x))
    }
}

/// The m-th positive zero `j'_{k,m}` of `J_k'`, with the convention
/// `j'_{0,1} = 0` (the constant disk mode).
pub fn bessel_deriv_zero(k: u32, m: u32) -> Result<f64, OracleError> {
    assert!(m >= 1);
    let mut want = m;
    if k == 0 {
        if m == 1 {
            return Ok(0.0);
        }
        want = m - 1; // skip the conventional zero at the origin
    }
    // sign scan with step 0.1, then bisection
    let step = 0.1;
    let mut x0 = 1e-3;
    let mut f0 = bessel_j_deriv(k, x0);
    let mut found = 0u32;
    let mut x = x0;
    while x < 120.0 {
        x += step;
        let f = bessel_j_deriv(k, x);
        if f0 != 0.0 && f.signum() != f0.signum() {
            found += 1;
            if found == want {
                let (mut lo, mut hi) = (x0, x);
                let mut flo = f0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let fm = bessel_j_deriv(k, mid);
                    if fm.signum() == flo.signum() {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-14 {
                        break;
                    }
                }
                return Ok(0.5 * (lo + hi));
            }
        }
        x0 = x;
        f0 = f;
    }
    Err(OracleError::BracketNotFound { k, m })
}

/// One Neumann eigenvalue of the unit-scale disk Laplacian in separated form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskMode {
    /// Angular order of the mode `J_k(sqrt(mu) r) e^{i k theta}`.
    pub k: u32,
    /// Radial index (1-based zero count of `J_k'`).
    pub m: u32,
    pub mu: f64,
    /// 1 for `k = 0`, otherwise 2 (the `e^{±ik theta}` pair).
    pub multiplicity: u32,
    /// Rotation by pi multiplies `e^{ik theta}` by `(-1)^k`.
    pub even: bool,
}

/// The `count` smallest Neumann disk eigenvalues, expanded by multiplicity
/// and sorted ascending.
pub fn disk_spectrum(radius: f64, count: usize) -> Vec<DiskMode> {
    let mut modes = Vec::new();
    let kmax = 2 * count as u32 + 4;
    for k in 0..=kmax.min(40) {
        for m in 1..=(count as u32 + 2) {
            let z = match bessel_deriv_zero(k, m) {
                Ok(z) => z,
                Err(_) => break,
            };
            let mu = (z / radius) * (z / radius);
            modes.push(DiskMode { k, m, mu, multiplicity: if k == 0 { 1 } else { 2 }, even: k % 2 == 0 });
        }
    }
    modes.sort_by(|a, b| a.mu.total_cmp(&b.mu));
    let mut out = Vec::with_capacity(count);
    for mode in modes {
        for _ in 0..mode.multiplicity {
            out.push(mode);
            if out.len() == count {
                return out;
            }
        }
    }
    out
}

/// The `count` smallest Neumann eigenvalues of the rectangle `(-a,a)x(-b,b)`,
/// `mu = (m pi / 2a)^2 + (n pi / 2b)^2`, expanded over the `(m, n)` grid.
/// Parity under rotation by pi is even iff `m + n` is even.
pub fn rectangle_spectrum(a: f64, b: f64, count: usize) -> Vec<(f64, bool)> {
    let mut out = Vec::new();
    let nmax = (count + 4) as u32;
    for m in 0..=nmax {
        for n in 0..=nmax {
            let mu = (m as f64 * PI / (2.0 * a)).powi(2) + (n as f64 * PI / (2.0 * b)).powi(2);
            out.push((mu, (m + n) % 2 == 0));
        }
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out.truncate(count);
    out
}

/// The closed-form Rayleigh-quotient upper bound for the wheel's first
/// nontrivial eigenvalue, built from the piecewise test function that is
/// `-c1` on the hub, `c2` on the tire and radially linear in the passages.
///
/// All passage contributions are integrated exactly rather than bounded.
#[derive(Debug, Clone, Copy)]
pub struct Step1Bound {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub eps: f64,
    /// `1 / |hub|`
    pub c1: f64,
    /// `1 / |tire|`
    pub c2: f64,
    /// `∫ |grad phi|^2` (supported on the passages)
    pub numerator: f64,
    /// `∫ phi^2 - (∫ phi)^2 / |Ω|`
    pub denominator: f64,
    pub value: f64,
}

pub fn step1_upper_bound(r1: f64, r2: f64, r3: f64, eps: f64) -> Step1Bound {
    let hub = PI * r1 * r1;
    let tire = PI * (r3 * r3 - r2 * r2);
    let c1 = 1.0 / hub;
    let c2 = 1.0 / tire;
    let slope = (c1 + c2) / (r2 - r1);

    let numerator = 2.0 * eps * (c1 + c2) * (c1 + c2) * (r2 + r1) / (r2 - r1);

    // radial moments over one passage cross-section [r1, r2]
    let p1 = (r2 * r2 - r1 * r1) / 2.0; // ∫ r dr
    let p2 = (r2.powi(3) - r1.powi(3)) / 3.0 - r1 * p1; // ∫ (r - r1) r dr
    let p3 = (r2.powi(4) - r1.powi(4)) / 4.0 - 2.0 * r1 * (r2.powi(3) - r1.powi(3)) / 3.0
        + r1 * r1 * p1; // ∫ (r - r1)^2 r dr

    // both passages carry total angle 4 eps
    let int_phi = 4.0 * eps * (-c1 * p1 + slope * p2);
    let int_phi2 = c1 * c1 * hub
        + c2 * c2 * tire
        + 4.0 * eps * (c1 * c1 * p1 - 2.0 * c1 * slope * p2 + slope * slope * p3);
    let area = hub + tire + 4.0 * eps * p1;

    let denominator = int_phi2 - int_phi * int_phi / area;
    Step1Bound { r1, r2, r3, eps, c1, c2, numerator, denominator, value: numerator / denominator }
}
