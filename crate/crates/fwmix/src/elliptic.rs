//! Elliptic special-function kernel: complete/incomplete integrals of the
//! first and third kind and the Jacobi sn/cn pair.
//!
//! Convention: the argument `p` is the *modulus* k, not the parameter m = k².
//! This matches the propagation solutions' sn[κ′z; p] usage, where p → 1
//! degenerates sn → tanh. Libraries differ here (SciPy and Mathematica take
//! m = k²); every function in this module takes the modulus.
//!
//! K is computed by the arithmetic-geometric mean, F and Π through the
//! Carlson symmetric forms R_F and R_J, and sn/cn by the descending Landen
//! (AGM) recursion with an amplitude back-substitution.

use crate::error::{Error, Result};
use std::f64::consts::FRAC_PI_2;

/// Landen/AGM termination: pair difference below this (relative) stops.
const AGM_TOL: f64 = 1e-15;
/// Hard cap on AGM/Landen iterations.
const AGM_MAX_ITER: usize = 40;
/// Moduli above 1 - 1e-12 are routed to the p = 1 closed forms.
const NEAR_ONE: f64 = 1.0 - 1e-12;

/// Validated elliptic modulus, 0 <= p < 1 (p = 1 only via the degenerate
/// sn → tanh fast path, which `jacobi_sn_cn` handles directly).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticModulus(f64);

impl EllipticModulus {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::Domain(format!("modulus p = {p} outside [0, 1)")));
        }
        Ok(EllipticModulus(p))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Complete elliptic integral of the first kind K(p), AGM method.
pub fn complete_k(p: f64) -> Result<f64> {
    if p < 0.0 || !p.is_finite() {
        return Err(Error::Domain(format!("modulus p = {p} < 0")));
    }
    if p >= 1.0 {
        return Err(Error::EllipticDivergence(p));
    }
    let mut a = 1.0;
    // complementary modulus via (1-p)(1+p) keeps accuracy as p -> 1
    let mut b = ((1.0 - p) * (1.0 + p)).sqrt();
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() < AGM_TOL * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    Ok(FRAC_PI_2 / a)
}

/// Incomplete elliptic integral of the first kind F(γ, p) on 0 ≤ γ ≤ π/2.
pub fn incomplete_f(gamma: f64, p: f64) -> Result<f64> {
    check_gamma_p(gamma, p)?;
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let s = gamma.sin();
    let c = gamma.cos();
    Ok(s * carlson_rf(c * c, (1.0 - p * s) * (1.0 + p * s), 1.0)?)
}

/// Incomplete elliptic integral of the third kind
/// Π(γ, n, p) = ∫₀^γ dθ / ((1 − n sin²θ) √(1 − p² sin²θ)).
pub fn incomplete_pi(gamma: f64, n_char: f64, p: f64) -> Result<f64> {
    check_gamma_p(gamma, p)?;
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let s = gamma.sin();
    let c = gamma.cos();
    let ns2 = n_char * s * s;
    if ns2 >= 1.0 {
        return Err(Error::PiPole(ns2));
    }
    let f = s * carlson_rf(c * c, (1.0 - p * s) * (1.0 + p * s), 1.0)?;
    if n_char == 0.0 {
        return Ok(f);
    }
    let rj = carlson_rj(c * c, (1.0 - p * s) * (1.0 + p * s), 1.0, 1.0 - ns2)?;
    Ok(f + n_char / 3.0 * s * s * s * rj)
}

/// Jacobi elliptic (sn, cn) at argument u, modulus p ∈ [0, 1].
///
/// p = 0 gives (sin u, cos u); p ≥ 1 − 1e-12 routes to (tanh u, sech u).
pub fn jacobi_sn_cn(u: f64, p: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("modulus p = {p} outside [0, 1]")));
    }
    if p == 0.0 {
        return Ok((u.sin(), u.cos()));
    }
    if p >= NEAR_ONE {
        return Ok((u.tanh(), 1.0 / u.cosh()));
    }
    // descending Landen: a_{i+1} = (a_i+b_i)/2, b_{i+1} = sqrt(a_i b_i)
    let mut a = [0.0; AGM_MAX_ITER + 1];
    let mut c = [0.0; AGM_MAX_ITER + 1];
    a[0] = 1.0;
    c[0] = p;
    let mut b = ((1.0 - p) * (1.0 + p)).sqrt();
    let mut n = 0;
    while n < AGM_MAX_ITER {
        if c[n].abs() < AGM_TOL * a[n] {
            break;
        }
        let an = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        n += 1;
        a[n] = an;
    }
    // amplitude back-recursion
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for i in (1..=n).rev() {
        let t = (c[i] / a[i] * phi.sin()).clamp(-1.0, 1.0);
        phi = 0.5 * (phi + t.asin());
    }
    Ok((phi.sin(), phi.cos()))
}

fn check_gamma_p(gamma: f64, p: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_2 + 1e-12).contains(&gamma) {
        return Err(Error::Domain(format!("amplitude gamma = {gamma} outside [0, pi/2]")));
    }
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Domain(format!("modulus p = {p} outside [0, 1)")));
    }
    Ok(())
}

/// Carlson symmetric integral R_F(x, y, z), duplication algorithm.
pub(crate) fn carlson_rf(x: f64, y: f64, z: f64) -> Result<f64> {
    const ERRTOL: f64 = 1e-3;
    const TINY: f64 = 1e-300;
    if x.min(y).min(z) < 0.0 || (x + y).min(x + z).min(y + z) < TINY {
        return Err(Error::Domain("R_F requires nonnegative args, at most one zero".into()));
    }
    let (mut xt, mut yt, mut zt) = (x, y, z);
    let mut ave;
    let (mut dx, mut dy, mut dz);
    loop {
        let sx = xt.sqrt();
        let sy = yt.sqrt();
        let sz = zt.sqrt();
        let lam = sx * (sy + sz) + sy * sz;
        xt = 0.25 * (xt + lam);
        yt = 0.25 * (yt + lam);
        zt = 0.25 * (zt + lam);
        ave = (xt + yt + zt) / 3.0;
        dx = (ave - xt) / ave;
        dy = (ave - yt) / ave;
        dz = (ave - zt) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()) < ERRTOL {
            break;
        }
    }
    let e2 = dx * dy - dz * dz;
    let e3 = dx * dy * dz;
    Ok((1.0 + (e2 / 24.0 - 0.1 - 3.0 * e3 / 44.0) * e2 + e3 / 14.0) / ave.sqrt())
}

/// Carlson degenerate integral R_C(x, y), y > 0 branch.
fn carlson_rc(x: f64, y: f64) -> Result<f64> {
    const ERRTOL: f64 = 1e-3;
    if x < 0.0 || y <= 0.0 {
        return Err(Error::Domain("R_C requires x >= 0, y > 0".into()));
    }
    let (mut xt, mut yt) = (x, y);
    let mut ave;
    let mut s;
    loop {
        let lam = 2.0 * (xt * yt).sqrt() + yt;
        xt = 0.25 * (xt + lam);
        yt = 0.25 * (yt + lam);
        ave = (xt + 2.0 * yt) / 3.0;
        s = (yt - ave) / ave;
        if s.abs() < ERRTOL {
            break;
        }
    }
    Ok((1.0 + s * s * (0.3 + s * (1.0 / 7.0 + s * (0.375 + s * 9.0 / 22.0)))) / ave.sqrt())
}

/// Carlson symmetric integral R_J(x, y, z, w), duplication algorithm.
/// Only the w > 0 branch is needed here (pole crossings are rejected upstream).
pub(crate) fn carlson_rj(x: f64, y: f64, z: f64, w: f64) -> Result<f64> {
    const ERRTOL: f64 = 1e-3;
    const TINY: f64 = 1e-300;
    if x.min(y).min(z) < 0.0 || (x + y).min(x + z).min(y + z).min(w.abs()) < TINY {
        return Err(Error::Domain("R_J requires nonnegative x,y,z, at most one zero".into()));
    }
    if w <= 0.0 {
        return Err(Error::Domain("R_J negative-w branch unsupported".into()));
    }
    let (mut xt, mut yt, mut zt, mut wt) = (x, y, z, w);
    let mut sum = 0.0;
    let mut fac = 1.0;
    let mut ave;
    let (mut dx, mut dy, mut dz, mut dw);
    loop {
        let sx = xt.sqrt();
        let sy = yt.sqrt();
        let sz = zt.sqrt();
        let lam = sx * (sy + sz) + sy * sz;
        let alpha = (wt * (sx + sy + sz) + sx * sy * sz).powi(2);
        let beta = wt * (wt + lam).powi(2);
        sum += fac * carlson_rc(alpha, beta)?;
        fac *= 0.25;
        xt = 0.25 * (xt + lam);
        yt = 0.25 * (yt + lam);
        zt = 0.25 * (zt + lam);
        wt = 0.25 * (wt + lam);
        ave = (xt + yt + zt + 2.0 * wt) / 5.0;
        dx = (ave - xt) / ave;
        dy = (ave - yt) / ave;
        dz = (ave - zt) / ave;
        dw = (ave - wt) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()).max(dw.abs()) < ERRTOL {
            break;
        }
    }
    let ea = dx * (dy + dz) + dy * dz;
    let eb = dx * dy * dz;
    let ec = dw * dw;
    let ed = ea - 3.0 * ec;
    let ee = eb + 2.0 * dw * (ea - ec);
    let series = 1.0 + ed * (-3.0 / 14.0 + 9.0 / 88.0 * ed - 4.5 / 26.0 * ee)
        + eb * (1.0 / 6.0 + dw * (-3.0 / 11.0 + dw / 3.0))
        + dw * ea * (1.0 / 3.0 - 3.0 / 22.0 * dw)
        - dw * ec / 3.0;
    Ok(3.0 * sum + fac * series / (ave * ave.sqrt()))
}

/// Identity-suite report for the `selftest` CLI path.
#[derive(Debug, Clone, Default)]
pub struct KernelSelftest {
    pub max_sn_cn_identity: f64,
    pub max_f_inverse: f64,
    pub max_pi_reduction: f64,
    pub k_zero_error: f64,
}

/// Runs the deterministic identity suites and returns max errors.
pub fn kernel_selftest(samples: &[(f64, f64)]) -> Result<KernelSelftest> {
    let mut r = KernelSelftest {
        k_zero_error: (complete_k(0.0)? - FRAC_PI_2).abs(),
        ..Default::default()
    };
    for &(t, p) in samples {
        let k = complete_k(p)?;
        let u = t * k; // t in [0,1)
        let (sn, cn) = jacobi_sn_cn(u, p)?;
        r.max_sn_cn_identity = r.max_sn_cn_identity.max((sn * sn + cn * cn - 1.0).abs());
        if p < NEAR_ONE {
            let back = incomplete_f(sn.clamp(-1.0, 1.0).asin().abs(), p)?;
            r.max_f_inverse = r.max_f_inverse.max((back - u.abs()).abs());
        }
        let gamma = t * FRAC_PI_2;
        let dpi = (incomplete_pi(gamma, 0.0, p)? - incomplete_f(gamma, p)?).abs();
        r.max_pi_reduction = r.max_pi_reduction.max(dpi);
    }
    Ok(r)
}
