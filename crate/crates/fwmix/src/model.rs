//! Physical parameters and point-wise atomic quantities: Rabi frequencies,
//! detunings, the eigenvalue cubic of the three-level interaction
//! Hamiltonian, and the adiabatic dressed state of the two-photon-driven
//! 1–2 subsystem.
//!
//! Units: rates in rad/s, photon fluxes in cm⁻²s⁻¹, two-photon coupling μ₁
//! and Stark coefficients β₂ⱼ in cm², single-photon couplings μ₂, μ₃ in
//! cm²s⁻¹, densities in cm⁻³, wavelengths in nm. Dimensionless presets are
//! expressed through caption ratios so absolute unit choices cancel.

use crate::error::{Error, Result};

/// Medium description: coupling constants, Stark coefficients, detunings,
/// density, residual mismatch and carrier wavelengths.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicParams {
    /// Two-photon coupling constant, cm² (Ω₁ = μ₁η₁).
    pub mu1: f64,
    /// Single-photon coupling of the idler transition, cm²·s⁻¹.
    pub mu2: f64,
    /// Single-photon coupling of the generated transition, cm²·s⁻¹.
    pub mu3: f64,
    /// ac Stark coefficients of state |2⟩ from the ω₁, ω₂, ω₃ fields, cm².
    pub beta21: f64,
    pub beta22: f64,
    pub beta23: f64,
    /// Static one-photon detuning ω₃ − ω₃₁, rad/s.
    pub delta30: f64,
    /// Static two-photon detuning 2ω₁ − ω₂₁, rad/s.
    pub delta20: f64,
    /// Active-atom number density, cm⁻³.
    pub density_n: f64,
    /// Residual mismatch per density Δk/N, cm²; q = 2Δk/N.
    pub dk_over_n: f64,
    /// Carrier wavelengths of pump, idler, generated fields, nm.
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

impl AtomicParams {
    /// Validates positivity and the multiphoton-resonance arithmetic.
    pub fn validate(&self) -> Result<()> {
        if self.mu1 <= 0.0 || self.mu2 <= 0.0 || self.mu3 <= 0.0 {
            return Err(Error::Domain("couplings mu1, mu2, mu3 must be positive".into()));
        }
        if self.density_n <= 0.0 {
            return Err(Error::Domain("density must be positive".into()));
        }
        if self.delta30 == 0.0 {
            return Err(Error::Domain("delta30 must be nonzero".into()));
        }
        let inv3 = 1.0 / self.lambda3;
        let resid = (inv3 - (2.0 / self.lambda1 - 1.0 / self.lambda2)).abs() / inv3;
        if resid >= 1e-3 {
            return Err(Error::Domain(format!(
                "wavelengths violate multiphoton resonance: relative residual {resid:.2e}"
            )));
        }
        Ok(())
    }

    /// Rotating-wave / three-level-model validity: min(μ₂,μ₃)/μ₁ ≫ |δ₃₀|.
    /// Returns false (a warning, not an error) when the 10× margin fails.
    /// The Kr preset's figure-normalized δ₃₀ sits at 5.0× and trips this.
    pub fn model_validity_ok(&self) -> bool {
        self.mu2.min(self.mu3) / self.mu1 > 10.0 * self.delta30.abs()
    }

    /// q = 2Δk/N, cm².
    pub fn q(&self) -> f64 {
        2.0 * self.dk_over_n
    }

    /// ω₂/ω₁ from the preset wavelengths.
    pub fn omega2_over_omega1(&self) -> f64 {
        self.lambda1 / self.lambda2
    }

    /// ω₃/ω₁ with ω₃ ≡ 2ω₁ − ω₂ (exact multiphoton resonance; the listed
    /// λ₃ is display-rounded at the 2e-4 level).
    pub fn omega3_over_omega1(&self) -> f64 {
        2.0 - self.lambda1 / self.lambda2
    }
}

/// Kr coupling scheme: |1⟩ = 4p⁶ ¹S, |2⟩ = 4p⁵5p[0,1/2], |3⟩ = 4p⁵5s[1,1/2].
/// Pump 212.55 nm (two-photon), idler 759 nm, generated 123.6 nm.
///
/// δ₃₀ defaults to μ₂/(40μ₁) so that μ₂/(2μ₁δ₃₀) = 20, the figure
/// normalization; δ₂₀ defaults to 0 (half-SCRAP) and N to 10¹³ cm⁻³.
/// Both are caller-set knobs.
pub fn kr_preset() -> AtomicParams {
    let mu1 = 1.8e-16;
    let mu2 = 3.507e-2;
    AtomicParams {
        mu1,
        mu2,
        mu3: 0.441e-2,
        beta21: 3.7e-17,
        beta22: 2.2e-17,
        beta23: 6.4e-17,
        delta30: mu2 / (40.0 * mu1),
        delta20: 0.0,
        density_n: 1e13,
        dk_over_n: 4.8e-17,
        lambda1: 212.55,
        lambda2: 759.0,
        lambda3: 123.6,
    }
}

/// Instantaneous field state: photon fluxes and the relative phase
/// φ = 2φ₁ − φ₂ − φ₃ − Δk·z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPoint {
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
    pub phi: f64,
}

impl FieldPoint {
    pub fn new(eta1: f64, eta2: f64, eta3: f64, phi: f64) -> Result<Self> {
        if eta1 < 0.0 || eta2 < 0.0 || eta3 < 0.0 {
            return Err(Error::Domain("photon fluxes must be non-negative".into()));
        }
        Ok(FieldPoint { eta1, eta2, eta3, phi })
    }
}

/// Adiabatic dressed state of the pump-driven 1–2 subsystem at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedState {
    /// Eigenvalue λ₀ = −Δ₂/2 + √(Δ₂² + 4Ω₁²)/2, rad/s.
    pub lambda0: f64,
    /// Real amplitudes on |1⟩ and |2⟩ (signed; ρ₁₂ stores the magnitude).
    pub c1: f64,
    pub c2: f64,
    /// Coherence ρ₁₂ = |c₁c₂|, in [0, 1/2].
    pub rho12: f64,
}

/// Two-photon Rabi frequency Ω₁ = μ₁η₁ (proportional to intensity).
pub fn rabi_two_photon(p: &AtomicParams, eta1: f64) -> Result<f64> {
    if eta1 < 0.0 {
        return Err(Error::Domain(format!("pump flux {eta1} < 0")));
    }
    Ok(p.mu1 * eta1)
}

/// Single-photon Rabi frequency Ω_j = √(μ_j η_j).
pub fn rabi_single_photon(mu_j: f64, eta_j: f64) -> Result<f64> {
    if mu_j < 0.0 || eta_j < 0.0 {
        return Err(Error::Domain(format!("rabi_single_photon({mu_j}, {eta_j}): negative input")));
    }
    Ok((mu_j * eta_j).sqrt())
}

/// Detuning Δ_n = δ_{n0} + S_n + Σⱼ β_{nj} η_j for n ∈ {2, 3}.
///
/// Level |3⟩ carries no printed Stark coefficients (β₃ⱼ default to 0), so
/// for n = 3 only δ₃₀ and the caller-supplied shift enter.
pub fn detuning(p: &AtomicParams, n: u8, stark_shift: f64, eta: &FieldPoint) -> Result<f64> {
    match n {
        2 => Ok(p.delta20
            + stark_shift
            + p.beta21 * eta.eta1
            + p.beta22 * eta.eta2
            + p.beta23 * eta.eta3),
        3 => Ok(p.delta30 + stark_shift),
        _ => Err(Error::InvalidLevel(n)),
    }
}

/// All real roots of the characteristic eigenvalue cubic
/// λ(Δ₂+λ)(Δ₃+λ) − (Ω₁²+Ω₂²+Ω₃²)λ − Ω₁²Δ₃ − Ω₃²Δ₂ + 2Ω₁Ω₂Ω₃cos φ = 0,
/// ascending. The Hamiltonian is Hermitian, so all three roots are real
/// for physical inputs; degenerate cases collapse to fewer entries.
pub fn eigenvalue_cubic(
    d2: f64,
    d3: f64,
    om1: f64,
    om2: f64,
    om3: f64,
    phi: f64,
) -> Result<Vec<f64>> {
    if om1 < 0.0 || om2 < 0.0 || om3 < 0.0 {
        return Err(Error::Domain("Rabi frequencies must be non-negative".into()));
    }
    let b = d2 + d3;
    let c = d2 * d3 - (om1 * om1 + om2 * om2 + om3 * om3);
    let d = -om1 * om1 * d3 - om3 * om3 * d2 + 2.0 * om1 * om2 * om3 * phi.cos();
    Ok(solve_cubic_real(b, c, d))
}

/// Real roots of λ³ + bλ² + cλ + d, trigonometric/Cardano closed form with
/// one Newton polish per root, ascending.
pub fn solve_cubic_real(b: f64, c: f64, d: f64) -> Vec<f64> {
    // depressed cubic t^3 + pt + q with λ = t − b/3
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = d - b * c / 3.0 + 2.0 * b * b * b / 27.0;
    let disc = -(4.0 * p * p * p + 27.0 * q * q);
    let mut roots = if disc > 0.0 {
        // three distinct real roots, trigonometric form
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() - shift)
            .collect::<Vec<_>>()
    } else {
        // one real root (or multiple-root edge), Cardano
        let half_q = 0.5 * q;
        let r = (half_q * half_q + p * p * p / 27.0).max(0.0).sqrt();
        let u = (-half_q + r).cbrt();
        let v = (-half_q - r).cbrt();
        let t0 = u + v;
        let mut rs = vec![t0 - shift];
        if disc.abs() <= 1e-12 * (p * p * p).abs().max(q * q) {
            // nearly multiple root t = -t0/2 (double)
            rs.push(-0.5 * t0 - shift);
        }
        rs
    };
    // one Newton polish per root against the undepressed cubic
    let f = |x: f64| ((x + b) * x + c) * x + d;
    let fp = |x: f64| (3.0 * x + 2.0 * b) * x + c;
    for r in roots.iter_mut() {
        let deriv = fp(*r);
        if deriv.abs() > 0.0 {
            let step = f(*r) / deriv;
            if step.is_finite() {
                *r -= step;
            }
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * (a.abs() + b.abs()).max(1e-300));
    roots
}

/// Adiabatic dressed state that asymptotically connects to |1⟩ when
/// Δ₂ → +∞: λ₀ = −Δ₂/2 + √(Δ₂²+4Ω₁²)/2,
/// (c₁, c₂) = (Ω₁, −λ₀)/√(λ₀²+Ω₁²).
pub fn dressed_state(d2: f64, om1: f64) -> Result<DressedState> {
    if om1 < 0.0 {
        return Err(Error::Domain(format!("Omega1 = {om1} < 0")));
    }
    if om1 == 0.0 {
        if d2 > 0.0 {
            return Ok(DressedState { lambda0: 0.0, c1: 1.0, c2: 0.0, rho12: 0.0 });
        }
        return Err(Error::DegenerateBranch(d2));
    }
    let w = (d2 * d2 + 4.0 * om1 * om1).sqrt();
    let lambda0 = 0.5 * (-d2 + w);
    let norm = (lambda0 * lambda0 + om1 * om1).sqrt();
    let c1 = om1 / norm;
    let c2 = -lambda0 / norm;
    Ok(DressedState { lambda0, c1, c2, rho12: (c1 * c2).abs() })
}
