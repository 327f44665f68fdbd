//! Time-domain preparation stage: pulse envelopes, adiabatic-following
//! SCRAP / half-SCRAP trajectories of the two-level populations and
//! coherence, and a Schrödinger-equation oracle validating adiabaticity.
//!
//! Everything is dimensionless: times in units of the pump duration T₁,
//! fluxes in units of the pump peak η₁₀ᵐ, rates in units of the peak
//! two-photon Rabi frequency Ω₁₀ᵐ. The single dimensional scale is the
//! product Ω₁₀ᵐT₁ (default 100, safely adiabatic).

use crate::error::{Error, Result};

/// Gaussian envelope peak·exp(−((t−center)/width)²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPulse {
    pub peak: f64,
    pub center: f64,
    pub width: f64,
}

impl GaussianPulse {
    pub fn new(peak: f64, center: f64, width: f64) -> Result<Self> {
        if width <= 0.0 {
            return Err(Error::Domain(format!("pulse width {width} must be positive")));
        }
        if peak < 0.0 {
            return Err(Error::Domain(format!("pulse peak {peak} must be non-negative")));
        }
        Ok(GaussianPulse { peak, center, width })
    }

    pub fn value(&self, t: f64) -> f64 {
        gaussian_envelope(t, self.peak, self.center, self.width)
    }
}

/// peak·exp(−((t−center)/width)²).
pub fn gaussian_envelope(t: f64, peak: f64, center: f64, width: f64) -> f64 {
    let u = (t - center) / width;
    peak * (-u * u).exp()
}

/// Drive configuration for the preparation stage.
///
/// `stark` stores the Stark-pulse peak as the ratio δ₂ᵐ/Ω₁₀ᵐ with positive
/// sign, so Δ₂ is large and positive early and decays (half-SCRAP) or sweeps
/// through zero when δ₂₀ < 0 (full SCRAP).
#[derive(Debug, Clone, PartialEq)]
pub struct PulseConfig {
    /// Pump flux envelope, peak in units of η₁₀ᵐ (normally 1.0), center 0, width T₁ = 1.
    pub pump: GaussianPulse,
    /// Idler flux envelope, peak = η₂₀ᵐ/η₁₀ᵐ.
    pub idler: GaussianPulse,
    /// Stark shift envelope, peak = δ₂ᵐ/Ω₁₀ᵐ.
    pub stark: GaussianPulse,
    /// Static two-photon detuning δ₂₀/Ω₁₀ᵐ (0 for half-SCRAP).
    pub delta20: f64,
    /// Ω₁₀ᵐ·T₁, the adiabaticity scale.
    pub omega10m_t1: f64,
    /// β₂₁/μ₁ and β₂₂/μ₁, the pump and idler Stark-shift ratios.
    pub beta21_over_mu1: f64,
    pub beta22_over_mu1: f64,
}

impl PulseConfig {
    /// Ω₁(τ)/Ω₁₀ᵐ.
    pub fn omega1(&self, tau: f64) -> f64 {
        self.pump.value(tau)
    }

    /// Δ₂(τ)/Ω₁₀ᵐ = δ₂₀ + S₂(τ) + β₂₁η₁(τ) + β₂₂η₂(τ).
    ///
    /// The idler term is retained though it is negligible under the scheme's
    /// operating condition μ₂η₂₀/δ₃₀ ≪ μ₁η₁₀.
    pub fn delta2(&self, tau: f64) -> f64 {
        self.delta20
            + self.stark.value(tau)
            + self.beta21_over_mu1 * self.pump.value(tau)
            + self.beta22_over_mu1 * self.idler.value(tau)
    }

    /// Default sample grid: 2001 points spanning [−4, +4]·T₁, widened to
    /// [−3·T_s, +4] when the Stark pulse is longer than the pump.
    pub fn default_grid(&self) -> Vec<f64> {
        let lo = -(4.0f64).max(3.0 * self.stark.width.max(1.0)).max(-self.stark.center + 2.0 * self.stark.width);
        let hi = 4.0;
        let n = 2001;
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }
}

/// One sample of a preparation trajectory.
#[derive(Debug, Clone, Copy)]
pub struct TrajectorySample {
    pub tau: f64,
    /// Δ₂/Ω₁₀ᵐ and Ω₁/Ω₁₀ᵐ at this instant.
    pub delta2: f64,
    pub omega1: f64,
    pub pop1: f64,
    pub pop2: f64,
    pub rho12: f64,
    /// Local adiabaticity margin gap/(2|dθ/dτ|); large is adiabatic.
    pub margin: f64,
    /// Set when the two-level gap is numerically degenerate at this sample.
    pub flagged: bool,
}

#[derive(Debug, Clone)]
pub struct PreparationTrajectory {
    pub samples: Vec<TrajectorySample>,
}

impl PreparationTrajectory {
    pub fn final_sample(&self) -> &TrajectorySample {
        self.samples.last().expect("non-empty trajectory")
    }

    pub fn max_rho12(&self) -> f64 {
        self.samples.iter().map(|s| s.rho12).fold(0.0, f64::max)
    }

    /// Minimum margin over samples where the gap is at least 10⁻³ of its
    /// maximum. The vanishing-field tail after the pulses has zero gap and
    /// zero coupling; including it would drive the margin to zero without
    /// any physical population transfer.
    pub fn min_margin(&self) -> f64 {
        let max_gap = self
            .samples
            .iter()
            .map(|s| (s.delta2 * s.delta2 + 4.0 * s.omega1 * s.omega1).sqrt())
            .fold(0.0, f64::max);
        self.samples
            .iter()
            .filter(|s| {
                (s.delta2 * s.delta2 + 4.0 * s.omega1 * s.omega1).sqrt() >= 1e-3 * max_gap
            })
            .map(|s| s.margin)
            .fold(f64::INFINITY, f64::min)
    }
}

fn check_grid(cfg: &PulseConfig, grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::Domain("time grid needs at least 2 samples".into()));
    }
    let need_lo = -3.0 * cfg.stark.width.max(1.0);
    if grid[0] > need_lo + 1e-9 || *grid.last().unwrap() < 3.0 - 1e-9 {
        return Err(Error::Domain(format!(
            "grid [{}, {}] must span at least [{need_lo}, 3]",
            grid[0],
            grid.last().unwrap()
        )));
    }
    Ok(())
}

/// Margin samples from the instantaneous (Δ₂, Ω₁) series: gap/(2|dθ/dτ|)
/// with θ = ½·atan2(2Ω₁, Δ₂), finite-differenced on the grid. Rates carry
/// the Ω₁₀ᵐT₁ scale so the result is dimensionless.
fn margins(cfg: &PulseConfig, grid: &[f64]) -> Vec<f64> {
    let omt = cfg.omega10m_t1;
    let theta: Vec<f64> =
        grid.iter().map(|&t| 0.5 * (2.0 * cfg.omega1(t)).atan2(cfg.delta2(t))).collect();
    let gap: Vec<f64> =
        grid.iter().map(|&t| omt * (cfg.delta2(t).hypot(2.0 * cfg.omega1(t)))).collect();
    (0..grid.len())
        .map(|i| {
            let (i0, i1) = if i == 0 {
                (0, 1)
            } else if i == grid.len() - 1 {
                (grid.len() - 2, grid.len() - 1)
            } else {
                (i - 1, i + 1)
            };
            let dth = (theta[i1] - theta[i0]) / (grid[i1] - grid[i0]);
            if dth.abs() < 1e-300 {
                f64::INFINITY
            } else {
                gap[i] / (2.0 * dth.abs())
            }
        })
        .collect()
}

/// Adiabatic-following trajectory: at each sample the instantaneous
/// eigenstate of the two-level (pump + Stark) Hamiltonian, selected by
/// continuity of the state vector from the previous sample.
///
/// Continuity (rather than a fixed eigenvalue branch) is what reproduces
/// full SCRAP: with δ₂₀ < 0 the ground state sits on the lower branch until
/// the first zero-coupling Δ₂ crossing, which is traversed diabatically.
/// Half-SCRAP configs (δ₂₀ = 0, Stark preceding pump) never leave the upper
/// branch and end with ρ₁₂ → 1/2; full-SCRAP configs end with |c₂|² → 1.
pub fn adiabatic_trajectory(cfg: &PulseConfig, grid: &[f64]) -> Result<PreparationTrajectory> {
    check_grid(cfg, grid)?;
    let marg = margins(cfg, grid);
    let mut prev = [1.0, 0.0]; // start in the bare ground state
    let mut max_gap = 0.0f64;
    let mut samples = Vec::with_capacity(grid.len());
    for (i, &tau) in grid.iter().enumerate() {
        let d2 = cfg.delta2(tau);
        let om = cfg.omega1(tau);
        let w = d2.hypot(2.0 * om);
        max_gap = max_gap.max(w);
        let flagged = w < 1e-12 * max_gap.max(1e-300);
        // eigenvectors (om, -lambda)/norm for lambda = (-d2 ± w)/2
        let mut best = prev;
        if !flagged {
            let mut best_ov = -1.0;
            for lam in [0.5 * (-d2 + w), 0.5 * (-d2 - w)] {
                let norm = (lam * lam + om * om).sqrt();
                let v = if norm < 1e-300 * w.max(1.0) {
                    // om = 0: bare states; lambda = 0 -> |1>, lambda = -d2 -> |2>
                    if lam.abs() < 0.5 * w {
                        [1.0, 0.0]
                    } else {
                        [0.0, 1.0]
                    }
                } else {
                    [om / norm, -lam / norm]
                };
                let ov = prev[0] * v[0] + prev[1] * v[1];
                if ov.abs() > best_ov {
                    best_ov = ov.abs();
                    best = if ov >= 0.0 { v } else { [-v[0], -v[1]] };
                }
            }
        }
        prev = best;
        let (c1, c2) = (best[0], best[1]);
        samples.push(TrajectorySample {
            tau,
            delta2: d2,
            omega1: om,
            pop1: c1 * c1,
            pop2: c2 * c2,
            rho12: (c1 * c2).abs(),
            margin: marg[i],
            flagged,
        });
    }
    Ok(PreparationTrajectory { samples })
}

/// Overall adiabaticity margin of a configuration on its default grid;
/// values above 10 flag the preparation as adiabatic.
pub fn adiabaticity_margin(cfg: &PulseConfig) -> f64 {
    let grid = cfg.default_grid();
    let marg = margins(cfg, &grid);
    let omt = cfg.omega10m_t1;
    let gaps: Vec<f64> =
        grid.iter().map(|&t| omt * (cfg.delta2(t).hypot(2.0 * cfg.omega1(t)))).collect();
    let max_gap = gaps.iter().cloned().fold(0.0, f64::max);
    marg.iter()
        .zip(&gaps)
        .filter(|(_, &g)| g >= 1e-3 * max_gap)
        .map(|(&m, _)| m)
        .fold(f64::INFINITY, f64::min)
}

/// Time-dependent Schrödinger oracle: RK4 integration of the two-level
/// amplitude equations in the rotating frame (the interaction Hamiltonian
/// restricted to Ω₂ = Ω₃ = 0), starting from |1⟩ at the grid start.
///
/// The step count doubles until halving changes the final populations by
/// less than 10⁻⁶; failure to converge within the cap is an error.
pub fn tdse_oracle(cfg: &PulseConfig, grid: &[f64]) -> Result<PreparationTrajectory> {
    check_grid(cfg, grid)?;
    // initial step from the peak two-level gap: hW ~ 5e-3 keeps the RK4
    // norm decay (~ nsteps (hW)^6/144) far below the 1e-9 norm budget
    let w_max = grid
        .iter()
        .map(|&t| cfg.omega10m_t1 * cfg.delta2(t).hypot(2.0 * cfg.omega1(t)))
        .fold(1.0, f64::max);
    let dtau = (grid.last().unwrap() - grid[0]) / (grid.len() - 1) as f64;
    let mut steps_per_sample = ((dtau * w_max / 5e-3).ceil() as usize).max(4);
    let mut last: Option<Vec<[f64; 4]>> = None;
    for _ in 0..8 {
        let states = tdse_run(cfg, grid, steps_per_sample);
        let norm_drift = states
            .iter()
            .map(|c| (c[0] * c[0] + c[1] * c[1] + c[2] * c[2] + c[3] * c[3] - 1.0).abs())
            .fold(0.0, f64::max);
        if let Some(prev) = &last {
            let p = prev.last().unwrap();
            let c = states.last().unwrap();
            let dpop = ((p[0] * p[0] + p[1] * p[1]) - (c[0] * c[0] + c[1] * c[1])).abs();
            if dpop < 1e-6 && norm_drift < 5e-10 {
                return Ok(trajectory_from_states(cfg, grid, &states));
            }
        }
        last = Some(states);
        steps_per_sample *= 2;
    }
    Err(Error::RefinementFailure(format!(
        "final populations not converged at {steps_per_sample} steps/sample"
    )))
}

/// State layout [re c1, im c1, re c2, im c2]; H/ħ = −[[0, Ω₁], [Ω₁, Δ₂]]
/// in units of 1/T₁, so dc/dτ = −i·(Ω₁₀ᵐT₁)·H̃·c.
fn tdse_run(cfg: &PulseConfig, grid: &[f64], steps_per_sample: usize) -> Vec<[f64; 4]> {
    let omt = cfg.omega10m_t1;
    let rhs = |t: f64, c: &[f64; 4]| -> [f64; 4] {
        let om = -omt * cfg.omega1(t);
        let d2 = -omt * cfg.delta2(t);
        // m = [[0, om], [om, d2]]; re' = m*im, im' = -m*re
        [
            om * c[3],
            -(om * c[2]),
            om * c[1] + d2 * c[3],
            -(om * c[0] + d2 * c[2]),
        ]
    };
    let mut c = [1.0, 0.0, 0.0, 0.0];
    let mut out = Vec::with_capacity(grid.len());
    out.push(c);
    for w in grid.windows(2) {
        let h = (w[1] - w[0]) / steps_per_sample as f64;
        let mut t = w[0];
        for _ in 0..steps_per_sample {
            let k1 = rhs(t, &c);
            let c2 = add(&c, &k1, 0.5 * h);
            let k2 = rhs(t + 0.5 * h, &c2);
            let c3 = add(&c, &k2, 0.5 * h);
            let k3 = rhs(t + 0.5 * h, &c3);
            let c4 = add(&c, &k3, h);
            let k4 = rhs(t + h, &c4);
            for i in 0..4 {
                c[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            t += h;
        }
        out.push(c);
    }
    out
}

fn add(a: &[f64; 4], k: &[f64; 4], h: f64) -> [f64; 4] {
    [a[0] + h * k[0], a[1] + h * k[1], a[2] + h * k[2], a[3] + h * k[3]]
}

fn trajectory_from_states(
    cfg: &PulseConfig,
    grid: &[f64],
    states: &[[f64; 4]],
) -> PreparationTrajectory {
    let marg = margins(cfg, grid);
    let samples = grid
        .iter()
        .zip(states)
        .zip(&marg)
        .map(|((&tau, c), &margin)| {
            let p1 = c[0] * c[0] + c[1] * c[1];
            let p2 = c[2] * c[2] + c[3] * c[3];
            // |c1 c2*|
            let re = c[0] * c[2] + c[1] * c[3];
            let im = c[1] * c[2] - c[0] * c[3];
            TrajectorySample {
                tau,
                delta2: cfg.delta2(tau),
                omega1: cfg.omega1(tau),
                pop1: p1,
                pop2: p2,
                rho12: re.hypot(im),
                margin,
                flagged: false,
            }
        })
        .collect();
    PreparationTrajectory { samples }
}

/// Half-SCRAP preparation preset (the permanent-coherence configuration):
/// δ₂₀ = 0, Stark pulse preceding the pump.
pub fn half_scrap_preset() -> PulseConfig {
    PulseConfig {
        pump: GaussianPulse { peak: 1.0, center: 0.0, width: 1.0 },
        idler: GaussianPulse { peak: 0.0, center: 0.0, width: 0.5 },
        stark: GaussianPulse { peak: 2.0, center: -1.5, width: 1.0 },
        delta20: 0.0,
        omega10m_t1: 100.0,
        beta21_over_mu1: 0.2,
        beta22_over_mu1: 2.2 / 18.0,
    }
}

/// Full-SCRAP preparation preset (complete transfer with a transient
/// coherence pulse); the printed full-SCRAP parameter set.
pub fn full_scrap_preset() -> PulseConfig {
    PulseConfig {
        stark: GaussianPulse { peak: 10.0, center: -1.7, width: 2.0 },
        delta20: -5.0,
        ..half_scrap_preset()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_envelope_shape() {
        assert_eq!(gaussian_envelope(1.5, 3.0, 1.5, 0.7), 3.0);
        let v = gaussian_envelope(1.5 + 0.7, 3.0, 1.5, 0.7);
        assert!((v - 3.0 / std::f64::consts::E).abs() < 1e-14);
        // symmetry
        for d in [0.1, 0.5, 2.0] {
            let a = gaussian_envelope(1.5 + d, 3.0, 1.5, 0.7);
            let b = gaussian_envelope(1.5 - d, 3.0, 1.5, 0.7);
            assert_eq!(a, b);
        }
        assert!(GaussianPulse::new(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn half_scrap_reaches_permanent_maximum_coherence() {
        let cfg = half_scrap_preset();
        let grid = cfg.default_grid();
        let traj = adiabatic_trajectory(&cfg, &grid).unwrap();
        let end = traj.final_sample();
        // asymptote: Delta2/Omega1 -> beta21/mu1 = 0.2, rho12 -> 0.4975
        assert!((end.rho12 - 0.5).abs() < 0.005, "final rho12 = {}", end.rho12);
        for s in &traj.samples {
            assert!((s.pop1 + s.pop2 - 1.0).abs() < 1e-10);
            assert!(s.rho12 <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn full_scrap_transfers_population_with_coherence_pulse() {
        let cfg = full_scrap_preset();
        let grid = cfg.default_grid();
        let traj = adiabatic_trajectory(&cfg, &grid).unwrap();
        let end = traj.final_sample();
        assert!((end.pop2 - 1.0).abs() < 0.01, "final pop2 = {}", end.pop2);
        assert!((traj.max_rho12() - 0.5).abs() < 0.01, "max rho12 = {}", traj.max_rho12());
        // starts in the ground state despite delta20 < 0
        assert!((traj.samples[0].pop1 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn no_coupling_means_frozen_ground_state() {
        let mut cfg = half_scrap_preset();
        cfg.pump.peak = 0.0;
        let grid = cfg.default_grid();
        let traj = adiabatic_trajectory(&cfg, &grid).unwrap();
        for s in &traj.samples {
            assert_eq!(s.pop1, 1.0);
        }
        let tdse = tdse_oracle(&cfg, &grid).unwrap();
        for s in &tdse.samples {
            assert!((s.pop1 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tdse_agrees_with_adiabatic_following_when_adiabatic() {
        let cfg = half_scrap_preset();
        assert!(adiabaticity_margin(&cfg) > 10.0);
        let grid: Vec<f64> = (0..801).map(|i| -4.0 + 8.0 * i as f64 / 800.0).collect();
        let ad = adiabatic_trajectory(&cfg, &grid).unwrap();
        let td = tdse_oracle(&cfg, &grid).unwrap();
        let mut worst = 0.0f64;
        for (a, t) in ad.samples.iter().zip(&td.samples) {
            worst = worst.max((a.pop1 - t.pop1).abs()).max((a.pop2 - t.pop2).abs());
        }
        assert!(worst < 0.01, "max population difference {worst}");
    }

    #[test]
    fn tdse_norm_conservation() {
        let cfg = full_scrap_preset();
        let grid = cfg.default_grid();
        let td = tdse_oracle(&cfg, &grid).unwrap();
        for s in &td.samples {
            assert!((s.pop1 + s.pop2 - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn diabatic_drive_defeats_adiabatic_following() {
        let mut cfg = half_scrap_preset();
        cfg.omega10m_t1 = 0.1;
        assert!(adiabaticity_margin(&cfg) < 1.0);
        let grid = cfg.default_grid();
        let ad = adiabatic_trajectory(&cfg, &grid).unwrap();
        let td = tdse_oracle(&cfg, &grid).unwrap();
        // adiabatic following predicts rho12 -> 1/2; the true dynamics stays near |1>
        let diff = (ad.final_sample().rho12 - td.final_sample().rho12).abs();
        assert!(diff > 0.1, "oracle failed to expose non-adiabaticity (diff {diff})");
    }

    #[test]
    fn margin_scales_with_pulse_area() {
        let cfg = half_scrap_preset();
        let m1 = adiabaticity_margin(&cfg);
        let mut big = cfg.clone();
        big.omega10m_t1 *= 2.0;
        big.pump.width *= 2.0;
        big.stark.width *= 2.0;
        big.stark.center *= 2.0;
        big.idler.width *= 2.0;
        let m2 = adiabaticity_margin(&big);
        assert!(m2 > m1, "margin must increase: {m1} -> {m2}");
        assert!((m2 / m1 - 4.0).abs() < 1.0, "expected ~4x scaling, got {}", m2 / m1);
    }

    #[test]
    fn rho12_peak_coincides_with_equal_populations() {
        let cfg = full_scrap_preset();
        let grid = cfg.default_grid();
        let traj = adiabatic_trajectory(&cfg, &grid).unwrap();
        let imax = traj
            .samples
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.rho12.partial_cmp(&b.1.rho12).unwrap())
            .unwrap()
            .0;
        let ieq = traj
            .samples
            .iter()
            .enumerate()
            .min_by(|a, b| {
                (a.1.pop1 - a.1.pop2).abs().partial_cmp(&(b.1.pop1 - b.1.pop2).abs()).unwrap()
            })
            .unwrap()
            .0;
        assert!((imax as i64 - ieq as i64).abs() <= 1, "argmax rho12 {imax} vs equal-pop {ieq}");
    }

    #[test]
    fn time_reversal_reflects_trajectory() {
        let cfg = half_scrap_preset();
        let mut mirrored = cfg.clone();
        mirrored.stark.center = -cfg.stark.center;
        mirrored.idler.center = -cfg.idler.center;
        let n = 1601;
        let grid: Vec<f64> = (0..n).map(|i| -6.0 + 12.0 * i as f64 / (n - 1) as f64).collect();
        let a = adiabatic_trajectory(&cfg, &grid).unwrap();
        let b = adiabatic_trajectory(&mirrored, &grid).unwrap();
        for (i, s) in a.samples.iter().enumerate() {
            let m = &b.samples[n - 1 - i];
            assert!((s.rho12 - m.rho12).abs() < 1e-9, "tau={} {} vs {}", s.tau, s.rho12, m.rho12);
        }
    }

    #[test]
    fn degenerate_samples_are_flagged_not_fatal() {
        // zero pump with the static detuning tuned so delta2 vanishes
        // exactly at the tau = 0 grid sample: zero gap, zero coupling
        let mut cfg = half_scrap_preset();
        cfg.pump.peak = 0.0;
        cfg.delta20 = -cfg.stark.value(0.0);
        let grid = cfg.default_grid();
        assert!(grid.contains(&0.0));
        let traj = adiabatic_trajectory(&cfg, &grid).unwrap();
        assert!(traj.samples.iter().any(|s| s.flagged));
        // trajectory still returned in full
        assert_eq!(traj.samples.len(), grid.len());
    }
}
