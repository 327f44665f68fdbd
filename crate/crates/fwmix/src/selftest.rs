//! Deterministic invariant suites behind the `selftest` CLI subcommand:
//! every module's identity checks with max residuals, seeded RNG only.

use crate::elliptic;
use crate::error::Result;
use crate::model::{dressed_state, eigenvalue_cubic, kr_preset};
use crate::phasematch::{window_edges, y4_of};
use crate::propagation::{
    solve_regime_a, solve_regime_c, Pendulum, PropagationCoefficients, SPolicy,
};
use crate::smallsignal::{
    dkprime_total, dkprime_undepleted_pump, kappa_coherent, kappa_undepleted_pump,
    phase_match_max_coherence, undepleted_coherence_solution, SmallSignalSetup,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct SuiteLine {
    pub name: &'static str,
    pub max_residual: f64,
    pub tolerance: f64,
}

impl SuiteLine {
    pub fn pass(&self) -> bool {
        self.max_residual <= self.tolerance
    }
}

#[derive(Debug, Clone, Default)]
pub struct SelftestReport {
    pub lines: Vec<SuiteLine>,
}

impl SelftestReport {
    pub fn all_pass(&self) -> bool {
        self.lines.iter().all(SuiteLine::pass)
    }
}

/// Runs the invariant suites with a fixed (or caller-supplied) seed.
pub fn run(seed: u64) -> Result<SelftestReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SelftestReport::default();

    // elliptic kernel identities on 10^4 samples
    let samples: Vec<(f64, f64)> =
        (0..10_000).map(|_| (rng.gen_range(0.0..0.999), rng.gen_range(0.0..0.999999))).collect();
    let k = elliptic::kernel_selftest(&samples)?;
    report.lines.push(SuiteLine {
        name: "elliptic: sn^2 + cn^2 = 1",
        max_residual: k.max_sn_cn_identity,
        tolerance: 1e-10,
    });
    report.lines.push(SuiteLine {
        name: "elliptic: F(am(u)) = u",
        max_residual: k.max_f_inverse,
        tolerance: 1e-8,
    });
    report.lines.push(SuiteLine {
        name: "elliptic: Pi(gamma,0,p) = F",
        max_residual: k.max_pi_reduction,
        tolerance: 1e-12,
    });
    report.lines.push(SuiteLine {
        name: "elliptic: K(0) = pi/2",
        max_residual: k.k_zero_error,
        tolerance: 1e-12,
    });

    // eigenvalue cubic residuals
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let d2 = rng.gen_range(-10.0..10.0);
        let d3 = rng.gen_range(-10.0..10.0);
        let (o1, o2, o3) =
            (rng.gen_range(0.0..5.0), rng.gen_range(0.0..5.0), rng.gen_range(0.0..5.0));
        let phi = rng.gen_range(-3.2..3.2);
        let roots = eigenvalue_cubic(d2, d3, o1, o2, o3, phi)?;
        let b = d2 + d3;
        let c = d2 * d3 - (o1 * o1 + o2 * o2 + o3 * o3);
        let d = -o1 * o1 * d3 - o3 * o3 * d2 + 2.0 * o1 * o2 * o3 * phi.cos();
        let scale = b.abs().max(c.abs()).max(d.abs()).max(1.0);
        for r in roots {
            worst = worst.max((((r + b) * r + c) * r + d).abs() / scale);
        }
    }
    report.lines.push(SuiteLine {
        name: "model: cubic root residuals",
        max_residual: worst,
        tolerance: 1e-10,
    });

    // dressed state normalization and lambda0 consistency
    let mut worst = 0.0f64;
    for _ in 0..2000 {
        let d2 = rng.gen_range(-20.0..20.0);
        let om = rng.gen_range(1e-3..10.0);
        let ds = dressed_state(d2, om)?;
        worst = worst.max((ds.c1 * ds.c1 + ds.c2 * ds.c2 - 1.0).abs());
        let lhs = ds.lambda0 * (d2 + ds.lambda0) - om * om;
        worst = worst.max(lhs.abs() / (d2 * d2 + om * om));
    }
    report.lines.push(SuiteLine {
        name: "model: dressed-state identities",
        max_residual: worst,
        tolerance: 1e-12,
    });

    // small-signal growth symmetry eta2 - eta3 = eta20
    let p = kr_preset();
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let c2sq: f64 = rng.gen_range(0.01..0.99);
        let rho = (c2sq * (1.0 - c2sq)).sqrt();
        let setup =
            SmallSignalSetup::with_state(&p, 1e20, 1e15, 0.0, rho, 1.0 - c2sq, c2sq)?;
        let z = rng.gen_range(0.0..2.0) / setup.kappa;
        let (e2, e3) = undepleted_coherence_solution(&setup, z)?;
        worst = worst.max(((e2 - e3) - 1e15).abs() / 1e15);
    }
    report.lines.push(SuiteLine {
        name: "smallsignal: eta2 - eta3 conserved",
        max_residual: worst,
        tolerance: 1e-8,
    });

    // §II vs §V consistency through the dressed state
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let eta10 = 10f64.powf(rng.gen_range(24.0..27.0));
        let delta2 = p.mu1 * eta10 * rng.gen_range(-1.0..3.0);
        let ds = dressed_state(delta2 + p.beta21 * eta10, p.mu1 * eta10)?;
        let ka = kappa_coherent(&p, ds.rho12, None)?;
        let kb = kappa_undepleted_pump(&p, eta10, delta2)?;
        worst = worst.max((ka - kb).abs() / kb.abs());
        let da = dkprime_total(&p, ds.c1 * ds.c1, ds.c2 * ds.c2, None);
        let db = dkprime_undepleted_pump(&p, eta10, delta2);
        worst = worst.max((da - db).abs() / db.abs().max(1e-300));
    }
    report.lines.push(SuiteLine {
        name: "smallsignal: coherence/pump-form agreement",
        max_residual: worst,
        tolerance: 1e-9,
    });

    // compensation zeroes b1
    let mut pc = kr_preset();
    pc.dk_over_n = 0.5 * phase_match_max_coherence(&pc);
    let c = PropagationCoefficients::from_medium(&pc, 1e26, 1e23, 0.0)?;
    report.lines.push(SuiteLine {
        name: "propagation: phm2 compensation -> b1 = 0",
        max_residual: c.b1.abs(),
        tolerance: 1e-10,
    });

    // regime-A closed form vs quadrature inversion
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let b1 = rng.gen_range(-0.7..0.7);
        let b2 = rng.gen_range(-0.7..0.7);
        let ratio = 10f64.powf(rng.gen_range(-4.0..-2.0));
        let c = PropagationCoefficients::from_reduced(b1, b2, ratio, 0.0)?;
        let pend = Pendulum::from_coefficients(&c, SPolicy::Unit);
        for i in 1..=8 {
            let x = c.x1 * (0.05 + 0.9 * i as f64 / 8.0);
            let u = pend.z_of_x(x)?;
            let back = solve_regime_a(&c, u)?;
            worst = worst.max((back - x).abs() / x);
        }
    }
    report.lines.push(SuiteLine {
        name: "propagation: regime-A inversion vs quadrature",
        max_residual: worst,
        tolerance: 1e-6,
    });

    // regime-C amplitude bound
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let b1 = rng.gen_range(1.5..6.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let b2 = rng.gen_range(-0.8..0.8);
        let ratio = 10f64.powf(rng.gen_range(-4.0..-2.0));
        let c = PropagationCoefficients::from_reduced(b1, b2, ratio, 0.0)?;
        let bound = ratio / (b1 * b1 - 1.0);
        for i in 0..200 {
            let z = i as f64 * 0.05;
            let x = solve_regime_c(&c, z)?;
            worst = worst.max((x - bound) / bound);
        }
        worst = worst.max((c.max_conversion() - bound).abs() / bound);
    }
    report.lines.push(SuiteLine {
        name: "propagation: regime-C amplitude bound",
        max_residual: worst.max(0.0),
        tolerance: 1e-6,
    });

    // phase-matching window ordering
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let m = 10f64.powf(rng.gen_range(-2.0..2.0));
        let d2 = rng.gen_range(-50.0..50.0);
        let (y1, y2) = window_edges(m, d2);
        let y4 = y4_of(m);
        worst = worst.max(y4 - y1).max(y1 - y2).max(y2);
    }
    report.lines.push(SuiteLine {
        name: "phasematch: y4 <= y1 < y2 < 0",
        max_residual: worst.max(0.0),
        tolerance: 1e-12,
    });

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes_and_is_deterministic() {
        let a = run(0).unwrap();
        assert!(a.all_pass(), "{:#?}", a.lines.iter().filter(|l| !l.pass()).collect::<Vec<_>>());
        let b = run(0).unwrap();
        for (x, y) in a.lines.iter().zip(&b.lines) {
            assert_eq!(x.max_residual.to_bits(), y.max_residual.to_bits());
        }
    }
}
