use serde::{Deserialize, Serialize};

use super::{Potential, Potential2D, Potential3D};
use crate::error::{Error, Result};

/// Relative "numerically zero" level of a support check.
pub const ZERO_THRESHOLD: f64 = 1e-10;

/// Sampling plan for [`check_onesided_support`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportGrid {
    /// Samples across the x (or z) support.
    pub n_support: usize,
    /// Samples per transverse-momentum direction.
    pub n_k: usize,
    /// Extent of the sampled momentum region on each side of `2α`; defaults
    /// to `max(4α, 8)`.
    pub span: Option<f64>,
}

impl Default for SupportGrid {
    fn default() -> Self {
        Self { n_support: 33, n_k: 120, span: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportReport {
    pub alpha: f64,
    /// Sampled x (2D) or z (3D) interval.
    pub support: Option<(f64, f64)>,
    /// Largest modulus found in the region that must vanish.
    pub forbidden_max: f64,
    /// Largest modulus found in the complementary sampled region.
    pub allowed_max: f64,
    pub threshold: f64,
    /// Decided by exact structure rather than sampling.
    pub exact: bool,
    pub pass: bool,
}

fn sample_points(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n <= 1 || a == b {
        return vec![0.5 * (a + b)];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Checks that the transverse Fourier transform vanishes on the region
/// whose vanishing makes the potential invisible for every `k ≤ α`:
/// `Ky < 2α` in 2D, the open disk `|K| < 2α` in 3D.
///
/// The boundary itself is not sampled. Combs are decided exactly: every
/// nonzero `z_n` must sit at `n α1 > 2α`.
pub fn check_onesided_support(v: &Potential, alpha: f64, grid: SupportGrid) -> Result<SupportReport> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha must be positive"));
    }
    match v {
        Potential::TwoD(p) => check_2d(p, alpha, grid),
        Potential::ThreeD(p) => check_3d(p, alpha, grid),
    }
}

fn comb_only(v: &Potential2D) -> bool {
    match v {
        Potential2D::DeltaComb { .. } => true,
        Potential2D::Sum { members } => !members.is_empty() && members.iter().all(comb_only),
        _ => false,
    }
}

fn comb_check(v: &Potential2D, alpha: f64) -> (f64, f64) {
    let mut forbidden = 0.0f64;
    let mut allowed = 0.0f64;
    let mut visit = |coefficients: &[num_complex::Complex64], freq: f64| {
        let n_max = (coefficients.len() / 2) as i64;
        for (i, z) in coefficients.iter().enumerate() {
            let n = i as i64 - n_max;
            if n as f64 * freq > 2.0 * alpha {
                allowed = allowed.max(z.norm());
            } else {
                forbidden = forbidden.max(z.norm());
            }
        }
    };
    fn walk(v: &Potential2D, f: &mut dyn FnMut(&[num_complex::Complex64], f64)) {
        match v {
            Potential2D::DeltaComb { coefficients, lattice_frequency } => f(coefficients, *lattice_frequency),
            Potential2D::Sum { members } => members.iter().for_each(|m| walk(m, f)),
            _ => {}
        }
    }
    walk(v, &mut visit);
    (forbidden, allowed)
}

fn check_2d(v: &Potential2D, alpha: f64, grid: SupportGrid) -> Result<SupportReport> {
    if comb_only(v) {
        let (forbidden_max, allowed_max) = comb_check(v, alpha);
        return Ok(SupportReport {
            alpha,
            support: Some((0.0, 0.0)),
            forbidden_max,
            allowed_max,
            threshold: 0.0,
            exact: true,
            pass: forbidden_max == 0.0,
        });
    }
    if v.contains_comb() {
        return Err(Error::CombRequiresLattice);
    }
    let support = v.x_support();
    let span = grid.span.unwrap_or((4.0 * alpha).max(8.0));
    let (mut forbidden_max, mut allowed_max) = (0.0f64, 0.0f64);
    if let Some((a, b)) = support {
        let n = grid.n_k.max(1);
        for x in sample_points(a, b, grid.n_support) {
            for j in 0..n {
                let kf = 2.0 * alpha - span + span * j as f64 / n as f64;
                forbidden_max = forbidden_max.max(v.fourier_y(x, kf)?.norm());
                let ka = 2.0 * alpha + span * (j + 1) as f64 / n as f64;
                allowed_max = allowed_max.max(v.fourier_y(x, ka)?.norm());
            }
        }
    }
    let threshold = ZERO_THRESHOLD * allowed_max;
    Ok(SupportReport {
        alpha,
        support,
        forbidden_max,
        allowed_max,
        threshold,
        exact: false,
        pass: forbidden_max <= threshold,
    })
}

fn check_3d(v: &Potential3D, alpha: f64, grid: SupportGrid) -> Result<SupportReport> {
    let support = v.z_support();
    let span = grid.span.unwrap_or((4.0 * alpha).max(8.0));
    let (mut forbidden_max, mut allowed_max) = (0.0f64, 0.0f64);
    if let Some((a, b)) = support {
        let n = grid.n_k.max(1);
        let n_ang = 2 * n;
        for z in sample_points(a, b, grid.n_support) {
            for i in 0..n {
                let rf = 2.0 * alpha * i as f64 / n as f64;
                let ra = 2.0 * alpha + span * (i + 1) as f64 / n as f64;
                for j in 0..n_ang {
                    let t = std::f64::consts::TAU * j as f64 / n_ang as f64;
                    let (s, c) = t.sin_cos();
                    forbidden_max = forbidden_max.max(v.fourier_xy(rf * c, rf * s, z).norm());
                    allowed_max = allowed_max.max(v.fourier_xy(ra * c, ra * s, z).norm());
                }
            }
        }
    }
    let threshold = ZERO_THRESHOLD * allowed_max;
    Ok(SupportReport {
        alpha,
        support,
        forbidden_max,
        allowed_max,
        threshold,
        exact: false,
        pass: forbidden_max <= threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{C64, ONE, ZERO};
    use crate::potentials::{construct_deformation_3d, Envelope};

    #[test]
    fn rational_passes_gaussian_fails() {
        let u = Potential2D::rational(Envelope::new(0.0, 1.0), 1.0, 0, 1.0, ONE).unwrap();
        let r = check_onesided_support(&Potential::TwoD(u), 1.0, SupportGrid::default()).unwrap();
        assert!(r.pass);
        assert_eq!(r.forbidden_max, 0.0);
        assert!(r.allowed_max > 0.0);

        let g = Potential2D::gaussian(ONE, [0.0, 0.0], [1.0, 1.0], 0.0).unwrap();
        for alpha in [0.1, 1.0, 3.0] {
            let r = check_onesided_support(&Potential::TwoD(g.clone()), alpha, SupportGrid::default()).unwrap();
            assert!(!r.pass, "alpha={alpha}");
        }
    }

    #[test]
    fn comb_exact_check() {
        let comb = Potential2D::delta_comb(vec![ZERO, ZERO, C64::new(0.5, 0.1)], 3.0).unwrap();
        let r = check_onesided_support(&Potential::TwoD(comb), 1.0, SupportGrid::default()).unwrap();
        assert!(r.exact && r.pass);
        let comb = Potential2D::delta_comb(vec![ZERO, ONE, C64::new(0.5, 0.1)], 3.0).unwrap();
        let r = check_onesided_support(&Potential::TwoD(comb), 1.0, SupportGrid::default()).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn mixed_comb_needs_lattice() {
        let comb = Potential2D::delta_comb(vec![ONE], 3.0).unwrap();
        let g = Potential2D::gaussian(ONE, [0.0, 0.0], [1.0, 1.0], 0.0).unwrap();
        let s = Potential::TwoD(Potential2D::sum(vec![comb, g]));
        assert!(matches!(
            check_onesided_support(&s, 1.0, SupportGrid::default()),
            Err(Error::CombRequiresLattice)
        ));
    }

    #[test]
    fn deformation_3d_passes() {
        let v = construct_deformation_3d(&Potential3D::zero(), 1.0, ONE, 1.0, 1.0, 1.0, 1, 1).unwrap();
        let grid = SupportGrid { n_support: 9, n_k: 24, span: None };
        let r = check_onesided_support(&Potential::ThreeD(v), 1.0, grid).unwrap();
        assert!(r.pass && r.allowed_max > 0.0);
        let g = Potential3D::gaussian(ONE, [0.0; 3], [1.0; 3]).unwrap();
        let r = check_onesided_support(&Potential::ThreeD(g), 1.0, grid).unwrap();
        assert!(!r.pass);
    }
}
