//! Periodicity cell and the periodic Green's function of the 2-D Laplacian.
//!
//! For a rectangular cell with edges `q11, q22` the kernel is the q-periodic
//! distribution `S` with `ΔS = Σ_z δ_(qz) - 1/|Q|`, given by the Fourier
//! series with coefficients `-1/(|Q| 4π² |q⁻¹z|²)` over the dual lattice
//! (no zero mode, hence zero cell mean). The raw series does not converge
//! pointwise, so evaluation uses the classical lattice split
//!
//! ```text
//! S(x) = -1/4π Σ_z E1(|x - qz|²/4η)                       (real-space images)
//!        -1/(4π²|Q|) Σ_{z≠0} e^(-4π²|k|²η)/|k|² cos(2πk·x) (damped Fourier tail)
//!        + η/|Q|                                            (compensation)
//! ```
//!
//! with `k = q⁻¹z` and splitting parameter `η = ξ²`. Both sums converge like
//! Gaussians; the split is exact for every admissible `ξ`, which the
//! parameter-independence invariant checks. The gradient is obtained by
//! differentiating each term, never by finite differences.

use nalgebra::Vector2;

use crate::error::{Error, Result};
use crate::expint::{e1, EULER_GAMMA};

/// 2-D point / vector alias used throughout the crate.
pub type Vec2 = Vector2<f64>;

/// Absolute tolerance the kernel evaluation guarantees away from the lattice
/// (distance at least `1e-3 · min(q11, q22)`).
pub const KERNEL_TOL: f64 = 1e-12;

/// Truncation target: both sums are cut where the damping factor reaches
/// `e^(-TAIL_LOG)`, a few orders below `KERNEL_TOL`.
const TAIL_LOG: f64 = 41.45; // ln(1e18)

/// Cells with aspect ratio outside `[1/ASPECT_LIMIT, ASPECT_LIMIT]` are
/// rejected; the truncation estimates are validated only in this range.
const ASPECT_LIMIT: f64 = 50.0;

/// Allowed override range for the splitting parameter, as a factor on the
/// auto-selected value.
const XI_OVERRIDE_FACTOR: f64 = 8.0;

#[derive(Debug, Clone, Copy)]
struct FourierMode {
    /// Dual-lattice vector `k = q⁻¹ z`.
    k: Vec2,
    /// `2π k`, the phase gradient.
    phase: Vec2,
    /// Damped series coefficient `e^(-4π²|k|²η) / (4π²|k|²|Q|)`.
    coef: f64,
    /// `2π · coef`, the gradient coefficient.
    grad_coef: f64,
}

/// Rectangular periodicity cell `(0, q11) × (0, q22)` together with the
/// evaluation state of its periodic Green's function.
///
/// Immutable after construction; all evaluation methods are pure and safe to
/// call concurrently.
#[derive(Debug, Clone)]
pub struct PeriodicCell {
    q11: f64,
    q22: f64,
    cell_measure: f64,
    ewald_xi: f64,
    /// Image-window half-widths per axis for the real-space sum.
    trunc_real: [i64; 2],
    /// Index half-widths per axis for the Fourier sum.
    trunc_fourier: [i64; 2],
    modes: Vec<FourierMode>,
    /// `S_reg(0) = lim_(x->0) [S(x) - ln|x|/2π]`, needed by the boundary
    /// quadratures.
    regular_part_at_zero: f64,
    /// Squared real-space cutoff radius; images beyond it underflow.
    real_skip_r2: f64,
}

impl PeriodicCell {
    /// Builds a cell with auto-selected splitting parameter and truncation.
    pub fn new(q11: f64, q22: f64) -> Result<Self> {
        let xi = Self::auto_xi(q11, q22)?;
        Self::assemble(q11, q22, xi)
    }

    /// Builds a cell with an explicit splitting parameter `xi`.
    ///
    /// `xi` must lie within a factor of 8 of the auto-selected value; the
    /// result is then independent of `xi` to well below [`KERNEL_TOL`].
    pub fn with_ewald_xi(q11: f64, q22: f64, xi: f64) -> Result<Self> {
        let auto = Self::auto_xi(q11, q22)?;
        if !(xi.is_finite() && xi > 0.0)
            || xi < auto / XI_OVERRIDE_FACTOR
            || xi > auto * XI_OVERRIDE_FACTOR
        {
            return Err(Error::InvalidCell(format!(
                "ewald_xi {xi} outside admissible range [{}, {}]",
                auto / XI_OVERRIDE_FACTOR,
                auto * XI_OVERRIDE_FACTOR
            )));
        }
        Self::assemble(q11, q22, xi)
    }

    /// Splitting parameter balancing the real and Fourier term counts:
    /// `η = |Q|/4π`, i.e. `ξ = sqrt(|Q|/4π)`.
    fn auto_xi(q11: f64, q22: f64) -> Result<f64> {
        Self::validate_edges(q11, q22)?;
        Ok((q11 * q22 / (4.0 * std::f64::consts::PI)).sqrt())
    }

    fn validate_edges(q11: f64, q22: f64) -> Result<()> {
        if !(q11.is_finite() && q22.is_finite() && q11 > 0.0 && q22 > 0.0) {
            return Err(Error::InvalidCell(format!(
                "edge lengths must be positive and finite, got ({q11}, {q22})"
            )));
        }
        let aspect = q11 / q22;
        if !(1.0 / ASPECT_LIMIT..=ASPECT_LIMIT).contains(&aspect) {
            return Err(Error::InvalidCell(format!(
                "aspect ratio {aspect} outside [1/{ASPECT_LIMIT}, {ASPECT_LIMIT}]"
            )));
        }
        Ok(())
    }

    fn assemble(q11: f64, q22: f64, xi: f64) -> Result<Self> {
        let eta = xi * xi;
        let measure = q11 * q22;

        // Real cutoff: E1(r²/4η) ≤ e^(-TAIL_LOG) for r ≥ R_c.
        let r_cut = 2.0 * (eta * TAIL_LOG).sqrt();
        let trunc_real = [(r_cut / q11).ceil() as i64, (r_cut / q22).ceil() as i64];

        // Fourier cutoff: e^(-4π²|k|²η) ≤ e^(-TAIL_LOG) for |k| ≥ K_c.
        let k_cut = (TAIL_LOG / eta).sqrt() / (2.0 * std::f64::consts::PI);
        let trunc_fourier = [(k_cut * q11).ceil() as i64, (k_cut * q22).ceil() as i64];

        let four_pi2 = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
        let mut modes = Vec::new();
        for z1 in -trunc_fourier[0]..=trunc_fourier[0] {
            for z2 in -trunc_fourier[1]..=trunc_fourier[1] {
                if z1 == 0 && z2 == 0 {
                    continue;
                }
                let k = Vec2::new(z1 as f64 / q11, z2 as f64 / q22);
                let k2 = k.norm_squared();
                if k2 > k_cut * k_cut {
                    continue;
                }
                let coef = (-four_pi2 * k2 * eta).exp() / (four_pi2 * k2 * measure);
                modes.push(FourierMode {
                    k,
                    phase: 2.0 * std::f64::consts::PI * k,
                    coef,
                    grad_coef: 2.0 * std::f64::consts::PI * coef,
                });
            }
        }

        let mut cell = PeriodicCell {
            q11,
            q22,
            cell_measure: measure,
            ewald_xi: xi,
            trunc_real,
            trunc_fourier,
            modes,
            regular_part_at_zero: 0.0,
            real_skip_r2: 4.0 * eta * (TAIL_LOG + 4.0),
        };
        cell.regular_part_at_zero = cell.compute_regular_part_at_zero();
        Ok(cell)
    }

    fn eta(&self) -> f64 {
        self.ewald_xi * self.ewald_xi
    }

    /// `S_reg(0)` where `S(x) = ln|x|/2π + S_reg(x)` near the origin. The
    /// origin image contributes `(γ - ln 4η)/4π` since
    /// `E1(s) = -γ - ln s + O(s)`.
    fn compute_regular_part_at_zero(&self) -> f64 {
        let eta = self.eta();
        let inv_4pi = 1.0 / (4.0 * std::f64::consts::PI);
        let mut value = inv_4pi * (EULER_GAMMA - (4.0 * eta).ln());
        for z1 in -self.trunc_real[0]..=self.trunc_real[0] {
            for z2 in -self.trunc_real[1]..=self.trunc_real[1] {
                if z1 == 0 && z2 == 0 {
                    continue;
                }
                let r2 = (self.q11 * z1 as f64).powi(2) + (self.q22 * z2 as f64).powi(2);
                if r2 > self.real_skip_r2 {
                    continue;
                }
                value -= inv_4pi * e1(r2 / (4.0 * eta));
            }
        }
        for m in &self.modes {
            value -= m.coef;
        }
        value + eta / self.cell_measure
    }

    /// Cell edge lengths `(q11, q22)`.
    pub fn edges(&self) -> (f64, f64) {
        (self.q11, self.q22)
    }

    /// Cell measure `|Q| = q11 · q22`.
    pub fn cell_measure(&self) -> f64 {
        self.cell_measure
    }

    /// The splitting parameter in use.
    pub fn ewald_xi(&self) -> f64 {
        self.ewald_xi
    }

    /// Truncation half-widths `(real-space, Fourier-space)` per axis.
    pub fn truncation(&self) -> ([i64; 2], [i64; 2]) {
        (self.trunc_real, self.trunc_fourier)
    }

    /// Fourier coefficient of `e^(2πi (q⁻¹z)·x)` in the kernel series:
    /// `-1 / (|Q| 4π² |q⁻¹z|²)`. The series has no `z = 0` term.
    pub fn fourier_coefficient(&self, z: [i64; 2]) -> Result<f64> {
        if z == [0, 0] {
            return Err(Error::ZeroFrequency);
        }
        let k2 = (z[0] as f64 / self.q11).powi(2) + (z[1] as f64 / self.q22).powi(2);
        let four_pi2 = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
        Ok(-1.0 / (self.cell_measure * four_pi2 * k2))
    }

    /// Distance from `x` to the nearest lattice point of `q·Z²`.
    pub fn dist_to_lattice(&self, x: Vec2) -> f64 {
        let r1 = x.x - self.q11 * (x.x / self.q11).round();
        let r2 = x.y - self.q22 * (x.y / self.q22).round();
        (r1 * r1 + r2 * r2).sqrt()
    }

    /// Reduces `x` modulo the lattice into `[0, q11) × [0, q22)`.
    pub fn wrap_to_cell(&self, x: Vec2) -> Vec2 {
        Vec2::new(
            x.x - self.q11 * (x.x / self.q11).floor(),
            x.y - self.q22 * (x.y / self.q22).floor(),
        )
    }

    /// Reduces a difference vector to its nearest-image representative in
    /// `[-q11/2, q11/2] × [-q22/2, q22/2]`.
    pub fn nearest_image(&self, d: Vec2) -> Vec2 {
        Vec2::new(
            d.x - self.q11 * (d.x / self.q11).round(),
            d.y - self.q22 * (d.y / self.q22).round(),
        )
    }

    /// Evaluates the periodic Green's function `S(x)`.
    ///
    /// Errors when `x` lies exactly on the lattice; accuracy degrades
    /// gracefully (while staying finite) as `x` approaches it.
    pub fn greens(&self, x: Vec2) -> Result<f64> {
        let eta = self.eta();
        let inv_4eta = 1.0 / (4.0 * eta);
        let n1 = (x.x / self.q11).round() as i64;
        let n2 = (x.y / self.q22).round() as i64;

        let mut real_sum = 0.0;
        for z1 in (n1 - self.trunc_real[0])..=(n1 + self.trunc_real[0]) {
            for z2 in (n2 - self.trunc_real[1])..=(n2 + self.trunc_real[1]) {
                let d1 = x.x - self.q11 * z1 as f64;
                let d2 = x.y - self.q22 * z2 as f64;
                let r2 = d1 * d1 + d2 * d2;
                if r2 == 0.0 {
                    return Err(Error::LatticeSingularity(x.x, x.y));
                }
                if r2 > self.real_skip_r2 {
                    continue;
                }
                real_sum += e1(r2 * inv_4eta);
            }
        }

        let mut fourier_sum = 0.0;
        for m in &self.modes {
            fourier_sum += m.coef * (m.phase.dot(&x)).cos();
        }

        Ok(-real_sum / (4.0 * std::f64::consts::PI) - fourier_sum + eta / self.cell_measure)
    }

    /// Evaluates the kernel gradient `DS(x)` by term-by-term differentiation
    /// of the split.
    pub fn greens_grad(&self, x: Vec2) -> Result<Vec2> {
        let eta = self.eta();
        let inv_4eta = 1.0 / (4.0 * eta);
        let n1 = (x.x / self.q11).round() as i64;
        let n2 = (x.y / self.q22).round() as i64;

        let mut grad = Vec2::zeros();
        let inv_2pi = 1.0 / (2.0 * std::f64::consts::PI);
        for z1 in (n1 - self.trunc_real[0])..=(n1 + self.trunc_real[0]) {
            for z2 in (n2 - self.trunc_real[1])..=(n2 + self.trunc_real[1]) {
                let d = Vec2::new(x.x - self.q11 * z1 as f64, x.y - self.q22 * z2 as f64);
                let r2 = d.norm_squared();
                if r2 == 0.0 {
                    return Err(Error::LatticeSingularity(x.x, x.y));
                }
                if r2 > self.real_skip_r2 {
                    continue;
                }
                grad += (inv_2pi * (-r2 * inv_4eta).exp() / r2) * d;
            }
        }
        for m in &self.modes {
            grad += (m.grad_coef * (m.phase.dot(&x)).sin()) * m.k;
        }
        Ok(grad)
    }

    /// `S_reg(0)` for the smooth remainder `S(x) - ln|x|/2π`; enters the
    /// logarithmic boundary quadrature diagonal.
    pub fn greens_regular_at_zero(&self) -> f64 {
        self.regular_part_at_zero
    }

    /// Five-point finite-difference Laplacian of `S` at `x` plus `1/|Q|`.
    ///
    /// Off the lattice `ΔS = -1/|Q|`, so the return value is a pure
    /// discretization residual, `O(h²)` in the step `h`.
    pub fn poisson_residual(&self, x: Vec2, h: f64) -> Result<f64> {
        let center = self.greens(x)?;
        let east = self.greens(x + Vec2::new(h, 0.0))?;
        let west = self.greens(x - Vec2::new(h, 0.0))?;
        let north = self.greens(x + Vec2::new(0.0, h))?;
        let south = self.greens(x - Vec2::new(0.0, h))?;
        let laplacian = (east + west + north + south - 4.0 * center) / (h * h);
        Ok(laplacian + 1.0 / self.cell_measure)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn cell_measure_is_edge_product() {
        let unit = PeriodicCell::new(1.0, 1.0).unwrap();
        assert_eq!(unit.cell_measure(), 1.0);
        let flat = PeriodicCell::new(2.0, 0.5).unwrap();
        assert_eq!(flat.cell_measure(), 1.0);
    }

    #[test]
    fn rejects_bad_cells() {
        assert!(matches!(
            PeriodicCell::new(1.0, -1.0),
            Err(Error::InvalidCell(_))
        ));
        assert!(matches!(
            PeriodicCell::new(0.0, 1.0),
            Err(Error::InvalidCell(_))
        ));
        assert!(matches!(
            PeriodicCell::new(102.0, 1.0),
            Err(Error::InvalidCell(_))
        ));
        // Override outside the admissible window.
        let auto = PeriodicCell::new(1.0, 1.0).unwrap().ewald_xi();
        assert!(PeriodicCell::with_ewald_xi(1.0, 1.0, auto * 20.0).is_err());
    }

    #[test]
    fn fourier_coefficients_match_series() {
        let unit = PeriodicCell::new(1.0, 1.0).unwrap();
        let c10 = unit.fourier_coefficient([1, 0]).unwrap();
        assert!((c10 - (-1.0 / (4.0 * PI * PI))).abs() < 1e-16);
        let c34 = unit.fourier_coefficient([3, 4]).unwrap();
        assert!((c34 - (-1.0 / (100.0 * PI * PI))).abs() < 1e-17);

        let wide = PeriodicCell::new(2.0, 1.0).unwrap();
        let c20 = wide.fourier_coefficient([2, 0]).unwrap();
        assert!((c20 - (-1.0 / (8.0 * PI * PI))).abs() < 1e-16);

        assert!(matches!(
            unit.fourier_coefficient([0, 0]),
            Err(Error::ZeroFrequency)
        ));
    }

    // Anchors computed with 30-digit arithmetic from the same split at a
    // much larger truncation.
    #[test]
    fn matches_high_precision_anchors() {
        let unit = PeriodicCell::new(1.0, 1.0).unwrap();
        let v = unit.greens(Vec2::new(0.5, 0.5)).unwrap();
        assert!((v - 0.055158900038162898349).abs() < 1e-13, "got {v}");
        let v = unit.greens(Vec2::new(0.5, 0.3)).unwrap();
        assert!((v - 0.046158724642921028041).abs() < 1e-13, "got {v}");

        let flat = PeriodicCell::new(2.0, 0.5).unwrap();
        let v = flat.greens(Vec2::new(0.7, 0.2)).unwrap();
        assert!((v - 0.12168615354200316323).abs() < 1e-13, "got {v}");

        assert!((unit.greens_regular_at_zero() - 0.20857779324350138368).abs() < 1e-13);
        assert!((flat.greens_regular_at_zero() - 0.069491686653400244856).abs() < 1e-13);
    }

    #[test]
    fn lattice_point_is_singular() {
        let unit = PeriodicCell::new(1.0, 1.0).unwrap();
        assert!(matches!(
            unit.greens(Vec2::new(0.0, 0.0)),
            Err(Error::LatticeSingularity(_, _))
        ));
        assert!(matches!(
            unit.greens_grad(Vec2::new(3.0, -2.0)),
            Err(Error::LatticeSingularity(_, _))
        ));
    }

    #[test]
    fn splitting_parameter_independence() {
        let unit = PeriodicCell::new(1.0, 1.0).unwrap();
        let auto = unit.ewald_xi();
        let halved = PeriodicCell::with_ewald_xi(1.0, 1.0, auto / 2.0).unwrap();
        let doubled = PeriodicCell::with_ewald_xi(1.0, 1.0, auto * 2.0).unwrap();
        for &p in &[(0.5, 0.5), (0.31, 0.77), (0.011, 0.013), (0.9, 0.2)] {
            let x = Vec2::new(p.0, p.1);
            let v = unit.greens(x).unwrap();
            assert!((v - halved.greens(x).unwrap()).abs() < 1e-10);
            assert!((v - doubled.greens(x).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let cell = PeriodicCell::new(2.0, 0.5).unwrap();
        let h = 1e-5;
        for &p in &[(0.5, 0.13), (1.3, 0.31), (0.2, 0.4)] {
            let x = Vec2::new(p.0, p.1);
            let g = cell.greens_grad(x).unwrap();
            let fx = (cell.greens(x + Vec2::new(h, 0.0)).unwrap()
                - cell.greens(x - Vec2::new(h, 0.0)).unwrap())
                / (2.0 * h);
            let fy = (cell.greens(x + Vec2::new(0.0, h)).unwrap()
                - cell.greens(x - Vec2::new(0.0, h)).unwrap())
                / (2.0 * h);
            assert!((g.x - fx).abs() < 1e-6, "gx {} vs fd {}", g.x, fx);
            assert!((g.y - fy).abs() < 1e-6, "gy {} vs fd {}", g.y, fy);
        }
    }

    #[test]
    fn square_cell_reflection_symmetry() {
        // x1 -> 1 - x1 fixes the line x1 = 1/2, so dS/dx1 vanishes there.
        let unit = PeriodicCell::new(1.0, 1.0).unwrap();
        let g = unit.greens_grad(Vec2::new(0.5, 0.3)).unwrap();
        assert!(g.x.abs() < 1e-13, "got {}", g.x);
        // 30-digit anchor for the nonzero component.
        assert!((g.y - 0.080067978963640387893).abs() < 1e-12);
    }

    #[test]
    fn poisson_residual_is_second_order() {
        for (q11, q22) in [(1.0, 1.0), (2.0, 0.5)] {
            let cell = PeriodicCell::new(q11, q22).unwrap();
            let x = Vec2::new(0.37 * q11, 0.61 * q22);
            let r = cell.poisson_residual(x, 1e-3).unwrap();
            assert!(r.abs() < 1e-4, "residual {r} at h=1e-3");
            let coarse = cell.poisson_residual(x, 4e-3).unwrap();
            let fine = cell.poisson_residual(x, 2e-3).unwrap();
            let ratio = coarse / fine;
            assert!(
                (3.4..=4.6).contains(&ratio),
                "order-2 ratio off: {ratio} (coarse {coarse}, fine {fine})"
            );
        }
    }

    #[test]
    fn zero_cell_mean_with_second_order_decay() {
        let unit = PeriodicCell::new(1.0, 1.0).unwrap();
        let midpoint_mean = |n: usize| -> f64 {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let x = Vec2::new((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64);
                    acc += unit.greens(x).unwrap();
                }
            }
            acc / (n * n) as f64
        };
        let coarse = midpoint_mean(256);
        assert!(coarse.abs() < 1e-3, "mean at 256^2: {coarse}");
        let fine = midpoint_mean(512);
        let ratio = coarse.abs() / fine.abs();
        assert!(
            ratio > 2.8,
            "refinement should shrink the mean ~4x, got {coarse} -> {fine}"
        );
    }

    proptest! {
        #[test]
        fn evenness_and_periodicity(a in 0.02f64..0.98, b in 0.02f64..0.98,
                                    z1 in -1i64..=1, z2 in -1i64..=1) {
            let cell = PeriodicCell::new(1.0, 1.0).unwrap();
            let x = Vec2::new(a, b);
            let v = cell.greens(x).unwrap();
            prop_assert!((v - cell.greens(-x).unwrap()).abs() < 1e-12);
            let shifted = x + Vec2::new(z1 as f64, z2 as f64);
            prop_assert!((v - cell.greens(shifted).unwrap()).abs() < 1e-12);
            // Gradient of an even function is odd.
            let g = cell.greens_grad(x).unwrap();
            let gm = cell.greens_grad(-x).unwrap();
            prop_assert!((g + gm).norm() < 1e-12);
        }
    }
}
