//! Exponential integral `E1`, the screening function of the 2-D lattice
//! split.
//!
//! `E1(s) = ∫_s^∞ e^(-t)/t dt` screens the logarithmic free-space kernel the
//! same way `erfc` screens the `1/r` kernel in three dimensions: the
//! real-space image sum of the periodic Green's function is a sum of
//! `E1(r²/4η)` terms that decay like a Gaussian in the image distance `r`.

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_CUTOFF: f64 = 1.0;
const MAX_ITER: usize = 200;

/// Exponential integral `E1(s)` for `s > 0`.
///
/// Power series for `s ≤ 1`, modified-Lentz continued fraction for `s > 1`;
/// both converge to a relative accuracy of a few ulps. Returns `+∞` at
/// `s = 0` and NaN for negative arguments.
pub fn e1(s: f64) -> f64 {
    if s < 0.0 {
        return f64::NAN;
    }
    if s == 0.0 {
        return f64::INFINITY;
    }
    if s <= SERIES_CUTOFF {
        e1_series(s)
    } else {
        e1_continued_fraction(s)
    }
}

/// E1(s) = -γ - ln s + Σ_{k≥1} (-1)^(k+1) s^k / (k·k!), for small s.
fn e1_series(s: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..=MAX_ITER {
        let kf = k as f64;
        term *= -s / kf;
        let contrib = -term / kf;
        sum += contrib;
        if contrib.abs() < f64::EPSILON * sum.abs().max(1.0) {
            break;
        }
    }
    -EULER_GAMMA - s.ln() + sum
}

/// E1(s) = e^(-s) / (s + 1 - 1/(s + 3 - 4/(s + 5 - 9/(...)))), for large s.
fn e1_continued_fraction(s: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = s + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let a = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < f64::EPSILON {
            break;
        }
    }
    h * (-s).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values computed with 30-digit arithmetic.
    const REFERENCE: &[(f64, f64)] = &[
        (1e-6, 13.238295893062491244),
        (1e-3, 6.331539364136149332),
        (0.01, 4.0379295765381138318),
        (0.1, 1.8229239584193906661),
        (0.5, 0.55977359477616081175),
        (1.0, 0.21938393439552027368),
        (2.0, 0.048900510708061119567),
        (5.0, 0.0011482955912753257973),
        (10.0, 4.1569689296853242774e-6),
        (30.0, 3.0215520106888125448e-15),
        (100.0, 3.6835977616820321802e-46),
    ];

    #[test]
    fn matches_reference_values() {
        for &(s, want) in REFERENCE {
            let got = e1(s);
            let rel = ((got - want) / want).abs();
            assert!(rel < 1e-14, "E1({s}): got {got}, want {want}, rel {rel}");
        }
    }

    #[test]
    fn continuous_at_branch_switch() {
        let below = e1_series(1.0);
        let above = e1_continued_fraction(1.0 + 1e-12);
        assert!((below - above).abs() < 1e-13);
    }

    #[test]
    fn derivative_is_minus_exp_over_s() {
        // d/ds E1(s) = -e^(-s)/s, checked by central differences.
        for &s in &[0.3, 0.9, 1.5, 4.0] {
            let h = 1e-6;
            let fd = (e1(s + h) - e1(s - h)) / (2.0 * h);
            let exact = -(-s).exp() / s;
            assert!(
                (fd - exact).abs() < 1e-8,
                "derivative mismatch at {s}: fd {fd}, exact {exact}"
            );
        }
    }

    #[test]
    fn small_argument_log_asymptotics() {
        // E1(s) + ln s -> -γ as s -> 0.
        let s = 1e-12;
        assert!((e1(s) + s.ln() + EULER_GAMMA).abs() < 1e-12);
    }

    #[test]
    fn edge_arguments() {
        assert!(e1(0.0).is_infinite());
        assert!(e1(-1.0).is_nan());
        assert_eq!(e1(800.0), 0.0); // underflow, harmless in tail sums
    }
}
