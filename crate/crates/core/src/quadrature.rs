//! Integration primitives.
//!
//! Finite intervals use the tanh-sinh (double exponential) rule
//! `x = tanh(pi/2 sinh t)`, whose nodes crowd double-exponentially into the
//! endpoints. Integrable endpoint singularities of the `[x(1-x)]^(-1/2)` type
//! are therefore handled without any special casing. Nodes are placed from the
//! nearer endpoint (`a + h*delta`, `b - h*delta`) so the distance to the
//! singular point is never lost to cancellation.
//!
//! Semi-infinite integrals of `e^(-y)`-weighted integrands are mapped onto a
//! fixed ladder of finite windows starting at the lower limit and extended until
//! the tail bound drops below tolerance.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Largest `|t|` used by the tanh-sinh rule. At `t = 6` the node sits about
/// `1e-275` from the endpoint, well below anything the integrands resolve.
const T_MAX: f64 = 6.0;

/// Minimum number of halvings before a tanh-sinh estimate is accepted.
const MIN_LEVEL: usize = 3;

/// Window ladder (offsets from the lower limit) for semi-infinite integrals.
const TAIL_WINDOWS: [f64; 5] = [0.0, 2.0, 6.0, 14.0, 40.0];
const TAIL_EXTENSION: f64 = 20.0;
const MAX_TAIL_EXTENSIONS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_refinements: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-8,
            abs_tol: 0.0,
            max_refinements: 30,
        }
    }
}

impl QuadratureSpec {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        QuadratureSpec {
            rel_tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::Domain(format!("rel_tol must be positive, got {}", self.rel_tol)));
        }
        if !(self.abs_tol >= 0.0) {
            return Err(Error::Domain(format!("abs_tol must be >= 0, got {}", self.abs_tol)));
        }
        if self.max_refinements == 0 || self.max_refinements > 30 {
            return Err(Error::Domain("max_refinements must be in 1..=30".into()));
        }
        Ok(())
    }

}

/// Integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Component-wise result of a vector-valued integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VecEstimate<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
}

impl<const N: usize> VecEstimate<N> {
    fn zero() -> Self {
        VecEstimate {
            value: [0.0; N],
            error: [0.0; N],
        }
    }
}

/// Distance from the nearer endpoint (in half-widths) and weight at `t >= 0`.
#[inline]
fn node(t: f64) -> (f64, f64) {
    let u = FRAC_PI_2 * t.sinh();
    let e = (-2.0 * u).exp();
    let delta = 2.0 * e / (1.0 + e);
    let weight = FRAC_PI_2 * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
    (delta, weight)
}

/// Running tanh-sinh sum over `[a, b]`.
struct Sampler<const N: usize> {
    a: f64,
    b: f64,
    half: f64,
    sum: [f64; N],
    /// Sum of |w f|, for the rounding floor.
    sum_abs: [f64; N],
    /// Innermost node evaluated on each side: (distance, |f|).
    edge: [(f64, [f64; N]); 2],
    /// A node on this side rounded onto the endpoint and was dropped.
    clipped: [bool; 2],
}

impl<const N: usize> Sampler<N> {
    fn new(a: f64, b: f64) -> Self {
        Sampler {
            a,
            b,
            half: 0.5 * (b - a),
            sum: [0.0; N],
            sum_abs: [0.0; N],
            edge: [(f64::INFINITY, [0.0; N]); 2],
            clipped: [false; 2],
        }
    }

    /// Adds the node at distance `half * delta` from endpoint `side`; returns
    /// the largest weighted contribution.
    fn add<F: FnMut(f64) -> [f64; N]>(&mut self, f: &mut F, side: usize, delta: f64, w: f64) -> f64 {
        let dist = self.half * delta;
        let x = if side == 0 { self.a + dist } else { self.b - dist };
        if x <= self.a || x >= self.b {
            self.clipped[side] = true;
            return 0.0;
        }
        let v = f(x);
        let mut mag = 0.0f64;
        for i in 0..N {
            let term = w * v[i];
            self.sum[i] += term;
            self.sum_abs[i] += term.abs();
            mag = mag.max(term.abs());
        }
        if dist < self.edge[side].0 {
            self.edge[side] = (dist, v.map(f64::abs));
        }
        mag
    }

    /// Mass hidden below the last representable node, bounded as for an
    /// inverse-square-root singularity: `int_0^d s^(-1/2) ds = 2 d * d^(-1/2)`.
    fn clipped_mass(&self, i: usize) -> f64 {
        (0..2)
            .filter(|&side| self.clipped[side])
            .map(|side| 2.0 * self.edge[side].0 * self.edge[side].1[i])
            .sum()
    }
}

/// Raw tanh-sinh over `[a, b]` with per-component absolute tolerances.
/// Returns the estimate and whether every component met its tolerance.
fn tanh_sinh<const N: usize, F>(
    f: &mut F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
    abs_tol: [f64; N],
) -> (VecEstimate<N>, bool)
where
    F: FnMut(f64) -> [f64; N],
{
    if b - a <= 0.0 {
        return (VecEstimate::zero(), true);
    }
    let mut s = Sampler::<N>::new(a, b);
    let half = s.half;

    // Level 0: h = 1, all integer t.
    let centre = f(a + half);
    for i in 0..N {
        s.sum[i] += FRAC_PI_2 * centre[i];
        s.sum_abs[i] += (FRAC_PI_2 * centre[i]).abs();
    }
    let mut j = 1;
    while (j as f64) <= T_MAX {
        let (delta, w) = node(j as f64);
        s.add(f, 0, delta, w);
        s.add(f, 1, delta, w);
        j += 1;
    }

    let mut h = 1.0;
    let mut estimate = s.sum.map(|v| v * half * h);
    let mut error = [f64::INFINITY; N];

    for level in 1..=spec.max_refinements {
        h *= 0.5;
        let scale = estimate.iter().fold(0.0f64, |m, v| m.max(v.abs())) / (half * h);
        // Odd multiples of h are the new nodes; stop a side once it goes quiet.
        let mut quiet = [0u8; 2];
        let mut k = 1usize;
        loop {
            let t = k as f64 * h;
            if t > T_MAX || (quiet[0] >= 2 && quiet[1] >= 2) {
                break;
            }
            let (delta, w) = node(t);
            for side in 0..2 {
                if quiet[side] < 2 {
                    let m = s.add(f, side, delta, w);
                    quiet[side] = if m <= 1e-22 * scale { quiet[side] + 1 } else { 0 };
                }
            }
            k += 2;
        }
        let next = s.sum.map(|v| v * half * h);
        for i in 0..N {
            error[i] = (next[i] - estimate[i]).abs() + s.clipped_mass(i);
        }
        estimate = next;
        if level >= MIN_LEVEL {
            // No rule resolves a cancelling sum below its rounding level.
            let ok = (0..N).all(|i| {
                let floor = 64.0 * f64::EPSILON * s.sum_abs[i] * half * h;
                error[i] <= (spec.rel_tol * estimate[i].abs()).max(abs_tol[i]).max(floor)
            });
            if ok {
                return (
                    VecEstimate {
                        value: estimate,
                        error,
                    },
                    true,
                );
            }
        }
    }
    (
        VecEstimate {
            value: estimate,
            error,
        },
        false,
    )
}

fn convergence_error<const N: usize>(est: &VecEstimate<N>) -> Error {
    // Report the worst component.
    let i = (0..N)
        .max_by(|&p, &q| {
            let rp = est.error[p] / est.value[p].abs().max(f64::MIN_POSITIVE);
            let rq = est.error[q] / est.value[q].abs().max(f64::MIN_POSITIVE);
            rp.total_cmp(&rq)
        })
        .unwrap_or(0);
    Error::Convergence {
        estimate: est.value[i],
        error_bound: est.error[i],
    }
}

/// Vector-valued integral over consecutive pieces `breakpoints[i]..breakpoints[i+1]`.
///
/// All components share every integrand evaluation. Each component is accepted
/// when its summed error is within `max(rel_tol*|value|, abs_tol[i])`.
pub fn integrate_pieces_vec<const N: usize, F>(
    mut f: F,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
    abs_tol: [f64; N],
) -> Result<VecEstimate<N>>
where
    F: FnMut(f64) -> [f64; N],
{
    spec.validate()?;
    if breakpoints.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::Domain("breakpoints must be non-decreasing".into()));
    }
    let pieces = breakpoints.len().saturating_sub(1).max(1);
    let run = |f: &mut F, piece_spec: &QuadratureSpec, piece_abs: [f64; N]| {
        let mut total = VecEstimate::<N>::zero();
        let mut magnitude = [0.0; N];
        let mut all_ok = true;
        for w in breakpoints.windows(2) {
            let (est, ok) = tanh_sinh(f, w[0], w[1], piece_spec, piece_abs);
            all_ok &= ok;
            for i in 0..N {
                total.value[i] += est.value[i];
                total.error[i] += est.error[i];
                magnitude[i] += est.value[i].abs();
            }
        }
        (total, magnitude, all_ok)
    };

    let piece_abs = abs_tol.map(|t| t / pieces as f64);
    let (total, magnitude, ok) = run(&mut f, spec, piece_abs);
    let accepted = |t: &VecEstimate<N>| {
        (0..N).all(|i| t.error[i] <= (spec.rel_tol * t.value[i].abs()).max(abs_tol[i]))
    };
    if ok && accepted(&total) {
        return Ok(total);
    }
    if pieces == 1 {
        return Err(convergence_error(&total));
    }

    // Pieces cancelled against each other: tighten each piece to the scale of the total.
    let shrink = (0..N)
        .map(|i| {
            if magnitude[i] > 0.0 {
                (total.value[i].abs() / magnitude[i]).clamp(1e-6, 1.0)
            } else {
                1.0
            }
        })
        .fold(1.0f64, f64::min);
    let tight = QuadratureSpec {
        rel_tol: spec.rel_tol * shrink,
        ..*spec
    };
    let (total, _, _) = run(&mut f, &tight, piece_abs);
    if accepted(&total) {
        Ok(total)
    } else {
        Err(convergence_error(&total))
    }
}

/// Scalar integral over `[a, b]`.
pub fn integrate_interval<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: FnMut(f64) -> f64,
{
    integrate_pieces(&mut f, &[a, b], spec)
}

/// Scalar integral over consecutive pieces.
pub fn integrate_pieces<F>(mut f: F, breakpoints: &[f64], spec: &QuadratureSpec) -> Result<Estimate>
where
    F: FnMut(f64) -> f64,
{
    let est = integrate_pieces_vec(|x| [f(x)], breakpoints, spec, [spec.abs_tol])?;
    Ok(Estimate {
        value: est.value[0],
        error: est.error[0],
    })
}

/// `oscillation_count + 1` equally spaced nodes on `[0, 1]` (just the endpoints when zero).
pub fn oscillation_nodes(oscillation_count: usize) -> Vec<f64> {
    let n = oscillation_count.max(1);
    (0..=n).map(|k| k as f64 / n as f64).collect()
}

/// Integral over `[0, 1]`, split at the oscillation nodes `k / oscillation_count`.
pub fn integrate_unit_interval<F>(
    f: F,
    spec: &QuadratureSpec,
    oscillation_count: usize,
) -> Result<Estimate>
where
    F: FnMut(f64) -> f64,
{
    integrate_pieces(f, &oscillation_nodes(oscillation_count), spec)
}

/// Integral over `[y0, inf)` of an integrand decaying like `poly(y) e^(-y)`.
///
/// The integral runs over the windows `y0 + [0, 2, 6, 14, 40]` and then keeps
/// appending windows of width 20 until `2 |f(y_end)|` (a bound on the remaining
/// tail for integrands of moderate polynomial degree) is below tolerance. The
/// tail bound is folded into the reported error.
pub fn integrate_semi_infinite<F>(mut f: F, y0: f64, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: FnMut(f64) -> f64,
{
    semi_infinite(|y| [f(y), 0.0], y0, spec).map(|(est, _)| est)
}

/// As [`integrate_semi_infinite`] for the first component; the second rides
/// along on the same nodes (its accuracy is not controlled) and its integral
/// is returned beside the estimate.
pub fn integrate_semi_infinite_with_companion<F>(f: F, y0: f64, spec: &QuadratureSpec) -> Result<(Estimate, f64)>
where
    F: FnMut(f64) -> [f64; 2],
{
    semi_infinite(f, y0, spec)
}

fn semi_infinite<F>(mut f: F, y0: f64, spec: &QuadratureSpec) -> Result<(Estimate, f64)>
where
    F: FnMut(f64) -> [f64; 2],
{
    spec.validate()?;
    if !(y0 >= 0.0 && y0.is_finite()) {
        return Err(Error::Domain(format!("lower limit must be finite and >= 0, got {y0}")));
    }

    let mut value = 0.0;
    let mut error = 0.0;
    let mut companion = 0.0;
    let mut piece = |f: &mut F, lo: f64, hi: f64, value: &mut f64, error: &mut f64| -> Result<()> {
        // Later windows only need to be accurate relative to what is already summed.
        let floor = (spec.rel_tol * value.abs() * 0.1).max(spec.abs_tol);
        let piece_spec = QuadratureSpec {
            abs_tol: floor,
            ..*spec
        };
        let (est, ok) = tanh_sinh(f, lo, hi, &piece_spec, [floor, f64::INFINITY]);
        if !ok {
            return Err(Error::Convergence {
                estimate: *value + est.value[0],
                error_bound: *error + est.error[0],
            });
        }
        *value += est.value[0];
        *error += est.error[0];
        companion += est.value[1];
        Ok(())
    };

    for w in TAIL_WINDOWS.windows(2) {
        piece(&mut f, y0 + w[0], y0 + w[1], &mut value, &mut error)?;
    }
    let mut end = y0 + TAIL_WINDOWS[TAIL_WINDOWS.len() - 1];
    for _ in 0..=MAX_TAIL_EXTENSIONS {
        let tail = 2.0 * f(end)[0].abs();
        if tail <= (spec.rel_tol * value.abs() * 0.1).max(spec.abs_tol) || tail == 0.0 {
            error += tail;
            return Ok((Estimate { value, error }, companion));
        }
        piece(&mut f, end, end + TAIL_EXTENSION, &mut value, &mut error)?;
        end += TAIL_EXTENSION;
    }
    Err(Error::Convergence {
        estimate: value,
        error_bound: error + 2.0 * f(end)[0].abs(),
    })
}
