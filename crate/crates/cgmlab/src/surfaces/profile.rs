//! Profile curve of the free-boundary-style minimal annulus of revolution in
//! the upper half-space model: a surface of revolution that is minimal for the
//! hyperbolic metric `(dx² + dz²)/z²` and crosses the plane `{z = 0}`
//! orthogonally along a circle.
//!
//! In the isothermal parameter `s` of the induced chart the profile
//! `(ρ(s), z(s))` with inclination `ψ(s)` obeys
//!
//! ```text
//! ρ' = −ρ sin ψ,    z' = ρ cos ψ,    ψ' = 2ρ sin ψ / z − cos ψ,
//! ```
//!
//! singular at the crossing `z = 0`.  The crossing data
//! `(ρ, z, ψ) = (ρ₀, 0, 0)` does *not* select a unique solution: the singular
//! equation admits a one-parameter family `ψ = s + B s² + …` through it.  The
//! symmetric member `B = 0` is exactly `ρ = ρ₀ sech s`, `z = ρ₀ tanh s`,
//! `ψ = gd s` — the round sphere, totally umbilic and useless as an annulus
//! with a genuine umbilic circle.  This module integrates the `B ≠ 0` branch:
//! the traceless second fundamental form vanishes transversally on the circle
//! `{s = 0}` (`φ ≈ ρ₀ B s`), which is exactly the configuration the umbilic
//! machinery is meant to exercise.
//!
//! Numerically the solution is seeded on both sides of the crossing by the
//! order-8 Taylor series of the `B`-branch (obtained by matching the equation
//! order by order; no logarithmic terms appear through `s⁸`) and continued by
//! fixed-step RK4.  Every integration is repeated at half the step and the
//! maximal state disagreement is kept as [`Profile::richardson_defect`].

use crate::jet::Jet3;
use crate::{Error, Result};

/// Series is used verbatim for `|s| ≤ S_SWITCH`; the RK4 grids start there.
/// At this radius the order-8 truncation error is ~1e-22 in values and
/// ~5e-13 in third derivatives.
const S_SWITCH: f64 = 5e-3;

/// Fixed RK4 step in `s`.
const RK_STEP: f64 = 1e-4;

/// Integration proceeds this far beyond the requested half-range so that
/// difference stencils of moderate half-width stay inside tabulated territory.
const MARGIN: f64 = 0.25;

/// State `(ρ, z, ψ, d)` with `d(s) = ∫₀ˢ ρ`, the signed intrinsic distance
/// from the crossing circle along a meridian (the chart is isothermal with
/// conformal factor `ρ`).
type State = [f64; 4];

fn rhs(y: &State) -> State {
    let (rho, z, psi) = (y[0], y[1], y[2]);
    let (sp, cp) = psi.sin_cos();
    [-rho * sp, rho * cp, 2.0 * rho * sp / z - cp, rho]
}

fn rk4_step(y: &State, h: f64) -> State {
    let k1 = rhs(y);
    let k2 = rhs(&advance(y, &k1, h / 2.0));
    let k3 = rhs(&advance(y, &k2, h / 2.0));
    let k4 = rhs(&advance(y, &k3, h));
    let mut out = *y;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn advance(y: &State, k: &State, h: f64) -> State {
    let mut out = *y;
    for i in 0..4 {
        out[i] += h * k[i];
    }
    out
}

/// RK4 step that subdivides near the crossing: the right-hand side has a
/// removable `1/z` singularity there, and although the solution is analytic,
/// the off-solution RK stages feel derivatives of the field scaling like
/// `1/z⁴`, which dominates the local error for |s| comparable to the step.
fn rk4_step_guarded(y: &State, s_from: f64, h: f64) -> State {
    let n = if s_from.abs() < 0.05 || (s_from + h).abs() < 0.05 { 20 } else { 1 };
    let mut out = *y;
    for _ in 0..n {
        out = rk4_step(&out, h / n as f64);
    }
    out
}

/// Taylor coefficients of the unit (`ρ₀ = 1`) profile around the crossing,
/// index = power of `s`.
struct Series {
    rho: [f64; 9],
    z: [f64; 9],
    psi: [f64; 9],
    d: [f64; 10],
}

impl Series {
    fn new(b: f64) -> Series {
        // the family is parametrised below by the s⁶-coefficient of z;
        // the inclination satisfies ψ''(0)/2 = B = 45 c₆ / 11
        let c6 = 11.0 * b / 45.0;
        let c6sq = c6 * c6;
        let rho = [
            1.0,
            0.0,
            -0.5,
            -15.0 * c6 / 11.0,
            5.0 / 24.0,
            27.0 * c6 / 22.0,
            315.0 * c6sq / 121.0 - 61.0 / 720.0,
            c6 * (145800.0 * c6sq - 57959.0) / 74536.0,
            277.0 / 8064.0 - 5085.0 * c6sq / 1694.0,
        ];
        let z = [
            0.0,
            1.0,
            0.0,
            -1.0 / 3.0,
            -15.0 * c6 / 11.0,
            2.0 / 15.0 - 405.0 * c6sq / 242.0,
            c6,
            5085.0 * c6sq / 1694.0 - 17.0 / 315.0,
            45.0 * c6 * (1755.0 * c6sq - 242.0) / 18634.0,
        ];
        let psi = [
            0.0,
            1.0,
            b,
            -1.0 / 6.0,
            -15.0 * c6 / 22.0,
            1.0 / 24.0 - 405.0 * c6sq / 242.0,
            c6 * (3751.0 - 24300.0 * c6sq) / 10648.0,
            4185.0 * c6sq / 3388.0 - 61.0 / 5040.0,
            0.0,
        ];
        let mut d = [0.0; 10];
        for (k, &r) in rho.iter().enumerate() {
            d[k + 1] = r / (k + 1) as f64;
        }
        Series { rho, z, psi, d }
    }

    /// Polynomial value and first three derivatives by Horner passes.
    fn eval(c: &[f64], s: f64) -> [f64; 4] {
        let mut out = [0.0; 4];
        for &ck in c.iter().rev() {
            out[3] = out[3] * s + 3.0 * out[2];
            out[2] = out[2] * s + 2.0 * out[1];
            out[1] = out[1] * s + out[0];
            out[0] = out[0] * s + ck;
        }
        out
    }

    fn state(&self, s: f64) -> State {
        [
            Series::eval(&self.rho, s)[0],
            Series::eval(&self.z, s)[0],
            Series::eval(&self.psi, s)[0],
            Series::eval(&self.d, s)[0],
        ]
    }
}

/// Profile value at one `s`: `(ρ, z)` and their first three `s`-derivatives
/// (already scaled by the crossing radius), plus the inclination and the
/// signed intrinsic distance `d` from the umbilic circle.
#[derive(Debug, Clone, Copy)]
pub struct ProfilePoint {
    /// `[ρ, ρ', ρ'', ρ''']`
    pub rho: [f64; 4],
    /// `[z, z', z'', z''']`
    pub z: [f64; 4],
    pub psi: f64,
    pub dist: f64,
}

impl ProfilePoint {
    /// Jet of `ρ(v)` in a chart where `v` is the isothermal profile parameter
    /// and `u` the rotation angle.
    pub fn rho_jet(&self) -> Jet3 {
        Jet3::from_v_derivs(self.rho)
    }

    pub fn z_jet(&self) -> Jet3 {
        Jet3::from_v_derivs(self.z)
    }
}

/// The tabulated two-sided profile solution.
pub struct Profile {
    rho0: f64,
    series: Series,
    /// states at `s = S_SWITCH + k·RK_STEP` (unit crossing radius)
    plus: Vec<State>,
    /// states at `s = −(S_SWITCH + k·RK_STEP)`
    minus: Vec<State>,
    s_max: f64,
    /// max state disagreement against a half-step re-integration
    pub richardson_defect: f64,
}

impl Profile {
    /// Build the profile with crossing radius `rho0`, branch parameter
    /// `shape` (`ψ''(0)/2`; must be nonzero — zero is the round sphere) and
    /// half-range `s_max` of the chart.
    pub fn build(rho0: f64, shape: f64, s_max: f64) -> Result<Profile> {
        if !(rho0 > 0.0) || !s_max.is_finite() || s_max <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "profile needs rho0 > 0 and s_max > 0, got rho0 = {rho0}, s_max = {s_max}"
            )));
        }
        if shape == 0.0 {
            return Err(Error::InvalidParams(
                "shape = 0 selects the round sphere (totally umbilic profile)".into(),
            ));
        }
        let series = Series::new(shape);
        let reach = s_max + MARGIN;
        let n = ((reach - S_SWITCH) / RK_STEP).ceil() as usize + 1;
        let mut defect: f64 = 0.0;
        let mut table = |sign: f64| -> Result<Vec<State>> {
            let mut states = Vec::with_capacity(n);
            let mut y = series.state(sign * S_SWITCH);
            let mut y_half = y;
            states.push(y);
            for k in 1..n {
                let s_k = sign * (S_SWITCH + (k - 1) as f64 * RK_STEP);
                y = rk4_step_guarded(&y, s_k, sign * RK_STEP);
                y_half = rk4_step_guarded(
                    &rk4_step_guarded(&y_half, s_k, sign * RK_STEP / 2.0),
                    s_k + sign * RK_STEP / 2.0,
                    sign * RK_STEP / 2.0,
                );
                if !(y[0] > 1e-6) {
                    return Err(Error::ProfileOde(format!(
                        "profile radius collapsed (rho = {:.3e}); shrink s_max below {:.4}",
                        y[0],
                        states.len() as f64 * RK_STEP
                    )));
                }
                states.push(y);
            }
            for i in 0..4 {
                defect = defect.max((y[i] - y_half[i]).abs());
            }
            Ok(states)
        };
        let plus = table(1.0)?;
        let minus = table(-1.0)?;
        if defect > 1e-9 {
            return Err(Error::ProfileOde(format!(
                "half-step re-integration disagrees by {defect:.3e} (limit 1e-9)"
            )));
        }
        Ok(Profile { rho0, series, plus, minus, s_max, richardson_defect: defect })
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    /// Unit-radius state at arbitrary `s`: nearest tabulated grid state plus a
    /// single short RK4 step (|δ| ≤ RK_STEP/2, local error ~δ⁵).
    fn state_at(&self, s: f64) -> Result<State> {
        if s.abs() <= S_SWITCH {
            return Ok(self.series.state(s));
        }
        let (table, sign) = if s > 0.0 { (&self.plus, 1.0) } else { (&self.minus, -1.0) };
        let k = ((s.abs() - S_SWITCH) / RK_STEP).round() as usize;
        if k >= table.len() {
            return Err(Error::ProfileOde(format!(
                "profile query at s = {s:.4} beyond tabulated range ±{:.4}",
                S_SWITCH + (table.len() - 1) as f64 * RK_STEP
            )));
        }
        let s_k = sign * (S_SWITCH + k as f64 * RK_STEP);
        let delta = s - s_k;
        Ok(if delta == 0.0 { table[k] } else { rk4_step_guarded(&table[k], s_k, delta) })
    }

    /// Full profile point with derivatives, scaled to crossing radius `ρ₀`.
    pub fn query(&self, s: f64) -> Result<ProfilePoint> {
        let (mut rho, mut z, psi, dist) = if s.abs() <= S_SWITCH {
            // series gives all derivatives directly, free of the z = 0
            // singularity of the differentiated equations
            let r = Series::eval(&self.series.rho, s);
            let z = Series::eval(&self.series.z, s);
            let p = Series::eval(&self.series.psi, s)[0];
            let d = Series::eval(&self.series.d, s)[0];
            (r, z, p, d)
        } else {
            let y = self.state_at(s)?;
            let (rho, zz, psi, d) = (y[0], y[1], y[2], y[3]);
            let (sp, cp) = psi.sin_cos();
            // derivatives of the state by repeated differentiation of the
            // equation; only ψ'' is needed to reach third derivatives of ρ, z
            let rho1 = -rho * sp;
            let z1 = rho * cp;
            let t = 2.0 * rho * sp / zz;
            let psi1 = t - cp;
            let rho2 = -rho1 * sp - rho * cp * psi1;
            let z2 = rho1 * cp - rho * sp * psi1;
            let t1 = 2.0 * (rho1 * sp + rho * cp * psi1) / zz - t * z1 / zz;
            let psi2 = t1 + sp * psi1;
            let rho3 = -rho2 * sp - 2.0 * rho1 * cp * psi1 - rho * (cp * psi2 - sp * psi1 * psi1);
            let z3 = rho2 * cp - 2.0 * rho1 * sp * psi1 - rho * (cp * psi1 * psi1 + sp * psi2);
            ([rho, rho1, rho2, rho3], [zz, z1, z2, z3], psi, d)
        };
        for x in rho.iter_mut().chain(z.iter_mut()) {
            *x *= self.rho0;
        }
        Ok(ProfilePoint { rho, z, psi, dist: dist * self.rho0 })
    }

    /// Signed intrinsic distance from the umbilic circle along a meridian.
    pub fn distance(&self, s: f64) -> Result<f64> {
        Ok(self.query(s)?.dist)
    }
}
