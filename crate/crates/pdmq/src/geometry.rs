//! Geometry of the PDM metric ds^2 = m(x) dx^2: Killing vector field,
//! invariant measure density, Noether momentum coefficients, and the
//! numeric arclength coordinate map y = ∫ sqrt(m) dx.

use crate::expr::{Bindings, EvalError, Expr};
use crate::numeric::{adaptive_quad, newton_bisect, MonotoneCubic, QuadError};
use thiserror::Error;

/// Classification of a domain endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Endpoint {
    /// Finite endpoint where the mass stays regular.
    Regular(f64),
    /// Finite endpoint where the mass blows up or vanishes.
    SingularMass(f64),
    Infinite,
}

impl Endpoint {
    pub fn value(&self, sign: f64) -> f64 {
        match self {
            Endpoint::Regular(v) | Endpoint::SingularMass(v) => *v,
            Endpoint::Infinite => sign * f64::INFINITY,
        }
    }
}

/// Open interval on which a problem lives. The mass must be strictly
/// positive and finite on the interior.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub lo: Endpoint,
    pub hi: Endpoint,
}

impl Domain {
    pub fn real_line() -> Domain {
        Domain {
            lo: Endpoint::Infinite,
            hi: Endpoint::Infinite,
        }
    }

    pub fn open(lo: f64, hi: f64) -> Domain {
        assert!(lo < hi);
        Domain {
            lo: Endpoint::Regular(lo),
            hi: Endpoint::Regular(hi),
        }
    }

    pub fn lo_value(&self) -> f64 {
        self.lo.value(-1.0)
    }

    pub fn hi_value(&self) -> f64 {
        self.hi.value(1.0)
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo_value() && x < self.hi_value()
    }

    /// A finite window inside the interior, used for probing and for
    /// residual sampling. Infinite sides are clipped to `clip`; finite
    /// sides are shrunk by a relative offset.
    pub fn sample_window(&self, clip: f64) -> (f64, f64) {
        let lo = match self.lo {
            Endpoint::Infinite => -clip,
            Endpoint::Regular(v) | Endpoint::SingularMass(v) => v,
        };
        let hi = match self.hi {
            Endpoint::Infinite => clip,
            Endpoint::Regular(v) | Endpoint::SingularMass(v) => v,
        };
        let width = hi - lo;
        (lo + 1e-3 * width, hi - 1e-3 * width)
    }

    /// Default anchor: 0 when interior, else the midpoint of the sample
    /// window.
    pub fn default_anchor(&self) -> f64 {
        if self.contains(0.0) {
            0.0
        } else {
            let (a, b) = self.sample_window(5.0);
            0.5 * (a + b)
        }
    }
}

/// A PDM system: mass profile, potential, domain, and parameter values.
#[derive(Debug, Clone)]
pub struct ProblemDef {
    pub mass: Expr,
    pub potential: Expr,
    pub domain: Domain,
    pub bindings: Bindings,
}

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("mass is not strictly positive at x = {x} (m = {m})")]
    MassNotPositive { x: f64, m: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("quadrature failed to converge approaching endpoint x = {endpoint}")]
    Quadrature { endpoint: f64 },
    #[error("anchor x0 = {0} is outside the domain interior")]
    AnchorOutsideDomain(f64),
    #[error("arclength inverse query y = {0} is outside the tabulated range")]
    InverseOutOfRange(f64),
}

impl ProblemDef {
    pub fn new(mass: Expr, potential: Expr, domain: Domain, bindings: Bindings) -> ProblemDef {
        ProblemDef {
            mass,
            potential,
            domain,
            bindings,
        }
    }

    pub fn mass_at(&self, x: f64) -> Result<f64, GeometryError> {
        let m = self.mass.eval(x, &self.bindings)?;
        if m > 0.0 && m.is_finite() {
            Ok(m)
        } else {
            Err(GeometryError::MassNotPositive { x, m })
        }
    }

    pub fn potential_at(&self, x: f64) -> Result<f64, GeometryError> {
        Ok(self.potential.eval(x, &self.bindings)?)
    }

    /// Verify m > 0 at a spread of interior probe points.
    pub fn validate_mass(&self) -> Result<(), GeometryError> {
        let (a, b) = self.domain.sample_window(5.0);
        for i in 0..31 {
            let x = a + (b - a) * (i as f64) / 30.0;
            self.mass_at(x)?;
        }
        Ok(())
    }
}

/// Killing field, measure density, and the two residual expressions whose
/// vanishing characterizes them.
#[derive(Debug, Clone)]
pub struct KillingData {
    /// f with X = f(x) d/dx; normalized as f = m^{-1/2}.
    pub killing_component: Expr,
    /// Invariant measure density rho = sqrt(m).
    pub density: Expr,
    /// f m' + 2 m f' (vanishes identically for the Killing field).
    pub killing_residual: Expr,
    /// f rho' + rho f' (measure invariance condition).
    pub measure_residual: Expr,
}

/// Derive the Killing data of the metric m(x) dx^2.
pub fn derive_killing(p: &ProblemDef) -> Result<KillingData, GeometryError> {
    p.validate_mass()?;
    let m = p.mass.clone();
    let f = Expr::num(1.0) / m.clone().sqrt();
    let rho = m.clone().sqrt();
    let killing_residual =
        (f.clone() * m.diff() + Expr::num(2.0) * m.clone() * f.diff()).simplify();
    let measure_residual = (f.clone() * rho.diff() + rho.clone() * f.diff()).simplify();
    Ok(KillingData {
        killing_component: f.simplify(),
        density: rho.simplify(),
        killing_residual,
        measure_residual,
    })
}

impl KillingData {
    /// Max of |killing residual| and |measure residual| over the given
    /// points.
    pub fn max_residuals(
        &self,
        b: &Bindings,
        points: &[f64],
    ) -> Result<(f64, f64), GeometryError> {
        let mut rk: f64 = 0.0;
        let mut rm: f64 = 0.0;
        for &x in points {
            rk = rk.max(self.killing_residual.eval(x, b)?.abs());
            rm = rm.max(self.measure_residual.eval(x, b)?.abs());
        }
        Ok((rk, rm))
    }
}

/// Coefficients of the Noether momentum: P = c_v(x) v = c_p(x) p.
#[derive(Debug, Clone)]
pub struct NoetherMomentum {
    /// c_v = sqrt(m): velocity-form coefficient.
    pub velocity_coeff: Expr,
    /// c_p = 1/sqrt(m): phase-space-form coefficient.
    pub phase_coeff: Expr,
}

pub fn noether_momentum(p: &ProblemDef) -> NoetherMomentum {
    NoetherMomentum {
        velocity_coeff: p.mass.clone().sqrt().simplify(),
        phase_coeff: (Expr::num(1.0) / p.mass.clone().sqrt()).simplify(),
    }
}

/// Numeric arclength map y(x) = ∫_{x0}^{x} sqrt(m) dt and its inverse.
///
/// The map is tabulated at uniform y spacing by marching dx/dy = m^{-1/2}
/// with a quadrature-polished RK4; forward and inverse queries refine
/// against adaptive quadrature, so round trips hold to ~1e-12.
#[derive(Debug, Clone)]
pub struct ArclengthMap {
    mass: Expr,
    bindings: Bindings,
    pub anchor: f64,
    /// Tabulated (x, y) pairs, strictly increasing in both.
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// y-domain endpoints; infinite when the arclength diverges.
    pub y_lo: f64,
    pub y_hi: f64,
}

const QUAD_TOL: f64 = 1e-12;

impl ArclengthMap {
    fn sqrt_m(&self, x: f64) -> Result<f64, GeometryError> {
        let m = self.mass.eval(x, &self.bindings)?;
        if m > 0.0 && m.is_finite() {
            Ok(m.sqrt())
        } else {
            Err(GeometryError::MassNotPositive { x, m })
        }
    }

    fn quad(&self, a: f64, b: f64) -> Result<f64, GeometryError> {
        let mut f = |x: f64| self.sqrt_m(x);
        adaptive_quad(&mut f, a, b, QUAD_TOL).map_err(|e| match e {
            QuadError::Integrand(err) => err,
            QuadError::NoConvergence { b, .. } => GeometryError::Quadrature { endpoint: b },
        })
    }

    /// Forward map y(x); valid for any interior x, also beyond the table.
    pub fn forward(&self, x: f64) -> Result<f64, GeometryError> {
        // integrate from the nearest tabulated node
        let i = match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => return Ok(self.ys[i]),
            Err(i) => i,
        };
        let node = if i == 0 {
            0
        } else if i >= self.xs.len() {
            self.xs.len() - 1
        } else if (x - self.xs[i - 1]).abs() < (self.xs[i] - x).abs() {
            i - 1
        } else {
            i
        };
        Ok(self.ys[node] + self.quad(self.xs[node], x)?)
    }

    /// Inverse map x(y) for y within the tabulated range.
    pub fn inverse(&self, y: f64) -> Result<f64, GeometryError> {
        let n = self.ys.len();
        if y < self.ys[0] - 1e-9 || y > self.ys[n - 1] + 1e-9 {
            return Err(GeometryError::InverseOutOfRange(y));
        }
        let i = match self.ys.binary_search_by(|v| v.partial_cmp(&y).unwrap()) {
            Ok(i) => return Ok(self.xs[i]),
            Err(i) => i.clamp(1, n - 1),
        };
        let (lo, hi) = (self.xs[i - 1], self.xs[i]);
        // cubic initial guess, then safeguarded Newton on the quadrature
        let interp = MonotoneCubic::new(
            self.ys[i.saturating_sub(2)..(i + 2).min(n)].to_vec(),
            self.xs[i.saturating_sub(2)..(i + 2).min(n)].to_vec(),
        );
        let x_init = interp.eval(y).clamp(lo, hi);
        let y_lo_node = self.ys[i - 1];
        let mut g = |x: f64| -> Result<(f64, f64), GeometryError> {
            let val = y_lo_node + self.quad(lo, x)? - y;
            Ok((val, self.sqrt_m(x)?))
        };
        newton_bisect(&mut g, lo, hi, x_init, 1e-13, 40)
    }

    /// Tabulated (x, y) pairs.
    pub fn table(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    /// y-range actually covered by the table (inverse queries are valid
    /// here); strictly inside (y_lo, y_hi) when those are finite.
    pub fn tabulated_range(&self) -> (f64, f64) {
        (self.ys[0], self.ys[self.ys.len() - 1])
    }
}

/// Build the arclength map anchored at `x0` with roughly `resolution`
/// tabulated points, spanning |y| up to 16 (or the finite y-limits).
pub fn arclength_map(
    p: &ProblemDef,
    x0: f64,
    resolution: usize,
) -> Result<ArclengthMap, GeometryError> {
    arclength_map_with_span(p, x0, resolution, 16.0)
}

/// As [`arclength_map`], with an explicit |y| span for the table.
pub fn arclength_map_with_span(
    p: &ProblemDef,
    x0: f64,
    resolution: usize,
    y_span: f64,
) -> Result<ArclengthMap, GeometryError> {
    if !p.domain.contains(x0) {
        return Err(GeometryError::AnchorOutsideDomain(x0));
    }
    let mut map = ArclengthMap {
        mass: p.mass.clone(),
        bindings: p.bindings.clone(),
        anchor: x0,
        xs: vec![x0],
        ys: vec![0.0],
        y_lo: 0.0,
        y_hi: 0.0,
    };

    // y-limit on each side via geometric subdivision toward the endpoint
    let y_hi_limit = side_limit(&map, x0, p.domain.hi_value(), y_span)?;
    let y_lo_limit = side_limit(&map, x0, p.domain.lo_value(), y_span)?;
    map.y_hi = y_hi_limit;
    map.y_lo = y_lo_limit;

    let n_side = (resolution / 2).max(8);
    // at singular-mass walls, leave a real margin from the finite y-limit:
    // for square-root-type maps the inverse image of a hairline margin
    // would round onto the wall itself. Regular endpoints are reached
    // exactly.
    let clip = |limit: f64, span: f64, singular: bool| -> f64 {
        if limit.abs() < span {
            if singular {
                limit - limit.signum() * (1e-5 * limit.abs()).max(1e-8)
            } else {
                limit
            }
        } else {
            span * limit.signum()
        }
    };
    let hi_singular = matches!(p.domain.hi, Endpoint::SingularMass(_));
    let lo_singular = matches!(p.domain.lo, Endpoint::SingularMass(_));
    let tab_hi = clip(y_hi_limit.min(y_span), y_span, hi_singular);
    let tab_lo = clip(y_lo_limit.max(-y_span), y_span, lo_singular);

    let hi_guard = if hi_singular { p.domain.hi_value() } else { f64::INFINITY };
    let lo_guard = if lo_singular { p.domain.lo_value() } else { f64::NEG_INFINITY };
    let upper = march_side(&map, x0, tab_hi, n_side, hi_guard)?;
    let lower = march_side(&map, x0, tab_lo, n_side, lo_guard)?;

    let mut xs = Vec::with_capacity(2 * n_side + 1);
    let mut ys = Vec::with_capacity(2 * n_side + 1);
    for &(x, y) in lower.iter().rev() {
        xs.push(x);
        ys.push(y);
    }
    xs.push(x0);
    ys.push(0.0);
    for &(x, y) in &upper {
        xs.push(x);
        ys.push(y);
    }
    map.xs = xs;
    map.ys = ys;
    Ok(map)
}

/// y-limit toward one endpoint: finite value when the arclength converges,
/// +-infinity when it exceeds the span or diverges.
fn side_limit(map: &ArclengthMap, x0: f64, endpoint: f64, y_span: f64) -> Result<f64, GeometryError> {
    let sign = if endpoint > x0 { 1.0 } else { -1.0 };
    let mut y = 0.0;
    let mut x_prev = x0;
    let mut prev_dy = f64::NAN;
    let mut last_dy = f64::NAN;
    for k in 1..200 {
        let x_next = if endpoint.is_finite() {
            endpoint - (endpoint - x0) * 0.5f64.powi(k)
        } else {
            x0 + sign * 2.0f64.powi(k - 1)
        };
        // halving toward a finite endpoint eventually stalls at floating
        // point resolution; sum the remaining geometric tail instead,
        // using the ratio of the last two completed increments
        let stalled = endpoint.is_finite()
            && (x_next - x_prev).abs()
                <= 4.0 * f64::EPSILON * x_prev.abs().max(endpoint.abs()).max(1e-300);
        if stalled {
            if last_dy.is_finite() && prev_dy.is_finite() {
                let r = last_dy.abs() / prev_dy.abs();
                if r < 0.99 {
                    return Ok(y + sign * last_dy.abs() * r / (1.0 - r));
                }
            }
            return Ok(sign * f64::INFINITY);
        }
        let dy = map.quad(x_prev, x_next)?;
        y += dy;
        x_prev = x_next;
        if y.abs() > y_span {
            return Ok(sign * f64::INFINITY);
        }
        if dy.abs() < 1e-13 * (1.0 + y.abs()) {
            return Ok(y);
        }
        prev_dy = last_dy;
        last_dy = dy;
    }
    Ok(sign * f64::INFINITY)
}

/// March from the anchor to |y| = y_target in n uniform y-steps,
/// RK4 on dx/dy = m^{-1/2} plus a quadrature polish at each node.
fn march_side(
    map: &ArclengthMap,
    x0: f64,
    y_target: f64,
    n: usize,
    bound: f64,
) -> Result<Vec<(f64, f64)>, GeometryError> {
    let mut out = Vec::with_capacity(n);
    if y_target == 0.0 {
        return Ok(out);
    }
    // keep predictor stages strictly inside a finite domain endpoint; the
    // mass is singular there and the RK4 stages may otherwise overshoot
    let guard = |anchor: f64, xx: f64| -> f64 {
        if bound.is_finite() {
            // floor the inset at one ulp of the wall position: for marches
            // that close in to ~1e-12 of a wall at |bound| ~ 1, the
            // proportional inset would round away entirely and the clamp
            // itself would land exactly on the singular point
            let inset = (1e-4 * (bound - anchor).abs()).max(f64::EPSILON * bound.abs());
            if bound > x0 {
                xx.min(bound - inset)
            } else {
                xx.max(bound + inset)
            }
        } else {
            xx
        }
    };
    let dy = y_target / n as f64;
    let mut x = x0;
    let mut y = 0.0;
    for i in 1..=n {
        // RK4 with substeps for the predictor
        let nsub = 4;
        let h = dy / nsub as f64;
        for _ in 0..nsub {
            let x_in = x;
            let k1 = 1.0 / map.sqrt_m(x)?;
            let k2 = 1.0 / map.sqrt_m(guard(x_in, x + 0.5 * h * k1))?;
            let k3 = 1.0 / map.sqrt_m(guard(x_in, x + 0.5 * h * k2))?;
            let k4 = 1.0 / map.sqrt_m(guard(x_in, x + h * k3))?;
            x = guard(x_in, x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
        }
        let x_prev = if i == 1 { x0 } else { out[i - 2].0 };
        let y_prev = y;
        y = i as f64 * dy;
        // polish: solve quad(x_prev, x) = dy
        let width = (x - x_prev).abs().max(1e-12);
        let (lo, hi) = if dy > 0.0 {
            (x_prev, guard(x_prev, x + 0.5 * width))
        } else {
            (guard(x_prev, x - 0.5 * width), x_prev)
        };
        let mut g = |xx: f64| -> Result<(f64, f64), GeometryError> {
            let val = y_prev + map.quad(x_prev, xx)? - y;
            Ok((val, map.sqrt_m(xx)?))
        };
        x = newton_bisect(&mut g, lo, hi, x, 1e-13, 30)?;
        out.push((x, y));
    }
    Ok(out)
}
