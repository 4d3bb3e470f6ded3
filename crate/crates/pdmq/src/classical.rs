//! Classical PDM dynamics: Euler–Lagrange acceleration, fixed-step RK4
//! integration, conservation reports, and period measurement.

use crate::expr::Expr;
use crate::geometry::{GeometryError, ProblemDef};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalState {
    pub x: f64,
    pub v: f64,
    pub t: f64,
}

/// Right-hand side of the equation of motion in the form
/// a(x, v) = c2(x) v^2 + c0(x), i.e.
/// xdd = -(m'/2m) v^2 - V'/m.
#[derive(Debug, Clone)]
pub struct Acceleration {
    /// Coefficient of v^2: -m'/(2m).
    pub v2_coeff: Expr,
    /// Velocity-independent force term: -V'/m.
    pub force: Expr,
}

impl Acceleration {
    pub fn eval(&self, p: &ProblemDef, x: f64, v: f64) -> Result<f64, GeometryError> {
        let c2 = self.v2_coeff.eval(x, &p.bindings)?;
        let c0 = self.force.eval(x, &p.bindings)?;
        Ok(c2 * v * v + c0)
    }
}

/// Symbolic acceleration of the PDM Euler–Lagrange equation
/// m xdd + (1/2) m' xd^2 + V' = 0.
pub fn acceleration(p: &ProblemDef) -> Acceleration {
    let m = p.mass.clone();
    let v2_coeff = ((m.diff() / (Expr::num(2.0) * m.clone())).neg()).simplify();
    let force = ((p.potential.diff() / m).neg()).simplify();
    Acceleration { v2_coeff, force }
}

/// Uniformly sampled trajectory with derived conserved-quantity series.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub ts: Vec<f64>,
    pub xs: Vec<f64>,
    pub vs: Vec<f64>,
    /// Energy E(t) = (1/2) m v^2 + V.
    pub energies: Vec<f64>,
    /// Noether momentum P(t) = sqrt(m) v.
    pub noether: Vec<f64>,
    pub dt: f64,
    /// True when integration stopped early at the domain boundary.
    pub domain_exit: bool,
}

#[derive(Debug, Error)]
pub enum ClassicalError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("initial state x = {0} is outside the domain interior")]
    InitialStateOutside(f64),
    #[error("time step underflow at t = {0}")]
    StepUnderflow(f64),
    #[error("trajectory is not oscillatory (fewer than 3 velocity sign changes)")]
    NonOscillatory,
    #[error("empty trajectory")]
    EmptyTrajectory,
}

/// Classic fixed-step RK4. Stops one step before the first sample whose x
/// would leave the open domain and flags the exit.
pub fn integrate(
    p: &ProblemDef,
    s0: ClassicalState,
    dt: f64,
    total_time: f64,
) -> Result<Trajectory, ClassicalError> {
    assert!(dt > 0.0 && total_time > 0.0);
    if !p.domain.contains(s0.x) {
        return Err(ClassicalError::InitialStateOutside(s0.x));
    }
    let accel = acceleration(p);
    let n_steps = (total_time / dt).round() as usize;
    let mut tr = Trajectory {
        ts: Vec::with_capacity(n_steps + 1),
        xs: Vec::with_capacity(n_steps + 1),
        vs: Vec::with_capacity(n_steps + 1),
        energies: Vec::with_capacity(n_steps + 1),
        noether: Vec::with_capacity(n_steps + 1),
        dt,
        domain_exit: false,
    };
    let mut x = s0.x;
    let mut v = s0.v;
    let mut t = s0.t;
    push_sample(p, &mut tr, t, x, v)?;
    for _ in 0..n_steps {
        if t + dt == t {
            return Err(ClassicalError::StepUnderflow(t));
        }
        let step = rk4_step(p, &accel, x, v, dt);
        let (nx, nv) = match step {
            Ok(s) => s,
            // a stage left the domain: stop cleanly with what we have
            Err(GeometryError::MassNotPositive { .. }) | Err(GeometryError::Eval(_)) => {
                tr.domain_exit = true;
                break;
            }
            Err(e) => return Err(e.into()),
        };
        if !p.domain.contains(nx) {
            tr.domain_exit = true;
            break;
        }
        x = nx;
        v = nv;
        t += dt;
        push_sample(p, &mut tr, t, x, v)?;
    }
    Ok(tr)
}

fn rk4_step(
    p: &ProblemDef,
    accel: &Acceleration,
    x: f64,
    v: f64,
    dt: f64,
) -> Result<(f64, f64), GeometryError> {
    let a1 = accel.eval(p, x, v)?;
    let (x2, v2) = (x + 0.5 * dt * v, v + 0.5 * dt * a1);
    let a2 = accel.eval(p, x2, v2)?;
    let (x3, v3) = (x + 0.5 * dt * v2, v + 0.5 * dt * a2);
    let a3 = accel.eval(p, x3, v3)?;
    let (x4, v4) = (x + dt * v3, v + dt * a3);
    let a4 = accel.eval(p, x4, v4)?;
    Ok((
        x + dt / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4),
        v + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4),
    ))
}

fn push_sample(
    p: &ProblemDef,
    tr: &mut Trajectory,
    t: f64,
    x: f64,
    v: f64,
) -> Result<(), ClassicalError> {
    let m = p.mass_at(x)?;
    let pot = p.potential_at(x)?;
    tr.ts.push(t);
    tr.xs.push(x);
    tr.vs.push(v);
    tr.energies.push(0.5 * m * v * v + pot);
    tr.noether.push(m.sqrt() * v);
    Ok(())
}

/// Relative drifts of the conserved quantities along a trajectory.
/// The Noether drift is reported only for geodesic motion (V identically
/// zero), where P is actually conserved.
#[derive(Debug, Clone, Copy)]
pub struct ConservationReport {
    pub energy_drift: f64,
    pub noether_drift: Option<f64>,
}

pub fn conservation_report(
    p: &ProblemDef,
    tr: &Trajectory,
) -> Result<ConservationReport, ClassicalError> {
    if tr.ts.is_empty() {
        return Err(ClassicalError::EmptyTrajectory);
    }
    let drift = |series: &[f64]| {
        let q0 = series[0];
        let scale = q0.abs().max(1.0);
        series
            .iter()
            .map(|q| (q - q0).abs() / scale)
            .fold(0.0, f64::max)
    };
    let noether_drift = if potential_is_zero(p) {
        Some(drift(&tr.noether))
    } else {
        None
    };
    Ok(ConservationReport {
        energy_drift: drift(&tr.energies),
        noether_drift,
    })
}

fn potential_is_zero(p: &ProblemDef) -> bool {
    if p.potential.simplify() == Expr::Num(0.0) {
        return true;
    }
    let (a, b) = p.domain.sample_window(3.0);
    (0..17).all(|i| {
        let x = a + (b - a) * i as f64 / 16.0;
        matches!(p.potential.eval(x, &p.bindings), Ok(v) if v == 0.0)
    })
}

/// Period from successive same-direction zero crossings of v, each
/// refined by local quadratic interpolation, averaged over all cycles.
pub fn measure_period(tr: &Trajectory) -> Result<f64, ClassicalError> {
    let n = tr.vs.len();
    let mut crossings: Vec<(f64, bool)> = Vec::new(); // (time, downward)
    for i in 0..n.saturating_sub(1) {
        let (v0, v1) = (tr.vs[i], tr.vs[i + 1]);
        if v0 == 0.0 && i > 0 {
            crossings.push((tr.ts[i], tr.vs[i - 1] > 0.0));
        } else if v0 * v1 < 0.0 {
            let t = refine_crossing(tr, i);
            crossings.push((t, v0 > 0.0));
        }
    }
    if crossings.len() < 3 {
        return Err(ClassicalError::NonOscillatory);
    }
    let mut periods = Vec::new();
    for w in crossings.windows(3) {
        if w[0].1 == w[2].1 {
            periods.push(w[2].0 - w[0].0);
        }
    }
    if periods.is_empty() {
        return Err(ClassicalError::NonOscillatory);
    }
    Ok(periods.iter().sum::<f64>() / periods.len() as f64)
}

/// Root of the parabola through three samples around the sign change in
/// [t_i, t_{i+1}].
fn refine_crossing(tr: &Trajectory, i: usize) -> f64 {
    let j = i.clamp(1, tr.ts.len() - 2);
    let (t0, t1, t2) = (tr.ts[j - 1], tr.ts[j], tr.ts[j + 1]);
    let (v0, v1, v2) = (tr.vs[j - 1], tr.vs[j], tr.vs[j + 1]);
    // Newton form: v(t) = v0 + d01 (t - t0) + a (t - t0)(t - t1)
    let d01 = (v1 - v0) / (t1 - t0);
    let d12 = (v2 - v1) / (t2 - t1);
    let a = (d12 - d01) / (t2 - t0);
    // secant start inside the bracketing interval
    let mut t = tr.ts[i] - tr.vs[i] * (tr.ts[i + 1] - tr.ts[i]) / (tr.vs[i + 1] - tr.vs[i]);
    for _ in 0..3 {
        let f = v0 + d01 * (t - t0) + a * (t - t0) * (t - t1);
        let df = d01 + a * ((t - t0) + (t - t1));
        if df == 0.0 {
            break;
        }
        t -= f / df;
    }
    t.clamp(tr.ts[i], tr.ts[i + 1])
}
