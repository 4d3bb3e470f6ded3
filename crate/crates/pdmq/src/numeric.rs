//! Shared numeric kernels: adaptive Gauss–Kronrod quadrature, monotone
//! cubic (Fritsch–Carlson) interpolation, and a bisection-safeguarded
//! Newton root polish.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuadError<E> {
    #[error("integrand fault: {0}")]
    Integrand(E),
    #[error("quadrature did not converge on [{a}, {b}]")]
    NoConvergence { a: f64, b: f64 },
}

// 7-point Gauss / 15-point Kronrod pair on [-1, 1], positive half.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One G7/K15 panel: returns (kronrod value, error estimate).
fn gk15<E>(f: &mut impl FnMut(f64) -> Result<f64, E>, a: f64, b: f64) -> Result<(f64, f64), E> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = 0.0;
    let mut gauss = 0.0;
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let (fl, fr);
        if x == 0.0 {
            fl = f(c)?;
            fr = 0.0;
        } else {
            fl = f(c - h * x)?;
            fr = f(c + h * x)?;
        }
        kron += wk * (fl + fr);
        if i % 2 == 1 {
            gauss += WG[i / 2] * (fl + fr);
        } else if x == 0.0 {
            gauss += WG[3] * fl;
        }
    }
    Ok((kron * h, (kron - gauss).abs() * h.abs()))
}

/// Adaptive quadrature of `f` over [a, b] (a may exceed b; the result is
/// signed) to absolute tolerance `tol`.
pub fn adaptive_quad<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, QuadError<E>> {
    if a == b {
        return Ok(0.0);
    }
    adaptive_rec(f, a, b, tol, 0)
}

fn adaptive_rec<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, QuadError<E>> {
    let (val, err) = gk15(f, a, b).map_err(QuadError::Integrand)?;
    // Accept on the requested tolerance, on a relative noise floor, or on
    // the width floor. The noise floor matters: even for a constant
    // integrand |kron - gauss| is ~3.4e-15 |val| because the two weight
    // tables, stored to 15 digits, do not sum to exactly the same value.
    // Below that level the estimate is irreducible noise that shrinks only
    // linearly with the width -- exactly like the halved tolerance -- and
    // without the floor the recursion degenerates into a full binary tree
    // down to the width floor.
    let floor = 1e-13 * val.abs();
    if err <= tol.max(floor) || (b - a).abs() <= 1e-15 * (a.abs() + b.abs() + 1.0) {
        return Ok(val);
    }
    if depth >= 60 {
        return Err(QuadError::NoConvergence { a, b });
    }
    let c = 0.5 * (a + b);
    let left = adaptive_rec(f, a, c, 0.5 * tol, depth + 1)?;
    let right = adaptive_rec(f, c, b, 0.5 * tol, depth + 1)?;
    Ok(left + right)
}

/// Monotone cubic interpolant on strictly increasing abscissae
/// (Fritsch–Carlson limited slopes). Queries clamp to the table range.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> MonotoneCubic {
        assert!(xs.len() == ys.len() && xs.len() >= 2);
        assert!(xs.windows(2).all(|w| w[0] < w[1]), "abscissae must increase");
        let n = xs.len();
        let deltas: Vec<f64> = (0..n - 1)
            .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
            .collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = deltas[0];
        slopes[n - 1] = deltas[n - 2];
        for i in 1..n - 1 {
            if deltas[i - 1] * deltas[i] <= 0.0 {
                slopes[i] = 0.0;
            } else {
                // harmonic mean keeps the interpolant monotone
                let w1 = 2.0 * (xs[i + 1] - xs[i]) + (xs[i] - xs[i - 1]);
                let w2 = (xs[i + 1] - xs[i]) + 2.0 * (xs[i] - xs[i - 1]);
                slopes[i] = (w1 + w2) / (w1 / deltas[i - 1] + w2 / deltas[i]);
            }
        }
        MonotoneCubic { xs, ys, slopes }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0] + self.slopes[0] * (x - self.xs[0]);
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1] + self.slopes[n - 1] * (x - self.xs[n - 1]);
        }
        let i = match self
            .xs
            .binary_search_by(|v| v.partial_cmp(&x).unwrap())
        {
            Ok(i) => return self.ys[i],
            Err(i) => i - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + m0 * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + m1 * (t3 - t2)
    }
}

/// Newton iteration with a bisection safeguard on a bracketing interval
/// [lo, hi] where `g` changes sign. `g` returns (value, derivative).
pub fn newton_bisect<E>(
    g: &mut impl FnMut(f64) -> Result<(f64, f64), E>,
    mut lo: f64,
    mut hi: f64,
    x0: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64, E> {
    let mut x = x0.clamp(lo.min(hi), lo.max(hi));
    let (mut glo, _) = g(lo)?;
    for _ in 0..max_iter {
        let (gx, dgx) = g(x)?;
        if gx.abs() <= tol {
            return Ok(x);
        }
        if gx * glo < 0.0 {
            hi = x;
        } else {
            lo = x;
            glo = gx;
        }
        let newton = if dgx != 0.0 { x - gx / dgx } else { f64::NAN };
        x = if newton.is_finite() && (newton - lo) * (newton - hi) < 0.0 {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (hi - lo).abs() <= tol * (1.0 + x.abs()) {
            return Ok(x);
        }
    }
    Ok(x)
}
