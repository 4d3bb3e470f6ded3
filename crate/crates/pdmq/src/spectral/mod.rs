//! Spectral solves: conservative finite-difference discretization of the
//! weighted Sturm–Liouville operator, symmetric tridiagonal eigensolving,
//! the arclength change of variables to a constant-mass problem, and
//! Richardson refinement of the computed spectra.

mod eigen;

pub use eigen::EigenError;

use crate::expr::Bindings;
use crate::geometry::{arclength_map, ArclengthMap, GeometryError, ProblemDef};
use crate::quantize::{
    build_laplace_beltrami, build_noether, build_von_roos, conjugate_to_lebesgue,
    ordering_potential, OperatorCoefficients, OrderingScheme, QuantizeError,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Quantize(#[from] QuantizeError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Eval(#[from] crate::expr::EvalError),
    #[error(
        "first-order coefficient is inconsistent with a conservative flux form \
         (residual {0:.3e}); the operator is not Hermitian in the declared measure"
    )]
    NotConservative(f64),
    #[error("operator was assembled without a symmetric flux form; solve refused")]
    NotSymmetric,
    #[error("grid needs at least 3 interior points, got {0}")]
    GridTooSmall(usize),
    #[error("grid endpoints [{0}, {1}] must be finite and ordered")]
    BadGridBounds(f64, f64),
    #[error("weight must be positive on the grid; got {w} at x = {x}")]
    NonPositiveWeight { x: f64, w: f64 },
    #[error("refinement needs at least two strictly increasing grid sizes")]
    BadRefinementList,
}

/// Uniform grid of `n` interior points on (lo, hi) with Dirichlet
/// boundaries; x_i = lo + (i+1) h, h = (hi - lo)/(n+1).
#[derive(Debug, Clone, Copy)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Grid, SpectralError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(SpectralError::BadGridBounds(lo, hi));
        }
        if n < 3 {
            return Err(SpectralError::GridTooSmall(n));
        }
        Ok(Grid { lo, hi, n })
    }

    pub fn h(&self) -> f64 {
        (self.hi - self.lo) / (self.n + 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.lo + (i + 1) as f64 * self.h()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }
}

/// Discretized operator acting on interior values, stored as tridiagonal
/// rows of H together with the measure density at the nodes. Inner
/// products live in the weighted space: <u, v> = sum u_i v_i rho_i h.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub grid: Grid,
    pub rho: Vec<f64>,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    /// True when assembled from the conservative flux form.
    pub conservative: bool,
}

impl DiscreteOperator {
    /// Apply H to a vector of interior values.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = v.len();
        (0..n)
            .map(|i| {
                let mut r = self.diag[i] * v[i];
                if i > 0 {
                    r += self.lower[i] * v[i - 1];
                }
                if i < n - 1 {
                    r += self.upper[i] * v[i + 1];
                }
                r
            })
            .collect()
    }

    /// Similarity transform S = R^{1/2} H R^{-1/2}. For a conservative
    /// assembly S is exactly symmetric; returns its diagonal and
    /// off-diagonal. Refuses non-symmetric assemblies.
    pub fn symmetrized(&self) -> Result<(Vec<f64>, Vec<f64>), SpectralError> {
        let n = self.grid.n;
        let mut off = Vec::with_capacity(n - 1);
        let mut scale: f64 = self.diag.iter().fold(0.0, |m, d| m.max(d.abs()));
        for i in 0..n - 1 {
            let up = self.upper[i] * (self.rho[i] / self.rho[i + 1]).sqrt();
            let dn = self.lower[i + 1] * (self.rho[i + 1] / self.rho[i]).sqrt();
            scale = scale.max(up.abs());
            if (up - dn).abs() > 1e-12 * scale.max(1.0) {
                return Err(SpectralError::NotSymmetric);
            }
            off.push(0.5 * (up + dn));
        }
        Ok((self.diag.clone(), off))
    }
}

/// Conservative assembly of a D^2 + b D + c from its flux form
///   H psi = (1/rho) [ -(A psi')' ] + c psi,  A = -a rho,
/// which is Hermitian in the rho-weighted inner product by construction.
/// The declared b is cross-checked against the flux-implied value
/// -A'/rho; a mismatch means the coefficients do not describe an operator
/// that is Hermitian in the declared measure, and assembly is refused.
pub fn discretize(
    op: &OperatorCoefficients,
    bindings: &Bindings,
    grid: Grid,
) -> Result<DiscreteOperator, SpectralError> {
    let n = grid.n;
    let h = grid.h();
    let mut rho = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);
    for i in 0..n {
        let x = grid.point(i);
        let w = op.weight.eval(x, bindings)?;
        if !(w > 0.0 && w.is_finite()) {
            return Err(SpectralError::NonPositiveWeight { x, w });
        }
        rho.push(w);
        c.push(op.c.eval(x, bindings)?);
    }
    // flux coefficient at the n+1 half-integer midpoints
    let flux_at = |x: f64| -> Result<f64, SpectralError> {
        Ok(-op.a.eval(x, bindings)? * op.weight.eval(x, bindings)?)
    };
    let mut a_mid = Vec::with_capacity(n + 1);
    for j in 0..=n {
        a_mid.push(flux_at(grid.lo + (j as f64 + 0.5) * h)?);
    }

    // consistency of the declared first-order coefficient with -A'/rho
    let mut worst: f64 = 0.0;
    for j in 1..=16 {
        let i = j * n / 18;
        let x = grid.point(i.clamp(0, n - 1));
        // step small enough to stay inside the grid near the endpoints
        let fd = (1e-5 * (1.0 + x.abs())).min(0.45 * h);
        let da = (flux_at(x + fd)? - flux_at(x - fd)?) / (2.0 * fd);
        let implied = -da / rho[i.clamp(0, n - 1)];
        let declared = op.b.eval(x, bindings)?;
        let denom = declared.abs().max(implied.abs()).max(1.0);
        worst = worst.max((declared - implied).abs() / denom);
    }
    if worst > 1e-5 {
        return Err(SpectralError::NotConservative(worst));
    }

    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    for i in 0..n {
        let inv = 1.0 / (rho[i] * h * h);
        lower[i] = -a_mid[i] * inv;
        upper[i] = -a_mid[i + 1] * inv;
        diag[i] = (a_mid[i] + a_mid[i + 1]) * inv + c[i];
    }
    Ok(DiscreteOperator {
        grid,
        rho,
        lower,
        diag,
        upper,
        conservative: true,
    })
}

/// Naive pointwise central-difference assembly of a D^2 + b D + c.
/// Not conservative: the resulting matrix is not Hermitian in the
/// weighted inner product. Kept as a diagnostic to demonstrate why the
/// flux form matters.
pub fn discretize_naive(
    op: &OperatorCoefficients,
    bindings: &Bindings,
    grid: Grid,
) -> Result<DiscreteOperator, SpectralError> {
    let n = grid.n;
    let h = grid.h();
    let mut rho = Vec::with_capacity(n);
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    for i in 0..n {
        let x = grid.point(i);
        let w = op.weight.eval(x, bindings)?;
        if !(w > 0.0 && w.is_finite()) {
            return Err(SpectralError::NonPositiveWeight { x, w });
        }
        rho.push(w);
        let a = op.a.eval(x, bindings)?;
        let b = op.b.eval(x, bindings)?;
        let c = op.c.eval(x, bindings)?;
        lower[i] = a / (h * h) - b / (2.0 * h);
        upper[i] = a / (h * h) + b / (2.0 * h);
        diag[i] = -2.0 * a / (h * h) + c;
    }
    Ok(DiscreteOperator {
        grid,
        rho,
        lower,
        diag,
        upper,
        conservative: false,
    })
}

/// Max over random pairs of smooth test vectors of
/// |<u, Hw> - <Hu, w>| / (||Hu|| ||w|| + ||u|| ||Hw||) in the weighted
/// inner product. Smooth probes (random mixtures of low sine modes)
/// resemble actual wavefunctions; high-frequency noise would mask the
/// asymmetry behind the 1/h^2 operator norm. Deterministic for a fixed
/// seed.
pub fn hermiticity_residual(dop: &DiscreteOperator, trials: usize, seed: u64) -> f64 {
    let n = dop.grid.n;
    let h = dop.grid.h();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let smooth = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let coeffs: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        (0..n)
            .map(|i| {
                let t = (i + 1) as f64 / (n + 1) as f64 * std::f64::consts::PI;
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(m, c)| c * ((m + 1) as f64 * t).sin())
                    .sum()
            })
            .collect()
    };
    let inner = |u: &[f64], v: &[f64]| -> f64 {
        u.iter()
            .zip(v)
            .zip(&dop.rho)
            .map(|((a, b), r)| a * b * r * h)
            .sum()
    };
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let u = smooth(&mut rng);
        let w = smooth(&mut rng);
        let hu = dop.apply(&u);
        let hw = dop.apply(&w);
        let nu = inner(&u, &u).sqrt();
        let nw = inner(&w, &w).sqrt();
        let nhu = inner(&hu, &hu).sqrt();
        let nhw = inner(&hw, &hw).sqrt();
        let denom = (nhu * nw + nu * nhw).max(1e-300);
        worst = worst.max((inner(&u, &hw) - inner(&hu, &w)).abs() / denom);
    }
    worst
}

/// Lowest part of the spectrum of a discretized operator: energies,
/// weighted-normalized eigenfunctions on the grid, and node counts.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    /// states[j][i] = psi_j(x_i), normalized so sum psi^2 rho h = 1.
    pub states: Vec<Vec<f64>>,
    pub node_counts: Vec<usize>,
    pub grid: Grid,
}

/// Solve for the lowest `k` eigenpairs. The operator must come from the
/// conservative assembly.
pub fn solve_spectrum(dop: &DiscreteOperator, k: usize) -> Result<Spectrum, SpectralError> {
    let (d, e) = dop.symmetrized()?;
    let h = dop.grid.h();
    let energies = eigen::lowest_eigenvalues(&d, &e, k)?;
    let mut states = Vec::with_capacity(k);
    let mut node_counts = Vec::with_capacity(k);
    for (j, &lam) in energies.iter().enumerate() {
        let phi = eigen::eigenvector(&d, &e, lam, j)?;
        // map back from the symmetrized variable and normalize in the
        // weighted inner product
        let mut psi: Vec<f64> = phi
            .iter()
            .zip(&dop.rho)
            .map(|(p, r)| p / r.sqrt())
            .collect();
        let norm = (psi
            .iter()
            .zip(&dop.rho)
            .map(|(p, r)| p * p * r * h)
            .sum::<f64>())
        .sqrt();
        let peak = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let flip = psi
            .iter()
            .find(|v| v.abs() > 0.5 * peak)
            .map_or(1.0, |v| v.signum());
        for v in &mut psi {
            *v *= flip / norm;
        }
        // count sign alternations, skipping entries at the noise floor so
        // a zero landing exactly on a grid point is not missed
        let threshold = 1e-8 * peak / norm;
        let mut nodes = 0;
        let mut last_sign = 0.0;
        for &v in &psi {
            if v.abs() <= threshold {
                continue;
            }
            let s = v.signum();
            if last_sign != 0.0 && s != last_sign {
                nodes += 1;
            }
            last_sign = s;
        }
        states.push(psi);
        node_counts.push(nodes);
    }
    Ok(Spectrum {
        energies,
        states,
        node_counts,
        grid: dop.grid,
    })
}

/// A problem rewritten in the arclength coordinate y = ∫ sqrt(m) dx:
/// constant unit mass, potential V(x(y)) evaluated through the numeric
/// inverse map.
#[derive(Debug, Clone)]
pub struct TransformedProblem {
    pub map: ArclengthMap,
    pub y_lo: f64,
    pub y_hi: f64,
    problem: ProblemDef,
}

impl TransformedProblem {
    /// Potential in the arclength coordinate.
    pub fn potential(&self, y: f64) -> Result<f64, GeometryError> {
        let x = self.map.inverse(y)?;
        self.problem.potential_at(x)
    }

    pub fn x_of(&self, y: f64) -> Result<f64, GeometryError> {
        self.map.inverse(y)
    }
}

/// Change variables to arclength, anchored at the domain's default
/// anchor. `resolution` controls the tabulation density of the map.
pub fn transform_to_arclength(
    p: &ProblemDef,
    resolution: usize,
) -> Result<TransformedProblem, SpectralError> {
    let x0 = p.domain.default_anchor();
    let map = arclength_map(p, x0, resolution)?;
    Ok(TransformedProblem {
        y_lo: map.y_lo,
        y_hi: map.y_hi,
        map,
        problem: p.clone(),
    })
}

/// Assemble -(hbar^2/2) D_y^2 + V(x(y)) + extra(x(y)) on a y-grid.
fn discretize_transformed(
    tp: &TransformedProblem,
    hbar: f64,
    extra: Option<&crate::expr::Expr>,
    bindings: &Bindings,
    grid: Grid,
) -> Result<DiscreteOperator, SpectralError> {
    let n = grid.n;
    let h = grid.h();
    let flux = 0.5 * hbar * hbar;
    let inv = 1.0 / (h * h);
    let mut diag = Vec::with_capacity(n);
    for i in 0..n {
        let y = grid.point(i);
        let x = tp.map.inverse(y)?;
        let mut c = tp.problem.potential_at(x)?;
        if let Some(u) = extra {
            c += u.eval(x, bindings)?;
        }
        diag.push(2.0 * flux * inv + c);
    }
    Ok(DiscreteOperator {
        grid,
        rho: vec![1.0; n],
        lower: vec![-flux * inv; n],
        upper: vec![-flux * inv; n],
        diag,
        conservative: true,
    })
}

/// Truncation box in the arclength coordinate for a k-state solve: on
/// each side, the smaller of `y_cut` and the first y where the
/// transformed potential reaches 2 e_target + 10 (e_target estimated from
/// the harmonic count k - 1/2). Finite y-endpoints are clipped slightly
/// inward.
pub fn select_box(
    tp: &TransformedProblem,
    k: usize,
    y_cut: f64,
) -> Result<(f64, f64), SpectralError> {
    let threshold = 2.0 * (k as f64 - 0.5).max(0.5) + 10.0;
    let (tab_lo, tab_hi) = tp.map.tabulated_range();
    let side = |sign: f64, limit: f64| -> Result<f64, SpectralError> {
        let hard = if limit.is_finite() {
            // stay within the tabulated inverse map near a singular wall
            if sign > 0.0 { tab_hi } else { tab_lo.abs() }
        } else {
            y_cut
        }
        .min(y_cut);
        let step = 0.125;
        let mut y = step;
        while y < hard {
            if tp.potential(sign * y)? >= threshold {
                return Ok(sign * y);
            }
            y += step;
        }
        Ok(sign * hard)
    };
    let hi = side(1.0, tp.y_hi)?;
    let lo = side(-1.0, tp.y_lo)?;
    Ok((lo, hi))
}

/// Which formulation a spectrum is computed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveRoute {
    /// Weighted operator on the original x-grid.
    Direct,
    /// Constant-mass operator on the arclength y-grid.
    Arclength,
}

/// A spectrum together with the diagnostics of the solve that produced it.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub spectrum: Spectrum,
    pub route: SolveRoute,
    pub hermiticity: f64,
    /// Truncation box in the arclength coordinate.
    pub box_y: (f64, f64),
    /// The same box in the original coordinate.
    pub box_x: (f64, f64),
}

/// End-to-end solve for the lowest k eigenvalues of a problem under an
/// ordering scheme, on an n-point grid, with a y-space truncation cut.
/// Both routes use the same truncation box, so their spectra may be
/// compared directly.
pub fn solve_problem(
    p: &ProblemDef,
    scheme: OrderingScheme,
    hbar: f64,
    k: usize,
    n: usize,
    y_cut: f64,
    route: SolveRoute,
) -> Result<SolveOutcome, SpectralError> {
    let tp = transform_to_arclength(p, 1600)?;
    let (y_lo, y_hi) = select_box(&tp, k, y_cut)?;
    let x_lo = tp.map.inverse(y_lo)?;
    let x_hi = tp.map.inverse(y_hi)?;
    let dop = match route {
        SolveRoute::Direct => {
            let op = match scheme {
                OrderingScheme::Noether => build_noether(p, hbar),
                OrderingScheme::LaplaceBeltrami => build_laplace_beltrami(p, hbar),
                OrderingScheme::VonRoos(..) => build_von_roos(p, hbar, scheme)?,
            };
            discretize(&op, &p.bindings, Grid::new(x_lo, x_hi, n)?)?
        }
        SolveRoute::Arclength => {
            // A von Roos Hamiltonian is H = T_bdd + V + U with U the
            // ordering potential relative to the (0,-1,0) kinetic term.
            // Conjugating the weighted kinetic operator into the plain
            // space gives W T_w W^{-1} = T_bdd + G, so in the weighted
            // (arclength) picture H becomes T_w + V + U - G: the extra
            // multiplication term to carry across the transform is U - G.
            let extra = match scheme {
                OrderingScheme::Noether | OrderingScheme::LaplaceBeltrami => None,
                OrderingScheme::VonRoos(..) => {
                    let u = ordering_potential(p, hbar, scheme)?;
                    let conj = conjugate_to_lebesgue(&build_noether(p, hbar));
                    let g = (conj.c - p.potential.clone()).simplify();
                    Some((u - g).simplify())
                }
            };
            discretize_transformed(
                &tp,
                hbar,
                extra.as_ref(),
                &p.bindings,
                Grid::new(y_lo, y_hi, n)?,
            )?
        }
    };
    let hermiticity = hermiticity_residual(&dop, 4, 0x5eed);
    let spectrum = solve_spectrum(&dop, k)?;
    Ok(SolveOutcome {
        spectrum,
        route,
        hermiticity,
        box_y: (y_lo, y_hi),
        box_x: (x_lo, x_hi),
    })
}

/// Spectrum refined by Richardson extrapolation over a list of grid
/// sizes, with per-level raw energies and error estimates.
#[derive(Debug, Clone)]
pub struct RefinedSpectrum {
    /// h^2-extrapolated energies from the two finest grids.
    pub energies: Vec<f64>,
    /// |extrapolated - finest-grid| per eigenvalue.
    pub error_bars: Vec<f64>,
    /// Raw energies at each grid size, same order as `n_list`.
    pub raw: Vec<Vec<f64>>,
    pub n_list: Vec<usize>,
    /// False when successive corrections fail to shrink, i.e. the
    /// asymptotic h^2 regime was not reached.
    pub monotone: bool,
}

/// Run `solve` at each grid size and extrapolate assuming O(h^2) error.
pub fn refine_spectrum(
    mut solve: impl FnMut(usize) -> Result<Spectrum, SpectralError>,
    n_list: &[usize],
    k: usize,
) -> Result<RefinedSpectrum, SpectralError> {
    if n_list.len() < 2 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SpectralError::BadRefinementList);
    }
    let mut raw = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let s = solve(n)?;
        raw.push(s.energies[..k].to_vec());
    }
    let last = n_list.len() - 1;
    let h_prev = 1.0 / (n_list[last - 1] + 1) as f64;
    let h_fine = 1.0 / (n_list[last] + 1) as f64;
    let ratio = (h_prev / h_fine).powi(2);
    let mut energies = Vec::with_capacity(k);
    let mut error_bars = Vec::with_capacity(k);
    for j in 0..k {
        let coarse = raw[last - 1][j];
        let fine = raw[last][j];
        let ext = fine + (fine - coarse) / (ratio - 1.0);
        energies.push(ext);
        error_bars.push((ext - fine).abs());
    }
    let mut monotone = true;
    for j in 0..k {
        for lvl in 2..raw.len() {
            let d_prev = raw[lvl - 1][j] - raw[lvl - 2][j];
            let d_last = raw[lvl][j] - raw[lvl - 1][j];
            if d_last.abs() > d_prev.abs() + 1e-12 {
                monotone = false;
            }
        }
    }
    Ok(RefinedSpectrum {
        energies,
        error_bars,
        raw,
        n_list: n_list.to_vec(),
        monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{bindings, parse_expr, Bindings, Expr};
    use crate::geometry::Domain;
    use crate::models::{builtin, ModelId};
    use std::f64::consts::PI;

    fn problem(m: &str, v: &str, dom: Domain, b: Bindings) -> ProblemDef {
        ProblemDef::new(parse_expr(m).unwrap(), parse_expr(v).unwrap(), dom, b)
    }

    #[test]
    fn particle_in_a_box_spectrum() {
        let p = problem("1", "0", Domain::open(0.0, PI), Bindings::new());
        let op = build_noether(&p, 1.0);
        let refined = refine_spectrum(
            |n| solve_spectrum(&discretize(&op, &p.bindings, Grid::new(0.0, PI, n).unwrap())?, 3),
            &[500, 1000],
            3,
        )
        .unwrap();
        for (j, &e) in refined.energies.iter().enumerate() {
            let exact = 0.5 * ((j + 1) as f64).powi(2);
            assert!((e - exact).abs() < 1e-7, "e_{j} = {e} vs {exact}");
        }
        assert!(refined.monotone || refined.n_list.len() == 2);
    }

    #[test]
    fn harmonic_oscillator_direct() {
        let p = problem("1", "x^2/2", Domain::real_line(), Bindings::new());
        let op = build_noether(&p, 1.0);
        let refined = refine_spectrum(
            |n| {
                solve_spectrum(
                    &discretize(&op, &p.bindings, Grid::new(-8.0, 8.0, n).unwrap())?,
                    4,
                )
            },
            &[600, 1200],
            4,
        )
        .unwrap();
        for (j, &e) in refined.energies.iter().enumerate() {
            let exact = j as f64 + 0.5;
            assert!((e - exact).abs() < 1e-7, "e_{j} = {e} vs {exact}");
        }
    }

    #[test]
    fn harmonic_oscillator_nodes_and_parity() {
        let p = problem("1", "x^2/2", Domain::real_line(), Bindings::new());
        let op = build_noether(&p, 1.0);
        let dop = discretize(&op, &p.bindings, Grid::new(-8.0, 8.0, 601).unwrap()).unwrap();
        let s = solve_spectrum(&dop, 4).unwrap();
        let n = s.grid.n;
        for j in 0..4 {
            assert_eq!(s.node_counts[j], j, "node count of state {j}");
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let worst = (0..n)
                .map(|i| (s.states[j][i] - sign * s.states[j][n - 1 - i]).abs())
                .fold(0.0f64, f64::max);
            assert!(worst < 1e-6, "parity defect of state {j}: {worst}");
            // weighted normalization
            let h = s.grid.h();
            let norm: f64 = s.states[j].iter().map(|v| v * v * h).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn flux_assembly_is_hermitian_naive_is_not() {
        let b = bindings(&[("k", -1.0)]);
        let p = builtin(ModelId::QuasiHarmonicK, &b).unwrap();
        let op = build_noether(&p, 1.0);
        // modest resolution: the naive scheme's asymmetry shrinks with h,
        // the flux form's stays at rounding level regardless
        let grid = Grid::new(-3.0, 3.0, 100).unwrap();
        let good = discretize(&op, &p.bindings, grid).unwrap();
        assert!(good.conservative);
        let res = hermiticity_residual(&good, 5, 42);
        assert!(res <= 1e-13, "flux-form residual {res}");
        let bad = discretize_naive(&op, &p.bindings, grid).unwrap();
        assert!(!bad.conservative);
        let res_bad = hermiticity_residual(&bad, 5, 42);
        assert!(res_bad > 1e-6, "naive residual {res_bad} unexpectedly small");
        assert!(matches!(
            solve_spectrum(&bad, 2),
            Err(SpectralError::NotSymmetric)
        ));
    }

    #[test]
    fn inconsistent_first_order_coefficient_rejected() {
        // declare b = 0 against a sqrt(m) weight that requires b != 0
        let b = bindings(&[("k", -1.0)]);
        let p = builtin(ModelId::QuasiHarmonicK, &b).unwrap();
        let mut op = build_noether(&p, 1.0);
        op.b = Expr::num(0.0);
        let grid = Grid::new(-3.0, 3.0, 200).unwrap();
        assert!(matches!(
            discretize(&op, &p.bindings, grid),
            Err(SpectralError::NotConservative(_))
        ));
    }

    #[test]
    fn arcsinh_model_arclength_route_is_harmonic() {
        let p = builtin(ModelId::ArcsinhOsc, &bindings(&[("L", 1.0)])).unwrap();
        let refined = refine_spectrum(
            |n| {
                Ok(
                    solve_problem(&p, OrderingScheme::Noether, 1.0, 4, n, 12.0, SolveRoute::Arclength)?
                        .spectrum,
                )
            },
            &[600, 1200],
            4,
        )
        .unwrap();
        for (j, &e) in refined.energies.iter().enumerate() {
            let exact = j as f64 + 0.5;
            assert!((e - exact).abs() < 1e-6, "e_{j} = {e} vs {exact}");
        }
    }

    #[test]
    fn dual_route_spectra_agree() {
        // positive k: walls confine the problem, every state is discrete
        let p = builtin(ModelId::QuasiHarmonicK, &bindings(&[("k", 0.5)])).unwrap();
        let k = 4;
        let a = solve_problem(&p, OrderingScheme::Noether, 1.0, k, 800, 12.0, SolveRoute::Direct)
            .unwrap();
        let b = solve_problem(&p, OrderingScheme::Noether, 1.0, k, 800, 12.0, SolveRoute::Arclength)
            .unwrap();
        assert_eq!(a.box_y, b.box_y);
        for j in 0..k {
            let d = (a.spectrum.energies[j] - b.spectrum.energies[j]).abs();
            assert!(d < 5e-4, "routes disagree at level {j}: {d}");
        }
        assert!(a.hermiticity < 1e-12 && b.hermiticity < 1e-12);
    }

    #[test]
    fn dual_route_spectra_agree_for_von_roos_orderings() {
        // the arclength route must carry the ordering potential across the
        // transform together with the gauge term from the m^{1/4} conjugation
        let p = builtin(ModelId::QuasiHarmonicK, &bindings(&[("k", 0.5)])).unwrap();
        let k = 3;
        for scheme in [
            OrderingScheme::ben_daniel_duke(),
            OrderingScheme::zhu_kroemer(),
        ] {
            let a =
                solve_problem(&p, scheme, 1.0, k, 800, 12.0, SolveRoute::Direct).unwrap();
            let b =
                solve_problem(&p, scheme, 1.0, k, 800, 12.0, SolveRoute::Arclength).unwrap();
            for j in 0..k {
                let d = (a.spectrum.energies[j] - b.spectrum.energies[j]).abs();
                assert!(d < 5e-4, "{} routes disagree at level {j}: {d}", scheme.label());
            }
        }
    }

    #[test]
    fn quasi_harmonic_positive_k_box_respects_walls() {
        let p = builtin(ModelId::QuasiHarmonicK, &bindings(&[("k", 5.0)])).unwrap();
        let out =
            solve_problem(&p, OrderingScheme::Noether, 1.0, 3, 500, 12.0, SolveRoute::Direct)
                .unwrap();
        let wall = 1.0 / 5.0f64.sqrt();
        assert!(out.box_x.0 > -wall && out.box_x.1 < wall);
        // spectrum sits above the flat-box lower bound and is ordered
        for w in out.spectrum.energies.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn enlarging_the_box_lowers_dirichlet_energies() {
        let p = problem("1", "x^2/2", Domain::real_line(), Bindings::new());
        let op = build_noether(&p, 1.0);
        let tight = solve_spectrum(
            &discretize(&op, &p.bindings, Grid::new(-4.0, 4.0, 800).unwrap()).unwrap(),
            3,
        )
        .unwrap();
        let wide = solve_spectrum(
            &discretize(&op, &p.bindings, Grid::new(-6.0, 6.0, 1200).unwrap()).unwrap(),
            3,
        )
        .unwrap();
        for j in 0..3 {
            assert!(wide.energies[j] <= tight.energies[j] + 1e-12);
        }
    }

    #[test]
    fn refinement_list_validated() {
        assert!(matches!(
            refine_spectrum(|_| unreachable!(), &[100], 1),
            Err(SpectralError::BadRefinementList)
        ));
        assert!(matches!(
            refine_spectrum(|_| unreachable!(), &[200, 100], 1),
            Err(SpectralError::BadRefinementList)
        ));
    }
}
