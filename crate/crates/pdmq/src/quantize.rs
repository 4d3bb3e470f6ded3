//! Quantum Hamiltonians as explicit second-order differential-operator
//! coefficients: the Noether-momenta prescription, the Laplace–Beltrami
//! prescription, and the von Roos ordering family, plus the unitary gauge
//! map between the weighted and Lebesgue Hilbert spaces.

use crate::expr::Expr;
use crate::geometry::ProblemDef;
use thiserror::Error;

/// a(x) D^2 + b(x) D + c(x) together with the measure density of the
/// Hilbert space in which the operator is Hermitian (sqrt(m) for
/// Noether/Laplace–Beltrami, 1 for von Roos).
#[derive(Debug, Clone)]
pub struct OperatorCoefficients {
    pub a: Expr,
    pub b: Expr,
    pub c: Expr,
    pub weight: Expr,
    pub hbar: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderingScheme {
    Noether,
    LaplaceBeltrami,
    /// von Roos exponents (a1, a2, a3) with a1 + a2 + a3 = -1.
    VonRoos(f64, f64, f64),
}

impl OrderingScheme {
    /// BenDaniel–Duke: the (0, -1, 0) member, (1/2) p (1/m) p.
    pub fn ben_daniel_duke() -> OrderingScheme {
        OrderingScheme::VonRoos(0.0, -1.0, 0.0)
    }

    /// Zhu–Kroemer: the (-1/2, 0, -1/2) member.
    pub fn zhu_kroemer() -> OrderingScheme {
        OrderingScheme::VonRoos(-0.5, 0.0, -0.5)
    }

    pub fn validate(&self) -> Result<(), QuantizeError> {
        if let OrderingScheme::VonRoos(a1, a2, a3) = *self {
            if (a1 + a2 + a3 + 1.0).abs() > 1e-12 {
                return Err(QuantizeError::ConstraintViolation { a1, a2, a3 });
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match self {
            OrderingScheme::Noether => "noether".into(),
            OrderingScheme::LaplaceBeltrami => "laplace-beltrami".into(),
            OrderingScheme::VonRoos(a1, a2, a3) => format!("von-roos({a1},{a2},{a3})"),
        }
    }
}

#[derive(Debug, Error)]
pub enum QuantizeError {
    #[error("von Roos constraint violated: {a1} + {a2} + {a3} != -1")]
    ConstraintViolation { a1: f64, a2: f64, a3: f64 },
    #[error("scheme {0} is not a von Roos ordering")]
    NotVonRoos(String),
}

/// Differential operator as a polynomial in D with Expr coefficients;
/// index k holds the coefficient of D^k.
#[derive(Debug, Clone)]
struct OpPoly(Vec<Expr>);

impl OpPoly {
    fn mult(f: Expr) -> OpPoly {
        OpPoly(vec![f])
    }

    /// Compose D with self: D (c_k psi^(k)) = c_k' psi^(k) + c_k psi^(k+1).
    fn apply_d(&self) -> OpPoly {
        let n = self.0.len();
        let mut out = vec![Expr::num(0.0); n + 1];
        for (k, c) in self.0.iter().enumerate() {
            out[k] = (out[k].clone() + c.diff()).simplify();
            out[k + 1] = (out[k + 1].clone() + c.clone()).simplify();
        }
        OpPoly(out)
    }

    /// Multiply every coefficient by f (compose M(f) after self).
    fn scale(&self, f: &Expr) -> OpPoly {
        OpPoly(
            self.0
                .iter()
                .map(|c| (f.clone() * c.clone()).simplify())
                .collect(),
        )
    }

    fn add(&self, other: &OpPoly) -> OpPoly {
        let n = self.0.len().max(other.0.len());
        let zero = Expr::num(0.0);
        OpPoly(
            (0..n)
                .map(|k| {
                    let a = self.0.get(k).unwrap_or(&zero).clone();
                    let b = other.0.get(k).unwrap_or(&zero).clone();
                    (a + b).simplify()
                })
                .collect(),
        )
    }

    fn coeff(&self, k: usize) -> Expr {
        self.0.get(k).cloned().unwrap_or_else(|| Expr::num(0.0))
    }
}

fn mass_power(m: &Expr, e: f64) -> Expr {
    if e == 0.0 {
        Expr::num(1.0)
    } else if e == 1.0 {
        m.clone()
    } else {
        m.clone().powc(e)
    }
}

/// Expand m^e1 D m^e2 D m^e3 as an OpPoly.
fn sandwich(m: &Expr, e1: f64, e2: f64, e3: f64) -> OpPoly {
    let inner = OpPoly::mult(mass_power(m, e3));
    let step1 = inner.apply_d().scale(&mass_power(m, e2));
    step1.apply_d().scale(&mass_power(m, e1))
}

/// Noether-momenta Hamiltonian: -(hbar^2/2)(m^{-1/2} D)(m^{-1/2} D) + V,
/// Hermitian with respect to the sqrt(m) dx measure.
pub fn build_noether(p: &ProblemDef, hbar: f64) -> OperatorCoefficients {
    let m = &p.mass;
    let half = mass_power(m, -0.5);
    // M(m^{-1/2}) . D . M(m^{-1/2}) . D, applied right to left
    let kin = OpPoly::mult(Expr::num(1.0))
        .apply_d()
        .scale(&half)
        .apply_d()
        .scale(&half);
    let factor = Expr::num(-hbar * hbar / 2.0);
    OperatorCoefficients {
        a: (factor.clone() * kin.coeff(2)).simplify(),
        b: (factor * kin.coeff(1)).simplify(),
        c: p.potential.clone(),
        weight: m.clone().sqrt().simplify(),
        hbar,
    }
}

/// Laplace–Beltrami Hamiltonian via the 1-D metric Laplacian expansion
/// (1/m) f'' - (1/2)(m'/m^2) f'; coincides with the Noether operator.
pub fn build_laplace_beltrami(p: &ProblemDef, hbar: f64) -> OperatorCoefficients {
    let m = &p.mass;
    let lap_b = ((m.diff() / (m.clone() * m.clone())) * Expr::num(-0.5)).simplify();
    let factor = Expr::num(-hbar * hbar / 2.0);
    OperatorCoefficients {
        a: (factor.clone() * (Expr::num(1.0) / m.clone())).simplify(),
        b: (factor * lap_b).simplify(),
        c: p.potential.clone(),
        weight: m.clone().sqrt().simplify(),
        hbar,
    }
}

/// von Roos Hamiltonian T_{a1 a2 a3} + V with
/// T = (1/4)(m^a1 p m^a2 p m^a3 + m^a3 p m^a2 p m^a1), p = -i hbar D;
/// Hermitian in the plain Lebesgue space.
pub fn build_von_roos(
    p: &ProblemDef,
    hbar: f64,
    scheme: OrderingScheme,
) -> Result<OperatorCoefficients, QuantizeError> {
    scheme.validate()?;
    let (a1, a2, a3) = match scheme {
        OrderingScheme::VonRoos(x, y, z) => (x, y, z),
        other => return Err(QuantizeError::NotVonRoos(other.label())),
    };
    let m = &p.mass;
    // p = -i hbar D, so each p-pair contributes a factor -hbar^2
    let t = sandwich(m, a1, a2, a3).add(&sandwich(m, a3, a2, a1));
    let factor = Expr::num(-hbar * hbar / 4.0);
    Ok(OperatorCoefficients {
        a: (factor.clone() * t.coeff(2)).simplify(),
        b: (factor.clone() * t.coeff(1)).simplify(),
        c: (p.potential.clone() + factor * t.coeff(0)).simplify(),
        weight: Expr::num(1.0),
        hbar,
    })
}

/// Ordering potential U = c(scheme) - c(BenDaniel–Duke): the pure
/// multiplication term by which the ordering differs from the reference.
pub fn ordering_potential(
    p: &ProblemDef,
    hbar: f64,
    scheme: OrderingScheme,
) -> Result<Expr, QuantizeError> {
    scheme.validate()?;
    let (a1, a2, a3) = match scheme {
        OrderingScheme::VonRoos(x, y, z) => (x, y, z),
        other => return Err(QuantizeError::NotVonRoos(other.label())),
    };
    let m = &p.mass;
    let t = sandwich(m, a1, a2, a3).add(&sandwich(m, a3, a2, a1));
    Ok((Expr::num(-hbar * hbar / 4.0) * t.coeff(0)).simplify())
}

/// Conjugate a sqrt(m)-weighted operator into the Lebesgue space via the
/// unitary multiplication map W: psi -> m^{1/4} psi. The result is
/// isospectral with weight 1.
pub fn conjugate_to_lebesgue(op: &OperatorCoefficients) -> OperatorCoefficients {
    // recover m from the declared weight rho = sqrt(m)
    let mass = (op.weight.clone() * op.weight.clone()).simplify();
    let w = mass_power(&mass, 0.25);
    let w_inv = mass_power(&mass, -0.25);
    let inner = OpPoly(vec![op.c.clone(), op.b.clone(), op.a.clone()]);
    // W . op . W^{-1}
    let shifted = compose(&inner, &OpPoly::mult(w_inv)).scale(&w);
    OperatorCoefficients {
        a: shifted.coeff(2),
        b: shifted.coeff(1),
        c: shifted.coeff(0),
        weight: Expr::num(1.0),
        hbar: op.hbar,
    }
}

/// Full composition A . B of two operator polynomials.
fn compose(a: &OpPoly, b: &OpPoly) -> OpPoly {
    let mut acc = OpPoly(vec![Expr::num(0.0)]);
    let mut d_j_b = b.clone(); // D^j . B
    for (j, coeff) in a.0.iter().enumerate() {
        if j > 0 {
            d_j_b = d_j_b.apply_d();
        }
        acc = acc.add(&d_j_b.scale(coeff));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{bindings, parse_expr, Bindings};
    use crate::geometry::{Domain, ProblemDef};

    fn problem(m: &str, v: &str, b: Bindings) -> ProblemDef {
        ProblemDef::new(
            parse_expr(m).unwrap(),
            parse_expr(v).unwrap(),
            Domain::real_line(),
            b,
        )
    }

    fn eval(e: &Expr, x: f64, b: &Bindings) -> f64 {
        e.eval(x, b).unwrap()
    }

    #[test]
    fn noether_constant_mass() {
        let p = problem("1", "0.5*x^2", Bindings::new());
        let op = build_noether(&p, 1.0);
        for x in [-1.0, 0.0, 2.0] {
            assert!((eval(&op.a, x, &p.bindings) + 0.5).abs() < 1e-14);
            assert!(eval(&op.b, x, &p.bindings).abs() < 1e-14);
            assert!((eval(&op.c, x, &p.bindings) - 0.5 * x * x).abs() < 1e-14);
        }
    }

    #[test]
    fn noether_quasi_harmonic_dimensionless() {
        // a = -(1/2)(1 - k x^2), b = +(1/2) k x, c = x^2/(2(1 - k x^2))
        let b = bindings(&[("k", 0.7)]);
        let p = problem("1/(1 - k*x^2)", "x^2/(2*(1 - k*x^2))", b.clone());
        let op = build_noether(&p, 1.0);
        for x in [-0.8, -0.2, 0.5, 0.9] {
            let w = 1.0 - 0.7 * x * x;
            assert!((eval(&op.a, x, &b) + 0.5 * w).abs() < 1e-13);
            assert!((eval(&op.b, x, &b) - 0.5 * 0.7 * x).abs() < 1e-13);
            assert!((eval(&op.c, x, &b) - 0.5 * x * x / w).abs() < 1e-13);
        }
    }

    #[test]
    fn noether_arctanh_model_first_order_coefficient() {
        // m = m0/(1 - l^2 x^2)^2: b = (hbar^2/m0) l^2 x (1 - l^2 x^2)
        let b = bindings(&[("m0", 2.0), ("l", 0.5)]);
        let p = problem("m0/(1 - l^2*x^2)^2", "0", b.clone());
        let op = build_noether(&p, 1.0);
        for x in [-1.0, 0.3, 1.5] {
            let w = 1.0 - 0.25 * x * x;
            let expect = (1.0 / 2.0) * 0.25 * x * w;
            assert!(
                (eval(&op.b, x, &b) - expect).abs() < 1e-13,
                "b({x}) = {} vs {expect}",
                eval(&op.b, x, &b)
            );
        }
    }

    #[test]
    fn laplace_beltrami_coincides_with_noether() {
        let b = bindings(&[("L", 1.0)]);
        let p = problem("1/(1 + L^2*x^2)", "arcsinh(L*x)^2/(2*L^2)", b.clone());
        let on = build_noether(&p, 1.0);
        let ol = build_laplace_beltrami(&p, 1.0);
        for i in 0..100 {
            let x = -3.0 + 6.0 * (i as f64 + 0.5) / 100.0;
            assert!((eval(&on.a, x, &b) - eval(&ol.a, x, &b)).abs() < 1e-12);
            assert!((eval(&on.b, x, &b) - eval(&ol.b, x, &b)).abs() < 1e-12);
            assert!((eval(&on.c, x, &b) - eval(&ol.c, x, &b)).abs() < 1e-12);
        }
    }

    #[test]
    fn laplace_beltrami_arcsinh_first_order() {
        // m = 1/(1 + L^2 x^2), hbar = 1: b = -(1/2) L^2 x
        let b = bindings(&[("L", 1.0)]);
        let p = problem("1/(1 + L^2*x^2)", "0", b.clone());
        let op = build_laplace_beltrami(&p, 1.0);
        for x in [-2.0, 0.4, 1.0] {
            assert!((eval(&op.b, x, &b) + 0.5 * x).abs() < 1e-13);
        }
    }

    #[test]
    fn von_roos_constant_mass_collapses() {
        let p = problem("1", "0.5*x^2", Bindings::new());
        for scheme in [
            OrderingScheme::ben_daniel_duke(),
            OrderingScheme::zhu_kroemer(),
            OrderingScheme::VonRoos(-1.0, 0.0, 0.0),
        ] {
            let op = build_von_roos(&p, 1.0, scheme).unwrap();
            for x in [-1.0, 0.5] {
                assert!((eval(&op.a, x, &p.bindings) + 0.5).abs() < 1e-14);
                assert!(eval(&op.b, x, &p.bindings).abs() < 1e-14);
                assert!((eval(&op.c, x, &p.bindings) - 0.5 * x * x).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn ben_daniel_duke_has_no_ordering_potential() {
        let b = bindings(&[("L", 1.0)]);
        let p = problem("1/(1 + L*x)^2", "log(1 + L*x)^2/(2*L^2)", b.clone());
        let u = ordering_potential(&p, 1.0, OrderingScheme::ben_daniel_duke()).unwrap();
        assert_eq!(u, Expr::Num(0.0));
        let op = build_von_roos(&p, 1.0, OrderingScheme::ben_daniel_duke()).unwrap();
        for x in [0.0, 1.0, 3.0] {
            let v = eval(&p.potential, x, &b);
            assert!((eval(&op.c, x, &b) - v).abs() < 1e-13);
        }
    }

    #[test]
    fn symmetric_pair_effective_potential() {
        // (-1, 0, 0): U = hbar^2 (-(1/2) m'^2/m^3 + (1/4) m''/m^2)
        let b = bindings(&[("L", 0.8)]);
        let p = problem("1/(1 + L^2*x^2)", "0", b.clone());
        let hbar = 1.3;
        let u = ordering_potential(&p, hbar, OrderingScheme::VonRoos(-1.0, 0.0, 0.0)).unwrap();
        let m = &p.mass;
        let dm = m.diff();
        let ddm = dm.diff();
        for x in [-1.5, -0.3, 0.7, 2.0] {
            let mv = eval(m, x, &b);
            let d1 = eval(&dm, x, &b);
            let d2 = eval(&ddm, x, &b);
            let expect = hbar * hbar * (-0.5 * d1 * d1 / mv.powi(3) + 0.25 * d2 / (mv * mv));
            let got = eval(&u, x, &b);
            assert!((got - expect).abs() < 1e-12, "U({x}) = {got} vs {expect}");
        }
    }

    #[test]
    fn zhu_kroemer_potential_matches_product_rule_oracle() {
        // hand expansion of (1/2) m^{-1/2} p^2 m^{-1/2}:
        // U = hbar^2 ( m''/(4 m^2) - 3 m'^2/(8 m^3) )
        let b = bindings(&[("L", 1.0)]);
        let p = problem("1/(1 + L^2*x^2)", "0", b.clone());
        let u = ordering_potential(&p, 1.0, OrderingScheme::zhu_kroemer()).unwrap();
        let m = &p.mass;
        let dm = m.diff();
        let ddm = dm.diff();
        for x in [-1.0, 0.5, 1.0, 2.5] {
            let mv = eval(m, x, &b);
            let d1 = eval(&dm, x, &b);
            let d2 = eval(&ddm, x, &b);
            let expect = d2 / (4.0 * mv * mv) - 3.0 * d1 * d1 / (8.0 * mv.powi(3));
            let got = eval(&u, x, &b);
            assert!((got - expect).abs() < 1e-12, "U({x}) = {got} vs {expect}");
        }
    }

    #[test]
    fn von_roos_first_order_universality() {
        let b = bindings(&[("k", 0.5)]);
        let p = problem("1/(1 - k*x^2)", "0", b.clone());
        let schemes = [
            OrderingScheme::VonRoos(0.0, -1.0, 0.0),
            OrderingScheme::VonRoos(-0.5, 0.0, -0.5),
            OrderingScheme::VonRoos(-1.0, 0.0, 0.0),
            OrderingScheme::VonRoos(0.0, -0.5, -0.5),
            OrderingScheme::VonRoos(-0.25, -0.5, -0.25),
        ];
        let ops: Vec<_> = schemes
            .iter()
            .map(|&s| build_von_roos(&p, 1.0, s).unwrap())
            .collect();
        for x in [-0.9, -0.4, 0.1, 0.6, 1.2] {
            let b0 = eval(&ops[0].b, x, &b);
            // universal value hbar^2 m'/(2 m^2)
            let m = eval(&p.mass, x, &b);
            let dm = eval(&p.mass.diff(), x, &b);
            assert!((b0 - dm / (2.0 * m * m)).abs() < 1e-12);
            for op in &ops[1..] {
                assert!((eval(&op.b, x, &b) - b0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn von_roos_constraint_enforced() {
        let p = problem("1", "0", Bindings::new());
        let bad = OrderingScheme::VonRoos(0.0, 0.0, 0.0);
        assert!(matches!(
            build_von_roos(&p, 1.0, bad),
            Err(QuantizeError::ConstraintViolation { .. })
        ));
    }

    #[test]
    fn conjugation_identity_for_constant_mass() {
        let p = problem("1", "0.5*x^2", Bindings::new());
        let op = build_noether(&p, 1.0);
        let conj = conjugate_to_lebesgue(&op);
        for x in [-1.0, 0.0, 2.0] {
            assert!((eval(&conj.a, x, &p.bindings) - eval(&op.a, x, &p.bindings)).abs() < 1e-13);
            assert!((eval(&conj.b, x, &p.bindings) - eval(&op.b, x, &p.bindings)).abs() < 1e-13);
            assert!((eval(&conj.c, x, &p.bindings) - eval(&op.c, x, &p.bindings)).abs() < 1e-13);
        }
    }

    #[test]
    fn conjugation_yields_von_roos_first_order_coefficient() {
        // after the gauge map the first-order coefficient becomes the
        // universal +hbar^2 m'/(2 m^2)
        let b = bindings(&[("L", 1.0)]);
        let p = problem("1/(1 + L^2*x^2)", "0", b.clone());
        let conj = conjugate_to_lebesgue(&build_noether(&p, 1.0));
        for x in [-2.0, -0.5, 0.5, 1.5] {
            let m = eval(&p.mass, x, &b);
            let dm = eval(&p.mass.diff(), x, &b);
            let expect = dm / (2.0 * m * m);
            let got = eval(&conj.b, x, &b);
            assert!((got - expect).abs() < 1e-12, "b({x}) = {got} vs {expect}");
        }
    }

    #[test]
    fn hbar_scaling() {
        let b = bindings(&[("L", 1.0)]);
        let p = problem("1/(1 + L^2*x^2)", "arcsinh(L*x)^2/(2*L^2)", b.clone());
        let s = 3.0;
        let op1 = build_noether(&p, 1.0);
        let op2 = build_noether(&p, s);
        let u1 = ordering_potential(&p, 1.0, OrderingScheme::zhu_kroemer()).unwrap();
        let u2 = ordering_potential(&p, s, OrderingScheme::zhu_kroemer()).unwrap();
        for x in [-1.0, 0.3, 2.0] {
            assert!((eval(&op2.a, x, &b) - s * s * eval(&op1.a, x, &b)).abs() < 1e-12);
            assert!((eval(&op2.b, x, &b) - s * s * eval(&op1.b, x, &b)).abs() < 1e-12);
            // V untouched
            assert!((eval(&op2.c, x, &b) - eval(&op1.c, x, &b)).abs() < 1e-12);
            assert!((eval(&u2, x, &b) - s * s * eval(&u1, x, &b)).abs() < 1e-12);
        }
    }
}
