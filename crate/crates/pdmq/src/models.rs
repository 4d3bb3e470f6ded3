//! Registry of the four built-in nonlinear-oscillator models in
//! dimensionless canonical form, plus the dimensionful/dimensionless
//! scaling maps.

use crate::expr::{parse_expr, Bindings};
use crate::geometry::{Domain, Endpoint, ProblemDef};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelId {
    /// m = 1/(1 - k x^2), V = x^2/(2(1 - k x^2)); curvature-like sign
    /// convention k = -lambda.
    QuasiHarmonicK,
    /// m = 1/(1 + L^2 x^2), V = arcsinh^2(L x)/(2 L^2).
    ArcsinhOsc,
    /// m = 1/(1 + L x)^2, V = log^2(1 + L x)/(2 L^2) on (-1/L, inf).
    LogOsc,
    /// m = 1/(1 - L^2 x^2)^2, V = arctanh^2(L x)/(2 L^2) on (-1/L, 1/L).
    ArctanhOsc,
}

pub const ALL_MODELS: [ModelId; 4] = [
    ModelId::QuasiHarmonicK,
    ModelId::ArcsinhOsc,
    ModelId::LogOsc,
    ModelId::ArctanhOsc,
];

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("missing parameter `{0}`")]
    MissingParameter(String),
    #[error("inadmissible parameter {name} = {value}: {why}")]
    InadmissibleParameter {
        name: String,
        value: f64,
        why: String,
    },
    #[error("scale constant {name} = {value} must be positive")]
    NonPositiveScale { name: String, value: f64 },
}

/// Static description of one registry entry.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub id: ModelId,
    pub name: &'static str,
    pub description: &'static str,
    pub parameter: &'static str,
    pub admissible: &'static str,
    pub mass_src: &'static str,
    pub potential_src: &'static str,
    pub domain_desc: &'static str,
}

impl ModelId {
    pub fn from_name(name: &str) -> Result<ModelId, ModelError> {
        Ok(match name {
            "quasi-harmonic-k" => ModelId::QuasiHarmonicK,
            "arcsinh-osc" => ModelId::ArcsinhOsc,
            "log-osc" => ModelId::LogOsc,
            "arctanh-osc" => ModelId::ArctanhOsc,
            other => return Err(ModelError::UnknownModel(other.to_string())),
        })
    }

    pub fn spec(self) -> ModelSpec {
        match self {
            ModelId::QuasiHarmonicK => ModelSpec {
                id: self,
                name: "quasi-harmonic-k",
                description: "nonlinear oscillator with quasi-harmonic behaviour, \
                              curvature-like parameter k",
                parameter: "k",
                admissible: "any real; domain shrinks to (-1/sqrt(k), 1/sqrt(k)) for k > 0; \
                             alias `lambda` is accepted and negated",
                mass_src: "1/(1 - k*x^2)",
                potential_src: "x^2/(2*(1 - k*x^2))",
                domain_desc: "R for k <= 0, else (-1/sqrt(k), 1/sqrt(k))",
            },
            ModelId::ArcsinhOsc => ModelSpec {
                id: self,
                name: "arcsinh-osc",
                description: "nonlinear oscillator no. 1, arcsinh-squared potential",
                parameter: "L",
                admissible: "L > 0",
                mass_src: "1/(1 + L^2*x^2)",
                potential_src: "arcsinh(L*x)^2/(2*L^2)",
                domain_desc: "R",
            },
            ModelId::LogOsc => ModelSpec {
                id: self,
                name: "log-osc",
                description: "nonlinear oscillator no. 2, log-squared potential",
                parameter: "L",
                admissible: "L > 0",
                mass_src: "1/(1 + L*x)^2",
                potential_src: "log(1 + L*x)^2/(2*L^2)",
                domain_desc: "(-1/L, inf)",
            },
            ModelId::ArctanhOsc => ModelSpec {
                id: self,
                name: "arctanh-osc",
                description: "nonlinear oscillator no. 3, arctanh-squared potential",
                parameter: "L",
                admissible: "L > 0",
                mass_src: "1/(1 - L^2*x^2)^2",
                potential_src: "arctanh(L*x)^2/(2*L^2)",
                domain_desc: "(-1/L, 1/L)",
            },
        }
    }
}

/// Instantiate a built-in model as a dimensionless ProblemDef.
pub fn builtin(id: ModelId, params: &Bindings) -> Result<ProblemDef, ModelError> {
    match id {
        ModelId::QuasiHarmonicK => {
            // accept k directly (alias kappa), or lambda with k = -lambda
            let k = match (
                params.get("k").or_else(|| params.get("kappa")),
                params.get("lambda"),
            ) {
                (Some(k), _) => *k,
                (None, Some(l)) => -*l,
                (None, None) => return Err(ModelError::MissingParameter("k".into())),
            };
            let spec = id.spec();
            let domain = if k > 0.0 {
                let wall = 1.0 / k.sqrt();
                Domain {
                    lo: Endpoint::SingularMass(-wall),
                    hi: Endpoint::SingularMass(wall),
                }
            } else {
                Domain::real_line()
            };
            Ok(make_problem(&spec, domain, &[("k", k)]))
        }
        ModelId::ArcsinhOsc | ModelId::LogOsc | ModelId::ArctanhOsc => {
            let big_l = *params
                .get("L")
                .ok_or_else(|| ModelError::MissingParameter("L".into()))?;
            if big_l <= 0.0 {
                return Err(ModelError::InadmissibleParameter {
                    name: "L".into(),
                    value: big_l,
                    why: "must be positive".into(),
                });
            }
            let spec = id.spec();
            let domain = match id {
                ModelId::ArcsinhOsc => Domain::real_line(),
                ModelId::LogOsc => Domain {
                    lo: Endpoint::SingularMass(-1.0 / big_l),
                    hi: Endpoint::Infinite,
                },
                ModelId::ArctanhOsc => Domain {
                    lo: Endpoint::SingularMass(-1.0 / big_l),
                    hi: Endpoint::SingularMass(1.0 / big_l),
                },
                ModelId::QuasiHarmonicK => unreachable!(),
            };
            Ok(make_problem(&spec, domain, &[("L", big_l)]))
        }
    }
}

fn make_problem(spec: &ModelSpec, domain: Domain, binds: &[(&str, f64)]) -> ProblemDef {
    let mass = parse_expr(spec.mass_src).expect("registry mass source parses");
    let potential = parse_expr(spec.potential_src).expect("registry potential source parses");
    let bindings: Bindings = binds.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    ProblemDef::new(mass, potential, domain, bindings)
}

/// Physical-to-dimensionless scaling for the lambda-family models:
/// x = sqrt(hbar/(m0 alpha)) x~, lambda = sqrt(m0 alpha/hbar) Lambda,
/// E = hbar alpha e. For the k-model, kappa = (alpha/hbar) k~ with m0 = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingMap {
    pub hbar: f64,
    pub m0: f64,
    pub alpha: f64,
}

impl ScalingMap {
    pub fn new(hbar: f64, m0: f64, alpha: f64) -> Result<ScalingMap, ModelError> {
        for (name, value) in [("hbar", hbar), ("m0", m0), ("alpha", alpha)] {
            if value <= 0.0 {
                return Err(ModelError::NonPositiveScale {
                    name: name.into(),
                    value,
                });
            }
        }
        Ok(ScalingMap { hbar, m0, alpha })
    }

    /// Length scale: x = x_scale * x~.
    pub fn x_scale(&self) -> f64 {
        (self.hbar / (self.m0 * self.alpha)).sqrt()
    }

    pub fn x_from_dimless(&self, x_tilde: f64) -> f64 {
        self.x_scale() * x_tilde
    }

    pub fn x_to_dimless(&self, x: f64) -> f64 {
        x / self.x_scale()
    }

    /// lambda = sqrt(m0 alpha / hbar) * Lambda.
    pub fn lambda_from_dimless(&self, big_l: f64) -> f64 {
        (self.m0 * self.alpha / self.hbar).sqrt() * big_l
    }

    pub fn lambda_to_dimless(&self, lambda: f64) -> f64 {
        lambda / (self.m0 * self.alpha / self.hbar).sqrt()
    }

    /// kappa = (alpha/hbar) * k~.
    pub fn kappa_from_dimless(&self, k_tilde: f64) -> f64 {
        self.alpha / self.hbar * k_tilde
    }

    pub fn kappa_to_dimless(&self, kappa: f64) -> f64 {
        kappa * self.hbar / self.alpha
    }

    /// E = hbar alpha e.
    pub fn energy_from_dimless(&self, e: f64) -> f64 {
        self.hbar * self.alpha * e
    }

    pub fn energy_to_dimless(&self, energy: f64) -> f64 {
        energy / (self.hbar * self.alpha)
    }
}

/// Convert a dimensionful lambda (or kappa for the k-model) into its
/// dimensionless counterpart together with the scaling map.
pub fn to_dimensionless(
    id: ModelId,
    hbar: f64,
    m0: f64,
    alpha: f64,
    param: f64,
) -> Result<(f64, ScalingMap), ModelError> {
    let map = ScalingMap::new(hbar, m0, alpha)?;
    let dimless = match id {
        ModelId::QuasiHarmonicK => map.kappa_to_dimless(param),
        _ => map.lambda_to_dimless(param),
    };
    Ok((dimless, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::bindings;

    #[test]
    fn arcsinh_model_values() {
        let p = builtin(ModelId::ArcsinhOsc, &bindings(&[("L", 1.0)])).unwrap();
        let m1 = p.mass.eval(1.0, &p.bindings).unwrap();
        let v1 = p.potential.eval(1.0, &p.bindings).unwrap();
        assert!((m1 - 0.5).abs() < 1e-15);
        assert!((v1 - 0.5 * 1.0f64.asinh().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn quasi_harmonic_k_zero_is_harmonic_oscillator() {
        let p = builtin(ModelId::QuasiHarmonicK, &bindings(&[("k", 0.0)])).unwrap();
        for x in [-2.0, -0.5, 0.0, 1.0, 3.0] {
            assert_eq!(p.mass.eval(x, &p.bindings).unwrap(), 1.0);
            assert_eq!(p.potential.eval(x, &p.bindings).unwrap(), 0.5 * x * x);
        }
        assert_eq!(p.domain, Domain::real_line());
    }

    #[test]
    fn quasi_harmonic_lambda_alias_negates() {
        let via_alias = builtin(ModelId::QuasiHarmonicK, &bindings(&[("lambda", 1.0)])).unwrap();
        let direct = builtin(ModelId::QuasiHarmonicK, &bindings(&[("k", -1.0)])).unwrap();
        assert_eq!(via_alias.bindings, direct.bindings);
    }

    #[test]
    fn log_osc_domain() {
        let p = builtin(ModelId::LogOsc, &bindings(&[("L", 2.0)])).unwrap();
        assert_eq!(p.domain.lo, Endpoint::SingularMass(-0.5));
        assert_eq!(p.domain.hi, Endpoint::Infinite);
    }

    #[test]
    fn quasi_harmonic_positive_k_walls() {
        let p = builtin(ModelId::QuasiHarmonicK, &bindings(&[("k", 4.0)])).unwrap();
        assert_eq!(p.domain.lo, Endpoint::SingularMass(-0.5));
        assert_eq!(p.domain.hi, Endpoint::SingularMass(0.5));
    }

    #[test]
    fn inadmissible_parameters_rejected() {
        assert!(matches!(
            builtin(ModelId::ArcsinhOsc, &bindings(&[("L", -1.0)])),
            Err(ModelError::InadmissibleParameter { .. })
        ));
        assert!(matches!(
            builtin(ModelId::LogOsc, &Bindings::new()),
            Err(ModelError::MissingParameter(_))
        ));
    }

    #[test]
    fn limit_consistency_rates() {
        // sup over [-2,2] of |m-1| and |V - x^2/2| vanishes as the
        // parameter does, at the expected order
        let sup_dev = |id: ModelId, pname: &str, pval: f64| -> (f64, f64) {
            let p = builtin(id, &bindings(&[(pname, pval)])).unwrap();
            let mut dm: f64 = 0.0;
            let mut dv: f64 = 0.0;
            for i in 0..81 {
                let x = -2.0 + 4.0 * i as f64 / 80.0;
                if !p.domain.contains(x) {
                    continue;
                }
                dm = dm.max((p.mass.eval(x, &p.bindings).unwrap() - 1.0).abs());
                dv = dv.max((p.potential.eval(x, &p.bindings).unwrap() - 0.5 * x * x).abs());
            }
            (dm, dv)
        };
        // rate 1 in the parameter for K and log-osc, rate 2 for the others
        for (id, pname, rate) in [
            (ModelId::QuasiHarmonicK, "k", 1),
            (ModelId::ArcsinhOsc, "L", 2),
            (ModelId::LogOsc, "L", 1),
            (ModelId::ArctanhOsc, "L", 2),
        ] {
            let (m2, v2) = sup_dev(id, pname, 1e-2);
            let (m3, v3) = sup_dev(id, pname, 1e-3);
            let factor = 10f64.powi(rate) * 0.5; // allow slack on the constant
            assert!(m2 / m3.max(1e-300) > factor, "{id:?} mass rate: {m2} vs {m3}");
            assert!(v2 / v3.max(1e-300) > factor, "{id:?} potential rate: {v2} vs {v3}");
            assert!(m2 < 1.0 && v2 < 1.0);
        }
    }

    #[test]
    fn scaling_round_trip() {
        let map = ScalingMap::new(2.0, 3.0, 0.7).unwrap();
        for v in [0.1, 1.0, 5.0] {
            assert!((map.x_to_dimless(map.x_from_dimless(v)) - v).abs() <= 1e-14 * v);
            assert!((map.lambda_to_dimless(map.lambda_from_dimless(v)) - v).abs() <= 1e-14 * v);
            assert!((map.kappa_to_dimless(map.kappa_from_dimless(v)) - v).abs() <= 1e-14 * v);
            assert!((map.energy_to_dimless(map.energy_from_dimless(v)) - v).abs() <= 1e-14 * v);
        }
    }

    #[test]
    fn dimensionless_conversion_examples() {
        // unit scales: lambda = Lambda
        let (l, _) = to_dimensionless(ModelId::ArcsinhOsc, 1.0, 1.0, 1.0, 0.5).unwrap();
        assert!((l - 0.5).abs() < 1e-15);
        // hbar=2, m0=1, alpha=2: sqrt(m0 alpha/hbar) = 1, so Lambda = lambda
        let (l, _) = to_dimensionless(ModelId::ArcsinhOsc, 2.0, 1.0, 2.0, 1.0).unwrap();
        assert!((l - 1.0).abs() < 1e-14);
        // E = hbar alpha e
        let map = ScalingMap::new(2.0, 1.0, 3.0).unwrap();
        assert!((map.energy_from_dimless(0.5) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn non_positive_scales_rejected() {
        assert!(matches!(
            ScalingMap::new(0.0, 1.0, 1.0),
            Err(ModelError::NonPositiveScale { .. })
        ));
    }
}
