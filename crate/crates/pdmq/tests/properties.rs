//! Property-based invariants of the expression layer: the printer emits
//! parseable text, simplification never changes values, and symbolic
//! derivatives track finite differences.

use pdmq::expr::{parse_expr, Bindings, Expr, Func};
use proptest::prelude::*;

/// Expressions built only from pieces that are total on the real line,
/// so evaluation failures stay rare and uninteresting.
fn safe_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        3 => (-200i32..200).prop_map(|n| Expr::num(n as f64 / 100.0)),
        2 => Just(Expr::var()),
    ];
    leaf.prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            inner.clone().prop_map(Expr::neg),
            inner.clone().prop_map(|a| Expr::apply(Func::Sin, a)),
            inner.clone().prop_map(|a| Expr::apply(Func::Cos, a)),
            inner.clone().prop_map(|a| Expr::apply(Func::Tanh, a)),
            inner.clone().prop_map(|a| Expr::apply(Func::Arctan, a)),
            inner.clone().prop_map(|a| Expr::apply(Func::Arcsinh, a)),
            inner
                .clone()
                .prop_map(|a| (Expr::num(1.0) + a * Expr::num(0.5)).powc(2.0)),
            inner
                .clone()
                .prop_map(|a| Expr::num(1.0) / (Expr::num(1.0) + a.clone() * a)),
        ]
    })
}

const POINTS: [f64; 7] = [-1.5, -0.9, -0.3, 0.1, 0.4, 0.8, 1.3];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// Rendering an expression and parsing the result reproduces its values.
    #[test]
    fn printer_output_reparses_to_the_same_function(e in safe_expr()) {
        let text = e.to_string();
        let parsed = parse_expr(&text)
            .unwrap_or_else(|err| panic!("printer emitted unparseable `{text}`: {err}"));
        let b = Bindings::new();
        for x in POINTS {
            if let Ok(v) = e.eval(x, &b) {
                let w = parsed.eval(x, &b)
                    .unwrap_or_else(|err| panic!("reparse of `{text}` fails at {x}: {err}"));
                prop_assert!(
                    (v - w).abs() <= 1e-12 * (1.0 + v.abs()),
                    "`{text}` at {x}: {v} vs {w}"
                );
            }
        }
    }

    /// Simplification is purely structural: values never move.
    #[test]
    fn simplify_preserves_values(e in safe_expr()) {
        let s = e.simplify();
        let b = Bindings::new();
        for x in POINTS {
            match (e.eval(x, &b), s.eval(x, &b)) {
                (Ok(v), Ok(w)) => prop_assert!(
                    (v - w).abs() <= 1e-10 * (1.0 + v.abs()),
                    "simplify changed value at {x}: {v} vs {w}\n{e:?}\n{s:?}"
                ),
                (Ok(v), Err(err)) => prop_assert!(
                    false,
                    "simplify broke evaluation at {x} (was {v}): {err}"
                ),
                _ => {}
            }
        }
    }

    /// The symbolic derivative agrees with a 5-point finite difference
    /// wherever the function is well scaled.
    #[test]
    fn derivative_matches_finite_difference(e in safe_expr()) {
        let d = e.diff().simplify();
        let b = Bindings::new();
        for x in POINTS {
            let h = 1e-4 * (1.0 + x.abs());
            let stencil: Option<Vec<f64>> = [-2.0, -1.0, 1.0, 2.0]
                .iter()
                .map(|s| e.eval(x + s * h, &b).ok())
                .collect();
            let (Some(st), Ok(dv)) = (stencil, d.eval(x, &b)) else { continue };
            // skip badly scaled samples where the difference quotient is noise
            if st.iter().any(|v| v.abs() > 1e4) || dv.abs() > 1e4 {
                continue;
            }
            let fd = (-st[3] + 8.0 * st[2] - 8.0 * st[1] + st[0]) / (12.0 * h);
            prop_assert!(
                (dv - fd).abs() <= 1e-5 * (1.0 + dv.abs()),
                "derivative mismatch at {x}: symbolic {dv}, numeric {fd}\n{e:?}"
            );
        }
    }
}
