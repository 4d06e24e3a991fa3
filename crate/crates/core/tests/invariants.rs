use bht_core::expr::{self, numbered_names, parse_expr};
use bht_core::fields::{bitension, tension, SmoothMap};
use bht_core::geometry::ManifoldSpec;
use bht_core::sampling::{halton, sample, Region};
use bht_core::{seed, Expr, MultiIndex};
use proptest::prelude::*;

const SOURCES: [&str; 5] = [
    "x1^2*x2 - sin(x3)",
    "exp(x1 - x2)*cos(x3)",
    "x1*x2*x3 + x2^4",
    "sqrt(2 + x1^2 + x3^2)",
    "ln(3 + x1*x2) - x3^3",
];

fn vars3() -> Vec<String> {
    numbered_names("x", 3)
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 3)
}

fn rotation(a: f64) -> [[f64; 3]; 3] {
    let (s, c) = a.sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

fn apply(r: &[[f64; 3]; 3], x: &[f64]) -> Vec<f64> {
    r.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

fn euclid_map(comps: Vec<Expr>) -> SmoothMap {
    let d = ManifoldSpec::Euclidean(3);
    let n = comps.len();
    SmoothMap::new(
        "p",
        d.clone(),
        ManifoldSpec::Euclidean(n),
        vars3(),
        comps,
        Region::uniform(&d, -2.0, 2.0),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jets_agree_with_symbolic_derivatives(k in 0usize..5, x in point()) {
        let e = parse_expr(SOURCES[k], &vars3()).unwrap();
        let j = e.eval_jet(&seed(&x, 3).unwrap()).unwrap();
        prop_assert!((j.value() - e.eval(&x).unwrap()).abs() <= 1e-12);
        for i in 0..3 {
            let d = e.derivative(i);
            prop_assert!((j.partial(&MultiIndex::unit(3, i)).unwrap() - d.eval(&x).unwrap()).abs() <= 1e-10);
            for l in 0..3 {
                let want = d.derivative(l).eval(&x).unwrap();
                let got = j.partial(&MultiIndex::pair(3, i, l)).unwrap();
                prop_assert!((got - want).abs() <= 1e-9 * (1.0 + want.abs()));
            }
        }
    }

    #[test]
    fn residual_norms_are_isometry_invariant(a in 0.0f64..6.3, k in 0usize..5, l in 0usize..5, x in point()) {
        let v = vars3();
        let comps = vec![parse_expr(SOURCES[k], &v).unwrap(), parse_expr(SOURCES[l], &v).unwrap()];
        let r = rotation(a);
        // φ ∘ R on the domain side
        let rx: Vec<Expr> = r
            .iter()
            .map(|row| expr::sum(row.iter().enumerate().map(|(i, c)| expr::mul(expr::c(*c), expr::var(i)))))
            .collect();
        let moved = euclid_map(comps.iter().map(|e| e.substitute(&rx)).collect());
        // rotation of the target plane
        let (s, c) = a.sin_cos();
        let turned = euclid_map(vec![
            expr::sub(expr::mul(expr::c(c), comps[0].clone()), expr::mul(expr::c(s), comps[1].clone())),
            expr::add(expr::mul(expr::c(s), comps[0].clone()), expr::mul(expr::c(c), comps[1].clone())),
        ]);
        let base = euclid_map(comps);
        let y = apply(&r, &x);
        let t0 = tension(&base, &y).unwrap().norm;
        let b0 = bitension(&base, &y).unwrap().norm;
        let tol = |v: f64| 1e-9 * (1.0 + v.abs());
        prop_assert!((tension(&moved, &x).unwrap().norm - t0).abs() <= tol(t0));
        prop_assert!((bitension(&moved, &x).unwrap().norm - b0).abs() <= tol(b0));
        let b1 = bitension(&base, &x).unwrap().norm;
        prop_assert!((bitension(&turned, &x).unwrap().norm - b1).abs() <= tol(b1));
    }

    #[test]
    fn samples_stay_in_region(n in 1usize..80, lo in -3.0f64..0.0, w in 0.5f64..4.0, rmin in 0.0f64..0.5) {
        let spec = ManifoldSpec::product(vec![ManifoldSpec::sphere(3, 2.0), ManifoldSpec::Euclidean(2)]);
        let region = Region::uniform(&spec, lo, lo + w);
        let shelled = Region::uniform(&ManifoldSpec::Euclidean(3), -1.0, 1.0).with_shell(0..3, rmin, 1.0);
        for p in sample(&spec, &region, n).unwrap() {
            prop_assert!(region.contains(&p));
            let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            prop_assert!((r - 2.0).abs() < 1e-14);
        }
        for p in sample(&ManifoldSpec::Euclidean(3), &shelled, n).unwrap() {
            prop_assert!(shelled.contains(&p));
        }
    }

    #[test]
    fn halton_points_in_unit_cube(i in 0u64..1_000_000, dim in 1usize..24) {
        let h = halton(i, dim);
        prop_assert_eq!(h.len(), dim);
        prop_assert!(h.iter().all(|v| (0.0..1.0).contains(v)));
    }
}
