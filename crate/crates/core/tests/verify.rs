use std::sync::Arc;

use homspace::matexp::{expm, seeded_rng};
use homspace::skeleton::{named_skeleton, ConstantChoice, IsotropyChoice, SKELETON_NAMES};
use homspace::spaces::{resolve_space, test_field, ConnectionChoice, FieldKind};
use homspace::verify::{
    check_descent, check_method_equivariance, log_log_slope, observed_order, refined_reference, CheckRecord, Verdict,
};
use homspace::Matrix;
use serde_json::json;

#[test]
fn records_serialize_with_their_comparison() {
    let r = CheckRecord::at_most("a", json!({"space": "so:3"}), 1e-12, 1e-10);
    let v = serde_json::to_value(&r).unwrap();
    assert_eq!(v["verdict"], "pass");
    assert_eq!(v["params"]["compare"], "<=");
    assert_eq!(v["params"]["space"], "so:3");

    let w = CheckRecord::within("b", json!({}), 3.4, 4.0, 0.25);
    assert!(!w.passed());
    assert_eq!(w.params["target"], 4.0);

    assert!(!CheckRecord::at_most("nan", json!({}), f64::NAN, 1.0).passed());
    assert!(CheckRecord::greater_than("g", json!({}), 2.0, 1.0).passed());
}

#[test]
fn slope_of_exact_power_laws() {
    let h = [0.1, 0.05, 0.025, 0.0125];
    let e: Vec<f64> = h.iter().map(|x| 3.0 * x * x * x).collect();
    assert!((log_log_slope(&h, &e) - 3.0).abs() < 1e-12);
}

#[test]
fn constant_flows_are_exact_to_precision() {
    let e = resolve_space("so:3").unwrap();
    let xi = e.space.algebra().sample(1.0, &mut seeded_rng(2));
    let x0 = e.space.sample_point(&mut seeded_rng(3));
    let exact = &expm(&xi).unwrap() * &x0;
    let nu_of_h = |h: f64| -> Box<dyn IsotropyChoice> { Box::new(ConstantChoice(xi.scale(h))) };
    let skel = named_skeleton("rkmk4").unwrap();
    let rep = observed_order(&skel, e.space.as_ref(), &nu_of_h, &x0, 1.0, &[0.5, 0.25, 0.125, 0.0625], &exact).unwrap();
    assert!(rep.exact);
    let rec = CheckRecord::order("exact", json!({}), &rep, 4.0, 0.25);
    assert_eq!(rec.verdict, Verdict::ExactToPrecision);
    assert!(rec.passed());
}

#[test]
fn step_lists_are_validated() {
    let e = resolve_space("so:3").unwrap();
    let x0 = e.space.origin();
    let nu_of_h = |h: f64| -> Box<dyn IsotropyChoice> { Box::new(ConstantChoice(Matrix::zeros(3, 3).scale(h))) };
    let skel = named_skeleton("euler_forward").unwrap();
    let run = |hs: &[f64]| observed_order(&skel, e.space.as_ref(), &nu_of_h, &x0, 1.0, hs, &x0);
    assert!(run(&[0.5, 0.25, 0.125]).is_err());
    assert!(run(&[0.5, 0.25, 0.25, 0.125]).is_err());
    assert!(run(&[0.5, 0.3, 0.25, 0.125]).is_err());
    assert!(run(&[0.5, 0.25, 0.125, -0.1]).is_err());
}

#[test]
fn gauss4_is_fourth_order_on_the_rotation_group() {
    let e = resolve_space("so:3").unwrap();
    let conn = e.connection().unwrap();
    let field = test_field(&FieldKind::GradientLike, e.space.clone(), 21).unwrap();
    let x0 = e.space.sample_point(&mut seeded_rng(22));
    let nu_of_h =
        |h: f64| -> Box<dyn IsotropyChoice> { Box::new(ConnectionChoice::new(conn.clone(), field.clone(), h)) };
    let reference = refined_reference(e.space.as_ref(), &nu_of_h, &x0, 1.0, 1.0 / 8000.0).unwrap();
    let hs = [1.0 / 4.0, 1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0];
    let rep = observed_order(&named_skeleton("gauss4").unwrap(), e.space.as_ref(), &nu_of_h, &x0, 1.0, &hs, &reference)
        .unwrap();
    assert!((rep.observed_order - 4.0).abs() <= 0.25, "{rep:?}");
}

#[test]
fn every_skeleton_descends_from_the_group() {
    for name in ["sphere:4", "grassmann:4,2", "stiefel:4,2", "spd:2"] {
        let e = resolve_space(name).unwrap();
        let field = test_field(&FieldKind::GradientLike, e.space.clone(), 1).unwrap();
        let x0 = e.space.sample_point(&mut seeded_rng(5));
        for skel in SKELETON_NAMES {
            let d = check_descent(&named_skeleton(skel).unwrap(), e.connection().unwrap(), field.clone(), &x0, 0.1)
                .unwrap();
            assert!(d <= 1e-10, "{name}/{skel}: {d:e}");
        }
    }
}

#[test]
fn method_equivariance_on_affine_space() {
    let e = resolve_space("affine_gl:2").unwrap();
    let field = test_field(&FieldKind::GradientLike, e.space.clone(), 4).unwrap();
    for skel in ["trapezoidal", "cg3"] {
        let r = check_method_equivariance(&named_skeleton(skel).unwrap(), e.connection().unwrap(), Arc::clone(&field), 0.1, 10, 6)
            .unwrap();
        assert!(r <= 1e-9, "{skel}: {r:e}");
    }
}
