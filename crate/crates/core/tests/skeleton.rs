use std::sync::Arc;

use homspace::matexp::{expm, hat, seeded_rng};
use homspace::skeleton::{
    from_butcher, motion_map, named_skeleton, ConstantChoice, SkeletonRegistry, EXPLICIT_SKELETONS, SKELETON_NAMES,
};
use homspace::spaces::{resolve_space, test_field, ConnectionChoice, FieldKind, FnField, HomogeneousSpace, VectorField};
use homspace::{Error, Matrix};
use proptest::prelude::*;

fn sphere_problem(h: f64) -> (Arc<dyn HomogeneousSpace>, ConnectionChoice, Matrix) {
    let e = resolve_space("sphere:3").unwrap();
    let field = test_field(&FieldKind::GradientLike, e.space.clone(), 7).unwrap();
    let nu = ConnectionChoice::new(e.connection().unwrap(), field, h);
    let x0 = e.space.sample_point(&mut seeded_rng(3));
    (e.space, nu, x0)
}

#[test]
fn reversing_any_edge_changes_nothing() {
    let (space, nu, x0) = sphere_problem(0.2);
    for name in SKELETON_NAMES {
        let skel = named_skeleton(name).unwrap();
        let reference = skel.step(space.as_ref(), &nu, &x0).unwrap();
        for i in 0..skel.rules().len() {
            let flipped = skel.with_reversed_edge(i).unwrap();
            let y = flipped.step(space.as_ref(), &nu, &x0).unwrap();
            assert_eq!(y, reference, "{name}, edge {i}");
        }
    }
}

#[test]
fn zero_choice_stays_put() {
    let e = resolve_space("stiefel:5,2").unwrap();
    let x0 = e.space.sample_point(&mut seeded_rng(1));
    let nu = ConstantChoice(Matrix::zeros(5, 5));
    for name in SKELETON_NAMES {
        let y = named_skeleton(name).unwrap().step(e.space.as_ref(), &nu, &x0).unwrap();
        assert!(y.distance(&x0).unwrap() <= 1e-13, "{name}");
    }
}

#[test]
fn explicit_methods_take_one_sweep() {
    let (space, nu, x0) = sphere_problem(0.1);
    for name in SKELETON_NAMES {
        let skel = named_skeleton(name).unwrap();
        let report = skel.step_with_report(space.as_ref(), &nu, &x0).unwrap();
        if EXPLICIT_SKELETONS.contains(name) {
            assert!(skel.is_explicit(), "{name}");
            assert_eq!(report.sweeps, 1, "{name}");
        } else {
            assert!(!skel.is_explicit(), "{name}");
            assert!(report.sweeps > 1, "{name}");
            assert!(report.residual <= 1e-12, "{name}: {}", report.residual);
        }
    }
}

#[test]
fn cf4_follows_a_rotation_on_the_sphere() {
    let e = resolve_space("sphere:3").unwrap();
    let w = hat(&[0.3, -0.8, 0.5]);
    let w2 = w.clone();
    let field: Arc<dyn VectorField> = Arc::new(FnField(move |x: &Matrix| Ok(&w2 * x)));
    let h = 0.1;
    let nu = ConnectionChoice::new(e.connection().unwrap(), field, h);
    let x0 = Matrix::column(&[0.6, 0.0, 0.8]);
    let y = named_skeleton("cf4").unwrap().step(e.space.as_ref(), &nu, &x0).unwrap();
    let exact = &expm(&w.scale(h)).unwrap() * &x0;
    assert!(y.distance(&exact).unwrap() <= 1e-6);
}

#[test]
fn catalog_shapes() {
    let cf4 = named_skeleton("cf4").unwrap();
    assert_eq!(cf4.tree().len(), 6);
    let mut used = cf4.used_labels();
    used.sort();
    assert_eq!(used, vec!["1", "2", "3", "initial"]);

    let euler = named_skeleton("euler_forward").unwrap();
    assert_eq!(euler.tree().len(), 2);
    assert_eq!(euler.tree().edge_count(), 1);

    let gauss = named_skeleton("gauss4").unwrap();
    assert_eq!(gauss.tree().len(), 5);
    let mut used = gauss.used_labels();
    used.sort();
    assert_eq!(used, vec!["+", "-"]);

    assert_eq!(named_skeleton("cg3").unwrap().tree().len(), 7);
    assert_eq!(named_skeleton("implicit_midpoint").unwrap().used_labels(), vec!["star"]);
}

#[test]
fn unknown_skeleton_lists_choices() {
    let err = named_skeleton("rk45").unwrap_err();
    let msg = err.to_string();
    assert!(matches!(err, Error::UnknownName { .. }));
    for name in SKELETON_NAMES {
        assert!(msg.contains(name), "{msg}");
    }
}

#[test]
fn registry_accepts_new_entries() {
    let mut reg = SkeletonRegistry::builtin();
    assert_eq!(reg.names().len(), SKELETON_NAMES.len());
    reg.register("heun", from_butcher(&[vec![0.0, 0.0], vec![1.0, 0.0]], &[0.5, 0.5]).unwrap());
    assert!(reg.get("heun").is_ok());
    assert!(reg.get("nope").is_err());
}

#[test]
fn one_stage_tableau_is_forward_euler() {
    let (space, nu, x0) = sphere_problem(0.3);
    let a = from_butcher(&[vec![0.0]], &[1.0]).unwrap();
    let b = named_skeleton("euler_forward").unwrap();
    let ya = a.step(space.as_ref(), &nu, &x0).unwrap();
    let yb = b.step(space.as_ref(), &nu, &x0).unwrap();
    assert!(ya.distance(&yb).unwrap() <= 1e-15);
}

#[test]
fn zero_weights_leave_the_point() {
    let (space, nu, x0) = sphere_problem(0.3);
    let skel = from_butcher(&[vec![0.0]], &[0.0]).unwrap();
    assert_eq!(skel.step(space.as_ref(), &nu, &x0).unwrap(), x0);
}

#[test]
fn bad_tableaux() {
    assert!(from_butcher(&[], &[]).is_err());
    assert!(from_butcher(&[vec![0.0, 0.0]], &[1.0]).is_err());
    assert!(from_butcher(&[vec![f64::NAN]], &[1.0]).is_err());
}

#[test]
fn leaving_the_manifold_names_the_stage() {
    let e = resolve_space("sphere:3").unwrap();
    let nu = ConstantChoice(Matrix::diagonal(&[0.5, 0.0, 0.0]));
    let x0 = Matrix::column(&[1.0, 0.0, 0.0]);
    match named_skeleton("euler_forward").unwrap().step(e.space.as_ref(), &nu, &x0) {
        Err(Error::LeftManifold { vertex, .. }) => assert_eq!(vertex, "final"),
        other => panic!("expected LeftManifold, got {other:?}"),
    }
}

#[test]
fn stiff_implicit_solve_reports_non_convergence() {
    let (space, nu, x0) = sphere_problem(40.0);
    let err = named_skeleton("euler_backward").unwrap().step(space.as_ref(), &nu, &x0);
    assert!(matches!(err, Err(Error::NonConvergence { .. }) | Err(Error::LeftManifold { .. })), "{err:?}");
}

#[test]
fn cayley_motion_is_selectable() {
    let skel = named_skeleton("rkmk4").unwrap().with_motion(motion_map("cayley").unwrap());
    let (space, nu, x0) = sphere_problem(0.1);
    let y = skel.step(space.as_ref(), &nu, &x0).unwrap();
    assert!(space.distance_to_manifold(&y) <= 1e-12);
    assert!(motion_map("slerp").is_err());
}

#[test]
fn integrate_returns_the_whole_path() {
    let (space, nu, x0) = sphere_problem(0.05);
    let skel = named_skeleton("rkmk3").unwrap();
    let path = skel.integrate(space.as_ref(), &nu, &x0, 8).unwrap();
    assert_eq!(path.len(), 9);
    assert_eq!(path[0], x0);
    assert_eq!(path[8], skel.advance(space.as_ref(), &nu, &x0, 8).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn constant_choices_are_solved_exactly(v in proptest::array::uniform3(-0.6..0.6f64), pick in 0usize..9) {
        let e = resolve_space("so:3").unwrap();
        let xi = hat(&v);
        let x0 = e.space.sample_point(&mut seeded_rng(pick as u64));
        let y = named_skeleton(SKELETON_NAMES[pick]).unwrap().step(e.space.as_ref(), &ConstantChoice(xi.clone()), &x0).unwrap();
        let exact = &expm(&xi).unwrap() * &x0;
        prop_assert!(y.distance(&exact).unwrap() <= 1e-10);
    }

    #[test]
    fn orientation_flip_is_bitwise(seed in 0u64..1000, pick in 0usize..9) {
        let e = resolve_space("sphere:3").unwrap();
        let field = test_field(&FieldKind::GradientLike, e.space.clone(), seed).unwrap();
        let nu = ConnectionChoice::new(e.connection().unwrap(), field, 0.15);
        let x0 = e.space.sample_point(&mut seeded_rng(seed));
        let skel = named_skeleton(SKELETON_NAMES[pick]).unwrap();
        let edge = (seed as usize) % skel.rules().len();
        let a = skel.step(e.space.as_ref(), &nu, &x0).unwrap();
        let b = skel.with_reversed_edge(edge).unwrap().step(e.space.as_ref(), &nu, &x0).unwrap();
        prop_assert_eq!(a, b);
    }
}
