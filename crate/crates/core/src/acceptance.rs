//! The acceptance suite: ten numbered criteria, each a list of
//! [`CheckRecord`]s with pinned thresholds.

use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use crate::algebra::MatrixGroup;
use crate::algebrachk::{classify, find_reductive_complements, SubalgebraSplit};
use crate::error::Result;
use crate::matexp::{seeded_rng, Matrix};
use crate::skeleton::{from_butcher, motion_map, named_skeleton, IsotropyChoice, SKELETON_NAMES};
use crate::spaces::{
    lax_choice, resolve_space, test_field, toda_generator, Connection, ConnectionChoice, DroppedTermStiefel, FieldKind,
    FnField, HomogeneousSpace, ShiftedConnection, SpaceEntry, Stiefel, VectorField,
};
use crate::verify::{
    check_consistency, check_descent, check_equivariance, check_method_equivariance, invariant_extreme,
    observed_order, order_zero_exactness, refined_reference, CheckRecord,
};

pub const CRITERIA: [(u32, &str); 10] = [
    (1, "order-zero exactness"),
    (2, "connection consistency"),
    (3, "connection and method equivariance"),
    (4, "manifold preservation"),
    (5, "observed convergence orders"),
    (6, "descent from the group"),
    (7, "symmetric/flat classification table"),
    (8, "non-existence of a reductive complement"),
    (9, "classical Runge-Kutta limit"),
    (10, "negative controls discriminate"),
];

#[derive(Clone, Copy, Debug, Default)]
pub struct AcceptanceOptions {
    pub seed: u64,
    /// Replace the Stiefel connection by a corrupted one wherever it is
    /// checked, so that the suite must fail.
    pub inject_corruption: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub seconds: f64,
    pub records: Vec<CheckRecord>,
    pub error: Option<String>,
}

impl CriterionOutcome {
    /// One-line summary, e.g. `PASS  3  connection and method equivariance (12.1 s)`.
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let failed: Vec<&str> = self
            .records
            .iter()
            .filter(|r| !r.passed())
            .map(|r| r.name.as_str())
            .collect();
        let mut line = format!("{status} {:>2}  {} ({:.2} s)", self.id, self.title, self.seconds);
        if let Some(e) = &self.error {
            line.push_str(&format!(" error: {e}"));
        } else if !failed.is_empty() {
            let shown: Vec<&str> = failed.iter().take(4).copied().collect();
            line.push_str(&format!(" failing: {}", shown.join(", ")));
            if failed.len() > shown.len() {
                line.push_str(&format!(" (+{} more)", failed.len() - shown.len()));
            }
        }
        line
    }
}

pub fn run_criterion(id: u32, opts: &AcceptanceOptions) -> CriterionOutcome {
    let title = CRITERIA
        .iter()
        .find(|(i, _)| *i == id)
        .map(|(_, t)| *t)
        .unwrap_or("unknown criterion");
    let start = Instant::now();
    let result = match id {
        1 => order_zero(opts),
        2 => consistency(opts),
        3 => equivariance(opts),
        4 => preservation(opts),
        5 => orders(opts),
        6 => descent(opts),
        7 => table(opts),
        8 => nonexistence(opts),
        9 => classical_limit(opts),
        10 => negative_controls(opts),
        _ => Err(crate::error::Error::invalid("criterion", format!("no criterion {id}"))),
    };
    let seconds = start.elapsed().as_secs_f64();
    let budget = match id {
        1 => Some(5.0),
        3 => Some(60.0),
        _ => None,
    };
    match result {
        Ok(mut records) => {
            if let Some(b) = budget {
                records.push(CheckRecord::at_most("runtime_seconds", json!({}), seconds, b));
            }
            CriterionOutcome {
                id,
                title,
                passed: records.iter().all(CheckRecord::passed),
                seconds,
                records,
                error: None,
            }
        }
        Err(e) => CriterionOutcome {
            id,
            title,
            passed: false,
            seconds,
            records: vec![],
            error: Some(e.to_string()),
        },
    }
}

pub fn run_all(opts: &AcceptanceOptions) -> Vec<CriterionOutcome> {
    CRITERIA.iter().map(|(id, _)| run_criterion(*id, opts)).collect()
}

fn entry(name: &str) -> Result<SpaceEntry> {
    resolve_space(name)
}

fn corrupted_stiefel(n: usize, k: usize) -> Result<Arc<dyn Connection>> {
    let dropped: Arc<dyn Connection> = Arc::new(DroppedTermStiefel::new(Stiefel::new(n, k)?));
    Ok(Arc::new(ShiftedConnection::by_isotropy(dropped)))
}

/// Catalog connection, or the corrupted replacement for Stiefel frames when
/// injection is on.
fn connection_for(name: &str, opts: &AcceptanceOptions) -> Result<Arc<dyn Connection>> {
    let e = entry(name)?;
    if opts.inject_corruption {
        if let Some(args) = name.strip_prefix("stiefel:") {
            let v: Vec<usize> = args.split(',').filter_map(|s| s.parse().ok()).collect();
            return corrupted_stiefel(v[0], v[1]);
        }
    }
    e.connection()
}

fn order_zero(opts: &AcceptanceOptions) -> Result<Vec<CheckRecord>> {
    let mut out = vec![];
    for space_name in ["so:3", "sphere:3"] {
        let space = entry(space_name)?.space;
        for name in SKELETON_NAMES {
            let skel = named_skeleton(name)?;
            let r = order_zero_exactness(&skel, space.as_ref(), 20, opts.seed)?;
            out.push(CheckRecord::at_most(
                &format!("order_zero/{space_name}/{name}"),
                json!({"space": space_name, "skeleton": name, "samples": 20}),
                r,
                1e-10,
            ));
        }
    }
    Ok(out)
}

const CONNECTIONS: &[&str] = &[
    "affine:3",
    "affine_gl:3",
    "sphere:3",
    "sphere:5",
    "stiefel:5,2",
    "stiefel:4,3",
    "grassmann:4,2",
    "isospectral:3*2,1*2",
    "spd:3",
    "so:3",
    "gl:3",
    "so:3:right",
    "gl:3:right",
    "cartan_schouten:so3:plus",
    "cartan_schouten:so3:minus",
    "cartan_schouten:so3:mean",
    "cartan_schouten:gl2:mean",
];

fn consistency(opts: &AcceptanceOptions) -> Result<Vec<CheckRecord>> {
    CONNECTIONS
        .iter()
        .map(|name| {
            let conn = connection_for(name, opts)?;
            let r = check_consistency(conn.as_ref(), 100, opts.seed)?;
            Ok(CheckRecord::at_most(
                &format!("consistency/{name}"),
                json!({"space": name, "connection": conn.name(), "samples": 100}),
                r,
                1e-11,
            ))
        })
        .collect()
}

const EQUIVARIANCE_SPACES: &[&str] = &[
    "sphere:3",
    "stiefel:5,2",
    "grassmann:4,2",
    "spd:3",
    "so:3",
    "cartan_schouten:so3:mean",
];
const EQUIVARIANCE_METHODS: &[&str] = &["euler_forward", "rkmk4", "cf4", "gauss4"];

fn equivariance(opts: &AcceptanceOptions) -> Result<Vec<CheckRecord>> {
    let mut out = vec![];
    for space_name in EQUIVARIANCE_SPACES {
        let conn = connection_for(space_name, opts)?;
        let r = check_equivariance(conn.as_ref(), 100, opts.seed)?;
        out.push(CheckRecord::at_most(
            &format!("equivariance/{space_name}/connection"),
            json!({"space": space_name, "samples": 100}),
            r,
            1e-9,
        ));
        let space = entry(space_name)?.space;
        let field = test_field(&FieldKind::GradientLike, space, opts.seed)?;
        for method in EQUIVARIANCE_METHODS {
            let skel = named_skeleton(method)?;
            let r = check_method_equivariance(&skel, conn.clone(), field.clone(), 0.1, 100, opts.seed + 1)?;
            out.push(CheckRecord::at_most(
                &format!("equivariance/{space_name}/{method}"),
                json!({"space": space_name, "skeleton": method, "samples": 100, "step": 0.1}),
                r,
                1e-9,
            ));
        }
    }
    Ok(out)
}

fn preservation(opts: &AcceptanceOptions) -> Result<Vec<CheckRecord>> {
    let mut out = vec![];
    let h = 0.01;
    let steps = 100;

    let stiefel = entry("stiefel:5,2")?;
    let conn = connection_for("stiefel:5,2", opts)?;
    let field = test_field(&FieldKind::GradientLike, stiefel.space.clone(), opts.seed)?;
    let nu = ConnectionChoice::new(conn, field, h);
    let x0 = stiefel.space.sample_point(&mut seeded_rng(opts.seed));
    for name in SKELETON_NAMES {
        let traj = named_skeleton(name)?.integrate(stiefel.space.as_ref(), &nu, &x0, steps)?;
        out.push(CheckRecord::at_most(
            &format!("preservation/stiefel:5,2/{name}"),
            json!({"space": "stiefel:5,2", "skeleton": name, "step": h, "steps": steps, "quantity": "|QtQ - I|"}),
            invariant_extreme(stiefel.space.as_ref(), &traj),
            1e-10,
        ));
    }

    let toda = entry("toda:4")?.space;
    let lax = lax_choice(toda_generator, h);
    let traj = named_skeleton("cf4")?.integrate(toda.as_ref(), &lax, &toda.initial_point(), steps)?;
    out.push(CheckRecord::at_most(
        "preservation/toda:4/cf4",
        json!({"space": "toda:4", "skeleton": "cf4", "step": h, "steps": steps, "quantity": "sorted spectrum drift"}),
        invariant_extreme(toda.as_ref(), &traj),
        1e-8,
    ));

    let spd = entry("spd:3")?;
    let field = test_field(&FieldKind::GradientLike, spd.space.clone(), opts.seed)?;
    let nu = ConnectionChoice::new(spd.connection()?, field, h);
    let x0 = spd.space.sample_point(&mut seeded_rng(opts.seed + 7));
    for name in ["euler_forward", "rkmk4", "cf4", "gauss4"] {
        let traj = named_skeleton(name)?.integrate(spd.space.as_ref(), &nu, &x0, steps)?;
        out.push(CheckRecord::greater_than(
            &format!("preservation/spd:3/{name}"),
            json!({"space": "spd:3", "skeleton": name, "step": h, "steps": steps, "quantity": "min eigenvalue"}),
            invariant_extreme(spd.space.as_ref(), &traj),
            0.0,
        ));
    }
    Ok(out)
}

/// Design orders with their tolerances and step lists (final time 1).
pub const ORDER_TARGETS: &[(&str, f64, f64, &[f64])] = &[
    ("euler_forward", 1.0, 0.2, &[1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0]),
    ("implicit_midpoint", 2.0, 0.2, &[1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0]),
    ("trapezoidal", 2.0, 0.2, &[1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0]),
    ("rkmk3", 3.0, 0.25, &[1.0 / 4.0, 1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0]),
    ("cg3", 3.0, 0.25, &[1.0 / 4.0, 1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0]),
    ("rkmk4", 4.0, 0.25, &[1.0 / 4.0, 1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0]),
    ("cf4", 4.0, 0.25, &[1.0 / 4.0, 1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0]),
    ("gauss4", 4.0, 0.25, &[1.0 / 4.0, 1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0]),
];

/// Smallest step in [`ORDER_TARGETS`] divided by 1000.
pub const ORDER_REFERENCE_STEP: f64 = 1.0 / 256_000.0;

fn orders(opts: &AcceptanceOptions) -> Result<Vec<CheckRecord>> {
    let mut out = vec![];
    for space_name in ["sphere:3", "so:3"] {
        let e = entry(space_name)?;
        let conn = e.connection()?;
        let field = test_field(&FieldKind::GradientLike, e.space.clone(), opts.seed)?;
        let x0 = e.space.sample_point(&mut seeded_rng(opts.seed + 3));
        let nu_of_h = |h: f64| -> Box<dyn IsotropyChoice> { Box::new(ConnectionChoice::new(conn.clone(), field.clone(), h)) };
        let reference = refined_reference(e.space.as_ref(), &nu_of_h, &x0, 1.0, ORDER_REFERENCE_STEP)?;
        for &(name, target, tol, h_list) in ORDER_TARGETS {
            let skel = named_skeleton(name)?;
            let rep = observed_order(&skel, e.space.as_ref(), &nu_of_h, &x0, 1.0, h_list, &reference)?;
            out.push(CheckRecord::order(
                &format!("order/{space_name}/{name}"),
                json!({"space": space_name, "skeleton": name}),
                &rep,
                target,
                tol,
            ));
        }
    }
    Ok(out)
}

fn descent(opts: &AcceptanceOptions) -> Result<Vec<CheckRecord>> {
    let mut out = vec![];
    for space_name in ["sphere:3", "grassmann:4,2"] {
        let e = entry(space_name)?;
        let conn = e.connection()?;
        let field = test_field(&FieldKind::GradientLike, e.space.clone(), opts.seed)?;
        let mut rng = seeded_rng(opts.seed + 5);
        for method in ["euler_forward", "rkmk4", "cf4", "gauss4"] {
            let skel = named_skeleton(method)?;
            let mut worst: f64 = 0.0;
            for _ in 0..10 {
                let x0 = e.space.sample_point(&mut rng);
                worst = worst.max(check_descent(&skel, conn.clone(), field.clone(), &x0, 0.1)?);
            }
            out.push(CheckRecord::at_most(
                &format!("descent/{space_name}/{method}"),
                json!({"space": space_name, "skeleton": method, "step": 0.1, "samples": 10}),
                worst,
                1e-10,
            ));
        }
    }
    Ok(out)
}

/// (row label, space, use the catalog connection to read off 𝔪, symmetric, flat)
pub const TABLE_ROWS: &[(&str, &str, bool, bool, bool)] = &[
    ("affine", "affine_gl:3", true, true, true),
    ("stiefel", "stiefel:4,2", true, false, false),
    ("sphere", "sphere:3", true, true, false),
    ("isospectral (general)", "isospectral:2*1,1*2,0*1", false, false, false),
    ("isospectral (principal)", "isospectral:3*1,2*1,1*1,0*1", false, false, true),
    ("grassmann", "grassmann:4,2", true, true, false),
    ("spd", "spd:3", true, true, false),
    ("maurer-cartan", "so:3", true, false, true),
    ("cartan-schouten mean", "cartan_schouten:so3:mean", true, true, false),
    ("cartan-schouten plus", "cartan_schouten:so3:plus", true, false, true),
    ("cartan-schouten minus", "cartan_schouten:so3:minus", true, false, true),
];

fn table(_opts: &AcceptanceOptions) -> Result<Vec<CheckRecord>> {
    let mut out = vec![];
    for &(label, space_name, via_connection, sym, flat) in TABLE_ROWS {
        let e = entry(space_name)?;
        let split = if via_connection {
            SubalgebraSplit::from_connection(e.connection()?.as_ref())?
        } else {
            SubalgebraSplit::orthogonal(e.space.as_ref())?
        };
        let c = classify(&split)?;
        let matches = c.reductive && c.symmetric == sym && c.flat == flat;
        out.push(CheckRecord::at_most(
            &format!("table/{label}"),
            json!({
                "space": space_name,
                "expected": {"symmetric": sym, "flat": flat},
                "got": {"reductive": c.reductive, "symmetric": c.symmetric, "flat": c.flat},
                "residuals": c.residuals,
            }),
            if matches { 0.0 } else { 1.0 },
            0.0,
        ));
    }
    Ok(out)
}

/// Bases of sl(2) and its nilpotent subalgebra.
pub fn sl2_nilpotent() -> (Vec<Matrix>, Vec<Matrix>) {
    let e = Matrix::unit(2, 2, 0, 1);
    let f = Matrix::unit(2, 2, 1, 0);
    let h = Matrix::diagonal(&[1.0, -1.0]);
    (vec![e.clone(), f, h], vec![e])
}

fn nonexistence(opts: &AcceptanceOptions) -> Result<Vec<CheckRecord>> {
    let (g, h) = sl2_nilpotent();
    let mut out = vec![];
    let mut push = |name: String, g: &[Matrix], h: &[Matrix]| -> Result<()> {
        let r = find_reductive_complements(g, h)?;
        out.push(CheckRecord::at_most(
            &name,
            json!({"outcome": r.describe()}),
            if r.is_empty() { 0.0 } else { 1.0 },
            0.0,
        ));
        Ok(())
    };
    push("complement/sl2_nilpotent".into(), &g, &h)?;
    let mut rng = seeded_rng(opts.seed + 11);
    let gl2 = MatrixGroup::General(2);
    for i in 0..10 {
        let p = gl2.sample(&mut rng);
        let p_inv = p.try_inverse()?;
        let conj = |m: &Matrix| &(&p * m) * &p_inv;
        let g2: Vec<Matrix> = g.iter().map(conj).collect();
        let h2: Vec<Matrix> = h.iter().map(conj).collect();
        push(format!("complement/sl2_nilpotent/conjugated_{i}"), &g2, &h2)?;
    }
    Ok(out)
}

/// The classical fourth-order Runge–Kutta step on ℝᵈ.
pub fn textbook_rk4(f: &dyn Fn(&Matrix) -> Matrix, x: &Matrix, h: f64) -> Matrix {
    let k1 = f(x);
    let k2 = f(&(x + &k1.scale(h / 2.0)));
    let k3 = f(&(x + &k2.scale(h / 2.0)));
    let k4 = f(&(x + &k3.scale(h)));
    x + &(k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0)
}

/// Smooth nonlinear field on ℝ³.
pub fn classical_field(x: &Matrix) -> Matrix {
    Matrix::column(&[
        x[(1, 0)].sin() - 0.5 * x[(0, 0)],
        x[(0, 0)] * x[(2, 0)] + 0.3,
        -x[(1, 0)] + x[(0, 0)].cos(),
    ])
}

fn classical_limit(opts: &AcceptanceOptions) -> Result<Vec<CheckRecord>> {
    let e = entry("affine:3")?;
    let a = vec![
        vec![0.0, 0.0, 0.0, 0.0],
        vec![0.5, 0.0, 0.0, 0.0],
        vec![0.0, 0.5, 0.0, 0.0],
        vec![0.0, 0.0, 1.0, 0.0],
    ];
    let b = [1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0];
    let skel = from_butcher(&a, &b)?;
    let field: Arc<dyn VectorField> = Arc::new(FnField(|x: &Matrix| Ok(classical_field(x))));
    let h = 0.1;
    let nu = ConnectionChoice::new(e.connection()?, field, h);
    let mut rng = seeded_rng(opts.seed + 13);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let mut x = e.space.sample_point(&mut rng);
        let mut y = x.clone();
        for _ in 0..10 {
            x = skel.step(e.space.as_ref(), &nu, &x)?;
            y = textbook_rk4(&classical_field, &y, h);
            worst = worst.max(x.distance(&y)?);
        }
    }
    Ok(vec![CheckRecord::at_most(
        "classical_limit/affine:3/rk4",
        json!({"steps": 10, "step": h, "samples": 10}),
        worst,
        1e-12,
    )])
}

fn negative_controls(opts: &AcceptanceOptions) -> Result<Vec<CheckRecord>> {
    let mut out = vec![];
    let stiefel = Stiefel::new(5, 2)?;
    let dropped: Arc<dyn Connection> = Arc::new(DroppedTermStiefel::new(stiefel.clone()));
    let r = check_consistency(dropped.as_ref(), 100, opts.seed)?;
    out.push(CheckRecord::greater_than(
        "control/dropped_term/consistency",
        json!({"space": "stiefel:5,2", "note": "must exceed the consistency threshold"}),
        r,
        1e-11,
    ));
    let good = entry("stiefel:5,2")?.connection()?;
    let shifted: Arc<dyn Connection> = Arc::new(ShiftedConnection::by_isotropy(good));
    let r = check_equivariance(shifted.as_ref(), 100, opts.seed)?;
    out.push(CheckRecord::greater_than(
        "control/shifted/equivariance",
        json!({"space": "stiefel:5,2", "note": "must exceed the equivariance threshold"}),
        r,
        1e-9,
    ));
    let space: Arc<dyn HomogeneousSpace> = Arc::new(stiefel);
    let field = test_field(&FieldKind::GradientLike, space, opts.seed)?;
    let r = check_method_equivariance(&named_skeleton("rkmk4")?, shifted, field, 0.1, 100, opts.seed)?;
    out.push(CheckRecord::greater_than(
        "control/shifted/method_equivariance",
        json!({"space": "stiefel:5,2", "skeleton": "rkmk4"}),
        r,
        1e-9,
    ));
    let cayley_euler = named_skeleton("euler_forward")?.with_motion(motion_map("cayley")?);
    for space_name in ["so:3", "sphere:3"] {
        let space = entry(space_name)?.space;
        let r = order_zero_exactness(&cayley_euler, space.as_ref(), 20, opts.seed)?;
        out.push(CheckRecord::greater_than(
            &format!("control/cayley_euler/order_zero/{space_name}"),
            json!({"space": space_name, "note": "must exceed the order-zero threshold"}),
            r,
            1e-10,
        ));
    }
    Ok(out)
}
