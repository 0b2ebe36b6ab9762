//! Numerical checks of the defining properties of connections and methods.
//!
//! Every check is deterministic given its seed and returns the worst residual
//! over the samples; [`CheckRecord`] packages a residual with its threshold
//! for machine-readable reports.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matexp::{columns_of, expm, flatten, least_squares, seeded_rng, Matrix};
use crate::skeleton::{named_skeleton, ConstantChoice, IsotropyChoice, Skeleton};
use crate::spaces::{
    lift, space_of, Connection, ConnectionChoice, HomogeneousSpace, LieGroupSpace, MaurerCartan, Side,
    TransportedField, VectorField,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Errors already at rounding level, so no slope can be fitted.
    ExactToPrecision,
}

/// One check outcome: `value` is compared against `threshold` in the way
/// recorded under `params.compare`.
#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub params: Value,
    pub value: f64,
    pub threshold: f64,
    pub verdict: Verdict,
}

fn with_compare(mut params: Value, compare: &str) -> Value {
    if let Value::Object(map) = &mut params {
        map.insert("compare".into(), Value::String(compare.into()));
        params
    } else {
        json!({ "compare": compare, "detail": params })
    }
}

impl CheckRecord {
    /// Passes when `value ≤ threshold` (NaN fails).
    pub fn at_most(name: &str, params: Value, value: f64, threshold: f64) -> Self {
        CheckRecord {
            name: name.into(),
            params: with_compare(params, "<="),
            value,
            threshold,
            verdict: if value <= threshold { Verdict::Pass } else { Verdict::Fail },
        }
    }

    /// Passes when `value > threshold`.
    pub fn greater_than(name: &str, params: Value, value: f64, threshold: f64) -> Self {
        CheckRecord {
            name: name.into(),
            params: with_compare(params, ">"),
            value,
            threshold,
            verdict: if value > threshold { Verdict::Pass } else { Verdict::Fail },
        }
    }

    /// Passes when `|value − target| ≤ tolerance`; `threshold` holds the
    /// tolerance and `params.target` the target.
    pub fn within(name: &str, params: Value, value: f64, target: f64, tolerance: f64) -> Self {
        let mut params = with_compare(params, "|value-target|<=");
        if let Value::Object(map) = &mut params {
            map.insert("target".into(), json!(target));
        }
        CheckRecord {
            name: name.into(),
            params,
            value,
            threshold: tolerance,
            verdict: if (value - target).abs() <= tolerance {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
        }
    }

    /// Order-study record: slope within `tolerance` of `target`, or
    /// `ExactToPrecision` when the errors never left rounding level (the
    /// slope is then undefined and counts as a pass).
    pub fn order(name: &str, params: Value, report: &OrderReport, target: f64, tolerance: f64) -> Self {
        let mut params = params;
        if let Value::Object(map) = &mut params {
            map.insert("step_sizes".into(), json!(report.step_sizes));
            map.insert("errors".into(), json!(report.errors));
        }
        let mut rec = CheckRecord::within(name, params, report.observed_order, target, tolerance);
        if report.exact {
            rec.verdict = Verdict::ExactToPrecision;
        }
        rec
    }

    pub fn passed(&self) -> bool {
        if self.verdict == Verdict::ExactToPrecision {
            return true;
        }
        self.verdict == Verdict::Pass
    }
}

/// Worst `‖ω(x, v) ⊳ x − v‖` over random points and tangent vectors.
pub fn check_consistency(conn: &dyn Connection, samples: usize, seed: u64) -> Result<f64> {
    let space = conn.space();
    let mut rng = seeded_rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x = space.sample_point(&mut rng);
        let v = space.sample_tangent(&x, &mut rng);
        let w = conn.eval(&x, &v)?;
        worst = worst.max(space.inf_act(&w, &x).distance(&v)?);
    }
    Ok(worst)
}

/// Worst `‖ω(g ⊳ x, Tg·v) − g ω(x, v) g⁻¹‖`.
pub fn check_equivariance(conn: &dyn Connection, samples: usize, seed: u64) -> Result<f64> {
    let space = conn.space();
    let mut rng = seeded_rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x = space.sample_point(&mut rng);
        let v = space.sample_tangent(&x, &mut rng);
        let g = space.sample_group(&mut rng);
        let lhs = conn.eval(&space.act(&g, &x), &space.push_tangent(&g, &x, &v))?;
        let rhs = &(&g * &conn.eval(&x, &v)?) * &g.try_inverse()?;
        worst = worst.max(lhs.distance(&rhs)?);
    }
    Ok(worst)
}

/// Worst `‖ω(x, a·v + w) − a·ω(x, v) − ω(x, w)‖`.
pub fn check_linearity(conn: &dyn Connection, samples: usize, seed: u64) -> Result<f64> {
    let space = conn.space();
    let mut rng = seeded_rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x = space.sample_point(&mut rng);
        let v = space.sample_tangent(&x, &mut rng);
        let w = space.sample_tangent(&x, &mut rng);
        let a: f64 = rng.random_range(-2.0..2.0);
        let lhs = conn.eval(&x, &(&v.scale(a) + &w))?;
        let rhs = conn.eval(&x, &v)?.scale(a) + conn.eval(&x, &w)?;
        worst = worst.max(lhs.distance(&rhs)?);
    }
    Ok(worst)
}

/// Worst `‖M(g·f)(g ⊳ x₀) − g ⊳ M(f)(x₀)‖` for the method `M` made of the
/// skeleton and `ν = h·ω(·, f(·))`, with `g·f` the transported field.
pub fn check_method_equivariance(
    skel: &Skeleton,
    conn: Arc<dyn Connection>,
    field: Arc<dyn VectorField>,
    step: f64,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let space = space_of(&conn);
    let mut rng = seeded_rng(seed);
    let nu = ConnectionChoice::new(conn.clone(), field.clone(), step);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x0 = space.sample_point(&mut rng);
        let g = space.sample_group(&mut rng);
        let moved = TransportedField::new(space.clone(), field.clone(), g.clone())?;
        let nu_g = ConnectionChoice::new(conn.clone(), Arc::new(moved), step);
        let lhs = skel.step(space.as_ref(), &nu_g, &space.act(&g, &x0))?;
        let rhs = space.act(&g, &skel.step(space.as_ref(), &nu, &x0)?);
        worst = worst.max(lhs.distance(&rhs)?);
    }
    Ok(worst)
}

/// Worst `‖step(ν ≡ ξ, x₀) − exp(ξ) ⊳ x₀‖` over random `ξ` with `‖ξ‖ ≤ 1`.
pub fn order_zero_exactness(skel: &Skeleton, space: &dyn HomogeneousSpace, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = seeded_rng(seed);
    let alg = space.algebra();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x0 = space.sample_point(&mut rng);
        let norm: f64 = rng.random_range(0.0..=1.0);
        let xi = alg.sample(norm, &mut rng);
        let got = skel.step(space, &ConstantChoice(xi.clone()), &x0)?;
        let exact = space.act(&expm(&xi)?, &x0);
        worst = worst.max(got.distance(&exact)?);
    }
    Ok(worst)
}

/// Parts of the principal-form check; see [`check_principal_form`].
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct PrincipalFormResiduals {
    pub values_in_isotropy: f64,
    pub reproduces_isotropy: f64,
    pub isotropy_equivariant: f64,
    pub left_invariant: f64,
}

impl PrincipalFormResiduals {
    pub fn max(&self) -> f64 {
        self.values_in_isotropy
            .max(self.reproduces_isotropy)
            .max(self.isotropy_equivariant)
            .max(self.left_invariant)
    }
}

/// `θ_g(X) = g⁻¹X − g⁻¹ ω([g], [X]) g` on the group, where `[g] = g ⊳ origin`
/// and `[X] = (X g⁻¹) ⊳ [g]`.
pub fn principal_form(conn: &dyn Connection, g: &Matrix, x: &Matrix) -> Result<Matrix> {
    let space = conn.space();
    let g_inv = g.try_inverse()?;
    let point = space.act(g, &space.origin());
    let tangent = space.inf_act(&(x * &g_inv), &point);
    Ok(&g_inv * x - &(&g_inv * &conn.eval(&point, &tangent)?) * g)
}

/// Checks that `θ` takes values in the isotropy algebra, returns `ξ` on
/// `g·ξ` for isotropy `ξ`, satisfies `θ_{gh}(Xh) = h⁻¹ θ_g(X) h` for `h` in
/// the isotropy group, and is invariant under left translation.
pub fn check_principal_form(conn: &dyn Connection, samples: usize, seed: u64) -> Result<PrincipalFormResiduals> {
    let space = conn.space();
    let iso = space.isotropy_basis();
    let iso_cols = columns_of(&iso);
    let dist_to_iso = |m: &Matrix| -> f64 {
        if iso.is_empty() {
            m.norm()
        } else {
            least_squares(&iso_cols, &Matrix::column(&flatten(m))).1
        }
    };
    let random_iso = |rng: &mut rand_chacha::ChaCha8Rng| -> Matrix {
        let mut m = space.algebra().basis()[0].scale(0.0);
        for b in &iso {
            m += &b.scale(rng.random_range(-1.0..1.0));
        }
        m
    };
    let mut rng = seeded_rng(seed);
    let mut r = PrincipalFormResiduals::default();
    let alg = space.algebra();
    for _ in 0..samples {
        let g = space.sample_group(&mut rng);
        let x = &alg.sample(1.0, &mut rng) * &g;
        let theta = principal_form(conn, &g, &x)?;
        r.values_in_isotropy = r.values_in_isotropy.max(dist_to_iso(&theta));

        let xi = random_iso(&mut rng);
        let vertical = principal_form(conn, &g, &(&g * &xi))?;
        r.reproduces_isotropy = r.reproduces_isotropy.max(vertical.distance(&xi)?);

        let h = expm(&random_iso(&mut rng))?;
        let h_inv = h.try_inverse()?;
        let moved = principal_form(conn, &(&g * &h), &(&x * &h))?;
        let expected = &(&h_inv * &theta) * &h;
        r.isotropy_equivariant = r.isotropy_equivariant.max(moved.distance(&expected)?);

        let k = space.sample_group(&mut rng);
        let shifted = principal_form(conn, &(&k * &g), &(&k * &x))?;
        r.left_invariant = r.left_invariant.max(shifted.distance(&theta)?);
    }
    Ok(r)
}

/// One step on the group with the Maurer–Cartan form applied to the lifted
/// field, projected to the space, against one step on the space.
pub fn check_descent(
    skel: &Skeleton,
    conn: Arc<dyn Connection>,
    field: Arc<dyn VectorField>,
    x0: &Matrix,
    step: f64,
) -> Result<f64> {
    let space = space_of(&conn);
    let group_space = LieGroupSpace::new(space.group().clone(), Side::Left)?;
    let mc: Arc<dyn Connection> = Arc::new(MaurerCartan::new(group_space.clone()));
    let lifted = Arc::new(lift(conn.clone(), field.clone()));
    let g0 = space.lift_point(x0)?;
    let on_group = ConnectionChoice::new(mc, lifted.clone(), step);
    let g1 = skel.step(&group_space, &on_group, &g0)?;
    let via_group = lifted.project(&g1);
    let direct = skel.step(space.as_ref(), &ConnectionChoice::new(conn, field, step), x0)?;
    via_group.distance(&direct)
}

/// Convergence study outcome.
#[derive(Clone, Debug, Serialize)]
pub struct OrderReport {
    pub step_sizes: Vec<f64>,
    pub errors: Vec<f64>,
    pub observed_order: f64,
    pub exact: bool,
}

impl OrderReport {
    /// Slopes between consecutive step sizes.
    pub fn local_slopes(&self) -> Vec<f64> {
        self.step_sizes
            .windows(2)
            .zip(self.errors.windows(2))
            .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
            .collect()
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn steps_for(final_time: f64, h: f64) -> Result<usize> {
    let n = final_time / h;
    let rounded = n.round();
    if rounded < 1.0 || (n - rounded).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::invalid(
            "step list",
            format!("final time {final_time} is not a whole number of steps of size {h}"),
        ));
    }
    Ok(rounded as usize)
}

/// Isotropy choice as a function of the step size.
pub type ChoiceOfStep<'a> = dyn Fn(f64) -> Box<dyn IsotropyChoice> + 'a;

/// Errors at `final_time` against `reference` for each step size, and the
/// fitted order.
pub fn observed_order(
    skel: &Skeleton,
    space: &dyn HomogeneousSpace,
    nu_of_h: &ChoiceOfStep,
    x0: &Matrix,
    final_time: f64,
    h_list: &[f64],
    reference: &Matrix,
) -> Result<OrderReport> {
    if h_list.len() < 4 {
        return Err(Error::invalid("step list", "at least four step sizes are needed"));
    }
    if h_list.windows(2).any(|w| w[1] >= w[0]) || h_list.iter().any(|&h| h <= 0.0) {
        return Err(Error::invalid("step list", "step sizes must be positive and strictly decreasing"));
    }
    let mut errors = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let n = steps_for(final_time, h)?;
        let nu = nu_of_h(h);
        let x = skel.advance(space, nu.as_ref(), x0, n)?;
        errors.push(x.distance(reference)?);
    }
    let floor = 100.0 * f64::EPSILON * reference.norm().max(1.0);
    if errors[0] < floor {
        return Ok(OrderReport {
            step_sizes: h_list.to_vec(),
            errors,
            observed_order: f64::NAN,
            exact: true,
        });
    }
    let clipped: Vec<f64> = errors.iter().map(|e| e.max(f64::MIN_POSITIVE)).collect();
    Ok(OrderReport {
        observed_order: log_log_slope(h_list, &clipped),
        step_sizes: h_list.to_vec(),
        errors,
        exact: false,
    })
}

/// Reference solution from the commutator-free fourth-order method at step
/// `h`.
pub fn refined_reference(
    space: &dyn HomogeneousSpace,
    nu_of_h: &ChoiceOfStep,
    x0: &Matrix,
    final_time: f64,
    h: f64,
) -> Result<Matrix> {
    let skel = named_skeleton("cf4")?;
    let n = steps_for(final_time, h)?;
    skel.advance(space, nu_of_h(h).as_ref(), x0, n)
}

/// Finite-difference errors `‖(exp(tξ) ⊳ x − x)/t − ξ ⊳ x‖` at `t = 1e-4` and
/// `t = 1e-5` (worst over samples). First-order agreement shows up as a
/// ratio near 10.
pub fn check_inf_act_fd(space: &dyn HomogeneousSpace, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let mut rng = seeded_rng(seed);
    let alg = space.algebra();
    let (mut e4, mut e5): (f64, f64) = (0.0, 0.0);
    for _ in 0..samples {
        let x = space.sample_point(&mut rng);
        let xi = alg.sample(1.0, &mut rng);
        let exact = space.inf_act(&xi, &x);
        for (t, slot) in [(1e-4, &mut e4), (1e-5, &mut e5)] {
            let fd = (space.act(&expm(&xi.scale(t))?, &x) - &x).scale(1.0 / t);
            *slot = slot.max(fd.distance(&exact)?);
        }
    }
    Ok((e4, e5))
}

/// Extreme invariant residual along a trajectory: the maximum, or for spaces
/// whose residual must stay positive (SPD), the minimum.
pub fn invariant_extreme(space: &dyn HomogeneousSpace, trajectory: &[Matrix]) -> f64 {
    let values = trajectory.iter().map(|x| space.invariant_residual(x));
    if space.invariant_name() == "min_eigenvalue" {
        values.fold(f64::INFINITY, f64::min)
    } else {
        values.fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{resolve_space, test_field, FieldKind, ShiftedConnection, Stiefel, DroppedTermStiefel};

    #[test]
    fn slope_of_power_law() {
        let h = [0.1, 0.05, 0.025, 0.0125];
        let e: Vec<f64> = h.iter().map(|x: &f64| 3.0 * x.powi(4)).collect();
        assert!((log_log_slope(&h, &e) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_connection_checks() {
        let conn = resolve_space("sphere:3").unwrap().connection().unwrap();
        assert!(check_consistency(conn.as_ref(), 50, 1).unwrap() < 1e-12);
        assert!(check_equivariance(conn.as_ref(), 50, 2).unwrap() < 1e-10);
        assert!(check_linearity(conn.as_ref(), 50, 3).unwrap() < 1e-12);
        assert!(check_principal_form(conn.as_ref(), 20, 4).unwrap().max() < 1e-10);
    }

    #[test]
    fn affine_connection_is_exactly_consistent() {
        let conn = resolve_space("affine:3").unwrap().connection().unwrap();
        assert!(check_consistency(conn.as_ref(), 50, 1).unwrap() < 1e-14);
    }

    #[test]
    fn controls_fail() {
        let s = Stiefel::new(5, 2).unwrap();
        assert!(check_consistency(&DroppedTermStiefel::new(s.clone()), 50, 1).unwrap() > 1e-3);
        let good = resolve_space("stiefel:5,2").unwrap().connection().unwrap();
        let shifted = ShiftedConnection::by_isotropy(good);
        assert!(check_equivariance(&shifted, 50, 1).unwrap() > 1e-3);
    }

    #[test]
    fn cayley_euler_is_not_order_zero() {
        let space = Stiefel::sphere(3).unwrap();
        let euler = named_skeleton("euler_forward").unwrap();
        assert!(order_zero_exactness(&euler, &space, 10, 1).unwrap() < 1e-12);
        let cay = euler.with_motion(crate::skeleton::motion_map("cayley").unwrap());
        assert!(order_zero_exactness(&cay, &space, 10, 1).unwrap() > 1e-6);
    }

    #[test]
    fn zero_field_descends_trivially() {
        let entry = resolve_space("sphere:3").unwrap();
        let conn = entry.connection().unwrap();
        let f = test_field(&FieldKind::Zero, entry.space.clone(), 0).unwrap();
        let skel = named_skeleton("cf4").unwrap();
        let x0 = entry.space.origin();
        assert_eq!(check_descent(&skel, conn, f, &x0, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn fd_first_order() {
        let space = Stiefel::new(4, 2).unwrap();
        let (e4, e5) = check_inf_act_fd(&space, 5, 1).unwrap();
        assert!(e4 < 1e-3 && e5 < 1e-4);
        assert!((e4 / e5 - 10.0).abs() < 1.0);
    }
}
