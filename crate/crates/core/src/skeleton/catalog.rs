use std::collections::BTreeMap;
use std::sync::Arc;

use super::{AuxSystem, Frozen, Skeleton, SkeletonBuilder, VertexId};
use crate::error::{Error, Result};
use crate::matexp::{bracket, Matrix};

pub const SKELETON_NAMES: &[&str] = &[
    "euler_forward",
    "euler_backward",
    "trapezoidal",
    "implicit_midpoint",
    "rkmk3",
    "rkmk4",
    "cg3",
    "cf4",
    "gauss4",
];

/// Named skeletons whose stage system is solved in a single sweep.
pub const EXPLICIT_SKELETONS: &[&str] = &["euler_forward", "rkmk3", "rkmk4", "cg3", "cf4"];

fn combo(fz: &Frozen, terms: &[(VertexId, f64)]) -> Matrix {
    let mut acc = fz.f(terms[0].0).scale(terms[0].1);
    for &(v, c) in &terms[1..] {
        acc += &fz.f(v).scale(c);
    }
    acc
}

fn linear(b: &mut SkeletonBuilder, target: VertexId, source: VertexId, terms: Vec<(VertexId, f64)>) {
    let deps: Vec<VertexId> = terms.iter().map(|t| t.0).collect();
    b.rule(target, source, &deps, move |fz| combo(fz, &terms));
}

fn euler_forward() -> Result<Skeleton> {
    let mut b = SkeletonBuilder::new("euler_forward");
    let init = b.initial("initial");
    let fin = b.final_vertex("final");
    linear(&mut b, fin, init, vec![(init, 1.0)]);
    b.build()
}

fn euler_backward() -> Result<Skeleton> {
    let mut b = SkeletonBuilder::new("euler_backward");
    let init = b.initial("initial");
    let fin = b.final_vertex("final");
    linear(&mut b, fin, init, vec![(fin, 1.0)]);
    b.build()
}

fn trapezoidal() -> Result<Skeleton> {
    let mut b = SkeletonBuilder::new("trapezoidal");
    let init = b.initial("initial");
    let fin = b.final_vertex("final");
    linear(&mut b, fin, init, vec![(init, 0.5), (fin, 0.5)]);
    b.build()
}

fn implicit_midpoint() -> Result<Skeleton> {
    let mut b = SkeletonBuilder::new("implicit_midpoint");
    let init = b.initial("initial");
    let star = b.vertex("star");
    let fin = b.final_vertex("final");
    linear(&mut b, star, init, vec![(star, 0.5)]);
    linear(&mut b, fin, star, vec![(star, 0.5)]);
    b.build()
}

fn rkmk3() -> Result<Skeleton> {
    let mut b = SkeletonBuilder::new("rkmk3");
    let init = b.initial("initial");
    let s1 = b.vertex("1");
    let s2 = b.vertex("2");
    let fin = b.final_vertex("final");
    linear(&mut b, s1, init, vec![(init, 0.5)]);
    linear(&mut b, s2, init, vec![(init, -1.0), (s1, 2.0)]);
    b.rule(fin, init, &[init, s1, s2], move |fz| {
        let avg = combo(fz, &[(init, 1.0 / 6.0), (s1, 4.0 / 6.0), (s2, 1.0 / 6.0)]);
        let late = combo(fz, &[(s1, 4.0), (s2, 1.0)]);
        avg + bracket(&late, fz.f(init)).scale(1.0 / 36.0)
    });
    b.build()
}

fn rkmk4() -> Result<Skeleton> {
    let mut b = SkeletonBuilder::new("rkmk4");
    let init = b.initial("initial");
    let s1 = b.vertex("1");
    let s2 = b.vertex("2");
    let s3 = b.vertex("3");
    let fin = b.final_vertex("final");
    linear(&mut b, s1, init, vec![(init, 0.5)]);
    b.rule(s2, init, &[init, s1], move |fz| {
        fz.f(s1).scale(0.5) - bracket(fz.f(init), fz.f(s1)).scale(0.125)
    });
    linear(&mut b, s3, init, vec![(s2, 1.0)]);
    b.rule(fin, init, &[init, s1, s2, s3], move |fz| {
        let avg = combo(fz, &[(init, 1.0 / 6.0), (s1, 2.0 / 6.0), (s2, 2.0 / 6.0), (s3, 1.0 / 6.0)]);
        avg - bracket(fz.f(init), fz.f(s3)).scale(1.0 / 12.0)
    });
    b.build()
}

// Crouch–Grossman, third order. The intermediate vertices only carry partial
// products of exponentials; their fields are never read.
fn cg3() -> Result<Skeleton> {
    let mut b = SkeletonBuilder::new("cg3");
    let init = b.initial("initial");
    let s1 = b.vertex("1");
    let s2p = b.vertex("2'");
    let s2 = b.vertex("2");
    let s3pp = b.vertex("3''");
    let s3p = b.vertex("3'");
    let fin = b.final_vertex("final");
    linear(&mut b, s1, init, vec![(init, 3.0 / 4.0)]);
    linear(&mut b, s2p, init, vec![(init, 119.0 / 216.0)]);
    linear(&mut b, s2, s2p, vec![(s1, 17.0 / 108.0)]);
    linear(&mut b, s3pp, init, vec![(init, 13.0 / 51.0)]);
    linear(&mut b, s3p, s3pp, vec![(s1, -2.0 / 3.0)]);
    linear(&mut b, fin, s3p, vec![(s2, 24.0 / 17.0)]);
    b.build()
}

// Commutator-free, fourth order: two exponentials in the final update.
fn cf4() -> Result<Skeleton> {
    let mut b = SkeletonBuilder::new("cf4");
    let init = b.initial("initial");
    let s1 = b.vertex("1");
    let s2 = b.vertex("2");
    let s3 = b.vertex("3");
    let s4 = b.vertex("4'");
    let fin = b.final_vertex("final");
    linear(&mut b, s1, init, vec![(init, 0.5)]);
    linear(&mut b, s2, init, vec![(s1, 0.5)]);
    linear(&mut b, s3, s1, vec![(init, -0.5), (s2, 1.0)]);
    let twelfth = 1.0 / 12.0;
    linear(
        &mut b,
        s4,
        init,
        vec![(init, 3.0 * twelfth), (s1, 2.0 * twelfth), (s2, 2.0 * twelfth), (s3, -twelfth)],
    );
    linear(
        &mut b,
        fin,
        s4,
        vec![(init, -twelfth), (s1, 2.0 * twelfth), (s2, 2.0 * twelfth), (s3, 3.0 * twelfth)],
    );
    b.build()
}

// Symmetric two-stage Gauss method. The edge rules read the corrected fields
// held in the auxiliary block (index 0 for "+", 1 for "-"). The correction is
// the first term of dexp⁻¹ at a stage offset of ±√3/6 F̄, hence √3/12.
fn gauss4() -> Result<Skeleton> {
    let r3 = 3f64.sqrt();
    let mut b = SkeletonBuilder::new("gauss4");
    let init = b.initial("initial");
    let mid = b.vertex("mid");
    let fin = b.final_vertex("final");
    let plus = b.vertex("+");
    let minus = b.vertex("-");
    let half_sum = |fz: &Frozen| (fz.aux(0) + fz.aux(1)).scale(0.25);
    b.aux_rule(mid, init, &[0, 1], half_sum);
    b.aux_rule(fin, mid, &[0, 1], half_sum);
    b.aux_rule(mid, minus, &[0], move |fz| fz.aux(0).scale(-r3 / 6.0));
    b.aux_rule(mid, plus, &[1], move |fz| fz.aux(1).scale(r3 / 6.0));
    let seed = Arc::new(move |fz: &Frozen| vec![fz.f(plus).clone(), fz.f(minus).clone()]);
    let update = Arc::new(move |fz: &Frozen| {
        let (fp, fm) = (fz.f(plus), fz.f(minus));
        let (bp, bm) = (fz.aux(0), fz.aux(1));
        vec![
            fp + bracket(bm, fp).scale(r3 / 12.0),
            fm - bracket(bp, fm).scale(r3 / 12.0),
        ]
    });
    b.auxiliary(AuxSystem::new(&["+", "-"], &[plus, minus], seed, update));
    b.build()
}

/// Catalog lookup; every entry uses the exponential motion map.
pub fn named_skeleton(name: &str) -> Result<Skeleton> {
    match name {
        "euler_forward" => euler_forward(),
        "euler_backward" => euler_backward(),
        "trapezoidal" => trapezoidal(),
        "implicit_midpoint" => implicit_midpoint(),
        "rkmk3" => rkmk3(),
        "rkmk4" => rkmk4(),
        "cg3" => cg3(),
        "cf4" => cf4(),
        "gauss4" => gauss4(),
        _ => Err(Error::unknown("skeleton", name, SKELETON_NAMES)),
    }
}

/// Star-shaped skeleton of a Runge–Kutta tableau: vertex `i` is reached from
/// the initial vertex by `Σ_j a_ij F_j` and the final one by `Σ_j b_j F_j`.
pub fn from_butcher(a: &[Vec<f64>], b: &[f64]) -> Result<Skeleton> {
    let s = b.len();
    if s == 0 {
        return Err(Error::invalid("butcher tableau", "at least one stage is required"));
    }
    if a.len() != s || a.iter().any(|row| row.len() != s) {
        return Err(Error::invalid("butcher tableau", format!("a must be {s}x{s} to match b")));
    }
    if a.iter().flatten().chain(b).any(|c| !c.is_finite()) {
        return Err(Error::invalid("butcher tableau", "coefficients must be finite"));
    }
    let mut builder = SkeletonBuilder::new("butcher");
    let init = builder.initial("initial");
    let stages: Vec<VertexId> = (1..=s).map(|i| builder.vertex(&i.to_string())).collect();
    let fin = builder.final_vertex("final");
    let mut star_rule = |target: VertexId, coeffs: &[f64]| {
        let terms: Vec<(VertexId, f64)> = coeffs
            .iter()
            .zip(&stages)
            .filter(|(c, _)| **c != 0.0)
            .map(|(c, v)| (*v, *c))
            .collect();
        if terms.is_empty() {
            builder.rule(target, init, &[], |fz| fz.f(VertexId(0)).scale(0.0));
        } else {
            linear(&mut builder, target, init, terms);
        }
    };
    for (row, &v) in a.iter().zip(&stages) {
        star_rule(v, row);
    }
    star_rule(fin, b);
    builder.build()
}

/// Name-addressable collection of skeletons, seeded with the catalog and
/// open to user registrations.
#[derive(Clone, Debug)]
pub struct SkeletonRegistry {
    entries: BTreeMap<String, Skeleton>,
}

impl SkeletonRegistry {
    pub fn builtin() -> Self {
        let entries = SKELETON_NAMES
            .iter()
            .map(|n| (n.to_string(), named_skeleton(n).expect("catalog skeletons are well formed")))
            .collect();
        SkeletonRegistry { entries }
    }

    /// Adds or replaces an entry under `name`.
    pub fn register(&mut self, name: &str, skeleton: Skeleton) {
        self.entries.insert(name.to_string(), skeleton);
    }

    pub fn get(&self, name: &str) -> Result<Skeleton> {
        self.entries.get(name).cloned().ok_or_else(|| {
            let names: Vec<&str> = self.entries.keys().map(String::as_str).collect();
            Error::unknown("skeleton", name, &names)
        })
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }
}

impl Default for SkeletonRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}
