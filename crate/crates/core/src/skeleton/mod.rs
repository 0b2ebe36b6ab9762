//! Stage-tree integrators.
//!
//! A [`Skeleton`] is a Lie group integrator with the isotropy map taken out:
//! a tree of stages whose edges carry transition functions, plus a motion map.
//! Given an [`IsotropyChoice`] `ν` (already scaled by the time step) and a
//! starting point `x0`, one step solves
//!
//! ```text
//! X_initial = x0
//! X_i = Ψ(τ_ij(F)) ⊳ X_j     for every edge (i, j)
//! F_i = ν(X_i)               for every used vertex i
//! x1 = X_final
//! ```
//!
//! Explicit skeletons are solved by a single sweep from the initial vertex.
//! Anything else (a stage depending on its own frozen field, or an auxiliary
//! block such as the one of symmetric Gauss) goes through fixed-point
//! iteration seeded with `F ≡ ν(x0)`.

mod catalog;
mod motion;

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matexp::Matrix;
use crate::spaces::HomogeneousSpace;

pub use catalog::{from_butcher, named_skeleton, SkeletonRegistry, EXPLICIT_SKELETONS, SKELETON_NAMES};
pub use motion::{motion_map, Cayley, Exponential, MotionMap, MOTION_NAMES};

/// Absolute tolerance on successive frozen-field iterates, relative to the
/// largest field norm once that exceeds one.
pub const FIXED_POINT_TOLERANCE: f64 = 1e-13;
pub const MAX_SWEEPS: usize = 200;
/// Distance to the manifold beyond which a stage is rejected.
pub const STAGE_DRIFT_TOLERANCE: f64 = 1e-6;

/// An isotropy choice `ν ∈ C∞(M, 𝔤)`, already scaled by the time step.
pub trait IsotropyChoice: Send + Sync {
    fn eval(&self, x: &Matrix) -> Result<Matrix>;
}

/// `ν ≡ ξ`.
#[derive(Clone, Debug)]
pub struct ConstantChoice(pub Matrix);

impl IsotropyChoice for ConstantChoice {
    fn eval(&self, _x: &Matrix) -> Result<Matrix> {
        Ok(self.0.clone())
    }
}

/// Isotropy choice backed by a closure.
pub struct FnChoice<F>(pub F);

impl<F> IsotropyChoice for FnChoice<F>
where
    F: Fn(&Matrix) -> Result<Matrix> + Send + Sync,
{
    fn eval(&self, x: &Matrix) -> Result<Matrix> {
        (self.0)(x)
    }
}

impl<T: IsotropyChoice + ?Sized> IsotropyChoice for Arc<T> {
    fn eval(&self, x: &Matrix) -> Result<Matrix> {
        (**self).eval(x)
    }
}

impl<T: IsotropyChoice + ?Sized> IsotropyChoice for &T {
    fn eval(&self, x: &Matrix) -> Result<Matrix> {
        (**self).eval(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

/// Read access to the frozen fields (and auxiliary variables) during a step.
pub struct Frozen<'a> {
    fields: &'a [Matrix],
    aux: &'a [Matrix],
}

impl<'a> Frozen<'a> {
    pub fn new(fields: &'a [Matrix], aux: &'a [Matrix]) -> Self {
        Frozen { fields, aux }
    }

    pub fn f(&self, v: VertexId) -> &Matrix {
        &self.fields[v.0]
    }

    pub fn aux(&self, k: usize) -> &Matrix {
        &self.aux[k]
    }
}

pub type Combine = Arc<dyn Fn(&Frozen) -> Matrix + Send + Sync>;

/// Transition function `τ_{target,source}` on one edge. Traversing the edge
/// backwards uses `−τ`.
#[derive(Clone)]
pub struct TransitionRule {
    pub target: VertexId,
    pub source: VertexId,
    field_deps: Vec<VertexId>,
    aux_deps: Vec<usize>,
    combine: Combine,
}

impl TransitionRule {
    pub fn field_deps(&self) -> &[VertexId] {
        &self.field_deps
    }

    pub fn evaluate(&self, frozen: &Frozen) -> Matrix {
        (self.combine)(frozen)
    }

    /// Same edge stored with the opposite orientation.
    pub fn reversed(&self) -> TransitionRule {
        let inner = self.combine.clone();
        TransitionRule {
            target: self.source,
            source: self.target,
            field_deps: self.field_deps.clone(),
            aux_deps: self.aux_deps.clone(),
            combine: Arc::new(move |f| -inner(f)),
        }
    }
}

pub type AuxUpdate = Arc<dyn Fn(&Frozen) -> Vec<Matrix> + Send + Sync>;

/// Implicit block of auxiliary variables solved together with the stages.
#[derive(Clone)]
pub struct AuxSystem {
    names: Vec<String>,
    field_deps: Vec<VertexId>,
    seed: AuxUpdate,
    update: AuxUpdate,
}

impl AuxSystem {
    /// `seed` produces the starting values from the fields alone; `update`
    /// maps (fields, current aux) to the next aux iterate.
    pub fn new(names: &[&str], field_deps: &[VertexId], seed: AuxUpdate, update: AuxUpdate) -> Self {
        AuxSystem {
            names: names.iter().map(|s| s.to_string()).collect(),
            field_deps: field_deps.to_vec(),
            seed,
            update,
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// Connected acyclic graph with marked initial and final vertices.
#[derive(Clone, Debug)]
pub struct StageTree {
    labels: Vec<String>,
    edges: Vec<(VertexId, VertexId)>,
    initial: VertexId,
    final_: VertexId,
}

impl StageTree {
    pub fn new(labels: Vec<String>, edges: Vec<(VertexId, VertexId)>, initial: VertexId, final_: VertexId) -> Result<Self> {
        let n = labels.len();
        let bad = |reason: String| Error::invalid("stage tree", reason);
        if edges.is_empty() {
            return Err(bad("at least one edge is required".into()));
        }
        if initial.0 >= n || final_.0 >= n {
            return Err(bad("initial and final must be vertices".into()));
        }
        if initial == final_ {
            return Err(bad("initial and final vertices coincide".into()));
        }
        for (i, label) in labels.iter().enumerate() {
            if labels[..i].contains(label) {
                return Err(bad(format!("duplicate vertex label '{label}'")));
            }
        }
        for &(a, b) in &edges {
            if a.0 >= n || b.0 >= n || a == b {
                return Err(bad(format!("edge ({}, {}) is not between two distinct vertices", a.0, b.0)));
            }
        }
        if edges.len() != n - 1 {
            return Err(bad(format!("{n} vertices need {} edges, got {}", n - 1, edges.len())));
        }
        let tree = StageTree {
            labels,
            edges,
            initial,
            final_,
        };
        let reached = tree.bfs_order(initial).len();
        if reached != n {
            return Err(bad(format!("graph is not connected ({reached} of {n} vertices reachable)")));
        }
        Ok(tree)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.labels[v.0]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn initial(&self) -> VertexId {
        self.initial
    }

    pub fn final_vertex(&self) -> VertexId {
        self.final_
    }

    pub fn find(&self, label: &str) -> Option<VertexId> {
        self.labels.iter().position(|l| l == label).map(VertexId)
    }

    fn bfs_order(&self, start: VertexId) -> Vec<VertexId> {
        let mut seen = vec![false; self.labels.len()];
        let mut order = vec![];
        let mut queue = VecDeque::from([start]);
        seen[start.0] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &(a, b) in &self.edges {
                let other = if a == v {
                    b
                } else if b == v {
                    a
                } else {
                    continue;
                };
                if !seen[other.0] {
                    seen[other.0] = true;
                    queue.push_back(other);
                }
            }
        }
        order
    }
}

#[derive(Clone, Debug)]
struct Plan {
    /// (rule index, traversed from source to target)
    order: Vec<(usize, bool)>,
    explicit: bool,
}

/// Stage tree, one transition rule per edge, and a motion map.
#[derive(Clone)]
pub struct Skeleton {
    name: String,
    tree: StageTree,
    rules: Vec<TransitionRule>,
    motion: Arc<dyn MotionMap>,
    aux: Option<AuxSystem>,
    used: Vec<bool>,
    plan: Plan,
}

impl fmt::Debug for Skeleton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Skeleton")
            .field("name", &self.name)
            .field("vertices", &self.tree.labels)
            .field("edges", &self.tree.edges.len())
            .field("motion", &self.motion.name())
            .field("used", &self.used_labels())
            .field("explicit", &self.plan.explicit)
            .finish()
    }
}

/// Result of one step with solver diagnostics.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub point: Matrix,
    pub sweeps: usize,
    pub residual: f64,
}

impl Skeleton {
    fn assemble(
        name: String,
        tree: StageTree,
        rules: Vec<TransitionRule>,
        motion: Arc<dyn MotionMap>,
        aux: Option<AuxSystem>,
    ) -> Result<Self> {
        if rules.len() != tree.edges.len() {
            return Err(Error::invalid("skeleton", "every edge needs exactly one rule"));
        }
        for &(a, b) in &tree.edges {
            let count = rules
                .iter()
                .filter(|r| (r.target == a && r.source == b) || (r.target == b && r.source == a))
                .count();
            if count != 1 {
                return Err(Error::invalid(
                    "skeleton",
                    format!("edge {}-{} has {count} rules", tree.label(a), tree.label(b)),
                ));
            }
        }
        let mut used = vec![false; tree.len()];
        for r in &rules {
            for d in &r.field_deps {
                used[d.0] = true;
            }
            if !r.aux_deps.is_empty() && aux.is_none() {
                return Err(Error::invalid("skeleton", "rule references auxiliary variables but none are defined"));
            }
        }
        if let Some(a) = &aux {
            for d in &a.field_deps {
                used[d.0] = true;
            }
        }
        let plan = make_plan(&tree, &rules, aux.is_some());
        Ok(Skeleton {
            name,
            tree,
            rules,
            motion,
            aux,
            used,
            plan,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn tree(&self) -> &StageTree {
        &self.tree
    }

    pub fn rules(&self) -> &[TransitionRule] {
        &self.rules
    }

    pub fn motion(&self) -> &Arc<dyn MotionMap> {
        &self.motion
    }

    pub fn auxiliary(&self) -> Option<&AuxSystem> {
        self.aux.as_ref()
    }

    pub fn is_explicit(&self) -> bool {
        self.plan.explicit
    }

    pub fn is_used(&self, v: VertexId) -> bool {
        self.used[v.0]
    }

    pub fn used_labels(&self) -> Vec<&str> {
        (0..self.tree.len())
            .filter(|&i| self.used[i])
            .map(|i| self.tree.label(VertexId(i)))
            .collect()
    }

    /// Same skeleton with a different motion map.
    pub fn with_motion(&self, motion: Arc<dyn MotionMap>) -> Skeleton {
        let mut s = self.clone();
        s.motion = motion;
        s
    }

    /// Same method with one edge stored in the opposite orientation.
    pub fn with_reversed_edge(&self, rule_index: usize) -> Result<Skeleton> {
        let mut rules = self.rules.clone();
        let r = rules
            .get(rule_index)
            .ok_or_else(|| Error::invalid("skeleton", format!("no rule {rule_index}")))?
            .reversed();
        rules[rule_index] = r;
        Skeleton::assemble(self.name.clone(), self.tree.clone(), rules, self.motion.clone(), self.aux.clone())
    }

    /// One step `x0 ↦ x1`.
    pub fn step(&self, space: &dyn HomogeneousSpace, nu: &dyn IsotropyChoice, x0: &Matrix) -> Result<Matrix> {
        self.step_with_report(space, nu, x0).map(|o| o.point)
    }

    /// `steps` consecutive steps; the result starts with `x0`.
    pub fn integrate(
        &self,
        space: &dyn HomogeneousSpace,
        nu: &dyn IsotropyChoice,
        x0: &Matrix,
        steps: usize,
    ) -> Result<Vec<Matrix>> {
        let mut out = Vec::with_capacity(steps + 1);
        out.push(x0.clone());
        for k in 0..steps {
            let next = self
                .step(space, nu, &out[k])
                .map_err(|e| Error::AtStep {
                    step: k + 1,
                    error: Box::new(e),
                })?;
            out.push(next);
        }
        Ok(out)
    }

    /// Final point after `steps` steps.
    pub fn advance(&self, space: &dyn HomogeneousSpace, nu: &dyn IsotropyChoice, x0: &Matrix, steps: usize) -> Result<Matrix> {
        let mut x = x0.clone();
        for k in 0..steps {
            x = self.step(space, nu, &x).map_err(|e| Error::AtStep {
                step: k + 1,
                error: Box::new(e),
            })?;
        }
        Ok(x)
    }

    pub fn step_with_report(&self, space: &dyn HomogeneousSpace, nu: &dyn IsotropyChoice, x0: &Matrix) -> Result<StepOutcome> {
        let n = self.tree.len();
        let f0 = nu.eval(x0)?;
        let mut fields: Vec<Matrix> = vec![f0; n];
        let mut aux: Vec<Matrix> = match &self.aux {
            Some(a) => (a.seed)(&Frozen::new(&fields, &[])),
            None => vec![],
        };
        let mut stages: Vec<Option<Matrix>> = vec![None; n];
        let mut residual = f64::INFINITY;
        for sweep in 1..=MAX_SWEEPS {
            stages[self.tree.initial.0] = Some(x0.clone());
            let mut delta: f64 = 0.0;
            let mut scale: f64 = 1.0;
            for &(ri, forward) in &self.plan.order {
                let rule = &self.rules[ri];
                let tau = rule.evaluate(&Frozen::new(&fields, &aux));
                let (from, to, tau) = if forward {
                    (rule.source, rule.target, tau)
                } else {
                    (rule.target, rule.source, -tau)
                };
                let g = self.motion.apply(&tau)?;
                let base = stages[from.0].as_ref().expect("plan visits sources first");
                let x = space.act(&g, base);
                let distance = space.distance_to_manifold(&x);
                if distance.is_nan() || distance > STAGE_DRIFT_TOLERANCE {
                    return Err(Error::LeftManifold {
                        vertex: self.tree.label(to).to_string(),
                        distance,
                    });
                }
                if self.used[to.0] {
                    let new = nu.eval(&x)?;
                    delta = delta.max((&new - &fields[to.0]).norm());
                    scale = scale.max(new.norm());
                    fields[to.0] = new;
                }
                stages[to.0] = Some(x);
            }
            if let Some(a) = &self.aux {
                let new = (a.update)(&Frozen::new(&fields, &aux));
                for (old, new) in aux.iter().zip(&new) {
                    delta = delta.max((new - old).norm());
                    scale = scale.max(new.norm());
                }
                aux = new;
            }
            residual = delta;
            if self.plan.explicit || delta <= FIXED_POINT_TOLERANCE * scale {
                let point = stages[self.tree.final_.0].take().expect("final stage computed");
                return Ok(StepOutcome {
                    point,
                    sweeps: sweep,
                    residual: if self.plan.explicit { 0.0 } else { delta },
                });
            }
        }
        Err(Error::NonConvergence {
            iterations: MAX_SWEEPS,
            residual,
        })
    }
}

/// Visit order: greedily take an edge leaving the visited set whose rule only
/// needs fields of visited vertices; fall back to breadth-first order (and
/// mark the skeleton implicit) when no such edge exists.
fn make_plan(tree: &StageTree, rules: &[TransitionRule], has_aux: bool) -> Plan {
    let n = tree.len();
    let mut visited = vec![false; n];
    visited[tree.initial.0] = true;
    let mut done = vec![false; rules.len()];
    let mut order = Vec::with_capacity(rules.len());
    let mut explicit = !has_aux;
    while order.len() < rules.len() {
        let frontier: Vec<usize> = (0..rules.len())
            .filter(|&i| !done[i] && (visited[rules[i].source.0] ^ visited[rules[i].target.0]))
            .collect();
        // Frontier edges have exactly one visited endpoint, so requiring all
        // dependencies to be visited excludes the vertex about to be reached.
        let ready = frontier
            .iter()
            .copied()
            .find(|&i| rules[i].aux_deps.is_empty() && rules[i].field_deps.iter().all(|d| visited[d.0]));
        let pick = match ready {
            Some(i) => i,
            None => {
                explicit = false;
                frontier[0]
            }
        };
        let r = &rules[pick];
        let forward = visited[r.source.0];
        let newly = if forward { r.target } else { r.source };
        visited[newly.0] = true;
        done[pick] = true;
        order.push((pick, forward));
    }
    Plan { order, explicit }
}

/// Incremental construction of a skeleton.
pub struct SkeletonBuilder {
    name: String,
    labels: Vec<String>,
    rules: Vec<TransitionRule>,
    initial: Option<VertexId>,
    final_: Option<VertexId>,
    motion: Arc<dyn MotionMap>,
    aux: Option<AuxSystem>,
}

impl SkeletonBuilder {
    pub fn new(name: &str) -> Self {
        SkeletonBuilder {
            name: name.to_string(),
            labels: vec![],
            rules: vec![],
            initial: None,
            final_: None,
            motion: Arc::new(Exponential),
            aux: None,
        }
    }

    pub fn vertex(&mut self, label: &str) -> VertexId {
        self.labels.push(label.to_string());
        VertexId(self.labels.len() - 1)
    }

    pub fn initial(&mut self, label: &str) -> VertexId {
        let v = self.vertex(label);
        self.initial = Some(v);
        v
    }

    pub fn final_vertex(&mut self, label: &str) -> VertexId {
        let v = self.vertex(label);
        self.final_ = Some(v);
        v
    }

    /// Adds edge `(target, source)` with `τ_{target,source}` computed by
    /// `combine`, which may read the fields listed in `deps`.
    pub fn rule<F>(&mut self, target: VertexId, source: VertexId, deps: &[VertexId], combine: F) -> &mut Self
    where
        F: Fn(&Frozen) -> Matrix + Send + Sync + 'static,
    {
        self.rules.push(TransitionRule {
            target,
            source,
            field_deps: deps.to_vec(),
            aux_deps: vec![],
            combine: Arc::new(combine),
        });
        self
    }

    /// Like [`rule`](Self::rule) but reading auxiliary variables.
    pub fn aux_rule<F>(&mut self, target: VertexId, source: VertexId, aux_deps: &[usize], combine: F) -> &mut Self
    where
        F: Fn(&Frozen) -> Matrix + Send + Sync + 'static,
    {
        self.rules.push(TransitionRule {
            target,
            source,
            field_deps: vec![],
            aux_deps: aux_deps.to_vec(),
            combine: Arc::new(combine),
        });
        self
    }

    pub fn auxiliary(&mut self, aux: AuxSystem) -> &mut Self {
        self.aux = Some(aux);
        self
    }

    pub fn motion(&mut self, motion: Arc<dyn MotionMap>) -> &mut Self {
        self.motion = motion;
        self
    }

    pub fn build(&self) -> Result<Skeleton> {
        let initial = self.initial.ok_or_else(|| Error::invalid("skeleton", "no initial vertex"))?;
        let final_ = self.final_.ok_or_else(|| Error::invalid("skeleton", "no final vertex"))?;
        let edges = self.rules.iter().map(|r| (r.target, r.source)).collect();
        let tree = StageTree::new(self.labels.clone(), edges, initial, final_)?;
        Skeleton::assemble(self.name.clone(), tree, self.rules.clone(), self.motion.clone(), self.aux.clone())
    }
}
