use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use homspace::acceptance::{run_all, run_criterion, AcceptanceOptions, CriterionOutcome, CRITERIA};
use homspace::algebrachk::{analyze, BasisFile};
use homspace::matexp::expm;
use homspace::skeleton::{motion_map, named_skeleton, ConstantChoice, IsotropyChoice, Skeleton, MOTION_NAMES, SKELETON_NAMES};
use homspace::spaces::{
    lax_choice, test_field, toda_generator, ConnectionChoice, FieldKind, SpaceEntry, SpaceRegistry, FIELD_NAMES,
};
use homspace::verify::{observed_order, refined_reference, OrderReport};
use homspace::Matrix;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::Failure;

/// Resolved experiment: the space, the skeleton with its motion, and a
/// factory for the isotropy choice at a given step size.
struct Experiment {
    entry: SpaceEntry,
    skeleton: Skeleton,
    kind: FieldKind,
    seed: u64,
}

impl Experiment {
    fn new(cfg: &ExperimentConfig, seed: u64) -> anyhow::Result<Self> {
        let entry = SpaceRegistry::builtin().resolve(&cfg.space).context("config: space")?;
        let skeleton = named_skeleton(&cfg.method)
            .context("config: method")?
            .with_motion(motion_map(&cfg.motion).context("config: motion")?);
        let kind = FieldKind::parse(&cfg.field, cfg.coefficients.as_deref()).context("config: field")?;
        let exp = Experiment { entry, skeleton, kind, seed };
        exp.choice(cfg.step).context("config: field")?;
        Ok(exp)
    }

    /// Connection-driven when the space has a connection; otherwise the Lax
    /// form for the Toda field or the constant generator itself.
    fn choice(&self, h: f64) -> anyhow::Result<Box<dyn IsotropyChoice>> {
        let space = self.entry.space.clone();
        if let Some(conn) = &self.entry.connection {
            let field = test_field(&self.kind, space, self.seed)?;
            return Ok(Box::new(ConnectionChoice::new(conn.clone(), field, h)));
        }
        if self.kind == FieldKind::Toda {
            test_field(&self.kind, space, self.seed)?;
            return Ok(Box::new(lax_choice(toda_generator, h)));
        }
        match self.kind.constant_generator(space.as_ref(), self.seed)? {
            Some(xi) => Ok(Box::new(ConstantChoice(xi.scale(h)))),
            None => bail!(
                "{} has no connection; use field 'toda' or a constant field ({})",
                space.name(),
                FIELD_NAMES.join(", ")
            ),
        }
    }

    /// Closed-form endpoint for constant generators.
    fn exact(&self, x0: &Matrix, t: f64) -> anyhow::Result<Option<Matrix>> {
        let space = self.entry.space.as_ref();
        Ok(match self.kind.constant_generator(space, self.seed)? {
            Some(xi) => Some(space.act(&expm(&xi.scale(t))?, x0)),
            None => None,
        })
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn run(cfg: &ExperimentConfig, seed: u64, base: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let exp = Experiment::new(cfg, seed).map_err(Failure::Usage)?;
    let space = exp.entry.space.as_ref();
    let x0 = space.initial_point();
    let nu = exp.choice(cfg.step).map_err(Failure::Usage)?;
    let path = exp
        .skeleton
        .integrate(space, nu.as_ref(), &x0, cfg.steps)
        .map_err(|e| Failure::Check(anyhow!(e).context(format!("run: {} with {}", cfg.space, cfg.method))))?;

    let (r, c) = x0.shape();
    let mut csv = String::from("step,time");
    for i in 0..r {
        for j in 0..c {
            write!(csv, ",x_{i}_{j}").unwrap();
        }
    }
    writeln!(csv, ",{}", space.invariant_name()).unwrap();
    for (k, x) in path.iter().enumerate() {
        write!(csv, "{k},{}", num(k as f64 * cfg.step)).unwrap();
        for v in x.to_row_major() {
            write!(csv, ",{}", num(v)).unwrap();
        }
        writeln!(csv, ",{}", num(space.invariant_residual(x))).unwrap();
    }
    let target = cfg.resolve(&cfg.outputs.trajectory, base, out);
    write_file(&target, &csv).map_err(Failure::Usage)?;

    let last = path.last().expect("trajectory starts at x0");
    let mut report = json!({
        "space": space.name(),
        "method": cfg.method,
        "motion": cfg.motion,
        "field": cfg.field,
        "step": cfg.step,
        "steps": cfg.steps,
        "seed": seed,
        "invariant": space.invariant_name(),
        "final_invariant": space.invariant_residual(last),
    });
    if let Some(exact) = exp.exact(&x0, cfg.step * cfg.steps as f64).map_err(Failure::Usage)? {
        report["error_vs_closed_form"] = json!(last.distance(&exact).map_err(|e| Failure::Check(e.into()))?);
    }
    let report_path = cfg.resolve(&cfg.outputs.report, base, out);
    write_file(&report_path, &serde_json::to_string_pretty(&report).unwrap()).map_err(Failure::Usage)?;
    println!("wrote {} rows to {}", path.len(), target.display());
    Ok(())
}

pub fn orders(cfg: &ExperimentConfig, seed: u64, base: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let oc = cfg
        .orders
        .as_ref()
        .ok_or_else(|| Failure::Usage(anyhow!("config: the orders command needs an [orders] section")))?;
    let exp = Experiment::new(cfg, seed).map_err(Failure::Usage)?;
    let space = exp.entry.space.as_ref();
    let x0 = space.initial_point();
    let nu_of_h = |h: f64| -> Box<dyn IsotropyChoice> { exp.choice(h).expect("validated when the experiment was built") };
    let check = |e: homspace::Error, what: &str| Failure::Check(anyhow!(e).context(format!("orders: {what}")));
    let (reference, kind) = match exp.exact(&x0, oc.final_time).map_err(Failure::Usage)? {
        Some(x) => (x, "closed_form"),
        None => {
            let h_min = oc.h_list.iter().copied().fold(f64::INFINITY, f64::min);
            let r = refined_reference(space, &nu_of_h, &x0, oc.final_time, h_min / 1000.0)
                .map_err(|e| check(e, "reference solution"))?;
            (r, "cf4_refined")
        }
    };
    let rep: OrderReport = observed_order(&exp.skeleton, space, &nu_of_h, &x0, oc.final_time, &oc.h_list, &reference)
        .map_err(|e| match e {
            homspace::Error::Invalid { .. } => Failure::Usage(anyhow!(e).context("config: orders")),
            e => check(e, &cfg.method),
        })?;

    let slopes = rep.local_slopes();
    let mut csv = String::from("h,error,local_slope\n");
    for (i, (h, e)) in rep.step_sizes.iter().zip(&rep.errors).enumerate() {
        let slope = if i == 0 { String::new() } else { num(slopes[i - 1]) };
        writeln!(csv, "{},{},{slope}", num(*h), num(*e)).unwrap();
    }
    let target = cfg.resolve(&cfg.outputs.orders, base, out);
    write_file(&target, &csv).map_err(Failure::Usage)?;
    let report = json!({
        "space": space.name(),
        "method": cfg.method,
        "reference": kind,
        "final_time": oc.final_time,
        "observed_order": if rep.exact { serde_json::Value::Null } else { json!(rep.observed_order) },
        "exact_to_precision": rep.exact,
        "step_sizes": rep.step_sizes,
        "errors": rep.errors,
    });
    let report_path = cfg.resolve(&cfg.outputs.report, base, out);
    write_file(&report_path, &serde_json::to_string_pretty(&report).unwrap()).map_err(Failure::Usage)?;
    if rep.exact {
        println!("{}: exact to precision (errors at rounding level)", cfg.method);
    } else {
        println!("{}: fitted order {:.3}", cfg.method, rep.observed_order);
    }
    Ok(())
}

pub fn classify(file: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let text = std::fs::read_to_string(file)
        .with_context(|| format!("reading basis file {}", file.display()))
        .map_err(Failure::Usage)?;
    let basis: BasisFile = toml::from_str(&text)
        .with_context(|| format!("parsing basis file {}", file.display()))
        .map_err(Failure::Usage)?;
    let report = analyze(&basis)
        .with_context(|| format!("classify: {}", basis.name))
        .map_err(Failure::Usage)?;
    println!("{}", report.name);
    if let Some(c) = &report.classification {
        println!("{}", c.row());
    }
    println!("{}", report.search.describe());
    if let Some(dir) = out {
        let json = json!({
            "name": report.name,
            "reductive": report.classification.as_ref().map(|c| c.reductive),
            "symmetric": report.classification.as_ref().map(|c| c.symmetric),
            "flat": report.classification.as_ref().map(|c| c.flat),
            "complements": report.search.describe(),
        });
        let path = dir.join(format!("{}.classification.json", basis.name));
        write_file(&path, &serde_json::to_string_pretty(&json).unwrap()).map_err(Failure::Usage)?;
    }
    Ok(())
}

pub fn acceptance(seed: u64, inject: bool, only: &[u32], out: Option<&Path>) -> Result<(), Failure> {
    let opts = AcceptanceOptions { seed, inject_corruption: inject };
    for id in only {
        if !CRITERIA.iter().any(|(i, _)| i == id) {
            return Err(Failure::Usage(anyhow!("acceptance: no criterion {id} (valid: 1-{})", CRITERIA.len())));
        }
    }
    let outcomes: Vec<CriterionOutcome> = if only.is_empty() {
        run_all(&opts)
    } else {
        only.iter().map(|&id| run_criterion(id, &opts)).collect()
    };
    for o in &outcomes {
        println!("{}", o.line());
    }
    if let Some(dir) = out {
        write_file(&dir.join("acceptance.json"), &serde_json::to_string_pretty(&outcomes).unwrap())
            .map_err(Failure::Usage)?;
    }
    let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id.to_string()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(anyhow!("acceptance: criteria {} failed", failed.join(", "))))
    }
}

pub fn list() {
    println!("skeletons: {}", SKELETON_NAMES.join(", "));
    println!("motions:   {}", MOTION_NAMES.join(", "));
    println!("fields:    {}", FIELD_NAMES.join(", "));
    println!("spaces:");
    for (family, usage) in SpaceRegistry::builtin().families() {
        println!("  {family:<16} {usage}");
    }
}
