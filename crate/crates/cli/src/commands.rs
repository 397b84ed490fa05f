use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use serde_json::{json, Value};

use ocsp_core::analysis::{
    noisy_influences, total_noisy_influence, influence, verify_decoupling_bound, verify_bucketing_loss, verify_hc,
    FunctionFile,
};
use ocsp_core::distributions::{verify_distribution, BaseDistribution, DistributionFile};
use ocsp_core::order::InstanceFile;
use ocsp_core::rational::{self, Rational};
use ocsp_core::reduction::{
    dictator_assignment, edge_agreements, generate_lc, nbtw_components, nbtw_to_mas, reduce_components, Assignment,
    AssignmentFile, Component, Decoder, FunctionTable, LabelCoverFile, LabelCoverInstance, Labeling, LcGenParams,
    ReduceMode, Reduced, TestDistribution, DEFAULT_VARIABLE_CAP,
};
use ocsp_core::rng::DEFAULT_SEED;
use ocsp_core::solvers::{
    exact_value_with_cap, local_search, monte_carlo_value, random_ordering, InstanceSampler, DEFAULT_EXACT_CAP,
};
use ocsp_core::{ordering_value, OcspInstance, Ordering, OrderingPredicate};

use crate::report::{Io, Report};
use crate::{AnalysisArgs, AnalysisKind, Cli, Command, Failure, ModeArg, Params};

const DEFAULT_SAMPLES: u64 = 100_000;

type Outcome = Result<Report, Failure>;

impl Params {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    fn samples(&self) -> anyhow::Result<u64> {
        match self.samples {
            Some(0) => bail!("--samples must be at least 1"),
            Some(n) => Ok(n),
            None => Ok(DEFAULT_SAMPLES),
        }
    }

    fn gamma(&self) -> anyhow::Result<Rational> {
        let raw = self.gamma.as_deref().ok_or_else(|| anyhow!("--gamma is required"))?;
        let g = rational::parse(raw)?;
        if !rational::in_unit_interval(&g) {
            bail!("--gamma must lie in [0, 1], got {raw}");
        }
        Ok(g)
    }

    fn buckets(&self) -> anyhow::Result<usize> {
        match self.buckets {
            Some(0) => bail!("--Gamma must be positive"),
            Some(b) => Ok(b),
            None => bail!("--Gamma is required"),
        }
    }

    fn q(&self) -> anyhow::Result<usize> {
        self.q.ok_or_else(|| anyhow!("--q is required"))
    }
}

pub(crate) fn execute(cli: &Cli) -> Outcome {
    let p = &cli.params;
    let mut io = Io::default();
    let (name, passed, result) = match &cli.command {
        Command::GenLc(a) => {
            let params = LcGenParams {
                l: a.labels_left,
                r: a.labels_right,
                left: a.left,
                right: a.right,
                edges: a.edges,
                planted: a.planted,
            };
            let (lc, planted) = generate_lc(&params, p.seed())?;
            io.write_json(&a.out, &lc.to_file())?;
            let mut result = json!({ "left": a.left, "right": a.right, "edges": lc.edges().len() });
            if let Some(lab) = &planted {
                result["planted_value"] = json!(rational::format(&lc.value(lab)?));
                if let Some(path) = &a.labeling_out {
                    io.write_json(path, &lab.to_map(&lc))?;
                }
            } else if a.labeling_out.is_some() {
                return Err(anyhow!("--labeling-out needs --planted").into());
            }
            ("gen-lc", None, result)
        }
        Command::Reduce(a) => {
            let lc = read_lc(&mut io, &a.input)?;
            let pred = OrderingPredicate::by_name(&a.pred)?;
            let base = resolve_base(&mut io, a.base.as_deref(), Some(&pred), p)?;
            let comps = [Component { base, pred }];
            let red = materialize(&lc, &comps, &p.gamma()?, p)?;
            io.write_json(&a.out, &red.to_file())?;
            ("reduce", None, instance_summary(&red))
        }
        Command::Overlay(a) => {
            let lc = read_lc(&mut io, &a.input)?;
            let red = materialize(&lc, &nbtw_components(p.q()?)?, &p.gamma()?, p)?;
            io.write_json(&a.out, &red.to_file())?;
            ("overlay", None, instance_summary(&red))
        }
        Command::Gadget(a) => {
            let inst = read_instance(&mut io, &a.input)?;
            let mas = nbtw_to_mas(&inst)?;
            io.write_json(&a.out, &mas.to_file())?;
            let mut result = instance_summary(&mas);
            result["source_constraints"] = json!(inst.constraints().len());
            ("gadget", None, result)
        }
        Command::Solve(a) => {
            let inst = read_instance(&mut io, &a.input)?;
            let report = if a.mc {
                let samples = p.samples()?;
                let ordering = match &a.ordering {
                    Some(path) => io.read_json::<Ordering>(path)?,
                    None => random_ordering(&inst, p.seed())?.best_ordering.expect("random ordering"),
                };
                let ranks = ordering.ranks_for(&inst)?;
                let mut r = monte_carlo_value(&InstanceSampler::new(&inst)?, &ranks, samples, p.seed())?;
                r.best_ordering = Some(ordering);
                r
            } else if a.local {
                local_search(&inst, p.seed(), a.iters)?
            } else {
                exact_value_with_cap(&inst, p.cap.unwrap_or(DEFAULT_EXACT_CAP))?
            };
            if let (Some(path), Some(ord)) = (&a.out, &report.best_ordering) {
                io.write_json(path, ord)?;
            }
            let mut result = serde_json::to_value(&report)?;
            result["value"] = result["best_value"].clone();
            ("solve", None, result)
        }
        Command::Eval(a) => eval(&mut io, a, p)?,
        Command::DistVerify(a) => {
            let d = resolve_base(&mut io, Some(&a.distribution), None, p)?;
            let pred = match &a.pred {
                Some(name) => OrderingPredicate::by_name(name)?,
                None => default_predicate(&a.distribution)
                    .ok_or_else(|| anyhow!("--pred is required for distribution files"))??,
            };
            let report = verify_distribution(&d, &pred)?;
            if let Some(path) = &a.out {
                io.write_json(path, &d.to_file())?;
            }
            let passed = report.uniform_marginals
                && match a.distribution.split(':').next() {
                    Some("btw") => report.coords_gt_t_independent_of_prefix && report.exchange_symmetric(2, 3),
                    Some("nbtw") => report.pairwise_independent,
                    Some("so") => report.order_projection_uniform == Some(true),
                    _ => true,
                };
            let mut result = serde_json::to_value(&report)?;
            result["predicate"] = json!(pred.name());
            result["atoms"] = json!(d.atoms().len());
            ("dist-verify", Some(passed), result)
        }
        Command::AnalysisVerify(a) => analysis(&mut io, a, p)?,
        Command::Dictate(a) => {
            let lc = read_lc(&mut io, &a.input)?;
            let map: BTreeMap<String, usize> = io.read_json(&a.labeling)?;
            let labeling = Labeling::from_map(&lc, &map)?;
            let base = match &a.base {
                Some(_) => resolve_base(&mut io, a.base.as_deref(), None, p)?,
                None => BaseDistribution::nbtw_base(p.q()?)?,
            };
            let assignment = dictator_assignment(&lc, &labeling, base.q1(), base.q2())?;
            io.write_json(&a.out, &assignment.to_file(&lc))?;
            let result = json!({ "labeling_value": rational::format(&lc.value(&labeling)?) });
            ("dictate", None, result)
        }
        Command::Decode(a) => {
            let lc = read_lc(&mut io, &a.lc)?;
            let assignment = read_assignment(&mut io, &a.assignment, &lc)?;
            let decoder = Decoder::new(&lc, &assignment, p.buckets()?, &p.gamma()?)?;
            if a.trials == 0 {
                return Err(anyhow!("--trials must be at least 1").into());
            }
            let seed = p.seed();
            let first = decoder.decode(seed);
            if let Some(path) = &a.out {
                io.write_json(path, &first.to_map(&lc))?;
            }
            let mut perfect = 0u64;
            let mut mean = 0.0;
            for k in 0..a.trials {
                let lab = if k == 0 { first.clone() } else { decoder.decode(seed.wrapping_add(k)) };
                let v = lc.value(&lab)?;
                if v == Rational::from_integer(1.into()) {
                    perfect += 1;
                }
                mean += rational::to_f64(&v);
            }
            let agreements = edge_agreements(&lc, &assignment, &decoder)?;
            let result = json!({
                "first_value": rational::format(&lc.value(&first)?),
                "mean_value": mean / a.trials as f64,
                "trials": a.trials,
                "perfect_frequency": perfect as f64 / a.trials as f64,
                "perfect_probability": rational::format(&decoder.perfect_probability(&lc)?),
                "edge_agreements": agreements,
            });
            ("decode", None, result)
        }
    };
    let report = Report::new(name, config_value(cli)?, p.seed(), io, passed, result);
    if passed == Some(false) {
        return Err(Failure::Verification(Box::new(report)));
    }
    Ok(report)
}

fn config_value(cli: &Cli) -> anyhow::Result<Value> {
    let mut v = serde_json::to_value(cli)?;
    // The report path is where the report goes, not part of the run.
    if let Some(params) = v.get_mut("params").and_then(Value::as_object_mut) {
        params.remove("report");
        params.remove("format");
        params.insert("seed".into(), json!(cli.params.seed()));
    }
    Ok(v)
}

fn read_lc(io: &mut Io, path: &Path) -> anyhow::Result<LabelCoverInstance> {
    let file: LabelCoverFile = io.read_json(path)?;
    LabelCoverInstance::from_file(&file).with_context(|| format!("{}: invalid Label Cover instance", path.display()))
}

fn read_instance(io: &mut Io, path: &Path) -> anyhow::Result<OcspInstance> {
    let file: InstanceFile = io.read_json(path)?;
    OcspInstance::from_file(&file).with_context(|| format!("{}: invalid instance", path.display()))
}

fn read_assignment(io: &mut Io, path: &Path, lc: &LabelCoverInstance) -> anyhow::Result<Assignment> {
    let file: AssignmentFile = io.read_json(path)?;
    Assignment::from_file(lc, &file).with_context(|| format!("{}: invalid assignment", path.display()))
}

fn read_table(io: &mut Io, path: Option<&Path>, flag: &str) -> anyhow::Result<FunctionTable> {
    let path = path.ok_or_else(|| anyhow!("{flag} is required"))?;
    let t: FunctionTable = io.read_json(path)?;
    FunctionTable::new(t.alphabet, t.dim, t.values).with_context(|| format!("{}: invalid table", path.display()))
}

/// A distribution named on the command line, read from a JSON file, or
/// derived from the predicate and the alphabet flags.
fn resolve_base(
    io: &mut Io,
    spec: Option<&str>,
    pred: Option<&OrderingPredicate>,
    p: &Params,
) -> anyhow::Result<BaseDistribution> {
    if let Some(spec) = spec {
        if spec.ends_with(".json") || Path::new(spec).is_file() {
            let file: DistributionFile = io.read_json(Path::new(spec))?;
            return BaseDistribution::from_file(&file).with_context(|| format!("{spec}: invalid distribution"));
        }
        return Ok(BaseDistribution::from_name(spec)?);
    }
    let name = pred.and_then(OrderingPredicate::name).unwrap_or("");
    let d = match name.to_ascii_uppercase().as_str() {
        "BTW" => BaseDistribution::btw_base(p.q()?)?,
        "NBTW" => BaseDistribution::nbtw_base(p.q()?)?,
        n if n.starts_with("NBTW") => BaseDistribution::nbtw_permuted(p.q()?, n[4..].parse()?)?,
        n if n.starts_with("SO") => {
            let t = p.t.ok_or_else(|| anyhow!("--t is required"))?;
            let q1 = p.q1.ok_or_else(|| anyhow!("--q1 is required"))?;
            let q2 = p.q2.ok_or_else(|| anyhow!("--q2 is required"))?;
            BaseDistribution::so_base(t, q1, q2)?
        }
        _ => bail!("--base is required for predicate {name:?}"),
    };
    Ok(d)
}

fn default_predicate(spec: &str) -> Option<ocsp_core::Result<OrderingPredicate>> {
    let parts: Vec<&str> = spec.split(':').collect();
    Some(match parts.as_slice() {
        ["btw", _] => Ok(OrderingPredicate::btw()),
        ["nbtw", _] => Ok(OrderingPredicate::nbtw()),
        ["nbtw", _, j] => j.parse().map_err(|_| ocsp_core::Error::Parse(format!("bad index {j:?}"))).and_then(OrderingPredicate::nbtw_j),
        ["so", t, _, _] => t.parse().map_err(|_| ocsp_core::Error::Parse(format!("bad t {t:?}"))).and_then(OrderingPredicate::same_order),
        _ => return None,
    })
}

fn materialize(lc: &LabelCoverInstance, comps: &[Component], gamma: &Rational, p: &Params) -> anyhow::Result<OcspInstance> {
    let cap = p.cap.unwrap_or(DEFAULT_VARIABLE_CAP);
    match reduce_components(lc, comps, gamma, ReduceMode::Materialize, cap)? {
        Reduced::Materialized(r) => Ok(r.instance),
        Reduced::Streaming(_) => bail!("reduction exceeds the variable cap {cap}"),
    }
}

fn instance_summary(inst: &OcspInstance) -> Value {
    json!({
        "variables": inst.num_variables(),
        "constraints": inst.constraints().len(),
        "predicates": inst.predicates().iter().map(|p| p.name().unwrap_or("custom").to_string()).collect::<Vec<_>>(),
    })
}

fn eval(io: &mut Io, a: &crate::EvalArgs, p: &Params) -> Result<(&'static str, Option<bool>, Value), Failure> {
    if let (Some(input), Some(ord)) = (&a.input, &a.ordering) {
        let inst = read_instance(io, input)?;
        let ordering: Ordering = io.read_json(ord)?;
        let value = ordering_value(&inst, &ordering)?;
        return Ok(("eval", None, json!({ "value": rational::format(&value), "method": "exact" })));
    }
    let (Some(lc_path), Some(as_path)) = (&a.lc, &a.assignment) else {
        return Err(anyhow!("eval needs --in with --ordering, or --lc with --assignment").into());
    };
    let lc = read_lc(io, lc_path)?;
    let assignment = read_assignment(io, as_path, &lc)?;
    let comps = if a.overlay {
        nbtw_components(p.q()?)?
    } else {
        let pred = OrderingPredicate::by_name(&a.pred)?;
        let base = resolve_base(io, a.base.as_deref(), Some(&pred), p)?;
        vec![Component { base, pred }]
    };
    assignment.check(&lc, comps[0].base.q1(), comps[0].base.q2())?;
    let mode = match a.mode {
        ModeArg::Auto => ReduceMode::Auto,
        ModeArg::Materialize => ReduceMode::Materialize,
        ModeArg::Stream => ReduceMode::Stream,
    };
    let cap = p.cap.unwrap_or(DEFAULT_VARIABLE_CAP);
    let result = match reduce_components(&lc, &comps, &p.gamma()?, mode, cap)? {
        Reduced::Materialized(red) => {
            json!({ "value": rational::format(&red.value(&assignment)?), "method": "exact",
                    "variables": red.instance.num_variables() })
        }
        Reduced::Streaming(sampler) => {
            let r = monte_carlo_value(&sampler, &assignment, p.samples()?, p.seed())?;
            json!({ "value": r.best_value.to_f64(), "method": "monte_carlo", "samples": r.samples,
                    "ci_halfwidth": r.ci_halfwidth })
        }
    };
    Ok(("eval", None, result))
}

fn analysis(io: &mut Io, a: &AnalysisArgs, p: &Params) -> Result<(&'static str, Option<bool>, Value), Failure> {
    match a.kind {
        AnalysisKind::Hc | AnalysisKind::Influence => {
            let path = a.input.as_deref().ok_or_else(|| anyhow!("--in is required"))?;
            let file: FunctionFile = io.read_json(path)?;
            let f = file.build().with_context(|| format!("{}: invalid function", path.display()))?;
            let gamma = p.gamma()?;
            if let AnalysisKind::Hc = a.kind {
                let r = verify_hc(&f, rational::to_f64(&gamma))?;
                return Ok(("analysis-verify", Some(r.holds), serde_json::to_value(&r)?));
            }
            let var = f.variance();
            let noisy = noisy_influences(&f, &gamma);
            let total = total_noisy_influence(&f, &gamma);
            let per_coord_ok = noisy.iter().all(|i| *i <= var);
            let total_ok = gamma == Rational::from_integer(0.into()) || total <= &var / &gamma;
            let plain = (0..f.dim()).map(|i| influence(&f, i).map(|x| rational::format(&x))).collect::<Result<Vec<_>, _>>()?;
            let result = json!({
                "variance": rational::format(&var),
                "influences": plain,
                "noisy_influences": noisy.iter().map(rational::format).collect::<Vec<_>>(),
                "total_noisy_influence": rational::format(&total),
                "noisy_at_most_variance": per_coord_ok,
                "total_at_most_variance_over_gamma": total_ok,
            });
            Ok(("analysis-verify", Some(per_coord_ok && total_ok), result))
        }
        AnalysisKind::Bucketing | AnalysisKind::Decoupling => {
            let f = read_table(io, a.f.as_deref(), "--f")?;
            let g = read_table(io, a.g.as_deref(), "--g")?;
            let pred = OrderingPredicate::by_name(&a.pred)?;
            let base = resolve_base(io, a.base.as_deref(), Some(&pred), p)?;
            let pi = match &a.pi {
                Some(pi) => pi.clone(),
                None if f.dim == g.dim => (0..g.dim).collect(),
                None => return Err(anyhow!("--pi is required when the tables differ in dimension").into()),
            };
            let td = TestDistribution::new(base, p.gamma()?, pi, f.dim)?;
            let buckets = p.buckets()?;
            let (holds, result) = if let AnalysisKind::Bucketing = a.kind {
                let r = verify_bucketing_loss(&f, &g, &td, &pred, buckets)?;
                (r.holds, serde_json::to_value(&r)?)
            } else {
                let r = verify_decoupling_bound(&f, &g, &td, &pred, buckets)?;
                (r.holds, serde_json::to_value(&r)?)
            };
            Ok(("analysis-verify", Some(holds), result))
        }
    }
}
