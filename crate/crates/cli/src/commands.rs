use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};

use locc_core::conversion::{
    build_plan, multi_copy_bound, optimal_probability, optimal_probability_with_minimizer,
    tensor_conversion_probability, ConversionPlan, CopyRegime, PlanOptions,
};
use locc_core::descriptor::{plan_from_json, plan_to_json, vector_json, StateDescriptor};
use locc_core::locc::{
    build_full_protocol, exhaustive_run_from_schmidt, monotone_audit, monte_carlo_run, MonteCarloConfig,
    RunOptions,
};
use locc_core::monotones::{entropy_of_entanglement, monotone_profile};
use locc_core::ordering::{compare as compare_states, Verdict};
use locc_core::scalar::round_sig12;
use locc_core::schmidt::state_from_schmidt;
use locc_core::{Error, Scalar, SchmidtVector};

use crate::{read_input, CliError, Context, Report};

/// A parsed state file and the name it is reported under.
pub(crate) struct Named<S> {
    pub name: String,
    pub state: SchmidtVector<S>,
}

pub(crate) fn load<S: Scalar>(path: &Path, ctx: &Context) -> Result<Named<S>, CliError> {
    let at = |e: Error| CliError::invalid(format!("{}: {e}", path.display()));
    let desc = StateDescriptor::from_json_str(&read_input(path)?).map_err(at)?;
    let state = desc.schmidt_vector::<S>(ctx.tol, ctx.trim).map_err(at)?;
    let name = desc.label.clone().unwrap_or_else(|| {
        path.file_stem().map_or_else(|| "stdin".into(), |s| s.to_string_lossy().into_owned())
    });
    Ok(Named { name, state })
}

pub(crate) fn mode_name<S: Scalar>() -> &'static str {
    if S::EXACT {
        "rational"
    } else {
        "float"
    }
}

/// `6/13 ≈ 0.461538` in exact mode, the 12-digit float otherwise.
pub(crate) fn show<S: Scalar>(x: &S) -> String {
    let s = x.render();
    if S::EXACT && s.contains('/') {
        format!("{s} ≈ {:.6}", x.to_f64())
    } else {
        s
    }
}

fn plan_options(ctx: &Context) -> PlanOptions {
    PlanOptions { tol: ctx.tol, resort_intermediate: false }
}

/// Left-aligned table with a header row.
pub(crate) fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: Vec<&str>| {
        let mut l = String::new();
        for (i, (c, w)) in cells.iter().zip(&widths).enumerate() {
            if i + 1 == cells.len() {
                l.push_str(c);
            } else {
                l.push_str(c);
                l.push_str(&" ".repeat(w - c.chars().count() + 2));
            }
        }
        out.push_str(l.trim_end());
        out.push('\n');
    };
    line(header.to_vec());
    for r in rows {
        line(r.iter().map(String::as_str).collect());
    }
    out
}

pub(crate) fn prob<S: Scalar>(source: &Path, target: &Path, ctx: &Context) -> Result<Report, CliError> {
    let a = load::<S>(source, ctx)?;
    let b = load::<S>(target, ctx)?;
    let (p, minimizer) = optimal_probability_with_minimizer(&a.state, &b.state, ctx.tol)?;
    let (sa, sb) = (a.state.support(ctx.tol), b.state.support(ctx.tol));

    let head = format!("P({} → {}) = ", a.name, b.name);
    let (summary, reason) = match minimizer {
        None => (
            format!("0, target has more nonzero Schmidt coefficients ({sb} > {sa})"),
            Some("target has more nonzero Schmidt coefficients"),
        ),
        Some(_) if p.eq_within(&S::one(), ctx.tol) => {
            (if S::EXACT { "1 (exact)".to_string() } else { "1".to_string() }, None)
        }
        Some(l) => (format!("{}, minimizer l={l}", show(&p)), None),
    };

    let n = a.state.len().max(b.state.len());
    let (pa, pb) = (monotone_profile(&a.state.padded(n)), monotone_profile(&b.state.padded(n)));
    let rows: Vec<Vec<String>> = (0..n)
        .map(|k| vec![(k + 1).to_string(), pa.values()[k].render(), pb.values()[k].render()])
        .collect();
    let mut text = format!("{head}{summary}\n\n");
    text.push_str(&table(&["k", &format!("E_k({})", a.name), &format!("E_k({})", b.name)], &rows));

    let json = json!({
        "mode": mode_name::<S>(),
        "source": { "name": a.name, "schmidt_sq": vector_json(a.state.probs()) },
        "target": { "name": b.name, "schmidt_sq": vector_json(b.state.probs()) },
        "probability": p.to_json(),
        "probability_decimal": round_sig12(p.to_f64()),
        "minimizer": minimizer,
        "reason": reason,
        "profiles": { "source": vector_json(pa.values()), "target": vector_json(pb.values()) },
    });
    Ok(Report { text: Some(text), json })
}

pub(crate) fn plan<S: Scalar>(source: &Path, target: &Path, ctx: &Context) -> Result<Report, CliError> {
    let a = load::<S>(source, ctx)?;
    let b = load::<S>(target, ctx)?;
    let plan = build_plan(&a.state, &b.state, &plan_options(ctx))?;
    Ok(Report::json(plan_to_json(&plan)))
}

pub(crate) enum PlanInput<'a> {
    States(&'a Path, &'a Path),
    File(&'a Path),
}

pub(crate) struct SimulateArgs {
    pub trials: u64,
    pub seed: u64,
    pub exhaustive: bool,
    pub branch_cap: usize,
    pub fallback: bool,
}

pub(crate) fn simulate<S: Scalar>(input: PlanInput<'_>, sim: &SimulateArgs, ctx: &Context) -> Result<Report, CliError> {
    let opts = plan_options(ctx);
    let plan: ConversionPlan<S> = match input {
        PlanInput::States(s, t) => build_plan(&load::<S>(s, ctx)?.state, &load::<S>(t, ctx)?.state, &opts)?,
        PlanInput::File(p) => {
            let v: Value = serde_json::from_str(&read_input(p)?)
                .map_err(|e| CliError::invalid(format!("{}: {e}", p.display())))?;
            plan_from_json(&v, &opts).map_err(|e| CliError::invalid(format!("{}: {e}", p.display())))?
        }
    };
    if plan.is_degenerate() {
        return Err(CliError::infeasible(format!(
            "conversion is impossible (P = 0): the target has {} nonzero Schmidt coefficients, the source only {}; \
             there is no protocol to simulate",
            plan.target.support(ctx.tol),
            plan.source.support(ctx.tol)
        )));
    }
    let protocol = build_full_protocol(&plan, ctx.tol)?;
    let header = json!({
        "mode": mode_name::<S>(),
        "source": vector_json(plan.source.probs()),
        "target": vector_json(plan.target.probs()),
        "predicted_exact": plan.probability.to_json(),
        "steps": protocol.steps().len(),
    });

    let mut fallback = false;
    if sim.exhaustive {
        let run = RunOptions { branch_cap: sim.branch_cap, tol: ctx.tol, execution: ctx.execution };
        match exhaustive_run_from_schmidt(&protocol, &plan.source, &run) {
            Ok(en) => {
                let p: S = en
                    .success_probability_exact()
                    .unwrap_or_else(|| S::from_f64(en.success_probability()).unwrap_or_else(S::zero));
                let mut audit = Vec::new();
                for k in 1..=plan.dim() {
                    let a = monotone_audit(&en, k, ctx.tol)?;
                    audit.push(json!({
                        "k": k,
                        "avg_E": vector_json(&a.values),
                        "non_increasing": a.non_increasing(),
                    }));
                }
                let mut v = header;
                v["method"] = json!("exhaustive");
                v["branches"] = json!(en.final_branches().len());
                v["success_probability"] = p.to_json();
                v["success_probability_decimal"] = json!(round_sig12(p.to_f64()));
                v["matches_prediction"] = json!(p.eq_within(&plan.probability, ctx.tol));
                v["audit"] = Value::Array(audit);
                return Ok(Report::json(v));
            }
            Err(Error::BranchCapExceeded(cap)) if sim.fallback => {
                log::warn!("more than {cap} branches; falling back to Monte-Carlo sampling");
                fallback = true;
            }
            Err(e) => return Err(e.into()),
        }
    }

    let cfg = MonteCarloConfig { trials: sim.trials, seed: sim.seed, execution: ctx.execution };
    let report = monte_carlo_run(&protocol, &state_from_schmidt(&plan.source), &cfg, ctx.tol)?;
    let mut v = header;
    v["method"] = json!("monte_carlo");
    v["fallback"] = json!(fallback);
    if let (Value::Object(dst), Value::Object(src)) = (&mut v, report.to_json()) {
        dst.extend(src);
    }
    v["within_3_sigma"] = json!(report.within(3.0));
    Ok(Report::json(v))
}

pub(crate) fn monotones<S: Scalar>(state: &Path, ctx: &Context) -> Result<Report, CliError> {
    let s = load::<S>(state, ctx)?;
    let profile = monotone_profile(&s.state);
    let entropy = entropy_of_entanglement(&s.state);
    let rows: Vec<Vec<String>> = profile
        .values()
        .iter()
        .enumerate()
        .map(|(k, e)| vec![(k + 1).to_string(), s.state.probs()[k].render(), e.render()])
        .collect();
    let mut text = format!("{}\n\n", s.name);
    text.push_str(&table(&["k", "λ_k", "E_k"], &rows));
    let _ = writeln!(text, "\nentropy of entanglement: {} ebits", round_sig12(entropy));
    let _ = writeln!(text, "nonzero Schmidt coefficients: {}", s.state.support(ctx.tol));
    let json = json!({
        "mode": mode_name::<S>(),
        "name": s.name,
        "schmidt_sq": vector_json(s.state.probs()),
        "E": vector_json(profile.values()),
        "entropy": round_sig12(entropy),
        "schmidt_rank": s.state.support(ctx.tol),
    });
    Ok(Report { text: Some(text), json })
}

pub(crate) fn compare<S: Scalar>(first: &Path, second: &Path, ctx: &Context) -> Result<Report, CliError> {
    let a = load::<S>(first, ctx)?;
    let b = load::<S>(second, ctx)?;
    let c = compare_states(&a.state, &b.state, ctx.tol)?;
    let (verdict, text_verdict) = match c.verdict {
        Verdict::FirstGreater => ("first_greater", format!("{} is more entangled than {}", a.name, b.name)),
        Verdict::SecondGreater => ("second_greater", format!("{} is more entangled than {}", b.name, a.name)),
        Verdict::Equal => ("equal", "both directions are equally likely".to_string()),
        Verdict::BothUnit => ("both_unit", "the states are locally equivalent".to_string()),
    };
    let text = format!(
        "P({a} → {b}) = {}\nP({b} → {a}) = {}\nverdict: {text_verdict}\n",
        show(&c.p_forward),
        show(&c.p_backward),
        a = a.name,
        b = b.name
    );
    let json = json!({
        "mode": mode_name::<S>(),
        "first": a.name,
        "second": b.name,
        "p_forward": c.p_forward.to_json(),
        "p_backward": c.p_backward.to_json(),
        "verdict": verdict,
    });
    Ok(Report { text: Some(text), json })
}

pub(crate) fn tensor<S: Scalar>(source: &Path, target: &Path, copies: usize, ctx: &Context) -> Result<Report, CliError> {
    if copies == 0 {
        return Err(CliError::invalid("--copies must be at least 1"));
    }
    let a = load::<S>(source, ctx)?;
    let b = load::<S>(target, ctx)?;
    let single = optimal_probability(&a.state, &b.state, ctx.tol)?;
    let many = tensor_conversion_probability(&a.state, &b.state, copies, ctx.tol)?;
    let power = (1..copies).fold(single.clone(), |acc, _| acc * single.clone());
    let bound = multi_copy_bound(&a.state, &b.state, ctx.tol)?;
    let relation = if power.lt_beyond(&many, ctx.tol) {
        "joint conversion beats independent single-copy attempts"
    } else if many.lt_beyond(&power, ctx.tol) {
        "joint conversion is worse than independent attempts"
    } else {
        "joint conversion equals independent attempts"
    };
    let regime = match bound.regime {
        CopyRegime::SingleCopyOptimal => "single_copy_optimal",
        CopyRegime::MultiCopyPossible => "multi_copy_possible",
    };
    let mut text = String::new();
    let _ = writeln!(text, "P({} → {}) = {}", a.name, b.name, show(&single));
    let _ = writeln!(text, "P({a}^⊗{copies} → {b}^⊗{copies}) = {}", show(&many), a = a.name, b = b.name);
    let _ = writeln!(text, "P({} → {})^{copies} = {}", a.name, b.name, show(&power));
    let _ = writeln!(text, "{relation}");
    let _ = writeln!(
        text,
        "Schmidt ranks {} and {}: {}",
        bound.source_rank,
        bound.target_rank,
        if bound.regime == CopyRegime::SingleCopyOptimal {
            "two target copies are unreachable, so at most one copy is expected"
        } else {
            "several target copies may be reachable"
        }
    );
    let json = json!({
        "mode": mode_name::<S>(),
        "copies": copies,
        "single": single.to_json(),
        "joint": many.to_json(),
        "single_power": power.to_json(),
        "regime": regime,
        "source_rank": bound.source_rank,
        "target_rank": bound.target_rank,
    });
    Ok(Report { text: Some(text), json })
}
