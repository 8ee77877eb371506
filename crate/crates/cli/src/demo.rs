//! Built-in scenarios with fixed inputs.

use std::fmt::Write as _;

use serde_json::{json, Value};

use locc_core::conversion::{multi_copy_bound, optimal_probability, CopyRegime};
use locc_core::descriptor::vector_json;
use locc_core::ordering::{find_cycle, nonadditivity_search};
use locc_core::schmidt::tensor_power;
use locc_core::{Scalar, SchmidtVector};

use crate::commands::{mode_name, show, table};
use crate::{CliError, Context, Demo, Report};

fn ratios<S: Scalar>(num: &[i64], den: i64, ctx: &Context) -> Result<SchmidtVector<S>, CliError> {
    Ok(SchmidtVector::new(num.iter().map(|&n| S::from_ratio(n, den)).collect(), ctx.tol)?)
}

pub(crate) fn run<S: Scalar>(name: Demo, ctx: &Context) -> Result<Report, CliError> {
    match name {
        Demo::PaperCycle => paper_cycle::<S>(ctx),
        Demo::NonAdditivity => non_additivity::<S>(ctx),
        Demo::LoPopescu => lo_popescu::<S>(ctx),
        Demo::MultiCopy => multi_copy::<S>(ctx),
    }
}

fn paper_cycle<S: Scalar>(ctx: &Context) -> Result<Report, CliError> {
    let weights: [[i64; 4]; 3] = [[108, 12, 12, 12], [66, 66, 6, 6], [47, 47, 47, 3]];
    let states = weights.iter().map(|w| ratios::<S>(w, 144, ctx)).collect::<Result<Vec<_>, _>>()?;
    let mut text = String::new();
    for (i, w) in weights.iter().enumerate() {
        let _ = writeln!(text, "Ψ{} = ({}, {}, {}, {})/144", i + 1, w[0], w[1], w[2], w[3]);
    }
    text.push('\n');

    let mut rows = Vec::new();
    let mut probabilities = Vec::new();
    for (i, j) in [(0, 1), (1, 2), (2, 0)] {
        let forward = optimal_probability(&states[i], &states[j], ctx.tol)?;
        let backward = optimal_probability(&states[j], &states[i], ctx.tol)?;
        rows.push(vec![
            format!("Ψ{} → Ψ{}", i + 1, j + 1),
            show(&forward),
            format!("Ψ{} → Ψ{}", j + 1, i + 1),
            show(&backward),
        ]);
        for (from, to, p) in [(i, j, &forward), (j, i, &backward)] {
            probabilities.push(json!({ "from": from + 1, "to": to + 1, "p": p.to_json() }));
        }
    }
    text.push_str(&table(&["forward", "P", "backward", "P"], &rows));

    let cycle = find_cycle(&states, ctx.tol, ctx.execution)?;
    let cycle_json = match &cycle {
        Some(c) => {
            let names: Vec<String> = c.iter().map(|i| format!("Ψ{}", i + 1)).collect();
            let _ = writeln!(text, "\ncycle: {}", names.join(" < "));
            text.push_str("(X < Y when P(Y → X) > P(X → Y)): the relation is not an ordering\n");
            json!(c.iter().map(|i| i + 1).collect::<Vec<_>>())
        }
        None => {
            text.push_str("\nno cycle found\n");
            Value::Null
        }
    };
    let json = json!({
        "demo": "paper-cycle",
        "mode": mode_name::<S>(),
        "states": states.iter().map(|s| vector_json(s.probs())).collect::<Vec<_>>(),
        "probabilities": probabilities,
        "cycle": cycle_json,
    });
    Ok(Report { text: Some(text), json })
}

fn non_additivity<S: Scalar>(ctx: &Context) -> Result<Report, CliError> {
    let a = ratios::<S>(&[2, 1, 1], 4, ctx)?;
    let b = ratios::<S>(&[2, 2, 1], 5, ctx)?;
    let found = nonadditivity_search(&[(a.clone(), b.clone())], ctx.tol, ctx.execution)?;
    let single = optimal_probability(&a, &b, ctx.tol)?;
    let two = optimal_probability(&tensor_power(&a, 2)?, &tensor_power(&b, 2)?, ctx.tol)?;
    let squared = single.clone() * single.clone();
    let mut text = String::from("Ψ = (1/2, 1/4, 1/4), Φ = (2/5, 2/5, 1/5)\n\n");
    let _ = writeln!(text, "P(Ψ → Φ)     = {}", show(&single));
    let _ = writeln!(text, "P(Ψ → Φ)^2   = {}", show(&squared));
    let _ = writeln!(text, "P(Ψ⊗Ψ → Φ⊗Φ) = {}", show(&two));
    let _ = writeln!(
        text,
        "\n{}",
        if found.is_empty() {
            "two copies do no better than independent attempts"
        } else {
            "converting both copies jointly beats two independent attempts"
        }
    );
    let json = json!({
        "demo": "non-additivity",
        "mode": mode_name::<S>(),
        "single": single.to_json(),
        "single_squared": squared.to_json(),
        "two_copy": two.to_json(),
        "non_additive": !found.is_empty(),
    });
    Ok(Report { text: Some(text), json })
}

/// Two-level sources `(1 − a, a)` against the Bell target; expected `min(1, 2a)`.
fn lo_popescu<S: Scalar>(ctx: &Context) -> Result<Report, CliError> {
    let bell = ratios::<S>(&[1, 1], 2, ctx)?;
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut all_match = true;
    for i in 1..=10 {
        let a_min = S::from_ratio(i, 20);
        let source = ratios::<S>(&[20 - i, i], 20, ctx)?;
        let p = optimal_probability(&source, &bell, ctx.tol)?;
        let expected = (S::from_ratio(2, 1) * a_min.clone()).clamp_unit();
        let ok = p.eq_within(&expected, ctx.tol);
        all_match &= ok;
        rows.push(vec![a_min.render(), p.render(), expected.render(), if ok { "yes" } else { "NO" }.into()]);
        entries.push(json!({ "alpha_min": a_min.to_json(), "p": p.to_json(), "expected": expected.to_json(), "match": ok }));
    }
    let mut text = String::from("source (1 − a, a), target (1/2, 1/2)\n\n");
    text.push_str(&table(&["a", "P", "min(1, 2a)", "match"], &rows));
    let _ = writeln!(text, "\nall match: {}", if all_match { "yes" } else { "no" });
    let json = json!({
        "demo": "lo-popescu",
        "mode": mode_name::<S>(),
        "sweep": entries,
        "all_match": all_match,
    });
    Ok(Report { text: Some(text), json })
}

fn multi_copy<S: Scalar>(ctx: &Context) -> Result<Report, CliError> {
    let source = ratios::<S>(&[4, 1], 5, ctx)?;
    let target = ratios::<S>(&[1, 1], 2, ctx)?;
    let two = tensor_power(&target, 2)?;
    let p_two = optimal_probability(&source, &two, ctx.tol)?;
    let bound = multi_copy_bound(&source, &target, ctx.tol)?;
    let single_optimal = bound.regime == CopyRegime::SingleCopyOptimal;
    let mut text = String::from("Ψ = (4/5, 1/5), Φ = (1/2, 1/2)\n\n");
    let _ = writeln!(text, "nonzero Schmidt coefficients: Ψ {}, Φ⊗Φ {}", source.support(ctx.tol), two.support(ctx.tol));
    let _ = writeln!(text, "P(Ψ → Φ⊗Φ) = {}", show(&p_two));
    let _ = writeln!(text, "P(Ψ → Φ)   = {}", show(&bound.m_max));
    if single_optimal {
        text.push_str("two copies of Φ are unreachable, so the best expected number of copies is P(Ψ → Φ)\n");
    }
    let json = json!({
        "demo": "multi-copy",
        "mode": mode_name::<S>(),
        "p_two_copies": p_two.to_json(),
        "expected_copies": bound.m_max.to_json(),
        "source_rank": bound.source_rank,
        "target_rank": bound.target_rank,
        "single_copy_optimal": single_optimal,
    });
    Ok(Report { text: Some(text), json })
}
