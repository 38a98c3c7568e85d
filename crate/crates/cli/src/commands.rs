use std::fs;
use std::path::Path;

use pml_core::check::{check_labeling, check_naive};
use pml_core::formula::{parse_formula, parse_formula_infer, parse_term, Formula};
use pml_core::model::{encode_list, KripkeModel};
use pml_core::reduce_neg::{backward_model_neg, forward_model_neg, reduce_neg, transfer_check, NegError};
use pml_core::reduce_tables::{
    backward_model_tbl, forward_model_tbl, reduce_tables, with_fresh_props, xi1_conjunct_count, LayerMode, TableConfig,
    TableError,
};
use pml_core::sat::{sat_bounded, SatError, SatVerdict};
use pml_core::term::{enumerate_tables, normalize_term, Vocabulary};

use crate::report::Report;
use crate::{CliError, Command, Layering, Outcome, Reduction};

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn load_model(path: &Path) -> Result<KripkeModel, CliError> {
    KripkeModel::parse(&read(path)?).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))
}

fn formula_source(arg: &str) -> Result<String, CliError> {
    match arg.strip_prefix('@') {
        Some(path) => read(Path::new(path)),
        None => Ok(arg.to_string()),
    }
}

fn parse_vocab(spec: &str) -> Result<Vocabulary, CliError> {
    Vocabulary::parse(spec).map_err(|e| CliError::Usage(format!("vocabulary `{spec}`: {e}")))
}

fn load_formula(arg: &str, vocab: Option<&Vocabulary>) -> Result<Formula, CliError> {
    let src = formula_source(arg)?;
    let parsed = match vocab {
        Some(v) => parse_formula(src.trim(), v),
        None => parse_formula_infer(src.trim()).map(|(f, _)| f),
    };
    parsed.map_err(|e| CliError::Format(format!("formula: {e}")))
}

fn world_in(model: &KripkeModel, w: u32) -> Result<(), CliError> {
    if (w as usize) < model.world_count() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("world {w} out of range for {} worlds", model.world_count())))
    }
}

fn neg_error(e: NegError) -> CliError {
    match e {
        NegError::Fragment(_) => CliError::Usage(e.to_string()),
        other => CliError::Format(other.to_string()),
    }
}

fn table_error(e: TableError) -> CliError {
    match e {
        TableError::Xi1TooLarge { .. } | TableError::TooLarge(_) => CliError::Budget(e.to_string()),
        TableError::NoBinarySymbol
        | TableError::TooManySymbols { .. }
        | TableError::UnknownSymbol(_)
        | TableError::DepthBound { .. }
        | TableError::LayerCount { .. } => CliError::Usage(e.to_string()),
        other => CliError::Format(other.to_string()),
    }
}

fn sat_error(e: SatError) -> CliError {
    match e {
        SatError::Budget { .. } | SatError::TooLarge { .. } => CliError::Budget(e.to_string()),
        other => CliError::Format(other.to_string()),
    }
}

fn positive(report: Report) -> Outcome {
    Outcome { report, negative: false }
}

pub fn execute(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Check { model, formula, naive, expect } => check(model, formula, *naive, *expect),
        Command::ReduceNeg { formula } => reduce_neg_cmd(formula),
        Command::ReduceTables { formula, vocab, max_symbols, max_xi1, full } => {
            reduce_tables_cmd(formula, vocab.as_deref(), *max_symbols as usize, *max_xi1, *full)
        }
        Command::NormalizeTerm { term, vocab } => normalize(term, vocab),
        Command::Tables { vocab, arity } => tables(vocab, *arity as usize),
        Command::Sat { formula, max_worlds, witness } => sat(formula, *max_worlds as usize, witness.as_deref()),
        Command::VerifyReduction {
            reduction,
            model,
            formula,
            world,
            reduced_model,
            layering,
            depth,
            layers,
            max_xi1,
        } => {
            let source = load_model(model)?;
            let reduced = reduced_model.as_deref().map(load_model).transpose()?;
            world_in(&source, *world)?;
            match reduction {
                Reduction::Neg => verify_neg(&source, formula, *world, reduced.as_ref()),
                Reduction::Tables => {
                    let mode = match layering {
                        Layering::Truncated => LayerMode::Truncated { depth: *depth },
                        Layering::Cyclic => LayerMode::Cyclic { layers: *layers },
                    };
                    verify_tables(&source, formula, *world, reduced.as_ref(), mode, *max_xi1)
                }
            }
        }
        Command::Encode { model } => encode(model),
    }
}

fn check(model: &Path, formula: &str, naive: bool, expect: Option<u32>) -> Result<Outcome, CliError> {
    let m = load_model(model)?;
    let phi = load_formula(formula, Some(m.vocab()))?;
    let truth = if naive { check_naive(&m, &phi) } else { check_labeling(&m, &phi) }
        .map_err(|e| CliError::Format(e.to_string()))?;
    let mut report = Report::new();
    report.add("engine", if naive { "naive" } else { "labeling" }).add("truth", &truth);
    let mut negative = false;
    if let Some(w) = expect {
        world_in(&m, w)?;
        negative = !truth.contains(w);
        report.add("expect", w).add("holds", !negative);
    }
    Ok(Outcome { report, negative })
}

fn reduce_neg_cmd(formula: &str) -> Result<Outcome, CliError> {
    let phi = load_formula(formula, None)?;
    let red = reduce_neg(&phi).map_err(neg_error)?;
    let mut report = Report::new();
    let symbols: Vec<String> = red
        .symbols
        .iter()
        .map(|p| format!("{}:{},{}", p.source.name(), p.positive.name(), p.negative.name()))
        .collect();
    report
        .add("source", &red.source)
        .add("symbols", symbols.join(" "))
        .add("translated", &red.translated)
        .add("eta", &red.eta)
        .add("theta", &red.theta)
        .add("eta_conjuncts", red.eta_conjuncts)
        .add("size_source", red.source.size())
        .add("size_eta", red.eta.size())
        .add("size_theta", red.theta.size());
    Ok(positive(report))
}

fn reduce_tables_cmd(
    formula: &str,
    vocab: Option<&str>,
    max_symbols: usize,
    max_xi1: u64,
    full: bool,
) -> Result<Outcome, CliError> {
    let vocab = vocab.map(parse_vocab).transpose()?;
    let phi = load_formula(formula, vocab.as_ref())?;
    let config = TableConfig { max_symbols, max_xi1_conjuncts: max_xi1 };
    let red = reduce_tables(&phi, vocab.as_ref(), &config).map_err(table_error)?;
    let mut report = Report::new();
    report
        .add("source", &red.source)
        .add("star", &red.star.formula)
        .add("fresh_props", red.star.fresh.len())
        .add("table_symbols", red.tables.vocab.len())
        .add("translated", &red.translated)
        .add("subformulas", red.subformulas.len())
        .add("xi1_conjuncts", xi1_conjunct_count(&red.tables, red.subformulas.len()))
        .add("size_star", red.star.formula.size())
        .add("size_theta", red.theta.size());
    if full {
        report.add("theta", &red.theta);
    }
    Ok(positive(report))
}

fn normalize(term: &str, vocab: &str) -> Result<Outcome, CliError> {
    let vocab = parse_vocab(vocab)?;
    let t = parse_term(term.trim(), &vocab).map_err(|e| CliError::Format(format!("term: {e}")))?;
    let n = normalize_term(&t).map_err(|e| CliError::Format(e.to_string()))?;
    let mut report = Report::new();
    report.add("input", &t).add("normalized", &n).add("size_input", t.size()).add("size_normalized", n.size());
    Ok(positive(report))
}

fn tables(vocab: &str, arity: usize) -> Result<Outcome, CliError> {
    let vocab = parse_vocab(vocab)?;
    if vocab.of_arity(arity).is_empty() {
        return Err(CliError::Usage(format!("no symbol of arity {arity} in `{vocab}`")));
    }
    let all = enumerate_tables(&vocab, arity).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut report = Report::new();
    report.add("count", all.len());
    for rho in &all {
        report.add(&format!("table.{}", rho.index()), rho);
    }
    Ok(positive(report))
}

fn sat(formula: &str, max_worlds: usize, witness: Option<&Path>) -> Result<Outcome, CliError> {
    let phi = load_formula(formula, None)?;
    let verdict = sat_bounded(&phi, max_worlds).map_err(sat_error)?;
    let mut report = Report::new();
    match verdict {
        SatVerdict::Satisfiable { model, world } => {
            let text = model.render();
            if let Some(path) = witness {
                fs::write(path, &text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
            }
            report.add("verdict", "satisfiable").add("world", world).add("model", text);
            Ok(positive(report))
        }
        SatVerdict::Exhausted { bound } => {
            report.add("verdict", format!("exhausted {bound}"));
            Ok(Outcome { report, negative: true })
        }
    }
}

/// Records a failed construction step as a negative result.
fn failed(mut report: Report, step: &str, reason: impl ToString) -> Outcome {
    report.add(step, "fail").add("reason", reason.to_string()).add("result", "fail");
    Outcome { report, negative: true }
}

fn verify_neg(source: &KripkeModel, formula: &str, w: u32, reduced: Option<&KripkeModel>) -> Result<Outcome, CliError> {
    let phi = load_formula(formula, Some(source.vocab()))?;
    let red = reduce_neg(&phi).map_err(neg_error)?;
    let mut report = Report::new();
    report.add("reduction", "neg").add("source", &red.source).add("world", w);
    let forward = match forward_model_neg(&red, source, w) {
        Ok(m) => m,
        Err(e @ (NegError::Precondition(_) | NegError::Construction(_))) => return Ok(failed(report, "forward", e)),
        Err(e) => return Err(neg_error(e)),
    };
    report.add("forward", "pass");
    let target = reduced.unwrap_or(&forward);
    world_in(target, w)?;
    let back = match backward_model_neg(&red, target, w) {
        Ok(b) => b,
        Err(
            e @ (NegError::Precondition(_)
            | NegError::Covering { .. }
            | NegError::RuleConflict(_)
            | NegError::Construction(_)),
        ) => return Ok(failed(report, "backward", e)),
        Err(e) => return Err(neg_error(e)),
    };
    let checks = transfer_check(&red, &back.completed, &back.doubled).map_err(neg_error)?;
    report
        .add("backward", "pass")
        .add("completion_added", format!("{} {}", back.added.0, back.added.1))
        .add("doubled_worlds", back.doubled.world_count())
        .add("transfer_checks", checks)
        .add("root", back.world)
        .add("result", "pass");
    Ok(positive(report))
}

fn verify_tables(
    source: &KripkeModel,
    formula: &str,
    w: u32,
    reduced: Option<&KripkeModel>,
    mode: LayerMode,
    max_xi1: u64,
) -> Result<Outcome, CliError> {
    let phi = load_formula(formula, Some(source.vocab()))?;
    let config = TableConfig { max_xi1_conjuncts: max_xi1, ..TableConfig::default() };
    let red = reduce_tables(&phi, None, &config).map_err(table_error)?;
    let mut report = Report::new();
    report.add("reduction", "tables").add("source", &red.source).add("world", w);
    let is_construction = |e: &TableError| {
        matches!(
            e,
            TableError::Precondition(_)
                | TableError::MainLemma(_)
                | TableError::Claim { .. }
                | TableError::Stabilizer(_)
                | TableError::Construction(_)
        )
    };
    let forward = with_fresh_props(&red.star, source).and_then(|m| forward_model_tbl(&red, &m, w));
    let forward = match forward {
        Ok(m) => m,
        Err(e) if is_construction(&e) => return Ok(failed(report, "forward", e)),
        Err(e) => return Err(table_error(e)),
    };
    report.add("forward", "pass");
    let target = reduced.unwrap_or(&forward);
    world_in(target, w)?;
    let back = match backward_model_tbl(&red, target, w, mode) {
        Ok(b) => b,
        Err(e) if is_construction(&e) => return Ok(failed(report, "backward", e)),
        Err(e) => return Err(table_error(e)),
    };
    let holds = check_labeling(&back.model, &red.source).map_err(|e| CliError::Format(e.to_string()))?;
    let holds = holds.contains(back.world);
    report
        .add("backward", "pass")
        .add("layering", if back.cyclic { "cyclic" } else { "truncated" })
        .add("layers", back.layers)
        .add("worlds", back.model.world_count())
        .add("assignments", back.assignments)
        .add("transfer_checks", back.transfer.checked)
        .add("transfer_mismatches", back.transfer.mismatches)
        .add("root", back.world)
        .add("source_holds", holds)
        .add("result", if holds { "pass" } else { "fail" });
    Ok(Outcome { report, negative: !holds })
}

fn encode(model: &Path) -> Result<Outcome, CliError> {
    let m = load_model(model)?;
    let e = encode_list(&m);
    let mut report = Report::new();
    report.add("bytes", String::from_utf8_lossy(&e.bytes)).add("size", e.size);
    Ok(positive(report))
}
