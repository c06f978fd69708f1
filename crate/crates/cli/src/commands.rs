//! The `compute`, `sweep`, `ipp`, `report` and `verify` commands.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use fraccalc::limits::{
    boundedness_report, default_eps_list, embedding_report, ipp_residual, marchaud_eps_diagnostic, sweep_s_to_one_norm,
    sweep_s_to_zero, BoundednessPoint, EmbeddingReport, IppReport, SweepReport, BOUNDEDNESS_ORDERS, S_TO_ONE_DEFAULT,
    S_TO_ZERO_DEFAULT,
};
use fraccalc::operators::{caputo_derivative, marchaud_derivative, rl_derivative, rl_integral};
use fraccalc::{CorpusFunction, FracParams, Grid, OperatorResult, SbvFunction, Side};

use crate::config::{CommandKind, Format, Operator, RunConfig, SweepKind};
use crate::error::{CliError, CliResult};
use crate::output::{emit, fmt_num, fmt_opt, Chart, Series, Table, VERSION_LINE};
use crate::verify;

/// Second function for `ipp` when `--with` is absent.
pub const DEFAULT_IPP_WITH: &str = "poly:1,-1";
pub const DEFAULT_IPP_ORDERS: [f64; 3] = [0.3, 0.5, 0.7];
pub const DEFAULT_EMBEDDING_ORDERS: (f64, f64) = (0.3, 0.6);
pub const DEFAULT_REPORT_FN: &str = "weierstrass:2:20";

/// A function ready for the operators, with its corpus entry when it has one.
pub struct Loaded {
    pub u: SbvFunction,
    pub corpus: Option<CorpusFunction>,
}

/// Resolves a corpus name, falling back to a JSON SBV document on disk.
/// A JSON document brings its own grid.
pub fn load_function(spec: &str, grid: &Grid) -> CliResult<Loaded> {
    let bad = |e: fraccalc::Error| CliError::invalid(format!("function '{spec}': {e}"));
    match spec.parse::<CorpusFunction>() {
        Ok(f) => {
            f.validate(grid.a(), grid.b()).map_err(bad)?;
            let u = f.sample(grid).map_err(bad)?;
            Ok(Loaded { u, corpus: Some(f) })
        }
        Err(parse_err) => {
            let path = Path::new(spec);
            if !path.is_file() {
                return Err(bad(parse_err));
            }
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))?;
            let u = SbvFunction::from_json(&text).map_err(bad)?;
            Ok(Loaded { u, corpus: None })
        }
    }
}

fn grid_of(cfg: &RunConfig) -> CliResult<Grid> {
    Grid::new(cfg.interval.0, cfg.interval.1, cfg.grid_n).map_err(|e| CliError::invalid(e.to_string()))
}

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    match cfg.command {
        CommandKind::Compute => compute(cfg),
        CommandKind::Sweep => sweep(cfg),
        CommandKind::Verify => run_verify(cfg),
        CommandKind::Ipp => ipp(cfg),
        CommandKind::Report => report(cfg),
    }
}

fn apply(op: Operator, u: &SbvFunction, s: f64, eps: f64) -> fraccalc::Result<OperatorResult> {
    let (left, side) = match op {
        Operator::RlInt | Operator::RlDer | Operator::Marchaud | Operator::Caputo => (op, Side::Left),
        Operator::RlIntRight => (Operator::RlInt, Side::Right),
        Operator::RlDerRight => (Operator::RlDer, Side::Right),
        Operator::MarchaudRight => (Operator::Marchaud, Side::Right),
        Operator::CaputoRight => (Operator::Caputo, Side::Right),
    };
    let p = FracParams::new(s, side)?;
    match left {
        Operator::RlInt => rl_integral(u, p),
        Operator::RlDer => rl_derivative(u, p),
        Operator::Marchaud => marchaud_derivative(u, p, eps),
        _ => caputo_derivative(u, p),
    }
}

fn oracle(f: &CorpusFunction, op: Operator, s: f64, a: f64, b: f64, x: f64) -> Option<f64> {
    match op {
        Operator::RlInt => f.exact_integral(Side::Left, s, a, b, x),
        Operator::RlIntRight => f.exact_integral(Side::Right, s, a, b, x),
        Operator::RlDer | Operator::Marchaud => f.exact_derivative(Side::Left, s, a, b, x),
        Operator::RlDerRight | Operator::MarchaudRight => f.exact_derivative(Side::Right, s, a, b, x),
        Operator::Caputo => f.exact_caputo(Side::Left, s, a, b, x),
        Operator::CaputoRight => f.exact_caputo(Side::Right, s, a, b, x),
    }
}

#[derive(Serialize)]
struct ComputeDoc<'a> {
    version: &'a str,
    function: &'a str,
    operator: &'a str,
    s: f64,
    eps: Option<f64>,
    singular_at_base: bool,
    x: Vec<f64>,
    value: Vec<Option<f64>>,
    exact: Option<Vec<Option<f64>>>,
}

fn compute(cfg: &RunConfig) -> CliResult<()> {
    let spec = cfg.require_function()?;
    let op = cfg.operator.ok_or_else(|| CliError::invalid("compute needs --op"))?;
    let s = cfg.single_s(None)?;
    let Loaded { u, corpus } = load_function(spec, &grid_of(cfg)?)?;
    let grid = *u.grid();
    let marchaud = matches!(op, Operator::Marchaud | Operator::MarchaudRight);
    let eps = match cfg.eps.as_slice() {
        [] => grid.h(),
        [e] => *e,
        _ => return Err(CliError::invalid("compute takes a single --eps value")),
    };
    let result = apply(op, &u, s, eps)?;
    let base = result.base_index();
    let xs = grid.nodes();
    // The base node carries no value when the result blows up there.
    let defined = |j: usize| !(result.singular_at_base() && j == base);
    let values: Vec<Option<f64>> = result.values().iter().enumerate().map(|(j, v)| defined(j).then_some(*v)).collect();
    let exact: Option<Vec<Option<f64>>> = corpus.as_ref().map(|f| {
        xs.iter()
            .enumerate()
            .map(|(j, &x)| oracle(f, op, s, grid.a(), grid.b(), x).filter(|v| v.is_finite() && defined(j)))
            .collect::<Vec<_>>()
    });
    let exact = exact.filter(|e| e.iter().any(Option::is_some));
    let label = format!("{} s={} fn={spec}", op.name(), fmt_num(s));
    let label = if marchaud { format!("{label} eps={}", fmt_num(eps)) } else { label };

    let text = match cfg.format {
        Format::Csv => {
            let header: &[&str] = if exact.is_some() { &["x", "value", "exact", "abs_error"] } else { &["x", "value"] };
            let mut t = Table::new(format!("compute {label} n={}", grid.n()), header);
            for (j, x) in xs.iter().enumerate() {
                let mut row = vec![fmt_num(*x), fmt_opt(values[j])];
                if let Some(e) = &exact {
                    let err = values[j].zip(e[j]).map(|(v, w)| (v - w).abs());
                    row.push(fmt_opt(e[j]));
                    row.push(fmt_opt(err));
                }
                t.push(row);
            }
            t.to_csv()
        }
        Format::Svg => {
            let pts = |v: &[Option<f64>]| xs.iter().zip(v).map(|(x, y)| (*x, y.unwrap_or(f64::NAN))).collect();
            let mut series = vec![Series::new("computed", pts(&values))];
            if let Some(e) = &exact {
                series.push(Series::new("exact", pts(e)).dashed());
            }
            Chart { title: label, x_label: "x".into(), y_label: op.name().into(), series, rule: None }.to_svg()
        }
        Format::Json => json(&ComputeDoc {
            version: VERSION_LINE.trim_start_matches("# "),
            function: spec,
            operator: op.name(),
            s,
            eps: marchaud.then_some(eps),
            singular_at_base: result.singular_at_base(),
            x: xs.clone(),
            value: values,
            exact,
        })?,
    };
    emit(cfg.output.as_deref(), &text)
}

fn json<T: Serialize>(v: &T) -> CliResult<String> {
    serde_json::to_string_pretty(v)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::invalid(format!("cannot serialize output: {e}")))
}

fn sweep(cfg: &RunConfig) -> CliResult<()> {
    let spec = cfg.require_function()?;
    let kind = cfg.kind.ok_or_else(|| CliError::invalid("sweep needs --kind"))?;
    let Loaded { u, .. } = load_function(spec, &grid_of(cfg)?)?;
    let orders = |default: &[f64]| if cfg.s.is_empty() { default.to_vec() } else { cfg.s.clone() };
    let rep = match kind {
        SweepKind::SToZero => sweep_s_to_zero(&u, &orders(&S_TO_ZERO_DEFAULT))?,
        SweepKind::SToOne => sweep_s_to_one_norm(&u, &orders(&S_TO_ONE_DEFAULT))?,
        SweepKind::MarchaudEps => {
            let s = cfg.single_s(Some(0.5))?;
            let eps = if cfg.eps.is_empty() { default_eps_list(u.grid()) } else { cfg.eps.clone() };
            marchaud_eps_diagnostic(&u, s, &eps, None)?
        }
    };
    let title = format!("{} fn={spec} n={}", kind.name(), u.grid().n());
    let text = match cfg.format {
        Format::Csv => sweep_csv(&rep, &title),
        Format::Svg => sweep_chart(&rep, &title).to_svg(),
        Format::Json => json(&rep)?,
    };
    emit(cfg.output.as_deref(), &text)
}

pub fn sweep_csv(rep: &SweepReport, title: &str) -> String {
    let mut t = Table::new(
        format!("sweep {title} functional={}", rep.functional),
        &[rep.parameter.name(), "functional", "target", "converged"],
    );
    for (p, v) in &rep.points {
        t.push(vec![fmt_num(*p), fmt_num(*v), fmt_opt(rep.target), rep.converged.to_string()]);
    }
    t.to_csv()
}

fn sweep_chart(rep: &SweepReport, title: &str) -> Chart {
    let mut series = vec![Series::new(rep.functional.clone(), rep.points.clone())];
    if let Some(aux) = &rep.auxiliary {
        series.push(Series::new(aux.name.clone(), aux.points.clone()).dashed());
    }
    Chart {
        title: title.into(),
        x_label: rep.parameter.name().into(),
        y_label: rep.functional.clone(),
        series,
        rule: rep.target.map(|t| ("target".to_string(), t)),
    }
}

fn ipp(cfg: &RunConfig) -> CliResult<()> {
    let spec = cfg.require_function()?;
    let with = cfg.with.as_deref().unwrap_or(DEFAULT_IPP_WITH);
    let grid = grid_of(cfg)?;
    let u = load_function(spec, &grid)?.u;
    let v = load_function(with, &grid)?.u;
    let orders = if cfg.s.is_empty() { DEFAULT_IPP_ORDERS.to_vec() } else { cfg.s.clone() };
    let reports = orders.par_iter().map(|&s| ipp_residual(&u, &v, s)).collect::<fraccalc::Result<Vec<IppReport>>>()?;
    let title = format!("ipp u={spec} v={with} n={}", u.grid().n());
    let text = match cfg.format {
        Format::Csv => {
            let mut t = Table::new(title, &["s", "lhs", "rhs", "boundary_b", "boundary_a", "residual"]);
            for r in &reports {
                t.push(
                    [r.s, r.lhs, r.rhs, r.boundary_b, r.boundary_a, r.residual].iter().map(|v| fmt_num(*v)).collect(),
                );
            }
            t.to_csv()
        }
        Format::Svg => Chart {
            title,
            x_label: "s".into(),
            y_label: "pairing".into(),
            series: vec![
                Series::new("lhs", reports.iter().map(|r| (r.s, r.lhs)).collect()),
                Series::new("rhs", reports.iter().map(|r| (r.s, r.rhs)).collect()).dashed(),
            ],
            rule: None,
        }
        .to_svg(),
        Format::Json => json(&reports)?,
    };
    emit(cfg.output.as_deref(), &text)
}

#[derive(Serialize)]
struct EmbeddingRow {
    function: String,
    #[serde(flatten)]
    report: EmbeddingReport,
}

#[derive(Serialize)]
struct ReportDoc {
    embedding: Vec<EmbeddingRow>,
    max_embedding_ratio: f64,
    boundedness_function: String,
    boundedness: Vec<BoundednessPoint>,
}

fn report(cfg: &RunConfig) -> CliResult<()> {
    let grid = grid_of(cfg)?;
    let (s, s_prime) = match cfg.s.as_slice() {
        [] => DEFAULT_EMBEDDING_ORDERS,
        [s, sp] => (*s, *sp),
        _ => return Err(CliError::invalid("report takes --s as 's,s_prime'")),
    };
    let embedding = verify::EMBEDDING_CORPUS
        .par_iter()
        .map(|spec| {
            let u = load_function(spec, &grid)?.u;
            Ok(EmbeddingRow { function: spec.to_string(), report: embedding_report(&u, s, s_prime)? })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let max_embedding_ratio = embedding.iter().map(|r| r.report.ratio).fold(0.0, f64::max);
    let bfn = cfg.function_spec.as_deref().unwrap_or(DEFAULT_REPORT_FN);
    let boundedness = boundedness_report(&load_function(bfn, &grid)?.u, &BOUNDEDNESS_ORDERS)?;
    let doc = ReportDoc { embedding, max_embedding_ratio, boundedness_function: bfn.into(), boundedness };
    let text = match cfg.format {
        Format::Csv => {
            let mut t =
                Table::new(format!("report n={}", grid.n()), &["quantity", "function", "s", "s_prime", "value"]);
            for r in &doc.embedding {
                let e = &r.report;
                t.push(vec![
                    "embedding_ratio".into(),
                    r.function.clone(),
                    fmt_num(e.s),
                    fmt_num(e.s_prime),
                    fmt_num(e.ratio),
                ]);
            }
            t.push(vec![
                "max_embedding_ratio".into(),
                String::new(),
                fmt_num(s),
                fmt_num(s_prime),
                fmt_num(doc.max_embedding_ratio),
            ]);
            for p in &doc.boundedness {
                t.push(vec!["sup_derivative".into(), bfn.into(), fmt_num(p.s), String::new(), fmt_num(p.sup)]);
            }
            t.to_csv()
        }
        Format::Json => json(&doc)?,
        Format::Svg => Chart {
            title: format!("sup |D^s u| for {bfn}"),
            x_label: "s".into(),
            y_label: "sup".into(),
            series: vec![Series::new(bfn, doc.boundedness.iter().map(|p| (p.s, p.sup)).collect())],
            rule: None,
        }
        .to_svg(),
    };
    emit(cfg.output.as_deref(), &text)
}

fn run_verify(cfg: &RunConfig) -> CliResult<()> {
    let results = verify::run(cfg.grid_n, cfg.only.as_deref());
    if results.is_empty() {
        return Err(CliError::invalid(format!("no criterion matches '{}'", cfg.only.as_deref().unwrap_or(""))));
    }
    emit(cfg.output.as_deref(), &verify::format_table(&results))?;
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} of {} criteria failed", results.len())));
    }
    Ok(())
}
