use std::fs;
use std::io::Read;
use std::path::Path;

use serde_json::{json, Value};
use tensor_attain::experiment::{run_experiment, ExperimentConfig, CSV_FILE, REPORT_FILE};
use tensor_attain::io::{hypermatrix_to_json, parse_mask, parse_tensor, tensor_to_json};
use tensor_attain::solvers::{
    block_term_solve, cp_als, diagnose, masked_cp_als, splr_solve, symmetric_approx, BlockSpec,
    CpDecomposition, SolveOptions, SolveReport, SparsitySpec,
};
use tensor_attain::varieties::{
    difference_quotient, parse_witness, structured_tangent, AnyWitness, StructuredSpec,
    TangentWitness,
};
use tensor_attain::witness::{classify_2x2x2, classify_hypermatrix, dsl_open_witness};
use tensor_attain::{Hypermatrix, Scalar, Tensor};

use crate::{
    ApproxArgs, BlockTermArgs, Cli, CliError, Command, CompleteArgs, Dsl, ExperimentArgs, SplrArgs,
    WitnessArgs,
};

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cli: &Cli) -> Result<()> {
    let value = match &cli.command {
        Command::Witness(args) => witness(args)?,
        Command::Rank2x2x2(args) => {
            let cert = classify_hypermatrix(&parse_tensor(&read(&args.input)?)?)?;
            serde_json::to_value(cert)?
        }
        Command::Approx(args) => approx(args)?,
        Command::Complete(args) => complete(args)?,
        Command::Splr(args) => splr(args)?,
        Command::Blockterm(args) => blockterm(args)?,
        Command::Experiment(args) => experiment(args)?,
    };
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    match &cli.output {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text)?;
        Ok(text)
    } else {
        Ok(fs::read_to_string(path)?)
    }
}

fn e(i: usize) -> Vec<f64> {
    (0..2).map(|k| if k == i { 1.0 } else { 0.0 }).collect()
}

fn witness(args: &WitnessArgs) -> Result<Value> {
    if let Some(&bad) = args.t.iter().find(|&&t| !(t > 0.0 && t.is_finite())) {
        return Err(CliError::Usage(format!(
            "--t values must be positive and finite, got {bad}"
        )));
    }
    let w = match (&args.source.input, args.source.dsl) {
        (Some(path), _) => parse_witness(&read(path)?)?,
        (None, Some(Dsl::Tangent)) => {
            let spec = StructuredSpec::segre(2, 3)?;
            AnyWitness::Real(TangentWitness::new(
                spec,
                vec![vec![e(0)]; 3],
                vec![vec![e(1)]; 3],
            )?)
        }
        (None, Some(Dsl::Open)) => {
            let a = dsl_open_witness(&e(0), &e(1))?;
            return Ok(json!({
                "tensor": tensor_to_json(&a),
                "certificate": classify_2x2x2(&a)?,
            }));
        }
        (None, None) => unreachable!("clap requires a source"),
    };
    let tangent = w.tangent()?;
    let limits = match &w {
        AnyWitness::Real(w) => limits(w, &args.t)?,
        AnyWitness::Complex(w) => limits(w, &args.t)?,
    };
    let certificate = match tangent.shape() {
        [2, 2, 2] => Some(serde_json::to_value(classify_hypermatrix(&tangent)?)?),
        _ => None,
    };
    Ok(json!({
        "point": hypermatrix_to_json(&w.point()?),
        "tangent": hypermatrix_to_json(&tangent),
        "condition": w.condition(),
        "limits": limits,
        "certificate": certificate,
    }))
}

/// `‖W − B_t‖ / ‖W‖` for each step size.
fn limits<S: Scalar>(w: &TangentWitness<S>, ts: &[f64]) -> Result<Vec<Value>> {
    let tangent = structured_tangent(w)?;
    let norm = tangent.norm();
    ts.iter()
        .map(|&t| {
            let b = difference_quotient(w, t)?;
            let err = tangent.sub(&b)?.norm();
            Ok(json!({ "t": t, "relative_error": if norm > 0.0 { err / norm } else { err } }))
        })
        .collect()
}

fn solved<S: Scalar>(
    a: &Tensor<S>,
    model: &CpDecomposition<S>,
    report: &SolveReport,
) -> Result<Value> {
    Ok(json!({
        "decomposition": model.to_json(),
        "reconstruction": tensor_to_json(&model.reconstruct()),
        "diagnosis": diagnose(model, Some(a))?,
        "report": report,
    }))
}

fn approx(args: &ApproxArgs) -> Result<Value> {
    let opts = args.solver.options()?;
    let a = parse_tensor(&read(&args.input.input)?)?;
    let a = if args.complex {
        Hypermatrix::Complex(a.promote())
    } else {
        a
    };
    match a {
        Hypermatrix::Real(t) => approx_in(&t, args.rank, args.symmetric, &opts),
        Hypermatrix::Complex(t) => approx_in(&t, args.rank, args.symmetric, &opts),
    }
}

fn approx_in<S: Scalar>(
    a: &Tensor<S>,
    r: usize,
    symmetric: bool,
    opts: &SolveOptions,
) -> Result<Value> {
    let (model, report) = if symmetric {
        symmetric_approx(a, r, opts)?
    } else {
        cp_als(a, r, opts)?
    };
    solved(a, &model, &report)
}

fn complete(args: &CompleteArgs) -> Result<Value> {
    let opts = args.solver.options()?;
    let a = parse_tensor(&read(&args.input.input)?)?;
    let mask = parse_mask(&read(&args.mask)?, a.shape())?;
    match a {
        Hypermatrix::Real(t) => {
            let (m, rep) = masked_cp_als(&t, &mask, args.rank, &opts)?;
            solved(&t, &m, &rep)
        }
        Hypermatrix::Complex(t) => {
            let (m, rep) = masked_cp_als(&t, &mask, args.rank, &opts)?;
            solved(&t, &m, &rep)
        }
    }
}

fn splr(args: &SplrArgs) -> Result<Value> {
    let opts = args.solver.options()?;
    let a = parse_tensor(&read(&args.input.input)?)?;
    let sparsity = match (&args.support.pattern, args.support.top_k) {
        (Some(path), _) => SparsitySpec::Fixed(parse_mask(&read(path)?, a.shape())?),
        (None, Some(k)) => SparsitySpec::TopK(k),
        (None, None) => unreachable!("clap requires a support"),
    };
    match a {
        Hypermatrix::Real(t) => splr_in(&t, args.rank, &sparsity, &opts),
        Hypermatrix::Complex(t) => splr_in(&t, args.rank, &sparsity, &opts),
    }
}

fn splr_in<S: Scalar>(
    a: &Tensor<S>,
    r: usize,
    sparsity: &SparsitySpec,
    opts: &SolveOptions,
) -> Result<Value> {
    let res = splr_solve(a, r, sparsity, opts)?;
    Ok(json!({
        "low_rank": res.b.to_json(),
        "sparse": tensor_to_json(&res.c),
        "sum": tensor_to_json(&res.sum),
        "report": res.report,
    }))
}

fn blockterm(args: &BlockTermArgs) -> Result<Value> {
    let opts = args.solver.options()?;
    let spec: BlockSpec = args.blocks.parse()?;
    match parse_tensor(&read(&args.input.input)?)? {
        Hypermatrix::Real(t) => blockterm_in(&t, &spec, &opts),
        Hypermatrix::Complex(t) => blockterm_in(&t, &spec, &opts),
    }
}

fn blockterm_in<S: Scalar>(a: &Tensor<S>, spec: &BlockSpec, opts: &SolveOptions) -> Result<Value> {
    let res = block_term_solve(a, spec, opts)?;
    let blocks: Vec<Value> = res.blocks.iter().map(tensor_to_json).collect();
    Ok(json!({ "spec": spec, "blocks": blocks, "report": res.report }))
}

fn experiment(args: &ExperimentArgs) -> Result<Value> {
    let mut config = ExperimentConfig::from_json(&read(&args.config)?)?;
    if let Some(out) = &args.out {
        config.output = Some(out.clone());
    }
    let Some(dir) = config.output.clone() else {
        return Err(CliError::Usage(
            "experiment needs --out or an `output` entry in the config".into(),
        ));
    };
    let report = run_experiment(&config)?;
    Ok(json!({
        "report": dir.join(REPORT_FILE),
        "csv": dir.join(CSV_FILE),
        "rows": report.rows.len(),
        "summary": report.summary,
    }))
}
