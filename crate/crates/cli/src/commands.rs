//! One handler per subcommand. Core kernels run sequentially; parallelism is
//! only across input files.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use qgraph::coloring::{
    abelian_loc_coloring, chromatic_bounds, rigidity_check, shift_multiply_coloring, teleport_coloring,
};
use qgraph::correlation::{
    bisynchronous_report, check_synchronous, compress_to_classical, correlation_from_tensor, correlation_from_trace,
    embed_classical, synchronous_identities,
};
use qgraph::game::{compose_reps, PreparedGame};
use qgraph::graph::{chromatic_number, hom_exists};
use qgraph::strategy::{dilate_block_povm, round_almost_pvm, BlockPovm};
use qgraph::{
    Block, BlockStrategy, ClassicalCorrelation, ClassicalGraph, CompleteGraphRep, Correlation, Exec, GameInstance,
    TensorStrategy, Tolerance, VnAlgebra,
};

use crate::input::{load, load_graph, ClassicalStrategy, Family};
use crate::{for_each_input, Command, Failure, GameArgs, Handled, Method, Mode, Outcome, Route};

const SEQ: Exec = Exec::Sequential;

type Results = Vec<(Option<PathBuf>, Handled)>;

fn to_json<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn judged<T: Serialize>(x: &T, pass: bool) -> Handled {
    Ok(Outcome { value: to_json(x), pass })
}

fn produced<T: Serialize>(x: &T) -> Handled {
    Ok(Outcome::pass(to_json(x)))
}

fn load_game(args: &GameArgs) -> Result<GameInstance, Failure> {
    let source = load_graph(&args.source)?;
    let target = match (&args.target, args.complete) {
        (Some(p), _) => load::<ClassicalGraph>(p)?,
        (None, Some(c)) => ClassicalGraph::complete(c),
        (None, None) => return Err(Failure::malformed("need --target or --complete")),
    };
    Ok(GameInstance::new(source, target))
}

fn prepare(inst: &GameInstance, tol: Tolerance) -> Result<PreparedGame<'_>, Failure> {
    Ok(inst.prepare(tol)?.with_exec(SEQ))
}

pub fn dispatch(cmd: &Command, tol: Tolerance, jobs: usize) -> Result<Results, Failure> {
    match cmd {
        Command::Validate { inputs } => for_each_input(inputs, jobs, |p| {
            let r = load_graph(p)?.validate(tol);
            judged(&r, r.pass)
        }),
        Command::EdgeBasis { game, inputs } => for_each_input(inputs, jobs, |p| {
            let g = load_graph(p)?;
            produced(&if *game { g.game_edge_basis(tol)? } else { g.edge_basis(tol)? })
        }),
        Command::Dilate { inputs } => for_each_input(inputs, jobs, |p| {
            let q: BlockPovm = load(p)?;
            produced(&dilate_block_povm(&q, tol)?)
        }),
        Command::RoundPvm { inputs } => for_each_input(inputs, jobs, |p| {
            let f: Family = load(p)?;
            produced(&round_almost_pvm(&f.ops)?)
        }),
        Command::Color { method, d, k, algebra, rigidity } => {
            Ok(vec![(None, color(*method, *d, *k, algebra.as_deref(), *rigidity, tol))])
        }
        Command::VerifyHom { game, mode, inputs } => {
            let inst = load_game(game)?;
            let prepared = prepare(&inst, tol)?;
            for_each_input(inputs, jobs, |p| {
                let s: BlockStrategy = load(p)?;
                let r = match mode {
                    Mode::Structural => prepared.verify_structural(&s)?,
                    Mode::Operational => prepared.verify_operational(&s)?,
                    Mode::AlgebraRep => prepared.check_game_algebra_rep(&s)?,
                };
                judged(&r, r.pass)
            })
        }
        Command::Correlation { from, inputs } => for_each_input(inputs, jobs, |p| match from {
            Route::Trace => produced(&correlation_from_trace(&load::<BlockStrategy>(p)?, SEQ)),
            Route::Tensor => {
                let t: TensorStrategy = load(p)?;
                t.validate(tol)?;
                produced(&correlation_from_tensor(&t, SEQ)?)
            }
        }),
        Command::CheckSync { inputs } => for_each_input(inputs, jobs, |p| {
            let r = check_synchronous(&load::<Correlation>(p)?, tol);
            judged(&r, r.synchronous)
        }),
        Command::Identities { inputs } => for_each_input(inputs, jobs, |p| {
            let r = synchronous_identities(&load::<Correlation>(p)?, tol);
            judged(&r, r.pass)
        }),
        Command::Compress { inputs } => {
            for_each_input(inputs, jobs, |p| produced(&compress_to_classical(&load::<Correlation>(p)?)))
        }
        Command::Embed { inputs } => for_each_input(inputs, jobs, |p| {
            let s: ClassicalStrategy = load(p)?;
            produced(&embed_classical(&s.families, s.ancilla, tol)?)
        }),
        Command::Bisync { inputs } => for_each_input(inputs, jobs, |p| {
            let r = bisynchronous_report(&load::<ClassicalCorrelation>(p)?, tol);
            judged(&r, r.pass)
        }),
        Command::ExtractChannel { game, inputs } => {
            let inst = load_game(game)?;
            let prepared = prepare(&inst, tol)?;
            for_each_input(inputs, jobs, |p| {
                let ch = prepared.channel_report(&load::<BlockStrategy>(p)?)?;
                judged(&ch, ch.report.pass)
            })
        }
        Command::Compose { source, rep, map, colors, inputs } => {
            let g = load_graph(source)?;
            let rep = match (rep, map, colors) {
                (Some(path), _, _) => load::<CompleteGraphRep>(path)?,
                (None, Some(map), Some(r)) => CompleteGraphRep::from_map(map.len(), *r, map)?,
                _ => return Err(Failure::malformed("need --rep, or --map with --colors")),
            };
            for_each_input(inputs, jobs, |p| {
                let out = compose_reps(&g, &load::<BlockStrategy>(p)?, &rep, tol)?;
                judged(&out, out.report.pass)
            })
        }
        Command::Bounds { inputs } => {
            for_each_input(inputs, jobs, |p| produced(&chromatic_bounds(&load_graph(p)?, tol, SEQ)?))
        }
        Command::ClassicalChromatic { hom_to, cap, inputs } => {
            let target = hom_to.as_deref().map(load::<ClassicalGraph>).transpose()?;
            for_each_input(inputs, jobs, |p| {
                let g: ClassicalGraph = load(p)?;
                match &target {
                    Some(h) => {
                        let f = hom_exists(&g, h, *cap)?;
                        Ok(Outcome::pass(json!({"hom": f.is_some(), "map": f})))
                    }
                    None => {
                        let (chi, coloring) = chromatic_number(&g, *cap)?;
                        Ok(Outcome::pass(json!({"chromatic_number": chi, "coloring": coloring})))
                    }
                }
            })
        }
    }
}

fn color(method: Method, d: Option<usize>, k: Option<usize>, algebra: Option<&Path>, rigidity: bool, tol: Tolerance) -> Handled {
    let alg = match (method, algebra) {
        (Method::Teleport, _) => {
            let (d, k) = d.zip(k).ok_or_else(|| Failure::malformed("teleport needs --d and --k"))?;
            VnAlgebra::canonical(vec![Block::new(d, k)])?
        }
        (_, Some(path)) => load::<VnAlgebra>(path)?,
        (_, None) => return Err(Failure::malformed("this method needs --algebra")),
    };
    let s = match method {
        Method::Teleport => {
            let b = alg.blocks()[0];
            teleport_coloring(b.mult, b.dim)?
        }
        Method::ShiftMultiply => shift_multiply_coloring(&alg)?,
        Method::AbelianLoc => abelian_loc_coloring(&alg)?,
    };
    if !rigidity {
        return produced(&s);
    }
    let report = rigidity_check(&s, &alg, tol)?;
    let pass = report.verification.pass && report.rigidity.as_ref().is_none_or(|r| r.report.pass);
    judged(&report, pass)
}
