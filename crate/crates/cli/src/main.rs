use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use bidex::chase::{annotated_chase_traced, ChaseOutcome};
use bidex::labeling::TupleLabeling;
use bidex::mapping::{
    affected_positions, annotation_cardinality, annotation_density, check_safety, is_gav_reducible,
    parse_mapping, translate_tgds, MappingProgram,
};
use bidex::oracle::{
    candidate_instances, certain_oracle, check_abd_solution, check_inference_solution,
    check_owa_solution, enumerate_abd_solutions, enumerate_inference_solutions,
    exists_solution_general, gcwa_star_solutions, owa_solutions, DomainBudget, OracleAnswer,
    Semantics,
};
use bidex::query::{certain_answers, CertainOutcome};
use bidex::reductions::{self, Graph, Reduction};
use bidex::{parse_query, Instance, Query, Term};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

const TRUE: u8 = 0;
const FALSE: u8 = 1;
const USAGE: u8 = 2;
const CHASE_FAILED: u8 = 3;
const BUDGET: u8 = 4;

/// Annotated bidirectional data exchange.
#[derive(Parser)]
#[command(name = "bidex", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct BudgetArgs {
    /// Fresh constants added to the active domain.
    #[arg(long, default_value_t = 2)]
    budget_extra_constants: usize,
    /// Largest candidate instance, in facts.
    #[arg(long, default_value_t = 8)]
    budget_size: usize,
    /// Search nodes before giving up.
    #[arg(long, default_value_t = 2_000_000)]
    budget_nodes: usize,
}

impl BudgetArgs {
    fn budget(&self) -> DomainBudget {
        DomainBudget {
            extra_constants: self.budget_extra_constants,
            max_size: self.budget_size,
            max_nodes: self.budget_nodes,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Rewrite tgds and egds into abds and aegds of density 1.
    Translate {
        #[arg(short)]
        m: PathBuf,
    },
    /// Run the annotated chase and print (T, φ*).
    Chase {
        #[arg(short)]
        m: PathBuf,
        #[arg(short)]
        i: PathBuf,
        /// Also print the tables after the forward and egd steps.
        #[arg(long)]
        trace: bool,
        /// Directory for the table, labels, condition and manifest.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Density, cardinality, affected positions, safety and GAV report.
    Metrics {
        #[arg(short)]
        m: PathBuf,
    },
    /// Is J a solution for I under the chosen semantics?
    CheckSolution {
        #[arg(short)]
        m: PathBuf,
        #[arg(short)]
        i: PathBuf,
        #[arg(short)]
        j: PathBuf,
        #[arg(long, default_value = "abd")]
        semantics: Semantics,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Does I have an ABD solution?
    ExistsSolution {
        #[arg(short)]
        m: PathBuf,
        #[arg(short)]
        i: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Certain answers under the ABD semantics.
    Eval {
        #[arg(short)]
        m: PathBuf,
        #[arg(short)]
        i: PathBuf,
        #[arg(short)]
        q: PathBuf,
    },
    /// Brute-force reference semantics over a bounded domain.
    Oracle {
        #[command(subcommand)]
        cmd: OracleCmd,
    },
    /// Hardness instances from graphs.
    Gen {
        #[command(subcommand)]
        cmd: GenCmd,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    /// One JSON line per solution, or per candidate with --candidates.
    Enumerate {
        #[arg(short)]
        m: PathBuf,
        #[arg(short)]
        i: PathBuf,
        #[arg(long, default_value = "abd")]
        semantics: Semantics,
        /// Report every candidate instance with its verdict (abd only).
        #[arg(long)]
        candidates: bool,
        /// Directory for solutions.jsonl and the manifest.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Intersection of the query answers over all bounded solutions.
    Certain {
        #[arg(short)]
        m: PathBuf,
        #[arg(short)]
        i: PathBuf,
        #[arg(short)]
        q: PathBuf,
        #[arg(long, default_value = "abd")]
        semantics: Semantics,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Compare the exact evaluator with the oracle on the same input.
    Compare {
        #[arg(short)]
        m: PathBuf,
        #[arg(short)]
        i: PathBuf,
        #[arg(short)]
        q: PathBuf,
        #[arg(long, default_value = "abd")]
        semantics: Semantics,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

#[derive(Args)]
struct GenArgs {
    /// Edge list: `u v` or `u` per line.
    #[arg(short, long)]
    graph: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum GenCmd {
    ThreeColExist(GenArgs),
    ThreeColCheck(GenArgs),
    ThreeColEval(GenArgs),
    Clique {
        #[command(flatten)]
        args: GenArgs,
        #[arg(short, default_value_t = 3)]
        k: usize,
    },
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_mapping(path: &Path) -> anyhow::Result<MappingProgram> {
    parse_mapping(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_facts(path: &Path) -> anyhow::Result<Instance> {
    Instance::parse(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_query(path: &Path) -> anyhow::Result<Query> {
    parse_query(&read(path)?).with_context(|| format!("in {}", path.display()))
}

/// Plain programs are translated first.
fn annotated(p: MappingProgram) -> anyhow::Result<MappingProgram> {
    if p.tgds.is_empty() && p.egds.is_empty() {
        return Ok(p);
    }
    let t = translate_tgds(&p)?;
    for w in &t.warnings {
        eprintln!("warning: {w}");
    }
    Ok(t.program)
}

/// The program a semantics reads: abds for ABD, tgds otherwise.
fn for_semantics(sem: Semantics, p: MappingProgram) -> anyhow::Result<MappingProgram> {
    match sem {
        Semantics::Abd => annotated(p),
        _ if p.is_annotated() => bail!("the {sem} semantics needs tgds and egds, not abds"),
        _ => Ok(p),
    }
}

fn verdict(b: bool) -> u8 {
    if b {
        TRUE
    } else {
        FALSE
    }
}

fn facts_json(j: &Instance) -> Value {
    j.iter().map(|f| f.to_string()).collect()
}

fn labeling_json(l: &TupleLabeling) -> Value {
    l.iter()
        .map(|(f, a)| (f.to_string(), json!(a)))
        .collect::<serde_json::Map<_, _>>()
        .into()
}

fn tuples_json(ts: &BTreeSet<Vec<Term>>) -> Value {
    ts.iter()
        .map(|t| t.iter().map(|x| x.to_string()).collect::<Vec<_>>())
        .collect()
}

fn print_answers(q: &Query, answers: &BTreeSet<Vec<Term>>) {
    if q.is_boolean() {
        println!("{}", answers.contains(&Vec::new()));
    } else {
        for t in answers {
            let t: Vec<String> = t.iter().map(|x| x.to_string()).collect();
            println!("({})", t.join(", "));
        }
    }
}

/// Exit code for an answer set: boolean queries report their truth.
fn answers_code(q: &Query, answers: &BTreeSet<Vec<Term>>) -> u8 {
    verdict(!q.is_boolean() || answers.contains(&Vec::new()))
}

fn write_manifest(
    dir: &Path,
    command: &str,
    params: Value,
    artifacts: &[&str],
) -> anyhow::Result<()> {
    let manifest = json!({ "command": command, "parameters": params, "artifacts": artifacts });
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(())
}

fn chase(m: &Path, i: &Path, trace: bool, out: Option<&Path>) -> anyhow::Result<u8> {
    let p = annotated(load_mapping(m)?)?;
    let src = load_facts(i)?;
    let (outcome, steps) = annotated_chase_traced(&src, &p)?;
    if trace {
        println!("# after the forward step\n{}", steps.forward);
        if let Some(t) = &steps.egd {
            println!("# after the egd step\n{t}");
        }
    }
    let params = json!({ "mapping": m, "facts": i });
    match outcome {
        ChaseOutcome::Success(r) => {
            println!("# table\n{}", r.table);
            println!("# labels\n{}", r.labels);
            println!(
                "# condition\n{}",
                if r.condition.is_trivial() {
                    "true\n".to_string()
                } else {
                    r.condition.to_string()
                }
            );
            if !r.authoritative {
                eprintln!("note: density above 1, rep(T, φ*) may differ from the solution set");
            }
            if let Some(dir) = out {
                fs::create_dir_all(dir)?;
                fs::write(dir.join("table.facts"), r.table.to_string())?;
                fs::write(dir.join("labels.txt"), r.labels.to_string())?;
                fs::write(dir.join("condition.txt"), r.condition.to_string())?;
                write_manifest(
                    dir,
                    "chase",
                    params,
                    &["table.facts", "labels.txt", "condition.txt"],
                )?;
            }
            Ok(TRUE)
        }
        ChaseOutcome::Failure(f) => {
            eprintln!("{f}");
            if let Some(dir) = out {
                fs::create_dir_all(dir)?;
                fs::write(dir.join("failure.txt"), format!("{f}\n"))?;
                write_manifest(dir, "chase", params, &["failure.txt"])?;
            }
            Ok(CHASE_FAILED)
        }
    }
}

fn metrics(m: &Path) -> anyhow::Result<u8> {
    let plain = load_mapping(m)?;
    let gav = (!plain.tgds.is_empty()).then(|| is_gav_reducible(&plain.tgds));
    let p = annotated(plain)?;
    let d = annotation_density(&p);
    let c = annotation_cardinality(&p);
    println!("density: {}", d.overall);
    for (r, n) in &d.per_relation {
        println!("  {r}: {n}");
    }
    println!("cardinality: {}", c.overall);
    for (r, n) in &c.per_relation {
        println!("  {r}: {n}");
    }
    let aff: Vec<String> = affected_positions(&p)
        .iter()
        .map(|(r, a, k)| format!("{r}@{a}[{k}]"))
        .collect();
    println!(
        "affected positions: {}",
        if aff.is_empty() {
            "none".into()
        } else {
            aff.join(", ")
        }
    );
    let s = check_safety(&p);
    println!("safe: {}", s.safe);
    for (k, v) in &s.offending {
        println!("  aegd {} repeats {v} on an affected position", k + 1);
    }
    if let Some(g) = gav {
        println!("gav-reducible: {g}");
    }
    Ok(TRUE)
}

fn check_solution(
    m: &Path,
    i: &Path,
    j: &Path,
    sem: Semantics,
    budget: DomainBudget,
) -> anyhow::Result<u8> {
    let p = for_semantics(sem, load_mapping(m)?)?;
    let (src, cand) = (load_facts(i)?, load_facts(j)?);
    let ok = match sem {
        Semantics::Abd => match check_abd_solution(&src, &p, &cand, budget.max_nodes)? {
            Some(l) => {
                println!("true\n# labeling\n{l}");
                return Ok(TRUE);
            }
            None => false,
        },
        Semantics::Inference => check_inference_solution(&src, &p, &cand, budget.max_nodes)?,
        Semantics::Owa => check_owa_solution(&src, &p, &cand)?,
        Semantics::GcwaStar => {
            eprintln!("note: bounded check, {budget}");
            gcwa_star_solutions(&src, &p, &budget)?.contains(&cand)
        }
    };
    println!("{ok}");
    Ok(verdict(ok))
}

fn exists_solution(m: &Path, i: &Path, budget: DomainBudget) -> anyhow::Result<u8> {
    let p = annotated(load_mapping(m)?)?;
    let v = exists_solution_general(&load_facts(i)?, &p, &budget)?;
    println!("{}", v.exists);
    if !v.authoritative {
        eprintln!("note: bounded search, {budget}");
    }
    if let Some(w) = v.witness {
        println!("# witness\n{w}");
    }
    Ok(verdict(v.exists))
}

fn eval(m: &Path, i: &Path, q: &Path) -> anyhow::Result<u8> {
    let p = annotated(load_mapping(m)?)?;
    let q = load_query(q)?;
    match certain_answers(&load_facts(i)?, &p, &q)? {
        CertainOutcome::Answers { class, answers } => {
            eprintln!("query class: {class}");
            print_answers(&q, &answers);
            Ok(answers_code(&q, &answers))
        }
        CertainOutcome::NoSolutions(f) => {
            eprintln!("{f}; every query is certain");
            println!("true");
            Ok(CHASE_FAILED)
        }
        CertainOutcome::Unsupported { class, reason } => {
            eprintln!("no exact evaluator for class {class}: {reason}");
            Ok(USAGE)
        }
    }
}

fn solutions(
    sem: Semantics,
    src: &Instance,
    p: &MappingProgram,
    budget: &DomainBudget,
) -> anyhow::Result<Vec<Value>> {
    Ok(match sem {
        Semantics::Abd => enumerate_abd_solutions(src, p, budget)?
            .iter()
            .map(|(j, l)| json!({ "instance": facts_json(j), "labeling": labeling_json(l) }))
            .collect(),
        _ => {
            let all = match sem {
                Semantics::Inference => enumerate_inference_solutions(src, p, budget)?,
                Semantics::Owa => owa_solutions(src, p, budget)?,
                _ => gcwa_star_solutions(src, p, budget)?,
            };
            all.iter()
                .map(|j| json!({ "instance": facts_json(j) }))
                .collect()
        }
    })
}

fn oracle_enumerate(
    m: &Path,
    i: &Path,
    sem: Semantics,
    with_candidates: bool,
    out: Option<&Path>,
    budget: DomainBudget,
) -> anyhow::Result<u8> {
    let p = for_semantics(sem, load_mapping(m)?)?;
    let src = load_facts(i)?;
    let records: Vec<Value> = if with_candidates {
        if sem != Semantics::Abd {
            bail!("--candidates is only available for the abd semantics");
        }
        let sols = enumerate_abd_solutions(&src, &p, &budget)?;
        candidate_instances(&src, &p, &budget)?
            .iter()
            .map(|j| match sols.get(j) {
                Some(l) => json!({ "instance": facts_json(j), "solution": true, "labeling": labeling_json(l) }),
                None => json!({ "instance": facts_json(j), "solution": false }),
            })
            .collect()
    } else {
        solutions(sem, &src, &p, &budget)?
    };
    let found = records
        .iter()
        .any(|r| r.get("solution").map_or(true, |s| s == true));
    let lines: String = records.iter().map(|r| r.to_string() + "\n").collect();
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("solutions.jsonl"), &lines)?;
            let params = json!({
                "mapping": m, "facts": i, "semantics": sem.to_string(), "candidates": with_candidates,
                "extra_constants": budget.extra_constants, "max_size": budget.max_size,
            });
            write_manifest(dir, "oracle enumerate", params, &["solutions.jsonl"])?;
            println!(
                "{} records written to {}",
                records.len(),
                dir.join("solutions.jsonl").display()
            );
        }
        None => print!("{lines}"),
    }
    Ok(verdict(found))
}

/// Oracle answers over the bounded domain, keeping only tuples over
/// constants of the source and the query.
fn oracle_answers(
    sem: Semantics,
    src: &Instance,
    p: &MappingProgram,
    q: &Query,
    budget: &DomainBudget,
) -> anyhow::Result<OracleAnswer> {
    let mut known = src.constants();
    known.extend(q.constants());
    Ok(match certain_oracle(sem, src, p, q, budget)? {
        OracleAnswer::Answers(a) => OracleAnswer::Answers(
            a.into_iter()
                .filter(|t| t.iter().all(|x| known.contains(x)))
                .collect(),
        ),
        none => none,
    })
}

fn oracle_certain(
    m: &Path,
    i: &Path,
    q: &Path,
    sem: Semantics,
    budget: DomainBudget,
) -> anyhow::Result<u8> {
    let p = for_semantics(sem, load_mapping(m)?)?;
    let q = load_query(q)?;
    eprintln!("note: bounded oracle, {budget}");
    match oracle_answers(sem, &load_facts(i)?, &p, &q, &budget)? {
        OracleAnswer::NoSolutions => {
            eprintln!("no solution within the budget; every query is certain");
            println!("true");
            Ok(FALSE)
        }
        OracleAnswer::Answers(a) => {
            print_answers(&q, &a);
            Ok(answers_code(&q, &a))
        }
    }
}

fn oracle_compare(
    m: &Path,
    i: &Path,
    q: &Path,
    sem: Semantics,
    budget: DomainBudget,
) -> anyhow::Result<u8> {
    let plain = load_mapping(m)?;
    let p = for_semantics(sem, plain.clone())?;
    let abd = annotated(plain)?;
    let q = load_query(q)?;
    let src = load_facts(i)?;
    let fast = match certain_answers(&src, &abd, &q)? {
        CertainOutcome::Answers { class, answers } => {
            json!({ "class": class.to_string(), "answers": tuples_json(&answers) })
        }
        CertainOutcome::NoSolutions(f) => json!({ "no_solutions": f.to_string() }),
        CertainOutcome::Unsupported { class, reason } => {
            eprintln!("no exact evaluator for class {class}: {reason}");
            return Ok(USAGE);
        }
    };
    let oracle = match oracle_answers(sem, &src, &p, &q, &budget)? {
        OracleAnswer::Answers(a) => json!({ "answers": tuples_json(&a) }),
        OracleAnswer::NoSolutions => json!({ "no_solutions": "none within the budget" }),
    };
    let agree = fast.get("answers") == oracle.get("answers")
        && fast.get("no_solutions").is_some() == oracle.get("no_solutions").is_some();
    let record = json!({
        "query": q.to_string(), "semantics": sem.to_string(),
        "extra_constants": budget.extra_constants, "max_size": budget.max_size,
        "evaluator": fast, "oracle": oracle, "agree": agree,
    });
    println!("{record}");
    Ok(verdict(agree))
}

fn gen(cmd: GenCmd) -> anyhow::Result<u8> {
    let (name, args, k) = match cmd {
        GenCmd::ThreeColExist(a) => ("three-col-exist", a, None),
        GenCmd::ThreeColCheck(a) => ("three-col-check", a, None),
        GenCmd::ThreeColEval(a) => ("three-col-eval", a, None),
        GenCmd::Clique { args, k } => ("clique", args, Some(k)),
    };
    let g = Graph::parse(&read(&args.graph)?)
        .with_context(|| format!("in {}", args.graph.display()))?;
    let r: Reduction = match (name, k) {
        ("three-col-exist", _) => reductions::three_col_exist(&g),
        ("three-col-check", _) => reductions::three_col_check(&g),
        ("three-col-eval", _) => reductions::three_col_eval(&g),
        (_, Some(k)) if k >= 2 => reductions::clique(&g, k),
        _ => bail!("clique size must be at least 2"),
    };
    let dir = &args.out;
    fs::create_dir_all(dir)?;
    let mut artifacts = vec!["mapping.map", "source.facts"];
    fs::write(dir.join("mapping.map"), r.mapping.to_string())?;
    fs::write(dir.join("source.facts"), r.source.to_string())?;
    if let Some(j) = &r.candidate {
        fs::write(dir.join("candidate.facts"), j.to_string())?;
        artifacts.push("candidate.facts");
    }
    if let Some(q) = &r.query {
        fs::write(dir.join("query.q"), format!("{q}\n"))?;
        artifacts.push("query.q");
    }
    let bipartite = g.is_bipartite();
    let note = match name {
        "three-col-exist" | "three-col-check" if bipartite => {
            "graph is 2-colorable, so the answer is true without search"
        }
        "three-col-exist" => "graph is not 2-colorable; run exists-solution",
        "three-col-check" => "graph is not 2-colorable; run check-solution with the candidate",
        "three-col-eval" => "the query is certain iff the graph is not 3-colorable",
        _ => "the query is certain iff the graph has no clique of size k",
    };
    fs::write(dir.join("note.txt"), format!("{note}\n"))?;
    artifacts.push("note.txt");
    let params = json!({
        "graph": args.graph, "vertices": g.vertices.len(), "edges": g.edges.len(),
        "k": k, "two_colorable": bipartite,
    });
    write_manifest(dir, &format!("gen {name}"), params, &artifacts)?;
    println!("{note}");
    println!("wrote {} to {}", artifacts.join(", "), dir.display());
    Ok(TRUE)
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.cmd {
        Cmd::Translate { m } => {
            print!("{}", annotated(load_mapping(&m)?)?);
            Ok(TRUE)
        }
        Cmd::Chase { m, i, trace, out } => chase(&m, &i, trace, out.as_deref()),
        Cmd::Metrics { m } => metrics(&m),
        Cmd::CheckSolution {
            m,
            i,
            j,
            semantics,
            budget,
        } => check_solution(&m, &i, &j, semantics, budget.budget()),
        Cmd::ExistsSolution { m, i, budget } => exists_solution(&m, &i, budget.budget()),
        Cmd::Eval { m, i, q } => eval(&m, &i, &q),
        Cmd::Oracle { cmd } => match cmd {
            OracleCmd::Enumerate {
                m,
                i,
                semantics,
                candidates,
                out,
                budget,
            } => oracle_enumerate(
                &m,
                &i,
                semantics,
                candidates,
                out.as_deref(),
                budget.budget(),
            ),
            OracleCmd::Certain {
                m,
                i,
                q,
                semantics,
                budget,
            } => oracle_certain(&m, &i, &q, semantics, budget.budget()),
            OracleCmd::Compare {
                m,
                i,
                q,
                semantics,
                budget,
            } => oracle_compare(&m, &i, &q, semantics, budget.budget()),
        },
        Cmd::Gen { cmd } => gen(cmd),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let budget = e.chain().any(|c| {
                matches!(
                    c.downcast_ref::<bidex::Error>(),
                    Some(bidex::Error::Budget(_))
                )
            });
            ExitCode::from(if budget { BUDGET } else { USAGE })
        }
    }
}
