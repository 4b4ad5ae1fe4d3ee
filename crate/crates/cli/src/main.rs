use std::fmt::Display;
use std::fs;
use std::panic;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mucalc_core::canonical::{
    build_canonical, distinctness_check, existence_check, sigma_of, truth_lemma_check,
    CanonicalError, Oracle, OracleConfig, OracleVerdict, UnknownPolicy,
};
use mucalc_core::filtration::{
    build_filtration, filtration_agreement_check, fmp_search, validate_filtration, FiltrationError,
    Strategy,
};
use mucalc_core::formula::{classify_fragment, fl_closure};
use mucalc_core::model_io::{read_model, write_model};
use mucalc_core::proof::{check_derivation, read_derivation, write_derivation};
use mucalc_core::selftest::run_selftest;
use mucalc_core::semantics::{build_arena, eval_algebraic, model_check_equiv, solve_arena};
use mucalc_core::syntax::parse_formula_list;
use mucalc_core::{print_formula, Formula, FrameClass, KripkeModel};

#[derive(Parser)]
#[command(
    name = "mucalc",
    version,
    about = "Continuous modal mu-calculus toolkit"
)]
struct Cli {
    /// Print one JSON object per line.
    #[arg(long, global = true)]
    json: bool,
    /// Directory for witness files written on failure.
    #[arg(long, global = true, default_value = ".")]
    witness_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Engine {
    Algebraic,
    Game,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Pretty-print formulas.
    Fmt { file: PathBuf },
    /// Fragment membership of each formula.
    Classify {
        file: PathBuf,
        /// Comma-separated variables for Con/Cocon.
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
    },
    /// FL-closure of the formulas in a file.
    Closure {
        file: PathBuf,
        /// Close under negation as well.
        #[arg(long)]
        neg: bool,
    },
    /// Model-check a formula.
    Mc {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        formula: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        engine: Engine,
    },
    /// Filtrate a model through the closure of a formula file.
    Filtrate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long, default_value = "min")]
        strategy: Strategy,
        /// Close under negation as well.
        #[arg(long)]
        neg: bool,
        /// Validate the quotient and compare truth on every member.
        #[arg(long)]
        check: bool,
    },
    /// Shrink a refuting witness to a bounded countermodel.
    Fmp {
        #[arg(long)]
        formula: PathBuf,
        #[arg(long)]
        class: FrameClass,
        #[arg(long)]
        witness: PathBuf,
    },
    /// Bounded satisfiability in a frame class.
    Sat {
        #[arg(long)]
        formula: PathBuf,
        #[arg(long, default_value = "K")]
        class: FrameClass,
        #[arg(long, default_value_t = OracleConfig::default().max_states)]
        max_states: usize,
        #[arg(long, default_value_t = OracleConfig::default().depth)]
        depth: usize,
        /// Most models enumerated.
        #[arg(long, default_value_t = OracleConfig::default().budget)]
        budget: u128,
        /// Work bound for the refuter.
        #[arg(long, default_value_t = OracleConfig::default().refuter_steps)]
        steps: usize,
    },
    /// Build the finitary canonical model over the ~FL-closure of a file.
    Canonical {
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long, default_value = "K")]
        logic: FrameClass,
        /// Defaults to the logic's own strategy.
        #[arg(long)]
        strategy: Option<Strategy>,
        #[arg(long)]
        check_all: bool,
        #[arg(long, default_value = "fail")]
        unknown: UnknownPolicy,
        /// Write the model here and the atoms next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a derivation.
    Prove { file: PathBuf },
    /// Run the acceptance suite.
    Selftest {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

enum Failure {
    Violated(String),
    Input(String),
    Unknown(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Violated(_) => 1,
            Failure::Input(_) => 2,
            Failure::Unknown(_) => 3,
            Failure::Internal(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Violated(m)
            | Failure::Input(m)
            | Failure::Unknown(m)
            | Failure::Internal(m) => m,
        }
    }
}

fn input(e: impl Display) -> Failure {
    Failure::Input(e.to_string())
}

type Outcome = Result<(), Failure>;

struct Ctx {
    json: bool,
    witness_dir: PathBuf,
}

impl Ctx {
    fn emit(&self, value: Value, text: impl Display) {
        if self.json {
            println!("{value}");
        } else {
            println!("{text}");
        }
    }

    fn witness(&self, name: &str, contents: &str) -> Result<PathBuf, Failure> {
        fs::create_dir_all(&self.witness_dir).map_err(|e| Failure::Internal(e.to_string()))?;
        let path = self.witness_dir.join(name);
        fs::write(&path, contents)
            .map_err(|e| Failure::Internal(format!("{}: {e}", path.display())))?;
        eprintln!("witness: {}", path.display());
        Ok(path)
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn formulas(path: &Path) -> Result<Vec<Formula>, Failure> {
    parse_formula_list(&read(path)?)
        .map_err(|(line, e)| Failure::Input(format!("{}:{line}: {e}", path.display())))
}

fn formula(path: &Path) -> Result<Formula, Failure> {
    let mut all = formulas(path)?;
    match all.len() {
        1 => Ok(all.pop().unwrap()),
        n => Err(Failure::Input(format!(
            "{}: expected one formula, found {n}",
            path.display()
        ))),
    }
}

fn model(path: &Path) -> Result<KripkeModel, Failure> {
    read_model(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn state_names(m: &KripkeModel, states: impl Iterator<Item = usize>) -> Vec<String> {
    states.map(|s| m.name(s).to_string()).collect()
}

fn sigma_text(items: &[Formula]) -> String {
    items
        .iter()
        .map(|f| format!("{}\n", print_formula(f)))
        .collect()
}

fn fmt(ctx: &Ctx, file: &Path) -> Outcome {
    for phi in formulas(file)? {
        let text = print_formula(&phi);
        ctx.emit(json!({ "formula": text }), &text);
    }
    Ok(())
}

fn classify(ctx: &Ctx, file: &Path, vars: &[String]) -> Outcome {
    let vars = vars.iter().filter(|v| !v.is_empty()).cloned().collect();
    for phi in formulas(file)? {
        let r = classify_fragment(&phi, &vars);
        let fragment = serde_json::to_value(r.fragment).expect("fragments serialise");
        let text = format!(
            "{phi}\t{}\t{}\t{}",
            fragment.as_str().unwrap_or_default(),
            if r.mucml {
                "continuous"
            } else {
                "not-continuous"
            },
            if phi.is_clean() { "clean" } else { "not-clean" },
        );
        ctx.emit(
            json!({ "formula": phi.to_string(), "fragment": fragment, "mucml": r.mucml, "clean": phi.is_clean() }),
            text,
        );
    }
    Ok(())
}

fn closure(ctx: &Ctx, file: &Path, neg: bool) -> Outcome {
    let items = formulas(file)?;
    let cl = fl_closure(items.iter(), neg);
    let members: Vec<String> = cl.iter().map(print_formula).collect();
    ctx.emit(
        json!({ "size": cl.len(), "members": members }),
        members.join("\n"),
    );
    Ok(())
}

fn mc(ctx: &Ctx, model_path: &Path, formula_path: &Path, engine: Engine) -> Outcome {
    let m = model(model_path)?;
    let phi = formula(formula_path)?;
    let xi = if phi.is_clean() {
        phi.clone()
    } else {
        phi.cleaned().0
    };
    let algebraic = || -> Result<Vec<String>, Failure> {
        let set = eval_algebraic(&phi, &m).map_err(input)?;
        Ok(state_names(&m, set.iter()))
    };
    let game = || -> Result<Vec<String>, Failure> {
        let arena = build_arena(&xi, &m).map_err(input)?;
        let win = solve_arena(&arena);
        let index = arena.index();
        let root = index.id_of(index.root()).expect("the root is indexed");
        Ok(state_names(
            &m,
            m.states()
                .filter(|&s| win.exists_wins(arena.position(root, s))),
        ))
    };
    let (states, engine_name) = match engine {
        Engine::Algebraic => (algebraic()?, "algebraic"),
        Engine::Game => (game()?, "game"),
        Engine::Both => {
            let report = model_check_equiv(&xi, &m).map_err(input)?;
            if !report.agrees() {
                ctx.witness("mc-witness.kmj", &write_model(&m))?;
                ctx.witness("mc-witness.mcf", &sigma_text(std::slice::from_ref(&xi)))?;
                let first = &report.mismatches[0];
                return Err(Failure::Violated(format!(
                    "engines disagree on `{}` at {} (game {}, algebraic {})",
                    first.subformula, first.state, first.game, first.algebraic
                )));
            }
            (algebraic()?, "both")
        }
    };
    ctx.emit(
        json!({ "formula": phi.to_string(), "engine": engine_name, "states": states }),
        format!("{phi}: {{{}}}", states.join(",")),
    );
    Ok(())
}

fn filtration_failure(e: FiltrationError) -> Failure {
    match e {
        FiltrationError::EscapesMax { .. } => Failure::Violated(e.to_string()),
        _ => input(e),
    }
}

fn filtrate(
    ctx: &Ctx,
    model_path: &Path,
    sigma_path: &Path,
    strategy: Strategy,
    neg: bool,
    check: bool,
) -> Outcome {
    let m = model(model_path)?;
    let items = formulas(sigma_path)?;
    let sigma = fl_closure(items.iter(), neg);
    let fr = build_filtration(&m, &sigma, strategy).map_err(filtration_failure)?;
    let mut report = fr.to_json();
    let text = format!(
        "{} classes from {} states; strategy {strategy}\n{}",
        fr.quotient.len(),
        m.len(),
        write_model(&fr.quotient)
    );
    if !check {
        ctx.emit(report, text);
        return Ok(());
    }
    let validation =
        validate_filtration(&m, &sigma, &fr.quotient, &fr.class_of).map_err(filtration_failure)?;
    let agreement = filtration_agreement_check(&fr).map_err(filtration_failure)?;
    report["validation"] = serde_json::to_value(&validation).expect("reports serialise");
    report["agreement"] = serde_json::to_value(&agreement).expect("reports serialise");
    // disagreements on the file's own formulas are reported first
    let given: Vec<String> = items.iter().map(print_formula).collect();
    let mut disagreements: Vec<_> = agreement
        .disagreements
        .iter()
        .chain(&agreement.boundary_disagreements)
        .collect();
    disagreements.sort_by_key(|d| !given.contains(&d.formula));
    if validation.valid && disagreements.is_empty() {
        ctx.emit(
            report,
            format!(
                "{text}\nvalid; all {} comparisons agree",
                agreement.agreements
            ),
        );
        return Ok(());
    }
    ctx.witness("filtrate-witness.kmj", &write_model(&m))?;
    ctx.witness("filtrate-witness.mcf", &sigma_text(&items))?;
    ctx.witness("filtrate-report.json", &report.to_string())?;
    ctx.emit(report, text);
    Err(Failure::Violated(match disagreements.first() {
        Some(d) => format!(
            "`{}` is {} at {} but {} at {}",
            d.formula,
            if d.in_source { "true" } else { "false" },
            d.state,
            if d.in_quotient { "true" } else { "false" },
            d.class
        ),
        None => validation.violations.join("; "),
    }))
}

fn fmp(ctx: &Ctx, formula_path: &Path, class: FrameClass, witness: &Path) -> Outcome {
    let phi = formula(formula_path)?;
    let w = model(witness)?;
    let r = fmp_search(&phi, class, &w).map_err(filtration_failure)?;
    let text = format!(
        "{} states (bound 2^{} = {}); refuted at {}\n{}",
        r.filtration.quotient.len(),
        r.closure_size,
        r.bound,
        r.filtration.quotient.name(r.refuting_state),
        write_model(&r.filtration.quotient)
    );
    if r.holds() {
        ctx.emit(r.to_json(), text);
        return Ok(());
    }
    ctx.witness("fmp-countermodel.kmj", &write_model(&r.filtration.quotient))?;
    ctx.emit(r.to_json(), text);
    Err(Failure::Violated(format!(
        "countermodel check failed: refutes={} in_class={} within_bound={}",
        r.refutes, r.in_class, r.within_bound
    )))
}

fn sat(ctx: &Ctx, formula_path: &Path, class: FrameClass, config: OracleConfig) -> Outcome {
    let phi = formula(formula_path)?;
    if !mucalc_core::formula::is_mucml(&phi) {
        return Err(Failure::Input(format!(
            "`{phi}` is not in the continuous fragment"
        )));
    }
    let verdict = Oracle::from_env(config).query(&phi, class);
    if verdict.is_sat() && !verdict.replays(&phi, class) {
        return Err(Failure::Internal(format!(
            "SAT witness for `{phi}` does not replay"
        )));
    }
    let text = match &verdict {
        OracleVerdict::Sat { model, state } => {
            format!("SAT at {}\n{}", model.name(*state), write_model(model))
        }
        OracleVerdict::UnsatCertified { method } => format!("UNSAT_CERTIFIED ({method})"),
        OracleVerdict::Unknown { reason } => format!("UNKNOWN ({reason})"),
    };
    ctx.emit(verdict.to_json(), text);
    match verdict {
        OracleVerdict::Unknown { reason } => Err(Failure::Unknown(reason)),
        _ => Ok(()),
    }
}

fn canonical(
    ctx: &Ctx,
    sigma_path: &Path,
    logic: FrameClass,
    strategy: Option<Strategy>,
    check_all: bool,
    policy: UnknownPolicy,
    out: Option<&Path>,
) -> Outcome {
    let items = formulas(sigma_path)?;
    let sigma = sigma_of(&items).map_err(input)?;
    let strategy = strategy.unwrap_or(Strategy::for_class(logic));
    let oracle = Oracle::from_env(OracleConfig::default());
    let m = match build_canonical(&sigma, logic, strategy, &oracle, policy) {
        Ok(m) => m,
        Err(CanonicalError::Unknown { query, reason }) => {
            return Err(Failure::Unknown(format!("`{query}`: {reason}")));
        }
        Err(e @ (CanonicalError::EscapesBounds { .. } | CanonicalError::OutsideClass { .. })) => {
            ctx.witness("canonical-witness.mcf", &sigma_text(&items))?;
            return Err(Failure::Violated(e.to_string()));
        }
        Err(e) => return Err(input(e)),
    };
    for w in &m.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(path) = out {
        let sidecar = path.with_extension("atoms.json");
        for (p, text) in [
            (path.to_path_buf(), write_model(&m.model)),
            (sidecar, m.sidecar().to_string()),
        ] {
            fs::write(&p, text).map_err(|e| Failure::Internal(format!("{}: {e}", p.display())))?;
        }
    }
    let mut report = json!({
        "logic": logic,
        "strategy": strategy,
        "sigma": m.sigma.len(),
        "atoms": m.len(),
        "edges": m.model.relation().edge_count(),
        "warnings": m.warnings,
        "model": m.model_json(),
        "sidecar": m.sidecar(),
    });
    let mut text = format!(
        "{} atoms over {} formulas, {} edges ({logic}, {strategy})",
        m.len(),
        m.sigma.len(),
        m.model.relation().edge_count()
    );
    if !check_all {
        ctx.emit(report, text);
        return Ok(());
    }
    let mut failures = Vec::new();
    if let Err(v) = logic.check(&m.model) {
        failures.push(format!("frame: {}", v.describe(&m.model)));
    }
    let existence = existence_check(&m);
    let distinctness = distinctness_check(&m.atoms, &m.sigma, logic, &oracle);
    let truth = truth_lemma_check(&m).map_err(|e| Failure::Internal(e.to_string()))?;
    for (name, r) in [
        ("existence", &existence),
        ("distinctness", &distinctness),
        ("truth lemma", &truth),
    ] {
        failures.extend(r.failures.iter().map(|f| format!("{name}: {f}")));
        report[name.replace(' ', "_")] = json!({ "checked": r.checked, "failures": r.failures });
        text.push_str(&format!(
            "\n{name}: {} checked, {} failures",
            r.checked,
            r.failures.len()
        ));
    }
    if failures.is_empty() {
        ctx.emit(report, text);
        return Ok(());
    }
    ctx.witness("canonical-witness.kmj", &write_model(&m.model))?;
    ctx.witness("canonical-witness.atoms.json", &m.sidecar().to_string())?;
    ctx.emit(report, text);
    Err(Failure::Violated(failures.join("; ")))
}

fn prove(ctx: &Ctx, file: &Path) -> Outcome {
    let d = read_derivation(&read(file)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", file.display())))?;
    match check_derivation(&d) {
        Ok(t) => {
            ctx.emit(serde_json::to_value(&t).expect("theorems serialise"), &t);
            Ok(())
        }
        Err(e) => {
            ctx.witness("prove-witness.drv", &write_derivation(&d))?;
            Err(Failure::Violated(e.to_string()))
        }
    }
}

fn selftest(ctx: &Ctx, seed: u64, jobs: usize) -> Outcome {
    let report = run_selftest(seed, jobs).map_err(|e| Failure::Internal(e.to_string()))?;
    let pretty = report.to_json();
    let value = serde_json::to_value(&report).expect("reports serialise");
    if report.passed {
        ctx.emit(value, pretty);
        return Ok(());
    }
    ctx.witness("selftest-report.json", &pretty)?;
    ctx.emit(value, &pretty);
    let failed: Vec<String> = report
        .criteria
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.id.to_string())
        .collect();
    Err(Failure::Violated(format!(
        "criteria failed: {}",
        failed.join(", ")
    )))
}

fn run(cli: Cli) -> Outcome {
    let ctx = Ctx {
        json: cli.json,
        witness_dir: cli.witness_dir,
    };
    match cli.command {
        Command::Fmt { file } => fmt(&ctx, &file),
        Command::Classify { file, vars } => classify(&ctx, &file, &vars),
        Command::Closure { file, neg } => closure(&ctx, &file, neg),
        Command::Mc {
            model,
            formula,
            engine,
        } => mc(&ctx, &model, &formula, engine),
        Command::Filtrate {
            model,
            sigma,
            strategy,
            neg,
            check,
        } => filtrate(&ctx, &model, &sigma, strategy, neg, check),
        Command::Fmp {
            formula,
            class,
            witness,
        } => fmp(&ctx, &formula, class, &witness),
        Command::Sat {
            formula,
            class,
            max_states,
            depth,
            budget,
            steps,
        } => {
            let config = OracleConfig {
                max_states,
                depth,
                budget,
                refuter_steps: steps,
                ..OracleConfig::default()
            };
            sat(&ctx, &formula, class, config)
        }
        Command::Canonical {
            sigma,
            logic,
            strategy,
            check_all,
            unknown,
            out,
        } => canonical(
            &ctx,
            &sigma,
            logic,
            strategy,
            check_all,
            unknown,
            out.as_deref(),
        ),
        Command::Prove { file } => prove(&ctx, &file),
        Command::Selftest { seed, jobs } => selftest(&ctx, seed, jobs),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    let result = panic::catch_unwind(|| run(cli)).unwrap_or_else(|p| {
        let message = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".to_string());
        Err(Failure::Internal(message))
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if json {
                println!("{}", json!({ "error": f.message(), "exit": f.code() }));
            }
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
