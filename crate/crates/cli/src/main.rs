use std::collections::BTreeMap;
use std::fmt::Display;
use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use fraglab_core::classify::{classify_all, classify_one, FragmentId};
use fraglab_core::formula::{Formula, FormulaError, Var};
use fraglab_core::gallery::{self, paper_formula};
use fraglab_core::rewrite::{cleanify, rename_free_vars, Replacement, Substitution, VariableRenaming};
use fraglab_core::semantics::{entails_upto, equiv_upto, eval, sandwich_check, Budget, CheckOutcome, SemanticsError};
use fraglab_core::suite::{verify_paper, SuiteConfig};
use fraglab_core::syntax::{parse, print};
use fraglab_core::transform::{self, Sandwich, TransformError};

const PASS: u8 = 0;
const SEMANTIC_FAILURE: u8 = 1;
const PARSE_ERROR: u8 = 2;
const PRECONDITION: u8 = 3;
const BUDGET: u8 = 4;

/// Parse, classify, transform and bounded-check relational formulas.
///
/// Formula arguments are concrete syntax, `@name` for a gallery item or
/// `@file:path` for a file holding one formula.
#[derive(Parser, Debug)]
#[command(name = "fraglab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the canonical form of a formula.
    Parse {
        formula: String,
        #[arg(long)]
        json: bool,
    },
    /// Report fragment memberships.
    Classify {
        formula: String,
        /// Fragment to test; may be repeated.
        #[arg(long = "fragment", required_unless_present = "all", conflicts_with = "all")]
        fragments: Vec<String>,
        #[arg(long)]
        all: bool,
        #[arg(long)]
        json: bool,
    },
    /// Apply a construction and print the result.
    Transform(TransformArgs),
    /// Bounded entailment, equivalence or sandwich checking.
    Check(CheckArgs),
    /// Inspect the built-in formula gallery.
    Gallery {
        #[command(subcommand)]
        action: GalleryAction,
    },
    /// Check every gallery expectation and the BIND law suites.
    VerifyPaper {
        #[arg(long, default_value_t = 3)]
        max_size: u32,
        #[arg(long, default_value_t = SuiteConfig::default().seed)]
        seed: u64,
        /// Replace a gallery formula, as `id=formula`; may be repeated.
        #[arg(long = "override", value_name = "ID=FORMULA")]
        overrides: Vec<String>,
        /// Corpus size for each law suite; 0 skips them.
        #[arg(long, default_value_t = SuiteConfig::default().law_formulas)]
        law_formulas: usize,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand, Debug)]
enum GalleryAction {
    /// Every item with its source and expectations.
    Dump {
        #[arg(long)]
        json: bool,
    },
    /// One item.
    Show {
        id: String,
        #[arg(long)]
        json: bool,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum TransformKind {
    Bind,
    Relativize,
    Thm31,
    Bindexp,
    Cq,
    Shuffle,
    UcqApply,
    TransWrap,
    Cleanify,
    Desugar,
    RenameVars,
}

#[derive(Args, Debug)]
struct TransformArgs {
    kind: TransformKind,
    formula: String,
    /// Variables to bind (`bind`), or the `y` list (`bindexp`, `cq`).
    #[arg(long, value_delimiter = ',')]
    vars: Vec<String>,
    /// Predicate names paired with `--vars` (`bind`).
    #[arg(long, value_delimiter = ',')]
    preds: Vec<String>,
    /// The `x` list (`bindexp`) or the single `x` (`cq`).
    #[arg(long, value_delimiter = ',')]
    xs: Vec<String>,
    /// The extra variable `z` (`bindexp`).
    #[arg(long)]
    z: Option<String>,
    /// Variable map `i:j,...` (`shuffle`, `rename-vars`).
    #[arg(long)]
    map: Option<String>,
    /// Unary predicate read as a singleton (`thm31`).
    #[arg(long, default_value = "P")]
    pred: String,
    /// Name of its replacement (`thm31`).
    #[arg(long, default_value = "Pp")]
    primed: String,
    /// Argument `NAME(x1,...)=FORMULA` (`ucq-apply`); may be repeated.
    #[arg(long = "arg", value_name = "NAME(PARAMS)=FORMULA")]
    args: Vec<String>,
    /// Relation names for `trans-wrap`.
    #[arg(long, default_value = "R1")]
    r1: String,
    #[arg(long, default_value = "R2")]
    r2: String,
    #[arg(long)]
    json: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum CheckMode {
    Entails,
    Equiv,
    Sandwich,
}

#[derive(Args, Debug)]
struct CheckArgs {
    mode: CheckMode,
    /// Left and right formulas (`entails`, `equiv`).
    inputs: Vec<String>,
    #[arg(long, default_value_t = 3)]
    max_size: u32,
    /// Sandwich for renaming this formula's free variables by `--map`.
    #[arg(long)]
    shuffle: Option<String>,
    #[arg(long)]
    map: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    chi: Option<String>,
    #[arg(long)]
    target: Option<String>,
    /// Hidden existential predicates, `NAME/arity`.
    #[arg(long, value_delimiter = ',')]
    hidden_exists: Vec<String>,
    /// Hidden universal predicates, `NAME/arity`.
    #[arg(long, value_delimiter = ',')]
    hidden_forall: Vec<String>,
    #[arg(long)]
    json: bool,
}

/// A failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Display) -> Self {
        Self {
            code,
            message: message.to_string(),
        }
    }

    fn precondition(message: impl Display) -> Self {
        Self::new(PRECONDITION, message)
    }
}

impl From<TransformError> for Failure {
    fn from(e: TransformError) -> Self {
        Failure::precondition(e)
    }
}

impl From<FormulaError> for Failure {
    fn from(e: FormulaError) -> Self {
        Failure::precondition(e)
    }
}

impl From<SemanticsError> for Failure {
    fn from(e: SemanticsError) -> Self {
        match e {
            SemanticsError::BudgetExceeded(_) => Failure::new(BUDGET, e),
            _ => Failure::precondition(e),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn formula_arg(arg: &str) -> Result<Formula, Failure> {
    let text = if let Some(path) = arg.strip_prefix("@file:") {
        std::fs::read_to_string(path)
            .map_err(|e| Failure::precondition(format!("cannot read {path}: {e}")))?
    } else if let Some(id) = arg.strip_prefix('@') {
        return paper_formula(id)
            .map(|item| item.formula)
            .map_err(Failure::precondition);
    } else {
        arg.to_owned()
    };
    let text = text.trim();
    parse(text).map_err(|e| {
        let caret = format!("{}^", " ".repeat(e.column.saturating_sub(1)));
        Failure::new(PARSE_ERROR, format!("parse error: {e}\n  {text}\n  {caret}"))
    })
}

fn var_arg(s: &str) -> Result<Var, Failure> {
    let digits = s.trim().strip_prefix('x').unwrap_or(s.trim());
    digits
        .parse::<u32>()
        .ok()
        .and_then(Var::try_new)
        .ok_or_else(|| Failure::precondition(format!("bad variable {s}")))
}

fn vars_arg(list: &[String]) -> Result<Vec<Var>, Failure> {
    list.iter().map(|s| var_arg(s)).collect()
}

fn map_arg(s: &str) -> Result<VariableRenaming, Failure> {
    let mut pairs = BTreeMap::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let (a, b) = part
            .split_once(':')
            .ok_or_else(|| Failure::precondition(format!("bad map entry {part}, expected i:j")))?;
        let from = var_arg(a)?;
        if pairs.insert(from, var_arg(b)?).is_some() {
            return Err(Failure::precondition(format!("{from} mapped twice")));
        }
    }
    Ok(VariableRenaming::new(pairs))
}

fn hidden_arg(list: &[String]) -> Result<Vec<(String, usize)>, Failure> {
    list.iter()
        .map(|s| {
            let (name, k) = s
                .split_once('/')
                .ok_or_else(|| Failure::precondition(format!("bad predicate {s}, expected NAME/arity")))?;
            let k = k
                .parse()
                .map_err(|_| Failure::precondition(format!("bad arity in {s}")))?;
            Ok((name.to_owned(), k))
        })
        .collect()
}

/// `NAME(x1,x2)=FORMULA`.
fn replacement_arg(s: &str) -> Result<(String, Replacement), Failure> {
    let bad = || Failure::precondition(format!("bad argument {s}, expected NAME(x1,...)=FORMULA"));
    let (head, body) = s.split_once('=').ok_or_else(bad)?;
    let (name, params) = head.trim().split_once('(').ok_or_else(bad)?;
    let params = params.strip_suffix(')').ok_or_else(bad)?;
    let params: Vec<Var> = params
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(var_arg)
        .collect::<Result<_, _>>()?;
    Ok((name.trim().to_owned(), Replacement::new(params, formula_arg(body)?)))
}

fn emit(json: bool, value: Value, text: impl Display) {
    let out = if json {
        serde_json::to_string_pretty(&value).expect("json values serialize")
    } else {
        text.to_string()
    };
    let _ = writeln!(std::io::stdout().lock(), "{out}");
}

fn cmd_parse(formula: &str, json: bool) -> Outcome {
    let f = formula_arg(formula)?;
    let text = print(&f);
    let free: Vec<String> = f.free_vars().iter().map(|v| v.to_string()).collect();
    emit(
        json,
        json!({"formula": text, "free_vars": free, "clean": f.is_clean(), "gfv": f.gfv()}),
        &text,
    );
    Ok(PASS)
}

fn cmd_classify(formula: &str, fragments: &[String], all: bool, json: bool) -> Outcome {
    let f = formula_arg(formula)?;
    if all {
        let report = classify_all(&f);
        let ok = report.fragments.iter().all(|l| l.verdict.is_yes());
        emit(json, serde_json::to_value(&report).expect("report serializes"), &report);
        return Ok(if ok { PASS } else { SEMANTIC_FAILURE });
    }
    let ids: Vec<FragmentId> = fragments
        .iter()
        .map(|s| s.parse::<FragmentId>().map_err(Failure::precondition))
        .collect::<Result<_, _>>()?;
    let lines: Vec<_> = ids.iter().map(|id| classify_one(&f, *id)).collect();
    let ok = lines.iter().all(|l| l.verdict.is_yes());
    let text = lines.iter().map(|l| l.to_string()).collect::<Vec<_>>().join("\n");
    emit(json, serde_json::to_value(&lines).expect("lines serialize"), text);
    Ok(if ok { PASS } else { SEMANTIC_FAILURE })
}

fn sandwich_out(s: &Sandwich, json: bool) {
    emit(json, s.to_json(), s);
}

fn cmd_transform(a: &TransformArgs) -> Outcome {
    let f = formula_arg(&a.formula)?;
    let formula_out = |g: Formula| {
        let text = print(&g);
        emit(a.json, json!({ "formula": text }), &text);
    };
    match a.kind {
        TransformKind::Bind => formula_out(transform::bind(&f, &vars_arg(&a.vars)?, &a.preds)?),
        TransformKind::Relativize => formula_out(transform::relativize(&f)?),
        TransformKind::Thm31 => sandwich_out(&transform::thm31_step(&f, &a.pred, &a.primed)?, a.json),
        TransformKind::Bindexp => {
            let z = var_arg(a.z.as_deref().ok_or_else(|| Failure::precondition("bindexp needs --z"))?)?;
            let s = transform::bindexp_sandwich(&f, &vars_arg(&a.xs)?, &vars_arg(&a.vars)?, z)?;
            sandwich_out(&s, a.json);
        }
        TransformKind::Cq => {
            let xs = vars_arg(&a.xs)?;
            let [x] = xs[..] else {
                return Err(Failure::precondition("cq needs exactly one --xs variable"));
            };
            sandwich_out(&transform::cq_sandwich(&f, x, &vars_arg(&a.vars)?)?, a.json);
        }
        TransformKind::Shuffle => {
            let pi = map_arg(a.map.as_deref().ok_or_else(|| Failure::precondition("shuffle needs --map"))?)?;
            sandwich_out(&transform::shuffle_sandwich(&f, &pi)?, a.json);
        }
        TransformKind::UcqApply => {
            let args: Substitution = a
                .args
                .iter()
                .map(|s| replacement_arg(s))
                .collect::<Result<_, _>>()?;
            formula_out(transform::ucq_apply(&f, &args)?);
        }
        TransformKind::TransWrap => formula_out(transform::transitive_wrap(&f, &a.r1, &a.r2)?),
        TransformKind::Cleanify => formula_out(cleanify(&f)),
        TransformKind::Desugar => formula_out(f.desugar()),
        TransformKind::RenameVars => {
            let pi = map_arg(a.map.as_deref().ok_or_else(|| Failure::precondition("rename-vars needs --map"))?)?;
            if let Some(v) = f.free_vars().into_iter().find(|v| !pi.domain().any(|d| d == *v)) {
                return Err(TransformError::RenamingNotTotal(v).into());
            }
            formula_out(rename_free_vars(&f, &pi));
        }
    }
    Ok(PASS)
}

fn outcome_code(o: &CheckOutcome) -> u8 {
    if o.is_verified() {
        PASS
    } else {
        SEMANTIC_FAILURE
    }
}

fn outcome_text(o: &CheckOutcome) -> String {
    match o {
        CheckOutcome::Verified { .. } => o.to_string(),
        CheckOutcome::Countermodel {
            structure,
            assignment,
            note,
        } => format!(
            "countermodel ({note})\nstructure: {}\nassignment: {}",
            structure.to_json(),
            assignment.to_json()
        ),
    }
}

/// The stored countermodel for the non-injective case, re-evaluated, and
/// the first one found by search at size 2.
fn non_injective_report(phi: &Formula, pi: &VariableRenaming, budget: &Budget) -> Result<String, Failure> {
    let s = transform::shuffle_sandwich_swapped(phi, pi)?;
    let (stored_phi, stored_pi, m, g) = transform::stored_non_injective_witness();
    let mut out = String::new();
    if *phi == stored_phi && pi == &stored_pi {
        let holds = eval(&m, &g, &s.gamma)? && !eval(&m, &g, &s.chi)?;
        out.push_str(&format!(
            "stored countermodel to gamma entails chi (re-evaluated: {})\nstructure: {}\nassignment: {}\n",
            if holds { "confirmed" } else { "NOT reproduced" },
            m.to_json(),
            g.to_json()
        ));
    }
    let found = entails_upto(&s.gamma, &s.chi, &budget.with_max_domain(budget.max_domain.min(2)))?;
    out.push_str(&format!("search: {}", outcome_text(&found)));
    Ok(out)
}

fn cmd_check(a: &CheckArgs) -> Outcome {
    let budget = Budget::default().with_max_domain(a.max_size);
    if a.mode != CheckMode::Sandwich {
        let [lhs, rhs] = &a.inputs[..] else {
            return Err(Failure::precondition("entails and equiv take exactly two formulas"));
        };
        let (lhs, rhs) = (formula_arg(lhs)?, formula_arg(rhs)?);
        let o = match a.mode {
            CheckMode::Entails => entails_upto(&lhs, &rhs, &budget)?,
            _ => equiv_upto(&lhs, &rhs, &budget)?,
        };
        emit(a.json, o.to_json(), outcome_text(&o));
        return Ok(outcome_code(&o));
    }
    if !a.inputs.is_empty() {
        return Err(Failure::precondition("sandwich takes its formulas through flags"));
    }
    let s = if let Some(phi) = &a.shuffle {
        let phi = formula_arg(phi)?;
        let pi = map_arg(a.map.as_deref().ok_or_else(|| Failure::precondition("--shuffle needs --map"))?)?;
        match transform::shuffle_sandwich(&phi, &pi) {
            Ok(s) => s,
            Err(e @ TransformError::NonInjectiveRenaming(..)) => {
                let message = format!("{e}\n{}", non_injective_report(&phi, &pi, &budget)?);
                return Err(Failure::precondition(message));
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        let need = |o: &Option<String>, flag: &str| -> Result<Formula, Failure> {
            formula_arg(
                o.as_deref()
                    .ok_or_else(|| Failure::precondition(format!("sandwich needs --{flag} or --shuffle")))?,
            )
        };
        Sandwich {
            gamma: need(&a.gamma, "gamma")?,
            chi: need(&a.chi, "chi")?,
            hidden_exists: hidden_arg(&a.hidden_exists)?,
            hidden_forall: hidden_arg(&a.hidden_forall)?,
            target: need(&a.target, "target")?,
        }
    };
    if !s.is_well_formed() {
        return Err(Failure::precondition("a hidden predicate occurs on the wrong side or in the target"));
    }
    let report = sandwich_check(&s, &budget)?;
    let code = if report.passed() { PASS } else { SEMANTIC_FAILURE };
    let text = report
        .checks
        .iter()
        .map(|c| format!("{} (size <= {}): {}", c.name, c.max_size, outcome_text(&c.outcome)))
        .collect::<Vec<_>>()
        .join("\n");
    emit(
        a.json,
        json!({"sandwich": s.to_json(), "passed": report.passed(), "checks": report.checks}),
        text,
    );
    Ok(code)
}

fn item_json(item: &gallery::GalleryItem) -> Value {
    json!({
        "id": item.id,
        "formula": print(&item.formula),
        "source": item.source,
        "note": item.note,
        "expected": item.expected,
    })
}

fn cmd_gallery(action: &GalleryAction) -> Outcome {
    match action {
        GalleryAction::Dump { json } => {
            let items = gallery::all_items();
            let text = items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("\n\n");
            emit(*json, Value::Array(items.iter().map(item_json).collect()), text);
        }
        GalleryAction::Show { id, json } => {
            let item = paper_formula(id).map_err(Failure::precondition)?;
            emit(*json, item_json(&item), &item);
        }
    }
    Ok(PASS)
}

fn cmd_verify_paper(max_size: u32, seed: u64, overrides: &[String], law_formulas: usize, json: bool) -> Outcome {
    if max_size == 0 {
        return Err(Failure::precondition("--max-size must be at least 1"));
    }
    let mut cfg = SuiteConfig {
        max_size,
        seed,
        law_formulas,
        ..SuiteConfig::default()
    };
    for o in overrides {
        let (id, text) = o
            .split_once('=')
            .ok_or_else(|| Failure::precondition(format!("bad override {o}, expected id=formula")))?;
        paper_formula(id).map_err(Failure::precondition)?;
        cfg.overrides.insert(id.to_owned(), formula_arg(text)?);
    }
    let report = verify_paper(&cfg);
    emit(json, report.to_json(), &report);
    Ok(if report.passed() { PASS } else { SEMANTIC_FAILURE })
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Parse { formula, json } => cmd_parse(&formula, json),
        Command::Classify {
            formula,
            fragments,
            all,
            json,
        } => cmd_classify(&formula, &fragments, all, json),
        Command::Transform(a) => cmd_transform(&a),
        Command::Check(a) => cmd_check(&a),
        Command::Gallery { action } => cmd_gallery(&action),
        Command::VerifyPaper {
            max_size,
            seed,
            overrides,
            law_formulas,
            json,
        } => cmd_verify_paper(max_size, seed, &overrides, law_formulas, json),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}
