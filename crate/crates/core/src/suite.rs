//! Runs every gallery expectation and the BIND law suites, producing one
//! claim line per check.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use serde_json::{json, Value};

use crate::classify::fragment_membership;
use crate::formula::{Formula, Var};
use crate::gallery::{all_items, Expectation, GalleryItem};
use crate::laws::{run_law, Law, LawConfig};
use crate::rewrite::{substitute_atoms, Replacement, Substitution};
use crate::semantics::{entails_upto, equiv_upto, sandwich_check, Budget, CheckOutcome};
use crate::syntax::print;
use crate::transform::Sandwich;

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub max_size: u32,
    pub seed: u64,
    /// Replacement formulas for gallery ids, applied wherever the id is
    /// referenced.
    pub overrides: BTreeMap<String, Formula>,
    /// Number of formulas in each law corpus; zero skips the law suites.
    pub law_formulas: usize,
    pub law_samples: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            max_size: 3,
            seed: LawConfig::default().seed,
            overrides: BTreeMap::new(),
            law_formulas: LawConfig::default().formulas,
            law_samples: LawConfig::default().samples,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClaimResult {
    pub id: String,
    pub claim: String,
    pub source: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for ClaimResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status}  {}: {}  [{}]", self.id, self.claim, self.source)?;
        if !self.detail.is_empty() {
            write!(f, "\n      {}", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub max_size: u32,
    pub seed: u64,
    pub claims: Vec<ClaimResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.claims.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ClaimResult> {
        self.claims.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "max_size": self.max_size,
            "seed": self.seed,
            "passed": self.passed(),
            "claims": self.claims,
        })
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.claims {
            writeln!(f, "{c}")?;
        }
        let failed = self.failures().count();
        write!(
            f,
            "{} claims, {} passed, {} failed (max size {}, seed {})",
            self.claims.len(),
            self.claims.len() - failed,
            failed,
            self.max_size,
            self.seed
        )
    }
}

struct Resolver<'a> {
    items: BTreeMap<&'static str, GalleryItem>,
    overrides: &'a BTreeMap<String, Formula>,
}

impl Resolver<'_> {
    fn formula(&self, id: &str) -> Formula {
        if let Some(f) = self.overrides.get(id) {
            return f.clone();
        }
        self.items[id].formula.clone()
    }
}

fn outcome_claim(outcome: Result<CheckOutcome, String>) -> (bool, String) {
    match outcome {
        Ok(o) if o.is_verified() => (true, o.to_string()),
        Ok(o) => (false, o.to_string()),
        Err(e) => (false, format!("error: {e}")),
    }
}

fn check_expectation(
    r: &Resolver<'_>,
    item: &GalleryItem,
    check: &Expectation,
    cfg: &SuiteConfig,
) -> (bool, String) {
    let formula = r.formula(item.id);
    let budget = |k: u32| Budget::default().with_max_domain(k.min(cfg.max_size));
    match check {
        Expectation::Fragment { fragment, member } => match fragment_membership(&formula, *fragment) {
            Ok(m) => {
                let detail = match (&m.levels, &m.reason) {
                    (Some(l), _) if m.member => format!("levels {l}"),
                    (_, Some(reason)) => reason.clone(),
                    _ => String::new(),
                };
                (m.member == *member, detail)
            }
            Err(e) => (false, format!("error: {e}")),
        },
        Expectation::Entails { rhs, max_size } => outcome_claim(
            entails_upto(&formula, &r.formula(rhs), &budget(*max_size)).map_err(|e| e.to_string()),
        ),
        Expectation::Sandwich {
            chi,
            hidden_exists,
            hidden_forall,
            target,
            max_size,
        } => {
            let s = Sandwich {
                gamma: formula,
                chi: r.formula(chi),
                hidden_exists: hidden_exists.clone(),
                hidden_forall: hidden_forall.clone(),
                target: r.formula(target),
            };
            match sandwich_check(&s, &budget(*max_size)) {
                Ok(report) => (report.passed(), report.to_string().replace('\n', "\n      ")),
                Err(e) => (false, format!("error: {e}")),
            }
        }
        Expectation::ClosureEquiv {
            other,
            hidden,
            max_size,
        } => {
            let close = |f: Formula| {
                hidden
                    .iter()
                    .rev()
                    .fold(f, |acc, (p, k)| Formula::exists_so(p.clone(), *k, acc))
            };
            outcome_claim(
                equiv_upto(&close(formula), &close(r.formula(other)), &budget(*max_size))
                    .map_err(|e| e.to_string()),
            )
        }
        Expectation::Substitution {
            relation,
            params,
            body,
            result,
        } => {
            let replacement = crate::syntax::parse(body)
                .map_err(|e| e.to_string())
                .map(|b| Replacement::new(params.iter().map(|i| Var::new(*i)).collect(), b));
            let got = replacement.and_then(|rep| {
                let sub: Substitution = [(relation.to_string(), rep)].into_iter().collect();
                substitute_atoms(&formula, &sub).map_err(|e| e.to_string())
            });
            match got {
                Ok(g) => {
                    let want = r.formula(result);
                    let detail = format!("got {}", print(&g));
                    (g == want, detail)
                }
                Err(e) => (false, format!("error: {e}")),
            }
        }
    }
}

/// Checks every expectation of every gallery item (honouring overrides),
/// then the three BIND laws on a seeded corpus.
pub fn verify_paper(cfg: &SuiteConfig) -> SuiteReport {
    let items: BTreeMap<&'static str, GalleryItem> =
        all_items().into_iter().map(|i| (i.id, i)).collect();
    let resolver = Resolver {
        items,
        overrides: &cfg.overrides,
    };
    let mut claims = Vec::new();
    for item in all_items() {
        for e in &item.expected {
            let (passed, detail) = check_expectation(&resolver, &item, &e.check, cfg);
            claims.push(ClaimResult {
                id: item.id.to_owned(),
                claim: e.description.clone(),
                source: item.source.to_owned(),
                passed,
                detail,
            });
        }
    }
    if cfg.law_formulas > 0 {
        let law_cfg = LawConfig {
            formulas: cfg.law_formulas,
            exhaustive_size: cfg.max_size.min(2),
            sample_size: cfg.max_size,
            samples: if cfg.max_size > 2 { cfg.law_samples } else { 0 },
            seed: cfg.seed,
        };
        for law in Law::ALL {
            let (passed, detail) = match run_law(law, &law_cfg) {
                Ok(report) => (report.passed(), report.summary()),
                Err(e) => (false, format!("error: {e}")),
            };
            claims.push(ClaimResult {
                id: law.name().to_owned(),
                claim: format!(
                    "holds on {} random existential-conjunctive formulas",
                    law_cfg.formulas
                ),
                source: "BIND laws".to_owned(),
                passed,
                detail,
            });
        }
    }
    SuiteReport {
        max_size: cfg.max_size,
        seed: cfg.seed,
        claims,
    }
}
