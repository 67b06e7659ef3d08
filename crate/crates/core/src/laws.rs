//! Randomized checks of the BIND laws: composition, the implication
//! lemma and the second-order equivalence lemma.

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::corpus::{exists_and_corpus, ExistsAndConfig};
use crate::formula::{Formula, Var};
use crate::rewrite::FreshNamePool;
use crate::semantics::{entails_sampled, entails_upto, Budget, CheckOutcome, SemanticsError};
use crate::syntax::print;
use crate::transform::{bind, bind_recursive};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Law {
    /// `BIND_{x̄ȳ↦P̄Q̄}(φ) ≡ BIND_{x̄↦P̄}(BIND_{ȳ↦Q̄}(φ))` for disjoint `x̄`, `ȳ`.
    BindComposition,
    /// `⋀ P_i(y_i) ∧ φ ⊨ BIND_{ȳ↦P̄}(φ)`.
    BindImplication,
    /// `∃x φ ≡ ∀P̄ (⋀ P_i(y_i) → ∃x BIND_{ȳ↦P̄}(φ))`.
    BindEquivalence,
}

impl Law {
    pub const ALL: [Law; 3] = [Law::BindComposition, Law::BindImplication, Law::BindEquivalence];

    pub fn name(self) -> &'static str {
        match self {
            Law::BindComposition => "bind-composition",
            Law::BindImplication => "bind-implication",
            Law::BindEquivalence => "bind-equivalence",
        }
    }

    fn two_sided(self) -> bool {
        !matches!(self, Law::BindImplication)
    }
}

/// The two sides of one law instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub phi: Formula,
    pub lhs: Formula,
    pub rhs: Formula,
}

fn unary(ps: &[String], vs: &[Var]) -> Vec<Formula> {
    ps.iter()
        .zip(vs)
        .map(|(p, v)| Formula::Rel(p.clone(), vec![*v]))
        .collect()
}

/// Builds an instance of `law` for `phi`, drawing variable splits from
/// `rng`. Returns `None` when `phi` has too few free variables.
pub fn instance<R: Rng>(law: Law, phi: &Formula, rng: &mut R) -> Option<Instance> {
    let mut free: Vec<Var> = phi.free_vars().into_iter().collect();
    free.shuffle(rng);
    let mut pool = FreshNamePool::avoiding([phi]);
    let (lhs, rhs) = match law {
        Law::BindComposition => {
            if free.is_empty() {
                return None;
            }
            let nx = rng.gen_range(0..=free.len());
            let ny = rng.gen_range(0..=free.len() - nx);
            let xs = &free[..nx];
            let ys = &free[nx..nx + ny];
            let ps = pool.fresh_many("P", xs.len());
            let qs = pool.fresh_many("Q", ys.len());
            let xy: Vec<Var> = xs.iter().chain(ys).copied().collect();
            let pq: Vec<String> = ps.iter().chain(&qs).cloned().collect();
            let joint = bind(phi, &xy, &pq).ok()?;
            let inner = bind(phi, ys, &qs).ok()?;
            (joint, bind_recursive(&inner, xs, &ps))
        }
        Law::BindImplication => {
            if free.is_empty() {
                return None;
            }
            let ny = rng.gen_range(1..=free.len());
            let ys = &free[..ny];
            let ps = pool.fresh_many("P", ys.len());
            let mut parts = unary(&ps, ys);
            parts.push(phi.clone());
            (Formula::conj(parts), bind(phi, ys, &ps).ok()?)
        }
        Law::BindEquivalence => {
            let (x, ys) = free.split_first()?;
            let ps = pool.fresh_many("P", ys.len());
            let body = Formula::exists(*x, bind(phi, ys, &ps).ok()?);
            let rhs = if ys.is_empty() {
                body
            } else {
                let implication = Formula::implies(Formula::conj(unary(&ps, ys)), body);
                ps.iter()
                    .rev()
                    .fold(implication, |acc, p| Formula::forall_so(p.clone(), 1, acc))
            };
            (Formula::exists(*x, phi.clone()), rhs)
        }
    };
    Some(Instance {
        phi: phi.clone(),
        lhs,
        rhs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LawConfig {
    pub formulas: usize,
    pub exhaustive_size: u32,
    pub sample_size: u32,
    pub samples: usize,
    pub seed: u64,
}

impl Default for LawConfig {
    fn default() -> Self {
        Self {
            formulas: 200,
            exhaustive_size: 2,
            sample_size: 3,
            samples: 50,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub phi: Formula,
    pub lhs: Formula,
    pub rhs: Formula,
    pub outcome: CheckOutcome,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LawReport {
    pub law: Law,
    pub instances: usize,
    pub skipped: usize,
    pub failures: Vec<Failure>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{}: {} instances, {} skipped, {} countermodels",
            self.law.name(),
            self.instances,
            self.skipped,
            self.failures.len()
        );
        if let Some(f) = self.failures.first() {
            s.push_str(&format!(
                "; first: phi = {}, lhs = {}, rhs = {}, {}",
                print(&f.phi),
                print(&f.lhs),
                print(&f.rhs),
                f.outcome
            ));
        }
        s
    }
}

/// Exhaustive entailment up to `exhaustive_size`, then the sampled
/// structures at `sample_size`.
fn check_direction<R: Rng>(
    lhs: &Formula,
    rhs: &Formula,
    cfg: &LawConfig,
    rng: &mut R,
) -> Result<CheckOutcome, SemanticsError> {
    let budget = Budget {
        max_domain: cfg.exhaustive_size,
        max_structure_cells: 40,
        ..Budget::default()
    };
    let out = entails_upto(lhs, rhs, &budget)?;
    if !out.is_verified() || cfg.samples == 0 {
        return Ok(out);
    }
    entails_sampled(lhs, rhs, cfg.sample_size, cfg.samples, rng, &budget)
}

pub fn check_instance<R: Rng>(
    law: Law,
    inst: &Instance,
    cfg: &LawConfig,
    rng: &mut R,
) -> Result<CheckOutcome, SemanticsError> {
    let forward = check_direction(&inst.lhs, &inst.rhs, cfg, rng)?;
    if !forward.is_verified() || !law.two_sided() {
        return Ok(forward);
    }
    check_direction(&inst.rhs, &inst.lhs, cfg, rng)
}

/// The corpus the laws are checked on: clean existential-conjunctive
/// formulas over one binary and one unary relation.
pub fn law_corpus(cfg: &LawConfig) -> Vec<Formula> {
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    exists_and_corpus(&mut rng, &ExistsAndConfig::default(), cfg.formulas)
}

pub fn run_law(law: Law, cfg: &LawConfig) -> Result<LawReport, SemanticsError> {
    let corpus = law_corpus(cfg);
    let mut rng = StdRng::seed_from_u64(cfg.seed ^ (law as u64 + 1).wrapping_mul(0x9e37_79b9));
    let mut report = LawReport {
        law,
        instances: 0,
        skipped: 0,
        failures: Vec::new(),
    };
    for phi in &corpus {
        let Some(inst) = instance(law, phi, &mut rng) else {
            report.skipped += 1;
            continue;
        };
        report.instances += 1;
        let outcome = check_instance(law, &inst, cfg, &mut rng)?;
        if !outcome.is_verified() {
            report.failures.push(Failure {
                phi: inst.phi,
                lhs: inst.lhs,
                rhs: inst.rhs,
                outcome,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    #[test]
    fn equivalence_instance_shape() {
        let phi = parse("R(x1,x2)").unwrap();
        let mut rng = StdRng::seed_from_u64(1);
        let inst = instance(Law::BindEquivalence, &phi, &mut rng).unwrap();
        assert!(matches!(inst.lhs, Formula::Exists(..)));
        assert!(matches!(inst.rhs, Formula::ForallSo(..)));
        let sentence = parse("E x1. T(x1)").unwrap();
        assert!(instance(Law::BindImplication, &sentence, &mut rng).is_none());
    }

    #[test]
    fn small_run_has_no_countermodels() {
        let cfg = LawConfig {
            formulas: 15,
            samples: 5,
            ..LawConfig::default()
        };
        for law in Law::ALL {
            let report = run_law(law, &cfg).unwrap();
            assert!(report.passed(), "{}", report.summary());
        }
    }

    #[test]
    fn reversed_implication_is_refuted() {
        let cfg = LawConfig {
            formulas: 30,
            samples: 5,
            ..LawConfig::default()
        };
        let mut rng = StdRng::seed_from_u64(3);
        let mut refuted = 0;
        for phi in law_corpus(&cfg) {
            let Some(inst) = instance(Law::BindImplication, &phi, &mut rng) else {
                continue;
            };
            let reversed = Instance {
                phi,
                lhs: inst.rhs,
                rhs: inst.lhs,
            };
            if !check_instance(Law::BindImplication, &reversed, &cfg, &mut rng)
                .unwrap()
                .is_verified()
            {
                refuted += 1;
            }
        }
        assert!(refuted > 10, "{refuted}");
    }
}
