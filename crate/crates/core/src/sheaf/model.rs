use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::rational;
use super::scenario::{restrict, Scenario};
use crate::error::{Error, Result};

/// Negative slack allowed on table entries.
pub const ENTRY_TOL: f64 = 1e-12;
/// Allowed deviation of a table sum from one.
pub const SUM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Analytic,
    Sampled { shots: u64, seed: u64 },
}

/// Context-indexed probability tables.
///
/// Entries are held exactly; `tables` is the float view derived from the
/// exact values. Table `i` belongs to context `i` of the scenario.
#[derive(Clone, Debug)]
pub struct EmpiricalModel {
    scenario: Scenario,
    exact: Vec<Vec<BigRational>>,
    tables: Vec<Vec<f64>>,
    provenance: Provenance,
}

impl PartialEq for EmpiricalModel {
    fn eq(&self, other: &Self) -> bool {
        self.scenario == other.scenario && self.exact == other.exact && self.provenance == other.provenance
    }
}

impl EmpiricalModel {
    pub fn from_rationals(scenario: Scenario, exact: Vec<Vec<BigRational>>, provenance: Provenance) -> Result<Self> {
        let tables = exact
            .iter()
            .map(|t| t.iter().map(rational::to_f64).collect())
            .collect();
        let model = EmpiricalModel {
            scenario,
            exact,
            tables,
            provenance,
        };
        model.validate()?;
        Ok(model)
    }

    /// Float tables; each entry is stored as the shortest decimal that
    /// reproduces it.
    pub fn from_f64(scenario: Scenario, tables: Vec<Vec<f64>>, provenance: Provenance) -> Result<Self> {
        if let Some(x) = tables.iter().flatten().find(|x| !x.is_finite()) {
            return Err(Error::InvalidModel(format!("non-finite entry {x}")));
        }
        let exact = tables
            .iter()
            .map(|t| t.iter().map(|&x| rational::from_f64(x)).collect())
            .collect();
        EmpiricalModel::from_rationals(scenario, exact, provenance)
    }

    fn validate(&self) -> Result<()> {
        let contexts = self.scenario.contexts();
        if self.exact.len() != contexts.len() {
            return Err(Error::InvalidModel(format!(
                "{} tables for {} contexts",
                self.exact.len(),
                contexts.len()
            )));
        }
        for (ci, (ctx, table)) in contexts.iter().zip(&self.tables).enumerate() {
            let expected = self.scenario.assignment_count(ctx);
            if table.len() != expected {
                return Err(Error::InvalidModel(format!(
                    "context {ci} table has {} entries, expected {expected}",
                    table.len()
                )));
            }
            if let Some(x) = table.iter().find(|&&x| x < -ENTRY_TOL) {
                return Err(Error::InvalidModel(format!("context {ci} has negative entry {x}")));
            }
            let sum: f64 = table.iter().sum();
            if (sum - 1.0).abs() > SUM_TOL {
                return Err(Error::InvalidModel(format!("context {ci} table sums to {sum}")));
            }
        }
        Ok(())
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn tables(&self) -> &[Vec<f64>] {
        &self.tables
    }

    pub fn table(&self, context: usize) -> &[f64] {
        &self.tables[context]
    }

    pub fn exact_tables(&self) -> &[Vec<BigRational>] {
        &self.exact
    }

    /// True when every exact table sums to exactly one and has no negative
    /// entries.
    pub fn is_exactly_normalized(&self) -> bool {
        self.exact.iter().all(|t| {
            t.iter().all(|x| *x >= BigRational::zero()) && t.iter().sum::<BigRational>() == BigRational::one()
        })
    }

    /// Convex combination `λ·self + (1−λ)·other` over the same scenario.
    pub fn mix(&self, other: &EmpiricalModel, lambda: f64) -> Result<EmpiricalModel> {
        if self.scenario != other.scenario {
            return Err(Error::InvalidModel("mixing models over different scenarios".into()));
        }
        let tables = self
            .tables
            .iter()
            .zip(&other.tables)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| lambda * x + (1.0 - lambda) * y).collect())
            .collect();
        EmpiricalModel::from_f64(self.scenario.clone(), tables, Provenance::Analytic)
    }

    /// Uniform tables on every context.
    pub fn uniform(scenario: &Scenario) -> EmpiricalModel {
        let exact = scenario
            .contexts()
            .iter()
            .map(|ctx| {
                let n = scenario.assignment_count(ctx);
                vec![BigRational::new(1.into(), (n as i64).into()); n]
            })
            .collect();
        EmpiricalModel::from_rationals(scenario.clone(), exact, Provenance::Analytic).expect("uniform is valid")
    }

    /// Tables induced by a distribution over global assignments.
    pub fn from_global<T>(scenario: &Scenario, global: &[T], provenance: Provenance) -> Result<EmpiricalModel>
    where
        T: Clone + Into<BigRational>,
    {
        let all: Vec<usize> = (0..scenario.settings().len()).collect();
        if Some(global.len()) != scenario.global_size() {
            return Err(Error::InvalidModel("global distribution has the wrong size".into()));
        }
        let exact = scenario
            .contexts()
            .iter()
            .map(|ctx| {
                let mut table = vec![BigRational::zero(); scenario.assignment_count(ctx)];
                for (g, p) in global.iter().enumerate() {
                    let a = restrict(&scenario.assignment(&all, g), ctx).expect("context within settings");
                    table[scenario.assignment_index(&a)] += p.clone().into();
                }
                table
            })
            .collect();
        EmpiricalModel::from_rationals(scenario.clone(), exact, provenance)
    }
}

fn context_position(model: &EmpiricalModel, context: &[usize]) -> Result<usize> {
    let idx = model
        .scenario
        .context_index(context)
        .ok_or_else(|| Error::UnknownContext(context.to_vec()))?;
    Ok(idx)
}

/// Pushforward of a table along restriction from `from` to `to`.
pub(crate) fn push_forward<T>(scenario: &Scenario, from: &[usize], table: &[T], to: &[usize]) -> Result<Vec<T>>
where
    T: Clone + Zero,
{
    if to.iter().any(|s| !from.contains(s)) {
        return Err(Error::NotSubset {
            sub: to.to_vec(),
            of: from.to_vec(),
        });
    }
    let mut out = vec![T::zero(); scenario.assignment_count(to)];
    for (i, p) in table.iter().enumerate() {
        let a = restrict(&scenario.assignment(from, i), to)?;
        let j = scenario.assignment_index(&a);
        out[j] = out[j].clone() + p.clone();
    }
    Ok(out)
}

/// Marginal of the table on `context` over the sub-context `to`, with
/// entries ordered by `to`.
pub fn marginalize(model: &EmpiricalModel, context: &[usize], to: &[usize]) -> Result<Vec<f64>> {
    let ci = context_position(model, context)?;
    let stored = &model.scenario.contexts()[ci];
    if to.iter().any(|s| !context.contains(s)) {
        return Err(Error::NotSubset {
            sub: to.to_vec(),
            of: context.to_vec(),
        });
    }
    push_forward(&model.scenario, stored, &model.tables[ci], to)
}

pub fn marginalize_exact(model: &EmpiricalModel, context: &[usize], to: &[usize]) -> Result<Vec<BigRational>> {
    let ci = context_position(model, context)?;
    let stored = &model.scenario.contexts()[ci];
    push_forward(&model.scenario, stored, &model.exact[ci], to)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OverlapDeviation {
    pub first: usize,
    pub second: usize,
    pub shared: Vec<usize>,
    pub max_deviation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompatibilityReport {
    pub overlaps: Vec<OverlapDeviation>,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn shared_settings(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut shared: Vec<usize> = a.iter().copied().filter(|x| b.contains(x)).collect();
    shared.sort_unstable();
    shared
}

/// Compares marginals on every nonempty pairwise context overlap.
pub fn check_compatibility(model: &EmpiricalModel, tol: f64) -> CompatibilityReport {
    let contexts = model.scenario.contexts();
    let mut overlaps = Vec::new();
    for i in 0..contexts.len() {
        for j in (i + 1)..contexts.len() {
            let shared = shared_settings(&contexts[i], &contexts[j]);
            if shared.is_empty() {
                continue;
            }
            let mi = push_forward(&model.scenario, &contexts[i], &model.tables[i], &shared).expect("subset");
            let mj = push_forward(&model.scenario, &contexts[j], &model.tables[j], &shared).expect("subset");
            let max_deviation = mi.iter().zip(&mj).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            overlaps.push(OverlapDeviation {
                first: i,
                second: j,
                shared,
                max_deviation,
            });
        }
    }
    let max_deviation = overlaps.iter().map(|o| o.max_deviation).fold(0.0, f64::max);
    CompatibilityReport {
        overlaps,
        max_deviation,
        tolerance: tol,
        passed: max_deviation <= tol,
    }
}

/// Exact marginal agreement on every overlap.
pub fn is_exactly_compatible(model: &EmpiricalModel) -> bool {
    let contexts = model.scenario.contexts();
    (0..contexts.len()).all(|i| {
        ((i + 1)..contexts.len()).all(|j| {
            let shared = shared_settings(&contexts[i], &contexts[j]);
            shared.is_empty()
                || push_forward(&model.scenario, &contexts[i], &model.exact[i], &shared).expect("subset")
                    == push_forward(&model.scenario, &contexts[j], &model.exact[j], &shared).expect("subset")
        })
    })
}

/// Key of a joint event `x_s = o_s for s in settings`, restricted to
/// outcomes other than the last one in each alphabet.
type EventKey = (Vec<usize>, Vec<usize>);

fn subsets(ctx: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    (1u64..(1u64 << ctx.len())).map(move |mask| {
        let mut s: Vec<usize> = ctx
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &x)| x)
            .collect();
        s.sort_unstable();
        s
    })
}

fn product_indices(radices: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &r in radices {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..r).map(move |o| {
                    let mut next = prefix.clone();
                    next.push(o);
                    next
                })
            })
            .collect();
    }
    out
}

/// Projects tables onto the no-signalling subspace.
///
/// Each table is described by the probabilities of joint events that avoid
/// the last outcome of every alphabet; those event probabilities are
/// averaged over every context containing the event, optionally mapped by
/// `adjust`, and the tables are rebuilt by inclusion–exclusion. Compatible
/// input comes back unchanged (up to `adjust`).
pub(crate) fn project_no_signalling<T, F>(scenario: &Scenario, tables: &[Vec<T>], adjust: F) -> Vec<Vec<T>>
where
    T: Clone + Zero + One + std::ops::Sub<Output = T> + std::ops::Div<Output = T>,
    F: Fn(T) -> T,
{
    let contexts = scenario.contexts();
    let mut sums: BTreeMap<EventKey, (T, usize)> = BTreeMap::new();
    for (ctx, table) in contexts.iter().zip(tables) {
        for subset in subsets(ctx) {
            let marginal = push_forward(scenario, ctx, table, &subset).expect("subset");
            let radices: Vec<usize> = subset.iter().map(|&s| scenario.outcomes(s).len() - 1).collect();
            for outcomes in product_indices(&radices) {
                let a = super::scenario::Assignment {
                    settings: subset.clone(),
                    outcomes: outcomes.clone(),
                };
                let p = marginal[scenario.assignment_index(&a)].clone();
                let entry = sums.entry((subset.clone(), outcomes)).or_insert((T::zero(), 0));
                entry.0 = entry.0.clone() + p;
                entry.1 += 1;
            }
        }
    }
    let events: BTreeMap<EventKey, T> = sums
        .into_iter()
        .map(|(k, (sum, count))| {
            let mut n = T::zero();
            for _ in 0..count {
                n = n + T::one();
            }
            (k, adjust(sum / n))
        })
        .collect();

    let event_prob = |settings: &[usize], outcomes: &[usize]| -> T {
        if settings.is_empty() {
            return T::one();
        }
        let mut pairs: Vec<(usize, usize)> = settings.iter().copied().zip(outcomes.iter().copied()).collect();
        pairs.sort_unstable();
        let key = (pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect());
        events.get(&key).cloned().expect("event enumerated from a containing context")
    };

    contexts
        .iter()
        .map(|ctx| {
            (0..scenario.assignment_count(ctx))
                .map(|idx| {
                    let a = scenario.assignment(ctx, idx);
                    let mut fixed_s = Vec::new();
                    let mut fixed_o = Vec::new();
                    let mut free = Vec::new();
                    for (&s, &o) in a.settings.iter().zip(&a.outcomes) {
                        if o + 1 == scenario.outcomes(s).len() {
                            free.push(s);
                        } else {
                            fixed_s.push(s);
                            fixed_o.push(o);
                        }
                    }
                    // Σ_{T ⊆ free} (−1)^{|T|} Σ_{o_T} P(fixed ∧ x_T = o_T)
                    let mut total = T::zero();
                    for mask in 0u64..(1u64 << free.len()) {
                        let chosen: Vec<usize> = free
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| mask & (1 << i) != 0)
                            .map(|(_, &s)| s)
                            .collect();
                        let radices: Vec<usize> = chosen.iter().map(|&s| scenario.outcomes(s).len() - 1).collect();
                        let mut term = T::zero();
                        for outs in product_indices(&radices) {
                            let mut settings = fixed_s.clone();
                            settings.extend(&chosen);
                            let mut outcomes = fixed_o.clone();
                            outcomes.extend(outs);
                            term = term + event_prob(&settings, &outcomes);
                        }
                        if mask.count_ones() % 2 == 0 {
                            total = total + term;
                        } else {
                            total = total - term;
                        }
                    }
                    total
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sheaf::scenario::chsh_scenario;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn bell_tables() -> Vec<Vec<f64>> {
        vec![vec![0.5, 0.0, 0.0, 0.5]; 4]
    }

    #[test]
    fn marginalize_examples() {
        let m = EmpiricalModel::uniform(&chsh_scenario());
        assert_eq!(marginalize(&m, &[0, 2], &[0]).unwrap(), vec![0.5, 0.5]);
        assert_eq!(marginalize(&m, &[0, 2], &[0, 2]).unwrap(), vec![0.25; 4]);
        assert_eq!(marginalize(&m, &[0, 2], &[2, 0]).unwrap(), vec![0.25; 4]);

        let m = EmpiricalModel::from_f64(chsh_scenario(), bell_tables(), Provenance::Analytic).unwrap();
        assert_eq!(marginalize(&m, &[0, 2], &[0]).unwrap(), vec![0.5, 0.5]);
        assert_eq!(marginalize(&m, &[2, 0], &[2]).unwrap(), vec![0.5, 0.5]);
        assert!(matches!(marginalize(&m, &[0, 2], &[1]), Err(Error::NotSubset { .. })));
        assert!(matches!(marginalize(&m, &[0, 1], &[0]), Err(Error::UnknownContext(_))));
    }

    #[test]
    fn compatibility_examples() {
        let m = EmpiricalModel::from_f64(chsh_scenario(), bell_tables(), Provenance::Analytic).unwrap();
        assert!(check_compatibility(&m, 1e-10).passed);

        // Alice's marginal on `a` differs by 0.2 between the b and b' contexts.
        let mut t = bell_tables();
        t[1] = vec![0.7, 0.0, 0.0, 0.3];
        let m = EmpiricalModel::from_f64(chsh_scenario(), t, Provenance::Analytic).unwrap();
        let report = check_compatibility(&m, 1e-10);
        assert!(!report.passed);
        assert!((report.max_deviation - 0.2).abs() < 1e-12);

        let single = Scenario::from_labels(&[("x", &[0, 1])], &[&["x"]]).unwrap();
        let m = EmpiricalModel::from_f64(single, vec![vec![0.3, 0.7]], Provenance::Analytic).unwrap();
        let report = check_compatibility(&m, 0.0);
        assert!(report.passed && report.overlaps.is_empty());
    }

    #[test]
    fn invalid_tables_rejected() {
        let s = chsh_scenario();
        assert!(EmpiricalModel::from_f64(s.clone(), vec![vec![0.25; 4]; 3], Provenance::Analytic).is_err());
        assert!(EmpiricalModel::from_f64(s.clone(), vec![vec![0.3; 4]; 4], Provenance::Analytic).is_err());
        let mut t = vec![vec![0.25; 4]; 4];
        t[0] = vec![0.6, 0.6, -0.2, 0.0];
        assert!(EmpiricalModel::from_f64(s, t, Provenance::Analytic).is_err());
    }

    #[test]
    fn projection_is_identity_on_compatible_models() {
        let m = EmpiricalModel::from_f64(chsh_scenario(), bell_tables(), Provenance::Analytic).unwrap();
        let projected = project_no_signalling(m.scenario(), m.exact_tables(), |x| x);
        assert_eq!(projected, m.exact_tables());
    }

    #[test]
    fn projection_repairs_signalling_tables() {
        let s = chsh_scenario();
        let mut t: Vec<Vec<BigRational>> = vec![vec![q(1, 4); 4]; 4];
        t[1] = vec![q(7, 20), q(1, 4), q(3, 20), q(1, 4)];
        let projected = project_no_signalling(&s, &t, |x| x);
        let m = EmpiricalModel::from_rationals(s, projected, Provenance::Analytic).unwrap();
        assert!(is_exactly_compatible(&m));
        assert!(m.is_exactly_normalized());
    }

    #[test]
    fn from_global_point_mass() {
        let s = chsh_scenario();
        let mut g = vec![q(0, 1); 16];
        g[5] = q(1, 1);
        let m = EmpiricalModel::from_global(&s, &g, Provenance::Analytic).unwrap();
        assert!(is_exactly_compatible(&m));
        // global index 5 = (a,a',b,b') outcome indices (0,1,0,1)
        assert_eq!(m.table(0), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(m.table(3), &[0.0, 0.0, 0.0, 1.0]);
    }
}
