//! Global-section decision: does one distribution over all settings
//! reproduce every context table?

use num_rational::BigRational;
use num_traits::Zero;

use super::lp::{phase_one, LpOptions, LpScalar};
use super::model::{
    check_compatibility, is_exactly_compatible, project_no_signalling, push_forward, EmpiricalModel, Provenance,
    SUM_TOL,
};
use super::rational;
use super::scenario::{restrict, Scenario};
use crate::error::{Error, Result};

/// Upper bound on the number of global assignments.
pub const MAX_GLOBAL_ASSIGNMENTS: usize = 1_000_000;
/// Grid used to turn float tables into rationals in exact mode.
pub const EXACT_GRID_DIGITS: u32 = 12;
/// Default feasibility tolerance in float mode.
pub const FLOAT_TOL: f64 = 1e-8;
/// Classical bound of every CHSH-family expression.
pub const CHSH_CLASSICAL_BOUND: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SolverMode {
    ExactRational,
    Float { tol: f64 },
}

impl SolverMode {
    pub fn float() -> Self {
        SolverMode::Float { tol: FLOAT_TOL }
    }

    pub fn name(&self) -> String {
        match self {
            SolverMode::ExactRational => "exact_rational".into(),
            SolverMode::Float { tol } => format!("float(tol={tol:e})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Feasible,
    Infeasible,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Feasible => "feasible",
            Verdict::Infeasible => "infeasible",
        }
    }
}

/// One CHSH-family expression: `Σ E` over the four contexts with the
/// minus sign on context `minus_on`, times `sign`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChshVariant {
    /// Context index (in the canonical `(a,b), (a,b'), (a',b), (a',b')` order).
    pub minus_on: usize,
    /// Setting labels of that context, Alice's first.
    pub minus_labels: (String, String),
    pub sign: i8,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    /// A violated CHSH-family inequality.
    Chsh {
        variant: ChshVariant,
        value: f64,
        bound: f64,
    },
    /// Linear functional over (normalization, context cells) that is
    /// nonpositive on every global assignment but positive on the model.
    Farkas {
        coefficients: Vec<(String, f64)>,
        value: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpStats {
    pub iterations: usize,
    /// Max |witness marginal − table| when feasible, the LP's residual
    /// infeasibility otherwise.
    pub max_residual: f64,
    /// Max change of any table entry made before solving (rounding to the
    /// rational grid or no-signalling projection of sampled data).
    pub preprocessing_radius: f64,
    pub variables: usize,
    pub constraints: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SectionResult {
    pub verdict: Verdict,
    pub mode: SolverMode,
    /// Distribution over global assignments (mixed radix over all settings).
    pub witness: Option<Vec<f64>>,
    pub exact_witness: Option<Vec<BigRational>>,
    pub certificate: Option<Certificate>,
    pub stats: LpStats,
}

impl SectionResult {
    pub fn is_feasible(&self) -> bool {
        self.verdict == Verdict::Feasible
    }
}

/// Compatibility tolerance applied before solving.
pub fn working_tolerance(model: &EmpiricalModel) -> f64 {
    match model.provenance() {
        Provenance::Analytic => SUM_TOL,
        // five standard deviations of a difference of two frequency estimates
        Provenance::Sampled { shots, .. } => 5.0 * (0.5 / shots.max(1) as f64).sqrt(),
    }
}

struct Constraints {
    labels: Vec<String>,
    /// For each row, the global assignments it sums over.
    support: Vec<Vec<usize>>,
}

fn build_constraints(scenario: &Scenario, globals: usize) -> Constraints {
    let all: Vec<usize> = (0..scenario.settings().len()).collect();
    let mut labels = vec!["normalization".to_string()];
    let mut support = vec![(0..globals).collect::<Vec<_>>()];
    for ctx in scenario.contexts() {
        let base = support.len();
        let count = scenario.assignment_count(ctx);
        for k in 0..count {
            labels.push(format!("p[{}]", scenario.describe(&scenario.assignment(ctx, k))));
            support.push(Vec::new());
        }
        for g in 0..globals {
            let a = restrict(&scenario.assignment(&all, g), ctx).expect("context within settings");
            support[base + scenario.assignment_index(&a)].push(g);
        }
    }
    Constraints { labels, support }
}

fn dense_rows<T: LpScalar>(c: &Constraints, globals: usize) -> Vec<Vec<T>> {
    c.support
        .iter()
        .map(|cols| {
            let mut row = vec![T::zero(); globals];
            for &g in cols {
                row[g] = T::one();
            }
            row
        })
        .collect()
}

fn rhs<T: Clone>(one: T, tables: &[Vec<T>]) -> Vec<T> {
    std::iter::once(one).chain(tables.iter().flatten().cloned()).collect()
}

fn marginal_residual(scenario: &Scenario, witness: &[f64], tables: &[Vec<f64>]) -> f64 {
    let all: Vec<usize> = (0..scenario.settings().len()).collect();
    scenario
        .contexts()
        .iter()
        .zip(tables)
        .map(|(ctx, table)| {
            let m = push_forward(scenario, &all, witness, ctx).expect("subset");
            m.iter().zip(table).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
        })
        .fold((witness.iter().sum::<f64>() - 1.0).abs(), f64::max)
}

/// Decides whether `model` admits a global section.
pub fn global_section(model: &EmpiricalModel, mode: SolverMode) -> Result<SectionResult> {
    let scenario = model.scenario();
    let globals = scenario
        .global_size()
        .filter(|&g| g <= MAX_GLOBAL_ASSIGNMENTS)
        .ok_or(Error::TooLarge {
            variables: scenario.global_size().unwrap_or(usize::MAX),
            limit: MAX_GLOBAL_ASSIGNMENTS,
        })?;
    let tol = working_tolerance(model);
    let report = check_compatibility(model, tol);
    if !report.passed {
        return Err(Error::IncompatibleModel {
            max_deviation: report.max_deviation,
            tolerance: tol,
        });
    }
    let constraints = build_constraints(scenario, globals);
    let sampled = matches!(model.provenance(), Provenance::Sampled { .. });

    match mode {
        SolverMode::Float { tol } => solve_float(model, &constraints, globals, sampled, tol),
        SolverMode::ExactRational => solve_exact(model, &constraints, globals, sampled),
    }
}

fn max_change(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn solve_float(
    model: &EmpiricalModel,
    constraints: &Constraints,
    globals: usize,
    sampled: bool,
    tol: f64,
) -> Result<SectionResult> {
    let scenario = model.scenario();
    let tables: Vec<Vec<f64>> = if sampled {
        project_no_signalling(scenario, model.tables(), |x| x)
    } else {
        model.tables().to_vec()
    };
    let preprocessing_radius = max_change(&tables, model.tables());
    let a: Vec<Vec<f64>> = dense_rows(constraints, globals);
    let b = rhs(1.0, &tables);
    let opts = LpOptions {
        feasibility_tol: tol,
        ..LpOptions::default()
    };
    let lp = phase_one(&a, &b, opts);
    let mode = SolverMode::Float { tol };
    let mut stats = LpStats {
        iterations: lp.iterations,
        max_residual: lp.infeasibility,
        preprocessing_radius,
        variables: globals,
        constraints: a.len(),
    };
    if lp.feasible {
        let witness: Vec<f64> = lp.x.iter().map(|&v| v.max(0.0)).collect();
        let residual = marginal_residual(scenario, &witness, &tables);
        stats.max_residual = residual;
        if residual <= tol {
            return Ok(SectionResult {
                verdict: Verdict::Feasible,
                mode,
                witness: Some(witness),
                exact_witness: None,
                certificate: None,
                stats,
            });
        }
    }
    let certificate = certificate_for(scenario, &tables, constraints, lp.farkas.as_deref(), |y| *y);
    Ok(SectionResult {
        verdict: Verdict::Infeasible,
        mode,
        witness: None,
        exact_witness: None,
        certificate: Some(certificate),
        stats,
    })
}

/// Rational tables for the exact solver plus the largest entry change.
fn exact_tables(model: &EmpiricalModel, sampled: bool) -> Result<Vec<Vec<BigRational>>> {
    let scenario = model.scenario();
    if model.is_exactly_normalized() && is_exactly_compatible(model) {
        return Ok(model.exact_tables().to_vec());
    }
    let tables = if sampled {
        project_no_signalling(scenario, model.exact_tables(), |x| x)
    } else {
        project_no_signalling(scenario, model.exact_tables(), |x| {
            rational::round_to_grid(&x, EXACT_GRID_DIGITS)
        })
    };
    if let Some(x) = tables.iter().flatten().find(|x| *x < &<BigRational as Zero>::zero()) {
        return Err(Error::Rounding(format!(
            "rational model has negative entry {}",
            rational::format_number(x)
        )));
    }
    Ok(tables)
}

fn solve_exact(
    model: &EmpiricalModel,
    constraints: &Constraints,
    globals: usize,
    sampled: bool,
) -> Result<SectionResult> {
    let scenario = model.scenario();
    let tables = exact_tables(model, sampled)?;
    let float_tables: Vec<Vec<f64>> = tables
        .iter()
        .map(|t| t.iter().map(rational::to_f64).collect())
        .collect();
    let preprocessing_radius = max_change(&float_tables, model.tables());
    let a: Vec<Vec<BigRational>> = dense_rows(constraints, globals);
    let b = rhs(num_traits::One::one(), &tables);
    let lp = phase_one(&a, &b, LpOptions::default());
    let mut stats = LpStats {
        iterations: lp.iterations,
        max_residual: rational::to_f64(&lp.infeasibility),
        preprocessing_radius,
        variables: globals,
        constraints: a.len(),
    };
    if lp.feasible {
        let witness: Vec<f64> = lp.x.iter().map(rational::to_f64).collect();
        stats.max_residual = marginal_residual(scenario, &witness, &float_tables);
        return Ok(SectionResult {
            verdict: Verdict::Feasible,
            mode: SolverMode::ExactRational,
            witness: Some(witness),
            exact_witness: Some(lp.x),
            certificate: None,
            stats,
        });
    }
    let certificate = certificate_for(scenario, &float_tables, constraints, lp.farkas.as_deref(), |y| {
        rational::to_f64(y)
    });
    Ok(SectionResult {
        verdict: Verdict::Infeasible,
        mode: SolverMode::ExactRational,
        witness: None,
        exact_witness: None,
        certificate: Some(certificate),
        stats,
    })
}

fn certificate_for<T>(
    scenario: &Scenario,
    tables: &[Vec<f64>],
    constraints: &Constraints,
    farkas: Option<&[T]>,
    to_f64: impl Fn(&T) -> f64,
) -> Certificate {
    if let Ok((value, variant)) = chsh_family_of(scenario, tables) {
        if value > CHSH_CLASSICAL_BOUND {
            return Certificate::Chsh {
                variant,
                value,
                bound: CHSH_CLASSICAL_BOUND,
            };
        }
    }
    let y: Vec<f64> = farkas
        .map(|f| f.iter().map(&to_f64).collect())
        .unwrap_or_else(|| vec![0.0; constraints.labels.len()]);
    let b = rhs(1.0, tables);
    let value = y.iter().zip(&b).map(|(a, c)| a * c).sum();
    Certificate::Farkas {
        coefficients: constraints.labels.iter().cloned().zip(y).collect(),
        value,
    }
}

/// Settings of a CHSH-shaped scenario as `[a, a', b, b']` and the context
/// indices of `(a,b), (a,b'), (a',b), (a',b')`.
fn chsh_layout(scenario: &Scenario) -> Result<([usize; 4], [usize; 4])> {
    let wrong = |msg: &str| Err(Error::WrongScenario(msg.to_string()));
    if scenario.settings().len() != 4 || scenario.contexts().len() != 4 {
        return wrong("need 4 settings and 4 contexts");
    }
    if scenario.contexts().iter().any(|c| c.len() != 2) {
        return wrong("every context must hold two settings");
    }
    for s in 0..4 {
        let mut outs = scenario.outcomes(s).to_vec();
        outs.sort_unstable();
        if outs != [-1, 1] {
            return wrong("outcomes must be {+1, -1}");
        }
    }
    let neighbours = |s: usize| -> Vec<usize> {
        let mut n: Vec<usize> = scenario
            .contexts()
            .iter()
            .filter(|c| c.contains(&s))
            .flat_map(|c| c.iter().copied().filter(|&x| x != s))
            .collect();
        n.sort_unstable();
        n
    };
    let a = 0;
    let bs = neighbours(a);
    if bs.len() != 2 {
        return wrong("contexts do not form a 2x2 bipartite cover");
    }
    let a2 = (0..4).find(|x| *x != a && !bs.contains(x)).expect("4 settings");
    if neighbours(a2) != bs || neighbours(bs[0]) != [a, a2] || neighbours(bs[1]) != [a, a2] {
        return wrong("contexts do not form a 2x2 bipartite cover");
    }
    let settings = [a, a2, bs[0], bs[1]];
    let ctx = |x: usize, y: usize| scenario.context_index(&[x, y]).expect("bipartite pair present");
    let contexts = [ctx(a, bs[0]), ctx(a, bs[1]), ctx(a2, bs[0]), ctx(a2, bs[1])];
    Ok((settings, contexts))
}

/// Correlator `Σ o o' p(o, o')` for a two-setting context.
fn correlator(scenario: &Scenario, context: &[usize], table: &[f64]) -> f64 {
    table
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let a = scenario.assignment(context, k);
            let v: i64 = a
                .settings
                .iter()
                .zip(&a.outcomes)
                .map(|(&s, &o)| scenario.outcomes(s)[o])
                .product();
            v as f64 * p
        })
        .sum()
}

fn chsh_family_of(scenario: &Scenario, tables: &[Vec<f64>]) -> Result<(f64, ChshVariant)> {
    let (settings, contexts) = chsh_layout(scenario)?;
    let e: Vec<f64> = contexts
        .iter()
        .map(|&ci| correlator(scenario, &scenario.contexts()[ci], &tables[ci]))
        .collect();
    let total: f64 = e.iter().sum();
    let (minus_on, s) = (0..4)
        .map(|k| (k, total - 2.0 * e[k]))
        .fold((0, 0.0_f64), |best, cand| if cand.1.abs() > best.1.abs() { cand } else { best });
    let names = scenario.settings();
    let alice = if minus_on < 2 { settings[0] } else { settings[1] };
    let bob = if minus_on % 2 == 0 { settings[2] } else { settings[3] };
    let variant = ChshVariant {
        minus_on,
        minus_labels: (names[alice].clone(), names[bob].clone()),
        sign: if s < 0.0 { -1 } else { 1 },
    };
    Ok((s.abs(), variant))
}

/// Largest `|S|` over the eight CHSH-family expressions and the variant
/// attaining it.
pub fn chsh_family_value(model: &EmpiricalModel) -> Result<(f64, ChshVariant)> {
    chsh_family_of(model.scenario(), model.tables())
}

/// Re-checks a witness against the model's tables.
pub fn verify_witness(model: &EmpiricalModel, witness: &[f64]) -> f64 {
    if witness.iter().any(|&w| w < 0.0) {
        return f64::INFINITY;
    }
    marginal_residual(model.scenario(), witness, model.tables())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sheaf::scenario::chsh_scenario;

    fn pr_box() -> EmpiricalModel {
        let corr = vec![0.5, 0.0, 0.0, 0.5];
        let anti = vec![0.0, 0.5, 0.5, 0.0];
        EmpiricalModel::from_f64(
            chsh_scenario(),
            vec![corr.clone(), corr.clone(), corr, anti],
            Provenance::Analytic,
        )
        .unwrap()
    }

    #[test]
    fn pr_box_is_maximally_contextual() {
        let (s, v) = chsh_family_value(&pr_box()).unwrap();
        assert_eq!(s, 4.0);
        assert_eq!(v.minus_on, 3);
        for mode in [SolverMode::float(), SolverMode::ExactRational] {
            let res = global_section(&pr_box(), mode).unwrap();
            assert_eq!(res.verdict, Verdict::Infeasible);
            match res.certificate {
                Some(Certificate::Chsh { value, .. }) => assert_eq!(value, 4.0),
                other => panic!("unexpected certificate {other:?}"),
            }
        }
    }

    #[test]
    fn uniform_model_glues() {
        let m = EmpiricalModel::uniform(&chsh_scenario());
        assert_eq!(chsh_family_value(&m).unwrap().0, 0.0);
        for mode in [SolverMode::float(), SolverMode::ExactRational] {
            let res = global_section(&m, mode).unwrap();
            assert!(res.is_feasible());
            assert!(verify_witness(&m, res.witness.as_ref().unwrap()) < 1e-12);
        }
    }

    #[test]
    fn incompatible_model_is_rejected() {
        let mut t = vec![vec![0.25; 4]; 4];
        t[1] = vec![0.45, 0.25, 0.05, 0.25];
        let m = EmpiricalModel::from_f64(chsh_scenario(), t, Provenance::Analytic).unwrap();
        assert!(matches!(
            global_section(&m, SolverMode::float()),
            Err(Error::IncompatibleModel { .. })
        ));
    }

    #[test]
    fn too_large_scenario_is_rejected() {
        let alphabet: Vec<i64> = (0..10).collect();
        let names: Vec<String> = (0..7).map(|i| format!("x{i}")).collect();
        let s = Scenario::new(names, vec![alphabet; 7], (0..7).map(|i| vec![i]).collect()).unwrap();
        let m = EmpiricalModel::uniform(&s);
        assert!(matches!(global_section(&m, SolverMode::float()), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn wrong_scenario_for_chsh_value() {
        let s = Scenario::from_labels(&[("x", &[0, 1])], &[&["x"]]).unwrap();
        let m = EmpiricalModel::uniform(&s);
        assert!(matches!(chsh_family_value(&m), Err(Error::WrongScenario(_))));
    }

    #[test]
    fn general_scenario_gets_farkas_certificate() {
        // Three binary settings, pairwise perfectly anticorrelated: no global section.
        let bit: &[i64] = &[0, 1];
        let s = Scenario::from_labels(
            &[("x", bit), ("y", bit), ("z", bit)],
            &[&["x", "y"], &["y", "z"], &["x", "z"]],
        )
        .unwrap();
        let anti = vec![0.0, 0.5, 0.5, 0.0];
        let m = EmpiricalModel::from_f64(s, vec![anti; 3], Provenance::Analytic).unwrap();
        for mode in [SolverMode::float(), SolverMode::ExactRational] {
            let res = global_section(&m, mode).unwrap();
            assert_eq!(res.verdict, Verdict::Infeasible);
            match res.certificate {
                Some(Certificate::Farkas { value, .. }) => assert!(value > 1e-8),
                other => panic!("unexpected certificate {other:?}"),
            }
        }
    }
}
