use crate::error::{Error, Result};

/// Measurement scenario: settings, a cover of contexts and an outcome
/// alphabet per setting.
///
/// Assignments over a context are enumerated in mixed radix with the last
/// setting of the context varying fastest and outcomes in alphabet order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    settings: Vec<String>,
    outcomes: Vec<Vec<i64>>,
    contexts: Vec<Vec<usize>>,
}

fn valid_label(label: &str) -> bool {
    !label.is_empty() && !label.chars().any(|ch| ch.is_whitespace() || ch == ':' || ch == '#')
}

impl Scenario {
    pub fn new(settings: Vec<String>, outcomes: Vec<Vec<i64>>, contexts: Vec<Vec<usize>>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if settings.is_empty() {
            return bad("no settings".into());
        }
        if outcomes.len() != settings.len() {
            return bad(format!("{} outcome alphabets for {} settings", outcomes.len(), settings.len()));
        }
        for (i, s) in settings.iter().enumerate() {
            if !valid_label(s) {
                return bad(format!("invalid setting label {s:?}"));
            }
            if settings[..i].contains(s) {
                return bad(format!("duplicate setting {s:?}"));
            }
        }
        for (s, alphabet) in settings.iter().zip(&outcomes) {
            if alphabet.is_empty() {
                return bad(format!("setting {s:?} has no outcomes"));
            }
            if (1..alphabet.len()).any(|i| alphabet[..i].contains(&alphabet[i])) {
                return bad(format!("setting {s:?} has duplicate outcomes"));
            }
        }
        if contexts.is_empty() {
            return bad("no contexts".into());
        }
        let mut seen: Vec<Vec<usize>> = Vec::new();
        for ctx in &contexts {
            if ctx.is_empty() {
                return bad("empty context".into());
            }
            if let Some(&x) = ctx.iter().find(|&&x| x >= settings.len()) {
                return bad(format!("context references unknown setting index {x}"));
            }
            let mut sorted = ctx.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != ctx.len() {
                return bad(format!("context {ctx:?} repeats a setting"));
            }
            if seen.contains(&sorted) {
                return bad(format!("duplicate context {ctx:?}"));
            }
            seen.push(sorted);
        }
        for (i, s) in settings.iter().enumerate() {
            if !contexts.iter().any(|ctx| ctx.contains(&i)) {
                return bad(format!("setting {s:?} appears in no context"));
            }
        }
        Ok(Scenario {
            settings,
            outcomes,
            contexts,
        })
    }

    /// Builds a scenario from setting names; contexts list names.
    pub fn from_labels(settings: &[(&str, &[i64])], contexts: &[&[&str]]) -> Result<Self> {
        let names: Vec<String> = settings.iter().map(|(s, _)| s.to_string()).collect();
        let outcomes = settings.iter().map(|(_, o)| o.to_vec()).collect();
        let contexts = contexts
            .iter()
            .map(|ctx| {
                ctx.iter()
                    .map(|label| {
                        names
                            .iter()
                            .position(|n| n == label)
                            .ok_or_else(|| Error::InvalidScenario(format!("unknown setting {label:?}")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Scenario::new(names, outcomes, contexts)
    }

    pub fn settings(&self) -> &[String] {
        &self.settings
    }

    pub fn setting_index(&self, label: &str) -> Option<usize> {
        self.settings.iter().position(|s| s == label)
    }

    pub fn outcomes(&self, setting: usize) -> &[i64] {
        &self.outcomes[setting]
    }

    pub fn contexts(&self) -> &[Vec<usize>] {
        &self.contexts
    }

    /// Index of the context equal to `ctx` as a set.
    pub fn context_index(&self, ctx: &[usize]) -> Option<usize> {
        let mut key = ctx.to_vec();
        key.sort_unstable();
        self.contexts.iter().position(|c| {
            let mut s = c.clone();
            s.sort_unstable();
            s == key
        })
    }

    pub fn radices(&self, settings: &[usize]) -> Vec<usize> {
        settings.iter().map(|&s| self.outcomes[s].len()).collect()
    }

    /// Number of assignments over `settings`.
    pub fn assignment_count(&self, settings: &[usize]) -> usize {
        settings.iter().map(|&s| self.outcomes[s].len()).product()
    }

    /// Number of global assignments, `None` on overflow.
    pub fn global_size(&self) -> Option<usize> {
        self.outcomes
            .iter()
            .try_fold(1usize, |acc, o| acc.checked_mul(o.len()))
    }

    /// Assignment with flat index `index` over `settings`.
    pub fn assignment(&self, settings: &[usize], index: usize) -> Assignment {
        let radices = self.radices(settings);
        let mut outcomes = vec![0; settings.len()];
        let mut rest = index;
        for (slot, r) in outcomes.iter_mut().zip(&radices).rev() {
            *slot = rest % r;
            rest /= r;
        }
        Assignment {
            settings: settings.to_vec(),
            outcomes,
        }
    }

    pub fn assignment_index(&self, a: &Assignment) -> usize {
        a.settings
            .iter()
            .zip(&a.outcomes)
            .fold(0, |acc, (&s, &o)| acc * self.outcomes[s].len() + o)
    }

    pub fn describe(&self, a: &Assignment) -> String {
        a.settings
            .iter()
            .zip(&a.outcomes)
            .map(|(&s, &o)| format!("{}={}", self.settings[s], fmt_outcome(self.outcomes[s][o])))
            .collect::<Vec<_>>()
            .join(",")
    }
}

pub(crate) fn fmt_outcome(v: i64) -> String {
    if v > 0 {
        format!("+{v}")
    } else {
        v.to_string()
    }
}

/// Outcome choice (as alphabet indices) for an ordered list of settings.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    pub settings: Vec<usize>,
    pub outcomes: Vec<usize>,
}

/// Forgets every component whose setting is not in `to`; output follows
/// the order of `to`.
pub fn restrict(a: &Assignment, to: &[usize]) -> Result<Assignment> {
    let outcomes = to
        .iter()
        .map(|s| {
            a.settings
                .iter()
                .position(|x| x == s)
                .map(|pos| a.outcomes[pos])
                .ok_or_else(|| Error::NotSubset {
                    sub: to.to_vec(),
                    of: a.settings.clone(),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Assignment {
        settings: to.to_vec(),
        outcomes,
    })
}

/// Settings `a, a', b, b'` with contexts `{a,b}, {a,b'}, {a',b}, {a',b'}`
/// and outcomes `±1`.
pub fn chsh_scenario() -> Scenario {
    let pm: &[i64] = &[1, -1];
    Scenario::from_labels(
        &[("a", pm), ("a'", pm), ("b", pm), ("b'", pm)],
        &[&["a", "b"], &["a", "b'"], &["a'", "b"], &["a'", "b'"]],
    )
    .expect("static scenario")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chsh_scenario_shape() {
        let s = chsh_scenario();
        assert_eq!(s.global_size(), Some(16));
        for ctx in s.contexts() {
            assert_eq!(s.assignment_count(ctx), 4);
        }
        let ctxs = s.contexts();
        for i in 0..ctxs.len() {
            for j in (i + 1)..ctxs.len() {
                let shared = ctxs[i].iter().filter(|x| ctxs[j].contains(x)).count();
                // {a,b} and {a',b'} are disjoint; every other pair shares one setting
                let disjoint = (i == 0 && j == 3) || (i == 1 && j == 2);
                assert_eq!(shared, if disjoint { 0 } else { 1 });
            }
        }
    }

    #[test]
    fn restrict_cases() {
        let a = Assignment {
            settings: vec![0, 2],
            outcomes: vec![0, 1],
        };
        assert_eq!(
            restrict(&a, &[0]).unwrap(),
            Assignment {
                settings: vec![0],
                outcomes: vec![0]
            }
        );
        assert_eq!(restrict(&a, &[0, 2]).unwrap(), a);
        assert_eq!(restrict(&a, &[]).unwrap().settings.len(), 0);
        assert!(matches!(restrict(&a, &[1]), Err(Error::NotSubset { .. })));
    }

    #[test]
    fn assignment_indexing_round_trips() {
        let s = chsh_scenario();
        for idx in 0..16 {
            let a = s.assignment(&[0, 1, 2, 3], idx);
            assert_eq!(s.assignment_index(&a), idx);
        }
        let a = s.assignment(&[0, 2], 1);
        assert_eq!(s.describe(&a), "a=+1,b=-1");
    }

    #[test]
    fn invalid_scenarios() {
        let pm: &[i64] = &[1, -1];
        assert!(Scenario::from_labels(&[("a", pm), ("b", pm)], &[&["a"]]).is_err());
        assert!(Scenario::from_labels(&[("a", pm)], &[&["a"], &["a"]]).is_err());
        assert!(Scenario::from_labels(&[("a", pm), ("a", pm)], &[&["a"]]).is_err());
        assert!(Scenario::from_labels(&[("a b", pm)], &[&["a b"]]).is_err());
        assert!(Scenario::from_labels(&[("a", &[1, 1])], &[&["a"]]).is_err());
        assert!(Scenario::new(vec!["a".into()], vec![vec![1]], vec![vec![]]).is_err());
    }
}
