use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    /// `LHS = RHS = 0`; excluded from the extrema.
    Vacuous,
    /// `RHS = 0 < LHS`.
    Unbounded,
}

/// Both sides of one inequality at its worst sampled point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measure {
    pub lhs: f64,
    pub rhs: f64,
}

impl Measure {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        Measure { lhs, rhs }
    }

    pub fn status(&self) -> Status {
        if self.rhs > 0.0 {
            Status::Ok
        } else if self.lhs == 0.0 {
            Status::Vacuous
        } else {
            Status::Unbounded
        }
    }

    pub fn ratio(&self) -> Option<f64> {
        (self.status() == Status::Ok).then(|| self.lhs / self.rhs)
    }

    /// The pair with the larger ratio; an unbounded pair beats any ratio and
    /// a vacuous pair loses to everything.
    pub fn worse(self, other: Measure) -> Measure {
        use Status::*;
        match (self.status(), other.status()) {
            (Unbounded, _) => self,
            (_, Unbounded) => other,
            (Vacuous, _) => other,
            (_, Vacuous) => self,
            _ => {
                if other.lhs * self.rhs > self.lhs * other.rhs {
                    other
                } else {
                    self
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberRatio {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    pub status: Status,
}

/// Per-member ratios of one checker with their extrema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub check: String,
    pub members: Vec<MemberRatio>,
    pub max_ratio: Option<f64>,
    pub min_ratio: Option<f64>,
    pub unbounded: usize,
    /// Max ratio at the finer grid over max ratio at the coarser one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability: Option<f64>,
}

impl RatioReport {
    pub fn from_measures(check: impl Into<String>, items: Vec<(String, Measure)>) -> Self {
        let members: Vec<MemberRatio> = items
            .into_iter()
            .map(|(name, m)| MemberRatio {
                name,
                lhs: m.lhs,
                rhs: m.rhs,
                ratio: m.ratio(),
                status: m.status(),
            })
            .collect();
        let ratios: Vec<f64> = members.iter().filter_map(|m| m.ratio).collect();
        let max_ratio = ratios.iter().copied().reduce(f64::max);
        let min_ratio = ratios.iter().copied().reduce(f64::min);
        let unbounded = members.iter().filter(|m| m.status == Status::Unbounded).count();
        RatioReport {
            check: check.into(),
            members,
            max_ratio,
            min_ratio,
            unbounded,
            stability: None,
        }
    }

    pub fn single(check: impl Into<String>, name: impl Into<String>, m: Measure) -> Self {
        Self::from_measures(check, vec![(name.into(), m)])
    }

    /// Finite maximum over at least one non-vacuous member.
    pub fn is_finite(&self) -> bool {
        self.unbounded == 0 && self.max_ratio.is_some_and(f64::is_finite)
    }

    pub fn is_vacuous(&self) -> bool {
        self.members.iter().all(|m| m.status == Status::Vacuous)
    }

    /// Records the stability factor of `self` against the coarser report.
    pub fn set_stability(&mut self, coarse: &RatioReport) {
        self.stability = match (self.max_ratio, coarse.max_ratio) {
            (Some(f), Some(c)) if c > 0.0 => Some(f / c),
            _ => None,
        };
    }

    /// Finite and, if a stability factor is present, inside `[lo, hi]`.
    pub fn passes(&self, lo: f64, hi: f64) -> bool {
        self.is_finite() && self.stability.map_or(true, |s| s >= lo && s <= hi)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,member,lhs,rhs,ratio,status\n");
        for m in &self.members {
            let status = match m.status {
                Status::Ok => "ok",
                Status::Vacuous => "vacuous",
                Status::Unbounded => "unbounded",
            };
            let ratio = m.ratio.map(|r| format!("{r:e}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{:e},{:e},{},{}\n",
                self.check, m.name, m.lhs, m.rhs, ratio, status
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuous_excluded() {
        let r = RatioReport::from_measures(
            "t",
            vec![
                ("a".into(), Measure::new(0.0, 0.0)),
                ("b".into(), Measure::new(2.0, 1.0)),
                ("c".into(), Measure::new(1.0, 4.0)),
            ],
        );
        assert_eq!(r.max_ratio, Some(2.0));
        assert_eq!(r.min_ratio, Some(0.25));
        assert!(r.is_finite());
        assert_eq!(r.members[0].status, Status::Vacuous);
    }

    #[test]
    fn unbounded_wins() {
        let m = Measure::new(1.0, 1.0).worse(Measure::new(1.0, 0.0));
        assert_eq!(m.status(), Status::Unbounded);
        let v = Measure::new(0.0, 0.0).worse(Measure::new(1.0, 3.0));
        assert_eq!(v.rhs, 3.0);
    }
}
