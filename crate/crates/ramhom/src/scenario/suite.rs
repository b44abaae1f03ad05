//! The bundled reproduction suite: every scenario file shipped with the
//! crate, a batch runner, and the summary table.

use super::{parse_scenario, run_scenario, Report, Scenario, ScenarioError};
use rayon::prelude::*;

/// One bundled scenario file.
pub struct Bundled {
    pub name: &'static str,
    pub text: &'static str,
}

macro_rules! bundled {
    ($($file:literal),* $(,)?) => {
        &[$(Bundled {
            name: $file,
            text: include_str!(concat!("../../scenarios/", $file)),
        }),*]
    };
}

/// All scenario files shipped with the crate.
pub static BUNDLED: &[Bundled] = bundled![
    "thh_tmf0_2.scn",
    "thh_Tmf0_2.scn",
    "thh_tmf2.scn",
    "tate_tmf1_3.scn",
    "tate_TMF1_3.scn",
    "tate_tmf2_sigma3.scn",
    "tate_en_c9.scn",
    "disc_l_ku_p5.scn",
    "disc_ku_ko.scn",
    "taq_l_ku.scn",
    "taq_tmf0_3.scn",
    "taq_tmf_tmf0_2.scn",
    "norm_verdicts.scn",
];

pub fn bundled_scenario(name: &str) -> Result<Scenario, ScenarioError> {
    let b = BUNDLED
        .iter()
        .find(|b| b.name == name || b.name.trim_end_matches(".scn") == name)
        .ok_or_else(|| ScenarioError::Validation(format!("no bundled scenario `{name}`")))?;
    parse_scenario(b.text)
}

/// Outcome of the whole suite.
pub struct SuiteReport {
    pub reports: Vec<Report>,
}

impl SuiteReport {
    pub fn passed(&self) -> usize {
        self.reports.iter().filter(|r| r.passed).count()
    }

    pub fn total(&self) -> usize {
        self.reports.len()
    }

    pub fn all_passed(&self) -> bool {
        self.passed() == self.total()
    }

    /// Deterministic text summary, ordered by scenario name.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for r in &self.reports {
            out.push_str(&r.render_text());
        }
        out.push_str(&format!(
            "suite: {}/{} scenarios pass\n",
            self.passed(),
            self.total()
        ));
        out
    }
}

/// Runs every bundled scenario whose tags include `tag` (or all of them),
/// in parallel, with output ordered by scenario name.
pub fn reproduce_all(tag: Option<&str>) -> Result<SuiteReport, ScenarioError> {
    let mut scenarios = vec![];
    for b in BUNDLED {
        let s = parse_scenario(b.text).map_err(|e| {
            ScenarioError::Validation(format!("bundled `{}`: {e}", b.name))
        })?;
        if let Some(t) = tag {
            if !s.tags.iter().any(|x| x == t) {
                continue;
            }
        }
        scenarios.push(s);
    }
    scenarios.sort_by(|a, b| a.name.cmp(&b.name));
    let mut reports: Vec<Report> = scenarios
        .par_iter()
        .map(run_scenario)
        .collect::<Result<_, _>>()?;
    reports.sort_by(|a, b| a.scenario.cmp(&b.scenario));
    Ok(SuiteReport { reports })
}
