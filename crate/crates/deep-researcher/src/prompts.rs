//! Prompt templates for every agent call.
//!
//! Defaults are compiled in from `templates/`; any of them can be overridden
//! by a directory of plain-text files with the same names (`plan.txt`,
//! `search_query.txt`, `candidate.txt`, `merge.txt`, `reflection.txt`,
//! `progress.txt`, `report.txt`). Placeholders are written `{name}` and
//! replaced verbatim; unknown braces (e.g. JSON examples inside a template)
//! are left untouched.

use std::fs;
use std::io;
use std::path::Path;

/// The editable prompt bodies, one per agent call.
#[derive(Debug, Clone)]
pub struct PromptSet {
    pub plan: String,
    pub search_query: String,
    pub candidate: String,
    pub merge: String,
    pub reflection: String,
    pub progress: String,
    pub report: String,
}

impl Default for PromptSet {
    fn default() -> Self {
        PromptSet {
            plan: include_str!("../templates/plan.txt").to_string(),
            search_query: include_str!("../templates/search_query.txt").to_string(),
            candidate: include_str!("../templates/candidate.txt").to_string(),
            merge: include_str!("../templates/merge.txt").to_string(),
            reflection: include_str!("../templates/reflection.txt").to_string(),
            progress: include_str!("../templates/progress.txt").to_string(),
            report: include_str!("../templates/report.txt").to_string(),
        }
    }
}

impl PromptSet {
    /// Load overrides from a directory. Files that are absent keep the
    /// built-in default, so a directory with a single `report.txt` only
    /// replaces the report prompt.
    pub fn from_dir(dir: &Path) -> io::Result<Self> {
        let mut set = PromptSet::default();
        for (name, slot) in [
            ("plan.txt", &mut set.plan),
            ("search_query.txt", &mut set.search_query),
            ("candidate.txt", &mut set.candidate),
            ("merge.txt", &mut set.merge),
            ("reflection.txt", &mut set.reflection),
            ("progress.txt", &mut set.progress),
            ("report.txt", &mut set.report),
        ] {
            let path = dir.join(name);
            if path.is_file() {
                *slot = fs::read_to_string(&path)?;
            }
        }
        Ok(set)
    }

    /// Write the current templates out as editable files.
    pub fn export_to_dir(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        for (name, body) in [
            ("plan.txt", &self.plan),
            ("search_query.txt", &self.search_query),
            ("candidate.txt", &self.candidate),
            ("merge.txt", &self.merge),
            ("reflection.txt", &self.reflection),
            ("progress.txt", &self.progress),
            ("report.txt", &self.report),
        ] {
            fs::write(dir.join(name), body)?;
        }
        Ok(())
    }
}

/// Replace each `{name}` placeholder with its value. Only the named
/// placeholders are touched; every other brace survives verbatim.
pub fn render(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (name, value) in vars {
        out = out.replace(&format!("{{{name}}}"), value);
    }
    out
}
