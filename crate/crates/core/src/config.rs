//! Flat structured key-value config documents.
//!
//! Grammar (one statement per line):
//!
//! ```text
//! # comment                      -- ignored, as are blank lines
//! [section]                      -- section header
//! key = value                    -- entry in the current section
//! ```
//!
//! Values are free text; typed getters parse floats, integers, booleans,
//! comma-separated lists, and semicolon-separated vectors.  Serialization
//! preserves section and key order, so parse -> serialize -> parse is the
//! identity on the document structure.

use crate::error::{domain, CoreError, Result};
use crate::grid::GridSpec;
use crate::measure::{StableIndex, UncertaintySet};
use crate::nonlocal::QuadratureSpec;
use crate::pareto::BetaProfile;
use crate::sublinear::LawFamily;

/// An ordered section of key-value pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Section {
    pub name: String,
    pub entries: Vec<(String, String)>,
}

impl Section {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            entries: Vec::new(),
        }
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) {
        let key = key.into();
        let value = value.to_string();
        if let Some(e) = self.entries.iter_mut().find(|(k, _)| *k == key) {
            e.1 = value;
        } else {
            self.entries.push((key, value));
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| CoreError::Config(format!("[{}] missing key {key:?}", self.name)))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        self.require(key)?
            .parse()
            .map_err(|_| CoreError::Config(format!("[{}] {key} is not a number", self.name)))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(_) => self.f64(key),
        }
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        self.require(key)?
            .parse()
            .map_err(|_| CoreError::Config(format!("[{}] {key} is not an integer", self.name)))
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(_) => self.u64(key),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.u64_or(key, default as u64)? as usize)
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.get(key).unwrap_or(default)
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some("false") | Some("0") | Some("no") => Ok(false),
            Some(v) => Err(CoreError::Config(format!(
                "[{}] {key} = {v:?} is not a boolean",
                self.name
            ))),
        }
    }

    /// Comma-separated float list.
    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        self.require(key)?
            .split(',')
            .map(|t| {
                t.trim().parse().map_err(|_| {
                    CoreError::Config(format!("[{}] {key}: bad list entry {t:?}", self.name))
                })
            })
            .collect()
    }

    /// Comma-separated integer list.
    pub fn u64_list(&self, key: &str) -> Result<Vec<u64>> {
        self.require(key)?
            .split(',')
            .map(|t| {
                t.trim().parse().map_err(|_| {
                    CoreError::Config(format!("[{}] {key}: bad list entry {t:?}", self.name))
                })
            })
            .collect()
    }

    /// Semicolon-separated vectors with comma-separated components, e.g.
    /// `1; -1` or `0.6, 0.8; -0.6, -0.8`.
    pub fn vector_list(&self, key: &str) -> Result<Vec<Vec<f64>>> {
        self.require(key)?
            .split(';')
            .map(|v| {
                v.split(',')
                    .map(|t| {
                        t.trim().parse().map_err(|_| {
                            CoreError::Config(format!(
                                "[{}] {key}: bad vector component {t:?}",
                                self.name
                            ))
                        })
                    })
                    .collect()
            })
            .collect()
    }
}

/// An ordered list of sections.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Document {
    pub sections: Vec<Section>,
}

impl Document {
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = Document::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                let name = name.trim();
                if name.is_empty() {
                    return Err(CoreError::Config(format!(
                        "line {}: empty section name",
                        lineno + 1
                    )));
                }
                doc.sections.push(Section::new(name));
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CoreError::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let section = doc.sections.last_mut().ok_or_else(|| {
                CoreError::Config(format!("line {}: entry before any [section]", lineno + 1))
            })?;
            section
                .entries
                .push((key.trim().to_string(), value.trim().to_string()));
        }
        Ok(doc)
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str(&format!("[{}]\n", s.name));
            for (k, v) in &s.entries {
                out.push_str(&format!("{k} = {v}\n"));
            }
        }
        out
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn require_section(&self, name: &str) -> Result<&Section> {
        self.section(name)
            .ok_or_else(|| CoreError::Config(format!("missing section [{name}]")))
    }

    pub fn push(&mut self, section: Section) {
        self.sections.push(section);
    }
}

// ---- typed section (de)serializers ----

/// `[family]`: `alpha`, `k_lo`, `k_hi`, `profile`, `k_grid`, and the custom
/// profile's `gamma`, `c_bound`, `beta_knots`.
pub fn family_from_section(s: &Section) -> Result<LawFamily> {
    let alpha = StableIndex::new(s.f64("alpha")?)?;
    let k_lo = s.f64("k_lo")?;
    let k_hi = s.f64("k_hi")?;
    let k_grid = s.usize_or("k_grid", 5)?;
    let profile = match s.str_or("profile", "pareto_cutoff") {
        "pareto_cutoff" => BetaProfile::ParetoCutoff,
        "pareto_mollified" => BetaProfile::ParetoMollified {
            blend: s.f64_or("blend", 0.05)?,
        },
        "custom" => {
            let knots = s
                .vector_list("beta_knots")?
                .into_iter()
                .map(|v| {
                    if v.len() == 2 {
                        Ok((v[0], v[1]))
                    } else {
                        Err(domain("beta_knots entries need exactly (x, beta)"))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            BetaProfile::Custom {
                gamma: s.f64("gamma")?,
                c_bound: s.f64("c_bound")?,
                knots,
            }
        }
        other => {
            return Err(CoreError::Config(format!(
                "[{}] unknown profile {other:?}",
                s.name
            )))
        }
    };
    LawFamily::new(k_lo, k_hi, alpha, profile, k_grid)
}

pub fn family_to_section(f: &LawFamily, name: &str) -> Section {
    let mut s = Section::new(name);
    s.set("alpha", f.alpha());
    s.set("k_lo", f.k_lo());
    s.set("k_hi", f.k_hi());
    s.set("k_grid", f.k_grid());
    match f.profile() {
        BetaProfile::ParetoCutoff => s.set("profile", "pareto_cutoff"),
        BetaProfile::ParetoMollified { blend } => {
            s.set("profile", "pareto_mollified");
            s.set("blend", blend);
        }
        BetaProfile::Custom {
            gamma,
            c_bound,
            knots,
        } => {
            s.set("profile", "custom");
            s.set("gamma", gamma);
            s.set("c_bound", c_bound);
            let knot_str = knots
                .iter()
                .map(|(x, b)| format!("{x}, {b}"))
                .collect::<Vec<_>>()
                .join("; ");
            s.set("beta_knots", knot_str);
        }
    }
    s
}

/// `[set]`: `alpha`, `mass_lo`, `mass_hi`, `directions`.
pub fn set_from_section(s: &Section) -> Result<UncertaintySet> {
    let alpha = StableIndex::new(s.f64("alpha")?)?;
    let mass_lo = s.f64("mass_lo")?;
    let mass_hi = s.f64("mass_hi")?;
    let dirs = match s.get("directions") {
        Some(_) => s.vector_list("directions")?,
        None => vec![vec![1.0], vec![-1.0]],
    };
    UncertaintySet::new(alpha, mass_lo, mass_hi, dirs)
}

pub fn set_to_section(set: &UncertaintySet, name: &str) -> Section {
    let mut s = Section::new(name);
    s.set("alpha", set.index().alpha());
    s.set("mass_lo", set.mass_lo());
    s.set("mass_hi", set.mass_hi());
    let dirs = set
        .direction_grid()
        .iter()
        .map(|v| {
            v.iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        })
        .collect::<Vec<_>>()
        .join("; ");
    s.set("directions", dirs);
    s
}

/// `[grid]`: `half_width`, `points`.
pub fn grid_from_section(s: &Section) -> Result<GridSpec> {
    GridSpec::new(s.f64("half_width")?, s.usize_or("points", 2049)?)
}

pub fn grid_to_section(g: &GridSpec, name: &str) -> Section {
    let mut s = Section::new(name);
    s.set("half_width", g.half_width());
    s.set("points", g.points());
    s
}

/// `[quad]`: `epsilon`, `outer_cut`, `nodes_per_decade`.
pub fn quad_from_section(s: &Section) -> Result<QuadratureSpec> {
    QuadratureSpec::new(
        s.f64_or("epsilon", 1e-4)?,
        s.f64_or("outer_cut", 1e3)?,
        s.u64_or("nodes_per_decade", 64)? as u32,
    )
}

pub fn quad_to_section(q: &QuadratureSpec, name: &str) -> Section {
    let mut s = Section::new(name);
    s.set("epsilon", q.epsilon);
    s.set("outer_cut", q.outer_cut);
    s.set("nodes_per_decade", q.nodes_per_decade);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "# experiment\n[family]\nalpha = 0.5\nk_lo = 0.25\nk_hi = 0.5\nprofile = pareto_cutoff\nk_grid = 5\n\n[grid]\nhalf_width = 16\npoints = 2049\n";

    #[test]
    fn parse_serialize_parse_is_identity() {
        let doc = Document::parse(SAMPLE).unwrap();
        let text = doc.serialize();
        let doc2 = Document::parse(&text).unwrap();
        assert_eq!(doc, doc2);
        assert_eq!(doc2.serialize(), text);
    }

    #[test]
    fn typed_sections_round_trip() {
        let doc = Document::parse(SAMPLE).unwrap();
        let fam = family_from_section(doc.require_section("family").unwrap()).unwrap();
        assert_eq!(fam.k_lo(), 0.25);
        let sec = family_to_section(&fam, "family");
        let fam2 = family_from_section(&sec).unwrap();
        assert_eq!(fam2.k_hi(), 0.5);
        let grid = grid_from_section(doc.require_section("grid").unwrap()).unwrap();
        assert_eq!(grid.points(), 2049);
        let g2 = grid_from_section(&grid_to_section(&grid, "grid")).unwrap();
        assert_eq!(grid, g2);
    }

    #[test]
    fn set_section_round_trip() {
        let set = UncertaintySet::one_dim(StableIndex::new(0.5).unwrap(), 0.5, 1.0).unwrap();
        let sec = set_to_section(&set, "set");
        let set2 = set_from_section(&sec).unwrap();
        assert_eq!(set2.mass_hi(), 1.0);
        assert_eq!(set2.direction_grid().len(), 2);
    }

    #[test]
    fn quad_section_round_trip() {
        let q = QuadratureSpec::default();
        let q2 = quad_from_section(&quad_to_section(&q, "quad")).unwrap();
        assert_eq!(q2.epsilon, q.epsilon);
        assert_eq!(q2.nodes_per_decade, q.nodes_per_decade);
    }

    #[test]
    fn errors_are_located() {
        assert!(Document::parse("key = 1\n").is_err());
        assert!(Document::parse("[s]\nkey\n").is_err());
        let doc = Document::parse("[s]\nx = nope\n").unwrap();
        assert!(doc.section("s").unwrap().f64("x").is_err());
        assert!(doc.section("s").unwrap().f64("missing").is_err());
    }

    #[test]
    fn custom_profile_section() {
        let text = "[family]\nalpha = 0.5\nk_lo = 0.25\nk_hi = 0.25\nprofile = custom\ngamma = 0\nc_bound = 0.6\nbeta_knots = 1, -0.1; 2, 0\n";
        let doc = Document::parse(text).unwrap();
        let fam = family_from_section(doc.require_section("family").unwrap()).unwrap();
        let sec = family_to_section(&fam, "family");
        let fam2 = family_from_section(&sec).unwrap();
        assert!(matches!(fam2.profile(), BetaProfile::Custom { .. }));
    }
}
