//! On-disk JSON formats: group tables, cochain files, and patch run configs.
//!
//! A group is stored as its multiplication table; the inverse table is always
//! derived, never stored. Cochains are stored as flat integer exponent arrays
//! over a common denominator, in lexicographic argument order, so files are
//! exact and diffable. Short group specs ("z6", "z2*z4") and cocycle specs
//! ("z3:1" for the standard level-1 representative) avoid files for the
//! common cyclic cases.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::cocycle::{Cochain2, Cochain3};
use crate::error::{Error, Result};
use crate::group::FiniteGroup;

/// Group file: {"order": n, "table": [[...]]} with table[a][b] = a·b.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupFile {
    pub order: usize,
    pub table: Vec<Vec<usize>>,
}

impl GroupFile {
    pub fn from_group(group: &FiniteGroup) -> GroupFile {
        let n = group.order();
        let table = (0..n)
            .map(|a| (0..n).map(|b| group.mul(a, b)).collect())
            .collect();
        GroupFile { order: n, table }
    }

    pub fn to_group(&self) -> Result<FiniteGroup> {
        if self.table.len() != self.order {
            return Err(Error::MalformedTable(crate::error::GroupViolation::Shape {
                row: self.table.len(),
                col: self.order,
            }));
        }
        FiniteGroup::from_table(self.table.clone())
    }
}

/// A group reference: shorthand string, path to a group file, or inline table.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupSpec {
    Text(String),
    Inline(GroupFile),
}

/// Parses "zN" or "zN*zM" (case-insensitive).
pub fn parse_group_shorthand(s: &str) -> Result<FiniteGroup> {
    let parse_factor = |f: &str| -> Result<FiniteGroup> {
        let rest = f
            .strip_prefix('z')
            .or_else(|| f.strip_prefix('Z'))
            .ok_or_else(|| Error::Unsupported(format!("group shorthand {s:?}")))?;
        let n: usize = rest
            .parse()
            .map_err(|_| Error::Unsupported(format!("group shorthand {s:?}")))?;
        FiniteGroup::make_cyclic(n)
    };
    match s.split_once('*') {
        None => parse_factor(s),
        Some((a, b)) => parse_factor(a)?.direct_product(&parse_factor(b)?),
    }
}

fn looks_like_group_shorthand(s: &str) -> bool {
    s.split('*').count() <= 2
        && s.split('*').all(|f| {
            let f = f.trim();
            (f.starts_with('z') || f.starts_with('Z'))
                && f.len() > 1
                && f[1..].chars().all(|c| c.is_ascii_digit())
        })
}

/// Resolves a group spec: shorthand, else a path to a group file.
pub fn resolve_group_spec(spec: &GroupSpec) -> Result<FiniteGroup> {
    match spec {
        GroupSpec::Inline(file) => file.to_group(),
        GroupSpec::Text(s) if looks_like_group_shorthand(s) => parse_group_shorthand(s),
        GroupSpec::Text(path) => load_group(Path::new(path)),
    }
}

pub fn load_group(path: &Path) -> Result<FiniteGroup> {
    let text = std::fs::read_to_string(path)?;
    let file: GroupFile = serde_json::from_str(&text)?;
    file.to_group()
}

/// Cocycle file: {"group": spec, "denominator": m, "exponents": flat array},
/// exponents in lexicographic (g,h,k) order, phase = exp(2πi·e/m).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CocycleFile {
    pub group: GroupSpec,
    pub denominator: i64,
    pub exponents: Vec<i64>,
}

impl CocycleFile {
    pub fn from_cochain(omega: &Cochain3, group_spec: GroupSpec) -> Result<CocycleFile> {
        let denominator = omega.common_denominator();
        Ok(CocycleFile {
            group: group_spec,
            denominator,
            exponents: omega.exponents_over(denominator)?,
        })
    }

    pub fn to_cochain(&self) -> Result<Cochain3> {
        let group = resolve_group_spec(&self.group)?;
        Cochain3::from_exponents(&group, self.denominator, &self.exponents)
    }
}

/// Witness (2-cochain) file: same layout with a length-|G|² exponent array.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessFile {
    pub group: GroupSpec,
    pub denominator: i64,
    pub exponents: Vec<i64>,
}

impl WitnessFile {
    pub fn from_cochain(mu: &Cochain2, group_spec: GroupSpec) -> Result<WitnessFile> {
        let denominator = mu.common_denominator();
        Ok(WitnessFile {
            group: group_spec,
            denominator,
            exponents: mu.exponents_over(denominator)?,
        })
    }

    pub fn to_cochain(&self) -> Result<Cochain2> {
        let group = resolve_group_spec(&self.group)?;
        Cochain2::from_exponents(&group, self.denominator, &self.exponents)
    }
}

/// A cocycle reference: "zN:p" for the standard cyclic representative at
/// level p, a path to a cocycle file, or an inline file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CocycleSpec {
    Text(String),
    Inline(CocycleFile),
}

fn looks_like_cocycle_shorthand(s: &str) -> bool {
    match s.split_once(':') {
        Some((g, p)) => {
            looks_like_group_shorthand(g)
                && !g.contains('*')
                && !p.is_empty()
                && p.chars().all(|c| c.is_ascii_digit())
        }
        None => false,
    }
}

/// Resolves a cocycle spec: "zN:p", else a path to a cocycle file.
pub fn resolve_cocycle_spec(spec: &CocycleSpec) -> Result<Cochain3> {
    match spec {
        CocycleSpec::Inline(file) => file.to_cochain(),
        CocycleSpec::Text(s) if looks_like_cocycle_shorthand(s) => {
            let (g, p) = s.split_once(':').expect("shorthand contains a colon");
            let group = parse_group_shorthand(g)?;
            let level: usize = p
                .parse()
                .map_err(|_| Error::Unsupported(format!("cocycle shorthand {s:?}")))?;
            Cochain3::standard_cyclic(group.order(), level)
        }
        CocycleSpec::Text(path) => load_cocycle(Path::new(path)),
    }
}

pub fn load_cocycle(path: &Path) -> Result<Cochain3> {
    let text = std::fs::read_to_string(path)?;
    let file: CocycleFile = serde_json::from_str(&text)?;
    file.to_cochain()
}

pub fn load_witness(path: &Path) -> Result<Cochain2> {
    let text = std::fs::read_to_string(path)?;
    let file: WitnessFile = serde_json::from_str(&text)?;
    file.to_cochain()
}

/// Patch run configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PatchConfig {
    pub group: GroupSpec,
    pub cocycle: CocycleSpec,
    #[serde(rename = "W")]
    pub w: usize,
    #[serde(rename = "H")]
    pub h: usize,
    /// Only "torus" is supported; open boundaries appear solely inside the
    /// plaquette-invariance check, which freezes dangling legs itself.
    pub bc: String,
    /// "auto" or one of the named candidates.
    pub link_assignment: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::Phase;

    #[test]
    fn group_file_round_trips() {
        let g = FiniteGroup::make_cyclic(3)
            .unwrap()
            .direct_product(&FiniteGroup::make_cyclic(2).unwrap())
            .unwrap();
        let file = GroupFile::from_group(&g);
        let text = serde_json::to_string(&file).unwrap();
        let back: GroupFile = serde_json::from_str(&text).unwrap();
        let g2 = back.to_group().unwrap();
        assert_eq!(g2.order(), 6);
        for a in g.elements() {
            for b in g.elements() {
                assert_eq!(g.mul(a, b), g2.mul(a, b));
            }
        }
    }

    #[test]
    fn shorthand_parses_cyclic_and_products() {
        assert_eq!(parse_group_shorthand("z5").unwrap().order(), 5);
        assert_eq!(parse_group_shorthand("Z2*z4").unwrap().order(), 8);
        assert!(parse_group_shorthand("q8").is_err());
        assert!(parse_group_shorthand("z").is_err());
    }

    #[test]
    fn cocycle_file_round_trips_exactly() {
        let w = Cochain3::standard_cyclic(4, 3).unwrap();
        let file = CocycleFile::from_cochain(&w, GroupSpec::Text("z4".into())).unwrap();
        assert_eq!(file.exponents.len(), 64, "flat |G|³ exponent array");
        let text = serde_json::to_string(&file).unwrap();
        let back: CocycleFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_cochain().unwrap(), w);
    }

    #[test]
    fn witness_file_round_trips_exactly() {
        let g = FiniteGroup::make_cyclic(3).unwrap();
        let mut mu = Cochain2::trivial(&g);
        mu.set(1, 2, Phase::new(2, 3).unwrap());
        let file = WitnessFile::from_cochain(&mu, GroupSpec::Text("z3".into())).unwrap();
        assert_eq!(file.exponents.len(), 9, "flat |G|² exponent array");
        let back: WitnessFile =
            serde_json::from_str(&serde_json::to_string(&file).unwrap()).unwrap();
        assert_eq!(back.to_cochain().unwrap(), mu);
    }

    #[test]
    fn cocycle_shorthand_builds_standard_representative() {
        let w = resolve_cocycle_spec(&CocycleSpec::Text("z3:2".into())).unwrap();
        assert_eq!(w, Cochain3::standard_cyclic(3, 2).unwrap());
        assert!(resolve_cocycle_spec(&CocycleSpec::Text("z3:x".into())).is_err());
    }

    #[test]
    fn files_load_from_disk() {
        let dir = std::env::temp_dir().join("spt-index-formats-test");
        std::fs::create_dir_all(&dir).unwrap();
        let g = FiniteGroup::make_cyclic(4).unwrap();
        let gpath = dir.join("group.json");
        std::fs::write(&gpath, serde_json::to_string(&GroupFile::from_group(&g)).unwrap())
            .unwrap();
        assert_eq!(load_group(&gpath).unwrap().order(), 4);

        let w = Cochain3::standard_cyclic(4, 1).unwrap();
        let cfile =
            CocycleFile::from_cochain(&w, GroupSpec::Text(gpath.display().to_string())).unwrap();
        let cpath = dir.join("cocycle.json");
        std::fs::write(&cpath, serde_json::to_string(&cfile).unwrap()).unwrap();
        assert_eq!(load_cocycle(&cpath).unwrap(), w);

        let missing = load_cocycle(&dir.join("absent.json"));
        assert!(matches!(missing, Err(Error::Io(_))));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn patch_config_parses_spec_layout() {
        let text = r#"{
            "group": "z2",
            "cocycle": "z2:1",
            "W": 6,
            "H": 4,
            "bc": "torus",
            "link_assignment": "auto"
        }"#;
        let config: PatchConfig = serde_json::from_str(text).unwrap();
        assert_eq!(config.w, 6);
        assert_eq!(config.h, 4);
        assert_eq!(config.bc, "torus");
        let group = resolve_group_spec(&config.group).unwrap();
        assert_eq!(group.order(), 2);
        let omega = resolve_cocycle_spec(&config.cocycle).unwrap();
        assert!(omega.check_cocycle().is_ok());
    }
}
