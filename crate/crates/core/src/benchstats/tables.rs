use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::stats::StatProfile;
use crate::error::{Error, Result};

/// Total energies by species and method, in hartree.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyTable {
    rows: BTreeMap<String, BTreeMap<String, f64>>,
}

#[derive(Deserialize)]
struct EnergyRow {
    species: String,
    method: String,
    energy_hartree: f64,
}

impl EnergyTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, species: &str, method: &str, energy: f64) {
        self.rows.entry(species.to_string()).or_default().insert(method.to_string(), energy);
    }

    pub fn get(&self, species: &str, method: &str) -> Result<f64> {
        self.rows
            .get(species)
            .and_then(|r| r.get(method))
            .copied()
            .ok_or_else(|| Error::MissingData { species: species.into(), method: method.into() })
    }

    pub fn species(&self) -> impl Iterator<Item = &str> {
        self.rows.keys().map(String::as_str)
    }

    pub fn methods(&self) -> BTreeSet<String> {
        self.rows.values().flat_map(|r| r.keys().cloned()).collect()
    }

    /// Merges `other` into `self`; entries of `other` win.
    pub fn extend(&mut self, other: &EnergyTable) {
        for (s, row) in &other.rows {
            for (m, e) in row {
                self.insert(s, m, *e);
            }
        }
    }

    /// CSV with header `species,method,energy_hartree`.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut table = Self::new();
        for (i, row) in reader.deserialize::<EnergyRow>().enumerate() {
            let row = row.map_err(|e| Error::parse(i + 2, e.to_string()))?;
            table.insert(&row.species, &row.method, row.energy_hartree);
        }
        Ok(table)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("species,method,energy_hartree\n");
        for (s, row) in &self.rows {
            for (m, e) in row {
                let _ = writeln!(out, "{s},{m},{e}");
            }
        }
        out
    }
}

/// `E_X - E_ref` for one species and method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyError {
    pub species: String,
    pub method: String,
    pub delta: f64,
    pub abs: f64,
}

/// Signed and absolute errors against `reference` for every species and
/// method in the table; every cell of the grid must be present.
pub fn energy_errors(energies: &EnergyTable, reference: &str) -> Result<Vec<EnergyError>> {
    let methods = energies.methods();
    let mut out = Vec::new();
    for species in energies.species() {
        let e_ref = energies.get(species, reference)?;
        for method in &methods {
            let delta = energies.get(species, method)? - e_ref;
            out.push(EnergyError { species: species.into(), method: method.clone(), delta, abs: delta.abs() });
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ReactionClass {
    #[serde(rename = "TAE")]
    Tae,
    #[serde(rename = "BDE")]
    Bde,
    #[serde(rename = "ISO")]
    Iso,
    #[serde(rename = "HAT")]
    Hat,
    #[serde(rename = "SN")]
    Sn,
}

impl ReactionClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReactionClass::Tae => "TAE",
            ReactionClass::Bde => "BDE",
            ReactionClass::Iso => "ISO",
            ReactionClass::Hat => "HAT",
            ReactionClass::Sn => "SN",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reaction {
    pub id: String,
    pub class: ReactionClass,
    /// `(species, stoichiometric coefficient)`.
    pub reactants: Vec<(String, u32)>,
    pub products: Vec<(String, u32)>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReactionTable {
    pub reactions: Vec<Reaction>,
}

impl ReactionTable {
    pub fn from_json(text: &str) -> Result<Self> {
        let table: Self = serde_json::from_str(text)?;
        for r in &table.reactions {
            if r.reactants.iter().chain(&r.products).any(|(_, c)| *c == 0) {
                return Err(Error::Consistency(format!("reaction {} has a zero coefficient", r.id)));
            }
        }
        Ok(table)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReactionError {
    pub id: String,
    pub class: ReactionClass,
    pub method: String,
    /// Reactant-side coefficient-weighted errors minus product-side ones.
    pub delta: f64,
    pub abs: f64,
}

pub fn reaction_energy_errors(
    table: &ReactionTable,
    energies: &EnergyTable,
    reference: &str,
) -> Result<Vec<ReactionError>> {
    let methods = energies.methods();
    let mut out = Vec::new();
    for r in &table.reactions {
        for method in &methods {
            let side = |terms: &[(String, u32)]| -> Result<f64> {
                terms.iter().try_fold(0.0, |acc, (s, c)| {
                    Ok(acc + *c as f64 * (energies.get(s, method)? - energies.get(s, reference)?))
                })
            };
            let delta = side(&r.reactants)? - side(&r.products)?;
            out.push(ReactionError {
                id: r.id.clone(),
                class: r.class,
                method: method.clone(),
                delta,
                abs: delta.abs(),
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassAverage {
    pub class: ReactionClass,
    pub method: String,
    pub mean_abs: f64,
    pub n: usize,
}

/// Mean `|ddE|` per (class, method).
pub fn class_averages(errors: &[ReactionError]) -> Vec<ClassAverage> {
    let mut groups: BTreeMap<(ReactionClass, &str), (f64, usize)> = BTreeMap::new();
    for e in errors {
        let g = groups.entry((e.class, e.method.as_str())).or_default();
        g.0 += e.abs;
        g.1 += 1;
    }
    groups
        .into_iter()
        .map(|((class, method), (sum, n))| ClassAverage { class, method: method.into(), mean_abs: sum / n as f64, n })
        .collect()
}

/// Profile CSV: `method,median,q1,q3,iqr,max_w,min_w`.
pub fn profiles_csv(profiles: &[(String, StatProfile)]) -> String {
    let mut out = String::from("method,median,q1,q3,iqr,max_w,min_w\n");
    for (m, p) in profiles {
        let _ = writeln!(out, "{m},{},{},{},{},{},{}", p.median, p.q1, p.q3, p.iqr, p.max_w, p.min_w);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> EnergyTable {
        EnergyTable::from_csv(
            "species,method,energy_hartree\n\
             A,ref,-1.0\nA,sqd,-0.98\nB,ref,-2.5\nB,sqd,-2.51\nC,ref,-0.5\nC,sqd,-0.497\n",
        )
        .unwrap()
    }

    #[test]
    fn self_difference_is_zero() {
        let errs = energy_errors(&table(), "ref").unwrap();
        assert!(errs.iter().filter(|e| e.method == "ref").all(|e| e.delta == 0.0));
    }

    #[test]
    fn signed_differences() {
        let errs = energy_errors(&table(), "ref").unwrap();
        let a = errs.iter().find(|e| e.species == "A" && e.method == "sqd").unwrap();
        assert!((a.delta - 0.02).abs() < 1e-12 && a.delta > 0.0);
        let b = errs.iter().find(|e| e.species == "B" && e.method == "sqd").unwrap();
        assert!((b.delta + 0.01).abs() < 1e-12 && (b.abs - 0.01).abs() < 1e-12);
    }

    #[test]
    fn missing_cells_are_named() {
        let mut t = table();
        t.insert("D", "ref", -3.0);
        match energy_errors(&t, "ref") {
            Err(Error::MissingData { species, method }) => {
                assert_eq!((species.as_str(), method.as_str()), ("D", "sqd"))
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(energy_errors(&table(), "ccsd"), Err(Error::MissingData { .. })));
    }

    #[test]
    fn reaction_errors_by_hand() {
        let json = r#"{"reactions": [
            {"id": "tae1", "class": "TAE", "reactants": [["B", 1]], "products": [["A", 2], ["C", 1]]},
            {"id": "null", "class": "ISO", "reactants": [["A", 1]], "products": [["A", 1]]}
        ]}"#;
        let reactions = ReactionTable::from_json(json).unwrap();
        let errs = reaction_energy_errors(&reactions, &table(), "ref").unwrap();
        let tae = errs.iter().find(|e| e.id == "tae1" && e.method == "sqd").unwrap();
        // (-0.01) - (2 * 0.02 + 0.003)
        assert!((tae.delta - (-0.053)).abs() < 1e-12);
        assert!(errs.iter().filter(|e| e.id == "null").all(|e| e.delta == 0.0));
        let avg = class_averages(&errs);
        let a = avg.iter().find(|a| a.class == ReactionClass::Tae && a.method == "sqd").unwrap();
        assert_eq!(a.n, 1);
        assert_eq!(a.mean_abs, tae.abs);
    }

    #[test]
    fn csv_round_trip_and_bad_rows() {
        let t = table();
        assert_eq!(EnergyTable::from_csv(&t.to_csv()).unwrap(), t);
        assert!(EnergyTable::from_csv("species,method,energy_hartree\nA,ref,abc\n").is_err());
        assert!(ReactionTable::from_json(
            r#"{"reactions":[{"id":"x","class":"SN","reactants":[["A",0]],"products":[]}]}"#
        )
        .is_err());
        assert!(ReactionTable::from_json(r#"{"reactions":[{"id":"x","class":"XX","reactants":[],"products":[]}]}"#)
            .is_err());
    }
}
