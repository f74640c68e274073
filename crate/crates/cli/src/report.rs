//! Benchmark tables over every species: total-energy errors, reaction-energy
//! errors, class averages, whisker profiles and outlier lists.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;
use sqdforge::benchstats::{
    class_averages, energy_errors, profiles_csv, reaction_energy_errors, stat_profile_labelled, EnergyTable, Outlier,
    ReactionTable, StatProfile,
};

use crate::error::CliError;
use crate::manifest::Manifest;
use crate::stages::{
    extrap_file, load_solve_records, read_json, read_text, write_json, write_text, ExtrapMethod, ExtrapRecord,
};

/// Reference energies, the optional energies CSV, then computed columns:
/// `sqd` (lowest energy over the subspace ladder) and `sqd_<method>` for
/// every extrapolation on disk.
pub fn collect_energies(m: &Manifest) -> Result<EnergyTable, CliError> {
    let mut table = EnergyTable::new();
    for s in &m.species {
        for (method, e) in &s.reference {
            table.insert(&s.id, method, *e);
        }
    }
    if let Some(path) = &m.energies {
        let extra = EnergyTable::from_csv(&read_text(path)?).map_err(|e| CliError::from(e).context(path.display()))?;
        table.extend(&extra);
    }
    for s in &m.species {
        let dir = m.species_dir(s);
        let records = load_solve_records(&dir)?;
        if let Some(e) = records.iter().map(|r| r.result.energy).min_by(f64::total_cmp) {
            table.insert(&s.id, "sqd", e);
        }
        for method in ExtrapMethod::ALL {
            let path = dir.join(extrap_file(method.as_str()));
            if path.is_file() {
                let rec: ExtrapRecord = read_json(&path)?;
                table.insert(&s.id, &format!("sqd_{}", method.as_str()), rec.result.estimate);
            }
        }
    }
    Ok(table)
}

fn missing_cells(table: &EnergyTable, species: &[&str], reference: &str) -> Vec<String> {
    let mut methods = table.methods();
    methods.insert(reference.to_string());
    species
        .iter()
        .flat_map(|s| methods.iter().filter(move |mm| table.get(s, mm).is_err()).map(move |mm| format!("{s}/{mm}")))
        .collect()
}

fn profiles_by_method<'a>(
    rows: impl Iterator<Item = (&'a str, String, f64)>,
) -> Result<BTreeMap<String, StatProfile>, CliError> {
    let mut grouped: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
    for (method, label, v) in rows {
        grouped.entry(method.to_string()).or_default().push((label, v));
    }
    grouped.into_iter().map(|(m, vals)| Ok((m, stat_profile_labelled(&vals)?))).collect()
}

#[derive(Serialize)]
struct Outliers<'a> {
    energy: BTreeMap<&'a str, &'a [Outlier]>,
    reactions: BTreeMap<&'a str, BTreeMap<&'a str, &'a [Outlier]>>,
}

#[derive(Debug, Serialize)]
pub struct ReportSummary {
    pub reference: String,
    pub out_dir: PathBuf,
    pub species: usize,
    pub methods: Vec<String>,
    pub reactions: usize,
    pub files: Vec<String>,
}

pub fn report(m: &Manifest, reference: &str) -> Result<ReportSummary, CliError> {
    let table = collect_energies(m)?;
    let species: Vec<&str> = m.species.iter().map(|s| s.id.as_str()).collect();
    let gaps = missing_cells(&table, &species, reference);
    if !gaps.is_empty() {
        return Err(CliError::data(format!("missing energies (species/method): {}", gaps.join(", "))));
    }
    let out_dir = m.work_dir.join("report");
    let mut files = Vec::new();
    let mut emit = |name: &str, text: String| -> Result<(), CliError> {
        write_text(&out_dir.join(name), &text)?;
        files.push(name.to_string());
        Ok(())
    };

    emit("energies.csv", table.to_csv())?;
    let errors = energy_errors(&table, reference)?;
    let mut csv = String::from("species,method,delta,abs\n");
    for e in &errors {
        let _ = writeln!(csv, "{},{},{},{}", e.species, e.method, e.delta, e.abs);
    }
    emit("energy_errors.csv", csv)?;
    let energy_profiles = profiles_by_method(errors.iter().map(|e| (e.method.as_str(), e.species.clone(), e.delta)))?;
    let listed: Vec<(String, StatProfile)> = energy_profiles.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    emit("energy_profiles.csv", profiles_csv(&listed))?;

    let mut reaction_profiles: BTreeMap<&str, BTreeMap<String, StatProfile>> = BTreeMap::new();
    let mut n_reactions = 0;
    if let Some(path) = &m.reactions {
        let reactions =
            ReactionTable::from_json(&read_text(path)?).map_err(|e| CliError::from(e).context(path.display()))?;
        n_reactions = reactions.reactions.len();
        let rerr = reaction_energy_errors(&reactions, &table, reference)?;
        let mut csv = String::from("id,class,method,delta,abs\n");
        for e in &rerr {
            let _ = writeln!(csv, "{},{},{},{},{}", e.id, e.class.as_str(), e.method, e.delta, e.abs);
        }
        emit("reaction_errors.csv", csv)?;
        let mut csv = String::from("class,method,mean_abs,n\n");
        for a in class_averages(&rerr) {
            let _ = writeln!(csv, "{},{},{},{}", a.class.as_str(), a.method, a.mean_abs, a.n);
        }
        emit("class_averages.csv", csv)?;
        let mut classes: Vec<_> = rerr.iter().map(|e| e.class).collect();
        classes.sort();
        classes.dedup();
        for class in classes {
            let rows = rerr.iter().filter(|e| e.class == class).map(|e| (e.method.as_str(), e.id.clone(), e.delta));
            let profiles = profiles_by_method(rows)?;
            let listed: Vec<(String, StatProfile)> = profiles.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
            emit(&format!("reaction_profiles_{}.csv", class.as_str()), profiles_csv(&listed))?;
            reaction_profiles.insert(class.as_str(), profiles);
        }
    }

    let outliers = Outliers {
        energy: energy_profiles.iter().map(|(k, p)| (k.as_str(), p.outliers.as_slice())).collect(),
        reactions: reaction_profiles
            .iter()
            .map(|(c, ps)| (*c, ps.iter().map(|(k, p)| (k.as_str(), p.outliers.as_slice())).collect()))
            .collect(),
    };
    write_json(&out_dir.join("outliers.json"), &outliers)?;
    files.push("outliers.json".into());

    Ok(ReportSummary {
        reference: reference.to_string(),
        out_dir,
        species: species.len(),
        methods: table.methods().into_iter().collect(),
        reactions: n_reactions,
        files,
    })
}
