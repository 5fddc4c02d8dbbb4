use std::time::Instant;

use fhskit::correlation::{optimality_report, Engine};
use fhskit::extend::{concatenate, symbolic_extension, Ceilings};
use fhskit::fhs::{generate_fhs_set, FhsParams, FhsSet};
use fhskit::oc::OcFamily;

use crate::CliError;

struct Row {
    name: String,
    expected: String,
    observed: String,
    mode: &'static str,
    pass: bool,
    secs: f64,
}

fn direct_row(name: &str, params: FhsParams, expected: &str, m_s: Option<u64>) -> Result<(Row, FhsSet), CliError> {
    let start = Instant::now();
    let set = generate_fhs_set(params).map_err(|e| CliError::Precondition(e.to_string()))?;
    let rep = optimality_report(&set, Engine::Auto).map_err(|e| CliError::Verification(e.to_string()))?;
    let declared = set.params_of().map_err(|e| CliError::Verification(e.to_string()))?;
    let mut observed = format!("{declared} H_m={} bound={}", rep.profile.hm, rep.peng_fan);
    let mut pass = declared.to_string() == expected
        && rep.is_optimal
        && Some(rep.profile.hm) == declared.lambda;
    if let Some(m) = m_s {
        observed.push_str(&format!(" m(S)={}", rep.max_appearance));
        pass &= rep.max_appearance == m;
    }
    let row = Row {
        name: name.into(),
        expected: expected.into(),
        observed,
        mode: "exhaustive",
        pass,
        secs: start.elapsed().as_secs_f64(),
    };
    Ok((row, set))
}

fn materialized_extension(name: &str, base: &FhsSet, family: OcFamily, expected: &str) -> Result<Row, CliError> {
    let start = Instant::now();
    let params = base.provenance().direct_params().expect("examples extend direct sets");
    let oc = family.build().map_err(|e| CliError::Precondition(e.to_string()))?;
    let out = concatenate(base, &oc).map_err(|e| CliError::Precondition(e.to_string()))?;
    let rep = optimality_report(&out, Engine::Indexed).map_err(|e| CliError::Verification(e.to_string()))?;
    let ceilings = Ceilings::new(&params, oc.length() as u64, oc.alphabet() as u64);
    let declared = out.params_of().map_err(|e| CliError::Verification(e.to_string()))?;
    Ok(Row {
        name: name.into(),
        expected: expected.into(),
        observed: format!("{declared} H_m={} bound={}", rep.profile.hm, rep.peng_fan),
        mode: "exhaustive",
        pass: declared.to_string() == expected && rep.is_optimal && ceilings.equal(),
        secs: start.elapsed().as_secs_f64(),
    })
}

fn symbolic_row(name: &str, params: FhsParams, family: OcFamily, expected: &str) -> Result<Row, CliError> {
    let start = Instant::now();
    let sym = symbolic_extension(params, family).map_err(|e| CliError::Precondition(e.to_string()))?;
    Ok(Row {
        name: name.into(),
        expected: expected.into(),
        observed: format!(
            "{} ceilings={}/{} s={}>=m(S)={}",
            sym.result, sym.ceilings.extended, sym.ceilings.base, sym.oc.s, sym.required_s
        ),
        mode: "symbolic",
        pass: sym.result.to_string() == expected && sym.optimal(),
        secs: start.elapsed().as_secs_f64(),
    })
}

pub fn run(full: bool) -> Result<(), CliError> {
    let s1_params = FhsParams::new(3, 1, 4, 1, 2);
    let s2_params = FhsParams::new(3, 2, 3, 1, 2);
    let mut rows = Vec::new();

    let (row, s1) = direct_row("S1 (3,1,4,1,2)", s1_params, "(80,13,6;14)", Some(77))?;
    rows.push(row);
    let (row, _) = direct_row("S2 (3,2,3,1,2)", s2_params, "(728,40,18;41)", Some(719))?;
    rows.push(row);
    let (row, _) = direct_row("S3 (7,1,3,1,3)", FhsParams::new(7, 1, 3, 1, 3), "(342,16,21;17)", None)?;
    rows.push(row);

    rows.push(materialized_extension("S1 + (79,78;79)", &s1, OcFamily::Linear(79), "(6320,13,6;1106)")?);
    rows.push(materialized_extension("S1 + (80,81;81)", &s1, OcFamily::Affine(81), "(6400,13,6;1134)")?);
    rows.push(materialized_extension(
        "S1 + (6320,78;6399)",
        &s1,
        OcFamily::Product(79, 81),
        "(505600,13,6;89586)",
    )?);
    let s2_cases = [
        ("S2 + (727,726;727)", OcFamily::Linear(727), "(529256,40,18;29807)"),
        ("S2 + (728,729;729)", OcFamily::Affine(729), "(529984,40,18;29889)"),
    ];
    if full {
        let s2 = generate_fhs_set(s2_params).map_err(|e| CliError::Precondition(e.to_string()))?;
        for (name, family, expected) in s2_cases {
            rows.push(materialized_extension(name, &s2, family, expected)?);
        }
    } else {
        for (name, family, expected) in s2_cases {
            rows.push(symbolic_row(name, s2_params, family, expected)?);
        }
    }
    rows.push(symbolic_row(
        "S2 + (529256,726;529983)",
        s2_params,
        OcFamily::Product(727, 729),
        "(385298368,40,18;21729303)",
    )?);

    println!("{:<26} {:<28} {:<11} {:>8}  {:<4}  observed", "case", "expected", "mode", "secs", "");
    for r in &rows {
        println!(
            "{:<26} {:<28} {:<11} {:>8.2}  {:<4}  {}",
            r.name,
            r.expected,
            r.mode,
            r.secs,
            if r.pass { "PASS" } else { "FAIL" },
            r.observed
        );
    }
    let failed = rows.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        return Err(CliError::Verification(format!("{failed} of {} cases failed", rows.len())));
    }
    println!("all {} cases passed", rows.len());
    Ok(())
}
