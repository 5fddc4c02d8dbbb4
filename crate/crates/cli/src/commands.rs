use std::path::Path;

use fhskit::correlation::{direct_flags, optimality_report, CorrelationReport, Engine};
use fhskit::extend::{concatenate, regenerate, Ceilings, ExtendError, Table1Row};
use fhskit::fhs::{generate_fhs_set, ConstructionError, FhsParams, FhsSet};
use fhskit::format::{fhs_from_csv, fhs_to_json, from_json, oc_to_json, to_csv, FormatError, Loaded};
use fhskit::oc::{validate_oc, OcError, OcFamily, OcSet};

use crate::{write_atomic, CliError, Format};

fn construction_error(e: ConstructionError) -> CliError {
    CliError::Precondition(e.to_string())
}

fn extend_error(e: ExtendError) -> CliError {
    match e {
        ExtendError::Construction(e) => construction_error(e),
        ExtendError::Set(_) | ExtendError::Correlation(_) => CliError::Verification(e.to_string()),
        other => CliError::Precondition(other.to_string()),
    }
}

fn oc_error(e: OcError) -> CliError {
    CliError::Precondition(e.to_string())
}

fn format_error(path: &Path, e: FormatError) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// JSON files keep their metadata; CSV files load as imported sets.
fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = read(path)?;
    if is_csv(path) {
        fhs_from_csv(&text).map(Loaded::Fhs).map_err(|e| format_error(path, e))
    } else {
        from_json(&text).map_err(|e| format_error(path, e))
    }
}

fn load_fhs(path: &Path) -> Result<FhsSet, CliError> {
    match load(path)? {
        Loaded::Fhs(set) => Ok(set),
        Loaded::Oc(_) => Err(CliError::Precondition(format!("{} holds an OC set, not an FHS set", path.display()))),
    }
}

fn save_fhs(set: &FhsSet, out: Option<&Path>, format: Format) -> Result<(), CliError> {
    let Some(path) = out else { return Ok(()) };
    let text = match format {
        Format::Json => fhs_to_json(set),
        Format::Csv => to_csv(set.sequences()),
    };
    write_atomic(path, &text)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn save_oc(set: &OcSet, out: Option<&Path>, format: Format) -> Result<(), CliError> {
    let Some(path) = out else { return Ok(()) };
    let text = match format {
        Format::Json => oc_to_json(set),
        Format::Csv => to_csv(set.sequences()),
    };
    write_atomic(path, &text)?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn generate(params: FhsParams, out: Option<&Path>, format: Format) -> Result<(), CliError> {
    let set = generate_fhs_set(params).map_err(construction_error)?;
    println!("{}", set.params_of().map_err(|e| CliError::Verification(e.to_string()))?);
    let flags = direct_flags(params.q(), params.m, params.t, params.r);
    let q = params.q() as i128;
    let e = params.e() as i128;
    let rhs = e * e + (e + 1) * q.pow(params.t) - 3 * e;
    println!(
        "sufficient condition q^m-1 < e^2+(e+1)q^t-3e: {} ({} vs {rhs})",
        if flags.sufficient_condition { "holds" } else { "fails" },
        q.pow(params.m) - 1,
    );
    save_fhs(&set, out, format)
}

fn print_report(rep: &CorrelationReport) {
    println!("params      {}", rep.params);
    println!("engine      {}", rep.profile.engine);
    match rep.profile.ha_witness {
        Some(w) => println!("H_a         {}  (sequence {}, delay {})", rep.profile.ha, w.pair.0, w.delay),
        None => println!("H_a         {}", rep.profile.ha),
    }
    match rep.profile.hc_witness {
        Some(w) => println!("H_c         {}  (sequences {} and {}, delay {})", rep.profile.hc, w.pair.0, w.pair.1, w.delay),
        None => println!("H_c         {}", rep.profile.hc),
    }
    println!("H_m         {}", rep.profile.hm);
    println!("peng-fan    {}", rep.peng_fan);
    println!("optimal     {}", rep.is_optimal);
    println!("m(S)        {}", rep.max_appearance);
    if let Some(f) = rep.direct {
        println!("eq1         {}", f.eq1);
        println!("eq2         {}  (value {})", f.eq2, f.eq2_value);
        println!("sufficient  {}", f.sufficient_condition);
    }
    println!("runtime     {:.3} s", rep.timing.profile_secs + rep.timing.appearance_secs);
}

pub fn analyze(path: &Path, engine: Engine, json: bool) -> Result<(), CliError> {
    let set = load_fhs(path)?;
    let rep = optimality_report(&set, engine).map_err(|e| CliError::Verification(e.to_string()))?;
    if json {
        println!("{}", serde_json::to_string_pretty(&rep).expect("reports serialize"));
    } else {
        print_report(&rep);
    }
    Ok(())
}

fn row_for(family: OcFamily) -> Table1Row {
    match family {
        OcFamily::Linear(k) => Table1Row::Row1 { k },
        OcFamily::Affine(p) => Table1Row::Row2 { p },
        OcFamily::Product(k, p) => Table1Row::Row3 { k, p },
    }
}

pub fn extend(
    path: &Path,
    family: OcFamily,
    strict: bool,
    check: bool,
    out: Option<&Path>,
    format: Format,
) -> Result<(), CliError> {
    let base = load_fhs(path)?;
    let direct = base.provenance().direct_params();
    if strict {
        let params = direct.ok_or_else(|| {
            CliError::Precondition("--strict needs a base set from the direct construction".into())
        })?;
        row_for(family).check(&params).map_err(extend_error)?;
    }
    let oc = family.build().map_err(oc_error)?;
    let result = concatenate(&base, &oc).map_err(extend_error)?;
    println!("{}", result.params_of().map_err(|e| CliError::Verification(e.to_string()))?);
    println!("oc set {} {}, s = {} covers m(S)", family, oc.params(), oc.family_size());
    if let Some(params) = direct {
        let c = Ceilings::new(&params, oc.length() as u64, oc.alphabet() as u64);
        println!("ceilings    {} vs {} ({})", c.extended, c.base, if c.equal() { "equal" } else { "differ" });
    }
    if check {
        let rep = optimality_report(&result, Engine::Auto).map_err(|e| CliError::Verification(e.to_string()))?;
        println!("H_m         {}", rep.profile.hm);
        println!("peng-fan    {}", rep.peng_fan);
        println!("optimal     {}", rep.is_optimal);
    }
    save_fhs(&result, out, format)
}

pub fn oc(family: OcFamily, out: Option<&Path>, format: Format) -> Result<(), CliError> {
    let set = family.build().map_err(oc_error)?;
    let report = validate_oc(&set);
    if !report.ok {
        return Err(CliError::Verification(format!("{}", report.violations[0])));
    }
    println!("{} valid", set.params());
    save_oc(&set, out, format)
}

fn first_difference(a: &[Vec<u32>], b: &[Vec<u32>]) -> Option<String> {
    if a.len() != b.len() {
        return Some(format!("{} sequences, regeneration gives {}", a.len(), b.len()));
    }
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        if x.len() != y.len() {
            return Some(format!("sequence {i} has length {}, regeneration gives {}", x.len(), y.len()));
        }
        if let Some(k) = x.iter().zip(y).position(|(u, w)| u != w) {
            return Some(format!("sequence {i} position {k} holds {}, regeneration gives {}", x[k], y[k]));
        }
    }
    None
}

fn verify_fhs(set: &FhsSet) -> Result<(), CliError> {
    let fail = CliError::Verification;
    println!("params      {} (recounted)", set.params_of().map_err(|e| fail(e.to_string()))?);
    match regenerate(set.provenance()) {
        Ok(again) => {
            if let Some(diff) = first_difference(set.sequences(), again.sequences()) {
                return Err(fail(format!("sequences differ from their construction: {diff}")));
            }
            if again.alphabet() != set.alphabet() || again.declared_lambda() != set.declared_lambda() {
                return Err(fail(format!(
                    "declared parameters {} differ from the construction's {}",
                    set.params_of().unwrap(),
                    again.params_of().unwrap()
                )));
            }
            if set.slot_labels().is_some() && set.slot_labels() != again.slot_labels() {
                return Err(fail("slot labels differ from the construction".into()));
            }
            println!("sequences   match their construction");
        }
        Err(ExtendError::NotRegenerable) => println!("sequences   imported, no construction to compare"),
        Err(e) => return Err(fail(format!("cannot regenerate from provenance: {e}"))),
    }
    let rep = optimality_report(set, Engine::Auto).map_err(|e| fail(e.to_string()))?;
    println!("H_m         {}", rep.profile.hm);
    println!("peng-fan    {}", rep.peng_fan);
    if rep.profile.hm < rep.peng_fan {
        return Err(fail(format!("H_m = {} is below the Peng-Fan bound {}", rep.profile.hm, rep.peng_fan)));
    }
    if !rep.within_declared() {
        return Err(fail(format!(
            "H_m = {} exceeds declared lambda = {}",
            rep.profile.hm,
            rep.params.lambda.unwrap()
        )));
    }
    println!("optimal     {}", rep.is_optimal);
    Ok(())
}

fn verify_oc(set: &OcSet) -> Result<(), CliError> {
    let fail = CliError::Verification;
    println!("params      {}", set.params());
    let report = validate_oc(set);
    if !report.ok {
        return Err(fail(format!(
            "one-coincidence property violated ({} violations), first: {}",
            report.violations.len(),
            report.violations[0]
        )));
    }
    println!("oc property holds");
    match set.provenance().rebuild() {
        Ok(again) => {
            if let Some(diff) = first_difference(set.sequences(), again.sequences()) {
                return Err(fail(format!("sequences differ from their construction: {diff}")));
            }
            if again.alphabet() != set.alphabet() {
                return Err(fail(format!("alphabet {} differs from the construction's {}", set.alphabet(), again.alphabet())));
            }
            println!("sequences   match their construction");
        }
        Err(_) => println!("sequences   imported, no construction to compare"),
    }
    Ok(())
}

pub fn verify(path: &Path) -> Result<(), CliError> {
    let text = read(path)?;
    let loaded = if is_csv(path) {
        fhs_from_csv(&text).map(Loaded::Fhs)
    } else {
        from_json(&text)
    };
    let loaded = match loaded {
        Ok(l) => l,
        Err(e @ FormatError::Parse(_)) | Err(e @ FormatError::Version(_)) => return Err(format_error(path, e)),
        Err(e) => return Err(CliError::Verification(e.to_string())),
    };
    match &loaded {
        Loaded::Fhs(set) => verify_fhs(set)?,
        Loaded::Oc(set) => verify_oc(set)?,
    }
    println!("verified");
    Ok(())
}
