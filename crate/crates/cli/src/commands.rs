use std::fs;
use std::path::Path;

use serde_json::json;
use symcube::compose::{self, Side};
use symcube::document::{FormulaDocument, MomentsFile, Provenance};
use symcube::smolyak::counts::{smolyak_count, CountSequence};
use symcube::smolyak::{golden_table, table, TableId};
use symcube::sphere::{
    mysovskikh_deg5, mysovskikh_deg7, product_deg5_sphere, product_deg7_sphere, projected_smolyak_sphere,
    SimplexFrame,
};
use symcube::verify::{condition_number, default_tolerance, exactness, moller_bound};
use symcube::{CubatureFormula, ProductWeight, Weight1D};

use crate::{Builtin, CliError, Seq, SphereSource, Status, TransferTo};

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_formula(path: &Path) -> Result<CubatureFormula> {
    Ok(FormulaDocument::from_json(&read(path)?)?.to_formula()?)
}

fn builtin(b: Builtin) -> Weight1D {
    match b {
        Builtin::Lebesgue => Weight1D::lebesgue(),
        Builtin::Gaussian => Weight1D::gaussian(),
    }
}

fn load_moments(path: &Path) -> Result<Weight1D> {
    let file = MomentsFile::from_json(&read(path)?).map_err(|e| match e {
        symcube::Error::Schema(msg) => symcube::Error::Schema(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    Ok(file.to_weight()?)
}

/// One file for every coordinate, or one file per coordinate.
fn product_from_files(files: &[std::path::PathBuf], dim: usize) -> Result<ProductWeight> {
    let weights = files.iter().map(|p| load_moments(p)).collect::<Result<Vec<_>>>()?;
    match weights.len() {
        1 => Ok(ProductWeight::uniform(weights[0].clone(), dim)),
        n if n == dim => Ok(ProductWeight::new(weights)?),
        n => Err(CliError::Usage(format!(
            "{n} moments files for dimension {dim}: give one file or one per coordinate"
        ))),
    }
}

fn k_of(degree: usize) -> Result<usize> {
    match degree {
        5 => Ok(2),
        7 => Ok(3),
        _ => Err(CliError::Usage(format!("degree must be 5 or 7, got {degree}"))),
    }
}

fn weight_name(w: &ProductWeight) -> String {
    if w.fully_symmetric() {
        w.factor(0).label().to_string()
    } else {
        w.factors().iter().map(|f| f.label()).collect::<Vec<_>>().join(",")
    }
}

fn summary(rule: &CubatureFormula) -> Result<()> {
    let counts = rule.counts();
    println!("knots: {} (before merging: {})", counts.merged, counts.raw);
    if rule.len() != counts.merged {
        println!("nonzero weights: {}", rule.len());
    }
    println!("moller bound: {}", moller_bound(rule.degree(), rule.dim())?);
    println!("condition number: {:.6}", condition_number(rule, rule.target())?);
    Ok(())
}

fn save(rule: &CubatureFormula, provenance: Provenance, out: Option<&Path>) -> Result<()> {
    if let Some(path) = out {
        write(path, &FormulaDocument::from_formula(rule, provenance).to_json())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

pub fn build(
    degree: usize,
    dim: usize,
    weight: Option<Builtin>,
    moments: &[std::path::PathBuf],
    general: bool,
    out: Option<&Path>,
) -> Result<Status> {
    let k = k_of(degree)?;
    let product = if moments.is_empty() {
        ProductWeight::uniform(builtin(weight.unwrap_or(Builtin::Lebesgue)), dim)
    } else if !general && moments.len() > 1 {
        return Err(CliError::Usage("several moments files need --general".into()));
    } else {
        product_from_files(moments, dim)?
    };
    let (rule, name) = if general {
        (compose::build_general(&product, k)?.formula, "build_general")
    } else if k == 2 {
        (compose::build_deg5(product.factor(0), dim)?.formula, "build_deg5")
    } else {
        (compose::build_deg7(product.factor(0), dim)?.formula, "build_deg7")
    };
    println!("degree {degree}, dimension {dim}, weight {}", weight_name(&product));
    summary(&rule)?;
    let provenance = Provenance::new(name)
        .with("degree", degree)
        .with("dim", dim)
        .with("weight", weight_name(&product));
    save(&rule, provenance, out)?;
    Ok(Status::Ok)
}

pub fn verify(file: &Path, degree: Option<usize>, tol: Option<f64>, report: Option<&Path>) -> Result<Status> {
    let rule = read_formula(file)?;
    let degree = degree.unwrap_or(rule.degree());
    let tol = tol.unwrap_or_else(|| default_tolerance(degree));
    let r = exactness(&rule, rule.target(), degree, tol)?;
    println!(
        "degree {degree}: {} monomials ({} evaluated), tolerance {tol:e}",
        r.monomials, r.evaluated
    );
    println!("max relative error: {:e}", r.max_rel_error);
    println!("max absolute error: {:e}", r.max_abs_error);
    println!(
        "worst monomial: {:?} (formula {:e}, exact {:e})",
        r.worst, r.worst_value, r.worst_exact
    );
    println!("{}", if r.pass { "PASS" } else { "FAIL" });
    if let Some(path) = report {
        let doc = json!({
            "version": symcube::document::FORMAT_VERSION,
            "degree": r.degree,
            "monomials": r.monomials.to_string(),
            "evaluated": r.evaluated,
            "worst": r.worst,
            "worst_value": r.worst_value,
            "worst_exact": r.worst_exact,
            "max_abs_error": r.max_abs_error,
            "max_rel_error": r.max_rel_error,
            "tol": r.tol,
            "symmetric": r.symmetric,
            "pass": r.pass,
        });
        write(path, &(serde_json::to_string_pretty(&doc).expect("plain JSON") + "\n"))?;
    }
    Ok(if r.pass { Status::Ok } else { Status::Failed })
}

fn check_table(id: TableId) -> Result<bool> {
    let golden = golden_table(id);
    let diff = golden.diff(&table(id)?);
    if diff.is_empty() {
        println!("table {}: {} entries matched", id.number(), golden.entries());
        return Ok(true);
    }
    for (l, d, want, got) in &diff {
        println!("table {}: l={l} d={d}: expected {want:?}, computed {got:?}", id.number());
    }
    Ok(false)
}

pub fn counts(table_no: Option<usize>, check: bool, degree: Option<usize>, dims: &[usize], seq: Seq) -> Result<Status> {
    if let Some(degree) = degree {
        let seq = match seq {
            Seq::Std => CountSequence::Standard,
            Seq::Variant => CountSequence::Variant,
            Seq::Delayed => CountSequence::Delayed,
        };
        for d in dims {
            println!("d={d}: {}", smolyak_count(&seq, degree, *d)?);
        }
        return Ok(Status::Ok);
    }
    let ids: Vec<TableId> = match table_no {
        Some(n) => vec![TableId::from_number(n).ok_or_else(|| CliError::Usage(format!("no table {n}; tables are 1-5")))?],
        None if check => TableId::ALL.to_vec(),
        None => return Err(CliError::Usage("give --table N, --check, or --degree with --dims".into())),
    };
    let mut ok = true;
    for id in ids {
        if check {
            ok &= check_table(id)?;
        } else {
            print!("{}", table(id)?.render());
        }
    }
    Ok(if ok { Status::Ok } else { Status::Failed })
}

pub fn transfer(
    file: &Path,
    to: Option<TransferTo>,
    moments: &[std::path::PathBuf],
    k: Option<usize>,
    out: Option<&Path>,
) -> Result<Status> {
    let rule = read_formula(file)?;
    let d = rule.dim();
    let k = k.unwrap_or((rule.degree().saturating_sub(1)) / 2);
    let (side, name) = match to {
        Some(TransferTo::Sphere) => (Side::Sphere, "sphere".to_string()),
        Some(TransferTo::Lebesgue) => (Side::Product(ProductWeight::uniform(Weight1D::lebesgue(), d)), "lebesgue".into()),
        Some(TransferTo::Gaussian) => (Side::Product(ProductWeight::uniform(Weight1D::gaussian(), d)), "gaussian".into()),
        None if !moments.is_empty() => {
            let w = product_from_files(moments, d)?;
            let name = weight_name(&w);
            (Side::Product(w), name)
        }
        None => return Err(CliError::Usage("give --to or --moments".into())),
    };
    let t = compose::transfer_to(&rule, &side, k)?;
    println!(
        "knots: {} -> {} (added {}, bound c_k d^(k-1) = {})",
        rule.len(),
        t.formula.counts().merged,
        t.added,
        t.bound
    );
    println!("condition number: {:.6}", condition_number(&t.formula, t.formula.target())?);
    let provenance = Provenance::new("transfer")
        .with("k", k)
        .with("to", name)
        .with("source", rule.target().kind());
    save(&t.formula, provenance, out)?;
    Ok(Status::Ok)
}

pub fn bounds(degree: usize, dims: &[usize]) -> Result<Status> {
    for d in dims {
        println!("d={d}: {}", moller_bound(degree, *d)?);
    }
    Ok(Status::Ok)
}

pub fn condition(file: &Path) -> Result<Status> {
    let rule = read_formula(file)?;
    println!("condition number: {:.12}", condition_number(&rule, rule.target())?);
    Ok(Status::Ok)
}

pub fn sphere(degree: usize, dim: usize, source: SphereSource, out: Option<&Path>) -> Result<Status> {
    let k = k_of(degree)?;
    let rule = match (source, k) {
        (SphereSource::Simplex, 2) => mysovskikh_deg5(dim, &SimplexFrame::aligned(dim)?)?,
        (SphereSource::Simplex, _) => mysovskikh_deg7(dim, &SimplexFrame::aligned(dim)?)?,
        (SphereSource::Product, 2) => product_deg5_sphere(dim)?,
        (SphereSource::Product, _) => product_deg7_sphere(dim)?,
        (SphereSource::Projected, _) => projected_smolyak_sphere(dim, k, 1.0)?,
    };
    println!("points: {}", rule.counts().merged);
    if rule.len() != rule.counts().merged {
        println!("nonzero weights: {}", rule.len());
    }
    let source_name = match source {
        SphereSource::Simplex => "simplex",
        SphereSource::Projected => "projected",
        SphereSource::Product => "product",
    };
    let provenance = Provenance::new("sphere")
        .with("degree", degree)
        .with("dim", dim)
        .with("source", source_name);
    save(&rule, provenance, out)?;
    Ok(Status::Ok)
}
