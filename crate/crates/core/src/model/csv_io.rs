//! Instance CSV format.
//!
//! ```text
//! arm,label,family,param_kind,c1,c2
//! 0,first,gaussian,means,0.5,1.0
//! 1,second,gaussian,means,1.0,0.5
//! ,,gaussian,variance,1.0,1.0
//! ,,gaussian,scale,1.0,1.0
//! ```
//!
//! One `means` row per arm in arm order, a single `variance` row for Gaussian
//! instances and an optional `scale` row.

use std::io::{Read, Write};
use std::path::Path;

use super::{BanditInstance, Family};
use crate::error::{PsiError, Result};
use crate::pareto::MeanMatrix;

const FIXED_COLUMNS: [&str; 4] = ["arm", "label", "family", "param_kind"];

fn parse_err(row: usize, column: impl Into<String>, message: impl Into<String>) -> PsiError {
    PsiError::Parse {
        row,
        column: column.into(),
        message: message.into(),
    }
}

pub fn write_instance<W: Write>(instance: &BanditInstance, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let d = instance.dim();
    let mut header: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend((1..=d).map(|c| format!("c{c}")));
    w.write_record(&header)?;

    let family = instance.family().name();
    for (a, row) in instance.means().rows().enumerate() {
        let mut rec = vec![
            a.to_string(),
            instance.labels()[a].clone(),
            family.into(),
            "means".into(),
        ];
        rec.extend(row.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    if let Family::GaussianDiagonal { variances } = instance.family() {
        let mut rec = vec![
            String::new(),
            String::new(),
            family.into(),
            "variance".into(),
        ];
        rec.extend(variances.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    if instance.scale().iter().any(|&s| s != 1.0) {
        let mut rec = vec![String::new(), String::new(), family.into(), "scale".into()];
        rec.extend(instance.scale().iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_instance(instance: &BanditInstance, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_instance(instance, std::io::BufWriter::new(file))
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<BanditInstance> {
    read_instance(std::fs::File::open(path)?)
}

pub fn read_instance<R: Read>(reader: R) -> Result<BanditInstance> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = r.headers()?.clone();
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names.len() < 5 || names[..4] != FIXED_COLUMNS {
        return Err(parse_err(
            1,
            "header",
            "expected arm,label,family,param_kind,c1..cD",
        ));
    }
    for (n, name) in names[4..].iter().enumerate() {
        if *name != format!("c{}", n + 1) {
            return Err(parse_err(1, *name, format!("expected column c{}", n + 1)));
        }
    }
    let d = names.len() - 4;

    let mut family: Option<String> = None;
    let mut means = Vec::new();
    let mut labels = Vec::new();
    let mut variances = None;
    let mut scale = None;

    for (n, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = n + 2;
        if rec.len() != d + 4 {
            return Err(parse_err(
                row,
                "c*",
                format!(
                    "row has {} objective cells, header declares {d}",
                    rec.len().saturating_sub(4)
                ),
            ));
        }
        let fam = rec[2].trim().to_ascii_lowercase();
        match &family {
            None => family = Some(fam.clone()),
            Some(f) if *f != fam => {
                return Err(parse_err(
                    row,
                    "family",
                    format!("family '{fam}' differs from '{f}'"),
                ));
            }
            _ => {}
        }
        let values = (0..d)
            .map(|c| {
                let cell = rec[c + 4].trim();
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        parse_err(row, names[c + 4], format!("not a finite number: '{cell}'"))
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        match rec[3].trim() {
            "means" => {
                let arm: usize = rec[0].trim().parse().map_err(|_| {
                    parse_err(row, "arm", format!("not an arm index: '{}'", &rec[0]))
                })?;
                if arm != means.len() {
                    return Err(parse_err(
                        row,
                        "arm",
                        format!("expected arm {}, found {arm}", means.len()),
                    ));
                }
                labels.push(rec[1].to_string());
                means.push(values);
            }
            "variance" if variances.is_none() => variances = Some(values),
            "scale" if scale.is_none() => scale = Some(values),
            "variance" | "scale" => return Err(parse_err(row, "param_kind", "duplicate row")),
            other => {
                return Err(parse_err(
                    row,
                    "param_kind",
                    format!("unknown kind '{other}'"),
                ))
            }
        }
    }

    if means.len() < 2 {
        return Err(PsiError::InvalidArgument(format!(
            "instance needs at least two arms, found {}",
            means.len()
        )));
    }
    let family = match family.as_deref() {
        Some("gaussian") => Family::GaussianDiagonal {
            variances: variances.ok_or_else(|| {
                PsiError::Validation("gaussian instance without a variance row".into())
            })?,
        },
        Some("bernoulli") => {
            if variances.is_some() {
                return Err(PsiError::Validation(
                    "bernoulli instance with a variance row".into(),
                ));
            }
            Family::BernoulliIndependent
        }
        other => return Err(parse_err(2, "family", format!("unknown family {other:?}"))),
    };
    let means = MeanMatrix::new(means)?;
    let scale = scale.unwrap_or_else(|| vec![1.0; d]);
    BanditInstance::with_scale(means, family, scale)
        .and_then(|i| i.with_labels(labels))
        .map_err(|e| match e {
            PsiError::InvalidArgument(msg) => PsiError::Validation(msg),
            other => other,
        })
}
