//! CSV formats. All output uses `.` decimals and LF line endings; reals in
//! run files use the shortest representation that parses back exactly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::experiment::RunMetrics;
use crate::product::{ProductType, Signature, TypeRecord, VERTICES};
use crate::world::{ConsumerSample, PeriodSample, World};

pub const TYPES_HEADER: &str = "type_id,edge_count,utility,s0,s1,s2,s3,s4,s5";
pub const RUN_HEADER: &str = "cycle,consumer_id,units,utility,i0,i1,i2,i3,i4,i5";
pub const SUMMARY_HEADER: &str =
    "seed,social,fdc,mean_units,mean_utility,utility_per_unit,mean_coverage,mean_path_length,trend_slope,trend_p";
pub const WORLD_HEADER: &str = "cycle,entity_kind,id,x,y,state";
pub const NETWORK_HEADER: &str = "cycle,id_a,id_b,strength";

/// Marker written in place of undefined values.
pub const NA: &str = "NA";

/// 17 significant digits.
pub fn real17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_real(x: Option<f64>) -> String {
    x.map_or_else(|| NA.to_string(), |v| v.to_string())
}

pub fn types_csv<'a>(types: impl IntoIterator<Item = &'a ProductType>) -> String {
    let mut out = format!("{TYPES_HEADER}\n");
    for t in types {
        let _ = write!(out, "{},{},{}", t.type_id, t.topology.edge_count(), real17(t.utility));
        for s in t.signature.components() {
            let _ = write!(out, ",{}", real17(*s));
        }
        out.push('\n');
    }
    out
}

fn field<T: FromStr>(source: &str, line: usize, name: &str, raw: Option<&str>) -> Result<T> {
    let raw = raw.ok_or_else(|| Error::parse(source, format!("line {line}: missing {name}")))?;
    raw.trim()
        .parse()
        .map_err(|_| Error::parse(source, format!("line {line}: bad {name} {raw:?}")))
}

fn data_lines<'a>(source: &str, text: &'a str, header: &str) -> Result<impl Iterator<Item = (usize, &'a str)>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, h)) if h.trim() == header => Ok(lines),
        Some((n, h)) => Err(Error::parse(source, format!("line {n}: expected header {header:?}, found {h:?}"))),
        None => Err(Error::parse(source, "empty file")),
    }
}

/// Reads a type-set file. Lines starting with `#` are ignored.
pub fn parse_types_csv(source: &str, text: &str) -> Result<Vec<TypeRecord>> {
    let mut out = Vec::new();
    for (n, line) in data_lines(source, text, TYPES_HEADER)? {
        let mut cols = line.split(',');
        let type_id = field(source, n, "type_id", cols.next())?;
        let edge_count = field(source, n, "edge_count", cols.next())?;
        let utility = field(source, n, "utility", cols.next())?;
        let mut sig = [0.0; VERTICES];
        for (k, s) in sig.iter_mut().enumerate() {
            *s = field(source, n, &format!("s{k}"), cols.next())?;
        }
        out.push(TypeRecord {
            type_id,
            edge_count,
            utility,
            signature: Signature(sig),
        });
    }
    Ok(out)
}

pub fn run_csv(samples: &[PeriodSample]) -> String {
    let mut out = format!("{RUN_HEADER}\n");
    for s in samples {
        for (id, c) in s.consumers.iter().enumerate() {
            let _ = write!(out, "{},{},{},{}", s.cycle, id, c.units, c.utility);
            for v in c.ideal.components() {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
    }
    out
}

/// Reads a run file back into samples. Rows must be grouped by cycle with
/// consumer ids `0..n` in order.
pub fn parse_run_csv(source: &str, text: &str) -> Result<Vec<PeriodSample>> {
    let mut samples: Vec<PeriodSample> = Vec::new();
    let mut rows: Vec<ConsumerSample> = Vec::new();
    let mut current: Option<u64> = None;
    for (n, line) in data_lines(source, text, RUN_HEADER)? {
        let mut cols = line.split(',');
        let cycle: u64 = field(source, n, "cycle", cols.next())?;
        let id: usize = field(source, n, "consumer_id", cols.next())?;
        let units = field(source, n, "units", cols.next())?;
        let utility = field(source, n, "utility", cols.next())?;
        let mut ideal = [0.0; VERTICES];
        for (k, v) in ideal.iter_mut().enumerate() {
            *v = field(source, n, &format!("i{k}"), cols.next())?;
        }
        if current != Some(cycle) {
            if let Some(c) = current {
                samples.push(PeriodSample::from_rows(c, std::mem::take(&mut rows)));
            }
            current = Some(cycle);
        }
        if id != rows.len() {
            return Err(Error::parse(source, format!("line {n}: consumer {id} out of order")));
        }
        rows.push(ConsumerSample {
            units,
            utility,
            ideal: Signature(ideal),
        });
    }
    if let Some(c) = current {
        samples.push(PeriodSample::from_rows(c, rows));
    }
    if let Some(first) = samples.first() {
        if samples.iter().any(|s| s.consumers.len() != first.consumers.len()) {
            return Err(Error::parse(source, "consumer count varies between cycles"));
        }
    }
    Ok(samples)
}

pub fn summary_row(seed: u64, social: bool, fdc: Option<f64>, m: &RunMetrics) -> String {
    format!(
        "{seed},{social},{},{},{},{},{},{},{},{}",
        opt_real(fdc),
        m.mean_units,
        m.mean_utility,
        opt_real(m.utility_per_unit),
        m.mean_coverage,
        m.mean_path_length,
        opt_real(m.trend_slope),
        opt_real(m.trend_p),
    )
}

/// Positions of every consumer and product at the world's current cycle.
pub fn world_dump_rows(world: &World) -> String {
    let mut out = String::new();
    let cycle = world.cycle();
    for c in world.consumers() {
        let state = if c.consuming.is_some() { "consuming" } else { "foraging" };
        let _ = writeln!(out, "{cycle},consumer,{},{},{},{state}", c.id, c.location.x, c.location.y);
    }
    for p in world.products() {
        let state = match p.state {
            crate::product::ProductState::Available => "available",
            crate::product::ProductState::BeingConsumed => "being-consumed",
        };
        let _ = writeln!(out, "{cycle},product,{},{},{},{state}", p.id, p.location.x, p.location.y);
    }
    out
}

pub fn network_rows(world: &World) -> String {
    let mut out = String::new();
    for (a, b, s) in world.network().edges() {
        let _ = writeln!(out, "{},{a},{b},{s}", world.cycle());
    }
    out
}

pub fn run_file_name(seed: u64, social: bool) -> String {
    format!("run_{seed}_{}.csv", if social { "social" } else { "nonsocial" })
}

/// Parses `run_<seed>_<social|nonsocial>.csv`.
pub fn parse_run_file_name(name: &str) -> Option<(u64, bool)> {
    let stem = name.strip_prefix("run_")?.strip_suffix(".csv")?;
    let (seed, kind) = stem.split_once('_')?;
    let social = match kind {
        "social" => true,
        "nonsocial" => false,
        _ => return None,
    };
    Some((seed.parse().ok()?, social))
}

/// Writes through a temporary sibling file and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = PathBuf::from(path);
    let name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("not a file path: {}", path.display())))?
        .to_string_lossy()
        .into_owned();
    tmp.set_file_name(format!(".{name}.tmp"));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
