use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::spec::FamilySpec;
use super::stats::{report, StatReport};
use crate::classgroup::{class_data, two_torsion_size, unit_group};
use crate::error::{Error, Result};
use crate::forms::{enumerate_forms, BinaryCubicForm, EnumerationRequest, EnumerationStrategy};
use crate::rings::{ring_from_form, Signature};
use crate::shapes::{shape_of_ring, ShapePoint};

/// Class data of one maximal ring, as stored in the cache.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassRow {
    pub h: u64,
    pub divisors: Vec<u64>,
    pub h_plus: u64,
    pub narrow_divisors: Vec<u64>,
    pub cl2: u64,
    pub cl2_plus: u64,
    pub regulator: Option<f64>,
}

/// One enumerated ring.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyRow {
    pub form: BinaryCubicForm,
    pub disc: i128,
    pub shape: std::result::Result<ShapePoint, Error>,
    /// `None` when class data was not requested.
    pub class: Option<std::result::Result<ClassRow, Error>>,
}

impl FamilyRow {
    pub fn signature(&self) -> Signature {
        if self.disc > 0 {
            Signature::TotallyReal
        } else {
            Signature::Complex
        }
    }

    pub fn class_row(&self) -> Option<&ClassRow> {
        self.class.as_ref().and_then(|c| c.as_ref().ok())
    }
}

#[derive(Debug, Clone)]
#[derive(Default)]
pub struct RunOptions {
    pub class_data: bool,
    /// Worker threads; `0` uses the global pool.
    pub workers: usize,
    /// Directory holding the append-only class data cache.
    pub cache: Option<PathBuf>,
}


#[derive(Debug, Clone)]
pub struct FamilyRun {
    /// Rows whose shape lies in the region, sorted by `|disc|` then form.
    pub rows: Vec<FamilyRow>,
    /// Rows in the window before the region filter.
    pub n_window: usize,
    /// Rows whose shape could not be computed.
    pub shape_failures: usize,
    pub report: StatReport,
    /// Class data computed in this run rather than read from the cache.
    pub computed: usize,
    pub cache_hits: usize,
}

const CACHE_FILE: &str = "classdata.csv";
const CSV_HEADER: [&str; 9] = ["form", "disc", "h", "divisors", "h_plus", "narrow_divisors", "cl2", "cl2_plus", "regulator"];

/// Enumerate the family, compute shapes (and class data if requested) and
/// aggregate. The output does not depend on the number of workers.
pub fn run_family(spec: &FamilySpec, opts: &RunOptions) -> Result<FamilyRun> {
    spec.validate()?;
    if opts.workers == 0 {
        return run_inner(spec, opts);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| Error::Io(e.to_string()))?;
    pool.install(|| run_inner(spec, opts))
}

fn run_inner(spec: &FamilySpec, opts: &RunOptions) -> Result<FamilyRun> {
    let forms = match spec.effective_window() {
        Some((lo, hi)) => {
            let req = EnumerationRequest {
                conditions: spec.conditions.clone(),
                require_maximal: spec.maximal_required,
                ..EnumerationRequest::maximal_irreducible(lo, hi)
            };
            enumerate_forms(&req, EnumerationStrategy::ReducedTraversal)
        }
        None => Vec::new(),
    };
    let n_window = forms.len();
    let shaped: Vec<(BinaryCubicForm, std::result::Result<ShapePoint, Error>)> =
        forms.par_iter().map(|f| (*f, shape_of_ring(&ring_from_form(f)))).collect();
    let shape_failures = shaped.iter().filter(|(_, s)| s.is_err()).count();
    let kept: Vec<_> = shaped
        .into_iter()
        .filter(|(_, s)| s.as_ref().map(|p| spec.region.contains(p)).unwrap_or(false))
        .collect();

    let cache = match (&opts.cache, opts.class_data) {
        (Some(dir), true) => load_cache(dir)?,
        _ => HashMap::new(),
    };
    let rows: Vec<(FamilyRow, bool)> = kept
        .into_par_iter()
        .map(|(form, shape)| {
            let class = opts.class_data.then(|| {
                match cache.get(&form.to_string()) {
                    Some(c) if !spec.regulators || c.regulator.is_some() => (Ok(c.clone()), false),
                    _ => (compute_class_row(&form, spec.regulators), true),
                }
            });
            let fresh = matches!(class, Some((_, true)));
            let row = FamilyRow { form, disc: form.disc(), shape, class: class.map(|c| c.0) };
            (row, fresh)
        })
        .collect();
    let computed = rows.iter().filter(|r| r.1).count();
    let cache_hits = rows.iter().filter(|r| r.0.class.is_some() && !r.1).count();
    if let (Some(dir), true) = (&opts.cache, opts.class_data) {
        let fresh: Vec<&FamilyRow> = rows.iter().filter(|r| r.1).map(|r| &r.0).collect();
        append_cache(dir, &fresh)?;
    }
    let rows: Vec<FamilyRow> = rows.into_iter().map(|r| r.0).collect();
    let report = report(spec, &rows, n_window - shape_failures)?;
    Ok(FamilyRun { rows, n_window, shape_failures, report, computed, cache_hits })
}

/// Class data of the maximal ring of `f`.
pub fn compute_class_row(f: &BinaryCubicForm, regulator: bool) -> Result<ClassRow> {
    let ring = ring_from_form(f);
    let cd = class_data(&ring)?;
    let regulator = if regulator { Some(unit_group(&ring)?.regulator) } else { None };
    Ok(ClassRow {
        h: cd.class_number(),
        divisors: cd.class_group.divisors.clone(),
        h_plus: cd.narrow_class_number(),
        narrow_divisors: cd.narrow.divisors.clone(),
        cl2: two_torsion_size(&cd.class_group),
        cl2_plus: two_torsion_size(&cd.narrow),
        regulator,
    })
}

fn join_divisors(d: &[u64]) -> String {
    if d.is_empty() {
        "1".into()
    } else {
        d.iter().map(u64::to_string).collect::<Vec<_>>().join("-")
    }
}

fn split_divisors(s: &str) -> Result<Vec<u64>> {
    let v = s
        .split('-')
        .map(|t| t.parse::<u64>().map_err(|_| Error::Parse(format!("bad divisor list {s:?}"))))
        .collect::<Result<Vec<u64>>>()?;
    Ok(v.into_iter().filter(|&d| d > 1).collect())
}

fn class_record(form: &BinaryCubicForm, disc: i128, c: &ClassRow) -> [String; 9] {
    [
        form.to_string(),
        disc.to_string(),
        c.h.to_string(),
        join_divisors(&c.divisors),
        c.h_plus.to_string(),
        join_divisors(&c.narrow_divisors),
        c.cl2.to_string(),
        c.cl2_plus.to_string(),
        c.regulator.map(|r| r.to_string()).unwrap_or_default(),
    ]
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Read the cache in `dir`; later lines win over earlier ones.
pub fn load_cache(dir: &Path) -> Result<HashMap<String, ClassRow>> {
    let path = dir.join(CACHE_FILE);
    let mut out = HashMap::new();
    if !path.exists() {
        return Ok(out);
    }
    let mut text = String::new();
    File::open(&path)?.read_to_string(&mut text)?;
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let num = |i: usize| field(i).parse::<u64>().map_err(|_| Error::Parse(format!("cache field {:?}", field(i))));
        let regulator = match field(8) {
            "" => None,
            r => Some(r.parse::<f64>().map_err(|_| Error::Parse(format!("cache regulator {r:?}")))?),
        };
        let row = ClassRow {
            h: num(2)?,
            divisors: split_divisors(field(3))?,
            h_plus: num(4)?,
            narrow_divisors: split_divisors(field(5))?,
            cl2: num(6)?,
            cl2_plus: num(7)?,
            regulator,
        };
        out.insert(field(0).to_string(), row);
    }
    Ok(out)
}

fn append_cache(dir: &Path, rows: &[&FamilyRow]) -> Result<()> {
    let ok: Vec<(&FamilyRow, &ClassRow)> = rows.iter().filter_map(|r| r.class_row().map(|c| (*r, c))).collect();
    if ok.is_empty() {
        return Ok(());
    }
    std::fs::create_dir_all(dir)?;
    let path = dir.join(CACHE_FILE);
    let fresh = !path.exists();
    let file = OpenOptions::new().create(true).append(true).open(&path)?;
    let mut w = csv::Writer::from_writer(file);
    if fresh {
        w.write_record(CSV_HEADER).map_err(csv_err)?;
    }
    for (r, c) in ok {
        w.write_record(class_record(&r.form, r.disc, c)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Class data rows as CSV, in the cache schema. Rows without class data
/// are skipped.
pub fn write_class_csv<W: Write>(rows: &[FamilyRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        if let Some(c) = r.class_row() {
            w.write_record(class_record(&r.form, r.disc, c)).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::SignatureFilter;

    #[test]
    fn divisor_lists_roundtrip() {
        assert_eq!(join_divisors(&[]), "1");
        assert_eq!(join_divisors(&[2, 6]), "2-6");
        assert_eq!(split_divisors("2-6").unwrap(), vec![2, 6]);
        assert!(split_divisors("1").unwrap().is_empty());
    }

    #[test]
    fn small_complex_family() {
        let spec = FamilySpec::new(SignatureFilter::Complex, -50, 0);
        let run = run_family(&spec, &RunOptions { class_data: true, ..Default::default() }).unwrap();
        let discs: Vec<i128> = run.rows.iter().map(|r| r.disc).collect();
        assert_eq!(discs, vec![-23, -31, -44]);
        assert_eq!(run.report.cl2_avg, Some(1.0));
        assert_eq!(run.computed, 3);
    }

    #[test]
    fn warm_cache_skips_work() {
        let dir = tempfile::tempdir().unwrap();
        let spec = FamilySpec::new(SignatureFilter::Any, -400, 400);
        let opts = RunOptions { class_data: true, workers: 2, cache: Some(dir.path().to_path_buf()) };
        let cold = run_family(&spec, &opts).unwrap();
        let warm = run_family(&spec, &opts).unwrap();
        assert!(cold.computed > 0);
        assert_eq!(warm.computed, 0);
        assert_eq!(warm.cache_hits, cold.computed);
        assert_eq!(cold.rows, warm.rows);
        assert_eq!(cold.report, warm.report);
    }
}
