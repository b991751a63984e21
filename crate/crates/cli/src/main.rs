use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cubic_core::classgroup::{class_group, narrow_class_group, AbelianGroupData};
use cubic_core::forms::{
    enumerate_forms, is_maximal, BinaryCubicForm, EnumerationRequest, EnumerationStrategy, LocalCondition,
};
use cubic_core::harness::{run_family, FamilySpec, RunOptions, SignatureFilter};
use cubic_core::rings::ring_from_form;
use cubic_core::shapes::{hyperbolic_measure, shape_of_ring, ShapeRegion, F2_MEASURE};
use cubic_core::Error;

/// Binary cubic forms, shapes of cubic rings and class group statistics.
#[derive(Parser)]
#[command(name = "cubic", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List GL2(Z)-classes of forms with dmin < disc <= dmax as CSV.
    Enumerate {
        #[arg(long, allow_hyphen_values = true)]
        dmin: i128,
        #[arg(long, allow_hyphen_values = true)]
        dmax: i128,
        #[arg(long, default_value = "any")]
        signature: SignatureFilter,
        /// Keep only maximal rings.
        #[arg(long)]
        maximal: bool,
        /// Local condition `p:TYPE`, e.g. `2:111` or `3:max`; repeatable.
        #[arg(long = "cond")]
        conditions: Vec<LocalCondition>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shape of the ring of each form as a point of the fundamental domain.
    Shape {
        #[command(flatten)]
        input: FormInput,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Class group (or narrow class group) of the maximal ring of a form.
    Classgroup {
        #[arg(long, allow_hyphen_values = true)]
        form: BinaryCubicForm,
        #[arg(long)]
        narrow: bool,
    },
    /// Hyperbolic area of a region file.
    Measure {
        #[arg(long)]
        region: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Run a family spec and print its statistics report as JSON.
    Stats {
        #[arg(long)]
        spec: PathBuf,
        /// Compute class groups for every ring in the family.
        #[arg(long)]
        classdata: bool,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Directory holding the class data cache.
        #[arg(long)]
        cache: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct FormInput {
    #[arg(long, allow_hyphen_values = true)]
    form: Option<BinaryCubicForm>,
    /// File with one form `a,b,c,d` per line.
    #[arg(long = "in")]
    input: Option<PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidSpec(_) | Error::Parse(_) => 2,
        Error::PrecisionExhausted(_)
        | Error::ToleranceNotMet(_)
        | Error::ModulusTooLarge(_)
        | Error::BudgetExceeded
        | Error::SaturationBudgetExceeded
        | Error::RelationDeficit => 3,
        _ => 1,
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn enumerate(
    dmin: i128,
    dmax: i128,
    signature: SignatureFilter,
    maximal: bool,
    conditions: Vec<LocalCondition>,
    out: Option<&Path>,
) -> Result<(), Error> {
    let mut spec = FamilySpec::new(signature, dmin, dmax);
    spec.conditions = conditions;
    spec.validate()?;
    let forms = match spec.effective_window() {
        Some((lo, hi)) => {
            let req = EnumerationRequest {
                conditions: spec.conditions,
                require_maximal: maximal,
                ..EnumerationRequest::new(lo, hi)
            };
            enumerate_forms(&req, EnumerationStrategy::ReducedTraversal)
        }
        None => Vec::new(),
    };
    let mut w = csv::Writer::from_writer(output(out)?);
    w.write_record(["form", "disc", "signature", "maximal"]).map_err(csv_err)?;
    for f in forms {
        let sig = ring_from_form(&f).signature();
        let max = if maximal || is_maximal(&f)? { "1" } else { "0" };
        w.write_record([f.to_string(), f.disc().to_string(), sig.to_string(), max.into()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn read_forms(path: &Path) -> Result<Vec<BinaryCubicForm>, Error> {
    std::fs::read_to_string(path)?
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::parse)
        .collect()
}

fn shape(input: FormInput, out: Option<&Path>) -> Result<(), Error> {
    let forms = match (input.form, input.input) {
        (Some(f), _) => vec![f],
        (None, Some(path)) => read_forms(&path)?,
        (None, None) => unreachable!("clap requires one input"),
    };
    let mut w = csv::Writer::from_writer(output(out)?);
    w.write_record(["form", "disc", "x", "y"]).map_err(csv_err)?;
    for f in forms {
        let p = shape_of_ring(&ring_from_form(&f))?;
        w.write_record([f.to_string(), f.disc().to_string(), p.x.to_string(), p.y.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn describe(g: &AbelianGroupData) -> String {
    if g.divisors.is_empty() {
        return "trivial (order 1)".into();
    }
    let parts: Vec<String> = g.divisors.iter().map(|d| format!("Z/{d}")).collect();
    format!("{} (order {})", parts.join(" x "), g.order())
}

fn classgroup(form: BinaryCubicForm, narrow: bool) -> Result<(), Error> {
    let ring = ring_from_form(&form);
    let (name, g) = if narrow {
        ("narrow class group", narrow_class_group(&ring)?)
    } else {
        ("class group", class_group(&ring)?)
    };
    println!("form {form}, disc {}, {}", form.disc(), ring.signature());
    println!("{name}: {}", describe(&g));
    Ok(())
}

fn measure(region: &Path, tol: f64) -> Result<(), Error> {
    let w: ShapeRegion = std::fs::read_to_string(region)?.parse()?;
    let m = hyperbolic_measure(&w, tol)?;
    println!("measure {m}");
    println!("fraction {}", m / F2_MEASURE);
    Ok(())
}

fn stats(spec: &Path, classdata: bool, workers: usize, cache: Option<PathBuf>, report: Option<&Path>) -> Result<(), Error> {
    let spec = FamilySpec::from_file(spec)?;
    let run = run_family(&spec, &RunOptions { class_data: classdata, workers, cache })?;
    let json = serde_json::to_string_pretty(&run.report).map_err(|e| Error::Io(e.to_string()))?;
    let mut w = output(report)?;
    writeln!(w, "{json}")?;
    w.flush()?;
    eprintln!(
        "{} rings in window, {} in region, {} computed, {} from cache",
        run.n_window, run.report.n, run.computed, run.cache_hits
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Enumerate { dmin, dmax, signature, maximal, conditions, out } => {
            enumerate(dmin, dmax, signature, maximal, conditions, out.as_deref())
        }
        Command::Shape { input, out } => shape(input, out.as_deref()),
        Command::Classgroup { form, narrow } => classgroup(form, narrow),
        Command::Measure { region, tol } => measure(&region, tol),
        Command::Stats { spec, classdata, workers, cache, report } => {
            stats(&spec, classdata, workers, cache, report.as_deref())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
