//! Machine-readable output: JSON envelopes and fixed-header CSV tables.
//!
//! JSON floats are written with 17 significant digits so every value
//! round-trips exactly. Each envelope carries a provenance block naming the
//! source of its numbers and the grid they were computed on.

use std::io::{self, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dynamics::OrbitTrace;
use crate::error::{Error, Result};
use crate::graph::{GraphFunction, GridSpec};
use crate::scalar::Real;
use crate::slope::SlopeResult;
use crate::spectral::SpectrumSummary;
use crate::verdict::{CrossCheck, StabilityReport};

/// Header of the trace CSV.
pub const TRACE_HEADER: [&str; 4] = ["t", "mass", "energy", "d"];
/// Header of the profile CSV: one row per edge and node. `value` is the real
/// part, `imag` the imaginary part (zero for stationary profiles).
pub const PROFILE_HEADER: [&str; 4] = ["edge", "x", "value", "imag"];
/// Header of the slope CSV: one row per frequency.
pub const SLOPE_HEADER: [&str; 4] = ["omega", "J", "J_tilde", "p_omega"];
/// Header of the spectrum CSV: one row per computed eigenvalue.
pub const SPECTRUM_HEADER: [&str; 8] =
    ["operator", "sector", "n_neg", "kernel_dim", "tau", "ambiguous", "index", "eigenvalue"];
/// Header of the stability CSV, shared by single verdicts and sweeps.
pub const STABILITY_HEADER: [&str; 18] = [
    "N",
    "k",
    "alpha",
    "omega",
    "p",
    "family",
    "sector",
    "n_l1",
    "n_l2",
    "p_omega",
    "omega_critical",
    "verdict",
    "space",
    "analytic_verdict",
    "source",
    "caveat",
    "status",
    "message",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Parameter(format!("unknown format {s:?} (csv or json)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMeta<T> {
    pub length: T,
    pub intervals: usize,
    pub spacing: T,
}

impl<T: Real> From<&GridSpec<T>> for GridMeta<T> {
    fn from(g: &GridSpec<T>) -> Self {
        Self { length: g.length(), intervals: g.intervals(), spacing: g.spacing() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    Numerical,
    Analytic,
    /// Finite-horizon simulation: an illustration, not a theorem check.
    Empirical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance<T> {
    pub origin: Origin,
    /// `None` for closed-form results.
    pub grid: Option<GridMeta<T>>,
    pub version: String,
}

impl<T: Real> Provenance<T> {
    pub fn new(origin: Origin, grid: Option<&GridSpec<T>>) -> Self {
        Self { origin, grid: grid.map(GridMeta::from), version: env!("CARGO_PKG_VERSION").to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "kebab-case")]
pub enum Payload<T> {
    Stability(StabilityReport<T>),
    CrossCheck(CrossCheck<T>),
    Spectrum(Vec<SpectrumSummary<T>>),
    Trace(OrbitTrace<T>),
    Slope(Vec<SlopeResult<T>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    pub provenance: Provenance<T>,
    #[serde(flatten)]
    pub payload: Payload<T>,
}

/// Formatter that prints floats with 17 significant digits.
struct Digits17<'a>(serde_json::ser::PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                self.0.$name(w $(, $arg)*)
            }
        )*
    };
}

impl serde_json::ser::Formatter for Digits17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        write!(w, "{:.16e}", value as f64)
    }

    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        begin_object_value(),
        end_object_value(),
    );
}

/// Pretty JSON with 17-significant-digit floats and a trailing newline.
pub fn to_json<S: Serialize>(value: &S) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17(serde_json::ser::PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(|e| Error::Io(e.to_string()))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Io(e.to_string()))
}

/// 17 significant digits, as used in CSV cells.
pub fn fmt17<T: Real>(x: T) -> String {
    format!("{:.16e}", x.to_f64_lossy())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

pub fn write_trace_csv<T: Real, W: Write>(trace: &OrbitTrace<T>, w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(TRACE_HEADER).map_err(csv_err)?;
    for i in 0..trace.len() {
        out.write_record([
            fmt17(trace.times[i]),
            fmt17(trace.mass[i]),
            fmt17(trace.energy[i]),
            fmt17(trace.distance[i]),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_profile_csv<T: Real, W: Write>(f: &GraphFunction<T>, w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(PROFILE_HEADER).map_err(csv_err)?;
    let grid = f.grid();
    for j in 0..f.n_edges() {
        for i in 0..=grid.intervals() {
            let z = f.at(j, i);
            out.write_record([j.to_string(), fmt17(grid.node(i)), fmt17(z.re), fmt17(z.im)])
                .map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_slope_csv<T: Real, W: Write>(rows: &[SlopeResult<T>], w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(SLOPE_HEADER).map_err(csv_err)?;
    for r in rows {
        out.write_record([fmt17(r.omega), fmt17(r.j), fmt17(r.j_tilde), r.p_omega.to_string()])
            .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_spectrum_csv<T: Real, W: Write>(summaries: &[SpectrumSummary<T>], w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(SPECTRUM_HEADER).map_err(csv_err)?;
    for s in summaries {
        for (i, &v) in s.lowest.iter().enumerate() {
            out.write_record([
                s.operator.to_string(),
                s.sector.to_string(),
                s.n_neg.to_string(),
                s.kernel_dim.to_string(),
                fmt17(s.tau),
                s.ambiguous.to_string(),
                i.to_string(),
                fmt17(v),
            ])
            .map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// One row of the stability table; `result` is either a cross-check or the
/// error that stopped the point.
pub fn stability_row<T: Real>(spec_cells: [String; 6], result: &std::result::Result<CrossCheck<T>, Error>) -> Vec<String> {
    let mut row: Vec<String> = spec_cells.into();
    match result {
        Ok(c) => {
            let n = &c.numerical;
            row.extend([
                n.sector.to_string(),
                n.n_l1.to_string(),
                n.n_l2.to_string(),
                n.p_omega.to_string(),
                n.omega_critical.map(fmt17).unwrap_or_default(),
                n.verdict.to_string(),
                n.space.to_string(),
                c.analytic.verdict.to_string(),
                c.source.to_string(),
                n.low_power_caveat.to_string(),
                "ok".into(),
                n.reason.clone().unwrap_or_default(),
            ]);
        }
        Err(e) => {
            row.extend(std::iter::repeat_n(String::new(), 10));
            row.push(if e.is_validation() { "invalid" } else { "failed" }.into());
            row.push(e.to_string());
        }
    }
    row
}

pub fn write_stability_csv<W: Write>(rows: &[Vec<String>], w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(STABILITY_HEADER).map_err(csv_err)?;
    for r in rows {
        out.write_record(r).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Bytes of `report` as JSON, or as the CSV table of its payload.
pub fn render_report<T: Real + Serialize>(report: &Report<T>, format: Format) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        Format::Json => buf.extend(to_json(report)?.into_bytes()),
        Format::Csv => match &report.payload {
            Payload::Trace(t) => write_trace_csv(t, &mut buf)?,
            Payload::Spectrum(s) => write_spectrum_csv(s, &mut buf)?,
            Payload::Slope(s) => write_slope_csv(s, &mut buf)?,
            Payload::CrossCheck(c) => {
                let row = stability_row(spec_cells(&c.numerical.spec), &Ok(c.clone()));
                write_stability_csv(&[row], &mut buf)?
            }
            Payload::Stability(_) => {
                return Err(Error::Parameter("this report has no CSV form; use json".into()))
            }
        },
    }
    Ok(buf)
}

/// Writes [`render_report`] output to `path`.
pub fn emit_report<T: Real + Serialize>(report: &Report<T>, format: Format, path: &Path) -> Result<()> {
    let buf = render_report(report, format)?;
    std::fs::write(path, buf).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// `N, k, alpha, omega, p, family` cells of a stability row.
pub fn spec_cells<T: Real>(spec: &crate::profiles::ProfileSpec<T>) -> [String; 6] {
    let k = match spec.family {
        crate::profiles::ProfileFamily::AttractiveDelta { k } => k.to_string(),
        _ => String::new(),
    };
    [
        spec.n_edges.to_string(),
        k,
        fmt17(spec.alpha),
        fmt17(spec.omega),
        fmt17(spec.p),
        spec.family.name().to_string(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::ProfileSpec;
    use crate::verdict::classify_analytic;

    #[test]
    fn floats_carry_seventeen_digits() {
        let s = to_json(&vec![0.1_f64, 1.0 / 3.0]).unwrap();
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("3.3333333333333331e-1"), "{s}");
        let back: Vec<f64> = from_json(&s).unwrap();
        assert_eq!(back, vec![0.1, 1.0 / 3.0]);
        assert_eq!(fmt17(2.5_f64), "2.5000000000000000e0");
    }

    #[test]
    fn analytic_report_round_trips() {
        let spec = ProfileSpec::attractive(3, 1, -1.0, 4.0, 3.0).unwrap();
        let r = Report {
            provenance: Provenance::new(Origin::Analytic, None),
            payload: Payload::Stability(classify_analytic(&spec).unwrap()),
        };
        let text = to_json(&r).unwrap();
        assert_eq!(from_json::<Report<f64>>(&text).unwrap(), r);
        assert_eq!(to_json(&r).unwrap(), text);
    }

    #[test]
    fn trace_csv_header() {
        let t = OrbitTrace { times: vec![0.0, 0.5], mass: vec![1.0, 1.0], energy: vec![-0.5, -0.5], distance: vec![0.0, 1e-3] };
        let mut buf = Vec::new();
        write_trace_csv(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,mass,energy,d"));
        assert_eq!(lines.count(), 2);
    }

    #[test]
    fn format_parsing() {
        assert_eq!("csv".parse::<Format>().unwrap(), Format::Csv);
        assert!("xml".parse::<Format>().is_err());
    }
}
