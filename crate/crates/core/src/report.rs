//! Measure evaluation against closed forms, grid sweeps and their CSV form.
//!
//! CSV schema: one column per swept input, then `value`, `closed_form`,
//! `abs_diff`. Absent closed forms leave the last two fields empty; points
//! where the spectrum is degenerate carry `NaN` in `value` and `abs_diff`.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::biortho::{BiorthoError, SystemParams};
use crate::config::SiteSource;
use crate::constructor::{lookup, ConstructError};
use crate::entanglement::{
    average_entropy, average_entropy_closed_form, concurrence, concurrence_case_b,
    concurrence_closed_form, embed, normalize, EntanglementError, EntropyFormula,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReportError {
    #[error(transparent)]
    Entanglement(#[from] EntanglementError),
    #[error("{name} has {expected} sites but {got} parameter sets were given")]
    SiteCount { name: String, expected: usize, got: usize },
    #[error("invalid sweep: {0}")]
    BadSweep(String),
    #[error("unknown {kind} {value:?}")]
    Unknown { kind: &'static str, value: String },
}

impl From<ConstructError> for ReportError {
    fn from(e: ConstructError) -> Self {
        ReportError::Entanglement(e.into())
    }
}

impl From<BiorthoError> for ReportError {
    fn from(e: BiorthoError) -> Self {
        ReportError::Entanglement(e.into())
    }
}

impl ReportError {
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            ReportError::Entanglement(EntanglementError::Basis(BiorthoError::DegenerateSpectrum { .. }))
        )
    }

    pub fn is_unknown_name(&self) -> bool {
        matches!(
            self,
            ReportError::Entanglement(EntanglementError::Construct(ConstructError::UnknownName(_)))
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Concurrence,
    AvgEntropy,
}

impl FromStr for Measure {
    type Err = ReportError;
    fn from_str(s: &str) -> Result<Self, ReportError> {
        match s {
            "concurrence" => Ok(Measure::Concurrence),
            "avg_entropy" | "avg-entropy" => Ok(Measure::AvgEntropy),
            _ => Err(ReportError::Unknown { kind: "measure", value: s.to_string() }),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Concurrence => "concurrence",
            Measure::AvgEntropy => "avg_entropy",
        })
    }
}

/// Parameters for every site of a state.
#[derive(Debug, Clone, PartialEq)]
pub enum Parameters {
    /// One angle per site.
    Angles(Vec<f64>),
    /// The atom–field Hamiltonian with the same `(s, δ)` on every site.
    AtomField { s: f64, delta: f64 },
    /// Arbitrary per-site sources, e.g. from a config file.
    Sites(Vec<SiteSource>),
}

impl Parameters {
    fn sources(&self, count: usize) -> Vec<SiteSource> {
        match self {
            Parameters::Angles(a) => a.iter().map(|&x| SiteSource::Alpha(x)).collect(),
            Parameters::AtomField { s, delta } => {
                vec![SiteSource::System(SystemParams::atom_field(*s, *delta)); count]
            }
            Parameters::Sites(v) => v.clone(),
        }
    }

    fn inputs(&self) -> Vec<(String, f64)> {
        match self {
            Parameters::Angles(a) => {
                a.iter().enumerate().map(|(i, &x)| (format!("alpha{}", i + 1), x)).collect()
            }
            Parameters::AtomField { s, delta } => vec![("s".into(), *s), ("delta".into(), *delta)],
            Parameters::Sites(v) => v
                .iter()
                .enumerate()
                .flat_map(|(i, src)| match src {
                    SiteSource::Alpha(a) => vec![(format!("alpha{}", i + 1), *a)],
                    SiteSource::System(p) => vec![
                        (format!("r{}", i + 1), p.r),
                        (format!("s{}", i + 1), p.s),
                        (format!("t{}", i + 1), p.t),
                        (format!("beta{}", i + 1), p.beta),
                    ],
                })
                .collect(),
        }
    }
}

/// One evaluated point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub inputs: Vec<(String, f64)>,
    pub value: f64,
    pub closed_form: Option<f64>,
    pub abs_diff: Option<f64>,
}

impl ReportRow {
    pub fn new(inputs: Vec<(String, f64)>, value: f64, closed_form: Option<f64>) -> Self {
        let abs_diff = closed_form.map(|c| (value - c).abs());
        ReportRow { inputs, value, closed_form, abs_diff }
    }
}

fn closed_form(name: &str, measure: Measure, params: &Parameters, sources: &[SiteSource]) -> Option<f64> {
    if !sources.iter().all(SiteSource::is_balanced) {
        return None;
    }
    let alphas: Vec<f64> = sources.iter().map(|s| s.alpha()).collect::<Result<_, _>>().ok()?;
    let canonical = lookup(name).ok()?.name.as_str();
    match measure {
        Measure::Concurrence => {
            if let Parameters::AtomField { s, delta } = params {
                if matches!(canonical, "B2-" | "B3-") {
                    return concurrence_case_b(*s, *delta).ok();
                }
            }
            concurrence_closed_form(canonical, alphas[0], alphas[1]).ok()
        }
        Measure::AvgEntropy => EntropyFormula::for_name(canonical)
            .map(|f| average_entropy_closed_form(f, alphas[0], alphas[1], alphas[2])),
    }
}

/// Evaluates `measure` on the normalized catalog state `name`.
pub fn evaluate(name: &str, params: &Parameters, measure: Measure) -> Result<ReportRow, ReportError> {
    let entry = lookup(name)?;
    let n = entry.spec.site_count();
    let sources = params.sources(n);
    if sources.len() != n {
        return Err(ReportError::SiteCount { name: name.to_string(), expected: n, got: sources.len() });
    }
    let bases = sources.iter().map(SiteSource::basis).collect::<Result<Vec<_>, _>>()?;
    let state = normalize(&embed(&entry.state, &bases)?)?;
    let value = match measure {
        Measure::Concurrence => concurrence(&state)?,
        Measure::AvgEntropy => average_entropy(&state, 1)?,
    };
    let cf = closed_form(name, measure, params, &sources);
    Ok(ReportRow::new(params.inputs(), value, cf))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    Alpha,
    Alpha1,
    Alpha2,
    Alpha3,
    S,
    Delta,
}

impl SweepVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::Alpha => "alpha",
            SweepVariable::Alpha1 => "alpha1",
            SweepVariable::Alpha2 => "alpha2",
            SweepVariable::Alpha3 => "alpha3",
            SweepVariable::S => "s",
            SweepVariable::Delta => "delta",
        }
    }

    fn is_atom_field(self) -> bool {
        matches!(self, SweepVariable::S | SweepVariable::Delta)
    }
}

impl FromStr for SweepVariable {
    type Err = ReportError;
    fn from_str(s: &str) -> Result<Self, ReportError> {
        Ok(match s {
            "alpha" => SweepVariable::Alpha,
            "alpha1" => SweepVariable::Alpha1,
            "alpha2" => SweepVariable::Alpha2,
            "alpha3" => SweepVariable::Alpha3,
            "s" => SweepVariable::S,
            "delta" => SweepVariable::Delta,
            _ => return Err(ReportError::Unknown { kind: "sweep variable", value: s.to_string() }),
        })
    }
}

/// A closed interval sampled at `steps` evenly spaced points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub variable: SweepVariable,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(variable: SweepVariable, lo: f64, hi: f64, steps: usize) -> Result<Self, ReportError> {
        if steps < 2 {
            return Err(ReportError::BadSweep(format!("steps must be at least 2, got {steps}")));
        }
        if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
            return Err(ReportError::BadSweep(format!("range [{lo}, {hi}] is empty")));
        }
        Ok(Axis { variable, lo, hi, steps })
    }

    pub fn points(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| if i + 1 == self.steps { self.hi } else { self.lo + (self.hi - self.lo) * i as f64 / last })
            .collect()
    }
}

/// A one- or two-axis sweep; the first axis varies slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub target: String,
    pub measure: Measure,
    pub axes: Vec<Axis>,
    /// Fixed angles for unswept sites.
    pub base_alphas: [f64; 3],
    /// Fixed `(s, δ)` for unswept atom–field inputs.
    pub base_s: f64,
    pub base_delta: f64,
}

impl SweepSpec {
    pub fn new(target: &str, measure: Measure, axes: Vec<Axis>) -> Result<Self, ReportError> {
        lookup(target)?;
        if axes.is_empty() || axes.len() > 2 {
            return Err(ReportError::BadSweep("one or two axes required".into()));
        }
        let atom = axes.iter().filter(|a| a.variable.is_atom_field()).count();
        if atom != 0 && atom != axes.len() {
            return Err(ReportError::BadSweep("cannot mix angle and (s, delta) axes".into()));
        }
        if axes.len() == 2 && axes[0].variable == axes[1].variable {
            return Err(ReportError::BadSweep("repeated axis".into()));
        }
        Ok(SweepSpec {
            target: target.to_string(),
            measure,
            axes,
            base_alphas: [0.0; 3],
            base_s: 1.0,
            base_delta: 0.0,
        })
    }

    fn is_atom_field(&self) -> bool {
        self.axes[0].variable.is_atom_field()
    }

    fn grid(&self) -> Vec<Vec<f64>> {
        let mut grid = vec![vec![]];
        for axis in &self.axes {
            let pts = axis.points();
            grid = grid
                .into_iter()
                .flat_map(|prefix| {
                    pts.iter().map(move |&p| {
                        let mut v = prefix.clone();
                        v.push(p);
                        v
                    })
                })
                .collect();
        }
        grid
    }

    fn parameters(&self, point: &[f64], sites: usize) -> Parameters {
        if self.is_atom_field() {
            let (mut s, mut delta) = (self.base_s, self.base_delta);
            for (axis, &v) in self.axes.iter().zip(point) {
                match axis.variable {
                    SweepVariable::S => s = v,
                    _ => delta = v,
                }
            }
            return Parameters::AtomField { s, delta };
        }
        let mut alphas = self.base_alphas;
        for (axis, &v) in self.axes.iter().zip(point) {
            match axis.variable {
                SweepVariable::Alpha => alphas = [v; 3],
                SweepVariable::Alpha1 => alphas[0] = v,
                SweepVariable::Alpha2 => alphas[1] = v,
                _ => alphas[2] = v,
            }
        }
        Parameters::Angles(alphas[..sites].to_vec())
    }

    /// Evaluates every grid point in parallel; rows come back in grid order.
    pub fn run(&self) -> Result<Vec<ReportRow>, ReportError> {
        let sites = lookup(&self.target)?.spec.site_count();
        self.grid()
            .par_iter()
            .map(|point| {
                let inputs: Vec<(String, f64)> = self
                    .axes
                    .iter()
                    .zip(point)
                    .map(|(a, &v)| (a.variable.as_str().to_string(), v))
                    .collect();
                match evaluate(&self.target, &self.parameters(point, sites), self.measure) {
                    Ok(row) => Ok(ReportRow { inputs, ..row }),
                    Err(e) if e.is_degenerate() => Ok(ReportRow::new(inputs, f64::NAN, None)),
                    Err(e) => Err(e),
                }
            })
            .collect()
    }
}

fn field(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes rows as CSV; the header is taken from the first row's inputs.
pub fn write_csv<W: Write>(mut out: W, rows: &[ReportRow]) -> io::Result<()> {
    let header: Vec<&str> = rows
        .first()
        .map(|r| r.inputs.iter().map(|(k, _)| k.as_str()).collect())
        .unwrap_or_default();
    let mut line = header.join(",");
    if !line.is_empty() {
        line.push(',');
    }
    writeln!(out, "{line}value,closed_form,abs_diff")?;
    for r in rows {
        let cells: Vec<String> = r
            .inputs
            .iter()
            .map(|(_, v)| v.to_string())
            .chain([r.value.to_string(), field(r.closed_form), field(r.abs_diff)])
            .collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn measure_examples() {
        let row = evaluate("B2-", &Parameters::Angles(vec![FRAC_PI_4, FRAC_PI_4]), Measure::Concurrence).unwrap();
        assert!((row.value - 1.0 / 3.0).abs() < 1e-12);
        assert!(row.abs_diff.unwrap() <= 1e-10);

        let row = evaluate("G1+", &Parameters::Angles(vec![0.0; 3]), Measure::AvgEntropy).unwrap();
        assert!((row.value - 1.0).abs() < 1e-12);

        let row = evaluate("B2-", &Parameters::AtomField { s: 1.0, delta: 0.0 }, Measure::Concurrence).unwrap();
        assert!((row.value - 1.0).abs() < 1e-12);
        assert_eq!(row.closed_form, Some(1.0));
        assert_eq!(row.inputs, vec![("s".to_string(), 1.0), ("delta".to_string(), 0.0)]);
    }

    #[test]
    fn measure_errors() {
        let e = evaluate("B2-", &Parameters::Angles(vec![PI / 2.0, 0.0]), Measure::Concurrence).unwrap_err();
        assert!(e.is_degenerate());
        let e = evaluate("Bx", &Parameters::Angles(vec![0.0, 0.0]), Measure::Concurrence).unwrap_err();
        assert!(e.is_unknown_name());
        assert!(matches!(
            evaluate("B2-", &Parameters::Angles(vec![0.0]), Measure::Concurrence),
            Err(ReportError::SiteCount { .. })
        ));
        assert!(evaluate("G1+", &Parameters::Angles(vec![0.0; 3]), Measure::Concurrence).is_err());
    }

    #[test]
    fn sweep_grid_order_and_csv() {
        let axes = vec![
            Axis::new(SweepVariable::S, 1.0, 2.0, 3).unwrap(),
            Axis::new(SweepVariable::Delta, -1.0, 1.0, 2).unwrap(),
        ];
        let rows = SweepSpec::new("B2-", Measure::Concurrence, axes).unwrap().run().unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[1].inputs, vec![("s".into(), 1.0), ("delta".into(), 1.0)]);
        assert_eq!(rows[2].inputs[0].1, 1.5);
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("s,delta,value,closed_form,abs_diff\n1,-1,"));
        assert_eq!(text.lines().count(), 7);
    }

    #[test]
    fn sweep_marks_degenerate_points() {
        let axes = vec![Axis::new(SweepVariable::Alpha, 0.0, PI, 3).unwrap()];
        let rows = SweepSpec::new("B2-", Measure::Concurrence, axes).unwrap().run().unwrap();
        assert!(rows[1].value.is_nan());
        assert_eq!(rows[1].closed_form, None);
        assert!((rows[2].value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_validation() {
        assert!(Axis::new(SweepVariable::S, 1.0, 2.0, 1).is_err());
        assert!(Axis::new(SweepVariable::S, 2.0, 1.0, 5).is_err());
        let a = Axis::new(SweepVariable::S, 1.0, 2.0, 2).unwrap();
        let b = Axis::new(SweepVariable::Alpha, 1.0, 2.0, 2).unwrap();
        assert!(SweepSpec::new("B2-", Measure::Concurrence, vec![a, b]).is_err());
        assert!(SweepSpec::new("B2-", Measure::Concurrence, vec![a, a]).is_err());
        assert!(SweepSpec::new("nope", Measure::Concurrence, vec![a]).is_err());
        assert!("entropy".parse::<Measure>().is_err());
    }
}
