use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Deserializer};

use crate::error::{Error, Result};
use crate::sim::{MetricsSummary, SimRecord, SimTrace};

pub const TRACE_HEADER: [&str; 25] = [
    "t",
    "xP",
    "yP",
    "zP",
    "xT",
    "yT",
    "zT",
    "r",
    "theta",
    "psi",
    "VP",
    "gammaP",
    "chiP",
    "eps",
    "z",
    "alpha",
    "U",
    "a_r",
    "a_gamma",
    "a_chi",
    "Delta",
    "V1",
    "V2",
    "in_barrier",
    "saturated",
];

/// One trace row, in header order.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    #[serde(rename = "xP")]
    pub x_p: f64,
    #[serde(rename = "yP")]
    pub y_p: f64,
    #[serde(rename = "zP")]
    pub z_p: f64,
    #[serde(rename = "xT")]
    pub x_t: f64,
    #[serde(rename = "yT")]
    pub y_t: f64,
    #[serde(rename = "zT")]
    pub z_t: f64,
    pub r: f64,
    pub theta: f64,
    pub psi: f64,
    #[serde(rename = "VP")]
    pub speed_p: f64,
    #[serde(rename = "gammaP")]
    pub gamma_p: f64,
    #[serde(rename = "chiP")]
    pub chi_p: f64,
    pub eps: f64,
    pub z: f64,
    pub alpha: f64,
    #[serde(rename = "U")]
    pub u: f64,
    pub a_r: f64,
    pub a_gamma: f64,
    pub a_chi: f64,
    #[serde(rename = "Delta")]
    pub delta: f64,
    #[serde(rename = "V1")]
    pub v1: f64,
    #[serde(rename = "V2")]
    pub v2: f64,
    #[serde(deserialize_with = "flag")]
    pub in_barrier: bool,
    #[serde(deserialize_with = "flag")]
    pub saturated: bool,
}

fn flag<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<bool, D::Error> {
    match u8::deserialize(d)? {
        0 => Ok(false),
        1 => Ok(true),
        n => Err(serde::de::Error::custom(format!(
            "flag must be 0 or 1, got {n}"
        ))),
    }
}

impl From<&SimRecord> for TraceRow {
    fn from(rec: &SimRecord) -> Self {
        let (p, tg) = (&rec.inertial.pos_p, &rec.inertial.pos_t);
        let d = &rec.command.diag;
        Self {
            t: rec.t,
            x_p: p.x,
            y_p: p.y,
            z_p: p.z,
            x_t: tg.x,
            y_t: tg.y,
            z_t: tg.z,
            r: rec.state.r,
            theta: rec.state.theta,
            psi: rec.state.psi,
            speed_p: rec.state.pursuer.speed,
            gamma_p: rec.state.pursuer.gamma,
            chi_p: rec.state.pursuer.chi,
            eps: d.epsilon,
            z: d.z,
            alpha: d.alpha,
            u: d.u,
            a_r: rec.command.a_r,
            a_gamma: rec.command.a_gamma,
            a_chi: rec.command.a_chi,
            delta: rec.delta,
            v1: d.v1,
            v2: d.v2,
            in_barrier: rec.flags.in_barrier,
            saturated: rec.flags.saturated,
        }
    }
}

impl TraceRow {
    fn fields(&self) -> [String; 25] {
        let floats = [
            self.t,
            self.x_p,
            self.y_p,
            self.z_p,
            self.x_t,
            self.y_t,
            self.z_t,
            self.r,
            self.theta,
            self.psi,
            self.speed_p,
            self.gamma_p,
            self.chi_p,
            self.eps,
            self.z,
            self.alpha,
            self.u,
            self.a_r,
            self.a_gamma,
            self.a_chi,
            self.delta,
            self.v1,
            self.v2,
        ];
        let mut out: [String; 25] = Default::default();
        for (slot, x) in out.iter_mut().zip(floats) {
            *slot = format_float(x);
        }
        out[23] = (self.in_barrier as u8).to_string();
        out[24] = (self.saturated as u8).to_string();
        out
    }
}

/// Formats with 9 significant digits, like C's `%.9g`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let fixed = format!("{:.*}", (8 - exp) as usize, x);
        trim_zeros(&fixed).to_owned()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_owned(),
        source,
    }
}

/// Writes the trace CSV. An empty trace gives a header-only file.
pub fn write_trace(trace: &SimTrace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(TRACE_HEADER).map_err(csv_err(path))?;
    for rec in &trace.records {
        w.write_record(TraceRow::from(rec).fields())
            .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<Vec<TraceRow>> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = rdr.headers().map_err(csv_err(path))?;
    if header.iter().ne(TRACE_HEADER) {
        return Err(Error::Parse {
            context: path.display().to_string(),
            message: format!("unexpected trace header {:?}", header),
        });
    }
    rdr.deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_err(path))
}

/// Writes the metrics as a flat JSON object of numbers.
pub fn write_metrics(metrics: &MetricsSummary, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let json = serde_json::to_string_pretty(&metrics.to_map())
        .map_err(|e| Error::config(e.to_string()))?;
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    writeln!(f, "{json}").map_err(|e| Error::io(path, e))
}
