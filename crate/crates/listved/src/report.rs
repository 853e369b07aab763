//! CSV schemas and the sweep plot.
//!
//! Real values are written with 9 significant digits; emitted files re-parse
//! to identical values. Two schemas exist: simulation rows
//! (`ebno_db,decoder,L,trials,ce_count,p_ce,ci95,asymptote`) and subset
//! minima (`L,min_ved,exact,witness` with the witness as semicolon-joined
//! `eventid@offset`).

use std::fmt;

use crate::listmin::ListSpec;
use crate::sim::{DecoderKind, SimResult};

#[derive(Debug, Clone, PartialEq)]
pub enum ReportError {
    Malformed { line: usize, detail: String },
}

impl fmt::Display for ReportError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReportError::Malformed { line, detail } => {
                write!(f, "csv line {line}: {detail}")
            }
        }
    }
}

impl std::error::Error for ReportError {}

/// 9-significant-digit decimal rendering.
pub fn fmt_g9(x: f64) -> String {
    format!("{x:.8e}")
}

pub const SIM_CSV_HEADER: &str = "ebno_db,decoder,L,trials,ce_count,p_ce,ci95,asymptote";

pub fn format_sim_row(r: &SimResult) -> String {
    let asymptote = r.asymptote.map(fmt_g9).unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{}",
        fmt_g9(r.ebno_db),
        r.decoder,
        r.l_or_b,
        r.trials,
        r.ce_count,
        fmt_g9(r.p_ce),
        fmt_g9(r.ci95),
        asymptote
    )
}

pub fn format_sim_csv(rows: &[SimResult]) -> String {
    let mut out = String::from(SIM_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format_sim_row(r));
        out.push('\n');
    }
    out
}

fn field_err(line: usize, detail: impl Into<String>) -> ReportError {
    ReportError::Malformed {
        line,
        detail: detail.into(),
    }
}

pub fn parse_sim_csv(text: &str) -> Result<Vec<SimResult>, ReportError> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            if line != SIM_CSV_HEADER {
                return Err(field_err(1, format!("expected header {SIM_CSV_HEADER:?}")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(field_err(lineno + 1, format!("expected 8 fields, got {}", fields.len())));
        }
        let parse_f = |s: &str, what: &str| {
            s.parse::<f64>()
                .map_err(|_| field_err(lineno + 1, format!("bad {what} {s:?}")))
        };
        let decoder: DecoderKind = fields[1]
            .parse()
            .map_err(|e: String| field_err(lineno + 1, e))?;
        rows.push(SimResult {
            ebno_db: parse_f(fields[0], "ebno_db")?,
            decoder,
            l_or_b: fields[2]
                .parse()
                .map_err(|_| field_err(lineno + 1, format!("bad L {:?}", fields[2])))?,
            trials: fields[3]
                .parse()
                .map_err(|_| field_err(lineno + 1, format!("bad trials {:?}", fields[3])))?,
            ce_count: fields[4]
                .parse()
                .map_err(|_| field_err(lineno + 1, format!("bad ce_count {:?}", fields[4])))?,
            p_ce: parse_f(fields[5], "p_ce")?,
            ci95: parse_f(fields[6], "ci95")?,
            asymptote: if fields[7].is_empty() {
                None
            } else {
                Some(parse_f(fields[7], "asymptote")?)
            },
        });
    }
    Ok(rows)
}

pub const LIST_CSV_HEADER: &str = "L,min_ved,exact,witness";

pub fn format_list_row(spec: &ListSpec) -> String {
    let witness: Vec<String> = spec
        .witness
        .iter()
        .map(|(event, offset)| format!("{event}@{offset}"))
        .collect();
    format!(
        "{},{},{},{}",
        spec.l,
        fmt_g9(spec.min_ved),
        spec.exact,
        witness.join(";")
    )
}

pub fn format_list_csv(rows: &[ListSpec]) -> String {
    let mut out = String::from(LIST_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format_list_row(r));
        out.push('\n');
    }
    out
}

/// Parsed `L,min_ved,exact,witness` row (search statistics are not
/// serialized).
#[derive(Debug, Clone, PartialEq)]
pub struct ListRow {
    pub l: usize,
    pub min_ved: f64,
    pub exact: bool,
    pub witness: Vec<(usize, usize)>,
}

pub fn parse_list_csv(text: &str) -> Result<Vec<ListRow>, ReportError> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            if line != LIST_CSV_HEADER {
                return Err(field_err(1, format!("expected header {LIST_CSV_HEADER:?}")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(field_err(lineno + 1, format!("expected 4 fields, got {}", fields.len())));
        }
        let l = fields[0]
            .parse()
            .map_err(|_| field_err(lineno + 1, format!("bad L {:?}", fields[0])))?;
        let min_ved = fields[1]
            .parse()
            .map_err(|_| field_err(lineno + 1, format!("bad min_ved {:?}", fields[1])))?;
        let exact = match fields[2] {
            "true" => true,
            "false" => false,
            other => return Err(field_err(lineno + 1, format!("bad exact flag {other:?}"))),
        };
        let mut witness = Vec::new();
        if !fields[3].is_empty() {
            for pair in fields[3].split(';') {
                let (event, offset) = pair
                    .split_once('@')
                    .ok_or_else(|| field_err(lineno + 1, format!("bad witness entry {pair:?}")))?;
                witness.push((
                    event.parse().map_err(|_| {
                        field_err(lineno + 1, format!("bad witness event {event:?}"))
                    })?,
                    offset.parse().map_err(|_| {
                        field_err(lineno + 1, format!("bad witness offset {offset:?}"))
                    })?,
                ));
            }
        }
        rows.push(ListRow {
            l,
            min_ved,
            exact,
            witness,
        });
    }
    Ok(rows)
}

/// Self-contained SVG scatter of `p_ce` against E_b/N_0 with the asymptote
/// overlay, log-scale y. Zero-count points cannot appear on a log axis and
/// are left out of the scatter.
pub fn render_sweep_svg(rows: &[SimResult], title: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const ML: f64 = 70.0;
    const MR: f64 = 20.0;
    const MT: f64 = 40.0;
    const MB: f64 = 50.0;

    let xs: Vec<f64> = rows.iter().map(|r| r.ebno_db).collect();
    let (xmin, xmax) = match (
        xs.iter().cloned().fold(f64::INFINITY, f64::min),
        xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    ) {
        (lo, hi) if lo.is_finite() && hi > lo => (lo, hi),
        (lo, _) if lo.is_finite() => (lo - 0.5, lo + 0.5),
        _ => (0.0, 1.0),
    };
    let mut positives: Vec<f64> = Vec::new();
    for r in rows {
        if r.p_ce > 0.0 {
            positives.push(r.p_ce);
        }
        if let Some(a) = r.asymptote {
            if a > 0.0 {
                positives.push(a);
            }
        }
    }
    let (ymin_log, ymax_log) = if positives.is_empty() {
        (-6.0, 0.0)
    } else {
        let lo = positives.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = positives.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        ((lo.log10() - 0.3).floor(), (hi.log10() + 0.3).ceil().min(0.0))
    };
    let (ymin_log, ymax_log) = if ymax_log > ymin_log {
        (ymin_log, ymax_log)
    } else {
        (ymin_log - 1.0, ymax_log)
    };

    let x_of = |x: f64| ML + (x - xmin) / (xmax - xmin) * (W - ML - MR);
    let y_of = |p: f64| {
        let t = (p.log10() - ymin_log) / (ymax_log - ymin_log);
        H - MB - t * (H - MT - MB)
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        W / 2.0,
        xml_escape(title)
    ));
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n\
         <line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{0}\" stroke=\"black\"/>\n",
        H - MB,
        W - MR
    ));
    // Y decade ticks and gridlines.
    let mut k = ymin_log.ceil() as i64;
    while k as f64 <= ymax_log {
        let y = y_of(10f64.powi(k as i32));
        svg.push_str(&format!(
            "<line x1=\"{ML}\" y1=\"{y:.1}\" x2=\"{}\" y2=\"{y:.1}\" stroke=\"#ddd\"/>\n\
             <text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">1e{k}</text>\n",
            W - MR,
            ML - 6.0,
            y + 4.0
        ));
        k += 1;
    }
    // X ticks at each sweep point.
    for r in rows {
        let x = x_of(r.ebno_db);
        svg.push_str(&format!(
            "<line x1=\"{x:.1}\" y1=\"{0}\" x2=\"{x:.1}\" y2=\"{1}\" stroke=\"black\"/>\n\
             <text x=\"{x:.1}\" y=\"{2}\" text-anchor=\"middle\">{3}</text>\n",
            H - MB,
            H - MB + 5.0,
            H - MB + 20.0,
            r.ebno_db
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">Eb/N0 (dB)</text>\n\
         <text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">P_CE</text>\n",
        (ML + W - MR) / 2.0,
        H - 12.0,
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0
    ));
    // Asymptote overlay.
    let overlay: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.asymptote.filter(|&a| a > 0.0).map(|a| (r.ebno_db, a)))
        .collect();
    if overlay.len() >= 2 {
        let pts: Vec<String> = overlay
            .iter()
            .map(|&(x, a)| format!("{:.1},{:.1}", x_of(x), y_of(a)))
            .collect();
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"firebrick\" \
             stroke-dasharray=\"6 3\" stroke-width=\"1.5\"/>\n",
            pts.join(" ")
        ));
    }
    // Measured points with error bars.
    for r in rows.iter().filter(|r| r.p_ce > 0.0) {
        let x = x_of(r.ebno_db);
        let y = y_of(r.p_ce);
        let hi = r.p_ce + r.ci95;
        let lo = (r.p_ce - r.ci95).max(10f64.powf(ymin_log));
        svg.push_str(&format!(
            "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"steelblue\"/>\n\
             <circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"3.5\" fill=\"steelblue\"/>\n",
            y_of(hi),
            y_of(lo)
        ));
    }
    // Legend.
    svg.push_str(&format!(
        "<circle cx=\"{0}\" cy=\"{MT}\" r=\"3.5\" fill=\"steelblue\"/>\n\
         <text x=\"{1}\" y=\"{2}\">simulated</text>\n\
         <line x1=\"{3}\" y1=\"{MT}\" x2=\"{0}\" y2=\"{MT}\" stroke=\"firebrick\" \
         stroke-dasharray=\"6 3\"/>\n",
        W - MR - 110.0,
        W - MR - 100.0,
        MT + 4.0,
        W - MR - 130.0
    ));
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
