//! File formats: links and segments CSV, vehicle config, observed-routes JSON.
//!
//! Links CSV columns are `from,to,length_mi,avg_speed_mph,mode` with mode one
//! of `low`, `medium`, `high`. Segments CSV columns are
//! `link_from,link_to,seq,length_mi,avg_speed_mph`. Both need the header row.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path as FsPath;

use crate::energy::VehicleEnergyParams;
use crate::error::{Error, Result};
use crate::graph::{Link, NetworkGraph, NodeId, TrafficMode};
use crate::preprocess::SegmentRecord;
use crate::routing::OdRouteDistribution;

pub const LINKS_HEADER: [&str; 5] = ["from", "to", "length_mi", "avg_speed_mph", "mode"];
pub const SEGMENTS_HEADER: [&str; 5] = ["link_from", "link_to", "seq", "length_mi", "avg_speed_mph"];

fn parse_err(file: &str, line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        file: file.to_string(),
        line,
        reason: reason.into(),
    }
}

/// Reads a headed CSV, checking the header and returning each data row with
/// its 1-based line number.
fn read_rows<R: Read>(input: R, name: &str, header: &[&str]) -> Result<Vec<(usize, Vec<String>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let found: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if found != header {
        return Err(parse_err(
            name,
            1,
            format!("expected header {:?}, found {:?}", header.join(","), found.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(name, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        rows.push((line, record.iter().map(str::to_string).collect()));
    }
    Ok(rows)
}

fn field<T: std::str::FromStr>(name: &str, line: usize, column: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| parse_err(name, line, format!("invalid {column} value {raw:?}")))
}

pub fn parse_links_csv<R: Read>(input: R, name: &str) -> Result<Vec<Link>> {
    read_rows(input, name, &LINKS_HEADER)?
        .into_iter()
        .map(|(line, row)| {
            let mode: TrafficMode = row[4]
                .parse()
                .map_err(|e: String| parse_err(name, line, e))?;
            Link::new(
                NodeId(field(name, line, "from", &row[0])?),
                NodeId(field(name, line, "to", &row[1])?),
                field(name, line, "length_mi", &row[2])?,
                field(name, line, "avg_speed_mph", &row[3])?,
                mode,
            )
            .map_err(|e| parse_err(name, line, e.to_string()))
        })
        .collect()
}

pub fn read_links_csv(path: &FsPath) -> Result<NetworkGraph> {
    let name = path.display().to_string();
    let links = parse_links_csv(File::open(path)?, &name)?;
    NetworkGraph::new(links)
}

/// Writes the links in graph order. Floats use the shortest representation
/// that parses back to the same value.
pub fn write_links_csv<W: Write>(graph: &NetworkGraph, out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(LINKS_HEADER)?;
    for l in graph.links() {
        writer.write_record([
            l.from.to_string(),
            l.to.to_string(),
            l.length_mi.to_string(),
            l.avg_speed_mph.to_string(),
            l.mode.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn parse_segments_csv<R: Read>(input: R, name: &str) -> Result<Vec<SegmentRecord>> {
    read_rows(input, name, &SEGMENTS_HEADER)?
        .into_iter()
        .map(|(line, row)| {
            Ok(SegmentRecord {
                link_from: NodeId(field(name, line, "link_from", &row[0])?),
                link_to: NodeId(field(name, line, "link_to", &row[1])?),
                seq: field(name, line, "seq", &row[2])?,
                length_mi: field(name, line, "length_mi", &row[3])?,
                avg_speed_mph: field(name, line, "avg_speed_mph", &row[4])?,
            })
        })
        .collect()
}

pub fn read_segments_csv(path: &FsPath) -> Result<Vec<SegmentRecord>> {
    parse_segments_csv(File::open(path)?, &path.display().to_string())
}

/// Parses `key=value` lines over the defaults. Blank lines and `#` comments
/// are skipped.
pub fn parse_config(text: &str, name: &str) -> Result<VehicleEnergyParams> {
    let mut params = VehicleEnergyParams::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| parse_err(name, line, "expected key=value"))?;
        let key = key.trim();
        let value: f64 = field(name, line, key, value.trim())?;
        let slot = match key {
            "c_gas" => &mut params.c_gas,
            "c_ele" => &mut params.c_ele,
            "e_init" => &mut params.e_init,
            _ => {
                let (kind, mode) = key
                    .strip_prefix("mu_cd_")
                    .map(|m| ("cd", m))
                    .or_else(|| key.strip_prefix("mu_cs_").map(|m| ("cs", m)))
                    .ok_or_else(|| parse_err(name, line, format!("unknown key {key:?}")))?;
                let mode: TrafficMode = mode
                    .parse()
                    .map_err(|_| parse_err(name, line, format!("unknown key {key:?}")))?;
                let factors = params.table.factors_mut(mode);
                if kind == "cd" {
                    &mut factors.mu_cd
                } else {
                    &mut factors.mu_cs
                }
            }
        };
        *slot = value;
    }
    params
        .validate()
        .map_err(|e| parse_err(name, 0, e.to_string()))?;
    Ok(params)
}

pub fn read_config(path: &FsPath) -> Result<VehicleEnergyParams> {
    parse_config(&std::fs::read_to_string(path)?, &path.display().to_string())
}

/// Parses an observed-routes file and normalizes every distribution.
pub fn parse_routes_json(text: &str) -> Result<Vec<OdRouteDistribution>> {
    let mut dists: Vec<OdRouteDistribution> = serde_json::from_str(text)?;
    for d in &mut dists {
        d.normalize()?;
    }
    Ok(dists)
}

pub fn read_routes_json(path: &FsPath) -> Result<Vec<OdRouteDistribution>> {
    parse_routes_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::routing::Period;

    const TRIANGLE: &str = "from,to,length_mi,avg_speed_mph,mode\n\
                            1,2,10,50,medium\n\
                            2,3,10,50,low\n\
                            1,3,15,50,high\n";

    #[test]
    fn parses_links() {
        let links = parse_links_csv(TRIANGLE.as_bytes(), "t.csv").unwrap();
        assert_eq!(links.len(), 3);
        assert_eq!(links[2].mode, TrafficMode::High);
        assert_eq!(links[0].length_mi, 10.0);
    }

    #[test]
    fn reports_line_of_bad_row() {
        let bad = "from,to,length_mi,avg_speed_mph,mode\n1,2,10,50,medium\n2,3,ten,50,low\n";
        match parse_links_csv(bad.as_bytes(), "t.csv") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let bad_mode = "from,to,length_mi,avg_speed_mph,mode\n1,2,10,50,jammed\n";
        assert!(matches!(
            parse_links_csv(bad_mode.as_bytes(), "t.csv"),
            Err(Error::Parse { line: 2, .. })
        ));
        let negative = "from,to,length_mi,avg_speed_mph,mode\n1,2,-1,50,low\n";
        assert!(matches!(
            parse_links_csv(negative.as_bytes(), "t.csv"),
            Err(Error::Parse { line: 2, .. })
        ));
        let short = "from,to,length_mi,avg_speed_mph,mode\n1,2,10\n";
        assert!(parse_links_csv(short.as_bytes(), "t.csv").is_err());
    }

    #[test]
    fn header_is_mandatory() {
        let headless = "1,2,10,50,medium\n";
        assert!(matches!(
            parse_links_csv(headless.as_bytes(), "t.csv"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn links_round_trip() {
        let g = NetworkGraph::new(vec![
            Link::new(1, 2, 0.1 + 0.2, 33.333333333333336, TrafficMode::Low).unwrap(),
            Link::new(2, 9, 1.0 / 3.0, 47.1, TrafficMode::High).unwrap(),
        ])
        .unwrap();
        let mut buf = Vec::new();
        write_links_csv(&g, &mut buf).unwrap();
        let back = NetworkGraph::new(parse_links_csv(buf.as_slice(), "mem").unwrap()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn parses_segments() {
        let text = "link_from,link_to,seq,length_mi,avg_speed_mph\n1,2,0,2,50\n1,2,1,3,15\n";
        let segs = parse_segments_csv(text.as_bytes(), "s.csv").unwrap();
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[1].seq, 1);
        assert_eq!(segs[1].avg_speed_mph, 15.0);
    }

    #[test]
    fn config_overrides() {
        let text = "# prices\nc_gas = 3.10\nc_ele=0.2\n\ne_init=4\nmu_cd_medium=6.5 # tuned\nmu_cs_high=40\n";
        let p = parse_config(text, "cfg").unwrap();
        assert_eq!(p.c_gas, 3.10);
        assert_eq!(p.c_ele, 0.2);
        assert_eq!(p.e_init, 4.0);
        assert_eq!(p.table.medium.mu_cd, 6.5);
        assert_eq!(p.table.high.mu_cs, 40.0);
        assert_eq!(p.table.low.mu_cd, 5.7);

        assert!(matches!(parse_config("speed=3", "cfg"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_config("\nc_gas", "cfg"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_config("mu_cd_low=0", "cfg").is_err());
        assert!(parse_config("c_gas=-1", "cfg").is_err());
        assert_eq!(parse_config("", "cfg").unwrap(), VehicleEnergyParams::default());
    }

    #[test]
    fn routes_json() {
        let text = r#"[{"origin": 1, "dest": 5, "period": "AM",
            "routes": [{"nodes": [1, 2, 3, 5], "prob": 19.7},
                       {"nodes": [1, 3, 5], "prob": 65.3},
                       {"nodes": [1, 2, 3, 6, 5], "prob": 15.0}]}]"#;
        let dists = parse_routes_json(text).unwrap();
        assert_eq!(dists[0].period, Period::AM);
        assert!((dists[0].routes[0].prob - 0.197).abs() < 1e-12);
        assert!(parse_routes_json("[{\"origin\": 1}]").is_err());
    }
}
