//! Report serialization: canonical JSON plus a flat CSV twin for plotting.

use super::{MetricReport, MetricsError};
use std::io::{BufWriter, Write};
use std::path::Path;

/// Writes the report as pretty-printed JSON.
pub fn write_report(path: &Path, report: &MetricReport) -> Result<(), MetricsError> {
    let json = serde_json::to_string_pretty(report).map_err(|e| MetricsError::Parse(e.to_string()))?;
    std::fs::write(path, json)?;
    Ok(())
}

/// Reads a report back from JSON.
pub fn read_report(path: &Path) -> Result<MetricReport, MetricsError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| MetricsError::Parse(e.to_string()))
}

/// Writes the report as `section,key,count,meteor,ve` rows: the overall
/// aggregate, then domains, length buckets, and per-example scores.
pub fn write_report_csv(path: &Path, report: &MetricReport) -> Result<(), MetricsError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "section,key,count,meteor,ve")?;
    let mut row = |section: &str, key: &str, count: usize, meteor: f64, ve: f64| {
        writeln!(w, "{section},{key},{count},{meteor},{ve}")
    };
    row("overall", "all", report.overall.count, report.overall.meteor, report.overall.ve)?;
    for (domain, agg) in &report.by_domain {
        row("domain", domain, agg.count, agg.meteor, agg.ve)?;
    }
    for (length, agg) in &report.by_length {
        row("length", &length.to_string(), agg.count, agg.meteor, agg.ve)?;
    }
    for s in &report.per_example {
        row("example", &s.id, 1, s.meteor, s.ve)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::{Aggregate, ExampleScore};
    use super::*;
    use std::collections::BTreeMap;

    fn sample() -> MetricReport {
        let ex = |id: &str, domain: &str, length: usize, m: f64, v: f64| ExampleScore {
            id: id.into(),
            domain: domain.into(),
            length,
            meteor: m,
            ve: v,
        };
        let agg = |count, meteor, ve| Aggregate { count, meteor, ve };
        MetricReport {
            overall: agg(2, 0.45, 0.3),
            by_domain: BTreeMap::from([
                ("papers".to_string(), agg(1, 0.4, 0.2)),
                ("scifi".to_string(), agg(1, 0.5, 0.4)),
            ]),
            by_length: BTreeMap::from([(4, agg(1, 0.4, 0.2)), (6, agg(1, 0.5, 0.4))]),
            per_example: vec![
                ex("a", "papers", 4, 0.4, 0.2),
                ex("b", "scifi", 6, 0.5, 0.4),
            ],
        }
    }

    #[test]
    fn json_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        let report = sample();
        write_report(&path, &report).unwrap();
        assert_eq!(read_report(&path).unwrap(), report);
    }

    #[test]
    fn csv_lists_every_section_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.csv");
        write_report_csv(&path, &sample()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "section,key,count,meteor,ve");
        assert_eq!(lines[1], "overall,all,2,0.45,0.3");
        assert_eq!(lines[2], "domain,papers,1,0.4,0.2");
        assert_eq!(lines[4], "length,4,1,0.4,0.2");
        assert_eq!(lines[6], "example,a,1,0.4,0.2");
        assert_eq!(lines.len(), 8);
    }

    #[test]
    fn unreadable_report_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        std::fs::write(&path, "{not json").unwrap();
        assert!(matches!(read_report(&path), Err(MetricsError::Parse(_))));
    }
}
