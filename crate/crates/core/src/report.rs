//! Output files: report document, stream table, incident table.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::format::fmt_sig6;
use crate::pipeline::Analysis;
use crate::risk::Incident;
use crate::stream::StreamSet;

pub const REPORT_FILE: &str = "report.json";
pub const STREAMS_FILE: &str = "streams.csv";
pub const INCIDENTS_FILE: &str = "incidents.csv";

/// Stream table: `time_s` then one `measure (unit)` column per stream.
pub fn streams_csv(streams: &StreamSet) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header = vec!["time_s".to_owned()];
    header.extend(streams.iter().map(|s| s.header()));
    w.write_record(&header).expect("in-memory write");
    if let Some(first) = streams.iter().next() {
        for i in 0..first.len() {
            let mut row = vec![fmt_sig6(i as f64 / first.frame_rate)];
            row.extend(streams.iter().map(|s| fmt_sig6(s.samples[i])));
            w.write_record(&row).expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

pub fn incidents_csv(incidents: &[Incident]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record([
        "rule_id",
        "label",
        "region",
        "severity",
        "start_frame",
        "end_frame",
        "peak_frame",
        "start_s",
        "end_s",
        "duration_s",
        "measure",
        "unit",
        "peak_value",
        "margin",
    ])
    .expect("in-memory write");
    for i in incidents {
        w.write_record([
            i.rule_id.clone(),
            i.label.clone(),
            i.region.as_str().to_owned(),
            i.severity.as_str().to_owned(),
            i.start_frame.to_string(),
            i.end_frame.to_string(),
            i.peak_frame.to_string(),
            fmt_sig6(i.start_s),
            fmt_sig6(i.end_s),
            fmt_sig6(i.duration_s),
            i.measure.clone(),
            i.unit.as_str().to_owned(),
            fmt_sig6(i.peak_value),
            fmt_sig6(i.margin),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

fn tmp_path(path: &Path) -> PathBuf {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!(".{name}.tmp"))
}

/// Write through a sibling temp file and rename into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = tmp_path(path);
    if let Err(e) = fs::write(&tmp, contents) {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

pub fn export_streams(streams: &StreamSet, path: &Path) -> Result<()> {
    write_atomic(path, &streams_csv(streams))
}

/// Write all three outputs into `dir`. On failure nothing from this call
/// is left behind.
pub fn write_outputs(analysis: &Analysis, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = [
        (REPORT_FILE, analysis.report.to_json()),
        (STREAMS_FILE, streams_csv(analysis.streams())),
        (INCIDENTS_FILE, incidents_csv(&analysis.report.incidents)),
    ];
    let mut written = Vec::new();
    for (name, body) in &files {
        let path = dir.join(name);
        if let Err(e) = write_atomic(&path, body) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            return Err(e);
        }
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::{MetricStream, Unit};

    #[test]
    fn two_streams_three_frames() {
        let set: StreamSet = [
            MetricStream::new("a_deg", Unit::Deg, 30.0, vec![1.0, 2.0, 1.0 / 3.0]),
            MetricStream::new("b_load_n", Unit::Newton, 30.0, vec![343.35, 0.0, -1e-7]),
        ]
        .into_iter()
        .collect();
        let text = streams_csv(&set);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "time_s,a_deg (deg),b_load_n (N)");
        assert_eq!(lines[1], "0,1,343.35");
        assert_eq!(lines[3], "0.0666667,0.333333,-0.0000001");
        assert_eq!(text, streams_csv(&set));
    }

    #[test]
    fn empty_stream_set_is_header_only() {
        assert_eq!(streams_csv(&StreamSet::default()), "time_s\n");
    }

    #[test]
    fn unwritable_path_errors_and_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("missing").join("s.csv");
        assert!(export_streams(&StreamSet::default(), &target).is_err());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
