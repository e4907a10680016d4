#![allow(dead_code)]

use std::path::{Path, PathBuf};

use namelink_core::fixtures::Fixture;

fn write_records(path: &Path, headers: [&str; 3], records: &[namelink_core::record::DatasetRecord], delimiter: u8) {
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_path(path).unwrap();
    w.write_record(headers).unwrap();
    for r in records {
        w.write_record([r.id.as_str(), r.full_name.text(), r.block_fields["governorate"].as_str()])
            .unwrap();
    }
    w.flush().unwrap();
}

/// Writes the fixture as a source CSV, a destination TSV, training pairs
/// and ground-truth labels, plus a config pointing at them. Returns the
/// config path.
pub fn write_fixture(dir: &Path, fixture: &Fixture) -> PathBuf {
    write_records(&dir.join("sources.csv"), ["id", "name", "governorate"], &fixture.sources, b',');
    write_records(
        &dir.join("staff.tsv"),
        ["EMP_ID", "FULL_NAME_AR", "governorate"],
        &fixture.destinations,
        b'\t',
    );
    let mut w = csv::Writer::from_path(dir.join("pairs.csv")).unwrap();
    w.write_record(["arabic", "latin"]).unwrap();
    for (a, l) in &fixture.training_pairs {
        w.write_record([a, l]).unwrap();
    }
    w.flush().unwrap();
    let mut w = csv::Writer::from_path(dir.join("labels.csv")).unwrap();
    w.write_record(["source_id", "dest_ids"]).unwrap();
    for (s, d) in &fixture.truth {
        w.write_record([s, d]).unwrap();
    }
    w.flush().unwrap();
    let config = dir.join("pipeline.toml");
    std::fs::write(
        &config,
        r#"
[source]
path = "sources.csv"
block_columns = ["governorate"]
script = "latin"

[destination]
path = "staff.tsv"
id_column = "EMP_ID"
name_column = "FULL_NAME_AR"
block_columns = ["governorate"]
script = "arabic"

[dictionary]
training = "pairs.csv"
strategy = "source"

[matching]
block = ["governorate"]

[output]
dir = "out"
"#,
    )
    .unwrap();
    config
}
