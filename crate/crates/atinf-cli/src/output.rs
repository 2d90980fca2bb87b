use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::{CliError, Format};

pub struct OutputSet {
    dir: PathBuf,
    stem: String,
    json: Option<Value>,
    csv: Option<String>,
    svg: Option<String>,
}

impl OutputSet {
    pub fn new(dir: &Path, stem: &str) -> Self {
        OutputSet {
            dir: dir.to_path_buf(),
            stem: stem.to_string(),
            json: None,
            csv: None,
            svg: None,
        }
    }

    pub fn json(&mut self, v: Value) {
        self.json = Some(v);
    }

    pub fn csv(&mut self, s: String) {
        self.csv = Some(s);
    }

    pub fn svg(&mut self, s: String) {
        self.svg = Some(s);
    }
}

pub fn write_outputs(set: OutputSet, formats: &[Format]) -> Result<(), CliError> {
    std::fs::create_dir_all(&set.dir)
        .map_err(|e| CliError::io(format!("cannot create {}: {}", set.dir.display(), e)))?;
    for f in formats {
        let (ext, content) = match f {
            Format::Json => (
                "json",
                set.json
                    .as_ref()
                    .map(|v| serde_json::to_string_pretty(v).unwrap() + "\n"),
            ),
            Format::Csv => ("csv", set.csv.clone()),
            Format::Svg => ("svg", set.svg.clone()),
        };
        let Some(content) = content else {
            eprintln!(
                "atinf: note: {} output not produced by this command",
                ext
            );
            continue;
        };
        let path = set.dir.join(format!("{}.{}", set.stem, ext));
        std::fs::write(&path, content)
            .map_err(|e| CliError::io(format!("cannot write {}: {}", path.display(), e)))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
