//! Corpus manifests: one design per line, `path<TAB>threat,threat`.

use std::fs;
use std::path::{Path, PathBuf};

use svaforge_core::verilog::DesignError;
use svaforge_core::{parse_design, DesignModel, ThreatId};

use crate::ConfigError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    /// File stem of the design; names the output files.
    pub name: String,
    pub path: PathBuf,
    pub threats: Vec<ThreatId>,
    /// Sensitive signals from the `<design>.assets` sideband file.
    pub extra_sensitive: Vec<String>,
}

fn sideband(path: &Path) -> Result<Vec<String>, ConfigError> {
    let side = path.with_extension("assets");
    if !side.exists() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(&side).map_err(|e| ConfigError::io(&side, e))?;
    Ok(text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .flat_map(|l| l.split(',').map(str::trim))
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect())
}

/// Reads a manifest. Paths are relative to the manifest's directory.
pub fn load_corpus(manifest: &Path) -> Result<Vec<CorpusEntry>, ConfigError> {
    let text = fs::read_to_string(manifest).map_err(|e| ConfigError::io(manifest, e))?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let bad = |msg: String| ConfigError::Manifest { path: manifest.into(), line: i + 1, msg };
        let (p, threats) = line.split_once('\t').ok_or_else(|| bad("expected `path<TAB>threats`".into()))?;
        let path = base.join(p.trim());
        if !path.is_file() {
            return Err(bad(format!("design file {} does not exist", path.display())));
        }
        let threats = threats
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| ThreatId::parse(t).ok_or_else(|| bad(format!("unknown threat '{t}'"))))
            .collect::<Result<Vec<_>, _>>()?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("design").to_string();
        if out.iter().any(|e: &CorpusEntry| e.name == name) {
            return Err(bad(format!("design name '{name}' appears twice")));
        }
        let extra_sensitive = sideband(&path)?;
        out.push(CorpusEntry { name, path, threats, extra_sensitive });
    }
    Ok(out)
}

impl CorpusEntry {
    pub fn parse(&self) -> Result<DesignModel, ConfigError> {
        let src = fs::read_to_string(&self.path).map_err(|e| ConfigError::io(&self.path, e))?;
        parse_design(&src, None, &self.path.display().to_string()).map_err(|e: DesignError| ConfigError::Design(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_with_sideband() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.v"), "module a(input clk); endmodule").unwrap();
        fs::write(dir.path().join("a.assets"), "# extra\nlatch_q, mode\n").unwrap();
        fs::write(dir.path().join("m.tsv"), "# corpus\na.v\tunused_states, info_leakage\n").unwrap();
        let c = load_corpus(&dir.path().join("m.tsv")).unwrap();
        assert_eq!(c[0].name, "a");
        assert_eq!(c[0].threats, [ThreatId::UnusedStates, ThreatId::InfoLeakage]);
        assert_eq!(c[0].extra_sensitive, ["latch_q", "mode"]);
    }

    #[test]
    fn missing_design_file() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("m.tsv"), "gone.v\tunused_states\n").unwrap();
        let e = load_corpus(&dir.path().join("m.tsv")).unwrap_err();
        assert!(e.to_string().contains("does not exist"), "{e}");
    }
}
