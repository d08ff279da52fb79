//! Chain templates from the built-in set or a `chains/<threat>/` directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use svaforge_core::chain::{builtin_files, load_chain, parse_manifest, parse_sub_question, validate_chain};
use svaforge_core::{ThreatChain, ThreatId};

use crate::ConfigError;

/// Manifest text and `(id, text)` pairs.
pub type ChainFiles = (String, Vec<(String, String)>);

/// `None` when `dir` has no subdirectory for the threat.
pub fn chain_files(dir: Option<&Path>, threat: ThreatId) -> Result<Option<ChainFiles>, ConfigError> {
    let Some(dir) = dir else {
        let (manifest, files) = builtin_files(threat);
        return Ok(Some((manifest, files.iter().map(|(i, t)| (i.to_string(), t.to_string())).collect())));
    };
    let tdir = dir.join(threat.id());
    let mpath = tdir.join("manifest");
    if !mpath.is_file() {
        return Ok(None);
    }
    let manifest = fs::read_to_string(&mpath).map_err(|e| ConfigError::io(&mpath, e))?;
    let mut files = Vec::new();
    for id in parse_manifest(&manifest) {
        let p = tdir.join(format!("{id}.sq"));
        if let Ok(text) = fs::read_to_string(&p) {
            files.push((id, text));
        }
    }
    Ok(Some((manifest, files)))
}

/// Loads and validates the chains for `threats`.
pub fn load_chains(
    dir: Option<&Path>,
    threats: impl IntoIterator<Item = ThreatId>,
    k: usize,
) -> Result<BTreeMap<ThreatId, ThreatChain>, ConfigError> {
    let mut out = BTreeMap::new();
    for t in threats {
        if out.contains_key(&t) {
            continue;
        }
        let (manifest, files) = chain_files(dir, t)?
            .ok_or_else(|| ConfigError::Chain(format!("no chain for {t} under {}", dir.unwrap_or(Path::new("")).display())))?;
        let lookup = |id: &str| files.iter().find(|(i, _)| i == id).map(|(_, s)| s.clone());
        let chain = load_chain(t, &manifest, lookup, k).map_err(|e| ConfigError::Chain(format!("{t}: {e}")))?;
        out.insert(t, chain);
    }
    Ok(out)
}

/// Every problem in one threat's chain, as `threat/id: message` lines.
/// The parsed chain is returned when all files parsed.
pub fn check_chain(
    dir: Option<&Path>,
    threat: ThreatId,
    k: usize,
) -> Result<(Option<ThreatChain>, Vec<String>), ConfigError> {
    let Some((manifest, files)) = chain_files(dir, threat)? else { return Ok((None, Vec::new())) };
    let mut diags = Vec::new();
    let mut sub_questions = Vec::new();
    let ids = parse_manifest(&manifest);
    if ids.is_empty() {
        diags.push(format!("{threat}/manifest: lists no sub-questions"));
    }
    for (i, id) in ids.iter().enumerate() {
        match files.iter().find(|(f, _)| f == id) {
            None => diags.push(format!("{threat}/manifest:{}: missing file {id}.sq", i + 1)),
            Some((_, text)) => match parse_sub_question(id, i + 1, text) {
                Ok(sq) => sub_questions.push(sq),
                Err(e) => diags.push(format!("{threat}/{e}")),
            },
        }
    }
    if !diags.is_empty() {
        return Ok((None, diags));
    }
    let chain = ThreatChain { threat, sub_questions };
    diags.extend(validate_chain(&chain, k).into_iter().map(|d| format!("{threat}/{}: {}", d.sub_question, d.message)));
    Ok((Some(chain), diags))
}
