//! JSON files for scenarios, code books and realizations.
//!
//! Floats are written in shortest round-trip form and parsed exactly, so a
//! saved realization replays bit for bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use powergame_core::{CodeBook, Realization, Scenario};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{io_error, Error, Result};

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(io_error(path))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    out.write_all(b"\n").map_err(io_error(path))?;
    out.flush().map_err(io_error(path))
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(io_error(path))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn save_scenario(path: &Path, scenario: &Scenario) -> Result<()> {
    save_json(path, scenario)
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let scenario: Scenario = load_json(path)?;
    scenario.validate()?;
    Ok(scenario)
}

pub fn save_codebook(path: &Path, codes: &CodeBook) -> Result<()> {
    save_json(path, codes)
}

/// The cross-correlations are recomputed from the stored chip signs.
pub fn load_codebook(path: &Path) -> Result<CodeBook> {
    load_json(path)
}

pub fn save_realization(path: &Path, realization: &Realization) -> Result<()> {
    save_json(path, realization)
}

pub fn load_realization(path: &Path) -> Result<Realization> {
    let realization: Realization = load_json(path)?;
    realization.scenario.validate()?;
    if realization.codes.users() != realization.scenario.users() {
        return Err(Error::InvalidSpec(format!(
            "{}: {} codes for {} users",
            path.display(),
            realization.codes.users(),
            realization.scenario.users()
        )));
    }
    Ok(realization)
}
