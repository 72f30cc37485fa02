pub mod label;
pub mod prep;
pub mod score;
pub mod stats;
pub mod stub;
pub mod study;

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::Context;

use crate::failure::Failure;

pub fn open_input(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .with_context(|| format!("cannot open {}", path.display()))
        .map_err(Failure::input)
}

pub fn create_dir(path: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(path)
        .with_context(|| format!("cannot create {}", path.display()))
        .map_err(Failure::internal)
}

pub fn write_output(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), Failure> {
    std::fs::write(path, contents)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(Failure::internal)
}

pub fn to_json_line<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

pub fn parse_flag<T: std::str::FromStr>(name: &str, value: &str) -> Result<T, Failure>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| Failure::input(anyhow::anyhow!("invalid --{name} `{value}`: {e}")))
}
