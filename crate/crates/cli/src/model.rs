//! Model selection from positional words: `kenyon P Q R`, `square`, or the
//! path of a substitution JSON file.

use std::path::Path;

use serde::Serialize;
use subtile::{kenyon_system_with_layout, square_system, CubicParams, KenyonLayout, SubstitutionSystem};

use crate::error::{lib, CliError};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Kenyon { p: u32, q: u32, r: u32 },
    Square,
    File { path: String },
}

impl ModelSpec {
    pub fn parse(words: &[String]) -> Result<Self, CliError> {
        match words {
            [name] if name == "square" => Ok(ModelSpec::Square),
            [name, p, q, r] if name == "kenyon" => {
                let num = |s: &str| {
                    s.parse::<u32>()
                        .map_err(|_| CliError::Usage(format!("kenyon parameter {s:?} is not a non-negative integer")))
                };
                Ok(ModelSpec::Kenyon {
                    p: num(p)?,
                    q: num(q)?,
                    r: num(r)?,
                })
            }
            [path] if path.ends_with(".json") => Ok(ModelSpec::File { path: path.clone() }),
            _ => Err(CliError::Usage(format!(
                "unknown model {:?}; expected `kenyon P Q R`, `square` or a .json file",
                words.join(" ")
            ))),
        }
    }

    /// The system; Kenyon models use `layout`.
    pub fn load(&self, layout: KenyonLayout) -> Result<SubstitutionSystem, CliError> {
        match self {
            ModelSpec::Kenyon { p, q, r } => {
                let params = CubicParams::new(*p, *q, *r).map_err(lib)?;
                Ok(kenyon_system_with_layout(params, layout).map_err(lib)?.system)
            }
            ModelSpec::Square => Ok(square_system().system),
            ModelSpec::File { path } => {
                let text = std::fs::read_to_string(Path::new(path))?;
                SubstitutionSystem::from_json(&text).map_err(lib)
            }
        }
    }
}

/// Built-in models for `models list`.
pub const CATALOG: [(&str, &str); 2] = [
    (
        "kenyon P Q R",
        "three parallelogram prototiles scaled by the complex root of z^3 - P z^2 + Q z + R",
    ),
    (
        "square",
        "unit squares in three types, inflated by 6, with vertical bookkeeping in two classes",
    ),
];
