//! `HATMODEL v1`: dimensions, then the four matrices in index order.
//!
//! ```text
//! HATMODEL v1
//! topics <K>
//! users <N>
//! words <W>
//! [tau]          K rows of W values
//! [theta]        N rows of K values
//! [authority]    N rows of K values
//! [hub]          N rows of K values
//! ```

use std::fmt::Write;
use std::path::Path;

use super::ModelParams;
use crate::text::{read_file, write_matrix, Lines};
use crate::Result;

pub const MODEL_MAGIC: &str = "HATMODEL v1";

pub fn write_model(params: &ModelParams) -> String {
    let mut out = String::new();
    writeln!(out, "{MODEL_MAGIC}").unwrap();
    writeln!(out, "topics {}", params.topics()).unwrap();
    writeln!(out, "users {}", params.n_users()).unwrap();
    writeln!(out, "words {}", params.n_words()).unwrap();
    write_matrix(&mut out, "[tau]", &params.tau);
    write_matrix(&mut out, "[theta]", &params.theta);
    write_matrix(&mut out, "[authority]", &params.authority);
    write_matrix(&mut out, "[hub]", &params.hub);
    out
}

pub fn read_model(path: &Path) -> Result<ModelParams> {
    parse_model(path, &read_file(path)?)
}

pub(crate) fn parse_model(path: &Path, content: &str) -> Result<ModelParams> {
    let mut lines = Lines::new(path, content);
    lines.expect(MODEL_MAGIC)?;
    let k = lines.header("topics")?;
    let n = lines.header("users")?;
    let w = lines.header("words")?;
    let params = ModelParams {
        tau: lines.matrix("[tau]", k, w)?,
        theta: lines.matrix("[theta]", n, k)?,
        authority: lines.matrix("[authority]", n, k)?,
        hub: lines.matrix("[hub]", n, k)?,
    };
    lines.finish()?;
    Ok(params)
}
