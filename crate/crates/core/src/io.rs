//! JSON interchange formats shared by the library and the command line.
//!
//! Matrices are `{"rows": n, "cols": m, "data": [[re, im], ...]}` in
//! row-major order. Subspaces use the same layout with the basis in the
//! columns. A projection or operator file may carry an inline `"frame"`.

use serde::{Deserialize, Serialize};

use crate::error::{KreinError, Result};
use crate::krein::KreinFrame;
use crate::linalg::{c, Mat};
use crate::subspace::Subspace;

pub const SCHEMA: &str = "krein-kit/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<KreinFrame>,
}

impl OperatorJson {
    pub fn from_mat(m: &Mat) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        OperatorJson {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
            frame: None,
        }
    }

    pub fn with_frame(mut self, frame: KreinFrame) -> Self {
        self.frame = Some(frame);
        self
    }

    pub fn to_mat(&self) -> Result<Mat> {
        if self.data.len() != self.rows * self.cols {
            return Err(KreinError::dim(
                format!("{} entries for {}x{}", self.rows * self.cols, self.rows, self.cols),
                format!("{} entries", self.data.len()),
            ));
        }
        if self.data.iter().flatten().any(|x| !x.is_finite()) {
            return Err(KreinError::NonFinite);
        }
        let cols = self.cols;
        Ok(Mat::from_fn(self.rows, cols, |i, j| {
            let [re, im] = self.data[i * cols + j];
            c(re, im)
        }))
    }

    /// An explicit frame wins over the inline one; having neither is an
    /// error.
    pub fn resolve_frame(&self, explicit: Option<KreinFrame>) -> Result<KreinFrame> {
        let frame = explicit
            .or(self.frame)
            .ok_or_else(|| KreinError::InvalidFrame("no frame given inline or on the command line".into()))?;
        frame.validate()?;
        if frame.n() != self.rows {
            return Err(KreinError::dim(format!("{} rows for frame", frame.n()), self.rows));
        }
        Ok(frame)
    }
}

/// A fixed-range family: the pseudo-regular range `S` and optionally the
/// base deck `M0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyJson {
    pub frame: KreinFrame,
    pub range: OperatorJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deck: Option<OperatorJson>,
}

impl FamilyJson {
    pub fn subspaces(&self) -> Result<(Subspace, Option<Subspace>)> {
        self.frame.validate()?;
        let s = Subspace::span(self.frame, &self.range.to_mat()?)?;
        let m = match &self.deck {
            Some(d) => Some(Subspace::span(self.frame, &d.to_mat()?)?),
            None => None,
        };
        Ok((s, m))
    }
}

pub fn subspace_json(s: &Subspace) -> OperatorJson {
    OperatorJson::from_mat(s.basis())
}
