//! JSON state files: `{"dims": [..], "re": [[..]..], "im": [[..]..]}`,
//! row-major.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use super::state::DensityMatrix;
use crate::error::{Error, Result};
use crate::scalar::{CMat, Real};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl StateFile {
    pub fn from_state<T: Real>(rho: &DensityMatrix<T>) -> Self {
        let n = rho.side();
        let d = rho.data();
        Self {
            dims: rho.dims().to_vec(),
            re: (0..n).map(|r| (0..n).map(|c| d[(r, c)].re.as_f64()).collect()).collect(),
            im: (0..n).map(|r| (0..n).map(|c| d[(r, c)].im.as_f64()).collect()).collect(),
        }
    }

    /// Builds and validates the state, reporting the offending field.
    pub fn to_state<T: Real>(&self) -> Result<DensityMatrix<T>> {
        if self.dims.is_empty() {
            return Err(Error::StateFile("field `dims`: empty".into()));
        }
        if let Some(pos) = self.dims.iter().position(|&d| d < 2) {
            return Err(Error::StateFile(format!("field `dims[{pos}]`: dimension must be >= 2")));
        }
        let n: usize = self.dims.iter().product();
        for (name, rows) in [("re", &self.re), ("im", &self.im)] {
            if rows.len() != n {
                return Err(Error::StateFile(format!("field `{name}`: {} rows, expected {n}", rows.len())));
            }
            if let Some((r, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != n) {
                return Err(Error::StateFile(format!("field `{name}[{r}]`: {} entries, expected {n}", row.len())));
            }
            if let Some((r, c)) =
                rows.iter().enumerate().find_map(|(r, row)| row.iter().position(|x| !x.is_finite()).map(|c| (r, c)))
            {
                return Err(Error::StateFile(format!("field `{name}[{r}][{c}]`: not a finite number")));
            }
        }
        let data = CMat::<T>::from_fn(n, n, |r, c| Complex::new(T::lit(self.re[r][c]), T::lit(self.im[r][c])));
        DensityMatrix::new(self.dims.clone(), data).map_err(|e| Error::StateFile(e.to_string()))
    }
}

pub fn state_to_json<T: Real>(rho: &DensityMatrix<T>) -> Result<String> {
    Ok(serde_json::to_string_pretty(&StateFile::from_state(rho))?)
}

pub fn state_from_json<T: Real>(text: &str) -> Result<DensityMatrix<T>> {
    let file: StateFile = serde_json::from_str(text)
        .map_err(|e| Error::StateFile(format!("line {} column {}: {e}", e.line(), e.column())))?;
    file.to_state()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_field_level_problems() {
        let short = r#"{"dims":[2],"re":[[1,0]],"im":[[0,0],[0,0]]}"#;
        let err = state_from_json::<f64>(short).unwrap_err().to_string();
        assert!(err.contains("`re`"), "{err}");

        let ragged = r#"{"dims":[2],"re":[[1,0],[0]],"im":[[0,0],[0,0]]}"#;
        let err = state_from_json::<f64>(ragged).unwrap_err().to_string();
        assert!(err.contains("re[1]"), "{err}");

        let not_json = "{\"dims\": [2],\n \"re\": oops}";
        let err = state_from_json::<f64>(not_json).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");

        let bad_trace = r#"{"dims":[2],"re":[[1,0],[0,1]],"im":[[0,0],[0,0]]}"#;
        assert!(state_from_json::<f64>(bad_trace).is_err());
    }

    #[test]
    fn round_trip() {
        let rho = DensityMatrix::<f64>::maximally_mixed(vec![2, 3]).unwrap();
        let back: DensityMatrix<f64> = state_from_json(&state_to_json(&rho).unwrap()).unwrap();
        assert_eq!(back, rho);
    }
}
