use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, CMatrix};
use crate::quantum::distribution::{ClassicalDistribution, DensityOperator};
use crate::quantum::generate::Distribution;

/// On-disk form: `{"type":"classical","probs":[...]}` or
/// `{"type":"density","re":[[...]],"im":[[...]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum DistributionFile {
    Classical { probs: Vec<f64> },
    Density { re: Vec<Vec<f64>>, im: Vec<Vec<f64>> },
}

impl DistributionFile {
    pub fn into_distribution(self) -> Result<Distribution> {
        match self {
            DistributionFile::Classical { probs } => Ok(Distribution::Classical(ClassicalDistribution::new(probs)?)),
            DistributionFile::Density { re, im } => {
                let n = re.len();
                if im.len() != n || re.iter().chain(im.iter()).any(|row| row.len() != n) {
                    return Err(Error::InvalidDensity("re/im must be square and of equal size".into()));
                }
                let m = CMatrix::from_fn(n, n, |i, j| c64(re[i][j], im[i][j]));
                Ok(Distribution::Density(DensityOperator::new(m)?))
            }
        }
    }

    pub fn from_distribution(d: &Distribution) -> Self {
        match d {
            Distribution::Classical(p) => DistributionFile::Classical { probs: p.probs().to_vec() },
            Distribution::Density(r) => {
                let n = r.dim();
                let m = r.matrix();
                DistributionFile::Density {
                    re: (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect(),
                    im: (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect(),
                }
            }
        }
    }
}

pub fn parse_distribution(json: &str) -> Result<Distribution> {
    let file: DistributionFile = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_distribution()
}

pub fn load_distribution(path: &Path) -> Result<Distribution> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_distribution(&text)
}

pub fn distribution_to_json(d: &Distribution) -> String {
    serde_json::to_string(&DistributionFile::from_distribution(d)).expect("plain data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_both_kinds() {
        let d = parse_distribution(r#"{"type":"classical","probs":[0.25,0.75]}"#).unwrap();
        assert!(d.is_classical());
        let d = parse_distribution(r#"{"type":"density","re":[[0.5,0],[0,0.5]],"im":[[0,0],[0,0]]}"#).unwrap();
        assert_eq!(d.dim(), 2);
        assert!(parse_distribution(r#"{"type":"classical","probs":[0.5,0.6]}"#).is_err());
        assert!(parse_distribution(r#"{"type":"density","re":[[1,0.5],[0,0]],"im":[[0,0],[0,0]]}"#).is_err());
    }

    #[test]
    fn round_trip() {
        let d = parse_distribution(r#"{"type":"classical","probs":[0.125,0.875]}"#).unwrap();
        let back = parse_distribution(&distribution_to_json(&d)).unwrap();
        assert_eq!(back.dim(), 2);
    }
}
