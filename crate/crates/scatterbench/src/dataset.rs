//! Far-field data containers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wave::{is_unit, neg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    Full,
    Backscatter,
    FixedIncident,
}

/// One far-field measurement: amplitude `A(beta, alpha, k + i eta)`.
/// A non-finite amplitude marks a record whose solve failed (the sweep
/// continues past per-record solver failures).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarFieldRecord {
    pub beta: [f64; 3],
    pub alpha: [f64; 3],
    pub k: f64,
    pub eta: f64,
    pub amplitude_re: f64,
    pub amplitude_im: f64,
}

impl FarFieldRecord {
    pub fn new(beta: [f64; 3], alpha: [f64; 3], k: f64, eta: f64, amplitude: Complex64) -> Self {
        Self {
            beta,
            alpha,
            k,
            eta,
            amplitude_re: amplitude.re,
            amplitude_im: amplitude.im,
        }
    }

    pub fn amplitude(&self) -> Complex64 {
        Complex64::new(self.amplitude_re, self.amplitude_im)
    }

    pub fn is_valid(&self) -> bool {
        self.amplitude_re.is_finite() && self.amplitude_im.is_finite()
    }
}

/// Far-field dataset with a kind tag that constrains its records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarFieldDataset {
    pub kind: DatasetKind,
    pub records: Vec<FarFieldRecord>,
}

impl FarFieldDataset {
    pub fn new(kind: DatasetKind, records: Vec<FarFieldRecord>) -> Result<Self> {
        let ds = Self { kind, records };
        ds.validate()?;
        Ok(ds)
    }

    /// Enforce the kind invariants: backscatter means `beta = -alpha` on
    /// every record; fixed-incident means a shared `alpha`.
    pub fn validate(&self) -> Result<()> {
        for (i, r) in self.records.iter().enumerate() {
            if !is_unit(r.beta, 1e-10) || !is_unit(r.alpha, 1e-10) {
                return Err(Error::Domain(format!(
                    "record {i}: beta/alpha must be unit vectors"
                )));
            }
            if !(r.k.is_finite() && r.eta.is_finite() && r.eta >= 0.0) {
                return Err(Error::Domain(format!("record {i}: bad (k, eta)")));
            }
        }
        match self.kind {
            DatasetKind::Backscatter => {
                for (i, r) in self.records.iter().enumerate() {
                    let m = neg(r.alpha);
                    let d = (r.beta[0] - m[0]).abs()
                        + (r.beta[1] - m[1]).abs()
                        + (r.beta[2] - m[2]).abs();
                    if d > 1e-12 {
                        return Err(Error::Domain(format!(
                            "backscatter record {i} violates beta = -alpha (deviation {d:.2e})"
                        )));
                    }
                }
            }
            DatasetKind::FixedIncident => {
                if let Some(first) = self.records.first() {
                    for (i, r) in self.records.iter().enumerate() {
                        let d = (r.alpha[0] - first.alpha[0]).abs()
                            + (r.alpha[1] - first.alpha[1]).abs()
                            + (r.alpha[2] - first.alpha[2]).abs();
                        if d > 1e-12 {
                            return Err(Error::Domain(format!(
                                "fixed-incident record {i} changes alpha"
                            )));
                        }
                    }
                }
            }
            DatasetKind::Full => {}
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// CSV export with the documented column set.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bx,by,bz,ax,ay,az,k,eta,reA,imA\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.beta[0],
                r.beta[1],
                r.beta[2],
                r.alpha[0],
                r.alpha[1],
                r.alpha[2],
                r.k,
                r.eta,
                r.amplitude_re,
                r.amplitude_im
            ));
        }
        out
    }

    /// Max modulus difference of amplitudes against another dataset with
    /// identical geometry.
    pub fn max_amplitude_deviation(&self, other: &Self) -> Result<f64> {
        if self.records.len() != other.records.len() {
            return Err(Error::Domain("dataset length mismatch".into()));
        }
        let mut worst = 0.0f64;
        for (a, b) in self.records.iter().zip(&other.records) {
            worst = worst.max((a.amplitude() - b.amplitude()).norm());
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(beta: [f64; 3], alpha: [f64; 3]) -> FarFieldRecord {
        FarFieldRecord::new(beta, alpha, 1.0, 0.0, Complex64::new(0.1, -0.2))
    }

    #[test]
    fn backscatter_tag_enforced() {
        let good = FarFieldDataset::new(
            DatasetKind::Backscatter,
            vec![rec([0.0, 0.0, -1.0], [0.0, 0.0, 1.0])],
        );
        assert!(good.is_ok());
        let bad = FarFieldDataset::new(
            DatasetKind::Backscatter,
            vec![rec([0.0, 0.0, 1.0], [0.0, 0.0, 1.0])],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn fixed_incident_tag_enforced() {
        let good = FarFieldDataset::new(
            DatasetKind::FixedIncident,
            vec![
                rec([0.0, 1.0, 0.0], [0.0, 0.0, 1.0]),
                rec([1.0, 0.0, 0.0], [0.0, 0.0, 1.0]),
            ],
        );
        assert!(good.is_ok());
        let bad = FarFieldDataset::new(
            DatasetKind::FixedIncident,
            vec![
                rec([0.0, 1.0, 0.0], [0.0, 0.0, 1.0]),
                rec([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
            ],
        );
        assert!(bad.is_err());
    }
}
