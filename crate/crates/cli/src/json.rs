//! On-disk JSON formats.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use nodal_core::nullcone::{ComplexHarmonic, PoleSet};
use nodal_core::{RealHarmonic, SpherePoint};

pub const BASIS_TAG: &str = "real-orthonormal-prob-v1";

/// `{"degree": n, "basis": "real-orthonormal-prob-v1", "coeffs": [c_{-n}..c_n]}`
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HarmonicJson {
    pub degree: usize,
    pub basis: String,
    pub coeffs: Vec<f64>,
}

impl HarmonicJson {
    pub fn from_harmonic(u: &RealHarmonic) -> Self {
        HarmonicJson {
            degree: u.degree(),
            basis: BASIS_TAG.to_string(),
            coeffs: u.coeffs().to_vec(),
        }
    }

    pub fn into_harmonic(self) -> Result<RealHarmonic, String> {
        if self.basis != BASIS_TAG {
            return Err(format!(
                "unsupported basis {:?}; this tool reads {:?}",
                self.basis, BASIS_TAG
            ));
        }
        RealHarmonic::new(self.degree, self.coeffs).map_err(|e| e.to_string())
    }
}

/// A complex harmonic as a pair of real ones.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexHarmonicJson {
    pub re: HarmonicJson,
    pub im: HarmonicJson,
}

impl ComplexHarmonicJson {
    pub fn from_harmonic(p: &ComplexHarmonic) -> Self {
        ComplexHarmonicJson {
            re: HarmonicJson::from_harmonic(&p.re()),
            im: HarmonicJson::from_harmonic(&p.im()),
        }
    }

    pub fn into_harmonic(self) -> Result<ComplexHarmonic, String> {
        let re = self.re.into_harmonic()?;
        let im = self.im.into_harmonic()?;
        ComplexHarmonic::from_parts(&re, &im).map_err(|e| e.to_string())
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct ConstructInput {
    pub degree: usize,
    pub points: Vec<[f64; 3]>,
    pub y: [f64; 3],
}

#[derive(Clone, Debug, Deserialize)]
pub struct InterpolateInput {
    pub degree: usize,
    pub points: Vec<[f64; 3]>,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct PairInput {
    pub u: HarmonicJson,
    pub v: HarmonicJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolesJson {
    pub degree: usize,
    /// Each root line as [re z1, im z1, re z2, im z2].
    pub roots: Vec<[f64; 4]>,
    #[serde(default)]
    pub multiplicities: Vec<usize>,
    pub distinct: bool,
}

impl PolesJson {
    pub fn from_pole_set(degree: usize, ps: &PoleSet) -> Self {
        PolesJson {
            degree,
            roots: ps
                .representatives
                .iter()
                .map(|z| [z[0].re, z[0].im, z[1].re, z[1].im])
                .collect(),
            multiplicities: ps.multiplicities.clone(),
            distinct: ps.distinct,
        }
    }

    pub fn into_pole_set(self) -> PoleSet {
        let representatives: Vec<[Complex64; 2]> = self
            .roots
            .iter()
            .map(|r| [Complex64::new(r[0], r[1]), Complex64::new(r[2], r[3])])
            .collect();
        let multiplicities = if self.multiplicities.is_empty() {
            vec![1; representatives.len()]
        } else {
            self.multiplicities
        };
        let distinct = multiplicities.iter().all(|&m| m == 1);
        PoleSet {
            representatives,
            multiplicities,
            distinct,
        }
    }
}

pub fn point_to_array(p: &SpherePoint) -> [f64; 3] {
    [p.x(), p.y(), p.z()]
}

pub fn point_from_array(a: [f64; 3]) -> Result<SpherePoint, String> {
    SpherePoint::new(a[0], a[1], a[2]).map_err(|e| e.to_string())
}
