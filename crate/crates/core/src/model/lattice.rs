use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SYMMETRY_TOL;
use crate::{Error, Result};

pub const HARTREE_TO_EV: f64 = 27.211386245988;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnergyUnit {
    #[default]
    #[serde(rename = "eV")]
    ElectronVolt,
    #[serde(rename = "hartree")]
    Hartree,
}

impl EnergyUnit {
    /// Multiplicative factor taking a value in this unit to eV.
    pub fn to_ev(self) -> f64 {
        match self {
            EnergyUnit::ElectronVolt => 1.0,
            EnergyUnit::Hartree => HARTREE_TO_EV,
        }
    }
}

/// Extended-Hubbard Hamiltonian at a single k-point:
///
/// `H = Σ_{pq,σ} t_pq a†_pσ a_qσ + Σ_p U_p n_p↑ n_p↓ + Σ_{pq,στ} V_pq n_pσ n_qτ`
///
/// with the inter-site sum over ordered pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeHamiltonian {
    n_orbitals: usize,
    hopping: DMatrix<Complex64>,
    u_intra: Vec<f64>,
    v_inter: DMatrix<f64>,
    kpoint_label: String,
    unit: EnergyUnit,
    orbital_labels: Option<Vec<String>>,
}

impl LatticeHamiltonian {
    pub fn new(
        hopping: DMatrix<Complex64>,
        u_intra: Vec<f64>,
        v_inter: DMatrix<f64>,
    ) -> Result<Self> {
        let lat = LatticeHamiltonian {
            n_orbitals: hopping.nrows(),
            hopping,
            u_intra,
            v_inter,
            kpoint_label: "Gamma".to_string(),
            unit: EnergyUnit::ElectronVolt,
            orbital_labels: None,
        };
        lat.validate("lattice")?;
        Ok(lat)
    }

    /// Convenience constructor for real hopping matrices.
    pub fn from_real(hopping: DMatrix<f64>, u_intra: Vec<f64>, v_inter: DMatrix<f64>) -> Result<Self> {
        Self::new(hopping.map(|x| Complex64::new(x, 0.0)), u_intra, v_inter)
    }

    /// Hubbard model on an open chain with uniform nearest-neighbour hopping `t`,
    /// on-site `u` and nearest-neighbour `v`.
    pub fn chain(n_sites: usize, t: f64, u: f64, v: f64) -> Result<Self> {
        let mut hop = DMatrix::zeros(n_sites, n_sites);
        let mut vmat = DMatrix::zeros(n_sites, n_sites);
        for p in 0..n_sites.saturating_sub(1) {
            hop[(p, p + 1)] = t;
            hop[(p + 1, p)] = t;
            vmat[(p, p + 1)] = v;
            vmat[(p + 1, p)] = v;
        }
        Self::from_real(hop, vec![u; n_sites], vmat)
    }

    pub fn with_kpoint(mut self, label: impl Into<String>) -> Self {
        self.kpoint_label = label.into();
        self
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n_orbitals {
            return Err(Error::validation(
                "labels",
                format!(
                    "dimension mismatch: {} labels for {} orbitals",
                    labels.len(),
                    self.n_orbitals
                ),
            ));
        }
        self.orbital_labels = Some(labels);
        Ok(self)
    }

    pub fn n_orbitals(&self) -> usize {
        self.n_orbitals
    }

    pub fn hopping(&self) -> &DMatrix<Complex64> {
        &self.hopping
    }

    pub fn u_intra(&self) -> &[f64] {
        &self.u_intra
    }

    pub fn v_inter(&self) -> &DMatrix<f64> {
        &self.v_inter
    }

    pub fn kpoint_label(&self) -> &str {
        &self.kpoint_label
    }

    pub fn unit(&self) -> EnergyUnit {
        self.unit
    }

    pub fn orbital_labels(&self) -> Option<&[String]> {
        self.orbital_labels.as_deref()
    }

    /// Label of the pair `(p, q)`, e.g. `"Zr 4d–O 2p"`, when orbital labels exist.
    pub fn pair_label(&self, p: usize, q: usize) -> Option<String> {
        let labels = self.orbital_labels.as_ref()?;
        Some(format!("{}–{}", labels.get(p)?, labels.get(q)?))
    }

    /// True when every hopping entry is real within the symmetry tolerance.
    pub fn is_real(&self) -> bool {
        self.hopping.iter().all(|z| z.im.abs() <= SYMMETRY_TOL)
    }

    /// Copy with every on-site interaction set to zero.
    pub fn without_u(&self) -> Self {
        let mut out = self.clone();
        out.u_intra.iter_mut().for_each(|u| *u = 0.0);
        out
    }

    /// Copy with every inter-site interaction set to zero.
    pub fn without_v(&self) -> Self {
        let mut out = self.clone();
        out.v_inter.fill(0.0);
        out
    }

    /// Rescales all energies to eV and retags the unit.
    fn into_ev(mut self) -> Self {
        let f = self.unit.to_ev();
        if f != 1.0 {
            self.hopping *= Complex64::new(f, 0.0);
            self.u_intra.iter_mut().for_each(|u| *u *= f);
            self.v_inter *= f;
            self.unit = EnergyUnit::ElectronVolt;
        }
        self
    }

    fn validate(&self, origin: &str) -> Result<()> {
        let m = self.n_orbitals;
        if m == 0 {
            return Err(Error::validation(origin, "lattice has no orbitals"));
        }
        if self.hopping.ncols() != m {
            return Err(Error::validation(
                format!("{origin}: hopping"),
                format!("dimension mismatch: {}x{} is not square", m, self.hopping.ncols()),
            ));
        }
        if self.u_intra.len() != m {
            return Err(Error::validation(
                format!("{origin}: u"),
                format!("dimension mismatch: {} entries for {m} orbitals", self.u_intra.len()),
            ));
        }
        if self.v_inter.nrows() != m || self.v_inter.ncols() != m {
            return Err(Error::validation(
                format!("{origin}: v"),
                format!(
                    "dimension mismatch: {}x{} for {m} orbitals",
                    self.v_inter.nrows(),
                    self.v_inter.ncols()
                ),
            ));
        }
        for p in 0..m {
            for q in 0..m {
                let a = self.hopping[(p, q)];
                let b = self.hopping[(q, p)].conj();
                if (a - b).norm() > SYMMETRY_TOL || !a.re.is_finite() || !a.im.is_finite() {
                    return Err(Error::validation(
                        format!("{origin}: hopping[{p}][{q}]"),
                        format!("non-Hermitian hopping: t_{p}{q}={a} but conj(t_{q}{p})={b}"),
                    ));
                }
                if (self.v_inter[(p, q)] - self.v_inter[(q, p)]).abs() > SYMMETRY_TOL {
                    return Err(Error::validation(
                        format!("{origin}: v[{p}][{q}]"),
                        "inter-site interaction matrix is not symmetric",
                    ));
                }
            }
            if self.v_inter[(p, p)] != 0.0 {
                return Err(Error::validation(
                    format!("{origin}: v[{p}][{p}]"),
                    "inter-site interaction must have a zero diagonal",
                ));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum HoppingEntry {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Debug, Serialize, Deserialize)]
struct LatticeFile {
    n_orbitals: usize,
    #[serde(default)]
    unit: EnergyUnit,
    #[serde(default = "default_kpoint")]
    kpoint: String,
    hopping: Vec<Vec<HoppingEntry>>,
    u: Vec<f64>,
    v: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

fn default_kpoint() -> String {
    "Gamma".to_string()
}

/// Parses the lattice JSON schema; `origin` prefixes every error location.
pub fn parse_lattice(text: &str, origin: &str) -> Result<LatticeHamiltonian> {
    let file: LatticeFile = serde_json::from_str(text).map_err(|e| {
        Error::parse(
            format!("{origin}:{}:{}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    let m = file.n_orbitals;
    if file.hopping.len() != m || file.hopping.iter().any(|row| row.len() != m) {
        return Err(Error::validation(
            format!("{origin}: hopping"),
            format!("dimension mismatch: expected {m}x{m} entries"),
        ));
    }
    if file.v.len() != m || file.v.iter().any(|row| row.len() != m) {
        return Err(Error::validation(
            format!("{origin}: v"),
            format!("dimension mismatch: expected {m}x{m} entries"),
        ));
    }
    let hopping = DMatrix::from_fn(m, m, |p, q| match file.hopping[p][q] {
        HoppingEntry::Real(x) => Complex64::new(x, 0.0),
        HoppingEntry::Complex([re, im]) => Complex64::new(re, im),
    });
    let v_inter = DMatrix::from_fn(m, m, |p, q| file.v[p][q]);
    let lat = LatticeHamiltonian {
        n_orbitals: m,
        hopping,
        u_intra: file.u,
        v_inter,
        kpoint_label: file.kpoint,
        unit: file.unit,
        orbital_labels: None,
    };
    lat.validate(origin)?;
    let lat = match file.labels {
        Some(labels) => lat
            .with_labels(labels)
            .map_err(|e| Error::validation(format!("{origin}: labels"), e.to_string()))?,
        None => lat,
    };
    Ok(lat.into_ev())
}

/// Reads a lattice JSON file, converting energies to eV.
pub fn load_lattice(path: impl AsRef<Path>) -> Result<LatticeHamiltonian> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_lattice(&text, &path.display().to_string())
}

pub fn save_lattice(lat: &LatticeHamiltonian, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let m = lat.n_orbitals;
    let file = LatticeFile {
        n_orbitals: m,
        unit: lat.unit,
        kpoint: lat.kpoint_label.clone(),
        hopping: (0..m)
            .map(|p| {
                (0..m)
                    .map(|q| {
                        let z = lat.hopping[(p, q)];
                        HoppingEntry::Complex([z.re, z.im])
                    })
                    .collect()
            })
            .collect(),
        u: lat.u_intra.clone(),
        v: (0..m).map(|p| (0..m).map(|q| lat.v_inter[(p, q)]).collect()).collect(),
        labels: lat.orbital_labels.clone(),
    };
    let text = serde_json::to_string_pretty(&file)
        .map_err(|e| Error::InvalidInput(format!("cannot serialize lattice: {e}")))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const DIMER: &str = r#"{
        "n_orbitals": 2, "unit": "eV", "kpoint": "Gamma",
        "hopping": [[[0.0, 0.0], [-1.0, 0.0]], [[-1.0, 0.0], [0.0, 0.0]]],
        "u": [4.0, 4.0], "v": [[0.0, 0.0], [0.0, 0.0]]
    }"#;

    #[test]
    fn dimer_parses() {
        let lat = parse_lattice(DIMER, "dimer.json").unwrap();
        assert_eq!(lat.n_orbitals(), 2);
        assert_eq!(lat.hopping()[(0, 1)].re, -1.0);
        assert_eq!(lat.u_intra(), &[4.0, 4.0]);
        assert_eq!(lat.kpoint_label(), "Gamma");
    }

    #[test]
    fn labeled_values_are_stored_verbatim() {
        let text = r#"{
            "n_orbitals": 2, "unit": "eV", "kpoint": "Gamma",
            "hopping": [[0.0, -0.5], [-0.5, 0.0]],
            "u": [3.13, 0.0], "v": [[0.0, 0.64], [0.64, 0.0]],
            "labels": ["Zr 4d", "O 2p"]
        }"#;
        let lat = parse_lattice(text, "zro2.json").unwrap();
        assert_eq!(lat.u_intra()[0], 3.13);
        assert_eq!(lat.v_inter()[(0, 1)], 0.64);
        assert_eq!(lat.orbital_labels().unwrap()[0], "Zr 4d");
        assert_eq!(lat.pair_label(0, 1).unwrap(), "Zr 4d–O 2p");
    }

    #[test]
    fn non_hermitian_hopping_is_rejected_with_location() {
        let text = r#"{
            "n_orbitals": 2, "hopping": [[0.0, 1.0], [0.5, 0.0]],
            "u": [4.0, 4.0], "v": [[0.0, 0.0], [0.0, 0.0]]
        }"#;
        let err = parse_lattice(text, "bad.json").unwrap_err().to_string();
        assert!(err.contains("non-Hermitian hopping"), "{err}");
        assert!(err.contains("bad.json"), "{err}");
        assert!(err.contains("hopping[0][1]"), "{err}");
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let text = r#"{
            "n_orbitals": 2, "hopping": [[0.0, 1.0], [1.0, 0.0]],
            "u": [4.0], "v": [[0.0, 0.0], [0.0, 0.0]]
        }"#;
        let err = parse_lattice(text, "bad.json").unwrap_err().to_string();
        assert!(err.contains("dimension mismatch"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_line_and_column() {
        let err = parse_lattice("{\n \"n_orbitals\": 2,\n oops }", "broken.json")
            .unwrap_err()
            .to_string();
        assert!(err.starts_with("broken.json:3:"), "{err}");
    }

    #[test]
    fn hartree_input_is_converted_to_ev() {
        let text = r#"{
            "n_orbitals": 1, "unit": "hartree", "hopping": [[0.5]],
            "u": [1.0], "v": [[0.0]]
        }"#;
        let lat = parse_lattice(text, "h.json").unwrap();
        assert_eq!(lat.unit(), EnergyUnit::ElectronVolt);
        assert!((lat.u_intra()[0] - HARTREE_TO_EV).abs() < 1e-12);
        assert!((lat.hopping()[(0, 0)].re - 0.5 * HARTREE_TO_EV).abs() < 1e-12);
    }

    #[test]
    fn v_diagonal_must_vanish() {
        let err = LatticeHamiltonian::from_real(
            DMatrix::zeros(2, 2),
            vec![0.0, 0.0],
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
        )
        .unwrap_err();
        assert!(err.to_string().contains("zero diagonal"));
    }
}
