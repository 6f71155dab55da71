use std::path::Path;

use serde::{Deserialize, Serialize};

use super::MeanFieldSolution;
use crate::model::ElectronicIntegrals;
use crate::{Error, Result};

/// Closed-shell opposite-spin doubles amplitudes `t2[i][j][a][b]`, occupied
/// indices `i, j < n_occ`, virtual indices counted from `n_occ`.
#[derive(Clone, Debug, PartialEq)]
pub struct T2Amplitudes {
    n_orbitals: usize,
    n_occ: usize,
    data: Vec<f64>,
}

impl T2Amplitudes {
    pub fn zeros(n_orbitals: usize, n_occ: usize) -> Self {
        let n_vir = n_orbitals - n_occ;
        T2Amplitudes {
            n_orbitals,
            n_occ,
            data: vec![0.0; n_occ * n_occ * n_vir * n_vir],
        }
    }

    pub fn n_orbitals(&self) -> usize {
        self.n_orbitals
    }

    pub fn n_occ(&self) -> usize {
        self.n_occ
    }

    pub fn n_vir(&self) -> usize {
        self.n_orbitals - self.n_occ
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, a: usize, b: usize) -> usize {
        let (o, v) = (self.n_occ, self.n_vir());
        ((i * o + j) * v + a) * v + b
    }

    pub fn get(&self, i: usize, j: usize, a: usize, b: usize) -> f64 {
        self.data[self.offset(i, j, a, b)]
    }

    pub fn set(&mut self, i: usize, j: usize, a: usize, b: usize, value: f64) {
        let k = self.offset(i, j, a, b);
        self.data[k] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| *x == 0.0)
    }
}

#[derive(Serialize, Deserialize)]
struct AmplitudeFile {
    n_orbitals: usize,
    n_occ: usize,
    t2: Vec<Vec<Vec<Vec<f64>>>>,
}

/// Reads amplitudes from the JSON schema
/// `{ "n_orbitals", "n_occ", "t2": [i][j][a][b] }`.
pub fn external_amplitudes(path: impl AsRef<Path>) -> Result<T2Amplitudes> {
    let path = path.as_ref();
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: AmplitudeFile = serde_json::from_str(&text)
        .map_err(|e| Error::parse(format!("{origin}:{}:{}", e.line(), e.column()), e.to_string()))?;
    if file.n_occ > file.n_orbitals {
        return Err(Error::validation(
            &origin,
            format!("shape mismatch: n_occ={} exceeds n_orbitals={}", file.n_occ, file.n_orbitals),
        ));
    }
    let mut t2 = T2Amplitudes::zeros(file.n_orbitals, file.n_occ);
    let (o, v) = (t2.n_occ(), t2.n_vir());
    let shape_err = |what: &str| {
        Error::validation(
            format!("{origin}: t2{what}"),
            format!("shape mismatch: expected [{o}][{o}][{v}][{v}]"),
        )
    };
    if file.t2.len() != o {
        return Err(shape_err(""));
    }
    for (i, plane) in file.t2.iter().enumerate() {
        if plane.len() != o {
            return Err(shape_err(&format!("[{i}]")));
        }
        for (j, block) in plane.iter().enumerate() {
            if block.len() != v {
                return Err(shape_err(&format!("[{i}][{j}]")));
            }
            for (a, row) in block.iter().enumerate() {
                if row.len() != v {
                    return Err(shape_err(&format!("[{i}][{j}][{a}]")));
                }
                for (b, x) in row.iter().enumerate() {
                    t2.set(i, j, a, b, *x);
                }
            }
        }
    }
    Ok(t2)
}

pub fn write_amplitudes(t2: &T2Amplitudes, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (o, v) = (t2.n_occ(), t2.n_vir());
    let file = AmplitudeFile {
        n_orbitals: t2.n_orbitals(),
        n_occ: o,
        t2: (0..o)
            .map(|i| {
                (0..o)
                    .map(|j| (0..v).map(|a| (0..v).map(|b| t2.get(i, j, a, b)).collect()).collect())
                    .collect()
            })
            .collect(),
    };
    let text = serde_json::to_string(&file)
        .map_err(|e| Error::InvalidInput(format!("cannot serialize amplitudes: {e}")))?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Debug)]
pub struct Mp2Result {
    pub t2: T2Amplitudes,
    pub correlation_energy: f64,
}

/// Second-order Møller–Plesset doubles on a converged closed-shell
/// reference. `ints_mo` must be expressed in the mean-field orbital basis.
pub fn mp2_doubles(mf: &MeanFieldSolution, ints_mo: &ElectronicIntegrals) -> Result<Mp2Result> {
    if !mf.sector.is_closed_shell() {
        return Err(Error::InvalidInput(format!(
            "MP2 needs a closed-shell reference, got {}",
            mf.sector
        )));
    }
    if !mf.converged {
        return Err(Error::NonConvergence(
            "MP2 needs a converged mean-field reference".into(),
        ));
    }
    let n = ints_mo.n_orbitals();
    let o = mf.sector.n_alpha;
    let mut t2 = T2Amplitudes::zeros(n, o);
    if o == 0 || o == n {
        return Ok(Mp2Result {
            t2,
            correlation_energy: 0.0,
        });
    }
    let eps = &mf.orbital_energies;
    let gap = eps[o] - eps[o - 1];
    if gap <= 1e-8 {
        return Err(Error::Numerical(format!(
            "degenerate HOMO-LUMO gap ({gap:.3e}); MP2 denominators are singular"
        )));
    }
    let v = n - o;
    let g_os = ints_mo.opposite_spin();
    let g_ss = ints_mo.same_spin();
    let mut energy = 0.0;
    for i in 0..o {
        for j in 0..o {
            for a in 0..v {
                for b in 0..v {
                    let (pa, pb) = (o + a, o + b);
                    let denom = eps[i] + eps[j] - eps[pa] - eps[pb];
                    let k_os = g_os.get(i, pa, j, pb);
                    let t = k_os / denom;
                    t2.set(i, j, a, b, t);
                    let k_ss = g_ss.get(i, pa, j, pb) - g_ss.get(i, pb, j, pa);
                    energy += k_os * t + 0.5 * k_ss * k_ss / denom;
                }
            }
        }
    }
    Ok(Mp2Result {
        t2,
        correlation_energy: energy,
    })
}
