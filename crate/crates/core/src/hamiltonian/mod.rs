//! Sparse many-body Hamiltonians given as sums of weighted Pauli words.
//!
//! The Pauli term list is the only representation; matrix elements are
//! produced on demand, one column at a time. Terms whose combined action
//! flips the same set of qubits are grouped so that every off-diagonal
//! element of a row is an exact sum over its contributing terms.

mod embedding;
mod sector;

use std::collections::HashMap;
use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::bits::BitConfiguration;
use crate::error::{Error, Result};

pub use embedding::{real_embedding, ComplexAmplitudeOracle, ComplexTableOracle, EmbeddedHamiltonian, EmbeddedOracle};
pub use sector::{is_stoquastic, Sector, StoquasticVerdict, DEFAULT_STATE_CAP};

/// Entries with magnitude at or below this are treated as absent.
pub const ZERO_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn parse(label: &str) -> Result<Self> {
        match label {
            "X" => Ok(Pauli::X),
            "Y" => Ok(Pauli::Y),
            "Z" => Ok(Pauli::Z),
            other => Err(Error::InvalidTerm(format!("unknown Pauli label {other:?}"))),
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        })
    }
}

/// `coefficient · P_{q1} P_{q2} ...` with strictly increasing qubit indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub support: Vec<(usize, Pauli)>,
}

impl PauliTerm {
    pub fn new(coefficient: f64, support: Vec<(usize, Pauli)>) -> Self {
        Self { coefficient, support }
    }

    pub fn y_count(&self) -> usize {
        self.support.iter().filter(|(_, p)| *p == Pauli::Y).count()
    }

    fn validate(&self, n: usize) -> Result<()> {
        if !self.coefficient.is_finite() || self.coefficient == 0.0 {
            return Err(Error::InvalidTerm(format!(
                "coefficient must be finite and nonzero, got {}",
                self.coefficient
            )));
        }
        for w in self.support.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::InvalidTerm(format!(
                    "support indices must be strictly increasing: {:?}",
                    self.support
                )));
            }
        }
        if let Some(&(q, _)) = self.support.last() {
            if q >= n {
                return Err(Error::InvalidTerm(format!("qubit {q} out of range for n = {n}")));
            }
        }
        Ok(())
    }
}

/// Column access to a real symmetric operator on `n` qubits.
pub trait RowAccess {
    fn n_qubits(&self) -> usize;

    /// Every nonzero `⟨y|H|x⟩`, each target once, diagonal entry first.
    fn row(&self, x: &BitConfiguration) -> Result<Vec<(BitConfiguration, f64)>>;

    /// Upper bound on the number of off-diagonal entries in any row.
    fn max_row_degree(&self) -> usize;

    /// Upper bound on the operator norm.
    fn norm_bound(&self) -> f64;

    fn entry(&self, x: &BitConfiguration, y: &BitConfiguration) -> Result<f64> {
        Ok(self.row(x)?.into_iter().find(|(z, _)| z == y).map_or(0.0, |(_, v)| v))
    }
}

impl<T: RowAccess + ?Sized> RowAccess for &T {
    fn n_qubits(&self) -> usize {
        (**self).n_qubits()
    }

    fn row(&self, x: &BitConfiguration) -> Result<Vec<(BitConfiguration, f64)>> {
        (**self).row(x)
    }

    fn max_row_degree(&self) -> usize {
        (**self).max_row_degree()
    }

    fn norm_bound(&self) -> f64 {
        (**self).norm_bound()
    }

    fn entry(&self, x: &BitConfiguration, y: &BitConfiguration) -> Result<f64> {
        (**self).entry(x, y)
    }
}

#[derive(Debug, Clone)]
struct WordAction {
    coefficient: f64,
    imaginary: bool,
    phase_mask: BitConfiguration,
}

#[derive(Debug, Clone)]
struct FlipGroup {
    flip: BitConfiguration,
    actions: Vec<WordAction>,
}

impl FlipGroup {
    /// `(Re, Im)` of `⟨x ⊕ flip| Σ_k c_k P_k |x⟩`.
    #[inline]
    fn value(&self, x: &BitConfiguration) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for a in &self.actions {
            let v = if x.and_parity(&a.phase_mask) {
                -a.coefficient
            } else {
                a.coefficient
            };
            if a.imaginary {
                im += v;
            } else {
                re += v;
            }
        }
        (re, im)
    }
}

/// A Pauli-sum operator. Real (every term has an even number of `Y`
/// factors) operators feed the fixed-node pipeline directly; others only
/// through [`real_embedding`].
#[derive(Debug, Clone)]
pub struct SparseHamiltonian {
    n: usize,
    terms: Vec<PauliTerm>,
    locality: usize,
    real: bool,
    diagonal: FlipGroup,
    groups: Vec<FlipGroup>,
    group_index: HashMap<BitConfiguration, usize>,
}

impl SparseHamiltonian {
    pub fn new(n: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        for t in &terms {
            t.validate(n)?;
        }
        let locality = terms.iter().map(|t| t.support.len()).max().unwrap_or(0);
        let real = terms.iter().all(|t| t.y_count() % 2 == 0);

        let mut diagonal = FlipGroup {
            flip: BitConfiguration::zeros(n),
            actions: Vec::new(),
        };
        let mut groups: Vec<FlipGroup> = Vec::new();
        let mut group_index = HashMap::new();
        for t in &terms {
            let mut flip = BitConfiguration::zeros(n);
            let mut phase_mask = BitConfiguration::zeros(n);
            for &(q, p) in &t.support {
                match p {
                    Pauli::X => flip.set(q, true),
                    Pauli::Y => {
                        flip.set(q, true);
                        phase_mask.set(q, true);
                    }
                    Pauli::Z => phase_mask.set(q, true),
                }
            }
            // Y = i X Z, so a word with m Y factors carries i^m (-1)^{x·phase_mask}
            let m = t.y_count() % 4;
            let coefficient = if m >= 2 { -t.coefficient } else { t.coefficient };
            let action = WordAction {
                coefficient,
                imaginary: m % 2 == 1,
                phase_mask,
            };
            if flip.is_zero() {
                diagonal.actions.push(action);
            } else {
                let k = *group_index.entry(flip.clone()).or_insert_with(|| {
                    groups.push(FlipGroup {
                        flip: flip.clone(),
                        actions: Vec::new(),
                    });
                    groups.len() - 1
                });
                groups[k].actions.push(action);
            }
        }
        Ok(Self {
            n,
            terms,
            locality,
            real,
            diagonal,
            groups,
            group_index,
        })
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn locality(&self) -> usize {
        self.locality
    }

    /// Whether every term has an even number of `Y` factors.
    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Subset of terms with an even (`odd == false`) or odd number of `Y`s.
    pub(crate) fn y_parity_part(&self, odd: bool) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .filter(|t| (t.y_count() % 2 == 1) == odd)
            .cloned()
            .collect();
        Self::new(self.n, terms)
    }

    /// Complex column: every `(y, Re, Im)` with a nonzero entry, diagonal first.
    pub(crate) fn complex_row(&self, x: &BitConfiguration) -> Vec<(BitConfiguration, f64, f64)> {
        let (re, im) = self.diagonal.value(x);
        let mut out = Vec::with_capacity(self.groups.len() + 1);
        out.push((x.clone(), re, im));
        for g in &self.groups {
            let (re, im) = g.value(x);
            if re.abs() > ZERO_THRESHOLD || im.abs() > ZERO_THRESHOLD {
                out.push((x.xor(&g.flip), re, im));
            }
        }
        out
    }

    pub fn from_json_reader(n: usize, reader: impl Read) -> Result<Self> {
        let records: Vec<TermRecord> = serde_json::from_reader(reader)?;
        let terms = records
            .into_iter()
            .map(TermRecord::into_term)
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, terms)
    }

    pub fn from_json_str(n: usize, text: &str) -> Result<Self> {
        Self::from_json_reader(n, text.as_bytes())
    }

    pub fn to_json(&self) -> Result<String> {
        let records: Vec<TermRecord> = self
            .terms
            .iter()
            .map(|t| TermRecord {
                coeff: t.coefficient,
                paulis: t.support.iter().map(|&(q, p)| (q, p.to_string())).collect(),
            })
            .collect();
        Ok(serde_json::to_string(&records)?)
    }
}

impl RowAccess for SparseHamiltonian {
    fn n_qubits(&self) -> usize {
        self.n
    }

    fn row(&self, x: &BitConfiguration) -> Result<Vec<(BitConfiguration, f64)>> {
        if !self.real {
            return Err(Error::NonRealHamiltonian);
        }
        let mut out = Vec::with_capacity(self.groups.len() + 1);
        out.push((x.clone(), self.diagonal.value(x).0));
        for g in &self.groups {
            let v = g.value(x).0;
            if v.abs() > ZERO_THRESHOLD {
                out.push((x.xor(&g.flip), v));
            }
        }
        Ok(out)
    }

    fn max_row_degree(&self) -> usize {
        self.groups.len()
    }

    /// `Σ_a |c_a|`; each Pauli word has unit operator norm.
    fn norm_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }

    fn entry(&self, x: &BitConfiguration, y: &BitConfiguration) -> Result<f64> {
        if !self.real {
            return Err(Error::NonRealHamiltonian);
        }
        let flip = x.xor(y);
        let v = if flip.is_zero() {
            self.diagonal.value(x).0
        } else {
            match self.group_index.get(&flip) {
                Some(&k) => self.groups[k].value(x).0,
                None => 0.0,
            }
        };
        Ok(if v.abs() > ZERO_THRESHOLD || x == y { v } else { 0.0 })
    }
}

/// One record of the JSON term-list file format:
/// `{"coeff": float, "paulis": [[site, "X"|"Y"|"Z"], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct TermRecord {
    coeff: f64,
    paulis: Vec<(usize, String)>,
}

impl TermRecord {
    fn into_term(self) -> Result<PauliTerm> {
        let support = self
            .paulis
            .into_iter()
            .map(|(q, l)| Ok((q, Pauli::parse(&l)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliTerm::new(self.coeff, support))
    }
}
