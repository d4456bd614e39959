//! Model construction: Hamiltonians as real-weighted Pauli words, noise
//! parameterizations, reset specifications, and the combined [`ModelConfig`]
//! with validation and a TOML wire format.

use ndarray::{Array1, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{
    bit_at, hermiticity_error, ket_minus, ket_one, ket_plus, ket_zero, tensor, trace, Operator,
    Pauli, C64,
};

/// Max |H − H†| accepted for a materialized Hamiltonian.
pub const HAMILTONIAN_HERMITICITY_TOL: f64 = 1e-12;

/// General single-qubit noise channel.
///
/// `b` is the decay rate of the inversion, `c` the decay rate of the
/// polarization, and `s ∈ [0,1]` the stationary inversion (s = 1/2 is the
/// infinite-temperature point). The channel splits into jump rates
/// `b(1−s)` (σ₋), `b·s` (σ₊) and `(2c−b)/4` (σ_z), which is why `2c ≥ b`
/// is required.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub b: f64,
    pub c: f64,
    pub s: f64,
}

impl NoiseParams {
    pub fn validate(&self) -> Result<()> {
        if !self.b.is_finite() || self.b < 0.0 {
            return Err(Error::validation("noise.b", "must be ≥ 0"));
        }
        if !self.c.is_finite() || self.c < 0.0 {
            return Err(Error::validation("noise.c", "must be ≥ 0"));
        }
        if !(0.0..=1.0).contains(&self.s) {
            return Err(Error::validation("noise.s", "must lie in [0, 1]"));
        }
        if 2.0 * self.c < self.b {
            return Err(Error::validation(
                "noise",
                format!("2C ≥ B violated (B = {}, C = {})", self.b, self.c),
            ));
        }
        Ok(())
    }
}

/// Pure dephasing at rate `gamma`: populations untouched, coherences decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingParams {
    pub gamma: f64,
}

impl DephasingParams {
    pub fn validate(&self) -> Result<()> {
        if !self.gamma.is_finite() || self.gamma < 0.0 {
            return Err(Error::validation("noise.gamma", "must be ≥ 0"));
        }
        Ok(())
    }
}

/// Per-site noise channel of the master equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    Dephasing(DephasingParams),
    General(NoiseParams),
}

impl Noise {
    pub fn dephasing(gamma: f64) -> Self {
        Noise::Dephasing(DephasingParams { gamma })
    }

    pub fn general(b: f64, c: f64, s: f64) -> Self {
        Noise::General(NoiseParams { b, c, s })
    }

    /// Jump rate of the σ₋ channel.
    pub fn decay_rate(&self) -> f64 {
        match self {
            Noise::Dephasing(_) => 0.0,
            Noise::General(p) => p.b * (1.0 - p.s),
        }
    }

    /// Jump rate of the σ₊ channel.
    pub fn excitation_rate(&self) -> f64 {
        match self {
            Noise::Dephasing(_) => 0.0,
            Noise::General(p) => p.b * p.s,
        }
    }

    /// Jump rate of the σ_z channel.
    pub fn dephasing_rate(&self) -> f64 {
        match self {
            Noise::Dephasing(p) => p.gamma / 2.0,
            Noise::General(p) => (2.0 * p.c - p.b) / 4.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Noise::Dephasing(p) => p.validate(),
            Noise::General(p) => p.validate(),
        }
    }
}

/// A single-qubit state a site is reset into, stored as a 2×2 density
/// matrix (pure kets are converted on construction).
#[derive(Debug, Clone, PartialEq)]
pub struct ResetState(Operator);

impl ResetState {
    pub fn from_density(op: Operator) -> Result<Self> {
        let st = ResetState(op);
        st.validate()?;
        Ok(st)
    }

    pub fn from_ket(ket: &Array1<C64>) -> Result<Self> {
        if ket.len() != 2 {
            return Err(Error::invalid("reset ket must have 2 amplitudes"));
        }
        let mut op = Array2::<C64>::zeros((2, 2));
        for j in 0..2 {
            for k in 0..2 {
                op[[j, k]] = ket[j] * ket[k].conj();
            }
        }
        Self::from_density(op)
    }

    pub fn plus() -> Self {
        Self::from_ket(&ket_plus()).unwrap()
    }

    pub fn minus() -> Self {
        Self::from_ket(&ket_minus()).unwrap()
    }

    pub fn zero() -> Self {
        Self::from_ket(&ket_zero()).unwrap()
    }

    pub fn one() -> Self {
        Self::from_ket(&ket_one()).unwrap()
    }

    /// Mixture `p₊|+⟩⟨+| + (1−p₊)|−⟩⟨−|` in the σ_x eigenbasis; this is the
    /// imperfect-reset model where fresh qubits carry some entropy.
    pub fn mixed_pm(p_plus: f64) -> Result<Self> {
        let plus = Self::plus().0;
        let minus = Self::minus().0;
        let op = plus.mapv(|z| z * p_plus) + minus.mapv(|z| z * (1.0 - p_plus));
        Self::from_density(op)
    }

    pub fn density(&self) -> &Operator {
        &self.0
    }

    pub fn validate(&self) -> Result<()> {
        let op = &self.0;
        if op.nrows() != 2 || op.ncols() != 2 {
            return Err(Error::validation("reset.state", "must be 2×2"));
        }
        if hermiticity_error(op) > 1e-10 {
            return Err(Error::validation("reset.state", "not Hermitian"));
        }
        let tr = trace(op);
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(Error::validation("reset.state", "trace must be 1"));
        }
        // 2×2 PSD check in closed form: both eigenvalues t/2 ± √(…) ≥ 0.
        let a = op[[0, 0]].re;
        let d = op[[1, 1]].re;
        let b2 = op[[0, 1]].norm_sqr();
        let mean = 0.5 * (a + d);
        let dev = (0.25 * (a - d) * (a - d) + b2).sqrt();
        if mean - dev < -1e-9 {
            return Err(Error::validation(
                "reset.state",
                "not positive semidefinite",
            ));
        }
        Ok(())
    }
}

/// Reset channel: at rate `rate`, site i is replaced by `states[i-1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResetSpec {
    pub rate: f64,
    states: Vec<ResetState>,
}

impl ResetSpec {
    pub fn uniform(rate: f64, state: ResetState, n_qubits: usize) -> Self {
        ResetSpec {
            rate,
            states: vec![state; n_qubits],
        }
    }

    pub fn per_site(rate: f64, states: Vec<ResetState>) -> Self {
        ResetSpec { rate, states }
    }

    pub fn states(&self) -> &[ResetState] {
        &self.states
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        if !self.rate.is_finite() || self.rate < 0.0 {
            return Err(Error::validation("reset.r", "must be ≥ 0"));
        }
        if self.states.len() != n_qubits {
            return Err(Error::validation(
                "reset.states",
                format!("expected {n_qubits} states, got {}", self.states.len()),
            ));
        }
        for st in &self.states {
            st.validate()?;
        }
        Ok(())
    }

    pub fn with_rate(&self, rate: f64) -> Self {
        ResetSpec {
            rate,
            states: self.states.clone(),
        }
    }
}

/// One site per letter; `I` marks sites the word does not touch. Only
/// Hermitian letters are allowed, so real coefficients give Hermitian terms
/// by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliWord {
    letters: Vec<Pauli>,
}

impl PauliWord {
    pub fn new(letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::invalid("PauliWord: empty"));
        }
        if let Some(bad) = letters.iter().find(|l| !l.is_hermitian()) {
            return Err(Error::invalid(format!(
                "PauliWord: non-Hermitian letter `{}`",
                bad.to_char()
            )));
        }
        Ok(PauliWord { letters })
    }

    /// Parse e.g. `"XIZ"` (site 1 = leftmost letter).
    pub fn parse(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(Pauli::from_char)
            .collect::<Result<Vec<_>>>()?;
        Self::new(letters)
    }

    /// Word with `letter` at the given 1-based sites, identity elsewhere.
    pub fn from_sites(n_qubits: usize, sites: &[(usize, Pauli)]) -> Result<Self> {
        let mut letters = vec![Pauli::I; n_qubits];
        for &(site, p) in sites {
            if site == 0 || site > n_qubits {
                return Err(Error::invalid(format!(
                    "PauliWord: site {site} out of range 1..={n_qubits}"
                )));
            }
            letters[site - 1] = p;
        }
        Self::new(letters)
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn matrix(&self) -> Operator {
        let factors: Vec<Operator> = self.letters.iter().map(|l| l.matrix()).collect();
        tensor(&factors).unwrap()
    }

    /// Bit mask of the sites this word flips (X and Y letters).
    pub fn flip_mask(&self) -> usize {
        let n = self.letters.len();
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, l)| matches!(l, Pauli::X | Pauli::Y))
            .fold(0usize, |m, (i, _)| m | (1 << (n - 1 - i)))
    }

    /// Phase φ(m) in `W|m⟩ = φ(m)|m ⊕ flip_mask⟩`.
    pub fn phase(&self, m: usize) -> C64 {
        let n = self.letters.len();
        let mut phase = C64::new(1.0, 0.0);
        for (i, l) in self.letters.iter().enumerate() {
            let bit = bit_at(m, i + 1, n);
            match l {
                Pauli::I | Pauli::X => {}
                Pauli::Y => {
                    // σ_y|b⟩ = i(−1)^b |1−b⟩
                    phase *= C64::new(0.0, if bit == 0 { 1.0 } else { -1.0 });
                }
                Pauli::Z => {
                    if bit == 1 {
                        phase = -phase;
                    }
                }
                Pauli::Plus | Pauli::Minus => unreachable!("rejected at construction"),
            }
        }
        phase
    }
}

impl std::fmt::Display for PauliWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for l in &self.letters {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianTerm {
    pub coefficient: f64,
    pub word: PauliWord,
}

/// `H = g · Σ_k c_k W_k` with real `c_k` and Hermitian words `W_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    pub n_qubits: usize,
    pub g: f64,
    pub terms: Vec<HamiltonianTerm>,
}

impl HamiltonianSpec {
    pub fn from_terms(n_qubits: usize, g: f64, terms: Vec<HamiltonianTerm>) -> Result<Self> {
        let spec = HamiltonianSpec { n_qubits, g, terms };
        spec.validate()?;
        Ok(spec)
    }

    /// `H = g Σ_{(i,j)} σ_z^{(i)} σ_z^{(j)}`; diagonal in the bit-string
    /// basis.
    pub fn ising(g: f64, pairs: &[(usize, usize)], n_qubits: usize) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        let mut terms = Vec::with_capacity(pairs.len());
        for &(i, j) in pairs {
            if i == j {
                return Err(Error::invalid(format!("ising: degenerate pair ({i},{j})")));
            }
            let key = (i.min(j), i.max(j));
            if !seen.insert(key) {
                return Err(Error::invalid(format!("ising: duplicate pair ({i},{j})")));
            }
            let word = PauliWord::from_sites(n_qubits, &[(i, Pauli::Z), (j, Pauli::Z)])?;
            terms.push(HamiltonianTerm {
                coefficient: 1.0,
                word,
            });
        }
        Self::from_terms(n_qubits, g, terms)
    }

    /// Ising couplings on all `C(N,2)` pairs.
    pub fn ising_all_pairs(g: f64, n_qubits: usize) -> Result<Self> {
        let mut pairs = Vec::new();
        for i in 1..=n_qubits {
            for j in (i + 1)..=n_qubits {
                pairs.push((i, j));
            }
        }
        Self::ising(g, &pairs, n_qubits)
    }

    /// `H = g (σ_x σ_x + σ_y σ_y + σ_z σ_z)` on two qubits.
    pub fn heisenberg(g: f64) -> Result<Self> {
        let terms = [Pauli::X, Pauli::Y, Pauli::Z]
            .into_iter()
            .map(|p| {
                Ok(HamiltonianTerm {
                    coefficient: 1.0,
                    word: PauliWord::from_sites(2, &[(1, p), (2, p)])?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(2, g, terms)
    }

    /// Two-qubit anisotropic exchange with a transverse field:
    /// `g (0.7 σ_x σ_x + 0.3 σ_y σ_y + σ_z σ_z + 0.5 (σ_x⊗I + I⊗σ_x))`.
    pub fn xyz_field(g: f64) -> Result<Self> {
        let mk = |coefficient: f64, sites: &[(usize, Pauli)]| -> Result<HamiltonianTerm> {
            Ok(HamiltonianTerm {
                coefficient,
                word: PauliWord::from_sites(2, sites)?,
            })
        };
        let terms = vec![
            mk(0.7, &[(1, Pauli::X), (2, Pauli::X)])?,
            mk(0.3, &[(1, Pauli::Y), (2, Pauli::Y)])?,
            mk(1.0, &[(1, Pauli::Z), (2, Pauli::Z)])?,
            mk(0.5, &[(1, Pauli::X)])?,
            mk(0.5, &[(2, Pauli::X)])?,
        ];
        Self::from_terms(2, g, terms)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 {
            return Err(Error::validation("hamiltonian.n_qubits", "must be ≥ 1"));
        }
        if !self.g.is_finite() || self.g < 0.0 {
            return Err(Error::validation("hamiltonian.g", "must be ≥ 0"));
        }
        for t in &self.terms {
            if !t.coefficient.is_finite() {
                return Err(Error::validation(
                    "hamiltonian.terms",
                    "coefficient must be a finite real number",
                ));
            }
            if t.word.len() != self.n_qubits {
                return Err(Error::validation(
                    "hamiltonian.terms",
                    format!(
                        "word `{}` addresses {} sites, expected {}",
                        t.word,
                        t.word.len(),
                        self.n_qubits
                    ),
                ));
            }
        }
        // Hermitian by construction; a materialization check guards against
        // future term kinds.
        if self.n_qubits <= 7 {
            let h = self.matrix();
            let dev = hermiticity_error(&h);
            if dev > HAMILTONIAN_HERMITICITY_TOL {
                return Err(Error::validation(
                    "hamiltonian",
                    format!("materialized H deviates from Hermitian by {dev:.3e}"),
                ));
            }
        }
        Ok(())
    }

    /// Dense matrix `g Σ c_k W_k`.
    pub fn matrix(&self) -> Operator {
        let dim = 1usize << self.n_qubits;
        let mut h = Array2::<C64>::zeros((dim, dim));
        for t in &self.terms {
            let w = t.word.matrix();
            h = h + w.mapv(|z| z * (self.g * t.coefficient));
        }
        h
    }

    pub fn with_g(&self, g: f64) -> Self {
        HamiltonianSpec {
            n_qubits: self.n_qubits,
            g,
            terms: self.terms.clone(),
        }
    }
}

/// Full specification of one master equation.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub n_qubits: usize,
    pub hamiltonian: HamiltonianSpec,
    pub noise: Noise,
    pub reset: ResetSpec,
}

impl ModelConfig {
    pub fn new(
        n_qubits: usize,
        hamiltonian: HamiltonianSpec,
        noise: Noise,
        reset: ResetSpec,
    ) -> Self {
        ModelConfig {
            n_qubits,
            hamiltonian,
            noise,
            reset,
        }
    }

    /// Check every component invariant; returns `self` unchanged on success.
    pub fn validate(&self) -> Result<&Self> {
        if self.n_qubits == 0 {
            return Err(Error::validation("system.n_qubits", "must be ≥ 1"));
        }
        if self.hamiltonian.n_qubits != self.n_qubits {
            return Err(Error::validation(
                "hamiltonian.n_qubits",
                format!(
                    "{} does not match system.n_qubits = {}",
                    self.hamiltonian.n_qubits, self.n_qubits
                ),
            ));
        }
        self.hamiltonian.validate()?;
        self.noise.validate()?;
        self.reset.validate(self.n_qubits)?;
        Ok(self)
    }

    /// Copy with a new Hamiltonian coupling and reset rate; the workhorse of
    /// parameter sweeps.
    pub fn with_rates(&self, g: f64, r: f64) -> Self {
        ModelConfig {
            n_qubits: self.n_qubits,
            hamiltonian: self.hamiltonian.with_g(g),
            noise: self.noise,
            reset: self.reset.with_rate(r),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let dto: ConfigDto = toml::from_str(text)
            .map_err(|e| Error::validation("config", format!("TOML parse error: {e}")))?;
        dto.into_config()
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(&ConfigDto::from_config(self))
            .expect("config serialization cannot fail")
    }
}

/// Random valid model on `n_qubits`, spanning Hamiltonian kinds, both noise
/// parameterizations and pure or mixed reset states. Used by the CP test
/// harness and property tests.
pub fn random_config<R: Rng + ?Sized>(rng: &mut R, n_qubits: usize) -> ModelConfig {
    let g: f64 = rng.random_range(0.0..3.0);
    let hamiltonian = if n_qubits == 2 && rng.random_bool(0.5) {
        match rng.random_range(0..3) {
            0 => HamiltonianSpec::heisenberg(g).unwrap(),
            1 => HamiltonianSpec::xyz_field(g).unwrap(),
            _ => HamiltonianSpec::ising(g, &[(1, 2)], 2).unwrap(),
        }
    } else {
        // Generic 2-local word soup.
        let paulis = [Pauli::X, Pauli::Y, Pauli::Z];
        let mut terms = Vec::new();
        for i in 1..=n_qubits {
            for j in (i + 1)..=n_qubits {
                if rng.random_bool(0.7) {
                    let pi = paulis[rng.random_range(0..3)];
                    let pj = paulis[rng.random_range(0..3)];
                    terms.push(HamiltonianTerm {
                        coefficient: rng.random_range(-1.5..1.5),
                        word: PauliWord::from_sites(n_qubits, &[(i, pi), (j, pj)]).unwrap(),
                    });
                }
            }
            if rng.random_bool(0.4) {
                let p = paulis[rng.random_range(0..3)];
                terms.push(HamiltonianTerm {
                    coefficient: rng.random_range(-1.0..1.0),
                    word: PauliWord::from_sites(n_qubits, &[(i, p)]).unwrap(),
                });
            }
        }
        if terms.is_empty() {
            terms.push(HamiltonianTerm {
                coefficient: 1.0,
                word: PauliWord::from_sites(n_qubits, &[(1, Pauli::Z)]).unwrap(),
            });
        }
        HamiltonianSpec::from_terms(n_qubits, g, terms).unwrap()
    };

    let noise = if rng.random_bool(0.5) {
        Noise::dephasing(rng.random_range(0.0..2.0))
    } else {
        let b: f64 = rng.random_range(0.0..2.0);
        let c: f64 = rng.random_range(b / 2.0..b / 2.0 + 2.0);
        Noise::general(b, c, rng.random_range(0.0..1.0))
    };

    let r: f64 = rng.random_range(0.0..3.0);
    let states = (0..n_qubits)
        .map(|_| {
            if rng.random_bool(0.7) {
                // Random pure state on the Bloch sphere.
                let theta: f64 = rng.random_range(0.0..std::f64::consts::PI);
                let phi: f64 = rng.random_range(0.0..2.0 * std::f64::consts::PI);
                let ket = Array1::from_vec(vec![
                    C64::new((theta / 2.0).cos(), 0.0),
                    C64::from_polar((theta / 2.0).sin(), phi),
                ]);
                ResetState::from_ket(&ket).unwrap()
            } else {
                ResetState::mixed_pm(rng.random_range(0.5..1.0)).unwrap()
            }
        })
        .collect();
    let reset = ResetSpec::per_site(r, states);

    let config = ModelConfig::new(n_qubits, hamiltonian, noise, reset);
    config.validate().expect("random config must be valid");
    config
}

// --- TOML wire format -----------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDto {
    system: SystemDto,
    hamiltonian: HamiltonianDto,
    noise: NoiseDto,
    reset: ResetDto,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemDto {
    n_qubits: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HamiltonianDto {
    kind: String,
    g: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pairs: Option<PairsDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    terms: Option<Vec<TermDto>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum PairsDto {
    All(String),
    List(Vec<[usize; 2]>),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermDto {
    coeff: f64,
    word: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseDto {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    s: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ResetDto {
    r: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<StateDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    states: Option<Vec<StateDto>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum StateDto {
    Named(String),
    Vector { vec: [[f64; 2]; 2] },
    DiagPm { diag_pm: [f64; 2] },
    Matrix { matrix: [[[f64; 2]; 2]; 2] },
}

impl StateDto {
    fn into_state(self) -> Result<ResetState> {
        match self {
            StateDto::Named(name) => match name.as_str() {
                "plus" => Ok(ResetState::plus()),
                "minus" => Ok(ResetState::minus()),
                "zero" => Ok(ResetState::zero()),
                "one" => Ok(ResetState::one()),
                other => Err(Error::validation(
                    "reset.state",
                    format!("unknown state name `{other}` (use plus|minus|zero|one)"),
                )),
            },
            StateDto::Vector { vec } => {
                let ket = Array1::from_vec(vec![
                    C64::new(vec[0][0], vec[0][1]),
                    C64::new(vec[1][0], vec[1][1]),
                ]);
                let norm: f64 = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if norm < 1e-14 {
                    return Err(Error::validation("reset.state", "zero vector"));
                }
                ResetState::from_ket(&ket.mapv(|z| z / norm))
            }
            StateDto::DiagPm { diag_pm } => {
                let sum = diag_pm[0] + diag_pm[1];
                if (sum - 1.0).abs() > 1e-10 {
                    return Err(Error::validation("reset.state", "diag_pm must sum to 1"));
                }
                ResetState::mixed_pm(diag_pm[0])
            }
            StateDto::Matrix { matrix } => {
                let mut op = Array2::<C64>::zeros((2, 2));
                for j in 0..2 {
                    for k in 0..2 {
                        op[[j, k]] = C64::new(matrix[j][k][0], matrix[j][k][1]);
                    }
                }
                ResetState::from_density(op)
            }
        }
    }

    fn from_state(st: &ResetState) -> Self {
        let op = st.density();
        let mut matrix = [[[0.0; 2]; 2]; 2];
        for j in 0..2 {
            for k in 0..2 {
                matrix[j][k] = [op[[j, k]].re, op[[j, k]].im];
            }
        }
        StateDto::Matrix { matrix }
    }
}

impl ConfigDto {
    fn into_config(self) -> Result<ModelConfig> {
        let n = self.system.n_qubits;

        let hamiltonian = match self.hamiltonian.kind.as_str() {
            "ising" => match self.hamiltonian.pairs {
                None | Some(PairsDto::All(_)) => {
                    if let Some(PairsDto::All(ref s)) = self.hamiltonian.pairs {
                        if s != "all" {
                            return Err(Error::validation(
                                "hamiltonian.pairs",
                                format!("expected \"all\" or a pair list, got `{s}`"),
                            ));
                        }
                    }
                    HamiltonianSpec::ising_all_pairs(self.hamiltonian.g, n)?
                }
                Some(PairsDto::List(pairs)) => {
                    let pairs: Vec<(usize, usize)> = pairs.iter().map(|p| (p[0], p[1])).collect();
                    HamiltonianSpec::ising(self.hamiltonian.g, &pairs, n)?
                }
            },
            "heisenberg" => {
                if n != 2 {
                    return Err(Error::validation(
                        "hamiltonian.kind",
                        "heisenberg preset is two-qubit",
                    ));
                }
                HamiltonianSpec::heisenberg(self.hamiltonian.g)?
            }
            "xyz-field" => {
                if n != 2 {
                    return Err(Error::validation(
                        "hamiltonian.kind",
                        "xyz-field preset is two-qubit",
                    ));
                }
                HamiltonianSpec::xyz_field(self.hamiltonian.g)?
            }
            "pauli-sum" => {
                let terms = self
                    .hamiltonian
                    .terms
                    .ok_or_else(|| {
                        Error::validation("hamiltonian.terms", "required for pauli-sum")
                    })?
                    .into_iter()
                    .map(|t| {
                        Ok(HamiltonianTerm {
                            coefficient: t.coeff,
                            word: PauliWord::parse(&t.word)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                HamiltonianSpec::from_terms(n, self.hamiltonian.g, terms)?
            }
            other => {
                return Err(Error::validation(
                    "hamiltonian.kind",
                    format!("unknown kind `{other}` (ising|heisenberg|xyz-field|pauli-sum)"),
                ))
            }
        };

        let noise =
            match self.noise.kind.as_str() {
                "dephasing" => {
                    let gamma = self.noise.gamma.ok_or_else(|| {
                        Error::validation("noise.gamma", "required for dephasing")
                    })?;
                    Noise::dephasing(gamma)
                }
                "general" => {
                    let b = self.noise.b.ok_or_else(|| {
                        Error::validation("noise.b", "required for general noise")
                    })?;
                    let c = self.noise.c.ok_or_else(|| {
                        Error::validation("noise.c", "required for general noise")
                    })?;
                    let s = self.noise.s.ok_or_else(|| {
                        Error::validation("noise.s", "required for general noise")
                    })?;
                    Noise::general(b, c, s)
                }
                other => {
                    return Err(Error::validation(
                        "noise.kind",
                        format!("unknown kind `{other}` (dephasing|general)"),
                    ))
                }
            };

        let reset = match (self.reset.state, self.reset.states) {
            (Some(st), None) => ResetSpec::uniform(self.reset.r, st.into_state()?, n),
            (None, Some(list)) => {
                let states = list
                    .into_iter()
                    .map(|s| s.into_state())
                    .collect::<Result<Vec<_>>>()?;
                ResetSpec::per_site(self.reset.r, states)
            }
            (None, None) => ResetSpec::uniform(self.reset.r, ResetState::plus(), n),
            (Some(_), Some(_)) => {
                return Err(Error::validation(
                    "reset",
                    "give either `state` or `states`, not both",
                ))
            }
        };

        let config = ModelConfig::new(n, hamiltonian, noise, reset);
        config.validate()?;
        Ok(config)
    }

    fn from_config(config: &ModelConfig) -> Self {
        let terms = config
            .hamiltonian
            .terms
            .iter()
            .map(|t| TermDto {
                coeff: t.coefficient,
                word: t.word.to_string(),
            })
            .collect();
        let noise = match config.noise {
            Noise::Dephasing(p) => NoiseDto {
                kind: "dephasing".into(),
                gamma: Some(p.gamma),
                b: None,
                c: None,
                s: None,
            },
            Noise::General(p) => NoiseDto {
                kind: "general".into(),
                gamma: None,
                b: Some(p.b),
                c: Some(p.c),
                s: Some(p.s),
            },
        };
        ConfigDto {
            system: SystemDto {
                n_qubits: config.n_qubits,
            },
            hamiltonian: HamiltonianDto {
                kind: "pauli-sum".into(),
                g: config.hamiltonian.g,
                pairs: None,
                terms: Some(terms),
            },
            noise,
            reset: ResetDto {
                r: config.reset.rate,
                state: None,
                states: Some(
                    config
                        .reset
                        .states()
                        .iter()
                        .map(StateDto::from_state)
                        .collect(),
                ),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{embed_pauli, max_abs_diff, sigma_z};
    use approx::assert_abs_diff_eq;
    use ndarray_linalg::{Eigh, UPLO};

    #[test]
    fn ising_single_pair_matrix() {
        let h = HamiltonianSpec::ising(2.5, &[(1, 2)], 2).unwrap().matrix();
        let expected = ndarray::Array2::from_diag(&Array1::from_vec(vec![
            C64::new(2.5, 0.0),
            C64::new(-2.5, 0.0),
            C64::new(-2.5, 0.0),
            C64::new(2.5, 0.0),
        ]));
        assert!(max_abs_diff(&h, &expected) < 1e-14);
    }

    #[test]
    fn ising_all_pairs_term_count() {
        let h = HamiltonianSpec::ising_all_pairs(1.0, 5).unwrap();
        assert_eq!(h.terms.len(), 10);
    }

    #[test]
    fn ising_zero_coupling_is_zero_operator() {
        let h = HamiltonianSpec::ising(0.0, &[(1, 2)], 2).unwrap().matrix();
        assert!(h.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn ising_rejects_bad_pairs() {
        assert!(HamiltonianSpec::ising(1.0, &[(1, 1)], 2).is_err());
        assert!(HamiltonianSpec::ising(1.0, &[(1, 3)], 2).is_err());
        assert!(HamiltonianSpec::ising(1.0, &[(1, 2), (2, 1)], 2).is_err());
    }

    #[test]
    fn heisenberg_spectrum_is_singlet_triplet() {
        let g = 0.8;
        let h = HamiltonianSpec::heisenberg(g).unwrap().matrix();
        let (mut vals, _) = h.eigh(UPLO::Lower).unwrap();
        vals.as_slice_mut().unwrap().sort_by(f64::total_cmp);
        assert_abs_diff_eq!(vals[0], -3.0 * g, epsilon = 1e-12);
        for k in 1..4 {
            assert_abs_diff_eq!(vals[k], g, epsilon = 1e-12);
        }
    }

    #[test]
    fn heisenberg_commutes_with_total_z() {
        let h = HamiltonianSpec::heisenberg(1.3).unwrap().matrix();
        let total_z = embed_pauli(Pauli::Z, 1, 2).unwrap() + embed_pauli(Pauli::Z, 2, 2).unwrap();
        let comm = crate::qstate::commutator(&h, &total_z);
        assert!(crate::qstate::frobenius_norm(&comm) < 1e-12);
    }

    #[test]
    fn xyz_field_entries() {
        let g = 2.0;
        let h = HamiltonianSpec::xyz_field(g).unwrap().matrix();
        // Traceless, Hermitian, ⟨00|H|11⟩ = g(0.7 − 0.3).
        assert!(trace(&h).norm() < 1e-12);
        assert!(hermiticity_error(&h) < 1e-12);
        assert_abs_diff_eq!(h[[0, 3]].re, 0.4 * g, epsilon = 1e-12);
        assert_abs_diff_eq!(h[[0, 3]].im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn every_preset_is_hermitian() {
        for spec in [
            HamiltonianSpec::ising_all_pairs(1.7, 4).unwrap(),
            HamiltonianSpec::heisenberg(0.4).unwrap(),
            HamiltonianSpec::xyz_field(3.0).unwrap(),
        ] {
            assert!(hermiticity_error(&spec.matrix()) <= 1e-12);
        }
    }

    #[test]
    fn ising_all_pairs_permutation_invariant() {
        // Relabeling qubits permutes basis indices by bit permutation; the
        // all-pairs Ising matrix must be unchanged.
        let n = 4;
        let h = HamiltonianSpec::ising_all_pairs(1.0, n).unwrap().matrix();
        let perm = [3usize, 1, 4, 2]; // site i -> perm[i-1]
        let dim = 1usize << n;
        let relabel = |idx: usize| -> usize {
            let mut out = 0usize;
            for site in 1..=n {
                let bit = bit_at(idx, site, n);
                out |= bit << (n - perm[site - 1]);
            }
            out
        };
        for j in 0..dim {
            for k in 0..dim {
                let d = (h[[j, k]] - h[[relabel(j), relabel(k)]]).norm();
                assert!(d < 1e-14);
            }
        }
    }

    #[test]
    fn noise_validation_boundaries() {
        assert!(Noise::general(2.0, 1.0, 0.5).validate().is_ok());
        let err = Noise::general(2.0, 0.5, 0.5).validate().unwrap_err();
        assert!(err.to_string().contains("2C ≥ B"));
        assert!(Noise::general(1.0, 1.0, 1.5).validate().is_err());
        assert!(Noise::dephasing(-0.1).validate().is_err());
    }

    #[test]
    fn dephasing_equals_general_rates() {
        let gamma = 0.7;
        let a = Noise::dephasing(gamma);
        let b = Noise::general(0.0, gamma, 0.3);
        assert_abs_diff_eq!(a.dephasing_rate(), b.dephasing_rate(), epsilon = 1e-15);
        assert_eq!(a.decay_rate(), b.decay_rate());
        assert_eq!(a.excitation_rate(), b.excitation_rate());
    }

    #[test]
    fn mixed_reset_state_is_valid() {
        let st = ResetState::mixed_pm(0.9).unwrap();
        assert!(st.validate().is_ok());
        // diag(0.9, 0.1) in the ± basis has off-diagonals 0.4 in z basis.
        assert_abs_diff_eq!(st.density()[[0, 1]].re, 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(st.density()[[0, 0]].re, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn diagonal_mixed_reset_state_in_z_basis_is_valid() {
        let op = Array2::from_shape_vec(
            (2, 2),
            vec![
                C64::new(0.9, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.1, 0.0),
            ],
        )
        .unwrap();
        let st = ResetState::from_density(op).unwrap();
        assert!(st.validate().is_ok());
    }

    #[test]
    fn reset_state_rejects_nonstates() {
        let op = Array2::from_shape_vec(
            (2, 2),
            vec![
                C64::new(1.2, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(-0.2, 0.0),
            ],
        )
        .unwrap();
        assert!(ResetState::from_density(op).is_err());
    }

    #[test]
    fn pauli_word_action_matches_matrix() {
        let word = PauliWord::parse("XYZ").unwrap();
        let m = word.matrix();
        let n = 3;
        let dim = 1usize << n;
        let flip = word.flip_mask();
        for col in 0..dim {
            for row in 0..dim {
                let expected = if row == col ^ flip {
                    word.phase(col)
                } else {
                    C64::new(0.0, 0.0)
                };
                assert!((m[[row, col]] - expected).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn word_rejects_ladder_letters() {
        assert!(PauliWord::parse("X+").is_err());
    }

    #[test]
    fn config_validate_passes_and_names_fields() {
        let config = ModelConfig::new(
            2,
            HamiltonianSpec::ising(1.0, &[(1, 2)], 2).unwrap(),
            Noise::dephasing(1.0),
            ResetSpec::uniform(1.0, ResetState::plus(), 2),
        );
        assert!(config.validate().is_ok());

        let bad = ModelConfig::new(
            2,
            HamiltonianSpec::ising(1.0, &[(1, 2)], 2).unwrap(),
            Noise::general(2.0, 0.5, 0.5),
            ResetSpec::uniform(1.0, ResetState::plus(), 2),
        );
        let err = bad.validate().unwrap_err();
        assert!(matches!(err, Error::Validation { .. }));
    }

    #[test]
    fn toml_round_trip() {
        let config = ModelConfig::new(
            2,
            HamiltonianSpec::xyz_field(10.0).unwrap(),
            Noise::general(20.0, 10.0, 0.5),
            ResetSpec::uniform(3.0, ResetState::mixed_pm(0.95).unwrap(), 2),
        );
        let text = config.to_toml_string();
        let back = ModelConfig::from_toml_str(&text).unwrap();
        assert_eq!(back.n_qubits, config.n_qubits);
        assert!(max_abs_diff(&back.hamiltonian.matrix(), &config.hamiltonian.matrix()) < 1e-14);
        assert_eq!(back.noise, config.noise);
        for (a, b) in back.reset.states().iter().zip(config.reset.states()) {
            assert!(max_abs_diff(a.density(), b.density()) < 1e-14);
        }
    }

    #[test]
    fn toml_parse_named_sections() {
        let text = r#"
            [system]
            n_qubits = 2

            [hamiltonian]
            kind = "ising"
            g = 2.5
            pairs = [[1, 2]]

            [noise]
            kind = "dephasing"
            gamma = 1.0

            [reset]
            r = 5.0
            state = "plus"
        "#;
        let config = ModelConfig::from_toml_str(text).unwrap();
        assert_eq!(config.n_qubits, 2);
        assert_eq!(config.reset.rate, 5.0);
        let zz = crate::qstate::tensor(&[sigma_z(), sigma_z()]).unwrap();
        assert!(max_abs_diff(&config.hamiltonian.matrix(), &zz.mapv(|z| z * 2.5)) < 1e-14);
    }

    #[test]
    fn toml_rejects_invalid_model() {
        let text = r#"
            [system]
            n_qubits = 2
            [hamiltonian]
            kind = "ising"
            g = 1.0
            [noise]
            kind = "general"
            b = 2.0
            c = 0.5
            s = 0.5
            [reset]
            r = 1.0
        "#;
        let err = ModelConfig::from_toml_str(text).unwrap_err();
        assert!(err.to_string().contains("2C ≥ B"));
    }
}
