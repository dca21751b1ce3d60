//! Spectrum and equilibrium state of the Raman-coupled two-qubit Hamiltonian
//!
//! ```text
//! H = (ω̄/2) σz⊗I + (ω/2) I⊗σz + g σz⊗σx
//! ```
//!
//! In the computational basis `{|00⟩, |01⟩, |10⟩, |11⟩}` the Hamiltonian is
//! block diagonal, so the four levels come in two pairs split by the
//! hybridized gap `Ω = √(4g² + ω²)`:
//!
//! ```text
//! E₁ = ( ω̄ + Ω)/2    E₂ = ( ω̄ − Ω)/2     (|00⟩, |01⟩ block)
//! E₃ = (−ω̄ + Ω)/2    E₄ = (−ω̄ − Ω)/2     (|10⟩, |11⟩ block)
//! ```
//!
//! Units are ħ = k_B = 1 throughout.

use serde::Serialize;

use crate::error::{check_frequency, check_temperature, Error, Result};

/// Largest inverse temperature handled. Colder baths saturate here.
pub const BETA_MAX: f64 = 1e6;

/// How the left-qubit frequency ω̄ follows the driven right-qubit frequency ω.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", content = "omega_bar", rename_all = "lowercase")]
pub enum LeftQubit {
    /// ω̄ = r·ω
    Scaled,
    /// ω̄ held at the given value
    Fixed(f64),
}

/// Static description of the working medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MachineParams {
    g: f64,
    r: f64,
    left: LeftQubit,
}

impl MachineParams {
    /// Coupling `g ≥ 0` and frequency ratio `r > 0`, with ω̄ tracking r·ω.
    pub fn new(g: f64, r: f64) -> Result<Self> {
        check_frequency("g", g)?;
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::InvalidParameter {
                name: "r",
                value: r,
                reason: "must be > 0 and finite",
            });
        }
        Ok(Self {
            g,
            r,
            left: LeftQubit::Scaled,
        })
    }

    /// Pin the left-qubit frequency instead of scaling it with ω.
    pub fn with_fixed_left(mut self, omega_bar: f64) -> Result<Self> {
        check_frequency("omega_bar", omega_bar)?;
        self.left = LeftQubit::Fixed(omega_bar);
        Ok(self)
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn left(&self) -> LeftQubit {
        self.left
    }

    /// Left-qubit frequency at right-qubit frequency `omega`.
    pub fn omega_bar(&self, omega: f64) -> f64 {
        match self.left {
            LeftQubit::Scaled => self.r * omega,
            LeftQubit::Fixed(w) => w,
        }
    }
}

/// Eigenvalues and mixing angle at one right-qubit frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spectrum {
    pub omega: f64,
    pub omega_bar: f64,
    pub big_omega: f64,
    pub theta: f64,
    pub energies: [f64; 4],
}

impl Spectrum {
    pub fn min_energy(&self) -> f64 {
        self.energies.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Closed-form spectrum.
pub fn build_spectrum(params: &MachineParams, omega: f64) -> Result<Spectrum> {
    check_frequency("omega", omega)?;
    let g = params.g();
    let omega_bar = params.omega_bar(omega);
    let big_omega = (4.0 * g * g + omega * omega).sqrt();
    Ok(Spectrum {
        omega,
        omega_bar,
        big_omega,
        theta: (2.0 * g).atan2(omega),
        energies: [
            0.5 * (omega_bar + big_omega),
            0.5 * (omega_bar - big_omega),
            0.5 * (-omega_bar + big_omega),
            0.5 * (-omega_bar - big_omega),
        ],
    })
}

pub mod oracle {
    //! Independent spectrum built from the explicit 4×4 matrix.

    use super::{MachineParams, Spectrum};
    use crate::error::{check_frequency, Result};

    type M2 = [[f64; 2]; 2];
    type M4 = [[f64; 4]; 4];

    const ID: M2 = [[1.0, 0.0], [0.0, 1.0]];
    const SX: M2 = [[0.0, 1.0], [1.0, 0.0]];
    const SZ: M2 = [[1.0, 0.0], [0.0, -1.0]];

    fn kron(a: &M2, b: &M2) -> M4 {
        let mut out = [[0.0; 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        out[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                    }
                }
            }
        }
        out
    }

    fn axpy(acc: &mut M4, scale: f64, m: &M4) {
        for (row, mrow) in acc.iter_mut().zip(m) {
            for (x, y) in row.iter_mut().zip(mrow) {
                *x += scale * y;
            }
        }
    }

    /// The Hamiltonian in the computational basis.
    pub fn hamiltonian(params: &MachineParams, omega: f64) -> M4 {
        let mut h = [[0.0; 4]; 4];
        axpy(&mut h, 0.5 * params.omega_bar(omega), &kron(&SZ, &ID));
        axpy(&mut h, 0.5 * omega, &kron(&ID, &SZ));
        axpy(&mut h, params.g(), &kron(&SZ, &SX));
        h
    }

    /// Eigenvalues of a real symmetric 2×2 matrix, larger first.
    pub fn eig_sym2(m: &M2) -> (f64, f64) {
        let mean = 0.5 * (m[0][0] + m[1][1]);
        let half_diff = 0.5 * (m[0][0] - m[1][1]);
        let radius = half_diff.hypot(m[0][1]);
        (mean + radius, mean - radius)
    }

    fn block(h: &M4, offset: usize) -> M2 {
        [
            [h[offset][offset], h[offset][offset + 1]],
            [h[offset + 1][offset], h[offset + 1][offset + 1]],
        ]
    }

    /// Diagonalizes the explicit matrix block by block. `big_omega` and
    /// `theta` are read back from the eigenvalue splitting.
    pub fn oracle_diagonalize(params: &MachineParams, omega: f64) -> Result<Spectrum> {
        check_frequency("omega", omega)?;
        let h = hamiltonian(params, omega);
        debug_assert!((0..2).all(|i| (2..4).all(|j| h[i][j] == 0.0 && h[j][i] == 0.0)));
        let (e1, e2) = eig_sym2(&block(&h, 0));
        let (e3, e4) = eig_sym2(&block(&h, 2));
        let big_omega = e1 - e2;
        let plus = block(&h, 0);
        Ok(Spectrum {
            omega,
            omega_bar: e1 + e2,
            big_omega,
            theta: (2.0 * plus[0][1]).atan2(plus[0][0] - plus[1][1]),
            energies: [e1, e2, e3, e4],
        })
    }
}

/// Gibbs populations, index-aligned with [`Spectrum::energies`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermalState {
    pub beta: f64,
    pub populations: [f64; 4],
    pub log_z: f64,
    #[serde(skip)]
    log_populations: [f64; 4],
}

impl ThermalState {
    /// Gibbs state at inverse temperature `beta ≥ 0` (`beta = 0` is the
    /// infinite-temperature state). Values above [`BETA_MAX`] saturate.
    pub fn from_beta(spectrum: &Spectrum, beta: f64) -> Result<Self> {
        if !(beta >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "beta",
                value: beta,
                reason: "must be >= 0",
            });
        }
        let beta = beta.min(BETA_MAX);
        let e_min = spectrum.min_energy();
        let shifted = spectrum.energies.map(|e| -beta * (e - e_min));
        let log_sum = shifted.iter().map(|x| x.exp()).sum::<f64>().ln();
        let log_populations = shifted.map(|x| x - log_sum);
        Ok(Self {
            beta,
            populations: log_populations.map(f64::exp),
            log_z: log_sum - beta * e_min,
            log_populations,
        })
    }

    pub fn log_populations(&self) -> &[f64; 4] {
        &self.log_populations
    }
}

pub fn thermal_state(spectrum: &Spectrum, temperature: f64) -> Result<ThermalState> {
    let t = check_temperature(temperature)?;
    ThermalState::from_beta(spectrum, 1.0 / t)
}

/// Von Neumann entropy `−Σ pᵢ ln pᵢ` of the Gibbs state.
pub fn entropy(state: &ThermalState, _spectrum: &Spectrum) -> f64 {
    -state
        .populations
        .iter()
        .zip(&state.log_populations)
        .map(|(p, lp)| if *p > 0.0 { p * lp } else { 0.0 })
        .sum::<f64>()
}

/// `U = Σ pᵢ Eᵢ`
pub fn internal_energy(state: &ThermalState, spectrum: &Spectrum) -> f64 {
    state
        .populations
        .iter()
        .zip(&spectrum.energies)
        .map(|(p, e)| p * e)
        .sum()
}

/// Convenience bundle for the quantities every stroke needs.
#[derive(Debug, Clone, Copy)]
pub struct Equilibrium {
    pub spectrum: Spectrum,
    pub state: ThermalState,
}

impl Equilibrium {
    pub fn new(params: &MachineParams, omega: f64, temperature: f64) -> Result<Self> {
        let spectrum = build_spectrum(params, omega)?;
        let state = thermal_state(&spectrum, temperature)?;
        Ok(Self { spectrum, state })
    }

    pub fn entropy(&self) -> f64 {
        entropy(&self.state, &self.spectrum)
    }

    pub fn energy(&self) -> f64 {
        internal_energy(&self.state, &self.spectrum)
    }

    pub fn populations(&self) -> &[f64; 4] {
        &self.state.populations
    }
}

/// Unnormalized thermal blocks `e^{−βH}` restricted to the two invariant
/// subspaces. `z` is their combined trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockMatrices {
    pub plus_block: [[f64; 2]; 2],
    pub minus_block: [[f64; 2]; 2],
    pub z: f64,
}

impl BlockMatrices {
    pub fn trace(&self) -> f64 {
        self.plus_block[0][0] + self.plus_block[1][1] + self.minus_block[0][0] + self.minus_block[1][1]
    }
}

/// Entries of `e^{−βH}` in each block. Entries grow like `e^{β(ω̄+Ω)/2}`, so
/// this is meant for moderate β; populations should come from
/// [`thermal_state`].
pub fn coherence_blocks(params: &MachineParams, omega: f64, temperature: f64) -> Result<BlockMatrices> {
    let spectrum = build_spectrum(params, omega)?;
    let beta = 1.0 / check_temperature(temperature)?;
    let half = 0.5 * beta * spectrum.big_omega;
    let (c, s) = (half.cosh(), half.sinh());
    // ω/Ω and 2g/Ω; at Ω = 0 the blocks are proportional to the identity.
    let (cos_t, sin_t) = if spectrum.big_omega > 0.0 {
        (omega / spectrum.big_omega, 2.0 * params.g() / spectrum.big_omega)
    } else {
        (0.0, 0.0)
    };
    let down = (-0.5 * beta * spectrum.omega_bar).exp();
    let up = (0.5 * beta * spectrum.omega_bar).exp();
    let plus_off = -sin_t * down * s;
    let minus_off = sin_t * up * s;
    let plus_block = [[down * (c - cos_t * s), plus_off], [plus_off, down * (c + cos_t * s)]];
    let minus_block = [[up * (c - cos_t * s), minus_off], [minus_off, up * (c + cos_t * s)]];
    let mut out = BlockMatrices {
        plus_block,
        minus_block,
        z: 0.0,
    };
    out.z = out.trace();
    Ok(out)
}
