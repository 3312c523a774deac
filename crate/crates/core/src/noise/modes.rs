use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, C64, ONE};
use crate::model::NetworkHamiltonian;
use crate::noise::{Dissipator, GeneratorSet, LocalModeSpec, NoiseSpec, SpaceLayout};

/// Largest total dimension accepted for a mode-extended space.
pub const DEFAULT_DIMENSION_CAP: usize = 4608;

/// Generators on {ground, sites, sink} ⊗ (two-level modes on the attached
/// sites).
///
/// Adds H_B = Σ ω_H b_j⁺b_j, H_SB = Σ g (b_j + b_j⁺) n_j and mode damping
/// Γ[−{b⁺b, ρ} + 2 b ρ b⁺] to the lifted electronic generators. Modes start
/// in their ground state; `noise.modes` is ignored in favour of `modes`.
pub fn extend_with_modes(
    h: &NetworkHamiltonian,
    noise: &NoiseSpec,
    modes: &LocalModeSpec,
    dimension_cap: usize,
) -> Result<GeneratorSet> {
    let n = h.n_sites();
    modes.validate(n)?;
    let m = modes.sites.len();
    let dim = (n + 2).checked_mul(1usize.checked_shl(m as u32).unwrap_or(usize::MAX));
    match dim {
        Some(d) if d <= dimension_cap && m < usize::BITS as usize => {}
        _ => {
            return Err(Error::Capacity {
                dim: dim.unwrap_or(usize::MAX),
                cap: dimension_cap,
            })
        }
    }
    let layout = SpaceLayout::with_modes(n, modes.sites.clone());
    let kappa = h.units().kappa();
    let md = layout.mode_dim();

    let el_block = h.complex_matrix() * C64::new(kappa, 0.0);
    let mut hamiltonian = layout.lift(&layout.embed_sites(&el_block));

    let omega = modes.omega_h * kappa;
    let g = modes.coupling() * kappa;
    let mut trips = Vec::new();
    for e in 0..layout.electronic_dim() {
        for conf in 0..md {
            let row = layout.full_index(e, conf);
            let excited = conf.count_ones() as f64;
            if excited > 0.0 {
                trips.push((row, row, C64::new(omega * excited, 0.0)));
            }
            if (1..=n).contains(&e) && g != 0.0 {
                if let Some(bit) = modes.sites.iter().position(|&s| s == e) {
                    let col = layout.full_index(e, conf ^ (1 << bit));
                    trips.push((row, col, C64::new(g, 0.0)));
                }
            }
        }
    }
    hamiltonian = hamiltonian.add(&CsrMatrix::from_triplets(layout.dim(), layout.dim(), trips));

    let mut set = GeneratorSet::from_parts(layout.clone(), hamiltonian);
    let mut electronic_noise = noise.clone();
    electronic_noise.modes = None;
    set.add_noise(&electronic_noise)?;

    let damping = modes.damping * modes.damping_convention.factor(h.units());
    if damping > 0.0 {
        for (bit, &site) in modes.sites.iter().enumerate() {
            let mut trips = Vec::new();
            for e in 0..layout.electronic_dim() {
                for conf in (0..md).filter(|c| c & (1 << bit) != 0) {
                    trips.push((
                        layout.full_index(e, conf ^ (1 << bit)),
                        layout.full_index(e, conf),
                        ONE,
                    ));
                }
            }
            set.push(Dissipator::Jump {
                label: format!("mode damping on site {site}"),
                op: CsrMatrix::from_triplets(layout.dim(), layout.dim(), trips),
                rate: damping,
            });
        }
    }
    Ok(set)
}
