//! Shared demo systems for the integration suites. These mirror the
//! configurations under configs/ at the workspace root. Each test binary
//! uses its own subset.
#![allow(dead_code)]

use gurevic::groups::{Cocycle, GroupElement, GroupKind};
use gurevic::shift::{Potential, ShiftSystem};
use gurevic::skew::SkewSystem;

pub fn zd_cocycle(values: &[i64]) -> Cocycle {
    Cocycle::new(
        GroupKind::Zd(1),
        values.iter().map(|&v| GroupElement::Zd(vec![v])).collect(),
    )
    .unwrap()
}

/// Golden-mean shift with the trivial group.
pub fn golden_mean_trivial() -> SkewSystem {
    let shift = ShiftSystem::golden_mean();
    let coc = Cocycle::trivial(GroupKind::Zd(0), 2);
    SkewSystem::new(shift, Potential::zero(2), coc).unwrap()
}

/// Full 2-shift, φ = 0, ψ = (+1, −1) into ℤ.
pub fn full2_sym() -> SkewSystem {
    SkewSystem::new(
        ShiftSystem::full_shift(2),
        Potential::zero(2),
        zd_cocycle(&[1, -1]),
    )
    .unwrap()
}

/// Full 2-shift, φ(1) = 1, ψ = (+1, −1) into ℤ.
pub fn full2_asym() -> SkewSystem {
    SkewSystem::new(
        ShiftSystem::full_shift(2),
        Potential::depth1(vec![1.0, 0.0]).unwrap(),
        zd_cocycle(&[1, -1]),
    )
    .unwrap()
}

/// Full 3-shift, φ = 0, f = (1, −1, 0) into ℤ (mixing extension).
pub fn full3_z() -> SkewSystem {
    SkewSystem::new(
        ShiftSystem::full_shift(3),
        Potential::zero(3),
        zd_cocycle(&[1, -1, 0]),
    )
    .unwrap()
}

/// Full 4-shift over F₂ with ψ = (x, x⁻¹, y, y⁻¹).
pub fn full4_f2() -> SkewSystem {
    let coc = Cocycle::new(
        GroupKind::Free(2),
        vec![
            GroupElement::Free(vec![1]),
            GroupElement::Free(vec![-1]),
            GroupElement::Free(vec![2]),
            GroupElement::Free(vec![-2]),
        ],
    )
    .unwrap();
    SkewSystem::new(ShiftSystem::full_shift(4), Potential::zero(4), coc).unwrap()
}

/// Full 4-shift over the Heisenberg group with ψ = (x, x⁻¹, y, y⁻¹).
pub fn full4_heis() -> SkewSystem {
    let coc = Cocycle::new(
        GroupKind::Heisenberg,
        vec![
            GroupElement::Heisenberg(1, 0, 0),
            GroupElement::Heisenberg(-1, 0, 0),
            GroupElement::Heisenberg(0, 1, 0),
            GroupElement::Heisenberg(0, -1, 0),
        ],
    )
    .unwrap();
    SkewSystem::new(ShiftSystem::full_shift(4), Potential::zero(4), coc).unwrap()
}

/// Full 4-shift over ℤ² (abelianization of the F₂ demo).
pub fn full4_z2() -> SkewSystem {
    full4_f2().abelianized_system().unwrap()
}

/// Golden-mean shift with a depth-2 potential and a cyclic marking.
pub fn cyclic3() -> SkewSystem {
    let shift = ShiftSystem::golden_mean();
    let phi = Potential::depth2(&shift, vec![0.3, -0.2, 0.1, 0.0]).unwrap();
    let coc = Cocycle::new(
        GroupKind::Cyclic(3),
        vec![
            GroupElement::Cyclic {
                modulus: 3,
                value: 1,
            },
            GroupElement::Cyclic {
                modulus: 3,
                value: 2,
            },
        ],
    )
    .unwrap();
    SkewSystem::new(shift, phi, coc).unwrap()
}

/// All demo systems with a name tag.
pub fn demo_systems() -> Vec<(&'static str, SkewSystem)> {
    vec![
        ("golden_mean", golden_mean_trivial()),
        ("full2_sym", full2_sym()),
        ("full2_asym", full2_asym()),
        ("full3_z", full3_z()),
        ("full4_f2", full4_f2()),
        ("full4_heis", full4_heis()),
        ("full4_z2", full4_z2()),
        ("cyclic3", cyclic3()),
    ]
}

/// Small deterministic PRNG for reproducible sampling in tests.
pub struct SplitMix64(pub u64);

impl SplitMix64 {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in (−1, 1).
    pub fn symmetric(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }
}
