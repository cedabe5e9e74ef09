//! Second-order moments of the cavity and mechanical fluctuations and the
//! linear flow `d mu / dt = A mu + B` they obey.
//!
//! Moments are numbered 1..=10 in documentation and in [`Moment`]; storage
//! is 0-based, so moment `k` lives at index `k - 1`.

use nalgebra::{Complex, SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::model::PhysicalParams;

pub type C64 = Complex<f64>;
pub const DIM: usize = 10;
pub type DriftMatrix = SMatrix<C64, DIM, DIM>;
pub type MomentColumn = SVector<C64, DIM>;

const I: C64 = Complex::new(0.0, 1.0);

/// Named second moments, with 1-based discriminants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Moment {
    /// `<a^dag a>`
    PhotonNumber = 1,
    /// `<b^dag b>`
    PhononNumber = 2,
    /// `<a^dag b>`
    ADagB = 3,
    /// `<a b^dag>`
    ABDag = 4,
    /// `<a b>`
    AB = 5,
    /// `<a^dag b^dag>`
    ADagBDag = 6,
    /// `<a^2>`
    ASquared = 7,
    /// `<a^dag^2>`
    ADagSquared = 8,
    /// `<b^2>`
    BSquared = 9,
    /// `<b^dag^2>`
    BDagSquared = 10,
}

impl Moment {
    pub const ALL: [Moment; DIM] = [
        Moment::PhotonNumber,
        Moment::PhononNumber,
        Moment::ADagB,
        Moment::ABDag,
        Moment::AB,
        Moment::ADagBDag,
        Moment::ASquared,
        Moment::ADagSquared,
        Moment::BSquared,
        Moment::BDagSquared,
    ];

    /// 0-based storage index.
    pub const fn index(self) -> usize {
        self as usize - 1
    }

    /// The moment whose value is the complex conjugate of this one.
    pub const fn conjugate(self) -> Moment {
        use Moment::*;
        match self {
            PhotonNumber => PhotonNumber,
            PhononNumber => PhononNumber,
            ADagB => ABDag,
            ABDag => ADagB,
            AB => ADagBDag,
            ADagBDag => AB,
            ASquared => ADagSquared,
            ADagSquared => ASquared,
            BSquared => BDagSquared,
            BDagSquared => BSquared,
        }
    }

    /// Stable column label used in tabular output.
    pub const fn label(self) -> &'static str {
        use Moment::*;
        match self {
            PhotonNumber => "n_a",
            PhononNumber => "n_b",
            ADagB => "a_dag_b",
            ABDag => "a_b_dag",
            AB => "a_b",
            ADagBDag => "a_dag_b_dag",
            ASquared => "a2",
            ADagSquared => "a_dag2",
            BSquared => "b2",
            BDagSquared => "b_dag2",
        }
    }
}

/// 0-based index of the conjugate partner of storage slot `i`.
pub const fn partner(i: usize) -> usize {
    match i {
        0 | 1 => i,
        _ if i.is_multiple_of(2) => i + 1,
        _ => i - 1,
    }
}

/// Tolerance scale used by the pairing checks: `rel * (1 + max |mu|)`.
pub fn pairing_tolerance(mu: &MomentVector, rel: f64) -> f64 {
    rel * (1.0 + mu.max_abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentVector(pub [C64; DIM]);

impl Default for MomentVector {
    fn default() -> Self {
        Self::zero()
    }
}

impl MomentVector {
    pub fn zero() -> Self {
        Self([C64::new(0.0, 0.0); DIM])
    }

    /// Uncoupled state with an empty cavity and `n_bar` phonons.
    pub fn thermal(n_bar: f64) -> Self {
        let mut mu = Self::zero();
        mu[Moment::PhononNumber] = C64::new(n_bar, 0.0);
        mu
    }

    pub fn from_column(col: &MomentColumn) -> Self {
        let mut out = [C64::new(0.0, 0.0); DIM];
        out.iter_mut().zip(col.iter()).for_each(|(o, c)| *o = *c);
        Self(out)
    }

    pub fn to_column(&self) -> MomentColumn {
        MomentColumn::from_column_slice(&self.0)
    }

    pub fn get(&self, m: Moment) -> C64 {
        self.0[m.index()]
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest violation of `mu_partner = conj(mu)` and of the reality of
    /// the two occupation numbers.
    pub fn pairing_defect(&self) -> f64 {
        (0..DIM)
            .map(|i| (self.0[i] - self.0[partner(i)].conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn satisfies_pairing(&self, rel: f64) -> bool {
        self.pairing_defect() <= pairing_tolerance(self, rel)
    }

    /// Image under entrywise conjugation followed by the partner swap.
    pub fn conjugate_swapped(&self) -> Self {
        let mut out = [C64::new(0.0, 0.0); DIM];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.0[partner(i)].conj();
        }
        Self(out)
    }

    /// Projects onto the hermitian-paired subspace; returns the projection
    /// together with the sup-norm of the correction.
    pub fn symmetrized(&self) -> (Self, f64) {
        let img = self.conjugate_swapped();
        let mut out = [C64::new(0.0, 0.0); DIM];
        let mut delta: f64 = 0.0;
        for i in 0..DIM {
            out[i] = (self.0[i] + img.0[i]) * 0.5;
            delta = delta.max((out[i] - self.0[i]).norm());
        }
        (Self(out), delta)
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<Moment> for MomentVector {
    type Output = C64;
    fn index(&self, m: Moment) -> &C64 {
        &self.0[m.index()]
    }
}

impl std::ops::IndexMut<Moment> for MomentVector {
    fn index_mut(&mut self, m: Moment) -> &mut C64 {
        &mut self.0[m.index()]
    }
}

/// The drift matrix and noise vector of the moment flow.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftSystem {
    pub a: DriftMatrix,
    pub b: MomentColumn,
    pub params: PhysicalParams,
    pub rwa: bool,
}

/// Row builder that writes couplings by moment name.
struct Rows<'a>(&'a mut DriftMatrix);

impl Rows<'_> {
    fn add(&mut self, row: Moment, col: Moment, v: C64) {
        self.0[(row.index(), col.index())] += v;
    }
}

/// Full linearized moment system including the counter-rotating terms.
pub fn build_full_system(params: &PhysicalParams) -> DriftSystem {
    use Moment::*;
    let PhysicalParams {
        omega_m: wm,
        kappa,
        gamma_m,
        delta,
        g,
        n_bar,
    } = *params;
    let ig = I * g;
    let s = 0.5 * (kappa + gamma_m);

    let mut a = DriftMatrix::zeros();
    let mut r = Rows(&mut a);

    // <a^dag a>: -kappa N_a + ig <(a^dag - a)(b^dag + b)>
    r.add(PhotonNumber, PhotonNumber, (-kappa).into());
    r.add(PhotonNumber, ADagBDag, ig);
    r.add(PhotonNumber, ADagB, ig);
    r.add(PhotonNumber, ABDag, -ig);
    r.add(PhotonNumber, AB, -ig);

    // <b^dag b>: -gamma_m N_b + gamma_m n_bar + ig <(a^dag + a)(b^dag - b)>
    r.add(PhononNumber, PhononNumber, (-gamma_m).into());
    r.add(PhononNumber, ADagBDag, ig);
    r.add(PhononNumber, ADagB, -ig);
    r.add(PhononNumber, ABDag, ig);
    r.add(PhononNumber, AB, -ig);

    // <a b^dag>: ig (N_b - N_a + <b^dag^2> - <a^2>)
    r.add(ABDag, ABDag, -(C64::from(s) - I * delta - I * wm));
    r.add(ABDag, PhononNumber, ig);
    r.add(ABDag, PhotonNumber, -ig);
    r.add(ABDag, BDagSquared, ig);
    r.add(ABDag, ASquared, -ig);

    // <a^dag b>: -ig (N_b - N_a + <b^2> - <a^dag^2>)
    r.add(ADagB, ADagB, -(C64::from(s) + I * delta + I * wm));
    r.add(ADagB, PhononNumber, -ig);
    r.add(ADagB, PhotonNumber, ig);
    r.add(ADagB, BSquared, -ig);
    r.add(ADagB, ADagSquared, ig);

    // <a b>: ig (1 + N_b + N_a + <b^2> + <a^2>)
    r.add(AB, AB, -(C64::from(s) - I * delta + I * wm));
    r.add(AB, PhononNumber, ig);
    r.add(AB, PhotonNumber, ig);
    r.add(AB, BSquared, ig);
    r.add(AB, ASquared, ig);

    // <a^dag b^dag>: -ig (1 + N_b + N_a + <b^dag^2> + <a^dag^2>)
    r.add(ADagBDag, ADagBDag, -(C64::from(s) + I * delta - I * wm));
    r.add(ADagBDag, PhononNumber, -ig);
    r.add(ADagBDag, PhotonNumber, -ig);
    r.add(ADagBDag, BDagSquared, -ig);
    r.add(ADagBDag, ADagSquared, -ig);

    // <b^2>: 2ig <(a^dag + a) b>
    r.add(BSquared, BSquared, -(C64::from(gamma_m) + 2.0 * I * wm));
    r.add(BSquared, ADagB, 2.0 * ig);
    r.add(BSquared, AB, 2.0 * ig);

    // <b^dag^2>: -2ig <(a^dag + a) b^dag>
    r.add(BDagSquared, BDagSquared, -(C64::from(gamma_m) - 2.0 * I * wm));
    r.add(BDagSquared, ADagBDag, -2.0 * ig);
    r.add(BDagSquared, ABDag, -2.0 * ig);

    // <a^2>: 2ig <(b^dag + b) a>
    r.add(ASquared, ASquared, -(C64::from(kappa) - 2.0 * I * delta));
    r.add(ASquared, ABDag, 2.0 * ig);
    r.add(ASquared, AB, 2.0 * ig);

    // <a^dag^2>: -2ig <(b^dag + b) a^dag>
    r.add(ADagSquared, ADagSquared, -(C64::from(kappa) + 2.0 * I * delta));
    r.add(ADagSquared, ADagBDag, -2.0 * ig);
    r.add(ADagSquared, ADagB, -2.0 * ig);

    let mut b = MomentColumn::zeros();
    b[PhononNumber.index()] = C64::from(gamma_m * n_bar);
    b[AB.index()] = ig;
    b[ADagBDag.index()] = -ig;

    DriftSystem {
        a,
        b,
        params: *params,
        rwa: false,
    }
}

/// Beam-splitter block of the moment system: the full system with every
/// coupling between the moments 1..=4 and 5..=10 removed, together with the
/// vacuum source of the two-mode-squeezing moments.
pub fn build_rwa_system(params: &PhysicalParams) -> DriftSystem {
    let mut sys = build_full_system(params);
    for i in 0..4 {
        for j in 4..DIM {
            sys.a[(i, j)] = C64::new(0.0, 0.0);
            sys.a[(j, i)] = C64::new(0.0, 0.0);
        }
    }
    sys.b[Moment::AB.index()] = C64::new(0.0, 0.0);
    sys.b[Moment::ADagBDag.index()] = C64::new(0.0, 0.0);
    sys.rwa = true;
    sys
}

impl DriftSystem {
    pub fn build(params: &PhysicalParams, rwa: bool) -> Self {
        if rwa {
            build_rwa_system(params)
        } else {
            build_full_system(params)
        }
    }

    /// `A mu + B`.
    pub fn rhs(&self, mu: &MomentVector) -> MomentVector {
        MomentVector::from_column(&(self.a * mu.to_column() + self.b))
    }

    /// Largest deviation of the system from its conjugate-swapped image.
    pub fn conjugation_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..DIM {
            worst = worst.max((self.b[i] - self.b[partner(i)].conj()).norm());
            for j in 0..DIM {
                let img = self.a[(partner(i), partner(j))].conj();
                worst = worst.max((self.a[(i, j)] - img).norm());
            }
        }
        worst
    }

    /// Stable 64-bit fingerprint of the drift coefficients.
    pub fn fingerprint(&self) -> u64 {
        // FNV-1a over the IEEE bit patterns.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |x: f64| {
            for byte in x.to_bits().to_le_bytes() {
                h ^= u64::from(byte);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        for z in self.a.iter().chain(self.b.iter()) {
            eat(z.re);
            eat(z.im);
        }
        eat(if self.rwa { 1.0 } else { 0.0 });
        h
    }
}

/// `A mu + B` for `system`.
pub fn rhs(system: &DriftSystem, mu: &MomentVector) -> MomentVector {
    system.rhs(mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fig3() -> PhysicalParams {
        PhysicalParams::normalized(0.5, 1e-5, -1.0, 0.2, 1e3).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn decoupled_limit() {
        let p = PhysicalParams::normalized(1.0, 0.1, -0.3, 0.0, 2.0).unwrap();
        let sys = build_full_system(&p);
        for i in 0..DIM {
            for j in 0..DIM {
                if i != j {
                    assert_eq!(sys.a[(i, j)], c(0.0, 0.0), "({i},{j})");
                }
            }
        }
        assert_eq!(sys.a[(1, 1)], c(-0.1, 0.0));
        assert!((sys.b[1] - c(0.2, 0.0)).norm() < 1e-16);
        assert_eq!(sys.b[4], c(0.0, 0.0));
        assert_eq!(sys.b[5], c(0.0, 0.0));
    }

    #[test]
    fn mechanical_squeezing_diagonal() {
        let p = PhysicalParams::normalized(0.3, 2e-3, 0.4, 0.17, 5.0).unwrap();
        let sys = build_full_system(&p);
        assert_eq!(sys.a[(8, 8)], -c(2e-3, 2.0));
        assert_eq!(sys.a[(9, 9)], -c(2e-3, -2.0));
    }

    #[test]
    fn row_one_and_row_five_match_the_printed_flow() {
        let p = fig3();
        let sys = build_full_system(&p);
        let g = p.g;
        // row 1: -kappa on the diagonal, +ig on <a^dag b>, <a^dag b^dag>, -ig on <a b^dag>, <a b>
        assert_eq!(sys.a[(0, 0)], c(-0.5, 0.0));
        assert_eq!(sys.a[(0, 2)], c(0.0, g));
        assert_eq!(sys.a[(0, 5)], c(0.0, g));
        assert_eq!(sys.a[(0, 3)], c(0.0, -g));
        assert_eq!(sys.a[(0, 4)], c(0.0, -g));
        // row 5: -((kappa + gamma_m)/2 - i delta + i omega_m), source +ig
        let s = 0.5 * (p.kappa + p.gamma_m);
        assert_eq!(sys.a[(4, 4)], -c(s, -p.delta + p.omega_m));
        assert_eq!(sys.b[4], c(0.0, g));
        assert_eq!(sys.b[5], c(0.0, -g));
    }

    #[test]
    fn noise_vector_support() {
        let sys = build_full_system(&fig3());
        for (i, z) in sys.b.iter().enumerate() {
            if ![1, 4, 5].contains(&i) {
                assert_eq!(*z, c(0.0, 0.0));
            }
        }
        let rwa = build_rwa_system(&fig3());
        assert_eq!(rwa.b[4], c(0.0, 0.0));
        assert_eq!(rwa.b[5], c(0.0, 0.0));
        assert_eq!(rwa.b[1], sys.b[1]);
    }

    #[test]
    fn conjugation_symmetry_is_exact() {
        assert_eq!(build_full_system(&fig3()).conjugation_defect(), 0.0);
        assert_eq!(build_rwa_system(&fig3()).conjugation_defect(), 0.0);
    }

    #[test]
    fn rwa_and_full_coincide_without_coupling() {
        let p = PhysicalParams::normalized(0.2, 1e-4, -1.3, 0.0, 30.0).unwrap();
        let full = build_full_system(&p);
        let rwa = build_rwa_system(&p);
        assert_eq!(full.a, rwa.a);
        assert_eq!(full.b, rwa.b);
    }

    #[test]
    fn rwa_blocks_are_decoupled() {
        let rwa = build_rwa_system(&fig3());
        let full = build_full_system(&fig3());
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(rwa.a[(i, j)], full.a[(i, j)]);
            }
            for j in 4..DIM {
                assert_eq!(rwa.a[(i, j)], c(0.0, 0.0));
                assert_eq!(rwa.a[(j, i)], c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn thermal_state_is_fixed_without_coupling() {
        let p = PhysicalParams::normalized(1.0, 0.1, -1.0, 0.0, 7.0).unwrap();
        let sys = build_full_system(&p);
        let r = sys.rhs(&MomentVector::thermal(7.0));
        assert!(r.max_abs() < 1e-15);
    }

    #[test]
    fn rhs_at_zero_is_noise() {
        let sys = build_full_system(&fig3());
        let r = rhs(&sys, &MomentVector::zero());
        assert_eq!(r.to_column(), sys.b);
    }

    #[test]
    fn partner_is_an_involution() {
        for i in 0..DIM {
            assert_eq!(partner(partner(i)), i);
            assert_eq!(Moment::ALL[i].index(), i);
            assert_eq!(Moment::ALL[i].conjugate().index(), partner(i));
        }
    }

    fn paired() -> impl Strategy<Value = MomentVector> {
        proptest::collection::vec(-5.0f64..5.0, 18).prop_map(|v| {
            let mut mu = MomentVector::zero();
            mu.0[0] = c(v[0].abs(), 0.0);
            mu.0[1] = c(v[1].abs(), 0.0);
            for k in 0..4 {
                let z = c(v[2 + 4 * k], v[3 + 4 * k]);
                mu.0[2 + 2 * k] = z;
                mu.0[3 + 2 * k] = z.conj();
            }
            mu
        })
    }

    fn params() -> impl Strategy<Value = PhysicalParams> {
        (0.01f64..2.0, 0.0f64..0.01, -3.0f64..3.0, 0.0f64..1.0, 0.0f64..100.0)
            .prop_map(|(k, gm, d, g, n)| PhysicalParams::normalized(k, gm, d, g, n).unwrap())
    }

    proptest! {
        #[test]
        fn rhs_preserves_pairing(p in params(), mu in paired(), rwa in any::<bool>()) {
            let sys = DriftSystem::build(&p, rwa);
            let r = sys.rhs(&mu);
            prop_assert!(r.satisfies_pairing(1e-12));
        }

        #[test]
        fn rhs_is_affine(p in params(), m1 in paired(), m2 in paired(), alpha in -2.0f64..2.0, beta in -2.0f64..2.0) {
            let sys = build_full_system(&p);
            let mut combo = MomentVector::zero();
            for i in 0..DIM {
                combo.0[i] = m1.0[i] * alpha + m2.0[i] * beta;
            }
            let lhs = sys.rhs(&combo).to_column();
            let rhs = sys.rhs(&m1).to_column() * C64::from(alpha)
                + sys.rhs(&m2).to_column() * C64::from(beta)
                + sys.b * C64::from(1.0 - alpha - beta);
            let scale = 1.0 + lhs.iter().map(|z| z.norm()).fold(0.0, f64::max);
            prop_assert!((lhs - rhs).iter().all(|z| z.norm() <= 1e-12 * scale));
        }

        #[test]
        fn conjugation_symmetry_holds(p in params(), rwa in any::<bool>()) {
            prop_assert_eq!(DriftSystem::build(&p, rwa).conjugation_defect(), 0.0);
        }
    }
}
