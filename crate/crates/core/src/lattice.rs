//! The rank-7 Lorentz lattice `H²(S̄, ℤ)` and the pull-back actions of the
//! involutions and the Coxeter transformation.
//!
//! Basis order is `(E0, E1, …, E6)`, where E1..E6 play the roles of the
//! exceptional classes attached to the pairs `{1,2}`, `{3,4}`, `{5,6}`. The
//! tritangent lines at infinity are `L1 = F12`, `L2 = F34`, `L3 = F56`, and
//! σ_g blows down L_g.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::poly::IntPoly;
use crate::{Error, Result};

pub const RANK: usize = 7;

/// Printed matrices of σ1*, σ2*, σ3* and c*, row-major.
const SIGMA_TABLE: [[[i64; RANK]; RANK]; 3] = [
    [
        [6, 3, 3, 2, 2, 2, 2],
        [-3, -2, -1, -1, -1, -1, -1],
        [-3, -1, -2, -1, -1, -1, -1],
        [-2, -1, -1, -1, 0, -1, -1],
        [-2, -1, -1, 0, -1, -1, -1],
        [-2, -1, -1, -1, -1, -1, 0],
        [-2, -1, -1, -1, -1, 0, -1],
    ],
    [
        [6, 2, 2, 3, 3, 2, 2],
        [-2, -1, 0, -1, -1, -1, -1],
        [-2, 0, -1, -1, -1, -1, -1],
        [-3, -1, -1, -2, -1, -1, -1],
        [-3, -1, -1, -1, -2, -1, -1],
        [-2, -1, -1, -1, -1, -1, 0],
        [-2, -1, -1, -1, -1, 0, -1],
    ],
    [
        [6, 2, 2, 2, 2, 3, 3],
        [-2, -1, 0, -1, -1, -1, -1],
        [-2, 0, -1, -1, -1, -1, -1],
        [-2, -1, -1, -1, 0, -1, -1],
        [-2, -1, -1, 0, -1, -1, -1],
        [-3, -1, -1, -1, -1, -2, -1],
        [-3, -1, -1, -1, -1, -1, -2],
    ],
];

const COXETER_TABLE: [[i64; RANK]; RANK] = [
    [12, 6, 6, 4, 4, 3, 3],
    [-3, -2, -1, -1, -1, -1, -1],
    [-3, -1, -2, -1, -1, -1, -1],
    [-4, -2, -2, -2, -1, -1, -1],
    [-4, -2, -2, -1, -2, -1, -1],
    [-6, -3, -3, -2, -2, -2, -1],
    [-6, -3, -3, -2, -2, -1, -2],
];

/// Index pair `{p, q}` with `L_g = E0 - E_p - E_q`.
pub fn blown_down_pair(g: usize) -> (usize, usize) {
    assert!((1..=3).contains(&g), "involution index must be 1..=3");
    (2 * g - 1, 2 * g)
}

/// Partner of `a` in its pair `{1,2}`, `{3,4}` or `{5,6}`.
fn partner(a: usize) -> usize {
    if a % 2 == 1 {
        a + 1
    } else {
        a - 1
    }
}

/// δ_a: +1 on E0, -1 on E1..E6.
fn delta(a: usize) -> i64 {
    if a == 0 {
        1
    } else {
        -1
    }
}

/// A cohomology class `Σ c_a E_a`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CohomClass(pub [BigInt; RANK]);

impl CohomClass {
    pub fn from_i64(c: [i64; RANK]) -> Self {
        Self(c.map(BigInt::from))
    }

    pub fn zero() -> Self {
        Self::from_i64([0; RANK])
    }

    /// `E_a`, for a in 0..=6.
    pub fn basis(a: usize) -> Self {
        let mut c = [0; RANK];
        c[a] = 1;
        Self::from_i64(c)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(std::array::from_fn(|a| &self.0[a] + &other.0[a]))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(std::array::from_fn(|a| &self.0[a] - &other.0[a]))
    }

    pub fn scale(&self, k: i64) -> Self {
        Self(std::array::from_fn(|a| &self.0[a] * k))
    }
}

/// Intersection form `u0 v0 - Σ u_a v_a`.
pub fn intersection(u: &CohomClass, v: &CohomClass) -> BigInt {
    (0..RANK)
        .map(|a| &u.0[a] * &v.0[a] * delta(a))
        .sum()
}

/// One of the 27 lines, by its classical name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LineLabel {
    E(u8),
    G(u8),
    F(u8, u8),
}

impl LineLabel {
    pub fn e(a: u8) -> Result<Self> {
        check_index(a)?;
        Ok(Self::E(a))
    }

    pub fn g(a: u8) -> Result<Self> {
        check_index(a)?;
        Ok(Self::G(a))
    }

    /// `F_ab`, stored with `a < b`.
    pub fn f(a: u8, b: u8) -> Result<Self> {
        check_index(a)?;
        check_index(b)?;
        if a == b {
            return Err(Error::InvalidArgument(format!("F{a}{b} needs distinct indices")));
        }
        Ok(Self::F(a.min(b), a.max(b)))
    }

    /// All 27 labels: E1..E6, G1..G6, then F_ab in lexicographic order.
    pub fn all() -> Vec<Self> {
        let mut out: Vec<Self> = (1..=6).map(Self::E).collect();
        out.extend((1..=6).map(Self::G));
        for a in 1..=6u8 {
            for b in a + 1..=6 {
                out.push(Self::F(a, b));
            }
        }
        out
    }
}

fn check_index(a: u8) -> Result<()> {
    if (1..=6).contains(&a) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("line index {a} not in 1..=6")))
    }
}

impl fmt::Display for LineLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::E(a) => write!(f, "E{a}"),
            Self::G(a) => write!(f, "G{a}"),
            Self::F(a, b) => write!(f, "F{a}{b}"),
        }
    }
}

pub fn class_of(label: LineLabel) -> CohomClass {
    match label {
        LineLabel::E(a) => CohomClass::basis(a as usize),
        LineLabel::F(a, b) => CohomClass::basis(0)
            .sub(&CohomClass::basis(a as usize))
            .sub(&CohomClass::basis(b as usize)),
        LineLabel::G(a) => {
            let mut c = [-1i64; RANK];
            c[0] = 2;
            c[a as usize] = 0;
            CohomClass::from_i64(c)
        }
    }
}

/// Classes of the tritangent lines L1, L2, L3.
pub fn tritangent_class(g: usize) -> CohomClass {
    let (p, q) = blown_down_pair(g);
    class_of(LineLabel::F(p as u8, q as u8))
}

/// An exact endomorphism of the lattice, as a 7×7 integer matrix acting on
/// coefficient columns.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticeEndo {
    entries: Vec<BigInt>,
}

impl LatticeEndo {
    pub fn from_rows(rows: &[[i64; RANK]; RANK]) -> Self {
        Self {
            entries: rows.iter().flatten().map(|&v| BigInt::from(v)).collect(),
        }
    }

    pub fn identity() -> Self {
        Self::from_fn(|r, c| if r == c { BigInt::one() } else { BigInt::zero() })
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        let mut entries = Vec::with_capacity(RANK * RANK);
        for r in 0..RANK {
            for c in 0..RANK {
                entries.push(f(r, c));
            }
        }
        Self { entries }
    }

    pub fn entry(&self, r: usize, c: usize) -> &BigInt {
        &self.entries[r * RANK + c]
    }

    pub fn rows(&self) -> Vec<Vec<BigInt>> {
        self.entries.chunks(RANK).map(<[BigInt]>::to_vec).collect()
    }

    /// Rows as `i64`, when they fit.
    pub fn rows_i64(&self) -> Option<Vec<Vec<i64>>> {
        self.entries
            .chunks(RANK)
            .map(|row| row.iter().map(ToPrimitive::to_i64).collect())
            .collect()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::from_fn(|r, c| (0..RANK).map(|k| self.entry(r, k) * other.entry(k, c)).sum())
    }

    pub fn apply(&self, v: &CohomClass) -> CohomClass {
        CohomClass(std::array::from_fn(|r| {
            (0..RANK).map(|c| self.entry(r, c) * &v.0[c]).sum()
        }))
    }

    /// Column `c`, i.e. the image of `E_c`.
    pub fn column(&self, c: usize) -> CohomClass {
        CohomClass(std::array::from_fn(|r| self.entry(r, c).clone()))
    }

    pub fn trace(&self) -> BigInt {
        (0..RANK).map(|k| self.entry(k, k).clone()).sum()
    }

    pub fn pow(&self, mut n: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::identity();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// First differing entry against a printed table.
    fn compare(&self, table: &[[i64; RANK]; RANK], what: &str) -> Result<()> {
        for (r, row) in table.iter().enumerate() {
            for (c, &want) in row.iter().enumerate() {
                let got = self.entry(r, c);
                if *got != BigInt::from(want) {
                    return Err(Error::LatticeMismatch {
                        what: what.to_string(),
                        row: r,
                        col: c,
                        built: got.to_string(),
                        printed: want.to_string(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// The printed matrix of σ_g*.
pub fn sigma_star_table(g: usize) -> LatticeEndo {
    assert!((1..=3).contains(&g), "involution index must be 1..=3");
    LatticeEndo::from_rows(&SIGMA_TABLE[g - 1])
}

/// The printed matrix of c*.
pub fn coxeter_star_table() -> LatticeEndo {
    LatticeEndo::from_rows(&COXETER_TABLE)
}

/// Derives σ_g* from intersection data alone:
///
/// 1. σ_g swaps `E_r ↔ G_{r'}` for every index r outside the blown-down pair
///    (r' its partner), which fixes the columns of those E_r;
/// 2. `(σ*E_p, E_p) = 2` and `(σ*E_p, E_q) = 1` for the blown-down pair;
/// 3. `ξ_ab = δ_a δ_b ξ_ba`, since σ_g is an involution;
/// 4. the blow-down of `L_g = E0 - E_p - E_q` forces column 0 to be the sum
///    of columns p and q.
///
/// The result is checked against the printed matrix.
pub fn sigma_star(g: usize) -> Result<LatticeEndo> {
    let built = derive_sigma_star(g)?;
    built.compare(&SIGMA_TABLE[g - 1], &format!("sigma_{g}*"))?;
    Ok(built)
}

fn derive_sigma_star(g: usize) -> Result<LatticeEndo> {
    if !(1..=3).contains(&g) {
        return Err(Error::InvalidArgument(format!("involution index {g} not in 1..=3")));
    }
    let (p, q) = blown_down_pair(g);
    let mut xi: [[Option<i64>; RANK]; RANK] = [[None; RANK]; RANK];

    // step 1: columns of E_r for r outside {p, q}
    for r in (1..RANK).filter(|&r| r != p && r != q) {
        let image = class_of(LineLabel::G(partner(r) as u8));
        for (a, v) in image.0.iter().enumerate() {
            xi[a][r] = v.to_i64();
        }
    }
    // step 2: ξ_ab = δ_a (σ*E_b, E_a)
    xi[p][p] = Some(delta(p) * 2);
    xi[q][q] = Some(delta(q) * 2);
    xi[p][q] = Some(delta(p));
    xi[q][p] = Some(delta(q));

    let fill_by_symmetry = |xi: &mut [[Option<i64>; RANK]; RANK]| {
        for a in 0..RANK {
            for b in 0..RANK {
                if xi[a][b].is_none() {
                    if let Some(v) = xi[b][a] {
                        xi[a][b] = Some(delta(a) * delta(b) * v);
                    }
                }
            }
        }
    };
    // step 3
    fill_by_symmetry(&mut xi);
    // step 4: column 0 = column p + column q wherever both are known
    for a in 0..RANK {
        if let (Some(x), Some(y)) = (xi[a][p], xi[a][q]) {
            match xi[a][0] {
                None => xi[a][0] = Some(x + y),
                Some(v) if v != x + y => {
                    return Err(Error::LatticeIdentity(format!(
                        "sigma_{g}*: blow-down relation fails in row {a}"
                    )))
                }
                Some(_) => {}
            }
        }
    }
    fill_by_symmetry(&mut xi);
    if let (Some(x), Some(y)) = (xi[0][p], xi[0][q]) {
        xi[0][0].get_or_insert(x + y);
    }

    let mut rows = [[0i64; RANK]; RANK];
    for a in 0..RANK {
        for b in 0..RANK {
            rows[a][b] = xi[a][b].ok_or_else(|| {
                Error::LatticeIdentity(format!("sigma_{g}*: entry ({a}, {b}) left undetermined"))
            })?;
        }
    }
    Ok(LatticeEndo::from_rows(&rows))
}

/// `c* = σ3* · σ2* · σ1*` for `c = σ1 ∘ σ2 ∘ σ3`, checked against the printed
/// matrix.
pub fn coxeter_star() -> Result<LatticeEndo> {
    let c = sigma_star(3)?.mul(&sigma_star(2)?).mul(&sigma_star(1)?);
    c.compare(&COXETER_TABLE, "c*")?;
    Ok(c)
}

/// `det(xI - m)` by Berkowitz's division-free recursion.
pub fn charpoly(m: &LatticeEndo) -> IntPoly {
    // coefficients highest degree first while building
    let mut p: Vec<BigInt> = vec![BigInt::one()];
    for r in 0..RANK {
        let mut t = vec![BigInt::one(), -m.entry(r, r).clone()];
        let mut v: Vec<BigInt> = (0..r).map(|i| m.entry(i, r).clone()).collect();
        for _ in 0..r {
            let rc: BigInt = (0..r).map(|j| m.entry(r, j) * &v[j]).sum();
            t.push(-rc);
            v = (0..r)
                .map(|i| (0..r).map(|j| m.entry(i, j) * &v[j]).sum())
                .collect();
        }
        let mut next = vec![BigInt::zero(); r + 2];
        for (i, slot) in next.iter_mut().enumerate() {
            for (j, pj) in p.iter().enumerate() {
                if i >= j && i - j < t.len() {
                    *slot += &t[i - j] * pj;
                }
            }
        }
        p = next;
    }
    p.reverse();
    IntPoly::new(p)
}

/// Largest root modulus of the characteristic polynomial.
pub fn spectral_radius(m: &LatticeEndo) -> f64 {
    charpoly(m)
        .distinct_roots()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// `tr(m^n)` computed exactly.
pub fn trace_power(m: &LatticeEndo, n: u32) -> BigInt {
    m.pow(n).trace()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenCheck {
    pub name: String,
    pub value: i64,
    pub expected: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub checks: Vec<EigenCheck>,
}

/// The (-1)-eigenvectors of c* and their orthogonality to the tritangent
/// classes.
pub fn minus_one_eigenvectors() -> [(&'static str, CohomClass); 4] {
    [
        ("V0", CohomClass::from_i64([2, -1, -1, -1, -1, -1, -1])),
        ("Vi", CohomClass::from_i64([0, 1, -1, 0, 0, 0, 0])),
        ("Vj", CohomClass::from_i64([0, 0, 0, 1, -1, 0, 0])),
        ("Vk", CohomClass::from_i64([0, 0, 0, 0, 0, 1, -1])),
    ]
}

/// Checks `c* V = -V` for the four listed eigenvectors, `(V_a, L_b) = 0`, and
/// mutual orthogonality of the V's.
pub fn eigenvector_checks() -> Result<EigenReport> {
    let c = coxeter_star()?;
    let vs = minus_one_eigenvectors();
    let mut checks = Vec::new();
    for (name, v) in &vs {
        let image = c.apply(v);
        if image != v.scale(-1) {
            return Err(Error::LatticeIdentity(format!("c* {name} != -{name}")));
        }
        checks.push(EigenCheck {
            name: format!("c*{name} = -{name}"),
            value: -1,
            expected: -1,
        });
        for g in 1..=3 {
            let pairing = intersection(v, &tritangent_class(g));
            let value = pairing.to_i64().unwrap_or(i64::MAX);
            if !pairing.is_zero() {
                return Err(Error::LatticeIdentity(format!("({name}, L{g}) = {pairing}")));
            }
            checks.push(EigenCheck {
                name: format!("({name}, L{g})"),
                value,
                expected: 0,
            });
        }
    }
    for a in 0..vs.len() {
        for b in a + 1..vs.len() {
            let pairing = intersection(&vs[a].1, &vs[b].1);
            if !pairing.is_zero() {
                return Err(Error::LatticeIdentity(format!(
                    "({}, {}) = {pairing}",
                    vs[a].0, vs[b].0
                )));
            }
            checks.push(EigenCheck {
                name: format!("({}, {})", vs[a].0, vs[b].0),
                value: 0,
                expected: 0,
            });
        }
    }
    Ok(EigenReport { checks })
}

/// `x (x + 1)^4 (x^2 - 4x - 1)`
pub fn expected_coxeter_charpoly() -> IntPoly {
    IntPoly::x()
        .mul(&IntPoly::linear(-1).pow(4))
        .mul(&IntPoly::from_i64(&[-1, -4, 1]))
}

/// Whether every root of `p` is ±1, decided by exact division.
pub fn roots_are_plus_minus_one(p: &IntPoly) -> bool {
    let (_, rest) = p.strip_integer_roots(&[1, -1]);
    rest.degree() == Some(0) && rest.leading().is_some_and(|c| c.abs().is_one())
}
