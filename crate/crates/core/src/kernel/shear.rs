use super::exact;
use super::types::{q, ExactScalar, Point4};

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A unimodular integer map `L U` chosen by salt, with its integer inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shear {
    m: [[i64; 4]; 4],
    inv: [[ExactScalar; 4]; 4],
}

const STEPS: [i64; 4] = [1, -1, 2, -2];

impl Shear {
    pub fn new(salt: u64) -> Shear {
        let mut st = salt;
        let mut l = [[0i64; 4]; 4];
        let mut u = [[0i64; 4]; 4];
        for i in 0..4 {
            l[i][i] = 1;
            u[i][i] = 1;
            for j in 0..i {
                l[i][j] = STEPS[(splitmix(&mut st) % 4) as usize];
                u[j][i] = STEPS[(splitmix(&mut st) % 4) as usize];
            }
        }
        let mut m = [[0i64; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = (0..4).map(|k| l[i][k] * u[k][j]).sum();
            }
        }
        let mut aug: Vec<Vec<ExactScalar>> = (0..4)
            .map(|i| {
                let mut r: Vec<ExactScalar> = m[i].iter().map(|&v| q(v)).collect();
                r.extend((0..4).map(|j| q((i == j) as i64)));
                r
            })
            .collect();
        exact::row_echelon(&mut aug);
        let inv = std::array::from_fn(|i| std::array::from_fn(|j| aug[i][4 + j].clone()));
        Shear { m, inv }
    }

    pub fn matrix(&self) -> &[[i64; 4]; 4] {
        &self.m
    }

    pub fn apply(&self, p: &Point4) -> Point4 {
        let c = p.coords();
        Point4::from_array(std::array::from_fn(|i| {
            (0..4).map(|j| q(self.m[i][j]) * &c[j]).sum()
        }))
    }

    pub fn invert(&self, p: &Point4) -> Point4 {
        let c = p.coords();
        Point4::from_array(std::array::from_fn(|i| {
            (0..4).map(|j| &self.inv[i][j] * &c[j]).sum()
        }))
    }

    /// Applies the linear part to a direction vector.
    pub fn apply_vec(&self, v: &[ExactScalar; 4]) -> [ExactScalar; 4] {
        std::array::from_fn(|i| (0..4).map(|j| q(self.m[i][j]) * &v[j]).sum())
    }
}

/// Applies the salt-indexed unimodular shear to every point.
pub fn generic_shear(points: &[Point4], salt: u64) -> Vec<Point4> {
    let s = Shear::new(salt);
    points.iter().map(|p| s.apply(p)).collect()
}
