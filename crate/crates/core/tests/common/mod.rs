//! Reference implementations used as test oracles. They share no code with
//! the library: plain `Vec` matrices, textbook formulas.
#![allow(dead_code)]

pub type Mat = Vec<Vec<f64>>;

pub fn zeros(r: usize, c: usize) -> Mat {
    vec![vec![0.0; c]; r]
}

pub fn eye(n: usize) -> Mat {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn diag(v: &[f64]) -> Mat {
    let mut m = zeros(v.len(), v.len());
    for (i, x) in v.iter().enumerate() {
        m[i][i] = *x;
    }
    m
}

pub fn mul(a: &Mat, b: &Mat) -> Mat {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            out[i][j] = (0..k).map(|t| a[i][t] * b[t][j]).sum();
        }
    }
    out
}

pub fn transpose(a: &Mat) -> Mat {
    let mut out = zeros(a[0].len(), a.len());
    for (i, row) in a.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            out[j][i] = *x;
        }
    }
    out
}

pub fn add(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn sub(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect())
        .collect()
}

pub fn mat_vec(a: &Mat, v: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

/// Gauss-Jordan elimination with partial pivoting.
pub fn inverse(a: &Mat) -> Mat {
    let n = a.len();
    let mut m: Mat = a.iter().zip(eye(n)).map(|(r, e)| r.iter().copied().chain(e).collect()).collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        let p = m[col][col];
        assert!(p.abs() > 1e-300, "singular matrix");
        for x in m[col].iter_mut() {
            *x /= p;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    let pivot_row = m[col].clone();
                    for (x, y) in m[r].iter_mut().zip(pivot_row) {
                        *x -= f * y;
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Constant-velocity filter over `(cx, cy, a, h)` and their rates, written
/// out with explicit F, H, Q, R matrices.
pub struct RefKalman {
    pub wp: f64,
    pub wv: f64,
}

impl Default for RefKalman {
    fn default() -> Self {
        Self {
            wp: 1.0 / 20.0,
            wv: 1.0 / 160.0,
        }
    }
}

pub fn tlwh_to_xyah(b: [f64; 4]) -> [f64; 4] {
    [b[0] + b[2] / 2.0, b[1] + b[3] / 2.0, b[2] / b[3], b[3]]
}

impl RefKalman {
    fn f(&self) -> Mat {
        let mut f = eye(8);
        for i in 0..4 {
            f[i][i + 4] = 1.0;
        }
        f
    }

    fn h(&self) -> Mat {
        let mut h = zeros(4, 8);
        for (i, row) in h.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        h
    }

    pub fn initiate(&self, tlwh: [f64; 4]) -> (Vec<f64>, Mat) {
        let z = tlwh_to_xyah(tlwh);
        let h = z[3];
        let mut x = z.to_vec();
        x.extend([0.0; 4]);
        let s = [
            2.0 * self.wp * h,
            2.0 * self.wp * h,
            1e-2,
            2.0 * self.wp * h,
            10.0 * self.wv * h,
            10.0 * self.wv * h,
            1e-5,
            10.0 * self.wv * h,
        ];
        (x, diag(&s.map(|v| v * v)))
    }

    pub fn predict(&self, x: &[f64], p: &Mat) -> (Vec<f64>, Mat) {
        let h = x[3];
        let s = [
            self.wp * h,
            self.wp * h,
            1e-2,
            self.wp * h,
            self.wv * h,
            self.wv * h,
            1e-5,
            self.wv * h,
        ];
        let q = diag(&s.map(|v| v * v));
        let f = self.f();
        (mat_vec(&f, x), add(&mul(&mul(&f, p), &transpose(&f)), &q))
    }

    pub fn update(&self, x: &[f64], p: &Mat, tlwh: [f64; 4]) -> (Vec<f64>, Mat) {
        let z = tlwh_to_xyah(tlwh);
        let h = x[3];
        let s = [self.wp * h, self.wp * h, 1e-1, self.wp * h];
        let r = diag(&s.map(|v| v * v));
        let hm = self.h();
        let ht = transpose(&hm);
        let innovation_cov = add(&mul(&mul(&hm, p), &ht), &r);
        let k = mul(&mul(p, &ht), &inverse(&innovation_cov));
        let y: Vec<f64> = z.iter().zip(mat_vec(&hm, x)).map(|(a, b)| a - b).collect();
        let dx = mat_vec(&k, &y);
        let x_new = x.iter().zip(dx).map(|(a, b)| a + b).collect();
        let p_new = mul(&sub(&eye(8), &mul(&k, &hm)), p);
        (x_new, p_new)
    }
}

/// All permutations of `0..n` (Heap's algorithm).
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        heap(k - 1, a, out);
        for i in 0..k - 1 {
            if k % 2 == 0 {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
            heap(k - 1, a, out);
        }
    }
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    heap(n, &mut a, &mut out);
    out
}

/// Best total similarity over all matchings of an `m x n` matrix (row-major),
/// found by trying every permutation of the square padding.
pub fn brute_force_best_total(m: usize, n: usize, sim: &[f64]) -> f64 {
    let size = m.max(n);
    let mut best = 0.0f64;
    for perm in permutations(size) {
        let mut total = 0.0;
        for (i, &j) in perm.iter().enumerate() {
            if i < m && j < n {
                total += sim[i * n + j];
            }
        }
        best = best.max(total);
    }
    best
}
