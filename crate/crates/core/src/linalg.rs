//! Small dense helpers for the handful of low-dimensional vectors and
//! matrices that the hot loops work with.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add_scaled(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn midpoint(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
}

pub fn cross3(a: &[f64], b: &[f64]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Angle between two unit vectors, robust near 0 and pi.
pub fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = sub(a, b).iter().map(|x| x * x).sum::<f64>().sqrt();
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x + y) * (x + y)).sum::<f64>().sqrt();
    2.0 * d.atan2(s)
}

/// Determinant of a square matrix given as columns, by partial pivoting.
pub fn det_columns(cols: &[&[f64]]) -> f64 {
    let n = cols.len();
    let mut a: Vec<f64> = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in cols {
            a.push(c[r]);
        }
    }
    det_in_place(&mut a, n)
}

fn det_in_place(a: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for k in 0..n {
        let mut p = k;
        for r in k + 1..n {
            if a[r * n + k].abs() > a[p * n + k].abs() {
                p = r;
            }
        }
        if a[p * n + k] == 0.0 {
            return 0.0;
        }
        if p != k {
            for c in 0..n {
                a.swap(k * n + c, p * n + c);
            }
            det = -det;
        }
        let pivot = a[k * n + k];
        det *= pivot;
        for r in k + 1..n {
            let factor = a[r * n + k] / pivot;
            if factor != 0.0 {
                for c in k..n {
                    a[r * n + c] -= factor * a[k * n + c];
                }
            }
        }
    }
    det
}

/// Solve `A x = b` where `A` is given by its columns. Returns the solution
/// and the determinant, or `None` when `A` is numerically singular relative
/// to the column scale.
pub fn solve_columns(cols: &[&[f64]], b: &[f64]) -> Option<(Vec<f64>, f64)> {
    let n = cols.len();
    let w = n + 1;
    let mut a = vec![0.0; n * w];
    let mut scale = 0.0f64;
    for r in 0..n {
        for (c, col) in cols.iter().enumerate() {
            a[r * w + c] = col[r];
            scale = scale.max(col[r].abs());
        }
        a[r * w + n] = b[r];
    }
    let tiny = 1e-14 * scale.max(1e-300);
    let mut det = 1.0;
    for k in 0..n {
        let mut p = k;
        for r in k + 1..n {
            if a[r * w + k].abs() > a[p * w + k].abs() {
                p = r;
            }
        }
        if a[p * w + k].abs() <= tiny {
            return None;
        }
        if p != k {
            for c in 0..w {
                a.swap(k * w + c, p * w + c);
            }
            det = -det;
        }
        let pivot = a[k * w + k];
        det *= pivot;
        for r in k + 1..n {
            let factor = a[r * w + k] / pivot;
            if factor != 0.0 {
                for c in k..w {
                    a[r * w + c] -= factor * a[k * w + c];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = a[k * w + n];
        for c in k + 1..n {
            s -= a[k * w + c] * x[c];
        }
        x[k] = s / a[k * w + k];
    }
    Some((x, det))
}

/// Pairwise (cascade) summation; the result depends only on the order of
/// `values`, not on how a caller might have chunked the work.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Parity of the permutation that sorts `v` (entries must be distinct).
pub fn sort_parity(v: &[usize]) -> i8 {
    let mut sign = 1i8;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if v[i] > v[j] {
                sign = -sign;
            }
        }
    }
    sign
}
