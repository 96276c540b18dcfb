//! Dense rank ≤ 2 tensors of `f64`, row-major.
//!
//! Scalars are 1×1, column vectors are n×1, matrices are r×c. This is all
//! the linear algebra the cells need; nothing here knows about gradients.

use std::fmt;

#[derive(Clone, PartialEq)]
pub struct Tensor {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tensor[{}x{}]{:?}", self.rows, self.cols, self.data)
    }
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "tensor dimensions must be positive");
        Tensor { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(rows * cols, data.len(), "tensor data length must be rows*cols");
        assert!(rows > 0 && cols > 0, "tensor dimensions must be positive");
        Tensor { rows, cols, data }
    }

    /// 1×1 tensor.
    pub fn scalar(x: f64) -> Self {
        Tensor { rows: 1, cols: 1, data: vec![x] }
    }

    /// n×1 column vector.
    pub fn column(data: Vec<f64>) -> Self {
        assert!(!data.is_empty());
        Tensor { rows: data.len(), cols: 1, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        false // dimensions are always positive
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Value of a 1×1 tensor.
    pub fn item(&self) -> f64 {
        assert_eq!((self.rows, self.cols), (1, 1), "item() requires a 1x1 tensor");
        self.data[0]
    }

    pub fn fill(&mut self, v: f64) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn l2_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// self += other (shapes must match).
    pub fn add_in_place(&mut self, other: &Tensor) {
        assert_eq!(self.shape(), other.shape(), "add_in_place shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    /// self += s * other (shapes must match).
    pub fn add_scaled_in_place(&mut self, other: &Tensor, s: f64) {
        assert_eq!(self.shape(), other.shape(), "add_scaled_in_place shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn scale_in_place(&mut self, s: f64) {
        self.data.iter_mut().for_each(|x| *x *= s);
    }

    /// C = A·B. Panics on inner-dimension mismatch (graph-level code
    /// validates shapes before calling).
    pub fn matmul(&self, other: &Tensor) -> Tensor {
        assert_eq!(self.cols, other.rows, "matmul inner dimension mismatch");
        let (m, k, n) = (self.rows, self.cols, other.cols);
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            let arow = &self.data[i * k..(i + 1) * k];
            let orow = &mut out[i * n..(i + 1) * n];
            for (p, &a_ip) in arow.iter().enumerate() {
                if a_ip == 0.0 {
                    continue;
                }
                let brow = &other.data[p * n..(p + 1) * n];
                for (o, &b_pj) in orow.iter_mut().zip(brow) {
                    *o += a_ip * b_pj;
                }
            }
        }
        Tensor { rows: m, cols: n, data: out }
    }

    /// C = A·Bᵀ without materializing the transpose. A is m×k, B is n×k.
    pub fn matmul_nt(&self, other: &Tensor) -> Tensor {
        assert_eq!(self.cols, other.cols, "matmul_nt inner dimension mismatch");
        let (m, k, n) = (self.rows, self.cols, other.rows);
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            let arow = &self.data[i * k..(i + 1) * k];
            for j in 0..n {
                let brow = &other.data[j * k..(j + 1) * k];
                let mut acc = 0.0;
                for (a, b) in arow.iter().zip(brow) {
                    acc += a * b;
                }
                out[i * n + j] = acc;
            }
        }
        Tensor { rows: m, cols: n, data: out }
    }

    /// C = Aᵀ·B without materializing the transpose. A is m×k, B is m×n.
    pub fn matmul_tn(&self, other: &Tensor) -> Tensor {
        assert_eq!(self.rows, other.rows, "matmul_tn inner dimension mismatch");
        let (m, k, n) = (self.rows, self.cols, other.cols);
        let mut out = vec![0.0; k * n];
        for i in 0..m {
            let arow = &self.data[i * k..(i + 1) * k];
            let brow = &other.data[i * n..(i + 1) * n];
            for (p, &a_ip) in arow.iter().enumerate() {
                if a_ip == 0.0 {
                    continue;
                }
                let orow = &mut out[p * n..(p + 1) * n];
                for (o, &b_ij) in orow.iter_mut().zip(brow) {
                    *o += a_ip * b_ij;
                }
            }
        }
        Tensor { rows: k, cols: n, data: out }
    }
}
