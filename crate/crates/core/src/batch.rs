/// Row-major n×d sample matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    dim: usize,
    data: Vec<f64>,
}

impl SampleBatch {
    pub fn new(dim: usize, data: Vec<f64>) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        assert_eq!(data.len() % dim, 0, "data length must be a multiple of dim");
        SampleBatch { dim, data }
    }

    pub fn from_rows(dim: usize, rows: &[Vec<f64>]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            assert_eq!(r.len(), dim);
            data.extend_from_slice(r);
        }
        SampleBatch::new(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn select(&self, idx: &[usize]) -> SampleBatch {
        let mut data = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        SampleBatch::new(self.dim, data)
    }

    /// Concatenate batches of equal dimension.
    pub fn concat(parts: Vec<SampleBatch>) -> SampleBatch {
        let dim = parts.first().map(|b| b.dim).unwrap_or(1);
        let mut data = Vec::with_capacity(parts.iter().map(|b| b.data.len()).sum());
        for p in parts {
            assert_eq!(p.dim, dim);
            data.extend(p.data);
        }
        SampleBatch::new(dim, data)
    }

    /// Per-coordinate mean and the isotropic variance (mean of coordinate variances).
    pub fn mean_and_variance(&self) -> (Vec<f64>, f64) {
        let n = self.len() as f64;
        let mut mean = vec![0.0; self.dim];
        for r in self.rows() {
            for (m, x) in mean.iter_mut().zip(r) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut ss = 0.0;
        for r in self.rows() {
            for (m, x) in mean.iter().zip(r) {
                ss += (x - m) * (x - m);
            }
        }
        (mean, ss / ((n - 1.0) * self.dim as f64))
    }

    pub fn map_rows(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> SampleBatch {
        let mut data = Vec::with_capacity(self.data.len());
        for r in self.rows() {
            data.extend(f(r));
        }
        SampleBatch::new(self.dim, data)
    }
}
