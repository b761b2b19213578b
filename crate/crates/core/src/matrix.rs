use std::ops::{Index, IndexMut};

/// Dense row-major `n x n` matrix indexed by `(row, col)`.
///
/// Used for operator-pair quantities: sharing bounds, sharing debts, and
/// per-region sharing decisions where `(donor, recipient)` is the index.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Clone> SquareMatrix<T> {
    pub fn filled(n: usize, value: T) -> Self {
        Self {
            n,
            data: vec![value; n * n],
        }
    }
}

impl<T: Clone + Default> SquareMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self::filled(n, T::default())
    }
}

impl<T> SquareMatrix<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Option<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return None;
        }
        Some(Self {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Iterates `(row, col, &value)` over every entry in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        let n = self.n;
        self.data.iter().enumerate().map(move |(k, v)| (k / n, k % n, v))
    }

    /// Iterates off-diagonal entries in row-major order.
    pub fn off_diagonal(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        self.iter().filter(|(i, j, _)| i != j)
    }
}

impl<T: Clone> SquareMatrix<T> {
    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }
}

impl<T> Index<(usize, usize)> for SquareMatrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        assert!(i < self.n && j < self.n, "index ({i}, {j}) out of {0}x{0}", self.n);
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for SquareMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        assert!(i < self.n && j < self.n, "index ({i}, {j}) out of {0}x{0}", self.n);
        &mut self.data[i * self.n + j]
    }
}
