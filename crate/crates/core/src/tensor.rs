//! Small dense rank-3 and rank-4 arrays indexed by parameter indices.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

/// Rank-3 array `t[(a, b, c)]`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor3<T> {
    n: usize,
    data: Vec<T>,
}

/// Rank-4 array `t[(a, b, c, d)]`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor4<T> {
    n: usize,
    data: Vec<T>,
}

macro_rules! tensor_impl {
    ($name:ident, $rank:expr, ($($i:ident),+)) => {
        impl<T: Clone + Default> $name<T> {
            pub fn zeros(n: usize) -> Self {
                Self { n, data: vec![T::default(); n.pow($rank)] }
            }

            pub fn from_fn(n: usize, mut f: impl FnMut($(tensor_impl!(@usize $i)),+) -> T) -> Self {
                let mut t = Self::zeros(n);
                for (k, slot) in t.data.iter_mut().enumerate() {
                    let mut r = k;
                    let mut idx = [0usize; $rank];
                    for d in (0..$rank).rev() {
                        idx[d] = r % n;
                        r /= n;
                    }
                    let [$($i),+] = idx;
                    *slot = f($($i),+);
                }
                t
            }
        }

        impl<T> $name<T> {
            pub fn dim(&self) -> usize {
                self.n
            }

            pub fn as_slice(&self) -> &[T] {
                &self.data
            }

            pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> $name<U> {
                $name { n: self.n, data: self.data.iter().map(f).collect() }
            }

            fn offset(&self, idx: [usize; $rank]) -> usize {
                idx.iter().fold(0, |acc, &i| {
                    debug_assert!(i < self.n);
                    acc * self.n + i
                })
            }
        }

        impl<T> Index<($(tensor_impl!(@usize $i)),+)> for $name<T> {
            type Output = T;
            fn index(&self, ($($i),+): ($(tensor_impl!(@usize $i)),+)) -> &T {
                &self.data[self.offset([$($i),+])]
            }
        }

        impl<T> IndexMut<($(tensor_impl!(@usize $i)),+)> for $name<T> {
            fn index_mut(&mut self, ($($i),+): ($(tensor_impl!(@usize $i)),+)) -> &mut T {
                let o = self.offset([$($i),+]);
                &mut self.data[o]
            }
        }
    };
    (@usize $i:ident) => { usize };
}

tensor_impl!(Tensor3, 3, (a, b, c));
tensor_impl!(Tensor4, 4, (a, b, c, d));

/// Largest entry magnitude of a complex tensor slice.
pub fn max_abs(values: &[crate::C64]) -> f64 {
    values.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
