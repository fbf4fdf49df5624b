//! Uniform mesh on the truncated half-line `[0, L]`, nodal fields, finite
//! difference operators and trapezoid-rule norms.

use std::ops::Index;

use crate::error::{Error, Result};
use crate::scalar::{count, lit, Scalar};

/// Uniform mesh with `n` cells and `n + 1` nodes `x_i = i·dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    length: T,
    n: usize,
    dx: T,
}

/// Real value per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T>(Vec<T>);

/// Stencil used by [`Grid::diff_first`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffMode {
    /// Second-order central interior, second-order one-sided at both ends.
    Central,
    /// Backward difference, for quantities transported to the right.
    UpwindPositiveSpeed,
    /// Central interior, first-order forward at the left end and backward at the right.
    OneSided,
}

/// Quadrature functional evaluated by [`Grid::norm`].
#[derive(Debug, Clone, Copy)]
pub enum Norm<'a, T> {
    L1,
    /// `∫ f²`
    L2Sq,
    Lp(T),
    Sup,
    /// `∫ f² w`
    WeightedL2Sq(&'a Field<T>),
}

impl<T: Scalar> Grid<T> {
    pub fn new(length: T, n: usize) -> Result<Self> {
        if !(length > T::zero()) || !length.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "length must be > 0, got {length}"
            )));
        }
        if n < 8 {
            return Err(Error::InvalidGrid(format!(
                "need at least 8 cells, got {n}"
            )));
        }
        Ok(Self {
            length,
            n,
            dx: length / count(n),
        })
    }

    pub fn length(&self) -> T {
        self.length
    }

    /// Number of cells.
    pub fn cells(&self) -> usize {
        self.n
    }

    /// Number of nodes, `cells() + 1`.
    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    pub fn x(&self, i: usize) -> T {
        if i == self.n {
            self.length
        } else {
            count::<T>(i) * self.dx
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = T> + '_ {
        (0..=self.n).map(move |i| self.x(i))
    }

    /// Samples `f` at every node.
    pub fn sample<F: FnMut(T) -> T>(&self, mut f: F) -> Field<T> {
        Field(self.nodes().map(&mut f).collect())
    }

    pub fn zeros(&self) -> Field<T> {
        Field(vec![T::zero(); self.len()])
    }

    pub fn constant(&self, c: T) -> Field<T> {
        Field(vec![c; self.len()])
    }

    pub fn check(&self, f: &Field<T>) -> Result<()> {
        if f.len() != self.len() {
            return Err(Error::MisalignedField {
                expected: self.len(),
                got: f.len(),
            });
        }
        Ok(())
    }

    pub fn diff_first(&self, f: &Field<T>, mode: DiffMode) -> Result<Field<T>> {
        self.check(f)?;
        let v = f.values();
        let n = self.n;
        let dx = self.dx;
        let two = lit::<T>(2.0);
        let mut out = vec![T::zero(); n + 1];
        match mode {
            DiffMode::Central | DiffMode::OneSided => {
                for i in 1..n {
                    out[i] = (v[i + 1] - v[i - 1]) / (two * dx);
                }
                if mode == DiffMode::Central {
                    let three = lit::<T>(3.0);
                    let four = lit::<T>(4.0);
                    out[0] = (-three * v[0] + four * v[1] - v[2]) / (two * dx);
                    out[n] = (three * v[n] - four * v[n - 1] + v[n - 2]) / (two * dx);
                } else {
                    out[0] = (v[1] - v[0]) / dx;
                    out[n] = (v[n] - v[n - 1]) / dx;
                }
            }
            DiffMode::UpwindPositiveSpeed => {
                out[0] = (v[1] - v[0]) / dx;
                for i in 1..=n {
                    out[i] = (v[i] - v[i - 1]) / dx;
                }
            }
        }
        Ok(Field(out))
    }

    /// Three-point second difference; boundary nodes copy their neighbour.
    pub fn diff_second(&self, f: &Field<T>) -> Result<Field<T>> {
        self.check(f)?;
        let v = f.values();
        let n = self.n;
        let dx2 = self.dx * self.dx;
        let two = lit::<T>(2.0);
        let mut out = vec![T::zero(); n + 1];
        for i in 1..n {
            out[i] = (v[i + 1] - two * v[i] + v[i - 1]) / dx2;
        }
        out[0] = out[1];
        out[n] = out[n - 1];
        Ok(Field(out))
    }

    /// Composite trapezoid rule over `[0, L]` (or max-abs for `Sup`).
    pub fn norm(&self, f: &Field<T>, kind: Norm<'_, T>) -> Result<T> {
        self.check(f)?;
        match kind {
            Norm::L1 => Ok(self.trapezoid(f.values().iter().map(|v| v.abs()))),
            Norm::L2Sq => Ok(self.trapezoid(f.values().iter().map(|&v| v * v))),
            Norm::Lp(p) => {
                if !(p >= T::one()) {
                    return Err(Error::InvalidExponent(p.to_f64().unwrap_or(f64::NAN)));
                }
                let integral = self.trapezoid(f.values().iter().map(|v| v.abs().powf(p)));
                Ok(integral.powf(p.recip()))
            }
            Norm::Sup => Ok(f.sup_abs()),
            Norm::WeightedL2Sq(w) => {
                self.check(w)?;
                Ok(self.trapezoid(f.values().iter().zip(w.values()).map(|(&v, &w)| v * v * w)))
            }
        }
    }

    /// Trapezoid rule applied to nodal samples in node order.
    pub fn trapezoid<I: IntoIterator<Item = T>>(&self, samples: I) -> T {
        let half = lit::<T>(0.5);
        let mut total = T::zero();
        for (i, v) in samples.into_iter().enumerate() {
            if i == 0 || i == self.n {
                total = total + half * v;
            } else {
                total = total + v;
            }
        }
        total * self.dx
    }
}

impl<T: Scalar> Field<T> {
    pub fn from_vec(values: Vec<T>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[T] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn map<F: FnMut(T) -> T>(&self, f: F) -> Self {
        Self(self.0.iter().copied().map(f).collect())
    }

    /// Elementwise combination; panics on length mismatch.
    pub fn zip_map<F: FnMut(T, T) -> T>(&self, other: &Self, mut f: F) -> Self {
        assert_eq!(self.len(), other.len(), "field length mismatch");
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn div(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a / b)
    }

    pub fn scale(&self, k: T) -> Self {
        self.map(|v| v * k)
    }

    pub fn min(&self) -> T {
        self.0.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.0.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn sup_abs(&self) -> T {
        self.0.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Index of the first entry that is not strictly positive (NaN included).
    pub fn first_nonpositive(&self) -> Option<usize> {
        self.0.iter().position(|&v| !(v > T::zero()))
    }
}

impl<T> Index<usize> for Field<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(l: f64, n: usize) -> Grid<f64> {
        Grid::new(l, n).unwrap()
    }

    #[test]
    fn rejects_small_or_degenerate_grids() {
        assert!(Grid::new(1.0, 7).is_err());
        assert!(Grid::new(0.0, 100).is_err());
        assert!(Grid::new(f64::NAN, 100).is_err());
        let g = grid(10.0, 8);
        assert_eq!(g.x(0), 0.0);
        assert_eq!(g.x(8), 10.0);
        assert!(g.nodes().zip(g.nodes().skip(1)).all(|(a, b)| b > a));
    }

    #[test]
    fn constant_has_zero_derivatives() {
        let g = grid(3.0, 30);
        let f = g.constant(2.5);
        for mode in [
            DiffMode::Central,
            DiffMode::UpwindPositiveSpeed,
            DiffMode::OneSided,
        ] {
            assert!(g.diff_first(&f, mode).unwrap().sup_abs() < 1e-12);
        }
        assert!(g.diff_second(&f).unwrap().sup_abs() < 1e-10);
    }

    #[test]
    fn linear_field_is_differentiated_exactly() {
        let g = grid(2.0, 20);
        let f = g.sample(|x| x);
        for mode in [DiffMode::Central, DiffMode::UpwindPositiveSpeed] {
            let d = g.diff_first(&f, mode).unwrap();
            for i in 1..g.cells() {
                assert!((d[i] - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn central_exact_for_quadratic() {
        let g = grid(2.0, 20);
        let f = g.sample(|x| x * x);
        let d = g.diff_first(&f, DiffMode::Central).unwrap();
        assert!((d[10] - 2.0).abs() < 1e-12);
        // one-sided end stencils are also second order, hence exact here
        assert!((d[0] - 0.0).abs() < 1e-12);
        assert!((d[20] - 4.0).abs() < 1e-12);
        let d2 = g.diff_second(&f).unwrap();
        for i in 1..20 {
            assert!((d2[i] - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn second_difference_of_sine() {
        let g = grid(2.0, 200);
        let f = g.sample(f64::sin);
        let d2 = g.diff_second(&f).unwrap();
        assert!((d2[100] + 1f64.sin()).abs() < 1e-4);
    }

    #[test]
    fn norms_of_simple_fields() {
        let g = grid(10.0, 100);
        let one = g.constant(1.0);
        assert!((g.norm(&one, Norm::L1).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(g.norm(&one, Norm::Sup).unwrap(), 1.0);
        let zero = g.zeros();
        for kind in [
            Norm::L1,
            Norm::L2Sq,
            Norm::Lp(3.0),
            Norm::Sup,
            Norm::WeightedL2Sq(&one),
        ] {
            assert_eq!(g.norm(&zero, kind).unwrap(), 0.0);
        }
    }

    #[test]
    fn exponential_l2() {
        let g = grid(40.0, 4000);
        let f = g.sample(|x| (-x).exp());
        // trapezoid error is dx²/12·|f'(0)·f(0)·2| ≈ 1.7e-5 relative to the exact 0.5
        let v = g.norm(&f, Norm::L2Sq).unwrap();
        assert!((v - 0.5).abs() < 2e-5, "{v}");
        // the end-corrected value matches to 1e-6
        let corrected = v - g.dx() * g.dx() / 12.0 * 2.0;
        assert!((corrected - 0.5).abs() < 1e-6, "{corrected}");
    }

    #[test]
    fn misaligned_and_bad_exponent() {
        let g = grid(1.0, 10);
        let f = Field::from_vec(vec![0.0; 5]);
        assert_eq!(
            g.diff_first(&f, DiffMode::Central).unwrap_err(),
            Error::MisalignedField {
                expected: 11,
                got: 5
            }
        );
        assert!(g.diff_second(&f).is_err());
        assert!(g.norm(&f, Norm::L1).is_err());
        assert_eq!(
            g.norm(&g.zeros(), Norm::Lp(0.5)).unwrap_err(),
            Error::InvalidExponent(0.5)
        );
    }

    #[test]
    fn central_derivative_converges_at_second_order() {
        let err = |n: usize| {
            let g = grid(3.0, n);
            let d = g
                .diff_first(&g.sample(|x| (2.0 * x).sin()), DiffMode::Central)
                .unwrap();
            let e = d.sub(&g.sample(|x| 2.0 * (2.0 * x).cos()));
            g.norm(&e, Norm::L1).unwrap()
        };
        let order = (err(100) / err(200)).log2();
        assert!(order >= 1.9, "{order}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn quadrature_is_linear(
                a in -3.0f64..3.0, b in -3.0f64..3.0,
                k1 in 0.1f64..4.0, k2 in 0.1f64..4.0,
            ) {
                let g = grid(5.0, 64);
                let f = g.sample(|x| (k1 * x).sin());
                let h = g.sample(|x| (k2 * x).cos());
                let lin = f.scale(a).add(&h.scale(b));
                let int = |v: &Field<f64>| g.trapezoid(v.values().iter().copied());
                prop_assert!((int(&lin) - (a * int(&f) + b * int(&h))).abs() < 1e-12);
                // polarisation: ∫fh = (‖f+h‖² − ‖f−h‖²)/4
                let plus = g.norm(&f.add(&h), Norm::L2Sq).unwrap();
                let minus = g.norm(&f.sub(&h), Norm::L2Sq).unwrap();
                prop_assert!(((plus - minus) / 4.0 - int(&f.mul(&h))).abs() < 1e-12);
                // sup bounds L²
                let l2 = g.norm(&lin, Norm::L2Sq).unwrap();
                let sup = g.norm(&lin, Norm::Sup).unwrap();
                prop_assert!(l2 <= sup * sup * g.length() + 1e-12);
            }
        }
    }
}
