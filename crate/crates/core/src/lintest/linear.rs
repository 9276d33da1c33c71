use crate::error::{Error, Result};
use crate::ffield::{dot, BlockVector, FieldVector, PrimeField};

/// `alpha -> <rho, alpha>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearScalarFn {
    coeffs: FieldVector,
}

impl LinearScalarFn {
    pub fn new(coeffs: FieldVector) -> Self {
        Self { coeffs }
    }

    pub fn zero(field: PrimeField, dim: usize) -> Self {
        Self::new(FieldVector::zeros(field, dim))
    }

    pub fn coeffs(&self) -> &FieldVector {
        &self.coeffs
    }

    pub fn field(&self) -> PrimeField {
        self.coeffs.field()
    }

    pub fn dim(&self) -> usize {
        self.coeffs.dim()
    }

    pub fn eval(&self, alpha: &FieldVector) -> Result<u64> {
        crate::ffield::inner_product(&self.coeffs, alpha)
    }

    /// Evaluation on raw canonical coordinates; the caller guarantees the length.
    #[inline]
    pub fn eval_point(&self, alpha: &[u64]) -> u64 {
        dot(self.field(), self.coeffs.entries(), alpha)
    }
}

/// `alpha -> (<c_1, alpha>, ..., <c_l, alpha>)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearVecFn {
    field: PrimeField,
    dim: usize,
    rows: Vec<FieldVector>,
}

impl LinearVecFn {
    pub fn new(field: PrimeField, dim: usize, rows: Vec<FieldVector>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::contract("a vector-valued linear map needs at least one row"));
        }
        for r in &rows {
            if r.field() != field {
                return Err(Error::ModulusMismatch {
                    left: field.modulus(),
                    right: r.field().modulus(),
                });
            }
            if r.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.dim(),
                });
            }
        }
        Ok(Self { field, dim, rows })
    }

    pub fn zero(field: PrimeField, dim: usize, range: usize) -> Result<Self> {
        Self::new(field, dim, vec![FieldVector::zeros(field, dim); range])
    }

    pub fn from_scalar_fns(fns: &[LinearScalarFn]) -> Result<Self> {
        let first = fns
            .first()
            .ok_or_else(|| Error::contract("a vector-valued linear map needs at least one row"))?;
        Self::new(
            first.field(),
            first.dim(),
            fns.iter().map(|f| f.coeffs().clone()).collect(),
        )
    }

    /// Builds the map `(a_1, ..., a_k) -> sum_i M(a_i, theta_i)` where each
    /// `theta_i` has `l` blocks of the common input block width.
    pub fn from_thetas(thetas: &[BlockVector]) -> Result<Self> {
        let first = thetas
            .first()
            .ok_or_else(|| Error::contract("at least one theta block is required"))?;
        let field = first.as_vector().field();
        let (range, width) = (first.blocks(), first.width());
        let mut rows = vec![Vec::with_capacity(thetas.len() * width); range];
        for theta in thetas {
            if theta.blocks() != range || theta.width() != width {
                return Err(Error::BlockShape(format!(
                    "theta of shape {}x{} does not match {}x{}",
                    theta.blocks(),
                    theta.width(),
                    range,
                    width
                )));
            }
            for (j, row) in rows.iter_mut().enumerate() {
                row.extend_from_slice(theta.block(j));
            }
        }
        Self::new(
            field,
            thetas.len() * width,
            rows.into_iter().map(|r| FieldVector::new(field, r)).collect(),
        )
    }

    /// The inverse of [`LinearVecFn::from_thetas`]: block `i` of every row,
    /// stacked across rows.
    pub fn theta(&self, i: usize, width: usize) -> Result<BlockVector> {
        if width == 0 || !self.dim.is_multiple_of(width) || (i + 1) * width > self.dim {
            return Err(Error::BlockShape(format!(
                "cannot take block {i} of width {width} from dimension {}",
                self.dim
            )));
        }
        let entries = self
            .rows
            .iter()
            .flat_map(|r| r.entries()[i * width..(i + 1) * width].iter().copied())
            .collect();
        BlockVector::new(FieldVector::new(self.field, entries), self.rows.len(), width)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn range(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[FieldVector] {
        &self.rows
    }

    pub fn coordinate(&self, i: usize) -> LinearScalarFn {
        LinearScalarFn::new(self.rows[i].clone())
    }

    pub fn eval(&self, alpha: &FieldVector) -> Result<FieldVector> {
        if alpha.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: alpha.dim(),
            });
        }
        if alpha.field() != self.field {
            return Err(Error::ModulusMismatch {
                left: self.field.modulus(),
                right: alpha.field().modulus(),
            });
        }
        Ok(FieldVector::new(self.field, self.eval_point(alpha.entries())))
    }

    pub fn eval_point(&self, alpha: &[u64]) -> Vec<u64> {
        self.rows.iter().map(|r| dot(self.field, r.entries(), alpha)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u64) -> PrimeField {
        PrimeField::new(q).unwrap()
    }

    #[test]
    fn scalar_examples() {
        let zero = LinearScalarFn::zero(f(7), 3);
        assert_eq!(zero.eval(&FieldVector::new(f(7), vec![3, 4, 5])).unwrap(), 0);
        let proj = LinearScalarFn::new(FieldVector::unit(f(7), 3, 0));
        assert_eq!(proj.eval(&FieldVector::new(f(7), vec![6, 4, 5])).unwrap(), 6);
        let c = LinearScalarFn::new(FieldVector::new(f(5), vec![2, 3]));
        assert_eq!(c.eval(&FieldVector::new(f(5), vec![1, 1])).unwrap(), 0);
        assert!(c.eval(&FieldVector::new(f(5), vec![1])).is_err());
    }

    #[test]
    fn thetas_roundtrip() {
        let field = f(5);
        let t1 = BlockVector::new(FieldVector::new(field, vec![1, 2, 3, 4, 0, 1]), 3, 2).unwrap();
        let t2 = BlockVector::new(FieldVector::new(field, vec![4, 4, 0, 0, 2, 3]), 3, 2).unwrap();
        let c = LinearVecFn::from_thetas(&[t1.clone(), t2.clone()]).unwrap();
        assert_eq!((c.dim(), c.range()), (4, 3));
        assert_eq!(c.theta(0, 2).unwrap(), t1);
        assert_eq!(c.theta(1, 2).unwrap(), t2);
        // c(a1, a2) = M(a1, t1) + M(a2, t2)
        let a = FieldVector::new(field, vec![1, 2, 3, 1]);
        let m1 = crate::ffield::block_inner(&FieldVector::new(field, vec![1, 2]), &t1).unwrap();
        let m2 = crate::ffield::block_inner(&FieldVector::new(field, vec![3, 1]), &t2).unwrap();
        assert_eq!(c.eval(&a).unwrap(), m1.add(&m2).unwrap());
        assert!(c.theta(2, 2).is_err());
    }
}
