//! Dense complex LU with partial pivoting, sized for the small systems this
//! crate solves (row-selection determinants, interpolation fits).

use crate::numerics::{Ctx, PrecComplex};

pub struct LuFactors {
    lu: Vec<Vec<PrecComplex>>,
    perm: Vec<usize>,
    det: PrecComplex,
    singular: bool,
}

impl LuFactors {
    pub fn det(&self) -> &PrecComplex {
        &self.det
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }
}

/// Factor a square matrix; a column with an exactly-zero pivot marks the
/// matrix singular with determinant exactly zero.
pub fn lu_factor(ctx: &Ctx, a: &[Vec<PrecComplex>]) -> LuFactors {
    let n = a.len();
    let mut lu: Vec<Vec<PrecComplex>> = a.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut det = ctx.one();
    for col in 0..n {
        let mut best = col;
        let mut best_mag = lu[col][col].abs();
        for r in col + 1..n {
            let mag = lu[r][col].abs();
            if mag > best_mag {
                best = r;
                best_mag = mag;
            }
        }
        if best_mag.is_zero() {
            return LuFactors { lu, perm, det: ctx.zero(), singular: true };
        }
        if best != col {
            lu.swap(col, best);
            perm.swap(col, best);
            det = det.neg();
        }
        det = det.mul(&lu[col][col]);
        let pivot = lu[col][col].clone();
        for r in col + 1..n {
            let factor = lu[r][col].div(&pivot);
            lu[r][col] = factor.clone();
            for c in col + 1..n {
                let upd = lu[r][c].sub(&factor.mul(&lu[col][c]));
                lu[r][c] = upd;
            }
        }
    }
    LuFactors { lu, perm, det, singular: false }
}

pub fn determinant(ctx: &Ctx, a: &[Vec<PrecComplex>]) -> PrecComplex {
    lu_factor(ctx, a).det().clone()
}

/// Solve A x = b; None when the factorization hit an exactly-zero pivot.
pub fn solve(ctx: &Ctx, a: &[Vec<PrecComplex>], b: &[PrecComplex]) -> Option<Vec<PrecComplex>> {
    let f = lu_factor(ctx, a);
    if f.singular {
        return None;
    }
    let n = b.len();
    let mut y: Vec<PrecComplex> = f.perm.iter().map(|&p| b[p].clone()).collect();
    for r in 1..n {
        for c in 0..r {
            let upd = y[r].sub(&f.lu[r][c].mul(&y[c]));
            y[r] = upd;
        }
    }
    for r in (0..n).rev() {
        for c in r + 1..n {
            let upd = y[r].sub(&f.lu[r][c].mul(&y[c]));
            y[r] = upd;
        }
        y[r] = y[r].div(&f.lu[r][r]);
    }
    Some(y)
}
