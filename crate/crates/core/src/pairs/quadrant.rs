use num_complex::Complex64;

use super::amplitude::PairAmplitude;
use super::PairError;

/// Weights of `f` restricted to the four exit quadrants.
///
/// `LR` means the `+1` atom left of the condensate (`x < −a`) and the `−1`
/// atom right of it (`y > a`). Points with either atom in `[−a, a]` belong
/// to no quadrant and make up the leakage.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadrantDecomposition {
    pub w_ll: f64,
    pub w_lr: f64,
    pub w_rl: f64,
    pub w_rr: f64,
    pub leakage: f64,
    pub total: f64,
    /// Grid indices with `x < −a` and with `x > a`.
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    /// `f_LR` on `left × right`, row-major over `left`.
    pub f_lr: Vec<Complex64>,
    /// `f_RL` on `right × left`, row-major over `right`.
    pub f_rl: Vec<Complex64>,
    pub cell_area: f64,
}

impl QuadrantDecomposition {
    pub fn weights(&self) -> [f64; 4] {
        [self.w_ll, self.w_lr, self.w_rl, self.w_rr]
    }
}

fn block_weight(fa: &PairAmplitude, rows: &[usize], cols: &[usize]) -> f64 {
    rows.iter()
        .map(|&i| cols.iter().map(|&j| fa.at(i, j).norm_sqr()).sum::<f64>())
        .sum::<f64>()
        * fa.cell_area()
}

pub fn quadrant_decompose(fa: &PairAmplitude) -> QuadrantDecomposition {
    let a = fa.half_width;
    let n = fa.n();
    let left: Vec<usize> = (0..n).filter(|&j| fa.grid.position(j) < -a).collect();
    let right: Vec<usize> = (0..n).filter(|&j| fa.grid.position(j) > a).collect();
    let block = |rows: &[usize], cols: &[usize]| -> Vec<Complex64> {
        rows.iter().flat_map(|&i| cols.iter().map(move |&j| fa.at(i, j))).collect()
    };
    let w_ll = block_weight(fa, &left, &left);
    let w_lr = block_weight(fa, &left, &right);
    let w_rl = block_weight(fa, &right, &left);
    let w_rr = block_weight(fa, &right, &right);
    let total = fa.norm_sq;
    QuadrantDecomposition {
        w_ll,
        w_lr,
        w_rl,
        w_rr,
        leakage: total - (w_ll + w_lr + w_rl + w_rr),
        total,
        f_lr: block(&left, &right),
        f_rl: block(&right, &left),
        left,
        right,
        cell_area: fa.cell_area(),
    }
}

/// The state after detecting one atom on each side.
///
/// Both branches are indexed by `(l, r)`, the left and right atom
/// positions: `chi_plus_left(l, r) = f_LR(l, r)` carries `+1` on the left,
/// `chi_minus_left(l, r) = f_RL(r, l)` carries `−1` on the left. Together
/// they have unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedPairState {
    pub chi_plus_left: Vec<Complex64>,
    pub chi_minus_left: Vec<Complex64>,
    pub n_left: usize,
    pub n_right: usize,
    pub cell_area: f64,
    /// `(w_LR + w_RL) / total`.
    pub success_probability: f64,
}

impl ProjectedPairState {
    fn inner(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>() * self.cell_area
    }

    /// Weight of the `+1`-left branch.
    pub fn p_plus_left(&self) -> f64 {
        self.inner(&self.chi_plus_left, &self.chi_plus_left).re
    }

    pub fn p_minus_left(&self) -> f64 {
        self.inner(&self.chi_minus_left, &self.chi_minus_left).re
    }

    /// `⟨chi_minus_left | chi_plus_left⟩`.
    pub fn branch_overlap(&self) -> Complex64 {
        self.inner(&self.chi_minus_left, &self.chi_plus_left)
    }

    pub fn norm(&self) -> f64 {
        self.p_plus_left() + self.p_minus_left()
    }
}

pub fn post_select(q: &QuadrantDecomposition) -> Result<ProjectedPairState, PairError> {
    let kept = q.w_lr + q.w_rl;
    if !(kept > 0.0) {
        return Err(PairError::EmptyPostSelection);
    }
    let (nl, nr) = (q.left.len(), q.right.len());
    let scale = 1.0 / kept.sqrt();
    let chi_plus_left = q.f_lr.iter().map(|z| z * scale).collect();
    // f_RL is stored as (right, left); reorder to (left, right)
    let mut chi_minus_left = vec![Complex64::default(); nl * nr];
    for r in 0..nr {
        for l in 0..nl {
            chi_minus_left[l * nr + r] = q.f_rl[r * nl + l] * scale;
        }
    }
    Ok(ProjectedPairState {
        chi_plus_left,
        chi_minus_left,
        n_left: nl,
        n_right: nr,
        cell_area: q.cell_area,
        success_probability: if q.total > 0.0 { kept / q.total } else { 0.0 },
    })
}
