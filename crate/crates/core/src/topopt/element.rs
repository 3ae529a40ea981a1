use nalgebra::{Matrix4, SMatrix};

use super::TopOptError;

pub type ElementMatrix = SMatrix<f64, 12, 12>;
pub type StrainMatrix = SMatrix<f64, 6, 12>;

/// Shape-function gradients and volume of a linear tetrahedron.
pub fn shape_gradients(corners: &[[f64; 3]; 4]) -> Result<([[f64; 3]; 4], f64), TopOptError> {
    let m = Matrix4::from_fn(|i, j| if j == 0 { 1.0 } else { corners[i][j - 1] });
    let volume = m.determinant() / 6.0;
    let inv = m.try_inverse().ok_or(TopOptError::DegenerateElement)?;
    if !(volume.abs() > 0.0) {
        return Err(TopOptError::DegenerateElement);
    }
    let mut g = [[0.0; 3]; 4];
    for (i, gi) in g.iter_mut().enumerate() {
        for k in 0..3 {
            gi[k] = inv[(k + 1, i)];
        }
    }
    Ok((g, volume.abs()))
}

/// Isotropic constitutive matrix in Voigt order `xx, yy, zz, yz, xz, xy`
/// with engineering shear strains.
pub fn isotropic_elasticity(e: f64, nu: f64) -> SMatrix<f64, 6, 6> {
    let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mu = e / (2.0 * (1.0 + nu));
    let mut d = SMatrix::<f64, 6, 6>::zeros();
    for i in 0..3 {
        for j in 0..3 {
            d[(i, j)] = lambda;
        }
        d[(i, i)] = lambda + 2.0 * mu;
        d[(i + 3, i + 3)] = mu;
    }
    d
}

pub fn strain_matrix(grads: &[[f64; 3]; 4]) -> StrainMatrix {
    let mut b = StrainMatrix::zeros();
    for (a, g) in grads.iter().enumerate() {
        let c = 3 * a;
        b[(0, c)] = g[0];
        b[(1, c + 1)] = g[1];
        b[(2, c + 2)] = g[2];
        b[(3, c + 1)] = g[2];
        b[(3, c + 2)] = g[1];
        b[(4, c)] = g[2];
        b[(4, c + 2)] = g[0];
        b[(5, c)] = g[1];
        b[(5, c + 1)] = g[0];
    }
    b
}

/// `vol * B^T D B`, dofs ordered `(x, y, z)` per corner. Exactly symmetric.
pub fn element_stiffness(corners: &[[f64; 3]; 4], e: f64, nu: f64) -> Result<ElementMatrix, TopOptError> {
    let (grads, volume) = shape_gradients(corners)?;
    let b = strain_matrix(&grads);
    let k = b.transpose() * isotropic_elasticity(e, nu) * b * volume;
    Ok((k + k.transpose()) * 0.5)
}
