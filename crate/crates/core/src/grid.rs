//! Uniform grids on the unit interval and unit square, and the second-order
//! finite-difference Laplacian with Dirichlet, Neumann and Robin faces.
//!
//! Robin and Neumann faces keep their boundary nodes as unknowns; the ghost
//! value outside the domain is eliminated through the centred difference of
//! the boundary condition. Dirichlet nodes are removed and their values move
//! into the load vector, so diffusion reads `du/dt = A u + g`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, DirectSolver};
use crate::scalar::Real;

/// Field values on the active degrees of freedom of a [`DiscreteDiffusion`].
pub type ScalarField<T> = Vec<T>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniformGrid {
    dimension: usize,
    intervals: usize,
}

impl UniformGrid {
    pub fn new(dimension: usize, intervals: usize) -> Result<Self> {
        if dimension != 1 && dimension != 2 {
            return Err(Error::InvalidGrid(format!("dimension must be 1 or 2, got {dimension}")));
        }
        if intervals < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 intervals per axis, got {intervals}")));
        }
        Ok(Self { dimension, intervals })
    }

    pub fn one_d(intervals: usize) -> Result<Self> {
        Self::new(1, intervals)
    }

    pub fn two_d(intervals: usize) -> Result<Self> {
        Self::new(2, intervals)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Number of intervals `N` per axis.
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.intervals + 1
    }

    pub fn node_count(&self) -> usize {
        self.nodes_per_axis().pow(self.dimension as u32)
    }

    pub fn spacing<T: Real>(&self) -> T {
        T::one() / T::from_usize_lossy(self.intervals)
    }

    /// Coordinate `l h` along an axis.
    pub fn coordinate<T: Real>(&self, l: usize) -> T {
        T::from_usize_lossy(l) / T::from_usize_lossy(self.intervals)
    }

    /// Grid indices `(l, m)` of a node; `m = 0` in 1D.
    pub fn node_indices(&self, node: usize) -> (usize, usize) {
        let p = self.nodes_per_axis();
        (node % p, node / p)
    }

    pub fn node_index(&self, l: usize, m: usize) -> usize {
        m * self.nodes_per_axis() + l
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Face {
    /// `x = 0`
    Left,
    /// `x = 1`
    Right,
    /// `y = 0`
    Bottom,
    /// `y = 1`
    Top,
}

impl Face {
    pub fn name(self) -> &'static str {
        match self {
            Face::Left => "left",
            Face::Right => "right",
            Face::Bottom => "bottom",
            Face::Top => "top",
        }
    }
}

/// Boundary datum as a function of the tangential coordinate (`y` on the
/// left/right faces, `x` on the bottom/top faces, ignored in 1D).
#[derive(Clone)]
pub enum Datum<T> {
    Constant(T),
    Function(Arc<dyn Fn(T) -> T + Send + Sync>),
}

impl<T: Real> Datum<T> {
    pub fn function(f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Datum::Function(Arc::new(f))
    }

    pub fn eval(&self, s: T) -> T {
        match self {
            Datum::Constant(c) => *c,
            Datum::Function(f) => f(s),
        }
    }

    fn scaled(&self, factor: T) -> Self {
        match self {
            Datum::Constant(c) => Datum::Constant(*c * factor),
            Datum::Function(f) => {
                let f = Arc::clone(f);
                Datum::function(move |s| f(s) * factor)
            }
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for Datum<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Datum::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            Datum::Function(_) => f.write_str("Function(..)"),
        }
    }
}

impl<T> From<T> for Datum<T> {
    fn from(c: T) -> Self {
        Datum::Constant(c)
    }
}

/// `alpha u + beta du/dn = g` with the outward normal, or `u = g`.
#[derive(Debug, Clone)]
pub enum BoundaryFaceCondition<T> {
    Dirichlet { g: Datum<T> },
    Robin { alpha: T, beta: T, g: Datum<T> },
}

impl<T: Real> BoundaryFaceCondition<T> {
    pub fn dirichlet(g: impl Into<Datum<T>>) -> Self {
        Self::Dirichlet { g: g.into() }
    }

    pub fn neumann(g: impl Into<Datum<T>>) -> Self {
        Self::Robin { alpha: T::zero(), beta: T::one(), g: g.into() }
    }

    pub fn robin(alpha: T, beta: T, g: impl Into<Datum<T>>) -> Self {
        Self::Robin { alpha, beta, g: g.into() }
    }

    /// A Robin condition without normal derivative is a Dirichlet condition
    /// in disguise; one with neither term is rejected.
    fn normalized(&self, face: Face) -> Result<Self> {
        match self {
            Self::Robin { alpha, beta, g } if *beta == T::zero() => {
                if *alpha == T::zero() {
                    Err(Error::DegenerateBoundary { face: face.name() })
                } else {
                    Ok(Self::Dirichlet { g: g.scaled(T::one() / *alpha) })
                }
            }
            other => Ok(other.clone()),
        }
    }

    pub fn is_dirichlet(&self) -> bool {
        matches!(self, Self::Dirichlet { .. })
    }
}

/// One condition per face: left/right in 1D, plus bottom/top in 2D.
#[derive(Debug, Clone)]
pub struct BoundarySpec<T> {
    left: BoundaryFaceCondition<T>,
    right: BoundaryFaceCondition<T>,
    bottom_top: Option<(BoundaryFaceCondition<T>, BoundaryFaceCondition<T>)>,
}

impl<T: Real> BoundarySpec<T> {
    pub fn one_d(left: BoundaryFaceCondition<T>, right: BoundaryFaceCondition<T>) -> Self {
        Self { left, right, bottom_top: None }
    }

    pub fn two_d(
        left: BoundaryFaceCondition<T>,
        right: BoundaryFaceCondition<T>,
        bottom: BoundaryFaceCondition<T>,
        top: BoundaryFaceCondition<T>,
    ) -> Self {
        Self { left, right, bottom_top: Some((bottom, top)) }
    }

    /// The same condition on every face of a `dimension`-dimensional grid.
    pub fn uniform(dimension: usize, cond: BoundaryFaceCondition<T>) -> Self {
        if dimension == 1 {
            Self::one_d(cond.clone(), cond)
        } else {
            Self::two_d(cond.clone(), cond.clone(), cond.clone(), cond)
        }
    }

    pub fn dimension(&self) -> usize {
        if self.bottom_top.is_some() {
            2
        } else {
            1
        }
    }

    pub fn face(&self, face: Face) -> Option<&BoundaryFaceCondition<T>> {
        match face {
            Face::Left => Some(&self.left),
            Face::Right => Some(&self.right),
            Face::Bottom => self.bottom_top.as_ref().map(|(b, _)| b),
            Face::Top => self.bottom_top.as_ref().map(|(_, t)| t),
        }
    }

    fn normalized(&self) -> Result<Self> {
        Ok(Self {
            left: self.left.normalized(Face::Left)?,
            right: self.right.normalized(Face::Right)?,
            bottom_top: match &self.bottom_top {
                Some((b, t)) => Some((b.normalized(Face::Bottom)?, t.normalized(Face::Top)?)),
                None => None,
            },
        })
    }
}

/// The affine semi-discrete diffusion operator `u -> A u + g` on the active
/// degrees of freedom.
#[derive(Debug, Clone)]
pub struct DiscreteDiffusion<T: Real> {
    grid: UniformGrid,
    bc: BoundarySpec<T>,
    matrix: CsrMatrix<T>,
    load: Vec<T>,
    dof_nodes: Vec<usize>,
    node_dofs: Vec<Option<usize>>,
    node_values: Vec<Option<T>>,
    weights: Vec<T>,
    steady: OnceLock<Result<Vec<T>>>,
}

// Axis-neighbour bookkeeping during assembly.
struct Assembly<'a, T: Real> {
    node_dofs: &'a [Option<usize>],
    node_values: &'a [Option<T>],
    row: usize,
    triplets: Vec<(usize, usize, T)>,
    load: T,
}

impl<T: Real> Assembly<'_, T> {
    fn couple(&mut self, node: usize, coeff: T) {
        match self.node_dofs[node] {
            Some(col) => self.triplets.push((self.row, col, coeff)),
            None => {
                let value = self.node_values[node].expect("eliminated node has a Dirichlet value");
                self.load = self.load + coeff * value;
            }
        }
    }
}

impl<T: Real> DiscreteDiffusion<T> {
    pub fn build_1d(grid: UniformGrid, bc: BoundarySpec<T>) -> Result<Self> {
        if grid.dimension() != 1 || bc.dimension() != 1 {
            return Err(Error::InvalidGrid("build_1d needs a 1D grid and a 1D boundary specification".into()));
        }
        Self::assemble(grid, bc)
    }

    pub fn build_2d(grid: UniformGrid, bc: BoundarySpec<T>) -> Result<Self> {
        if grid.dimension() != 2 || bc.dimension() != 2 {
            return Err(Error::InvalidGrid("build_2d needs a 2D grid and a 2D boundary specification".into()));
        }
        Self::assemble(grid, bc)
    }

    /// Dispatches on the grid dimension.
    pub fn build(grid: UniformGrid, bc: BoundarySpec<T>) -> Result<Self> {
        match grid.dimension() {
            1 => Self::build_1d(grid, bc),
            _ => Self::build_2d(grid, bc),
        }
    }

    fn assemble(grid: UniformGrid, bc: BoundarySpec<T>) -> Result<Self> {
        let bc = bc.normalized()?;
        let n = grid.intervals();
        let two_d = grid.dimension() == 2;
        let total = grid.node_count();

        // faces a node lies on, with its tangential coordinate on each
        let faces_of = |node: usize| -> Vec<(Face, T)> {
            let (l, m) = grid.node_indices(node);
            let x = grid.coordinate::<T>(l);
            let y = grid.coordinate::<T>(m);
            let mut out = Vec::with_capacity(2);
            if l == 0 {
                out.push((Face::Left, y));
            }
            if l == n {
                out.push((Face::Right, y));
            }
            if two_d && m == 0 {
                out.push((Face::Bottom, x));
            }
            if two_d && m == n {
                out.push((Face::Top, x));
            }
            out
        };

        let mut node_values = vec![None; total];
        let mut node_dofs = vec![None; total];
        let mut dof_nodes = Vec::new();
        for node in 0..total {
            let dirichlet: Vec<T> = faces_of(node)
                .into_iter()
                .filter_map(|(face, s)| match bc.face(face) {
                    Some(BoundaryFaceCondition::Dirichlet { g }) => Some(g.eval(s)),
                    _ => None,
                })
                .collect();
            if dirichlet.is_empty() {
                node_dofs[node] = Some(dof_nodes.len());
                dof_nodes.push(node);
            } else {
                let sum = dirichlet.iter().fold(T::zero(), |a, &b| a + b);
                node_values[node] = Some(sum / T::from_usize_lossy(dirichlet.len()));
            }
        }

        let h = grid.spacing::<T>();
        let inv_h2 = T::one() / (h * h);
        let two = T::lit(2.0);
        let mut triplets = Vec::with_capacity(dof_nodes.len() * (1 + 2 * grid.dimension()));
        let mut load = vec![T::zero(); dof_nodes.len()];
        let mut weights = vec![T::one(); dof_nodes.len()];

        for (row, &node) in dof_nodes.iter().enumerate() {
            let (l, m) = grid.node_indices(node);
            let mut asm = Assembly {
                node_dofs: &node_dofs,
                node_values: &node_values,
                row,
                triplets: Vec::new(),
                load: T::zero(),
            };
            let mut diag = T::zero();
            let axes: &[(usize, Face, Face)] = if two_d {
                &[(0, Face::Left, Face::Right), (1, Face::Bottom, Face::Top)]
            } else {
                &[(0, Face::Left, Face::Right)]
            };
            for &(axis, low_face, high_face) in axes {
                let i = if axis == 0 { l } else { m };
                let tangential = grid.coordinate::<T>(if axis == 0 { m } else { l });
                let at = |k: usize| if axis == 0 { grid.node_index(k, m) } else { grid.node_index(l, k) };
                diag = diag - two * inv_h2;
                let ghost_face = if i == 0 {
                    Some((low_face, i + 1))
                } else if i == n {
                    Some((high_face, i - 1))
                } else {
                    None
                };
                match ghost_face {
                    None => {
                        asm.couple(at(i - 1), inv_h2);
                        asm.couple(at(i + 1), inv_h2);
                    }
                    Some((face, mirror)) => {
                        let Some(BoundaryFaceCondition::Robin { alpha, beta, g }) = bc.face(face) else {
                            unreachable!("active node on a Dirichlet face")
                        };
                        // ghost = mirror + (2h / beta) (g - alpha u)
                        asm.couple(at(mirror), two * inv_h2);
                        diag = diag - two * *alpha / (*beta * h);
                        asm.load = asm.load + two * g.eval(tangential) / (*beta * h);
                        weights[row] = weights[row] / two;
                    }
                }
            }
            asm.triplets.push((row, row, diag));
            load[row] = asm.load;
            triplets.extend(asm.triplets);
        }

        let matrix = CsrMatrix::from_triplets(dof_nodes.len(), dof_nodes.len(), &triplets);
        Ok(Self { grid, bc, matrix, load, dof_nodes, node_dofs, node_values, weights, steady: OnceLock::new() })
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn boundary(&self) -> &BoundarySpec<T> {
        &self.bc
    }

    pub fn matrix(&self) -> &CsrMatrix<T> {
        &self.matrix
    }

    pub fn load(&self) -> &[T] {
        &self.load
    }

    pub fn dofs(&self) -> usize {
        self.dof_nodes.len()
    }

    /// Grid node of each active dof.
    pub fn dof_nodes(&self) -> &[usize] {
        &self.dof_nodes
    }

    /// Diagonal weights `W` (1/2 per Robin axis at a node) for which `W A`
    /// is symmetric; `A` is self-adjoint in the `W` inner product.
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn check_dofs(&self, len: usize) -> Result<()> {
        if len == self.dofs() {
            Ok(())
        } else {
            Err(Error::DofMismatch { expected: self.dofs(), got: len })
        }
    }

    /// Coordinates `(x, y)` of every active dof (`y = 0` in 1D).
    pub fn dof_coordinates(&self) -> Vec<(T, T)> {
        self.dof_nodes
            .iter()
            .map(|&node| {
                let (l, m) = self.grid.node_indices(node);
                (self.grid.coordinate(l), self.grid.coordinate(m))
            })
            .collect()
    }

    /// Samples a function of `(x, y)` on the active dofs.
    pub fn sample(&self, f: impl Fn(T, T) -> T) -> ScalarField<T> {
        self.dof_coordinates().into_iter().map(|(x, y)| f(x, y)).collect()
    }

    /// Values on every grid node, with eliminated Dirichlet nodes filled from
    /// the boundary data.
    pub fn to_full(&self, u: &[T]) -> Result<Vec<T>> {
        self.check_dofs(u.len())?;
        Ok(self
            .node_dofs
            .iter()
            .zip(&self.node_values)
            .map(|(dof, value)| match dof {
                Some(d) => u[*d],
                None => value.expect("eliminated node has a value"),
            })
            .collect())
    }

    /// `A u + g`
    pub fn apply_d(&self, u: &[T]) -> Result<ScalarField<T>> {
        self.check_dofs(u.len())?;
        let mut out = self.matrix.matvec(u);
        for (o, &g) in out.iter_mut().zip(&self.load) {
            *o = *o + g;
        }
        Ok(out)
    }

    /// `A u` without the boundary load.
    pub fn apply_a(&self, u: &[T]) -> Result<ScalarField<T>> {
        self.check_dofs(u.len())?;
        Ok(self.matrix.matvec(u))
    }

    /// The affine fixed point `w = -A^{-1} g`, computed once per operator.
    pub fn steady_state(&self) -> Result<ScalarField<T>> {
        self.steady
            .get_or_init(|| {
                if self.load.iter().all(|g| *g == T::zero()) {
                    return Ok(vec![T::zero(); self.dofs()]);
                }
                let solver = DirectSolver::factor(&self.matrix)?;
                let neg: Vec<T> = self.load.iter().map(|&g| -g).collect();
                Ok(solver.solve(&neg))
            })
            .clone()
    }

    /// Factors `I - sigma A` for repeated solves.
    pub fn shifted_solver(&self, sigma: T) -> Result<ShiftedSolver<T>> {
        if !(sigma > T::zero()) {
            return Err(Error::InvalidArgument(format!("shift must be positive, got {sigma}")));
        }
        let shifted = CsrMatrix::identity(self.dofs()).lincomb(T::one(), &self.matrix, -sigma);
        Ok(ShiftedSolver { sigma, solver: DirectSolver::factor(&shifted)? })
    }

    /// Solves `(I - sigma A) x = rhs`.
    pub fn shifted_solve(&self, sigma: T, rhs: &[T]) -> Result<ScalarField<T>> {
        self.check_dofs(rhs.len())?;
        Ok(self.shifted_solver(sigma)?.solve(rhs))
    }

    /// Discrete `L2` error by the trapezoid sums over full-node arrays; see
    /// [`crate::analysis::trapezoid_l2_error`].
    pub fn l2_error(&self, numeric: &[T], reference: &[T]) -> Result<T> {
        let a = self.to_full(numeric)?;
        let b = self.to_full(reference)?;
        crate::analysis::trapezoid_l2_error(self.grid.dimension(), self.grid.intervals(), &a, &b)
    }
}

/// A factored `I - sigma A`.
#[derive(Debug, Clone)]
pub struct ShiftedSolver<T> {
    sigma: T,
    solver: DirectSolver<T>,
}

impl<T: Real> ShiftedSolver<T> {
    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        self.solver.solve(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::symmetric_tridiagonal_eigen;

    type Bc = BoundaryFaceCondition<f64>;

    fn dirichlet_1d(n: usize, left: f64, right: f64) -> DiscreteDiffusion<f64> {
        DiscreteDiffusion::build_1d(
            UniformGrid::one_d(n).unwrap(),
            BoundarySpec::one_d(Bc::dirichlet(left), Bc::dirichlet(right)),
        )
        .unwrap()
    }

    #[test]
    fn grid_spacing_and_counts() {
        let g = UniformGrid::two_d(7).unwrap();
        assert_eq!(g.node_count(), 64);
        assert!((g.spacing::<f64>() * 7.0 - 1.0).abs() <= f64::EPSILON);
        assert_eq!(g.node_indices(g.node_index(3, 5)), (3, 5));
        assert!(UniformGrid::one_d(1).is_err());
        assert!(UniformGrid::new(3, 4).is_err());
    }

    #[test]
    fn two_intervals_dirichlet_zero() {
        let op = dirichlet_1d(2, 0.0, 0.0);
        assert_eq!(op.matrix().to_dense(), vec![vec![-8.0]]);
        assert_eq!(op.load(), &[0.0]);
    }

    #[test]
    fn two_intervals_dirichlet_one_is_compatible() {
        let op = dirichlet_1d(2, 1.0, 1.0);
        assert_eq!(op.load(), &[8.0]);
        assert_eq!(op.apply_d(&[1.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn two_d_single_dof() {
        let op =
            DiscreteDiffusion::build_2d(UniformGrid::two_d(2).unwrap(), BoundarySpec::uniform(2, Bc::dirichlet(0.0)))
                .unwrap();
        assert_eq!(op.matrix().to_dense(), vec![vec![-16.0]]);
        assert_eq!(op.load(), &[0.0]);
        let op =
            DiscreteDiffusion::build_2d(UniformGrid::two_d(2).unwrap(), BoundarySpec::uniform(2, Bc::dirichlet(1.0)))
                .unwrap();
        assert_eq!(op.apply_d(&[1.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn smallest_dirichlet_eigenvalue_near_minus_pi_squared() {
        let n = 200;
        let op = dirichlet_1d(n, 0.0, 0.0);
        let a = op.matrix();
        let diag = a.diagonal();
        let off: Vec<f64> = (0..diag.len() - 1).map(|i| a.get(i, i + 1)).collect();
        let eig = symmetric_tridiagonal_eigen(&diag, &off).unwrap();
        let top = eig.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let pi2 = std::f64::consts::PI.powi(2);
        assert!(((top + pi2) / pi2).abs() < 1e-3, "{top}");
    }

    #[test]
    fn robin_ghost_row() {
        // u + du/dn = 3 on both ends, N = 4
        let bc = BoundarySpec::one_d(Bc::robin(1.0, 1.0, 3.0), Bc::robin(1.0, 1.0, 3.0));
        let op = DiscreteDiffusion::build_1d(UniformGrid::one_d(4).unwrap(), bc).unwrap();
        let h = 0.25;
        assert_eq!(op.dofs(), 5);
        assert!((op.matrix().get(0, 0) - (-2.0 / (h * h) - 2.0 / h)).abs() < 1e-12);
        assert!((op.matrix().get(0, 1) - 2.0 / (h * h)).abs() < 1e-12);
        assert!((op.load()[0] - 6.0 / h).abs() < 1e-12);
        assert!((op.matrix().get(4, 3) - 2.0 / (h * h)).abs() < 1e-12);
        assert_eq!(op.weights(), &[0.5, 1.0, 1.0, 1.0, 0.5]);
        // u = 3 satisfies the condition and is harmonic
        let r = op.apply_d(&[3.0; 5]).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn quadratic_exact_for_neumann_robin() {
        // u = x^2: u'' = 2, left du/dn = -u'(0) = 0, right u + du/dn = 1 + 2 = 3
        let bc = BoundarySpec::one_d(Bc::neumann(0.0), Bc::robin(1.0, 1.0, 3.0));
        let op = DiscreteDiffusion::build_1d(UniformGrid::one_d(10).unwrap(), bc).unwrap();
        let u = op.sample(|x, _| x * x);
        for v in op.apply_d(&u).unwrap() {
            assert!((v - 2.0).abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn beta_zero_robin_becomes_dirichlet() {
        let bc = BoundarySpec::one_d(Bc::robin(2.0, 0.0, 4.0), Bc::dirichlet(2.0));
        let op = DiscreteDiffusion::build_1d(UniformGrid::one_d(4).unwrap(), bc).unwrap();
        assert_eq!(op.dofs(), 3);
        assert_eq!(op.to_full(&[2.0; 3]).unwrap(), vec![2.0; 5]);
        let bc = BoundarySpec::one_d(Bc::robin(0.0, 0.0, 1.0), Bc::dirichlet(2.0));
        let err = DiscreteDiffusion::build_1d(UniformGrid::one_d(4).unwrap(), bc).unwrap_err();
        assert_eq!(err, Error::DegenerateBoundary { face: "left" });
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let bc = BoundarySpec::uniform(2, Bc::dirichlet(0.0));
        assert!(DiscreteDiffusion::build_1d(UniformGrid::one_d(4).unwrap(), bc).is_err());
    }

    #[test]
    fn corner_takes_both_ghost_eliminations() {
        let bc = BoundarySpec::uniform(2, Bc::neumann(0.0));
        let op = DiscreteDiffusion::build_2d(UniformGrid::two_d(4).unwrap(), bc).unwrap();
        assert_eq!(op.dofs(), 25);
        let inv_h2 = 16.0;
        assert_eq!(op.matrix().get(0, 1), 2.0 * inv_h2);
        assert_eq!(op.matrix().get(0, 5), 2.0 * inv_h2);
        assert_eq!(op.weights()[0], 0.25);
    }

    #[test]
    fn mixed_corner_prefers_dirichlet_value() {
        let bc = BoundarySpec::two_d(Bc::neumann(0.5), Bc::dirichlet(7.0), Bc::neumann(0.5), Bc::dirichlet(3.0));
        let op = DiscreteDiffusion::build_2d(UniformGrid::two_d(4).unwrap(), bc).unwrap();
        // active: l = 0..3, m = 0..3
        assert_eq!(op.dofs(), 16);
        let full = op.to_full(&[0.0; 16]).unwrap();
        let g = op.grid();
        assert_eq!(full[g.node_index(4, 4)], 5.0);
        assert_eq!(full[g.node_index(0, 4)], 3.0);
        assert_eq!(full[g.node_index(4, 0)], 7.0);
    }

    #[test]
    fn steady_state_of_linear_data() {
        let op = dirichlet_1d(10, 0.0, 0.5);
        let w = op.steady_state().unwrap();
        for ((x, _), wi) in op.dof_coordinates().into_iter().zip(&w) {
            assert!((wi - x / 2.0).abs() < 1e-12);
        }
        let op = dirichlet_1d(10, 0.0, 0.0);
        assert_eq!(op.steady_state().unwrap(), vec![0.0; 9]);
    }

    #[test]
    fn shifted_solve_scalar() {
        let op = dirichlet_1d(2, 0.0, 0.0);
        assert_eq!(op.shifted_solve(0.125, &[3.0]).unwrap(), vec![1.5]);
        assert_eq!(op.shifted_solve(0.125, &[0.0]).unwrap(), vec![0.0]);
        assert!(op.shifted_solve(0.0, &[1.0]).is_err());
        assert!(matches!(op.shifted_solve(0.1, &[1.0, 2.0]), Err(Error::DofMismatch { expected: 1, got: 2 })));
    }
}
