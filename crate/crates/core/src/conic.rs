//! Solver-agnostic conic program builder: scalar and Hermitian-matrix
//! variables, linear / second-order-cone / semidefinite constraints, an
//! affine objective, and rank-one extraction from matrix solutions.
//!
//! Complex Hermitian blocks are embedded into real symmetric form
//! [[Re, −Im], [Im, Re]] of twice the dimension; a complex matrix
//! variable is stored as its n² real coordinates (diagonal + off-diagonal
//! re/im pairs) so entries stay directly addressable, with the embedded
//! PSD cone tying them together. Programs are serializable and hashable;
//! solving identical program bytes is deterministic.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus,
    SupportedConeT::{self, NonnegativeConeT, PSDTriangleConeT, SecondOrderConeT, ZeroConeT},
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::channel::{CMat, CVec};

#[derive(Debug, Error)]
pub enum ConicError {
    #[error("duplicate variable name: {0}")]
    DuplicateName(String),
    #[error("matrix variable needs dimension ≥ 1")]
    BadDimension,
    #[error("second-order cone needs head + tail (dimension ≥ 2)")]
    SocTooSmall,
    #[error("solver setup failed: {0}")]
    Setup(String),
    #[error("matrix is not positive semidefinite enough to extract (λ₁ = {0:e})")]
    DegenerateMatrix(f64),
}

const SQRT2: f64 = std::f64::consts::SQRT_2;

// ---------------------------------------------------------------------------
// Affine expressions
// ---------------------------------------------------------------------------

/// Sparse affine expression c + Σ a_i·x_i over scalar coordinates.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn constant(c: f64) -> Self {
        LinExpr { terms: Vec::new(), constant: c }
    }
    pub fn var(id: VarId) -> Self {
        LinExpr { terms: vec![(id.0, 1.0)], constant: 0.0 }
    }
    pub fn scaled_var(id: VarId, c: f64) -> Self {
        LinExpr { terms: vec![(id.0, c)], constant: 0.0 }
    }
    pub fn scale(mut self, c: f64) -> Self {
        for t in &mut self.terms {
            t.1 *= c;
        }
        self.constant *= c;
        self
    }
    pub fn add(mut self, other: &LinExpr) -> Self {
        self.terms.extend(other.terms.iter().cloned());
        self.constant += other.constant;
        self
    }
    pub fn add_scaled(mut self, other: &LinExpr, c: f64) -> Self {
        self.terms.extend(other.terms.iter().map(|&(i, a)| (i, a * c)));
        self.constant += c * other.constant;
        self
    }
    pub fn sub(self, other: &LinExpr) -> Self {
        self.add_scaled(other, -1.0)
    }
    pub fn plus_const(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }
    /// Collapses duplicate coordinates; keeps term order deterministic.
    fn compact(mut self) -> Self {
        self.terms.sort_by_key(|&(i, _)| i);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(self.terms.len());
        for (i, a) in self.terms.drain(..) {
            match out.last_mut() {
                Some(last) if last.0 == i => last.1 += a,
                _ => out.push((i, a)),
            }
        }
        out.retain(|&(_, a)| a != 0.0);
        self.terms = out;
        self
    }
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(i, a)| a * x[i]).sum::<f64>()
    }
}

/// Complex affine expression.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CExpr {
    pub re: LinExpr,
    pub im: LinExpr,
}

impl CExpr {
    pub fn constant(z: Complex64) -> Self {
        CExpr { re: LinExpr::constant(z.re), im: LinExpr::constant(z.im) }
    }
    pub fn conj(mut self) -> Self {
        self.im = self.im.scale(-1.0);
        self
    }
    pub fn scale_complex(self, z: Complex64) -> Self {
        CExpr {
            re: self.re.clone().scale(z.re).add_scaled(&self.im, -z.im),
            im: self.im.scale(z.re).add_scaled(&self.re, z.im),
        }
    }
    pub fn add(self, other: &CExpr) -> Self {
        CExpr { re: self.re.add(&other.re), im: self.im.add(&other.im) }
    }
    pub fn add_scaled(self, other: &CExpr, c: f64) -> Self {
        CExpr {
            re: self.re.add_scaled(&other.re, c),
            im: self.im.add_scaled(&other.im, c),
        }
    }
}

// ---------------------------------------------------------------------------
// Variables
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarId(pub usize);

/// Handle to a complex Hermitian matrix variable of side `dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatVar {
    pub offset: usize,
    pub dim: usize,
}

impl MatVar {
    /// Coordinate layout: column j occupies [j², (j+1)²): off-diagonal
    /// (re, im) pairs for i < j, then the real diagonal coordinate.
    fn coord_re(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= j);
        self.offset + j * j + 2 * i
    }
    fn coord_im(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j);
        self.offset + j * j + 2 * i + 1
    }
    pub fn n_coords(&self) -> usize {
        self.dim * self.dim
    }
    /// Complex entry (i, j) as an expression (conjugated below diagonal).
    pub fn entry(&self, i: usize, j: usize) -> CExpr {
        if i == j {
            CExpr {
                re: LinExpr::var(VarId(self.coord_re(i, j))),
                im: LinExpr::default(),
            }
        } else if i < j {
            CExpr {
                re: LinExpr::var(VarId(self.coord_re(i, j))),
                im: LinExpr::var(VarId(self.coord_im(i, j))),
            }
        } else {
            CExpr {
                re: LinExpr::var(VarId(self.coord_re(j, i))),
                im: LinExpr::scaled_var(VarId(self.coord_im(j, i)), -1.0),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Hermitian affine matrix expressions
// ---------------------------------------------------------------------------

/// Affine Hermitian-matrix-valued expression; upper triangle stored
/// column-major, diagonal entries kept real by construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HermExprMat {
    pub dim: usize,
    /// entries[idx(i, j)] for i ≤ j.
    entries: Vec<CExpr>,
}

fn upper_idx(i: usize, j: usize) -> usize {
    debug_assert!(i <= j);
    j * (j + 1) / 2 + i
}

impl HermExprMat {
    pub fn zeros(dim: usize) -> Self {
        HermExprMat {
            dim,
            entries: vec![CExpr::default(); dim * (dim + 1) / 2],
        }
    }

    pub fn from_matvar(mv: &MatVar) -> Self {
        let mut m = HermExprMat::zeros(mv.dim);
        for j in 0..mv.dim {
            for i in 0..=j {
                m.entries[upper_idx(i, j)] = mv.entry(i, j);
            }
        }
        m
    }

    pub fn from_const(c: &CMat) -> Self {
        let n = c.nrows();
        let mut m = HermExprMat::zeros(n);
        for j in 0..n {
            for i in 0..=j {
                m.entries[upper_idx(i, j)] = CExpr::constant(c[(i, j)]);
            }
        }
        m
    }

    /// expr·C for a real scalar expression and constant Hermitian C.
    pub fn scalar_times_const(expr: &LinExpr, c: &CMat) -> Self {
        let n = c.nrows();
        let mut m = HermExprMat::zeros(n);
        for j in 0..n {
            for i in 0..=j {
                let z = c[(i, j)];
                m.entries[upper_idx(i, j)] = CExpr {
                    re: expr.clone().scale(z.re),
                    im: expr.clone().scale(z.im),
                };
            }
        }
        m
    }

    pub fn entry(&self, i: usize, j: usize) -> CExpr {
        if i <= j {
            self.entries[upper_idx(i, j)].clone()
        } else {
            self.entries[upper_idx(j, i)].clone().conj()
        }
    }

    pub fn scale(mut self, c: f64) -> Self {
        for e in &mut self.entries {
            e.re = std::mem::take(&mut e.re).scale(c);
            e.im = std::mem::take(&mut e.im).scale(c);
        }
        self
    }

    pub fn add_scaled(mut self, other: &HermExprMat, c: f64) -> Self {
        assert_eq!(self.dim, other.dim);
        for (e, o) in self.entries.iter_mut().zip(&other.entries) {
            e.re = std::mem::take(&mut e.re).add_scaled(&o.re, c);
            e.im = std::mem::take(&mut e.im).add_scaled(&o.im, c);
        }
        self
    }

    pub fn add(self, other: &HermExprMat) -> Self {
        self.add_scaled(other, 1.0)
    }
    pub fn sub(self, other: &HermExprMat) -> Self {
        self.add_scaled(other, -1.0)
    }

    /// Adds expr·I.
    pub fn add_diag_expr(mut self, expr: &LinExpr) -> Self {
        for i in 0..self.dim {
            let e = &mut self.entries[upper_idx(i, i)];
            e.re = std::mem::take(&mut e.re).add(expr);
        }
        self
    }

    /// Adds c·I.
    pub fn add_diag_const(mut self, c: f64) -> Self {
        for i in 0..self.dim {
            let e = &mut self.entries[upper_idx(i, i)];
            e.re = std::mem::take(&mut e.re).plus_const(c);
        }
        self
    }

    /// Σ_i M_ii (real).
    pub fn trace(&self) -> LinExpr {
        let mut acc = LinExpr::default();
        for i in 0..self.dim {
            acc = acc.add(&self.entries[upper_idx(i, i)].re);
        }
        acc
    }

    /// vᴴ M v — real by hermiticity.
    pub fn qform(&self, v: &CVec) -> LinExpr {
        assert_eq!(v.len(), self.dim);
        let mut acc = LinExpr::default();
        for i in 0..self.dim {
            acc = acc.add_scaled(&self.entries[upper_idx(i, i)].re, v[i].norm_sqr());
        }
        for j in 0..self.dim {
            for i in 0..j {
                // 2·Re(conj(v_i)·M_ij·v_j)
                let c = v[i].conj() * v[j];
                let e = &self.entries[upper_idx(i, j)];
                acc = acc
                    .add_scaled(&e.re, 2.0 * c.re)
                    .add_scaled(&e.im, -2.0 * c.im);
            }
        }
        acc
    }

    /// (M v)_i as complex expressions.
    pub fn matvec(&self, v: &CVec) -> Vec<CExpr> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                let mut acc = CExpr::default();
                for j in 0..self.dim {
                    acc = acc.add(&self.entry(i, j).scale_complex(v[j]));
                }
                acc
            })
            .collect()
    }

    /// Rows whose Euclidean norm equals ‖M‖_F: diagonal entries plus
    /// √2·(re, im) of each off-diagonal.
    pub fn fro_pack(&self) -> Vec<LinExpr> {
        let mut rows = Vec::with_capacity(self.dim * self.dim);
        for j in 0..self.dim {
            for i in 0..=j {
                let e = &self.entries[upper_idx(i, j)];
                if i == j {
                    rows.push(e.re.clone());
                } else {
                    rows.push(e.re.clone().scale(SQRT2));
                    rows.push(e.im.clone().scale(SQRT2));
                }
            }
        }
        rows
    }

    /// Evaluates the matrix at a coordinate vector.
    pub fn eval(&self, x: &[f64]) -> CMat {
        let mut m = CMat::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            for i in 0..=j {
                let e = &self.entries[upper_idx(i, j)];
                let z = Complex64::new(e.re.eval(x), e.im.eval(x));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }
}

// ---------------------------------------------------------------------------
// Program
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    NearOptimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: u32,
    pub solve_time: f64,
    pub r_prim: f64,
    pub r_dual: f64,
    pub raw_status: String,
}

#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub stats: SolveStats,
}

impl ConicSolution {
    pub fn is_usable(&self) -> bool {
        matches!(self.status, SolveStatus::Optimal | SolveStatus::NearOptimal)
    }
    pub fn value(&self, id: VarId) -> f64 {
        self.x[id.0]
    }
    pub fn expr_value(&self, e: &LinExpr) -> f64 {
        e.eval(&self.x)
    }
    /// Reconstructs a complex Hermitian matrix variable.
    pub fn matrix_value(&self, mv: &MatVar) -> CMat {
        let mut m = CMat::zeros(mv.dim, mv.dim);
        for j in 0..mv.dim {
            for i in 0..=j {
                let re = self.x[mv.coord_re(i, j)];
                let im = if i == j { 0.0 } else { self.x[mv.coord_im(i, j)] };
                m[(i, j)] = Complex64::new(re, im);
                m[(j, i)] = Complex64::new(re, -im);
            }
        }
        m
    }
}

/// Solver tolerances; `accept_near` controls whether AlmostSolved results
/// are taken as near-optimal.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerances {
    pub feas: f64,
    pub gap_abs: f64,
    pub gap_rel: f64,
    pub max_iter: u32,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { feas: 1e-8, gap_abs: 1e-8, gap_rel: 1e-8, max_iter: 200 }
    }
}

impl Tolerances {
    pub fn relaxed() -> Self {
        Tolerances { feas: 1e-6, gap_abs: 1e-6, gap_rel: 1e-6, max_iter: 300 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
enum Constraint {
    /// expr == 0
    Zero(LinExpr),
    /// expr ≥ 0
    Nonneg(LinExpr),
    /// rows[0] ≥ ‖rows[1..]‖
    Soc(Vec<LinExpr>),
    /// Hermitian affine map ⪰ 0 (embedded on assembly)
    PsdHerm(HermExprMat),
    /// Real symmetric affine map ⪰ 0; upper triangle column-major
    PsdRealSym { dim: usize, upper: Vec<LinExpr> },
}

/// Staged conic program in natural (maximize) form.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ProgramBuilder {
    format_version: u32,
    n_coords: usize,
    scalar_names: Vec<(String, usize)>,
    matrix_names: Vec<(String, MatVar)>,
    constraints: Vec<Constraint>,
    objective: LinExpr,
}

impl ProgramBuilder {
    pub fn new() -> Self {
        ProgramBuilder { format_version: 1, ..Default::default() }
    }

    pub fn n_coords(&self) -> usize {
        self.n_coords
    }

    pub fn add_scalar(&mut self, name: &str) -> Result<VarId, ConicError> {
        if self.scalar_names.iter().any(|(n, _)| n == name) {
            return Err(ConicError::DuplicateName(name.into()));
        }
        let id = VarId(self.n_coords);
        self.scalar_names.push((name.into(), self.n_coords));
        self.n_coords += 1;
        Ok(id)
    }

    /// Scalar with x ≥ 0 attached.
    pub fn add_nonneg_scalar(&mut self, name: &str) -> Result<VarId, ConicError> {
        let id = self.add_scalar(name)?;
        self.add_nonneg(LinExpr::var(id));
        Ok(id)
    }

    pub fn add_matrix_var(&mut self, name: &str, n: usize, psd: bool) -> Result<MatVar, ConicError> {
        if n < 1 {
            return Err(ConicError::BadDimension);
        }
        if self.matrix_names.iter().any(|(nm, _)| nm == name) {
            return Err(ConicError::DuplicateName(name.into()));
        }
        let mv = MatVar { offset: self.n_coords, dim: n };
        self.n_coords += mv.n_coords();
        self.matrix_names.push((name.into(), mv));
        if psd {
            self.add_psd_herm(HermExprMat::from_matvar(&mv));
        }
        Ok(mv)
    }

    pub fn add_eq(&mut self, expr: LinExpr) {
        self.constraints.push(Constraint::Zero(expr.compact()));
    }

    pub fn add_nonneg(&mut self, expr: LinExpr) {
        self.constraints.push(Constraint::Nonneg(expr.compact()));
    }

    /// lo ≤ expr and expr ≤ hi.
    pub fn add_range(&mut self, expr: LinExpr, lo: f64, hi: f64) {
        self.add_nonneg(expr.clone().plus_const(-lo));
        self.add_nonneg(expr.scale(-1.0).plus_const(hi));
    }

    pub fn add_soc(&mut self, rows: Vec<LinExpr>) -> Result<(), ConicError> {
        if rows.len() < 2 {
            return Err(ConicError::SocTooSmall);
        }
        self.constraints
            .push(Constraint::Soc(rows.into_iter().map(LinExpr::compact).collect()));
        Ok(())
    }

    /// head ≥ ‖complex tail‖ given complex expressions.
    pub fn add_soc_complex(&mut self, head: LinExpr, tail: &[CExpr]) -> Result<(), ConicError> {
        let mut rows = Vec::with_capacity(1 + 2 * tail.len());
        rows.push(head);
        for t in tail {
            rows.push(t.re.clone());
            rows.push(t.im.clone());
        }
        self.add_soc(rows)
    }

    pub fn add_psd_herm(&mut self, m: HermExprMat) {
        let compacted = HermExprMat {
            dim: m.dim,
            entries: m
                .entries
                .into_iter()
                .map(|e| CExpr { re: e.re.compact(), im: e.im.compact() })
                .collect(),
        };
        self.constraints.push(Constraint::PsdHerm(compacted));
    }

    pub fn add_psd_real_sym(&mut self, dim: usize, upper: Vec<LinExpr>) {
        debug_assert_eq!(upper.len(), dim * (dim + 1) / 2);
        self.constraints.push(Constraint::PsdRealSym {
            dim,
            upper: upper.into_iter().map(LinExpr::compact).collect(),
        });
    }

    pub fn set_objective_max(&mut self, expr: LinExpr) {
        self.objective = expr.compact();
    }

    /// Canonical bytes of the staged program (versioned JSON).
    pub fn to_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("program serialization")
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, serde_json::Error> {
        serde_json::from_slice(bytes)
    }

    /// SHA-256 of the canonical bytes, hex-encoded.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.to_bytes());
        let out = h.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn assemble(&self) -> (Vec<(usize, usize, f64)>, Vec<f64>, Vec<SupportedConeT<f64>>, usize) {
        // Row order: zero rows, nonneg rows, SOC blocks, PSD blocks.
        let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
        let mut b: Vec<f64> = Vec::new();
        let mut cones: Vec<SupportedConeT<f64>> = Vec::new();
        let mut row = 0usize;

        let mut push_expr = |expr: &LinExpr,
                             scale: f64,
                             triplets: &mut Vec<(usize, usize, f64)>,
                             b: &mut Vec<f64>,
                             row: &mut usize| {
            for &(col, a) in &expr.terms {
                triplets.push((*row, col, -a * scale));
            }
            b.push(expr.constant * scale);
            *row += 1;
        };

        let n_zero: usize = self
            .constraints
            .iter()
            .filter(|c| matches!(c, Constraint::Zero(_)))
            .count();
        let n_nonneg: usize = self
            .constraints
            .iter()
            .filter(|c| matches!(c, Constraint::Nonneg(_)))
            .count();
        if n_zero > 0 {
            cones.push(ZeroConeT(n_zero));
            for c in &self.constraints {
                if let Constraint::Zero(e) = c {
                    push_expr(e, 1.0, &mut triplets, &mut b, &mut row);
                }
            }
        }
        if n_nonneg > 0 {
            cones.push(NonnegativeConeT(n_nonneg));
            for c in &self.constraints {
                if let Constraint::Nonneg(e) = c {
                    push_expr(e, 1.0, &mut triplets, &mut b, &mut row);
                }
            }
        }
        for c in &self.constraints {
            if let Constraint::Soc(rows) = c {
                cones.push(SecondOrderConeT(rows.len()));
                for e in rows {
                    push_expr(e, 1.0, &mut triplets, &mut b, &mut row);
                }
            }
        }
        for c in &self.constraints {
            match c {
                Constraint::PsdHerm(m) => {
                    // embedded real dimension 2m: [[Re, −Im], [Im, Re]]
                    let d = 2 * m.dim;
                    cones.push(PSDTriangleConeT(d));
                    for col in 0..d {
                        for r in 0..=col {
                            let scale = if r == col { 1.0 } else { SQRT2 };
                            let expr = embedded_entry(m, r, col);
                            push_expr(&expr, scale, &mut triplets, &mut b, &mut row);
                        }
                    }
                }
                Constraint::PsdRealSym { dim, upper } => {
                    cones.push(PSDTriangleConeT(*dim));
                    let mut idx = 0usize;
                    for col in 0..*dim {
                        for r in 0..=col {
                            let scale = if r == col { 1.0 } else { SQRT2 };
                            push_expr(&upper[idx], scale, &mut triplets, &mut b, &mut row);
                            idx += 1;
                        }
                    }
                }
                _ => {}
            }
        }
        (triplets, b, cones, row)
    }

    /// Solves the staged program. Deterministic for identical bytes.
    pub fn solve(&self, tol: &Tolerances) -> Result<ConicSolution, ConicError> {
        let (triplets, b, cones, n_rows) = self.assemble();
        let n = self.n_coords;
        // CSC assembly
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&t| (triplets[t].1, triplets[t].0));
        let mut colptr = vec![0usize; n + 1];
        let mut rowval = Vec::with_capacity(triplets.len());
        let mut nzval = Vec::with_capacity(triplets.len());
        for &t in &order {
            let (r, c, v) = triplets[t];
            colptr[c + 1] += 1;
            rowval.push(r);
            nzval.push(v);
        }
        for c in 0..n {
            colptr[c + 1] += colptr[c];
        }
        let a = CscMatrix::new(n_rows, n, colptr, rowval, nzval);
        let p = CscMatrix::<f64>::zeros((n, n));
        let mut q = vec![0.0; n];
        for &(i, coef) in &self.objective.terms {
            q[i] = -coef;
        }
        let settings = DefaultSettingsBuilder::default()
            .verbose(false)
            .tol_feas(tol.feas)
            .tol_gap_abs(tol.gap_abs)
            .tol_gap_rel(tol.gap_rel)
            .max_iter(tol.max_iter)
            .build()
            .map_err(|e| ConicError::Setup(format!("{e:?}")))?;
        let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, settings)
            .map_err(|e| ConicError::Setup(format!("{e:?}")))?;
        solver.solve();
        let sol = &solver.solution;
        let status = match sol.status {
            SolverStatus::Solved => SolveStatus::Optimal,
            SolverStatus::AlmostSolved => SolveStatus::NearOptimal,
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
                SolveStatus::Infeasible
            }
            SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
                SolveStatus::Unbounded
            }
            _ => SolveStatus::NumericalFailure,
        };
        let x = sol.x.clone();
        let objective = self.objective.eval(&x);
        Ok(ConicSolution {
            status,
            objective,
            stats: SolveStats {
                iterations: sol.iterations,
                solve_time: sol.solve_time,
                r_prim: sol.r_prim,
                r_dual: sol.r_dual,
                raw_status: format!("{:?}", sol.status),
            },
            x,
        })
    }
}

/// Entry (r, c) of the real embedding [[Re M, −Im M], [Im M, Re M]].
fn embedded_entry(m: &HermExprMat, r: usize, c: usize) -> LinExpr {
    let n = m.dim;
    let (block_r, i) = (r / n, r % n);
    let (block_c, j) = (c / n, c % n);
    let e = m.entry(i, j);
    match (block_r, block_c) {
        (0, 0) | (1, 1) => e.re,
        (0, 1) => e.im.scale(-1.0),
        (1, 0) => e.im,
        _ => unreachable!(),
    }
}

// ---------------------------------------------------------------------------
// Hermitian embedding helpers (constants)
// ---------------------------------------------------------------------------

/// Real symmetric embedding of a Hermitian matrix.
pub fn embed_hermitian(h: &CMat) -> DMatrix<f64> {
    let n = h.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            out[(i, j)] = z.re;
            out[(n + i, n + j)] = z.re;
            out[(i, n + j)] = -z.im;
            out[(n + i, j)] = z.im;
        }
    }
    out
}

/// Eigenvalues of a Hermitian matrix, descending.
pub fn hermitian_eigenvalues(h: &CMat) -> Vec<f64> {
    let mut ev: Vec<f64> = h.clone().symmetric_eigen().eigenvalues.iter().cloned().collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    ev
}

// ---------------------------------------------------------------------------
// Rank-one extraction
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Extraction {
    pub vector: CVec,
    /// λ₂/λ₁ of the input.
    pub residual: f64,
    /// "eigen" or "randomized".
    pub path: &'static str,
}

/// Dominant-eigenpair extraction with Gaussian-randomization fallback for
/// markedly non-rank-one inputs. `score` ranks fallback candidates (higher
/// is better); when absent, alignment ξᴴXξ is used.
pub fn rank_one_extract_with(
    x: &CMat,
    score: Option<&dyn Fn(&CVec) -> f64>,
    rng: &mut impl Rng,
) -> Result<Extraction, ConicError> {
    let n = x.nrows();
    let eig = x.clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let l1 = eig.eigenvalues[idx[0]];
    if l1 <= 0.0 {
        return Err(ConicError::DegenerateMatrix(l1));
    }
    let l2 = if n > 1 { eig.eigenvalues[idx[1]].max(0.0) } else { 0.0 };
    let residual = l2 / l1;
    let u1: CVec = eig.eigenvectors.column(idx[0]).into();
    let principal: CVec = u1.map(|z| z * Complex64::new(l1.sqrt(), 0.0));
    if residual <= 0.05 {
        return Ok(Extraction { vector: principal, residual, path: "eigen" });
    }
    // Gaussian randomization: draw ξ ~ CN(0, X), rescale into the
    // per-element budget of X's diagonal, keep the best-scoring candidate.
    let sqrt_cols: Vec<CVec> = idx
        .iter()
        .filter(|&&i| eig.eigenvalues[i] > 0.0)
        .map(|&i| {
            let col: CVec = eig.eigenvectors.column(i).into();
            col.map(|z| z * Complex64::new(eig.eigenvalues[i].sqrt(), 0.0))
        })
        .collect();
    let diag: Vec<f64> = (0..n).map(|i| x[(i, i)].re.max(0.0)).collect();
    let default_score = |v: &CVec| (v.adjoint() * x * v)[(0, 0)].re;
    let mut best: Option<(f64, CVec)> = None;
    for _ in 0..200 {
        let mut cand = CVec::zeros(n);
        for col in &sqrt_cols {
            let z = crate::channel::crandn(rng);
            cand += col.map(|c| c * z);
        }
        let mut scale = f64::INFINITY;
        for i in 0..n {
            let mag = cand[i].norm_sqr();
            if mag > 0.0 {
                scale = scale.min((diag[i] / mag).sqrt());
            }
        }
        if !scale.is_finite() {
            continue;
        }
        let cand = cand.map(|z| z * scale);
        let s = match score {
            Some(f) => f(&cand),
            None => default_score(&cand),
        };
        if best.as_ref().map_or(true, |(bs, _)| s > *bs) {
            best = Some((s, cand));
        }
    }
    let vector = match best {
        Some((best_score, v)) => {
            let principal_score = match score {
                Some(f) => f(&principal),
                None => default_score(&principal),
            };
            if principal_score >= best_score {
                principal
            } else {
                v
            }
        }
        None => principal,
    };
    Ok(Extraction { vector, residual, path: "randomized" })
}

/// [`rank_one_extract_with`] under the default alignment score.
pub fn rank_one_extract(x: &CMat, rng: &mut impl Rng) -> Result<Extraction, ConicError> {
    rank_one_extract_with(x, None, rng)
}
