//! Bilinear sub-functionals as named, independently assemblable terms.
//!
//! Every term is a matrix indexed by (test variable, trial variable). Local
//! indices are `component * n_basis + a`. The compound operator is a list of
//! [`Placement`]s that put each term (or its transpose) into the block system
//! with a sign.

use std::collections::BTreeMap;

use thiserror::Error;

use super::eval::{BoundaryEval, CellEval, InteriorEval};
use super::StabilizationParams;
use crate::fespace::Variable;
use crate::tensorops::{gen3d_tf2, grad3d_of_2, inner2, inner2d, inner3, stf3d3, sym2, Tensor2};

/// Dense local block, row-major.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LocalMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl LocalMatrix {
    pub fn reset(&mut self, rows: usize, cols: usize) {
        self.rows = rows;
        self.cols = cols;
        self.data.clear();
        self.data.resize(rows * cols, 0.0);
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }
}

/// Parameters shared by all volume and jump terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormParams {
    pub kn: f64,
    pub stab: StabilizationParams,
}

/// Where a term has contributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Domains {
    pub cells: bool,
    pub boundary: bool,
    pub interior: bool,
}

pub trait FormTerm: Send + Sync {
    fn name(&self) -> &'static str;
    fn test(&self) -> Variable;
    fn trial(&self) -> Variable;
    fn domains(&self) -> Domains;

    fn cell(&self, _p: &FormParams, _ce: &CellEval, _hi: usize, _lo: usize, _out: &mut LocalMatrix) {}

    fn boundary(&self, _p: &FormParams, _be: &BoundaryEval, _hi: usize, _lo: usize, _out: &mut LocalMatrix) {}

    fn interior(&self, _p: &FormParams, _ie: &InteriorEval, _hi: usize, _lo: usize, _out: &mut LocalMatrix) {}
}

/// Unit symmetric tensors spanning the stress components xx, xy, yy.
pub const SIGMA_UNITS: [Tensor2; 3] = [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 1.0], [1.0, 0.0]], [[0.0, 0.0], [0.0, 1.0]]];

fn degree_of(v: Variable, hi: usize, lo: usize) -> usize {
    if v.is_high_order() {
        hi
    } else {
        lo
    }
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// `a^T S b` for a 2x2 tensor.
fn bilin(s: &Tensor2, a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * (s[0][0] * b[0] + s[0][1] * b[1]) + a[1] * (s[1][0] * b[0] + s[1][1] * b[1])
}

/// Heat-flux diagonal.
pub struct TermA;

impl FormTerm for TermA {
    fn name(&self) -> &'static str {
        "a"
    }
    fn test(&self) -> Variable {
        Variable::HeatFlux
    }
    fn trial(&self) -> Variable {
        Variable::HeatFlux
    }
    fn domains(&self) -> Domains {
        Domains { cells: true, boundary: true, interior: false }
    }

    fn cell(&self, p: &FormParams, ce: &CellEval, hi: usize, _lo: usize, out: &mut LocalMatrix) {
        let t = ce.basis(hi);
        let n = t.n;
        out.reset(2 * n, 2 * n);
        let (c_sym, c_div, c_mass) = (24.0 / 25.0 * p.kn, 12.0 / 25.0 * p.kn, 4.0 / 15.0 / p.kn);
        for q in 0..ce.n_points() {
            let w = ce.weights[q];
            for i in 0..2 {
                for a in 0..n {
                    let ga = t.grad(q, a);
                    let mut gr = [[0.0; 2]; 2];
                    gr[i] = ga;
                    let sr = sym2(&gr);
                    let va = t.value(q, a);
                    for j in 0..2 {
                        for b in 0..n {
                            let gb = t.grad(q, b);
                            let mut gs = [[0.0; 2]; 2];
                            gs[j] = gb;
                            let ss = sym2(&gs);
                            let mass = if i == j { va * t.value(q, b) } else { 0.0 };
                            let v = c_sym * inner2d(&ss, &sr) + c_div * gb[j] * ga[i] + c_mass * mass;
                            out.add(i * n + a, j * n + b, w * v);
                        }
                    }
                }
            }
        }
    }

    fn boundary(&self, _p: &FormParams, be: &BoundaryEval, hi: usize, _lo: usize, out: &mut LocalMatrix) {
        let t = be.trace(hi);
        let n = t.n();
        out.reset(2 * n, 2 * n);
        let (nn, tt) = (be.frame.n, be.frame.t);
        let (c_n, c_t) = (1.0 / (2.0 * be.chi_tilde), 12.0 / 25.0 * be.chi_tilde);
        for q in 0..be.n_points() {
            let w = be.weights[q];
            for i in 0..2 {
                for a in 0..n {
                    let va = t.value(q, a);
                    for j in 0..2 {
                        for b in 0..n {
                            let vb = t.value(q, b);
                            let v = c_n * (nn[j] * vb) * (nn[i] * va) + c_t * (tt[j] * vb) * (tt[i] * va);
                            out.add(i * n + a, j * n + b, w * v);
                        }
                    }
                }
            }
        }
    }
}

/// Temperature against heat-flux divergence: test theta, trial s.
pub struct TermB;

impl FormTerm for TermB {
    fn name(&self) -> &'static str {
        "b"
    }
    fn test(&self) -> Variable {
        Variable::Temperature
    }
    fn trial(&self) -> Variable {
        Variable::HeatFlux
    }
    fn domains(&self) -> Domains {
        Domains { cells: true, ..Default::default() }
    }

    fn cell(&self, _p: &FormParams, ce: &CellEval, hi: usize, lo: usize, out: &mut LocalMatrix) {
        let (tk, ts) = (ce.basis(lo), ce.basis(hi));
        out.reset(tk.n, 2 * ts.n);
        for q in 0..ce.n_points() {
            let w = ce.weights[q];
            for a in 0..tk.n {
                let va = tk.value(q, a);
                for j in 0..2 {
                    for b in 0..ts.n {
                        out.add(a, j * ts.n + b, w * va * ts.grad(q, b)[j]);
                    }
                }
            }
        }
    }
}

/// Heat-flux to stress coupling: test sigma, trial s.
pub struct TermC;

impl FormTerm for TermC {
    fn name(&self) -> &'static str {
        "c"
    }
    fn test(&self) -> Variable {
        Variable::Stress
    }
    fn trial(&self) -> Variable {
        Variable::HeatFlux
    }
    fn domains(&self) -> Domains {
        Domains { cells: true, boundary: true, interior: false }
    }

    fn cell(&self, _p: &FormParams, ce: &CellEval, hi: usize, _lo: usize, out: &mut LocalMatrix) {
        let t = ce.basis(hi);
        let n = t.n;
        out.reset(3 * n, 2 * n);
        for q in 0..ce.n_points() {
            let w = ce.weights[q];
            for (c, sc) in SIGMA_UNITS.iter().enumerate() {
                for a in 0..n {
                    let va = t.value(q, a);
                    for j in 0..2 {
                        for b in 0..n {
                            let mut gs = [[0.0; 2]; 2];
                            gs[j] = t.grad(q, b);
                            let v = 0.4 * va * inner2d(sc, &gs);
                            out.add(c * n + a, j * n + b, w * v);
                        }
                    }
                }
            }
        }
    }

    fn boundary(&self, _p: &FormParams, be: &BoundaryEval, hi: usize, _lo: usize, out: &mut LocalMatrix) {
        let t = be.trace(hi);
        let n = t.n();
        out.reset(3 * n, 2 * n);
        let (nn, tt) = (be.frame.n, be.frame.t);
        for q in 0..be.n_points() {
            let w = be.weights[q];
            for (c, sc) in SIGMA_UNITS.iter().enumerate() {
                let (unit_nn, unit_nt) = (bilin(sc, nn, nn), bilin(sc, nn, tt));
                for a in 0..n {
                    let va = t.value(q, a);
                    for j in 0..2 {
                        for b in 0..n {
                            let vb = t.value(q, b);
                            let v = -0.15 * unit_nn * va * nn[j] * vb - 0.2 * unit_nt * va * tt[j] * vb;
                            out.add(c * n + a, j * n + b, w * v);
                        }
                    }
                }
            }
        }
    }
}

/// Stress diagonal, evaluated on lifted 3D tensors.
pub struct TermD {
    /// `inner3` of the trace-free gradients of unit basis tensors, indexed by
    /// `(component, direction)` pairs flattened as `2 * c + k`.
    grad_gram: [[f64; 6]; 6],
    /// `inner2` of lifted unit tensors.
    mass_gram: [[f64; 3]; 3],
}

impl Default for TermD {
    fn default() -> Self {
        Self::new()
    }
}

impl TermD {
    pub fn new() -> Self {
        let zero = [[0.0; 3]; 3];
        let mut z = Vec::with_capacity(6);
        for s in &SIGMA_UNITS {
            let l = gen3d_tf2(s);
            z.push(stf3d3(&grad3d_of_2(&l, &zero)));
            z.push(stf3d3(&grad3d_of_2(&zero, &l)));
        }
        let mut grad_gram = [[0.0; 6]; 6];
        for i in 0..6 {
            for j in 0..6 {
                grad_gram[i][j] = inner3(&z[i], &z[j]);
            }
        }
        let mut mass_gram = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                mass_gram[i][j] = inner2(&gen3d_tf2(&SIGMA_UNITS[i]), &gen3d_tf2(&SIGMA_UNITS[j]));
            }
        }
        TermD { grad_gram, mass_gram }
    }
}

impl FormTerm for TermD {
    fn name(&self) -> &'static str {
        "d"
    }
    fn test(&self) -> Variable {
        Variable::Stress
    }
    fn trial(&self) -> Variable {
        Variable::Stress
    }
    fn domains(&self) -> Domains {
        Domains { cells: true, boundary: true, interior: false }
    }

    fn cell(&self, p: &FormParams, ce: &CellEval, hi: usize, _lo: usize, out: &mut LocalMatrix) {
        let t = ce.basis(hi);
        let n = t.n;
        out.reset(3 * n, 3 * n);
        let (c_grad, c_mass) = (p.kn, 0.5 / p.kn);
        for q in 0..ce.n_points() {
            let w = ce.weights[q];
            for c in 0..3 {
                for a in 0..n {
                    let (ga, va) = (t.grad(q, a), t.value(q, a));
                    for d in 0..3 {
                        for b in 0..n {
                            let (gb, vb) = (t.grad(q, b), t.value(q, b));
                            // stf(grad(phi_b L_d)) is linear in grad(phi_b).
                            let mut g = 0.0;
                            for k in 0..2 {
                                for l in 0..2 {
                                    g += gb[l] * ga[k] * self.grad_gram[2 * d + l][2 * c + k];
                                }
                            }
                            let v = c_grad * g + c_mass * self.mass_gram[d][c] * vb * va;
                            out.add(c * n + a, d * n + b, w * v);
                        }
                    }
                }
            }
        }
    }

    fn boundary(&self, _p: &FormParams, be: &BoundaryEval, hi: usize, _lo: usize, out: &mut LocalMatrix) {
        let t = be.trace(hi);
        let n = t.n();
        out.reset(3 * n, 3 * n);
        let (nn, tt) = (be.frame.n, be.frame.t);
        let chi = be.chi_tilde;
        let proj: Vec<[f64; 3]> = SIGMA_UNITS
            .iter()
            .map(|s| [bilin(s, nn, nn), bilin(s, nn, tt), bilin(s, tt, tt)])
            .collect();
        for q in 0..be.n_points() {
            let w = be.weights[q];
            for c in 0..3 {
                let [pnn, pnt, ptt] = proj[c];
                for a in 0..n {
                    let va = t.value(q, a);
                    for d in 0..3 {
                        let [snn, snt, stt] = proj[d];
                        for b in 0..n {
                            let vb = t.value(q, b);
                            let v = (9.0 / 8.0 * chi * snn * pnn
                                + chi * (stt + 0.5 * snn) * (ptt + 0.5 * pnn)
                                + snt * pnt / chi
                                + be.epsilon_w * chi * snn * pnn)
                                * va
                                * vb;
                            out.add(c * n + a, d * n + b, w * v);
                        }
                    }
                }
            }
        }
    }
}

/// Stress divergence against velocity: test u, trial sigma.
pub struct TermE;

impl FormTerm for TermE {
    fn name(&self) -> &'static str {
        "e"
    }
    fn test(&self) -> Variable {
        Variable::Velocity
    }
    fn trial(&self) -> Variable {
        Variable::Stress
    }
    fn domains(&self) -> Domains {
        Domains { cells: true, ..Default::default() }
    }

    fn cell(&self, _p: &FormParams, ce: &CellEval, hi: usize, lo: usize, out: &mut LocalMatrix) {
        let (tv, ts) = (ce.basis(lo), ce.basis(hi));
        out.reset(2 * tv.n, 3 * ts.n);
        for q in 0..ce.n_points() {
            let w = ce.weights[q];
            for i in 0..2 {
                for a in 0..tv.n {
                    let va = tv.value(q, a);
                    for (c, sc) in SIGMA_UNITS.iter().enumerate() {
                        for b in 0..ts.n {
                            let div_i = dot(sc[i], ts.grad(q, b));
                            out.add(i * tv.n + a, c * ts.n + b, w * va * div_i);
                        }
                    }
                }
            }
        }
    }
}

/// Inflow coupling of pressure and normal stress: test p, trial sigma.
pub struct TermF;

impl FormTerm for TermF {
    fn name(&self) -> &'static str {
        "f"
    }
    fn test(&self) -> Variable {
        Variable::Pressure
    }
    fn trial(&self) -> Variable {
        Variable::Stress
    }
    fn domains(&self) -> Domains {
        Domains { boundary: true, ..Default::default() }
    }

    fn boundary(&self, _p: &FormParams, be: &BoundaryEval, hi: usize, lo: usize, out: &mut LocalMatrix) {
        let (tq, ts) = (be.trace(lo), be.trace(hi));
        out.reset(tq.n(), 3 * ts.n());
        let coef = be.epsilon_w * be.chi_tilde;
        if coef == 0.0 {
            return;
        }
        let nn = be.frame.n;
        for q in 0..be.n_points() {
            let w = be.weights[q];
            for a in 0..tq.n() {
                let va = tq.value(q, a);
                for (c, sc) in SIGMA_UNITS.iter().enumerate() {
                    let unit_nn = bilin(sc, nn, nn);
                    for b in 0..ts.n() {
                        out.add(a, c * ts.n() + b, w * coef * va * unit_nn * ts.value(q, b));
                    }
                }
            }
        }
    }
}

/// Pressure gradient against velocity: test u, trial p.
pub struct TermG;

impl FormTerm for TermG {
    fn name(&self) -> &'static str {
        "g"
    }
    fn test(&self) -> Variable {
        Variable::Velocity
    }
    fn trial(&self) -> Variable {
        Variable::Pressure
    }
    fn domains(&self) -> Domains {
        Domains { cells: true, ..Default::default() }
    }

    fn cell(&self, _p: &FormParams, ce: &CellEval, _hi: usize, lo: usize, out: &mut LocalMatrix) {
        let t = ce.basis(lo);
        let n = t.n;
        out.reset(2 * n, n);
        for q in 0..ce.n_points() {
            let w = ce.weights[q];
            for i in 0..2 {
                for a in 0..n {
                    let va = t.value(q, a);
                    for b in 0..n {
                        out.add(i * n + a, b, w * va * t.grad(q, b)[i]);
                    }
                }
            }
        }
    }
}

/// Inflow pressure diagonal.
pub struct TermH;

impl FormTerm for TermH {
    fn name(&self) -> &'static str {
        "h"
    }
    fn test(&self) -> Variable {
        Variable::Pressure
    }
    fn trial(&self) -> Variable {
        Variable::Pressure
    }
    fn domains(&self) -> Domains {
        Domains { boundary: true, ..Default::default() }
    }

    fn boundary(&self, _p: &FormParams, be: &BoundaryEval, _hi: usize, lo: usize, out: &mut LocalMatrix) {
        let t = be.trace(lo);
        let n = t.n();
        out.reset(n, n);
        let coef = be.epsilon_w * be.chi_tilde;
        if coef == 0.0 {
            return;
        }
        for q in 0..be.n_points() {
            let w = be.weights[q];
            for a in 0..n {
                for b in 0..n {
                    out.add(a, b, w * coef * t.value(q, a) * t.value(q, b));
                }
            }
        }
    }
}

/// Normal-gradient jump penalty on interior edges for one variable.
pub struct JumpTerm {
    name: &'static str,
    var: Variable,
    /// Exponent of the averaged cell diameter.
    power: i32,
}

impl JumpTerm {
    pub fn theta() -> Self {
        JumpTerm { name: "j_theta", var: Variable::Temperature, power: 3 }
    }

    pub fn velocity() -> Self {
        JumpTerm { name: "j_u", var: Variable::Velocity, power: 3 }
    }

    pub fn pressure() -> Self {
        JumpTerm { name: "j_p", var: Variable::Pressure, power: 1 }
    }

    fn delta(&self, s: &StabilizationParams) -> f64 {
        if !s.enabled {
            return 0.0;
        }
        match self.var {
            Variable::Temperature => s.delta_theta,
            Variable::Velocity => s.delta_u,
            _ => s.delta_p,
        }
    }
}

impl FormTerm for JumpTerm {
    fn name(&self) -> &'static str {
        self.name
    }
    fn test(&self) -> Variable {
        self.var
    }
    fn trial(&self) -> Variable {
        self.var
    }
    fn domains(&self) -> Domains {
        Domains { interior: true, ..Default::default() }
    }

    fn interior(&self, p: &FormParams, ie: &InteriorEval, hi: usize, lo: usize, out: &mut LocalMatrix) {
        let t = ie.jump_table(degree_of(self.var, hi, lo));
        let m = t.n();
        let nc = self.var.n_components();
        out.reset(nc * m, nc * m);
        let coef = self.delta(&p.stab) * ie.h_avg.powi(self.power);
        if coef == 0.0 {
            return;
        }
        for q in 0..ie.n_points() {
            let w = ie.weights[q] * coef;
            for a in 0..m {
                let ja = t.jump(q, a);
                for b in 0..m {
                    let v = w * ja * t.jump(q, b);
                    for c in 0..nc {
                        out.add(c * m + a, c * m + b, v);
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("a term named '{0}' is already registered")]
    KeyAlreadyTaken(String),
    #[error("no term named '{0}'")]
    NotFound(String),
}

/// Name-keyed collection of terms.
pub struct TermRegistry {
    terms: BTreeMap<&'static str, Box<dyn FormTerm>>,
}

impl TermRegistry {
    pub fn empty() -> Self {
        TermRegistry { terms: BTreeMap::new() }
    }

    /// All sub-functionals and the three jump terms.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        let all: Vec<Box<dyn FormTerm>> = vec![
            Box::new(TermA),
            Box::new(TermB),
            Box::new(TermC),
            Box::new(TermD::new()),
            Box::new(TermE),
            Box::new(TermF),
            Box::new(TermG),
            Box::new(TermH),
            Box::new(JumpTerm::theta()),
            Box::new(JumpTerm::velocity()),
            Box::new(JumpTerm::pressure()),
        ];
        for t in all {
            r.register(t).expect("builtin names are unique");
        }
        r
    }

    pub fn register(&mut self, term: Box<dyn FormTerm>) -> Result<(), RegistryError> {
        let name = term.name();
        if self.terms.contains_key(name) {
            return Err(RegistryError::KeyAlreadyTaken(name.to_string()));
        }
        self.terms.insert(name, term);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&dyn FormTerm, RegistryError> {
        self.terms.get(name).map(|b| b.as_ref()).ok_or_else(|| RegistryError::NotFound(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.terms.keys().copied()
    }
}

/// One occurrence of a term in the block system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub term: &'static str,
    pub row: Variable,
    pub col: Variable,
    pub sign: f64,
    /// Place the transpose of the term's (test, trial) matrix.
    pub transpose: bool,
}

/// Block layout of the stabilized operator, rows are test variables:
///
/// ```text
///         s      theta   sigma   u      p
/// s     [ A     -B^T    -C^T                 ]
/// theta [ B      J_th                        ]
/// sigma [ C              D      -E^T   F^T   ]
/// u     [                E       J_u   G     ]
/// p     [                F      -G^T   H+J_p ]
/// ```
pub fn compound_placements() -> Vec<Placement> {
    use Variable::*;
    let p = |term, row, col, sign, transpose| Placement { term, row, col, sign, transpose };
    vec![
        p("a", HeatFlux, HeatFlux, 1.0, false),
        p("b", Temperature, HeatFlux, 1.0, false),
        p("b", HeatFlux, Temperature, -1.0, true),
        p("c", Stress, HeatFlux, 1.0, false),
        p("c", HeatFlux, Stress, -1.0, true),
        p("d", Stress, Stress, 1.0, false),
        p("e", Velocity, Stress, 1.0, false),
        p("e", Stress, Velocity, -1.0, true),
        p("f", Pressure, Stress, 1.0, false),
        p("f", Stress, Pressure, 1.0, true),
        p("g", Velocity, Pressure, 1.0, false),
        p("g", Pressure, Velocity, -1.0, true),
        p("h", Pressure, Pressure, 1.0, false),
        p("j_theta", Temperature, Temperature, 1.0, false),
        p("j_u", Velocity, Velocity, 1.0, false),
        p("j_p", Pressure, Pressure, 1.0, false),
    ]
}

/// Row multipliers that make the compound operator symmetric.
pub fn symmetrizing_sign(v: Variable) -> f64 {
    match v {
        Variable::HeatFlux | Variable::Velocity => 1.0,
        Variable::Temperature | Variable::Stress | Variable::Pressure => -1.0,
    }
}
