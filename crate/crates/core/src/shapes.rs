//! Convex primitives and their scaling functions.
//!
//! Every shape carries a *scaling function* `F` with `F >= 0`, `F <= 1`
//! exactly on the body, and `min F = 0` at the body's local origin. Spheres
//! and ellipsoids use the smooth quadratic form (strongly convex, with
//! gradient and Hessian); capsules and polytopes use piecewise-smooth
//! closed forms. The *gauge* is the positively-1-homogeneous companion: the
//! smallest uniform scaling of the body about its center that reaches a
//! point. For capsules and polytopes gauge and scaling function coincide;
//! for spheres and ellipsoids the gauge is the square root of `F`.
//!
//! Shapes also know how to emit themselves as cone constraints (orthant and
//! second-order cone blocks, affine in the variables `(p, alpha, slacks)`),
//! which is how the minimum-scaling program is actually solved.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pose::Pose;

/// Convex primitive in its local frame. The local origin is the scaling
/// center and must be strictly inside the shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeSpec {
    Sphere {
        radius: f64,
    },
    Ellipsoid {
        semi_axes: Vec<f64>,
    },
    /// Segment of length `segment_length` along the local x axis, inflated
    /// by `radius`.
    Capsule {
        radius: f64,
        segment_length: f64,
    },
    /// Intersection of halfspaces `normals[i] . v <= offsets[i]` in the
    /// local frame; offsets must be positive so the origin is interior.
    Polytope {
        normals: Vec<Vec<f64>>,
        offsets: Vec<f64>,
    },
}

impl ShapeSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ShapeSpec::Sphere { .. } => "sphere",
            ShapeSpec::Ellipsoid { .. } => "ellipsoid",
            ShapeSpec::Capsule { .. } => "capsule",
            ShapeSpec::Polytope { .. } => "polytope",
        }
    }

    /// Whether the scaling function is smooth and strongly convex.
    pub fn is_smooth(&self) -> bool {
        matches!(
            self,
            ShapeSpec::Sphere { .. } | ShapeSpec::Ellipsoid { .. }
        )
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidShape(format!("unsupported dimension {dim}")));
        }
        match self {
            ShapeSpec::Sphere { radius } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::InvalidShape("sphere radius must be > 0".into()));
                }
            }
            ShapeSpec::Ellipsoid { semi_axes } => {
                if semi_axes.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: semi_axes.len(),
                    });
                }
                if !semi_axes.iter().all(|a| *a > 0.0 && a.is_finite()) {
                    return Err(Error::InvalidShape("semi-axes must be > 0".into()));
                }
            }
            ShapeSpec::Capsule {
                radius,
                segment_length,
            } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::InvalidShape("capsule radius must be > 0".into()));
                }
                if !(*segment_length >= 0.0 && segment_length.is_finite()) {
                    return Err(Error::InvalidShape(
                        "capsule segment length must be >= 0".into(),
                    ));
                }
            }
            ShapeSpec::Polytope { normals, offsets } => {
                if normals.len() != offsets.len() || normals.is_empty() {
                    return Err(Error::InvalidShape(
                        "polytope needs matching, nonempty normals and offsets".into(),
                    ));
                }
                for row in normals {
                    if row.len() != dim {
                        return Err(Error::DimensionMismatch {
                            expected: dim,
                            got: row.len(),
                        });
                    }
                    let norm: f64 = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if !(norm > 0.0 && norm.is_finite()) {
                        return Err(Error::InvalidShape("zero or non-finite normal".into()));
                    }
                }
                if !offsets.iter().all(|b| *b > 0.0 && b.is_finite()) {
                    return Err(Error::InvalidShape(
                        "polytope offsets must be > 0 (origin strictly interior)".into(),
                    ));
                }
                // Boundedness: the normals must positively span the space.
                // Checked over a dense direction fan; adequate for the
                // face counts used here.
                for dir in direction_fan(dim) {
                    let supported = normals.iter().any(|row| {
                        row.iter().zip(dir.iter()).map(|(a, d)| a * d).sum::<f64>() > 1e-9
                    });
                    if !supported {
                        return Err(Error::InvalidShape(
                            "polytope is unbounded (normals do not positively span)".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Upper bound on the distance from the scaling center to the surface.
    pub fn circumradius(&self) -> f64 {
        match self {
            ShapeSpec::Sphere { radius } => *radius,
            ShapeSpec::Ellipsoid { semi_axes } => semi_axes.iter().cloned().fold(0.0, f64::max),
            ShapeSpec::Capsule {
                radius,
                segment_length,
            } => radius + segment_length / 2.0,
            ShapeSpec::Polytope { normals, offsets } => {
                let dim = normals[0].len();
                let mut best: f64 = 0.0;
                for dir in direction_fan(dim) {
                    // support distance along dir: smallest face crossing
                    let mut t = f64::INFINITY;
                    for (row, b) in normals.iter().zip(offsets) {
                        let ad: f64 = row.iter().zip(dir.iter()).map(|(a, d)| a * d).sum();
                        if ad > 1e-12 {
                            t = t.min(b / ad);
                        }
                    }
                    if t.is_finite() {
                        best = best.max(t);
                    }
                }
                best
            }
        }
    }
}

/// Which derivatives [`eval_scaling`] should produce.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalOrder {
    Value,
    Grad,
    Hess,
}

/// Scaling-function value and requested derivatives at a point.
#[derive(Clone, Debug)]
pub struct ScalingEval {
    pub value: f64,
    pub grad: Option<DVector<f64>>,
    pub hess: Option<DMatrix<f64>>,
}

/// Evaluate the scaling function `F` of a posed shape at a world point.
///
/// `F <= 1` exactly on the body. Spheres/ellipsoids use the quadratic form
/// (Hessian available); capsules and polytopes use their piecewise closed
/// forms (gradient only; the polytope gradient is the subgradient of the
/// attaining row).
pub fn eval_scaling(
    shape: &ShapeSpec,
    pose: &Pose,
    point: &DVector<f64>,
    order: EvalOrder,
) -> Result<ScalingEval> {
    let dim = pose.dim();
    shape.validate(dim)?;
    pose.validate()?;
    if point.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: point.len(),
        });
    }
    if !point.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidPose("non-finite query point".into()));
    }

    let d = point - &pose.position;
    let want_grad = order != EvalOrder::Value;
    let want_hess = order == EvalOrder::Hess;

    match shape {
        ShapeSpec::Sphere { radius } => {
            let r2 = radius * radius;
            let value = d.norm_squared() / r2;
            let grad = want_grad.then(|| &d * (2.0 / r2));
            let hess = want_hess.then(|| DMatrix::identity(dim, dim) * (2.0 / r2));
            Ok(ScalingEval { value, grad, hess })
        }
        ShapeSpec::Ellipsoid { semi_axes } => {
            let rot = pose.rotation_matrix();
            let gamma2 = DMatrix::from_diagonal(&DVector::from_iterator(
                dim,
                semi_axes.iter().map(|a| 1.0 / (a * a)),
            ));
            let b = &rot * gamma2 * rot.transpose();
            let bd = &b * &d;
            let value = d.dot(&bd);
            let grad = want_grad.then(|| &bd * 2.0);
            let hess = want_hess.then(|| b * 2.0);
            Ok(ScalingEval { value, grad, hess })
        }
        ShapeSpec::Capsule {
            radius,
            segment_length,
        } => {
            if want_hess {
                return Err(Error::UnsupportedOrder { shape: "capsule" });
            }
            let rot = pose.rotation_matrix();
            let w = rot.transpose() * &d;
            let (value, grad_local) = capsule_gauge_local(&w, *radius, segment_length / 2.0);
            let grad = want_grad.then(|| rot * grad_local);
            Ok(ScalingEval {
                value,
                grad,
                hess: None,
            })
        }
        ShapeSpec::Polytope { normals, offsets } => {
            if want_hess {
                return Err(Error::UnsupportedOrder { shape: "polytope" });
            }
            let rot = pose.rotation_matrix();
            let w = rot.transpose() * &d;
            let mut value = f64::NEG_INFINITY;
            let mut best = 0;
            for (i, (row, b)) in normals.iter().zip(offsets).enumerate() {
                let v = row.iter().zip(w.iter()).map(|(a, wi)| a * wi).sum::<f64>() / b;
                if v > value {
                    value = v;
                    best = i;
                }
            }
            let value = value.max(0.0);
            let grad = want_grad.then(|| {
                let a = DVector::from_iterator(dim, normals[best].iter().cloned());
                rot * a / offsets[best]
            });
            Ok(ScalingEval {
                value,
                grad,
                hess: None,
            })
        }
    }
}

/// The 1-homogeneous gauge: the smallest uniform scaling of the body about
/// its center that contains the point. Square root of the quadratic scaling
/// function for spheres/ellipsoids; identical to the scaling function for
/// capsules and polytopes.
pub fn scale_gauge(shape: &ShapeSpec, pose: &Pose, point: &DVector<f64>) -> Result<f64> {
    let eval = eval_scaling(shape, pose, point, EvalOrder::Value)?;
    Ok(if shape.is_smooth() {
        eval.value.sqrt()
    } else {
        eval.value
    })
}

/// Capsule gauge and its gradient in the local frame: case analysis between
/// the perpendicular band (the segment can absorb the axial coordinate) and
/// the end caps (quadratic in the scaling).
fn capsule_gauge_local(w: &DVector<f64>, radius: f64, half: f64) -> (f64, DVector<f64>) {
    let dim = w.len();
    let wx = w[0];
    let perp2: f64 = (1..dim).map(|i| w[i] * w[i]).sum();
    let rho = perp2.sqrt();
    if rho * half >= radius * wx.abs() {
        // band: closest segment point is the axial projection
        if rho <= 1e-300 {
            return (0.0, DVector::zeros(dim));
        }
        let mut grad = w / (rho * radius);
        grad[0] = 0.0;
        (rho / radius, grad)
    } else {
        // end cap: (|wx| - a*half)^2 + rho^2 = (a*radius)^2, positive root
        let n2 = wx * wx + perp2;
        let disc = (radius * radius * n2 - half * half * perp2).sqrt();
        let denom = half * wx.abs() + disc;
        let value = n2 / denom;
        let mut grad = w.clone();
        grad[0] -= half * wx.signum() * value;
        grad /= disc;
        (value, grad)
    }
}

/// One cone of the conic feasibility system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cone {
    /// Componentwise nonnegative block of the given size.
    Orthant(usize),
    /// Second-order cone `{ s : ||s[1..]|| <= s[0] }` of the given dimension.
    SecondOrder(usize),
}

impl Cone {
    pub fn len(&self) -> usize {
        match self {
            Cone::Orthant(n) | Cone::SecondOrder(n) => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Which body of the pair a cone block belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairSide {
    A,
    B,
}

/// Affine map `s = A x + b`.
#[derive(Clone, Debug)]
pub struct AffineMap {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

/// One cone block `A x + b ∈ K` of the minimum-scaling program.
#[derive(Clone, Debug)]
pub struct ConeBlock {
    pub cone: Cone,
    pub map: AffineMap,
    pub owner: PairSide,
}

/// The minimum-scaling conic program for a shape pair: minimize `alpha`
/// over `x = (p, alpha, slacks...)` subject to the blocks' cone
/// constraints. The feasible set is exactly `{p in scaled A ∩ scaled B}`.
#[derive(Clone, Debug)]
pub struct ConeProblem {
    pub dim: usize,
    pub num_vars: usize,
    pub alpha_index: usize,
    pub blocks: Vec<ConeBlock>,
}

impl ConeProblem {
    /// Linear objective selecting `alpha`.
    pub fn objective(&self) -> DVector<f64> {
        let mut c = DVector::zeros(self.num_vars);
        c[self.alpha_index] = 1.0;
        c
    }

    /// Check whether `x` satisfies every cone block within `tol`.
    pub fn is_feasible(&self, x: &DVector<f64>, tol: f64) -> bool {
        self.blocks.iter().all(|blk| {
            let s = &blk.map.a * x + &blk.map.b;
            match blk.cone {
                Cone::Orthant(_) => s.iter().all(|v| *v >= -tol),
                Cone::SecondOrder(_) => s.rows(1, s.len() - 1).norm() <= s[0] + tol,
            }
        })
    }
}

/// Derivatives of one block's affine map with respect to the owning body's
/// raw pose coordinates (positions first, then orientation coordinates).
#[derive(Clone, Debug)]
pub struct BlockDerivs {
    pub per_coord: Vec<AffineMap>,
}

/// Build the minimum-scaling cone program for a posed shape pair.
pub fn to_cone_program(
    shape_a: &ShapeSpec,
    pose_a: &Pose,
    shape_b: &ShapeSpec,
    pose_b: &Pose,
) -> Result<ConeProblem> {
    Ok(build_cone_program(shape_a, pose_a, shape_b, pose_b, false)?.0)
}

/// Same as [`to_cone_program`], also returning the pose derivatives of each
/// block's affine map (used by implicit differentiation).
pub fn to_cone_program_with_derivs(
    shape_a: &ShapeSpec,
    pose_a: &Pose,
    shape_b: &ShapeSpec,
    pose_b: &Pose,
) -> Result<(ConeProblem, Vec<BlockDerivs>)> {
    let (prob, derivs) = build_cone_program(shape_a, pose_a, shape_b, pose_b, true)?;
    Ok((prob, derivs))
}

fn build_cone_program(
    shape_a: &ShapeSpec,
    pose_a: &Pose,
    shape_b: &ShapeSpec,
    pose_b: &Pose,
    with_derivs: bool,
) -> Result<(ConeProblem, Vec<BlockDerivs>)> {
    let dim = pose_a.dim();
    if pose_b.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: pose_b.dim(),
        });
    }
    shape_a.validate(dim)?;
    shape_b.validate(dim)?;
    pose_a.validate()?;
    pose_b.validate()?;

    // variable layout: p (dim), alpha, then one slack per capsule (A first)
    let needs_slack = |s: &ShapeSpec| matches!(s, ShapeSpec::Capsule { segment_length, .. } if *segment_length > 0.0);
    let mut num_vars = dim + 1;
    let slack_a = needs_slack(shape_a).then(|| {
        let idx = num_vars;
        num_vars += 1;
        idx
    });
    let slack_b = needs_slack(shape_b).then(|| {
        let idx = num_vars;
        num_vars += 1;
        idx
    });

    let mut blocks = Vec::new();
    let mut derivs = Vec::new();
    for (shape, pose, side, slack) in [
        (shape_a, pose_a, PairSide::A, slack_a),
        (shape_b, pose_b, PairSide::B, slack_b),
    ] {
        emit_shape_blocks(
            shape,
            pose,
            side,
            slack,
            dim,
            num_vars,
            with_derivs,
            &mut blocks,
            &mut derivs,
        );
    }

    Ok((
        ConeProblem {
            dim,
            num_vars,
            alpha_index: dim,
            blocks,
        },
        derivs,
    ))
}

#[allow(clippy::too_many_arguments)]
fn emit_shape_blocks(
    shape: &ShapeSpec,
    pose: &Pose,
    side: PairSide,
    slack: Option<usize>,
    dim: usize,
    num_vars: usize,
    with_derivs: bool,
    blocks: &mut Vec<ConeBlock>,
    derivs: &mut Vec<BlockDerivs>,
) {
    let alpha = dim;
    let rot = pose.rotation_matrix();
    let rot_d = pose.rotation_matrix_derivs();
    let n_orient = rot_d.len();
    let n_coords = dim + n_orient;
    let r = &pose.position;

    let zero_map = |rows: usize| AffineMap {
        a: DMatrix::zeros(rows, num_vars),
        b: DVector::zeros(rows),
    };

    match shape {
        ShapeSpec::Sphere { radius } => {
            // (R*alpha, p - r) in SOC
            let mut map = zero_map(dim + 1);
            map.a[(0, alpha)] = *radius;
            for i in 0..dim {
                map.a[(1 + i, i)] = 1.0;
                map.b[1 + i] = -r[i];
            }
            blocks.push(ConeBlock {
                cone: Cone::SecondOrder(dim + 1),
                map,
                owner: side,
            });
            if with_derivs {
                let mut per_coord = vec![zero_map(dim + 1); n_coords];
                for (j, d) in per_coord.iter_mut().enumerate().take(dim) {
                    d.b[1 + j] = -1.0;
                }
                derivs.push(BlockDerivs { per_coord });
            }
        }
        ShapeSpec::Ellipsoid { semi_axes } => {
            // (alpha, Gamma R^T (p - r)) in SOC
            let gamma = DMatrix::from_diagonal(&DVector::from_iterator(
                dim,
                semi_axes.iter().map(|a| 1.0 / a),
            ));
            let grt = &gamma * rot.transpose();
            let mut map = zero_map(dim + 1);
            map.a[(0, alpha)] = 1.0;
            map.a
                .view_mut((1, 0), (dim, dim))
                .copy_from(&grt);
            map.b.rows_mut(1, dim).copy_from(&(-&grt * r));
            blocks.push(ConeBlock {
                cone: Cone::SecondOrder(dim + 1),
                map,
                owner: side,
            });
            if with_derivs {
                let mut per_coord = vec![zero_map(dim + 1); n_coords];
                for j in 0..dim {
                    per_coord[j].b.rows_mut(1, dim).copy_from(&(-&grt.column(j)).into_owned());
                }
                for (k, rk) in rot_d.iter().enumerate() {
                    let gd = &gamma * rk.transpose();
                    per_coord[dim + k]
                        .a
                        .view_mut((1, 0), (dim, dim))
                        .copy_from(&gd);
                    per_coord[dim + k].b.rows_mut(1, dim).copy_from(&(-&gd * r));
                }
                derivs.push(BlockDerivs { per_coord });
            }
        }
        ShapeSpec::Capsule {
            radius,
            segment_length,
        } => {
            let axis_local = {
                let mut e = DVector::zeros(dim);
                e[0] = 1.0;
                e
            };
            let axis = &rot * &axis_local;
            let half = segment_length / 2.0;
            if let Some(sl) = slack {
                // orthant: (half*alpha - delta, half*alpha + delta)
                let mut band = zero_map(2);
                band.a[(0, alpha)] = half;
                band.a[(0, sl)] = -1.0;
                band.a[(1, alpha)] = half;
                band.a[(1, sl)] = 1.0;
                blocks.push(ConeBlock {
                    cone: Cone::Orthant(2),
                    map: band,
                    owner: side,
                });
                if with_derivs {
                    derivs.push(BlockDerivs {
                        per_coord: vec![zero_map(2); n_coords],
                    });
                }
                // SOC: (radius*alpha, p - r - delta*axis)
                let mut map = zero_map(dim + 1);
                map.a[(0, alpha)] = *radius;
                for i in 0..dim {
                    map.a[(1 + i, i)] = 1.0;
                    map.a[(1 + i, sl)] = -axis[i];
                    map.b[1 + i] = -r[i];
                }
                blocks.push(ConeBlock {
                    cone: Cone::SecondOrder(dim + 1),
                    map,
                    owner: side,
                });
                if with_derivs {
                    let mut per_coord = vec![zero_map(dim + 1); n_coords];
                    for (j, d) in per_coord.iter_mut().enumerate().take(dim) {
                        d.b[1 + j] = -1.0;
                    }
                    for (k, rk) in rot_d.iter().enumerate() {
                        let daxis = rk * &axis_local;
                        for i in 0..dim {
                            per_coord[dim + k].a[(1 + i, sl)] = -daxis[i];
                        }
                    }
                    derivs.push(BlockDerivs { per_coord });
                }
            } else {
                // zero-length capsule degrades to a sphere
                let mut map = zero_map(dim + 1);
                map.a[(0, alpha)] = *radius;
                for i in 0..dim {
                    map.a[(1 + i, i)] = 1.0;
                    map.b[1 + i] = -r[i];
                }
                blocks.push(ConeBlock {
                    cone: Cone::SecondOrder(dim + 1),
                    map,
                    owner: side,
                });
                if with_derivs {
                    let mut per_coord = vec![zero_map(dim + 1); n_coords];
                    for (j, d) in per_coord.iter_mut().enumerate().take(dim) {
                        d.b[1 + j] = -1.0;
                    }
                    derivs.push(BlockDerivs { per_coord });
                }
            }
        }
        ShapeSpec::Polytope { normals, offsets } => {
            // rows: offsets[i]*alpha - normals[i]^T R^T (p - r) >= 0
            let n_rows = normals.len();
            let mut map = zero_map(n_rows);
            let mut local = DMatrix::zeros(n_rows, dim);
            for (i, row) in normals.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    local[(i, j)] = *v;
                }
            }
            let world = &local * rot.transpose(); // rows: a_i^T R^T
            for i in 0..n_rows {
                for j in 0..dim {
                    map.a[(i, j)] = -world[(i, j)];
                }
                map.a[(i, alpha)] = offsets[i];
                map.b[i] = world.row(i).transpose().dot(r);
            }
            blocks.push(ConeBlock {
                cone: Cone::Orthant(n_rows),
                map,
                owner: side,
            });
            if with_derivs {
                let mut per_coord = vec![zero_map(n_rows); n_coords];
                for j in 0..dim {
                    for i in 0..n_rows {
                        per_coord[j].b[i] = world[(i, j)];
                    }
                }
                for (k, rk) in rot_d.iter().enumerate() {
                    let wd = &local * rk.transpose();
                    for i in 0..n_rows {
                        for j in 0..dim {
                            per_coord[dim + k].a[(i, j)] = -wd[(i, j)];
                        }
                        per_coord[dim + k].b[i] = wd.row(i).transpose().dot(r);
                    }
                }
                derivs.push(BlockDerivs { per_coord });
            }
        }
    }
}

/// Pose derivatives of the smooth quadratic scaling function, used by the
/// strongly-convex differentiation route. Sphere/ellipsoid only.
#[derive(Clone, Debug)]
pub struct SmoothPoseDerivs {
    /// dF/d(position), length D.
    pub df_dpos: DVector<f64>,
    /// dF/d(orientation coords), length 1 (2D) or 4 (3D).
    pub df_dorient: DVector<f64>,
    /// d(grad_p F)/d(position), D x D.
    pub d2f_dp_dpos: DMatrix<f64>,
    /// d(grad_p F)/d(orientation coords), D x (1|4).
    pub d2f_dp_dorient: DMatrix<f64>,
}

/// Derivatives of the quadratic scaling function with respect to the
/// shape's own raw pose coordinates, evaluated at a world point.
pub fn smooth_pose_derivs(
    shape: &ShapeSpec,
    pose: &Pose,
    point: &DVector<f64>,
) -> Result<SmoothPoseDerivs> {
    let dim = pose.dim();
    let d = point - &pose.position;
    match shape {
        ShapeSpec::Sphere { radius } => {
            let r2 = radius * radius;
            let n_orient = pose.orientation.coord_count();
            Ok(SmoothPoseDerivs {
                df_dpos: &d * (-2.0 / r2),
                df_dorient: DVector::zeros(n_orient),
                d2f_dp_dpos: DMatrix::identity(dim, dim) * (-2.0 / r2),
                d2f_dp_dorient: DMatrix::zeros(dim, n_orient),
            })
        }
        ShapeSpec::Ellipsoid { semi_axes } => {
            let rot = pose.rotation_matrix();
            let rot_d = pose.rotation_matrix_derivs();
            let n_orient = rot_d.len();
            let gamma2 = DMatrix::from_diagonal(&DVector::from_iterator(
                dim,
                semi_axes.iter().map(|a| 1.0 / (a * a)),
            ));
            let b = &rot * &gamma2 * rot.transpose();
            let bd = &b * &d;
            let mut df_dorient = DVector::zeros(n_orient);
            let mut d2f_dp_dorient = DMatrix::zeros(dim, n_orient);
            for (k, rk) in rot_d.iter().enumerate() {
                let bk = rk * &gamma2 * rot.transpose() + &rot * &gamma2 * rk.transpose();
                let bkd = &bk * &d;
                df_dorient[k] = d.dot(&bkd);
                d2f_dp_dorient.column_mut(k).copy_from(&(bkd * 2.0));
            }
            Ok(SmoothPoseDerivs {
                df_dpos: &bd * -2.0,
                df_dorient,
                d2f_dp_dpos: &b * -2.0,
                d2f_dp_dorient,
            })
        }
        other => Err(Error::UnsupportedMethod {
            method: "smooth_pose_derivs",
            reason: format!("{} has no smooth scaling function", other.name()),
        }),
    }
}

/// Fixed fan of probe directions used for polytope boundedness and
/// circumradius estimates.
fn direction_fan(dim: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    if dim == 2 {
        let n = 256;
        for i in 0..n {
            let t = 2.0 * std::f64::consts::PI * (i as f64) / (n as f64);
            dirs.push(vec![t.cos(), t.sin()]);
        }
    } else {
        let n = 24;
        for i in 0..n {
            let phi = std::f64::consts::PI * ((i as f64) + 0.5) / (n as f64);
            for j in 0..n {
                let th = 2.0 * std::f64::consts::PI * (j as f64) / (n as f64);
                dirs.push(vec![phi.sin() * th.cos(), phi.sin() * th.sin(), phi.cos()]);
            }
        }
        for k in 0..3 {
            let mut e = vec![0.0; 3];
            e[k] = 1.0;
            dirs.push(e.clone());
            e[k] = -1.0;
            dirs.push(e);
        }
    }
    dirs
}

/// Axis-aligned box polytope helper: halfspaces of `|v_i| <= half_extents[i]`.
pub fn box_polytope(half_extents: &[f64]) -> ShapeSpec {
    let dim = half_extents.len();
    let mut normals = Vec::with_capacity(2 * dim);
    let mut offsets = Vec::with_capacity(2 * dim);
    for i in 0..dim {
        for sign in [1.0, -1.0] {
            let mut row = vec![0.0; dim];
            row[i] = sign;
            normals.push(row);
            offsets.push(half_extents[i]);
        }
    }
    ShapeSpec::Polytope { normals, offsets }
}
